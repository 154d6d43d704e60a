use std::io::Write;

use rayon::prelude::*;
use ris_perf::channel::{CascadedLink, RicianParams};
use ris_perf::performance::CsiArgument;

use crate::args::{FigureArgs, FigureName};
use crate::eval::{coord, evaluate, in_range, num, Metrics};
use crate::plot::{Plot, Series};
use crate::{emit, pool, CliError};

/// Scatter variances for the ASEP figure. Not fixed by any published value;
/// chosen to span a factor of four around the default.
pub const FIG2_SIGMA2: [f64; 3] = [0.5, 1.0, 2.0];
pub const FIG2_ELEMENTS: u32 = 5;
pub const FIG2_K: f64 = 1.0;
pub const CAPACITY_K: [f64; 4] = [0.0, 1.0, 5.0, 10.0];
pub const CAPACITY_SIGMA2: f64 = 0.5;

fn link(k: f64, sigma2: f64, n: u32) -> Result<CascadedLink, CliError> {
    let hop = RicianParams::from_sigma2(k, sigma2).map_err(CliError::usage)?;
    CascadedLink::new(hop, hop, n).map_err(CliError::usage)
}

pub fn run(args: &FigureArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let grid = args.grid.points()?;
    let modulation = args.modulation.modulation()?;
    let argument: CsiArgument = args.csi_argument.into();

    // one curve per swept parameter value
    let (n, curves, swept): (u32, Vec<(f64, CascadedLink)>, &str) = match args.name {
        FigureName::Fig2 => (
            FIG2_ELEMENTS,
            FIG2_SIGMA2
                .iter()
                .map(|&s| Ok((s, link(FIG2_K, s, FIG2_ELEMENTS)?)))
                .collect::<Result<_, CliError>>()?,
            "sigma2",
        ),
        FigureName::Fig3 | FigureName::Fig4 => {
            let n = if args.name == FigureName::Fig3 { 2 } else { 5 };
            (
                n,
                CAPACITY_K
                    .iter()
                    .map(|&k| Ok((k, link(k, CAPACITY_SIGMA2, n)?)))
                    .collect::<Result<_, CliError>>()?,
                "k",
            )
        }
    };

    let cells: Vec<(usize, f64)> = (0..curves.len())
        .flat_map(|c| grid.iter().map(move |&db| (c, db)))
        .collect();
    let metrics: Vec<Metrics> = pool(args.jobs)?.install(|| {
        cells
            .par_iter()
            .map(|&(c, db)| {
                evaluate(&curves[c].1, db, &modulation, 0.0).map_err(|e| {
                    CliError::Numerical(format!("at {swept}={} snr_db={}: {e}", coord(curves[c].0), coord(db)))
                })
            })
            .collect::<Result<_, _>>()
    })?;

    let name = match args.name {
        FigureName::Fig2 => "fig2",
        FigureName::Fig3 => "fig3",
        FigureName::Fig4 => "fig4",
    };
    let mut csv = format!("# figure: {name}\n# elements: {n}\n");
    match args.name {
        FigureName::Fig2 => {
            csv += &format!("# k1: {FIG2_K}\n# k2: {FIG2_K}\n");
            csv += "# sigma2: 0.5,1,2 (chosen default; the three variances are a free choice)\n";
            csv += &format!("# modulation: p={} q={}\n", modulation.p(), modulation.q());
            csv += "sigma2,snr_db,asep_closed,asep_quad\n";
        }
        _ => {
            csv += &format!("# sigma2: {CAPACITY_SIGMA2}\n");
            csv += &format!(
                "# csi_argument: {}\n",
                if argument == CsiArgument::Corrected { "corrected" } else { "literal" }
            );
            csv += "k,snr_db,cap_nocsi_closed,cap_nocsi_quad,gamma0,cap_csi_closed,cap_csi_quad\n";
        }
    }
    let half_p = 0.5 * modulation.p();
    for (&(c, db), m) in cells.iter().zip(&metrics) {
        let at = |e: String| CliError::Numerical(format!("at {swept}={} snr_db={}: {e}", coord(curves[c].0), coord(db)));
        let mut fields = vec![coord(curves[c].0), coord(db)];
        let values: Vec<(&str, f64, f64)> = match args.name {
            FigureName::Fig2 => vec![("asep_closed", m.asep_closed, half_p), ("asep_quad", m.asep_quad, half_p)],
            _ => vec![
                ("cap_nocsi_closed", m.cap_nocsi_closed, f64::MAX),
                ("cap_nocsi_quad", m.cap_nocsi_quad, f64::MAX),
                ("gamma0", m.gamma0, 1.0),
                ("cap_csi_closed", m.cap_csi_closed(argument), f64::MAX),
                ("cap_csi_quad", m.cap_csi_quad, f64::MAX),
            ],
        };
        for (what, v, hi) in values {
            fields.push(num(in_range(what, v, 0.0, hi).map_err(at)?));
        }
        csv += &fields.join(",");
        csv.push('\n');
    }
    emit(args.out.as_deref(), &csv, stdout)?;

    if let Some(path) = &args.plot {
        let mut series = Vec::new();
        for (c, (value, _)) in curves.iter().enumerate() {
            let at = |f: &dyn Fn(&Metrics) -> f64| -> Vec<(f64, f64)> {
                cells
                    .iter()
                    .zip(&metrics)
                    .filter(|((cc, _), _)| *cc == c)
                    .map(|(&(_, db), m)| (db, f(m)))
                    .collect()
            };
            match args.name {
                FigureName::Fig2 => series.push(Series {
                    label: format!("σ² = {}", coord(*value)),
                    points: at(&|m| m.asep_quad),
                    dashed: false,
                }),
                _ => {
                    series.push(Series {
                        label: format!("K = {}, no CSI", coord(*value)),
                        points: at(&|m| m.cap_nocsi_quad),
                        dashed: false,
                    });
                    series.push(Series {
                        label: format!("K = {}, CSI", coord(*value)),
                        points: at(&|m| m.cap_csi_quad),
                        dashed: true,
                    });
                }
            }
        }
        let plot = match args.name {
            FigureName::Fig2 => Plot {
                title: format!("ASEP, N = {n}, K = {FIG2_K}"),
                x_label: "average SNR (dB)".into(),
                y_label: "ASEP".into(),
                log_y: true,
                series,
            },
            _ => Plot {
                title: format!("Ergodic capacity, N = {n}"),
                x_label: "average SNR (dB)".into(),
                y_label: "capacity (bit/s/Hz)".into(),
                log_y: false,
                series,
            },
        };
        std::fs::write(path, plot.to_svg()).map_err(|e| CliError::io(&path.display().to_string(), e))?;
    }
    Ok(())
}
