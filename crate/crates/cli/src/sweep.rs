use std::io::Write;

use rayon::prelude::*;
use ris_perf::channel::CascadedLink;
use ris_perf::monte_carlo::{simulate_points, SimConfig, SimPoint, SimSummary};
use ris_perf::performance::{CsiArgument, Modulation};

use crate::args::SweepArgs;
use crate::eval::{self, coord, evaluate, in_range, num, tracks, Metrics, ASEP_FLOOR};
use crate::plot::{Plot, Series};
use crate::{emit, pool, workers, CliError};

pub const HEADER: &str = "snr_db,asep_closed,asep_quad,cap_nocsi_closed,cap_nocsi_quad,gamma0,\
cap_csi_closed,cap_csi_quad,mc_asep,mc_cap_nocsi,mc_cap_csi";

fn describe(link: &CascadedLink) -> String {
    format!(
        "N={} K1={} K2={} omega1={} omega2={}",
        link.n_elements(),
        link.hop1.k(),
        link.hop2.k(),
        link.hop1.omega(),
        link.hop2.omega()
    )
}

/// Closed forms and quadrature at every grid point, in grid order.
pub(crate) fn metrics_grid(
    link: &CascadedLink,
    snr_db: &[f64],
    modulation: &Modulation,
    perturb: f64,
) -> Result<Vec<Metrics>, CliError> {
    snr_db
        .par_iter()
        .map(|&db| {
            evaluate(link, db, modulation, perturb).map_err(|e| {
                CliError::Numerical(format!("at snr_db={} ({}): {e}", coord(db), describe(link)))
            })
        })
        .collect()
}

pub(crate) fn simulate_grid(
    link: &CascadedLink,
    metrics: &[Metrics],
    modulation: &Modulation,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<SimSummary>, CliError> {
    let points: Vec<SimPoint> = metrics
        .iter()
        .map(|m| SimPoint {
            gamma_bar: m.gamma_bar,
            gamma0: Some(m.gamma0),
        })
        .collect();
    let config = SimConfig {
        link: *link,
        gamma_bar: points[0].gamma_bar,
        trials,
        seed,
        workers,
        modulation: *modulation,
    };
    simulate_points(&config, &points)
        .map_err(|e| CliError::Numerical(format!("Monte Carlo ({}): {e}", describe(link))))
}

/// Formats one CSV row after checking the range of every value.
fn row(
    db: f64,
    m: &Metrics,
    sim: Option<&SimSummary>,
    argument: CsiArgument,
    half_p: f64,
) -> Result<String, String> {
    let mut fields = vec![coord(db)];
    for (what, v, hi) in [
        ("asep_closed", m.asep_closed, half_p),
        ("asep_quad", m.asep_quad, half_p),
        ("cap_nocsi_closed", m.cap_nocsi_closed, f64::MAX),
        ("cap_nocsi_quad", m.cap_nocsi_quad, f64::MAX),
    ] {
        fields.push(num(in_range(what, v, 0.0, hi)?));
    }
    if !(m.gamma0 > 0.0 && m.gamma0 <= 1.0) {
        return Err(format!("gamma0 = {:e} outside (0, 1]", m.gamma0));
    }
    fields.push(num(m.gamma0));
    fields.push(num(in_range("cap_csi_closed", m.cap_csi_closed(argument), 0.0, f64::MAX)?));
    fields.push(num(in_range("cap_csi_quad", m.cap_csi_quad, 0.0, f64::MAX)?));
    match sim {
        Some(s) => {
            fields.push(num(in_range("mc_asep", s.empirical_asep, 0.0, half_p)?));
            fields.push(num(s.mean_capacity_nocsi));
            fields.push(num(s.mean_capacity_csi.unwrap_or(0.0)));
        }
        None => fields.extend(std::iter::repeat_n(String::new(), 3)),
    }
    Ok(fields.join(","))
}

/// Closed forms that stray from quadrature at one point.
pub(crate) fn mismatches(m: &Metrics, argument: CsiArgument) -> Vec<&'static str> {
    let mut out = Vec::new();
    if m.asep_quad > ASEP_FLOOR && !tracks(m.asep_closed, m.asep_quad) {
        out.push("asep_closed");
    }
    if !tracks(m.cap_nocsi_closed, m.cap_nocsi_quad) {
        out.push("cap_nocsi_closed");
    }
    if !tracks(m.cap_csi_closed(argument), m.cap_csi_quad) {
        out.push("cap_csi_closed");
    }
    out
}

pub fn run(args: &SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let link = args.link.link()?;
    let modulation = args.modulation.modulation()?;
    let grid = args.grid.points()?;
    let argument: CsiArgument = args.csi_argument.into();

    let pool = pool(args.jobs)?;
    let metrics = pool.install(|| metrics_grid(&link, &grid, &modulation, args.perturb_meijer))?;
    let sims = match args.mc_trials {
        Some(t) => Some(simulate_grid(&link, &metrics, &modulation, t, args.seed, workers(args.jobs))?),
        None => None,
    };

    let mut csv = String::from(HEADER);
    csv.push('\n');
    let mut strays = Vec::new();
    for (i, (&db, m)) in grid.iter().zip(&metrics).enumerate() {
        let sim = sims.as_ref().map(|s| &s[i]);
        let line = row(db, m, sim, argument, 0.5 * modulation.p())
            .map_err(|e| CliError::Numerical(format!("at snr_db={} ({}): {e}", coord(db), describe(&link))))?;
        csv += &line;
        csv.push('\n');
        for what in mismatches(m, argument) {
            strays.push(format!("{what} at snr_db={}", coord(db)));
        }
    }
    emit(args.out.as_deref(), &csv, stdout)?;

    if let Some(path) = &args.plot {
        let curve = |f: &dyn Fn(&Metrics) -> f64| grid.iter().zip(&metrics).map(|(&x, m)| (x, f(m))).collect();
        let plot = Plot {
            title: format!("Ergodic capacity, {}", describe(&link)),
            x_label: "average SNR (dB)".into(),
            y_label: "capacity (bit/s/Hz)".into(),
            log_y: false,
            series: vec![
                Series {
                    label: "no CSI".into(),
                    points: curve(&|m| m.cap_nocsi_quad),
                    dashed: false,
                },
                Series {
                    label: "water filling".into(),
                    points: curve(&|m| m.cap_csi_quad),
                    dashed: true,
                },
            ],
        };
        std::fs::write(path, plot.to_svg()).map_err(|e| CliError::io(&path.display().to_string(), e))?;
    }

    if !strays.is_empty() {
        let _ = writeln!(
            stderr,
            "closed forms off quadrature by more than {:e}: {}",
            eval::TRACK_TOL,
            strays.join("; ")
        );
        if args.strict {
            return Err(CliError::Strict(format!("{} closed-form mismatches", strays.len())));
        }
    }
    Ok(())
}
