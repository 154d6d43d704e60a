//! Closed forms against quadrature on the standard grid, plus the ordering
//! properties of the metrics.

use ris_perf::channel::{laguerre_params, CascadedLink, RicianParams, SnrModel};
use ris_perf::db_to_linear;
use ris_perf::performance::*;

const NS: [u32; 3] = [1, 2, 5];
const KS: [f64; 4] = [0.0, 1.0, 5.0, 10.0];
const DBS: [f64; 5] = [0.0, 5.0, 10.0, 15.0, 20.0];

#[derive(Debug, Clone, Copy)]
struct Cell {
    asep_closed: f64,
    asep_quad: f64,
    nocsi_closed: f64,
    nocsi_quad: f64,
    gamma0: f64,
    residual: f64,
    csi_literal: f64,
    csi_corrected: f64,
    csi_quad: f64,
}

fn model(n: u32, k: f64, db: f64) -> SnrModel {
    let hop = RicianParams::from_sigma2(k, 0.5).unwrap();
    let approx = laguerre_params(&CascadedLink::new(hop, hop, n).unwrap()).unwrap();
    SnrModel::new(approx, db_to_linear(db)).unwrap()
}

fn cell(n: u32, k: f64, db: f64) -> Cell {
    let m = model(n, k, db);
    let wf = waterfill_cutoff(&m, 1e-11).unwrap();
    Cell {
        asep_closed: asep_closed(&Modulation::BPSK, &m).unwrap(),
        asep_quad: asep_quadrature(&Modulation::BPSK, &m).unwrap(),
        nocsi_closed: capacity_nocsi_closed(&m).unwrap(),
        nocsi_quad: capacity_nocsi_quadrature(&m).unwrap(),
        gamma0: wf.gamma0,
        residual: wf.residual,
        csi_literal: capacity_csi_closed(&m, wf.gamma0).unwrap(),
        csi_corrected: capacity_csi_closed_corrected(&m, wf.gamma0).unwrap(),
        csi_quad: capacity_csi_quadrature(&m, wf.gamma0).unwrap(),
    }
}

fn grid() -> Vec<((usize, usize, usize), Cell)> {
    let mut out = Vec::new();
    for (i, &n) in NS.iter().enumerate() {
        for (j, &k) in KS.iter().enumerate() {
            for (l, &db) in DBS.iter().enumerate() {
                out.push(((i, j, l), cell(n, k, db)));
            }
        }
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn closed_forms_track_quadrature_on_the_grid() {
    let mut literal_mismatches = 0;
    for ((i, j, l), c) in grid() {
        let at = format!("N={} K={} {} dB", NS[i], KS[j], DBS[l]);
        if c.asep_quad > 1e-12 {
            assert!(rel(c.asep_closed, c.asep_quad) < 1e-5, "ASEP {at}: {c:?}");
        }
        assert!(rel(c.nocsi_closed, c.nocsi_quad) < 1e-5, "no-CSI {at}: {c:?}");
        assert!(rel(c.csi_corrected, c.csi_quad) < 1e-5, "CSI {at}: {c:?}");
        if rel(c.csi_literal, c.csi_quad) >= 1e-5 {
            literal_mismatches += 1;
        } else {
            // the literal argument only coincides where γ̄ = 1
            assert_eq!(DBS[l], 0.0, "{at}");
        }
        assert!(c.residual.abs() < 1e-9, "{at}");
        assert!(c.gamma0 > 0.0 && c.gamma0 <= 1.0, "{at}");
    }
    assert_eq!(literal_mismatches, NS.len() * KS.len() * (DBS.len() - 1));
}

#[test]
fn metric_orderings() {
    let cells = grid();
    let at = |i: usize, j: usize, l: usize| cells[(i * KS.len() + j) * DBS.len() + l].1;
    for i in 0..NS.len() {
        for j in 0..KS.len() {
            for l in 0..DBS.len() {
                let c = at(i, j, l);
                let gap = c.csi_quad - c.nocsi_quad;
                assert!(gap >= -1e-9, "N={} K={} {} dB: gap {gap:e}", NS[i], KS[j], DBS[l]);
                assert!((0.0..=0.5).contains(&c.asep_quad));
                for (prev, what) in [
                    (l.checked_sub(1).map(|l| at(i, j, l)), "SNR"),
                    (j.checked_sub(1).map(|j| at(i, j, l)), "K"),
                    (i.checked_sub(1).map(|i| at(i, j, l)), "N"),
                ] {
                    let Some(p) = prev else { continue };
                    assert!(c.asep_quad <= p.asep_quad, "ASEP vs {what}");
                    assert!(c.nocsi_quad >= p.nocsi_quad, "capacity vs {what}");
                    assert!(c.csi_quad >= p.csi_quad, "CSI capacity vs {what}");
                    if what != "SNR" {
                        assert!(gap <= p.csi_quad - p.nocsi_quad + 1e-9, "gap vs {what}");
                    }
                }
            }
        }
    }
    // strong line of sight with many elements: water filling buys almost nothing
    for l in 2..DBS.len() {
        let c = at(2, 3, l);
        assert!(c.csi_quad - c.nocsi_quad < 0.05);
    }
}

#[test]
fn fig2_ordering_in_sigma2() {
    for db in DBS {
        let mut prev = f64::INFINITY;
        for sigma2 in [0.5, 1.0, 2.0] {
            let hop = RicianParams::from_sigma2(1.0, sigma2).unwrap();
            let approx = laguerre_params(&CascadedLink::new(hop, hop, 5).unwrap()).unwrap();
            let m = SnrModel::new(approx, db_to_linear(db)).unwrap();
            let v = asep_quadrature(&Modulation::BPSK, &m).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }
}
