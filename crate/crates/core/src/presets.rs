//! Experiment presets for the standard sweeps.
//!
//! All presets start from [`GenParams::default`]: `R_L = 200 m`, three relays,
//! four picocells, `alpha = 3.7`, backhaul 100 / 200 / 1000 Mbps, `tau = 5`
//! Mbps, `Z = 0.9` and 21 dual-link UEs.

use crate::power_control::PolicyKind;
use crate::scenario_gen::GenParams;
use crate::sim_engine::{Experiment, SweepPoint, DEFAULT_EPS, DEFAULT_WINDOW};
use crate::{Error, Result};

pub const NAMES: [&str; 5] = ["fig2b", "fig3", "fig4", "fig5-picos", "fig5-relays"];
pub const TRIAL_ITERATIONS: usize = 50;
pub const CONVERGENCE_ITERATIONS: usize = 100;

pub const FIG2B_TAU_MBPS: [f64; 5] = [1.0, 2.0, 5.0, 10.0, 20.0];
pub const FIG2B_Z: [f64; 4] = [0.5, 0.7, 0.9, 0.95];
pub const FIG3_UES: [usize; 7] = [4, 8, 14, 21, 28, 35, 42];
pub const FIG4_SCALE: [f64; 7] = [0.1, 0.2, 0.3, 0.5, 1.0, 1.5, 2.0];
pub const FIG5_CELLS: [usize; 5] = [1, 2, 4, 6, 8];
/// Small-cell backhaul used by the cell-count sweeps, bits/s.
pub const FIG5_SMALL_CELL_BACKHAUL: f64 = 50e6;
pub const FIG5_UES_PER_CELL: usize = 3;

const ALL: [PolicyKind; 3] = [PolicyKind::Bdt, PolicyKind::Waterfilling, PolicyKind::Greedy];

fn experiment(preset: &str, var: &str, points: Vec<SweepPoint>, max_iter: usize, contractive: bool) -> Experiment {
    Experiment {
        preset: preset.to_string(),
        sweep_var: var.to_string(),
        points,
        policies: ALL.to_vec(),
        max_iter,
        eps: DEFAULT_EPS,
        window: DEFAULT_WINDOW,
        require_contractive: contractive,
    }
}

/// Convergence over a `tau x Z` grid, restricted to contractive drops.
/// Values are written as `"<tau Mbps>:<Z>"`.
pub fn fig2b() -> Experiment {
    let mut points = Vec::new();
    for tau in FIG2B_TAU_MBPS {
        for z in FIG2B_Z {
            points.push(SweepPoint {
                value: format!("{tau}:{z}"),
                params: GenParams { tau: tau * 1e6, z, ..GenParams::default() },
            });
        }
    }
    experiment("fig2b", "tau_mbps:z", points, CONVERGENCE_ITERATIONS, true)
}

/// Number of dual-link UEs.
pub fn fig3() -> Experiment {
    let points = FIG3_UES
        .iter()
        .map(|&n| SweepPoint { value: n.to_string(), params: GenParams { n_ues: n, ..GenParams::default() } })
        .collect();
    experiment("fig3", "n_ues", points, TRIAL_ITERATIONS, false)
}

/// Backhaul scale `L`.
pub fn fig4() -> Experiment {
    let points = FIG4_SCALE
        .iter()
        .map(|&l| SweepPoint { value: l.to_string(), params: GenParams { backhaul_scale: l, ..GenParams::default() } })
        .collect();
    experiment("fig4", "backhaul_scale", points, TRIAL_ITERATIONS, false)
}

/// Picocell (`relays = false`) or relay count, three UEs per small cell.
pub fn fig5(relays: bool) -> Experiment {
    let points = FIG5_CELLS
        .iter()
        .map(|&k| {
            let (n_relays, n_picos) = if relays { (k, 0) } else { (0, k) };
            SweepPoint {
                value: k.to_string(),
                params: GenParams {
                    n_relays,
                    n_picos,
                    n_ues: FIG5_UES_PER_CELL * k,
                    eta_r: FIG5_SMALL_CELL_BACKHAUL,
                    eta_p: FIG5_SMALL_CELL_BACKHAUL,
                    ..GenParams::default()
                },
            }
        })
        .collect();
    let (name, var) = if relays { ("fig5-relays", "n_relays") } else { ("fig5-picos", "n_picos") };
    experiment(name, var, points, TRIAL_ITERATIONS, false)
}

pub fn preset(name: &str) -> Result<Experiment> {
    match name {
        "fig2b" => Ok(fig2b()),
        "fig3" => Ok(fig3()),
        "fig4" => Ok(fig4()),
        "fig5" | "fig5-picos" => Ok(fig5(false)),
        "fig5-relays" => Ok(fig5(true)),
        other => Err(Error::InvalidParams(format!(
            "unknown preset '{other}' (expected one of {})",
            NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        for name in NAMES {
            assert_eq!(preset(name).unwrap().preset, name);
        }
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(fig2b().points.len(), 20);
        assert_eq!(fig4().points[2].params.backhaul_scale, 0.3);
        let f5 = fig5(true);
        assert_eq!(f5.points[4].params.n_relays, 8);
        assert_eq!(f5.points[4].params.n_ues, 24);
    }
}
