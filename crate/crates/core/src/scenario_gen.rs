//! Scenario construction: random drops over a rectangular service area and
//! the fixed two-UE convergence example.
//!
//! Random drops partition a 3 km x 3.2 km area (centered on the macrocell)
//! into `N_r + N_p + 1` equal rectangles. The macrocell sits at the center,
//! and each small cell is dropped uniformly inside its own rectangle. UEs are
//! spread round-robin over the small cells, uniformly within a disc of radius
//! `R_L`. The first link goes to the nearest small cell and the second to the
//! macrocell.
//!
//! Channel plan: with `n` dual-link UEs there are `n + 1` shared channels.
//! The k-th UE attached to a small cell uses shared channel `k` on its first
//! link; second links get distinct shared channels at the macrocell, never the
//! UE's own first-link channel. Single-link fixed-SINR UEs get channels of
//! their own tier (`n + 1 + k`), so they are never co-channel with a second
//! link. Every channel draws its bandwidth uniformly from
//! [`GenParams::bandwidths`].
//!
//! Gains are `gain_scale * kappa * max(d, 1 m)^-alpha` with `kappa` drawn from
//! a unit-mean exponential independently per (UE, PoA, channel).

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::net_model::{Channel, GainEntry, Poa, PoaKind, Scenario, Ue};
use crate::{Error, Result, Scalar};

/// `-190 dBW/Hz`.
pub const NOISE_PSD: f64 = 1e-19;
/// Path-loss constant at the 1 m reference distance. With `alpha = 3.7` a
/// 10 MHz link at 2 km has normalized noise 0.0164 W.
pub const GAIN_SCALE: f64 = 100.0;
pub const REFERENCE_DISTANCE: f64 = 1.0;
pub const AREA: [f64; 2] = [3000.0, 3200.0];
const MBPS: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    /// Dual-connectivity UEs.
    pub n_ues: usize,
    /// Additional single-link UEs holding a fixed SINR target.
    pub n_fixed_sinr: usize,
    pub fixed_sinr_target: f64,
    pub n_relays: usize,
    pub n_picos: usize,
    /// UE drop radius around its small cell, meters.
    pub radius_rl: f64,
    pub alpha: f64,
    /// Candidate channel bandwidths, Hz.
    pub bandwidths: Vec<f64>,
    /// Backhaul capacities at `backhaul_scale = 1`, bits/s.
    pub eta_r: f64,
    pub eta_p: f64,
    pub eta_b: f64,
    pub backhaul_scale: f64,
    pub tau: f64,
    pub z: f64,
    pub p_max: f64,
    pub noise_psd: f64,
    pub gain_scale: f64,
    pub area: [f64; 2],
    /// Upper bound on the channel pool size; `None` means unbounded.
    pub max_channels: Option<usize>,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            n_ues: 21,
            n_fixed_sinr: 0,
            fixed_sinr_target: 1.0,
            n_relays: 3,
            n_picos: 4,
            radius_rl: 200.0,
            alpha: 3.7,
            bandwidths: vec![1e6, 5e6],
            eta_r: 100.0 * MBPS,
            eta_p: 200.0 * MBPS,
            eta_b: 1000.0 * MBPS,
            backhaul_scale: 1.0,
            tau: 5.0 * MBPS,
            z: 0.9,
            p_max: 1.0,
            noise_psd: NOISE_PSD,
            gain_scale: GAIN_SCALE,
            area: AREA,
            max_channels: None,
            seed: 0,
        }
    }
}

impl GenParams {
    fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if !(self.radius_rl > 0.0) {
            return bad("radius_rl must be > 0");
        }
        if !(2.0..=6.0).contains(&self.alpha) {
            return bad("alpha must lie in [2, 6]");
        }
        if !(self.backhaul_scale > 0.0) {
            return bad("backhaul scale must be > 0");
        }
        if self.bandwidths.is_empty() || self.bandwidths.iter().any(|&w| !(w > 0.0)) {
            return bad("bandwidth choices must be non-empty and positive");
        }
        if !(self.tau > 0.0) || !(self.z > 0.0 && self.z < 1.0) {
            return bad("tau must be > 0 and z in (0, 1)");
        }
        if !(self.p_max > 0.0 && self.noise_psd > 0.0 && self.gain_scale > 0.0) {
            return bad("p_max, noise_psd and gain_scale must be > 0");
        }
        if self.n_fixed_sinr > 0 && !(self.fixed_sinr_target > 0.0) {
            return bad("fixed SINR target must be > 0");
        }
        if self.n_ues + self.n_fixed_sinr > 0 && self.n_relays + self.n_picos == 0 {
            return bad("UEs need at least one small cell to attach to");
        }
        Ok(())
    }
}

pub fn path_gain(scale: f64, kappa: f64, distance: f64, alpha: f64) -> f64 {
    scale * kappa * distance.max(REFERENCE_DISTANCE).powf(-alpha)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Most balanced `rows x cols = cells` grid with `rows <= cols`.
fn grid_shape(cells: usize) -> (usize, usize) {
    let mut rows = 1;
    for r in 1..=cells {
        if r * r > cells {
            break;
        }
        if cells.is_multiple_of(r) {
            rows = r;
        }
    }
    (rows, cells / rows)
}

fn cast<T: Scalar>(p: [f64; 2]) -> [T; 2] {
    [T::lit(p[0]), T::lit(p[1])]
}

/// Draws a random scenario; identical parameters give identical scenarios.
pub fn generate<T: Scalar>(params: &GenParams) -> Result<Scenario<T>> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n_small = params.n_relays + params.n_picos;
    let [width, height] = params.area;

    // Small cells, one per grid rectangle; the macro keeps the central one.
    let (rows, cols) = grid_shape(n_small + 1);
    let (cw, ch) = (width / cols as f64, height / rows as f64);
    let center_cell = (rows / 2).min(rows - 1) * cols + (cols / 2).min(cols - 1);
    let mut cells: Vec<usize> = (0..rows * cols).filter(|&c| c != center_cell).collect();
    cells.shuffle(&mut rng);
    let margin_x = params.radius_rl.min(0.25 * cw);
    let margin_y = params.radius_rl.min(0.25 * ch);
    let mut small_pos = Vec::with_capacity(n_small);
    for &cell in cells.iter().take(n_small) {
        let (r, c) = (cell / cols, cell % cols);
        let x0 = -width / 2.0 + c as f64 * cw + margin_x;
        let y0 = -height / 2.0 + r as f64 * ch + margin_y;
        let x = x0 + rng.random::<f64>() * (cw - 2.0 * margin_x);
        let y = y0 + rng.random::<f64>() * (ch - 2.0 * margin_y);
        small_pos.push([x, y]);
    }
    let scale = params.backhaul_scale;
    let mut poas: Vec<Poa<T>> = small_pos
        .iter()
        .enumerate()
        .map(|(k, &pos)| {
            let (kind, cap) = if k < params.n_relays {
                (PoaKind::Relay, params.eta_r)
            } else {
                (PoaKind::Picocell, params.eta_p)
            };
            Poa { id: k + 1, kind, position: cast(pos), backhaul_capacity: T::lit(cap * scale) }
        })
        .collect();
    let macro_id = n_small + 1;
    poas.push(Poa {
        id: macro_id,
        kind: PoaKind::Macrocell,
        position: [T::zero(); 2],
        backhaul_capacity: T::lit(params.eta_b * scale),
    });

    // UE drops, round-robin over small cells.
    let total_ues = params.n_ues + params.n_fixed_sinr;
    let mut ue_pos = Vec::with_capacity(total_ues);
    let mut serving = Vec::with_capacity(total_ues);
    for k in 0..total_ues {
        let anchor = small_pos[k % n_small];
        let r = params.radius_rl * rng.random::<f64>().sqrt();
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        let pos = [anchor[0] + r * theta.cos(), anchor[1] + r * theta.sin()];
        let nearest = small_pos
            .iter()
            .enumerate()
            .min_by(|a, b| dist(pos, *a.1).partial_cmp(&dist(pos, *b.1)).unwrap())
            .map(|(idx, _)| idx + 1)
            .unwrap();
        ue_pos.push(pos);
        serving.push(nearest);
    }

    // Channel plan.
    let n_dual = params.n_ues;
    let shared = if n_dual > 0 { n_dual + 1 } else { 0 };
    let mut dual_slots = vec![0usize; n_small + 1];
    let mut fm_slots = vec![0usize; n_small + 1];
    let mut chan_1 = Vec::with_capacity(total_ues);
    for (k, &poa) in serving.iter().enumerate() {
        if k < n_dual {
            chan_1.push(dual_slots[poa] + 1);
            dual_slots[poa] += 1;
        } else {
            chan_1.push(shared + fm_slots[poa] + 1);
            fm_slots[poa] += 1;
        }
    }
    let n_channels = shared + fm_slots.iter().copied().max().unwrap_or(0);
    if let Some(limit) = params.max_channels {
        if n_channels > limit {
            return Err(Error::InfeasibleChannels(format!(
                "{n_channels} channels needed for the UEs at each PoA, at most {limit} allowed"
            )));
        }
    }
    let channels: Vec<Channel<T>> = (1..=n_channels)
        .map(|id| {
            let w = params.bandwidths[rng.random_range(0..params.bandwidths.len())];
            Channel { id, bandwidth: T::lit(w) }
        })
        .collect();
    let mut chan_2 = vec![0usize; n_dual];
    let mut order: Vec<usize> = (0..n_dual).collect();
    order.shuffle(&mut rng);
    let mut free: Vec<usize> = (1..=shared).collect();
    for &k in &order {
        let options: Vec<usize> =
            free.iter().enumerate().filter(|(_, &c)| c != chan_1[k]).map(|(i, _)| i).collect();
        let pick = options[rng.random_range(0..options.len())];
        chan_2[k] = free.swap_remove(pick);
    }

    let ues: Vec<Ue<T>> = (0..total_ues)
        .map(|k| {
            let dual = k < n_dual;
            Ue {
                id: k + 1,
                position: cast(ue_pos[k]),
                p_max: T::lit(params.p_max),
                poa_1: serving[k],
                chan_1: chan_1[k],
                poa_2: dual.then_some(macro_id),
                chan_2: dual.then(|| chan_2[k]),
                fixed_sinr_target: (!dual).then(|| T::lit(params.fixed_sinr_target)),
            }
        })
        .collect();

    // Receivers listening on each channel.
    let mut listeners: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for u in &ues {
        for (_, poa, chan) in u.links() {
            listeners.entry(chan).or_default().insert(poa);
        }
    }
    let poa_pos: Vec<[f64; 2]> = small_pos.iter().copied().chain([[0.0, 0.0]]).collect();
    let mut gains = Vec::new();
    for (k, u) in ues.iter().enumerate() {
        for (_, _, chan) in u.links() {
            for &poa in &listeners[&chan] {
                let kappa: f64 = rng.sample(Exp1);
                let g = path_gain(params.gain_scale, kappa, dist(ue_pos[k], poa_pos[poa - 1]), params.alpha);
                gains.push(GainEntry { ue: u.id, poa, channel: chan, gain: T::lit(g) });
            }
        }
    }

    Ok(Scenario {
        poas,
        ues,
        channels,
        gains,
        noise_psd: T::lit(params.noise_psd),
        tau: T::lit(params.tau),
        z_factor: T::lit(params.z),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WorkedCase {
    HighBackhaul,
    LimitedBackhaul,
}

/// Published normalized quantities of the two-UE example.
pub mod worked {
    /// Interference from the other UE's second link into each UE's first
    /// link (`F21`) and from its first link into each UE's second link
    /// (`F12`), row = victim UE.
    pub const F21: [[f64; 2]; 2] = [[0.0, 0.5], [0.0509, 0.0]];
    pub const F12: [[f64; 2]; 2] = [[0.0, 1.0], [0.0509, 0.0]];
    pub const D1: [f64; 2] = [0.0164, 0.059];
    pub const D2: [f64; 2] = [0.0295, 0.0082];
    /// Backhaul capacities (relay, picocell, macrocell) in bits/s.
    pub const HIGH_BACKHAUL: [f64; 3] = [1e9, 1e9, 1e10];
    pub const LIMITED_BACKHAUL: [f64; 3] = [1.2e7, 8e6, 3e7];
}

/// Two-UE, three-PoA example: MBS at (0,0), PBS at (2,0), RS at (-2,0) km;
/// UE A at (-2,-2) and UE B at (2,-2) km.
///
/// Channel 1 (10 MHz) carries UE A's relay link and UE B's macrocell link;
/// channel 2 (5 MHz) carries UE B's picocell link and UE A's macrocell link.
/// Gains are pinned so that the normalized matrices equal [`worked`]: own
/// gains from the normalized noise, cross gains as ratios of own gains. The
/// two cases differ only in backhaul capacity.
pub fn worked_example<T: Scalar>(case: WorkedCase) -> Scenario<T> {
    use worked::*;
    let km = |x: f64, y: f64| [T::lit(1e3 * x), T::lit(1e3 * y)];
    let caps = match case {
        WorkedCase::HighBackhaul => HIGH_BACKHAUL,
        WorkedCase::LimitedBackhaul => LIMITED_BACKHAUL,
    };
    let (rs, pbs, mbs) = (1, 2, 3);
    let poas = vec![
        Poa { id: rs, kind: PoaKind::Relay, position: km(-2.0, 0.0), backhaul_capacity: T::lit(caps[0]) },
        Poa { id: pbs, kind: PoaKind::Picocell, position: km(2.0, 0.0), backhaul_capacity: T::lit(caps[1]) },
        Poa { id: mbs, kind: PoaKind::Macrocell, position: km(0.0, 0.0), backhaul_capacity: T::lit(caps[2]) },
    ];
    let channels = vec![
        Channel { id: 1, bandwidth: T::lit(10e6) },
        Channel { id: 2, bandwidth: T::lit(5e6) },
    ];
    let ues = vec![
        Ue { id: 1, position: km(-2.0, -2.0), p_max: T::one(), poa_1: rs, chan_1: 1, poa_2: Some(mbs), chan_2: Some(2), fixed_sinr_target: None },
        Ue { id: 2, position: km(2.0, -2.0), p_max: T::one(), poa_1: pbs, chan_1: 2, poa_2: Some(mbs), chan_2: Some(1), fixed_sinr_target: None },
    ];
    let own = |d: f64, w: f64| NOISE_PSD * w / d;
    // (A, RS, 1), (A, MBS, 2), (B, PBS, 2), (B, MBS, 1)
    let g_a_rs = own(D1[0], 10e6);
    let g_a_mbs = own(D2[0], 5e6);
    let g_b_pbs = own(D1[1], 5e6);
    let g_b_mbs = own(D2[1], 10e6);
    let entry = |ue, poa, channel, gain: f64| GainEntry { ue, poa, channel, gain: T::lit(gain) };
    let gains = vec![
        entry(1, rs, 1, g_a_rs),
        entry(1, mbs, 2, g_a_mbs),
        entry(2, pbs, 2, g_b_pbs),
        entry(2, mbs, 1, g_b_mbs),
        // B's macro link (channel 1) heard at the relay.
        entry(2, rs, 1, F21[0][1] * g_a_rs),
        // A's macro link (channel 2) heard at the picocell.
        entry(1, pbs, 2, F21[1][0] * g_b_pbs),
        // B's pico link (channel 2) heard at the macrocell.
        entry(2, mbs, 2, F12[0][1] * g_a_mbs),
        // A's relay link (channel 1) heard at the macrocell.
        entry(1, mbs, 1, F12[1][0] * g_b_mbs),
    ];
    Scenario {
        poas,
        ues,
        channels,
        gains,
        noise_psd: T::lit(NOISE_PSD),
        tau: T::lit(5e6),
        z_factor: T::lit(0.9),
    }
}
