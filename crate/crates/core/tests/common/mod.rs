//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use hetnet_core::{PoaKind, Scenario};
use rand::Rng;

/// Edmonds-Karp on a dense capacity matrix. Returns the max-flow value.
pub fn max_flow(cap: &[Vec<f64>], source: usize, sink: usize) -> f64 {
    let n = cap.len();
    let mut residual = cap.to_vec();
    let mut total = 0.0;
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if parent[v] == usize::MAX && residual[u][v] > 0.0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            return total;
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = sink;
        while v != source {
            let u = parent[v];
            bottleneck = bottleneck.min(residual[u][v]);
            v = u;
        }
        let mut v = sink;
        while v != source {
            let u = parent[v];
            residual[u][v] -= bottleneck;
            residual[v][u] += bottleneck;
            v = u;
        }
        total += bottleneck;
    }
}

/// Flow graph source -> UE links -> PoAs -> (relays into the macrocell) ->
/// backbone sink, evaluated with [`max_flow`].
pub fn network_capacity_by_flow(s: &Scenario, rate1: &[f64], rate2: &[f64]) -> f64 {
    let n_links = 2 * s.ues.len();
    let n_poa = s.poas.len();
    let source = 0;
    let link_node = |i: usize, x: usize| 1 + 2 * i + x;
    let poa_node = |id: usize| 1 + n_links + id - 1;
    let sink = 1 + n_links + n_poa;
    let mut cap = vec![vec![0.0; sink + 1]; sink + 1];
    let macro_id = s.macro_id();
    for (i, ue) in s.ues.iter().enumerate() {
        cap[source][link_node(i, 0)] = rate1[i];
        cap[link_node(i, 0)][poa_node(ue.poa_1)] = f64::INFINITY;
        if let Some(b) = ue.poa_2 {
            cap[source][link_node(i, 1)] = rate2[i];
            cap[link_node(i, 1)][poa_node(b)] = f64::INFINITY;
        }
    }
    for p in &s.poas {
        match p.kind {
            PoaKind::Relay => {
                if let Some(b) = macro_id {
                    cap[poa_node(p.id)][poa_node(b)] = p.backhaul_capacity;
                }
            }
            PoaKind::Picocell | PoaKind::Macrocell => cap[poa_node(p.id)][sink] = p.backhaul_capacity,
        }
    }
    max_flow(&cap, source, sink)
}

pub fn two_link_rate(p1: f64, p2: f64, e1: f64, e2: f64, w1: f64, w2: f64) -> f64 {
    w1 * (1.0 + p1 / e1).log2() + w2 * (1.0 + p2 / e2).log2()
}

/// Best full-budget split over `points` evenly spaced values of `p1`.
pub fn waterfill_grid(p_max: f64, e1: f64, e2: f64, w1: f64, w2: f64, points: usize) -> f64 {
    (0..points)
        .map(|k| {
            let p1 = p_max * k as f64 / (points - 1) as f64;
            two_link_rate(p1, p_max - p1, e1, e2, w1, w2)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Objective of the greedy rule: end-to-end rate usable through the two
/// backhauls.
pub fn greedy_psi(p1: f64, p2: f64, e: [f64; 2], w: [f64; 2], v_plus: [f64; 2]) -> f64 {
    let r1 = w[0] * (1.0 + p1 / e[0]).log2();
    let r2 = w[1] * (1.0 + p2 / e[1]).log2();
    r1.min(v_plus[0]) + r2.min(v_plus[1])
}

/// Grid search over the feasible triangle. Returns `(best psi, least total
/// power among points within `rel` of the best)`.
pub fn greedy_grid(p_max: f64, e: [f64; 2], w: [f64; 2], v_plus: [f64; 2], points: usize, rel: f64) -> (f64, f64) {
    let step = p_max / (points - 1) as f64;
    let mut samples = Vec::new();
    for a in 0..points {
        for b in 0..points - a {
            let (p1, p2) = (a as f64 * step, b as f64 * step);
            samples.push((greedy_psi(p1, p2, e, w, v_plus), p1 + p2));
        }
    }
    let best = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let least = samples
        .iter()
        .filter(|s| s.0 >= best - rel * best.abs().max(1.0))
        .map(|s| s.1)
        .fold(f64::INFINITY, f64::min);
    (best, least)
}

/// Dominant eigenvalue modulus of a nonnegative matrix by power iteration.
/// Shifting by the identity keeps the iteration convergent for periodic
/// (irreducible, imprimitive) matrices; the shift is removed at the end.
pub fn power_iteration_radius(a: &[Vec<f64>], steps: usize) -> f64 {
    let n = a.len();
    let mut x = vec![1.0; n];
    let mut lambda = 0.0;
    for _ in 0..steps {
        let mut y: Vec<f64> = (0..n).map(|i| x[i] + (0..n).map(|j| a[i][j] * x[j]).sum::<f64>()).collect();
        let norm = y.iter().cloned().fold(0.0, f64::max);
        if norm == 0.0 {
            return 0.0;
        }
        y.iter_mut().for_each(|v| *v /= norm);
        lambda = norm;
        x = y;
    }
    lambda - 1.0
}

/// Effective interference straight from the gain table: noise plus every
/// co-channel transmitter heard at the receiver, over the own gain.
pub fn scalar_interference(s: &Scenario, p1: &[f64], p2: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let gains = s.gain_index();
    let mut out = (vec![0.0; s.ues.len()], vec![0.0; s.ues.len()]);
    for (i, ue) in s.ues.iter().enumerate() {
        for (link, poa, chan) in ue.links() {
            let w = s.channel(chan).unwrap().bandwidth;
            let own = gains[&(ue.id, poa, chan)];
            let mut total = s.noise_psd * w;
            for (j, other) in s.ues.iter().enumerate() {
                if j == i {
                    continue;
                }
                for (tx_link, _, c) in other.links() {
                    if c == chan {
                        let p = if tx_link.index() == 0 { p1[j] } else { p2[j] };
                        total += gains[&(other.id, poa, chan)] * p;
                    }
                }
            }
            let slot = if link.index() == 0 { &mut out.0 } else { &mut out.1 };
            slot[i] = total / own;
        }
    }
    out
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Random backhaul topology with up to `max_ues` UEs and random link rates.
/// Gains are left empty: only the flow side is exercised.
pub fn random_topology<R: Rng>(rng: &mut R, max_ues: usize) -> (Scenario, Vec<f64>, Vec<f64>) {
    use hetnet_core::{Channel, Poa, Ue};
    let n_relays = rng.random_range(0..4);
    let n_picos = rng.random_range(0..4);
    let n_small = n_relays + n_picos;
    let macro_id = n_small + 1;
    let cap = |rng: &mut R| if rng.random_bool(0.1) { 0.0 } else { log_uniform(rng, 1e5, 1e9) };
    let poas = (1..=macro_id)
        .map(|id| {
            let kind = if id <= n_relays {
                PoaKind::Relay
            } else if id <= n_small {
                PoaKind::Picocell
            } else {
                PoaKind::Macrocell
            };
            Poa { id, kind, position: [0.0, 0.0], backhaul_capacity: cap(rng) }
        })
        .collect();
    let n = rng.random_range(1..=max_ues);
    let mut ues = Vec::with_capacity(n);
    for id in 1..=n {
        let dual = n_small > 0 && rng.random_bool(0.8);
        let poa_1 = if n_small > 0 { rng.random_range(1..=n_small) } else { macro_id };
        ues.push(Ue {
            id,
            position: [0.0, 0.0],
            p_max: 1.0,
            poa_1,
            chan_1: 2 * id - 1,
            poa_2: dual.then_some(macro_id),
            chan_2: dual.then_some(2 * id),
            fixed_sinr_target: (!dual).then_some(1.0),
        });
    }
    let channels = (1..=2 * n).map(|id| Channel { id, bandwidth: 1e6 }).collect();
    let rate = |rng: &mut R| if rng.random_bool(0.1) { 0.0 } else { log_uniform(rng, 1e4, 1e9) };
    let rate1: Vec<f64> = (0..n).map(|_| rate(rng)).collect();
    let rate2: Vec<f64> = ues.iter().map(|u: &Ue| if u.is_dual() { rate(rng) } else { 0.0 }).collect();
    let s = Scenario { poas, ues, channels, gains: vec![], noise_psd: 1e-19, tau: 5e6, z_factor: 0.9 };
    (s, rate1, rate2)
}
