//! End-to-end network capacity over the two-tier backhaul, per-PoA rate
//! differentials and the per-UE backhaul state.
//!
//! Picocells and the macrocell forward straight into the backbone; relays
//! forward through the macrocell, so their carried traffic competes for the
//! macrocell backhaul.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::net_model::{PoaKind, Scenario};
use crate::{Error, Result, Scalar};

/// Backhaul condition of one UE, from the rate differentials at its two PoAs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BackhaulState {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
    S8,
    S9,
}

impl BackhaulState {
    pub const ALL: [BackhaulState; 9] = [
        Self::S1,
        Self::S2,
        Self::S3,
        Self::S4,
        Self::S5,
        Self::S6,
        Self::S7,
        Self::S8,
        Self::S9,
    ];

    pub fn number(self) -> u8 {
        self as u8 + 1
    }
}

impl fmt::Display for BackhaulState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.number())
    }
}

/// Three-way split of a single rate differential.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Load {
    /// `V >= 0`
    Headroom,
    /// `-tau <= V < 0`
    Tolerable,
    /// `V < -tau`
    Overloaded,
}

pub fn load_level<T: Scalar>(v: T, tau: T) -> Load {
    if v >= T::zero() {
        Load::Headroom
    } else if v >= -tau {
        Load::Tolerable
    } else {
        Load::Overloaded
    }
}

pub fn classify_state<T: Scalar>(v1: T, v2: T, tau: T) -> BackhaulState {
    use BackhaulState::*;
    use Load::*;
    match (load_level(v1, tau), load_level(v2, tau)) {
        (Headroom, Headroom) => S1,
        (Tolerable, Headroom) => S2,
        (Headroom, Tolerable) => S3,
        (Tolerable, Tolerable) => S4,
        (Headroom, Overloaded) => S5,
        (Overloaded, Headroom) => S6,
        (Tolerable, Overloaded) => S7,
        (Overloaded, Tolerable) => S8,
        (Overloaded, Overloaded) => S9,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackhaulReport<T = f64> {
    /// End-to-end network capacity, bits/s.
    pub eta_n: T,
    /// Rate differential per PoA, indexed by `id - 1`.
    pub v: Vec<T>,
    /// Traffic the relays can forward into the macrocell.
    pub gamma_relay_sum: T,
    /// Rate differential seen by each UE on each of its links.
    pub v_per_link: Vec<[Option<T>; 2]>,
    /// `None` for single-link UEs.
    pub ue_states: Vec<Option<BackhaulState>>,
}

/// Aggregate access-rate demand at each PoA, indexed by `id - 1`.
pub fn poa_demands<T: Scalar>(s: &Scenario<T>, rate1: &[T], rate2: &[T]) -> Result<Vec<T>> {
    let n = s.n_ues();
    for r in [rate1, rate2] {
        if r.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: r.len() });
        }
    }
    let mut demand = vec![T::zero(); s.poas.len()];
    for (i, ue) in s.ues.iter().enumerate() {
        for (link, poa, _) in ue.links() {
            let r = [rate1[i], rate2[i]][link.index()];
            let slot = demand.get_mut(poa - 1).ok_or(Error::UnknownLink { ue: ue.id, link })?;
            *slot = *slot + r;
        }
    }
    Ok(demand)
}

fn relay_sum<T: Scalar>(s: &Scenario<T>, demand: &[T]) -> T {
    s.poas
        .iter()
        .filter(|p| p.kind == PoaKind::Relay)
        .map(|p| p.backhaul_capacity.min(demand[p.id - 1]))
        .sum()
}

/// Max-flow value of the source -> links -> PoAs -> backbone graph, in
/// closed form.
pub fn network_capacity<T: Scalar>(s: &Scenario<T>, rate1: &[T], rate2: &[T]) -> Result<T> {
    let demand = poa_demands(s, rate1, rate2)?;
    let relays = relay_sum(s, &demand);
    let mut total = T::zero();
    for p in &s.poas {
        match p.kind {
            PoaKind::Picocell => total = total + p.backhaul_capacity.min(demand[p.id - 1]),
            PoaKind::Macrocell => {
                total = total + p.backhaul_capacity.min(demand[p.id - 1] + relays)
            }
            PoaKind::Relay => {}
        }
    }
    Ok(total)
}

/// Rate differential per PoA (indexed by `id - 1`) and the relay sum.
pub fn rate_differentials<T: Scalar>(
    s: &Scenario<T>,
    rate1: &[T],
    rate2: &[T],
) -> Result<(Vec<T>, T)> {
    let demand = poa_demands(s, rate1, rate2)?;
    let gamma = relay_sum(s, &demand);
    let mut v = vec![T::zero(); s.poas.len()];
    let mut v_macro = None;
    for p in &s.poas {
        if p.kind == PoaKind::Macrocell {
            let vb = p.backhaul_capacity - demand[p.id - 1] - gamma;
            v[p.id - 1] = vb;
            v_macro = Some(vb);
        }
    }
    // Without a macrocell, relays have nowhere to forward.
    let relay_ceiling = v_macro.map_or(T::zero(), Scalar::pos);
    for p in &s.poas {
        let idx = p.id - 1;
        match p.kind {
            PoaKind::Picocell => v[idx] = p.backhaul_capacity - demand[idx],
            PoaKind::Relay => v[idx] = p.backhaul_capacity.min(relay_ceiling) - demand[idx],
            PoaKind::Macrocell => {}
        }
    }
    Ok((v, gamma))
}

/// Full backhaul picture for one set of link rates.
pub fn backhaul_report<T: Scalar>(
    s: &Scenario<T>,
    rate1: &[T],
    rate2: &[T],
) -> Result<BackhaulReport<T>> {
    let eta_n = network_capacity(s, rate1, rate2)?;
    let (v, gamma_relay_sum) = rate_differentials(s, rate1, rate2)?;
    let mut v_per_link = Vec::with_capacity(s.n_ues());
    let mut ue_states = Vec::with_capacity(s.n_ues());
    for ue in &s.ues {
        let mut pair = [None, None];
        for (link, poa, _) in ue.links() {
            pair[link.index()] = Some(v[poa - 1]);
        }
        ue_states.push(match pair {
            [Some(v1), Some(v2)] => Some(classify_state(v1, v2, s.tau)),
            _ => None,
        });
        v_per_link.push(pair);
    }
    Ok(BackhaulReport { eta_n, v, gamma_relay_sum, v_per_link, ue_states })
}
