//! Per-UE power update rules.
//!
//! Every rule is a pure function of what the UE observes in the current
//! interval: its effective interference on both links, the link bandwidths,
//! and (for the backhaul-aware rules) the rate differentials at its PoAs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::backhaul_flow::BackhaulState;
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "wf")]
    Waterfilling,
    #[serde(rename = "bdt")]
    Bdt,
    #[serde(rename = "greedy")]
    Greedy,
    #[serde(rename = "fm")]
    FixedSinr,
}

impl PolicyKind {
    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::Waterfilling => "wf",
            PolicyKind::Bdt => "bdt",
            PolicyKind::Greedy => "greedy",
            PolicyKind::FixedSinr => "fm",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wf" | "waterfilling" => Ok(PolicyKind::Waterfilling),
            "bdt" => Ok(PolicyKind::Bdt),
            "greedy" => Ok(PolicyKind::Greedy),
            "fm" | "fixed-sinr" => Ok(PolicyKind::FixedSinr),
            other => Err(Error::InvalidParams(format!("unknown policy '{other}'"))),
        }
    }
}

fn positive<T: Scalar>(what: &'static str, v: T) -> Result<()> {
    if v > T::zero() {
        Ok(())
    } else {
        Err(Error::NonPositive { what, value: v.as_f64() })
    }
}

/// Rate-maximizing split of `p_max` over two links with unequal bandwidths.
///
/// The first link gets `min(p_max, (w1 p_max - w2 e1 + w1 e2)^+ / (w1 + w2))`
/// and the second link the rest of the budget.
pub fn waterfill<T: Scalar>(p_max: T, e1: T, e2: T, w1: T, w2: T) -> Result<(T, T)> {
    positive("p_max", p_max)?;
    positive("effective interference e1", e1)?;
    positive("effective interference e2", e2)?;
    positive("bandwidth w1", w1)?;
    positive("bandwidth w2", w2)?;
    let p1 = if e1.is_infinite() {
        T::zero()
    } else if e2.is_infinite() {
        p_max
    } else {
        p_max.min((w1 * p_max - w2 * e1 + w1 * e2).pos() / (w1 + w2))
    };
    Ok((p1, p_max - p1))
}

/// Minimal power reaching rate `r` on a link with interference `e` and
/// bandwidth `w`.
pub fn rate_cap_power<T: Scalar>(e: T, w: T, r: T) -> T {
    e * ((r / w).exp2() - T::one())
}

/// Waterfilling with per-link power ceilings: a common water level is
/// raised until the budget is spent or every link sits at its ceiling.
pub fn capped_waterfill<T: Scalar>(p_max: T, links: [(T, T, T); 2]) -> [T; 2] {
    let fill = |mu: T| -> [T; 2] {
        links.map(|(e, w, cap)| (mu * w - e).pos().min(cap))
    };
    let total = |p: [T; 2]| p[0] + p[1];
    let [(_, _, c1), (_, _, c2)] = links;
    if c1 + c2 <= p_max {
        return [c1, c2];
    }
    let mut breaks: Vec<T> = Vec::with_capacity(4);
    for &(e, w, cap) in &links {
        breaks.push(e / w);
        let top = (e + cap) / w;
        if top.is_finite() {
            breaks.push(top);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut lo = breaks[0];
    let mut mu = None;
    for &b in &breaks[1..] {
        let (t_lo, t_hi) = (total(fill(lo)), total(fill(b)));
        if t_hi >= p_max {
            mu = Some(if t_hi > t_lo { lo + (p_max - t_lo) * (b - lo) / (t_hi - t_lo) } else { b });
            break;
        }
        lo = b;
    }
    let mu = mu.unwrap_or_else(|| {
        // Past the last breakpoint only links with an infinite ceiling grow.
        let slope: T = links
            .iter()
            .filter(|l| l.2.is_infinite())
            .map(|l| l.1)
            .sum();
        lo + (p_max - total(fill(lo))) / slope
    });
    let mut p = fill(mu);
    // Spend the budget exactly on a link that is still below its ceiling.
    for k in [1usize, 0] {
        let other = p[1 - k];
        let target = (p_max - other).pos();
        if p[k] > T::zero() && p[k] < links[k].2 && target <= links[k].2 {
            p[k] = target;
            break;
        }
    }
    p
}

/// Greedy multi-objective update: maximize the end-to-end rate improvement
/// `min(v1+, r1) + min(v2+, r2)`, then spend the least power achieving it.
#[allow(clippy::too_many_arguments)]
pub fn greedy_update<T: Scalar>(
    p_max: T,
    e1: T,
    e2: T,
    w1: T,
    w2: T,
    v1_plus: T,
    v2_plus: T,
) -> Result<(T, T)> {
    positive("p_max", p_max)?;
    positive("effective interference e1", e1)?;
    positive("effective interference e2", e2)?;
    positive("bandwidth w1", w1)?;
    positive("bandwidth w2", w2)?;
    let c1 = rate_cap_power(e1, w1, v1_plus.pos());
    let c2 = rate_cap_power(e2, w2, v2_plus.pos());
    let [p1, p2] = capped_waterfill(p_max, [(e1, w1, c1), (e2, w2, c2)]);
    Ok((p1, p2))
}

/// One interval of the backhaul state driven update.
#[allow(clippy::too_many_arguments)]
pub fn bdt_update<T: Scalar>(
    state: BackhaulState,
    p1_now: T,
    p2_now: T,
    p_max: T,
    e1: T,
    e2: T,
    w1: T,
    w2: T,
    z: T,
) -> Result<(T, T)> {
    use BackhaulState::*;
    if !(z > T::zero() && z < T::one()) {
        return Err(Error::InvalidParams(format!("z factor {z} outside (0, 1)")));
    }
    let out = match state {
        S1 => waterfill(p_max, e1, e2, w1, w2)?,
        S2 => (p1_now, (p_max - p1_now).pos()),
        S3 => ((p_max - p2_now).pos(), p2_now),
        S4 => (p1_now, p2_now),
        S5 => ((p_max - z * p2_now).pos(), z * p2_now),
        S6 => (z * p1_now, (p_max - z * p1_now).pos()),
        S7 => (p1_now, z * p2_now),
        S8 => (z * p1_now, p2_now),
        S9 => (z * p1_now, z * p2_now),
    };
    Ok(out)
}

/// Fixed-target-SINR update `p <- beta e`, limited to `p_max`.
pub fn fm_update<T: Scalar>(e: T, beta: T, p_max: T) -> T {
    (beta * e).min(p_max)
}
