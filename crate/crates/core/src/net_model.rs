//! Immutable network description: points of access, UEs, channels and
//! pre-composed channel power gains.
//!
//! Ids are 1-based. PoA ids are ordered by tier: relays `1..=N_r`, picocells
//! `N_r+1..=N_r+N_p`, and a single macrocell with id `N_r+N_p+1`. UE ids are
//! `1..=n` in list order. Gains are keyed by (transmitting UE, receiving PoA,
//! channel) and already include path loss and fading.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoaKind {
    Relay,
    Picocell,
    Macrocell,
}

/// One of the two access links of a UE.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Link {
    First,
    Second,
}

impl Link {
    pub const BOTH: [Link; 2] = [Link::First, Link::Second];

    pub fn index(self) -> usize {
        match self {
            Link::First => 0,
            Link::Second => 1,
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poa<T = f64> {
    pub id: usize,
    pub kind: PoaKind,
    /// Meters.
    pub position: [T; 2],
    /// Bits per second.
    pub backhaul_capacity: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ue<T = f64> {
    pub id: usize,
    pub position: [T; 2],
    pub p_max: T,
    pub poa_1: usize,
    pub chan_1: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poa_2: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chan_2: Option<usize>,
    /// Target SINR of a single-link node running the fixed-target update.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_sinr_target: Option<T>,
}

impl<T: Scalar> Ue<T> {
    pub fn is_dual(&self) -> bool {
        self.poa_2.is_some() && self.chan_2.is_some()
    }

    /// `(poa, channel)` of the given link, if the UE has it.
    pub fn link(&self, link: Link) -> Option<(usize, usize)> {
        match link {
            Link::First => Some((self.poa_1, self.chan_1)),
            Link::Second => Some((self.poa_2?, self.chan_2?)),
        }
    }

    pub fn links(&self) -> impl Iterator<Item = (Link, usize, usize)> + '_ {
        Link::BOTH.into_iter().filter_map(|l| self.link(l).map(|(p, c)| (l, p, c)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channel<T = f64> {
    pub id: usize,
    /// Hz.
    pub bandwidth: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainEntry<T = f64> {
    pub ue: usize,
    pub poa: usize,
    pub channel: usize,
    pub gain: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario<T = f64> {
    pub poas: Vec<Poa<T>>,
    pub ues: Vec<Ue<T>>,
    pub channels: Vec<Channel<T>>,
    pub gains: Vec<GainEntry<T>>,
    /// W/Hz.
    pub noise_psd: T,
    /// Rate differential threshold, bits/s.
    pub tau: T,
    /// Power scaling factor in (0, 1).
    pub z_factor: T,
}

/// A broken scenario rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub subject: String,
    pub rule: String,
}

impl Violation {
    fn new(subject: impl Into<String>, rule: impl Into<String>) -> Self {
        Self { subject: subject.into(), rule: rule.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.rule)
    }
}

impl<T: Scalar> Scenario<T> {
    pub fn n_ues(&self) -> usize {
        self.ues.len()
    }

    pub fn ue(&self, id: usize) -> Result<&Ue<T>> {
        id.checked_sub(1).and_then(|i| self.ues.get(i)).ok_or(Error::UnknownUe(id))
    }

    pub fn poa(&self, id: usize) -> Option<&Poa<T>> {
        id.checked_sub(1).and_then(|i| self.poas.get(i)).filter(|p| p.id == id)
    }

    pub fn channel(&self, id: usize) -> Option<&Channel<T>> {
        id.checked_sub(1).and_then(|i| self.channels.get(i)).filter(|c| c.id == id)
    }

    pub fn macro_id(&self) -> Option<usize> {
        self.poas.iter().find(|p| p.kind == PoaKind::Macrocell).map(|p| p.id)
    }

    pub fn gain_index(&self) -> HashMap<(usize, usize, usize), T> {
        self.gains.iter().map(|g| ((g.ue, g.poa, g.channel), g.gain)).collect()
    }

    pub fn p_max(&self) -> Vec<T> {
        self.ues.iter().map(|u| u.p_max).collect()
    }

    /// Sum of bandwidths of the distinct channels referenced by any UE link.
    pub fn bandwidth_in_use(&self) -> T {
        let used: HashSet<usize> =
            self.ues.iter().flat_map(|u| u.links().map(|(_, _, c)| c)).collect();
        used.into_iter().filter_map(|c| self.channel(c)).map(|c| c.bandwidth).sum()
    }

    pub fn with_tau(mut self, tau: T) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_z_factor(mut self, z: T) -> Self {
        self.z_factor = z;
        self
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_scenario(self)
    }
}

impl<T> Scenario<T>
where
    T: Scalar + Serialize + for<'de> Deserialize<'de>,
{
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Lists every broken invariant; an empty list means the scenario is usable.
pub fn validate_scenario<T: Scalar>(s: &Scenario<T>) -> Vec<Violation> {
    let mut out = Vec::new();
    let finite_pos = |v: T| v.is_finite() && v > T::zero();

    // PoA numbering by tier.
    let n_relays = s.poas.iter().filter(|p| p.kind == PoaKind::Relay).count();
    let n_picos = s.poas.iter().filter(|p| p.kind == PoaKind::Picocell).count();
    let n_macros = s.poas.iter().filter(|p| p.kind == PoaKind::Macrocell).count();
    if n_macros != 1 {
        out.push(Violation::new("scenario", format!("expected exactly one macrocell, found {n_macros}")));
    }
    for (idx, p) in s.poas.iter().enumerate() {
        let subject = format!("PoA {}", p.id);
        if p.id != idx + 1 {
            out.push(Violation::new(&subject, format!("id must equal list position {}", idx + 1)));
        }
        let ok = match p.kind {
            PoaKind::Relay => p.id <= n_relays,
            PoaKind::Picocell => p.id > n_relays && p.id <= n_relays + n_picos,
            PoaKind::Macrocell => p.id == n_relays + n_picos + 1,
        };
        if !ok {
            out.push(Violation::new(&subject, format!("{:?} id out of its tier range", p.kind)));
        }
        if !(p.backhaul_capacity >= T::zero()) {
            out.push(Violation::new(&subject, "backhaul capacity must be >= 0"));
        }
    }

    for (idx, c) in s.channels.iter().enumerate() {
        let subject = format!("channel {}", c.id);
        if c.id != idx + 1 {
            out.push(Violation::new(&subject, format!("id must equal list position {}", idx + 1)));
        }
        if !finite_pos(c.bandwidth) {
            out.push(Violation::new(&subject, "bandwidth must be > 0"));
        }
    }

    let mut occupancy: HashMap<(usize, usize), usize> = HashMap::new();
    for (idx, u) in s.ues.iter().enumerate() {
        let subject = format!("UE {}", u.id);
        if u.id != idx + 1 {
            out.push(Violation::new(&subject, format!("id must equal list position {}", idx + 1)));
        }
        if !finite_pos(u.p_max) {
            out.push(Violation::new(&subject, "p_max must be > 0"));
        }
        match (u.poa_2, u.chan_2) {
            (Some(_), None) | (None, Some(_)) => {
                out.push(Violation::new(&subject, "second link needs both a PoA and a channel"));
            }
            (Some(p2), Some(c2)) => {
                if c2 == u.chan_1 {
                    out.push(Violation::new(&subject, "both links use the same channel"));
                }
                if p2 == u.poa_1 {
                    out.push(Violation::new(&subject, "both links attach to the same PoA"));
                }
                if u.fixed_sinr_target.is_some() {
                    out.push(Violation::new(&subject, "fixed SINR target is only allowed on single-link UEs"));
                }
            }
            (None, None) => {
                if u.fixed_sinr_target.is_none() {
                    out.push(Violation::new(&subject, "single-link UE needs a fixed SINR target"));
                }
            }
        }
        if let Some(beta) = u.fixed_sinr_target {
            if !finite_pos(beta) {
                out.push(Violation::new(&subject, "fixed SINR target must be > 0"));
            }
        }
        for (link, poa, chan) in u.links() {
            if s.poa(poa).is_none() {
                out.push(Violation::new(&subject, format!("link {link} references unknown PoA {poa}")));
            }
            if s.channel(chan).is_none() {
                out.push(Violation::new(&subject, format!("link {link} references unknown channel {chan}")));
            }
            if let Some(other) = occupancy.insert((poa, chan), u.id) {
                if other != u.id {
                    out.push(Violation::new(
                        format!("UE {other} and UE {}", u.id),
                        format!("share channel {chan} at PoA {poa}"),
                    ));
                }
            }
        }
    }

    let mut seen = HashSet::new();
    for g in &s.gains {
        let subject = format!("gain ({}, {}, {})", g.ue, g.poa, g.channel);
        if !finite_pos(g.gain) {
            out.push(Violation::new(&subject, "gain must be > 0"));
        }
        if s.ue(g.ue).is_err() || s.poa(g.poa).is_none() || s.channel(g.channel).is_none() {
            out.push(Violation::new(&subject, "references an unknown UE, PoA or channel"));
        }
        if !seen.insert((g.ue, g.poa, g.channel)) {
            out.push(Violation::new(&subject, "duplicate entry"));
        }
    }

    if !finite_pos(s.noise_psd) {
        out.push(Violation::new("scenario", "noise_psd must be > 0"));
    }
    if !finite_pos(s.tau) {
        out.push(Violation::new("scenario", "tau must be > 0"));
    }
    if !(s.z_factor > T::zero() && s.z_factor < T::one()) {
        out.push(Violation::new("scenario", "z_factor must lie in (0, 1)"));
    }
    out
}

/// Noise power `n_o * W` on the channel of the given link, in watts.
pub fn noise_power<T: Scalar>(s: &Scenario<T>, ue: usize, link: Link) -> Result<T> {
    let u = s.ue(ue)?;
    let (_, chan) = u.link(link).ok_or(Error::UnknownLink { ue, link })?;
    let ch = s.channel(chan).ok_or(Error::UnknownLink { ue, link })?;
    Ok(s.noise_psd * ch.bandwidth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_ue() -> Scenario<f64> {
        Scenario {
            poas: vec![
                Poa { id: 1, kind: PoaKind::Picocell, position: [500.0, 0.0], backhaul_capacity: 2e8 },
                Poa { id: 2, kind: PoaKind::Macrocell, position: [0.0, 0.0], backhaul_capacity: 1e9 },
            ],
            ues: vec![
                Ue { id: 1, position: [400.0, 0.0], p_max: 1.0, poa_1: 1, chan_1: 1, poa_2: Some(2), chan_2: Some(2), fixed_sinr_target: None },
                Ue { id: 2, position: [600.0, 0.0], p_max: 1.0, poa_1: 1, chan_1: 3, poa_2: Some(2), chan_2: Some(1), fixed_sinr_target: None },
            ],
            channels: vec![
                Channel { id: 1, bandwidth: 1e7 },
                Channel { id: 2, bandwidth: 5e6 },
                Channel { id: 3, bandwidth: 1e6 },
            ],
            gains: vec![],
            noise_psd: 1e-19,
            tau: 5e6,
            z_factor: 0.9,
        }
    }

    #[test]
    fn clean_scenario_has_no_violations() {
        assert!(validate_scenario(&two_ue()).is_empty());
    }

    #[test]
    fn shared_poa_channel_names_both_ues() {
        let mut s = two_ue();
        s.ues[1].chan_1 = 1;
        s.ues[1].chan_2 = Some(3);
        let v = validate_scenario(&s);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].subject.contains("UE 1") && v[0].subject.contains("UE 2"));
    }

    #[test]
    fn same_channel_on_both_links() {
        let mut s = two_ue();
        s.ues[0].chan_1 = 2;
        let v = validate_scenario(&s);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].rule.contains("same channel"));
    }

    #[test]
    fn scalar_rules() {
        let mut s = two_ue();
        s.tau = 0.0;
        s.z_factor = 1.0;
        s.ues[0].p_max = -1.0;
        s.poas[0].backhaul_capacity = -5.0;
        assert_eq!(validate_scenario(&s).len(), 4);
    }

    #[test]
    fn tier_ordering() {
        let mut s = two_ue();
        s.poas.swap(0, 1);
        s.poas[0].id = 1;
        s.poas[1].id = 2;
        // macrocell now has id 1 while a picocell follows it
        assert!(!validate_scenario(&s).is_empty());
    }

    #[test]
    fn validation_is_idempotent() {
        let mut s = two_ue();
        s.ues[1].chan_1 = 1;
        assert_eq!(validate_scenario(&s), validate_scenario(&s));
    }

    #[test]
    fn noise_examples() {
        let s = two_ue();
        assert!((noise_power(&s, 1, Link::First).unwrap() - 1e-12).abs() < 1e-27);
        assert!((noise_power(&s, 1, Link::Second).unwrap() - 5e-13).abs() < 1e-27);
        assert!((noise_power(&s, 2, Link::First).unwrap() - 1e-13).abs() < 1e-27);
        assert!(matches!(noise_power(&s, 3, Link::First), Err(Error::UnknownUe(3))));
    }

    #[test]
    fn noise_doubles_with_bandwidth() {
        let mut s = two_ue();
        let a = noise_power(&s, 1, Link::First).unwrap();
        s.channels[0].bandwidth *= 2.0;
        assert_eq!(noise_power(&s, 1, Link::First).unwrap(), 2.0 * a);
    }

    #[test]
    fn single_link_ue_has_no_second_link() {
        let mut s = two_ue();
        s.ues[0].poa_2 = None;
        s.ues[0].chan_2 = None;
        s.ues[0].fixed_sinr_target = Some(2.0);
        assert!(validate_scenario(&s).is_empty());
        assert!(matches!(noise_power(&s, 1, Link::Second), Err(Error::UnknownLink { .. })));
    }
}
