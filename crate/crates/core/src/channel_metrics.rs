//! Effective interference, SINR and achievable rate per access link, plus
//! the normalized matrix form used by the convergence analysis.
//!
//! Matrix convention: `f_xy[(i, j)]` is the gain from UE `j` transmitting on
//! its link `x` into the receiver of UE `i`'s link `y`, divided by UE `i`'s own
//! gain on link `y`. With that convention
//!
//! ```text
//! E1 = D1 + F11 P1 + F21 P2
//! E2 = D2 + F22 P2 + F12 P1
//! ```
//!
//! An entry is non-zero only when the two links share a channel.

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::net_model::{Link, Scenario};
use crate::{Error, Result, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossGainMatrices<T = f64> {
    pub f11: Matrix<T>,
    pub f12: Matrix<T>,
    pub f21: Matrix<T>,
    pub f22: Matrix<T>,
    /// Normalized noise `n_i^(x) / g_ii^(x)`, watts. Zero for an absent link.
    pub d1: Vec<T>,
    pub d2: Vec<T>,
    /// Link bandwidths, Hz. Zero for an absent link.
    pub w1: Vec<T>,
    pub w2: Vec<T>,
    /// `1 / (w1 + w2)`.
    pub lambda: Vec<T>,
}

impl<T: Scalar> CrossGainMatrices<T> {
    pub fn n(&self) -> usize {
        self.d1.len()
    }

    /// Matrix mapping powers on transmit link `from` to interference on
    /// receive link `to`.
    pub fn f(&self, from: Link, to: Link) -> &Matrix<T> {
        match (from, to) {
            (Link::First, Link::First) => &self.f11,
            (Link::First, Link::Second) => &self.f12,
            (Link::Second, Link::First) => &self.f21,
            (Link::Second, Link::Second) => &self.f22,
        }
    }

    fn f_mut(&mut self, from: Link, to: Link) -> &mut Matrix<T> {
        match (from, to) {
            (Link::First, Link::First) => &mut self.f11,
            (Link::First, Link::Second) => &mut self.f12,
            (Link::Second, Link::First) => &mut self.f21,
            (Link::Second, Link::Second) => &mut self.f22,
        }
    }

    pub fn d(&self, link: Link) -> &[T] {
        match link {
            Link::First => &self.d1,
            Link::Second => &self.d2,
        }
    }

    pub fn w(&self, link: Link) -> &[T] {
        match link {
            Link::First => &self.w1,
            Link::Second => &self.w2,
        }
    }
}

/// Builds the normalized cross-gain matrices and noise vectors of `s`.
pub fn build_matrices<T: Scalar>(s: &Scenario<T>) -> Result<CrossGainMatrices<T>> {
    let n = s.n_ues();
    let gains = s.gain_index();
    let lookup = |ue: usize, poa: usize, channel: usize| {
        gains.get(&(ue, poa, channel)).copied().ok_or(Error::MissingGain { ue, poa, channel })
    };
    let mut m = CrossGainMatrices {
        f11: Matrix::zeros(n, n),
        f12: Matrix::zeros(n, n),
        f21: Matrix::zeros(n, n),
        f22: Matrix::zeros(n, n),
        d1: vec![T::zero(); n],
        d2: vec![T::zero(); n],
        w1: vec![T::zero(); n],
        w2: vec![T::zero(); n],
        lambda: vec![T::zero(); n],
    };
    for (i, ue) in s.ues.iter().enumerate() {
        for (rx_link, poa, chan) in ue.links() {
            let bandwidth = s
                .channel(chan)
                .ok_or(Error::UnknownLink { ue: ue.id, link: rx_link })?
                .bandwidth;
            let own = lookup(ue.id, poa, chan)?;
            let k = rx_link.index();
            [&mut m.d1, &mut m.d2][k][i] = s.noise_psd * bandwidth / own;
            [&mut m.w1, &mut m.w2][k][i] = bandwidth;
            for (j, other) in s.ues.iter().enumerate() {
                if j == i {
                    continue;
                }
                for (tx_link, _, other_chan) in other.links() {
                    if other_chan == chan {
                        let g = lookup(other.id, poa, chan)?;
                        m.f_mut(tx_link, rx_link)[(i, j)] = g / own;
                    }
                }
            }
        }
        m.lambda[i] = T::one() / (m.w1[i] + m.w2[i]);
    }
    Ok(m)
}

fn check_len<T>(v: &[T], n: usize) -> Result<()> {
    if v.len() == n {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: n, found: v.len() })
    }
}

/// Vector form of the effective interference on both links.
pub fn effective_interference<T: Scalar>(
    m: &CrossGainMatrices<T>,
    p1: &[T],
    p2: &[T],
) -> Result<(Vec<T>, Vec<T>)> {
    let n = m.n();
    check_len(p1, n)?;
    check_len(p2, n)?;
    let a = m.f11.mul_vec(p1)?;
    let b = m.f21.mul_vec(p2)?;
    let c = m.f22.mul_vec(p2)?;
    let d = m.f12.mul_vec(p1)?;
    let e1 = (0..n).map(|i| m.d1[i] + a[i] + b[i]).collect();
    let e2 = (0..n).map(|i| m.d2[i] + c[i] + d[i]).collect();
    Ok((e1, e2))
}

/// `W log2(1 + p/e)` per link. Links with zero bandwidth (absent) carry zero
/// rate.
pub fn link_rates<T: Scalar>(
    m: &CrossGainMatrices<T>,
    p1: &[T],
    p2: &[T],
    e1: &[T],
    e2: &[T],
) -> Result<(Vec<T>, Vec<T>)> {
    let n = m.n();
    for v in [p1, p2, e1, e2] {
        check_len(v, n)?;
    }
    let rate = |w: T, p: T, e: T| -> Result<T> {
        if w == T::zero() {
            return Ok(T::zero());
        }
        if !(e > T::zero()) {
            return Err(Error::NonPositive { what: "effective interference", value: e.as_f64() });
        }
        Ok(w * (p / e).ln_1p() / T::lit(std::f64::consts::LN_2))
    };
    let r1 = (0..n).map(|i| rate(m.w1[i], p1[i], e1[i])).collect::<Result<_>>()?;
    let r2 = (0..n).map(|i| rate(m.w2[i], p2[i], e2[i])).collect::<Result<_>>()?;
    Ok((r1, r2))
}

/// Transmit powers together with the quantities every UE observes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerState<T = f64> {
    pub p1: Vec<T>,
    pub p2: Vec<T>,
    pub e1: Vec<T>,
    pub e2: Vec<T>,
    pub sinr1: Vec<T>,
    pub sinr2: Vec<T>,
    pub rate1: Vec<T>,
    pub rate2: Vec<T>,
}

impl<T: Scalar> PowerState<T> {
    pub fn evaluate(m: &CrossGainMatrices<T>, p1: Vec<T>, p2: Vec<T>) -> Result<Self> {
        let (e1, e2) = effective_interference(m, &p1, &p2)?;
        let (rate1, rate2) = link_rates(m, &p1, &p2, &e1, &e2)?;
        let sinr = |p: &[T], e: &[T]| -> Vec<T> {
            p.iter()
                .zip(e)
                .map(|(&p, &e)| if e > T::zero() { p / e } else { T::zero() })
                .collect()
        };
        Ok(Self { sinr1: sinr(&p1, &e1), sinr2: sinr(&p2, &e2), p1, p2, e1, e2, rate1, rate2 })
    }

    pub fn n(&self) -> usize {
        self.p1.len()
    }

    pub fn power(&self, link: Link) -> &[T] {
        match link {
            Link::First => &self.p1,
            Link::Second => &self.p2,
        }
    }

    pub fn sinr(&self, link: Link) -> &[T] {
        match link {
            Link::First => &self.sinr1,
            Link::Second => &self.sinr2,
        }
    }

    pub fn total_power(&self, i: usize) -> T {
        self.p1[i] + self.p2[i]
    }
}
