//! Symmetric collective depolarizing channel.
//!
//! The channel acts with single-particle operators, so it is not generated
//! by collective spins, but the sum over particles of
//! `(s_+ rho s_- + s_- rho s_+)/2 + s_z rho s_z` is permutation invariant and
//! therefore still block diagonal. Its action on `|j,m><j,m'|` is obtained by
//! splitting one particle off the ensemble: each copy of block `j` is a spin
//! `j_r = j ± 1/2` of the other `N-1` particles coupled to a spin-1/2, the
//! single-particle operator moves the coupled state to `j' = j_r ± 1/2`, and
//! the fraction of block `j` built on each `j_r` is
//! `d_{N-1}^{j_r} / d_N^j`. Everything below works in units of `2j`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::linalg::{trace, Mat};
use crate::state::CollectiveState;

/// Spherical component of the single-particle spin used by a channel term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteOp {
    Plus,
    Minus,
    Z,
}

impl SiteOp {
    /// Change in `m`.
    fn shift(self) -> i64 {
        match self {
            SiteOp::Plus => 1,
            SiteOp::Minus => -1,
            SiteOp::Z => 0,
        }
    }
}

/// The three terms of the symmetric channel with their prefactors.
const TERMS: [(SiteOp, f64); 3] = [(SiteOp::Plus, 0.5), (SiteOp::Minus, 0.5), (SiteOp::Z, 1.0)];

/// Block-transition coefficients for `N` particles.
#[derive(Debug, Clone, Copy)]
pub struct TransitionTable {
    n: u32,
}

impl TransitionTable {
    pub fn new(n: u32) -> Self {
        Self { n }
    }

    /// `N d_{N-1}^{j_r} / d_N^j`: how much of block `j` sits on a rest spin
    /// `j_r = j ± 1/2`, times the number of particles.
    pub fn branch_weight(&self, two_j: u32, two_jr: u32) -> f64 {
        let j = two_j as f64 / 2.0;
        let s = self.n as f64 / 2.0;
        if two_jr == two_j + 1 {
            if two_jr > self.n.saturating_sub(1) {
                return 0.0;
            }
            (2.0 * j + 2.0) * (s - j) / (2.0 * j + 1.0)
        } else if two_jr + 1 == two_j {
            2.0 * j * (s + j + 1.0) / (2.0 * j + 1.0)
        } else {
            0.0
        }
    }

    /// Matrix element `<J', m+q| s_q |J, m>` between states of a rest spin
    /// `j_r` coupled to one spin-1/2, with `q` fixed by `op`. `J, J'` must be
    /// `j_r ± 1/2`; `two_m` is `2m` of the source state.
    pub fn site_element(op: SiteOp, two_jr: u32, two_j_to: u32, two_j_from: u32, two_m: i64) -> f64 {
        let amplitudes = |two_jj: u32, two_mm: i64| -> (f64, f64) {
            // (a, b): amplitudes on |j_r, m-1/2>|up> and |j_r, m+1/2>|down>
            let jr = two_jr as f64 / 2.0;
            let m = two_mm as f64 / 2.0;
            let denom = 2.0 * jr + 1.0;
            if two_jj == two_jr + 1 {
                (
                    ((jr + m + 0.5) / denom).max(0.0).sqrt(),
                    ((jr - m + 0.5) / denom).max(0.0).sqrt(),
                )
            } else {
                (
                    -((jr - m + 0.5) / denom).max(0.0).sqrt(),
                    ((jr + m + 0.5) / denom).max(0.0).sqrt(),
                )
            }
        };
        let to_m = two_m + 2 * op.shift();
        if to_m.abs() > two_j_to as i64 || two_m.abs() > two_j_from as i64 {
            return 0.0;
        }
        let (a_from, b_from) = amplitudes(two_j_from, two_m);
        let (a_to, b_to) = amplitudes(two_j_to, to_m);
        match op {
            SiteOp::Z => 0.5 * (a_to * a_from - b_to * b_from),
            SiteOp::Plus => a_to * b_from,
            SiteOp::Minus => b_to * a_from,
        }
    }

    /// Contributions of source block `two_j` to destination block `two_j_to`:
    /// one `(op, prefactor x branch weight, element per source index)` entry
    /// per term and rest-spin branch.
    fn channel(&self, two_j: u32, two_j_to: u32) -> Vec<(SiteOp, f64, Vec<f64>)> {
        let dim = two_j as usize + 1;
        let mut out = Vec::new();
        for (op, pref) in TERMS {
            // outer products are taken per rest-spin branch
            for two_jr in [two_j + 1, two_j.wrapping_sub(1)] {
                if two_jr > self.n {
                    continue;
                }
                if two_j_to != two_jr + 1 && two_j_to + 1 != two_jr {
                    continue;
                }
                let w = self.branch_weight(two_j, two_jr);
                if w == 0.0 {
                    continue;
                }
                let coef: Vec<f64> = (0..dim)
                    .map(|k| {
                        let two_m = two_j as i64 - 2 * k as i64;
                        Self::site_element(op, two_jr, two_j_to, two_j, two_m)
                    })
                    .collect();
                out.push((op, pref * w, coef));
            }
        }
        out
    }
}

/// Unnormalized `rho' = sum_n [(s+ rho s- + s- rho s+)/2 + sz rho sz]` in the
/// collective representation. Returned blocks follow ledger order.
pub fn rho_prime(state: &CollectiveState) -> Vec<Option<Mat>> {
    let ledger = state.ledger();
    let table = TransitionTable::new(ledger.n_particles());
    (0..ledger.len())
        .into_par_iter()
        .map(|dest| {
            let two_j_to = ledger.block(dest).two_j;
            let dim_to = two_j_to as usize + 1;
            let mut acc: Option<Mat> = None;
            // sources: same block and the two neighbours
            let lo = dest.saturating_sub(1);
            let hi = (dest + 1).min(ledger.len() - 1);
            for src in lo..=hi {
                let Some(rho) = state.block(src) else { continue };
                let two_j = ledger.block(src).two_j;
                let dim = two_j as usize + 1;
                for (op, weight, coef) in table.channel(two_j, two_j_to) {
                    // destination index k' = (j' - j) + k - q
                    let offset = (two_j_to as i64 - two_j as i64) / 2 - op.shift();
                    let target = acc.get_or_insert_with(|| Mat::zeros(dim_to, dim_to));
                    for k1 in 0..dim {
                        let c1 = coef[k1];
                        if c1 == 0.0 {
                            continue;
                        }
                        let d1 = k1 as i64 + offset;
                        if d1 < 0 || d1 >= dim_to as i64 {
                            continue;
                        }
                        for k2 in 0..dim {
                            let c2 = coef[k2];
                            if c2 == 0.0 {
                                continue;
                            }
                            let d2 = k2 as i64 + offset;
                            if d2 < 0 || d2 >= dim_to as i64 {
                                continue;
                            }
                            target[(d1 as usize, d2 as usize)] += rho[(k1, k2)] * (weight * c1 * c2);
                        }
                    }
                }
            }
            acc
        })
        .collect()
}

/// `(1 - ε) rho + ε rho' / tr(rho')`.
pub fn depolarize(state: &CollectiveState, epsilon: f64) -> Result<CollectiveState> {
    if !(0.0..=1.0).contains(&epsilon) {
        return domain(format!("depolarizing probability {epsilon} outside [0, 1]"));
    }
    if epsilon == 0.0 {
        return Ok(state.clone());
    }
    let prime = rho_prime(state);
    let tr: Complex64 = prime.iter().flatten().map(trace).sum();
    if !(tr.re.is_finite() && tr.re > 0.0) {
        return Err(Error::Numeric(format!("tr(rho') = {tr} cannot be normalized")));
    }
    let keep = 1.0 - epsilon;
    let mix = epsilon / tr.re;
    let blocks = state
        .blocks()
        .iter()
        .zip(prime)
        .map(|(old, new)| match (old, new) {
            (Some(a), Some(b)) => Some(a.scale(keep) + b.scale(mix)),
            (Some(a), None) => Some(a.scale(keep)),
            (None, Some(b)) => Some(b.scale(mix)),
            (None, None) => None,
        })
        .collect();
    Ok(state.with_blocks(blocks))
}
