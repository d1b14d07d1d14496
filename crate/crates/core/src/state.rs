//! Collective density matrices `rho = ⊕_j rho_j` in the Dicke basis.
//!
//! Blocks are activated lazily: a block that was never populated is `None`
//! rather than a zero matrix, so purely symmetric dynamics only ever touches
//! the `j = N/2` block.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::basis::{ln_binomial, BlockLedger};
use crate::error::{domain, Error, Result};
use crate::linalg::{c, hermiticity_defect, min_eigenvalue, trace, trace_product, Mat};
use crate::operator::CollectiveOperator;

#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveState {
    ledger: BlockLedger,
    blocks: Vec<Option<Mat>>,
    conditioned: bool,
}

/// Tolerances used by [`CollectiveState::check_invariants`].
#[derive(Debug, Clone, Copy)]
pub struct InvariantTolerance {
    pub trace: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
}

impl Default for InvariantTolerance {
    fn default() -> Self {
        Self {
            trace: 1e-12,
            hermiticity: 1e-12,
            min_eigenvalue: -1e-10,
        }
    }
}

impl CollectiveState {
    /// Build from explicit blocks; `None` marks an inactive block.
    pub fn from_blocks(ledger: &BlockLedger, blocks: Vec<Option<Mat>>) -> Result<Self> {
        if blocks.len() != ledger.len() {
            return domain(format!(
                "expected {} blocks, got {}",
                ledger.len(),
                blocks.len()
            ));
        }
        for (b, m) in ledger.blocks().iter().zip(&blocks) {
            if let Some(m) = m {
                if m.nrows() != b.dim() || m.ncols() != b.dim() {
                    return domain(format!("block j = {} has wrong shape", b.j()));
                }
            }
        }
        Ok(Self {
            ledger: ledger.clone(),
            blocks,
            conditioned: false,
        })
    }

    /// Pure state living in the maximal `j = N/2` block.
    pub fn symmetric_pure(n: u32, amplitudes: &[Complex64]) -> Result<Self> {
        let ledger = BlockLedger::new(n)?;
        if amplitudes.len() != n as usize + 1 {
            return domain(format!(
                "symmetric state of {n} particles needs {} amplitudes",
                n + 1
            ));
        }
        let psi = DVector::from_column_slice(amplitudes);
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Numeric("cannot normalize state vector".into()));
        }
        let psi = psi.unscale(norm);
        let rho = &psi * psi.adjoint();
        let mut blocks = vec![None; ledger.len()];
        blocks[0] = Some(rho);
        Self::from_blocks(&ledger, blocks)
    }

    /// `|N/2, -N/2>`, all spins down.
    pub fn ground(n: u32) -> Result<Self> {
        let mut amps = vec![c(0.0); n as usize + 1];
        amps[n as usize] = c(1.0);
        Self::symmetric_pure(n, &amps)
    }

    /// `|N/2, N/2>`, all spins up.
    pub fn excited(n: u32) -> Result<Self> {
        let mut amps = vec![c(0.0); n as usize + 1];
        amps[0] = c(1.0);
        Self::symmetric_pure(n, &amps)
    }

    /// `(|N/2, N/2> + |N/2, -N/2>)/sqrt(2)`.
    pub fn ghz(n: u32) -> Result<Self> {
        let mut amps = vec![c(0.0); n as usize + 1];
        amps[0] = c(1.0);
        amps[n as usize] = c(1.0);
        Self::symmetric_pure(n, &amps)
    }

    /// Coherent spin state pointing along `(sin θ cos φ, sin θ sin φ, cos θ)`.
    pub fn css(n: u32, theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return domain(format!("polar angle {theta} outside [0, pi]"));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return domain(format!("azimuth {phi} outside [0, 2pi)"));
        }
        Self::symmetric_pure(n, &coherent_amplitudes(n, theta, phi))
    }

    pub fn ledger(&self) -> &BlockLedger {
        &self.ledger
    }

    pub fn n_particles(&self) -> u32 {
        self.ledger.n_particles()
    }

    pub fn blocks(&self) -> &[Option<Mat>] {
        &self.blocks
    }

    pub fn block(&self, index: usize) -> Option<&Mat> {
        self.blocks[index].as_ref()
    }

    pub fn into_blocks(self) -> Vec<Option<Mat>> {
        self.blocks
    }

    /// Indices (ledger order) of populated blocks.
    pub fn active(&self) -> impl Iterator<Item = (usize, &Mat)> {
        self.blocks
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.as_ref().map(|m| (i, m)))
    }

    /// True once a non-unitary (`R_+`/`R_-`) gate has been applied and the
    /// state renormalized.
    pub fn is_conditioned(&self) -> bool {
        self.conditioned
    }

    pub(crate) fn mark_conditioned(&mut self) {
        self.conditioned = true;
    }

    pub(crate) fn with_blocks(&self, blocks: Vec<Option<Mat>>) -> Self {
        Self {
            ledger: self.ledger.clone(),
            blocks,
            conditioned: self.conditioned,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.active().map(|(_, m)| trace(m)).sum()
    }

    /// `sum_j tr(rho_j O_j)`.
    pub fn expect(&self, op: &CollectiveOperator) -> Complex64 {
        assert_eq!(op.ledger(), &self.ledger, "operator from another ledger");
        self.active()
            .map(|(i, m)| trace_product(m, op.block(i)))
            .sum()
    }

    /// Scale every block so the total trace is one.
    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace().re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::Numeric(format!("cannot renormalize state with trace {tr}")));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.as_ref().map(|m| m.unscale(tr)))
            .collect();
        Ok(self.with_blocks(blocks))
    }

    /// Unit trace, Hermitian blocks, and no eigenvalue below the tolerance.
    pub fn check_invariants(&self, tol: InvariantTolerance) -> Result<()> {
        let tr = self.trace();
        if (tr - c(1.0)).norm() > tol.trace {
            return Err(Error::Numeric(format!("trace {tr} deviates from 1")));
        }
        for (i, m) in self.active() {
            let j = self.ledger.block(i).j();
            let h = hermiticity_defect(m);
            if h > tol.hermiticity {
                return Err(Error::Numeric(format!("block j = {j} not Hermitian ({h:e})")));
            }
            let lo = min_eigenvalue(m)?;
            if lo < tol.min_eigenvalue {
                return Err(Error::Numeric(format!("block j = {j} has eigenvalue {lo:e}")));
            }
        }
        Ok(())
    }

    /// Global matrix of side `collective_dim`, blocks along the diagonal in
    /// ledger order.
    pub fn to_dense(&self) -> Mat {
        let dim = self.ledger.collective_dim();
        let mut out = Mat::zeros(dim, dim);
        for (i, m) in self.active() {
            let b = self.ledger.block(i);
            out.view_mut((b.offset, b.offset), (b.dim(), b.dim())).copy_from(m);
        }
        out
    }

    /// Largest entrywise difference to another state, treating inactive
    /// blocks as zero.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            let d = match (a, b) {
                (Some(x), Some(y)) => crate::linalg::max_abs(&(x - y)),
                (Some(x), None) | (None, Some(x)) => crate::linalg::max_abs(x),
                (None, None) => 0.0,
            };
            worst = worst.max(d);
        }
        worst
    }
}

/// Spin-`j` coherent-state amplitudes, `2j = two_j`, in descending-`m` order:
/// `sqrt(C(2j, j+m)) cos(θ/2)^(j+m) (sin(θ/2) e^{iφ})^(j-m)`.
pub fn coherent_amplitudes(two_j: u32, theta: f64, phi: f64) -> Vec<Complex64> {
    let (s, co) = (theta / 2.0).sin_cos();
    let (ln_s, ln_c) = (s.abs().ln(), co.abs().ln());
    (0..=two_j)
        .map(|k| {
            // k = j - m powers of the sine, 2j - k of the cosine
            let up = two_j - k;
            let mut ln_mag = 0.5 * ln_binomial(two_j, k);
            let mut sign = 1.0;
            if up > 0 {
                ln_mag += up as f64 * ln_c;
                if co < 0.0 && up % 2 == 1 {
                    sign = -sign;
                }
            }
            if k > 0 {
                ln_mag += k as f64 * ln_s;
                if s < 0.0 && k % 2 == 1 {
                    sign = -sign;
                }
            }
            let mag = sign * ln_mag.exp();
            Complex64::from_polar(1.0, k as f64 * phi) * mag
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::binomial;
    use num_traits::ToPrimitive;

    fn jz_expect(s: &CollectiveState) -> f64 {
        s.expect(&CollectiveOperator::jz(s.ledger())).re
    }

    #[test]
    fn ground_and_excited() {
        let g = CollectiveState::ground(2).unwrap();
        let b = g.block(0).unwrap();
        assert_eq!(b[(2, 2)], c(1.0));
        assert_eq!(b.iter().filter(|z| z.norm() > 0.0).count(), 1);
        assert!(g.block(1).is_none());
        for n in [1, 4, 7] {
            let e = CollectiveState::excited(n).unwrap();
            assert!((jz_expect(&e) - n as f64 / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn ghz_populations_and_coherence() {
        let g = CollectiveState::ghz(4).unwrap();
        let b = g.block(0).unwrap();
        assert!((b[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((b[(4, 4)].re - 0.5).abs() < 1e-15);
        assert!((b[(0, 4)].re - 0.5).abs() < 1e-15);
        g.check_invariants(InvariantTolerance::default()).unwrap();
    }

    #[test]
    fn css_limits() {
        let up = CollectiveState::css(50, 0.0, 1.3).unwrap();
        assert!((up.block(0).unwrap()[(0, 0)].re - 1.0).abs() < 1e-14);
        let down = CollectiveState::css(6, PI, 0.4).unwrap();
        assert!((down.block(0).unwrap()[(6, 6)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn css_equator_is_binomial() {
        let s = CollectiveState::css(50, PI / 2.0, 0.0).unwrap();
        let b = s.block(0).unwrap();
        let total = (binomial(50, 0) << 50usize).to_f64().unwrap();
        for k in 0..=50u32 {
            let expect = binomial(50, k).to_f64().unwrap() / total;
            assert!((b[(k as usize, k as usize)].re - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn css_mean_spin() {
        for (theta, phi) in [(0.3, 0.0), (1.2, 2.0), (2.9, 5.5)] {
            let s = CollectiveState::css(4, theta, phi).unwrap();
            let l = s.ledger();
            assert!((jz_expect(&s) - 2.0 * theta.cos()).abs() < 1e-12);
            let jx = s.expect(&CollectiveOperator::jx(l)).re;
            let jy = s.expect(&CollectiveOperator::jy(l)).re;
            assert!((jx - 2.0 * theta.sin() * phi.cos()).abs() < 1e-12);
            assert!((jy - 2.0 * theta.sin() * phi.sin()).abs() < 1e-12);
            s.check_invariants(InvariantTolerance::default()).unwrap();
        }
    }

    #[test]
    fn css_rejects_bad_angles() {
        assert!(CollectiveState::css(4, -0.1, 0.0).is_err());
        assert!(CollectiveState::css(4, 0.1, 2.0 * PI).is_err());
    }
}
