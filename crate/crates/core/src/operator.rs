//! Block-diagonal collective operators `O = ⊕_j O_j`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::basis::BlockLedger;
use crate::linalg::{c, hermiticity_defect, Mat, I};

/// A collective operator, one dense matrix per spin block.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveOperator {
    ledger: BlockLedger,
    blocks: Vec<Mat>,
    hermitian: bool,
}

/// Cartesian or ladder axis label used by the gate catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl Axis {
    pub fn parse(tag: &str) -> Option<Self> {
        match tag.to_ascii_lowercase().as_str() {
            "x" => Some(Axis::X),
            "y" => Some(Axis::Y),
            "z" => Some(Axis::Z),
            "plus" | "+" => Some(Axis::Plus),
            "minus" | "-" => Some(Axis::Minus),
            _ => None,
        }
    }

    pub fn is_cartesian(self) -> bool {
        matches!(self, Axis::X | Axis::Y | Axis::Z)
    }
}

impl CollectiveOperator {
    pub fn from_blocks(ledger: &BlockLedger, blocks: Vec<Mat>, hermitian: bool) -> Self {
        assert_eq!(blocks.len(), ledger.len(), "block count must match ledger");
        for (b, m) in ledger.blocks().iter().zip(&blocks) {
            assert_eq!(m.nrows(), b.dim());
            assert_eq!(m.ncols(), b.dim());
        }
        Self {
            ledger: ledger.clone(),
            blocks,
            hermitian,
        }
    }

    fn build(ledger: &BlockLedger, hermitian: bool, f: impl Fn(u32) -> Mat) -> Self {
        let blocks = ledger.blocks().iter().map(|b| f(b.two_j)).collect();
        Self::from_blocks(ledger, blocks, hermitian)
    }

    pub fn zero(ledger: &BlockLedger) -> Self {
        Self::build(ledger, true, |tj| Mat::zeros(tj as usize + 1, tj as usize + 1))
    }

    pub fn identity(ledger: &BlockLedger) -> Self {
        Self::build(ledger, true, |tj| Mat::identity(tj as usize + 1, tj as usize + 1))
    }

    pub fn jz(ledger: &BlockLedger) -> Self {
        Self::build(ledger, true, spin_z)
    }

    pub fn jplus(ledger: &BlockLedger) -> Self {
        Self::build(ledger, false, spin_plus)
    }

    pub fn jminus(ledger: &BlockLedger) -> Self {
        Self::build(ledger, false, |tj| spin_plus(tj).transpose())
    }

    pub fn jx(ledger: &BlockLedger) -> Self {
        Self::build(ledger, true, |tj| {
            let p = spin_plus(tj);
            (&p + p.transpose()).scale(0.5)
        })
    }

    pub fn jy(ledger: &BlockLedger) -> Self {
        Self::build(ledger, true, |tj| {
            let p = spin_plus(tj);
            (&p - p.transpose()) * (-I * 0.5)
        })
    }

    pub fn axis(ledger: &BlockLedger, axis: Axis) -> Self {
        match axis {
            Axis::X => Self::jx(ledger),
            Axis::Y => Self::jy(ledger),
            Axis::Z => Self::jz(ledger),
            Axis::Plus => Self::jplus(ledger),
            Axis::Minus => Self::jminus(ledger),
        }
    }

    /// `n_x J_x + n_y J_y + n_z J_z`.
    pub fn along(ledger: &BlockLedger, n: [f64; 3]) -> Self {
        Self::jx(ledger).scale(n[0]) + Self::jy(ledger).scale(n[1]) + Self::jz(ledger).scale(n[2])
    }

    /// `J^2 = J_x^2 + J_y^2 + J_z^2`.
    pub fn j_squared(ledger: &BlockLedger) -> Self {
        let x = Self::jx(ledger);
        let y = Self::jy(ledger);
        let z = Self::jz(ledger);
        &(&x * &x) + &(&(&y * &y) + &(&z * &z))
    }

    pub fn ledger(&self) -> &BlockLedger {
        &self.ledger
    }

    pub fn blocks(&self) -> &[Mat] {
        &self.blocks
    }

    pub fn block(&self, index: usize) -> &Mat {
        &self.blocks[index]
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Worst per-block deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        self.blocks.iter().map(hermiticity_defect).fold(0.0, f64::max)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(self.hermitian, |m| m.scale(a))
    }

    pub fn scale_complex(&self, z: Complex64) -> Self {
        let hermitian = self.hermitian && z.im == 0.0;
        self.map(hermitian, |m| m * z)
    }

    pub fn adjoint(&self) -> Self {
        self.map(self.hermitian, |m| m.adjoint())
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        let ab = self * other;
        let ba = other * self;
        let blocks = ab.blocks.iter().zip(&ba.blocks).map(|(x, y)| x - y).collect();
        Self::from_blocks(&self.ledger, blocks, false)
    }

    /// Anticommutator `AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        let ab = self * other;
        let ba = other * self;
        let blocks = ab.blocks.iter().zip(&ba.blocks).map(|(x, y)| x + y).collect();
        Self::from_blocks(&self.ledger, blocks, self.hermitian && other.hermitian)
    }

    /// Assemble the global block-diagonal matrix of side `collective_dim`.
    pub fn to_dense(&self) -> Mat {
        let dim = self.ledger.collective_dim();
        let mut out = Mat::zeros(dim, dim);
        for (b, m) in self.ledger.blocks().iter().zip(&self.blocks) {
            out.view_mut((b.offset, b.offset), (b.dim(), b.dim())).copy_from(m);
        }
        out
    }

    fn map(&self, hermitian: bool, f: impl Fn(&Mat) -> Mat) -> Self {
        Self {
            ledger: self.ledger.clone(),
            blocks: self.blocks.iter().map(f).collect(),
            hermitian,
        }
    }

    fn zip_with(&self, other: &Self, hermitian: bool, f: impl Fn(&Mat, &Mat) -> Mat) -> Self {
        assert_eq!(self.ledger, other.ledger, "operators from different ledgers");
        Self {
            ledger: self.ledger.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
            hermitian,
        }
    }
}

impl Add for &CollectiveOperator {
    type Output = CollectiveOperator;
    fn add(self, rhs: Self) -> CollectiveOperator {
        self.zip_with(rhs, self.hermitian && rhs.hermitian, |a, b| a + b)
    }
}

impl Add for CollectiveOperator {
    type Output = CollectiveOperator;
    fn add(self, rhs: Self) -> CollectiveOperator {
        &self + &rhs
    }
}

impl Sub for &CollectiveOperator {
    type Output = CollectiveOperator;
    fn sub(self, rhs: Self) -> CollectiveOperator {
        self.zip_with(rhs, self.hermitian && rhs.hermitian, |a, b| a - b)
    }
}

impl Sub for CollectiveOperator {
    type Output = CollectiveOperator;
    fn sub(self, rhs: Self) -> CollectiveOperator {
        &self - &rhs
    }
}

/// Block-wise matrix product. The product of two Hermitian operators is only
/// Hermitian when they commute, so the flag is kept only for `A * A`.
impl Mul for &CollectiveOperator {
    type Output = CollectiveOperator;
    fn mul(self, rhs: Self) -> CollectiveOperator {
        let hermitian = self.hermitian && std::ptr::eq(self, rhs);
        self.zip_with(rhs, hermitian, |a, b| a * b)
    }
}

/// `J_z` for one block: `diag(j, j-1, ..., -j)`.
pub fn spin_z(two_j: u32) -> Mat {
    let dim = two_j as usize + 1;
    let j = two_j as f64 / 2.0;
    Mat::from_fn(dim, dim, |r, col| if r == col { c(j - r as f64) } else { c(0.0) })
}

/// `J_+` for one block: `<m+1|J_+|m> = sqrt((j-m)(j+m+1))`.
pub fn spin_plus(two_j: u32) -> Mat {
    let dim = two_j as usize + 1;
    let j = two_j as f64 / 2.0;
    let mut out = Mat::zeros(dim, dim);
    for k in 1..dim {
        let m = j - k as f64;
        out[(k - 1, k)] = c(((j - m) * (j + m + 1.0)).sqrt());
    }
    out
}

/// Ladder coefficient `<m+1|J_+|m>` for source index `k` (`m = j - k`).
fn ladder(two_j: u32, k: usize) -> f64 {
    let j = two_j as f64 / 2.0;
    let m = j - k as f64;
    ((j - m) * (j + m + 1.0)).sqrt()
}

/// `x A` for the single-block spin operator `A` along `axis`, in `O(d^2)`.
pub fn mul_right(x: &Mat, two_j: u32, axis: Axis) -> Mat {
    let d = two_j as usize + 1;
    let j = two_j as f64 / 2.0;
    match axis {
        Axis::Z => Mat::from_fn(d, d, |r, col| x[(r, col)] * (j - col as f64)),
        Axis::Plus => Mat::from_fn(d, d, |r, col| {
            if col == 0 { c(0.0) } else { x[(r, col - 1)] * ladder(two_j, col) }
        }),
        Axis::Minus => Mat::from_fn(d, d, |r, col| {
            if col + 1 == d { c(0.0) } else { x[(r, col + 1)] * ladder(two_j, col + 1) }
        }),
        Axis::X => (mul_right(x, two_j, Axis::Plus) + mul_right(x, two_j, Axis::Minus)).scale(0.5),
        Axis::Y => (mul_right(x, two_j, Axis::Plus) - mul_right(x, two_j, Axis::Minus)) * (-I * 0.5),
    }
}

/// `tr(x A)` for the single-block spin operator `A` along `axis`.
pub fn trace_mul(x: &Mat, two_j: u32, axis: Axis) -> Complex64 {
    let d = two_j as usize + 1;
    let j = two_j as f64 / 2.0;
    let plus = || (1..d).map(|k| x[(k, k - 1)] * ladder(two_j, k)).sum::<Complex64>();
    let minus = || (1..d).map(|k| x[(k - 1, k)] * ladder(two_j, k)).sum::<Complex64>();
    match axis {
        Axis::Z => (0..d).map(|k| x[(k, k)] * (j - k as f64)).sum(),
        Axis::Plus => plus(),
        Axis::Minus => minus(),
        Axis::X => (plus() + minus()) * 0.5,
        Axis::Y => (plus() - minus()) * (-I * 0.5),
    }
}
