//! Block structure of the collective Hilbert space.
//!
//! For `N` spin-1/2 particles the permutation-symmetric sector decomposes into
//! irreducible spin-`j` blocks, `j = N/2, N/2 - 1, ..., j_min`, where
//! `j_min = 0` for even `N` and `1/2` for odd `N`. Each block appears with a
//! multiplicity `d_N^j`; collective operators act identically on every copy,
//! so only one `(2j+1)`-dimensional matrix per block is ever stored.
//!
//! Angular momenta are carried as `two_j = 2j` so that half-integers stay
//! exact. Inside a block, basis index `k` labels `m = j - k`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{domain, Result};

/// Number of inequivalent ways `n` spin-1/2 particles couple to total spin
/// `j = two_j / 2`, `n! (2j+1) / ((n/2 - j)! (n/2 + j + 1)!)`, exact.
pub fn degeneracy(n: u32, two_j: u32) -> Result<BigUint> {
    if two_j > n || !(n - two_j).is_multiple_of(2) {
        return domain(format!("j = {}/2 is not a valid total spin for N = {n}", two_j));
    }
    let lower = (n - two_j) / 2; // n/2 - j
    let upper = (n + two_j) / 2 + 1; // n/2 + j + 1
    let d = binomial(n, lower) * BigUint::from(two_j + 1) / BigUint::from(upper);
    Ok(d)
}

/// Exact binomial coefficient.
pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Natural log of `C(n, k)`, used where only ratios of huge binomials matter.
pub fn ln_binomial(n: u32, k: u32) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// One irreducible block of the collective space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub two_j: u32,
    pub degeneracy: BigUint,
    /// Start of this block in the concatenated basis ordering.
    pub offset: usize,
}

impl Block {
    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// `m` value of in-block index `k`.
    pub fn m(&self, k: usize) -> f64 {
        self.j() - k as f64
    }
}

/// The ordered list of spin blocks for a given particle number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLedger {
    n: u32,
    blocks: Vec<Block>,
}

impl BlockLedger {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return domain("particle number must be at least 1");
        }
        let mut blocks = Vec::with_capacity(n as usize / 2 + 1);
        let mut offset = 0;
        let mut two_j = n as i64;
        while two_j >= 0 {
            let tj = two_j as u32;
            blocks.push(Block {
                two_j: tj,
                degeneracy: degeneracy(n, tj)?,
                offset,
            });
            offset += tj as usize + 1;
            two_j -= 2;
        }
        Ok(Self { n, blocks })
    }

    pub fn n_particles(&self) -> u32 {
        self.n
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, index: usize) -> &Block {
        &self.blocks[index]
    }

    /// Index of the block with total spin `two_j / 2`, if it exists.
    pub fn index_of(&self, two_j: u32) -> Option<usize> {
        if two_j > self.n || !(self.n - two_j).is_multiple_of(2) {
            return None;
        }
        Some(((self.n - two_j) / 2) as usize)
    }

    /// `sum_j (2j + 1)`: the dimension of the collective space.
    pub fn collective_dim(&self) -> usize {
        self.blocks.iter().map(Block::dim).sum()
    }

    /// `sum_j (2j + 1) d_N^j`, which must equal `2^N`.
    pub fn full_dim(&self) -> BigUint {
        self.blocks
            .iter()
            .map(|b| &b.degeneracy * BigUint::from(b.dim()))
            .sum()
    }

    /// `d_N^j` as a float; exact enough for weights well beyond `N = 1000`.
    pub fn degeneracy_f64(&self, index: usize) -> f64 {
        self.blocks[index].degeneracy.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// Closed-form collective dimension: `(N+2)^2/4` for even `N`, `(N+3)(N+1)/4`
/// for odd `N`.
pub fn collective_dim_closed_form(n: u32) -> usize {
    let n = n as usize;
    if n.is_multiple_of(2) {
        (n + 2) * (n + 2) / 4
    } else {
        (n + 3) * (n + 1) / 4
    }
}
