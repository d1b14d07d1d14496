//! Dicke-basis measurement: exact probabilities, seeded shot sampling,
//! collective expectation values and Husimi Q grids.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{mul_right, trace_mul, Axis};
use crate::state::{coherent_amplitudes, CollectiveState};

/// Probabilities below this magnitude of negativity are rounding noise.
pub const NEGATIVE_PROBABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbEntry {
    pub two_j: u32,
    pub two_m: i64,
    pub p: f64,
}

impl ProbEntry {
    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn m(&self) -> f64 {
        self.two_m as f64 / 2.0
    }
}

/// `P(j, m)` for every active block, ledger order (descending `j`, then
/// descending `m`).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbTable {
    pub entries: Vec<ProbEntry>,
}

impl ProbTable {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.p).sum()
    }

    pub fn get(&self, two_j: u32, two_m: i64) -> f64 {
        self.entries
            .iter()
            .find(|e| e.two_j == two_j && e.two_m == two_m)
            .map_or(0.0, |e| e.p)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "j,m,p")?;
        for e in &self.entries {
            writeln!(out, "{},{},{}", e.j(), e.m(), fmt_float(e.p))?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some("j,m,p") => {}
            other => return Err(Error::Parse(format!("unexpected header {other:?}"))),
        }
        let entries = lines
            .enumerate()
            .filter(|(_, l)| !l.is_empty())
            .map(|(row, line)| {
                let bad = || Error::Parse(format!("row {}: '{line}'", row + 2));
                let mut cols = line.split(',');
                let j: f64 = cols.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                let m: f64 = cols.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                let p: f64 = cols.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                Ok(ProbEntry {
                    two_j: (2.0 * j).round() as u32,
                    two_m: (2.0 * m).round() as i64,
                    p,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }
}

/// Floats are written with 17 significant digits so they read back exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Block diagonals of the state. Inactive blocks are omitted.
pub fn probabilities(state: &CollectiveState) -> Result<ProbTable> {
    let mut entries = Vec::new();
    for (i, rho) in state.active() {
        let two_j = state.ledger().block(i).two_j;
        for k in 0..rho.nrows() {
            let p = rho[(k, k)].re;
            if p < -NEGATIVE_PROBABILITY_TOLERANCE {
                return Err(Error::Numeric(format!(
                    "probability {p:e} at j = {}, k = {k} is negative",
                    two_j as f64 / 2.0
                )));
            }
            entries.push(ProbEntry {
                two_j,
                two_m: two_j as i64 - 2 * k as i64,
                p: p.max(0.0),
            });
        }
    }
    Ok(ProbTable { entries })
}

/// Sampled outcome frequencies, aligned with the [`ProbTable`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotCounts {
    pub shots: u64,
    pub seed: u64,
    pub counts: Vec<((u32, i64), u64)>,
}

impl ShotCounts {
    pub fn get(&self, two_j: u32, two_m: i64) -> u64 {
        self.counts
            .iter()
            .find(|(k, _)| *k == (two_j, two_m))
            .map_or(0, |(_, c)| *c)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "j,m,count")?;
        for ((two_j, two_m), count) in &self.counts {
            writeln!(out, "{},{},{count}", *two_j as f64 / 2.0, *two_m as f64 / 2.0)?;
        }
        Ok(())
    }
}

/// Inverse-CDF sampling with a seeded ChaCha stream.
pub fn sample(state: &CollectiveState, shots: u64, seed: u64) -> Result<ShotCounts> {
    if shots == 0 {
        return Err(Error::Domain("shots must be at least 1".into()));
    }
    let table = probabilities(state)?;
    let mut cdf = Vec::with_capacity(table.entries.len());
    let mut acc = 0.0;
    for e in &table.entries {
        acc += e.p;
        cdf.push(acc);
    }
    let total = acc;
    let mut counts = vec![0u64; cdf.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        counts[idx] += 1;
    }
    Ok(ShotCounts {
        shots,
        seed,
        counts: table
            .entries
            .iter()
            .zip(counts)
            .map(|(e, c)| ((e.two_j, e.two_m), c))
            .collect(),
    })
}

/// Collective observables accepted by [`expval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Jx,
    Jy,
    Jz,
    JPlus,
    JMinus,
    Jx2,
    Jy2,
    Jz2,
    JPlus2,
    JMinus2,
}

impl Observable {
    pub const ALL: [Observable; 10] = [
        Observable::Jx,
        Observable::Jy,
        Observable::Jz,
        Observable::JPlus,
        Observable::JMinus,
        Observable::Jx2,
        Observable::Jy2,
        Observable::Jz2,
        Observable::JPlus2,
        Observable::JMinus2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Jx => "Jx",
            Observable::Jy => "Jy",
            Observable::Jz => "Jz",
            Observable::JPlus => "J_plus",
            Observable::JMinus => "J_minus",
            Observable::Jx2 => "Jx2",
            Observable::Jy2 => "Jy2",
            Observable::Jz2 => "Jz2",
            Observable::JPlus2 => "J_plus2",
            Observable::JMinus2 => "J_minus2",
        }
    }

    fn parts(self) -> (Axis, bool) {
        match self {
            Observable::Jx => (Axis::X, false),
            Observable::Jy => (Axis::Y, false),
            Observable::Jz => (Axis::Z, false),
            Observable::JPlus => (Axis::Plus, false),
            Observable::JMinus => (Axis::Minus, false),
            Observable::Jx2 => (Axis::X, true),
            Observable::Jy2 => (Axis::Y, true),
            Observable::Jz2 => (Axis::Z, true),
            Observable::JPlus2 => (Axis::Plus, true),
            Observable::JMinus2 => (Axis::Minus, true),
        }
    }

    pub fn is_hermitian(self) -> bool {
        self.parts().0.is_cartesian()
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .iter()
            .copied()
            .find(|o| o.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown observable '{s}'")))
    }
}

/// `sum_j tr(rho_j O_j)`.
pub fn expval(state: &CollectiveState, observable: Observable) -> Complex64 {
    let (axis, squared) = observable.parts();
    state
        .active()
        .map(|(i, rho)| {
            let two_j = state.ledger().block(i).two_j;
            if squared {
                trace_mul(&mul_right(rho, two_j, axis), two_j, axis)
            } else {
                trace_mul(rho, two_j, axis)
            }
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HusimiPoint {
    pub theta: f64,
    pub phi: f64,
    pub q: f64,
}

/// `Q(θ, φ) = sum_j <θ,φ; j| rho_j |θ,φ; j>` over the product grid, row-major
/// in `theta` then `phi`.
pub fn husimi_grid(state: &CollectiveState, thetas: &[f64], phis: &[f64]) -> Result<Vec<HusimiPoint>> {
    if thetas.is_empty() || phis.is_empty() {
        return Err(Error::Domain("Husimi grid needs at least one point per axis".into()));
    }
    let blocks: Vec<(u32, &crate::linalg::Mat)> = state
        .active()
        .map(|(i, m)| (state.ledger().block(i).two_j, m))
        .collect();
    let points: Vec<(f64, f64)> = thetas
        .iter()
        .flat_map(|&t| phis.iter().map(move |&p| (t, p)))
        .collect();
    Ok(points
        .par_iter()
        .map(|&(theta, phi)| {
            let q: f64 = blocks
                .iter()
                .map(|(two_j, rho)| {
                    let psi = coherent_amplitudes(*two_j, theta, phi);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (r, a) in psi.iter().enumerate() {
                        for (col, b) in psi.iter().enumerate() {
                            acc += a.conj() * rho[(r, col)] * b;
                        }
                    }
                    acc.re
                })
                .sum();
            HusimiPoint { theta, phi, q }
        })
        .collect())
}

pub fn write_husimi_csv<W: Write>(points: &[HusimiPoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "theta,phi,q")?;
    for p in points {
        writeln!(out, "{},{},{}", fmt_float(p.theta), fmt_float(p.phi), fmt_float(p.q))?;
    }
    Ok(())
}

/// Uniform grid: `steps` points on `[0, π]` (inclusive) for θ and on
/// `[0, 2π)` for φ.
pub fn sphere_grid(theta_steps: usize, phi_steps: usize) -> (Vec<f64>, Vec<f64>) {
    use std::f64::consts::PI;
    let thetas = if theta_steps == 1 {
        vec![0.0]
    } else {
        (0..theta_steps)
            .map(|k| PI * k as f64 / (theta_steps - 1) as f64)
            .collect()
    };
    let phis = (0..phi_steps)
        .map(|k| 2.0 * PI * k as f64 / phi_steps as f64)
        .collect();
    (thetas, phis)
}
