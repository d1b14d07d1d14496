//! Parameter sweeps and timing runs behind the command-line tool.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gates::{apply_gate, Circuit, GateSpec};
use crate::linalg::{c, Mat};
use crate::measurement::{expval, fmt_float, Observable};
use crate::noise::depolarize;
use crate::squeezing::{squeezing, to_db};
use crate::state::{coherent_amplitudes, CollectiveState};

/// Inclusive evenly spaced grid; a single step yields `start`.
pub fn linspace(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..steps)
            .map(|k| start + (stop - start) * k as f64 / (steps - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqueezeGate {
    Oat,
    Tnt,
    Tat,
    Gms,
}

impl FromStr for SqueezeGate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oat" => Ok(SqueezeGate::Oat),
            "tnt" => Ok(SqueezeGate::Tnt),
            "tat" => Ok(SqueezeGate::Tat),
            "gms" => Ok(SqueezeGate::Gms),
            _ => Err(Error::Parse(format!("unknown squeezing gate '{s}'"))),
        }
    }
}

impl fmt::Display for SqueezeGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SqueezeGate::Oat => "oat",
            SqueezeGate::Tnt => "tnt",
            SqueezeGate::Tat => "tat",
            SqueezeGate::Gms => "gms",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeConfig {
    pub n: u32,
    pub gate: SqueezeGate,
    pub theta_min: f64,
    pub theta_max: f64,
    pub steps: usize,
    /// TNT coupling; 1 makes the linear term `Nθ J_x`.
    pub lambda: f64,
    /// GMS azimuth.
    pub phi: f64,
}

impl SqueezeConfig {
    pub fn new(n: u32, gate: SqueezeGate) -> Self {
        Self {
            n,
            gate,
            theta_min: 0.0,
            theta_max: 0.5,
            steps: 51,
            lambda: 1.0,
            phi: std::f64::consts::FRAC_PI_4,
        }
    }

    /// Gates for one sweep point: twisting gates act on the equatorial
    /// coherent state, GMS directly on the ground state.
    pub fn circuit(&self, theta: f64) -> Circuit {
        let mut circuit = Circuit::new(self.n);
        if self.gate != SqueezeGate::Gms {
            circuit.push(GateSpec::rn(FRAC_PI_2, 0.0));
        }
        circuit.push(match self.gate {
            SqueezeGate::Oat => GateSpec::oat(theta, "z"),
            SqueezeGate::Tnt => GateSpec::tnt(theta, self.lambda, "zx"),
            SqueezeGate::Tat => GateSpec::tat(theta, "zy"),
            SqueezeGate::Gms => GateSpec::gms(theta, self.phi),
        });
        circuit
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeRow {
    pub theta: f64,
    pub xi2_s_db: f64,
    pub xi2_r_db: f64,
}

/// Rows whose frame is degenerate carry NaN and a warning on stderr.
pub fn squeeze_sweep(config: &SqueezeConfig) -> Result<Vec<SqueezeRow>> {
    if config.steps == 0 || !(config.theta_max >= config.theta_min) {
        return Err(Error::Domain("squeeze sweep needs steps >= 1 and min <= max".into()));
    }
    linspace(config.theta_min, config.theta_max, config.steps)
        .into_par_iter()
        .map(|theta| {
            let state = config.circuit(theta).run()?;
            Ok(match squeezing(&state) {
                Ok(s) => SqueezeRow { theta, xi2_s_db: to_db(s.xi2_s), xi2_r_db: to_db(s.xi2_r) },
                Err(Error::DegenerateFrame(norm)) => {
                    eprintln!("warning: theta = {theta}: mean spin {norm:e} too small, row set to NaN");
                    SqueezeRow { theta, xi2_s_db: f64::NAN, xi2_r_db: f64::NAN }
                }
                Err(e) => return Err(e),
            })
        })
        .collect()
}

pub fn write_squeeze_csv<W: Write>(rows: &[SqueezeRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "theta,xi2_S_dB,xi2_R_dB")?;
    for r in rows {
        writeln!(out, "{},{},{}", fmt_float(r.theta), fmt_float(r.xi2_s_db), fmt_float(r.xi2_r_db))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct QptConfig {
    pub n: u32,
    pub lambda: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub steps: usize,
}

impl QptConfig {
    pub fn new(n: u32, steps: usize) -> Self {
        Self { n, lambda: -0.2, r_min: -5.0, r_max: 5.0, steps }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 || !(self.r_min < self.r_max) {
            return Err(Error::Domain("QPT sweep needs steps >= 2 and r_min < r_max".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QptRow {
    pub r: f64,
    /// `2<J_z>/N`
    pub jz: f64,
    /// `4<J_x^2>/N^2`
    pub jx2: f64,
    /// `4<J_y^2>/N^2`
    pub jy2: f64,
}

/// Adiabatic sweep: one state evolves through every `r`, each step applying
/// `RZ(Λr)` then `TAT(Λ/N, xy)`.
pub fn qpt_sweep(config: &QptConfig) -> Result<Vec<QptRow>> {
    config.validate()?;
    let n = config.n as f64;
    let mut state = CollectiveState::ground(config.n)?;
    let tat = GateSpec::tat(config.lambda / n, "xy");
    let mut rows = Vec::with_capacity(config.steps);
    for r in linspace(config.r_min, config.r_max, config.steps) {
        state = apply_gate(&state, &GateSpec::rz(config.lambda * r))?;
        state = apply_gate(&state, &tat)?;
        rows.push(QptRow {
            r,
            jz: 2.0 * expval(&state, Observable::Jz).re / n,
            jx2: 4.0 * expval(&state, Observable::Jx2).re / (n * n),
            jy2: 4.0 * expval(&state, Observable::Jy2).re / (n * n),
        });
    }
    Ok(rows)
}

pub fn write_qpt_csv<W: Write>(rows: &[QptRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "r,jz,jx2,jy2")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", fmt_float(r.r), fmt_float(r.jz), fmt_float(r.jx2), fmt_float(r.jy2))?;
    }
    Ok(())
}

/// Sample standard deviation of `2<J_z>/N` over rows with `r` in `[lo, hi]`.
pub fn jz_spread(rows: &[QptRow], lo: f64, hi: f64) -> f64 {
    let xs: Vec<f64> = rows.iter().filter(|r| r.r >= lo && r.r <= hi).map(|r| r.jz).collect();
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// `layers` rounds of `RX, RY, RZ` at `π/3`, each optionally depolarized.
pub fn bench_circuit(n: u32, layers: usize, noise: Option<f64>) -> Circuit {
    let angle = std::f64::consts::PI / 3.0;
    let mut circuit = Circuit::new(n);
    for _ in 0..layers {
        for g in [GateSpec::rx(angle), GateSpec::ry(angle), GateSpec::rz(angle)] {
            circuit.push(match noise {
                Some(eps) => g.with_noise(eps),
                None => g,
            });
        }
    }
    circuit
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub n: u32,
    pub seconds: f64,
}

/// Minimum wall time over `repeats` runs of `job(n)` for each `n`.
pub fn time_min<F>(ns: &[u32], repeats: usize, job: F) -> Result<Vec<BenchRow>>
where
    F: Fn(u32) -> Result<()>,
{
    let repeats = repeats.max(1);
    ns.iter()
        .map(|&n| {
            let mut best = f64::INFINITY;
            for _ in 0..repeats {
                let clock = Instant::now();
                job(n)?;
                best = best.min(clock.elapsed().as_secs_f64());
            }
            Ok(BenchRow { n, seconds: best })
        })
        .collect()
}

/// Time the layered rotation circuit for each `n`.
pub fn bench_circuits(ns: &[u32], layers: usize, noise: Option<f64>, repeats: usize) -> Result<Vec<BenchRow>> {
    time_min(ns, repeats, |n| bench_circuit(n, layers, noise).run().map(|_| ()))
}

/// A state with every block of the ledger populated by a coherent state,
/// weighted by degeneracy.
pub fn fully_mixed_coherent(n: u32, theta: f64, phi: f64) -> Result<CollectiveState> {
    let ledger = crate::basis::BlockLedger::new(n)?;
    let weights: Vec<f64> = ledger
        .blocks()
        .iter()
        .enumerate()
        .map(|(i, b)| ledger.degeneracy_f64(i) * (b.two_j as f64 + 1.0))
        .collect();
    let total: f64 = weights.iter().sum();
    let blocks = ledger
        .blocks()
        .iter()
        .zip(&weights)
        .map(|(b, w)| {
            let v = coherent_amplitudes(b.two_j, theta, phi);
            let d = v.len();
            let mut m = Mat::from_fn(d, d, |r, col| v[r] * v[col].conj());
            m *= c(w / total);
            Some(m)
        })
        .collect();
    CollectiveState::from_blocks(&ledger, blocks)
}

/// Time one depolarizing application on a fully populated state.
pub fn bench_channel(ns: &[u32], repeats: usize) -> Result<Vec<BenchRow>> {
    let states: Vec<CollectiveState> = ns
        .iter()
        .map(|&n| fully_mixed_coherent(n, 1.0, 0.5))
        .collect::<Result<_>>()?;
    time_min(ns, repeats, |n| {
        let s = &states[ns.iter().position(|&m| m == n).expect("n from list")];
        depolarize(s, 0.05).map(|_| ())
    })
}

/// Least-squares slope of `ln t` against `ln n`.
pub fn loglog_slope(rows: &[BenchRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.seconds > 0.0)
        .map(|r| ((r.n as f64).ln(), r.seconds.ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope over the larger half of the sampled `n` values.
pub fn top_half_slope(rows: &[BenchRow]) -> f64 {
    let mut sorted = rows.to_vec();
    sorted.sort_by_key(|r| r.n);
    loglog_slope(&sorted[sorted.len() / 2..])
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,seconds")?;
    for r in rows {
        writeln!(out, "{},{}", r.n, fmt_float(r.seconds))?;
    }
    Ok(())
}
