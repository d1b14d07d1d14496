//! Mean-spin frame and the Kitagawa–Ueda / Wineland squeezing parameters.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operator::{mul_right, trace_mul, Axis};
use crate::state::CollectiveState;

/// Below this `|<J>|` the mean-spin direction is treated as undefined.
pub const FRAME_TOLERANCE: f64 = 1e-12;

const AXES: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

/// First and symmetrized second moments of the collective spin:
/// `mean[a] = <J_a>`, `second[a][b] = Re <J_a J_b>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: [f64; 3],
    pub second: [[f64; 3]; 3],
}

impl Moments {
    pub fn of(state: &CollectiveState) -> Self {
        let mut mean = [0.0; 3];
        let mut second = [[0.0; 3]; 3];
        for (i, rho) in state.active() {
            let two_j = state.ledger().block(i).two_j;
            for (a, &ax) in AXES.iter().enumerate() {
                mean[a] += trace_mul(rho, two_j, ax).re;
                let x = mul_right(rho, two_j, ax);
                for (b, &bx) in AXES.iter().enumerate() {
                    second[a][b] += trace_mul(&x, two_j, bx).re;
                }
            }
        }
        Self { mean, second }
    }

    /// `<J_n>` for a real direction `n`.
    pub fn along(&self, n: [f64; 3]) -> f64 {
        dot(n, self.mean)
    }

    /// `Re <J_u J_v>` for real directions `u`, `v`.
    pub fn correlation(&self, u: [f64; 3], v: [f64; 3]) -> f64 {
        let mut acc = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                acc += u[a] * v[b] * self.second[a][b];
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        dot(self.mean, self.mean).sqrt()
    }
}

/// Orthonormal triad with `n1` along the mean spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSpinFrame {
    pub theta: f64,
    pub phi: f64,
    pub j_norm: f64,
    pub n1: [f64; 3],
    pub n2: [f64; 3],
    pub n3: [f64; 3],
}

impl MeanSpinFrame {
    pub fn from_mean(mean: [f64; 3]) -> Result<Self> {
        let j_norm = dot(mean, mean).sqrt();
        if j_norm <= FRAME_TOLERANCE {
            return Err(Error::DegenerateFrame(j_norm));
        }
        let theta = (mean[2] / j_norm).clamp(-1.0, 1.0).acos();
        let transverse = (j_norm * theta.sin()).abs();
        let phi = if transverse <= FRAME_TOLERANCE {
            0.0
        } else {
            let base = (mean[0] / transverse).clamp(-1.0, 1.0).acos();
            let raw = if mean[1] > 0.0 { base } else { 2.0 * PI - base };
            if raw >= 2.0 * PI {
                raw - 2.0 * PI
            } else {
                raw
            }
        };
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Ok(Self {
            theta,
            phi,
            j_norm,
            n1: [st * cp, st * sp, ct],
            n2: [-sp, cp, 0.0],
            n3: [ct * cp, ct * sp, -st],
        })
    }
}

pub fn mean_spin_frame(state: &CollectiveState) -> Result<MeanSpinFrame> {
    MeanSpinFrame::from_mean(Moments::of(state).mean)
}

/// Both branches of the Kitagawa–Ueda expression plus the Wineland value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Squeezing {
    /// Minimal transverse variance branch, `xi^2_S`.
    pub xi2_s: f64,
    /// Maximal branch (anti-squeezing).
    pub xi2_s_anti: f64,
    pub xi2_r: f64,
    pub frame: MeanSpinFrame,
}

/// Evaluate the squeezing parameters of an `n`-particle state from its moments.
pub fn squeezing_from_moments(n: u32, moments: &Moments) -> Result<Squeezing> {
    let frame = MeanSpinFrame::from_mean(moments.mean)?;
    let (n2, n3) = (frame.n2, frame.n3);
    let v2 = moments.correlation(n2, n2);
    let v3 = moments.correlation(n3, n3);
    let cov = moments.correlation(n2, n3) - moments.along(n2) * moments.along(n3);
    let root = ((v2 - v3).powi(2) + 4.0 * cov * cov).sqrt();
    let scale = 2.0 / n as f64;
    let xi2_s = scale * (v2 + v3 - root);
    let xi2_s_anti = scale * (v2 + v3 + root);
    let wineland = n as f64 / (2.0 * frame.j_norm);
    Ok(Squeezing {
        xi2_s,
        xi2_s_anti,
        xi2_r: wineland * wineland * xi2_s,
        frame,
    })
}

pub fn squeezing(state: &CollectiveState) -> Result<Squeezing> {
    squeezing_from_moments(state.n_particles(), &Moments::of(state))
}

pub fn xi2_s(state: &CollectiveState) -> Result<f64> {
    squeezing(state).map(|s| s.xi2_s)
}

pub fn xi2_r(state: &CollectiveState) -> Result<f64> {
    squeezing(state).map(|s| s.xi2_r)
}

#[allow(non_snake_case)]
pub fn get_xi_2_S(state: &CollectiveState) -> Result<f64> {
    xi2_s(state)
}

#[allow(non_snake_case)]
pub fn get_xi_2_R(state: &CollectiveState) -> Result<f64> {
    xi2_r(state)
}

/// `10 log10(x)`.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
