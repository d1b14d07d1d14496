//! Variational squeezing: a parameterized twisting circuit, its squeezing
//! cost, finite-difference gradients and three optimizers.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gates::{apply_gate, GateKind, GateSpec};
use crate::squeezing::xi2_s;
use crate::state::CollectiveState;

/// How the TNT layer's coupling follows its free parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TntCoupling {
    /// `Λ = θ`: the parameter is passed as the catalog coupling itself.
    Table1,
    /// The parameter is the total linear coefficient, `exp(-iθ(J_α² - J_β))`,
    /// i.e. `Λ = N`.
    #[default]
    AppendixOmega,
}

impl TntCoupling {
    pub fn lambda(self, n: u32, theta: f64) -> f64 {
        match self {
            TntCoupling::Table1 => theta,
            TntCoupling::AppendixOmega => n as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TntCoupling::Table1 => "table1",
            TntCoupling::AppendixOmega => "appendix-omega",
        }
    }
}

impl fmt::Display for TntCoupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TntCoupling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "table1" => Ok(TntCoupling::Table1),
            "appendix-omega" | "omega" => Ok(TntCoupling::AppendixOmega),
            _ => Err(Error::Parse(format!("unknown TNT coupling '{s}'"))),
        }
    }
}

/// A gate whose angle is the free parameter `slot`. TNT layers may also
/// derive their coupling from the same parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub spec: GateSpec,
    pub slot: usize,
    pub coupling: Option<TntCoupling>,
}

/// Fixed preparation gates followed by parameterized layers, applied to
/// the ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    pub n: u32,
    pub prep: Vec<GateSpec>,
    pub layers: Vec<Layer>,
    dim: usize,
}

impl Ansatz {
    pub fn new(n: u32, prep: Vec<GateSpec>, layers: Vec<Layer>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("ansatz needs at least one particle".into()));
        }
        for layer in &layers {
            if layer.coupling.is_some() && layer.spec.kind != GateKind::TNT {
                return Err(Error::Domain(format!(
                    "coupling binding on a {} layer",
                    layer.spec.kind
                )));
            }
        }
        let dim = layers.iter().map(|l| l.slot + 1).max().unwrap_or(0);
        Ok(Self { n, prep, layers, dim })
    }

    /// `RN(π/2, 0)` then `OAT(θ1, z)`, `TNT(θ2, zx)`, `TAT(θ3, zy)`.
    pub fn twisting(n: u32, coupling: TntCoupling) -> Result<Self> {
        Self::new(
            n,
            vec![GateSpec::rn(std::f64::consts::FRAC_PI_2, 0.0)],
            vec![
                Layer { spec: GateSpec::oat(0.0, "z"), slot: 0, coupling: None },
                Layer {
                    spec: GateSpec::tnt(0.0, n as f64, "zx"),
                    slot: 1,
                    coupling: Some(coupling),
                },
                Layer { spec: GateSpec::tat(0.0, "zy"), slot: 2, coupling: None },
            ],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_noiseless(&self) -> bool {
        self.prep
            .iter()
            .chain(self.layers.iter().map(|l| &l.spec))
            .all(|g| g.noise.unwrap_or(0.0) == 0.0)
    }

    /// The concrete gate list for a parameter vector.
    pub fn gates(&self, theta: &[f64]) -> Result<Vec<GateSpec>> {
        self.check_len(theta)?;
        let mut out = self.prep.clone();
        for layer in &self.layers {
            let mut g = layer.spec.clone();
            g.params[0] = theta[layer.slot];
            if let Some(c) = layer.coupling {
                g.params[1] = c.lambda(self.n, theta[layer.slot]);
            }
            out.push(g);
        }
        Ok(out)
    }

    pub fn prepare(&self, theta: &[f64]) -> Result<CollectiveState> {
        self.gates(theta)?
            .iter()
            .try_fold(CollectiveState::ground(self.n)?, |s, g| apply_gate(&s, g))
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim {
            return Err(Error::Domain(format!(
                "ansatz takes {} parameters, got {}",
                self.dim,
                theta.len()
            )));
        }
        Ok(())
    }
}

/// `xi^2_S` of the prepared state.
pub fn cost(theta: &[f64], ansatz: &Ansatz) -> Result<f64> {
    xi2_s(&ansatz.prepare(theta)?)
}

/// Central differences of any scalar function, probes evaluated in parallel.
pub fn central_gradient<F>(f: F, theta: &[f64], eps: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("finite-difference step {eps} must be positive")));
    }
    let probes: Vec<f64> = (0..2 * theta.len())
        .into_par_iter()
        .map(|p| {
            let mut t = theta.to_vec();
            t[p / 2] += if p % 2 == 0 { eps } else { -eps };
            f(&t)
        })
        .collect::<Result<_>>()?;
    Ok(probes
        .chunks(2)
        .map(|pair| (pair[0] - pair[1]) / (2.0 * eps))
        .collect())
}

pub fn grad_findiff(theta: &[f64], ansatz: &Ansatz, eps_fd: f64) -> Result<Vec<f64>> {
    central_gradient(|t| cost(t, ansatz), theta, eps_fd)
}

pub fn gd_step(theta: &[f64], grad: &[f64], eta: f64) -> Vec<f64> {
    theta.iter().zip(grad).map(|(t, g)| t - eta * g).collect()
}

/// First and second moment accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u32,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        Self { m: vec![0.0; dim], v: vec![0.0; dim], t: 0 }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(state: &mut AdamState, theta: &[f64], grad: &[f64], config: &OptimizerConfig) -> Vec<f64> {
    state.t += 1;
    let (b1, b2) = (config.beta1, config.beta2);
    let c1 = 1.0 - b1.powi(state.t as i32);
    let c2 = 1.0 - b2.powi(state.t as i32);
    theta
        .iter()
        .zip(grad)
        .enumerate()
        .map(|(i, (t, g))| {
            state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
            state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
            let m_hat = state.m[i] / c1;
            let v_hat = state.v[i] / c2;
            t - config.learning_rate * m_hat / (v_hat.sqrt() + config.eps_adam)
        })
        .collect()
}

/// State vector of a pure collective state, phase fixed so its largest
/// component is real and positive.
pub fn pure_vector(state: &CollectiveState) -> Result<DVector<Complex64>> {
    let dim: usize = state.active().map(|(_, m)| m.nrows()).sum();
    let mut best: Option<(usize, usize, f64)> = None;
    let mut purity = 0.0;
    for (i, rho) in state.active() {
        purity += crate::linalg::trace_product(rho, rho).re;
        for k in 0..rho.nrows() {
            let p = rho[(k, k)].re;
            if best.is_none_or(|b| p > b.2) {
                best = Some((i, k, p));
            }
        }
    }
    let (block, col, p) = best.ok_or_else(|| Error::Numeric("state has no active block".into()))?;
    if (purity - 1.0).abs() > 1e-8 {
        return Err(Error::Unsupported(format!(
            "metric needs a pure state, purity is {purity}"
        )));
    }
    let mut out = DVector::zeros(dim);
    let mut offset = 0;
    for (i, rho) in state.active() {
        if i == block {
            let scale = 1.0 / p.sqrt();
            for r in 0..rho.nrows() {
                out[offset + r] = rho[(r, col)] * scale;
            }
        }
        offset += rho.nrows();
    }
    Ok(out)
}

/// `g_kl = Re[<∂_k ψ|∂_l ψ> - <∂_k ψ|ψ><ψ|∂_l ψ>]` by central differences.
pub fn fubini_study_metric(theta: &[f64], ansatz: &Ansatz, eps_fd: f64) -> Result<DMatrix<f64>> {
    if !ansatz.is_noiseless() {
        return Err(Error::Unsupported("metric needs a noiseless ansatz".into()));
    }
    if !(eps_fd > 0.0) {
        return Err(Error::Domain(format!("finite-difference step {eps_fd} must be positive")));
    }
    let psi = pure_vector(&ansatz.prepare(theta)?)?;
    let dim = theta.len();
    let shifted: Vec<DVector<Complex64>> = (0..2 * dim)
        .into_par_iter()
        .map(|p| {
            let mut t = theta.to_vec();
            t[p / 2] += if p % 2 == 0 { eps_fd } else { -eps_fd };
            let v = pure_vector(&ansatz.prepare(&t)?)?;
            if v.len() != psi.len() {
                return Err(Error::Numeric("active blocks changed under a shift".into()));
            }
            // gauge: <ψ|ψ(θ ± ε)> real and positive
            let overlap = psi.dotc(&v);
            let phase = if overlap.norm() > 0.0 { overlap.conj() / overlap.norm() } else { Complex64::new(1.0, 0.0) };
            Ok(v * phase)
        })
        .collect::<Result<_>>()?;
    let derivs: Vec<DVector<Complex64>> = (0..dim)
        .map(|k| (&shifted[2 * k] - &shifted[2 * k + 1]) / Complex64::new(2.0 * eps_fd, 0.0))
        .collect();
    let mut g = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        for l in 0..dim {
            let val = derivs[k].dotc(&derivs[l]) - derivs[k].dotc(&psi) * psi.dotc(&derivs[l]);
            g[(k, l)] = val.re;
        }
    }
    Ok((&g + g.transpose()) * 0.5)
}

/// `θ - η g⁺ ∇C`, dropping metric eigenvalues below `threshold`.
pub fn qng_step(theta: &[f64], grad: &[f64], g: &DMatrix<f64>, eta: f64, threshold: f64) -> Vec<f64> {
    let eig = g.clone().symmetric_eigen();
    let grad = DVector::from_column_slice(grad);
    let mut dir = DVector::zeros(theta.len());
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > threshold {
            let v = eig.eigenvectors.column(i);
            dir += v * (v.dot(&grad) / lam);
        }
    }
    theta.iter().zip(dir.iter()).map(|(t, d)| t - eta * d).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Gd,
    Adam,
    Qng,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Gd => "gd",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Qng => "qng",
        }
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gd" => Ok(OptimizerKind::Gd),
            "adam" => Ok(OptimizerKind::Adam),
            "qng" => Ok(OptimizerKind::Qng),
            _ => Err(Error::Parse(format!("unknown optimizer '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub max_iter: usize,
    pub tolerance: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_adam: f64,
    pub eps_fd: f64,
    pub pinv_threshold: f64,
}

impl OptimizerConfig {
    /// Per-optimizer learning rates 1e-4 (GD), 0.01 (Adam), 0.03 (QNG).
    pub fn new(kind: OptimizerKind) -> Self {
        let learning_rate = match kind {
            OptimizerKind::Gd => 1e-4,
            OptimizerKind::Adam => 0.01,
            OptimizerKind::Qng => 0.03,
        };
        Self {
            kind,
            learning_rate,
            max_iter: 200,
            tolerance: 1e-19,
            beta1: 0.8,
            beta2: 0.999,
            eps_adam: 1e-10,
            eps_fd: 1e-5,
            pinv_threshold: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::Domain("learning rate must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Domain("max_iter must be at least 1".into()));
        }
        if !(self.eps_fd > 0.0) {
            return Err(Error::Domain("finite-difference step must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Domain("Adam betas must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct FitResult {
    pub theta_star: Vec<f64>,
    /// Cost at the start and after every completed step.
    pub cost_history: Vec<f64>,
    /// Parameters matching each `cost_history` entry.
    pub theta_history: Vec<Vec<f64>>,
    /// Wall seconds per entry; the initial evaluation is entry 0.
    pub iteration_times: Vec<f64>,
    pub converged: bool,
    /// Set when a cost evaluation failed; the history stops before it.
    pub aborted: Option<Error>,
}

impl FitResult {
    pub fn final_cost(&self) -> f64 {
        *self.cost_history.last().expect("history starts with the initial cost")
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let dim = self.theta_star.len();
        let names: Vec<String> = (1..=dim).map(|i| format!("theta{i}")).collect();
        writeln!(out, "iteration,cost,wall_seconds,{}", names.join(","))?;
        for (i, ((c, t), th)) in self
            .cost_history
            .iter()
            .zip(&self.iteration_times)
            .zip(&self.theta_history)
            .enumerate()
        {
            let th: Vec<String> = th.iter().map(|x| crate::measurement::fmt_float(*x)).collect();
            writeln!(
                out,
                "{i},{},{},{}",
                crate::measurement::fmt_float(*c),
                crate::measurement::fmt_float(*t),
                th.join(",")
            )?;
        }
        Ok(())
    }
}

/// Uniform draw in `[0, 0.2)` per parameter.
pub fn random_init(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.random_range(0.0..0.2)).collect()
}

/// Minimize the cost until `max_iter` steps or `|ΔC| < tolerance`.
pub fn fit(ansatz: &Ansatz, config: &OptimizerConfig, init: &[f64]) -> Result<FitResult> {
    config.validate()?;
    ansatz.check_len(init)?;
    if config.kind == OptimizerKind::Qng && !ansatz.is_noiseless() {
        return Err(Error::Unsupported("QNG needs a noiseless ansatz".into()));
    }
    let start = Instant::now();
    let mut theta = init.to_vec();
    let mut result = FitResult {
        theta_star: theta.clone(),
        cost_history: vec![cost(&theta, ansatz)?],
        theta_history: vec![theta.clone()],
        iteration_times: vec![start.elapsed().as_secs_f64()],
        converged: false,
        aborted: None,
    };
    let mut adam = AdamState::new(theta.len());
    for _ in 0..config.max_iter {
        let clock = Instant::now();
        let step = (|| -> Result<(Vec<f64>, f64)> {
            let grad = grad_findiff(&theta, ansatz, config.eps_fd)?;
            let next = match config.kind {
                OptimizerKind::Gd => gd_step(&theta, &grad, config.learning_rate),
                OptimizerKind::Adam => adam_step(&mut adam, &theta, &grad, config),
                OptimizerKind::Qng => {
                    let g = fubini_study_metric(&theta, ansatz, config.eps_fd)?;
                    qng_step(&theta, &grad, &g, config.learning_rate, config.pinv_threshold)
                }
            };
            let c = cost(&next, ansatz)?;
            Ok((next, c))
        })();
        match step {
            Ok((next, c)) => {
                let prev = result.final_cost();
                theta = next;
                result.cost_history.push(c);
                result.theta_history.push(theta.clone());
                result.iteration_times.push(clock.elapsed().as_secs_f64());
                result.theta_star = theta.clone();
                if (c - prev).abs() < config.tolerance {
                    result.converged = true;
                    break;
                }
            }
            Err(e) => {
                result.aborted = Some(e);
                break;
            }
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_parameters_leave_a_coherent_state() {
        let a = Ansatz::twisting(20, TntCoupling::AppendixOmega).unwrap();
        assert!((cost(&[0.0; 3], &a).unwrap() - 1.0).abs() < 1e-10);
        assert!(cost(&[0.0; 2], &a).is_err());
    }

    #[test]
    fn table1_reading_rejects_zero_coupling() {
        let a = Ansatz::twisting(10, TntCoupling::Table1).unwrap();
        assert!(matches!(cost(&[0.1, 0.0, 0.1], &a), Err(Error::Domain(_))));
        let gates = a.gates(&[0.1, 0.3, 0.2]).unwrap();
        assert_eq!(gates[2].params, vec![0.3, 0.3]);
    }

    #[test]
    fn quadratic_gradient() {
        let f = |t: &[f64]| Ok(t.iter().map(|x| x * x).sum::<f64>());
        let g = central_gradient(f, &[0.3, -1.2, 2.0], 1e-4).unwrap();
        for (a, b) in g.iter().zip([0.6, -2.4, 4.0]) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(central_gradient(f, &[1.0], 0.0).is_err());
    }

    #[test]
    fn gradient_step_arithmetic() {
        assert!((gd_step(&[1.0], &[2.0], 0.1)[0] - 0.8).abs() < 1e-15);
        assert_eq!(gd_step(&[0.4, 0.5], &[0.0, 0.0], 0.3), vec![0.4, 0.5]);
        let mut t = vec![1.0];
        for _ in 0..2 {
            let g = [2.0 * t[0]];
            t = gd_step(&t, &g, 0.1);
        }
        assert!((t[0] - 0.64).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_is_signed_learning_rate() {
        let cfg = OptimizerConfig::new(OptimizerKind::Adam);
        assert_eq!((cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps_adam), (0.01, 0.8, 0.999, 1e-10));
        let mut s = AdamState::new(2);
        let next = adam_step(&mut s, &[0.5, 0.5], &[3.0, -0.2], &cfg);
        assert!((next[0] - 0.49).abs() < 1e-9);
        assert!((next[1] - 0.51).abs() < 1e-9);
        let mut s = AdamState::new(1);
        let mut t = vec![0.7];
        for _ in 0..10 {
            t = adam_step(&mut s, &t, &[0.0], &cfg);
        }
        assert_eq!(t, vec![0.7]);
    }

    #[test]
    fn rotation_metric_is_jz_variance() {
        let n = 4;
        let a = Ansatz::new(
            n,
            vec![GateSpec::rn(-std::f64::consts::FRAC_PI_2, 0.0)],
            vec![Layer { spec: GateSpec::rz(0.0), slot: 0, coupling: None }],
        )
        .unwrap();
        for theta in [0.0, 0.7] {
            let g = fubini_study_metric(&[theta], &a, 1e-5).unwrap();
            assert!((g[(0, 0)] - n as f64 / 4.0).abs() < 1e-6);
        }
    }

    #[test]
    fn metric_is_symmetric_psd() {
        let a = Ansatz::twisting(30, TntCoupling::AppendixOmega).unwrap();
        let g = fubini_study_metric(&[0.05, 0.1, -0.02], &a, 1e-5).unwrap();
        assert!((&g - g.transpose()).amax() < 1e-8);
        assert!(g.symmetric_eigen().eigenvalues.min() > -1e-8);
    }

    #[test]
    fn metric_refuses_noisy_ansatz() {
        let a = Ansatz::new(
            4,
            vec![GateSpec::rn(1.0, 0.0).with_noise(0.1)],
            vec![Layer { spec: GateSpec::rz(0.0), slot: 0, coupling: None }],
        )
        .unwrap();
        assert!(matches!(fubini_study_metric(&[0.1], &a, 1e-5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn natural_gradient_steps() {
        let id = DMatrix::identity(3, 3);
        let (t, g) = ([0.1, 0.2, 0.3], [1.0, -2.0, 0.5]);
        assert_eq!(qng_step(&t, &g, &id, 0.1, 1e-10), gd_step(&t, &g, 0.1));
        let half = qng_step(&t, &g, &(&id * 2.0), 0.1, 1e-10);
        for ((h, full), t0) in half.iter().zip(gd_step(&t, &g, 0.1)).zip(t) {
            assert!(((h - t0) - 0.5 * (full - t0)).abs() < 1e-15);
        }
        let singular = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 1.0]));
        assert_eq!(qng_step(&t, &g, &singular, 0.1, 1e-10)[1], 0.2);
    }

    #[test]
    fn fits_are_deterministic() {
        let a = Ansatz::twisting(12, TntCoupling::AppendixOmega).unwrap();
        let mut cfg = OptimizerConfig::new(OptimizerKind::Adam);
        cfg.max_iter = 5;
        let init = random_init(3, 9);
        let r1 = fit(&a, &cfg, &init).unwrap();
        let r2 = fit(&a, &cfg, &init).unwrap();
        assert_eq!(r1.cost_history, r2.cost_history);
        assert_eq!(r1.cost_history.len(), 6);
        cfg.max_iter = 1;
        assert_eq!(fit(&a, &cfg, &init).unwrap().cost_history.len(), 2);
    }
}
