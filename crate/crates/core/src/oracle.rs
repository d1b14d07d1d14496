//! Brute-force reference simulator on the full `2^N` product space.
//!
//! Everything here is rebuilt from single-particle Pauli algebra: collective
//! operators by bit manipulation, gates by a dense Padé exponential, noise
//! by summing per-particle conjugations. Only the squeezing formula applied
//! to the final moments is shared with the collective engine.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::basis::BlockLedger;
use crate::error::{Error, Result};
use crate::gates::{Circuit, GateKind, GateSpec};
use crate::measurement::probabilities;
use crate::operator::Axis;
use crate::squeezing::{squeezing_from_moments, Moments, Squeezing};
use crate::state::CollectiveState;

/// Largest register the oracle accepts.
pub const MAX_PARTICLES: u32 = 8;

/// Eigenvalues of `J^2` closer than this belong to the same `j`.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;

/// Below this `|<J>|` squeezing values are too ill-conditioned to compare.
pub const COMPARE_FRAME_FLOOR: f64 = 1e-6;

type Dense = DMatrix<Complex64>;

fn check_cap(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("oracle needs at least one particle".into()));
    }
    if n > MAX_PARTICLES {
        return Err(Error::Resource(format!(
            "oracle is capped at {MAX_PARTICLES} particles, got {n}"
        )));
    }
    Ok(())
}

/// Collective spin operators on the product space. Bit `n` of a basis
/// index set means particle `n` is up.
#[derive(Debug, Clone)]
pub struct FullOps {
    pub n: u32,
    pub jx: Dense,
    pub jy: Dense,
    pub jz: Dense,
    pub jplus: Dense,
    pub jminus: Dense,
}

impl FullOps {
    pub fn axis(&self, a: Axis) -> &Dense {
        match a {
            Axis::X => &self.jx,
            Axis::Y => &self.jy,
            Axis::Z => &self.jz,
            Axis::Plus => &self.jplus,
            Axis::Minus => &self.jminus,
        }
    }

    pub fn j_squared(&self) -> Dense {
        &self.jx * &self.jx + &self.jy * &self.jy + &self.jz * &self.jz
    }
}

pub fn full_collective_ops(n: u32) -> Result<FullOps> {
    check_cap(n)?;
    let dim = 1usize << n;
    let mut jz = Dense::zeros(dim, dim);
    let mut jplus = Dense::zeros(dim, dim);
    for a in 0..dim {
        let ups = a.count_ones() as f64;
        jz[(a, a)] = Complex64::new(ups - n as f64 / 2.0, 0.0);
        for bit in 0..n {
            let mask = 1usize << bit;
            if a & mask == 0 {
                jplus[(a | mask, a)] = Complex64::new(1.0, 0.0);
            }
        }
    }
    let jminus = jplus.adjoint();
    let jx = (&jplus + &jminus).scale(0.5);
    let jy = (&jplus - &jminus) * Complex64::new(0.0, -0.5);
    Ok(FullOps { n, jx, jy, jz, jplus, jminus })
}

/// Eigenprojectors of `J^2`; combined with the diagonal `J_z` projectors
/// they give `Π_{j,m}`.
#[derive(Debug, Clone)]
pub struct JmProjectorSet {
    pub n: u32,
    /// `(2j, P_j)` in descending `j`.
    pub j_projectors: Vec<(u32, Dense)>,
}

impl JmProjectorSet {
    /// `Π_{j,m} = P_j P_m` with `P_m` the diagonal projector onto `m`.
    pub fn projector(&self, two_j: u32, two_m: i64) -> Option<Dense> {
        let (_, pj) = self.j_projectors.iter().find(|(t, _)| *t == two_j)?;
        let mut out = pj.clone();
        for col in 0..out.ncols() {
            if twice_m(self.n, col) != two_m {
                out.column_mut(col).fill(Complex64::new(0.0, 0.0));
            }
        }
        Some(out)
    }

    /// Every nonzero `(2j, 2m)` label, descending `j` then `m`.
    pub fn labels(&self) -> Vec<(u32, i64)> {
        self.j_projectors
            .iter()
            .flat_map(|(two_j, _)| {
                let tj = *two_j as i64;
                (0..=tj).map(move |k| (*two_j, tj - 2 * k))
            })
            .collect()
    }
}

fn twice_m(n: u32, index: usize) -> i64 {
    2 * index.count_ones() as i64 - n as i64
}

pub fn jm_projectors(n: u32) -> Result<JmProjectorSet> {
    let ops = full_collective_ops(n)?;
    // J^2 is real in the product basis
    let j2 = ops.j_squared().map(|z| z.re);
    let eig = j2.symmetric_eigen();
    let mut groups: Vec<(u32, Vec<usize>)> = Vec::new();
    for (col, &lam) in eig.eigenvalues.iter().enumerate() {
        let j = (-1.0 + (1.0 + 4.0 * lam.max(0.0)).sqrt()) / 2.0;
        let two_j = (2.0 * j).round();
        let jr = two_j / 2.0;
        if two_j < 0.0 || (jr * (jr + 1.0) - lam).abs() > CLUSTER_TOLERANCE {
            return Err(Error::Numeric(format!(
                "J^2 eigenvalue {lam} does not match any j(j+1)"
            )));
        }
        let two_j = two_j as u32;
        match groups.iter_mut().find(|(t, _)| *t == two_j) {
            Some((_, cols)) => cols.push(col),
            None => groups.push((two_j, vec![col])),
        }
    }
    groups.sort_by_key(|g| std::cmp::Reverse(g.0));
    let dim = 1usize << n;
    let j_projectors = groups
        .into_iter()
        .map(|(two_j, cols)| {
            let mut p = DMatrix::<f64>::zeros(dim, dim);
            for c in cols {
                let v = eig.eigenvectors.column(c);
                p += v * v.transpose();
            }
            (two_j, p.map(|x| Complex64::new(x, 0.0)))
        })
        .collect();
    Ok(JmProjectorSet { n, j_projectors })
}

/// Density matrix on the full product space.
#[derive(Debug, Clone)]
pub struct FullState {
    pub n: u32,
    pub rho: Dense,
}

impl FullState {
    /// All particles down.
    pub fn ground(n: u32) -> Result<Self> {
        check_cap(n)?;
        let dim = 1usize << n;
        let mut rho = Dense::zeros(dim, dim);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        Ok(Self { n, rho })
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// Trace, Hermiticity and smallest eigenvalue.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::Numeric(format!("full-space trace {tr}")));
        }
        let defect = (&self.rho - self.rho.adjoint())
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        if defect > tol {
            return Err(Error::Numeric(format!("full-space Hermiticity defect {defect:e}")));
        }
        let herm = (&self.rho + self.rho.adjoint()).scale(0.5);
        let min = herm.symmetric_eigen().eigenvalues.min();
        if min < -tol {
            return Err(Error::Numeric(format!("full-space eigenvalue {min:e}")));
        }
        Ok(())
    }
}

/// Generator and angle for a catalog gate built from full-space operators.
pub fn full_generator(spec: &GateSpec, ops: &FullOps) -> Result<(Dense, f64)> {
    spec.validate()?;
    let n = ops.n as f64;
    let theta = spec.params[0];
    let sq = |a: Axis| ops.axis(a) * ops.axis(a);
    let g = match spec.kind {
        GateKind::RX => ops.jx.clone(),
        GateKind::RY => ops.jy.clone(),
        GateKind::RZ => ops.jz.clone(),
        GateKind::RPlus => ops.jplus.clone(),
        GateKind::RMinus => ops.jminus.clone(),
        GateKind::RN => {
            // exp[iθ(Jx sin φ − Jy cos φ)]
            let phi = spec.params[1];
            (ops.jx.scale(phi.sin()) - ops.jy.scale(phi.cos())).scale(-1.0)
        }
        GateKind::RX2 => sq(Axis::X),
        GateKind::RY2 => sq(Axis::Y),
        GateKind::RZ2 => sq(Axis::Z),
        GateKind::OAT => sq(spec.parsed_axes()?[0]),
        GateKind::TAT => {
            let a = spec.parsed_axes()?;
            sq(a[0]) - sq(a[1])
        }
        GateKind::TNT => {
            let a = spec.parsed_axes()?;
            sq(a[0]) - ops.axis(a[1]).scale(n / spec.params[1])
        }
        GateKind::GMS => {
            let phi = spec.params[1];
            let m = ops.jx.scale(phi.cos()) + ops.jy.scale(phi.sin());
            &m * &m
        }
    };
    Ok((g, theta))
}

/// `sum_n sum_α s_α ρ s_α` with `s = σ/2` on particle `n`.
pub fn full_rho_prime(state: &FullState) -> Dense {
    let dim = state.rho.nrows();
    let rho = &state.rho;
    Dense::from_fn(dim, dim, |a, b| {
        let mut acc = Complex64::new(0.0, 0.0);
        for bit in 0..state.n {
            let mask = 1usize << bit;
            let sa = if a & mask != 0 { 1.0 } else { -1.0 };
            let sb = if b & mask != 0 { 1.0 } else { -1.0 };
            let flipped = rho[(a ^ mask, b ^ mask)];
            // X ρ X, Y ρ Y and Z ρ Z element by element
            acc += flipped + flipped * (sa * sb) + rho[(a, b)] * (sa * sb);
        }
        acc * 0.25
    })
}

pub fn full_depolarize(state: &FullState, epsilon: f64) -> Result<FullState> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Domain(format!("noise probability {epsilon} outside [0, 1]")));
    }
    let prime = full_rho_prime(state);
    let tr = prime.trace().re;
    if tr <= 0.0 {
        return Err(Error::Numeric("depolarized trace vanished".into()));
    }
    Ok(FullState {
        n: state.n,
        rho: state.rho.scale(1.0 - epsilon) + prime.scale(epsilon / tr),
    })
}

pub fn full_apply_gate(state: &FullState, spec: &GateSpec, ops: &FullOps) -> Result<FullState> {
    let (g, theta) = full_generator(spec, ops)?;
    let k = (g * Complex64::new(0.0, -theta)).exp();
    if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric(format!("{} exponential overflowed", spec.kind)));
    }
    let mut rho = &k * &state.rho * k.adjoint();
    if !spec.is_unitary() {
        let tr = rho.trace().re;
        if tr <= 0.0 {
            return Err(Error::Numeric(format!("{} annihilated the state", spec.kind)));
        }
        rho /= Complex64::new(tr, 0.0);
    }
    let out = FullState { n: state.n, rho };
    match spec.noise {
        Some(eps) if eps > 0.0 => full_depolarize(&out, eps),
        _ => Ok(out),
    }
}

/// Replay a circuit from the all-down state.
pub fn full_run(circuit: &Circuit) -> Result<FullState> {
    circuit.validate()?;
    let ops = full_collective_ops(circuit.n)?;
    circuit
        .gates
        .iter()
        .try_fold(FullState::ground(circuit.n)?, |s, g| full_apply_gate(&s, g, &ops))
}

/// The quantities compared between the two simulators.
#[derive(Debug, Clone)]
pub struct Observables {
    pub n: u32,
    /// `(2j, 2m, P)` over every block of the ledger, zeros included.
    pub probabilities: Vec<(u32, i64, f64)>,
    pub moments: Moments,
    /// `None` where the mean-spin frame is undefined.
    pub squeezing: Option<Squeezing>,
}

impl Observables {
    pub fn mean(&self) -> [f64; 3] {
        self.moments.mean
    }

    /// `<J_x^2>, <J_y^2>, <J_z^2>`.
    pub fn squares(&self) -> [f64; 3] {
        let s = self.moments.second;
        [s[0][0], s[1][1], s[2][2]]
    }

    /// Collective-engine side of the comparison.
    pub fn of_collective(state: &CollectiveState) -> Result<Self> {
        let table = probabilities(state)?;
        let ledger = state.ledger();
        let probabilities = all_labels(ledger)
            .into_iter()
            .map(|(tj, tm)| (tj, tm, table.get(tj, tm)))
            .collect();
        let moments = Moments::of(state);
        Ok(Self {
            n: state.n_particles(),
            probabilities,
            squeezing: squeezing_from_moments(state.n_particles(), &moments).ok(),
            moments,
        })
    }

    /// Largest absolute difference over probabilities, first and second
    /// moments and `xi^2_S` (when both frames are well defined).
    pub fn max_deviation(&self, other: &Observables) -> f64 {
        let mut dev = 0.0f64;
        for (a, b) in self.probabilities.iter().zip(&other.probabilities) {
            debug_assert_eq!((a.0, a.1), (b.0, b.1));
            dev = dev.max((a.2 - b.2).abs());
        }
        for i in 0..3 {
            dev = dev.max((self.moments.mean[i] - other.moments.mean[i]).abs());
            for k in 0..3 {
                dev = dev.max((self.moments.second[i][k] - other.moments.second[i][k]).abs());
            }
        }
        if let (Some(a), Some(b)) = (&self.squeezing, &other.squeezing) {
            if a.frame.j_norm > COMPARE_FRAME_FLOOR && b.frame.j_norm > COMPARE_FRAME_FLOOR {
                dev = dev.max((a.xi2_s - b.xi2_s).abs());
            }
        }
        dev
    }
}

fn all_labels(ledger: &BlockLedger) -> Vec<(u32, i64)> {
    ledger
        .blocks()
        .iter()
        .flat_map(|b| {
            let tj = b.two_j as i64;
            (0..=tj).map(move |k| (b.two_j, tj - 2 * k))
        })
        .collect()
}

/// Measure a full-space state directly.
pub fn extract_collective(full: &FullState, projectors: &JmProjectorSet) -> Result<Observables> {
    let n = full.n;
    let ops = full_collective_ops(n)?;
    let ledger = BlockLedger::new(n)?;
    let mut probabilities = Vec::new();
    for (two_j, pj) in &projectors.j_projectors {
        let rp = &full.rho * pj;
        let tj = *two_j as i64;
        for k in 0..=tj {
            let two_m = tj - 2 * k;
            let p: f64 = (0..rp.nrows())
                .filter(|&a| twice_m(n, a) == two_m)
                .map(|a| rp[(a, a)].re)
                .sum();
            probabilities.push((*two_j, two_m, p));
        }
    }
    if probabilities.len() != all_labels(&ledger).len() {
        return Err(Error::Numeric("projector set does not cover the ledger".into()));
    }
    let cart = [&ops.jx, &ops.jy, &ops.jz];
    let mut moments = Moments {
        mean: [0.0; 3],
        second: [[0.0; 3]; 3],
    };
    for a in 0..3 {
        let ra = &full.rho * cart[a];
        moments.mean[a] = ra.trace().re;
        for b in 0..3 {
            moments.second[a][b] = (&ra * cart[b]).trace().re;
        }
    }
    Ok(Observables {
        n,
        probabilities,
        squeezing: squeezing_from_moments(n, &moments).ok(),
        moments,
    })
}

/// Run a circuit through both simulators and return the largest deviation.
pub fn cross_check(circuit: &Circuit) -> Result<f64> {
    check_cap(circuit.n)?;
    let full = full_run(circuit)?;
    let projectors = jm_projectors(circuit.n)?;
    let reference = extract_collective(&full, &projectors)?;
    let engine = Observables::of_collective(&circuit.run()?)?;
    Ok(reference.max_deviation(&engine))
}

/// Random catalog circuit for cross-checking: kinds uniform over the
/// catalog, angles uniform in `[-π, π]`, twisting axes drawn from distinct
/// Cartesian pairs, TNT coupling `Λ = ±N·u` with `u` in `[0.5, 2]`.
pub fn random_circuit<R: Rng + ?Sized>(n: u32, len: usize, noise: f64, rng: &mut R) -> Circuit {
    use std::f64::consts::PI;
    const LABELS: [&str; 3] = ["x", "y", "z"];
    let mut circuit = Circuit::new(n);
    for _ in 0..len {
        let kind = GateKind::ALL[rng.random_range(0..GateKind::ALL.len())];
        let theta = rng.random_range(-PI..=PI);
        let pair = |rng: &mut R| {
            let a = rng.random_range(0..3);
            let b = (a + rng.random_range(1..3)) % 3;
            format!("{}{}", LABELS[a], LABELS[b])
        };
        let mut spec = match kind {
            GateKind::RN | GateKind::GMS => GateSpec::new(kind, &[theta, rng.random_range(0.0..2.0 * PI)]),
            GateKind::OAT => GateSpec::oat(theta, LABELS[rng.random_range(0..3)]),
            GateKind::TAT => GateSpec::tat(theta, &pair(rng)),
            GateKind::TNT => {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                let lambda = sign * n as f64 * rng.random_range(0.5..=2.0);
                GateSpec::tnt(theta, lambda, &pair(rng))
            }
            _ => GateSpec::new(kind, &[theta]),
        };
        if noise > 0.0 {
            spec = spec.with_noise(noise);
        }
        circuit.push(spec);
    }
    circuit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::degeneracy;
    use num_traits::ToPrimitive;
    use std::f64::consts::PI;

    fn max_abs(m: &Dense) -> f64 {
        m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    #[test]
    fn single_particle_jz() {
        let ops = full_collective_ops(1).unwrap();
        assert_eq!(ops.jz[(0, 0)].re, -0.5);
        assert_eq!(ops.jz[(1, 1)].re, 0.5);
    }

    #[test]
    fn commutators() {
        for n in 1..=4 {
            let o = full_collective_ops(n).unwrap();
            let c = &o.jx * &o.jy - &o.jy * &o.jx - o.jz.clone() * Complex64::new(0.0, 1.0);
            assert!(max_abs(&c) < 1e-14);
        }
    }

    #[test]
    fn pair_spectrum() {
        let o = full_collective_ops(2).unwrap();
        let mut e: Vec<f64> = o.j_squared().map(|z| z.re).symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip([0.0, 2.0, 2.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn projector_invariants() {
        for n in 1..=6u32 {
            let set = jm_projectors(n).unwrap();
            let dim = 1usize << n;
            let mut sum = Dense::zeros(dim, dim);
            for (tj, tm) in set.labels() {
                let p = set.projector(tj, tm).unwrap();
                assert!(max_abs(&(&p * &p - &p)) < 1e-10);
                assert!(max_abs(&(&p - p.adjoint())) < 1e-10);
                let d = degeneracy(n, tj).unwrap().to_f64().unwrap();
                assert!((p.trace().re - d).abs() < 1e-10, "n={n} 2j={tj}");
                sum += p;
            }
            assert!(max_abs(&(sum - Dense::identity(dim, dim))) < 1e-10);
        }
        let four = jm_projectors(4).unwrap();
        assert!((four.projector(2, 0).unwrap().trace().re - 3.0).abs() < 1e-10);
    }

    #[test]
    fn over_cap_is_a_resource_error() {
        assert!(matches!(full_collective_ops(9), Err(Error::Resource(_))));
        assert!(matches!(FullState::ground(12), Err(Error::Resource(_))));
    }

    #[test]
    fn basic_runs() {
        let empty = full_run(&Circuit::new(3)).unwrap();
        assert_eq!(empty.rho[(0, 0)].re, 1.0);

        let mut c = Circuit::new(3);
        c.push(GateSpec::rn(PI, 0.0));
        let up = full_run(&c).unwrap();
        assert!((up.rho[(7, 7)].re - 1.0).abs() < 1e-12);

        let mut c = Circuit::new(2);
        c.push(GateSpec::rz(0.0).with_noise(1.0));
        let mixed = full_run(&c).unwrap();
        let obs = extract_collective(&mixed, &jm_projectors(2).unwrap()).unwrap();
        for (tj, tm, p) in &obs.probabilities {
            if (*tj, *tm) != (2, 2) {
                assert!((p - 1.0 / 3.0).abs() < 1e-12);
            }
        }
        mixed.check_invariants(1e-10).unwrap();
    }

    #[test]
    fn extracted_reference_states() {
        let n = 4;
        let set = jm_projectors(n).unwrap();
        let mut c = Circuit::new(n);
        c.push(GateSpec::rn(-PI / 2.0, 0.3));
        let css = extract_collective(&full_run(&c).unwrap(), &set).unwrap();
        assert!(css.mean()[2].abs() < 1e-10);
        assert!((css.squeezing.unwrap().xi2_s - 1.0).abs() < 1e-10);

        let mut c = Circuit::new(n);
        c.push(GateSpec::gms(PI / 2.0, 0.0));
        let ghz = extract_collective(&full_run(&c).unwrap(), &set).unwrap();
        assert!(ghz.mean()[2].abs() < 1e-10);
        for tm in [4, -4] {
            let p = ghz.probabilities.iter().find(|e| (e.0, e.1) == (4, tm)).unwrap().2;
            assert!((p - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn engine_matches_on_mixed_circuit() {
        let mut c = Circuit::new(5);
        c.push(GateSpec::rn(-1.1, 0.4))
            .push(GateSpec::oat(0.7, "z").with_noise(0.3))
            .push(GateSpec::tnt(0.5, 2.0, "xz"))
            .push(GateSpec::new(GateKind::RPlus, &[0.4]).with_noise(0.05))
            .push(GateSpec::gms(0.9, 1.3));
        assert!(cross_check(&c).unwrap() < 1e-10);
    }

    #[test]
    fn random_circuits_agree() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in 2..=4 {
            for eps in [0.0, 0.3] {
                for _ in 0..5 {
                    let c = random_circuit(n, 5, eps, &mut rng);
                    let dev = cross_check(&c).unwrap();
                    assert!(dev < 1e-8, "{dev:e} for {}", c.to_json());
                }
            }
        }
    }
}
