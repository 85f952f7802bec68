//! Outcome distribution of quantum phase estimation with a `p`-qubit phase
//! register, computed two independent ways:
//!
//! * [`exact_distribution`] mixes the Fourier overlap kernel over a known set
//!   of eigenphases and weights;
//! * [`circuit_distribution`] runs the circuit on a joint state vector
//!   (Hadamards, controlled powers from repeated squaring, gate-level inverse
//!   QFT) and reads off the first-register marginal.
//!
//! The kernel is `sin²(PΔ/2) / (P² sin²(Δ/2))` with `Δ = θ − ω`. This is
//! `|<F_P(ω)|F_P(θ)>|²` for the Fourier vectors
//! `|F_P(ω)> = P^{-1/2} Σ_j e^{iωj} |j>`, and is what the circuit produces;
//! the variant without the halved arguments does not sum to one over the
//! grid.

use std::f64::consts::{PI, TAU};

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, C64, CROSS_MODE_TOL, ZERO};

/// Largest phase register accepted by the circuit engine.
pub const MAX_CIRCUIT_QUBITS: u32 = 12;
/// Largest joint state (register size times system dimension) the circuit engine allocates.
pub const MAX_CIRCUIT_AMPLITUDES: usize = 1 << 22;
/// Largest phase register accepted by the analytic engine.
pub const MAX_ANALYTIC_QUBITS: u32 = 24;

const SINGULARITY_TOL: f64 = 1e-13;

/// Lower bound on the probability of landing on one of the two grid
/// neighbours of the true phase.
pub const GOOD_ESTIMATE_BOUND: f64 = 8.0 / (PI * PI);

/// Number of grid points for a `p`-qubit register.
pub fn grid_size(p: u32) -> usize {
    1usize << p
}

/// Grid phase `2πm/P`.
pub fn grid_phase(m: usize, grid: usize) -> f64 {
    TAU * m as f64 / grid as f64
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Probability that phase estimation with `grid` points reports `omega` when
/// the true eigenphase is `theta`.
pub fn fourier_kernel(theta: f64, omega: f64, grid: usize) -> f64 {
    let delta = wrap_phase(theta - omega);
    if delta < SINGULARITY_TOL || TAU - delta < SINGULARITY_TOL {
        return 1.0;
    }
    let p = grid as f64;
    let num = (p * delta / 2.0).sin();
    let den = p * (delta / 2.0).sin();
    ((num * num) / (den * den)).clamp(0.0, 1.0)
}

/// Grid indices just below and just above `theta` (equal when `theta` is on the grid).
pub fn grid_neighbors(theta: f64, grid: usize) -> (usize, usize) {
    let scaled = wrap_phase(theta) * grid as f64 / TAU;
    let nearest = scaled.round();
    if (scaled - nearest).abs() < 1e-9 {
        let m = nearest as usize % grid;
        return (m, m);
    }
    let below = scaled.floor() as usize % grid;
    (below, (below + 1) % grid)
}

/// Kernel mass on the grid neighbours of `theta`.
pub fn good_estimate_mass(theta: f64, grid: usize) -> f64 {
    let (lo, hi) = grid_neighbors(theta, grid);
    let mass = fourier_kernel(theta, grid_phase(lo, grid), grid);
    if lo == hi {
        mass
    } else {
        mass + fourier_kernel(theta, grid_phase(hi, grid), grid)
    }
}

/// Eigenphases of an operator together with the weight the input state puts
/// on each eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenphaseMixture {
    components: Vec<(f64, f64)>,
}

impl EigenphaseMixture {
    /// Phases are wrapped to `[0, 2π)`; weights must be non-negative and sum to one.
    pub fn new(components: Vec<(f64, f64)>) -> Result<Self> {
        if components.is_empty() {
            return invalid("an eigenphase mixture needs at least one component");
        }
        if components.iter().any(|&(phase, w)| !phase.is_finite() || !w.is_finite() || w < -1e-15) {
            return invalid("eigenphase weights must be finite and non-negative");
        }
        let total: f64 = components.iter().map(|c| c.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("eigenphase weights sum to {total}, expected 1"));
        }
        Ok(Self { components: components.into_iter().map(|(p, w)| (wrap_phase(p), w.max(0.0))).collect() })
    }

    pub fn single(phase: f64) -> Self {
        Self { components: vec![(wrap_phase(phase), 1.0)] }
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    /// Combines components whose phases agree within `tol` (modulo 2π),
    /// keeping first-seen order.
    pub fn merged(&self, tol: f64) -> Self {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for &(phase, w) in &self.components {
            let same = |q: f64| {
                let d = wrap_phase(phase - q);
                d < tol || TAU - d < tol
            };
            match out.iter_mut().find(|(q, _)| same(*q)) {
                Some(slot) => slot.1 += w,
                None => out.push((phase, w)),
            }
        }
        Self { components: out }
    }
}

/// Probability mass over the phase grid `{2πm/P : 0 <= m < P}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDistribution {
    p: u32,
    mass: Vec<f64>,
}

impl PhaseDistribution {
    pub fn from_masses(p: u32, mut mass: Vec<f64>) -> Result<Self> {
        if mass.len() != grid_size(p) {
            return invalid(format!("expected {} masses for p = {p}, got {}", grid_size(p), mass.len()));
        }
        if mass.iter().any(|m| !m.is_finite() || *m < -1e-14) {
            return invalid("phase masses must be finite and non-negative");
        }
        for m in &mut mass {
            *m = m.max(0.0);
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return invalid(format!("phase masses sum to {total}, expected 1"));
        }
        Ok(Self { p, mass })
    }

    pub fn qubits(&self) -> u32 {
        self.p
    }

    pub fn grid_size(&self) -> usize {
        self.mass.len()
    }

    pub fn omega(&self, m: usize) -> f64 {
        grid_phase(m, self.grid_size())
    }

    pub fn mass(&self, m: usize) -> f64 {
        self.mass[m]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Index of the single grid point carrying (numerically) all the mass.
    pub fn point_mass(&self, tol: f64) -> Option<usize> {
        self.mass.iter().position(|&m| (m - 1.0).abs() <= tol)
    }

    /// Total-variation distance; `1` when the grids differ.
    pub fn total_variation(&self, other: &Self) -> f64 {
        if self.p != other.p {
            return 1.0;
        }
        0.5 * self.mass.iter().zip(&other.mass).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

/// `mass(ω) = Σ_j w_j · kernel(θ_j, ω)`.
pub fn exact_distribution(mix: &EigenphaseMixture, p: u32) -> Result<PhaseDistribution> {
    if p > MAX_ANALYTIC_QUBITS {
        return Err(Error::ResourceLimit(format!("p = {p} exceeds the analytic limit {MAX_ANALYTIC_QUBITS}")));
    }
    let grid = grid_size(p);
    let mass = (0..grid)
        .map(|m| {
            let omega = grid_phase(m, grid);
            mix.components().iter().map(|&(theta, w)| w * fourier_kernel(theta, omega, grid)).sum()
        })
        .collect();
    PhaseDistribution::from_masses(p, mass)
}

/// Simulates the phase-estimation circuit for `u` acting on `psi` and
/// returns the measurement distribution of the phase register.
pub fn circuit_distribution(u: &ComplexMatrix, psi: &ComplexVector, p: u32) -> Result<PhaseDistribution> {
    if p > MAX_CIRCUIT_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "circuit mode supports at most {MAX_CIRCUIT_QUBITS} register qubits, got {p}"
        )));
    }
    let defect = u.unitarity_defect()?;
    if defect > CROSS_MODE_TOL {
        return invalid(format!("operator is not unitary (defect {defect:.3e})"));
    }
    if u.rows() != psi.dim() {
        return invalid(format!("state dimension {} does not match operator dimension {}", psi.dim(), u.rows()));
    }
    if (psi.norm() - 1.0).abs() > CROSS_MODE_TOL {
        return invalid(format!("input state has norm {}, expected 1", psi.norm()));
    }
    let grid = grid_size(p);
    let dim = psi.dim();
    if grid.saturating_mul(dim) > MAX_CIRCUIT_AMPLITUDES {
        return Err(Error::ResourceLimit(format!(
            "joint state of {grid} x {dim} amplitudes exceeds {MAX_CIRCUIT_AMPLITUDES}"
        )));
    }

    let mut reg = Register::new(p, psi);
    for bit in 0..p {
        reg.hadamard(bit);
    }
    // register bit b has weight 2^b and controls u^(2^b)
    let powers = u.squaring_chain(p as usize)?;
    for (bit, power) in powers.iter().enumerate() {
        reg.controlled_apply(bit as u32, power);
    }
    reg.inverse_qft();
    PhaseDistribution::from_masses(p, reg.marginal())
}

/// Joint state of a `p`-qubit register and a `dim`-level system, stored
/// register-major: amplitude index `m·dim + s`.
struct Register {
    p: u32,
    dim: usize,
    amps: Vec<C64>,
}

impl Register {
    fn new(p: u32, psi: &ComplexVector) -> Self {
        let dim = psi.dim();
        let mut amps = vec![ZERO; grid_size(p) * dim];
        amps[..dim].copy_from_slice(psi.as_slice());
        Self { p, dim, amps }
    }

    fn hadamard(&mut self, bit: u32) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mask = 1usize << bit;
        for m in (0..grid_size(self.p)).filter(|m| m & mask == 0) {
            let (lo, hi) = (m * self.dim, (m | mask) * self.dim);
            for s in 0..self.dim {
                let a = self.amps[lo + s];
                let b = self.amps[hi + s];
                self.amps[lo + s] = (a + b) * h;
                self.amps[hi + s] = (a - b) * h;
            }
        }
    }

    /// Applies `op` to the system wherever `bit` of the register is set.
    fn controlled_apply(&mut self, bit: u32, op: &ComplexMatrix) {
        let mask = 1usize << bit;
        let mut scratch = vec![ZERO; self.dim];
        for m in (0..grid_size(self.p)).filter(|m| m & mask != 0) {
            let block = &mut self.amps[m * self.dim..(m + 1) * self.dim];
            for (r, out) in scratch.iter_mut().enumerate() {
                *out = op.row(r).iter().zip(block.iter()).map(|(a, b)| a * b).sum();
            }
            block.copy_from_slice(&scratch);
        }
    }

    /// Multiplies by `e^{i·angle}` where both register bits are set.
    fn controlled_phase(&mut self, control: u32, target: u32, angle: f64) {
        let mask = (1usize << control) | (1usize << target);
        let factor = C64::from_polar(1.0, angle);
        for m in (0..grid_size(self.p)).filter(|m| m & mask == mask) {
            for a in &mut self.amps[m * self.dim..(m + 1) * self.dim] {
                *a *= factor;
            }
        }
    }

    fn swap_bits(&mut self, a: u32, b: u32) {
        let (ma, mb) = (1usize << a, 1usize << b);
        for m in 0..grid_size(self.p) {
            // visit each swapped pair once, from the side with bit a set
            if m & ma != 0 && m & mb == 0 {
                let partner = (m & !ma) | mb;
                for s in 0..self.dim {
                    self.amps.swap(m * self.dim + s, partner * self.dim + s);
                }
            }
        }
    }

    /// Inverse of the textbook QFT circuit `|x> -> P^{-1/2} Σ_y e^{2πixy/P} |y>`:
    /// bit reversal, then for each qubit from least significant upward the
    /// conjugated controlled rotations followed by a Hadamard.
    fn inverse_qft(&mut self) {
        let p = self.p;
        for i in 0..p / 2 {
            self.swap_bits(i, p - 1 - i);
        }
        for target in 0..p {
            for control in (0..target).rev() {
                let angle = -PI / (1u64 << (target - control)) as f64;
                self.controlled_phase(control, target, angle);
            }
            self.hadamard(target);
        }
    }

    fn marginal(&self) -> Vec<f64> {
        self.amps.chunks(self.dim).map(|block| block.iter().map(|a| a.norm_sqr()).sum()).collect()
    }
}

/// Draws `n` grid indices from `dist` with a ChaCha20 generator seeded by `seed`.
pub fn sample(dist: &PhaseDistribution, seed: u64, n: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return invalid("sample count must be at least 1");
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    sample_with(dist, &mut rng, n)
}

pub(crate) fn sample_with(dist: &PhaseDistribution, rng: &mut ChaCha20Rng, n: usize) -> Result<Vec<usize>> {
    let picker = WeightedIndex::new(dist.masses()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((0..n).map(|_| picker.sample(rng)).collect())
}
