//! Counting marked vertices from phase-estimation outcomes.
//!
//! A single-part count runs phase estimation on `U_j = S C R_j` with the
//! uniform state, where `R_j` only reacts to marks in part `j`. The spectrum
//! then collapses to `±θj/2` and `±(π − θj/2)`; two reflections fold any
//! outcome back to `[0, π/2]` and `k̃j = Nj sin²(folded)`. The full count
//! adds the two single-part estimates from independent runs.
//!
//! Every procedure comes in an exact flavour (the pushforward of the whole
//! outcome distribution) and a sampled flavour (one seeded measurement).

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{invalid, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, C64};
use crate::phase::{
    circuit_distribution, exact_distribution, grid_neighbors, grid_size, sample_with, wrap_phase, EigenphaseMixture,
    PhaseDistribution,
};
use crate::reduced::{eigenphase_table, WalkAngles};
use crate::walk::{BipartiteInstance, Part};

/// Absolute slack when testing `|k̃ − k| <= bound` in floating point.
pub const EVENT_SLACK: f64 = 1e-12;

/// Conditional reflections onto `[0, π/2]`: `x -> 2π − x` when `π < x < 2π`,
/// then `x -> π − x` when `x > π/2`.
pub fn fold_phase(omega: f64) -> f64 {
    let mut x = wrap_phase(omega);
    if x > PI && x < TAU {
        x = TAU - x;
    }
    if x > FRAC_PI_2 {
        x = PI - x;
    }
    x
}

/// First reflection only, onto `[0, π]`; used for the Grover rotation angle.
pub fn fold_to_upper_half(omega: f64) -> f64 {
    let x = wrap_phase(omega);
    if x > PI && x < TAU {
        TAU - x
    } else {
        x
    }
}

/// `N sin²(x)`.
pub fn estimate_k(theta_half: f64, n_part: usize) -> f64 {
    n_part as f64 * theta_half.sin().powi(2)
}

/// Error bound for a single-part count:
/// `2π sqrt(k(N − k)) / P + π² N / P²`.
pub fn partial_count_bound(k: usize, n: usize, grid: usize) -> f64 {
    let (k, n, p) = (k as f64, n as f64, grid as f64);
    2.0 * PI * (k * (n - k)).sqrt() / p + PI * PI * n / (p * p)
}

/// Error bound for the two-part count:
/// `(2π/P)(sqrt(k0(N0 − k0)) + sqrt(k1(N1 − k1))) + π²(N0 + N1)/P²`.
pub fn full_count_bound(k0: usize, n0: usize, k1: usize, n1: usize, grid: usize) -> f64 {
    let root = |k: usize, n: usize| ((k * (n - k)) as f64).sqrt();
    let p = grid as f64;
    2.0 * PI / p * (root(k0, n0) + root(k1, n1)) + PI * PI * (n0 + n1) as f64 / (p * p)
}

/// Error bound of Grover-operator counting over `n` elements.
pub fn grover_count_bound(k: usize, n: usize, grid: usize) -> f64 {
    partial_count_bound(k, n, grid)
}

/// Route used to obtain the phase-estimation outcome distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    /// Kernel mixture over the closed-form eigenphases of the walk operator.
    #[default]
    Analytic,
    /// Circuit simulation with the full arc-space operator `S C R_j`.
    Circuit,
}

/// One grid outcome mapped to a count estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountOutcome {
    pub omega_index: usize,
    pub omega: f64,
    /// Folded phase the estimate is computed from.
    pub theta_est: f64,
    pub k_est: f64,
    pub mass: f64,
}

/// Exact distribution of a count estimate: one entry per grid outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    pub p: u32,
    /// Size of the set being counted (`Nj`, or `N` for Grover).
    pub n_target: usize,
    pub bound: f64,
    pub oracle_queries: u64,
    pub outcomes: Vec<CountOutcome>,
}

impl CountDistribution {
    fn from_phases(
        phases: &PhaseDistribution,
        n_target: usize,
        bound: f64,
        fold: impl Fn(f64) -> f64,
        to_k: impl Fn(f64) -> f64,
    ) -> Self {
        let outcomes = (0..phases.grid_size())
            .map(|m| {
                let omega = phases.omega(m);
                let theta_est = fold(omega);
                CountOutcome { omega_index: m, omega, theta_est, k_est: to_k(theta_est), mass: phases.mass(m) }
            })
            .collect();
        Self { p: phases.qubits(), n_target, bound, oracle_queries: query_count(phases.grid_size()), outcomes }
    }

    /// Probability that `|k̃ − k| <= bound`.
    pub fn mass_within(&self, k: f64, bound: f64) -> f64 {
        self.outcomes.iter().filter(|o| (o.k_est - k).abs() <= bound + EVENT_SLACK).map(|o| o.mass).sum()
    }

    /// Probability of outcomes whose folded phase is a grid neighbour of
    /// `theta_half` (the phase being estimated).
    pub fn good_estimate_mass(&self, theta_half: f64) -> f64 {
        let grid = grid_size(self.p);
        let (lo, hi) = grid_neighbors(theta_half, grid);
        let near = |x: f64| [lo, hi].iter().any(|&m| (x - TAU * m as f64 / grid as f64).abs() < 1e-12);
        self.outcomes.iter().filter(|o| near(o.theta_est)).map(|o| o.mass).sum()
    }

    /// Distinct estimates with their total mass, ascending in `k̃`.
    pub fn aggregated(&self) -> Vec<(f64, f64)> {
        merge_values(self.outcomes.iter().map(|o| (o.k_est, o.mass)))
    }

    /// The estimate when a single value carries all but `tol` of the mass.
    pub fn certain_value(&self, tol: f64) -> Option<f64> {
        self.aggregated().into_iter().find(|&(_, m)| m >= 1.0 - tol).map(|(k, _)| k)
    }
}

/// Exact joint distribution of the two independent single-part runs.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCountDistribution {
    pub p: u32,
    pub parts: [CountDistribution; 2],
    pub bound: f64,
    pub oracle_queries: u64,
}

impl JointCountDistribution {
    /// Probability that `|k̃0 + k̃1 − k| <= bound`, summed over all `P²`
    /// outcome pairs in index order.
    pub fn mass_within(&self, k: f64, bound: f64) -> f64 {
        let mut total = 0.0;
        for a in &self.parts[0].outcomes {
            let mut row = 0.0;
            for b in &self.parts[1].outcomes {
                if (a.k_est + b.k_est - k).abs() <= bound + EVENT_SLACK {
                    row += b.mass;
                }
            }
            total += a.mass * row;
        }
        total
    }

    /// Distinct total estimates `k̃0 + k̃1` with their mass, ascending.
    pub fn aggregated(&self) -> Vec<(f64, f64)> {
        let left = self.parts[0].aggregated();
        let right = self.parts[1].aggregated();
        merge_values(left.iter().flat_map(|&(ka, ma)| right.iter().map(move |&(kb, mb)| (ka + kb, ma * mb))))
    }

    pub fn certain_value(&self, tol: f64) -> Option<f64> {
        self.aggregated().into_iter().find(|&(_, m)| m >= 1.0 - tol).map(|(k, _)| k)
    }
}

fn merge_values(values: impl Iterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut sorted: Vec<(f64, f64)> = values.collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (k, m) in sorted {
        match out.last_mut() {
            Some(last) if (last.0 - k).abs() <= 1e-9 => last.1 += m,
            _ => out.push((k, m)),
        }
    }
    out
}

/// Oracle queries of one phase-estimation run: `U^(2^b)` for every register bit sums to `P − 1`.
pub fn query_count(grid: usize) -> u64 {
    grid as u64 - 1
}

/// A single sampled count.
#[derive(Debug, Clone, PartialEq)]
pub struct CountEstimate {
    pub k_est: f64,
    /// Nearest integer, ties to even.
    pub k_rounded: i64,
    pub theta_est: f64,
    pub omega_index: usize,
    pub p: u32,
    pub bound: f64,
    pub oracle_queries: u64,
    pub seed: Option<u64>,
}

impl CountEstimate {
    fn from_outcome(outcome: &CountOutcome, dist: &CountDistribution, seed: Option<u64>) -> Self {
        Self {
            k_est: outcome.k_est,
            k_rounded: outcome.k_est.round_ties_even() as i64,
            theta_est: outcome.theta_est,
            omega_index: outcome.omega_index,
            p: dist.p,
            bound: dist.bound,
            oracle_queries: dist.oracle_queries,
            seed,
        }
    }
}

/// A sampled two-part count.
#[derive(Debug, Clone, PartialEq)]
pub struct FullCountEstimate {
    pub parts: [CountEstimate; 2],
    pub k_est: f64,
    pub k_rounded: i64,
    pub bound: f64,
    pub oracle_queries: u64,
    pub seed: u64,
}

fn check_qubits(p: u32) -> Result<()> {
    if p == 0 {
        return invalid("the phase register needs at least one qubit");
    }
    Ok(())
}

/// Phase-estimation outcome distribution for `S C R_j` and the uniform state.
pub fn partial_phase_distribution(
    inst: &BipartiteInstance,
    part: Part,
    p: u32,
    engine: Engine,
) -> Result<PhaseDistribution> {
    check_qubits(p)?;
    match engine {
        Engine::Analytic => {
            // R_j is the oracle of the instance with the other part unmarked
            let angles = WalkAngles::from_instance(&inst.restricted_to(part));
            exact_distribution(&eigenphase_table(&angles), p)
        }
        Engine::Circuit => {
            let u = inst.build_evolution(&inst.build_part_oracle(part))?;
            circuit_distribution(&u, &inst.uniform_state(), p)
        }
    }
}

/// Exact distribution of `k̃j` for part `j`.
pub fn partial_count_exact(inst: &BipartiteInstance, part: Part, p: u32) -> Result<CountDistribution> {
    partial_count_exact_with(inst, part, p, Engine::Analytic)
}

pub fn partial_count_exact_with(
    inst: &BipartiteInstance,
    part: Part,
    p: u32,
    engine: Engine,
) -> Result<CountDistribution> {
    let phases = partial_phase_distribution(inst, part, p, engine)?;
    let n = inst.part_size(part);
    let bound = partial_count_bound(inst.marked_count(part), n, phases.grid_size());
    Ok(CountDistribution::from_phases(&phases, n, bound, fold_phase, |x| estimate_k(x, n)))
}

/// One seeded run of the single-part count.
pub fn partial_count_sampled(inst: &BipartiteInstance, part: Part, p: u32, seed: u64) -> Result<CountEstimate> {
    Ok(partial_count_trials(inst, part, p, seed, 1)?.remove(0))
}

/// `trials` independent runs drawn in order from one generator stream.
pub fn partial_count_trials(
    inst: &BipartiteInstance,
    part: Part,
    p: u32,
    seed: u64,
    trials: usize,
) -> Result<Vec<CountEstimate>> {
    check_trials(trials)?;
    let dist = partial_count_exact(inst, part, p)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..trials).map(|_| draw(&dist, &mut rng, Some(seed))).collect()
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return invalid("at least one trial is required");
    }
    Ok(())
}

fn draw(dist: &CountDistribution, rng: &mut ChaCha20Rng, seed: Option<u64>) -> Result<CountEstimate> {
    let masses: Vec<f64> = dist.outcomes.iter().map(|o| o.mass).collect();
    let phases = PhaseDistribution::from_masses(dist.p, masses)?;
    let m = sample_with(&phases, rng, 1)?[0];
    Ok(CountEstimate::from_outcome(&dist.outcomes[m], dist, seed))
}

/// Exact joint distribution of the two-part count.
pub fn full_count_exact(inst: &BipartiteInstance, p: u32) -> Result<JointCountDistribution> {
    full_count_exact_with(inst, p, Engine::Analytic)
}

pub fn full_count_exact_with(inst: &BipartiteInstance, p: u32, engine: Engine) -> Result<JointCountDistribution> {
    let part0 = partial_count_exact_with(inst, Part::V0, p, engine)?;
    let part1 = partial_count_exact_with(inst, Part::V1, p, engine)?;
    let grid = grid_size(p);
    let bound = full_count_bound(inst.k0(), inst.n0(), inst.k1(), inst.n1(), grid);
    Ok(JointCountDistribution { p, parts: [part0, part1], bound, oracle_queries: 2 * query_count(grid) })
}

/// One seeded run of the two-part count; both runs draw from the same generator stream.
pub fn full_count_sampled(inst: &BipartiteInstance, p: u32, seed: u64) -> Result<FullCountEstimate> {
    Ok(full_count_trials(inst, p, seed, 1)?.remove(0))
}

/// `trials` two-part runs; each trial draws part 0 then part 1 from one stream.
pub fn full_count_trials(inst: &BipartiteInstance, p: u32, seed: u64, trials: usize) -> Result<Vec<FullCountEstimate>> {
    check_trials(trials)?;
    let joint = full_count_exact(inst, p)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let first = draw(&joint.parts[0], &mut rng, Some(seed))?;
            let second = draw(&joint.parts[1], &mut rng, Some(seed))?;
            let k_est = first.k_est + second.k_est;
            Ok(FullCountEstimate {
                parts: [first, second],
                k_est,
                k_rounded: k_est.round_ties_even() as i64,
                bound: joint.bound,
                oracle_queries: joint.oracle_queries,
                seed,
            })
        })
        .collect()
}

/// Rotation angle of the Grover operator: `sin²(θ/2) = k/N`.
pub fn grover_angle(n: usize, k: usize) -> f64 {
    2.0 * (k as f64 / n as f64).sqrt().clamp(0.0, 1.0).asin()
}

fn check_grover(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return invalid("the search space needs at least one element");
    }
    if k > n {
        return invalid(format!("k = {k} exceeds N = {n}"));
    }
    Ok(())
}

/// The uniform state has weight 1/2 on each of the eigenphases `θ` and `2π − θ`.
pub fn grover_mixture(n: usize, k: usize) -> Result<EigenphaseMixture> {
    check_grover(n, k)?;
    let theta = grover_angle(n, k);
    EigenphaseMixture::new(vec![(theta, 0.5), (TAU - theta, 0.5)])
}

/// `G = (2|d><d| − I) R` over `n` elements with the first `k` marked.
pub fn grover_operator(n: usize, k: usize) -> Result<ComplexMatrix> {
    check_grover(n, k)?;
    let mut diffusion = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let delta = if r == c { 1.0 } else { 0.0 };
            diffusion[(r, c)] = C64::new(2.0 / n as f64 - delta, 0.0);
        }
    }
    let signs: Vec<C64> = (0..n).map(|i| C64::new(if i < k { -1.0 } else { 1.0 }, 0.0)).collect();
    diffusion.mat_mul(&ComplexMatrix::diagonal(&signs))
}

pub fn grover_uniform_state(n: usize) -> ComplexVector {
    ComplexVector::from_real(&vec![1.0 / (n as f64).sqrt(); n])
}

/// Exact distribution of `k̃ = N sin²(θ̃/2)` for Grover counting, `θ̃` folded to `[0, π]`.
pub fn grover_count_exact(p: u32, n: usize, k: usize) -> Result<CountDistribution> {
    check_qubits(p)?;
    let phases = exact_distribution(&grover_mixture(n, k)?, p)?;
    let bound = grover_count_bound(k, n, phases.grid_size());
    Ok(CountDistribution::from_phases(&phases, n, bound, fold_to_upper_half, |x| estimate_k(0.5 * x, n)))
}

pub fn grover_count_sampled(p: u32, n: usize, k: usize, seed: u64) -> Result<CountEstimate> {
    let dist = grover_count_exact(p, n, k)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    draw(&dist, &mut rng, Some(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::GOOD_ESTIMATE_BOUND;

    fn fig2() -> BipartiteInstance {
        BipartiteInstance::new(4, 3, [1, 3], [1]).unwrap()
    }

    #[test]
    fn folding_boundaries() {
        assert!((fold_phase(1.5 * PI) - FRAC_PI_2).abs() < 1e-15);
        assert!((fold_phase(PI - 0.3) - 0.3).abs() < 1e-15);
        assert_eq!(fold_phase(PI), 0.0);
        assert_eq!(fold_phase(FRAC_PI_2), FRAC_PI_2);
        assert_eq!(fold_phase(0.0), 0.0);
        for m in 0..64 {
            let x = fold_phase(TAU * m as f64 / 64.0);
            assert!((0.0..=FRAC_PI_2).contains(&x));
        }
        assert!((fold_to_upper_half(1.5 * PI) - 0.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn estimate_k_cases() {
        assert_eq!(estimate_k(0.0, 9), 0.0);
        assert!((estimate_k(FRAC_PI_2, 9) - 9.0).abs() < 1e-14);
        assert!((estimate_k(PI / 4.0, 4) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn bound_values() {
        assert!((partial_count_bound(0, 5, 16) - PI * PI * 5.0 / 256.0).abs() < 1e-15);
        assert!((partial_count_bound(2, 4, 8) - (PI / 2.0 + PI * PI / 16.0)).abs() < 1e-14);
        assert!((partial_count_bound(2, 4, 8) - 2.18765).abs() < 1e-5);
        assert!((partial_count_bound(1, 3, 64) - 0.14607).abs() < 1e-5);
        assert!((full_count_bound(0, 4, 0, 3, 64) - PI * PI * 7.0 / 4096.0).abs() < 1e-15);
        assert!((full_count_bound(2, 4, 1, 3, 64) - 0.35206).abs() < 1e-5);
        for (k0, n0, k1, n1, grid) in [(2, 4, 1, 3, 64), (0, 1, 5, 8, 16), (3, 7, 2, 2, 32)] {
            let sum = partial_count_bound(k0, n0, grid) + partial_count_bound(k1, n1, grid);
            assert!((full_count_bound(k0, n0, k1, n1, grid) - sum).abs() < 1e-15);
        }
        assert!((grover_count_bound(16, 16, 64) - 16.0 * PI * PI / 4096.0).abs() < 1e-15);
        assert!((grover_count_bound(4, 16, 64) - 0.718727903779587).abs() < 1e-12);
        let peak = (0..=16).max_by(|&a, &b| grover_count_bound(a, 16, 64).total_cmp(&grover_count_bound(b, 16, 64)));
        assert_eq!(peak, Some(8));
    }

    #[test]
    fn partial_count_certainty() {
        let inst = BipartiteInstance::new(4, 3, [0, 1], []).unwrap();
        let dist = partial_count_exact(&inst, Part::V0, 3).unwrap();
        let k = dist.certain_value(1e-12).unwrap();
        assert!((k - 2.0).abs() < 1e-12);
        assert_eq!(dist.oracle_queries, 7);

        let empty = partial_count_exact(&inst, Part::V1, 4).unwrap();
        assert_eq!(empty.certain_value(1e-12), Some(0.0));
    }

    #[test]
    fn partial_count_fig2_part1_mass() {
        // Frozen from an independent numpy evaluation of the kernel mixture.
        // The bound event covers the nearest grid neighbour of θ1/2 but not
        // the farther one here, so it stays below 8/π².
        let dist = partial_count_exact(&fig2(), Part::V1, 6).unwrap();
        let mass = dist.mass_within(1.0, partial_count_bound(1, 3, 64));
        assert!((mass - 0.783972279908742).abs() < 1e-9, "{mass}");
        let half = WalkAngles::from_instance(&fig2()).theta1 / 2.0;
        assert!(dist.good_estimate_mass(half) >= GOOD_ESTIMATE_BOUND);
    }

    #[test]
    fn partial_count_ignores_other_part() {
        let a = partial_count_exact(&fig2(), Part::V1, 5).unwrap();
        let b = partial_count_exact(&BipartiteInstance::new(4, 3, [], [2]).unwrap(), Part::V1, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn engines_agree() {
        let inst = fig2();
        for part in Part::BOTH {
            let analytic = partial_phase_distribution(&inst, part, 5, Engine::Analytic).unwrap();
            let circuit = partial_phase_distribution(&inst, part, 5, Engine::Circuit).unwrap();
            assert!(analytic.total_variation(&circuit) < 1e-8);
        }
    }

    #[test]
    fn full_count_cases() {
        let none = BipartiteInstance::new(3, 5, [], []).unwrap();
        assert_eq!(full_count_exact(&none, 4).unwrap().certain_value(1e-12), Some(0.0));

        let both = BipartiteInstance::new(4, 4, [0, 1], [2, 3]).unwrap();
        let joint = full_count_exact(&both, 3).unwrap();
        assert!((joint.certain_value(1e-12).unwrap() - 4.0).abs() < 1e-12);

        let joint = full_count_exact(&fig2(), 6).unwrap();
        assert_eq!(joint.oracle_queries, 126);
        let mass = joint.mass_within(3.0, joint.bound);
        assert!(mass >= 0.65);
        // frozen from the numpy oracle
        assert!((mass - 0.927143501144453).abs() < 1e-9, "{mass}");
        let total: f64 = joint.aggregated().iter().map(|x| x.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_runs_are_reproducible() {
        let inst = fig2();
        let a = full_count_sampled(&inst, 5, 7).unwrap();
        assert_eq!(a, full_count_sampled(&inst, 5, 7).unwrap());
        assert_eq!(a.oracle_queries, 62);
        let single = partial_count_sampled(&inst, Part::V0, 3, 11).unwrap();
        assert_eq!(single.seed, Some(11));
        assert_eq!(single.oracle_queries, 7);
        assert!((0.0..=4.0).contains(&single.k_est));

        let trials = full_count_trials(&inst, 5, 7, 4).unwrap();
        assert_eq!(trials[0], a);
        assert_eq!(trials, full_count_trials(&inst, 5, 7, 4).unwrap());
        let singles = partial_count_trials(&inst, Part::V1, 6, 3, 50).unwrap();
        assert_eq!(singles.len(), 50);
        assert!(singles.windows(2).any(|w| w[0].omega_index != w[1].omega_index));
        assert!(partial_count_trials(&inst, Part::V1, 6, 3, 0).is_err());
    }

    #[test]
    fn rounding_is_half_even() {
        assert_eq!(2.5f64.round_ties_even() as i64, 2);
        assert_eq!(3.5f64.round_ties_even() as i64, 4);
    }

    #[test]
    fn grover_cases() {
        assert_eq!(grover_count_exact(5, 8, 0).unwrap().certain_value(1e-12), Some(0.0));
        assert!((grover_angle(4, 1) - PI / 3.0).abs() < 1e-15);
        assert!(grover_count_exact(4, 4, 5).is_err());
        let dist = grover_count_exact(6, 16, 4).unwrap();
        assert!(dist.mass_within(4.0, grover_count_bound(4, 16, 64)) >= GOOD_ESTIMATE_BOUND);
        assert_eq!(dist.oracle_queries, 63);
    }

    #[test]
    fn grover_mixture_matches_operator() {
        for (n, k) in [(4, 1), (16, 5), (9, 9)] {
            let g = grover_operator(n, k).unwrap();
            let circuit = circuit_distribution(&g, &grover_uniform_state(n), 5).unwrap();
            let exact = exact_distribution(&grover_mixture(n, k).unwrap(), 5).unwrap();
            assert!(circuit.total_variation(&exact) < 1e-10, "n={n} k={k}");
        }
    }
}
