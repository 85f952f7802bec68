//! Exact success probabilities, parameter sweeps and the consolidated
//! verification report.

use log::info;
use rayon::prelude::*;

use crate::counting::{full_count_exact, partial_count_exact, partial_phase_distribution, Engine};
use crate::error::{invalid, Error, Result};
use crate::linalg::{ComplexMatrix, CROSS_MODE_TOL, STRUCTURAL_TOL};
use crate::phase::{circuit_distribution, exact_distribution, GOOD_ESTIMATE_BOUND};
use crate::reduced::{
    build_u_red, eigenphase_table, invariant_basis, reduce_operator, reduced_uniform_state, spectral_decomposition,
    u_red_in_label_order, WalkAngles,
};
use crate::walk::{ancilla_restriction, ket_minus, ket_plus, BipartiteInstance, Part};

/// Required probability of the joint error-bound event.
pub const JOINT_SUCCESS_THRESHOLD: f64 = 0.65;
/// Numerical allowance when comparing an exact mass against its threshold.
pub const MASS_TOL: f64 = 1e-9;
/// Largest edge count accepted by [`verify_suite`].
pub const MAX_VERIFY_EDGES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub bound_value: f64,
    /// Exact probability of `|k̃ − k| <= bound_value`.
    pub satisfied_mass: f64,
    pub threshold: f64,
    /// Diagnostic: probability of landing on a grid neighbour of the
    /// estimated phase. Single-part reports only.
    pub good_estimate_mass: Option<f64>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.satisfied_mass >= self.threshold - MASS_TOL
    }
}

pub fn bound_satisfaction_mass(inst: &BipartiteInstance, part: Part, p: u32) -> Result<BoundReport> {
    let dist = partial_count_exact(inst, part, p)?;
    let k = inst.marked_count(part) as f64;
    let half = 0.5 * WalkAngles::from_instance(inst).theta(part);
    Ok(BoundReport {
        bound_value: dist.bound,
        satisfied_mass: dist.mass_within(k, dist.bound),
        threshold: GOOD_ESTIMATE_BOUND,
        good_estimate_mass: Some(dist.good_estimate_mass(half)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointReport {
    pub report: BoundReport,
    /// Single-part bound-event masses; their product is contained in the joint event.
    pub part_masses: [f64; 2],
    pub product_lower_bound: f64,
    /// Product of the single-part grid-neighbour masses.
    pub good_estimate_product: f64,
}

pub fn joint_success_mass(inst: &BipartiteInstance, p: u32) -> Result<JointReport> {
    let joint = full_count_exact(inst, p)?;
    let angles = WalkAngles::from_instance(inst);
    let part_masses = [
        joint.parts[0].mass_within(inst.k0() as f64, joint.parts[0].bound),
        joint.parts[1].mass_within(inst.k1() as f64, joint.parts[1].bound),
    ];
    Ok(JointReport {
        report: BoundReport {
            bound_value: joint.bound,
            satisfied_mass: joint.mass_within(inst.k_total() as f64, joint.bound),
            threshold: JOINT_SUCCESS_THRESHOLD,
            good_estimate_mass: None,
        },
        part_masses,
        product_lower_bound: part_masses[0] * part_masses[1],
        good_estimate_product: [Part::V0, Part::V1]
            .iter()
            .map(|&part| joint.parts[part.bit()].good_estimate_mass(0.5 * angles.theta(part)))
            .product(),
    })
}

/// Marked-count values to sweep for one part.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum CountRange {
    /// Every `k` in `0..=n`.
    #[default]
    All,
    Values(Vec<usize>),
}

impl CountRange {
    fn values(&self, n: usize) -> Vec<usize> {
        match self {
            CountRange::All => (0..=n).collect(),
            CountRange::Values(v) => v.clone(),
        }
    }
}

/// Which threshold checks count toward a record's overall verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepChecks {
    pub partial: bool,
    pub joint: bool,
}

impl Default for SweepChecks {
    fn default() -> Self {
        Self { partial: true, joint: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub n0: Vec<usize>,
    pub n1: Vec<usize>,
    pub k0: CountRange,
    pub k1: CountRange,
    pub p: Vec<u32>,
    pub checks: SweepChecks,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n0.is_empty() || self.n1.is_empty() || self.p.is_empty() {
            return invalid("sweep ranges for n0, n1 and p must be non-empty");
        }
        if self.n0.contains(&0) || self.n1.contains(&0) {
            return invalid("part sizes must be at least 1");
        }
        if self.p.contains(&0) {
            return invalid("register sizes must be at least 1");
        }
        for (name, range, sizes) in [("k0", &self.k0, &self.n0), ("k1", &self.k1, &self.n1)] {
            if let CountRange::Values(v) = range {
                let max_n = sizes.iter().copied().max().unwrap_or(0);
                if v.is_empty() {
                    return invalid(format!("{name} list is empty"));
                }
                if let Some(k) = v.iter().find(|&&k| k > max_n) {
                    return invalid(format!("{name} = {k} exceeds every part size in the sweep"));
                }
            }
        }
        Ok(())
    }

    /// Feasible grid points in lexicographic `(n0, n1, k0, k1, p)` order.
    pub fn points(&self) -> Vec<(usize, usize, usize, usize, u32)> {
        let mut out = Vec::new();
        for &n0 in &self.n0 {
            for &n1 in &self.n1 {
                for k0 in self.k0.values(n0) {
                    for k1 in self.k1.values(n1) {
                        if k0 > n0 || k1 > n1 {
                            info!("skipping infeasible point n0={n0} n1={n1} k0={k0} k1={k1}");
                            continue;
                        }
                        for &p in &self.p {
                            out.push((n0, n1, k0, k1, p));
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub n0: usize,
    pub n1: usize,
    pub k0: usize,
    pub k1: usize,
    pub p: u32,
    pub angles: WalkAngles,
    pub partial: [BoundReport; 2],
    pub joint: BoundReport,
    pub product_lower_bound: f64,
    /// Threshold verdicts for the enabled checks (disabled checks report `true`).
    pub partial_pass: [bool; 2],
    pub joint_pass: bool,
}

impl SweepRecord {
    pub fn passed(&self) -> bool {
        self.partial_pass.iter().all(|&b| b) && self.joint_pass
    }
}

fn sweep_point(n0: usize, n1: usize, k0: usize, k1: usize, p: u32, checks: SweepChecks) -> Result<SweepRecord> {
    let inst = BipartiteInstance::with_counts(n0, n1, k0, k1)?;
    let partial = [bound_satisfaction_mass(&inst, Part::V0, p)?, bound_satisfaction_mass(&inst, Part::V1, p)?];
    let joint = joint_success_mass(&inst, p)?;
    Ok(SweepRecord {
        n0,
        n1,
        k0,
        k1,
        p,
        angles: WalkAngles::from_instance(&inst),
        partial,
        joint: joint.report,
        product_lower_bound: joint.product_lower_bound,
        partial_pass: [!checks.partial || partial[0].passed(), !checks.partial || partial[1].passed()],
        joint_pass: !checks.joint || joint.report.passed(),
    })
}

/// Evaluates every feasible grid point. Points run in parallel on the
/// current rayon pool; records come back in grid order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    cfg.points().into_par_iter().map(|(n0, n1, k0, k1, p)| sweep_point(n0, n1, k0, k1, p, cfg.checks)).collect()
}

/// Tolerances used by [`verify_suite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Unitarity, invariance leakage, reduced-model reconciliation.
    pub structural: f64,
    /// Exact algebraic identities (involutions, oracle factorization, ancilla restriction).
    pub identity: f64,
    /// Closed-form spectral checks.
    pub spectral: f64,
    /// Analytic versus circuit distributions (total variation).
    pub cross_mode: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { structural: STRUCTURAL_TOL, identity: 1e-12, spectral: 1e-12, cross_mode: CROSS_MODE_TOL }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn at_most(&mut self, name: impl Into<String>, measured: f64, threshold: f64) {
        let passed = measured <= threshold;
        self.checks.push(Check { name: name.into(), measured, threshold, comparison: Comparison::AtMost, passed });
    }

    fn at_least(&mut self, name: impl Into<String>, measured: f64, threshold: f64) {
        let passed = measured >= threshold;
        self.checks.push(Check { name: name.into(), measured, threshold, comparison: Comparison::AtLeast, passed });
    }
}

/// Negates one diagonal entry of an oracle. Used for negative controls.
pub fn corrupt_oracle(oracle: &ComplexMatrix, flat: usize) -> Result<ComplexMatrix> {
    if flat >= oracle.rows() {
        return invalid(format!("arc index {flat} outside oracle of dimension {}", oracle.rows()));
    }
    let mut out = oracle.clone();
    out[(flat, flat)] = -out[(flat, flat)];
    Ok(out)
}

/// Runs every structural, spectral, distributional and bound check on one
/// instance. `oracle_override` replaces the oracle used to build `U`.
pub fn verify_suite(
    inst: &BipartiteInstance,
    p: u32,
    tol: &Tolerances,
    oracle_override: Option<&ComplexMatrix>,
) -> Result<VerifyReport> {
    let edges = inst.n0() * inst.n1();
    if edges > MAX_VERIFY_EDGES {
        return Err(Error::ResourceLimit(format!(
            "verification builds the full arc space; {edges} edges exceeds {MAX_VERIFY_EDGES}"
        )));
    }
    if p == 0 {
        return invalid("the phase register needs at least one qubit");
    }
    let dim = inst.arc_count();
    let mut report = VerifyReport { checks: Vec::new() };

    let shift = inst.build_shift();
    let coin = inst.build_coin();
    let oracle = match oracle_override {
        Some(o) => o.clone(),
        None => inst.build_oracle(),
    };
    let part_oracles = [inst.build_part_oracle(Part::V0), inst.build_part_oracle(Part::V1)];
    let ancilla = [inst.build_ancilla_oracle(Part::V0)?, inst.build_ancilla_oracle(Part::V1)?];
    let u = inst.build_evolution(&oracle)?;
    let identity = ComplexMatrix::identity(dim);

    for (name, m) in [
        ("shift", &shift),
        ("coin", &coin),
        ("oracle", &oracle),
        ("part_oracle_0", &part_oracles[0]),
        ("part_oracle_1", &part_oracles[1]),
        ("ancilla_oracle_0", &ancilla[0]),
        ("ancilla_oracle_1", &ancilla[1]),
        ("evolution", &u),
    ] {
        report.at_most(format!("unitarity:{name}"), m.unitarity_defect()?, tol.structural);
    }
    for (name, m) in [("shift", &shift), ("coin", &coin), ("oracle", &oracle)] {
        report.at_most(format!("involution:{name}"), m.mat_mul(m)?.max_abs_diff(&identity), tol.identity);
    }
    report.at_most(
        "oracle_factorization",
        part_oracles[0].mat_mul(&part_oracles[1])?.max_abs_diff(&oracle),
        tol.identity,
    );
    for part in Part::BOTH {
        let j = part.bit();
        let kept = ancilla_restriction(&ancilla[j], ket_plus(), ket_plus())?;
        report.at_most(format!("ancilla_restriction:{j}"), kept.max_abs_diff(&part_oracles[j]), tol.identity);
        let leaked = ancilla_restriction(&ancilla[j], ket_plus(), ket_minus())?;
        report.at_most(
            format!("ancilla_returns_plus:{j}"),
            leaked.max_abs_diff(&ComplexMatrix::zeros(dim, dim)),
            tol.identity,
        );
    }

    let angles = WalkAngles::from_instance(inst);
    let basis = invariant_basis(inst);
    report.at_most("basis_gram", basis.gram_defect(), tol.identity);
    let reduction = reduce_operator(&u, &basis)?;
    report.at_most("invariance_leakage", reduction.leakage, tol.structural);
    report.at_most("u_red_reconciliation", reduction.defect_against(&u_red_in_label_order(&angles)), tol.structural);
    let d_red = reduced_uniform_state(&angles);
    report.at_most("uniform_state_expansion", basis.lift(&d_red).max_abs_diff(&inst.uniform_state()), tol.structural);

    let u_red = build_u_red(&angles);
    report.at_most("unitarity:u_red", u_red.unitarity_defect()?, tol.structural);
    let spectrum = spectral_decomposition(&angles);
    report.at_most("eigen_residual", spectrum.max_residual(&u_red)?, tol.spectral);
    report.at_most("eigenvector_gram", spectrum.gram_defect(), tol.spectral);
    let table = eigenphase_table(&angles);
    let table_gap = spectrum
        .pairs
        .iter()
        .map(|pair| {
            let weight: f64 = table
                .components()
                .iter()
                .filter(|(phase, _)| {
                    let d = (phase - pair.eigenphase).abs();
                    d < 1e-12 || (std::f64::consts::TAU - d) < 1e-12
                })
                .map(|c| c.1)
                .next()
                .unwrap_or(f64::NAN);
            (weight - pair.initial_overlap).abs()
        })
        .fold(0.0, f64::max);
    report.at_most("overlap_table", table_gap, tol.spectral);
    report.at_most("overlap_sum", (spectrum.total_overlap() - 1.0).abs(), tol.spectral);

    let analytic = exact_distribution(&table, p)?;
    let reduced_circuit = circuit_distribution(&u_red, &d_red, p)?;
    report.at_most("distribution:reduced_circuit", analytic.total_variation(&reduced_circuit), tol.cross_mode);
    let full_circuit = circuit_distribution(&u, &inst.uniform_state(), p)?;
    report.at_most("distribution:full_circuit", analytic.total_variation(&full_circuit), tol.cross_mode);
    for part in Part::BOTH {
        let a = partial_phase_distribution(inst, part, p, Engine::Analytic)?;
        let c = partial_phase_distribution(inst, part, p, Engine::Circuit)?;
        report.at_most(format!("distribution:part_{}", part.bit()), a.total_variation(&c), tol.cross_mode);
    }

    for part in Part::BOTH {
        let r = bound_satisfaction_mass(inst, part, p)?;
        report.at_least(format!("bound_mass:part_{}", part.bit()), r.satisfied_mass, r.threshold - MASS_TOL);
    }
    let joint = joint_success_mass(inst, p)?;
    report.at_least("bound_mass:joint", joint.report.satisfied_mass, joint.report.threshold - MASS_TOL);
    Ok(report)
}
