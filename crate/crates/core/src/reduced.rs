//! Eight-dimensional invariant subspace of the walk operator.
//!
//! The subspace is spanned by uniform superpositions over arc classes
//! `|A, B>`: arcs with tail in `A` and head in `B`, where `A` and `B` are the
//! marked or unmarked vertices of opposite parts. In the basis order of
//! [`BasisLabel::ALL`] the walk operator reduces to
//!
//! ```text
//! U_RED = [ 0      W(θ0) ]
//!         [ W(θ1)  0     ]
//! ```
//!
//! with `W` given by [`walk_block`] and `cos θj = 1 − 2 kj / Nj`. Its
//! eigenvalues are `±e^{±iμ}` and `±e^{±iσ}` with `μ = (θ0 + θ1)/2` and
//! `σ = (θ0 − θ1)/2`; eigenvectors are available in closed form, so no
//! numerical eigensolver is involved.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use crate::error::{invalid, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, C64, ONE};
use crate::phase::{wrap_phase, EigenphaseMixture};
use crate::walk::{BipartiteInstance, Part};

/// The angles that encode the marked counts in the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkAngles {
    pub theta0: f64,
    pub theta1: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl WalkAngles {
    pub fn from_thetas(theta0: f64, theta1: f64) -> Self {
        Self { theta0, theta1, mu: 0.5 * (theta0 + theta1), sigma: 0.5 * (theta0 - theta1) }
    }

    pub fn from_counts(n0: usize, k0: usize, n1: usize, k1: usize) -> Self {
        Self::from_thetas(part_angle(n0, k0), part_angle(n1, k1))
    }

    pub fn from_instance(inst: &BipartiteInstance) -> Self {
        Self::from_counts(inst.n0(), inst.k0(), inst.n1(), inst.k1())
    }

    pub fn theta(&self, part: Part) -> f64 {
        match part {
            Part::V0 => self.theta0,
            Part::V1 => self.theta1,
        }
    }
}

/// `arccos(1 − 2k/N)`, in `[0, π]`.
pub fn part_angle(n: usize, k: usize) -> f64 {
    (1.0 - 2.0 * k as f64 / n as f64).clamp(-1.0, 1.0).acos()
}

/// Labels of the invariant basis, `|tail set, head set>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisLabel {
    K0K1,
    K0K1bar,
    K0barK1,
    K0barK1bar,
    K1K0,
    K1K0bar,
    K1barK0,
    K1barK0bar,
}

impl BasisLabel {
    pub const ALL: [BasisLabel; 8] = [
        BasisLabel::K0K1,
        BasisLabel::K0K1bar,
        BasisLabel::K0barK1,
        BasisLabel::K0barK1bar,
        BasisLabel::K1K0,
        BasisLabel::K1K0bar,
        BasisLabel::K1barK0,
        BasisLabel::K1barK0bar,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&l| l == self).expect("label is listed")
    }

    /// Part the tail lies in (equivalently, the arc direction).
    pub fn direction(self) -> Part {
        if self.index() < 4 {
            Part::V0
        } else {
            Part::V1
        }
    }

    pub fn tail_marked(self) -> bool {
        self.index() % 4 < 2
    }

    pub fn head_marked(self) -> bool {
        self.index().is_multiple_of(2)
    }

    /// Number of arcs in the class.
    pub fn class_size(self, inst: &BipartiteInstance) -> usize {
        let side = |part: Part, marked: bool| {
            let k = inst.marked_count(part);
            if marked {
                k
            } else {
                inst.part_size(part) - k
            }
        };
        let tail = self.direction();
        side(tail, self.tail_marked()) * side(tail.other(), self.head_marked())
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = |part: Part, marked: bool| format!("K{}{}", part.bit(), if marked { "" } else { "bar" });
        let tail = self.direction();
        write!(f, "|{},{}>", set(tail, self.tail_marked()), set(tail.other(), self.head_marked()))
    }
}

/// The invariant basis in arc space. Classes with no arcs (a part fully
/// marked or fully unmarked) have no vector.
#[derive(Debug, Clone)]
pub struct InvariantBasis {
    dim: usize,
    vectors: [Option<ComplexVector>; 8],
}

impl InvariantBasis {
    pub fn vector(&self, label: BasisLabel) -> Option<&ComplexVector> {
        self.vectors[label.index()].as_ref()
    }

    pub fn present(&self) -> [bool; 8] {
        std::array::from_fn(|i| self.vectors[i].is_some())
    }

    pub fn arc_dim(&self) -> usize {
        self.dim
    }

    /// Present vectors with their slot index.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &ComplexVector)> {
        self.vectors.iter().enumerate().filter_map(|(i, v)| v.as_ref().map(|v| (i, v)))
    }

    /// Max-entry deviation of the Gram matrix of present vectors from the identity.
    pub fn gram_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.iter() {
            for (j, b) in self.iter() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b) - target).norm());
            }
        }
        worst
    }

    /// Arc-space vector with the given 8 reduced coordinates (absent slots ignored).
    pub fn lift(&self, coords: &ComplexVector) -> ComplexVector {
        let mut out = ComplexVector::zeros(self.dim);
        for (i, v) in self.iter() {
            for (o, x) in out.as_mut_slice().iter_mut().zip(v.as_slice()) {
                *o += coords[i] * x;
            }
        }
        out
    }
}

pub fn invariant_basis(inst: &BipartiteInstance) -> InvariantBasis {
    let dim = inst.arc_count();
    let mut vectors: [Option<ComplexVector>; 8] = Default::default();
    for label in BasisLabel::ALL {
        let size = label.class_size(inst);
        if size == 0 {
            continue;
        }
        let amp = C64::new(1.0 / (size as f64).sqrt(), 0.0);
        let mut v = ComplexVector::zeros(dim);
        for (flat, arc) in inst.arcs().enumerate() {
            let head_part = arc.direction.other();
            let head_marked = inst.marked(head_part).contains(&arc.head());
            if arc.direction == label.direction()
                && inst.tail_is_marked(arc) == label.tail_marked()
                && head_marked == label.head_marked()
            {
                v[flat] = amp;
            }
        }
        vectors[label.index()] = Some(v);
    }
    InvariantBasis { dim, vectors }
}

/// The 4x4 block `W(x)` of the reduced operator.
pub fn walk_block(x: f64) -> [[f64; 4]; 4] {
    let (s, c) = x.sin_cos();
    [[c, -s, 0.0, 0.0], [0.0, 0.0, -c, s], [-s, -c, 0.0, 0.0], [0.0, 0.0, s, c]]
}

pub fn build_u_red(angles: &WalkAngles) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(8, 8);
    let upper = walk_block(angles.theta0);
    let lower = walk_block(angles.theta1);
    for r in 0..4 {
        for c in 0..4 {
            m[(r, c + 4)] = C64::new(upper[r][c], 0.0);
            m[(r + 4, c)] = C64::new(lower[r][c], 0.0);
        }
    }
    m
}

/// Slot of [`build_u_red`] that each [`BasisLabel::ALL`] entry maps to. The
/// arc-space projection agrees with the analytic block form with no
/// reordering and no sign changes; `reduced_model_matches_projection` pins it.
pub const U_RED_SLOT: [usize; 8] = [0, 1, 2, 3, 4, 5, 6, 7];
pub const U_RED_SIGN: [f64; 8] = [1.0; 8];

/// `build_u_red` expressed in the [`BasisLabel::ALL`] ordering.
pub fn u_red_in_label_order(angles: &WalkAngles) -> ComplexMatrix {
    let analytic = build_u_red(angles);
    let mut out = ComplexMatrix::zeros(8, 8);
    for i in 0..8 {
        for j in 0..8 {
            out[(i, j)] = analytic[(U_RED_SLOT[i], U_RED_SLOT[j])] * (U_RED_SIGN[i] * U_RED_SIGN[j]);
        }
    }
    out
}

/// Reduced uniform state: the coordinates of `|d>` in the invariant basis.
/// The coefficient of `|A,B>` is `sqrt(|A||B| / (2 N0 N1))`, which in terms
/// of the angles is a product of `sin(θj/2)` (marked side) and `cos(θj/2)`
/// (unmarked side) over `√2`.
pub fn reduced_uniform_state(angles: &WalkAngles) -> ComplexVector {
    let factor = |part: Part, marked: bool| {
        let half = 0.5 * angles.theta(part);
        if marked {
            half.sin()
        } else {
            half.cos()
        }
    };
    let amps: Vec<f64> = BasisLabel::ALL
        .iter()
        .map(|&l| {
            let tail = l.direction();
            FRAC_1_SQRT_2 * factor(tail, l.tail_marked()) * factor(tail.other(), l.head_marked())
        })
        .collect();
    ComplexVector::from_real(&amps)
}

/// Projection of an arc-space operator onto the invariant basis.
#[derive(Debug, Clone)]
pub struct Reduction {
    /// `M[i][j] = <b_i|U|b_j>`; rows and columns of absent vectors are zero.
    pub matrix: ComplexMatrix,
    pub present: [bool; 8],
    /// `max_j ‖U|b_j> − Σ_i M[i][j] |b_i>‖`.
    pub leakage: f64,
}

impl Reduction {
    /// Largest deviation from `expected` over present rows and columns.
    pub fn defect_against(&self, expected: &ComplexMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for i in (0..8).filter(|&i| self.present[i]) {
            for j in (0..8).filter(|&j| self.present[j]) {
                worst = worst.max((self.matrix[(i, j)] - expected[(i, j)]).norm());
            }
        }
        worst
    }
}

pub fn reduce_operator(u_full: &ComplexMatrix, basis: &InvariantBasis) -> Result<Reduction> {
    if u_full.rows() != basis.arc_dim() || u_full.cols() != basis.arc_dim() {
        return invalid(format!(
            "operator is {}x{}, basis lives in dimension {}",
            u_full.rows(),
            u_full.cols(),
            basis.arc_dim()
        ));
    }
    let mut matrix = ComplexMatrix::zeros(8, 8);
    let mut leakage: f64 = 0.0;
    for (j, bj) in basis.iter() {
        let image = u_full.mat_vec(bj)?;
        let mut coords = ComplexVector::zeros(8);
        for (i, bi) in basis.iter() {
            let c = bi.inner(&image);
            matrix[(i, j)] = c;
            coords[i] = c;
        }
        let rebuilt = basis.lift(&coords);
        let miss: f64 =
            image.as_slice().iter().zip(rebuilt.as_slice()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        leakage = leakage.max(miss);
    }
    Ok(Reduction { matrix, present: basis.present(), leakage })
}

/// Names of the closed-form eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EigenLabel {
    MuPlus,
    MuMinus,
    MuStarPlus,
    MuStarMinus,
    SigmaPlus,
    SigmaMinus,
    SigmaStarPlus,
    SigmaStarMinus,
}

impl EigenLabel {
    pub const ALL: [EigenLabel; 8] = [
        EigenLabel::MuPlus,
        EigenLabel::MuMinus,
        EigenLabel::MuStarPlus,
        EigenLabel::MuStarMinus,
        EigenLabel::SigmaPlus,
        EigenLabel::SigmaMinus,
        EigenLabel::SigmaStarPlus,
        EigenLabel::SigmaStarMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EigenLabel::MuPlus => "mu+",
            EigenLabel::MuMinus => "mu-",
            EigenLabel::MuStarPlus => "mu*+",
            EigenLabel::MuStarMinus => "mu*-",
            EigenLabel::SigmaPlus => "sigma+",
            EigenLabel::SigmaMinus => "sigma-",
            EigenLabel::SigmaStarPlus => "sigma*+",
            EigenLabel::SigmaStarMinus => "sigma*-",
        }
    }
}

impl fmt::Display for EigenLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub label: EigenLabel,
    pub eigenvalue: C64,
    /// Argument of the eigenvalue in `[0, 2π)`.
    pub eigenphase: f64,
    pub eigenvector: ComplexVector,
    /// `|<λ|d>|²` for the reduced uniform state.
    pub initial_overlap: f64,
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub angles: WalkAngles,
    pub pairs: Vec<EigenPair>,
}

impl SpectralDecomposition {
    pub fn pair(&self, label: EigenLabel) -> &EigenPair {
        self.pairs.iter().find(|p| p.label == label).expect("all eight labels are present")
    }

    /// Eigenvectors as the columns of an 8x8 matrix.
    pub fn eigenvector_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(8, 8);
        for (c, pair) in self.pairs.iter().enumerate() {
            for r in 0..8 {
                m[(r, c)] = pair.eigenvector[r];
            }
        }
        m
    }

    pub fn gram_defect(&self) -> f64 {
        self.eigenvector_matrix().unitarity_defect().expect("8x8 is square")
    }

    pub fn max_residual(&self, u_red: &ComplexMatrix) -> Result<f64> {
        self.pairs
            .iter()
            .map(|p| u_red.eigen_residual(p.eigenvalue, &p.eigenvector))
            .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))
    }

    pub fn total_overlap(&self) -> f64 {
        self.pairs.iter().map(|p| p.initial_overlap).sum()
    }
}

pub fn spectral_decomposition(angles: &WalkAngles) -> SpectralDecomposition {
    let i = C64::i();
    let (mu, sigma) = (angles.mu, angles.sigma);
    let d_red = reduced_uniform_state(angles);
    let norm = 1.0 / 8f64.sqrt();

    let mut pairs = Vec::with_capacity(8);
    let mut push = |label: EigenLabel, eigenvalue: C64, phase: f64, entries: [C64; 8]| {
        let eigenvector = ComplexVector::from_vec(entries.iter().map(|z| z * norm).collect())
            .expect("closed-form entries are finite");
        let initial_overlap = eigenvector.inner(&d_red).norm_sqr();
        pairs.push(EigenPair { label, eigenvalue, eigenphase: wrap_phase(phase), eigenvector, initial_overlap });
    };

    for (s, plus_label, star_label) in
        [(1.0, EigenLabel::MuPlus, EigenLabel::MuStarPlus), (-1.0, EigenLabel::MuMinus, EigenLabel::MuStarMinus)]
    {
        let shift = if s > 0.0 { 0.0 } else { PI };
        let e = C64::from_polar(s, sigma);
        push(plus_label, C64::from_polar(s, mu), mu + shift, [e, -i * e, i * e, e, ONE, -i, i, ONE]);
        let e = C64::from_polar(s, -sigma);
        push(star_label, C64::from_polar(s, -mu), -mu + shift, [e, i * e, -i * e, e, ONE, i, -i, ONE]);
    }
    for (s, plus_label, star_label) in [
        (1.0, EigenLabel::SigmaPlus, EigenLabel::SigmaStarPlus),
        (-1.0, EigenLabel::SigmaMinus, EigenLabel::SigmaStarMinus),
    ] {
        let shift = if s > 0.0 { 0.0 } else { PI };
        let e = C64::from_polar(s, mu);
        push(plus_label, C64::from_polar(s, sigma), sigma + shift, [e, i * e, i * e, -e, ONE, -i, -i, -ONE]);
        let e = C64::from_polar(s, -mu);
        push(star_label, C64::from_polar(s, -sigma), -sigma + shift, [e, -i * e, -i * e, -e, ONE, i, i, -ONE]);
    }
    pairs.sort_by_key(|p| EigenLabel::ALL.iter().position(|&l| l == p.label));
    SpectralDecomposition { angles: *angles, pairs }
}

/// Eigenphases of `U` with the probability that phase estimation on `|d>`
/// lands on each: `±μ` and `±(π−μ)` weighted by `cos²(σ/2)/4` and
/// `sin²(σ/2)/4`; `±σ` and `±(π−σ)` weighted by `cos²(μ/2)/4` and
/// `sin²(μ/2)/4`.
pub fn eigenphase_table(angles: &WalkAngles) -> EigenphaseMixture {
    let (mu, sigma) = (angles.mu, angles.sigma);
    let c2 = |x: f64| 0.25 * (0.5 * x).cos().powi(2);
    let s2 = |x: f64| 0.25 * (0.5 * x).sin().powi(2);
    let components = vec![
        (mu, c2(sigma)),
        (-mu, c2(sigma)),
        (PI - mu, s2(sigma)),
        (-(PI - mu), s2(sigma)),
        (sigma, c2(mu)),
        (-sigma, c2(mu)),
        (PI - sigma, s2(mu)),
        (-(PI - sigma), s2(mu)),
    ];
    EigenphaseMixture::new(components).expect("table weights sum to one")
}
