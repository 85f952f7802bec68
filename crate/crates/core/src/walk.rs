//! Arc space of the complete bipartite graph `K_{n0,n1}` and the operators of
//! the coined quantum-walk search.
//!
//! Basis state `|i>|uv>` with `u ∈ V0`, `v ∈ V1` is the arc leaving `V_i`:
//! its tail is `u` when `i = 0` and `v` when `i = 1`. The flat index is
//! `i·n0·n1 + u·n1 + v`, so the shift is a swap of the two direction blocks.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{invalid, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, C64, ONE, ZERO};

/// One side of the bipartition. As an arc direction, `V0` means the arc
/// leaves `V0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    V0,
    V1,
}

impl Part {
    pub const BOTH: [Part; 2] = [Part::V0, Part::V1];

    pub fn from_bit(bit: usize) -> Result<Self> {
        match bit {
            0 => Ok(Part::V0),
            1 => Ok(Part::V1),
            other => invalid(format!("part index must be 0 or 1, got {other}")),
        }
    }

    pub fn bit(self) -> usize {
        match self {
            Part::V0 => 0,
            Part::V1 => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Part::V0 => Part::V1,
            Part::V1 => Part::V0,
        }
    }
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// A complete bipartite graph together with its marked vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteInstance {
    n0: usize,
    n1: usize,
    marked0: BTreeSet<usize>,
    marked1: BTreeSet<usize>,
}

impl BipartiteInstance {
    /// Builds an instance from explicit marked index lists. Indices must be
    /// in range and free of duplicates.
    pub fn new(
        n0: usize,
        n1: usize,
        marked0: impl IntoIterator<Item = usize>,
        marked1: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        if n0 == 0 || n1 == 0 {
            return invalid(format!("both parts need at least one vertex, got n0={n0}, n1={n1}"));
        }
        let marked0 = collect_marks(marked0, n0, Part::V0)?;
        let marked1 = collect_marks(marked1, n1, Part::V1)?;
        Ok(Self { n0, n1, marked0, marked1 })
    }

    /// Instance with the canonical marked sets `{0, .., k0-1}` and `{0, .., k1-1}`.
    pub fn with_counts(n0: usize, n1: usize, k0: usize, k1: usize) -> Result<Self> {
        if k0 > n0 || k1 > n1 {
            return invalid(format!("marked counts exceed part sizes: k0={k0} (n0={n0}), k1={k1} (n1={n1})"));
        }
        Self::new(n0, n1, 0..k0, 0..k1)
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn k0(&self) -> usize {
        self.marked0.len()
    }

    pub fn k1(&self) -> usize {
        self.marked1.len()
    }

    pub fn n_total(&self) -> usize {
        self.n0 + self.n1
    }

    pub fn k_total(&self) -> usize {
        self.k0() + self.k1()
    }

    pub fn part_size(&self, part: Part) -> usize {
        match part {
            Part::V0 => self.n0,
            Part::V1 => self.n1,
        }
    }

    pub fn marked(&self, part: Part) -> &BTreeSet<usize> {
        match part {
            Part::V0 => &self.marked0,
            Part::V1 => &self.marked1,
        }
    }

    pub fn marked_count(&self, part: Part) -> usize {
        self.marked(part).len()
    }

    /// Number of arcs, i.e. the dimension of the walk's Hilbert space.
    pub fn arc_count(&self) -> usize {
        2 * self.n0 * self.n1
    }

    /// Same graph with the marks of the other part removed. This is the
    /// instance whose oracle coincides with the part-restricted oracle.
    pub fn restricted_to(&self, part: Part) -> Self {
        let mut out = self.clone();
        match part {
            Part::V0 => out.marked1.clear(),
            Part::V1 => out.marked0.clear(),
        }
        out
    }

    pub fn arc_to_flat(&self, arc: ArcIndex) -> Result<usize> {
        if arc.u >= self.n0 || arc.v >= self.n1 {
            return invalid(format!("arc ({}, {}) outside K_{{{},{}}}", arc.u, arc.v, self.n0, self.n1));
        }
        Ok(arc.direction.bit() * self.n0 * self.n1 + arc.u * self.n1 + arc.v)
    }

    pub fn flat_to_arc(&self, flat: usize) -> Result<ArcIndex> {
        let edges = self.n0 * self.n1;
        if flat >= 2 * edges {
            return invalid(format!("flat index {flat} outside arc space of dimension {}", 2 * edges));
        }
        let direction = if flat < edges { Part::V0 } else { Part::V1 };
        let edge = flat % edges;
        Ok(ArcIndex { direction, u: edge / self.n1, v: edge % self.n1 })
    }

    /// Iterates all arcs in flat-index order.
    pub fn arcs(&self) -> impl Iterator<Item = ArcIndex> + '_ {
        Part::BOTH.into_iter().flat_map(move |direction| {
            (0..self.n0).flat_map(move |u| (0..self.n1).map(move |v| ArcIndex { direction, u, v }))
        })
    }

    pub fn tail_is_marked(&self, arc: ArcIndex) -> bool {
        self.marked(arc.direction).contains(&arc.tail())
    }

    /// Flip-flop shift `S = X ⊗ I`.
    pub fn build_shift(&self) -> ComplexMatrix {
        let dim = self.arc_count();
        let edges = self.n0 * self.n1;
        let mut s = ComplexMatrix::zeros(dim, dim);
        for e in 0..edges {
            s[(e + edges, e)] = ONE;
            s[(e, e + edges)] = ONE;
        }
        s
    }

    /// Grover coin: the direct sum over tail vertices `u` of `2|d_u><d_u| - I`
    /// acting on the arcs leaving `u`.
    pub fn build_coin(&self) -> ComplexMatrix {
        let dim = self.arc_count();
        let mut c = ComplexMatrix::zeros(dim, dim);
        let mut fill_block = |arcs: Vec<usize>| {
            let weight = 2.0 / arcs.len() as f64;
            for &a in &arcs {
                for &b in &arcs {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    c[(a, b)] = C64::new(weight - delta, 0.0);
                }
            }
        };
        for u in 0..self.n0 {
            fill_block((0..self.n1).map(|v| u * self.n1 + v).collect());
        }
        let offset = self.n0 * self.n1;
        for v in 0..self.n1 {
            fill_block((0..self.n0).map(|u| offset + u * self.n1 + v).collect());
        }
        c
    }

    /// Oracle `R`: `-1` on every arc whose tail is marked, `+1` elsewhere.
    pub fn build_oracle(&self) -> ComplexMatrix {
        self.diagonal_oracle(|_| true)
    }

    /// Part-restricted oracle `R_j`: acts as `R` on arcs leaving `V_j` and as
    /// the identity on the others.
    pub fn build_part_oracle(&self, part: Part) -> ComplexMatrix {
        self.diagonal_oracle(|arc| arc.direction == part)
    }

    fn diagonal_oracle(&self, active: impl Fn(ArcIndex) -> bool) -> ComplexMatrix {
        let signs: Vec<C64> =
            self.arcs().map(|arc| if active(arc) && self.tail_is_marked(arc) { -ONE } else { ONE }).collect();
        ComplexMatrix::diagonal(&signs)
    }

    /// Ancilla realization of `R_j` on the arc space tensored with one
    /// ancilla qubit (ancilla is the least significant index):
    /// `C(Z)_j · ℛ · C(Z)_j`, where `ℛ` flips the ancilla on marked-tail arcs
    /// and `C(Z)_j` applies `Z` to the ancilla on arcs leaving `V_j`.
    pub fn build_ancilla_oracle(&self, part: Part) -> Result<ComplexMatrix> {
        let dim = 2 * self.arc_count();
        let mut flip = ComplexMatrix::zeros(dim, dim);
        let mut cz_diag = vec![ONE; dim];
        for (flat, arc) in self.arcs().enumerate() {
            let (a0, a1) = (2 * flat, 2 * flat + 1);
            if self.tail_is_marked(arc) {
                flip[(a0, a1)] = ONE;
                flip[(a1, a0)] = ONE;
            } else {
                flip[(a0, a0)] = ONE;
                flip[(a1, a1)] = ONE;
            }
            if arc.direction == part {
                cz_diag[a1] = -ONE;
            }
        }
        let cz = ComplexMatrix::diagonal(&cz_diag);
        cz.mat_mul(&flip)?.mat_mul(&cz)
    }

    /// `U = S · C · oracle`.
    pub fn build_evolution(&self, oracle: &ComplexMatrix) -> Result<ComplexMatrix> {
        let dim = self.arc_count();
        if oracle.rows() != dim || oracle.cols() != dim {
            return invalid(format!("oracle is {}x{}, arc space has dimension {dim}", oracle.rows(), oracle.cols()));
        }
        self.build_shift().mat_mul(&self.build_coin())?.mat_mul(oracle)
    }

    /// Uniform superposition of all arcs.
    pub fn uniform_state(&self) -> ComplexVector {
        let dim = self.arc_count();
        let amp = 1.0 / (dim as f64).sqrt();
        ComplexVector::from_real(&vec![amp; dim])
    }
}

fn collect_marks(marks: impl IntoIterator<Item = usize>, size: usize, part: Part) -> Result<BTreeSet<usize>> {
    let mut set = BTreeSet::new();
    for m in marks {
        if m >= size {
            return invalid(format!("marked vertex {m} outside part {part} of size {size}"));
        }
        if !set.insert(m) {
            return invalid(format!("marked vertex {m} listed twice in part {part}"));
        }
    }
    Ok(set)
}

/// Basis arc `|i>|uv>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArcIndex {
    pub direction: Part,
    pub u: usize,
    pub v: usize,
}

impl ArcIndex {
    pub fn new(direction: Part, u: usize, v: usize) -> Self {
        Self { direction, u, v }
    }

    /// Vertex the arc leaves, as an index within its own part.
    pub fn tail(&self) -> usize {
        match self.direction {
            Part::V0 => self.u,
            Part::V1 => self.v,
        }
    }

    pub fn head(&self) -> usize {
        match self.direction {
            Part::V0 => self.v,
            Part::V1 => self.u,
        }
    }
}

/// Compresses an operator on (arc space ⊗ ancilla) to the arc space by
/// preparing the ancilla in `ancilla_in` and projecting onto `ancilla_out`.
pub fn ancilla_restriction(
    doubled: &ComplexMatrix,
    ancilla_in: [C64; 2],
    ancilla_out: [C64; 2],
) -> Result<ComplexMatrix> {
    if !doubled.is_square() || !doubled.rows().is_multiple_of(2) {
        return invalid("ancilla restriction needs a square operator of even dimension");
    }
    let dim = doubled.rows() / 2;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let mut acc = ZERO;
            for (a, bra) in ancilla_out.iter().enumerate() {
                for (b, ket) in ancilla_in.iter().enumerate() {
                    acc += bra.conj() * doubled[(2 * r + a, 2 * c + b)] * ket;
                }
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Ancilla state `|+>`.
pub fn ket_plus() -> [C64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [C64::new(h, 0.0), C64::new(h, 0.0)]
}

/// Ancilla state `|->`.
pub fn ket_minus() -> [C64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [C64::new(h, 0.0), C64::new(-h, 0.0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> BipartiteInstance {
        BipartiteInstance::new(4, 3, [1, 3], [1]).unwrap()
    }

    fn count_negative_diagonal(m: &ComplexMatrix) -> usize {
        (0..m.rows()).filter(|&i| m[(i, i)].re < 0.0).count()
    }

    #[test]
    fn instance_validation() {
        assert!(BipartiteInstance::new(0, 3, [], []).is_err());
        assert!(BipartiteInstance::new(2, 3, [2], []).is_err());
        assert!(BipartiteInstance::new(2, 3, [1, 1], []).is_err());
        assert!(BipartiteInstance::with_counts(4, 3, 5, 0).is_err());
        let inst = fig2();
        assert_eq!((inst.k0(), inst.k1(), inst.n_total(), inst.k_total()), (2, 1, 7, 3));
    }

    #[test]
    fn arc_layout() {
        let inst = fig2();
        assert_eq!(inst.arc_to_flat(ArcIndex::new(Part::V0, 0, 0)).unwrap(), 0);
        assert_eq!(inst.arc_to_flat(ArcIndex::new(Part::V1, 0, 0)).unwrap(), 12);
        for flat in 0..inst.arc_count() {
            let arc = inst.flat_to_arc(flat).unwrap();
            assert_eq!(inst.arc_to_flat(arc).unwrap(), flat);
        }
        assert!(inst.flat_to_arc(24).is_err());
        assert!(inst.arc_to_flat(ArcIndex::new(Part::V0, 4, 0)).is_err());
        assert_eq!(inst.arcs().count(), 24);
    }

    #[test]
    fn shift_flips_direction() {
        let inst = fig2();
        let s = inst.build_shift();
        let from = inst.arc_to_flat(ArcIndex::new(Part::V0, 2, 1)).unwrap();
        let to = inst.arc_to_flat(ArcIndex::new(Part::V1, 2, 1)).unwrap();
        let out = s.mat_vec(&ComplexVector::basis(24, from)).unwrap();
        assert_eq!(out, ComplexVector::basis(24, to));
        assert!(s.mat_mul(&s).unwrap().max_abs_diff(&ComplexMatrix::identity(24)) < 1e-15);
        assert_eq!(s.unitarity_defect().unwrap(), 0.0);
    }

    #[test]
    fn coin_blocks() {
        let single = BipartiteInstance::new(1, 1, [], []).unwrap();
        assert_eq!(single.build_coin(), ComplexMatrix::identity(2));

        let inst = fig2();
        let c = inst.build_coin();
        // tail u = 2 in V0 has degree 3
        for a in 0..3 {
            for b in 0..3 {
                let expect = 2.0 / 3.0 - if a == b { 1.0 } else { 0.0 };
                assert!((c[(2 * 3 + a, 2 * 3 + b)].re - expect).abs() < 1e-15);
            }
        }
        assert!(c.unitarity_defect().unwrap() < 1e-12);
        assert!(c.mat_mul(&c).unwrap().max_abs_diff(&ComplexMatrix::identity(24)) < 1e-12);
    }

    #[test]
    fn oracle_sign_counts() {
        let n = BipartiteInstance::new(3, 2, [], []).unwrap();
        assert_eq!(n.build_oracle(), ComplexMatrix::identity(12));
        let all = BipartiteInstance::with_counts(3, 2, 3, 2).unwrap();
        assert_eq!(all.build_oracle(), ComplexMatrix::identity(12).scale(-ONE));

        let inst = fig2();
        assert_eq!(count_negative_diagonal(&inst.build_oracle()), 2 * 3 + 4);
        assert_eq!(count_negative_diagonal(&inst.build_part_oracle(Part::V0)), 6);
        assert_eq!(count_negative_diagonal(&inst.build_part_oracle(Part::V1)), 4);
    }

    #[test]
    fn part_oracles_factor_the_oracle() {
        let only1 = BipartiteInstance::new(3, 4, [], [0, 2]).unwrap();
        assert_eq!(only1.build_part_oracle(Part::V0), ComplexMatrix::identity(24));
        let inst = fig2();
        let prod = inst.build_part_oracle(Part::V0).mat_mul(&inst.build_part_oracle(Part::V1)).unwrap();
        assert_eq!(prod, inst.build_oracle());
        assert_eq!(inst.build_part_oracle(Part::V1), inst.restricted_to(Part::V1).build_oracle());
    }

    #[test]
    fn ancilla_oracle_restricts_to_part_oracle() {
        let none = BipartiteInstance::new(2, 2, [], []).unwrap();
        assert_eq!(none.build_ancilla_oracle(Part::V0).unwrap(), ComplexMatrix::identity(16));

        let inst = fig2();
        for part in Part::BOTH {
            let big = inst.build_ancilla_oracle(part).unwrap();
            assert!(big.unitarity_defect().unwrap() < 1e-12);
            let kept = ancilla_restriction(&big, ket_plus(), ket_plus()).unwrap();
            assert!(kept.max_abs_diff(&inst.build_part_oracle(part)) < 1e-12);
            // nothing leaks into |->
            let leaked = ancilla_restriction(&big, ket_plus(), ket_minus()).unwrap();
            assert!(leaked.max_abs_diff(&ComplexMatrix::zeros(24, 24)) < 1e-12);
            let tensor = inst.build_part_oracle(part).kron(&ComplexMatrix::identity(2));
            let plus_proj = ComplexMatrix::from_real_rows(&[[0.5, 0.5], [0.5, 0.5]]);
            let lhs = big.mat_mul(&ComplexMatrix::identity(24).kron(&plus_proj)).unwrap();
            let rhs = tensor.mat_mul(&ComplexMatrix::identity(24).kron(&plus_proj)).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn evolution_operator() {
        let k11 = BipartiteInstance::new(1, 1, [], []).unwrap();
        let u = k11.build_evolution(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(u, ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]));

        let inst = fig2();
        let u = inst.build_evolution(&inst.build_oracle()).unwrap();
        assert!(u.unitarity_defect().unwrap() < 1e-12);
        assert!(inst.build_evolution(&ComplexMatrix::identity(5)).is_err());
    }

    #[test]
    fn uniform_state_amplitudes() {
        let k11 = BipartiteInstance::new(1, 1, [], []).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(k11.uniform_state().max_abs_diff(&ComplexVector::from_real(&[h, h])) < 1e-15);
        let d = fig2().uniform_state();
        assert_eq!(d.dim(), 24);
        assert!(d.as_slice().iter().all(|z| (z.re - 1.0 / 24f64.sqrt()).abs() < 1e-15));
        assert!((d.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn part_bits() {
        assert_eq!(Part::from_bit(1).unwrap(), Part::V1);
        assert!(Part::from_bit(2).is_err());
        assert_eq!(Part::V0.other(), Part::V1);
    }
}
