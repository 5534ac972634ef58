//! DG Lie algebras over Q given by structure constants, with eager and
//! exhaustive axiom validation, plus chain-complex cohomology with
//! deterministic class representatives.

use crate::error::{Error, Result};
use crate::graded::GradedSpace;
use crate::linalg::{QMatrix, Subspace};
use crate::rat::{self, Rat};
use num::Zero;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// `(-1)^(a*b)` as a rational.
pub fn koszul_sign(a: i32, b: i32) -> Rat {
    if (a * b) % 2 == 0 {
        rat::one()
    } else {
        rat::int(-1)
    }
}

/// Unvalidated structure-constant data. Brackets are stored sparsely for
/// `x <= y` in global basis order only; the other half is derived from
/// graded antisymmetry.
#[derive(Debug, Clone)]
pub struct RawDGLA {
    pub space: GradedSpace,
    /// Per-degree matrix of `d : g^i -> g^(i+1)`, shape `dim(i+1) x dim(i)`.
    pub differential: BTreeMap<i32, QMatrix>,
    /// `(x, y) -> [x, y]` as a sparse target vector, keyed by global indices.
    pub bracket: BTreeMap<(usize, usize), Vec<(usize, Rat)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axiom {
    Shape,
    DSquared,
    Antisymmetry,
    Jacobi,
    Leibniz,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::Shape => "shape",
            Axiom::DSquared => "d-squared",
            Axiom::Antisymmetry => "antisymmetry",
            Axiom::Jacobi => "jacobi",
            Axiom::Leibniz => "leibniz",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return writeln!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "{} on ({}): {}", v.axiom, v.witness.join(", "), v.detail)?;
        }
        Ok(())
    }
}

impl RawDGLA {
    pub fn d_matrix(&self, degree: i32) -> QMatrix {
        match self.differential.get(&degree) {
            Some(m) => m.clone(),
            None => QMatrix::zero(self.space.dim(degree + 1), self.space.dim(degree)),
        }
    }

    /// `[x, y]` for global basis indices, any order.
    pub fn bracket_basis(&self, x: usize, y: usize) -> Vec<(usize, Rat)> {
        if x <= y {
            self.bracket.get(&(x, y)).cloned().unwrap_or_default()
        } else {
            let (dx, _) = self.space.degree_of_global(x);
            let (dy, _) = self.space.degree_of_global(y);
            let sign = -koszul_sign(dx, dy);
            self.bracket
                .get(&(y, x))
                .map(|v| v.iter().map(|(z, c)| (*z, c * &sign)).collect())
                .unwrap_or_default()
        }
    }

    /// Bracket of dense degree-homogeneous coefficient vectors.
    pub fn bracket_vec(&self, da: i32, va: &[Rat], db: i32, vb: &[Rat]) -> Vec<Rat> {
        let target = da + db;
        let mut out = vec![rat::zero(); self.space.dim(target)];
        for (ia, ca) in va.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            let ga = self.space.global(da, ia);
            for (ib, cb) in vb.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let gb = self.space.global(db, ib);
                for (gz, cz) in self.bracket_basis(ga, gb) {
                    let (dz, lz) = self.space.degree_of_global(gz);
                    debug_assert_eq!(dz, target);
                    out[lz] += ca * cb * &cz;
                }
            }
        }
        out
    }

    pub fn d_vec(&self, degree: i32, v: &[Rat]) -> Vec<Rat> {
        self.d_matrix(degree).mul_vec(v).expect("degree dims")
    }

    /// Exhaustive axiom check over basis tuples. An empty report means the
    /// data is a DG Lie algebra.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let sp = &self.space;
        let n = sp.total_dim();

        // Shape: matrix dimensions, key ordering, bracket grading.
        for (&i, m) in &self.differential {
            if m.rows() != sp.dim(i + 1) || m.cols() != sp.dim(i) {
                report.violations.push(Violation {
                    axiom: Axiom::Shape,
                    witness: vec![format!("degree {i}")],
                    detail: format!(
                        "differential at degree {i} is {}x{}, expected {}x{}",
                        m.rows(),
                        m.cols(),
                        sp.dim(i + 1),
                        sp.dim(i)
                    ),
                });
            }
        }
        for (&(x, y), targets) in &self.bracket {
            if x > y || x >= n || y >= n {
                report.violations.push(Violation {
                    axiom: Axiom::Shape,
                    witness: vec![x.to_string(), y.to_string()],
                    detail: "bracket key out of order or out of range".into(),
                });
                continue;
            }
            let (dx, _) = sp.degree_of_global(x);
            let (dy, _) = sp.degree_of_global(y);
            for (z, _) in targets {
                let (dz, _) = sp.degree_of_global(*z);
                if dz != dx + dy {
                    report.violations.push(Violation {
                        axiom: Axiom::Shape,
                        witness: vec![
                            sp.global_name(x).into(),
                            sp.global_name(y).into(),
                            sp.global_name(*z).into(),
                        ],
                        detail: format!("bracket target degree {dz} != {dx} + {dy}"),
                    });
                }
            }
        }
        if !report.is_valid() {
            return report; // evaluation below assumes well-shaped data
        }

        // d o d = 0
        for i in sp.degrees() {
            for l in 0..sp.dim(i) {
                let mut v = vec![rat::zero(); sp.dim(i)];
                v[l] = rat::one();
                let ddv = self.d_vec(i + 1, &self.d_vec(i, &v));
                if ddv.iter().any(|c| !c.is_zero()) {
                    report.violations.push(Violation {
                        axiom: Axiom::DSquared,
                        witness: vec![sp.name(i, l).into()],
                        detail: "d(d(x)) != 0".into(),
                    });
                }
            }
        }

        // Antisymmetry for the only undetermined case: [x, x] with |x| even.
        for g in 0..n {
            let (d, _) = sp.degree_of_global(g);
            if d % 2 == 0 {
                if let Some(t) = self.bracket.get(&(g, g)) {
                    if t.iter().any(|(_, c)| !c.is_zero()) {
                        report.violations.push(Violation {
                            axiom: Axiom::Antisymmetry,
                            witness: vec![sp.global_name(g).into()],
                            detail: "[x, x] must vanish in even degree".into(),
                        });
                    }
                }
            }
        }

        // Graded Jacobi, cyclic form, on sorted triples.
        for x in 0..n {
            for y in x..n {
                for z in y..n {
                    if let Some(w) = self.jacobi_defect(x, y, z) {
                        report.violations.push(Violation {
                            axiom: Axiom::Jacobi,
                            witness: vec![
                                sp.global_name(x).into(),
                                sp.global_name(y).into(),
                                sp.global_name(z).into(),
                            ],
                            detail: w,
                        });
                    }
                }
            }
        }

        // Graded Leibniz on all sorted pairs.
        for x in 0..n {
            for y in x..n {
                if let Some(w) = self.leibniz_defect(x, y) {
                    report.violations.push(Violation {
                        axiom: Axiom::Leibniz,
                        witness: vec![sp.global_name(x).into(), sp.global_name(y).into()],
                        detail: w,
                    });
                }
            }
        }

        report
    }

    fn basis_vec(&self, g: usize) -> (i32, Vec<Rat>) {
        let (d, l) = self.space.degree_of_global(g);
        let mut v = vec![rat::zero(); self.space.dim(d)];
        v[l] = rat::one();
        (d, v)
    }

    fn jacobi_defect(&self, x: usize, y: usize, z: usize) -> Option<String> {
        let (dx, vx) = self.basis_vec(x);
        let (dy, vy) = self.basis_vec(y);
        let (dz, vz) = self.basis_vec(z);
        let t1 = self.bracket_vec(dx, &vx, dy + dz, &self.bracket_vec(dy, &vy, dz, &vz));
        let t2 = self.bracket_vec(dy, &vy, dz + dx, &self.bracket_vec(dz, &vz, dx, &vx));
        let t3 = self.bracket_vec(dz, &vz, dx + dy, &self.bracket_vec(dx, &vx, dy, &vy));
        let s1 = koszul_sign(dx, dz);
        let s2 = koszul_sign(dy, dx);
        let s3 = koszul_sign(dz, dy);
        let total: Vec<Rat> = t1
            .iter()
            .zip(&t2)
            .zip(&t3)
            .map(|((a, b), c)| a * &s1 + b * &s2 + c * &s3)
            .collect();
        if total.iter().any(|c| !c.is_zero()) {
            Some("graded Jacobi identity fails".into())
        } else {
            None
        }
    }

    fn leibniz_defect(&self, x: usize, y: usize) -> Option<String> {
        let (dx, vx) = self.basis_vec(x);
        let (dy, vy) = self.basis_vec(y);
        let lhs = self.d_vec(dx + dy, &self.bracket_vec(dx, &vx, dy, &vy));
        let t1 = self.bracket_vec(dx + 1, &self.d_vec(dx, &vx), dy, &vy);
        let t2 = self.bracket_vec(dx, &vx, dy + 1, &self.d_vec(dy, &vy));
        let sign = koszul_sign(dx, 1);
        let defect: Vec<Rat> = lhs
            .iter()
            .zip(&t1)
            .zip(&t2)
            .map(|((l, a), b)| l - a - &(b * &sign))
            .collect();
        if defect.iter().any(|c| !c.is_zero()) {
            Some("d[x,y] != [dx,y] + (-1)^|x| [x,dy]".into())
        } else {
            None
        }
    }
}

/// A validated DG Lie algebra. Construction checks every axiom on basis
/// tuples, so downstream code can rely on the structure without rechecking.
#[derive(Debug, Clone)]
pub struct DGLieAlgebra {
    raw: Arc<RawDGLA>,
}

impl PartialEq for DGLieAlgebra {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.raw, &other.raw) || self.raw.space == other.raw.space
    }
}

impl DGLieAlgebra {
    pub fn new(raw: RawDGLA) -> std::result::Result<Self, ValidationReport> {
        let report = raw.validate();
        if !report.is_valid() {
            return Err(report);
        }
        Ok(DGLieAlgebra { raw: Arc::new(raw) })
    }

    pub fn raw(&self) -> &RawDGLA {
        &self.raw
    }

    pub fn space(&self) -> &GradedSpace {
        &self.raw.space
    }

    pub fn d_matrix(&self, degree: i32) -> QMatrix {
        self.raw.d_matrix(degree)
    }

    pub fn bracket_vec(&self, da: i32, va: &[Rat], db: i32, vb: &[Rat]) -> Vec<Rat> {
        self.raw.bracket_vec(da, va, db, vb)
    }

    pub fn d_vec(&self, degree: i32, v: &[Rat]) -> Vec<Rat> {
        self.raw.d_vec(degree, v)
    }

    pub fn is_abelian(&self) -> bool {
        self.raw
            .bracket
            .values()
            .all(|t| t.iter().all(|(_, c)| c.is_zero()))
    }

    /// The underlying cochain complex.
    pub fn complex(&self) -> ChainComplexQ {
        let (lo, hi) = self.space().window();
        ChainComplexQ::new(
            lo,
            (lo..=hi).map(|i| self.space().dim(i)).collect(),
            (lo..=hi).map(|i| self.d_matrix(i)).collect(),
        )
    }

    pub fn cohomology(&self, degree: i32) -> CohomologyData {
        self.complex().cohomology(degree)
    }

    pub fn classify_quantum_type(&self) -> QuantumType {
        let (lo, _) = self.space().window();
        for d in lo..-1 {
            if self.space().dim(d) > 0 {
                return QuantumType::NotQuantum;
            }
        }
        QuantumType::Quantum
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantumType {
    Quantum,
    NotQuantum,
}

/// A finite cochain complex of Q-vector spaces with explicit matrices.
#[derive(Debug, Clone)]
pub struct ChainComplexQ {
    lo: i32,
    dims: Vec<usize>,
    d: Vec<QMatrix>, // d[i] : degree lo+i -> lo+i+1
}

impl ChainComplexQ {
    pub fn new(lo: i32, dims: Vec<usize>, d: Vec<QMatrix>) -> Self {
        assert_eq!(dims.len(), d.len());
        for (i, m) in d.iter().enumerate() {
            assert_eq!(m.cols(), dims[i], "d shape at slot {i}");
            let next = dims.get(i + 1).copied().unwrap_or(0);
            assert_eq!(m.rows(), next, "d target shape at slot {i}");
        }
        ChainComplexQ { lo, dims, d }
    }

    pub fn window(&self) -> (i32, i32) {
        (self.lo, self.lo + self.dims.len() as i32 - 1)
    }

    pub fn dim(&self, degree: i32) -> usize {
        let idx = degree - self.lo;
        if idx < 0 || idx as usize >= self.dims.len() {
            0
        } else {
            self.dims[idx as usize]
        }
    }

    pub fn d_at(&self, degree: i32) -> QMatrix {
        let idx = degree - self.lo;
        if idx < 0 || idx as usize >= self.d.len() {
            return QMatrix::zero(self.dim(degree + 1), self.dim(degree));
        }
        self.d[idx as usize].clone()
    }

    pub fn verify_square_zero(&self) -> bool {
        let (lo, hi) = self.window();
        (lo..hi).all(|i| {
            self.d_at(i + 1)
                .mul(&self.d_at(i))
                .map(|m| m.is_zero())
                .unwrap_or(false)
        })
    }

    pub fn cohomology(&self, degree: i32) -> CohomologyData {
        let dim = self.dim(degree);
        let d_here = self.d_at(degree);
        let d_prev = self.d_at(degree - 1);
        let cocycles = if dim == 0 {
            Vec::new()
        } else {
            d_here.kernel_basis()
        };
        let coboundaries: Vec<Vec<Rat>> = if self.dim(degree - 1) == 0 || dim == 0 {
            Vec::new()
        } else {
            d_prev.image_basis()
        };
        let bnd = Subspace::from_spanning(dim, &coboundaries);
        // Deterministic complement representatives: reduce kernel vectors by
        // the coboundary space and keep the earliest independent ones.
        let mut class_reps: Vec<Vec<Rat>> = Vec::new();
        let mut span_so_far = coboundaries.clone();
        for z in &cocycles {
            let reduced = bnd.reduce(z);
            if reduced.iter().all(|c| c.is_zero()) {
                continue;
            }
            if !crate::linalg::in_span(&reduced, &span_so_far) {
                span_so_far.push(reduced.clone());
                class_reps.push(reduced);
            }
        }
        CohomologyData {
            degree,
            space_dim: dim,
            d_here,
            cocycles,
            coboundaries,
            class_reps,
            bnd,
        }
    }
}

/// Cohomology of one degree: exact bases and a deterministic cocycle ->
/// class-coordinates map.
#[derive(Debug, Clone)]
pub struct CohomologyData {
    pub degree: i32,
    pub space_dim: usize,
    d_here: QMatrix,
    pub cocycles: Vec<Vec<Rat>>,
    pub coboundaries: Vec<Vec<Rat>>,
    pub class_reps: Vec<Vec<Rat>>,
    bnd: Subspace,
}

impl CohomologyData {
    pub fn dim(&self) -> usize {
        self.class_reps.len()
    }

    pub fn is_cocycle(&self, v: &[Rat]) -> bool {
        if self.space_dim == 0 {
            return v.iter().all(|c| c.is_zero());
        }
        self.d_here
            .mul_vec(v)
            .map(|w| w.iter().all(|c| c.is_zero()))
            .unwrap_or(false)
    }

    pub fn is_coboundary(&self, v: &[Rat]) -> bool {
        self.bnd.contains(v)
    }

    /// Coordinates of a cocycle's class in the chosen complement basis.
    pub fn class_coords(&self, v: &[Rat]) -> Result<Vec<Rat>> {
        if !self.is_cocycle(v) {
            return Err(Error::Precondition(
                "class map applied to a non-cocycle".into(),
            ));
        }
        if self.class_reps.is_empty() {
            return Ok(Vec::new());
        }
        let mut cols = self.coboundaries.clone();
        cols.extend(self.class_reps.iter().cloned());
        let m = QMatrix::from_cols(cols);
        let x = m
            .solve(v)?
            .expect("cocycle must lie in coboundaries + representatives");
        Ok(x[self.coboundaries.len()..].to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::int;

    /// Abelian two-term complex `u -> v` with `d(u) = v`.
    pub fn abelian_two_term() -> DGLieAlgebra {
        let space = GradedSpace::new(vec![(0, vec!["u".into()]), (1, vec!["v".into()])]).unwrap();
        let mut differential = BTreeMap::new();
        differential.insert(0, QMatrix::from_rows(vec![vec![int(1)]]));
        DGLieAlgebra::new(RawDGLA {
            space,
            differential,
            bracket: BTreeMap::new(),
        })
        .unwrap()
    }

    /// `[v, v] = 2w` in odd degree, zero differential.
    pub fn square_algebra() -> DGLieAlgebra {
        let space = GradedSpace::new(vec![(1, vec!["v".into()]), (2, vec!["w".into()])]).unwrap();
        let mut bracket = BTreeMap::new();
        bracket.insert((0, 0), vec![(1, int(2))]);
        DGLieAlgebra::new(RawDGLA {
            space,
            differential: BTreeMap::new(),
            bracket,
        })
        .unwrap()
    }

    #[test]
    fn abelian_two_term_is_valid() {
        abelian_two_term();
    }

    #[test]
    fn odd_square_bracket_is_legal() {
        // Antisymmetry in odd degree allows [v, v] != 0.
        square_algebra();
    }

    #[test]
    fn broken_leibniz_is_reported() {
        // Same as square_algebra but with d(w) != 0, breaking Leibniz on (v, v):
        // d[v,v] = 2 d(w) != 0 while [dv, v] +- [v, dv] = 0.
        let space = GradedSpace::new(vec![
            (1, vec!["v".into()]),
            (2, vec!["w".into()]),
            (3, vec!["z".into()]),
        ])
        .unwrap();
        let mut bracket = BTreeMap::new();
        bracket.insert((0, 0), vec![(1, int(2))]);
        let mut differential = BTreeMap::new();
        differential.insert(2, QMatrix::from_rows(vec![vec![int(1)]]));
        let raw = RawDGLA {
            space,
            differential,
            bracket,
        };
        let report = raw.validate();
        assert!(!report.is_valid());
        assert!(report
            .violations
            .iter()
            .any(|v| v.axiom == Axiom::Leibniz
                && v.witness == vec!["v".to_string(), "v".to_string()]));
    }

    #[test]
    fn even_self_bracket_rejected() {
        let space = GradedSpace::new(vec![(0, vec!["x".into()])]).unwrap();
        let mut bracket = BTreeMap::new();
        bracket.insert((0, 0), vec![(0, int(1))]);
        let report = RawDGLA {
            space,
            differential: BTreeMap::new(),
            bracket,
        }
        .validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.axiom == Axiom::Antisymmetry));
    }

    #[test]
    fn d_squared_violation_reported() {
        let space = GradedSpace::new(vec![
            (0, vec!["a".into()]),
            (1, vec!["b".into()]),
            (2, vec!["c".into()]),
        ])
        .unwrap();
        let mut differential = BTreeMap::new();
        differential.insert(0, QMatrix::from_rows(vec![vec![int(1)]]));
        differential.insert(1, QMatrix::from_rows(vec![vec![int(1)]]));
        let report = RawDGLA {
            space,
            differential,
            bracket: BTreeMap::new(),
        }
        .validate();
        assert!(report.violations.iter().any(|v| v.axiom == Axiom::DSquared));
    }

    #[test]
    fn cohomology_of_acyclic_two_term() {
        let g = abelian_two_term();
        assert_eq!(g.cohomology(0).dim(), 0);
        assert_eq!(g.cohomology(1).dim(), 0);
        assert_eq!(g.cohomology(7).dim(), 0);
    }

    #[test]
    fn cohomology_zero_differential() {
        let g = square_algebra();
        assert_eq!(g.cohomology(1).dim(), 1);
        assert_eq!(g.cohomology(2).dim(), 1);
    }

    #[test]
    fn three_term_hand_count() {
        // 0 -> Q -> Q^2 -> Q -> 0 with d0 = (1,0)^T, d1 = (0,1): rank-1 maps,
        // d1 d0 = 0. H^0 = 0, H^1 = 0, H^2 = 0 by hand.
        let space = GradedSpace::new(vec![
            (0, vec!["a".into()]),
            (1, vec!["b1".into(), "b2".into()]),
            (2, vec!["c".into()]),
        ])
        .unwrap();
        let mut differential = BTreeMap::new();
        differential.insert(0, QMatrix::from_rows(vec![vec![int(1)], vec![int(0)]]));
        differential.insert(1, QMatrix::from_rows(vec![vec![int(0), int(1)]]));
        let g = DGLieAlgebra::new(RawDGLA {
            space,
            differential,
            bracket: BTreeMap::new(),
        })
        .unwrap();
        assert_eq!(g.cohomology(0).dim(), 0);
        assert_eq!(g.cohomology(1).dim(), 0);
        assert_eq!(g.cohomology(2).dim(), 0);
    }

    #[test]
    fn class_map_coordinates() {
        let g = square_algebra();
        let h1 = g.cohomology(1);
        assert_eq!(h1.dim(), 1);
        let coords = h1.class_coords(&[int(3)]).unwrap();
        assert_eq!(coords, vec![int(3)]);
    }

    #[test]
    fn cohomology_dimension_identity() {
        // dim H^i = dim Z^i - dim B^i, with coboundaries inside cocycles.
        use crate::linalg::in_span;
        let space = GradedSpace::new(vec![
            (0, vec!["a1".into(), "a2".into()]),
            (1, vec!["b1".into(), "b2".into(), "b3".into()]),
            (2, vec!["c1".into()]),
        ])
        .unwrap();
        let mut differential = BTreeMap::new();
        differential.insert(
            0,
            QMatrix::from_rows(vec![
                vec![int(1), int(0)],
                vec![int(0), int(0)],
                vec![int(2), int(0)],
            ]),
        );
        differential.insert(1, QMatrix::from_rows(vec![vec![int(-2), int(0), int(1)]]));
        let g = DGLieAlgebra::new(RawDGLA {
            space,
            differential,
            bracket: BTreeMap::new(),
        })
        .unwrap();
        for i in 0..=2 {
            let coh = g.cohomology(i);
            assert_eq!(coh.dim(), coh.cocycles.len() - coh.coboundaries.len());
            for b in &coh.coboundaries {
                assert!(in_span(b, &coh.cocycles));
            }
        }
    }

    #[test]
    fn quantum_type_windows() {
        let g = abelian_two_term();
        assert_eq!(g.classify_quantum_type(), QuantumType::Quantum);
        let space = GradedSpace::new(vec![(-2, vec!["m".into()]), (1, vec!["v".into()])]).unwrap();
        let g2 = DGLieAlgebra::new(RawDGLA {
            space,
            differential: BTreeMap::new(),
            bracket: BTreeMap::new(),
        })
        .unwrap();
        assert_eq!(g2.classify_quantum_type(), QuantumType::NotQuantum);
    }
}
