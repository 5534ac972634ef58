//! Morphisms of DG Lie algebras, checked at construction, and the induced
//! maps on cohomology.

use crate::dgla::{CohomologyData, DGLieAlgebra};
use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::rat::{self, Rat};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct DGLAMorphism {
    source: DGLieAlgebra,
    target: DGLieAlgebra,
    components: BTreeMap<i32, QMatrix>,
}

impl DGLAMorphism {
    /// Builds a morphism, verifying compatibility with differentials and
    /// brackets on all basis pairs.
    pub fn new(
        source: DGLieAlgebra,
        target: DGLieAlgebra,
        components: BTreeMap<i32, QMatrix>,
    ) -> Result<Self> {
        for (&i, m) in &components {
            if m.rows() != target.space().dim(i) || m.cols() != source.space().dim(i) {
                return Err(Error::DimensionMismatch(format!(
                    "component at degree {i}: {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    target.space().dim(i),
                    source.space().dim(i)
                )));
            }
        }
        let phi = DGLAMorphism {
            source,
            target,
            components,
        };
        let (lo, hi) = phi.source.space().window();
        // Chain map.
        for i in lo..=hi {
            for l in 0..phi.source.space().dim(i) {
                let mut v = vec![rat::zero(); phi.source.space().dim(i)];
                v[l] = rat::one();
                let a = phi.apply(i + 1, &phi.source.d_vec(i, &v));
                let b = phi.target.d_vec(i, &phi.apply(i, &v));
                if a != b {
                    return Err(Error::Precondition(format!(
                        "morphism does not commute with d on {} (degree {i})",
                        phi.source.space().name(i, l)
                    )));
                }
            }
        }
        // Bracket preservation on basis pairs.
        let n = phi.source.space().total_dim();
        for x in 0..n {
            for y in x..n {
                let (dx, lx) = phi.source.space().degree_of_global(x);
                let (dy, ly) = phi.source.space().degree_of_global(y);
                let mut vx = vec![rat::zero(); phi.source.space().dim(dx)];
                vx[lx] = rat::one();
                let mut vy = vec![rat::zero(); phi.source.space().dim(dy)];
                vy[ly] = rat::one();
                let lhs = phi.apply(dx + dy, &phi.source.bracket_vec(dx, &vx, dy, &vy));
                let rhs = phi
                    .target
                    .bracket_vec(dx, &phi.apply(dx, &vx), dy, &phi.apply(dy, &vy));
                if lhs != rhs {
                    return Err(Error::Precondition(format!(
                        "morphism does not preserve the bracket on ({}, {})",
                        phi.source.space().global_name(x),
                        phi.source.space().global_name(y)
                    )));
                }
            }
        }
        Ok(phi)
    }

    pub fn identity(g: &DGLieAlgebra) -> Self {
        let mut components = BTreeMap::new();
        for i in g.space().degrees() {
            components.insert(i, QMatrix::identity(g.space().dim(i)));
        }
        DGLAMorphism {
            source: g.clone(),
            target: g.clone(),
            components,
        }
    }

    pub fn source(&self) -> &DGLieAlgebra {
        &self.source
    }

    pub fn target(&self) -> &DGLieAlgebra {
        &self.target
    }

    pub fn component(&self, degree: i32) -> QMatrix {
        match self.components.get(&degree) {
            Some(m) => m.clone(),
            None => QMatrix::zero(
                self.target.space().dim(degree),
                self.source.space().dim(degree),
            ),
        }
    }

    pub fn components(&self) -> &BTreeMap<i32, QMatrix> {
        &self.components
    }

    pub fn apply(&self, degree: i32, v: &[Rat]) -> Vec<Rat> {
        self.component(degree).mul_vec(v).expect("degree dims")
    }

    /// Matrix of `H^i(phi)` with respect to the chosen class representatives
    /// of source and target.
    pub fn induced_on_h(&self, degree: i32) -> (QMatrix, CohomologyData, CohomologyData) {
        let src = self.source.cohomology(degree);
        let tgt = self.target.cohomology(degree);
        let m = induced_h_matrix(&src, &tgt, |v| self.apply(degree, v));
        (m, src, tgt)
    }

    /// True iff `H^i(phi)` is bijective in every degree of the union window.
    pub fn is_quasi_iso(&self) -> (bool, Vec<QuasiIsoDegree>) {
        let (slo, shi) = self.source.space().window();
        let (tlo, thi) = self.target.space().window();
        let lo = slo.min(tlo);
        let hi = shi.max(thi);
        let mut rows = Vec::new();
        let mut all = true;
        for i in lo..=hi {
            let (m, src, tgt) = self.induced_on_h(i);
            let bij = src.dim() == tgt.dim() && m.rank() == src.dim();
            all &= bij;
            rows.push(QuasiIsoDegree {
                degree: i,
                dim_source: src.dim(),
                dim_target: tgt.dim(),
                bijective: bij,
            });
        }
        (all, rows)
    }
}

#[derive(Debug, Clone)]
pub struct QuasiIsoDegree {
    pub degree: i32,
    pub dim_source: usize,
    pub dim_target: usize,
    pub bijective: bool,
}

/// Witness-based quasi-quantum-type check: the supplied morphism must be a
/// quasi-isomorphism onto a syntactically quantum-type algebra. No witness
/// search is attempted.
pub fn quasi_quantum_witnessed(phi: &DGLAMorphism) -> bool {
    phi.target().classify_quantum_type() == crate::dgla::QuantumType::Quantum
        && phi.is_quasi_iso().0
}

/// Matrix of the map induced on cohomology by a chain map, in the class
/// representative bases of both sides.
pub fn induced_h_matrix(
    src: &CohomologyData,
    tgt: &CohomologyData,
    apply: impl Fn(&[Rat]) -> Vec<Rat>,
) -> QMatrix {
    let cols: Vec<Vec<Rat>> = src
        .class_reps
        .iter()
        .map(|rep| {
            tgt.class_coords(&apply(rep))
                .expect("chain map must send cocycles to cocycles")
        })
        .collect();
    if cols.is_empty() {
        QMatrix::zero(tgt.dim(), 0)
    } else {
        QMatrix::from_cols(cols)
    }
}
