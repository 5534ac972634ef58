//! The nilpotent DG Lie algebra `m (x) g` induced by a truncation context,
//! and arithmetic on its (degree-homogeneous) elements.

use crate::dgla::DGLieAlgebra;
use crate::error::{Error, Result};
use crate::rat::{self, Rat};
use crate::trunc::{MonoIdx, TruncationContext};
use num::Zero;
use std::collections::BTreeMap;
use std::sync::Arc;

/// `m (x) g` for a validated DG Lie algebra and a truncation context.
/// Bracket and differential are extended R-multilinearly; every product is
/// truncated at the context order.
#[derive(Debug, Clone)]
pub struct NilpotentDGLA {
    algebra: DGLieAlgebra,
    ctx: Arc<TruncationContext>,
}

impl PartialEq for NilpotentDGLA {
    fn eq(&self, other: &Self) -> bool {
        self.algebra == other.algebra && self.ctx == other.ctx
    }
}
impl Eq for NilpotentDGLA {}

impl NilpotentDGLA {
    pub fn new(algebra: DGLieAlgebra, ctx: Arc<TruncationContext>) -> Self {
        NilpotentDGLA { algebra, ctx }
    }

    pub fn algebra(&self) -> &DGLieAlgebra {
        &self.algebra
    }

    pub fn ctx(&self) -> &Arc<TruncationContext> {
        &self.ctx
    }

    pub fn order(&self) -> usize {
        self.ctx.order()
    }

    /// The same algebra over `R_j`, for order-by-order arguments.
    pub fn restrict(&self, j: usize) -> NilpotentDGLA {
        NilpotentDGLA {
            algebra: self.algebra.clone(),
            ctx: self.ctx.restrict(j),
        }
    }

    pub fn zero(&self, degree: i32) -> Element {
        Element {
            ambient: self.clone(),
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(&self, degree: i32, terms: Vec<(MonoIdx, usize, Rat)>) -> Result<Element> {
        let dim = self.algebra.space().dim(degree);
        let mut out = self.zero(degree);
        for (m, l, c) in terms {
            if m >= self.ctx.dim_m() || l >= dim {
                return Err(Error::Precondition(format!(
                    "term ({m}, {l}) out of range for degree {degree}"
                )));
            }
            out.add_term(m, l, c);
        }
        Ok(out)
    }

    /// Single term `c * mono (x) basis[local]`.
    pub fn term(&self, degree: i32, mono: MonoIdx, local: usize, c: Rat) -> Element {
        self.from_terms(degree, vec![(mono, local, c)])
            .expect("term in range")
    }

    /// Flattened Q-dimension of `m (x) g^degree`.
    pub fn flat_dim(&self, degree: i32) -> usize {
        self.ctx.dim_m() * self.algebra.space().dim(degree)
    }

    pub fn flat_index(&self, degree: i32, mono: MonoIdx, local: usize) -> usize {
        mono * self.algebra.space().dim(degree) + local
    }

    pub fn flat_unindex(&self, degree: i32, flat: usize) -> (MonoIdx, usize) {
        let dim = self.algebra.space().dim(degree);
        (flat / dim, flat % dim)
    }
}

/// A degree-homogeneous element of `m (x) g`, sparse over
/// (monomial, basis vector) pairs, with no stored zeros.
#[derive(Debug, Clone)]
pub struct Element {
    ambient: NilpotentDGLA,
    degree: i32,
    terms: BTreeMap<(MonoIdx, usize), Rat>,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.degree == other.degree && self.terms == other.terms
    }
}
impl Eq for Element {}

impl Element {
    pub fn ambient(&self) -> &NilpotentDGLA {
        &self.ambient
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((MonoIdx, usize), &Rat)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, mono: MonoIdx, local: usize) -> Rat {
        self.terms
            .get(&(mono, local))
            .cloned()
            .unwrap_or_else(rat::zero)
    }

    fn add_term(&mut self, mono: MonoIdx, local: usize, c: Rat) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((mono, local)).or_insert_with(rat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(mono, local));
        }
    }

    fn check_ambient(&self, other: &Element) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.check_ambient(other)?;
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        let mut out = if self.is_zero() && !other.is_zero() {
            other.ambient.zero(other.degree)
        } else {
            self.ambient.zero(self.degree)
        };
        for ((m, l), c) in self.terms.iter().chain(other.terms.iter()) {
            out.add_term(*m, *l, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.add(&other.scale(&rat::int(-1)))
    }

    pub fn scale(&self, c: &Rat) -> Element {
        let mut out = self.ambient.zero(self.degree);
        if c.is_zero() {
            return out;
        }
        for ((m, l), t) in &self.terms {
            out.terms.insert((*m, *l), t * c);
        }
        out
    }

    /// R-multilinear bracket, truncated at the context order.
    pub fn bracket(&self, other: &Element) -> Result<Element> {
        self.check_ambient(other)?;
        let alg = self.ambient.algebra().raw();
        let sp = alg.space.clone();
        let ctx = self.ambient.ctx();
        let target = self.degree + other.degree;
        let mut out = self.ambient.zero(target);
        for ((ma, la), ca) in &self.terms {
            let ga = sp.global(self.degree, *la);
            for ((mb, lb), cb) in &other.terms {
                let Some(m) = ctx.mono_mul(*ma, *mb) else {
                    continue;
                };
                let gb = sp.global(other.degree, *lb);
                for (gz, cz) in alg.bracket_basis(ga, gb) {
                    let (_, lz) = sp.degree_of_global(gz);
                    out.add_term(m, lz, ca * cb * &cz);
                }
            }
        }
        Ok(out)
    }

    /// The differential, applied coefficientwise.
    pub fn d(&self) -> Element {
        let alg = self.ambient.algebra();
        let dm = alg.d_matrix(self.degree);
        let mut out = self.ambient.zero(self.degree + 1);
        for ((m, l), c) in &self.terms {
            for row in 0..dm.rows() {
                let entry = &dm[(row, *l)];
                if !entry.is_zero() {
                    out.add_term(*m, row, c * entry);
                }
            }
        }
        out
    }

    /// Smallest total monomial degree appearing, or None for zero.
    pub fn min_m_degree(&self) -> Option<usize> {
        self.terms
            .keys()
            .map(|(m, _)| self.ambient.ctx().mono_degree(*m))
            .min()
    }

    /// The part supported on monomials of degree exactly `j`.
    pub fn layer(&self, j: usize) -> Element {
        let mut out = self.ambient.zero(self.degree);
        for ((m, l), c) in &self.terms {
            if self.ambient.ctx().mono_degree(*m) == j {
                out.terms.insert((*m, *l), c.clone());
            }
        }
        out
    }

    /// Drop all monomials of degree > j (stay in the same context).
    pub fn truncate_above(&self, j: usize) -> Element {
        let mut out = self.ambient.zero(self.degree);
        for ((m, l), c) in &self.terms {
            if self.ambient.ctx().mono_degree(*m) <= j {
                out.terms.insert((*m, *l), c.clone());
            }
        }
        out
    }

    /// Image in the order-`j` restriction of the ambient algebra.
    pub fn restrict_to(&self, sub: &NilpotentDGLA) -> Element {
        assert_eq!(sub.algebra(), self.ambient.algebra());
        assert!(sub.order() <= self.ambient.order());
        let mut out = sub.zero(self.degree);
        for ((m, l), c) in &self.terms {
            if let Some(idx) = sub.ctx().lookup(self.ambient.ctx().monomial(*m)) {
                out.terms.insert((idx, *l), c.clone());
            }
        }
        out
    }

    /// Reinterpret in a higher-order context (coefficients unchanged).
    pub fn extend_to(&self, big: &NilpotentDGLA) -> Element {
        assert_eq!(big.algebra(), self.ambient.algebra());
        assert!(big.order() >= self.ambient.order());
        let mut out = big.zero(self.degree);
        for ((m, l), c) in &self.terms {
            let idx = big
                .ctx()
                .lookup(self.ambient.ctx().monomial(*m))
                .expect("low-order monomial exists upstairs");
            out.terms.insert((idx, *l), c.clone());
        }
        out
    }

    /// Image under `1 (x) phi` in the target algebra over the same context.
    pub fn map_via(&self, phi: &crate::morphism::DGLAMorphism, target: &NilpotentDGLA) -> Element {
        assert_eq!(
            phi.source(),
            self.ambient.algebra(),
            "element not in source"
        );
        assert_eq!(phi.target(), target.algebra(), "target ambient mismatch");
        assert_eq!(self.ambient.ctx(), target.ctx(), "context mismatch");
        let comp = phi.component(self.degree);
        let mut out = target.zero(self.degree);
        for ((m, l), c) in &self.terms {
            for row in 0..comp.rows() {
                let entry = &comp[(row, *l)];
                if !entry.is_zero() {
                    out.add_term(*m, row, c * entry);
                }
            }
        }
        out
    }

    pub fn to_flat(&self) -> Vec<Rat> {
        let mut v = vec![rat::zero(); self.ambient.flat_dim(self.degree)];
        for ((m, l), c) in &self.terms {
            v[self.ambient.flat_index(self.degree, *m, *l)] = c.clone();
        }
        v
    }

    pub fn from_flat(ambient: &NilpotentDGLA, degree: i32, v: &[Rat]) -> Element {
        assert_eq!(v.len(), ambient.flat_dim(degree));
        let mut out = ambient.zero(degree);
        for (i, c) in v.iter().enumerate() {
            if !c.is_zero() {
                let (m, l) = ambient.flat_unindex(degree, i);
                out.terms.insert((m, l), c.clone());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgla::{DGLieAlgebra, RawDGLA};
    use crate::graded::GradedSpace;
    use crate::linalg::QMatrix;
    use crate::rat::int;

    fn abelian_two_term() -> DGLieAlgebra {
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

    fn square_algebra() -> DGLieAlgebra {
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
    fn bracket_truncation() {
        // [h x, h y] dies at order 1 and survives at order 2.
        let g = square_algebra();
        let a1 = NilpotentDGLA::new(g.clone(), TruncationContext::new(1, 1));
        let x = a1.term(1, a1.ctx().param(0), 0, int(1));
        assert!(x.bracket(&x).unwrap().is_zero());

        let a2 = NilpotentDGLA::new(g, TruncationContext::new(1, 2));
        let x = a2.term(1, a2.ctx().param(0), 0, int(1));
        let b = x.bracket(&x).unwrap();
        assert_eq!(b.degree(), 2);
        let h2 = a2.ctx().lookup(&[2]).unwrap();
        assert_eq!(b.coeff(h2, 0), int(2));
    }

    #[test]
    fn differential_acts_coefficientwise() {
        let g = abelian_two_term();
        let amb = NilpotentDGLA::new(g, TruncationContext::new(1, 1));
        let hu = amb.term(0, amb.ctx().param(0), 0, int(1));
        let d = hu.d();
        assert_eq!(d.degree(), 1);
        assert_eq!(d.coeff(amb.ctx().param(0), 0), int(1));
    }

    #[test]
    fn restriction_commutes_with_bracket_and_d() {
        let g = square_algebra();
        let amb = NilpotentDGLA::new(g, TruncationContext::new(2, 3));
        let sub = amb.restrict(2);
        let x = amb
            .from_terms(
                1,
                vec![
                    (amb.ctx().param(0), 0, int(2)),
                    (amb.ctx().param(1), 0, int(-1)),
                ],
            )
            .unwrap();
        let y = amb.term(1, amb.ctx().param(0), 0, int(3));
        let b_then_r = x.bracket(&y).unwrap().restrict_to(&sub);
        let r_then_b = x.restrict_to(&sub).bracket(&y.restrict_to(&sub)).unwrap();
        assert_eq!(b_then_r, r_then_b);
        assert_eq!(x.d().restrict_to(&sub), x.restrict_to(&sub).d());
    }

    #[test]
    fn flat_roundtrip() {
        let g = square_algebra();
        let amb = NilpotentDGLA::new(g, TruncationContext::new(2, 2));
        let x = amb
            .from_terms(1, vec![(0, 0, int(5)), (3, 0, int(-2))])
            .unwrap();
        let v = x.to_flat();
        assert_eq!(Element::from_flat(&amb, 1, &v), x);
    }
}
