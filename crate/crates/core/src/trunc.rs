//! The truncated parameter algebra `Q[h_1..h_k] / m^(N+1)` and its elements.
//!
//! Monomials `h^a` with `1 <= |a| <= N` form a basis of the maximal ideal
//! over Q, enumerated in graded lexicographic order. The order is fixed
//! globally so serialized elements are canonical and comparable bit-exactly.

use crate::error::{Error, Result};
use crate::rat::{self, Rat};
use num::Zero;
use std::collections::BTreeMap;
use std::sync::Arc;

pub type MonoIdx = usize;

#[derive(Debug)]
pub struct TruncationContext {
    num_params: usize,
    order: usize,
    monomials: Vec<Vec<u32>>, // degree 1..=order, graded lex
    index: BTreeMap<Vec<u32>, MonoIdx>,
    degrees: Vec<usize>,
}

impl PartialEq for TruncationContext {
    fn eq(&self, other: &Self) -> bool {
        self.num_params == other.num_params && self.order == other.order
    }
}
impl Eq for TruncationContext {}

impl TruncationContext {
    pub fn new(num_params: usize, order: usize) -> Arc<Self> {
        assert!(num_params >= 1, "need at least one parameter");
        assert!(order >= 1, "truncation order must be positive");
        let mut monomials = Vec::new();
        for deg in 1..=order {
            let mut level = Vec::new();
            enumerate_degree(
                num_params,
                deg as u32,
                &mut vec![0; num_params],
                0,
                &mut level,
            );
            // Graded lex: within a degree, larger exponent on earlier
            // variables first.
            level.sort_by(|a, b| b.cmp(a));
            monomials.extend(level);
        }
        let index = monomials
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        let degrees = monomials
            .iter()
            .map(|m| m.iter().sum::<u32>() as usize)
            .collect();
        Arc::new(TruncationContext {
            num_params,
            order,
            monomials,
            index,
            degrees,
        })
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim_m(&self) -> usize {
        self.monomials.len()
    }

    pub fn monomial(&self, idx: MonoIdx) -> &[u32] {
        &self.monomials[idx]
    }

    pub fn mono_degree(&self, idx: MonoIdx) -> usize {
        self.degrees[idx]
    }

    pub fn lookup(&self, expo: &[u32]) -> Option<MonoIdx> {
        self.index.get(expo).copied()
    }

    /// Index of `h_i` itself.
    pub fn param(&self, i: usize) -> MonoIdx {
        let mut e = vec![0u32; self.num_params];
        e[i] = 1;
        self.index[&e]
    }

    /// Product of two monomials; `None` once the degree exceeds the order.
    pub fn mono_mul(&self, a: MonoIdx, b: MonoIdx) -> Option<MonoIdx> {
        if self.degrees[a] + self.degrees[b] > self.order {
            return None;
        }
        let e: Vec<u32> = self.monomials[a]
            .iter()
            .zip(&self.monomials[b])
            .map(|(x, y)| x + y)
            .collect();
        self.lookup(&e)
    }

    /// Indices of the monomials of degree exactly `j` (the socle layer basis
    /// when `j` equals the order).
    pub fn layer(&self, j: usize) -> Vec<MonoIdx> {
        (0..self.dim_m())
            .filter(|&i| self.degrees[i] == j)
            .collect()
    }

    /// The same parameters at a lower order. Monomials of degree <= j keep
    /// their indices (the enumeration is degree-major), which `restrict`ed
    /// elements rely on.
    pub fn restrict(self: &Arc<Self>, j: usize) -> Arc<TruncationContext> {
        assert!(j >= 1 && j <= self.order);
        let sub = TruncationContext::new(self.num_params, j);
        debug_assert!(sub
            .monomials
            .iter()
            .zip(&self.monomials)
            .all(|(a, b)| a == b));
        sub
    }
}

fn enumerate_degree(
    k: usize,
    deg: u32,
    current: &mut Vec<u32>,
    pos: usize,
    out: &mut Vec<Vec<u32>>,
) {
    if pos == k - 1 {
        current[pos] = deg;
        out.push(current.clone());
        current[pos] = 0;
        return;
    }
    for d in 0..=deg {
        current[pos] = d;
        enumerate_degree(k, deg - d, current, pos + 1, out);
    }
    current[pos] = 0;
}

/// Whether a series element represents an element of the full algebra `R`
/// (constant term allowed) or of its maximal ideal `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    RElement,
    MElement,
}

/// An element of `R` or of `m`, with no stored zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesElement {
    ctx: Arc<TruncationContext>,
    kind: SeriesKind,
    constant: Rat,
    coeffs: BTreeMap<MonoIdx, Rat>,
}

impl SeriesElement {
    pub fn zero(ctx: &Arc<TruncationContext>, kind: SeriesKind) -> Self {
        SeriesElement {
            ctx: ctx.clone(),
            kind,
            constant: rat::zero(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: &Arc<TruncationContext>, c: Rat) -> Self {
        let mut s = Self::zero(ctx, SeriesKind::RElement);
        s.constant = c;
        s
    }

    pub fn from_terms(
        ctx: &Arc<TruncationContext>,
        kind: SeriesKind,
        constant: Rat,
        terms: Vec<(MonoIdx, Rat)>,
    ) -> Result<Self> {
        if kind == SeriesKind::MElement && !constant.is_zero() {
            return Err(Error::Precondition(
                "m-element with nonzero constant term".into(),
            ));
        }
        let mut coeffs = BTreeMap::new();
        for (m, c) in terms {
            if m >= ctx.dim_m() {
                return Err(Error::Precondition(format!(
                    "monomial index {m} out of range"
                )));
            }
            if !c.is_zero() {
                let e = coeffs.entry(m).or_insert_with(rat::zero);
                *e += c;
            }
        }
        coeffs.retain(|_, c: &mut Rat| !c.is_zero());
        Ok(SeriesElement {
            ctx: ctx.clone(),
            kind,
            constant,
            coeffs,
        })
    }

    pub fn ctx(&self) -> &Arc<TruncationContext> {
        &self.ctx
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn constant_term(&self) -> &Rat {
        &self.constant
    }

    pub fn coeff(&self, m: MonoIdx) -> Rat {
        self.coeffs.get(&m).cloned().unwrap_or_else(rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (MonoIdx, &Rat)> {
        self.coeffs.iter().map(|(m, c)| (*m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.coeffs.is_empty()
    }

    fn check_ctx(&self, other: &SeriesElement) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &SeriesElement) -> Result<SeriesElement> {
        self.check_ctx(other)?;
        let kind = if self.kind == SeriesKind::MElement && other.kind == SeriesKind::MElement {
            SeriesKind::MElement
        } else {
            SeriesKind::RElement
        };
        let mut out = self.clone();
        out.kind = kind;
        out.constant += &other.constant;
        for (m, c) in &other.coeffs {
            let e = out.coeffs.entry(*m).or_insert_with(rat::zero);
            *e += c;
        }
        out.coeffs.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    /// Product in `R/m^(N+1)`: monomials past the truncation order vanish.
    pub fn mul(&self, other: &SeriesElement) -> Result<SeriesElement> {
        self.check_ctx(other)?;
        let kind = if self.kind == SeriesKind::MElement || other.kind == SeriesKind::MElement {
            SeriesKind::MElement
        } else {
            SeriesKind::RElement
        };
        let mut out = SeriesElement::zero(&self.ctx, kind);
        out.constant = &self.constant * &other.constant;
        for (m, c) in &self.coeffs {
            if !other.constant.is_zero() {
                let e = out.coeffs.entry(*m).or_insert_with(rat::zero);
                *e += c * &other.constant;
            }
        }
        for (m, c) in &other.coeffs {
            if !self.constant.is_zero() {
                let e = out.coeffs.entry(*m).or_insert_with(rat::zero);
                *e += c * &self.constant;
            }
        }
        for (ma, ca) in &self.coeffs {
            for (mb, cb) in &other.coeffs {
                if let Some(m) = self.ctx.mono_mul(*ma, *mb) {
                    let e = out.coeffs.entry(m).or_insert_with(rat::zero);
                    *e += ca * cb;
                }
            }
        }
        out.coeffs.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    /// Image under `R_N -> R_j`: drop all monomials of degree > j.
    pub fn truncate_to(&self, sub: &Arc<TruncationContext>) -> SeriesElement {
        assert_eq!(sub.num_params(), self.ctx.num_params());
        assert!(sub.order() <= self.ctx.order());
        let mut out = SeriesElement::zero(sub, self.kind);
        out.constant = self.constant.clone();
        for (m, c) in &self.coeffs {
            if let Some(idx) = sub.lookup(self.ctx.monomial(*m)) {
                out.coeffs.insert(idx, c.clone());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::int;

    #[test]
    fn monomial_enumeration_graded_lex() {
        let ctx = TruncationContext::new(2, 2);
        let monos: Vec<&[u32]> = (0..ctx.dim_m()).map(|i| ctx.monomial(i)).collect();
        assert_eq!(
            monos,
            vec![
                &[1, 0][..],
                &[0, 1][..],
                &[2, 0][..],
                &[1, 1][..],
                &[0, 2][..]
            ]
        );
        assert!((0..ctx.dim_m()).all(|i| ctx.lookup(ctx.monomial(i)) == Some(i)));
    }

    fn hbar(ctx: &Arc<TruncationContext>, c: i64) -> SeriesElement {
        SeriesElement::from_terms(
            ctx,
            SeriesKind::MElement,
            rat::zero(),
            vec![(ctx.param(0), int(c))],
        )
        .unwrap()
    }

    #[test]
    fn truncation_kills_high_degree() {
        let ctx1 = TruncationContext::new(1, 1);
        let h = hbar(&ctx1, 1);
        assert!(h.mul(&h).unwrap().is_zero());

        let ctx2 = TruncationContext::new(1, 2);
        let h = hbar(&ctx2, 1);
        let sq = h.mul(&h).unwrap();
        let expected: Vec<u32> = vec![2];
        assert_eq!(ctx2.monomial(sq.terms().next().unwrap().0), &expected[..]);
    }

    #[test]
    fn geometric_inverse_hand_expansion() {
        // (1 + h)(1 - h + h^2) = 1 at order 2.
        let ctx = TruncationContext::new(1, 2);
        let h1 = ctx.param(0);
        let h2 = ctx.lookup(&[2]).unwrap();
        let a = SeriesElement::from_terms(&ctx, SeriesKind::RElement, int(1), vec![(h1, int(1))])
            .unwrap();
        let b = SeriesElement::from_terms(
            &ctx,
            SeriesKind::RElement,
            int(1),
            vec![(h1, int(-1)), (h2, int(1))],
        )
        .unwrap();
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod, SeriesElement::constant(&ctx, int(1)));
    }

    #[test]
    fn m_element_rejects_constant() {
        let ctx = TruncationContext::new(1, 2);
        assert!(SeriesElement::from_terms(&ctx, SeriesKind::MElement, int(1), vec![]).is_err());
    }

    #[test]
    fn restriction_is_prefix() {
        let ctx = TruncationContext::new(2, 4);
        let sub = ctx.restrict(2);
        for i in 0..sub.dim_m() {
            assert_eq!(sub.monomial(i), ctx.monomial(i));
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_series(ctx: &Arc<TruncationContext>, coins: &[(usize, i64)]) -> SeriesElement {
            let terms = coins
                .iter()
                .filter(|(m, _)| *m < ctx.dim_m())
                .map(|(m, c)| (*m, int(*c)))
                .collect();
            SeriesElement::from_terms(ctx, SeriesKind::RElement, int(1), terms).unwrap()
        }

        proptest! {
            #[test]
            fn mul_associative_commutative(
                a in proptest::collection::vec((0usize..9, -4i64..=4), 0..5),
                b in proptest::collection::vec((0usize..9, -4i64..=4), 0..5),
                c in proptest::collection::vec((0usize..9, -4i64..=4), 0..5),
            ) {
                let ctx = TruncationContext::new(2, 3);
                let (x, y, z) = (arb_series(&ctx, &a), arb_series(&ctx, &b), arb_series(&ctx, &c));
                prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
                prop_assert_eq!(
                    x.mul(&y).unwrap().mul(&z).unwrap(),
                    x.mul(&y.mul(&z).unwrap()).unwrap()
                );
            }

            #[test]
            fn truncation_is_algebra_homomorphism(
                a in proptest::collection::vec((0usize..9, -4i64..=4), 0..5),
                b in proptest::collection::vec((0usize..9, -4i64..=4), 0..5),
            ) {
                let ctx = TruncationContext::new(2, 3);
                let sub = ctx.restrict(2);
                let (x, y) = (arb_series(&ctx, &a), arb_series(&ctx, &b));
                let mul_then_truncate = x.mul(&y).unwrap().truncate_to(&sub);
                let truncate_then_mul = x.truncate_to(&sub).mul(&y.truncate_to(&sub)).unwrap();
                prop_assert_eq!(mul_then_truncate, truncate_then_mul);
                let add_then = x.add(&y).unwrap().truncate_to(&sub);
                let then_add = x.truncate_to(&sub).add(&y.truncate_to(&sub)).unwrap();
                prop_assert_eq!(add_then, then_add);
            }
        }
    }
}
