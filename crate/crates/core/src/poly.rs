//! Exact polynomials in one variable `t`, and the even/odd split used for
//! polynomial differential forms (the odd part is the `dt`-component).

use crate::rat::{self, Rat};
use num::Zero;

/// Polynomial over Q, coefficient of `t^i` at index `i`. No trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QPoly {
    coeffs: Vec<Rat>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        let mut p = QPoly { coeffs };
        p.normalize();
        p
    }

    pub fn constant(c: Rat) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn t() -> Self {
        Self::from_coeffs(vec![rat::zero(), rat::one()])
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(rat::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        QPoly::from_coeffs((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::from_coeffs(out)
    }

    pub fn scale(&self, c: &Rat) -> QPoly {
        QPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn eval(&self, lambda: &Rat) -> Rat {
        let mut acc = rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * lambda + c;
        }
        acc
    }

    pub fn derivative(&self) -> QPoly {
        if self.coeffs.len() <= 1 {
            return QPoly::zero();
        }
        QPoly::from_coeffs(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * rat::int(i as i64 + 1))
                .collect(),
        )
    }
}

/// Antiderivative with zero constant term.
pub fn poly_integrate(p: &QPoly) -> QPoly {
    if p.is_zero() {
        return QPoly::zero();
    }
    let mut out = vec![rat::zero(); p.coeffs.len() + 1];
    for (i, c) in p.coeffs.iter().enumerate() {
        out[i + 1] = c / rat::int(i as i64 + 1);
    }
    QPoly::from_coeffs(out)
}

/// A polynomial differential form with coefficients in an arbitrary space:
/// `even_part(t) + odd_part(t) dt`. The odd part carries homological degree
/// +1 relative to its coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyForm<T> {
    pub even_part: Vec<T>,
    pub odd_part: Vec<T>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};
    use proptest::prelude::*;

    #[test]
    fn integrate_basics() {
        assert!(poly_integrate(&QPoly::zero()).is_zero());
        assert_eq!(poly_integrate(&QPoly::constant(int(1))), QPoly::t());
        // 3t^2 -> t^3, checked by differentiating back
        let p = QPoly::from_coeffs(vec![int(0), int(0), int(3)]);
        let ip = poly_integrate(&p);
        assert_eq!(ip, QPoly::from_coeffs(vec![int(0), int(0), int(0), int(1)]));
        assert_eq!(ip.derivative(), p);
    }

    #[test]
    fn eval_exact() {
        // (2t^2 - 1/2) at t = 3/2 is 4.
        let p = QPoly::from_coeffs(vec![frac(-1, 2), int(0), int(2)]);
        assert_eq!(p.eval(&frac(3, 2)), int(4));
    }

    proptest! {
        #[test]
        fn integrate_then_differentiate_is_identity(coeffs in proptest::collection::vec(-9i64..=9, 0..6)) {
            let p = QPoly::from_coeffs(coeffs.into_iter().map(int).collect());
            prop_assert_eq!(poly_integrate(&p).derivative(), p);
        }

        #[test]
        fn mul_commutes(a in proptest::collection::vec(-5i64..=5, 0..4),
                        b in proptest::collection::vec(-5i64..=5, 0..4)) {
            let pa = QPoly::from_coeffs(a.into_iter().map(int).collect());
            let pb = QPoly::from_coeffs(b.into_iter().map(int).collect());
            prop_assert_eq!(pa.mul(&pb), pb.mul(&pa));
        }
    }
}
