//! Curvature, Maurer-Cartan elements, the gauge group in logarithmic
//! coordinates, the adjoint and affine actions, twisted complexes, and
//! polynomial Maurer-Cartan paths in the `t` direction.

use crate::dgla::{ChainComplexQ, CohomologyData};
use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::nilpotent::{Element, NilpotentDGLA};
use crate::poly::QPoly;
use crate::rat::{self, Rat};
use num::Zero;
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

/// `cur(w) = d(w) + 1/2 [w, w]`, exact. The element is Maurer-Cartan iff
/// this vanishes.
pub fn curvature(omega: &Element) -> Result<Element> {
    if omega.degree() != 1 && !omega.is_zero() {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: omega.degree(),
        });
    }
    let half_sq = omega.bracket(omega)?.scale(&rat::frac(1, 2));
    omega.d().add(&half_sq)
}

/// A degree-1 element with exactly vanishing curvature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MCElement {
    value: Element,
}

impl MCElement {
    pub fn new(value: Element) -> Result<Self> {
        let cur = curvature(&value)?;
        if !cur.is_zero() {
            return Err(Error::NotMaurerCartan {
                terms: cur.num_terms(),
            });
        }
        Ok(MCElement { value })
    }

    pub fn zero(ambient: &NilpotentDGLA) -> Self {
        MCElement {
            value: ambient.zero(1),
        }
    }

    pub fn value(&self) -> &Element {
        &self.value
    }

    pub fn ambient(&self) -> &NilpotentDGLA {
        self.value.ambient()
    }

    pub fn restrict_to(&self, sub: &NilpotentDGLA) -> MCElement {
        // Truncation of an MC element stays MC: curvature commutes with
        // the quotient maps R_N -> R_j.
        MCElement {
            value: self.value.restrict_to(sub),
        }
    }
}

/// A gauge group element, stored by its logarithm in `m (x) g^0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeElement {
    log: Element,
}

impl GaugeElement {
    pub fn from_log(log: Element) -> Result<Self> {
        if log.degree() != 0 && !log.is_zero() {
            return Err(Error::DegreeMismatch {
                expected: 0,
                got: log.degree(),
            });
        }
        Ok(GaugeElement { log })
    }

    pub fn identity(ambient: &NilpotentDGLA) -> Self {
        GaugeElement {
            log: ambient.zero(0),
        }
    }

    pub fn log(&self) -> &Element {
        &self.log
    }

    pub fn ambient(&self) -> &NilpotentDGLA {
        self.log.ambient()
    }

    pub fn is_identity(&self) -> bool {
        self.log.is_zero()
    }

    pub fn inverse(&self) -> GaugeElement {
        GaugeElement {
            log: self.log.scale(&rat::int(-1)),
        }
    }

    /// Group product `self * other` via the Campbell-Baker-Hausdorff series.
    pub fn compose(&self, other: &GaugeElement) -> Result<GaugeElement> {
        Ok(GaugeElement {
            log: bch(&self.log, &other.log)?,
        })
    }

    pub fn restrict_to(&self, sub: &NilpotentDGLA) -> GaugeElement {
        GaugeElement {
            log: self.log.restrict_to(sub),
        }
    }
}

// ---------------------------------------------------------------------------
// Campbell-Baker-Hausdorff
// ---------------------------------------------------------------------------

/// Coefficient table for the CBH series truncated at word length `n`:
/// pairs (word over {0,1}, coefficient) such that
/// `log(exp x0 exp x1) = sum c_w * rb(w)` where `rb` is the right-nested
/// bracketing `[w_1, [w_2, [... w_len]]]`. Computed from the truncated free
/// associative algebra and the Dynkin projection; cached per order.
pub(crate) type CbhTable = Arc<Vec<(Vec<u8>, Rat)>>;

pub(crate) fn cbh_table(n: usize) -> CbhTable {
    static CACHE: OnceLock<Mutex<BTreeMap<usize, CbhTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(t) = guard.get(&n) {
        return t.clone();
    }

    type Series = BTreeMap<Vec<u8>, Rat>; // no constant term
    let mul = |a: &Series, b: &Series, n: usize| -> Series {
        let mut out = Series::new();
        for (wa, ca) in a {
            for (wb, cb) in b {
                if wa.len() + wb.len() > n {
                    continue;
                }
                let mut w = wa.clone();
                w.extend_from_slice(wb);
                let e = out.entry(w).or_insert_with(rat::zero);
                *e += ca * cb;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    };

    // E = exp(x0) exp(x1) - 1.
    let mut e = Series::new();
    for i in 0..=n {
        for j in 0..=n {
            if i + j == 0 || i + j > n {
                continue;
            }
            let mut w = vec![0u8; i];
            w.extend(std::iter::repeat_n(1u8, j));
            e.insert(
                w,
                rat::inv_factorial(i as u32) * rat::inv_factorial(j as u32),
            );
        }
    }

    // log(1 + E) = sum (-1)^(m+1)/m E^m.
    let mut log = Series::new();
    let mut power = e.clone();
    for m in 1..=n {
        let sign = if m % 2 == 1 { rat::one() } else { rat::int(-1) };
        let c = sign / rat::int(m as i64);
        for (w, cw) in &power {
            let entry = log.entry(w.clone()).or_insert_with(rat::zero);
            *entry += cw * &c;
        }
        if m < n {
            power = mul(&power, &e, n);
        }
    }
    log.retain(|_, c| !c.is_zero());

    // Dynkin projection: word of length l contributes with weight 1/l.
    let table: Vec<(Vec<u8>, Rat)> = log
        .into_iter()
        .map(|(w, c)| {
            let l = w.len() as i64;
            (w, c / rat::int(l))
        })
        .collect();
    let table = Arc::new(table);
    guard.insert(n, table.clone());
    table
}

/// `bch(a, b) = log(exp(a) exp(b))`, exact, truncated at the context order
/// (all deeper terms vanish by nilpotency).
pub fn bch(a: &Element, b: &Element) -> Result<Element> {
    if a.ambient() != b.ambient() {
        return Err(Error::ContextMismatch);
    }
    let n = a.ambient().order();
    let table = cbh_table(n);
    let mut out = a.ambient().zero(0);
    for (word, c) in table.iter() {
        // Right-nested bracketing evaluated at a, b.
        let pick = |i: u8| if i == 0 { a } else { b };
        let mut acc = pick(word[word.len() - 1]).clone();
        for &idx in word[..word.len() - 1].iter().rev() {
            acc = pick(idx).bracket(&acc)?;
            if acc.is_zero() {
                break;
            }
        }
        if !acc.is_zero() {
            out = out.add(&acc.scale(c))?;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Adjoint and affine actions
// ---------------------------------------------------------------------------

/// `Ad(g) = exp(ad(log g))` applied to an element of any degree. The sum is
/// finite by nilpotency.
pub fn ad_exp(g: &GaugeElement, alpha: &Element) -> Result<Element> {
    if g.ambient() != alpha.ambient() {
        return Err(Error::ContextMismatch);
    }
    let n = alpha.ambient().order();
    let mut out = alpha.clone();
    let mut power = alpha.clone();
    for i in 1..=n as u32 {
        power = g.log().bracket(&power)?;
        if power.is_zero() {
            break;
        }
        out = out.add(&power.scale(&rat::inv_factorial(i)))?;
    }
    Ok(out)
}

/// The affine gauge action on degree-1 elements:
/// `Af(g)(w) = exp(ad y)(w) - sum_{i>=0} ad(y)^i (d y) / (i+1)!`
/// for `y = log g`. Sends Maurer-Cartan elements to Maurer-Cartan elements.
pub fn af_action(g: &GaugeElement, omega: &Element) -> Result<Element> {
    if g.ambient() != omega.ambient() {
        return Err(Error::ContextMismatch);
    }
    if omega.degree() != 1 && !omega.is_zero() {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: omega.degree(),
        });
    }
    let n = omega.ambient().order();
    let mut out = ad_exp(g, omega)?;
    let dy = g.log().d();
    let mut power = dy;
    for i in 0..=n as u32 {
        if power.is_zero() {
            break;
        }
        out = out.sub(&power.scale(&rat::inv_factorial(i + 1)))?;
        power = g.log().bracket(&power)?;
    }
    Ok(out)
}

pub fn af_action_mc(g: &GaugeElement, omega: &MCElement) -> Result<MCElement> {
    MCElement::new(af_action(g, omega.value())?)
}

/// `d_w = d + ad(w)` applied to one element.
pub fn d_twisted(omega: &MCElement, alpha: &Element) -> Result<Element> {
    alpha.d().add(&omega.value().bracket(alpha)?)
}

// ---------------------------------------------------------------------------
// Twisted complexes
// ---------------------------------------------------------------------------

/// The complex `(m (x) g, d + ad(w))` as explicit Q-matrices, one per
/// degree of the window.
#[derive(Debug, Clone)]
pub struct TwistedComplex {
    twist: MCElement,
    complex: ChainComplexQ,
}

impl TwistedComplex {
    /// Rejects non-Maurer-Cartan twists. The square-zero property of the
    /// assembled matrices is verified exactly.
    pub fn from_element(omega: Element) -> Result<Self> {
        Self::new(MCElement::new(omega)?)
    }

    pub fn new(twist: MCElement) -> Result<Self> {
        let ambient = twist.ambient().clone();
        let (lo, hi) = ambient.algebra().space().window();
        let dims: Vec<usize> = (lo..=hi).map(|i| ambient.flat_dim(i)).collect();
        let mut mats = Vec::new();
        for i in lo..=hi {
            let rows = ambient.flat_dim(i + 1);
            let cols = ambient.flat_dim(i);
            let mut m = QMatrix::zero(rows, cols);
            for col in 0..cols {
                let (mono, local) = ambient.flat_unindex(i, col);
                let basis_el = ambient.term(i, mono, local, rat::one());
                let image = d_twisted(&twist, &basis_el)?;
                for ((mm, ll), c) in image.terms() {
                    m[(ambient.flat_index(i + 1, mm, ll), col)] = c.clone();
                }
            }
            mats.push(m);
        }
        let complex = ChainComplexQ::new(lo, dims, mats);
        assert!(
            complex.verify_square_zero(),
            "twisted differential must square to zero for a Maurer-Cartan twist"
        );
        Ok(TwistedComplex { twist, complex })
    }

    pub fn twist(&self) -> &MCElement {
        &self.twist
    }

    pub fn ambient(&self) -> &NilpotentDGLA {
        self.twist.ambient()
    }

    pub fn complex(&self) -> &ChainComplexQ {
        &self.complex
    }

    pub fn matrix(&self, degree: i32) -> QMatrix {
        self.complex.d_at(degree)
    }

    pub fn cohomology(&self, degree: i32) -> CohomologyData {
        self.complex.cohomology(degree)
    }
}

// ---------------------------------------------------------------------------
// Polynomials in t with element coefficients, and MC paths
// ---------------------------------------------------------------------------

/// Polynomial in `t` whose coefficients are degree-homogeneous elements of
/// `m (x) g`. Degree grows dynamically; everything is exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElemPoly {
    ambient: NilpotentDGLA,
    degree: i32,
    coeffs: Vec<Element>, // index = power of t, no trailing zeros
}

impl ElemPoly {
    pub fn zero(ambient: &NilpotentDGLA, degree: i32) -> Self {
        ElemPoly {
            ambient: ambient.clone(),
            degree,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(value: Element) -> Self {
        let ambient = value.ambient().clone();
        let degree = value.degree();
        let mut p = ElemPoly {
            ambient,
            degree,
            coeffs: vec![value],
        };
        p.normalize();
        p
    }

    pub fn from_coeffs(ambient: &NilpotentDGLA, degree: i32, coeffs: Vec<Element>) -> Self {
        for c in &coeffs {
            assert!(c.is_zero() || c.degree() == degree, "mixed degrees in path");
        }
        let mut p = ElemPoly {
            ambient: ambient.clone(),
            degree,
            coeffs,
        };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn ambient(&self) -> &NilpotentDGLA {
        &self.ambient
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn coeff(&self, i: usize) -> Element {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| self.ambient.zero(self.degree))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &ElemPoly) -> Result<ElemPoly> {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i).add(&other.coeff(i))?);
        }
        Ok(ElemPoly::from_coeffs(&self.ambient, self.degree, out))
    }

    pub fn sub(&self, other: &ElemPoly) -> Result<ElemPoly> {
        self.add(&other.scale(&rat::int(-1)))
    }

    pub fn scale(&self, c: &Rat) -> ElemPoly {
        ElemPoly::from_coeffs(
            &self.ambient,
            self.degree,
            self.coeffs.iter().map(|e| e.scale(c)).collect(),
        )
    }

    pub fn scale_qpoly(&self, p: &QPoly) -> ElemPoly {
        let mut out = ElemPoly::zero(&self.ambient, self.degree);
        if p.is_zero() {
            return out;
        }
        let deg = p.degree().unwrap();
        let mut coeffs = vec![self.ambient.zero(self.degree); self.coeffs.len() + deg];
        for (i, e) in self.coeffs.iter().enumerate() {
            for j in 0..=deg {
                let c = p.coeff(j);
                if !c.is_zero() {
                    coeffs[i + j] = coeffs[i + j].add(&e.scale(&c)).unwrap();
                }
            }
        }
        out.coeffs = coeffs;
        out.normalize();
        out
    }

    /// Pointwise bracket: `t` is even, so this is plain convolution.
    pub fn bracket(&self, other: &ElemPoly) -> Result<ElemPoly> {
        let target = self.degree + other.degree;
        if self.is_zero() || other.is_zero() {
            return Ok(ElemPoly::zero(&self.ambient, target));
        }
        let mut coeffs =
            vec![self.ambient.zero(target); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add(&a.bracket(b)?)?;
            }
        }
        Ok(ElemPoly::from_coeffs(&self.ambient, target, coeffs))
    }

    pub fn d(&self) -> ElemPoly {
        ElemPoly::from_coeffs(
            &self.ambient,
            self.degree + 1,
            self.coeffs.iter().map(|e| e.d()).collect(),
        )
    }

    pub fn derivative(&self) -> ElemPoly {
        if self.coeffs.len() <= 1 {
            return ElemPoly::zero(&self.ambient, self.degree);
        }
        ElemPoly::from_coeffs(
            &self.ambient,
            self.degree,
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, e)| e.scale(&rat::int(i as i64 + 1)))
                .collect(),
        )
    }

    /// Antiderivative vanishing at `t = 0`.
    pub fn integrate(&self) -> ElemPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![self.ambient.zero(self.degree)];
        for (i, e) in self.coeffs.iter().enumerate() {
            coeffs.push(e.scale(&(rat::one() / rat::int(i as i64 + 1))));
        }
        ElemPoly::from_coeffs(&self.ambient, self.degree, coeffs)
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, lambda: &Rat) -> Element {
        let mut acc = self.ambient.zero(self.degree);
        for e in self.coeffs.iter().rev() {
            acc = acc.scale(lambda).add(e).unwrap();
        }
        acc
    }
}

/// A polynomial Maurer-Cartan path: the element `w1(t) + w0(t) dt` of the
/// algebra extended by polynomial forms in `t`, stored by its two
/// components. `form_part` is the literal `dt`-coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MCPath {
    pub one_part: ElemPoly,  // degree-1 coefficients
    pub form_part: ElemPoly, // degree-0 coefficients
}

impl MCPath {
    /// Builds a path from the even/odd split of a polynomial form whose
    /// coefficients are elements (even part in degree 1, odd part the
    /// degree-0 `dt`-component).
    pub fn from_form(
        ambient: &NilpotentDGLA,
        form: crate::poly::PolyForm<Element>,
    ) -> Result<Self> {
        let one = ElemPoly::from_coeffs(ambient, 1, form.even_part);
        let dt = ElemPoly::from_coeffs(ambient, 0, form.odd_part);
        MCPath::new(one, dt)
    }

    pub fn into_form(self) -> crate::poly::PolyForm<Element> {
        crate::poly::PolyForm {
            even_part: (0..self.one_part.len())
                .map(|i| self.one_part.coeff(i))
                .collect(),
            odd_part: (0..self.form_part.len())
                .map(|i| self.form_part.coeff(i))
                .collect(),
        }
    }

    /// Checks the two component equations of the Maurer-Cartan condition:
    /// `cur(w1(t)) = 0` identically and `dw1/dt = d(w0) + [w1, w0]`.
    pub fn new(one_part: ElemPoly, form_part: ElemPoly) -> Result<Self> {
        let p = MCPath {
            one_part,
            form_part,
        };
        p.verify()?;
        Ok(p)
    }

    fn verify(&self) -> Result<()> {
        let cur = self.one_part.d().add(
            &self
                .one_part
                .bracket(&self.one_part)?
                .scale(&rat::frac(1, 2)),
        )?;
        if !cur.is_zero() {
            return Err(Error::Precondition(
                "path pure part does not satisfy the Maurer-Cartan equation".into(),
            ));
        }
        let lhs = self.one_part.derivative();
        let rhs = self
            .form_part
            .d()
            .add(&self.one_part.bracket(&self.form_part)?)?;
        if lhs != rhs {
            return Err(Error::Precondition(
                "path connection equation dw1/dt = d(w0) + [w1, w0] fails".into(),
            ));
        }
        Ok(())
    }

    pub fn ambient(&self) -> &NilpotentDGLA {
        self.one_part.ambient()
    }

    /// Evaluation `t -> lambda`; always a Maurer-Cartan element.
    pub fn eval(&self, lambda: &Rat) -> MCElement {
        MCElement::new(self.one_part.eval(lambda)).expect("path evaluation is Maurer-Cartan")
    }

    pub fn endpoint0(&self) -> MCElement {
        self.eval(&rat::zero())
    }

    pub fn endpoint1(&self) -> MCElement {
        self.eval(&rat::one())
    }
}

/// The path `w1(t) = Af(exp(t y))(w0)` traced out by a gauge logarithm,
/// with its `dt`-component. Satisfies `w1(0) = w0`, `w1(1) = Af(exp y)(w0)`.
pub fn path_from_gauge(gamma: &Element, omega0: &MCElement) -> Result<MCPath> {
    if gamma.ambient() != omega0.ambient() {
        return Err(Error::ContextMismatch);
    }
    if gamma.degree() != 0 && !gamma.is_zero() {
        return Err(Error::DegreeMismatch {
            expected: 0,
            got: gamma.degree(),
        });
    }
    let ambient = omega0.ambient().clone();
    let n = ambient.order();
    let dy = gamma.d();
    let mut coeffs: Vec<Element> = vec![omega0.value().clone()];
    // t^i coefficient: ad(y)^i(w0)/i! - ad(y)^(i-1)(dy)/i!
    let mut ad_omega = omega0.value().clone();
    let mut ad_dy = dy;
    for i in 1..=(n as u32 + 1) {
        ad_omega = gamma.bracket(&ad_omega)?;
        let mut c = ad_omega.scale(&rat::inv_factorial(i));
        c = c.sub(&ad_dy.scale(&rat::inv_factorial(i)))?;
        ad_dy = gamma.bracket(&ad_dy)?;
        coeffs.push(c);
    }
    let one_part = ElemPoly::from_coeffs(&ambient, 1, coeffs);
    let form_part = ElemPoly::constant(gamma.scale(&rat::int(-1)));
    MCPath::new(one_part, form_part)
}

/// Integrates a Maurer-Cartan path to a gauge element `g` with
/// `Af(g)(w1(0)) = w1(1)`, by solving the flow `dg/dt = -w0(t) . g(t)`
/// order by order: the logarithm satisfies
/// `y'(t) = sum_k B_k/k! ad(y)^k(-w0)`, integrated exactly in `t`.
pub fn integrate_mc_path(path: &MCPath) -> Result<GaugeElement> {
    let ambient = path.ambient().clone();
    let n = ambient.order();
    let xi = path.form_part.scale(&rat::int(-1));
    let bern = rat::bernoulli(n);
    let mut gamma = ElemPoly::zero(&ambient, 0);
    // Each pass fixes one more order in m, so n passes suffice.
    for _ in 0..n {
        let mut rhs = xi.clone();
        let mut power = xi.clone();
        for (k, bk) in bern.iter().enumerate().skip(1) {
            power = gamma.bracket(&power)?;
            if power.is_zero() {
                break;
            }
            if !bk.is_zero() {
                let c = bk * rat::inv_factorial(k as u32);
                rhs = rhs.add(&power.scale(&c))?;
            }
        }
        gamma = rhs.integrate();
    }
    let g = GaugeElement::from_log(gamma.eval(&rat::one()))?;
    let transported = af_action(&g, &path.one_part.eval(&rat::zero()))?;
    assert_eq!(
        transported,
        path.one_part.eval(&rat::one()),
        "flow integration must transport the left endpoint to the right endpoint"
    );
    Ok(g)
}
