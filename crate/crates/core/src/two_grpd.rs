//! Crossed groupoids, the strict 2-groupoid they generate, the Deligne
//! instance with 2-cells from the exponential of the cokernel Lie algebra,
//! and the homotopy invariants of the resulting 2-groupoid.

use crate::deligne::{flat_component, MorphismSetup};
use crate::error::{Error, Result};
use crate::linalg::Subspace;
use crate::mc_gauge::{
    ad_exp, af_action, cbh_table, d_twisted, GaugeElement, MCElement, TwistedComplex,
};
use crate::morphism::induced_h_matrix;
use crate::nilpotent::{Element, NilpotentDGLA};
use crate::rat;
use crate::report::CheckReport;

/// A crossed module over a groupoid: a groupoid of 1-cells, a totally
/// disconnected groupoid of vertical cells on the same objects, a twisting
/// action, and a feedback morphism.
pub trait CrossedGroupoid {
    type Obj: Clone + PartialEq + std::fmt::Debug;
    type OneCell: Clone + std::fmt::Debug;
    type NCell: Clone + std::fmt::Debug;

    fn objects(&self) -> Vec<Self::Obj>;
    fn src(&self, f: &Self::OneCell) -> Self::Obj;
    fn tgt(&self, f: &Self::OneCell) -> Self::Obj;
    fn id1(&self, x: &Self::Obj) -> Self::OneCell;
    /// `g o f` (apply f first).
    fn compose1(&self, g: &Self::OneCell, f: &Self::OneCell) -> Self::OneCell;
    fn inv1(&self, f: &Self::OneCell) -> Self::OneCell;
    fn eq1(&self, a: &Self::OneCell, b: &Self::OneCell) -> bool;

    fn n_id(&self, x: &Self::Obj) -> Self::NCell;
    /// Group product `a o b` in the vertical group at `x` (apply b first).
    fn n_mul(&self, x: &Self::Obj, a: &Self::NCell, b: &Self::NCell) -> Self::NCell;
    fn n_inv(&self, x: &Self::Obj, a: &Self::NCell) -> Self::NCell;
    fn n_eq(&self, x: &Self::Obj, a: &Self::NCell, b: &Self::NCell) -> bool;

    /// The feedback `D : N(x) -> G(x)`.
    fn feedback(&self, x: &Self::Obj, a: &Self::NCell) -> Self::OneCell;
    /// The twisting `Psi(g) : N(src g) -> N(tgt g)`.
    fn twist(&self, g: &Self::OneCell, a: &Self::NCell) -> Self::NCell;
}

/// Validates the two crossed-groupoid conditions and the functoriality of
/// the feedback and twisting on the supplied samples.
pub fn validate_crossed<C: CrossedGroupoid>(
    c: &C,
    one_cells: &[C::OneCell],
    n_cells: &[(C::Obj, C::NCell)],
) -> CheckReport {
    let mut report = CheckReport::new("crossed-groupoid");
    for (gi, g) in one_cells.iter().enumerate() {
        for (ai, (x, a)) in n_cells.iter().enumerate() {
            if c.src(g) != *x {
                continue;
            }
            let sample = format!("cell#{gi}, vcell#{ai}");
            // (i) D(Psi(g)(a)) = g o D(a) o g^-1
            let lhs = c.feedback(&c.tgt(g), &c.twist(g, a));
            let rhs = c.compose1(&c.compose1(g, &c.feedback(x, a)), &c.inv1(g));
            report.record(
                "equivariance of feedback",
                sample.clone(),
                c.eq1(&lhs, &rhs),
            );
        }
    }
    for (ai, (x, a)) in n_cells.iter().enumerate() {
        for (bi, (y, b)) in n_cells.iter().enumerate() {
            if x != y {
                continue;
            }
            let sample = format!("vcell#{ai}, vcell#{bi}");
            // (ii) Psi(D(a)) = Ad_{N(x)}(a)
            let lhs = c.twist(&c.feedback(x, a), b);
            let rhs = c.n_mul(x, &c.n_mul(x, a, b), &c.n_inv(x, a));
            report.record("peiffer identity", sample.clone(), c.n_eq(x, &lhs, &rhs));
            // D is a homomorphism.
            let lhs = c.feedback(x, &c.n_mul(x, a, b));
            let rhs = c.compose1(&c.feedback(x, a), &c.feedback(x, b));
            report.record("feedback is a morphism", sample, c.eq1(&lhs, &rhs));
        }
    }
    for (gi, g) in one_cells.iter().enumerate() {
        for (hi, h) in one_cells.iter().enumerate() {
            if c.tgt(g) != c.src(h) {
                continue;
            }
            for (ai, (x, a)) in n_cells.iter().enumerate() {
                if c.src(g) != *x {
                    continue;
                }
                let sample = format!("cell#{hi} o cell#{gi} on vcell#{ai}");
                let lhs = c.twist(&c.compose1(h, g), a);
                let rhs = c.twist(h, &c.twist(g, a));
                report.record(
                    "twisting is functorial",
                    sample,
                    c.n_eq(&c.tgt(h), &lhs, &rhs),
                );
            }
        }
    }
    for (ai, (x, a)) in n_cells.iter().enumerate() {
        let lhs = c.twist(&c.id1(x), a);
        report.record(
            "twisting fixes identities",
            format!("vcell#{ai}"),
            c.n_eq(x, &lhs, a),
        );
    }
    report
}

/// A 2-morphism `a : f => g` with `g = f o D(a)`, in the 2-groupoid built
/// from a crossed groupoid.
#[derive(Debug, Clone)]
pub struct TwoCell<C: CrossedGroupoid> {
    pub src1: C::OneCell,
    pub tgt1: C::OneCell,
    pub cell: C::NCell,
}

/// The strict 2-groupoid associated to a crossed groupoid: vertical
/// composition is the (opposite) vertical group product, horizontal
/// composition twists by the inverse of the first 1-cell.
pub struct TwoGroupoid<'a, C: CrossedGroupoid> {
    pub base: &'a C,
}

impl<'a, C: CrossedGroupoid> TwoGroupoid<'a, C> {
    pub fn new(base: &'a C) -> Self {
        TwoGroupoid { base }
    }

    /// Builds `a : f => g`, checking the defining equation `g = f o D(a)`.
    pub fn two_cell(&self, f: C::OneCell, g: C::OneCell, a: C::NCell) -> Result<TwoCell<C>> {
        let x = self.base.src(&f);
        if self.base.src(&g) != x || self.base.tgt(&g) != self.base.tgt(&f) {
            return Err(Error::Precondition("parallel 1-cells required".into()));
        }
        let expect = self.base.compose1(&f, &self.base.feedback(&x, &a));
        if !self.base.eq1(&expect, &g) {
            return Err(Error::Precondition(
                "2-cell equation g = f o D(a) fails".into(),
            ));
        }
        Ok(TwoCell {
            src1: f,
            tgt1: g,
            cell: a,
        })
    }

    pub fn id2(&self, f: &C::OneCell) -> TwoCell<C> {
        TwoCell {
            src1: f.clone(),
            tgt1: f.clone(),
            cell: self.base.n_id(&self.base.src(f)),
        }
    }

    pub fn eq2(&self, a: &TwoCell<C>, b: &TwoCell<C>) -> bool {
        self.base.eq1(&a.src1, &b.src1)
            && self.base.eq1(&a.tgt1, &b.tgt1)
            && self.base.n_eq(&self.base.src(&a.src1), &a.cell, &b.cell)
    }

    /// `b * a : f => h` for `a : f => g`, `b : g => h`.
    pub fn vertical(&self, b: &TwoCell<C>, a: &TwoCell<C>) -> Result<TwoCell<C>> {
        if !self.base.eq1(&b.src1, &a.tgt1) {
            return Err(Error::Precondition("vertical cells not composable".into()));
        }
        let x = self.base.src(&a.src1);
        Ok(TwoCell {
            src1: a.src1.clone(),
            tgt1: b.tgt1.clone(),
            cell: self.base.n_mul(&x, &a.cell, &b.cell),
        })
    }

    pub fn vertical_inv(&self, a: &TwoCell<C>) -> TwoCell<C> {
        let x = self.base.src(&a.src1);
        TwoCell {
            src1: a.tgt1.clone(),
            tgt1: a.src1.clone(),
            cell: self.base.n_inv(&x, &a.cell),
        }
    }

    /// `a2 o a1 : f2 o f1 => g2 o g1`, with cell `Psi(f1^-1)(a2) o a1`.
    pub fn horizontal(&self, a2: &TwoCell<C>, a1: &TwoCell<C>) -> Result<TwoCell<C>> {
        if self.base.tgt(&a1.src1) != self.base.src(&a2.src1) {
            return Err(Error::Precondition(
                "horizontal cells not composable".into(),
            ));
        }
        let x0 = self.base.src(&a1.src1);
        let twisted = self.base.twist(&self.base.inv1(&a1.src1), &a2.cell);
        Ok(TwoCell {
            src1: self.base.compose1(&a2.src1, &a1.src1),
            tgt1: self.base.compose1(&a2.tgt1, &a1.tgt1),
            cell: self.base.n_mul(&x0, &twisted, &a1.cell),
        })
    }

    /// Horizontal inverse `1_(g^-1) o a^(-*) o 1_(f^-1) : f^-1 => g^-1`.
    pub fn horizontal_inv(&self, a: &TwoCell<C>) -> Result<TwoCell<C>> {
        let f_inv = self.base.inv1(&a.src1);
        let g_inv = self.base.inv1(&a.tgt1);
        let inner = self.horizontal(&self.vertical_inv(a), &self.id2(&f_inv))?;
        self.horizontal(&self.id2(&g_inv), &inner)
    }

    /// Checks the defining equation of a cell (used after compositions).
    pub fn is_coherent(&self, a: &TwoCell<C>) -> bool {
        let x = self.base.src(&a.src1);
        let expect = self
            .base
            .compose1(&a.src1, &self.base.feedback(&x, &a.cell));
        self.base.eq1(&expect, &a.tgt1)
    }

    /// Recovers the feedback of a cell through the identity-based formula:
    /// a 2-cell `a : 1_x => g` determines `g`.
    pub fn reconstruct_feedback(&self, x: &C::Obj, a: &C::NCell) -> Result<C::OneCell> {
        let g = self
            .base
            .compose1(&self.id1_cell(x), &self.base.feedback(x, a));
        Ok(g)
    }

    fn id1_cell(&self, x: &C::Obj) -> C::OneCell {
        self.base.id1(x)
    }

    /// Recovers the twisting through `1_f o a o 1_(f^-1)`.
    pub fn reconstruct_twist(&self, f: &C::OneCell, a: &C::NCell) -> Result<C::NCell> {
        let x = self.base.src(f);
        let d_a = self.base.feedback(&x, a);
        let cell_a = self.two_cell(self.base.id1(&x), d_a, a.clone())?;
        let right = self.horizontal(&cell_a, &self.id2(&self.base.inv1(f)))?;
        let total = self.horizontal(&self.id2(f), &right)?;
        Ok(total.cell)
    }
}

/// Exchange law `(b2 * a2) o (b1 * a1) = (b2 o b1) * (a2 o a1)` on a
/// quadruple of suitably composable cells.
pub fn exchange_holds<C: CrossedGroupoid>(
    g2: &TwoGroupoid<'_, C>,
    a1: &TwoCell<C>,
    b1: &TwoCell<C>,
    a2: &TwoCell<C>,
    b2: &TwoCell<C>,
) -> Result<bool> {
    let lhs = g2.horizontal(&g2.vertical(b2, a2)?, &g2.vertical(b1, a1)?)?;
    let rhs = g2.vertical(&g2.horizontal(b2, b1)?, &g2.horizontal(a2, a1)?)?;
    Ok(g2.eq2(&lhs, &rhs))
}

// ---------------------------------------------------------------------------
// The Deligne instance
// ---------------------------------------------------------------------------

/// Per-object data of the Deligne crossed groupoid: the cokernel of
/// `d_w : m (x) g^-2 -> m (x) g^-1` with pivot-complement canonical coset
/// representatives, and the maps built from it.
#[derive(Debug, Clone)]
pub struct CokerData {
    pub image: Subspace,
}

/// The Deligne crossed groupoid on a finite sampled object set. 1-cells are
/// verified gauge arrows between samples; vertical groups are exponentials
/// of the cokernel Lie algebras.
pub struct DeligneCrossed {
    ambient: NilpotentDGLA,
    objects: Vec<MCElement>,
    coker: Vec<CokerData>,
}

/// A verified gauge arrow between two sampled objects.
#[derive(Debug, Clone)]
pub struct DelOne {
    pub src: usize,
    pub tgt: usize,
    pub g: GaugeElement,
}

/// A vertical cell at an object: a canonical coset representative of the
/// cokernel in degree -1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelTwo {
    pub rep: Element,
}

impl DeligneCrossed {
    pub fn new(ambient: NilpotentDGLA, objects: Vec<MCElement>) -> Result<Self> {
        for o in &objects {
            if o.ambient() != &ambient {
                return Err(Error::ContextMismatch);
            }
        }
        let coker = objects
            .iter()
            .map(|omega| {
                let m = crate::deligne::d_omega_matrix(omega, -2);
                CokerData {
                    image: Subspace::from_spanning(ambient.flat_dim(-1), &m.image_basis()),
                }
            })
            .collect();
        Ok(DeligneCrossed {
            ambient,
            objects,
            coker,
        })
    }

    pub fn ambient(&self) -> &NilpotentDGLA {
        &self.ambient
    }

    pub fn object(&self, x: usize) -> &MCElement {
        &self.objects[x]
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn find_object(&self, omega: &MCElement) -> Option<usize> {
        self.objects.iter().position(|o| o == omega)
    }

    /// Canonical representative of `v + Im(d_w|_(-2))` at the object `x`.
    pub fn canonicalize(&self, x: usize, v: &Element) -> DelTwo {
        let flat = v.to_flat();
        let reduced = self.coker[x].image.reduce(&flat);
        DelTwo {
            rep: Element::from_flat(&self.ambient, -1, &reduced),
        }
    }

    /// The induced bracket `[a, b]_w = [d_w(a), b]` on canonical reps.
    pub fn coker_bracket(&self, x: usize, a: &DelTwo, b: &DelTwo) -> DelTwo {
        let omega = &self.objects[x];
        let da = d_twisted(omega, &a.rep).expect("same ambient");
        let br = da.bracket(&b.rep).expect("same ambient");
        self.canonicalize(x, &br)
    }

    /// Builds a verified arrow; the action equation is exact.
    pub fn arrow(&self, src: usize, g: GaugeElement) -> Result<DelOne> {
        let moved = af_action(&g, self.objects[src].value())?;
        let tgt = self
            .objects
            .iter()
            .position(|o| o.value() == &moved)
            .ok_or_else(|| {
                Error::Precondition("gauge image is not among the sampled objects".into())
            })?;
        Ok(DelOne { src, tgt, g })
    }

    /// Dimension of the vertical Lie algebra at `x` (the cokernel).
    pub fn coker_dim(&self, x: usize) -> usize {
        self.ambient.flat_dim(-1) - self.coker[x].image.dim()
    }

    /// Kernel of the feedback at `x`: canonical representatives killed by
    /// `d_w`, i.e. the abelian group underlying `pi_2`.
    pub fn pi2_basis(&self, x: usize) -> Vec<Element> {
        let omega = &self.objects[x];
        let free = self.coker[x].image.complement_coords();
        if free.is_empty() {
            return Vec::new();
        }
        let d1 = crate::deligne::d_omega_matrix(omega, -1);
        let embed =
            crate::linalg::QMatrix::from_fn(self.ambient.flat_dim(-1), free.len(), |i, j| {
                if free[j] == i {
                    rat::one()
                } else {
                    rat::zero()
                }
            });
        let composed = d1.mul(&embed).expect("dims");
        composed
            .kernel_basis()
            .into_iter()
            .map(|k| {
                let v = embed.mul_vec(&k).expect("dims");
                Element::from_flat(&self.ambient, -1, &v)
            })
            .collect()
    }
}

impl CrossedGroupoid for DeligneCrossed {
    type Obj = usize;
    type OneCell = DelOne;
    type NCell = DelTwo;

    fn objects(&self) -> Vec<usize> {
        (0..self.objects.len()).collect()
    }

    fn src(&self, f: &DelOne) -> usize {
        f.src
    }

    fn tgt(&self, f: &DelOne) -> usize {
        f.tgt
    }

    fn id1(&self, x: &usize) -> DelOne {
        DelOne {
            src: *x,
            tgt: *x,
            g: GaugeElement::identity(&self.ambient),
        }
    }

    fn compose1(&self, g: &DelOne, f: &DelOne) -> DelOne {
        assert_eq!(f.tgt, g.src, "1-cells not composable");
        DelOne {
            src: f.src,
            tgt: g.tgt,
            g: g.g.compose(&f.g).expect("same ambient"),
        }
    }

    fn inv1(&self, f: &DelOne) -> DelOne {
        DelOne {
            src: f.tgt,
            tgt: f.src,
            g: f.g.inverse(),
        }
    }

    fn eq1(&self, a: &DelOne, b: &DelOne) -> bool {
        a.src == b.src && a.tgt == b.tgt && a.g == b.g
    }

    fn n_id(&self, _x: &usize) -> DelTwo {
        DelTwo {
            rep: self.ambient.zero(-1),
        }
    }

    /// Group law of `exp(a_w)`: CBH evaluated with the induced bracket,
    /// re-canonicalized after every bracket.
    fn n_mul(&self, x: &usize, a: &DelTwo, b: &DelTwo) -> DelTwo {
        let n = self.ambient.order();
        let table = cbh_table(n);
        let mut acc = self.ambient.zero(-1);
        for (word, c) in table.iter() {
            let pick = |i: u8| if i == 0 { a } else { b };
            let mut cur = pick(word[word.len() - 1]).clone();
            let mut dead = false;
            for &idx in word[..word.len() - 1].iter().rev() {
                cur = self.coker_bracket(*x, pick(idx), &cur);
                if cur.rep.is_zero() {
                    dead = true;
                    break;
                }
            }
            if !dead {
                acc = acc.add(&cur.rep.scale(c)).expect("same ambient");
            }
        }
        self.canonicalize(*x, &acc)
    }

    fn n_inv(&self, x: &usize, a: &DelTwo) -> DelTwo {
        // exp(-a) inverts exp(a) since bch(a, -a) = 0 in any Lie algebra.
        self.canonicalize(*x, &a.rep.scale(&rat::int(-1)))
    }

    fn n_eq(&self, x: &usize, a: &DelTwo, b: &DelTwo) -> bool {
        self.canonicalize(*x, &a.rep) == self.canonicalize(*x, &b.rep)
    }

    /// `D_w = exp o d_w` on logarithms; lands in the stabilizer of `w`.
    fn feedback(&self, x: &usize, a: &DelTwo) -> DelOne {
        let omega = &self.objects[*x];
        let log = d_twisted(omega, &a.rep).expect("same ambient");
        DelOne {
            src: *x,
            tgt: *x,
            g: GaugeElement::from_log(log).expect("degree 0"),
        }
    }

    /// `Psi(g) = Ad(g)` on cokernel representatives.
    fn twist(&self, g: &DelOne, a: &DelTwo) -> DelTwo {
        let moved = ad_exp(&g.g, &a.rep).expect("same ambient");
        self.canonicalize(g.tgt, &moved)
    }
}

/// Assembles the Deligne crossed groupoid from sampled objects and gauges:
/// the object set is closed under the sampled actions, every verified arrow
/// is collected, and the axioms are checked on the resulting data.
pub fn build_deligne_crossed(
    ambient: &NilpotentDGLA,
    mc_samples: &[MCElement],
    gauge_samples: &[GaugeElement],
) -> Result<(DeligneCrossed, Vec<DelOne>, CheckReport)> {
    let mut objects: Vec<MCElement> = Vec::new();
    for o in mc_samples {
        if !objects.contains(o) {
            objects.push(o.clone());
        }
    }
    for g in gauge_samples {
        for o in mc_samples {
            let moved = crate::mc_gauge::af_action_mc(g, o)?;
            if !objects.contains(&moved) {
                objects.push(moved);
            }
        }
    }
    let del = DeligneCrossed::new(ambient.clone(), objects)?;
    let mut cells = Vec::new();
    for x in 0..del.num_objects() {
        cells.push(del.id1(&x));
    }
    for g in gauge_samples {
        for x in 0..del.num_objects() {
            if let Ok(cell) = del.arrow(x, g.clone()) {
                cells.push(cell);
            }
        }
    }
    // Vertical samples: the coordinate lines of each cokernel.
    let mut vcells = Vec::new();
    for x in 0..del.num_objects() {
        for col in 0..ambient.flat_dim(-1) {
            let (mono, local) = ambient.flat_unindex(-1, col);
            let v = ambient.term(-1, mono, local, rat::one());
            let cell = del.canonicalize(x, &v);
            if !cell.rep.is_zero() {
                vcells.push((x, cell));
            }
        }
    }
    let report = validate_deligne_crossed(&del, &cells, &vcells);
    Ok((del, cells, report))
}

/// Verifies the commuting square `D_(w') o Psi(g) = Ad(g) o D_w` and the
/// Peiffer identity on the sampled data, plus the boundary property of the
/// induced bracket (with explicit preimages).
pub fn validate_deligne_crossed(
    del: &DeligneCrossed,
    one_cells: &[DelOne],
    vertical_samples: &[(usize, DelTwo)],
) -> CheckReport {
    let mut report = validate_crossed(del, one_cells, vertical_samples);
    // Commuting square on the gauge side, checked on logarithms.
    for (gi, g) in one_cells.iter().enumerate() {
        for (ai, (x, a)) in vertical_samples.iter().enumerate() {
            if *x != g.src {
                continue;
            }
            let sample = format!("cell#{gi}, vcell#{ai}");
            let lhs = del.feedback(&g.tgt, &del.twist(g, a)).g;
            let da = del.feedback(x, a).g;
            let conj = crate::mc_gauge::bch(
                g.g.log(),
                &crate::mc_gauge::bch(da.log(), &g.g.inverse().log().clone()).expect("ambient"),
            )
            .expect("ambient");
            report.record("feedback square on logarithms", sample, lhs.log() == &conj);
        }
    }
    // Induced-bracket boundaries: for beta in m (x) g^-2, the bracket
    // [a, d_w(beta)]_w is again a boundary, with an explicit preimage.
    let ambient = del.ambient();
    for (ai, (x, a)) in vertical_samples.iter().enumerate() {
        let omega = del.object(*x);
        let m2 = crate::deligne::d_omega_matrix(omega, -2);
        let da = d_twisted(omega, &a.rep).expect("ambient");
        for col in 0..ambient.flat_dim(-2) {
            let (mono, local) = ambient.flat_unindex(-2, col);
            let beta = ambient.term(-2, mono, local, rat::one());
            let alpha_prime = d_twisted(omega, &beta).expect("ambient");
            let candidate = da.bracket(&alpha_prime).expect("ambient");
            let preimage = m2.solve(&candidate.to_flat()).expect("dims");
            report.record(
                "induced bracket kills boundaries",
                format!("vcell#{ai}, beta#{col}"),
                preimage.is_some(),
            );
        }
    }
    // Jacobi of the induced bracket on sampled triples.
    for (ai, (x, a)) in vertical_samples.iter().enumerate() {
        for (bi, (y, b)) in vertical_samples.iter().enumerate() {
            for (ci, (z, c)) in vertical_samples.iter().enumerate() {
                if x != y || y != z {
                    continue;
                }
                let j1 = del.coker_bracket(*x, a, &del.coker_bracket(*x, b, c));
                let j2 = del.coker_bracket(*x, b, &del.coker_bracket(*x, c, a));
                let j3 = del.coker_bracket(*x, c, &del.coker_bracket(*x, a, b));
                let total = j1
                    .rep
                    .add(&j2.rep)
                    .and_then(|s| s.add(&j3.rep))
                    .expect("ambient");
                report.record(
                    "induced bracket jacobi",
                    format!("vcells #{ai},#{bi},#{ci}"),
                    del.canonicalize(*x, &total).rep.is_zero(),
                );
            }
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Homotopy invariants
// ---------------------------------------------------------------------------

/// `pi_1` of the Deligne 2-groupoid at an object: the reduced automorphism
/// group, presented through the twisted-H^0 exponential.
pub fn pi1_reduced(omega: &MCElement) -> Result<crate::deligne::StabilizerData> {
    crate::deligne::stabilizer_exp(omega)
}

#[derive(Debug, Clone)]
pub struct Pi2Data {
    pub basis: Vec<Element>,
    pub twisted_h_minus1_dim: usize,
}

impl Pi2Data {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// `pi_2` at an object: the kernel of the feedback, with the dimension of
/// the twisted `H^(-1)` it must be isomorphic to.
pub fn pi2(del: &DeligneCrossed, x: usize) -> Result<Pi2Data> {
    let omega = del.object(x).clone();
    let basis = del.pi2_basis(x);
    let tw = TwistedComplex::new(omega)?;
    let h = tw.cohomology(-1);
    Ok(Pi2Data {
        basis,
        twisted_h_minus1_dim: h.dim(),
    })
}

/// Per-sample weak-equivalence evidence for a quasi-isomorphism: bijectivity
/// of the twisted `H^(-1)` and `H^0` comparisons (pi_2 and pi_1), and
/// transfer/lifting witnesses for pi_0.
pub fn weak_equiv_evidence(
    setup: &MorphismSetup,
    source_samples: &[MCElement],
    target_samples: &[MCElement],
    gauge_samples: &[GaugeElement],
) -> Result<CheckReport> {
    let (qiso, _) = setup.phi.is_quasi_iso();
    if !qiso {
        return Err(Error::Precondition(
            "weak-equivalence evidence requires a quasi-isomorphism".into(),
        ));
    }
    let mut report = CheckReport::new("weak-equivalence");
    for (i, omega) in source_samples.iter().enumerate() {
        let chi = MCElement::new(setup.map(omega.value()))?;
        let tw_g = TwistedComplex::new(omega.clone())?;
        let tw_h = TwistedComplex::new(chi.clone())?;
        for (label, degree) in [
            ("pi2 comparison (twisted H^-1)", -1),
            ("pi1 comparison (twisted H^0)", 0),
        ] {
            let hg = tw_g.cohomology(degree);
            let hh = tw_h.cohomology(degree);
            let flat = flat_component(setup, degree);
            let m = induced_h_matrix(&hg, &hh, |v| flat.mul_vec(v).expect("dims"));
            let bij = hg.dim() == hh.dim() && m.rank() == hg.dim();
            report.record(label, format!("source sample #{i}"), bij);
        }
    }
    for (i, chi) in target_samples.iter().enumerate() {
        let (omega, h) = crate::deligne::transfer_mc(setup, chi)?;
        let ok = af_action(&h, &setup.map(omega.value()))? == *chi.value();
        report.record(
            "pi0 surjectivity witness",
            format!("target sample #{i}"),
            ok,
        );
    }
    for (i, omega) in source_samples.iter().enumerate() {
        for (k, gamma) in gauge_samples.iter().enumerate() {
            let omega2 = crate::mc_gauge::af_action_mc(gamma, omega)?;
            let h = setup.map_gauge(gamma);
            let g = crate::deligne::lift_gauge(setup, omega, &omega2, &h)?;
            let ok = af_action(&g, omega.value())? == *omega2.value();
            report.record(
                "pi0 injectivity witness",
                format!("source sample #{i}, gauge #{k}"),
                ok,
            );
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rat::{frac, int};
    use crate::trunc::TruncationContext;

    fn quantum_setup(k: usize, n: usize) -> (DeligneCrossed, Vec<DelOne>, Vec<(usize, DelTwo)>) {
        let a = NilpotentDGLA::new(fixtures::quantum_heisenberg(), TruncationContext::new(k, n));
        let h = a.ctx().param(0);
        let omega0 = MCElement::zero(&a);
        let omega1 = MCElement::new(a.term(1, h, 0, int(1))).unwrap();
        // A gauge moving omega1 somewhere else: exp(h y) scales v.
        let gy = GaugeElement::from_log(a.term(0, h, 1, frac(1, 2))).unwrap();
        let omega2 = crate::mc_gauge::af_action_mc(&gy, &omega1).unwrap();
        let del = DeligneCrossed::new(a.clone(), vec![omega0, omega1, omega2]).unwrap();
        let mut cells = vec![del.id1(&0), del.id1(&1), del.arrow(1, gy).unwrap()];
        // A stabilizing arrow at object 1: exp(c h x) is central.
        let gx = GaugeElement::from_log(a.term(0, h, 0, int(1))).unwrap();
        cells.push(del.arrow(1, gx).unwrap());
        let mut vcells = Vec::new();
        for x in 0..del.num_objects() {
            for mono in 0..a.ctx().dim_m().min(2) {
                let v = a.term(-1, mono, 0, int(1));
                vcells.push((x, del.canonicalize(x, &v)));
            }
        }
        (del, cells, vcells)
    }

    #[test]
    fn deligne_crossed_axioms_hold() {
        let (del, cells, vcells) = quantum_setup(1, 2);
        let report = validate_deligne_crossed(&del, &cells, &vcells);
        assert!(report.all_pass(), "{}", report.to_json());
    }

    #[test]
    fn two_groupoid_laws() {
        let (del, cells, _) = quantum_setup(1, 2);
        let g2 = TwoGroupoid::new(&del);
        // Identity cells compose to identity cells.
        let f = &cells[2];
        let idf = g2.id2(f);
        let v = g2.vertical(&idf, &idf).unwrap();
        assert!(g2.eq2(&v, &idf));
        assert!(g2.is_coherent(&v));
        // Exchange law on nontrivial vertical stacks at object 1.
        let a = del.canonicalize(1, &del.ambient().term(-1, 0, 0, int(1)));
        let f1 = del.id1(&1);
        let d_a = del.feedback(&1, &a);
        let g1 = del.compose1(&f1, &d_a);
        let a1 = g2.two_cell(f1.clone(), g1.clone(), a.clone()).unwrap();
        let b = del.canonicalize(1, &del.ambient().term(-1, 1, 0, frac(1, 2)));
        let h1 = del.compose1(&g1, &del.feedback(&1, &b));
        let b1 = g2.two_cell(g1, h1, b).unwrap();
        // Second column: identities on the arrow out of object 1.
        let a2 = g2.id2(f);
        let b2 = g2.id2(f);
        assert!(exchange_holds(&g2, &a1, &b1, &a2, &b2).unwrap());
        // Horizontal inverse composes with the cell to an identity cell.
        let inv = g2.horizontal_inv(&a1).unwrap();
        let prod = g2.horizontal(&inv, &a1).unwrap();
        assert!(g2.is_coherent(&prod));
        let x0 = del.src(&prod.src1);
        assert!(del.n_eq(&x0, &prod.cell, &del.n_id(&x0)));
    }

    #[test]
    fn reconstruction_roundtrip() {
        let (del, cells, vcells) = quantum_setup(1, 2);
        let g2 = TwoGroupoid::new(&del);
        for (x, a) in &vcells {
            let d = del.feedback(x, a);
            let d2 = g2.reconstruct_feedback(x, a).unwrap();
            assert!(del.eq1(&d, &d2));
        }
        for f in &cells {
            for (x, a) in &vcells {
                if *x != f.src {
                    continue;
                }
                let t1 = del.twist(f, a);
                let t2 = g2.reconstruct_twist(f, a).unwrap();
                assert!(del.n_eq(&del.tgt(f), &t1, &t2));
            }
        }
    }

    #[test]
    fn quantum_type_coker_is_whole_degree_minus_one() {
        // No degree -2: a_w = m (x) g^-1 exactly.
        let (del, _, _) = quantum_setup(1, 2);
        for x in 0..del.num_objects() {
            assert_eq!(del.coker_dim(x), del.ambient().flat_dim(-1));
        }
    }

    #[test]
    fn nonnegative_window_degenerates() {
        let a = NilpotentDGLA::new(fixtures::solvable(), TruncationContext::new(1, 2));
        let del = DeligneCrossed::new(a.clone(), vec![MCElement::zero(&a)]).unwrap();
        assert_eq!(del.coker_dim(0), 0);
        let p = pi2(&del, 0).unwrap();
        assert_eq!(p.dim(), 0);
        assert_eq!(p.twisted_h_minus1_dim, 0);
    }

    #[test]
    fn pi2_matches_twisted_h_minus_one() {
        let (del, _, _) = quantum_setup(1, 3);
        for x in 0..del.num_objects() {
            let p = pi2(&del, x).unwrap();
            assert_eq!(p.dim(), p.twisted_h_minus1_dim, "object {x}");
            // Kernel cells are killed by the feedback.
            for b in &p.basis {
                let cell = del.canonicalize(x, b);
                let fb = del.feedback(&x, &cell);
                assert!(fb.g.is_identity());
            }
        }
    }

    #[test]
    fn pi2_is_abelian() {
        let (del, _, _) = quantum_setup(1, 3);
        for x in 0..del.num_objects() {
            let p = pi2(&del, x).unwrap();
            for a in &p.basis {
                for b in &p.basis {
                    let ca = del.canonicalize(x, a);
                    let cb = del.canonicalize(x, b);
                    let ab = del.n_mul(&x, &ca, &cb);
                    let ba = del.n_mul(&x, &cb, &ca);
                    assert!(del.n_eq(&x, &ab, &ba));
                }
            }
        }
    }

    #[test]
    fn pi2_invariant_under_twisting() {
        let (del, cells, _) = quantum_setup(1, 2);
        for f in &cells {
            let p_src = pi2(&del, f.src).unwrap();
            let p_tgt = pi2(&del, f.tgt).unwrap();
            assert_eq!(p_src.dim(), p_tgt.dim());
            for b in &p_src.basis {
                let cell = del.canonicalize(f.src, b);
                let moved = del.twist(f, &cell);
                let fb = del.feedback(&f.tgt, &moved);
                assert!(fb.g.is_identity(), "twist must preserve the kernel");
            }
        }
    }

    #[test]
    fn build_closes_objects_and_validates() {
        let a = NilpotentDGLA::new(fixtures::quantum_heisenberg(), TruncationContext::new(1, 2));
        let h = a.ctx().param(0);
        let omega = MCElement::new(a.term(1, h, 0, int(1))).unwrap();
        let gy = GaugeElement::from_log(a.term(0, h, 1, int(1))).unwrap();
        let (del, cells, report) =
            build_deligne_crossed(&a, &[MCElement::zero(&a), omega], &[gy]).unwrap();
        // The moved object was added and at least one non-identity arrow.
        assert!(del.num_objects() >= 3);
        assert!(cells.iter().any(|c| c.src != c.tgt));
        assert!(report.all_pass(), "{}", report.to_json());
    }

    #[test]
    fn negative_tail_coker_and_boundaries() {
        // A degree -2 part makes the cokernel a proper quotient and the
        // boundary checks nontrivial.
        let a = NilpotentDGLA::new(fixtures::negative_tail(), TruncationContext::new(1, 2));
        let del = DeligneCrossed::new(a.clone(), vec![MCElement::zero(&a)]).unwrap();
        assert!(del.coker_dim(0) < a.flat_dim(-1));
        let mut vcells = Vec::new();
        for mono in 0..a.ctx().dim_m() {
            for local in 0..2 {
                let v = a.term(-1, mono, local, int(1));
                vcells.push((0usize, del.canonicalize(0, &v)));
            }
        }
        let cells = vec![del.id1(&0)];
        let report = validate_deligne_crossed(&del, &cells, &vcells);
        assert!(report.all_pass(), "{}", report.to_json());
        let p = pi2(&del, 0).unwrap();
        assert_eq!(p.dim(), p.twisted_h_minus1_dim);
    }

    #[test]
    fn weak_equivalence_identity_and_contractible() {
        let base = fixtures::quantum_heisenberg();
        let (_, phi) = fixtures::contractible_extension(&base, &[-1, 0]);
        let setup = MorphismSetup::new(phi, TruncationContext::new(1, 2));
        let h = setup.source.ctx().param(0);
        let omega = MCElement::new(setup.source.term(1, h, 0, int(1))).unwrap();
        let chi = MCElement::new(setup.map(omega.value())).unwrap();
        let gamma = GaugeElement::from_log(setup.source.term(0, h, 1, int(1))).unwrap();
        let report = weak_equiv_evidence(
            &setup,
            &[MCElement::zero(&setup.source), omega],
            &[MCElement::zero(&setup.target), chi],
            &[gamma],
        )
        .unwrap();
        assert!(report.all_pass(), "{}", report.to_json());
    }

    #[test]
    fn weak_equivalence_rejects_non_quasi_iso() {
        let g = fixtures::zero_differential();
        let phi = crate::morphism::DGLAMorphism::new(
            g.clone(),
            g.clone(),
            std::collections::BTreeMap::new(),
        )
        .unwrap();
        let setup = MorphismSetup::new(phi, TruncationContext::new(1, 2));
        assert!(weak_equiv_evidence(&setup, &[], &[], &[]).is_err());
    }
}
