//! Obstruction classes, order-by-order Maurer-Cartan and gauge lifting,
//! reduced hom-set decision procedures, and the constructive transfer of
//! Maurer-Cartan data along DG Lie quasi-isomorphisms.
//!
//! Conventions: "order j" always refers to the socle layer `n_j = m^j/m^(j+1)`
//! of the truncation. An element is MC "at order j" when its curvature
//! vanishes on all monomials of degree <= j.

use crate::dgla::CohomologyData;
use crate::error::{Error, Result};
use crate::linalg::{QMatrix, Subspace};
use crate::mc_gauge::{
    af_action, bch, curvature, d_twisted, GaugeElement, MCElement, TwistedComplex,
};
use crate::morphism::{induced_h_matrix, DGLAMorphism};
use crate::nilpotent::{Element, NilpotentDGLA};
use crate::rat::{self, Rat};
use crate::trunc::MonoIdx;
use num::Zero;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObstructionLevel {
    /// Obstruction to connecting two lifts by a gauge element (lives in H^1).
    O1,
    /// Obstruction to lifting a Maurer-Cartan element one order (lives in H^2).
    O2,
}

/// A cohomology class in `n_j (x) H^i(g)`, with a chosen cocycle
/// representative and per-monomial class coordinates.
#[derive(Debug, Clone)]
pub struct ObstructionClass {
    pub level: ObstructionLevel,
    pub order: usize,
    pub degree: i32,
    pub representative: Element,
    /// Coordinates in the chosen complement basis of `H^i(g)`, one entry
    /// per monomial of the socle layer.
    pub coords: Vec<(MonoIdx, Vec<Rat>)>,
}

impl ObstructionClass {
    pub fn is_zero(&self) -> bool {
        self.coords
            .iter()
            .all(|(_, v)| v.iter().all(|c| c.is_zero()))
    }
}

/// Curvature vanishes on all monomials of degree <= j.
pub fn is_mc_to_order(omega: &Element, j: usize) -> Result<bool> {
    Ok(curvature(omega)?.truncate_above(j).is_zero())
}

/// Extracts, for each monomial of degree `j`, the dense coefficient vector
/// of a layer-j element, paired with its class coordinates.
fn layer_class(
    elem_layer: &Element,
    j: usize,
    coh: &CohomologyData,
) -> Result<Vec<(MonoIdx, Vec<Rat>)>> {
    let ambient = elem_layer.ambient();
    let dim = ambient.algebra().space().dim(elem_layer.degree());
    let mut out = Vec::new();
    for mono in ambient.ctx().layer(j) {
        let mut v = vec![rat::zero(); dim];
        for (l, slot) in v.iter_mut().enumerate() {
            *slot = elem_layer.coeff(mono, l);
        }
        out.push((mono, coh.class_coords(&v)?));
    }
    Ok(out)
}

/// Per-monomial linear solve of `d(x) = rhs_layer` with the unknown in
/// `n_j (x) g^source_degree`. None when any monomial is inconsistent.
fn solve_d_layer(
    ambient: &NilpotentDGLA,
    source_degree: i32,
    j: usize,
    rhs_layer: &Element,
) -> Option<Element> {
    let d = ambient.algebra().d_matrix(source_degree);
    let dim_tgt = ambient.algebra().space().dim(source_degree + 1);
    let mut out = ambient.zero(source_degree);
    for mono in ambient.ctx().layer(j) {
        let mut rhs = vec![rat::zero(); dim_tgt];
        for (l, slot) in rhs.iter_mut().enumerate() {
            *slot = rhs_layer.coeff(mono, l);
        }
        let x = d.solve(&rhs).expect("dims fixed")?;
        let term = Element::from_flat(
            ambient,
            source_degree,
            &flat_from_mono(ambient, source_degree, mono, &x),
        );
        out = out.add(&term).expect("same ambient");
    }
    Some(out)
}

fn flat_from_mono(ambient: &NilpotentDGLA, degree: i32, mono: MonoIdx, v: &[Rat]) -> Vec<Rat> {
    let mut flat = vec![rat::zero(); ambient.flat_dim(degree)];
    for (l, c) in v.iter().enumerate() {
        flat[ambient.flat_index(degree, mono, l)] = c.clone();
    }
    flat
}

/// The lifting obstruction: the class of `cur(lift)` in `n_j (x) H^2(g)`.
/// Independent of the chosen lift.
pub fn o2(omega_bar: &Element, lift: &Element, j: usize) -> Result<ObstructionClass> {
    if lift.truncate_above(j - 1) != omega_bar.truncate_above(j - 1) {
        return Err(Error::Precondition(
            "lift does not reduce to the given element".into(),
        ));
    }
    if !is_mc_to_order(omega_bar, j - 1)? {
        return Err(Error::Precondition(format!(
            "base element is not Maurer-Cartan at order {}",
            j - 1
        )));
    }
    let rep = curvature(lift)?.layer(j);
    let coh2 = lift.ambient().algebra().cohomology(2);
    let coords = layer_class(&rep, j, &coh2)?;
    Ok(ObstructionClass {
        level: ObstructionLevel::O2,
        order: j,
        degree: 2,
        representative: rep,
        coords,
    })
}

/// Tries to correct an order-(j-1) Maurer-Cartan element to order j by a
/// layer-j term: solves `d(b) = -cur(lift)` in `n_j (x) g^1`. Returns the
/// corrected lift, translated by the optional preferred cocycle; absent
/// exactly when the obstruction class is nonzero. The full solution set is
/// the returned lift translated by `n_j (x) Z^1(g)`.
pub fn lift_mc_one_order(
    omega_bar: &Element,
    j: usize,
    preferred: Option<&Element>,
) -> Result<Option<Element>> {
    if !is_mc_to_order(omega_bar, j - 1)? {
        return Err(Error::Precondition(format!(
            "element is not Maurer-Cartan at order {}",
            j - 1
        )));
    }
    let ambient = omega_bar.ambient().clone();
    let lift = omega_bar.truncate_above(j);
    let cur_layer = curvature(&lift)?.layer(j);
    let Some(beta) = solve_d_layer(&ambient, 1, j, &cur_layer.scale(&rat::int(-1))) else {
        return Ok(None);
    };
    let mut out = lift.add(&beta)?;
    if let Some(z) = preferred {
        if !z.d().is_zero() || z.layer(j) != *z {
            return Err(Error::Precondition(
                "preferred correction must be a layer-j cocycle".into(),
            ));
        }
        out = out.add(z)?;
    }
    debug_assert!(is_mc_to_order(&out, j)?);
    Ok(Some(out))
}

/// The connecting obstruction for two lifts of a common element: the class
/// of `w - w'` in `n_j (x) H^1(g)`.
pub fn o1(omega: &Element, omega2: &Element, j: usize) -> Result<ObstructionClass> {
    if omega.truncate_above(j - 1) != omega2.truncate_above(j - 1) {
        return Err(Error::Precondition(
            "elements are not congruent below the layer".into(),
        ));
    }
    if !is_mc_to_order(omega, j)? || !is_mc_to_order(omega2, j)? {
        return Err(Error::Precondition(format!(
            "inputs must be Maurer-Cartan at order {j}"
        )));
    }
    let rep = omega.sub(omega2)?.layer(j);
    let coh1 = omega.ambient().algebra().cohomology(1);
    let coords = layer_class(&rep, j, &coh1)?;
    Ok(ObstructionClass {
        level: ObstructionLevel::O1,
        order: j,
        degree: 1,
        representative: rep,
        coords,
    })
}

/// Direct affine-linear search for a gauge element with trivial lower-order
/// reduction carrying `w` to `w'` modulo `m^(j+1)`: since `m . n_j = 0` the
/// equation collapses to `d(y) = w - w'` on the layer. This is the
/// brute-force oracle for `o1`.
pub fn connect_one_order(
    omega: &Element,
    omega2: &Element,
    j: usize,
) -> Result<Option<GaugeElement>> {
    if omega.truncate_above(j - 1) != omega2.truncate_above(j - 1) {
        return Err(Error::Precondition(
            "elements are not congruent below the layer".into(),
        ));
    }
    let ambient = omega.ambient().clone();
    let diff = omega.sub(omega2)?.layer(j);
    let Some(gamma) = solve_d_layer(&ambient, 0, j, &diff) else {
        return Ok(None);
    };
    let g = GaugeElement::from_log(gamma)?;
    debug_assert!({
        let moved = af_action(&g, omega)?;
        moved.sub(omega2)?.truncate_above(j).is_zero()
    });
    Ok(Some(g))
}

/// Matrix of `d_w` restricted to one degree, without building the whole
/// twisted complex.
pub fn d_omega_matrix(omega: &MCElement, degree: i32) -> QMatrix {
    let ambient = omega.ambient();
    let rows = ambient.flat_dim(degree + 1);
    let cols = ambient.flat_dim(degree);
    let mut m = QMatrix::zero(rows, cols);
    for col in 0..cols {
        let (mono, local) = ambient.flat_unindex(degree, col);
        let basis_el = ambient.term(degree, mono, local, rat::one());
        let image = d_twisted(omega, &basis_el).expect("same ambient");
        for ((mm, ll), c) in image.terms() {
            m[(ambient.flat_index(degree + 1, mm, ll), col)] = c.clone();
        }
    }
    m
}

/// The subspace `Im(d_w : m (x) g^-1 -> m (x) g^0)`, whose exponential is
/// the normal subgroup that reduced hom-sets quotient by.
pub fn reduced_denominator(omega: &MCElement) -> Subspace {
    let ambient = omega.ambient();
    let m = d_omega_matrix(omega, -1);
    Subspace::from_spanning(ambient.flat_dim(0), &m.image_basis())
}

/// Equality in the reduced hom-set: `g ~ g'` iff `log((g')^-1 g)` lies in
/// `Im(d_w)` on degree 0. Requires both elements to carry `w` to the same
/// target.
pub fn reduced_equal(g: &GaugeElement, g2: &GaugeElement, omega: &MCElement) -> Result<bool> {
    let a = af_action(g, omega.value())?;
    let b = af_action(g2, omega.value())?;
    if a != b {
        return Err(Error::Precondition(
            "gauge elements act differently; reduced equality undefined".into(),
        ));
    }
    let diff = bch(&g2.log().scale(&rat::int(-1)), g.log())?;
    Ok(reduced_denominator(omega).contains(&diff.to_flat()))
}

/// The twisted-H^0 presentation of the reduced automorphism group of `w`:
/// a basis of `H^0((m (x) g)_w)` whose exponentials stabilize `w` and fall
/// into pairwise distinct reduced classes.
#[derive(Debug, Clone)]
pub struct StabilizerData {
    pub omega: MCElement,
    pub h0: CohomologyData,
    pub basis: Vec<Element>,
}

pub fn stabilizer_exp(omega: &MCElement) -> Result<StabilizerData> {
    let ambient = omega.ambient().clone();
    let tw = TwistedComplex::new(omega.clone())?;
    let h0 = tw.cohomology(0);
    let basis: Vec<Element> = h0
        .class_reps
        .iter()
        .map(|v| Element::from_flat(&ambient, 0, v))
        .collect();
    for kappa in &basis {
        let g = GaugeElement::from_log(kappa.clone())?;
        let moved = af_action(&g, omega.value())?;
        assert_eq!(
            &moved,
            omega.value(),
            "twisted 0-cocycles must exponentiate into the stabilizer"
        );
    }
    Ok(StabilizerData {
        omega: omega.clone(),
        h0,
        basis,
    })
}

/// A verified morphism of the reduced Deligne groupoid: a gauge witness
/// together with the subspace its reduced class is measured against.
#[derive(Debug, Clone)]
pub struct ReducedHomWitness {
    pub source: MCElement,
    pub target: MCElement,
    pub witness: GaugeElement,
    pub stabilizer_image: Subspace,
}

impl ReducedHomWitness {
    pub fn new(source: MCElement, target: MCElement, witness: GaugeElement) -> Result<Self> {
        let moved = af_action(&witness, source.value())?;
        if &moved != target.value() {
            return Err(Error::Precondition(
                "witness does not carry the source to the target".into(),
            ));
        }
        let stabilizer_image = reduced_denominator(&source);
        // Im(d_w) in degree 0 is d_w-closed: d_w^2 = 0.
        let d0 = d_omega_matrix(&source, 0);
        for v in d_omega_matrix(&source, -1).image_basis() {
            let dv = d0.mul_vec(&v).expect("dims");
            assert!(dv.iter().all(|c| c.is_zero()), "d_w squared must vanish");
        }
        Ok(ReducedHomWitness {
            source,
            target,
            witness,
            stabilizer_image,
        })
    }
}

// ---------------------------------------------------------------------------
// Greedy gauge connectivity
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum Connectivity {
    /// A verified witness with `Af(g)(w) = w'` exactly.
    Connected(GaugeElement),
    /// Definitive: the layer-1 class (or any layer, for abelian algebras)
    /// obstructs every possible witness.
    ObstructedAtOrder {
        order: usize,
        class: ObstructionClass,
    },
    /// Greedy lifting got stuck; earlier gauge choices might have avoided
    /// this, so no conclusion is drawn.
    Inconclusive {
        order: usize,
        class: ObstructionClass,
    },
}

/// Greedy order-by-order connection of two Maurer-Cartan elements.
pub fn gauge_connect(omega: &MCElement, omega2: &MCElement) -> Result<Connectivity> {
    if omega.ambient() != omega2.ambient() {
        return Err(Error::ContextMismatch);
    }
    let ambient = omega.ambient().clone();
    let n = ambient.order();
    let abelian = ambient.algebra().is_abelian();
    let coh1 = ambient.algebra().cohomology(1);
    let mut g = GaugeElement::identity(&ambient);
    let mut current = omega.clone();
    for j in 1..=n {
        let diff = current.value().sub(omega2.value())?.layer(j);
        if diff.is_zero() {
            continue;
        }
        let coords = layer_class(&diff, j, &coh1)?;
        if coords.iter().any(|(_, v)| v.iter().any(|c| !c.is_zero())) {
            let class = ObstructionClass {
                level: ObstructionLevel::O1,
                order: j,
                degree: 1,
                representative: diff,
                coords,
            };
            return Ok(if j == 1 || abelian {
                Connectivity::ObstructedAtOrder { order: j, class }
            } else {
                Connectivity::Inconclusive { order: j, class }
            });
        }
        let gamma = solve_d_layer(&ambient, 0, j, &diff)
            .expect("vanishing class makes the layer system consistent");
        let step = GaugeElement::from_log(gamma)?;
        current = crate::mc_gauge::af_action_mc(&step, &current)?;
        g = step.compose(&g)?;
    }
    assert_eq!(
        current.value(),
        omega2.value(),
        "all layers agree after the final order"
    );
    Ok(Connectivity::Connected(g))
}

// ---------------------------------------------------------------------------
// Constructive transfer along quasi-isomorphisms
// ---------------------------------------------------------------------------

/// A morphism together with both ambient nilpotent algebras over one context.
#[derive(Debug, Clone)]
pub struct MorphismSetup {
    pub phi: DGLAMorphism,
    pub source: NilpotentDGLA,
    pub target: NilpotentDGLA,
}

impl MorphismSetup {
    pub fn new(phi: DGLAMorphism, ctx: std::sync::Arc<crate::trunc::TruncationContext>) -> Self {
        let source = NilpotentDGLA::new(phi.source().clone(), ctx.clone());
        let target = NilpotentDGLA::new(phi.target().clone(), ctx);
        MorphismSetup {
            phi,
            source,
            target,
        }
    }

    pub fn map(&self, e: &Element) -> Element {
        e.map_via(&self.phi, &self.target)
    }

    pub fn map_gauge(&self, g: &GaugeElement) -> GaugeElement {
        GaugeElement::from_log(self.map(g.log())).expect("degree preserved")
    }

    fn restricted(&self, j: usize) -> MorphismSetup {
        MorphismSetup {
            phi: self.phi.clone(),
            source: self.source.restrict(j),
            target: self.target.restrict(j),
        }
    }
}

/// Constructive surjectivity: given `chi` Maurer-Cartan on the target side
/// of a quasi-isomorphism, produces `w` on the source side and a gauge
/// element `h` with `Af(h)(phi(w)) = chi`, exactly at the ambient order.
/// Follows the order-by-order argument; every internal
/// obstruction-vanishing claim is asserted and a violation panics.
pub fn transfer_mc(setup: &MorphismSetup, chi: &MCElement) -> Result<(MCElement, GaugeElement)> {
    if chi.ambient() != &setup.target {
        return Err(Error::ContextMismatch);
    }
    let (qiso, _) = setup.phi.is_quasi_iso();
    if !qiso {
        return Err(Error::Precondition(
            "transfer requires a quasi-isomorphism".into(),
        ));
    }
    let n = setup.source.order();
    let coh1_g = setup.phi.source().cohomology(1);
    let (h1_phi, _, coh1_h) = setup.phi.induced_on_h(1);

    let mut omega = setup.source.zero(1);
    let mut h_log = setup.target.zero(0);

    for j in 1..=n {
        let sub = setup.restricted(j);
        let chi_j = chi.restrict_to(&sub.target);
        let h_prev = GaugeElement::from_log(h_log.restrict_to(&sub.target))?;
        let chi_prime = af_action(&h_prev.inverse(), chi_j.value())?;
        let omega_lift = omega.restrict_to(&sub.source);
        assert_eq!(
            chi_prime.truncate_above(j - 1),
            sub.map(&omega_lift).truncate_above(j - 1),
            "conjugated target must reduce to the image of the previous step"
        );

        // Kill the lifting obstruction: its class vanishes because H^2(phi)
        // is injective and the chi-side lift exists.
        let cur_layer = curvature(&omega_lift)?.layer(j);
        let beta = solve_d_layer(&sub.source, 1, j, &cur_layer.scale(&rat::int(-1)))
            .expect("o2 must vanish: H^2(phi) is injective and chi lifts");
        let omega2 = omega_lift.add(&beta)?;
        debug_assert!(curvature(&omega2)?.is_zero());

        // Correct by a cocycle pulled back through the surjective H^1(phi).
        let chi2 = sub.map(&omega2);
        let delta = chi2.sub(&chi_prime)?.layer(j);
        let mut gamma = sub.source.zero(1);
        for mono in sub.source.ctx().layer(j) {
            let dim_h = setup.phi.target().space().dim(1);
            let mut v = vec![rat::zero(); dim_h];
            for (l, slot) in v.iter_mut().enumerate() {
                *slot = delta.coeff(mono, l);
            }
            let target_coords = coh1_h
                .class_coords(&v)
                .expect("difference of lifts is a cocycle layer");
            let x = h1_phi
                .solve(&target_coords)
                .expect("dims")
                .expect("H^1(phi) is surjective");
            let mut rep = vec![rat::zero(); setup.phi.source().space().dim(1)];
            for (i, c) in x.iter().enumerate() {
                for (k, r) in coh1_g.class_reps[i].iter().enumerate() {
                    rep[k] += c * r;
                }
            }
            gamma = gamma.add(&Element::from_flat(
                &sub.source,
                1,
                &flat_from_mono(&sub.source, 1, mono, &rep),
            ))?;
        }
        let omega_j = omega2.sub(&gamma)?;
        debug_assert!(curvature(&omega_j)?.is_zero());

        // Now the connecting obstruction on the target side vanishes.
        let chi3 = sub.map(&omega_j);
        let delta2 = chi3.sub(&chi_prime)?.layer(j);
        let eta = solve_d_layer(&sub.target, 0, j, &delta2)
            .expect("o1 must vanish after the H^1 correction");
        let h_j = h_prev.compose(&GaugeElement::from_log(eta)?)?;
        assert_eq!(
            af_action(&h_j, &sub.map(&omega_j))?,
            chi_j.value().clone(),
            "transfer invariant must hold exactly over R_j"
        );

        omega = omega_j.extend_to(&setup.source);
        h_log = h_j.log().extend_to(&setup.target);
    }

    let omega = MCElement::new(omega)?;
    let h = GaugeElement::from_log(h_log)?;
    assert_eq!(
        af_action(&h, &setup.map(omega.value()))?,
        chi.value().clone(),
        "transfer equation must hold exactly at full order"
    );
    Ok((omega, h))
}

/// Constructive fullness: given source Maurer-Cartan elements `w, w'` and a
/// target-side gauge `h` with `Af(h)(phi w) = phi w'`, produces `g` with
/// `Af(g)(w) = w'` exactly and `phi(g)` reduced-equal to `h`. The reduced
/// class is matched order by order through the twisted-H^0 bijection.
pub fn lift_gauge(
    setup: &MorphismSetup,
    omega: &MCElement,
    omega2: &MCElement,
    h: &GaugeElement,
) -> Result<GaugeElement> {
    let (qiso, _) = setup.phi.is_quasi_iso();
    if !qiso {
        return Err(Error::Precondition(
            "gauge lifting requires a quasi-isomorphism".into(),
        ));
    }
    let chi = MCElement::new(setup.map(omega.value()))?;
    let chi_target = setup.map(omega2.value());
    if af_action(h, chi.value())? != chi_target {
        return Err(Error::Precondition(
            "h does not carry phi(w) to phi(w')".into(),
        ));
    }
    let n = setup.source.order();
    let mut g_log = setup.source.zero(0);

    for j in 1..=n {
        let sub = setup.restricted(j);
        let omega_j = omega.restrict_to(&sub.source);
        let omega2_j = omega2.restrict_to(&sub.source);
        let chi_j = chi.restrict_to(&sub.target);
        let h_j = h.restrict_to(&sub.target);

        let g_lift = GaugeElement::from_log(g_log.restrict_to(&sub.source))?;
        let moved = af_action(&g_lift, omega_j.value())?;
        let delta = moved.sub(omega2_j.value())?.layer(j);
        // o1(w'', w') vanishes because H^1(phi) is injective and h connects
        // the images; the layer system is therefore consistent.
        let gamma = solve_d_layer(&sub.source, 0, j, &delta)
            .expect("o1 must vanish: H^1(phi) is injective and h exists");
        let g0 = GaugeElement::from_log(gamma)?.compose(&g_lift)?;
        assert_eq!(
            af_action(&g0, omega_j.value())?,
            omega2_j.value().clone(),
            "layer correction must connect exactly over R_j"
        );

        // Match the reduced class of phi(g) with h through the stabilizer.
        let u_log = bch(&sub.map_gauge(&g0).log().scale(&rat::int(-1)), h_j.log())?;
        assert!(
            d_twisted(&chi_j, &u_log)?.is_zero(),
            "discrepancy must stabilize the twisted complex"
        );
        let tw_g = TwistedComplex::new(omega_j.clone())?;
        let tw_h = TwistedComplex::new(chi_j.clone())?;
        let h0_g = tw_g.cohomology(0);
        let h0_h = tw_h.cohomology(0);
        let phi_flat = flat_component(&sub, 0);
        let h0_phi = induced_h_matrix(&h0_g, &h0_h, |v| phi_flat.mul_vec(v).expect("dims"));
        let coords = h0_h
            .class_coords(&u_log.to_flat())
            .expect("stabilizer logarithm is a twisted cocycle");
        let x = h0_phi
            .solve(&coords)
            .expect("dims")
            .expect("twisted H^0(phi) is bijective");
        let mut kappa_flat = vec![rat::zero(); sub.source.flat_dim(0)];
        for (i, c) in x.iter().enumerate() {
            for (k, r) in h0_g.class_reps[i].iter().enumerate() {
                kappa_flat[k] += c * r;
            }
        }
        let kappa = Element::from_flat(&sub.source, 0, &kappa_flat);
        let g_j = g0.compose(&GaugeElement::from_log(kappa)?)?;
        assert_eq!(
            af_action(&g_j, omega_j.value())?,
            omega2_j.value().clone(),
            "stabilizer adjustment must preserve the action"
        );
        assert!(
            reduced_equal(&sub.map_gauge(&g_j), &h_j, &chi_j)?,
            "reduced classes must match over R_j"
        );

        g_log = g_j.log().extend_to(&setup.source);
    }

    let g = GaugeElement::from_log(g_log)?;
    assert_eq!(
        af_action(&g, omega.value())?,
        omega2.value().clone(),
        "lifted gauge must connect exactly at full order"
    );
    assert!(
        reduced_equal(&setup.map_gauge(&g), h, &chi)?,
        "lifted gauge must map to the reduced class of h"
    );
    Ok(g)
}

/// Block-diagonal matrix of `1 (x) phi` on the flattened degree-i spaces.
pub fn flat_component(setup: &MorphismSetup, degree: i32) -> QMatrix {
    let comp = setup.phi.component(degree);
    let dm = setup.source.ctx().dim_m();
    let rows = setup.target.flat_dim(degree);
    let cols = setup.source.flat_dim(degree);
    let mut m = QMatrix::zero(rows, cols);
    for mono in 0..dm {
        for r in 0..comp.rows() {
            for c in 0..comp.cols() {
                if !comp[(r, c)].is_zero() {
                    m[(
                        setup.target.flat_index(degree, mono, r),
                        setup.source.flat_index(degree, mono, c),
                    )] = comp[(r, c)].clone();
                }
            }
        }
    }
    m
}

/// `Af(exp k)(w) = w`, tested directly.
pub fn stabilizes(g: &GaugeElement, omega: &MCElement) -> Result<bool> {
    Ok(af_action(g, omega.value())? == *omega.value())
}

/// Membership of a degree-0 logarithm in `Im(d_w)`.
pub fn in_reduced_denominator(omega: &MCElement, log: &Element) -> bool {
    reduced_denominator(omega).contains(&log.to_flat())
}

/// Membership of a degree-0 element in `Ker(d_w)`.
pub fn in_twisted_kernel(omega: &MCElement, log: &Element) -> Result<bool> {
    Ok(d_twisted(omega, log)?.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mc_gauge::af_action_mc;
    use crate::rat::{frac, int};
    use crate::trunc::TruncationContext;

    fn amb(g: crate::dgla::DGLieAlgebra, k: usize, n: usize) -> NilpotentDGLA {
        NilpotentDGLA::new(g, TruncationContext::new(k, n))
    }

    #[test]
    fn o2_square_example() {
        // [v,v] = 2w: w-bar = c h v at j = 2 has class c^2 h^2 [w].
        let a = amb(fixtures::obstruction_square(), 1, 2);
        let h = a.ctx().param(0);
        for c in [int(0), int(1), frac(3, 2)] {
            let omega_bar = a.term(1, h, 0, c.clone());
            let class = o2(&omega_bar, &omega_bar, 2).unwrap();
            if c.is_zero() {
                assert!(class.is_zero());
            } else {
                assert!(!class.is_zero());
                assert_eq!(class.coords[0].1, vec![&c * &c]);
            }
            let lifted = lift_mc_one_order(&omega_bar, 2, None).unwrap();
            assert_eq!(lifted.is_some(), class.is_zero());
        }
    }

    #[test]
    fn o2_already_mc_lift_gives_zero() {
        let a = amb(fixtures::abelian_two_term(), 1, 2);
        let h = a.ctx().param(0);
        let omega = a.term(1, h, 0, int(1)); // d(v) = 0: Maurer-Cartan
        let class = o2(&omega, &omega, 2).unwrap();
        assert!(class.is_zero());
    }

    #[test]
    fn o2_independent_of_lift() {
        let a = amb(fixtures::mixed_obstruction(), 1, 2);
        let h = a.ctx().param(0);
        let h2 = a.ctx().lookup(&[2]).unwrap();
        let omega_bar = a.term(1, h, 1, int(2)); // 2 h v
        let lift1 = omega_bar.clone();
        let lift2 = omega_bar
            .add(
                &a.from_terms(1, vec![(h2, 0, int(3)), (h2, 1, int(-1))])
                    .unwrap(),
            )
            .unwrap();
        let c1 = o2(&omega_bar, &lift1, 2).unwrap();
        let c2 = o2(&omega_bar, &lift2, 2).unwrap();
        assert_eq!(c1.coords, c2.coords);
        let diff = c1.representative.sub(&c2.representative).unwrap();
        let coh2 = a.algebra().cohomology(2);
        let v: Vec<_> = (0..1).map(|l| diff.coeff(h2, l)).collect();
        assert!(coh2.is_coboundary(&v));
    }

    #[test]
    fn abelian_always_lifts() {
        // H^2 = 0 for the abelian two-term complex.
        let a = amb(fixtures::abelian_two_term(), 2, 3);
        let h0 = a.ctx().param(0);
        let h1p = a.ctx().param(1);
        let omega = a
            .from_terms(1, vec![(h0, 0, int(2)), (h1p, 0, int(-1))])
            .unwrap();
        let mut current = omega;
        for j in 2..=3 {
            current = lift_mc_one_order(&current, j, None).unwrap().unwrap();
        }
        assert!(is_mc_to_order(&current, 3).unwrap());
    }

    #[test]
    fn lift_solution_set_translation() {
        let a = amb(fixtures::abelian_two_term(), 1, 2);
        let h = a.ctx().param(0);
        let h2 = a.ctx().lookup(&[2]).unwrap();
        let omega = a.term(1, h, 0, int(1));
        let z = a.term(1, h2, 0, int(5)); // d(v) = 0: a layer-2 cocycle
        let l1 = lift_mc_one_order(&omega, 2, None).unwrap().unwrap();
        let l2 = lift_mc_one_order(&omega, 2, Some(&z)).unwrap().unwrap();
        let diff = l2.sub(&l1).unwrap();
        assert_eq!(diff, z);
        assert!(diff.d().is_zero());
    }

    #[test]
    fn o1_and_connect_agree() {
        // mixed_obstruction: H^1 is spanned by [v]; u = d(x) is a coboundary.
        let a = amb(fixtures::mixed_obstruction(), 1, 2);
        let h2 = a.ctx().lookup(&[2]).unwrap();
        let omega = a.zero(1);
        let w1 = a.term(1, h2, 0, int(4)); // u-direction: connects
        let class = o1(&w1, &omega, 2).unwrap();
        assert!(class.is_zero());
        assert!(connect_one_order(&w1, &omega, 2).unwrap().is_some());
        let w2 = a.term(1, h2, 1, int(1)); // v-direction: obstructed
        let class = o1(&w2, &omega, 2).unwrap();
        assert!(!class.is_zero());
        assert!(connect_one_order(&w2, &omega, 2).unwrap().is_none());
        let class = o1(&omega, &omega, 2).unwrap();
        assert!(class.is_zero());
        let g = connect_one_order(&omega, &omega, 2).unwrap().unwrap();
        assert!(g.is_identity());
    }

    #[test]
    fn connect_abelian_first_order() {
        // w' - w = a h v = d(a h u).
        let a = amb(fixtures::abelian_two_term(), 1, 1);
        let h = a.ctx().param(0);
        let omega = a.zero(1);
        let omega2 = a.term(1, h, 0, int(-3));
        let g = connect_one_order(&omega2, &omega, 1).unwrap().unwrap();
        assert_eq!(g.log(), &a.term(0, h, 0, int(-3)));
    }

    #[test]
    fn reduced_equal_cases() {
        let q = amb(fixtures::quantum_heisenberg(), 1, 2);
        let omega = MCElement::new(q.term(1, q.ctx().param(0), 0, int(1))).unwrap();
        let id = GaugeElement::identity(&q);
        // exp(d_w(alpha)) has trivial reduced class.
        let alpha = q.term(-1, q.ctx().param(0), 0, int(1));
        let n_elt = GaugeElement::from_log(d_twisted(&omega, &alpha).unwrap()).unwrap();
        assert!(stabilizes(&n_elt, &omega).unwrap());
        assert!(reduced_equal(&n_elt, &id, &omega).unwrap());
        assert!(reduced_equal(&n_elt, &n_elt, &omega).unwrap());
        // h x is closed and central but not in Im(d_w) (the image is h^2 x).
        let gx = GaugeElement::from_log(q.term(0, q.ctx().param(0), 0, int(1))).unwrap();
        assert!(stabilizes(&gx, &omega).unwrap());
        assert!(!reduced_equal(&gx, &id, &omega).unwrap());
    }

    #[test]
    fn reduced_hom_witness_verifies_equation() {
        let a = amb(fixtures::solvable(), 1, 2);
        let h = a.ctx().param(0);
        let omega = MCElement::new(a.term(1, h, 0, int(1))).unwrap();
        let g = GaugeElement::from_log(a.term(0, h, 0, int(1))).unwrap();
        let omega2 = af_action_mc(&g, &omega).unwrap();
        assert!(ReducedHomWitness::new(omega.clone(), omega2, g.clone()).is_ok());
        // A wrong target is rejected.
        assert!(ReducedHomWitness::new(omega.clone(), omega, g).is_err());
    }

    #[test]
    fn reduced_equal_requires_matching_action() {
        let a = amb(fixtures::abelian_two_term(), 1, 2);
        let omega = MCElement::zero(&a);
        let id = GaugeElement::identity(&a);
        let g = GaugeElement::from_log(a.term(0, a.ctx().param(0), 0, int(1))).unwrap();
        // g moves 0 to -d(h u) != 0: precondition fails.
        assert!(reduced_equal(&g, &id, &omega).is_err());
    }

    #[test]
    fn stabilizer_exp_abelian_acyclic() {
        // d injective on degree 0: H^0 = 0, trivial reduced stabilizer.
        let a = amb(fixtures::abelian_two_term(), 1, 2);
        let data = stabilizer_exp(&MCElement::zero(&a)).unwrap();
        assert_eq!(data.h0.dim(), 0);
    }

    #[test]
    fn stabilizer_exp_zero_differential() {
        // Everything in degree 0 is closed: G^r(0,0) = m (x) g^0.
        let a = amb(fixtures::zero_differential(), 1, 2);
        let data = stabilizer_exp(&MCElement::zero(&a)).unwrap();
        assert_eq!(data.h0.dim(), a.flat_dim(0));
        let id = GaugeElement::identity(&a);
        for k in &data.basis {
            let g = GaugeElement::from_log(k.clone()).unwrap();
            assert!(!reduced_equal(&g, &id, &MCElement::zero(&a)).unwrap());
        }
    }

    #[test]
    fn stabilizer_criterion_both_directions() {
        let q = amb(fixtures::quantum_heisenberg(), 1, 3);
        let h = q.ctx().param(0);
        let omega = MCElement::new(q.term(1, h, 0, int(1))).unwrap();
        let y = q.term(0, h, 1, int(1));
        let gy = GaugeElement::from_log(y.clone()).unwrap();
        assert_eq!(
            stabilizes(&gy, &omega).unwrap(),
            d_twisted(&omega, &y).unwrap().is_zero()
        );
        assert!(!stabilizes(&gy, &omega).unwrap());
        let x = q.term(0, h, 0, int(1));
        let gx = GaugeElement::from_log(x.clone()).unwrap();
        assert!(d_twisted(&omega, &x).unwrap().is_zero());
        assert!(stabilizes(&gx, &omega).unwrap());
    }

    #[test]
    fn gauge_connect_roundtrip() {
        let a = amb(fixtures::solvable(), 1, 3);
        let h = a.ctx().param(0);
        let omega = MCElement::new(a.term(1, h, 0, int(1))).unwrap();
        let g = GaugeElement::from_log(a.term(0, h, 0, frac(1, 2))).unwrap();
        let omega2 = af_action_mc(&g, &omega).unwrap();
        match gauge_connect(&omega, &omega2).unwrap() {
            Connectivity::Connected(w) => {
                assert_eq!(
                    af_action(&w, omega.value()).unwrap(),
                    omega2.value().clone()
                );
            }
            other => panic!("expected connection, got {other:?}"),
        }
    }

    #[test]
    fn gauge_connect_obstructed_first_order() {
        let z = amb(fixtures::zero_differential(), 1, 2);
        let omega = MCElement::zero(&z);
        let omega2 = MCElement::new(z.term(1, z.ctx().param(0), 0, int(1))).unwrap();
        match gauge_connect(&omega, &omega2).unwrap() {
            Connectivity::ObstructedAtOrder { order, class } => {
                assert_eq!(order, 1);
                assert!(!class.is_zero());
            }
            other => panic!("expected obstruction, got {other:?}"),
        }
    }

    fn contractible_setup(
        base: crate::dgla::DGLieAlgebra,
        cones: &[i32],
        k: usize,
        n: usize,
    ) -> MorphismSetup {
        let (_, phi) = fixtures::contractible_extension(&base, cones);
        MorphismSetup::new(phi, TruncationContext::new(k, n))
    }

    #[test]
    fn transfer_identity_morphism() {
        let g = fixtures::solvable();
        let phi = DGLAMorphism::identity(&g);
        let setup = MorphismSetup::new(phi, TruncationContext::new(1, 3));
        let chi = MCElement::new(setup.target.term(1, 0, 0, int(2))).unwrap();
        let (omega, h) = transfer_mc(&setup, &chi).unwrap();
        assert_eq!(
            af_action(&h, &setup.map(omega.value())).unwrap(),
            chi.value().clone()
        );
    }

    #[test]
    fn transfer_from_zero_algebra() {
        // Both sides acyclic: any chi transfers with the only possible
        // omega, the zero element of the zero algebra.
        let zero_alg = crate::dgla::DGLieAlgebra::new(crate::dgla::RawDGLA {
            space: crate::graded::GradedSpace::new(vec![]).unwrap(),
            differential: Default::default(),
            bracket: Default::default(),
        })
        .unwrap();
        let target = fixtures::abelian_two_term();
        let phi = DGLAMorphism::new(zero_alg, target, Default::default()).unwrap();
        let setup = MorphismSetup::new(phi, TruncationContext::new(1, 2));
        let h = setup.target.ctx().param(0);
        let chi = MCElement::new(setup.target.term(1, h, 0, int(4))).unwrap();
        let (omega, hg) = transfer_mc(&setup, &chi).unwrap();
        assert!(omega.value().is_zero());
        assert_eq!(
            af_action(&hg, &setup.map(omega.value())).unwrap(),
            chi.value().clone()
        );
    }

    #[test]
    fn transfer_contractible() {
        let setup = contractible_setup(fixtures::solvable(), &[0, 1], 1, 3);
        let h = setup.target.ctx().param(0);
        let (dv, lv) = setup.phi.target().space().find("v").unwrap();
        assert_eq!(dv, 1);
        let (du, lu) = setup.phi.target().space().find("cone0_v").unwrap();
        assert_eq!(du, 1);
        let chi_val = setup
            .target
            .from_terms(1, vec![(h, lv, int(1)), (h, lu, int(2))])
            .unwrap();
        // Greedy-lift the seed into an exactly Maurer-Cartan element first.
        let mut cur = chi_val;
        for j in 2..=3 {
            cur = lift_mc_one_order(&cur, j, None).unwrap().unwrap();
        }
        let chi = MCElement::new(cur).unwrap();
        let (omega, hg) = transfer_mc(&setup, &chi).unwrap();
        assert_eq!(
            af_action(&hg, &setup.map(omega.value())).unwrap(),
            chi.value().clone()
        );
    }

    #[test]
    fn lift_gauge_identity() {
        let g = fixtures::solvable();
        let phi = DGLAMorphism::identity(&g);
        let setup = MorphismSetup::new(phi, TruncationContext::new(1, 3));
        let h1 = setup.source.ctx().param(0);
        let omega = MCElement::new(setup.source.term(1, h1, 0, int(1))).unwrap();
        let gw = GaugeElement::from_log(setup.source.term(0, h1, 0, frac(1, 3))).unwrap();
        let omega2 = af_action_mc(&gw, &omega).unwrap();
        let h = setup.map_gauge(&gw);
        let g_found = lift_gauge(&setup, &omega, &omega2, &h).unwrap();
        assert_eq!(
            af_action(&g_found, omega.value()).unwrap(),
            omega2.value().clone()
        );
        let chi = MCElement::new(setup.map(omega.value())).unwrap();
        assert!(reduced_equal(&setup.map_gauge(&g_found), &h, &chi).unwrap());
    }

    #[test]
    fn lift_gauge_contractible() {
        let setup = contractible_setup(fixtures::quantum_heisenberg(), &[0], 1, 2);
        let hm = setup.source.ctx().param(0);
        let omega = MCElement::new(setup.source.term(1, hm, 0, int(1))).unwrap();
        let gw = GaugeElement::from_log(setup.source.term(0, hm, 1, int(1))).unwrap();
        let omega2 = af_action_mc(&gw, &omega).unwrap();
        let h = setup.map_gauge(&gw);
        let g_found = lift_gauge(&setup, &omega, &omega2, &h).unwrap();
        assert_eq!(
            af_action(&g_found, omega.value()).unwrap(),
            omega2.value().clone()
        );
    }

    #[test]
    fn lift_gauge_tracks_nontrivial_stabilizer_class() {
        // Twist the witness by a stabilizer element with a nonzero twisted
        // H^0 class: the lift must land in a genuinely different reduced
        // class than the naive preimage.
        let setup = contractible_setup(fixtures::quantum_heisenberg(), &[0], 1, 2);
        let hm = setup.source.ctx().param(0);
        let omega = MCElement::new(setup.source.term(1, hm, 0, int(1))).unwrap();
        let gw = GaugeElement::from_log(setup.source.term(0, hm, 1, int(1))).unwrap();
        let omega2 = af_action_mc(&gw, &omega).unwrap();
        let chi = MCElement::new(setup.map(omega.value())).unwrap();
        // h x is central and d-closed on the target side, with nonzero
        // twisted H^0 class (the image of d_chi in degree 0 is h^2 x).
        let (dx, lx) = setup.phi.target().space().find("x").unwrap();
        assert_eq!(dx, 0);
        let kappa = GaugeElement::from_log(setup.target.term(0, hm, lx, int(1))).unwrap();
        assert!(stabilizes(&kappa, &chi).unwrap());
        let h_twisted = setup.map_gauge(&gw).compose(&kappa).unwrap();
        assert!(!reduced_equal(&setup.map_gauge(&gw), &h_twisted, &chi).unwrap());
        let g_found = lift_gauge(&setup, &omega, &omega2, &h_twisted).unwrap();
        assert_eq!(
            af_action(&g_found, omega.value()).unwrap(),
            omega2.value().clone()
        );
        assert!(reduced_equal(&setup.map_gauge(&g_found), &h_twisted, &chi).unwrap());
        // ... and therefore not reduced-equal to the naive preimage.
        assert!(!reduced_equal(&g_found, &gw, &omega).unwrap());
    }

    #[test]
    fn transfer_rejects_non_quasi_iso() {
        let g = fixtures::zero_differential();
        let phi = DGLAMorphism::new(g.clone(), g, Default::default()).unwrap();
        let setup = MorphismSetup::new(phi, TruncationContext::new(1, 2));
        let chi = MCElement::zero(&setup.target);
        assert!(transfer_mc(&setup, &chi).is_err());
        let omega = MCElement::zero(&setup.source);
        let h = GaugeElement::identity(&setup.target);
        assert!(lift_gauge(&setup, &omega, &omega, &h).is_err());
    }
}
