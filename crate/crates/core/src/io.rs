//! JSON file formats: DG Lie algebras by structure constants, morphisms,
//! elements of `m (x) g`, and L-infinity Taylor coefficients. Emission is
//! canonical (sorted keys, reduced rationals), so round-trips are bit-exact.

use crate::dgla::{DGLieAlgebra, RawDGLA};
use crate::error::{Error, Result};
use crate::graded::GradedSpace;
use crate::linalg::QMatrix;
use crate::linf::LInfMorphism;
use crate::morphism::DGLAMorphism;
use crate::nilpotent::{Element, NilpotentDGLA};
use crate::rat;
use crate::trunc::TruncationContext;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

// ---------------------------------------------------------------------------
// DG Lie algebra files
// ---------------------------------------------------------------------------

/// `[(target name, rational string)]`, the sparse value of one entry.
pub type NamedTargets = Vec<(String, String)>;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct DGLAFile {
    /// degree -> ordered basis names
    pub degrees: BTreeMap<i32, Vec<String>>,
    /// source name -> targets
    pub differential: Vec<(String, NamedTargets)>,
    /// (x, y) with x <= y in global order -> targets
    pub bracket: Vec<((String, String), NamedTargets)>,
}

pub fn dgla_to_file(g: &DGLieAlgebra) -> DGLAFile {
    let sp = g.space();
    let mut degrees = BTreeMap::new();
    for d in sp.degrees() {
        degrees.insert(d, sp.names(d).to_vec());
    }
    let mut differential = Vec::new();
    for d in sp.degrees() {
        let m = g.d_matrix(d);
        for c in 0..m.cols() {
            let mut targets = Vec::new();
            for r in 0..m.rows() {
                if !m[(r, c)].is_zero() {
                    targets.push((sp.name(d + 1, r).to_string(), rat::format(&m[(r, c)])));
                }
            }
            if !targets.is_empty() {
                differential.push((sp.name(d, c).to_string(), targets));
            }
        }
    }
    let mut bracket = Vec::new();
    for (&(x, y), ts) in &g.raw().bracket {
        let targets: Vec<(String, String)> = ts
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(z, c)| (sp.global_name(*z).to_string(), rat::format(c)))
            .collect();
        if !targets.is_empty() {
            bracket.push((
                (sp.global_name(x).to_string(), sp.global_name(y).to_string()),
                targets,
            ));
        }
    }
    DGLAFile {
        degrees,
        differential,
        bracket,
    }
}

/// Parses into unvalidated structure-constant data (so a CLI can report
/// axiom violations instead of refusing to parse).
pub fn file_to_raw(file: &DGLAFile) -> Result<RawDGLA> {
    let space = GradedSpace::new(
        file.degrees
            .iter()
            .map(|(d, ns)| (*d, ns.clone()))
            .collect(),
    )?;
    let find = |name: &str| -> Result<(i32, usize)> {
        space
            .find(name)
            .ok_or_else(|| Error::Parse(format!("unknown basis name {name:?}")))
    };
    let mut differential: BTreeMap<i32, QMatrix> = BTreeMap::new();
    for (src, targets) in &file.differential {
        let (d, l) = find(src)?;
        let m = differential
            .entry(d)
            .or_insert_with(|| QMatrix::zero(space.dim(d + 1), space.dim(d)));
        for (tgt, c) in targets {
            let (dt, lt) = find(tgt)?;
            if dt != d + 1 {
                return Err(Error::Parse(format!(
                    "differential entry {src} -> {tgt} is not degree +1"
                )));
            }
            m[(lt, l)] = rat::parse(c)?;
        }
    }
    let mut bracket = BTreeMap::new();
    for ((x, y), targets) in &file.bracket {
        let (dx, lx) = find(x)?;
        let (dy, ly) = find(y)?;
        let gx = space.global(dx, lx);
        let gy = space.global(dy, ly);
        if gx > gy {
            return Err(Error::Parse(format!(
                "bracket key ({x}, {y}) is not in canonical order"
            )));
        }
        let mut ts = Vec::new();
        for (z, c) in targets {
            let (dz, lz) = find(z)?;
            ts.push((space.global(dz, lz), rat::parse(c)?));
        }
        bracket.insert((gx, gy), ts);
    }
    Ok(RawDGLA {
        space,
        differential,
        bracket,
    })
}

pub fn file_to_dgla(file: &DGLAFile) -> Result<DGLieAlgebra> {
    let raw = file_to_raw(file)?;
    DGLieAlgebra::new(raw)
        .map_err(|report| Error::Precondition(format!("algebra fails validation:\n{report}")))
}

// ---------------------------------------------------------------------------
// Morphism files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct MorphismFile {
    /// File reference (path) of the source algebra.
    pub source: String,
    /// File reference (path) of the target algebra.
    pub target: String,
    /// degree -> row-major matrix of rationals, dim_target(d) x dim_source(d)
    pub components: BTreeMap<i32, Vec<Vec<String>>>,
}

pub fn morphism_to_file(phi: &DGLAMorphism, source_ref: &str, target_ref: &str) -> MorphismFile {
    let mut components = BTreeMap::new();
    for d in phi.source().space().degrees() {
        let m = phi.component(d);
        if m.is_zero() {
            continue;
        }
        let rows: Vec<Vec<String>> = (0..m.rows())
            .map(|r| (0..m.cols()).map(|c| rat::format(&m[(r, c)])).collect())
            .collect();
        components.insert(d, rows);
    }
    MorphismFile {
        source: source_ref.to_string(),
        target: target_ref.to_string(),
        components,
    }
}

pub fn file_to_morphism(
    file: &MorphismFile,
    source: DGLieAlgebra,
    target: DGLieAlgebra,
) -> Result<DGLAMorphism> {
    let mut components = BTreeMap::new();
    for (&d, rows) in &file.components {
        let r = target.space().dim(d);
        let c = source.space().dim(d);
        if rows.len() != r || rows.iter().any(|row| row.len() != c) {
            return Err(Error::Parse(format!(
                "component at degree {d} must be {r}x{c}"
            )));
        }
        let mut m = QMatrix::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                m[(i, j)] = rat::parse(entry)?;
            }
        }
        components.insert(d, m);
    }
    DGLAMorphism::new(source, target, components)
}

// ---------------------------------------------------------------------------
// Element files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ContextFile {
    pub params: usize,
    pub order: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ElementFile {
    pub context: ContextFile,
    pub degree: i32,
    /// (basis name, monomial exponent vector, rational)
    pub terms: Vec<(String, Vec<u32>, String)>,
}

pub fn element_to_file(e: &Element) -> ElementFile {
    let ambient = e.ambient();
    let sp = ambient.algebra().space();
    let mut terms: Vec<(String, Vec<u32>, String)> = e
        .terms()
        .map(|((m, l), c)| {
            (
                sp.name(e.degree(), l).to_string(),
                ambient.ctx().monomial(m).to_vec(),
                rat::format(c),
            )
        })
        .collect();
    terms.sort();
    ElementFile {
        context: ContextFile {
            params: ambient.ctx().num_params(),
            order: ambient.ctx().order(),
        },
        degree: e.degree(),
        terms,
    }
}

pub fn file_to_element(file: &ElementFile, ambient: &NilpotentDGLA) -> Result<Element> {
    if file.context.params != ambient.ctx().num_params()
        || file.context.order != ambient.ctx().order()
    {
        return Err(Error::ContextMismatch);
    }
    let sp = ambient.algebra().space();
    let mut terms = Vec::new();
    for (name, expo, c) in &file.terms {
        let (d, l) = sp
            .find(name)
            .ok_or_else(|| Error::Parse(format!("unknown basis name {name:?}")))?;
        if d != file.degree {
            return Err(Error::Parse(format!(
                "term {name} has degree {d}, element declares {}",
                file.degree
            )));
        }
        let mono = ambient
            .ctx()
            .lookup(expo)
            .ok_or_else(|| Error::Parse(format!("monomial {expo:?} out of range")))?;
        terms.push((mono, l, rat::parse(c)?));
    }
    ambient.from_terms(file.degree, terms)
}

pub fn context_from_file(file: &ContextFile) -> Arc<TruncationContext> {
    TruncationContext::new(file.params, file.order)
}

// ---------------------------------------------------------------------------
// L-infinity morphism files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct LinfOrderEntry {
    pub j: usize,
    /// (canonically sorted input names, target name, rational)
    pub entries: Vec<(Vec<String>, String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct LinfFile {
    pub source: String,
    pub target: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    pub orders: Vec<LinfOrderEntry>,
}

pub fn linf_to_file(phi: &LInfMorphism, source_ref: &str, target_ref: &str) -> LinfFile {
    let mut by_order: BTreeMap<usize, Vec<(Vec<String>, String, String)>> = BTreeMap::new();
    for (mono, targets) in phi.coeffs() {
        let names: Vec<String> = mono
            .iter()
            .map(|&id| phi.source().space().global_name(id).to_string())
            .collect();
        for (t, c) in targets {
            if c.is_zero() {
                continue;
            }
            by_order.entry(mono.len()).or_default().push((
                names.clone(),
                phi.target().space().global_name(*t).to_string(),
                rat::format(c),
            ));
        }
    }
    let orders = by_order
        .into_iter()
        .map(|(j, mut entries)| {
            entries.sort();
            LinfOrderEntry { j, entries }
        })
        .collect();
    LinfFile {
        source: source_ref.to_string(),
        target: target_ref.to_string(),
        horizon: phi.horizon,
        orders,
    }
}

pub fn file_to_linf(
    file: &LinfFile,
    source: DGLieAlgebra,
    target: DGLieAlgebra,
) -> Result<LInfMorphism> {
    let mut coeffs: BTreeMap<Vec<usize>, Vec<(usize, crate::rat::Rat)>> = BTreeMap::new();
    for order in &file.orders {
        for (inputs, tgt, c) in &order.entries {
            if inputs.len() != order.j {
                return Err(Error::Parse(format!(
                    "entry arity {} does not match declared order {}",
                    inputs.len(),
                    order.j
                )));
            }
            let mut mono = Vec::new();
            for name in inputs {
                let (d, l) = source
                    .space()
                    .find(name)
                    .ok_or_else(|| Error::Parse(format!("unknown source name {name:?}")))?;
                mono.push(source.space().global(d, l));
            }
            let (dt, lt) = target
                .space()
                .find(tgt)
                .ok_or_else(|| Error::Parse(format!("unknown target name {tgt:?}")))?;
            coeffs
                .entry(mono)
                .or_default()
                .push((target.space().global(dt, lt), rat::parse(c)?));
        }
    }
    LInfMorphism::new(source, target, file.horizon, coeffs)
}

// ---------------------------------------------------------------------------
// Canonical emission helpers
// ---------------------------------------------------------------------------

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn from_json_str<'a, T: Deserialize<'a>>(s: &'a str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

use num::Zero;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rat::int;
    use proptest::prelude::*;

    #[test]
    fn dgla_roundtrip_all_fixtures() {
        for name in fixtures::FIXTURE_NAMES {
            let g = fixtures::by_name(name).unwrap();
            let file = dgla_to_file(&g);
            let text = to_json_string(&file);
            let parsed: DGLAFile = from_json_str(&text).unwrap();
            assert_eq!(parsed, file, "{name}");
            let g2 = file_to_dgla(&parsed).unwrap();
            let file2 = dgla_to_file(&g2);
            assert_eq!(to_json_string(&file2), text, "{name} byte-stable");
        }
    }

    #[test]
    fn element_roundtrip() {
        let g = fixtures::quantum_heisenberg();
        let amb = NilpotentDGLA::new(g, TruncationContext::new(2, 2));
        let e = amb
            .from_terms(1, vec![(0, 0, int(2)), (3, 0, crate::rat::frac(-1, 3))])
            .unwrap();
        let file = element_to_file(&e);
        let text = to_json_string(&file);
        let parsed: ElementFile = from_json_str(&text).unwrap();
        let e2 = file_to_element(&parsed, &amb).unwrap();
        assert_eq!(e, e2);
    }

    #[test]
    fn morphism_roundtrip() {
        let base = fixtures::solvable();
        let (ext, phi) = fixtures::contractible_extension(&base, &[0]);
        let file = morphism_to_file(&phi, "base.json", "ext.json");
        let text = to_json_string(&file);
        let parsed: MorphismFile = from_json_str(&text).unwrap();
        let phi2 = file_to_morphism(&parsed, base, ext).unwrap();
        assert_eq!(phi.components(), phi2.components());
    }

    #[test]
    fn linf_roundtrip() {
        let g = fixtures::solvable();
        let mut comps = BTreeMap::new();
        comps.insert(0, QMatrix::from_rows(vec![vec![int(2)]]));
        comps.insert(1, QMatrix::from_rows(vec![vec![int(2)]]));
        let linear = crate::linf::LInfMorphism::from_linear(g.clone(), g.clone(), &comps);
        let phi = crate::linf::extend_one_order(&linear, 2).unwrap().unwrap();
        let file = linf_to_file(&phi, "g.json", "g.json");
        let text = to_json_string(&file);
        let parsed: LinfFile = from_json_str(&text).unwrap();
        let phi2 = file_to_linf(&parsed, g.clone(), g).unwrap();
        assert_eq!(phi.coeffs(), phi2.coeffs());
        assert_eq!(
            to_json_string(&linf_to_file(&phi2, "g.json", "g.json")),
            text
        );
    }

    proptest! {
        #[test]
        fn element_file_roundtrip_random(coins in proptest::collection::vec((0usize..5, 0usize..1, -6i64..=6), 0..8)) {
            let g = fixtures::quantum_heisenberg();
            let amb = NilpotentDGLA::new(g, TruncationContext::new(1, 3));
            let mut terms = Vec::new();
            for (m, l, c) in coins {
                if m < amb.ctx().dim_m() {
                    terms.push((m, l, int(c)));
                }
            }
            let e = amb.from_terms(1, terms).unwrap();
            let file = element_to_file(&e);
            let text = to_json_string(&file);
            let parsed: ElementFile = from_json_str(&text).unwrap();
            let e2 = file_to_element(&parsed, &amb).unwrap();
            prop_assert_eq!(e, e2);
            prop_assert_eq!(to_json_string(&element_to_file(&parsed_to_elem(&parsed, &amb))), text);
        }
    }

    fn parsed_to_elem(f: &ElementFile, amb: &NilpotentDGLA) -> Element {
        file_to_element(f, amb).unwrap()
    }
}
