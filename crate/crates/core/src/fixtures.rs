//! Bundled example algebras and constructions used by tests and the CLI.

use crate::dgla::{DGLieAlgebra, RawDGLA};
use crate::graded::GradedSpace;
use crate::linalg::QMatrix;
use crate::morphism::DGLAMorphism;
use crate::rat::{int, Rat};
use std::collections::BTreeMap;

type BracketSpec<'a> = Vec<((&'a str, &'a str), Vec<(&'a str, Rat)>)>;

fn build(
    degrees: Vec<(i32, Vec<&str>)>,
    differential: Vec<(i32, Vec<Vec<i64>>)>,
    bracket: BracketSpec<'_>,
) -> DGLieAlgebra {
    let space = GradedSpace::new(
        degrees
            .into_iter()
            .map(|(d, ns)| (d, ns.into_iter().map(String::from).collect()))
            .collect(),
    )
    .unwrap();
    let differential = differential
        .into_iter()
        .map(|(d, rows)| {
            (
                d,
                QMatrix::from_rows(
                    rows.into_iter()
                        .map(|r| r.into_iter().map(int).collect())
                        .collect(),
                ),
            )
        })
        .collect();
    let mut br = BTreeMap::new();
    for ((x, y), targets) in bracket {
        let gx = {
            let (d, l) = space.find(x).unwrap();
            space.global(d, l)
        };
        let gy = {
            let (d, l) = space.find(y).unwrap();
            space.global(d, l)
        };
        assert!(gx <= gy, "store brackets for x <= y only");
        let t = targets
            .into_iter()
            .map(|(z, c)| {
                let (d, l) = space.find(z).unwrap();
                (space.global(d, l), c)
            })
            .collect();
        br.insert((gx, gy), t);
    }
    DGLieAlgebra::new(RawDGLA {
        space,
        differential,
        bracket: br,
    })
    .unwrap()
}

/// Abelian two-term complex `u -> v`: d(u) = v, zero bracket. Acyclic.
pub fn abelian_two_term() -> DGLieAlgebra {
    build(
        vec![(0, vec!["u"]), (1, vec!["v"])],
        vec![(0, vec![vec![1]])],
        vec![],
    )
}

/// Zero differential, zero bracket, two generators in each of degrees 0..2.
pub fn zero_differential() -> DGLieAlgebra {
    build(
        vec![
            (0, vec!["p0", "q0"]),
            (1, vec!["p1", "q1"]),
            (2, vec!["p2", "q2"]),
        ],
        vec![],
        vec![],
    )
}

/// `[v, v] = 2w` in odd degree with zero differential. The curvature of
/// `c h v` is `c^2 h^2 w`, the standard obstructed example.
pub fn obstruction_square() -> DGLieAlgebra {
    build(
        vec![(1, vec!["v"]), (2, vec!["w"])],
        vec![],
        vec![(("v", "v"), vec![("w", int(2))])],
    )
}

/// d(x) = u plus `[v, v] = 2w`: has nontrivial H^1 (class of v) and
/// H^2 (class of w) with a genuine obstruction, used for o1/o2 sweeps.
pub fn mixed_obstruction() -> DGLieAlgebra {
    build(
        vec![(0, vec!["x"]), (1, vec!["u", "v"]), (2, vec!["w"])],
        vec![(0, vec![vec![1], vec![0]])],
        vec![(("v", "v"), vec![("w", int(2))])],
    )
}

/// Quantum-type algebra with a nonzero degree -1 part: the odd pairing
/// [a, v] = x with a central x, graded by [y, a] = a, [y, v] = -v. d = 0.
/// Every degree-1 element is Maurer-Cartan and twists the degree -1 line
/// nontrivially.
pub fn quantum_heisenberg() -> DGLieAlgebra {
    build(
        vec![(-1, vec!["a"]), (0, vec!["x", "y"]), (1, vec!["v"])],
        vec![],
        vec![
            (("a", "y"), vec![("a", int(-1))]),
            (("a", "v"), vec![("x", int(1))]),
            (("y", "v"), vec![("v", int(-1))]),
        ],
    )
}

/// Abelian with a degree -2 tail: d(m) = n1, d(n2) = p. Not quantum type.
pub fn negative_tail() -> DGLieAlgebra {
    build(
        vec![(-2, vec!["m"]), (-1, vec!["n1", "n2"]), (0, vec!["p"])],
        vec![(-2, vec![vec![1], vec![0]]), (-1, vec![vec![0, 1]])],
        vec![],
    )
}

/// Two-dimensional solvable example with interacting d and bracket:
/// d(x) = v, [x, v] = v.
pub fn solvable() -> DGLieAlgebra {
    build(
        vec![(0, vec!["x"]), (1, vec!["v"])],
        vec![(0, vec![vec![1]])],
        vec![(("x", "v"), vec![("v", int(1))])],
    )
}

/// sl2 concentrated in degree 0: a nonabelian gauge group.
pub fn sl2_degree_zero() -> DGLieAlgebra {
    build(
        vec![(0, vec!["e", "f", "h"])],
        vec![],
        vec![
            (("e", "f"), vec![("h", int(1))]),
            (("e", "h"), vec![("e", int(-2))]),
            (("f", "h"), vec![("f", int(2))]),
        ],
    )
}

/// Two-step nilpotent in degrees 1 and 2: [v1, v2] = w, [vi, vi] = 0.
pub fn two_step() -> DGLieAlgebra {
    build(
        vec![(1, vec!["v1", "v2"]), (2, vec!["w"])],
        vec![],
        vec![(("v1", "v2"), vec![("w", int(1))])],
    )
}

/// Strictly upper-triangular 4x4 matrices in degree 0 (nilpotency class 3):
/// commutator brackets [e_ab, e_cd] = d_bc e_ad - d_da e_cb. Its elements
/// have an exact matrix realization, used as an independent oracle for the
/// exponential calculus.
pub fn upper_triangular_4() -> DGLieAlgebra {
    build(
        vec![(0, vec!["m12", "m13", "m14", "m23", "m24", "m34"])],
        vec![],
        vec![
            (("m12", "m23"), vec![("m13", int(1))]),
            (("m12", "m24"), vec![("m14", int(1))]),
            (("m13", "m34"), vec![("m14", int(1))]),
            (("m23", "m34"), vec![("m24", int(1))]),
        ],
    )
}

/// Extends `base` by acyclic two-term cones in the listed degrees (zero
/// cross-bracket), and returns the extension with the inclusion, which is a
/// quasi-isomorphism by construction.
pub fn contractible_extension(
    base: &DGLieAlgebra,
    cone_degrees: &[i32],
) -> (DGLieAlgebra, DGLAMorphism) {
    let sp = base.space();
    let (lo, hi) = sp.window();
    let mut degrees: Vec<(i32, Vec<String>)> = (lo..=hi)
        .filter(|&d| sp.dim(d) > 0)
        .map(|d| (d, sp.names(d).to_vec()))
        .collect();
    for (k, &cd) in cone_degrees.iter().enumerate() {
        for (offset, part) in [(cd, "u"), (cd + 1, "v")] {
            let name = format!("cone{k}_{part}");
            match degrees.iter_mut().find(|(d, _)| *d == offset) {
                Some((_, names)) => names.push(name),
                None => degrees.push((offset, vec![name])),
            }
        }
    }
    let space = GradedSpace::new(degrees).unwrap();

    // Differential: base blocks plus d(cone_u) = cone_v.
    let (nlo, nhi) = space.window();
    let mut differential = BTreeMap::new();
    for d in nlo..=nhi {
        let rows = space.dim(d + 1);
        let cols = space.dim(d);
        if rows == 0 || cols == 0 {
            continue;
        }
        let mut m = QMatrix::zero(rows, cols);
        let base_d = base.d_matrix(d);
        for r in 0..base_d.rows() {
            for c in 0..base_d.cols() {
                // Base vectors come first in each degree by construction.
                m[(r, c)] = base_d[(r, c)].clone();
            }
        }
        for (k, &cd) in cone_degrees.iter().enumerate() {
            if cd == d {
                let (du, lu) = space.find(&format!("cone{k}_u")).unwrap();
                let (dv, lv) = space.find(&format!("cone{k}_v")).unwrap();
                debug_assert_eq!((du, dv), (d, d + 1));
                m[(lv, lu)] = int(1);
            }
        }
        if !m.is_zero() {
            differential.insert(d, m);
        }
    }

    // Bracket: base structure constants reindexed; cones bracket to zero.
    let mut bracket = BTreeMap::new();
    for (&(x, y), targets) in &base.raw().bracket {
        let remap = |g: usize| {
            let name = sp.global_name(g);
            let (d, l) = space.find(name).unwrap();
            space.global(d, l)
        };
        let (nx, ny) = (remap(x), remap(y));
        let (a, b, flip) = if nx <= ny {
            (nx, ny, false)
        } else {
            (ny, nx, true)
        };
        let t: Vec<(usize, Rat)> = targets
            .iter()
            .map(|(z, c)| {
                let nz = remap(*z);
                let c = if flip {
                    let (dx, _) = space.degree_of_global(nx);
                    let (dy, _) = space.degree_of_global(ny);
                    -(c * crate::dgla::koszul_sign(dx, dy))
                } else {
                    c.clone()
                };
                (nz, c)
            })
            .collect();
        bracket.insert((a, b), t);
    }

    let ext = DGLieAlgebra::new(RawDGLA {
        space,
        differential,
        bracket,
    })
    .unwrap();

    // Inclusion morphism.
    let mut components = BTreeMap::new();
    for d in lo..=hi {
        let cols = sp.dim(d);
        if cols == 0 {
            continue;
        }
        let rows = ext.space().dim(d);
        let mut m = QMatrix::zero(rows, cols);
        for c in 0..cols {
            let name = sp.name(d, c);
            let (_, l) = ext.space().find(name).unwrap();
            m[(l, c)] = int(1);
        }
        components.insert(d, m);
    }
    let phi = DGLAMorphism::new(base.clone(), ext.clone(), components).unwrap();
    (ext, phi)
}

pub const FIXTURE_NAMES: &[&str] = &[
    "abelian-two-term",
    "zero-differential",
    "obstruction-square",
    "mixed-obstruction",
    "quantum-heisenberg",
    "negative-tail",
    "solvable",
    "sl2-degree-zero",
    "two-step",
    "nilpotent-upper4",
];

pub fn by_name(name: &str) -> Option<DGLieAlgebra> {
    Some(match name {
        "abelian-two-term" => abelian_two_term(),
        "zero-differential" => zero_differential(),
        "obstruction-square" => obstruction_square(),
        "mixed-obstruction" => mixed_obstruction(),
        "quantum-heisenberg" => quantum_heisenberg(),
        "negative-tail" => negative_tail(),
        "solvable" => solvable(),
        "sl2-degree-zero" => sl2_degree_zero(),
        "two-step" => two_step(),
        "nilpotent-upper4" => upper_triangular_4(),
        _ => return None,
    })
}
