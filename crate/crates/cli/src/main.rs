//! Command-line front end: file IO, validation, Maurer-Cartan and gauge
//! calculations, groupoid checks, L-infinity operations, and the bundled
//! example library.
//!
//! Exit codes: 0 success, 1 validation failure, 2 parse/IO error,
//! 3 precondition violation, 4 mathematical obstruction found (a legitimate
//! answer, distinguished from crashes so scripts can react).

use clap::{Args, Parser, Subcommand};
use deligne_core::deligne::{
    connect_one_order, gauge_connect, lift_mc_one_order, o1, o2, reduced_equal, stabilizer_exp,
    transfer_mc, Connectivity, MorphismSetup, ObstructionClass,
};
use deligne_core::io::{self, ContextFile, DGLAFile, ElementFile, LinfFile, MorphismFile};
use deligne_core::linf::{gauge_respect, mc_pushforward, LInfMorphism};
use deligne_core::mc_gauge::{
    af_action, bch, curvature, ElemPoly, GaugeElement, MCElement, MCPath,
};
use deligne_core::nilpotent::{Element, NilpotentDGLA};
use deligne_core::rat;
use deligne_core::sample::Sampler;
use deligne_core::trunc::TruncationContext;
use deligne_core::two_grpd::{build_deligne_crossed, pi2, weak_equiv_evidence, DeligneCrossed};
use deligne_core::{DGLieAlgebra, Error};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_INVALID: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_OBSTRUCTION: u8 = 4;

#[derive(Parser)]
#[command(
    name = "deligne",
    version,
    about = "Exact deformation theory over truncated parameter algebras"
)]
struct Cli {
    /// Truncation order N of the parameter algebra Q[h_1..h_k]/m^(N+1).
    #[arg(long, global = true, default_value_t = 3)]
    order: usize,
    /// Number of deformation parameters k.
    #[arg(long, global = true, default_value_t = 1)]
    params: usize,
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Parallelism for independent sample checks.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate DG Lie algebra files against all axioms.
    Validate { paths: Vec<PathBuf> },
    /// Maurer-Cartan operations.
    #[command(subcommand)]
    Mc(McCmd),
    /// Gauge group operations.
    #[command(subcommand)]
    Gauge(GaugeCmd),
    /// Transfer Maurer-Cartan data backwards along a quasi-isomorphism.
    Transfer {
        /// Morphism file (a quasi-isomorphism phi : g -> h).
        #[arg(long)]
        morphism: PathBuf,
        /// Maurer-Cartan element of m (x) h.
        #[arg(long)]
        mc: PathBuf,
    },
    /// Deligne 2-groupoid computations.
    #[command(subcommand)]
    Groupoid(GroupoidCmd),
    /// L-infinity morphism operations.
    #[command(subcommand)]
    Linf(LinfCmd),
    /// Bundled example library.
    #[command(subcommand)]
    Examples(ExamplesCmd),
}

#[derive(Args)]
struct AlgebraArg {
    /// DG Lie algebra file.
    #[arg(long)]
    algebra: PathBuf,
}

#[derive(Subcommand)]
enum McCmd {
    /// Curvature d(w) + 1/2 [w, w] of a degree-1 element.
    Curvature {
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long)]
        element: PathBuf,
    },
    /// Lift a Maurer-Cartan element order by order; reports the first
    /// obstruction class if one appears.
    Lift {
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long)]
        element: PathBuf,
        /// Lift only the single step to this layer.
        #[arg(long)]
        at: Option<usize>,
    },
    /// Decide gauge connectivity of two Maurer-Cartan elements.
    Connect {
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// Restrict to a single socle layer.
        #[arg(long)]
        at: Option<usize>,
    },
    /// Twisted-H^0 presentation of the reduced stabilizer.
    Stabilizer {
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long)]
        element: PathBuf,
    },
}

#[derive(Subcommand)]
enum GaugeCmd {
    /// Apply Af(exp(log)) to a degree-1 element.
    Act {
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long)]
        gauge: PathBuf,
        #[arg(long)]
        element: PathBuf,
    },
    /// Group product of two gauge elements (logarithms in, logarithm out).
    Compose {
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    /// Equality in the reduced hom-set.
    ReducedEqual {
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long)]
        mc: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    /// Integrate a polynomial Maurer-Cartan path to a gauge element.
    IntegratePath {
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long)]
        path: PathBuf,
    },
}

#[derive(Subcommand)]
enum GroupoidCmd {
    /// Homotopy invariants of the Deligne 2-groupoid at an object.
    Pi {
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long)]
        level: u8,
        #[arg(long)]
        element: PathBuf,
        /// Second object, required for level 0 (connectivity witness).
        #[arg(long)]
        element2: Option<PathBuf>,
    },
    /// Validate the crossed-groupoid axioms on sampled Deligne data.
    CrossedCheck {
        #[command(flatten)]
        algebra: AlgebraArg,
        /// Maurer-Cartan object files.
        #[arg(long)]
        mc: Vec<PathBuf>,
        /// Gauge files generating sample 1-cells.
        #[arg(long)]
        gauge: Vec<PathBuf>,
    },
    /// Weak-equivalence evidence for a quasi-isomorphism.
    WeakEquiv {
        #[arg(long)]
        morphism: PathBuf,
        /// Number of sampled objects per side.
        #[arg(long, default_value_t = 3)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum LinfCmd {
    /// Check the coalgebra-morphism equation weight by weight.
    Validate {
        #[arg(long)]
        linf: PathBuf,
        #[arg(long, default_value_t = 3)]
        weight: usize,
    },
    /// Maurer-Cartan pushforward.
    Push {
        #[arg(long)]
        linf: PathBuf,
        #[arg(long)]
        mc: PathBuf,
    },
    /// Transport a gauge relation through the morphism.
    Respect {
        #[arg(long)]
        linf: PathBuf,
        #[arg(long)]
        mc: PathBuf,
        #[arg(long)]
        gauge: PathBuf,
    },
    /// Taylor coefficients of the composite up to a weight.
    Compose {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, default_value_t = 3)]
        weight: usize,
    },
}

#[derive(Subcommand)]
enum ExamplesCmd {
    /// List the bundled fixtures.
    List,
    /// Write a fixture (and its companions) as JSON files.
    Emit {
        name: String,
        /// Output directory.
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

// ---------------------------------------------------------------------------

struct Fail {
    code: u8,
    message: String,
}

impl Fail {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Fail {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) | Error::Io(_) => EXIT_PARSE,
            Error::Invalid(_) => EXIT_INVALID,
            _ => EXIT_PRECONDITION,
        };
        Fail::new(code, e.to_string())
    }
}

type CliResult = Result<(), Fail>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 1 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Fail> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Fail::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    io::from_json_str(&text).map_err(|e| Fail::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn load_algebra(path: &Path) -> Result<DGLieAlgebra, Fail> {
    let file: DGLAFile = read_json(path)?;
    let raw = io::file_to_raw(&file).map_err(Fail::from)?;
    DGLieAlgebra::new(raw).map_err(|report| {
        Fail::new(
            EXIT_INVALID,
            format!("{} fails validation:\n{report}", path.display()),
        )
    })
}

fn load_morphism(path: &Path) -> Result<deligne_core::DGLAMorphism, Fail> {
    let file: MorphismFile = read_json(path)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let source = load_algebra(&dir.join(&file.source))?;
    let target = load_algebra(&dir.join(&file.target))?;
    io::file_to_morphism(&file, source, target).map_err(Fail::from)
}

fn load_linf(path: &Path) -> Result<LInfMorphism, Fail> {
    let file: LinfFile = read_json(path)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let source = load_algebra(&dir.join(&file.source))?;
    let target = load_algebra(&dir.join(&file.target))?;
    io::file_to_linf(&file, source, target).map_err(Fail::from)
}

fn ambient(cli: &Cli, algebra: DGLieAlgebra) -> NilpotentDGLA {
    NilpotentDGLA::new(algebra, TruncationContext::new(cli.params, cli.order))
}

fn load_element(path: &Path, amb: &NilpotentDGLA) -> Result<Element, Fail> {
    let file: ElementFile = read_json(path)?;
    io::file_to_element(&file, amb).map_err(Fail::from)
}

fn load_mc(path: &Path, amb: &NilpotentDGLA) -> Result<MCElement, Fail> {
    let e = load_element(path, amb)?;
    MCElement::new(e).map_err(|e| Fail::new(EXIT_PRECONDITION, format!("{}: {e}", path.display())))
}

fn load_gauge(path: &Path, amb: &NilpotentDGLA) -> Result<GaugeElement, Fail> {
    let e = load_element(path, amb)?;
    GaugeElement::from_log(e)
        .map_err(|e| Fail::new(EXIT_PRECONDITION, format!("{}: {e}", path.display())))
}

fn print_element(cli: &Cli, label: &str, e: &Element) {
    let file = io::element_to_file(e);
    if cli.json {
        println!("{}", io::to_json_string(&file).trim_end());
    } else {
        println!("{label}:");
        if file.terms.is_empty() {
            println!("  0");
        }
        for (name, expo, c) in &file.terms {
            println!("  {c} * h^{expo:?} {name}");
        }
    }
}

#[derive(Serialize)]
struct ObstructionPayload {
    level: String,
    order: usize,
    degree: i32,
    definitive: bool,
    representative: ElementFile,
    class: Vec<(Vec<u32>, Vec<String>)>,
}

fn obstruction_payload(class: &ObstructionClass, definitive: bool) -> ObstructionPayload {
    let ambient = class.representative.ambient();
    ObstructionPayload {
        level: match class.level {
            deligne_core::deligne::ObstructionLevel::O1 => "o1".into(),
            deligne_core::deligne::ObstructionLevel::O2 => "o2".into(),
        },
        order: class.order,
        degree: class.degree,
        definitive,
        representative: io::element_to_file(&class.representative),
        class: class
            .coords
            .iter()
            .map(|(m, v)| {
                (
                    ambient.ctx().monomial(*m).to_vec(),
                    v.iter().map(rat::format).collect(),
                )
            })
            .collect(),
    }
}

fn fail_obstruction(class: &ObstructionClass, definitive: bool) -> Fail {
    let payload = obstruction_payload(class, definitive);
    println!("{}", io::to_json_string(&payload).trim_end());
    let what = if definitive {
        "obstruction"
    } else {
        "greedy lifting stuck (inconclusive)"
    };
    Fail::new(
        EXIT_OBSTRUCTION,
        format!("{what} at order {} in H^{}", class.order, class.degree),
    )
}

fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Validate { paths } => cmd_validate(cli, paths),
        Command::Mc(mc) => cmd_mc(cli, mc),
        Command::Gauge(g) => cmd_gauge(cli, g),
        Command::Transfer { morphism, mc } => cmd_transfer(cli, morphism, mc),
        Command::Groupoid(g) => cmd_groupoid(cli, g),
        Command::Linf(l) => cmd_linf(cli, l),
        Command::Examples(e) => cmd_examples(cli, e),
    }
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ValidateEntry {
    file: String,
    valid: bool,
    violations: Vec<String>,
}

fn cmd_validate(cli: &Cli, paths: &[PathBuf]) -> CliResult {
    if paths.is_empty() {
        return Err(Fail::new(EXIT_PARSE, "no files given"));
    }
    let mut entries = Vec::new();
    let mut all_valid = true;
    for path in paths {
        let file: DGLAFile = read_json(path)?;
        let raw = io::file_to_raw(&file).map_err(Fail::from)?;
        let report = raw.validate();
        all_valid &= report.is_valid();
        entries.push(ValidateEntry {
            file: path.display().to_string(),
            valid: report.is_valid(),
            violations: report
                .violations
                .iter()
                .map(|v| format!("{} on ({})", v.axiom, v.witness.join(", ")))
                .collect(),
        });
    }
    if cli.json {
        println!("{}", io::to_json_string(&entries).trim_end());
    } else {
        for e in &entries {
            if e.valid {
                println!("{}: valid", e.file);
            } else {
                println!("{}: INVALID", e.file);
                for v in &e.violations {
                    println!("  {v}");
                }
            }
        }
    }
    if all_valid {
        Ok(())
    } else {
        Err(Fail::new(EXIT_INVALID, "validation failed"))
    }
}

fn cmd_mc(cli: &Cli, mc: &McCmd) -> CliResult {
    match mc {
        McCmd::Curvature { algebra, element } => {
            let amb = ambient(cli, load_algebra(&algebra.algebra)?);
            let e = load_element(element, &amb)?;
            let cur = curvature(&e).map_err(Fail::from)?;
            print_element(cli, "curvature", &cur);
            Ok(())
        }
        McCmd::Lift {
            algebra,
            element,
            at,
        } => {
            let amb = ambient(cli, load_algebra(&algebra.algebra)?);
            let e = load_element(element, &amb)?;
            let orders: Vec<usize> = match at {
                Some(j) => vec![*j],
                None => (1..=amb.order()).collect(),
            };
            let mut current = e;
            for j in orders {
                match lift_mc_one_order(&current, j, None).map_err(Fail::from)? {
                    Some(next) => current = next,
                    None => {
                        let class =
                            o2(&current, &current.truncate_above(j), j).map_err(Fail::from)?;
                        return Err(fail_obstruction(&class, true));
                    }
                }
            }
            print_element(cli, "lift", &current);
            Ok(())
        }
        McCmd::Connect {
            algebra,
            left,
            right,
            at,
        } => {
            let amb = ambient(cli, load_algebra(&algebra.algebra)?);
            if let Some(j) = at {
                let l = load_element(left, &amb)?;
                let r = load_element(right, &amb)?;
                match connect_one_order(&l, &r, *j).map_err(Fail::from)? {
                    Some(g) => {
                        print_element(cli, "gauge log", g.log());
                        Ok(())
                    }
                    None => {
                        let class = o1(&l, &r, *j).map_err(Fail::from)?;
                        Err(fail_obstruction(&class, true))
                    }
                }
            } else {
                let l = load_mc(left, &amb)?;
                let r = load_mc(right, &amb)?;
                match gauge_connect(&l, &r).map_err(Fail::from)? {
                    Connectivity::Connected(g) => {
                        // Re-verifies the witness equation and the reduced
                        // denominator before printing.
                        let witness =
                            deligne_core::deligne::ReducedHomWitness::new(l.clone(), r.clone(), g)
                                .map_err(Fail::from)?;
                        print_element(cli, "gauge log", witness.witness.log());
                        Ok(())
                    }
                    Connectivity::ObstructedAtOrder { class, .. } => {
                        Err(fail_obstruction(&class, true))
                    }
                    Connectivity::Inconclusive { class, .. } => {
                        Err(fail_obstruction(&class, false))
                    }
                }
            }
        }
        McCmd::Stabilizer { algebra, element } => {
            let amb = ambient(cli, load_algebra(&algebra.algebra)?);
            let omega = load_mc(element, &amb)?;
            let data = stabilizer_exp(&omega).map_err(Fail::from)?;
            if cli.json {
                #[derive(Serialize)]
                struct StabPayload {
                    dim: usize,
                    basis: Vec<ElementFile>,
                }
                let payload = StabPayload {
                    dim: data.h0.dim(),
                    basis: data.basis.iter().map(io::element_to_file).collect(),
                };
                println!("{}", io::to_json_string(&payload).trim_end());
            } else {
                println!("twisted H^0 dimension: {}", data.h0.dim());
                for (i, b) in data.basis.iter().enumerate() {
                    print_element(cli, &format!("stabilizer direction {i}"), b);
                }
            }
            Ok(())
        }
    }
}

fn cmd_gauge(cli: &Cli, cmd: &GaugeCmd) -> CliResult {
    match cmd {
        GaugeCmd::Act {
            algebra,
            gauge,
            element,
        } => {
            let amb = ambient(cli, load_algebra(&algebra.algebra)?);
            let g = load_gauge(gauge, &amb)?;
            let e = load_element(element, &amb)?;
            let was_mc = curvature(&e).map(|c| c.is_zero()).unwrap_or(false);
            let moved = af_action(&g, &e).map_err(Fail::from)?;
            if was_mc {
                // The action must preserve the Maurer-Cartan equation;
                // re-verified before printing.
                let cur = curvature(&moved).map_err(Fail::from)?;
                assert!(cur.is_zero(), "gauge action must preserve MC");
            }
            print_element(cli, "result", &moved);
            Ok(())
        }
        GaugeCmd::Compose {
            algebra,
            left,
            right,
        } => {
            let amb = ambient(cli, load_algebra(&algebra.algebra)?);
            let l = load_gauge(left, &amb)?;
            let r = load_gauge(right, &amb)?;
            let log = bch(l.log(), r.log()).map_err(Fail::from)?;
            print_element(cli, "composite log", &log);
            Ok(())
        }
        GaugeCmd::ReducedEqual {
            algebra,
            mc,
            left,
            right,
        } => {
            let amb = ambient(cli, load_algebra(&algebra.algebra)?);
            let omega = load_mc(mc, &amb)?;
            let l = load_gauge(left, &amb)?;
            let r = load_gauge(right, &amb)?;
            let eq = reduced_equal(&l, &r, &omega).map_err(Fail::from)?;
            if cli.json {
                println!("{{\"reduced_equal\": {eq}}}");
            } else {
                println!("reduced-equal: {eq}");
            }
            Ok(())
        }
        GaugeCmd::IntegratePath { algebra, path } => {
            let amb = ambient(cli, load_algebra(&algebra.algebra)?);
            let file: PathFile = read_json(path)?;
            let mc_path = path_from_file(&file, &amb)?;
            let g = deligne_core::mc_gauge::integrate_mc_path(&mc_path).map_err(Fail::from)?;
            print_element(cli, "gauge log", g.log());
            Ok(())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PathFile {
    context: ContextFile,
    /// Coefficient of t^i of the degree-1 component, as element terms.
    one_part: Vec<Vec<(String, Vec<u32>, String)>>,
    /// Coefficient of t^i of the dt-component (degree 0).
    form_part: Vec<Vec<(String, Vec<u32>, String)>>,
}

fn path_from_file(file: &PathFile, amb: &NilpotentDGLA) -> Result<MCPath, Fail> {
    let to_poly =
        |parts: &[Vec<(String, Vec<u32>, String)>], degree: i32| -> Result<ElemPoly, Fail> {
            let coeffs: Result<Vec<Element>, Fail> = parts
                .iter()
                .map(|terms| {
                    let ef = ElementFile {
                        context: file.context.clone(),
                        degree,
                        terms: terms.clone(),
                    };
                    io::file_to_element(&ef, amb).map_err(Fail::from)
                })
                .collect();
            Ok(ElemPoly::from_coeffs(amb, degree, coeffs?))
        };
    let one = to_poly(&file.one_part, 1)?;
    let form = to_poly(&file.form_part, 0)?;
    MCPath::new(one, form)
        .map_err(|e| Fail::new(EXIT_PRECONDITION, format!("path invariant fails: {e}")))
}

fn cmd_transfer(cli: &Cli, morphism: &Path, mc: &Path) -> CliResult {
    let phi = load_morphism(morphism)?;
    let setup = MorphismSetup::new(phi, TruncationContext::new(cli.params, cli.order));
    let chi = load_mc(mc, &setup.target)?;
    let (omega, h) = transfer_mc(&setup, &chi).map_err(Fail::from)?;
    // Re-verify the defining equation before printing.
    let moved = af_action(&h, &setup.map(omega.value())).map_err(Fail::from)?;
    assert_eq!(&moved, chi.value(), "transfer equation must hold");
    if cli.json {
        #[derive(Serialize)]
        struct TransferPayload {
            omega: ElementFile,
            gauge_log: ElementFile,
        }
        let payload = TransferPayload {
            omega: io::element_to_file(omega.value()),
            gauge_log: io::element_to_file(h.log()),
        };
        println!("{}", io::to_json_string(&payload).trim_end());
    } else {
        print_element(cli, "omega (source side)", omega.value());
        print_element(cli, "gauge log (target side)", h.log());
    }
    Ok(())
}

fn cmd_groupoid(cli: &Cli, cmd: &GroupoidCmd) -> CliResult {
    match cmd {
        GroupoidCmd::Pi {
            algebra,
            level,
            element,
            element2,
        } => {
            let amb = ambient(cli, load_algebra(&algebra.algebra)?);
            let omega = load_mc(element, &amb)?;
            match level {
                0 => {
                    let other_path = element2
                        .as_ref()
                        .ok_or_else(|| Fail::new(EXIT_PARSE, "--element2 required for level 0"))?;
                    let other = load_mc(other_path, &amb)?;
                    match gauge_connect(&omega, &other).map_err(Fail::from)? {
                        Connectivity::Connected(g) => {
                            print_element(cli, "connecting gauge log", g.log());
                            Ok(())
                        }
                        Connectivity::ObstructedAtOrder { class, .. } => {
                            Err(fail_obstruction(&class, true))
                        }
                        Connectivity::Inconclusive { class, .. } => {
                            Err(fail_obstruction(&class, false))
                        }
                    }
                }
                1 => {
                    let data = stabilizer_exp(&omega).map_err(Fail::from)?;
                    println!("pi_1 (reduced automorphisms): dimension {}", data.h0.dim());
                    Ok(())
                }
                2 => {
                    let del = DeligneCrossed::new(amb.clone(), vec![omega]).map_err(Fail::from)?;
                    let p = pi2(&del, 0).map_err(Fail::from)?;
                    println!(
                        "pi_2: dimension {} (twisted H^-1 dimension {})",
                        p.dim(),
                        p.twisted_h_minus1_dim
                    );
                    for (i, b) in p.basis.iter().enumerate() {
                        print_element(cli, &format!("pi_2 direction {i}"), b);
                    }
                    if p.dim() != p.twisted_h_minus1_dim {
                        return Err(Fail::new(EXIT_INVALID, "pi_2 dimension mismatch"));
                    }
                    Ok(())
                }
                other => Err(Fail::new(EXIT_PARSE, format!("unknown level {other}"))),
            }
        }
        GroupoidCmd::CrossedCheck { algebra, mc, gauge } => {
            let amb = ambient(cli, load_algebra(&algebra.algebra)?);
            let mut objects = vec![MCElement::zero(&amb)];
            for p in mc {
                objects.push(load_mc(p, &amb)?);
            }
            let mut gauges = Vec::new();
            for p in gauge {
                gauges.push(load_gauge(p, &amb)?);
            }
            let (_, _, report) =
                build_deligne_crossed(&amb, &objects, &gauges).map_err(Fail::from)?;
            println!("{}", report.to_json());
            if report.all_pass() {
                Ok(())
            } else {
                Err(Fail::new(EXIT_INVALID, "crossed-groupoid check failed"))
            }
        }
        GroupoidCmd::WeakEquiv { morphism, samples } => {
            let phi = load_morphism(morphism)?;
            let (qiso, _) = phi.is_quasi_iso();
            if !qiso {
                return Err(Fail::new(
                    EXIT_PRECONDITION,
                    "morphism is not a quasi-isomorphism",
                ));
            }
            let setup = MorphismSetup::new(phi, TruncationContext::new(cli.params, cli.order));
            let mut sampler = Sampler::new(cli.seed);
            let mut source_samples = vec![MCElement::zero(&setup.source)];
            let mut target_samples = vec![MCElement::zero(&setup.target)];
            for _ in 0..*samples {
                if let Some(mc) = sampler.random_mc(&setup.source, 6) {
                    source_samples.push(mc);
                }
                if let Some(mc) = sampler.random_mc(&setup.target, 6) {
                    target_samples.push(mc);
                }
            }
            let gauges = vec![sampler.gauge(&setup.source)];
            let report = if cli.jobs > 1 {
                // Per-sample checks are independent; split them across the pool.
                use rayon::prelude::*;
                let parts: Vec<_> = source_samples
                    .par_iter()
                    .map(|s| {
                        weak_equiv_evidence(&setup, std::slice::from_ref(s), &[], &gauges)
                            .expect("evidence")
                    })
                    .collect();
                let mut merged =
                    weak_equiv_evidence(&setup, &[], &target_samples, &[]).map_err(Fail::from)?;
                for p in parts {
                    merged.items.extend(p.items);
                }
                merged
            } else {
                weak_equiv_evidence(&setup, &source_samples, &target_samples, &gauges)
                    .map_err(Fail::from)?
            };
            println!("{}", report.to_json());
            if report.all_pass() {
                Ok(())
            } else {
                Err(Fail::new(EXIT_INVALID, "weak-equivalence evidence failed"))
            }
        }
    }
}

fn cmd_linf(cli: &Cli, cmd: &LinfCmd) -> CliResult {
    match cmd {
        LinfCmd::Validate { linf, weight } => {
            let phi = load_linf(linf)?;
            let report = phi.validate(*weight);
            if cli.json {
                #[derive(Serialize)]
                struct W {
                    weight: usize,
                    pass: bool,
                    counterexample: Option<String>,
                }
                let rows: Vec<W> = report
                    .weights
                    .iter()
                    .map(|w| W {
                        weight: w.weight,
                        pass: w.pass,
                        counterexample: w.counterexample.clone(),
                    })
                    .collect();
                println!("{}", io::to_json_string(&rows).trim_end());
            } else {
                for w in &report.weights {
                    match (&w.pass, &w.counterexample) {
                        (true, _) => println!("weight {}: ok", w.weight),
                        (false, Some(m)) => println!("weight {}: FAIL at {m}", w.weight),
                        (false, None) => println!("weight {}: FAIL", w.weight),
                    }
                }
            }
            if report.all_pass() {
                Ok(())
            } else {
                Err(Fail::new(EXIT_INVALID, "L-infinity relations fail"))
            }
        }
        LinfCmd::Push { linf, mc } => {
            let phi = load_linf(linf)?;
            let source = NilpotentDGLA::new(
                phi.source().clone(),
                TruncationContext::new(cli.params, cli.order),
            );
            let target = NilpotentDGLA::new(
                phi.target().clone(),
                TruncationContext::new(cli.params, cli.order),
            );
            let omega = load_mc(mc, &source)?;
            let pushed = mc_pushforward(&phi, &omega, &target).map_err(Fail::from)?;
            print_element(cli, "pushforward", pushed.value());
            Ok(())
        }
        LinfCmd::Respect { linf, mc, gauge } => {
            let phi = load_linf(linf)?;
            let source = NilpotentDGLA::new(
                phi.source().clone(),
                TruncationContext::new(cli.params, cli.order),
            );
            let target = NilpotentDGLA::new(
                phi.target().clone(),
                TruncationContext::new(cli.params, cli.order),
            );
            let omega = load_mc(mc, &source)?;
            let gamma = load_element(gauge, &source)?;
            let h = gauge_respect(&phi, &omega, &gamma, &target).map_err(Fail::from)?;
            print_element(cli, "transported gauge log", h.log());
            Ok(())
        }
        LinfCmd::Compose {
            left,
            right,
            weight,
        } => {
            let outer = load_linf(left)?;
            let inner = load_linf(right)?;
            let composite = outer.compose(&inner, *weight).map_err(Fail::from)?;
            let file = io::linf_to_file(&composite, "source.json", "target.json");
            println!("{}", io::to_json_string(&file).trim_end());
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Bundled examples
// ---------------------------------------------------------------------------

const COMPOSITE_EXAMPLES: &[&str] = &["contractible-pair", "nonstrict-linf"];

fn cmd_examples(cli: &Cli, cmd: &ExamplesCmd) -> CliResult {
    match cmd {
        ExamplesCmd::List => {
            for name in deligne_core::fixtures::FIXTURE_NAMES {
                println!("{name}");
            }
            for name in COMPOSITE_EXAMPLES {
                println!("{name}");
            }
            Ok(())
        }
        ExamplesCmd::Emit { name, dir } => {
            std::fs::create_dir_all(dir)
                .map_err(|e| Fail::new(EXIT_PARSE, format!("{}: {e}", dir.display())))?;
            let written = emit_example(name, dir)?;
            if cli.json {
                println!("{}", io::to_json_string(&written).trim_end());
            } else {
                for w in &written {
                    println!("wrote {w}");
                }
            }
            Ok(())
        }
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<String, Fail> {
    let path = dir.join(name);
    std::fs::write(&path, text)
        .map_err(|e| Fail::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    Ok(path.display().to_string())
}

fn emit_example(name: &str, dir: &Path) -> Result<Vec<String>, Fail> {
    if let Some(g) = deligne_core::fixtures::by_name(name) {
        let text = io::to_json_string(&io::dgla_to_file(&g));
        return Ok(vec![write_file(dir, &format!("{name}.json"), &text)?]);
    }
    match name {
        "contractible-pair" => {
            let base = deligne_core::fixtures::quantum_heisenberg();
            let (ext, phi) = deligne_core::fixtures::contractible_extension(&base, &[0, 1]);
            let base_text = io::to_json_string(&io::dgla_to_file(&base));
            let ext_text = io::to_json_string(&io::dgla_to_file(&ext));
            let phi_text = io::to_json_string(&io::morphism_to_file(
                &phi,
                "contractible-pair.base.json",
                "contractible-pair.ext.json",
            ));
            Ok(vec![
                write_file(dir, "contractible-pair.base.json", &base_text)?,
                write_file(dir, "contractible-pair.ext.json", &ext_text)?,
                write_file(dir, "contractible-pair.morphism.json", &phi_text)?,
            ])
        }
        "nonstrict-linf" => {
            let g = deligne_core::fixtures::solvable();
            let mut comps = BTreeMap::new();
            comps.insert(0, deligne_core::QMatrix::from_rows(vec![vec![rat::int(2)]]));
            comps.insert(1, deligne_core::QMatrix::from_rows(vec![vec![rat::int(2)]]));
            let linear = LInfMorphism::from_linear(g.clone(), g.clone(), &comps);
            let w2 = deligne_core::linf::extend_one_order(&linear, 2)
                .map_err(Fail::from)?
                .expect("weight-2 correction exists for this fixture");
            let mut phi = deligne_core::linf::extend_one_order(&w2, 3)
                .map_err(Fail::from)?
                .expect("weight-3 correction exists for this fixture");
            phi.horizon = Some(3);
            let alg_text = io::to_json_string(&io::dgla_to_file(&g));
            let linf_text = io::to_json_string(&io::linf_to_file(
                &phi,
                "nonstrict-linf.algebra.json",
                "nonstrict-linf.algebra.json",
            ));
            Ok(vec![
                write_file(dir, "nonstrict-linf.algebra.json", &alg_text)?,
                write_file(dir, "nonstrict-linf.linf.json", &linf_text)?,
            ])
        }
        _ => Err(Fail::new(EXIT_PARSE, format!("unknown example {name:?}"))),
    }
}
