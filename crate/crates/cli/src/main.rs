//! Command-line surface over hmf-core. Every subcommand is a thin wrapper
//! around one library operation; all output is JSON with exact "p/q"
//! numbers. Exit codes: 0 all checks pass, 1 an invariant failed (the
//! witness is in the output), 2 usage or configuration error.

use std::io::Write;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use hmf_core::cones::{Cone, LatticeVector, RationalVector};
use hmf_core::cusps::{self, Level};
use hmf_core::fans;
use hmf_core::field::FieldElement;
use hmf_core::ideals::{self, FractionalIdeal};
use hmf_core::jacobi;
use hmf_core::pipeline::{self, RunConfig};
use hmf_core::qexp::{self, AlgebraicWeight};
use hmf_core::vdfan::{self, DegenerationData, LabelAction, VdLabel};
use hmf_core::wire;
use hmf_core::{rat, QuadField};

#[derive(Parser)]
#[command(name = "hmf", version, about = "exact cusp fans, q-expansions and weight combinatorics for Hilbert modular surfaces")]
struct Cli {
    /// Write the JSON output here instead of stdout.
    #[arg(long, global = true)]
    json_out: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// Squarefree D > 1 of F = Q(sqrt(D)).
    #[arg(long = "D", visible_alias = "d", default_value_t = 5)]
    d: i64,
}

#[derive(Args, Clone)]
struct LevelArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Polarization ideal c: "o", "dual-o", an integer n for (n), or JSON.
    #[arg(long, default_value = "o")]
    ideal: String,
    /// Level ideal n = (level).
    #[arg(long, default_value_t = 7)]
    level: i64,
}

#[derive(Subcommand)]
enum Command {
    /// Field data: basis, discriminant, fundamental and square units.
    Field {
        #[command(subcommand)]
        cmd: FieldCmd,
    },
    /// Ideal arithmetic on exact HNF lattices.
    Ideal {
        #[command(subcommand)]
        cmd: IdealCmd,
    },
    /// Rational polyhedral cones in the plane.
    Cone {
        #[command(subcommand)]
        cmd: ConeCmd,
    },
    /// Unit-invariant cusp fans.
    Fan {
        #[command(subcommand)]
        cmd: FanCmd,
    },
    /// Cusp data and torsion probes for Gamma_1(c, n).
    Cusps {
        #[command(subcommand)]
        cmd: CuspsCmd,
    },
    /// Trace-truncated q-expansions.
    Qexp {
        #[command(subcommand)]
        cmd: QexpCmd,
    },
    /// Theta series q-expansion (alias of `qexp theta`).
    Theta(ThetaArgs),
    /// Hilbert-Jacobi coefficient lattices.
    Jacobi {
        #[command(subcommand)]
        cmd: JacobiCmd,
    },
    /// Hodge-Tate weight combinatorics of an algebraic weight.
    HodgeTate {
        /// Comma-separated weight components, e.g. 2,4.
        #[arg(long)]
        weights: String,
    },
    /// Voronoi-Delaunay polarization data.
    Vd {
        #[command(subcommand)]
        cmd: VdCmd,
    },
    /// Run every stage and emit a deterministic report.
    Pipeline {
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trace_bound: i64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum FieldCmd {
    /// Print basis, discriminant and unit generators.
    Info(FieldArgs),
}

#[derive(Subcommand)]
enum IdealCmd {
    /// Trace dual f* = f^{-1} d^{-1}.
    Dual {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        ideal: String,
    },
    /// Product of two ideals.
    Mul {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        ideal: String,
        #[arg(long)]
        other: String,
    },
    /// Norm of an ideal.
    Norm {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        ideal: String,
    },
    /// The (NT) hypothesis for (c, n).
    NtCheck {
        #[command(flatten)]
        level: LevelArgs,
    },
}

#[derive(Subcommand)]
enum ConeCmd {
    /// Smoothness of the cone spanned by the rays.
    Smooth {
        /// Rays as "x,y;x,y".
        #[arg(long)]
        rays: String,
    },
    /// Minimal generators of the dual monoid.
    HilbertBasis {
        #[arg(long)]
        rays: String,
    },
    /// All faces with their orbit dimensions.
    Faces {
        #[arg(long)]
        rays: String,
    },
}

#[derive(Subcommand)]
enum FanCmd {
    /// Build the unit-invariant fan on the ideal's totally positive cone.
    Build {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value = "dual-o")]
        ideal: String,
    },
    /// Completeness / smoothness / invariance certificates.
    Check {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value = "dual-o")]
        ideal: String,
        #[arg(long)]
        complete: bool,
        #[arg(long)]
        smooth: bool,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        /// Check the subdivided fan instead of the raw one.
        #[arg(long)]
        subdivided: bool,
    },
    /// Equivariant staircase resolution.
    Subdivide {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value = "dual-o")]
        ideal: String,
    },
}

#[derive(Subcommand)]
enum CuspsCmd {
    /// Derived ideals of the cusp (a : c).
    Derive {
        #[command(flatten)]
        level: LevelArgs,
        /// Coordinates "c0,c1" over the integral basis.
        #[arg(long)]
        a: String,
        #[arg(long)]
        c: String,
    },
    /// Sampled classification of cusps into ideal classes.
    Classify {
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long, default_value_t = 30)]
        samples: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
    /// Random torsion search in Gamma_1(c, n).
    TorsionSearch {
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        entry_bound: i64,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct ThetaArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// c_0 with c = c_0^2 (same shorthand as --ideal).
    #[arg(long, default_value = "o")]
    c0: String,
    /// Conductor part n_0 of n = 4 n_0.
    #[arg(long, default_value_t = 3)]
    n0: i64,
    #[arg(long, default_value_t = 20)]
    trace_bound: i64,
}

#[derive(Subcommand)]
enum QexpCmd {
    /// Verify the unit relation of a serialized expansion.
    Verify {
        /// Path of the expansion JSON.
        #[arg(long)]
        file: std::path::PathBuf,
    },
    /// Theta series with the constant character.
    Theta(ThetaArgs),
    /// Orbit-reduce a totally positive index.
    Reduce {
        #[command(flatten)]
        field: FieldArgs,
        /// Coordinates "c0,c1".
        #[arg(long)]
        xi: String,
    },
    /// Congruence a_xi = 0 mod p^m for every coefficient.
    Padic {
        #[arg(long)]
        file: std::path::PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
    /// Depth ord_p(c) of a cusp representative.
    Depth {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        a: String,
        #[arg(long)]
        c: String,
        #[arg(long)]
        p: u64,
    },
}

#[derive(Subcommand)]
enum JacobiCmd {
    /// Support pairs (xi, alpha) for an index mu.
    Enumerate {
        #[command(flatten)]
        level: LevelArgs,
        /// Index mu as "c0,c1".
        #[arg(long, default_value = "1,0")]
        mu: String,
        #[arg(long, default_value_t = 8)]
        trace_bound: i64,
    },
    /// Verify the translation and unit relations of a serialized expansion.
    Check {
        #[arg(long)]
        file: std::path::PathBuf,
    },
}

#[derive(Subcommand)]
enum VdCmd {
    /// Polarization value and minimizers at (q, l).
    Phi {
        #[command(flatten)]
        level: LevelArgs,
        /// q as rational coordinates "s,t" in the X* basis.
        #[arg(long)]
        q: String,
        /// l as coordinates "c0,c1" (one block per factor, ';' separated).
        #[arg(long)]
        l: String,
        /// Indices mu as "c0,c1" blocks separated by ';'.
        #[arg(long, default_value = "1,0")]
        mu: String,
    },
    /// Membership of (q, l) in tau_{sigma, B}.
    Member {
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long)]
        q: String,
        #[arg(long)]
        l: String,
        #[arg(long, default_value = "1,0")]
        mu: String,
        /// Base cone rays "x,y;x,y" in the X* basis.
        #[arg(long)]
        sigma: String,
        /// Period set: tuples "c0,c1" joined by ';', tuples by '|'.
        #[arg(long, default_value = "0,0")]
        b_set: String,
    },
    /// Act on a label by a unit power or a translation.
    Act {
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long)]
        sigma: String,
        #[arg(long, default_value = "0,0")]
        b_set: String,
        #[arg(long, default_value = "1,0")]
        mu: String,
        /// Power of the fundamental unit to act by.
        #[arg(long, default_value_t = 1)]
        unit_power: i64,
        /// Optional translation tuple "c0,c1" blocks joined by ';'.
        #[arg(long)]
        translate: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome { json, all_passed }) => {
            let rendered = format!("{}\n", serde_json::to_string_pretty(&json).expect("render"));
            if let Some(path) = &cli.json_out {
                if let Err(e) = std::fs::write(path, &rendered) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                let _ = std::io::stdout().write_all(rendered.as_bytes());
            }
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

struct Outcome {
    json: serde_json::Value,
    all_passed: bool,
}

fn ok(json: serde_json::Value) -> anyhow::Result<Outcome> {
    Ok(Outcome { json, all_passed: true })
}

fn verdict(json: serde_json::Value, all_passed: bool) -> anyhow::Result<Outcome> {
    Ok(Outcome { json, all_passed })
}

fn parse_field(args: &FieldArgs) -> anyhow::Result<QuadField> {
    QuadField::new(args.d).map_err(|e| anyhow!("{e}"))
}

fn parse_element(s: &str) -> anyhow::Result<FieldElement> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        bail!("element must be \"c0,c1\", got {s:?}");
    }
    let c0 = rat::parse(parts[0]).ok_or_else(|| anyhow!("bad rational {:?}", parts[0]))?;
    let c1 = rat::parse(parts[1]).ok_or_else(|| anyhow!("bad rational {:?}", parts[1]))?;
    Ok(FieldElement::new(c0, c1))
}

fn parse_element_blocks(s: &str) -> anyhow::Result<Vec<FieldElement>> {
    s.split(';').map(parse_element).collect()
}

fn parse_ideal(field: &QuadField, s: &str) -> anyhow::Result<FractionalIdeal> {
    match s.trim() {
        "o" | "O" => Ok(FractionalIdeal::ring_of_integers()),
        "dual-o" | "d-inv" => Ok(ideals::different(field).inv(field)),
        "d" | "different" => Ok(ideals::different(field)),
        t => {
            if let Ok(n) = t.parse::<i64>() {
                return FractionalIdeal::from_rational_integer(n).map_err(|e| anyhow!("{e}"));
            }
            let w: wire::IdealWire =
                serde_json::from_str(t).context("ideal must be o, dual-o, an integer or JSON")?;
            wire::ideal_from_wire(field, &w).map_err(|e| anyhow!("{e}"))
        }
    }
}

fn parse_level(args: &LevelArgs) -> anyhow::Result<(QuadField, Level)> {
    let field = parse_field(&args.field)?;
    let c = parse_ideal(&field, &args.ideal)?;
    let n = FractionalIdeal::from_rational_integer(args.level)?;
    Ok((field, Level::new(c, n)?))
}

fn parse_rays(s: &str) -> anyhow::Result<Cone> {
    let rays: Vec<LatticeVector> = s
        .split(';')
        .map(|pair| {
            let xy: Vec<&str> = pair.split(',').collect();
            if xy.len() != 2 {
                bail!("ray must be \"x,y\", got {pair:?}");
            }
            Ok(LatticeVector::new(xy[0].trim().parse()?, xy[1].trim().parse()?))
        })
        .collect::<anyhow::Result<_>>()?;
    Cone::from_rays(&rays).map_err(|e| anyhow!("{e}"))
}

fn element_json(x: &FieldElement) -> serde_json::Value {
    serde_json::json!(wire::element_to_wire(x))
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Field { cmd: FieldCmd::Info(args) } => {
            let field = parse_field(args)?;
            let units = field.unit_group();
            ok(serde_json::json!({
                "format": wire::FORMAT,
                "D": field.d(),
                "degree": field.degree(),
                "integral_basis": field.basis_description(),
                "discriminant": field.discriminant().to_string(),
                "fundamental_unit": element_json(&units.fundamental),
                "fundamental_unit_norm": rat::to_string(&field.norm(&units.fundamental)),
                "totally_positive_generator": element_json(&units.plus_gen),
                "square_unit_generator": element_json(&units.square_gen),
            }))
        }
        Command::Ideal { cmd } => run_ideal(cmd),
        Command::Cone { cmd } => run_cone(cmd),
        Command::Fan { cmd } => run_fan(cmd),
        Command::Cusps { cmd } => run_cusps(cmd),
        Command::Qexp { cmd } => run_qexp(cmd),
        Command::Theta(args) => theta_outcome(args),
        Command::Jacobi { cmd } => run_jacobi(cmd),
        Command::HodgeTate { weights } => {
            let k: Vec<i64> = weights
                .split(',')
                .map(|x| x.trim().parse().context("weights must be integers"))
                .collect::<anyhow::Result<_>>()?;
            let kappa = AlgebraicWeight::new(k)?;
            let multiset = hmf_core::hodge::hodge_tate_multiset(&kappa);
            let symmetric = hmf_core::hodge::verify_weight_symmetry(&kappa);
            let mut table = Vec::new();
            let indices: std::collections::BTreeSet<i64> = multiset.iter().cloned().collect();
            for i in indices {
                let terms = hmf_core::hodge::bgg_terms(&kappa, i);
                table.push(serde_json::json!({
                    "filtration": i,
                    "terms": terms
                        .iter()
                        .map(|t| serde_json::json!({ "subset_mask": t.subset.mask, "shift": t.shift }))
                        .collect::<Vec<_>>(),
                }));
            }
            verdict(
                serde_json::json!({
                    "format": wire::FORMAT,
                    "weights": kappa.components(),
                    "multiset": multiset,
                    "symmetry": symmetric,
                    "bgg": table,
                }),
                symmetric,
            )
        }
        Command::Vd { cmd } => run_vd(cmd),
        Command::Pipeline { level, seed, trace_bound, samples, trials } => {
            let config = RunConfig {
                format: wire::FORMAT.into(),
                seed: *seed,
                d: level.field.d,
                level_n: level.level,
                trace_bound: *trace_bound,
                samples: *samples,
                trials: *trials,
            };
            if level.ideal != "o" {
                bail!("the pipeline currently runs with c = o");
            }
            let report = pipeline::run_pipeline(&config)?;
            let passed = report.passed;
            verdict(serde_json::to_value(&report)?, passed)
        }
    }
}

fn run_ideal(cmd: &IdealCmd) -> anyhow::Result<Outcome> {
    match cmd {
        IdealCmd::Dual { field, ideal } => {
            let f = parse_field(field)?;
            let i = parse_ideal(&f, ideal)?;
            ok(serde_json::json!({
                "format": wire::FORMAT,
                "dual": wire::ideal_to_wire(&i.trace_dual(&f)),
            }))
        }
        IdealCmd::Mul { field, ideal, other } => {
            let f = parse_field(field)?;
            let i = parse_ideal(&f, ideal)?;
            let j = parse_ideal(&f, other)?;
            ok(serde_json::json!({
                "format": wire::FORMAT,
                "product": wire::ideal_to_wire(&i.mul(&f, &j)),
            }))
        }
        IdealCmd::Norm { field, ideal } => {
            let f = parse_field(field)?;
            let i = parse_ideal(&f, ideal)?;
            ok(serde_json::json!({
                "format": wire::FORMAT,
                "norm": rat::to_string(&i.norm()),
            }))
        }
        IdealCmd::NtCheck { level } => {
            let (f, lvl) = parse_level(level)?;
            let holds = ideals::check_nt(&f, &lvl.n, &lvl.c)?;
            verdict(
                serde_json::json!({ "format": wire::FORMAT, "nt": holds }),
                holds,
            )
        }
    }
}

fn run_cone(cmd: &ConeCmd) -> anyhow::Result<Outcome> {
    match cmd {
        ConeCmd::Smooth { rays } => {
            let cone = parse_rays(rays)?;
            ok(serde_json::json!({
                "format": wire::FORMAT,
                "cone": wire::cone_to_wire(&cone),
                "smooth": cone.is_smooth(),
            }))
        }
        ConeCmd::HilbertBasis { rays } => {
            let cone = parse_rays(rays)?;
            let basis = cone.dual_monoid_generators()?;
            ok(serde_json::json!({
                "format": wire::FORMAT,
                "generators": basis
                    .iter()
                    .map(|v| [v.0.to_string(), v.1.to_string()])
                    .collect::<Vec<_>>(),
            }))
        }
        ConeCmd::Faces { rays } => {
            let cone = parse_rays(rays)?;
            let faces: Vec<serde_json::Value> = cone
                .faces()
                .iter()
                .map(|face| {
                    serde_json::json!({
                        "rays": wire::cone_to_wire(face).rays,
                        "dim": face.dim(),
                        "orbit_dim": hmf_core::cones::orbit_dimension(face),
                    })
                })
                .collect();
            ok(serde_json::json!({ "format": wire::FORMAT, "faces": faces }))
        }
    }
}

fn build_fan(field: &FieldArgs, ideal: &str) -> anyhow::Result<fans::Fan> {
    let f = parse_field(field)?;
    let x_star = parse_ideal(&f, ideal)?;
    fans::build_unit_invariant_fan(&f, &x_star).map_err(|e| anyhow!("{e}"))
}

fn run_fan(cmd: &FanCmd) -> anyhow::Result<Outcome> {
    match cmd {
        FanCmd::Build { field, ideal } => {
            let fan = build_fan(field, ideal)?;
            ok(serde_json::to_value(wire::fan_to_wire(&fan))?)
        }
        FanCmd::Check { field, ideal, complete, smooth, samples, seed, subdivided } => {
            let mut fan = build_fan(field, ideal)?;
            if *subdivided {
                fan = fans::smooth_subdivide_equivariant(&fan)?;
            }
            let mut checks = serde_json::Map::new();
            let mut all = true;
            checks.insert("invariant".into(), serde_json::json!(fan.is_invariant()));
            all &= fan.is_invariant();
            if *complete {
                let report = fan.completeness_report(*samples, *seed);
                all &= report.is_complete();
                checks.insert(
                    "complete".into(),
                    serde_json::json!({
                        "passed": report.is_complete(),
                        "samples": report.samples,
                        "seed": report.seed,
                    }),
                );
            }
            if *smooth {
                all &= fan.all_smooth();
                checks.insert("smooth".into(), serde_json::json!(fan.all_smooth()));
            }
            verdict(
                serde_json::json!({ "format": wire::FORMAT, "checks": checks }),
                all,
            )
        }
        FanCmd::Subdivide { field, ideal } => {
            let fan = fans::smooth_subdivide_equivariant(&build_fan(field, ideal)?)?;
            ok(serde_json::to_value(wire::fan_to_wire(&fan))?)
        }
    }
}

fn run_cusps(cmd: &CuspsCmd) -> anyhow::Result<Outcome> {
    match cmd {
        CuspsCmd::Derive { level, a, c } => {
            let (f, lvl) = parse_level(level)?;
            let cusp = cusps::derive_cusp_data(&f, &parse_element(a)?, &parse_element(c)?, &lvl)?;
            ok(serde_json::to_value(wire::cusp_to_wire(&f, &cusp))?)
        }
        CuspsCmd::Classify { level, samples, seed } => {
            let (f, lvl) = parse_level(level)?;
            let classes = cusps::classify_cusps(&f, &lvl, *samples, *seed)?;
            let rows: Vec<serde_json::Value> = classes
                .iter()
                .map(|((a, c), class)| {
                    serde_json::json!({
                        "a": element_json(a),
                        "c": element_json(c),
                        "class": class,
                    })
                })
                .collect();
            ok(serde_json::json!({ "format": wire::FORMAT, "cusps": rows }))
        }
        CuspsCmd::TorsionSearch { level, trials, entry_bound, seed } => {
            let (f, lvl) = parse_level(level)?;
            let report = cusps::nt_random_torsion_search(&f, &lvl, *trials, *entry_bound, *seed)?;
            let found: Vec<serde_json::Value> = report
                .torsion_found
                .iter()
                .map(|(m, order)| {
                    serde_json::json!({
                        "order": order,
                        "matrix": m
                            .entries
                            .iter()
                            .map(|row| row.iter().map(element_json).collect::<Vec<_>>())
                            .collect::<Vec<_>>(),
                    })
                })
                .collect();
            let clean = found.is_empty();
            verdict(
                serde_json::json!({
                    "format": wire::FORMAT,
                    "trials": report.trials,
                    "seed": report.seed,
                    "torsion_found": found,
                }),
                clean,
            )
        }
    }
}

fn theta_outcome(args: &ThetaArgs) -> anyhow::Result<Outcome> {
    let f = parse_field(&args.field)?;
    let c0 = parse_ideal(&f, &args.c0)?;
    let n0 = FractionalIdeal::from_rational_integer(args.n0)?;
    let eta = qexp::ThetaCharacter::constant_one(&f, c0, n0, FieldElement::one())?;
    let th = qexp::theta_qexp(&f, &eta, args.trace_bound)?;
    ok(serde_json::to_value(wire::qexp_to_wire(&f, &th))?)
}

fn run_qexp(cmd: &QexpCmd) -> anyhow::Result<Outcome> {
    match cmd {
        QexpCmd::Verify { file } => {
            let text = std::fs::read_to_string(file)
                .with_context(|| format!("cannot read {}", file.display()))?;
            let w: wire::QExpansionWire = serde_json::from_str(&text)?;
            let (f, expansion) = wire::qexp_from_wire(&w)?;
            let u = f.fundamental_unit();
            let outcome = qexp::verify_unit_relation(&f, &expansion, &[(u, rat::int(1))])?;
            let koecher = expansion.koecher_check();
            match outcome {
                Ok(()) => verdict(
                    serde_json::json!({
                        "format": wire::FORMAT,
                        "unit_relation": true,
                        "koecher": koecher,
                    }),
                    koecher,
                ),
                Err(witness) => verdict(
                    serde_json::json!({
                        "format": wire::FORMAT,
                        "unit_relation": false,
                        "koecher": koecher,
                        "witness": {
                            "u": element_json(&witness.u),
                            "xi": element_json(&witness.xi),
                            "expected": element_json(&witness.expected),
                            "actual": element_json(&witness.actual),
                        },
                    }),
                    false,
                ),
            }
        }
        QexpCmd::Theta(args) => theta_outcome(args),
        QexpCmd::Reduce { field, xi } => {
            let f = parse_field(field)?;
            let xi = parse_element(xi)?;
            if !f.is_totally_positive(&xi) {
                bail!("xi must be totally positive");
            }
            let eps = f.unit_group().square_gen;
            let (rep, power) = qexp::orbit_reduce(&f, &xi, &eps);
            ok(serde_json::json!({
                "format": wire::FORMAT,
                "representative": element_json(&rep),
                "unit_power": power,
            }))
        }
        QexpCmd::Padic { file, p, m } => {
            let text = std::fs::read_to_string(file)
                .with_context(|| format!("cannot read {}", file.display()))?;
            let w: wire::QExpansionWire = serde_json::from_str(&text)?;
            let (_, expansion) = wire::qexp_from_wire(&w)?;
            let congruent = qexp::padic_congruence(&expansion, *p, *m);
            verdict(
                serde_json::json!({ "format": wire::FORMAT, "congruent": congruent, "p": p, "m": m }),
                congruent,
            )
        }
        QexpCmd::Depth { field, a, c, p } => {
            let f = parse_field(field)?;
            let depth = qexp::cusp_depth(&parse_element(a)?, &parse_element(c)?, *p)?;
            let _ = f;
            ok(serde_json::json!({
                "format": wire::FORMAT,
                "depth": depth.map(serde_json::Value::from).unwrap_or(serde_json::json!("infinity")),
            }))
        }
    }
}

fn run_jacobi(cmd: &JacobiCmd) -> anyhow::Result<Outcome> {
    match cmd {
        JacobiCmd::Enumerate { level, mu, trace_bound } => {
            let (f, lvl) = parse_level(level)?;
            let cusp =
                cusps::derive_cusp_data(&f, &FieldElement::one(), &FieldElement::zero(), &lvl)?;
            let mu = parse_element(mu)?;
            let support = jacobi::enumerate_support(&f, &cusp, &mu, *trace_bound)?;
            let rows: Vec<serde_json::Value> = support
                .iter()
                .map(|(xi, alpha)| {
                    serde_json::json!({ "xi": element_json(xi), "alpha": element_json(alpha) })
                })
                .collect();
            ok(serde_json::json!({ "format": wire::FORMAT, "support": rows }))
        }
        JacobiCmd::Check { file } => {
            let text = std::fs::read_to_string(file)
                .with_context(|| format!("cannot read {}", file.display()))?;
            let w: wire::JacobiWire = serde_json::from_str(&text)?;
            let (f, expansion) = wire::jacobi_from_wire(&w)?;
            let betas = [
                FieldElement::one(),
                FieldElement::from_integers(0, 1),
                FieldElement::from_integers(-1, 1),
            ];
            let units = [f.fundamental_unit()];
            let outcome = jacobi::verify_jacobi_relations(&f, &expansion, &betas, &units)?;
            let koecher = expansion.koecher_check(&f);
            match outcome {
                Ok(()) => verdict(
                    serde_json::json!({
                        "format": wire::FORMAT,
                        "relations": true,
                        "koecher": koecher,
                    }),
                    koecher,
                ),
                Err(witness) => verdict(
                    serde_json::json!({
                        "format": wire::FORMAT,
                        "relations": false,
                        "koecher": koecher,
                        "witness": {
                            "xi": element_json(&witness.xi),
                            "alpha": element_json(&witness.alpha),
                            "expected": element_json(&witness.expected),
                            "actual": element_json(&witness.actual),
                        },
                    }),
                    false,
                ),
            }
        }
    }
}

fn vd_data(level: &LevelArgs, mu: &str) -> anyhow::Result<(QuadField, DegenerationData)> {
    let (f, lvl) = parse_level(level)?;
    let cusp = cusps::derive_cusp_data(&f, &FieldElement::one(), &FieldElement::zero(), &lvl)?;
    let mu = parse_element_blocks(mu)?;
    let data = DegenerationData::new(f, cusp, mu)?;
    Ok((f, data))
}

fn parse_q(data: &DegenerationData, s: &str) -> anyhow::Result<FieldElement> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        bail!("q must be \"s,t\" in the X* basis");
    }
    let coords = RationalVector(
        rat::parse(parts[0]).ok_or_else(|| anyhow!("bad rational"))?,
        rat::parse(parts[1]).ok_or_else(|| anyhow!("bad rational"))?,
    );
    Ok(data.x_lattice().element_of_rational(&coords))
}

fn parse_b_set(s: &str) -> anyhow::Result<Vec<Vec<FieldElement>>> {
    s.split('|').map(parse_element_blocks).collect()
}

fn run_vd(cmd: &VdCmd) -> anyhow::Result<Outcome> {
    match cmd {
        VdCmd::Phi { level, q, l, mu } => {
            let (_, data) = vd_data(level, mu)?;
            let q = parse_q(&data, q)?;
            let l = parse_element_blocks(l)?;
            let (value, argmins) = vdfan::phi(&data, &q, &l)?;
            ok(serde_json::json!({
                "format": wire::FORMAT,
                "value": rat::to_string(&value),
                "argmin": argmins
                    .iter()
                    .map(|beta| beta.iter().map(element_json).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            }))
        }
        VdCmd::Member { level, q, l, mu, sigma, b_set } => {
            let (_, data) = vd_data(level, mu)?;
            let q = parse_q(&data, q)?;
            let l = parse_element_blocks(l)?;
            let label = VdLabel::new(parse_rays(sigma)?, parse_b_set(b_set)?);
            let member = vdfan::tau_membership(&data, &label, &q, &l)?;
            verdict(
                serde_json::json!({ "format": wire::FORMAT, "member": member }),
                true,
            )
        }
        VdCmd::Act { level, sigma, b_set, mu, unit_power, translate } => {
            let (f, data) = vd_data(level, mu)?;
            let label = VdLabel::new(parse_rays(sigma)?, parse_b_set(b_set)?);
            let moved = match translate {
                Some(y) => vdfan::act_on_label(
                    &data,
                    &label,
                    &LabelAction::Translate(parse_element_blocks(y)?),
                )?,
                None => {
                    let u = f.pow(&f.fundamental_unit(), *unit_power)?;
                    vdfan::act_on_label(&data, &label, &LabelAction::Unit(u))?
                }
            };
            ok(serde_json::json!({
                "format": wire::FORMAT,
                "sigma": wire::cone_to_wire(&moved.sigma),
                "B": moved
                    .b_set
                    .iter()
                    .map(|beta| beta.iter().map(element_json).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            }))
        }
    }
}
