//! Command-line surface: compute conjugacy-class invariants and dimension
//! predictions, run the lattice enumeration oracles against them, and emit
//! machine-readable verdict reports.
//!
//! Exit codes: 0 pass, 1 usage/parse, 2 precision, 3 domain, 4 verdict-fail.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use springerlab_core::battery;
use springerlab_core::error::Error as CoreError;
use springerlab_core::invariants::{self, ElementKind};
use springerlab_core::lattice::{collect_fiber, EnumOptions, FiberKind};
use springerlab_core::matrix::Matrix;
use springerlab_core::oracle::{
    self, iwahori_fiber_profile, lie_fiber_profile, orbital_integral, window_for_dim, Level,
};
use springerlab_core::padic::LocalField;
use springerlab_core::poly::IntPoly;
use springerlab_core::rootdata;
use std::io::Write;

#[derive(Parser)]
#[command(name = "springerlab")]
#[command(about = "Invariants and brute-force oracles for affine Springer fibers of GL_n over p-adic fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// Residue characteristic
    #[arg(long)]
    p: u64,
    /// Unramified degree of the base field (residue field F_{p^m})
    #[arg(long, default_value_t = 1)]
    unram: usize,
    /// Eisenstein polynomial for a ramified base, e.g. "x^2 - 3"
    #[arg(long)]
    eisenstein: Option<String>,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Row-major matrix literal, e.g. "[[0,1],[2,0]]"
    #[arg(long, conflicts_with = "charpoly")]
    matrix: Option<String>,
    /// Characteristic polynomial literal, e.g. "x^2 - 27"
    #[arg(long)]
    charpoly: Option<String>,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Write the report here as well as to stdout
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Output format (single-run reports are JSON)
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the invariant record of a conjugacy class
    Invariants {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        input: InputArgs,
        /// Read the input as a Lie-algebra element rather than a group element
        #[arg(long)]
        lie: bool,
        /// Working precision
        #[arg(long)]
        precision: Option<i64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Predicted dimension next to the enumerated fit, with a verdict
    Dimension {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        input: InputArgs,
        /// Enumeration window (defaults to 2·dim + 4)
        #[arg(long)]
        window: Option<u32>,
        /// Number of residue extensions to count over
        #[arg(long, default_value_t = 4)]
        extensions: usize,
        /// Fiber level
        #[arg(long, default_value = "lie")]
        level: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Stream the Hermite bases of an enumerated fiber as TSV
    Enumerate {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 4)]
        window: u32,
        /// Residue extension degree to enumerate over
        #[arg(long, default_value_t = 1)]
        extension: usize,
        /// Fiber level (lie | hyperspecial)
        #[arg(long, default_value = "lie")]
        level: String,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Orbital integral with a window-stability double run
    Orbital {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 4)]
        window: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Topological Jordan decomposition with certificates
    Jordan {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        input: InputArgs,
        /// Additive (Lie-algebra) decomposition γ = γ0 + γ1
        #[arg(long)]
        lie: bool,
        #[arg(long, default_value_t = 16)]
        precision: i64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the acceptance battery; one TSV row per case
    Suite {
        /// Only run the given criterion (1..10)
        #[arg(long)]
        criterion: Option<u32>,
        /// Worker threads for the enumeration shards
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Emit the bad/torsion/π₁ tables as TSV
    Tables {
        #[arg(long, default_value_t = 8)]
        max_rank: usize,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

fn exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::Parse(_) => 1,
        CoreError::Precision { .. } => 2,
        _ => 3,
    }
}

fn build_field(args: &FieldArgs) -> Result<LocalField, CoreError> {
    match &args.eisenstein {
        None => Ok(LocalField::unramified(args.p, args.unram)),
        Some(text) => LocalField::eisenstein_from_text(args.p, args.unram, text),
    }
}

fn build_gamma(field: &LocalField, input: &InputArgs, prec: i64) -> Result<Matrix, CoreError> {
    match (&input.matrix, &input.charpoly) {
        (Some(m), None) => Matrix::parse(field, m, prec),
        (None, Some(cp)) => {
            let poly = IntPoly::parse(field, cp, prec)?;
            if !poly.is_monic_visibly() {
                return Err(CoreError::Parse("characteristic polynomial must be monic".into()));
            }
            Ok(poly.companion())
        }
        _ => Err(CoreError::Parse(
            "exactly one of --matrix or --charpoly is required".into(),
        )),
    }
}

#[derive(Serialize)]
struct RunConfig {
    command: String,
    p: u64,
    unram: usize,
    eisenstein: Option<String>,
    matrix: Option<String>,
    charpoly: Option<String>,
    window: Option<u32>,
    extensions: Option<usize>,
    level: Option<String>,
    precision: Option<i64>,
    seed: Option<u64>,
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    config: RunConfig,
    #[serde(flatten)]
    body: T,
    verdict: Option<String>,
    wall_ms: u128,
}

fn emit<T: Serialize>(report: &Report<T>, out: &OutputArgs) -> Result<(), CoreError> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| CoreError::Parse(format!("serialization: {e}")))?;
    println!("{text}");
    if let Some(path) = &out.out {
        std::fs::write(path, &text).map_err(|e| CoreError::Parse(format!("write: {e}")))?;
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, CoreError> {
    match cli.command {
        Command::Invariants { field, input, lie, precision, output } => {
            let t0 = std::time::Instant::now();
            let fld = build_field(&field)?;
            let prec = precision.unwrap_or(40);
            let gamma = build_gamma(&fld, &input, prec)?;
            let kind = if lie { ElementKind::Lie } else { ElementKind::Group };
            let inv = invariants::conjugacy_invariants(&gamma, kind)?;
            let report = Report {
                config: RunConfig {
                    command: "invariants".into(),
                    p: field.p,
                    unram: field.unram,
                    eisenstein: field.eisenstein.clone(),
                    matrix: input.matrix.clone(),
                    charpoly: input.charpoly.clone(),
                    window: None,
                    extensions: None,
                    level: None,
                    precision: Some(prec),
                    seed: None,
                },
                body: inv,
                verdict: None,
                wall_ms: t0.elapsed().as_millis(),
            };
            emit(&report, &output)?;
            Ok(0)
        }
        Command::Dimension { field, input, window, extensions, level, output } => {
            let t0 = std::time::Instant::now();
            let fld = build_field(&field)?;
            let gamma = build_gamma(&fld, &input, 40)?;
            let (view, _) = parse_level(&level)?;
            let inv = invariants::conjugacy_invariants(
                &gamma,
                if view == FiberView::Lie { ElementKind::Lie } else { ElementKind::Group },
            )?;
            let dim = match view {
                FiberView::Lie => inv.dim_lie_pred,
                _ => inv.dim_grp_pred,
            }
            .ok_or_else(|| CoreError::Domain("nonempty fails: unbounded".into()))?;
            let w = window.unwrap_or_else(|| window_for_dim(dim));
            let profile = match view {
                FiberView::Lie => lie_fiber_profile(&gamma, w, extensions)?,
                FiberView::Hyperspecial => oracle::group_fiber_profile(&gamma, w, extensions)?,
                FiberView::Iwahori => iwahori_fiber_profile(&gamma, w, extensions)?,
            };
            let pass = profile.fitted_dim == Some(dim) && !profile.ambiguous;
            #[derive(Serialize)]
            struct Body {
                invariants: invariants::ConjugacyInvariants,
                predicted_dim: i64,
                profile: oracle::CountProfile,
            }
            let report = Report {
                config: RunConfig {
                    command: "dimension".into(),
                    p: field.p,
                    unram: field.unram,
                    eisenstein: field.eisenstein.clone(),
                    matrix: input.matrix.clone(),
                    charpoly: input.charpoly.clone(),
                    window: Some(w),
                    extensions: Some(extensions),
                    level: Some(level.clone()),
                    precision: None,
                    seed: None,
                },
                body: Body { invariants: inv, predicted_dim: dim, profile },
                verdict: Some(if pass { "pass".into() } else { "fail".into() }),
                wall_ms: t0.elapsed().as_millis(),
            };
            emit(&report, &output)?;
            Ok(if pass { 0 } else { 4 })
        }
        Command::Enumerate { field, input, window, extension, level, out } => {
            let fld = build_field(&field)?;
            let gamma = build_gamma(&fld, &input, window as i64 + 24)?;
            let (view, _) = parse_level(&level)?;
            let kappa = invariants::kottwitz(&gamma)?;
            let n = gamma.n() as i64;
            let opts = match view {
                FiberView::Lie => EnumOptions::default(),
                FiberView::Hyperspecial => {
                    if kappa % n != 0 || kappa < 0 {
                        // the coset condition is unsatisfiable: empty stream
                        println!("#empty: κ = {kappa} not a multiple of n = {n}");
                        return Ok(0);
                    }
                    EnumOptions {
                        kind: FiberKind::GroupCentral { kappa_over_n: (kappa / n) as u32 },
                        min_val_zero: false,
                        max_colength: None,
                    }
                }
                FiberView::Iwahori => {
                    return Err(CoreError::unsupported(
                        "enumerate streams single lattices; use `dimension --level iwahori` for chains",
                    ))
                }
            };
            let (ring, gm) = oracle::win_matrix(&gamma, fld.unram_deg() * extension, window)?;
            let lats = collect_fiber(&ring, &gm, &opts)?;
            let mut sink: Box<dyn Write> = match &out {
                Some(path) => Box::new(std::io::BufWriter::new(
                    std::fs::File::create(path).map_err(|e| CoreError::Parse(format!("{e}")))?,
                )),
                None => Box::new(std::io::stdout()),
            };
            writeln!(sink, "#diag\tcolumns (entries as digit vectors mod p^{window})")
                .map_err(|e| CoreError::Parse(format!("{e}")))?;
            for l in &lats {
                let diag: Vec<String> = l.diag.iter().map(|d| d.to_string()).collect();
                let cols: Vec<String> = l
                    .cols
                    .iter()
                    .map(|c| {
                        c.iter()
                            .map(|e| {
                                e.coeffs(ring.m())
                                    .iter()
                                    .map(|x| x.to_string())
                                    .collect::<Vec<_>>()
                                    .join(",")
                            })
                            .collect::<Vec<_>>()
                            .join(";")
                    })
                    .collect();
                writeln!(sink, "{}\t{}", diag.join(","), cols.join(" | "))
                    .map_err(|e| CoreError::Parse(format!("{e}")))?;
            }
            Ok(0)
        }
        Command::Orbital { field, input, window, output } => {
            let t0 = std::time::Instant::now();
            let fld = build_field(&field)?;
            let gamma = build_gamma(&fld, &input, 80)?;
            let rep1 = orbital_integral(&gamma, window)?;
            let rep2 = orbital_integral(&gamma, window + 2)?;
            let stable = rep1.value == rep2.value;
            #[derive(Serialize)]
            struct Body {
                orbital: oracle::OrbitalReport,
                recheck_window: u32,
                recheck_value: String,
                window_stable: bool,
            }
            let report = Report {
                config: RunConfig {
                    command: "orbital".into(),
                    p: field.p,
                    unram: field.unram,
                    eisenstein: field.eisenstein.clone(),
                    matrix: input.matrix.clone(),
                    charpoly: input.charpoly.clone(),
                    window: Some(window),
                    extensions: None,
                    level: None,
                    precision: None,
                    seed: None,
                },
                body: Body {
                    recheck_window: window + 2,
                    recheck_value: rep2.value.clone(),
                    window_stable: stable,
                    orbital: rep1,
                },
                verdict: Some(if stable { "pass".into() } else { "fail".into() }),
                wall_ms: t0.elapsed().as_millis(),
            };
            emit(&report, &output)?;
            Ok(if stable { 0 } else { 4 })
        }
        Command::Jordan { field, input, lie, precision, output } => {
            let t0 = std::time::Instant::now();
            let fld = build_field(&field)?;
            let gamma = build_gamma(&fld, &input, precision + 8)?;
            #[derive(Serialize)]
            struct Body {
                parts: (String, String),
                first: String,
                second: String,
                certificates: String,
            }
            let body = if lie {
                let j = invariants::topological_jordan_lie(&gamma, precision)?;
                Body {
                    parts: ("gamma0".into(), "gamma1".into()),
                    first: format!("{}", j.gamma0),
                    second: format!("{}", j.gamma1),
                    certificates: format!(
                        "commute; gamma1 reduction-nilpotent; clusters {:?}",
                        j.clusters
                    ),
                }
            } else {
                let j = invariants::topological_jordan_group(&gamma, precision)?;
                Body {
                    parts: ("s".into(), "u".into()),
                    first: format!("{}", j.s),
                    second: format!("{}", j.u),
                    certificates: format!(
                        "su = us = gamma; charpoly(u) = (x-1)^n mod w; s fixed by the {}^{}-power map",
                        fld.q(),
                        j.r
                    ),
                }
            };
            let report = Report {
                config: RunConfig {
                    command: "jordan".into(),
                    p: field.p,
                    unram: field.unram,
                    eisenstein: field.eisenstein.clone(),
                    matrix: input.matrix.clone(),
                    charpoly: input.charpoly.clone(),
                    window: None,
                    extensions: None,
                    level: Some(if lie { "lie".into() } else { "group".into() }),
                    precision: Some(precision),
                    seed: None,
                },
                body,
                verdict: None,
                wall_ms: t0.elapsed().as_millis(),
            };
            emit(&report, &output)?;
            Ok(0)
        }
        Command::Suite { criterion, jobs, out } => {
            if let Some(j) = jobs {
                rayon::ThreadPoolBuilder::new().num_threads(j).build_global().ok();
            }
            let seed = battery::battery_seed();
            let results = match criterion {
                None => battery::run_all(seed),
                Some(1) => battery::criterion_1(),
                Some(2) => battery::criterion_2(seed),
                Some(3) => battery::criterion_3(),
                Some(4) => battery::criterion_4(),
                Some(5) => battery::criterion_5(),
                Some(6) => battery::criterion_6(seed),
                Some(7) => battery::criterion_7(seed),
                Some(8) => battery::criterion_8(),
                Some(9) => battery::criterion_9(),
                Some(10) => battery::criterion_10(),
                Some(k) => {
                    return Err(CoreError::Parse(format!("no criterion {k} (valid: 1..10)")))
                }
            };
            let mut rows = String::from("criterion\tcase\tpass\tseed\tdetail\n");
            let mut sorted = results.clone();
            sorted.sort_by(|a, b| (a.criterion, a.case.clone()).cmp(&(b.criterion, b.case.clone())));
            for r in &sorted {
                rows.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\n",
                    r.criterion, r.case, r.pass, seed, r.detail
                ));
            }
            print!("{rows}");
            if let Some(path) = out {
                std::fs::write(path, &rows).map_err(|e| CoreError::Parse(format!("{e}")))?;
            }
            let all_pass = sorted.iter().all(|r| r.pass);
            Ok(if all_pass { 0 } else { 4 })
        }
        Command::Tables { max_rank, out } => {
            let tsv = rootdata::tables_tsv(max_rank);
            print!("{tsv}");
            if let Some(path) = out {
                std::fs::write(path, &tsv).map_err(|e| CoreError::Parse(format!("{e}")))?;
            }
            Ok(0)
        }
    }
}

#[derive(PartialEq, Clone, Copy, Debug)]
enum FiberView {
    Lie,
    Hyperspecial,
    Iwahori,
}

fn parse_level(s: &str) -> Result<(FiberView, Level), CoreError> {
    match s {
        "lie" => Ok((FiberView::Lie, Level::Hyperspecial)),
        "hyperspecial" => Ok((FiberView::Hyperspecial, Level::Hyperspecial)),
        "iwahori" => Ok((FiberView::Iwahori, Level::Iwahori)),
        other => Err(CoreError::Parse(format!(
            "unknown level {other:?} (expected lie|hyperspecial|iwahori)"
        ))),
    }
}
