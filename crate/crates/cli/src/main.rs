//! `toricgen`: build fans, compute Milnor genera, construct generator plans
//! and run the coprimality sweep.
//!
//! Exit codes: 0 success, 1 a verification or oracle check failed, 2 the
//! request itself was invalid.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;

use toricgen::chow;
use toricgen::construct::{self, ConstructOptions, DEFAULT_CONE_CAP};
use toricgen::fan::{self, DEFAULT_MAX_DIM};
use toricgen::genus;
use toricgen::sweep::{self, SweepConfig, SweepMode, CSV_HEADER};
use toricgen::{Error, FamilyParams, Fan};

const CONE_CAP_ENV: &str = "TORICGEN_CONE_CAP";

#[derive(Parser)]
#[command(name = "toricgen", version, about = "Toric polynomial generators of complex cobordism")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a family fan, optionally blown up, and report its certificates.
    Fan(FanArgs),
    /// Milnor genus of a fan file and/or of a family by closed form.
    Genus(GenusArgs),
    /// Construction plan for a dimension.
    Construct(ConstructArgs),
    /// Search for coprime epsilon over a dimension range.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    eps: usize,
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, allow_hyphen_values = true)]
    b: i64,
}

impl FamilyArgs {
    fn params(&self) -> Result<FamilyParams, Error> {
        FamilyParams::new(self.n, self.eps, self.a, self.b)
    }
}

#[derive(Args)]
struct FanArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Star-subdivide the codimension-one edge cone.
    #[arg(long)]
    edge_blowup: bool,
    /// Number of torus-fixed points to blow up.
    #[arg(long, default_value_t = 0)]
    point_blowups: u64,
    /// Maximal-cone cap (default from TORICGEN_CONE_CAP, else 100000).
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_MAX_DIM)]
    max_dim: usize,
    /// Fan JSON destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenusArgs {
    /// Fan JSON file.
    #[arg(long)]
    fan: Option<PathBuf>,
    /// Evaluate the fan by localization (default when only --fan is given).
    #[arg(long)]
    engine: bool,
    /// Evaluate the closed form for the family given by --n --eps --a --b.
    #[arg(long, requires_all = ["n", "eps", "a", "b"])]
    closed_form: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<i64>,
    /// Closed form of the edge blow-up instead of the bare family.
    #[arg(long, requires = "closed_form")]
    edge_blowup: bool,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long)]
    n: u64,
    /// Materialize the fan (under the cap) and confirm the genus by localization.
    #[arg(long)]
    verify_engine: bool,
    /// Build the fan of the plan.
    #[arg(long)]
    materialize: bool,
    /// Maximal-cone cap (default from TORICGEN_CONE_CAP, else 100000).
    #[arg(long)]
    cap: Option<u64>,
    /// Where to write the materialized fan JSON.
    #[arg(long, requires = "materialize")]
    fan_out: Option<PathBuf>,
    /// Use CP^n when n + 1 is prime.
    #[arg(long)]
    projective_space: bool,
    /// Plan JSON destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Largest dimension to check.
    #[arg(long = "max")]
    max_n: u64,
    /// Count every valid epsilon rather than stopping at the witnesses.
    #[arg(long)]
    full_count: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Resumable progress file.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Dimensions per checkpointed block.
    #[arg(long, default_value_t = 1000)]
    checkpoint_every: u64,
    /// Fill the elapsed_ms column.
    #[arg(long)]
    timings: bool,
    /// Summary JSON destination; stderr when absent.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// CSV destination.
    #[arg(long)]
    out: PathBuf,
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parameter(_)
            | Error::Hypothesis(_)
            | Error::Size { .. }
            | Error::MalformedFan(_)
            | Error::InvalidCone { .. }
            | Error::Json(_)
            | Error::Checkpoint { .. } => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

fn check_failed(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Fan(args) => cmd_fan(args),
        Command::Genus(args) => cmd_genus(args),
        Command::Construct(args) => cmd_construct(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn cone_cap(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(cap) = flag {
        return Ok(cap);
    }
    match std::env::var(CONE_CAP_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Failure {
            code: 2,
            message: format!("{CONE_CAP_ENV}={v:?} is not a nonnegative integer"),
        }),
        Err(_) => Ok(DEFAULT_CONE_CAP),
    }
}

/// Writes `text` to `out`, or stdout when absent.
fn emit(out: Option<&Path>, text: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n")),
        None => writeln!(io::stdout().lock(), "{text}"),
    }
}

/// Human-facing lines go to stdout unless stdout carries JSON.
fn report(json_on_stdout: bool, line: &str) {
    if json_on_stdout {
        eprintln!("{line}");
    } else {
        println!("{line}");
    }
}

fn certify(fan: &Fan, json_on_stdout: bool) -> CmdResult {
    let regular = fan::is_regular(fan);
    let complete = fan::facet_pairing_complete(fan);
    report(
        json_on_stdout,
        &format!(
            "{}: {} rays, {} maximal cones, regular: {}, complete: {}",
            fan.label(),
            fan.rays().len(),
            fan.max_cones().len(),
            regular.passed(),
            complete.complete()
        ),
    );
    if regular.passed() && complete.complete() {
        Ok(())
    } else {
        Err(check_failed("fan failed its regularity or completeness certificate"))
    }
}

fn cmd_fan(args: FanArgs) -> CmdResult {
    let params = args.family.params()?;
    if params.n > args.max_dim {
        return Err(Error::Size { what: "dimension", requested: params.n as u128, limit: args.max_dim as u128 }.into());
    }
    let cap = cone_cap(args.cap)?;
    let n = params.n as u128;
    let base_cones = (n - params.eps as u128 + 1) * params.eps as u128 * 2;
    let predicted = base_cones
        + if args.edge_blowup { 2 * (n - 2) } else { 0 }
        + args.point_blowups as u128 * (n - 1);
    if predicted > cap as u128 {
        return Err(Error::Size { what: "maximal cones", requested: predicted, limit: cap as u128 }.into());
    }

    let mut fan = fan::build_family_fan(params)?;
    if args.edge_blowup {
        fan = fan::star_subdivide(&fan, &params.edge_cone())?.fan;
    }
    fan = construct::blow_up_points(fan, args.point_blowups)?;
    let mut label = fan.label().to_string();
    if args.edge_blowup {
        label.push_str(" + edge blow-up");
    }
    if args.point_blowups > 0 {
        label.push_str(&format!(" + {} point blow-ups", args.point_blowups));
    }
    let fan = fan.with_label(label);

    emit(args.out.as_deref(), &fan.to_json())?;
    certify(&fan, args.out.is_none())
}

fn cmd_genus(args: GenusArgs) -> CmdResult {
    let use_engine = args.engine || (args.fan.is_some() && !args.closed_form);
    if !use_engine && !args.closed_form {
        return Err(Failure { code: 2, message: "nothing to evaluate: pass --fan or --closed-form".into() });
    }
    let mut engine_value: Option<BigInt> = None;
    if use_engine {
        let path = args.fan.as_ref().ok_or_else(|| Failure {
            code: 2,
            message: "--engine needs --fan".into(),
        })?;
        let fan = Fan::from_json(&fs::read_to_string(path)?)?;
        let g = chow::milnor_genus(&fan)?;
        println!("engine: {g}");
        engine_value = Some(g);
    }
    if args.closed_form {
        let family = FamilyArgs {
            n: args.n.expect("required by clap"),
            eps: args.eps.expect("required by clap"),
            a: args.a.expect("required by clap"),
            b: args.b.expect("required by clap"),
        };
        let params = family.params()?;
        let g = if args.edge_blowup { genus::edge_blowup_genus(params)? } else { genus::family_genus(params)? };
        println!("closed form: {g}");
        if let Some(e) = engine_value {
            if e != g {
                return Err(check_failed(format!("engine gives {e}, closed form gives {g}")));
            }
            println!("agree");
        }
    }
    Ok(())
}

fn cmd_construct(args: ConstructArgs) -> CmdResult {
    let options = ConstructOptions { prefer_projective_space: args.projective_space };
    let plan = construct::construct_with(args.n, options)?;
    let cap = cone_cap(args.cap)?;
    let json_on_stdout = args.out.is_none();
    emit(args.out.as_deref(), &plan.to_json())?;

    if args.materialize {
        let fan = construct::materialize(&plan, cap, DEFAULT_MAX_DIM)?;
        if let Some(path) = &args.fan_out {
            fs::write(path, format!("{}\n", fan.to_json()))?;
        }
        certify(&fan, json_on_stdout)?;
    }

    let report_ = construct::verify_plan_with(&plan, args.verify_engine, cap);
    report(
        json_on_stdout,
        &format!(
            "plan n = {}: {}{}{} point blow-ups, final genus {} (target {})",
            plan.n,
            plan.base,
            if plan.edge_blowup { " + edge blow-up, " } else { ", " },
            plan.point_blowups,
            plan.final_genus,
            plan.target.magnitude
        ),
    );
    report(json_on_stdout, &format!("oracles: {}", report_.oracles.join(", ")));
    for c in &report_.checks {
        report(json_on_stdout, &format!("  {} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail));
    }
    if let Some(g) = &report_.engine_genus {
        report(json_on_stdout, &format!("engine genus: {g}"));
    }
    if report_.passed() {
        Ok(())
    } else {
        Err(check_failed("plan verification failed"))
    }
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    let config = SweepConfig {
        max_n: args.max_n,
        mode: if args.full_count { SweepMode::FullCount } else { SweepMode::WitnessOnly },
        jobs: args.jobs,
        checkpoint: args.checkpoint.clone(),
        block: args.checkpoint_every,
    };
    let mut out = BufWriter::new(File::create(&args.out)?);
    writeln!(out, "{CSV_HEADER}")?;
    let summary = sweep::sweep(&config, |rec| {
        writeln!(out, "{}", rec.csv_row(args.timings))?;
        Ok(())
    })?;
    out.flush()?;

    let text = summary.to_json();
    match &args.summary {
        Some(path) => fs::write(path, format!("{text}\n"))?,
        None => eprintln!("{text}"),
    }
    if summary.counterexample {
        return Err(check_failed(format!(
            "no valid epsilon for n in {:?}",
            summary.missing_witnesses
        )));
    }
    Ok(())
}
