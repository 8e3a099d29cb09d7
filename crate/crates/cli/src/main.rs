use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use chiral_cli::io::{self, Format, Table};
use chiral_cli::sampling::{self, Coupling, KindArg, SampleSpec};
use chiral_cli::verify::{self, Options, Suite};
use chiral_core::densities::DensityParams;
use chiral_core::jacobians::{self, JacobianCase, Parity};
use chiral_core::models::{EnsembleParams, Kind};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "chiral", version, about = "Chiral random matrices with a rank-one coupling")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw Jacobi matrices or eigenvalues.
    Sample(SampleArgs),
    /// Eigenvalues of the perturbed matrices in a `sample` output.
    Eig(EigArgs),
    /// Closed-form densities.
    #[command(subcommand)]
    Density(DensityCommand),
    /// Run a verification suite and print a JSON report.
    Verify(VerifyArgs),
    /// Convert a table, or bin one of its columns.
    Export(ExportArgs),
}

#[derive(Args)]
struct Output {
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (default: from the file extension, else CSV).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Output {
    fn write(&self, t: &Table) -> Result<()> {
        let format = self
            .format
            .or_else(|| self.out.as_deref().map(Format::from_path))
            .unwrap_or(Format::Csv);
        Ok(t.write(self.out.as_deref(), format)?)
    }
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// Coupling type; `none` outputs the Jacobi entries.
    #[arg(long, value_enum, default_value = "none")]
    kind: KindArg,
    /// Coupling strength, or `chi` for the random coupling.
    #[arg(long, default_value = "1")]
    l: Coupling,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, env = "CHIRAL_SEED", default_value_t = 0)]
    seed: u64,
    /// Sample the full matrix model instead of the tridiagonal one.
    #[arg(long)]
    dense: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct EigArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Coupling strength (default: taken from the input metadata).
    #[arg(long)]
    l: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand)]
enum DensityCommand {
    /// Log density of each configuration in an eigenvalue table.
    Eval(EvalArgs),
    /// Integrate the densities numerically and compare the masses with 1.
    CheckNorm(CheckNormArgs),
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    input: PathBuf,
    /// The remaining parameters default to the input metadata.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long)]
    l: Option<Coupling>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CheckNormArgs {
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityArg {
    Even,
    Odd,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long, env = "CHIRAL_SEED", default_value_t = 1)]
    seed: u64,
    /// Monte Carlo sample size.
    #[arg(long, default_value_t = 100_000)]
    reps: usize,
    /// Random points per Jacobian case.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Realizations per parameter point of the dense-model checks.
    #[arg(long, default_value_t = 100)]
    seeds_per_case: usize,
    /// Samples of the round-trip check.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Restrict the Jacobian suite to one parity.
    #[arg(long, value_enum)]
    parity: Option<ParityArg>,
    /// Restrict the Jacobian suite to one coupling type.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Restrict the Jacobian suite to one number of free eigenvalues.
    #[arg(long)]
    s: Option<usize>,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportTo {
    Csv,
    Json,
    /// Equal-width histogram of `--column`.
    Histogram,
    /// 2D counts of `--x` against `--y`.
    Grid,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    to: ExportTo,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[arg(long)]
    column: Option<String>,
    #[arg(long, default_value = "re")]
    x: String,
    #[arg(long, default_value = "im")]
    y: String,
    #[command(flatten)]
    output: Output,
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn stamp(t: &mut Table, seed: Option<u64>) {
    t.meta.insert("schema".into(), io::SCHEMA.to_string());
    t.meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    t.meta.insert("command".into(), command_line());
    if let Some(s) = seed {
        t.meta.insert("seed".into(), s.to_string());
    }
}

fn read_table(path: &Path) -> Result<Table> {
    Table::read(path).with_context(|| format!("reading {}", path.display()))
}

/// Command-line value, else the input metadata.
fn param<T: FromStr>(given: Option<T>, t: &Table, key: &str) -> Result<T> {
    if let Some(v) = given {
        return Ok(v);
    }
    let raw = t
        .meta
        .get(key)
        .ok_or_else(|| anyhow!("--{key} is required (the input has no `{key}` metadata)"))?;
    raw.parse()
        .map_err(|_| anyhow!("cannot parse `{key}: {raw}` from the input metadata"))
}

fn required_kind(k: KindArg) -> Result<Kind> {
    k.kind().ok_or_else(|| anyhow!("--kind must be herm or antiherm"))
}

fn sample(a: &SampleArgs) -> Result<()> {
    let params = EnsembleParams::new(a.beta, a.m, a.n)?;
    let spec = SampleSpec {
        params,
        kind: a.kind.kind(),
        coupling: a.l,
        reps: a.reps,
        seed: a.seed,
        dense: a.dense,
    };
    let mut t = sampling::sample_table(&spec)?;
    stamp(&mut t, Some(a.seed));
    for (k, v) in [
        ("beta", a.beta.to_string()),
        ("m", a.m.to_string()),
        ("n", a.n.to_string()),
        ("reps", a.reps.to_string()),
        ("model", if a.dense { "dense" } else { "jacobi" }.to_string()),
    ] {
        t.meta.insert(k.into(), v);
    }
    if let Some(kind) = a.kind.to_possible_value() {
        t.meta.insert("kind".into(), kind.get_name().into());
    }
    if spec.kind.is_some() {
        t.meta.insert("l".into(), a.l.to_string());
    }
    a.output.write(&t)
}

fn eig(a: &EigArgs) -> Result<()> {
    let input = read_table(&a.input)?;
    let kind = required_kind(a.kind)?;
    let l = param(a.l, &input, "l")?;
    if l.is_nan() || l <= 0.0 {
        bail!("--l must be positive, got {l}");
    }
    let mut t = sampling::eig_table(&input, kind, l)?;
    for key in ["beta", "m", "n", "seed"] {
        if let Some(v) = input.meta.get(key) {
            t.meta.insert(key.into(), v.clone());
        }
    }
    stamp(&mut t, None);
    t.meta.insert("kind".into(), a.kind.to_possible_value().expect("named").get_name().into());
    t.meta.insert("l".into(), l.to_string());
    a.output.write(&t)
}

fn density_eval(a: &EvalArgs) -> Result<()> {
    let input = read_table(&a.input)?;
    let params = EnsembleParams::new(
        param(a.beta, &input, "beta")?,
        param(a.m, &input, "m")?,
        param(a.n, &input, "n")?,
    )?;
    let kind_arg = match a.kind {
        Some(k) => k,
        None => {
            let raw = param::<String>(None, &input, "kind")?;
            KindArg::from_str(&raw, true).map_err(|e| anyhow!("input metadata: {e}"))?
        }
    };
    let kind = required_kind(kind_arg)?;
    let coupling: Coupling = param(a.l, &input, "l")?;
    let dp = DensityParams::new(params, coupling.l_mode())?;
    let mut t = sampling::density_table(&input, &dp, kind)?;
    stamp(&mut t, None);
    a.output.write(&t)
}

fn check_norm(a: &CheckNormArgs) -> Result<bool> {
    let entries = verify::normalization_table();
    let mut t = Table::new(&["density", "mass", "passed", "seconds"]);
    for e in &entries {
        t.push(vec![e.density.as_str().into(), e.value.into(), if e.passed { "yes" } else { "no" }.into(), e.seconds.into()]);
    }
    stamp(&mut t, None);
    t.meta.insert("tolerance".into(), verify::NORMALIZATION_TOL.to_string());
    a.output.write(&t)?;
    Ok(entries.iter().all(|e| e.passed))
}

fn run_verify(a: &VerifyArgs) -> Result<i32> {
    let o = Options {
        seed: a.seed,
        reps: a.reps,
        trials: a.trials,
        seeds_per_case: a.seeds_per_case,
        round_trip_samples: a.samples,
    };
    let restricted = a.parity.is_some() || a.kind.is_some() || a.s.is_some();
    let report = if a.suite == Suite::Jacobian && restricted {
        let grid: Vec<JacobianCase> = jacobians::full_grid(&[1, 2, 3, 4, 5])
            .into_iter()
            .filter(|c| match a.s {
                Some(s) => c.s == s,
                None => c.s <= 3,
            })
            .filter(|c| match a.parity {
                Some(ParityArg::Even) => c.parity == Parity::Even,
                Some(ParityArg::Odd) => c.parity == Parity::Odd,
                None => true,
            })
            .filter(|c| a.kind.and_then(KindArg::kind).map_or(true, |k| c.kind == k))
            .collect();
        if grid.is_empty() {
            bail!("no Jacobian case matches the filters (s must be between 1 and 5)");
        }
        verify::Report::new(a.suite, a.seed, vec![verify::jacobian(&o, &grid)])
    } else if restricted {
        bail!("--parity, --kind and --s only apply to the jacobian suite");
    } else {
        verify::run(a.suite, &o)
    };
    for c in &report.checks {
        eprintln!(
            "{} {} {} [{:.1}s]",
            c.criterion,
            if c.passed { "PASS" } else { "FAIL" },
            c.summary,
            c.seconds
        );
    }
    let text = serde_json::to_string_pretty(&report)? + "\n";
    print!("{text}");
    if let Some(p) = &a.out {
        std::fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(report.exit_code())
}

fn export(a: &ExportArgs) -> Result<()> {
    let input = read_table(&a.input)?;
    let mut t = match a.to {
        ExportTo::Csv | ExportTo::Json => {
            if a.output.format.is_some() {
                bail!("--format only applies to histogram and grid exports");
            }
            let format = if a.to == ExportTo::Csv { Format::Csv } else { Format::Json };
            return Ok(input.write(a.output.out.as_deref(), format)?);
        }
        ExportTo::Histogram => {
            let column = a.column.as_deref().ok_or_else(|| anyhow!("--column is required for a histogram"))?;
            io::histogram(&input.f64_column(column)?, a.bins)?
        }
        ExportTo::Grid => io::grid_counts(&input.f64_column(&a.x)?, &input.f64_column(&a.y)?, a.bins)?,
    };
    t.meta = input.meta.clone();
    t.meta.insert("source".into(), a.input.display().to_string());
    stamp(&mut t, None);
    a.output.write(&t)
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Sample(a) => sample(a).map(|_| 0),
        Command::Eig(a) => eig(a).map(|_| 0),
        Command::Density(DensityCommand::Eval(a)) => density_eval(a).map(|_| 0),
        Command::Density(DensityCommand::CheckNorm(a)) => check_norm(a).map(|ok| if ok { 0 } else { 1 }),
        Command::Verify(a) => run_verify(a),
        Command::Export(a) => export(a).map(|_| 0),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
