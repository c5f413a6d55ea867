mod compare;
mod input;

use clap::{Args, Parser, Subcommand};
use ddbd::benders::mip::solve_mip;
use ddbd::benders::{EngineConfig, SolveReport, SolveStatus};
use ddbd::rect::DecompositionFixture;
use ddbd::ucp::{gen_random_instance, solve_ucp, GenConfig, GenParams};
use ddbd::Sense;
use input::{read_text, CliError, Model, Seeds};
use log::info;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

const EXIT_ERROR: u8 = 1;
const EXIT_TIME_LIMIT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_DISAGREEMENT: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "ddbd", version, about = "Decision-diagram Benders decomposition solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one instance and write its report.
    Solve(SolveArgs),
    /// Solve instances with every method and tabulate the results as CSV.
    Compare(CompareArgs),
    /// Check a rectangular decomposition fixture.
    #[command(name = "verify-decomposition", alias = "verify")]
    Verify { fixture: PathBuf },
    /// Write a random unit-commitment instance as JSON.
    Generate {
        /// Instance size and seed as `n,T,S,seed`.
        #[arg(long = "gen", value_parser = input::parse_gen)]
        params: GenParams,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the root master diagram of an instance as Graphviz DOT.
    ExportDot {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_parser = input::parse_sense)]
        sense: Option<Sense>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Instance file: unit commitment, `"kind": "mip"`, or a diagram.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Random unit-commitment instance as `n,T,S,seed`.
    #[arg(long = "gen", value_parser = input::parse_gen)]
    gen: Option<GenParams>,
}

#[derive(Args, Debug)]
struct EngineArgs {
    /// Initial width of restricted and relaxed diagrams.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    width: u64,
    /// Overrides the sense of a MIP instance.
    #[arg(long, value_parser = input::parse_sense)]
    sense: Option<Sense>,
    /// Wall-clock limit in seconds.
    #[arg(long, value_parser = input::parse_time_limit)]
    time_limit: Option<Duration>,
    /// Skip cut generation on relaxed diagrams.
    #[arg(long)]
    no_relaxed_cuts: bool,
}

impl EngineArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            width: usize::try_from(self.width).unwrap_or(usize::MAX),
            time_limit: self.time_limit,
            relaxed_cuts: !self.no_relaxed_cuts,
            ..EngineConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    engine: EngineArgs,
    /// Directory for one DOT snapshot per cut of the final pool.
    #[arg(long)]
    emit_dot: Option<PathBuf>,
    /// Report JSON path; the CSV row goes next to it with a `.csv` extension.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Instance files, each compared in turn.
    #[arg(long)]
    instance: Vec<PathBuf>,
    /// Random instances as `n,T,S,seed`.
    #[arg(long = "gen", value_parser = input::parse_gen)]
    gen: Vec<GenParams>,
    /// Size `n,T,S` used with `--seeds`.
    #[arg(long, default_value = "2,3,2", value_parser = input::parse_size)]
    size: (usize, usize, usize),
    /// Comma-separated seeds; an empty list adds nothing.
    #[arg(long, value_parser = input::parse_seeds)]
    seeds: Option<Seeds>,
    #[command(flatten)]
    engine: EngineArgs,
    /// CSV path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("DDBD_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Solve(args) => solve(&args),
        Command::Compare(args) => {
            let mut models = Vec::new();
            for path in &args.instance {
                models.push((input::instance_name(path), Model::load(path, args.engine.sense)?));
            }
            for &p in &args.gen {
                models.push((input::gen_name(p), Model::generated(p, args.engine.sense)?));
            }
            let (units, periods, scenarios) = args.size;
            for &seed in args.seeds.as_ref().map(|s| s.0.as_slice()).unwrap_or(&[]) {
                let p = GenParams { units, periods, scenarios, seed };
                models.push((input::gen_name(p), Model::generated(p, args.engine.sense)?));
            }
            let table = compare::run(&models, &args.engine.config());
            write_output(args.out.as_deref(), &table.csv)?;
            Ok(if table.agree { 0 } else { EXIT_DISAGREEMENT })
        }
        Command::Verify { fixture } => {
            let fixture = DecompositionFixture::from_json(&read_text(&fixture)?)?;
            let report = fixture.run()?;
            let c = report.conditions;
            for (name, ok) in [
                ("cond_i", c.cond_i),
                ("cond_ii", c.cond_ii),
                ("cond_iii_sampled", c.cond_iii_sampled),
                ("equivalence", report.equivalence),
            ] {
                println!("{name}: {}", if ok { "pass" } else { "fail" });
            }
            Ok(if report.passed() { 0 } else { EXIT_ERROR })
        }
        Command::Generate { params, out } => {
            write_output(out.as_deref(), &gen_random_instance(params, &GenConfig::default()).to_json())?;
            Ok(0)
        }
        Command::ExportDot { source, sense, out } => {
            let dot = match load_source(&source, sense)? {
                Model::Diagram(dd) => dd.to_dot(),
                model => match model.snapshots(&[])?.first() {
                    Some(dd) => dd.to_dot(),
                    None => return Err(CliError::Usage("the master problem has no feasible assignment".into())),
                },
            };
            write_output(out.as_deref(), &dot)?;
            Ok(0)
        }
    }
}

fn load_source(source: &Source, sense: Option<Sense>) -> Result<Model, CliError> {
    match (&source.instance, source.gen) {
        (Some(path), _) => Model::load(path, sense),
        (None, Some(p)) => Model::generated(p, sense),
        (None, None) => Err(CliError::Usage("one of --instance or --gen is required".into())),
    }
}

fn solve(args: &SolveArgs) -> Result<u8, CliError> {
    let model = load_source(&args.source, args.engine.sense)?;
    let cfg = args.engine.config();
    info!("solving with width {} and relaxed cuts {}", cfg.width, cfg.relaxed_cuts);
    let report = match &model {
        Model::Ucp(inst) => solve_ucp(inst, &cfg)?,
        Model::Mip(inst) => solve_mip(inst, &cfg)?,
        Model::Diagram(_) => return Err(CliError::Usage("a diagram file cannot be solved".into())),
    };
    if let Some(dir) = &args.emit_dot {
        emit_snapshots(&model, &report, dir)?;
    }
    let json = serde_json::to_string_pretty(&report)?;
    let name = match &args.source.instance {
        Some(path) => input::instance_name(path),
        None => args.source.gen.map(input::gen_name).unwrap_or_default(),
    };
    let csv = format!("{}\n{}\n", SolveReport::csv_header(), report.csv_row(&name, "dd-bd"));
    match &args.out {
        Some(path) => {
            input::write_text(path, &json)?;
            input::write_text(&path.with_extension("csv"), &csv)?;
        }
        None => print_stdout(&format!("{json}\n"))?,
    }
    Ok(match report.status {
        SolveStatus::Optimal => 0,
        SolveStatus::TimeLimit { .. } => EXIT_TIME_LIMIT,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
    })
}

fn emit_snapshots(model: &Model, report: &SolveReport, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    for (k, dd) in model.snapshots(&report.cuts)?.iter().enumerate() {
        input::write_text(&dir.join(format!("refine_{k:03}.dot")), &dd.to_dot())?;
    }
    Ok(())
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => input::write_text(p, text),
        None if text.ends_with('\n') => print_stdout(text),
        None => print_stdout(&format!("{text}\n")),
    }
}

/// Writes to standard output; a closed pipe is not an error.
fn print_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io { path: PathBuf::from("<stdout>"), source: e }),
        _ => Ok(()),
    }
}
