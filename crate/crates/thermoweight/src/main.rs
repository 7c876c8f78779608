use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use thermoweight::{run, write_csv, Command, Failure, JobSpec};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Check,
    Pressure,
    Equilibrium,
    Conditional,
    Dimension,
    Oracle,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Check => Command::Check,
            Cmd::Pressure => Command::Pressure,
            Cmd::Equilibrium => Command::Equilibrium,
            Cmd::Conditional => Command::Conditional,
            Cmd::Dimension => Command::Dimension,
            Cmd::Oracle => Command::Oracle,
        }
    }
}

/// Weighted pressure, equilibrium states and sponge dimensions for towers
/// of subshifts of finite type.
#[derive(Debug, Parser)]
#[command(name = "thermoweight", version)]
struct Args {
    command: Cmd,
    /// JSON job file.
    #[arg(long)]
    input: PathBuf,
    /// Where to write the JSON report.
    #[arg(long)]
    out: PathBuf,
    /// Optional CSV export of the cylinder table.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Overrides the pressure depth.
    #[arg(long)]
    n: Option<usize>,
    /// Overrides the cylinder depth.
    #[arg(long)]
    d: Option<usize>,
    /// Caps the number of worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(args: &Args) -> Result<(), Failure> {
    if let Some(t) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| Failure::Other(format!("cannot size the thread pool: {e}")))?;
    }
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", args.input.display())))?;
    let mut job = JobSpec::parse(&text)?;
    if let Some(n) = args.n {
        job.depths.n = n;
    }
    if let Some(d) = args.d {
        job.depths.d = d;
    }
    let outcome = run(&job, args.command.into())?;
    let mut body = serde_json::to_string_pretty(&outcome.report).map_err(|e| Failure::Other(e.to_string()))?;
    body.push('\n');
    fs::write(&args.out, body).map_err(|e| Failure::Other(format!("cannot write {}: {e}", args.out.display())))?;
    if let Some(path) = &args.csv {
        let table = outcome
            .table
            .as_ref()
            .ok_or_else(|| Failure::Invalid("this command produces no cylinder table".into()))?;
        let file = fs::File::create(path).map_err(|e| Failure::Other(format!("cannot create {}: {e}", path.display())))?;
        write_csv(table, file)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("thermoweight: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
