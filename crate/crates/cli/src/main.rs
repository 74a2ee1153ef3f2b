//! Convergence studies for full DG versus embedded Trefftz DG.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use etdg::densela::DEFAULT_EPS;
use etdg::study::{
    parse_config_text, run_dof_table, run_planewave_1d, run_study, write_dof_csv,
    write_planewave_csv, write_study_csv, StudyConfig, PLANE_WAVE_OMEGA,
};
use etdg::Error;

#[derive(Parser)]
#[command(
    name = "etdg",
    version,
    about = "Embedded Trefftz DG convergence studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// h/p convergence study of full DG against embedded Trefftz DG.
    Study(Box<StudyArgs>),
    /// Best approximation of sin(ωx) and cos(ωx) in the 1D embedded space.
    Planewave1d(PlaneWaveArgs),
    /// Closed-form dof and nonzero counts on a fixed mesh.
    Doftable(DofArgs),
}

/// Every flag overrides the matching key of the config file.
#[derive(Args)]
struct StudyArgs {
    /// File with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// laplace, poisson, helmholtz or advection.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    pmin: Option<String>,
    #[arg(long)]
    pmax: Option<String>,
    /// Number of mesh levels.
    #[arg(long)]
    refinements: Option<String>,
    /// Subdivisions of the base mesh.
    #[arg(long)]
    base_n: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    /// svd or qr.
    #[arg(long)]
    kernel_method: Option<String>,
    #[arg(long)]
    omega: Option<String>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// Fill the timing columns.
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct PlaneWaveArgs {
    #[arg(long, default_value_t = 2)]
    pmin: usize,
    #[arg(long, default_value_t = 5)]
    pmax: usize,
    #[arg(long, default_value_t = PLANE_WAVE_OMEGA)]
    omega: f64,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DofArgs {
    #[arg(long, default_value_t = 54)]
    elements: usize,
    #[arg(long, default_value_t = 0)]
    pmin: usize,
    #[arg(long, default_value_t = 5)]
    pmax: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl StudyArgs {
    fn into_config(self) -> etdg::Result<StudyConfig> {
        let mut entries = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                parse_config_text(&text)?
            }
            None => Vec::new(),
        };
        let overrides = [
            ("problem", self.problem),
            ("pmin", self.pmin),
            ("pmax", self.pmax),
            ("refinements", self.refinements),
            ("base_n", self.base_n),
            ("eps", self.eps),
            ("kernel_method", self.kernel_method),
            ("omega", self.omega),
            ("out", self.out),
            ("threads", self.threads),
        ];
        entries.extend(
            overrides
                .into_iter()
                .filter_map(|(k, v)| v.map(|v| (k.to_string(), v))),
        );
        if self.timings {
            entries.push(("timings".into(), "true".into()));
        }
        StudyConfig::from_entries(&entries)
    }
}

fn degrees(pmin: usize, pmax: usize) -> etdg::Result<Vec<usize>> {
    if pmin > pmax {
        return Err(Error::Config(format!(
            "pmin = {pmin} exceeds pmax = {pmax}"
        )));
    }
    Ok((pmin..=pmax).collect())
}

fn with_output(
    out: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> etdg::Result<()>,
) -> etdg::Result<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write(&mut w)?;
            w.flush()?;
            log::info!("wrote {}", path.display());
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> etdg::Result<()> {
    match cli.command {
        Command::Study(args) => {
            let cfg = args.into_config()?;
            let records = run_study(&cfg)?;
            with_output(cfg.out.as_deref(), |w| {
                write_study_csv(&records, cfg.timings, w)
            })
        }
        Command::Planewave1d(args) => {
            let rows = run_planewave_1d(&degrees(args.pmin, args.pmax)?, args.omega, args.eps)?;
            with_output(args.out.as_deref(), |w| write_planewave_csv(&rows, w))
        }
        Command::Doftable(args) => {
            let rows = run_dof_table(args.elements, &degrees(args.pmin, args.pmax)?)?;
            with_output(args.out.as_deref(), |w| write_dof_csv(&rows, w))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidEpsilon(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
