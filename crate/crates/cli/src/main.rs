use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use steering_core::criteria::IsotropicDenominator;
use steering_core::radii::FamilyKind;
use steering_core::verify::{self, VerifyConfig};

use steering_cli::bound::{self, BoundConfig, MeasurementClass};
use steering_cli::{tables, Failure, Format};

/// Largest dimension accepted by the scalar scans.
const MAX_SCALAR_D: usize = 100_000;
/// Largest local dimension accepted by the matrix-level commands.
const MAX_MATRIX_D: usize = 8;

#[derive(Parser, Debug)]
#[command(
    name = "steering",
    version,
    about = "Critical radii and steering criteria for Werner and isotropic states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Radius table: closed form and solver R2, projective and POVM references.
    Radii {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 2)]
        d_min: usize,
        #[arg(long)]
        d_max: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Solve only the rank-1 effect instead of minimising over all ranks.
        #[arg(long)]
        rank_one_only: bool,
    },
    /// Run the invariant suite and print a JSON report.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-rank dichotomic radii and the minimising rank for each dimension.
    ConjectureScan {
        #[arg(long, default_value_t = 2)]
        d_min: usize,
        #[arg(long)]
        d_max: usize,
        #[arg(long, value_enum, default_value_t = ScanFamily::Both)]
        family: ScanFamily,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower and upper bounds on a critical radius of a state read from JSON.
    Bound {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum)]
        anchor: Family,
        #[arg(long, value_enum)]
        n: MeasurementClass,
        /// Feasibility tolerance of the channel search.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Use the denominator d^2 - F_S - 1 in the isotropic twirling branch.
        #[arg(long)]
        printed_denominator: bool,
        #[arg(long, value_enum, default_value_t = BoundFormat::Text)]
        format: BoundFormat,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Family {
    Werner,
    Isotropic,
}

impl From<Family> for FamilyKind {
    fn from(f: Family) -> Self {
        match f {
            Family::Werner => FamilyKind::Werner,
            Family::Isotropic => FamilyKind::Isotropic,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScanFamily {
    Werner,
    Isotropic,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BoundFormat {
    Text,
    Json,
}

fn sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn check_range(d_min: usize, d_max: usize, cap: usize) -> Result<(), Failure> {
    if d_min < 2 || d_max > cap || d_min > d_max {
        return Err(Failure::Input(format!(
            "dimension range {d_min}..={d_max} must lie within 2..={cap} and be non-empty"
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Radii {
            family,
            d_min,
            d_max,
            format,
            out,
            rank_one_only,
        } => {
            check_range(d_min, d_max, MAX_SCALAR_D)?;
            let rows = tables::radii_rows(family.into(), d_min, d_max, rank_one_only)?;
            let mut w = sink(&out)?;
            tables::write_radii(&mut w, family.into(), &rows, format)?;
            w.flush()?;
            Ok(true)
        }
        Command::Verify { seed, samples, out } => {
            let report = verify::run(&VerifyConfig { seed, samples })?;
            let mut w = sink(&out)?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
            w.flush()?;
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!(
                    "FAIL [{}] {}: {} > {}",
                    c.module, c.name, c.measured, c.tolerance
                );
            }
            Ok(report.passed)
        }
        Command::ConjectureScan {
            d_min,
            d_max,
            family,
            format,
            out,
        } => {
            check_range(d_min, d_max, MAX_SCALAR_D)?;
            let kinds = match family {
                ScanFamily::Werner => vec![FamilyKind::Werner],
                ScanFamily::Isotropic => vec![FamilyKind::Isotropic],
                ScanFamily::Both => vec![FamilyKind::Werner, FamilyKind::Isotropic],
            };
            let rows = tables::scan_rows(&kinds, d_min, d_max)?;
            let mut w = sink(&out)?;
            tables::write_scan(&mut w, &rows, format)?;
            w.flush()?;
            let flagged: Vec<String> = rows
                .iter()
                .filter(|r| r.flagged)
                .map(|r| format!("{} d={}", r.family, r.d))
                .collect();
            if !flagged.is_empty() {
                eprintln!("rank 1 is not minimal for: {}", flagged.join(", "));
            }
            Ok(true)
        }
        Command::Bound {
            state,
            anchor,
            n,
            tol,
            printed_denominator,
            format,
        } => {
            let config = BoundConfig {
                anchor: anchor.into(),
                class: n,
                tol,
                denominator: if printed_denominator {
                    IsotropicDenominator::Printed
                } else {
                    IsotropicDenominator::Twirled
                },
                max_dim: MAX_MATRIX_D,
            };
            let report = bound::run(&state, &config)?;
            let mut w = sink(&None)?;
            match format {
                BoundFormat::Json => {
                    serde_json::to_writer_pretty(&mut w, &report)?;
                    writeln!(w)?;
                }
                BoundFormat::Text => bound::write_text(&mut w, &report)?,
            }
            w.flush()?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::NoConvergence(m)) => {
            eprintln!("error: solver did not converge: {m}");
            ExitCode::from(3)
        }
    }
}
