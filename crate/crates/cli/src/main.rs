//! `susp`: build and check exact automorphism scripts for affine suspensions.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use susp::commands::{cmd_certify_flex, cmd_describe, cmd_solve, cmd_verify};
use susp::format::{parse_assignments, parse_point_table, Certificate, Instance, InstanceBody};
use susp::{Error, Result};

#[derive(Parser)]
#[command(
    name = "susp",
    version,
    about = "Exact automorphism scripts for affine suspensions"
)]
struct Cli {
    /// More log output (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Caps {
    /// Iteration bound when checking local nilpotency
    #[arg(long)]
    nilpotency_cap: Option<usize>,
    /// Candidates tried when choosing a generic parameter
    #[arg(long)]
    generic_cap: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify a script moving the sources onto the targets
    Solve {
        instance: PathBuf,
        /// Certificate path (stdout if omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        caps: Caps,
    },
    /// Check a certificate against its instance
    Verify {
        instance: PathBuf,
        certificate: PathBuf,
        #[command(flatten)]
        caps: Caps,
    },
    /// Rank certificate of lifted flows at a point (default: every source)
    CertifyFlex {
        instance: PathBuf,
        /// Point as `name=value` pairs, e.g. "x=1,y=1,u=1,v=2"
        #[arg(long, conflicts_with = "point_file")]
        point: Option<String>,
        /// Point as a TOML table of `name = value`
        #[arg(long)]
        point_file: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        caps: Caps,
    },
    /// Summarize dimensions, ranges, components and the given points
    Describe { instance: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn load(path: &Path, caps: Option<&Caps>) -> Result<Instance> {
    let mut inst = Instance::parse(&read(path)?)?;
    if let Some(c) = caps {
        if let Some(n) = c.nilpotency_cap {
            inst.options.nilpotency_cap = n;
        }
        if let Some(n) = c.generic_cap {
            inst.options.transit.generic_cap = n;
        }
    }
    Ok(inst)
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve {
            instance,
            output,
            caps,
        } => {
            let inst = load(&instance, Some(&caps))?;
            let sol = cmd_solve(&inst)?;
            let s = &sol.certificate.summary;
            eprintln!("{} steps, pool of {}, verified", s.steps, s.pool_size);
            for (comp, alpha) in &s.alphas {
                eprintln!("  {comp}: alpha = {alpha}");
            }
            emit(&sol.certificate.to_text()?, output.as_deref())
        }
        Command::Verify {
            instance,
            certificate,
            caps,
        } => {
            let inst = load(&instance, Some(&caps))?;
            let cert = Certificate::parse(&read(&certificate)?)?;
            let report = cmd_verify(&inst, &cert)?;
            println!("{report}");
            match report.first_failure() {
                None => Ok(()),
                Some(f) => Err(Error::Verification(f)),
            }
        }
        Command::CertifyFlex {
            instance,
            point,
            point_file,
            output,
            caps,
        } => {
            let inst = load(&instance, Some(&caps))?;
            let points = match (point, point_file) {
                (Some(p), _) => vec![parse_assignments(&p)?],
                (None, Some(f)) => vec![parse_point_table(&read(&f)?)?],
                (None, None) => match &inst.body {
                    InstanceBody::Affine { tower, sources, .. } => {
                        sources.iter().map(|p| tower.named(p)).collect()
                    }
                    InstanceBody::Mock { .. } => Vec::new(),
                },
            };
            if points.is_empty() {
                return Err(Error::Precondition("no point to certify".into()));
            }
            let mut text = String::new();
            let mut invalid = Vec::new();
            for (i, p) in points.iter().enumerate() {
                let rep = cmd_certify_flex(&inst, p)?;
                info!("point {i}: rank {} of {}", rep.rank, rep.dim);
                eprintln!("point {i}: rank {} of {}", rep.rank, rep.dim);
                if !rep.is_valid() {
                    invalid.push(i);
                }
                if i > 0 {
                    text.push_str("\n# ---\n");
                }
                text.push_str(&rep.to_text()?);
            }
            emit(&text, output.as_deref())?;
            if invalid.is_empty() {
                Ok(())
            } else {
                Err(Error::Verification(format!(
                    "rank deficient at points {invalid:?}"
                )))
            }
        }
        Command::Describe { instance } => {
            let inst = load(&instance, None)?;
            print!("{}", cmd_describe(&inst)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.family());
            ExitCode::from(e.family().exit_code() as u8)
        }
    }
}
