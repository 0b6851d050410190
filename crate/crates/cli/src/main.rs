use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod report;

/// Finite distributive lattices and semilinear open sets: checks,
/// certificates and adjoints.
#[derive(Debug, Parser)]
#[command(name = "cevian", version)]
struct Cli {
    /// Print reports as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Complete normality, the difference table, and a summary of a lattice.
    Check { lattice: PathBuf },
    /// Build a surjective map onto a completely normal lattice.
    Forge {
        lattice: PathBuf,
        /// Number of stages (default: twice the number of elements).
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Shuffle the order in which elements become values.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Forge every level of a chain of lattices and check naturality.
    ForgeChain {
        chain: PathBuf,
        /// Directory for the per-level certificates.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Re-check a certificate from scratch.
    Verify { certificate: PathBuf },
    /// Apply an adjoint to a semilinear set.
    Adjoint(AdjointArgs),
    /// Consonance kernel of a homomorphism.
    Kernel { hom: PathBuf },
    /// Apply one domain or range step to a certificate.
    Extend(ExtendArgs),
}

#[derive(Debug, Args)]
#[group(id = "op", required = true, multiple = false)]
struct AdjointOp {
    /// Project onto these coordinates, e.g. `x,y` or `0,1`.
    #[arg(long, group = "op")]
    project: Option<String>,
    /// Embed into these coordinates.
    #[arg(long, group = "op")]
    embed: Option<String>,
    /// Least set over these functionals above the input.
    #[arg(long, group = "op")]
    upper: Option<String>,
    /// Greatest set over these functionals below the input.
    #[arg(long, group = "op")]
    lower: Option<String>,
}

#[derive(Debug, Args)]
struct AdjointArgs {
    set: PathBuf,
    #[command(flatten)]
    op: AdjointOp,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExtendArgs {
    certificate: PathBuf,
    /// Domain step: add this functional, e.g. `x0 - 2*x1`.
    #[arg(long, conflicts_with = "element", required_unless_present = "element")]
    functional: Option<String>,
    /// Range step: join-irreducible names of the new value, comma separated.
    #[arg(long)]
    element: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { lattice } => commands::check(&lattice, cli.json),
        Command::Forge {
            lattice,
            steps,
            out,
            seed,
        } => commands::forge(&lattice, steps, seed, out.as_deref(), cli.json),
        Command::ForgeChain { chain, out_dir } => commands::forge_chain(&chain, out_dir.as_deref(), cli.json),
        Command::Verify { certificate } => commands::verify(&certificate, cli.json),
        Command::Adjoint(args) => {
            let op = match (args.op.project, args.op.embed, args.op.upper, args.op.lower) {
                (Some(c), ..) => commands::Adjoint::Project(c),
                (_, Some(c), ..) => commands::Adjoint::Embed(c),
                (_, _, Some(g), _) => commands::Adjoint::Upper(g),
                (.., Some(g)) => commands::Adjoint::Lower(g),
                _ => unreachable!("clap requires one operation"),
            };
            commands::adjoint(&args.set, &op, args.out.as_deref())
        }
        Command::Kernel { hom } => commands::kernel(&hom, cli.json),
        Command::Extend(args) => {
            let step = match (args.functional, args.element) {
                (Some(f), _) => commands::StepArg::Functional(f),
                (None, Some(e)) => commands::StepArg::Element(e),
                (None, None) => unreachable!("clap requires one step"),
            };
            commands::extend(&args.certificate, &step, args.out.as_deref(), cli.json)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            if let Some(text) = failure.message() {
                eprintln!("{text}");
            }
            ExitCode::from(failure.code())
        }
    }
}
