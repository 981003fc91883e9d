mod commands;
mod error;
mod spec;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use bubblekit::series::Rat;
use clap::{Parser, Subcommand};

use commands::{Check, Format, ScaleChoice};
use error::CliError;
use spec::Spec;

/// Degenerations of flat cone spheres, asymptotically conical spaces and their
/// algebraic counterparts, computed from a family spec file.
#[derive(Debug, Parser)]
#[command(name = "bubblekit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Family spec (JSON).
    spec: PathBuf,
    /// Output format; each command has its own default.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Vanishing-order tree of the points (DOT by default).
    Tree(Common),
    /// Bubble models at every interior tree node.
    Bubbles(Common),
    /// Rescaling exponents and regimes along a named section.
    Section {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        name: String,
    },
    /// Angle-stability of the configuration and its limit.
    Stability(Common),
    /// Node weights and resolved marked tuple of a nodal curve.
    Resolve(Common),
    /// Rescaled limits of a monopole family along a section.
    Ghlimits {
        #[command(flatten)]
        common: Common,
        /// Section name; defaults to the only section, else the zero section.
        #[arg(long)]
        name: Option<String>,
    },
    /// Weighted rescaling of a polynomial family.
    Rescale {
        #[command(flatten)]
        common: Common,
        /// Comma-separated weights such as `1,3/2`; repeat for a cascade.
        #[arg(long, value_parser = parse_weights)]
        weights: Vec<Vec<Rat>>,
        /// Scale exponent for a single weight vector.
        #[arg(long, conflicts_with = "auto", value_parser = parse_rat)]
        c: Option<Rat>,
        /// Use the smallest breakpoint at every stage.
        #[arg(long)]
        auto: bool,
    },
    /// Numerical checks of the exact predictions.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        check: Check,
    },
}

fn parse_rat(s: &str) -> Result<Rat, String> {
    s.trim().parse::<Rat>().map_err(|e| format!("`{s}`: {e}"))
}

fn parse_weights(s: &str) -> Result<Vec<Rat>, String> {
    s.split(',').map(parse_rat).collect()
}

fn run(command: &Command) -> Result<(String, Option<PathBuf>, PathBuf), CliError> {
    let (common, text) = match command {
        Command::Tree(c) => (c, commands::tree(&Spec::load(&c.spec)?, c.format)),
        Command::Bubbles(c) => (c, commands::bubbles(&Spec::load(&c.spec)?, c.format)),
        Command::Section { common: c, name } => (c, commands::section(&Spec::load(&c.spec)?, name, c.format)),
        Command::Stability(c) => (c, commands::stability(&Spec::load(&c.spec)?, c.format)),
        Command::Resolve(c) => (c, commands::resolve_cmd(&Spec::load(&c.spec)?, c.format)),
        Command::Ghlimits { common: c, name } => {
            (c, commands::ghlimits(&Spec::load(&c.spec)?, name.as_deref(), c.format))
        }
        Command::Rescale { common: c, weights, c: scale, auto } => {
            let spec = Spec::load(&c.spec)?;
            let choice = match (scale, auto) {
                (Some(v), _) => ScaleChoice::Fixed(v.clone()),
                (None, true) => ScaleChoice::Auto,
                (None, false) => return Err(spec.err("", "pass --c <exponent> or --auto")),
            };
            (c, commands::rescale_cmd(&spec, weights, &choice, c.format))
        }
        Command::Verify { common: c, check } => (c, commands::verify(&Spec::load(&c.spec)?, *check, c.format)),
    };
    Ok((text?, common.output.clone(), common.spec.clone()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (text, output, spec) = match run(&cli.command) {
        Ok(done) => done,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.failure.exit_code());
        }
    };
    let written = match &output {
        Some(path) => std::fs::write(path, &text).map_err(|e| CliError::validation(&spec, "", format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::validation(&spec, "", e)),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.failure.exit_code())
        }
    }
}
