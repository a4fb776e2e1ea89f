//! `subcurv`: run curvature identity suites along Riemannian submersions,
//! validate submersion definition files and export the built-in examples.
//!
//! Exit codes: 0 when everything holds, 1 when an identity or a check fails,
//! 2 on configuration, parse or IO errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use subcurv_core::gallery;
use subcurv_core::identities::report::{self, Format};
use subcurv_core::identities::{run_suite, ExampleSource, Family, SuiteConfig};
use subcurv_core::submersion::validate;
use subcurv_core::{parse_submersion, Error};

#[derive(Parser)]
#[command(name = "subcurv", version, about = "Curvature identities along Riemannian submersions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the identity suite and write a report.
    Verify(VerifyArgs),
    /// Check that a definition file describes a Riemannian submersion.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Write a gallery example as a definition file (stdout without -o).
    ExportExample {
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Gallery example by name; repeatable. Defaults to the whole gallery
    /// when neither --example nor --file is given.
    #[arg(long = "example")]
    examples: Vec<String>,
    /// Definition file; repeatable.
    #[arg(long = "file")]
    files: Vec<PathBuf>,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// Comma-separated subset of oneill, ricci, scalar, generalized, corollary.
    #[arg(long, value_delimiter = ',')]
    families: Vec<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
    Text,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Format {
        match f {
            OutputFormat::Json => Format::Json,
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Text => Format::Text,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Validate { file, points, seed } => cmd_validate(&file, points, seed),
        Command::ExportExample { name, output } => cmd_export_example(&name, output.as_deref()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("subcurv: {e}");
            ExitCode::from(2)
        }
    }
}

fn write_output(text: &str, output: Option<&Path>) -> Result<(), Error> {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<bool, Error> {
    let mut examples: Vec<ExampleSource> =
        args.examples.into_iter().map(ExampleSource::Gallery).collect();
    examples.extend(args.files.into_iter().map(ExampleSource::File));
    let mut config = SuiteConfig {
        points: args.points,
        seed: args.seed,
        tolerance: args.tolerance,
        ..SuiteConfig::default()
    };
    if !examples.is_empty() {
        config.examples = examples;
    }
    if !args.families.is_empty() {
        config.families = args
            .families
            .iter()
            .map(|f| Family::parse(f.trim()))
            .collect::<Result<_, _>>()?;
    }
    let suite = run_suite(&config)?;
    let text = report::render(&suite, args.format.into())?;
    write_output(&text, args.output.as_deref())?;
    if !suite.passed() {
        eprintln!(
            "subcurv: {} record(s) fail both variants at tolerance {:e}",
            suite.both_fail_count(),
            config.tolerance
        );
    }
    Ok(suite.passed())
}

fn cmd_validate(file: &Path, points: usize, seed: u64) -> Result<bool, Error> {
    if points == 0 {
        return Err(Error::Config("points must be at least 1".into()));
    }
    let text = fs::read_to_string(file)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", file.display())))?;
    let spec = parse_submersion(&text).map_err(|e| match e {
        Error::Parse { .. } | Error::UnknownSymbol { .. } => {
            Error::Config(format!("{}: {e}", file.display()))
        }
        other => other,
    })?;
    let report = validate(&spec, points, seed);
    println!("{} ({} points, seed {})", report.submersion, report.points, report.seed);
    for c in &report.checks {
        let mark = if c.passed { "pass" } else { "FAIL" };
        println!("  {mark}  {}: {}", c.check, c.detail);
    }
    Ok(report.passed())
}

fn cmd_export_example(name: &str, output: Option<&Path>) -> Result<bool, Error> {
    let text = gallery::definition_text(name)?;
    write_output(text, output)?;
    Ok(true)
}
