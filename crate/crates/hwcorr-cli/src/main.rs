use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use hwcorr::criteria::{evaluate_all, BoundVariant, EvaluateOptions};
use hwcorr::{DensityMatrix, Error, PhaseChoice, Result};
use hwcorr_cli::{
    basis_dump, compare, exit_code_for, scan, scan_to_csv, tensors_dump, threshold,
    to_canonical_json,
};

#[derive(Parser)]
#[command(
    name = "hwcorr",
    version,
    about = "Entanglement detection for 3- and 4-party qudit states via \
             Heisenberg-Weyl correlation tensors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum PhaseArg {
    Plus,
    Minus,
}

impl From<PhaseArg> for PhaseChoice {
    fn from(p: PhaseArg) -> Self {
        match p {
            PhaseArg::Plus => PhaseChoice::Plus,
            PhaseArg::Minus => PhaseChoice::Minus,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum VariantArg {
    Statement,
    Proof,
}

impl From<VariantArg> for BoundVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Statement => BoundVariant::Statement,
            VariantArg::Proof => BoundVariant::Proof,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Copy, Clone, ValueEnum)]
enum RandomKind {
    /// Haar-random pure state
    Pure,
    /// Ginibre-ensemble mixed state
    Mixed,
    /// random fully separable mixture of product states
    Product,
}

/// How a subcommand obtains its input state: a JSON file, a built-in family
/// member, or a seeded random state.
#[derive(clap::Args)]
struct StateSource {
    /// JSON state file ({"dims": [...], "matrix": [[[re,im],...],...]})
    state: Option<PathBuf>,
    /// Built-in family name (with --x)
    #[arg(long, conflicts_with = "state")]
    family: Option<String>,
    /// Family parameter in [0,1]
    #[arg(long, requires = "family")]
    x: Option<f64>,
    /// Seeded random state (with --dims)
    #[arg(long, value_enum, conflicts_with_all = ["state", "family"])]
    random: Option<RandomKind>,
    /// Party dimensions for --random, e.g. 2,2,2
    #[arg(long, value_delimiter = ',', requires = "random")]
    dims: Option<Vec<usize>>,
    /// Number of product terms for --random product
    #[arg(long, default_value_t = 3)]
    terms: usize,
    /// RNG seed for --random
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl StateSource {
    fn load(&self) -> Result<DensityMatrix> {
        if let Some(path) = &self.state {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidInput(format!("cannot read {}: {e}", path.display()))
            })?;
            return DensityMatrix::from_json(&text);
        }
        if let Some(name) = &self.family {
            let x = self.x.ok_or_else(|| {
                Error::InvalidInput("--family needs --x <value in [0,1]>".into())
            })?;
            return hwcorr::family(name)?.state(x);
        }
        if let Some(kind) = self.random {
            let dims = self
                .dims
                .clone()
                .ok_or_else(|| Error::InvalidInput("--random needs --dims".into()))?;
            return match kind {
                RandomKind::Pure => hwcorr::random_pure(&dims, self.seed),
                RandomKind::Mixed => hwcorr::random_mixed(&dims, self.seed),
                RandomKind::Product => hwcorr::random_product_mixture(&dims, self.terms, self.seed),
            };
        }
        Err(Error::InvalidInput(
            "no input state: pass a state file, --family NAME --x V, or --random KIND --dims D,D,..."
                .into(),
        ))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Dump the Hermitian observable basis for one local dimension
    Basis {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum, default_value = "plus")]
        phase: PhaseArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every criterion on a state and report margins and verdicts
    Analyze {
        #[command(flatten)]
        source: StateSource,
        #[arg(long, value_enum, default_value = "plus")]
        phase: PhaseArg,
        #[arg(long, value_enum, default_value = "proof")]
        bound_variant: VariantArg,
        /// Embed the correlation tensors in the report
        #[arg(long)]
        dump_tensors: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep a family parameter and tabulate every margin per grid point
    Scan {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long, value_enum, default_value = "plus")]
        phase: PhaseArg,
        #[arg(long, value_enum, default_value = "proof")]
        bound_variant: VariantArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate a criterion's detection threshold on [0,1] by bisection
    Threshold {
        #[arg(long)]
        family: String,
        #[arg(long)]
        criterion: String,
        #[arg(long, default_value_t = 5e-5)]
        tol: f64,
        #[arg(long, value_enum, default_value = "plus")]
        phase: PhaseArg,
        #[arg(long, value_enum, default_value = "proof")]
        bound_variant: VariantArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full criterion report plus the partial-transpose comparator per cut
    Compare {
        #[command(flatten)]
        source: StateSource,
        #[arg(long, value_enum, default_value = "plus")]
        phase: PhaseArg,
        #[arg(long, value_enum, default_value = "proof")]
        bound_variant: VariantArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract and dump every correlation tensor of a state
    DumpTensors {
        #[command(flatten)]
        source: StateSource,
        #[arg(long, value_enum, default_value = "plus")]
        phase: PhaseArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    let mut payload = text.to_string();
    if !payload.ends_with('\n') {
        payload.push('\n');
    }
    match out {
        Some(path) => std::fs::write(path, payload)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Basis { dim, phase, out } => {
            let dump = basis_dump(dim, phase.into())?;
            emit(&to_canonical_json(&dump)?, &out)
        }
        Command::Analyze { source, phase, bound_variant, dump_tensors, out } => {
            let rho = source.load()?;
            let options = EvaluateOptions {
                phase: phase.into(),
                bound_variant: bound_variant.into(),
            };
            let report = evaluate_all(&rho, &options)?;
            let text = if dump_tensors {
                let mut tree = serde_json::to_value(&report)
                    .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
                let tensors = serde_json::to_value(tensors_dump(&rho, options.phase)?)
                    .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
                tree.as_object_mut()
                    .expect("report serializes to an object")
                    .insert("tensors".into(), tensors);
                hwcorr_cli::canonicalize_numbers(&mut tree);
                serde_json::to_string_pretty(&tree)
                    .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?
            } else {
                to_canonical_json(&report)?
            };
            emit(&text, &out)
        }
        Command::Scan { family, from, to, steps, format, phase, bound_variant, out } => {
            let options = EvaluateOptions {
                phase: phase.into(),
                bound_variant: bound_variant.into(),
            };
            let result = scan(&family, from, to, steps, &options)?;
            let text = match format {
                FormatArg::Csv => scan_to_csv(&result),
                FormatArg::Json => to_canonical_json(&result)?,
            };
            emit(&text, &out)
        }
        Command::Threshold { family, criterion, tol, phase, bound_variant, out } => {
            let options = EvaluateOptions {
                phase: phase.into(),
                bound_variant: bound_variant.into(),
            };
            let result = threshold(&family, &criterion, tol, &options)?;
            emit(&to_canonical_json(&result)?, &out)
        }
        Command::Compare { source, phase, bound_variant, out } => {
            let rho = source.load()?;
            let options = EvaluateOptions {
                phase: phase.into(),
                bound_variant: bound_variant.into(),
            };
            let result = compare(&rho, &options)?;
            emit(&to_canonical_json(&result)?, &out)
        }
        Command::DumpTensors { source, phase, out } => {
            let rho = source.load()?;
            let dump = tensors_dump(&rho, phase.into())?;
            emit(&to_canonical_json(&dump)?, &out)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code_for(&err));
    }
}
