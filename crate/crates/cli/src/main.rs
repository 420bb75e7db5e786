use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hermpert::alignment::{align, blockwise_diagonalize, m_matrix};
use hermpert::first_order::first_order_eigenvalues;
use hermpert::harness::{convergence_study, default_t_grid, worked_example_regression, EnsembleConfig, Predictor};
use hermpert::rayleigh::LineExpansion;
use hermpert::schur::{refined_eigenvalues, SchurVariant};
use hermpert::text::{format_matrix, format_real, parse_hermitian};
use hermpert::{eigh_default, HermitianMatrix, PerturbError};

/// Perturbation expansions for Hermitian eigenproblems.
#[derive(Parser)]
#[command(name = "hermpert", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues (non-increasing) and eigenvectors of a Hermitian matrix.
    Eigh { matrix: PathBuf },
    /// Predicted eigenvalues of A + tE.
    Predict {
        #[arg(long, value_enum)]
        order: Order,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        e: PathBuf,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t: f64,
    },
    /// N, M∘F̂ and U'(0) for the line A + tF.
    Derivative {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        f: PathBuf,
    },
    /// Convergence-order study over a random ensemble, as CSV.
    Converge {
        #[arg(long)]
        predictor: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        blocks: Vec<usize>,
        #[arg(long)]
        trials: usize,
        #[arg(long, value_delimiter = ',')]
        tgrid: Option<Vec<f64>>,
    },
    /// Regression report for the built-in 3x3 worked example.
    PaperExample,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    #[value(name = "1")]
    First,
    /// Second-order eigenvalues and first-order eigenvectors.
    #[value(name = "2")]
    Second,
    #[value(name = "schur")]
    Schur,
    #[value(name = "schur-simple")]
    SchurSimple,
}

enum Failure {
    Lib(PerturbError),
    Io(PathBuf, std::io::Error),
    Assertion(String),
}

impl From<PerturbError> for Failure {
    fn from(e: PerturbError) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Assertion(_) | Failure::Lib(PerturbError::Study(_)) => 1,
            Failure::Lib(e) if e.is_numerical_precondition() => 3,
            Failure::Lib(_) | Failure::Io(..) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Lib(e) => e.to_string(),
            Failure::Io(p, e) => format!("{}: {e}", p.display()),
            Failure::Assertion(m) => m.clone(),
        }
    }
}

fn read_hermitian(path: &Path) -> Result<HermitianMatrix, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))?;
    parse_hermitian(&text).map_err(|e| match e {
        PerturbError::Parse { line, column, message } => Failure::Lib(PerturbError::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        }),
        other => Failure::Lib(other),
    })
}

fn push_values(out: &mut String, values: &[f64]) {
    for v in values {
        let _ = writeln!(out, "{}", format_real(*v));
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    let mut out = String::new();
    match cli.command {
        Command::Eigh { matrix } => {
            let d = eigh_default(&read_hermitian(&matrix)?)?;
            push_values(&mut out, &d.lambda);
            out.push_str(&format_matrix(&d.u));
        }
        Command::Predict { order, a, e, t } => {
            let a = read_hermitian(&a)?;
            let e = read_hermitian(&e)?;
            match order {
                Order::First => {
                    let ap = blockwise_diagonalize(&align(&a, &e.scale(t))?)?;
                    push_values(&mut out, &first_order_eigenvalues(&ap)?);
                }
                Order::Schur | Order::SchurSimple => {
                    let variant = if matches!(order, Order::Schur) {
                        SchurVariant::Full
                    } else {
                        SchurVariant::Simplified
                    };
                    push_values(&mut out, &refined_eigenvalues(&align(&a, &e.scale(t))?, variant)?);
                }
                Order::Second => {
                    let ap = blockwise_diagonalize(&align(&a, &e)?)?;
                    let m = m_matrix(&ap.base, &ap.blocks);
                    let pred = LineExpansion::new(&ap, &m)?.predict(&ap, t)?;
                    push_values(&mut out, &pred.xi_hat);
                    out.push_str(&format_matrix(&pred.u_hat));
                }
            }
        }
        Command::Derivative { a, f } => {
            let ap = blockwise_diagonalize(&align(&read_hermitian(&a)?, &read_hermitian(&f)?)?)?;
            let m = m_matrix(&ap.base, &ap.blocks);
            let exp = LineExpansion::new(&ap, &m)?;
            out.push_str(&format_matrix(&exp.n_mat));
            out.push_str(&format_matrix(&m.hadamard(ap.e_hat.as_dense())));
            out.push_str(&format_matrix(&exp.u_prime));
        }
        Command::Converge {
            predictor,
            seed,
            n,
            blocks,
            trials,
            tgrid,
        } => {
            let cfg = EnsembleConfig {
                seed,
                n,
                block_spec: blocks,
                t_grid: tgrid.unwrap_or_else(default_t_grid),
                trials,
                predictor: predictor.parse::<Predictor>()?,
            };
            out.push_str(&convergence_study(&cfg)?.to_csv());
        }
        Command::PaperExample => {
            let report = worked_example_regression()?;
            out.push_str(&report.to_string());
            if !report.all_passed() {
                print!("{out}");
                return Err(Failure::Assertion(format!("failing clauses: {:?}", report.failing())));
            }
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
