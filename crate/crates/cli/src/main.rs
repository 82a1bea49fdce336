//! Command-line driver for the library: `eval` prints single values as
//! JSON, `verify` runs identity suites as pass/fail CSV, `study` tabulates
//! brute-force moments against their main terms.
//!
//! Output is byte-for-byte reproducible for a fixed invocation; wall-clock
//! columns only appear under `--timings`.

mod config;
mod eval;
mod render;
mod study;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use estermann_core::characters::CfTarget;
use estermann_core::moments::{StudyKind, Theorem1Variant};
use num_complex::Complex64;

use config::{OutputFormat, RunConfig, Settings};
use render::{emit_doc, open_sink, parse_complex_arg};
use study::Lane;

#[derive(Parser)]
#[command(
    name = "estermann",
    version,
    about = "Estermann function, twisted L-value moments, continued-fraction statistics"
)]
struct Cli {
    /// JSON configuration file; explicit flags take precedence over it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Study report format. Verification suites are always CSV and eval
    /// documents are always JSON.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    /// Cap the worker thread pool.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Append wall-clock columns; off by default so repeated runs are
    /// byte-identical.
    #[arg(long, global = true)]
    timings: bool,

    /// Seed for randomized verification points.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one quantity and print a JSON document.
    Eval {
        #[command(subcommand)]
        what: EvalWhat,
    },
    /// Run an identity suite; every case must land under its bound.
    Verify {
        #[command(subcommand)]
        what: VerifyWhat,
    },
    /// Tabulate brute-force moments against main terms over primes.
    Study {
        #[command(subcommand)]
        what: StudyWhat,
    },
}

#[derive(Args)]
struct EstermannArgs {
    /// Evaluation point, a complex literal such as 0.5+2i.
    #[arg(long, value_parser = parse_complex_arg, default_value = "0.5", allow_hyphen_values = true)]
    s: Complex64,
    /// Numerator of the rational twist a/q.
    #[arg(long)]
    a: u64,
    /// Denominator of the rational twist a/q.
    #[arg(long)]
    q: u64,
    /// First divisor shift.
    #[arg(long, value_parser = parse_complex_arg, default_value = "0", allow_hyphen_values = true)]
    alpha: Complex64,
    /// Second divisor shift.
    #[arg(long, value_parser = parse_complex_arg, default_value = "0", allow_hyphen_values = true)]
    beta: Complex64,
}

#[derive(Subcommand)]
enum EvalWhat {
    /// Estermann function D_{alpha,beta}(s, a/q) with its parity parts.
    Estermann(EstermannArgs),
    /// Central Dirichlet L-values for the characters mod a prime q.
    Lvalue {
        #[arg(long)]
        q: u64,
        /// Evaluation point, default 1/2.
        #[arg(long, value_parser = parse_complex_arg, default_value = "0.5", allow_hyphen_values = true)]
        s: Complex64,
        /// Single character index; omit for the full table.
        #[arg(long)]
        index: Option<usize>,
    },
    /// Dedekind sum s(a, q) as an exact rational.
    Dedekind {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long)]
        q: u64,
    },
    /// Continued-fraction expansion of a/q, trailing-one convention.
    Cf {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        q: u64,
    },
    /// Kloosterman sum S(m, n; l) with its square-root cancellation bound.
    Kloosterman {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        l: u64,
    },
}

#[derive(Subcommand)]
enum VerifyWhat {
    /// Completed functional equations for both parity components.
    FunctionalEquations {
        /// Moduli to sweep, default 7,11.
        #[arg(long = "q", value_delimiter = ',')]
        qs: Vec<u64>,
    },
    /// Identity tying the twisted moment M(a,q) to central values.
    Axe {
        /// Moduli to sweep, default 11,101.
        #[arg(long = "q", value_delimiter = ',')]
        qs: Vec<u64>,
    },
    /// Dedekind and cotangent special values, exact reciprocity.
    SpecialValues {
        /// Check all primes up to this bound.
        #[arg(long, default_value_t = 50)]
        qmax: u64,
    },
    /// Kloosterman sums against the Weil bound, Ramanujan sums across
    /// coprime moduli.
    Weil {
        #[arg(long, default_value_t = 50)]
        lmax: u64,
        /// Random (m, n) pairs per modulus.
        #[arg(long, default_value_t = 10)]
        trials: u32,
    },
    /// Truncated shifted divisor-sum identity against its tail majorant.
    Hga {
        #[arg(long, default_value_t = 10_000)]
        cutoff: u64,
    },
    /// Truncated quadruple divisor-sum identity against its tail majorant.
    Aq4 {
        #[arg(long, default_value_t = 50_000)]
        cutoff: u64,
    },
    /// Gamma-factor sign-sum recombination at random points.
    Gfar {
        #[arg(long, default_value_t = 25)]
        trials: u32,
    },
    /// Two-contour sign-pattern Mellin identity.
    Sml,
    /// Smoothed approximate functional equation for L-value products.
    Afe {
        /// Moduli to sweep, default 11.
        #[arg(long = "q", value_delimiter = ',')]
        qs: Vec<u64>,
        /// Series truncation length.
        #[arg(long, default_value_t = 20)]
        cutoff: usize,
    },
    /// Beta-function recurrences and the basic plus/minus transforms.
    Beta,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantChoice {
    Stated,
    Derived,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormChoice {
    Compact,
    Refined,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignChoice {
    #[value(name = "+")]
    Plus,
    #[value(name = "-")]
    Minus,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetChoice {
    M,
    Cos,
    Sin,
}

#[derive(Subcommand)]
enum StudyWhat {
    /// Twisted power moment against its logarithmic series main term.
    Theorem1 {
        #[arg(long, default_value_t = 3)]
        k: u32,
        #[arg(long, value_enum, default_value_t = VariantChoice::Both)]
        variant: VariantChoice,
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<u64>>,
    },
    /// Power mean of the full central value against its main term.
    Caee {
        #[arg(long, default_value_t = 3)]
        k: u32,
        #[arg(long, value_enum, default_value_t = FormChoice::Both)]
        form: FormChoice,
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<u64>>,
    },
    /// Continued-fraction quotient moments against 2 zeta(kr/2)^2/zeta(kr)
    /// q^{kr/2}.
    Tinc {
        #[arg(long, default_value_t = 3)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long, value_enum, default_value_t = SignChoice::Both)]
        sign: SignChoice,
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<u64>>,
    },
    /// Fourth moment of L-values against (2 pi^2)^{-1} (log q)^4.
    FourthMoment {
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<u64>>,
    },
    /// Worst continued-fraction approximation residual over residues.
    Prr {
        #[arg(long, value_enum, default_value_t = TargetChoice::M)]
        target: TargetChoice,
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<u64>>,
    },
}

impl StudyWhat {
    fn primes_flag(&self) -> Option<Vec<u64>> {
        match self {
            StudyWhat::Theorem1 { primes, .. }
            | StudyWhat::Caee { primes, .. }
            | StudyWhat::Tinc { primes, .. }
            | StudyWhat::FourthMoment { primes }
            | StudyWhat::Prr { primes, .. } => primes.clone(),
        }
    }
}

fn or_default(qs: Vec<u64>, default: &[u64]) -> Vec<u64> {
    if qs.is_empty() {
        default.to_vec()
    } else {
        qs
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("{message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    let file_cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };

    if let Some(n) = cli.threads.or(file_cfg.threads) {
        if n > 0 {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("thread pool already initialized: {e}");
            }
        }
    }

    let primes_flag = match &cli.command {
        Command::Study { what } => what.primes_flag(),
        _ => None,
    };
    let settings =
        Settings::merge(&file_cfg, cli.format, cli.timings, cli.seed, primes_flag);

    let mut out = open_sink(cli.output.as_deref())
        .map_err(|e| format!("cannot open output: {e}"))?;
    let io_msg = |e: std::io::Error| format!("cannot write output: {e}");

    match cli.command {
        Command::Eval { what } => {
            let doc = match what {
                EvalWhat::Estermann(args) => {
                    eval::estermann(args.s, args.a, args.q, args.alpha, args.beta)?
                }
                EvalWhat::Lvalue { q, s, index } => eval::lvalue(q, s, index)?,
                EvalWhat::Dedekind { a, q } => eval::dedekind(a, q)?,
                EvalWhat::Cf { a, q } => eval::cf(a, q)?,
                EvalWhat::Kloosterman { m, n, l } => eval::kloosterman(m, n, l)?,
            };
            emit_doc(&mut out, &settings.config_hash, doc).map_err(io_msg)?;
            out.flush().map_err(io_msg)?;
            Ok(0)
        }
        Command::Verify { what } => {
            let (name, cases) = match what {
                VerifyWhat::FunctionalEquations { qs } => (
                    "functional-equations",
                    verify::functional_equations(&or_default(qs, &[7, 11])),
                ),
                VerifyWhat::Axe { qs } => ("axe", verify::axe(&or_default(qs, &[11, 101]))),
                VerifyWhat::SpecialValues { qmax } => {
                    ("special-values", verify::special_values(qmax))
                }
                VerifyWhat::Weil { lmax, trials } => {
                    ("weil", verify::weil(lmax, trials, settings.seed))
                }
                VerifyWhat::Hga { cutoff } => ("hga", verify::hga(cutoff)),
                VerifyWhat::Aq4 { cutoff } => ("aq4", verify::aq4(cutoff)),
                VerifyWhat::Gfar { trials } => ("gfar", verify::gfar(trials, settings.seed)),
                VerifyWhat::Sml => ("sml", verify::sml()),
                VerifyWhat::Afe { qs, cutoff } => {
                    ("afe", verify::afe(&or_default(qs, &[11]), cutoff))
                }
                VerifyWhat::Beta => ("beta", verify::beta()),
            };
            let code = verify::emit(&mut out, name, &cases).map_err(io_msg)?;
            Ok(code as u8)
        }
        Command::Study { what } => {
            let (name, lanes, default_primes): (&str, Vec<Lane>, &[u64]) = match what {
                StudyWhat::Theorem1 { k, variant, .. } => {
                    let lane = |form, v| {
                        Lane::form(form, StudyKind::Theorem1 { k, variant: v })
                    };
                    let lanes = match variant {
                        VariantChoice::Stated => vec![lane("stated", Theorem1Variant::AsStated)],
                        VariantChoice::Derived => {
                            vec![lane("derived", Theorem1Variant::AsDerived)]
                        }
                        VariantChoice::Both => vec![
                            lane("stated", Theorem1Variant::AsStated),
                            lane("derived", Theorem1Variant::AsDerived),
                        ],
                    };
                    ("theorem1", lanes, &[1009, 10007][..])
                }
                StudyWhat::Caee { k, form, .. } => {
                    let lane = |label, refined| {
                        Lane::form(label, StudyKind::Caee { k, refined })
                    };
                    let lanes = match form {
                        FormChoice::Compact => vec![lane("compact", false)],
                        FormChoice::Refined => vec![lane("refined", true)],
                        FormChoice::Both => {
                            vec![lane("compact", false), lane("refined", true)]
                        }
                    };
                    ("caee", lanes, &[1009, 10007][..])
                }
                StudyWhat::Tinc { k, r, sign, .. } => {
                    let lane = |label, s| Lane::sign(label, StudyKind::Tinc { k, r, sign: s });
                    let lanes = match sign {
                        SignChoice::Plus => vec![lane("+", 1)],
                        SignChoice::Minus => vec![lane("-", -1)],
                        SignChoice::Both => vec![lane("+", 1), lane("-", -1)],
                    };
                    ("tinc", lanes, &[1009, 10007][..])
                }
                StudyWhat::FourthMoment { .. } => (
                    "fourth-moment",
                    vec![Lane::plain(StudyKind::FourthMoment)],
                    &[1009, 10007][..],
                ),
                StudyWhat::Prr { target, .. } => {
                    let (label, target) = match target {
                        TargetChoice::M => ("m", CfTarget::M),
                        TargetChoice::Cos => ("cos", CfTarget::Cos),
                        TargetChoice::Sin => ("sin", CfTarget::Sin),
                    };
                    (
                        "prr",
                        vec![Lane::form(label, StudyKind::CfApprox { target })],
                        &[101, 1009][..],
                    )
                }
            };
            let primes = settings.primes_or(default_primes);
            let code = study::run(
                &mut out,
                name,
                &primes,
                &lanes,
                settings.format,
                settings.timings,
                &settings.config_hash,
            )
            .map_err(io_msg)?;
            Ok(code as u8)
        }
    }
}
