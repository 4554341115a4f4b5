//! Command-line front end for `kamtorus`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 malformed configuration,
//! 3 resonant or out-of-class frequency, 4 resource bound exceeded,
//! 5 iteration did not converge.

mod input;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use kamtorus::arithmetic::{
    bruno_partial_sums, class_membership, frequency_map, measure_estimate, sigma_profile, ArithmeticClassSpec,
    FrequencyVector, IndexConvention, LatticeNorm, ParameterPoint, SigmaOptions, DEFAULT_ENUMERATION_BUDGET,
};
use kamtorus::diagnostics::{
    estimate_locality, tamedness_verdict, Composed, FormDifferential, FunctionDifferential, Identity,
    PartialDerivative, QuasiInverse, SampleSpec, ScaleMorphism, ScaleNormFamily,
};
use kamtorus::engine::{run, verify_conjugacy, RunConfig, Verdict};
use kamtorus::homological::{solve, DEFAULT_DIVISOR_FLOOR};
use kamtorus::report::{csv_table, envelope_json, format_f64, report_csv, report_json};
use kamtorus::symplectic::SymplecticParameters;
use kamtorus::torus::RelativeOneForm;
use kamtorus::KamError;

#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn io(message: String) -> Self {
        Failure { code: 1, message }
    }
    pub fn config(message: String) -> Self {
        Failure { code: 2, message }
    }
    fn with_code(code: u8, message: String) -> Self {
        Failure { code, message }
    }
}

impl From<KamError> for Failure {
    fn from(e: KamError) -> Self {
        let code = match e {
            KamError::Resonance { .. } => 3,
            KamError::ResourceExceeded { .. } => 4,
            KamError::LieSeriesDivergence { .. } | KamError::LieSeriesNonConvergence { .. } => 5,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(name = "kamtorus", version, about = "Small divisors and KAM iteration for closed one-forms on tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Small divisors σ_0..σ_kmax as CSV (k, sigma_k, witness).
    Sigma(SigmaArgs),
    /// Partial Bruno sums with the finite-horizon verdict.
    Bruno(BrunoArgs),
    /// Membership of a frequency vector in an arithmetic class.
    Classify(ClassifyArgs),
    /// Monte-Carlo fraction of a box inside an arithmetic class.
    Measure(MeasureArgs),
    /// One truncated homological solve.
    Solve(SolveArgs),
    /// Full KAM iteration from a run configuration.
    Kam(KamArgs),
    /// Locality and tamedness diagnostics.
    #[command(subcommand)]
    Diagnose(DiagnoseCommand),
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    L1,
    Linf,
}

impl From<NormArg> for LatticeNorm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::L1 => LatticeNorm::L1,
            NormArg::Linf => LatticeNorm::LInf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    PerLevel,
    Literal,
}

impl From<ConventionArg> for IndexConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::PerLevel => IndexConvention::PerLevel,
            ConventionArg::Literal => IndexConvention::Literal,
        }
    }
}

#[derive(Args)]
struct SigmaArgs {
    /// Comma-separated frequency vector.
    #[arg(long, allow_hyphen_values = true)]
    omega: String,
    #[arg(long)]
    kmax: u32,
    #[arg(long, value_enum, default_value = "l1")]
    norm: NormArg,
    /// Maximum number of lattice points to enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    budget: u128,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BrunoArgs {
    /// geometric:c,r | superexp:c,b | explicit:a0,a1,... | file:path
    #[arg(long)]
    sequence: String,
    #[arg(long)]
    kmax: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ClassArgs {
    /// geometric:c,r | superexp:c,b | explicit:a0,a1,... | file:path
    #[arg(long)]
    bruno: String,
    #[arg(long)]
    level: u32,
    #[arg(long, value_enum, default_value = "per-level")]
    convention: ConventionArg,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    budget: u128,
}

impl ClassArgs {
    fn spec(&self) -> Result<(ArithmeticClassSpec, SigmaOptions), Failure> {
        let spec = ArithmeticClassSpec::new(input::bruno("bruno", &self.bruno)?, self.level, self.convention.into());
        let opts = SigmaOptions {
            budget: self.budget,
            ..SigmaOptions::default()
        };
        Ok((spec, opts))
    }
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    omega: String,
    #[command(flatten)]
    class: ClassArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct MeasureArgs {
    /// Box sides lo:hi, comma-separated.
    #[arg(long = "box", allow_hyphen_values = true)]
    frequency_box: String,
    #[arg(long)]
    samples: u64,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    class: ClassArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct KamArgs {
    #[arg(long)]
    config: PathBuf,
    /// Per-step CSV table.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Replay the run and fail unless the conjugacy defect is below this.
    #[arg(long)]
    verify: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand)]
enum DiagnoseCommand {
    /// Empirical locality constant of a built-in operator.
    Locality(LocalityArgs),
    /// Tamedness sums Σ ln(norm_n)/2^n.
    Tamedness(TamednessArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OperatorArg {
    Identity,
    Partial,
    D,
    Dd,
    H,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Majorant,
    L2,
}

#[derive(Args)]
struct LocalityArgs {
    #[arg(long, value_enum)]
    operator: OperatorArg,
    /// Locality order k.
    #[arg(long)]
    order: u32,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 6)]
    degree: u32,
    #[arg(long, default_value_t = 5)]
    terms: usize,
    #[arg(long, default_value_t = 100)]
    polynomials: u64,
    #[arg(long)]
    seed: u64,
    /// Also probe every monomial up to the degree.
    #[arg(long)]
    monomials: bool,
    #[arg(long, default_value_t = 3)]
    decades: u32,
    #[arg(long, value_enum, default_value = "majorant")]
    norm: FamilyArg,
    /// 1-based coordinate for `partial`.
    #[arg(long, default_value_t = 1)]
    coordinate: usize,
    /// Frequency for `h`.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    /// Truncation level for `h`.
    #[arg(long, default_value_t = 0)]
    level: u32,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TamednessArgs {
    /// Use norms 1/σ_n(ω), n = 0..=kmax.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "norms", requires = "kmax")]
    omega: Option<String>,
    #[arg(long)]
    kmax: Option<u32>,
    /// Explicit comma-separated norms.
    #[arg(long, required_unless_present = "omega")]
    norms: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveConfig {
    delta: Vec<f64>,
    tau: Vec<f64>,
    rhs: RelativeOneForm,
    level: u32,
    #[serde(default = "default_closed_tol")]
    closed_tol: f64,
    #[serde(default = "default_divisor_floor")]
    divisor_floor: f64,
}

fn default_closed_tol() -> f64 {
    1e-10
}
fn default_divisor_floor() -> f64 {
    DEFAULT_DIVISOR_FLOOR
}

fn emit(output: &Output, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn cmd_sigma(a: &SigmaArgs) -> Result<(), Failure> {
    let omega = input::frequency("omega", &a.omega)?;
    let opts = SigmaOptions {
        norm: a.norm.into(),
        budget: a.budget,
    };
    let profile = sigma_profile(&omega, a.kmax, &opts)?;
    let table = csv_table(
        &["k", "sigma_k", "witness"],
        profile
            .iter()
            .map(|s| vec![s.k.to_string(), format_f64(s.value), s.witness.to_string()]),
    )?;
    emit(&a.output, &table)
}

fn cmd_bruno(a: &BrunoArgs) -> Result<(), Failure> {
    let seq = input::bruno("sequence", &a.sequence)?;
    let summary = bruno_partial_sums(&seq, a.kmax)?;
    emit(&a.output, &envelope_json("bruno", &summary)?)
}

fn cmd_classify(a: &ClassifyArgs) -> Result<(), Failure> {
    let omega = input::frequency("omega", &a.omega)?;
    let (spec, opts) = a.class.spec()?;
    let membership = class_membership(&omega, &spec, &opts)?;
    emit(&a.output, &envelope_json("classify", &membership)?)?;
    match membership.failure {
        None => Ok(()),
        Some(f) => Err(Failure::with_code(
            3,
            format!("σ_{} = {:e} <= a_{} = {:e} (witness {})", f.j, f.sigma, f.j, f.bound, f.witness),
        )),
    }
}

#[derive(Serialize)]
struct MeasureResult {
    fraction: f64,
    samples: u64,
    seed: u64,
    level: u32,
}

fn cmd_measure(a: &MeasureArgs) -> Result<(), Failure> {
    let frequency_box = input::frequency_box("box", &a.frequency_box)?;
    let (spec, opts) = a.class.spec()?;
    let fraction = measure_estimate(&spec, &frequency_box, a.samples, a.seed, &opts)?;
    let result = MeasureResult {
        fraction,
        samples: a.samples,
        seed: a.seed,
        level: spec.level,
    };
    emit(&a.output, &envelope_json("measure", &result)?)
}

#[derive(Serialize)]
struct SolveResult {
    frequency: FrequencyVector,
    solution: kamtorus::homological::HomologicalSolution,
}

fn cmd_solve(a: &SolveArgs) -> Result<(), Failure> {
    let cfg: SolveConfig = input::read_json(&a.config)?;
    let point = ParameterPoint::new(cfg.delta.clone(), cfg.tau.clone())?;
    let phi = frequency_map(&point);
    let delta = SymplecticParameters::new(cfg.delta)?;
    let solution = solve(&cfg.rhs, cfg.level, &phi, &delta, cfg.closed_tol, cfg.divisor_floor)?;
    emit(
        &a.output,
        &envelope_json(
            "solve",
            &SolveResult {
                frequency: phi,
                solution,
            },
        )?,
    )
}

fn cmd_kam(a: &KamArgs) -> Result<(), Failure> {
    let cfg: RunConfig = input::read_json(&a.config)?;
    let report = run(&cfg)?;
    emit(&a.output, &report_json(&report)?)?;
    if let Some(path) = &a.csv {
        write_file(path, &report_csv(&report)?)?;
    }
    match report.verdict {
        Verdict::Converged => {}
        Verdict::Resonant => {
            return Err(Failure::with_code(3, report.message.unwrap_or_else(|| "resonant frequency".into())))
        }
        Verdict::MaxIterations | Verdict::Diverged => {
            return Err(Failure::with_code(
                5,
                format!("verdict {:?}, final defect {:e}", report.verdict, report.final_defect),
            ))
        }
    }
    if let Some(tol) = a.verify {
        let check = verify_conjugacy(&report, &cfg, tol)?;
        if !check.pass {
            return Err(Failure::with_code(5, format!("conjugacy defect {:e} exceeds {tol:e}", check.defect)));
        }
    }
    Ok(())
}

fn cmd_locality(a: &LocalityArgs) -> Result<(), Failure> {
    let spec = SampleSpec {
        dim: a.dim,
        degree: a.degree,
        terms: a.terms,
        polynomials: a.polynomials,
        monomial_probes: a.monomials,
        decades: a.decades,
        norm: match a.norm {
            FamilyArg::Majorant => ScaleNormFamily::Majorant,
            FamilyArg::L2 => ScaleNormFamily::L2,
        },
    };
    let op: Box<dyn ScaleMorphism> = match a.operator {
        OperatorArg::Identity => Box::new(Identity { components: 1 }),
        OperatorArg::Partial => {
            if a.coordinate == 0 || a.coordinate > a.dim {
                return Err(Failure::config(format!("coordinate: {} not in 1..={}", a.coordinate, a.dim)));
            }
            Box::new(PartialDerivative {
                coordinate: a.coordinate - 1,
            })
        }
        OperatorArg::D => Box::new(FunctionDifferential),
        OperatorArg::Dd => Box::new(Composed {
            first: FunctionDifferential,
            second: FormDifferential,
        }),
        OperatorArg::H => {
            let omega = a
                .omega
                .as_deref()
                .ok_or_else(|| Failure::config("omega: required for operator h".into()))?;
            Box::new(QuasiInverse {
                k: a.level,
                phi: input::frequency("omega", omega)?,
                divisor_floor: DEFAULT_DIVISOR_FLOOR,
            })
        }
    };
    let estimate = estimate_locality(op.as_ref(), a.order, &spec, a.seed)?;
    emit(&a.output, &envelope_json("diagnose-locality", &estimate)?)
}

fn cmd_tamedness(a: &TamednessArgs) -> Result<(), Failure> {
    let norms = match (&a.omega, &a.norms) {
        (Some(omega), _) => {
            let omega = input::frequency("omega", omega)?;
            let kmax = a.kmax.expect("clap enforces kmax with omega");
            sigma_profile(&omega, kmax, &SigmaOptions::default())?
                .iter()
                .map(|s| 1.0 / s.value)
                .collect()
        }
        (None, Some(norms)) => input::reals("norms", norms)?,
        (None, None) => unreachable!("clap requires one of omega or norms"),
    };
    let summary = tamedness_verdict(&norms)?;
    emit(&a.output, &envelope_json("diagnose-tamedness", &summary)?)
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Sigma(a) => cmd_sigma(a),
        Command::Bruno(a) => cmd_bruno(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Measure(a) => cmd_measure(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Kam(a) => cmd_kam(a),
        Command::Diagnose(DiagnoseCommand::Locality(a)) => cmd_locality(a),
        Command::Diagnose(DiagnoseCommand::Tamedness(a)) => cmd_tamedness(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
