//! Command-line front end.
//!
//! Every subcommand shares the parameter flags. Results go to standard output
//! (or `--output`), diagnostics to standard error, and the exit status
//! follows [`Error::exit_code`]; a verification report with failed checks
//! exits with 6.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::expansions::{
    compute_coefficients, make_family, verify_against_printed, DcheParams, FamilyId, FamilyInstance, FamilyOptions,
    RowSource, SeriesSolution, StencilSource, Target,
};
use crate::oracle::{compare_series_vs_integration, relative_dche_residual, series_u};
use crate::recurrence::{BasisKind, Derivation};
use crate::report::{
    render, BasisRecord, Check, CoeffRow, CoeffTable, DeriveDump, DeriveRow, EvalRow, EvalTable, Format, ParamsRecord,
    StencilEntry, TerminateOutput, VerifyOutcome,
};
use crate::scalar::{parse_rational, Complex, Rational, Scalar, ScalarRepr};
use crate::termination::{install_condition, q_spectrum, termination_report};

const COLUMNS: &str = "\
CSV / table columns:
  coeffs          n, a_n, then one column per row letter of the family (R_n, Q_n, P_n, ...)
  eval            z, u, du, d2u, residual, terms_used, tail
  terminate       q, exact, multiplicity, polynomial_residual, certified, tail, max_residual, explicit
                  (seven-term: index, coefficient, relative, condition, holds)
  derive          n, offset, letter, value
  verify          check, passed, detail
  oracle-compare  z, series, integrated, deviation, error_estimate
Complex values are written re+imi in CSV and tables, {re, im} objects in JSON.

Exit status: 0 success, 2 constraint violation, 3 resonance, 4 convergence,
5 domain, 6 verification failure.";

#[derive(Debug, Parser)]
#[command(
    name = "dche",
    version,
    about = "Kummer-function series for the double-confluent Heun equation"
)]
#[command(after_long_help = COLUMNS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficient table a_0..a_M with the row letters used
    Coeffs(Options),
    /// Series value, derivatives and equation residual over z points
    Eval(Options),
    /// Accessory-parameter spectrum for termination at order N
    Terminate(Options),
    /// Recurrence stencil from the derivation engine, per n
    Derive(Options),
    /// Consistency checks for one parameter draw
    Verify(Options),
    /// Series values against direct numerical integration
    OracleCompare(Options),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Float,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Printed,
    Engine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    BothShift,
    AShift,
    BShift,
}

#[derive(Debug, Clone, Args)]
#[command(after_long_help = COLUMNS)]
pub struct Options {
    /// two-term, three-term-a, three-term-deg, five-term, three-term-c, seven-term-v
    #[arg(long, default_value = "three-term-a")]
    pub family: String,
    /// α as `re`, `re,im` or `p/q`; `terminate` installs the termination value when omitted
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub gamma: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub delta: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub epsilon: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub q: String,
    /// Lower Kummer parameter, for families that leave it free
    #[arg(long, allow_hyphen_values = true)]
    pub gamma0: Option<String>,
    /// Upper Kummer parameter, for families that leave it free
    #[arg(long, allow_hyphen_values = true)]
    pub alpha0: Option<String>,
    /// Argument scale s₀ of the basis (derive only)
    #[arg(long, allow_hyphen_values = true)]
    pub s0: Option<String>,
    /// Basis shift pattern (derive only; defaults to the family's)
    #[arg(long, value_enum)]
    pub basis: Option<BasisArg>,
    /// Second root 1 − √((1−γ)²+4q) for the degenerate family
    #[arg(long)]
    pub other_branch: bool,
    /// Highest coefficient index M
    #[arg(long, default_value_t = 60)]
    pub terms: usize,
    /// Termination order N
    #[arg(long, default_value_t = 0)]
    pub order: usize,
    /// Evaluation point `re` or `re,im`
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    /// Real grid `start:stop:count`
    #[arg(long, allow_hyphen_values = true)]
    pub z_grid: Option<String>,
    /// Integration anchor (oracle-compare)
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub z_anchor: String,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Mode::Float)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    #[arg(long, value_enum)]
    pub source: Option<SourceArg>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Scales a_k by 1.001 (or sets it to 1e-3 when zero) before checking
    #[arg(long, hide = true)]
    pub corrupt_coefficient: Option<usize>,
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code,
                }
            } else {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code,
                }
            };
        }
    };
    let opts = match &cli.command {
        Command::Coeffs(o)
        | Command::Eval(o)
        | Command::Terminate(o)
        | Command::Derive(o)
        | Command::Verify(o)
        | Command::OracleCompare(o) => o.clone(),
    };
    let result = match opts.mode {
        Mode::Exact => dispatch::<Rational>(&cli.command, &opts),
        Mode::Float => dispatch::<Complex>(&cli.command, &opts),
    };
    let (text, code, note) = match result {
        Ok((text, code, note)) => (text, code, note),
        Err(e) => {
            return Outcome {
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
                code: e.exit_code(),
            }
        }
    };
    let mut stderr = note.map(|n| format!("{n}\n")).unwrap_or_default();
    let stdout = match &opts.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                return Outcome {
                    stdout: String::new(),
                    stderr: format!("error: cannot write {}: {e}\n", path.display()),
                    code: 2,
                };
            }
            String::new()
        }
        None => text,
    };
    if code != 0 && stderr.is_empty() {
        stderr = "error: checks failed\n".into();
    }
    Outcome { stdout, stderr, code }
}

type Dispatched = (String, i32, Option<String>);

fn format_of(opts: &Options) -> Format {
    match opts.format {
        OutputFormat::Json => Format::Json,
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Table => Format::Table,
    }
}

fn mode_name(mode: Mode) -> String {
    match mode {
        Mode::Float => "float".into(),
        Mode::Exact => "exact".into(),
    }
}

fn dispatch<S: Scalar>(command: &Command, opts: &Options) -> Result<Dispatched> {
    match command {
        Command::Coeffs(_) => cmd_coeffs::<S>(opts),
        Command::Eval(_) => cmd_eval::<S>(opts),
        Command::Terminate(_) => cmd_terminate::<S>(opts),
        Command::Derive(_) => cmd_derive::<S>(opts),
        Command::Verify(_) => cmd_verify::<S>(opts),
        Command::OracleCompare(_) => cmd_oracle_compare::<S>(opts),
    }
}

/// Parses `re`, `re,im` or `p/q` into the working scalar.
pub fn parse_scalar<S: Scalar>(name: &str, text: &str) -> Result<S> {
    let bad = || Error::InvalidInput(format!("--{name}: cannot parse '{text}'"));
    if S::EXACT {
        let (re, im) = match text.split_once(',') {
            Some((re, im)) => (re, Some(im)),
            None => (text, None),
        };
        if let Some(im) = im {
            if parse_rational(im).is_none_or(|v| !num_traits::Zero::is_zero(&v)) {
                return Err(Error::InvalidInput(format!(
                    "--{name}: exact mode needs rational inputs, got '{text}'"
                )));
            }
        }
        let r = parse_rational(re).ok_or_else(bad)?;
        return S::from_repr(&ScalarRepr::Exact(r.to_string())).ok_or_else(bad);
    }
    let part = |s: &str| -> Result<f64> {
        let s = s.trim();
        let v = match s.parse::<f64>() {
            Ok(v) => v,
            Err(_) => parse_rational(s).map(|r| r.to_complex().re).ok_or_else(bad)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad())
        }
    };
    let c = match text.split_once(',') {
        Some((re, im)) => Complex::new(part(re)?, part(im)?),
        None => Complex::new(part(text)?, 0.0),
    };
    S::from_complex(c).ok_or_else(bad)
}

fn parse_complex(name: &str, text: &str) -> Result<Complex> {
    parse_scalar::<Complex>(name, text)
}

fn params<S: Scalar>(opts: &Options) -> Result<DcheParams<S>> {
    Ok(DcheParams::new(
        parse_scalar("alpha", opts.alpha.as_deref().unwrap_or("0"))?,
        parse_scalar("gamma", &opts.gamma)?,
        parse_scalar("delta", &opts.delta)?,
        parse_scalar("epsilon", &opts.epsilon)?,
        parse_scalar("q", &opts.q)?,
    ))
}

fn family_options<S: Scalar>(opts: &Options) -> Result<FamilyOptions<S>> {
    Ok(FamilyOptions {
        alpha0: opts.alpha0.as_deref().map(|t| parse_scalar("alpha0", t)).transpose()?,
        gamma0: opts.gamma0.as_deref().map(|t| parse_scalar("gamma0", t)).transpose()?,
        other_branch: opts.other_branch,
    })
}

fn instance<S: Scalar>(opts: &Options, params: &DcheParams<S>) -> Result<FamilyInstance<S>> {
    let family: FamilyId = opts.family.parse()?;
    let inst = make_family(params, family, &family_options(opts)?)?;
    Ok(match opts.source {
        Some(SourceArg::Engine) => inst.with_source(StencilSource::EngineDerived),
        Some(SourceArg::Printed) => inst.with_source(StencilSource::PrintedClosedForm),
        None => inst,
    })
}

fn z_points(opts: &Options, default: &[f64]) -> Result<Vec<Complex>> {
    if let Some(z) = &opts.z {
        return Ok(vec![parse_complex("z", z)?]);
    }
    if let Some(grid) = &opts.z_grid {
        let bad = || Error::InvalidInput(format!("--z-grid: expected start:stop:count, got '{grid}'"));
        let parts: Vec<&str> = grid.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        if n == 1 {
            return Ok(vec![Complex::new(a, 0.0)]);
        }
        return Ok((0..n)
            .map(|k| Complex::new(a + (b - a) * k as f64 / (n - 1) as f64, 0.0))
            .collect());
    }
    Ok(default.iter().map(|&x| Complex::new(x, 0.0)).collect())
}

fn basis_record<S: Scalar>(inst: &FamilyInstance<S>) -> BasisRecord {
    BasisRecord {
        kind: inst.basis.kind,
        alpha0: inst.basis.alpha0.to_repr(),
        gamma0: inst.basis.gamma0.to_repr(),
        s0: inst.basis.s0.to_repr(),
    }
}

fn coeff_table<S: Scalar>(solution: &SeriesSolution<S>, mode: Mode) -> Result<CoeffTable> {
    let inst = &solution.instance;
    let rows_src = RowSource::new(inst)?;
    let mut rows = Vec::with_capacity(solution.coefficients.len());
    for (n, a) in solution.coefficients.iter().enumerate() {
        rows.push(CoeffRow {
            n,
            a: a.to_repr(),
            letters: rows_src.letters(n as i64)?.iter().map(|v| v.to_repr()).collect(),
        });
    }
    let names: Vec<String> = if rows_src.width() == inst.family.width() {
        inst.family.letter_names().iter().map(|s| s.to_string()).collect()
    } else {
        (0..rows_src.width()).map(|i| format!("L{i}")).collect()
    };
    Ok(CoeffTable {
        family: inst.family,
        mode: mode_name(mode),
        params: ParamsRecord::from_params(&inst.params),
        basis: basis_record(inst),
        source: inst.source,
        letter_names: names,
        rows,
        terminated_at: solution.terminated_at,
        flags: inst.flags.clone(),
    })
}

fn cmd_coeffs<S: Scalar>(opts: &Options) -> Result<Dispatched> {
    let p = params::<S>(opts)?;
    let inst = instance(opts, &p)?;
    let solution = compute_coefficients(&inst, opts.terms)?;
    let table = coeff_table(&solution, opts.mode)?;
    Ok((render(&table, format_of(opts))?, 0, None))
}

fn eval_rows<S: Scalar>(solution: &SeriesSolution<S>, zs: &[Complex], tol: f64) -> Result<Vec<EvalRow>> {
    let cp = solution.instance.params.to_complex();
    let mut rows = Vec::with_capacity(zs.len());
    for &z in zs {
        let u = series_u(solution, z, tol)?;
        let v = crate::expansions::evaluate_partial(solution, z, tol, 0)?;
        rows.push(EvalRow {
            z,
            u: u[0],
            du: u[1],
            d2u: u[2],
            residual: relative_dche_residual(&cp, u, z)?,
            terms_used: v.terms_used,
            tail: v.tail,
        });
    }
    Ok(rows)
}

fn cmd_eval<S: Scalar>(opts: &Options) -> Result<Dispatched> {
    let p = params::<S>(opts)?;
    let inst = instance(opts, &p)?;
    let zs = z_points(opts, &[1.0])?;
    let solution = compute_coefficients(&inst, opts.terms)?;
    let rows = eval_rows(&solution, &zs, opts.tol.unwrap_or(1e-14))?;
    let table = EvalTable {
        family: inst.family,
        params: ParamsRecord::from_params(&p),
        terms: opts.terms,
        rows,
    };
    let note = crate::expansions::VEquation::new(&p)
        .coincidence_note()
        .filter(|_| inst.target == Target::VEquation)
        .map(|n| format!("note: {n}"));
    Ok((render(&table, format_of(opts))?, 0, note))
}

fn cmd_terminate<S: Scalar>(opts: &Options) -> Result<Dispatched> {
    let family: FamilyId = opts.family.parse()?;
    let fopts = family_options::<S>(opts)?;
    let mut p = params::<S>(opts)?;
    if opts.alpha.is_none() && family != FamilyId::SevenTermV {
        p = install_condition(&p, family, &fopts, opts.order)?;
    }
    let tol = opts.tol.unwrap_or(1e-12);
    let out = match family {
        FamilyId::SevenTermV => {
            let inst = make_family(&p, family, &fopts)?;
            TerminateOutput::Report(termination_report(&inst, opts.order)?)
        }
        _ => TerminateOutput::Spectrum(q_spectrum(&p, family, &fopts, opts.order, tol)?),
    };
    let (code, note) = match &out {
        TerminateOutput::Spectrum(s) if !s.converged => (
            Error::RootFindingStalled {
                iterations: s.iterations,
            }
            .exit_code(),
            Some(format!("error: root finding stalled after {} iterations", s.iterations)),
        ),
        _ => (0, None),
    };
    Ok((render(&out, format_of(opts))?, code, note))
}

fn cmd_derive<S: Scalar>(opts: &Options) -> Result<Dispatched> {
    let family: FamilyId = opts.family.parse()?;
    let p = params::<S>(opts)?;
    let defaults = FamilyOptions {
        other_branch: opts.other_branch,
        ..FamilyOptions::default()
    };
    let inst = make_family(&p, family, &defaults)?;
    let mut basis = inst.basis.clone();
    if let Some(b) = opts.basis {
        basis.kind = match b {
            BasisArg::BothShift => BasisKind::BothShift,
            BasisArg::AShift => BasisKind::AShift,
            BasisArg::BShift => BasisKind::BShift,
        };
    }
    if let Some(t) = &opts.alpha0 {
        basis.alpha0 = parse_scalar("alpha0", t)?;
    }
    if let Some(t) = &opts.gamma0 {
        basis.gamma0 = parse_scalar("gamma0", t)?;
    }
    if let Some(t) = &opts.s0 {
        basis.s0 = parse_scalar("s0", t)?;
        if basis.s0.is_zero() {
            return Err(Error::InvalidInput("s₀ must be nonzero".into()));
        }
    }
    let ode = inst.ode()?;
    let derivation = Derivation::new(&ode, basis.clone())?;
    let names: Vec<String> = if derivation.width() == family.width() {
        family.letter_names().iter().map(|s| s.to_string()).collect()
    } else {
        (0..derivation.width()).map(|i| format!("L{i}")).collect()
    };
    let mut rows = Vec::new();
    for n in 0..=opts.terms as i64 {
        let letters = derivation.letters(n)?;
        rows.push(DeriveRow {
            n,
            entries: letters
                .iter()
                .enumerate()
                .map(|(i, v)| StencilEntry {
                    offset: derivation.jmin + i as i64,
                    letter: names[i].clone(),
                    value: v.to_repr(),
                })
                .collect(),
        });
    }
    let mut diagnostics = vec![format!(
        "equation multiplied by {} before elimination",
        derivation.elimination.multiplier
    )];
    diagnostics.extend(inst.flags.iter().cloned());
    let dump = DeriveDump {
        family,
        mode: mode_name(opts.mode),
        basis: BasisRecord {
            kind: basis.kind,
            alpha0: basis.alpha0.to_repr(),
            gamma0: basis.gamma0.to_repr(),
            s0: basis.s0.to_repr(),
        },
        multiplier: derivation.elimination.multiplier.clone(),
        window: (derivation.jmin, derivation.jmax),
        rows,
        diagnostics,
    };
    Ok((render(&dump, format_of(opts))?, 0, None))
}

fn corrupt<S: Scalar>(solution: &mut SeriesSolution<S>, k: usize) -> Result<()> {
    let Some(a) = solution.coefficients.get_mut(k) else {
        return Err(Error::InvalidInput(format!(
            "--corrupt-coefficient {k} is beyond --terms"
        )));
    };
    *a = if a.is_zero() {
        S::one() / S::from_i64(1000)
    } else {
        a.clone() * (S::from_i64(1001) / S::from_i64(1000))
    };
    if solution.terminated_at.is_some_and(|n| k > n) {
        solution.terminated_at = None;
    }
    Ok(())
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn cmd_verify<S: Scalar>(opts: &Options) -> Result<Dispatched> {
    let p = params::<S>(opts)?;
    let inst = instance(opts, &p)?;
    let mut checks = Vec::new();

    if inst.family != FamilyId::TwoTerm {
        let engine = inst.clone().with_source(StencilSource::EngineDerived);
        let report = verify_against_printed(&[engine], 0..=10);
        let detail = match report.mismatches.first() {
            None => format!("{} entries equal for n = 0..10", report.checked),
            Some(m) => format!(
                "{} mismatches; first at n = {}, {}: engine {} vs closed form {}",
                report.mismatches.len(),
                m.n,
                m.letter,
                m.engine,
                m.printed
            ),
        };
        checks.push(check("stencil-equality", report.passed(), detail));
    }

    let mut solution = compute_coefficients(&inst, opts.terms)?;
    if let Some(k) = opts.corrupt_coefficient {
        corrupt(&mut solution, k)?;
    }
    let defect = solution.max_row_defect()?;
    let defect_ok = if S::EXACT { defect == 0.0 } else { defect <= 1e-10 };
    checks.push(check(
        "row-defect",
        defect_ok,
        format!("max relative row defect {defect:e}"),
    ));

    let zs = z_points(opts, &[0.5, 0.875, 1.25, 1.625, 2.0])?;
    let tol = opts.tol.unwrap_or(1e-14);
    match eval_rows(&solution, &zs, tol) {
        Ok(rows) => {
            let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
            checks.push(check(
                "residual",
                worst <= 1e-8,
                format!("max relative residual {worst:e} over {} points", rows.len()),
            ));
        }
        Err(e) => checks.push(check("residual", false, e.to_string())),
    }

    let table = coeff_table(&solution, opts.mode)?;
    let roundtrip = serde_json::to_string(&table)
        .ok()
        .and_then(|s| serde_json::from_str::<CoeffTable>(&s).ok())
        .is_some_and(|back| back == table);
    checks.push(check(
        "json-roundtrip",
        roundtrip,
        "coefficient table through serde_json",
    ));

    let passed = checks.iter().all(|c| c.passed);
    let outcome = VerifyOutcome {
        family: inst.family,
        mode: mode_name(opts.mode),
        params: ParamsRecord::from_params(&p),
        checks,
        passed,
    };
    let code = if passed {
        0
    } else {
        Error::VerificationFailed(String::new()).exit_code()
    };
    let note = (!passed).then(|| {
        let failed: Vec<&str> = outcome
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        format!("error: verification failed: {}", failed.join(", "))
    });
    Ok((render(&outcome, format_of(opts))?, code, note))
}

fn cmd_oracle_compare<S: Scalar>(opts: &Options) -> Result<Dispatched> {
    let p = params::<S>(opts)?;
    let inst = instance(opts, &p)?;
    let solution = compute_coefficients(&inst, opts.terms)?;
    let anchor = parse_complex("z-anchor", &opts.z_anchor)?;
    let targets = z_points(opts, &[0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0])?;
    let report = compare_series_vs_integration(&solution, anchor, &targets, opts.tol.unwrap_or(1e-10))?;
    Ok((render(&report, format_of(opts))?, 0, None))
}
