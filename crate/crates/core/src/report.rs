//! Serializable output records and their JSON / CSV / table renderings.
//!
//! Complex numbers are `{re, im}` objects in JSON and `re+imi` strings in
//! CSV and tables. Exact scalars are `p/q` strings everywhere.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansions::{DcheParams, FamilyId, StencilSource};
use crate::oracle::CompareReport;
use crate::recurrence::BasisKind;
use crate::scalar::{complex_obj, format_complex, Complex, Scalar, ScalarRepr};
use crate::termination::{ExplicitForm, QSpectrum, TerminationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            _ => Err(Error::InvalidInput(format!("unknown format '{s}'"))),
        }
    }
}

/// Row view used by the CSV and table writers.
pub trait Tabular {
    fn header(&self) -> Vec<String>;
    fn rows(&self) -> Vec<Vec<String>>;
}

pub fn render<T: Serialize + Tabular>(value: &T, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::InvalidInput(e.to_string());
            w.write_record(value.header()).map_err(io)?;
            for row in value.rows() {
                w.write_record(row).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
        }
        Format::Table => Ok(table(&value.header(), &value.rows())),
    }
}

fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&mut out, header);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(&mut out, &rule);
    for row in rows {
        line(&mut out, row);
    }
    out
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub alpha: ScalarRepr,
    pub gamma: ScalarRepr,
    pub delta: ScalarRepr,
    pub epsilon: ScalarRepr,
    pub q: ScalarRepr,
}

impl ParamsRecord {
    pub fn from_params<S: Scalar>(p: &DcheParams<S>) -> Self {
        ParamsRecord {
            alpha: p.alpha.to_repr(),
            gamma: p.gamma.to_repr(),
            delta: p.delta.to_repr(),
            epsilon: p.epsilon.to_repr(),
            q: p.q.to_repr(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisRecord {
    pub kind: BasisKind,
    pub alpha0: ScalarRepr,
    pub gamma0: ScalarRepr,
    pub s0: ScalarRepr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffRow {
    pub n: usize,
    pub a: ScalarRepr,
    /// Row letters at `n`, in the order of `letter_names`.
    pub letters: Vec<ScalarRepr>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffTable {
    pub family: FamilyId,
    pub mode: String,
    pub params: ParamsRecord,
    pub basis: BasisRecord,
    pub source: StencilSource,
    pub letter_names: Vec<String>,
    pub rows: Vec<CoeffRow>,
    pub terminated_at: Option<usize>,
    pub flags: Vec<String>,
}

impl Tabular for CoeffTable {
    fn header(&self) -> Vec<String> {
        let mut h = strings(&["n", "a_n"]);
        h.extend(self.letter_names.iter().map(|l| format!("{l}_n")));
        h
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut row = vec![r.n.to_string(), r.a.to_string()];
                row.extend(r.letters.iter().map(|v| v.to_string()));
                row
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    #[serde(with = "complex_obj")]
    pub z: Complex,
    #[serde(with = "complex_obj")]
    pub u: Complex,
    #[serde(with = "complex_obj")]
    pub du: Complex,
    #[serde(with = "complex_obj")]
    pub d2u: Complex,
    /// `|z²·residual|` relative to the largest term of the equation.
    pub residual: f64,
    pub terms_used: usize,
    pub tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalTable {
    pub family: FamilyId,
    pub params: ParamsRecord,
    pub terms: usize,
    pub rows: Vec<EvalRow>,
}

impl Tabular for EvalTable {
    fn header(&self) -> Vec<String> {
        strings(&["z", "u", "du", "d2u", "residual", "terms_used", "tail"])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    format_complex(r.z),
                    format_complex(r.u),
                    format_complex(r.du),
                    format_complex(r.d2u),
                    format!("{:e}", r.residual),
                    r.terms_used.to_string(),
                    format!("{:e}", r.tail),
                ]
            })
            .collect()
    }
}

impl fmt::Display for ExplicitForm<ScalarRepr> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let poly = |c: &[ScalarRepr]| {
            c.iter()
                .enumerate()
                .map(|(k, v)| match k {
                    0 => format!("({v})"),
                    1 => format!("({v})z"),
                    _ => format!("({v})z^{k}"),
                })
                .collect::<Vec<_>>()
                .join(" + ")
        };
        match self {
            ExplicitForm::Polynomial { coeffs } => write!(f, "{}", poly(coeffs)),
            ExplicitForm::QuasiPolynomial { exponent, coeffs } => write!(f, "exp(({exponent})z)·[{}]", poly(coeffs)),
            ExplicitForm::KummerSum { terms } => write!(f, "sum of {terms} Kummer functions"),
        }
    }
}

impl Tabular for QSpectrum {
    fn header(&self) -> Vec<String> {
        strings(&[
            "q",
            "exact",
            "multiplicity",
            "polynomial_residual",
            "certified",
            "tail",
            "max_residual",
            "explicit",
        ])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.roots
            .iter()
            .map(|r| {
                let (tail, res, explicit) = match &r.certificate {
                    Some(c) => (
                        format!("{:e}", c.tail.iter().copied().fold(0.0, f64::max)),
                        format!("{:e}", c.max_residual),
                        c.explicit.to_string(),
                    ),
                    None => ("".into(), "".into(), r.diagnostic.clone().unwrap_or_default()),
                };
                vec![
                    format_complex(r.value),
                    r.exact.as_ref().map(|e| e.to_string()).unwrap_or_default(),
                    r.multiplicity.to_string(),
                    format!("{:e}", r.polynomial_residual),
                    r.certified().to_string(),
                    tail,
                    res,
                    explicit,
                ]
            })
            .collect()
    }
}

impl Tabular for TerminationReport {
    fn header(&self) -> Vec<String> {
        strings(&["index", "coefficient", "relative", "condition", "holds"])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let n = self.condition.n;
        self.remaining
            .iter()
            .zip(&self.relative)
            .enumerate()
            .map(|(k, (v, r))| {
                vec![
                    (n + 1 + k).to_string(),
                    v.to_string(),
                    format!("{r:e}"),
                    self.condition.constraint.clone(),
                    self.condition.holds.to_string(),
                ]
            })
            .collect()
    }
}

/// Output of `terminate`: a spectrum for families whose stencil is affine in
/// `q`, a condition report otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TerminateOutput {
    Spectrum(QSpectrum),
    Report(TerminationReport),
}

impl Tabular for TerminateOutput {
    fn header(&self) -> Vec<String> {
        match self {
            TerminateOutput::Spectrum(s) => s.header(),
            TerminateOutput::Report(r) => r.header(),
        }
    }

    fn rows(&self) -> Vec<Vec<String>> {
        match self {
            TerminateOutput::Spectrum(s) => s.rows(),
            TerminateOutput::Report(r) => r.rows(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StencilEntry {
    pub offset: i64,
    pub letter: String,
    pub value: ScalarRepr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeriveRow {
    pub n: i64,
    /// Coefficients of `u_{n+offset}` in the rewritten equation at `n`.
    pub entries: Vec<StencilEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeriveDump {
    pub family: FamilyId,
    pub mode: String,
    pub basis: BasisRecord,
    /// Factor applied to the equation before eliminating `u″`.
    pub multiplier: String,
    pub window: (i64, i64),
    pub rows: Vec<DeriveRow>,
    pub diagnostics: Vec<String>,
}

impl Tabular for DeriveDump {
    fn header(&self) -> Vec<String> {
        strings(&["n", "offset", "letter", "value"])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .flat_map(|r| {
                r.entries.iter().map(|e| {
                    vec![
                        r.n.to_string(),
                        e.offset.to_string(),
                        e.letter.clone(),
                        e.value.to_string(),
                    ]
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub family: FamilyId,
    pub mode: String,
    pub params: ParamsRecord,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Tabular for VerifyOutcome {
    fn header(&self) -> Vec<String> {
        strings(&["check", "passed", "detail"])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.checks
            .iter()
            .map(|c| vec![c.name.clone(), c.passed.to_string(), c.detail.clone()])
            .collect()
    }
}

impl Tabular for CompareReport {
    fn header(&self) -> Vec<String> {
        strings(&["z", "series", "integrated", "deviation", "error_estimate"])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    format_complex(r.z),
                    format_complex(r.series),
                    format_complex(r.integrated),
                    format!("{:e}", r.deviation),
                    format!("{:e}", r.error_estimate),
                ]
            })
            .collect()
    }
}
