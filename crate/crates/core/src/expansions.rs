//! Expansion families for the double-confluent Heun equation.
//!
//! Each family fixes a ₁F₁ shift pattern and the parameter locks that make
//! the derivation close: `s₀`, `α₀`, `γ₀`. Coefficients come either from the
//! closed-form recurrence rows or from the derivation engine; both use the
//! same row convention (`letters[i]` at index `m` multiplies `a_m` in row
//! `m + i`, see [`Derivation`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recurrence::{Basis, BasisKind, Derivation, PolyOde};
use crate::scalar::{Complex, Scalar};
use crate::special::{kummer_m_nth_derivative, KummerArgs, SeriesControl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyId {
    TwoTerm,
    ThreeTermA,
    ThreeTermDeg,
    FiveTerm,
    ThreeTermC,
    SevenTermV,
}

impl FamilyId {
    pub const ALL: [FamilyId; 6] = [
        FamilyId::TwoTerm,
        FamilyId::ThreeTermA,
        FamilyId::ThreeTermDeg,
        FamilyId::FiveTerm,
        FamilyId::ThreeTermC,
        FamilyId::SevenTermV,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyId::TwoTerm => "two-term",
            FamilyId::ThreeTermA => "three-term-a",
            FamilyId::ThreeTermDeg => "three-term-deg",
            FamilyId::FiveTerm => "five-term",
            FamilyId::ThreeTermC => "three-term-c",
            FamilyId::SevenTermV => "seven-term-v",
        }
    }

    /// Names of the row letters, leading letter first.
    pub fn letter_names(self) -> &'static [&'static str] {
        match self {
            FamilyId::TwoTerm => &["R", "Q"],
            FamilyId::FiveTerm => &["T", "S", "R", "Q", "P"],
            FamilyId::SevenTermV => &["A", "B", "T", "S", "R", "Q", "P"],
            _ => &["R", "Q", "P"],
        }
    }

    pub fn width(self) -> usize {
        self.letter_names().len()
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown family '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcheParams<S> {
    pub alpha: S,
    pub gamma: S,
    pub delta: S,
    pub epsilon: S,
    pub q: S,
}

impl<S: Scalar> DcheParams<S> {
    pub fn new(alpha: S, gamma: S, delta: S, epsilon: S, q: S) -> Self {
        DcheParams {
            alpha,
            gamma,
            delta,
            epsilon,
            q,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_zero() {
            return Err(Error::FamilyInapplicable("ε must be nonzero".into()));
        }
        Ok(())
    }

    pub fn with_q(&self, q: S) -> Self {
        DcheParams { q, ..self.clone() }
    }

    pub fn to_complex(&self) -> DcheParams<Complex> {
        DcheParams {
            alpha: self.alpha.to_complex(),
            gamma: self.gamma.to_complex(),
            delta: self.delta.to_complex(),
            epsilon: self.epsilon.to_complex(),
            q: self.q.to_complex(),
        }
    }

    /// `α/ε`
    pub fn ratio(&self) -> S {
        self.alpha.clone() / self.epsilon.clone()
    }

    pub fn ode(&self) -> PolyOde<S> {
        PolyOde::dche(&self.alpha, &self.gamma, &self.delta, &self.epsilon, &self.q)
    }

    fn magnitude(&self) -> f64 {
        [&self.alpha, &self.gamma, &self.delta, &self.epsilon, &self.q]
            .iter()
            .map(|v| v.magnitude())
            .fold(1.0, f64::max)
    }
}

/// Caller choices for the parameters a family leaves free.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyOptions<S> {
    pub alpha0: Option<S>,
    pub gamma0: Option<S>,
    /// Use `1 − √(…)` instead of the principal `1 + √(…)` for the degenerate
    /// family's lower parameter.
    pub other_branch: bool,
}

impl<S> Default for FamilyOptions<S> {
    fn default() -> Self {
        FamilyOptions {
            alpha0: None,
            gamma0: None,
            other_branch: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StencilSource {
    PrintedClosedForm,
    EngineDerived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    UEquation,
    VEquation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyInstance<S> {
    pub family: FamilyId,
    pub params: DcheParams<S>,
    pub basis: Basis<S>,
    pub source: StencilSource,
    pub target: Target,
    pub flags: Vec<String>,
}

fn inapplicable<T>(msg: &str) -> Result<T> {
    Err(Error::FamilyInapplicable(msg.to_string()))
}

fn near<S: Scalar>(a: &S, b: &S) -> bool {
    (a.clone() - b.clone()).is_negligible(1.0 + a.magnitude() + b.magnitude())
}

fn check_lower<S: Scalar>(g: &S, name: &str) -> Result<()> {
    if g.is_nonpositive_integer() {
        return Err(Error::FamilyInapplicable(format!("{name} is a nonpositive integer")));
    }
    Ok(())
}

/// `γ₀ = 1 ± √((1−γ)² + 4q)` of the degenerate closed form.
pub fn degenerate_gamma0<S: Scalar>(params: &DcheParams<S>, other_branch: bool) -> Result<S> {
    let one = S::one();
    let g1 = one.clone() - params.gamma.clone();
    let disc = g1.clone() * g1 + S::from_i64(4) * params.q.clone();
    let root = disc.sqrt().ok_or_else(|| {
        Error::FamilyInapplicable("γ₀ = 1+√((1−γ)²+4q) is not rational; supply γ₀ or use floating mode".into())
    })?;
    Ok(if other_branch { one - root } else { one + root })
}

pub fn make_family<S: Scalar>(
    params: &DcheParams<S>,
    family: FamilyId,
    options: &FamilyOptions<S>,
) -> Result<FamilyInstance<S>> {
    params.validate()?;
    let p = params;
    let ratio = p.ratio();
    let neg_eps = -p.epsilon.clone();
    let mut flags = Vec::new();
    let locked = |name: &str, given: &Option<S>, value: &S| -> Result<()> {
        match given {
            Some(v) if !near(v, value) => Err(Error::FamilyInapplicable(format!(
                "{name} is fixed by the family and cannot be chosen"
            ))),
            _ => Ok(()),
        }
    };
    let (kind, alpha0, gamma0, s0, target, source) = match family {
        FamilyId::TwoTerm => {
            let qq = -(p.delta.clone() * p.epsilon.clone());
            if !near(&p.q, &qq) {
                return inapplicable("requires q = −δε");
            }
            locked("α₀", &options.alpha0, &S::zero())?;
            let gamma0 = S::one() + p.gamma.clone() - ratio;
            locked("γ₀", &options.gamma0, &gamma0)?;
            if gamma0.to_integer().is_some() {
                return inapplicable("γ₀ = 1+γ−α/ε is an integer");
            }
            (
                BasisKind::BothShift,
                S::zero(),
                gamma0,
                neg_eps,
                Target::UEquation,
                StencilSource::PrintedClosedForm,
            )
        }
        FamilyId::ThreeTermA | FamilyId::ThreeTermC => {
            if family == FamilyId::ThreeTermC && p.alpha.is_zero() {
                return inapplicable("requires α ≠ 0");
            }
            check_lower(&p.gamma, "γ")?;
            locked("α₀", &options.alpha0, &ratio)?;
            locked("γ₀", &options.gamma0, &p.gamma)?;
            let kind = if family == FamilyId::ThreeTermA {
                BasisKind::BothShift
            } else {
                BasisKind::BShift
            };
            (
                kind,
                ratio,
                p.gamma.clone(),
                neg_eps,
                Target::UEquation,
                StencilSource::PrintedClosedForm,
            )
        }
        FamilyId::ThreeTermDeg => {
            if !p.delta.is_zero() {
                return inapplicable("requires δ = 0");
            }
            let gamma0 = match &options.gamma0 {
                Some(g) => g.clone(),
                None => degenerate_gamma0(p, options.other_branch)?,
            };
            check_lower(&gamma0, "γ₀")?;
            let alpha0 = match &options.alpha0 {
                None => ratio,
                Some(a) if near(a, &ratio) || near(a, &gamma0) => a.clone(),
                Some(_) => return inapplicable("α₀ must be α/ε or γ₀"),
            };
            (
                BasisKind::AShift,
                alpha0,
                gamma0,
                neg_eps,
                Target::UEquation,
                StencilSource::PrintedClosedForm,
            )
        }
        FamilyId::FiveTerm => {
            locked("α₀", &options.alpha0, &ratio)?;
            let gamma0 = options.gamma0.clone().unwrap_or_else(|| p.gamma.clone());
            check_lower(&gamma0, "γ₀")?;
            (
                BasisKind::AShift,
                ratio,
                gamma0,
                neg_eps,
                Target::UEquation,
                StencilSource::PrintedClosedForm,
            )
        }
        FamilyId::SevenTermV => {
            if p.alpha.is_zero() {
                return inapplicable("requires α ≠ 0 (apparent singularity z₀ = q/α)");
            }
            let gamma0 = options.gamma0.clone().unwrap_or_else(|| p.gamma.clone());
            check_lower(&gamma0, "γ₀")?;
            let alt = gamma0.clone() + S::from_i64(2);
            let alpha0 = match &options.alpha0 {
                None => -ratio,
                Some(a) if near(a, &-ratio.clone()) => a.clone(),
                Some(a) if near(a, &alt) => {
                    flags.push("α₀ = γ₀+2: basis functions are reducible".to_string());
                    a.clone()
                }
                Some(_) => return inapplicable("α₀ must be −α/ε or γ₀+2"),
            };
            if p.q.is_zero() {
                flags.push("q = 0: apparent singularity coincides with z = 0".to_string());
            }
            (
                BasisKind::AShift,
                alpha0,
                gamma0,
                p.epsilon.clone(),
                Target::VEquation,
                StencilSource::EngineDerived,
            )
        }
    };
    Ok(FamilyInstance {
        family,
        params: params.clone(),
        basis: Basis::new(kind, alpha0, gamma0, s0)?,
        source,
        target,
        flags,
    })
}

impl<S: Scalar> FamilyInstance<S> {
    pub fn with_source(mut self, source: StencilSource) -> Self {
        self.source = source;
        self
    }

    /// The polynomial equation the engine works on.
    pub fn ode(&self) -> Result<PolyOde<S>> {
        let p = &self.params;
        match self.family {
            FamilyId::TwoTerm => {
                inapplicable("two-term rows come from the closed form; the engine has no joint rule for them")
            }
            FamilyId::ThreeTermA | FamilyId::ThreeTermC | FamilyId::ThreeTermDeg => Ok(p.ode()),
            FamilyId::FiveTerm => Ok(p.ode().times_z()),
            FamilyId::SevenTermV => Ok(PolyOde::v_equation(&p.alpha, &p.gamma, &p.delta, &p.epsilon, &p.q)?.times_z()),
        }
    }

    pub fn derivation(&self) -> Result<Derivation<S>> {
        Derivation::new(&self.ode()?, self.basis.clone())
    }

    /// Factor `λ` with printed rows `= λ · engine rows`.
    pub fn printed_scale(&self) -> S {
        let e = self.params.epsilon.clone();
        match self.family {
            FamilyId::FiveTerm => e.clone() * e.clone() * e,
            FamilyId::SevenTermV => e.clone() * e,
            _ => S::one(),
        }
    }

    /// Closed-form letters at `n`; `None` for entries without a closed form.
    pub fn printed_letters(&self, n: i64) -> Vec<Option<S>> {
        let p = &self.params;
        let nn = S::from_i64(n);
        let one = S::one();
        let two = S::from_i64(2);
        let (al, ga, de, ep, q) = (
            p.alpha.clone(),
            p.gamma.clone(),
            p.delta.clone(),
            p.epsilon.clone(),
            p.q.clone(),
        );
        let g0 = self.basis.gamma0.clone();
        let an = self.basis.alpha_n(n);
        let ratio = p.ratio();
        match self.family {
            FamilyId::TwoTerm => vec![Some(nn.clone()), Some(g0 - nn - one)],
            FamilyId::ThreeTermA => {
                let r = -(nn.clone() * (ga.clone() + nn.clone() - one));
                let qn = -r.clone() - q;
                let pn = -(de * (al + ep * nn.clone()) / (ga + nn));
                vec![Some(r), Some(qn), Some(pn)]
            }
            FamilyId::ThreeTermC => {
                let r = -(nn.clone() * (ga.clone() + nn.clone() - one));
                let qn = -r.clone() - ep.clone() * de.clone() - q;
                let pn = de * (ep - al / (ga + nn));
                vec![Some(r), Some(qn), Some(pn)]
            }
            FamilyId::ThreeTermDeg => {
                let r = (an.clone() - g0.clone()) * (an.clone() - ratio.clone());
                let qn = (an.clone() - ratio.clone()) * (g0.clone() - two * an.clone())
                    - an.clone() * (ga.clone() - g0.clone())
                    - q;
                let pn = an.clone() * (an + ga - g0 - ratio);
                vec![Some(r), Some(qn), Some(pn)]
            }
            FamilyId::FiveTerm => {
                let t = -(nn.clone()
                    * (al.clone() + (nn.clone() - one.clone() - g0.clone()) * ep.clone())
                    * (al.clone() + (nn.clone() - g0.clone()) * ep.clone()));
                let s = (al.clone() * (ga.clone() - g0.clone() + S::from_i64(4) * nn.clone())
                    + ep.clone()
                        * (q.clone()
                            + nn.clone()
                                * (ga.clone() - S::from_i64(3) * g0.clone() + S::from_i64(4) * nn.clone()
                                    - two.clone())))
                    * (al.clone() + (nn.clone() - g0.clone()) * ep.clone());
                let qn = (al.clone() + nn.clone() * ep.clone())
                    * (al.clone() * (S::from_i64(3) * (ga.clone() - g0.clone()) + S::from_i64(4) * nn.clone())
                        + ep.clone()
                            * ((S::from_i64(3) * ga.clone() + S::from_i64(4) * nn.clone() + two.clone()) * nn.clone()
                                - (ga.clone() + S::from_i64(5) * nn.clone() + two.clone()) * g0.clone()
                                + g0.clone() * g0.clone()
                                + q
                                + two * ga.clone()
                                + de * ep.clone()));
                let pn = -((nn.clone() + ga - g0) * (al.clone() + ep.clone() * nn.clone()) * (al + ep * (one + nn)));
                let r = -(t.clone() + s.clone() + qn.clone() + pn.clone());
                vec![Some(t), Some(s), Some(r), Some(qn), Some(pn)]
            }
            FamilyId::SevenTermV => {
                let a = (an.clone() - g0.clone())
                    * (an.clone() - g0.clone() - one.clone())
                    * (an.clone() - g0.clone() - two.clone())
                    * (an.clone() + ratio.clone());
                let pn = an.clone() * (an.clone() + one.clone()) * (an.clone() + two) * (an + one - g0 - ga + ratio);
                vec![Some(a), None, None, None, None, None, Some(pn)]
            }
        }
    }

    /// The last seven-term letter exactly as printed in the source, with `δ`
    /// where the derivation produces `γ`.
    pub fn printed_last_letter_literal(&self, n: i64) -> Option<S> {
        if self.family != FamilyId::SevenTermV {
            return None;
        }
        let one = S::one();
        let an = self.basis.alpha_n(n);
        Some(
            an.clone()
                * (an.clone() + one.clone())
                * (an.clone() + S::from_i64(2))
                * (an + one - self.basis.gamma0.clone() - self.params.delta.clone() + self.params.ratio()),
        )
    }
}

/// Row letters at each index, from whichever source the instance names.
pub struct RowSource<S> {
    family: FamilyId,
    instance: FamilyInstance<S>,
    engine: Option<Derivation<S>>,
}

impl<S: Scalar> RowSource<S> {
    pub fn new(instance: &FamilyInstance<S>) -> Result<Self> {
        let engine = match instance.source {
            StencilSource::EngineDerived => Some(instance.derivation()?),
            StencilSource::PrintedClosedForm => {
                if instance.family == FamilyId::SevenTermV {
                    return inapplicable("seven-term rows have no complete closed form; use the engine");
                }
                None
            }
        };
        Ok(RowSource {
            family: instance.family,
            instance: instance.clone(),
            engine,
        })
    }

    pub fn width(&self) -> usize {
        match &self.engine {
            Some(d) => d.width(),
            None => self.family.width(),
        }
    }

    pub fn letters(&self, n: i64) -> Result<Vec<S>> {
        match &self.engine {
            Some(d) => d.letters(n),
            None => Ok(self
                .instance
                .printed_letters(n)
                .into_iter()
                .map(|v| v.expect("closed form present"))
                .collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution<S> {
    pub instance: FamilyInstance<S>,
    pub coefficients: Vec<S>,
    /// Last nonzero index when the sequence provably stops.
    pub terminated_at: Option<usize>,
    pub width: usize,
}

impl<S: Scalar> SeriesSolution<S> {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Largest row defect `|Σ_i ℓ_i(n−i)a_{n−i}|` for `n = 1..M`, relative
    /// to the largest term in the row.
    pub fn max_row_defect(&self) -> Result<f64> {
        let rows = RowSource::new(&self.instance)?;
        let w = rows.width();
        let letters: Vec<Vec<S>> = (0..self.coefficients.len() as i64)
            .map(|m| rows.letters(m))
            .collect::<Result<_>>()?;
        let mut worst: f64 = 0.0;
        for n in 1..self.coefficients.len() {
            let mut sum = S::zero();
            let mut scale: f64 = 0.0;
            for i in 0..w.min(n + 1) {
                let t = letters[n - i][i].clone() * self.coefficients[n - i].clone();
                scale = scale.max(t.magnitude());
                sum = sum + t;
            }
            if scale > 0.0 {
                worst = worst.max(sum.magnitude() / scale);
            }
        }
        Ok(worst)
    }
}

/// Raw forward substitution `a_n = −Σ_{i≥1} ℓ_i(n−i)a_{n−i} / ℓ_0(n)`,
/// `a₀ = 1`, for `n = 0..=m`.
pub fn forward_substitute<S: Scalar>(instance: &FamilyInstance<S>, m: usize) -> Result<(Vec<S>, usize)> {
    let rows = RowSource::new(instance)?;
    let w = rows.width();
    let mut letters: Vec<Vec<S>> = Vec::with_capacity(m + 1);
    let mut a: Vec<S> = Vec::with_capacity(m + 1);
    let l0 = rows.letters(0)?;
    let row_scale = |l: &[S]| l.iter().map(|v| v.magnitude()).fold(0.0, f64::max);
    if !l0[0].is_negligible(row_scale(&l0).max(instance.params.magnitude())) {
        return Err(Error::FamilyInapplicable(
            "leading coefficient at n = 0 is nonzero; the series does not start at a₀".into(),
        ));
    }
    letters.push(l0);
    a.push(S::one());
    for n in 1..=m {
        let ln = rows.letters(n as i64)?;
        let mut acc = S::zero();
        for i in 1..w.min(n + 1) {
            acc = acc + letters[n - i][i].clone() * a[n - i].clone();
        }
        if ln[0].is_negligible(row_scale(&ln).max(1.0)) {
            return Err(Error::ResonantIndex(n as i64));
        }
        a.push(-acc / ln[0].clone());
        letters.push(ln);
    }
    Ok((a, w))
}

/// Coefficients `a₀..a_M`; a sequence that provably stops is cut to exact
/// zeros after its last nonzero entry.
pub fn compute_coefficients<S: Scalar>(instance: &FamilyInstance<S>, m: usize) -> Result<SeriesSolution<S>> {
    let (mut a, w) = forward_substitute(instance, m)?;
    let terminated_at = detect_termination(&a, w);
    if let Some(last) = terminated_at {
        for v in a.iter_mut().skip(last + 1) {
            *v = S::zero();
        }
    }
    Ok(SeriesSolution {
        instance: instance.clone(),
        coefficients: a,
        terminated_at,
        width: w,
    })
}

/// Index `N` with `a_N ≠ 0` followed by `w − 1` zeros inside the computed
/// range; from there every row forces zero.
fn detect_termination<S: Scalar>(a: &[S], w: usize) -> Option<usize> {
    let scale = a.iter().map(|v| v.magnitude()).fold(0.0, f64::max);
    let zero = |v: &S| {
        if S::EXACT {
            v.is_zero()
        } else {
            v.magnitude() <= 1e-14 * scale
        }
    };
    let need = w.saturating_sub(1).max(1);
    for n in 0..a.len() {
        if zero(&a[n]) {
            continue;
        }
        if n + need < a.len() && a[n + 1..=n + need].iter().all(zero) && a[n + need + 1..].iter().all(zero) {
            return Some(n);
        }
    }
    None
}

/// Partial sums of a series and its derivatives at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesValue {
    /// `[f, f′, f″, …]`
    pub derivatives: Vec<Complex>,
    pub terms_used: usize,
    /// Relative size of the last retained terms.
    pub tail: f64,
    pub converged: bool,
}

impl SeriesValue {
    pub fn value(&self) -> Complex {
        self.derivatives[0]
    }
}

fn basis_args<S: Scalar>(instance: &FamilyInstance<S>, n: usize, z: Complex) -> (KummerArgs<Complex>, Complex) {
    let b = &instance.basis;
    let s0 = b.s0.to_complex();
    let nn = n as i64;
    let (a, g) = if instance.family == FamilyId::TwoTerm {
        (Complex::new(-(n as f64), 0.0), b.gamma0.to_complex() - n as f64)
    } else {
        (b.alpha_n(nn).to_complex(), b.gamma_n(nn).to_complex())
    };
    (KummerArgs::new(a, g, s0 * z), s0)
}

/// Value and first `order` derivatives in `z` of the basis function `u_n`.
pub fn basis_function<S: Scalar>(
    instance: &FamilyInstance<S>,
    n: usize,
    z: Complex,
    order: usize,
    ctl: SeriesControl,
) -> Result<Vec<Complex>> {
    let (args, s0) = basis_args(instance, n, z);
    let mut out = Vec::with_capacity(order + 1);
    let mut fac = Complex::new(1.0, 0.0);
    for d in 0..=order {
        out.push(fac * kummer_m_nth_derivative(&args, d, ctl)?);
        fac *= s0;
    }
    Ok(out)
}

/// Number of consecutive small terms that ends a sum.
fn stop_run(width: usize) -> usize {
    width.saturating_sub(1).max(3)
}

/// Sums `Σ a_n u_n^{(d)}`, `d = 0..=order`, without failing on slow
/// convergence.
pub fn evaluate_partial<S: Scalar>(
    solution: &SeriesSolution<S>,
    z: Complex,
    tol: f64,
    order: usize,
) -> Result<SeriesValue> {
    if z.norm() == 0.0 {
        return Err(Error::DomainError("z = 0 is a singular point".into()));
    }
    let ctl = SeriesControl::default();
    let last = match solution.terminated_at {
        Some(n) => n,
        None => solution.order(),
    };
    let mut sums = vec![Complex::new(0.0, 0.0); order + 1];
    let mut small = 0;
    let run = stop_run(solution.width);
    let mut recent: Vec<f64> = Vec::new();
    let mut used = 0;
    let mut converged = solution.terminated_at.is_some();
    for n in 0..=last {
        let a = solution.coefficients[n].to_complex();
        used = n + 1;
        let mut rel: f64 = 0.0;
        if a.norm() != 0.0 {
            let u = basis_function(&solution.instance, n, z, order, ctl)?;
            for d in 0..=order {
                let t = a * u[d];
                sums[d] += t;
                rel = rel.max(t.norm() / sums[d].norm().max(f64::MIN_POSITIVE));
            }
        }
        recent.push(rel);
        if solution.terminated_at.is_some() || n == 0 {
            continue;
        }
        if rel <= tol {
            small += 1;
            if small >= run {
                converged = true;
                break;
            }
        } else {
            small = 0;
        }
    }
    let tail = if solution.terminated_at.is_some() {
        0.0
    } else {
        recent.iter().rev().take(run).copied().fold(0.0, f64::max)
    };
    Ok(SeriesValue {
        derivatives: sums,
        terms_used: used,
        tail,
        converged: converged || tail <= tol,
    })
}

/// `(u, u′, u″)` of a u-equation family; fails when the sum has not settled
/// within the available coefficients.
pub fn evaluate_u<S: Scalar>(solution: &SeriesSolution<S>, z: Complex, tol: f64) -> Result<SeriesValue> {
    if solution.instance.target == Target::VEquation {
        return Err(Error::InvalidInput(
            "the seven-term series solves the v-equation; map it with map_v_to_u".into(),
        ));
    }
    let v = evaluate_partial(solution, z, tol, 2)?;
    if !v.converged {
        return Err(Error::SlowConvergence {
            tail: v.tail,
            terms: v.terms_used,
        });
    }
    Ok(v)
}

/// `z^s·₁F₁(s + α/ε; γ₀; −εz)`, `s = (γ₀ − γ)/2`, for `δ = 0`.
pub fn degenerate_closed_form<S: Scalar>(params: &DcheParams<S>, z: Complex, other_branch: bool) -> Result<Complex> {
    params.validate()?;
    if !params.delta.is_zero() {
        return inapplicable("requires δ = 0");
    }
    if z.norm() == 0.0 {
        return Err(Error::DomainError("z = 0".into()));
    }
    let p = params.to_complex();
    let g1 = Complex::new(1.0, 0.0) - p.gamma;
    let root = (g1 * g1 + 4.0 * p.q).sqrt();
    let gamma0 = if other_branch { 1.0 - root } else { 1.0 + root };
    let s = (gamma0 - p.gamma) / 2.0;
    let args = KummerArgs::new(s + p.alpha / p.epsilon, gamma0, -p.epsilon * z);
    let m = kummer_m_nth_derivative(&args, 0, SeriesControl::default())?;
    Ok(z.powc(s) * m)
}

/// `v = z^γ e^{εz − δ/z} u′`
pub fn v_from_u<S: Scalar>(params: &DcheParams<S>, du: Complex, z: Complex) -> Result<Complex> {
    if z.norm() == 0.0 {
        return Err(Error::DomainError("z = 0".into()));
    }
    let p = params.to_complex();
    Ok(z.powc(p.gamma) * (p.epsilon * z - p.delta / z).exp() * du)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coincidence {
    /// `q = 0`: the apparent singularity sits at `z = 0`.
    QZero,
    /// `α = 0`: the apparent singularity moves to infinity.
    AlphaZero,
}

/// The equation satisfied by `v = z^γ e^{εz−δ/z} u′`.
#[derive(Debug, Clone, PartialEq)]
pub struct VEquation<S> {
    pub params: DcheParams<S>,
    pub z0: Option<S>,
    pub coincidence: Option<Coincidence>,
}

impl<S: Scalar> VEquation<S> {
    pub fn new(params: &DcheParams<S>) -> Self {
        let (z0, coincidence) = if params.alpha.is_zero() {
            (None, Some(Coincidence::AlphaZero))
        } else {
            let z0 = params.q.clone() / params.alpha.clone();
            let c = params.q.is_zero().then_some(Coincidence::QZero);
            (Some(z0), c)
        };
        VEquation {
            params: params.clone(),
            z0,
            coincidence,
        }
    }

    pub fn coincidence_note(&self) -> Option<&'static str> {
        self.coincidence.map(|_| "reduces to a DCHE with altered parameters")
    }

    /// The factor `g` in `u = g·v′` and its logarithmic derivative pieces.
    fn prefactor(&self, z: Complex) -> Result<(Complex, Complex, Complex)> {
        if z.norm() == 0.0 {
            return Err(Error::DomainError("z = 0".into()));
        }
        let p = self.params.to_complex();
        let den = p.alpha * z - p.q;
        if den.norm() <= 1e-14 * (p.alpha.norm() * z.norm() + p.q.norm()) {
            return Err(Error::ApparentSingularity(crate::scalar::format_complex(z)));
        }
        let two_g = Complex::new(2.0, 0.0) - p.gamma;
        let g = -z.powc(two_g) * (-p.epsilon * z + p.delta / z).exp() / den;
        let h = two_g / z - p.epsilon - p.delta / (z * z) - p.alpha / den;
        let dh = -two_g / (z * z) + 2.0 * p.delta / (z * z * z) + p.alpha * p.alpha / (den * den);
        Ok((g, h, dh))
    }

    /// `u = −z^{2−γ} e^{−εz+δ/z} v′ / (αz − q)`
    pub fn map_v_to_u(&self, dv: Complex, z: Complex) -> Result<Complex> {
        let (g, _, _) = self.prefactor(z)?;
        Ok(g * dv)
    }

    /// `(u, u′, u″)` from `(v′, v″, v‴)` by differentiating `u = g·v′`.
    pub fn map_v_to_u_derivatives(&self, dv: &[Complex], z: Complex) -> Result<[Complex; 3]> {
        let (g, h, dh) = self.prefactor(z)?;
        let g1 = g * h;
        let g2 = g * (h * h + dh);
        Ok([
            g * dv[0],
            g1 * dv[0] + g * dv[1],
            g2 * dv[0] + 2.0 * g1 * dv[1] + g * dv[2],
        ])
    }
}

/// `(u, u′, u″)` of a seven-term v-series pushed through `u = g·v′`.
pub fn evaluate_mapped_u<S: Scalar>(
    solution: &SeriesSolution<S>,
    z: Complex,
    tol: f64,
) -> Result<(SeriesValue, [Complex; 3])> {
    let veq = VEquation::new(&solution.instance.params);
    let v = evaluate_partial(solution, z, tol, 3)?;
    let u = veq.map_v_to_u_derivatives(&v.derivatives[1..], z)?;
    Ok((v, u))
}

/// Entry-wise comparison of engine rows against the closed forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub family: FamilyId,
    pub n: i64,
    pub letter: String,
    pub params: Vec<String>,
    pub engine: String,
    pub printed: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares engine-derived letters (scaled to the closed-form normalization)
/// with the closed forms for every instance and index.
pub fn verify_against_printed<S: Scalar>(
    instances: &[FamilyInstance<S>],
    ns: std::ops::RangeInclusive<i64>,
) -> VerifyReport {
    let mut report = VerifyReport::default();
    for inst in instances {
        let describe = || {
            let p = &inst.params;
            vec![
                format!("α={}", p.alpha.to_repr()),
                format!("γ={}", p.gamma.to_repr()),
                format!("δ={}", p.delta.to_repr()),
                format!("ε={}", p.epsilon.to_repr()),
                format!("q={}", p.q.to_repr()),
                format!("γ₀={}", inst.basis.gamma0.to_repr()),
            ]
        };
        let names = inst.family.letter_names();
        let derivation = match inst.derivation() {
            Ok(d) => d,
            Err(e) => {
                report.mismatches.push(Mismatch {
                    family: inst.family,
                    n: *ns.start(),
                    letter: "-".into(),
                    params: describe(),
                    engine: format!("error: {e}"),
                    printed: "-".into(),
                });
                continue;
            }
        };
        let scale = inst.printed_scale();
        for n in ns.clone() {
            let printed = inst.printed_letters(n);
            let engine = if derivation.width() < printed.len() {
                derivation.letters_padded(n, printed.len())
            } else {
                derivation.letters(n)
            };
            let engine = match engine {
                Ok(l) if l.len() == printed.len() => l,
                Ok(l) => {
                    report.mismatches.push(Mismatch {
                        family: inst.family,
                        n,
                        letter: "width".into(),
                        params: describe(),
                        engine: l.len().to_string(),
                        printed: printed.len().to_string(),
                    });
                    continue;
                }
                Err(e) => {
                    report.mismatches.push(Mismatch {
                        family: inst.family,
                        n,
                        letter: "-".into(),
                        params: describe(),
                        engine: format!("error: {e}"),
                        printed: "-".into(),
                    });
                    continue;
                }
            };
            for (i, (e, p)) in engine.into_iter().zip(printed).enumerate() {
                let Some(p) = p else { continue };
                report.checked += 1;
                let e = e * scale.clone();
                let equal = if S::EXACT {
                    e == p
                } else {
                    (e.clone() - p.clone()).is_negligible(1.0 + e.magnitude() + p.magnitude())
                };
                if !equal {
                    report.mismatches.push(Mismatch {
                        family: inst.family,
                        n,
                        letter: names[i].to_string(),
                        params: describe(),
                        engine: e.to_repr().to_string(),
                        printed: p.to_repr().to_string(),
                    });
                }
            }
        }
    }
    report
}
