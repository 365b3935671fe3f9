//! Right termination of the series: the condition on the non-`q`
//! parameters, the polynomial `a_{N+1}(q)` whose roots make the sum finite,
//! and certificates that a finite sum solves the equation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansions::{
    evaluate_u, forward_substitute, make_family, DcheParams, FamilyId, FamilyInstance, FamilyOptions, RowSource,
    SeriesSolution, Target,
};
use crate::oracle::{relative_dche_residual, series_u};
use crate::poly::Poly;
use crate::roots::{find_roots, RootOptions};
use crate::scalar::{complex_obj, rationalize, Complex, Rational, Scalar, ScalarRepr};
use crate::special::{pochhammer, KummerArgs};

/// Relative size below which trailing coefficients count as zero.
pub const TAIL_TOL: f64 = 1e-12;
/// Largest residual a certified floating finite sum may have.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationCondition {
    pub family: FamilyId,
    pub n: usize,
    pub constraint: String,
    /// The last stencil entry at `N` vanishes for the given parameters.
    pub holds: bool,
}

fn constraint_text<S: Scalar>(instance: &FamilyInstance<S>) -> String {
    match instance.family {
        FamilyId::TwoTerm => "none (the two-term series does not terminate on the right)".into(),
        FamilyId::ThreeTermA => "α/ε = −N".into(),
        FamilyId::ThreeTermC => "γ − α/ε = −N".into(),
        FamilyId::ThreeTermDeg => {
            let ratio = instance.params.ratio();
            let b = &instance.basis;
            if (b.alpha0.clone() - ratio.clone()).is_negligible(1.0 + ratio.magnitude()) {
                "α/ε = −N or γ − γ₀ = −N".into()
            } else {
                "γ − α/ε = −N".into()
            }
        }
        FamilyId::FiveTerm => "γ₀ = γ+N or α = −εN or α = −ε(N+1)".into(),
        FamilyId::SevenTermV => "α₀+N ∈ {0, −1, −2, γ₀+γ−α/ε−1}".into(),
    }
}

fn row_scale<S: Scalar>(l: &[S]) -> f64 {
    l.iter().map(|v| v.magnitude()).fold(0.0, f64::max).max(1.0)
}

pub fn termination_condition<S: Scalar>(instance: &FamilyInstance<S>, n: usize) -> Result<TerminationCondition> {
    let constraint = constraint_text(instance);
    let holds = if instance.family == FamilyId::TwoTerm {
        false
    } else {
        let rows = RowSource::new(instance)?;
        let l = rows.letters(n as i64)?;
        l[l.len() - 1].is_negligible(row_scale(&l))
    };
    Ok(TerminationCondition {
        family: instance.family,
        n,
        constraint,
        holds,
    })
}

/// Sets `α` so that the family's termination condition holds at `N`, using
/// the first alternative the family offers.
pub fn install_condition<S: Scalar>(
    params: &DcheParams<S>,
    family: FamilyId,
    options: &FamilyOptions<S>,
    n: usize,
) -> Result<DcheParams<S>> {
    let mut p = params.clone();
    let nn = S::from_i64(n as i64);
    p.alpha = match family {
        FamilyId::ThreeTermA | FamilyId::FiveTerm => -(p.epsilon.clone() * nn),
        FamilyId::ThreeTermC => p.epsilon.clone() * (p.gamma.clone() + nn),
        FamilyId::ThreeTermDeg => match (&options.alpha0, &options.gamma0) {
            (Some(a0), Some(g0)) if a0 == g0 => p.epsilon.clone() * (p.gamma.clone() + nn),
            _ => -(p.epsilon.clone() * nn),
        },
        FamilyId::TwoTerm | FamilyId::SevenTermV => {
            return Err(Error::FamilyInapplicable(format!(
                "{family}: no single-parameter termination condition to install"
            )))
        }
    };
    Ok(p)
}

/// `a₀(q)..a_{N+w−1}(q)` with `a_{N+1}(q)` singled out.
#[derive(Debug, Clone, PartialEq)]
pub struct QPolynomial<S> {
    pub family: FamilyId,
    pub n: usize,
    pub width: usize,
    pub sequence: Vec<Poly<S>>,
}

impl<S: Scalar> QPolynomial<S> {
    pub fn leading(&self) -> &Poly<S> {
        &self.sequence[self.n + 1]
    }
}

fn q_instances<S: Scalar>(
    params: &DcheParams<S>,
    family: FamilyId,
    options: &FamilyOptions<S>,
) -> Result<[FamilyInstance<S>; 3]> {
    let make = |q: i64| make_family(&params.with_q(S::from_i64(q)), family, options);
    Ok([make(0)?, make(1)?, make(2)?])
}

/// Runs the recurrence with every `a_n` a polynomial in `q`. The stencil must
/// be affine in `q` with a `q`-free leading entry.
pub fn q_polynomial<S: Scalar>(
    params: &DcheParams<S>,
    family: FamilyId,
    options: &FamilyOptions<S>,
    n: usize,
) -> Result<QPolynomial<S>> {
    match family {
        FamilyId::TwoTerm => {
            return Err(Error::FamilyInapplicable(
                "the two-term series fixes q = −δε and has no spectrum".into(),
            ))
        }
        FamilyId::ThreeTermDeg if options.gamma0.is_none() => {
            return Err(Error::FamilyInapplicable(
                "the default γ₀ depends on q; supply --gamma0 for a q-spectrum".into(),
            ))
        }
        _ => {}
    }
    let inst = q_instances(params, family, options)?;
    let cond = termination_condition(&inst[0], n)?;
    if !cond.holds {
        return Err(Error::ConditionViolated(format!(
            "{} (required for termination at N = {n})",
            cond.constraint
        )));
    }
    let rows: Vec<RowSource<S>> = inst.iter().map(RowSource::new).collect::<Result<_>>()?;
    let w = rows[0].width();
    let len = n + w;
    let mut letters: Vec<Vec<Poly<S>>> = Vec::with_capacity(len);
    for m in 0..len as i64 {
        let l0 = rows[0].letters(m)?;
        let l1 = rows[1].letters(m)?;
        let l2 = rows[2].letters(m)?;
        let mut row = Vec::with_capacity(w);
        for i in 0..w {
            let slope = l1[i].clone() - l0[i].clone();
            let bend = l2[i].clone() - S::from_i64(2) * l1[i].clone() + l0[i].clone();
            if !bend.is_negligible(row_scale(&l2)) {
                return Err(Error::FamilyInapplicable(format!(
                    "{family}: stencil is not affine in q, no polynomial spectrum"
                )));
            }
            row.push(Poly::new(vec![l0[i].clone(), slope]));
        }
        if row[0].degree() > 0 && !row[0].coeff(1).is_negligible(row_scale(&l0)) {
            return Err(Error::FamilyInapplicable(format!(
                "{family}: leading stencil entry depends on q"
            )));
        }
        letters.push(row);
    }
    if !letters[0][0].coeff(0).is_negligible(row_scale(&rows[0].letters(0)?)) {
        return Err(Error::FamilyInapplicable(
            "leading coefficient at n = 0 is nonzero; the series does not start at a₀".into(),
        ));
    }
    let mut a: Vec<Poly<S>> = vec![Poly::constant(S::one())];
    for m in 1..len {
        let lead = letters[m][0].coeff(0);
        let l = rows[0].letters(m as i64)?;
        if lead.is_negligible(row_scale(&l)) {
            return Err(Error::ResonantIndex(m as i64));
        }
        let mut acc = Poly::zero();
        for i in 1..w.min(m + 1) {
            acc = acc.add(&letters[m - i][i].mul(&a[m - i]));
        }
        a.push(acc.scale(&(-(S::one() / lead))));
    }
    Ok(QPolynomial {
        family,
        n,
        width: w,
        sequence: a,
    })
}

/// Explicit closed form of a finite sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExplicitForm<T> {
    /// `Σ c_k z^k`
    Polynomial { coeffs: Vec<T> },
    /// `e^{cz} Σ c_k z^k`
    QuasiPolynomial { exponent: T, coeffs: Vec<T> },
    /// A finite combination of non-terminating Kummer functions.
    KummerSum { terms: usize },
}

impl<T> ExplicitForm<T> {
    fn map<U>(&self, f: impl Fn(&T) -> U) -> ExplicitForm<U> {
        match self {
            ExplicitForm::Polynomial { coeffs } => ExplicitForm::Polynomial {
                coeffs: coeffs.iter().map(&f).collect(),
            },
            ExplicitForm::QuasiPolynomial { exponent, coeffs } => ExplicitForm::QuasiPolynomial {
                exponent: f(exponent),
                coeffs: coeffs.iter().map(&f).collect(),
            },
            ExplicitForm::KummerSum { terms } => ExplicitForm::KummerSum { terms: *terms },
        }
    }
}

impl<S: Scalar> ExplicitForm<S> {
    /// `(u, u′, u″)` of a polynomial or quasi-polynomial form.
    pub fn eval(&self, z: Complex) -> Option<[Complex; 3]> {
        let (c, coeffs) = match self {
            ExplicitForm::Polynomial { coeffs } => (Complex::new(0.0, 0.0), coeffs),
            ExplicitForm::QuasiPolynomial { exponent, coeffs } => (exponent.to_complex(), coeffs),
            ExplicitForm::KummerSum { .. } => return None,
        };
        let p = Poly::new(coeffs.clone());
        let (p0, p1, p2) = (
            p.eval_complex(z),
            p.derivative().eval_complex(z),
            p.derivative().derivative().eval_complex(z),
        );
        let e = (c * z).exp();
        Some([e * p0, e * (p1 + c * p0), e * (p2 + 2.0 * c * p1 + c * c * p0)])
    }

    pub fn to_repr(&self) -> ExplicitForm<ScalarRepr> {
        self.map(|v| v.to_repr())
    }
}

/// `Σ_k (a)_k/(b)_k (sx)^k/k!` as a polynomial in `x`, for `a = −m`.
fn kummer_polynomial<S: Scalar>(a: &S, b: &S, s: &S) -> Result<Option<Poly<S>>> {
    let args = KummerArgs::new(a.clone(), b.clone(), S::zero());
    let Some(len) = args.terminating_length() else {
        return Ok(None);
    };
    args.validate()?;
    let mut coeffs = Vec::with_capacity(len);
    let mut fact = S::one();
    let mut sk = S::one();
    for k in 0..len {
        if k > 0 {
            fact = fact * S::from_i64(k as i64);
            sk = sk * s.clone();
        }
        coeffs.push(pochhammer(a, k) / pochhammer(b, k) * sk.clone() / fact.clone());
    }
    Ok(Some(Poly::new(coeffs)))
}

/// Closed form of `Σ_{n≤N} a_n u_n`; polynomial pieces need every `u_n` to
/// terminate.
pub fn explicit_form<S: Scalar>(instance: &FamilyInstance<S>, a: &[S]) -> Result<ExplicitForm<S>> {
    let b = &instance.basis;
    if instance.target == Target::VEquation || instance.family == FamilyId::TwoTerm {
        return Ok(ExplicitForm::KummerSum { terms: a.len() });
    }
    let quasi = instance.family == FamilyId::ThreeTermC;
    let mut sum = Poly::zero();
    for (n, an) in a.iter().enumerate() {
        if an.is_zero() {
            continue;
        }
        let (alpha, gamma) = (b.alpha_n(n as i64), b.gamma_n(n as i64));
        // M(α; γ; s₀z) = e^{s₀z} M(γ − α; γ; −s₀z)
        let piece = if quasi {
            kummer_polynomial(&(gamma.clone() - alpha), &gamma, &(-b.s0.clone()))?
        } else {
            kummer_polynomial(&alpha, &gamma, &b.s0)?
        };
        match piece {
            Some(p) => sum = sum.add(&p.scale(an)),
            None => return Ok(ExplicitForm::KummerSum { terms: a.len() }),
        }
    }
    Ok(if quasi {
        ExplicitForm::QuasiPolynomial {
            exponent: b.s0.clone(),
            coeffs: sum.coeffs,
        }
    } else {
        ExplicitForm::Polynomial { coeffs: sum.coeffs }
    })
}

/// `z²u″ + (εz²+γz+δ)u′ + (αz−q)u` for `u = e^{cz}p(z)`, divided by `e^{cz}`.
pub fn explicit_residual<S: Scalar>(params: &DcheParams<S>, form: &ExplicitForm<S>) -> Option<Poly<S>> {
    let (c, coeffs) = match form {
        ExplicitForm::Polynomial { coeffs } => (S::zero(), coeffs),
        ExplicitForm::QuasiPolynomial { exponent, coeffs } => (exponent.clone(), coeffs),
        ExplicitForm::KummerSum { .. } => return None,
    };
    let ode = params.ode();
    let p = Poly::new(coeffs.clone());
    let d1 = p.derivative();
    let d2 = d1.derivative();
    let u1 = d1.add(&p.scale(&c));
    let u2 = d2
        .add(&d1.scale(&(S::from_i64(2) * c.clone())))
        .add(&p.scale(&(c.clone() * c)));
    Some(ode.p2.mul(&u2).add(&ode.p1.mul(&u1)).add(&ode.p0.mul(&p)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate<T> {
    pub family: FamilyId,
    pub n: usize,
    pub q: T,
    /// `a₀..a_{N+w−1}`
    pub coefficients: Vec<T>,
    /// `|a_{N+k}| / max_{m≤N}|a_m|`, `k = 1..w−1`.
    pub tail: Vec<f64>,
    pub explicit: ExplicitForm<T>,
    /// Whether the residual polynomial of the explicit form is identically
    /// zero; absent for Kummer sums.
    pub residual_vanishes: Option<bool>,
    pub max_residual: f64,
    pub certified: bool,
}

impl<S: Scalar> Certificate<S> {
    pub fn to_repr(&self) -> Certificate<ScalarRepr> {
        Certificate {
            family: self.family,
            n: self.n,
            q: self.q.to_repr(),
            coefficients: self.coefficients.iter().map(|v| v.to_repr()).collect(),
            tail: self.tail.clone(),
            explicit: self.explicit.to_repr(),
            residual_vanishes: self.residual_vanishes,
            max_residual: self.max_residual,
            certified: self.certified,
        }
    }
}

/// Evenly spaced real points on `[0.5, 2]`.
pub fn default_samples(count: usize) -> Vec<Complex> {
    (0..count)
        .map(|k| Complex::new(0.5 + 1.5 * k as f64 / (count.max(2) - 1) as f64, 0.0))
        .collect()
}

/// Checks that the series of `params` stops after `a_N` and that the finite
/// sum solves the equation at `samples`.
pub fn certify_finite_sum<S: Scalar>(
    params: &DcheParams<S>,
    family: FamilyId,
    options: &FamilyOptions<S>,
    n: usize,
    samples: &[Complex],
) -> Result<Certificate<S>> {
    let instance = make_family(params, family, options)?;
    let w = family.width();
    let (a, w) = forward_substitute(&instance, n + w.max(2) - 1)?;
    let head = a[..=n].iter().map(|v| v.magnitude()).fold(0.0, f64::max);
    let tail: Vec<f64> = a[n + 1..].iter().map(|v| v.magnitude() / head).collect();
    let zero_tail = if S::EXACT {
        a[n + 1..].iter().all(|v| v.is_zero())
    } else {
        tail.iter().all(|t| *t <= TAIL_TOL)
    };
    if !zero_tail {
        let cond = termination_condition(&instance, n)?;
        let listed: Vec<String> = a[n + 1..]
            .iter()
            .enumerate()
            .map(|(k, v)| format!("a_{} = {}", n + 1 + k, v.to_repr()))
            .collect();
        return Err(Error::NotTerminated(format!(
            "{}; {} {}; remaining conditions: {}",
            cond.constraint,
            if cond.holds { "holds" } else { "fails" },
            format_args!("at N = {n}"),
            listed.join(", ")
        )));
    }
    let explicit = explicit_form(&instance, &a[..=n])?;
    let residual_poly = explicit_residual(params, &explicit);
    let residual_vanishes = residual_poly.as_ref().map(|r| {
        if S::EXACT {
            r.is_zero()
        } else {
            let scale = params.to_complex();
            let s = [scale.alpha, scale.gamma, scale.delta, scale.epsilon, scale.q]
                .iter()
                .map(|v| v.norm())
                .fold(1.0, f64::max);
            let pmag = match &explicit {
                ExplicitForm::Polynomial { coeffs } | ExplicitForm::QuasiPolynomial { coeffs, .. } => {
                    coeffs.iter().map(|v| v.magnitude()).fold(0.0, f64::max)
                }
                ExplicitForm::KummerSum { .. } => 0.0,
            };
            r.coeffs.iter().all(|v| v.magnitude() <= 1e-11 * s * s * pmag.max(1.0))
        }
    });
    let cparams = params.to_complex();
    let mut truncated = a.clone();
    for v in truncated.iter_mut().skip(n + 1) {
        *v = S::zero();
    }
    let solution = SeriesSolution {
        instance: instance.clone(),
        coefficients: truncated,
        terminated_at: Some(n),
        width: w,
    };
    let mut worst: f64 = 0.0;
    for &z in samples {
        let u = match explicit.eval(z) {
            Some(u) => u,
            None => series_u(&solution, z, 1e-15)?,
        };
        worst = worst.max(relative_dche_residual(&cparams, u, z)?);
    }
    let certified = residual_vanishes.unwrap_or(true) && worst <= RESIDUAL_TOL;
    Ok(Certificate {
        family,
        n,
        q: params.q.clone(),
        coefficients: a,
        tail,
        explicit,
        residual_vanishes,
        max_residual: worst,
        certified,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRoot {
    #[serde(with = "complex_obj")]
    pub value: Complex,
    /// Exact value when rational screening confirmed the root.
    pub exact: Option<ScalarRepr>,
    pub multiplicity: usize,
    /// `|a_{N+1}(q)|` after polishing, relative to the largest coefficient.
    pub polynomial_residual: f64,
    pub polished: bool,
    pub certificate: Option<Certificate<ScalarRepr>>,
    /// Why the certificate is missing or failed.
    pub diagnostic: Option<String>,
}

impl SpectrumRoot {
    pub fn certified(&self) -> bool {
        self.certificate.as_ref().is_some_and(|c| c.certified)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QSpectrum {
    pub family: FamilyId,
    pub n: usize,
    pub condition: String,
    /// Ascending coefficients of `a_{N+1}(q)`.
    pub polynomial: Vec<ScalarRepr>,
    pub roots: Vec<SpectrumRoot>,
    pub iterations: usize,
    pub converged: bool,
}

impl QSpectrum {
    pub fn degree(&self) -> usize {
        self.polynomial.len().saturating_sub(1)
    }

    pub fn root_count(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }
}

/// Rational root of `p` near `x`, confirmed by exact evaluation.
fn screen_rational(p: &Poly<Rational>, x: Complex) -> Option<Rational> {
    if x.im.abs() > 1e-8 * (1.0 + x.re.abs()) {
        return None;
    }
    let r = rationalize(x.re, 1_000_000)?;
    p.eval(&r).is_zero().then_some(r)
}

fn as_rational<S: Scalar>(p: &Poly<S>) -> Option<Poly<Rational>> {
    if !S::EXACT {
        return None;
    }
    p.coeffs
        .iter()
        .map(|c| Rational::from_repr(&c.to_repr()))
        .collect::<Option<Vec<_>>>()
        .map(Poly::new)
}

/// All roots of `a_{N+1}(q)` with a certificate for each.
pub fn q_spectrum<S: Scalar>(
    params: &DcheParams<S>,
    family: FamilyId,
    options: &FamilyOptions<S>,
    n: usize,
    tol: f64,
) -> Result<QSpectrum> {
    let qp = q_polynomial(params, family, options, n)?;
    let lead = qp.leading().clone();
    let condition = termination_condition(&make_family(&params.with_q(S::zero()), family, options)?, n)?.constraint;
    let cpoly: Vec<Complex> = lead.coeffs.iter().map(|c| c.to_complex()).collect();
    let cmax = cpoly.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let opts = RootOptions {
        tol: tol.min(1e-12),
        ..RootOptions::default()
    };
    let solve = if lead.degree() == 0 {
        crate::roots::RootSolve {
            roots: vec![],
            iterations: 0,
            converged: true,
        }
    } else {
        find_roots(&cpoly, &opts)
    };
    let exact_poly = as_rational(&lead);
    let samples = default_samples(20);
    let cp = Poly::new(cpoly.clone());
    let mut roots = Vec::with_capacity(solve.roots.len());
    for cluster in &solve.roots {
        let x = cluster.value;
        let res = cp.eval_complex(x).norm();
        let bound = tol * (1.0 + x.norm()).powi(n as i32 + 1) * cmax;
        let exact = exact_poly.as_ref().and_then(|p| screen_rational(p, x));
        let outcome = match &exact {
            Some(r) => {
                let q = S::from_repr(&r.to_repr()).expect("exact scalar");
                certify_finite_sum(&params.with_q(q), family, options, n, &samples).map(|c| c.to_repr())
            }
            None => {
                let cparams = params.to_complex().with_q(x);
                let copts = FamilyOptions {
                    alpha0: options.alpha0.as_ref().map(|v| v.to_complex()),
                    gamma0: options.gamma0.as_ref().map(|v| v.to_complex()),
                    other_branch: options.other_branch,
                };
                certify_finite_sum(&cparams, family, &copts, n, &samples).map(|c| c.to_repr())
            }
        };
        let (certificate, diagnostic) = match outcome {
            Ok(c) => {
                let d = (!c.certified)
                    .then(|| format!("finite-sum residual {:e} exceeds {RESIDUAL_TOL:e}", c.max_residual));
                (Some(c), d)
            }
            Err(e) => (None, Some(e.to_string())),
        };
        let diagnostic = if solve.converged {
            diagnostic
        } else {
            Some(format!("root iteration stalled; {}", diagnostic.unwrap_or_default()))
        };
        roots.push(SpectrumRoot {
            value: x,
            exact: exact.map(|r| r.to_repr()),
            multiplicity: cluster.multiplicity,
            polynomial_residual: res / cmax.max(f64::MIN_POSITIVE),
            polished: res <= bound || exact_poly.is_some() && res == 0.0,
            certificate: if solve.converged {
                certificate
            } else {
                certificate.map(|mut c| {
                    c.certified = false;
                    c
                })
            },
            diagnostic,
        });
    }
    Ok(QSpectrum {
        family,
        n,
        condition,
        polynomial: lead.coeffs.iter().map(|c| c.to_repr()).collect(),
        roots,
        iterations: solve.iterations,
        converged: solve.converged,
    })
}

/// Right-termination check for families whose conditions are only
/// reported: `P_N = 0` and the trailing coefficients that must also vanish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationReport {
    pub condition: TerminationCondition,
    /// `a_{N+1}..a_{N+w−1}`
    pub remaining: Vec<ScalarRepr>,
    /// Same, relative to `max_{m≤N}|a_m|`.
    pub relative: Vec<f64>,
}

pub fn termination_report<S: Scalar>(instance: &FamilyInstance<S>, n: usize) -> Result<TerminationReport> {
    let condition = termination_condition(instance, n)?;
    let w = RowSource::new(instance)?.width();
    let (a, _) = forward_substitute(instance, n + w - 1)?;
    let head = a[..=n].iter().map(|v| v.magnitude()).fold(0.0, f64::max);
    Ok(TerminationReport {
        condition,
        remaining: a[n + 1..].iter().map(|v| v.to_repr()).collect(),
        relative: a[n + 1..].iter().map(|v| v.magnitude() / head).collect(),
    })
}

/// `u` of a certified finite sum through the series machinery, for
/// comparison with the explicit form.
pub fn finite_sum_value<S: Scalar>(
    certificate: &Certificate<S>,
    params: &DcheParams<S>,
    options: &FamilyOptions<S>,
    z: Complex,
) -> Result<Complex> {
    let instance = make_family(params, certificate.family, options)?;
    let mut a = certificate.coefficients.clone();
    a.truncate(certificate.n + 1);
    let solution = SeriesSolution {
        width: instance.family.width(),
        instance,
        coefficients: a,
        terminated_at: Some(certificate.n),
    };
    Ok(evaluate_u(&solution, z, 1e-15)?.value())
}
