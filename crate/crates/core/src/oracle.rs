//! Independent checks: residuals of the equations and direct numerical
//! integration along straight complex paths.
//!
//! The integrator is the Dormand–Prince 5(4) embedded pair applied to the
//! first-order system `(u, u′)` parameterized by `z(t) = z_a + t(z_b − z_a)`.
//! The global error is estimated by repeating the run at half the tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansions::{evaluate_mapped_u, evaluate_u, DcheParams, SeriesSolution, Target, VEquation};
use crate::recurrence::PolyOde;
use crate::scalar::{complex_obj, format_complex, Complex, Scalar};

/// Closest approach allowed between the path and a singular point.
pub const PATH_CLEARANCE: f64 = 1e-3;
const MIN_STEP: f64 = 1e-14;
const MAX_STEPS: usize = 2_000_000;

/// `u″ + (δ/z² + γ/z + ε)u′ + ((αz − q)/z²)u`
pub fn dche_residual<S: Scalar>(params: &DcheParams<S>, u: &S, du: &S, d2u: &S, z: &S) -> Result<S> {
    if z.is_zero() {
        return Err(Error::DomainError("z = 0 is a singular point".into()));
    }
    let p = params;
    let z2 = z.clone() * z.clone();
    let c1 = p.delta.clone() / z2.clone() + p.gamma.clone() / z.clone() + p.epsilon.clone();
    let c0 = (p.alpha.clone() * z.clone() - p.q.clone()) / z2;
    Ok(d2u.clone() + c1 * du.clone() + c0 * u.clone())
}

/// `v″ − (δ/z² + (γ−2)/z + ε + 1/(z − q/α))v′ + ((αz − q)/z²)v`; the
/// `1/(z − z₀)` term is absent when `α = 0`.
pub fn v_equation_residual<S: Scalar>(veq: &VEquation<S>, v: &S, dv: &S, d2v: &S, z: &S) -> Result<S> {
    if z.is_zero() {
        return Err(Error::DomainError("z = 0 is a singular point".into()));
    }
    let p = &veq.params;
    let z2 = z.clone() * z.clone();
    let mut c1 = p.delta.clone() / z2.clone() + (p.gamma.clone() - S::from_i64(2)) / z.clone() + p.epsilon.clone();
    if let Some(z0) = &veq.z0 {
        let d = z.clone() - z0.clone();
        if d.is_zero() {
            return Err(Error::DomainError(
                "z coincides with the apparent singularity q/α".into(),
            ));
        }
        c1 = c1 + S::one() / d;
    }
    let c0 = (p.alpha.clone() * z.clone() - p.q.clone()) / z2;
    Ok(d2v.clone() - c1 * dv.clone() + c0 * v.clone())
}

/// Relative size of a residual against the terms it balances.
pub fn relative_dche_residual(params: &DcheParams<Complex>, u: [Complex; 3], z: Complex) -> Result<f64> {
    let r = dche_residual(params, &u[0], &u[1], &u[2], &z)?;
    let p = params;
    let scale = (z * z * u[2])
        .norm()
        .max(((p.epsilon * z * z + p.gamma * z + p.delta) * u[1]).norm())
        .max(((p.alpha * z - p.q) * u[0]).norm());
    Ok((z * z * r).norm() / scale.max(f64::MIN_POSITIVE))
}

/// Second-order equation to integrate.
#[derive(Debug, Clone, PartialEq)]
pub enum OdeSystem {
    Dche(DcheParams<Complex>),
    VEquation(VEquation<Complex>),
    Poly(PolyOde<Complex>),
}

impl OdeSystem {
    fn second_derivative(&self, z: Complex, u: Complex, du: Complex) -> Complex {
        let zero = Complex::new(0.0, 0.0);
        match self {
            OdeSystem::Dche(p) => u_second(p, z, u, du),
            OdeSystem::VEquation(v) => {
                v_equation_residual(v, &u, &du, &zero, &z).unwrap_or(Complex::new(f64::NAN, 0.0)) * -1.0
            }
            OdeSystem::Poly(ode) => {
                -(ode.p1.eval_complex(z) * du + ode.p0.eval_complex(z) * u) / ode.p2.eval_complex(z)
            }
        }
    }

    fn singular_points(&self) -> Vec<Complex> {
        let zero = Complex::new(0.0, 0.0);
        match self {
            OdeSystem::Dche(_) => vec![zero],
            OdeSystem::VEquation(v) => {
                let mut pts = vec![zero];
                pts.extend(v.z0);
                pts
            }
            OdeSystem::Poly(ode) => {
                let solve = crate::roots::find_roots(&ode.p2.coeffs, &Default::default());
                solve.roots.into_iter().map(|c| c.value).collect()
            }
        }
    }
}

fn u_second(p: &DcheParams<Complex>, z: Complex, u: Complex, du: Complex) -> Complex {
    let zero = Complex::new(0.0, 0.0);
    -dche_residual(p, &u, &du, &zero, &z).unwrap_or(Complex::new(f64::NAN, 0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvpSpec {
    pub system: OdeSystem,
    pub za: Complex,
    pub u: Complex,
    pub du: Complex,
    pub zb: Complex,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvpResult {
    #[serde(with = "complex_obj")]
    pub u: Complex,
    #[serde(with = "complex_obj")]
    pub du: Complex,
    pub error_estimate: f64,
    pub steps: usize,
}

fn distance_to_segment(p: Complex, a: Complex, b: Complex) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * ab.conj()).re / len2;
    (p - (a + ab * t.clamp(0.0, 1.0))).norm()
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn run(spec: &IvpSpec, tol: f64) -> Result<(Complex, Complex, usize)> {
    let dz = spec.zb - spec.za;
    let f = |t: f64, y: [Complex; 2]| -> [Complex; 2] {
        let z = spec.za + dz * t;
        [dz * y[1], dz * spec.system.second_derivative(z, y[0], y[1])]
    };
    let mut t = 0.0;
    let mut y = [spec.u, spec.du];
    let mut h: f64 = 0.01;
    let mut steps = 0;
    let mut k = [[Complex::new(0.0, 0.0); 2]; 7];
    while t < 1.0 {
        if steps > MAX_STEPS {
            return Err(Error::StepUnderflow(format_complex(spec.za + dz * t)));
        }
        h = h.min(1.0 - t);
        k[0] = f(t, y);
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for c in 0..2 {
                    ys[c] += kj[c] * (h * A[s][j]);
                }
            }
            k[s] = f(t + C[s] * h, ys);
        }
        let mut y5 = y;
        let mut err: f64 = 0.0;
        for c in 0..2 {
            let mut e = Complex::new(0.0, 0.0);
            for s in 0..7 {
                y5[c] += k[s][c] * (h * B5[s]);
                e += k[s][c] * (h * (B5[s] - B4[s]));
            }
            let sc = tol * (1.0 + y[c].norm().max(y5[c].norm()));
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            h *= 0.25;
        } else if err <= 1.0 {
            t += h;
            y = y5;
            steps += 1;
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= grow;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
        if h < MIN_STEP {
            return Err(Error::StepUnderflow(format_complex(spec.za + dz * t)));
        }
    }
    Ok((y[0], y[1], steps))
}

pub fn integrate(spec: &IvpSpec) -> Result<IvpResult> {
    for p in spec.system.singular_points() {
        if distance_to_segment(p, spec.za, spec.zb) < PATH_CLEARANCE {
            return Err(Error::PathViolation(format!(
                "path passes within {PATH_CLEARANCE} of z = {}",
                format_complex(p)
            )));
        }
    }
    if spec.za == spec.zb {
        return Ok(IvpResult {
            u: spec.u,
            du: spec.du,
            error_estimate: 0.0,
            steps: 0,
        });
    }
    let (u, du, steps) = run(spec, spec.tol)?;
    let (u2, du2, _) = run(spec, spec.tol / 2.0)?;
    let error_estimate =
        ((u - u2).norm() / u2.norm().max(f64::MIN_POSITIVE)).max((du - du2).norm() / du2.norm().max(f64::MIN_POSITIVE));
    Ok(IvpResult {
        u,
        du,
        error_estimate,
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    #[serde(with = "complex_obj")]
    pub z: Complex,
    #[serde(with = "complex_obj")]
    pub series: Complex,
    #[serde(with = "complex_obj")]
    pub integrated: Complex,
    pub deviation: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    #[serde(with = "complex_obj")]
    pub anchor: Complex,
    pub rows: Vec<CompareRow>,
    pub max_deviation: f64,
}

/// `(u, u′, u″)` of a series solution, mapping v-series through `u = g·v′`.
pub fn series_u<S: Scalar>(solution: &SeriesSolution<S>, z: Complex, tol: f64) -> Result<[Complex; 3]> {
    match solution.instance.target {
        Target::UEquation => {
            let v = evaluate_u(solution, z, tol)?;
            Ok([v.derivatives[0], v.derivatives[1], v.derivatives[2]])
        }
        Target::VEquation => {
            let (v, u) = evaluate_mapped_u(solution, z, tol)?;
            if !v.converged {
                return Err(Error::SlowConvergence {
                    tail: v.tail,
                    terms: v.terms_used,
                });
            }
            Ok(u)
        }
    }
}

/// Seeds the integrator with the series at `anchor` and compares `u` at
/// each target.
pub fn compare_series_vs_integration<S: Scalar>(
    solution: &SeriesSolution<S>,
    anchor: Complex,
    targets: &[Complex],
    tol: f64,
) -> Result<CompareReport> {
    let series_tol = 1e-15;
    let seed = series_u(solution, anchor, series_tol)?;
    let params = solution.instance.params.to_complex();
    let mut rows = Vec::with_capacity(targets.len());
    let mut worst: f64 = 0.0;
    for &zb in targets {
        let spec = IvpSpec {
            system: OdeSystem::Dche(params.clone()),
            za: anchor,
            u: seed[0],
            du: seed[1],
            zb,
            tol,
        };
        let res = integrate(&spec)?;
        let s = series_u(solution, zb, series_tol)?[0];
        let deviation = (res.u - s).norm() / s.norm().max(res.u.norm()).max(f64::MIN_POSITIVE);
        worst = worst.max(deviation);
        rows.push(CompareRow {
            z: zb,
            series: s,
            integrated: res.u,
            deviation,
            error_estimate: res.error_estimate,
        });
    }
    Ok(CompareReport {
        anchor,
        rows,
        max_deviation: worst,
    })
}
