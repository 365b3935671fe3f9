//! Contiguous-relation rewriting and recurrence derivation.
//!
//! A solution is sought as `Σ a_n u_n` with `u_n = ₁F₁(α_n; γ_n; s₀z)`.
//! Substituting into `P₂u″ + P₁u′ + P₀u = 0` and eliminating `u_n″` through
//! Kummer's equation `z·u_n″ = −(γ_n − s₀z)u_n′ + α_n s₀ u_n` leaves a
//! combination of monomials `z^k·u_n^{(d)}`, `d ≤ 1`. Each monomial is
//! rewritten by the contiguous relations of the chosen basis into a finite
//! stencil `Σ_j c_j(n) u_{n+j}`. Collecting the coefficient of each `u_m`
//! yields the recurrence row.
//!
//! Monomials a basis cannot absorb are carried as residues; they must vanish
//! at every index or the derivation is rejected. This is where parameter
//! locks such as `s₀ = −ε`, `α₀ = α/ε` come from.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{affine_poly_add, affine_poly_from, poly_times_affine, Affine, AffinePoly, Poly};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    /// `₁F₁(α₀+n; γ₀+n; s₀z)`
    BothShift,
    /// `₁F₁(α₀+n; γ₀; s₀z)`
    AShift,
    /// `₁F₁(α₀; γ₀+n; s₀z)`
    BShift,
}

impl BasisKind {
    pub fn shifts_upper(self) -> bool {
        matches!(self, BasisKind::BothShift | BasisKind::AShift)
    }

    pub fn shifts_lower(self) -> bool {
        matches!(self, BasisKind::BothShift | BasisKind::BShift)
    }

    /// Offsets a reducible monomial can reach; `None` when irreducible.
    pub fn support(self, k: usize, d: usize) -> Option<RangeInclusive<i64>> {
        let k = k as i64;
        match (self, k, d) {
            (_, 0, 0) => Some(0..=0),
            (BasisKind::BothShift, 0, 1) => Some(1..=1),
            (BasisKind::BothShift, 1, 1) => Some(-1..=0),
            (BasisKind::AShift, k, 0) => Some(-k..=k),
            (BasisKind::AShift, k, 1) if k >= 1 => Some(-(k - 1)..=k),
            (BasisKind::BShift, 1, 1) => Some(-1..=0),
            (BasisKind::BShift, 0, 1) => Some(0..=1),
            _ => None,
        }
    }
}

/// Basis pattern with its resolved constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis<S> {
    pub kind: BasisKind,
    pub alpha0: S,
    pub gamma0: S,
    pub s0: S,
}

impl<S: Scalar> Basis<S> {
    pub fn new(kind: BasisKind, alpha0: S, gamma0: S, s0: S) -> Result<Self> {
        if s0.is_zero() {
            return Err(Error::InvalidInput("basis scale s₀ must be nonzero".into()));
        }
        Ok(Basis {
            kind,
            alpha0,
            gamma0,
            s0,
        })
    }

    pub fn alpha_affine(&self) -> Affine<S> {
        Affine {
            c0: self.alpha0.clone(),
            c1: if self.kind.shifts_upper() { S::one() } else { S::zero() },
        }
    }

    pub fn gamma_affine(&self) -> Affine<S> {
        Affine {
            c0: self.gamma0.clone(),
            c1: if self.kind.shifts_lower() { S::one() } else { S::zero() },
        }
    }

    pub fn alpha_n(&self, n: i64) -> S {
        self.alpha_affine().at(n)
    }

    pub fn gamma_n(&self, n: i64) -> S {
        self.gamma_affine().at(n)
    }

    fn nonzero_gamma(&self, n: i64) -> Result<S> {
        let g = self.gamma_n(n);
        let scale = 1.0 + self.gamma0.magnitude() + n.unsigned_abs() as f64;
        if g.is_negligible(scale) {
            return Err(Error::DivisionByZero {
                n,
                what: format!("γ_{n} = 0"),
            });
        }
        Ok(g)
    }
}

/// The monomial `coeff·z^k·u_n^{(d)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTerm<S> {
    pub k: usize,
    pub d: usize,
    pub coeff: S,
}

pub fn monomial_name(k: usize, d: usize) -> String {
    let u = if d == 1 { "u_n'" } else { "u_n" };
    match k {
        0 => u.to_string(),
        1 => format!("z·{u}"),
        _ => format!("z^{k}·{u}"),
    }
}

/// Finite map `offset → coefficient`, recorded for index `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftStencil<S> {
    pub n: i64,
    pub entries: BTreeMap<i64, S>,
}

impl<S: Scalar> ShiftStencil<S> {
    pub fn new(n: i64) -> Self {
        ShiftStencil {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn get(&self, offset: i64) -> S {
        self.entries.get(&offset).cloned().unwrap_or_else(S::zero)
    }

    pub fn add(&mut self, offset: i64, value: S) {
        let slot = self.entries.entry(offset).or_insert_with(S::zero);
        *slot = slot.clone() + value;
    }

    pub fn width(&self) -> usize {
        match (self.entries.keys().next(), self.entries.keys().next_back()) {
            (Some(lo), Some(hi)) => (hi - lo + 1) as usize,
            _ => 0,
        }
    }
}

/// Result of rewriting one monomial: the stencil plus any irreducible
/// leftovers.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction<S> {
    pub stencil: ShiftStencil<S>,
    pub residue: Vec<SymTerm<S>>,
}

type Absolute<S> = BTreeMap<i64, S>;

fn accumulate<S: Scalar>(map: &mut Absolute<S>, m: i64, v: S) {
    let slot = map.entry(m).or_insert_with(S::zero);
    *slot = slot.clone() + v;
}

/// `z·Σ c_m u_m` for the upper-shift basis.
fn z_times<S: Scalar>(basis: &Basis<S>, src: &Absolute<S>) -> Absolute<S> {
    let mut out = BTreeMap::new();
    for (&m, c) in src {
        let am = basis.alpha_n(m);
        let g0 = basis.gamma0.clone();
        let s0 = basis.s0.clone();
        accumulate(&mut out, m - 1, c.clone() * (am.clone() - g0.clone()) / s0.clone());
        accumulate(&mut out, m, c.clone() * (g0 - S::from_i64(2) * am.clone()) / s0.clone());
        accumulate(&mut out, m + 1, c.clone() * am / s0);
    }
    out
}

/// Rewrites `z^k·u_n^{(d)}` (unit coefficient) into absolute-index form.
fn reduce_unit<S: Scalar>(basis: &Basis<S>, n: i64, k: usize, d: usize) -> Result<(Absolute<S>, Vec<SymTerm<S>>)> {
    let an = basis.alpha_n(n);
    let s0 = basis.s0.clone();
    let one = S::one();
    let irreducible = Err(Error::Irreducible { k, d });
    if k == 0 && d == 0 {
        return Ok((BTreeMap::from([(n, one)]), vec![]));
    }
    match basis.kind {
        BasisKind::BothShift => match (k, d) {
            (0, 1) => {
                let gn = basis.nonzero_gamma(n)?;
                Ok((BTreeMap::from([(n + 1, s0 * an / gn)]), vec![]))
            }
            (1, 1) => {
                let g1 = basis.gamma_n(n) - one;
                let residue = SymTerm { k: 1, d: 0, coeff: s0 };
                Ok((BTreeMap::from([(n - 1, g1.clone()), (n, -g1)]), vec![residue]))
            }
            _ => irreducible,
        },
        BasisKind::AShift => {
            let (mut map, zpow) = match d {
                0 => (BTreeMap::from([(n, one)]), k),
                _ if k >= 1 => (BTreeMap::from([(n + 1, an.clone()), (n, -an)]), k - 1),
                _ => return irreducible,
            };
            for _ in 0..zpow {
                map = z_times(basis, &map);
            }
            Ok((map, vec![]))
        }
        BasisKind::BShift => match (k, d) {
            (1, 1) => {
                let g1 = basis.gamma_n(n) - one;
                Ok((BTreeMap::from([(n - 1, g1.clone()), (n, -g1)]), vec![]))
            }
            (0, 1) => {
                let gn = basis.nonzero_gamma(n)?;
                let lead = one - basis.alpha0.clone() / gn;
                Ok((BTreeMap::from([(n, s0.clone()), (n + 1, -(s0 * lead))]), vec![]))
            }
            _ => irreducible,
        },
    }
}

/// Rewrites `coeff·z^k·u_n^{(d)}` as `Σ_j c_j u_{n+j}` plus irreducible
/// residues. Only the upper-and-lower shift basis ever produces a residue:
/// `z·u_n′` is reduced jointly as `z(u_n′ − s₀u_n) + s₀·z·u_n`.
pub fn reduce_term<S: Scalar>(basis: &Basis<S>, n: i64, term: &SymTerm<S>) -> Result<Reduction<S>> {
    if term.d > 1 {
        return Err(Error::Irreducible { k: term.k, d: term.d });
    }
    let (map, residue) = reduce_unit(basis, n, term.k, term.d)?;
    let mut stencil = ShiftStencil::new(n);
    for (m, v) in map {
        stencil.add(m - n, term.coeff.clone() * v);
    }
    let residue = residue
        .into_iter()
        .map(|r| SymTerm {
            coeff: r.coeff * term.coeff.clone(),
            ..r
        })
        .collect();
    Ok(Reduction { stencil, residue })
}

/// `P₂(z)u″ + P₁(z)u′ + P₀(z)u = 0` with polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyOde<S> {
    pub p2: Poly<S>,
    pub p1: Poly<S>,
    pub p0: Poly<S>,
    /// Apparent singular point carried by the equation, if any.
    pub z0: Option<S>,
    /// Factor used to clear the rational form, e.g. `z^2`.
    pub cleared_by: String,
}

impl<S: Scalar> PolyOde<S> {
    pub fn new(p2: Poly<S>, p1: Poly<S>, p0: Poly<S>) -> Result<Self> {
        if p2.is_zero() {
            return Err(Error::InvalidInput("P₂ must not vanish identically".into()));
        }
        Ok(PolyOde {
            p2,
            p1,
            p0,
            z0: None,
            cleared_by: "1".into(),
        })
    }

    /// `z²u″ + (εz² + γz + δ)u′ + (αz − q)u = 0`.
    pub fn dche(alpha: &S, gamma: &S, delta: &S, epsilon: &S, q: &S) -> Self {
        PolyOde {
            p2: Poly::new(vec![S::zero(), S::zero(), S::one()]),
            p1: Poly::new(vec![delta.clone(), gamma.clone(), epsilon.clone()]),
            p0: Poly::new(vec![-q.clone(), alpha.clone()]),
            z0: None,
            cleared_by: "z^2".into(),
        }
    }

    /// The equation for `v = z^γ e^{εz−δ/z} u′`, cleared by `z²(z − z₀)`
    /// with `z₀ = q/α`.
    pub fn v_equation(alpha: &S, gamma: &S, delta: &S, epsilon: &S, q: &S) -> Result<Self> {
        if alpha.is_zero() {
            return Err(Error::FamilyInapplicable(
                "requires α ≠ 0 (apparent singularity q/α)".into(),
            ));
        }
        let z0 = q.clone() / alpha.clone();
        let zmz0 = Poly::new(vec![-z0.clone(), S::one()]);
        let z2 = Poly::new(vec![S::zero(), S::zero(), S::one()]);
        let inner = Poly::new(vec![delta.clone(), gamma.clone() - S::from_i64(2), epsilon.clone()]);
        let p1 = inner.mul(&zmz0).add(&z2).scale(&-S::one());
        let p0 = Poly::new(vec![-q.clone(), alpha.clone()]).mul(&zmz0);
        Ok(PolyOde {
            p2: z2.mul(&zmz0),
            p1,
            p0,
            z0: Some(z0),
            cleared_by: "z^2·(z−z₀)".into(),
        })
    }

    pub fn times_z(&self) -> Self {
        PolyOde {
            p2: self.p2.shift(1),
            p1: self.p1.shift(1),
            p0: self.p0.shift(1),
            z0: self.z0.clone(),
            cleared_by: format!("{}·z", self.cleared_by),
        }
    }

    pub fn scale(&self) -> f64 {
        [&self.p2, &self.p1, &self.p0]
            .iter()
            .flat_map(|p| p.coeffs.iter())
            .map(|c| c.magnitude())
            .fold(0.0, f64::max)
    }
}

/// The equation with `u_n″` eliminated: `C₁(z, n)·u_n′ + C₀(z, n)·u_n`,
/// coefficients affine in `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Elimination<S> {
    /// Extra factor applied to the equation: `1`, or `z` when `z ∤ P₂`.
    pub multiplier: String,
    pub c1: AffinePoly<S>,
    pub c0: AffinePoly<S>,
}

impl<S: Scalar> Elimination<S> {
    pub fn terms_at(&self, n: i64) -> Vec<SymTerm<S>> {
        let mut out = Vec::new();
        for (d, poly) in [(1usize, &self.c1), (0usize, &self.c0)] {
            for (k, c) in poly.iter().enumerate() {
                let coeff = c.at(n);
                if !coeff.is_zero() {
                    out.push(SymTerm { k, d, coeff });
                }
            }
        }
        out
    }

    pub fn coefficient(&self, k: usize, d: usize) -> Affine<S> {
        let poly = if d == 1 { &self.c1 } else { &self.c0 };
        poly.get(k).cloned().unwrap_or_else(Affine::zero)
    }
}

pub fn eliminate_second_derivative<S: Scalar>(ode: &PolyOde<S>, basis: &Basis<S>) -> Elimination<S> {
    let (q, r, p0, multiplier) = match ode.p2.div_z() {
        Some(q) => (q, ode.p1.clone(), ode.p0.clone(), "1"),
        None => (ode.p2.clone(), ode.p1.shift(1), ode.p0.shift(1), "z"),
    };
    let s0 = basis.s0.clone();
    let c1 = affine_poly_add(
        &affine_poly_from(&r.add(&q.shift(1).scale(&s0))),
        &poly_times_affine(&q, &basis.gamma_affine().scale(&-S::one())),
    );
    let c0 = affine_poly_add(
        &affine_poly_from(&p0),
        &poly_times_affine(&q.scale(&s0), &basis.alpha_affine()),
    );
    Elimination {
        multiplier: multiplier.into(),
        c1,
        c0,
    }
}

/// A derived recurrence: the structural window plus per-index evaluation.
///
/// With `E_n = Σ_j c_j(n) u_{n+j}` over the window `jmin..=jmax`, the
/// letters at `n` are `ℓ_i(n) = c_{jmin+i}(n)` and the row at `n` reads
/// `Σ_i ℓ_i(n−i)·a_{n−i} = 0`; `ℓ_0` is the leading letter solved for `a_n`.
#[derive(Debug, Clone)]
pub struct Derivation<S> {
    pub basis: Basis<S>,
    pub elimination: Elimination<S>,
    pub jmin: i64,
    pub jmax: i64,
    terms: Vec<(usize, usize, Affine<S>)>,
    scale: f64,
}

impl<S: Scalar> Derivation<S> {
    pub fn new(ode: &PolyOde<S>, basis: Basis<S>) -> Result<Self> {
        let elimination = eliminate_second_derivative(ode, &basis);
        let scale = (ode.scale() + 1.0)
            * (1.0 + basis.s0.magnitude())
            * (1.0 + basis.alpha0.magnitude() + basis.gamma0.magnitude());
        let mut terms = Vec::new();
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for (d, poly) in [(1usize, &elimination.c1), (0usize, &elimination.c0)] {
            for (k, c) in poly.iter().enumerate() {
                if c.vanishes(scale) {
                    continue;
                }
                if let Some(range) = basis.kind.support(k, d) {
                    lo = lo.min(*range.start());
                    hi = hi.max(*range.end());
                }
                terms.push((k, d, c.clone()));
            }
        }
        if lo > hi {
            return Err(Error::IrreducibleResidual(
                "no monomial of the equation is reducible in this basis".into(),
            ));
        }
        Ok(Derivation {
            basis,
            elimination,
            jmin: lo,
            jmax: hi,
            terms,
            scale,
        })
    }

    pub fn width(&self) -> usize {
        (self.jmax - self.jmin + 1) as usize
    }

    /// `E_n` expanded over `u_{n+j}` for every offset in the window.
    pub fn stencil_at(&self, n: i64) -> Result<ShiftStencil<S>> {
        let mut stencil = ShiftStencil::new(n);
        for j in self.jmin..=self.jmax {
            stencil.entries.insert(j, S::zero());
        }
        let mut residues: BTreeMap<(usize, usize), S> = BTreeMap::new();
        for (k, d, c) in &self.terms {
            let coeff = c.at(n);
            let term = SymTerm {
                k: *k,
                d: *d,
                coeff: coeff.clone(),
            };
            if self.basis.kind.support(*k, *d).is_none() {
                accumulate_residue(&mut residues, *k, *d, coeff);
                continue;
            }
            if coeff.is_zero() {
                continue;
            }
            let red = reduce_term(&self.basis, n, &term)?;
            for (j, v) in red.stencil.entries {
                stencil.add(j, v);
            }
            for r in red.residue {
                accumulate_residue(&mut residues, r.k, r.d, r.coeff);
            }
        }
        let tol_scale = self.scale * (1.0 + n.unsigned_abs() as f64);
        for ((k, d), v) in residues {
            if !v.is_negligible(tol_scale) {
                return Err(Error::IrreducibleResidual(format!(
                    "{} coefficient nonzero",
                    monomial_name(k, d)
                )));
            }
        }
        Ok(stencil)
    }

    pub fn letters(&self, n: i64) -> Result<Vec<S>> {
        let st = self.stencil_at(n)?;
        Ok((self.jmin..=self.jmax).map(|j| st.get(j)).collect())
    }

    /// Letters over `width` offsets from `jmin`; offsets past the derived
    /// window are zero.
    pub fn letters_padded(&self, n: i64, width: usize) -> Result<Vec<S>> {
        let st = self.stencil_at(n)?;
        Ok((0..width as i64).map(|i| st.get(self.jmin + i)).collect())
    }

    /// The recurrence row at `n`, keyed by `−i` for the coefficient of
    /// `a_{n−i}`; indices below zero are omitted.
    pub fn row_at(&self, n: i64) -> Result<ShiftStencil<S>> {
        let mut row = ShiftStencil::new(n);
        for i in 0..self.width() as i64 {
            if n - i < 0 {
                break;
            }
            let letters = self.letters(n - i)?;
            row.entries.insert(-i, letters[i as usize].clone());
        }
        Ok(row)
    }

    /// Tolerance scale for zero tests on entries near index `n`.
    pub fn entry_scale(&self, n: i64) -> f64 {
        self.scale * (1.0 + n.unsigned_abs() as f64).powi(4)
    }
}

fn accumulate_residue<S: Scalar>(map: &mut BTreeMap<(usize, usize), S>, k: usize, d: usize, v: S) {
    let slot = map.entry((k, d)).or_insert_with(S::zero);
    *slot = slot.clone() + v;
}

pub fn derive_recurrence<S: Scalar>(ode: &PolyOde<S>, basis: &Basis<S>, n: i64) -> Result<ShiftStencil<S>> {
    Derivation::new(ode, basis.clone())?.row_at(n)
}
