//! Fejér–Riesz spectral factorization of strictly positive trigonometric
//! polynomials, scalar and parametric.
//!
//! For `q(z) = Σ_{|k|≤K} b_k zᵏ` real and strictly positive on the circle,
//! the roots of `z^K q(z)` split into `K` inside and `K` outside the unit
//! circle, and the outer ones assemble the analytic factor
//!
//! ```text
//! g(z) = |b_K/(z_1⋯z_K)|^{1/2} · Π (z − z_i),   |g(z)|² = q(z) on T.
//! ```
//!
//! The parametric version factors `p(x, z)` pointwise over an `x` grid,
//! trimming degenerate leading coefficients per point (the stratification
//! by the first nonvanishing leading coefficient) and recording which
//! stratum each point landed in. Roots are found by the companion-matrix
//! QR iteration in [`crate::linalg`]; borderline roots inside the annulus
//! `[1−tol, 1+tol]` are a hard error since the strict-positivity hypothesis
//! excludes circle roots.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::base::{BaseFunction, BasePoint, BaseSystem};
use crate::error::Error;
use crate::linalg::polynomial_roots;
use crate::util::circle_grid;
use crate::Result;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Grid used for positivity gates and residual checks.
pub const VERIFY_GRID: usize = 4096;

/// Trigonometric (Laurent) polynomial `Σ_{|k|≤K} b_k zᵏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentPoly {
    degree: usize,
    /// `coeffs[i]` is the coefficient of `z^(i − K)`.
    #[serde(with = "crate::util::cvec")]
    coeffs: Vec<Complex64>,
}

impl LaurentPoly {
    pub fn new(degree: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * degree + 1 {
            return Err(Error::invalid(format!(
                "degree {degree} needs {} coefficients, got {}",
                2 * degree + 1,
                coeffs.len()
            )));
        }
        Ok(Self { degree, coeffs })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        let pairs: Vec<_> = pairs.into_iter().collect();
        let degree = pairs.iter().map(|(k, _)| k.unsigned_abs()).max().unwrap_or(0) as usize;
        let mut coeffs = vec![ZERO; 2 * degree + 1];
        for (k, c) in pairs {
            coeffs[(k + degree as i64) as usize] += c;
        }
        Self { degree, coeffs }
    }

    pub fn constant(c: Complex64) -> Self {
        Self {
            degree: 0,
            coeffs: vec![c],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.degree {
            return ZERO;
        }
        self.coeffs[(k + self.degree as i64) as usize]
    }

    pub fn coeff_pairs(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let k0 = self.degree as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - k0, c))
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        // Horner on the analytic part plus Horner in 1/z on the rest.
        let k = self.degree;
        let mut pos = ZERO;
        for i in (k..self.coeffs.len()).rev() {
            pos = pos * z + self.coeffs[i];
        }
        let zinv = z.inv();
        let mut neg = ZERO;
        for i in 0..k {
            neg = (neg + self.coeffs[i]) * zinv;
        }
        pos + neg
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|&b| c * b).collect(),
        }
    }

    /// Max deviation from Hermitian symmetry `b_{-k} = conj(b_k)`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut d = self.coeff(0).im.abs();
        for k in 1..=self.degree as i64 {
            d = d.max((self.coeff(-k) - self.coeff(k).conj()).norm());
        }
        d
    }

    /// Min and max of `Re q(z)` over an equispaced circle grid.
    pub fn range_on_grid(&self, grid_size: usize) -> (f64, f64) {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for z in circle_grid(grid_size) {
            let v = self.evaluate(z).re;
            min = min.min(v);
            max = max.max(v);
        }
        (min, max)
    }
}

/// Analytic polynomial `g(z) = Σ_{k=0}^{K} a_k zᵏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticFactor {
    #[serde(with = "crate::util::cvec")]
    coeffs: Vec<Complex64>,
}

impl AnalyticFactor {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let mut s = ZERO;
        for &c in self.coeffs.iter().rev() {
            s = s * z + c;
        }
        s
    }

    /// `|g(z)|²` as a Laurent polynomial: `b_m = Σ_l a_{l+m}·conj(a_l)`.
    pub fn modulus_squared(&self) -> LaurentPoly {
        let k = self.degree() as i64;
        LaurentPoly::from_pairs((-k..=k).map(|m| {
            let mut s = ZERO;
            for l in 0..=self.degree() as i64 {
                let lm = l + m;
                if (0..=self.degree() as i64).contains(&lm) {
                    s += self.coeffs[lm as usize] * self.coeffs[l as usize].conj();
                }
            }
            (m, s)
        }))
    }
}

/// Output of the scalar factorization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Factorization {
    pub factor: AnalyticFactor,
    /// Selected roots, all with `|z| > 1 + tol`.
    #[serde(with = "crate::util::cvec")]
    pub roots: Vec<Complex64>,
    /// Max of `||g(z)|² − q(z)|` over the verification grid.
    pub residual: f64,
    /// Effective degree after trimming leading coefficients `≤ tol`.
    pub effective_degree: usize,
}

/// Splits roots of `z^K q(z)` into the outer ones; errors on circle-adjacent
/// roots or a wrong outer count.
fn select_outer_roots(roots: Vec<Complex64>, k: usize, tol: f64) -> Result<Vec<Complex64>> {
    let mut outer = Vec::with_capacity(k);
    for r in roots {
        let m = r.norm();
        if (m - 1.0).abs() <= tol {
            return Err(Error::RootOnCircle { root: r, tol });
        }
        if m > 1.0 {
            outer.push(r);
        }
    }
    if outer.len() != k {
        return Err(Error::RootCount {
            selected: outer.len(),
            expected: k,
        });
    }
    Ok(outer)
}

/// Scalar Fejér–Riesz factorization of a strictly positive real
/// trigonometric polynomial.
///
/// The factor is normalized so that `a_0` is real and nonnegative (the
/// factorization is otherwise unique only up to a unimodular scalar).
pub fn fejer_riesz_scalar(q: &LaurentPoly, tol: f64) -> Result<Factorization> {
    if tol <= 0.0 {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let hd = q.hermitian_defect();
    if hd > 1e-9 * (1.0 + q.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)) {
        return Err(Error::invalid(format!(
            "input is not real-valued on the circle: Hermitian defect {hd:e}"
        )));
    }
    let (min, _) = q.range_on_grid(VERIFY_GRID);
    if min <= tol {
        return Err(Error::NotPositive { min, tol });
    }

    // Trim the degree down to the first leading coefficient above tol; this
    // is the stratification by first nonvanishing coefficient.
    let mut k_eff = q.degree();
    while k_eff > 0 && q.coeff(k_eff as i64).norm() <= tol {
        k_eff -= 1;
    }
    if k_eff == 0 {
        let c = q.coeff(0).re;
        let factor = AnalyticFactor::new(vec![Complex64::new(c.sqrt(), 0.0)]);
        let residual = verify_factorization(q, &factor, VERIFY_GRID);
        return Ok(Factorization {
            factor,
            roots: Vec::new(),
            residual,
            effective_degree: 0,
        });
    }

    // z^K q(z) as an analytic polynomial of degree 2K.
    let lead = q.coeff(k_eff as i64);
    let mut poly = Vec::with_capacity(2 * k_eff + 1);
    for k in -(k_eff as i64)..=(k_eff as i64) {
        poly.push(q.coeff(k));
    }
    let roots = polynomial_roots(&poly)?;
    let outer = select_outer_roots(roots, k_eff, tol)?;

    // g(z) = |b_K / Π z_i|^{1/2} Π (z − z_i), expanded by convolution.
    let mut prod = ZERO;
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    let mut root_prod = Complex64::new(1.0, 0.0);
    for &r in &outer {
        root_prod *= r;
        let mut next = vec![ZERO; coeffs.len() + 1];
        for (i, &a) in coeffs.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * r;
        }
        coeffs = next;
        prod = root_prod;
    }
    let scale = (lead / prod).norm().sqrt();
    for c in coeffs.iter_mut() {
        *c *= scale;
    }
    // Phase normalization: a_0 real ≥ 0. a_0 ≠ 0 because every root is
    // outside the closed unit disk.
    let a0 = coeffs[0];
    let phase = a0.conj() / a0.norm();
    for c in coeffs.iter_mut() {
        *c *= phase;
    }
    coeffs[0] = Complex64::new(coeffs[0].re.abs(), 0.0);

    let factor = AnalyticFactor::new(coeffs);
    let residual = verify_factorization(q, &factor, VERIFY_GRID);
    Ok(Factorization {
        factor,
        roots: outer,
        residual,
        effective_degree: k_eff,
    })
}

/// Max over the circle grid of `||g(z)|² − q(z)|`.
pub fn verify_factorization(q: &LaurentPoly, g: &AnalyticFactor, grid_size: usize) -> f64 {
    let mut max = 0.0f64;
    for z in circle_grid(grid_size) {
        let gv = g.evaluate(z).norm_sqr();
        let qv = q.evaluate(z);
        max = max.max((Complex64::new(gv, 0.0) - qv).norm());
    }
    max
}

/// Trigonometric polynomial whose coefficients are base functions:
/// `p(x, z) = Σ_{|k|≤K} b_k(x) zᵏ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParametricTrigPoly {
    degree: usize,
    /// `coeffs[i]` is the coefficient function of `z^(i − K)`.
    coeffs: Vec<BaseFunction>,
}

impl ParametricTrigPoly {
    pub fn new(degree: usize, coeffs: Vec<BaseFunction>) -> Result<Self> {
        if coeffs.len() != 2 * degree + 1 {
            return Err(Error::invalid(format!(
                "degree {degree} needs {} coefficient functions, got {}",
                2 * degree + 1,
                coeffs.len()
            )));
        }
        Ok(Self { degree, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The scalar polynomial at one base point.
    pub fn at_point(&self, sys: &BaseSystem, x: &BasePoint) -> Result<LaurentPoly> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for f in &self.coeffs {
            coeffs.push(sys.evaluate(f, x)?);
        }
        LaurentPoly::new(self.degree, coeffs)
    }
}

/// One row of the parametric factorization table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParametricRow {
    pub index: usize,
    /// Stratum `l`: the point landed in `M_{K−l}`, i.e. `l` leading
    /// coefficients were trimmed.
    pub stratum: usize,
    pub factorization: Factorization,
}

/// Parametric factorization result with the uniform bounds from the
/// coefficient estimate `|a_l(x)| ≤ √(sup p)` and
/// `|g(x,z)| ≤ (K+1)·√(sup p)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParametricFactorization {
    pub rows: Vec<ParametricRow>,
    /// Sup of `p` over the verification grid.
    pub sup_p: f64,
    /// Largest coefficient modulus across all rows.
    pub max_coeff: f64,
    /// Largest `|g(x, z)|` over a coarse subgrid of the verification grid.
    pub max_factor_value: f64,
    /// `max_coeff ≤ √(sup_p) + 1e-8` and the factor-value analogue.
    pub bounds_satisfied: bool,
}

/// Pointwise Fejér–Riesz over an `x` grid with per-point degree trimming.
pub fn fejer_riesz_parametric(
    sys: &BaseSystem,
    p: &ParametricTrigPoly,
    x_grid: &[BasePoint],
    tol: f64,
) -> Result<ParametricFactorization> {
    if x_grid.is_empty() {
        return Err(Error::invalid("parametric factorization needs a nonempty grid"));
    }
    let mut rows = Vec::with_capacity(x_grid.len());
    let mut sup_p = f64::NEG_INFINITY;
    let mut max_coeff = 0.0f64;
    let mut max_factor_value = 0.0f64;
    let zs = circle_grid(VERIFY_GRID);
    for (index, x) in x_grid.iter().enumerate() {
        let q = p
            .at_point(sys, x)
            .map_err(|e| Error::AtGridPoint {
                index,
                source: Box::new(e),
            })?;
        let (_, q_max) = q.range_on_grid(VERIFY_GRID);
        sup_p = sup_p.max(q_max);
        let factorization = fejer_riesz_scalar(&q, tol).map_err(|e| Error::AtGridPoint {
            index,
            source: Box::new(e),
        })?;
        for c in factorization.factor.coeffs() {
            max_coeff = max_coeff.max(c.norm());
        }
        // Sampling |g| coarsely is enough for the uniform bound check.
        for z in zs.iter().step_by(64) {
            max_factor_value = max_factor_value.max(factorization.factor.evaluate(*z).norm());
        }
        rows.push(ParametricRow {
            index,
            stratum: p.degree() - factorization.effective_degree,
            factorization,
        });
    }
    let coeff_bound = sup_p.max(0.0).sqrt() + 1e-8;
    let value_bound = (p.degree() as f64 + 1.0) * sup_p.max(0.0).sqrt() + 1e-8;
    Ok(ParametricFactorization {
        rows,
        sup_p,
        max_coeff,
        max_factor_value,
        bounds_satisfied: max_coeff <= coeff_bound && max_factor_value <= value_bound,
    })
}
