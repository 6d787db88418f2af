//! Concrete uniquely ergodic base systems `(X_o, θ_o, μ_o)`.
//!
//! Three families are implemented, each with an exact function
//! representation closed under pullback by `θ_o`:
//!
//! * irrational circle rotations, functions as finite Fourier series;
//! * the shift on `Z_∞` (one-point compactification of the integers),
//!   functions as a finite window of values plus the value at `∞`;
//! * cyclic shifts on `Z/N`, functions as length-`N` vectors.
//!
//! Pullback, integration against the unique invariant measure, and products
//! are all representation-level operations, so the invariance identity
//! `∫ g∘θ_o dμ_o = ∫ g dμ_o` holds exactly, not up to quadrature error.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exact::{check_tag_consistency, ExactAlpha};
use crate::util::{unit_exp, KahanSum};
use crate::Result;

/// Hard cap on circle-function frequencies. Products that would exceed it
/// fail loudly instead of truncating.
pub const DEFAULT_FREQ_CAP: i64 = 4096;

/// Which base family a point, function, or system belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    Circle,
    ZInf,
    Cyclic,
}

impl BaseKind {
    pub fn name(self) -> &'static str {
        match self {
            BaseKind::Circle => "circle",
            BaseKind::ZInf => "zinf",
            BaseKind::Cyclic => "cyclic",
        }
    }
}

fn variant_mismatch(expected: BaseKind, got: BaseKind) -> Error {
    Error::VariantMismatch {
        expected: expected.name(),
        got: got.name(),
    }
}

/// A point of `Z_∞ = Z ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZPoint {
    Int(i64),
    Infinity,
}

/// A point of one of the three base spaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BasePoint {
    /// Circle point, the angle as a fraction of a full turn, reduced mod 1.
    Circle { t: f64 },
    ZInf { point: ZPoint },
    /// Residue class; reduced mod N against the owning system.
    Cyclic { r: u64 },
}

impl BasePoint {
    pub fn circle(t: f64) -> Self {
        BasePoint::Circle {
            t: t.rem_euclid(1.0),
        }
    }

    pub fn zint(l: i64) -> Self {
        BasePoint::ZInf {
            point: ZPoint::Int(l),
        }
    }

    pub fn infinity() -> Self {
        BasePoint::ZInf {
            point: ZPoint::Infinity,
        }
    }

    pub fn cyclic(r: u64) -> Self {
        BasePoint::Cyclic { r }
    }

    pub fn kind(&self) -> BaseKind {
        match self {
            BasePoint::Circle { .. } => BaseKind::Circle,
            BasePoint::ZInf { .. } => BaseKind::ZInf,
            BasePoint::Cyclic { .. } => BaseKind::Cyclic,
        }
    }
}

/// Finite Fourier series `Σ_j c_j e^{2πi j t}` on the circle.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CircleFn {
    #[serde(with = "crate::util::cmap")]
    coeffs: BTreeMap<i64, Complex64>,
}

impl CircleFn {
    pub fn from_coeffs(coeffs: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        let mut m = BTreeMap::new();
        for (j, c) in coeffs {
            if c != Complex64::ZERO {
                let e = m.entry(j).or_insert(Complex64::ZERO);
                *e += c;
            }
        }
        m.retain(|_, c| *c != Complex64::ZERO);
        Self { coeffs: m }
    }

    pub fn coeff(&self, j: i64) -> Complex64 {
        self.coeffs.get(&j).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, Complex64> {
        &self.coeffs
    }

    pub fn max_frequency(&self) -> i64 {
        self.coeffs.keys().map(|j| j.abs()).max().unwrap_or(0)
    }

    pub fn evaluate(&self, t: f64) -> Complex64 {
        let mut s = KahanSum::new();
        for (&j, &c) in &self.coeffs {
            s.add(c * unit_exp(j as f64 * t));
        }
        s.value()
    }
}

/// Function on `Z_∞`: finitely many explicit values plus the value at `∞`,
/// which is also the value at every integer off the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZInfFn {
    #[serde(with = "crate::util::cmap")]
    window: BTreeMap<i64, Complex64>,
    #[serde(with = "crate::util::cpair")]
    limit: Complex64,
}

impl ZInfFn {
    pub fn new(window: impl IntoIterator<Item = (i64, Complex64)>, limit: Complex64) -> Self {
        Self::normalized(window.into_iter().collect(), limit)
    }

    /// Window entries bitwise equal to the limit carry no information and
    /// are dropped, so semantically equal functions compare equal.
    fn normalized(mut window: BTreeMap<i64, Complex64>, limit: Complex64) -> Self {
        window.retain(|_, c| *c != limit);
        Self { window, limit }
    }

    pub fn constant(c: Complex64) -> Self {
        Self {
            window: BTreeMap::new(),
            limit: c,
        }
    }

    pub fn limit(&self) -> Complex64 {
        self.limit
    }

    pub fn window(&self) -> &BTreeMap<i64, Complex64> {
        &self.window
    }

    pub fn value_at(&self, l: i64) -> Complex64 {
        self.window.get(&l).copied().unwrap_or(self.limit)
    }

    pub fn value_at_point(&self, p: ZPoint) -> Complex64 {
        match p {
            ZPoint::Int(l) => self.value_at(l),
            ZPoint::Infinity => self.limit,
        }
    }

    fn window_span(&self) -> Option<(i64, i64)> {
        let mut keys = self.window.keys();
        let first = *keys.next()?;
        let last = *self.window.keys().next_back().unwrap();
        Some((first, last))
    }
}

/// Function on `Z/N` as a stored vector plus a rotation offset.
///
/// Pullback only bumps the offset, so the stored summation order (and with
/// it the floating-point value of the mean) never changes under the
/// dynamics. The vector is materialized in index order for serialization
/// and comparison.
#[derive(Debug, Clone)]
pub struct CyclicFn {
    values: Vec<Complex64>,
    offset: usize,
}

impl CyclicFn {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values, offset: 0 }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_at(&self, r: u64) -> Complex64 {
        let n = self.values.len();
        self.values[(r as usize + self.offset) % n]
    }

    /// Values in residue order `0..N`, resolving the rotation offset.
    pub fn materialize(&self) -> Vec<Complex64> {
        (0..self.values.len() as u64).map(|r| self.value_at(r)).collect()
    }

    fn rotated(&self) -> Self {
        Self {
            values: self.values.clone(),
            offset: (self.offset + 1) % self.values.len(),
        }
    }

    fn mean(&self) -> Complex64 {
        let mut s = KahanSum::new();
        for &v in &self.values {
            s.add(v);
        }
        s.value() / self.values.len() as f64
    }
}

impl PartialEq for CyclicFn {
    fn eq(&self, other: &Self) -> bool {
        self.materialize() == other.materialize()
    }
}

impl Serialize for CyclicFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("CyclicFn", 1)?;
        let vals: Vec<(f64, f64)> = self.materialize().iter().map(|c| (c.re, c.im)).collect();
        st.serialize_field("values", &vals)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for CyclicFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            values: Vec<(f64, f64)>,
        }
        let raw = Raw::deserialize(d)?;
        Ok(CyclicFn::new(
            raw.values
                .into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect(),
        ))
    }
}

/// An element of `C(X_o)` (or of `L^∞(X_o, μ_o)`) in the representation of
/// its base family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BaseFunction {
    Circle(CircleFn),
    ZInf(ZInfFn),
    Cyclic(CyclicFn),
}

impl BaseFunction {
    pub fn kind(&self) -> BaseKind {
        match self {
            BaseFunction::Circle(_) => BaseKind::Circle,
            BaseFunction::ZInf(_) => BaseKind::ZInf,
            BaseFunction::Cyclic(_) => BaseKind::Cyclic,
        }
    }

    pub fn circle(coeffs: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        BaseFunction::Circle(CircleFn::from_coeffs(coeffs))
    }

    pub fn zinf(window: impl IntoIterator<Item = (i64, Complex64)>, limit: Complex64) -> Self {
        BaseFunction::ZInf(ZInfFn::new(window, limit))
    }

    pub fn cyclic(values: Vec<Complex64>) -> Self {
        BaseFunction::Cyclic(CyclicFn::new(values))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            BaseFunction::Circle(f) => f.coeffs.is_empty(),
            BaseFunction::ZInf(f) => {
                f.limit == Complex64::ZERO && f.window.values().all(|c| *c == Complex64::ZERO)
            }
            BaseFunction::Cyclic(f) => f.values.iter().all(|c| *c == Complex64::ZERO),
        }
    }

    fn check_same_kind(&self, other: &Self) -> Result<()> {
        if self.kind() != other.kind() {
            return Err(variant_mismatch(self.kind(), other.kind()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_kind(other)?;
        Ok(match (self, other) {
            (BaseFunction::Circle(a), BaseFunction::Circle(b)) => {
                let mut m = a.coeffs.clone();
                for (&j, &c) in &b.coeffs {
                    let e = m.entry(j).or_insert(Complex64::ZERO);
                    *e += c;
                }
                m.retain(|_, c| *c != Complex64::ZERO);
                BaseFunction::Circle(CircleFn { coeffs: m })
            }
            (BaseFunction::ZInf(a), BaseFunction::ZInf(b)) => {
                let mut window = BTreeMap::new();
                for &l in a.window.keys().chain(b.window.keys()) {
                    window.insert(l, a.value_at(l) + b.value_at(l));
                }
                BaseFunction::ZInf(ZInfFn::normalized(window, a.limit + b.limit))
            }
            (BaseFunction::Cyclic(a), BaseFunction::Cyclic(b)) => {
                let n = a.len().max(b.len());
                let vals = (0..n as u64).map(|r| a.value_at(r) + b.value_at(r)).collect();
                BaseFunction::Cyclic(CyclicFn::new(vals))
            }
            _ => unreachable!(),
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        match self {
            BaseFunction::Circle(f) => BaseFunction::Circle(CircleFn::from_coeffs(
                f.coeffs.iter().map(|(&j, &v)| (j, c * v)),
            )),
            BaseFunction::ZInf(f) => BaseFunction::ZInf(ZInfFn::normalized(
                f.window.iter().map(|(&l, &v)| (l, c * v)).collect(),
                c * f.limit,
            )),
            BaseFunction::Cyclic(f) => {
                BaseFunction::Cyclic(CyclicFn::new(f.materialize().iter().map(|v| c * v).collect()))
            }
        }
    }

    /// Pointwise product with the default frequency cap.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_with_cap(other, DEFAULT_FREQ_CAP)
    }

    /// Pointwise product; circle-series convolution fails if any produced
    /// frequency would exceed `cap`.
    pub fn mul_with_cap(&self, other: &Self, cap: i64) -> Result<Self> {
        self.check_same_kind(other)?;
        Ok(match (self, other) {
            (BaseFunction::Circle(a), BaseFunction::Circle(b)) => {
                let mut m: BTreeMap<i64, Complex64> = BTreeMap::new();
                for (&ja, &ca) in &a.coeffs {
                    for (&jb, &cb) in &b.coeffs {
                        let j = ja + jb;
                        if j.abs() > cap {
                            return Err(Error::FrequencyCap { frequency: j, cap });
                        }
                        *m.entry(j).or_insert(Complex64::ZERO) += ca * cb;
                    }
                }
                m.retain(|_, c| *c != Complex64::ZERO);
                BaseFunction::Circle(CircleFn { coeffs: m })
            }
            (BaseFunction::ZInf(a), BaseFunction::ZInf(b)) => {
                let mut window = BTreeMap::new();
                for &l in a.window.keys().chain(b.window.keys()) {
                    window.insert(l, a.value_at(l) * b.value_at(l));
                }
                BaseFunction::ZInf(ZInfFn::normalized(window, a.limit * b.limit))
            }
            (BaseFunction::Cyclic(a), BaseFunction::Cyclic(b)) => {
                if a.offset == b.offset && a.len() == b.len() {
                    let vals = a
                        .values
                        .iter()
                        .zip(&b.values)
                        .map(|(x, y)| x * y)
                        .collect();
                    BaseFunction::Cyclic(CyclicFn {
                        values: vals,
                        offset: a.offset,
                    })
                } else {
                    let n = a.len().max(b.len());
                    let vals =
                        (0..n as u64).map(|r| a.value_at(r) * b.value_at(r)).collect();
                    BaseFunction::Cyclic(CyclicFn::new(vals))
                }
            }
            _ => unreachable!(),
        })
    }

    /// Complex conjugate. For circle series the frequencies flip sign.
    pub fn conj(&self) -> Self {
        match self {
            BaseFunction::Circle(f) => BaseFunction::Circle(CircleFn::from_coeffs(
                f.coeffs.iter().map(|(&j, &c)| (-j, c.conj())),
            )),
            BaseFunction::ZInf(f) => BaseFunction::ZInf(ZInfFn::normalized(
                f.window.iter().map(|(&l, &c)| (l, c.conj())).collect(),
                f.limit.conj(),
            )),
            BaseFunction::Cyclic(f) => BaseFunction::Cyclic(CyclicFn {
                values: f.values.iter().map(|c| c.conj()).collect(),
                offset: f.offset,
            }),
        }
    }

    /// Integer power of a pointwise-unimodular function (negative powers via
    /// conjugation, exact on ±1 and ±i values). Not available for circle
    /// Fourier series, whose powers leave the representation.
    pub fn pow_unimodular(&self, n: i64) -> Result<Self> {
        let pw = |c: Complex64| -> Complex64 {
            if n >= 0 {
                int_pow(c, n as u64)
            } else {
                int_pow(c.conj(), (-n) as u64)
            }
        };
        Ok(match self {
            BaseFunction::Circle(_) => {
                return Err(Error::ExactnessBoundary {
                    context: "pointwise powers of circle Fourier series are not representable"
                        .into(),
                })
            }
            BaseFunction::ZInf(f) => BaseFunction::ZInf(ZInfFn::normalized(
                f.window.iter().map(|(&l, &c)| (l, pw(c))).collect(),
                pw(f.limit),
            )),
            BaseFunction::Cyclic(f) => BaseFunction::Cyclic(CyclicFn {
                values: f.values.iter().map(|&c| pw(c)).collect(),
                offset: f.offset,
            }),
        })
    }
}

fn int_pow(base: Complex64, mut e: u64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    acc
}

/// One of the three uniquely ergodic base systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BaseSystem {
    /// Rotation `t ↦ t + α mod 1` with `α` irrational; `exact` is the
    /// optional arithmetic tag used by the cohomology module.
    CircleRotation {
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exact: Option<ExactAlpha>,
    },
    /// `θ_o(l) = l + 1`, `θ_o(∞) = ∞`, `μ_o = δ_∞`.
    ZInfShift,
    /// `θ_o(r) = r + 1 mod N`, `μ_o` uniform.
    CyclicShift { n: u64 },
}

impl BaseSystem {
    pub fn circle_rotation(alpha: f64, exact: Option<ExactAlpha>) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
            return Err(Error::invalid(format!(
                "rotation angle must lie in (0, 1), got {alpha}"
            )));
        }
        if let Some(tag) = &exact {
            check_tag_consistency(alpha, tag)?;
        }
        Ok(BaseSystem::CircleRotation { alpha, exact })
    }

    /// The golden-mean rotation with its exact tag attached.
    pub fn golden_rotation() -> Self {
        let tag = ExactAlpha::golden();
        BaseSystem::CircleRotation {
            alpha: tag.value(),
            exact: Some(tag),
        }
    }

    pub fn zinf_shift() -> Self {
        BaseSystem::ZInfShift
    }

    pub fn cyclic_shift(n: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("cyclic base needs N >= 1"));
        }
        Ok(BaseSystem::CyclicShift { n })
    }

    pub fn kind(&self) -> BaseKind {
        match self {
            BaseSystem::CircleRotation { .. } => BaseKind::Circle,
            BaseSystem::ZInfShift => BaseKind::ZInf,
            BaseSystem::CyclicShift { .. } => BaseKind::Cyclic,
        }
    }

    fn check_point(&self, x: &BasePoint) -> Result<()> {
        if self.kind() != x.kind() {
            return Err(variant_mismatch(self.kind(), x.kind()));
        }
        if let (BaseSystem::CyclicShift { n }, BasePoint::Cyclic { r }) = (self, x) {
            if r >= n {
                return Err(Error::invalid(format!("residue {r} out of range for N={n}")));
            }
        }
        Ok(())
    }

    pub fn check_function(&self, g: &BaseFunction) -> Result<()> {
        if self.kind() != g.kind() {
            return Err(variant_mismatch(self.kind(), g.kind()));
        }
        if let (BaseSystem::CyclicShift { n }, BaseFunction::Cyclic(f)) = (self, g) {
            if f.len() as u64 != *n {
                return Err(Error::invalid(format!(
                    "cyclic function has length {}, system has N={n}",
                    f.len()
                )));
            }
        }
        Ok(())
    }

    /// The constant function `c` in this system's representation.
    pub fn constant_fn(&self, c: Complex64) -> BaseFunction {
        match self {
            BaseSystem::CircleRotation { .. } => BaseFunction::circle([(0, c)]),
            BaseSystem::ZInfShift => BaseFunction::ZInf(ZInfFn::constant(c)),
            BaseSystem::CyclicShift { n } => BaseFunction::cyclic(vec![c; *n as usize]),
        }
    }

    /// `θ_o(x)`.
    pub fn apply_theta(&self, x: &BasePoint) -> Result<BasePoint> {
        self.check_point(x)?;
        Ok(match (self, x) {
            (BaseSystem::CircleRotation { alpha, .. }, BasePoint::Circle { t }) => {
                BasePoint::circle(t + alpha)
            }
            (BaseSystem::ZInfShift, BasePoint::ZInf { point }) => match point {
                ZPoint::Int(l) => BasePoint::zint(l + 1),
                ZPoint::Infinity => BasePoint::infinity(),
            },
            (BaseSystem::CyclicShift { n }, BasePoint::Cyclic { r }) => {
                BasePoint::cyclic((r + 1) % n)
            }
            _ => unreachable!(),
        })
    }

    /// Exact representation of `g ∘ θ_o`.
    pub fn pullback(&self, g: &BaseFunction) -> Result<BaseFunction> {
        self.check_function(g)?;
        Ok(match (self, g) {
            (BaseSystem::CircleRotation { alpha, .. }, BaseFunction::Circle(f)) => {
                // Character j picks up the phase e^{2πi j α}; the zero mode
                // is untouched, which keeps integration exactly invariant.
                BaseFunction::Circle(CircleFn::from_coeffs(f.coeffs.iter().map(|(&j, &c)| {
                    (j, c * unit_exp(j as f64 * alpha))
                })))
            }
            (BaseSystem::ZInfShift, BaseFunction::ZInf(f)) => BaseFunction::ZInf(ZInfFn::normalized(
                f.window.iter().map(|(&l, &c)| (l - 1, c)).collect(),
                f.limit,
            )),
            (BaseSystem::CyclicShift { .. }, BaseFunction::Cyclic(f)) => {
                BaseFunction::Cyclic(f.rotated())
            }
            _ => unreachable!(),
        })
    }

    /// `∫ g dμ_o` against the unique invariant measure.
    pub fn integrate(&self, g: &BaseFunction) -> Result<Complex64> {
        self.check_function(g)?;
        Ok(match g {
            BaseFunction::Circle(f) => f.coeff(0),
            BaseFunction::ZInf(f) => f.limit(),
            BaseFunction::Cyclic(f) => f.mean(),
        })
    }

    /// Pointwise value `g(x)`.
    pub fn evaluate(&self, g: &BaseFunction, x: &BasePoint) -> Result<Complex64> {
        self.check_function(g)?;
        self.check_point(x)?;
        Ok(match (g, x) {
            (BaseFunction::Circle(f), BasePoint::Circle { t }) => f.evaluate(*t),
            (BaseFunction::ZInf(f), BasePoint::ZInf { point }) => f.value_at_point(*point),
            (BaseFunction::Cyclic(f), BasePoint::Cyclic { r }) => f.value_at(*r),
            _ => unreachable!(),
        })
    }

    /// Default evaluation grid: `resolution` equispaced circle points, the
    /// window `[-resolution, resolution] ∪ {∞}`, or all residues.
    pub fn sample_points(&self, resolution: usize) -> Vec<BasePoint> {
        match self {
            BaseSystem::CircleRotation { .. } => (0..resolution)
                .map(|k| BasePoint::circle(k as f64 / resolution as f64))
                .collect(),
            BaseSystem::ZInfShift => {
                let w = resolution as i64;
                let mut pts: Vec<BasePoint> = (-w..=w).map(BasePoint::zint).collect();
                pts.push(BasePoint::infinity());
                pts
            }
            BaseSystem::CyclicShift { n } => (0..*n).map(BasePoint::cyclic).collect(),
        }
    }
}

/// Window span helper used by the cohomology solver.
pub(crate) fn zinf_window_span(f: &ZInfFn) -> Option<(i64, i64)> {
    f.window_span()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn theta_fixes_infinity() {
        let sys = BaseSystem::zinf_shift();
        assert_eq!(
            sys.apply_theta(&BasePoint::infinity()).unwrap(),
            BasePoint::infinity()
        );
        assert_eq!(sys.apply_theta(&BasePoint::zint(5)).unwrap(), BasePoint::zint(6));
    }

    #[test]
    fn theta_rotates_circle() {
        let sys = BaseSystem::golden_rotation();
        let alpha = match &sys {
            BaseSystem::CircleRotation { alpha, .. } => *alpha,
            _ => unreachable!(),
        };
        assert_eq!(
            sys.apply_theta(&BasePoint::circle(0.0)).unwrap(),
            BasePoint::circle(alpha)
        );
    }

    #[test]
    fn theta_wraps_cyclic() {
        let sys = BaseSystem::cyclic_shift(3).unwrap();
        assert_eq!(sys.apply_theta(&BasePoint::cyclic(2)).unwrap(), BasePoint::cyclic(0));
    }

    #[test]
    fn pullback_circle_character_picks_up_phase() {
        let sys = BaseSystem::golden_rotation();
        let alpha = match &sys {
            BaseSystem::CircleRotation { alpha, .. } => *alpha,
            _ => unreachable!(),
        };
        let g = BaseFunction::circle([(1, c(1.0, 0.0))]);
        let pg = sys.pullback(&g).unwrap();
        match &pg {
            BaseFunction::Circle(f) => {
                let expected = unit_exp(alpha);
                assert!((f.coeff(1) - expected).norm() < 1e-15);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn pullback_zinf_shifts_window() {
        let sys = BaseSystem::zinf_shift();
        let g = BaseFunction::zinf([(0, c(-1.0, 0.0))], c(1.0, 0.0));
        let pg = sys.pullback(&g).unwrap();
        // Direct-evaluation oracle: (g∘θ)(l) = g(l+1).
        for l in -5..5 {
            let lhs = sys.evaluate(&pg, &BasePoint::zint(l)).unwrap();
            let rhs = sys
                .evaluate(&g, &sys.apply_theta(&BasePoint::zint(l)).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
        assert_eq!(pg, BaseFunction::zinf([(-1, c(-1.0, 0.0))], c(1.0, 0.0)));
    }

    #[test]
    fn pullback_fixes_constants() {
        for sys in [
            BaseSystem::golden_rotation(),
            BaseSystem::zinf_shift(),
            BaseSystem::cyclic_shift(5).unwrap(),
        ] {
            let g = sys.constant_fn(c(2.5, -1.0));
            assert_eq!(sys.pullback(&g).unwrap(), g);
        }
    }

    #[test]
    fn integrate_examples() {
        let zinf = BaseSystem::zinf_shift();
        let g = BaseFunction::zinf([(0, c(-1.0, 0.0))], c(1.0, 0.0));
        assert_eq!(zinf.integrate(&g).unwrap(), c(1.0, 0.0));

        let circle = BaseSystem::golden_rotation();
        let g = BaseFunction::circle([(0, c(3.0, 0.0)), (2, c(5.0, 0.0))]);
        assert_eq!(circle.integrate(&g).unwrap(), c(3.0, 0.0));

        let cyc = BaseSystem::cyclic_shift(4).unwrap();
        let g = BaseFunction::cyclic(vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]);
        assert_eq!(cyc.integrate(&g).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn evaluate_examples() {
        let circle = BaseSystem::golden_rotation();
        let g = BaseFunction::circle([(1, c(1.0, 0.0))]);
        assert_eq!(
            circle.evaluate(&g, &BasePoint::circle(0.25)).unwrap(),
            c(0.0, 1.0)
        );

        let zinf = BaseSystem::zinf_shift();
        let g = BaseFunction::zinf([(0, c(-1.0, 0.0))], c(1.0, 0.0));
        assert_eq!(zinf.evaluate(&g, &BasePoint::zint(7)).unwrap(), c(1.0, 0.0));

        let cyc = BaseSystem::cyclic_shift(2).unwrap();
        let g = BaseFunction::cyclic(vec![c(2.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(cyc.evaluate(&g, &BasePoint::cyclic(1)).unwrap(), c(4.0, 0.0));
    }

    #[test]
    fn integration_invariant_under_pullback_exactly() {
        let cases: Vec<(BaseSystem, BaseFunction)> = vec![
            (
                BaseSystem::golden_rotation(),
                BaseFunction::circle([(0, c(0.3, 0.7)), (1, c(1.0, -2.0)), (-3, c(0.1, 0.1))]),
            ),
            (
                BaseSystem::zinf_shift(),
                BaseFunction::zinf([(0, c(-1.0, 0.5)), (3, c(2.0, 0.0))], c(0.25, -0.125)),
            ),
            (
                BaseSystem::cyclic_shift(5).unwrap(),
                BaseFunction::cyclic(vec![
                    c(0.1, 0.2),
                    c(0.3, 0.4),
                    c(-0.5, 0.6),
                    c(0.7, -0.8),
                    c(0.9, 1.0),
                ]),
            ),
        ];
        for (sys, g) in cases {
            let mut h = g.clone();
            for _ in 0..7 {
                h = sys.pullback(&h).unwrap();
                assert_eq!(sys.integrate(&h).unwrap(), sys.integrate(&g).unwrap());
            }
        }
    }

    #[test]
    fn pullback_respects_products() {
        let sys = BaseSystem::cyclic_shift(4).unwrap();
        let a = BaseFunction::cyclic(vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, 3.0), c(-1.0, 0.5)]);
        let b = BaseFunction::cyclic(vec![c(0.5, 0.0), c(1.0, -1.0), c(2.0, 2.0), c(0.0, 1.0)]);
        let lhs = sys.pullback(&a.mul(&b).unwrap()).unwrap();
        let rhs = sys.pullback(&a).unwrap().mul(&sys.pullback(&b).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pullback_evaluation_identity() {
        let sys = BaseSystem::golden_rotation();
        let g = BaseFunction::circle([(2, c(1.0, 0.5)), (-1, c(0.0, 1.0))]);
        let pg = sys.pullback(&g).unwrap();
        for k in 0..16 {
            let x = BasePoint::circle(k as f64 / 16.0);
            let lhs = sys.evaluate(&pg, &x).unwrap();
            let rhs = sys.evaluate(&g, &sys.apply_theta(&x).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn frequency_cap_is_a_hard_error() {
        let g = BaseFunction::circle([(3000, c(1.0, 0.0))]);
        let err = g.mul(&g).unwrap_err();
        match err {
            Error::FrequencyCap { frequency, cap } => {
                assert_eq!(frequency, 6000);
                assert_eq!(cap, DEFAULT_FREQ_CAP);
            }
            other => panic!("unexpected error {other}"),
        }
        assert!(g.mul_with_cap(&g, 8192).is_ok());
    }

    #[test]
    fn variant_mismatch_detected() {
        let sys = BaseSystem::zinf_shift();
        let g = BaseFunction::circle([(0, c(1.0, 0.0))]);
        assert!(matches!(
            sys.integrate(&g).unwrap_err(),
            Error::VariantMismatch { .. }
        ));
        assert!(matches!(
            sys.apply_theta(&BasePoint::circle(0.1)).unwrap_err(),
            Error::VariantMismatch { .. }
        ));
    }

    #[test]
    fn cyclic_function_length_checked() {
        let sys = BaseSystem::cyclic_shift(3).unwrap();
        let g = BaseFunction::cyclic(vec![c(1.0, 0.0); 4]);
        assert!(sys.integrate(&g).is_err());
    }

    #[test]
    fn json_round_trip() {
        let sys = BaseSystem::golden_rotation();
        let s = serde_json::to_string(&sys).unwrap();
        let back: BaseSystem = serde_json::from_str(&s).unwrap();
        assert_eq!(sys, back);

        let g = BaseFunction::zinf([(0, c(-1.0, 0.0))], c(1.0, 0.0));
        let s = serde_json::to_string(&g).unwrap();
        let back: BaseFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(g, back);
    }
}
