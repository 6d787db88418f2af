//! The algebra `C(X_o × T)` as finite trigonometric series in `z`.
//!
//! An observable is `h(x, z) = Σ_n h_n(x) zⁿ` with finitely many base-function
//! coefficients. The module provides Fourier extraction from sampled grids,
//! Fejér (Cesàro) summation, the periodic conditional expectation `E_n` onto
//! the multiples-of-`n` slots, the dual rotation action `β_n`, and exact
//! series arithmetic with the same frequency-cap policy as the base layer.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::base::{BaseFunction, BaseKind, BasePoint, BaseSystem};
use crate::error::Error;
use crate::util::{unit_exp_frac, KahanSum};
use crate::Result;

/// Finite series `Σ_n h_n(x) zⁿ`; absent slots are identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusObservable {
    kind: BaseKind,
    slots: Vec<(i64, BaseFunction)>,
}

impl TorusObservable {
    /// Builds an observable from `(n, h_n)` pairs. All coefficients must
    /// share one base variant; zero coefficients are dropped.
    pub fn new(kind: BaseKind, slots: impl IntoIterator<Item = (i64, BaseFunction)>) -> Result<Self> {
        let mut map: BTreeMap<i64, BaseFunction> = BTreeMap::new();
        for (n, f) in slots {
            if f.kind() != kind {
                return Err(Error::VariantMismatch {
                    expected: kind.name(),
                    got: f.kind().name(),
                });
            }
            let merged = match map.remove(&n) {
                Some(existing) => existing.add(&f)?,
                None => f,
            };
            map.insert(n, merged);
        }
        map.retain(|_, f| !f.is_zero());
        Ok(Self {
            kind,
            slots: map.into_iter().collect(),
        })
    }

    /// The zero observable.
    pub fn zero(kind: BaseKind) -> Self {
        Self { kind, slots: Vec::new() }
    }

    /// Constant observable `c`.
    pub fn constant(sys: &BaseSystem, c: Complex64) -> Self {
        if c == Complex64::ZERO {
            return Self::zero(sys.kind());
        }
        Self {
            kind: sys.kind(),
            slots: vec![(0, sys.constant_fn(c))],
        }
    }

    /// The character `zⁿ` over the given system.
    pub fn character(sys: &BaseSystem, n: i64) -> Self {
        Self {
            kind: sys.kind(),
            slots: vec![(n, sys.constant_fn(Complex64::new(1.0, 0.0)))],
        }
    }

    /// A single slot `g(x)·zⁿ`.
    pub fn monomial(n: i64, g: BaseFunction) -> Self {
        if g.is_zero() {
            return Self::zero(g.kind());
        }
        Self {
            kind: g.kind(),
            slots: vec![(n, g)],
        }
    }

    pub fn kind(&self) -> BaseKind {
        self.kind
    }

    pub fn slots(&self) -> impl Iterator<Item = (i64, &BaseFunction)> {
        self.slots.iter().map(|(n, f)| (*n, f))
    }

    pub fn slot(&self, n: i64) -> Option<&BaseFunction> {
        self.slots
            .binary_search_by_key(&n, |(m, _)| *m)
            .ok()
            .map(|i| &self.slots[i].1)
    }

    pub fn is_zero(&self) -> bool {
        self.slots.is_empty()
    }

    /// Largest |slot index| present.
    pub fn max_mode(&self) -> i64 {
        self.slots.iter().map(|(n, _)| n.abs()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.kind,
            self.slots
                .iter()
                .chain(other.slots.iter())
                .map(|(n, f)| (*n, f.clone())),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c == Complex64::ZERO {
            return Self::zero(self.kind);
        }
        Self {
            kind: self.kind,
            slots: self.slots.iter().map(|(n, f)| (*n, f.scale(c))).collect(),
        }
    }

    /// Exact series product (convolution of slots, base products pointwise).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut acc: BTreeMap<i64, BaseFunction> = BTreeMap::new();
        for (na, fa) in &self.slots {
            for (nb, fb) in &other.slots {
                let n = na + nb;
                let term = fa.mul(fb)?;
                let merged = match acc.remove(&n) {
                    Some(existing) => existing.add(&term)?,
                    None => term,
                };
                acc.insert(n, merged);
            }
        }
        acc.retain(|_, f| !f.is_zero());
        Ok(Self {
            kind: self.kind,
            slots: acc.into_iter().collect(),
        })
    }

    /// Conjugate observable: slot `n` becomes `conj(h_{-n})`.
    pub fn conj(&self) -> Self {
        let mut slots: Vec<(i64, BaseFunction)> =
            self.slots.iter().map(|(n, f)| (-*n, f.conj())).collect();
        slots.sort_by_key(|(n, _)| *n);
        Self {
            kind: self.kind,
            slots,
        }
    }

    /// `|h|² = conj(h)·h`, positive by construction.
    pub fn abs_squared(&self) -> Result<Self> {
        self.conj().mul(self)
    }

    /// Pointwise value `h(x, z)`; `z` must be unimodular.
    pub fn evaluate(&self, sys: &BaseSystem, x: &BasePoint, z: Complex64) -> Result<Complex64> {
        check_unimodular(z)?;
        let mut s = KahanSum::new();
        for (n, f) in &self.slots {
            s.add(sys.evaluate(f, x)? * z.powi(*n as i32));
        }
        Ok(s.value())
    }

    /// `∫ h d(μ_o × m)`: only the zero slot survives Haar integration.
    pub fn integrate(&self, sys: &BaseSystem) -> Result<Complex64> {
        match self.slot(0) {
            Some(f) => sys.integrate(f),
            None => Ok(Complex64::ZERO),
        }
    }

    /// Fejér partial sum `Σ_{|n|≤M} (1 − |n|/(M+1)) h_n zⁿ`.
    pub fn fejer_sum(&self, m: i64) -> Result<Self> {
        if m < 0 {
            return Err(Error::invalid("Fejér order must be >= 0"));
        }
        Self::new(
            self.kind,
            self.slots.iter().filter(|(n, _)| n.abs() <= m).map(|(n, f)| {
                let w = 1.0 - n.abs() as f64 / (m + 1) as f64;
                (*n, f.scale(Complex64::new(w, 0.0)))
            }),
        )
    }

    /// The periodic conditional expectation `E_n`: keeps exactly the slots
    /// whose frequency is a multiple of `n`. `E_1` is the identity.
    pub fn periodic_expectation(&self, n: i64) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("periodic expectation needs n >= 1"));
        }
        Ok(Self {
            kind: self.kind,
            slots: self
                .slots
                .iter()
                .filter(|(k, _)| k.rem_euclid(n) == 0)
                .map(|(k, f)| (*k, f.clone()))
                .collect(),
        })
    }

    /// Dual rotation `β_n^l`: slot `k` is multiplied by `e^{2πi lk/n}`.
    /// Resonant slots (`n | k`) are untouched exactly.
    pub fn dual_rotation(&self, n: i64, l: i64) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("dual rotation needs n >= 1"));
        }
        Ok(Self {
            kind: self.kind,
            slots: self
                .slots
                .iter()
                .map(|(k, f)| {
                    let phase = unit_exp_frac((l % n) * (k % n), n);
                    (*k, f.scale(phase))
                })
                .filter(|(_, f)| !f.is_zero())
                .collect(),
        })
    }

    /// Restriction of every slot to its zero-frequency content is not
    /// meaningful here; instead expose the slot map for reporting.
    pub fn into_slots(self) -> Vec<(i64, BaseFunction)> {
        self.slots
    }

    /// Sup of |h| over the default grid (used by contraction checks).
    pub fn sup_on_grid(&self, sys: &BaseSystem, x_resolution: usize, z_size: usize) -> Result<f64> {
        let mut sup: f64 = 0.0;
        let zs = crate::util::circle_grid(z_size);
        for x in sys.sample_points(x_resolution) {
            for &z in &zs {
                sup = sup.max(self.evaluate(sys, &x, z)?.norm());
            }
        }
        Ok(sup)
    }
}

pub(crate) fn check_unimodular(z: Complex64) -> Result<()> {
    let m = z.norm();
    if (m - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnimodular { modulus: m });
    }
    Ok(())
}

/// Values of an observable on a finite `(x, z)` grid; the numeric
/// verification surface for Fourier extraction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledTorusFunction {
    pub x_points: Vec<BasePoint>,
    pub z_size: usize,
    /// Row-major: `values[i * z_size + j] = h(x_i, z_j)` with
    /// `z_j = e^{2πi j/z_size}`.
    #[serde(with = "crate::util::cvec")]
    pub values: Vec<Complex64>,
}

impl SampledTorusFunction {
    /// Samples an observable on `x_points × (z_size-th roots of unity)`.
    pub fn sample(
        sys: &BaseSystem,
        h: &TorusObservable,
        x_points: Vec<BasePoint>,
        z_size: usize,
    ) -> Result<Self> {
        let zs = crate::util::circle_grid(z_size);
        let mut values = Vec::with_capacity(x_points.len() * z_size);
        for x in &x_points {
            for &z in &zs {
                values.push(h.evaluate(sys, x, z)?);
            }
        }
        Ok(Self {
            x_points,
            z_size,
            values,
        })
    }

    /// Deterministic CSV dump: one row per grid point, shortest round-trip
    /// decimals.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write;
        let mut csv = String::from("x_index,z_index,re,im\n");
        for i in 0..self.x_points.len() {
            for j in 0..self.z_size {
                let v = self.values[i * self.z_size + j];
                let _ = writeln!(csv, "{i},{j},{},{}", v.re, v.im);
            }
        }
        csv
    }

    /// Discrete contour integral `h_n(x_i) = ∮ h(x_i, z) z^{-n} dz/(2πiz)`
    /// by the trapezoid rule on the equispaced grid, exact for series of
    /// z-degree below the grid size.
    pub fn fourier_coefficient(&self, n: i64) -> Result<Vec<Complex64>> {
        let need = (2 * n.unsigned_abs() + 2) as usize;
        if self.z_size < need {
            return Err(Error::GridTooSmall {
                size: self.z_size,
                mode: n,
                need,
            });
        }
        let z = self.z_size as i64;
        let mut out = Vec::with_capacity(self.x_points.len());
        for i in 0..self.x_points.len() {
            let mut s = KahanSum::new();
            for j in 0..self.z_size {
                // z_j^{-n} with the exponent reduced over the integers.
                let w = unit_exp_frac(-(n * j as i64), z);
                s.add(self.values[i * self.z_size + j] * w);
            }
            out.push(s.value() / self.z_size as f64);
        }
        Ok(out)
    }
}

/// Reconstructs an observable's slot coefficients (as grid values) from its
/// samples; the round-trip oracle for the quadrature.
pub fn reconstruct_slot_values(
    sys: &BaseSystem,
    h: &TorusObservable,
    x_points: Vec<BasePoint>,
    n: i64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let z_size = (2 * h.max_mode().max(n.abs()) + 2).max(4) as usize;
    let sampled = SampledTorusFunction::sample(sys, h, x_points.clone(), z_size)?;
    let recovered = sampled.fourier_coefficient(n)?;
    let direct = match h.slot(n) {
        Some(f) => x_points
            .iter()
            .map(|x| sys.evaluate(f, x))
            .collect::<Result<Vec<_>>>()?,
        None => vec![Complex64::ZERO; x_points.len()],
    };
    Ok((recovered, direct))
}
