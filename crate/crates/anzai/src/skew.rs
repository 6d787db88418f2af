//! The Anzai skew-product `Φ(x, z) = (θ_o(x), f(x)·z)` and its averaging
//! theory.
//!
//! The Koopman operator acts slotwise on observables: slot `n` becomes
//! `h_n(θ_o x)·f(x)ⁿ`, expanded exactly in the base representation. Over the
//! circle base this is only exact for pure-winding cocycles (`φ = 0`);
//! otherwise the exact path refuses and the pointwise Birkhoff path is the
//! one to use. Birkhoff sums run strictly in orbit order with compensated
//! accumulation, so every result is reproducible.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::base::{BaseFunction, BaseKind, BasePoint, BaseSystem, CircleFn, ZPoint};
use crate::error::Error;
use crate::exact::ExactScalar;
use crate::torus::{check_unimodular, TorusObservable};
use crate::util::{unit_exp, KahanSum};
use crate::Result;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn renormalize_unimodular(v: Complex64, what: &str) -> Result<Complex64> {
    let m = v.norm();
    if (m - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "{what} must be unimodular, got modulus {m}"
        )));
    }
    Ok(if m == 1.0 { v } else { v / m })
}

/// A continuous cocycle `f : X_o → T`, stored so that `|f| ≡ 1` is
/// structural.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CircleCocycle {
    /// `f(t) = e^{2πi(m·t + φ(t))}` over a rotation base: integer winding
    /// plus a real trigonometric phase polynomial. The optional exact tag
    /// pins the phase mean `φ̂(0)` for arithmetic membership tests.
    Circle {
        winding: i64,
        phase: CircleFn,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phase_mean_exact: Option<ExactScalar>,
    },
    /// Finite window of unimodular values plus a unimodular limit at `∞`.
    ZInf {
        #[serde(with = "crate::util::cmap")]
        window: std::collections::BTreeMap<i64, Complex64>,
        #[serde(with = "crate::util::cpair")]
        limit: Complex64,
    },
    /// Length-`N` vector of unimodular values.
    Cyclic {
        #[serde(with = "crate::util::cvec")]
        values: Vec<Complex64>,
    },
}

impl CircleCocycle {
    /// Circle-base cocycle from winding and phase coefficients. The phase is
    /// symmetrized to be exactly real-valued (Hermitian coefficients).
    pub fn circle(
        winding: i64,
        phase: impl IntoIterator<Item = (i64, Complex64)>,
        phase_mean_exact: Option<ExactScalar>,
    ) -> Result<Self> {
        let raw = CircleFn::from_coeffs(phase);
        let mut sym = Vec::new();
        for (&j, &c) in raw.coeffs() {
            let mirror = raw.coeff(-j).conj();
            if (c - mirror).norm() > 1e-12 {
                return Err(Error::invalid(format!(
                    "phase polynomial is not real-valued: coefficient {j} breaks Hermitian symmetry"
                )));
            }
            let v = if j == 0 {
                Complex64::new(c.re, 0.0)
            } else {
                (c + mirror) / 2.0
            };
            sym.push((j, v));
        }
        Ok(CircleCocycle::Circle {
            winding,
            phase: CircleFn::from_coeffs(sym),
            phase_mean_exact,
        })
    }

    /// Pure winding `f(t) = e^{2πi m t}`, the classical Anzai cocycle.
    pub fn winding(m: i64) -> Self {
        CircleCocycle::Circle {
            winding: m,
            phase: CircleFn::default(),
            phase_mean_exact: None,
        }
    }

    pub fn zinf(window: impl IntoIterator<Item = (i64, Complex64)>, limit: Complex64) -> Result<Self> {
        let limit = renormalize_unimodular(limit, "cocycle limit")?;
        let mut w = std::collections::BTreeMap::new();
        for (l, v) in window {
            w.insert(l, renormalize_unimodular(v, "cocycle value")?);
        }
        w.retain(|_, v| *v != limit);
        Ok(CircleCocycle::ZInf { window: w, limit })
    }

    pub fn cyclic(values: Vec<Complex64>) -> Result<Self> {
        let values = values
            .into_iter()
            .map(|v| renormalize_unimodular(v, "cocycle value"))
            .collect::<Result<Vec<_>>>()?;
        Ok(CircleCocycle::Cyclic { values })
    }

    /// The trivial cocycle `f ≡ 1` over the given base.
    pub fn trivial(base: &BaseSystem) -> Self {
        match base {
            BaseSystem::CircleRotation { .. } => CircleCocycle::winding(0),
            BaseSystem::ZInfShift => CircleCocycle::ZInf {
                window: Default::default(),
                limit: ONE,
            },
            BaseSystem::CyclicShift { n } => CircleCocycle::Cyclic {
                values: vec![ONE; *n as usize],
            },
        }
    }

    pub fn kind(&self) -> BaseKind {
        match self {
            CircleCocycle::Circle { .. } => BaseKind::Circle,
            CircleCocycle::ZInf { .. } => BaseKind::ZInf,
            CircleCocycle::Cyclic { .. } => BaseKind::Cyclic,
        }
    }

    /// `f(x)`.
    pub fn value_at(&self, x: &BasePoint) -> Result<Complex64> {
        match (self, x) {
            (CircleCocycle::Circle { winding, phase, .. }, BasePoint::Circle { t }) => {
                let ph = phase.evaluate(*t).re;
                Ok(unit_exp(*winding as f64 * t + ph))
            }
            (CircleCocycle::ZInf { window, limit }, BasePoint::ZInf { point }) => Ok(match point {
                ZPoint::Int(l) => window.get(l).copied().unwrap_or(*limit),
                ZPoint::Infinity => *limit,
            }),
            (CircleCocycle::Cyclic { values }, BasePoint::Cyclic { r }) => {
                Ok(values[*r as usize % values.len()])
            }
            _ => Err(Error::VariantMismatch {
                expected: self.kind().name(),
                got: x.kind().name(),
            }),
        }
    }

    /// `f(x)ⁿ` as an exact base function. Over the circle base this needs
    /// the phase polynomial to be constant; a nonconstant phase does not
    /// exponentiate to a finite Fourier series.
    pub fn power_fn(&self, n: i64) -> Result<BaseFunction> {
        match self {
            CircleCocycle::Circle { winding, phase, .. } => {
                if n == 0 {
                    return Ok(BaseFunction::circle([(0, ONE)]));
                }
                if phase.coeffs().keys().any(|&j| j != 0) {
                    return Err(Error::ExactnessBoundary {
                        context: "circle cocycle with a nonconstant phase polynomial has no \
                                  exact power; use the pointwise Birkhoff path"
                            .into(),
                    });
                }
                let constant = unit_exp(n as f64 * phase.coeff(0).re);
                Ok(BaseFunction::circle([(n * winding, constant)]))
            }
            CircleCocycle::ZInf { window, limit } => {
                BaseFunction::zinf(window.iter().map(|(&l, &v)| (l, v)), *limit).pow_unimodular(n)
            }
            CircleCocycle::Cyclic { values } => {
                BaseFunction::cyclic(values.clone()).pow_unimodular(n)
            }
        }
    }
}

/// A base system and a cocycle over it: the data of `Φ_{θ_o, f}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewSystem {
    pub base: BaseSystem,
    pub cocycle: CircleCocycle,
}

impl SkewSystem {
    pub fn new(base: BaseSystem, cocycle: CircleCocycle) -> Result<Self> {
        if base.kind() != cocycle.kind() {
            return Err(Error::VariantMismatch {
                expected: base.kind().name(),
                got: cocycle.kind().name(),
            });
        }
        if let (BaseSystem::CyclicShift { n }, CircleCocycle::Cyclic { values }) = (&base, &cocycle)
        {
            if values.len() as u64 != *n {
                return Err(Error::invalid(format!(
                    "cocycle has {} values, base has N={n}",
                    values.len()
                )));
            }
        }
        Ok(Self { base, cocycle })
    }

    pub fn kind(&self) -> BaseKind {
        self.base.kind()
    }

    /// `Φ(x, z) = (θ_o(x), f(x)·z)`.
    pub fn apply(&self, x: &BasePoint, z: Complex64) -> Result<(BasePoint, Complex64)> {
        check_unimodular(z)?;
        let fx = self.cocycle.value_at(x)?;
        Ok((self.base.apply_theta(x)?, fx * z))
    }

    /// The iterated cocycle `f(θ^{n-1}x)⋯f(x)`, the z-multiplier of `Φⁿ`.
    pub fn cocycle_product(&self, x: &BasePoint, n: u64) -> Result<Complex64> {
        let mut acc = ONE;
        let mut pt = *x;
        for _ in 0..n {
            acc *= self.cocycle.value_at(&pt)?;
            pt = self.base.apply_theta(&pt)?;
        }
        Ok(acc)
    }

    /// One Koopman step `h ∘ Φ`: slot `n` becomes `h_n(θ_o x)·f(x)ⁿ`.
    pub fn koopman(&self, h: &TorusObservable) -> Result<TorusObservable> {
        let mut slots = Vec::new();
        for (n, hn) in h.slots() {
            let pulled = self.base.pullback(hn)?;
            let twisted = pulled.mul(&self.cocycle.power_fn(n)?)?;
            slots.push((n, twisted));
        }
        TorusObservable::new(h.kind(), slots)
    }

    /// Exact Cesàro average `(1/N) Σ_{k<N} h ∘ Φᵏ`.
    pub fn cesaro_average(&self, h: &TorusObservable, n: u64) -> Result<TorusObservable> {
        if n < 1 {
            return Err(Error::invalid("Cesàro average needs N >= 1"));
        }
        let mut acc = h.clone();
        let mut iterate = h.clone();
        for _ in 1..n {
            iterate = self.koopman(&iterate)?;
            acc = acc.add(&iterate)?;
        }
        Ok(acc.scale(Complex64::new(1.0 / n as f64, 0.0)))
    }

    /// Pointwise Birkhoff average `(1/N) Σ_{k<N} h(Φᵏ(x, z))`.
    ///
    /// The orbit and the running cocycle product are advanced incrementally;
    /// the sum runs strictly in the order `k = 0..N-1` with compensated
    /// accumulation.
    pub fn birkhoff_average(
        &self,
        h: &TorusObservable,
        x: &BasePoint,
        z: Complex64,
        n: u64,
    ) -> Result<Complex64> {
        if n < 1 {
            return Err(Error::invalid("Birkhoff average needs N >= 1"));
        }
        check_unimodular(z)?;
        let mut sum = KahanSum::new();
        let mut pt = *x;
        let mut cocycle = ONE;
        for _ in 0..n {
            sum.add(h.evaluate(&self.base, &pt, cocycle * z)?);
            cocycle *= self.cocycle.value_at(&pt)?;
            pt = self.base.apply_theta(&pt)?;
        }
        Ok(sum.value() / n as f64)
    }

    /// Birkhoff averages at every `N` in an increasing schedule, sharing one
    /// orbit pass per grid point.
    fn birkhoff_schedule(
        &self,
        h: &TorusObservable,
        x: &BasePoint,
        z: Complex64,
        schedule: &[u64],
    ) -> Result<Vec<Complex64>> {
        let max_n = *schedule.last().expect("schedule nonempty");
        let mut out = Vec::with_capacity(schedule.len());
        let mut sum = KahanSum::new();
        let mut pt = *x;
        let mut cocycle = ONE;
        let mut next = 0usize;
        for k in 0..max_n {
            sum.add(h.evaluate(&self.base, &pt, cocycle * z)?);
            cocycle *= self.cocycle.value_at(&pt)?;
            pt = self.base.apply_theta(&pt)?;
            while next < schedule.len() && schedule[next] == k + 1 {
                out.push(sum.value() / (k + 1) as f64);
                next += 1;
            }
        }
        Ok(out)
    }

    /// Convergence diagnostic for the Cesàro averages, per Definition of
    /// unique ergodicity w.r.t. the fixed-point subalgebra: sup over the
    /// grid of `|B_N − B_N'|` for consecutive schedule entries. The verdict
    /// is a heuristic, never a proof.
    pub fn ue_diagnostic(
        &self,
        h: &TorusObservable,
        schedule: &[u64],
        grid: &[(BasePoint, Complex64)],
        config: &UeDiagnosticConfig,
    ) -> Result<UeDiagnostic> {
        if schedule.len() < 2 {
            return Err(Error::invalid("diagnostic schedule needs at least two N values"));
        }
        if schedule[0] < 1 {
            return Err(Error::invalid("diagnostic schedule entries must be >= 1"));
        }
        if !schedule.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("diagnostic schedule must be strictly increasing"));
        }
        if grid.is_empty() {
            return Err(Error::invalid("diagnostic grid is empty"));
        }
        // values[g][i] = B_{schedule[i]} at grid point g
        let mut values = Vec::with_capacity(grid.len());
        for (x, z) in grid {
            values.push(self.birkhoff_schedule(h, x, *z, schedule)?);
        }
        let mut rows = Vec::new();
        for i in 1..schedule.len() {
            let mut sup: f64 = 0.0;
            for point_values in &values {
                sup = sup.max((point_values[i] - point_values[i - 1]).norm());
            }
            let threshold = config.threshold_factor / (schedule[i] as f64).sqrt();
            rows.push(UeDiagnosticRow {
                n_prev: schedule[i - 1],
                n: schedule[i],
                sup_diff: sup,
                threshold,
            });
        }
        let last = rows.last().expect("at least one row");
        let verdict = if last.sup_diff < last.threshold {
            UeVerdict::Converging
        } else {
            UeVerdict::NonConverging
        };
        Ok(UeDiagnostic { rows, verdict })
    }

    /// Product grid `sample_points(x_resolution) × (z_size-th roots of unity)`.
    pub fn default_grid(&self, x_resolution: usize, z_size: usize) -> Vec<(BasePoint, Complex64)> {
        let zs = crate::util::circle_grid(z_size);
        let mut grid = Vec::new();
        for x in self.base.sample_points(x_resolution) {
            for &z in &zs {
                grid.push((x, z));
            }
        }
        grid
    }
}

/// Threshold policy for [`SkewSystem::ue_diagnostic`]: converging iff the
/// last consecutive difference is below `threshold_factor·N^{-1/2}`, the
/// Weyl-sum decay scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UeDiagnosticConfig {
    pub threshold_factor: f64,
}

impl Default for UeDiagnosticConfig {
    fn default() -> Self {
        Self {
            threshold_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UeVerdict {
    Converging,
    NonConverging,
}

impl std::fmt::Display for UeVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            UeVerdict::Converging => "CONVERGING",
            UeVerdict::NonConverging => "NONCONVERGING",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UeDiagnosticRow {
    pub n_prev: u64,
    pub n: u64,
    pub sup_diff: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UeDiagnostic {
    pub rows: Vec<UeDiagnosticRow>,
    pub verdict: UeVerdict,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::BaseKind;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// The flip system: Z_∞ base, f(0) = -1, f = 1 elsewhere.
    fn flip_system() -> SkewSystem {
        SkewSystem::new(
            BaseSystem::zinf_shift(),
            CircleCocycle::zinf([(0, c(-1.0, 0.0))], ONE).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn apply_skew_flip_examples() {
        let sys = flip_system();
        let (x, z) = sys.apply(&BasePoint::zint(0), ONE).unwrap();
        assert_eq!(x, BasePoint::zint(1));
        assert_eq!(z, c(-1.0, 0.0));

        let (x, z) = sys.apply(&BasePoint::zint(5), c(0.0, 1.0)).unwrap();
        assert_eq!(x, BasePoint::zint(6));
        assert_eq!(z, c(0.0, 1.0));
    }

    #[test]
    fn apply_skew_trivial_cocycle_fixes_fiber() {
        let base = BaseSystem::cyclic_shift(4).unwrap();
        let sys = SkewSystem::new(base.clone(), CircleCocycle::trivial(&base)).unwrap();
        let z = c(0.0, -1.0);
        let (x, z2) = sys.apply(&BasePoint::cyclic(1), z).unwrap();
        assert_eq!(x, BasePoint::cyclic(2));
        assert_eq!(z2, z);
    }

    #[test]
    fn cocycle_product_counts_flips() {
        let sys = flip_system();
        // Orbit from -2 passes 0 once in 5 steps.
        assert_eq!(sys.cocycle_product(&BasePoint::zint(-2), 5).unwrap(), c(-1.0, 0.0));
        assert_eq!(sys.cocycle_product(&BasePoint::zint(-2), 0).unwrap(), ONE);
        // Direct iteration oracle.
        let mut acc = ONE;
        let mut pt = BasePoint::zint(-2);
        for _ in 0..5 {
            acc *= sys.cocycle.value_at(&pt).unwrap();
            pt = sys.base.apply_theta(&pt).unwrap();
        }
        assert_eq!(sys.cocycle_product(&BasePoint::zint(-2), 5).unwrap(), acc);

        let base = BaseSystem::zinf_shift();
        let trivial = SkewSystem::new(base.clone(), CircleCocycle::trivial(&base)).unwrap();
        for n in 0..10 {
            assert_eq!(trivial.cocycle_product(&BasePoint::zint(-3), n).unwrap(), ONE);
        }
    }

    #[test]
    fn koopman_matches_pointwise_composition() {
        let sys = flip_system();
        let h = TorusObservable::character(&sys.base, 1);
        let kh = sys.koopman(&h).unwrap();
        // Pointwise oracle on a grid: (Kh)(x, z) = h(Φ(x, z)).
        let zs = crate::util::circle_grid(8);
        for x in sys.base.sample_points(6) {
            for &z in &zs {
                let lhs = kh.evaluate(&sys.base, &x, z).unwrap();
                let (x2, z2) = sys.apply(&x, z).unwrap();
                let rhs = h.evaluate(&sys.base, &x2, z2).unwrap();
                assert!((lhs - rhs).norm() < 1e-14);
            }
        }
        // Representation check: slot 1 must be exactly f.
        let expected =
            TorusObservable::monomial(1, BaseFunction::zinf([(0, c(-1.0, 0.0))], ONE));
        assert_eq!(kh, expected);
    }

    #[test]
    fn koopman_base_function_becomes_pullback() {
        let sys = flip_system();
        let g = BaseFunction::zinf([(0, c(3.0, 1.0))], c(0.5, 0.0));
        let h = TorusObservable::monomial(0, g.clone());
        let kh = sys.koopman(&h).unwrap();
        assert_eq!(
            kh,
            TorusObservable::monomial(0, sys.base.pullback(&g).unwrap())
        );
    }

    #[test]
    fn koopman_fixes_invariant_even_mode() {
        // On the flip system, f² ≡ 1, so z² is Φ-invariant exactly.
        let sys = flip_system();
        let h = TorusObservable::character(&sys.base, 2);
        assert_eq!(sys.koopman(&h).unwrap(), h);
    }

    #[test]
    fn koopman_circle_requires_constant_phase() {
        let base = BaseSystem::golden_rotation();
        let cocycle =
            CircleCocycle::circle(1, [(1, c(0.1, 0.0)), (-1, c(0.1, 0.0))], None).unwrap();
        let sys = SkewSystem::new(base.clone(), cocycle).unwrap();
        let h = TorusObservable::character(&base, 1);
        assert!(matches!(
            sys.koopman(&h).unwrap_err(),
            Error::ExactnessBoundary { .. }
        ));
        // The pointwise path still works.
        assert!(sys
            .birkhoff_average(&h, &BasePoint::circle(0.0), ONE, 100)
            .is_ok());
    }

    #[test]
    fn koopman_circle_constant_phase_is_exact() {
        // f = e^{2πi(t + 1/8)}: the phase constant rides along exactly.
        let base = BaseSystem::golden_rotation();
        let cocycle = CircleCocycle::circle(1, [(0, c(0.125, 0.0))], None).unwrap();
        let sys = SkewSystem::new(base.clone(), cocycle).unwrap();
        let h = TorusObservable::character(&base, 2);
        let kh = sys.koopman(&h).unwrap();
        let zs = crate::util::circle_grid(4);
        for k in 0..8 {
            let x = BasePoint::circle(k as f64 / 8.0);
            for &z in &zs {
                let lhs = kh.evaluate(&sys.base, &x, z).unwrap();
                let (x2, z2) = sys.apply(&x, z).unwrap();
                let rhs = h.evaluate(&sys.base, &x2, z2).unwrap();
                assert!((lhs - rhs).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn koopman_semigroup_matches_orbit_power() {
        let sys = flip_system();
        let h = TorusObservable::new(
            BaseKind::ZInf,
            [
                (1, BaseFunction::zinf([(2, c(0.5, 0.5))], ONE)),
                (-2, BaseFunction::zinf([], c(0.0, 1.0))),
            ],
        )
        .unwrap();
        let mut kh = h.clone();
        let steps = 4u64;
        for _ in 0..steps {
            kh = sys.koopman(&kh).unwrap();
        }
        let zs = crate::util::circle_grid(4);
        for x in sys.base.sample_points(8) {
            for &z in &zs {
                let lhs = kh.evaluate(&sys.base, &x, z).unwrap();
                // Φ^n via the cocycle product.
                let mut pt = x;
                for _ in 0..steps {
                    pt = sys.base.apply_theta(&pt).unwrap();
                }
                let zc = sys.cocycle_product(&x, steps).unwrap() * z;
                let rhs = h.evaluate(&sys.base, &pt, zc).unwrap();
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn cesaro_fixes_invariant_observable() {
        let sys = flip_system();
        let h = TorusObservable::character(&sys.base, 2);
        for n in [1, 2, 7] {
            assert_eq!(sys.cesaro_average(&h, n).unwrap(), h);
        }
    }

    #[test]
    fn cesaro_odd_mode_vanishes_at_orbit_midpoint() {
        // Averages of the odd mode collapse at the midpoint of the flip:
        // the partial sums of the cocycle products telescope to 2 there, so
        // the magnitude is exactly 2/N.
        let sys = flip_system();
        let h = TorusObservable::character(&sys.base, 1);
        let n = 2000u64;
        let avg = sys.cesaro_average(&h, n).unwrap();
        let mid = BasePoint::zint(-(n as i64) / 2);
        let v = avg.evaluate(&sys.base, &mid, ONE).unwrap();
        assert!(v.norm() <= 2.0 / n as f64 + 1e-12, "|avg| = {}", v.norm());
        // Direct orbit-summation oracle at the same point.
        let direct = sys.birkhoff_average(&h, &mid, ONE, n).unwrap();
        assert!((v - direct).norm() < 1e-10);
    }

    #[test]
    fn cesaro_cyclic_flip_averages_to_zero() {
        // Cyclic base N=4 with one flip: the full orbit of length 8 kills z.
        let base = BaseSystem::cyclic_shift(4).unwrap();
        let f = CircleCocycle::cyclic(vec![ONE, ONE, ONE, c(-1.0, 0.0)]).unwrap();
        let sys = SkewSystem::new(base.clone(), f).unwrap();
        let h = TorusObservable::character(&base, 1);
        let avg = sys.cesaro_average(&h, 8).unwrap();
        // Brute force over the finite orbit.
        let zs = crate::util::circle_grid(4);
        for r in 0..4 {
            for &z in &zs {
                let exact = avg.evaluate(&sys.base, &BasePoint::cyclic(r), z).unwrap();
                let mut s = KahanSum::new();
                let mut pt = BasePoint::cyclic(r);
                let mut zz = z;
                for _ in 0..8 {
                    s.add(h.evaluate(&sys.base, &pt, zz).unwrap());
                    let (p2, z2) = sys.apply(&pt, zz).unwrap();
                    pt = p2;
                    zz = z2;
                }
                let brute = s.value() / 8.0;
                assert!((exact - brute).norm() < 1e-14);
                assert!(exact.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn birkhoff_constant_is_constant() {
        let sys = flip_system();
        let h = TorusObservable::constant(&sys.base, c(0.7, -0.3));
        let v = sys
            .birkhoff_average(&h, &BasePoint::zint(3), ONE, 57)
            .unwrap();
        assert!((v - c(0.7, -0.3)).norm() < 1e-14);
    }

    #[test]
    fn birkhoff_cross_checks_cesaro() {
        let sys = flip_system();
        let h = TorusObservable::new(
            BaseKind::ZInf,
            [
                (0, BaseFunction::zinf([(1, c(0.2, 0.0))], c(1.0, 0.0))),
                (1, BaseFunction::zinf([(0, c(0.0, 0.5))], c(0.5, 0.5))),
                (2, BaseFunction::zinf([], c(0.0, -1.0))),
            ],
        )
        .unwrap();
        let n = 50;
        let exact = sys.cesaro_average(&h, n).unwrap();
        let z = crate::util::unit_exp(0.3);
        for x in [BasePoint::zint(-7), BasePoint::zint(0), BasePoint::infinity()] {
            let a = exact.evaluate(&sys.base, &x, z).unwrap();
            let b = sys.birkhoff_average(&h, &x, z, n).unwrap();
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn birkhoff_weyl_decay_golden_winding() {
        let base = BaseSystem::golden_rotation();
        let sys = SkewSystem::new(base.clone(), CircleCocycle::winding(1)).unwrap();
        let h = TorusObservable::character(&base, 1);
        let v = sys
            .birkhoff_average(&h, &BasePoint::circle(0.0), ONE, 100_000)
            .unwrap();
        assert!(v.norm() <= 1e-2, "|B_N| = {}", v.norm());
    }

    #[test]
    fn cesaro_commutes_with_dual_rotation_exactly() {
        // β_2 phases are ±1, so the slotwise operations commute bitwise.
        let sys = flip_system();
        let h = TorusObservable::new(
            BaseKind::ZInf,
            [
                (1, BaseFunction::zinf([(0, c(0.3, 0.4))], ONE)),
                (2, BaseFunction::zinf([(1, c(0.0, 1.0))], c(0.5, 0.0))),
                (-1, BaseFunction::zinf([], c(0.25, 0.25))),
            ],
        )
        .unwrap();
        let n = 6;
        let lhs = sys.cesaro_average(&h.dual_rotation(2, 1).unwrap(), n).unwrap();
        let rhs = sys.cesaro_average(&h, n).unwrap().dual_rotation(2, 1).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn diagnostic_even_mode_converges() {
        let sys = flip_system();
        let h = TorusObservable::character(&sys.base, 2);
        let grid = vec![
            (BasePoint::zint(0), ONE),
            (BasePoint::zint(-10), c(0.0, 1.0)),
            (BasePoint::infinity(), ONE),
        ];
        let report = sys
            .ue_diagnostic(&h, &[16, 32, 64, 128], &grid, &UeDiagnosticConfig::default())
            .unwrap();
        assert_eq!(report.verdict, UeVerdict::Converging);
        for row in &report.rows {
            assert!(row.sup_diff < 1e-12);
        }
    }

    #[test]
    fn diagnostic_odd_mode_fails_on_window_matched_schedule() {
        // With grid points as deep as the schedule reaches, the sign flip
        // keeps the consecutive differences at O(1).
        let sys = flip_system();
        let h = TorusObservable::character(&sys.base, 1);
        let mut grid = vec![(BasePoint::zint(0), ONE), (BasePoint::infinity(), ONE)];
        for l in [-16i64, -32, -64] {
            grid.push((BasePoint::zint(l), ONE));
        }
        let report = sys
            .ue_diagnostic(&h, &[16, 32, 64, 128], &grid, &UeDiagnosticConfig::default())
            .unwrap();
        assert_eq!(report.verdict, UeVerdict::NonConverging);
    }

    #[test]
    fn diagnostic_base_observable_converges_for_trivial_cocycle() {
        let base = BaseSystem::zinf_shift();
        let sys = SkewSystem::new(base.clone(), CircleCocycle::trivial(&base)).unwrap();
        let g = BaseFunction::zinf([(0, c(5.0, 0.0)), (3, c(-2.0, 1.0))], ONE);
        let h = TorusObservable::monomial(0, g);
        let grid = vec![
            (BasePoint::zint(-3), ONE),
            (BasePoint::zint(2), ONE),
            (BasePoint::infinity(), ONE),
        ];
        let report = sys
            .ue_diagnostic(&h, &[64, 128, 256, 512], &grid, &UeDiagnosticConfig::default())
            .unwrap();
        assert_eq!(report.verdict, UeVerdict::Converging);
        // The averages settle at μ_o(g) = g(∞) = 1 on every grid point.
        let b = sys
            .birkhoff_average(&h, &BasePoint::zint(-3), ONE, 4096)
            .unwrap();
        assert!((b - ONE).norm() < 1e-2);
    }

    #[test]
    fn schedule_must_increase() {
        let sys = flip_system();
        let h = TorusObservable::character(&sys.base, 1);
        let grid = vec![(BasePoint::infinity(), ONE)];
        assert!(sys
            .ue_diagnostic(&h, &[32, 16], &grid, &UeDiagnosticConfig::default())
            .is_err());
    }
}
