//! The parameterized family of invariant conditional expectations.
//!
//! For a skew-product with structure constants `n_o`, `m_o = k_o·n_o > 0`,
//! every positive trace-one matrix `A ∈ M_{k_o}(C)` yields an invariant
//! conditional expectation onto the fixed-point subalgebra:
//!
//! ```text
//! E_A = σ ∘ F_A ∘ ρ₁ ∘ T
//! ```
//!
//! where `T` contracts an observable to its invariant Fourier data against
//! the measurable generator `u`, `ρ₁` reads that data as an element of
//! `C(T)`, `F_A` is the matrix of superdiagonal traces acting on characters,
//! and `σ` expands back through the continuous generator `v`. Two matrices
//! give the same expectation iff all their `l`-traces agree, `E_{(1/k_o)·1}`
//! absorbs the periodic expectation at level `m_o` and dominates every
//! `E_A` with the factor `m_o`, and the axiom suite checks the conditional
//! expectation laws on sampled inputs.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::base::BaseFunction;
use crate::cohomology::CohomologyReport;
use crate::error::Error;
use crate::linalg::hermitian_eigenvalues;
use crate::skew::SkewSystem;
use crate::spectral::LaurentPoly;
use crate::torus::TorusObservable;
use crate::Result;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A positive trace-one matrix parameterizing one expectation `E_A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct ExpectationMatrix {
    k: usize,
    entries: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    k: usize,
    #[serde(with = "crate::util::cvec")]
    entries: Vec<Complex64>,
}

impl TryFrom<RawMatrix> for ExpectationMatrix {
    type Error = Error;
    fn try_from(raw: RawMatrix) -> Result<Self> {
        ExpectationMatrix::new(raw.k, raw.entries)
    }
}

impl From<ExpectationMatrix> for RawMatrix {
    fn from(m: ExpectationMatrix) -> Self {
        RawMatrix {
            k: m.k,
            entries: m.entries,
        }
    }
}

impl ExpectationMatrix {
    /// Validates shape, Hermitian symmetry, unit trace (to 1e-12), and
    /// positive semidefiniteness (min eigenvalue ≥ -1e-10).
    pub fn new(k: usize, entries: Vec<Complex64>) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidMatrix {
                context: "k must be >= 1".into(),
            });
        }
        if entries.len() != k * k {
            return Err(Error::InvalidMatrix {
                context: format!("expected {}x{} = {} entries, got {}", k, k, k * k, entries.len()),
            });
        }
        let mut herm_defect = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                herm_defect =
                    herm_defect.max((entries[i * k + j] - entries[j * k + i].conj()).norm());
            }
        }
        if herm_defect > 1e-10 {
            return Err(Error::InvalidMatrix {
                context: format!("not Hermitian: defect {herm_defect:e}"),
            });
        }
        let trace: Complex64 = (0..k).map(|i| entries[i * k + i]).sum();
        if (trace - ONE).norm() > 1e-12 {
            return Err(Error::InvalidMatrix {
                context: format!("trace is {trace}, must be 1 to 1e-12"),
            });
        }
        let eigs = hermitian_eigenvalues(k, &entries)?;
        let min = eigs.first().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(Error::InvalidMatrix {
                context: format!("not positive semidefinite: min eigenvalue {min:e}"),
            });
        }
        Ok(Self { k, entries })
    }

    /// `(1/k)·identity`, the canonical parameter.
    pub fn normalized_identity(k: usize) -> Result<Self> {
        let mut entries = vec![ZERO; k * k];
        for i in 0..k {
            entries[i * k + i] = Complex64::new(1.0 / k as f64, 0.0);
        }
        Self::new(k, entries)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.k + j]
    }

    /// `tr_l(A) = Σ_j A[j, j+l]`, the sum along the l-th superdiagonal.
    pub fn l_trace(&self, l: usize) -> Result<Complex64> {
        if l >= self.k {
            return Err(Error::invalid(format!(
                "l-trace index {l} out of range for k = {}",
                self.k
            )));
        }
        Ok((0..self.k - l).map(|j| self.entry(j, j + l)).sum())
    }

    /// Sum along the l-th subdiagonal, `Σ_j A[j+l, j]`.
    pub fn sub_trace(&self, l: usize) -> Result<Complex64> {
        if l >= self.k {
            return Err(Error::invalid(format!(
                "subdiagonal index {l} out of range for k = {}",
                self.k
            )));
        }
        Ok((0..self.k - l).map(|j| self.entry(j + l, j)).sum())
    }

    /// The dual parameter `(m_o·(1/k_o)·1 − A)/(m_o − 1)` appearing in the
    /// convex decomposition of the canonical expectation.
    pub fn convex_complement(&self, m_o: i64) -> Result<Self> {
        if m_o < 2 {
            return Err(Error::invalid(
                "convex complement needs m_o >= 2 (otherwise E_can is already extreme)",
            ));
        }
        let k = self.k;
        let mut entries = Vec::with_capacity(k * k);
        let scale = 1.0 / (m_o - 1) as f64;
        for i in 0..k {
            for j in 0..k {
                let id = if i == j {
                    Complex64::new(m_o as f64 / k as f64, 0.0)
                } else {
                    ZERO
                };
                entries.push((id - self.entry(i, j)) * scale);
            }
        }
        Self::new(k, entries)
    }
}

/// `F_A = F_B` iff all superdiagonal traces agree (`l = 1, …, k-1`).
pub fn expectations_equal(a: &ExpectationMatrix, b: &ExpectationMatrix) -> Result<bool> {
    if a.k() != b.k() {
        return Err(Error::DimensionMismatch {
            context: format!("k = {} vs k = {}", a.k(), b.k()),
        });
    }
    for l in 1..a.k() {
        if (a.l_trace(l)? - b.l_trace(l)?).norm() > 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Square matrix over Laurent polynomials, the symbolic home of `U_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyMatrix {
    k: usize,
    entries: Vec<LaurentPoly>,
}

impl PolyMatrix {
    pub fn identity(k: usize) -> Self {
        let mut entries = vec![LaurentPoly::constant(ZERO); k * k];
        for i in 0..k {
            entries[i * k + i] = LaurentPoly::constant(ONE);
        }
        Self { k, entries }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentPoly {
        &self.entries[i * self.k + j]
    }

    fn set(&mut self, i: usize, j: usize, p: LaurentPoly) {
        self.entries[i * self.k + j] = p;
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.k != other.k {
            return Err(Error::DimensionMismatch {
                context: format!("{}x{} times {}x{}", self.k, self.k, other.k, other.k),
            });
        }
        let k = self.k;
        let mut out = PolyMatrix::identity(k);
        for i in 0..k {
            for j in 0..k {
                let mut acc: BTreeMap<i64, Complex64> = BTreeMap::new();
                for l in 0..k {
                    for (ka, ca) in self.entry(i, l).coeff_pairs() {
                        if ca == ZERO {
                            continue;
                        }
                        for (kb, cb) in other.entry(l, j).coeff_pairs() {
                            if cb == ZERO {
                                continue;
                            }
                            *acc.entry(ka + kb).or_insert(ZERO) += ca * cb;
                        }
                    }
                }
                out.set(i, j, LaurentPoly::from_pairs(acc));
            }
        }
        Ok(out)
    }

    /// Conjugate transpose with `z ↦ z⁻¹` inside each entry.
    pub fn adjoint(&self) -> Self {
        let k = self.k;
        let mut out = PolyMatrix::identity(k);
        for i in 0..k {
            for j in 0..k {
                let p = self.entry(j, i);
                out.set(
                    i,
                    j,
                    LaurentPoly::from_pairs(p.coeff_pairs().map(|(l, c)| (-l, c.conj()))),
                );
            }
        }
        out
    }

    pub fn max_deviation(&self, other: &Self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.k {
            for j in 0..self.k {
                let a = self.entry(i, j);
                let b = other.entry(i, j);
                let span = a.degree().max(b.degree()) as i64;
                for l in -span..=span {
                    d = d.max((a.coeff(l) - b.coeff(l)).norm());
                }
            }
        }
        d
    }
}

/// The shift unitary `U_k ∈ M_k(C(T))`: subdiagonal ones, `z` in the top
/// right corner; `U_k^k = z·1` and `U_1 = [z]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftUnitary {
    k: usize,
}

impl ShiftUnitary {
    pub fn new(k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::invalid("shift unitary needs k >= 1"));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> PolyMatrix {
        let k = self.k;
        let mut m = PolyMatrix {
            k,
            entries: vec![LaurentPoly::constant(ZERO); k * k],
        };
        if k == 1 {
            m.set(0, 0, LaurentPoly::from_pairs([(1, ONE)]));
            return m;
        }
        for i in 1..k {
            m.set(i, i - 1, LaurentPoly::constant(ONE));
        }
        m.set(0, k - 1, LaurentPoly::from_pairs([(1, ONE)]));
        m
    }

    /// `U_k^l` for any integer `l`, negative powers through the adjoint.
    pub fn power(&self, l: i64) -> Result<PolyMatrix> {
        let base = if l >= 0 {
            self.matrix()
        } else {
            self.matrix().adjoint()
        };
        let mut acc = PolyMatrix::identity(self.k);
        for _ in 0..l.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }
}

/// `π_k(p) = p(U_k)`, the *-monomorphism `C(T) → M_k(C(T))`.
pub fn embed_pi_k(k: usize, p: &LaurentPoly) -> Result<PolyMatrix> {
    let u = ShiftUnitary::new(k)?;
    let mut out = PolyMatrix {
        k,
        entries: vec![LaurentPoly::constant(ZERO); k * k],
    };
    for (l, c) in p.coeff_pairs() {
        if c == ZERO {
            continue;
        }
        let ul = u.power(l)?;
        for i in 0..k {
            for j in 0..k {
                let merged = LaurentPoly::from_pairs(
                    out.entry(i, j)
                        .coeff_pairs()
                        .chain(ul.entry(i, j).coeff_pairs().map(|(m, v)| (m, c * v))),
                );
                out.set(i, j, merged);
            }
        }
    }
    Ok(out)
}

/// `F_A` on a `C(T)` element by the closed character formula: for
/// `l = m·k + l′` with `0 < l′ < k`,
///
/// ```text
/// χ_l ↦ tr_{l′}(A)·χ_{mk} + subtr_{k−l′}(A)·χ_{(m+1)k}
/// ```
///
/// multiples of `k` are fixed, and negative `l` mirror by conjugation. The
/// output is supported on multiples of `k`.
pub fn f_a(a: &ExpectationMatrix, p: &LaurentPoly) -> Result<LaurentPoly> {
    let k = a.k() as i64;
    let mut acc: BTreeMap<i64, Complex64> = BTreeMap::new();
    let mut add = |slot: i64, v: Complex64| {
        if v != ZERO {
            *acc.entry(slot).or_insert(ZERO) += v;
        }
    };
    for (l, c) in p.coeff_pairs() {
        if c == ZERO {
            continue;
        }
        if l >= 0 {
            let m = l / k;
            let rem = l % k;
            if rem == 0 {
                add(l, c);
            } else {
                add(m * k, c * a.l_trace(rem as usize)?);
                add((m + 1) * k, c * a.sub_trace((k - rem) as usize)?);
            }
        } else {
            let lp = -l;
            let m = lp / k;
            let rem = lp % k;
            if rem == 0 {
                add(l, c);
            } else {
                add(-m * k, c * a.sub_trace(rem as usize)?);
                add(-(m + 1) * k, c * a.l_trace((k - rem) as usize)?);
            }
        }
    }
    Ok(LaurentPoly::from_pairs(acc))
}

/// Matrix-path oracle for [`f_a`]: `π_k⁻¹(Tr(A·π_k(p))·1)`, with the trace
/// of the embedded matrix read back through `χ_j ↦ χ_{jk}`.
pub fn f_a_matrix_oracle(a: &ExpectationMatrix, p: &LaurentPoly) -> Result<LaurentPoly> {
    let k = a.k();
    let m = embed_pi_k(k, p)?;
    let mut trace: BTreeMap<i64, Complex64> = BTreeMap::new();
    for i in 0..k {
        for j in 0..k {
            for (l, c) in m.entry(j, i).coeff_pairs() {
                if c != ZERO {
                    *trace.entry(l).or_insert(ZERO) += a.entry(i, j) * c;
                }
            }
        }
    }
    Ok(LaurentPoly::from_pairs(
        trace.into_iter().map(|(j, c)| (j * k as i64, c)),
    ))
}

/// Element of the invariant algebra `A_1`: a finite association
/// `l ↦ c_l` denoting `Σ_l c_l·(u(x)·z^{n_o})^l` with `u` the measurable
/// generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A1Element {
    pub n_o: i64,
    #[serde(with = "crate::util::cmap")]
    pub coeffs: BTreeMap<i64, Complex64>,
}

impl A1Element {
    pub fn coeff(&self, l: i64) -> Complex64 {
        self.coeffs.get(&l).copied().unwrap_or(ZERO)
    }

    /// `ρ₁`: read the coefficients as a `C(T)` element, `a_l ↦ χ_l`.
    pub fn to_laurent(&self) -> LaurentPoly {
        LaurentPoly::from_pairs(self.coeffs.iter().map(|(&l, &c)| (l, c)))
    }

    /// Expansion into an observable through the generator witness: slot
    /// `n_o·l` holds `c_l·u^l`. At finite points of a `Z_∞` base this uses
    /// the back-substituted witness pattern; integration only sees the
    /// `μ_o`-class.
    pub fn expand(&self, report: &CohomologyReport) -> Result<TorusObservable> {
        let u = report
            .u
            .witness
            .as_ref()
            .ok_or_else(|| Error::MissingStructure {
                context: "report has no measurable generator".into(),
            })?;
        let mut slots = Vec::new();
        let mut kind = None;
        for (&l, &c) in &self.coeffs {
            let f = u.pow(l)?.as_base_function()?.clone().scale(c);
            kind = Some(f.kind());
            slots.push((self.n_o * l, f));
        }
        match kind {
            Some(kind) => TorusObservable::new(kind, slots),
            None => Err(Error::invalid("empty A1 element has no base kind")),
        }
    }
}

/// Element of the fixed-point subalgebra: `l ↦ c_l` denoting
/// `Σ_l c_l·Gˡ` with `G = v(x)·z^{m_o}` built from the continuous
/// generator at level `m_o = n_o·k_o`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointElement {
    pub n_o: i64,
    pub k_o: i64,
    #[serde(with = "crate::util::cmap")]
    pub coeffs: BTreeMap<i64, Complex64>,
}

impl FixedPointElement {
    pub fn coeff(&self, l: i64) -> Complex64 {
        self.coeffs.get(&l).copied().unwrap_or(ZERO)
    }

    pub fn m_o(&self) -> i64 {
        self.n_o * self.k_o
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            n_o: self.n_o,
            k_o: self.k_o,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&l, &v)| (l, c * v))
                .filter(|(_, v)| *v != ZERO)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.n_o != other.n_o || self.k_o != other.k_o {
            return Err(Error::DimensionMismatch {
                context: "fixed-point elements live over different reports".into(),
            });
        }
        let mut coeffs = self.coeffs.clone();
        for (&l, &v) in &other.coeffs {
            let e = coeffs.entry(l).or_insert(ZERO);
            *e -= v;
        }
        coeffs.retain(|_, v| *v != ZERO);
        Ok(Self {
            n_o: self.n_o,
            k_o: self.k_o,
            coeffs,
        })
    }

    /// Largest coefficient difference, over the union of supports.
    pub fn max_coeff_deviation(&self, other: &Self) -> f64 {
        let mut d = 0.0f64;
        for &l in self.coeffs.keys().chain(other.coeffs.keys()) {
            d = d.max((self.coeff(l) - other.coeff(l)).norm());
        }
        d
    }

    /// Expansion into an observable: slot `m_o·l` holds `c_l·vˡ`.
    pub fn expand(&self, report: &CohomologyReport) -> Result<TorusObservable> {
        let v = report
            .v
            .witness
            .as_ref()
            .ok_or_else(|| Error::MissingStructure {
                context: "report has no continuous generator".into(),
            })?;
        let m_o = self.m_o();
        let mut slots = Vec::new();
        let mut kind = None;
        for (&l, &c) in &self.coeffs {
            let f = v.pow(l)?.as_base_function()?.clone().scale(c);
            kind = Some(f.kind());
            slots.push((m_o * l, f));
        }
        match kind {
            Some(kind) => TorusObservable::new(kind, slots),
            None => Err(Error::invalid("empty fixed-point element has no base kind")),
        }
    }
}

fn require_n_o(report: &CohomologyReport) -> Result<()> {
    if report.n_o < 1 {
        return Err(Error::MissingStructure {
            context: "n_o = 0: the system is uniquely ergodic; use the invariant-state path of \
                      canonical_expectation"
                .into(),
        });
    }
    Ok(())
}

fn require_m_o(report: &CohomologyReport) -> Result<()> {
    if report.m_o < 1 {
        return Err(Error::MissingStructure {
            context: "m_o = 0: the fixed-point subalgebra is trivial; only invariant states exist"
                .into(),
        });
    }
    Ok(())
}

/// The contraction `T`: coefficient `l` is `∫ h_{l·n_o}·u^{−l} dμ_o`;
/// slots off the `n_o`-lattice contribute nothing.
pub fn t_map(
    sys: &SkewSystem,
    report: &CohomologyReport,
    h: &TorusObservable,
) -> Result<A1Element> {
    require_n_o(report)?;
    let u = report
        .u
        .witness
        .as_ref()
        .ok_or_else(|| Error::MissingStructure {
            context: "report has no measurable generator".into(),
        })?;
    let n_o = report.n_o;
    let mut coeffs = BTreeMap::new();
    for (n, hn) in h.slots() {
        if n.rem_euclid(n_o) != 0 {
            continue;
        }
        let l = n / n_o;
        let u_inv_l = u.pow(-l)?.as_base_function()?.clone();
        let value = sys.base.integrate(&hn.mul(&u_inv_l)?)?;
        if value != ZERO {
            coeffs.insert(l, value);
        }
    }
    Ok(A1Element { n_o, coeffs })
}

/// `σ`: expands a `C(T)` element supported on multiples of `k_o` into the
/// fixed-point subalgebra, `χ_{k_o·l} ↦ Gˡ`.
pub fn sigma_expand(
    report: &CohomologyReport,
    b: &LaurentPoly,
) -> Result<(FixedPointElement, TorusObservable)> {
    require_m_o(report)?;
    let k_o = report.k_o;
    let mut coeffs = BTreeMap::new();
    for (l, c) in b.coeff_pairs() {
        if c == ZERO {
            continue;
        }
        if l.rem_euclid(k_o) != 0 {
            return Err(Error::invalid(format!(
                "σ input must be supported on multiples of k_o = {k_o}; found χ_{l}"
            )));
        }
        coeffs.insert(l / k_o, c);
    }
    let element = FixedPointElement {
        n_o: report.n_o,
        k_o,
        coeffs,
    };
    let expansion = if element.coeffs.is_empty() {
        TorusObservable::zero(match &report.v.witness {
            Some(w) => w.as_base_function()?.kind(),
            None => {
                return Err(Error::MissingStructure {
                    context: "report has no continuous generator".into(),
                })
            }
        })
    } else {
        element.expand(report)?
    };
    Ok((element, expansion))
}

/// `E_A = σ ∘ F_A ∘ ρ₁ ∘ T` as a fixed-point element.
pub fn e_a(
    sys: &SkewSystem,
    report: &CohomologyReport,
    a: &ExpectationMatrix,
    h: &TorusObservable,
) -> Result<FixedPointElement> {
    require_m_o(report)?;
    if a.k() as i64 != report.k_o {
        return Err(Error::DimensionMismatch {
            context: format!("matrix is {}x{}, k_o = {}", a.k(), a.k(), report.k_o),
        });
    }
    let t = t_map(sys, report, h)?;
    let q = f_a(a, &t.to_laurent())?;
    let k_o = report.k_o;
    let coeffs = q
        .coeff_pairs()
        .filter(|(_, c)| *c != ZERO)
        .map(|(l, c)| {
            debug_assert_eq!(l.rem_euclid(k_o), 0);
            (l / k_o, c)
        })
        .collect();
    Ok(FixedPointElement {
        n_o: report.n_o,
        k_o,
        coeffs,
    })
}

/// [`e_a`] followed by expansion into an observable.
pub fn e_a_observable(
    sys: &SkewSystem,
    report: &CohomologyReport,
    a: &ExpectationMatrix,
    h: &TorusObservable,
) -> Result<TorusObservable> {
    let el = e_a(sys, report, a, h)?;
    if el.coeffs.is_empty() {
        return Ok(TorusObservable::zero(h.kind()));
    }
    el.expand(report)
}

/// Output of the canonical expectation: an element of the fixed-point
/// algebra when it is nontrivial, otherwise the value of the invariant
/// state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum CanonicalOutput {
    Element(FixedPointElement),
    State {
        #[serde(with = "crate::util::cpair")]
        value: Complex64,
        /// False when `n_o > 0` with `m_o = 0`: the state returned is the
        /// product-measure one, but infinitely many invariant states exist.
        unique: bool,
    },
}

/// `E_can`: `E_{(1/k_o)·1}` when `m_o > 0`, the invariant-measure state when
/// the fixed-point subalgebra is trivial.
pub fn canonical_expectation(
    sys: &SkewSystem,
    report: &CohomologyReport,
    h: &TorusObservable,
) -> Result<CanonicalOutput> {
    if report.m_o > 0 {
        let a = ExpectationMatrix::normalized_identity(report.k_o as usize)?;
        return Ok(CanonicalOutput::Element(e_a(sys, report, &a, h)?));
    }
    let value = h.integrate(&sys.base)?;
    Ok(CanonicalOutput::State {
        value,
        unique: report.n_o == 0,
    })
}

/// Absorption residual: sup over the default grid of
/// `|E_can(E_{m_o}(h)) − E_can(h)|` after expansion (slotwise this is exact;
/// the grid check is belt and braces).
pub fn check_absorption(
    sys: &SkewSystem,
    report: &CohomologyReport,
    h: &TorusObservable,
    x_resolution: usize,
    z_size: usize,
) -> Result<f64> {
    require_m_o(report)?;
    let a = ExpectationMatrix::normalized_identity(report.k_o as usize)?;
    let lhs = e_a(sys, report, &a, &h.periodic_expectation(report.m_o)?)?;
    let rhs = e_a(sys, report, &a, h)?;
    let slotwise = lhs.max_coeff_deviation(&rhs);
    let diff = expand_or_zero(sys, report, &lhs)?.sub(&expand_or_zero(sys, report, &rhs)?)?;
    Ok(slotwise.max(diff.sup_on_grid(&sys.base, x_resolution, z_size)?))
}

fn expand_or_zero(
    sys: &SkewSystem,
    report: &CohomologyReport,
    el: &FixedPointElement,
) -> Result<TorusObservable> {
    if el.coeffs.is_empty() {
        Ok(TorusObservable::zero(sys.kind()))
    } else {
        el.expand(report)
    }
}

/// Positive input for the domination check: a squared modulus is positive
/// by construction, anything else is verified on the grid first.
pub enum PositiveObservable {
    /// `h = |p|²` for the given `p`.
    SquaredModulus(TorusObservable),
    /// `h` declared positive; verified to be `≥ -tol` on the grid.
    Declared(TorusObservable),
}

/// Domination margin: min over the grid of
/// `Re(m_o·E_can(h) − E_A(h))`; the Radon–Nikodym bound says it is
/// `≥ -tol` for every admissible `A`.
pub fn check_domination(
    sys: &SkewSystem,
    report: &CohomologyReport,
    a: &ExpectationMatrix,
    input: &PositiveObservable,
    x_resolution: usize,
    z_size: usize,
    tol: f64,
) -> Result<f64> {
    require_m_o(report)?;
    let h = match input {
        PositiveObservable::SquaredModulus(p) => p.abs_squared()?,
        PositiveObservable::Declared(h) => {
            let mut min = f64::INFINITY;
            let zs = crate::util::circle_grid(z_size);
            for x in sys.base.sample_points(x_resolution) {
                for &z in &zs {
                    let v = h.evaluate(&sys.base, &x, z)?;
                    if v.im.abs() > tol {
                        return Err(Error::NotVerifiablyPositive { min: v.im, tol });
                    }
                    min = min.min(v.re);
                }
            }
            if min < -tol {
                return Err(Error::NotVerifiablyPositive { min, tol });
            }
            h.clone()
        }
    };
    let can = ExpectationMatrix::normalized_identity(report.k_o as usize)?;
    let m_o = report.m_o;
    let dominant = e_a(sys, report, &can, &h)?.scale(Complex64::new(m_o as f64, 0.0));
    let dominated = e_a(sys, report, a, &h)?;
    let margin = dominant.sub(&dominated)?;
    let expansion = expand_or_zero(sys, report, &margin)?;
    let mut min = f64::INFINITY;
    let zs = crate::util::circle_grid(z_size);
    for x in sys.base.sample_points(x_resolution) {
        for &z in &zs {
            min = min.min(expansion.evaluate(&sys.base, &x, z)?.re);
        }
    }
    Ok(min)
}

/// Which invariance an expectation is supposed to satisfy.
#[derive(Debug, Clone, Copy)]
pub enum InvarianceKind {
    /// `E(h ∘ Φ) = E(h)`.
    Koopman,
    /// `E(β_n h) = E(h)` for the dual rotation at level `n`.
    DualRotation { n: i64 },
}

/// One axiom-suite result; deviations are max slot deviations except the
/// positivity pair: `positivity_min` is the smallest real grid value of
/// `E(|p|²)` and `positivity_imag` the largest imaginary part (a positive
/// element must come out self-adjoint).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CeAxiomReport {
    pub idempotence: f64,
    pub unitality: f64,
    pub module_property: f64,
    pub invariance: f64,
    pub positivity_min: f64,
    pub positivity_imag: f64,
    pub failures: Vec<String>,
}

impl CeAxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Tolerances and grid sizes for [`ce_axiom_suite`].
///
/// `tol` bounds the slotwise axiom deviations (0.0 demands bitwise
/// identities, achievable on exact-value systems with unit-coefficient
/// module elements); `positivity_tol` bounds the grid positivity check,
/// which goes through pointwise evaluation and accumulates rounding.
#[derive(Debug, Clone, Copy)]
pub struct CeSuiteConfig {
    pub tol: f64,
    pub positivity_tol: f64,
    pub x_resolution: usize,
    pub z_size: usize,
}

impl Default for CeSuiteConfig {
    fn default() -> Self {
        Self {
            tol: 0.0,
            positivity_tol: 1e-9,
            x_resolution: 32,
            z_size: 16,
        }
    }
}

/// Runs the conditional-expectation axioms against sampled inputs.
///
/// `expectation` must map observables to observables (already expanded);
/// `module_elements` are elements of its range used for the module law.
pub fn ce_axiom_suite(
    sys: &SkewSystem,
    expectation: &dyn Fn(&TorusObservable) -> Result<TorusObservable>,
    invariance: InvarianceKind,
    samples: &[TorusObservable],
    positive_roots: &[TorusObservable],
    module_elements: &[TorusObservable],
    config: &CeSuiteConfig,
) -> Result<CeAxiomReport> {
    let CeSuiteConfig {
        tol,
        positivity_tol,
        x_resolution,
        z_size,
    } = *config;
    let mut idempotence = 0.0f64;
    let mut unitality = 0.0f64;
    let mut module_property = 0.0f64;
    let mut invariance_dev = 0.0f64;
    let mut positivity_min = f64::INFINITY;

    let unit = TorusObservable::constant(&sys.base, ONE);
    unitality = unitality.max(observable_deviation(&expectation(&unit)?, &unit)?);

    for h in samples {
        let eh = expectation(h)?;
        idempotence = idempotence.max(observable_deviation(&expectation(&eh)?, &eh)?);
        for g in module_elements {
            let lhs = expectation(&g.mul(h)?)?;
            let rhs = g.mul(&eh)?;
            module_property = module_property.max(observable_deviation(&lhs, &rhs)?);
        }
        let moved = match invariance {
            InvarianceKind::Koopman => sys.koopman(h)?,
            InvarianceKind::DualRotation { n } => h.dual_rotation(n, 1)?,
        };
        invariance_dev = invariance_dev.max(observable_deviation(&expectation(&moved)?, &eh)?);
    }

    let mut positivity_imag = 0.0f64;
    let zs = crate::util::circle_grid(z_size);
    for p in positive_roots {
        let ep = expectation(&p.abs_squared()?)?;
        for x in sys.base.sample_points(x_resolution) {
            for &z in &zs {
                let v = ep.evaluate(&sys.base, &x, z)?;
                positivity_min = positivity_min.min(v.re);
                positivity_imag = positivity_imag.max(v.im.abs());
            }
        }
    }
    if positive_roots.is_empty() {
        positivity_min = 0.0;
    }

    let mut failures = Vec::new();
    for (name, value) in [
        ("idempotence", idempotence),
        ("unitality", unitality),
        ("module_property", module_property),
        ("invariance", invariance_dev),
    ] {
        if value > tol {
            failures.push(format!("{name}: deviation {value:e} > {tol:e}"));
        }
    }
    if positivity_min < -positivity_tol {
        failures.push(format!(
            "positivity: min {positivity_min:e} < -{positivity_tol:e}"
        ));
    }
    if positivity_imag > positivity_tol {
        failures.push(format!(
            "positivity: non-real output, max imaginary part {positivity_imag:e} > \
             {positivity_tol:e}"
        ));
    }
    Ok(CeAxiomReport {
        idempotence,
        unitality,
        module_property,
        invariance: invariance_dev,
        positivity_min,
        positivity_imag,
        failures,
    })
}

/// Max representation-level difference between two observables: slots are
/// compared coefficient by coefficient in the base representation.
pub fn observable_deviation(a: &TorusObservable, b: &TorusObservable) -> Result<f64> {
    let mut d = 0.0f64;
    let slots: std::collections::BTreeSet<i64> =
        a.slots().map(|(n, _)| n).chain(b.slots().map(|(n, _)| n)).collect();
    for n in slots {
        d = d.max(match (a.slot(n), b.slot(n)) {
            (Some(fa), Some(fb)) => base_deviation(fa, fb)?,
            (Some(f), None) | (None, Some(f)) => base_sup(f),
            (None, None) => 0.0,
        });
    }
    Ok(d)
}

fn base_deviation(a: &BaseFunction, b: &BaseFunction) -> Result<f64> {
    let diff = a.add(&b.scale(Complex64::new(-1.0, 0.0)))?;
    Ok(base_sup(&diff))
}

/// Coefficient-level sup bound of a base function.
fn base_sup(f: &BaseFunction) -> f64 {
    match f {
        BaseFunction::Circle(c) => c.coeffs().values().map(|v| v.norm()).sum(),
        BaseFunction::ZInf(z) => z
            .window()
            .values()
            .map(|v| v.norm())
            .fold(z.limit().norm(), f64::max),
        BaseFunction::Cyclic(c) => c
            .materialize()
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max),
    }
}
