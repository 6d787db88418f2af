//! Solvers for the cohomological equations of a skew-product.
//!
//! For each level `n ∈ Z` the equation is
//!
//! ```text
//! g(θ_o(x))·f(x)ⁿ = g(x)
//! ```
//!
//! asked either for `g ∈ C(X_o)` (the continuous form) or only
//! `μ_o`-almost everywhere (the measurable form). The levels admitting
//! nontrivial solutions form subgroups `n_o·Z ⊇ m_o·Z` of `Z`, and the
//! quotient index `k_o = m_o / n_o` decides the ergodic character of the
//! skew-product: `n_o = 0` is unique ergodicity, `k_o = 1` unique
//! ergodicity w.r.t. the fixed-point subalgebra, `k_o = 0` topological
//! ergodicity without unique ergodicity, `k_o ≥ 2` strictly more than one
//! invariant conditional expectation.
//!
//! Searches are bounded: `n_o` and `m_o` are certified only within
//! `[1, n_max]` and the report says so. On rotation bases the zero-mode
//! condition is arithmetic (membership in `Z + αZ`) and runs on exact tags
//! only; a missing tag is an explicit error, never a guess.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::base::{zinf_window_span, BaseFunction, BaseKind, BasePoint, BaseSystem, CircleFn};
use crate::error::Error;
use crate::exact::ExactScalar;
use crate::skew::{CircleCocycle, SkewSystem};
use crate::torus::TorusObservable;
use crate::util::unit_exp;
use crate::Result;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default materialization window for measurable witnesses on `Z_∞`.
pub const DEFAULT_WITNESS_WINDOW: i64 = 64;

/// Tolerance for the unimodular consistency products deciding solvability.
const SOLVE_TOL: f64 = 1e-10;

/// Denominators `|e^{2πijα} − 1|` below this are flagged ill-conditioned.
const SMALL_DENOMINATOR: f64 = 1e-8;

/// A unimodular solution witness.
///
/// Witnesses over `Z_∞` and cyclic bases, and pure characters over the
/// circle, live in the exact Fourier representation. A rotation base with a
/// nonconstant phase polynomial produces `e^{2πi(w·t + χ(t))}` instead,
/// which evaluates and exponentiates exactly but is not a finite Fourier
/// series; operations that need one fail with an exactness-boundary error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Witness {
    Fourier { function: BaseFunction },
    CirclePhase { winding: i64, phase: CircleFn },
}

impl Witness {
    pub fn constant_one(kind: BaseKind, n_cyclic: Option<u64>) -> Self {
        let function = match kind {
            BaseKind::Circle => BaseFunction::circle([(0, ONE)]),
            BaseKind::ZInf => BaseFunction::zinf([], ONE),
            BaseKind::Cyclic => BaseFunction::cyclic(vec![ONE; n_cyclic.unwrap_or(1) as usize]),
        };
        Witness::Fourier { function }
    }

    pub fn evaluate(&self, sys: &BaseSystem, x: &BasePoint) -> Result<Complex64> {
        match self {
            Witness::Fourier { function } => sys.evaluate(function, x),
            Witness::CirclePhase { winding, phase } => match x {
                BasePoint::Circle { t } => {
                    Ok(unit_exp(*winding as f64 * t + phase.evaluate(*t).re))
                }
                _ => Err(Error::VariantMismatch {
                    expected: "circle",
                    got: x.kind().name(),
                }),
            },
        }
    }

    /// Integer power, exact in both representations.
    pub fn pow(&self, l: i64) -> Result<Witness> {
        match self {
            Witness::Fourier { function } => match function {
                BaseFunction::Circle(f) => {
                    // A unimodular finite Fourier series is a single
                    // character; its powers shift the frequency.
                    if f.coeffs().len() > 1 {
                        return Err(Error::ExactnessBoundary {
                            context: "powers of a multi-mode circle witness are not representable"
                                .into(),
                        });
                    }
                    match f.coeffs().iter().next() {
                        None => Err(Error::invalid("zero witness has no powers")),
                        Some((&j, &c)) => {
                            let coeff = if l >= 0 {
                                c.powi(l as i32)
                            } else {
                                c.conj().powi((-l) as i32)
                            };
                            Ok(Witness::Fourier {
                                function: BaseFunction::circle([(j * l, coeff)]),
                            })
                        }
                    }
                }
                _ => Ok(Witness::Fourier {
                    function: function.pow_unimodular(l)?,
                }),
            },
            Witness::CirclePhase { winding, phase } => Ok(Witness::CirclePhase {
                winding: winding * l,
                phase: CircleFn::from_coeffs(
                    phase
                        .coeffs()
                        .iter()
                        .map(|(&j, &c)| (j, c * l as f64)),
                ),
            }),
        }
    }

    /// The underlying finite Fourier representation, when there is one.
    pub fn as_base_function(&self) -> Result<&BaseFunction> {
        match self {
            Witness::Fourier { function } => Ok(function),
            Witness::CirclePhase { .. } => Err(Error::ExactnessBoundary {
                context: "witness is a transcendental phase form; only pointwise paths apply"
                    .into(),
            }),
        }
    }
}

/// Kind of solution found at one level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolutionKind {
    Continuous,
    MeasurableOnly,
    None,
}

/// Outcome of solving one cohomological equation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohomologySolution {
    pub level: i64,
    pub kind: SolutionKind,
    /// Unimodular witness, normalized to value 1 at the reference point
    /// (`∞`, `t = 0`, or `r = 0`). Absent when no solution exists.
    pub witness: Option<Witness>,
    /// Tail-consistency factor when continuity fails: the continuous
    /// equation forces `g(ref) = obstruction·g(ref)`.
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::util::cpair_opt"
    )]
    pub obstruction: Option<Complex64>,
    pub note: String,
}

impl CohomologySolution {
    fn none(level: i64, obstruction: Option<Complex64>, note: impl Into<String>) -> Self {
        Self {
            level,
            kind: SolutionKind::None,
            witness: None,
            obstruction,
            note: note.into(),
        }
    }

    pub fn exists(&self) -> bool {
        self.kind != SolutionKind::None
    }
}

/// Ergodic classification from the structure constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    UniquelyErgodic,
    UeWrtFixedPoint,
    TopologicallyErgodicNotUe,
    NonUnique,
}

/// The structure constants of a skew-product with generators and notes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohomologyReport {
    /// Generator of the measurable-solution subgroup (0 = none found).
    pub n_o: i64,
    /// Generator of the continuous-solution subgroup (0 = none found).
    pub m_o: i64,
    /// `m_o = k_o·n_o`; 0 when either side is missing.
    pub k_o: i64,
    /// Measurable generator at level `n_o`.
    pub u: CohomologySolution,
    /// Continuous generator at level `m_o`.
    pub v: CohomologySolution,
    pub classification: Classification,
    /// Search bound: levels beyond it are uncertified.
    pub n_max: i64,
    pub notes: Vec<String>,
}

/// Solves the continuous equation at level `n`.
pub fn solve_continuous(sys: &SkewSystem, n: i64) -> Result<CohomologySolution> {
    solve(sys, n, true, DEFAULT_WITNESS_WINDOW)
}

/// Solves the measurable (`μ_o`-a.e.) equation at level `n`.
pub fn solve_measurable(sys: &SkewSystem, n: i64) -> Result<CohomologySolution> {
    solve(sys, n, false, DEFAULT_WITNESS_WINDOW)
}

/// Same as [`solve_measurable`] with an explicit witness window for `Z_∞`.
pub fn solve_measurable_windowed(
    sys: &SkewSystem,
    n: i64,
    window: i64,
) -> Result<CohomologySolution> {
    solve(sys, n, false, window)
}

fn solve(sys: &SkewSystem, n: i64, continuous: bool, window: i64) -> Result<CohomologySolution> {
    if n == 0 {
        let n_cyc = match &sys.base {
            BaseSystem::CyclicShift { n } => Some(*n),
            _ => None,
        };
        return Ok(CohomologySolution {
            level: 0,
            kind: SolutionKind::Continuous,
            witness: Some(Witness::constant_one(sys.kind(), n_cyc)),
            obstruction: None,
            note: "level 0 admits only constant solutions; normalized to 1".into(),
        });
    }
    match (&sys.base, &sys.cocycle) {
        (BaseSystem::ZInfShift, CircleCocycle::ZInf { .. }) => {
            solve_zinf(sys, n, continuous, window)
        }
        (BaseSystem::CyclicShift { .. }, CircleCocycle::Cyclic { .. }) => solve_cyclic(sys, n),
        (BaseSystem::CircleRotation { .. }, CircleCocycle::Circle { .. }) => {
            solve_circle(sys, n, continuous)
        }
        _ => Err(Error::invalid("skew system variants disagree")),
    }
}

/// `Z_∞` base: back-substitution from the limit. The continuous equation is
/// solvable iff `f(∞)ⁿ = 1` and the full window product of `fⁿ` is 1; the
/// a.e. equation only constrains the value at `∞`.
fn solve_zinf(sys: &SkewSystem, n: i64, continuous: bool, window: i64) -> Result<CohomologySolution> {
    let fpow = match sys.cocycle.power_fn(n)? {
        BaseFunction::ZInf(f) => f,
        _ => unreachable!(),
    };
    let limit_pow = fpow.limit();
    if (limit_pow - ONE).norm() > SOLVE_TOL {
        return Ok(CohomologySolution::none(
            n,
            Some(limit_pow),
            format!("f(∞)^{n} = {limit_pow} rotates the tails; no solution of either kind"),
        ));
    }

    let span = zinf_window_span(&fpow);
    // Back-substitute g(l) = g(l+1)·f(l)ⁿ from g ≡ 1 above the window.
    let (lo, hi, mismatch) = match span {
        None => (0, -1, ONE),
        Some((w_min, w_max)) => {
            let mut prod = ONE;
            for l in (w_min..=w_max).rev() {
                prod *= fpow.value_at(l);
            }
            (w_min, w_max, prod)
        }
    };

    let continuous_ok = (mismatch - ONE).norm() <= SOLVE_TOL;
    if continuous_ok {
        // Below the window the pattern is the constant `mismatch = 1`, so
        // the finite representation is the solution everywhere.
        let mut entries = Vec::new();
        let mut g = ONE;
        for l in (lo..=hi).rev() {
            g *= fpow.value_at(l);
            entries.push((l, g));
        }
        return Ok(CohomologySolution {
            level: n,
            kind: SolutionKind::Continuous,
            witness: Some(Witness::Fourier {
                function: BaseFunction::zinf(entries, ONE),
            }),
            obstruction: None,
            note: "continuous; normalized to 1 at ∞".into(),
        });
    }
    if continuous {
        return Ok(CohomologySolution::none(
            n,
            Some(mismatch),
            format!(
                "tail limits disagree: continuity forces g = ({mismatch})·g at the reference point"
            ),
        ));
    }
    // Measurable-only: μ_o = δ_∞ only constrains the value at ∞, where
    // f(∞)ⁿ = 1 holds. Materialize the back-substituted pattern on a finite
    // window; the class at ∞ is the limit value 1.
    let lo_m = lo.min(-window);
    let mut entries = Vec::new();
    let mut g = ONE;
    for l in (lo_m..=hi).rev() {
        g *= fpow.value_at(l);
        entries.push((l, g));
    }
    Ok(CohomologySolution {
        level: n,
        kind: SolutionKind::MeasurableOnly,
        witness: Some(Witness::Fourier {
            function: BaseFunction::zinf(entries, ONE),
        }),
        obstruction: Some(mismatch),
        note: format!(
            "measurable, not continuous (tail factor {mismatch}); pattern materialized on \
             [{lo_m}, {hi}], class value 1 at ∞"
        ),
    })
}

/// Cyclic base: `supp μ_o = X_o`, so the a.e. equation and the continuous
/// equation coincide. Solvable iff the full-cycle product of `fⁿ` is 1.
fn solve_cyclic(sys: &SkewSystem, n: i64) -> Result<CohomologySolution> {
    let fpow = match sys.cocycle.power_fn(n)? {
        BaseFunction::Cyclic(f) => f,
        _ => unreachable!(),
    };
    let nn = fpow.len() as u64;
    let mut cycle = ONE;
    for r in 0..nn {
        cycle *= fpow.value_at(r);
    }
    if (cycle - ONE).norm() > SOLVE_TOL {
        return Ok(CohomologySolution::none(
            n,
            Some(cycle),
            format!("full-cycle product of fⁿ is {cycle} ≠ 1; strict ergodicity leaves no a.e. escape"),
        ));
    }
    // g(0) = 1 and g(r) = g(r+1)·fⁿ(r) taken downward from the wrap.
    let mut values = vec![ONE; nn as usize];
    for r in (1..nn).rev() {
        let next = if r == nn - 1 { ONE } else { values[r as usize + 1] };
        values[r as usize] = next * fpow.value_at(r);
    }
    Ok(CohomologySolution {
        level: n,
        kind: SolutionKind::Continuous,
        witness: Some(Witness::Fourier {
            function: BaseFunction::cyclic(values),
        }),
        obstruction: None,
        note: "continuous (= measurable on a strictly ergodic base); normalized to 1 at r = 0"
            .into(),
    })
}

/// Rotation base with `f = e^{2πi(m·t + φ(t))}`, `φ` a finite real
/// trigonometric polynomial.
///
/// A nontrivial solution needs `n·m = 0` (the winding term is not a
/// coboundary) and, writing the witness as `e^{2πi(d·t − ψ(t))}`, the
/// zero-mode condition `n·φ̂(0) + d·α ∈ Z` for some integer `d`. The nonzero
/// modes are then `ψ̂(j) = n·φ̂(j)/(e^{2πijα} − 1)`. For a finite phase
/// polynomial the measurable and continuous problems have the same
/// solutions, so `continuous` only changes the note.
fn solve_circle(sys: &SkewSystem, n: i64, continuous: bool) -> Result<CohomologySolution> {
    let (alpha, exact) = match &sys.base {
        BaseSystem::CircleRotation { alpha, exact } => (*alpha, exact),
        _ => unreachable!(),
    };
    let (winding, phase, phase_mean_exact) = match &sys.cocycle {
        CircleCocycle::Circle {
            winding,
            phase,
            phase_mean_exact,
        } => (*winding, phase, phase_mean_exact),
        _ => unreachable!(),
    };
    let coincide_note = if continuous {
        ""
    } else {
        " (finite phase polynomial: measurable and continuous solvability coincide)"
    };

    if n * winding != 0 {
        return Ok(CohomologySolution::none(
            n,
            None,
            format!(
                "winding obstruction: n·m = {} ≠ 0 leaves a non-periodic phase{coincide_note}",
                n * winding
            ),
        ));
    }

    // Exact zero-mode data: the phase mean as an element of Q + Q·α₀.
    let mean_float = phase.coeff(0).re;
    let mean_exact: ExactScalar = match phase_mean_exact {
        Some(tag) => {
            if let Some(alpha_tag) = exact {
                let v = tag.value(alpha_tag.irrational);
                if (v - mean_float).abs() > 1e-9 {
                    return Err(Error::invalid(format!(
                        "phase mean tag evaluates to {v}, stored coefficient is {mean_float}"
                    )));
                }
            }
            *tag
        }
        None if mean_float == 0.0 => ExactScalar::zero(),
        None => {
            return Err(Error::inexact(format!(
                "phase mean {mean_float} carries no exact tag; the zero-mode membership test \
                 n·φ̂(0) + d·α ∈ Z cannot be decided"
            )))
        }
    };
    let scaled = mean_exact.scaled_by_int(n);
    let d = if scaled.rational.numer() == &0 && scaled.scale.numer() == &0 {
        0
    } else {
        let tag = match exact {
            Some(tag) => tag,
            None => {
                return Err(Error::inexact(
                    "rotation angle carries no exact tag; the membership test n·φ̂(0) + d·α ∈ Z \
                     cannot be decided",
                ))
            }
        };
        if tag.scale.numer() == &0 {
            return Err(Error::invalid(
                "exact rotation tag has a zero irrational part; the angle would be rational",
            ));
        }
        match tag.integer_shift_witness(&scaled) {
            Some(d) => d,
            None => {
                return Ok(CohomologySolution::none(
                    n,
                    None,
                    format!("n·φ̂(0) = {} is not in Z + αZ{coincide_note}", scaled.value(tag.irrational)),
                ))
            }
        }
    };

    // ψ̂(j) = n·φ̂(j)/(e^{2πijα} − 1) for j ≠ 0; witness e^{2πi(d·t − ψ(t))}
    // with the constant of ψ chosen so that the value at t = 0 is 1.
    let mut psi = Vec::new();
    let mut ill_conditioned = Vec::new();
    for (&j, &phi_j) in phase.coeffs() {
        if j == 0 {
            continue;
        }
        let denom = unit_exp(j as f64 * alpha) - ONE;
        if denom.norm() < SMALL_DENOMINATOR {
            ill_conditioned.push(j);
        }
        psi.push((j, phi_j * n as f64 / denom));
    }
    let psi_sum: Complex64 = psi.iter().map(|(_, c)| *c).sum();
    psi.push((0, -Complex64::new(psi_sum.re, 0.0)));
    let psi_fn = CircleFn::from_coeffs(psi);

    let witness = if psi_fn.coeffs().is_empty() {
        Witness::Fourier {
            function: BaseFunction::circle([(d, ONE)]),
        }
    } else {
        Witness::CirclePhase {
            winding: d,
            phase: CircleFn::from_coeffs(psi_fn.coeffs().iter().map(|(&j, &c)| (j, -c))),
        }
    };
    let mut note = format!("winding d = {d}; normalized to 1 at t = 0{coincide_note}");
    if !ill_conditioned.is_empty() {
        note.push_str(&format!(
            "; ill-conditioned small denominators at modes {ill_conditioned:?}"
        ));
    }
    Ok(CohomologySolution {
        level: n,
        kind: SolutionKind::Continuous,
        witness: Some(witness),
        obstruction: None,
        note,
    })
}

/// Bounded search for the structure constants and generators.
pub fn compute_report(sys: &SkewSystem, n_max: i64) -> Result<CohomologyReport> {
    if n_max < 1 {
        return Err(Error::invalid("search bound n_max must be >= 1"));
    }
    let mut n_o = 0;
    let mut m_o = 0;
    for n in 1..=n_max {
        if n_o == 0 && solve_measurable(sys, n)?.exists() {
            n_o = n;
        }
        if m_o == 0 && solve_continuous(sys, n)?.exists() {
            m_o = n;
        }
        if n_o != 0 && m_o != 0 {
            break;
        }
    }
    let mut notes = vec![format!(
        "bounded search: n_o, m_o certified only within [1, {n_max}]; 0 means none found, \
         not a nonexistence certificate"
    )];
    let k_o = if n_o > 0 && m_o > 0 {
        if m_o % n_o != 0 {
            return Err(Error::invalid(format!(
                "subgroup structure violated: m_o = {m_o} is not a multiple of n_o = {n_o}"
            )));
        }
        m_o / n_o
    } else {
        0
    };
    let classification = if n_o == 0 {
        Classification::UniquelyErgodic
    } else if k_o == 1 {
        Classification::UeWrtFixedPoint
    } else if k_o == 0 {
        Classification::TopologicallyErgodicNotUe
    } else {
        Classification::NonUnique
    };

    let u = solve_measurable(sys, n_o)?;
    let v = solve_continuous(sys, m_o)?;

    // Cross-check higher levels against powers of the generators.
    if n_o > 0 {
        let mut checked = Vec::new();
        for l in 2..=(n_max / n_o).min(4) {
            let level = l * n_o;
            let direct = solve_measurable(sys, level)?;
            if !direct.exists() {
                notes.push(format!(
                    "warning: level {level} = {l}·n_o admits no solution; subgroup law violated"
                ));
                continue;
            }
            let power = u.witness.as_ref().expect("generator witness").pow(l);
            if let (Ok(power), Some(w)) = (power, direct.witness.as_ref()) {
                let max_dev = max_witness_deviation(sys, w, &power)?;
                if max_dev > 1e-10 {
                    notes.push(format!(
                        "warning: witness at level {level} deviates from the {l}-th power of \
                         u_{n_o} by {max_dev:e}"
                    ));
                } else {
                    checked.push(level);
                }
            }
        }
        if !checked.is_empty() {
            notes.push(format!(
                "levels {checked:?} verified as powers of the generator u_{n_o} to 1e-10"
            ));
        }
    }

    Ok(CohomologyReport {
        n_o,
        m_o,
        k_o,
        u,
        v,
        classification,
        n_max,
        notes,
    })
}

/// Max pointwise deviation between two witnesses over the default grid.
fn max_witness_deviation(sys: &SkewSystem, a: &Witness, b: &Witness) -> Result<f64> {
    let mut max = 0.0f64;
    for x in sys.base.sample_points(32) {
        let va = a.evaluate(&sys.base, &x)?;
        let vb = b.evaluate(&sys.base, &x)?;
        max = max.max((va - vb).norm());
    }
    Ok(max)
}

/// Max defect of the defining relation `g(θ_o x)·f(x)ⁿ − g(x)` over a grid.
/// For the measurable kind on `Z_∞` the relation is only asked at the
/// support of `μ_o`, i.e. at `∞`.
pub fn relation_defect(
    sys: &SkewSystem,
    solution: &CohomologySolution,
    grid: &[BasePoint],
) -> Result<f64> {
    let witness = match &solution.witness {
        Some(w) => w,
        None => return Ok(0.0),
    };
    let mut max = 0.0f64;
    for x in grid {
        let g_x = witness.evaluate(&sys.base, x)?;
        let g_tx = witness.evaluate(&sys.base, &sys.base.apply_theta(x)?)?;
        let f_x = sys.cocycle.value_at(x)?;
        let fpow = if solution.level >= 0 {
            f_x.powi(solution.level as i32)
        } else {
            f_x.conj().powi((-solution.level) as i32)
        };
        max = max.max((g_tx * fpow - g_x).norm());
    }
    Ok(max)
}

/// The observable `g(x)·zⁿ` built from a witness, when a finite Fourier
/// representation exists; it is Koopman-fixed exactly for continuous
/// witnesses.
pub fn invariant_observable(solution: &CohomologySolution) -> Result<TorusObservable> {
    let w = solution
        .witness
        .as_ref()
        .ok_or_else(|| Error::invalid("no witness to lift"))?;
    Ok(TorusObservable::monomial(
        solution.level,
        w.as_base_function()?.clone(),
    ))
}
