//! Dense complex eigenvalue kernels sized for this crate's needs.
//!
//! Two self-contained solvers:
//!
//! * [`polynomial_roots`]: all roots of a complex polynomial with
//!   multiplicity, via the companion matrix. A companion matrix is already
//!   upper Hessenberg, so the algorithm is a single-shift QR iteration with
//!   Wilkinson shifts, deflation, and a Newton polish against the original
//!   polynomial. Backward-stable to ~1e-12 for the degrees (≤ 64) used here.
//! * [`hermitian_eigenvalues`]: eigenvalues of a Hermitian matrix by the
//!   two-sided complex Jacobi iteration, used to validate positive
//!   semidefiniteness of expectation matrices.

use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Column-major dense complex matrix, only what the kernels need.
#[derive(Debug, Clone)]
struct Mat {
    n: usize,
    a: Vec<Complex64>,
}

impl Mat {
    fn zeros(n: usize) -> Self {
        Self {
            n,
            a: vec![ZERO; n * n],
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.a[i + j * self.n]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i + j * self.n] = v;
    }
}

/// Givens rotation `[c, s; -conj(s), c]` with real `c` zeroing the second
/// entry of `(f, g)`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    if g == ZERO {
        return (1.0, ZERO);
    }
    if f == ZERO {
        return (0.0, g.conj() / g.norm());
    }
    let nf = f.norm();
    let d = (nf * nf + g.norm_sqr()).sqrt();
    let c = nf / d;
    let s = (f / nf) * g.conj() / d;
    (c, s)
}

/// Eigenvalues of `[[a, b], [c, d]]` by the quadratic formula; returned in
/// no particular order.
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    (tr_half + disc, tr_half - disc)
}

/// Eigenvalues of an upper Hessenberg complex matrix by single-shift QR.
fn hessenberg_eigenvalues(mut h: Mat) -> Result<Vec<Complex64>> {
    let n = h.n;
    let mut eigs = vec![ZERO; n];
    if n == 0 {
        return Ok(eigs);
    }
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter_this_block = 0usize;
    let mut total_iters = 0usize;
    let max_total = 60 * n.max(1);

    loop {
        // Deflate negligible subdiagonals in the trailing block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h.at(lo, lo - 1).norm();
            let scale = h.at(lo - 1, lo - 1).norm() + h.at(lo, lo).norm();
            if sub <= eps * scale.max(f64::MIN_POSITIVE) {
                h.set(lo, lo - 1, ZERO);
                break;
            }
            lo -= 1;
        }

        if lo == hi {
            eigs[hi] = h.at(hi, hi);
            if hi == 0 {
                return Ok(eigs);
            }
            hi -= 1;
            iter_this_block = 0;
            continue;
        }
        if lo + 1 == hi {
            let (l1, l2) = eig2(
                h.at(lo, lo),
                h.at(lo, hi),
                h.at(hi, lo),
                h.at(hi, hi),
            );
            eigs[lo] = l1;
            eigs[hi] = l2;
            if lo == 0 {
                return Ok(eigs);
            }
            hi = lo - 1;
            iter_this_block = 0;
            continue;
        }

        total_iters += 1;
        iter_this_block += 1;
        if total_iters > max_total {
            return Err(Error::EigenNoConvergence {
                iterations: max_total,
            });
        }

        // Wilkinson shift from the trailing 2x2, with an occasional
        // exceptional shift to break symmetric stalls.
        let shift = if iter_this_block.is_multiple_of(12) {
            h.at(hi, hi) + Complex64::new(0.75 * h.at(hi, hi - 1).norm(), 0.0)
        } else {
            let (l1, l2) = eig2(
                h.at(hi - 1, hi - 1),
                h.at(hi - 1, hi),
                h.at(hi, hi - 1),
                h.at(hi, hi),
            );
            let target = h.at(hi, hi);
            if (l1 - target).norm() <= (l2 - target).norm() {
                l1
            } else {
                l2
            }
        };

        // Explicit single-shift QR sweep on the active block [lo, hi].
        for k in lo..=hi {
            let v = h.at(k, k) - shift;
            h.set(k, k, v);
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h.at(k, k), h.at(k + 1, k));
            rots.push((c, s));
            for j in k..=hi {
                let x = h.at(k, j);
                let y = h.at(k + 1, j);
                h.set(k, j, c * x + s * y);
                h.set(k + 1, j, -s.conj() * x + c * y);
            }
        }
        for (k, (c, s)) in rots.iter().enumerate() {
            let k = lo + k;
            let top = hi.min(k + 1);
            for i in lo..=top {
                let x = h.at(i, k);
                let y = h.at(i, k + 1);
                h.set(i, k, c * x + s.conj() * y);
                h.set(i, k + 1, -s * x + c * y);
            }
        }
        for k in lo..=hi {
            let v = h.at(k, k) + shift;
            h.set(k, k, v);
        }
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots (with multiplicity) of `Σ coeffs[i]·zⁱ`; the leading
/// coefficient must be nonzero. Roots come from the companion-matrix QR
/// iteration followed by a guarded Newton polish.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = coeffs.len().saturating_sub(1);
    if coeffs.is_empty() || coeffs[degree] == ZERO {
        return Err(Error::invalid(
            "polynomial_roots needs a nonzero leading coefficient",
        ));
    }
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[degree];
    // Companion matrix of the monic polynomial: subdiagonal ones, last
    // column -a_i. Already upper Hessenberg.
    let mut h = Mat::zeros(degree);
    for i in 1..degree {
        h.set(i, i - 1, ONE);
    }
    for (i, &c) in coeffs.iter().take(degree).enumerate() {
        h.set(i, degree - 1, -c / lead);
    }
    let mut roots = hessenberg_eigenvalues(h)?;
    for r in roots.iter_mut() {
        let mut z = *r;
        let (mut pv, _) = horner(coeffs, z);
        for _ in 0..3 {
            let (p, dp) = horner(coeffs, z);
            if dp == ZERO {
                break;
            }
            let step = p / dp;
            let z_next = z - step;
            let (p_next, _) = horner(coeffs, z_next);
            if p_next.norm() < pv.norm() {
                z = z_next;
                pv = p_next;
            } else {
                break;
            }
        }
        *r = z;
    }
    Ok(roots)
}

/// Eigenvalues of a Hermitian matrix (row-major, `k×k`), ascending.
///
/// Two-sided complex Jacobi; the off-diagonal norm drops quadratically, so
/// a handful of sweeps reaches machine precision for the small `k` used by
/// expectation matrices.
pub fn hermitian_eigenvalues(k: usize, a: &[Complex64]) -> Result<Vec<f64>> {
    if a.len() != k * k {
        return Err(Error::InvalidMatrix {
            context: format!("expected {k}x{k} = {} entries, got {}", k * k, a.len()),
        });
    }
    let mut m = a.to_vec();
    let idx = |i: usize, j: usize| i * k + j;
    // The iteration assumes exact Hermitian symmetry; enforce it up front.
    for i in 0..k {
        for j in (i + 1)..k {
            let avg = (m[idx(i, j)] + m[idx(j, i)].conj()) * 0.5;
            m[idx(i, j)] = avg;
            m[idx(j, i)] = avg.conj();
        }
        m[idx(i, i)] = Complex64::new(m[idx(i, i)].re, 0.0);
    }

    for _sweep in 0..40 {
        let mut off = 0.0f64;
        for i in 0..k {
            for j in (i + 1)..k {
                off += m[idx(i, j)].norm_sqr();
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius(k, &m)) {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = m[idx(p, q)];
                let napq = apq.norm();
                if napq < 1e-300 {
                    continue;
                }
                let app = m[idx(p, p)].re;
                let aqq = m[idx(q, q)].re;
                let tau = (aqq - app) / (2.0 * napq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s_mag = t * c;
                let phase = apq / napq;
                let s = s_mag * phase;
                // Rows p, q of J* A, then columns p, q of (J* A) J with
                // J = [[c, s], [-conj(s), c]] acting on the (p, q) plane.
                for j in 0..k {
                    let x = m[idx(p, j)];
                    let y = m[idx(q, j)];
                    m[idx(p, j)] = c * x - s.conj() * y;
                    m[idx(q, j)] = s * x + c * y;
                }
                for i in 0..k {
                    let x = m[idx(i, p)];
                    let y = m[idx(i, q)];
                    m[idx(i, p)] = c * x - s * y;
                    m[idx(i, q)] = s.conj() * x + c * y;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..k).map(|i| m[idx(i, i)].re).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(eigs)
}

fn frobenius(k: usize, m: &[Complex64]) -> f64 {
    (0..k * k).map(|i| m[i].norm_sqr()).sum::<f64>().sqrt()
}
