//! Small numeric helpers: compensated summation, exact unit phases, and
//! serde adapters for complex data.

use num_complex::Complex64;

/// Compensated (Kahan) accumulator for complex sums.
///
/// Birkhoff sums and quadratures accumulate strictly in index order through
/// this type, which keeps the result reproducible and the rounding error at
/// a couple of ulps per addition.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum_re: f64,
    sum_im: f64,
    c_re: f64,
    c_im: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: Complex64) {
        let y_re = value.re - self.c_re;
        let t_re = self.sum_re + y_re;
        self.c_re = (t_re - self.sum_re) - y_re;
        self.sum_re = t_re;

        let y_im = value.im - self.c_im;
        let t_im = self.sum_im + y_im;
        self.c_im = (t_im - self.sum_im) - y_im;
        self.sum_im = t_im;
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.sum_re, self.sum_im)
    }
}

/// `e^{2πi · turns}` with exact values on the quarter turns.
///
/// The quarter-turn cases show up constantly (characters at rational points,
/// dual rotations on resonant slots) and the exact values are what make
/// representation-level identities hold bit for bit.
pub fn unit_exp(turns: f64) -> Complex64 {
    let t = turns - turns.floor();
    if t == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if t == 0.25 {
        Complex64::new(0.0, 1.0)
    } else if t == 0.5 {
        Complex64::new(-1.0, 0.0)
    } else if t == 0.75 {
        Complex64::new(0.0, -1.0)
    } else {
        let a = std::f64::consts::TAU * t;
        Complex64::new(a.cos(), a.sin())
    }
}

/// `e^{2πi · num/den}` with the fraction reduced over the integers first.
///
/// Reducing `num mod den` in integer arithmetic keeps resonant phases exact:
/// `unit_exp_frac(k·n, n)` is exactly `1` for every integer `k`.
pub fn unit_exp_frac(num: i64, den: i64) -> Complex64 {
    debug_assert!(den > 0);
    let r = num.rem_euclid(den);
    unit_exp(r as f64 / den as f64)
}

/// Equispaced unit-circle grid of the given size: `z_j = e^{2πi j/size}`.
pub fn circle_grid(size: usize) -> Vec<Complex64> {
    (0..size)
        .map(|j| unit_exp_frac(j as i64, size as i64))
        .collect()
}

/// Serde adapter: one complex number as a `[re, im]` pair.
pub mod cpair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        (c.re, c.im).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let (re, im) = <(f64, f64)>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// Serde adapter: `Option<Complex64>` as an optional `[re, im]` pair.
pub mod cpair_opt {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &Option<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        c.map(|c| (c.re, c.im)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Complex64>, D::Error> {
        let pair = <Option<(f64, f64)>>::deserialize(d)?;
        Ok(pair.map(|(re, im)| Complex64::new(re, im)))
    }
}

/// Serde adapter: `Vec<Complex64>` as a list of `[re, im]` pairs.
pub mod cvec {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|c| (c.re, c.im)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = <Vec<(f64, f64)>>::deserialize(d)?;
        Ok(pairs.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
    }
}

/// Serde adapter: `BTreeMap<i64, Complex64>` as a list of `[key, [re, im]]`
/// pairs, ordered by key.
pub mod cmap {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(
        m: &BTreeMap<i64, Complex64>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        m.iter()
            .map(|(k, c)| (*k, (c.re, c.im)))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<i64, Complex64>, D::Error> {
        let pairs = <Vec<(i64, (f64, f64))>>::deserialize(d)?;
        Ok(pairs
            .into_iter()
            .map(|(k, (re, im))| (k, Complex64::new(re, im)))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(unit_exp(0.0), Complex64::new(1.0, 0.0));
        assert_eq!(unit_exp(0.25), Complex64::new(0.0, 1.0));
        assert_eq!(unit_exp(0.5), Complex64::new(-1.0, 0.0));
        assert_eq!(unit_exp(0.75), Complex64::new(0.0, -1.0));
        assert_eq!(unit_exp(3.0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn resonant_fractions_are_exactly_one() {
        for k in -5..=5 {
            assert_eq!(unit_exp_frac(3 * k, 3), Complex64::new(1.0, 0.0));
        }
        assert_eq!(unit_exp_frac(2, 4), Complex64::new(-1.0, 0.0));
        assert_eq!(unit_exp_frac(-1, 4), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn kahan_recovers_small_terms() {
        let mut s = KahanSum::new();
        s.add(Complex64::new(1.0, 0.0));
        for _ in 0..1000 {
            s.add(Complex64::new(1e-18, 1e-18));
        }
        let v = s.value();
        assert!((v.re - (1.0 + 1e-15)).abs() < 1e-17);
        assert!((v.im - 1e-15).abs() < 1e-17);
    }
}
