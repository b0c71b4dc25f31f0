//! The Sato-Tate measure `μ = (2/π) sin²θ dθ` on `[0, π]`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bisection stops once the bracket is narrower than this.
pub const INVERSE_CDF_TOL: f64 = 1e-12;
pub const INVERSE_CDF_MAX_ITER: usize = 80;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignChoice {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl SignChoice {
    pub fn matches(&self, value: f64) -> bool {
        match self {
            SignChoice::Positive => value > 0.0,
            SignChoice::Negative => value < 0.0,
        }
    }

    pub fn symbol(&self) -> char {
        match self {
            SignChoice::Positive => '+',
            SignChoice::Negative => '-',
        }
    }
}

impl std::str::FromStr for SignChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "pos" | "positive" => Ok(SignChoice::Positive),
            "-" | "neg" | "negative" => Ok(SignChoice::Negative),
            other => Err(Error::InvalidArgument(format!("unknown sign `{other}`"))),
        }
    }
}

/// A subinterval of `[0, π]`, stored half-open as `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StInterval {
    lo: f64,
    hi: f64,
}

impl StInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&lo) || !(0.0..=PI).contains(&hi) || lo > hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lo <= theta && theta < self.hi
    }
}

/// Sorted, pairwise-disjoint intervals.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    intervals: Vec<StInterval>,
}

impl IntervalUnion {
    pub fn new(intervals: Vec<StInterval>) -> Result<Self> {
        if intervals.windows(2).any(|w| w[0].hi > w[1].lo) {
            return Err(Error::OverlappingIntervals);
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[StInterval] {
        &self.intervals
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(StInterval::len).sum()
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(theta))
    }
}

/// `F(θ) = θ/π - sin(2θ)/(2π)`.
pub fn st_cdf(theta: f64) -> f64 {
    theta / PI - (2.0 * theta).sin() / (2.0 * PI)
}

pub fn st_density(theta: f64) -> f64 {
    2.0 / PI * theta.sin().powi(2)
}

pub fn st_measure(interval: &StInterval) -> f64 {
    st_cdf(interval.hi) - st_cdf(interval.lo)
}

pub fn st_measure_union(union: &IntervalUnion) -> f64 {
    union.intervals.iter().map(st_measure).sum()
}

/// Inverse of [`st_cdf`] by bisection.
pub fn st_inverse_cdf(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return PI;
    }
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..INVERSE_CDF_MAX_ITER {
        if hi - lo <= INVERSE_CDF_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if st_cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `n` Sato-Tate angles, deterministic in `seed`.
pub fn st_sample(seed: u64, n: usize) -> Result<Vec<f64>> {
    st_sample_range(seed, 0, n)
}

/// Draws `start..start + n` of the stream for `seed`; shards concatenate to
/// the same output as one call.
pub fn st_sample_range(seed: u64, start: u64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // One f64 draw consumes two 32-bit words.
    rng.set_word_pos(2 * start as u128);
    Ok((0..n).map(|_| st_inverse_cdf(rng.gen::<f64>())).collect())
}

/// Maximal open subintervals of `(0, π)` where `sin((m+1)θ)` has the given sign.
///
/// On `(jπ/(m+1), (j+1)π/(m+1))` the sign is `(-1)^j`, so the positive region
/// collects even `j` and the negative one odd `j`, for either parity of `m`.
pub fn sign_region(m: u32, sign: SignChoice) -> Result<IntervalUnion> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let first = match sign {
        SignChoice::Positive => 0,
        SignChoice::Negative => 1,
    };
    let width = PI / (m as f64 + 1.0);
    let intervals = (first..=m)
        .step_by(2)
        .map(|j| {
            let lo = j as f64 * width;
            let hi = if j == m { PI } else { (j as f64 + 1.0) * width };
            StInterval::new(lo, hi)
        })
        .collect::<Result<Vec<_>>>()?;
    IntervalUnion::new(intervals)
}

/// Limiting density of primes with `C(p^m)` of the given sign.
pub fn density_closed_form(m: u32, sign: SignChoice) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    if m % 2 == 1 {
        return Ok(0.5);
    }
    let m1 = m as f64 + 1.0;
    let t = (PI / m1).tan() / (2.0 * PI);
    Ok(match sign {
        SignChoice::Positive => (m as f64 + 2.0) / (2.0 * m1) - t,
        SignChoice::Negative => m as f64 / (2.0 * m1) + t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Composite Simpson quadrature of the density, independent of `st_cdf`.
    fn quad_measure(lo: f64, hi: f64) -> f64 {
        let n = 2000;
        let h = (hi - lo) / n as f64;
        let mut s = st_density(lo) + st_density(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * st_density(lo + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn measure_examples() {
        let full = StInterval::new(0.0, PI).unwrap();
        assert!((st_measure(&full) - 1.0).abs() < 1e-15);
        let half = StInterval::new(0.0, PI / 2.0).unwrap();
        assert!((st_measure(&half) - 0.5).abs() < 1e-15);
        let third = StInterval::new(0.0, PI / 3.0).unwrap();
        let oracle = quad_measure(0.0, PI / 3.0);
        assert!((st_measure(&third) - oracle).abs() < 1e-12);
        assert!((oracle - (1.0 / 3.0 - 3f64.sqrt() / (4.0 * PI))).abs() < 1e-12);
        assert!((oracle - 0.19550).abs() < 1e-5);
    }

    #[test]
    fn point_has_zero_measure() {
        let p = StInterval::new(1.0, 1.0).unwrap();
        assert!(p.is_empty());
        assert_eq!(st_measure(&p), 0.0);
    }

    #[test]
    fn interval_validation() {
        assert!(StInterval::new(-0.1, 1.0).is_err());
        assert!(StInterval::new(1.0, 0.5).is_err());
        assert!(StInterval::new(0.0, 4.0).is_err());
        let a = StInterval::new(0.0, 1.0).unwrap();
        let b = StInterval::new(0.5, 2.0).unwrap();
        assert!(matches!(
            IntervalUnion::new(vec![a, b]),
            Err(Error::OverlappingIntervals)
        ));
        let c = StInterval::new(1.0, 2.0).unwrap();
        assert!(IntervalUnion::new(vec![a, c]).is_ok());
    }

    #[test]
    fn inverse_cdf_midpoint() {
        assert!((st_inverse_cdf(0.5) - PI / 2.0).abs() < 1e-11);
        assert!(st_inverse_cdf(0.0) < 1e-11);
        assert!((st_inverse_cdf(1.0) - PI).abs() < 1e-11);
    }

    #[test]
    fn sampling_is_deterministic_and_shardable() {
        let a = st_sample(7, 1000).unwrap();
        let b = st_sample(7, 1000).unwrap();
        assert_eq!(a, b);
        let mut sharded = st_sample_range(7, 0, 400).unwrap();
        sharded.extend(st_sample_range(7, 400, 600).unwrap());
        assert_eq!(a, sharded);
        assert_ne!(a, st_sample(8, 1000).unwrap());
        assert!(st_sample(1, 0).is_err());
    }

    #[test]
    fn sample_mean_is_centered() {
        let n = 1_000_000;
        let xs = st_sample(2024, n).unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        // Variance of θ under μ by quadrature: ∫ (θ - π/2)² dμ.
        let steps = 20_000;
        let h = PI / steps as f64;
        let var: f64 = (0..steps)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                (t - PI / 2.0).powi(2) * st_density(t) * h
            })
            .sum();
        let sigma = var.sqrt();
        assert!((mean - PI / 2.0).abs() < 3.0 * sigma / (n as f64).sqrt());
    }

    #[test]
    fn kolmogorov_smirnov() {
        let n = 100_000;
        let mut xs = st_sample(99, n).unwrap();
        xs.sort_by(f64::total_cmp);
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = st_cdf(x);
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 0.01, "KS statistic {d}");
    }

    #[test]
    fn sign_region_examples() {
        let r = sign_region(1, SignChoice::Positive).unwrap();
        assert_eq!(r.intervals(), &[StInterval::new(0.0, PI / 2.0).unwrap()]);

        let r = sign_region(2, SignChoice::Positive).unwrap();
        let iv = r.intervals();
        assert_eq!(iv.len(), 2);
        assert!((iv[0].lo() - 0.0).abs() < 1e-15 && (iv[0].hi() - PI / 3.0).abs() < 1e-15);
        assert!((iv[1].lo() - 2.0 * PI / 3.0).abs() < 1e-15 && iv[1].hi() == PI);

        let r = sign_region(2, SignChoice::Negative).unwrap();
        let iv = r.intervals();
        assert_eq!(iv.len(), 1);
        assert!((iv[0].lo() - PI / 3.0).abs() < 1e-15);
        assert!((iv[0].hi() - 2.0 * PI / 3.0).abs() < 1e-15);

        assert!(sign_region(0, SignChoice::Positive).is_err());
    }

    #[test]
    fn sign_region_matches_sine_sign() {
        for m in 1..=12u32 {
            let pos = sign_region(m, SignChoice::Positive).unwrap();
            let neg = sign_region(m, SignChoice::Negative).unwrap();
            for k in 1..1000 {
                let theta = PI * (k as f64 + 0.37) / 1000.0;
                let s = ((m as f64 + 1.0) * theta).sin();
                if s.abs() < 1e-9 {
                    continue;
                }
                assert_eq!(pos.contains(theta), s > 0.0, "m={m} θ={theta}");
                assert_eq!(neg.contains(theta), s < 0.0, "m={m} θ={theta}");
            }
        }
    }

    #[test]
    fn density_examples() {
        assert_eq!(density_closed_form(3, SignChoice::Positive).unwrap(), 0.5);
        assert_eq!(density_closed_form(3, SignChoice::Negative).unwrap(), 0.5);
        let plus = density_closed_form(2, SignChoice::Positive).unwrap();
        let minus = density_closed_form(2, SignChoice::Negative).unwrap();
        assert!((plus - (2.0 / 3.0 - 3f64.sqrt() / (2.0 * PI))).abs() < 1e-15);
        assert!((plus - 0.391_002).abs() < 1e-6);
        assert!((minus - 0.608_998).abs() < 1e-6);
        assert!((plus + minus - 1.0).abs() < 1e-15);
        // Independent route: quadrature over the region.
        let region = sign_region(2, SignChoice::Positive).unwrap();
        let q: f64 = region.intervals().iter().map(|i| quad_measure(i.lo(), i.hi())).sum();
        assert!((q - plus).abs() < 1e-12);
        assert!(density_closed_form(0, SignChoice::Positive).is_err());
    }

    #[test]
    fn closed_form_matches_measure_of_region() {
        for m in 1..=64 {
            for s in [SignChoice::Positive, SignChoice::Negative] {
                let region = sign_region(m, s).unwrap();
                let d = density_closed_form(m, s).unwrap();
                assert!((d - st_measure_union(&region)).abs() <= 1e-10, "m={m} {s:?}");
            }
            let total = density_closed_form(m, SignChoice::Positive).unwrap()
                + density_closed_form(m, SignChoice::Negative).unwrap();
            assert!((total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn sign_parses() {
        assert_eq!("+".parse::<SignChoice>().unwrap(), SignChoice::Positive);
        assert_eq!("neg".parse::<SignChoice>().unwrap(), SignChoice::Negative);
        assert!("x".parse::<SignChoice>().is_err());
    }

    proptest! {
        #[test]
        fn measure_is_additive_and_monotone(a in 0.0f64..PI, b in 0.0f64..PI, c in 0.0f64..PI) {
            let mut v = [a, b, c];
            v.sort_by(f64::total_cmp);
            let left = StInterval::new(v[0], v[1]).unwrap();
            let right = StInterval::new(v[1], v[2]).unwrap();
            let whole = StInterval::new(v[0], v[2]).unwrap();
            let u = IntervalUnion::new(vec![left, right]).unwrap();
            prop_assert!((st_measure_union(&u) - st_measure(&whole)).abs() < 1e-14);
            prop_assert!(st_measure(&left) <= st_measure(&whole) + 1e-15);
            prop_assert!(st_measure(&left) >= -1e-15);
        }

        #[test]
        fn inverse_cdf_inverts(u in 0.0f64..1.0) {
            let theta = st_inverse_cdf(u);
            prop_assert!((st_cdf(theta) - u).abs() < 1e-11);
        }
    }
}
