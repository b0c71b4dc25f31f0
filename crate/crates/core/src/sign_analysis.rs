//! Empirical sign statistics: sign changes along a sequence, the set of
//! exponents where two forms are simultaneously non-zero, densities over
//! primes, and simultaneous signs of two Chebyshev sequences.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hecke::{Eigenform, PrimeSite, ZeroPattern};
use crate::primes::primes_up_to;
use crate::satotate::{density_closed_form, SignChoice};

/// Tolerance attached to prime-density reports unless overridden.
pub const PRIME_DENSITY_TOL: f64 = 0.02;

/// Tolerance attached to simultaneous-sign reports unless overridden.
pub const SIMULTANEOUS_TOL: f64 = 0.01;

/// A product `sin((n+1)θ_f)·sin((n+1)θ_g)` factor counts as zero below
/// `ZERO_SINE_PER_STEP·(n+1)`: the rounding of θ itself grows linearly in `n`.
pub const ZERO_SINE_PER_STEP: f64 = 1e-12;

/// Resolution of the box grid used by [`weyl_discrepancy`].
pub const DISCREPANCY_GRID: usize = 64;

pub trait HasSign {
    fn sign_ord(&self) -> Ordering;
}

impl HasSign for f64 {
    fn sign_ord(&self) -> Ordering {
        self.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
    }
}

impl HasSign for i64 {
    fn sign_ord(&self) -> Ordering {
        self.cmp(&0)
    }
}

impl HasSign for BigInt {
    fn sign_ord(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
}

/// Values indexed from 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SignSequence<T> {
    pub values: Vec<T>,
}

impl<T: HasSign> SignSequence<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn sign_changes(&self) -> Vec<(usize, usize)> {
        sign_changes(&self.values)
    }
}

/// Pairs `(i, j)` (1-based) of consecutive non-zero entries of opposite sign.
pub fn sign_changes<T: HasSign>(values: &[T]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut last: Option<(usize, Ordering)> = None;
    for (idx, v) in values.iter().enumerate() {
        let s = v.sign_ord();
        if s == Ordering::Equal {
            continue;
        }
        if let Some((i, prev)) = last {
            if prev != s {
                out.push((i, idx + 1));
            }
        }
        last = Some((idx + 1, s));
    }
    out
}

/// `A_p = {m >= 1 : C(p^m, f) C(p^m, g) ≠ 0}`, described exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonvanishingSet {
    /// Every `m`; density 1.
    AllOfN,
    /// Exactly the even `m`; density 1/2.
    EvenIndices,
    /// Periodic with the listed residues in `1..=period`.
    Other {
        t_f: Option<u32>,
        t_g: Option<u32>,
        period: u64,
        residues: Vec<u64>,
    },
}

impl NonvanishingSet {
    pub fn contains(&self, m: u64) -> bool {
        match self {
            NonvanishingSet::AllOfN => m >= 1,
            NonvanishingSet::EvenIndices => m >= 1 && m % 2 == 0,
            NonvanishingSet::Other {
                period, residues, ..
            } => {
                let r = (m - 1) % period + 1;
                m >= 1 && residues.binary_search(&r).is_ok()
            }
        }
    }

    /// Natural density as a reduced fraction.
    pub fn density_fraction(&self) -> (u64, u64) {
        match self {
            NonvanishingSet::AllOfN => (1, 1),
            NonvanishingSet::EvenIndices => (1, 2),
            NonvanishingSet::Other {
                period, residues, ..
            } => {
                let g = (residues.len() as u64).gcd(period);
                (residues.len() as u64 / g, period / g)
            }
        }
    }

    pub fn density(&self) -> f64 {
        let (n, d) = self.density_fraction();
        n as f64 / d as f64
    }
}

/// Combines the zero patterns of two forms at the same prime site.
pub fn classify_nonvanishing_set(
    f: (&PrimeSite, ZeroPattern),
    g: (&PrimeSite, ZeroPattern),
) -> Result<NonvanishingSet> {
    if f.0 != g.0 {
        return Err(Error::InconsistentSites(f.0.to_string(), g.0.to_string()));
    }
    let (pf, pg) = (f.1, g.1);
    let period = (pf.modulus().unwrap_or(1) as u64).lcm(&(pg.modulus().unwrap_or(1) as u64));
    let residues: Vec<u64> = (1..=period)
        .filter(|&m| !pf.is_zero_at(m) && !pg.is_zero_at(m))
        .collect();
    if residues.len() as u64 == period {
        return Ok(NonvanishingSet::AllOfN);
    }
    if period % 2 == 0 && residues.iter().copied().eq((2..=period).step_by(2)) {
        return Ok(NonvanishingSet::EvenIndices);
    }
    Ok(NonvanishingSet::Other {
        t_f: pf.modulus(),
        t_g: pg.modulus(),
        period,
        residues,
    })
}

/// Predicted vs. observed density with its counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub label: String,
    pub predicted: Option<f64>,
    pub empirical: f64,
    pub numerator: u64,
    pub denominator: u64,
    pub tolerance: f64,
    /// Without a prediction there is nothing to fail, so this is `true`.
    pub pass: bool,
}

impl DensityReport {
    pub fn new(
        label: impl Into<String>,
        predicted: Option<f64>,
        numerator: u64,
        denominator: u64,
        tolerance: f64,
    ) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::InvalidArgument("density over an empty set".into()));
        }
        let empirical = numerator as f64 / denominator as f64;
        let mut report = Self {
            label: label.into(),
            predicted,
            empirical,
            numerator,
            denominator,
            tolerance,
            pass: true,
        };
        report.pass = report.evaluate();
        Ok(report)
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.pass = self.evaluate();
        self
    }

    pub fn deviation(&self) -> Option<f64> {
        self.predicted.map(|p| (self.empirical - p).abs())
    }

    fn evaluate(&self) -> bool {
        self.deviation().is_none_or(|d| d <= self.tolerance)
    }
}

/// Share of prime sites of norm `<= x` where `C(p^m)` has the requested sign.
///
/// The denominator counts every site of norm `<= x`; sites over primes
/// dividing the level never enter the numerator.
pub fn empirical_prime_density(
    form: &Eigenform,
    m: u32,
    sign: SignChoice,
    x: u64,
) -> Result<DensityReport> {
    let predicted = density_closed_form(m, sign)?;
    let covered: BTreeSet<u64> = form.ap_table().keys().map(|s| s.residue_char()).collect();
    if let Some(&p) = primes_up_to(x).iter().find(|p| !covered.contains(p)) {
        return Err(Error::MissingPrime(p));
    }
    let (mut hits, mut total) = (0u64, 0u64);
    for site in form.ap_table().keys().filter(|s| s.norm() <= x) {
        total += 1;
        if form.divides_level(site) {
            continue;
        }
        let c = form.coefficient_at_power(site, m as usize)?;
        let wanted = match sign {
            SignChoice::Positive => Ordering::Greater,
            SignChoice::Negative => Ordering::Less,
        };
        if c.sign_ord() == wanted {
            hits += 1;
        }
    }
    if total == 0 {
        return Err(Error::InvalidArgument(format!(
            "form `{}` has no prime sites of norm <= {x}",
            form.label()
        )));
    }
    let label = format!("{}: sign {} of C(p^{m}), N(p) <= {x}", form.label(), sign.symbol());
    DensityReport::new(label, Some(predicted), hits, total, PRIME_DENSITY_TOL)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimultaneousDensity {
    pub positive: DensityReport,
    pub negative: DensityReport,
    /// Indices where at least one factor vanishes.
    pub zero: u64,
}

/// Signs of `sin((n+1)θ_f)·sin((n+1)θ_g)` for `n = 1..=count`.
///
/// The limiting share 1/2 is predicted only when the caller asserts that
/// `1, θ_f/2π, θ_g/2π` are rationally independent.
pub fn simultaneous_density(
    theta_f: f64,
    theta_g: f64,
    count: u64,
    independent: bool,
) -> Result<SimultaneousDensity> {
    let open = |t: f64| t > 0.0 && t < std::f64::consts::PI;
    if !open(theta_f) || !open(theta_g) {
        return Err(Error::InvalidArgument(format!(
            "angles must lie in (0, π), got {theta_f}, {theta_g}"
        )));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("count must be >= 1".into()));
    }
    let (mut pos, mut neg, mut zero) = (0u64, 0u64, 0u64);
    for n in 1..=count {
        let k = (n + 1) as f64;
        let eps = ZERO_SINE_PER_STEP * k;
        let a = (k * theta_f).sin();
        let b = (k * theta_g).sin();
        if a.abs() <= eps || b.abs() <= eps {
            zero += 1;
        } else if (a > 0.0) == (b > 0.0) {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    let predicted = independent.then_some(0.5);
    let label = |s: char| format!("sign {s} of C(p^n,f)C(p^n,g), θ_f={theta_f}, θ_g={theta_g}, n <= {count}");
    Ok(SimultaneousDensity {
        positive: DensityReport::new(label('+'), predicted, pos, count, SIMULTANEOUS_TOL)?,
        negative: DensityReport::new(label('-'), predicted, neg, count, SIMULTANEOUS_TOL)?,
        zero,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    /// Max over anchored grid boxes `[0, i/64) × [0, j/64)` of
    /// `|count/N − area|`; a lower bound for the star discrepancy.
    pub value: f64,
    /// The orbit `({nα}, {nβ})` repeats a point within `N` steps (or is a single point).
    pub degenerate: bool,
    pub count: u64,
}

fn frac(x: f64) -> f64 {
    let f = x.rem_euclid(1.0);
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Grid estimate of the star discrepancy of `({nα}, {nβ})`, `n = 1..=count`.
pub fn weyl_discrepancy(alpha: f64, beta: f64, count: u64) -> Result<Discrepancy> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be >= 1".into()));
    }
    const G: usize = DISCREPANCY_GRID;
    const QUANTUM: f64 = 1e9;
    let mut cells = vec![[0u64; G]; G];
    let mut seen: HashSet<(u64, u64)> = HashSet::new();
    let mut repeated = false;
    for n in 1..=count {
        let x = frac(n as f64 * alpha);
        let y = frac(n as f64 * beta);
        cells[((x * G as f64) as usize).min(G - 1)][((y * G as f64) as usize).min(G - 1)] += 1;
        if !repeated {
            let key = |v: f64| ((v * QUANTUM).round() as u64) % QUANTUM as u64;
            repeated = !seen.insert((key(x), key(y)));
        }
    }
    // prefix[i][j] = points with x-cell < i and y-cell < j.
    let mut prefix = vec![vec![0u64; G + 1]; G + 1];
    for i in 0..G {
        for j in 0..G {
            prefix[i + 1][j + 1] = cells[i][j] + prefix[i][j + 1] + prefix[i + 1][j] - prefix[i][j];
        }
    }
    let n = count as f64;
    let mut worst = 0.0f64;
    for i in 1..=G {
        for j in 1..=G {
            let area = (i * j) as f64 / (G * G) as f64;
            worst = worst.max((prefix[i][j] as f64 / n - area).abs());
        }
    }
    let single_point = frac(alpha) == 0.0 && frac(beta) == 0.0;
    Ok(Discrepancy {
        value: worst,
        degenerate: repeated || single_point,
        count,
    })
}
