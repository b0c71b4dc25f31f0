//! Coefficients `C(p^r)` of a normalized eigenform at prime powers.
//!
//! For a prime site `p` with norm `N`, weight `w` and character value `χ(p)`
//! the coefficients satisfy
//!
//! ```text
//! C(p^{r+1}) = C(p) C(p^r) - χ(p) N^{w-1} C(p^{r-1}),   C(1) = 1,
//! ```
//!
//! equivalently `Σ C(p^r) X^r = 1 / ((1 - αX)(1 - βX))` with Satake roots
//! `α + β = C(p)` and `αβ = χ(p) N^{w-1}`. With trivial character everything
//! here is exact over [`BigInt`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::is_prime;

/// Absolute distance from `0` or `π` at which an angle is treated as the endpoint.
pub const ANGLE_ENDPOINT_TOL: f64 = 1e-12;

/// Slack allowed on `|β(p)| <= 2` before [`angle_of`] reports a Deligne violation.
pub const DELIGNE_SLACK: f64 = 1e-9;

/// A prime ideal, seen through its residue characteristic and inertia degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PrimeSite {
    residue_char: u64,
    inertia_degree: u32,
    norm: u64,
}

impl PrimeSite {
    pub fn new(residue_char: u64, inertia_degree: u32) -> Result<Self> {
        if !is_prime(residue_char) {
            return Err(Error::NotPrime(residue_char));
        }
        if inertia_degree == 0 {
            return Err(Error::InvalidArgument("inertia degree must be >= 1".into()));
        }
        let norm = residue_char
            .checked_pow(inertia_degree)
            .ok_or(Error::NormOverflow {
                p: residue_char,
                f: inertia_degree,
            })?;
        Ok(Self {
            residue_char,
            inertia_degree,
            norm,
        })
    }

    /// A degree-one site, i.e. a rational prime.
    pub fn rational(p: u64) -> Result<Self> {
        Self::new(p, 1)
    }

    pub fn residue_char(&self) -> u64 {
        self.residue_char
    }

    pub fn inertia_degree(&self) -> u32 {
        self.inertia_degree
    }

    pub fn norm(&self) -> u64 {
        self.norm
    }

    /// Membership in the set of primes with odd inertia degree.
    pub fn odd_inertia(&self) -> bool {
        self.inertia_degree % 2 == 1
    }
}

impl fmt::Display for PrimeSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={},f={}", self.residue_char, self.inertia_degree)
    }
}

/// A character value at a prime: zero, or the root of unity `exp(2πi·num/den)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Character {
    Zero,
    Turns { num: i64, den: u64 },
}

impl Character {
    pub const TRIVIAL: Character = Character::Turns { num: 0, den: 1 };

    pub fn turns(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("character denominator is zero".into()));
        }
        Ok(Character::Turns { num, den })
    }

    pub fn is_trivial(&self) -> bool {
        match *self {
            Character::Zero => false,
            Character::Turns { num, den } => num.rem_euclid(den as i64) == 0,
        }
    }

    pub fn value(&self) -> Complex64 {
        match *self {
            Character::Zero => Complex64::new(0.0, 0.0),
            Character::Turns { num, den } => {
                let reduced = num.rem_euclid(den as i64) as f64 / den as f64;
                Complex64::from_polar(1.0, 2.0 * PI * reduced)
            }
        }
    }
}

/// An eigenform's arithmetic data together with its table of `a_p`.
#[derive(Clone, Debug)]
pub struct Eigenform {
    label: String,
    weight: u32,
    level_norm: u64,
    ap_table: BTreeMap<PrimeSite, BigInt>,
    character: BTreeMap<PrimeSite, Character>,
}

impl Eigenform {
    pub fn new(label: impl Into<String>, weight: u32, level_norm: u64) -> Result<Self> {
        check_weight(weight)?;
        if level_norm == 0 {
            return Err(Error::InvalidArgument("level norm must be >= 1".into()));
        }
        Ok(Self {
            label: label.into(),
            weight,
            level_norm,
            ap_table: BTreeMap::new(),
            character: BTreeMap::new(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn level_norm(&self) -> u64 {
        self.level_norm
    }

    pub fn ap_table(&self) -> &BTreeMap<PrimeSite, BigInt> {
        &self.ap_table
    }

    pub fn ap(&self, site: &PrimeSite) -> Option<&BigInt> {
        self.ap_table.get(site)
    }

    /// Inserts `a_p`, rejecting values beyond the Deligne bound. Returns the
    /// previous entry, if any.
    pub fn insert_ap(&mut self, site: PrimeSite, ap: BigInt) -> Result<Option<BigInt>> {
        if !within_deligne(&ap, site.norm(), self.weight) {
            let beta = normalized_coeff(&ap, site.norm(), self.weight, 1);
            return Err(Error::DeligneViolation(beta));
        }
        Ok(self.ap_table.insert(site, ap))
    }

    pub fn divides_level(&self, site: &PrimeSite) -> bool {
        self.level_norm % site.residue_char() == 0
    }

    /// `χ(p)`: zero on level divisors, otherwise the stored root of unity
    /// (trivial when none was set).
    pub fn character_at(&self, site: &PrimeSite) -> Character {
        if self.divides_level(site) {
            return Character::Zero;
        }
        self.character
            .get(site)
            .copied()
            .unwrap_or(Character::TRIVIAL)
    }

    pub fn set_character(&mut self, site: PrimeSite, chi: Character) -> Result<()> {
        if chi == Character::Zero && !self.divides_level(&site) {
            return Err(Error::InvalidArgument(format!(
                "character vanishes at {site}, which does not divide the level"
            )));
        }
        self.character.insert(site, chi);
        Ok(())
    }

    pub fn has_trivial_character(&self) -> bool {
        self.character.values().all(Character::is_trivial)
    }

    /// Exact `C(p^r)` at a tabulated site with trivial character.
    pub fn coefficient_at_power(&self, site: &PrimeSite, r: usize) -> Result<BigInt> {
        let ap = self
            .ap(site)
            .ok_or(Error::MissingPrime(site.residue_char()))?;
        match self.character_at(site) {
            Character::Zero => {
                // p | level: the recurrence degenerates to C(p^r) = C(p)^r.
                Ok(Pow::pow(ap, r))
            }
            chi if chi.is_trivial() => hecke_power(ap, site.norm(), self.weight, r),
            _ => Err(Error::NontrivialCharacter(site.residue_char())),
        }
    }
}

pub fn check_weight(weight: u32) -> Result<()> {
    if weight < 2 || weight % 2 != 0 {
        return Err(Error::InvalidWeight(weight));
    }
    Ok(())
}

/// `N^{w-1}`, the constant term of the Hecke recurrence.
pub fn hecke_constant(norm: u64, weight: u32) -> BigInt {
    Pow::pow(BigInt::from(norm), weight - 1)
}

/// Exact test of `a_p^2 <= 4 N^{w-1}`.
pub fn within_deligne(ap: &BigInt, norm: u64, weight: u32) -> bool {
    ap * ap <= hecke_constant(norm, weight) * 4u32
}

/// `C(p^r)` for trivial character, by the three-term recurrence.
pub fn hecke_power(a_p: &BigInt, norm: u64, weight: u32, r: usize) -> Result<BigInt> {
    let mut powers = hecke_powers(a_p, norm, weight, r)?;
    Ok(powers.pop().expect("at least C(1)"))
}

/// `[C(p^0), C(p^1), ..., C(p^r_max)]` for trivial character.
pub fn hecke_powers(a_p: &BigInt, norm: u64, weight: u32, r_max: usize) -> Result<Vec<BigInt>> {
    check_weight(weight)?;
    let q = hecke_constant(norm, weight);
    let mut out = Vec::with_capacity(r_max + 1);
    out.push(BigInt::one());
    if r_max >= 1 {
        out.push(a_p.clone());
    }
    for r in 2..=r_max {
        let next = a_p * &out[r - 1] - &q * &out[r - 2];
        out.push(next);
    }
    Ok(out)
}

/// `C(p^r)` in floating point with an arbitrary character value.
pub fn hecke_power_complex(
    a_p: Complex64,
    chi: Complex64,
    norm: u64,
    weight: u32,
    r: usize,
) -> Result<Complex64> {
    check_weight(weight)?;
    let q = chi * (norm as f64).powi(weight as i32 - 1);
    let (mut prev, mut cur) = (Complex64::new(1.0, 0.0), a_p);
    if r == 0 {
        return Ok(prev);
    }
    for _ in 1..r {
        let next = a_p * cur - q * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

#[derive(Clone, Debug, PartialEq)]
pub enum HeckeValue {
    Exact(BigInt),
    Complex(Complex64),
}

/// `C(p^r)`, exact when `chi` is trivial and complex otherwise.
pub fn hecke_power_with_character(
    a_p: &BigInt,
    chi: Character,
    norm: u64,
    weight: u32,
    r: usize,
) -> Result<HeckeValue> {
    if chi.is_trivial() {
        return hecke_power(a_p, norm, weight, r).map(HeckeValue::Exact);
    }
    let a = Complex64::new(a_p.to_f64().unwrap_or(f64::NAN), 0.0);
    hecke_power_complex(a, chi.value(), norm, weight, r).map(HeckeValue::Complex)
}

/// `β(p^r) = C(p^r) / N^{r(w-1)/2}`, computed as `sign(C)·sqrt(C² / N^{r(w-1)})`
/// so that huge exact coefficients normalize without overflow.
pub fn normalized_coeff(c: &BigInt, norm: u64, weight: u32, r: usize) -> f64 {
    if c.is_zero() {
        return 0.0;
    }
    let num = c.magnitude() * c.magnitude();
    let den: BigUint = Pow::pow(BigUint::from(norm), r * (weight as usize - 1));
    let mag = ratio_to_f64(&num, &den).sqrt();
    match c.sign() {
        Sign::Minus => -mag,
        _ => mag,
    }
}

/// Floating counterpart of [`normalized_coeff`].
pub fn normalized_coeff_f64(c: f64, norm: u64, weight: u32, r: usize) -> f64 {
    let exponent = r as f64 * (weight as f64 - 1.0) / 2.0;
    c / (norm as f64).powf(exponent)
}

fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    // Scale so the integer quotient carries ~64 significant bits.
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let q = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    let mut value = q.to_f64().unwrap_or(f64::INFINITY);
    let mut s = -shift;
    while s != 0 {
        let step = s.clamp(-1000, 1000);
        value *= 2f64.powi(step as i32);
        s -= step;
    }
    value
}

/// `θ ∈ [0, π]` with `β = 2 cos θ`.
pub fn angle_of(beta_p: f64) -> Result<f64> {
    if !beta_p.is_finite() || beta_p.abs() > 2.0 + DELIGNE_SLACK {
        return Err(Error::DeligneViolation(beta_p));
    }
    Ok((beta_p / 2.0).clamp(-1.0, 1.0).acos())
}

/// `sin((m+1)θ) / sin θ`, with the limits `m+1` at `θ = 0` and `(-1)^m (m+1)` at `θ = π`.
pub fn chebyshev_value(theta: f64, m: usize) -> f64 {
    let m1 = (m + 1) as f64;
    if theta.abs() <= ANGLE_ENDPOINT_TOL {
        return m1;
    }
    if (PI - theta).abs() <= ANGLE_ENDPOINT_TOL {
        return if m % 2 == 0 { m1 } else { -m1 };
    }
    (m1 * theta).sin() / theta.sin()
}

/// The Satake roots at a prime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SatakePair {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl SatakePair {
    pub fn sum(&self) -> Complex64 {
        self.alpha + self.beta
    }

    pub fn product(&self) -> Complex64 {
        self.alpha * self.beta
    }

    /// `C(p^r) = (α^{r+1} - β^{r+1}) / (α - β)`, or `(r+1) α^r` for a double root.
    pub fn coefficient(&self, r: usize) -> Complex64 {
        let diff = self.alpha - self.beta;
        let scale = self.alpha.norm().max(self.beta.norm());
        if diff.norm() <= 1e-12 * scale {
            return self.alpha.powu(r as u32) * (r as f64 + 1.0);
        }
        let e = r as u32 + 1;
        (self.alpha.powu(e) - self.beta.powu(e)) / diff
    }
}

/// Roots of `X² - C(p) X + χ(p) N^{w-1}`, ordered so `alpha` has the larger
/// imaginary part (the larger real part when both are real).
pub fn satake_pair(a_p: f64, chi: Complex64, norm: u64, weight: u32) -> SatakePair {
    let a = Complex64::new(a_p, 0.0);
    let prod = chi * (norm as f64).powi(weight as i32 - 1);
    let root = (a * a - prod * 4.0).sqrt();
    let mut alpha = (a + root) / 2.0;
    let mut beta = (a - root) / 2.0;
    // Recover the smaller root from the product to avoid cancellation.
    if prod.norm() > 0.0 {
        if beta.norm() < alpha.norm() {
            beta = prod / alpha;
        } else if alpha.norm() < beta.norm() {
            alpha = prod / beta;
        }
    }
    if (beta.im, beta.re) > (alpha.im, alpha.re) {
        std::mem::swap(&mut alpha, &mut beta);
    }
    SatakePair { alpha, beta }
}

/// The exponents `r >= 1` with `C(p^r) = 0`: none, or `r ≡ t-1 (mod t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZeroPattern {
    Empty,
    Progression { modulus: u32 },
}

impl ZeroPattern {
    pub fn is_zero_at(&self, r: u64) -> bool {
        match *self {
            ZeroPattern::Empty => false,
            ZeroPattern::Progression { modulus } => r >= 1 && (r + 1) % modulus as u64 == 0,
        }
    }

    pub fn modulus(&self) -> Option<u32> {
        match *self {
            ZeroPattern::Empty => None,
            ZeroPattern::Progression { modulus } => Some(modulus),
        }
    }
}

impl fmt::Display for ZeroPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroPattern::Empty => write!(f, "empty"),
            ZeroPattern::Progression { modulus } => {
                write!(f, "r = {} mod {}", modulus - 1, modulus)
            }
        }
    }
}

/// Exact vanishing pattern for trivial character.
///
/// `C(p^r) = 0` for some `r >= 1` forces `α/β` to be a root of unity other
/// than 1, so `4cos²θ = a_p² / N^{w-1}` is rational with `sin θ ≠ 0`; by Niven
/// it is one of 0, 1, 2, 3, giving `θ` a denominator of 2, 3, 4, 6.
pub fn classify_zero_pattern(a_p: &BigInt, norm: u64, weight: u32) -> Result<ZeroPattern> {
    check_weight(weight)?;
    let q = hecke_constant(norm, weight);
    let sq = a_p * a_p;
    let modulus = [(0u32, 2u32), (1, 3), (2, 4), (3, 6)]
        .into_iter()
        .find(|(c, _)| sq == &q * *c)
        .map(|(_, t)| t);
    Ok(match modulus {
        Some(modulus) => ZeroPattern::Progression { modulus },
        None => ZeroPattern::Empty,
    })
}
