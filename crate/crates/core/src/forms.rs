//! Eigenform data over `Q`: exact q-expansions of the level-one forms of
//! weight 12 (`Δ`) and 16, multiplicative expansion from prime data, and the
//! CSV formats for prime tables and full coefficient tables.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::hecke::{check_weight, hecke_powers, within_deligne, Eigenform, PrimeSite};
use crate::primes::smallest_prime_factors;

/// Largest expansion computed unless the caller raises it.
pub const DEFAULT_CEILING: usize = 1_000_000;

/// A truncated power series `Σ_{n <= limit} c_n q^n` with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<BigInt>,
}

impl PowerSeries {
    pub fn zero(limit: usize) -> Self {
        Self {
            coeffs: vec![BigInt::zero(); limit + 1],
        }
    }

    pub fn one(limit: usize) -> Self {
        let mut s = Self::zero(limit);
        s.coeffs[0] = BigInt::one();
        s
    }

    /// Pads or truncates `coeffs` to length `limit + 1`.
    pub fn from_coeffs(mut coeffs: Vec<BigInt>, limit: usize) -> Self {
        coeffs.resize(limit + 1, BigInt::zero());
        Self { coeffs }
    }

    pub fn limit(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &BigInt {
        &self.coeffs[n]
    }

    pub fn nonzero_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    /// Multiplication by `q^k`, truncated.
    pub fn shift(&self, k: usize) -> Self {
        let limit = self.limit();
        let mut out = Self::zero(limit);
        for n in k..=limit {
            out.coeffs[n] = self.coeffs[n - k].clone();
        }
        out
    }

    /// Truncated product at the smaller of the two limits. Cost is
    /// `nnz(sparser factor) × limit`.
    pub fn mul(&self, other: &Self) -> Self {
        let limit = self.limit().min(other.limit());
        let (sparse, dense) = if self.nonzero_count() <= other.nonzero_count() {
            (self, other)
        } else {
            (other, self)
        };
        let terms: Vec<(usize, &BigInt)> = sparse.coeffs[..=limit]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        if let Some(out) = mul_i128(&terms, &dense.coeffs[..=limit]) {
            return out;
        }
        let mut out = Self::zero(limit);
        for (i, a) in terms {
            for n in i..=limit {
                out.coeffs[n] += a * &dense.coeffs[n - i];
            }
        }
        out
    }

    /// `self^k`, truncated.
    ///
    /// With constant term 1 this runs Miller's recurrence
    /// `n b_n = Σ_{j=1}^{n} ((k+1)j − n) a_j b_{n−j}` over the non-zero `a_j`;
    /// otherwise it falls back to binary exponentiation.
    pub fn pow(&self, k: u32) -> Self {
        let limit = self.limit();
        if k == 0 {
            return Self::one(limit);
        }
        if !self.coeffs[0].is_one() {
            return self.pow_binary(k);
        }
        let terms: Vec<(usize, &BigInt)> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, c)| !c.is_zero())
            .collect();
        if let Some(out) = miller_i128(&terms, k, limit) {
            return out;
        }
        let mut b: Vec<BigInt> = Vec::with_capacity(limit + 1);
        b.push(BigInt::one());
        let k1 = k as i64 + 1;
        for n in 1..=limit {
            let mut acc = BigInt::zero();
            for &(j, a) in terms.iter().take_while(|(j, _)| *j <= n) {
                let w = k1 * j as i64 - n as i64;
                acc += a * &b[n - j] * w;
            }
            let (q, r) = acc.div_rem(&BigInt::from(n));
            debug_assert!(r.is_zero(), "inexact division at n = {n}");
            b.push(q);
        }
        Self { coeffs: b }
    }

    fn pow_binary(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.limit());
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

fn to_i128_terms(terms: &[(usize, &BigInt)]) -> Option<Vec<(usize, i128)>> {
    terms.iter().map(|&(i, c)| c.to_i128().map(|v| (i, v))).collect()
}

fn mul_i128(terms: &[(usize, &BigInt)], dense: &[BigInt]) -> Option<PowerSeries> {
    let terms = to_i128_terms(terms)?;
    let dense: Vec<i128> = dense.iter().map(ToPrimitive::to_i128).collect::<Option<_>>()?;
    let limit = dense.len() - 1;
    let mut out = vec![0i128; limit + 1];
    for (i, a) in terms {
        for n in i..=limit {
            out[n] = out[n].checked_add(a.checked_mul(dense[n - i])?)?;
        }
    }
    Some(PowerSeries {
        coeffs: out.into_iter().map(BigInt::from).collect(),
    })
}

fn miller_i128(terms: &[(usize, &BigInt)], k: u32, limit: usize) -> Option<PowerSeries> {
    let terms = to_i128_terms(terms)?;
    let mut b = vec![0i128; limit + 1];
    b[0] = 1;
    let k1 = k as i128 + 1;
    for n in 1..=limit {
        let mut acc: i128 = 0;
        for &(j, a) in terms.iter().take_while(|(j, _)| *j <= n) {
            let w = k1 * j as i128 - n as i128;
            acc = acc.checked_add(a.checked_mul(w)?.checked_mul(b[n - j])?)?;
        }
        debug_assert_eq!(acc % n as i128, 0);
        b[n] = acc / n as i128;
    }
    Some(PowerSeries {
        coeffs: b.into_iter().map(BigInt::from).collect(),
    })
}

/// `∏_{n>=1} (1 − q^n) = Σ_{k∈Z} (−1)^k q^{k(3k−1)/2}` (pentagonal numbers).
pub fn euler_product(limit: usize) -> PowerSeries {
    let mut s = PowerSeries::zero(limit);
    s.coeffs[0] = BigInt::one();
    for k in 1u64.. {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let p1 = (k * (3 * k - 1) / 2) as usize;
        if p1 > limit {
            break;
        }
        s.coeffs[p1] += sign;
        let p2 = (k * (3 * k + 1) / 2) as usize;
        if p2 <= limit {
            s.coeffs[p2] += sign;
        }
    }
    s
}

/// `∏ (1 − q^n)^3 = Σ_{k>=0} (−1)^k (2k+1) q^{k(k+1)/2}` (Jacobi).
pub fn euler_product_cubed(limit: usize) -> PowerSeries {
    let mut s = PowerSeries::zero(limit);
    for k in 0u64.. {
        let e = (k * (k + 1) / 2) as usize;
        if e > limit {
            break;
        }
        let c = 2 * k as i64 + 1;
        s.coeffs[e] = BigInt::from(if k % 2 == 0 { c } else { -c });
    }
    s
}

/// `E_4 = 1 + 240 Σ σ_3(n) q^n`.
pub fn eisenstein_e4(limit: usize) -> PowerSeries {
    let mut sigma3 = vec![0u128; limit + 1];
    for d in 1..=limit {
        let cube = (d as u128).pow(3);
        for n in (d..=limit).step_by(d) {
            sigma3[n] += cube;
        }
    }
    let mut coeffs: Vec<BigInt> = sigma3.into_iter().map(|s| BigInt::from(240 * s)).collect();
    coeffs[0] = BigInt::one();
    PowerSeries { coeffs }
}

/// Exact coefficients `C(1..=limit)` of a q-expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientTable {
    // values[0] is unused padding so that values[n] = C(n).
    values: Vec<BigInt>,
}

impl CoefficientTable {
    /// From `C(1), C(2), ...`.
    pub fn from_values(values: Vec<BigInt>) -> Self {
        let mut v = Vec::with_capacity(values.len() + 1);
        v.push(BigInt::zero());
        v.extend(values);
        Self { values: v }
    }

    /// Coefficients `1..=limit` of a power series.
    pub fn from_series(series: &PowerSeries) -> Self {
        let mut values = series.coeffs().to_vec();
        values[0] = BigInt::zero();
        Self { values }
    }

    pub fn zeros(limit: usize) -> Self {
        Self {
            values: vec![BigInt::zero(); limit + 1],
        }
    }

    pub fn limit(&self) -> usize {
        self.values.len() - 1
    }

    /// `C(n)` for `1 <= n <= limit`.
    pub fn get(&self, n: usize) -> Option<&BigInt> {
        (n >= 1).then(|| self.values.get(n)).flatten()
    }

    /// `C(n)`, failing when `n` lies beyond the table.
    pub fn at(&self, n: usize) -> Result<&BigInt> {
        self.get(n).ok_or(Error::TableTooShort {
            needed: n,
            limit: self.limit(),
        })
    }

    pub fn set(&mut self, n: usize, value: BigInt) {
        assert!(n >= 1 && n <= self.limit(), "index {n} out of range");
        self.values[n] = value;
    }

    /// `(n, C(n))` for `n = 1..=limit`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &BigInt)> {
        self.values.iter().enumerate().skip(1)
    }

    pub fn scale(&self, factor: &BigInt) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn truncate(&self, limit: usize) -> Self {
        Self {
            values: self.values[..=limit.min(self.limit())].to_vec(),
        }
    }

    /// Writes the `n,C` full-table CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "C"])?;
        for (n, c) in self.iter() {
            w.write_record([n.to_string(), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_limit(limit: usize, ceiling: usize) -> Result<()> {
    if limit == 0 {
        return Err(Error::InvalidArgument("limit must be >= 1".into()));
    }
    if limit > ceiling {
        return Err(Error::CeilingExceeded { limit, ceiling });
    }
    Ok(())
}

/// `τ(n)` for `n <= limit`: coefficients of `q ∏ (1 − q^n)^24`.
pub fn delta_expansion(limit: usize) -> Result<CoefficientTable> {
    delta_expansion_with_ceiling(limit, DEFAULT_CEILING)
}

pub fn delta_expansion_with_ceiling(limit: usize, ceiling: usize) -> Result<CoefficientTable> {
    check_limit(limit, ceiling)?;
    let eta24 = euler_product(limit).pow(24);
    Ok(CoefficientTable::from_series(&eta24.shift(1)))
}

/// The normalized cusp form of weight 16 and level 1, `Δ·E_4`.
pub fn weight16_expansion(limit: usize) -> Result<CoefficientTable> {
    weight16_expansion_with_ceiling(limit, DEFAULT_CEILING)
}

pub fn weight16_expansion_with_ceiling(limit: usize, ceiling: usize) -> Result<CoefficientTable> {
    check_limit(limit, ceiling)?;
    // E_4 · (η³)^8 keeps every product sparse on one side.
    let cube = euler_product_cubed(limit);
    let mut s = eisenstein_e4(limit);
    for _ in 0..8 {
        s = s.mul(&cube);
    }
    Ok(CoefficientTable::from_series(&s.shift(1)))
}

/// `C(n)` for `n <= limit` from the degree-one entries of `ap_table`, using
/// the Hecke recurrence at prime powers and multiplicativity.
pub fn expand_multiplicative(
    ap_table: &BTreeMap<PrimeSite, BigInt>,
    weight: u32,
    limit: usize,
) -> Result<CoefficientTable> {
    check_weight(weight)?;
    let spf = smallest_prime_factors(limit);
    let mut prime_powers: HashMap<u64, Vec<BigInt>> = HashMap::new();
    let mut table = CoefficientTable::zeros(limit);
    if limit >= 1 {
        table.set(1, BigInt::one());
    }
    for n in 2..=limit {
        let p = spf[n] as usize;
        let (mut rest, mut e) = (n, 0usize);
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        if let Entry::Vacant(slot) = prime_powers.entry(p as u64) {
            let site = PrimeSite::rational(p as u64)?;
            let ap = ap_table.get(&site).ok_or(Error::MissingPrime(p as u64))?;
            let mut e_max = 0;
            let mut pe = 1usize;
            while pe <= limit / p {
                pe *= p;
                e_max += 1;
            }
            slot.insert(hecke_powers(ap, p as u64, weight, e_max.max(1))?);
        }
        let value = &prime_powers[&(p as u64)][e] * table.at(rest)?;
        table.set(n, value);
    }
    Ok(table)
}

/// An [`Eigenform`] over `Q` whose `a_p` are read off a coefficient table.
pub fn eigenform_from_table(
    label: &str,
    weight: u32,
    level_norm: u64,
    table: &CoefficientTable,
) -> Result<Eigenform> {
    let mut form = Eigenform::new(label, weight, level_norm)?;
    for p in crate::primes::primes_up_to(table.limit() as u64) {
        form.insert_ap(PrimeSite::rational(p)?, table.at(p as usize)?.clone())?;
    }
    Ok(form)
}

/// Built-in forms by name: `delta` (weight 12) and `weight16`.
pub fn builtin_form(name: &str, limit: usize, ceiling: usize) -> Option<Result<Eigenform>> {
    match name {
        "delta" => Some(
            delta_expansion_with_ceiling(limit, ceiling)
                .and_then(|t| eigenform_from_table("delta", 12, 1, &t)),
        ),
        "weight16" => Some(
            weight16_expansion_with_ceiling(limit, ceiling)
                .and_then(|t| eigenform_from_table("weight16", 16, 1, &t)),
        ),
        _ => None,
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Eigenform> {
    let file = std::fs::File::open(path.as_ref())?;
    let fallback = path
        .as_ref()
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    parse_eigenform_csv(file, &fallback)
}

/// Parses the prime-table CSV: `#`-prefixed `key=value` metadata (`weight`
/// required; `level_norm` defaults to 1, `label` to `default_label`), then a
/// `p,inertia_degree,ap` header and one row per prime site.
pub fn parse_eigenform_csv<R: Read>(mut input: R, default_label: &str) -> Result<Eigenform> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;

    let mut meta: HashMap<String, (u64, String)> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(rest) = line.trim_start().strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                meta.insert(k.trim().to_string(), (i as u64 + 1, v.trim().to_string()));
            }
        }
    }
    let meta_num = |key: &'static str| -> Result<Option<u64>> {
        meta.get(key)
            .map(|(row, v)| {
                v.parse::<u64>().map_err(|e| Error::Malformed {
                    row: *row,
                    msg: format!("{key}: {e}"),
                })
            })
            .transpose()
    };
    let weight = meta_num("weight")?.ok_or(Error::MissingMetadata("weight"))?;
    let weight = u32::try_from(weight).map_err(|_| Error::InvalidWeight(u32::MAX))?;
    let level_norm = meta_num("level_norm")?.unwrap_or(1);
    let label = meta
        .get("label")
        .map(|(_, v)| v.clone())
        .unwrap_or_else(|| default_label.to_string());
    let mut form = Eigenform::new(label, weight, level_norm)?;

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["p", "inertia_degree", "ap"] {
        let row = text
            .lines()
            .position(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map_or(1, |i| i as u64 + 1);
        return Err(Error::Malformed {
            row,
            msg: format!("expected header `p,inertia_degree,ap`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line());
            Error::Malformed {
                row,
                msg: e.to_string(),
            }
        })?;
        let row = record.position().map_or(0, |p| p.line());
        let bad = |msg: String| Error::Malformed { row, msg };
        let p: u64 = record[0].parse().map_err(|e| bad(format!("p: {e}")))?;
        let f: u32 = record[1]
            .parse()
            .map_err(|e| bad(format!("inertia_degree: {e}")))?;
        let ap: BigInt = record[2].parse().map_err(|e| bad(format!("ap: {e}")))?;
        let site = PrimeSite::new(p, f).map_err(|e| bad(e.to_string()))?;
        if form.ap(&site).is_some() {
            return Err(Error::DuplicateSite {
                row,
                p,
                inertia_degree: f,
            });
        }
        if !within_deligne(&ap, site.norm(), weight) {
            return Err(Error::DeligneRow {
                row,
                p,
                inertia_degree: f,
                ap: ap.to_string(),
            });
        }
        form.insert_ap(site, ap)?;
    }
    Ok(form)
}

/// Writes an eigenform's prime table in the format read by [`parse_eigenform_csv`].
pub fn write_eigenform_csv<W: Write>(form: &Eigenform, mut out: W) -> Result<()> {
    writeln!(out, "# label={}", form.label())?;
    writeln!(out, "# weight={}", form.weight())?;
    writeln!(out, "# level_norm={}", form.level_norm())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "inertia_degree", "ap"])?;
    for (site, ap) in form.ap_table() {
        w.write_record([
            site.residue_char().to_string(),
            site.inertia_degree().to_string(),
            ap.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
