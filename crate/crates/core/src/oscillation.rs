//! Coefficient-shift operators, the sieve `g = f − (f|U(q))|q`, the
//! Rankin-Selberg coefficients `b_m`, and direct search for simultaneous signs.

use std::cmp::Ordering;
use std::io::Write;

use num_bigint::BigInt;
use num_traits::{Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::CoefficientTable;
use crate::primes::gcd;
use crate::sign_analysis::HasSign;

fn check_q(q: usize) -> Result<()> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be >= 1".into()));
    }
    Ok(())
}

/// `f|q`: `C(n) = C_f(n/q)` when `q | n`, else 0. Same limit as the input.
pub fn op_shift(table: &CoefficientTable, q: usize) -> Result<CoefficientTable> {
    check_q(q)?;
    let mut out = CoefficientTable::zeros(table.limit());
    for n in (q..=table.limit()).step_by(q) {
        out.set(n, table.at(n / q)?.clone());
    }
    Ok(out)
}

/// `f|U(q)`: `C(n) = C_f(qn)` for `n <= limit`.
pub fn op_u_to(table: &CoefficientTable, q: usize, limit: usize) -> Result<CoefficientTable> {
    check_q(q)?;
    let needed = q.saturating_mul(limit);
    if needed > table.limit() {
        return Err(Error::TableTooShort {
            needed,
            limit: table.limit(),
        });
    }
    let values = (1..=limit).map(|n| table.at(q * n).cloned()).collect::<Result<_>>()?;
    Ok(CoefficientTable::from_values(values))
}

/// [`op_u_to`] at the longest limit the input supports, `⌊limit/q⌋`.
pub fn op_u(table: &CoefficientTable, q: usize) -> Result<CoefficientTable> {
    check_q(q)?;
    let limit = table.limit() / q;
    if limit == 0 {
        return Err(Error::TableTooShort {
            needed: q,
            limit: table.limit(),
        });
    }
    op_u_to(table, q, limit)
}

/// A form with its coefficients at multiples of `q` removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SievedForm {
    pub base: CoefficientTable,
    pub q: usize,
    pub derived: CoefficientTable,
}

impl SievedForm {
    /// Indices where `C(n) = 0` for `q | n` or `C(n) = C_f(n)` for
    /// `gcd(n, q) = 1` fails.
    pub fn violations(&self) -> Vec<usize> {
        self.derived
            .iter()
            .filter(|&(n, c)| {
                if n % self.q == 0 {
                    !c.is_zero()
                } else if gcd(n as u64, self.q as u64) == 1 {
                    Some(c) != self.base.get(n)
                } else {
                    false
                }
            })
            .map(|(n, _)| n)
            .collect()
    }
}

/// `g = f − (f|U(q))|q`, checked against both sieve identities.
pub fn sieve_construct(table: &CoefficientTable, q: usize) -> Result<SievedForm> {
    check_q(q)?;
    let limit = table.limit();
    let lifted = if limit / q == 0 {
        CoefficientTable::zeros(limit)
    } else {
        op_shift(&op_u(table, q)?.padded(limit), q)?
    };
    let mut derived = CoefficientTable::zeros(limit);
    for (n, c) in table.iter() {
        derived.set(n, c - lifted.at(n)?);
    }
    let sieved = SievedForm {
        base: table.clone(),
        q,
        derived,
    };
    if let Some(&n) = sieved.violations().first() {
        return Err(Error::SieveIdentity(n));
    }
    Ok(sieved)
}

impl CoefficientTable {
    /// Extends with zeros up to `limit` (never truncates).
    pub fn padded(&self, limit: usize) -> CoefficientTable {
        let mut out = CoefficientTable::zeros(limit.max(self.limit()));
        for (n, c) in self.iter() {
            out.set(n, c.clone());
        }
        out
    }
}

/// `a_n(c1)`, the number of integral ideals of norm `n` coprime to `c1`,
/// for `n = 1..=limit` over `Q`: 1 when `gcd(n, c1) = 1`, else 0.
pub fn restricted_zeta_coeffs(c1: u64, limit: usize) -> Vec<u64> {
    (1..=limit as u64).map(|n| u64::from(gcd(n, c1) == 1)).collect()
}

/// `Σ C(m, f) C(m, g)` over integral ideals `m` of a given norm coprime to `n`.
pub trait NormFiber {
    fn fiber_sum(&self, norm: usize, coprime_to: u64) -> Result<BigInt>;
}

/// Over `Q` each norm has exactly one ideal, so a fiber is a single product.
pub struct RationalFiber<'a> {
    pub f: &'a CoefficientTable,
    pub g: &'a CoefficientTable,
}

impl NormFiber for RationalFiber<'_> {
    fn fiber_sum(&self, norm: usize, coprime_to: u64) -> Result<BigInt> {
        if gcd(norm as u64, coprime_to) != 1 {
            return Ok(BigInt::zero());
        }
        Ok(self.f.at(norm)? * self.g.at(norm)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankinParams {
    /// Ideals `m` in the inner sum must be coprime to this.
    pub n_coprime_to: u64,
    /// Level whose primes are removed from the zeta factor.
    pub c1: u64,
    pub k0: u32,
    pub l0: u32,
}

/// `b_m = Σ_{n² | m} a_n(c1) n^{k0+l0−2} Σ_{(m', n)=1, N(m') = m/n²} C(m', f) C(m', g)`
/// for `m = 1..=limit`.
pub fn rankin_coefficients(
    f: &CoefficientTable,
    g: &CoefficientTable,
    params: RankinParams,
    limit: usize,
) -> Result<Vec<BigInt>> {
    let zeta = restricted_zeta_coeffs(params.c1, limit);
    rankin_coefficients_with(&RationalFiber { f, g }, &zeta, params, limit)
}

/// [`rankin_coefficients`] with a caller-supplied fiber and zeta table
/// (`zeta[n - 1] = a_n(c1)`), for fields where norms have several ideals.
pub fn rankin_coefficients_with(
    fiber: &impl NormFiber,
    zeta: &[u64],
    params: RankinParams,
    limit: usize,
) -> Result<Vec<BigInt>> {
    let exponent = (params.k0 + params.l0).checked_sub(2).ok_or_else(|| {
        Error::InvalidArgument("k0 + l0 must be >= 2".into())
    })?;
    let mut out = Vec::with_capacity(limit);
    for m in 1..=limit {
        let mut b = BigInt::zero();
        for n in (1..).take_while(|n| n * n <= m) {
            if m % (n * n) != 0 {
                continue;
            }
            let a_n = *zeta.get(n - 1).ok_or(Error::TableTooShort {
                needed: n,
                limit: zeta.len(),
            })?;
            if a_n == 0 {
                continue;
            }
            let inner = fiber.fiber_sum(m / (n * n), params.n_coprime_to)?;
            if inner.is_zero() {
                continue;
            }
            let weight: BigInt = Pow::pow(BigInt::from(n), exponent);
            b += inner * weight * a_n;
        }
        out.push(b);
    }
    Ok(out)
}

/// Writes `m,b` rows.
pub fn write_rankin_csv<W: Write>(b: &[BigInt], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "b"])?;
    for (i, v) in b.iter().enumerate() {
        w.write_record([(i + 1).to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimultaneousSigns {
    pub first_positive: Option<usize>,
    pub first_negative: Option<usize>,
}

/// Smallest `n <= limit` with `C(n, f) C(n, g) > 0`, and with `< 0`.
pub fn find_simultaneous_sign_changes(
    f: &CoefficientTable,
    g: &CoefficientTable,
    limit: usize,
) -> SimultaneousSigns {
    let mut found = SimultaneousSigns {
        first_positive: None,
        first_negative: None,
    };
    let top = limit.min(f.limit()).min(g.limit());
    for n in 1..=top {
        let s = f.get(n).unwrap().sign_ord();
        let t = g.get(n).unwrap().sign_ord();
        let product = match (s, t) {
            (Ordering::Equal, _) | (_, Ordering::Equal) => Ordering::Equal,
            (a, b) if a == b => Ordering::Greater,
            _ => Ordering::Less,
        };
        match product {
            Ordering::Greater if found.first_positive.is_none() => found.first_positive = Some(n),
            Ordering::Less if found.first_negative.is_none() => found.first_negative = Some(n),
            _ => {}
        }
        if found.first_positive.is_some() && found.first_negative.is_some() {
            break;
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{delta_expansion, weight16_expansion};
    use crate::primes::gcd;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn shift_examples() {
        let tau = delta_expansion(50).unwrap();
        assert_eq!(op_shift(&tau, 1).unwrap(), tau);
        let s = op_shift(&tau, 2).unwrap();
        assert_eq!(s.get(4).unwrap(), &big(-24));
        assert_eq!(s.get(3).unwrap(), &big(0));
        assert!(op_shift(&tau, 0).is_err());
    }

    #[test]
    fn u_examples() {
        let tau = delta_expansion(50).unwrap();
        assert_eq!(op_u(&tau, 1).unwrap(), tau);
        assert_eq!(op_u(&tau, 2).unwrap().get(1).unwrap(), &big(-24));
        assert_eq!(op_u(&tau, 3).unwrap().get(2).unwrap(), &big(-6048));
        assert_eq!(op_u(&tau, 3).unwrap().limit(), 16);
        assert!(matches!(op_u_to(&tau, 3, 17), Err(Error::TableTooShort { .. })));
        assert!(op_u(&tau, 51).is_err());
    }

    #[test]
    fn operator_compositions() {
        let tau = delta_expansion(60).unwrap();
        for q in 1..=12 {
            // U ∘ shift = identity
            let back = op_u(&op_shift(&tau, q).unwrap(), q).unwrap();
            assert_eq!(back, tau.truncate(60 / q));
            // shift ∘ U keeps multiples of q and zeroes the rest
            let kept = op_shift(&op_u(&tau, q).unwrap().padded(60), q).unwrap();
            for (n, c) in kept.iter() {
                let expected = if n % q == 0 { tau.get(n).unwrap().clone() } else { big(0) };
                assert_eq!(c, &expected, "q={q} n={n}");
            }
        }
    }

    #[test]
    fn sieve_examples() {
        let tau = delta_expansion(100).unwrap();
        let zero = sieve_construct(&tau, 1).unwrap();
        assert!(zero.derived.iter().all(|(_, c)| c.is_zero()));

        let two = sieve_construct(&tau, 2).unwrap();
        for (n, c) in two.derived.iter() {
            if n % 2 == 0 {
                assert!(c.is_zero());
            } else {
                assert_eq!(c, tau.get(n).unwrap());
            }
        }

        let six = sieve_construct(&tau, 6).unwrap();
        assert_eq!(six.derived.get(4).unwrap(), &big(-1472));
        assert!(six.derived.get(12).unwrap().is_zero());
        assert!(sieve_construct(&tau, 0).is_err());
        // q beyond the table: nothing to remove.
        assert_eq!(sieve_construct(&tau, 101).unwrap().derived, tau);
    }

    #[test]
    fn sieve_is_linear() {
        let tau = delta_expansion(80).unwrap();
        for alpha in [-3i64, 0, 7] {
            let scaled = tau.scale(&big(alpha));
            for q in [2usize, 3, 10] {
                let lhs = sieve_construct(&scaled, q).unwrap().derived;
                let rhs = sieve_construct(&tau, q).unwrap().derived.scale(&big(alpha));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn restricted_zeta_examples() {
        assert!(restricted_zeta_coeffs(1, 30).iter().all(|&a| a == 1));
        let z = restricted_zeta_coeffs(6, 40);
        assert_eq!(z[4 - 1], 0);
        assert_eq!(z[35 - 1], 1);
    }

    #[test]
    fn rankin_small_cases() {
        let f = delta_expansion(50).unwrap();
        let g = weight16_expansion(50).unwrap();
        let params = RankinParams { n_coprime_to: 1, c1: 1, k0: 12, l0: 16 };
        let b = rankin_coefficients(&f, &g, params, 50).unwrap();
        assert_eq!(b[0], big(1));
        // m = 4: n ∈ {1, 2}.
        let e = 12 + 16 - 2;
        let expected = f.get(4).unwrap() * g.get(4).unwrap() + Pow::pow(big(2), e as u32);
        assert_eq!(b[3], expected);
        // m = 36 with the coprimality filter at 3 and zeta level 2: only n = 1, 3
        // survive a_n, and only m' coprime to 3.
        let params = RankinParams { n_coprime_to: 3, c1: 2, k0: 12, l0: 16 };
        let b = rankin_coefficients(&f, &g, params, 50).unwrap();
        let mut brute = big(0);
        for n in 1..=6usize {
            if 36 % (n * n) == 0 && gcd(n as u64, 2) == 1 {
                let mp = 36 / (n * n);
                if gcd(mp as u64, 3) == 1 {
                    brute += f.get(mp).unwrap() * g.get(mp).unwrap() * Pow::pow(big(n as i64), e as u32);
                }
            }
        }
        assert_eq!(b[35], brute);
        assert!(rankin_coefficients(&f, &g, RankinParams { n_coprime_to: 1, c1: 1, k0: 0, l0: 1 }, 5).is_err());
        let plain = RankinParams { n_coprime_to: 1, c1: 1, k0: 12, l0: 16 };
        assert!(rankin_coefficients(&f, &g, plain, 51).is_err());
    }

    #[test]
    fn rankin_self_pairing_is_nonnegative() {
        let f = delta_expansion(400).unwrap();
        for (ncop, c1) in [(1u64, 1u64), (6, 1), (1, 30), (35, 6)] {
            let params = RankinParams { n_coprime_to: ncop, c1, k0: 12, l0: 12 };
            let b = rankin_coefficients(&f, &f, params, 400).unwrap();
            assert!(b.iter().all(|v| v.sign_ord() != Ordering::Less));
        }
    }

    #[test]
    fn rankin_csv() {
        let mut buf = Vec::new();
        write_rankin_csv(&[big(1), big(-5)], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "m,b\n1,1\n2,-5\n");
    }

    #[test]
    fn simultaneous_sign_examples() {
        let tau = delta_expansion(200).unwrap();
        let same = find_simultaneous_sign_changes(&tau, &tau, 200);
        assert_eq!(same.first_positive, Some(1));
        assert_eq!(same.first_negative, None);
        let neg = tau.scale(&big(-1));
        let opposite = find_simultaneous_sign_changes(&tau, &neg, 200);
        assert_eq!(opposite.first_negative, Some(1));
        assert_eq!(opposite.first_positive, None);
    }
}
