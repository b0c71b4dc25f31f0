//! WebAssembly bindings for the browser demo in `www/`. Every export returns
//! a JSON string; the `*_json` functions are the same operations for native use.

use std::f64::consts::PI;

use num_bigint::BigInt;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use hecke_signs::hecke::{
    angle_of, chebyshev_value, classify_zero_pattern, hecke_powers, normalized_coeff,
};
use hecke_signs::satotate::{density_closed_form, sign_region, st_density, SignChoice};
use hecke_signs::sign_analysis::{simultaneous_density, weyl_discrepancy};

const MAX_POINTS: usize = 4096;
const MAX_EXPONENT: usize = 400;
const MAX_COUNT: u64 = 10_000_000;
const SCATTER_POINTS: u64 = 3000;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Sign regions and closed-form densities of `U_m(cos θ)`, with the curve and
/// the Sato-Tate density sampled at `points` angles.
pub fn sign_densities_json(m: u32, points: usize) -> Result<Value, String> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must be in 2..={MAX_POINTS}"));
    }
    let regions = |s| -> Result<Vec<[f64; 2]>, String> {
        Ok(sign_region(m, s)
            .map_err(err)?
            .intervals()
            .iter()
            .map(|i| [i.lo(), i.hi()])
            .collect())
    };
    let thetas: Vec<f64> = (0..points).map(|i| PI * i as f64 / (points - 1) as f64).collect();
    Ok(json!({
        "m": m,
        "positive": density_closed_form(m, SignChoice::Positive).map_err(err)?,
        "negative": density_closed_form(m, SignChoice::Negative).map_err(err)?,
        "positive_regions": regions(SignChoice::Positive)?,
        "negative_regions": regions(SignChoice::Negative)?,
        "theta": thetas,
        "chebyshev": thetas.iter().map(|&t| chebyshev_value(t, m as usize)).collect::<Vec<_>>(),
        "st_density": thetas.iter().map(|&t| st_density(t)).collect::<Vec<_>>(),
    }))
}

/// Exact `C(p^r)` for `r <= r_max`, their normalizations, the angle and the zero pattern.
pub fn prime_power_signs_json(ap: &str, norm: u64, weight: u32, r_max: usize) -> Result<Value, String> {
    if r_max == 0 || r_max > MAX_EXPONENT {
        return Err(format!("r_max must be in 1..={MAX_EXPONENT}"));
    }
    let a: BigInt = ap.trim().parse().map_err(|_| format!("`{ap}` is not an integer"))?;
    let pattern = classify_zero_pattern(&a, norm, weight).map_err(err)?;
    let beta = normalized_coeff(&a, norm, weight, 1);
    let theta = angle_of(beta).map_err(err)?;
    let exact = hecke_powers(&a, norm, weight, r_max).map_err(err)?;
    let normalized: Vec<f64> = exact
        .iter()
        .enumerate()
        .map(|(r, c)| normalized_coeff(c, norm, weight, r))
        .collect();
    Ok(json!({
        "pattern": pattern,
        "theta": theta,
        "normalized": normalized,
        "exact": exact.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
    }))
}

/// Simultaneous signs of `sin((n+1)θ_f) sin((n+1)θ_g)`, the discrepancy of the
/// angle orbit mod 1 and a prefix of the orbit for plotting.
pub fn simultaneous_json(theta_f: f64, theta_g: f64, count: u64) -> Result<Value, String> {
    if count == 0 || count > MAX_COUNT {
        return Err(format!("count must be in 1..={MAX_COUNT}"));
    }
    let sim = simultaneous_density(theta_f, theta_g, count, false).map_err(err)?;
    let (a, b) = (theta_f / (2.0 * PI), theta_g / (2.0 * PI));
    let disc = weyl_discrepancy(a, b, count).map_err(err)?;
    let orbit: Vec<[f64; 2]> = (1..=count.min(SCATTER_POINTS))
        .map(|n| {
            let k = (n + 1) as f64;
            [(k * a).rem_euclid(1.0), (k * b).rem_euclid(1.0)]
        })
        .collect();
    Ok(json!({
        "count": count,
        "positive": sim.positive.empirical,
        "negative": sim.negative.empirical,
        "zero": sim.zero,
        "discrepancy": disc.value,
        "degenerate": disc.degenerate,
        "orbit": orbit,
    }))
}

fn to_js(v: Result<Value, String>) -> Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sign_densities(m: u32, points: usize) -> Result<String, JsError> {
    to_js(sign_densities_json(m, points))
}

/// `ap` is a decimal string so values past 2^53 survive the trip from JS.
#[wasm_bindgen]
pub fn prime_power_signs(ap: &str, norm: u64, weight: u32, r_max: usize) -> Result<String, JsError> {
    to_js(prime_power_signs_json(ap, norm, weight, r_max))
}

#[wasm_bindgen]
pub fn simultaneous(theta_f: f64, theta_g: f64, count: u64) -> Result<String, JsError> {
    to_js(simultaneous_json(theta_f, theta_g, count))
}
