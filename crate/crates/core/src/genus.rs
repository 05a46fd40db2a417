//! Closed-form Milnor genera for the fan family and its two blow-up types,
//! and the genus a generator must have in each dimension.

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fan::FamilyParams;
use crate::numtheory::{self, binomial_bignum, BinomialModulus};

pub type GenusValue = BigInt;

fn check_range(n: u64, eps: u64) -> Result<()> {
    if n < 3 || eps < 2 || eps > n - 1 {
        return Err(Error::Parameter(format!(
            "need n >= 3 and 2 <= eps <= n - 1, got n = {n}, eps = {eps}"
        )));
    }
    Ok(())
}

/// `R_n(ε) = n − ε + (−1)^ε · C(n−1, ε)`.
pub fn r_value(n: u64, eps: u64) -> Result<GenusValue> {
    check_range(n, eps)?;
    let binom = BigInt::from(binomial_bignum(n - 1, eps));
    let signed = if eps % 2 == 0 { binom } else { -binom };
    Ok(BigInt::from(n) - BigInt::from(eps) + signed)
}

/// `R_n(ε) mod m` in `[0, m)` without materializing the binomial.
pub fn r_mod(n: u64, eps: u64, m: u64) -> Result<u64> {
    check_range(n, eps)?;
    let modulus = BinomialModulus::new(m)?;
    Ok(r_mod_with(&modulus, n, eps, modulus.binomial(n - 1, eps)))
}

/// Assembles `R_n(ε) mod m` from a precomputed `C(n−1, ε) mod m`.
pub fn r_mod_with(modulus: &BinomialModulus, n: u64, eps: u64, binom_residue: u64) -> u64 {
    let m = modulus.modulus();
    let linear = (n - eps) % m;
    if eps % 2 == 0 {
        (linear + binom_residue) % m
    } else {
        (linear + m - binom_residue) % m
    }
}

/// `s_n[Y_n^ε(a, b)] = a^ε · b · R_n(ε)`.
pub fn family_genus(params: FamilyParams) -> Result<GenusValue> {
    params.validate()?;
    let r = r_value(params.n as u64, params.eps as u64)?;
    Ok(num_traits::pow(BigInt::from(params.a), params.eps) * params.b * r)
}

/// Genus after blowing up the surface of the edge cone: family genus + 2b.
/// Only valid for odd `n`.
pub fn edge_blowup_genus(params: FamilyParams) -> Result<GenusValue> {
    params.validate()?;
    if params.n % 2 == 0 {
        return Err(Error::Hypothesis(format!(
            "edge blow-up formula holds for odd n only, got n = {}",
            params.n
        )));
    }
    Ok(family_genus(params)? + 2 * BigInt::from(params.b))
}

/// Change of Milnor genus under blowing up a point: `−(n+1)` for even `n`,
/// `−(n−1)` for odd `n`.
pub fn point_blowup_delta(n: u64) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::Parameter("dimension must be >= 1".into()));
    }
    Ok(if n % 2 == 0 { -BigInt::from(n + 1) } else { -BigInt::from(n - 1) })
}

/// `|s_n|` required of a polynomial generator in dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorTarget {
    pub magnitude: u64,
    /// `(p, m)` with `n + 1 = p^m`.
    pub prime_power: Option<(u64, u32)>,
}

pub fn generator_target(n: u64) -> Result<GeneratorTarget> {
    if n == 0 {
        return Err(Error::Parameter("dimension must be >= 1".into()));
    }
    Ok(match numtheory::prime_power(n + 1)? {
        Some((p, m)) => GeneratorTarget { magnitude: p, prime_power: Some((p, m)) },
        None => GeneratorTarget { magnitude: 1, prime_power: None },
    })
}

/// Whether `genus` meets the generator criterion in dimension `n`.
pub fn is_generator_genus(n: u64, genus: &BigInt) -> Result<bool> {
    let target = generator_target(n)?;
    Ok(genus.abs() == BigInt::from(target.magnitude))
}
