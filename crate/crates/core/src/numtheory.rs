//! Number-theoretic kernel: factorization, prime powers, modular inverses
//! and binomial coefficients modulo arbitrary moduli.
//!
//! Binomials modulo `m` are computed per prime-power factor of `m` and glued
//! back together with the Chinese remainder theorem. Prime factors use
//! Lucas' theorem digit by digit; higher prime powers use the generalized
//! factorial method (factorials with their `p`-part stripped, plus a carry
//! count from Legendre's formula).

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TRIAL_DIVISION_BOUND: u64 = 1_000_000;

/// Largest prime-power factor for which a unit-product table is built.
pub const MAX_TABLE_MODULUS: u64 = 1 << 24;

/// Prime factorization with strictly increasing primes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub prime_powers: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.prime_powers.iter().map(|&(p, _)| p)
    }

    pub fn largest_prime(&self) -> Option<u64> {
        self.prime_powers.last().map(|&(p, _)| p)
    }

    /// Reconstructs the factored integer.
    pub fn product(&self) -> u128 {
        self.prime_powers
            .iter()
            .map(|&(p, e)| (p as u128).pow(e))
            .product()
    }

    pub fn as_prime_power(&self) -> Option<(u64, u32)> {
        match self.prime_powers.as_slice() {
            [single] => Some(*single),
            _ => None,
        }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// Brent's variant; n must be odd and composite.
fn pollard_rho(n: u64) -> u64 {
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
    }
    unreachable!()
}

fn split_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    split_into(d, out);
    split_into(n / d, out);
}

/// Complete factorization of `m >= 2`.
pub fn factorize(m: u64) -> Result<Factorization> {
    if m < 2 {
        return Err(Error::Parameter(format!("cannot factorize {m}; need m >= 2")));
    }
    let mut primes = Vec::new();
    let mut rest = m;
    let mut d = 2u64;
    while d <= TRIAL_DIVISION_BOUND && d * d <= rest {
        while rest % d == 0 {
            primes.push(d);
            rest /= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        if rest < TRIAL_DIVISION_BOUND * TRIAL_DIVISION_BOUND {
            // no factor below the trial bound, so what is left is prime
            primes.push(rest);
        } else {
            split_into(rest, &mut primes);
        }
    }
    primes.sort_unstable();
    let mut prime_powers: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match prime_powers.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => prime_powers.push((p, 1)),
        }
    }
    Ok(Factorization { prime_powers })
}

/// `Some((p, k))` iff `m = p^k` for a prime `p`.
pub fn prime_power(m: u64) -> Result<Option<(u64, u32)>> {
    Ok(factorize(m)?.as_prime_power())
}

fn inverse_u64(c: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (c as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u64)
}

/// Inverse of `c` modulo `m`, normalized to `[1, m)`.
pub fn mod_inverse(c: &BigInt, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::Parameter(format!("modulus must be >= 2, got {m}")));
    }
    let residue = c
        .mod_floor(&BigInt::from(m))
        .to_u64()
        .expect("residue below a u64 modulus");
    inverse_u64(residue, m).ok_or_else(|| Error::NotInvertible { c: c.clone(), m })
}

/// 2-adic valuation of a nonzero integer.
pub fn two_adic_valuation(x: u64) -> u32 {
    x.trailing_zeros()
}

/// For odd `n` with `n + 1` not a power of two, the `m >= 1` such that
/// `n ≡ 2^m - 1 (mod 2^(m+1))`, i.e. the 2-adic valuation of `n + 1`.
pub fn odd_case_exponent(n: u64) -> Result<u32> {
    if n % 2 == 0 {
        return Err(Error::Hypothesis(format!("n = {n} is not odd")));
    }
    let next = n + 1;
    if next.is_power_of_two() {
        return Err(Error::Hypothesis(format!("n = {n} is of the form 2^k - 1")));
    }
    Ok(two_adic_valuation(next))
}

/// Exact binomial coefficient.
pub fn binomial_bignum(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Primes `<= bound` by the sieve of Eratosthenes.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    let bound = bound as usize;
    if bound < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; bound + 1];
    let mut primes = Vec::new();
    for i in 2..=bound {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= bound {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

// Legendre: exponent of p in n!.
fn factorial_valuation(mut n: u64, p: u64) -> u64 {
    let mut v = 0;
    while n > 0 {
        n /= p;
        v += n;
    }
    v
}

fn strip(mut x: u64, p: u64) -> (u64, u32) {
    let mut e = 0;
    while x % p == 0 {
        x /= p;
        e += 1;
    }
    (x, e)
}

/// Binomial residues modulo a fixed prime power `p^q`.
#[derive(Clone, Debug)]
struct PrimePowerBinomial {
    p: u64,
    q: u32,
    modulus: u64,
    /// `unit_prefix[x]` = product of `1 <= i <= x` with `p ∤ i`, mod `p^q`.
    unit_prefix: Vec<u64>,
}

impl PrimePowerBinomial {
    fn new(p: u64, q: u32) -> Self {
        let modulus = p.pow(q);
        let mut unit_prefix = Vec::with_capacity(modulus as usize);
        let mut acc = 1 % modulus;
        unit_prefix.push(acc);
        for i in 1..modulus {
            if i % p != 0 {
                acc = mul_mod(acc, i, modulus);
            }
            unit_prefix.push(acc);
        }
        PrimePowerBinomial { p, q, modulus, unit_prefix }
    }

    fn binomial(&self, n: u64, k: u64) -> u64 {
        if k > n {
            return 0;
        }
        if self.q == 1 {
            self.lucas(n, k)
        } else {
            self.generalized(n, k)
        }
    }

    // Lucas: C(n, k) ≡ Π C(n_i, k_i) over base-p digits.
    fn lucas(&self, mut n: u64, mut k: u64) -> u64 {
        let p = self.p;
        let fact = &self.unit_prefix; // for q = 1 these are plain factorials mod p
        let mut acc = 1 % p;
        while k > 0 {
            let (ni, ki) = (n % p, k % p);
            if ki > ni {
                return 0;
            }
            let den = mul_mod(fact[ki as usize], fact[(ni - ki) as usize], p);
            let inv = inverse_u64(den, p).expect("factorials below p are units");
            acc = mul_mod(acc, mul_mod(fact[ni as usize], inv, p), p);
            n /= p;
            k /= p;
        }
        acc
    }

    // n! with every factor p removed, mod p^q.
    fn unit_factorial(&self, mut n: u64) -> u64 {
        let m = self.modulus;
        let full_period = self.unit_prefix[(m - 1) as usize];
        let mut acc = 1 % m;
        while n > 0 {
            let cycles = pow_mod(full_period, n / m, m);
            acc = mul_mod(acc, mul_mod(cycles, self.unit_prefix[(n % m) as usize], m), m);
            n /= self.p;
        }
        acc
    }

    fn generalized(&self, n: u64, k: u64) -> u64 {
        let p = self.p;
        let carries = factorial_valuation(n, p) - factorial_valuation(k, p) - factorial_valuation(n - k, p);
        if carries >= self.q as u64 {
            return 0;
        }
        let m = self.modulus;
        let den = mul_mod(self.unit_factorial(k), self.unit_factorial(n - k), m);
        let inv = inverse_u64(den, m).expect("unit factorials are invertible");
        let unit = mul_mod(self.unit_factorial(n), inv, m);
        mul_mod(unit, p.pow(carries as u32), m)
    }
}

/// Chinese-remainder recombination over pairwise coprime moduli.
#[derive(Clone, Debug)]
struct Crt {
    modulus: u64,
    /// `(m_j, e_j)` with `e_j ≡ 1 (mod m_j)` and `e_j ≡ 0` modulo the others.
    basis: Vec<(u64, u64)>,
}

impl Crt {
    fn new(moduli: &[u64]) -> Self {
        let modulus: u64 = moduli.iter().product();
        let basis = moduli
            .iter()
            .map(|&mj| {
                let rest = modulus / mj;
                let inv = inverse_u64(rest % mj, mj).unwrap_or(0);
                (mj, mul_mod(rest % modulus, inv, modulus))
            })
            .collect();
        Crt { modulus, basis }
    }

    fn combine(&self, residues: impl IntoIterator<Item = u64>) -> u64 {
        let m = self.modulus;
        residues
            .into_iter()
            .zip(&self.basis)
            .fold(0, |acc, (r, &(_, e))| (acc + mul_mod(r, e, m)) % m)
    }
}

/// Precomputed state for evaluating `C(n, k) mod m` many times with the
/// same modulus.
#[derive(Clone, Debug)]
pub struct BinomialModulus {
    modulus: u64,
    factorization: Factorization,
    parts: Vec<PrimePowerBinomial>,
    crt: Crt,
}

impl BinomialModulus {
    pub fn new(modulus: u64) -> Result<Self> {
        let factorization = factorize(modulus)?;
        Self::from_factorization(modulus, factorization)
    }

    pub fn from_factorization(modulus: u64, factorization: Factorization) -> Result<Self> {
        debug_assert_eq!(factorization.product(), modulus as u128);
        for &(p, q) in &factorization.prime_powers {
            let part = p.pow(q);
            if part > MAX_TABLE_MODULUS {
                return Err(Error::Size {
                    what: "prime-power factor of binomial modulus",
                    requested: part as u128,
                    limit: MAX_TABLE_MODULUS as u128,
                });
            }
        }
        let parts: Vec<_> = factorization
            .prime_powers
            .iter()
            .map(|&(p, q)| PrimePowerBinomial::new(p, q))
            .collect();
        let moduli: Vec<u64> = parts.iter().map(|part| part.modulus).collect();
        Ok(BinomialModulus {
            modulus,
            factorization,
            crt: Crt::new(&moduli),
            parts,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    /// `C(n, k) mod m`; zero when `k > n`.
    pub fn binomial(&self, n: u64, k: u64) -> u64 {
        self.crt.combine(self.parts.iter().map(|part| part.binomial(n, k)))
    }

    /// Iterator over `C(n, k) mod m` for `k = 0, 1, ..., n`.
    pub fn row(&self, n: u64) -> BinomialRow<'_> {
        BinomialRow {
            owner: self,
            n,
            k: 0,
            state: self
                .parts
                .iter()
                .map(|part| RowState { unit: 1 % part.modulus, valuation: 0 })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct RowState {
    unit: u64,
    valuation: u64,
}

/// Incremental scan along a row of Pascal's triangle modulo `m`, stepping
/// `C(n, k+1) = C(n, k) * (n - k) / (k + 1)` on `p`-free units and `p`-adic
/// valuations separately for every prime-power factor.
pub struct BinomialRow<'a> {
    owner: &'a BinomialModulus,
    n: u64,
    k: u64,
    state: Vec<RowState>,
}

impl Iterator for BinomialRow<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.k > self.n {
            return None;
        }
        let owner = self.owner;
        let value = owner.crt.combine(owner.parts.iter().zip(&self.state).map(|(part, st)| {
            if st.valuation >= part.q as u64 {
                0
            } else {
                mul_mod(st.unit, part.p.pow(st.valuation as u32), part.modulus)
            }
        }));
        if self.k < self.n {
            let (num, den) = (self.n - self.k, self.k + 1);
            for (part, st) in owner.parts.iter().zip(self.state.iter_mut()) {
                let (num_unit, num_val) = strip(num, part.p);
                let (den_unit, den_val) = strip(den, part.p);
                let inv = inverse_u64(den_unit % part.modulus, part.modulus)
                    .expect("p-free part is a unit");
                st.unit = mul_mod(mul_mod(st.unit, num_unit % part.modulus, part.modulus), inv, part.modulus);
                st.valuation = st.valuation + num_val as u64 - den_val as u64;
            }
        }
        self.k += 1;
        Some(value)
    }
}

/// How [`binomial_mod_with`] evaluates the residue.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinomialMethod {
    /// Lucas / generalized factorials per prime power, recombined by CRT.
    PrimePower,
    /// Materialize the exact binomial and reduce it. Cross-checking only.
    Bignum,
}

/// `C(n, k) mod m`, normalized to `[0, m)`.
pub fn binomial_mod(n: u64, k: u64, m: u64) -> Result<u64> {
    binomial_mod_with(n, k, m, BinomialMethod::PrimePower)
}

pub fn binomial_mod_with(n: u64, k: u64, m: u64, method: BinomialMethod) -> Result<u64> {
    if k > n {
        return Err(Error::Parameter(format!("binomial C({n}, {k}) needs k <= n")));
    }
    if m < 2 {
        return Err(Error::Parameter(format!("modulus must be >= 2, got {m}")));
    }
    Ok(match method {
        BinomialMethod::PrimePower => BinomialModulus::new(m)?.binomial(n, k),
        BinomialMethod::Bignum => (binomial_bignum(n, k) % m).to_u64().expect("residue fits"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn factorize_examples() {
        assert_eq!(factorize(42).unwrap().prime_powers, vec![(2, 1), (3, 1), (7, 1)]);
        assert_eq!(factorize(25).unwrap().prime_powers, vec![(5, 2)]);
        assert_eq!(factorize(1 << 10).unwrap().prime_powers, vec![(2, 10)]);
        assert!(matches!(factorize(1), Err(Error::Parameter(_))));
        assert!(matches!(factorize(0), Err(Error::Parameter(_))));
    }

    #[test]
    fn factorize_above_trial_bound() {
        // 1_000_003 and 1_000_033 are both prime
        let m = 1_000_003u64 * 1_000_033;
        assert_eq!(
            factorize(m).unwrap().prime_powers,
            vec![(1_000_003, 1), (1_000_033, 1)]
        );
        let big_prime = 18_446_744_073_709_551_557u64;
        assert_eq!(factorize(big_prime).unwrap().prime_powers, vec![(big_prime, 1)]);
        let f = factorize(u64::MAX).unwrap();
        assert_eq!(f.product(), u64::MAX as u128);
        assert!(f.primes().all(is_prime));
    }

    #[test]
    fn prime_power_examples() {
        assert_eq!(prime_power(44).unwrap(), None);
        assert_eq!(prime_power(8).unwrap(), Some((2, 3)));
        assert_eq!(prime_power(97).unwrap(), Some((97, 1)));
    }

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(&BigInt::from(21_775_843_091u64), 42).unwrap(), 11);
        assert_eq!(mod_inverse(&BigInt::from(1), 42).unwrap(), 1);
        assert_eq!(mod_inverse(&BigInt::from(1), 2).unwrap(), 1);
        assert_eq!(mod_inverse(&BigInt::from(11), 42).unwrap(), 23);
        assert_eq!(mod_inverse(&BigInt::from(-11), 42).unwrap(), 42 - 23);
        assert!(matches!(
            mod_inverse(&BigInt::from(6), 42),
            Err(Error::NotInvertible { .. })
        ));
    }

    #[test]
    fn binomial_mod_examples() {
        assert_eq!(binomial_mod(42, 4, 2).unwrap(), 0);
        assert_eq!(binomial_bignum(42, 4), BigUint::from(111_930u32));
        assert_eq!(binomial_mod(10, 3, 2).unwrap(), 0);
        for m in 2..30 {
            assert_eq!(binomial_mod(17, 0, m).unwrap(), 1 % m);
        }
        assert!(matches!(binomial_mod(3, 4, 5), Err(Error::Parameter(_))));
    }

    #[test]
    fn odd_case_exponent_examples() {
        assert_eq!(odd_case_exponent(43).unwrap(), 2);
        assert_eq!(odd_case_exponent(5).unwrap(), 1);
        assert!(matches!(odd_case_exponent(7), Err(Error::Hypothesis(_))));
        assert!(matches!(odd_case_exponent(8), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn odd_case_exponent_congruences() {
        for n in (1..=100_000u64).step_by(2) {
            let Ok(m) = odd_case_exponent(n) else {
                assert!((n + 1).is_power_of_two());
                continue;
            };
            assert!(m >= 1);
            assert_eq!(n % (1 << (m + 1)), (1 << m) - 1, "n = {n}");
        }
    }

    #[test]
    fn binomial_mod_exhaustive_small() {
        for n in 0..=120u64 {
            let row: Vec<BigUint> = (0..=n).map(|k| binomial_bignum(n, k)).collect();
            for m in 2..=50u64 {
                let modulus = BinomialModulus::new(m).unwrap();
                let scanned: Vec<u64> = modulus.row(n).collect();
                for (k, exact) in row.iter().enumerate() {
                    let expected = (exact % m).to_u64().unwrap();
                    assert_eq!(modulus.binomial(n, k as u64), expected, "C({n},{k}) mod {m}");
                    assert_eq!(scanned[k], expected, "row scan C({n},{k}) mod {m}");
                }
            }
        }
    }

    #[test]
    fn primes_sieve() {
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(primes_up_to(1).is_empty());
        for p in primes_up_to(5000) {
            assert!(is_prime(p));
        }
        assert_eq!(primes_up_to(5000).len(), (2..=5000).filter(|&x| is_prime(x)).count());
    }

    proptest! {
        #[test]
        fn factorization_round_trip(m in 2u64..1_000_000) {
            let f = factorize(m).unwrap();
            prop_assert_eq!(f.product(), m as u128);
            prop_assert!(f.prime_powers.windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!(f.primes().all(is_prime));
        }

        #[test]
        fn factorization_round_trip_large(m in 1_000_000u64..u64::MAX) {
            let f = factorize(m).unwrap();
            prop_assert_eq!(f.product(), m as u128);
            prop_assert!(f.primes().all(is_prime));
        }

        #[test]
        fn inverse_defined_iff_coprime(c in -10_000i64..10_000, m in 2u64..5_000) {
            let c_big = BigInt::from(c);
            match mod_inverse(&c_big, m) {
                Ok(r) => {
                    prop_assert!((1..m).contains(&r));
                    let prod = (c_big * r).mod_floor(&BigInt::from(m));
                    prop_assert_eq!(prod, BigInt::one());
                }
                Err(Error::NotInvertible { .. }) => {
                    prop_assert!(c.unsigned_abs().gcd(&m) > 1);
                }
                Err(other) => prop_assert!(false, "unexpected error {other}"),
            }
        }

        #[test]
        fn binomial_mod_matches_bignum(n in 0u64..2000, k_frac in 0.0f64..=1.0, m in 2u64..3000) {
            let k = ((n as f64) * k_frac) as u64;
            prop_assert_eq!(
                binomial_mod_with(n, k, m, BinomialMethod::PrimePower).unwrap(),
                binomial_mod_with(n, k, m, BinomialMethod::Bignum).unwrap()
            );
        }
    }
}
