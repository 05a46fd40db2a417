//! Construction plans: for each dimension, a base toric variety plus a
//! sequence of blow-ups whose Milnor genus is the generator target.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::chow;
use crate::error::{Error, Result};
use crate::fan::{self, ConeRef, FamilyParams, Fan, DEFAULT_MAX_DIM};
use crate::genus::{self, GeneratorTarget};
use crate::numtheory::{self, BinomialModulus};

/// Default bound on the maximal-cone count of a materialized plan.
pub const DEFAULT_CONE_CAP: u64 = 100_000;

/// Which branch of the case analysis produced a plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// `n ∈ {1, 2}`, or the projective-space alternative when `n + 1` is prime.
    ProjectiveSpace,
    /// `n + 1` prime: `Family(n, n−2, 1, 1)`.
    PrimeSuccessor,
    /// `n + 1 = p^m`, `m >= 2`.
    PrimePowerSuccessor,
    /// Odd `n = 2^m − 1`: `Family(n, n−1, 1, 1)`.
    MersenneOdd,
    /// Remaining odd `n`: edge blow-up of `Family(n, 2^m, a, b)`.
    OddEdgeBlowup,
    /// Even `n` with `n + 1` not a prime power: searched `ε`.
    CoprimeSearch,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Route::ProjectiveSpace => "projective_space",
            Route::PrimeSuccessor => "prime_successor",
            Route::PrimePowerSuccessor => "prime_power_successor",
            Route::MersenneOdd => "mersenne_odd",
            Route::OddEdgeBlowup => "odd_edge_blowup",
            Route::CoprimeSearch => "coprime_search",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Base {
    ProjectiveSpace { n: usize },
    Family(FamilyParams),
}

impl Base {
    pub fn build(&self) -> Result<Fan> {
        match *self {
            Base::ProjectiveSpace { n } => fan::projective_space_fan(n),
            Base::Family(p) => fan::build_family_fan(p),
        }
    }

    fn cone_count(&self) -> u128 {
        match *self {
            Base::ProjectiveSpace { n } => n as u128 + 1,
            Base::Family(p) => {
                let u = (p.n - p.eps + 1) as u128;
                let choose_v = p.eps as u128;
                u * choose_v * 2
            }
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Base::ProjectiveSpace { n } => write!(f, "CP^{n}"),
            Base::Family(p) => write!(f, "Family({}, {}, {}, {})", p.n, p.eps, p.a, p.b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionPlan {
    pub n: u64,
    pub base: Base,
    pub edge_blowup: bool,
    #[serde(with = "decimal")]
    pub point_blowups: BigInt,
    #[serde(with = "decimal")]
    pub base_genus: BigInt,
    #[serde(with = "decimal")]
    pub final_genus: BigInt,
    pub target: GeneratorTarget,
    pub route: Route,
}

impl ConstructionPlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Maximal-cone count of the materialized fan.
    pub fn predicted_cones(&self) -> BigInt {
        let n = BigInt::from(self.n);
        let mut count = BigInt::from(self.base.cone_count());
        if self.edge_blowup {
            count += 2 * (&n - 2);
        }
        count + &self.point_blowups * (n - 1)
    }

    pub fn predicted_rays(&self) -> BigInt {
        let base_rays = match self.base {
            Base::ProjectiveSpace { n } => n + 1,
            Base::Family(p) => p.n + 3,
        };
        BigInt::from(base_rays) + u8::from(self.edge_blowup) + &self.point_blowups
    }
}

mod decimal {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(|_| D::Error::custom(format!("not a decimal integer: {text:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConstructOptions {
    /// Use `CP^n` instead of `Family(n, n−2, 1, 1)` when `n + 1` is prime.
    pub prefer_projective_space: bool,
}

pub fn construct(n: u64) -> Result<ConstructionPlan> {
    construct_with(n, ConstructOptions::default())
}

pub fn construct_with(n: u64, options: ConstructOptions) -> Result<ConstructionPlan> {
    if n == 0 {
        return Err(Error::Parameter("dimension must be >= 1".into()));
    }
    let target = genus::generator_target(n)?;
    let nu = to_usize(n)?;

    if n <= 2 {
        return Ok(projective_plan(n, nu, target));
    }

    if n % 2 == 1 {
        if (n + 1).is_power_of_two() {
            let params = FamilyParams::new(nu, nu - 1, 1, 1)?;
            return unblown_plan(n, params, target, Route::MersenneOdd);
        }
        return odd_plan(n, nu, target);
    }

    match target.prime_power {
        Some((p, 1)) => {
            if options.prefer_projective_space {
                return Ok(projective_plan(n, nu, target));
            }
            debug_assert_eq!(p, n + 1);
            let params = FamilyParams::new(nu, nu - 2, 1, 1)?;
            unblown_plan(n, params, target, Route::PrimeSuccessor)
        }
        Some((p, m)) => prime_power_plan(n, nu, p, m, target),
        None => coprime_search_plan(n, nu, target),
    }
}

fn to_usize(n: u64) -> Result<usize> {
    usize::try_from(n).map_err(|_| Error::Size {
        what: "dimension",
        requested: n as u128,
        limit: usize::MAX as u128,
    })
}

fn projective_plan(n: u64, nu: usize, target: GeneratorTarget) -> ConstructionPlan {
    let genus = BigInt::from(n + 1);
    ConstructionPlan {
        n,
        base: Base::ProjectiveSpace { n: nu },
        edge_blowup: false,
        point_blowups: BigInt::zero(),
        base_genus: genus.clone(),
        final_genus: genus,
        target,
        route: Route::ProjectiveSpace,
    }
}

fn unblown_plan(
    n: u64,
    params: FamilyParams,
    target: GeneratorTarget,
    route: Route,
) -> Result<ConstructionPlan> {
    let genus = genus::family_genus(params)?;
    Ok(ConstructionPlan {
        n,
        base: Base::Family(params),
        edge_blowup: false,
        point_blowups: BigInt::zero(),
        base_genus: genus.clone(),
        final_genus: genus,
        target,
        route,
    })
}

/// Signed representative of `x^{-1} mod m` with least absolute value among
/// those whose sign makes `b · x` positive.
fn signed_inverse(x: &BigInt, m: u64) -> Result<i64> {
    let r = numtheory::mod_inverse(x, m)? as i64;
    Ok(if x.is_negative() { r - m as i64 } else { r })
}

/// Closes out a plan whose base genus is `target` modulo `|delta|`.
fn blown_plan(
    n: u64,
    params: FamilyParams,
    edge_blowup: bool,
    base_genus: BigInt,
    target: GeneratorTarget,
    route: Route,
) -> Result<ConstructionPlan> {
    let delta = genus::point_blowup_delta(n)?;
    let excess = &base_genus - BigInt::from(target.magnitude);
    let (k, rem) = excess.div_rem(&delta.abs());
    if !rem.is_zero() || k.is_negative() {
        return Err(Error::InvariantViolation(format!(
            "base genus {base_genus} is not {} plus a nonnegative multiple of {}",
            target.magnitude,
            delta.abs()
        )));
    }
    let final_genus = &base_genus + &k * &delta;
    Ok(ConstructionPlan {
        n,
        base: Base::Family(params),
        edge_blowup,
        point_blowups: k,
        base_genus,
        final_genus,
        target,
        route,
    })
}

fn odd_plan(n: u64, nu: usize, target: GeneratorTarget) -> Result<ConstructionPlan> {
    let m = numtheory::odd_case_exponent(n)?;
    let eps = 1u64 << m;
    let a: u128 = numtheory::factorize(n - 1)?.primes().filter(|&p| p != 2).map(u128::from).product();
    let a = i64::try_from(a).map_err(|_| Error::Size {
        what: "odd radical of n - 1",
        requested: a,
        limit: i64::MAX as u128,
    })?;
    let r = genus::r_value(n, eps)?;
    let c = num_traits::pow(BigInt::from(a), eps as usize) * r + 2;
    let b = signed_inverse(&c, n - 1)?;
    let params = FamilyParams::new(nu, eps as usize, a, b)?;
    let base_genus = genus::edge_blowup_genus(params)?;
    debug_assert_eq!(base_genus, &c * b);
    blown_plan(n, params, true, base_genus, target, Route::OddEdgeBlowup)
}

fn prime_power_plan(
    n: u64,
    nu: usize,
    p: u64,
    m: u32,
    target: GeneratorTarget,
) -> Result<ConstructionPlan> {
    let eps = p.pow(m - 1);
    let r = genus::r_value(n, eps)?;
    // R is p times a unit mod p^m; usually that unit is -1 and b = -1.
    let (unit, rem) = r.div_rem(&BigInt::from(p));
    if !rem.is_zero() || unit.is_multiple_of(&BigInt::from(p)) {
        return Err(Error::Hypothesis(format!(
            "R_{n}({eps}) = {r} is not exactly divisible by {p}"
        )));
    }
    let b = signed_inverse(&unit, eps)?;
    let params = FamilyParams::new(nu, eps as usize, 1, b)?;
    let base_genus = genus::family_genus(params)?;
    blown_plan(n, params, false, base_genus, target, Route::PrimePowerSuccessor)
}

fn coprime_search_plan(n: u64, nu: usize, target: GeneratorTarget) -> Result<ConstructionPlan> {
    let modulus = BinomialModulus::new(n + 1)?;
    let eps = search_order(n, modulus.factorization())
        .find(|&eps| is_coprime_eps(&modulus, n, eps))
        .ok_or(Error::ConjectureFailure { n })?;
    let r = genus::r_value(n, eps)?;
    let b = signed_inverse(&r, n + 1)?;
    let params = FamilyParams::new(nu, eps as usize, 1, b)?;
    let base_genus = genus::family_genus(params)?;
    blown_plan(n, params, false, base_genus, target, Route::CoprimeSearch)
}

/// Whether `gcd(R_n(ε), n + 1) = 1`, with `modulus` fixed at `n + 1`.
pub(crate) fn is_coprime_eps(modulus: &BinomialModulus, n: u64, eps: u64) -> bool {
    let residue = genus::r_mod_with(modulus, n, eps, modulus.binomial(n - 1, eps));
    residue.gcd(&modulus.modulus()) == 1
}

/// Candidate `ε` in search order: primes above the largest prime factor of
/// `n + 1` ascending, then every other `ε ∈ [2, n − 1]` ascending.
pub(crate) fn search_order(
    n: u64,
    factorization: &numtheory::Factorization,
) -> impl Iterator<Item = u64> {
    let floor = factorization.largest_prime().unwrap_or(1);
    let is_first = move |eps: u64| eps > floor && numtheory::is_prime(eps);
    (2..n)
        .filter(move |&e| is_first(e))
        .chain((2..n).filter(move |&e| !is_first(e)))
}

/// Builds the fan described by `plan`, refusing when the predicted
/// maximal-cone count exceeds `cone_cap` or the dimension exceeds `max_dim`.
pub fn materialize(plan: &ConstructionPlan, cone_cap: u64, max_dim: usize) -> Result<Fan> {
    let n = to_usize(plan.n)?;
    if n > max_dim {
        return Err(Error::Size {
            what: "dimension",
            requested: n as u128,
            limit: max_dim as u128,
        });
    }
    let predicted = plan.predicted_cones();
    if predicted > BigInt::from(cone_cap) {
        return Err(Error::Size {
            what: "maximal cones",
            requested: predicted.to_u128().unwrap_or(u128::MAX),
            limit: cone_cap as u128,
        });
    }
    if plan.point_blowups.is_negative() {
        return Err(Error::Parameter("negative point blow-up count".into()));
    }

    let mut fan = plan.base.build()?;
    if plan.edge_blowup {
        let Base::Family(params) = plan.base else {
            return Err(Error::Parameter("edge blow-up needs a family base".into()));
        };
        fan = fan::star_subdivide(&fan, &params.edge_cone())?.fan;
    }

    let k = plan.point_blowups.to_u64().expect("bounded by the cone cap");
    fan = blow_up_points(fan, k)?;

    let label = format!(
        "{}{}{}",
        plan.base,
        if plan.edge_blowup { " + edge blow-up" } else { "" },
        if k > 0 { format!(" + {k} point blow-ups (lexicographic sites)") } else { String::new() },
    );
    Ok(fan.with_label(label))
}

/// Applies `k` point blow-ups, each at the lexicographically first maximal
/// cone not made by an earlier one of these blow-ups.
pub fn blow_up_points(mut fan: Fan, k: u64) -> Result<Fan> {
    let mut point_rays: HashSet<usize> = HashSet::new();
    for step in 0..k {
        let (next, ray) = blow_up_point(&fan, &point_rays).map_err(|e| {
            Error::InvariantViolation(format!("point blow-up {} of {k} failed: {e}", step + 1))
        })?;
        point_rays.insert(ray);
        fan = next;
    }
    Ok(fan)
}

/// One point blow-up at the lexicographically first maximal cone not made by
/// an earlier point blow-up, moving on to later cones if the subdivision
/// ray collides with an existing one.
fn blow_up_point(fan: &Fan, point_rays: &HashSet<usize>) -> Result<(Fan, usize)> {
    let mut sites: Vec<&ConeRef> = fan
        .max_cones()
        .iter()
        .filter(|c| !c.indices().iter().any(|r| point_rays.contains(r)))
        .collect();
    if sites.is_empty() {
        sites = fan.max_cones().iter().collect();
    }
    sites.sort();
    let mut last_err = None;
    for site in sites {
        match fan::star_subdivide(fan, site) {
            Ok(sub) => return Ok((sub.fan, sub.new_ray.expect("maximal cones have n >= 2 rays"))),
            Err(e @ Error::InvariantViolation(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::InvariantViolation("no blow-up site".into())))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaterializedSummary {
    pub label: String,
    pub rays: usize,
    pub max_cones: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanReport {
    pub plan: ConstructionPlan,
    pub checks: Vec<PlanCheck>,
    /// Oracles consulted, in order.
    pub oracles: Vec<String>,
    pub materialized: Option<MaterializedSummary>,
    #[serde(with = "optional_decimal")]
    pub engine_genus: Option<BigInt>,
}

impl PlanReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PlanCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

mod optional_decimal {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => s.serialize_some(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| t.parse().map_err(|_| D::Error::custom(format!("not a decimal integer: {t:?}"))))
            .transpose()
    }
}

pub fn verify_plan(plan: &ConstructionPlan, use_engine: bool) -> PlanReport {
    verify_plan_with(plan, use_engine, DEFAULT_CONE_CAP)
}

pub fn verify_plan_with(plan: &ConstructionPlan, use_engine: bool, cone_cap: u64) -> PlanReport {
    let mut report = PlanReport {
        plan: plan.clone(),
        checks: Vec::new(),
        oracles: vec!["closed_form".into()],
        materialized: None,
        engine_genus: None,
    };
    let mut check = |name: &str, passed: bool, detail: String| {
        report.checks.push(PlanCheck { name: name.into(), passed, detail });
    };

    match genus::generator_target(plan.n) {
        Ok(t) => check(
            "target",
            t == plan.target,
            format!("expected |genus| = {}, plan records {}", t.magnitude, plan.target.magnitude),
        ),
        Err(e) => check("target", false, e.to_string()),
    }

    let derived = derive_base_genus(plan);
    match &derived {
        Ok(g) => check(
            "base_genus",
            *g == plan.base_genus,
            format!("closed form gives {g}, plan records {}", plan.base_genus),
        ),
        Err(e) => check("base_genus", false, e.to_string()),
    }

    let magnitude = BigInt::from(plan.target.magnitude);
    check(
        "final_genus",
        plan.final_genus == magnitude,
        format!("final genus {} against target {magnitude}", plan.final_genus),
    );
    check(
        "positivity",
        plan.base_genus >= magnitude && !plan.point_blowups.is_negative(),
        format!("base genus {}, K = {}", plan.base_genus, plan.point_blowups),
    );

    match genus::point_blowup_delta(plan.n) {
        Ok(delta) => {
            let step = delta.abs();
            let excess = &plan.base_genus - &magnitude;
            if step.is_zero() {
                check(
                    "congruence",
                    excess.is_zero() && plan.point_blowups.is_zero(),
                    format!("point blow-ups do not change the genus; base excess {excess}"),
                );
            } else {
                let (k, rem) = excess.div_rem(&step);
                check(
                    "congruence",
                    rem.is_zero(),
                    format!("base genus {} is {} mod {step}", plan.base_genus, plan.base_genus.mod_floor(&step)),
                );
                check(
                    "point_blowups",
                    rem.is_zero() && k == plan.point_blowups,
                    format!("(base − target) / {step} = {k}, plan records K = {}", plan.point_blowups),
                );
            }
            let sum = &plan.base_genus + &plan.point_blowups * &delta;
            check(
                "genus_arithmetic",
                sum == plan.final_genus,
                format!("base + K·({delta}) = {sum}, plan records {}", plan.final_genus),
            );
        }
        Err(e) => check("point_blowups", false, e.to_string()),
    }

    if use_engine {
        match materialize(plan, cone_cap, DEFAULT_MAX_DIM) {
            Ok(fan) => {
                report.oracles.push("engine".into());
                report.materialized = Some(MaterializedSummary {
                    label: fan.label().to_string(),
                    rays: fan.rays().len(),
                    max_cones: fan.max_cones().len(),
                });
                match chow::milnor_genus(&fan) {
                    Ok(g) => {
                        report.checks.push(PlanCheck {
                            name: "engine_genus".into(),
                            passed: g == plan.final_genus,
                            detail: format!("engine gives {g}, plan records {}", plan.final_genus),
                        });
                        report.engine_genus = Some(g);
                    }
                    Err(e) => report.checks.push(PlanCheck {
                        name: "engine_genus".into(),
                        passed: false,
                        detail: e.to_string(),
                    }),
                }
            }
            Err(Error::Size { what, requested, limit }) => {
                report.oracles.push(format!("engine skipped: {requested} {what} exceeds {limit}"));
            }
            Err(e) => report.checks.push(PlanCheck {
                name: "materialize".into(),
                passed: false,
                detail: e.to_string(),
            }),
        }
    }
    report
}

fn derive_base_genus(plan: &ConstructionPlan) -> Result<BigInt> {
    match plan.base {
        Base::ProjectiveSpace { n } => {
            if plan.edge_blowup {
                return Err(Error::Parameter("edge blow-up needs a family base".into()));
            }
            if n as u64 != plan.n {
                return Err(Error::Parameter(format!("CP^{n} in a dimension-{} plan", plan.n)));
            }
            Ok(BigInt::from(n + 1))
        }
        Base::Family(p) => {
            if p.n as u64 != plan.n {
                return Err(Error::Parameter(format!("family of dimension {} in a dimension-{} plan", p.n, plan.n)));
            }
            if plan.edge_blowup {
                genus::edge_blowup_genus(p)
            } else {
                genus::family_genus(p)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family(plan: &ConstructionPlan) -> FamilyParams {
        match plan.base {
            Base::Family(p) => p,
            other => panic!("expected a family base, got {other}"),
        }
    }

    #[test]
    fn dimension_24() {
        let plan = construct(24).unwrap();
        assert_eq!(family(&plan), FamilyParams::new(24, 5, 1, -1).unwrap());
        assert!(!plan.edge_blowup);
        assert_eq!(plan.base_genus, BigInt::from(33_630));
        assert_eq!(plan.point_blowups, BigInt::from(1345));
        assert_eq!(plan.final_genus, BigInt::from(5));
        assert_eq!(plan.route, Route::PrimePowerSuccessor);
        assert!(verify_plan(&plan, false).passed());
    }

    #[test]
    fn dimension_43() {
        let plan = construct(43).unwrap();
        assert_eq!(family(&plan), FamilyParams::new(43, 4, 21, 11).unwrap());
        assert!(plan.edge_blowup);
        assert_eq!(plan.base_genus, BigInt::from(239_534_274_001u64));
        assert_eq!(plan.point_blowups, BigInt::from(5_703_197_000u64));
        assert_eq!(plan.final_genus, BigInt::from(1));
        assert_eq!(plan.route, Route::OddEdgeBlowup);
        assert!(matches!(materialize(&plan, DEFAULT_CONE_CAP, DEFAULT_MAX_DIM), Err(Error::Size { .. })));
        let report = verify_plan(&plan, true);
        assert!(report.passed());
        assert!(report.engine_genus.is_none());
        assert!(report.oracles.iter().any(|o| o.starts_with("engine skipped")));
    }

    #[test]
    fn dimension_8_end_to_end() {
        let plan = construct(8).unwrap();
        assert_eq!(family(&plan), FamilyParams::new(8, 3, 1, -1).unwrap());
        assert_eq!(plan.point_blowups, BigInt::from(3));
        assert_eq!(plan.final_genus, BigInt::from(3));
        let fan = materialize(&plan, DEFAULT_CONE_CAP, DEFAULT_MAX_DIM).unwrap();
        assert_eq!(fan.rays().len(), 14);
        assert_eq!(fan.max_cones().len(), 36 + 21);
        assert_eq!(BigInt::from(fan.max_cones().len()), plan.predicted_cones());
        assert_eq!(BigInt::from(fan.rays().len()), plan.predicted_rays());
        let report = verify_plan(&plan, true);
        assert!(report.passed(), "{:?}", report.checks);
        assert_eq!(report.engine_genus, Some(BigInt::from(3)));
    }

    #[test]
    fn dimension_7_is_the_bare_family() {
        let plan = construct(7).unwrap();
        assert_eq!(plan.route, Route::MersenneOdd);
        let fan = materialize(&plan, DEFAULT_CONE_CAP, DEFAULT_MAX_DIM).unwrap();
        let expected = fan::build_family_fan(FamilyParams::new(7, 6, 1, 1).unwrap()).unwrap();
        assert_eq!(fan.rays(), expected.rays());
        assert_eq!(fan.max_cones(), expected.max_cones());
    }

    #[test]
    fn small_dimensions() {
        assert_eq!(construct(1).unwrap().base, Base::ProjectiveSpace { n: 1 });
        assert_eq!(construct(2).unwrap().final_genus, BigInt::from(3));
        assert_eq!(construct(3).unwrap().final_genus, BigInt::from(2));
        assert_eq!(construct(4).unwrap().route, Route::PrimeSuccessor);
        let alt = construct_with(4, ConstructOptions { prefer_projective_space: true }).unwrap();
        assert_eq!(alt.base, Base::ProjectiveSpace { n: 4 });
        assert!(verify_plan(&alt, true).passed());
        assert!(construct(0).is_err());
    }

    #[test]
    fn higher_prime_powers_still_reach_the_target() {
        // 81 = 3^4, where b = -1 does not give the right residue
        let plan = construct(80).unwrap();
        assert_eq!(plan.route, Route::PrimePowerSuccessor);
        assert_ne!(family(&plan).b, -1);
        assert!(verify_plan(&plan, false).passed());
        let p = family(&construct(26).unwrap());
        assert_eq!((p.eps, p.a, p.b), (9, 1, -1));
    }

    #[test]
    fn tampered_count_fails() {
        let mut plan = construct(24).unwrap();
        plan.point_blowups += 1;
        let report = verify_plan(&plan, false);
        assert!(!report.passed());
        let names: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
        assert!(names.contains(&"point_blowups"), "{names:?}");
        assert!(names.contains(&"genus_arithmetic"));
    }

    #[test]
    fn tampered_base_fails() {
        let mut plan = construct(8).unwrap();
        if let Base::Family(ref mut p) = plan.base {
            p.b = 2;
        }
        let report = verify_plan(&plan, false);
        assert!(report.failures().any(|c| c.name == "base_genus"));
    }

    #[test]
    fn plans_up_to_300_verify() {
        for n in 1..=300 {
            let plan = construct(n).unwrap_or_else(|e| panic!("n = {n}: {e}"));
            let report = verify_plan(&plan, false);
            assert!(report.passed(), "n = {n}: {:?}", report.failures().collect::<Vec<_>>());
            let magnitude = BigInt::from(plan.target.magnitude);
            match plan.route {
                Route::OddEdgeBlowup => {
                    assert_eq!(plan.base_genus.mod_floor(&BigInt::from(n - 1)), BigInt::from(1))
                }
                Route::PrimePowerSuccessor => {
                    assert_eq!(plan.base_genus.mod_floor(&BigInt::from(n + 1)), magnitude);
                    assert!(plan.base_genus >= magnitude);
                }
                Route::CoprimeSearch => {
                    assert_eq!(plan.base_genus.mod_floor(&BigInt::from(n + 1)), BigInt::from(1))
                }
                _ => assert!(plan.point_blowups.is_zero()),
            }
        }
    }

    #[test]
    fn engine_agrees_up_to_9() {
        for n in 1..=9 {
            let plan = construct(n).unwrap();
            let report = verify_plan(&plan, true);
            assert!(report.passed(), "n = {n}: {:?}", report.checks);
            assert_eq!(report.engine_genus.as_ref(), Some(&plan.final_genus), "n = {n}");
        }
    }

    #[test]
    fn plan_json_round_trip() {
        let plan = construct(43).unwrap();
        let text = plan.to_json();
        assert!(text.contains("\"point_blowups\": \"5703197000\""));
        assert!(text.contains("\"route\": \"odd_edge_blowup\""));
        assert_eq!(ConstructionPlan::from_json(&text).unwrap(), plan);
    }

    #[test]
    fn construct_is_deterministic() {
        for n in [14, 20, 44, 50, 99] {
            assert_eq!(construct(n).unwrap(), construct(n).unwrap());
        }
    }

    #[test]
    fn search_order_puts_large_primes_first() {
        let f = numtheory::factorize(21).unwrap();
        let order: Vec<u64> = search_order(20, &f).collect();
        assert_eq!(&order[..4], &[11, 13, 17, 19]);
        assert_eq!(order.len(), 18);
        assert_eq!(order[4], 2);
    }
}
