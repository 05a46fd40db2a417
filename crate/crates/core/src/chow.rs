//! Intersection numbers on smooth complete toric varieties, computed
//! directly from the fan by torus fixed-point localization.
//!
//! For a maximal cone `σ` with rays `w_1..w_n`, let `m_1..m_n` be the dual
//! lattice basis (rows of the inverse ray matrix). At a generic integer point
//! `ξ`, the divisor class of ray `w_i` restricts to the fixed point of `σ` as
//! the weight `<m_i, ξ>`, and every other divisor restricts to zero. The
//! degree of a top-degree monomial is then
//!
//! ```text
//!     Σ_σ  Π_factors weight(factor, σ) / Π_i <m_i, ξ>
//! ```
//!
//! summed in exact rational arithmetic. The result is independent of `ξ`;
//! every evaluation is repeated at a second seed and compared.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fan::{facet_pairing_complete, is_regular, ConeRef, Fan};
use crate::linalg::{self, IntMatrix};

pub const DEFAULT_SEEDS: [u64; 2] = [0x5eed_0001, 0x5eed_0002];
const MAX_DRAWS: usize = 32;
const GENERIC_ENTRY_MAX: i64 = 1 << 20;

/// A monomial in the divisor classes of the rays, stored sparsely.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DivisorMonomial {
    exponents: BTreeMap<usize, u32>,
}

impl DivisorMonomial {
    pub fn from_factors(factors: &[usize]) -> Self {
        let mut exponents = BTreeMap::new();
        for &f in factors {
            *exponents.entry(f).or_insert(0) += 1;
        }
        DivisorMonomial { exponents }
    }

    /// `D_ray^power`.
    pub fn power(ray: usize, power: u32) -> Self {
        let mut exponents = BTreeMap::new();
        if power > 0 {
            exponents.insert(ray, power);
        }
        DivisorMonomial { exponents }
    }

    pub fn degree(&self) -> u32 {
        self.exponents.values().sum()
    }

    pub fn support(&self) -> Vec<usize> {
        self.exponents.keys().copied().collect()
    }

    pub fn exponents(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.exponents.iter().map(|(&r, &e)| (r, e))
    }
}

impl fmt::Display for DivisorMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "1");
        }
        for (i, (r, e)) in self.exponents().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            if e == 1 {
                write!(f, "D{r}")?;
            } else {
                write!(f, "D{r}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Degree of a top-degree class, with the seed that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingResult {
    pub value: BigInt,
    pub evaluation_seed: u64,
}

struct ConeWeights {
    cone: ConeRef,
    /// `<m_i, ξ>` for the i-th ray of the cone (in index order).
    weights: Vec<BigInt>,
    /// Product of all weights: the equivariant Euler class of the tangent space.
    euler: BigInt,
    /// `common / euler` when the table has a common denominator.
    cofactor: Option<BigInt>,
}

struct WeightTable {
    seed: u64,
    cones: Vec<ConeWeights>,
    /// lcm of all Euler classes; kept only for small fans.
    common: Option<BigInt>,
}

/// Above this many cones sums are taken in reduced rationals instead.
const COMMON_DENOMINATOR_MAX_CONES: usize = 2048;

/// Localization engine over one certified fan.
pub struct ChowEngine<'a> {
    fan: &'a Fan,
    tables: Vec<WeightTable>,
}

impl<'a> ChowEngine<'a> {
    /// Certifies the fan (regular and facet-paired) and precomputes weight
    /// tables for the default seeds.
    pub fn new(fan: &'a Fan) -> Result<Self> {
        Self::with_seeds(fan, &DEFAULT_SEEDS)
    }

    pub fn with_seeds(fan: &'a Fan, seeds: &[u64]) -> Result<Self> {
        if seeds.len() < 2 || seeds.iter().collect::<HashSet<_>>().len() != seeds.len() {
            return Err(Error::Parameter("need at least two distinct evaluation seeds".into()));
        }
        let regular = is_regular(fan);
        if !regular.passed() {
            return Err(Error::MalformedFan(format!(
                "cones at positions {:?} are not unimodular",
                regular.failures()
            )));
        }
        let completeness = facet_pairing_complete(fan);
        if !completeness.complete() {
            return Err(Error::MalformedFan(format!(
                "fan fails the completeness certificate ({} unpaired facets, connected: {})",
                completeness.violations.len(),
                completeness.connected
            )));
        }

        let duals: Vec<IntMatrix> = fan
            .max_cones()
            .iter()
            .map(|c| {
                linalg::unimodular_inverse(&transpose(&fan.cone_matrix(c)))
                    .expect("regular cones have unimodular ray matrices")
            })
            .collect();
        let tables = seeds
            .iter()
            .map(|&seed| weight_table(fan, &duals, seed))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChowEngine { fan, tables })
    }

    pub fn fan(&self) -> &Fan {
        self.fan
    }

    fn evaluate(&self, table: &WeightTable, mono: &DivisorMonomial) -> Result<BigInt> {
        let support = mono.support();
        let numerators = table.cones.iter().filter(|cw| cw.cone.contains_all(&support)).map(|cw| {
            let mut numerator = BigInt::one();
            for (ray, exp) in mono.exponents() {
                let pos = cw.cone.indices().binary_search(&ray).expect("support in cone");
                numerator *= num_traits::pow(cw.weights[pos].clone(), exp as usize);
            }
            (cw, numerator)
        });

        if let Some(common) = &table.common {
            let mut sum = BigInt::zero();
            for (cw, numerator) in numerators {
                sum += numerator * cw.cofactor.as_ref().expect("cofactors accompany the common denominator");
            }
            let (q, r) = sum.div_rem(common);
            if !r.is_zero() {
                return Err(Error::InvariantViolation(format!(
                    "localization sum for {mono} is {}, not an integer",
                    BigRational::new(sum, common.clone())
                )));
            }
            return Ok(q);
        }

        let mut total = BigRational::zero();
        for (cw, numerator) in numerators {
            total += BigRational::new(numerator, cw.euler.clone());
        }
        if !total.is_integer() {
            return Err(Error::InvariantViolation(format!(
                "localization sum for {mono} is {total}, not an integer"
            )));
        }
        Ok(total.to_integer())
    }

    /// Degree of a monomial of total degree `n`, evaluated at every seed.
    pub fn intersection_number(&self, mono: &DivisorMonomial) -> Result<PairingResult> {
        let n = self.fan.dim() as u32;
        if mono.degree() != n {
            return Err(Error::Parameter(format!(
                "monomial {mono} has degree {}, expected {n}",
                mono.degree()
            )));
        }
        if let Some(bad) = mono.support().into_iter().find(|&r| r >= self.fan.rays().len()) {
            return Err(Error::Parameter(format!("monomial references missing ray {bad}")));
        }
        let primary = &self.tables[0];
        let value = self.evaluate(primary, mono)?;
        for other in &self.tables[1..] {
            let again = self.evaluate(other, mono)?;
            if again != value {
                return Err(Error::InvariantViolation(format!(
                    "{mono} evaluates to {value} at seed {} but {again} at seed {}",
                    primary.seed, other.seed
                )));
            }
        }
        Ok(PairingResult { value, evaluation_seed: primary.seed })
    }

    /// `s_n = Σ_k <D_k^n, μ>`.
    pub fn milnor_genus(&self) -> Result<BigInt> {
        let n = self.fan.dim() as u32;
        let mut total = BigInt::zero();
        for ray in 0..self.fan.rays().len() {
            total += self.intersection_number(&DivisorMonomial::power(ray, n))?.value;
        }
        Ok(total)
    }

    /// Top Chern number: the degree-`n` part of `Π (1 + D_k)`, i.e. the sum
    /// of all square-free degree-`n` monomials.
    pub fn euler_characteristic(&self) -> Result<BigInt> {
        let n = self.fan.dim();
        let rays: Vec<usize> = (0..self.fan.rays().len()).collect();
        let mut total = BigInt::zero();
        let mut subset = Vec::with_capacity(n);
        for_each_subset(&rays, n, 0, &mut subset, &mut |s| {
            total += self.intersection_number(&DivisorMonomial::from_factors(s))?.value;
            Ok(())
        })?;
        Ok(total)
    }
}

fn for_each_subset(
    pool: &[usize],
    k: usize,
    start: usize,
    cur: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if cur.len() == k {
        return f(cur);
    }
    for i in start..pool.len() {
        if pool.len() - i < k - cur.len() {
            break;
        }
        cur.push(pool[i]);
        for_each_subset(pool, k, i + 1, cur, f)?;
        cur.pop();
    }
    Ok(())
}

fn transpose(m: &[Vec<BigInt>]) -> IntMatrix {
    let n = m.len();
    (0..n).map(|j| (0..n).map(|i| m[i][j].clone()).collect()).collect()
}

// Columns of the cone matrix are the rays, so the rows of its inverse are
// the dual basis vectors m_i.
fn weight_table(fan: &Fan, duals: &[IntMatrix], seed: u64) -> Result<WeightTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'draw: for _ in 0..MAX_DRAWS {
        let xi: Vec<BigInt> = (0..fan.dim())
            .map(|_| BigInt::from(rng.gen_range(1..=GENERIC_ENTRY_MAX)))
            .collect();
        let mut cones = Vec::with_capacity(duals.len());
        for (cone, dual) in fan.max_cones().iter().zip(duals) {
            let weights = linalg::mat_vec(dual, &xi);
            if weights.iter().any(Zero::is_zero) {
                continue 'draw;
            }
            let euler = weights.iter().product();
            cones.push(ConeWeights { cone: cone.clone(), weights, euler, cofactor: None });
        }
        let mut common = None;
        if cones.len() <= COMMON_DENOMINATOR_MAX_CONES {
            let l = cones.iter().fold(BigInt::one(), |acc, cw| acc.lcm(&cw.euler));
            for cw in &mut cones {
                cw.cofactor = Some(&l / &cw.euler);
            }
            common = Some(l);
        }
        return Ok(WeightTable { seed, cones, common });
    }
    Err(Error::DegenerateEvaluation { seed, attempts: MAX_DRAWS })
}

pub fn intersection_number(fan: &Fan, mono: &DivisorMonomial) -> Result<PairingResult> {
    ChowEngine::new(fan)?.intersection_number(mono)
}

pub fn milnor_genus(fan: &Fan) -> Result<BigInt> {
    ChowEngine::new(fan)?.milnor_genus()
}

pub fn euler_characteristic(fan: &Fan) -> Result<BigInt> {
    ChowEngine::new(fan)?.euler_characteristic()
}

/// Limits for the minimal non-face search.
#[derive(Clone, Copy, Debug)]
pub struct PresentationLimits {
    pub max_rays: usize,
    pub max_faces: usize,
}

impl Default for PresentationLimits {
    fn default() -> Self {
        PresentationLimits { max_rays: 64, max_faces: 2_000_000 }
    }
}

/// `Z[D_1..D_m] / (L + J)`: linear relations from the ray coordinates and
/// the Stanley-Reisner generators (minimal non-faces).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyPresentation {
    pub generators: Vec<String>,
    /// `linear_relations[i][j]` = coordinate `i` of ray `j`.
    pub linear_relations: Vec<Vec<BigInt>>,
    pub sr_generators: Vec<Vec<usize>>,
}

impl fmt::Display for CohomologyPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "generators: {}", self.generators.join(", "))?;
        writeln!(f, "linear relations:")?;
        for (i, row) in self.linear_relations.iter().enumerate() {
            let terms: Vec<String> = row
                .iter()
                .zip(&self.generators)
                .filter(|(c, _)| !c.is_zero())
                .map(|(c, g)| if c.is_one() { g.clone() } else { format!("{c}·{g}") })
                .collect();
            let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
            writeln!(f, "  θ{} = {}", i + 1, body.replace("+ -", "- "))?;
        }
        writeln!(f, "Stanley-Reisner generators:")?;
        for gen in &self.sr_generators {
            let names: Vec<&str> = gen.iter().map(|&r| self.generators[r].as_str()).collect();
            writeln!(f, "  {}", names.join("·"))?;
        }
        Ok(())
    }
}

/// Breadth-first search over ray subsets by size, keeping faces and
/// reporting a candidate as a minimal non-face when it lies in no maximal
/// cone but all of its facets do.
pub fn cohomology_presentation(fan: &Fan, limits: PresentationLimits) -> Result<CohomologyPresentation> {
    let m = fan.rays().len();
    if m > limits.max_rays {
        return Err(Error::Size {
            what: "ray count for minimal non-face search",
            requested: m as u128,
            limit: limits.max_rays as u128,
        });
    }
    let n = fan.dim();
    let linear_relations = (0..n)
        .map(|i| fan.rays().iter().map(|r| r.coords()[i].clone()).collect())
        .collect();

    let mut sr_generators = Vec::new();
    let mut level: HashSet<Vec<usize>> = HashSet::from([Vec::new()]);
    let mut faces_seen = 1usize;
    while !level.is_empty() {
        let mut frontier: Vec<&Vec<usize>> = level.iter().collect();
        frontier.sort();
        let mut next = HashSet::new();
        for face in frontier {
            let start = face.last().map_or(0, |&r| r + 1);
            for r in start..m {
                let mut cand = face.clone();
                cand.push(r);
                if fan.is_face(&cand) {
                    next.insert(cand);
                    faces_seen += 1;
                    if faces_seen > limits.max_faces {
                        return Err(Error::Size {
                            what: "face count for minimal non-face search",
                            requested: faces_seen as u128,
                            limit: limits.max_faces as u128,
                        });
                    }
                } else if (0..cand.len()).all(|skip| {
                    let sub: Vec<usize> = cand
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != skip)
                        .map(|(_, &x)| x)
                        .collect();
                    level.contains(&sub)
                }) {
                    sr_generators.push(cand);
                }
            }
        }
        level = next;
    }
    sr_generators.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    Ok(CohomologyPresentation {
        generators: (0..m).map(|i| format!("D{i}")).collect(),
        linear_relations,
        sr_generators,
    })
}
