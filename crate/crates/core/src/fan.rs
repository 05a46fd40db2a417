//! Complete regular fans in `Z^n`: the combinatorial side of smooth
//! projective toric varieties.
//!
//! A [`Fan`] stores its generating rays once and refers to them by index from
//! every maximal cone. Only simplicial fans are representable. Regularity
//! (every maximal cone is a lattice basis) and completeness are certified by
//! [`is_regular`] and [`facet_pairing_complete`]; the constructor itself only
//! checks structure.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, IntMatrix};

/// Default upper bound on the dimension of fans that get materialized.
pub const DEFAULT_MAX_DIM: usize = 64;

/// An integer vector; primitive when used as a generating ray.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector(Vec<BigInt>);

impl LatticeVector {
    pub fn new(coords: Vec<BigInt>) -> Self {
        LatticeVector(coords)
    }

    pub fn from_i64s(coords: &[i64]) -> Self {
        LatticeVector(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        LatticeVector(vec![BigInt::zero(); dim])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[axis] = BigInt::one();
        v
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// gcd of the coordinates (zero for the zero vector).
    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn is_primitive(&self) -> bool {
        self.content().is_one()
    }

    fn add_assign(&mut self, other: &LatticeVector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    fn divide_exact(&mut self, d: &BigInt) {
        for c in self.0.iter_mut() {
            *c = &*c / d;
        }
    }

    pub fn dot(&self, other: &[BigInt]) -> BigInt {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A simplicial cone, as a sorted duplicate-free set of ray indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConeRef(Vec<usize>);

impl ConeRef {
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Parameter("cone must reference at least one ray".into()));
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parameter(format!("cone {indices:?} repeats a ray")));
        }
        Ok(ConeRef(indices))
    }

    fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        ConeRef(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, ray: usize) -> bool {
        self.0.binary_search(&ray).is_ok()
    }

    pub fn contains_all(&self, rays: &[usize]) -> bool {
        rays.iter().all(|&r| self.contains(r))
    }
}

/// Parameters of the fan family `Δ_n^ε(a, b)`: a `CP^{n-ε}`-bundle over a
/// `CP^{ε-1}`-bundle over `CP^1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyParams {
    pub n: usize,
    pub eps: usize,
    pub a: i64,
    pub b: i64,
}

impl FamilyParams {
    pub fn new(n: usize, eps: usize, a: i64, b: i64) -> Result<Self> {
        let params = FamilyParams { n, eps, a, b };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Parameter(format!("family needs n >= 3, got n = {}", self.n)));
        }
        if self.eps < 2 || self.eps > self.n - 1 {
            return Err(Error::Parameter(format!(
                "family needs 2 <= eps <= n - 1, got eps = {} with n = {}",
                self.eps, self.n
            )));
        }
        Ok(())
    }

    /// Ray index of `u_k`, `1 <= k <= n - ε + 1`.
    pub fn u(&self, k: usize) -> usize {
        debug_assert!((1..=self.n - self.eps + 1).contains(&k));
        k - 1
    }

    /// Ray index of `v_k`, `1 <= k <= ε`.
    pub fn v(&self, k: usize) -> usize {
        debug_assert!((1..=self.eps).contains(&k));
        self.n - self.eps + k
    }

    /// Ray index of `w_k`, `k ∈ {1, 2}`.
    pub fn w(&self, k: usize) -> usize {
        debug_assert!((1..=2).contains(&k));
        self.n + k
    }

    /// The codimension-one cone `pos(u_1..u_{n-ε}, v_1..v_{ε-1})` whose
    /// star subdivision blows up a torus-invariant surface.
    pub fn edge_cone(&self) -> ConeRef {
        let mut idx: Vec<usize> = (1..=self.n - self.eps).map(|k| self.u(k)).collect();
        idx.extend((1..self.eps).map(|k| self.v(k)));
        ConeRef::from_sorted(idx)
    }

    pub fn u_set(&self) -> Vec<usize> {
        (1..=self.n - self.eps + 1).map(|k| self.u(k)).collect()
    }

    pub fn v_set(&self) -> Vec<usize> {
        (1..=self.eps).map(|k| self.v(k)).collect()
    }

    pub fn w_set(&self) -> Vec<usize> {
        vec![self.w(1), self.w(2)]
    }
}

/// A simplicial fan given by its rays and maximal cones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FanDocument", into = "FanDocument")]
pub struct Fan {
    dim: usize,
    rays: Vec<LatticeVector>,
    max_cones: Vec<ConeRef>,
    label: String,
}

impl Fan {
    /// Structural validation only: dimensions, index ranges, cone sizes,
    /// primitive and pairwise distinct rays.
    pub fn new(
        dim: usize,
        rays: Vec<LatticeVector>,
        max_cones: Vec<ConeRef>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::MalformedFan("dimension must be positive".into()));
        }
        for (i, ray) in rays.iter().enumerate() {
            if ray.dim() != dim {
                return Err(Error::MalformedFan(format!(
                    "ray {i} has {} coordinates, expected {dim}",
                    ray.dim()
                )));
            }
            if !ray.is_primitive() {
                return Err(Error::MalformedFan(format!("ray {i} = {ray} is not primitive")));
            }
        }
        let mut seen = HashMap::with_capacity(rays.len());
        for (i, ray) in rays.iter().enumerate() {
            if let Some(j) = seen.insert(ray, i) {
                return Err(Error::MalformedFan(format!("rays {j} and {i} coincide")));
            }
        }
        if max_cones.is_empty() {
            return Err(Error::MalformedFan("fan has no maximal cones".into()));
        }
        for cone in &max_cones {
            if cone.len() != dim {
                return Err(Error::MalformedFan(format!(
                    "cone {:?} has {} rays, expected {dim}",
                    cone.indices(),
                    cone.len()
                )));
            }
            if let Some(&bad) = cone.indices().iter().find(|&&r| r >= rays.len()) {
                return Err(Error::MalformedFan(format!(
                    "cone {:?} references missing ray {bad}",
                    cone.indices()
                )));
            }
        }
        Ok(Fan { dim, rays, max_cones, label: label.into() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn ray(&self, index: usize) -> &LatticeVector {
        &self.rays[index]
    }

    pub fn max_cones(&self) -> &[ConeRef] {
        &self.max_cones
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Index of a ray equal to `v`, if any.
    pub fn find_ray(&self, v: &LatticeVector) -> Option<usize> {
        self.rays.iter().position(|r| r == v)
    }

    /// Whether the given rays span a cone of the fan.
    pub fn is_face(&self, rays: &[usize]) -> bool {
        self.max_cones.iter().any(|c| c.contains_all(rays))
    }

    /// Rows are the rays of `cone`, in index order.
    pub fn cone_matrix(&self, cone: &ConeRef) -> IntMatrix {
        cone.indices()
            .iter()
            .map(|&i| self.rays[i].coords().to_vec())
            .collect()
    }

    /// Same cones with every ray replaced by `matrix · ray`.
    pub fn transformed(&self, matrix: &[Vec<BigInt>]) -> Result<Fan> {
        let rays = self
            .rays
            .iter()
            .map(|r| LatticeVector::new(linalg::mat_vec(matrix, r.coords())))
            .collect();
        Fan::new(self.dim, rays, self.max_cones.clone(), self.label.clone())
    }

    /// The same fan with one maximal cone dropped.
    pub fn without_cone(&self, position: usize) -> Result<Fan> {
        let mut cones = self.max_cones.clone();
        cones.remove(position);
        Fan::new(self.dim, self.rays.clone(), cones, self.label.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fan serializes")
    }

    pub fn from_json(text: &str) -> Result<Fan> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Integer in the interchange format: a JSON number when it fits in 64 bits,
/// a decimal string otherwise.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum JsonInt {
    Small(i64),
    Big(String),
}

impl From<&BigInt> for JsonInt {
    fn from(x: &BigInt) -> Self {
        match x.to_i64() {
            Some(v) => JsonInt::Small(v),
            None => JsonInt::Big(x.to_string()),
        }
    }
}

impl TryFrom<JsonInt> for BigInt {
    type Error = Error;

    fn try_from(x: JsonInt) -> Result<BigInt> {
        match x {
            JsonInt::Small(v) => Ok(BigInt::from(v)),
            JsonInt::Big(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::MalformedFan(format!("not a decimal integer: {s:?}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FanDocument {
    dim: usize,
    label: String,
    rays: Vec<Vec<JsonInt>>,
    max_cones: Vec<Vec<usize>>,
}

impl From<Fan> for FanDocument {
    fn from(fan: Fan) -> Self {
        FanDocument {
            dim: fan.dim,
            label: fan.label,
            rays: fan
                .rays
                .iter()
                .map(|r| r.coords().iter().map(JsonInt::from).collect())
                .collect(),
            max_cones: fan.max_cones.into_iter().map(|c| c.0).collect(),
        }
    }
}

impl TryFrom<FanDocument> for Fan {
    type Error = Error;

    fn try_from(doc: FanDocument) -> Result<Fan> {
        let rays = doc
            .rays
            .into_iter()
            .map(|r| r.into_iter().map(BigInt::try_from).collect::<Result<Vec<_>>>())
            .map(|r| r.map(LatticeVector::new))
            .collect::<Result<Vec<_>>>()?;
        let cones = doc
            .max_cones
            .into_iter()
            .map(ConeRef::new)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::MalformedFan(e.to_string()))?;
        Fan::new(doc.dim, rays, cones, doc.label)
    }
}

fn combinations(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(pool: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..pool.len() {
            if pool.len() - i < k - cur.len() {
                break;
            }
            cur.push(pool[i]);
            go(pool, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(pool, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// The fan `Δ_n^ε(a, b)` with `n + 3` rays `U ∪ V ∪ W`.
pub fn build_family_fan(params: FamilyParams) -> Result<Fan> {
    params.validate()?;
    let FamilyParams { n, eps, a, b } = params;
    let mut rays = Vec::with_capacity(n + 3);

    // U
    for k in 0..n - eps {
        rays.push(LatticeVector::unit(n, k));
    }
    let mut u_last = LatticeVector::zero(n);
    for c in &mut u_last.0[..n - eps] {
        *c = BigInt::from(-1);
    }
    rays.push(u_last);

    // V
    for k in 1..eps {
        rays.push(LatticeVector::unit(n, n - eps + k - 1));
    }
    let mut v_last = LatticeVector::zero(n);
    v_last.0[n - eps - 1] = BigInt::from(a);
    for c in &mut v_last.0[n - eps..n - 1] {
        *c = BigInt::from(-1);
    }
    rays.push(v_last);

    // W
    rays.push(LatticeVector::unit(n, n - 1));
    let mut w_last = LatticeVector::zero(n);
    w_last.0[n - 2] = BigInt::from(b);
    w_last.0[n - 1] = BigInt::from(-1);
    rays.push(w_last);

    let u_choices = combinations(&params.u_set(), n - eps);
    let v_choices = combinations(&params.v_set(), eps - 1);
    let mut cones = Vec::with_capacity(u_choices.len() * v_choices.len() * 2);
    for us in &u_choices {
        for vs in &v_choices {
            for w in params.w_set() {
                let mut idx = us.clone();
                idx.extend_from_slice(vs);
                idx.push(w);
                cones.push(ConeRef::from_sorted(idx));
            }
        }
    }
    cones.sort();
    Fan::new(n, rays, cones, format!("family(n={n},eps={eps},a={a},b={b})"))
}

/// The fan of `CP^n`: rays `e_1, ..., e_n, -(e_1 + ... + e_n)`.
pub fn projective_space_fan(n: usize) -> Result<Fan> {
    if n == 0 {
        return Err(Error::Parameter("projective space needs n >= 1".into()));
    }
    let mut rays: Vec<_> = (0..n).map(|k| LatticeVector::unit(n, k)).collect();
    rays.push(LatticeVector::new(vec![BigInt::from(-1); n]));
    let all: Vec<usize> = (0..=n).collect();
    let cones = combinations(&all, n).into_iter().map(ConeRef::from_sorted).collect();
    Fan::new(n, rays, cones, format!("CP^{n}"))
}

/// Result of a star subdivision.
#[derive(Clone, Debug)]
pub struct StarSubdivision {
    pub fan: Fan,
    /// Index of the new ray; `None` for the degenerate one-ray case.
    pub new_ray: Option<usize>,
    /// `|sigma| = 1`: nothing was subdivided.
    pub degenerate: bool,
    /// gcd of the raw sum of the rays of `sigma` before normalization.
    pub content: BigInt,
}

/// Star subdivision of `fan` relative to the cone `sigma`.
///
/// The new ray is the sum of the rays of `sigma`. Every maximal cone
/// containing `sigma` is replaced by the `|sigma|` cones obtained by
/// swapping one ray of `sigma` for the new ray. Retained cones keep their
/// order; new cones are appended.
pub fn star_subdivide(fan: &Fan, sigma: &ConeRef) -> Result<StarSubdivision> {
    if sigma.indices().iter().any(|&i| i >= fan.rays.len()) {
        return Err(Error::InvalidCone { cone: sigma.indices().to_vec() });
    }
    let (containing, retained): (Vec<&ConeRef>, Vec<&ConeRef>) =
        fan.max_cones.iter().partition(|c| c.contains_all(sigma.indices()));
    if containing.is_empty() {
        return Err(Error::InvalidCone { cone: sigma.indices().to_vec() });
    }
    if sigma.len() == 1 {
        return Ok(StarSubdivision {
            fan: fan.clone(),
            new_ray: None,
            degenerate: true,
            content: BigInt::one(),
        });
    }

    let mut x = LatticeVector::zero(fan.dim);
    for &i in sigma.indices() {
        x.add_assign(&fan.rays[i]);
    }
    let content = x.content();
    if content.is_zero() {
        return Err(Error::InvariantViolation(format!(
            "rays of {:?} sum to zero",
            sigma.indices()
        )));
    }
    if !content.is_one() {
        x.divide_exact(&content);
    }
    if let Some(existing) = fan.find_ray(&x) {
        return Err(Error::InvariantViolation(format!(
            "subdivision ray {x} already present as ray {existing}"
        )));
    }

    let new_index = fan.rays.len();
    let mut rays = fan.rays.clone();
    rays.push(x);

    let mut cones: Vec<ConeRef> = retained.into_iter().cloned().collect();
    let first_new = cones.len();
    for tau in containing {
        for &dropped in sigma.indices() {
            let mut idx: Vec<usize> = tau.indices().iter().copied().filter(|&r| r != dropped).collect();
            idx.push(new_index);
            cones.push(ConeRef::from_sorted(idx));
        }
    }

    let out = Fan::new(fan.dim, rays, cones, fan.label.clone())
        .map_err(|e| Error::InvariantViolation(format!("subdivision produced a malformed fan: {e}")))?;
    for cone in &out.max_cones[first_new..] {
        let det = linalg::determinant(&out.cone_matrix(cone));
        if !det.abs().is_one() {
            return Err(Error::InvariantViolation(format!(
                "subdivided cone {:?} has determinant {det}",
                cone.indices()
            )));
        }
    }
    Ok(StarSubdivision { fan: out, new_ray: Some(new_index), degenerate: false, content })
}

/// Per-cone determinants of a fan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularityReport {
    pub determinants: Vec<BigInt>,
}

impl RegularityReport {
    pub fn passed(&self) -> bool {
        self.determinants.iter().all(|d| d.abs().is_one())
    }

    /// Positions of cones whose determinant is not `±1`.
    pub fn failures(&self) -> Vec<usize> {
        self.determinants
            .iter()
            .enumerate()
            .filter(|(_, d)| !d.abs().is_one())
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn is_regular(fan: &Fan) -> RegularityReport {
    RegularityReport {
        determinants: fan
            .max_cones
            .iter()
            .map(|c| linalg::determinant(&fan.cone_matrix(c)))
            .collect(),
    }
}

/// A codimension-one face that does not sit in exactly two maximal cones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetViolation {
    pub facet: Vec<usize>,
    pub occurrences: usize,
}

/// Combinatorial completeness certificate: facet pairing plus a connected
/// maximal-cone adjacency graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletenessReport {
    pub violations: Vec<FacetViolation>,
    pub connected: bool,
}

impl CompletenessReport {
    pub fn paired(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn complete(&self) -> bool {
        self.paired() && self.connected
    }
}

pub fn facet_pairing_complete(fan: &Fan) -> CompletenessReport {
    let mut facets: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (ci, cone) in fan.max_cones.iter().enumerate() {
        for skip in 0..cone.len() {
            let facet: Vec<usize> = cone
                .indices()
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != skip)
                .map(|(_, &r)| r)
                .collect();
            facets.entry(facet).or_default().push(ci);
        }
    }

    let mut violations: Vec<FacetViolation> = facets
        .iter()
        .filter(|(_, owners)| owners.len() != 2)
        .map(|(facet, owners)| FacetViolation { facet: facet.clone(), occurrences: owners.len() })
        .collect();
    violations.sort_by(|a, b| a.facet.cmp(&b.facet));

    let count = fan.max_cones.len();
    let mut adjacency = vec![Vec::new(); count];
    for owners in facets.values().filter(|o| o.len() == 2) {
        adjacency[owners[0]].push(owners[1]);
        adjacency[owners[1]].push(owners[0]);
    }
    let mut seen = vec![false; count];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(c) = queue.pop_front() {
        for &d in &adjacency[c] {
            if !seen[d] {
                seen[d] = true;
                reached += 1;
                queue.push_back(d);
            }
        }
    }

    CompletenessReport { violations, connected: reached == count }
}
