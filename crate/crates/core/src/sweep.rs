//! Sweep of the coprimality conjecture: every even `n` with `n + 1` not a
//! prime power should admit `ε ∈ [2, n − 1]` with `gcd(R_n(ε), n + 1) = 1`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genus;
use crate::numtheory::{self, BinomialModulus};

pub const CSV_HEADER: &str = "n,witness_eps,prime_witness_eps,eps_count,elapsed_ms";

/// Whether `n` is in the sweep domain: even, with `n + 1` not a prime power.
pub fn qualifies(n: u64) -> Result<bool> {
    Ok(n >= 2 && n % 2 == 0 && numtheory::prime_power(n + 1)?.is_none())
}

fn domain_modulus(n: u64) -> Result<BinomialModulus> {
    if !qualifies(n)? {
        return Err(Error::Parameter(format!(
            "n = {n} must be even with n + 1 not a prime power"
        )));
    }
    BinomialModulus::new(n + 1)
}

/// Residues `R_n(ε) mod n + 1` for `ε = 2, ..., n − 1`, in order.
fn residues(modulus: &BinomialModulus, n: u64) -> impl Iterator<Item = (u64, u64)> + '_ {
    modulus
        .row(n - 1)
        .enumerate()
        .skip(2)
        .take_while(move |&(eps, _)| (eps as u64) < n)
        .map(move |(eps, c)| (eps as u64, genus::r_mod_with(modulus, n, eps as u64, c)))
}

/// Smallest valid `ε`, or `None` if there is none.
pub fn find_epsilon(n: u64) -> Result<Option<u64>> {
    let modulus = domain_modulus(n)?;
    let m = modulus.modulus();
    let found = residues(&modulus, n).find(|&(_, r)| r.gcd(&m) == 1);
    Ok(found.map(|(eps, _)| eps))
}

/// Smallest valid prime `ε` above the largest prime factor of `n + 1`.
pub fn prime_witness(n: u64) -> Result<Option<u64>> {
    let modulus = domain_modulus(n)?;
    let m = modulus.modulus();
    let floor = modulus.factorization().largest_prime().unwrap_or(1);
    let found = residues(&modulus, n)
        .find(|&(eps, r)| eps > floor && numtheory::is_prime(eps) && r.gcd(&m) == 1);
    Ok(found.map(|(eps, _)| eps))
}

/// Number of valid `ε ∈ [2, n − 1]`.
pub fn count_epsilons(n: u64) -> Result<u64> {
    let modulus = domain_modulus(n)?;
    let m = modulus.modulus();
    let count = residues(&modulus, n).filter(|&(_, r)| r.gcd(&m) == 1).count();
    Ok(count as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Stop scanning each `n` once both witnesses are known.
    WitnessOnly,
    /// Scan every `ε` and record the count.
    FullCount,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: u64,
    pub witness_eps: Option<u64>,
    pub prime_witness_eps: Option<u64>,
    pub eps_count: Option<u64>,
    #[serde(with = "millis")]
    pub elapsed: Duration,
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

impl SweepRecord {
    /// One CSV line without trailing newline. Timings are left blank unless
    /// requested so that output does not depend on the machine.
    pub fn csv_row(&self, timings: bool) -> String {
        fn opt(x: Option<u64>) -> String {
            x.map(|v| v.to_string()).unwrap_or_default()
        }
        let elapsed = if timings { self.elapsed.as_millis().to_string() } else { String::new() };
        format!(
            "{},{},{},{},{}",
            self.n,
            opt(self.witness_eps),
            opt(self.prime_witness_eps),
            opt(self.eps_count),
            elapsed
        )
    }

    /// Same content, ignoring timing.
    pub fn same_result(&self, other: &SweepRecord) -> bool {
        (self.n, self.witness_eps, self.prime_witness_eps, self.eps_count)
            == (other.n, other.witness_eps, other.prime_witness_eps, other.eps_count)
    }
}

/// Scans one qualifying `n`. `is_prime` must cover `[0, n)`.
fn scan(n: u64, mode: SweepMode, is_prime: &[bool]) -> Result<SweepRecord> {
    let start = Instant::now();
    let modulus = domain_modulus(n)?;
    let m = modulus.modulus();
    let floor = modulus.factorization().largest_prime().unwrap_or(1);
    let mut witness = None;
    let mut prime_witness = None;
    let mut count = 0u64;
    for (eps, r) in residues(&modulus, n) {
        if r.gcd(&m) != 1 {
            continue;
        }
        count += 1;
        witness.get_or_insert(eps);
        if prime_witness.is_none() && eps > floor && is_prime[eps as usize] {
            prime_witness = Some(eps);
        }
        if mode == SweepMode::WitnessOnly && prime_witness.is_some() {
            break;
        }
    }
    Ok(SweepRecord {
        n,
        witness_eps: witness,
        prime_witness_eps: prime_witness,
        eps_count: (mode == SweepMode::FullCount).then_some(count),
        elapsed: start.elapsed(),
    })
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub max_n: u64,
    pub mode: SweepMode,
    /// Worker threads; 0 picks the rayon default.
    pub jobs: usize,
    pub checkpoint: Option<PathBuf>,
    /// Dimensions per block; a checkpoint is written after every block.
    pub block: u64,
}

impl SweepConfig {
    pub fn new(max_n: u64, mode: SweepMode) -> Self {
        SweepConfig { max_n, mode, jobs: 0, checkpoint: None, block: 1_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub max_n: u64,
    pub mode: SweepMode,
    pub qualifying: u64,
    /// Dimensions with no valid `ε`.
    pub missing_witnesses: Vec<u64>,
    pub counterexample: bool,
    /// Dimensions where no prime above the largest prime factor works.
    pub prime_heuristic_failures: Vec<u64>,
    pub min_count: Option<u64>,
    pub max_count: Option<u64>,
    /// Records replayed from a checkpoint.
    pub resumed_records: u64,
    pub elapsed_ms: u64,
}

impl SweepSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Checkpoint {
    mode: SweepMode,
    /// Every `n` below this has been processed.
    next_n: u64,
    records: Vec<SweepRecord>,
}

fn read_checkpoint(path: &Path, mode: SweepMode) -> Result<Option<Checkpoint>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let cp: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::Checkpoint {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    if cp.mode != mode {
        return Err(Error::Checkpoint {
            path: path.to_path_buf(),
            reason: format!("checkpoint mode {:?}, run mode {mode:?}", cp.mode),
        });
    }
    Ok(Some(cp))
}

fn write_checkpoint(path: &Path, cp: &Checkpoint) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        serde_json::to_writer(&mut f, cp)?;
        f.flush()?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs the sweep over `2 ..= max_n`, handing records to `sink` in
/// increasing `n`. With a checkpoint path, earlier progress is replayed
/// first and progress is saved after every block.
pub fn sweep<F>(config: &SweepConfig, mut sink: F) -> Result<SweepSummary>
where
    F: FnMut(&SweepRecord) -> Result<()>,
{
    if config.max_n < 2 {
        return Err(Error::Parameter(format!("max_n must be >= 2, got {}", config.max_n)));
    }
    if config.block == 0 {
        return Err(Error::Parameter("block size must be positive".into()));
    }
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    let is_prime = sieve(config.max_n);

    let mut summary = SweepSummary {
        max_n: config.max_n,
        mode: config.mode,
        qualifying: 0,
        missing_witnesses: Vec::new(),
        counterexample: false,
        prime_heuristic_failures: Vec::new(),
        min_count: None,
        max_count: None,
        resumed_records: 0,
        elapsed_ms: 0,
    };
    let absorb = |summary: &mut SweepSummary, rec: &SweepRecord| {
        summary.qualifying += 1;
        if rec.witness_eps.is_none() {
            summary.missing_witnesses.push(rec.n);
        }
        if rec.prime_witness_eps.is_none() {
            summary.prime_heuristic_failures.push(rec.n);
        }
        if let Some(c) = rec.eps_count {
            summary.min_count = Some(summary.min_count.map_or(c, |m| m.min(c)));
            summary.max_count = Some(summary.max_count.map_or(c, |m| m.max(c)));
        }
    };

    let mut checkpoint = Checkpoint { mode: config.mode, next_n: 2, records: Vec::new() };
    if let Some(path) = &config.checkpoint {
        if let Some(cp) = read_checkpoint(path, config.mode)? {
            checkpoint = cp;
        }
    }
    for rec in checkpoint.records.iter().filter(|r| r.n <= config.max_n) {
        sink(rec)?;
        absorb(&mut summary, rec);
        summary.resumed_records += 1;
    }

    let mut lo = checkpoint.next_n;
    while lo <= config.max_n {
        let hi = lo.saturating_add(config.block - 1).min(config.max_n);
        let domain: Vec<u64> = (lo..=hi)
            .filter(|&n| n % 2 == 0)
            .filter_map(|n| qualifies(n).map(|q| q.then_some(n)).transpose())
            .collect::<Result<_>>()?;
        let records: Vec<SweepRecord> = pool.install(|| {
            domain.par_iter().map(|&n| scan(n, config.mode, &is_prime)).collect::<Result<_>>()
        })?;
        for rec in &records {
            sink(rec)?;
            absorb(&mut summary, rec);
        }
        lo = hi + 1;
        if let Some(path) = &config.checkpoint {
            checkpoint.records.extend(records);
            checkpoint.next_n = lo;
            write_checkpoint(path, &checkpoint)?;
        }
    }

    summary.counterexample = !summary.missing_witnesses.is_empty();
    summary.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(summary)
}

/// Collects all records into memory.
pub fn sweep_collect(config: &SweepConfig) -> Result<(Vec<SweepRecord>, SweepSummary)> {
    let mut out = Vec::new();
    let summary = sweep(config, |r| {
        out.push(r.clone());
        Ok(())
    })?;
    Ok((out, summary))
}

fn sieve(bound: u64) -> Vec<bool> {
    let mut is_prime = vec![false; bound as usize + 1];
    for p in numtheory::primes_up_to(bound) {
        is_prime[p as usize] = true;
    }
    is_prime
}
