//! Simulated-annealing sampler over QUBO assignments, the exhaustive
//! feasible-space oracle, and run statistics across numbers of reads.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::Finger;
use crate::error::{Error, Result};
use crate::qubo::{decode, objective, Assignment, QuboMatrix};

/// Annealing parameters. One "read" is an independent restart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SaParams {
    pub num_reads: usize,
    pub sweeps_per_read: usize,
    pub beta_initial: f64,
    pub beta_final: f64,
    pub seed: u64,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            num_reads: 1000,
            sweeps_per_read: 1000,
            beta_initial: 0.1,
            beta_final: 10.0,
            seed: 0,
        }
    }
}

impl SaParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_reads < 1 {
            return Err(Error::InvalidInput("num_reads must be at least 1".into()));
        }
        if self.sweeps_per_read < 1 {
            return Err(Error::InvalidInput(
                "sweeps_per_read must be at least 1".into(),
            ));
        }
        if !(self.beta_initial > 0.0 && self.beta_final > self.beta_initial) {
            return Err(Error::InvalidInput(format!(
                "need 0 < beta_initial < beta_final, got {} and {}",
                self.beta_initial, self.beta_final
            )));
        }
        Ok(())
    }
}

/// A distinct sampled assignment with its objective and read count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub assignment: String,
    pub objective: f64,
    pub frequency: usize,
    pub one_hot_ok: bool,
    pub pairwise_ok: bool,
}

impl SampleResult {
    pub fn feasible(&self) -> bool {
        self.one_hot_ok && self.pairwise_ok
    }
}

/// Aggregated outcome of one annealing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Distinct final assignments sorted by objective ascending.
    pub samples: Vec<SampleResult>,
    pub best: SampleResult,
    /// Lowest-objective sample that satisfies one-hot and compatibility.
    pub feasible_best: Option<SampleResult>,
    pub params: SaParams,
    /// Not serialized: timing would break byte-identical report files.
    #[serde(skip)]
    pub wall_time: f64,
}

/// Neighbor-list view of the QUBO for O(1) flip deltas.
struct DenseQubo {
    n: usize,
    diag: Vec<f64>,
    /// Per-variable neighbor list (q, coefficient).
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl DenseQubo {
    fn new(q: &QuboMatrix) -> Self {
        let n = q.n();
        let mut neighbors = vec![Vec::new(); n];
        for (&(p, r), &v) in &q.offdiag {
            neighbors[p].push((r, v));
            neighbors[r].push((p, v));
        }
        Self {
            n,
            diag: q.diag.clone(),
            neighbors,
        }
    }

    fn energy(&self, bits: &[u8]) -> f64 {
        let mut e = 0.0;
        for p in 0..self.n {
            if bits[p] == 1 {
                e += self.diag[p];
                for &(r, v) in &self.neighbors[p] {
                    if r > p && bits[r] == 1 {
                        e += v;
                    }
                }
            }
        }
        e
    }
}

fn geometric_schedule(beta0: f64, beta1: f64, sweeps: usize) -> Vec<f64> {
    if sweeps == 1 {
        return vec![beta1];
    }
    let ratio = (beta1 / beta0).powf(1.0 / (sweeps - 1) as f64);
    let mut beta = beta0;
    (0..sweeps)
        .map(|_| {
            let b = beta;
            beta *= ratio;
            b
        })
        .collect()
}

/// One independent read: random start, Metropolis sweeps over the geometric
/// beta schedule, local fields updated incrementally on accepted flips.
fn anneal_read(dense: &DenseQubo, schedule: &[f64], seed: u64) -> u32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = dense.n;
    let mut bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
    // h[p] = objective delta of setting bit p, given the other bits.
    let mut h = dense.diag.clone();
    for p in 0..n {
        if bits[p] == 1 {
            for &(r, v) in &dense.neighbors[p] {
                h[r] += v;
            }
        }
    }
    for &beta in schedule {
        for p in 0..n {
            let delta = if bits[p] == 0 { h[p] } else { -h[p] };
            let accept = delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp();
            if accept {
                let sign = if bits[p] == 0 { 1.0 } else { -1.0 };
                bits[p] ^= 1;
                for &(r, v) in &dense.neighbors[p] {
                    h[r] += sign * v;
                }
            }
        }
    }
    bits.iter()
        .enumerate()
        .fold(0u32, |m, (p, &b)| m | ((b as u32) << p))
}

/// Runs `num_reads` independent annealing restarts and aggregates identical
/// final assignments. Per-read seed = seed + read index, so reports are
/// reproducible and independent of thread count.
pub fn simulated_anneal(q: &QuboMatrix, p: &SaParams) -> Result<SolveReport> {
    p.validate()?;
    if q.n() > 32 {
        return Err(Error::InvalidInput(format!(
            "sampler supports up to 32 variables, matrix has {}",
            q.n()
        )));
    }
    let start = Instant::now();
    let dense = DenseQubo::new(q);
    let schedule = geometric_schedule(p.beta_initial, p.beta_final, p.sweeps_per_read);

    let masks: Vec<u32> = (0..p.num_reads)
        .into_par_iter()
        .map(|read| anneal_read(&dense, &schedule, p.seed.wrapping_add(read as u64)))
        .collect();

    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for m in masks {
        *counts.entry(m).or_insert(0) += 1;
    }

    let mut samples: Vec<SampleResult> = counts
        .into_iter()
        .map(|(mask, frequency)| {
            let a = Assignment::from_mask(mask, q.n());
            let obj = objective(q, &a).expect("dimensions agree");
            let sel = decode(&a, &q.layout);
            SampleResult {
                assignment: a.to_bitstring(),
                objective: obj,
                frequency,
                one_hot_ok: sel.one_hot_ok,
                pairwise_ok: sel.pairwise_ok,
            }
        })
        .collect();
    samples.sort_by(|a, b| {
        a.objective
            .partial_cmp(&b.objective)
            .unwrap()
            .then_with(|| a.assignment.cmp(&b.assignment))
    });

    let best = samples[0].clone();
    let feasible_best = samples.iter().find(|s| s.feasible()).cloned();
    Ok(SolveReport {
        samples,
        best,
        feasible_best,
        params: *p,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Outcome of the exhaustive enumeration over one-hot assignments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub best_assignment: String,
    pub best_objective: f64,
    pub feasible_count: usize,
    pub one_hot_count: usize,
}

/// Enumerates every one-hot assignment, returning the minimum objective over
/// the compatibility-feasible ones. Ties break to the lexicographically
/// smallest bit vector.
pub fn exhaustive_feasible_min(q: &QuboMatrix) -> Result<OracleReport> {
    let layout = &q.layout;
    let groups: Vec<std::ops::Range<usize>> =
        Finger::ALL.iter().map(|&f| layout.group_range(f)).collect();
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::InvalidInput("layout has an empty family".into()));
    }
    let mut one_hot_count = 0usize;
    let mut feasible_count = 0usize;
    let mut best: Option<(f64, Assignment)> = None;

    let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    let total: usize = sizes.iter().product();
    let mut picks = vec![0usize; groups.len()];
    for mut idx in 0..total {
        for (k, &size) in sizes.iter().enumerate().rev() {
            picks[k] = groups[k].start + idx % size;
            idx /= size;
        }
        one_hot_count += 1;
        let ring_variant = layout.variant_of(picks[3]);
        let little_variant = layout.variant_of(picks[4]);
        if !crate::catalog::compatibility(ring_variant, little_variant)? {
            continue;
        }
        feasible_count += 1;
        let mut obj = 0.0;
        for (a, &p) in picks.iter().enumerate() {
            obj += q.diag[p];
            for &r in &picks[a + 1..] {
                let (lo, hi) = if p < r { (p, r) } else { (r, p) };
                if let Some(v) = q.offdiag.get(&(lo, hi)) {
                    obj += v;
                }
            }
        }
        let mut a = Assignment::zeros(q.n());
        for &p in &picks {
            a.set(p, 1);
        }
        let better = match &best {
            None => true,
            Some((b_obj, b_a)) => obj < *b_obj || (obj == *b_obj && a.bits() < b_a.bits()),
        };
        if better {
            best = Some((obj, a));
        }
    }
    let (best_objective, best_assignment) = best.expect("at least one feasible assignment");
    Ok(OracleReport {
        best_assignment: best_assignment.to_bitstring(),
        best_objective,
        feasible_count,
        one_hot_count,
    })
}

/// Per-run results for one number-of-reads setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub nor: usize,
    pub run: usize,
    pub best_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSummary {
    pub nor: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandTable {
    pub rows: Vec<BandRow>,
    pub summary: Vec<BandSummary>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Repeated annealing runs per number-of-reads value; reports min/max/mean
/// and band width of the per-run best objectives.
pub fn band_statistics(
    q: &QuboMatrix,
    nor_list: &[usize],
    runs_per_nor: usize,
    base_seed: u64,
) -> Result<BandTable> {
    if nor_list.is_empty() {
        return Err(Error::InvalidInput("empty NoR list".into()));
    }
    if runs_per_nor < 1 {
        return Err(Error::InvalidInput("runs_per_nor must be at least 1".into()));
    }
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (ni, &nor) in nor_list.iter().enumerate() {
        let mut bests = Vec::with_capacity(runs_per_nor);
        for run in 0..runs_per_nor {
            let params = SaParams {
                num_reads: nor,
                seed: splitmix64(base_seed ^ ((ni * runs_per_nor + run) as u64)),
                ..SaParams::default()
            };
            let report = simulated_anneal(q, &params)?;
            bests.push(report.best.objective);
            rows.push(BandRow {
                nor,
                run,
                best_objective: report.best.objective,
            });
        }
        let min = bests.iter().copied().fold(f64::INFINITY, f64::min);
        let max = bests.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = bests.iter().sum::<f64>() / bests.len() as f64;
        summary.push(BandSummary {
            nor,
            min,
            max,
            mean,
            width: max - min,
        });
    }
    Ok(BandTable { rows, summary })
}

impl BandTable {
    /// CSV rows `nor,run,best_objective`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "nor,run,best_objective")?;
        for r in &self.rows {
            writeln!(w, "{},{},{:?}", r.nor, r.run, r.best_objective)?;
        }
        Ok(())
    }
}

/// Empirical check that no constraint-violating assignment undercuts the
/// feasible minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub trials: usize,
    pub lowest_infeasible: f64,
    pub lowest_assignment: String,
    pub undercuts_feasible_min: bool,
}

/// Samples random infeasible assignments plus greedy single-flip descents
/// started from the feasible minimizer, tracking the lowest infeasible
/// objective seen.
pub fn infeasible_dominance_check(
    q: &QuboMatrix,
    feasible_min: f64,
    trials: usize,
    seed: u64,
) -> Result<DominanceReport> {
    if trials < 1 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let n = q.n();
    let dense = DenseQubo::new(q);
    let is_feasible = |mask: u32| {
        let a = Assignment::from_mask(mask, n);
        let sel = decode(&a, &q.layout);
        sel.one_hot_ok && sel.pairwise_ok
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lowest = f64::INFINITY;
    let mut lowest_mask = 0u32;
    let consider = |mask: u32, e: f64, lowest: &mut f64, lowest_mask: &mut u32| {
        if e < *lowest {
            *lowest = e;
            *lowest_mask = mask;
        }
    };

    let mask_bits = |mask: u32| -> Vec<u8> { (0..n).map(|p| ((mask >> p) & 1) as u8).collect() };

    for _ in 0..trials {
        let mask: u32 = rng.random::<u32>() & ((1u32 << n) - 1);
        if is_feasible(mask) {
            continue;
        }
        let e = dense.energy(&mask_bits(mask));
        consider(mask, e, &mut lowest, &mut lowest_mask);
    }

    // Greedy descents from single flips off the feasible minimizer, staying
    // within the infeasible region.
    let oracle = exhaustive_feasible_min(q)?;
    let base = Assignment::from_bitstring(&oracle.best_assignment)?;
    for flip in 0..n {
        let mut bits = base.bits().to_vec();
        bits[flip] ^= 1;
        let mut mask = bits
            .iter()
            .enumerate()
            .fold(0u32, |m, (p, &b)| m | ((b as u32) << p));
        if is_feasible(mask) {
            continue;
        }
        let mut e = dense.energy(&bits);
        consider(mask, e, &mut lowest, &mut lowest_mask);
        loop {
            let mut improved = false;
            for p in 0..n {
                let mut cand = bits.clone();
                cand[p] ^= 1;
                let cand_mask = cand
                    .iter()
                    .enumerate()
                    .fold(0u32, |m, (r, &b)| m | ((b as u32) << r));
                if is_feasible(cand_mask) {
                    continue;
                }
                let ce = dense.energy(&cand);
                if ce < e {
                    bits = cand;
                    mask = cand_mask;
                    e = ce;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        consider(mask, e, &mut lowest, &mut lowest_mask);
    }

    Ok(DominanceReport {
        trials,
        lowest_infeasible: lowest,
        lowest_assignment: Assignment::from_mask(lowest_mask, n).to_bitstring(),
        undercuts_feasible_min: lowest < feasible_min,
    })
}
