//! QUBO solvers: exhaustive enumeration, bucket elimination, simulated
//! annealing and an HTTP adapter for a remote annealer.

use std::cmp::Ordering;
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qubo::QuboMatrix;

pub mod elimination;
#[cfg(feature = "remote")]
pub mod remote;

pub use elimination::{elimination_order, solve_by_elimination};
#[cfg(feature = "remote")]
pub use remote::{remote_submit, RemoteEndpoint};

pub const DEFAULT_EXACT_LIMIT: usize = 24;
pub const DEFAULT_SWEEPS: usize = 1000;
pub const DEFAULT_READS: usize = 100;

/// How often the Gray-code walk recomputes its running energy from scratch.
const RESYNC_INTERVAL: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Annealing,
    Remote,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::Annealing => "sa",
            Backend::Remote => "remote",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealSchedule {
    pub sweeps: usize,
    pub beta_initial: f64,
    pub beta_final: f64,
    pub reads: usize,
    pub seed: u64,
}

impl AnnealSchedule {
    pub fn new(sweeps: usize, beta_initial: f64, beta_final: f64, reads: usize, seed: u64) -> Result<Self> {
        let s = Self {
            sweeps,
            beta_initial,
            beta_final,
            reads,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    /// Schedule with the inverse-temperature range derived from `q`: the
    /// hottest sweep accepts the largest possible uphill flip with
    /// probability 1/2, the coldest accepts the smallest non-zero one with
    /// probability 1/100.
    pub fn for_qubo(q: &QuboMatrix, sweeps: usize, reads: usize, seed: u64) -> Result<Self> {
        let (beta_initial, beta_final) = default_beta_range(q);
        Self::new(sweeps, beta_initial, beta_final, reads, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 || self.reads == 0 {
            return Err(Error::Validation("sweeps and reads must be at least 1".into()));
        }
        if !(self.beta_initial > 0.0 && self.beta_initial.is_finite()) {
            return Err(Error::Validation(format!(
                "beta_initial {} must be positive",
                self.beta_initial
            )));
        }
        if !(self.beta_final >= self.beta_initial && self.beta_final.is_finite()) {
            return Err(Error::Validation(format!(
                "beta_final {} must be finite and at least beta_initial {}",
                self.beta_final, self.beta_initial
            )));
        }
        Ok(())
    }

    pub fn beta(&self, sweep: usize) -> f64 {
        if self.sweeps == 1 {
            return self.beta_initial;
        }
        let t = sweep as f64 / (self.sweeps - 1) as f64;
        self.beta_initial * (self.beta_final / self.beta_initial).powf(t)
    }
}

pub const DEFAULT_BETA_INITIAL: f64 = 0.1;

/// `(0.1, 10 * max |Q_ij|)`, with the cold end never below the hot one.
pub fn default_beta_range(q: &QuboMatrix) -> (f64, f64) {
    let cold = 10.0 * q.max_abs_coefficient();
    (DEFAULT_BETA_INITIAL, cold.max(DEFAULT_BETA_INITIAL))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub bits: Vec<bool>,
    pub energy: f64,
    pub occurrences: usize,
}

impl Sample {
    /// Orders by energy, then lexicographically by bitstring.
    pub fn rank(&self, other: &Self) -> Ordering {
        self.energy
            .total_cmp(&other.energy)
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleResult {
    /// Distinct samples, best first.
    pub samples: Vec<Sample>,
    pub backend: Backend,
    pub wall_time: f64,
}

impl SampleResult {
    /// Groups equal bitstrings, recomputes every energy from `q` and sorts.
    pub fn from_reads(q: &QuboMatrix, reads: Vec<Vec<bool>>, backend: Backend, started: Instant) -> Result<Self> {
        let mut reads = reads;
        reads.sort_unstable();
        let mut samples: Vec<Sample> = Vec::new();
        for bits in reads {
            match samples.last_mut() {
                Some(last) if last.bits == bits => last.occurrences += 1,
                _ => {
                    let energy = q.energy(&bits)?;
                    samples.push(Sample {
                        bits,
                        energy,
                        occurrences: 1,
                    });
                }
            }
        }
        if samples.is_empty() {
            return Err(Error::Validation("no samples".into()));
        }
        samples.sort_by(Sample::rank);
        Ok(Self {
            samples,
            backend,
            wall_time: started.elapsed().as_secs_f64(),
        })
    }

    pub fn best(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn total_reads(&self) -> usize {
        self.samples.iter().map(|s| s.occurrences).sum()
    }
}

/// Symmetric sparse neighbourhood of a QUBO: `diag[i] = Q_ii` and
/// `(j, Q_ij)` pairs for every off-diagonal coupling of `i`.
struct Couplings {
    diag: Vec<f64>,
    start: Vec<usize>,
    adj: Vec<(usize, f64)>,
}

impl Couplings {
    fn new(q: &QuboMatrix) -> Self {
        let n = q.size();
        let mut diag = vec![0.0; n];
        let mut lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, j, v) in q.entries() {
            if i == j {
                diag[i] += v;
            } else {
                lists[i].push((j, v));
                lists[j].push((i, v));
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut adj = Vec::new();
        start.push(0);
        for l in lists {
            adj.extend(l);
            start.push(adj.len());
        }
        Self { diag, start, adj }
    }

    #[inline]
    fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[self.start[i]..self.start[i + 1]]
    }

    /// `field[i] = sum_j Q_ij x_j` over off-diagonal neighbours.
    fn fields(&self, x: &[bool]) -> Vec<f64> {
        (0..self.diag.len())
            .map(|i| {
                self.neighbors(i)
                    .iter()
                    .filter(|(j, _)| x[*j])
                    .map(|(_, v)| v)
                    .sum()
            })
            .collect()
    }

    /// Energy change from flipping bit `i`.
    #[inline]
    fn delta(&self, x: &[bool], field: &[f64], i: usize) -> f64 {
        let d = self.diag[i] + field[i];
        if x[i] {
            -d
        } else {
            d
        }
    }

    #[inline]
    fn flip(&self, x: &mut [bool], field: &mut [f64], i: usize) {
        let sign = if x[i] { -1.0 } else { 1.0 };
        x[i] = !x[i];
        for &(j, v) in self.neighbors(i) {
            field[j] += sign * v;
        }
    }
}

pub fn solve_exact(q: &QuboMatrix) -> Result<SampleResult> {
    solve_exact_limited(q, DEFAULT_EXACT_LIMIT)
}

/// Walks all `2^S` bitstrings in Gray-code order. Ties within a relative
/// `1e-12` go to the lexicographically smallest bitstring.
pub fn solve_exact_limited(q: &QuboMatrix, limit: usize) -> Result<SampleResult> {
    let started = Instant::now();
    let n = q.size();
    if n > limit {
        return Err(Error::Capacity {
            what: "exact solver variables",
            required: n,
            limit,
        });
    }
    let c = Couplings::new(q);
    let mut x = vec![false; n];
    let mut field = vec![0.0; n];
    let mut energy = q.offset;
    let mut best = x.clone();
    let mut best_energy = energy;
    let tie = 1e-12 * (1.0 + q.max_abs_coefficient());
    let total: u64 = 1 << n;
    for step in 1..total {
        let i = step.trailing_zeros() as usize;
        energy += c.delta(&x, &field, i);
        c.flip(&mut x, &mut field, i);
        if step % RESYNC_INTERVAL == 0 {
            energy = q.energy(&x)?;
        }
        if energy < best_energy - tie || (energy <= best_energy + tie && x < best) {
            best.copy_from_slice(&x);
            best_energy = energy.min(best_energy);
        }
    }
    SampleResult::from_reads(q, vec![best], Backend::Exact, started)
}

pub fn simulated_annealing(q: &QuboMatrix, sched: &AnnealSchedule) -> Result<SampleResult> {
    sched.validate()?;
    let started = Instant::now();
    let c = Couplings::new(q);
    let betas: Vec<f64> = (0..sched.sweeps).map(|k| sched.beta(k)).collect();
    let reads: Vec<Vec<bool>> = (0..sched.reads)
        .into_par_iter()
        .map(|r| anneal_once(&c, &betas, sched.seed, r as u64))
        .collect();
    SampleResult::from_reads(q, reads, Backend::Annealing, started)
}

fn anneal_once(c: &Couplings, betas: &[f64], seed: u64, read: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(read);
    let n = c.diag.len();
    let mut x: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let mut field = c.fields(&x);
    for &beta in betas {
        for i in 0..n {
            let d = c.delta(&x, &field, i);
            if d <= 0.0 || rng.random::<f64>() < (-beta * d).exp() {
                c.flip(&mut x, &mut field, i);
            }
        }
    }
    x
}
