//! Seeded end-to-end sweeps: sample users, presolve, anneal what is left,
//! merge, verify, and compare against Best Fit.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ais::{load_ais_csv, BoundingBox};
use super::synth::{synthesize_users, SynthParams};
use crate::baseline::{best_fit, input_order, shuffled_order};
use crate::error::{Error, Result};
use crate::geometry::{build_proximity_graph, GeoPoint, SatelliteGeometry, User, UserSet};
use crate::presolve::{build_reduced_hamiltonian, presolve_with, PresolveOptions, PresolveState};
use crate::qubo::{qubit_count, BeamSolution, ProblemInstance};
use crate::sampler::{self, AnnealSchedule, SampleResult};

/// Slack allowed when comparing objectives with the LP bound.
pub const BOUND_TOL: f64 = 1e-6;

pub const RECORDS_FILE: &str = "records.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const SUMMARY_FILE: &str = "summary.json";

const RECORDS_NOTE: &str = "# reduction_ratio = 1 - qubits_reduced/qubits_full; \
realizations solved by presolve alone report qubits_reduced = 0 and reduction_ratio = 1";

/// Satellite position used by the bundled Gulf of Mexico setup.
pub fn default_satellite() -> GeoPoint {
    GeoPoint {
        latitude: 26.812309,
        longitude: -85.386382,
        altitude: 1110.0,
    }
}

/// Gulf of Mexico box `-98,18,-80,31`. The box is a local choice, not a
/// published one.
pub fn gulf_of_mexico() -> BoundingBox {
    BoundingBox {
        west: -98.0,
        south: 18.0,
        east: -80.0,
        north: 31.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Exact,
    Sa,
    Remote,
}

impl FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "sa" => Ok(Self::Sa),
            "remote" => Ok(Self::Remote),
            _ => Err(Error::Validation(format!(
                "unknown backend {s:?}, expected exact, sa or remote"
            ))),
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Sa => "sa",
            Self::Remote => "remote",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub sweeps: usize,
    pub reads: usize,
    /// Overrides for the derived inverse-temperature range.
    pub beta_initial: Option<f64>,
    pub beta_final: Option<f64>,
    pub exact_limit: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Sa,
            sweeps: sampler::DEFAULT_SWEEPS,
            reads: sampler::DEFAULT_READS,
            beta_initial: None,
            beta_final: None,
            exact_limit: sampler::DEFAULT_EXACT_LIMIT,
        }
    }
}

impl BackendConfig {
    pub fn run(&self, q: &crate::qubo::QuboMatrix, seed: u64) -> Result<SampleResult> {
        match self.kind {
            BackendKind::Exact => sampler::solve_exact_limited(q, self.exact_limit),
            BackendKind::Sa => {
                let (hot, cold) = sampler::default_beta_range(q);
                let bi = self.beta_initial.unwrap_or(hot);
                let bf = self.beta_final.unwrap_or(cold.max(bi));
                let sched = AnnealSchedule::new(self.sweeps, bi, bf, self.reads, seed)?;
                sampler::simulated_annealing(q, &sched)
            }
            BackendKind::Remote => remote(q, self.reads),
        }
    }
}

#[cfg(feature = "remote")]
fn remote(q: &crate::qubo::QuboMatrix, reads: usize) -> Result<SampleResult> {
    let mut ep = sampler::RemoteEndpoint::from_env()?;
    ep.num_reads = reads;
    sampler::remote_submit(q, &ep)
}

#[cfg(not(feature = "remote"))]
fn remote(_: &crate::qubo::QuboMatrix, _: usize) -> Result<SampleResult> {
    Err(Error::Validation("built without the remote backend".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Dataset {
    Synthetic(SynthParams),
    Ais { path: PathBuf, bbox: BoundingBox },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub user_counts: Vec<usize>,
    pub realizations: usize,
    pub satellite: GeoPoint,
    pub alpha_deg: f64,
    pub capacity: usize,
    /// Beam budget; `None` gives every realization one beam per user.
    pub beams: Option<usize>,
    pub backend: BackendConfig,
    pub dataset: Dataset,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub allow_active_beam_join: bool,
    pub lambda: Option<f64>,
    /// Shuffle the Best Fit user order with this seed instead of using input order.
    pub shuffle_seed: Option<u64>,
    pub max_free_variables: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            user_counts: vec![25, 50, 100],
            realizations: 10,
            satellite: default_satellite(),
            alpha_deg: 5.0,
            capacity: 20,
            beams: None,
            backend: BackendConfig::default(),
            dataset: Dataset::Synthetic(SynthParams {
                clusters: 10,
                spread_deg: 0.2,
                bbox: gulf_of_mexico(),
            }),
            seed: 0,
            threads: None,
            allow_active_beam_join: false,
            lambda: None,
            shuffle_seed: None,
            max_free_variables: PresolveOptions::default().max_free_variables,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::Validation("realizations must be at least 1".into()));
        }
        if self.user_counts.is_empty() || self.user_counts.contains(&0) {
            return Err(Error::Validation("user counts must be non-empty and positive".into()));
        }
        if self.capacity == 0 || self.beams == Some(0) {
            return Err(Error::Validation("capacity and beam budget must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Validation("threads must be at least 1".into()));
        }
        if self.backend.sweeps == 0 || self.backend.reads == 0 {
            return Err(Error::Validation("sweeps and reads must be at least 1".into()));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Validation(format!("lambda {l} must be positive")));
            }
        }
        self.geometry()?;
        match &self.dataset {
            Dataset::Synthetic(p) => p.validate(),
            Dataset::Ais { bbox, .. } => bbox.validate(),
        }
    }

    pub fn geometry(&self) -> Result<SatelliteGeometry> {
        SatelliteGeometry::from_degrees(self.satellite, self.alpha_deg)
    }

    pub fn presolve_options(&self) -> PresolveOptions {
        PresolveOptions {
            allow_active_beam_join: self.allow_active_beam_join,
            lambda: self.lambda,
            max_free_variables: self.max_free_variables,
            ..Default::default()
        }
    }
}

/// Counter-based seed split: the `k`-th child of `master`.
pub fn split_seed(master: u64, k: u64) -> u64 {
    let mut z = master ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolvedBy {
    PresolveOnly,
    Annealer,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationRecord {
    pub index: usize,
    pub users: usize,
    pub realization: usize,
    pub seed: u64,
    pub beams: usize,
    pub edges: usize,
    pub qubits_full: usize,
    pub qubits_reduced: Option<usize>,
    pub reduction_ratio: Option<f64>,
    pub solved_by: SolvedBy,
    pub feasible: bool,
    pub violations: usize,
    pub objective_qa: Option<usize>,
    pub objective_best_fit: Option<usize>,
    pub best_fit_feasible: bool,
    pub lp_lower_bound: Option<f64>,
    pub independent_set: Option<usize>,
    pub unassigned_after_presolve: Option<usize>,
    /// Feasible, but Best Fit found fewer beams.
    pub qa_above_best_fit: bool,
    /// A feasible objective below the LP bound; should never happen.
    pub below_lp_bound: bool,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    pub index: usize,
    pub presolve_s: f64,
    pub anneal_s: f64,
    pub total_s: f64,
}

/// Everything the pipeline learns about one instance.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub state: PresolveState,
    pub qubits_full: usize,
    /// `None` when presolve placed every user.
    pub qubits_reduced: Option<usize>,
    pub sample: Option<SampleResult>,
    pub solution: BeamSolution,
    pub presolve_s: f64,
    pub anneal_s: f64,
}

impl PipelineOutcome {
    pub fn reduction_ratio(&self) -> f64 {
        1.0 - self.qubits_reduced.unwrap_or(0) as f64 / self.qubits_full as f64
    }
}

/// Presolve, anneal the reduced Hamiltonian if anything is left, merge.
pub fn solve_instance(
    inst: &ProblemInstance,
    options: &PresolveOptions,
    backend: &BackendConfig,
    seed: u64,
) -> Result<PipelineOutcome> {
    let t0 = Instant::now();
    let state = presolve_with(inst, options)?;
    let presolve_s = t0.elapsed().as_secs_f64();
    let qubits_full = qubit_count(inst.users(), inst.beams, inst.capacity);
    if state.is_complete() {
        let solution = state.solution(inst)?;
        return Ok(PipelineOutcome {
            state,
            qubits_full,
            qubits_reduced: None,
            sample: None,
            solution,
            presolve_s,
            anneal_s: 0.0,
        });
    }
    let rh = build_reduced_hamiltonian(&state, inst, options)?;
    let t1 = Instant::now();
    let sample = backend.run(&rh.qubo, seed)?;
    let anneal_s = t1.elapsed().as_secs_f64();
    let solution = rh.merge(inst, &sample.best().bits)?;
    Ok(PipelineOutcome {
        state,
        qubits_full,
        qubits_reduced: Some(rh.size()),
        sample: Some(sample),
        solution,
        presolve_s,
        anneal_s,
    })
}

enum UserSource {
    Synthetic(SynthParams),
    Pool(Vec<User>),
}

impl UserSource {
    fn draw(&self, n: usize, seed: u64) -> Result<UserSet> {
        match self {
            Self::Synthetic(p) => synthesize_users(n, p, seed),
            Self::Pool(pool) => {
                if n > pool.len() {
                    return Err(Error::Capacity {
                        what: "vessels in the bounding box",
                        required: n,
                        limit: pool.len(),
                    });
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let idx = rand::seq::index::sample(&mut rng, pool.len(), n);
                UserSet::new(idx.into_iter().map(|k| pool[k].clone()).collect())
            }
        }
    }
}

/// Draws `n` users the way a realization does: synthetic users for `seed`,
/// or a seeded sample without replacement from the vessels in the box.
pub fn draw_users(dataset: &Dataset, n: usize, seed: u64) -> Result<UserSet> {
    let source = match dataset {
        Dataset::Synthetic(p) => UserSource::Synthetic(*p),
        Dataset::Ais { path, bbox } => UserSource::Pool(load_ais_csv(path, bbox)?.users.users),
    };
    source.draw(n, seed)
}

struct Job {
    index: usize,
    users: usize,
    realization: usize,
    seed: u64,
}

fn run_realization(cfg: &ExperimentConfig, geom: &SatelliteGeometry, source: &UserSource, job: &Job) -> (RealizationRecord, Timing) {
    let started = Instant::now();
    let beams = cfg.beams.unwrap_or(job.users);
    let mut rec = RealizationRecord {
        index: job.index,
        users: job.users,
        realization: job.realization,
        seed: job.seed,
        beams,
        edges: 0,
        qubits_full: qubit_count(job.users, beams, cfg.capacity),
        qubits_reduced: None,
        reduction_ratio: None,
        solved_by: SolvedBy::Failed,
        feasible: false,
        violations: 0,
        objective_qa: None,
        objective_best_fit: None,
        best_fit_feasible: false,
        lp_lower_bound: None,
        independent_set: None,
        unassigned_after_presolve: None,
        qa_above_best_fit: false,
        below_lp_bound: false,
        error: String::new(),
    };
    let mut timing = Timing {
        index: job.index,
        presolve_s: 0.0,
        anneal_s: 0.0,
        total_s: 0.0,
    };
    if let Err(e) = fill_record(cfg, geom, source, job, &mut rec, &mut timing) {
        rec.solved_by = SolvedBy::Failed;
        rec.feasible = false;
        rec.error = e.to_string();
    }
    timing.total_s = started.elapsed().as_secs_f64();
    (rec, timing)
}

fn fill_record(
    cfg: &ExperimentConfig,
    geom: &SatelliteGeometry,
    source: &UserSource,
    job: &Job,
    rec: &mut RealizationRecord,
    timing: &mut Timing,
) -> Result<()> {
    let users = source.draw(job.users, split_seed(job.seed, 0))?;
    let graph = build_proximity_graph(&users, geom)?;
    rec.edges = graph.edge_count();
    let inst = ProblemInstance::new(graph, rec.beams, cfg.capacity)?;

    let order = match cfg.shuffle_seed {
        Some(s) => shuffled_order(job.users, split_seed(s, job.index as u64)),
        None => input_order(job.users),
    };
    match best_fit(&inst, &order) {
        Ok(bf) => {
            rec.objective_best_fit = Some(bf.objective);
            rec.best_fit_feasible = bf.is_feasible();
        }
        Err(e) => rec.error = format!("best fit: {e}"),
    }

    let options = cfg.presolve_options();
    let t0 = Instant::now();
    let state = presolve_with(&inst, &options)?;
    timing.presolve_s = t0.elapsed().as_secs_f64();
    let lp = state.lp_lower_bound;
    rec.lp_lower_bound = Some(lp);
    rec.independent_set = Some(state.independent_set.len());
    rec.unassigned_after_presolve = Some(state.unassigned.len());

    let solution = if state.is_complete() {
        rec.qubits_reduced = Some(0);
        rec.reduction_ratio = Some(1.0);
        rec.solved_by = SolvedBy::PresolveOnly;
        state.solution(&inst)?
    } else {
        let rh = build_reduced_hamiltonian(&state, &inst, &options)?;
        rec.qubits_reduced = Some(rh.size());
        rec.reduction_ratio = Some(1.0 - rh.size() as f64 / rec.qubits_full as f64);
        let t1 = Instant::now();
        let sample = cfg.backend.run(&rh.qubo, split_seed(job.seed, 1))?;
        timing.anneal_s = t1.elapsed().as_secs_f64();
        rec.solved_by = SolvedBy::Annealer;
        rh.merge(&inst, &sample.best().bits)?
    };
    rec.feasible = solution.is_feasible();
    rec.violations = solution.violations.len();
    rec.objective_qa = Some(solution.objective);

    let below = |v: usize| (v as f64) < lp - BOUND_TOL;
    rec.below_lp_bound = (rec.feasible && below(solution.objective))
        || (rec.best_fit_feasible && rec.objective_best_fit.is_some_and(below));
    rec.qa_above_best_fit = rec.feasible
        && rec.best_fit_feasible
        && rec.objective_best_fit.is_some_and(|bf| solution.objective > bf);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data (the common "type 7").
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    /// `None` for the total over all user counts.
    pub users: Option<usize>,
    pub realizations: usize,
    pub feasible: usize,
    pub success_probability: f64,
    pub presolve_only: usize,
    pub annealer: usize,
    pub failed: usize,
    pub reduction_ratio: Option<Quantiles>,
    pub qa_better_than_best_fit: usize,
    pub qa_equal_to_best_fit: usize,
    pub qa_worse_than_best_fit: usize,
    pub best_fit_feasible: usize,
    pub below_lp_bound: usize,
    pub mean_objective_qa: Option<f64>,
    pub mean_objective_best_fit: Option<f64>,
    pub mean_lp_lower_bound: Option<f64>,
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl GroupSummary {
    pub fn of(users: Option<usize>, records: &[&RealizationRecord]) -> Self {
        let count = |f: &dyn Fn(&RealizationRecord) -> bool| records.iter().filter(|r| f(r)).count();
        let feasible = count(&|r| r.feasible);
        let ratios: Vec<f64> = records.iter().filter_map(|r| r.reduction_ratio).collect();
        let comparable: Vec<(usize, usize)> = records
            .iter()
            .filter(|r| r.feasible && r.best_fit_feasible)
            .filter_map(|r| Some((r.objective_qa?, r.objective_best_fit?)))
            .collect();
        Self {
            users,
            realizations: records.len(),
            feasible,
            success_probability: if records.is_empty() {
                0.0
            } else {
                feasible as f64 / records.len() as f64
            },
            presolve_only: count(&|r| r.solved_by == SolvedBy::PresolveOnly),
            annealer: count(&|r| r.solved_by == SolvedBy::Annealer),
            failed: count(&|r| r.solved_by == SolvedBy::Failed),
            reduction_ratio: Quantiles::of(&ratios),
            qa_better_than_best_fit: comparable.iter().filter(|(q, b)| q < b).count(),
            qa_equal_to_best_fit: comparable.iter().filter(|(q, b)| q == b).count(),
            qa_worse_than_best_fit: comparable.iter().filter(|(q, b)| q > b).count(),
            best_fit_feasible: count(&|r| r.best_fit_feasible),
            below_lp_bound: count(&|r| r.below_lp_bound),
            mean_objective_qa: mean(
                records
                    .iter()
                    .filter(|r| r.feasible)
                    .filter_map(|r| r.objective_qa.map(|v| v as f64)),
            ),
            mean_objective_best_fit: mean(records.iter().filter_map(|r| r.objective_best_fit.map(|v| v as f64))),
            mean_lp_lower_bound: mean(records.iter().filter_map(|r| r.lp_lower_bound)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: GroupSummary,
    pub by_users: Vec<GroupSummary>,
}

impl Summary {
    pub fn of(records: &[RealizationRecord]) -> Self {
        let all: Vec<&RealizationRecord> = records.iter().collect();
        let mut counts: Vec<usize> = records.iter().map(|r| r.users).collect();
        counts.sort_unstable();
        counts.dedup();
        let by_users = counts
            .into_iter()
            .map(|n| {
                let group: Vec<&RealizationRecord> = records.iter().filter(|r| r.users == n).collect();
                GroupSummary::of(Some(n), &group)
            })
            .collect();
        Self {
            total: GroupSummary::of(None, &all),
            by_users,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<RealizationRecord>,
    pub timings: Vec<Timing>,
    pub summary: Summary,
    /// Rows the AIS loader could not parse.
    pub skipped_rows: usize,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let geom = cfg.geometry()?;
    let (source, skipped_rows) = match &cfg.dataset {
        Dataset::Synthetic(p) => (UserSource::Synthetic(*p), 0),
        Dataset::Ais { path, bbox } => {
            let load = load_ais_csv(path, bbox)?;
            (UserSource::Pool(load.users.users), load.skipped)
        }
    };
    let jobs: Vec<Job> = cfg
        .user_counts
        .iter()
        .flat_map(|&n| (0..cfg.realizations).map(move |r| (n, r)))
        .enumerate()
        .map(|(index, (users, realization))| Job {
            index,
            users,
            realization,
            seed: split_seed(cfg.seed, index as u64),
        })
        .collect();
    let run = |job: &Job| run_realization(cfg, &geom, &source, job);
    let results: Vec<(RealizationRecord, Timing)> = match cfg.threads {
        Some(1) => jobs.iter().map(run).collect(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?
            .install(|| jobs.par_iter().map(run).collect()),
        None => jobs.par_iter().map(run).collect(),
    };
    let (records, timings): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let summary = Summary::of(&records);
    Ok(ExperimentOutput {
        records,
        timings,
        summary,
        skipped_rows,
    })
}

/// Records as CSV, preceded by a `#` line documenting the ratio convention.
pub fn write_records_csv<W: Write>(mut out: W, records: &[RealizationRecord]) -> Result<()> {
    writeln!(out, "{RECORDS_NOTE}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timings_csv<W: Write>(out: W, timings: &[Timing]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in timings {
        w.serialize(t)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_outputs(dir: &Path, output: &ExperimentOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_records_csv(std::fs::File::create(dir.join(RECORDS_FILE))?, &output.records)?;
    write_timings_csv(std::fs::File::create(dir.join(TIMINGS_FILE))?, &output.timings)?;
    let mut f = std::fs::File::create(dir.join(SUMMARY_FILE))?;
    serde_json::to_writer_pretty(&mut f, &output.summary)?;
    writeln!(f)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(backend: BackendKind) -> ExperimentConfig {
        ExperimentConfig {
            user_counts: vec![4],
            realizations: 3,
            backend: BackendConfig {
                kind: backend,
                sweeps: 200,
                reads: 10,
                ..Default::default()
            },
            dataset: Dataset::Synthetic(SynthParams {
                clusters: 2,
                spread_deg: 0.3,
                bbox: gulf_of_mexico(),
            }),
            seed: 5,
            threads: Some(1),
            ..Default::default()
        }
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&[7.0], 0.3), 7.0);
        assert!(Quantiles::of(&[]).is_none());
    }

    #[test]
    fn seeds_split_apart() {
        let s: Vec<u64> = (0..100).map(|k| split_seed(1, k)).collect();
        let mut d = s.clone();
        d.sort_unstable();
        d.dedup();
        assert_eq!(d.len(), 100);
        assert_ne!(split_seed(1, 0), split_seed(2, 0));
    }

    #[test]
    fn small_exact_sweep_is_feasible_and_bounded() {
        let out = run_experiment(&small(BackendKind::Exact)).unwrap();
        assert_eq!(out.records.len(), 3);
        for r in &out.records {
            assert!(r.feasible, "{r:?}");
            assert!(r.objective_qa.unwrap() as f64 >= r.lp_lower_bound.unwrap() - BOUND_TOL);
            assert!(r.objective_best_fit.unwrap() as f64 >= r.lp_lower_bound.unwrap() - BOUND_TOL);
            let ratio = 1.0 - r.qubits_reduced.unwrap() as f64 / r.qubits_full as f64;
            assert_eq!(r.reduction_ratio.unwrap(), ratio);
        }
        assert_eq!(out.summary.total.success_probability, 1.0);
    }

    #[test]
    fn same_seed_same_records() {
        let cfg = small(BackendKind::Sa);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn failures_are_recorded_not_raised() {
        let mut cfg = small(BackendKind::Exact);
        cfg.backend.exact_limit = 0;
        cfg.dataset = Dataset::Synthetic(SynthParams {
            clusters: 1,
            spread_deg: 0.8,
            bbox: gulf_of_mexico(),
        });
        cfg.user_counts = vec![8];
        // Seed 1 sends realizations 0, 15 and 30 past presolve.
        cfg.seed = 1;
        cfg.realizations = 40;
        let out = run_experiment(&cfg).unwrap();
        let failed: Vec<_> = out.records.iter().filter(|r| r.solved_by == SolvedBy::Failed).collect();
        assert_eq!(failed.len(), 3);
        assert!(failed.iter().all(|r| !r.feasible && r.error.contains("capacity")));
        assert!(failed.iter().all(|r| r.qubits_reduced.unwrap() > 0 && r.lp_lower_bound.is_some()));
        assert_eq!(
            out.summary.total.success_probability,
            out.records.iter().filter(|r| r.feasible).count() as f64 / 40.0
        );
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::default();
        cfg.realizations = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.user_counts = vec![];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.alpha_deg = 0.0;
        assert!(cfg.validate().is_err());
        assert!("annealer".parse::<BackendKind>().is_err());
        let text = serde_json::to_string(&ExperimentConfig::default()).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), ExperimentConfig::default());
        let partial = r#"{"user_counts": [5], "dataset": {"kind": "ais", "path": "x.csv", "bbox": {"west": -98, "south": 18, "east": -80, "north": 31}}}"#;
        let cfg = ExperimentConfig::from_json(partial).unwrap();
        assert_eq!(cfg.capacity, 20);
        assert!(matches!(cfg.dataset, Dataset::Ais { .. }));
    }

    #[test]
    fn csv_starts_with_the_ratio_note() {
        let out = run_experiment(&small(BackendKind::Exact)).unwrap();
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &out.records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# reduction_ratio"));
        assert!(lines.next().unwrap().starts_with("index,users,realization,seed"));
        assert_eq!(text.lines().count(), 2 + 3);
    }

    #[test]
    fn ais_pool_is_sampled_without_replacement() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ais.csv");
        let mut text = String::from("MMSI,LAT,LON\n");
        for k in 0..12 {
            text.push_str(&format!("{k},{},{}\n", 25.0 + 0.01 * k as f64, -88.0));
        }
        text.push_str("bad,row\n");
        std::fs::write(&path, text).unwrap();
        let mut cfg = small(BackendKind::Exact);
        cfg.dataset = Dataset::Ais {
            path,
            bbox: gulf_of_mexico(),
        };
        cfg.user_counts = vec![5, 20];
        cfg.realizations = 1;
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.skipped_rows, 1);
        assert_ne!(out.records[0].solved_by, SolvedBy::Failed);
        assert_eq!(out.records[1].solved_by, SolvedBy::Failed);
        assert!(out.records[1].error.contains("vessels"));
    }
}
