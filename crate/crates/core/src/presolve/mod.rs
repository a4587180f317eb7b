//! Two-step variable presolve and the reduced Hamiltonian.
//!
//! Step one pre-assigns a greedy independent set of users to distinct
//! beams; no feasible placement can put two of them together, so this never
//! costs optimality. Step two solves the linear relaxation of what is left
//! and keeps every assignment the relaxation makes integrally. The users it
//! leaves fractional are handed to an annealer through a QUBO over only the
//! still-undecided variables (see [`reduced`]).

pub mod lp;
pub mod reduced;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::greedy_independent_set;
use crate::qubo::{qubit_count, BeamSolution, ProblemInstance, VariableLayout};
use lp::{lp_solve_with, Constraint, LinearProgram, LpSolution, Relation, SimplexOptions};

pub use reduced::{build_reduced_hamiltonian, ReducedHamiltonian};

#[derive(Debug, Clone, Copy)]
pub struct PresolveOptions {
    /// How close an LP value must be to 1 to be read as 1.
    pub integrality_tol: f64,
    /// Lets unassigned users also join active beams that still have room.
    pub allow_active_beam_join: bool,
    /// Upper bound on the reduced Hamiltonian's variable count.
    pub max_free_variables: usize,
    /// Penalty weight; `None` means `B + 1`.
    pub lambda: Option<f64>,
    pub simplex: SimplexOptions,
}

impl Default for PresolveOptions {
    fn default() -> Self {
        Self {
            integrality_tol: 1e-6,
            allow_active_beam_join: false,
            max_free_variables: 5000,
            lambda: None,
            simplex: SimplexOptions::default(),
        }
    }
}

/// Linear relaxation of the placement problem with some users already
/// pinned, one per beam, to the first beams.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub lp: LinearProgram,
    /// Conflict rows kept out of the initial LP and added only when violated.
    pub lazy: Vec<Constraint>,
    /// `(user, beam, column)` for every assignment variable in the LP.
    pub assign_cols: Vec<(usize, usize, usize)>,
    /// `(beam, column)` for every activity variable in the LP.
    pub active_cols: Vec<(usize, usize)>,
    /// Objective contribution of the pinned beams.
    pub fixed_objective: f64,
}

/// Builds the relaxation with user `pinned[b]` fixed to beam `b`, followed
/// by `new_beams` empty beams.
///
/// Pinned beams are active by construction. Assignment columns that a
/// conflict with the pinned user would force to zero are left out.
pub fn relaxation(inst: &ProblemInstance, pinned: &[usize], new_beams: usize) -> Relaxation {
    let g = &inst.graph;
    let w = inst.capacity as f64;
    let mut is_pinned = vec![false; inst.users()];
    for &u in pinned {
        is_pinned[u] = true;
    }
    let rest: Vec<usize> = (0..inst.users()).filter(|&i| !is_pinned[i]).collect();

    let mut assign_cols = Vec::new();
    let mut active_cols = Vec::new();
    let mut per_beam: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut col = 0;
    for (b, &p) in pinned.iter().enumerate() {
        let mut members = Vec::new();
        if inst.capacity > 1 {
            for &i in &rest {
                if g.has_edge(i, p) {
                    assign_cols.push((i, b, col));
                    members.push((i, col));
                    col += 1;
                }
            }
        }
        per_beam.push(members);
    }
    for k in 0..new_beams {
        let b = pinned.len() + k;
        let mut members = Vec::new();
        for &i in &rest {
            assign_cols.push((i, b, col));
            members.push((i, col));
            col += 1;
        }
        per_beam.push(members);
        active_cols.push((b, col));
        col += 1;
    }

    let mut lp = LinearProgram::new(col);
    for &(_, c) in &active_cols {
        lp.objective[c] = 1.0;
    }
    let mut lazy = Vec::new();

    // Each remaining user lands in exactly one beam.
    let mut by_user: BTreeMap<usize, Vec<(usize, f64)>> =
        rest.iter().map(|&i| (i, Vec::new())).collect();
    for &(i, _, c) in &assign_cols {
        by_user.get_mut(&i).expect("remaining user").push((c, 1.0));
    }
    for (_, row) in by_user {
        lp.add_constraint(row, Relation::Eq, 1.0);
    }

    for (b, members) in per_beam.iter().enumerate() {
        let pinned_beam = b < pinned.len();
        if let Some(&(_, zc)) = active_cols.iter().find(|&&(beam, _)| beam == b) {
            for &(_, c) in members {
                lp.add_constraint(vec![(c, 1.0), (zc, -1.0)], Relation::Le, 0.0);
            }
        }
        if !members.is_empty() {
            let room = if pinned_beam { w - 1.0 } else { w };
            lp.add_constraint(members.iter().map(|&(_, c)| (c, 1.0)).collect(), Relation::Le, room);
        }
        for (k, &(i, ci)) in members.iter().enumerate() {
            for &(j, cj) in &members[k + 1..] {
                if !g.has_edge(i, j) {
                    lazy.push(Constraint::new(vec![(ci, 1.0), (cj, 1.0)], Relation::Le, 1.0));
                }
            }
        }
    }

    Relaxation {
        lp,
        lazy,
        assign_cols,
        active_cols,
        fixed_objective: pinned.len() as f64,
    }
}

const LAZY_TOL: f64 = 1e-9;

/// Solves the relaxation, adding lazy conflict rows until none is violated.
/// The result is optimal for the LP with every lazy row included.
pub fn solve_relaxation(rel: &Relaxation, options: SimplexOptions) -> Result<LpSolution> {
    let mut lp = rel.lp.clone();
    let mut pending = rel.lazy.clone();
    let mut iterations = 0;
    loop {
        let mut sol = lp_solve_with(&lp, options)?;
        iterations += sol.iterations;
        let (violated, ok): (Vec<_>, Vec<_>) = pending
            .into_iter()
            .partition(|c| c.violation(&sol.values) > LAZY_TOL);
        pending = ok;
        if violated.is_empty() {
            sol.objective += rel.fixed_objective;
            sol.iterations = iterations;
            return Ok(sol);
        }
        lp.constraints.extend(violated);
    }
}

/// Number of empty beams that reproduces the relaxation value of all
/// `available` empty beams. Empty beams are interchangeable, so averaging
/// any optimum over them leaves a solution whose only beam-count dependent
/// rows (pairwise conflicts, per-beam capacity) are slack once there are at
/// least two beams and `remaining / capacity` of them.
pub fn sufficient_new_beams(remaining: usize, capacity: usize, available: usize) -> usize {
    if remaining == 0 {
        return 0;
    }
    available.min(remaining.div_ceil(capacity).max(2))
}

/// Relaxation value of the untouched problem (no pinned users, all beams).
pub fn full_relaxation_bound(inst: &ProblemInstance, options: SimplexOptions) -> Result<f64> {
    let rel = relaxation(inst, &[], inst.beams);
    Ok(solve_relaxation(&rel, options)?.objective)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresolveState {
    pub users: usize,
    pub beams: usize,
    pub capacity: usize,
    /// Users pinned one per beam by the independent-set step.
    pub independent_set: Vec<usize>,
    /// Beam of every decided user; beams are re-indexed so the active ones
    /// are `0..active_beams`.
    pub assignment: Vec<Option<usize>>,
    pub active_beams: usize,
    pub unassigned: Vec<usize>,
    /// Remaining room of every active beam that is not full.
    pub residual_capacity: BTreeMap<usize, usize>,
    /// Relaxation optimum including the pinned beams.
    pub lp_lower_bound: f64,
    /// Further beams that may still open: `min(B - active, unassigned)`.
    pub extra_beam_budget: usize,
    pub lp_iterations: usize,
}

pub fn presolve(inst: &ProblemInstance) -> Result<PresolveState> {
    presolve_with(inst, &PresolveOptions::default())
}

pub fn presolve_with(inst: &ProblemInstance, options: &PresolveOptions) -> Result<PresolveState> {
    let independent = greedy_independent_set(&inst.graph);
    if independent.len() > inst.beams {
        return Err(Error::BudgetExhausted(inst.beams));
    }
    let pinned = independent.len();
    let remaining = inst.users() - pinned;
    let new_beams = sufficient_new_beams(remaining, inst.capacity, inst.beams - pinned);
    let rel = relaxation(inst, &independent, new_beams);
    let sol = solve_relaxation(&rel, options.simplex)?;

    let tol = options.integrality_tol;
    let mut active_new: Vec<usize> = rel
        .active_cols
        .iter()
        .filter(|&&(_, c)| sol.values[c] >= 1.0 - tol)
        .map(|&(b, _)| b)
        .collect();
    let mut raw: Vec<Option<usize>> = vec![None; inst.users()];
    for (b, &u) in independent.iter().enumerate() {
        raw[u] = Some(b);
    }
    for &(i, b, c) in &rel.assign_cols {
        let beam_on = b < pinned || active_new.contains(&b);
        if beam_on && sol.values[c] >= 1.0 - tol && raw[i].is_none() {
            raw[i] = Some(b);
        }
    }
    // An opened beam nobody was integrally placed in is dropped.
    active_new.retain(|b| raw.contains(&Some(*b)));
    active_new.sort_unstable();

    let reindex = |b: usize| -> Option<usize> {
        if b < pinned {
            Some(b)
        } else {
            active_new.iter().position(|&x| x == b).map(|k| pinned + k)
        }
    };
    let assignment: Vec<Option<usize>> = raw.iter().map(|a| a.and_then(reindex)).collect();
    let active_beams = pinned + active_new.len();
    let unassigned: Vec<usize> = (0..inst.users()).filter(|&i| assignment[i].is_none()).collect();

    let mut load = vec![0usize; active_beams];
    for b in assignment.iter().flatten() {
        load[*b] += 1;
    }
    let residual_capacity = load
        .iter()
        .enumerate()
        .filter(|&(_, &l)| l < inst.capacity)
        .map(|(b, &l)| (b, inst.capacity - l))
        .collect();

    Ok(PresolveState {
        users: inst.users(),
        beams: inst.beams,
        capacity: inst.capacity,
        independent_set: independent,
        extra_beam_budget: (inst.beams - active_beams).min(unassigned.len()),
        assignment,
        active_beams,
        unassigned,
        residual_capacity,
        lp_lower_bound: sol.objective,
        lp_iterations: sol.iterations,
    })
}

impl PresolveState {
    pub fn is_complete(&self) -> bool {
        self.unassigned.is_empty()
    }

    pub fn layout(&self) -> VariableLayout {
        VariableLayout::new(self.users, self.beams, self.capacity)
    }

    pub fn loads(&self) -> Vec<usize> {
        let mut load = vec![0; self.active_beams];
        for b in self.assignment.iter().flatten() {
            load[*b] += 1;
        }
        load
    }

    /// Beams that may open for the unassigned users.
    pub fn new_beams(&self) -> std::ops::Range<usize> {
        self.active_beams..self.active_beams + self.extra_beam_budget
    }

    /// Whether a new beam could receive more than `W` of the unassigned
    /// users. Only then do new beams keep their slack bits.
    pub fn new_beams_can_overflow(&self) -> bool {
        self.unassigned.len() > self.capacity
    }

    /// Original QUBO indices left free for the annealer, ascending.
    pub fn free_variables(&self, allow_active_beam_join: bool) -> Vec<usize> {
        if self.is_complete() {
            return Vec::new();
        }
        let layout = self.layout();
        let mut free = Vec::new();
        for b in self.new_beams() {
            free.push(layout.z_index(b));
            for &i in &self.unassigned {
                free.push(layout.a_index(i, b));
            }
            if self.new_beams_can_overflow() {
                free.extend((1..=self.capacity).map(|w| layout.s_index(b, w)));
            }
        }
        for (&b, &room) in &self.residual_capacity {
            if allow_active_beam_join {
                for &i in &self.unassigned {
                    free.push(layout.a_index(i, b));
                }
            }
            for w in 1..=room {
                free.push(layout.s_index(b, w));
            }
        }
        free.sort_unstable();
        free
    }

    /// The decided part as a placement; only feasible when complete.
    pub fn solution(&self, inst: &ProblemInstance) -> Result<BeamSolution> {
        let mut assignment = vec![vec![false; self.beams]; self.users];
        for (i, b) in self.assignment.iter().enumerate() {
            if let Some(b) = b {
                assignment[i][*b] = true;
            }
        }
        let active = (0..self.beams).map(|b| b < self.active_beams).collect();
        BeamSolution::new(assignment, active, inst)
    }

    pub fn report(&self, allow_active_beam_join: bool) -> PresolveReport {
        let full = qubit_count(self.users, self.beams, self.capacity);
        let reduced = self.free_variables(allow_active_beam_join).len();
        PresolveReport {
            users: self.users,
            beams: self.beams,
            capacity: self.capacity,
            independent_set: self.independent_set.len(),
            assigned_users: self.users - self.unassigned.len(),
            active_beams: self.active_beams,
            unassigned_users: self.unassigned.len(),
            extra_beam_budget: self.extra_beam_budget,
            lp_lower_bound: self.lp_lower_bound,
            qubits_full: full,
            qubits_reduced: reduced,
            reduction_ratio: 1.0 - reduced as f64 / full as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresolveReport {
    pub users: usize,
    pub beams: usize,
    pub capacity: usize,
    pub independent_set: usize,
    pub assigned_users: usize,
    pub active_beams: usize,
    pub unassigned_users: usize,
    pub extra_beam_budget: usize,
    pub lp_lower_bound: f64,
    pub qubits_full: usize,
    pub qubits_reduced: usize,
    pub reduction_ratio: f64,
}

impl fmt::Display for PresolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "users: {}", self.users)?;
        writeln!(f, "beams: {}", self.beams)?;
        writeln!(f, "capacity: {}", self.capacity)?;
        writeln!(f, "independent_set: {}", self.independent_set)?;
        writeln!(f, "assigned_users: {}", self.assigned_users)?;
        writeln!(f, "active_beams: {}", self.active_beams)?;
        writeln!(f, "unassigned_users: {}", self.unassigned_users)?;
        writeln!(f, "extra_beam_budget: {}", self.extra_beam_budget)?;
        writeln!(f, "lp_lower_bound: {:.6}", self.lp_lower_bound)?;
        writeln!(f, "qubits_full: {}", self.qubits_full)?;
        writeln!(f, "qubits_reduced: {}", self.qubits_reduced)?;
        writeln!(f, "reduction_ratio: {:.6}", self.reduction_ratio)
    }
}
