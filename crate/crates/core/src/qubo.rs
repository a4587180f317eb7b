//! Clique-cover QUBO for beam placement.
//!
//! Variables are laid out as `x = [a_1..a_B, z_1..z_B, s_1..s_B]` where
//! `a_b` holds the N user-assignment bits of beam `b`, `z_b` marks beam `b`
//! active, and `s_b` holds the W capacity slack bits of beam `b` (slack `w`
//! carries weight `w`). The Hamiltonian is
//!
//! ```text
//! Q = Q_o + lambda * (Q_C1 + Q_C2 + Q_C3 + Q_C4)
//! ```
//!
//! with the constant parts of the squared penalties kept in
//! [`QuboMatrix::offset`], so every feasible `x` has energy equal to its
//! number of active beams.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ProximityGraph;

/// Upper bound on the number of QUBO variables [`build_qubo`] will materialise.
pub const DEFAULT_MAX_VARIABLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub graph: ProximityGraph,
    /// Beam budget `B`.
    pub beams: usize,
    /// Users per beam `W`.
    pub capacity: usize,
}

impl ProblemInstance {
    pub fn new(graph: ProximityGraph, beams: usize, capacity: usize) -> Result<Self> {
        if graph.n() == 0 {
            return Err(Error::Validation("instance needs at least one user".into()));
        }
        if beams == 0 || capacity == 0 {
            return Err(Error::Validation(
                "beam budget and capacity must be positive".into(),
            ));
        }
        Ok(Self {
            graph,
            beams,
            capacity,
        })
    }

    /// One beam per user, the default budget.
    pub fn with_beams_per_user(graph: ProximityGraph, capacity: usize) -> Result<Self> {
        let n = graph.n();
        Self::new(graph, n, capacity)
    }

    pub fn users(&self) -> usize {
        self.graph.n()
    }

    pub fn layout(&self) -> VariableLayout {
        VariableLayout::new(self.users(), self.beams, self.capacity)
    }

    /// Default penalty weight, one more than the largest possible objective.
    pub fn default_lambda(&self) -> f64 {
        (self.beams + 1) as f64
    }
}

pub fn qubit_count(users: usize, beams: usize, capacity: usize) -> usize {
    users * beams + beams + capacity * beams
}

/// What a flat variable index stands for. Beams and users are 0-based,
/// slack weights run `1..=W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    Assign { user: usize, beam: usize },
    Active { beam: usize },
    Slack { beam: usize, weight: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableLayout {
    pub users: usize,
    pub beams: usize,
    pub capacity: usize,
}

impl VariableLayout {
    pub fn new(users: usize, beams: usize, capacity: usize) -> Self {
        Self {
            users,
            beams,
            capacity,
        }
    }

    pub fn size(&self) -> usize {
        qubit_count(self.users, self.beams, self.capacity)
    }

    #[inline]
    pub fn a_index(&self, user: usize, beam: usize) -> usize {
        debug_assert!(user < self.users && beam < self.beams);
        beam * self.users + user
    }

    #[inline]
    pub fn z_index(&self, beam: usize) -> usize {
        debug_assert!(beam < self.beams);
        self.users * self.beams + beam
    }

    /// `weight` is 1-based.
    #[inline]
    pub fn s_index(&self, beam: usize, weight: usize) -> usize {
        debug_assert!(beam < self.beams && (1..=self.capacity).contains(&weight));
        self.users * self.beams + self.beams + beam * self.capacity + weight - 1
    }

    pub fn index_of(&self, v: Variable) -> usize {
        match v {
            Variable::Assign { user, beam } => self.a_index(user, beam),
            Variable::Active { beam } => self.z_index(beam),
            Variable::Slack { beam, weight } => self.s_index(beam, weight),
        }
    }

    pub fn variable(&self, index: usize) -> Variable {
        let a_len = self.users * self.beams;
        if index < a_len {
            Variable::Assign {
                user: index % self.users,
                beam: index / self.users,
            }
        } else if index < a_len + self.beams {
            Variable::Active {
                beam: index - a_len,
            }
        } else {
            assert!(index < self.size(), "index {index} outside layout");
            let k = index - a_len - self.beams;
            Variable::Slack {
                beam: k / self.capacity,
                weight: k % self.capacity + 1,
            }
        }
    }
}

/// Upper-triangular QUBO with a constant offset.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuboMatrix {
    size: usize,
    entries: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl QuboMatrix {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            entries: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Accumulates `value` onto `Q_ij`; a lower-triangular position is
    /// folded onto its mirror so the matrix stays upper-triangular.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.size && j < self.size, "({i}, {j}) outside {}", self.size);
        let key = if i <= j { (i, j) } else { (j, i) };
        *self.entries.entry(key).or_insert(0.0) += value;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.entries.get(&key).copied().unwrap_or(0.0)
    }

    /// Non-zero entries `(i, j, Q_ij)` with `i <= j` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries
            .iter()
            .filter(|(_, &v)| v != 0.0)
            .map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries().count()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.entries().map(|(_, _, v)| v.abs()).fold(0.0, f64::max)
    }

    pub fn energy(&self, x: &[bool]) -> Result<f64> {
        if x.len() != self.size {
            return Err(Error::Validation(format!(
                "bitstring has length {}, QUBO has {} variables",
                x.len(),
                self.size
            )));
        }
        Ok(self.offset
            + self
                .entries()
                .filter(|&(i, j, _)| x[i] && x[j])
                .map(|(_, _, v)| v)
                .sum::<f64>())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.size]; self.size];
        for (i, j, v) in self.entries() {
            m[i][j] = v;
        }
        m
    }

    /// Text form: `S offset` header, then `i j value` per non-zero entry.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.size, self.offset);
        for (i, j, v) in self.entries() {
            writeln!(out, "{i} {j} {v}").expect("string write");
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("missing QUBO header".into()))?;
        let mut h = header.split_whitespace();
        let size: usize = h
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Format(format!("bad QUBO header {header:?}")))?;
        let offset: f64 = h
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Format(format!("bad QUBO header {header:?}")))?;
        let mut q = Self::new(size);
        q.offset = offset;
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                [i, j, v] => i
                    .parse::<usize>()
                    .ok()
                    .zip(j.parse::<usize>().ok())
                    .zip(v.parse::<f64>().ok()),
                _ => None,
            };
            let ((i, j), v) =
                parsed.ok_or_else(|| Error::Format(format!("bad QUBO line {line:?}")))?;
            if i > j || j >= size {
                return Err(Error::Format(format!(
                    "entry ({i}, {j}) is not upper-triangular within {size} variables"
                )));
            }
            q.add(i, j, v);
        }
        Ok(q)
    }
}

/// Streams every coefficient of the beam-placement QUBO into `sink` as
/// `(i, j, value)` with `i <= j` and returns the constant offset. A position
/// may be emitted several times; the sink accumulates.
///
/// Beams for which `capacity_penalty(beam)` is false get no capacity term
/// at all (neither its slack couplings nor its constant).
pub fn emit_terms(
    inst: &ProblemInstance,
    lambda: f64,
    capacity_penalty: &dyn Fn(usize) -> bool,
    sink: &mut dyn FnMut(usize, usize, f64),
) -> f64 {
    let layout = inst.layout();
    let (n, nb, w_cap) = (inst.users(), inst.beams, inst.capacity);
    let w_f = w_cap as f64;
    let mut offset = 0.0;

    // Objective: one per active beam.
    for b in 0..nb {
        sink(layout.z_index(b), layout.z_index(b), 1.0);
    }

    // C1: (sum_b a_ib - 1)^2 for every user.
    for i in 0..n {
        for b in 0..nb {
            let ib = layout.a_index(i, b);
            sink(ib, ib, -lambda);
            for b2 in b + 1..nb {
                sink(ib, layout.a_index(i, b2), 2.0 * lambda);
            }
        }
        offset += lambda;
    }

    // C2: a_ib (1 - z_b).
    for b in 0..nb {
        let zb = layout.z_index(b);
        for i in 0..n {
            let ib = layout.a_index(i, b);
            sink(ib, ib, lambda);
            sink(ib, zb, -lambda);
        }
    }

    // C3: complement adjacency block per beam, both triangles folded.
    for b in 0..nb {
        for i in 0..n {
            for j in i + 1..n {
                if !inst.graph.has_edge(i, j) {
                    sink(layout.a_index(i, b), layout.a_index(j, b), 2.0 * lambda);
                }
            }
        }
    }

    // C4: (sum_i a_ib + sum_w w s_bw - W)^2 per beam.
    for b in 0..nb {
        if !capacity_penalty(b) {
            continue;
        }
        for i in 0..n {
            let ib = layout.a_index(i, b);
            sink(ib, ib, lambda * (1.0 - 2.0 * w_f));
            for j in i + 1..n {
                sink(ib, layout.a_index(j, b), 2.0 * lambda);
            }
            for w in 1..=w_cap {
                sink(ib, layout.s_index(b, w), 2.0 * lambda * w as f64);
            }
        }
        for w in 1..=w_cap {
            let wf = w as f64;
            let sw = layout.s_index(b, w);
            sink(sw, sw, lambda * (wf * wf - 2.0 * w_f * wf));
            for w2 in w + 1..=w_cap {
                sink(sw, layout.s_index(b, w2), 2.0 * lambda * wf * w2 as f64);
            }
        }
        offset += lambda * w_f * w_f;
    }

    offset
}

pub fn build_qubo(inst: &ProblemInstance, lambda: f64) -> Result<(QuboMatrix, VariableLayout)> {
    build_qubo_limited(inst, lambda, DEFAULT_MAX_VARIABLES)
}

pub fn build_qubo_limited(
    inst: &ProblemInstance,
    lambda: f64,
    max_variables: usize,
) -> Result<(QuboMatrix, VariableLayout)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Validation(format!("lambda {lambda} must be positive")));
    }
    let layout = inst.layout();
    if layout.size() > max_variables {
        return Err(Error::Capacity {
            what: "QUBO variables",
            required: layout.size(),
            limit: max_variables,
        });
    }
    let mut q = QuboMatrix::new(layout.size());
    let offset = emit_terms(inst, lambda, &|_| true, &mut |i, j, v| q.add(i, j, v));
    q.offset = offset;
    q.entries.retain(|_, v| *v != 0.0);
    Ok((q, layout))
}

/// Fixes some variables of a QUBO and folds their contributions into the
/// remaining ones. Built incrementally so terms can be streamed in without
/// materialising the full matrix.
#[derive(Debug, Clone)]
pub struct Conditioner {
    role: Vec<Slot>,
    free: Vec<usize>,
    out: QuboMatrix,
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Free(usize),
    Fixed(bool),
}

impl Conditioner {
    /// Every index in `0..size` not present in `fixed` stays free, in
    /// increasing original order.
    pub fn new(size: usize, fixed: &BTreeMap<usize, bool>) -> Result<Self> {
        if let Some((&k, _)) = fixed.range(size..).next() {
            return Err(Error::Validation(format!(
                "fixed variable {k} outside QUBO of size {size}"
            )));
        }
        let mut role = Vec::with_capacity(size);
        let mut free = Vec::new();
        for idx in 0..size {
            match fixed.get(&idx) {
                Some(&bit) => role.push(Slot::Fixed(bit)),
                None => {
                    role.push(Slot::Free(free.len()));
                    free.push(idx);
                }
            }
        }
        let out = QuboMatrix::new(free.len());
        Ok(Self { role, free, out })
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        match (self.role[i], self.role[j]) {
            (Slot::Free(a), Slot::Free(b)) => self.out.add(a, b, v),
            (Slot::Free(a), Slot::Fixed(true)) | (Slot::Fixed(true), Slot::Free(a)) => {
                self.out.add(a, a, v)
            }
            (Slot::Fixed(true), Slot::Fixed(true)) => self.out.offset += v,
            _ => {}
        }
    }

    pub fn add_offset(&mut self, v: f64) {
        self.out.offset += v;
    }

    /// Conditioned matrix and, for each of its variables, the original index.
    pub fn finish(mut self) -> (QuboMatrix, Vec<usize>) {
        self.out.entries.retain(|_, v| *v != 0.0);
        (self.out, self.free)
    }
}

/// Conditions `q` on the `fixed` bits. Returns the QUBO over the remaining
/// variables (original order preserved) and the map from its indices back
/// to indices of `q`.
pub fn condition(q: &QuboMatrix, fixed: &BTreeMap<usize, bool>) -> Result<(QuboMatrix, Vec<usize>)> {
    let mut c = Conditioner::new(q.size(), fixed)?;
    c.add_offset(q.offset);
    for (i, j, v) in q.entries() {
        c.add(i, j, v);
    }
    Ok(c.finish())
}

/// Spin form `H(s) = offset + sum_i f_i s_i + sum_{i<j} G_ij s_i s_j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IsingModel {
    pub biases: Vec<f64>,
    pub couplers: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl IsingModel {
    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.biases.len() {
            return Err(Error::Validation(format!(
                "spin vector has length {}, model has {} spins",
                spins.len(),
                self.biases.len()
            )));
        }
        if let Some(s) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::Validation(format!("spin value {s} is not +-1")));
        }
        let linear: f64 = self
            .biases
            .iter()
            .zip(spins)
            .map(|(f, &s)| f * s as f64)
            .sum();
        let quad: f64 = self
            .couplers
            .iter()
            .map(|(&(i, j), g)| g * (spins[i] * spins[j]) as f64)
            .sum();
        Ok(self.offset + linear + quad)
    }
}

/// Substitutes `x_i = (s_i + 1) / 2`: `f_i = Q_ii/2 + (sum_{j != i} Q_ij + Q_ji)/4`,
/// `G_ij = Q_ij/4`, and the constant collects the rest.
pub fn qubo_to_ising(q: &QuboMatrix) -> IsingModel {
    let mut biases = vec![0.0; q.size()];
    let mut couplers = BTreeMap::new();
    let mut offset = q.offset;
    for (i, j, v) in q.entries() {
        if i == j {
            biases[i] += 0.5 * v;
            offset += 0.5 * v;
        } else {
            biases[i] += 0.25 * v;
            biases[j] += 0.25 * v;
            couplers.insert((i, j), 0.25 * v);
            offset += 0.25 * v;
        }
    }
    IsingModel {
        biases,
        couplers,
        offset,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Violation {
    /// User not assigned to exactly one beam.
    C1 { user: usize, assigned: usize },
    /// User served by an inactive beam.
    C2 { user: usize, beam: usize },
    /// Non-adjacent users sharing a beam.
    C3 { first: usize, second: usize, beam: usize },
    /// Beam loaded beyond capacity.
    C4 { beam: usize, load: usize },
}

impl Violation {
    pub fn constraint(&self) -> &'static str {
        match self {
            Self::C1 { .. } => "C1",
            Self::C2 { .. } => "C2",
            Self::C3 { .. } => "C3",
            Self::C4 { .. } => "C4",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::C1 { user, assigned } => write!(f, "C1: user {user} in {assigned} beams"),
            Self::C2 { user, beam } => write!(f, "C2: user {user} in inactive beam {beam}"),
            Self::C3 {
                first,
                second,
                beam,
            } => write!(f, "C3: users {first} and {second} not adjacent in beam {beam}"),
            Self::C4 { beam, load } => write!(f, "C4: beam {beam} carries {load} users"),
        }
    }
}

/// Decoded beam placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamSolution {
    /// `assignment[i][b]` is true when user `i` is served by beam `b`.
    pub assignment: Vec<Vec<bool>>,
    pub active: Vec<bool>,
    pub objective: usize,
    pub violations: Vec<Violation>,
}

impl BeamSolution {
    pub fn new(assignment: Vec<Vec<bool>>, active: Vec<bool>, inst: &ProblemInstance) -> Result<Self> {
        if assignment.len() != inst.users()
            || assignment.iter().any(|row| row.len() != inst.beams)
            || active.len() != inst.beams
        {
            return Err(Error::Validation(format!(
                "solution dimensions do not match {} users x {} beams",
                inst.users(),
                inst.beams
            )));
        }
        let mut sol = Self {
            objective: active.iter().filter(|&&z| z).count(),
            assignment,
            active,
            violations: Vec::new(),
        };
        sol.violations = check_feasibility(&sol, inst);
        Ok(sol)
    }

    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    /// Users served by `beam`, in index order.
    pub fn members(&self, beam: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i][beam])
            .collect()
    }

    /// Encodes back into a QUBO bitstring; each beam's slack is set to the
    /// single bit that tops its load up to capacity, when one exists.
    pub fn encode(&self, layout: &VariableLayout) -> Vec<bool> {
        let mut x = vec![false; layout.size()];
        for b in 0..layout.beams {
            let mut load = 0;
            for i in 0..layout.users {
                if self.assignment[i][b] {
                    x[layout.a_index(i, b)] = true;
                    load += 1;
                }
            }
            x[layout.z_index(b)] = self.active[b];
            if load < layout.capacity {
                x[layout.s_index(b, layout.capacity - load)] = true;
            }
        }
        x
    }
}

/// Every violated instance of C1-C4, in a fixed order.
pub fn check_feasibility(sol: &BeamSolution, inst: &ProblemInstance) -> Vec<Violation> {
    let (n, nb) = (inst.users(), inst.beams);
    let mut out = Vec::new();
    for (i, row) in sol.assignment.iter().enumerate().take(n) {
        let assigned = row.iter().filter(|&&a| a).count();
        if assigned != 1 {
            out.push(Violation::C1 { user: i, assigned });
        }
    }
    for (i, row) in sol.assignment.iter().enumerate().take(n) {
        for b in 0..nb {
            if row[b] && !sol.active[b] {
                out.push(Violation::C2 { user: i, beam: b });
            }
        }
    }
    for b in 0..nb {
        let members = sol.members(b);
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                if !inst.graph.has_edge(i, j) {
                    out.push(Violation::C3 {
                        first: i,
                        second: j,
                        beam: b,
                    });
                }
            }
        }
    }
    for b in 0..nb {
        let load = sol.members(b).len();
        if load > inst.capacity {
            out.push(Violation::C4 { beam: b, load });
        }
    }
    out
}

/// Reads the assignment and activity blocks of `x`; slack bits are ignored.
pub fn decode(x: &[bool], inst: &ProblemInstance) -> Result<BeamSolution> {
    let layout = inst.layout();
    if x.len() != layout.size() {
        return Err(Error::Validation(format!(
            "bitstring has length {}, layout has {} variables",
            x.len(),
            layout.size()
        )));
    }
    let assignment = (0..inst.users())
        .map(|i| (0..inst.beams).map(|b| x[layout.a_index(i, b)]).collect())
        .collect();
    let active = (0..inst.beams).map(|b| x[layout.z_index(b)]).collect();
    BeamSolution::new(assignment, active, inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(adjacent: bool, beams: usize, capacity: usize) -> ProblemInstance {
        let g = if adjacent {
            ProximityGraph::complete(2)
        } else {
            ProximityGraph::new(2)
        };
        ProblemInstance::new(g, beams, capacity).unwrap()
    }

    #[test]
    fn qubit_counts() {
        assert_eq!(qubit_count(12, 12, 5), 216);
        assert_eq!(qubit_count(10, 10, 5), 160);
        assert_eq!(qubit_count(1, 1, 1), 3);
    }

    #[test]
    fn layout_is_a_bijection_in_block_order() {
        let l = VariableLayout::new(3, 2, 4);
        assert_eq!(l.size(), 3 * 2 + 2 + 4 * 2);
        assert_eq!(l.a_index(0, 0), 0);
        assert_eq!(l.a_index(2, 0), 2);
        assert_eq!(l.a_index(0, 1), 3);
        assert_eq!(l.z_index(0), 6);
        assert_eq!(l.s_index(0, 1), 8);
        assert_eq!(l.s_index(1, 4), 15);
        let mut seen = vec![false; l.size()];
        for idx in 0..l.size() {
            let v = l.variable(idx);
            assert_eq!(l.index_of(v), idx);
            seen[idx] = true;
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn single_user_single_beam() {
        let inst = ProblemInstance::new(ProximityGraph::new(1), 1, 1).unwrap();
        let (q, layout) = build_qubo(&inst, inst.default_lambda()).unwrap();
        assert_eq!(q.size(), 3);
        let mut best = (f64::INFINITY, vec![]);
        for mask in 0..8u32 {
            let x: Vec<bool> = (0..3).map(|k| mask & (1 << k) != 0).collect();
            let e = q.energy(&x).unwrap();
            if e < best.0 {
                best = (e, x);
            }
        }
        assert_eq!(best.0, 1.0);
        assert_eq!(best.1, vec![true, true, false]);
        let sol = decode(&best.1, &inst).unwrap();
        assert_eq!(sol.objective, 1);
        assert!(sol.is_feasible());
        assert_eq!(layout.s_index(0, 1), 2);
    }

    #[test]
    fn hand_expanded_pair_in_one_beam() {
        // Two adjacent users, B = 1, W = 2: a = (1, 1), z = 1, slack empty.
        let inst = pair(true, 1, 2);
        let (q, _) = build_qubo(&inst, inst.default_lambda()).unwrap();
        let x = [true, true, true, false, false];
        assert_eq!(q.energy(&x).unwrap(), 1.0);
        assert!(q.energy(&x[..4]).is_err());
    }

    #[test]
    fn energy_edge_cases() {
        let mut q = QuboMatrix::new(1);
        q.offset = 2.5;
        assert_eq!(q.energy(&[false]).unwrap(), 2.5);
        q.add(0, 0, -4.0);
        assert_eq!(q.energy(&[true]).unwrap(), -1.5);
    }

    #[test]
    fn add_folds_lower_triangle() {
        let mut q = QuboMatrix::new(3);
        q.add(2, 0, 1.5);
        q.add(0, 2, 0.5);
        assert_eq!(q.get(0, 2), 2.0);
        assert_eq!(q.entries().collect::<Vec<_>>(), vec![(0, 2, 2.0)]);
    }

    #[test]
    fn build_rejects_bad_lambda_and_oversize() {
        let inst = pair(true, 2, 2);
        assert!(build_qubo(&inst, 0.0).is_err());
        assert!(matches!(
            build_qubo_limited(&inst, 1.0, 5),
            Err(Error::Capacity { required: 10, .. })
        ));
    }

    #[test]
    fn decode_examples() {
        let inst = pair(false, 2, 2);
        let zeros = vec![false; inst.layout().size()];
        let sol = decode(&zeros, &inst).unwrap();
        assert_eq!(sol.objective, 0);
        assert_eq!(
            sol.violations,
            vec![
                Violation::C1 { user: 0, assigned: 0 },
                Violation::C1 { user: 1, assigned: 0 }
            ]
        );

        let single = ProblemInstance::new(ProximityGraph::new(1), 1, 1).unwrap();
        let sol = decode(&[true, false, false], &single).unwrap();
        assert!(sol.violations.contains(&Violation::C2 { user: 0, beam: 0 }));
        assert!(decode(&[true], &single).is_err());
    }

    #[test]
    fn feasibility_examples() {
        let inst = pair(false, 1, 2);
        let sol = BeamSolution::new(vec![vec![true], vec![true]], vec![true], &inst).unwrap();
        assert_eq!(
            sol.violations,
            vec![Violation::C3 { first: 0, second: 1, beam: 0 }]
        );

        let k3 = ProblemInstance::new(ProximityGraph::complete(3), 1, 2).unwrap();
        let sol = BeamSolution::new(vec![vec![true]; 3], vec![true], &k3).unwrap();
        assert_eq!(sol.violations, vec![Violation::C4 { beam: 0, load: 3 }]);

        let sol = BeamSolution::new(vec![vec![false]; 3], vec![false], &k3).unwrap();
        assert_eq!(sol.violations.len(), 3);
        assert!(BeamSolution::new(vec![vec![false]; 2], vec![false], &k3).is_err());
    }

    #[test]
    fn encode_roundtrips_feasible_solutions() {
        let inst = pair(true, 2, 2);
        let sol =
            BeamSolution::new(vec![vec![false, true], vec![false, true]], vec![false, true], &inst)
                .unwrap();
        let layout = inst.layout();
        let x = sol.encode(&layout);
        let (q, _) = build_qubo(&inst, inst.default_lambda()).unwrap();
        assert_eq!(q.energy(&x).unwrap(), 1.0);
        assert_eq!(decode(&x, &inst).unwrap(), sol);
    }

    #[test]
    fn ising_single_variable() {
        let mut q = QuboMatrix::new(1);
        q.add(0, 0, 1.0);
        let m = qubo_to_ising(&q);
        assert_eq!(m.biases, vec![0.5]);
        assert_eq!(m.offset, 0.5);
        assert_eq!(m.energy(&[-1]).unwrap(), q.energy(&[false]).unwrap());
        assert_eq!(m.energy(&[1]).unwrap(), q.energy(&[true]).unwrap());
        assert!(m.energy(&[0]).is_err());
    }

    #[test]
    fn ising_zero_matrix() {
        let mut q = QuboMatrix::new(4);
        q.offset = -3.0;
        let m = qubo_to_ising(&q);
        assert!(m.biases.iter().all(|&f| f == 0.0));
        assert!(m.couplers.is_empty());
        assert_eq!(m.offset, -3.0);
    }

    #[test]
    fn condition_trivial_cases() {
        let mut q = QuboMatrix::new(3);
        q.add(0, 1, 2.0);
        q.add(1, 2, -1.0);
        q.add(2, 2, 0.5);
        q.offset = 1.0;
        let (same, remap) = condition(&q, &BTreeMap::new()).unwrap();
        assert_eq!(same, q);
        assert_eq!(remap, vec![0, 1, 2]);

        let all: BTreeMap<usize, bool> = [(0, true), (1, true), (2, true)].into();
        let (empty, remap) = condition(&q, &all).unwrap();
        assert_eq!(empty.size(), 0);
        assert!(remap.is_empty());
        assert_eq!(empty.offset, q.energy(&[true, true, true]).unwrap());

        let bad: BTreeMap<usize, bool> = [(3, true)].into();
        assert!(condition(&q, &bad).is_err());
    }

    #[test]
    fn text_format_roundtrip_and_errors() {
        let inst = pair(false, 2, 1);
        let (q, _) = build_qubo(&inst, 3.0).unwrap();
        let text = q.to_text();
        assert!(text.starts_with(&format!("{} {}\n", q.size(), q.offset)));
        assert_eq!(QuboMatrix::parse_text(&text).unwrap(), q);
        assert!(QuboMatrix::parse_text("").is_err());
        assert!(QuboMatrix::parse_text("2 0\n1 0 1.0\n").is_err());
        assert!(QuboMatrix::parse_text("2 0\n0 2 1.0\n").is_err());
        assert!(QuboMatrix::parse_text("2 0\n0 1\n").is_err());
    }
}
