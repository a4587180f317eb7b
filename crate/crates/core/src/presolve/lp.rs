//! Dense bounded-variable primal simplex.
//!
//! Two phases over a full tableau. Entering variables are priced by the
//! largest reduced cost; after a run of degenerate pivots the solver falls
//! back to Bland's smallest-index rule until the objective moves again, so
//! it cannot cycle.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `min c.x` subject to the rows and `lower <= x <= upper`.
/// Lower bounds must be finite; upper bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// `n` variables bounded to `[0, 1]` with zero cost.
    pub fn new(n: usize) -> Self {
        Self {
            objective: vec![0.0; n],
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![1.0; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
        self.constraints.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Validation("bound vectors do not match variable count".into()));
        }
        for j in 0..n {
            if !self.objective[j].is_finite() {
                return Err(Error::Validation(format!("objective coefficient {j} not finite")));
            }
            if !self.lower[j].is_finite() || self.upper[j].is_nan() || self.upper[j] < self.lower[j] {
                return Err(Error::Validation(format!(
                    "variable {j} has invalid bounds [{}, {}]",
                    self.lower[j], self.upper[j]
                )));
            }
        }
        for (r, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::Validation(format!("row {r} has non-finite rhs")));
            }
            for &(j, a) in &row.coeffs {
                if j >= n || !a.is_finite() {
                    return Err(Error::Validation(format!("row {r} has a bad coefficient on {j}")));
                }
            }
        }
        Ok(())
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bounds = (0..self.num_vars())
            .map(|j| (self.lower[j] - x[j]).max(x[j] - self.upper[j]).max(0.0))
            .fold(0.0, f64::max);
        self.constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(bounds, f64::max)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_streak: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200_000,
            degenerate_streak: 8,
        }
    }
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

pub fn lp_solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp_solve_with(lp, SimplexOptions::default())
}

pub fn lp_solve_with(lp: &LinearProgram, options: SimplexOptions) -> Result<LpSolution> {
    lp.validate()?;
    let mut t = Tableau::new(lp);
    let mut iterations = 0;
    if t.num_artificial > 0 {
        let cost: Vec<f64> = (0..t.ncols)
            .map(|c| if c >= t.first_artificial { 1.0 } else { 0.0 })
            .collect();
        t.run(&cost, options, &mut iterations)?;
        let infeasibility: f64 = t.artificial_values().iter().map(|(_, v)| v).sum();
        if infeasibility > FEAS_TOL {
            let row = t
                .artificial_values()
                .into_iter()
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(r, _)| r)
                .unwrap_or(0);
            return Err(Error::Infeasible { row });
        }
        for c in t.first_artificial..t.ncols {
            t.lower[c] = 0.0;
            t.upper[c] = 0.0;
        }
    }
    let mut cost = vec![0.0; t.ncols];
    cost[..lp.num_vars()].copy_from_slice(&lp.objective);
    t.run(&cost, options, &mut iterations)?;

    let mut values = t.column_values();
    values.truncate(lp.num_vars());
    for (j, v) in values.iter_mut().enumerate() {
        *v = v.clamp(lp.lower[j], lp.upper[j]);
    }
    Ok(LpSolution {
        objective: lp.objective_value(&values),
        values,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    m: usize,
    ncols: usize,
    /// Row-major `m x ncols`, always `B^-1 A`.
    a: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<State>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    first_artificial: usize,
    num_artificial: usize,
    /// Original row of each artificial column.
    artificial_row: Vec<usize>,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.constraints.len();
        let num_slack = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();

        // Residuals with every structural at its lower bound decide whether
        // the slack can start basic or the row needs an artificial.
        let mut plans = Vec::with_capacity(m);
        let mut num_artificial = 0;
        for row in &lp.constraints {
            let res = row.rhs - row.coeffs.iter().map(|&(j, a)| a * lp.lower[j]).sum::<f64>();
            let slack_ok = match row.relation {
                Relation::Le => res >= 0.0,
                Relation::Ge => res <= 0.0,
                Relation::Eq => false,
            };
            if !slack_ok {
                num_artificial += 1;
            }
            plans.push((res, slack_ok));
        }

        let first_artificial = n + num_slack;
        let ncols = first_artificial + num_artificial;
        let mut a = vec![0.0; m * ncols];
        let mut beta = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut state = vec![State::AtLower; ncols];
        let mut lower = vec![0.0; ncols];
        let mut upper = vec![f64::INFINITY; ncols];
        lower[..n].copy_from_slice(&lp.lower);
        upper[..n].copy_from_slice(&lp.upper);
        let mut artificial_row = Vec::with_capacity(num_artificial);

        let mut slack_col = n;
        let mut art_col = first_artificial;
        for (r, row) in lp.constraints.iter().enumerate() {
            let (res, slack_ok) = plans[r];
            let slack = match row.relation {
                Relation::Le => Some((slack_col, 1.0)),
                Relation::Ge => Some((slack_col, -1.0)),
                Relation::Eq => None,
            };
            if slack.is_some() {
                slack_col += 1;
            }
            let (basic_col, basic_coef) = if slack_ok {
                slack.expect("inequality row")
            } else {
                artificial_row.push(r);
                art_col += 1;
                (art_col - 1, if res >= 0.0 { 1.0 } else { -1.0 })
            };
            // Scale the row so the starting basic column is +1.
            let mult = 1.0 / basic_coef;
            let base = r * ncols;
            for &(j, v) in &row.coeffs {
                a[base + j] += v * mult;
            }
            if let Some((c, v)) = slack {
                a[base + c] = v * mult;
            }
            a[base + basic_col] = 1.0;
            beta[r] = res * mult;
            basis[r] = basic_col;
            state[basic_col] = State::Basic;
        }

        Self {
            m,
            ncols,
            a,
            beta,
            basis,
            state,
            lower,
            upper,
            first_artificial,
            num_artificial,
            artificial_row,
        }
    }

    fn value(&self, col: usize) -> f64 {
        match self.state[col] {
            State::AtLower => self.lower[col],
            State::AtUpper => self.upper[col],
            State::Basic => f64::NAN,
        }
    }

    fn column_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.ncols).map(|c| self.value(c)).collect();
        for (r, &c) in self.basis.iter().enumerate() {
            v[c] = self.beta[r];
        }
        v
    }

    fn artificial_values(&self) -> Vec<(usize, f64)> {
        let values = self.column_values();
        (self.first_artificial..self.ncols)
            .map(|c| (self.artificial_row[c - self.first_artificial], values[c].max(0.0)))
            .collect()
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.a[r * self.ncols..(r + 1) * self.ncols];
                for (dj, &arj) in d.iter_mut().zip(row) {
                    *dj -= cb * arj;
                }
            }
        }
        for &b in &self.basis {
            d[b] = 0.0;
        }
        d
    }

    fn run(&mut self, cost: &[f64], options: SimplexOptions, iterations: &mut usize) -> Result<()> {
        let mut d = self.reduced_costs(cost);
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= options.degenerate_streak;
            let Some(q) = self.entering(&d, bland) else {
                return Ok(());
            };
            if *iterations >= options.max_iterations {
                return Err(Error::IterationLimit(options.max_iterations));
            }
            *iterations += 1;

            let dir = if self.state[q] == State::AtLower { 1.0 } else { -1.0 };
            let span = self.upper[q] - self.lower[q];
            let mut theta = span;
            let mut leave: Option<(usize, State, f64)> = None;
            for r in 0..self.m {
                let alpha = self.a[r * self.ncols + q];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                // Basic variable of row r moves by -alpha * dir per unit step.
                let rate = -alpha * dir;
                let col = self.basis[r];
                let (limit, to) = if rate < 0.0 {
                    ((self.beta[r] - self.lower[col]) / -rate, State::AtLower)
                } else if self.upper[col].is_finite() {
                    ((self.upper[col] - self.beta[r]) / rate, State::AtUpper)
                } else {
                    continue;
                };
                let limit = limit.max(0.0);
                let take = match leave {
                    None => limit < theta,
                    Some((lr, _, pa)) => {
                        limit < theta - PIVOT_TOL
                            || (limit <= theta + PIVOT_TOL
                                && if bland {
                                    col < self.basis[lr]
                                } else {
                                    alpha.abs() > pa
                                })
                    }
                };
                if take {
                    theta = if leave.is_none() { limit } else { limit.min(theta) };
                    leave = Some((r, to, alpha.abs()));
                }
            }
            if theta.is_infinite() {
                return Err(Error::Unbounded);
            }
            if theta <= PIVOT_TOL {
                degenerate += 1;
            } else {
                degenerate = 0;
            }

            let entering_value = self.value(q) + dir * theta;
            for r in 0..self.m {
                let alpha = self.a[r * self.ncols + q];
                if alpha != 0.0 {
                    self.beta[r] -= alpha * dir * theta;
                }
            }
            match leave {
                Some((r, to, _)) => {
                    let out = self.basis[r];
                    self.pivot(r, q, &mut d);
                    self.state[out] = to;
                    self.state[q] = State::Basic;
                    self.basis[r] = q;
                    self.beta[r] = entering_value;
                }
                None => {
                    self.state[q] = if dir > 0.0 { State::AtUpper } else { State::AtLower };
                }
            }
        }
    }

    fn entering(&self, d: &[f64], bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for c in 0..self.ncols {
            let score = match self.state[c] {
                State::Basic => continue,
                _ if self.upper[c] - self.lower[c] <= 0.0 => continue,
                State::AtLower if d[c] < -COST_TOL => -d[c],
                State::AtUpper if d[c] > COST_TOL => d[c],
                _ => continue,
            };
            if bland {
                return Some(c);
            }
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((c, score));
            }
        }
        best.map(|(c, _)| c)
    }

    fn pivot(&mut self, r: usize, q: usize, d: &mut [f64]) {
        let nc = self.ncols;
        let piv = self.a[r * nc + q];
        {
            let row = &mut self.a[r * nc..(r + 1) * nc];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[q] = 1.0;
        }
        let pivot_row = self.a[r * nc..(r + 1) * nc].to_vec();
        let nz: Vec<usize> = (0..nc).filter(|&c| pivot_row[c] != 0.0).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * nc + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * nc..(i + 1) * nc];
            for &c in &nz {
                row[c] -= f * pivot_row[c];
            }
            row[q] = 0.0;
        }
        let dq = d[q];
        if dq != 0.0 {
            for &c in &nz {
                d[c] -= dq * pivot_row[c];
            }
            d[q] = 0.0;
        }
    }
}
