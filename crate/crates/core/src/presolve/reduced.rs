//! QUBO over the variables presolve could not decide.
//!
//! Free variables are the activity bits of up to `extra_beam_budget` new
//! beams, the assignment bits of every unassigned user to those beams, and
//! the slack bits `1..=room` of every active beam with room left. All other
//! variables are fixed to their presolved values and folded into the
//! matrix, so the reduced energy of a sample equals the full energy of the
//! merged bitstring.
//!
//! When there are at most `W` unassigned users no new beam can overflow, so
//! new beams lose their slack bits together with their capacity terms and
//! merging sets the one slack bit that balances the load. Otherwise new
//! beams keep all `W` slack bits and the capacity terms.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::qubo::{decode, emit_terms, BeamSolution, Conditioner, ProblemInstance, QuboMatrix, VariableLayout};

use super::{PresolveOptions, PresolveState};

#[derive(Debug, Clone)]
pub struct ReducedHamiltonian {
    pub qubo: QuboMatrix,
    /// Original QUBO index of every reduced variable.
    pub free: Vec<usize>,
    pub layout: VariableLayout,
    new_beams: Range<usize>,
    /// New beams carry slack bits and capacity terms.
    new_beam_slack: bool,
    /// Fixed part of the full bitstring; free positions are false.
    base: Vec<bool>,
}

pub fn build_reduced_hamiltonian(
    state: &PresolveState,
    inst: &ProblemInstance,
    options: &PresolveOptions,
) -> Result<ReducedHamiltonian> {
    if state.is_complete() {
        return Err(Error::NothingToAnneal);
    }
    if (state.users, state.beams, state.capacity) != (inst.users(), inst.beams, inst.capacity) {
        return Err(Error::Validation("presolve state does not match instance".into()));
    }
    let free = state.free_variables(options.allow_active_beam_join);
    if free.len() > options.max_free_variables {
        return Err(Error::Capacity {
            what: "reduced Hamiltonian variables",
            required: free.len(),
            limit: options.max_free_variables,
        });
    }
    let layout = inst.layout();
    let lambda = options.lambda.unwrap_or_else(|| inst.default_lambda());
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Validation(format!("lambda {lambda} must be positive")));
    }
    let new_beams = state.new_beams();

    let mut base = vec![false; layout.size()];
    for (i, b) in state.assignment.iter().enumerate() {
        if let Some(b) = b {
            base[layout.a_index(i, *b)] = true;
        }
    }
    for b in 0..state.active_beams {
        base[layout.z_index(b)] = true;
    }
    // Idle beams absorb their whole capacity in the top slack bit.
    for b in new_beams.end..inst.beams {
        base[layout.s_index(b, inst.capacity)] = true;
    }

    let mut is_free = vec![false; layout.size()];
    for &k in &free {
        is_free[k] = true;
    }
    let fixed: BTreeMap<usize, bool> = (0..layout.size())
        .filter(|&k| !is_free[k])
        .map(|k| (k, base[k]))
        .collect();

    let new_beam_slack = state.new_beams_can_overflow();
    let mut cond = Conditioner::new(layout.size(), &fixed)?;
    let keep_capacity = |b: usize| new_beam_slack || !new_beams.contains(&b);
    let offset = emit_terms(inst, lambda, &keep_capacity, &mut |i, j, v| cond.add(i, j, v));
    cond.add_offset(offset);
    let (qubo, remap) = cond.finish();
    debug_assert_eq!(remap, free);

    Ok(ReducedHamiltonian {
        qubo,
        free,
        layout,
        new_beams,
        new_beam_slack,
        base,
    })
}

impl ReducedHamiltonian {
    pub fn size(&self) -> usize {
        self.free.len()
    }

    pub fn new_beams(&self) -> Range<usize> {
        self.new_beams.clone()
    }

    fn check_len(&self, sample: &[bool]) -> Result<()> {
        if sample.len() != self.free.len() {
            return Err(Error::Validation(format!(
                "sample has length {}, reduced Hamiltonian has {} variables",
                sample.len(),
                self.free.len()
            )));
        }
        Ok(())
    }

    pub fn new_beams_have_slack(&self) -> bool {
        self.new_beam_slack
    }

    /// Full bitstring: fixed values and the sample on free positions. New
    /// beams without slack bits get the one that tops their load up to `W`.
    pub fn merged_bits(&self, sample: &[bool]) -> Result<Vec<bool>> {
        self.check_len(sample)?;
        let mut x = self.base.clone();
        for (&k, &bit) in self.free.iter().zip(sample) {
            x[k] = bit;
        }
        if !self.new_beam_slack {
            let cap = self.layout.capacity;
            for b in self.new_beams.clone() {
                let load = (0..self.layout.users)
                    .filter(|&i| x[self.layout.a_index(i, b)])
                    .count();
                debug_assert!(load <= cap);
                if load < cap {
                    x[self.layout.s_index(b, cap - load)] = true;
                }
            }
        }
        Ok(x)
    }

    /// Combines a sample with the presolved assignment and checks the
    /// result against the original constraints.
    pub fn merge(&self, inst: &ProblemInstance, sample: &[bool]) -> Result<BeamSolution> {
        decode(&self.merged_bits(sample)?, inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ProximityGraph;
    use crate::presolve::presolve;
    use crate::qubo::Variable;
    use std::collections::BTreeMap as Map;

    /// Hand-made state: users 0, 1 fill beam 0 (W = 2); user 2 is left over.
    fn hand_state() -> (ProblemInstance, PresolveState) {
        let g = ProximityGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let inst = ProblemInstance::new(g, 3, 2).unwrap();
        let st = PresolveState {
            users: 3,
            beams: 3,
            capacity: 2,
            independent_set: vec![0, 2],
            assignment: vec![Some(0), Some(0), None],
            active_beams: 1,
            unassigned: vec![2],
            residual_capacity: Map::new(),
            lp_lower_bound: 1.5,
            extra_beam_budget: 1,
            lp_iterations: 0,
        };
        (inst, st)
    }

    #[test]
    fn single_leftover_user_with_full_beams() {
        let (inst, st) = hand_state();
        let rh = build_reduced_hamiltonian(&st, &inst, &PresolveOptions::default()).unwrap();
        let vars: Vec<Variable> = rh.free.iter().map(|&k| rh.layout.variable(k)).collect();
        assert_eq!(
            vars,
            vec![
                Variable::Assign { user: 2, beam: 1 },
                Variable::Active { beam: 1 }
            ]
        );
        // Opening the new beam for user 2 is the only feasible completion.
        let sol = rh.merge(&inst, &[true, true]).unwrap();
        assert!(sol.is_feasible());
        assert_eq!(sol.objective, 2);
        assert_eq!(rh.qubo.energy(&[true, true]).unwrap(), 2.0);
        let sol = rh.merge(&inst, &[false, false]).unwrap();
        assert!(sol.violations.iter().any(|v| v.constraint() == "C1"));
        assert!(rh.merge(&inst, &[true]).is_err());
    }

    #[test]
    fn keeps_slack_for_residual_room() {
        let (_, mut st) = hand_state();
        let inst = ProblemInstance::new(ProximityGraph::complete(3), 3, 5).unwrap();
        st.capacity = 5;
        st.residual_capacity = Map::from([(0, 3)]);
        let rh = build_reduced_hamiltonian(&st, &inst, &PresolveOptions::default()).unwrap();
        let slack: Vec<Variable> = rh
            .free
            .iter()
            .map(|&k| rh.layout.variable(k))
            .filter(|v| matches!(v, Variable::Slack { .. }))
            .collect();
        assert_eq!(
            slack,
            (1..=3).map(|w| Variable::Slack { beam: 0, weight: w }).collect::<Vec<_>>()
        );
    }

    #[test]
    fn rejects_complete_state() {
        let inst = ProblemInstance::new(ProximityGraph::complete(3), 3, 3).unwrap();
        let st = presolve(&inst).unwrap();
        assert!(matches!(
            build_reduced_hamiltonian(&st, &inst, &PresolveOptions::default()),
            Err(Error::NothingToAnneal)
        ));
    }

    #[test]
    fn capacity_limit_reports_count() {
        let (inst, st) = hand_state();
        let opts = PresolveOptions {
            max_free_variables: 1,
            ..Default::default()
        };
        assert!(matches!(
            build_reduced_hamiltonian(&st, &inst, &opts),
            Err(Error::Capacity { required: 2, limit: 1, .. })
        ));
    }

    #[test]
    fn active_beam_join_frees_assignment_bits() {
        let (_, mut st) = hand_state();
        let inst = ProblemInstance::new(ProximityGraph::complete(3), 3, 3).unwrap();
        st.capacity = 3;
        st.residual_capacity = Map::from([(0, 1)]);
        let opts = PresolveOptions {
            allow_active_beam_join: true,
            ..Default::default()
        };
        let rh = build_reduced_hamiltonian(&st, &inst, &opts).unwrap();
        let idx = rh.layout.a_index(2, 0);
        let k = rh.free.iter().position(|&f| f == idx).expect("joinable");
        // Join beam 0: a_20 = 1, no new beam, slack of beam 0 stays 0.
        let mut y = vec![false; rh.size()];
        y[k] = true;
        let sol = rh.merge(&inst, &y).unwrap();
        assert!(sol.is_feasible());
        assert_eq!(sol.objective, 1);
        assert_eq!(rh.qubo.energy(&y).unwrap(), 1.0);
    }

    #[test]
    fn overflowing_new_beams_keep_their_slack() {
        // K4 with W = 2: user 0 sits alone on beam 0, three users are left.
        let inst = ProblemInstance::new(ProximityGraph::complete(4), 4, 2).unwrap();
        let st = PresolveState {
            users: 4,
            beams: 4,
            capacity: 2,
            independent_set: vec![0],
            assignment: vec![Some(0), None, None, None],
            active_beams: 1,
            unassigned: vec![1, 2, 3],
            residual_capacity: Map::from([(0, 1)]),
            lp_lower_bound: 2.0,
            extra_beam_budget: 3,
            lp_iterations: 0,
        };
        let rh = build_reduced_hamiltonian(&st, &inst, &PresolveOptions::default()).unwrap();
        assert!(rh.new_beams_have_slack());
        assert_eq!(rh.size(), 3 * (1 + 3 + 2) + 1);
        let (full, _) = crate::qubo::build_qubo(&inst, inst.default_lambda()).unwrap();
        for m in 0u32..1 << 12 {
            // Spread a 12-bit pattern over the first 12 free bits.
            let y: Vec<bool> = (0..rh.size()).map(|k| k < 12 && m >> k & 1 == 1).collect();
            let x = rh.merged_bits(&y).unwrap();
            assert_eq!(rh.qubo.energy(&y).unwrap(), full.energy(&x).unwrap());
        }
        // All three leftovers in beam 1 is penalised.
        let mut y = vec![false; rh.size()];
        for v in [
            Variable::Active { beam: 1 },
            Variable::Assign { user: 1, beam: 1 },
            Variable::Assign { user: 2, beam: 1 },
            Variable::Assign { user: 3, beam: 1 },
        ] {
            let k = rh.free.iter().position(|&f| f == rh.layout.index_of(v)).unwrap();
            y[k] = true;
        }
        let sol = rh.merge(&inst, &y).unwrap();
        assert!(sol.violations.iter().any(|v| v.constraint() == "C4"));
        assert!(rh.qubo.energy(&y).unwrap() > 3.0);
    }
}
