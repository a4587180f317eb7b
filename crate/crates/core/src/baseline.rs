//! Best Fit placement heuristic.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qubo::{BeamSolution, ProblemInstance};

/// Places users one at a time, in `order`, into the fullest open beam that
/// can still take them: every current member must be adjacent to the user
/// and the load must be below capacity. Ties go to the lowest beam index.
/// A user that fits nowhere opens the next beam.
pub fn best_fit(inst: &ProblemInstance, order: &[usize]) -> Result<BeamSolution> {
    let n = inst.users();
    check_permutation(order, n)?;
    let g = &inst.graph;
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut beam_of = vec![0usize; n];
    for &i in order {
        let target = members
            .iter()
            .enumerate()
            .filter(|(_, m)| m.len() < inst.capacity && m.iter().all(|&j| g.has_edge(i, j)))
            .max_by(|(b1, m1), (b2, m2)| m1.len().cmp(&m2.len()).then(b2.cmp(b1)))
            .map(|(b, _)| b);
        let b = match target {
            Some(b) => b,
            None if members.len() < inst.beams => {
                members.push(Vec::new());
                members.len() - 1
            }
            None => return Err(Error::BudgetExhausted(inst.beams)),
        };
        members[b].push(i);
        beam_of[i] = b;
    }
    let mut assignment = vec![vec![false; inst.beams]; n];
    for (i, &b) in beam_of.iter().enumerate() {
        assignment[i][b] = true;
    }
    let active = (0..inst.beams).map(|b| b < members.len()).collect();
    BeamSolution::new(assignment, active, inst)
}

pub fn input_order(n: usize) -> Vec<usize> {
    (0..n).collect()
}

pub fn shuffled_order(n: usize, seed: u64) -> Vec<usize> {
    let mut order = input_order(n);
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::Validation(format!(
            "order has {} entries for {n} users",
            order.len()
        )));
    }
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Validation(format!("order is not a permutation (entry {i})")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ProximityGraph;

    #[test]
    fn edgeless_graph_gets_one_beam_per_user() {
        let inst = ProblemInstance::new(ProximityGraph::new(3), 3, 2).unwrap();
        let sol = best_fit(&inst, &input_order(3)).unwrap();
        assert!(sol.is_feasible());
        assert_eq!(sol.objective, 3);
        for b in 0..3 {
            assert_eq!(sol.members(b), vec![b]);
        }
    }

    #[test]
    fn complete_graph_fills_pairs_then_a_singleton() {
        let inst = ProblemInstance::new(ProximityGraph::complete(5), 5, 2).unwrap();
        let sol = best_fit(&inst, &input_order(5)).unwrap();
        assert!(sol.is_feasible());
        assert_eq!(sol.objective, 3);
        assert_eq!(sol.members(0), vec![0, 1]);
        assert_eq!(sol.members(1), vec![2, 3]);
        assert_eq!(sol.members(2), vec![4]);
    }

    #[test]
    fn path_needs_two_beams() {
        let g = ProximityGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let inst = ProblemInstance::new(g, 3, 3).unwrap();
        let sol = best_fit(&inst, &[0, 1, 2]).unwrap();
        assert_eq!(sol.objective, 2);
        assert_eq!(sol.members(0), vec![0, 1]);
        assert_eq!(sol.members(1), vec![2]);
    }

    #[test]
    fn prefers_the_fullest_beam() {
        // 0-1-2 is a triangle, 3 is tied to 2 only, 4 to everyone.
        let g = ProximityGraph::from_edges(
            5,
            &[(0, 1), (0, 2), (1, 2), (2, 3), (0, 4), (1, 4), (2, 4), (3, 4)],
        )
        .unwrap();
        let inst = ProblemInstance::new(g, 5, 4).unwrap();
        let sol = best_fit(&inst, &[0, 3, 1, 4, 2]).unwrap();
        // 0 -> beam 0, 3 -> beam 1, 1 -> beam 0, 4 -> beam 0 (load 2 beats 1),
        // 2 -> beam 0.
        assert_eq!(sol.members(0), vec![0, 1, 2, 4]);
        assert_eq!(sol.members(1), vec![3]);
    }

    #[test]
    fn budget_and_order_errors() {
        let inst = ProblemInstance::new(ProximityGraph::new(3), 2, 2).unwrap();
        assert!(matches!(best_fit(&inst, &[0, 1, 2]), Err(Error::BudgetExhausted(2))));
        let inst = ProblemInstance::new(ProximityGraph::new(3), 3, 2).unwrap();
        assert!(best_fit(&inst, &[0, 1]).is_err());
        assert!(best_fit(&inst, &[0, 1, 1]).is_err());
        assert!(best_fit(&inst, &[0, 1, 3]).is_err());
    }

    #[test]
    fn shuffled_order_is_a_seeded_permutation() {
        let a = shuffled_order(20, 9);
        assert_eq!(a, shuffled_order(20, 9));
        let mut s = a.clone();
        s.sort_unstable();
        assert_eq!(s, input_order(20));
    }
}
