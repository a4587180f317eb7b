//! Exact minimization by bucket elimination.
//!
//! Cost is exponential in the induced width of the interaction graph under a
//! min-fill ordering rather than in the variable count, so sparse QUBOs far
//! past the enumeration cap (a full beam-placement QUBO with 5 users has 45
//! variables but width around 15) are still solved exactly.

use std::collections::BTreeSet;
use std::time::Instant;

use super::{Backend, SampleResult};
use crate::error::{Error, Result};
use crate::qubo::QuboMatrix;

pub const DEFAULT_MAX_WIDTH: usize = 22;

struct Factor {
    scope: Vec<usize>,
    /// Bit `t` of the index is the value of `scope[t]`.
    table: Vec<f64>,
}

struct Bucket {
    var: usize,
    scope: Vec<usize>,
    /// Minimizing value of `var` for each assignment of `scope`.
    choice: Vec<bool>,
}

fn neighbourhoods(q: &QuboMatrix) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); q.size()];
    for (i, j, v) in q.entries() {
        if i != j && v != 0.0 {
            adj[i].insert(j);
            adj[j].insert(i);
        }
    }
    adj
}

/// Greedy min-fill order (ties to lower degree, then lower index) and its
/// induced width: the largest neighbourhood at elimination time.
pub fn elimination_order(q: &QuboMatrix) -> (Vec<usize>, usize) {
    let mut adj = neighbourhoods(q);
    let mut gone = vec![false; q.size()];
    let mut order = Vec::with_capacity(q.size());
    let mut width = 0;
    for _ in 0..q.size() {
        let v = (0..q.size())
            .filter(|&v| !gone[v])
            .min_by_key(|&v| {
                let nb: Vec<usize> = adj[v].iter().copied().collect();
                let mut fill = 0usize;
                for (k, &a) in nb.iter().enumerate() {
                    fill += nb[k + 1..].iter().filter(|&&b| !adj[a].contains(&b)).count();
                }
                (fill, nb.len(), v)
            })
            .expect("a variable is left");
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        width = width.max(nb.len());
        for &a in &nb {
            adj[a].remove(&v);
            for &b in &nb {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        adj[v].clear();
        gone[v] = true;
        order.push(v);
    }
    (order, width)
}

/// Exact minimum of `q`. Fails with a capacity error when the induced width
/// exceeds `max_width`, since tables hold `2^width` entries.
pub fn solve_by_elimination(q: &QuboMatrix, max_width: usize) -> Result<SampleResult> {
    let started = Instant::now();
    let n = q.size();
    let (order, width) = elimination_order(q);
    if width > max_width {
        return Err(Error::Capacity {
            what: "elimination width",
            required: width,
            limit: max_width,
        });
    }

    let mut factors: Vec<Option<Factor>> = Vec::new();
    let mut by_var: Vec<Vec<usize>> = vec![Vec::new(); n];
    let push = |factors: &mut Vec<Option<Factor>>, by_var: &mut Vec<Vec<usize>>, f: Factor| {
        for &v in &f.scope {
            by_var[v].push(factors.len());
        }
        factors.push(Some(f));
    };
    for (i, j, v) in q.entries() {
        let f = if i == j {
            Factor {
                scope: vec![i],
                table: vec![0.0, v],
            }
        } else {
            Factor {
                scope: vec![i.min(j), i.max(j)],
                table: vec![0.0, 0.0, 0.0, v],
            }
        };
        push(&mut factors, &mut by_var, f);
    }

    let mut constant = q.offset;
    let mut buckets = Vec::with_capacity(n);
    for &v in &order {
        let mine: Vec<Factor> = by_var[v].iter().filter_map(|&k| factors[k].take()).collect();
        let scope: Vec<usize> = mine
            .iter()
            .flat_map(|f| f.scope.iter().copied())
            .filter(|&u| u != v)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        // For each factor: bit masks in the new scope feeding each of its
        // positions, and the position of `v` in it.
        let maps: Vec<(Vec<usize>, usize)> = mine
            .iter()
            .map(|f| {
                let mut at_v = 0;
                let pos = f
                    .scope
                    .iter()
                    .enumerate()
                    .map(|(t, &u)| {
                        if u == v {
                            at_v = 1 << t;
                            usize::MAX
                        } else {
                            scope.binary_search(&u).expect("scope holds u")
                        }
                    })
                    .collect();
                (pos, at_v)
            })
            .collect();
        let size = 1usize << scope.len();
        let mut table = vec![0.0; size];
        let mut choice = vec![false; size];
        for idx in 0..size {
            let (mut e0, mut e1) = (0.0, 0.0);
            for (f, (pos, at_v)) in mine.iter().zip(&maps) {
                let mut base = 0;
                for (t, &p) in pos.iter().enumerate() {
                    if p != usize::MAX && idx >> p & 1 == 1 {
                        base |= 1 << t;
                    }
                }
                e0 += f.table[base];
                e1 += f.table[base | at_v];
            }
            if e1 < e0 {
                table[idx] = e1;
                choice[idx] = true;
            } else {
                table[idx] = e0;
            }
        }
        if scope.is_empty() {
            constant += table[0];
        } else {
            push(
                &mut factors,
                &mut by_var,
                Factor {
                    scope: scope.clone(),
                    table,
                },
            );
        }
        buckets.push(Bucket { var: v, scope, choice });
    }
    debug_assert!(constant.is_finite());

    let mut x = vec![false; n];
    for b in buckets.iter().rev() {
        let idx = b
            .scope
            .iter()
            .enumerate()
            .fold(0usize, |acc, (t, &u)| acc | (usize::from(x[u]) << t));
        x[b.var] = b.choice[idx];
    }
    SampleResult::from_reads(q, vec![x], Backend::Exact, started)
}
