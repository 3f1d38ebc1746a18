//! Exact offline optimum by branch-and-bound, for desk-scale instances.
//!
//! Vectors are branched in decreasing L1 order. Each vector goes into an open bin
//! (skipping bins whose sums duplicate an earlier candidate) or opens one new bin.
//! The incumbent starts from FirstFit-decreasing; nodes are pruned against a
//! capacity bound on the unplaced remainder.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{opt_load_lower_bound, validate_packing, Load2, Packing, Vec2};
use crate::rational::{ceil_int, int, Rational};

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub struct ExactSolution {
    pub opt: usize,
    pub witness: Packing,
    pub nodes: u64,
}

struct Search {
    items: Vec<Vec2>,
    /// Remaining (x, y, l1) totals from position `i` to the end.
    suffix: Vec<(Rational, Rational, Rational)>,
    sums: Vec<Load2>,
    assignment: Vec<usize>,
    best: usize,
    best_assignment: Vec<usize>,
    nodes: u64,
    budget: u64,
    lower: usize,
}

impl Search {
    fn extra_bins_needed(&self, pos: usize) -> usize {
        let (rx, ry, rl) = self.suffix[pos];
        let open = int(self.sums.len() as i128);
        let fx = open - self.sums.iter().map(|s| s.x).sum::<Rational>();
        let fy = open - self.sums.iter().map(|s| s.y).sum::<Rational>();
        let fl = open * int(2) - self.sums.iter().map(Load2::l1).sum::<Rational>();
        let need = ceil_int(&(rx - fx))
            .max(ceil_int(&(ry - fy)))
            .max(ceil_int(&((rl - fl) / int(2))))
            .max(0);
        need as usize
    }

    /// Returns `false` when the budget ran out.
    fn descend(&mut self, pos: usize) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            return false;
        }
        if pos == self.items.len() {
            if self.sums.len() < self.best {
                self.best = self.sums.len();
                self.best_assignment = self.assignment.clone();
            }
            return true;
        }
        if self.sums.len() + self.extra_bins_needed(pos) >= self.best {
            return true;
        }
        let v = self.items[pos];
        let mut tried: Vec<Load2> = Vec::new();
        for b in 0..self.sums.len() {
            let next = self.sums[b].add(&v);
            if !next.within_unit() || tried.contains(&self.sums[b]) {
                continue;
            }
            tried.push(self.sums[b]);
            let saved = self.sums[b];
            self.sums[b] = next;
            self.assignment[pos] = b;
            let ok = self.descend(pos + 1);
            self.sums[b] = saved;
            if !ok {
                return false;
            }
            if self.best == self.lower {
                return true;
            }
        }
        if self.sums.len() + 1 < self.best {
            self.sums.push(Load2::default().add(&v));
            self.assignment[pos] = self.sums.len() - 1;
            let ok = self.descend(pos + 1);
            self.sums.pop();
            if !ok {
                return false;
            }
        }
        true
    }
}

fn first_fit_decreasing(items: &[Vec2]) -> Vec<usize> {
    let mut sums: Vec<Load2> = Vec::new();
    items
        .iter()
        .map(|v| match sums.iter().position(|s| s.add(v).within_unit()) {
            Some(b) => {
                sums[b] = sums[b].add(v);
                b
            }
            None => {
                sums.push(Load2::default().add(v));
                sums.len() - 1
            }
        })
        .collect()
}

fn groups(items: &[Vec2], assignment: &[usize]) -> Packing {
    let count = assignment.iter().map(|&b| b + 1).max().unwrap_or(0);
    let mut groups = vec![Vec::new(); count];
    for (v, &b) in items.iter().zip(assignment) {
        groups[b].push(*v);
    }
    Packing::from_groups(groups)
}

/// Minimum number of bins for `sigma`, with a witness packing.
///
/// Fails with [`Error::BudgetExhausted`] carrying the proven interval when more
/// than `budget` search nodes would be needed.
pub fn exact_opt(sigma: &[Vec2], budget: u64) -> Result<ExactSolution> {
    let mut items = sigma.to_vec();
    items.sort_by(|a, b| b.l1_norm().cmp(&a.l1_norm()).then(b.cmp(a)));
    let n = items.len();

    let mut suffix = vec![(Rational::zero(), Rational::zero(), Rational::zero()); n + 1];
    for i in (0..n).rev() {
        let (x, y, l) = suffix[i + 1];
        suffix[i] = (x + items[i].x(), y + items[i].y(), l + items[i].l1_norm());
    }
    let (tx, ty, _) = suffix[0];
    let lower = opt_load_lower_bound(&items)
        .max(ceil_int(&tx) as usize)
        .max(ceil_int(&ty) as usize);

    let ffd = first_fit_decreasing(&items);
    let ffd_bins = ffd.iter().map(|&b| b + 1).max().unwrap_or(0);
    if ffd_bins <= lower {
        return Ok(ExactSolution {
            opt: ffd_bins,
            witness: groups(&items, &ffd),
            nodes: 0,
        });
    }

    let mut search = Search {
        items,
        suffix,
        sums: Vec::new(),
        assignment: vec![0; n],
        best: ffd_bins,
        best_assignment: ffd,
        nodes: 0,
        budget,
        lower,
    };
    if !search.descend(0) {
        return Err(Error::BudgetExhausted {
            lower,
            upper: search.best,
        });
    }
    Ok(ExactSolution {
        opt: search.best,
        witness: groups(&search.items, &search.best_assignment),
        nodes: search.nodes,
    })
}

/// `witness` is a valid packing of `sigma` with exactly `opt_claim` bins.
pub fn verify_witness(opt_claim: usize, witness: &Packing, sigma: &[Vec2]) -> bool {
    witness.len() == opt_claim && validate_packing(witness, sigma).is_ok()
}

/// Capacity check used by callers that want a quick feasibility test of a whole set.
pub fn fits_one_bin(vectors: &[Vec2]) -> bool {
    let s = vectors.iter().fold(Load2::default(), |acc, v| acc.add(v));
    s.x <= Rational::one() && s.y <= Rational::one()
}
