//! Strategy A_k for unrestricted vectors.
//!
//! The unit square is cut into a `k × k` grid of boxes. A vector with both
//! coordinates at most `40/k` is short; every other vector is long and is
//! rounded up to the upper corner of its box (k-scaling). The advice is the
//! number of long vectors per box. The strategy packs the scaled long vectors
//! optimally, opens one critical bin per bin of that packing with a reserved
//! slot per scaled vector, then serves long vectors into matching slots and
//! short vectors by FirstFit on the virtual contents.
//!
//! Virtual contents are tracked coordinate-wise: actual sums plus the corners
//! of every unused slot. A short vector is admitted only if those stay inside
//! the unit square, so the bin remains feasible whatever later arrives.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use crate::advice::{read_scaled_counts, AdvicePayload, BitString, TapeReader};
use crate::engine::{OnlineStrategy, Placement};
use crate::error::{Error, Result};
use crate::exact::{exact_opt, DEFAULT_NODE_BUDGET};
pub use crate::model::BoxIndex;
use crate::model::{Bin, BinLabel, Load2, ReservedSlot, SlotKind, Vec2};
use crate::rational::{ceil_int, int, ratio, Rational};

/// How strictly `k` is validated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScaledMode {
    /// Even `k >= 100`.
    Desk,
    /// Even `k >= 640`, the range the 5/2 guarantee is stated for. Slow.
    Theory,
    /// Any `k >= 1`, including odd `k` for the ratio-3 lower-bound instance.
    Diagnostic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScaledParams {
    k: u32,
    mode: ScaledMode,
}

impl ScaledParams {
    pub fn new(k: u32, mode: ScaledMode) -> Result<Self> {
        let ok = match mode {
            ScaledMode::Desk => k >= 100 && k.is_multiple_of(2),
            ScaledMode::Theory => k >= 640 && k.is_multiple_of(2),
            ScaledMode::Diagnostic => k >= 1,
        };
        if !ok || k > 4096 {
            return Err(Error::InvalidParams(format!(
                "k = {k} not allowed in {mode:?} mode"
            )));
        }
        Ok(ScaledParams { k, mode })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn mode(&self) -> ScaledMode {
        self.mode
    }
}

fn cell(coord: Rational, k: u32) -> u32 {
    ceil_int(&(coord * int(k as i128))).max(1) as u32
}

/// The `(i, j)` box holding `v`; zero coordinates fall in the first row/column.
pub fn box_of(v: &Vec2, k: u32) -> BoxIndex {
    BoxIndex {
        i: cell(v.x(), k),
        j: cell(v.y(), k),
    }
}

/// Upper corner `(i/k, j/k)` of a box.
pub fn box_corner(b: BoxIndex, k: u32) -> Vec2 {
    Vec2::new(ratio(b.i as i128, k as i128), ratio(b.j as i128, k as i128))
        .expect("box indices lie in 1..=k")
}

/// `v` rounded up to its box corner.
pub fn k_scale(v: &Vec2, k: u32) -> Vec2 {
    box_corner(box_of(v, k), k)
}

pub fn short_threshold(k: u32) -> Rational {
    ratio(40, k as i128)
}

/// Both coordinates at most `40/k`.
pub fn is_short(v: &Vec2, k: u32) -> bool {
    let th = short_threshold(k);
    v.x() <= th && v.y() <= th
}

/// Long-vector count per box.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoxCounts(BTreeMap<BoxIndex, u64>);

impl BoxCounts {
    pub fn add(&mut self, b: BoxIndex, count: u64) {
        if count > 0 {
            *self.0.entry(b).or_insert(0) += count;
        }
    }

    pub fn get(&self, b: BoxIndex) -> u64 {
        self.0.get(&b).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (BoxIndex, u64)> + '_ {
        self.0.iter().map(|(b, c)| (*b, *c))
    }

    pub fn occupied(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    /// Counts of the long vectors of `vectors`.
    pub fn of_long_vectors(vectors: &[Vec2], k: u32) -> Self {
        let mut counts = BoxCounts::default();
        for v in vectors.iter().filter(|v| !is_short(v, k)) {
            counts.add(box_of(v, k), 1);
        }
        counts
    }

    /// Row-major `(i, j)` dense layout with `k²` entries.
    pub fn to_dense(&self, k: u32) -> Vec<u64> {
        let k = k as usize;
        let mut out = vec![0; k * k];
        for (b, c) in self.iter() {
            out[(b.i as usize - 1) * k + (b.j as usize - 1)] = c;
        }
        out
    }

    pub fn from_dense(k: u32, values: &[u64]) -> Self {
        let mut counts = BoxCounts::default();
        for (idx, &c) in values.iter().enumerate() {
            let b = BoxIndex {
                i: (idx / k as usize) as u32 + 1,
                j: (idx % k as usize) as u32 + 1,
            };
            counts.add(b, c);
        }
        counts
    }
}

/// A multiset of boxes that fits one bin after scaling: `Σ i <= k` and `Σ j <= k`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinType {
    boxes: Vec<(BoxIndex, u32)>,
}

impl BinType {
    pub fn from_boxes(mut items: Vec<BoxIndex>) -> Self {
        items.sort();
        let mut boxes: Vec<(BoxIndex, u32)> = Vec::new();
        for b in items {
            match boxes.last_mut() {
                Some((last, m)) if *last == b => *m += 1,
                _ => boxes.push((b, 1)),
            }
        }
        BinType { boxes }
    }

    pub fn boxes(&self) -> &[(BoxIndex, u32)] {
        &self.boxes
    }

    pub fn items(&self) -> impl Iterator<Item = BoxIndex> + '_ {
        self.boxes
            .iter()
            .flat_map(|(b, m)| std::iter::repeat_n(*b, *m as usize))
    }

    pub fn cardinality(&self) -> u32 {
        self.boxes.iter().map(|(_, m)| m).sum()
    }

    pub fn is_feasible(&self, k: u32) -> bool {
        let (si, sj) = self.boxes.iter().fold((0u64, 0u64), |(si, sj), (b, m)| {
            (si + b.i as u64 * *m as u64, sj + b.j as u64 * *m as u64)
        });
        si <= k as u64 && sj <= k as u64
    }

    /// Sum of L1 norms of the scaled vectors, `Σ (i + j)/k`.
    pub fn scaled_l1(&self, k: u32) -> Rational {
        let units: u64 = self
            .boxes
            .iter()
            .map(|(b, m)| (b.i + b.j) as u64 * *m as u64)
            .sum();
        ratio(units as i128, k as i128)
    }
}

impl fmt::Display for BinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .boxes
            .iter()
            .map(|(b, m)| {
                if *m == 1 {
                    b.to_string()
                } else {
                    format!("{b}x{m}")
                }
            })
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMethod {
    /// Dynamic programming when the occupied-box state space is small, otherwise branch-and-bound.
    Auto,
    Dp,
    BranchAndBound,
}

/// An optimal packing of the k-scaled long vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledSolution {
    pub bins: usize,
    /// One entry per bin, lexicographically smallest type first; critical bins open in this order.
    pub per_bin: Vec<BinType>,
    pub method: SolverMethod,
}

impl ScaledSolution {
    /// Distinct bin types with multiplicities, sorted.
    pub fn types(&self) -> Vec<(BinType, usize)> {
        let mut map: BTreeMap<&BinType, usize> = BTreeMap::new();
        for t in &self.per_bin {
            *map.entry(t).or_insert(0) += 1;
        }
        map.into_iter().map(|(t, c)| (t.clone(), c)).collect()
    }
}

/// Largest mixed-radix state table the DP will allocate.
pub const DP_STATE_LIMIT: u64 = 1 << 20;

pub fn solve_scaled_opt(counts: &BoxCounts, k: u32) -> Result<ScaledSolution> {
    solve_scaled_opt_with(counts, k, SolverMethod::Auto, DEFAULT_NODE_BUDGET)
}

pub fn solve_scaled_opt_with(
    counts: &BoxCounts,
    k: u32,
    method: SolverMethod,
    node_budget: u64,
) -> Result<ScaledSolution> {
    for (b, _) in counts.iter() {
        if b.i == 0 || b.j == 0 || b.i > k || b.j > k {
            return Err(Error::InvalidParams(format!(
                "box {b} outside the {k}x{k} grid"
            )));
        }
    }
    let states = counts
        .iter()
        .try_fold(1u64, |acc, (_, c)| acc.checked_mul(c + 1))
        .unwrap_or(u64::MAX);
    match method {
        SolverMethod::Dp => {
            if states > DP_STATE_LIMIT {
                return Err(Error::InvalidParams(format!(
                    "{states} DP states exceed the limit {DP_STATE_LIMIT}"
                )));
            }
            Ok(BinTypeDp::new(counts, k).solve())
        }
        SolverMethod::BranchAndBound => solve_by_search(counts, k, node_budget),
        SolverMethod::Auto if states <= DP_STATE_LIMIT => Ok(BinTypeDp::new(counts, k).solve()),
        SolverMethod::Auto => solve_by_search(counts, k, node_budget),
    }
}

/// Memoised recurrence `P(n) = 1 + min_t P(n - t)` over occupied boxes only.
///
/// Only bin types that contain the first remaining box and are maximal with
/// respect to the remaining counts are tried; some optimal packing always uses one.
struct BinTypeDp {
    k: u32,
    boxes: Vec<BoxIndex>,
    caps: Vec<u64>,
    strides: Vec<u64>,
    memo: Vec<u32>,
}

const UNKNOWN: u32 = u32::MAX;

impl BinTypeDp {
    fn new(counts: &BoxCounts, k: u32) -> Self {
        let (boxes, caps): (Vec<_>, Vec<_>) = counts.iter().unzip();
        let mut strides = Vec::with_capacity(caps.len());
        let mut acc = 1u64;
        for c in &caps {
            strides.push(acc);
            acc *= c + 1;
        }
        BinTypeDp {
            k,
            boxes,
            caps,
            strides,
            memo: vec![UNKNOWN; acc as usize],
        }
    }

    fn index(&self, remaining: &[u64]) -> usize {
        remaining
            .iter()
            .zip(&self.strides)
            .map(|(c, s)| c * s)
            .sum::<u64>() as usize
    }

    /// Calls `visit` with every maximal feasible take-vector containing the first box.
    fn for_each_type(&self, remaining: &[u64], visit: &mut dyn FnMut(&[u64])) {
        let Some(first) = remaining.iter().position(|&c| c > 0) else {
            return;
        };
        let mut take = vec![0u64; remaining.len()];
        self.enumerate(remaining, first, first, 0, 0, &mut take, visit);
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        remaining: &[u64],
        first: usize,
        pos: usize,
        si: u64,
        sj: u64,
        take: &mut Vec<u64>,
        visit: &mut dyn FnMut(&[u64]),
    ) {
        let k = self.k as u64;
        if pos == remaining.len() {
            let maximal = (0..remaining.len()).all(|b| {
                take[b] == remaining[b]
                    || si + self.boxes[b].i as u64 > k
                    || sj + self.boxes[b].j as u64 > k
            });
            if maximal {
                visit(take);
            }
            return;
        }
        let (bi, bj) = (self.boxes[pos].i as u64, self.boxes[pos].j as u64);
        let fit = ((k - si) / bi).min((k - sj) / bj).min(remaining[pos]);
        let low = u64::from(pos == first);
        if low > fit {
            return;
        }
        for m in (low..=fit).rev() {
            take[pos] = m;
            self.enumerate(
                remaining,
                first,
                pos + 1,
                si + m * bi,
                sj + m * bj,
                take,
                visit,
            );
        }
        take[pos] = 0;
    }

    fn value(&mut self, remaining: &[u64]) -> u32 {
        let idx = self.index(remaining);
        if self.memo[idx] != UNKNOWN {
            return self.memo[idx];
        }
        if remaining.iter().all(|&c| c == 0) {
            self.memo[idx] = 0;
            return 0;
        }
        let mut candidates: Vec<Vec<u64>> = Vec::new();
        self.for_each_type(remaining, &mut |take| {
            candidates.push(remaining.iter().zip(take).map(|(r, t)| r - t).collect());
        });
        let best = candidates
            .iter()
            .map(|next| self.value(next))
            .min()
            .expect("a single vector always fits")
            + 1;
        self.memo[idx] = best;
        best
    }

    fn solve(mut self) -> ScaledSolution {
        let mut remaining = self.caps.clone();
        let bins = self.value(&remaining) as usize;
        let mut per_bin = Vec::with_capacity(bins);
        while remaining.iter().any(|&c| c > 0) {
            let target = self.value(&remaining) - 1;
            let mut chosen: Option<Vec<u64>> = None;
            let mut candidates: Vec<Vec<u64>> = Vec::new();
            self.for_each_type(&remaining, &mut |take| candidates.push(take.to_vec()));
            for take in candidates {
                let next: Vec<u64> = remaining.iter().zip(&take).map(|(r, t)| r - t).collect();
                if self.value(&next) == target {
                    chosen = Some(take);
                    break;
                }
            }
            let take = chosen.expect("reconstruction follows the memo");
            let items = take
                .iter()
                .enumerate()
                .flat_map(|(b, &m)| std::iter::repeat_n(self.boxes[b], m as usize))
                .collect();
            per_bin.push(BinType::from_boxes(items));
            for (r, t) in remaining.iter_mut().zip(&take) {
                *r -= t;
            }
        }
        per_bin.sort();
        ScaledSolution {
            bins,
            per_bin,
            method: SolverMethod::Dp,
        }
    }
}

fn solve_by_search(counts: &BoxCounts, k: u32, node_budget: u64) -> Result<ScaledSolution> {
    let scaled: Vec<Vec2> = counts
        .iter()
        .flat_map(|(b, c)| std::iter::repeat_n(box_corner(b, k), c as usize))
        .collect();
    let sol = exact_opt(&scaled, node_budget)?;
    let mut per_bin: Vec<BinType> = sol
        .witness
        .bins
        .iter()
        .map(|bin| BinType::from_boxes(bin.contents().iter().map(|v| box_of(v, k)).collect()))
        .collect();
    per_bin.sort();
    Ok(ScaledSolution {
        bins: sol.opt,
        per_bin,
        method: SolverMethod::BranchAndBound,
    })
}

/// Strategy A_k.
#[derive(Debug)]
pub struct ScaledStrategy {
    params: ScaledParams,
    bins: Vec<Bin>,
    slots: HashMap<BoxIndex, VecDeque<(usize, usize)>>,
    solution: ScaledSolution,
    bits_read: u64,
}

impl ScaledStrategy {
    pub fn from_tape(params: ScaledParams, tape: &BitString) -> Result<Self> {
        let mut reader = TapeReader::new(tape);
        let counts = read_scaled_counts(&mut reader, params.k)?;
        let solution = solve_scaled_opt(&counts, params.k)?;
        let k = params.k;
        let mut bins = Vec::with_capacity(solution.bins);
        let mut slots: HashMap<BoxIndex, VecDeque<(usize, usize)>> = HashMap::new();
        for (idx, bin_type) in solution.per_bin.iter().enumerate() {
            let reserved: Vec<ReservedSlot> = bin_type
                .items()
                .map(|b| ReservedSlot {
                    kind: SlotKind::Scaled(b),
                    reserved_l1: ratio((b.i + b.j) as i128, k as i128),
                    used: false,
                })
                .collect();
            for (s, slot) in reserved.iter().enumerate() {
                if let SlotKind::Scaled(b) = slot.kind {
                    slots.entry(b).or_default().push_back((idx, s));
                }
            }
            bins.push(Bin::with_reservations(
                BinLabel::ScaledCritical { bin_type: idx },
                reserved,
            ));
        }
        Ok(ScaledStrategy {
            params,
            bins,
            slots,
            solution,
            bits_read: reader.bits_read() as u64,
        })
    }

    pub fn from_payload(params: ScaledParams, payload: &AdvicePayload) -> Result<Self> {
        Self::from_tape(params, &payload.to_tape()?)
    }

    pub fn params(&self) -> ScaledParams {
        self.params
    }

    /// The scaled packing the critical bins were opened from.
    pub fn solution(&self) -> &ScaledSolution {
        &self.solution
    }

    fn virtual_contents(&self, bin: &Bin) -> Load2 {
        bin.reserved_slots()
            .iter()
            .filter(|s| !s.used)
            .fold(bin.sum(), |acc, s| match s.kind {
                SlotKind::Scaled(b) => acc.add(&box_corner(b, self.params.k)),
                _ => acc,
            })
    }
}

impl OnlineStrategy for ScaledStrategy {
    fn id(&self) -> String {
        format!("a-k{}", self.params.k)
    }

    fn step(&mut self, v: &Vec2) -> Result<Placement> {
        let k = self.params.k;
        if !is_short(v, k) {
            let b = box_of(v, k);
            let (bin, slot) = self
                .slots
                .get_mut(&b)
                .and_then(VecDeque::pop_front)
                .ok_or_else(|| Error::NoMatchingSlot(format!("{v} in box {b}")))?;
            self.bins[bin].fill_slot(slot, *v);
            return Ok(Placement::Existing(bin));
        }
        let target = self
            .bins
            .iter()
            .position(|bin| self.virtual_contents(bin).add(v).within_unit());
        match target {
            Some(i) => {
                self.bins[i].push(*v);
                Ok(Placement::Existing(i))
            }
            None => {
                let mut bin = Bin::new(BinLabel::Overflow);
                bin.push(*v);
                self.bins.push(bin);
                Ok(Placement::NewBin)
            }
        }
    }

    fn bins(&self) -> &[Bin] {
        &self.bins
    }

    fn take_bins(&mut self) -> Vec<Bin> {
        std::mem::take(&mut self.bins)
    }

    fn advice_bits_read(&self) -> u64 {
        self.bits_read
    }
}

/// Destination of one vector when a bin's scaled contents are split up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepackTarget {
    BinA,
    BinB,
    /// Capacity `(1/2, 1/2)`.
    HalfBin,
}

/// Splits the k-scaled versions of one bin's long vectors over two unit bins and
/// one half bin, by exhaustive search. `Ok(None)` means no such split exists.
pub fn repack_two_and_half(contents: &[Vec2], k: u32) -> Result<Option<Vec<RepackTarget>>> {
    if k < 100 || !k.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "k = {k} must be even and at least 100"
        )));
    }
    let sum = contents.iter().fold(Load2::default(), |acc, v| acc.add(v));
    if !sum.within_unit() {
        return Err(Error::Precondition(format!(
            "contents overflow one bin: {sum}"
        )));
    }
    if let Some(v) = contents.iter().find(|v| is_short(v, k)) {
        return Err(Error::Precondition(format!("{v} is short for k = {k}")));
    }
    let scaled: Vec<Vec2> = contents.iter().map(|v| k_scale(v, k)).collect();
    let mut order: Vec<usize> = (0..scaled.len()).collect();
    order.sort_by(|&a, &b| scaled[b].l1_norm().cmp(&scaled[a].l1_norm()));

    let caps = [
        Rational::from_integer(1),
        Rational::from_integer(1),
        ratio(1, 2),
    ];
    let mut sums = [Load2::default(); 3];
    let mut assign = vec![RepackTarget::BinA; scaled.len()];
    let targets = [
        RepackTarget::BinA,
        RepackTarget::BinB,
        RepackTarget::HalfBin,
    ];

    fn go(
        pos: usize,
        order: &[usize],
        scaled: &[Vec2],
        caps: &[Rational; 3],
        sums: &mut [Load2; 3],
        assign: &mut [RepackTarget],
        targets: &[RepackTarget; 3],
    ) -> bool {
        if pos == order.len() {
            return true;
        }
        let v = scaled[order[pos]];
        for slot in 0..3 {
            // bins A and B are interchangeable while B is still empty
            if slot == 1 && sums[1] == Load2::default() && sums[0] == Load2::default() {
                continue;
            }
            let next = sums[slot].add(&v);
            if next.x > caps[slot] || next.y > caps[slot] {
                continue;
            }
            let saved = sums[slot];
            sums[slot] = next;
            assign[order[pos]] = targets[slot];
            if go(pos + 1, order, scaled, caps, sums, assign, targets) {
                return true;
            }
            sums[slot] = saved;
        }
        false
    }

    let found = go(0, &order, &scaled, &caps, &mut sums, &mut assign, &targets);
    Ok(found.then_some(assign))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::advice::oracle_scaled;
    use crate::engine::run_online;

    fn v(xn: i128, xd: i128, yn: i128, yd: i128) -> Vec2 {
        Vec2::from_ratios(xn, xd, yn, yd)
    }

    fn bx(i: u32, j: u32) -> BoxIndex {
        BoxIndex { i, j }
    }

    #[test]
    fn params_validation() {
        assert!(ScaledParams::new(100, ScaledMode::Desk).is_ok());
        assert!(ScaledParams::new(99, ScaledMode::Desk).is_err());
        assert!(ScaledParams::new(80, ScaledMode::Desk).is_err());
        assert!(ScaledParams::new(100, ScaledMode::Theory).is_err());
        assert!(ScaledParams::new(640, ScaledMode::Theory).is_ok());
        assert!(ScaledParams::new(99, ScaledMode::Diagnostic).is_ok());
    }

    #[test]
    fn boxes_and_scaling() {
        assert_eq!(box_of(&v(31, 100, 5, 100), 10), bx(4, 1));
        assert_eq!(box_of(&Vec2::zero(), 10), bx(1, 1));
        assert_eq!(box_of(&v(1, 1, 1, 1), 10), bx(10, 10));
        assert_eq!(k_scale(&v(31, 100, 5, 100), 10), v(4, 10, 1, 10));
        assert_eq!(k_scale(&v(498, 1000, 1, 1000), 100), v(1, 2, 1, 100));
        assert_eq!(k_scale(&v(499, 1000, 1, 1000), 99), v(50, 99, 1, 99));
        // exact grid points stay put
        assert_eq!(k_scale(&v(3, 10, 7, 10), 10), v(3, 10, 7, 10));
    }

    #[test]
    fn short_classification() {
        assert!(is_short(&v(39, 100, 1, 5), 100));
        assert!(!is_short(&v(41, 100, 1, 100), 100));
        assert!(is_short(&v(2, 5, 2, 5), 100));
    }

    #[test]
    fn dense_round_trip() {
        let mut c = BoxCounts::default();
        c.add(bx(3, 7), 2);
        c.add(bx(10, 1), 5);
        assert_eq!(BoxCounts::from_dense(10, &c.to_dense(10)), c);
    }

    #[test]
    fn even_k_tightness_counts() {
        let mut c = BoxCounts::default();
        c.add(bx(50, 1), 4);
        c.add(bx(51, 1), 4);
        c.add(bx(1, 100), 4);
        let sol = solve_scaled_opt(&c, 100).unwrap();
        assert_eq!(sol.bins, 10);
        assert!(sol.per_bin.iter().all(|t| t.is_feasible(100)));
        let bnb = solve_scaled_opt_with(&c, 100, SolverMethod::BranchAndBound, DEFAULT_NODE_BUDGET)
            .unwrap();
        assert_eq!(bnb.bins, 10);
    }

    #[test]
    fn odd_k_counts() {
        let mut c = BoxCounts::default();
        c.add(bx(50, 1), 20);
        c.add(bx(1, 99), 10);
        assert_eq!(solve_scaled_opt(&c, 99).unwrap().bins, 30);
    }

    #[test]
    fn single_and_empty() {
        let mut c = BoxCounts::default();
        assert_eq!(solve_scaled_opt(&c, 100).unwrap().bins, 0);
        c.add(bx(70, 70), 1);
        let sol = solve_scaled_opt(&c, 100).unwrap();
        assert_eq!(sol.bins, 1);
        assert_eq!(
            sol.types(),
            vec![(BinType::from_boxes(vec![bx(70, 70)]), 1)]
        );
    }

    #[test]
    fn dp_and_search_agree_on_mixed_counts() {
        let mut c = BoxCounts::default();
        c.add(bx(45, 10), 3);
        c.add(bx(30, 45), 2);
        c.add(bx(10, 60), 2);
        c.add(bx(55, 5), 2);
        let dp = solve_scaled_opt_with(&c, 100, SolverMethod::Dp, 0).unwrap();
        let bnb = solve_scaled_opt_with(&c, 100, SolverMethod::BranchAndBound, DEFAULT_NODE_BUDGET)
            .unwrap();
        assert_eq!(dp.bins, bnb.bins);
        let mut seen = BoxCounts::default();
        for t in &dp.per_bin {
            assert!(t.is_feasible(100));
            assert!(t.cardinality() <= 2 * (100 / 40));
            for b in t.items() {
                seen.add(b, 1);
            }
        }
        assert_eq!(seen, c);
    }

    #[test]
    fn a_k_places_first_long_vector_in_first_matching_bin() {
        let sigma = [
            v(498, 1000, 1, 1000),
            v(501, 1000, 1, 1000),
            v(1, 1000, 998, 1000),
        ];
        let p = ScaledParams::new(100, ScaledMode::Desk).unwrap();
        let adv = oracle_scaled(&sigma, &p);
        let mut s = ScaledStrategy::from_payload(p, &adv).unwrap();
        let first = s
            .solution()
            .per_bin
            .iter()
            .position(|t| t.items().any(|b| b == bx(50, 1)))
            .unwrap();
        assert_eq!(s.step(&sigma[0]).unwrap(), Placement::Existing(first));
        assert!(s.advice_bits_read() > 10_000);
    }

    #[test]
    fn short_vector_without_plan_opens_overflow() {
        let p = ScaledParams::new(100, ScaledMode::Desk).unwrap();
        let sigma = [v(1, 1000, 1, 1000)];
        let adv = oracle_scaled(&sigma, &p);
        let report =
            run_online(&mut ScaledStrategy::from_payload(p, &adv).unwrap(), &sigma).unwrap();
        assert_eq!(report.bins_used, 1);
        assert_eq!(report.packing.bins[0].label(), BinLabel::Overflow);
    }

    #[test]
    fn short_vector_respects_reserved_corners() {
        // the critical bin reserves (1, 1/100) ahead of its long vector, leaving no x-room
        let p = ScaledParams::new(100, ScaledMode::Desk).unwrap();
        let sigma = [v(1, 1000, 1, 1000), v(995, 1000, 1, 1000)];
        let adv = oracle_scaled(&sigma, &p);
        let report =
            run_online(&mut ScaledStrategy::from_payload(p, &adv).unwrap(), &sigma).unwrap();
        assert_eq!(report.bins_used, 2);
        assert_eq!(report.kind_counts.get("overflow"), Some(&1));
    }

    #[test]
    fn repack_cases() {
        let one = [v(9, 10, 9, 10)];
        assert_eq!(
            repack_two_and_half(&one, 100).unwrap(),
            Some(vec![RepackTarget::BinA])
        );
        let two = [v(1, 2, 1, 10), v(1, 2, 9, 10)];
        let out = repack_two_and_half(&two, 100).unwrap().unwrap();
        assert_eq!(out.len(), 2);
        assert!(repack_two_and_half(&[v(1, 1, 0, 1), v(1, 2, 0, 1)], 100).is_err());
        assert!(repack_two_and_half(&[v(1, 100, 1, 100)], 100).is_err());
        assert!(repack_two_and_half(&one, 99).is_err());
    }

    #[test]
    fn repack_splits_scaled_overflow() {
        // scaled y-sum is 202/200, so one bin is not enough
        let three = [
            v(1, 2, 3355, 10000),
            v(1, 4, 3355, 10000),
            v(1, 4, 329, 1000),
        ];
        let out = repack_two_and_half(&three, 200).unwrap().unwrap();
        assert_eq!(out.len(), 3);
        let wide = [v(6, 10, 1, 10), v(6, 10, 1, 10), v(6, 10, 1, 10)];
        assert!(repack_two_and_half(&wide, 100).is_err());
    }
}
