//! Advice strategies for vectors restricted to a cone around the diagonal.
//!
//! Vectors are grouped by L1 norm into tiny `(0, a]`, small `(a, d/2]`, medium
//! `(d/2, 1]`, large `(1, b]` and huge `(b, 2]`, with the small, medium and large
//! regions each cut into `k` strips. The advice is the per-strip count of small,
//! medium and large vectors. From it the strategy opens critical bins up front,
//! reserving each strip's upper limit, and then serves:
//!
//! * huge: a fresh bin;
//! * large / medium: the next unused critical slot of the same strip;
//! * small: the next small critical bin with an unused slot of the same strip;
//! * tiny: FirstFit by virtual load against capacity `d`, else an overflow bin.
//!
//! Since every vector lies in the cone, so does every bin sum, and an in-cone sum
//! with L1 load at most `d` has both coordinates at most 1. Tiny vectors are only
//! admitted while the virtual load (actual load plus outstanding reservations)
//! stays within `d`, so later reserved arrivals keep the bin feasible.

use std::collections::{HashMap, VecDeque};

use num_traits::{One, Zero};

use crate::advice::{read_restricted_counts, AdvicePayload, BitString, PayloadCounts, TapeReader};
use crate::engine::{OnlineStrategy, Placement};
use crate::error::{Error, Result};
use crate::model::{Bin, BinLabel, ConeParams, ReservedSlot, SlotKind, Vec2};
use crate::rational::{ceil_int, format_rational, int, ratio, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `a = 2/3`, `b = 4/3`; needs `t > 1/3`.
    A,
    /// `a = 1/2`, `b = 3/2`; needs `t >= 1/3`.
    APrime,
}

impl Variant {
    pub fn id(&self) -> &'static str {
        match self {
            Variant::A => "a-gamma",
            Variant::APrime => "a-prime",
        }
    }
}

/// Thresholds for one run of a restricted strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictedParams {
    cone: ConeParams,
    variant: Variant,
    a: Rational,
    b: Rational,
    k: u32,
    epsilon: Rational,
}

const MAX_STRIPS: u32 = 1 << 20;

/// Builds parameters with `k = max(8, ⌈8/ε⌉)` strips per region.
pub fn make_params(t: Rational, epsilon: Rational, variant: Variant) -> Result<RestrictedParams> {
    if epsilon <= Rational::zero() {
        return Err(Error::InvalidParams("epsilon must be positive".into()));
    }
    let k = ceil_int(&(int(8) / epsilon)).max(8);
    if k > MAX_STRIPS as i128 {
        return Err(Error::InvalidParams(format!(
            "epsilon too small: {k} strips"
        )));
    }
    let cone = ConeParams::new(t)?;
    let third = ratio(1, 3);
    let (a, b) = match variant {
        Variant::A => {
            if t <= third {
                return Err(Error::InvalidParams(format!(
                    "variant A needs t > 1/3, got {}",
                    format_rational(&t)
                )));
            }
            (ratio(2, 3), ratio(4, 3))
        }
        Variant::APrime => {
            if t < third {
                return Err(Error::InvalidParams(format!(
                    "variant A' needs t >= 1/3, got {}",
                    format_rational(&t)
                )));
            }
            (ratio(1, 2), ratio(3, 2))
        }
    };
    Ok(RestrictedParams {
        cone,
        variant,
        a,
        b,
        k: k as u32,
        epsilon,
    })
}

impl RestrictedParams {
    /// Same thresholds with an explicit strip count (used for small worked examples).
    pub fn with_strips(&self, k: u32) -> Result<Self> {
        if k == 0 || k > MAX_STRIPS {
            return Err(Error::InvalidParams(format!("strip count {k}")));
        }
        Ok(RestrictedParams { k, ..self.clone() })
    }

    pub fn cone(&self) -> ConeParams {
        self.cone
    }

    pub fn t(&self) -> Rational {
        self.cone.t()
    }

    pub fn d(&self) -> Rational {
        self.cone.d()
    }

    pub fn half_d(&self) -> Rational {
        self.cone.d() / int(2)
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn a(&self) -> Rational {
        self.a
    }

    pub fn b(&self) -> Rational {
        self.b
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn epsilon(&self) -> Rational {
        self.epsilon
    }

    /// `(lower, upper)` L1 limits of the strip region for `tag`.
    fn region(&self, tag: GroupTag) -> Option<(Rational, Rational)> {
        match tag {
            GroupTag::Small => Some((self.a, self.half_d())),
            GroupTag::Medium => Some((self.half_d(), Rational::one())),
            GroupTag::Large => Some((Rational::one(), self.b)),
            GroupTag::Tiny | GroupTag::Huge => None,
        }
    }

    /// Strip `i` of `tag` covers `(lo + (i-1)w/k, lo + iw/k]`; returns that interval.
    pub fn strip_bounds(&self, tag: GroupTag, strip: u32) -> Option<(Rational, Rational)> {
        let (lo, hi) = self.region(tag)?;
        let step = (hi - lo) / int(self.k as i128);
        Some((
            lo + step * int(strip as i128 - 1),
            lo + step * int(strip as i128),
        ))
    }

    /// Upper limit of a strip: the amount reserved for one vector of that strip.
    pub fn strip_upper(&self, tag: GroupTag, strip: u32) -> Rational {
        self.strip_bounds(tag, strip)
            .map(|(_, hi)| hi)
            .expect("strip regions exist for small, medium and large")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupTag {
    Tiny,
    Small,
    Medium,
    Large,
    Huge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Group {
    pub tag: GroupTag,
    /// `1..=k` for small, medium and large; `None` otherwise.
    pub strip: Option<u32>,
}

pub fn classify(v: &Vec2, p: &RestrictedParams) -> Result<Group> {
    if !p.cone.contains(v) {
        return Err(Error::OutOfCone(v.to_string()));
    }
    let l1 = v.l1_norm();
    let tag = if l1 <= p.a {
        GroupTag::Tiny
    } else if l1 <= p.half_d() {
        GroupTag::Small
    } else if l1 <= Rational::one() {
        GroupTag::Medium
    } else if l1 <= p.b {
        GroupTag::Large
    } else {
        GroupTag::Huge
    };
    let strip = p.region(tag).map(|(lo, hi)| {
        let i = ceil_int(&((l1 - lo) * int(p.k as i128) / (hi - lo)));
        i.clamp(1, p.k as i128) as u32
    });
    Ok(Group { tag, strip })
}

/// One small critical bin: a pair of strips `(i, j)` with `i <= j`, or a single leftover.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmallBinPlan {
    Pair(u32, u32),
    Single(u32),
}

/// The critical bins to open, in creation order: large by ascending strip,
/// medium by ascending strip, then small bins in pairing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinPlan {
    pub large: Vec<u32>,
    pub medium: Vec<u32>,
    pub small: Vec<SmallBinPlan>,
}

impl BinPlan {
    pub fn bin_count(&self) -> usize {
        self.large.len() + self.medium.len() + self.small.len()
    }

    fn open_bins(&self, p: &RestrictedParams) -> Vec<Bin> {
        let slot = |kind: SlotKind, tag: GroupTag, strip: u32| ReservedSlot {
            kind,
            reserved_l1: p.strip_upper(tag, strip),
            used: false,
        };
        let mut bins = Vec::with_capacity(self.bin_count());
        for &strip in &self.large {
            bins.push(Bin::with_reservations(
                BinLabel::LargeCritical { strip },
                vec![slot(SlotKind::Large { strip }, GroupTag::Large, strip)],
            ));
        }
        for &strip in &self.medium {
            bins.push(Bin::with_reservations(
                BinLabel::MediumCritical { strip },
                vec![slot(SlotKind::Medium { strip }, GroupTag::Medium, strip)],
            ));
        }
        for plan in &self.small {
            let strips = match *plan {
                SmallBinPlan::Pair(i, j) => vec![i, j],
                SmallBinPlan::Single(i) => vec![i],
            };
            bins.push(Bin::with_reservations(
                BinLabel::SmallCritical,
                strips
                    .into_iter()
                    .map(|s| slot(SlotKind::Small { strip: s }, GroupTag::Small, s))
                    .collect(),
            ));
        }
        bins
    }
}

/// Lays out critical bins for a restricted payload. Small vectors are paired by
/// repeatedly matching the lowest non-empty strip with the highest non-empty strip.
pub fn plan_critical_bins(payload: &AdvicePayload, p: &RestrictedParams) -> Result<BinPlan> {
    let PayloadCounts::Restricted {
        large,
        medium,
        small,
    } = &payload.counts
    else {
        return Err(Error::InvalidParams("expected a restricted payload".into()));
    };
    let k = p.k as usize;
    if large.len() != k || medium.len() != k || small.len() != k {
        return Err(Error::InvalidParams(format!(
            "payload has {}/{}/{} strips, expected {k}",
            large.len(),
            medium.len(),
            small.len()
        )));
    }
    Ok(plan_from_counts(large, medium, small))
}

fn plan_from_counts(large: &[u64], medium: &[u64], small: &[u64]) -> BinPlan {
    let expand = |counts: &[u64]| -> Vec<u32> {
        counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i as u32 + 1, c as usize))
            .collect()
    };
    let mut remaining = small.to_vec();
    let mut pairs = Vec::new();
    while let Some(lo) = remaining.iter().position(|&c| c > 0) {
        let hi = remaining.iter().rposition(|&c| c > 0).expect("non-empty");
        if lo < hi {
            pairs.push(SmallBinPlan::Pair(lo as u32 + 1, hi as u32 + 1));
            remaining[lo] -= 1;
            remaining[hi] -= 1;
        } else if remaining[lo] >= 2 {
            pairs.push(SmallBinPlan::Pair(lo as u32 + 1, lo as u32 + 1));
            remaining[lo] -= 2;
        } else {
            pairs.push(SmallBinPlan::Single(lo as u32 + 1));
            remaining[lo] -= 1;
        }
    }
    BinPlan {
        large: expand(large),
        medium: expand(medium),
        small: pairs,
    }
}

/// A_γ or A'_γ, depending on the variant in its parameters.
#[derive(Debug)]
pub struct RestrictedStrategy {
    params: RestrictedParams,
    bins: Vec<Bin>,
    slots: HashMap<SlotKind, VecDeque<(usize, usize)>>,
    bits_read: u64,
}

impl RestrictedStrategy {
    /// Reads the advice tape, plans and opens the critical bins.
    pub fn from_tape(params: RestrictedParams, tape: &BitString) -> Result<Self> {
        let mut reader = TapeReader::new(tape);
        let (large, medium, small) = read_restricted_counts(&mut reader, params.k)?;
        let plan = plan_from_counts(&large, &medium, &small);
        let bins = plan.open_bins(&params);
        let mut slots: HashMap<SlotKind, VecDeque<(usize, usize)>> = HashMap::new();
        for (b, bin) in bins.iter().enumerate() {
            for (s, slot) in bin.reserved_slots().iter().enumerate() {
                slots.entry(slot.kind).or_default().push_back((b, s));
            }
        }
        Ok(RestrictedStrategy {
            params,
            bins,
            slots,
            bits_read: reader.bits_read() as u64,
        })
    }

    /// Writes the payload to a tape and reads it back, so the bit count is honest.
    pub fn from_payload(params: RestrictedParams, payload: &AdvicePayload) -> Result<Self> {
        Self::from_tape(params, &payload.to_tape()?)
    }

    pub fn params(&self) -> &RestrictedParams {
        &self.params
    }

    /// Number of critical bins opened before the first arrival.
    pub fn critical_bins(&self) -> usize {
        self.bins
            .iter()
            .filter(|b| !matches!(b.label(), BinLabel::Huge | BinLabel::Overflow))
            .count()
    }

    fn open(&mut self, label: BinLabel, v: Vec2) -> Placement {
        let mut bin = Bin::new(label);
        bin.push(v);
        self.bins.push(bin);
        Placement::NewBin
    }

    fn fill(&mut self, kind: SlotKind, v: Vec2) -> Result<Placement> {
        let (bin, slot) = self
            .slots
            .get_mut(&kind)
            .and_then(VecDeque::pop_front)
            .ok_or_else(|| Error::NoMatchingSlot(format!("{v} ({kind:?})")))?;
        self.bins[bin].fill_slot(slot, v);
        Ok(Placement::Existing(bin))
    }
}

impl OnlineStrategy for RestrictedStrategy {
    fn id(&self) -> String {
        self.params.variant.id().into()
    }

    fn step(&mut self, v: &Vec2) -> Result<Placement> {
        let group = classify(v, &self.params)?;
        let strip = group.strip.unwrap_or(0);
        match group.tag {
            GroupTag::Huge => Ok(self.open(BinLabel::Huge, *v)),
            GroupTag::Large => self.fill(SlotKind::Large { strip }, *v),
            GroupTag::Medium => self.fill(SlotKind::Medium { strip }, *v),
            GroupTag::Small => self.fill(SlotKind::Small { strip }, *v),
            GroupTag::Tiny => {
                let capacity = self.params.d();
                let l1 = v.l1_norm();
                match self
                    .bins
                    .iter()
                    .position(|b| b.virtual_load() + l1 <= capacity)
                {
                    Some(i) => {
                        debug_assert!(self.bins[i].fits(v));
                        self.bins[i].push(*v);
                        Ok(Placement::Existing(i))
                    }
                    None => Ok(self.open(BinLabel::Overflow, *v)),
                }
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

/// The guarantee `c` with `bins <= c·OPT + 1`, from the slope directly.
/// `epsilon = 0` gives the limit value.
pub fn bound_value(variant: Variant, t: Rational, epsilon: Rational) -> Rational {
    match variant {
        Variant::A => int(2).max(int(6) / (int(1) + int(3) * t) + epsilon),
        Variant::APrime => ratio(5, 2).max(int(4) / (int(1) + int(2) * t) + epsilon),
    }
}

pub fn competitive_bound(p: &RestrictedParams) -> Rational {
    bound_value(p.variant, p.t(), p.epsilon)
}

/// Slope at which variant A's bound meets 5/2: `6/(1+3t) = 5/2` gives `t = 7/15`.
pub fn break_even_slope() -> Rational {
    ratio(7, 15)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DispatchChoice {
    Restricted(RestrictedParams),
    Scaled { k: u32 },
}

/// Picks A_γ when `t >= 7/15` and A_k with `scaled_k` otherwise.
pub fn combined_dispatch(t: Rational, epsilon: Rational, scaled_k: u32) -> Result<DispatchChoice> {
    if t >= break_even_slope() {
        Ok(DispatchChoice::Restricted(make_params(
            t,
            epsilon,
            Variant::A,
        )?))
    } else {
        ConeParams::new(t)?;
        Ok(DispatchChoice::Scaled { k: scaled_k })
    }
}

/// Bound of the combined strategy: A_γ's bound at or above the break-even slope, 5/2 below.
pub fn combined_bound(t: Rational, epsilon: Rational) -> Rational {
    if t >= break_even_slope() {
        bound_value(Variant::A, t, epsilon)
    } else {
        ratio(5, 2)
    }
}
