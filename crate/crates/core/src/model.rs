//! Domain model: vectors, cones, bins and packings.
//!
//! A bin has unit capacity in each coordinate; a set of vectors fits in it when
//! the coordinate sums are at most one (closed constraint, equality fits).

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{ceil_int, format_rational, Rational};

/// A request vector with exact coordinates in `[0, 1]²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vec2 {
    x: Rational,
    y: Rational,
}

impl Vec2 {
    pub fn new(x: Rational, y: Rational) -> Result<Self> {
        let unit = Rational::zero()..=Rational::one();
        if !unit.contains(&x) || !unit.contains(&y) {
            return Err(Error::InvalidVector(format!(
                "({}, {}) is not in [0,1]^2",
                format_rational(&x),
                format_rational(&y)
            )));
        }
        Ok(Vec2 { x, y })
    }

    /// Convenience constructor from `xn/xd, yn/yd`; panics on invalid input.
    pub fn from_ratios(xn: i128, xd: i128, yn: i128, yd: i128) -> Self {
        Vec2::new(Rational::new(xn, xd), Rational::new(yn, yd)).expect("coordinates in [0,1]")
    }

    pub fn zero() -> Self {
        Vec2 {
            x: Rational::zero(),
            y: Rational::zero(),
        }
    }

    pub fn x(&self) -> Rational {
        self.x
    }

    pub fn y(&self) -> Rational {
        self.y
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn l1_norm(&self) -> Rational {
        self.x + self.y
    }

    pub fn linf_norm(&self) -> Rational {
        self.x.max(self.y)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Running coordinate sums of a bin. Unlike [`Vec2`] it is not confined to the unit square.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Load2 {
    pub x: Rational,
    pub y: Rational,
}

impl Load2 {
    pub fn add(&self, v: &Vec2) -> Load2 {
        Load2 {
            x: self.x + v.x,
            y: self.y + v.y,
        }
    }

    pub fn l1(&self) -> Rational {
        self.x + self.y
    }

    /// Coordinate-wise `<= (1, 1)`.
    pub fn within_unit(&self) -> bool {
        self.x <= Rational::one() && self.y <= Rational::one()
    }
}

impl fmt::Display for Load2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Angular restriction around the diagonal, given by the slope `t = tan(pi/4 - gamma/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConeParams {
    t: Rational,
}

impl ConeParams {
    pub fn new(t: Rational) -> Result<Self> {
        if t <= Rational::zero() || t > Rational::one() {
            return Err(Error::InvalidParams(format!(
                "cone slope t = {} must lie in (0, 1]",
                format_rational(&t)
            )));
        }
        Ok(ConeParams { t })
    }

    pub fn t(&self) -> Rational {
        self.t
    }

    /// `d = 1 + t`: an in-cone bin sum with L1 load at most `d` has both coordinates at most 1.
    pub fn d(&self) -> Rational {
        Rational::one() + self.t
    }

    /// `t·x <= y` and `t·y <= x`. The zero vector is inside.
    pub fn contains(&self, v: &Vec2) -> bool {
        self.t * v.x <= v.y && self.t * v.y <= v.x
    }
}

/// Grid cell `((i-1)/k, i/k] × ((j-1)/k, j/k]`, closed at the zero edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoxIndex {
    pub i: u32,
    pub j: u32,
}

impl fmt::Display for BoxIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// What a reserved slot was set aside for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlotKind {
    Large { strip: u32 },
    Medium { strip: u32 },
    Small { strip: u32 },
    Scaled(BoxIndex),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReservedSlot {
    pub kind: SlotKind,
    pub reserved_l1: Rational,
    pub used: bool,
}

/// Diagnostic tag; never consulted for feasibility.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinLabel {
    Plain,
    Huge,
    LargeCritical { strip: u32 },
    MediumCritical { strip: u32 },
    SmallCritical,
    ScaledCritical { bin_type: usize },
    Overflow,
}

impl BinLabel {
    pub fn kind(&self) -> &'static str {
        match self {
            BinLabel::Plain => "plain",
            BinLabel::Huge => "huge",
            BinLabel::LargeCritical { .. } => "large",
            BinLabel::MediumCritical { .. } => "medium",
            BinLabel::SmallCritical => "small",
            BinLabel::ScaledCritical { .. } => "scaled",
            BinLabel::Overflow => "overflow",
        }
    }
}

/// An open bin: actual contents plus the reservation bookkeeping used by advice strategies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bin {
    contents: Vec<Vec2>,
    sum: Load2,
    virtual_load: Rational,
    reserved_slots: Vec<ReservedSlot>,
    label: BinLabel,
}

impl Bin {
    pub fn new(label: BinLabel) -> Self {
        Bin {
            contents: Vec::new(),
            sum: Load2::default(),
            virtual_load: Rational::zero(),
            reserved_slots: Vec::new(),
            label,
        }
    }

    /// A critical bin whose virtual load starts at the total reservation.
    pub fn with_reservations(label: BinLabel, slots: Vec<ReservedSlot>) -> Self {
        let virtual_load = slots.iter().map(|s| s.reserved_l1).sum();
        Bin {
            contents: Vec::new(),
            sum: Load2::default(),
            virtual_load,
            reserved_slots: slots,
            label,
        }
    }

    pub fn contents(&self) -> &[Vec2] {
        &self.contents
    }

    pub fn sum(&self) -> Load2 {
        self.sum
    }

    pub fn virtual_load(&self) -> Rational {
        self.virtual_load
    }

    pub fn reserved_slots(&self) -> &[ReservedSlot] {
        &self.reserved_slots
    }

    pub fn label(&self) -> BinLabel {
        self.label
    }

    pub fn is_empty(&self) -> bool {
        self.contents.is_empty()
    }

    /// Actual load: sum of L1 norms of the contents.
    pub fn load(&self) -> Rational {
        self.sum.l1()
    }

    /// L1 still held back for slots that have not been filled.
    pub fn unused_reservation(&self) -> Rational {
        self.reserved_slots
            .iter()
            .filter(|s| !s.used)
            .map(|s| s.reserved_l1)
            .sum()
    }

    /// Whether `v` can be added without breaking the unit capacity (actual sums only).
    pub fn fits(&self, v: &Vec2) -> bool {
        self.sum.add(v).within_unit()
    }

    /// Adds `v` outside any reservation; the virtual load grows by `|v|₁`.
    pub(crate) fn push(&mut self, v: Vec2) {
        self.sum = self.sum.add(&v);
        self.virtual_load += v.l1_norm();
        self.contents.push(v);
    }

    /// Places `v` into reserved slot `slot`, releasing the slack `reserved - |v|₁`.
    pub(crate) fn fill_slot(&mut self, slot: usize, v: Vec2) {
        let s = &mut self.reserved_slots[slot];
        debug_assert!(!s.used);
        s.used = true;
        self.virtual_load -= s.reserved_l1 - v.l1_norm();
        self.sum = self.sum.add(&v);
        self.contents.push(v);
    }

    /// Bin holding exactly `contents`, no reservations.
    pub fn from_contents(label: BinLabel, contents: Vec<Vec2>) -> Self {
        let mut bin = Bin::new(label);
        for v in contents {
            bin.push(v);
        }
        bin
    }
}

/// One online decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub step: usize,
    pub v: Vec2,
    pub bin: usize,
    pub opened: bool,
}

/// A partition of the input into bins, with the decision log when produced online.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Packing {
    pub bins: Vec<Bin>,
    pub trace: Vec<TraceEntry>,
}

impl Packing {
    pub fn from_groups(groups: Vec<Vec<Vec2>>) -> Self {
        Packing {
            bins: groups
                .into_iter()
                .map(|g| Bin::from_contents(BinLabel::Plain, g))
                .collect(),
            trace: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Why a packing is not a valid partition of the sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `count` copies of `v` from the sequence are not packed.
    Missing {
        v: Vec2,
        count: usize,
    },
    /// `count` copies of `v` are packed beyond what the sequence contains.
    Unexpected {
        v: Vec2,
        count: usize,
    },
    Overfull {
        bin: usize,
        sum: Load2,
    },
}

/// Total L1 load of a sequence.
pub fn load(vectors: &[Vec2]) -> Rational {
    vectors.iter().map(Vec2::l1_norm).sum()
}

/// `⌈load/2⌉`, a lower bound on the optimum since a bin holds load at most 2.
pub fn opt_load_lower_bound(vectors: &[Vec2]) -> usize {
    ceil_int(&(load(vectors) / Rational::from_integer(2))) as usize
}

/// Checks that `packing` holds every vector of `sigma` exactly once (as a multiset)
/// and that every bin respects the unit capacity.
pub fn validate_packing(
    packing: &Packing,
    sigma: &[Vec2],
) -> std::result::Result<(), Vec<Violation>> {
    let mut balance: BTreeMap<Vec2, i64> = BTreeMap::new();
    for v in sigma {
        *balance.entry(*v).or_default() += 1;
    }
    let mut violations = Vec::new();
    for (idx, bin) in packing.bins.iter().enumerate() {
        let recomputed = bin
            .contents
            .iter()
            .fold(Load2::default(), |acc, v| acc.add(v));
        if !recomputed.within_unit() {
            violations.push(Violation::Overfull {
                bin: idx,
                sum: recomputed,
            });
        }
        for v in &bin.contents {
            *balance.entry(*v).or_default() -= 1;
        }
    }
    for (v, count) in balance {
        if count > 0 {
            violations.push(Violation::Missing {
                v,
                count: count as usize,
            });
        } else if count < 0 {
            violations.push(Violation::Unexpected {
                v,
                count: (-count) as usize,
            });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}
