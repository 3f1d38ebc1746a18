//! Online execution: vectors are released one at a time and every placement is final.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{validate_packing, Bin, BinLabel, Load2, Packing, TraceEntry, Vec2};
use crate::rational::to_pair;

/// Where a strategy put the vector it was just handed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    Existing(usize),
    NewBin,
}

/// An online packing strategy. The strategy owns its bins, so it can keep
/// reservation state next to them; the engine only observes.
pub trait OnlineStrategy {
    fn id(&self) -> String;

    /// Places `v` irrevocably and reports where it went.
    fn step(&mut self, v: &Vec2) -> Result<Placement>;

    /// Bins in creation order, including critical bins opened before any arrival.
    fn bins(&self) -> &[Bin];

    fn take_bins(&mut self) -> Vec<Bin>;

    fn advice_bits_read(&self) -> u64 {
        0
    }
}

/// Outcome of one online run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub strategy: String,
    pub bins_used: usize,
    pub packing: Packing,
    pub advice_bits_read: u64,
    /// Bin counts per label kind (`huge`, `large`, `medium`, `small`, `scaled`, `overflow`, `plain`).
    pub kind_counts: BTreeMap<&'static str, usize>,
}

/// Replays `sigma` through `strategy`, checking each placement as it happens.
pub fn run_online(strategy: &mut dyn OnlineStrategy, sigma: &[Vec2]) -> Result<RunReport> {
    let mut trace = Vec::with_capacity(sigma.len());
    for (step, v) in sigma.iter().enumerate() {
        let before = strategy.bins().len();
        let placement = strategy.step(v)?;
        let bins = strategy.bins();
        let (bin, opened) = match placement {
            Placement::NewBin => {
                if bins.len() != before + 1 {
                    return Err(Error::Infeasible(format!(
                        "step {step}: new bin reported but bin count went {before} -> {}",
                        bins.len()
                    )));
                }
                (before, true)
            }
            Placement::Existing(i) => {
                if i >= before || bins.len() != before {
                    return Err(Error::Infeasible(format!(
                        "step {step}: placement into bin {i} of {before} is inconsistent"
                    )));
                }
                (i, false)
            }
        };
        let target = &bins[bin];
        if target.contents().last() != Some(v) {
            return Err(Error::Infeasible(format!(
                "step {step}: bin {bin} does not end with the placed vector"
            )));
        }
        if !target.sum().within_unit() {
            return Err(Error::Infeasible(format!(
                "step {step}: bin {bin} overflows with sum {}",
                target.sum()
            )));
        }
        trace.push(TraceEntry {
            step,
            v: *v,
            bin,
            opened,
        });
    }
    let bins = strategy.take_bins();
    let mut kind_counts = BTreeMap::new();
    for b in &bins {
        *kind_counts.entry(b.label().kind()).or_insert(0) += 1;
    }
    let packing = Packing { bins, trace };
    if let Err(violations) = validate_packing(&packing, sigma) {
        return Err(Error::Infeasible(format!("{violations:?}")));
    }
    Ok(RunReport {
        strategy: strategy.id(),
        bins_used: packing.bins.len(),
        packing,
        advice_bits_read: strategy.advice_bits_read(),
        kind_counts,
    })
}

/// Lowest-index bin where `v` fits by actual sums, or `None` when a new bin is needed.
pub fn first_fit_step(bins: &[Bin], v: &Vec2) -> Option<usize> {
    bins.iter().position(|b| b.fits(v))
}

/// The classical FirstFit strategy over bins in creation order.
#[derive(Debug, Default)]
pub struct FirstFit {
    bins: Vec<Bin>,
}

impl FirstFit {
    pub fn new() -> Self {
        Self::default()
    }
}

impl OnlineStrategy for FirstFit {
    fn id(&self) -> String {
        "firstfit".into()
    }

    fn step(&mut self, v: &Vec2) -> Result<Placement> {
        match first_fit_step(&self.bins, v) {
            Some(i) => {
                self.bins[i].push(*v);
                Ok(Placement::Existing(i))
            }
            None => {
                let mut bin = Bin::new(BinLabel::Plain);
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
}

/// True iff every bin opening in `trace` happened when the vector fit in no open bin.
/// Bins are known from the trace itself, judged by actual sums.
pub fn check_anyfit(trace: &[TraceEntry]) -> bool {
    let mut sums: BTreeMap<usize, Load2> = BTreeMap::new();
    for entry in trace {
        if entry.opened && sums.values().any(|s| s.add(&entry.v).within_unit()) {
            return false;
        }
        let s = sums.entry(entry.bin).or_default();
        *s = s.add(&entry.v);
    }
    true
}

#[derive(Serialize)]
struct TraceLine {
    step: usize,
    v: [i64; 4],
    bin: usize,
    opened: bool,
}

/// One JSON object per line: `{"step":i,"v":[xn,xd,yn,yd],"bin":j,"opened":bool}`.
pub fn trace_to_jsonl(trace: &[TraceEntry]) -> Result<String> {
    let mut out = String::new();
    for e in trace {
        let [xn, xd] = to_pair(&e.v.x())?;
        let [yn, yd] = to_pair(&e.v.y())?;
        let line = TraceLine {
            step: e.step,
            v: [xn, xd, yn, yd],
            bin: e.bin,
            opened: e.opened,
        };
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }
    Ok(out)
}
