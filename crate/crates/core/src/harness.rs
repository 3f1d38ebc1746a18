//! Batch evaluation: strategy specs, ratio tables, bound curves and sweeps.
//!
//! Work items are independent, so batches map over them either sequentially or
//! with rayon (feature `parallel`). Results are sorted by a fixed key afterwards,
//! which makes output identical in both modes.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::advice::{oracle_restricted, oracle_scaled};
use crate::engine::{run_online, FirstFit, RunReport};
use crate::error::{Error, Result};
use crate::exact::exact_opt;
use crate::generators::{random_cone_instance, random_long_vector_bin};
use crate::model::{Packing, Vec2};
use crate::rational::{format_rational, int, ratio, to_decimal, to_f64, Rational};
use crate::restricted::{
    bound_value, combined_bound, combined_dispatch, make_params, DispatchChoice,
    RestrictedStrategy, Variant,
};
use crate::rng::SplitMix64;
use crate::scaled::{repack_two_and_half, ScaledMode, ScaledParams, ScaledStrategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    /// Rayon's global pool, or the pool installed by the caller. Sequential without the `parallel` feature.
    Parallel,
}

impl ExecMode {
    pub fn default_for_build() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Order-preserving map over `items`.
pub fn map_items<T, R, F>(mode: ExecMode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// A fully parameterised strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrategySpec {
    FirstFit,
    Restricted {
        variant: Variant,
        t: Rational,
        epsilon: Rational,
    },
    /// A_γ for `t >= 7/15`, A_k below.
    Combined {
        t: Rational,
        epsilon: Rational,
        k: u32,
    },
    Scaled {
        k: u32,
        mode: ScaledMode,
    },
}

impl StrategySpec {
    /// Builds a spec from command-line style names: `firstfit`, `a`, `aprime`, `combined`, `ak`.
    pub fn from_name(
        name: &str,
        cone_t: Option<Rational>,
        epsilon: Rational,
        k: u32,
        mode: ScaledMode,
    ) -> Result<Self> {
        let need_t = || {
            cone_t
                .ok_or_else(|| Error::InvalidParams(format!("strategy {name} needs a cone slope")))
        };
        Ok(match name {
            "firstfit" => StrategySpec::FirstFit,
            "a" => StrategySpec::Restricted {
                variant: Variant::A,
                t: need_t()?,
                epsilon,
            },
            "aprime" => StrategySpec::Restricted {
                variant: Variant::APrime,
                t: need_t()?,
                epsilon,
            },
            "combined" => StrategySpec::Combined {
                t: need_t()?,
                epsilon,
                k,
            },
            "ak" => StrategySpec::Scaled { k, mode },
            other => return Err(Error::InvalidParams(format!("unknown strategy {other}"))),
        })
    }

    pub fn id(&self) -> String {
        match self {
            StrategySpec::FirstFit => "firstfit".into(),
            StrategySpec::Restricted { variant, .. } => variant.id().into(),
            StrategySpec::Combined { .. } => "combined".into(),
            StrategySpec::Scaled { k, .. } => format!("a-k{k}"),
        }
    }

    /// Proven `c` with `bins <= c·OPT + 1`, where one is stated.
    pub fn bound(&self) -> Option<Rational> {
        match self {
            StrategySpec::FirstFit => None,
            StrategySpec::Restricted {
                variant,
                t,
                epsilon,
            } => Some(bound_value(*variant, *t, *epsilon)),
            StrategySpec::Combined { t, epsilon, .. } => Some(combined_bound(*t, *epsilon)),
            StrategySpec::Scaled { .. } => Some(ratio(5, 2)),
        }
    }
}

/// Oracle, tape and online run for one spec on one sequence.
pub fn run_spec(spec: &StrategySpec, sigma: &[Vec2]) -> Result<RunReport> {
    match spec {
        StrategySpec::FirstFit => run_online(&mut FirstFit::new(), sigma),
        StrategySpec::Restricted {
            variant,
            t,
            epsilon,
        } => {
            let p = make_params(*t, *epsilon, *variant)?;
            let payload = oracle_restricted(sigma, &p)?;
            run_online(&mut RestrictedStrategy::from_payload(p, &payload)?, sigma)
        }
        StrategySpec::Combined { t, epsilon, k } => match combined_dispatch(*t, *epsilon, *k)? {
            DispatchChoice::Restricted(p) => {
                let payload = oracle_restricted(sigma, &p)?;
                run_online(&mut RestrictedStrategy::from_payload(p, &payload)?, sigma)
            }
            DispatchChoice::Scaled { k } => {
                run_scaled(ScaledParams::new(k, ScaledMode::Desk)?, sigma)
            }
        },
        StrategySpec::Scaled { k, mode } => run_scaled(ScaledParams::new(*k, *mode)?, sigma),
    }
}

fn run_scaled(p: ScaledParams, sigma: &[Vec2]) -> Result<RunReport> {
    let payload = oracle_scaled(sigma, &p);
    run_online(&mut ScaledStrategy::from_payload(p, &payload)?, sigma)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptKind {
    Exact,
    /// Bin count of a witness packing, an upper bound on OPT.
    WitnessUpperBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OptValue {
    pub value: usize,
    pub kind: OptKind,
}

/// Exact optimum, or the witness bin count when the search budget runs out.
pub fn reference_opt(sigma: &[Vec2], witness: Option<&Packing>, budget: u64) -> Result<OptValue> {
    match exact_opt(sigma, budget) {
        Ok(sol) => Ok(OptValue {
            value: sol.opt,
            kind: OptKind::Exact,
        }),
        Err(Error::BudgetExhausted { .. }) if witness.is_some() => Ok(OptValue {
            value: witness.map(Packing::len).unwrap_or(0),
            kind: OptKind::WitnessUpperBound,
        }),
        Err(e) => Err(e),
    }
}

/// `bins/opt` rendered to six decimals; an empty instance has ratio 1.
pub fn ratio_of(bins: usize, opt: usize) -> Rational {
    if opt == 0 {
        int(1)
    } else {
        ratio(bins as i128, opt as i128)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub strategy: String,
    pub bins: usize,
    pub opt: usize,
    pub opt_kind: OptKind,
    pub ratio: String,
    pub advice_bits: u64,
    /// `bins <= c·opt + 1` for the spec's bound, when it has one.
    pub within_bound: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct BenchInstance {
    pub id: String,
    pub sigma: Vec<Vec2>,
    pub witness: Option<Packing>,
}

pub fn bench_row(
    inst: &BenchInstance,
    spec: &StrategySpec,
    budget: u64,
    timing: bool,
) -> Result<BenchRow> {
    let start = Instant::now();
    let report = run_spec(spec, &inst.sigma)?;
    let elapsed = start.elapsed();
    let opt = reference_opt(&inst.sigma, inst.witness.as_ref(), budget)?;
    Ok(BenchRow {
        instance: inst.id.clone(),
        strategy: report.strategy,
        bins: report.bins_used,
        opt: opt.value,
        opt_kind: opt.kind,
        ratio: to_decimal(&ratio_of(report.bins_used, opt.value), 6),
        advice_bits: report.advice_bits_read,
        within_bound: spec
            .bound()
            .map(|c| int(report.bins_used as i128) <= c * int(opt.value as i128) + int(1)),
        wall_ms: timing.then_some(elapsed.as_secs_f64() * 1e3),
    })
}

/// Every spec on every instance, sorted by `(instance, strategy)`.
pub fn bench_batch(
    instances: &[BenchInstance],
    specs: &[StrategySpec],
    budget: u64,
    mode: ExecMode,
    timing: bool,
) -> Result<Vec<BenchRow>> {
    let jobs: Vec<(&BenchInstance, &StrategySpec)> = instances
        .iter()
        .flat_map(|i| specs.iter().map(move |s| (i, s)))
        .collect();
    let mut rows = map_items(mode, &jobs, |(i, s)| bench_row(i, s, budget, timing))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| (&a.instance, &a.strategy).cmp(&(&b.instance, &b.strategy)));
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let timing = rows.iter().any(|r| r.wall_ms.is_some());
    let mut out =
        String::from("instance,strategy,bins,opt,opt_kind,ratio,advice_bits,within_bound");
    if timing {
        out.push_str(",wall_ms");
    }
    out.push('\n');
    for r in rows {
        let kind = match r.opt_kind {
            OptKind::Exact => "exact",
            OptKind::WitnessUpperBound => "witness-upper-bound",
        };
        let within = r.within_bound.map(|b| b.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}",
            r.instance, r.strategy, r.bins, r.opt, kind, r.ratio, r.advice_bits, within
        ));
        if timing {
            out.push_str(&format!(",{:.3}", r.wall_ms.unwrap_or(0.0)));
        }
        out.push('\n');
    }
    out
}

/// Seeded random cone instances with ids `t=<t>/<index>`.
pub fn random_bench_instances(
    t: Rational,
    count: usize,
    n_max: usize,
    seed: u64,
    l1_range: (Rational, Rational),
) -> Result<Vec<BenchInstance>> {
    (0..count)
        .map(|idx| {
            let mut rng = SplitMix64::substream(seed, idx as u64);
            let n = rng.range_inclusive(1, n_max.max(1) as u64) as usize;
            let inst = random_cone_instance(n, t, rng.next_u64(), l1_range)?;
            Ok(BenchInstance {
                id: format!("t={}/{idx:04}", format_rational(&t)),
                sigma: inst.sigma,
                witness: None,
            })
        })
        .collect()
}

/// One point of the bound curves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveRow {
    pub t: Rational,
    pub c_a: Rational,
    pub c_aprime: Rational,
    pub c_combined: Rational,
    pub c_firstfit: Rational,
}

impl CurveRow {
    /// Cone half-width `γ = π/2 − 2·arctan t`, for display only.
    pub fn gamma(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 - 2.0 * to_f64(&self.t).atan()
    }
}

/// Reference value plotted for FirstFit.
pub fn firstfit_reference() -> Rational {
    ratio(27, 10)
}

/// Bound formulas as functions of the slope. The formulas are evaluated on the
/// whole grid; which slopes each strategy accepts is checked by its parameters.
pub fn curve_rows(ts: &[Rational], epsilon: Rational) -> Vec<CurveRow> {
    let mut ts = ts.to_vec();
    ts.sort();
    ts.dedup();
    ts.into_iter()
        .map(|t| CurveRow {
            t,
            c_a: bound_value(Variant::A, t, epsilon),
            c_aprime: bound_value(Variant::APrime, t, epsilon),
            c_combined: combined_bound(t, epsilon),
            c_firstfit: firstfit_reference(),
        })
        .collect()
}

/// `1/steps, 2/steps, …, 1` plus the slopes where the curves change shape.
pub fn default_curve_grid(steps: u32) -> Vec<Rational> {
    let mut ts: Vec<Rational> = (1..=steps.max(1))
        .map(|i| ratio(i as i128, steps.max(1) as i128))
        .collect();
    ts.extend([ratio(1, 3), ratio(7, 15)]);
    ts.sort();
    ts.dedup();
    ts
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("t,gamma,c_a,c_aprime,c_combined,c_firstfit\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.6},{},{},{},{}\n",
            to_decimal(&r.t, 7),
            r.gamma(),
            to_decimal(&r.c_a, 6),
            to_decimal(&r.c_aprime, 6),
            to_decimal(&r.c_combined, 6),
            to_decimal(&r.c_firstfit, 6),
        ));
    }
    out
}

#[derive(Serialize)]
struct CurveJson {
    t: String,
    gamma: String,
    c_a: String,
    c_aprime: String,
    c_combined: String,
    c_firstfit: String,
}

pub fn curve_json(rows: &[CurveRow]) -> Result<String> {
    let rows: Vec<CurveJson> = rows
        .iter()
        .map(|r| CurveJson {
            t: format_rational(&r.t),
            gamma: format!("{:.6}", r.gamma()),
            c_a: format_rational(&r.c_a),
            c_aprime: format_rational(&r.c_aprime),
            c_combined: format_rational(&r.c_combined),
            c_firstfit: format_rational(&r.c_firstfit),
        })
        .collect();
    Ok(serde_json::to_string_pretty(&rows)?)
}

/// Result of one random instance in a guarantee sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GuaranteeCase {
    pub t: String,
    pub index: usize,
    pub n: usize,
    pub bins: usize,
    pub opt: usize,
    pub bound: String,
    pub holds: bool,
}

/// Runs `spec_for(t)` on `per_t` random instances for each slope and checks
/// `bins <= c·OPT + 1` against the exact optimum.
pub fn guarantee_sweep(
    ts: &[Rational],
    spec_for: &(dyn Fn(Rational) -> StrategySpec + Sync),
    per_t: usize,
    n_max: usize,
    seed: u64,
    budget: u64,
    mode: ExecMode,
) -> Result<Vec<GuaranteeCase>> {
    let mut jobs = Vec::new();
    for (ti, t) in ts.iter().enumerate() {
        let stream = seed.wrapping_add((ti as u64) << 32);
        for inst in random_bench_instances(
            *t,
            per_t,
            n_max,
            stream,
            (Rational::from_integer(0), int(2)),
        )?
        .into_iter()
        .enumerate()
        {
            jobs.push((*t, inst));
        }
    }
    map_items(mode, &jobs, |(t, (index, inst))| {
        let spec = spec_for(*t);
        let bound = spec
            .bound()
            .ok_or_else(|| Error::InvalidParams(format!("{} has no stated bound", spec.id())))?;
        let report = run_spec(&spec, &inst.sigma)?;
        let opt = exact_opt(&inst.sigma, budget)?.opt;
        Ok(GuaranteeCase {
            t: format_rational(t),
            index: *index,
            n: inst.sigma.len(),
            bins: report.bins_used,
            opt,
            bound: format_rational(&bound),
            holds: int(report.bins_used as i128) <= bound * int(opt as i128) + int(1),
        })
    })
    .into_iter()
    .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaSummary {
    pub k: u32,
    pub bins: usize,
    pub succeeded: usize,
    /// Largest number of vectors in one tested bin.
    pub max_items: usize,
    pub failures: Vec<Vec<String>>,
}

/// Draws `count` random feasible long-vector bins and repacks each one.
pub fn lemma_batch(
    k: u32,
    count: usize,
    max_items: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<LemmaSummary> {
    let indices: Vec<u64> = (0..count as u64).collect();
    let outcomes = map_items(mode, &indices, |&i| {
        let mut rng = SplitMix64::substream(seed, i);
        let bin = random_long_vector_bin(k, max_items, &mut rng);
        repack_two_and_half(&bin, k).map(|r| (bin, r.is_some()))
    });
    let mut summary = LemmaSummary {
        k,
        bins: count,
        succeeded: 0,
        max_items: 0,
        failures: Vec::new(),
    };
    for outcome in outcomes {
        let (bin, ok) = outcome?;
        summary.max_items = summary.max_items.max(bin.len());
        if ok {
            summary.succeeded += 1;
        } else {
            summary
                .failures
                .push(bin.iter().map(Vec2::to_string).collect());
        }
    }
    Ok(summary)
}

/// Counts of bin kinds summed over reports.
pub fn merge_kind_counts(reports: &[RunReport]) -> BTreeMap<&'static str, usize> {
    let mut out = BTreeMap::new();
    for r in reports {
        for (k, c) in &r.kind_counts {
            *out.entry(*k).or_insert(0) += c;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::DEFAULT_NODE_BUDGET;
    use crate::generators::anyfit_lower_bound_instance;

    #[test]
    fn firstfit_bench_row_reports_witness_ratio() {
        let inst = anyfit_lower_bound_instance(12, ratio(1, 1000), ratio(1, 1000)).unwrap();
        let bi = BenchInstance {
            id: "anyfit".into(),
            sigma: inst.sigma,
            witness: inst.witness,
        };
        let row = bench_row(&bi, &StrategySpec::FirstFit, 1000, false).unwrap();
        assert_eq!(row.bins, 26);
        assert_eq!(row.opt, 12);
        assert_eq!(row.ratio, "2.166667");
        assert_eq!(row.within_bound, None);
    }

    #[test]
    fn witness_stands_in_when_search_runs_out() {
        // load bounds say 2, the optimum is 3, so the search cannot stop early
        let sigma = vec![Vec2::from_ratios(3, 5, 3, 5); 3];
        let witness = Packing::from_groups(sigma.iter().map(|v| vec![*v]).collect());
        let opt = reference_opt(&sigma, Some(&witness), 1).unwrap();
        assert_eq!(
            opt,
            OptValue {
                value: 3,
                kind: OptKind::WitnessUpperBound
            }
        );
        assert!(reference_opt(&sigma, None, 1).is_err());
        let exact = reference_opt(&sigma, None, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(
            exact,
            OptValue {
                value: 3,
                kind: OptKind::Exact
            }
        );
    }

    #[test]
    fn sequential_and_parallel_batches_agree() {
        let insts =
            random_bench_instances(ratio(1, 2), 12, 8, 5, (Rational::from_integer(0), int(2)))
                .unwrap();
        let specs = [
            StrategySpec::FirstFit,
            StrategySpec::Restricted {
                variant: Variant::A,
                t: ratio(1, 2),
                epsilon: ratio(1, 2),
            },
        ];
        let a = bench_batch(
            &insts,
            &specs,
            DEFAULT_NODE_BUDGET,
            ExecMode::Sequential,
            false,
        )
        .unwrap();
        let b = bench_batch(
            &insts,
            &specs,
            DEFAULT_NODE_BUDGET,
            ExecMode::Parallel,
            false,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(bench_csv(&a), bench_csv(&b));
        assert_eq!(a.len(), 24);
    }

    #[test]
    fn curve_values() {
        let rows = curve_rows(
            &[int(1), ratio(7, 15), ratio(1, 4)],
            Rational::from_integer(0),
        );
        assert_eq!(rows[0].t, ratio(1, 4));
        assert_eq!(rows[0].c_combined, ratio(5, 2));
        assert_eq!(rows[1].c_a, ratio(5, 2));
        assert_eq!(rows[1].c_combined, ratio(5, 2));
        assert_eq!(rows[2].c_combined, int(2));
        let csv = curve_csv(&rows);
        assert!(csv
            .lines()
            .nth(3)
            .unwrap()
            .starts_with("1.0000000,0.000000,2.000000"));
        assert_eq!(
            csv,
            curve_csv(&curve_rows(
                &[ratio(1, 4), int(1), ratio(7, 15)],
                Rational::from_integer(0)
            ))
        );
    }

    #[test]
    fn spec_names() {
        let e = ratio(1, 2);
        assert!(StrategySpec::from_name("a", None, e, 100, ScaledMode::Desk).is_err());
        assert_eq!(
            StrategySpec::from_name("ak", None, e, 100, ScaledMode::Desk)
                .unwrap()
                .id(),
            "a-k100"
        );
        assert!(StrategySpec::from_name("bestfit", None, e, 100, ScaledMode::Desk).is_err());
    }

    #[test]
    fn small_lemma_batch() {
        let s = lemma_batch(100, 20, 5, 1, ExecMode::Sequential).unwrap();
        assert_eq!(s.succeeded, 20);
        assert!(s.failures.is_empty());
    }
}
