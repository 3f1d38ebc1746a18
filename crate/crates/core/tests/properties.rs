mod common;

use proptest::prelude::*;

use common::brute_force_opt;
use vecpack::advice::{oracle_restricted, oracle_scaled, AdvicePayload, PayloadCounts};
use vecpack::engine::{check_anyfit, run_online, FirstFit, OnlineStrategy};
use vecpack::exact::{exact_opt, verify_witness, DEFAULT_NODE_BUDGET};
use vecpack::generators::{random_cone_instance, random_long_vector_bin};
use vecpack::harness::{run_spec, StrategySpec};
use vecpack::model::{opt_load_lower_bound, BinLabel, ConeParams, Vec2};
use vecpack::rational::{int, ratio, Rational};
use vecpack::restricted::{classify, make_params, GroupTag, RestrictedStrategy, Variant};
use vecpack::rng::SplitMix64;
use vecpack::scaled::{
    box_of, is_short, k_scale, repack_two_and_half, solve_scaled_opt, solve_scaled_opt_with,
    BoxCounts, BoxIndex, ScaledMode, ScaledParams, ScaledStrategy, SolverMethod,
};

fn arb_vec(den: i128) -> impl Strategy<Value = Vec2> {
    (0..=den, 0..=den).prop_map(move |(x, y)| Vec2::new(ratio(x, den), ratio(y, den)).unwrap())
}

fn arb_sigma(max_len: usize) -> impl Strategy<Value = Vec<Vec2>> {
    prop_oneof![Just(10i128), Just(20), Just(1000)]
        .prop_flat_map(move |den| proptest::collection::vec(arb_vec(den), 0..=max_len))
}

fn arb_slope() -> impl Strategy<Value = Rational> {
    prop_oneof![
        Just(int(1)),
        Just(ratio(1, 2)),
        Just(ratio(7, 15)),
        Just(ratio(1, 3)),
        (34i128..=100).prop_map(|n| ratio(n, 100)),
    ]
}

fn arb_l1_range() -> impl Strategy<Value = (Rational, Rational)> {
    prop_oneof![
        Just((int(0), int(2))),
        Just((int(0), ratio(2, 3))),
        Just((ratio(1, 2), ratio(3, 2))),
        Just((int(0), ratio(1, 10))),
    ]
}

fn arb_long_counts(k: u32) -> impl Strategy<Value = BoxCounts> {
    proptest::collection::vec((41..=k, 1..=k, any::<bool>(), 1u64..=4), 1..=4).prop_map(
        move |entries| {
            let mut counts = BoxCounts::default();
            for (long, other, flip, c) in entries {
                let b = if flip {
                    BoxIndex { i: other, j: long }
                } else {
                    BoxIndex { i: long, j: other }
                };
                counts.add(b, c);
            }
            counts
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn k_scale_dominates(v in arb_vec(1000), k in 1u32..300) {
        let s = k_scale(&v, k);
        prop_assert!(s.x() >= v.x() && s.y() >= v.y());
        let gap = s.l1_norm() - v.l1_norm();
        let limit = ratio(2, k as i128);
        if v.x().numer() == &0 || v.y().numer() == &0 {
            prop_assert!(gap <= limit);
        } else {
            prop_assert!(gap < limit);
        }
        let b = box_of(&v, k);
        prop_assert!(b.i >= 1 && b.i <= k && b.j >= 1 && b.j <= k);
    }

    #[test]
    fn scaled_solution_is_feasible_and_complete(counts in arb_long_counts(100)) {
        let sol = solve_scaled_opt(&counts, 100).unwrap();
        let mut seen = BoxCounts::default();
        for t in &sol.per_bin {
            prop_assert!(t.is_feasible(100));
            prop_assert!(t.cardinality() <= 2 * (100 / 40));
            for b in t.items() {
                seen.add(b, 1);
            }
        }
        prop_assert_eq!(seen, counts.clone());
        prop_assert_eq!(sol.per_bin.len(), sol.bins);
        let bnb = solve_scaled_opt_with(&counts, 100, SolverMethod::BranchAndBound, DEFAULT_NODE_BUDGET).unwrap();
        prop_assert_eq!(bnb.bins, sol.bins);
    }

    #[test]
    fn exact_optimum_properties(sigma in arb_sigma(9), seed in any::<u64>()) {
        let sol = exact_opt(&sigma, DEFAULT_NODE_BUDGET).unwrap();
        prop_assert!(verify_witness(sol.opt, &sol.witness, &sigma));
        prop_assert!(sol.opt >= opt_load_lower_bound(&sigma));
        prop_assert!(sol.opt <= run_online(&mut FirstFit::new(), &sigma).unwrap().bins_used);
        let mut shuffled = sigma.clone();
        let mut rng = SplitMix64::new(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.below(i as u64 + 1) as usize);
        }
        prop_assert_eq!(exact_opt(&shuffled, DEFAULT_NODE_BUDGET).unwrap().opt, sol.opt);
        if sigma.len() <= 7 {
            prop_assert_eq!(sol.opt, brute_force_opt(&sigma));
        }
    }

    #[test]
    fn first_fit_is_anyfit(sigma in arb_sigma(30)) {
        let report = run_online(&mut FirstFit::new(), &sigma).unwrap();
        prop_assert!(check_anyfit(&report.packing.trace));
    }

    #[test]
    fn every_strategy_packs_feasibly_and_deterministically(
        t in arb_slope(),
        range in arb_l1_range(),
        n in 0usize..40,
        seed in any::<u64>(),
    ) {
        let sigma = random_cone_instance(n, t, seed, range).unwrap().sigma;
        let mut specs = vec![
            StrategySpec::FirstFit,
            StrategySpec::Restricted { variant: Variant::APrime, t, epsilon: ratio(1, 4) },
            StrategySpec::Combined { t, epsilon: ratio(1, 4), k: 100 },
            StrategySpec::Scaled { k: 100, mode: ScaledMode::Desk },
        ];
        if t > ratio(1, 3) {
            specs.push(StrategySpec::Restricted { variant: Variant::A, t, epsilon: ratio(1, 4) });
        }
        for spec in &specs {
            let a = run_spec(spec, &sigma).unwrap();
            let b = run_spec(spec, &sigma).unwrap();
            prop_assert_eq!(&a.packing.trace, &b.packing.trace);
            prop_assert_eq!(a.bins_used, b.bins_used);
        }
    }

    #[test]
    fn restricted_bookkeeping(
        t in arb_slope(),
        range in arb_l1_range(),
        n in 0usize..40,
        seed in any::<u64>(),
        prime in any::<bool>(),
    ) {
        let variant = if prime || t <= ratio(1, 3) { Variant::APrime } else { Variant::A };
        let p = make_params(t, ratio(1, 2), variant).unwrap();
        let sigma = random_cone_instance(n, t, seed, range).unwrap().sigma;
        let payload = oracle_restricted(&sigma, &p).unwrap();
        let mut s = RestrictedStrategy::from_payload(p.clone(), &payload).unwrap();
        for v in &sigma {
            s.step(v).unwrap();
            for bin in s.bins() {
                prop_assert!(bin.virtual_load() >= bin.load());
                prop_assert!(bin.sum().within_unit());
                prop_assert!(bin.virtual_load() <= int(2));
            }
        }
        let bins = s.bins().to_vec();
        let overflow = bins.iter().filter(|b| b.label() == BinLabel::Overflow).count();
        if overflow == 0 {
            let mut h = 0;
            let mut l = 0;
            let mut m = 0;
            let mut small: usize = 0;
            for v in &sigma {
                match classify(v, &p).unwrap().tag {
                    GroupTag::Huge => h += 1,
                    GroupTag::Large => l += 1,
                    GroupTag::Medium => m += 1,
                    GroupTag::Small => small += 1,
                    GroupTag::Tiny => {}
                }
            }
            prop_assert_eq!(bins.len(), h + l + m + small.div_ceil(2));
        }
        // oracle totals match the classifier
        let PayloadCounts::Restricted { large, medium, small } = &payload.counts else { unreachable!() };
        let counted: u64 = large.iter().chain(medium).chain(small).sum();
        let classified = sigma
            .iter()
            .filter(|v| matches!(
                classify(v, &p).unwrap().tag,
                GroupTag::Large | GroupTag::Medium | GroupTag::Small
            ))
            .count();
        prop_assert_eq!(counted as usize, classified);
    }

    #[test]
    fn classification_partitions_the_cone(t in arb_slope(), f in 0u32..=100, l in 1u32..=200) {
        let p = make_params(t, ratio(1, 8), Variant::APrime).unwrap();
        let cone = ConeParams::new(t).unwrap();
        let fl = t / (int(1) + t);
        let fh = int(1) / (int(1) + t);
        let frac = fl + (fh - fl) * ratio(f as i128, 100);
        let len = ratio(l as i128, 100).min(int(1) / frac.max(int(1) - frac));
        let v = Vec2::new(len * (int(1) - frac), len * frac).unwrap();
        prop_assert!(cone.contains(&v));
        let g = classify(&v, &p).unwrap();
        match g.tag {
            GroupTag::Small | GroupTag::Medium | GroupTag::Large => {
                let strip = g.strip.unwrap();
                let (lo, hi) = p.strip_bounds(g.tag, strip).unwrap();
                prop_assert!(lo < v.l1_norm() && v.l1_norm() <= hi);
            }
            _ => prop_assert!(g.strip.is_none()),
        }
    }

    #[test]
    fn scaled_strategy_guarantee(
        n in 0usize..40,
        seed in any::<u64>(),
        range in arb_l1_range(),
    ) {
        // unrestricted vectors: the cone with t close to 0 covers nearly the whole square
        let sigma = random_cone_instance(n, ratio(1, 50), seed, range).unwrap().sigma;
        let k = 100;
        let p = ScaledParams::new(k, ScaledMode::Desk).unwrap();
        let payload: AdvicePayload = oracle_scaled(&sigma, &p);
        let mut s = ScaledStrategy::from_payload(p, &payload).unwrap();
        let scaled_opt = s.solution().bins;
        let report = run_online(&mut s, &sigma).unwrap();
        let overflow = report.kind_counts.get("overflow").copied().unwrap_or(0);
        if overflow == 0 {
            prop_assert_eq!(report.bins_used, scaled_opt);
        } else {
            // every bin but the last overflow bin carries load above 9/10 - 80/k
            let load: Rational = sigma.iter().map(Vec2::l1_norm).sum();
            let per_bin = ratio(9, 10) - ratio(80, k as i128);
            let bound = (load / per_bin).ceil().to_integer() as usize;
            prop_assert!(report.bins_used <= bound + 1, "bins {} bound {}", report.bins_used, bound);
        }
        prop_assert_eq!(
            BoxCounts::of_long_vectors(&sigma, k).total() as usize,
            sigma.iter().filter(|v| !is_short(v, k)).count()
        );
    }

    #[test]
    fn lemma_holds_on_random_bins(seed in any::<u64>(), big in any::<bool>()) {
        let k = if big { 200 } else { 100 };
        let mut rng = SplitMix64::new(seed);
        let bin = random_long_vector_bin(k, 8, &mut rng);
        prop_assert!(repack_two_and_half(&bin, k).unwrap().is_some());
    }
}
