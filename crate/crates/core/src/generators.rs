//! Instance constructors: adversarial and tightness sequences with witness
//! packings, and seeded random instances.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{validate_packing, ConeParams, Packing, Vec2};
use crate::rational::{format_rational, int, ratio, Rational};
use crate::rng::SplitMix64;
use crate::scaled::is_short;

#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub sigma: Vec<Vec2>,
    /// A feasible packing, hence an upper bound on OPT.
    pub witness: Option<Packing>,
    /// Expected bin counts keyed by strategy or solver id.
    pub expected: BTreeMap<String, usize>,
    pub notes: String,
}

impl GeneratedInstance {
    fn new(sigma: Vec<Vec2>, witness: Option<Packing>, notes: String) -> Result<Self> {
        if let Some(w) = &witness {
            validate_packing(w, &sigma)
                .map_err(|v| Error::Infeasible(format!("generator witness rejected: {v:?}")))?;
        }
        Ok(GeneratedInstance {
            sigma,
            witness,
            expected: BTreeMap::new(),
            notes,
        })
    }
}

fn vec2(x: Rational, y: Rational) -> Result<Vec2> {
    Vec2::new(x, y)
}

fn repeat(v: Vec2, n: usize) -> impl Iterator<Item = Vec2> {
    std::iter::repeat_n(v, n)
}

/// Prefix of `N` copies of `(0, 1/2)`, then the classical three-class 1D
/// sequence `(1/7+ε, δ)`, `(1/3+ε, δ)`, `(1/2+ε, δ)`, `N` copies each.
///
/// FirstFit pairs the prefix into `N/2` bins that are saturated in `y`, so no
/// later vector can join them, and then needs `N/6 + N/2 + N` bins for the
/// suffix: `13N/6` in total against `N` bins in the witness. Substituting a
/// 1D gadget with FirstFit ratio 17/10 raises the 2D ratio to 11/5.
pub fn anyfit_lower_bound_instance(
    n: usize,
    eps: Rational,
    delta: Rational,
) -> Result<GeneratedInstance> {
    if n == 0 || !n.is_multiple_of(6) {
        return Err(Error::InvalidParams(format!(
            "N = {n} must be a positive multiple of 6"
        )));
    }
    let one = Rational::one();
    let p_min = ratio(1, 7) + eps;
    let bad = |why: &str| Err(Error::InvalidParams(why.to_string()));
    if eps <= Rational::zero() || delta <= Rational::zero() {
        return bad("eps and delta must be positive");
    }
    if int(6) * p_min > one {
        return bad("6·(1/7 + eps) exceeds 1");
    }
    if ratio(1, 7) + ratio(1, 3) + ratio(1, 2) + int(3) * eps > one {
        return bad("one vector of each suffix class no longer fits a bin");
    }
    if delta >= p_min / int(2) {
        return bad("delta must be below (1/7 + eps)/2");
    }
    if int(3) * delta + ratio(1, 2) > one {
        return bad("3·delta + 1/2 exceeds 1");
    }
    let prefix = vec2(Rational::zero(), ratio(1, 2))?;
    let classes = [
        vec2(ratio(1, 7) + eps, delta)?,
        vec2(ratio(1, 3) + eps, delta)?,
        vec2(ratio(1, 2) + eps, delta)?,
    ];
    let mut sigma: Vec<Vec2> = repeat(prefix, n).collect();
    for c in classes {
        sigma.extend(repeat(c, n));
    }
    let witness = Packing::from_groups(
        (0..n)
            .map(|_| vec![prefix, classes[0], classes[1], classes[2]])
            .collect(),
    );
    let mut inst = GeneratedInstance::new(
        sigma,
        Some(witness),
        format!(
            "anyfit lower bound: N={n}, eps={}, delta={}; 1D suffix gadget has FirstFit ratio 5/3",
            format_rational(&eps),
            format_rational(&delta)
        ),
    )?;
    inst.expected.insert("opt".into(), n);
    inst.expected
        .insert("firstfit".into(), n / 2 + n / 6 + n / 2 + n);
    Ok(inst)
}

fn check_eps_for_k(eps: &Rational, k: u32) -> Result<()> {
    if *eps <= Rational::zero() || *eps >= ratio(1, 3 * k as i128) {
        return Err(Error::InvalidParams(format!(
            "eps = {} must lie in (0, 1/(3k)) for k = {k}",
            format_rational(eps)
        )));
    }
    Ok(())
}

fn require_long(vs: &[Vec2], k: u32) -> Result<()> {
    match vs.iter().find(|v| is_short(v, k)) {
        Some(v) => Err(Error::InvalidParams(format!("{v} is short for k = {k}"))),
        None => Ok(()),
    }
}

/// `s` copies each of `(1/2−2ε, ε)`, `(1/2+ε, ε)` and `(ε, 1−2ε)`.
/// OPT is `s`, while the k-scaled vectors need `⌈5s/2⌉` bins.
pub fn even_k_tightness(s: usize, k: u32, eps: Rational) -> Result<GeneratedInstance> {
    if !k.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!("k = {k} must be even")));
    }
    check_eps_for_k(&eps, k)?;
    let classes = [
        vec2(ratio(1, 2) - int(2) * eps, eps)?,
        vec2(ratio(1, 2) + eps, eps)?,
        vec2(eps, int(1) - int(2) * eps)?,
    ];
    require_long(&classes, k)?;
    let sigma: Vec<Vec2> = classes.iter().flat_map(|c| repeat(*c, s)).collect();
    let witness = Packing::from_groups((0..s).map(|_| classes.to_vec()).collect());
    let mut inst = GeneratedInstance::new(
        sigma,
        Some(witness),
        format!(
            "even-k tightness: s={s}, k={k}, eps={}",
            format_rational(&eps)
        ),
    )?;
    inst.expected.insert("opt".into(), s);
    inst.expected
        .insert("scaled-opt".into(), (5 * s).div_ceil(2));
    Ok(inst)
}

/// `2s` copies of `(1/2−ε, ε)` and `s` copies of `(2ε, 1−2ε)` for odd `k`.
/// No two scaled vectors share a bin, so the scaled packing needs `3s` bins.
pub fn odd_k_adversary(s: usize, k: u32, eps: Rational) -> Result<GeneratedInstance> {
    if k.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!("k = {k} must be odd")));
    }
    check_eps_for_k(&eps, k)?;
    let classes = [
        vec2(ratio(1, 2) - eps, eps)?,
        vec2(int(2) * eps, int(1) - int(2) * eps)?,
    ];
    require_long(&classes, k)?;
    let mut sigma: Vec<Vec2> = repeat(classes[0], 2 * s).collect();
    sigma.extend(repeat(classes[1], s));
    let witness = Packing::from_groups(
        (0..s)
            .map(|_| vec![classes[0], classes[0], classes[1]])
            .collect(),
    );
    let mut inst = GeneratedInstance::new(
        sigma,
        Some(witness),
        format!(
            "odd-k adversary: s={s}, k={k}, eps={}",
            format_rational(&eps)
        ),
    )?;
    inst.expected.insert("opt".into(), s);
    inst.expected.insert("scaled-opt".into(), 3 * s);
    Ok(inst)
}

/// Resolution of the direction and length grids used by random sampling.
pub const GRID: u64 = 1000;

/// `n` random vectors inside the cone of slope `t`.
///
/// The direction is the fraction `f = y/(x+y)`, drawn from `GRID + 1` evenly
/// spaced points of `[t/(1+t), 1/(1+t)]`. The L1 norm is drawn from `GRID`
/// evenly spaced points of `(lo, hi]` and then capped, on a `1/GRID` grid, so
/// both coordinates stay at most 1. Every draw is exact, so instances are reproducible bit for bit.
pub fn random_cone_instance(
    n: usize,
    t: Rational,
    seed: u64,
    l1_range: (Rational, Rational),
) -> Result<GeneratedInstance> {
    let cone = ConeParams::new(t)?;
    let (lo, hi) = l1_range;
    if lo < Rational::zero() || hi > int(2) || lo >= hi {
        return Err(Error::InvalidParams(format!(
            "L1 range ({}, {}] must lie inside (0, 2]",
            format_rational(&lo),
            format_rational(&hi)
        )));
    }
    let one = Rational::one();
    let f_lo = t / (one + t);
    let f_hi = one / (one + t);
    let grid = int(GRID as i128);
    let mut rng = SplitMix64::new(seed);
    let mut sigma = Vec::with_capacity(n);
    for _ in 0..n {
        let g = int(rng.range_inclusive(0, GRID) as i128);
        let m = int(rng.range_inclusive(1, GRID) as i128);
        let f = f_lo + (f_hi - f_lo) * g / grid;
        // cap snapped down to the grid keeps denominators bounded
        let cap = (one / f.max(one - f) * grid).floor() / grid;
        let l1 = (lo + (hi - lo) * m / grid).min(cap);
        let v = vec2(l1 * (one - f), l1 * f)?;
        debug_assert!(cone.contains(&v));
        sigma.push(v);
    }
    GeneratedInstance::new(
        sigma,
        None,
        format!(
            "random cone instance: n={n}, t={}, seed={seed}",
            format_rational(&t)
        ),
    )
}

/// Contents of one feasible bin made of long vectors only, for the repacking lemma.
///
/// Vectors are drawn one at a time against the remaining capacity, each long in
/// a randomly chosen coordinate and mostly close to the long threshold, on a
/// grid of `1/(GRID·k)`. At most
/// `max_items` vectors are drawn; the result is never empty.
pub fn random_long_vector_bin(k: u32, max_items: usize, rng: &mut SplitMix64) -> Vec<Vec2> {
    let unit = GRID * k as u64;
    let threshold = 40 * GRID; // 40/k on the 1/unit grid
    let mut rem = [unit, unit];
    let mut out = Vec::new();
    let target = rng.range_inclusive(1, max_items.max(1) as u64) as usize;
    let mut attempts = 0;
    while out.len() < target && attempts < 8 * target {
        attempts += 1;
        let axis = usize::from(rng.coin());
        if rem[axis] <= threshold {
            continue;
        }
        // mostly just above the threshold, so several vectors fit
        let long_hi = if rng.below(4) == 0 {
            rem[axis]
        } else {
            rem[axis].min(2 * threshold)
        };
        let long = rng.range_inclusive(threshold + 1, long_hi);
        let other = match rng.below(4) {
            0 => rem[1 - axis],
            1 => rng.range_inclusive(0, rem[1 - axis]),
            _ => rng.range_inclusive(0, rem[1 - axis] / 4),
        };
        let mut c = [0u64; 2];
        c[axis] = long;
        c[1 - axis] = other;
        rem[0] -= c[0];
        rem[1] -= c[1];
        let v = Vec2::new(
            ratio(c[0] as i128, unit as i128),
            ratio(c[1] as i128, unit as i128),
        )
        .expect("coordinates come from the remaining capacity");
        out.push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_online, FirstFit};
    use crate::model::Load2;

    #[test]
    fn anyfit_instance_small() {
        let inst = anyfit_lower_bound_instance(12, ratio(1, 1000), ratio(1, 1000)).unwrap();
        assert_eq!(inst.witness.as_ref().unwrap().len(), 12);
        assert_eq!(inst.expected["firstfit"], 26);
        assert_eq!(
            run_online(&mut FirstFit::new(), &inst.sigma)
                .unwrap()
                .bins_used,
            26
        );
        let six = anyfit_lower_bound_instance(6, ratio(1, 1000), ratio(1, 1000)).unwrap();
        assert_eq!(
            run_online(&mut FirstFit::new(), &six.sigma)
                .unwrap()
                .bins_used,
            13
        );
    }

    #[test]
    fn anyfit_preconditions() {
        let e = ratio(1, 1000);
        assert!(anyfit_lower_bound_instance(12, e, (ratio(1, 7) + e) / int(2)).is_err());
        assert!(anyfit_lower_bound_instance(10, e, e).is_err());
        assert!(anyfit_lower_bound_instance(0, e, e).is_err());
        assert!(anyfit_lower_bound_instance(6, ratio(1, 10), e).is_err());
    }

    #[test]
    fn tightness_generators() {
        let inst = even_k_tightness(4, 100, ratio(1, 1000)).unwrap();
        assert_eq!(inst.witness.as_ref().unwrap().len(), 4);
        assert_eq!(inst.expected["scaled-opt"], 10);
        assert_eq!(
            even_k_tightness(1, 100, ratio(1, 1000)).unwrap().expected["scaled-opt"],
            3
        );
        assert!(even_k_tightness(4, 80, ratio(1, 1000)).is_err());
        assert!(even_k_tightness(4, 100, ratio(1, 300)).is_err());
        assert!(even_k_tightness(4, 99, ratio(1, 1000)).is_err());

        let odd = odd_k_adversary(10, 99, ratio(1, 1000)).unwrap();
        assert_eq!(odd.witness.as_ref().unwrap().len(), 10);
        assert_eq!(odd.expected["scaled-opt"], 30);
        assert!(odd_k_adversary(10, 99, ratio(1, 100)).is_err());
        assert!(odd_k_adversary(10, 100, ratio(1, 1000)).is_err());
    }

    #[test]
    fn random_instances() {
        let t = ratio(1, 2);
        let range = (Rational::zero(), int(2));
        assert!(random_cone_instance(0, t, 1, range)
            .unwrap()
            .sigma
            .is_empty());
        let a = random_cone_instance(50, t, 9, range).unwrap();
        let b = random_cone_instance(50, t, 9, range).unwrap();
        assert_eq!(a.sigma, b.sigma);
        let cone = ConeParams::new(t).unwrap();
        assert!(a.sigma.iter().all(|v| cone.contains(v)));
        assert!(random_cone_instance(3, t, 1, (int(1), int(1))).is_err());
    }

    #[test]
    fn long_bins_are_feasible_and_long() {
        let mut rng = SplitMix64::new(3);
        for k in [100, 200] {
            for _ in 0..200 {
                let bin = random_long_vector_bin(k, 6, &mut rng);
                assert!(!bin.is_empty());
                assert!(bin.iter().all(|v| !is_short(v, k)));
                let s = bin.iter().fold(Load2::default(), |acc, v| acc.add(v));
                assert!(s.within_unit());
            }
        }
    }
}
