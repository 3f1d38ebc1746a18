//! Brute-force oracles shared by the integration tests. They enumerate every
//! set partition, pruning only partial assignments that already overflow a bin.

#![allow(dead_code)]

use vecpack::model::{Load2, Vec2};
use vecpack::rational::{ratio, Rational};
use vecpack::scaled::BoxIndex;

fn search(items: &[Vec2], pos: usize, sums: &mut Vec<Load2>, best: &mut usize) {
    if pos == items.len() {
        *best = (*best).min(sums.len());
        return;
    }
    for b in 0..sums.len() {
        let next = sums[b].add(&items[pos]);
        if next.within_unit() {
            let saved = sums[b];
            sums[b] = next;
            search(items, pos + 1, sums, best);
            sums[b] = saved;
        }
    }
    sums.push(Load2::default().add(&items[pos]));
    search(items, pos + 1, sums, best);
    sums.pop();
}

/// Fewest bins over all partitions of `items`.
pub fn brute_force_opt(items: &[Vec2]) -> usize {
    let mut best = items.len();
    search(items, 0, &mut Vec::new(), &mut best);
    best
}

/// Fewest bins for the scaled vectors `(i/k, j/k)` of the given boxes.
pub fn brute_force_scaled(boxes: &[(BoxIndex, u64)], k: u32) -> usize {
    let items: Vec<Vec2> = boxes
        .iter()
        .flat_map(|(b, c)| {
            std::iter::repeat_n(
                Vec2::new(ratio(b.i as i128, k as i128), ratio(b.j as i128, k as i128)).unwrap(),
                *c as usize,
            )
        })
        .collect();
    brute_force_opt(&items)
}

pub fn v(xn: i128, xd: i128, yn: i128, yd: i128) -> Vec2 {
    Vec2::from_ratios(xn, xd, yn, yd)
}

pub fn r(n: i128, d: i128) -> Rational {
    ratio(n, d)
}
