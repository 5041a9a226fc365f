//! Oracle helpers for the acceptance gate: definition-driven evaluation by
//! single map steps, plus random commuting systems and rational angles.

#![allow(dead_code)]

use primorbit::dynsys::FiniteSystem;
use primorbit::lattice::RationalAngle;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Apply T^m by stepping coordinate maps one application at a time.
pub fn oracle_apply(sys: &FiniteSystem, m: &[u64], x: usize) -> usize {
    let mut p = x;
    for (i, &mi) in m.iter().enumerate() {
        for _ in 0..mi {
            p = sys.step(i, p);
        }
    }
    p
}

/// All exponent vectors in the box [0, bound]^k in lexicographic order.
pub fn exponent_box(k: usize, bound: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * (bound as usize + 1));
        for v in &out {
            for e in 0..=bound {
                let mut w = v.clone();
                w.push(e);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// Random commuting system with at most 6 points and k at most 2. k = 1
/// systems are arbitrary; k = 2 systems come from constructive commuting
/// families, with occasional rejection-sampled small pairs.
pub fn random_system(rng: &mut ChaCha8Rng) -> FiniteSystem {
    let names = |n: usize| (0..n).map(|i| format!("x{i}")).collect::<Vec<_>>();
    let random_map = |rng: &mut ChaCha8Rng, n: usize| -> Vec<usize> {
        (0..n).map(|_| rng.gen_range(0..n)).collect()
    };
    match rng.gen_range(0..4) {
        0 => {
            let n = rng.gen_range(2..=6);
            FiniteSystem::validate_system(names(n), vec![random_map(rng, n)]).unwrap()
        }
        1 => {
            // Two commuting maps: the second is a power of the first.
            let n = rng.gen_range(2..=4);
            let t1 = random_map(rng, n);
            let j = rng.gen_range(0..=3);
            let mut t2: Vec<usize> = (0..n).collect();
            for _ in 0..j {
                t2 = t2.iter().map(|&x| t1[x]).collect();
            }
            FiniteSystem::validate_system(names(n), vec![t1, t2]).unwrap()
        }
        2 => {
            // Product of two independent one-coordinate systems.
            let (a, b) = (2, 2);
            let f = random_map(rng, a);
            let g = random_map(rng, b);
            let n = a * b;
            let mut t1 = vec![0usize; n];
            let mut t2 = vec![0usize; n];
            for i in 0..a {
                for j in 0..b {
                    t1[i * b + j] = f[i] * b + j;
                    t2[i * b + j] = i * b + g[j];
                }
            }
            FiniteSystem::validate_system(names(n), vec![t1, t2]).unwrap()
        }
        _ => {
            // Rejection sampling over small point sets.
            let n = rng.gen_range(2..=3);
            for _ in 0..100 {
                let t1 = random_map(rng, n);
                let t2 = random_map(rng, n);
                if (0..n).all(|x| t1[t2[x]] == t2[t1[x]]) {
                    return FiniteSystem::validate_system(names(n), vec![t1, t2]).unwrap();
                }
            }
            let t1 = random_map(rng, n);
            FiniteSystem::validate_system(names(n), vec![t1.clone(), t1]).unwrap()
        }
    }
}

/// Random rational angle with entry denominators up to `max_den`.
pub fn random_angle(rng: &mut ChaCha8Rng, k: usize, max_den: i64) -> RationalAngle {
    RationalAngle::from_ratios(
        &(0..k)
            .map(|_| {
                let d = rng.gen_range(1..=max_den);
                (rng.gen_range(0..d), d)
            })
            .collect::<Vec<_>>(),
    )
}
