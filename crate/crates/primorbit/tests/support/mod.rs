//! Definition-driven oracles and random-input generators.
//!
//! Everything here recomputes groupoid facts straight from the defining
//! formulas by bounded exhaustive search, stepping the maps one
//! application at a time. No orbit search, no clamping shortcut, no
//! product-automaton reachability: the point is to disagree with the
//! library if the library is wrong.

#![allow(dead_code)]

use primorbit::dynsys::FiniteSystem;
use primorbit::lattice::{vec_bigint, Lattice, RationalAngle};
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

/// Memoized table of T^m x over the box [0, bound]^k: entry for m is
/// obtained from a predecessor by one step, so the whole table costs one
/// map application per entry.
pub fn trajectory_table(sys: &FiniteSystem, x: usize, bound: u64) -> Vec<usize> {
    let k = sys.k();
    let side = bound as usize + 1;
    let size = side.pow(k as u32);
    let mut table = vec![usize::MAX; size];
    table[0] = x;
    for flat in 1..size {
        // First nonzero coordinate, counting from the last (fastest) axis.
        let mut rem = flat;
        let mut coords = vec![0usize; k];
        for i in (0..k).rev() {
            coords[i] = rem % side;
            rem /= side;
        }
        let i = (0..k).find(|&i| coords[i] > 0).expect("flat > 0");
        let stride = side.pow((k - 1 - i) as u32);
        table[flat] = sys.step(i, table[flat - stride]);
    }
    table
}

/// Whether some pair of exponents in [0, 2|X|]^k witnesses T^m x = T^n y.
/// Each coordinate map is eventually periodic with preperiod plus period
/// at most |X|, so exponents beyond 2|X| only revisit earlier values.
pub fn oracle_related(sys: &FiniteSystem, x: usize, y: usize) -> bool {
    let bound = 2 * sys.len() as u64;
    let tx = trajectory_table(sys, x, bound);
    let ty = trajectory_table(sys, y, bound);
    let hit: std::collections::BTreeSet<usize> = tx.into_iter().collect();
    ty.iter().any(|p| hit.contains(p))
}

/// The orbit of x by definition, sorted.
pub fn oracle_orbit(sys: &FiniteSystem, x: usize) -> Vec<usize> {
    (0..sys.len())
        .filter(|&y| oracle_related(sys, x, y))
        .collect()
}

/// Whether (x, g, y) lies in the groupoid, by searching the defining
/// equation T^{g⁺+p} x = T^{g⁻+p} y over p in [0, 2|X|²]^k. The paired
/// trajectory (T^m x, T^m y) lives on |X|² states per coordinate, so its
/// preperiod plus period is at most |X|² and larger p only repeats.
pub fn oracle_contains(sys: &FiniteSystem, x: usize, g: &[i64], y: usize) -> bool {
    let n = sys.len() as u64;
    let bound = 2 * n * n;
    let gp: Vec<u64> = g.iter().map(|&v| v.max(0) as u64).collect();
    let gm: Vec<u64> = g.iter().map(|&v| (-v).max(0) as u64).collect();
    let u0 = oracle_apply(sys, &gp, x);
    let v0 = oracle_apply(sys, &gm, y);
    let tu = trajectory_table(sys, u0, bound);
    let tv = trajectory_table(sys, v0, bound);
    tu.iter().zip(&tv).any(|(a, b)| a == b)
}

/// Isotropy displacements of y within the box [-g_bound, g_bound]^k.
pub fn oracle_isotropy(sys: &FiniteSystem, y: usize, g_bound: i64) -> Vec<Vec<i64>> {
    signed_box(sys.k(), g_bound)
        .into_iter()
        .filter(|g| oracle_contains(sys, y, g, y))
        .collect()
}

/// The displacement group of the orbit of x: the subgroup generated by
/// every point's isotropy displacements. Entries of a generating set are
/// bounded by twice the point count (preperiod plus period per
/// coordinate), so the box below captures generators.
pub fn oracle_h(sys: &FiniteSystem, x: usize) -> Lattice {
    let bound = 2 * sys.len() as i64;
    let mut gens: Vec<Vec<num_bigint::BigInt>> = Vec::new();
    for y in oracle_orbit(sys, x) {
        for g in oracle_isotropy(sys, y, bound) {
            gens.push(vec_bigint(&g));
        }
    }
    Lattice::hnf(sys.k(), &gens).expect("consistent arity")
}

/// All integer vectors in [-bound, bound]^k.
pub fn signed_box(k: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * (2 * bound as usize + 1));
        for v in &out {
            for e in -bound..=bound {
                let mut w = v.clone();
                w.push(e);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// Random commuting system. k = 1 systems are arbitrary; k = 2 systems
/// come from constructive commuting families (powers of one map, or a
/// product of two independent one-coordinate systems), with occasional
/// rejection-sampled small pairs.
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
            let a = rng.gen_range(2..=2);
            let b = rng.gen_range(2..=2);
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
