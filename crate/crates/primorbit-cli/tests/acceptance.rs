//! Acceptance gate: one test per certification criterion, each printing a
//! single pass line and enforcing its own runtime budget where one is set.
//! Oracles in `support` recompute everything by raw map stepping.

mod support;

use primorbit::dynsys::{FiniteSystem, MultiIndex};
use primorbit::fixtures;
use primorbit::lattice::Lattice;
use primorbit::repr::IntertwinerResult;
use primorbit::{groupoid, periodicity, primcat, repr};
use primorbit_cli::{cmd_analyze, cmd_graph, RunOptions};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::time::Instant;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn fixture_systems() -> Vec<FiniteSystem> {
    vec![
        fixtures::sys_cycle3(),
        fixtures::sys_collapse(),
        fixtures::sys_2cycles(),
        fixtures::sys_swap2(),
    ]
}

/// Whether T^m and T^n agree on every point of `set`, by raw stepping.
fn agree_on(sys: &FiniteSystem, set: &[usize], m: &[u64], n: &[u64]) -> bool {
    set.iter()
        .all(|&p| support::oracle_apply(sys, m, p) == support::oracle_apply(sys, n, p))
}

/// Whether T^m and T^n agree on some point of `set`, by raw stepping.
fn agree_somewhere(sys: &FiniteSystem, set: &[usize], m: &[u64], n: &[u64]) -> bool {
    set.iter()
        .any(|&p| support::oracle_apply(sys, m, p) == support::oracle_apply(sys, n, p))
}

#[test]
fn criterion_01_graph_golden_example() {
    let start = Instant::now();
    let report = cmd_graph(&fixture("graph_hs.json"), &["|e".to_string(), "|g".to_string()])
        .expect("graph command succeeds");
    let elapsed = start.elapsed();

    let value: serde_json::Value = serde_json::from_str(&report).unwrap();
    let entries = value["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2, "exactly two quasi-orbits");
    for entry in entries {
        assert_eq!(entry["displacement_group"], serde_json::json!([["1"]]));
        assert_eq!(entry["dual_rank"], 1);
        assert_eq!(entry["flagged"], false);
    }
    assert_eq!(entries[0]["representative"], "|e");
    assert_eq!(entries[1]["representative"], "|g");

    // closure[g-loop] is strictly inside closure[e-loop], which is everything.
    let closure = &value["closure_leq"];
    assert_eq!(closure[1][0], true, "closure of the g-loop orbit sits inside the e-loop closure");
    assert_eq!(closure[0][1], false, "the containment is strict");

    // Every kernel over the e-loop orbit sits inside every kernel over the
    // g-loop orbit, and not conversely.
    let kernels = &value["c0_kernel_leq"];
    assert_eq!(kernels[0][1], true);
    assert_eq!(kernels[1][0], false);

    let statement = value["closure_statement"].as_str().unwrap();
    assert!(statement.contains("not open"), "statement was {statement:?}");

    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    println!("acceptance criterion 1: PASS ({elapsed:?})");
}

#[test]
fn criterion_02_kernel_dichotomy() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut systems = fixture_systems();
    for _ in 0..50 {
        systems.push(support::random_system(&mut rng));
    }

    let mut equivalent_pairs = 0u32;
    let mut separated_pairs = 0u32;
    for sys in &systems {
        for _ in 0..20 {
            let x = rng.gen_range(0..sys.len());
            let y = rng.gen_range(0..sys.len());
            let theta = support::random_angle(&mut rng, sys.k(), 12);
            let omega = support::random_angle(&mut rng, sys.k(), 12);
            let verdict = primcat::equivalent(sys, x, &theta, y, &omega)
                .expect("equivalence decision succeeds");
            if verdict.equivalent {
                match repr::intertwiner(sys, x, &theta, &omega, 1e-9)
                    .expect("intertwiner construction succeeds")
                {
                    IntertwinerResult::Unitary { max_residual, .. } => {
                        assert!(
                            max_residual <= 1e-9,
                            "intertwiner residual {max_residual:.3e} for equivalent labels"
                        );
                    }
                    IntertwinerResult::NoneExists => {
                        panic!("equivalent labels must admit an intertwiner")
                    }
                }
                equivalent_pairs += 1;
            } else {
                let witness = primcat::separating_witness(sys, x, &theta, y, &omega, 1e-9)
                    .expect("witness construction succeeds");
                assert!(
                    witness.killed_norm <= 1e-9,
                    "killed norm {:.3e} exceeds tolerance",
                    witness.killed_norm
                );
                assert!(
                    witness.surviving_norm >= 1e-3,
                    "surviving norm {:.3e} below floor",
                    witness.surviving_norm
                );
                separated_pairs += 1;
            }
        }
    }

    let elapsed = start.elapsed();
    assert_eq!(equivalent_pairs + separated_pairs, 54 * 20);
    assert!(equivalent_pairs > 0, "the sample should contain equivalent pairs");
    assert!(separated_pairs > 0, "the sample should contain inequivalent pairs");
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget 60 s");
    println!(
        "acceptance criterion 2: PASS ({equivalent_pairs} intertwined, {separated_pairs} separated, {elapsed:?})"
    );
}

#[test]
fn criterion_03_identity_battery() {
    let start = Instant::now();
    for sys in &fixture_systems() {
        let report = repr::identity_battery(sys, 100, 1e-9, 0).expect("battery passes");
        assert_eq!(report.trials, 100);
        assert!(
            report.max_residual <= 1e-9,
            "max residual {:.3e}",
            report.max_residual
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}, budget 30 s");
    println!("acceptance criterion 3: PASS ({elapsed:?})");
}

#[test]
fn criterion_04_sigma_membership_oracle() {
    for sys in &fixture_systems() {
        let exponents = support::exponent_box(sys.k(), 6);
        for class in sys.quasi_orbits().classes {
            let profile = periodicity::profile(sys, class.representative).unwrap();
            for m in &exponents {
                for n in &exponents {
                    let computed = periodicity::sigma_member(
                        sys,
                        &profile,
                        &MultiIndex(m.clone()),
                        &MultiIndex(n.clone()),
                    )
                    .unwrap();
                    let brute = agree_on(sys, &profile.y, m, n);
                    assert_eq!(
                        computed, brute,
                        "membership of ({m:?}, {n:?}) on the quasi-orbit of {}",
                        sys.name(class.representative)
                    );
                }
            }
        }
    }
    println!("acceptance criterion 4: PASS");
}

#[test]
fn criterion_05_minimal_pairs() {
    // Golden value, checked against a brute-force extraction.
    let cycle3 = fixtures::sys_cycle3();
    let profile = periodicity::profile(&cycle3, 0).unwrap();
    let expected = vec![
        (MultiIndex(vec![0]), MultiIndex(vec![3])),
        (MultiIndex(vec![1]), MultiIndex(vec![1])),
        (MultiIndex(vec![3]), MultiIndex(vec![0])),
    ];
    assert_eq!(profile.sigma_min, expected);

    let exponents = support::exponent_box(1, 6);
    let mut brute_members: Vec<(Vec<u64>, Vec<u64>)> = Vec::new();
    for m in &exponents {
        for n in &exponents {
            if (m != n || m.iter().any(|&e| e != 0))
                && agree_somewhere(&cycle3, &profile.orbit, m, n)
            {
                brute_members.push((m.clone(), n.clone()));
            }
        }
    }
    let dominates = |a: &(Vec<u64>, Vec<u64>), b: &(Vec<u64>, Vec<u64>)| {
        a.0.iter().zip(&b.0).all(|(x, y)| x <= y) && a.1.iter().zip(&b.1).all(|(x, y)| x <= y)
    };
    let brute_minimal: Vec<&(Vec<u64>, Vec<u64>)> = brute_members
        .iter()
        .filter(|s| !brute_members.iter().any(|t| t != *s && dominates(t, s)))
        .collect();
    let as_pairs: Vec<(Vec<u64>, Vec<u64>)> = expected
        .iter()
        .map(|(m, n)| (m.0.clone(), n.0.clone()))
        .collect();
    assert_eq!(
        brute_minimal.iter().map(|s| (*s).clone()).collect::<Vec<_>>(),
        as_pairs
    );

    // Monoid generation reproduces the members, and minimality is an
    // antichain, on every fixture and quasi-orbit.
    for sys in &fixture_systems() {
        let k = sys.k();
        let exponents = support::exponent_box(k, 6);
        let side = 7usize;
        let index_of = |m: &[u64], n: &[u64]| -> usize {
            m.iter().chain(n).fold(0usize, |acc, &e| acc * side + e as usize)
        };
        for class in sys.quasi_orbits().classes {
            let profile = periodicity::profile(sys, class.representative).unwrap();
            for (i, a) in profile.sigma_min.iter().enumerate() {
                for (j, b) in profile.sigma_min.iter().enumerate() {
                    if i != j {
                        assert!(
                            !(a.0.le(&b.0) && a.1.le(&b.1)),
                            "{a:?} dominates {b:?} in sigma_min"
                        );
                    }
                }
            }

            // Pairs in ascending total-sum order, so every subtraction step
            // lands on an already-decided entry.
            let mut pairs: Vec<(&Vec<u64>, &Vec<u64>)> = Vec::new();
            for m in &exponents {
                for n in &exponents {
                    pairs.push((m, n));
                }
            }
            pairs.sort_by_key(|(m, n)| m.iter().chain(*n).sum::<u64>());
            let mut generated = vec![false; side.pow(2 * k as u32)];
            for (m, n) in &pairs {
                let ok = (m.iter().all(|&e| e == 0) && n.iter().all(|&e| e == 0))
                    || profile.sigma_min.iter().any(|(sm, sn)| {
                        sm.0.iter().zip(*m).all(|(a, b)| a <= b)
                            && sn.0.iter().zip(*n).all(|(a, b)| a <= b)
                            && {
                                let rm: Vec<u64> =
                                    m.iter().zip(&sm.0).map(|(a, b)| a - b).collect();
                                let rn: Vec<u64> =
                                    n.iter().zip(&sn.0).map(|(a, b)| a - b).collect();
                                generated[index_of(&rm, &rn)]
                            }
                    });
                generated[index_of(m, n)] = ok;
            }
            for (m, n) in &pairs {
                assert_eq!(
                    agree_somewhere(sys, &profile.orbit, m, n),
                    generated[index_of(m, n)],
                    "generation mismatch at ({m:?}, {n:?}) on the quasi-orbit of {}",
                    sys.name(class.representative)
                );
            }
        }
    }
    println!("acceptance criterion 5: PASS");
}

#[test]
fn criterion_06_irreducible_sets_are_orbit_closures() {
    for sys in &fixture_systems() {
        let classes = sys.quasi_orbits_with_bound(8);
        let subsets = classes
            .invariant_subsets
            .as_ref()
            .expect("fixtures are within the enumeration bound");

        // Irreducibility by definition: no decomposition into two proper
        // closed invariant subsets.
        let irreducible = |s: &Vec<usize>| -> bool {
            !subsets.iter().any(|a| {
                a != s
                    && a.iter().all(|p| s.contains(p))
                    && subsets.iter().any(|b| {
                        b != s
                            && b.iter().all(|p| s.contains(p))
                            && {
                                let mut union: Vec<usize> =
                                    a.iter().chain(b).copied().collect();
                                union.sort_unstable();
                                union.dedup();
                                &union == s
                            }
                    })
            })
        };

        let mut irreducible_sets: Vec<Vec<usize>> = subsets
            .iter()
            .filter(|s| !s.is_empty() && irreducible(s))
            .cloned()
            .collect();
        irreducible_sets.sort();
        let mut orbit_closures: Vec<Vec<usize>> = (0..sys.len())
            .map(|x| sys.orbit(x).unwrap())
            .collect();
        orbit_closures.sort();
        orbit_closures.dedup();
        assert_eq!(irreducible_sets, orbit_closures);

        for class in &classes.classes {
            assert_eq!(class.irreducible, irreducible(&class.members));
        }
    }
    println!("acceptance criterion 6: PASS");
}

#[test]
fn criterion_07_periodic_core_separates_closures() {
    for sys in &fixture_systems() {
        for x in 0..sys.len() {
            for y in 0..sys.len() {
                let same_core =
                    periodicity::profile(sys, x).unwrap().y == periodicity::profile(sys, y).unwrap().y;
                let same_closure = sys.orbit(x).unwrap() == sys.orbit(y).unwrap();
                assert_eq!(
                    same_core,
                    same_closure,
                    "points {} and {}",
                    sys.name(x),
                    sys.name(y)
                );
            }
        }
    }
    println!("acceptance criterion 7: PASS");
}

#[test]
fn criterion_08_quotient_principality() {
    for sys in &fixture_systems() {
        for class in sys.quasi_orbits().classes {
            let profile = periodicity::profile(sys, class.representative).unwrap();
            assert!(
                groupoid::quotient_isotropy_is_trivial(sys, &profile.y, &profile.h).unwrap(),
                "quasi-orbit of {}",
                sys.name(class.representative)
            );
        }
    }
    println!("acceptance criterion 8: PASS");
}

#[test]
fn criterion_09_collapse_dual_is_the_full_circle() {
    let sys = fixtures::sys_collapse();
    let entries = primcat::catalogue(&sys).unwrap();
    assert_eq!(entries.len(), 1, "one quasi-orbit");
    let entry = &entries[0];
    assert_eq!(entry.h, Lattice::full(1));
    assert_eq!(entry.dual_torus_rank, 1);
    assert_eq!(entry.annihilator_free_rank, 0);
    assert!(entry.annihilator_cyclic.is_empty());
    println!("acceptance criterion 9: PASS");
}

#[test]
fn criterion_10_reports_are_deterministic() {
    for name in ["cycle3.json", "swap2.json", "collapse.json", "2cycles.json"] {
        let path = fixture(name);
        let first = cmd_analyze(&path, &RunOptions::default()).unwrap();
        let second = cmd_analyze(&path, &RunOptions::default()).unwrap();
        assert_eq!(first, second, "report for {name} changed between runs");
    }
    println!("acceptance criterion 10: PASS");
}
