//! Small named systems and graphs used across the test suite and as CLI
//! demo inputs.

use crate::dynsys::FiniteSystem;
use crate::pathspace::FiniteGraph;

/// One map cycling three points: p0 -> p1 -> p2 -> p0.
pub fn sys_cycle3() -> FiniteSystem {
    FiniteSystem::validate_system(
        vec!["p0".into(), "p1".into(), "p2".into()],
        vec![vec![1, 2, 0]],
    )
    .expect("fixture is valid")
}

/// Two commuting maps on {a, b}: T1 swaps, T2 is the identity.
pub fn sys_swap2() -> FiniteSystem {
    FiniteSystem::validate_system(
        vec!["a".into(), "b".into()],
        vec![vec![1, 0], vec![0, 1]],
    )
    .expect("fixture is valid")
}

/// One map collapsing a onto the fixed point b: a -> b, b -> b.
pub fn sys_collapse() -> FiniteSystem {
    FiniteSystem::validate_system(vec!["a".into(), "b".into()], vec![vec![1, 1]])
        .expect("fixture is valid")
}

/// One map with two disjoint 2-cycles: a <-> b and c <-> d.
pub fn sys_2cycles() -> FiniteSystem {
    FiniteSystem::validate_system(
        vec!["a".into(), "b".into(), "c".into(), "d".into()],
        vec![vec![1, 0, 3, 2]],
    )
    .expect("fixture is valid")
}

pub fn all_systems() -> Vec<FiniteSystem> {
    vec![sys_cycle3(), sys_swap2(), sys_collapse(), sys_2cycles()]
}

/// Two vertices v, w with loops e (at v) and g (at w) and a connecting edge
/// f from w to v. The boundary-path space has two orbits, with the orbit
/// closure of the g-loop path strictly inside the closure of the others.
pub fn graph_hs() -> FiniteGraph {
    FiniteGraph::validate_graph(
        vec!["v".into(), "w".into()],
        vec![
            ("e".into(), "v".into(), "v".into()),
            ("f".into(), "w".into(), "v".into()),
            ("g".into(), "w".into(), "w".into()),
        ],
    )
    .expect("fixture is valid")
}
