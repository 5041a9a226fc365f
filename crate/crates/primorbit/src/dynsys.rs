//! Finite discrete dynamical systems: k commuting self-maps of a finite
//! point set, with orbits, quasi-orbits, invariant subsets, restriction,
//! and eventual-periodicity data.
//!
//! On a finite discrete space every self-map is a local homeomorphism and
//! every orbit is closed, so orbit and orbit closure coincide; quasi-orbits
//! are exactly the orbit-partition classes.

use itertools::Itertools;
use std::collections::{BTreeSet, HashMap, VecDeque};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DynSysError {
    #[error("maps {i} and {j} disagree at point {point}: T{i} T{j} != T{j} T{i}")]
    NonCommuting { i: usize, j: usize, point: String },
    #[error("unknown point index {index} (system has {len} points)")]
    BadIndex { index: usize, len: usize },
    #[error("unknown point name {0:?}")]
    UnknownPoint(String),
    #[error("duplicate point name {0:?}")]
    DuplicatePoint(String),
    #[error("system needs at least one map and one point")]
    Empty,
    #[error("map {map} leaves the subset: T{map}({point}) falls outside")]
    NotInvariant { point: String, map: usize },
    #[error("multi-index has {got} entries but the system has {expected} maps")]
    ArityMismatch { expected: usize, got: usize },
}

/// An element of N^k: one exponent per commuting map.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u64>);

impl MultiIndex {
    pub fn zero(k: usize) -> Self {
        MultiIndex(vec![0; k])
    }

    pub fn unit(k: usize, i: usize) -> Self {
        let mut v = vec![0; k];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Product order: every coordinate no larger.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Signed difference self - other.
    pub fn sub_signed(&self, other: &MultiIndex) -> Vec<i64> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect()
    }

    /// All multi-indices with entries in `0..=bound`.
    pub fn boxed(k: usize, bound: u64) -> impl Iterator<Item = MultiIndex> {
        (0..k)
            .map(|_| 0..=bound)
            .multi_cartesian_product()
            .map(MultiIndex)
    }
}

/// Positive and negative parts of a displacement vector g in Z^k, so that
/// g = plus - minus with disjoint supports.
pub fn signed_parts(g: &[i64]) -> (MultiIndex, MultiIndex) {
    let plus = MultiIndex(g.iter().map(|&x| x.max(0) as u64).collect());
    let minus = MultiIndex(g.iter().map(|&x| (-x).max(0) as u64).collect());
    (plus, minus)
}

/// Per-coordinate preperiod and period of the maps on a reachable set:
/// T_i^{a_i + c_i} = T_i^{a_i} there, with a_i, c_i least.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventualData {
    pub preperiod: Vec<u64>,
    pub period: Vec<u64>,
}

impl EventualData {
    /// Clamp a multi-index without changing the value of T^m on the set the
    /// data was computed for: m_i maps to a_i + ((m_i - a_i) mod c_i) once
    /// m_i >= a_i.
    pub fn clamp(&self, m: &MultiIndex) -> MultiIndex {
        MultiIndex(
            m.0.iter()
                .enumerate()
                .map(|(i, &mi)| {
                    let a = self.preperiod[i];
                    let c = self.period[i];
                    if mi >= a {
                        a + (mi - a) % c
                    } else {
                        mi
                    }
                })
                .collect(),
        )
    }

    pub fn max_horizon(&self) -> u64 {
        self.preperiod
            .iter()
            .zip(&self.period)
            .map(|(a, c)| a + c)
            .max()
            .unwrap_or(1)
    }
}

/// A finite point set with k commuting total self-maps.
///
/// Immutable after validation; all operations are pure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSystem {
    k: usize,
    points: Vec<String>,
    /// maps[i][p] = index of T_i(points[p]).
    maps: Vec<Vec<usize>>,
}

/// The orbit partition of a system, with canonical representatives and the
/// optional enumeration of all closed invariant (orbit-saturated) subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiOrbits {
    /// One class per orbit, sorted by representative name.
    pub classes: Vec<OrbitClass>,
    /// All closed invariant subsets (each sorted by point index), present
    /// when the point count is within the configured bound. Invariance here
    /// is groupoid invariance: a union of orbits.
    pub invariant_subsets: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitClass {
    /// Point with the lexicographically least name in the class.
    pub representative: usize,
    /// Class members sorted by point index.
    pub members: Vec<usize>,
    /// Whether the class is irreducible as a closed invariant set (checked
    /// by definition, not assumed).
    pub irreducible: bool,
}

pub const DEFAULT_INVARIANT_SUBSET_BOUND: usize = 8;

impl FiniteSystem {
    /// Validate a raw description: point names, and one target-index table
    /// per map. Commutation is verified exhaustively.
    pub fn validate_system(points: Vec<String>, maps: Vec<Vec<usize>>) -> Result<Self, DynSysError> {
        if points.is_empty() || maps.is_empty() {
            return Err(DynSysError::Empty);
        }
        let mut seen = BTreeSet::new();
        for p in &points {
            if !seen.insert(p.clone()) {
                return Err(DynSysError::DuplicatePoint(p.clone()));
            }
        }
        let n = points.len();
        for map in &maps {
            if map.len() != n {
                return Err(DynSysError::BadIndex {
                    index: map.len(),
                    len: n,
                });
            }
            for &t in map {
                if t >= n {
                    return Err(DynSysError::BadIndex { index: t, len: n });
                }
            }
        }
        let sys = FiniteSystem {
            k: maps.len(),
            points,
            maps,
        };
        for i in 0..sys.k {
            for j in i + 1..sys.k {
                for x in 0..n {
                    if sys.maps[i][sys.maps[j][x]] != sys.maps[j][sys.maps[i][x]] {
                        return Err(DynSysError::NonCommuting {
                            i: i + 1,
                            j: j + 1,
                            point: sys.points[x].clone(),
                        });
                    }
                }
            }
        }
        Ok(sys)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point_names(&self) -> &[String] {
        &self.points
    }

    pub fn name(&self, x: usize) -> &str {
        &self.points[x]
    }

    pub fn point_index(&self, name: &str) -> Result<usize, DynSysError> {
        self.points
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| DynSysError::UnknownPoint(name.to_string()))
    }

    pub fn check_point(&self, x: usize) -> Result<(), DynSysError> {
        if x >= self.points.len() {
            return Err(DynSysError::BadIndex {
                index: x,
                len: self.points.len(),
            });
        }
        Ok(())
    }

    fn check_arity(&self, m: &MultiIndex) -> Result<(), DynSysError> {
        if m.len() != self.k {
            return Err(DynSysError::ArityMismatch {
                expected: self.k,
                got: m.len(),
            });
        }
        Ok(())
    }

    /// One application of the i-th map.
    pub fn step(&self, i: usize, x: usize) -> usize {
        self.maps[i][x]
    }

    /// T^n x. Large exponents are clamped through the eventual-periodicity
    /// data first, so the cost is bounded by the reachable-set size.
    pub fn apply(&self, n: &MultiIndex, x: usize) -> Result<usize, DynSysError> {
        self.check_point(x)?;
        self.check_arity(n)?;
        let horizon = 2 * self.points.len() as u64;
        let n = if n.0.iter().any(|&e| e > horizon) {
            self.eventual_data(x)?.clamp(n)
        } else {
            n.clone()
        };
        let mut y = x;
        for (i, &e) in n.0.iter().enumerate() {
            for _ in 0..e {
                y = self.maps[i][y];
            }
        }
        Ok(y)
    }

    /// The set reachable from x under all T^n, including x.
    pub fn reachable(&self, x: usize) -> Result<Vec<usize>, DynSysError> {
        self.check_point(x)?;
        let mut seen = vec![false; self.points.len()];
        let mut queue = VecDeque::from([x]);
        seen[x] = true;
        while let Some(u) = queue.pop_front() {
            for i in 0..self.k {
                let v = self.maps[i][u];
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        Ok((0..self.points.len()).filter(|&p| seen[p]).collect())
    }

    /// The orbit [x] = {y : T^m x = T^n y for some m, n}, computed as the
    /// connected component of x in the undirected graph with edges
    /// {y, T_i y}. Transitivity of the orbit relation follows from
    /// commutation (confluence), so the component equals the orbit. Equals
    /// the orbit closure on a discrete space. Sorted by point index.
    pub fn orbit(&self, x: usize) -> Result<Vec<usize>, DynSysError> {
        self.check_point(x)?;
        let mut seen = vec![false; self.points.len()];
        let mut queue = VecDeque::from([x]);
        seen[x] = true;
        while let Some(u) = queue.pop_front() {
            for i in 0..self.k {
                let v = self.maps[i][u];
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
            for i in 0..self.k {
                for w in 0..self.points.len() {
                    if self.maps[i][w] == u && !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        Ok((0..self.points.len()).filter(|&p| seen[p]).collect())
    }

    /// Orbit partition with canonical representatives, irreducibility
    /// verdicts, and (within the bound) the enumeration of all closed
    /// invariant subsets. Uses the default bound of
    /// [`DEFAULT_INVARIANT_SUBSET_BOUND`] points.
    pub fn quasi_orbits(&self) -> QuasiOrbits {
        self.quasi_orbits_with_bound(DEFAULT_INVARIANT_SUBSET_BOUND)
    }

    pub fn quasi_orbits_with_bound(&self, invariant_subset_bound: usize) -> QuasiOrbits {
        let n = self.points.len();
        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            if class_of[x] == usize::MAX {
                let members = self.orbit(x).expect("index in range");
                for &m in &members {
                    class_of[m] = classes.len();
                }
                classes.push(members);
            }
        }
        let mut out: Vec<OrbitClass> = classes
            .iter()
            .map(|members| {
                let representative = *members
                    .iter()
                    .min_by_key(|&&m| &self.points[m])
                    .expect("orbit is nonempty");
                OrbitClass {
                    representative,
                    members: members.clone(),
                    irreducible: true,
                }
            })
            .collect();
        out.sort_by(|a, b| self.points[a.representative].cmp(&self.points[b.representative]));

        let invariant_subsets = if n <= invariant_subset_bound {
            let mut subsets: Vec<Vec<usize>> = Vec::new();
            for mask in 0u32..(1 << n) {
                let set: Vec<usize> = (0..n).filter(|&p| mask & (1 << p) != 0).collect();
                let saturated = set
                    .iter()
                    .all(|&p| classes[class_of[p]].iter().all(|m| set.contains(m)));
                if saturated {
                    subsets.push(set);
                }
            }
            // Irreducibility by definition: not coverable by two proper
            // closed invariant subsets.
            for class in out.iter_mut() {
                let c: BTreeSet<usize> = class.members.iter().copied().collect();
                class.irreducible = !c.is_empty()
                    && !subsets.iter().tuple_combinations().any(|(a, b)| {
                        let cover: BTreeSet<usize> = a.iter().chain(b).copied().collect();
                        let a_set: BTreeSet<usize> = a.iter().copied().collect();
                        let b_set: BTreeSet<usize> = b.iter().copied().collect();
                        c.is_subset(&cover) && !c.is_subset(&a_set) && !c.is_subset(&b_set)
                    });
            }
            Some(subsets)
        } else {
            None
        };

        QuasiOrbits {
            classes: out,
            invariant_subsets,
        }
    }

    /// Least per-coordinate (preperiod, period) of T_i on the reachable set
    /// of x, via first-collision detection on iterated map tables.
    pub fn eventual_data(&self, x: usize) -> Result<EventualData, DynSysError> {
        let reach = self.reachable(x)?;
        Ok(self.eventual_data_on(&reach))
    }

    /// Same as [`FiniteSystem::eventual_data`] but over an explicit point
    /// set (which must be forward invariant).
    pub fn eventual_data_on(&self, set: &[usize]) -> EventualData {
        let mut preperiod = Vec::with_capacity(self.k);
        let mut period = Vec::with_capacity(self.k);
        for i in 0..self.k {
            let mut table: Vec<usize> = set.to_vec();
            let mut seen: HashMap<Vec<usize>, u64> = HashMap::new();
            seen.insert(table.clone(), 0);
            let mut t = 0u64;
            loop {
                t += 1;
                table = table.iter().map(|&p| self.maps[i][p]).collect();
                if let Some(&first) = seen.get(&table) {
                    preperiod.push(first);
                    period.push(t - first);
                    break;
                }
                seen.insert(table.clone(), t);
            }
        }
        EventualData { preperiod, period }
    }

    /// Restrict to a forward-invariant subset: T_i S must stay inside S.
    /// Point order (hence naming) is inherited.
    pub fn restrict(&self, s: &[usize]) -> Result<FiniteSystem, DynSysError> {
        let set: BTreeSet<usize> = s.iter().copied().collect();
        for &p in &set {
            self.check_point(p)?;
        }
        for &p in &set {
            for i in 0..self.k {
                if !set.contains(&self.maps[i][p]) {
                    return Err(DynSysError::NotInvariant {
                        point: self.points[p].clone(),
                        map: i + 1,
                    });
                }
            }
        }
        let order: Vec<usize> = set.into_iter().collect();
        let reindex: HashMap<usize, usize> =
            order.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let points = order.iter().map(|&p| self.points[p].clone()).collect();
        let maps = (0..self.k)
            .map(|i| order.iter().map(|&p| reindex[&self.maps[i][p]]).collect())
            .collect();
        Ok(FiniteSystem {
            k: self.k,
            points,
            maps,
        })
    }
}
