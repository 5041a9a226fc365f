//! Graph frontend for the k = 1 shift: eventually periodic infinite paths,
//! symbolic orbit closures, the isotropy subgroup of each tail, and a small
//! catalogue with the C_0-kernel order between quasi-orbits.
//!
//! Paths are read left to right: consecutive edges satisfy
//! end(e_i) = start(e_{i+1}), and the shift drops leading edges.

use crate::lattice::Lattice;
use std::collections::VecDeque;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("vertex {0:?} starts no edge, so no infinite path passes through it")]
    SourcelessVertex(String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("unknown edge {0:?}")]
    UnknownEdge(String),
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("edges {prev:?} and {next:?} are not composable: {prev:?} ends at {at:?}")]
    NotComposable {
        prev: String,
        next: String,
        at: String,
    },
    #[error("a path needs a nonempty cycle")]
    EmptyCycle,
    #[error("graph needs at least one vertex and one edge")]
    Empty,
    #[error("representatives {first:?} and {second:?} lie in the same quasi-orbit")]
    DuplicateQuasiOrbit { first: String, second: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Edge {
    name: String,
    start: usize,
    end: usize,
}

/// A finite directed graph in which every vertex starts at least one edge,
/// so the one-sided shift on the infinite path space is everywhere defined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
}

impl FiniteGraph {
    /// Edges are (name, start vertex, end vertex).
    pub fn validate_graph(
        vertices: Vec<String>,
        edges: Vec<(String, String, String)>,
    ) -> Result<Self, PathError> {
        if vertices.is_empty() || edges.is_empty() {
            return Err(PathError::Empty);
        }
        let mut seen = std::collections::BTreeSet::new();
        for v in &vertices {
            if !seen.insert(v.clone()) {
                return Err(PathError::DuplicateName(v.clone()));
            }
        }
        let mut edge_names = std::collections::BTreeSet::new();
        let mut resolved = Vec::with_capacity(edges.len());
        for (name, start, end) in edges {
            if !edge_names.insert(name.clone()) {
                return Err(PathError::DuplicateName(name));
            }
            let find = |v: &str| {
                vertices
                    .iter()
                    .position(|u| u == v)
                    .ok_or_else(|| PathError::UnknownVertex(v.to_string()))
            };
            resolved.push(Edge {
                start: find(&start)?,
                end: find(&end)?,
                name,
            });
        }
        for (v, name) in vertices.iter().enumerate() {
            if !resolved.iter().any(|e| e.start == v) {
                return Err(PathError::SourcelessVertex(name.clone()));
            }
        }
        Ok(FiniteGraph {
            vertices,
            edges: resolved,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn edge_name(&self, e: usize) -> &str {
        &self.edges[e].name
    }

    pub fn edge_endpoints(&self, e: usize) -> (usize, usize) {
        (self.edges[e].start, self.edges[e].end)
    }

    pub fn edge_index(&self, name: &str) -> Result<usize, PathError> {
        self.edges
            .iter()
            .position(|e| e.name == name)
            .ok_or_else(|| PathError::UnknownEdge(name.to_string()))
    }

    /// Vertices from which some vertex of `targets` is reachable by a
    /// directed path (possibly of length zero).
    fn reaches(&self, targets: &[usize]) -> Vec<bool> {
        let mut ok = vec![false; self.vertices.len()];
        let mut queue: VecDeque<usize> = targets.iter().copied().collect();
        for &t in targets {
            ok[t] = true;
        }
        while let Some(v) = queue.pop_front() {
            for e in &self.edges {
                if e.end == v && !ok[e.start] {
                    ok[e.start] = true;
                    queue.push_back(e.start);
                }
            }
        }
        ok
    }
}

/// An eventually periodic infinite path: finite prefix followed by an
/// endlessly repeated cycle, held in canonical form (primitive cycle,
/// maximally absorbed prefix). Two values are equal iff they denote the
/// same infinite edge sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvPath {
    prefix: Vec<usize>,
    cycle: Vec<usize>,
}

impl EvPath {
    pub fn new(graph: &FiniteGraph, prefix: Vec<usize>, cycle: Vec<usize>) -> Result<Self, PathError> {
        if cycle.is_empty() {
            return Err(PathError::EmptyCycle);
        }
        for &e in prefix.iter().chain(&cycle) {
            if e >= graph.edges.len() {
                return Err(PathError::UnknownEdge(format!("#{e}")));
            }
        }
        let check = |prev: usize, next: usize| -> Result<(), PathError> {
            if graph.edges[prev].end != graph.edges[next].start {
                return Err(PathError::NotComposable {
                    prev: graph.edges[prev].name.clone(),
                    next: graph.edges[next].name.clone(),
                    at: graph.vertices[graph.edges[prev].end].clone(),
                });
            }
            Ok(())
        };
        let walk: Vec<usize> = prefix.iter().chain(&cycle).copied().collect();
        for w in walk.windows(2) {
            check(w[0], w[1])?;
        }
        check(*cycle.last().expect("cycle nonempty"), cycle[0])?;

        let mut path = EvPath { prefix, cycle };
        path.canonicalize();
        Ok(path)
    }

    pub fn from_names(
        graph: &FiniteGraph,
        prefix: &[&str],
        cycle: &[&str],
    ) -> Result<Self, PathError> {
        let resolve = |names: &[&str]| -> Result<Vec<usize>, PathError> {
            names.iter().map(|n| graph.edge_index(n)).collect()
        };
        EvPath::new(graph, resolve(prefix)?, resolve(cycle)?)
    }

    /// Primitive-reduce the cycle, then absorb prefix edges into the cycle
    /// while the last prefix edge equals the last cycle edge (rotating the
    /// cycle right each time). Maximal absorption pins the phase, making
    /// the representation unique per infinite sequence.
    fn canonicalize(&mut self) {
        let n = self.cycle.len();
        for d in 1..=n {
            if n % d != 0 {
                continue;
            }
            if (d..n).all(|i| self.cycle[i] == self.cycle[i - d]) {
                self.cycle.truncate(d);
                break;
            }
        }
        while let Some(&last) = self.prefix.last() {
            if last != *self.cycle.last().expect("cycle nonempty") {
                break;
            }
            self.prefix.pop();
            let tail = self.cycle.pop().expect("cycle nonempty");
            self.cycle.insert(0, tail);
        }
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[usize] {
        &self.cycle
    }

    /// The vertex the path starts at.
    pub fn start_vertex(&self, graph: &FiniteGraph) -> usize {
        let first = self.prefix.first().unwrap_or(&self.cycle[0]);
        graph.edges[*first].start
    }

    /// All vertices the path visits (finitely many).
    pub fn visited_vertices(&self, graph: &FiniteGraph) -> Vec<usize> {
        let mut seen = vec![false; graph.vertices.len()];
        for &e in self.prefix.iter().chain(&self.cycle) {
            seen[graph.edges[e].start] = true;
            seen[graph.edges[e].end] = true;
        }
        (0..graph.vertices.len()).filter(|&v| seen[v]).collect()
    }

    /// Vertices of the primitive cycle.
    pub fn cycle_vertices(&self, graph: &FiniteGraph) -> Vec<usize> {
        let mut seen = vec![false; graph.vertices.len()];
        for &e in &self.cycle {
            seen[graph.edges[e].start] = true;
        }
        (0..graph.vertices.len()).filter(|&v| seen[v]).collect()
    }

    /// Edge-name rendering "p1,p2|c1,c2".
    pub fn display(&self, graph: &FiniteGraph) -> String {
        let names = |edges: &[usize]| {
            edges
                .iter()
                .map(|&e| graph.edges[e].name.clone())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!("{}|{}", names(&self.prefix), names(&self.cycle))
    }

    /// Lexicographically least rotation of the primitive cycle; rotation
    /// classes of primitive cycles index tail-equivalence classes.
    fn least_cycle_rotation(&self) -> Vec<usize> {
        let n = self.cycle.len();
        (0..n)
            .map(|r| {
                let mut rot = self.cycle[r..].to_vec();
                rot.extend_from_slice(&self.cycle[..r]);
                rot
            })
            .min()
            .expect("cycle nonempty")
    }
}

impl fmt::Display for EvPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx = |edges: &[usize]| {
            edges
                .iter()
                .map(|e| format!("#{e}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{}|{}", idx(&self.prefix), idx(&self.cycle))
    }
}

/// Drop the first m edges, rotating into the cycle once the prefix is
/// exhausted, and re-canonicalize.
pub fn shift(p: &EvPath, m: u64) -> EvPath {
    let pre_len = p.prefix.len() as u64;
    let mut out = if m <= pre_len {
        EvPath {
            prefix: p.prefix[m as usize..].to_vec(),
            cycle: p.cycle.clone(),
        }
    } else {
        let r = ((m - pre_len) % p.cycle.len() as u64) as usize;
        let mut cycle = p.cycle[r..].to_vec();
        cycle.extend_from_slice(&p.cycle[..r]);
        EvPath {
            prefix: Vec::new(),
            cycle,
        }
    };
    out.canonicalize();
    out
}

/// Whether some shifts of p and q agree: true iff the primitive cycles
/// coincide up to rotation.
pub fn tail_equiv(p: &EvPath, q: &EvPath) -> bool {
    p.least_cycle_rotation() == q.least_cycle_rotation()
}

/// Whether q lies in the orbit closure of p: every vertex along q must
/// reach some vertex of p's primitive cycle, so that each cylinder
/// neighborhood of q extends to a path tail-equivalent to p.
pub fn closure_contains(graph: &FiniteGraph, p: &EvPath, q: &EvPath) -> bool {
    let reach = graph.reaches(&p.cycle_vertices(graph));
    q.visited_vertices(graph).iter().all(|&v| reach[v])
}

/// The isotropy subgroup of the shift on the orbit closure of a path,
/// with its mandatory brute-force cross-check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphHResult {
    /// Value from the deterministic-cycle criterion.
    pub criterion: Lattice,
    /// Value from the path-enumeration oracle.
    pub oracle: Lattice,
    /// Set when the two disagree; `effective` then reports the oracle.
    pub flagged: bool,
}

impl GraphHResult {
    pub fn effective(&self) -> &Lattice {
        &self.oracle
    }
}

/// Compute H(p) = H of the shift restricted to closure[p].
///
/// Criterion: restrict to the admissible subgraph (edges whose end vertex
/// reaches p's primitive cycle). A vertex u is deterministic when every
/// vertex reachable from u in the admissible subgraph has out-degree
/// exactly one there; the unique walk from u then ends in a cycle of some
/// length d, and the cylinder at u witnesses d into H. H is generated by
/// the lengths so obtained, or zero if no vertex is deterministic.
///
/// Oracle: count admissible walks of length 3·|edges| from every
/// admissible vertex (saturating at two); a vertex is deterministic iff
/// the count is one, and the walk's cycle length is recovered by direct
/// iteration. The oracle value is authoritative.
pub fn graph_h(graph: &FiniteGraph, p: &EvPath) -> GraphHResult {
    let reach = graph.reaches(&p.cycle_vertices(graph));
    let admissible: Vec<bool> = graph.edges.iter().map(|e| reach[e.end]).collect();
    let out_edges = |v: usize| -> Vec<usize> {
        (0..graph.edges.len())
            .filter(|&e| admissible[e] && graph.edges[e].start == v)
            .collect()
    };
    let vertices: Vec<usize> = (0..graph.vertices.len()).filter(|&v| reach[v]).collect();

    // Unique-walk cycle length from a vertex all of whose reachable
    // vertices have out-degree one.
    let walk_cycle_len = |u: usize| -> u64 {
        let mut seen_at = vec![None; graph.vertices.len()];
        let mut v = u;
        let mut t = 0u64;
        loop {
            if let Some(first) = seen_at[v] {
                return t - first;
            }
            seen_at[v] = Some(t);
            v = graph.edges[out_edges(v)[0]].end;
            t += 1;
        }
    };

    let criterion_lengths: Vec<u64> = vertices
        .iter()
        .filter(|&&u| {
            let mut stack = vec![u];
            let mut seen = vec![false; graph.vertices.len()];
            seen[u] = true;
            while let Some(v) = stack.pop() {
                let out = out_edges(v);
                if out.len() != 1 {
                    return false;
                }
                let next = graph.edges[out[0]].end;
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
            true
        })
        .map(|&u| walk_cycle_len(u))
        .collect();

    // Oracle: saturating walk counts of length L.
    let l = 3 * graph.edges.len();
    let mut counts: Vec<u8> = vec![1; graph.vertices.len()];
    for _ in 0..l {
        counts = (0..graph.vertices.len())
            .map(|v| {
                out_edges(v)
                    .iter()
                    .map(|&e| counts[graph.edges[e].end])
                    .fold(0u8, |acc, c| acc.saturating_add(c).min(2))
            })
            .collect();
    }
    let oracle_lengths: Vec<u64> = vertices
        .iter()
        .filter(|&&u| counts[u] == 1)
        .map(|&u| walk_cycle_len(u))
        .collect();

    let to_lattice = |lengths: &[u64]| {
        let rows: Vec<Vec<num_bigint::BigInt>> = lengths
            .iter()
            .map(|&d| crate::lattice::vec_bigint(&[d as i64]))
            .collect();
        Lattice::hnf(1, &rows).expect("rows are one-dimensional")
    };
    let criterion = to_lattice(&criterion_lengths);
    let oracle = to_lattice(&oracle_lengths);
    let flagged = criterion != oracle;
    GraphHResult {
        criterion,
        oracle,
        flagged,
    }
}

/// One quasi-orbit of the path-space system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphCatalogueEntry {
    pub representative: EvPath,
    pub h: GraphHResult,
    /// Rank of the effective H; its character group is a torus of this
    /// dimension.
    pub dual_rank: usize,
}

/// Catalogue of quasi-orbits with the closure-inclusion order and the
/// induced order on C_0-parts of representation kernels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphCatalogue {
    pub entries: Vec<GraphCatalogueEntry>,
    /// closure_leq[i][j]: closure of entry i's orbit is contained in
    /// closure of entry j's.
    pub closure_leq: Vec<Vec<bool>>,
    /// c0_kernel_leq[i][j]: the C_0-part of any kernel over entry i is
    /// contained in that over entry j; this reverses closure inclusion.
    pub c0_kernel_leq: Vec<Vec<bool>>,
    /// Present for the two-vertex two-loop example shape: the known
    /// description of hull-kernel closures, recording that the
    /// parametrizing map is not open.
    pub closure_statement: Option<String>,
}

/// Build the catalogue for pairwise inequivalent representatives.
pub fn graph_catalogue(
    graph: &FiniteGraph,
    representatives: &[EvPath],
) -> Result<GraphCatalogue, PathError> {
    for i in 0..representatives.len() {
        for j in i + 1..representatives.len() {
            let (p, q) = (&representatives[i], &representatives[j]);
            if closure_contains(graph, p, q) && closure_contains(graph, q, p) {
                return Err(PathError::DuplicateQuasiOrbit {
                    first: p.display(graph),
                    second: q.display(graph),
                });
            }
        }
    }
    let entries: Vec<GraphCatalogueEntry> = representatives
        .iter()
        .map(|p| {
            let h = graph_h(graph, p);
            let dual_rank = h.effective().rank();
            GraphCatalogueEntry {
                representative: p.clone(),
                h,
                dual_rank,
            }
        })
        .collect();
    let n = representatives.len();
    let closure_leq: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| closure_contains(graph, &representatives[j], &representatives[i]))
                .collect()
        })
        .collect();
    let c0_kernel_leq: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| closure_leq[j][i]).collect())
        .collect();

    let closure_statement = two_loop_example_statement(graph, representatives, &closure_leq);

    Ok(GraphCatalogue {
        entries,
        closure_leq,
        c0_kernel_leq,
        closure_statement,
    })
}

/// Known hull-kernel closure description for the two-vertex graph with a
/// loop at each vertex and a single connecting edge, when both orbits are
/// represented: the point with dense orbit closure has non-closed ideal
/// classes, so the parametrization cannot be open.
fn two_loop_example_statement(
    graph: &FiniteGraph,
    reps: &[EvPath],
    closure_leq: &[Vec<bool>],
) -> Option<String> {
    if graph.vertices.len() != 2 || graph.edges.len() != 3 || reps.len() != 2 {
        return None;
    }
    let loops: Vec<usize> = (0..3)
        .filter(|&e| graph.edges[e].start == graph.edges[e].end)
        .collect();
    if loops.len() != 2 || graph.edges[loops[0]].start == graph.edges[loops[1]].start {
        return None;
    }
    // Identify which representative has the strictly smaller closure.
    let (small, big) = if closure_leq[0][1] && !closure_leq[1][0] {
        (0, 1)
    } else if closure_leq[1][0] && !closure_leq[0][1] {
        (1, 0)
    } else {
        return None;
    };
    let big_name = reps[big].display(graph);
    let small_name = reps[small].display(graph);
    Some(format!(
        "closure{{ker pi[{big_name},z]}} = {{ker pi[{big_name},z]}} u {{ker pi[{small_name},w] : all w}} for every angle z; \
each {{ker pi[{small_name},w]}} is closed; the parametrization by (quasi-orbit, angle) is a continuous bijection but not open"
    ))
}
