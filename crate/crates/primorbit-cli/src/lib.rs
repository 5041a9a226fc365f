//! File formats, deterministic reports, and the command implementations
//! behind the `primorbit` binary.
//!
//! Input documents are JSON: systems as `{"k", "points", "maps"}`, graphs
//! as `{"vertices", "edges"}` with named edges. Angles are comma-separated
//! rationals like `1/3,0`; eventually periodic paths are written
//! `prefix|cycle` with comma-separated edge names, e.g. `g,f|e`. Reports
//! serialize with sorted, canonical fields so identical inputs and seeds
//! produce byte-identical output.

use primorbit::dynsys::FiniteSystem;
use primorbit::lattice::{Lattice, RationalAngle};
use primorbit::pathspace::{EvPath, FiniteGraph, PathError};
use primorbit::periodicity::{self, PeriodicityError};
use primorbit::primcat::{self, PrimcatError, TopologyVerdict, WitnessKind};
use primorbit::repr::{self, CcFunction, ReprError};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Tunables shared by every command; defaults match the CLI flags.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub tolerance: f64,
    pub trials: u32,
    pub seed: u64,
    pub max_invariant_subsets: usize,
    pub sigma_bound_retries: u32,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            tolerance: repr::DEFAULT_TOLERANCE,
            trials: 100,
            seed: 0,
            max_invariant_subsets: 8,
            sigma_bound_retries: 4,
        }
    }
}

/// Command failure, carrying the process exit code: 1 for certification
/// failures, 2 for input errors, 3 for bound exhaustion.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Certification(String),
    #[error("{0}")]
    Bound(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Certification(_) => 1,
            CliError::Input(_) => 2,
            CliError::Bound(_) => 3,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

impl From<PeriodicityError> for CliError {
    fn from(e: PeriodicityError) -> Self {
        match e {
            PeriodicityError::BoundTooSmall { .. } => CliError::Bound(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<ReprError> for CliError {
    fn from(e: ReprError) -> Self {
        match e {
            ReprError::BatteryFailure { .. } | ReprError::VerificationFailure { .. } => {
                CliError::Certification(e.to_string())
            }
            ReprError::Periodicity(p) => p.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<PrimcatError> for CliError {
    fn from(e: PrimcatError) -> Self {
        match e {
            PrimcatError::WitnessVerificationFailed { .. } => {
                CliError::Certification(e.to_string())
            }
            PrimcatError::Repr(r) => r.into(),
            PrimcatError::Periodicity(p) => p.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<PathError> for CliError {
    fn from(e: PathError) -> Self {
        CliError::Input(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Input documents.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    pub k: usize,
    pub points: Vec<String>,
    pub maps: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub name: String,
    pub start: String,
    pub end: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeRecord>,
}

pub fn parse_system(text: &str) -> Result<FiniteSystem, CliError> {
    let file: SystemFile = serde_json::from_str(text).map_err(input_err)?;
    if file.maps.len() != file.k {
        return Err(CliError::Input(format!(
            "declared k = {} but {} maps are given",
            file.k,
            file.maps.len()
        )));
    }
    FiniteSystem::validate_system(file.points, file.maps).map_err(input_err)
}

pub fn parse_graph(text: &str) -> Result<FiniteGraph, CliError> {
    let file: GraphFile = serde_json::from_str(text).map_err(input_err)?;
    let edges = file
        .edges
        .into_iter()
        .map(|e| (e.name, e.start, e.end))
        .collect();
    FiniteGraph::validate_graph(file.vertices, edges).map_err(input_err)
}

pub fn system_to_json(sys: &FiniteSystem) -> String {
    let file = SystemFile {
        k: sys.k(),
        points: sys.point_names().to_vec(),
        maps: (0..sys.k())
            .map(|i| (0..sys.len()).map(|x| sys.step(i, x)).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

pub fn graph_to_json(graph: &FiniteGraph) -> String {
    let file = GraphFile {
        vertices: graph.vertex_names().to_vec(),
        edges: (0..graph.edge_count())
            .map(|e| {
                let (s, t) = graph.edge_endpoints(e);
                EdgeRecord {
                    name: graph.edge_name(e).to_string(),
                    start: graph.vertex_names()[s].clone(),
                    end: graph.vertex_names()[t].clone(),
                }
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

fn load(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn load_system(path: &Path) -> Result<FiniteSystem, CliError> {
    parse_system(&load(path)?)
}

pub fn load_graph(path: &Path) -> Result<FiniteGraph, CliError> {
    parse_graph(&load(path)?)
}

/// Parse a comma-separated list of rationals `p/q` (or integers) into an
/// angle with one entry per coordinate.
pub fn parse_angle(text: &str, k: usize) -> Result<RationalAngle, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != k {
        return Err(CliError::Input(format!(
            "angle {text:?} has {} entries, the system needs {k}",
            parts.len()
        )));
    }
    let mut entries = Vec::with_capacity(k);
    for part in parts {
        let (p, q) = match part.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (part.trim(), "1"),
        };
        let p: i64 = p
            .parse()
            .map_err(|_| CliError::Input(format!("bad rational {part:?} in angle")))?;
        let q: i64 = q
            .parse()
            .map_err(|_| CliError::Input(format!("bad rational {part:?} in angle")))?;
        if q == 0 {
            return Err(CliError::Input(format!("zero denominator in {part:?}")));
        }
        entries.push((p, q));
    }
    Ok(RationalAngle::from_ratios(&entries))
}

/// Parse `prefix|cycle` with comma-separated edge names; the prefix may be
/// empty (`|e` is the path circling e forever).
pub fn parse_path(graph: &FiniteGraph, text: &str) -> Result<EvPath, CliError> {
    let (prefix, cycle) = text
        .split_once('|')
        .ok_or_else(|| CliError::Input(format!("path {text:?} needs a '|' before the cycle")))?;
    let split = |s: &str| -> Vec<String> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::to_string)
            .collect()
    };
    let prefix = split(prefix);
    let cycle = split(cycle);
    let prefix_refs: Vec<&str> = prefix.iter().map(String::as_str).collect();
    let cycle_refs: Vec<&str> = cycle.iter().map(String::as_str).collect();
    EvPath::from_names(graph, &prefix_refs, &cycle_refs).map_err(input_err)
}

// ---------------------------------------------------------------------------
// Report pieces.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub range: String,
    pub displacement: Vec<i64>,
    pub source: String,
    pub re: f64,
    pub im: f64,
}

pub fn function_terms(sys: &FiniteSystem, f: &CcFunction) -> Vec<TermRecord> {
    f.terms()
        .iter()
        .map(|(e, v)| TermRecord {
            range: sys.name(e.range()).to_string(),
            displacement: e.displacement().to_vec(),
            source: sys.name(e.source()).to_string(),
            re: v.re,
            im: v.im,
        })
        .collect()
}

pub fn function_from_terms(
    sys: &FiniteSystem,
    terms: &[TermRecord],
) -> Result<CcFunction, CliError> {
    let mut f = CcFunction::zero(sys.k());
    for t in terms {
        let range = sys.point_index(&t.range).map_err(input_err)?;
        let source = sys.point_index(&t.source).map_err(input_err)?;
        let ind = CcFunction::indicator(sys, range, t.displacement.clone(), source)
            .map_err(input_err)?
            .scale(num_complex::Complex64::new(t.re, t.im));
        f = f.add(&ind);
    }
    Ok(f)
}

fn lattice_rows(l: &Lattice) -> Vec<Vec<String>> {
    l.basis()
        .iter()
        .map(|row| row.iter().map(|b| b.to_string()).collect())
        .collect()
}

/// FNV-1a, 64-bit, as sixteen hex digits.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

#[derive(Debug, Serialize)]
pub struct SystemSummary {
    pub points: usize,
    pub k: usize,
}

#[derive(Debug, Serialize)]
pub struct QuasiOrbitReport {
    pub representative: String,
    pub members: Vec<String>,
    pub irreducible: bool,
}

#[derive(Debug, Serialize)]
pub struct ProfileReport {
    pub quasi_orbit: String,
    pub orbit: Vec<String>,
    pub displacement_group: Vec<Vec<String>>,
    pub periodic_core: Vec<String>,
    pub minimal_pairs: Vec<(Vec<u64>, Vec<u64>)>,
}

#[derive(Debug, Serialize)]
pub struct CatalogueReport {
    pub quasi_orbit: String,
    pub orbit: Vec<String>,
    pub displacement_group: Vec<Vec<String>>,
    pub periodic_core: Vec<String>,
    pub dual_torus_rank: usize,
    pub annihilator_free_rank: usize,
    pub annihilator_cyclic: Vec<String>,
    pub dual_description: String,
}

#[derive(Debug, Serialize)]
pub struct TopologyEntry {
    pub component: String,
    pub verdict: String,
}

#[derive(Debug, Serialize)]
pub struct BatterySummary {
    pub seed: u64,
    pub trials: u32,
    pub tolerance: f64,
    pub max_residual: f64,
    pub per_identity_max: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub digest: String,
    pub system: SystemSummary,
    pub quasi_orbits: Vec<QuasiOrbitReport>,
    pub profiles: Vec<ProfileReport>,
    pub catalogue: Vec<CatalogueReport>,
    pub topology: Vec<TopologyEntry>,
    pub battery: BatterySummary,
}

#[derive(Debug, Serialize)]
pub struct GraphEntryReport {
    pub representative: String,
    pub displacement_group: Vec<Vec<String>>,
    pub dual_rank: usize,
    pub flagged: bool,
}

#[derive(Debug, Serialize)]
pub struct GraphReport {
    pub digest: String,
    pub entries: Vec<GraphEntryReport>,
    pub closure_leq: Vec<Vec<bool>>,
    pub c0_kernel_leq: Vec<Vec<bool>>,
    pub closure_statement: Option<String>,
}

fn seal_digest(value: serde_json::Value) -> Result<String, CliError> {
    let mut value = value;
    let body = serde_json::to_string(&value).map_err(input_err)?;
    let digest = fnv1a_hex(body.as_bytes());
    value["digest"] = serde_json::Value::String(digest);
    serde_json::to_string_pretty(&value).map_err(input_err)
}

// ---------------------------------------------------------------------------
// Commands. Each returns the report text; the binary decides where it goes.

pub fn cmd_validate(path: &Path) -> Result<String, CliError> {
    let text = load(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(input_err)?;
    if value.get("maps").is_some() {
        let sys = parse_system(&text)?;
        let maps = if sys.k() == 1 {
            "1 map".to_string()
        } else {
            format!("{} commuting maps", sys.k())
        };
        Ok(format!("system ok: {} points, {maps}", sys.len()))
    } else if value.get("edges").is_some() {
        let graph = parse_graph(&text)?;
        Ok(format!(
            "graph ok: {} vertices, {} edges",
            graph.vertex_count(),
            graph.edge_count()
        ))
    } else {
        Err(CliError::Input(
            "document is neither a system (no \"maps\") nor a graph (no \"edges\")".to_string(),
        ))
    }
}

pub fn cmd_analyze(path: &Path, opts: &RunOptions) -> Result<String, CliError> {
    let sys = load_system(path)?;
    let classes = sys.quasi_orbits_with_bound(opts.max_invariant_subsets);

    let mut profile_reports = Vec::new();
    let mut catalogue_reports = Vec::new();
    for class in &classes.classes {
        let profile =
            periodicity::profile_with_retries(&sys, class.representative, opts.sigma_bound_retries)?;
        profile_reports.push(ProfileReport {
            quasi_orbit: sys.name(profile.quasi_orbit).to_string(),
            orbit: profile.orbit.iter().map(|&p| sys.name(p).to_string()).collect(),
            displacement_group: lattice_rows(&profile.h),
            periodic_core: profile.y.iter().map(|&p| sys.name(p).to_string()).collect(),
            minimal_pairs: profile
                .sigma_min
                .iter()
                .map(|(m, n)| (m.0.clone(), n.0.clone()))
                .collect(),
        });
    }
    profile_reports.sort_by(|a, b| a.quasi_orbit.cmp(&b.quasi_orbit));

    for entry in primcat::catalogue(&sys)? {
        catalogue_reports.push(CatalogueReport {
            quasi_orbit: entry.quasi_orbit,
            orbit: entry.orbit,
            displacement_group: lattice_rows(&entry.h),
            periodic_core: entry.y,
            dual_torus_rank: entry.dual_torus_rank,
            annihilator_free_rank: entry.annihilator_free_rank,
            annihilator_cyclic: entry
                .annihilator_cyclic
                .iter()
                .map(|d| d.to_string())
                .collect(),
            dual_description: entry.dual_description,
        });
    }

    let topology = primcat::jacobson_topology(&sys)?
        .components
        .into_iter()
        .map(|c| TopologyEntry {
            component: c.representative,
            verdict: match c.verdict {
                TopologyVerdict::ProductOfOrbitAndTorus { dual_torus_rank } => format!(
                    "product of the orbit-closure space with a torus of dimension {dual_torus_rank}"
                ),
                TopologyVerdict::NotDetermined { reason } => {
                    format!("not determined: {reason}")
                }
            },
        })
        .collect();

    let battery = repr::identity_battery(&sys, opts.trials, opts.tolerance, opts.seed)?;

    let mut quasi = Vec::new();
    for class in &classes.classes {
        quasi.push(QuasiOrbitReport {
            representative: sys.name(class.representative).to_string(),
            members: class.members.iter().map(|&p| sys.name(p).to_string()).collect(),
            irreducible: class.irreducible,
        });
    }
    quasi.sort_by(|a, b| a.representative.cmp(&b.representative));

    let report = AnalysisReport {
        digest: String::new(),
        system: SystemSummary {
            points: sys.len(),
            k: sys.k(),
        },
        quasi_orbits: quasi,
        profiles: profile_reports,
        catalogue: catalogue_reports,
        topology,
        battery: BatterySummary {
            seed: battery.seed,
            trials: battery.trials,
            tolerance: battery.tolerance,
            max_residual: battery.max_residual,
            per_identity_max: battery.per_identity_max.to_vec(),
        },
    };
    seal_digest(serde_json::to_value(&report).map_err(input_err)?)
}

pub fn cmd_classify(path: &Path, point: &str, angle: &str) -> Result<String, CliError> {
    let sys = load_system(path)?;
    let x = sys.point_index(point).map_err(input_err)?;
    let theta = parse_angle(angle, sys.k())?;
    let label = primcat::classify(&sys, x, &theta)?;
    let value = serde_json::json!({
        "point": point,
        "angle": theta.to_string(),
        "quasi_orbit": label.quasi_orbit_name(),
        "character": label.character().to_string(),
        "label": label.to_string(),
    });
    serde_json::to_string_pretty(&value).map_err(input_err)
}

fn parse_label_pair(
    sys: &FiniteSystem,
    point1: &str,
    angle1: &str,
    point2: &str,
    angle2: &str,
) -> Result<(usize, RationalAngle, usize, RationalAngle), CliError> {
    let x = sys.point_index(point1).map_err(input_err)?;
    let theta = parse_angle(angle1, sys.k())?;
    let y = sys.point_index(point2).map_err(input_err)?;
    let omega = parse_angle(angle2, sys.k())?;
    Ok((x, theta, y, omega))
}

pub fn cmd_equiv(
    path: &Path,
    point1: &str,
    angle1: &str,
    point2: &str,
    angle2: &str,
) -> Result<String, CliError> {
    let sys = load_system(path)?;
    let (x, theta, y, omega) = parse_label_pair(&sys, point1, angle1, point2, angle2)?;
    let verdict = primcat::equivalent(&sys, x, &theta, y, &omega)?;
    let value = serde_json::json!({
        "first": primcat::classify(&sys, x, &theta)?.to_string(),
        "second": primcat::classify(&sys, y, &omega)?.to_string(),
        "equivalent": verdict.equivalent,
        "reason": verdict.reason,
    });
    serde_json::to_string_pretty(&value).map_err(input_err)
}

pub fn cmd_witness(
    path: &Path,
    point1: &str,
    angle1: &str,
    point2: &str,
    angle2: &str,
    opts: &RunOptions,
) -> Result<String, CliError> {
    let sys = load_system(path)?;
    let (x, theta, y, omega) = parse_label_pair(&sys, point1, angle1, point2, angle2)?;
    let witness = primcat::separating_witness(&sys, x, &theta, y, &omega, opts.tolerance)?;
    let value = serde_json::json!({
        "first": primcat::classify(&sys, x, &theta)?.to_string(),
        "second": primcat::classify(&sys, y, &omega)?.to_string(),
        "kind": match witness.kind {
            WitnessKind::DisjointClosure => "disjoint-closure",
            WitnessKind::CharacterMismatch => "character-mismatch",
        },
        "killed_by": "second",
        "killed_norm": witness.killed_norm,
        "surviving_norm": witness.surviving_norm,
        "function": serde_json::to_value(function_terms(&sys, &witness.function))
            .map_err(input_err)?,
    });
    serde_json::to_string_pretty(&value).map_err(input_err)
}

pub fn cmd_battery(path: &Path, opts: &RunOptions) -> Result<String, CliError> {
    let sys = load_system(path)?;
    let report = repr::identity_battery(&sys, opts.trials, opts.tolerance, opts.seed)
        .map_err(CliError::from)?;
    let mut out = String::new();
    for (i, residual) in report.per_identity_max.iter().enumerate() {
        writeln!(out, "identity ({}): pass (max residual {residual:.3e})", i + 1)
            .expect("string write");
    }
    write!(
        out,
        "battery: pass (seed {}, trials {}, max residual {:.3e})",
        report.seed, report.trials, report.max_residual
    )
    .expect("string write");
    Ok(out)
}

pub fn cmd_graph(path: &Path, representatives: &[String]) -> Result<String, CliError> {
    let graph = load_graph(path)?;
    if representatives.is_empty() {
        return Err(CliError::Input(
            "at least one representative path is required".to_string(),
        ));
    }
    let reps: Vec<EvPath> = representatives
        .iter()
        .map(|r| parse_path(&graph, r))
        .collect::<Result<_, _>>()?;
    let cat = primorbit::pathspace::graph_catalogue(&graph, &reps).map_err(CliError::from)?;
    let entries: Vec<GraphEntryReport> = cat
        .entries
        .iter()
        .map(|e| GraphEntryReport {
            representative: e.representative.display(&graph),
            displacement_group: lattice_rows(e.h.effective()),
            dual_rank: e.dual_rank,
            flagged: e.h.flagged,
        })
        .collect();
    let report = GraphReport {
        digest: String::new(),
        entries,
        closure_leq: cat.closure_leq,
        c0_kernel_leq: cat.c0_kernel_leq,
        closure_statement: cat.closure_statement,
    };
    seal_digest(serde_json::to_value(&report).map_err(input_err)?)
}
