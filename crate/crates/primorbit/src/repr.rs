//! Numerical verification engine: the convolution *-algebra of finitely
//! supported functions on the groupoid, the gauge action, the
//! coset-summing map onto the quotient-groupoid algebra, finite matrix
//! representations per orbit, and the identity battery that certifies the
//! algebraic relations between them.
//!
//! Classification decisions stay exact (integer lattices, rational
//! angles); this module only certifies operator identities numerically, to
//! a fixed tolerance.

use crate::dynsys::{DynSysError, FiniteSystem};
use crate::groupoid::{
    self, contains, GroupoidElement, GroupoidError, QuotientElement,
};
use crate::lattice::{Lattice, LatticeError, RationalAngle};
use crate::periodicity::{self, PeriodicityError, PeriodicityProfile};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Values below this are dropped from supports.
pub const PRUNE_EPSILON: f64 = 1e-12;

/// Default certification tolerance for operator identities.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReprError {
    #[error(transparent)]
    System(#[from] DynSysError),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Periodicity(#[from] PeriodicityError),
    #[error("support spans quasi-orbits with different displacement groups: {orbits:?}")]
    MixedQuasiOrbits { orbits: Vec<String> },
    #[error("vector {0:?} lies outside the reference lattice")]
    SupportNotInLattice(Vec<i64>),
    #[error("basis element has source {got}, expected {expected}")]
    SourceMismatch { expected: String, got: String },
    #[error(
        "identity ({identity}) failed on trial {trial} with residual {residual:.3e}: {description}"
    )]
    BatteryFailure {
        identity: u8,
        trial: u32,
        residual: f64,
        description: String,
    },
    #[error("constructed intertwiner failed its verification battery with residual {residual:.3e}")]
    VerificationFailure { residual: f64 },
}

fn phase(q: &num_rational::BigRational) -> Complex64 {
    let frac = q - q.floor();
    Complex64::from_polar(1.0, TAU * frac.to_f64().expect("unit-interval rational"))
}

fn angle_phase(theta: &RationalAngle, g: &[i64]) -> Complex64 {
    phase(&theta.dot_i64(g))
}

/// A finitely supported complex function on the groupoid. Every support
/// element is a valid groupoid element; values below [`PRUNE_EPSILON`] are
/// pruned.
#[derive(Debug, Clone, PartialEq)]
pub struct CcFunction {
    k: usize,
    terms: BTreeMap<GroupoidElement, Complex64>,
}

impl CcFunction {
    pub fn zero(k: usize) -> Self {
        CcFunction {
            k,
            terms: BTreeMap::new(),
        }
    }

    /// The indicator of a single element.
    pub fn indicator(
        sys: &FiniteSystem,
        range: usize,
        displacement: Vec<i64>,
        source: usize,
    ) -> Result<Self, ReprError> {
        let elem = GroupoidElement::new(sys, range, displacement, source)?;
        let mut f = CcFunction::zero(sys.k());
        f.terms.insert(elem, Complex64::new(1.0, 0.0));
        Ok(f)
    }

    /// The indicator of the unit (x, 0, x); these span the function algebra
    /// of the point set inside the convolution algebra.
    pub fn unit_indicator(sys: &FiniteSystem, x: usize) -> Result<Self, ReprError> {
        CcFunction::indicator(sys, x, vec![0; sys.k()], x)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> &BTreeMap<GroupoidElement, Complex64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn value(&self, elem: &GroupoidElement) -> Complex64 {
        self.terms
            .get(elem)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn insert(&mut self, elem: GroupoidElement, value: Complex64) {
        let v = self.terms.entry(elem.clone()).or_insert(Complex64::new(0.0, 0.0));
        *v += value;
        if v.norm() < PRUNE_EPSILON {
            self.terms.remove(&elem);
        }
    }

    pub fn scale(&self, c: Complex64) -> CcFunction {
        let mut out = CcFunction::zero(self.k);
        for (e, v) in &self.terms {
            out.insert(e.clone(), c * v);
        }
        out
    }

    pub fn add(&self, other: &CcFunction) -> CcFunction {
        let mut out = self.clone();
        for (e, v) in &other.terms {
            out.insert(e.clone(), *v);
        }
        out
    }

    pub fn sub(&self, other: &CcFunction) -> CcFunction {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Largest absolute value over the combined support: the distance to
    /// other in the supremum norm when applied to a difference.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Convolution: (f * g)(x, d, y) = Σ f(x, h, u) g(u, d - h, y), the sum
/// running over composable pairs of support elements.
pub fn convolve(sys: &FiniteSystem, f: &CcFunction, g: &CcFunction) -> CcFunction {
    let mut out = CcFunction::zero(f.k);
    for (a, va) in &f.terms {
        for (b, vb) in &g.terms {
            if a.source() == b.range() {
                let prod = groupoid::compose(sys, a, b).expect("valid factors compose");
                out.insert(prod, va * vb);
            }
        }
    }
    out
}

/// The *-operation: f*(γ) = conj(f(γ⁻¹)).
pub fn involution(f: &CcFunction) -> CcFunction {
    let mut out = CcFunction::zero(f.k);
    for (e, v) in &f.terms {
        out.insert(groupoid::inverse(e), v.conj());
    }
    out
}

/// The I-norm: sup over units of the larger of the absolute row and column
/// sums along range and source fibers.
pub fn i_norm(f: &CcFunction) -> f64 {
    let mut by_range: BTreeMap<usize, f64> = BTreeMap::new();
    let mut by_source: BTreeMap<usize, f64> = BTreeMap::new();
    for (e, v) in &f.terms {
        *by_range.entry(e.range()).or_insert(0.0) += v.norm();
        *by_source.entry(e.source()).or_insert(0.0) += v.norm();
    }
    by_range
        .values()
        .chain(by_source.values())
        .fold(0.0, |acc, &s| acc.max(s))
}

/// The gauge action: multiplies the value at displacement g by e^{2πi θ·g}.
/// A *-automorphism of the convolution algebra for every angle.
pub fn gauge_act(theta: &RationalAngle, f: &CcFunction) -> CcFunction {
    assert_eq!(theta.len(), f.k, "angle arity must match the system");
    let mut out = CcFunction::zero(f.k);
    for (e, v) in &f.terms {
        out.insert(e.clone(), angle_phase(theta, e.displacement()) * v);
    }
    out
}

/// Restriction to displacement-zero elements; agrees with the average of
/// the gauge action over the torus on finitely supported functions.
pub fn conditional_expectation(f: &CcFunction) -> CcFunction {
    let mut out = CcFunction::zero(f.k);
    for (e, v) in &f.terms {
        if e.displacement().iter().all(|&d| d == 0) {
            out.insert(e.clone(), *v);
        }
    }
    out
}

/// A finitely supported function on a reference lattice H; the Fourier
/// side of the interior-isotropy algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct FinSuppHFun {
    lattice: Lattice,
    terms: BTreeMap<Vec<i64>, Complex64>,
}

impl FinSuppHFun {
    pub fn new(
        lattice: Lattice,
        terms: impl IntoIterator<Item = (Vec<i64>, Complex64)>,
    ) -> Result<Self, ReprError> {
        let mut map = BTreeMap::new();
        for (n, v) in terms {
            if !lattice.member_i64(&n)? {
                return Err(ReprError::SupportNotInLattice(n));
            }
            if v.norm() >= PRUNE_EPSILON {
                *map.entry(n).or_insert(Complex64::new(0.0, 0.0)) += v;
            }
        }
        Ok(FinSuppHFun {
            lattice,
            terms: map,
        })
    }

    pub fn delta(lattice: Lattice, n: Vec<i64>) -> Result<Self, ReprError> {
        FinSuppHFun::new(lattice, [(n, Complex64::new(1.0, 0.0))])
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i64>, Complex64> {
        &self.terms
    }
}

/// The module action (φ·f)(x, g, y) = Σ_n φ(n) f(x, g - n, y). Shifted
/// support elements stay in the groupoid when φ is supported in the
/// interior-isotropy lattice of f's quasi-orbit; a shift that leaves the
/// groupoid reports the offending lattice vector.
pub fn phi_dot(
    sys: &FiniteSystem,
    phi: &FinSuppHFun,
    f: &CcFunction,
) -> Result<CcFunction, ReprError> {
    let mut out = CcFunction::zero(f.k);
    for (n, pv) in &phi.terms {
        for (e, fv) in &f.terms {
            let shifted: Vec<i64> = e
                .displacement()
                .iter()
                .zip(n)
                .map(|(a, b)| a + b)
                .collect();
            let elem = GroupoidElement::new(sys, e.range(), shifted, e.source())
                .map_err(|_| ReprError::SupportNotInLattice(n.clone()))?;
            out.insert(elem, pv * fv);
        }
    }
    Ok(out)
}

/// φ̂ evaluated at z = e^{2πiθ}: Σ_n φ(n) e^{2πi θ·n}.
pub fn fourier(phi: &FinSuppHFun, theta: &RationalAngle) -> Complex64 {
    phi.terms
        .iter()
        .map(|(n, v)| angle_phase(theta, n) * v)
        .sum()
}

/// A finitely supported function on the quotient groupoid: classes are
/// displacement cosets modulo one fixed lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientFunction {
    lattice: Lattice,
    terms: BTreeMap<QuotientElement, Complex64>,
}

impl QuotientFunction {
    pub fn zero(lattice: Lattice) -> Self {
        QuotientFunction {
            lattice,
            terms: BTreeMap::new(),
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn terms(&self) -> &BTreeMap<QuotientElement, Complex64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, elem: QuotientElement, value: Complex64) {
        let v = self.terms.entry(elem.clone()).or_insert(Complex64::new(0.0, 0.0));
        *v += value;
        if v.norm() < PRUNE_EPSILON {
            self.terms.remove(&elem);
        }
    }

    pub fn scale(&self, c: Complex64) -> QuotientFunction {
        let mut out = QuotientFunction::zero(self.lattice.clone());
        for (e, v) in &self.terms {
            out.insert(e.clone(), c * v);
        }
        out
    }

    pub fn sub(&self, other: &QuotientFunction) -> QuotientFunction {
        let mut out = self.clone();
        for (e, v) in &other.terms {
            out.insert(e.clone(), -v);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// The coset-summing map onto the quotient-groupoid algebra:
/// κ(f)(x, [g], y) = Σ_{h ≡ g mod H} f(x, h, y).
///
/// The support must not span quasi-orbits whose displacement groups
/// differ: summing against a single H would silently misreduce at least
/// one of them, so that case is an error and the caller must split f.
pub fn kappa(
    sys: &FiniteSystem,
    f: &CcFunction,
    h: &Lattice,
) -> Result<QuotientFunction, ReprError> {
    let mut orbit_reps: Vec<usize> = Vec::new();
    for e in f.terms.keys() {
        let orbit = sys.orbit(e.range())?;
        let rep = orbit[0];
        if !orbit_reps.contains(&rep) {
            orbit_reps.push(rep);
        }
    }
    if orbit_reps.len() > 1 {
        let mut lattices: Vec<Lattice> = Vec::new();
        for &rep in &orbit_reps {
            lattices.push(periodicity::profile(sys, rep)?.h);
        }
        if lattices.windows(2).any(|w| w[0] != w[1]) {
            return Err(ReprError::MixedQuasiOrbits {
                orbits: orbit_reps.iter().map(|&r| sys.name(r).to_string()).collect(),
            });
        }
    }
    let mut out = QuotientFunction::zero(h.clone());
    for (e, v) in &f.terms {
        out.insert(groupoid::quotient_element(sys, e, h)?, *v);
    }
    Ok(out)
}

/// Quotient-level convolution.
pub fn convolve_quotient(
    sys: &FiniteSystem,
    f: &QuotientFunction,
    g: &QuotientFunction,
) -> Result<QuotientFunction, ReprError> {
    if f.lattice != g.lattice {
        return Err(GroupoidError::LatticeMismatch.into());
    }
    let mut out = QuotientFunction::zero(f.lattice.clone());
    for (a, va) in &f.terms {
        for (b, vb) in &g.terms {
            if a.source() == b.range() {
                out.insert(groupoid::quotient_compose(sys, a, b)?, va * vb);
            }
        }
    }
    Ok(out)
}

/// Quotient-level involution.
pub fn involution_quotient(
    sys: &FiniteSystem,
    f: &QuotientFunction,
) -> Result<QuotientFunction, ReprError> {
    let mut out = QuotientFunction::zero(f.lattice.clone());
    for (e, v) in &f.terms {
        out.insert(groupoid::quotient_inverse(sys, e)?, v.conj());
    }
    Ok(out)
}

/// The induced gauge action on the quotient: multiplies a class by the
/// phase of its canonical representative. Well defined on cosets exactly
/// when θ annihilates the reference lattice.
pub fn gauge_act_quotient(theta: &RationalAngle, f: &QuotientFunction) -> QuotientFunction {
    let mut out = QuotientFunction::zero(f.lattice.clone());
    for (e, v) in &f.terms {
        out.insert(e.clone(), angle_phase(theta, e.class_representative()) * v);
    }
    out
}

/// A complex matrix indexed by the sorted points of one orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitMatrix {
    basis: Vec<usize>,
    data: Vec<Vec<Complex64>>,
}

impl OrbitMatrix {
    pub fn zero(basis: Vec<usize>) -> Self {
        let n = basis.len();
        OrbitMatrix {
            basis,
            data: vec![vec![Complex64::new(0.0, 0.0); n]; n],
        }
    }

    pub fn identity(basis: Vec<usize>) -> Self {
        let mut m = OrbitMatrix::zero(basis);
        for i in 0..m.dim() {
            m.data[i][i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn diagonal(basis: Vec<usize>, entries: Vec<Complex64>) -> Self {
        let mut m = OrbitMatrix::zero(basis);
        for i in 0..m.dim() {
            m.data[i][i] = entries[i];
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Orbit points indexing rows and columns, ascending.
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i][j]
    }

    pub fn basis_position(&self, point: usize) -> Option<usize> {
        self.basis.iter().position(|&p| p == point)
    }

    pub fn mul(&self, other: &OrbitMatrix) -> OrbitMatrix {
        assert_eq!(self.basis, other.basis, "matrices live on different orbits");
        let n = self.dim();
        let mut out = OrbitMatrix::zero(self.basis.clone());
        for i in 0..n {
            for l in 0..n {
                let a = self.data[i][l];
                if a.norm() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i][j] += a * other.data[l][j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> OrbitMatrix {
        let n = self.dim();
        let mut out = OrbitMatrix::zero(self.basis.clone());
        for i in 0..n {
            for j in 0..n {
                out.data[i][j] = self.data[j][i].conj();
            }
        }
        out
    }

    pub fn sub(&self, other: &OrbitMatrix) -> OrbitMatrix {
        assert_eq!(self.basis, other.basis, "matrices live on different orbits");
        let n = self.dim();
        let mut out = OrbitMatrix::zero(self.basis.clone());
        for i in 0..n {
            for j in 0..n {
                out.data[i][j] = self.data[i][j] - other.data[i][j];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Operator 2-norm via power iteration on A*A; converges from below,
    /// which is the safe direction for upper-bound certificates.
    pub fn spectral_norm(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 0.0;
        }
        let gram = self.adjoint().mul(self);
        let starts: Vec<Vec<Complex64>> = vec![
            vec![Complex64::new(1.0, 0.0); n],
            (0..n)
                .map(|i| Complex64::new(1.0 + i as f64, 0.5 * i as f64))
                .collect(),
        ];
        let mut best = 0.0f64;
        for mut v in starts {
            let mut norm = (v.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
            if norm == 0.0 {
                continue;
            }
            for c in v.iter_mut() {
                *c /= norm;
            }
            let mut eig = 0.0;
            for _ in 0..500 {
                let mut w = vec![Complex64::new(0.0, 0.0); n];
                for (i, row) in gram.data.iter().enumerate() {
                    for (j, a) in row.iter().enumerate() {
                        w[i] += a * v[j];
                    }
                }
                norm = (w.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
                if norm < 1e-300 {
                    eig = 0.0;
                    break;
                }
                eig = norm;
                for c in w.iter_mut() {
                    *c /= norm;
                }
                v = w;
            }
            best = best.max(eig);
        }
        best.sqrt()
    }
}

/// The matrix of the representation with base point x and phase θ on the
/// square-summable functions of [x]: entries
/// M[u, y] = Σ_g e^{2πiθ·g} f(u, g, y) over support elements inside the
/// orbit. Depends only on the orbit and the angle.
pub fn pi_matrix(
    sys: &FiniteSystem,
    x: usize,
    theta: &RationalAngle,
    f: &CcFunction,
) -> Result<OrbitMatrix, ReprError> {
    let basis = sys.orbit(x)?;
    let mut m = OrbitMatrix::zero(basis);
    for (e, v) in &f.terms {
        let (Some(i), Some(j)) = (m.basis_position(e.range()), m.basis_position(e.source()))
        else {
            continue;
        };
        m.data[i][j] += angle_phase(theta, e.displacement()) * v;
    }
    Ok(m)
}

/// The phase-free specialization: the matrix of the orbit representation
/// that sums over source fibers.
pub fn omega_matrix(sys: &FiniteSystem, x: usize, f: &CcFunction) -> Result<OrbitMatrix, ReprError> {
    pi_matrix(sys, x, &RationalAngle::zero(sys.k()), f)
}

/// Apply the regular representation at base point x to a finitely
/// supported vector on the source fiber G_x = {γ : s(γ) = x}:
/// L(f) δ_γ = Σ_{s(α) = r(γ)} f(α) δ_{αγ}. The fiber is infinite whenever
/// the isotropy has positive rank, so no matrix is formed.
pub fn regular_apply(
    sys: &FiniteSystem,
    x: usize,
    f: &CcFunction,
    v: &BTreeMap<GroupoidElement, Complex64>,
) -> Result<BTreeMap<GroupoidElement, Complex64>, ReprError> {
    for gamma in v.keys() {
        if gamma.source() != x {
            return Err(ReprError::SourceMismatch {
                expected: sys.name(x).to_string(),
                got: sys.name(gamma.source()).to_string(),
            });
        }
    }
    let mut out: BTreeMap<GroupoidElement, Complex64> = BTreeMap::new();
    for (gamma, c) in v {
        for (alpha, a) in &f.terms {
            if alpha.source() == gamma.range() {
                let prod = groupoid::compose(sys, alpha, gamma).expect("valid factors compose");
                let entry = out.entry(prod).or_insert(Complex64::new(0.0, 0.0));
                *entry += a * c;
            }
        }
    }
    out.retain(|_, c| c.norm() >= PRUNE_EPSILON);
    Ok(out)
}

/// Outcome of the intertwiner construction.
#[derive(Debug, Clone, PartialEq)]
pub enum IntertwinerResult {
    /// A verified diagonal unitary U with U·π_{x,θ}(f) = π_{x,ω}(f)·U on
    /// the generator battery; `max_residual` is the largest deviation seen.
    Unitary {
        matrix: OrbitMatrix,
        max_residual: f64,
    },
    /// The difference ω - θ does not annihilate H(x), so the two
    /// representations have different kernels and no intertwiner exists.
    NoneExists,
}

/// Deterministic displacement assignment over an orbit: a breadth-first
/// search from x choosing, for every orbit point y, a g_y with
/// (x, g_y, y) in the groupoid. Forward edges add a unit vector, backward
/// edges subtract one.
pub fn orbit_displacements(
    sys: &FiniteSystem,
    x: usize,
) -> Result<BTreeMap<usize, Vec<i64>>, ReprError> {
    sys.check_point(x)?;
    let mut assigned: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
    assigned.insert(x, vec![0; sys.k()]);
    let mut queue = std::collections::VecDeque::from([x]);
    while let Some(u) = queue.pop_front() {
        let gu = assigned[&u].clone();
        for i in 0..sys.k() {
            let v = sys.step(i, u);
            if !assigned.contains_key(&v) {
                let mut gv = gu.clone();
                gv[i] += 1;
                assigned.insert(v, gv);
                queue.push_back(v);
            }
        }
        for i in 0..sys.k() {
            for w in 0..sys.len() {
                if sys.step(i, w) == u && !assigned.contains_key(&w) {
                    let mut gw = gu.clone();
                    gw[i] -= 1;
                    assigned.insert(w, gw);
                    queue.push_back(w);
                }
            }
        }
    }
    Ok(assigned)
}

/// Construct and verify a diagonal intertwiner from the θ-representation
/// to the ω-representation at base point x, or report that none exists.
///
/// When ω - θ annihilates H(x), the diagonal entries
/// u_y = e^{-2πi(ω-θ)·g_y} are independent of the choice of g_y (any two
/// choices differ by an element of H(x)), and U intertwines exactly; the
/// verification battery over generators and isotropy indicators certifies
/// this numerically.
pub fn intertwiner(
    sys: &FiniteSystem,
    x: usize,
    theta: &RationalAngle,
    omega: &RationalAngle,
    tolerance: f64,
) -> Result<IntertwinerResult, ReprError> {
    let profile = periodicity::profile(sys, x)?;
    let diff = omega.sub(theta);
    if !profile.h.annihilator_member(&diff)? {
        return Ok(IntertwinerResult::NoneExists);
    }
    let disp = orbit_displacements(sys, x)?;
    let basis = profile.orbit.clone();
    let entries: Vec<Complex64> = basis
        .iter()
        .map(|y| angle_phase(&diff, &disp[y]).conj())
        .collect();
    let u = OrbitMatrix::diagonal(basis.clone(), entries);

    let mut battery: Vec<CcFunction> = Vec::new();
    for (&y, gy) in &disp {
        let g: Vec<i64> = gy.iter().zip(&disp[&x]).map(|(a, b)| a - b).collect();
        battery.push(CcFunction::indicator(sys, x, g, y)?);
    }
    for row in profile.h.basis() {
        let g: Vec<i64> = row
            .iter()
            .map(|b| b.to_i64().expect("small lattice entry"))
            .collect();
        battery.push(CcFunction::indicator(sys, x, g, x)?);
    }
    battery.push(CcFunction::unit_indicator(sys, x)?);

    let mut max_residual = 0.0f64;
    for f in &battery {
        let lhs = u.mul(&pi_matrix(sys, x, theta, f)?);
        let rhs = pi_matrix(sys, x, omega, f)?.mul(&u);
        max_residual = max_residual.max(lhs.sub(&rhs).max_abs());
    }
    if max_residual > tolerance {
        return Err(ReprError::VerificationFailure {
            residual: max_residual,
        });
    }
    Ok(IntertwinerResult::Unitary {
        matrix: u,
        max_residual,
    })
}

/// Summary of a passed identity battery.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryReport {
    pub trials: u32,
    pub seed: u64,
    pub tolerance: f64,
    /// Largest residual seen per identity class (1..=7).
    pub per_identity_max: [f64; 7],
    pub max_residual: f64,
}

/// Run the seeded identity battery: for random supported functions,
/// angles, and lattice-supported multipliers, certify identities (1)-(7)
/// relating convolution, the gauge action, the coset-summing map, the
/// module action, and the orbit representations.
pub fn identity_battery(
    sys: &FiniteSystem,
    trials: u32,
    tolerance: f64,
    seed: u64,
) -> Result<BatteryReport, ReprError> {
    identity_battery_with_override(sys, trials, tolerance, seed, None)
}

/// Same battery, with the lattice handed to the quotient-level maps
/// replaced by `lattice_override`. Annihilator angles are still sampled
/// against the true per-orbit displacement groups, so a wrong override is
/// caught by the equivariance identity; this is the negative control.
pub fn identity_battery_with_override(
    sys: &FiniteSystem,
    trials: u32,
    tolerance: f64,
    seed: u64,
    lattice_override: Option<&Lattice>,
) -> Result<BatteryReport, ReprError> {
    assert!(trials >= 1, "at least one trial");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = sys.k();
    let profiles = periodicity::profiles(sys)?;
    let reps: Vec<usize> = profiles.keys().copied().collect();
    let mut per_identity_max = [0.0f64; 7];

    let check = |slot: u8, trial: u32, residual: f64, description: &str,
                     acc: &mut [f64; 7]|
     -> Result<(), ReprError> {
        acc[(slot - 1) as usize] = acc[(slot - 1) as usize].max(residual);
        if residual > tolerance {
            return Err(ReprError::BatteryFailure {
                identity: slot,
                trial,
                residual,
                description: description.to_string(),
            });
        }
        Ok(())
    };

    for trial in 1..=trials {
        let rep = reps[rng.gen_range(0..reps.len())];
        let profile = &profiles[&rep];
        let h = lattice_override.unwrap_or(&profile.h).clone();

        let f = random_cc(sys, profile, &mut rng)?;
        let g = random_cc(sys, profile, &mut rng)?;
        let theta = random_angle(k, &mut rng);
        let eta = random_annihilator_angle(&profile.h, &mut rng);
        let phi = random_hfun(&h, &mut rng)?;
        let x = profile.orbit[rng.gen_range(0..profile.orbit.len())];

        // (1) the coset-summing map is a *-homomorphism.
        let lhs = kappa(sys, &convolve(sys, &f, &g), &h)?;
        let rhs = convolve_quotient(sys, &kappa(sys, &f, &h)?, &kappa(sys, &g, &h)?)?;
        check(1, trial, lhs.sub(&rhs).max_abs(), "kappa(f*g) = kappa(f)*kappa(g)", &mut per_identity_max)?;
        let lhs = kappa(sys, &involution(&f), &h)?;
        let rhs = involution_quotient(sys, &kappa(sys, &f, &h)?)?;
        check(1, trial, lhs.sub(&rhs).max_abs(), "kappa(f~) = kappa(f)~", &mut per_identity_max)?;

        // (2) equivariance for annihilator angles.
        let lhs = kappa(sys, &gauge_act(&eta, &f), &h)?;
        let rhs = gauge_act_quotient(&eta, &kappa(sys, &f, &h)?);
        check(2, trial, lhs.sub(&rhs).max_abs(), "kappa(alpha_eta f) = alpha~_eta kappa(f)", &mut per_identity_max)?;

        // (3) the module action scales by the Fourier value at any angle.
        let lhs = kappa(sys, &gauge_act(&theta, &phi_dot(sys, &phi, &f)?), &h)?;
        let rhs = kappa(sys, &gauge_act(&theta, &f), &h)?.scale(fourier(&phi, &theta));
        check(3, trial, lhs.sub(&rhs).max_abs(), "kappa(alpha_z(phi.f)) = phihat(z) kappa(alpha_z f)", &mut per_identity_max)?;

        // (4) field equivariance: shifting the evaluation angle by an
        // annihilator element acts on the fiber.
        let lhs = kappa(sys, &gauge_act(&theta.add(&eta), &f), &h)?;
        let rhs = gauge_act_quotient(&eta, &kappa(sys, &gauge_act(&theta, &f), &h)?);
        check(4, trial, lhs.sub(&rhs).max_abs(), "kappa(alpha_{theta+eta} f) = alpha~_eta kappa(alpha_theta f)", &mut per_identity_max)?;

        // (5) the orbit representation is a *-homomorphism.
        let lhs = pi_matrix(sys, x, &theta, &convolve(sys, &f, &g))?;
        let rhs = pi_matrix(sys, x, &theta, &f)?.mul(&pi_matrix(sys, x, &theta, &g)?);
        check(5, trial, lhs.sub(&rhs).max_abs(), "pi(f*g) = pi(f) pi(g)", &mut per_identity_max)?;
        let lhs = pi_matrix(sys, x, &theta, &involution(&f))?;
        let rhs = pi_matrix(sys, x, &theta, &f)?.adjoint();
        check(5, trial, lhs.sub(&rhs).max_abs(), "pi(f~) = pi(f)*", &mut per_identity_max)?;

        // (6) the phased representation factors through the gauge action.
        let lhs = pi_matrix(sys, x, &theta, &f)?;
        let rhs = omega_matrix(sys, x, &gauge_act(&theta, &f))?;
        check(6, trial, lhs.sub(&rhs).max_abs(), "pi_theta = omega after alpha_theta", &mut per_identity_max)?;

        // (7) the I-norm dominates the operator norm.
        let excess = pi_matrix(sys, x, &theta, &f)?.spectral_norm() - i_norm(&f);
        check(7, trial, excess.max(0.0), "||pi(f)|| <= I-norm(f)", &mut per_identity_max)?;
    }

    let max_residual = per_identity_max.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok(BatteryReport {
        trials,
        seed,
        tolerance,
        per_identity_max,
        max_residual,
    })
}

/// Random finitely supported function within one quasi-orbit: three to six
/// elements with displacement entries bounded by 4 and values in the unit
/// square.
fn random_cc(
    sys: &FiniteSystem,
    profile: &PeriodicityProfile,
    rng: &mut ChaCha8Rng,
) -> Result<CcFunction, ReprError> {
    let k = sys.k();
    let mut f = CcFunction::zero(k);
    let wanted = rng.gen_range(3..=6);
    let mut placed = 0;
    let mut attempts = 0;
    while placed < wanted && attempts < 200 {
        attempts += 1;
        let u = profile.orbit[rng.gen_range(0..profile.orbit.len())];
        let v = profile.orbit[rng.gen_range(0..profile.orbit.len())];
        let g: Vec<i64> = (0..k).map(|_| rng.gen_range(-4..=4)).collect();
        if contains(sys, u, &g, v)? {
            let value = Complex64::new(rng.gen::<f64>(), rng.gen::<f64>());
            f.insert(GroupoidElement::new(sys, u, g, v)?, value);
            placed += 1;
        }
    }
    assert!(placed > 0, "failed to sample any valid support element");
    Ok(f)
}

/// Random rational angle with denominators up to 12.
fn random_angle(k: usize, rng: &mut ChaCha8Rng) -> RationalAngle {
    let entries: Vec<(i64, i64)> = (0..k)
        .map(|_| {
            let d = rng.gen_range(1..=12);
            (rng.gen_range(0..d), d)
        })
        .collect();
    RationalAngle::from_ratios(&entries)
}

/// Random element of the annihilator of H: an integer combination of the
/// torsion generators plus rational multiples of the free directions.
/// Rejects zero while the annihilator is nontrivial, so equivariance
/// checks genuinely exercise a nonzero character.
fn random_annihilator_angle(h: &Lattice, rng: &mut ChaCha8Rng) -> RationalAngle {
    let gens = h.annihilator_generators();
    let k = h.ambient();
    for _ in 0..8 {
        let mut angle = RationalAngle::zero(k);
        for (torsion, order) in &gens.torsion {
            let c = rng.gen_range(0..order.to_i64().expect("small torsion order"));
            angle = angle.add(&torsion.scale(&num_bigint::BigInt::from(c)));
        }
        for dir in &gens.free {
            let d = rng.gen_range(1..=12i64);
            let j = rng.gen_range(0..d);
            let step: Vec<(i64, i64)> = dir
                .iter()
                .map(|b| (j * b.to_i64().expect("small direction entry"), d))
                .collect();
            angle = angle.add(&RationalAngle::from_ratios(&step));
        }
        if !angle.is_zero() {
            return angle;
        }
        if gens.torsion.is_empty() && gens.free.is_empty() {
            break;
        }
    }
    RationalAngle::zero(k)
}

/// Random lattice-supported multiplier: one to three small integer
/// combinations of the basis rows.
fn random_hfun(h: &Lattice, rng: &mut ChaCha8Rng) -> Result<FinSuppHFun, ReprError> {
    let k = h.ambient();
    let mut terms: Vec<(Vec<i64>, Complex64)> = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let mut n = vec![0i64; k];
        for row in h.basis() {
            let c = rng.gen_range(-2..=2i64);
            for (ni, b) in n.iter_mut().zip(row) {
                *ni += c * b.to_i64().expect("small basis entry");
            }
        }
        let value = Complex64::new(rng.gen::<f64>(), rng.gen::<f64>());
        terms.push((n, value));
    }
    FinSuppHFun::new(h.clone(), terms)
}
