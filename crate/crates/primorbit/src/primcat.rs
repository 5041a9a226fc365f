//! The primitive-ideal catalogue: labels for the primitive ideals of the
//! groupoid C*-algebra of a finite system, the equivalence that decides
//! when two labels name the same ideal, machine-checkable separation
//! witnesses for distinct ideals, and the induced topology report.
//!
//! A label is a pair (quasi-orbit, character of the displacement group).
//! Two ambient angles label the same ideal over the same quasi-orbit
//! exactly when their difference annihilates the displacement group; a
//! verified unitary intertwiner certifies equality, a separating witness
//! certifies inequality.

use crate::dynsys::{DynSysError, FiniteSystem};
use crate::groupoid::GroupoidError;
use crate::lattice::{CharacterLabel, Lattice, LatticeError, RationalAngle, SmithInvariants};
use crate::periodicity::{self, PeriodicityError};
use crate::repr::{self, CcFunction, ReprError};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::One;
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PrimcatError {
    #[error(transparent)]
    System(#[from] DynSysError),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Periodicity(#[from] PeriodicityError),
    #[error(transparent)]
    Repr(#[from] ReprError),
    #[error("labels {first} and {second} name the same primitive ideal; nothing separates them")]
    NotSeparable { first: String, second: String },
    #[error(
        "witness verification failed: killed norm {killed_norm:.3e}, surviving norm {surviving_norm:.3e}"
    )]
    WitnessVerificationFailed {
        killed_norm: f64,
        surviving_norm: f64,
    },
}

/// A primitive-ideal label: the quasi-orbit of the base point together
/// with the restriction of the ambient angle to the displacement group.
/// Equal labels name equal ideals; distinct labels admit a separating
/// witness.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PrimIdealLabel {
    quasi_orbit: usize,
    quasi_orbit_name: String,
    character: CharacterLabel,
}

impl PrimIdealLabel {
    /// Canonical representative point of the quasi-orbit.
    pub fn quasi_orbit(&self) -> usize {
        self.quasi_orbit
    }

    pub fn quasi_orbit_name(&self) -> &str {
        &self.quasi_orbit_name
    }

    /// The restricted character: one angle per basis row of the
    /// displacement group.
    pub fn character(&self) -> &CharacterLabel {
        &self.character
    }
}

impl fmt::Display for PrimIdealLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}; {}]", self.quasi_orbit_name, self.character)
    }
}

/// Classify the kernel of the representation with base point x and angle
/// θ. Depends only on the quasi-orbit of x and on θ modulo the
/// annihilator of the displacement group.
pub fn classify(
    sys: &FiniteSystem,
    x: usize,
    theta: &RationalAngle,
) -> Result<PrimIdealLabel, PrimcatError> {
    let profile = periodicity::profile(sys, x)?;
    Ok(PrimIdealLabel {
        quasi_orbit: profile.quasi_orbit,
        quasi_orbit_name: sys.name(profile.quasi_orbit).to_string(),
        character: profile.h.restrict_character(theta)?,
    })
}

/// Outcome of the label-equivalence test, with the deciding clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equivalence {
    pub equivalent: bool,
    /// Which clause decided: the quasi-orbit comparison or the annihilator
    /// membership of the angle difference.
    pub reason: String,
}

/// Decide whether (x, θ) and (y, ω) label the same primitive ideal: the
/// base points must share a quasi-orbit and the angle difference must
/// annihilate its displacement group.
pub fn equivalent(
    sys: &FiniteSystem,
    x: usize,
    theta: &RationalAngle,
    y: usize,
    omega: &RationalAngle,
) -> Result<Equivalence, PrimcatError> {
    let px = periodicity::profile(sys, x)?;
    let py = periodicity::profile(sys, y)?;
    if px.quasi_orbit != py.quasi_orbit {
        return Ok(Equivalence {
            equivalent: false,
            reason: format!(
                "the base points lie in different quasi-orbits ({} vs {})",
                sys.name(px.quasi_orbit),
                sys.name(py.quasi_orbit)
            ),
        });
    }
    if !px.h.annihilator_member(&omega.sub(theta))? {
        return Ok(Equivalence {
            equivalent: false,
            reason: format!(
                "the angle difference {} does not annihilate the displacement group",
                omega.sub(theta)
            ),
        });
    }
    Ok(Equivalence {
        equivalent: true,
        reason: "same quasi-orbit, and the angle difference annihilates the displacement group"
            .to_string(),
    })
}

/// One catalogue row per quasi-orbit: the invariants that parametrize the
/// primitive ideals living over it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogueEntry {
    /// Name of the canonical representative.
    pub quasi_orbit: String,
    /// Orbit-closure members by name, in point order.
    pub orbit: Vec<String>,
    /// The displacement group H.
    pub h: Lattice,
    pub smith: SmithInvariants,
    /// The periodic core Y, by name.
    pub y: Vec<String>,
    /// Dimension of the character torus of H: ideals over this quasi-orbit
    /// form a torus of this rank.
    pub dual_torus_rank: usize,
    /// Free rank of the annihilator: ambient angle directions that never
    /// change the ideal.
    pub annihilator_free_rank: usize,
    /// Orders of the cyclic factors of the annihilator (invariant factors
    /// greater than one).
    pub annihilator_cyclic: Vec<BigInt>,
    /// Human-readable summary of the ideal space over this quasi-orbit.
    pub dual_description: String,
}

/// The catalogue for every quasi-orbit, sorted by representative name.
pub fn catalogue(sys: &FiniteSystem) -> Result<Vec<CatalogueEntry>, PrimcatError> {
    let mut entries = Vec::new();
    for profile in periodicity::profiles(sys)?.values() {
        let smith = profile.h.smith_invariants();
        let rank = profile.h.rank();
        let free = profile.h.ambient() - rank;
        let cyclic: Vec<BigInt> = smith
            .factors
            .iter()
            .filter(|d| **d > BigInt::one())
            .cloned()
            .collect();
        let cyclic_text = if cyclic.is_empty() {
            "no cyclic factors".to_string()
        } else {
            format!(
                "cyclic factors of orders {}",
                cyclic
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        };
        let dual_description = format!(
            "ideals over this quasi-orbit form a torus of dimension {rank}; \
             ambient angles are identified modulo an annihilator of free rank {free} with {cyclic_text}"
        );
        entries.push(CatalogueEntry {
            quasi_orbit: sys.name(profile.quasi_orbit).to_string(),
            orbit: profile.orbit.iter().map(|&p| sys.name(p).to_string()).collect(),
            h: profile.h.clone(),
            smith,
            y: profile.y.iter().map(|&p| sys.name(p).to_string()).collect(),
            dual_torus_rank: rank,
            annihilator_free_rank: free,
            annihilator_cyclic: cyclic,
            dual_description,
        });
    }
    entries.sort_by(|a, b| a.quasi_orbit.cmp(&b.quasi_orbit));
    Ok(entries)
}

/// What kind of separation a witness certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// The quasi-orbits differ: a diagonal indicator supported on the
    /// first orbit closure is invisible to the second representation.
    DisjointClosure,
    /// Same quasi-orbit, different characters: a two-term isotropy
    /// combination tuned to vanish in the second representation.
    CharacterMismatch,
}

/// A function certifying that two labels name different ideals: the second
/// representation sends it to zero, the first does not.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatingWitness {
    pub function: CcFunction,
    pub kind: WitnessKind,
    /// Operator norm under the second (killing) representation.
    pub killed_norm: f64,
    /// Operator norm under the first (surviving) representation.
    pub surviving_norm: f64,
}

/// Produce and numerically verify a separating witness for two
/// inequivalent labels. The witness always lies in the kernel of the
/// second label's representation and outside the kernel of the first's.
pub fn separating_witness(
    sys: &FiniteSystem,
    x: usize,
    theta: &RationalAngle,
    y: usize,
    omega: &RationalAngle,
    tolerance: f64,
) -> Result<SeparatingWitness, PrimcatError> {
    let verdict = equivalent(sys, x, theta, y, omega)?;
    if verdict.equivalent {
        return Err(PrimcatError::NotSeparable {
            first: classify(sys, x, theta)?.to_string(),
            second: classify(sys, y, omega)?.to_string(),
        });
    }
    let px = periodicity::profile(sys, x)?;
    let py = periodicity::profile(sys, y)?;
    let (function, kind) = if px.quasi_orbit != py.quasi_orbit {
        (CcFunction::unit_indicator(sys, x)?, WitnessKind::DisjointClosure)
    } else {
        // Same orbit: pick the first basis row n of H the angle difference
        // does not annihilate, and cancel the two phases at omega exactly.
        let diff = omega.sub(theta);
        let row = px
            .h
            .basis()
            .iter()
            .find(|row| !diff.dot(row).is_integer())
            .expect("inequivalent labels over one quasi-orbit differ on some basis row");
        let n: Vec<i64> = row
            .iter()
            .map(|b| i64::try_from(b).expect("small basis entry"))
            .collect();
        let w = Complex64::from_polar(
            1.0,
            std::f64::consts::TAU
                * {
                    let q = omega.dot_i64(&n);
                    let frac = &q - q.floor();
                    num_traits::ToPrimitive::to_f64(&frac).expect("unit-interval rational")
                },
        );
        let f = CcFunction::unit_indicator(sys, x)?
            .scale(w)
            .sub(&CcFunction::indicator(sys, x, n, x)?);
        (f, WitnessKind::CharacterMismatch)
    };
    let killed_norm = repr::pi_matrix(sys, y, omega, &function)?.spectral_norm();
    let surviving_norm = repr::pi_matrix(sys, x, theta, &function)?.spectral_norm();
    if killed_norm > tolerance || surviving_norm <= tolerance {
        return Err(PrimcatError::WitnessVerificationFailed {
            killed_norm,
            surviving_norm,
        });
    }
    Ok(SeparatingWitness {
        function,
        kind,
        killed_norm,
        surviving_norm,
    })
}

/// Topology verdict for the slice of the ideal space over one component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologyVerdict {
    /// The slice is the product of the orbit-closure space with the
    /// character torus of the common displacement group.
    ProductOfOrbitAndTorus { dual_torus_rank: usize },
    /// The displacement group is not constant across the closures inside
    /// this component, so the product description does not apply.
    NotDetermined { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentTopology {
    pub representative: String,
    pub verdict: TopologyVerdict,
}

/// Per-component topology report for the primitive-ideal space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyReport {
    pub components: Vec<ComponentTopology>,
}

/// Describe the relative topology on the ideals over each irreducible
/// component: when every orbit closure inside the component carries the
/// same displacement group, that slice is a product of the closure space
/// with the dual torus. For a finite discrete system the closures inside a
/// component reduce to the component itself, so the product form is
/// checked, not assumed.
pub fn jacobson_topology(sys: &FiniteSystem) -> Result<TopologyReport, PrimcatError> {
    let mut components = Vec::new();
    for profile in periodicity::profiles(sys)?.values() {
        let mut verdict = TopologyVerdict::ProductOfOrbitAndTorus {
            dual_torus_rank: profile.h.rank(),
        };
        for &z in &profile.orbit {
            let hz = periodicity::profile(sys, z)?.h;
            if hz != profile.h {
                verdict = TopologyVerdict::NotDetermined {
                    reason: format!(
                        "point {} carries displacement group of rank {} inside a component of rank {}",
                        sys.name(z),
                        hz.rank(),
                        profile.h.rank()
                    ),
                };
                break;
            }
        }
        components.push(ComponentTopology {
            representative: sys.name(profile.quasi_orbit).to_string(),
            verdict,
        });
    }
    components.sort_by(|a, b| a.representative.cmp(&b.representative));
    Ok(TopologyReport { components })
}

/// Containment order between the parts of two representation kernels that
/// are visible to the commutative coordinate algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelOrderVerdict {
    Equal,
    FirstContainedInSecond,
    SecondContainedInFirst,
    Incomparable,
}

/// Compare ker π_{x,θ} and ker π_{y,ω} after intersecting with the
/// coordinate algebra of the point set. A coordinate function is killed by
/// π_{x,θ} exactly when it vanishes on the orbit closure of x, so the
/// containment reverses orbit-closure containment and the angles play no
/// role.
pub fn c0_kernel_order(
    sys: &FiniteSystem,
    x: usize,
    _theta: &RationalAngle,
    y: usize,
    _omega: &RationalAngle,
) -> Result<KernelOrderVerdict, PrimcatError> {
    let cx = sys.orbit(x)?;
    let cy = sys.orbit(y)?;
    let first_in_second = cy.iter().all(|p| cx.contains(p));
    let second_in_first = cx.iter().all(|p| cy.contains(p));
    Ok(match (first_in_second, second_in_first) {
        (true, true) => KernelOrderVerdict::Equal,
        (true, false) => KernelOrderVerdict::FirstContainedInSecond,
        (false, true) => KernelOrderVerdict::SecondContainedInFirst,
        (false, false) => KernelOrderVerdict::Incomparable,
    })
}
