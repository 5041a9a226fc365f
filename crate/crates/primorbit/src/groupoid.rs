//! The Deaconu–Renault groupoid of a finite system: elements (x, g, y) with
//! T^m x = T^n y for some m - n = g, exact membership, composition, isotropy
//! subgroups, and the quotient by interior isotropy.

use crate::dynsys::{signed_parts, DynSysError, FiniteSystem, MultiIndex};
use crate::lattice::{Lattice, LatticeError};
use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupoidError {
    #[error(transparent)]
    System(#[from] DynSysError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("({range_point}, {displacement:?}, {source_point}) is not a groupoid element")]
    NotInGroupoid {
        range_point: String,
        displacement: Vec<i64>,
        source_point: String,
    },
    #[error("not composable: first factor has source {first_source}, second has range {second_range}")]
    NotComposable {
        first_source: String,
        second_range: String,
    },
    #[error("cannot combine classes reduced modulo different lattices")]
    LatticeMismatch,
}

/// A groupoid element (x, g, y): range point x, displacement g in Z^k,
/// source point y. Only constructible when membership holds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupoidElement {
    range: usize,
    displacement: Vec<i64>,
    source: usize,
}

impl GroupoidElement {
    pub fn new(
        sys: &FiniteSystem,
        range: usize,
        displacement: Vec<i64>,
        source: usize,
    ) -> Result<Self, GroupoidError> {
        if !contains(sys, range, &displacement, source)? {
            return Err(GroupoidError::NotInGroupoid {
                range_point: sys.name(range).to_string(),
                displacement,
                source_point: sys.name(source).to_string(),
            });
        }
        Ok(GroupoidElement {
            range,
            displacement,
            source,
        })
    }

    /// A unit (x, 0, x).
    pub fn unit(sys: &FiniteSystem, x: usize) -> Result<Self, GroupoidError> {
        sys.check_point(x)?;
        Ok(GroupoidElement {
            range: x,
            displacement: vec![0; sys.k()],
            source: x,
        })
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn displacement(&self) -> &[i64] {
        &self.displacement
    }

    /// The canonical cocycle c(x, g, y) = g.
    pub fn cocycle(&self) -> &[i64] {
        &self.displacement
    }

    pub fn is_isotropy(&self) -> bool {
        self.range == self.source
    }
}

/// Exact membership: (x, g, y) lies in the groupoid iff some pair
/// m - n = g has T^m x = T^n y. Writing m = g+ + p, n = g- + p reduces this
/// to reachability of the diagonal from (T^{g+} x, T^{g-} y) in the product
/// system under the k diagonal moves; breadth-first search over at most
/// |X|^2 states, no search bound to justify.
pub fn contains(sys: &FiniteSystem, x: usize, g: &[i64], y: usize) -> Result<bool, GroupoidError> {
    sys.check_point(x)?;
    sys.check_point(y)?;
    if g.len() != sys.k() {
        return Err(DynSysError::ArityMismatch {
            expected: sys.k(),
            got: g.len(),
        }
        .into());
    }
    let (plus, minus) = signed_parts(g);
    let u0 = sys.apply(&plus, x)?;
    let v0 = sys.apply(&minus, y)?;
    let n = sys.len();
    let mut seen = vec![false; n * n];
    let mut queue = VecDeque::from([(u0, v0)]);
    seen[u0 * n + v0] = true;
    while let Some((u, v)) = queue.pop_front() {
        if u == v {
            return Ok(true);
        }
        for i in 0..sys.k() {
            let next = (sys.step(i, u), sys.step(i, v));
            if !seen[next.0 * n + next.1] {
                seen[next.0 * n + next.1] = true;
                queue.push_back(next);
            }
        }
    }
    Ok(false)
}

/// (x, g, y)(y, h, z) = (x, g + h, z).
pub fn compose(
    sys: &FiniteSystem,
    first: &GroupoidElement,
    second: &GroupoidElement,
) -> Result<GroupoidElement, GroupoidError> {
    if first.source != second.range {
        return Err(GroupoidError::NotComposable {
            first_source: sys.name(first.source).to_string(),
            second_range: sys.name(second.range).to_string(),
        });
    }
    let g: Vec<i64> = first
        .displacement
        .iter()
        .zip(&second.displacement)
        .map(|(a, b)| a + b)
        .collect();
    GroupoidElement::new(sys, first.range, g, second.source)
}

/// (x, g, y)^{-1} = (y, -g, x). Membership of the inverse follows from
/// symmetry of the defining relation, so no revalidation is needed.
pub fn inverse(elem: &GroupoidElement) -> GroupoidElement {
    GroupoidElement {
        range: elem.source,
        displacement: elem.displacement.iter().map(|&e| -e).collect(),
        source: elem.range,
    }
}

/// The isotropy subgroup L_y = {g : (y, g, y) in G} as a lattice in HNF.
///
/// With per-coordinate eventual data (a, c) on the reachable set of y,
/// every witness pair (m, n) clamps into the box prod [0, a_i + c_i) at the
/// cost of shifting m - n by multiples of the c_i e_i, and each c_i e_i
/// itself lies in L_y; so the box differences together with {c_i e_i}
/// generate L_y.
pub fn isotropy_group(sys: &FiniteSystem, y: usize) -> Result<Lattice, GroupoidError> {
    sys.check_point(y)?;
    let k = sys.k();
    let ev = sys.eventual_data(y)?;
    let mut generators: Vec<Vec<num_bigint::BigInt>> = Vec::new();
    for i in 0..k {
        let mut row = vec![0i64; k];
        row[i] = ev.period[i] as i64;
        generators.push(crate::lattice::vec_bigint(&row));
    }
    let bound = ev.max_horizon().saturating_sub(1);
    let box_points: Vec<(MultiIndex, usize)> = MultiIndex::boxed(k, bound)
        .map(|m| {
            let img = sys.apply(&m, y).expect("point and arity are valid");
            (m, img)
        })
        .collect();
    for (m, im) in &box_points {
        for (n, in_) in &box_points {
            if im == in_ && m != n {
                generators.push(crate::lattice::vec_bigint(&m.sub_signed(n)));
            }
        }
    }
    Ok(Lattice::hnf(k, &generators)?)
}

/// A groupoid element with displacement reduced to the canonical coset
/// representative modulo an interior-isotropy lattice H. Carries its
/// lattice so that classes reduced against different lattices cannot be
/// combined silently.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuotientElement {
    range: usize,
    class: Vec<i64>,
    source: usize,
    lattice: Lattice,
}

impl QuotientElement {
    pub fn range(&self) -> usize {
        self.range
    }

    pub fn source(&self) -> usize {
        self.source
    }

    /// Canonical coset representative of the displacement class.
    pub fn class_representative(&self) -> &[i64] {
        &self.class
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn is_unit_class(&self) -> bool {
        self.range == self.source && self.class.iter().all(|&e| e == 0)
    }
}

/// Reduce an element modulo H. H must be the interior-isotropy lattice of
/// the element's quasi-orbit for the quotient to be the one studied here,
/// but any subgroup of the isotropy yields a well-defined reduction.
pub fn quotient_element(
    _sys: &FiniteSystem,
    elem: &GroupoidElement,
    h: &Lattice,
) -> Result<QuotientElement, GroupoidError> {
    Ok(QuotientElement {
        range: elem.range,
        class: h.reduce_i64(&elem.displacement)?,
        source: elem.source,
        lattice: h.clone(),
    })
}

/// [γ][η] = [γη]: compose on canonical representatives, then re-reduce.
/// Well defined because the reduction map is constant on cosets.
pub fn quotient_compose(
    sys: &FiniteSystem,
    first: &QuotientElement,
    second: &QuotientElement,
) -> Result<QuotientElement, GroupoidError> {
    if first.lattice != second.lattice {
        return Err(GroupoidError::LatticeMismatch);
    }
    if first.source != second.range {
        return Err(GroupoidError::NotComposable {
            first_source: sys.name(first.source).to_string(),
            second_range: sys.name(second.range).to_string(),
        });
    }
    let g: Vec<i64> = first
        .class
        .iter()
        .zip(&second.class)
        .map(|(a, b)| a + b)
        .collect();
    Ok(QuotientElement {
        range: first.range,
        class: first.lattice.reduce_i64(&g)?,
        source: second.source,
        lattice: first.lattice.clone(),
    })
}

pub fn quotient_inverse(
    _sys: &FiniteSystem,
    elem: &QuotientElement,
) -> Result<QuotientElement, GroupoidError> {
    let neg: Vec<i64> = elem.class.iter().map(|&e| -e).collect();
    Ok(QuotientElement {
        range: elem.source,
        class: elem.lattice.reduce_i64(&neg)?,
        source: elem.range,
        lattice: elem.lattice.clone(),
    })
}

/// Whether the quotient groupoid restricted to Y has trivial isotropy at
/// every point: L_y = H for all y in Y. On a finite discrete space this is
/// exactly topological principality of the quotient.
pub fn quotient_isotropy_is_trivial(
    sys: &FiniteSystem,
    y_set: &[usize],
    h: &Lattice,
) -> Result<bool, GroupoidError> {
    for &y in y_set {
        if &isotropy_group(sys, y)? != h {
            return Ok(false);
        }
    }
    Ok(true)
}
