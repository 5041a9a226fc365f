//! Integer-lattice arithmetic: row Hermite normal form, Smith invariants,
//! exact subgroup membership, and character arithmetic on the rational
//! points of the k-torus.
//!
//! A [`Lattice`] is a subgroup of Z^k. All arithmetic is arbitrary
//! precision; membership, coset reduction, and annihilator tests are exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("dimension mismatch: expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Convert a machine-integer vector into the arbitrary-precision form used
/// throughout this module.
pub fn vec_bigint(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// A subgroup of Z^k stored as a row Hermite normal form basis.
///
/// Invariants: rows are linearly independent, pivot columns strictly
/// increase, every pivot is positive, and entries above a pivot lie in
/// `[0, pivot)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lattice {
    k: usize,
    basis: Vec<Vec<BigInt>>,
}

/// Smith normal form data for the inclusion of a lattice in Z^k.
///
/// `factors` lists the invariant factors d_1 | d_2 | ... of the quotient
/// presentation (including any leading 1s); `free_rank` is k - rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithInvariants {
    pub factors: Vec<BigInt>,
    pub free_rank: usize,
}

/// Rational generators of the annihilator H^perp inside the k-torus.
///
/// Every rational point of H^perp is an integer combination of the torsion
/// angles plus arbitrary rational multiples of the free directions, mod 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnihilatorBasis {
    /// (angle, order): the angle generates a cyclic subgroup of H^perp of
    /// the given order.
    pub torsion: Vec<(RationalAngle, BigInt)>,
    /// Integer direction vectors; any rational multiple (mod 1) annihilates H.
    pub free: Vec<Vec<BigInt>>,
}

impl Lattice {
    /// Hermite normal form basis of the subgroup generated by `generators`.
    ///
    /// The empty list yields the zero lattice. Idempotent on bases already
    /// in HNF.
    pub fn hnf(k: usize, generators: &[Vec<BigInt>]) -> Result<Self, LatticeError> {
        let mut rows: Vec<Vec<BigInt>> = Vec::new();
        for g in generators {
            if g.len() != k {
                return Err(LatticeError::DimensionMismatch {
                    expected: k,
                    got: g.len(),
                });
            }
            if g.iter().any(|x| !x.is_zero()) {
                rows.push(g.clone());
            }
        }
        let mut fixed: Vec<Vec<BigInt>> = Vec::new();
        for col in 0..k {
            loop {
                let mut nz: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][col].is_zero()).collect();
                match nz.len() {
                    0 => break,
                    1 => {
                        let mut row = rows.swap_remove(nz[0]);
                        if row[col].is_negative() {
                            for x in row.iter_mut() {
                                *x = -std::mem::take(x);
                            }
                        }
                        fixed.push(row);
                        break;
                    }
                    _ => {
                        // Reduce everything at this column against the entry
                        // of smallest magnitude; the gcd shrinks each pass.
                        nz.sort_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()));
                        let p = nz[0];
                        for &i in &nz[1..] {
                            let q = rows[i][col].div_floor(&rows[p][col]);
                            for c in 0..k {
                                let sub = &q * &rows[p][c];
                                rows[i][c] -= sub;
                            }
                        }
                        rows.retain(|r| r.iter().any(|x| !x.is_zero()));
                    }
                }
            }
        }
        // Entries above each pivot reduced to least nonnegative residues.
        for j in 0..fixed.len() {
            let p = pivot_col(&fixed[j]);
            for i in 0..j {
                let q = fixed[i][p].div_floor(&fixed[j][p]);
                if !q.is_zero() {
                    for c in 0..k {
                        let sub = &q * &fixed[j][c];
                        fixed[i][c] -= sub;
                    }
                }
            }
        }
        Ok(Lattice { k, basis: fixed })
    }

    /// The zero subgroup of Z^k.
    pub fn zero(k: usize) -> Self {
        Lattice { k, basis: Vec::new() }
    }

    /// All of Z^k.
    pub fn full(k: usize) -> Self {
        let basis = (0..k)
            .map(|i| {
                let mut row = vec![BigInt::zero(); k];
                row[i] = BigInt::one();
                row
            })
            .collect();
        Lattice { k, basis }
    }

    /// Convenience constructor from machine integers.
    pub fn from_rows(k: usize, rows: &[&[i64]]) -> Result<Self, LatticeError> {
        let gens: Vec<Vec<BigInt>> = rows.iter().map(|r| vec_bigint(r)).collect();
        Self::hnf(k, &gens)
    }

    pub fn ambient(&self) -> usize {
        self.k
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    fn check_len(&self, len: usize) -> Result<(), LatticeError> {
        if len != self.k {
            return Err(LatticeError::DimensionMismatch {
                expected: self.k,
                got: len,
            });
        }
        Ok(())
    }

    /// Canonical coset representative of `g` modulo this lattice: reduce
    /// against the HNF rows so every pivot coordinate lands in `[0, pivot)`.
    pub fn reduce(&self, g: &[BigInt]) -> Result<Vec<BigInt>, LatticeError> {
        self.check_len(g.len())?;
        let mut v = g.to_vec();
        for row in &self.basis {
            let p = pivot_col(row);
            let q = v[p].div_floor(&row[p]);
            if !q.is_zero() {
                for c in 0..self.k {
                    let sub = &q * &row[c];
                    v[c] -= sub;
                }
            }
        }
        Ok(v)
    }

    /// Exact membership by back-substitution against the HNF rows.
    pub fn member(&self, g: &[BigInt]) -> Result<bool, LatticeError> {
        Ok(self.reduce(g)?.iter().all(|x| x.is_zero()))
    }

    /// Machine-integer convenience for [`Lattice::reduce`]. Panics if the
    /// canonical representative leaves machine range (it never does for the
    /// displacement scales this crate produces).
    pub fn reduce_i64(&self, g: &[i64]) -> Result<Vec<i64>, LatticeError> {
        let r = self.reduce(&vec_bigint(g))?;
        Ok(r.iter()
            .map(|x| i64::try_from(x).expect("canonical coset representative fits in i64"))
            .collect())
    }

    pub fn member_i64(&self, g: &[i64]) -> Result<bool, LatticeError> {
        self.member(&vec_bigint(g))
    }

    /// True iff e^{2 pi i theta} annihilates the whole lattice, i.e.
    /// theta . b is an integer for every basis row b.
    pub fn annihilator_member(&self, theta: &RationalAngle) -> Result<bool, LatticeError> {
        self.check_len(theta.len())?;
        Ok(self
            .basis
            .iter()
            .all(|row| theta.dot(row).is_integer()))
    }

    /// Restriction of the ambient character e^{2 pi i theta} to this
    /// lattice: one angle theta . b_j mod 1 per HNF basis row b_j.
    pub fn restrict_character(&self, theta: &RationalAngle) -> Result<CharacterLabel, LatticeError> {
        self.check_len(theta.len())?;
        let entries = self.basis.iter().map(|row| reduce_mod_one(theta.dot(row))).collect();
        Ok(CharacterLabel { entries })
    }

    /// Invariant factors d_1 | d_2 | ... of the inclusion in Z^k, plus the
    /// free rank k - rank of the quotient.
    pub fn smith_invariants(&self) -> SmithInvariants {
        let (diag, _) = smith(self.k, &self.basis);
        SmithInvariants {
            factors: diag,
            free_rank: self.k - self.basis.len(),
        }
    }

    /// Rational generators for the annihilator of this lattice in the
    /// k-torus, read off the Smith decomposition: with D = U B V, the angle
    /// (1/d_j) (column j of V) has order d_j in H^perp, and the columns of V
    /// beyond the rank span the free directions.
    pub fn annihilator_generators(&self) -> AnnihilatorBasis {
        let r = self.basis.len();
        let (diag, v) = smith(self.k, &self.basis);
        let mut torsion = Vec::new();
        for (j, d) in diag.iter().enumerate() {
            if d > &BigInt::one() {
                let angle: Vec<BigRational> = (0..self.k)
                    .map(|i| reduce_mod_one(BigRational::new(v[i][j].clone(), d.clone())))
                    .collect();
                torsion.push((RationalAngle::new(angle), d.clone()));
            }
        }
        let free = (r..self.k)
            .map(|j| (0..self.k).map(|i| v[i][j].clone()).collect())
            .collect();
        AnnihilatorBasis { torsion, free }
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.basis.is_empty() {
            return write!(f, "0");
        }
        let rows: Vec<String> = self
            .basis
            .iter()
            .map(|row| {
                let entries: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                format!("({})", entries.join(","))
            })
            .collect();
        write!(f, "{{{}}}", rows.join(", "))
    }
}

fn pivot_col(row: &[BigInt]) -> usize {
    row.iter()
        .position(|x| !x.is_zero())
        .expect("basis rows are nonzero")
}

/// Smith normal form of the r x k matrix `rows` (rows independent).
/// Returns the r invariant factors (d_1 | d_2 | ...) and the accumulated
/// k x k column transform V with U . rows . V diagonal.
fn smith(k: usize, rows: &[Vec<BigInt>]) -> (Vec<BigInt>, Vec<Vec<BigInt>>) {
    let r = rows.len();
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    let mut v: Vec<Vec<BigInt>> = (0..k)
        .map(|i| {
            let mut row = vec![BigInt::zero(); k];
            row[i] = BigInt::one();
            row
        })
        .collect();

    let swap_cols = |a: &mut Vec<Vec<BigInt>>, v: &mut Vec<Vec<BigInt>>, c1: usize, c2: usize| {
        for row in a.iter_mut() {
            row.swap(c1, c2);
        }
        for row in v.iter_mut() {
            row.swap(c1, c2);
        }
    };
    // col[dst] -= q * col[src]
    let add_col = |a: &mut Vec<Vec<BigInt>>, v: &mut Vec<Vec<BigInt>>, dst: usize, src: usize, q: &BigInt| {
        for row in a.iter_mut() {
            let sub = q * &row[src];
            row[dst] -= sub;
        }
        for row in v.iter_mut() {
            let sub = q * &row[src];
            row[dst] -= sub;
        }
    };

    let mut t = 0;
    while t < r {
        // Locate the smallest-magnitude nonzero entry of the trailing block.
        let mut best: Option<(usize, usize)> = None;
        for i in t..r {
            for j in t..k {
                if !a[i][j].is_zero()
                    && best
                        .map(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                        .unwrap_or(true)
                {
                    best = Some((i, j));
                }
            }
        }
        let (bi, bj) = best.expect("independent rows leave no zero block");
        a.swap(t, bi);
        if bj != t {
            swap_cols(&mut a, &mut v, t, bj);
        }

        let mut clean = false;
        while !clean {
            clean = true;
            for i in t + 1..r {
                if !a[i][t].is_zero() {
                    let q = a[i][t].div_floor(&a[t][t]);
                    for c in t..k {
                        let sub = &q * &a[t][c];
                        a[i][c] -= sub;
                    }
                    if !a[i][t].is_zero() {
                        a.swap(t, i);
                        clean = false;
                    }
                }
            }
            for j in t + 1..k {
                if !a[t][j].is_zero() {
                    let q = a[t][j].div_floor(&a[t][t]);
                    add_col(&mut a, &mut v, j, t, &q);
                    if !a[t][j].is_zero() {
                        swap_cols(&mut a, &mut v, t, j);
                        clean = false;
                    }
                }
            }
        }
        if a[t][t].is_negative() {
            for c in t..k {
                a[t][c] = -std::mem::take(&mut a[t][c]);
            }
        }
        // Divisibility fix-up: d_t must divide the trailing block.
        let mut fixed = true;
        'scan: for i in t + 1..r {
            for j in t + 1..k {
                if !(&a[i][j] % &a[t][t]).is_zero() {
                    for c in t..k {
                        let add = a[i][c].clone();
                        a[t][c] += add;
                    }
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if fixed {
            t += 1;
        }
    }
    let diag = (0..r).map(|i| a[i][i].clone()).collect();
    (diag, v)
}

fn reduce_mod_one(x: BigRational) -> BigRational {
    let f = x.floor();
    x - f
}

/// A rational point of the k-torus: k rationals in `[0, 1)` in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalAngle {
    entries: Vec<BigRational>,
}

impl RationalAngle {
    /// Wraps the entries into `[0, 1)`.
    pub fn new(entries: Vec<BigRational>) -> Self {
        RationalAngle {
            entries: entries.into_iter().map(reduce_mod_one).collect(),
        }
    }

    pub fn zero(k: usize) -> Self {
        RationalAngle {
            entries: vec![BigRational::zero(); k],
        }
    }

    /// Single-coordinate angle p/q.
    pub fn from_ratio(p: i64, q: i64) -> Self {
        RationalAngle::new(vec![BigRational::new(BigInt::from(p), BigInt::from(q))])
    }

    /// k-coordinate angle from (numerator, denominator) pairs.
    pub fn from_ratios(parts: &[(i64, i64)]) -> Self {
        RationalAngle::new(
            parts
                .iter()
                .map(|&(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|x| x.is_zero())
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn add(&self, other: &RationalAngle) -> RationalAngle {
        RationalAngle::new(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &RationalAngle) -> RationalAngle {
        RationalAngle::new(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Exact inner product with an integer vector.
    pub fn dot(&self, g: &[BigInt]) -> BigRational {
        self.entries
            .iter()
            .zip(g)
            .map(|(t, x)| t * BigRational::from(x.clone()))
            .sum()
    }

    pub fn dot_i64(&self, g: &[i64]) -> BigRational {
        self.dot(&vec_bigint(g))
    }

    /// Multiply every coordinate by an integer (mod 1).
    pub fn scale(&self, n: &BigInt) -> RationalAngle {
        let n = BigRational::from(n.clone());
        RationalAngle::new(self.entries.iter().map(|x| x * &n).collect())
    }
}

impl fmt::Display for RationalAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(ratio_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Canonical "p/q" rendering of a reduced rational.
pub fn ratio_string(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// A character of a lattice H, recorded as the angles theta . b_j mod 1
/// against the HNF basis rows of H. Equal labels correspond exactly to
/// ambient angles whose difference annihilates H.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CharacterLabel {
    entries: Vec<BigRational>,
}

impl CharacterLabel {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }
}

impl fmt::Display for CharacterLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(ratio_string).collect();
        write!(f, "({})", parts.join(","))
    }
}
