//! Exact-arithmetic toolkit for the primitive-ideal structure of
//! Deaconu–Renault groupoid C*-algebras of finite dynamical systems.
//!
//! Given finitely many commuting self-maps of a finite point set (or a
//! finite directed graph and its shift), the crate constructs the
//! associated groupoid, computes the periodicity invariants H(x) and Y(x)
//! per quasi-orbit with exact integer-lattice arithmetic, decides
//! equivalence of primitive-ideal labels, and certifies every asserted
//! equality or inequality numerically: a diagonal intertwiner between the
//! paired representations, or a separating element killed by exactly one
//! of them.

pub mod dynsys;
pub mod fixtures;
pub mod groupoid;
pub mod lattice;
pub mod pathspace;
pub mod periodicity;
pub mod primcat;
pub mod repr;
