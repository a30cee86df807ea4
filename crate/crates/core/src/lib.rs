//! Polynomial-extension finite elements for two-subdomain elliptic interface
//! problems whose polygonal interface approximations do not match.
//!
//! Each subdomain is meshed independently with straight-edged triangles. Data
//! on the curved interface is imposed by evaluating the element polynomials
//! (their Taylor extension) at points of the exact curve, and the two
//! subdomains exchange Dirichlet and flux information through multipliers that
//! are pulled back from one discrete interface to the other.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] builds disk and annulus triangulations and refines them.
//! * [`geometry`] holds the exact circles and the polygon/circle maps.
//! * [`quadrature`], [`polynomial`] and [`fe_space`] provide Lagrange `P_k`
//!   spaces, trace spaces and lifting.
//! * [`extension`] evaluates the discrete Taylor extension operators.
//! * [`problem`] stores problem data and the manufactured test case.
//! * [`assembly`] and [`solver`] build and solve the coupled four-field system.
//! * [`error_analysis`] and [`harness`] run convergence studies.

// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod error;
pub mod error_analysis;
pub mod extension;
pub mod fe_space;
pub mod geometry;
pub mod harness;
pub mod mesh;
pub mod polynomial;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};

/// Points and vectors in the plane.
pub type Point = nalgebra::Point2<f64>;
pub type Vector = nalgebra::Vector2<f64>;

/// Identifies one of the two subdomains: `One` is the disk, `Two` the annulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::One, Side::Two];

    pub fn index(self) -> usize {
        match self {
            Side::One => 0,
            Side::Two => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::One => write!(f, "1"),
            Side::Two => write!(f, "2"),
        }
    }
}
