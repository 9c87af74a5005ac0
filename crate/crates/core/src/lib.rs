//! Construction and numerical verification of Nijenhuis operator fields.
//!
//! The crate builds explicit operator fields `L` whose characteristic
//! polynomial coefficients are prescribed functions, and checks their
//! defining identities at sample points:
//!
//! * vanishing Nijenhuis torsion, via the coordinate formula and an
//!   independent Lie-bracket finite-difference oracle ([`torsion`]);
//! * recovery of the prescribed invariants from `det(t·Id − L)`
//!   ([`invariants`]);
//! * the conjugation identity `J·L = L̃·J` with the companion form `L̃`
//!   ([`construct`]);
//! * smoothness diagnostics, remainder PDE residuals and a parametric Morse
//!   reduction at points where `∂f/∂y` vanishes ([`singularity`]).
//!
//! Derivatives come from order-2 jets ([`jet`]) propagated through a small
//! expression language ([`expr`]).
//!
//! ```
//! use nijenhuis::construct::build_morse_canonical;
//! use nijenhuis::torsion::torsion_coordinate;
//!
//! let l = build_morse_canonical(3, 1.0).unwrap();
//! let n = torsion_coordinate(&l, &[0.3, -0.2, 0.7]).unwrap();
//! assert!(n.max_abs() < 1e-13);
//! ```

use thiserror::Error;

pub mod construct;
pub mod expr;
pub mod field;
pub mod invariants;
pub mod jet;
pub mod linalg;
pub mod report;
pub mod sampling;
pub mod singularity;
pub mod torsion;

pub use construct::SigmaFields;
pub use expr::{format_expr, parse, Expr};
pub use field::{operator_eval, FieldError, OperatorEval, OperatorField, ScalarField};
pub use jet::{Jet1, Jet2, JetError};
pub use linalg::Matrix;
pub use report::VerificationReport;
pub use sampling::BoxDomain;
pub use torsion::TorsionValue;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] expr::ParseError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("{what} requires n {requirement}, got n = {n}")]
    InvalidDimension {
        what: &'static str,
        requirement: &'static str,
        n: usize,
    },
    #[error("{0}")]
    InvalidInput(String),
    #[error("domain entirely singular: all {samples} sampled points rejected")]
    DomainSingular { samples: usize },
    #[error(transparent)]
    Morse(#[from] singularity::MorseError),
    #[error("characteristic polynomial: {0}")]
    CharPoly(String),
}

impl From<JetError> for Error {
    fn from(e: JetError) -> Self {
        Error::Field(FieldError::Jet(e))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/jets.md")]
    mod jets {}
    #[doc = include_str!("../../../book/src/expressions.md")]
    mod expressions {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/torsion.md")]
    mod torsion {}
    #[doc = include_str!("../../../book/src/invariants.md")]
    mod invariants {}
    #[doc = include_str!("../../../book/src/singularities.md")]
    mod singularities {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
