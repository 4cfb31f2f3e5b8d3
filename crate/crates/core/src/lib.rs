//! Differential forms on 3-manifolds with numerical checks of Cartan and
//! generalized Finsler structure equations.
//!
//! Coframes are built from symbolic expressions when possible, so exterior
//! derivatives are exact up to rounding; finite differences remain available
//! as an independent route.

// Negated comparisons make NaN fail every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod catalog;
pub mod constructions;
pub mod error;
pub mod expr;
pub mod forms;
pub mod groups;
pub mod sampling;
pub mod verify;

pub use analysis::{tol, StructureKind, StructureReport};
pub use catalog::{lookup, CatalogEntry, EntryKind};
pub use error::{Error, Result};
pub use expr::Expr;
pub use forms::{
    Chart, CoframeField, DerivativeMode, OneFormField, OneFormValue, Point3, ScalarField, ThreeFormValue,
    TwoFormValue,
};
pub use groups::{Quaternion, Sl2Matrix};
pub use sampling::SafeBox;
pub use verify::{run_verify, ModeArg, VerifyConfig, VerifyReport};
