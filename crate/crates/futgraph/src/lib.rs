//! Graph types for futures over recursive data.
//!
//! Vertex structures name futures at the type level; graph types describe
//! the computation graphs a program may produce; normalization expands a
//! graph type into concrete graphs so an interpreter run can be checked
//! against its static description.

pub mod cgraph;
pub mod elaborate;
pub mod exprtype;
pub mod interp;
pub mod kindcheck;
pub mod normalize;
pub mod print;
pub mod syntax;
pub mod vstruct;

#[cfg(any(test, feature = "testgen"))]
pub mod testgen;
