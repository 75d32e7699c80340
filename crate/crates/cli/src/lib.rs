//! Command-line front end for futgraph: an s-expression surface syntax,
//! the subcommand drivers and DOT output.

pub mod dot;
pub mod driver;
pub mod parse;
pub mod sexp;
