//! Decision procedures for satisfiability and finite satisfiability of the
//! two-variable fragment of first-order logic with counting quantifiers.

pub mod approximation;
pub mod counting_solver;
pub mod frames;
pub mod model_builder;
pub mod normal_form;
pub mod solver;
pub mod structures;
pub mod syntax;
pub mod types;
