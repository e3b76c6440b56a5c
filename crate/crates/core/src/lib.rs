//! Conditional statements as polynomial constraint systems over parametric
//! probability networks.

pub mod conditionals;
pub mod corpus;
pub mod deduction;
pub mod expr;
pub mod lower;
pub mod measures;
pub mod model;
pub mod optimizer;
pub mod parallel;
pub mod polynomial;
pub mod probnet;
pub mod proplogic;
pub mod rational;
pub mod runner;
