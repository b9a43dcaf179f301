pub mod cache;
pub mod catalog;
pub mod cli;
pub mod diffop;
pub mod elliptic;
pub mod expr;
pub mod grading;
pub mod linalg;
pub mod numeric;
pub mod pipeline;
pub mod random;
pub mod relations;
pub mod scalars;
pub mod selftest;
