//! Template enumeration, parameterized circuits, and multi-start optimization.

pub mod circuit;
pub mod engine;
pub mod optimizer;
pub mod template;
pub mod verify;
