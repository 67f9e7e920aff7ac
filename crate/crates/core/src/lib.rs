pub mod convex;
pub mod error;
pub mod game;
pub mod linalg;
pub mod lp;
pub mod simplex_grid;
pub mod transport;
pub mod approach_full;
pub mod approach_partial;
pub mod condition;
pub mod informative;
pub mod displacement;
pub mod harness;
