pub mod error;
pub mod linalg;
pub mod states;
pub mod instruments;
pub mod protocol;
pub mod equivalence;
pub mod experiments;
