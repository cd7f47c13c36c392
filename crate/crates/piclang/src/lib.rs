pub mod automaton;
pub mod compilers;
pub mod error;
pub mod gen;
pub mod logic;
pub mod model_check;
pub mod normalize;
pub mod picture;
pub mod sat;
pub mod sorted;
pub mod tiling;

pub use error::{Error, Result};
