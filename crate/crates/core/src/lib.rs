pub mod cli;
pub mod dfs;
pub mod freeness;
pub mod lower_bounds;
pub mod morphism;
pub mod msearch;
pub mod products;
pub mod rational;
pub mod words;

pub use freeness::FreenessSpec;
pub use morphism::UniformMorphism;
pub use rational::Rational;
pub use words::{ConjClass, Letter, Repetition, Word};
