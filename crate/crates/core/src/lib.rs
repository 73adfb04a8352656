pub mod diag;
pub mod earley;
pub mod tex;
pub mod lexicon;
pub mod math;
pub mod mathml;
pub mod pipeline;
