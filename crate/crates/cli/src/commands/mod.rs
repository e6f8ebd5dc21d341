pub mod eval;
pub mod fit;
pub mod inspect;
pub mod normalize;
pub mod synth;
