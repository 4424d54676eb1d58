//! Lévy exponents, the white-noise characteristic functional and
//! Blumenthal–Getoor indices.

mod indices;
mod measure;
mod model;

pub use indices::{
    bisect_downward, bisect_upward, estimate_indices, estimate_indices_with, EvidenceCurve,
    IndexConvention, IndexEstimate, IndexPair, IndexSettings,
};
pub use measure::{indices_from_measure, make_index_pair_measure, LevyMeasure, LogArg, MeasureTerm, Side};
pub use model::{char_functional, eval_exponent, one_minus_cos_integral, JumpLaw, LevyModel};
