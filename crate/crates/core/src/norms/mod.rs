//! Operator matrices and `L^p_X` norm estimation.

pub mod experiment;
pub mod operator;
pub mod power;
pub mod space;

pub use experiment::{
    comparison_experiment, estimate_hp, estimate_mp_lower, estimate_sp, ComparisonConfig,
    ComparisonRow, MartingaleEstimate, SpaceKind,
};
pub use operator::{materialize, CircleHilbert, LinearMap, OperatorKind, OperatorMatrix};
pub use power::{norm_p_lower, PowerOptions, PowerResult};
pub use space::SpaceDescriptor;
