//! Numerical laboratory for norm attainment on finite-dimensional `ℓ_p` spaces.

pub mod attainment;
pub mod convexity;
pub mod error;
pub mod matrix;
pub mod normcomp;
pub mod operators;
pub mod repro;
mod search;
pub mod spaces;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use spaces::{
    dual_exponent, pnorm, sphere_point_2d, sphere_sample, Exponent, FnNorm, NormEvaluator,
    NormShape, SequenceSpace, UnitVector,
};
pub use attainment::{
    dist_to_set, na_set, sbpb_profile, sbpb_profile_with, sbpb_witness, AttainmentSet, ProfileOptions,
    SbpbProfile, SubspaceSphere,
};
pub use convexity::{
    auerbach_2d, delta_closed_form, delta_numeric, kim_lee_check, AuerbachSystem, ConvexityModulus,
    KimLeeReport,
};
pub use normcomp::{
    objective_grad, opnorm, opnorm_multistart, opnorm_oracle, opnorm_with, NormMethod, NormOptions,
    NormResult,
};
pub use operators::{GalleryId, GalleryParams, GalleryTag, OperatorPQ};
pub use repro::{reproduce, run_all, ReproBundle, ReproReport};
