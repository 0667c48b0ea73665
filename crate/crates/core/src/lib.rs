//! Fractional Sobolev, Besov, Hölder and BMO norms on sampled periodic
//! functions, together with the machinery to test interpolation
//! inequalities between them numerically.

pub mod calibration;
pub mod corpus;
pub mod error;
pub mod exponent;
pub mod grid;
pub mod inequalities;
pub mod lpdecomp;
pub mod norms;
pub mod pointwise;
pub mod reduce;
pub mod rng;
pub mod spectral;
pub mod studies;
pub mod suite;

pub use corpus::{dilate, generate, lp_norm, CorpusEntry, CorpusFile, GeneratorSpec, SampledFunction};
pub use error::{Error, Result};
pub use grid::{make_grid, Grid};
pub use inequalities::{derive_exponents, evaluate, CaseId, EvalContext, InequalityCase, RatioRecord};
pub use lpdecomp::{band, build_filter_bank, build_mollifiers, mollify, verify_moments, FilterBank, MollifierFamily};
