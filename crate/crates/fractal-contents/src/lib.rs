//! Geometric functionals of fractal and classical sets.
//!
//! The crate measures how the parallel neighborhoods `A_eps` of a compact
//! set grow as `eps` shrinks, through a hierarchy of quantities:
//!
//! * boundary-count and support-mass *basic functions* `beta_i(t)` and
//!   their variation analogues, with exact closed forms for a catalog of
//!   model sets ([`models`], [`strings`]);
//! * the Steiner-type coefficient algebra linking basic functions to the
//!   intrinsic-volume expansion of `A_eps` ([`steiner`]);
//! * scaling exponents, contents, and outer (box) dimension estimates
//!   fitted from sampled basic functions, plus zeta-function transforms
//!   ([`estimators`]);
//! * grid-based measurements (distance transforms, parallel volumes,
//!   boundary length, covering and packing counts) that cross-validate the
//!   closed forms ([`raster`]).
//!
//! Every quantity of consequence is computed by at least two independent
//! routes somewhere in the crate or its test suite; disagreements surface
//! as [`Error::InternalConsistency`] rather than silently propagating.

pub mod error;
pub mod estimators;
pub mod models;
pub mod raster;
pub mod steiner;
pub mod strings;

pub use error::{Error, Result};
pub use estimators::{
    assembled_zeta, basic_from_support, basic_zeta, content_envelope, default_grid,
    dimension_report, fit_exponent, minkowski_content_from_basic, raster_distance_zeta,
    sample_profile, samples_csv, support_masses, variation_bound_check, DimensionReport,
    FitDiagnostics, RasterPlan, ReportOptions, SampleGrid, ScalingReport, ScalingSamples,
    VariationBoundReport,
};
pub use models::{
    exact_tube_volume, generate_prefractal, scale_model, tube_volume_from_profiles,
    BasicFunctionProfile, Eval, Exactness, PrefractalEvents, SetModel,
};
pub use raster::{
    boundary_length, covering_packing_counts, distance_transform, footprint_mt, lens_area,
    parallel_volume, rasterize, rasterize_geometry, read_pgm, write_distance_raw, write_pgm,
    DistanceField, Footprint, GridSet, Segment,
};
pub use steiner::SteinerCoefficients;
pub use strings::{cantor_tube_fourier, FractalString, StringRule, ZetaValues};
