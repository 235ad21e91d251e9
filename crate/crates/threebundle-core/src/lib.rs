//! Ice-point six-vertex ensembles on three-bundle domains.
//!
//! The crate is `no_std` and only needs `alloc`. It covers domain geometry,
//! path ensembles and their conversions, Glauber dynamics with monotone
//! coupling-from-the-past, exhaustive enumeration, closed-form limit-shape
//! formulas and path statistics. File formats and the command line live in
//! the companion `threebundle` crate.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod ensemble;
pub mod error;
pub mod exact;
pub mod formulas;
pub mod geometry;
pub mod height;
pub mod sampler;

pub use ensemble::{domain_wall_boundary, BoundaryData, Path, PathEnsemble};
pub use error::{
    AnalysisError, EnsembleError, ExactError, FormulaError, GeometryError, SamplerError,
};
pub use geometry::{build_augmented, build_domain, Domain, LatticePoint, Quadrant};
