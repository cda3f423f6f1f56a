//! High-order interpolating wavelet transforms on immersed two-dimensional
//! domains, with temporal grid adaptation and a reference diffusion solver.

pub mod adaptation;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod solver;
pub mod stencil;
pub mod wavelet1d;
pub mod wavelet2d;

pub use error::{Error, Result};
pub use geometry::{
    Axis, ControlPoint, Geometry, GridHierarchy, ImmersedGrid, Interval, IntervalClass, LevelSet,
};
pub use wavelet1d::{LineClosure, WaveletSpec};
