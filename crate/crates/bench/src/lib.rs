//! Shared setup for the criterion benches.

use immersed_wavelets::adaptation::compression_test_field;
use immersed_wavelets::geometry::{Geometry, ImmersedGrid};
use immersed_wavelets::stencil::StencilConfig;
use immersed_wavelets::wavelet2d::TransformPlan;
use immersed_wavelets::WaveletSpec;

/// The (6,2) plan on the star at `level` and the compression test field sampled on it.
pub fn star_setup(level: u32) -> (TransformPlan, Vec<f64>) {
    let spec = WaveletSpec::default();
    let grid = ImmersedGrid::new(&Geometry::star(), level, spec.n()).expect("star grid");
    let plan = TransformPlan::new(grid, spec, &StencilConfig::default()).expect("star plan");
    let field = plan.grid().sample(compression_test_field);
    (plan, field)
}
