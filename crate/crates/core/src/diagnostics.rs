//! Lebesgue ratios of near-boundary extrapolation, convergence-order fits,
//! measured boundary amplification and cascade samples of scaling functions.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ImmersedGrid;
use crate::wavelet1d::{iwt_line, EndClosure, LineClosure, WaveletSpec};
use crate::wavelet2d::CoefficientField;

/// Products beyond this order overflow `i128`.
pub const MAX_LEBESGUE_ORDER: usize = 20;
pub const MAX_REFINEMENTS: usize = 10;
/// Points within this many grid spacings of a control point count as near the boundary.
pub const NEAR_BOUNDARY: f64 = 3.0;

fn check_order(n: usize) -> Result<()> {
    if n < 2 || n % 2 == 1 || n > MAX_LEBESGUE_ORDER {
        return Err(Error::Config(format!(
            "order must be even and in 2..={MAX_LEBESGUE_ORDER}, got {n}"
        )));
    }
    Ok(())
}

/// `prod_{j=lo}^{hi} (1 - 2j)`.
fn odd_product(lo: i64, hi: i64) -> i128 {
    (lo..=hi).map(|j| (1 - 2 * j) as i128).product()
}

/// Interior error constant `|prod_{j=-N/2+1}^{N/2} (1-2j)|`.
fn interior_product(n: usize) -> i128 {
    let half = (n / 2) as i64;
    odd_product(1 - half, half).abs()
}

/// Extrapolated over interpolated error bound, exactly.
pub fn lebesgue_ratio_exact(n: usize) -> Result<Ratio<i128>> {
    check_order(n)?;
    Ok(Ratio::new(
        odd_product(1, n as i64).abs(),
        interior_product(n),
    ))
}

/// Amplification of near-boundary detail bounds when the coarse values are
/// extrapolated without boundary data. Grows like `2^N`.
pub fn lebesgue_ratio(n: usize) -> Result<f64> {
    let r = lebesgue_ratio_exact(n)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

/// The same ratio when the boundary value, at `psi` fine spacings from the
/// nearest point, replaces one extrapolation node.
pub fn lebesgue_ratio_bc(n: usize, psi: f64) -> Result<f64> {
    check_order(n)?;
    if !(psi > 0.0 && psi <= 1.0) {
        return Err(Error::Config(format!("psi must lie in (0, 1], got {psi}")));
    }
    let r = Ratio::new(odd_product(1, n as i64 - 1).abs(), interior_product(n));
    Ok(psi * *r.numer() as f64 / *r.denom() as f64)
}

/// Log-log least-squares fit of `value ~ C h^slope`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceFit {
    pub pairs: Vec<(f64, f64)>,
    pub slope: f64,
    /// Natural log of `C`.
    pub intercept: f64,
    /// Root-mean-square residual in natural-log units.
    pub residual: f64,
}

impl ConvergenceFit {
    pub fn prefactor(&self) -> f64 {
        self.intercept.exp()
    }
}

/// Fits `value = C x^slope` through arbitrary positive samples.
pub fn loglog_fit(pairs: &[(f64, f64)]) -> Result<ConvergenceFit> {
    if pairs.len() < 3 {
        return Err(Error::TooFewSamples {
            found: pairs.len(),
            needed: 3,
        });
    }
    for &(x, v) in pairs {
        if !(v > 0.0) {
            return Err(Error::NonPositiveValue(v));
        }
        if !(x > 0.0) {
            return Err(Error::NonPositiveValue(x));
        }
    }
    let m = pairs.len() as f64;
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("abscissae must not all coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(ConvergenceFit {
        pairs: pairs.to_vec(),
        slope,
        intercept,
        residual,
    })
}

/// Convergence order from `(h, value)` pairs on successively halved grids.
pub fn fit_order(pairs: &[(f64, f64)]) -> Result<ConvergenceFit> {
    for w in pairs.windows(2) {
        let ratio = (w[0].0 / w[1].0).log2();
        if !(ratio >= 1.0 - 1e-9 && (ratio - ratio.round()).abs() < 1e-9) {
            return Err(Error::Config(format!(
                "grid spacings must decrease by powers of two: {} then {}",
                w[0].0, w[1].0
            )));
        }
    }
    loglog_fit(pairs)
}

/// Largest detail near the boundary, away from it, and their ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Amplification {
    pub near: f64,
    pub interior: f64,
    pub ratio: f64,
}

/// Compares details within [`NEAR_BOUNDARY`] spacings of a control point of
/// the fine grid with the remaining ones.
pub fn boundary_amplification(coeffs: &CoefficientField, grid: &ImmersedGrid) -> Amplification {
    let dist = grid.boundary_distance();
    let n = grid.n();
    let near = coeffs
        .class_max_where(|i, j| dist[j * n + i] <= NEAR_BOUNDARY)
        .max();
    let interior = coeffs
        .class_max_where(|i, j| dist[j * n + i] > NEAR_BOUNDARY)
        .max();
    Amplification {
        near,
        interior,
        ratio: near / interior,
    }
}

/// Where the cascade starts.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalingContext {
    FreeSpace,
    /// Impulse on coarse point `node` of a line whose left end has the given
    /// closure. A Type II boundary keeps its offset relative to each level's grid.
    NearBoundary {
        closure: EndClosure,
        node: usize,
    },
}

/// Samples `(x, phi(x))` of a scaling function by repeated inverse transforms
/// of a unit impulse with all details zero. `x` is in units of the starting
/// grid spacing, with the impulse at 0.
pub fn scaling_function_samples(
    spec: WaveletSpec,
    refinements: usize,
    context: &ScalingContext,
) -> Result<Vec<[f64; 2]>> {
    if refinements > MAX_REFINEMENTS {
        return Err(Error::Config(format!(
            "at most {MAX_REFINEMENTS} refinements, got {refinements}"
        )));
    }
    let n = spec.n();
    match context {
        ScalingContext::FreeSpace => {
            let m = 4 * n;
            let mut line = vec![0.0; m];
            let origin = m / 2;
            line[origin] = 1.0;
            for _ in 0..refinements {
                let mut fine = vec![0.0; 2 * line.len()];
                for (c, v) in line.iter().enumerate() {
                    fine[2 * c] = *v;
                }
                iwt_line(&mut fine, 0, spec, &LineClosure::Periodic)?;
                line = fine;
            }
            let scale = (refinements as f64).exp2();
            let o = origin as f64 * scale;
            Ok(line
                .iter()
                .enumerate()
                .map(|(i, &v)| [(i as f64 - o) / scale, v])
                .collect())
        }
        ScalingContext::NearBoundary {
            closure: left,
            node,
        } => {
            let closure = LineClosure::Wide {
                left: left.clone(),
                right: EndClosure::TypeI,
            };
            let mut line = vec![0.0; 4 * n + node];
            line[*node] = 1.0;
            for _ in 0..refinements {
                let mut fine = vec![0.0; 2 * line.len() - 1];
                for (c, v) in line.iter().enumerate() {
                    fine[2 * c] = *v;
                }
                iwt_line(&mut fine, 0, spec, &closure)?;
                line = fine;
            }
            let scale = (refinements as f64).exp2();
            Ok(line
                .iter()
                .enumerate()
                .map(|(i, &v)| [i as f64 / scale - *node as f64, v])
                .collect())
        }
    }
}
