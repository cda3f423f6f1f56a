//! Half-elliptical least-squares stencils at control points.
//!
//! Around a control point `x_c` with unit normal `n` (pointing into the
//! domain) the stencil collects the even-even inside grid points with
//! `(x - x_c) . n >= 0` and distorted distance `d_c(x) <= 1`, where
//! `d_c^2 = xi^T Sigma xi` and
//! `Sigma = n n^T / (h r_n)^2 + (I - n n^T) / (h r_t)^2`.
//! A bivariate polynomial of total degree `N - 1` fitted to field values on
//! those points supplies boundary values and derivatives.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap, Axis, ImmersedGrid};
use crate::linalg::pinv;

/// Half-ellipse radii in grid units. `None` means the default `2N`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StencilConfig {
    pub rn: Option<f64>,
    pub rt: Option<f64>,
}

impl StencilConfig {
    pub fn radii(&self, order: usize) -> (f64, f64) {
        let d = 2.0 * order as f64;
        (self.rn.unwrap_or(d), self.rt.unwrap_or(d))
    }

    pub fn validate(&self) -> Result<()> {
        for r in [self.rn, self.rt].into_iter().flatten() {
            if !(r > 0.0) {
                return Err(Error::Config(format!(
                    "stencil radius must be positive, got {r}"
                )));
            }
        }
        Ok(())
    }
}

/// Dimension of the bivariate polynomial space of total degree `degree`.
pub fn basis_dim(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Exponents `(a, b)` of the monomials `x^a y^b`, ordered by total degree.
pub fn monomials(degree: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(basis_dim(degree));
    for total in 0..=degree {
        for b in 0..=total {
            out.push((total - b, b));
        }
    }
    out
}

fn minimal_image(d: f64) -> f64 {
    d - d.round()
}

/// Periodic displacement `x - c`.
pub(crate) fn displacement(x: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    [minimal_image(x[0] - c[0]), minimal_image(x[1] - c[1])]
}

/// Points of the half ellipse around `center`, as `(i, j)` grid indices in
/// row-major order. With `even_only` only points with both indices even are kept.
pub(crate) fn ellipse_points(
    center: [f64; 2],
    normal: [f64; 2],
    grid: &ImmersedGrid,
    rn: f64,
    rt: f64,
    even_only: bool,
) -> Vec<(usize, usize)> {
    let h = grid.h();
    let n = grid.n();
    let reach = rn.max(rt).ceil() as isize + 1;
    let ci = (center[0] / h).round() as isize;
    let cj = (center[1] / h).round() as isize;
    let (an, at) = (1.0 / (h * rn).powi(2), 1.0 / (h * rt).powi(2));
    let mut out = Vec::new();
    for dj in -reach..=reach {
        for di in -reach..=reach {
            let (i, j) = (wrap(ci + di, n), wrap(cj + dj, n));
            if even_only && (i % 2 == 1 || j % 2 == 1) {
                continue;
            }
            if !grid.is_inside(i, j) {
                continue;
            }
            let xi = displacement(grid.point(i, j), center);
            let along = xi[0] * normal[0] + xi[1] * normal[1];
            if along < 0.0 {
                continue;
            }
            let total = xi[0] * xi[0] + xi[1] * xi[1];
            let d2 = an * along * along + at * (total - along * along);
            if d2 <= 1.0 {
                out.push((i, j));
            }
        }
    }
    out.sort_by_key(|&(i, j)| (j, i));
    out.dedup();
    out
}

/// Even-even inside points of the half ellipse around a control point.
///
/// The radii are doubled once if fewer than `N(N+1)/2` points are found.
pub fn select_ellipse_points(
    center: [f64; 2],
    normal: [f64; 2],
    grid: &ImmersedGrid,
    rn: f64,
    rt: f64,
) -> Result<Vec<(usize, usize)>> {
    select_with_doubling(center, normal, grid, rn, rt, true).map(|(pts, _)| pts)
}

fn select_with_doubling(
    center: [f64; 2],
    normal: [f64; 2],
    grid: &ImmersedGrid,
    rn: f64,
    rt: f64,
    even_only: bool,
) -> Result<(Vec<(usize, usize)>, f64)> {
    let needed = basis_dim(grid.order() - 1);
    let pts = ellipse_points(center, normal, grid, rn, rt, even_only);
    if pts.len() >= needed {
        return Ok((pts, 1.0));
    }
    let pts = ellipse_points(center, normal, grid, 2.0 * rn, 2.0 * rt, even_only);
    if pts.len() >= needed {
        return Ok((pts, 2.0));
    }
    Err(Error::InsufficientStencilPoints {
        x: center[0],
        y: center[1],
        found: pts.len(),
        needed,
    })
}

/// Bivariate polynomial in local coordinates `(x - center) / scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly2 {
    pub degree: usize,
    pub center: [f64; 2],
    pub scale: f64,
    /// Coefficients in the order of [`monomials`].
    pub coef: Vec<f64>,
}

impl Poly2 {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.derivative(x, Axis::X, 0)
    }

    /// `d^n p / dx^n` (or `dy^n`) in physical units.
    pub fn derivative(&self, x: [f64; 2], axis: Axis, n: usize) -> f64 {
        let d = displacement(x, self.center);
        let (u, v) = (d[0] / self.scale, d[1] / self.scale);
        let mut sum = 0.0;
        for (&(a, b), &c) in monomials(self.degree).iter().zip(&self.coef) {
            let (p, q, other) = match axis {
                Axis::X => (a, u, v.powi(b as i32)),
                Axis::Y => (b, v, u.powi(a as i32)),
            };
            if p < n {
                continue;
            }
            let falling: f64 = ((p - n + 1)..=p).map(|k| k as f64).product();
            sum += c * falling * q.powi((p - n) as i32) * other;
        }
        sum / self.scale.powi(n as i32)
    }
}

fn design_matrix(points: &[[f64; 2]], center: [f64; 2], scale: f64, degree: usize) -> DMatrix<f64> {
    let mons = monomials(degree);
    let mut a = DMatrix::zeros(points.len(), mons.len());
    for (r, p) in points.iter().enumerate() {
        let d = displacement(*p, center);
        let (u, v) = (d[0] / scale, d[1] / scale);
        for (c, &(ea, eb)) in mons.iter().enumerate() {
            a[(r, c)] = u.powi(ea as i32) * v.powi(eb as i32);
        }
    }
    a
}

/// Unweighted least-squares fit of a total-degree `degree` polynomial.
pub fn lsq_fit(
    points: &[[f64; 2]],
    values: &[f64],
    degree: usize,
    center: [f64; 2],
    scale: f64,
) -> Result<Poly2> {
    assert_eq!(points.len(), values.len());
    let a = design_matrix(points, center, scale, degree);
    let coef = pinv(&a)? * DVector::from_column_slice(values);
    Ok(Poly2 {
        degree,
        center,
        scale,
        coef: coef.iter().cloned().collect(),
    })
}

/// `d^n p / dx^n` of a fitted polynomial.
pub fn eval_x_derivative(poly: &Poly2, x: [f64; 2], n: usize) -> f64 {
    poly.derivative(x, Axis::X, n)
}

/// A half-ellipse stencil with its least-squares operator precomputed, so
/// boundary derivatives become fixed linear combinations of grid values.
#[derive(Clone, Debug)]
pub struct BoundaryStencil {
    pub center: [f64; 2],
    pub normal: [f64; 2],
    pub rn: f64,
    pub rt: f64,
    pub points: Vec<(usize, usize)>,
    pub degree: usize,
    scale: f64,
    /// Rows map point values to monomial coefficients.
    pinv: DMatrix<f64>,
}

impl BoundaryStencil {
    pub fn build(
        center: [f64; 2],
        normal: [f64; 2],
        grid: &ImmersedGrid,
        rn: f64,
        rt: f64,
    ) -> Result<Self> {
        let needed = basis_dim(grid.order() - 1);
        let degree = grid.order() - 1;
        let mut last = None;
        // Enough points can still be degenerate (e.g. all on two grid lines),
        // so a rank-deficient fit also triggers the doubled ellipse.
        for factor in [1.0, 2.0] {
            let (rn, rt) = (rn * factor, rt * factor);
            let points = ellipse_points(center, normal, grid, rn, rt, true);
            if points.len() < needed {
                last = Some(Error::InsufficientStencilPoints {
                    x: center[0],
                    y: center[1],
                    found: points.len(),
                    needed,
                });
                continue;
            }
            // Scaling by the stencil extent keeps the monomial columns O(1).
            let scale = grid.h() * rn.max(rt);
            let pos: Vec<[f64; 2]> = points.iter().map(|&(i, j)| grid.point(i, j)).collect();
            match pinv(&design_matrix(&pos, center, scale, degree)) {
                Ok(pinv) => {
                    return Ok(BoundaryStencil {
                        center,
                        normal,
                        rn,
                        rt,
                        points,
                        degree,
                        scale,
                        pinv,
                    })
                }
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    pub fn fit(&self, values: &[f64]) -> Poly2 {
        let coef = &self.pinv * DVector::from_column_slice(values);
        Poly2 {
            degree: self.degree,
            center: self.center,
            scale: self.scale,
            coef: coef.iter().cloned().collect(),
        }
    }

    /// Fits the stencil to a full row-major grid field.
    pub fn fit_field(&self, field: &[f64], n: usize) -> Poly2 {
        let vals: Vec<f64> = self.points.iter().map(|&(i, j)| field[j * n + i]).collect();
        self.fit(&vals)
    }

    /// Weights `w` with `d^k p / d axis^k (x_c) = sum_i w_i f_i` in physical units.
    pub fn derivative_weights(&self, axis: Axis, k: usize) -> Vec<f64> {
        let target = match axis {
            Axis::X => (k, 0),
            Axis::Y => (0, k),
        };
        let row = monomials(self.degree)
            .iter()
            .position(|&m| m == target)
            .expect("derivative order exceeds the fit degree");
        let fact: f64 = (1..=k).map(|v| v as f64).product();
        let s = fact / self.scale.powi(k as i32);
        self.pinv.row(row).iter().map(|w| w * s).collect()
    }
}
