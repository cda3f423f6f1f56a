//! Small dense least-squares solves.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value cutoff below which a system is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-12;

fn svd_rank(sv: &DVector<f64>) -> usize {
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > RANK_TOL * max).count()
}

/// Moore-Penrose pseudo-inverse of a full-column-rank matrix.
///
/// Singular values decide the rank; the inverse itself comes from a
/// Householder QR, since nalgebra's SVD vectors lose several digits on the
/// moderately conditioned (cond ~ 1e4) designs of the boundary stencils.
pub fn pinv(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let cols = a.ncols();
    let rank = if a.nrows() < cols {
        a.nrows()
    } else {
        svd_rank(&a.clone().singular_values())
    };
    if rank < cols {
        return Err(Error::RankDeficient { rank, cols });
    }
    let qr = a.clone().qr();
    let r_inv = qr
        .r()
        .solve_upper_triangular(&DMatrix::identity(cols, cols))
        .ok_or(Error::RankDeficient {
            rank: cols - 1,
            cols,
        })?;
    Ok(r_inv * qr.q().transpose())
}

/// Least-squares solution of `a x = b`; `a` must have full column rank.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(pinv(a)? * b)
}

/// Solves a square system, reporting rank deficiency as a singular Vandermonde error.
pub fn solve_square(a: &DMatrix<f64>, b: &DVector<f64>, what: &str) -> Result<DVector<f64>> {
    debug_assert_eq!(a.nrows(), a.ncols());
    let singular = || Error::SingularVandermonde(what.to_string());
    if svd_rank(&a.clone().singular_values()) < a.ncols() {
        return Err(singular());
    }
    a.clone().lu().solve(b).ok_or_else(singular)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_is_a_left_inverse_on_a_stencil_like_design() {
        // Degree-5 monomials on a 2h lattice in a half disk around an
        // off-lattice centre: condition number in the thousands.
        let mut pts = Vec::new();
        for j in (-12..=12).step_by(2) {
            for i in (0..=12).step_by(2) {
                let (x, y) = (i as f64 + 0.2, j as f64 - 0.3);
                if x * x + y * y <= 144.0 {
                    pts.push((x / 12.0, y / 12.0));
                }
            }
        }
        let mons: Vec<(i32, i32)> = (0..=5)
            .flat_map(|t| (0..=t).map(move |b| (t - b, b)))
            .collect();
        let a = DMatrix::from_fn(pts.len(), mons.len(), |r, c| {
            pts[r].0.powi(mons[c].0) * pts[r].1.powi(mons[c].1)
        });
        let p = pinv(&a).unwrap();
        let err = (&p * &a - DMatrix::identity(mons.len(), mons.len()))
            .abs()
            .max();
        assert!(err < 1e-11, "{err:e}");
    }

    #[test]
    fn overdetermined_line_fit() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let b = DVector::from_vec(vec![1.0, 3.0, 5.0, 7.0]);
        let x = lstsq(&a, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(matches!(
            pinv(&a),
            Err(Error::RankDeficient { rank: 1, cols: 2 })
        ));
        let wide = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert!(matches!(
            pinv(&wide),
            Err(Error::RankDeficient { rank: 1, cols: 2 })
        ));
        let sq = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 1.0]);
        assert!(matches!(
            solve_square(&sq, &b, "t"),
            Err(Error::SingularVandermonde(_))
        ));
    }
}
