//! Lifted interpolating wavelets on one grid line.
//!
//! Values live in place: after a forward transform, entries with an even
//! global index hold scaling coefficients and entries with an odd global index
//! hold details. Lines that end at an immersed boundary get `N/2` ghost
//! scaling coefficients per end from one of the closures in [`LineClosure`].

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_square;

const DUAL_2: [f64; 2] = [0.5, 0.5];
const DUAL_4: [f64; 4] = [-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0];
const DUAL_6: [f64; 6] = [
    3.0 / 256.0,
    -25.0 / 256.0,
    75.0 / 128.0,
    75.0 / 128.0,
    -25.0 / 256.0,
    3.0 / 256.0,
];
const PRIMAL_2: [f64; 2] = [0.25, 0.25];

/// Distances below this (in coarse grid units) make Type II nodes coincide.
const MIN_NODE_GAP: f64 = 1e-6;

/// Wavelet order pair `(N, Ntilde)`: interpolation order and lifting order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct WaveletSpec {
    n: usize,
    n_tilde: usize,
}

impl WaveletSpec {
    pub fn new(n: usize, n_tilde: usize) -> Result<Self> {
        if !matches!(n, 2 | 4 | 6) {
            return Err(Error::Config(format!(
                "wavelet order N must be 2, 4 or 6, got {n}"
            )));
        }
        if !matches!(n_tilde, 0 | 2) {
            return Err(Error::Config(format!(
                "lifting order must be 0 or 2, got {n_tilde}"
            )));
        }
        Ok(WaveletSpec { n, n_tilde })
    }

    /// All supported order pairs.
    pub fn all() -> Vec<WaveletSpec> {
        let mut v = Vec::new();
        for n in [2, 4, 6] {
            for nt in [0, 2] {
                v.push(WaveletSpec { n, n_tilde: nt });
            }
        }
        v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_tilde(&self) -> usize {
        self.n_tilde
    }

    /// Ghost points per end, `N/2`.
    pub fn half(&self) -> usize {
        self.n / 2
    }

    /// Prediction filter, applied to the `N` coarse neighbours of an odd point.
    pub fn dual_taps(&self) -> &'static [f64] {
        dual_taps(self.n)
    }

    /// Update filter; empty for the non-lifted case.
    pub fn primal_taps(&self) -> &'static [f64] {
        match self.n_tilde {
            2 => &PRIMAL_2,
            _ => &[],
        }
    }
}

pub(crate) fn dual_taps(n: usize) -> &'static [f64] {
    match n {
        2 => &DUAL_2,
        4 => &DUAL_4,
        6 => &DUAL_6,
        _ => panic!("unsupported wavelet order {n}"),
    }
}

impl Default for WaveletSpec {
    fn default() -> Self {
        WaveletSpec { n: 6, n_tilde: 2 }
    }
}

impl fmt::Display for WaveletSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.n, self.n_tilde)
    }
}

impl FromStr for WaveletSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("wavelet must look like `6.2`, got `{s}`"));
        let (a, b) = s.split_once(['.', ',']).ok_or_else(bad)?;
        let n = a.trim().parse().map_err(|_| bad())?;
        let nt = b.trim().parse().map_err(|_| bad())?;
        WaveletSpec::new(n, nt)
    }
}

impl TryFrom<String> for WaveletSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<WaveletSpec> for String {
    fn from(w: WaveletSpec) -> String {
        w.to_string()
    }
}

/// Closure of one end of a wide interval.
#[derive(Clone, Debug, PartialEq)]
pub enum EndClosure {
    /// Extrapolate from the `N` nearest coarse values.
    TypeI,
    /// Extrapolate from the boundary value and the `N - 1` nearest coarse values.
    /// `offset` is the distance from the nearest coarse point to the boundary,
    /// in coarse grid units.
    TypeII { value: f64, offset: f64 },
}

/// Boundary data at one end of a narrow interval, in local coarse units.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DerivativeData {
    /// Control-point location; the first inside coarse point sits at 0.
    pub position: f64,
    pub value: Option<f64>,
    /// `d^j q / du^j` for `j = 1, 2, ...` at the control point.
    pub derivatives: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LineClosure {
    Periodic,
    Wide {
        left: EndClosure,
        right: EndClosure,
    },
    Hermite {
        left: DerivativeData,
        right: DerivativeData,
    },
    /// Ghosts are zero; used on detail-carrying lines of the second pass.
    ZeroFill,
}

impl LineClosure {
    pub fn type1() -> Self {
        LineClosure::Wide {
            left: EndClosure::TypeI,
            right: EndClosure::TypeI,
        }
    }
}

/// Contiguous values of one interval together with the global index of the first entry.
#[derive(Clone, Debug, PartialEq)]
pub struct LineBuffer {
    pub values: Vec<f64>,
    pub offset: usize,
}

impl LineBuffer {
    pub fn new(values: Vec<f64>, offset: usize) -> Self {
        LineBuffer { values, offset }
    }

    pub fn fwt(&mut self, spec: WaveletSpec, closure: &LineClosure) -> Result<()> {
        fwt_line(&mut self.values, self.offset, spec, closure)
    }

    pub fn iwt(&mut self, spec: WaveletSpec, closure: &LineClosure) -> Result<()> {
        iwt_line(&mut self.values, self.offset, spec, closure)
    }
}

/// Value at `x` of the polynomial interpolating `(nodes, values)`.
pub(crate) fn lagrange_eval(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let mut sum = 0.0;
    for (i, (&xi, &vi)) in nodes.iter().zip(values).enumerate() {
        let mut w = 1.0;
        for (j, &xj) in nodes.iter().enumerate() {
            if j != i {
                w *= (x - xj) / (xi - xj);
            }
        }
        sum += w * vi;
    }
    sum
}

/// Type I ghosts: the degree `N-1` interpolant of `lambda_near` (ordered from
/// the boundary inward, at coarse positions `0, 1, ...`) evaluated at
/// `-1, -2, ..., -N/2`.
pub fn extrapolate_type1(lambda_near: &[f64], order: usize) -> Vec<f64> {
    assert!(lambda_near.len() >= order, "Type I needs N coarse values");
    let nodes: Vec<f64> = (0..order).map(|i| i as f64).collect();
    (1..=order / 2)
        .map(|g| lagrange_eval(&nodes, &lambda_near[..order], -(g as f64)))
        .collect()
}

/// Type II ghosts: interpolant through the boundary value at `-offset` and the
/// `N - 1` nearest coarse values at `0, 1, ...`, evaluated at `-1, ..., -N/2`.
pub fn extrapolate_type2(
    lambda_near: &[f64],
    boundary_value: f64,
    offset: f64,
    order: usize,
) -> Result<Vec<f64>> {
    assert!(
        lambda_near.len() >= order - 1,
        "Type II needs N-1 coarse values"
    );
    if !(offset > MIN_NODE_GAP) {
        return Err(Error::SingularVandermonde(format!(
            "Type II boundary offset {offset} coincides with a coarse node"
        )));
    }
    let mut nodes = vec![-offset];
    let mut values = vec![boundary_value];
    for i in 0..order - 1 {
        nodes.push(i as f64);
        values.push(lambda_near[i]);
    }
    Ok((1..=order / 2)
        .map(|g| lagrange_eval(&nodes, &values, -(g as f64)))
        .collect())
}

/// Which boundary conditions a narrow-interval interpolant uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HermiteAllocation {
    pub left_value: bool,
    pub right_value: bool,
    pub left_derivatives: usize,
    pub right_derivatives: usize,
}

/// Splits the `N` conditions of a narrow interval with `k` inside values.
///
/// Boundary values are used where available (the caller only supplies them at
/// ends whose adjacent index is odd). If values alone overshoot `N`, the right
/// value is dropped first. The remaining derivatives are split evenly with any
/// odd one going to the left.
pub fn hermite_allocation(
    order: usize,
    k: usize,
    left_value: bool,
    right_value: bool,
) -> Result<HermiteAllocation> {
    if k > order {
        return Err(Error::SingularVandermonde(format!(
            "{k} inside values exceed the {order} conditions of the interpolant"
        )));
    }
    let mut lv = left_value;
    let mut rv = right_value;
    if k + lv as usize + rv as usize > order {
        rv = false;
    }
    if k + lv as usize + rv as usize > order {
        lv = false;
    }
    let d = order - k - lv as usize - rv as usize;
    Ok(HermiteAllocation {
        left_value: lv,
        right_value: rv,
        left_derivatives: d - d / 2,
        right_derivatives: d / 2,
    })
}

/// Ghosts for a narrow interval from a single Hermite-like interpolant `q` of
/// degree `N - 1`. `inside` holds the `k` coarse values at positions
/// `0..k`; returns (left ghosts at `-1, -2, ...`, right ghosts at `k, k+1, ...`).
pub fn extrapolate_hermite(
    inside: &[f64],
    left: &DerivativeData,
    right: &DerivativeData,
    order: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let coef = hermite_coefficients(inside, left, right, order)?;
    let k = inside.len();
    let x0 = 0.5 * (left.position + right.position);
    let eval = |x: f64| coef.iter().rev().fold(0.0, |acc, &c| acc * (x - x0) + c);
    let lg = (1..=order / 2).map(|g| eval(-(g as f64))).collect();
    let rg = (0..order / 2).map(|g| eval((k + g) as f64)).collect();
    Ok((lg, rg))
}

/// Monomial coefficients of `q` about the midpoint of the two control points.
fn hermite_coefficients(
    inside: &[f64],
    left: &DerivativeData,
    right: &DerivativeData,
    order: usize,
) -> Result<Vec<f64>> {
    let k = inside.len();
    let alloc = hermite_allocation(order, k, left.value.is_some(), right.value.is_some())?;
    if left.derivatives.len() < alloc.left_derivatives
        || right.derivatives.len() < alloc.right_derivatives
    {
        return Err(Error::InsufficientBoundaryData(format!(
            "narrow interval needs {} left and {} right derivatives",
            alloc.left_derivatives, alloc.right_derivatives
        )));
    }
    let x0 = 0.5 * (left.position + right.position);
    let mut a = DMatrix::zeros(order, order);
    let mut b = DVector::zeros(order);
    let mut row = 0;
    let mut add = |x: f64, deriv: usize, value: f64| {
        let u = x - x0;
        for p in deriv..order {
            let falling: f64 = ((p - deriv + 1)..=p).map(|v| v as f64).product();
            a[(row, p)] = falling * u.powi((p - deriv) as i32);
        }
        b[row] = value;
        row += 1;
    };
    for (i, &v) in inside.iter().enumerate() {
        add(i as f64, 0, v);
    }
    if alloc.left_value {
        add(left.position, 0, left.value.unwrap());
    }
    if alloc.right_value {
        add(right.position, 0, right.value.unwrap());
    }
    for j in 0..alloc.left_derivatives {
        add(left.position, j + 1, left.derivatives[j]);
    }
    for j in 0..alloc.right_derivatives {
        add(right.position, j + 1, right.derivatives[j]);
    }
    debug_assert_eq!(row, order);
    Ok(solve_square(&a, &b, "narrow-interval interpolant")?
        .iter()
        .cloned()
        .collect())
}

/// Number of scaling coefficients in a buffer of length `len` starting at a
/// global index with parity `p`.
#[inline]
fn coarse_count(len: usize, p: usize) -> usize {
    (len + 1 - p) / 2
}

/// Ghost values a closure assigns beyond the coarse values of a line:
/// `(left at coarse -1, -2, ..., right at coarse k, k + 1, ...)`.
pub fn line_ghosts(
    values: &[f64],
    offset: usize,
    spec: WaveletSpec,
    closure: &LineClosure,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = offset % 2;
    let k = coarse_count(values.len(), p);
    let coarse: Vec<f64> = (0..k).map(|c| values[p + 2 * c]).collect();
    closure_ghosts(&coarse, closure, spec)
}

fn closure_ghosts(
    coarse: &[f64],
    closure: &LineClosure,
    spec: WaveletSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = spec.n();
    match closure {
        LineClosure::ZeroFill => Ok((vec![0.0; n / 2], vec![0.0; n / 2])),
        LineClosure::Hermite { left, right } => extrapolate_hermite(coarse, left, right, n),
        LineClosure::Wide { left, right } => {
            if coarse.len() < n {
                return Err(Error::InsufficientPoints {
                    found: coarse.len(),
                    needed: n,
                });
            }
            let rev: Vec<f64> = coarse.iter().rev().cloned().collect();
            Ok((end_ghosts(coarse, left, n)?, end_ghosts(&rev, right, n)?))
        }
        LineClosure::Periodic => unreachable!("periodic lines have no ghosts"),
    }
}

fn end_ghosts(inward: &[f64], closure: &EndClosure, n: usize) -> Result<Vec<f64>> {
    match *closure {
        EndClosure::TypeI => Ok(extrapolate_type1(inward, n)),
        EndClosure::TypeII { value, offset } => extrapolate_type2(inward, value, offset, n),
    }
}

/// Forward transform of one line: predict then update.
pub fn fwt_line(
    values: &mut [f64],
    offset: usize,
    spec: WaveletSpec,
    closure: &LineClosure,
) -> Result<()> {
    predict_line(values, offset, spec, closure, false)?;
    update_line(values, offset, spec, closure, false);
    Ok(())
}

/// Inverse of [`fwt_line`] for the same closure.
pub fn iwt_line(
    values: &mut [f64],
    offset: usize,
    spec: WaveletSpec,
    closure: &LineClosure,
) -> Result<()> {
    update_line(values, offset, spec, closure, true);
    predict_line(values, offset, spec, closure, true)
}

/// Dual lifting: `gamma -= S~ lambda~` (or `+=` when `inverse`).
pub fn predict_line(
    values: &mut [f64],
    offset: usize,
    spec: WaveletSpec,
    closure: &LineClosure,
    inverse: bool,
) -> Result<()> {
    let taps = spec.dual_taps();
    let n = spec.n();
    let half = n / 2;
    let len = values.len();
    let sign = if inverse { -1.0 } else { 1.0 };

    if let LineClosure::Periodic = closure {
        assert!(
            offset % 2 == 0 && len % 2 == 0,
            "periodic lines start even and have even length"
        );
        let coarse: Vec<f64> = values.iter().step_by(2).cloned().collect();
        let m = coarse.len();
        for (c, odd) in values.iter_mut().skip(1).step_by(2).enumerate() {
            let mut pred = 0.0;
            for (t, &w) in taps.iter().enumerate() {
                let idx = (c + m + t + 1 - half) % m;
                pred += w * coarse[idx];
            }
            *odd -= sign * pred;
        }
        return Ok(());
    }

    if let LineClosure::Wide { .. } = closure {
        if len < 2 * n {
            return Err(Error::InsufficientPoints {
                found: len,
                needed: 2 * n,
            });
        }
    }
    let p = offset % 2;
    let k = coarse_count(len, p);
    let coarse: Vec<f64> = (0..k).map(|c| values[p + 2 * c]).collect();
    let (gl, gr) = closure_ghosts(&coarse, closure, spec)?;
    let mut ext = vec![0.0; k + n];
    for g in 0..half {
        ext[half - 1 - g] = gl[g];
        ext[half + k + g] = gr[g];
    }
    ext[half..half + k].copy_from_slice(&coarse);
    let mut r = 1 - p;
    while r < len {
        let base = (r + 1 - p) / 2;
        let pred: f64 = taps
            .iter()
            .zip(&ext[base..base + n])
            .map(|(w, v)| w * v)
            .sum();
        values[r] -= sign * pred;
        r += 2;
    }
    Ok(())
}

/// Primal lifting: `lambda += S gamma~` (or `-=` when `inverse`), with details
/// beyond the ends of a bounded line taken as zero.
pub fn update_line(
    values: &mut [f64],
    offset: usize,
    spec: WaveletSpec,
    closure: &LineClosure,
    inverse: bool,
) {
    let taps = spec.primal_taps();
    if taps.is_empty() {
        return;
    }
    let nt = taps.len();
    let len = values.len();
    let sign = if inverse { -1.0 } else { 1.0 };
    let periodic = matches!(closure, LineClosure::Periodic);
    let p = offset % 2;
    let mut r = p;
    while r < len {
        let mut upd = 0.0;
        for (t, &w) in taps.iter().enumerate() {
            // Detail at fine offset r + 1 + 2(t - Ntilde/2).
            let d = r as isize + 1 + 2 * (t as isize - (nt / 2) as isize);
            let v = if periodic {
                values[d.rem_euclid(len as isize) as usize]
            } else if d >= 0 && (d as usize) < len {
                values[d as usize]
            } else {
                0.0
            };
            upd += w * v;
        }
        values[r] += sign * upd;
        r += 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, nt: usize) -> WaveletSpec {
        WaveletSpec::new(n, nt).unwrap()
    }

    #[test]
    fn taps_sum_to_one_and_are_symmetric() {
        for n in [2, 4, 6] {
            let t = dual_taps(n);
            assert_eq!(t.len(), n);
            assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            for j in 0..n {
                assert_eq!(t[j], t[n - 1 - j]);
            }
        }
        assert_eq!(spec(4, 2).primal_taps(), &[0.25, 0.25]);
        assert!(spec(4, 0).primal_taps().is_empty());
    }

    #[test]
    fn parse_and_display() {
        let w: WaveletSpec = "6.2".parse().unwrap();
        assert_eq!(w, spec(6, 2));
        assert_eq!(w.to_string(), "6.2");
        assert!("5.2".parse::<WaveletSpec>().is_err());
        assert!("6".parse::<WaveletSpec>().is_err());
    }

    #[test]
    fn interior_prediction_is_exact_below_order() {
        for n in [2, 4, 6] {
            let taps = dual_taps(n);
            for m in 0..n as i32 {
                // Odd point at 0, coarse neighbours at odd offsets -(n-1)..(n-1).
                let pred: f64 = (0..n)
                    .map(|t| taps[t] * (2.0 * t as f64 - (n as f64 - 1.0)).powi(m))
                    .sum();
                let exact = if m == 0 { 1.0 } else { 0.0 };
                assert!((pred - exact).abs() < 1e-12, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn constant_periodic_line() {
        let mut v = vec![7.0; 16];
        fwt_line(&mut v, 0, spec(4, 2), &LineClosure::Periodic).unwrap();
        for (i, x) in v.iter().enumerate() {
            let expect = if i % 2 == 0 { 7.0 } else { 0.0 };
            assert!((x - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn cubic_on_wide_interval() {
        for offset in [3usize, 4] {
            let mut v: Vec<f64> = (0..12)
                .map(|i| ((offset + i) as f64 / 64.0).powi(3))
                .collect();
            let scale = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            fwt_line(&mut v, offset, spec(4, 0), &LineClosure::type1()).unwrap();
            for (i, x) in v.iter().enumerate() {
                if (offset + i) % 2 == 1 {
                    assert!(x.abs() <= 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn sine_detail_decay_order_six() {
        let mut prev = None;
        for l in 6..=9 {
            let n = 1usize << l;
            let mut v: Vec<f64> = (0..n)
                .map(|i| (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin())
                .collect();
            fwt_line(&mut v, 0, spec(6, 2), &LineClosure::Periodic).unwrap();
            let g = v
                .iter()
                .skip(1)
                .step_by(2)
                .fold(0.0f64, |a, b| a.max(b.abs()));
            if let Some(p) = prev {
                let ratio: f64 = p / g;
                assert!((ratio / 64.0 - 1.0).abs() < 0.1, "ratio {ratio}");
            }
            prev = Some(g);
        }
    }

    #[test]
    fn linear_midpoints_n2() {
        let mut v = vec![0.0; 16];
        for i in (0..16).step_by(2) {
            v[i] = i as f64;
        }
        iwt_line(&mut v, 0, spec(2, 0), &LineClosure::type1()).unwrap();
        for (i, x) in v.iter().enumerate() {
            assert!((x - i as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn type1_examples() {
        assert_eq!(extrapolate_type1(&[5.0; 4], 4), vec![5.0, 5.0]);
        let g = extrapolate_type1(&[0.0, 1.0, 2.0, 3.0], 4);
        assert!((g[0] + 1.0).abs() < 1e-14 && (g[1] + 2.0).abs() < 1e-14);
        let g = extrapolate_type1(&[0.0, 1.0, 8.0, 27.0], 4);
        assert!((g[0] + 1.0).abs() < 1e-13 && (g[1] + 8.0).abs() < 1e-13);
    }

    #[test]
    fn type2_examples() {
        for off in [0.3, 0.5, 0.9] {
            let g = extrapolate_type2(&[3.0; 3], 3.0, off, 4).unwrap();
            assert!(g.iter().all(|x| (x - 3.0).abs() < 1e-13));
        }
        let g = extrapolate_type2(&[0.0, 1.0, 2.0], -0.5, 0.5, 4).unwrap();
        assert!((g[0] + 1.0).abs() < 1e-14);
        let g = extrapolate_type2(&[0.0, 1.0, 4.0], 0.5625, 0.75, 4).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-13);
        assert!(matches!(
            extrapolate_type2(&[0.0, 1.0, 4.0], 0.0, 0.0, 4),
            Err(Error::SingularVandermonde(_))
        ));
    }

    #[test]
    fn allocation_rules() {
        let a = hermite_allocation(6, 2, false, true).unwrap();
        assert_eq!((a.left_derivatives, a.right_derivatives), (2, 1));
        assert!(a.right_value && !a.left_value);
        let a = hermite_allocation(6, 1, false, false).unwrap();
        assert_eq!((a.left_derivatives, a.right_derivatives), (3, 2));
        // 2N - 1 points with both ends odd: N - 1 inside values plus two boundary values.
        let a = hermite_allocation(6, 5, true, true).unwrap();
        assert!(a.left_value && !a.right_value);
        assert_eq!(a.left_derivatives + a.right_derivatives, 0);
    }

    #[test]
    fn hermite_constant() {
        let left = DerivativeData {
            position: -0.4,
            value: Some(2.5),
            derivatives: vec![0.0; 6],
        };
        let right = DerivativeData {
            position: 2.3,
            value: None,
            derivatives: vec![0.0; 6],
        };
        let (lg, rg) = extrapolate_hermite(&[2.5, 2.5, 2.5], &left, &right, 6).unwrap();
        assert!(
            lg.iter().chain(&rg).all(|x| (x - 2.5).abs() < 1e-12),
            "{lg:?} {rg:?}"
        );
    }

    #[test]
    fn hermite_quintic_worked_case() {
        let f = |x: f64| x.powi(5);
        let (xl, xr) = (-0.35, 1.2);
        let left = DerivativeData {
            position: xl,
            value: None,
            derivatives: vec![5.0 * xl.powi(4), 20.0 * xl.powi(3)],
        };
        let right = DerivativeData {
            position: xr,
            value: Some(f(xr)),
            derivatives: vec![5.0 * xr.powi(4)],
        };
        let (lg, rg) = extrapolate_hermite(&[f(0.0), f(1.0)], &left, &right, 6).unwrap();
        for (g, x) in lg.iter().zip([-1.0, -2.0, -3.0]) {
            assert!((g - f(x)).abs() <= 1e-10 * f(x).abs());
        }
        for (g, x) in rg.iter().zip([2.0, 3.0, 4.0]) {
            assert!((g - f(x)).abs() <= 1e-10 * f(x).abs());
        }
    }

    #[test]
    fn hermite_needs_enough_data() {
        let left = DerivativeData {
            position: -0.5,
            value: None,
            derivatives: vec![],
        };
        let right = left.clone();
        assert!(matches!(
            extrapolate_hermite(
                &[1.0],
                &left,
                &DerivativeData {
                    position: 1.5,
                    ..right
                },
                4
            ),
            Err(Error::InsufficientBoundaryData(_))
        ));
    }

    #[test]
    fn wide_requires_2n_points() {
        let mut v = vec![1.0; 7];
        assert!(matches!(
            fwt_line(&mut v, 0, spec(4, 2), &LineClosure::type1()),
            Err(Error::InsufficientPoints { .. })
        ));
    }
}
