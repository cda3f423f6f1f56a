//! Immersed geometry on the periodic unit box.
//!
//! The domain of interest is `Omega = C \ E` where `C = [0,1)^2` is periodic and
//! the excluded body `E` is the set where a level-set function is negative.
//! An [`ImmersedGrid`] samples the level set on a `2^L x 2^L` grid, locates the
//! control points where the boundary crosses grid lines, and splits every grid
//! line into runs of inside points ([`Interval`]s).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid points with `|phi| < SNAP_FRACTION * h` are treated as lying on the body.
pub const SNAP_FRACTION: f64 = 1e-6;
/// Absolute tolerance of the control-point root finder.
pub const ROOT_TOL: f64 = 1e-12;
pub const MAX_BISECTIONS: usize = 50;
/// Step of the central-difference gradient used when no analytic gradient exists.
pub const FD_STEP: f64 = 1e-6;
pub const MIN_GRADIENT: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }

    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

/// Which side of its adjacent inside point a control point lies on, looking
/// along increasing index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A scalar field whose zero set is the immersed boundary.
///
/// Sign convention: negative inside the excluded body, positive in the domain.
pub trait LevelSet: Send + Sync {
    fn eval(&self, p: [f64; 2]) -> f64;

    /// Analytic gradient, when one is available.
    fn gradient(&self, _p: [f64; 2]) -> Option<[f64; 2]> {
        None
    }
}

/// Adapter turning a closure into a [`LevelSet`] without analytic gradient.
pub struct FnLevelSet<F>(pub F);

impl<F> LevelSet for FnLevelSet<F>
where
    F: Fn([f64; 2]) -> f64 + Send + Sync,
{
    fn eval(&self, p: [f64; 2]) -> f64 {
        (self.0)(p)
    }
}

impl<T: LevelSet + ?Sized> LevelSet for &T {
    fn eval(&self, p: [f64; 2]) -> f64 {
        (**self).eval(p)
    }
    fn gradient(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        (**self).gradient(p)
    }
}

/// Built-in geometries, as they appear in run configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Geometry {
    /// No body: the whole periodic box.
    None,
    Circle {
        center: [f64; 2],
        r: f64,
    },
    /// `phi = r - (r0 + amp * sin(lobes * theta))`.
    Star {
        center: [f64; 2],
        r0: f64,
        amp: f64,
        lobes: u32,
    },
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry::star()
    }
}

impl Geometry {
    /// Five-lobed star centred at (0.51, 0.51), used by the static and diffusion tests.
    pub fn star() -> Self {
        Geometry::Star {
            center: [0.51, 0.51],
            r0: 0.3,
            amp: 0.04,
            lobes: 5,
        }
    }

    pub fn circle(center: [f64; 2], r: f64) -> Self {
        Geometry::Circle { center, r }
    }

    pub fn center(&self) -> Option<[f64; 2]> {
        match self {
            Geometry::None => None,
            Geometry::Circle { center, .. } | Geometry::Star { center, .. } => Some(*center),
        }
    }

    /// Polar angle of `p` about the body centre (periodic minimum image).
    pub fn angle(&self, p: [f64; 2]) -> f64 {
        let c = self.center().unwrap_or([0.5, 0.5]);
        let (dx, dy) = (min_image(p[0] - c[0]), min_image(p[1] - c[1]));
        dy.atan2(dx)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        match *self {
            Geometry::None => Ok(()),
            Geometry::Circle { r, .. } if !(r > 0.0 && r < 0.5) => {
                bad("circle radius must lie in (0, 0.5)")
            }
            Geometry::Star { r0, amp, .. }
                if !(r0 > 0.0 && amp.abs() < r0 && r0 + amp.abs() < 0.5) =>
            {
                bad("star needs 0 < |amp| < r0 and r0 + |amp| < 0.5")
            }
            _ => Ok(()),
        }
    }
}

fn min_image(d: f64) -> f64 {
    d - d.round()
}

impl LevelSet for Geometry {
    fn eval(&self, p: [f64; 2]) -> f64 {
        match *self {
            Geometry::None => 1.0,
            Geometry::Circle { center, r } => {
                let (dx, dy) = (min_image(p[0] - center[0]), min_image(p[1] - center[1]));
                dx.hypot(dy) - r
            }
            Geometry::Star {
                center,
                r0,
                amp,
                lobes,
            } => {
                let (dx, dy) = (min_image(p[0] - center[0]), min_image(p[1] - center[1]));
                let theta = dy.atan2(dx);
                dx.hypot(dy) - (r0 + amp * (lobes as f64 * theta).sin())
            }
        }
    }

    fn gradient(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        match *self {
            Geometry::None => Some([0.0, 0.0]),
            Geometry::Circle { center, .. } => {
                let (dx, dy) = (min_image(p[0] - center[0]), min_image(p[1] - center[1]));
                let r = dx.hypot(dy);
                (r > 0.0).then(|| [dx / r, dy / r])
            }
            Geometry::Star {
                center, amp, lobes, ..
            } => {
                let (dx, dy) = (min_image(p[0] - center[0]), min_image(p[1] - center[1]));
                let r2 = dx * dx + dy * dy;
                if r2 == 0.0 {
                    return None;
                }
                let r = r2.sqrt();
                let m = lobes as f64;
                let dtheta = amp * m * (m * dy.atan2(dx)).cos();
                // grad(theta) = (-dy, dx) / r^2
                Some([dx / r + dtheta * dy / r2, dy / r - dtheta * dx / r2])
            }
        }
    }
}

/// Unit normal `grad(phi) / |grad(phi)|`, pointing from the body into the domain.
pub fn compute_normal(levelset: &dyn LevelSet, x: [f64; 2]) -> Result<[f64; 2]> {
    let g = levelset.gradient(x).unwrap_or_else(|| {
        let d = FD_STEP;
        [
            (levelset.eval([x[0] + d, x[1]]) - levelset.eval([x[0] - d, x[1]])) / (2.0 * d),
            (levelset.eval([x[0], x[1] + d]) - levelset.eval([x[0], x[1] - d])) / (2.0 * d),
        ]
    });
    let norm = g[0].hypot(g[1]);
    if !(norm >= MIN_GRADIENT) {
        return Err(Error::DegenerateGradient(x[0], x[1]));
    }
    Ok([g[0] / norm, g[1] / norm])
}

/// Inside/outside flags for every point of the level-`level` grid, row-major
/// (`j * n + i`, `i` along x).
///
/// A point counts as inside when `phi > snap * max(1, |grad phi|)`, so grid
/// points sitting on (or numerically next to) the boundary become outside.
pub fn classify_points(levelset: &dyn LevelSet, level: u32, snap: f64) -> Vec<bool> {
    let n = 1usize << level;
    let h = 1.0 / n as f64;
    let mut mask = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let p = [i as f64 * h, j as f64 * h];
            mask.push(is_inside(levelset, p, snap));
        }
    }
    mask
}

fn is_inside(levelset: &dyn LevelSet, p: [f64; 2], snap: f64) -> bool {
    let phi = levelset.eval(p);
    if !(phi > 0.0) {
        return false;
    }
    if phi >= 100.0 * snap {
        return true;
    }
    let g = compute_normal_scale(levelset, p);
    phi > snap * g.max(1.0)
}

fn compute_normal_scale(levelset: &dyn LevelSet, p: [f64; 2]) -> f64 {
    let g = levelset.gradient(p).unwrap_or_else(|| {
        let d = FD_STEP;
        [
            (levelset.eval([p[0] + d, p[1]]) - levelset.eval([p[0] - d, p[1]])) / (2.0 * d),
            (levelset.eval([p[0], p[1] + d]) - levelset.eval([p[0], p[1] - d])) / (2.0 * d),
        ]
    });
    g[0].hypot(g[1])
}

/// Intersection of the boundary with a grid line.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlPoint {
    /// Physical position, wrapped into the unit box.
    pub position: [f64; 2],
    pub axis: Axis,
    /// Index of the grid line (row `j` for [`Axis::X`], column `i` for [`Axis::Y`]).
    pub line: usize,
    /// Index along the line of the nearest inside grid point.
    pub adjacent: usize,
    pub side: Side,
    /// Distance from the adjacent inside point to the boundary, in grid units; in `(0, 1]`.
    pub psi: f64,
    /// Unit normal pointing into the domain.
    pub normal: [f64; 2],
}

impl ControlPoint {
    pub fn adjacent_is_odd(&self) -> bool {
        self.adjacent % 2 == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalClass {
    /// The whole line lies inside the domain; transformed periodically.
    FullPeriodicLine,
    /// At least `2N` inside points: each end is closed by one-sided extrapolation.
    Wide,
    /// Fewer than `2N` inside points: closed by a single Hermite-like interpolant.
    Narrow,
}

/// A maximal run of consecutive inside points on one grid line.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub axis: Axis,
    pub line: usize,
    /// First inside index along the line.
    pub start: usize,
    /// Number of inside points; the run may wrap around the periodic line.
    pub len: usize,
    /// Index into the line's control-point list of the boundary before `start`.
    pub left: Option<usize>,
    /// Index into the line's control-point list of the boundary after the last point.
    pub right: Option<usize>,
    pub class: IntervalClass,
}

impl Interval {
    /// Last inside index (inclusive), wrapped onto the line.
    pub fn end(&self, n: usize) -> usize {
        (self.start + self.len - 1) % n
    }
}

/// A level-`L` Cartesian grid classified against a level set.
#[derive(Clone, Debug)]
pub struct ImmersedGrid {
    level: u32,
    n: usize,
    h: f64,
    order: usize,
    snap: f64,
    mask: Vec<bool>,
    control: [Vec<Vec<ControlPoint>>; 2],
    intervals: [Vec<Vec<Interval>>; 2],
}

impl ImmersedGrid {
    /// Builds the grid with the default snap tolerance `SNAP_FRACTION * h`.
    ///
    /// `order` is the wavelet order `N`; it decides the wide/narrow split.
    pub fn new(levelset: &dyn LevelSet, level: u32, order: usize) -> Result<Self> {
        let h = (-(level as f64)).exp2();
        Self::with_snap(levelset, level, order, SNAP_FRACTION * h)
    }

    /// Builds the grid with an explicit absolute snap tolerance. Grids of a
    /// hierarchy share one tolerance so that coarse masks are exact subsamples.
    pub fn with_snap(levelset: &dyn LevelSet, level: u32, order: usize, snap: f64) -> Result<Self> {
        assert!(level >= 2, "grid level must be at least 2");
        let n = 1usize << level;
        let h = 1.0 / n as f64;
        let mask = classify_points(levelset, level, snap);
        let mut grid = ImmersedGrid {
            level,
            n,
            h,
            order,
            snap,
            mask,
            control: [Vec::new(), Vec::new()],
            intervals: [Vec::new(), Vec::new()],
        };
        for axis in [Axis::X, Axis::Y] {
            let control = find_control_points(levelset, &grid, axis)?;
            grid.control[axis.index()] = control;
            grid.intervals[axis.index()] = enumerate_intervals(&grid, axis);
        }
        Ok(grid)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn snap(&self) -> f64 {
        self.snap
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.n + i]
    }

    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [i as f64 * self.h, j as f64 * self.h]
    }

    /// Flat index of position `t` on grid line `line` of `axis`.
    #[inline]
    pub fn line_index(&self, axis: Axis, line: usize, t: usize) -> usize {
        match axis {
            Axis::X => line * self.n + t,
            Axis::Y => t * self.n + line,
        }
    }

    pub fn inside_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Control points per line of `axis`, sorted along each line.
    pub fn control_points(&self, axis: Axis) -> &[Vec<ControlPoint>] {
        &self.control[axis.index()]
    }

    pub fn intervals(&self, axis: Axis) -> &[Vec<Interval>] {
        &self.intervals[axis.index()]
    }

    /// Samples `f` on inside points; outside points hold NaN.
    pub fn sample(&self, mut f: impl FnMut([f64; 2]) -> f64) -> Vec<f64> {
        let mut out = vec![f64::NAN; self.n * self.n];
        for j in 0..self.n {
            for i in 0..self.n {
                if self.is_inside(i, j) {
                    out[self.index(i, j)] = f(self.point(i, j));
                }
            }
        }
        out
    }

    /// Minimum distance (in grid units, along grid lines) from every point to
    /// the nearest control point; a cheap proxy for distance to the boundary.
    pub fn boundary_distance(&self) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.n * self.n];
        for axis in [Axis::X, Axis::Y] {
            for cps in self.control_points(axis) {
                for cp in cps {
                    let radius = 8isize;
                    let ci = cp.position[0] / self.h;
                    let cj = cp.position[1] / self.h;
                    let (i0, j0) = (ci.floor() as isize, cj.floor() as isize);
                    for dj in -radius..=radius + 1 {
                        for di in -radius..=radius + 1 {
                            let (i, j) = (i0 + di, j0 + dj);
                            let d = ((i as f64 - ci).powi(2) + (j as f64 - cj).powi(2)).sqrt();
                            let idx = self.index(wrap(i, self.n), wrap(j, self.n));
                            if d < dist[idx] {
                                dist[idx] = d;
                            }
                        }
                    }
                }
            }
        }
        dist
    }
}

#[inline]
pub(crate) fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Locates every intersection of the boundary with the grid lines of `axis`.
///
/// One control point is produced for each inside/outside transition of the
/// mask; the root is found by bisection between the two grid points.
pub fn find_control_points(
    levelset: &dyn LevelSet,
    grid: &ImmersedGrid,
    axis: Axis,
) -> Result<Vec<Vec<ControlPoint>>> {
    let n = grid.n;
    let h = grid.h;
    let mut all = Vec::with_capacity(n);
    for line in 0..n {
        let inside = |t: usize| grid.mask[grid.line_index(axis, line, t % n)];
        let mut cps = Vec::new();
        for t in 0..n {
            let (a, b) = (inside(t), inside(t + 1));
            if a == b {
                continue;
            }
            // Unwrapped line coordinates of the inside point and of the outside point.
            let (t_in, t_out, side) = if a {
                (t as f64, (t + 1) as f64, Side::Right)
            } else {
                ((t + 1) as f64, t as f64, Side::Left)
            };
            let at = |s: f64| -> [f64; 2] {
                let c = (s * h).rem_euclid(1.0);
                let other = line as f64 * h;
                match axis {
                    Axis::X => [c, other],
                    Axis::Y => [other, c],
                }
            };
            let phi_out = levelset.eval(at(t_out));
            let s_root = if phi_out >= 0.0 {
                // Snapped grid point: the boundary sits on it.
                t_out
            } else {
                let phi_in = levelset.eval(at(t_in));
                if !(phi_in > 0.0) {
                    return Err(Error::NonConvergedRoot {
                        axis,
                        line,
                        index: t,
                    });
                }
                let (mut s_pos, mut s_neg) = (t_in, t_out);
                for _ in 0..MAX_BISECTIONS {
                    let mid = 0.5 * (s_pos + s_neg);
                    let v = levelset.eval(at(mid));
                    if v == 0.0 {
                        s_pos = mid;
                        s_neg = mid;
                        break;
                    }
                    if v > 0.0 {
                        s_pos = mid;
                    } else {
                        s_neg = mid;
                    }
                    if (s_pos - s_neg).abs() * h < 1e-3 * ROOT_TOL {
                        break;
                    }
                }
                0.5 * (s_pos + s_neg)
            };
            let psi = (s_root - t_in).abs();
            let position = at(s_root);
            let normal = compute_normal(levelset, position)?;
            cps.push(ControlPoint {
                position,
                axis,
                line,
                adjacent: t_in as usize % n,
                side,
                psi,
                normal,
            });
        }
        all.push(cps);
    }
    Ok(all)
}

/// Splits every line of `axis` into maximal runs of inside points and pairs
/// each run with the control points that bound it.
pub fn enumerate_intervals(grid: &ImmersedGrid, axis: Axis) -> Vec<Vec<Interval>> {
    let n = grid.n;
    let min_wide = 2 * grid.order;
    let mut all = Vec::with_capacity(n);
    for line in 0..n {
        let inside = |t: usize| grid.mask[grid.line_index(axis, line, t % n)];
        let cps = &grid.control[axis.index()][line];
        let mut intervals = Vec::new();
        if cps.is_empty() {
            if inside(0) {
                intervals.push(Interval {
                    axis,
                    line,
                    start: 0,
                    len: n,
                    left: None,
                    right: None,
                    class: IntervalClass::FullPeriodicLine,
                });
            }
            all.push(intervals);
            continue;
        }
        for start in 0..n {
            if !inside(start) || inside(start + n - 1) {
                continue;
            }
            let mut len = 1;
            while inside(start + len) {
                len += 1;
            }
            let end = (start + len - 1) % n;
            let left = cps
                .iter()
                .position(|c| c.side == Side::Left && c.adjacent == start);
            let right = cps
                .iter()
                .position(|c| c.side == Side::Right && c.adjacent == end);
            let class = if len >= min_wide {
                IntervalClass::Wide
            } else {
                IntervalClass::Narrow
            };
            intervals.push(Interval {
                axis,
                line,
                start,
                len,
                left,
                right,
                class,
            });
        }
        all.push(intervals);
    }
    all
}

/// Grids for a range of levels built from one level set with a shared snap
/// tolerance, so that the inside set of level `l - 1` is exactly the
/// even-even subsample of level `l`.
#[derive(Clone, Debug)]
pub struct GridHierarchy {
    min_level: u32,
    grids: Vec<ImmersedGrid>,
}

impl GridHierarchy {
    pub fn new(
        levelset: &dyn LevelSet,
        min_level: u32,
        max_level: u32,
        order: usize,
    ) -> Result<Self> {
        assert!(min_level <= max_level);
        let snap = SNAP_FRACTION * (-(max_level as f64)).exp2();
        let grids = (min_level..=max_level)
            .map(|l| ImmersedGrid::with_snap(levelset, l, order, snap))
            .collect::<Result<Vec<_>>>()?;
        Ok(GridHierarchy { min_level, grids })
    }

    pub fn min_level(&self) -> u32 {
        self.min_level
    }

    pub fn max_level(&self) -> u32 {
        self.min_level + self.grids.len() as u32 - 1
    }

    pub fn grid(&self, level: u32) -> &ImmersedGrid {
        &self.grids[(level - self.min_level) as usize]
    }
}
