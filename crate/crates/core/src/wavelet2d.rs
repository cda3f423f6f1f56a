//! Dimension-split 2D transform on an immersed grid.
//!
//! The forward transform runs the 1D transform along every row (x-pass) and
//! then along every column (y-pass). Columns with odd `i` carry x-details;
//! their ghosts are zero. The result is stored in place:
//! `(even, even)` scaling, `(odd, even)` x-details, `(even, odd)` y-details
//! and `(odd, odd)` mixed details. Outside points hold NaN throughout.

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::{Axis, ImmersedGrid, Interval, IntervalClass};
use crate::stencil::{BoundaryStencil, StencilConfig};
use crate::wavelet1d::{
    fwt_line, predict_line, update_line, DerivativeData, EndClosure, LineClosure, WaveletSpec,
};

/// Optional Dirichlet data `g(x)` at the boundary.
pub type Provider<'a> = Option<&'a (dyn Fn([f64; 2]) -> f64 + Sync)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientClass {
    Scaling,
    DetailX,
    DetailY,
    DetailXY,
}

pub fn class_of(i: usize, j: usize) -> CoefficientClass {
    match (i % 2, j % 2) {
        (0, 0) => CoefficientClass::Scaling,
        (1, 0) => CoefficientClass::DetailX,
        (0, _) => CoefficientClass::DetailY,
        _ => CoefficientClass::DetailXY,
    }
}

/// Largest magnitude of each detail class.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClassMax {
    pub gx: f64,
    pub gy: f64,
    pub gxy: f64,
}

impl ClassMax {
    pub fn max(&self) -> f64 {
        self.gx.max(self.gy).max(self.gxy)
    }
}

/// Coefficients of one transform step in the fine-level layout.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    pub data: Vec<f64>,
    /// Level of the fine grid the layout lives on.
    pub level: u32,
    pub n: usize,
}

impl CoefficientField {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }

    pub fn class_max(&self) -> ClassMax {
        self.class_max_where(|_, _| true)
    }

    /// Class maxima over the points accepted by `keep`; NaN entries are skipped.
    pub fn class_max_where(&self, keep: impl Fn(usize, usize) -> bool) -> ClassMax {
        let mut m = ClassMax::default();
        for j in 0..self.n {
            for i in 0..self.n {
                let v = self.data[j * self.n + i].abs();
                if v.is_nan() || !keep(i, j) {
                    continue;
                }
                let slot = match class_of(i, j) {
                    CoefficientClass::Scaling => continue,
                    CoefficientClass::DetailX => &mut m.gx,
                    CoefficientClass::DetailY => &mut m.gy,
                    CoefficientClass::DetailXY => &mut m.gxy,
                };
                *slot = slot.max(v);
            }
        }
        m
    }

    /// Infinity norm over all detail classes.
    pub fn max_detail(&self) -> f64 {
        self.class_max().max()
    }

    /// The scaling coefficients as a field on the coarse grid.
    pub fn coarse(&self) -> Vec<f64> {
        let nc = self.n / 2;
        let mut out = Vec::with_capacity(nc * nc);
        for j in 0..nc {
            for i in 0..nc {
                out.push(self.data[2 * j * self.n + 2 * i]);
            }
        }
        out
    }

    /// Layout with `coarse` as scaling coefficients and all details zero.
    pub fn from_coarse(coarse: &[f64], fine: &ImmersedGrid) -> Self {
        let n = fine.n();
        let nc = n / 2;
        assert_eq!(coarse.len(), nc * nc);
        let mut data = vec![f64::NAN; n * n];
        for j in 0..n {
            for i in 0..n {
                if fine.is_inside(i, j) {
                    data[j * n + i] = if i % 2 == 0 && j % 2 == 0 {
                        coarse[(j / 2) * nc + i / 2]
                    } else {
                        0.0
                    };
                }
            }
        }
        CoefficientField {
            data,
            level: fine.level(),
            n,
        }
    }

    /// Zeroes every detail with magnitude below `eps`; returns how many survive.
    pub fn threshold(&mut self, eps: f64) -> usize {
        let n = self.n;
        let mut kept = 0;
        for j in 0..n {
            for i in 0..n {
                if class_of(i, j) == CoefficientClass::Scaling {
                    continue;
                }
                let v = &mut self.data[j * n + i];
                if v.is_nan() {
                    continue;
                }
                if v.abs() < eps {
                    *v = 0.0;
                } else {
                    kept += 1;
                }
            }
        }
        kept
    }
}

/// Boundary stencil of one control point, reduced to derivative weights along its line.
#[derive(Clone, Debug)]
struct ClosureStencil {
    /// Flat grid indices of the stencil points.
    points: Vec<usize>,
    /// `weights[k]` gives the `k`-th derivative along the line, physical units.
    weights: Vec<Vec<f64>>,
}

impl ClosureStencil {
    fn apply(&self, k: usize, field: &[f64]) -> f64 {
        self.weights[k]
            .iter()
            .zip(&self.points)
            .map(|(w, &p)| w * field[p])
            .sum()
    }
}

#[derive(Clone, Debug)]
struct LineJob {
    start: usize,
    len: usize,
    closure: LineClosure,
}

/// Everything needed to transform fields on one grid level: the grid and the
/// boundary stencils of all control points that close narrow intervals.
#[derive(Clone, Debug)]
pub struct TransformPlan {
    grid: ImmersedGrid,
    spec: WaveletSpec,
    /// Indexed `[axis][line][control point]`.
    stencils: [Vec<Vec<Option<ClosureStencil>>>; 2],
}

impl TransformPlan {
    pub fn new(grid: ImmersedGrid, spec: WaveletSpec, config: &StencilConfig) -> Result<Self> {
        assert_eq!(
            grid.order(),
            spec.n(),
            "grid built for a different wavelet order"
        );
        let (rn, rt) = config.radii(spec.n());
        let n = grid.n();
        let mut stencils: [Vec<Vec<Option<ClosureStencil>>>; 2] = [Vec::new(), Vec::new()];
        for axis in [Axis::X, Axis::Y] {
            let per_line: Result<Vec<Vec<Option<ClosureStencil>>>> = (0..n)
                .into_par_iter()
                .map(|line| {
                    let cps = &grid.control_points(axis)[line];
                    let mut out: Vec<Option<ClosureStencil>> = vec![None; cps.len()];
                    if axis == Axis::Y && line % 2 == 1 {
                        return Ok(out);
                    }
                    for iv in &grid.intervals(axis)[line] {
                        if iv.class != IntervalClass::Narrow {
                            continue;
                        }
                        for idx in [iv.left, iv.right].into_iter().flatten() {
                            if out[idx].is_some() {
                                continue;
                            }
                            let cp = &cps[idx];
                            let st = BoundaryStencil::build(cp.position, cp.normal, &grid, rn, rt)?;
                            out[idx] = Some(ClosureStencil {
                                points: st.points.iter().map(|&(i, j)| grid.index(i, j)).collect(),
                                weights: (0..spec.n())
                                    .map(|k| st.derivative_weights(axis, k))
                                    .collect(),
                            });
                        }
                    }
                    Ok(out)
                })
                .collect();
            stencils[axis.index()] = per_line?;
        }
        Ok(TransformPlan {
            grid,
            spec,
            stencils,
        })
    }

    pub fn grid(&self) -> &ImmersedGrid {
        &self.grid
    }

    pub fn spec(&self) -> WaveletSpec {
        self.spec
    }

    /// In-place forward transform of a fine-level field.
    pub fn forward(&self, data: &mut [f64], provider: Provider) -> Result<()> {
        for axis in [Axis::X, Axis::Y] {
            let jobs = self.jobs(data, axis, provider)?;
            self.run(data, axis, &jobs, Stage::Forward)?;
        }
        Ok(())
    }

    /// In-place inverse of [`TransformPlan::forward`] for the same provider.
    pub fn inverse(&self, data: &mut [f64], provider: Provider) -> Result<()> {
        for axis in [Axis::Y, Axis::X] {
            let light = self.update_jobs(axis);
            self.run(data, axis, &light, Stage::UnUpdate)?;
            let jobs = self.jobs(data, axis, provider)?;
            self.run(data, axis, &jobs, Stage::UnPredict)?;
        }
        Ok(())
    }

    fn update_jobs(&self, axis: Axis) -> Vec<Vec<LineJob>> {
        self.grid
            .intervals(axis)
            .iter()
            .map(|ivs| {
                ivs.iter()
                    .map(|iv| LineJob {
                        start: iv.start,
                        len: iv.len,
                        closure: if iv.class == IntervalClass::FullPeriodicLine {
                            LineClosure::Periodic
                        } else {
                            LineClosure::ZeroFill
                        },
                    })
                    .collect()
            })
            .collect()
    }

    /// Closures of every interval of `axis`, using the current scaling values.
    fn jobs(&self, data: &[f64], axis: Axis, provider: Provider) -> Result<Vec<Vec<LineJob>>> {
        let n = self.grid.n();
        (0..n)
            .into_par_iter()
            .map(|line| {
                self.grid.intervals(axis)[line]
                    .iter()
                    .map(|iv| {
                        Ok(LineJob {
                            start: iv.start,
                            len: iv.len,
                            closure: self.closure_of(data, iv, provider),
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// The closure the forward pass along `iv.axis` would use for `iv` if
    /// `data` were the field entering that pass.
    pub fn closure_of(&self, data: &[f64], iv: &Interval, provider: Provider) -> LineClosure {
        let (axis, line) = (iv.axis, iv.line);
        match iv.class {
            IntervalClass::FullPeriodicLine => LineClosure::Periodic,
            _ if axis == Axis::Y && line % 2 == 1 => LineClosure::ZeroFill,
            IntervalClass::Wide => LineClosure::Wide {
                left: self.wide_end(axis, line, iv.left, provider),
                right: self.wide_end(axis, line, iv.right, provider),
            },
            IntervalClass::Narrow => LineClosure::Hermite {
                left: self.hermite_end(data, axis, iv, true, provider),
                right: self.hermite_end(data, axis, iv, false, provider),
            },
        }
    }

    fn wide_end(
        &self,
        axis: Axis,
        line: usize,
        cp: Option<usize>,
        provider: Provider,
    ) -> EndClosure {
        match (cp, provider) {
            (Some(idx), Some(g)) => {
                let cp = &self.grid.control_points(axis)[line][idx];
                if cp.adjacent_is_odd() {
                    EndClosure::TypeII {
                        value: g(cp.position),
                        offset: 0.5 * (1.0 + cp.psi),
                    }
                } else {
                    EndClosure::TypeI
                }
            }
            _ => EndClosure::TypeI,
        }
    }

    fn hermite_end(
        &self,
        data: &[f64],
        axis: Axis,
        iv: &Interval,
        left: bool,
        provider: Provider,
    ) -> DerivativeData {
        let idx =
            if left { iv.left } else { iv.right }.expect("narrow interval without control point");
        let cp = &self.grid.control_points(axis)[iv.line][idx];
        let st = self.stencils[axis.index()][iv.line][idx]
            .as_ref()
            .expect("stencil planned for every narrow-interval end");
        let first_even = iv.start + iv.start % 2;
        let fine_pos = if left {
            iv.start as f64 - cp.psi
        } else {
            (iv.start + iv.len - 1) as f64 + cp.psi
        };
        let value = cp.adjacent_is_odd().then(|| match provider {
            Some(g) => g(cp.position),
            None => st.apply(0, data),
        });
        // Local coordinate u has unit coarse spacing, so d/du = 2h d/dx.
        let step = 2.0 * self.grid.h();
        let derivatives = (1..self.spec.n())
            .map(|k| st.apply(k, data) * step.powi(k as i32))
            .collect();
        DerivativeData {
            position: (fine_pos - first_even as f64) / 2.0,
            value,
            derivatives,
        }
    }

    fn run(&self, data: &mut [f64], axis: Axis, jobs: &[Vec<LineJob>], stage: Stage) -> Result<()> {
        let n = self.grid.n();
        let spec = self.spec;
        if axis == Axis::Y {
            transpose(data, n);
        }
        let res =
            data.par_chunks_mut(n)
                .zip(jobs.par_iter())
                .try_for_each(|(row, jobs)| -> Result<()> {
                    let mut buf = Vec::with_capacity(n);
                    for job in jobs {
                        buf.clear();
                        buf.extend((0..job.len).map(|r| row[(job.start + r) % n]));
                        match stage {
                            Stage::Forward => fwt_line(&mut buf, job.start, spec, &job.closure)?,
                            Stage::UnUpdate => {
                                update_line(&mut buf, job.start, spec, &job.closure, true)
                            }
                            Stage::UnPredict => {
                                predict_line(&mut buf, job.start, spec, &job.closure, true)?
                            }
                        }
                        for (r, v) in buf.iter().enumerate() {
                            row[(job.start + r) % n] = *v;
                        }
                    }
                    Ok(())
                });
        if axis == Axis::Y {
            transpose(data, n);
        }
        res
    }
}

#[derive(Clone, Copy, Debug)]
enum Stage {
    Forward,
    UnUpdate,
    UnPredict,
}

fn transpose(data: &mut [f64], n: usize) {
    for j in 0..n {
        for i in j + 1..n {
            data.swap(j * n + i, i * n + j);
        }
    }
}

/// Forward transform of `field` (fine level, NaN outside) into the 4-class layout.
pub fn fwt2d(field: &[f64], plan: &TransformPlan, provider: Provider) -> Result<CoefficientField> {
    let mut data = field.to_vec();
    plan.forward(&mut data, provider)?;
    Ok(CoefficientField {
        data,
        level: plan.grid().level(),
        n: plan.grid().n(),
    })
}

/// Inverse of [`fwt2d`].
pub fn iwt2d(
    coeffs: &CoefficientField,
    plan: &TransformPlan,
    provider: Provider,
) -> Result<Vec<f64>> {
    let mut data = coeffs.data.clone();
    plan.inverse(&mut data, provider)?;
    Ok(data)
}

/// Plans for every level of a hierarchy, coarsest first.
#[derive(Clone, Debug)]
pub struct PlanHierarchy {
    min_level: u32,
    plans: Vec<TransformPlan>,
}

impl PlanHierarchy {
    /// Plans for levels `min_level + 1 ..= max_level`; a plan at level `l`
    /// maps level-`l` fields to level-`l - 1` scaling coefficients.
    pub fn new(
        levelset: &dyn crate::geometry::LevelSet,
        min_level: u32,
        max_level: u32,
        spec: WaveletSpec,
        config: &StencilConfig,
    ) -> Result<Self> {
        let hier = crate::geometry::GridHierarchy::new(levelset, min_level, max_level, spec.n())?;
        let plans = (min_level..=max_level)
            .map(|l| TransformPlan::new(hier.grid(l).clone(), spec, config))
            .collect::<Result<Vec<_>>>()?;
        Ok(PlanHierarchy { min_level, plans })
    }

    pub fn min_level(&self) -> u32 {
        self.min_level
    }

    pub fn max_level(&self) -> u32 {
        self.min_level + self.plans.len() as u32 - 1
    }

    pub fn plan(&self, level: u32) -> &TransformPlan {
        &self.plans[(level - self.min_level) as usize]
    }

    pub fn grid(&self, level: u32) -> &ImmersedGrid {
        self.plan(level).grid()
    }
}
