//! Multi-level compression and the temporal coarsen/refine/keep policy.
//!
//! Thresholds scale with the level as `2^(-k (L - L0))`, so a refinement
//! threshold tied to a spatial discretisation of order `k` keeps the
//! compression error in step with the truncation error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavelet2d::{fwt2d, iwt2d, CoefficientField, PlanHierarchy, Provider, TransformPlan};

pub const DEFAULT_CADENCE: usize = 10;
pub const DEFAULT_MIN_LEVEL: u32 = 5;
pub const DEFAULT_MAX_LEVEL: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Coarsen,
    Keep,
    Refine,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdaptationEvent {
    pub t: f64,
    pub level: u32,
    pub decision: Decision,
    /// Detail norm the decision was based on.
    pub max_detail: f64,
    /// `2^(-k (L - L0))` at the time of the event.
    pub factor: f64,
}

impl AdaptationEvent {
    /// Whether the measured detail sits inside `[factor eps_c, factor eps_r]`.
    pub fn in_band(&self, eps_c: f64, eps_r: f64) -> bool {
        self.max_detail >= self.factor * eps_c && self.max_detail <= self.factor * eps_r
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptationState {
    pub level: u32,
    pub base_level: u32,
    pub eps_c: f64,
    pub eps_r: f64,
    pub k: u32,
    pub cadence: usize,
    pub min_level: u32,
    pub max_level: u32,
    pub history: Vec<AdaptationEvent>,
}

impl AdaptationState {
    /// Checks `eps_r > eps_c > 0` and the flip-flop guard `eps_r >= 2^N eps_c`.
    pub fn new(level: u32, eps_c: f64, eps_r: f64, k: u32, order: usize) -> Result<Self> {
        if !(eps_c > 0.0 && eps_r > eps_c) {
            return Err(Error::Config(format!(
                "thresholds need eps_r > eps_c > 0, got eps_c = {eps_c}, eps_r = {eps_r}"
            )));
        }
        let bound = (order as f64).exp2() * eps_c;
        if eps_r < bound {
            return Err(Error::FlipFlopGuard {
                eps_r,
                order,
                bound,
            });
        }
        Ok(AdaptationState {
            level,
            base_level: level,
            eps_c,
            eps_r,
            k,
            cadence: DEFAULT_CADENCE,
            min_level: DEFAULT_MIN_LEVEL.min(level),
            max_level: DEFAULT_MAX_LEVEL.max(level),
            history: Vec::new(),
        })
    }

    pub fn with_levels(mut self, min_level: u32, max_level: u32) -> Result<Self> {
        if !(min_level <= self.level && self.level <= max_level) {
            return Err(Error::Config(format!(
                "level {} outside the allowed range {min_level}..={max_level}",
                self.level
            )));
        }
        self.min_level = min_level;
        self.max_level = max_level;
        Ok(self)
    }

    pub fn with_cadence(mut self, cadence: usize) -> Result<Self> {
        if cadence == 0 {
            return Err(Error::Config(
                "adaptation cadence must be at least 1".into(),
            ));
        }
        self.cadence = cadence;
        Ok(self)
    }

    /// `2^(-k (L - L0))`.
    pub fn factor(&self) -> f64 {
        (-(self.k as f64) * (self.level as f64 - self.base_level as f64)).exp2()
    }

    /// Fraction of recorded events whose detail lies inside the threshold band.
    pub fn band_fraction(&self) -> f64 {
        if self.history.is_empty() {
            return 1.0;
        }
        let inside = self
            .history
            .iter()
            .filter(|e| e.in_band(self.eps_c, self.eps_r))
            .count();
        inside as f64 / self.history.len() as f64
    }
}

/// The three mutually exclusive criteria with level-scaled thresholds.
pub fn decide(max_detail: f64, state: &AdaptationState) -> Decision {
    let f = state.factor();
    if max_detail < f * state.eps_c {
        Decision::Coarsen
    } else if max_detail >= f * state.eps_r {
        Decision::Refine
    } else {
        Decision::Keep
    }
}

/// Scaling coefficients of `field` on the next coarser grid.
pub fn coarsen_field(field: &[f64], fine: &TransformPlan, provider: Provider) -> Result<Vec<f64>> {
    let c = fwt2d(field, fine, provider)?;
    let coarse = c.coarse();
    check_nested(&coarse, fine, true)?;
    Ok(coarse)
}

/// Interpolates a coarse field onto the grid of `fine` (all details zero).
pub fn refine_field(coarse: &[f64], fine: &TransformPlan, provider: Provider) -> Result<Vec<f64>> {
    check_nested(coarse, fine, false)?;
    let c = CoefficientField::from_coarse(coarse, fine.grid());
    iwt2d(&c, fine, provider)
}

/// With a shared snap tolerance the coarse inside set is exactly the even-even
/// subsample of the fine one, so no point is ever newly exposed.
fn check_nested(coarse: &[f64], fine: &TransformPlan, _from_fine: bool) -> Result<()> {
    let g = fine.grid();
    let nc = g.n() / 2;
    for j in 0..nc {
        for i in 0..nc {
            if g.is_inside(2 * i, 2 * j) && coarse[j * nc + i].is_nan() {
                return Err(Error::MaskMismatch(format!(
                    "coarse point ({i}, {j}) has no value but is inside at level {}",
                    g.level()
                )));
            }
        }
    }
    Ok(())
}

/// One adaptation event: transform, decide, and move at most one level.
///
/// Returns the (possibly re-levelled) field. `plans` must cover
/// `state.min_level..=state.max_level`.
pub fn adapt(
    field: Vec<f64>,
    state: &mut AdaptationState,
    plans: &PlanHierarchy,
    provider: Provider,
    t: f64,
) -> Result<(Vec<f64>, Decision)> {
    let level = state.level;
    let c = fwt2d(&field, plans.plan(level), provider)?;
    let max_detail = c.max_detail();
    let mut decision = decide(max_detail, state);
    if decision == Decision::Coarsen && level <= state.min_level.max(plans.min_level()) {
        decision = Decision::Keep;
    }
    if decision == Decision::Refine && level >= state.max_level.min(plans.max_level()) {
        decision = Decision::Keep;
    }
    state.history.push(AdaptationEvent {
        t,
        level,
        decision,
        max_detail,
        factor: state.factor(),
    });
    let out = match decision {
        Decision::Keep => field,
        Decision::Coarsen => {
            let coarse = c.coarse();
            check_nested(&coarse, plans.plan(level), true)?;
            state.level -= 1;
            coarse
        }
        Decision::Refine => {
            state.level += 1;
            refine_field(&field, plans.plan(level + 1), provider)?
        }
    };
    Ok((out, decision))
}

/// Forward transforms of a field down a hierarchy, kept for threshold sweeps.
#[derive(Clone, Debug)]
pub struct Decomposition {
    /// Coefficients from the finest level down.
    pub levels: Vec<CoefficientField>,
    /// Scaling values on the coarsest grid.
    pub coarse: Vec<f64>,
    pub max_level: u32,
}

impl Decomposition {
    /// Applies `levels` successive forward transforms starting at `max_level`.
    pub fn new(
        field: &[f64],
        plans: &PlanHierarchy,
        max_level: u32,
        levels: u32,
        provider: Provider,
    ) -> Result<Self> {
        assert!(levels >= 1 && max_level + 1 >= plans.min_level() + levels);
        let mut cur = field.to_vec();
        let mut out = Vec::with_capacity(levels as usize);
        for l in (max_level - levels + 1..=max_level).rev() {
            let c = fwt2d(&cur, plans.plan(l), provider)?;
            cur = c.coarse();
            out.push(c);
        }
        Ok(Decomposition {
            levels: out,
            coarse: cur,
            max_level,
        })
    }

    /// Per-level maximal detail, finest level first.
    pub fn max_details(&self) -> Vec<f64> {
        self.levels.iter().map(|c| c.max_detail()).collect()
    }

    /// Drops every detail below `eps` and transforms back to the finest level.
    /// Returns the reconstruction and the number of retained coefficients
    /// (surviving details plus coarsest-level scaling values).
    pub fn reconstruct(
        &self,
        eps: f64,
        plans: &PlanHierarchy,
        provider: Provider,
    ) -> Result<(Vec<f64>, usize)> {
        let mut active = self.coarse.iter().filter(|v| !v.is_nan()).count();
        let mut cur = self.coarse.clone();
        let coarsest = self.max_level + 1 - self.levels.len() as u32;
        for (c, l) in self.levels.iter().rev().zip(coarsest..) {
            let mut c = c.clone();
            active += c.threshold(eps);
            let nc = c.n / 2;
            for j in 0..nc {
                for i in 0..nc {
                    c.data[2 * j * c.n + 2 * i] = cur[j * nc + i];
                }
            }
            cur = iwt2d(&c, plans.plan(l), provider)?;
        }
        Ok((cur, active))
    }
}

/// Result of one compression run.
#[derive(Clone, Debug)]
pub struct Compression {
    pub reconstructed: Vec<f64>,
    pub active_points: usize,
    /// `max |f - reconstructed|` over inside points.
    pub e_inf: f64,
    pub max_details: Vec<f64>,
}

/// The smooth field `100 sin(4 pi x) sin(4 pi y)` used by the compression study.
pub fn compression_test_field(x: [f64; 2]) -> f64 {
    use std::f64::consts::PI;
    100.0 * (4.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).sin()
}

/// Forward `levels` times, threshold at `eps`, and transform back.
pub fn compress_hierarchy(
    field: &[f64],
    plans: &PlanHierarchy,
    max_level: u32,
    levels: u32,
    eps: f64,
    provider: Provider,
) -> Result<Compression> {
    let dec = Decomposition::new(field, plans, max_level, levels, provider)?;
    let (rec, active) = dec.reconstruct(eps, plans, provider)?;
    Ok(Compression {
        e_inf: max_abs_diff(field, &rec),
        reconstructed: rec,
        active_points: active,
        max_details: dec.max_details(),
    })
}

/// `max |a - b|` over entries that are not NaN in `a`.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .filter(|(x, _)| !x.is_nan())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
