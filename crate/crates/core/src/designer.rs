//! Two-point (AQL/LQL) plan design: the smallest sample size `n = g * r`
//! whose OC curve passes above `1 - alpha` at the AQL and below `beta` at the
//! LQL.
//!
//! The search walks `g` upward and stops at the first group count that admits
//! any feasible acceptance number (and, for chain plans, chain length). Among
//! the feasible candidates at that `g` the tie-break order decides.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::oc::{binom_cdf_prefix, oc_mchgsp, oc_mchsp, oc_single, PlanParams, Probability};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanKind {
    /// Modified chain group plan: group sampling with chained lot history.
    Mchgsp,
    /// Group plan: `g` groups of `r` items, no chaining.
    Gasip,
    /// Single plan: one sample of `n` items (`r = 1`).
    Sasip,
}

impl PlanKind {
    pub const ALL: [PlanKind; 3] = [PlanKind::Mchgsp, PlanKind::Gasip, PlanKind::Sasip];

    pub fn as_str(self) -> &'static str {
        match self {
            PlanKind::Mchgsp => "mchgsp",
            PlanKind::Gasip => "gasip",
            PlanKind::Sasip => "sasip",
        }
    }
}

impl fmt::Display for PlanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PlanKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mchgsp" => Ok(PlanKind::Mchgsp),
            "gasip" => Ok(PlanKind::Gasip),
            "sasip" => Ok(PlanKind::Sasip),
            other => domain(format!("unknown plan kind `{other}`")),
        }
    }
}

/// Inclusive upper limits of the design lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub g_max: u32,
    pub c_max: u32,
    pub i_max: u32,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds { g_max: 1000, c_max: 10, i_max: 10 }
    }
}

impl SearchBounds {
    pub fn validate(&self) -> Result<()> {
        if self.g_max == 0 {
            return domain("g_max must be at least 1");
        }
        if self.i_max == 0 {
            return domain("i_max must be at least 1");
        }
        Ok(())
    }
}

/// Order in which `(c, i)` candidates sharing the minimal `g` are tried.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Smallest `c`, then smallest `i`.
    #[default]
    CThenI,
    /// Smallest `i`, then smallest `c`.
    IThenC,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignRequest {
    /// Items per group. Ignored for single plans.
    pub r: u32,
    /// Acceptable quality level.
    pub p0: Probability,
    /// Limiting quality level.
    pub p1: Probability,
    /// Producer's risk.
    pub alpha: Probability,
    /// Consumer's risk.
    pub beta: Probability,
    #[serde(default)]
    pub bounds: SearchBounds,
    #[serde(default)]
    pub tie_break: TieBreak,
}

impl DesignRequest {
    pub fn new(r: u32, p0: f64, p1: f64, alpha: f64, beta: f64) -> Result<Self> {
        let req = DesignRequest {
            r,
            p0: Probability::new(p0)?,
            p1: Probability::new(p1)?,
            alpha: Probability::new(alpha)?,
            beta: Probability::new(beta)?,
            bounds: SearchBounds::default(),
            tie_break: TieBreak::default(),
        };
        req.validate()?;
        Ok(req)
    }

    pub fn with_bounds(mut self, bounds: SearchBounds) -> Result<Self> {
        bounds.validate()?;
        self.bounds = bounds;
        Ok(self)
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return domain("group size r must be at least 1");
        }
        let (p0, p1) = (self.p0.value(), self.p1.value());
        if !(p0 > 0.0 && p1 < 1.0) {
            return domain("aql and lql must lie strictly between 0 and 1");
        }
        if p1 <= p0 {
            return domain("lql must exceed aql");
        }
        for (name, risk) in [("alpha", self.alpha), ("beta", self.beta)] {
            let v = risk.value();
            if !(v > 0.0 && v < 1.0) {
                return domain(format!("{name} must lie strictly between 0 and 1"));
            }
        }
        self.bounds.validate()
    }

    /// Minimum acceptance probability demanded at the AQL.
    pub fn producer_floor(&self) -> f64 {
        1.0 - self.alpha.value()
    }
}

/// A designed plan with its OC evaluated at both quality levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanDesign {
    pub kind: PlanKind,
    pub params: PlanParams,
    pub n: u64,
    pub oc_at_aql: Probability,
    pub oc_at_lql: Probability,
}

/// OC of `plan` under `kind`'s acceptance rule. Group and single plans ignore `i`.
pub fn oc_for(kind: PlanKind, plan: &PlanParams, p: Probability) -> Result<Probability> {
    match kind {
        PlanKind::Mchgsp => oc_mchgsp(plan, p),
        PlanKind::Gasip | PlanKind::Sasip => {
            plan.validate()?;
            oc_single(plan.n(), u64::from(plan.c), p)
        }
    }
}

/// Whether `plan` meets both the producer's and the consumer's constraint.
pub fn feasible(plan: &PlanParams, req: &DesignRequest, kind: PlanKind) -> Result<bool> {
    let at_aql = oc_for(kind, plan, req.p0)?;
    let at_lql = oc_for(kind, plan, req.p1)?;
    Ok(at_aql.value() >= req.producer_floor() && at_lql.value() <= req.beta.value())
}

fn finish(kind: PlanKind, params: PlanParams, req: &DesignRequest) -> Result<PlanDesign> {
    let oc_at_aql = oc_for(kind, &params, req.p0)?;
    let oc_at_lql = oc_for(kind, &params, req.p1)?;
    Ok(PlanDesign { kind, params, n: params.n(), oc_at_aql, oc_at_lql })
}

/// First `g` in `1..=g_max` at which `pick` finds a feasible `(c, i)`, given the
/// per-lot conformance probabilities at AQL and LQL for every `c`.
fn scan<F>(r: u32, req: &DesignRequest, kind: PlanKind, mut pick: F) -> Result<PlanDesign>
where
    F: FnMut(&[Probability], &[Probability]) -> Option<(u32, u32)>,
{
    req.validate()?;
    let bounds = req.bounds;
    for g in 1..=bounds.g_max {
        let n = u64::from(r) * u64::from(g);
        let at_aql = binom_cdf_prefix(n, u64::from(bounds.c_max), req.p0)?;
        let at_lql = binom_cdf_prefix(n, u64::from(bounds.c_max), req.p1)?;
        if let Some((c, i)) = pick(&at_aql, &at_lql) {
            let params = PlanParams::new(r, g, c, i)?;
            let design = finish(kind, params, req)?;
            debug_assert!(feasible(&params, req, kind)?);
            return Ok(design);
        }
    }
    Err(Error::Infeasible { kind, bounds })
}

/// Smallest single-stage acceptance number meeting both constraints.
fn single_stage_pick(req: &DesignRequest, at_aql: &[Probability], at_lql: &[Probability]) -> Option<(u32, u32)> {
    let floor = req.producer_floor();
    let beta = req.beta.value();
    at_aql
        .iter()
        .zip(at_lql)
        .position(|(a, b)| a.value() >= floor && b.value() <= beta)
        .map(|c| (c as u32, 1))
}

/// Minimal-`g` modified chain group plan.
pub fn design_mchgsp(req: &DesignRequest) -> Result<PlanDesign> {
    let floor = req.producer_floor();
    let beta = req.beta.value();
    let i_max = req.bounds.i_max;
    let tie_break = req.tie_break;
    let ok = |at_aql: &[Probability], at_lql: &[Probability], c: usize, i: u32| {
        let (Ok(a), Ok(b)) = (oc_mchsp(at_aql[c], i), oc_mchsp(at_lql[c], i)) else {
            return false;
        };
        a.value() >= floor && b.value() <= beta
    };
    scan(req.r, req, PlanKind::Mchgsp, |at_aql, at_lql| {
        let cs = 0..at_aql.len();
        match tie_break {
            TieBreak::CThenI => cs
                .flat_map(|c| (1..=i_max).map(move |i| (c, i)))
                .find(|&(c, i)| ok(at_aql, at_lql, c, i)),
            TieBreak::IThenC => (1..=i_max)
                .flat_map(|i| (0..at_aql.len()).map(move |c| (c, i)))
                .find(|&(c, i)| ok(at_aql, at_lql, c, i)),
        }
        .map(|(c, i)| (c as u32, i))
    })
}

/// Minimal-`g` group plan with groups of `req.r` items.
pub fn design_gasip(req: &DesignRequest) -> Result<PlanDesign> {
    scan(req.r, req, PlanKind::Gasip, |a, b| single_stage_pick(req, a, b))
}

/// Minimal-`n` single plan; `req.r` is ignored and `g_max` bounds `n`.
pub fn design_sasip(req: &DesignRequest) -> Result<PlanDesign> {
    scan(1, req, PlanKind::Sasip, |a, b| single_stage_pick(req, a, b))
}

pub fn design(kind: PlanKind, req: &DesignRequest) -> Result<PlanDesign> {
    match kind {
        PlanKind::Mchgsp => design_mchgsp(req),
        PlanKind::Gasip => design_gasip(req),
        PlanKind::Sasip => design_sasip(req),
    }
}
