//! Monte Carlo check of the chained lot-acceptance rule.
//!
//! A stream of lots of constant quality `p` is inspected one after another.
//! Lot `t` conforms when its sample holds at most `c` nonconforming items, and
//! is accepted when it conforms and at most one of the `i` lots before it did
//! not. Conformance, not acceptance, feeds the window: a rejected lot still
//! counts as a conforming predecessor if its sample passed.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::oc::{oc_mchgsp, PlanParams, Probability};

/// |z| above this flags disagreement with the analytic OC.
pub const Z_FLAG: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub plan: PlanParams,
    pub p: Probability,
    pub lots: u64,
    pub seed: u64,
    /// Leading lots inspected but left out of the estimate, so every counted
    /// lot has a full history window.
    pub burn_in: u64,
}

impl SimConfig {
    /// Config with the minimal burn-in, `plan.i` lots.
    pub fn new(plan: PlanParams, p: Probability, lots: u64, seed: u64) -> Result<Self> {
        let cfg = SimConfig { plan, p, lots, seed, burn_in: u64::from(plan.i) };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        if self.burn_in < u64::from(self.plan.i) {
            return domain(format!(
                "burn_in {} shorter than chain length {}",
                self.burn_in, self.plan.i
            ));
        }
        if self.lots <= self.burn_in {
            return domain(format!(
                "lots ({}) must exceed burn_in ({})",
                self.lots, self.burn_in
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub lots_counted: u64,
    pub accepted: u64,
    pub rate: Probability,
    pub std_err: f64,
    pub seed: u64,
}

impl SimResult {
    fn from_counts(lots_counted: u64, accepted: u64, seed: u64) -> Result<Self> {
        let rate = accepted as f64 / lots_counted as f64;
        let std_err = (rate * (1.0 - rate) / lots_counted as f64).sqrt();
        Ok(SimResult { lots_counted, accepted, rate: Probability::new(rate)?, std_err, seed })
    }
}

/// Sliding record of the last `i` lots' conformance.
#[derive(Debug, Clone)]
pub struct ChainWindow {
    len: usize,
    history: VecDeque<bool>,
    failures: usize,
}

impl ChainWindow {
    pub fn new(i: u32) -> Self {
        let len = i as usize;
        ChainWindow { len, history: VecDeque::with_capacity(len), failures: 0 }
    }

    /// Decides the next lot given whether its sample conforms, then slides the
    /// window forward. Before `i` lots have been seen the missing history
    /// counts as conforming.
    pub fn judge(&mut self, conforms: bool) -> bool {
        let accept = conforms && self.failures <= 1;
        if self.history.len() == self.len && self.history.pop_front() == Some(false) {
            self.failures -= 1;
        }
        self.history.push_back(conforms);
        if !conforms {
            self.failures += 1;
        }
        accept
    }
}

/// Runs one seeded stream of `cfg.lots` lots.
pub fn simulate_chain(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let plan = cfg.plan;
    let defects = Binomial::new(plan.n(), cfg.p.value())
        .map_err(|e| Error::Domain(format!("binomial sampler: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut window = ChainWindow::new(plan.i);
    let mut accepted = 0u64;
    for t in 1..=cfg.lots {
        let conforms = defects.sample(&mut rng) <= u64::from(plan.c);
        if window.judge(conforms) && t > cfg.burn_in {
            accepted += 1;
        }
    }

    SimResult::from_counts(cfg.lots - cfg.burn_in, accepted, cfg.seed)
}

/// Runs `replications` independent streams in parallel and pools their counts.
///
/// Replication `k` is seeded with `cfg.seed + k` (wrapping); the pooled result
/// echoes `cfg.seed` and does not depend on thread scheduling.
pub fn simulate_replicated(cfg: &SimConfig, replications: u32) -> Result<SimResult> {
    if replications == 0 {
        return domain("replications must be at least 1");
    }
    let runs = (0..u64::from(replications))
        .into_par_iter()
        .map(|k| simulate_chain(&SimConfig { seed: cfg.seed.wrapping_add(k), ..*cfg }))
        .collect::<Result<Vec<_>>>()?;
    let (counted, accepted) = runs
        .iter()
        .fold((0, 0), |(n, a), r| (n + r.lots_counted, a + r.accepted));
    SimResult::from_counts(counted, accepted, cfg.seed)
}

/// Simulation measured against the closed-form chain group OC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub analytic: Probability,
    pub empirical: Probability,
    pub std_err: f64,
    /// `None` when the standard error is zero.
    pub z: Option<f64>,
    /// `|z| > 4`.
    pub flagged: bool,
    /// Zero standard error with the empirical rate differing from the analytic value.
    pub exact_disagreement: bool,
    pub sim: SimResult,
}

pub fn compare(sim: SimResult, analytic: Probability) -> Comparison {
    let diff = sim.rate.value() - analytic.value();
    let (z, exact_disagreement) = if sim.std_err > 0.0 {
        (Some(diff / sim.std_err), false)
    } else if diff == 0.0 {
        (Some(0.0), false)
    } else {
        (None, true)
    };
    Comparison {
        analytic,
        empirical: sim.rate,
        std_err: sim.std_err,
        z,
        flagged: exact_disagreement || z.is_some_and(|z| z.abs() > Z_FLAG),
        exact_disagreement,
        sim,
    }
}

pub fn compare_to_analytic(cfg: &SimConfig) -> Result<Comparison> {
    let sim = simulate_chain(cfg)?;
    let analytic = oc_mchgsp(&cfg.plan, cfg.p)?;
    Ok(compare(sim, analytic))
}
