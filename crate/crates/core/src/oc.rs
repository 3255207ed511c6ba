//! Binomial kernels and operating-characteristic functions.
//!
//! All OC functions return the probability that a lot is accepted when each
//! sampled item is nonconforming independently with probability `p`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Roundoff slack tolerated outside [0, 1] before a result is treated as a bug.
const CLAMP_SLACK: f64 = 1e-12;

/// Below this log-magnitude `exp` would underflow to a subnormal or zero.
const LN_UNDERFLOW: f64 = -700.0;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return domain(format!("probability {value} outside [0, 1]"));
        }
        Ok(Probability(value))
    }

    /// Accepts values that overshoot [0, 1] by at most roundoff and snaps them
    /// to the boundary; anything further out is an internal error.
    pub fn clamped(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else if (-CLAMP_SLACK..0.0).contains(&value) {
            Ok(Probability(0.0))
        } else if value > 1.0 && value <= 1.0 + CLAMP_SLACK {
            Ok(Probability(1.0))
        } else {
            Err(Error::Internal(format!(
                "computed probability {value} outside [0, 1]"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl std::fmt::Display for Probability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Parameters of a (chain) group plan: `g` groups of `r` items, acceptance
/// number `c`, and `i` preceding lots consulted by the chain rule.
///
/// Plain group and single plans use `i = 1`; a single plan is `r = 1, g = n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlanParams {
    pub r: u32,
    pub g: u32,
    pub c: u32,
    pub i: u32,
}

impl PlanParams {
    pub fn new(r: u32, g: u32, c: u32, i: u32) -> Result<Self> {
        let plan = PlanParams { r, g, c, i };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return domain("group size r must be at least 1");
        }
        if self.g == 0 {
            return domain("group count g must be at least 1");
        }
        if self.i == 0 {
            return domain("chain length i must be at least 1");
        }
        if u64::from(self.c) > self.n() {
            return domain(format!(
                "acceptance number c = {} exceeds sample size n = {}",
                self.c,
                self.n()
            ));
        }
        Ok(())
    }

    /// Per-lot sample size `r * g`.
    #[inline]
    pub fn n(&self) -> u64 {
        u64::from(self.r) * u64::from(self.g)
    }
}

fn check_counts(n: u64, k: u64) -> Result<()> {
    if n == 0 {
        return domain("sample size n must be at least 1");
    }
    if k > n {
        return domain(format!("count {k} exceeds sample size {n}"));
    }
    Ok(())
}

/// A positive term stored as `mant * 2^exp2`, so the pmf recurrence can pass
/// through values far below `f64::MIN_POSITIVE` without losing relative
/// precision. Rescaling by powers of two is exact.
#[derive(Clone, Copy)]
struct Scaled {
    mant: f64,
    exp2: i32,
}

const RESCALE_BITS: i32 = 200;

impl Scaled {
    fn from_ln(ln_f: f64) -> Self {
        if ln_f >= LN_UNDERFLOW {
            return Scaled { mant: ln_f.exp(), exp2: 0 };
        }
        let e = (ln_f / std::f64::consts::LN_2).floor();
        Scaled { mant: (ln_f - e * std::f64::consts::LN_2).exp(), exp2: e as i32 }
    }

    #[inline]
    fn mul(&mut self, ratio: f64) {
        self.mant *= ratio;
        let big = 2f64.powi(RESCALE_BITS);
        if self.mant > big && self.exp2 < 0 {
            self.mant /= big;
            self.exp2 += RESCALE_BITS;
            if self.exp2 > 0 {
                self.mant *= 2f64.powi(self.exp2);
                self.exp2 = 0;
            }
        } else if self.mant < 1.0 / big {
            self.mant *= big;
            self.exp2 -= RESCALE_BITS;
        }
    }

    #[inline]
    fn value(self) -> f64 {
        match self.exp2 {
            0 => self.mant,
            e if e < -1400 => 0.0,
            e => {
                let half = e / 2;
                self.mant * 2f64.powi(half) * 2f64.powi(e - half)
            }
        }
    }
}

/// Walks the binomial pmf `f_0, f_1, ..., f_last` and hands each term to `visit`.
///
/// Starts from `ln f_0 = n ln(1 - p)` and advances with
/// `f_{k+1} = f_k * (n - k) / (k + 1) * p / (1 - p)`. Requires `0 < p < 1`.
fn walk_up(n: u64, last: u64, p: f64, mut visit: impl FnMut(u64, f64)) {
    let nf = n as f64;
    let odds = p / (1.0 - p);
    let mut f = Scaled::from_ln(nf * (-p).ln_1p());
    let mut k = 0u64;
    loop {
        visit(k, f.value());
        if k == last {
            break;
        }
        let kf = k as f64;
        f.mul((nf - kf) / (kf + 1.0) * odds);
        k += 1;
    }
}

/// Mirror of [`walk_up`]: `f_n, f_{n-1}, ..., f_first`, starting from
/// `ln f_n = n ln p`.
fn walk_down(n: u64, first: u64, p: f64, mut visit: impl FnMut(u64, f64)) {
    let nf = n as f64;
    let odds = (1.0 - p) / p;
    let mut f = Scaled::from_ln(nf * p.ln());
    let mut k = n;
    loop {
        visit(k, f.value());
        if k == first {
            break;
        }
        let kf = k as f64;
        f.mul(kf / (nf - kf + 1.0) * odds);
        k -= 1;
    }
}

/// Acceptance numbers below the mean are summed from the lower tail; the rest
/// are `1 - P(X > c)` with the upper tail summed from `k = n` downward, so
/// neither sum accumulates recurrence drift across the bulk of the support.
#[inline]
fn uses_lower_tail(n: u64, c: u64, p: f64) -> bool {
    (c as f64) < n as f64 * p
}

/// `C(n, k) p^k (1 - p)^(n - k)` without forming the binomial coefficient.
pub fn binom_pmf(n: u64, k: u64, p: Probability) -> Result<Probability> {
    check_counts(n, k)?;
    let p = p.value();
    if p == 0.0 {
        return Ok(if k == 0 { Probability::ONE } else { Probability::ZERO });
    }
    if p == 1.0 {
        return Ok(if k == n { Probability::ONE } else { Probability::ZERO });
    }
    let mut term = 0.0;
    let keep = |j: u64, f: f64| {
        if j == k {
            term = f;
        }
    };
    // Shorter walk from whichever end is nearer.
    if k <= n - k {
        walk_up(n, k, p, keep);
    } else {
        walk_down(n, k, p, keep);
    }
    Probability::clamped(term)
}

/// `P(X <= c)` for `X ~ Binomial(n, p)`.
pub fn binom_cdf(n: u64, c: u64, p: Probability) -> Result<Probability> {
    check_counts(n, c)?;
    let p = p.value();
    if p == 0.0 || c == n {
        return Ok(Probability::ONE);
    }
    if p == 1.0 {
        return Ok(Probability::ZERO);
    }
    let mut sum = 0.0;
    if uses_lower_tail(n, c, p) {
        walk_up(n, c, p, |_, f| sum += f);
        Probability::clamped(sum)
    } else {
        walk_down(n, c + 1, p, |_, f| sum += f);
        Probability::clamped(1.0 - sum)
    }
}

/// `P(X <= c)` for every `c` in `0..=c_max`, capped at `n`.
///
/// Bit-identical to calling [`binom_cdf`] for each `c`, but shares the
/// recurrence across acceptance numbers. The designer uses this to score every
/// acceptance number of a candidate group count at once.
pub fn binom_cdf_prefix(n: u64, c_max: u64, p: Probability) -> Result<Vec<Probability>> {
    check_counts(n, 0)?;
    let last = c_max.min(n);
    let p = p.value();
    if p == 0.0 {
        return Ok(vec![Probability::ONE; last as usize + 1]);
    }
    if p == 1.0 {
        let mut out = vec![Probability::ZERO; last as usize + 1];
        if last == n {
            out[last as usize] = Probability::ONE;
        }
        return Ok(out);
    }

    let mut out = vec![Probability::ZERO; last as usize + 1];
    // First acceptance number served by the upper tail.
    let split = (0..=last).find(|&c| !uses_lower_tail(n, c, p)).unwrap_or(last + 1);

    if split > 0 {
        let mut sum = 0.0;
        let mut lower = Vec::with_capacity(split as usize);
        walk_up(n, split - 1, p, |_, f| {
            sum += f;
            lower.push(sum);
        });
        for (slot, v) in out.iter_mut().zip(lower) {
            *slot = Probability::clamped(v)?;
        }
    }
    if split <= last {
        // tail[k] = sum of f_j for j in k..=n, accumulated from j = n down.
        let mut tail = vec![0.0; (n - split + 1) as usize];
        if split < n {
            let mut sum = 0.0;
            walk_down(n, split + 1, p, |k, f| {
                sum += f;
                tail[(k - split) as usize] = sum;
            });
        }
        for c in split..=last {
            out[c as usize] = if c == n {
                Probability::ONE
            } else {
                Probability::clamped(1.0 - tail[(c + 1 - split) as usize])?
            };
        }
    }
    Ok(out)
}

/// Lot-acceptance probability of a single-stage attribute plan: accept when at
/// most `c` of `n` sampled items are nonconforming.
///
/// With `n = r * g` this is the group plan's OC; with `r = 1` it is the
/// single plan's.
pub fn oc_single(n: u64, c: u64, p: Probability) -> Result<Probability> {
    binom_cdf(n, c, p)
}

/// Modified chain plan OC, `P * (P^i + i P^(i-1) (1 - P))`, where `P` is the
/// probability that one lot's sample conforms.
pub fn oc_mchsp(conforming: Probability, i: u32) -> Result<Probability> {
    if i == 0 {
        return domain("chain length i must be at least 1");
    }
    let p = conforming.value();
    // At i = 1 the bracket is identically one.
    let bracket = if i == 1 {
        1.0
    } else {
        let prev = p.powi(i as i32 - 1);
        prev * p + f64::from(i) * prev * (1.0 - p)
    };
    Probability::clamped(p * bracket)
}

/// Modified chain group plan OC: the chain OC applied to the group plan's
/// per-lot conformance probability.
pub fn oc_mchgsp(plan: &PlanParams, p: Probability) -> Result<Probability> {
    plan.validate()?;
    let conforming = oc_single(plan.n(), u64::from(plan.c), p)?;
    oc_mchsp(conforming, plan.i)
}
