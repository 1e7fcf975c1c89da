//! Backward induction of branch weights and the weighted cost `Σ ∫ W^α`.
//!
//! On a branch of length `ℓ` with step multiplicity `m` and tip load `ω̄`,
//! the weight solves
//!
//! ```text
//! W(σ) = ∫_σ^ℓ f(W(t)) dt + m(σ) + ω̄,    σ ∈ (0, ℓ]
//! ```
//!
//! so on every constant piece of `m` it grows as `dW/dτ = f(W)` in the
//! backward variable `τ = ℓ - σ`, and it jumps up by the multiplicity jump
//! when a breakpoint is crossed toward the base. For `f(z) = c·z^β` a piece
//! with upper value `A` has the closed form
//! `W(σ) = (A^{1-β} + c(1-β)(σ_hi - σ))^{1/(1-β)}`.
//!
//! All positions inside a profile are local to the branch (`0` at the base).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flux::{FluxFunction, FluxKind};
use crate::network::{Branch, BranchId, Network, TOL};

/// Relative change of `W(0^+)` under step halving accepted by the numeric path.
pub const RK4_REL_TOL: f64 = 1e-9;
/// Relative tolerance of the Simpson rule used for sampled profiles.
pub const SIMPSON_REL_TOL: f64 = 1e-8;
/// Minimum number of Simpson nodes per segment of a sampled profile.
pub const SIMPSON_MIN_NODES: usize = 1025;

/// `∫_0^len (w_upper^{1-β} + c(1-β)t)^{α/(1-β)} dt`, the weighted cost of a
/// power-law stretch of length `len` whose upper end carries weight
/// `w_upper`. `c = 0` gives the constant integrand `w_upper^α`.
pub fn power_law_integral(w_upper: f64, c: f64, beta: f64, alpha: f64, len: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    if c == 0.0 {
        return w_upper.powf(alpha) * len;
    }
    let one_b = 1.0 - beta;
    let p = (1.0 + alpha - beta) / one_b;
    let denom = c * (1.0 + alpha - beta);
    let y = c * one_b * len;
    let x = w_upper.powf(one_b);
    if x == 0.0 {
        return y.powf(p) / denom;
    }
    // X^p·((1 + Y/X)^p - 1) without cancellation on short stretches
    w_upper.powf(1.0 + alpha - beta) * (p * (y / x).ln_1p()).exp_m1() / denom
}

/// Closed-form weight on `(s_lo, s_hi]`, with `W(s_hi) = top`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormSegment {
    pub s_lo: f64,
    pub s_hi: f64,
    pub top: f64,
    pub c: f64,
    pub beta: f64,
}

impl ClosedFormSegment {
    pub fn eval(&self, sigma: f64) -> f64 {
        if self.c == 0.0 {
            return self.top;
        }
        let one_b = 1.0 - self.beta;
        let w = (self.top.powf(one_b) + self.c * one_b * (self.s_hi - sigma).max(0.0))
            .powf(1.0 / one_b);
        w.max(self.top)
    }

    fn integral_pow(&self, alpha: f64, lo: f64, hi: f64) -> f64 {
        power_law_integral(self.eval(hi), self.c, self.beta, alpha, hi - lo)
    }
}

/// Weight sampled on a uniform grid over `[s_lo, s_hi]`; `slopes` holds
/// `dW/dσ = -f(W)` at the nodes for Hermite interpolation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledSegment {
    pub s_lo: f64,
    pub s_hi: f64,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl SampledSegment {
    pub fn step(&self) -> f64 {
        (self.s_hi - self.s_lo) / (self.values.len() - 1) as f64
    }

    pub fn eval(&self, sigma: f64) -> f64 {
        let h = self.step();
        let n = self.values.len() - 1;
        let t = ((sigma - self.s_lo) / h).clamp(0.0, n as f64);
        let i = (t.floor() as usize).min(n - 1);
        let u = t - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * d0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * d1
    }

    fn integral_pow(&self, alpha: f64, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let simpson = |nodes: usize| {
            let intervals = nodes - 1;
            let h = (hi - lo) / intervals as f64;
            let mut acc = self.eval(lo).powf(alpha) + self.eval(hi).powf(alpha);
            for k in 1..intervals {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * self.eval(lo + k as f64 * h).powf(alpha);
            }
            acc * h / 3.0
        };
        let mut nodes = SIMPSON_MIN_NODES;
        let mut prev = simpson(nodes);
        while nodes < (1 << 20) {
            nodes = 2 * nodes - 1;
            let next = simpson(nodes);
            if (next - prev).abs() <= SIMPSON_REL_TOL * next.abs() {
                return next;
            }
            prev = next;
        }
        prev
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "segments", rename_all = "snake_case")]
pub enum WeightRepr {
    ClosedForm(Vec<ClosedFormSegment>),
    Sampled(Vec<SampledSegment>),
}

/// Solved weight on one branch; segments are ordered from the base upward.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightProfile {
    pub branch_id: BranchId,
    pub length: f64,
    pub tip_load: f64,
    /// `W(0^+)`, the value the parent sees.
    #[serde(rename = "w_at_a_plus")]
    pub at_base: f64,
    #[serde(flatten)]
    pub repr: WeightRepr,
}

impl WeightProfile {
    fn segment_bounds(&self) -> Vec<(f64, f64)> {
        match &self.repr {
            WeightRepr::ClosedForm(s) => s.iter().map(|x| (x.s_lo, x.s_hi)).collect(),
            WeightRepr::Sampled(s) => s.iter().map(|x| (x.s_lo, x.s_hi)).collect(),
        }
    }

    fn segment_index(&self, sigma: f64) -> usize {
        let n = match &self.repr {
            WeightRepr::ClosedForm(s) => s.len(),
            WeightRepr::Sampled(s) => s.len(),
        };
        let hi = |k: usize| match &self.repr {
            WeightRepr::ClosedForm(s) => s[k].s_hi,
            WeightRepr::Sampled(s) => s[k].s_hi,
        };
        // first segment whose upper end reaches sigma (left-continuity)
        let mut lo = 0;
        let mut up = n - 1;
        while lo < up {
            let mid = (lo + up) / 2;
            if hi(mid) < sigma {
                lo = mid + 1;
            } else {
                up = mid;
            }
        }
        lo
    }

    /// `W(σ)` at a local position; `σ ≤ 0` gives `W(0^+)`.
    pub fn eval(&self, sigma: f64) -> f64 {
        let k = self.segment_index(sigma);
        match &self.repr {
            WeightRepr::ClosedForm(s) => s[k].eval(sigma),
            WeightRepr::Sampled(s) => s[k].eval(sigma),
        }
    }

    /// `W(ℓ) = m(ℓ) + ω̄`.
    pub fn at_tip(&self) -> f64 {
        match &self.repr {
            WeightRepr::ClosedForm(s) => s[s.len() - 1].top,
            WeightRepr::Sampled(s) => *s[s.len() - 1].values.last().unwrap(),
        }
    }

    /// `∫_lo^hi W(σ)^α dσ` over local positions.
    pub fn integral_pow_range(&self, alpha: f64, lo: f64, hi: f64) -> f64 {
        let mut total = 0.0;
        for (k, (s_lo, s_hi)) in self.segment_bounds().into_iter().enumerate() {
            let x = lo.max(s_lo);
            let y = hi.min(s_hi);
            if y <= x {
                continue;
            }
            total += match &self.repr {
                WeightRepr::ClosedForm(s) => s[k].integral_pow(alpha, x, y),
                WeightRepr::Sampled(s) => s[k].integral_pow(alpha, x, y),
            };
        }
        total
    }

    pub fn integral_pow(&self, alpha: f64) -> f64 {
        self.integral_pow_range(alpha, 0.0, self.length)
    }
}

pub type WeightMap = BTreeMap<BranchId, WeightProfile>;

fn closed_form(
    pieces: &[(f64, f64, f64)],
    c: f64,
    beta: f64,
    tip_load: f64,
) -> (Vec<ClosedFormSegment>, f64) {
    let mut segs = Vec::with_capacity(pieces.len());
    let mut top = pieces[pieces.len() - 1].2 + tip_load;
    for k in (0..pieces.len()).rev() {
        let (lo, hi, m) = pieces[k];
        let seg = ClosedFormSegment {
            s_lo: lo,
            s_hi: hi,
            top,
            c,
            beta,
        };
        let bottom = seg.eval(lo);
        segs.push(seg);
        if k > 0 {
            top = bottom + (pieces[k - 1].2 - m);
        } else {
            top = bottom;
        }
    }
    segs.reverse();
    (segs, top)
}

fn rk4_pass(
    pieces: &[(f64, f64, f64)],
    f: &FluxFunction,
    tip_load: f64,
    h: f64,
) -> Result<(Vec<SampledSegment>, f64)> {
    let mut segs = Vec::with_capacity(pieces.len());
    let mut w = pieces[pieces.len() - 1].2 + tip_load;
    for k in (0..pieces.len()).rev() {
        let (lo, hi, m) = pieces[k];
        let steps = (((hi - lo) / h).ceil() as usize).max(1);
        let dt = (hi - lo) / steps as f64;
        let mut values = Vec::with_capacity(steps + 1);
        let mut slopes = Vec::with_capacity(steps + 1);
        values.push(w);
        slopes.push(-f.eval_checked(w)?);
        for _ in 0..steps {
            let k1 = f.eval_checked(w)?;
            let k2 = f.eval_checked(w + 0.5 * dt * k1)?;
            let k3 = f.eval_checked(w + 0.5 * dt * k2)?;
            let k4 = f.eval_checked(w + dt * k3)?;
            w += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            values.push(w);
            slopes.push(-f.eval_checked(w)?);
        }
        // integrated from the tip downward; store from the base upward
        values.reverse();
        slopes.reverse();
        segs.push(SampledSegment {
            s_lo: lo,
            s_hi: hi,
            values,
            slopes,
        });
        if k > 0 {
            w += pieces[k - 1].2 - m;
        }
    }
    segs.reverse();
    Ok((segs, w))
}

/// Fixed-step RK4, halving the step until `W(0^+)` moves by less than
/// [`RK4_REL_TOL`] relative.
fn numeric(
    pieces: &[(f64, f64, f64)],
    f: &FluxFunction,
    tip_load: f64,
    length: f64,
) -> Result<(Vec<SampledSegment>, f64)> {
    let mut h = length / 32.0;
    let mut coarse = rk4_pass(pieces, f, tip_load, h)?;
    while h > length * 2f64.powi(-22) {
        h /= 2.0;
        let fine = rk4_pass(pieces, f, tip_load, h)?;
        if (fine.1 - coarse.1).abs() <= RK4_REL_TOL * fine.1.abs().max(f64::MIN_POSITIVE) {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::Convergence(format!(
        "RK4 did not settle below relative change {RK4_REL_TOL} (last step {h})"
    )))
}

/// Solves the weight on one branch given the load `ω̄` at its tip.
pub fn solve_branch(branch: &Branch, f: &FluxFunction, tip_load: f64) -> Result<WeightProfile> {
    if !(tip_load.is_finite() && tip_load >= 0.0) {
        return Err(Error::domain(format!(
            "tip load must be >= 0, got {tip_load}"
        )));
    }
    let length = branch.length();
    if !(length > 0.0) {
        return Err(Error::domain(format!(
            "branch {} has zero length",
            branch.id
        )));
    }
    let pieces: Vec<(f64, f64, f64)> = branch.multiplicity.intervals(length).collect();
    let (repr, at_base) = match f.kind() {
        FluxKind::Zero => {
            let (s, b) = closed_form(&pieces, 0.0, 0.0, tip_load);
            (WeightRepr::ClosedForm(s), b)
        }
        FluxKind::PowerLaw { c, beta } => {
            let (s, b) = closed_form(&pieces, *c, *beta, tip_load);
            (WeightRepr::ClosedForm(s), b)
        }
        FluxKind::Custom(_) => {
            let (s, b) = numeric(&pieces, f, tip_load, length)?;
            (WeightRepr::Sampled(s), b)
        }
    };
    Ok(WeightProfile {
        branch_id: branch.id,
        length,
        tip_load,
        at_base,
        repr,
    })
}

/// Weights as a vector aligned with `net.branches()`.
pub fn compute_weights_indexed(net: &Network, f: &FluxFunction) -> Result<Vec<WeightProfile>> {
    let layers = net.layer_indices()?;
    let mut solved: Vec<Option<WeightProfile>> = vec![None; net.len()];
    for layer in &layers {
        let results: Vec<Result<WeightProfile>> = layer
            .par_iter()
            .map(|&i| {
                let branch = &net.branches()[i];
                let mut load = 0.0;
                for &j in net.children_of(i) {
                    let child = solved[j]
                        .as_ref()
                        .expect("children solved in earlier layers");
                    load += child.at_base - net.branches()[j].multiplicity.at_base();
                }
                if load < -TOL {
                    return Err(Error::Consistency(format!("negative tip load {load}")));
                }
                solve_branch(branch, f, load.max(0.0)).map_err(|e| Error::at_branch(branch.id, e))
            })
            .collect();
        for (&i, r) in layer.iter().zip(results) {
            solved[i] = Some(r?);
        }
    }
    Ok(solved
        .into_iter()
        .map(|w| w.expect("every branch is layered"))
        .collect())
}

/// Weights on every branch, solved layer by layer from the tips to the root.
pub fn compute_weights(net: &Network, f: &FluxFunction) -> Result<WeightMap> {
    Ok(compute_weights_indexed(net, f)?
        .into_iter()
        .map(|w| (w.branch_id, w))
        .collect())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )))
    }
}

/// `Σ_i ∫_{a_i}^{b_i} W_i(s)^α ds`.
pub fn network_cost(net: &Network, weights: &WeightMap, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let mut total = 0.0;
    for br in net.branches() {
        let w = weights
            .get(&br.id)
            .ok_or_else(|| Error::Consistency(format!("no weight profile for branch {}", br.id)))?;
        total += w.integral_pow(alpha);
    }
    Ok(total)
}

/// [`network_cost`] for weights from [`compute_weights_indexed`].
pub fn network_cost_indexed(net: &Network, weights: &[WeightProfile], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if weights.len() != net.len() {
        return Err(Error::Consistency(format!(
            "{} weight profiles for {} branches",
            weights.len(),
            net.len()
        )));
    }
    Ok(weights.iter().map(|w| w.integral_pow(alpha)).sum())
}
