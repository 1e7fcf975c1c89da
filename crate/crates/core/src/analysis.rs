//! A priori bounds on weights and costs, the irrigability classifier and
//! level sweeps over dyadic and hybrid plans.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dyadic::{
    approximate_measure, build_dyadic_plan, build_hybrid_plan, BranchKind, DyadicGrid, DyadicPlan,
    HybridPlan,
};
use crate::error::{Error, Result};
use crate::flux::{FluxFunction, FluxKind};
use crate::measure::{AtomicMeasure, Measure};
use crate::solver::{
    compute_weights_indexed, network_cost_indexed, power_law_integral, WeightProfile,
};

/// Parameters of a power-law problem: dimension, cost exponent `α`, growth
/// law `c·z^β`, cube edge `L` and total mass `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regime {
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    #[serde(rename = "L")]
    pub edge: f64,
    #[serde(rename = "M")]
    pub mass: f64,
}

impl Regime {
    pub fn new(d: usize, alpha: f64, beta: f64, c: f64, edge: f64, mass: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("d must be >= 1"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::domain(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::domain(format!(
                "beta must lie in (0, 1), got {beta}"
            )));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::domain(format!("c must be > 0, got {c}")));
        }
        if !(edge.is_finite() && edge > 0.0) {
            return Err(Error::domain(format!("L must be > 0, got {edge}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::domain(format!("M must be > 0, got {mass}")));
        }
        Ok(Regime {
            d,
            alpha,
            beta,
            c,
            edge,
            mass,
        })
    }

    /// `1 - d(1-β)`, positive exactly when `β > 1 - 1/d`.
    pub fn gap(&self) -> f64 {
        1.0 - self.d as f64 * (1.0 - self.beta)
    }

    fn require_gap(&self) -> Result<f64> {
        let gap = self.gap();
        if gap > 0.0 {
            Ok(gap)
        } else {
            Err(Error::Regime(format!(
                "needs beta > 1 - 1/d = {}, got beta = {}",
                1.0 - 1.0 / self.d as f64,
                self.beta
            )))
        }
    }

    fn require_alpha(&self) -> Result<()> {
        if self.alpha > 1.0 - 1.0 / self.d as f64 {
            Ok(())
        } else {
            Err(Error::Regime(format!(
                "needs alpha > 1 - 1/d = {}, got alpha = {}",
                1.0 - 1.0 / self.d as f64,
                self.alpha
            )))
        }
    }

    /// `c(1-β)√d / (1 - 2^{-(1-d(1-β))})`, the growth accumulated along a
    /// root-to-leaf dyadic path in a unit cube.
    fn path_growth(&self) -> Result<f64> {
        let gap = self.require_gap()?;
        let d = self.d as f64;
        Ok(self.c * (1.0 - self.beta) * d.sqrt() / (1.0 - 2f64.powf(-gap)))
    }

    pub fn classify(&self) -> Classification {
        classify(self.d, self.alpha, self.beta)
    }
}

/// Uniform weight bound for dyadic plans of the Lebesgue measure on the unit
/// cube: `(1 + c(1-β)√d / (1 - 2^{-(1-d(1-β))}))^{1/(1-β)}`.
pub fn lemma31_weight_bound(r: &Regime) -> Result<f64> {
    Ok((1.0 + r.path_growth()?).powf(1.0 / (1.0 - r.beta)))
}

/// Uniform weight bound for dyadic plans of any measure of mass `M` on a cube
/// of edge `L`: `(M^{1-β} + c(1-β)√d L / (1 - 2^{-(1-d(1-β))}))^{1/(1-β)}`.
pub fn lemma32_weight_bound(r: &Regime) -> Result<f64> {
    let one_b = 1.0 - r.beta;
    Ok((r.mass.powf(one_b) + r.path_growth()? * r.edge).powf(1.0 / one_b))
}

/// Weight at the base of the level-`(n-k)` branches of the level-`n` dyadic
/// plan of the uniform measure of mass `M` on the cube of edge `L`:
///
/// ```text
/// ((M/2^{(n-k)d})^{1-β} + c(1-β)√d L/2^{n+1-k} Σ_{j=0}^{k} 2^{-(1-d(1-β))j})^{1/(1-β)}
/// ```
pub fn dyadic_level_weight(r: &Regime, n: u32, k: u32) -> Result<f64> {
    if k >= n {
        return Err(Error::domain(format!(
            "need 0 <= k < n, got k = {k}, n = {n}"
        )));
    }
    let d = r.d as f64;
    let one_b = 1.0 - r.beta;
    let gap = r.gap();
    let mass = r.mass / 2f64.powf((n - k) as f64 * d);
    let sum: f64 = (0..=k).map(|j| 2f64.powf(-gap * j as f64)).sum();
    let growth = r.c * one_b * d.sqrt() * r.edge / 2f64.powi((n + 1 - k) as i32) * sum;
    Ok((mass.powf(one_b) + growth).powf(1.0 / one_b))
}

/// `Σ_{ℓ≥1} 2^{ℓd} ℓ_ℓ ((M/2^{ℓd})^{1-β} + B_ℓ)^{α/(1-β)}` with branch length
/// `ℓ_ℓ = √d L/2^{ℓ+1}` and `B_ℓ = c(1-β) ℓ_ℓ / (1 - 2^{-(1-d(1-β))})`; `c = 0`
/// gives the Gilbert series `Σ 2^{ℓd} ℓ_ℓ (M/2^{ℓd})^α`.
fn level_series(d: usize, alpha: f64, beta: f64, c: f64, edge: f64, mass: f64) -> f64 {
    let df = d as f64;
    let one_b = 1.0 - beta;
    let gap = 1.0 - df * one_b;
    let growth = if c == 0.0 {
        0.0
    } else {
        c * one_b / (1.0 - 2f64.powf(-gap))
    };
    let mut total = 0.0;
    for l in 1..4000 {
        let count = 2f64.powf(l as f64 * df);
        let len = df.sqrt() * edge / 2f64.powi(l + 1);
        let m = mass / count;
        let w_pow = if c == 0.0 {
            m.powf(alpha)
        } else {
            (m.powf(one_b) + growth * len).powf(alpha / one_b)
        };
        let term = count * len * w_pow;
        total += term;
        if term <= 1e-18 * total {
            break;
        }
    }
    total
}

/// Cost bound valid for the dyadic plan of every level, for any measure of
/// mass `M` on the cube of edge `L`. Each level's branches are bounded by
/// the weight estimate at their base and the level sum is maximized by equal
/// masses, by concavity.
pub fn dyadic_cost_bound(r: &Regime) -> Result<f64> {
    r.require_gap()?;
    r.require_alpha()?;
    Ok(level_series(r.d, r.alpha, r.beta, r.c, r.edge, r.mass))
}

/// The same bound without growth (`f ≡ 0`); needs `α > 1 - 1/d`.
pub fn gilbert_cost_bound(d: usize, alpha: f64, edge: f64, mass: f64) -> Result<f64> {
    if !(alpha > 1.0 - 1.0 / d as f64 && alpha <= 1.0) {
        return Err(Error::Regime(format!(
            "needs 1 >= alpha > 1 - 1/d, got {alpha}"
        )));
    }
    Ok(level_series(d, alpha, 0.5, 0.0, edge, mass))
}

/// `M^α L + L^{1 + α/(1-β)}`, the shape of the uniform cost bound for general
/// measures.
pub fn cost_ceiling_shape(r: &Regime) -> f64 {
    r.mass.powf(r.alpha) * r.edge + r.edge.powf(1.0 + r.alpha / (1.0 - r.beta))
}

/// Worst case of the geometric-series bound for a unit-mass Gilbert plan:
/// with at most `C·2^{jd}` arcs at level `j`, each of length at most
/// `3·2^{-j}` and carrying equal flow, the total is at most
/// `3C^{1-α}/(2^{αd-d+1} - 1)`. `C` is taken from the observed arc counts.
pub fn gilbert_series_bound(d: usize, alpha: f64, arc_counts: &[usize]) -> Result<f64> {
    let exponent = alpha * d as f64 - d as f64 + 1.0;
    if !(exponent > 0.0) {
        return Err(Error::Regime(format!("needs alpha > 1 - 1/d, got {alpha}")));
    }
    let c = arc_counts
        .iter()
        .enumerate()
        .map(|(j, &n)| n as f64 / 2f64.powf((j + 1) as f64 * d as f64))
        .fold(0.0, f64::max);
    Ok(3.0 * c.powf(1.0 - alpha) / (2f64.powf(exponent) - 1.0))
}

/// `(E/r)^{1/α}`, an upper bound on the mass outside `B(0, r)` for any plan
/// of cost `E`.
pub fn tail_bound(cost: f64, alpha: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("r must be > 0, got {r}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if !(cost >= 0.0) {
        return Err(Error::domain(format!("cost must be >= 0, got {cost}")));
    }
    Ok((cost / r).powf(1.0 / alpha))
}

/// `count` radii spaced evenly in log scale over `[lo, hi]`.
pub fn log_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Radii at which `μ(ℝ^d \ B(0, r)) > (E/r)^{1/α}`.
pub fn tail_violations(
    mu: &AtomicMeasure,
    cost: f64,
    alpha: f64,
    radii: &[f64],
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for &r in radii {
        if mu.mass_outside_ball(r) > tail_bound(cost, alpha, r)? {
            out.push(r);
        }
    }
    Ok(out)
}

/// `δ^{-d} ∫_0^δ (δ^{d(1-β)} + c(1-β)(δ - t))^{α/(1-β)} dt`: the cost of
/// lifting a cube of side `δ` and mass `δ^d` over a distance `δ`, counted
/// once per cube of a partition into `δ^{-d}` cubes.
pub fn nonirrigability_lower_bound(r: &Regime, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    let cubes = delta.powi(-(r.d as i32));
    let mass = delta.powi(r.d as i32);
    Ok(cubes * power_law_integral(mass, r.c, r.beta, r.alpha, delta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Irrigable,
    NonIrrigable,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub reason: String,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} ({})", self.verdict, self.reason)
    }
}

/// Irrigability of an Ahlfors-regular measure of dimension `d` under
/// `f = c·z^β` and cost exponent `α`. Never reads `c`, `L` or `M`.
pub fn classify(d: usize, alpha: f64, beta: f64) -> Classification {
    let df = d as f64;
    let floor = 1.0 - 1.0 / df;
    let beta_floor = if d >= 2 {
        1.0 - 1.0 / (df - 1.0)
    } else {
        f64::NEG_INFINITY
    };
    let (verdict, reason) = if alpha < floor {
        (Verdict::NonIrrigable, "alpha < 1-1/d".to_string())
    } else if beta < beta_floor {
        (Verdict::NonIrrigable, "beta < 1-1/(d-1)".to_string())
    } else if alpha > floor && beta > floor {
        (
            Verdict::Irrigable,
            "alpha > 1-1/d and beta > 1-1/d".to_string(),
        )
    } else {
        let mut why = Vec::new();
        if alpha == floor {
            why.push("alpha = 1-1/d");
        }
        if beta == floor {
            why.push("beta = 1-1/d");
        } else if beta < floor {
            why.push("1-1/(d-1) <= beta < 1-1/d");
        }
        (Verdict::Undetermined, why.join(", "))
    };
    Classification { verdict, reason }
}

/// Cost of the branches ending at each level (entry `k - 1` for level `k`).
pub fn level_costs(plan: &DyadicPlan, weights: &[WeightProfile], alpha: f64) -> Vec<f64> {
    let depth = plan.levels.iter().copied().max().unwrap_or(0) as usize;
    let mut out = vec![0.0; depth];
    for (w, &k) in weights.iter().zip(&plan.levels) {
        out[k as usize - 1] += w.integral_pow(alpha);
    }
    out
}

/// Checkable bounds on a hybrid plan solved with `f = c·z^β`.
#[derive(Debug, Clone, Serialize)]
pub struct HybridCertificate {
    pub shortcut_count: usize,
    /// `M / z0`.
    pub count_bound: f64,
    pub max_shortcut_weight: f64,
    /// `e^{c√d L} M`.
    pub shortcut_weight_bound: f64,
    pub max_dyadic_weight: f64,
    /// `2^{1/(1-β)} z0`.
    pub dyadic_weight_bound: f64,
    pub count_ok: bool,
    pub shortcut_ok: bool,
    pub dyadic_ok: bool,
}

impl HybridCertificate {
    pub fn holds(&self) -> bool {
        self.count_ok && self.shortcut_ok && self.dyadic_ok
    }
}

pub fn hybrid_certificate(
    plan: &HybridPlan,
    weights: &[WeightProfile],
    f: &FluxFunction,
    edge: f64,
    mass: f64,
) -> Result<HybridCertificate> {
    let (c, beta) = f
        .power_params()
        .ok_or_else(|| Error::domain("hybrid certificates need a power-law flux"))?;
    let d = plan.network.dim() as f64;
    let max_of = |kind: BranchKind| {
        weights
            .iter()
            .zip(&plan.kinds)
            .filter(|(_, k)| **k == kind)
            .map(|(w, _)| w.at_base)
            .fold(0.0, f64::max)
    };
    let shortcut_count = plan.shortcut_count();
    let count_bound = mass / plan.z0;
    let max_shortcut_weight = max_of(BranchKind::Shortcut);
    let shortcut_weight_bound = (c * d.sqrt() * edge).exp() * mass;
    let max_dyadic_weight = max_of(BranchKind::Dyadic);
    let dyadic_weight_bound = 2f64.powf(1.0 / (1.0 - beta)) * plan.z0;
    Ok(HybridCertificate {
        shortcut_count,
        count_bound,
        max_shortcut_weight,
        shortcut_weight_bound,
        max_dyadic_weight,
        dyadic_weight_bound,
        count_ok: shortcut_count as f64 <= count_bound,
        shortcut_ok: max_shortcut_weight <= shortcut_weight_bound,
        dyadic_ok: max_dyadic_weight < dyadic_weight_bound,
    })
}

/// Settings shared by every level of a sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub edge: f64,
    pub alpha: f64,
    pub flux: FluxFunction,
    /// Build hybrid plans with this threshold instead of dyadic plans.
    pub z0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: u32,
    pub max_weight: f64,
    pub cost: f64,
    pub shortcut_count: usize,
    pub bound_weight: Option<f64>,
    pub bound_cost: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub d: usize,
    pub alpha: f64,
    pub c: Option<f64>,
    pub beta: Option<f64>,
    #[serde(rename = "L")]
    pub edge: f64,
    #[serde(rename = "M")]
    pub mass: f64,
    pub z0: Option<f64>,
    pub rows: Vec<SweepRow>,
    /// Rows exceeding an available bound.
    pub violations: Vec<String>,
}

fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "nan".into()
    }
}

impl SweepResult {
    /// `n,max_weight,cost,shortcut_count,bound_weight,bound_cost`, 17
    /// significant digits, `nan` for bounds that do not apply.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,max_weight,cost,shortcut_count,bound_weight,bound_cost\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.n,
                fmt_num(r.max_weight),
                fmt_num(r.cost),
                r.shortcut_count,
                fmt_num(r.bound_weight.unwrap_or(f64::NAN)),
                fmt_num(r.bound_cost.unwrap_or(f64::NAN)),
            );
        }
        s
    }

    pub fn costs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.cost).collect()
    }
}

/// Bounds `(weight, cost)` that apply to every level of a sweep.
fn sweep_bounds(cfg: &SweepConfig, d: usize, mass: f64) -> (Option<f64>, Option<f64>) {
    match (cfg.flux.kind(), cfg.z0) {
        (FluxKind::Zero, None) => (
            Some(mass),
            gilbert_cost_bound(d, cfg.alpha, cfg.edge, mass).ok(),
        ),
        (FluxKind::PowerLaw { c, beta }, None) => {
            match Regime::new(d, cfg.alpha, *beta, *c, cfg.edge, mass) {
                Ok(r) => (lemma32_weight_bound(&r).ok(), dyadic_cost_bound(&r).ok()),
                Err(_) => (None, None),
            }
        }
        (FluxKind::PowerLaw { c, beta }, Some(z0)) => {
            let dyadic = 2f64.powf(1.0 / (1.0 - beta)) * z0;
            let shortcut = (c * (d as f64).sqrt() * cfg.edge).exp() * mass;
            (Some(dyadic.max(shortcut)), None)
        }
        _ => (None, None),
    }
}

fn sweep_level(mu: &Measure, cfg: &SweepConfig, n: u32) -> Result<SweepRow> {
    let grid = DyadicGrid::new(mu.dim(), cfg.edge, n)?;
    let mu_n = approximate_measure(mu, &grid)?;
    let (network, shortcut_count) = match cfg.z0 {
        None => (build_dyadic_plan(&mu_n, &grid)?.network, 0),
        Some(z0) => {
            let h = build_hybrid_plan(&mu_n, &grid, &cfg.flux, z0)?;
            let count = h.shortcut_count();
            (h.network, count)
        }
    };
    let weights = compute_weights_indexed(&network, &cfg.flux)?;
    let cost = network_cost_indexed(&network, &weights, cfg.alpha)?;
    let max_weight = weights.iter().map(|w| w.at_base).fold(0.0, f64::max);
    Ok(SweepRow {
        n,
        max_weight,
        cost,
        shortcut_count,
        bound_weight: None,
        bound_cost: None,
    })
}

/// Builds and solves the plan of every level in `levels` (strictly
/// increasing) and records the bounds that apply.
pub fn sweep(mu: &Measure, cfg: &SweepConfig, levels: &[u32]) -> Result<SweepResult> {
    if levels.is_empty() {
        return Err(Error::domain("sweep needs at least one level"));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("sweep levels must be strictly increasing"));
    }
    let d = mu.dim();
    let mass = mu.total_mass();
    let (bound_weight, bound_cost) = sweep_bounds(cfg, d, mass);
    let mut rows = Vec::with_capacity(levels.len());
    let mut violations = Vec::new();
    for &n in levels {
        let mut row = sweep_level(mu, cfg, n).map_err(|e| Error::at_level(n, e))?;
        row.bound_weight = bound_weight;
        row.bound_cost = bound_cost;
        if let Some(b) = bound_weight {
            if row.max_weight > b {
                violations.push(format!(
                    "n = {n}: max weight {} > bound {b}",
                    row.max_weight
                ));
            }
        }
        if let Some(b) = bound_cost {
            if row.cost > b {
                violations.push(format!("n = {n}: cost {} > bound {b}", row.cost));
            }
        }
        rows.push(row);
    }
    let (c, beta) = match cfg.flux.power_params() {
        Some((c, b)) => (Some(c), Some(b)),
        None => (None, None),
    };
    Ok(SweepResult {
        d,
        alpha: cfg.alpha,
        c,
        beta,
        edge: cfg.edge,
        mass,
        z0: cfg.z0,
        rows,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn regime(d: usize, alpha: f64, beta: f64) -> Regime {
        Regime::new(d, alpha, beta, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn weight_bounds() {
        let r = regime(2, 0.85, 0.85);
        let expected = (1.0 + 0.15 * 2f64.sqrt() / (1.0 - 2f64.powf(-0.7))).powf(1.0 / 0.15);
        assert_relative_eq!(
            lemma31_weight_bound(&r).unwrap(),
            expected,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            lemma32_weight_bound(&r).unwrap(),
            expected,
            max_relative = 1e-14
        );
        let tiny = Regime::new(2, 0.85, 0.85, 1e-12, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            lemma31_weight_bound(&tiny).unwrap(),
            1.0,
            max_relative = 1e-9
        );
        assert!(matches!(
            lemma31_weight_bound(&regime(2, 0.9, 0.5)),
            Err(Error::Regime(_))
        ));

        let r = Regime::new(2, 0.9, 0.9, 1.0, 3.0, 2.0).unwrap();
        let expected =
            (2f64.powf(0.1) + 0.1 * 2f64.sqrt() * 3.0 / (1.0 - 2f64.powf(-0.8))).powf(10.0);
        assert_relative_eq!(
            lemma32_weight_bound(&r).unwrap(),
            expected,
            max_relative = 1e-13
        );
    }

    #[test]
    fn tail_bound_arithmetic() {
        assert_eq!(tail_bound(1.0, 0.5, 1.0).unwrap(), 1.0);
        assert_eq!(tail_bound(2.0, 1.0, 0.5).unwrap(), 4.0);
        assert!(tail_bound(1.0, 0.0, 1.0).is_err());
        assert!(tail_bound(1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn classifier() {
        assert_eq!(classify(2, 0.9, 0.9).verdict, Verdict::Irrigable);
        assert_eq!(classify(2, 0.4, 0.95).verdict, Verdict::NonIrrigable);
        assert_eq!(classify(3, 0.8, 0.55).verdict, Verdict::Undetermined);
        assert_eq!(classify(3, 0.8, 0.4).verdict, Verdict::NonIrrigable);
        assert_eq!(classify(2, 0.5, 0.9).verdict, Verdict::Undetermined);
        assert_eq!(classify(2, 0.9, 0.5).verdict, Verdict::Undetermined);
        assert_eq!(classify(3, 0.9, 0.5).verdict, Verdict::Undetermined);
    }

    #[test]
    fn lower_bound_against_quadrature() {
        let r = Regime::new(3, 0.8, 0.4, 1.0, 1.0, 1.0).unwrap();
        let delta: f64 = 0.1;
        let integrand = |t: f64| (delta.powf(1.8) + 0.6 * (delta - t)).powf(0.8 / 0.6);
        let n = 20000;
        let h = delta / n as f64;
        let mut acc = integrand(0.0) + integrand(delta);
        for k in 1..n {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * integrand(k as f64 * h);
        }
        let simpson = acc * h / 3.0 / delta.powi(3);
        assert_relative_eq!(
            nonirrigability_lower_bound(&r, delta).unwrap(),
            simpson,
            max_relative = 1e-10
        );
        assert!(nonirrigability_lower_bound(&r, 0.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let res = SweepResult {
            d: 2,
            alpha: 0.9,
            c: None,
            beta: None,
            edge: 1.0,
            mass: 1.0,
            z0: None,
            rows: vec![SweepRow {
                n: 1,
                max_weight: 0.25,
                cost: 1.0 / 3.0,
                shortcut_count: 0,
                bound_weight: Some(1.0),
                bound_cost: None,
            }],
            violations: vec![],
        };
        let csv = res.to_csv();
        let line = csv.lines().nth(1).unwrap();
        assert_eq!(
            line,
            "1,2.5000000000000000e-1,3.3333333333333331e-1,0,1.0000000000000000e0,nan"
        );
    }
}
