//! Growth laws `f` driving the weight ODE `dW/dτ = f(W)`.
//!
//! A flux law must satisfy `f(0) = 0`, be nondecreasing and concave on
//! `[0, ∞)`. The power law `c·z^β` admits closed-form weights; anything else
//! goes through the numeric path of the solver.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Exponents at or above this value make `1/(1-β)` overflow for ordinary masses.
pub const MAX_BETA: f64 = 0.999;

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum FluxKind {
    Zero,
    PowerLaw { c: f64, beta: f64 },
    Custom(Evaluator),
}

#[derive(Clone)]
pub struct FluxFunction {
    kind: FluxKind,
    claims_concave: bool,
}

impl FluxFunction {
    /// `f ≡ 0`: weights reduce to the flux and the cost to the Gilbert cost.
    pub fn zero() -> Self {
        FluxFunction {
            kind: FluxKind::Zero,
            claims_concave: true,
        }
    }

    pub fn power_law(c: f64, beta: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::domain(format!("power law needs c > 0, got {c}")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::domain(format!(
                "power law needs 0 < beta < 1, got {beta}"
            )));
        }
        if beta >= MAX_BETA {
            return Err(Error::domain(format!(
                "beta = {beta} too close to 1 (limit {MAX_BETA})"
            )));
        }
        Ok(FluxFunction {
            kind: FluxKind::PowerLaw { c, beta },
            claims_concave: true,
        })
    }

    /// Wraps an arbitrary growth law. `claims_concave` is metadata only; use
    /// [`FluxFunction::sampled_violations`] to probe the claim.
    pub fn custom<F>(f: F, claims_concave: bool) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        FluxFunction {
            kind: FluxKind::Custom(Arc::new(f)),
            claims_concave,
        }
    }

    pub fn kind(&self) -> &FluxKind {
        &self.kind
    }

    pub fn claims_concave(&self) -> bool {
        self.claims_concave
    }

    /// `(c, β)` for a power law.
    pub fn power_params(&self) -> Option<(f64, f64)> {
        match self.kind {
            FluxKind::PowerLaw { c, beta } => Some((c, beta)),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, FluxKind::Zero)
    }

    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        match &self.kind {
            FluxKind::Zero => 0.0,
            FluxKind::PowerLaw { c, beta } => {
                if z <= 0.0 {
                    0.0
                } else {
                    c * z.powf(*beta)
                }
            }
            FluxKind::Custom(f) => f(z),
        }
    }

    /// Evaluates and rejects negative or non-finite values.
    pub(crate) fn eval_checked(&self, z: f64) -> Result<f64> {
        let value = self.eval(z);
        if value.is_finite() && value >= 0.0 {
            Ok(value)
        } else {
            Err(Error::Flux { z, value })
        }
    }

    /// Probes `f(0) = 0`, nonnegativity, monotonicity and (if claimed)
    /// concavity on a uniform grid of `samples + 1` points over `[0, z_max]`.
    pub fn sampled_violations(&self, z_max: f64, samples: usize) -> Vec<String> {
        let mut out = Vec::new();
        let f0 = self.eval(0.0);
        if f0 != 0.0 {
            out.push(format!("f(0) = {f0}, expected 0"));
        }
        let n = samples.max(2);
        let h = z_max / n as f64;
        let values: Vec<f64> = (0..=n).map(|i| self.eval(i as f64 * h)).collect();
        for (i, v) in values.iter().enumerate() {
            if !(v.is_finite() && *v >= 0.0) {
                out.push(format!(
                    "f({}) = {v} is negative or not finite",
                    i as f64 * h
                ));
            }
        }
        for (i, w) in values.windows(2).enumerate() {
            if w[1] < w[0] {
                out.push(format!(
                    "f decreases on [{}, {}]",
                    i as f64 * h,
                    (i + 1) as f64 * h
                ));
            }
        }
        if self.claims_concave {
            for (i, w) in values.windows(3).enumerate() {
                let second = w[2] - 2.0 * w[1] + w[0];
                if second > 1e-12 * (1.0 + w[1].abs()) {
                    out.push(format!("f not concave near z = {}", (i + 1) as f64 * h));
                }
            }
        }
        out
    }
}

impl fmt::Debug for FluxFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FluxKind::Zero => write!(f, "FluxFunction::Zero"),
            FluxKind::PowerLaw { c, beta } => write!(f, "FluxFunction::PowerLaw({c}·z^{beta})"),
            FluxKind::Custom(_) => write!(
                f,
                "FluxFunction::Custom(claims_concave = {})",
                self.claims_concave
            ),
        }
    }
}
