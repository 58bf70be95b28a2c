//! Economic inputs of the two-firm model and the log-space / polar quantities
//! derived from them.

use std::f64::consts::PI;

use crate::error::{invalid, PricingError, Result};
use crate::quadrature::GridKind;

/// Largest admissible |ρ|; the wedge collapses as |ρ| → 1.
pub const MAX_ABS_CORRELATION: f64 = 0.99;

/// One firm: initial value, volatility, dividend yield, barrier growth rate
/// and the face value of its zero-coupon debt.
///
/// The default barrier is `b(t) = face · e^{−γ (T − t)}` for the contract
/// horizon `T`, so the log-barrier depends on the horizon and lives on
/// [`PairModel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirmParams {
    pub v0: f64,
    pub sigma: f64,
    pub q: f64,
    pub gamma: f64,
    pub face: f64,
}

impl FirmParams {
    pub fn new(v0: f64, sigma: f64, q: f64, gamma: f64, face: f64) -> Result<Self> {
        if !(v0.is_finite() && v0 > 0.0) {
            return Err(invalid("v0", v0, "initial firm value must be positive"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid("sigma", sigma, "volatility must be positive"));
        }
        if !(face.is_finite() && face > 0.0) {
            return Err(invalid("face", face, "face value must be positive"));
        }
        if !q.is_finite() {
            return Err(invalid("q", q, "dividend yield must be finite"));
        }
        if !gamma.is_finite() {
            return Err(invalid("gamma", gamma, "barrier growth rate must be finite"));
        }
        Ok(Self {
            v0,
            sigma,
            q,
            gamma,
            face,
        })
    }

    /// Build a firm from its initial credit quality `V(0) / b(0)`, i.e.
    /// `V(0) = quality · face · e^{−γ T}`.
    pub fn from_credit_quality(quality: f64, sigma: f64, q: f64, gamma: f64, face: f64, horizon: f64) -> Result<Self> {
        if !(quality.is_finite() && quality >= 1.0) {
            return Err(invalid("quality", quality, "initial credit quality must be >= 1"));
        }
        Self::new(quality * face * (-gamma * horizon).exp(), sigma, q, gamma, face)
    }

    /// Barrier level at time `t` for a contract maturing at `horizon`.
    pub fn barrier(&self, t: f64, horizon: f64) -> f64 {
        self.face * (-self.gamma * (horizon - t)).exp()
    }

    /// `B = ln(b(0) / V(0)) ≤ 0`.
    pub fn log_barrier(&self, horizon: f64) -> f64 {
        (self.barrier(0.0, horizon) / self.v0).ln()
    }

    /// `V(0) / b(0)`.
    pub fn credit_quality(&self, horizon: f64) -> f64 {
        self.v0 / self.barrier(0.0, horizon)
    }

    /// `(1/σ) ln(V(0)/b(0))`, the barrier distance in units of volatility.
    pub fn scaled_distance_to_default(&self, horizon: f64) -> f64 {
        -self.log_barrier(horizon) / self.sigma
    }

    /// Drift of `X(t) = ln(V(t)/V(0)) − γ t`: `α = r_f − q − γ − σ²/2`.
    pub fn log_drift(&self, rf: f64) -> f64 {
        rf - self.q - self.gamma - 0.5 * self.sigma * self.sigma
    }
}

/// Two firms with correlated values, a flat risk-free rate and a common
/// contract horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairModel {
    pub firm1: FirmParams,
    pub firm2: FirmParams,
    pub rho: f64,
    pub rf: f64,
    pub horizon: f64,
}

impl PairModel {
    pub fn new(firm1: FirmParams, firm2: FirmParams, rho: f64, rf: f64, horizon: f64) -> Result<Self> {
        if !(rho.is_finite() && rho.abs() < 1.0) {
            return Err(invalid("rho", rho, "correlation must lie strictly inside (-1, 1)"));
        }
        if rho.abs() > MAX_ABS_CORRELATION {
            return Err(invalid(
                "rho",
                rho,
                format!("|rho| > {MAX_ABS_CORRELATION} degenerates the wedge and is not supported"),
            ));
        }
        if !rf.is_finite() {
            return Err(invalid("rf", rf, "risk-free rate must be finite"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(invalid("horizon", horizon, "horizon must be positive"));
        }
        for (name, firm) in [("firm1", &firm1), ("firm2", &firm2)] {
            let quality = firm.credit_quality(horizon);
            // Allow rounding noise from the quality → V(0) conversion.
            if quality < 1.0 - 1e-12 {
                return Err(PricingError::InvalidParameter {
                    name: if name == "firm1" { "quality1" } else { "quality2" },
                    value: quality,
                    reason: "firm starts below its default barrier".into(),
                });
            }
        }
        Ok(Self {
            firm1,
            firm2,
            rho,
            rf,
            horizon,
        })
    }

    pub fn firm(&self, which: Firm) -> &FirmParams {
        match which {
            Firm::One => &self.firm1,
            Firm::Two => &self.firm2,
        }
    }

    /// `(B₁, B₂)`, clamped to be non-positive.
    pub fn log_barriers(&self) -> [f64; 2] {
        [
            self.firm1.log_barrier(self.horizon).min(0.0),
            self.firm2.log_barrier(self.horizon).min(0.0),
        ]
    }

    /// `(α₁, α₂)`.
    pub fn log_drifts(&self) -> [f64; 2] {
        [self.firm1.log_drift(self.rf), self.firm2.log_drift(self.rf)]
    }

    /// Either firm starts on its barrier, so joint survival is identically 0.
    pub fn starts_in_default(&self) -> bool {
        let [b1, b2] = self.log_barriers();
        b1 == 0.0 || b2 == 0.0
    }

    /// Same model with the firms' roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            firm1: self.firm2,
            firm2: self.firm1,
            ..*self
        }
    }

    /// Both firms carry identical parameters.
    pub fn is_homogeneous(&self) -> bool {
        self.firm1 == self.firm2
    }

    pub fn polar_transform(&self) -> Result<PolarTransform> {
        PolarTransform::new(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Firm {
    One,
    Two,
}

/// Wedge coordinates of the killed two-dimensional Brownian motion.
///
/// With `x₁ = B₁ + σ₁ r sin(β − θ)` and `x₂ = B₂ + σ₂ r sin θ`, the survival
/// region `{x₁ ≥ B₁, x₂ ≥ B₂}` becomes the wedge `0 ≤ θ ≤ β` and the start
/// point `(0, 0)` sits at `(r₀, θ₀)`. `a₁, a₂, b` remove the drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarTransform {
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub beta: f64,
    pub r0: f64,
    pub theta0: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl PolarTransform {
    pub fn new(model: &PairModel) -> Result<Self> {
        let rho = model.rho;
        if !(rho.is_finite() && rho.abs() < 1.0) {
            return Err(invalid("rho", rho, "correlation must lie strictly inside (-1, 1)"));
        }
        let [b1, b2] = model.log_barriers();
        if b1 == 0.0 && b2 == 0.0 {
            return Err(PricingError::Degenerate(
                "both firms start on their default barriers; joint survival is 0".into(),
            ));
        }
        // Rounding noise in r_f − q − γ − σ²/2 should not leave spurious drift.
        let [alpha1, alpha2] = model.log_drifts().map(|a| if a.abs() < 1e-14 { 0.0 } else { a });
        let s1 = model.firm1.sigma;
        let s2 = model.firm2.sigma;
        let one_minus = 1.0 - rho * rho;
        let sin_beta = one_minus.sqrt();

        let a1 = (alpha1 * s2 - rho * alpha2 * s1) / (one_minus * s1 * s1 * s2);
        let a2 = (alpha2 * s1 - rho * alpha1 * s2) / (one_minus * s1 * s2 * s2);
        let b = -alpha1 * a1 - alpha2 * a2
            + 0.5 * s1 * s1 * a1 * a1
            + rho * s1 * s2 * a1 * a2
            + 0.5 * s2 * s2 * a2 * a2;
        // cos β = −ρ, sin β = √(1−ρ²), β ∈ (0, π).
        let beta = sin_beta.atan2(-rho);
        let r0 = (b1 * b1 / (s1 * s1) - 2.0 * rho * b1 * b2 / (s1 * s2) + b2 * b2 / (s2 * s2)).max(0.0).sqrt()
            / sin_beta;
        // Start point: −B₁ = σ₁ r₀ sin(β − θ₀), −B₂ = σ₂ r₀ sin θ₀.
        let theta0 = (-s1 * b2 * sin_beta).atan2(rho * s1 * b2 - s2 * b1).clamp(0.0, beta);
        Ok(Self {
            a1,
            a2,
            b,
            beta,
            r0,
            theta0,
            sigma1: s1,
            sigma2: s2,
        })
    }

    /// `A(θ) = a₁σ₁ sin(β − θ) + a₂σ₂ sin θ`.
    pub fn amplitude(&self, theta: f64) -> f64 {
        self.a1 * self.sigma1 * (self.beta - theta).sin() + self.a2 * self.sigma2 * theta.sin()
    }

    /// Eigenfunction order `nπ/β` of the `n`-th series term.
    pub fn order(&self, n: usize) -> f64 {
        n as f64 * PI / self.beta
    }

    pub fn is_driftless(&self) -> bool {
        self.a1 == 0.0 && self.a2 == 0.0 && self.b == 0.0
    }
}

/// Resolution and truncation controls for the series and quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericsConfig {
    /// Absolute size below which a series term counts as negligible.
    pub series_tol: f64,
    /// Hard cap on the number of series terms.
    pub n_max: usize,
    pub theta_nodes: usize,
    pub r_nodes: usize,
    /// Nodes for the exponential-tail part of the Bessel integral form.
    pub inner_nodes: usize,
    pub grid_kind: GridKind,
    /// Smolyak level of the sparse backend.
    pub sparse_level: u32,
    pub time_nodes: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            series_tol: 1e-10,
            n_max: 200,
            theta_nodes: 64,
            r_nodes: 96,
            inner_nodes: 64,
            grid_kind: GridKind::Tensor,
            sparse_level: 11,
            time_nodes: 64,
        }
    }
}

impl NumericsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_tol.is_finite() && self.series_tol > 0.0) {
            return Err(invalid("series_tol", self.series_tol, "must be positive"));
        }
        if self.n_max < 8 {
            return Err(invalid("n_max", self.n_max as f64, "must be >= 8"));
        }
        for (name, v) in [
            ("theta_nodes", self.theta_nodes),
            ("r_nodes", self.r_nodes),
            ("inner_nodes", self.inner_nodes),
            ("time_nodes", self.time_nodes),
        ] {
            if v < 4 {
                return Err(invalid(name, v as f64, "node counts must be >= 4"));
            }
        }
        if self.sparse_level < 2 {
            return Err(invalid("sparse_level", self.sparse_level as f64, "must be >= 2"));
        }
        Ok(())
    }

    /// Every resolution doubled, including the series cap.
    pub fn refined(&self) -> Self {
        Self {
            series_tol: self.series_tol,
            n_max: self.n_max * 2,
            theta_nodes: self.theta_nodes * 2,
            r_nodes: self.r_nodes * 2,
            inner_nodes: self.inner_nodes * 2,
            grid_kind: self.grid_kind,
            sparse_level: self.sparse_level + 1,
            time_nodes: self.time_nodes * 2,
        }
    }
}
