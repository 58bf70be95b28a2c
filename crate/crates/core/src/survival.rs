//! Joint first-passage survival of two correlated drifted Brownian motions.
//!
//! The killed transition density is expanded in the wedge eigenfunctions
//! `sin(nπθ/β) I_{nπ/β}(r r₀/t)`. Every quantity here is a sum over `n` of
//! angular integrals of radial integrals:
//!
//! ```text
//! (2/βt) e^{(a₁+ε)B₁ + a₂B₂ + bt} Σₙ sin(nπθ₀/β) ∫₀^β sin(nπθ/β) gₙ(θ) dθ
//! gₙ(θ) = ∫ r e^{-(r²+r₀²)/2t} e^{[A(θ) + εσ₁ sin(β−θ)] r} I_{nπ/β}(r r₀/t) dr
//! ```
//!
//! The radial factor is always evaluated as `e^{-(r−r₀)²/2t} · e^{-x}I_ν(x)`
//! with `x = r r₀/t`, so nothing overflows as `t → 0`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{PricingError, Result};
use crate::model::{FirmParams, NumericsConfig, PairModel, PolarTransform};
use crate::quadrature::{self, gauss_legendre, GridKind};
use crate::special_functions::{poisson_log_integrand, poisson_log_prefactor, poisson_window, scaled_unchecked};

/// Consecutive sub-tolerance terms required before the series is cut.
const QUIET_TERMS: usize = 4;
/// Log-ratio below the radial peak at which the integrand is dropped (e^{-40} ≈ 4e-18).
const RADIAL_LOG_DROP: f64 = 30.0;
/// Combined marginal default probability below which joint survival is
/// returned from the Fréchet bounds instead of the series.
const SHORT_TIME_DEFAULT_MASS: f64 = 1e-13;

/// Standard normal CDF.
pub(crate) fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// `(survival, default probability)` of `X = αt + σW` against a barrier `B ≤ 0`.
pub(crate) fn single_barrier(b: f64, alpha: f64, sigma: f64, t: f64) -> (f64, f64) {
    if b >= 0.0 {
        return (0.0, 1.0);
    }
    let sd = sigma * t.sqrt();
    let image = (2.0 * alpha * b / (sigma * sigma)).exp();
    let survival = norm_cdf((-b + alpha * t) / sd) - image * norm_cdf((b + alpha * t) / sd);
    let default = norm_cdf((b - alpha * t) / sd) + image * norm_cdf((b + alpha * t) / sd);
    (survival.clamp(0.0, 1.0), default.clamp(0.0, 1.0))
}

fn check_time(t: f64, function: &'static str) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(PricingError::Domain {
            function,
            detail: format!("time must be positive and finite, got {t}"),
        })
    }
}

/// `ℙ(min_{s≤t} X(s) ≥ B)` for one firm whose barrier is set by `horizon`.
pub fn marginal_survival(firm: &FirmParams, rf: f64, horizon: f64, t: f64) -> Result<f64> {
    check_time(t, "marginal_survival")?;
    let b = firm.log_barrier(horizon).min(0.0);
    Ok(single_barrier(b, firm.log_drift(rf), firm.sigma, t).0)
}

/// `1 − marginal_survival`, computed without cancellation.
pub fn marginal_default_probability(firm: &FirmParams, rf: f64, horizon: f64, t: f64) -> Result<f64> {
    check_time(t, "marginal_default_probability")?;
    let b = firm.log_barrier(horizon).min(0.0);
    Ok(single_barrier(b, firm.log_drift(rf), firm.sigma, t).1)
}

/// Joint survival when both marginal default probabilities are negligible,
/// or `None` when the series is needed.
fn short_time_survival(model: &PairModel, t: f64) -> Option<f64> {
    let q1 = marginal_default_probability(&model.firm1, model.rf, model.horizon, t).ok()?;
    let q2 = marginal_default_probability(&model.firm2, model.rf, model.horizon, t).ok()?;
    // P lies in [1 − q₁ − q₂, 1 − max(q₁, q₂)], an interval of width ≤ 1e-13.
    (q1 + q2 <= SHORT_TIME_DEFAULT_MASS).then(|| 1.0 - q1 - q2)
}

/// `ℙ(min X₁ ≥ B₁, min X₂ ≥ B₂ on [0, t])`.
pub fn joint_survival(model: &PairModel, t: f64, cfg: &NumericsConfig) -> Result<f64> {
    check_time(t, "joint_survival")?;
    cfg.validate()?;
    if model.starts_in_default() {
        return Ok(0.0);
    }
    if let Some(p) = short_time_survival(model, t) {
        return Ok(p);
    }
    let series = WedgeSeries::new(model, t, 0.0, None, cfg)?;
    Ok(series.sum()?.clamp(0.0, 1.0))
}

/// Joint survival for barriers growing at the firm-value drift (`α₁ = α₂ = 0`),
/// where the radial and angular integrals close into a single odd-`n` sum
/// of half-order Bessel functions at `r₀²/4t`.
pub fn joint_survival_zero_drift(model: &PairModel, t: f64, cfg: &NumericsConfig) -> Result<f64> {
    check_time(t, "joint_survival_zero_drift")?;
    cfg.validate()?;
    let [alpha1, alpha2] = model.log_drifts();
    if alpha1.abs() > 1e-12 || alpha2.abs() > 1e-12 {
        return Err(PricingError::Precondition(format!(
            "zero-drift formula needs gamma_i = rf - q_i - sigma_i^2/2 (alpha = {alpha1:e}, {alpha2:e})"
        )));
    }
    if model.starts_in_default() {
        return Ok(0.0);
    }
    if let Some(p) = short_time_survival(model, t) {
        return Ok(p);
    }
    let pt = model.polar_transform()?;
    let z = pt.r0 * pt.r0 / (4.0 * t);
    let scale = 2.0 * pt.r0 / (2.0 * PI * t).sqrt();
    let mut total = 0.0;
    let mut quiet = 0;
    let mut last = f64::INFINITY;
    for n in (1..=cfg.n_max).step_by(2) {
        let nu = pt.order(n);
        let bessel = scaled_unchecked(0.5 * (nu + 1.0), z) + scaled_unchecked(0.5 * (nu - 1.0), z);
        let term = scale / n as f64 * (n as f64 * PI * pt.theta0 / pt.beta).sin() * bessel;
        total += term;
        last = term.abs();
        if last < cfg.series_tol {
            quiet += 1;
            if quiet >= QUIET_TERMS {
                return Ok(total.clamp(0.0, 1.0));
            }
        } else {
            quiet = 0;
        }
    }
    Err(PricingError::NonConvergence {
        terms: cfg.n_max,
        last_term: last,
    })
}

/// `∫_{B₂}^∞ ∫_A^B e^{ε x₁} p(x₁, x₂, t) dx₁ dx₂` where `p` is the joint
/// density of `(X₁(t), X₂(t))` on the event that neither barrier was hit.
///
/// `upper` may be `f64::INFINITY`. With `ε = 0`, `A = B₁`, `B = ∞` this is
/// the joint survival probability.
pub fn restricted_exp_moment(
    model: &PairModel,
    t: f64,
    epsilon: f64,
    lower: f64,
    upper: f64,
    cfg: &NumericsConfig,
) -> Result<f64> {
    check_time(t, "restricted_exp_moment")?;
    cfg.validate()?;
    let [b1, _] = model.log_barriers();
    if !(lower.is_finite() && lower >= b1 - 1e-12) {
        return Err(PricingError::Domain {
            function: "restricted_exp_moment",
            detail: format!("lower limit {lower} must be finite and >= B1 = {b1}"),
        });
    }
    if upper.is_nan() || upper < lower {
        return Err(PricingError::Domain {
            function: "restricted_exp_moment",
            detail: format!("upper limit {upper} must be >= lower limit {lower}"),
        });
    }
    if !epsilon.is_finite() {
        return Err(PricingError::Domain {
            function: "restricted_exp_moment",
            detail: format!("exponent must be finite, got {epsilon}"),
        });
    }
    if model.starts_in_default() || upper == lower {
        return Ok(0.0);
    }
    let sigma1 = model.firm1.sigma;
    let band = ((lower - b1).max(0.0) / sigma1, (upper - b1) / sigma1);
    let series = WedgeSeries::new(model, t, epsilon, Some(band), cfg)?;
    Ok(series.sum()?.max(0.0))
}

/// The `n`-th term's triple integrand on the unit cube, with the Bessel
/// factor replaced by its Poisson integral
/// `e^{-x}I_ν(x) = (x/2)^ν/(√π Γ(ν+½)) ∫₀^π e^{x(cos φ − 1)} sin^{2ν}φ dφ`.
/// Coordinates are the angle, the radius within its window and `φ` within
/// its window.
///
/// Integrating it over `[0, 1]³` and multiplying by `sin(nπθ₀/β)` gives the
/// `n`-th term of [`restricted_exp_moment`].
pub struct WedgeTermIntegrand {
    series: WedgeSeries,
    n: usize,
    window: Option<RadialWindow>,
}

impl WedgeTermIntegrand {
    pub fn new(
        model: &PairModel,
        t: f64,
        epsilon: f64,
        lower: f64,
        upper: f64,
        n: usize,
        cfg: &NumericsConfig,
    ) -> Result<Self> {
        check_time(t, "WedgeTermIntegrand")?;
        let [b1, _] = model.log_barriers();
        let sigma1 = model.firm1.sigma;
        let band = ((lower - b1).max(0.0) / sigma1, (upper - b1) / sigma1);
        let series = WedgeSeries::new(model, t, epsilon, Some(band), cfg)?;
        let window = series.radial_window(n);
        Ok(Self { series, n, window })
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        match &self.window {
            Some(window) => self.series.cube_point(self.n, window, p),
            None => 0.0,
        }
    }

    /// `sin(nπθ₀/β)`, the factor outside the triple integral.
    pub fn start_factor(&self) -> f64 {
        self.series.start(self.n)
    }
}

/// Radial support of one series term.
struct RadialWindow {
    lo: f64,
    hi: f64,
    peak: f64,
    /// Width of the peak from the curvature of the log-integrand.
    scale: f64,
}

/// Shared evaluation state for one series.
struct WedgeSeries {
    pt: PolarTransform,
    t: f64,
    cfg: NumericsConfig,
    log_prefactor: f64,
    /// Radial exponent `c(θ) = c₁ sin(β − θ) + c₂ sin θ`.
    c1: f64,
    c2: f64,
    /// `r₀ / t`, so the Bessel argument is `k r`.
    k: f64,
    c_max: f64,
    /// Band `[A − B₁, B − B₁] / σ₁` for `x₁`; `None` is the whole wedge.
    band: Option<(f64, f64)>,
}

impl WedgeSeries {
    fn new(model: &PairModel, t: f64, epsilon: f64, band: Option<(f64, f64)>, cfg: &NumericsConfig) -> Result<Self> {
        let pt = model.polar_transform()?;
        let [b1, b2] = model.log_barriers();
        let log_prefactor = (2.0 / (pt.beta * t)).ln() + (pt.a1 + epsilon) * b1 + pt.a2 * b2 + pt.b * t;
        let c1 = (pt.a1 + epsilon) * pt.sigma1;
        let c2 = pt.a2 * pt.sigma2;
        let mut c_max = f64::NEG_INFINITY;
        for i in 0..=256 {
            let theta = pt.beta * i as f64 / 256.0;
            c_max = c_max.max(c1 * (pt.beta - theta).sin() + c2 * theta.sin());
        }
        // The sampled maximum can sit slightly below the true one.
        c_max += 1e-3 * (c1.abs() + c2.abs());
        Ok(Self {
            pt,
            t,
            cfg: *cfg,
            log_prefactor,
            c1,
            c2,
            k: pt.r0 / t,
            c_max,
            band,
        })
    }

    fn exponent_coeff(&self, theta: f64) -> f64 {
        self.c1 * (self.pt.beta - theta).sin() + self.c2 * theta.sin()
    }

    fn start(&self, n: usize) -> f64 {
        (n as f64 * PI * self.pt.theta0 / self.pt.beta).sin()
    }

    fn angular(&self, n: usize, theta: f64) -> f64 {
        (n as f64 * PI * theta / self.pt.beta).sin()
    }

    /// `r · exp(prefactor + c(θ) r − (r − r₀)²/2t)`, everything but the Bessel factor.
    fn radial_weight(&self, theta: f64, r: f64) -> f64 {
        let d = r - self.pt.r0;
        r * (self.log_prefactor + self.exponent_coeff(theta) * r - d * d / (2.0 * self.t)).exp()
    }

    /// Radial limits `[d_A(θ), d_B(θ)]` of the band at angle `θ`.
    fn band_limits(&self, theta: f64) -> (f64, f64) {
        match self.band {
            None => (0.0, f64::INFINITY),
            Some((lo, hi)) => {
                let s = (self.pt.beta - theta).sin();
                let lo = if lo == 0.0 { 0.0 } else { lo / s };
                let hi = if hi.is_infinite() { f64::INFINITY } else { hi / s };
                (lo, hi)
            }
        }
    }

    /// Map `(a, u) ∈ [0,1]²` to `(θ, r)` inside the wedge, the radial window
    /// and the band; returns the Jacobian too.
    ///
    /// The radius goes through a normal quantile centred on the radial peak
    /// with twice its width, which flattens the Gaussian factor for the
    /// nested Clenshaw–Curtis rules.
    fn map_unit_square(&self, window: &RadialWindow, a: f64, u: f64) -> Option<(f64, f64, f64)> {
        let theta = self.pt.beta * a;
        let (d_lo, d_hi) = self.band_limits(theta);
        let lo = window.lo.max(d_lo);
        let hi = window.hi.min(d_hi);
        if !(hi > lo) {
            return None;
        }
        let width = 2.0 * window.scale;
        let u_lo = norm_cdf((lo - window.peak) / width);
        let u_hi = norm_cdf((hi - window.peak) / width);
        let q = u_lo + (u_hi - u_lo) * u;
        if !(q > 0.0 && q < 1.0) {
            return None;
        }
        let z = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * q);
        let r = (window.peak + width * z).clamp(lo, hi);
        let density = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
        Some((theta, r, self.pt.beta * (u_hi - u_lo) * width / density))
    }

    /// Log of the largest radial integrand over angles (without prefactor).
    fn log_envelope(&self, nu: f64, r: f64) -> f64 {
        if r <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let d = r - self.pt.r0;
        r.ln() + self.c_max * r - d * d / (2.0 * self.t) + scaled_unchecked(nu, self.k * r).ln()
    }

    /// Radial interval outside which the `n`-th integrand is below e^{-40}
    /// of its peak for every angle. `None` if the term underflows entirely.
    fn radial_window(&self, n: usize) -> Option<RadialWindow> {
        let nu = self.pt.order(n);
        let sd = self.t.sqrt();
        let mut reach = self.pt.r0 + self.c_max.max(0.0) * self.t + 12.0 * sd + 3.0 * ((nu + 1.0) * self.t).sqrt();
        let scan = 96;
        let (mut best_r, mut best) = (0.0, f64::NEG_INFINITY);
        for _ in 0..8 {
            best = f64::NEG_INFINITY;
            let mut best_i = 0;
            for i in 1..=scan {
                let r = reach * i as f64 / scan as f64;
                let v = self.log_envelope(nu, r);
                if v > best {
                    best = v;
                    best_i = i;
                    best_r = r;
                }
            }
            if best_i < scan {
                break;
            }
            reach *= 2.0;
        }
        if !best.is_finite() {
            return None;
        }
        // Refine the peak inside its scan bracket.
        let h = reach / scan as f64;
        let (mut a, mut b) = ((best_r - h).max(0.0), best_r + h);
        for _ in 0..40 {
            let m1 = a + (b - a) * 0.382;
            let m2 = a + (b - a) * 0.618;
            if self.log_envelope(nu, m1) < self.log_envelope(nu, m2) {
                a = m1;
            } else {
                b = m2;
            }
        }
        let peak_r = 0.5 * (a + b);
        let peak = self.log_envelope(nu, peak_r).max(best);
        let floor = peak - RADIAL_LOG_DROP;
        let step = 0.25 * sd.min(peak_r.max(sd));

        let mut hi = peak_r;
        let mut stride = step;
        loop {
            hi += stride;
            if self.log_envelope(nu, hi) < floor {
                break;
            }
            stride *= 1.25;
        }
        let mut lo = peak_r;
        stride = step;
        loop {
            lo -= stride;
            if lo <= 0.0 {
                lo = 0.0;
                break;
            }
            if self.log_envelope(nu, lo) < floor {
                break;
            }
            stride *= 1.25;
        }
        let curvature = {
            let h = 1e-3 * sd;
            let f = |r: f64| self.log_envelope(nu, r);
            (f(peak_r + h) - 2.0 * f(peak_r) + f(peak_r - h)) / (h * h)
        };
        let scale = if curvature < 0.0 { (-curvature).sqrt().recip() } else { sd };
        Some(RadialWindow {
            lo,
            hi,
            peak: peak_r,
            scale,
        })
    }

    /// Composite rule on `[0, β]` resolving `sin(nπθ/β)` (about n/2 periods).
    fn theta_panels(&self, n: usize) -> usize {
        1 + 4 * n / self.cfg.theta_nodes
    }

    /// `∫₀^β sin(nπθ/β) gₙ(θ) dθ` with tensor Gauss–Legendre in (θ, r) and
    /// the series/asymptotic Bessel kernel.
    fn term_tensor(&self, n: usize) -> f64 {
        let Some(window) = self.radial_window(n) else {
            return 0.0;
        };
        let nu = self.pt.order(n);
        let theta_rule = gauss_legendre(self.cfg.theta_nodes);
        let r_rule = gauss_legendre(self.cfg.r_nodes);
        let panels = self.theta_panels(n);
        let beta = self.pt.beta;

        if self.band.is_none() {
            // Radial nodes are shared by every angle: evaluate Bessel once per node.
            let radial: Vec<(f64, f64)> = r_rule
                .mapped(window.lo, window.hi)
                .map(|(r, w)| {
                    let d = r - self.pt.r0;
                    let log_base = self.log_prefactor - d * d / (2.0 * self.t);
                    (r, w * r * log_base.exp() * scaled_unchecked(nu, self.k * r))
                })
                .collect();
            let g = |theta: f64| -> f64 {
                let c = self.exponent_coeff(theta);
                radial.iter().map(|&(r, wb)| wb * (c * r).exp()).sum()
            };
            if self.c1 == 0.0 && self.c2 == 0.0 {
                let g0 = g(0.0);
                return g0 * quadrature::composite(|theta| self.angular(n, theta), 0.0, beta, panels, &theta_rule);
            }
            return quadrature::composite(|theta| self.angular(n, theta) * g(theta), 0.0, beta, panels, &theta_rule);
        }

        quadrature::composite(
            |theta| {
                let (d_lo, d_hi) = self.band_limits(theta);
                let lo = window.lo.max(d_lo);
                let hi = window.hi.min(d_hi);
                if !(hi > lo) {
                    return 0.0;
                }
                let g: f64 = r_rule
                    .mapped(lo, hi)
                    .map(|(r, w)| w * self.radial_weight(theta, r) * scaled_unchecked(nu, self.k * r))
                    .sum();
                self.angular(n, theta) * g
            },
            0.0,
            beta,
            panels,
            &theta_rule,
        )
    }

    /// Triple integrand at a point of the unit cube (see [`WedgeTermIntegrand`]).
    fn cube_point(&self, n: usize, window: &RadialWindow, p: [f64; 3]) -> f64 {
        let Some((theta, r, jac)) = self.map_unit_square(window, p[0], p[1]) else {
            return 0.0;
        };
        let x = r * self.k;
        if x <= 0.0 {
            return 0.0;
        }
        let nu = self.pt.order(n);
        let (lo, hi) = poisson_window(nu, x);
        let phi = lo + (hi - lo) * p[2];
        let d = r - self.pt.r0;
        let log = self.log_prefactor + self.exponent_coeff(theta) * r - d * d / (2.0 * self.t)
            + r.ln()
            + poisson_log_prefactor(nu, x)
            + poisson_log_integrand(nu, x, phi);
        jac * (hi - lo) * self.angular(n, theta) * log.exp()
    }

    /// Same integral on a Smolyak grid over (θ, r, φ), with the Bessel factor
    /// taken from its Poisson integral.
    fn term_sparse(&self, n: usize) -> f64 {
        let Some(window) = self.radial_window(n) else {
            return 0.0;
        };
        let grid = quadrature::sparse_grid_3d(self.cfg.sparse_level);
        grid.points
            .iter()
            .zip(&grid.weights)
            .map(|(&p, w)| w * self.cube_point(n, &window, p))
            .sum()
    }

    fn term(&self, n: usize) -> f64 {
        let start = self.start(n);
        if start == 0.0 {
            return 0.0;
        }
        let inner = match self.cfg.grid_kind {
            GridKind::Tensor => self.term_tensor(n),
            GridKind::Sparse => self.term_sparse(n),
        };
        start * inner
    }

    fn sum(&self) -> Result<f64> {
        let mut total = 0.0;
        let mut quiet = 0;
        let mut last = f64::INFINITY;
        for n in 1..=self.cfg.n_max {
            let term = self.term(n);
            if !term.is_finite() {
                return Err(PricingError::NonFinite(format!("series term n={n} (t={})", self.t)));
            }
            total += term;
            last = term.abs();
            if last < self.cfg.series_tol {
                quiet += 1;
                if quiet >= QUIET_TERMS {
                    return Ok(total);
                }
            } else {
                quiet = 0;
            }
        }
        Err(PricingError::NonConvergence {
            terms: self.cfg.n_max,
            last_term: last,
        })
    }
}
