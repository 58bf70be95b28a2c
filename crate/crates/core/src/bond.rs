//! Zero-coupon bond of firm one when either firm's default triggers
//! restructuring of firm one's debt.
//!
//! At maturity the holder receives `min(ω V₁(T), K)` if neither firm has
//! defaulted, otherwise `ω K`. With `X₁(T) = ln(V₁(T)/V₁(0)) − γ₁T` the
//! full-repayment threshold is `X₁(T) ≥ d = B₁ − ln ω`.

use crate::error::{invalid, PricingError, Result};
use crate::model::{FirmParams, NumericsConfig, PairModel};
use crate::survival::{joint_survival, norm_cdf, restricted_exp_moment, single_barrier};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondContract {
    pub face: f64,
    pub maturity: f64,
    /// Fraction ω of value retained by bondholders on restructuring.
    pub writedown: f64,
}

impl BondContract {
    pub fn new(face: f64, maturity: f64, writedown: f64) -> Result<Self> {
        if !(face.is_finite() && face > 0.0) {
            return Err(invalid("face", face, "must be positive"));
        }
        if !(maturity.is_finite() && maturity > 0.0) {
            return Err(invalid("maturity", maturity, "must be positive"));
        }
        if !(writedown > 0.0 && writedown <= 1.0) {
            return Err(invalid("writedown", writedown, "must lie in (0, 1]"));
        }
        Ok(Self {
            face,
            maturity,
            writedown,
        })
    }

    /// `ω ≤ min(1, e^{(r_f − γ)T})` guarantees the restructured payment never
    /// beats the bond's own value; larger `ω` is allowed but logged.
    pub fn consistent_with(&self, firm: &FirmParams, rf: f64) -> bool {
        let bound = ((rf - firm.gamma) * self.maturity).exp().min(1.0);
        self.writedown <= bound * (1.0 + 1e-12)
    }

    /// `d = B − ln ω`, the log-value above which the face is repaid in full.
    fn repayment_threshold(&self, log_barrier: f64) -> f64 {
        log_barrier - self.writedown.ln()
    }

    fn check_against(&self, firm: &FirmParams, rf: f64, horizon: f64) -> Result<()> {
        if (self.maturity - horizon).abs() > 1e-12 * horizon.max(1.0) {
            return Err(invalid(
                "maturity",
                self.maturity,
                &format!("must equal the model horizon {horizon} that sets the barrier"),
            ));
        }
        if (self.face - firm.face).abs() > 1e-12 * firm.face {
            return Err(invalid(
                "face",
                self.face,
                &format!("must equal the firm's debt face value {}", firm.face),
            ));
        }
        if !self.consistent_with(firm, rf) {
            log::warn!(
                "write-down {} exceeds min(1, exp((rf - gamma) T)) = {}; restructuring may pay more than the bond is worth",
                self.writedown,
                ((rf - firm.gamma) * self.maturity).exp().min(1.0)
            );
        }
        Ok(())
    }
}

fn check_pair(model: &PairModel, bond: &BondContract) -> Result<()> {
    if model.rho < 0.0 {
        return Err(invalid("rho", model.rho, "the contagion bond needs rho >= 0"));
    }
    bond.check_against(&model.firm1, model.rf, model.horizon)
}

/// Present value of the maturity payment on joint survival.
pub fn discounted_maturity_payment(model: &PairModel, bond: &BondContract, cfg: &NumericsConfig) -> Result<f64> {
    check_pair(model, bond)?;
    if model.starts_in_default() {
        return Ok(0.0);
    }
    let t = bond.maturity;
    let [b1, _] = model.log_barriers();
    let d = bond.repayment_threshold(b1);
    let discount = (-model.rf * t).exp();
    let full = restricted_exp_moment(model, t, 0.0, d, f64::INFINITY, cfg)?;
    let partial = restricted_exp_moment(model, t, 1.0, b1, d, cfg)?;
    let firm = &model.firm1;
    let dmp = discount * (bond.face * full + bond.writedown * firm.v0 * (firm.gamma * t).exp() * partial);
    Ok(dmp.clamp(0.0, bond.face * discount))
}

/// Present value of `ω K` paid at maturity after either firm defaults.
pub fn discounted_default_payment(model: &PairModel, bond: &BondContract, cfg: &NumericsConfig) -> Result<f64> {
    check_pair(model, bond)?;
    let p = joint_survival(model, bond.maturity, cfg)?;
    Ok(bond.writedown * bond.face * (-model.rf * bond.maturity).exp() * (1.0 - p))
}

pub fn bond_price(model: &PairModel, bond: &BondContract, cfg: &NumericsConfig) -> Result<f64> {
    Ok(discounted_maturity_payment(model, bond, cfg)? + discounted_default_payment(model, bond, cfg)?)
}

fn yield_from_price(price: f64, bond: &BondContract) -> Result<f64> {
    if !(price > 0.0) || !price.is_finite() {
        return Err(PricingError::Degenerate(format!(
            "bond price {price} must be positive to define a yield"
        )));
    }
    Ok(-(price / bond.face).ln() / bond.maturity)
}

/// Continuously compounded yield `−ln(C/K)/T` of the contagion bond.
pub fn bond_yield(model: &PairModel, bond: &BondContract, cfg: &NumericsConfig) -> Result<f64> {
    yield_from_price(bond_price(model, bond, cfg)?, bond)
}

/// Price of the same bond for a firm without a contagion partner.
pub fn single_firm_price(firm: &FirmParams, rf: f64, bond: &BondContract) -> Result<f64> {
    bond.check_against(firm, rf, bond.maturity)?;
    let t = bond.maturity;
    let b = firm.log_barrier(t).min(0.0);
    let discount = (-rf * t).exp();
    if b >= 0.0 {
        return Ok(bond.writedown * bond.face * discount);
    }
    let alpha = firm.log_drift(rf);
    let s2 = firm.sigma * firm.sigma;
    let sd = firm.sigma * t.sqrt();
    let d = bond.repayment_threshold(b);
    let image = (2.0 * alpha * b / s2).exp();
    let mean = alpha * t;

    // ℙ(X(T) ≥ d, no crossing) by reflection.
    let full = norm_cdf((mean - d) / sd) - image * norm_cdf((2.0 * b + mean - d) / sd);
    // E[e^{X(T)}; B ≤ X(T) < d, no crossing].
    let shifted = mean + s2 * t;
    let direct = (mean + 0.5 * s2 * t).exp() * (norm_cdf((d - shifted) / sd) - norm_cdf((b - shifted) / sd));
    let mirrored = image
        * (2.0 * b + mean + 0.5 * s2 * t).exp()
        * (norm_cdf((d - 2.0 * b - shifted) / sd) - norm_cdf((-b - shifted) / sd));
    let partial = (direct - mirrored).max(0.0);

    let dmp = discount * (bond.face * full.max(0.0) + bond.writedown * firm.v0 * (firm.gamma * t).exp() * partial);
    let (_, default) = single_barrier(b, alpha, firm.sigma, t);
    let ddp = bond.writedown * bond.face * discount * default;
    Ok(dmp.min(bond.face * discount) + ddp)
}

/// Yield of the isolated-firm benchmark.
pub fn single_firm_yield(firm: &FirmParams, rf: f64, bond: &BondContract) -> Result<f64> {
    yield_from_price(single_firm_price(firm, rf, bond)?, bond)
}
