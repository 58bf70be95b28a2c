//! Fair continuous-premium spreads of basket and counterparty default swaps.
//!
//! For a default time `τ` with survival curve `S(s) = ℙ(τ > s)` the spread is
//!
//! ```text
//! c = (1 − R) (1 − e^{−rT} S(T) − r L) / L,   L = ∫₀ᵀ e^{−rs} S(s) ds
//! ```
//!
//! where the numerator is the discounted default density integrated by parts.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, PricingError, Result};
use crate::model::{NumericsConfig, PairModel};
use crate::quadrature::integrate_time_leg;
use crate::survival::{joint_survival, marginal_survival};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    /// Pays on the first default of the pair.
    First,
    /// Pays on the second default, firms defaulting independently of each other's default.
    Second,
    /// Second-to-default when the first default drags the other firm down with it.
    SecondContagion,
    /// Protection on firm one bought from firm two, for a parameter-identical pair.
    CounterpartyHomogeneous,
}

impl Flavor {
    pub const ALL: [Flavor; 4] = [
        Flavor::First,
        Flavor::Second,
        Flavor::SecondContagion,
        Flavor::CounterpartyHomogeneous,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::First => "first",
            Flavor::Second => "second",
            Flavor::SecondContagion => "second_contagion",
            Flavor::CounterpartyHomogeneous => "counterparty_homogeneous",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Flavor {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Flavor::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown CDS flavor `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdsContract {
    pub notional: f64,
    pub maturity: f64,
    pub recovery: f64,
    pub flavor: Flavor,
}

impl CdsContract {
    pub fn new(notional: f64, maturity: f64, recovery: f64, flavor: Flavor) -> Result<Self> {
        if !(notional.is_finite() && notional > 0.0) {
            return Err(invalid("notional", notional, "must be positive"));
        }
        if !(maturity.is_finite() && maturity > 0.0) {
            return Err(invalid("maturity", maturity, "must be positive"));
        }
        if !(0.0..=1.0).contains(&recovery) {
            return Err(invalid("recovery", recovery, "must lie in [0, 1]"));
        }
        Ok(Self {
            notional,
            maturity,
            recovery,
            flavor,
        })
    }

    pub fn with_flavor(self, flavor: Flavor) -> Self {
        Self { flavor, ..self }
    }

    fn expect(&self, flavor: Flavor) -> Result<()> {
        if self.flavor == flavor {
            Ok(())
        } else {
            Err(PricingError::Precondition(format!(
                "contract flavor is {}, expected {flavor}",
                self.flavor
            )))
        }
    }
}

/// Spread for a default time whose survival curve is `survival`.
fn spread_from_curve(
    mut survival: impl FnMut(f64) -> Result<f64>,
    rf: f64,
    cds: &CdsContract,
    cfg: &NumericsConfig,
) -> Result<f64> {
    let t = cds.maturity;
    let annuity = integrate_time_leg(&mut survival, rf, t, cfg.time_nodes)?;
    if !(annuity > 0.0) {
        return Err(PricingError::Degenerate(format!(
            "premium annuity {annuity} must be positive"
        )));
    }
    let terminal = survival(t)?;
    let default_leg = (1.0 - (-rf * t).exp() * terminal - rf * annuity).max(0.0);
    Ok((1.0 - cds.recovery) * default_leg / annuity)
}

pub fn first_to_default_spread(model: &PairModel, cds: &CdsContract, cfg: &NumericsConfig) -> Result<f64> {
    cds.expect(Flavor::First)?;
    spread_from_curve(|s| joint_survival(model, s, cfg), model.rf, cds, cfg)
}

pub fn second_to_default_spread(model: &PairModel, cds: &CdsContract, cfg: &NumericsConfig) -> Result<f64> {
    cds.expect(Flavor::Second)?;
    let survival = |s: f64| -> Result<f64> {
        let s1 = marginal_survival(&model.firm1, model.rf, model.horizon, s)?;
        let s2 = marginal_survival(&model.firm2, model.rf, model.horizon, s)?;
        let both = joint_survival(model, s, cfg)?;
        Ok((s1 + s2 - both).clamp(0.0, 1.0))
    };
    spread_from_curve(survival, model.rf, cds, cfg)
}

/// Under contagion both firms go down at the first default, so this is the
/// first-to-default spread.
pub fn second_to_default_spread_contagion(model: &PairModel, cds: &CdsContract, cfg: &NumericsConfig) -> Result<f64> {
    cds.expect(Flavor::SecondContagion)?;
    if model.rho < 0.0 {
        return Err(invalid("rho", model.rho, "the contagion rule needs rho >= 0"));
    }
    first_to_default_spread(model, &cds.with_flavor(Flavor::First), cfg)
}

/// For identical firms each one is first to default with equal probability,
/// so the protection leg is half the first-to-default leg over the same
/// premium annuity.
pub fn counterparty_cds_spread_homogeneous(model: &PairModel, cds: &CdsContract, cfg: &NumericsConfig) -> Result<f64> {
    cds.expect(Flavor::CounterpartyHomogeneous)?;
    if !model.is_homogeneous() {
        return Err(PricingError::Precondition(
            "counterparty spread is only available for parameter-identical firms".into(),
        ));
    }
    Ok(0.5 * first_to_default_spread(model, &cds.with_flavor(Flavor::First), cfg)?)
}

/// Dispatch on the contract's flavor.
pub fn cds_spread(model: &PairModel, cds: &CdsContract, cfg: &NumericsConfig) -> Result<f64> {
    match cds.flavor {
        Flavor::First => first_to_default_spread(model, cds, cfg),
        Flavor::Second => second_to_default_spread(model, cds, cfg),
        Flavor::SecondContagion => second_to_default_spread_contagion(model, cds, cfg),
        Flavor::CounterpartyHomogeneous => counterparty_cds_spread_homogeneous(model, cds, cfg),
    }
}
