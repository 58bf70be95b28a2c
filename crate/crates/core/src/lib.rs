//! Joint default of two firms whose values follow correlated geometric
//! Brownian motions with exponential default barriers, and the prices that
//! follow from it: a bond that restructures when either firm defaults, and
//! first-, second- and counterparty default swaps.

pub mod bond;
pub mod cds;
pub mod error;
pub mod mc;
pub mod model;
pub mod quadrature;
pub mod special_functions;
pub mod survival;

pub use bond::{
    bond_price, bond_yield, discounted_default_payment, discounted_maturity_payment, single_firm_price,
    single_firm_yield, BondContract,
};
pub use cds::{
    cds_spread, counterparty_cds_spread_homogeneous, first_to_default_spread, second_to_default_spread,
    second_to_default_spread_contagion, CdsContract, Flavor,
};
pub use error::{PricingError, Result};
pub use mc::{McConfig, McEstimate, McReport};
pub use model::{Firm, FirmParams, NumericsConfig, PairModel, PolarTransform};
pub use quadrature::GridKind;
pub use survival::{
    joint_survival, joint_survival_zero_drift, marginal_default_probability, marginal_survival,
    restricted_exp_moment, WedgeTermIntegrand,
};
