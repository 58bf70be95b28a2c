//! Monte Carlo oracle for the analytic prices.
//!
//! Paths of `(X₁, X₂)` are simulated on a uniform grid. Within each step
//! the chance that firm `i` touched its barrier is the Brownian-bridge
//! probability `exp(−2(x−B)(x'−B)/(σ²Δt))`, and each path carries the
//! probabilities of the four alive/dead states instead of a sampled state.
//! Default events are placed at the step midpoint.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bond::BondContract;
use crate::cds::{CdsContract, Flavor};
use crate::error::{invalid, PricingError, Result};
use crate::model::PairModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    /// Account for crossings between grid points.
    pub bridge: bool,
    /// Pair each draw with its negation; `paths` must then be even.
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: 1_000_000,
            steps_per_year: 200,
            seed: 20_240_917,
            bridge: true,
            antithetic: false,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths < 10_000 {
            return Err(invalid("paths", self.paths as f64, "must be >= 10000"));
        }
        if self.steps_per_year < 50 {
            return Err(invalid("steps_per_year", self.steps_per_year as f64, "must be >= 50"));
        }
        if self.antithetic && self.paths % 2 == 1 {
            return Err(invalid("paths", self.paths as f64, "must be even with antithetic pairs"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub paths: usize,
}

impl McEstimate {
    /// `(value − mean) / std_error`; infinite if the estimate has no spread
    /// and disagrees.
    pub fn z_score(&self, value: f64) -> f64 {
        let diff = value - self.mean;
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff.abs() <= 1e-12 * value.abs().max(1.0) {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }
}

/// Premium and protection legs per unit notional, and their ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdsLegs {
    pub premium: McEstimate,
    pub protection: McEstimate,
    pub spread: McEstimate,
}

/// Everything one simulation can price, all on the same paths.
#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub survival: McEstimate,
    pub bond_price: Option<McEstimate>,
    /// Indexed like [`Flavor::ALL`].
    pub cds: [CdsLegs; 4],
}

impl McReport {
    pub fn cds_legs(&self, flavor: Flavor) -> &CdsLegs {
        let i = Flavor::ALL.iter().position(|&f| f == flavor).unwrap();
        &self.cds[i]
    }
}

/// Conditional expectations carried by one path.
#[derive(Debug, Clone, Copy, Default)]
struct PathOutcome {
    x1: f64,
    both_alive: f64,
    premium_first: f64,
    premium_second: f64,
    protection_first: f64,
    protection_second: f64,
    /// Firm one defaults strictly before firm two (ties split evenly).
    protection_one_first: f64,
}

struct Simulator {
    barriers: [f64; 2],
    drift_step: [f64; 2],
    vol_step: [f64; 2],
    /// `2 / (σ²Δt)` for the bridge probability.
    bridge_scale: [f64; 2],
    rho: f64,
    rho_bar: f64,
    steps: usize,
    dt: f64,
    rf: f64,
    bridge: bool,
}

impl Simulator {
    fn new(model: &PairModel, horizon: f64, mc: &McConfig) -> Self {
        let steps = (horizon * mc.steps_per_year as f64).ceil().max(1.0) as usize;
        let dt = horizon / steps as f64;
        let [a1, a2] = model.log_drifts();
        let (s1, s2) = (model.firm1.sigma, model.firm2.sigma);
        Self {
            barriers: model.log_barriers(),
            drift_step: [a1 * dt, a2 * dt],
            vol_step: [s1 * dt.sqrt(), s2 * dt.sqrt()],
            bridge_scale: [2.0 / (s1 * s1 * dt), 2.0 / (s2 * s2 * dt)],
            rho: model.rho,
            rho_bar: (1.0 - model.rho * model.rho).sqrt(),
            steps,
            dt,
            rf: model.rf,
            bridge: mc.bridge,
        }
    }

    /// Probability of staying above the barrier through one step.
    #[inline]
    fn stay(&self, i: usize, from: f64, to: f64) -> f64 {
        let b = self.barriers[i];
        if from <= b || to <= b {
            return 0.0;
        }
        if !self.bridge {
            return 1.0;
        }
        1.0 - (-(from - b) * (to - b) * self.bridge_scale[i]).exp()
    }

    /// Run one path; `sign` flips every normal draw for the antithetic twin.
    fn path(&self, normals: &[[f64; 2]], sign: f64) -> PathOutcome {
        let mut x = [0.0f64; 2];
        // State probabilities: both alive, only two alive, only one alive.
        let (mut aa, mut a2, mut a1) = (1.0f64, 0.0f64, 0.0f64);
        let mut out = PathOutcome::default();
        let r = self.rf;
        let step_discount = (-r * self.dt).exp();
        let half_step_discount = (-0.5 * r * self.dt).exp();
        // ∫ e^{−rs} ds over a whole step and over its second half, at s = 0.
        let (full, half) = if r == 0.0 {
            (self.dt, 0.5 * self.dt)
        } else {
            ((1.0 - step_discount) / r, (half_step_discount - step_discount) / r)
        };
        let mut disc = 1.0;
        for z in normals {
            let z1 = sign * z[0];
            let z2 = sign * (self.rho * z[0] + self.rho_bar * z[1]);
            let next = [
                x[0] + self.drift_step[0] + self.vol_step[0] * z1,
                x[1] + self.drift_step[1] + self.vol_step[1] * z2,
            ];
            let s1 = self.stay(0, x[0], next[0]);
            let s2 = self.stay(1, x[1], next[1]);
            let (f1, f2) = (1.0 - s1, 1.0 - s2);

            let first = aa * (1.0 - s1 * s2);
            let second = a2 * f2 + a1 * f1 + aa * f1 * f2;
            let one_first = aa * (f1 * s2 + 0.5 * f1 * f2);
            let mid = disc * half_step_discount;

            out.premium_first += disc * (aa * full - first * half);
            out.premium_second += disc * ((aa + a1 + a2) * full - second * half);
            out.protection_first += mid * first;
            out.protection_second += mid * second;
            out.protection_one_first += mid * one_first;

            a2 = a2 * s2 + aa * f1 * s2;
            a1 = a1 * s1 + aa * s1 * f2;
            aa *= s1 * s2;
            disc *= step_discount;
            x = next;
        }
        out.x1 = x[0];
        out.both_alive = aa;
        out
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Sum {
    total: f64,
    comp: f64,
}

impl Sum {
    fn add(&mut self, v: f64) {
        let t = self.total + v;
        if self.total.abs() >= v.abs() {
            self.comp += (self.total - t) + v;
        } else {
            self.comp += (v - t) + self.total;
        }
        self.total = t;
    }

    fn value(&self) -> f64 {
        self.total + self.comp
    }
}

/// First and second moments of a fixed set of per-sample values.
struct Moments<const K: usize> {
    n: usize,
    sums: [Sum; K],
    cross: [[Sum; K]; K],
}

impl<const K: usize> Moments<K> {
    fn new() -> Self {
        Self {
            n: 0,
            sums: [Sum::default(); K],
            cross: [[Sum::default(); K]; K],
        }
    }

    fn push(&mut self, v: [f64; K]) {
        self.n += 1;
        for i in 0..K {
            self.sums[i].add(v[i]);
            for j in i..K {
                self.cross[i][j].add(v[i] * v[j]);
            }
        }
    }

    fn mean(&self, i: usize) -> f64 {
        self.sums[i].value() / self.n as f64
    }

    /// Covariance of sample means.
    fn cov_of_mean(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (i.min(j), i.max(j));
        let n = self.n as f64;
        if self.n < 2 {
            return 0.0;
        }
        let c = (self.cross[i][j].value() - n * self.mean(i) * self.mean(j)) / (n - 1.0);
        c / n
    }

    fn estimate(&self, i: usize, paths: usize) -> McEstimate {
        McEstimate {
            mean: self.mean(i),
            std_error: self.cov_of_mean(i, i).max(0.0).sqrt(),
            paths,
        }
    }

    /// `mean(i) / mean(j)` with first-order error propagation.
    fn ratio(&self, i: usize, j: usize, paths: usize) -> McEstimate {
        let (p, l) = (self.mean(i), self.mean(j));
        let var = self.cov_of_mean(i, i) / (l * l) - 2.0 * p * self.cov_of_mean(i, j) / (l * l * l)
            + p * p * self.cov_of_mean(j, j) / (l * l * l * l);
        McEstimate {
            mean: p / l,
            std_error: var.max(0.0).sqrt(),
            paths,
        }
    }
}

/// Simulate `mc.paths` paths to `horizon` and accumulate `f` of each
/// outcome (averaged over antithetic pairs when enabled).
fn simulate<const K: usize>(
    model: &PairModel,
    horizon: f64,
    mc: &McConfig,
    f: impl Fn(&PathOutcome) -> [f64; K],
) -> Result<Moments<K>> {
    mc.validate()?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(PricingError::Domain {
            function: "mc simulate",
            detail: format!("horizon must be positive and finite, got {horizon}"),
        });
    }
    let sim = Simulator::new(model, horizon, mc);
    let samples = if mc.antithetic { mc.paths / 2 } else { mc.paths };
    let mut normals = vec![[0.0f64; 2]; sim.steps];
    let mut moments = Moments::new();
    for index in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
        rng.set_stream(index as u64);
        for z in normals.iter_mut() {
            *z = [rng.sample(StandardNormal), rng.sample(StandardNormal)];
        }
        let mut v = f(&sim.path(&normals, 1.0));
        if mc.antithetic {
            let w = f(&sim.path(&normals, -1.0));
            for (a, b) in v.iter_mut().zip(w) {
                *a = 0.5 * (*a + b);
            }
        }
        moments.push(v);
    }
    Ok(moments)
}

/// Probability that neither firm hits its barrier before `t`.
pub fn estimate_joint_survival(model: &PairModel, t: f64, mc: &McConfig) -> Result<McEstimate> {
    let m = simulate(model, t, mc, |o| [o.both_alive])?;
    Ok(m.estimate(0, mc.paths))
}

fn bond_payoff(model: &PairModel, bond: &BondContract, o: &PathOutcome) -> f64 {
    let firm = &model.firm1;
    let t = bond.maturity;
    let v1 = firm.v0 * (firm.gamma * t + o.x1).exp();
    let paid = o.both_alive * (bond.writedown * v1).min(bond.face) + (1.0 - o.both_alive) * bond.writedown * bond.face;
    (-model.rf * t).exp() * paid
}

/// Present value of firm one's contagion bond.
pub fn estimate_bond_price(model: &PairModel, bond: &BondContract, mc: &McConfig) -> Result<McEstimate> {
    let m = simulate(model, bond.maturity, mc, |o| [bond_payoff(model, bond, o)])?;
    Ok(m.estimate(0, mc.paths))
}

/// `(premium, protection)` per unit notional for one flavor. The
/// counterparty flavor buys protection on firm one from firm two and needs
/// no symmetry here.
fn legs(flavor: Flavor, recovery: f64, o: &PathOutcome) -> [f64; 2] {
    let loss = 1.0 - recovery;
    match flavor {
        Flavor::First | Flavor::SecondContagion => [o.premium_first, loss * o.protection_first],
        Flavor::Second => [o.premium_second, loss * o.protection_second],
        Flavor::CounterpartyHomogeneous => [o.premium_first, loss * o.protection_one_first],
    }
}

pub fn estimate_cds_legs(model: &PairModel, cds: &CdsContract, mc: &McConfig) -> Result<CdsLegs> {
    let m = simulate(model, cds.maturity, mc, |o| legs(cds.flavor, cds.recovery, o))?;
    Ok(CdsLegs {
        premium: m.estimate(0, mc.paths),
        protection: m.estimate(1, mc.paths),
        spread: m.ratio(1, 0, mc.paths),
    })
}

/// `E[e^{ε X₁(t)}; lower ≤ X₁(t) < upper, no default before t]`.
pub fn estimate_restricted_moment(
    model: &PairModel,
    t: f64,
    epsilon: f64,
    lower: f64,
    upper: f64,
    mc: &McConfig,
) -> Result<McEstimate> {
    let m = simulate(model, t, mc, |o| {
        let inside = o.x1 >= lower && o.x1 < upper;
        [if inside { o.both_alive * (epsilon * o.x1).exp() } else { 0.0 }]
    })?;
    Ok(m.estimate(0, mc.paths))
}

/// Survival, bond price (when `bond` is given) and all CDS legs at
/// `horizon`, from one set of paths.
pub fn simulate_report(
    model: &PairModel,
    horizon: f64,
    bond: Option<&BondContract>,
    recovery: f64,
    mc: &McConfig,
) -> Result<McReport> {
    if let Some(b) = bond {
        if (b.maturity - horizon).abs() > 1e-12 * horizon {
            return Err(invalid("maturity", b.maturity, "bond maturity must equal the simulation horizon"));
        }
    }
    if !(0.0..=1.0).contains(&recovery) {
        return Err(invalid("recovery", recovery, "must lie in [0, 1]"));
    }
    let m = simulate(model, horizon, mc, |o| {
        let [p0, q0] = legs(Flavor::First, recovery, o);
        let [p1, q1] = legs(Flavor::Second, recovery, o);
        let [_, q3] = legs(Flavor::CounterpartyHomogeneous, recovery, o);
        let price = bond.map_or(0.0, |b| bond_payoff(model, b, o));
        [o.both_alive, price, p0, q0, p1, q1, q3]
    })?;
    let n = mc.paths;
    let pair = |p: usize, q: usize| CdsLegs {
        premium: m.estimate(p, n),
        protection: m.estimate(q, n),
        spread: m.ratio(q, p, n),
    };
    Ok(McReport {
        survival: m.estimate(0, n),
        bond_price: bond.map(|_| m.estimate(1, n)),
        cds: [pair(2, 3), pair(4, 5), pair(2, 3), pair(2, 6)],
    })
}
