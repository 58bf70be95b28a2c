//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::process::ExitCode;
use std::time::Instant;

use credit_contagion::mc::{simulate_report, McConfig};
use credit_contagion::quadrature::{integrate_3d, GridSpec};
use credit_contagion::{
    bond_yield, cds_spread, joint_survival, joint_survival_zero_drift, marginal_survival, restricted_exp_moment,
    BondContract, CdsContract, FirmParams, Flavor, GridKind, NumericsConfig, PairModel, Result, WedgeTermIntegrand,
};

const RF: f64 = 0.05;
const FACE: f64 = 100.0;
const T: f64 = 5.0;

const SERIES_AGREEMENT: f64 = 1e-8;
const FACTORIZATION: f64 = 1e-6;
const REDUCTION: f64 = 1e-8;
const MC_SIGMAS: f64 = 3.0;
const RISK_FREE_BP: f64 = 0.1;
const DISTANCE_TO_DEFAULT: f64 = 3.4657;
const DISTANCE_DIGITS: f64 = 5e-5;
const RECOVERY_RATIO: f64 = 7.0 / 3.0;
const RECOVERY_RATIO_REL: f64 = 1e-12;
const COUNTERPARTY_REL: f64 = 1e-10;
const REFINEMENT_BP: f64 = 0.1;
const BACKEND_REL: f64 = 1e-7;

const RHO_GRID: [f64; 3] = [0.0, 0.3, 0.6];
const T_GRID: [f64; 3] = [1.0, 3.0, 5.0];
const QUALITY_GRID: [f64; 3] = [1.5, 2.0, 3.0];
const SIGMA_GRID: [f64; 3] = [0.15, 0.2, 0.3];
const BOND_RHOS: [f64; 5] = [0.0, 0.2, 0.4, 0.6, 0.8];

fn firm(quality: f64, sigma: f64, gamma: f64) -> FirmParams {
    FirmParams::from_credit_quality(quality, sigma, 0.0, gamma, FACE, T).unwrap()
}

fn base_firm() -> FirmParams {
    firm(2.0, 0.2, 0.03)
}

fn pair(f1: FirmParams, f2: FirmParams, rho: f64) -> PairModel {
    PairModel::new(f1, f2, rho, RF, T).unwrap()
}

fn base(rho: f64) -> PairModel {
    pair(base_firm(), base_firm(), rho)
}

fn bond(omega: f64) -> BondContract {
    BondContract::new(FACE, T, omega).unwrap()
}

fn cds(maturity: f64, recovery: f64, flavor: Flavor) -> CdsContract {
    CdsContract::new(FACE, maturity, recovery, flavor).unwrap()
}

/// Zero-drift models over the grid of criterion 1.
fn zero_drift_grid() -> Vec<(PairModel, f64, String)> {
    let mut out = Vec::new();
    for rho in RHO_GRID {
        for t in T_GRID {
            for q in QUALITY_GRID {
                for s in SIGMA_GRID {
                    let f = firm(q, s, RF - 0.5 * s * s);
                    out.push((pair(f, f, rho), t, format!("rho={rho} t={t} quality={q} sigma={s}")));
                }
            }
        }
    }
    out
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn formula_equivalence(cfg: &NumericsConfig) -> Result<Outcome> {
    let mut worst = (0.0f64, String::new());
    for (m, t, label) in zero_drift_grid() {
        let diff = (joint_survival(&m, t, cfg)? - joint_survival_zero_drift(&m, t, cfg)?).abs();
        if diff >= worst.0 {
            worst = (diff, label);
        }
    }
    Ok(outcome(
        worst.0 < SERIES_AGREEMENT,
        format!("81 points, max |drifted series - zero-drift series| = {:.2e} at {} (tol {SERIES_AGREEMENT:e})", worst.0, worst.1),
    ))
}

fn independence(cfg: &NumericsConfig) -> Result<Outcome> {
    let mut worst = (0.0f64, String::new());
    for t in T_GRID {
        for q in QUALITY_GRID {
            for s in SIGMA_GRID {
                for gamma in [RF - 0.5 * s * s, 0.03] {
                    let f1 = firm(q, s, gamma);
                    let f2 = firm(2.0, 0.2, 0.03);
                    let m = pair(f1, f2, 0.0);
                    let product = marginal_survival(&f1, RF, T, t)? * marginal_survival(&f2, RF, T, t)?;
                    let diff = (joint_survival(&m, t, cfg)? - product).abs();
                    if diff >= worst.0 {
                        worst = (diff, format!("t={t} quality={q} sigma={s} gamma={gamma}"));
                    }
                }
            }
        }
    }
    Ok(outcome(
        worst.0 < FACTORIZATION,
        format!("54 points, max |P - S1*S2| = {:.2e} at {} (tol {FACTORIZATION:e})", worst.0, worst.1),
    ))
}

fn reduction(cfg: &NumericsConfig) -> Result<Outcome> {
    let mut worst = (0.0f64, String::new());
    for (m, t, label) in zero_drift_grid() {
        let [b1, _] = m.log_barriers();
        let diff = (restricted_exp_moment(&m, t, 0.0, b1, f64::INFINITY, cfg)? - joint_survival(&m, t, cfg)?).abs();
        if diff >= worst.0 {
            worst = (diff, label);
        }
    }
    Ok(outcome(
        worst.0 < REDUCTION,
        format!("81 points, max |moment(0, B1, inf) - P| = {:.2e} at {} (tol {REDUCTION:e})", worst.0, worst.1),
    ))
}

fn oracle_agreement(cfg: &NumericsConfig) -> Result<Outcome> {
    let mc = McConfig::default();
    let mut lines = Vec::new();
    let mut worst = 0.0f64;
    let mut record = |label: String, z: f64| {
        worst = worst.max(z.abs());
        lines.push(format!("{label} z={z:+.2}"));
    };
    for rho in [-0.4, 0.0, 0.4, 0.8] {
        let m = base(rho);
        let b = bond(0.7);
        let contagion_bond = rho >= 0.0;
        let report = simulate_report(&m, T, contagion_bond.then_some(&b), 0.5, &mc)?;
        record(format!("rho={rho} survival"), report.survival.z_score(joint_survival(&m, T, cfg)?));
        if let Some(price) = report.bond_price {
            let analytic = credit_contagion::bond_price(&m, &b, cfg)?;
            record(format!("rho={rho} bond"), price.z_score(analytic));
        }
        for flavor in Flavor::ALL {
            let included = rho >= 0.0 || matches!(flavor, Flavor::First | Flavor::Second);
            if included {
                let analytic = cds_spread(&m, &cds(T, 0.5, flavor), cfg)?;
                record(format!("rho={rho} {flavor}"), report.cds_legs(flavor).spread.z_score(analytic));
            }
        }
    }
    Ok(outcome(
        worst <= MC_SIGMAS,
        format!(
            "{} comparisons at {} paths x {} steps/yr, max |z| = {worst:.2}\n        {}",
            lines.len(),
            mc.paths,
            mc.steps_per_year,
            lines.join("\n        ")
        ),
    ))
}

fn risk_free_anchor(cfg: &NumericsConfig) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for rho in BOND_RHOS {
        let y = bond_yield(&base(rho), &bond(1.0), cfg)?;
        worst = worst.max((y - RF).abs() * 1e4);
    }
    Ok(outcome(
        worst < RISK_FREE_BP,
        format!("omega=1 over rho {BOND_RHOS:?}: max |y - rf| = {worst:.2e} bp (tol {RISK_FREE_BP} bp)"),
    ))
}

fn distance_anchor() -> Outcome {
    let d = base_firm().scaled_distance_to_default(T);
    outcome(
        (d - DISTANCE_TO_DEFAULT).abs() < DISTANCE_DIGITS && (d * 10.0).round() / 10.0 == 3.5,
        format!("sigma=0.2, quality=2: {d:.6} (expected {DISTANCE_TO_DEFAULT}, rounds to 3.5)"),
    )
}

fn shapes(cfg: &NumericsConfig) -> Result<Outcome> {
    let mut checks: Vec<(String, bool)> = Vec::new();

    for omega in [0.5, 0.7] {
        let ys = BOND_RHOS
            .iter()
            .map(|&r| bond_yield(&base(r), &bond(omega), cfg))
            .collect::<Result<Vec<_>>>()?;
        checks.push((format!("yield decreasing in rho (omega={omega})"), strictly_decreasing(&ys)));
    }
    let ys = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
        .iter()
        .map(|&w| bond_yield(&base(0.4), &bond(w), cfg))
        .collect::<Result<Vec<_>>>()?;
    checks.push(("yield decreasing in omega".into(), strictly_decreasing(&ys)));
    let sigmas = [0.15, 0.2, 0.25, 0.3];
    let ys = sigmas
        .iter()
        .map(|&s| bond_yield(&pair(firm(2.0, s, 0.03), firm(2.0, s, 0.03), 0.4), &bond(0.7), cfg))
        .collect::<Result<Vec<_>>>()?;
    checks.push(("yield increasing in common sigma".into(), strictly_increasing(&ys)));
    let ys = sigmas
        .iter()
        .map(|&s| bond_yield(&pair(base_firm(), firm(2.0, s, 0.03), 0.4), &bond(0.7), cfg))
        .collect::<Result<Vec<_>>>()?;
    checks.push(("yield increasing in sigma2".into(), strictly_increasing(&ys)));

    let rhos = [-0.8, -0.4, 0.0, 0.4, 0.8];
    let spreads = |flavor: Flavor| {
        rhos.iter()
            .map(|&r| cds_spread(&base(r), &cds(T, 0.5, flavor), cfg))
            .collect::<Result<Vec<_>>>()
    };
    let first = spreads(Flavor::First)?;
    let second = spreads(Flavor::Second)?;
    checks.push(("c_first decreasing in rho".into(), strictly_decreasing(&first)));
    checks.push(("c_second increasing in rho".into(), strictly_increasing(&second)));
    let mut ordered = first.iter().zip(&second).all(|(f, s)| s <= f);

    for flavor in [Flavor::First, Flavor::Second] {
        let by_t = [1.0, 2.0, 3.0, 4.0, 5.0]
            .iter()
            .map(|&t| cds_spread(&base(0.4), &cds(t, 0.5, flavor), cfg))
            .collect::<Result<Vec<_>>>()?;
        checks.push((format!("{flavor} increasing in T"), strictly_increasing(&by_t)));
        let by_sigma = [0.15, 0.2, 0.25]
            .iter()
            .map(|&s| cds_spread(&pair(firm(2.0, s, 0.03), firm(2.0, s, 0.03), 0.4), &cds(T, 0.5, flavor), cfg))
            .collect::<Result<Vec<_>>>()?;
        checks.push((format!("{flavor} increasing in sigma"), strictly_increasing(&by_sigma)));
        let mut worst = 0.0f64;
        for r in rhos {
            let lo = cds_spread(&base(r), &cds(T, 0.3, flavor), cfg)?;
            let hi = cds_spread(&base(r), &cds(T, 0.7, flavor), cfg)?;
            worst = worst.max((lo / hi / RECOVERY_RATIO - 1.0).abs());
        }
        checks.push((
            format!("{flavor} c(R=0.3)/c(R=0.7) = 7/3 (max rel dev {worst:.1e})"),
            worst < RECOVERY_RATIO_REL,
        ));
    }
    for s in [0.15, 0.2, 0.25] {
        for t in [1.0, 3.0, 5.0] {
            let m = pair(firm(2.0, s, 0.03), firm(2.0, s, 0.03), 0.4);
            let f = cds_spread(&m, &cds(t, 0.5, Flavor::First), cfg)?;
            let c = cds_spread(&m, &cds(t, 0.5, Flavor::Second), cfg)?;
            ordered &= c <= f;
        }
    }
    checks.push(("c_second <= c_first on all sweeps".into(), ordered));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
    Ok(outcome(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} shape checks hold", checks.len())
        } else {
            format!("failed: {}", failed.join("; "))
        },
    ))
}

fn contagion_identity(cfg: &NumericsConfig) -> Result<Outcome> {
    let mut exact = true;
    let mut above = true;
    let mut gaps = Vec::new();
    for rho in [0.0, 0.4, 0.8] {
        let m = base(rho);
        let first = cds_spread(&m, &cds(T, 0.5, Flavor::First), cfg)?;
        let contagion = cds_spread(&m, &cds(T, 0.5, Flavor::SecondContagion), cfg)?;
        let plain = cds_spread(&m, &cds(T, 0.5, Flavor::Second), cfg)?;
        exact &= contagion.to_bits() == first.to_bits();
        above &= contagion > plain;
        gaps.push(format!("{:.1} bp", (contagion - plain) * 1e4));
    }
    Ok(outcome(
        exact && above,
        format!("bit-identical to first: {exact}; excess over no-contagion second at rho 0/0.4/0.8: {}", gaps.join(", ")),
    ))
}

fn counterparty_symmetry(cfg: &NumericsConfig) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for rho in [-0.4, 0.0, 0.4, 0.8] {
        let m = base(rho);
        let first = cds_spread(&m, &cds(T, 0.5, Flavor::First), cfg)?;
        let cp = cds_spread(&m, &cds(T, 0.5, Flavor::CounterpartyHomogeneous), cfg)?;
        worst = worst.max((cp / (0.5 * first) - 1.0).abs());
    }
    let m = pair(base_firm(), firm(2.0, 0.3, 0.03), 0.4);
    let mc = McConfig {
        paths: 250_000,
        ..McConfig::default()
    };
    let one = simulate_report(&m, T, None, 0.5, &mc)?;
    let two = simulate_report(&m.swapped(), T, None, 0.5, &mc)?;
    let first = one.cds_legs(Flavor::First).protection;
    let a = one.cds_legs(Flavor::CounterpartyHomogeneous).protection;
    let b = two.cds_legs(Flavor::CounterpartyHomogeneous).protection;
    let se = (a.std_error.powi(2) + b.std_error.powi(2) + first.std_error.powi(2)).sqrt();
    let z = (a.mean + b.mean - first.mean) / se;
    Ok(outcome(
        worst < COUNTERPARTY_REL && z.abs() <= MC_SIGMAS,
        format!(
            "max |c_cp/(c_first/2) - 1| = {worst:.1e} (tol {COUNTERPARTY_REL:e}); sigma2=0.3 legs {:.6} + {:.6} vs first {:.6}, z={z:+.2}",
            a.mean, b.mean, first.mean
        ),
    ))
}

fn robustness(cfg: &NumericsConfig) -> Result<Outcome> {
    let fine = cfg.refined();
    let mut worst_yield = 0.0f64;
    for omega in [0.5, 0.7] {
        for rho in BOND_RHOS {
            let m = base(rho);
            let d = bond_yield(&m, &bond(omega), &fine)? - bond_yield(&m, &bond(omega), cfg)?;
            worst_yield = worst_yield.max(d.abs() * 1e4);
        }
    }
    let mut worst_spread = 0.0f64;
    for rho in [-0.4, 0.0, 0.4, 0.8] {
        let m = base(rho);
        for flavor in Flavor::ALL {
            if rho < 0.0 && flavor == Flavor::SecondContagion {
                continue;
            }
            let c = cds(T, 0.5, flavor);
            let d = cds_spread(&m, &c, &fine)? - cds_spread(&m, &c, cfg)?;
            worst_spread = worst_spread.max(d.abs() * 1e4);
        }
    }

    // One series term as a triple integral, then the whole survival sum.
    let m = base(0.4);
    let [b1, _] = m.log_barriers();
    let term = WedgeTermIntegrand::new(&m, T, 0.0, b1, f64::INFINITY, 1, cfg)?;
    let tensor = integrate_3d(|p| term.eval(p), [0.0; 3], [1.0; 3], &GridSpec::tensor([64, 96, 64]))?;
    let sparse = integrate_3d(|p| term.eval(p), [0.0; 3], [1.0; 3], &GridSpec::sparse(cfg.sparse_level))?;
    let integrand_rel = (sparse / tensor - 1.0).abs();
    let sparse_cfg = NumericsConfig {
        grid_kind: GridKind::Sparse,
        ..*cfg
    };
    let p_tensor = joint_survival(&m, T, cfg)?;
    let p_sparse = joint_survival(&m, T, &sparse_cfg)?;
    let survival_rel = (p_sparse / p_tensor - 1.0).abs();

    Ok(outcome(
        worst_yield < REFINEMENT_BP && worst_spread < REFINEMENT_BP && integrand_rel < BACKEND_REL && survival_rel < BACKEND_REL,
        format!(
            "refined: max yield change {worst_yield:.1e} bp, max spread change {worst_spread:.1e} bp (tol {REFINEMENT_BP} bp); \
             tensor vs sparse at rho=0.4 t=5: term integrand {integrand_rel:.1e}, survival {survival_rel:.1e} (tol {BACKEND_REL:e})"
        ),
    ))
}

fn main() -> ExitCode {
    let cfg = NumericsConfig::default();
    type Criterion<'a> = (&'a str, Box<dyn Fn() -> Result<Outcome> + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("formula equivalence", Box::new(|| formula_equivalence(&cfg))),
        ("independence factorization", Box::new(|| independence(&cfg))),
        ("restricted-moment reduction", Box::new(|| reduction(&cfg))),
        ("Monte Carlo agreement", Box::new(|| oracle_agreement(&cfg))),
        ("risk-free anchor", Box::new(|| risk_free_anchor(&cfg))),
        ("distance-to-default anchor", Box::new(|| Ok(distance_anchor()))),
        ("shape properties", Box::new(|| shapes(&cfg))),
        ("contagion identity", Box::new(|| contagion_identity(&cfg))),
        ("counterparty symmetry", Box::new(|| counterparty_symmetry(&cfg))),
        ("numerical robustness", Box::new(|| robustness(&cfg))),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        if !result.pass {
            failures += 1;
        }
        println!(
            "{} criterion {:>2} {name} [{:.1}s]: {}",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
