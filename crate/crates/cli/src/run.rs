//! Evaluate a [`RunSpec`] into CSV text.

use credit_contagion::mc::simulate_report;
use credit_contagion::{bond_price, bond_yield, cds_spread, joint_survival, PricingError};

use crate::config::{Command, Quantity, RunSpec};

const BP: f64 = 1e4;

/// CSV text plus one message per failed row.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub csv: String,
    pub failures: Vec<String>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `%.12g`-style: twelve significant digits, trailing zeros dropped.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

struct Table {
    csv: String,
    failures: Vec<String>,
    width: usize,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            csv: header.join(",") + "\n",
            failures: Vec::new(),
            width: header.len(),
        }
    }

    fn row(&mut self, labels: Vec<String>, values: Result<Vec<f64>, PricingError>) {
        let cells = match values {
            Ok(v) => v.into_iter().map(fmt_sig).collect(),
            Err(e) => {
                self.failures.push(format!("{}: {e}", labels.join(",")));
                vec!["failed".to_string(); self.width - labels.len()]
            }
        };
        let line: Vec<String> = labels.into_iter().chain(cells).collect();
        self.csv.push_str(&line.join(","));
        self.csv.push('\n');
    }

    fn finish(self) -> Report {
        Report {
            csv: self.csv,
            failures: self.failures,
        }
    }
}

fn header(q: Quantity) -> &'static [&'static str] {
    match q {
        Quantity::Survival => &["t", "rho", "P"],
        Quantity::Bond => &["rho", "T", "omega", "yield_bp_over_rf", "yield"],
        Quantity::Cds => &["flavor", "rho", "T", "R", "spread_bp"],
    }
}

fn survival_row(spec: &RunSpec, table: &mut Table) {
    let t = spec.horizon();
    let value = spec.model().and_then(|m| joint_survival(&m, t, &spec.numerics));
    table.row(vec![fmt_sig(t), fmt_sig(spec.rho)], value.map(|p| vec![p]));
}

fn bond_row(spec: &RunSpec, table: &mut Table) {
    let value = spec
        .model()
        .and_then(|m| bond_yield(&m, &spec.bond()?, &spec.numerics))
        .map(|y| vec![(y - spec.rf) * BP, y]);
    table.row(vec![fmt_sig(spec.rho), fmt_sig(spec.maturity), fmt_sig(spec.omega)], value);
}

fn cds_rows(spec: &RunSpec, table: &mut Table) {
    let model = spec.model();
    for flavor in spec.flavors() {
        let value = model
            .clone()
            .and_then(|m| cds_spread(&m, &spec.cds(flavor)?, &spec.numerics))
            .map(|c| vec![c * BP]);
        let labels = vec![
            flavor.as_str().to_string(),
            fmt_sig(spec.rho),
            fmt_sig(spec.maturity),
            fmt_sig(spec.recovery),
        ];
        table.row(labels, value);
    }
}

fn rows_for(q: Quantity, spec: &RunSpec, table: &mut Table) {
    match q {
        Quantity::Survival => survival_row(spec, table),
        Quantity::Bond => bond_row(spec, table),
        Quantity::Cds => cds_rows(spec, table),
    }
}

fn validate(spec: &RunSpec) -> Report {
    let mut table = Table::new(&["quantity", "analytic", "mc_mean", "mc_se", "z_score"]);
    let model = match spec.model() {
        Ok(m) => m,
        Err(e) => {
            table.row(vec!["model".into()], Err(e));
            return table.finish();
        }
    };
    let bond = spec.bond().ok().filter(|_| spec.rho >= 0.0);
    let report = match simulate_report(&model, spec.maturity, bond.as_ref(), spec.recovery, &spec.mc) {
        Ok(r) => r,
        Err(e) => {
            table.row(vec!["simulation".into()], Err(e));
            return table.finish();
        }
    };
    let compare = |analytic: f64, mean: f64, se: f64| {
        let z = if se > 0.0 { (mean - analytic) / se } else { 0.0 };
        vec![analytic, mean, se, z]
    };
    let cfg = &spec.numerics;

    let p = joint_survival(&model, spec.maturity, cfg);
    let s = report.survival;
    table.row(vec!["survival".into()], p.map(|p| compare(p, s.mean, s.std_error)));

    let price = spec.bond().and_then(|b| bond_price(&model, &b, cfg)).map(|p| {
        let est = report.bond_price.expect("simulated whenever the bond prices");
        compare(p, est.mean, est.std_error)
    });
    table.row(vec!["bond_price".into()], price);

    for flavor in spec.flavors() {
        let est = report.cds_legs(flavor).spread;
        let value = spec
            .cds(flavor)
            .and_then(|c| cds_spread(&model, &c, cfg))
            .map(|c| compare(c * BP, est.mean * BP, est.std_error * BP));
        table.row(vec![format!("cds_{}_bp", flavor.as_str())], value);
    }
    table.finish()
}

pub fn run(spec: &RunSpec) -> Report {
    let quantity = match spec.command {
        Command::Survival => Quantity::Survival,
        Command::Bond => Quantity::Bond,
        Command::Cds => Quantity::Cds,
        Command::Validate => return validate(spec),
        Command::Sweep => spec.quantity.expect("sweep specs carry a quantity"),
    };
    let mut table = Table::new(header(quantity));
    match &spec.sweep {
        None => rows_for(quantity, spec, &mut table),
        Some(sweep) => {
            for &v in &sweep.values {
                log::info!("{} = {v}", sweep.axis);
                let point = spec.with_value(&sweep.axis, v).expect("sweep values checked at parse time");
                rows_for(quantity, &point, &mut table);
            }
        }
    }
    table.finish()
}
