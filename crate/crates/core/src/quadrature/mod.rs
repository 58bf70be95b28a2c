//! Deterministic numerical integration: Gauss–Legendre panels, tensor and
//! Smolyak sparse grids in three dimensions, and the discounted time leg
//! used by the CDS premium and protection formulas.

mod gauss;
mod sparse;

pub use gauss::{gauss_legendre, GaussLegendre};
pub use sparse::{sparse_grid_2d, sparse_grid_3d, SparseGrid};

use crate::error::{PricingError, Result};

/// Which multidimensional rule backs the three-dimensional integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GridKind {
    #[default]
    Tensor,
    Sparse,
}

impl GridKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GridKind::Tensor => "tensor",
            GridKind::Sparse => "sparse",
        }
    }
}

impl std::str::FromStr for GridKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tensor" => Ok(GridKind::Tensor),
            "sparse" => Ok(GridKind::Sparse),
            other => Err(format!("unknown grid kind `{other}` (expected tensor or sparse)")),
        }
    }
}

/// Resolution of a three-dimensional rule: per-axis Gauss–Legendre node
/// counts for the tensor backend, Smolyak level for the sparse backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub kind: GridKind,
    pub nodes: [usize; 3],
    pub level: u32,
}

impl GridSpec {
    pub fn tensor(nodes: [usize; 3]) -> Self {
        Self {
            kind: GridKind::Tensor,
            nodes,
            level: 0,
        }
    }

    pub fn sparse(level: u32) -> Self {
        Self {
            kind: GridKind::Sparse,
            nodes: [0; 3],
            level,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            GridKind::Tensor if self.nodes.iter().any(|&n| n < 4) => {
                Err(PricingError::Domain {
                    function: "integrate_3d",
                    detail: format!("tensor node counts must be >= 4, got {:?}", self.nodes),
                })
            }
            GridKind::Sparse if self.level < 2 => Err(PricingError::Domain {
                function: "integrate_3d",
                detail: format!("sparse level must be >= 2, got {}", self.level),
            }),
            _ => Ok(()),
        }
    }
}

fn check_finite(v: f64, function: &str, at: &dyn std::fmt::Debug) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(PricingError::NonFinite(format!("{function}: integrand = {v} at {at:?}")))
    }
}

/// Gauss–Legendre quadrature of `f` over `[a, b]`.
pub fn integrate_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, nodes: usize) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(PricingError::Domain {
            function: "integrate_1d",
            detail: format!("interval [{a}, {b}] must be finite with a < b"),
        });
    }
    if nodes == 0 {
        return Err(PricingError::Domain {
            function: "integrate_1d",
            detail: "node count must be positive".into(),
        });
    }
    let rule = gauss_legendre(nodes);
    let mut acc = 0.0;
    for (x, w) in rule.mapped(a, b) {
        acc += w * check_finite(f(x), "integrate_1d", &x)?;
    }
    Ok(acc)
}

/// Composite Gauss–Legendre with `panels` equal panels. No finiteness checks;
/// used on inner loops whose integrands are finite by construction.
pub(crate) fn composite(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, rule: &GaussLegendre) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let hi = if p + 1 == panels { b } else { lo + h };
        let mut part = 0.0;
        for (x, w) in rule.mapped(lo, hi) {
            part += w * f(x);
        }
        acc += part;
    }
    acc
}

/// Composite Gauss–Legendre, doubling the panel count until two successive
/// estimates agree to `rel_tol` (plus a tiny absolute floor).
pub(crate) fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let rule = gauss_legendre(32);
    let mut panels = 1;
    let mut prev = composite(&f, a, b, panels, &rule);
    while panels < 1024 {
        panels *= 2;
        let next = composite(&f, a, b, panels, &rule);
        if (next - prev).abs() <= rel_tol * next.abs() + 1e-300 {
            return next;
        }
        prev = next;
    }
    prev
}

/// Integrate `f` over the box `[lo, hi]` with a tensor Gauss–Legendre or a
/// Smolyak sparse grid.
pub fn integrate_3d(f: impl Fn([f64; 3]) -> f64, lo: [f64; 3], hi: [f64; 3], spec: &GridSpec) -> Result<f64> {
    spec.validate()?;
    for d in 0..3 {
        if !(lo[d].is_finite() && hi[d].is_finite() && lo[d] <= hi[d]) {
            return Err(PricingError::Domain {
                function: "integrate_3d",
                detail: format!("axis {d}: bounds [{}, {}] must be finite and ordered", lo[d], hi[d]),
            });
        }
    }
    let width = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
    match spec.kind {
        GridKind::Tensor => {
            let rules = spec.nodes.map(gauss_legendre);
            let mut acc = 0.0;
            for (x, wx) in rules[0].mapped(lo[0], hi[0]) {
                let mut plane = 0.0;
                for (y, wy) in rules[1].mapped(lo[1], hi[1]) {
                    let mut line = 0.0;
                    for (z, wz) in rules[2].mapped(lo[2], hi[2]) {
                        let p = [x, y, z];
                        line += wz * check_finite(f(p), "integrate_3d", &p)?;
                    }
                    plane += wy * line;
                }
                acc += wx * plane;
            }
            Ok(acc)
        }
        GridKind::Sparse => {
            let grid = sparse_grid_3d(spec.level);
            let mut acc = 0.0;
            for (u, w) in grid.points.iter().zip(&grid.weights) {
                let p = [
                    lo[0] + width[0] * u[0],
                    lo[1] + width[1] * u[1],
                    lo[2] + width[2] * u[2],
                ];
                acc += w * check_finite(f(p), "integrate_3d", &p)?;
            }
            Ok(acc * width[0] * width[1] * width[2])
        }
    }
}

/// Nodes and weights of the time-leg rule on `(0, horizon]`. The rule never
/// samples `s = 0`, where survival curves equal 1 by their right limit.
pub fn time_leg_rule(horizon: f64, nodes: usize) -> Vec<(f64, f64)> {
    gauss_legendre(nodes).mapped(0.0, horizon).collect()
}

/// `∫₀ᵀ e^{−r s} P(s) ds` for a survival-type curve `P`.
pub fn integrate_time_leg(
    mut survival: impl FnMut(f64) -> Result<f64>,
    rf: f64,
    horizon: f64,
    nodes: usize,
) -> Result<f64> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(PricingError::Domain {
            function: "integrate_time_leg",
            detail: format!("horizon must be positive and finite, got {horizon}"),
        });
    }
    if nodes < 4 {
        return Err(PricingError::Domain {
            function: "integrate_time_leg",
            detail: format!("node count must be >= 4, got {nodes}"),
        });
    }
    let mut acc = 0.0;
    for (s, w) in time_leg_rule(horizon, nodes) {
        let p = check_finite(survival(s)?, "integrate_time_leg", &s)?;
        acc += w * (-rf * s).exp() * p;
    }
    Ok(acc)
}
