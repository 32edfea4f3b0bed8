//! Threshold resonances for `|φ₂₂| = |ω₂₂|`.
//!
//! At the band edges `±Λ` the resolvent vector `ψ_λ` has a bounded,
//! non-decaying limit `ψ_{±Λ}`. Feeding it through `(1 − mS) d*(· − 1_{0})`
//! with `m = e^{±i arccos(±Λ)}` gives a generalized eigenfunction of `U` that
//! is bounded but not square summable.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{ScalarField, Site, VectorState, WindowSpec};
use crate::operators::{interior_max_diff, interior_max_diff_scalar, DiscriminantMethod, WalkOperator};
use crate::params::{sgn, StrongShiftParameters};
use crate::quadrature::QuadratureSpec;
use crate::spectral::{assemble_walk_vector, phi_q_pairing, psi_minus_indicator, PsiColumn};

/// Which band edge: `+Λ` or `−Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Edge {
    Plus,
    Minus,
}

impl Edge {
    pub fn sign(self) -> f64 {
        match self {
            Edge::Plus => 1.0,
            Edge::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Edge::Plus => "+",
            Edge::Minus => "-",
        }
    }
}

/// One of `m_±` or `m_±*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ThresholdPoint {
    pub edge: Edge,
    pub conjugate: bool,
}

impl ThresholdPoint {
    pub const ALL: [ThresholdPoint; 4] = [
        ThresholdPoint { edge: Edge::Plus, conjugate: false },
        ThresholdPoint { edge: Edge::Plus, conjugate: true },
        ThresholdPoint { edge: Edge::Minus, conjugate: false },
        ThresholdPoint { edge: Edge::Minus, conjugate: true },
    ];

    /// `±Λ`.
    pub fn lambda_limit(&self, params: &StrongShiftParameters) -> f64 {
        self.edge.sign() * params.lambda
    }

    /// `e^{i arccos(±Λ)}`, conjugated when requested.
    pub fn m(&self, params: &StrongShiftParameters) -> Complex64 {
        let m = Complex64::from_polar(1.0, self.lambda_limit(params).acos());
        if self.conjugate {
            m.conj()
        } else {
            m
        }
    }

    pub fn label(&self) -> String {
        format!("m{}{}", self.edge.label(), if self.conjugate { "*" } else { "" })
    }
}

/// `ε(λ) = −⟨φ_q, ψ_λ⟩ / λ`, with `ψ_λ` by quadrature.
pub fn epsilon(lambda: f64, params: &StrongShiftParameters, quad: &QuadratureSpec) -> Result<f64> {
    let column = PsiColumn::new(params, lambda, quad, 1)?;
    Ok(epsilon_from_column(params, &column))
}

fn epsilon_from_column(params: &StrongShiftParameters, column: &PsiColumn) -> f64 {
    -phi_q_pairing(params, column).re / column.lambda()
}

/// `ψ_{±Λ}(x) = (±sgn(φ₂₁φ₂₂))^{x₂} sgn(x₂) ω₂₂/φ₂₂` on `{x₁ = 0, x₂ ≠ 0}`, zero elsewhere.
pub fn psi_threshold(edge: Edge, site: Site, params: &StrongShiftParameters) -> Result<f64> {
    params.require_threshold()?;
    Ok(psi_threshold_unchecked(edge, site, params))
}

fn psi_threshold_unchecked(edge: Edge, (x1, x2): Site, params: &StrongShiftParameters) -> f64 {
    if x1 != 0 || x2 == 0 {
        return 0.0;
    }
    let base = edge.sign() * params.hopping_sign();
    let power = if base > 0.0 || x2 % 2 == 0 { 1.0 } else { -1.0 };
    power * sgn(x2 as f64) * (params.omega22 / params.phi22)
}

/// Default approach distances `δ = 10⁻², …, 10⁻⁶`.
pub fn default_deltas() -> Vec<f64> {
    (2..=6).map(|k| 10f64.powi(-k)).collect()
}

/// `ψ_{±(Λ+δ)}(0, x₂)` for each `δ`, each with `M(δ) = max(4096, ⌈64/√δ⌉)` nodes.
pub fn psi_limit_quadrature(edge: Edge, x2: i64, params: &StrongShiftParameters, deltas: &[f64]) -> Result<Vec<f64>> {
    params.require_threshold()?;
    deltas
        .iter()
        .map(|&delta| {
            if delta.is_nan() || delta <= 0.0 {
                return Err(Error::Precondition(format!("delta = {delta} must be positive")));
            }
            let lambda = edge.sign() * (params.lambda + delta);
            let quad = QuadratureSpec::for_threshold_gap(delta);
            let column = PsiColumn::new(params, lambda, &quad, 0)?;
            Ok(column.at(x2).re)
        })
        .collect()
}

/// `J_±(x) = ∫₀^π sin k sin(xk) / (1 ± cos k) dk` by the trapezoid rule on
/// `quad.nodes()` equal intervals, with the removable endpoint singularity
/// replaced by its limit.
pub fn j_quadrature(edge: Edge, x: i64, quad: &QuadratureSpec) -> f64 {
    let m = quad.nodes();
    let h = PI / m as f64;
    let xf = x as f64;
    let integrand = |k: f64| -> f64 {
        // 1 − cos k = 2 sin²(k/2) and 1 + cos k = 2 cos²(k/2) avoid cancellation.
        let denom = match edge {
            Edge::Plus => 2.0 * (0.5 * k).cos().powi(2),
            Edge::Minus => 2.0 * (0.5 * k).sin().powi(2),
        };
        k.sin() * (xf * k).sin() / denom
    };
    let parity = if x.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let (at_zero, at_pi) = match edge {
        Edge::Plus => (0.0, -2.0 * xf * parity),
        Edge::Minus => (2.0 * xf, 0.0),
    };
    let interior: f64 = (1..m).map(|i| integrand(i as f64 * h)).sum();
    h * (0.5 * (at_zero + at_pi) + interior)
}

/// `sgn(x) (∓1)^{x+1} π`.
pub fn j_closed(edge: Edge, x: i64) -> f64 {
    if x == 0 {
        return 0.0;
    }
    let base = -edge.sign();
    let power = if base > 0.0 || (x + 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sgn(x as f64) * power * PI
}

/// A bounded solution of `U_∞Ψ = mΨ` restricted to a window.
#[derive(Debug, Clone)]
pub struct GeneralizedEigenfunction {
    pub state: VectorState,
    pub point: ThresholdPoint,
    pub m: Complex64,
}

pub fn build_generalized_eigenfunction(
    point: ThresholdPoint,
    params: &StrongShiftParameters,
    window: WindowSpec,
) -> Result<GeneralizedEigenfunction> {
    params.require_threshold()?;
    let m = point.m(params);
    let g = |s: Site| {
        let v = Complex64::new(psi_threshold_unchecked(point.edge, s, params), 0.0);
        if s == (0, 0) {
            v - 1.0
        } else {
            v
        }
    };
    Ok(GeneralizedEigenfunction {
        state: assemble_walk_vector(params, m, window, g),
        point,
        m,
    })
}

impl GeneralizedEigenfunction {
    /// `max_x ‖(UΨ − mΨ)(x)‖` over interior sites.
    pub fn max_pointwise_residual(&self, op: &WalkOperator) -> f64 {
        let image = op.apply_walk(&self.state);
        let diff = image.add_scaled(-self.m, &self.state).expect("same window");
        diff.interior_norms().sup
    }

    /// `‖(UΨ − mΨ)(x)‖` at one interior site.
    pub fn residual_at(&self, op: &WalkOperator, site: Site) -> f64 {
        let image = op.apply_walk(&self.state);
        let (u, v) = (image.get(site), self.state.get(site));
        (0..4).map(|c| (u[c] - self.m * v[c]).norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Both sides of `(U − μ)Ψ_μ = (ε(λ) − 1){2μ S d*φ_q + (U − μ)(1 − μS) d*1_{0}}`
/// on the interior.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualIdentity {
    pub mu: [f64; 2],
    pub epsilon: f64,
    /// `‖(U − μ)Ψ_μ‖₂`.
    pub lhs: f64,
    pub rhs: f64,
    /// `‖lhs − rhs‖₂`.
    pub diff: f64,
    /// Largest deviation of `Ψ_μ` rebuilt from `h_λ = ψ_λ − ε 1_{0}`.
    pub h_route_diff: f64,
}

pub fn residual_identity_check(
    mu: Complex64,
    params: &StrongShiftParameters,
    window: WindowSpec,
    quad: &QuadratureSpec,
) -> Result<ResidualIdentity> {
    params.require_threshold()?;
    if (mu.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("|mu| = {} is not 1", mu.norm())));
    }
    let lambda = mu.re;
    params.check_admissible(lambda)?;
    let window = window.with_margin(window.margin().max(2))?;
    let op = WalkOperator::from_strong_shift(params);

    let column = PsiColumn::new(params, lambda, quad, window.half_width() + 1)?;
    let eps = epsilon_from_column(params, &column);
    let psi_mu = assemble_walk_vector(params, mu, window, psi_minus_indicator(&column));

    let lhs = op.apply_walk(&psi_mu).add_scaled(-mu, &psi_mu)?;

    let one_at_origin = ScalarField::indicator(window, (0, 0))?;
    let defect = op.apply_boundary_adjoint(&one_at_origin);
    let lifted = defect.add_scaled(-mu, &op.apply_shift(&defect))?;
    let lifted_residual = op.apply_walk(&lifted).add_scaled(-mu, &lifted)?;
    let mut source = op.apply_shift(&op.apply_boundary_adjoint(&op.phi_q(window)));
    source.scale(2.0 * mu);
    let mut rhs = source.add(&lifted_residual)?;
    rhs.scale(Complex64::new(eps - 1.0, 0.0));

    // h-route: (1 − μS) d* h_λ + (ε − 1)(1 − μS) d* 1_{0}.
    let h = ScalarField::from_fn(window, |s| {
        let v = column.site(s);
        if s == (0, 0) {
            v - eps
        } else {
            v
        }
    });
    let dh = op.apply_boundary_adjoint(&h);
    let via_h = dh
        .add_scaled(-mu, &op.apply_shift(&dh))?
        .add_scaled(Complex64::new(eps - 1.0, 0.0), &lifted)?;

    Ok(ResidualIdentity {
        mu: [mu.re, mu.im],
        epsilon: eps,
        lhs: lhs.interior_norms().l2,
        rhs: rhs.interior_norms().l2,
        diff: lhs.sub(&rhs)?.interior_norms().l2,
        h_route_diff: interior_max_diff(&via_h, &psi_mu),
    })
}

/// `max_x |((T − λ)h_λ − (1 − ε(λ))φ_q)(x)|` over interior sites, with
/// `h_λ = ψ_λ − ε(λ) 1_{0}`.
pub fn feshbach_identity_residual(
    lambda: f64,
    params: &StrongShiftParameters,
    window: WindowSpec,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let window = window.with_margin(window.margin().max(1))?;
    let op = WalkOperator::from_strong_shift(params);
    let column = PsiColumn::new(params, lambda, quad, window.half_width() + 1)?;
    let eps = epsilon_from_column(params, &column);
    let h = ScalarField::from_fn(window, |s| {
        let v = column.site(s);
        if s == (0, 0) {
            v - eps
        } else {
            v
        }
    });
    let th = op.apply_discriminant(&h, DiscriminantMethod::ViaDsd)?;
    let lhs = th.add_scaled(Complex64::new(-lambda, 0.0), &h)?;
    let mut rhs = op.phi_q(window);
    rhs.scale(Complex64::new(1.0 - eps, 0.0));
    Ok(interior_max_diff_scalar(&lhs, &rhs))
}

/// One row of the `ε`-limit table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EpsilonRow {
    pub delta: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub gap: f64,
}

/// `ε(±(Λ + δ))` for each `δ`.
pub fn epsilon_table(edge: Edge, params: &StrongShiftParameters, deltas: &[f64]) -> Result<Vec<EpsilonRow>> {
    deltas
        .iter()
        .map(|&delta| {
            let lambda = edge.sign() * (params.lambda + delta);
            let eps = epsilon(lambda, params, &QuadratureSpec::for_threshold_gap(delta))?;
            Ok(EpsilonRow {
                delta,
                lambda,
                epsilon: eps,
                gap: (eps - 1.0).abs(),
            })
        })
        .collect()
}

/// Least-squares slope of `log gap` against `log δ`.
pub fn log_log_slope(rows: &[EpsilonRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.delta.ln(), r.gap.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthRow {
    pub half_width: usize,
    pub l2: f64,
    pub sup: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceEntry {
    pub point: String,
    pub m: [f64; 2],
    pub sup_norm: f64,
    pub max_pointwise_residual: f64,
    pub growth: Vec<GrowthRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceReport {
    pub lambda: f64,
    pub entries: Vec<ResonanceEntry>,
    pub epsilon_plus: Vec<EpsilonRow>,
    pub epsilon_minus: Vec<EpsilonRow>,
}

pub fn resonance_report(params: &StrongShiftParameters, windows: &[usize], deltas: &[f64]) -> Result<ResonanceReport> {
    params.require_threshold()?;
    let op = WalkOperator::from_strong_shift(params);
    let mut entries = Vec::new();
    for point in ThresholdPoint::ALL {
        let mut growth = Vec::new();
        let mut residual = 0.0f64;
        for &n in windows {
            let gef = build_generalized_eigenfunction(point, params, WindowSpec::new(n, 1)?)?;
            let norms = gef.state.norms();
            residual = residual.max(gef.max_pointwise_residual(&op));
            growth.push(GrowthRow { half_width: n, l2: norms.l2, sup: norms.sup });
        }
        let m = point.m(params);
        entries.push(ResonanceEntry {
            point: point.label(),
            m: [m.re, m.im],
            sup_norm: growth.iter().map(|g| g.sup).fold(0.0, f64::max),
            max_pointwise_residual: residual,
            growth,
        });
    }
    Ok(ResonanceReport {
        lambda: params.lambda,
        entries,
        epsilon_plus: epsilon_table(Edge::Plus, params, deltas)?,
        epsilon_minus: epsilon_table(Edge::Minus, params, deltas)?,
    })
}
