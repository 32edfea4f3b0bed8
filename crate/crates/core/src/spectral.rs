//! The function `f(λ) = λ + ⟨φ_q, (T₀ − λ)⁻¹ φ_q⟩`, its zeros, and the
//! eigenvectors of `U` they produce.
//!
//! Under the strong-shift conditions `φ_q` lives on `{±e₂}` and `T₀` only
//! hops along `e₂`, so the resolvent vector `ψ_λ` is supported on the column
//! `x₁ = 0` and is given by the single integral
//!
//! ```text
//! ψ_λ(0, x₂) = ∫ 2i ω₂₂ φ₂₁ sin k / (2 φ₂₁ φ₂₂ cos k − λ) · e^{i k x₂} dk/2π
//! ```
//!
//! evaluated here with the periodic trapezoid rule. Three routes to `f` are
//! provided: the closed form, the 1-D route through `ψ_λ(±e₂)`, and a 2-D
//! tensor trapezoid over the full symbols of `T₀` and `φ_q`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Site, VectorState, WindowSpec};
use crate::operators::WalkOperator;
use crate::params::{essential_interval, sgn, CoinParameters, StrongShiftParameters, I11, I21, I22};
use crate::quadrature::QuadratureSpec;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default grid points per component for [`find_f_zeros`].
pub const DEFAULT_GRID: usize = 2001;
/// Grid endpoints are clipped this far outside the band edge.
pub const THRESHOLD_CLIP: f64 = 1e-9;
/// Bisection stops once the bracket is this narrow.
pub const BISECTION_WIDTH: f64 = 1e-13;
/// Largest `|f(Re μ₀)|` accepted by [`build_eigenvector`].
pub const ZERO_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FMethod {
    Closed,
    Quad1d,
    Quad2d,
}

/// `a = λ / (2 φ₂₁ φ₂₂)`; `|a| > 1` on the domain of `f`.
#[inline]
pub fn reduced_energy(params: &StrongShiftParameters, lambda: f64) -> f64 {
    lambda / params.hopping()
}

/// `|a| − √(a² − 1)`, the ratio by which `ψ_λ` decays per site along `e₂`.
pub fn decay_ratio(params: &StrongShiftParameters, lambda: f64) -> f64 {
    let a = reduced_energy(params, lambda).abs();
    a - (a * a - 1.0).sqrt()
}

/// Smallest half-width `N` with `r^N ≤ tol` for the decay ratio at `lambda`.
pub fn window_for_decay(params: &StrongShiftParameters, lambda: f64, tol: f64) -> usize {
    let r = decay_ratio(params, lambda);
    (tol.ln() / r.ln()).ceil().max(1.0) as usize
}

pub fn eval_f(
    lambda: f64,
    params: &StrongShiftParameters,
    method: FMethod,
    quad: &QuadratureSpec,
) -> Result<f64> {
    params.check_admissible(lambda)?;
    Ok(match method {
        FMethod::Closed => f_closed(params, lambda),
        FMethod::Quad1d => {
            let psi = PsiColumn::new(params, lambda, quad, 1)?;
            lambda + phi_q_pairing(params, &psi).re
        }
        FMethod::Quad2d => f_quad2d(params.coin(), lambda, quad),
    })
}

/// `2φ₂₁φ₂₂ [a + (ω₂₂²/φ₂₂²)(−a + sgn(a)√(a² − 1))]`. No domain check.
pub(crate) fn f_closed(params: &StrongShiftParameters, lambda: f64) -> f64 {
    let a = reduced_energy(params, lambda);
    let ratio = (params.omega22 / params.phi22).powi(2);
    params.hopping() * (a + ratio * (-a + sgn(a) * (a * a - 1.0).sqrt()))
}

/// `⟨φ_q, ψ_λ⟩ = φ̄_q(−e₂) ψ_λ(−e₂) + φ̄_q(e₂) ψ_λ(e₂)`.
pub(crate) fn phi_q_pairing(params: &StrongShiftParameters, psi: &PsiColumn) -> Complex64 {
    let [_, (below, above)] = params.coin().phi_q_entries();
    below.conj() * psi.at(-1) + above.conj() * psi.at(1)
}

/// `λ + ∫∫ |φ̂_q(k)|² / (T̂₀(k) − λ) d²k/(2π)²` with the general symbols
/// `T̂₀(k) = a_Φ + Σ_j 2 Re(q_j φ̄_{j,1} φ_{j,2} e^{i k_j})` and
/// `φ̂_q(k) = Σ_j (q_j ω_{j,2} φ̄_{j,1} e^{i k_j} + q̄_j ω_{j,1} φ̄_{j,2} e^{−i k_j})`.
fn f_quad2d(coin: &CoinParameters, lambda: f64, quad: &QuadratureSpec) -> f64 {
    let roots = quad.roots_of_unity();
    let entries = coin.phi_q_entries();
    let hop: [Complex64; 2] = [0, 1].map(|j| coin.q[j] * coin.phi[2 * j].conj() * coin.phi[2 * j + 1]);
    let diag = coin.a_phi();

    // Per-axis pieces of both symbols, sampled once.
    let axis = |j: usize| -> Vec<(f64, Complex64)> {
        let (minus, plus) = entries[j];
        roots
            .iter()
            .map(|z| {
                let t = 2.0 * (hop[j] * z).re;
                let phi = minus * z + plus * z.conj();
                (t, phi)
            })
            .collect()
    };
    let (axis1, axis2) = (axis(0), axis(1));

    // Fixed chunking keeps the floating-point summation order deterministic.
    let m = quad.nodes();
    let partials: Vec<f64> = axis1
        .par_iter()
        .map(|&(t1, phi1)| {
            let shift = diag + t1 - lambda;
            axis2
                .iter()
                .map(|&(t2, phi2)| (phi1 + phi2).norm_sqr() / (shift + t2))
                .sum::<f64>()
        })
        .collect();
    lambda + partials.iter().sum::<f64>() / (m as f64 * m as f64)
}

/// Samples of `ψ_λ(0, x₂)` for `|x₂| ≤ radius`, plus the integrand nodes for
/// evaluating further out on demand.
#[derive(Debug, Clone)]
pub struct PsiColumn {
    lambda: f64,
    radius: usize,
    values: Vec<Complex64>,
    weights: Vec<Complex64>,
}

impl PsiColumn {
    pub fn new(params: &StrongShiftParameters, lambda: f64, quad: &QuadratureSpec, radius: usize) -> Result<Self> {
        params.check_admissible(lambda)?;
        let m = quad.nodes();
        let numerator = Complex64::new(0.0, 2.0 * params.omega22 * params.phi21);
        let hopping = params.hopping();
        // Integrand values divided by M, so that each ψ is a plain sum.
        let weights: Vec<Complex64> = (0..m)
            .map(|i| {
                let k = quad.node(i);
                numerator * k.sin() / (hopping * k.cos() - lambda) / m as f64
            })
            .collect();
        let mut column = PsiColumn {
            lambda,
            radius,
            values: Vec::new(),
            weights,
        };
        column.values = (-(radius as i64)..=radius as i64)
            .into_par_iter()
            .map(|x2| column.direct(x2))
            .collect();
        Ok(column)
    }

    /// `Σ_m w_m e^{i k_m x₂}` with the phase taken from `m·x₂ mod M`.
    fn direct(&self, x2: i64) -> Complex64 {
        let m = self.weights.len() as i64;
        let step = 2.0 * std::f64::consts::PI / m as f64;
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let phase = (i as i64 * x2).rem_euclid(m);
                w * Complex64::from_polar(1.0, step * phase as f64)
            })
            .sum()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `ψ_λ(0, x₂)`.
    pub fn at(&self, x2: i64) -> Complex64 {
        if x2.unsigned_abs() as usize <= self.radius {
            self.values[(x2 + self.radius as i64) as usize]
        } else {
            self.direct(x2)
        }
    }

    /// `ψ_λ(x)`, zero off the column `x₁ = 0`.
    pub fn site(&self, (x1, x2): Site) -> Complex64 {
        if x1 == 0 {
            self.at(x2)
        } else {
            ZERO
        }
    }
}

/// `ψ_λ(x)` by periodic trapezoid quadrature.
pub fn psi_lambda(lambda: f64, site: Site, params: &StrongShiftParameters, quad: &QuadratureSpec) -> Result<Complex64> {
    params.check_admissible(lambda)?;
    if site.0 != 0 {
        return Ok(ZERO);
    }
    let column = PsiColumn::new(params, lambda, quad, 0)?;
    Ok(column.at(site.1))
}

/// The zeros `(λ₀⁺, λ₀⁻) = ±2ω₂₁ω₂₂ / √(2ω₂₂²/φ₂₂² − 1)`, present iff `|φ₂₂| < |ω₂₂|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroPair {
    pub plus: f64,
    pub minus: f64,
}

impl ZeroPair {
    pub fn sorted(&self) -> [f64; 2] {
        let (a, b) = (self.plus.min(self.minus), self.plus.max(self.minus));
        [a, b]
    }
}

pub fn lambda0_closed(params: &StrongShiftParameters) -> Option<ZeroPair> {
    if !params.has_zeros() {
        return None;
    }
    let ratio = (params.omega22 / params.phi22).powi(2);
    let v = 2.0 * params.omega21 * params.omega22 / (2.0 * ratio - 1.0).sqrt();
    Some(ZeroPair { plus: v, minus: -v })
}

/// Scan `T₋` and `T₊` for sign changes of the closed-form `f` and refine
/// each bracket by bisection. Returned zeros are sorted ascending.
pub fn find_f_zeros(params: &StrongShiftParameters, grid: usize) -> Vec<f64> {
    let grid = grid.max(2);
    let inner = params.lambda + THRESHOLD_CLIP;
    let f = |x: f64| f_closed(params, x);
    let mut zeros = Vec::new();
    for (lo, hi) in [(-1.0, -inner), (inner, 1.0)] {
        if lo >= hi {
            continue;
        }
        let points: Vec<f64> = (0..grid)
            .map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64)
            .collect();
        let values: Vec<f64> = points.iter().map(|&x| f(x)).collect();
        for i in 0..grid - 1 {
            let (fa, fb) = (values[i], values[i + 1]);
            if fa == 0.0 {
                zeros.push(points[i]);
            } else if fa * fb < 0.0 {
                zeros.push(bisect(&f, points[i], points[i + 1], fa));
            }
        }
        if values[grid - 1] == 0.0 {
            zeros.push(points[grid - 1]);
        }
    }
    zeros.sort_by(f64::total_cmp);
    zeros
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(e^{i arccos λ}, e^{−i arccos λ})`.
pub fn unitary_eigenvalues(lambda: f64) -> Result<(Complex64, Complex64)> {
    if !(-1.0..=1.0).contains(&lambda) {
        return Err(Error::Domain {
            what: "lambda",
            value: lambda,
            domain: "[-1, 1]".into(),
        });
    }
    let mu = Complex64::from_polar(1.0, lambda.acos());
    Ok((mu, mu.conj()))
}

/// `(1 − μS) d* g` for a scalar `g` under the strong-shift conditions,
/// written out component by component:
///
/// ```text
/// ( χ₁₁(x) g(x),
///   −μ χ₁₁(x−e₁) g(x−e₁),
///   χ₂₁(x) g(x) − μ χ₂₂(x+e₂) g(x+e₂),
///   χ₂₂(x) g(x) − μ χ₂₁(x−e₂) g(x−e₂) )
/// ```
pub(crate) fn assemble_walk_vector(
    params: &StrongShiftParameters,
    mu: Complex64,
    window: WindowSpec,
    g: impl Fn(Site) -> Complex64,
) -> VectorState {
    let coin = params.coin();
    let chi = |s: Site, i: usize| coin.chi(s)[i];
    VectorState::from_fn(window, |(x1, x2)| {
        let here = (x1, x2);
        let left = (x1 - 1, x2);
        let up = (x1, x2 + 1);
        let down = (x1, x2 - 1);
        let gh = g(here);
        [
            chi(here, I11) * gh,
            -mu * chi(left, I11) * g(left),
            chi(here, I21) * gh - mu * chi(up, I22) * g(up),
            chi(here, I22) * gh - mu * chi(down, I21) * g(down),
        ]
    })
}

/// `ψ_λ − 1_{0}` as a closure over a precomputed column.
pub(crate) fn psi_minus_indicator(column: &PsiColumn) -> impl Fn(Site) -> Complex64 + '_ {
    move |s| {
        let v = column.site(s);
        if s == (0, 0) {
            v - 1.0
        } else {
            v
        }
    }
}

/// The eigenvector `Ψ_{μ₀} = (1 − μ₀S) d*(ψ_{λ₀} − 1_{0})` with `λ₀ = Re μ₀`,
/// un-normalized.
pub fn build_eigenvector(
    mu0: Complex64,
    params: &StrongShiftParameters,
    window: WindowSpec,
    quad: &QuadratureSpec,
) -> Result<VectorState> {
    if (mu0.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("|mu0| = {} is not 1", mu0.norm())));
    }
    let lambda0 = mu0.re;
    params.check_admissible(lambda0)?;
    let residual = f_closed(params, lambda0);
    if residual.abs() > ZERO_TOLERANCE {
        return Err(Error::Precondition(format!(
            "Re mu0 = {lambda0} is not a zero of f (f = {residual:e})"
        )));
    }
    let column = PsiColumn::new(params, lambda0, quad, window.half_width() + 1)?;
    Ok(assemble_walk_vector(params, mu0, window, psi_minus_indicator(&column)))
}

/// `‖UΨ − μΨ‖₂ / ‖Ψ‖₂` over the interior of `state`'s window.
pub fn eigen_residual(op: &WalkOperator, state: &VectorState, mu: Complex64) -> f64 {
    let image = op.apply_walk(state);
    let diff = image.add_scaled(-mu, state).expect("same window");
    diff.interior_norms().l2 / state.interior_norms().l2
}

/// One unitary eigenvalue and the residual of its eigenvector.
#[derive(Debug, Clone, Serialize)]
pub struct EigenEntry {
    pub lambda: f64,
    pub mu: [f64; 2],
    pub residual: f64,
    pub eigenvector_l2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub lambda: f64,
    pub essential_interval: [f64; 2],
    pub zeros: Vec<f64>,
    pub closed_form_zeros: Option<ZeroPair>,
    pub eigenvalues: Vec<EigenEntry>,
}

/// Zeros, lifted eigenvalues and their eigen-residuals on windows sized by
/// the decay rule `r^N ≤ 1e−12` (at least `min_half_width`).
pub fn spectral_report(
    params: &StrongShiftParameters,
    grid: usize,
    quad: &QuadratureSpec,
    min_half_width: usize,
) -> Result<SpectralReport> {
    let zeros = find_f_zeros(params, grid);
    let op = WalkOperator::from_strong_shift(params);
    let mut eigenvalues = Vec::new();
    for &lambda in &zeros {
        let n = window_for_decay(params, lambda, 1e-12).max(min_half_width);
        let window = WindowSpec::new(n, 1)?;
        let (mu, mu_bar) = unitary_eigenvalues(lambda)?;
        for m in [mu, mu_bar] {
            let v = build_eigenvector(m, params, window, quad)?;
            eigenvalues.push(EigenEntry {
                lambda,
                mu: [m.re, m.im],
                residual: eigen_residual(&op, &v, m),
                eigenvector_l2: v.norms().l2,
            });
        }
    }
    let (lo, hi) = essential_interval(params.coin());
    Ok(SpectralReport {
        lambda: params.lambda,
        essential_interval: [lo, hi],
        zeros,
        closed_form_zeros: lambda0_closed(params),
        eigenvalues,
    })
}

/// `count` points spread over `T₋ ∪ T₊`, half on each side, avoiding the
/// band edge by `(1 − Λ)/(2·count)`.
pub fn admissible_samples(params: &StrongShiftParameters, count: usize) -> Vec<f64> {
    let per_side = count.div_ceil(2).max(1);
    let span = 1.0 - params.lambda;
    let mut out: Vec<f64> = (0..per_side)
        .map(|i| params.lambda + span * (i as f64 + 0.5) / per_side as f64)
        .flat_map(|x| [x, -x])
        .collect();
    out.truncate(count);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ReferenceSet;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn closed_f_at_one_for_threshold_set() {
        let b = ReferenceSet::PsetB.strong_shift();
        let f = eval_f(1.0, &b, FMethod::Closed, &quad()).unwrap();
        assert!((f - 0.5 * 3f64.sqrt()).abs() < 1e-15);
        let f1 = eval_f(1.0, &b, FMethod::Quad1d, &quad()).unwrap();
        assert!((f1 - 0.866_025_403_784_438_6).abs() < 1e-12);
    }

    #[test]
    fn f_vanishes_at_threshold_for_pset_b() {
        let b = ReferenceSet::PsetB.strong_shift();
        let mut last = f64::INFINITY;
        for k in 2..=8 {
            let f = eval_f(b.lambda + 10f64.powi(-k), &b, FMethod::Closed, &quad()).unwrap();
            assert!(f.abs() < last);
            last = f.abs();
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn domain_errors() {
        let a = ReferenceSet::PsetA.strong_shift();
        for bad in [0.0, 0.5, -0.5, 1.0 + 1e-12, f64::NAN] {
            let err = eval_f(bad, &a, FMethod::Closed, &quad()).unwrap_err();
            assert_eq!(err.code(), "E_DOMAIN");
        }
        assert!(psi_lambda(0.3, (0, 1), &a, &quad()).is_err());
        assert!(unitary_eigenvalues(1.5).is_err());
    }

    #[test]
    fn pset_a_zeros_match_closed_form() {
        let a = ReferenceSet::PsetA.strong_shift();
        let pair = lambda0_closed(&a).unwrap();
        // ω₂₁ω₂₂ < 0 for this set, so λ₀⁺ is the negative root.
        assert!(pair.plus < 0.0);
        let expected = 0.72 / 1.88f64.sqrt();
        assert!((pair.minus - expected).abs() < 1e-15);
        let zeros = find_f_zeros(&a, DEFAULT_GRID);
        assert_eq!(zeros.len(), 2);
        for (z, c) in zeros.iter().zip(pair.sorted()) {
            assert!((z - c).abs() < 1e-10);
            assert!(f_closed(&a, *z).abs() < 1e-10);
        }
    }

    #[test]
    fn no_zeros_for_b_and_c() {
        for set in [ReferenceSet::PsetB, ReferenceSet::PsetC] {
            let p = set.strong_shift();
            assert!(lambda0_closed(&p).is_none());
            assert!(find_f_zeros(&p, DEFAULT_GRID).is_empty());
        }
    }

    #[test]
    fn eigenvalue_lift() {
        let (m, mb) = unitary_eigenvalues(1.0).unwrap();
        assert_eq!((m, mb), (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)));
        let (m, mb) = unitary_eigenvalues(0.0).unwrap();
        assert!((m - Complex64::i()).norm() < 1e-16 && (mb + Complex64::i()).norm() < 1e-16);
        let l = -0.525_114;
        let (m, _) = unitary_eigenvalues(l).unwrap();
        assert!((m.re - l).abs() < 1e-15);
        assert!((m.im - (1.0 - l * l).sqrt()).abs() < 1e-15);
        assert!((m.im - 0.851_032).abs() < 1e-6);
    }

    #[test]
    fn psi_is_odd_real_and_column_supported() {
        let a = ReferenceSet::PsetA.strong_shift();
        let l0 = lambda0_closed(&a).unwrap().plus;
        let col = PsiColumn::new(&a, l0, &quad(), 20).unwrap();
        assert!(col.at(0).norm() < 1e-15);
        assert!((col.at(1) + col.at(-1)).norm() < 1e-12);
        for x2 in 1..=20 {
            assert!((col.at(x2) + col.at(-x2)).norm() < 1e-12);
            assert!(col.at(x2).im.abs() < 1e-12);
        }
        assert_eq!(psi_lambda(l0, (1, 3), &a, &quad()).unwrap(), ZERO);
        assert_eq!(col.at(25), col.direct(25));
    }

    #[test]
    fn psi_decays_at_the_predicted_rate() {
        let a = ReferenceSet::PsetA.strong_shift();
        for lambda in [-0.9, -0.6, 0.55, 0.8] {
            let col = PsiColumn::new(&a, lambda, &quad(), 16).unwrap();
            let r = decay_ratio(&a, lambda);
            for x2 in 5..=15 {
                let ratio = col.at(x2 + 1).norm() / col.at(x2).norm();
                assert!((ratio - r).abs() < 1e-6, "lambda {lambda} x2 {x2}: {ratio} vs {r}");
            }
        }
        assert!((decay_ratio(&a, lambda0_closed(&a).unwrap().plus) - 0.7293).abs() < 1e-3);
    }

    #[test]
    fn eigenvector_structure() {
        let a = ReferenceSet::PsetA.strong_shift();
        let l0 = lambda0_closed(&a).unwrap().plus;
        let (mu, _) = unitary_eigenvalues(l0).unwrap();
        let w = WindowSpec::new(40, 1).unwrap();
        let v = build_eigenvector(mu, &a, w, &quad()).unwrap();
        assert!((v.get((0, 0))[0].re + 0.28f64.sqrt()).abs() < 1e-12);
        for s in w.sites().filter(|s| s.0 != 0 && s.0 != 1) {
            assert_eq!(v.get(s), [ZERO; 4]);
        }
        let op = WalkOperator::from_strong_shift(&a);
        assert!(eigen_residual(&op, &v, mu) < 1e-8);
    }

    #[test]
    fn eigenvector_rejects_non_zeros() {
        let a = ReferenceSet::PsetA.strong_shift();
        let w = WindowSpec::new(8, 1).unwrap();
        let (mu, _) = unitary_eigenvalues(0.7).unwrap();
        let err = build_eigenvector(mu, &a, w, &quad()).unwrap_err();
        assert_eq!(err.code(), "E_PRECONDITION");
        let err = build_eigenvector(Complex64::new(0.9, 0.0), &a, w, &quad()).unwrap_err();
        assert_eq!(err.code(), "E_PRECONDITION");
    }

    #[test]
    fn samples_cover_both_components() {
        let a = ReferenceSet::PsetA.strong_shift();
        let s = admissible_samples(&a, 50);
        assert_eq!(s.len(), 50);
        assert!(s.iter().all(|x| a.check_admissible(*x).is_ok()));
        assert_eq!(s.iter().filter(|x| **x > 0.0).count(), 25);
    }

    #[test]
    fn report_for_pset_a() {
        let a = ReferenceSet::PsetA.strong_shift();
        let r = spectral_report(&a, DEFAULT_GRID, &quad(), 0).unwrap();
        assert_eq!(r.zeros.len(), 2);
        assert_eq!(r.eigenvalues.len(), 4);
        assert!(r.eigenvalues.iter().all(|e| e.residual < 1e-8));
        assert_eq!(r.essential_interval, [-0.5, 0.5]);
    }
}
