//! The acceptance suite: ten numbered checks, each with pinned tolerances.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{evolve, localization_probe, EvolveOptions, InitialState, Probe};
use crate::error::Result;
use crate::lattice::{ScalarField, VectorState, WindowSpec};
use crate::operators::{interior_max_diff, interior_max_diff_scalar, DiscriminantMethod, WalkOperator};
use crate::params::{CoinParameters, ReferenceSet, StrongShiftParameters};
use crate::quadrature::QuadratureSpec;
use crate::resonance::{
    build_generalized_eigenfunction, epsilon_table, j_closed, j_quadrature, log_log_slope, psi_limit_quadrature,
    psi_threshold, residual_identity_check, Edge, ThresholdPoint,
};
use crate::spectral::{
    admissible_samples, build_eigenvector, eigen_residual, eval_f, find_f_zeros, lambda0_closed, unitary_eigenvalues,
    FMethod, DEFAULT_GRID, THRESHOLD_CLIP,
};

/// Pinned tolerances and budgets.
pub mod tol {
    pub const INVOLUTION: f64 = 1e-14;
    pub const NORM: f64 = 1e-12;
    pub const BOUNDARY: f64 = 1e-14;
    pub const COIN_FACTOR: f64 = 1e-12;
    pub const DISCRIMINANT: f64 = 1e-12;

    pub const F_QUAD1D: f64 = 1e-8;
    pub const F_QUAD2D: f64 = 1e-6;
    pub const F_BUDGET_S: f64 = 10.0;

    pub const ZERO_MATCH: f64 = 1e-10;
    pub const GUARD_BAND: f64 = 1e-9;

    pub const EIGEN_RESIDUAL: f64 = 1e-8;
    pub const EIGEN_BUDGET_S: f64 = 15.0;

    pub const STATIONARITY: f64 = 1e-10;
    pub const TOTAL_PROBABILITY: f64 = 1e-12;
    /// Edge-band mass allowed for the truncated eigenvector at the start of a run.
    pub const STATIONARY_EDGE_MASS: f64 = 1e-12;

    pub const GEF_RESIDUAL: f64 = 1e-12;
    pub const GEF_GROWTH_RATIO: f64 = 1.3;
    pub const GEF_SUP: f64 = 2.0;
    /// Bound on `|ψ_{±(Λ+δ)}(0,x₂) − ψ_{±Λ}(0,x₂)| / ((1 + |x₂|)√δ)` at the
    /// smallest default `δ`, for `|x₂| ≤ 8`.
    pub const GEF_LIMIT_SCALE: f64 = 10.0;

    pub const SLOPE_MIN: f64 = 0.4;
    pub const SLOPE_MAX: f64 = 0.6;

    pub const RESIDUAL_IDENTITY: f64 = 1e-10;

    pub const J_ORACLE: f64 = 1e-6;
    pub const J_ANTISYMMETRY: f64 = 1e-12;

    pub const CONTRAST_MIN: f64 = 10.0;
    /// Second-half average ratio PSET-A / PSET-C, pinned once the criterion
    /// passes. Unset: the ratio saturates near 3.2, below the floor.
    pub const CONTRAST_BASELINE: Option<f64> = None;
    pub const CONTRAST_BAND: f64 = 0.2;
}

const SEED: u64 = 0x5353_5157;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "operator algebra"),
    (2, "f-evaluator agreement"),
    (3, "zeros of f"),
    (4, "eigen-residual"),
    (5, "stationarity"),
    (6, "threshold generalized eigenfunction"),
    (7, "epsilon limit"),
    (8, "residual identity"),
    (9, "J oracle"),
    (10, "regime contrast"),
];

/// Run one criterion by number (1..=10).
pub fn run_criterion(id: u8) -> Option<CriterionResult> {
    let name = CRITERIA.iter().find(|c| c.0 == id)?.1;
    let start = Instant::now();
    let outcome = match id {
        1 => operator_algebra(),
        2 => f_agreement(),
        3 => zeros(),
        4 => eigen_residuals(),
        5 => stationarity(),
        6 => generalized_eigenfunction(),
        7 => epsilon_limit(),
        8 => residual_identity(),
        9 => j_oracle(),
        10 => regime_contrast().map(|c| c.outcome()),
        _ => unreachable!(),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (passed, detail) = match outcome {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error {}: {e}", e.code())),
    };
    Some(CriterionResult { id, name, passed, detail, seconds })
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0)).collect()
}

/// `PASS  3 zeros of f  (detail)`.
pub fn summary_line(r: &CriterionResult) -> String {
    format!(
        "{} {:>2} {} [{:.2}s] {}",
        if r.passed { "PASS" } else { "FAIL" },
        r.id,
        r.name,
        r.seconds,
        r.detail
    )
}

struct Outcome {
    passed: bool,
    detail: String,
}

/// Accumulates named checks into one pass flag and a compact detail string.
#[derive(Default)]
struct Checks {
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn le(&mut self, name: &str, value: f64, bound: f64) {
        self.notes.push(format!("{name}={value:.3e}"));
        if value.is_nan() || value > bound {
            self.failed.push(format!("{name}={value:.3e}>{bound:e}"));
        }
    }

    fn require(&mut self, name: &str, ok: bool) {
        if !ok {
            self.failed.push(name.to_string());
        }
    }

    fn note(&mut self, note: String) {
        self.notes.push(note);
    }

    fn finish(self) -> Result<Outcome> {
        let passed = self.failed.is_empty();
        let detail = if passed {
            self.notes.join(" ")
        } else {
            format!("failed: {}", self.failed.join(", "))
        };
        Ok(Outcome { passed, detail })
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A walk with complex `q` and coin entries and no strong-shift structure.
fn general_params() -> CoinParameters {
    let unit = |v: [Complex64; 4]| {
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.map(|z| z / n)
    };
    let phi = unit([c(0.3, 0.1), c(-0.4, 0.2), c(0.5, -0.3), c(0.1, 0.4)]);
    let omega = unit([c(0.2, -0.5), c(0.3, 0.3), c(-0.1, 0.6), c(0.35, 0.0)]);
    let p2 = -0.28f64;
    CoinParameters::new(
        [0.6, p2],
        [c(0.0, 0.8), Complex64::from_polar((1.0 - p2 * p2).sqrt(), 0.7)],
        phi,
        omega,
    )
}

/// Unit-norm random state vanishing on the outer `margin` rings.
fn random_state(rng: &mut ChaCha8Rng, window: WindowSpec, margin: usize) -> VectorState {
    let mut psi = VectorState::from_fn(window, |s| {
        if window.edge_distance(s) < margin {
            [Complex64::new(0.0, 0.0); 4]
        } else {
            [0; 4].map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        }
    });
    psi.normalize().expect("nonzero random state");
    psi
}

fn random_field(rng: &mut ChaCha8Rng, window: WindowSpec) -> ScalarField {
    ScalarField::from_fn(window, |_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn operator_algebra() -> Result<Outcome> {
    const N: usize = 32;
    const STATES: usize = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let window = WindowSpec::new(N, 2)?;
    let mut ops = vec![WalkOperator::new(general_params())?];
    ops.extend(ReferenceSet::ALL.iter().map(|s| WalkOperator::from_strong_shift(&s.strong_shift())));

    let (mut inv_s, mut inv_c, mut norm, mut dd, mut coin, mut disc) = (0f64, 0f64, 0f64, 0f64, 0f64, 0f64);
    for op in &ops {
        for _ in 0..STATES {
            let psi = random_state(&mut rng, window, 1);
            let s = op.apply_shift(&psi);
            let cpsi = op.apply_coin(&psi);
            inv_s = inv_s.max(interior_max_diff(&op.apply_shift(&s), &psi));
            inv_c = inv_c.max(interior_max_diff(&op.apply_coin(&cpsi), &psi));
            for image in [&s, &cpsi, &op.apply_walk(&psi)] {
                norm = norm.max((image.norm_sqr().sqrt() - 1.0).abs());
            }

            let mut factored = op.apply_boundary_adjoint(&op.apply_boundary(&psi));
            factored.scale(c(2.0, 0.0));
            let factored = factored.sub(&psi)?;
            coin = coin.max(interior_max_diff(&factored, &cpsi));

            let f = random_field(&mut rng, window);
            let back = op.apply_boundary(&op.apply_boundary_adjoint(&f));
            dd = dd.max(back.sub(&f)?.norms().sup);

            if op.strong_shift().is_some() {
                let via = op.apply_discriminant(&f, DiscriminantMethod::ViaDsd)?;
                let closed = op.apply_discriminant(&f, DiscriminantMethod::ClosedForm)?;
                disc = disc.max(interior_max_diff_scalar(&via, &closed));
            }
        }
    }
    let mut checks = Checks::default();
    checks.le("S^2-1", inv_s, tol::INVOLUTION);
    checks.le("C^2-1", inv_c, tol::INVOLUTION);
    checks.le("norm", norm, tol::NORM);
    checks.le("dd*-I", dd, tol::BOUNDARY);
    checks.le("C-(2d*d-1)", coin, tol::COIN_FACTOR);
    checks.le("dSd*-T", disc, tol::DISCRIMINANT);
    checks.finish()
}

fn f_agreement() -> Result<Outcome> {
    const SAMPLES: usize = 50;
    let start = Instant::now();
    let quad = QuadratureSpec::default();
    let (mut d1, mut d2) = (0f64, 0f64);
    for set in [ReferenceSet::PsetA, ReferenceSet::PsetB] {
        let p = set.strong_shift();
        for lambda in admissible_samples(&p, SAMPLES) {
            let closed = eval_f(lambda, &p, FMethod::Closed, &quad)?;
            d1 = d1.max((closed - eval_f(lambda, &p, FMethod::Quad1d, &quad)?).abs());
            d2 = d2.max((closed - eval_f(lambda, &p, FMethod::Quad2d, &quad)?).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let mut checks = Checks::default();
    checks.le("quad1d", d1, tol::F_QUAD1D);
    checks.le("quad2d", d2, tol::F_QUAD2D);
    checks.le("seconds", elapsed, tol::F_BUDGET_S);
    checks.finish()
}

/// A random parameter tuple satisfying the strong-shift conditions.
///
/// The cross condition forces `(ω₂₁, ω₂₂) = t(−φ₂₁, φ₂₂)`, so a draw is
/// `(Φ, t, sign of ω₁₁)` with `t` small enough that `Ω` stays normalizable.
pub fn random_strong_shift(rng: &mut ChaCha8Rng) -> StrongShiftParameters {
    loop {
        let alpha = rng.gen_range(0.1..(PI / 2.0 - 0.1));
        let beta = rng.gen_range(0.1..(PI / 2.0 - 0.1));
        let signs: [f64; 3] = std::array::from_fn(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
        let phi = [alpha.cos(), 0.0, signs[0] * alpha.sin() * beta.cos(), signs[1] * alpha.sin() * beta.sin()];
        let t = rng.gen_range(0.2..0.98 / alpha.sin());
        let rest = 1.0 - t * t * alpha.sin().powi(2);
        if rest < 1e-6 {
            continue;
        }
        let omega = [signs[2] * rest.sqrt(), 0.0, -t * phi[2], t * phi[3]];
        if let Ok(s) = CoinParameters::strong_shift_real(phi, omega).strong_shift() {
            return s;
        }
    }
}

/// Distance of `|φ₂₂|` from `|ω₂₂|`, shrunk to the distance of the predicted
/// zeros from `±Λ` when that is smaller.
fn guard_distance(p: &StrongShiftParameters) -> f64 {
    let moduli = (p.phi22.abs() - p.omega22.abs()).abs();
    match lambda0_closed(p) {
        Some(z) => moduli.min(z.plus.abs() - p.lambda),
        None => moduli,
    }
}

fn zeros() -> Result<Outcome> {
    const DRAWS: usize = 100;
    let mut checks = Checks::default();

    let a = ReferenceSet::PsetA.strong_shift();
    let found = find_f_zeros(&a, DEFAULT_GRID);
    match lambda0_closed(&a) {
        Some(pair) if found.len() == 2 => {
            let expected = pair.sorted();
            let err = found.iter().zip(expected).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            checks.le("pset_a", err, tol::ZERO_MATCH);
            checks.note(format!("zeros={:.6}/{:.6}", found[0], found[1]));
        }
        _ => checks.require(&format!("pset_a expected 2 zeros, found {}", found.len()), false),
    }
    for set in [ReferenceSet::PsetB, ReferenceSet::PsetC] {
        let n = find_f_zeros(&set.strong_shift(), DEFAULT_GRID).len();
        checks.require(&format!("{} found {n} zeros", set.name()), n == 0);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let (mut accepted, mut with_zeros, mut rejected) = (0, 0, 0);
    while accepted < DRAWS {
        let p = random_strong_shift(&mut rng);
        if guard_distance(&p) <= tol::GUARD_BAND.max(THRESHOLD_CLIP) {
            rejected += 1;
            continue;
        }
        accepted += 1;
        let expect = p.phi22.abs() < p.omega22.abs();
        let got = !find_f_zeros(&p, DEFAULT_GRID).is_empty();
        with_zeros += usize::from(expect);
        if got != expect {
            checks.require(&format!("draw {accepted}: zeros={got} but |phi22|<|omega22| is {expect}"), false);
        }
    }
    checks.note(format!("draws={DRAWS} with_zeros={with_zeros} guarded={rejected}"));
    checks.finish()
}

fn eigen_residuals() -> Result<Outcome> {
    const N: usize = 96;
    let start = Instant::now();
    let a = ReferenceSet::PsetA.strong_shift();
    let op = WalkOperator::from_strong_shift(&a);
    let window = WindowSpec::new(N, 1)?;
    let quad = QuadratureSpec::default();
    let mut checks = Checks::default();
    let zeros = find_f_zeros(&a, DEFAULT_GRID);
    checks.require("pset_a has zeros", !zeros.is_empty());
    let mut worst = 0f64;
    for lambda in zeros {
        let (mu, mu_bar) = unitary_eigenvalues(lambda)?;
        for m in [mu, mu_bar] {
            let v = build_eigenvector(m, &a, window, &quad)?;
            worst = worst.max(eigen_residual(&op, &v, m));
            let outside = window
                .sites()
                .filter(|s| s.0 != 0 && s.0 != 1)
                .any(|s| v.get(s).iter().any(|z| *z != Complex64::new(0.0, 0.0)));
            checks.require("support outside x1 in {0,1}", !outside);
        }
    }
    checks.le("residual", worst, tol::EIGEN_RESIDUAL);
    checks.le("seconds", start.elapsed().as_secs_f64(), tol::EIGEN_BUDGET_S);
    checks.finish()
}

fn stationarity() -> Result<Outcome> {
    const N: usize = 96;
    const STEPS: usize = 48;
    let a = ReferenceSet::PsetA.strong_shift();
    let op = WalkOperator::from_strong_shift(&a);
    let window = WindowSpec::new(N, 1)?;
    let quad = QuadratureSpec::default();
    let mut checks = Checks::default();
    let (mut dev, mut total) = (0f64, 0f64);
    for conjugate in [false, true] {
        let psi = InitialState::Eigenvector { zero: 0, conjugate }.build(&a, window, &quad)?;
        let run = evolve(&op, &psi, STEPS, &[], EvolveOptions { edge_mass_tol: tol::STATIONARY_EDGE_MASS })?;
        dev = dev.max(run.max_site_deviation);
        total = total.max(run.max_total_deviation());
    }
    checks.le("max|Pt-P0|", dev, tol::STATIONARITY);
    checks.le("|total-1|", total, tol::TOTAL_PROBABILITY);
    checks.finish()
}

fn generalized_eigenfunction() -> Result<Outcome> {
    const WINDOWS: [usize; 3] = [32, 64, 128];
    let b = ReferenceSet::PsetB.strong_shift();
    let op = WalkOperator::from_strong_shift(&b);
    let mut checks = Checks::default();

    let mut residual = 0f64;
    let mut min_ratio = f64::INFINITY;
    let mut sup = 0f64;
    for point in ThresholdPoint::ALL {
        let mut prev: Option<f64> = None;
        for n in WINDOWS {
            let gef = build_generalized_eigenfunction(point, &b, WindowSpec::new(n, 1)?)?;
            if n == 128 {
                residual = residual.max(gef.max_pointwise_residual(&op));
            }
            let norms = gef.state.norms();
            sup = sup.max(norms.sup);
            if let Some(p) = prev {
                min_ratio = min_ratio.min(norms.l2 / p);
            }
            prev = Some(norms.l2);
        }
    }

    // Closed form against an independent sign-pattern evaluation, and against
    // the quadrature approach from outside the band.
    let ratio = b.omega22 / b.phi22;
    let mut exact = true;
    let mut limit = 0f64;
    let deltas = crate::resonance::default_deltas();
    for edge in [Edge::Plus, Edge::Minus] {
        let base = edge.sign() * b.hopping_sign();
        for x1 in -2i64..=2 {
            for x2 in -128i64..=128 {
                let expected = if x1 == 0 && x2 != 0 {
                    base.powi(x2 as i32) * (x2 as f64).signum() * ratio
                } else {
                    0.0
                };
                exact &= psi_threshold(edge, (x1, x2), &b)? == expected;
            }
        }
        for x2 in -8i64..=8 {
            let approach = psi_limit_quadrature(edge, x2, &b, &deltas)?;
            let last = *approach.last().expect("nonempty deltas");
            let delta = *deltas.last().expect("nonempty deltas");
            let err = (last - psi_threshold(edge, (0, x2), &b)?).abs();
            limit = limit.max(err / ((1.0 + x2.abs() as f64) * delta.sqrt()));
        }
    }

    checks.le("residual", residual, tol::GEF_RESIDUAL);
    checks.require("closed form mismatch", exact);
    checks.le("limit", limit, tol::GEF_LIMIT_SCALE);
    checks.note(format!("min_ratio={min_ratio:.4}"));
    checks.require(&format!("l2 ratio {min_ratio} < {}", tol::GEF_GROWTH_RATIO), min_ratio >= tol::GEF_GROWTH_RATIO);
    checks.le("sup", sup, tol::GEF_SUP);
    checks.finish()
}

fn epsilon_limit() -> Result<Outcome> {
    let b = ReferenceSet::PsetB.strong_shift();
    let deltas: Vec<f64> = (2..=5).map(|k| 10f64.powi(-k)).collect();
    let mut checks = Checks::default();
    for edge in [Edge::Plus, Edge::Minus] {
        let rows = epsilon_table(edge, &b, &deltas)?;
        let decreasing = rows.windows(2).all(|w| w[1].gap < w[0].gap);
        checks.require(&format!("|eps-1| not decreasing on {} side", edge.label()), decreasing);
        let slope = log_log_slope(&rows);
        checks.note(format!("slope{}={slope:.4}", edge.label()));
        checks.require(
            &format!("slope{}={slope}", edge.label()),
            (tol::SLOPE_MIN..=tol::SLOPE_MAX).contains(&slope),
        );
    }
    checks.finish()
}

fn residual_identity() -> Result<Outcome> {
    const N: usize = 32;
    let b = ReferenceSet::PsetB.strong_shift();
    let window = WindowSpec::new(N, 2)?;
    let mut checks = Checks::default();
    let mut worst = 0f64;
    for sign in [1.0, -1.0] {
        let mut prev = f64::INFINITY;
        for k in 2..=5 {
            let delta = 10f64.powi(-k);
            let re = sign * (b.lambda + delta);
            let mu = c(re, (1.0 - re * re).sqrt());
            let r = residual_identity_check(mu, &b, window, &QuadratureSpec::for_threshold_gap(delta))?;
            worst = worst.max(r.diff / r.lhs);
            checks.require(&format!("lhs not decreasing at Re mu={re}"), r.lhs < prev);
            prev = r.lhs;
        }
    }
    checks.le("relative", worst, tol::RESIDUAL_IDENTITY);
    checks.finish()
}

fn j_oracle() -> Result<Outcome> {
    let quad = QuadratureSpec::default();
    let (mut err, mut anti) = (0f64, 0f64);
    for edge in [Edge::Plus, Edge::Minus] {
        for x in -10i64..=10 {
            let j = j_quadrature(edge, x, &quad);
            err = err.max((j - j_closed(edge, x)).abs());
            anti = anti.max((j_quadrature(edge, -x, &quad) + j).abs());
        }
    }
    let mut checks = Checks::default();
    checks.le("oracle", err, tol::J_ORACLE);
    checks.le("antisymmetry", anti, tol::J_ANTISYMMETRY);
    checks.finish()
}

/// Second-half region averages for the localized and delocalized regimes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Contrast {
    pub steps: usize,
    pub localized: f64,
    pub delocalized: f64,
    pub ratio: f64,
}

impl Contrast {
    fn outcome(self) -> Outcome {
        let mut checks = Checks::default();
        checks.note(format!("A={:.6e} C={:.6e} ratio={:.6}", self.localized, self.delocalized, self.ratio));
        checks.require(&format!("ratio {} < {}", self.ratio, tol::CONTRAST_MIN), self.ratio >= tol::CONTRAST_MIN);
        if let Some(base) = tol::CONTRAST_BASELINE {
            let drift = (self.ratio / base - 1.0).abs();
            checks.require(&format!("ratio {} outside baseline {base} ±20%", self.ratio), drift <= tol::CONTRAST_BAND);
        }
        checks.finish().expect("infallible")
    }
}

/// Point mass at the origin in the first coin component, region
/// `{x₁ ∈ {0, 1}, |x₂| ≤ 8}`.
pub fn regime_contrast_at(steps: usize) -> Result<Contrast> {
    let window = WindowSpec::new(steps + 1, 0)?;
    let region = Probe::columns("region", &[0, 1], 8).sites;
    let quad = QuadratureSpec::default();
    let init = InitialState::PointMass { site: (0, 0), component: 0 };
    let avg = |set: ReferenceSet| -> Result<f64> {
        let p = set.strong_shift();
        let psi = init.build(&p, window, &quad)?;
        Ok(localization_probe(&p, &psi, steps, &region, EvolveOptions::default())?.average)
    };
    let localized = avg(ReferenceSet::PsetA)?;
    let delocalized = avg(ReferenceSet::PsetC)?;
    Ok(Contrast { steps, localized, delocalized, ratio: localized / delocalized })
}

fn regime_contrast() -> Result<Contrast> {
    regime_contrast_at(128)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_draws_are_valid_and_mixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws: Vec<_> = (0..200).map(|_| random_strong_shift(&mut rng)).collect();
        assert!(draws.iter().any(|p| p.has_zeros()));
        assert!(draws.iter().any(|p| !p.has_zeros()));
    }

    #[test]
    fn unknown_criterion() {
        assert!(run_criterion(0).is_none());
        assert!(run_criterion(11).is_none());
    }

    #[test]
    fn j_oracle_passes() {
        let r = run_criterion(9).unwrap();
        assert!(r.passed, "{}", r.detail);
    }
}
