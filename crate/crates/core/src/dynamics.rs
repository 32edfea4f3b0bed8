//! Time evolution `U^t Ψ₀` and localization probes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Site, VectorState, WindowSpec};
use crate::operators::WalkOperator;
use crate::params::StrongShiftParameters;
use crate::quadrature::QuadratureSpec;
use crate::resonance::{build_generalized_eigenfunction, ThresholdPoint};
use crate::spectral::{build_eigenvector, find_f_zeros, unitary_eigenvalues, DEFAULT_GRID};

/// Initial states must have unit norm to this tolerance.
pub const NORM_TOL: f64 = 1e-10;

/// A named set of sites whose total probability is recorded every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub label: String,
    pub sites: Vec<Site>,
}

impl Probe {
    pub fn site(site: Site) -> Self {
        Probe {
            label: format!("P[{};{}]", site.0, site.1),
            sites: vec![site],
        }
    }

    pub fn region(label: impl Into<String>, sites: Vec<Site>) -> Self {
        Probe {
            label: label.into(),
            sites,
        }
    }

    /// `{x₁ ∈ columns, |x₂| ≤ reach}`.
    pub fn columns(label: impl Into<String>, columns: &[i64], reach: i64) -> Self {
        let sites = columns
            .iter()
            .flat_map(|&x1| (-reach..=reach).map(move |x2| (x1, x2)))
            .collect();
        Probe::region(label, sites)
    }

    fn probability(&self, state: &VectorState) -> f64 {
        self.sites.iter().map(|&s| state.site_norm_sqr(s)).sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Largest squared norm allowed within reach of the edge during the run.
    /// Zero demands that the light cone never touches the edge.
    pub edge_mass_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { edge_mass_tol: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionRun {
    pub steps: usize,
    pub labels: Vec<String>,
    /// `series[t][j]` is probe `j`'s probability after `t` steps, `t = 0..=steps`.
    pub series: Vec<Vec<f64>>,
    /// Total probability over the window after each step.
    pub total: Vec<f64>,
    /// `max_{t, x} |P_t(x) − P_0(x)|` over every window site.
    pub max_site_deviation: f64,
    pub final_state: VectorState,
}

impl EvolutionRun {
    /// Mean of each probe over `t ∈ [⌊T/2⌋, T]`.
    pub fn second_half_average(&self) -> Vec<f64> {
        let start = self.steps / 2;
        let rows = &self.series[start..];
        (0..self.labels.len())
            .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64)
            .collect()
    }

    pub fn max_total_deviation(&self) -> f64 {
        self.total.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Apply `U` `steps` times, recording probe probabilities after every step.
///
/// Refuses when more than `edge_mass_tol` of the initial squared norm lies
/// within `steps` sites of the edge: that mass could reach the edge and the
/// Dirichlet truncation would no longer match the infinite lattice.
pub fn evolve(
    op: &WalkOperator,
    initial: &VectorState,
    steps: usize,
    probes: &[Probe],
    options: EvolveOptions,
) -> Result<EvolutionRun> {
    let norm = initial.norm_sqr().sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::Precondition(format!("initial state has norm {norm}, expected 1")));
    }
    let window = *initial.window();
    let edge_mass = if steps >= window.half_width() {
        initial.norm_sqr()
    } else {
        initial.edge_band_mass(steps + 1)
    };
    if edge_mass > options.edge_mass_tol || steps >= window.half_width() {
        return Err(Error::LightCone {
            steps,
            half_width: window.half_width(),
            edge_mass,
            tolerance: options.edge_mass_tol,
        });
    }

    let initial_probs: Vec<f64> = initial.values().iter().map(crate::lattice::vec4_norm_sqr).collect();
    let record = |state: &VectorState| probes.iter().map(|p| p.probability(state)).collect::<Vec<_>>();

    let mut series = Vec::with_capacity(steps + 1);
    let mut total = Vec::with_capacity(steps + 1);
    let mut deviation = 0.0f64;
    let mut state = initial.clone();
    series.push(record(&state));
    total.push(state.norm_sqr());
    for _ in 0..steps {
        state = op.apply_walk(&state);
        series.push(record(&state));
        total.push(state.norm_sqr());
        for (v, p0) in state.values().iter().zip(&initial_probs) {
            deviation = deviation.max((crate::lattice::vec4_norm_sqr(v) - p0).abs());
        }
    }
    Ok(EvolutionRun {
        steps,
        labels: probes.iter().map(|p| p.label.clone()).collect(),
        series,
        total,
        max_site_deviation: deviation,
        final_state: state,
    })
}

/// Probability in `region` per step and its second-half average.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeResult {
    pub series: Vec<f64>,
    pub average: f64,
}

pub fn localization_probe(
    params: &StrongShiftParameters,
    initial: &VectorState,
    steps: usize,
    region: &[Site],
    options: EvolveOptions,
) -> Result<ProbeResult> {
    let op = WalkOperator::from_strong_shift(params);
    let probe = Probe::region("region", region.to_vec());
    let run = evolve(&op, initial, steps, std::slice::from_ref(&probe), options)?;
    Ok(ProbeResult {
        series: run.series.iter().map(|r| r[0]).collect(),
        average: run.second_half_average()[0],
    })
}

/// How to build `Ψ₀`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// Unit amplitude in one coin component (0-based) at one site.
    PointMass { site: Site, component: usize },
    /// Normalized eigenvector for the `zero`-th zero of `f` (ascending), lifted
    /// with `e^{+i arccos λ}` or its conjugate.
    Eigenvector { zero: usize, conjugate: bool },
    /// Normalized truncated generalized eigenfunction (threshold parameters).
    Generalized { point: ThresholdPoint },
}

impl InitialState {
    pub fn build(&self, params: &StrongShiftParameters, window: WindowSpec, quad: &QuadratureSpec) -> Result<VectorState> {
        let mut state = match self {
            InitialState::PointMass { site, component } => VectorState::point_mass(window, *site, *component)?,
            InitialState::Eigenvector { zero, conjugate } => {
                let zeros = find_f_zeros(params, DEFAULT_GRID);
                let lambda = *zeros.get(*zero).ok_or_else(|| {
                    Error::Precondition(format!("f has {} zeros, index {zero} requested", zeros.len()))
                })?;
                let (mu, mu_bar) = unitary_eigenvalues(lambda)?;
                build_eigenvector(if *conjugate { mu_bar } else { mu }, params, window, quad)?
            }
            InitialState::Generalized { point } => build_generalized_eigenfunction(*point, params, window)?.state,
        };
        state.normalize()?;
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ReferenceSet;
    use num_complex::Complex64;

    #[test]
    fn zero_steps_reproduce_initial_probabilities() {
        let a = ReferenceSet::PsetA.strong_shift();
        let op = WalkOperator::from_strong_shift(&a);
        let w = WindowSpec::new(4, 0).unwrap();
        let psi = VectorState::point_mass(w, (0, 0), 0).unwrap();
        let run = evolve(&op, &psi, 0, &[Probe::site((0, 0)), Probe::site((1, 0))], EvolveOptions::default()).unwrap();
        assert_eq!(run.series, vec![vec![1.0, 0.0]]);
        assert_eq!(run.final_state, psi);
    }

    #[test]
    fn light_cone_guard() {
        let a = ReferenceSet::PsetA.strong_shift();
        let op = WalkOperator::from_strong_shift(&a);
        let w = WindowSpec::new(10, 0).unwrap();
        let psi = VectorState::point_mass(w, (2, 0), 0).unwrap();
        assert!(evolve(&op, &psi, 7, &[], EvolveOptions::default()).is_ok());
        let err = evolve(&op, &psi, 8, &[], EvolveOptions::default()).unwrap_err();
        assert_eq!(err.code(), "E_LIGHT_CONE");
    }

    #[test]
    fn unnormalized_initial_state_is_rejected() {
        let a = ReferenceSet::PsetA.strong_shift();
        let op = WalkOperator::from_strong_shift(&a);
        let mut psi = VectorState::point_mass(WindowSpec::new(4, 0).unwrap(), (0, 0), 0).unwrap();
        psi.scale(Complex64::new(2.0, 0.0));
        assert_eq!(evolve(&op, &psi, 1, &[], EvolveOptions::default()).unwrap_err().code(), "E_PRECONDITION");
    }

    #[test]
    fn probability_conserved_and_light_cone_exact() {
        let c = ReferenceSet::PsetC.strong_shift();
        let op = WalkOperator::from_strong_shift(&c);
        let w = WindowSpec::new(24, 0).unwrap();
        let psi = VectorState::point_mass(w, (0, 0), 2).unwrap();
        let run = evolve(&op, &psi, 20, &[], EvolveOptions::default()).unwrap();
        assert!(run.max_total_deviation() < 1e-12);
        assert!(run.final_state.support_radius().unwrap() <= 20);
    }

    #[test]
    fn empty_region_is_zero() {
        let a = ReferenceSet::PsetA.strong_shift();
        let w = WindowSpec::new(8, 0).unwrap();
        let psi = VectorState::point_mass(w, (0, 0), 0).unwrap();
        let r = localization_probe(&a, &psi, 6, &[], EvolveOptions::default()).unwrap();
        assert!(r.series.iter().all(|p| *p == 0.0));
        assert_eq!(r.average, 0.0);
    }

    #[test]
    fn eigenvector_is_stationary() {
        let a = ReferenceSet::PsetA.strong_shift();
        let op = WalkOperator::from_strong_shift(&a);
        let w = WindowSpec::new(64, 1).unwrap();
        let psi = InitialState::Eigenvector { zero: 0, conjugate: false }
            .build(&a, w, &QuadratureSpec::default())
            .unwrap();
        let region = Probe::columns("x1 in {0,1}", &[0, 1], 64);
        let run = evolve(&op, &psi, 16, &[region], EvolveOptions { edge_mass_tol: 1e-12 }).unwrap();
        assert!(run.max_site_deviation < 1e-10);
        for row in &run.series {
            assert!((row[0] - 1.0).abs() < 1e-10);
        }
    }
}
