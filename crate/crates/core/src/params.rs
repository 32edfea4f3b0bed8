//! Coin and shift parameters, condition checks and the essential interval.
//!
//! Coin vectors are stored in the order `(χ₁₁, χ₁₂, χ₂₁, χ₂₂)`: entries
//! `χ_{j,1}, χ_{j,2}` couple to the component pair of lattice axis `j`.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance for every algebraic parameter constraint.
pub const PARAM_TOL: f64 = 1e-12;

pub const I11: usize = 0;
pub const I12: usize = 1;
pub const I21: usize = 2;
pub const I22: usize = 3;

/// The tuple `(p, q, Φ, Ω)` defining a one-defect split-step walk.
///
/// `phi` is the bulk coin vector and `omega` the defect coin vector at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinParameters {
    pub p: [f64; 2],
    pub q: [Complex64; 2],
    pub phi: [Complex64; 4],
    pub omega: [Complex64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationMode {
    General,
    StrongShift,
}

/// One failed constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `‖Φ‖ ≠ 1` or `‖Ω‖ ≠ 1`.
    Normalization { vector: &'static str, norm: f64 },
    /// `p_j² + |q_j|² ≠ 1`.
    ShiftNormalization { axis: usize, value: f64 },
    /// A non-finite entry anywhere in the tuple.
    NonFinite { field: &'static str },
    C1 { detail: String },
    C2 { detail: String },
    C3 { detail: String },
    /// `Λ` outside `(0, 1)`.
    LambdaRange { lambda: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Normalization { vector, norm } => {
                write!(f, "normalization: |{vector}| = {norm:.17e}")
            }
            Violation::ShiftNormalization { axis, value } => {
                write!(f, "normalization: p{axis}^2 + |q{axis}|^2 = {value:.17e}")
            }
            Violation::NonFinite { field } => write!(f, "non-finite entry in {field}"),
            Violation::C1 { detail } => write!(f, "(C.1) {detail}"),
            Violation::C2 { detail } => write!(f, "(C.2) {detail}"),
            Violation::C3 { detail } => write!(f, "(C.3) {detail}"),
            Violation::LambdaRange { lambda } => write!(f, "Lambda = {lambda} not in (0, 1)"),
        }
    }
}

/// A named constraint and whether it held.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub mode: ValidationMode,
    pub checks: Vec<CheckOutcome>,
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub strong_shift: Option<StrongShiftParameters>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, name: &'static str, found: Vec<Violation>) {
        self.checks.push(CheckOutcome {
            name,
            passed: found.is_empty(),
        });
        self.violations.extend(found);
    }
}

/// Parameters satisfying (C.1)-(C.3), with the real entries and `Λ` cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrongShiftParameters {
    #[serde(skip)]
    coin: CoinParameters,
    pub phi11: f64,
    pub phi21: f64,
    pub phi22: f64,
    pub omega11: f64,
    pub omega21: f64,
    pub omega22: f64,
    pub lambda: f64,
}

impl CoinParameters {
    pub fn new(p: [f64; 2], q: [Complex64; 2], phi: [Complex64; 4], omega: [Complex64; 4]) -> Self {
        CoinParameters { p, q, phi, omega }
    }

    /// Strong-shift tuple (`p = 0`, `q = 1`) from real coin vectors.
    pub fn strong_shift_real(phi: [f64; 4], omega: [f64; 4]) -> Self {
        let one = Complex64::new(1.0, 0.0);
        CoinParameters {
            p: [0.0, 0.0],
            q: [one, one],
            phi: phi.map(|x| Complex64::new(x, 0.0)),
            omega: omega.map(|x| Complex64::new(x, 0.0)),
        }
    }

    /// `a_Φ(p) = Σ_j p_j (|φ_{j,1}|² − |φ_{j,2}|²)`.
    pub fn a_phi(&self) -> f64 {
        diagonal_term(&self.p, &self.phi)
    }

    pub fn a_omega(&self) -> f64 {
        diagonal_term(&self.p, &self.omega)
    }

    /// Coin vector at `site`: `Ω` at the origin, `Φ` elsewhere.
    #[inline]
    pub fn chi(&self, site: (i64, i64)) -> &[Complex64; 4] {
        if site == (0, 0) {
            &self.omega
        } else {
            &self.phi
        }
    }

    /// The vector `φ_q` as its two nonzero entries per axis:
    /// `(value at −e_j, value at +e_j)` for `j = 1, 2`.
    pub fn phi_q_entries(&self) -> [(Complex64, Complex64); 2] {
        let axis = |j: usize| {
            let (a, b) = (2 * j, 2 * j + 1);
            (
                self.q[j] * self.omega[b] * self.phi[a].conj(),
                self.q[j].conj() * self.omega[a] * self.phi[b].conj(),
            )
        };
        [axis(0), axis(1)]
    }

    pub fn validate(&self, mode: ValidationMode) -> ValidationReport {
        validate_parameters(self, mode)
    }

    /// Validate in strong-shift mode and return the refined parameters.
    pub fn strong_shift(&self) -> Result<StrongShiftParameters> {
        let report = validate_parameters(self, ValidationMode::StrongShift);
        match report.strong_shift {
            Some(s) => Ok(s),
            None => Err(Error::InvalidParameters(report.violations)),
        }
    }
}

fn diagonal_term(p: &[f64; 2], v: &[Complex64; 4]) -> f64 {
    (0..2)
        .map(|j| p[j] * (v[2 * j].norm_sqr() - v[2 * j + 1].norm_sqr()))
        .sum()
}

fn vector_norm(v: &[Complex64; 4]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Check the parameter tuple. In strong-shift mode the report carries the
/// refined [`StrongShiftParameters`] when every condition holds.
pub fn validate_parameters(params: &CoinParameters, mode: ValidationMode) -> ValidationReport {
    let mut report = ValidationReport {
        mode,
        checks: Vec::new(),
        violations: Vec::new(),
        notes: Vec::new(),
        strong_shift: None,
    };

    let finite = params.p.iter().all(|x| x.is_finite())
        && params
            .q
            .iter()
            .chain(&params.phi)
            .chain(&params.omega)
            .all(|z| z.re.is_finite() && z.im.is_finite());
    if !finite {
        report.record("finite", vec![Violation::NonFinite { field: "parameters" }]);
        return report;
    }
    report.record("finite", Vec::new());

    let mut norm = Vec::new();
    for (name, v) in [("phi", &params.phi), ("omega", &params.omega)] {
        let n = vector_norm(v);
        if (n - 1.0).abs() > PARAM_TOL {
            norm.push(Violation::Normalization { vector: name, norm: n });
        }
    }
    report.record("coin_normalization", norm);

    let mut shift = Vec::new();
    for j in 0..2 {
        let value = params.p[j] * params.p[j] + params.q[j].norm_sqr();
        if (value - 1.0).abs() > PARAM_TOL {
            shift.push(Violation::ShiftNormalization { axis: j + 1, value });
        }
    }
    report.record("shift_normalization", shift);

    if mode == ValidationMode::General {
        return report;
    }

    let (phi, omega) = (&params.phi, &params.omega);

    let mut c1 = Vec::new();
    if omega[I12].norm() > PARAM_TOL {
        c1.push(Violation::C1 { detail: format!("omega12 = {} is not 0", omega[I12]) });
    }
    if phi[I12].norm() > PARAM_TOL {
        c1.push(Violation::C1 { detail: format!("phi12 = {} is not 0", phi[I12]) });
    }
    let cross = omega[I21] * phi[I22] + omega[I22] * phi[I21];
    if cross.norm() > PARAM_TOL {
        c1.push(Violation::C1 {
            detail: format!("omega21*phi22 + omega22*phi21 = {cross} is not 0"),
        });
    }
    report.record("C1", c1);

    let mut c2 = Vec::new();
    for (name, z) in [
        ("omega11", omega[I11]),
        ("omega21", omega[I21]),
        ("omega22", omega[I22]),
        ("phi11", phi[I11]),
        ("phi21", phi[I21]),
        ("phi22", phi[I22]),
    ] {
        if z.im.abs() > PARAM_TOL {
            c2.push(Violation::C2 { detail: format!("{name} = {z} is not real") });
        }
        if z.re.abs() <= PARAM_TOL {
            c2.push(Violation::C2 { detail: format!("{name} = {z} is zero") });
        }
    }
    report.record("C2", c2);

    // Exact by definition: strong shift means p = 0 and q = 1 with no tolerance.
    let mut c3 = Vec::new();
    for j in 0..2 {
        if params.p[j] != 0.0 {
            c3.push(Violation::C3 { detail: format!("p{} = {} is not 0", j + 1, params.p[j]) });
        }
        if params.q[j] != Complex64::new(1.0, 0.0) {
            c3.push(Violation::C3 { detail: format!("q{} = {} is not 1", j + 1, params.q[j]) });
        }
    }
    report.record("C3", c3);

    if !report.passed() {
        return report;
    }

    let lambda = 2.0 * (phi[I21].re * phi[I22].re).abs();
    if !(lambda > 0.0 && lambda < 1.0) {
        report.record("lambda_range", vec![Violation::LambdaRange { lambda }]);
        return report;
    }
    report.record("lambda_range", Vec::new());

    let s = StrongShiftParameters {
        coin: *params,
        phi11: phi[I11].re,
        phi21: phi[I21].re,
        phi22: phi[I22].re,
        omega11: omega[I11].re,
        omega21: omega[I21].re,
        omega22: omega[I22].re,
        lambda,
    };
    if s.phi22.abs() < s.omega22.abs() {
        report.notes.push("zeros expected: |phi22| < |omega22|".to_string());
    } else {
        report.notes.push("no zeros expected: |phi22| >= |omega22|".to_string());
    }
    if s.is_threshold() {
        report.notes.push("threshold regime: |phi22| = |omega22|".to_string());
    }
    report.strong_shift = Some(s);
    report
}

/// `σ_ess(T) = [a_Φ(p) − 2Σ|q_j φ_{j,1} φ_{j,2}|, a_Φ(p) + 2Σ|q_j φ_{j,1} φ_{j,2}|]`.
pub fn essential_interval(params: &CoinParameters) -> (f64, f64) {
    let half: f64 = 2.0
        * (0..2)
            .map(|j| (params.q[j] * params.phi[2 * j] * params.phi[2 * j + 1]).norm())
            .sum::<f64>();
    let centre = params.a_phi();
    (centre - half, centre + half)
}

impl StrongShiftParameters {
    pub fn coin(&self) -> &CoinParameters {
        &self.coin
    }

    /// `2 φ₂₁ φ₂₂`, the signed hopping amplitude of `T₀` doubled.
    pub fn hopping(&self) -> f64 {
        2.0 * self.phi21 * self.phi22
    }

    /// `sgn(φ₂₁ φ₂₂)`.
    pub fn hopping_sign(&self) -> f64 {
        sgn(self.phi21 * self.phi22)
    }

    /// True when `|φ₂₂| < |ω₂₂|`, the condition for `f` to have zeros.
    pub fn has_zeros(&self) -> bool {
        self.phi22.abs() < self.omega22.abs()
    }

    pub fn is_threshold(&self) -> bool {
        (self.phi22.abs() - self.omega22.abs()).abs() <= PARAM_TOL
    }

    /// Fails unless `λ ∈ T₋ ∪ T₊ = [−1, −Λ) ∪ (Λ, 1]`.
    pub fn check_admissible(&self, lambda: f64) -> Result<()> {
        if lambda.is_finite() && lambda.abs() > self.lambda && lambda.abs() <= 1.0 {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "lambda",
                value: lambda,
                domain: format!("[-1, -{0}) U ({0}, 1]", self.lambda),
            })
        }
    }

    pub fn require_threshold(&self) -> Result<()> {
        if self.is_threshold() {
            Ok(())
        } else {
            Err(Error::NotThreshold {
                phi22: self.phi22.abs(),
                omega22: self.omega22.abs(),
            })
        }
    }
}

/// Sign function with `sgn(0) = 0`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The three reference parameter sets shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSet {
    /// `|φ₂₂| < |ω₂₂|`: `f` has two zeros and the walk localizes.
    PsetA,
    /// `|φ₂₂| = |ω₂₂|`: threshold resonances.
    PsetB,
    /// `|φ₂₂| > |ω₂₂|`: no zeros.
    PsetC,
}

impl ReferenceSet {
    pub const ALL: [ReferenceSet; 3] = [ReferenceSet::PsetA, ReferenceSet::PsetB, ReferenceSet::PsetC];

    pub fn name(self) -> &'static str {
        match self {
            ReferenceSet::PsetA => "pset_a",
            ReferenceSet::PsetB => "pset_b",
            ReferenceSet::PsetC => "pset_c",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "pset_a" => Some(ReferenceSet::PsetA),
            "pset_b" => Some(ReferenceSet::PsetB),
            "pset_c" => Some(ReferenceSet::PsetC),
            _ => None,
        }
    }

    pub fn params(self) -> CoinParameters {
        let phi = [std::f64::consts::FRAC_1_SQRT_2, 0.0, 0.5, 0.5];
        let omega = match self {
            ReferenceSet::PsetA => [0.28f64.sqrt(), 0.0, -0.6, 0.6],
            ReferenceSet::PsetB => [std::f64::consts::FRAC_1_SQRT_2, 0.0, -0.5, 0.5],
            ReferenceSet::PsetC => [0.68f64.sqrt(), 0.0, -0.4, 0.4],
        };
        CoinParameters::strong_shift_real(phi, omega)
    }

    pub fn strong_shift(self) -> StrongShiftParameters {
        self.params()
            .strong_shift()
            .expect("reference parameter sets satisfy (C.1)-(C.3)")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn pset_a_passes_with_lambda_half() {
        let report = ReferenceSet::PsetA.params().validate(ValidationMode::StrongShift);
        assert!(report.passed(), "{:?}", report.violations);
        let s = report.strong_shift.unwrap();
        assert!((s.lambda - 0.5).abs() < 1e-15);
        assert!(s.has_zeros());
    }

    #[test]
    fn all_reference_sets_validate() {
        for set in ReferenceSet::ALL {
            assert!(set.params().strong_shift().is_ok(), "{}", set.name());
        }
        assert!(ReferenceSet::PsetB.strong_shift().is_threshold());
        assert!(!ReferenceSet::PsetC.strong_shift().has_zeros());
    }

    #[test]
    fn zero_second_axis_entries_fail_c2() {
        let params = CoinParameters::strong_shift_real([1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]);
        let report = params.validate(ValidationMode::StrongShift);
        assert!(!report.passed());
        assert!(report.violations.iter().any(|v| matches!(v, Violation::C2 { .. })));
        assert!(!report.violations.iter().any(|v| matches!(v, Violation::C3 { .. })));
    }

    #[test]
    fn nonzero_p_fails_c3() {
        let mut params = ReferenceSet::PsetA.params();
        params.p = [1.0, 0.0];
        params.q = [c(0.0), c(1.0)];
        let report = params.validate(ValidationMode::StrongShift);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::C3 { .. })));
        // Still a valid general walk.
        assert!(params.validate(ValidationMode::General).passed());
    }

    #[test]
    fn unnormalized_coin_is_reported() {
        let mut params = ReferenceSet::PsetA.params();
        params.phi[I11] = c(0.8);
        let report = params.validate(ValidationMode::General);
        assert!(matches!(report.violations[0], Violation::Normalization { vector: "phi", .. }));
    }

    #[test]
    fn complex_entry_fails_c2() {
        let mut params = ReferenceSet::PsetA.params();
        params.omega[I11] = Complex64::new(0.0, 0.28f64.sqrt());
        let report = params.validate(ValidationMode::StrongShift);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::C2 { .. })));
    }

    #[test]
    fn nan_is_rejected() {
        let mut params = ReferenceSet::PsetA.params();
        params.p[0] = f64::NAN;
        assert!(!params.validate(ValidationMode::General).passed());
    }

    #[test]
    fn essential_interval_reference() {
        let (lo, hi) = essential_interval(&ReferenceSet::PsetA.params());
        assert!((lo + 0.5).abs() < 1e-15 && (hi - 0.5).abs() < 1e-15);

        let mut degenerate = ReferenceSet::PsetA.params();
        degenerate.p = [1.0, 1.0];
        degenerate.q = [c(0.0), c(0.0)];
        let (lo, hi) = essential_interval(&degenerate);
        assert_eq!(lo, hi);
        assert!((lo - degenerate.a_phi()).abs() < 1e-15);
    }

    #[test]
    fn a_phi_general() {
        let mut params = ReferenceSet::PsetA.params();
        params.p = [1.0, 0.0];
        params.q = [c(0.0), c(1.0)];
        assert!((params.a_phi() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reference_names_round_trip() {
        for set in ReferenceSet::ALL {
            assert_eq!(ReferenceSet::from_name(set.name()), Some(set));
        }
        assert_eq!(ReferenceSet::from_name("PSET-B"), Some(ReferenceSet::PsetB));
        assert_eq!(ReferenceSet::from_name("pset_d"), None);
    }
}
