//! Shift, coin, walk, boundary and discriminant operators on finite windows.
//!
//! Reads outside the window are zero. Every operator here moves amplitude by
//! at most one site per axis, so after `k` applications the values at sites
//! with edge distance `≥ k` equal those of the infinite-lattice operator
//! applied to the zero-extended input.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{ScalarField, Site, VectorState};
use crate::params::{
    validate_parameters, CoinParameters, StrongShiftParameters, ValidationMode, I21, I22,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub type CoinMatrix = [[Complex64; 4]; 4];

/// `2|χ⟩⟨χ| − 1`.
pub fn reflection(chi: &[Complex64; 4]) -> CoinMatrix {
    let mut m = [[ZERO; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = 2.0 * chi[i] * chi[j].conj();
            if i == j {
                *entry -= 1.0;
            }
        }
    }
    m
}

#[inline]
fn mat_vec(m: &CoinMatrix, v: &[Complex64; 4]) -> [Complex64; 4] {
    let mut out = [ZERO; 4];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
    }
    out
}

/// Which route computes the discriminant `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscriminantMethod {
    /// `d S d*` composed from the operators.
    ViaDsd,
    /// `χ₂₁ L₂ χ₂₂ + χ₂₂ L₂* χ₂₁`, valid under the strong-shift conditions.
    ClosedForm,
}

/// The one-defect walk `U = SC` together with its boundary maps.
#[derive(Debug, Clone)]
pub struct WalkOperator {
    params: CoinParameters,
    strong: Option<StrongShiftParameters>,
    bulk: CoinMatrix,
    defect: CoinMatrix,
}

impl WalkOperator {
    /// Fails when the tuple is not a valid general walk (normalization).
    pub fn new(params: CoinParameters) -> Result<Self> {
        let report = validate_parameters(&params, ValidationMode::General);
        if !report.passed() {
            return Err(Error::InvalidParameters(report.violations));
        }
        Ok(WalkOperator {
            params,
            strong: params.strong_shift().ok(),
            bulk: reflection(&params.phi),
            defect: reflection(&params.omega),
        })
    }

    pub fn from_strong_shift(params: &StrongShiftParameters) -> Self {
        let coin = *params.coin();
        WalkOperator {
            params: coin,
            strong: Some(*params),
            bulk: reflection(&coin.phi),
            defect: reflection(&coin.omega),
        }
    }

    pub fn params(&self) -> &CoinParameters {
        &self.params
    }

    pub fn strong_shift(&self) -> Option<&StrongShiftParameters> {
        self.strong.as_ref()
    }

    pub fn coin_matrix(&self, site: Site) -> &CoinMatrix {
        if site == (0, 0) {
            &self.defect
        } else {
            &self.bulk
        }
    }

    /// `S = S₁ ⊕ S₂`.
    pub fn apply_shift(&self, state: &VectorState) -> VectorState {
        let w = *state.window();
        let side = w.side();
        let input = state.values();
        let [p1, p2] = self.params.p;
        let [q1, q2] = self.params.q;
        let (q1c, q2c) = (q1.conj(), q2.conj());

        let mut out = vec![[ZERO; 4]; w.site_count()];
        out.par_chunks_mut(side).enumerate().for_each(|(r, row)| {
            let base = r * side;
            for (c, slot) in row.iter_mut().enumerate() {
                let here = &input[base + c];
                let next1 = if r + 1 < side { input[base + side + c][1] } else { ZERO };
                let prev1 = if r > 0 { input[base - side + c][0] } else { ZERO };
                let next2 = if c + 1 < side { input[base + c + 1][3] } else { ZERO };
                let prev2 = if c > 0 { input[base + c - 1][2] } else { ZERO };
                *slot = [
                    p1 * here[0] + q1 * next1,
                    q1c * prev1 - p1 * here[1],
                    p2 * here[2] + q2 * next2,
                    q2c * prev2 - p2 * here[3],
                ];
            }
        });
        VectorState::from_values(w, out).expect("output sized to window")
    }

    /// Sitewise reflection `C(x) = 2|χ(x)⟩⟨χ(x)| − 1`.
    pub fn apply_coin(&self, state: &VectorState) -> VectorState {
        let w = *state.window();
        let origin = w.index((0, 0)).expect("window contains the origin");
        let mut out: Vec<[Complex64; 4]> = state
            .values()
            .par_iter()
            .map(|v| mat_vec(&self.bulk, v))
            .collect();
        out[origin] = mat_vec(&self.defect, &state.values()[origin]);
        VectorState::from_values(w, out).expect("output sized to window")
    }

    /// `U = SC`.
    pub fn apply_walk(&self, state: &VectorState) -> VectorState {
        self.apply_shift(&self.apply_coin(state))
    }

    /// `(dΨ)(x) = ⟨χ(x), Ψ(x)⟩`.
    pub fn apply_boundary(&self, state: &VectorState) -> ScalarField {
        let w = *state.window();
        ScalarField::from_fn(w, |s| {
            let chi = self.params.chi(s);
            let v = state.get(s);
            (0..4).map(|c| chi[c].conj() * v[c]).sum()
        })
    }

    /// `(d*f)(x) = χ(x) f(x)`.
    pub fn apply_boundary_adjoint(&self, field: &ScalarField) -> VectorState {
        let w = *field.window();
        VectorState::from_fn(w, |s| {
            let chi = self.params.chi(s);
            let f = field.get(s);
            [chi[0] * f, chi[1] * f, chi[2] * f, chi[3] * f]
        })
    }

    pub fn apply_discriminant(&self, field: &ScalarField, method: DiscriminantMethod) -> Result<ScalarField> {
        match method {
            DiscriminantMethod::ViaDsd => {
                Ok(self.apply_boundary(&self.apply_shift(&self.apply_boundary_adjoint(field))))
            }
            DiscriminantMethod::ClosedForm => {
                if self.strong.is_none() {
                    return Err(Error::UnsupportedMode(
                        "closed-form discriminant needs (C.1)-(C.3)",
                    ));
                }
                let p = &self.params;
                Ok(ScalarField::from_fn(*field.window(), |(x1, x2)| {
                    let here = p.chi((x1, x2));
                    let up = p.chi((x1, x2 + 1));
                    let down = p.chi((x1, x2 - 1));
                    here[I21].conj() * up[I22] * field.get((x1, x2 + 1))
                        + here[I22].conj() * down[I21] * field.get((x1, x2 - 1))
                }))
            }
        }
    }

    /// The defect-free discriminant
    /// `T₀ = a_Φ(p) + Σ_j (q_j φ̄_{j,1} φ_{j,2} L_j + q̄_j φ_{j,1} φ̄_{j,2} L_j*)`.
    pub fn apply_t0(&self, field: &ScalarField) -> ScalarField {
        let p = &self.params;
        let diag = p.a_phi();
        let fwd: [Complex64; 2] =
            [0, 1].map(|j| p.q[j] * p.phi[2 * j].conj() * p.phi[2 * j + 1]);
        let bwd: [Complex64; 2] =
            [0, 1].map(|j| p.q[j].conj() * p.phi[2 * j] * p.phi[2 * j + 1].conj());
        ScalarField::from_fn(*field.window(), |(x1, x2)| {
            diag * field.get((x1, x2))
                + fwd[0] * field.get((x1 + 1, x2))
                + bwd[0] * field.get((x1 - 1, x2))
                + fwd[1] * field.get((x1, x2 + 1))
                + bwd[1] * field.get((x1, x2 - 1))
        })
    }

    /// The vector `φ_q` on `window`.
    pub fn phi_q(&self, window: crate::lattice::WindowSpec) -> ScalarField {
        let entries = self.params.phi_q_entries();
        ScalarField::from_fn(window, |(x1, x2)| {
            let mut v = ZERO;
            if x2 == 0 {
                if x1 == -1 {
                    v += entries[0].0;
                }
                if x1 == 1 {
                    v += entries[0].1;
                }
            }
            if x1 == 0 {
                if x2 == -1 {
                    v += entries[1].0;
                }
                if x2 == 1 {
                    v += entries[1].1;
                }
            }
            v
        })
    }
}

/// Largest entrywise deviation between two states over the interior of `a`'s window.
pub fn interior_max_diff(a: &VectorState, b: &VectorState) -> f64 {
    a.window()
        .interior_sites()
        .map(|s| {
            let (u, v) = (a.get(s), b.get(s));
            (0..4).map(|c| (u[c] - v[c]).norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

pub fn interior_max_diff_scalar(a: &ScalarField, b: &ScalarField) -> f64 {
    a.window()
        .interior_sites()
        .map(|s| (a.get(s) - b.get(s)).norm())
        .fold(0.0, f64::max)
}
