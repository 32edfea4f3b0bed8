//! Finite windows of `Z²` and the fields living on them.
//!
//! A window of half-width `N` covers `{−N..N}²`. Storage is dense and
//! row-major with `x₁` selecting the row, so `±e₂` neighbours are adjacent
//! in memory and `±e₁` neighbours are one row apart.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type Site = (i64, i64);

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WindowSpec {
    half_width: usize,
    margin: usize,
}

impl WindowSpec {
    pub fn new(half_width: usize, margin: usize) -> Result<Self> {
        if half_width == 0 {
            return Err(Error::InvalidWindow("half-width must be positive".into()));
        }
        if margin >= half_width {
            return Err(Error::InvalidWindow(format!(
                "margin {margin} must be smaller than the half-width {half_width}"
            )));
        }
        Ok(WindowSpec { half_width, margin })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn with_margin(&self, margin: usize) -> Result<Self> {
        WindowSpec::new(self.half_width, margin)
    }

    /// Sites per row, `2N + 1`.
    #[inline]
    pub fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    #[inline]
    pub fn site_count(&self) -> usize {
        self.side() * self.side()
    }

    #[inline]
    pub fn contains(&self, (x1, x2): Site) -> bool {
        let n = self.half_width as i64;
        x1.abs() <= n && x2.abs() <= n
    }

    #[inline]
    pub fn index(&self, site: Site) -> Option<usize> {
        if self.contains(site) {
            let n = self.half_width as i64;
            Some((site.0 + n) as usize * self.side() + (site.1 + n) as usize)
        } else {
            None
        }
    }

    #[inline]
    pub fn site(&self, index: usize) -> Site {
        let n = self.half_width as i64;
        let side = self.side();
        ((index / side) as i64 - n, (index % side) as i64 - n)
    }

    /// Number of sites between `site` and the nearest edge row or column.
    #[inline]
    pub fn edge_distance(&self, (x1, x2): Site) -> usize {
        self.half_width - x1.unsigned_abs().max(x2.unsigned_abs()) as usize
    }

    /// Interior sites are at least `margin` sites away from the edge.
    #[inline]
    pub fn is_interior(&self, site: Site) -> bool {
        self.contains(site) && self.edge_distance(site) >= self.margin
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.site_count()).map(move |i| self.site(i))
    }

    pub fn interior_sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.sites().filter(move |&s| self.is_interior(s))
    }
}

/// `ℓ²` and sup norms of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub l2: f64,
    pub sup: f64,
}

/// A `C⁴`-valued field on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorState {
    window: WindowSpec,
    values: Vec<[Complex64; 4]>,
}

/// A scalar field on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    window: WindowSpec,
    values: Vec<Complex64>,
}

macro_rules! field_common {
    ($ty:ident, $elem:ty, $zero:expr, $sqr:expr) => {
        impl $ty {
            pub fn zeros(window: WindowSpec) -> Self {
                $ty {
                    window,
                    values: vec![$zero; window.site_count()],
                }
            }

            pub fn from_fn(window: WindowSpec, mut f: impl FnMut(Site) -> $elem) -> Self {
                let values = (0..window.site_count()).map(|i| f(window.site(i))).collect();
                $ty { window, values }
            }

            pub fn from_values(window: WindowSpec, values: Vec<$elem>) -> Result<Self> {
                if values.len() != window.site_count() {
                    return Err(Error::WindowMismatch(format!(
                        "{} values for a window of {} sites",
                        values.len(),
                        window.site_count()
                    )));
                }
                Ok($ty { window, values })
            }

            pub fn window(&self) -> &WindowSpec {
                &self.window
            }

            /// Same values, different interior margin.
            pub fn with_window_margin(mut self, margin: usize) -> Result<Self> {
                self.window = self.window.with_margin(margin)?;
                Ok(self)
            }

            pub fn values(&self) -> &[$elem] {
                &self.values
            }

            pub fn values_mut(&mut self) -> &mut [$elem] {
                &mut self.values
            }

            /// Value at `site`; zero outside the window.
            #[inline]
            pub fn get(&self, site: Site) -> $elem {
                match self.window.index(site) {
                    Some(i) => self.values[i],
                    None => $zero,
                }
            }

            /// Squared modulus at one site.
            #[inline]
            pub fn site_norm_sqr(&self, site: Site) -> f64 {
                let v = self.get(site);
                $sqr(&v)
            }

            pub fn norm_sqr(&self) -> f64 {
                self.values.iter().map($sqr).sum()
            }

            pub fn norms(&self) -> Norms {
                norms_of(self.values.iter().map($sqr))
            }

            /// Norms restricted to the window's interior sites.
            pub fn interior_norms(&self) -> Norms {
                let w = self.window;
                norms_of(
                    self.values
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| w.is_interior(w.site(*i)))
                        .map(|(_, v)| $sqr(v)),
                )
            }

            /// Largest `max(|x₁|, |x₂|)` over sites with nonzero value, or `None` for the zero field.
            pub fn support_radius(&self) -> Option<usize> {
                let w = self.window;
                self.values
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| $sqr(v) > 0.0)
                    .map(|(i, _)| {
                        let (x1, x2) = w.site(i);
                        x1.unsigned_abs().max(x2.unsigned_abs()) as usize
                    })
                    .max()
            }

            /// Squared norm carried by sites fewer than `band` sites from the edge.
            pub fn edge_band_mass(&self, band: usize) -> f64 {
                let w = self.window;
                self.values
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| w.edge_distance(w.site(*i)) < band)
                    .map(|(_, v)| $sqr(v))
                    .sum()
            }

            pub fn scale(&mut self, factor: Complex64) {
                for v in &mut self.values {
                    *v = v.times(factor);
                }
            }

            /// Rescale to unit `ℓ²` norm. Fails on the zero field.
            pub fn normalize(&mut self) -> Result<f64> {
                let n = self.norm_sqr().sqrt();
                if n == 0.0 {
                    return Err(Error::Precondition("cannot normalize the zero field".into()));
                }
                self.scale(Complex64::new(1.0 / n, 0.0));
                Ok(n)
            }

            /// `self − other` sitewise; windows must agree.
            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.zip_with(other, |a, b| a.minus(b))
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                self.zip_with(other, |a, b| a.plus(b))
            }

            /// `self + factor·other`.
            pub fn add_scaled(&self, factor: Complex64, other: &Self) -> Result<Self> {
                self.zip_with(other, |a, b| a.plus(b.times(factor)))
            }

            fn zip_with(&self, other: &Self, f: impl Fn($elem, $elem) -> $elem) -> Result<Self> {
                if self.window.half_width() != other.window.half_width() {
                    return Err(Error::WindowMismatch(format!(
                        "half-widths {} and {}",
                        self.window.half_width(),
                        other.window.half_width()
                    )));
                }
                let values = self
                    .values
                    .iter()
                    .zip(&other.values)
                    .map(|(a, b)| f(*a, *b))
                    .collect();
                Ok($ty {
                    window: self.window,
                    values,
                })
            }
        }

        impl Index<Site> for $ty {
            type Output = $elem;
            fn index(&self, site: Site) -> &$elem {
                let i = self.window.index(site).expect("site outside window");
                &self.values[i]
            }
        }

        impl IndexMut<Site> for $ty {
            fn index_mut(&mut self, site: Site) -> &mut $elem {
                let i = self.window.index(site).expect("site outside window");
                &mut self.values[i]
            }
        }
    };
}

fn norms_of(squares: impl Iterator<Item = f64>) -> Norms {
    let (sum, max) = squares.fold((0.0f64, 0.0f64), |(s, m), x| (s + x, m.max(x)));
    Norms {
        l2: sum.sqrt(),
        sup: max.sqrt(),
    }
}

trait Elem: Copy {
    fn times(self, f: Complex64) -> Self;
    fn plus(self, o: Self) -> Self;
    fn minus(self, o: Self) -> Self;
}

impl Elem for Complex64 {
    fn times(self, f: Complex64) -> Self {
        self * f
    }
    fn plus(self, o: Self) -> Self {
        self + o
    }
    fn minus(self, o: Self) -> Self {
        self - o
    }
}

impl Elem for [Complex64; 4] {
    fn times(self, f: Complex64) -> Self {
        self.map(|z| z * f)
    }
    fn plus(self, o: Self) -> Self {
        [self[0] + o[0], self[1] + o[1], self[2] + o[2], self[3] + o[3]]
    }
    fn minus(self, o: Self) -> Self {
        [self[0] - o[0], self[1] - o[1], self[2] - o[2], self[3] - o[3]]
    }
}

#[inline]
pub(crate) fn vec4_norm_sqr(v: &[Complex64; 4]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

#[inline]
fn scalar_norm_sqr(v: &Complex64) -> f64 {
    v.norm_sqr()
}

field_common!(VectorState, [Complex64; 4], [ZERO; 4], vec4_norm_sqr);
field_common!(ScalarField, Complex64, ZERO, scalar_norm_sqr);

impl VectorState {
    /// Unit amplitude in coin component `component` (0-based) at `site`.
    pub fn point_mass(window: WindowSpec, site: Site, component: usize) -> Result<Self> {
        if component >= 4 {
            return Err(Error::Precondition(format!("component {component} out of range 0..4")));
        }
        let mut state = VectorState::zeros(window);
        let i = window
            .index(site)
            .ok_or_else(|| Error::WindowMismatch(format!("site {site:?} outside window")))?;
        state.values[i][component] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// `⟨self, other⟩`, antilinear in the first argument.
    pub fn inner(&self, other: &VectorState) -> Result<Complex64> {
        if self.window.half_width() != other.window.half_width() {
            return Err(Error::WindowMismatch("inner product of different windows".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (0..4).map(|c| a[c].conj() * b[c]).sum::<Complex64>())
            .sum())
    }

    /// Largest pointwise `C⁴` norm over interior sites.
    pub fn interior_sup(&self) -> f64 {
        self.interior_norms().sup
    }

    /// Copy onto a window of a different size; sites outside the target are dropped.
    pub fn resize(&self, window: WindowSpec) -> VectorState {
        VectorState::from_fn(window, |s| self.get(s))
    }
}

impl ScalarField {
    /// The indicator `1_{{x}}`.
    pub fn indicator(window: WindowSpec, site: Site) -> Result<Self> {
        let mut f = ScalarField::zeros(window);
        let i = window
            .index(site)
            .ok_or_else(|| Error::WindowMismatch(format!("site {site:?} outside window")))?;
        f.values[i] = Complex64::new(1.0, 0.0);
        Ok(f)
    }

    pub fn inner(&self, other: &ScalarField) -> Result<Complex64> {
        if self.window.half_width() != other.window.half_width() {
            return Err(Error::WindowMismatch("inner product of different windows".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(n: usize) -> WindowSpec {
        WindowSpec::new(n, 0).unwrap()
    }

    #[test]
    fn rejects_bad_windows() {
        assert!(WindowSpec::new(0, 0).is_err());
        assert!(WindowSpec::new(4, 4).is_err());
        assert!(WindowSpec::new(4, 3).is_ok());
    }

    #[test]
    fn index_round_trip_and_layout() {
        let win = w(3);
        assert_eq!(win.site_count(), 49);
        for i in 0..win.site_count() {
            assert_eq!(win.index(win.site(i)), Some(i));
        }
        let i = win.index((1, 2)).unwrap();
        assert_eq!(win.index((1, 3)), Some(i + 1));
        assert_eq!(win.index((2, 2)), Some(i + win.side()));
        assert_eq!(win.index((4, 0)), None);
    }

    #[test]
    fn interior_respects_margin() {
        let win = WindowSpec::new(4, 2).unwrap();
        assert!(win.is_interior((2, -2)));
        assert!(!win.is_interior((3, 0)));
        assert_eq!(win.interior_sites().count(), 25);
    }

    #[test]
    fn norms_of_simple_states() {
        let win = w(8);
        let unit = VectorState::point_mass(win, (0, 0), 0).unwrap();
        assert_eq!(unit.norms(), Norms { l2: 1.0, sup: 1.0 });

        let zero = VectorState::zeros(win);
        assert_eq!(zero.norms(), Norms { l2: 0.0, sup: 0.0 });
        assert_eq!(zero.support_radius(), None);

        let column = VectorState::from_fn(win, |(x1, _)| {
            let mut v = [ZERO; 4];
            if x1 == 0 {
                v[0] = Complex64::new(1.0, 0.0);
            }
            v
        });
        let n = column.norms();
        assert!((n.l2 - 17f64.sqrt()).abs() < 1e-15);
        assert_eq!(n.sup, 1.0);
        assert_eq!(column.support_radius(), Some(8));
    }

    #[test]
    fn edge_band_mass_counts_outer_rings() {
        let win = w(5);
        let s = VectorState::point_mass(win, (0, 4), 2).unwrap();
        assert_eq!(s.edge_band_mass(1), 0.0);
        assert_eq!(s.edge_band_mass(2), 1.0);
    }

    proptest! {
        #[test]
        fn sup_never_exceeds_l2(
            values in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 4 * 25),
        ) {
            let win = w(2);
            let mut chunks = values.chunks(4);
            let state = VectorState::from_fn(win, |_| {
                let c = chunks.next().unwrap();
                [0, 1, 2, 3].map(|k| Complex64::new(c[k].0, c[k].1))
            });
            let n = state.norms();
            prop_assert!(n.sup <= n.l2);
            let scalar = ScalarField::from_fn(win, |s| state.get(s)[0]);
            let n = scalar.norms();
            prop_assert!(n.sup <= n.l2);
        }
    }
}
