//! Closed-form energetics of the two-phase material.
//!
//! The raw energy density of a point that may be either sound (stiff well
//! `b ξ²`) or damaged (soft well `K + a ξ²`) is non-convex. Fine mixtures of
//! the two phases relax it to its convex envelope, which is quadratic near the
//! origin, affine on a plateau `ξ1 < |ξ| < ξ2`, and follows the soft well
//! beyond `ξ2`. In one dimension the effective stiffness of a mixture is the
//! harmonic mean of the phases, which gives the optimal damage fraction in
//! closed form.

use crate::error::{Error, Result};
use crate::material::MaterialParams;

/// Coefficients of `min(K + a ξ², b ξ²)` with `0 < a < b` and `K > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoWellParams {
    pub a: f64,
    pub b: f64,
    pub k: f64,
}

/// Kink strains and plateau derivative of the convex envelope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeKinks {
    pub xi1: f64,
    pub xi2: f64,
    pub plateau_slope: f64,
}

/// Set of strains at which the envelope derivative takes a given stress.
///
/// `lo == hi` except on the plateau, where every strain of the segment
/// `[lo, hi]` carries the same stress.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrainRange {
    pub lo: f64,
    pub hi: f64,
}

impl TwoWellParams {
    pub fn new(a: f64, b: f64, k: f64) -> Result<Self> {
        if !(a > 0.0 && b > a && k > 0.0 && b.is_finite() && k.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "two-well coefficients need 0 < a < b and K > 0, got a = {a}, b = {b}, K = {k}"
            )));
        }
        Ok(TwoWellParams { a, b, k })
    }

    /// Pointwise energy of a damage-model cell at scale `eps`.
    ///
    /// The soft well is the damaged phase `ε a0`, charged `κ Θ / ε` per unit
    /// volume; the stiff well is the current homogenized stiffness. Returns
    /// `None` when the cell has nothing left to damage (`Θ = 0`, or its
    /// stiffness already equals the damaged one).
    pub fn damage_cell(
        m: &MaterialParams,
        eps: f64,
        sound_fraction: f64,
        stiffness: f64,
    ) -> Option<Self> {
        let weak = eps * m.a0;
        if sound_fraction <= 0.0 || stiffness <= weak * (1.0 + 1e-12) {
            return None;
        }
        TwoWellParams::new(0.5 * weak, 0.5 * stiffness, m.kappa * sound_fraction / eps).ok()
    }

    pub fn raw_energy(&self, xi: f64) -> f64 {
        let x2 = xi * xi;
        (self.k + self.a * x2).min(self.b * x2)
    }

    pub fn kinks(&self) -> EnvelopeKinks {
        let TwoWellParams { a, b, k } = *self;
        let xi1 = (a * k / (b * (b - a))).sqrt();
        EnvelopeKinks {
            xi1,
            xi2: b / a * xi1,
            plateau_slope: (4.0 * a * b * k / (b - a)).sqrt(),
        }
    }

    pub fn convex_envelope(&self, xi: f64) -> f64 {
        let EnvelopeKinks {
            xi1,
            xi2,
            plateau_slope,
        } = self.kinks();
        let ax = xi.abs();
        if ax <= xi1 {
            self.b * xi * xi
        } else if ax < xi2 {
            ax * plateau_slope - self.a * self.k / (self.b - self.a)
        } else {
            self.k + self.a * xi * xi
        }
    }

    /// Derivative of the envelope, i.e. the stress carried at strain `xi`.
    pub fn envelope_derivative(&self, xi: f64) -> f64 {
        let EnvelopeKinks {
            xi1,
            xi2,
            plateau_slope,
        } = self.kinks();
        let ax = xi.abs();
        if ax <= xi1 {
            2.0 * self.b * xi
        } else if ax < xi2 {
            plateau_slope.copysign(xi)
        } else {
            2.0 * self.a * xi
        }
    }

    /// Inverse of [`Self::envelope_derivative`].
    pub fn strain_at_stress(&self, sigma: f64) -> StrainRange {
        let EnvelopeKinks {
            xi1,
            xi2,
            plateau_slope,
        } = self.kinks();
        let s = sigma.abs();
        if s < plateau_slope {
            let x = sigma / (2.0 * self.b);
            StrainRange { lo: x, hi: x }
        } else if s > plateau_slope {
            let x = sigma / (2.0 * self.a);
            StrainRange { lo: x, hi: x }
        } else if sigma >= 0.0 {
            StrainRange { lo: xi1, hi: xi2 }
        } else {
            StrainRange { lo: -xi2, hi: -xi1 }
        }
    }

    /// Mixture energy `K θ + (θ/a + (1-θ)/b)⁻¹ ξ²` of a laminate with weak fraction θ.
    pub fn mixture_energy(&self, theta: f64, xi: f64) -> f64 {
        self.k * theta + xi * xi / (theta / self.a + (1.0 - theta) / self.b)
    }

    /// Unique weak fraction minimizing [`Self::mixture_energy`] at strain `xi`.
    pub fn optimal_theta(&self, xi: f64) -> f64 {
        let EnvelopeKinks { xi1, xi2, .. } = self.kinks();
        let ax = xi.abs();
        if ax <= xi1 {
            0.0
        } else if ax >= xi2 {
            1.0
        } else {
            // stationarity: c |ξ| = sqrt(abK/(b-a)) for the mixture coefficient c
            let c = (self.a * self.b * self.k / (self.b - self.a)).sqrt() / ax;
            let theta = (1.0 / c - 1.0 / self.b) / (1.0 / self.a - 1.0 / self.b);
            theta.clamp(0.0, 1.0)
        }
    }
}

/// Effective stiffness of a 1D laminate with weak fraction `theta`.
pub fn gclosure_1d(theta: f64, a_weak: f64, a_strong: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::FractionOutOfRange(theta));
    }
    if !(a_weak > 0.0 && a_weak <= a_strong) {
        return Err(Error::InvalidParams(format!(
            "need 0 < a_weak <= a_strong, got {a_weak}, {a_strong}"
        )));
    }
    if theta == 0.0 {
        return Ok(a_strong);
    }
    Ok(a_weak * a_strong / (theta * a_strong + (1.0 - theta) * a_weak))
}

/// Limit energy density `inf_η (a1/2)|ξ-η|² + s*|η|` in closed (Huber) form.
pub fn wbar_1d(m: &MaterialParams, xi: f64) -> f64 {
    let s = m.yield_stress();
    let ax = xi.abs();
    if ax <= s / m.a1 {
        0.5 * m.a1 * xi * xi
    } else {
        s * ax - s * s / (2.0 * m.a1)
    }
}

/// Isotropic constraint function evaluated on ordered eigenvalues `τ1 ≤ … ≤ τN`.
pub fn g_constraint(tau: &[f64], lam0: f64, mu0: f64) -> Result<f64> {
    if !(lam0 > 0.0 && mu0 > 0.0) {
        return Err(Error::InvalidParams(format!(
            "Lamé coefficients must be positive, got λ0 = {lam0}, μ0 = {mu0}"
        )));
    }
    let (Some(&t1), Some(&tn)) = (tau.first(), tau.last()) else {
        return Err(Error::InvalidParams("no eigenvalues".into()));
    };
    if tau.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::UnsortedEigenvalues);
    }
    let p_wave = lam0 + 2.0 * mu0;
    let m = p_wave / (2.0 * (lam0 + mu0)) * (t1 + tn);
    Ok(if m < t1 {
        t1 * t1 / p_wave
    } else if m <= tn {
        (t1 - tn).powi(2) / (4.0 * mu0) + (t1 + tn).powi(2) / (4.0 * (lam0 + mu0))
    } else {
        tn * tn / p_wave
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig() -> TwoWellParams {
        TwoWellParams::new(0.1, 1.0, 2.0).unwrap()
    }

    fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            if f(x1) <= f(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        let x = 0.5 * (lo + hi);
        f(x).min(f(0.0)).min(f(1.0))
    }

    #[test]
    fn raw_energy_examples() {
        let p = fig();
        assert_eq!(p.raw_energy(0.0), 0.0);
        assert!((p.raw_energy(1.0) - 1.0).abs() < 1e-15);
        assert!((p.raw_energy(4.714) - (2.0 + 0.1 * 4.714f64.powi(2))).abs() < 1e-12);
        assert!((p.raw_energy(4.714) - 4.222).abs() < 1e-3);
    }

    #[test]
    fn kinks_match_plotted_points() {
        let k = fig().kinks();
        assert!((k.xi1 - 0.47140).abs() < 1e-5);
        assert!((k.xi2 - 4.7140).abs() < 1e-4);
        assert!((k.plateau_slope - 0.94281).abs() < 1e-5);
        let p = fig();
        assert!((p.convex_envelope(k.xi1) - 0.2222).abs() < 1e-4);
        assert!((p.convex_envelope(k.xi2) - 4.2222).abs() < 1e-4);
    }

    #[test]
    fn envelope_plateau_value() {
        let want = 2.0 * (8.0f64 / 9.0).sqrt() - 2.0 / 9.0;
        assert!((fig().convex_envelope(2.0) - want).abs() < 1e-14);
        let oracle = golden_min(|t| fig().mixture_energy(t, 2.0), 0.0, 1.0);
        assert!((fig().convex_envelope(2.0) - oracle).abs() < 1e-10);
    }

    #[test]
    fn envelope_is_c1_at_kinks() {
        let p = fig();
        let k = p.kinks();
        for x in [k.xi1, k.xi2, -k.xi1, -k.xi2] {
            let h = 1e-7;
            let l = p.convex_envelope(x - h);
            let r = p.convex_envelope(x + h);
            assert!((p.convex_envelope(x) - 0.5 * (l + r)).abs() < 1e-10);
            let dl = (p.convex_envelope(x) - l) / h;
            let dr = (r - p.convex_envelope(x)) / h;
            assert!((dl - dr).abs() < 1e-5, "kink at {x}: {dl} vs {dr}");
        }
    }

    #[test]
    fn optimal_theta_examples() {
        let p = fig();
        assert_eq!(p.optimal_theta(0.3), 0.0);
        assert_eq!(p.optimal_theta(5.0), 1.0);
        let theta = p.optimal_theta(2.0);
        let c = (0.2f64 / 0.9).sqrt() / 2.0;
        assert!((theta - (1.0 / c - 1.0) / 9.0).abs() < 1e-14);
        assert!((p.mixture_energy(theta, 2.0) - p.convex_envelope(2.0)).abs() < 1e-10);
    }

    #[test]
    fn strain_inverse_round_trip() {
        let p = fig();
        let k = p.kinks();
        for xi in [-6.0, -0.3, 0.0, 0.2, 0.47, 5.0, 7.5] {
            let s = p.envelope_derivative(xi);
            let r = p.strain_at_stress(s);
            assert!((r.lo - xi).abs() < 1e-12 && (r.hi - xi).abs() < 1e-12);
        }
        let r = p.strain_at_stress(k.plateau_slope);
        assert_eq!((r.lo, r.hi), (k.xi1, k.xi2));
        let r = p.strain_at_stress(-k.plateau_slope);
        assert_eq!((r.lo, r.hi), (-k.xi2, -k.xi1));
    }

    #[test]
    fn damage_cell_plateau_slope() {
        let m = MaterialParams::default();
        let eps = 0.02;
        let p = TwoWellParams::damage_cell(&m, eps, 1.0, m.a1).unwrap();
        let want = m.yield_stress() * m.overshoot(eps).unwrap();
        assert!((p.kinks().plateau_slope - want).abs() < 1e-12);
        assert!((want - (2.0f64 / 1.98).sqrt()).abs() < 1e-12);
        assert!(TwoWellParams::damage_cell(&m, eps, 0.0, m.a1).is_none());
        assert!(TwoWellParams::damage_cell(&m, eps, 0.3, eps * m.a0).is_none());
    }

    #[test]
    fn kink_grows_with_offset() {
        let r = (TwoWellParams::new(0.1, 1.0, 400.0).unwrap().kinks().xi1)
            / (TwoWellParams::new(0.1, 1.0, 4.0).unwrap().kinks().xi1);
        assert!((r - 10.0).abs() < 1e-12);
    }

    #[test]
    fn gclosure_examples() {
        assert_eq!(gclosure_1d(0.0, 1.0, 2.0).unwrap(), 2.0);
        assert_eq!(gclosure_1d(1.0, 1.0, 2.0).unwrap(), 1.0);
        assert!((gclosure_1d(0.5, 1.0, 2.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            gclosure_1d(1.5, 1.0, 2.0),
            Err(Error::FractionOutOfRange(_))
        ));
        assert!(gclosure_1d(-0.1, 1.0, 2.0).is_err());
    }

    #[test]
    fn wbar_examples() {
        let m = MaterialParams::default();
        assert_eq!(wbar_1d(&m, 0.0), 0.0);
        assert!((wbar_1d(&m, 0.5) - 0.25).abs() < 1e-15);
        assert!((wbar_1d(&m, 2.0) - 1.75).abs() < 1e-15);
        assert!((wbar_1d(&m, -2.0) - 1.75).abs() < 1e-15);
    }

    #[test]
    fn wbar_matches_inf_convolution_on_grid() {
        let m = MaterialParams::default();
        let s = m.yield_stress();
        for xi in [-3.0, -0.7, -0.2, 0.0, 0.4, 0.5, 2.0] {
            let n = 200_000;
            let best = (0..=n)
                .map(|i| -4.0 + 8.0 * i as f64 / n as f64)
                .map(|eta| 0.5 * m.a1 * (xi - eta) * (xi - eta) + s * eta.abs())
                .fold(f64::INFINITY, f64::min);
            assert!(wbar_1d(&m, xi) <= best + 1e-12);
            assert!(best - wbar_1d(&m, xi) < 1e-8, "xi = {xi}");
        }
    }

    #[test]
    fn g_constraint_examples() {
        assert_eq!(g_constraint(&[0.0, 0.0, 0.0], 1.0, 1.0).unwrap(), 0.0);
        // one eigenvalue, λ0 + 2 μ0 = 2
        assert!((g_constraint(&[3.0], 1.0, 0.5).unwrap() - 4.5).abs() < 1e-14);
        assert!((g_constraint(&[-3.0], 1.0, 0.5).unwrap() - 4.5).abs() < 1e-14);
        assert!((g_constraint(&[1.0, 1.0], 1.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            g_constraint(&[2.0, 1.0], 1.0, 1.0),
            Err(Error::UnsortedEigenvalues)
        ));
        assert!(g_constraint(&[], 1.0, 1.0).is_err());
    }

    #[test]
    fn g_constraint_continuous_at_branch_boundaries() {
        let (lam, mu) = (1.3, 0.7);
        let pw = lam + 2.0 * mu;
        let r = pw / (2.0 * (lam + mu));
        let middle = |t1: f64, tn: f64| {
            (t1 - tn).powi(2) / (4.0 * mu) + (t1 + tn).powi(2) / (4.0 * (lam + mu))
        };
        // r (t1 + tn) = t1  <=>  tn = t1 (1 - r) / r
        let t1 = -0.8;
        let tn = t1 * (1.0 - r) / r;
        assert!((t1 * t1 / pw - middle(t1, tn)).abs() < 1e-12);
        // r (t1 + tn) = tn  <=>  t1 = tn (1 - r) / r
        let tn = 1.7;
        let t1 = tn * (1.0 - r) / r;
        assert!((tn * tn / pw - middle(t1, tn)).abs() < 1e-12);
        let e = [t1, 0.5 * (t1 + tn), tn];
        assert!((g_constraint(&e, lam, mu).unwrap() - tn * tn / pw).abs() < 1e-12);
    }
}
