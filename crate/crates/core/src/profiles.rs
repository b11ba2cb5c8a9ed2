//! One-dimensional capillary profiles `u(t)` solving `(u'/√(1+u'²))' = H`
//! with `u(0) = b1`, `u'(0) = −c1`, and their tilted extensions to `ℝ²`.
//!
//! With `k = c1/√(1+c1²)` and `ξ(t) = Ht − k` the profile is
//!
//! `u(t) = b1 + (√(1−k²) − √(1−ξ²)) / H`, `u' = ξ/√(1−ξ²)`, `W = 1/√(1−ξ²)`,
//!
//! evaluated in the cancellation-free form
//! `u = b1 + t(Ht − 2k) / (√(1−k²) + √(1−ξ²))`, which also covers `H = 0`.

use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::ode::{dopri5, OdeOptions};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CapillaryProfile {
    h: f64,
    b1: f64,
    c1: f64,
    k: f64,
    t_max: f64,
    gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub u: f64,
    pub du: f64,
    pub w: f64,
}

impl CapillaryProfile {
    /// Profile with mean curvature `h`, boundary value `b1` and boundary normal
    /// derivative `c1` (outward normal `−∂_t`).
    pub fn new(h: f64, b1: f64, c1: f64) -> Result<Self> {
        ensure_finite("H", h)?;
        ensure_finite("b1", b1)?;
        ensure_finite("c1", c1)?;
        if h == 0.0 && c1 >= 0.0 {
            return Err(Error::Argument(format!("a minimal profile needs c1 < 0, got {c1}")));
        }
        if h > 0.0 && c1 > 0.0 {
            return Err(Error::Argument(format!("H > 0 needs c1 <= 0, got {c1}")));
        }
        if h < 0.0 && c1 >= 0.0 {
            return Err(Error::Argument(format!("H < 0 needs c1 < 0, got {c1}")));
        }
        let k = c1 / (1.0 + c1 * c1).sqrt();
        let t_max = if h > 0.0 {
            (1.0 + k) / h
        } else if h < 0.0 {
            k.abs() / h.abs()
        } else {
            f64::INFINITY
        };
        Ok(Self { h, b1, c1, k, t_max, gamma: c1.abs().atan() })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// Supremum of the natural domain; `+∞` for minimal profiles.
    ///
    /// For `H > 0` the slope blows up at `t_max`. For `H < 0` it is the point
    /// where `u'` vanishes, the end of the monotone branch.
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Contact angle `γ` with `tan γ = |c1|`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Whether `t` is admissible: `[0, t_max)` for `H >= 0`, `[0, t_max]` for `H < 0`.
    pub fn contains(&self, t: f64) -> bool {
        t >= 0.0 && (t < self.t_max || (self.h < 0.0 && t == self.t_max))
    }

    pub fn eval(&self, t: f64) -> Result<ProfilePoint> {
        if !self.contains(t) {
            return Err(Error::Domain(format!("t = {t} outside [0, {}) for this profile", self.t_max)));
        }
        Ok(self.eval_unchecked(t))
    }

    /// The closed form, wherever its radicand stays positive.
    pub(crate) fn eval_unchecked(&self, t: f64) -> ProfilePoint {
        let xi = self.h * t - self.k;
        let root = ((1.0 - xi) * (1.0 + xi)).sqrt();
        let root0 = ((1.0 - self.k) * (1.0 + self.k)).sqrt();
        ProfilePoint {
            u: self.b1 + t * (self.h * t - 2.0 * self.k) / (root0 + root),
            du: xi / root,
            w: 1.0 / root,
        }
    }

    /// Right end of a sampling window: `0.999·min(t_max, t_cap)`.
    pub fn sample_end(&self, t_cap: f64) -> Result<f64> {
        let end = 0.999 * self.t_max.min(t_cap);
        if !(end > 0.0) || !end.is_finite() {
            return Err(Error::Argument(format!(
                "sampling window is empty (t_max = {}, t_cap = {t_cap})",
                self.t_max
            )));
        }
        Ok(end)
    }
}

/// Max over `n_samples` uniform points of `|(u'/√(1+u'²))' − H|`, with the outer
/// derivative taken by fourth-order differences of the closed form.
pub fn profile_residual(p: &CapillaryProfile, n_samples: usize, t_cap: f64) -> Result<f64> {
    if n_samples < 2 {
        return Err(Error::Argument(format!("need at least 2 samples, got {n_samples}")));
    }
    let end = p.sample_end(t_cap)?;
    let flux = |t: f64| {
        let du = p.eval_unchecked(t).du;
        du / (1.0 + du * du).sqrt()
    };
    let d = 1e-3 * end;
    let mut worst = 0.0f64;
    for i in 0..n_samples {
        let t = end * i as f64 / (n_samples - 1) as f64;
        // differences of flux(t + j d) − flux(t), so constant fluxes give exactly 0
        let f0 = flux(t);
        let g = |j: f64| flux(t + j * d) - f0;
        let deriv = if t - 2.0 * d >= 0.0 && t + 2.0 * d <= p.t_max.min(t_cap.max(end)) {
            (g(-2.0) - 8.0 * g(-1.0) + 8.0 * g(1.0) - g(2.0)) / (12.0 * d)
        } else if t - 2.0 * d >= 0.0 {
            -(48.0 * g(-1.0) - 36.0 * g(-2.0) + 16.0 * g(-3.0) - 3.0 * g(-4.0)) / (12.0 * d)
        } else {
            (48.0 * g(1.0) - 36.0 * g(2.0) + 16.0 * g(3.0) - 3.0 * g(4.0)) / (12.0 * d)
        };
        worst = worst.max((deriv - p.h).abs());
    }
    Ok(worst)
}

/// Numerical profile from the slope equation in the height variable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdeProfile {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub beta: Vec<f64>,
    /// End of the profile extrapolated from the last slope (`None` if capped).
    pub t_max_estimate: Option<f64>,
    /// The start at `c1 = 0` used the series `β ≈ √(2H(u − b1))`.
    pub singular_start: bool,
}

const BETA_BLOWUP: f64 = 1e4;
const BETA_FLAT: f64 = 1e-3;
const SERIES_OFFSET: f64 = 1e-10;

/// Integrates `dβ/du = H(1+β²)^{3/2}/β`, `dt/du = 1/β` from `u = b1`, `β = |c1|`.
///
/// For `H > 0` the integration stops once `β > 1e4` and for `H < 0` once
/// `β < 1e-3`; the remainder of `t` is added in closed form from
/// `dt/dβ = 1/(H(1+β²)^{3/2})`. Minimal profiles stop at `t_cap`.
pub fn profile_from_ode(p: &CapillaryProfile, t_cap: f64) -> Result<OdeProfile> {
    let h = p.h;
    let c0 = p.c1.abs();
    let (u0, y0, singular_start) = if c0 == 0.0 {
        // only H > 0 reaches here: constructor rejects c1 = 0 otherwise
        let x = SERIES_OFFSET;
        (p.b1 + x, [(2.0 * h * x).sqrt(), (2.0 * x / h).sqrt()], true)
    } else {
        (p.b1, [c0, 0.0], false)
    };
    let u_end = if h == 0.0 {
        if !t_cap.is_finite() || t_cap <= 0.0 {
            return Err(Error::Argument("minimal profiles need a finite positive t_cap".into()));
        }
        p.b1 + c0 * t_cap
    } else {
        p.b1 + 2.0 / h.abs()
    };
    let rhs = move |_: f64, y: &[f64; 2]| {
        let b = y[0];
        [h * (1.0 + b * b).powf(1.5) / b, 1.0 / b]
    };
    let opts = OdeOptions { initial_step: 1e-6 * (u_end - u0), ..OdeOptions::default() };
    let sol = dopri5(
        rhs,
        u0,
        y0,
        u_end,
        &opts,
        |y| y[0] > 0.0,
        |_, y| (h > 0.0 && y[0] > BETA_BLOWUP) || (h < 0.0 && y[0] < BETA_FLAT) || y[1] >= t_cap,
    )?;
    let last = *sol.y.last().expect("solution has at least the initial state");
    let t_max_estimate = if h > 0.0 && sol.stopped && last[0] > BETA_BLOWUP {
        let b = last[0];
        let r = (1.0 + b * b).sqrt();
        Some(last[1] + 1.0 / (h * r * (r + b)))
    } else if h < 0.0 && sol.stopped && last[0] < BETA_FLAT {
        let b = last[0];
        Some(last[1] + b / (h.abs() * (1.0 + b * b).sqrt()))
    } else {
        None
    };
    let mut out = OdeProfile {
        t: Vec::with_capacity(sol.x.len() + 1),
        u: Vec::with_capacity(sol.x.len() + 1),
        beta: Vec::with_capacity(sol.x.len() + 1),
        t_max_estimate,
        singular_start,
    };
    if singular_start {
        out.t.push(0.0);
        out.u.push(p.b1);
        out.beta.push(0.0);
    }
    for (u, y) in sol.x.iter().zip(&sol.y) {
        out.t.push(y[1]);
        out.u.push(*u);
        out.beta.push(y[0]);
    }
    Ok(out)
}

/// Max `|u_ode(t_k) − u(t_k)|` over the numerical nodes with `t_k ≤ 0.999·t_max`.
pub fn cross_validate(p: &CapillaryProfile, ode: &OdeProfile) -> f64 {
    let limit = 0.999 * p.t_max;
    ode.t
        .iter()
        .zip(&ode.u)
        .filter(|(t, _)| **t <= limit)
        .map(|(t, u)| (u - p.eval_unchecked(*t).u).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum TiltedRegion {
    /// `τ ≥ a0 s + a1`; minimal profiles only.
    Epigraph,
    /// `0 ≤ (τ − a0 s − a1)/√(1+a0²) ≤ width`.
    Slab { width: f64 },
}

/// The profile composed with the signed distance to the line `τ = a0 s + a1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TiltedProfile {
    pub profile: CapillaryProfile,
    pub a0: f64,
    pub a1: f64,
    pub region: TiltedRegion,
}

impl TiltedProfile {
    pub fn new(h: f64, b: f64, c: f64, a0: f64, a1: f64, region: TiltedRegion) -> Result<Self> {
        ensure_finite("a0", a0)?;
        ensure_finite("a1", a1)?;
        let profile = CapillaryProfile::new(h, b, c)?;
        match region {
            TiltedRegion::Epigraph if h != 0.0 => {
                return Err(Error::Argument("an epigraph carries only minimal profiles (H = 0)".into()))
            }
            TiltedRegion::Slab { width } => {
                if !(width > 0.0) || !(profile.contains(width)) {
                    return Err(Error::Argument(format!(
                        "slab width {width} must lie in (0, t_max = {}]",
                        profile.t_max
                    )));
                }
            }
            _ => {}
        }
        Ok(Self { profile, a0, a1, region })
    }

    /// Distance `t` from the boundary line.
    pub fn distance(&self, tau: f64, s: f64) -> f64 {
        (tau - self.a0 * s - self.a1) / (1.0 + self.a0 * self.a0).sqrt()
    }

    /// Distance to the boundary line, snapped into the region when the point
    /// is outside only by rounding.
    fn checked_distance(&self, tau: f64, s: f64) -> Result<f64> {
        let t = self.distance(tau, s);
        let slack = 1e-12 * (1.0 + tau.abs() + (self.a0 * s).abs() + self.a1.abs());
        let width = match self.region {
            TiltedRegion::Epigraph => f64::INFINITY,
            TiltedRegion::Slab { width } => width,
        };
        if t >= -slack && t <= width + slack {
            Ok(t.clamp(0.0, width))
        } else {
            Err(Error::Domain(format!("point at distance {t} lies outside the region")))
        }
    }

    pub fn eval(&self, tau: f64, s: f64) -> Result<f64> {
        let t = self.checked_distance(tau, s)?;
        Ok(self.profile.eval_unchecked(t).u)
    }

    /// `(∂_τ u, ∂_s u)`
    pub fn gradient(&self, tau: f64, s: f64) -> Result<[f64; 2]> {
        let t = self.checked_distance(tau, s)?;
        let du = self.profile.eval_unchecked(t).du;
        let r = (1.0 + self.a0 * self.a0).sqrt();
        Ok([du / r, -self.a0 * du / r])
    }

    /// Unit outward normal `(Dφ1 − ∂_τ)/√(1+|Dφ1|²)` of `{τ = a0 s + a1}` in `(τ, s)`.
    pub fn boundary_normal(&self) -> [f64; 2] {
        let r = (1.0 + self.a0 * self.a0).sqrt();
        [-1.0 / r, self.a0 / r]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_profile_is_affine() {
        let p = CapillaryProfile::new(0.0, 0.0, -1.0).unwrap();
        assert_eq!(p.t_max(), f64::INFINITY);
        for t in [0.0, 0.5, 3.0, 100.0] {
            let v = p.eval(t).unwrap();
            assert!((v.u - t).abs() < 1e-13 * (1.0 + t));
            assert!((v.w - 2f64.sqrt()).abs() < 1e-15);
        }
        assert_eq!(profile_residual(&p, 100, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn circular_arc_profile() {
        let p = CapillaryProfile::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(p.t_max(), 1.0);
        for t in [0.0, 0.3, 0.9, 0.999] {
            let v = p.eval(t).unwrap();
            assert!((v.u - (1.0 - (1.0 - t * t).sqrt())).abs() < 1e-14);
        }
        assert!(p.eval(1.0).is_err());
        assert!(profile_residual(&p, 1000, f64::INFINITY).unwrap() < 1e-8);
    }

    #[test]
    fn sign_rules() {
        assert!(CapillaryProfile::new(0.0, 0.0, 0.0).is_err());
        assert!(CapillaryProfile::new(0.0, 0.0, 1.0).is_err());
        assert!(CapillaryProfile::new(1.0, 0.0, 0.5).is_err());
        assert!(CapillaryProfile::new(-1.0, 0.0, 0.0).is_err());
        assert!(CapillaryProfile::new(-1.0, 0.0, 0.5).is_err());
        assert!(CapillaryProfile::new(1.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn boundary_data_hold() {
        for (h, b1, c1) in [(1.0, 0.3, -1.0), (-0.5, -1.0, -2.0), (2.5, 0.0, -0.1), (0.0, 4.0, -3.0)] {
            let p = CapillaryProfile::new(h, b1, c1).unwrap();
            let v = p.eval(0.0).unwrap();
            assert!((v.u - b1).abs() <= 1e-12);
            assert!((v.du + c1).abs() <= 1e-12 * (1.0 + c1.abs()));
            assert!((p.gamma().tan() - c1.abs()).abs() < 1e-12 * (1.0 + c1.abs()));
        }
    }

    #[test]
    fn t_max_bounds() {
        let p = CapillaryProfile::new(1.0, 0.0, -1.0).unwrap();
        assert!((p.t_max() - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-15);
        let p = CapillaryProfile::new(-0.5, 0.0, -2.0).unwrap();
        assert!((p.t_max() - 2.0 * 2.0 / 5f64.sqrt()).abs() < 1e-15);
        // H < 0: the slope vanishes at t_max, which is still admissible
        let v = p.eval(p.t_max()).unwrap();
        assert!(v.du.abs() < 1e-15);
        assert!(p.eval(p.t_max() * (1.0 + 1e-12)).is_err());
    }

    #[test]
    fn ode_matches_closed_form() {
        for (h, c1) in [(1.0, -1.0), (-0.5, -2.0), (3.0, -0.2), (-2.0, -0.5)] {
            let p = CapillaryProfile::new(h, 0.7, c1).unwrap();
            let ode = profile_from_ode(&p, f64::INFINITY).unwrap();
            assert!(!ode.singular_start);
            let e = cross_validate(&p, &ode);
            assert!(e < 1e-7, "H={h} c1={c1}: {e}");
            let tm = ode.t_max_estimate.unwrap();
            assert!((tm - p.t_max()).abs() < 1e-6, "H={h} c1={c1}: {tm} vs {}", p.t_max());
        }
    }

    #[test]
    fn ode_singular_start() {
        let p = CapillaryProfile::new(1.0, 0.0, 0.0).unwrap();
        let ode = profile_from_ode(&p, f64::INFINITY).unwrap();
        assert!(ode.singular_start);
        assert!(cross_validate(&p, &ode) < 1e-7);
        assert!((ode.t_max_estimate.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ode_minimal_profile() {
        let p = CapillaryProfile::new(0.0, 1.0, -0.5).unwrap();
        let ode = profile_from_ode(&p, 4.0).unwrap();
        assert!(ode.beta.iter().all(|b| (b - 0.5).abs() < 1e-15));
        assert!(cross_validate(&p, &ode) < 1e-12);
        assert!(ode.t_max_estimate.is_none());
    }

    #[test]
    fn tilted_reduces_to_profile() {
        let t = TiltedProfile::new(1.0, 0.2, -0.5, 0.0, 0.1, TiltedRegion::Slab { width: 0.5 }).unwrap();
        let p = CapillaryProfile::new(1.0, 0.2, -0.5).unwrap();
        for tau in [0.1, 0.3, 0.6] {
            assert_eq!(t.eval(tau, 7.0).unwrap(), p.eval(tau - 0.1).unwrap().u);
        }
        assert!(t.eval(0.0, 0.0).is_err());
    }

    #[test]
    fn tilted_minimal_graph() {
        let t = TiltedProfile::new(0.0, 0.0, -1.0, 1.0, 0.0, TiltedRegion::Epigraph).unwrap();
        for (tau, s) in [(1.0, 0.5), (3.0, -2.0)] {
            assert!((t.eval(tau, s).unwrap() - (tau - s) / 2f64.sqrt()).abs() < 1e-14);
            let g = t.gradient(tau, s).unwrap();
            assert!((g[0] * g[0] + g[1] * g[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn tilted_boundary_data() {
        let t = TiltedProfile::new(-0.8, 1.5, -0.7, 0.4, -0.3, TiltedRegion::Slab { width: 0.3 }).unwrap();
        let n = t.boundary_normal();
        for s in [-1.0, 0.0, 2.0] {
            let tau = 0.4 * s - 0.3;
            assert!((t.eval(tau, s).unwrap() - 1.5).abs() < 1e-12);
            let g = t.gradient(tau, s).unwrap();
            assert!((g[0] * n[0] + g[1] * n[1] - (-0.7)).abs() < 1e-12);
        }
    }
}
