//! Admissible parameters `(C, A)` for the gradient estimate `W e^{−Cu} ≤ max{A, ...}`.
//!
//! The condition
//!
//! `H²/m − CH/t + (C² − (m−1)κ²)(t² − 1)/t² ≥ 0` for every `t ≥ A`
//!
//! becomes, with `s = 1/t`, nonnegativity of the quadratic
//! `P(s) = H²/m − CHs + (C² − (m−1)κ²)(1 − s²)` on `(0, 1/A]`, which is
//! decided exactly from its endpoint values and vertex.

use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};

/// Relative tolerance for ties in the closed inequalities.
pub const TIE_TOL: f64 = 1e-12;

/// Strict inequalities require a margin above this value.
pub const STRICT_MARGIN: f64 = 1e-12;

const PERTURB_MAX_HALVINGS: usize = 60;

fn tie_tol(scale: f64) -> f64 {
    TIE_TOL * scale.max(1.0)
}

/// Validated parameter tuple `(m, κ, H, C, A)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GateParams {
    pub m: usize,
    pub kappa: f64,
    pub h: f64,
    pub c: f64,
    pub a: f64,
}

impl GateParams {
    pub fn new(m: usize, kappa: f64, h: f64, c: f64, a: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Argument(format!("m must be >= 2, got {m}")));
        }
        for (name, v) in [("kappa", kappa), ("H", h), ("C", c), ("A", a)] {
            ensure_finite(name, v)?;
        }
        if kappa < 0.0 {
            return Err(Error::Argument(format!("kappa must be >= 0, got {kappa}")));
        }
        if c < 0.0 {
            return Err(Error::Argument(format!("C must be >= 0, got {c}")));
        }
        if a < 1.0 {
            return Err(Error::Argument(format!("A must be >= 1, got {a}")));
        }
        Ok(Self { m, kappa, h, c, a })
    }

    /// `C² − (m−1)κ²`
    pub fn lead(&self) -> f64 {
        quad_lead(self.m, self.kappa, self.c)
    }

    /// `P(s)`
    pub fn p(&self, s: f64) -> f64 {
        gate_polynomial(self.m, self.kappa, self.h, self.c, s)
    }
}

fn quad_lead(m: usize, kappa: f64, c: f64) -> f64 {
    c * c - (m - 1) as f64 * kappa * kappa
}

/// `P(s) = H²/m − CHs + (C² − (m−1)κ²)(1 − s²)`.
pub fn gate_polynomial(m: usize, kappa: f64, h: f64, c: f64, s: f64) -> f64 {
    h * h / m as f64 - c * h * s + quad_lead(m, kappa, c) * (1.0 - s * s)
}

/// `H²/m + C² − (m−1)κ² ≥ 0` when `H ≤ 0`, strictly positive when `H > 0`.
pub fn check_hp(m: usize, kappa: f64, h: f64, c: f64) -> bool {
    let hm = h * h / m as f64;
    let lead = quad_lead(m, kappa, c);
    let q = hm + lead;
    let tol = tie_tol(hm.max(lead.abs()));
    if h <= 0.0 {
        q >= -tol
    } else {
        q > tol.max(STRICT_MARGIN)
    }
}

/// Infimum over `(0, s_hi]` of `p0 + p1 s + p2 s²`, with the coefficient scale.
fn quadratic_infimum(p0: f64, p1: f64, p2: f64, s_hi: f64) -> (f64, f64) {
    let end = p0 + p1 * s_hi + p2 * s_hi * s_hi;
    let mut inf = p0.min(end);
    if p2 > 0.0 {
        let vertex = -p1 / (2.0 * p2);
        if vertex > 0.0 && vertex < s_hi {
            inf = inf.min(p0 - p1 * p1 / (4.0 * p2));
        }
    }
    (inf, p0.abs().max(p1.abs()).max(p2.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GateDecision {
    pub holds: bool,
    /// Exact infimum of `P` over `(0, 1/A]`.
    pub slack: f64,
}

/// Decides the gate condition for every `t ≥ A` exactly.
pub fn check_gate(p: &GateParams) -> GateDecision {
    let lead = p.lead();
    let (inf, scale) = quadratic_infimum(p.h * p.h / p.m as f64 + lead, -p.c * p.h, -lead, 1.0 / p.a);
    GateDecision { holds: inf >= -tie_tol(scale), slack: inf }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseLabel {
    HNonpos,
    HPosCLarge,
    HPosCSmallGeneric,
    HPosCSmallDiscriminant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub label: CaseLabel,
    pub verdict: bool,
    /// `P(1/A)`
    pub endpoint_value: f64,
    /// `CHA + 2(C² − (m−1)κ²)`, equivalently `−A·P'(1/A)`.
    pub slope_condition: f64,
    /// `(H²/m)((m−1)κ² − (1 + m/4)C²) − ((m−1)κ² − C²)²`; nonnegative together
    /// with `(m−1)κ² > (1 + m/4)C²` exactly when `P` has no real roots.
    pub discriminant_margin: f64,
}

/// Branch analysis of the gate condition by the signs of `H` and `C² − (m−1)κ²`.
pub fn classify(p: &GateParams) -> Result<Classification> {
    if !check_hp(p.m, p.kappa, p.h, p.c) {
        return Err(Error::Precondition(format!(
            "H²/m + C² − (m−1)κ² has the wrong sign for (m, κ, H, C) = ({}, {}, {}, {})",
            p.m, p.kappa, p.h, p.c
        )));
    }
    let m = p.m as f64;
    let lead = p.lead();
    let hm = p.h * p.h / m;
    let endpoint_value = p.p(1.0 / p.a);
    let slope_condition = p.c * p.h * p.a + 2.0 * lead;
    let d = (m - 1.0) * p.kappa * p.kappa - (1.0 + m / 4.0) * p.c * p.c;
    let discriminant_margin = hm * d - lead * lead;

    let endpoint_ok = endpoint_value >= -tie_tol(hm.max(lead.abs()).max((p.c * p.h).abs()));
    let (label, verdict) = if p.h <= 0.0 {
        (CaseLabel::HNonpos, true)
    } else if lead >= 0.0 {
        (CaseLabel::HPosCLarge, endpoint_ok)
    } else if d > 0.0 && discriminant_margin >= -tie_tol((hm * d).abs().max(lead * lead)) {
        (CaseLabel::HPosCSmallDiscriminant, true)
    } else {
        let slope_ok = slope_condition >= -tie_tol((p.c * p.h * p.a).abs().max(lead.abs()));
        (CaseLabel::HPosCSmallGeneric, endpoint_ok && slope_ok)
    };
    Ok(Classification { label, verdict, endpoint_value, slope_condition, discriminant_margin })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParamCertificate {
    pub params: GateParams,
    pub hp_ok: bool,
    /// Gate condition together with `hp_ok`.
    pub gate_ok: bool,
    pub case_label: Option<CaseLabel>,
    pub slack: f64,
}

pub fn certify(p: &GateParams) -> ParamCertificate {
    let hp_ok = check_hp(p.m, p.kappa, p.h, p.c);
    let gate = check_gate(p);
    let case_label = classify(p).ok().map(|c| c.label);
    ParamCertificate { params: *p, hp_ok, gate_ok: hp_ok && gate.holds, case_label, slack: gate.slack }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Perturbation {
    pub a1: f64,
    pub c1: f64,
    pub c2: f64,
    /// Infimum of `Q_{C1,C2}` over `(0, 1/A1]`.
    pub infimum: f64,
    pub halvings: usize,
}

/// `Q_{C1,C2}(s) = H²/m − C1 H s + (C2² − (m−1)κ²)(1 − s²)`.
pub fn perturbed_polynomial(p: &GateParams, c1: f64, c2: f64, s: f64) -> f64 {
    p.h * p.h / p.m as f64 - c1 * p.h * s + quad_lead(p.m, p.kappa, c2) * (1.0 - s * s)
}

fn perturbed_infimum(p: &GateParams, a1: f64, c1: f64, c2: f64) -> f64 {
    let lead = quad_lead(p.m, p.kappa, c2);
    quadratic_infimum(p.h * p.h / p.m as f64 + lead, -c1 * p.h, -lead, 1.0 / a1).0
}

/// Strictly admissible neighbours `A < A1 < A+ε`, `C < C2 < C1 < C+ε`.
pub fn perturb(p: &GateParams, eps: f64) -> Result<Perturbation> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Argument(format!("ε must be a positive real, got {eps}")));
    }
    let cert = certify(p);
    if !cert.gate_ok {
        return Err(Error::Precondition(format!("(C, A) = ({}, {}) is not admissible", p.c, p.a)));
    }
    let a1 = p.a + 0.5 * eps;
    let mut delta = 0.5 * eps;
    let mut history = Vec::new();
    for halvings in 0..=PERTURB_MAX_HALVINGS {
        let (c1, c2) = (p.c + delta, p.c + 0.5 * delta);
        // the strict chain must survive rounding
        if !(p.a < a1 && a1 < p.a + eps && p.c < c2 && c2 < c1 && c1 < p.c + eps) {
            break;
        }
        let infimum = perturbed_infimum(p, a1, c1, c2);
        if infimum > STRICT_MARGIN {
            return Ok(Perturbation { a1, c1, c2, infimum, halvings });
        }
        history.push(infimum);
        delta *= 0.5;
    }
    Err(Error::Convergence {
        iterations: history.len(),
        reason: "no perturbation of C keeps the infimum strictly positive".into(),
        history,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MenuRule {
    /// `κ = 0`: `A = 1, C = 0`.
    FlatRicci,
    /// `H = 0`: `A = 1, C = √(m−1) κ`.
    Minimal,
    /// `|H| > √(m(m−1)) κ > 0`: `A = 1, C = 0`.
    LargeMeanCurvature,
    /// `κ > 0, −√(m(m−1)) κ ≤ H ≤ 0`: `A = 1, C = √((m−1)κ² − H²/m)`.
    NonpositiveMeanCurvature,
    /// `κ > 0, H ≥ 0`: `A = 1 + √(H/(√(m−1)κ))`, `C = A √(m−1) κ`.
    NonnegativeMeanCurvature,
    /// Any `κ, H`: `A = √(1 + m/3)`, `C = 2√(m−1) κ`.
    Universal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MenuEntry {
    pub rule: MenuRule,
    pub a: f64,
    pub c: f64,
}

/// Every listed admissible choice that applies to `(m, κ, H)`.
pub fn admissible_menu(m: usize, kappa: f64, h: f64) -> Vec<MenuEntry> {
    let mut out = Vec::new();
    if m < 2 || !(kappa >= 0.0) || !h.is_finite() || !kappa.is_finite() {
        return out;
    }
    let mf = m as f64;
    let k1 = (mf - 1.0).sqrt() * kappa;
    let edge = (mf * (mf - 1.0)).sqrt() * kappa;
    let mut push = |rule, a, c| out.push(MenuEntry { rule, a, c });
    if kappa == 0.0 {
        push(MenuRule::FlatRicci, 1.0, 0.0);
    }
    if h == 0.0 {
        push(MenuRule::Minimal, 1.0, k1);
    }
    if kappa > 0.0 && h.abs() > edge {
        push(MenuRule::LargeMeanCurvature, 1.0, 0.0);
    }
    if kappa > 0.0 && -edge <= h && h <= 0.0 {
        push(MenuRule::NonpositiveMeanCurvature, 1.0, (k1 * k1 - h * h / mf).max(0.0).sqrt());
    }
    if kappa > 0.0 && h >= 0.0 {
        let a = 1.0 + (h / k1).sqrt();
        push(MenuRule::NonnegativeMeanCurvature, a, a * k1);
    }
    push(MenuRule::Universal, (1.0 + mf / 3.0).sqrt(), 2.0 * k1);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gp(m: usize, k: f64, h: f64, c: f64, a: f64) -> GateParams {
        GateParams::new(m, k, h, c, a).unwrap()
    }

    #[test]
    fn hp_examples() {
        assert!(check_hp(3, 0.0, -5.0, 0.0));
        assert!(check_hp(3, 1.0, 0.0, 2f64.sqrt()));
        assert!(check_hp(3, 1.0, 0.1, 2f64.sqrt()));
        assert!(!check_hp(3, 1.0, 0.0, 1.0));
        // strictness for H > 0
        assert!(!check_hp(2, 1.0, 1e-9, 1.0));
    }

    #[test]
    fn gate_examples() {
        assert!(check_gate(&gp(2, 0.0, 3.0, 0.0, 1.0)).holds);
        assert!(check_gate(&gp(3, 1.0, 4.0, 0.0, 1.0)).holds);
        for h in [-10.0, -1.0, 0.0, 0.5, 2.0, 2.0 * 3f64.sqrt(), 9.0] {
            assert!(check_gate(&gp(3, 1.0, h, 2.0 * 2f64.sqrt(), 2f64.sqrt())).holds, "H={h}");
        }
        assert!(!check_gate(&gp(3, 1.0, 1.0, 0.0, 1.0)).holds);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(GateParams::new(1, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(GateParams::new(2, -1.0, 0.0, 0.0, 1.0).is_err());
        assert!(GateParams::new(2, 0.0, 0.0, -1.0, 1.0).is_err());
        assert!(GateParams::new(2, 0.0, 0.0, 0.0, 0.5).is_err());
        assert!(GateParams::new(2, 0.0, f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn classify_branches() {
        assert_eq!(classify(&gp(3, 1.0, -2.0, 2.0, 1.0)).unwrap().label, CaseLabel::HNonpos);
        let c = classify(&gp(3, 1.0, 1.0, 2.0, 1.0)).unwrap();
        assert_eq!(c.label, CaseLabel::HPosCLarge);
        assert_eq!(c.verdict, check_gate(&gp(3, 1.0, 1.0, 2.0, 1.0)).holds);
        assert!(matches!(classify(&gp(3, 1.0, 0.0, 0.0, 1.0)), Err(Error::Precondition(_))));
    }

    #[test]
    fn discriminant_exception_tuple() {
        // m = 4, κ = 1, C = 0.5: d = 3 − 2·0.25 = 2.5, threshold H² = 4 (3 − 0.25)² / 2.5
        let (m, k, c) = (4usize, 1.0, 0.5);
        let h_thr = (4.0 * (3.0f64 - 0.25).powi(2) / 2.5).sqrt();
        let p = gp(m, k, h_thr * 1.001, c, 1.0);
        let cl = classify(&p).unwrap();
        assert_eq!(cl.label, CaseLabel::HPosCSmallDiscriminant);
        assert!(cl.verdict && check_gate(&p).holds);
        let below = gp(m, k, h_thr * 0.999, c, 1.0);
        assert_eq!(classify(&below).unwrap().label, CaseLabel::HPosCSmallGeneric);
    }

    #[test]
    fn menu_rows() {
        let has = |m, k, h: f64, a: f64, c: f64| {
            admissible_menu(m, k, h).iter().any(|e| (e.a - a).abs() < 1e-14 && (e.c - c).abs() < 1e-14)
        };
        assert!(has(2, 0.0, 7.0, 1.0, 0.0));
        assert!(has(3, 2.0, 0.0, 1.0, 2.0 * 2f64.sqrt()));
        assert!(has(4, 1.0, -2.0, 1.0, 2f64.sqrt()));
        assert!(has(3, 1.0, 0.0, 1.0, 2f64.sqrt()));
        for m in 2..=6 {
            for k in [0.0, 0.5, 1.0, 2.0] {
                for h in [-20.0, -3.0, -1.0, -0.25, 0.0, 0.3, 1.0, 4.0, 30.0] {
                    for e in admissible_menu(m, k, h) {
                        let d = check_gate(&gp(m, k, h, e.c, e.a));
                        assert!(d.holds, "{m} {k} {h} {e:?} slack {}", d.slack);
                    }
                }
            }
        }
    }

    #[test]
    fn perturb_example() {
        let p = perturb(&gp(3, 0.0, 0.0, 0.0, 1.0), 0.5).unwrap();
        assert_eq!((p.a1, p.c1, p.c2), (1.25, 0.25, 0.125));
        assert!(p.infimum > 0.0);
        assert!(matches!(perturb(&gp(3, 0.0, 0.0, 0.0, 1.0), 0.0), Err(Error::Argument(_))));
        assert!(matches!(perturb(&gp(3, 1.0, 1.0, 0.0, 1.0), 0.1), Err(Error::Precondition(_))));
    }

    #[test]
    fn perturb_positive_h() {
        for eps in [0.5, 0.1, 0.01] {
            let p = gp(3, 1.0, 2.0, 2.0 * 2f64.sqrt(), 2f64.sqrt());
            let r = perturb(&p, eps).unwrap();
            assert!(r.infimum > STRICT_MARGIN);
            assert!(p.a < r.a1 && r.a1 < p.a + eps);
            assert!(p.c < r.c2 && r.c2 < r.c1 && r.c1 < p.c + eps);
        }
    }

    fn sampled_min(p: &GateParams, n: usize) -> f64 {
        (1..=n).map(|k| p.p(k as f64 / (n as f64 * p.a))).fold(f64::INFINITY, f64::min)
    }

    proptest! {
        #[test]
        fn gate_is_monotone_in_a(m in 2usize..7, k in 0.0..3.0f64, h in -10.0..10.0f64,
                                 c in 0.0..10.0f64, a in 1.0..10.0f64, da in 0.0..5.0f64) {
            if check_gate(&gp(m, k, h, c, a)).holds {
                prop_assert!(check_gate(&gp(m, k, h, c, a + da)).holds);
            }
        }

        #[test]
        fn infimum_bounds_samples(m in 2usize..7, k in 0.0..3.0f64, h in -10.0..10.0f64,
                                  c in 0.0..10.0f64, a in 1.0..10.0f64) {
            let p = gp(m, k, h, c, a);
            let d = check_gate(&p);
            let s = sampled_min(&p, 2000);
            prop_assert!(d.slack <= s + 1e-9 * (1.0 + s.abs()));
        }

        #[test]
        fn classify_equals_check_gate(m in 2usize..7, k in 0.0..3.0f64, h in -10.0..10.0f64,
                                      c in 0.0..10.0f64, a in 1.0..10.0f64) {
            let p = gp(m, k, h, c, a);
            if let Ok(cl) = classify(&p) {
                prop_assert_eq!(cl.verdict, check_gate(&p).holds);
            }
        }
    }
}
