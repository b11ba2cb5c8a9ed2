//! Damped Newton solver for `div(Du/W) = H` on slabs and geodesic balls,
//! reduced to one variable by symmetry.
//!
//! The slab problem is `(u'/W)' = H` on `[0, T]` with Dirichlet data at both
//! ends. The radial problem on a ball of radius `R` is
//! `(A(r) u'/W)' = H A(r)` with `u'(0) = 0` and `u(R)` prescribed, where `A` is
//! the area density of geodesic spheres. Cells are finite volumes with exact
//! cell integrals of `A`, and fluxes are evaluated at cell faces.

use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::geometry::{gauss_legendre, ModelDomain, ModelKind, Shape};
use crate::params::{certify, GateParams};

pub const MIN_GRID_N: usize = 16;
pub const MAX_NEWTON_ITERS: usize = 100;
const MAX_HALVINGS: usize = 40;

/// Tolerance added to `max{A, boundary max}` when checking the gradient estimate.
pub const GRADIENT_BOUND_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OperatorForm {
    /// Conservative finite volumes for `div(Du/W)`.
    #[default]
    Divergence,
    /// `u''/(1+u'²)^{3/2} + (A'/A) u'/(1+u'²)^{1/2}`.
    NonDivergence,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BvpSpec {
    pub domain: ModelDomain,
    pub h: f64,
    /// `[u(0), u(T)]` for a slab, `[u(R)]` for a ball.
    pub dirichlet: Vec<f64>,
    pub grid_n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BvpKind {
    Slab,
    Radial,
}

impl BvpSpec {
    pub fn new(domain: ModelDomain, h: f64, dirichlet: Vec<f64>, grid_n: usize) -> Result<Self> {
        ensure_finite("H", h)?;
        for v in &dirichlet {
            ensure_finite("dirichlet", *v)?;
        }
        if grid_n < MIN_GRID_N {
            return Err(Error::Argument(format!("grid_n must be >= {MIN_GRID_N}, got {grid_n}")));
        }
        let spec = Self { domain, h, dirichlet, grid_n };
        let want = match spec.kind()? {
            BvpKind::Slab => 2,
            BvpKind::Radial => 1,
        };
        if spec.dirichlet.len() != want {
            return Err(Error::Argument(format!(
                "expected {want} Dirichlet values, got {}",
                spec.dirichlet.len()
            )));
        }
        Ok(spec)
    }

    pub fn kind(&self) -> Result<BvpKind> {
        match self.domain.shape {
            Shape::Slab { width } | Shape::Strip { width } if width.is_finite() => Ok(BvpKind::Slab),
            Shape::Ball { .. } => Ok(BvpKind::Radial),
            _ => Err(Error::Argument("solver needs a bounded slab or a ball".into())),
        }
    }

    /// Slab width or ball radius.
    pub fn length(&self) -> f64 {
        match self.domain.shape {
            Shape::Slab { width } | Shape::Strip { width } => width,
            Shape::Ball { radius } => radius,
            _ => f64::NAN,
        }
    }

    /// Node coordinates `r_i = i L / (n − 1)`.
    pub fn nodes(&self) -> Vec<f64> {
        let l = self.length();
        let n = self.grid_n;
        (0..n).map(|i| l * i as f64 / (n - 1) as f64).collect()
    }

    /// Rejects data for which the problem has no classical solution.
    pub fn check_feasible(&self) -> Result<()> {
        let h = self.h;
        if h == 0.0 {
            return Ok(());
        }
        match self.kind()? {
            BvpKind::Slab => {
                let t = self.length();
                if h.abs() * t >= 2.0 {
                    return Err(Error::Infeasible(format!(
                        "|H| T = {} >= 2: no graph of mean curvature H spans the slab",
                        h.abs() * t
                    )));
                }
                let reach = (1.0 - (1.0 - h.abs() * t).powi(2)).sqrt() / h.abs();
                let jump = (self.dirichlet[1] - self.dirichlet[0]).abs();
                if jump >= reach {
                    return Err(Error::Infeasible(format!(
                        "boundary jump {jump} exceeds the largest attainable {reach}"
                    )));
                }
            }
            BvpKind::Radial => {
                let r = self.length();
                let flux = h.abs() * volume(&self.domain, r)? / self.domain.base.radial_density(r)?;
                if flux >= 1.0 {
                    let mut msg = format!("|H| V(R)/A(R) = {flux} >= 1: no radial graph of mean curvature H");
                    match self.domain.base.kind() {
                        ModelKind::Euclidean => {
                            msg += &format!(" (needs R < m/|H| = {})", self.domain.dim() as f64 / h.abs())
                        }
                        ModelKind::Hyperbolic { kappa } if h.abs() >= (self.domain.dim() - 1) as f64 * kappa => {
                            msg += "; |H| >= (m-1)κ admits no entire solution either"
                        }
                        _ => {}
                    }
                    return Err(Error::Infeasible(msg));
                }
            }
        }
        Ok(())
    }
}

/// `∫_0^r A(s) ds`
fn volume(domain: &ModelDomain, r: f64) -> Result<f64> {
    let base = &domain.base;
    base.radial_density(r)?;
    Ok(gauss_legendre(0.0, r, 64, |s| base.radial_density(s).unwrap_or(f64::NAN)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub form: OperatorForm,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: MAX_NEWTON_ITERS, form: OperatorForm::Divergence }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradientBound {
    pub z_interior_max: f64,
    pub z_boundary_max: f64,
    pub a_used: f64,
    pub c_used: f64,
    /// `max{A, boundary max} + tol − interior max`
    pub slack: f64,
    /// Node coordinate where `|Du|` is largest.
    pub argmax_gradient: f64,
    pub verdict: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub kind: BvpKind,
    pub form: OperatorForm,
    pub dim: usize,
    pub mean_curvature: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub newton_iters: usize,
    pub final_residual: f64,
    pub convergence_history: Vec<f64>,
    pub gradient_bound: Option<GradientBound>,
}

struct Discretization {
    kind: BvpKind,
    form: OperatorForm,
    h: f64,
    dr: f64,
    /// `A` at faces `r_i + dr/2`
    a_face: Vec<f64>,
    /// cell integrals of `A`
    vol: Vec<f64>,
    /// `A'/A` at nodes (non-divergence form)
    log_da: Vec<f64>,
    m: usize,
}

fn q(p: f64) -> f64 {
    p / (1.0 + p * p).sqrt()
}

fn dq(p: f64) -> f64 {
    (1.0 + p * p).powf(-1.5)
}

impl Discretization {
    fn new(spec: &BvpSpec, form: OperatorForm) -> Result<Self> {
        let kind = spec.kind()?;
        let n = spec.grid_n;
        let r = spec.nodes();
        let dr = r[1] - r[0];
        let base = &spec.domain.base;
        let dens = |x: f64| -> Result<f64> {
            match kind {
                BvpKind::Slab => Ok(1.0),
                BvpKind::Radial => base.radial_density(x),
            }
        };
        let mut a_face = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            a_face.push(dens(r[i] + 0.5 * dr)?);
        }
        let mut vol = Vec::with_capacity(n);
        let mut log_da = vec![0.0; n];
        for (i, &ri) in r.iter().enumerate() {
            let (lo, hi) = ((ri - 0.5 * dr).max(0.0), (ri + 0.5 * dr).min(r[n - 1]));
            vol.push(match kind {
                BvpKind::Slab => hi - lo,
                BvpKind::Radial => gauss_legendre(lo, hi, 1, |x| dens(x).unwrap_or(f64::NAN)),
            });
            if kind == BvpKind::Radial && i > 0 {
                log_da[i] = base.radial_log_derivative(ri)?;
            }
        }
        Ok(Self { kind, form, h: spec.h, dr, a_face, vol, log_da, m: spec.domain.dim() })
    }

    fn is_dirichlet(&self, i: usize, n: usize) -> bool {
        i + 1 == n || (self.kind == BvpKind::Slab && i == 0)
    }

    /// Residual and tridiagonal Jacobian `(lower, diag, upper)`.
    fn assemble(&self, u: &[f64], want_jac: bool) -> (Vec<f64>, [Vec<f64>; 3]) {
        let n = u.len();
        let dr = self.dr;
        let mut f = vec![0.0; n];
        let mut jac = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            if self.is_dirichlet(i, n) {
                if want_jac {
                    jac[1][i] = 1.0;
                }
                continue;
            }
            match self.form {
                OperatorForm::Divergence => {
                    let pr = (u[i + 1] - u[i]) / dr;
                    let (fr, dfr) = (self.a_face[i] * q(pr), self.a_face[i] * dq(pr) / dr);
                    let (fl, dfl) = if i == 0 {
                        (0.0, 0.0)
                    } else {
                        let pl = (u[i] - u[i - 1]) / dr;
                        (self.a_face[i - 1] * q(pl), self.a_face[i - 1] * dq(pl) / dr)
                    };
                    let v = self.vol[i];
                    f[i] = (fr - fl) / v - self.h;
                    if want_jac {
                        jac[2][i] = dfr / v;
                        jac[0][i] = dfl / v;
                        jac[1][i] = -(dfr + dfl) / v;
                    }
                }
                OperatorForm::NonDivergence if i == 0 => {
                    // at the centre u'' dominates every direction: m u''(0) = H
                    let k = self.m as f64 * 2.0 / (dr * dr);
                    f[0] = k * (u[1] - u[0]) - self.h;
                    if want_jac {
                        jac[1][0] = -k;
                        jac[2][0] = k;
                    }
                }
                OperatorForm::NonDivergence => {
                    let p = (u[i + 1] - u[i - 1]) / (2.0 * dr);
                    let upp = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dr * dr);
                    let s = 1.0 + p * p;
                    let g = s.powf(-1.5);
                    let la = self.log_da[i];
                    f[i] = upp * g + la * q(p) - self.h;
                    if want_jac {
                        let dg = -3.0 * p * s.powf(-2.5);
                        let dp = upp * dg + la * dq(p);
                        jac[2][i] = g / (dr * dr) + dp / (2.0 * dr);
                        jac[0][i] = g / (dr * dr) - dp / (2.0 * dr);
                        jac[1][i] = -2.0 * g / (dr * dr);
                    }
                }
            }
        }
        (f, jac)
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Thomas algorithm for a tridiagonal system; `lower[0]` and `upper[n-1]` are unused.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 || !piv.is_finite() {
        return Err(Error::Data("singular tridiagonal system".into()));
    }
    c[0] = upper[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i] * c[i - 1];
        if piv == 0.0 || !piv.is_finite() {
            return Err(Error::Data(format!("zero pivot at row {i}")));
        }
        c[i] = if i + 1 < n { upper[i] / piv } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Solves the boundary value problem to `max |F| ≤ tol`.
pub fn solve(spec: &BvpSpec, opts: &SolveOptions) -> Result<SolveReport> {
    if !(opts.tol > 0.0) {
        return Err(Error::Argument(format!("tol must be > 0, got {}", opts.tol)));
    }
    spec.check_feasible()?;
    let disc = Discretization::new(spec, opts.form)?;
    let r = spec.nodes();
    let n = r.len();
    let l = spec.length();
    let mut u: Vec<f64> = match disc.kind {
        BvpKind::Slab => {
            let (a, b) = (spec.dirichlet[0], spec.dirichlet[1]);
            r.iter().map(|x| a + (b - a) * x / l).collect()
        }
        BvpKind::Radial => vec![spec.dirichlet[0]; n],
    };
    let (mut f, mut jac) = disc.assemble(&u, true);
    let mut res = max_norm(&f);
    let mut history = vec![res];
    let mut iters = 0;
    while res > opts.tol {
        if iters == opts.max_iters {
            return Err(Error::Convergence {
                iterations: iters,
                reason: format!("residual {res:e} above tolerance {:e}", opts.tol),
                history,
            });
        }
        iters += 1;
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let step = solve_tridiagonal(&jac[0], &jac[1], &jac[2], &neg)?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, d)| a + lambda * d).collect();
            let (ft, _) = disc.assemble(&trial, false);
            let rt = max_norm(&ft);
            if rt.is_finite() && rt < res {
                accepted = Some(trial);
                break;
            }
            lambda *= 0.5;
        }
        let Some(next) = accepted else {
            // differencing O(1) data twice loses about ε|u|/dr² to rounding
            let floor = f64::EPSILON * max_norm(&u).max(1.0) / (disc.dr * disc.dr);
            return Err(Error::Convergence {
                iterations: iters,
                reason: format!(
                    "line search found no residual decrease at {res:e}; rounding floor is about {floor:e}"
                ),
                history,
            });
        };
        u = next;
        (f, jac) = disc.assemble(&u, true);
        res = max_norm(&f);
        history.push(res);
    }
    Ok(SolveReport {
        kind: disc.kind,
        form: opts.form,
        dim: spec.domain.dim(),
        mean_curvature: spec.h,
        r,
        u,
        newton_iters: iters,
        final_residual: res,
        convergence_history: history,
        gradient_bound: None,
    })
}

impl SolveReport {
    /// Second-order differences of `u`: one-sided at Dirichlet ends, `u'(0) = 0`
    /// at the centre of a ball.
    pub fn slopes(&self) -> Vec<f64> {
        let (u, n) = (&self.u, self.u.len());
        let dr = self.r[1] - self.r[0];
        (0..n)
            .map(|i| {
                if i == 0 {
                    match self.kind {
                        BvpKind::Radial => 0.0,
                        BvpKind::Slab => (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dr),
                    }
                } else if i + 1 == n {
                    (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * dr)
                } else {
                    (u[i + 1] - u[i - 1]) / (2.0 * dr)
                }
            })
            .collect()
    }

    fn is_boundary(&self, i: usize) -> bool {
        i + 1 == self.u.len() || (self.kind == BvpKind::Slab && i == 0)
    }

    /// Checks `max_interior z ≤ max{A, max_boundary z} + tol` for `z = W e^{−Cu}`.
    pub fn verify_gradient_bound(&self, kappa: f64, c: f64, a: f64) -> Result<GradientBound> {
        let params = GateParams::new(self.dim, kappa, self.mean_curvature, c, a)?;
        let cert = certify(&params);
        if !cert.gate_ok {
            return Err(Error::Precondition(format!(
                "(C, A) = ({c}, {a}) is not admissible for (m, κ, H) = ({}, {kappa}, {})",
                self.dim, self.mean_curvature
            )));
        }
        if c > 0.0 {
            if let Some(v) = self.u.iter().find(|v| **v < 0.0) {
                return Err(Error::Precondition(format!("the estimate with C > 0 needs u >= 0, found {v}")));
            }
        }
        let slopes = self.slopes();
        let mut zi = f64::NEG_INFINITY;
        let mut zb = f64::NEG_INFINITY;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for (i, (u, p)) in self.u.iter().zip(&slopes).enumerate() {
            let z = (1.0 + p * p).sqrt() * (-c * u).exp();
            if self.is_boundary(i) {
                zb = zb.max(z);
            } else {
                zi = zi.max(z);
            }
            if p.abs() > best.0 {
                best = (p.abs(), self.r[i]);
            }
        }
        let slack = a.max(zb) + GRADIENT_BOUND_TOL - zi;
        Ok(GradientBound {
            z_interior_max: zi,
            z_boundary_max: zb,
            a_used: a,
            c_used: c,
            slack,
            argmax_gradient: best.1,
            verdict: slack >= 0.0,
        })
    }

    pub fn with_gradient_bound(mut self, kappa: f64, c: f64, a: f64) -> Result<Self> {
        self.gradient_bound = Some(self.verify_gradient_bound(kappa, c, a)?);
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BaseMetric;
    use crate::profiles::CapillaryProfile;

    fn slab(m: usize, t: f64) -> ModelDomain {
        ModelDomain::new(BaseMetric::product_line(m).unwrap(), Shape::Slab { width: t }).unwrap()
    }

    fn ball(base: BaseMetric, r: f64) -> ModelDomain {
        ModelDomain::new(base, Shape::Ball { radius: r }).unwrap()
    }

    fn max_err(rep: &SolveReport, exact: impl Fn(f64) -> f64) -> f64 {
        rep.r.iter().zip(&rep.u).map(|(r, u)| (u - exact(*r)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn thomas_solves_small_system() {
        let x = solve_tridiagonal(&[0.0, 1.0, 1.0], &[4.0, 4.0, 4.0], &[1.0, 1.0, 0.0], &[5.0, 6.0, 5.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn minimal_slab_is_affine() {
        let spec = BvpSpec::new(slab(2, 1.0), 0.0, vec![0.0, 1.0], 64).unwrap();
        let rep = solve(&spec, &SolveOptions::default()).unwrap();
        assert!(max_err(&rep, |t| t) < 1e-10);
        assert_eq!(rep.newton_iters, 0);
    }

    #[test]
    fn cmc_slab_matches_profile() {
        let p = CapillaryProfile::new(1.0, 0.0, 0.0).unwrap();
        let b = p.eval(0.8).unwrap().u;
        let spec = BvpSpec::new(slab(2, 0.8), 1.0, vec![0.0, b], 1000).unwrap();
        let rep = solve(&spec, &SolveOptions::default()).unwrap();
        assert!(max_err(&rep, |t| p.eval(t).unwrap().u) < 1e-6);
        assert!(rep.final_residual <= 1e-10);
    }

    #[test]
    fn hemispherical_cap() {
        let spec = BvpSpec::new(ball(BaseMetric::euclidean(2).unwrap(), 1.0), 1.0, vec![2.0 - 3f64.sqrt()], 1000)
            .unwrap();
        let rep = solve(&spec, &SolveOptions::default()).unwrap();
        let e = max_err(&rep, |r| 2.0 - (4.0 - r * r).sqrt());
        assert!(e < 1e-6, "{e}");
    }

    #[test]
    fn non_divergence_form_agrees() {
        let spec = BvpSpec::new(ball(BaseMetric::euclidean(3).unwrap(), 1.0), 1.5, vec![0.1], 400).unwrap();
        let a = solve(&spec, &SolveOptions::default()).unwrap();
        let b = solve(&spec, &SolveOptions { form: OperatorForm::NonDivergence, ..Default::default() }).unwrap();
        let d = a.u.iter().zip(&b.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(d < 1e-4, "{d}");
    }

    #[test]
    fn infeasible_data_are_rejected() {
        let spec = BvpSpec::new(ball(BaseMetric::euclidean(2).unwrap(), 2.0), 1.0, vec![0.0], 64).unwrap();
        assert!(matches!(solve(&spec, &SolveOptions::default()), Err(Error::Infeasible(_))));
        let spec = BvpSpec::new(slab(2, 1.0), 2.5, vec![0.0, 0.0], 64).unwrap();
        assert!(matches!(solve(&spec, &SolveOptions::default()), Err(Error::Infeasible(_))));
        let spec = BvpSpec::new(slab(2, 1.0), 1.0, vec![0.0, 5.0], 64).unwrap();
        assert!(matches!(solve(&spec, &SolveOptions::default()), Err(Error::Infeasible(_))));
        let h = BaseMetric::hyperbolic(2, 1.0).unwrap();
        let spec = BvpSpec::new(ball(h, 30.0), 1.2, vec![0.0], 64).unwrap();
        assert!(matches!(solve(&spec, &SolveOptions::default()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn spec_validation() {
        assert!(BvpSpec::new(slab(2, 1.0), 0.0, vec![0.0], 64).is_err());
        assert!(BvpSpec::new(slab(2, 1.0), 0.0, vec![0.0, 1.0], 8).is_err());
        let whole = ModelDomain::new(BaseMetric::euclidean(2).unwrap(), Shape::Whole).unwrap();
        assert!(BvpSpec::new(whole, 0.0, vec![0.0], 64).is_err());
    }

    #[test]
    fn gradient_bound_on_solves() {
        let spec = BvpSpec::new(ball(BaseMetric::euclidean(2).unwrap(), 1.0), 1.0, vec![2.0 - 3f64.sqrt()], 200)
            .unwrap();
        let rep = solve(&spec, &SolveOptions::default()).unwrap();
        let g = rep.verify_gradient_bound(0.0, 0.0, 1.0).unwrap();
        assert!(g.verdict);
        assert_eq!(g.argmax_gradient, 1.0);
        assert!(matches!(rep.verify_gradient_bound(1.0, 0.0, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn constant_solution_bound() {
        let spec = BvpSpec::new(slab(3, 1.0), 0.0, vec![2.0, 2.0], 32).unwrap();
        let rep = solve(&spec, &SolveOptions::default()).unwrap();
        let g = rep.verify_gradient_bound(1.0, 2f64.sqrt() * 2.0, 2f64.sqrt()).unwrap();
        assert_eq!(g.z_interior_max, g.z_boundary_max);
        assert!(g.verdict);
    }
}
