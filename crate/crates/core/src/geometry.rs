//! Base manifolds on model domains.
//!
//! A [`BaseMetric`] is one of three global-chart models: flat Euclidean space in
//! Cartesian coordinates, hyperbolic space of curvature `-κ²` in geodesic polar
//! coordinates `(r, θ_1, ..., θ_{m-1})`, or the flat product `I × N` in
//! coordinates `(t, x)`. A [`ModelDomain`] pairs a base with a shape and its
//! labelled boundary pieces. The volume-growth parabolicity tests live here as
//! well, since they only depend on the domain.

use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};

/// Inner cutoff for the coordinate singularities of polar charts.
pub const POLAR_CUTOFF: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Euclidean,
    /// Sectional curvature `-kappa²`, polar chart.
    Hyperbolic { kappa: f64 },
    /// `I × N` with flat cross-section; coordinate 0 is the split variable `t`.
    ProductLine,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaseMetric {
    dim: usize,
    kind: ModelKind,
}

/// Metric coefficients and Christoffel symbols at one chart point.
///
/// `sigma` is row-major `m × m`; `christoffel[k*m*m + i*m + j]` is `γ^k_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSample {
    pub dim: usize,
    pub sigma: Vec<f64>,
    pub christoffel: Vec<f64>,
}

impl MetricSample {
    pub fn sigma(&self, i: usize, j: usize) -> f64 {
        self.sigma[i * self.dim + j]
    }

    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        let m = self.dim;
        self.christoffel[k * m * m + i * m + j]
    }
}

impl BaseMetric {
    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(dim, ModelKind::Euclidean)
    }

    pub fn hyperbolic(dim: usize, kappa: f64) -> Result<Self> {
        Self::new(dim, ModelKind::Hyperbolic { kappa })
    }

    pub fn product_line(dim: usize) -> Result<Self> {
        Self::new(dim, ModelKind::ProductLine)
    }

    pub fn new(dim: usize, kind: ModelKind) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Argument(format!("manifold dimension must be >= 2, got {dim}")));
        }
        if let ModelKind::Hyperbolic { kappa } = kind {
            ensure_finite("kappa", kappa)?;
            if kappa <= 0.0 {
                return Err(Error::Argument(format!("hyperbolic kappa must be > 0, got {kappa}")));
            }
        }
        Ok(Self { dim, kind })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn is_flat(&self) -> bool {
        !matches!(self.kind, ModelKind::Hyperbolic { .. })
    }

    /// The constant `κ ≥ 0` with `Ric ≥ -(m-1)κ²` on the whole model.
    pub fn ricci_lower_bound(&self) -> f64 {
        match self.kind {
            ModelKind::Hyperbolic { kappa } => kappa,
            ModelKind::Euclidean | ModelKind::ProductLine => 0.0,
        }
    }

    /// The factor `ρ` with `Ric(v, v) = ρ |v|²_σ`; every model is Einstein.
    pub fn ricci_factor(&self) -> f64 {
        match self.kind {
            ModelKind::Euclidean | ModelKind::ProductLine => 0.0,
            ModelKind::Hyperbolic { kappa } => -((self.dim - 1) as f64) * kappa * kappa,
        }
    }

    /// `Ric(v, v)` for a tangent vector with contravariant components `v`.
    ///
    /// Exact on every model: flat models are Ricci-flat and the hyperbolic
    /// space form has `Ric = -(m-1)κ² σ`.
    pub fn ricci(&self, sample: &MetricSample, v: &[f64]) -> f64 {
        match self.kind {
            ModelKind::Euclidean | ModelKind::ProductLine => 0.0,
            ModelKind::Hyperbolic { kappa } => {
                let m = self.dim;
                let mut norm2 = 0.0;
                for i in 0..m {
                    for j in 0..m {
                        norm2 += sample.sigma(i, j) * v[i] * v[j];
                    }
                }
                -((m - 1) as f64) * kappa * kappa * norm2
            }
        }
    }

    /// Evaluates `σ_ij` and `γ^k_ij` at a chart point.
    pub fn metric_eval(&self, point: &[f64]) -> Result<MetricSample> {
        let m = self.dim;
        if point.len() != m {
            return Err(Error::Domain(format!(
                "point has {} coordinates, chart has {m}",
                point.len()
            )));
        }
        if let Some(bad) = point.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate {bad}")));
        }
        match self.kind {
            ModelKind::Euclidean | ModelKind::ProductLine => {
                let mut sigma = vec![0.0; m * m];
                for i in 0..m {
                    sigma[i * m + i] = 1.0;
                }
                Ok(MetricSample { dim: m, sigma, christoffel: vec![0.0; m * m * m] })
            }
            ModelKind::Hyperbolic { kappa } => hyperbolic_polar(m, kappa, point),
        }
    }

    /// Area density `A(r)` of geodesic spheres about the chart origin, up to the
    /// constant area of the unit sphere.
    pub fn radial_density(&self, r: f64) -> Result<f64> {
        let p = (self.dim - 1) as i32;
        match self.kind {
            ModelKind::Euclidean => Ok(r.powi(p)),
            ModelKind::Hyperbolic { kappa } => Ok(((kappa * r).sinh() / kappa).powi(p)),
            ModelKind::ProductLine => Err(Error::Domain(
                "product-line model has no radial chart".into(),
            )),
        }
    }

    /// `A'(r) / A(r)`, the mean curvature of the geodesic sphere of radius `r`.
    pub fn radial_log_derivative(&self, r: f64) -> Result<f64> {
        if r < POLAR_CUTOFF {
            return Err(Error::Domain(format!("radius {r} below polar cutoff")));
        }
        let p = (self.dim - 1) as f64;
        match self.kind {
            ModelKind::Euclidean => Ok(p / r),
            ModelKind::Hyperbolic { kappa } => Ok(p * kappa / (kappa * r).tanh()),
            ModelKind::ProductLine => Err(Error::Domain(
                "product-line model has no radial chart".into(),
            )),
        }
    }
}

fn hyperbolic_polar(m: usize, kappa: f64, point: &[f64]) -> Result<MetricSample> {
    let r = point[0];
    if r < POLAR_CUTOFF {
        return Err(Error::Domain(format!(
            "polar radius {r} is below the cutoff {POLAR_CUTOFF}"
        )));
    }
    // Angles θ_1..θ_{m-2} enter the warping products and must stay off the poles.
    for (l, theta) in point.iter().enumerate().skip(1).take(m.saturating_sub(2)) {
        if theta.sin().abs() < POLAR_CUTOFF {
            return Err(Error::Domain(format!("angle θ_{l} = {theta} sits on a pole")));
        }
    }
    let f = (kappa * r).sinh() / kappa;
    let log_df = kappa / (kappa * r).tanh();

    let mut diag = vec![1.0; m];
    let mut prod = f * f;
    for k in 1..m {
        diag[k] = prod;
        prod *= point[k].sin().powi(2);
    }
    // dg[p * m + k] = ∂_p σ_kk
    let mut dg = vec![0.0; m * m];
    for k in 1..m {
        dg[k] = 2.0 * log_df * diag[k];
        for l in 1..k {
            dg[l * m + k] = 2.0 * diag[k] / point[l].tan();
        }
    }
    let mut sigma = vec![0.0; m * m];
    for i in 0..m {
        sigma[i * m + i] = diag[i];
    }
    let mut christoffel = vec![0.0; m * m * m];
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut s = 0.0;
                if k == j {
                    s += dg[i * m + k];
                }
                if k == i {
                    s += dg[j * m + k];
                }
                if i == j {
                    s -= dg[k * m + i];
                }
                christoffel[k * m * m + i * m + j] = 0.5 * s / diag[k];
            }
        }
    }
    Ok(MetricSample { dim: m, sigma, christoffel })
}

/// Outward unit normal descriptor of a boundary piece.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryKind {
    /// `{x^axis = value}` with outward normal `outward · ∂_axis`, `outward = ±1`.
    CoordinatePlane { axis: usize, value: f64, outward: f64 },
    /// Geodesic sphere about the chart origin; the outward normal is radial.
    Sphere { radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryComponent {
    pub label: String,
    pub kind: BoundaryKind,
}

impl BoundaryComponent {
    /// Contravariant components of the σ-unit outward normal at `point`.
    pub fn outward_normal(&self, base: &BaseMetric, point: &[f64]) -> Result<Vec<f64>> {
        let sample = base.metric_eval(point)?;
        let m = base.dim();
        let mut n = vec![0.0; m];
        match self.kind {
            BoundaryKind::CoordinatePlane { axis, outward, .. } => {
                n[axis] = outward / sample.sigma(axis, axis).sqrt();
            }
            BoundaryKind::Sphere { .. } => match base.kind() {
                ModelKind::Hyperbolic { .. } => n[0] = 1.0,
                _ => {
                    let r = point.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if r < POLAR_CUTOFF {
                        return Err(Error::Domain("normal undefined at the centre".into()));
                    }
                    for (ni, xi) in n.iter_mut().zip(point) {
                        *ni = xi / r;
                    }
                }
            },
        }
        Ok(n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// `(0, width) × ℝ^{m-1}` in a flat product chart; `width` may be `+∞`.
    Slab { width: f64 },
    /// `(0, width) × ℝ` in the Euclidean plane.
    Strip { width: f64 },
    /// `{t > 0}`.
    HalfSpace,
    /// Geodesic ball of the given radius about the chart origin.
    Ball { radius: f64 },
    /// The whole model manifold.
    Whole,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelDomain {
    pub base: BaseMetric,
    pub shape: Shape,
    pub boundary: Vec<BoundaryComponent>,
}

impl ModelDomain {
    pub fn new(base: BaseMetric, shape: Shape) -> Result<Self> {
        let plane = |label: &str, value: f64, outward: f64| BoundaryComponent {
            label: label.to_string(),
            kind: BoundaryKind::CoordinatePlane { axis: 0, value, outward },
        };
        let boundary = match shape {
            Shape::Slab { width } | Shape::Strip { width } => {
                if !base.is_flat() {
                    return Err(Error::Argument("slabs and strips need a flat base".into()));
                }
                if matches!(shape, Shape::Strip { .. }) && base.dim() != 2 {
                    return Err(Error::Argument("a strip lives in the plane (m = 2)".into()));
                }
                if width.is_nan() || width <= 0.0 {
                    return Err(Error::Argument(format!("width must be > 0, got {width}")));
                }
                let mut b = vec![plane("t=0", 0.0, -1.0)];
                if width.is_finite() {
                    b.push(plane("t=T", width, 1.0));
                }
                b
            }
            Shape::HalfSpace => {
                if !base.is_flat() {
                    return Err(Error::Argument("half-spaces need a flat base".into()));
                }
                vec![plane("t=0", 0.0, -1.0)]
            }
            Shape::Ball { radius } => {
                if matches!(base.kind(), ModelKind::ProductLine) {
                    return Err(Error::Argument("balls need a Euclidean or hyperbolic base".into()));
                }
                ensure_finite("radius", radius)?;
                if radius <= 0.0 {
                    return Err(Error::Argument(format!("radius must be > 0, got {radius}")));
                }
                vec![BoundaryComponent {
                    label: "r=R".into(),
                    kind: BoundaryKind::Sphere { radius },
                }]
            }
            Shape::Whole => Vec::new(),
        };
        Ok(Self { base, shape, boundary })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Closed-form `|Ω ∩ B_s|` (volume mode) or `|Ω ∩ ∂B_s|` (surface mode),
    /// for balls centred at the chart origin (a point of `{t = 0}` for slabs).
    pub fn growth(&self, mode: GrowthMode, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Argument(format!("growth radius must be > 0, got {s}")));
        }
        let m = self.dim();
        match (self.shape, self.base.kind()) {
            (Shape::Whole, ModelKind::Hyperbolic { kappa }) => {
                let area = (m as f64) * unit_ball_volume(m);
                match mode {
                    GrowthMode::Surface => Ok(area * ((kappa * s).sinh() / kappa).powi(m as i32 - 1)),
                    GrowthMode::Volume => Ok(area
                        * gauss_legendre(0.0, s, 64, |r| ((kappa * r).sinh() / kappa).powi(m as i32 - 1))),
                }
            }
            (Shape::Whole, _) => Ok(match mode {
                GrowthMode::Surface => (m as f64) * unit_ball_volume(m) * s.powi(m as i32 - 1),
                GrowthMode::Volume => unit_ball_volume(m) * s.powi(m as i32),
            }),
            (Shape::Slab { width }, _) | (Shape::Strip { width }, _) => Ok(slab_growth(m, width, mode, s)),
            (Shape::HalfSpace, _) => Ok(slab_growth(m, f64::INFINITY, mode, s)),
            (Shape::Ball { radius }, ModelKind::Hyperbolic { kappa }) => {
                let rr = s.min(radius);
                let area = (m as f64) * unit_ball_volume(m);
                match mode {
                    GrowthMode::Surface if s > radius => Ok(0.0),
                    GrowthMode::Surface => Ok(area * ((kappa * s).sinh() / kappa).powi(m as i32 - 1)),
                    GrowthMode::Volume => Ok(area
                        * gauss_legendre(0.0, rr, 64, |r| ((kappa * r).sinh() / kappa).powi(m as i32 - 1))),
                }
            }
            (Shape::Ball { radius }, _) => Ok(match mode {
                GrowthMode::Surface if s > radius => 0.0,
                GrowthMode::Surface => (m as f64) * unit_ball_volume(m) * s.powi(m as i32 - 1),
                GrowthMode::Volume => unit_ball_volume(m) * s.min(radius).powi(m as i32),
            }),
        }
    }

    /// Runs [`parabolicity_criterion`] on the closed-form growth of this domain.
    pub fn parabolicity(&self, mode: GrowthMode, s0: f64, s_max: f64) -> Result<ParabolicityReport> {
        // Surface samples of a ball vanish beyond its radius; probe before integrating.
        self.growth(mode, s0)?;
        parabolicity_criterion(|s| self.growth(mode, s).unwrap_or(f64::NAN), mode, s0, s_max)
    }
}

/// Volume of the unit ball in `ℝ^m`.
pub fn unit_ball_volume(m: usize) -> f64 {
    // ω_m = π^{m/2} / Γ(m/2 + 1), via ω_m = 2π/m · ω_{m-2}.
    let (mut w, mut k) = if m.is_multiple_of(2) { (1.0, 0) } else { (2.0, 1) };
    while k < m {
        k += 2;
        w *= 2.0 * std::f64::consts::PI / k as f64;
    }
    w
}

fn slab_growth(m: usize, width: f64, mode: GrowthMode, s: f64) -> f64 {
    // Parametrize the cross-sections by t = s sin φ, 0 ≤ φ ≤ φ_max.
    let phi_max = if width >= s { std::f64::consts::FRAC_PI_2 } else { (width / s).asin() };
    let w = unit_ball_volume(m - 1);
    match mode {
        GrowthMode::Volume => {
            w * s.powi(m as i32) * gauss_legendre(0.0, phi_max, 64, |p| p.cos().powi(m as i32))
        }
        GrowthMode::Surface => {
            let sphere = (m - 1) as f64 * w;
            sphere * s.powi(m as i32 - 1) * gauss_legendre(0.0, phi_max, 64, |p| p.cos().powi(m as i32 - 2))
        }
    }
}

/// Composite 4-point Gauss–Legendre rule on `pieces` equal panels.
pub(crate) fn gauss_legendre(a: f64, b: f64, pieces: usize, f: impl Fn(f64) -> f64) -> f64 {
    const X: [f64; 4] = [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ];
    const W: [f64; 4] = [
        0.347_854_845_137_453_9,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_9,
    ];
    let h = (b - a) / pieces as f64;
    let mut total = 0.0;
    for p in 0..pieces {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            total += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * total
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthMode {
    /// `∫^∞ ds / |Ω ∩ ∂B_s| = ∞`
    Surface,
    /// `∫^∞ s ds / |Ω ∩ B_s| = ∞`
    Volume,
}

impl GrowthMode {
    /// Largest tail exponent of the growth compatible with divergence.
    pub fn threshold(self) -> f64 {
        match self {
            GrowthMode::Surface => 1.0,
            GrowthMode::Volume => 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParabolicityVerdict {
    CriterionSatisfied,
    /// The sufficient test is inconclusive; this is not a non-parabolicity claim.
    CriterionNotSatisfied,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParabolicityReport {
    pub verdict: ParabolicityVerdict,
    pub mode: GrowthMode,
    pub s0: f64,
    pub s_max: f64,
    /// Criterion integral over `[s0, s_max]`.
    pub partial_integral: f64,
    /// Exponent `p` of the least-squares fit `growth ~ c s^p` on the last decade.
    pub tail_exponent: f64,
    pub threshold: f64,
}

/// Tolerance on the fitted tail exponent.
pub const EXPONENT_FIT_TOL: f64 = 0.05;

const INTEGRAL_PANELS: usize = 4096;
const FIT_SAMPLES: usize = 65;

/// Volume-growth sufficient condition for parabolicity.
///
/// Integrates `1/growth` (surface mode) or `s/growth` (volume mode) over
/// `[s0, s_max]` on a logarithmic grid and decides divergence of the full
/// integral from the tail exponent fitted on `[s_max/10, s_max]`.
pub fn parabolicity_criterion(
    growth: impl Fn(f64) -> f64,
    mode: GrowthMode,
    s0: f64,
    s_max: f64,
) -> Result<ParabolicityReport> {
    if !(s0 > 0.0) || !s0.is_finite() {
        return Err(Error::Argument(format!("s0 must be a positive real, got {s0}")));
    }
    if !(s_max >= 10.0 * s0) || !s_max.is_finite() {
        return Err(Error::Argument(format!(
            "s_max must span at least one decade above s0 = {s0}, got {s_max}"
        )));
    }
    let sample = |s: f64| -> Result<f64> {
        let g = growth(s);
        if g.is_finite() && g > 0.0 {
            Ok(g)
        } else {
            Err(Error::Data(format!("growth({s}) = {g} is not positive")))
        }
    };

    // Simpson in x = ln s, ds = s dx.
    let (x0, x1) = (s0.ln(), s_max.ln());
    let dx = (x1 - x0) / INTEGRAL_PANELS as f64;
    let mut acc = 0.0;
    for i in 0..=INTEGRAL_PANELS {
        let s = (x0 + i as f64 * dx).exp();
        let g = sample(s)?;
        let integrand = match mode {
            GrowthMode::Surface => s / g,
            GrowthMode::Volume => s * s / g,
        };
        let w = if i == 0 || i == INTEGRAL_PANELS {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * integrand;
    }
    let partial_integral = acc * dx / 3.0;

    let (l0, l1) = ((s_max / 10.0).ln(), s_max.ln());
    let mut xs = Vec::with_capacity(FIT_SAMPLES);
    let mut ys = Vec::with_capacity(FIT_SAMPLES);
    for i in 0..FIT_SAMPLES {
        let x = l0 + (l1 - l0) * i as f64 / (FIT_SAMPLES - 1) as f64;
        xs.push(x);
        ys.push(sample(x.exp())?.ln());
    }
    let n = FIT_SAMPLES as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let tail_exponent = sxy / sxx;

    let threshold = mode.threshold();
    let verdict = if tail_exponent <= threshold + EXPONENT_FIT_TOL {
        ParabolicityVerdict::CriterionSatisfied
    } else {
        ParabolicityVerdict::CriterionNotSatisfied
    };
    Ok(ParabolicityReport { verdict, mode, s0, s_max, partial_integral, tail_exponent, threshold })
}
