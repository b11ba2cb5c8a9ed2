//! Ready-made graph fields for the identity checks and the bundled scenarios.

use crate::error::{Error, Result};
use crate::geometry::{BaseMetric, ModelDomain, Shape};
use crate::graph::GraphField;
use crate::grid::Grid;
use crate::identities::Killing;
use crate::profiles::{CapillaryProfile, TiltedProfile, TiltedRegion};
use crate::solver::{BvpKind, SolveReport};

fn square(m: usize, half_width: f64, n: usize) -> Result<Grid> {
    Grid::from_box(&vec![-half_width; m], &vec![half_width; m], &vec![n; m])
}

/// `u = b + a·x` over `[−L, L]^m`, a minimal graph.
pub fn affine(a: &[f64], b: f64, half_width: f64, n: usize) -> Result<GraphField> {
    let d = ModelDomain::new(BaseMetric::euclidean(a.len())?, Shape::Whole)?;
    let f = GraphField::from_fn(d, square(a.len(), half_width, n)?, |p| {
        b + a.iter().zip(p).map(|(x, y)| x * y).sum::<f64>()
    })?;
    Ok(f.with_certificate(0.0, 0.0))
}

/// `u = 0.3x² + 0.2xy + 0.1y² + x + 0.5y` on `[−1/2, 1/2]²`; not a CMC graph.
pub fn quadratic(n: usize) -> Result<GraphField> {
    let d = ModelDomain::new(BaseMetric::euclidean(2)?, Shape::Whole)?;
    GraphField::from_fn(d, square(2, 0.5, n)?, |p| {
        let (x, y) = (p[0], p[1]);
        0.3 * x * x + 0.2 * x * y + 0.1 * y * y + x + 0.5 * y
    })
}

/// Spherical cap `u = ρ − √(ρ² − |x|²)`, `ρ = 2/H`, over `[−L, L]²`.
pub fn hemisphere(h: f64, half_width: f64, n: usize) -> Result<GraphField> {
    if !(h > 0.0) {
        return Err(Error::Argument(format!("cap needs H > 0, got {h}")));
    }
    let rho = 2.0 / h;
    if !(2f64.sqrt() * half_width < rho) {
        return Err(Error::Argument(format!("box half-width {half_width} too large for a cap of radius {rho}")));
    }
    let d = ModelDomain::new(BaseMetric::euclidean(2)?, Shape::Ball { radius: rho })?;
    let f = GraphField::from_fn(d, square(2, half_width, n)?, |p| rho - (rho * rho - p[0] * p[0] - p[1] * p[1]).sqrt())?;
    Ok(f.with_certificate(h, 0.0))
}

/// A profile `u(t)` on the strip `(0, T) × ℝ`, sampled on `[0, T] × [−L, L]`.
pub fn strip_profile(p: &CapillaryProfile, width: f64, half_len: f64, dims: [usize; 2]) -> Result<GraphField> {
    if !(width > 0.0) || !p.contains(width) {
        return Err(Error::Argument(format!("strip width {width} outside (0, t_max = {}]", p.t_max())));
    }
    let d = ModelDomain::new(BaseMetric::euclidean(2)?, Shape::Strip { width })?;
    let g = Grid::from_box(&[0.0, -half_len], &[width, half_len], &dims)?;
    let u = g.points().map(|x| p.eval(x[0]).map(|v| v.u)).collect::<Result<Vec<_>>>()?;
    Ok(GraphField::new(d, g, u)?.with_certificate(p.h(), 0.0))
}

/// A tilted profile sampled in the chart `(t, y)` adapted to its boundary line:
/// `t` is the distance to `{τ = a0 s + a1}` and `y` runs along it. Returns the
/// field together with `∂_τ` written in that chart.
pub fn tilted_strip(
    tp: &TiltedProfile,
    width: f64,
    half_len: f64,
    dims: [usize; 2],
) -> Result<(GraphField, Killing)> {
    if let TiltedRegion::Slab { width: w } = tp.region {
        if width > w {
            return Err(Error::Argument(format!("width {width} exceeds the slab width {w}")));
        }
    }
    let r = (1.0 + tp.a0 * tp.a0).sqrt();
    let (n_in, e) = ([1.0 / r, -tp.a0 / r], [tp.a0 / r, 1.0 / r]);
    let d = ModelDomain::new(BaseMetric::euclidean(2)?, Shape::Strip { width })?;
    let g = Grid::from_box(&[0.0, -half_len], &[width, half_len], &dims)?;
    let u = g
        .points()
        .map(|x| tp.eval(tp.a1 + x[0] * n_in[0] + x[1] * e[0], x[0] * n_in[1] + x[1] * e[1]))
        .collect::<Result<Vec<_>>>()?;
    let field = GraphField::new(d, g, u)?.with_certificate(tp.profile.h(), 0.0);
    Ok((field, Killing::Constant(vec![n_in[0], e[0]])))
}

/// A converged slab solve extended trivially to `(0, T) × [−L, L]`.
pub fn slab_solution(report: &SolveReport, half_len: f64, n_y: usize) -> Result<GraphField> {
    if report.kind != BvpKind::Slab || report.dim != 2 {
        return Err(Error::Argument("only two-dimensional slab solves embed as strips".into()));
    }
    let width = *report.r.last().unwrap_or(&0.0);
    let d = ModelDomain::new(BaseMetric::euclidean(2)?, Shape::Strip { width })?;
    let g = Grid::from_box(&[0.0, -half_len], &[width, half_len], &[report.u.len(), n_y])?;
    let u = (0..g.len()).map(|k| report.u[g.index_along(k, 0)]).collect();
    Ok(GraphField::new(d, g, u)?.with_certificate(report.mean_curvature, report.final_residual))
}

/// `u = a sin r` on the polar patch `[1/2, 3/2] × [0.2, 1.2]` of the hyperbolic plane; not CMC.
pub fn hyperbolic_radial(kappa: f64, a: f64, n: usize) -> Result<GraphField> {
    let d = ModelDomain::new(BaseMetric::hyperbolic(2, kappa)?, Shape::Whole)?;
    let g = Grid::from_box(&[0.5, 0.2], &[1.5, 1.2], &[n, n])?;
    GraphField::from_fn(d, g, |p| a * p[0].sin())
}

/// `(1 − s²)⁴` on `[lo, hi]` after rescaling to `s ∈ [−1, 1]`, zero outside.
pub fn bump(x: f64, lo: f64, hi: f64) -> f64 {
    let s = (2.0 * x - lo - hi) / (hi - lo);
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - s * s).powi(4)
    }
}

/// Tensor product of bumps; `None` leaves an axis unrestricted (factor 1).
pub fn tensor_bump(grid: &Grid, axes: &[Option<(f64, f64)>]) -> Vec<f64> {
    grid.sample(|p| {
        p.iter()
            .zip(axes)
            .map(|(x, a)| a.map_or(1.0, |(lo, hi)| bump(*x, lo, hi)))
            .product()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tilted_chart_reduces_to_profile() {
        let tp = TiltedProfile::new(1.0, 0.0, -1.0, 0.7, 0.3, TiltedRegion::Slab { width: 0.25 }).unwrap();
        let (f, k) = tilted_strip(&tp, 0.25, 1.0, [9, 9]).unwrap();
        let g = f.grid();
        for node in 0..g.len() {
            let t = g.coordinate(node, 0);
            assert!((f.u()[node] - tp.profile.eval(t).unwrap().u).abs() < 1e-13);
        }
        let Killing::Constant(v) = k else { panic!() };
        assert!((v[0] * v[0] + v[1] * v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bump_support() {
        assert_eq!(bump(0.0, 0.0, 1.0), 0.0);
        assert_eq!(bump(0.5, 0.0, 1.0), 1.0);
        assert_eq!(bump(2.0, 0.0, 1.0), 0.0);
    }
}
