//! Discrete checks of the structural identities satisfied by graphs of
//! constant mean curvature: the Kato remainder, the boundary cancellation
//! identity, Picone's identity for `v̄ = (Du, X)`, the geometric Poincaré
//! inequality and the Jacobi equations for angle functions.
//!
//! Pointwise identities involving second derivatives are evaluated at interior
//! lattice nodes. Integrals use the trapezoid rule with nodal measure weights.
//! Grid faces that coincide with a coordinate-plane boundary component of the
//! domain are treated as `∂Ω`; every other face is artificial and test
//! functions must vanish there.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryKind, ModelKind};
use crate::graph::{
    compute_tensors, graph_laplacian, interior_nodes, lw_operator, matrix_norm2, ricci_normal, GraphField,
    GraphTensors, GRADIENT_THRESHOLD,
};
use crate::report::VerificationReport;

/// Boundary data must be constant along a face to this accuracy.
pub const LOCALLY_CONSTANT_TOL: f64 = 1e-8;

/// Node layers next to an artificial face on which a test function must vanish.
pub const SUPPORT_MARGIN: usize = 4;

/// A Killing field of the base, given by its chart components.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Killing {
    /// Constant components; a translation of a flat Cartesian chart.
    Constant(Vec<f64>),
    /// The coordinate field `∂_k`, Killing when the metric does not depend on `x^k`.
    Coordinate(usize),
}

impl Killing {
    /// Chart components, after checking that the field is Killing for this base.
    pub fn components(&self, field: &GraphField) -> Result<Vec<f64>> {
        let base = &field.domain().base;
        let m = base.dim();
        match self {
            Killing::Constant(v) => {
                if v.len() != m {
                    return Err(Error::Argument(format!("Killing field has {} components, need {m}", v.len())));
                }
                if !base.is_flat() {
                    return Err(Error::Argument("constant fields are Killing only in flat charts".into()));
                }
                Ok(v.clone())
            }
            Killing::Coordinate(k) => {
                if *k >= m {
                    return Err(Error::Argument(format!("coordinate {k} out of range for m = {m}")));
                }
                if let ModelKind::Hyperbolic { .. } = base.kind() {
                    if *k + 1 != m || m < 2 {
                        return Err(Error::Argument(format!(
                            "in the polar chart only the last angle ∂_{} is Killing",
                            m - 1
                        )));
                    }
                }
                let mut v = vec![0.0; m];
                v[*k] = 1.0;
                Ok(v)
            }
        }
    }
}

/// `v̄ = (Du, X) = u_i X^i` at every node.
pub fn vbar(field: &GraphField, tensors: &GraphTensors, killing: &Killing) -> Result<Vec<f64>> {
    let x = killing.components(field)?;
    Ok((0..tensors.nodes).map(|n| tensors.du(n).iter().zip(&x).map(|(a, b)| a * b).sum()).collect())
}

/// Grid faces lying on `∂Ω`, as `(axis, upper)`.
pub fn boundary_faces(field: &GraphField) -> Vec<(usize, bool)> {
    let grid = field.grid();
    let mut out = Vec::new();
    for comp in &field.domain().boundary {
        if let BoundaryKind::CoordinatePlane { axis, value, .. } = comp.kind {
            if axis >= grid.dim() {
                continue;
            }
            let h = grid.spacing()[axis];
            let lo = grid.origin()[axis];
            let hi = lo + h * (grid.dims()[axis] - 1) as f64;
            for (upper, c) in [(false, lo), (true, hi)] {
                if (c - value).abs() <= 1e-9 * h && !out.contains(&(axis, upper)) {
                    out.push((axis, upper));
                }
            }
        }
    }
    out
}

fn artificial_faces(field: &GraphField) -> Vec<(usize, bool)> {
    let b = boundary_faces(field);
    (0..field.dim())
        .flat_map(|a| [(a, false), (a, true)])
        .filter(|f| !b.contains(f))
        .collect()
}

/// Fails unless `φ` vanishes within [`SUPPORT_MARGIN`] layers of every artificial face.
fn check_support(field: &GraphField, phi: &[f64]) -> Result<()> {
    let grid = field.grid();
    if phi.len() != grid.len() {
        return Err(Error::Argument(format!("{} test values for {} nodes", phi.len(), grid.len())));
    }
    if let Some(k) = phi.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("test function is not finite at node {k}")));
    }
    let faces = artificial_faces(field);
    for (node, v) in phi.iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        for &(axis, upper) in &faces {
            let i = grid.index_along(node, axis);
            let d = if upper { grid.dims()[axis] - 1 - i } else { i };
            if d < SUPPORT_MARGIN {
                return Err(Error::Precondition(format!(
                    "test function is nonzero at node {node}, {d} layers from an artificial face"
                )));
            }
        }
    }
    Ok(())
}

/// Fails unless `u` and `|Du|` are constant along every boundary face.
fn check_locally_constant(field: &GraphField, t: &GraphTensors) -> Result<()> {
    let grid = field.grid();
    for (axis, upper) in boundary_faces(field) {
        let nodes = grid.face_nodes(axis, upper);
        let spread = |f: &dyn Fn(usize) -> f64| {
            let (lo, hi) = nodes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &n| {
                let v = f(n);
                (a.min(v), b.max(v))
            });
            hi - lo
        };
        let du = spread(&|n| (t.w[n] * t.w[n] - 1.0).max(0.0).sqrt());
        let u = spread(&|n| field.u()[n]);
        if u > LOCALLY_CONSTANT_TOL || du > LOCALLY_CONSTANT_TOL {
            return Err(Error::Precondition(format!(
                "boundary face (axis {axis}, upper {upper}) is not locally constant: \
                 spread of u = {u:e}, of |Du| = {du:e}"
            )));
        }
    }
    Ok(())
}

fn sub_determinant(g: &[f64], m: usize, skip: usize) -> f64 {
    let idx: Vec<usize> = (0..m).filter(|&i| i != skip).collect();
    if idx.is_empty() {
        return 1.0;
    }
    let k = idx.len();
    DMatrix::from_fn(k, k, |i, j| g[idx[i] * m + idx[j]]).determinant()
}

/// Nodal weights of `dx_g = W dx` (with the Riemannian `√det σ`).
fn volume_weights(field: &GraphField, t: &GraphTensors) -> Vec<f64> {
    let grid = field.grid();
    (0..grid.len()).map(|n| grid.trapezoid_weight(n) * field.sqrt_det_sigma(n) * t.w[n]).collect()
}

/// Boundary quadrature node: weight of `dH_g`, and outward conormal `η` as the
/// operator `f_i ↦ ⟨∇f, η⟩`.
struct FaceNode {
    node: usize,
    weight: f64,
    /// `s g^{ai} / √g^{aa}`
    eta: Vec<f64>,
}

fn face_quadrature(field: &GraphField, t: &GraphTensors) -> Vec<FaceNode> {
    let grid = field.grid();
    let m = field.dim();
    let mut out = Vec::new();
    for (axis, upper) in boundary_faces(field) {
        let s = if upper { 1.0 } else { -1.0 };
        for node in grid.face_nodes(axis, upper) {
            let gi = t.g_inv(node);
            let norm = gi[axis * m + axis].sqrt();
            let eta = (0..m).map(|i| s * gi[axis * m + i] / norm).collect();
            let weight = grid.face_weight(node, axis) * sub_determinant(t.g(node), m, axis).sqrt();
            out.push(FaceNode { node, weight, eta });
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pieces of the Kato identity at one node.
struct KatoTerms {
    /// `‖∇²u‖² − ‖∇‖∇u‖‖²`
    lhs: f64,
    /// `‖∇_⊤‖∇u‖‖²`
    tangential: f64,
    /// `‖∇u‖² ‖A‖²`, the squared tangential part of `∇²u`
    level: f64,
}

fn kato_terms(t: &GraphTensors, node: usize, dn: &[f64], n: f64) -> KatoTerms {
    let m = t.dim;
    let w2 = t.w[node] * t.w[node];
    let gi = t.g_inv(node);
    let hg: Vec<f64> = t.hess(node).iter().map(|h| h / w2).collect();
    let du = t.du(node);
    let hess2 = matrix_norm2(gi, &hg, m);
    let dn2 = t.inner(node, dn, dn);
    let dn_nu = t.inner(node, dn, du) / n;
    // P^i_a = δ^i_a − ν^i ν_a
    let nu_up: Vec<f64> = (0..m).map(|i| dot(&gi[i * m..(i + 1) * m], du) / n).collect();
    let mut p = vec![0.0; m * m];
    for i in 0..m {
        for a in 0..m {
            p[i * m + a] = f64::from(u8::from(i == a)) - nu_up[i] * du[a] / n;
        }
    }
    let mut php = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            let mut s = 0.0;
            for i in 0..m {
                for j in 0..m {
                    s += p[i * m + a] * hg[i * m + j] * p[j * m + b];
                }
            }
            php[a * m + b] = s;
        }
    }
    KatoTerms { lhs: hess2 - dn2, tangential: dn2 - dn_nu * dn_nu, level: matrix_norm2(gi, &php, m) }
}

fn grad_norm(t: &GraphTensors) -> Vec<f64> {
    t.w.iter().map(|w| (w * w - 1.0).max(0.0).sqrt() / w).collect()
}

/// Max over interior nodes with `‖∇u‖ ≥ threshold` of
/// `|‖∇²u‖² − ‖∇‖∇u‖‖² − ‖∇_⊤‖∇u‖‖² − ‖∇u‖²‖A‖²|`.
pub fn kato_remainder_check(field: &GraphField, threshold: f64, tol: f64) -> Result<VerificationReport> {
    let t = compute_tensors(field);
    let n = grad_norm(&t);
    let dn = field.grid().gradient(&n);
    let m = field.dim();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let mut count = 0usize;
    for node in interior_nodes(field.grid()) {
        if n[node] < threshold.max(GRADIENT_THRESHOLD) {
            continue;
        }
        let k = kato_terms(&t, node, &dn[node * m..(node + 1) * m], n[node]);
        worst = worst.max((k.lhs - k.tangential - k.level).abs());
        scale = scale.max(k.lhs.abs());
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyEvaluation(format!("no interior node has ‖∇u‖ >= {threshold:e}")));
    }
    let mut r = VerificationReport::new("kato", Some(field.grid()));
    r.at_most("max_residual", worst, tol).info("max_lhs", scale).info("nodes", count as f64);
    Ok(r)
}

/// Max over boundary nodes of `|⟨W‖∇u‖²∇v̄, ∇u⟩ − ⟨v̄∇W, ∇u⟩|`.
pub fn boundary_identity_check(field: &GraphField, killing: &Killing, tol: f64) -> Result<VerificationReport> {
    let t = compute_tensors(field);
    check_locally_constant(field, &t)?;
    let faces = boundary_faces(field);
    if faces.is_empty() {
        return Err(Error::EmptyEvaluation("no grid face lies on the domain boundary".into()));
    }
    let v = vbar(field, &t, killing)?;
    let grid = field.grid();
    let dv = grid.gradient(&v);
    let dw = grid.gradient(&t.w);
    let m = field.dim();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (axis, upper) in faces {
        for node in grid.face_nodes(axis, upper) {
            let w = t.w[node];
            let du = t.du(node);
            let lhs = w * t.grad_u_norm2(node) * t.inner(node, &dv[node * m..(node + 1) * m], du);
            let rhs = v[node] * t.inner(node, &dw[node * m..(node + 1) * m], du);
            worst = worst.max((lhs - rhs).abs());
            scale = scale.max(lhs.abs());
        }
    }
    let mut r = VerificationReport::new("boundary", Some(grid));
    r.at_most("max_residual", worst, tol).info("max_side", scale);
    Ok(r)
}

/// Terms of Picone's identity in the measures `dx_W`, `dH_W`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PiconeTerms {
    /// `∫_∂ φ² ⟨∇v̄, η⟩ / (v̄ + ε)`
    pub boundary: f64,
    /// `∫ ‖∇φ‖²`
    pub dirichlet: f64,
    /// `∫ (v̄ + ε)² ‖∇(φ / (v̄ + ε))‖²`
    pub quotient: f64,
    pub residual: f64,
}

pub fn picone_terms(field: &GraphField, killing: &Killing, phi: &[f64], eps: f64) -> Result<PiconeTerms> {
    if !(eps > 0.0) {
        return Err(Error::Argument(format!("ε must be > 0, got {eps}")));
    }
    check_support(field, phi)?;
    let t = compute_tensors(field);
    let v = vbar(field, &t, killing)?;
    let grid = field.grid();
    let m = field.dim();
    let w: Vec<f64> = v.iter().map(|x| x + eps).collect();
    if let Some(k) = (0..grid.len()).find(|&k| phi[k] != 0.0 && !(w[k] > 0.0)) {
        return Err(Error::Precondition(format!("v̄ + ε = {} <= 0 on the support of φ (node {k})", w[k])));
    }
    let quot: Vec<f64> = phi.iter().zip(&w).map(|(p, w)| if *p == 0.0 { 0.0 } else { p / w }).collect();
    let dphi = grid.gradient(phi);
    let dq = grid.gradient(&quot);
    let dv = grid.gradient(&v);
    let vol = volume_weights(field, &t);
    let (mut dirichlet, mut quotient) = (0.0, 0.0);
    for n in 0..grid.len() {
        let wt = vol[n] / (t.w[n] * t.w[n]);
        let gp = &dphi[n * m..(n + 1) * m];
        let gq = &dq[n * m..(n + 1) * m];
        dirichlet += wt * t.inner(n, gp, gp);
        quotient += wt * w[n] * w[n] * t.inner(n, gq, gq);
    }
    let mut boundary = 0.0;
    for f in face_quadrature(field, &t) {
        let n = f.node;
        if phi[n] == 0.0 {
            continue;
        }
        let wt = f.weight / (t.w[n] * t.w[n]);
        boundary += wt * phi[n] * phi[n] * dot(&f.eta, &dv[n * m..(n + 1) * m]) / w[n];
    }
    Ok(PiconeTerms { boundary, dirichlet, quotient, residual: (boundary - (dirichlet - quotient)).abs() })
}

/// `|∫_∂ φ²⟨∇v̄,η⟩/(v̄+ε) − ∫‖∇φ‖² + ∫(v̄+ε)²‖∇(φ/(v̄+ε))‖²|` in the weighted measures.
pub fn picone_check(
    field: &GraphField,
    killing: &Killing,
    phi: &[f64],
    eps: f64,
    tol: f64,
) -> Result<VerificationReport> {
    let p = picone_terms(field, killing, phi, eps)?;
    let mut r = VerificationReport::new("picone", Some(field.grid()));
    r.at_most("residual", p.residual, tol)
        .info("boundary", p.boundary)
        .info("dirichlet", p.dirichlet)
        .info("quotient", p.quotient)
        .info("epsilon", eps);
    Ok(r)
}

/// A solved field with a Killing direction and a test function.
#[derive(Clone, Debug)]
pub struct IdentityCase {
    pub field: GraphField,
    pub killing: Killing,
    pub phi: Vec<f64>,
}

impl IdentityCase {
    pub fn new(field: GraphField, killing: Killing, phi: Vec<f64>) -> Result<Self> {
        killing.components(&field)?;
        check_support(&field, &phi)?;
        Ok(Self { field, killing, phi })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoincareTerms {
    /// `∫ [W²(‖∇_⊤‖∇u‖‖² + ‖∇u‖²‖A‖²) + Ric(Du,Du)/W²] φ²`
    pub lhs1: f64,
    /// `∫ (v̄²/W²) ‖∇(φ‖∇u‖W/v̄)‖²`
    pub lhs2: f64,
    /// `∫ ‖∇u‖² ‖∇φ‖²`
    pub rhs: f64,
    pub slack: f64,
}

struct PoincareData {
    t: GraphTensors,
    v: Vec<f64>,
    vol: Vec<f64>,
}

fn poincare_data(case: &IdentityCase) -> Result<PoincareData> {
    let field = &case.field;
    field.certified_mean_curvature()?;
    let t = compute_tensors(field);
    check_locally_constant(field, &t)?;
    let v = vbar(field, &t, &case.killing)?;
    if let Some(k) = (0..v.len()).find(|&k| case.phi[k] != 0.0 && !(v[k] > 0.0)) {
        return Err(Error::Precondition(format!("v̄ = {} <= 0 on the support of φ (node {k})", v[k])));
    }
    let vol = volume_weights(field, &t);
    Ok(PoincareData { t, v, vol })
}

/// All three integrals of the geometric Poincaré inequality, in `dx_g`.
pub fn poincare_terms(case: &IdentityCase) -> Result<PoincareTerms> {
    let PoincareData { t, v, vol } = poincare_data(case)?;
    let field = &case.field;
    let grid = field.grid();
    let m = field.dim();
    let phi = &case.phi;
    let n = grad_norm(&t);
    let dn = grid.gradient(&n);
    let rho = field.domain().base.ricci_factor();
    let psi: Vec<f64> =
        (0..grid.len()).map(|k| if phi[k] == 0.0 { 0.0 } else { phi[k] * n[k] * t.w[k] / v[k] }).collect();
    let dpsi = grid.gradient(&psi);
    let dphi = grid.gradient(phi);
    let (mut lhs1, mut lhs2, mut rhs) = (0.0, 0.0, 0.0);
    for k in 0..grid.len() {
        let w2 = t.w[k] * t.w[k];
        let gp = &dphi[k * m..(k + 1) * m];
        rhs += vol[k] * n[k] * n[k] * t.inner(k, gp, gp);
        // ∇ψ is nonzero next to the support even where φ vanishes
        let gs = &dpsi[k * m..(k + 1) * m];
        lhs2 += vol[k] * v[k] * v[k] / w2 * t.inner(k, gs, gs);
        if phi[k] == 0.0 {
            continue;
        }
        let kt = kato_terms(&t, k, &dn[k * m..(k + 1) * m], n[k]);
        let ric = rho * (w2 - 1.0);
        lhs1 += vol[k] * (w2 * (kt.tangential + kt.level) + ric / w2) * phi[k] * phi[k];
    }
    Ok(PoincareTerms { lhs1, lhs2, rhs, slack: rhs - lhs1 - lhs2 })
}

/// Passes when `rhs − lhs1 − lhs2 ≥ −tol`.
pub fn poincare_check(case: &IdentityCase, tol: f64) -> Result<VerificationReport> {
    let p = poincare_terms(case)?;
    let mut r = VerificationReport::new("poincare", Some(case.field.grid()));
    r.at_least("slack", p.slack, tol).info("lhs1", p.lhs1).info("lhs2", p.lhs2).info("rhs", p.rhs);
    Ok(r)
}

/// The ε-dependent error integrals that vanish as `ε → 0` in the derivation of
/// the Poincaré inequality, in `dx_W`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpsilonTerms {
    pub epsilon: f64,
    /// `∫ |2φW ε/(v̄+ε) ⟨∇φ,∇W⟩ + φ² ε/(v̄+ε) ‖∇W‖²|`
    pub dominated: f64,
    /// `|∫ φ² W ⟨ε∇v̄/(v̄+ε)², ∇W⟩|`
    pub cross: f64,
}

pub fn poincare_epsilon_terms(case: &IdentityCase, eps: f64) -> Result<EpsilonTerms> {
    if !(eps > 0.0) {
        return Err(Error::Argument(format!("ε must be > 0, got {eps}")));
    }
    let PoincareData { t, v, vol } = poincare_data(case)?;
    let grid = case.field.grid();
    let m = case.field.dim();
    let phi = &case.phi;
    let dphi = grid.gradient(phi);
    let dv = grid.gradient(&v);
    let (mut dominated, mut cross) = (0.0, 0.0);
    for k in 0..grid.len() {
        if phi[k] == 0.0 {
            continue;
        }
        let w = t.w[k];
        let wt = vol[k] / (w * w);
        let dw = t.dw(k);
        let r = eps / (v[k] + eps);
        let a = 2.0 * phi[k] * w * r * t.inner(k, &dphi[k * m..(k + 1) * m], &dw)
            + phi[k] * phi[k] * r * t.inner(k, &dw, &dw);
        dominated += wt * a.abs();
        cross += wt * phi[k] * phi[k] * w * eps / (v[k] + eps).powi(2) * t.inner(k, &dv[k * m..(k + 1) * m], &dw);
    }
    Ok(EpsilonTerms { epsilon: eps, dominated, cross: cross.abs() })
}

/// Max interior residuals of the Jacobi equation for `1/W` and `v̄/W`, the
/// equations for `W`, `𝓛_W v̄ = 0`, and the expansion of `𝓛_W z` for
/// `z = W e^{−Cu}`.
pub fn jacobi_check(field: &GraphField, killing: &Killing, c: f64, tol: f64) -> Result<VerificationReport> {
    let h = field.certified_mean_curvature()?;
    let t = compute_tensors(field);
    let v = vbar(field, &t, killing)?;
    let ric = ricci_normal(field, &t);
    let q: Vec<f64> = (0..t.nodes).map(|k| t.second_form_norm2(k) + ric[k]).collect();
    let theta_y: Vec<f64> = t.w.iter().map(|w| 1.0 / w).collect();
    let theta_x: Vec<f64> = v.iter().zip(&t.w).map(|(v, w)| v / w).collect();
    let z: Vec<f64> = field.u().iter().zip(&t.w).map(|(u, w)| w * (-c * u).exp()).collect();
    let lap_y = graph_laplacian(field, &t, &theta_y);
    let lap_x = graph_laplacian(field, &t, &theta_x);
    let lap_w = graph_laplacian(field, &t, &t.w);
    let lw_w = lw_operator(field, &t, &t.w);
    let lw_v = lw_operator(field, &t, &v);
    let lw_z = lw_operator(field, &t, &z);
    let mut res = [0.0f64; 6];
    let mut count = 0usize;
    for k in interior_nodes(field.grid()) {
        let w = t.w[k];
        let dw = t.dw(k);
        let n2 = t.grad_u_norm2(k);
        let vals = [
            lap_y[k] + q[k] * theta_y[k],
            lap_x[k] + q[k] * theta_x[k],
            lap_w[k] - q[k] * w - 2.0 * t.inner(k, &dw, &dw) / w,
            lw_w[k] - q[k] * w,
            lw_v[k],
            lw_z[k] - (t.second_form_norm2(k) - c * h / w + ric[k] + c * c * n2) * z[k],
        ];
        for (r, x) in res.iter_mut().zip(vals) {
            *r = r.max(x.abs());
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyEvaluation("grid has no interior nodes".into()));
    }
    let mut r = VerificationReport::new("jacobi", Some(field.grid()));
    r.at_most("jacobi_vertical", res[0], tol)
        .at_most("jacobi_killing", res[1], tol)
        .at_most("eq_w", res[2], tol)
        .at_most("llw_w", res[3], tol)
        .at_most("llw_vbar", res[4], tol)
        .at_most("llw_z", res[5], tol)
        .info("C", c);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields;
    use crate::profiles::CapillaryProfile;

    fn order(e: &[f64]) -> f64 {
        (e[e.len() - 2] / e[e.len() - 1]).log2()
    }

    #[test]
    fn affine_field_is_trivial() {
        let f = fields::affine(&[0.4, -0.3], 0.2, 0.5, 17).unwrap();
        let k = Killing::Constant(vec![1.0, 0.0]);
        let r = kato_remainder_check(&f, 1e-8, 1e-10).unwrap();
        assert!(r.passed, "{r:?}");
        let j = jacobi_check(&f, &k, 0.0, 1e-10).unwrap();
        assert!(j.passed, "{j:?}");
    }

    #[test]
    fn kato_on_quadratic_converges() {
        let e: Vec<f64> = [17, 33, 65]
            .iter()
            .map(|&n| kato_remainder_check(&fields::quadratic(n).unwrap(), 1e-8, 1.0).unwrap().value("max_residual").unwrap())
            .collect();
        assert!(order(&e) > 1.8, "{e:?}");
    }

    #[test]
    fn empty_evaluation_below_threshold() {
        let f = fields::affine(&[0.0, 0.0], 1.0, 0.5, 9).unwrap();
        assert!(matches!(kato_remainder_check(&f, 1e-8, 1.0), Err(Error::EmptyEvaluation(_))));
    }

    #[test]
    fn boundary_identity_with_flat_gradient() {
        let p = CapillaryProfile::new(1.0, 0.0, 0.0).unwrap();
        let f = fields::strip_profile(&p, 0.5, 1.0, [41, 21]).unwrap();
        let r = boundary_identity_check(&f, &Killing::Coordinate(0), 1e-3).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn boundary_precondition() {
        let f = fields::quadratic(17).unwrap();
        // the quadratic lives on the whole plane: no boundary faces
        assert!(matches!(boundary_identity_check(&f, &Killing::Coordinate(0), 1.0), Err(Error::EmptyEvaluation(_))));
        let p = CapillaryProfile::new(0.0, 0.0, -1.0).unwrap();
        let g = fields::strip_profile(&p, 1.0, 1.0, [17, 17]).unwrap();
        let mut u = g.u().to_vec();
        u[0] += 1e-3;
        let bad = GraphField::new(g.domain().clone(), g.grid().clone(), u).unwrap();
        assert!(matches!(boundary_identity_check(&bad, &Killing::Coordinate(0), 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn picone_zero_test_function() {
        let p = CapillaryProfile::new(1.0, 0.0, -1.0).unwrap();
        let f = fields::strip_profile(&p, 0.25, 1.0, [33, 33]).unwrap();
        let phi = vec![0.0; f.grid().len()];
        let t = picone_terms(&f, &Killing::Coordinate(0), &phi, 0.1).unwrap();
        assert_eq!((t.boundary, t.dirichlet, t.quotient, t.residual), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn picone_rejects_support_on_artificial_faces() {
        let p = CapillaryProfile::new(1.0, 0.0, -1.0).unwrap();
        let f = fields::strip_profile(&p, 0.25, 1.0, [33, 33]).unwrap();
        let phi = vec![1.0; f.grid().len()];
        assert!(matches!(picone_terms(&f, &Killing::Coordinate(0), &phi, 0.1), Err(Error::Precondition(_))));
    }

    #[test]
    fn poincare_needs_certificate() {
        let f = fields::quadratic(17).unwrap();
        let phi = fields::tensor_bump(f.grid(), &[Some((-0.3, 0.3)), Some((-0.3, 0.3))]);
        let case = IdentityCase::new(f, Killing::Coordinate(0), phi).unwrap();
        assert!(matches!(poincare_check(&case, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn hyperbolic_killing_fields() {
        let f = fields::hyperbolic_radial(0.8, 0.3, 9).unwrap();
        assert!(Killing::Coordinate(1).components(&f).is_ok());
        assert!(Killing::Coordinate(0).components(&f).is_err());
        assert!(Killing::Constant(vec![1.0, 0.0]).components(&f).is_err());
    }
}
