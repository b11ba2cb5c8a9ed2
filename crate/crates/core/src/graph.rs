//! Discrete graph calculus for `Σ = {(u(x), x)}` over a model domain.
//!
//! All indices are raised with the base metric (`u^i = σ^ij u_j`). Tensors are
//! stored in flat arrays: vectors as `[node * m + i]`, matrices as
//! `[node * m * m + i * m + j]`.

use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ModelDomain;
use crate::grid::Grid;
use crate::report::VerificationReport;

/// Residual bound required of a CMC certificate by checks that assume a solution.
pub const CMC_RESIDUAL_MAX: f64 = 1e-8;

/// Gradient magnitude below which level-set quantities are undefined.
pub const GRADIENT_THRESHOLD: f64 = 1e-12;

/// Provenance of the claim that a field solves `div(Du/W) = H`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CmcCertificate {
    pub mean_curvature: f64,
    /// Max-norm residual of the equation as certified by the producer
    /// (zero for closed-form solutions).
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct GraphField {
    domain: ModelDomain,
    grid: Grid,
    u: Vec<f64>,
    sigma: Vec<f64>,
    sigma_inv: Vec<f64>,
    christoffel: Vec<f64>,
    sqrt_det_sigma: Vec<f64>,
    certificate: Option<CmcCertificate>,
}

impl GraphField {
    pub fn new(domain: ModelDomain, grid: Grid, u: Vec<f64>) -> Result<Self> {
        let m = domain.dim();
        if grid.dim() != m {
            return Err(Error::Argument(format!("grid has {} axes, manifold has dimension {m}", grid.dim())));
        }
        if u.len() != grid.len() {
            return Err(Error::Argument(format!("{} values for {} nodes", u.len(), grid.len())));
        }
        if let Some(k) = u.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("u is not finite at node {k}")));
        }
        let n = grid.len();
        let mm = m * m;
        let mut sigma = Vec::with_capacity(n * mm);
        let mut sigma_inv = Vec::with_capacity(n * mm);
        let mut christoffel = Vec::with_capacity(n * mm * m);
        let mut sqrt_det_sigma = Vec::with_capacity(n);
        for p in grid.points() {
            let s = domain.base.metric_eval(&p)?;
            let mat = DMatrix::from_row_slice(m, m, &s.sigma);
            let det = mat.determinant();
            let inv = mat
                .try_inverse()
                .ok_or_else(|| Error::Domain(format!("singular metric at {p:?}")))?;
            sigma.extend_from_slice(&s.sigma);
            sigma_inv.extend(inv.transpose().iter().copied());
            christoffel.extend_from_slice(&s.christoffel);
            sqrt_det_sigma.push(det.sqrt());
        }
        Ok(Self { domain, grid, u, sigma, sigma_inv, christoffel, sqrt_det_sigma, certificate: None })
    }

    /// Samples `f` on the grid.
    pub fn from_fn(domain: ModelDomain, grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let u = grid.sample(f);
        Self::new(domain, grid, u)
    }

    pub fn with_certificate(mut self, mean_curvature: f64, residual: f64) -> Self {
        self.certificate = Some(CmcCertificate { mean_curvature, residual });
        self
    }

    pub fn domain(&self) -> &ModelDomain {
        &self.domain
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn certificate(&self) -> Option<CmcCertificate> {
        self.certificate
    }

    /// The certified mean curvature, if the certificate meets [`CMC_RESIDUAL_MAX`].
    pub fn certified_mean_curvature(&self) -> Result<f64> {
        match self.certificate {
            Some(c) if c.residual <= CMC_RESIDUAL_MAX => Ok(c.mean_curvature),
            Some(c) => Err(Error::Precondition(format!(
                "field solves the CMC equation only to residual {:e} > {CMC_RESIDUAL_MAX:e}",
                c.residual
            ))),
            None => Err(Error::Precondition("field carries no CMC certificate".into())),
        }
    }

    pub fn sigma(&self, node: usize) -> &[f64] {
        let mm = self.dim() * self.dim();
        &self.sigma[node * mm..(node + 1) * mm]
    }

    pub fn sigma_inv(&self, node: usize) -> &[f64] {
        let mm = self.dim() * self.dim();
        &self.sigma_inv[node * mm..(node + 1) * mm]
    }

    pub fn sqrt_det_sigma(&self, node: usize) -> f64 {
        self.sqrt_det_sigma[node]
    }

    /// Covariant gradient and Hessian of a nodal scalar field.
    pub fn derivatives(&self, phi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = self.dim();
        let mm = m * m;
        let grad = self.grid.gradient(phi);
        let mut hess = self.grid.hessian(phi);
        for node in 0..self.grid.len() {
            let gam = &self.christoffel[node * mm * m..(node + 1) * mm * m];
            let d = &grad[node * m..(node + 1) * m];
            for i in 0..m {
                for j in 0..m {
                    let corr: f64 = (0..m).map(|k| gam[k * mm + i * m + j] * d[k]).sum();
                    hess[node * mm + i * m + j] -= corr;
                }
            }
        }
        (grad, hess)
    }
}

#[derive(Clone, Debug)]
pub struct GraphTensors {
    pub dim: usize,
    pub nodes: usize,
    /// `u_i`
    pub du: Vec<f64>,
    /// `u^i = σ^ij u_j`
    pub du_up: Vec<f64>,
    /// `u_ij`, covariant in the base
    pub hess: Vec<f64>,
    pub w: Vec<f64>,
    pub g: Vec<f64>,
    pub g_inv: Vec<f64>,
    pub second_form: Vec<f64>,
    pub mean_curvature: Vec<f64>,
}

impl GraphTensors {
    pub fn du(&self, node: usize) -> &[f64] {
        &self.du[node * self.dim..(node + 1) * self.dim]
    }

    pub fn du_up(&self, node: usize) -> &[f64] {
        &self.du_up[node * self.dim..(node + 1) * self.dim]
    }

    pub fn g(&self, node: usize) -> &[f64] {
        let mm = self.dim * self.dim;
        &self.g[node * mm..(node + 1) * mm]
    }

    pub fn g_inv(&self, node: usize) -> &[f64] {
        let mm = self.dim * self.dim;
        &self.g_inv[node * mm..(node + 1) * mm]
    }

    pub fn hess(&self, node: usize) -> &[f64] {
        let mm = self.dim * self.dim;
        &self.hess[node * mm..(node + 1) * mm]
    }

    pub fn second_form(&self, node: usize) -> &[f64] {
        let mm = self.dim * self.dim;
        &self.second_form[node * mm..(node + 1) * mm]
    }

    /// `g(∇a, ∇b) = g^ij a_i b_j` for covectors.
    pub fn inner(&self, node: usize, a: &[f64], b: &[f64]) -> f64 {
        bilinear(self.g_inv(node), a, b, self.dim)
    }

    /// `‖∇u‖²_g`
    pub fn grad_u_norm2(&self, node: usize) -> f64 {
        let du = self.du(node);
        self.inner(node, du, du)
    }

    /// `‖II‖²_g`
    pub fn second_form_norm2(&self, node: usize) -> f64 {
        matrix_norm2(self.g_inv(node), self.second_form(node), self.dim)
    }

    /// Components `(n_y, n^i)` of the upward unit normal in `ℝ × M`.
    pub fn unit_normal(&self, node: usize) -> (f64, Vec<f64>) {
        let w = self.w[node];
        (1.0 / w, self.du_up(node).iter().map(|v| -v / w).collect())
    }

    /// Covariant derivative `W_i = u^k u_ki / W`.
    pub fn dw(&self, node: usize) -> Vec<f64> {
        let m = self.dim;
        let up = self.du_up(node);
        let h = self.hess(node);
        (0..m)
            .map(|i| (0..m).map(|k| up[k] * h[k * m + i]).sum::<f64>() / self.w[node])
            .collect()
    }
}

/// `a^T M b` for a row-major `m × m` matrix.
pub(crate) fn bilinear(mat: &[f64], a: &[f64], b: &[f64], m: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            s += mat[i * m + j] * a[i] * b[j];
        }
    }
    s
}

/// `G^ia G^jb T_ij T_ab` for a symmetric covariant 2-tensor `T`.
pub(crate) fn matrix_norm2(inv: &[f64], t: &[f64], m: usize) -> f64 {
    // raise both indices: S = G T G, then contract with T
    let mut gt = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            gt[i * m + j] = (0..m).map(|k| inv[i * m + k] * t[k * m + j]).sum();
        }
    }
    let mut s = 0.0;
    for a in 0..m {
        for b in 0..m {
            // (G T G)^{ab} T_ab
            let up: f64 = (0..m).map(|j| gt[a * m + j] * inv[j * m + b]).sum();
            s += up * t[a * m + b];
        }
    }
    s
}

/// Computes every pointwise graph tensor from second-order differences.
pub fn compute_tensors(field: &GraphField) -> GraphTensors {
    let m = field.dim();
    let mm = m * m;
    let n = field.grid.len();
    let (du, hess) = field.derivatives(&field.u);
    let mut du_up = vec![0.0; n * m];
    let mut w = vec![0.0; n];
    let mut g = vec![0.0; n * mm];
    let mut g_inv = vec![0.0; n * mm];
    let mut second_form = vec![0.0; n * mm];
    let mut mean_curvature = vec![0.0; n];
    for node in 0..n {
        let s = field.sigma(node);
        let si = field.sigma_inv(node);
        let d = &du[node * m..(node + 1) * m];
        let up: Vec<f64> = (0..m).map(|i| (0..m).map(|j| si[i * m + j] * d[j]).sum()).collect();
        let norm2: f64 = up.iter().zip(d).map(|(a, b)| a * b).sum();
        let wn = (1.0 + norm2).sqrt();
        let h = &hess[node * mm..(node + 1) * mm];
        let mut trace = 0.0;
        for i in 0..m {
            for j in 0..m {
                let k = node * mm + i * m + j;
                g[k] = s[i * m + j] + d[i] * d[j];
                g_inv[k] = si[i * m + j] - up[i] * up[j] / (wn * wn);
                second_form[k] = h[i * m + j] / wn;
                trace += g_inv[k] * second_form[k];
            }
        }
        du_up[node * m..(node + 1) * m].copy_from_slice(&up);
        w[node] = wn;
        mean_curvature[node] = trace;
    }
    GraphTensors { dim: m, nodes: n, du, du_up, hess, w, g, g_inv, second_form, mean_curvature }
}

/// `Δ_g φ = g^ij φ_ij − φ_k u^k H / W`, with `H` the discrete mean curvature.
pub fn graph_laplacian(field: &GraphField, tensors: &GraphTensors, phi: &[f64]) -> Vec<f64> {
    let m = field.dim();
    let (grad, hess) = field.derivatives(phi);
    (0..tensors.nodes)
        .map(|node| {
            let gi = tensors.g_inv(node);
            let trace: f64 = (0..m * m).map(|k| gi[k] * hess[node * m * m + k]).sum();
            let du_phi: f64 = (0..m).map(|k| grad[node * m + k] * tensors.du_up(node)[k]).sum();
            trace - du_phi * tensors.mean_curvature[node] / tensors.w[node]
        })
        .collect()
}

/// `𝓛_W φ = Δ_g φ − 2 g(∇W/W, ∇φ)`.
pub fn lw_operator(field: &GraphField, tensors: &GraphTensors, phi: &[f64]) -> Vec<f64> {
    let m = field.dim();
    let lap = graph_laplacian(field, tensors, phi);
    let grad = field.grid.gradient(phi);
    lap.into_iter()
        .enumerate()
        .map(|(node, l)| {
            let dw = tensors.dw(node);
            l - 2.0 * tensors.inner(node, &dw, &grad[node * m..(node + 1) * m]) / tensors.w[node]
        })
        .collect()
}

/// `Ric̄(n, n) = Ric(Du, Du) / W²` on the model base.
pub fn ricci_normal(field: &GraphField, tensors: &GraphTensors) -> Vec<f64> {
    let rho = field.domain.base.ricci_factor();
    tensors.w.iter().map(|w| rho * (w * w - 1.0) / (w * w)).collect()
}

/// Nodes strictly inside the lattice.
pub fn interior_nodes(grid: &Grid) -> impl Iterator<Item = usize> + '_ {
    (0..grid.len()).filter(move |&n| !grid.on_face(n))
}

/// Checks the lower bound for `𝓛_W z`, `z = W e^{−Cu}`, on a certified CMC field:
///
/// `𝓛_W z ≥ (H²/m − CH/W + (C² − (m−1)κ²)(W²−1)/W²) z`.
///
/// The report also carries the residual of the exact expansion
/// `𝓛_W z = (‖II‖² − CH/W + Ric̄(n,n) + C²‖∇u‖²) z` as an unjudged entry.
pub fn z_inequality_check(field: &GraphField, c: f64, kappa: f64, tol: f64) -> Result<VerificationReport> {
    let h = field.certified_mean_curvature()?;
    if !(c >= 0.0) || !(kappa >= 0.0) {
        return Err(Error::Argument(format!("need C >= 0 and κ >= 0, got C={c}, κ={kappa}")));
    }
    let kb = field.domain.base.ricci_lower_bound();
    if kappa < kb {
        return Err(Error::Precondition(format!(
            "Ric >= -(m-1)κ² needs κ >= {kb}, got {kappa}"
        )));
    }
    let m = field.dim() as f64;
    let t = compute_tensors(field);
    let z: Vec<f64> = field.u.iter().zip(&t.w).map(|(u, w)| w * (-c * u).exp()).collect();
    let lz = lw_operator(field, &t, &z);
    let ric = ricci_normal(field, &t);
    let a = c * c - (m - 1.0) * kappa * kappa;
    let mut slack = f64::INFINITY;
    let mut expansion = 0.0f64;
    let mut count = 0usize;
    for node in interior_nodes(&field.grid) {
        let w = t.w[node];
        let n2 = (w * w - 1.0) / (w * w);
        let lower = (h * h / m - c * h / w + a * n2) * z[node];
        slack = slack.min(lz[node] - lower);
        let exact = (t.second_form_norm2(node) - c * h / w + ric[node] + c * c * t.grad_u_norm2(node)) * z[node];
        expansion = expansion.max((lz[node] - exact).abs());
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyEvaluation("grid has no interior nodes".into()));
    }
    let mut r = VerificationReport::new("z_inequality", Some(&field.grid));
    r.at_least("min_slack", slack, tol).info("expansion_residual", expansion).info("C", c).info("kappa", kappa);
    Ok(r)
}

/// Writes one CSV row per node: coordinates, `u`, `W`, `H`, and the residual
/// `H − H_certified` (empty without a certificate).
pub fn write_csv<W: Write>(field: &GraphField, tensors: &GraphTensors, out: W) -> Result<()> {
    let m = field.dim();
    let io = |e: csv::Error| Error::Data(format!("csv output failed: {e}"));
    let mut wr = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..m).map(|a| format!("x{a}")).collect();
    header.extend(["u", "W", "H", "residual"].map(String::from));
    wr.write_record(&header).map_err(io)?;
    let cert = field.certificate.map(|c| c.mean_curvature);
    for node in 0..field.grid.len() {
        let mut row: Vec<String> = field.grid.point(node).iter().map(|x| format!("{x:e}")).collect();
        row.push(format!("{:e}", field.u[node]));
        row.push(format!("{:e}", tensors.w[node]));
        row.push(format!("{:e}", tensors.mean_curvature[node]));
        row.push(cert.map(|h| format!("{:e}", tensors.mean_curvature[node] - h)).unwrap_or_default());
        wr.write_record(&row).map_err(io)?;
    }
    wr.flush().map_err(|e| Error::Data(format!("csv output failed: {e}")))?;
    Ok(())
}
