//! Executes one scenario and collects its JSON result and CSV table.

use serde::Deserialize;
use serde_json::{json, Map, Value};

use capgraph::fields;
use capgraph::geometry::{BaseMetric, GrowthMode, ModelDomain, ParabolicityVerdict, Shape};
use capgraph::graph::{compute_tensors, write_csv, GraphField};
use capgraph::identities::{
    boundary_identity_check, jacobi_check, kato_remainder_check, picone_check, poincare_check, poincare_terms,
    IdentityCase, Killing,
};
use capgraph::params::{admissible_menu, certify, check_gate, classify, perturb, GateParams};
use capgraph::profiles::{cross_validate, profile_from_ode, profile_residual, CapillaryProfile, TiltedProfile, TiltedRegion};
use capgraph::report::VerificationReport;
use capgraph::solver::{solve, BvpSpec, OperatorForm, SolveOptions, SolveReport};

use crate::scenario::{Command, ConfigError, Scenario};

#[derive(Debug)]
pub struct Outcome {
    pub pass: bool,
    pub result: Map<String, Value>,
    pub csv: Option<String>,
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    /// A numerical routine failed; the run counts as a verification failure.
    Failed(capgraph::Error),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<capgraph::Error> for RunError {
    fn from(e: capgraph::Error) -> Self {
        match e {
            // out-of-range inputs are configuration mistakes
            capgraph::Error::Argument(_) | capgraph::Error::Domain(_) => RunError::Config(ConfigError(format!("[inputs]: {e}"))),
            e => RunError::Failed(e),
        }
    }
}

type Run<T> = Result<T, RunError>;

fn config<T>(msg: String) -> Run<T> {
    Err(RunError::Config(ConfigError(msg)))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        other => Map::from_iter([("value".to_string(), other)]),
    }
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(header).expect("in-memory csv");
    for r in rows {
        wr.write_record(&r).expect("in-memory csv");
    }
    String::from_utf8(wr.into_inner().expect("in-memory csv")).expect("csv is UTF-8")
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn execute(s: &Scenario) -> Run<Outcome> {
    match s.command {
        Command::Params => params(s),
        Command::Exact => exact(s),
        Command::Solve => solve_cmd(s),
        Command::Verify if s.action == "gradient-bound" => gradient_bound(s),
        Command::Verify => verify(s),
        Command::Parabolic => parabolic(s),
    }
}

// ---------------------------------------------------------------- params

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsIn {
    m: usize,
    kappa: f64,
    #[serde(rename = "H", alias = "h")]
    h: f64,
    #[serde(rename = "C", alias = "c", default)]
    c: Option<f64>,
    #[serde(rename = "A", alias = "a", default)]
    a: Option<f64>,
    #[serde(default)]
    eps: Option<f64>,
}

fn menu_json(m: usize, kappa: f64, h: f64) -> Run<(Value, bool)> {
    let mut all_ok = true;
    let mut rows = Vec::new();
    for e in admissible_menu(m, kappa, h) {
        let cert = certify(&GateParams::new(m, kappa, h, e.c, e.a)?);
        all_ok &= cert.gate_ok;
        rows.push(json!({"rule": e.rule, "A": e.a, "C": e.c, "gate_ok": cert.gate_ok, "slack": cert.slack}));
    }
    Ok((Value::Array(rows), all_ok))
}

fn params(s: &Scenario) -> Run<Outcome> {
    let p: ParamsIn = s.typed_inputs()?;
    s.tolerance(&[], "", 0.0)?;
    let (menu, menu_ok) = menu_json(p.m, p.kappa, p.h)?;
    let need = |v: Option<f64>, name: &str| match v {
        Some(v) => Ok(v),
        None => config(format!("field `inputs.{name}`: required by `params {}`", s.action)),
    };
    let mut result = Map::new();
    let pass = match s.action.as_str() {
        "menu" => menu_ok,
        "check" => {
            let gp = GateParams::new(p.m, p.kappa, p.h, need(p.c, "C")?, need(p.a, "A")?)?;
            let cert = certify(&gp);
            let branch = classify(&gp).ok();
            result.insert("case_label".into(), to_value(&cert.case_label));
            result.insert("verdict".into(), json!(cert.gate_ok));
            result.insert("hp_ok".into(), json!(cert.hp_ok));
            result.insert("slack".into(), json!(cert.slack));
            // the branch analysis and the exact infimum are reported side by side
            result.insert("branch_verdict".into(), to_value(&branch.map(|b| b.verdict)));
            result.insert("infimum_verdict".into(), json!(check_gate(&gp).holds));
            result.insert("classification".into(), to_value(&branch));
            cert.gate_ok
        }
        _ => {
            let gp = GateParams::new(p.m, p.kappa, p.h, need(p.c, "C")?, need(p.a, "A")?)?;
            let eps = p.eps.unwrap_or(0.1);
            let r = perturb(&gp, eps)?;
            result.insert("eps".into(), json!(eps));
            result.insert("perturbation".into(), to_value(&r));
            r.infimum > 0.0
        }
    };
    result.insert("menu".into(), menu);
    Ok(Outcome { pass, result, csv: None })
}

// ---------------------------------------------------------------- exact

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExactIn {
    #[serde(rename = "H", alias = "h")]
    h: f64,
    #[serde(default)]
    b1: f64,
    c1: f64,
    #[serde(default = "default_t_cap")]
    t_cap: f64,
    #[serde(default)]
    n: Option<usize>,
    #[serde(rename = "C", alias = "c", default)]
    c: f64,
}

fn default_t_cap() -> f64 {
    5.0
}

fn exact(s: &Scenario) -> Run<Outcome> {
    let e: ExactIn = s.typed_inputs()?;
    let p = CapillaryProfile::new(e.h, e.b1, e.c1)?;
    let mut result = Map::new();
    result.insert("t_max".into(), json!(p.t_max()));
    result.insert("gamma".into(), json!(p.gamma()));
    match s.action.as_str() {
        "eval" => {
            s.tolerance(&[], "", 0.0)?;
            let n = e.n.unwrap_or(101);
            if n < 2 {
                return config(format!("field `inputs.n`: need at least 2 samples, got {n}"));
            }
            let end = p.sample_end(e.t_cap)?;
            let mut rows = Vec::with_capacity(n);
            for i in 0..n {
                let t = end * i as f64 / (n - 1) as f64;
                let q = p.eval(t)?;
                rows.push(vec![num(t), num(q.u), num(q.du), num(q.w), num(q.w * (-e.c * q.u).exp())]);
            }
            result.insert("samples".into(), json!(n));
            result.insert("t_end".into(), json!(end));
            Ok(Outcome { pass: true, result, csv: Some(csv_table(&["t", "u", "du", "W", "z"], rows)) })
        }
        "residual" => {
            let tol = s.tolerance(&["residual"], "residual", 1e-8)?;
            let n = e.n.unwrap_or(1000);
            let r = profile_residual(&p, n, e.t_cap)?;
            result.insert("samples".into(), json!(n));
            result.insert("residual".into(), json!(r));
            result.insert("tolerance".into(), json!(tol));
            Ok(Outcome { pass: r <= tol, result, csv: None })
        }
        _ => {
            let tol = s.tolerance(&["cross"], "cross", 1e-7)?;
            let ode = profile_from_ode(&p, e.t_cap)?;
            let diff = cross_validate(&p, &ode);
            result.insert("max_abs_diff".into(), json!(diff));
            result.insert("tolerance".into(), json!(tol));
            result.insert("t_max_estimate".into(), to_value(&ode.t_max_estimate));
            result.insert("singular_start".into(), json!(ode.singular_start));
            result.insert("nodes".into(), json!(ode.t.len()));
            let rows = ode.t.iter().zip(&ode.u).zip(&ode.beta).map(|((t, u), b)| {
                let exact = p.eval(*t).map(|q| num(q.u)).unwrap_or_default();
                vec![num(*t), num(*u), num(*b), exact]
            });
            let csv = csv_table(&["t", "u_ode", "beta", "u_exact"], rows);
            Ok(Outcome { pass: diff <= tol, result, csv: Some(csv) })
        }
    }
}

// ---------------------------------------------------------------- solve

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveIn {
    #[serde(default)]
    base: Option<String>,
    #[serde(default = "default_m")]
    m: usize,
    #[serde(default = "default_kappa")]
    kappa: f64,
    #[serde(default)]
    width: Option<f64>,
    #[serde(default)]
    radius: Option<f64>,
    #[serde(rename = "H", alias = "h")]
    h: f64,
    dirichlet: Vec<f64>,
    #[serde(default = "default_grid")]
    n: usize,
    #[serde(default = "default_newton_tol")]
    tol: f64,
    #[serde(default = "default_iters")]
    max_iters: usize,
    #[serde(default)]
    form: Option<String>,
    #[serde(rename = "C", alias = "c", default)]
    c: Option<f64>,
    #[serde(rename = "A", alias = "a", default)]
    a: Option<f64>,
}

fn default_m() -> usize {
    2
}

fn default_kappa() -> f64 {
    1.0
}

fn default_grid() -> usize {
    501
}

fn default_newton_tol() -> f64 {
    1e-10
}

fn default_iters() -> usize {
    100
}

fn base_metric(name: &str, m: usize, kappa: f64) -> Run<BaseMetric> {
    Ok(match name {
        "euclidean" => BaseMetric::euclidean(m)?,
        "hyperbolic" => BaseMetric::hyperbolic(m, kappa)?,
        "product_line" => BaseMetric::product_line(m)?,
        other => return config(format!("field `inputs.base`: unknown base `{other}` (euclidean, hyperbolic, product_line)")),
    })
}

fn solve_spec(s: &Scenario) -> Run<(SolveIn, BvpSpec, SolveOptions)> {
    let i: SolveIn = s.typed_inputs()?;
    let slab = s.action == "slab" || s.command == Command::Verify && i.width.is_some();
    let default_base = if slab { "product_line" } else { "euclidean" };
    let base = base_metric(i.base.as_deref().unwrap_or(default_base), i.m, i.kappa)?;
    let shape = match (slab, i.width, i.radius) {
        (true, Some(width), None) => Shape::Slab { width },
        (false, None, Some(radius)) => Shape::Ball { radius },
        (true, _, _) => return config("field `inputs.width`: a slab needs `width` and no `radius`".into()),
        (false, _, _) => return config("field `inputs.radius`: a radial problem needs `radius` and no `width`".into()),
    };
    let form = match i.form.as_deref().unwrap_or("divergence") {
        "divergence" => OperatorForm::Divergence,
        "non_divergence" => OperatorForm::NonDivergence,
        other => return config(format!("field `inputs.form`: unknown form `{other}` (divergence, non_divergence)")),
    };
    let spec = BvpSpec::new(ModelDomain::new(base, shape)?, i.h, i.dirichlet.clone(), i.n)?;
    let opts = SolveOptions { tol: i.tol, max_iters: i.max_iters, form };
    Ok((i, spec, opts))
}

fn solve_csv(rep: &SolveReport) -> String {
    let du = rep.slopes();
    let rows = (0..rep.u.len()).map(|k| {
        vec![num(rep.r[k]), num(rep.u[k]), num(du[k]), num((1.0 + du[k] * du[k]).sqrt())]
    });
    csv_table(&["r", "u", "du", "W"], rows)
}

fn solve_cmd(s: &Scenario) -> Run<Outcome> {
    s.tolerance(&[], "", 0.0)?;
    let (i, spec, opts) = solve_spec(s)?;
    let rep = solve(&spec, &opts)?;
    let kappa = spec.domain.base.ricci_lower_bound();
    let choice = match (i.c, i.a) {
        (Some(c), Some(a)) => Some((c, a)),
        (None, None) => admissible_menu(rep.dim, kappa, rep.mean_curvature).first().map(|e| (e.c, e.a)),
        _ => return config("field `inputs.C`: give both `C` and `A` or neither".into()),
    };
    let mut result = Map::new();
    let mut pass = true;
    let rep = match choice.map(|(c, a)| rep.clone().with_gradient_bound(kappa, c, a)) {
        Some(Ok(r)) => {
            pass &= r.gradient_bound.is_some_and(|g| g.verdict);
            r
        }
        Some(Err(e)) => {
            result.insert("gradient_bound_skipped".into(), json!(e.to_string()));
            rep
        }
        None => rep,
    };
    result.insert("kappa".into(), json!(kappa));
    let csv = solve_csv(&rep);
    result.insert("report".into(), to_value(&rep));
    Ok(Outcome { pass, result, csv: Some(csv) })
}

fn gradient_bound(s: &Scenario) -> Run<Outcome> {
    s.tolerance(&[], "", 0.0)?;
    let (i, spec, opts) = solve_spec(s)?;
    let rep = solve(&spec, &opts)?;
    let kappa = spec.domain.base.ricci_lower_bound();
    let pairs: Vec<(Value, f64, f64)> = match (i.c, i.a) {
        (Some(c), Some(a)) => vec![(json!("given"), c, a)],
        (None, None) => admissible_menu(rep.dim, kappa, rep.mean_curvature)
            .into_iter()
            .map(|e| (to_value(&e.rule), e.c, e.a))
            .collect(),
        _ => return config("field `inputs.C`: give both `C` and `A` or neither".into()),
    };
    let mut checks = Vec::new();
    let mut pass = !pairs.is_empty();
    for (rule, c, a) in pairs {
        let g = rep.verify_gradient_bound(kappa, c, a)?;
        pass &= g.verdict;
        checks.push(json!({"rule": rule, "bound": g}));
    }
    let mut result = Map::new();
    result.insert("kappa".into(), json!(kappa));
    result.insert("newton_iters".into(), json!(rep.newton_iters));
    result.insert("final_residual".into(), json!(rep.final_residual));
    result.insert("checks".into(), Value::Array(checks));
    Ok(Outcome { pass, result, csv: Some(solve_csv(&rep)) })
}

// ---------------------------------------------------------------- verify

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldIn {
    field: String,
    #[serde(default = "default_field_n")]
    n: usize,
    #[serde(rename = "H", alias = "h", default = "default_h")]
    h: f64,
    #[serde(default)]
    b1: f64,
    #[serde(default = "default_c1")]
    c1: f64,
    #[serde(default = "default_width")]
    width: f64,
    #[serde(default = "default_half")]
    half_len: f64,
    #[serde(default = "default_half")]
    half_width: f64,
    #[serde(default = "default_a0")]
    a0: f64,
    #[serde(default = "default_a1")]
    a1: f64,
    #[serde(default)]
    slope: Option<Vec<f64>>,
    #[serde(default)]
    offset: f64,
    #[serde(default = "default_kappa")]
    kappa: f64,
    #[serde(default = "default_half")]
    amplitude: f64,
    #[serde(default)]
    killing_axis: Option<usize>,
    #[serde(default)]
    killing_vector: Option<Vec<f64>>,
    /// Bump bounds per axis; an empty entry leaves that axis unrestricted.
    #[serde(default)]
    phi: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_eps")]
    eps: f64,
    #[serde(rename = "C", alias = "c", default)]
    c: f64,
    #[serde(default = "default_threshold")]
    threshold: f64,
    #[serde(default)]
    equality: Option<bool>,
}

fn default_field_n() -> usize {
    33
}

fn default_h() -> f64 {
    1.0
}

fn default_c1() -> f64 {
    -0.5
}

fn default_width() -> f64 {
    0.3
}

fn default_half() -> f64 {
    0.5
}

fn default_a0() -> f64 {
    0.7
}

fn default_a1() -> f64 {
    0.3
}

fn default_eps() -> f64 {
    0.1
}

fn default_threshold() -> f64 {
    1e-8
}

struct Built {
    field: GraphField,
    killing: Killing,
    phi_default: Vec<Option<(f64, f64)>>,
    split: bool,
}

const STRIP_PHI: [Option<(f64, f64)>; 2] = [None, Some((-0.25, 0.25))];

fn build_field(i: &FieldIn) -> Run<Built> {
    let n = i.n;
    let central = |lo: f64, hi: f64| {
        let pad = 0.2 * (hi - lo);
        Some((lo + pad, hi - pad))
    };
    let square = [central(-i.half_width, i.half_width); 2];
    let built = match i.field.as_str() {
        "affine" => {
            let a = i.slope.clone().unwrap_or_else(|| vec![0.3, -0.2]);
            let dims = a.len();
            Built {
                field: fields::affine(&a, i.offset, i.half_width, n)?,
                killing: Killing::Coordinate(0),
                phi_default: vec![central(-i.half_width, i.half_width); dims],
                split: false,
            }
        }
        "quadratic" => Built {
            field: fields::quadratic(n)?,
            killing: Killing::Coordinate(0),
            phi_default: vec![central(-0.5, 0.5); 2],
            split: false,
        },
        "hemisphere" => Built {
            field: fields::hemisphere(i.h, i.half_width, n)?,
            killing: Killing::Coordinate(0),
            phi_default: vec![Some((0.1 * i.half_width, 0.5 * i.half_width)), square[1]],
            split: false,
        },
        "strip" => {
            let p = CapillaryProfile::new(i.h, i.b1, i.c1)?;
            Built {
                field: fields::strip_profile(&p, i.width, i.half_len, [n, n])?,
                killing: Killing::Coordinate(0),
                phi_default: STRIP_PHI.to_vec(),
                split: true,
            }
        }
        "tilted" => {
            let tp = TiltedProfile::new(i.h, i.b1, i.c1, i.a0, i.a1, TiltedRegion::Slab { width: i.width })?;
            let (field, killing) = fields::tilted_strip(&tp, i.width, i.half_len, [n, n])?;
            Built { field, killing, phi_default: STRIP_PHI.to_vec(), split: true }
        }
        "solved_slab" => {
            let p = CapillaryProfile::new(i.h, i.b1, i.c1)?;
            let b = p.eval(i.width)?.u;
            let d = ModelDomain::new(BaseMetric::product_line(2)?, Shape::Slab { width: i.width })?;
            let rep = solve(&BvpSpec::new(d, i.h, vec![i.b1, b], n)?, &SolveOptions::default())?;
            Built {
                field: fields::slab_solution(&rep, i.half_len, n)?,
                killing: Killing::Coordinate(0),
                phi_default: STRIP_PHI.to_vec(),
                split: true,
            }
        }
        "hyperbolic_radial" => Built {
            field: fields::hyperbolic_radial(i.kappa, i.amplitude, n)?,
            killing: Killing::Coordinate(1),
            phi_default: vec![Some((0.7, 1.3)), Some((0.4, 1.0))],
            split: false,
        },
        other => {
            return config(format!(
                "field `inputs.field`: unknown field `{other}` (affine, quadratic, hemisphere, strip, tilted, solved_slab, hyperbolic_radial)"
            ))
        }
    };
    Ok(built)
}

fn phi_bounds(i: &FieldIn, b: &Built) -> Run<Vec<Option<(f64, f64)>>> {
    let Some(spec) = &i.phi else { return Ok(b.phi_default.clone()) };
    if spec.len() != b.field.dim() {
        return config(format!("field `inputs.phi`: need {} axis entries, got {}", b.field.dim(), spec.len()));
    }
    spec.iter()
        .map(|a| match a.as_slice() {
            [] => Ok(None),
            [lo, hi] if lo < hi => Ok(Some((*lo, *hi))),
            _ => config(format!("field `inputs.phi`: each entry is [] or [lo, hi] with lo < hi, got {a:?}")),
        })
        .collect()
}

fn verify(s: &Scenario) -> Run<Outcome> {
    let i: FieldIn = s.typed_inputs()?;
    let b = build_field(&i)?;
    let killing = match (&i.killing_axis, &i.killing_vector) {
        (Some(k), None) => Killing::Coordinate(*k),
        (None, Some(v)) => Killing::Constant(v.clone()),
        (None, None) => b.killing.clone(),
        _ => return config("field `inputs.killing_axis`: give `killing_axis` or `killing_vector`, not both".into()),
    };
    let h2 = b.field.grid().h_max().powi(2);
    let abs = s.tolerance(&["abs", "h2"], "abs", 0.0)?;
    let tol = if s.tolerance_given("abs") { abs } else { s.tolerance(&["abs", "h2"], "h2", 10.0)? * h2 };
    let phi = fields::tensor_bump(b.field.grid(), &phi_bounds(&i, &b)?);
    let mut result = Map::new();
    let report: VerificationReport = match s.action.as_str() {
        "kato" => kato_remainder_check(&b.field, i.threshold, tol)?,
        "boundary" => boundary_identity_check(&b.field, &killing, tol)?,
        "picone" => picone_check(&b.field, &killing, &phi, i.eps, tol)?,
        "jacobi" => jacobi_check(&b.field, &killing, i.c, tol)?,
        _ => {
            let case = IdentityCase::new(b.field.clone(), killing.clone(), phi)?;
            let mut r = poincare_check(&case, tol)?;
            // split profiles are the equality case
            if i.equality.unwrap_or(b.split) {
                r.at_most("abs_slack", poincare_terms(&case)?.slack.abs(), tol);
            }
            r
        }
    };
    result.insert("killing".into(), to_value(&killing));
    result.insert("tolerance".into(), json!(tol));
    let pass = report.passed;
    result.insert("report".into(), to_value(&report));
    let mut buf = Vec::new();
    write_csv(&b.field, &compute_tensors(&b.field), &mut buf)?;
    Ok(Outcome { pass, result, csv: Some(String::from_utf8(buf).expect("csv is UTF-8")) })
}

// ---------------------------------------------------------------- parabolic

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParabolicIn {
    #[serde(default = "default_base")]
    base: String,
    #[serde(default = "default_m")]
    m: usize,
    #[serde(default = "default_kappa")]
    kappa: f64,
    #[serde(default = "default_shape")]
    shape: String,
    #[serde(default)]
    width: Option<f64>,
    #[serde(default)]
    radius: Option<f64>,
    #[serde(default = "default_mode")]
    mode: String,
    #[serde(default = "default_s0")]
    s0: f64,
    #[serde(default = "default_s_max")]
    s_max: f64,
    #[serde(default)]
    expect: Option<String>,
}

fn default_base() -> String {
    "euclidean".into()
}

fn default_shape() -> String {
    "whole".into()
}

fn default_mode() -> String {
    "volume".into()
}

fn default_s0() -> f64 {
    1.0
}

fn default_s_max() -> f64 {
    1e4
}

fn parabolic(s: &Scenario) -> Run<Outcome> {
    s.tolerance(&[], "", 0.0)?;
    let i: ParabolicIn = s.typed_inputs()?;
    let base = base_metric(&i.base, i.m, i.kappa)?;
    let need = |v: Option<f64>, name: &str| match v {
        Some(v) => Ok(v),
        None => config(format!("field `inputs.{name}`: required by shape `{}`", i.shape)),
    };
    let shape = match i.shape.as_str() {
        "whole" => Shape::Whole,
        "half_space" => Shape::HalfSpace,
        "slab" => Shape::Slab { width: need(i.width, "width")? },
        "strip" => Shape::Strip { width: need(i.width, "width")? },
        "ball" => Shape::Ball { radius: need(i.radius, "radius")? },
        other => return config(format!("field `inputs.shape`: unknown shape `{other}` (whole, half_space, slab, strip, ball)")),
    };
    let mode = match i.mode.as_str() {
        "volume" => GrowthMode::Volume,
        "surface" => GrowthMode::Surface,
        other => return config(format!("field `inputs.mode`: unknown mode `{other}` (volume, surface)")),
    };
    let expect = match i.expect.as_deref() {
        None => None,
        Some("criterion_satisfied") => Some(ParabolicityVerdict::CriterionSatisfied),
        Some("criterion_not_satisfied") => Some(ParabolicityVerdict::CriterionNotSatisfied),
        Some(other) => {
            return config(format!(
                "field `inputs.expect`: unknown verdict `{other}` (criterion_satisfied, criterion_not_satisfied)"
            ))
        }
    };
    let domain = ModelDomain::new(base, shape)?;
    let r = domain.parabolicity(mode, i.s0, i.s_max)?;
    let rows = (0..=64).map(|k| {
        let s = i.s0 * (i.s_max / i.s0).powf(k as f64 / 64.0);
        vec![num(s), domain.growth(mode, s).map(num).unwrap_or_default()]
    });
    let csv = csv_table(&["s", "growth"], rows);
    let pass = expect.is_none_or(|e| e == r.verdict);
    let mut result = object(to_value(&r));
    result.insert("expected".into(), to_value(&expect));
    Ok(Outcome { pass, result, csv: Some(csv) })
}
