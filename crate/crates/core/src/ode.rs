//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, initial_step: 1e-6, min_step: 1e-300, max_steps: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeSolution<const N: usize> {
    pub x: Vec<f64>,
    pub y: Vec<[f64; N]>,
    /// True if integration ended because `stop` returned true.
    pub stopped: bool,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `y' = f(x, y)` from `x0` toward `x_end`.
///
/// Steps whose stages or result fail `valid` are rejected and retried with a
/// smaller step. After each accepted step `stop(x, y)` may end the integration.
pub fn dopri5<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    opts: &OdeOptions,
    valid: impl Fn(&[f64; N]) -> bool,
    mut stop: impl FnMut(f64, &[f64; N]) -> bool,
) -> Result<OdeSolution<N>> {
    if !(x_end > x0) {
        return Err(Error::Argument(format!("integration interval [{x0}, {x_end}] is empty")));
    }
    let mut sol = OdeSolution { x: vec![x0], y: vec![y0], stopped: false };
    let (mut x, mut y) = (x0, y0);
    let mut h = opts.initial_step.min(x_end - x0);
    let mut k1 = f(x, &y);
    let mut steps = 0;
    let mut err_history = Vec::new();
    while x < x_end {
        steps += 1;
        if steps > opts.max_steps || h < opts.min_step {
            return Err(Error::Convergence {
                iterations: steps,
                reason: format!("step control failed at x = {x} (h = {h:e})"),
                history: err_history,
            });
        }
        let h_try = h.min(x_end - x);
        let y2 = axpy(&y, &[(A21, &k1)], h_try);
        let k2 = f(x + C2 * h_try, &y2);
        let y3 = axpy(&y, &[(A31, &k1), (A32, &k2)], h_try);
        let k3 = f(x + C3 * h_try, &y3);
        let y4 = axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h_try);
        let k4 = f(x + C4 * h_try, &y4);
        let y5 = axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h_try);
        let k5 = f(x + C5 * h_try, &y5);
        let y6 = axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h_try);
        let k6 = f(x + h_try, &y6);
        let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h_try);

        let stages_ok = [&y2, &y3, &y4, &y5, &y6, &y_new].iter().all(|s| valid(s) && s.iter().all(|v| v.is_finite()));
        if !stages_ok {
            h = 0.25 * h_try;
            continue;
        }
        let k7 = f(x + h_try, &y_new);
        let mut err = 0.0f64;
        for i in 0..N {
            let e = h_try * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            h = 0.25 * h_try;
            continue;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            x += h_try;
            y = y_new;
            k1 = k7;
            sol.x.push(x);
            sol.y.push(y);
            if err_history.len() < 64 {
                err_history.push(err);
            }
            if stop(x, &y) {
                sol.stopped = true;
                break;
            }
        }
        h = h_try * factor;
    }
    Ok(sol)
}
