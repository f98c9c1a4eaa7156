//! Lyapunov energies along the flow.

use crate::dynamics::{FlowState, Params};
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::Problem;
use crate::tikhonov::TikhonovPoint;

/// Coefficients of the energy and of the Grönwall inequality
/// `E' + (K / t^r) E <= (a b / 2) t^(q-p) |x*|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConfig {
    pub b: f64,
    pub k: f64,
    r: f64,
}

/// Safety factor applied to the cap on `K`.
pub const K_SAFETY: f64 = 0.9;

impl EnergyConfig {
    pub fn new(b: f64, k: f64, params: &Params) -> Result<Self> {
        if !(b > 0.0 && b < params.alpha) {
            return Err(Error::InvalidParams(format!(
                "b must lie in (0, alpha) = (0, {}) (got {b})",
                params.alpha
            )));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParams(format!("K must be > 0 (got {k})")));
        }
        Ok(Self {
            b,
            k,
            r: Self::weight_exponent(params),
        })
    }

    /// `b = alpha/2` (midpoint of `(2, alpha-1)` when `q = 1`) and
    /// `K = 0.9 * cap`.
    pub fn default_for(params: &Params) -> Result<Self> {
        let b = if is_q_one(params) {
            (params.alpha + 1.0) / 2.0
        } else {
            params.alpha / 2.0
        };
        let cap = Self::k_cap(params, b)?;
        Self::new(b, K_SAFETY * cap, params)
    }

    /// Upper bound on `K` for the given `b`:
    ///
    /// * `q < 1`, `p < 2`: `min(b, alpha - b, a / (alpha + b))`
    /// * `q < 1`, `p = 2`: `min(b, alpha - b, (a - q(1-q)) / (alpha + b))`
    /// * `q = 1`: `min(b - 2, alpha - 1 - b, a / (alpha + b - 1))`, needs `2 < b < alpha - 1`
    pub fn k_cap(params: &Params, b: f64) -> Result<f64> {
        let Params { alpha, q, a, p, .. } = *params;
        let cap = if is_q_one(params) {
            if !(b > 2.0 && b < alpha - 1.0) {
                return Err(Error::InvalidParams(format!(
                    "q = 1 needs 2 < b < alpha - 1 (b = {b}, alpha = {alpha})"
                )));
            }
            (b - 2.0).min(alpha - 1.0 - b).min(a / (alpha + b - 1.0))
        } else {
            let reg = if (p - 2.0).abs() <= super::regime::BOUNDARY_EPS {
                a - q * (1.0 - q)
            } else {
                a
            };
            b.min(alpha - b).min(reg / (alpha + b))
        };
        if cap > 0.0 {
            Ok(cap)
        } else {
            Err(Error::InvalidParams(format!(
                "no admissible K for alpha = {alpha}, q = {q}, a = {a}, p = {p}, b = {b}"
            )))
        }
    }

    /// `max(q, p - q)`
    pub fn weight_exponent(params: &Params) -> f64 {
        params.q.max(params.p - params.q)
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

fn is_q_one(params: &Params) -> bool {
    (params.q - 1.0).abs() <= super::regime::BOUNDARY_EPS
}

/// `E(t)` with the mixing coefficient from `cfg`.
pub fn energy_e(state: &FlowState, params: &Params, problem: &Problem, cfg: &EnergyConfig) -> f64 {
    energy_e_with_b(state, params, problem, cfg.b)
}

/// ```text
/// E = t^2q (g(x) - g*) + (a/2) t^(2q-p) |x|^2 + |b (x - x*) + t^q v|^2 / 2
///     + b (alpha - b - q t^(q-1)) |x - x*|^2 / 2
/// ```
///
/// Takes `b` directly so degenerate values (e.g. `b = 0`) can be evaluated.
pub fn energy_e_with_b(state: &FlowState, params: &Params, problem: &Problem, b: f64) -> f64 {
    let t = state.t;
    let tq = t.powf(params.q);
    let gap = problem.value_gap(&state.x);
    mixed_energy(
        t,
        &state.x,
        &state.v,
        problem.x_star(),
        params,
        b,
        tq * tq * gap + 0.5 * params.a * t.powf(2.0 * params.q - params.p) * linalg::norm_sq(&state.x),
    )
}

/// Energy centred on the Tikhonov point `x_t`:
///
/// ```text
/// t^2q (g_t(x) - g_t(x_t)) + |b (x - x_t) + t^q v|^2 / 2 + b (alpha - b - q t^(q-1)) |x - x_t|^2 / 2
/// ```
///
/// with `g_t = g + (a / 2t^p) |.|^2`.
pub fn energy_e_strong(
    state: &FlowState,
    params: &Params,
    problem: &Problem,
    cfg: &EnergyConfig,
    tik: &TikhonovPoint,
) -> f64 {
    debug_assert!(
        (tik.t - state.t).abs() <= 1e-12 * state.t.abs().max(1.0),
        "Tikhonov point at t = {} used for state at t = {}",
        tik.t,
        state.t
    );
    let t = state.t;
    let tq = t.powf(params.q);
    let lambda = params.tikhonov_weight(t);
    let g_t = |x: &[f64]| problem.value(x) + 0.5 * lambda * linalg::norm_sq(x);
    let gap = g_t(&state.x) - g_t(&tik.x_t);
    mixed_energy(t, &state.x, &state.v, &tik.x_t, params, cfg.b, tq * tq * gap)
}

fn mixed_energy(
    t: f64,
    x: &[f64],
    v: &[f64],
    center: &[f64],
    params: &Params,
    b: f64,
    potential: f64,
) -> f64 {
    let tq = t.powf(params.q);
    let mut mixed = 0.0;
    let mut dist_sq = 0.0;
    for i in 0..x.len() {
        let d = x[i] - center[i];
        let m = b * d + tq * v[i];
        mixed += m * m;
        dist_sq += d * d;
    }
    let coef = b * (params.alpha - b - params.q * t.powf(params.q - 1.0));
    potential + 0.5 * mixed + 0.5 * coef * dist_sq
}

/// `W = |v|^2 / 2 + g(x) + (a / 2t^p) |x|^2`, non-increasing along the flow.
pub fn energy_w(state: &FlowState, params: &Params, problem: &Problem) -> f64 {
    0.5 * linalg::norm_sq(&state.v)
        + problem.value(&state.x)
        + 0.5 * params.tikhonov_weight(state.t) * linalg::norm_sq(&state.x)
}
