//! First-order form of the regularized inertial flow,
//!
//! ```text
//! x' = v
//! v' = -(alpha / t^q) v - grad g(x) - (a / t^p) x
//! ```
//!
//! and structural validation of its coefficients.

use crate::diagnostics::regime::{classify_regime, Regime, RegimeReport};
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::Problem;

/// Flow coefficients and initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Damping magnitude.
    pub alpha: f64,
    /// Damping decay exponent, in `(0, 1]`.
    pub q: f64,
    /// Tikhonov magnitude. `a = 0` gives the unregularized baseline.
    pub a: f64,
    /// Tikhonov decay exponent.
    pub p: f64,
    pub t0: f64,
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
}

impl Params {
    /// Coefficients with the initial data `x(1) = (1, ..., 1)`, `x'(1) = (-1, ..., -1)`.
    pub fn new(alpha: f64, q: f64, a: f64, p: f64, dim: usize) -> Self {
        Self {
            alpha,
            q,
            a,
            p,
            t0: 1.0,
            u0: vec![1.0; dim],
            v0: vec![-1.0; dim],
        }
    }

    pub fn with_initial(mut self, t0: f64, u0: Vec<f64>, v0: Vec<f64>) -> Self {
        self.t0 = t0;
        self.u0 = u0;
        self.v0 = v0;
        self
    }

    /// `alpha / t^q`
    #[inline]
    pub fn damping(&self, t: f64) -> f64 {
        self.alpha / t.powf(self.q)
    }

    /// `a / t^p`
    #[inline]
    pub fn tikhonov_weight(&self, t: f64) -> f64 {
        self.a / t.powf(self.p)
    }

    /// Rejects structurally invalid coefficients. Does not look at theorem
    /// hypotheses; see [`validate`].
    pub fn check_structure(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        let finite = [self.alpha, self.q, self.a, self.p, self.t0]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return fail("coefficients must be finite".into());
        }
        if self.alpha <= 0.0 {
            return fail(format!("alpha must be > 0 (got {})", self.alpha));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return fail(format!("q must lie in (0, 1] (got {})", self.q));
        }
        if self.a < 0.0 {
            return fail(format!("a must be >= 0 (got {})", self.a));
        }
        if self.p <= 0.0 {
            return fail(format!("p must be > 0 (got {})", self.p));
        }
        if self.t0 <= 0.0 {
            return fail(format!("t0 must be > 0 (got {})", self.t0));
        }
        if self.u0.len() != self.v0.len() {
            return fail(format!(
                "u0 has dimension {} but v0 has dimension {}",
                self.u0.len(),
                self.v0.len()
            ));
        }
        if !linalg::all_finite(&self.u0) || !linalg::all_finite(&self.v0) {
            return fail("initial data must be finite".into());
        }
        Ok(())
    }
}

/// Time, position and velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl FlowState {
    pub fn initial(params: &Params) -> Self {
        Self {
            t: params.t0,
            x: params.u0.clone(),
            v: params.v0.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && linalg::all_finite(&self.x) && linalg::all_finite(&self.v)
    }
}

/// Right-hand side of the first-order system, written into `dx`, `dv`.
///
/// `a == 0` skips the Tikhonov term entirely so the unregularized system is
/// reproduced bit for bit.
pub fn rhs_into(
    t: f64,
    x: &[f64],
    v: &[f64],
    params: &Params,
    problem: &Problem,
    dx: &mut [f64],
    dv: &mut [f64],
) -> Result<()> {
    problem.gradient_into(x, dv);
    if !linalg::all_finite(dv) {
        return Err(Error::NonFiniteGradient { t });
    }
    dx.copy_from_slice(v);
    let damping = params.damping(t);
    if params.a == 0.0 {
        for i in 0..x.len() {
            dv[i] = -(damping * v[i]) - dv[i];
        }
    } else {
        let weight = params.tikhonov_weight(t);
        for i in 0..x.len() {
            dv[i] = -(damping * v[i]) - dv[i] - weight * x[i];
        }
    }
    Ok(())
}

/// Allocating form of [`rhs_into`]; returns `(dx, dv)`.
pub fn rhs(state: &FlowState, params: &Params, problem: &Problem) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = state.x.len();
    let mut dx = vec![0.0; d];
    let mut dv = vec![0.0; d];
    rhs_into(state.t, &state.x, &state.v, params, problem, &mut dx, &mut dv)?;
    Ok((dx, dv))
}

/// Parameters that passed structural validation, annotated with the
/// guarantee regime they fall into.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedParams {
    params: Params,
    regime: RegimeReport,
}

impl ValidatedParams {
    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn regime(&self) -> &RegimeReport {
        &self.regime
    }

    /// False when no covered theorem applies; simulation is still allowed.
    pub fn covered(&self) -> bool {
        self.regime.regime != Regime::Outside
    }

    pub fn annotation(&self) -> String {
        if self.covered() {
            format!("covered: {}", self.regime.regime)
        } else {
            let failed: Vec<&str> = self
                .regime
                .hypotheses_checked
                .iter()
                .filter(|(_, ok)| !ok)
                .map(|(name, _)| name.as_str())
                .collect();
            format!("outside-guarantees ({})", failed.join("; "))
        }
    }

    pub fn into_params(self) -> Params {
        self.params
    }
}

/// Structural validation plus regime annotation. Values are never altered.
pub fn validate(params: &Params, problem: &Problem) -> Result<ValidatedParams> {
    params.check_structure()?;
    if params.u0.len() != problem.dim() {
        return Err(Error::InvalidParams(format!(
            "initial data has dimension {} but problem `{}` has dimension {}",
            params.u0.len(),
            problem.id(),
            problem.dim()
        )));
    }
    Ok(ValidatedParams {
        regime: classify_regime(params),
        params: params.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quad() -> Problem {
        Problem::degenerate_quadratic(5.0, 1.0).unwrap()
    }

    fn state(t: f64, x: [f64; 2], v: [f64; 2]) -> FlowState {
        FlowState {
            t,
            x: x.to_vec(),
            v: v.to_vec(),
        }
    }

    #[test]
    fn equilibrium_at_minimal_norm_minimizer() {
        let params = Params::new(3.5, 0.7, 1.0, 1.2, 2);
        for t in [1.0, 7.5, 1e3] {
            let (dx, dv) = rhs(&state(t, [0.0, 0.0], [0.0, 0.0]), &params, &quad()).unwrap();
            assert_eq!(dx, vec![0.0, 0.0]);
            assert!(dv.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn worked_example() {
        let params = Params::new(3.5, 0.7, 1.0, 1.2, 2);
        let (dx, dv) = rhs(&state(1.0, [1.0, 1.0], [-1.0, -1.0]), &params, &quad()).unwrap();
        assert_eq!(dx, vec![-1.0, -1.0]);
        assert_eq!(dv, vec![-57.5, -9.5]);

        // same acceleration with the gradient replaced by central differences
        let p = quad();
        let h = 1e-6;
        let fd: Vec<f64> = (0..2)
            .map(|i| {
                let mut xp = vec![1.0, 1.0];
                let mut xm = vec![1.0, 1.0];
                xp[i] += h;
                xm[i] -= h;
                (p.value(&xp) - p.value(&xm)) / (2.0 * h)
            })
            .collect();
        for i in 0..2 {
            let expected = 3.5 - fd[i] - 1.0;
            assert!((dv[i] - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn argmin_line_without_tikhonov_is_pure_damping() {
        let params = Params::new(2.0, 0.5, 0.0, 1.0, 2);
        let v = [0.3, -1.7];
        let (_, dv) = rhs(&state(1.0, [1.0, -5.0], v), &params, &quad()).unwrap();
        assert_eq!(dv, vec![-2.0 * v[0], -2.0 * v[1]]);
    }

    #[test]
    fn non_finite_gradient_reports_time() {
        let params = Params::new(3.5, 0.7, 1.0, 1.2, 2);
        let err = rhs(&state(4.0, [f64::INFINITY, 0.0], [0.0, 0.0]), &params, &quad()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient { t } if t == 4.0));
    }

    #[test]
    fn validate_examples() {
        let p = quad();
        let v = validate(&Params::new(1.0, 0.5, 0.2, 2.0, 2), &p).unwrap();
        assert!(!v.covered());
        assert!(v.annotation().starts_with("outside-guarantees"));

        let v = validate(&Params::new(3.5, 1.0, 1.0, 1.5, 2), &p).unwrap();
        assert_eq!(v.regime().regime, Regime::Q1Classic);

        let v = validate(&Params::new(2.5, 1.0, 1.0, 1.5, 2), &p).unwrap();
        assert!(!v.covered());
        // values pass through untouched
        assert_eq!(v.params(), &Params::new(2.5, 1.0, 1.0, 1.5, 2));
    }

    #[test]
    fn validate_rejects_structural_errors() {
        let p = quad();
        let bad = [
            Params::new(0.0, 0.5, 1.0, 1.0, 2),
            Params::new(3.0, 0.0, 1.0, 1.0, 2),
            Params::new(3.0, 1.5, 1.0, 1.0, 2),
            Params::new(3.0, 0.5, -1.0, 1.0, 2),
            Params::new(3.0, 0.5, 1.0, 0.0, 2),
            Params::new(3.0, 0.5, 1.0, 1.0, 2).with_initial(0.0, vec![1.0; 2], vec![0.0; 2]),
            Params::new(3.0, 0.5, 1.0, 1.0, 3),
        ];
        for params in bad {
            assert!(matches!(validate(&params, &p), Err(Error::InvalidParams(_))), "{params:?}");
        }
    }

    #[test]
    fn zero_tikhonov_matches_unregularized_rhs_bitwise() {
        let p = quad();
        let params = Params::new(3.0, 1.0, 0.0, 2.0, 2);
        let s = state(2.5, [0.4, -0.25], [1.5, 2.0]);
        let (_, dv) = rhs(&s, &params, &p).unwrap();
        let g = p.gradient(&s.x);
        let c = 3.0 / 2.5_f64.powf(1.0);
        for i in 0..2 {
            assert_eq!(dv[i].to_bits(), (-(c * s.v[i]) - g[i]).to_bits());
        }
    }

    proptest! {
        #[test]
        fn rhs_is_affine_for_quadratics(
            x1 in prop::array::uniform2(-10.0..10.0f64),
            v1 in prop::array::uniform2(-10.0..10.0f64),
            x2 in prop::array::uniform2(-10.0..10.0f64),
            v2 in prop::array::uniform2(-10.0..10.0f64),
            t in 1.0..100.0f64,
            lam in 0.0..1.0f64,
        ) {
            // affine map: rhs(lam z1 + (1-lam) z2) = lam rhs(z1) + (1-lam) rhs(z2)
            for p in [quad(), Problem::shifted_quadratic(vec![2.0, 0.0]).unwrap()] {
                let params = Params::new(3.5, 0.7, 1.0, 1.2, 2);
                let mix = |a: [f64; 2], b: [f64; 2]| [lam * a[0] + (1.0 - lam) * b[0], lam * a[1] + (1.0 - lam) * b[1]];
                let (dx1, dv1) = rhs(&state(t, x1, v1), &params, &p).unwrap();
                let (dx2, dv2) = rhs(&state(t, x2, v2), &params, &p).unwrap();
                let (dxm, dvm) = rhs(&state(t, mix(x1, x2), mix(v1, v2)), &params, &p).unwrap();
                let (g1, g2) = (p.gradient(&x1), p.gradient(&x2));
                for i in 0..2 {
                    let scale = 1.0 + dv1[i].abs() + dv2[i].abs() + g1[i].abs() + g2[i].abs();
                    prop_assert!((dxm[i] - (lam * dx1[i] + (1.0 - lam) * dx2[i])).abs() <= 1e-12 * scale);
                    prop_assert!((dvm[i] - (lam * dv1[i] + (1.0 - lam) * dv2[i])).abs() <= 1e-12 * scale);
                }
            }
        }

        #[test]
        fn rhs_residual_vanishes(
            x in prop::array::uniform2(-10.0..10.0f64),
            v in prop::array::uniform2(-10.0..10.0f64),
            t in 1.0..1e4f64,
        ) {
            let p = quad();
            let params = Params::new(3.5, 0.7, 1.0, 1.2, 2);
            let (_, dv) = rhs(&state(t, x, v), &params, &p).unwrap();
            let g = p.gradient(&x);
            for i in 0..2 {
                let terms = [dv[i], params.damping(t) * v[i], g[i], params.tikhonov_weight(t) * x[i]];
                let scale: f64 = terms.iter().map(|v| v.abs()).sum();
                let residual = terms.iter().sum::<f64>();
                prop_assert!(residual.abs() <= 1e-13 * scale.max(1e-300) * 4.0);
            }
        }
    }
}
