//! The Tikhonov path `x_t = argmin g(x) + (a / 2t^p) |x|^2`.

use crate::error::{Error, Result};
use crate::linalg;
use crate::newton::{self, NewtonOptions, SmoothConvex};
use crate::problem::{Problem, ProblemKind};

/// Stationarity target is `RESIDUAL_TOL * (1 + a/t^p)`.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct TikhonovPoint {
    pub t: f64,
    pub x_t: Vec<f64>,
    /// `|grad g(x_t) + (a/t^p) x_t|`
    pub residual: f64,
    pub solver_iterations: usize,
}

/// `g + (lambda / 2) |.|^2`
struct Regularized<'a> {
    problem: &'a Problem,
    lambda: f64,
}

impl SmoothConvex for Regularized<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.problem.value(x) + 0.5 * self.lambda * linalg::norm_sq(x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.problem.gradient_into(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o += self.lambda * xi;
        }
    }

    fn hessian_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        self.problem.hessian_into(x, out);
        for i in 0..d {
            out[i * d + i] += self.lambda;
        }
    }
}

fn check_args(t: f64, a: f64, p: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParams(format!("t must be > 0 (got {t})")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParams(format!("a must be > 0 (got {a})")));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParams(format!("p must be > 0 (got {p})")));
    }
    Ok(a / t.powf(p))
}

fn residual(problem: &Problem, x: &[f64], lambda: f64) -> f64 {
    let mut g = problem.gradient(x);
    for (gi, xi) in g.iter_mut().zip(x) {
        *gi += lambda * xi;
    }
    linalg::norm(&g)
}

pub fn tikhonov_point(problem: &Problem, t: f64, a: f64, p: f64) -> Result<TikhonovPoint> {
    tikhonov_point_from(problem, t, a, p, None)
}

/// As [`tikhonov_point`], starting Newton from `warm` when no closed form
/// exists.
pub fn tikhonov_point_from(
    problem: &Problem,
    t: f64,
    a: f64,
    p: f64,
    warm: Option<&[f64]>,
) -> Result<TikhonovPoint> {
    let lambda = check_args(t, a, p)?;
    let (x_t, iterations) = match problem.kind() {
        ProblemKind::DegenerateQuadratic { .. } => (vec![0.0; problem.dim()], 0),
        ProblemKind::Shifted { center } => {
            let s = 1.0 / (1.0 + 0.5 * lambda);
            (center.iter().map(|c| c * s).collect(), 0)
        }
        ProblemKind::LogSumExp { .. } => {
            let start = match warm {
                Some(w) if w.len() == problem.dim() && linalg::all_finite(w) => w.to_vec(),
                _ => problem.x_star().to_vec(),
            };
            let f = Regularized { problem, lambda };
            let opts = NewtonOptions {
                tol: 0.1 * RESIDUAL_TOL * (1.0 + lambda),
                max_iter: 200,
            };
            let out = newton::minimize(&f, &start, opts)?;
            (out.x, out.iterations)
        }
    };
    Ok(TikhonovPoint {
        t,
        residual: residual(problem, &x_t, lambda),
        x_t,
        solver_iterations: iterations,
    })
}

/// Path points on `grid`, each warm-started from the previous one.
pub fn tikhonov_curve(problem: &Problem, a: f64, p: f64, grid: &[f64]) -> Result<Vec<TikhonovPoint>> {
    let mut out: Vec<TikhonovPoint> = Vec::with_capacity(grid.len());
    for &t in grid {
        let warm = out.last().map(|pt| pt.x_t.as_slice());
        out.push(tikhonov_point_from(problem, t, a, p, warm)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeCheckPoint {
    pub t: f64,
    /// Central-difference estimate of `|d x_t / dt|`.
    pub derivative_norm: f64,
    /// `(p / t) |x_t|`
    pub bound: f64,
    pub slack: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeReport {
    pub points: Vec<DerivativeCheckPoint>,
    pub holds: bool,
    /// Largest `derivative_norm - bound - slack`; non-positive when the check holds.
    pub worst_margin: f64,
}

/// Checks `|d x_t / dt| <= (p / t) |x_t|` at interior grid points, with
/// slack `10 * h * |second divided difference|`.
pub fn curve_derivative_check(problem: &Problem, a: f64, p: f64, grid: &[f64]) -> Result<DerivativeReport> {
    if grid.len() < 3 {
        return Err(Error::InvalidConfig("derivative check needs at least 3 grid points".into()));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidConfig("grid must be strictly increasing".into()));
    }
    let curve = tikhonov_curve(problem, a, p, grid)?;
    let d = problem.dim();
    let mut points = Vec::with_capacity(grid.len() - 2);
    let mut worst = f64::NEG_INFINITY;
    for i in 1..grid.len() - 1 {
        let (tm, t, tp) = (grid[i - 1], grid[i], grid[i + 1]);
        let (hm, hp) = (t - tm, tp - t);
        let (xm, x, xp) = (&curve[i - 1].x_t, &curve[i].x_t, &curve[i + 1].x_t);
        let mut deriv = vec![0.0; d];
        let mut second = vec![0.0; d];
        for k in 0..d {
            // three-point derivative on a non-uniform grid
            deriv[k] = -hp / (hm * (hm + hp)) * xm[k] + (hp - hm) / (hm * hp) * x[k]
                + hm / (hp * (hm + hp)) * xp[k];
            second[k] = 2.0 * ((xp[k] - x[k]) / hp - (x[k] - xm[k]) / hm) / (hm + hp);
        }
        let derivative_norm = linalg::norm(&deriv);
        let bound = p / t * linalg::norm(x);
        let slack = 10.0 * hm.max(hp) * linalg::norm(&second);
        let margin = derivative_norm - bound - slack;
        worst = worst.max(margin);
        points.push(DerivativeCheckPoint {
            t,
            derivative_norm,
            bound,
            slack,
            ok: margin <= 0.0,
        });
    }
    Ok(DerivativeReport {
        holds: points.iter().all(|pt| pt.ok),
        points,
        worst_margin: worst,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapDecomposition {
    /// `g_t(x) - g_t(x_t)`
    pub gap: f64,
    /// `(a / 2t^p) |x - x_t|^2`
    pub strong_lower: f64,
    /// `gap + (a / 2t^p) |x*|^2`, an upper bound for `g(x) - g*`.
    pub value_upper: f64,
    /// `g(x) - g*`
    pub value_gap: f64,
    /// `gap >= strong_lower - 1e-10`
    pub lower_holds: bool,
    /// `value_gap <= value_upper + 1e-10`
    pub upper_holds: bool,
}

pub fn gap_decomposition(problem: &Problem, x: &[f64], t: f64, a: f64, p: f64) -> Result<GapDecomposition> {
    if !linalg::all_finite(x) || x.len() != problem.dim() {
        return Err(Error::InvalidParams("point must be finite with the problem's dimension".into()));
    }
    let tik = tikhonov_point(problem, t, a, p)?;
    let lambda = a / t.powf(p);
    let g_t = |y: &[f64]| problem.value(y) + 0.5 * lambda * linalg::norm_sq(y);
    let gap = g_t(x) - g_t(&tik.x_t);
    let strong_lower = 0.5 * lambda * linalg::norm_sq(&linalg::sub(x, &tik.x_t));
    let value_upper = gap + 0.5 * lambda * linalg::norm_sq(problem.x_star());
    let value_gap = problem.value_gap(x);
    Ok(GapDecomposition {
        gap,
        strong_lower,
        value_upper,
        value_gap,
        lower_holds: gap >= strong_lower - 1e-10,
        upper_holds: value_gap <= value_upper + 1e-10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::log_grid;
    use rand::{Rng, SeedableRng};

    fn quad() -> Problem {
        Problem::degenerate_quadratic(5.0, 1.0).unwrap()
    }

    fn shifted() -> Problem {
        Problem::shifted_quadratic(vec![2.0, 0.0]).unwrap()
    }

    /// Minimizer of `(x - 2)^2 + (lambda/2) x^2` by grid search and golden-section refinement.
    fn scalar_oracle(lambda: f64) -> f64 {
        let f = |x: f64| (x - 2.0) * (x - 2.0) + 0.5 * lambda * x * x;
        let (mut lo, mut hi) = (0.0, 3.0);
        let n = 3000;
        let best = (0..=n)
            .map(|i| lo + (hi - lo) * i as f64 / n as f64)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap();
        lo = best - 1e-3;
        hi = best + 1e-3;
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - r * (hi - lo);
            let m2 = lo + r * (hi - lo);
            if f(m1) < f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn degenerate_quadratic_path_is_origin() {
        for t in [1.0, 7.0, 1e4] {
            let pt = tikhonov_point(&quad(), t, 1.0, 1.2).unwrap();
            assert_eq!(pt.x_t, vec![0.0, 0.0]);
            assert_eq!(pt.residual, 0.0);
        }
    }

    #[test]
    fn shifted_closed_form() {
        let pt = tikhonov_point(&shifted(), 10.0, 1.0, 2.0).unwrap();
        let oracle = scalar_oracle(0.01);
        // golden section resolves the argmin to about sqrt(eps)
        assert!((oracle - 1.990049751243781).abs() < 1e-7);
        assert!((pt.x_t[0] - 2.0 / 1.005).abs() < 1e-15);
        assert!((pt.x_t[0] - oracle).abs() < 1e-7);
        assert_eq!(pt.x_t[1], 0.0);
        assert!(pt.residual <= RESIDUAL_TOL);
    }

    #[test]
    fn shifted_path_approaches_center() {
        let d: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&t| linalg::dist(&tikhonov_point(&shifted(), t, 1.0, 2.0).unwrap().x_t, &[2.0, 0.0]))
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2] && d[2] > 0.0);
    }

    #[test]
    fn logsumexp_point_and_warm_start() {
        let p = Problem::logsumexp_preset(2).unwrap();
        let cold = tikhonov_point(&p, 3.0, 1.0, 1.0).unwrap();
        assert!(cold.residual <= RESIDUAL_TOL * (1.0 + 1.0 / 3.0));
        let warm = tikhonov_point_from(&p, 3.1, 1.0, 1.0, Some(&cold.x_t)).unwrap();
        let fresh = tikhonov_point(&p, 3.1, 1.0, 1.0).unwrap();
        assert!(linalg::dist(&warm.x_t, &fresh.x_t) < 1e-9);
        assert!(linalg::norm(&cold.x_t) <= linalg::norm(p.x_star()) + 1e-10);
    }

    #[test]
    fn rejects_nonpositive_a() {
        assert!(tikhonov_point(&quad(), 1.0, 0.0, 1.0).is_err());
        assert!(tikhonov_point(&quad(), 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn derivative_bound_closed_form() {
        // |d/dt x_t| = |c| (a p / 2t^(p+1)) / (1 + a/(2t^p))^2 <= (p/t) |x_t|
        let (a, p) = (1.0, 2.0);
        for t in [2.0_f64, 10.0, 100.0] {
            let lam = a / t.powf(p);
            let deriv = 2.0 * (a * p / (2.0 * t.powf(p + 1.0))) / (1.0 + 0.5 * lam).powi(2);
            let xt = 2.0 / (1.0 + 0.5 * lam);
            assert!(deriv <= p / t * xt);
        }
        let grid = [1.9, 2.0, 2.1, 9.9, 10.0, 10.1, 99.0, 100.0, 101.0];
        let r = curve_derivative_check(&shifted(), a, p, &grid).unwrap();
        assert!(r.holds, "{r:?}");
        let at2 = r.points.iter().find(|pt| pt.t == 2.0).unwrap();
        let exact = 2.0 * (2.0 / 16.0) / (1.125f64).powi(2);
        assert!((at2.derivative_norm - exact).abs() < 1e-2 * exact);
    }

    #[test]
    fn derivative_check_on_constant_curve() {
        let r = curve_derivative_check(&quad(), 1.0, 1.2, &log_grid(1.0, 100.0, 10)).unwrap();
        assert!(r.holds);
        assert!(r.points.iter().all(|pt| pt.derivative_norm == 0.0));
    }

    #[test]
    fn derivative_check_on_logsumexp() {
        for k in [1, 2] {
            let p = Problem::logsumexp_preset(k).unwrap();
            let r = curve_derivative_check(&p, 1.0, 1.0, &log_grid(1.0, 1000.0, 50)).unwrap();
            assert!(r.holds, "preset {k}: worst margin {}", r.worst_margin);
        }
    }

    #[test]
    fn derivative_check_rejects_short_grid() {
        assert!(curve_derivative_check(&quad(), 1.0, 1.0, &[1.0, 2.0]).is_err());
        assert!(curve_derivative_check(&quad(), 1.0, 1.0, &[1.0, 3.0, 2.0]).is_err());
    }

    #[test]
    fn gap_examples() {
        let g = gap_decomposition(&quad(), &[1.0, 1.0], 1.0, 1.0, 1.2).unwrap();
        assert!((g.gap - 37.0).abs() < 1e-12);
        assert!((g.strong_lower - 1.0).abs() < 1e-12);
        assert!(g.lower_holds && g.upper_holds);

        let tik = tikhonov_point(&shifted(), 5.0, 1.0, 1.5).unwrap();
        let g = gap_decomposition(&shifted(), &tik.x_t, 5.0, 1.0, 1.5).unwrap();
        assert_eq!(g.gap, 0.0);
        assert_eq!(g.strong_lower, 0.0);
    }

    #[test]
    fn gap_fuzz() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let catalog = Problem::catalog();
        for _ in 0..1000 {
            let p = &catalog[rng.gen_range(0..catalog.len())];
            let x: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let t = rng.gen_range(1.0..1e3);
            let a = rng.gen_range(0.1..2.0);
            let pp = rng.gen_range(0.1..2.0);
            let g = gap_decomposition(p, &x, t, a, pp).unwrap();
            assert!(g.lower_holds, "{} {x:?} {g:?}", p.id());
            assert!(g.upper_holds, "{} {x:?} {g:?}", p.id());
        }
    }

    #[test]
    fn path_invariants_over_catalog() {
        for prob in Problem::catalog() {
            for &(a, p) in &[(1.0, 0.5), (1.0, 1.2), (0.5, 2.0)] {
                let grid = log_grid(1.0, 1e6, 10);
                let curve = tikhonov_curve(&prob, a, p, &grid).unwrap();
                let xs = linalg::norm(prob.x_star());
                let mut prev = f64::INFINITY;
                for pt in &curve {
                    let lam = a / pt.t.powf(p);
                    assert!(pt.residual <= RESIDUAL_TOL * (1.0 + lam), "{} {pt:?}", prob.id());
                    assert!(linalg::norm(&pt.x_t) <= xs + 1e-10, "{}", prob.id());
                    let d = linalg::dist(&pt.x_t, prob.x_star());
                    assert!(d <= prev + 1e-9, "{} t={}", prob.id(), pt.t);
                    prev = d;
                }
            }
        }
    }
}
