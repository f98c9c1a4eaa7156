//! Catalog of convex objectives.
//!
//! Every member carries its exact gradient and Hessian, the optimal value
//! `g_star`, the minimal-norm minimizer `x_star` and a structural description
//! of `argmin g`. Members are addressable by string id:
//!
//! | id                   | objective                                       |
//! |----------------------|-------------------------------------------------|
//! | `quad:m,n`           | `(m x + n y)^2`                                 |
//! | `shifted:c1,...,cd`  | `|x - c|^2`                                     |
//! | `logsumexp:preset-k` | `log sum_i exp(A_i (x - s) + b_i)` (presets 1,2) |

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg;
use crate::newton::{self, NewtonOptions, SmoothConvex};

/// Residual tolerance for the frozen optimum of members without closed form.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    DegenerateQuadratic { m: f64, n: f64 },
    Shifted { center: Vec<f64> },
    LogSumExp {
        rows: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        shift: Vec<f64>,
    },
}

/// Structure of `argmin g`.
#[derive(Debug, Clone, PartialEq)]
pub enum ArgminSet {
    Point(Vec<f64>),
    /// Line through the origin spanned by `direction`.
    Line { direction: Vec<f64> },
}

impl ArgminSet {
    /// Euclidean projection onto the set.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ArgminSet::Point(p) => p.clone(),
            ArgminSet::Line { direction } => {
                let s = linalg::dot(x, direction) / linalg::norm_sq(direction);
                direction.iter().map(|d| s * d).collect()
            }
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        linalg::dist(x, &self.project(x)) <= tol
    }
}

impl fmt::Display for ArgminSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgminSet::Point(p) => write!(f, "point {p:?}"),
            ArgminSet::Line { direction } => write!(f, "line {{s * {direction:?} : s real}}"),
        }
    }
}

/// An immutable convex objective with known optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    id: String,
    dim: usize,
    kind: ProblemKind,
    g_star: f64,
    x_star: Vec<f64>,
    argmin: ArgminSet,
    declared_minimizers: Vec<Vec<f64>>,
}

impl Problem {
    /// `g(x, y) = (m x + n y)^2`, convex but not strongly convex; the argmin
    /// is the line `m x + n y = 0` and the minimal-norm minimizer is the
    /// origin.
    pub fn degenerate_quadratic(m: f64, n: f64) -> Result<Self> {
        if !(m.is_finite() && n.is_finite()) || m == 0.0 || n == 0.0 {
            return Err(Error::InvalidProblem(format!(
                "degenerate quadratic needs finite nonzero m, n (got m={m}, n={n})"
            )));
        }
        let direction = vec![1.0, -m / n];
        Ok(Self {
            id: format!("quad:{m},{n}"),
            dim: 2,
            kind: ProblemKind::DegenerateQuadratic { m, n },
            g_star: 0.0,
            x_star: vec![0.0, 0.0],
            declared_minimizers: vec![vec![0.0, 0.0], direction.clone()],
            argmin: ArgminSet::Line { direction },
        })
    }

    /// `g(x) = |x - c|^2`.
    pub fn shifted_quadratic(center: Vec<f64>) -> Result<Self> {
        if center.is_empty() || !linalg::all_finite(&center) {
            return Err(Error::InvalidProblem(
                "shifted quadratic needs a finite, non-empty center".into(),
            ));
        }
        let id = format!("shifted:{}", join(&center));
        Ok(Self {
            id,
            dim: center.len(),
            g_star: 0.0,
            x_star: center.clone(),
            argmin: ArgminSet::Point(center.clone()),
            declared_minimizers: vec![center.clone()],
            kind: ProblemKind::Shifted { center },
        })
    }

    /// `g(x) = log sum_i exp(A_i (x - shift) + b_i)`.
    ///
    /// The optimum is computed once by damped Newton and frozen; construction
    /// fails when the objective has no minimizer (Newton cannot drive the
    /// gradient below [`ORACLE_TOLERANCE`]).
    pub fn logsumexp(rows: Vec<Vec<f64>>, offsets: Vec<f64>, shift: Vec<f64>) -> Result<Self> {
        Self::logsumexp_with_id(rows, offsets, shift, None)
    }

    fn logsumexp_with_id(
        rows: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        shift: Vec<f64>,
        id: Option<String>,
    ) -> Result<Self> {
        let dim = shift.len();
        if rows.is_empty() || dim == 0 {
            return Err(Error::InvalidProblem("logsumexp needs at least one row".into()));
        }
        if rows.len() != offsets.len() {
            return Err(Error::InvalidProblem(format!(
                "logsumexp: {} rows but {} offsets",
                rows.len(),
                offsets.len()
            )));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidProblem(format!(
                "logsumexp: every row must have dimension {dim}"
            )));
        }
        if !rows.iter().all(|r| linalg::all_finite(r))
            || !linalg::all_finite(&offsets)
            || !linalg::all_finite(&shift)
        {
            return Err(Error::InvalidProblem("logsumexp: non-finite entries".into()));
        }

        let kind = ProblemKind::LogSumExp {
            rows,
            offsets,
            shift: shift.clone(),
        };
        let mut problem = Self {
            id: id.unwrap_or_else(|| "logsumexp:custom".into()),
            dim,
            kind,
            g_star: f64::NAN,
            x_star: vec![f64::NAN; dim],
            argmin: ArgminSet::Point(vec![f64::NAN; dim]),
            declared_minimizers: Vec::new(),
        };
        let out = newton::minimize(
            &Objective(&problem),
            &shift,
            NewtonOptions {
                tol: ORACLE_TOLERANCE,
                max_iter: 200,
            },
        )
        .map_err(|err| match err {
            Error::NewtonFailed { residual, .. } => Error::InvalidProblem(format!(
                "logsumexp has no attainable minimizer (best gradient norm {residual:e})"
            )),
            other => other,
        })?;

        problem.g_star = problem.value(&out.x);
        problem.argmin = ArgminSet::Point(out.x.clone());
        problem.declared_minimizers = vec![out.x.clone()];
        problem.x_star = out.x;
        Ok(problem)
    }

    /// Built-in logsumexp members.
    ///
    /// * `preset-1`: rows `±e1, ±e2`, zero offsets, zero shift (`x_star = 0`).
    /// * `preset-2`: rows `±e1, ±e2, (1,1)`, offsets `(0.3,-0.2,0.1,0,-0.5)`,
    ///   shift `(1,-0.5)`; asymmetric with nonzero `x_star`.
    pub fn logsumexp_preset(k: u32) -> Result<Self> {
        let axes = vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ];
        let (rows, offsets, shift) = match k {
            1 => (axes, vec![0.0; 4], vec![0.0, 0.0]),
            2 => {
                let mut rows = axes;
                rows.push(vec![1.0, 1.0]);
                (rows, vec![0.3, -0.2, 0.1, 0.0, -0.5], vec![1.0, -0.5])
            }
            _ => return Err(Error::UnknownProblem(format!("logsumexp:preset-{k}"))),
        };
        Self::logsumexp_with_id(rows, offsets, shift, Some(format!("logsumexp:preset-{k}")))
    }

    /// Every catalog member exercised by the property suites.
    pub fn catalog() -> Vec<Problem> {
        vec![
            Self::degenerate_quadratic(5.0, 1.0).expect("valid"),
            Self::degenerate_quadratic(1.0, -2.0).expect("valid"),
            Self::shifted_quadratic(vec![2.0, 0.0]).expect("valid"),
            Self::shifted_quadratic(vec![0.0, 0.0]).expect("valid"),
            Self::shifted_quadratic(vec![1.0, -1.0, 0.5]).expect("valid"),
            Self::logsumexp_preset(1).expect("valid"),
            Self::logsumexp_preset(2).expect("valid"),
        ]
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ProblemKind {
        &self.kind
    }

    pub fn g_star(&self) -> f64 {
        self.g_star
    }

    pub fn x_star(&self) -> &[f64] {
        &self.x_star
    }

    pub fn argmin(&self) -> &ArgminSet {
        &self.argmin
    }

    /// Explicitly listed members of `argmin g`; the first is `x_star`.
    pub fn declared_minimizers(&self) -> &[Vec<f64>] {
        &self.declared_minimizers
    }

    /// Declared minimizer closest to `x`.
    pub fn nearest_declared_minimizer(&self, x: &[f64]) -> &[f64] {
        self.declared_minimizers
            .iter()
            .min_by(|a, b| linalg::dist(a, x).total_cmp(&linalg::dist(b, x)))
            .expect("catalog members declare at least one minimizer")
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            ProblemKind::DegenerateQuadratic { m, n } => {
                let s = m.mul_add(x[0], n * x[1]);
                s * s
            }
            ProblemKind::Shifted { center } => x
                .iter()
                .zip(center)
                .map(|(xi, ci)| (xi - ci) * (xi - ci))
                .sum(),
            ProblemKind::LogSumExp {
                rows,
                offsets,
                shift,
            } => {
                let z = affine(rows, offsets, shift, x);
                let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                zmax + z.iter().map(|zi| (zi - zmax).exp()).sum::<f64>().ln()
            }
        }
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            ProblemKind::DegenerateQuadratic { m, n } => {
                let s = 2.0 * m.mul_add(x[0], n * x[1]);
                out[0] = s * m;
                out[1] = s * n;
            }
            ProblemKind::Shifted { center } => {
                for i in 0..x.len() {
                    out[i] = 2.0 * (x[i] - center[i]);
                }
            }
            ProblemKind::LogSumExp {
                rows,
                offsets,
                shift,
            } => {
                let w = softmax(&affine(rows, offsets, shift, x));
                out.iter_mut().for_each(|o| *o = 0.0);
                for (row, wi) in rows.iter().zip(&w) {
                    for (o, r) in out.iter_mut().zip(row) {
                        *o += wi * r;
                    }
                }
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.gradient_into(x, &mut out);
        out
    }

    /// Row-major Hessian.
    pub fn hessian_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        out.iter_mut().for_each(|o| *o = 0.0);
        match &self.kind {
            ProblemKind::DegenerateQuadratic { m, n } => {
                out[0] = 2.0 * m * m;
                out[1] = 2.0 * m * n;
                out[2] = 2.0 * m * n;
                out[3] = 2.0 * n * n;
            }
            ProblemKind::Shifted { .. } => {
                for i in 0..d {
                    out[i * d + i] = 2.0;
                }
            }
            ProblemKind::LogSumExp {
                rows,
                offsets,
                shift,
            } => {
                let w = softmax(&affine(rows, offsets, shift, x));
                let mut mean = vec![0.0; d];
                for (row, wi) in rows.iter().zip(&w) {
                    for j in 0..d {
                        mean[j] += wi * row[j];
                    }
                }
                for (row, wi) in rows.iter().zip(&w) {
                    for i in 0..d {
                        for j in 0..d {
                            out[i * d + j] += wi * row[i] * row[j];
                        }
                    }
                }
                for i in 0..d {
                    for j in 0..d {
                        out[i * d + j] -= mean[i] * mean[j];
                    }
                }
            }
        }
    }

    pub fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim * self.dim];
        self.hessian_into(x, &mut out);
        out
    }

    /// `g(x) - g_star`
    pub fn value_gap(&self, x: &[f64]) -> f64 {
        self.value(x) - self.g_star
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(id: &str) -> Result<Self> {
        let (family, args) = id
            .split_once(':')
            .ok_or_else(|| Error::UnknownProblem(id.to_string()))?;
        match family.trim() {
            "quad" => {
                let v = parse_floats(args).map_err(|_| Error::UnknownProblem(id.to_string()))?;
                if v.len() != 2 {
                    return Err(Error::UnknownProblem(id.to_string()));
                }
                Self::degenerate_quadratic(v[0], v[1])
            }
            "shifted" => {
                let v = parse_floats(args).map_err(|_| Error::UnknownProblem(id.to_string()))?;
                Self::shifted_quadratic(v)
            }
            "logsumexp" => {
                let k = args
                    .trim()
                    .strip_prefix("preset-")
                    .and_then(|k| k.parse::<u32>().ok())
                    .ok_or_else(|| Error::UnknownProblem(id.to_string()))?;
                Self::logsumexp_preset(k)
            }
            _ => Err(Error::UnknownProblem(id.to_string())),
        }
    }
}

/// Parses `"1.5, -2,3e-1"` into floats.
pub fn parse_floats(s: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse::<f64>)
        .collect()
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn affine(rows: &[Vec<f64>], offsets: &[f64], shift: &[f64], x: &[f64]) -> Vec<f64> {
    rows.iter()
        .zip(offsets)
        .map(|(row, b)| {
            row.iter()
                .zip(x.iter().zip(shift))
                .map(|(r, (xi, si))| r * (xi - si))
                .sum::<f64>()
                + b
        })
        .collect()
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|zi| (zi - zmax).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

/// Adapter exposing a [`Problem`] to the Newton solver.
pub(crate) struct Objective<'a>(pub &'a Problem);

impl SmoothConvex for Objective<'_> {
    fn dim(&self) -> usize {
        self.0.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x)
    }
    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.0.gradient_into(x, out)
    }
    fn hessian_into(&self, x: &[f64], out: &mut [f64]) {
        self.0.hessian_into(x, out)
    }
}
