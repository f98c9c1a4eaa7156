//! Which convergence guarantee covers a parameter set.
//!
//! Regimes for `0 < q < 1`, `a > 0`:
//!
//! | regime     | condition                   | `g - g*`                       | `|x'|`                         | trajectory            |
//! |------------|-----------------------------|--------------------------------|--------------------------------|-----------------------|
//! | `StrongA`  | `(3q+1)/2 <= p < q+1`       | `p` if `p <= (4q+2)/3`, else `4q-2p+2` | `2q-p+1`               | to min-norm `x*`      |
//! | `StrongB`  | `0 < p < (3q+1)/2`          | `p`                            | `(p+1-max(q,p-q))/2`           | to min-norm `x*`      |
//! | `Critical` | `p = q+1`                   | `2q`                           | `q`                            | none claimed          |
//! | `Weak`     | `q+1 < p <= 2` (`a >= q(1-q)` at `p = 2`) | `o(2q)`          | `o(q)`                         | to some minimizer     |
//!
//! `q = 1` with `alpha > 3` is `Q1Classic` with exponents `min(p,2)` and
//! `min(p,2)/2`. Everything else is `Outside`.
//!
//! Boundaries are closed on the side the table shows, compared with an
//! absolute slack of [`BOUNDARY_EPS`]: `p = q+1` is `Critical`,
//! `p = (3q+1)/2` is `StrongA`, `p = 2` is `Weak` when `a >= q(1-q)`.

use std::fmt;

use crate::dynamics::Params;

/// Absolute slack for regime boundary comparisons.
pub const BOUNDARY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    StrongA,
    StrongB,
    Critical,
    Weak,
    Q1Classic,
    Outside,
}

impl Regime {
    pub const ALL: [Regime; 6] = [
        Regime::StrongA,
        Regime::StrongB,
        Regime::Critical,
        Regime::Weak,
        Regime::Q1Classic,
        Regime::Outside,
    ];
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::StrongA => "STRONG_A",
            Regime::StrongB => "STRONG_B",
            Regime::Critical => "CRITICAL",
            Regime::Weak => "WEAK",
            Regime::Q1Classic => "Q1_CLASSIC",
            Regime::Outside => "OUTSIDE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceMode {
    StrongToMinNorm,
    WeakToSomeMinimizer,
    NoneClaimed,
}

impl fmt::Display for ConvergenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConvergenceMode::StrongToMinNorm => "strong-to-min-norm",
            ConvergenceMode::WeakToSomeMinimizer => "weak-to-some-minimizer",
            ConvergenceMode::NoneClaimed => "none-claimed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub convergence_mode: ConvergenceMode,
    /// Guaranteed decay `t^-e` of `g(x(t)) - g*`.
    pub value_rate_exponent: f64,
    /// Guaranteed decay `t^-e` of `|x'(t)|`.
    pub velocity_rate_exponent: f64,
    /// `o` rather than `O` bounds.
    pub little_o: bool,
    pub hypotheses_checked: Vec<(String, bool)>,
}

impl RegimeReport {
    fn new(regime: Regime, mode: ConvergenceMode, value: f64, velocity: f64) -> Self {
        Self {
            regime,
            convergence_mode: mode,
            value_rate_exponent: value,
            velocity_rate_exponent: velocity,
            little_o: false,
            hypotheses_checked: Vec::new(),
        }
    }

    fn outside() -> Self {
        Self::new(Regime::Outside, ConvergenceMode::NoneClaimed, 0.0, 0.0)
    }

    /// Line-oriented `key=value` block.
    pub fn to_key_value(&self) -> String {
        let mut s = format!(
            "regime={}\nconvergence_mode={}\nvalue_rate_exponent={}\nvelocity_rate_exponent={}\nlittle_o={}\n",
            self.regime,
            self.convergence_mode,
            self.value_rate_exponent,
            self.velocity_rate_exponent,
            self.little_o
        );
        for (name, ok) in &self.hypotheses_checked {
            s.push_str(&format!("hypothesis[{name}]={ok}\n"));
        }
        s
    }
}

/// Maps structurally valid parameters to exactly one regime.
pub fn classify_regime(params: &Params) -> RegimeReport {
    let Params { alpha, q, a, p, .. } = *params;
    let mut checks: Vec<(String, bool)> = Vec::new();
    let mut check = |name: &str, ok: bool| {
        checks.push((name.to_string(), ok));
        ok
    };

    let positive_a = check("a > 0", a > 0.0);

    let mut report = if (q - 1.0).abs() <= BOUNDARY_EPS {
        let damped = check("q = 1 requires alpha > 3", alpha > 3.0);
        if damped && positive_a {
            let e = p.min(2.0);
            RegimeReport::new(Regime::Q1Classic, ConvergenceMode::NoneClaimed, e, e / 2.0)
        } else {
            RegimeReport::outside()
        }
    } else if !positive_a {
        RegimeReport::outside()
    } else if p < q + 1.0 - BOUNDARY_EPS {
        check("p < q + 1", true);
        let strong_a_start = (3.0 * q + 1.0) / 2.0;
        if p >= strong_a_start - BOUNDARY_EPS {
            let value = if p <= (4.0 * q + 2.0) / 3.0 + BOUNDARY_EPS {
                p
            } else {
                4.0 * q - 2.0 * p + 2.0
            };
            RegimeReport::new(
                Regime::StrongA,
                ConvergenceMode::StrongToMinNorm,
                value,
                2.0 * q - p + 1.0,
            )
        } else {
            let r = q.max(p - q);
            RegimeReport::new(
                Regime::StrongB,
                ConvergenceMode::StrongToMinNorm,
                p,
                (p + 1.0 - r) / 2.0,
            )
        }
    } else if (p - (q + 1.0)).abs() <= BOUNDARY_EPS {
        check("p = q + 1", true);
        let (value, velocity) = pointwise_exponents(q, p);
        RegimeReport::new(Regime::Critical, ConvergenceMode::NoneClaimed, value, velocity)
    } else if p <= 2.0 + BOUNDARY_EPS {
        let at_two = (p - 2.0).abs() <= BOUNDARY_EPS;
        let ok = if at_two {
            check("p = 2 requires a >= q(1-q)", a >= q * (1.0 - q))
        } else {
            check("q + 1 < p < 2", true)
        };
        if ok {
            let mut r = RegimeReport::new(
                Regime::Weak,
                ConvergenceMode::WeakToSomeMinimizer,
                2.0 * q,
                q,
            );
            r.little_o = true;
            r
        } else {
            RegimeReport::outside()
        }
    } else {
        check("p <= 2", false);
        RegimeReport::outside()
    };

    report.hypotheses_checked = checks;
    report
}

/// Pointwise exponents for `0 < q < 1`, `0 < p <= 2`: `(2q, q)` when
/// `q < p/2`, else `(p, p/2)`.
pub fn pointwise_exponents(q: f64, p: f64) -> (f64, f64) {
    if q < p / 2.0 {
        (2.0 * q, q)
    } else {
        (p, p / 2.0)
    }
}
