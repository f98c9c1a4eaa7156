//! Cumulative weighted integrals along a trajectory.

use crate::integrator::Trajectory;

/// Share of the total the final decade may contribute for a plateau.
pub const PLATEAU_SHARE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// `|x'|^2`
    SpeedSq,
    /// `g(x) - g*`
    ValueGap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralEstimate {
    pub times: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub total: f64,
    /// Fraction of `total` accrued over `[t_end / 10, t_end]`.
    pub last_decade_share: f64,
    pub plateau: bool,
}

/// `int t^exponent * quantity dt` along `traj`.
pub fn integral_estimate(traj: &Trajectory, exponent: f64, quantity: Quantity) -> IntegralEstimate {
    let t = traj.times();
    let f = traj.series(|s| match quantity {
        Quantity::SpeedSq => s.speed * s.speed,
        Quantity::ValueGap => s.value_gap,
    });
    integral_estimate_series(&t, &f, exponent)
}

/// Trapezoid rule in `ln t` for `int t^exponent f(t) dt`.
pub fn integral_estimate_series(t: &[f64], f: &[f64], exponent: f64) -> IntegralEstimate {
    assert_eq!(t.len(), f.len(), "series lengths differ");
    let mut cumulative = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    // dt = t d(ln t)
    let weight = |i: usize| t[i].powf(exponent + 1.0) * f[i];
    for i in 0..t.len() {
        if i > 0 {
            acc += 0.5 * (weight(i) + weight(i - 1)) * (t[i] / t[i - 1]).ln();
        }
        cumulative.push(acc);
    }
    let total = acc;
    let last_decade_share = match t.last() {
        Some(&t_end) if total != 0.0 => {
            let tc = t_end / 10.0;
            let j = t.partition_point(|&ti| ti < tc);
            let at = if j == 0 {
                0.0
            } else {
                let (l0, l1) = (t[j - 1].ln(), t[j].ln());
                let s = (tc.ln() - l0) / (l1 - l0);
                cumulative[j - 1] + s * (cumulative[j] - cumulative[j - 1])
            };
            (total - at) / total
        }
        _ => 0.0,
    };
    IntegralEstimate {
        times: t.to_vec(),
        cumulative,
        total,
        last_decade_share,
        plateau: last_decade_share < PLATEAU_SHARE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::log_grid;

    #[test]
    fn zero_quantity() {
        let t = log_grid(1.0, 1e4, 50);
        let r = integral_estimate_series(&t, &vec![0.0; t.len()], 0.5);
        assert!(r.cumulative.iter().all(|&c| c == 0.0));
        assert!(r.plateau);
    }

    #[test]
    fn convergent_tail() {
        // |x'|^2 = t^(-2q-1.2) weighted by t^q with q = 0.5: integrand t^-1.7
        let q = 0.5;
        let t = log_grid(1.0, 1e4, 200);
        let f: Vec<f64> = t.iter().map(|t| t.powf(-2.0 * q - 1.2)).collect();
        let r = integral_estimate_series(&t, &f, q);
        let exact = (1.0 - 1e4f64.powf(-0.7)) / 0.7;
        assert!((r.total - exact).abs() < 1e-4 * exact);
        let share = (1e3f64.powf(-0.7) - 1e4f64.powf(-0.7)) / 0.7 / exact;
        assert!((r.last_decade_share - share).abs() < 1e-4);
        assert!(r.plateau);
    }

    #[test]
    fn slowly_convergent_tail_is_not_a_plateau() {
        // integrand t^-1.2 keeps over 10% of its mass in the last of 4 decades
        let t = log_grid(1.0, 1e4, 200);
        let f: Vec<f64> = t.iter().map(|t| t.powf(-1.2)).collect();
        let r = integral_estimate_series(&t, &f, 0.0);
        let exact = (1.0 - 1e4f64.powf(-0.2)) / 0.2;
        assert!((r.total - exact).abs() < 1e-4 * exact);
        assert!(r.last_decade_share > 0.1);
        assert!(!r.plateau);
    }

    #[test]
    fn harmonic_diverges() {
        let q = 0.4;
        let t = log_grid(1.0, 1e4, 200);
        let f: Vec<f64> = t.iter().map(|t| t.powf(-q - 1.0)).collect();
        let r = integral_estimate_series(&t, &f, q);
        assert!((r.total - 1e4f64.ln()).abs() < 1e-9);
        assert!((r.last_decade_share - 0.25).abs() < 1e-9);
        assert!(!r.plateau);
    }

    #[test]
    fn cumulative_is_monotone_for_nonnegative_integrands() {
        let t = log_grid(1.0, 1e3, 30);
        let f: Vec<f64> = t.iter().map(|t| (t.sin() + 1.0) / t).collect();
        let r = integral_estimate_series(&t, &f, 0.3);
        assert!(r.cumulative.windows(2).all(|w| w[1] >= w[0]));
    }
}
