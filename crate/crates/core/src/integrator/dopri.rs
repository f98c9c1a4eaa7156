//! Dormand–Prince 5(4) with PI step control and quartic dense output.

use crate::error::{Error, Result};

/// First-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const SAFE: f64 = 0.9;
/// Largest step shrink per step is `1 / FACC1`, growth `1 / FACC2`.
const FACC1: f64 = 1.0 / 0.2;
const FACC2: f64 = 1.0 / 10.0;

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub max_rhs_evals: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub rhs_evals: u64,
}

/// Why the adaptive loop stopped early.
#[derive(Debug)]
pub enum Halt {
    Rhs(Error),
    Budget { reached: f64 },
    NonFinite { t: f64, y: Vec<f64> },
}

/// Values at requested output times plus counters.
#[derive(Debug)]
pub struct Dense {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub stats: Stats,
    pub halt: Option<Halt>,
}

struct Stages {
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
    yerr: Vec<f64>,
}

impl Stages {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            ytmp: vec![0.0; n],
            ynew: vec![0.0; n],
            yerr: vec![0.0; n],
        }
    }

    /// Stages 2..7 from `k[0] = f(t, y)`. Leaves `ynew` and `yerr` filled
    /// and `k[6] = f(t + h, ynew)`.
    fn step<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, y: &[f64], h: f64) -> Result<()> {
        let n = y.len();
        let Stages { k, ytmp, ynew, yerr } = self;
        let [k1, k2, k3, k4, k5, k6, k7] = k;

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        sys.eval(t + C2 * h, ytmp, k2)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.eval(t + C3 * h, ytmp, k3)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.eval(t + C4 * h, ytmp, k4)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.eval(t + C5 * h, ytmp, k5)?;
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        sys.eval(t + h, ytmp, k6)?;
        for i in 0..n {
            ynew[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        sys.eval(t + h, ynew, k7)?;
        for i in 0..n {
            yerr[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        Ok(())
    }

    fn error_norm(&self, y: &[f64], rel_tol: f64, abs_tol: f64) -> f64 {
        let n = y.len();
        let mut sum = 0.0;
        for i in 0..n {
            let sk = abs_tol + rel_tol * y[i].abs().max(self.ynew[i].abs());
            let r = self.yerr[i] / sk;
            sum += r * r;
        }
        (sum / n.max(1) as f64).sqrt()
    }
}

/// Quartic interpolant over one accepted step.
struct Interpolant {
    t: f64,
    h: f64,
    c: [Vec<f64>; 5],
}

impl Interpolant {
    fn new(n: usize) -> Self {
        Self {
            t: 0.0,
            h: 0.0,
            c: std::array::from_fn(|_| vec![0.0; n]),
        }
    }

    fn prepare(&mut self, t: f64, h: f64, y: &[f64], s: &Stages) {
        self.t = t;
        self.h = h;
        let k = &s.k;
        for i in 0..y.len() {
            let ydiff = s.ynew[i] - y[i];
            let bspl = h * k[0][i] - ydiff;
            self.c[0][i] = y[i];
            self.c[1][i] = ydiff;
            self.c[2][i] = bspl;
            self.c[3][i] = ydiff - h * k[6][i] - bspl;
            self.c[4][i] = h
                * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i]
                    + D7 * k[6][i]);
        }
    }

    fn eval(&self, t: f64) -> Vec<f64> {
        let s = (t - self.t) / self.h;
        let s1 = 1.0 - s;
        let c = &self.c;
        (0..c[0].len())
            .map(|i| c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i]))))
            .collect()
    }
}

/// Adaptive integration from `(t0, y0)` to the last entry of `outputs`,
/// returning the dense solution at each output time.
///
/// `outputs` must be strictly increasing with `outputs[0] >= t0`.
pub fn solve<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    ctl: StepControl,
) -> Dense {
    let n = sys.dim();
    assert_eq!(y0.len(), n);
    let mut out = Dense {
        times: Vec::with_capacity(outputs.len()),
        values: Vec::with_capacity(outputs.len()),
        stats: Stats::default(),
        halt: None,
    };
    let Some(&t_end) = outputs.last() else {
        return out;
    };

    let mut next = 0;
    while next < outputs.len() && outputs[next] <= t0 {
        out.times.push(outputs[next]);
        out.values.push(y0.to_vec());
        next += 1;
    }

    let mut stages = Stages::new(n);
    let mut dense = Interpolant::new(n);
    let mut y = y0.to_vec();
    let mut t = t0;

    if let Err(e) = sys.eval(t, &y, &mut stages.k[0]) {
        out.halt = Some(Halt::Rhs(e));
        return out;
    }
    out.stats.rhs_evals = 1;

    let mut h = ctl.initial_step.min(ctl.max_step);
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;

    while next < outputs.len() {
        if out.stats.rhs_evals + 6 > ctl.max_rhs_evals {
            out.halt = Some(Halt::Budget { reached: t });
            return out;
        }
        let mut last = false;
        if t + 1.01 * h >= t_end {
            h = t_end - t;
            last = true;
        }

        if let Err(e) = stages.step(sys, t, &y, h) {
            out.halt = Some(Halt::Rhs(e));
            return out;
        }
        out.stats.rhs_evals += 6;

        let err = stages.error_norm(&y, ctl.rel_tol, ctl.abs_tol);
        if !err.is_finite() || !stages.ynew.iter().all(|v| v.is_finite()) {
            // Non-finite trial: shrink hard, give up only once the step is negligible.
            out.stats.rejected_steps += 1;
            h *= 1.0 / FACC1;
            last_rejected = true;
            if h.abs() <= 1e-14 * t.abs().max(1.0) {
                out.halt = Some(Halt::NonFinite { t, y });
                return out;
            }
            continue;
        }

        let fac11 = err.powf(EXPO1);
        let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(FACC2, FACC1);
        let mut hnew = h / fac;

        if err <= 1.0 {
            facold = err.max(1e-4);
            out.stats.accepted_steps += 1;

            dense.prepare(t, h, &y, &stages);
            let t_new = if last { t_end } else { t + h };
            while next < outputs.len() && outputs[next] <= t_new {
                let tk = outputs[next];
                out.times.push(tk);
                if tk == t_new {
                    out.values.push(stages.ynew.clone());
                } else {
                    out.values.push(dense.eval(tk));
                }
                next += 1;
            }

            let (k0, rest) = stages.k.split_at_mut(1);
            k0[0].copy_from_slice(&rest[5]);
            y.copy_from_slice(&stages.ynew);
            t = t_new;

            hnew = hnew.min(ctl.max_step);
            if last_rejected {
                hnew = hnew.min(h);
            }
            last_rejected = false;
        } else {
            hnew = h / FACC1.min(fac11 / SAFE);
            out.stats.rejected_steps += 1;
            last_rejected = true;
        }
        h = hnew;
    }
    out
}

/// Constant-step integration from `t0` over `steps` steps of size `h`.
/// The error estimate and step control are bypassed.
pub fn fixed_step<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    h: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    let mut stages = Stages::new(sys.dim());
    let mut y = y0.to_vec();
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        sys.eval(t, &y, &mut stages.k[0])?;
        stages.step(sys, t, &y, h)?;
        y.copy_from_slice(&stages.ynew);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `y' = lambda y`
    struct Exp(f64);

    impl OdeSystem for Exp {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
            dy[0] = self.0 * y[0];
            Ok(())
        }
    }

    fn ctl() -> StepControl {
        StepControl {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            initial_step: 1e-3,
            max_step: 1.0,
            max_rhs_evals: 1_000_000,
        }
    }

    #[test]
    fn tableau_consistency() {
        let rows: [&[f64]; 6] = [
            &[A21],
            &[A31, A32],
            &[A41, A42, A43],
            &[A51, A52, A53, A54],
            &[A61, A62, A63, A64, A65],
            &[A71, 0.0, A73, A74, A75, A76],
        ];
        let c = [C2, C3, C4, C5, 1.0, 1.0];
        for (row, ci) in rows.iter().zip(c) {
            assert!((row.iter().sum::<f64>() - ci).abs() < 1e-14);
        }
        let e: f64 = [E1, E3, E4, E5, E6, E7].iter().sum();
        assert!(e.abs() < 1e-15);
        // the dense-output correction vanishes on constant derivatives
        let d: f64 = [D1, D3, D4, D5, D6, D7].iter().sum();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn exponential_decay() {
        let out = solve(&Exp(-1.0), 0.0, &[1.0], &[0.5, 1.0, 2.0, 5.0], ctl());
        assert!(out.halt.is_none());
        for (t, y) in out.times.iter().zip(&out.values) {
            assert!((y[0] - (-t).exp()).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn dense_output_between_steps() {
        let mut c = ctl();
        c.rel_tol = 1e-7;
        let times: Vec<f64> = (1..=400).map(|i| i as f64 * 0.01).collect();
        let out = solve(&Exp(-1.0), 0.0, &[1.0], &times, c);
        assert_eq!(out.times.len(), times.len());
        // far fewer steps than output points
        assert!(out.stats.accepted_steps < 100);
        for (t, y) in out.times.iter().zip(&out.values) {
            assert!((y[0] - (-t).exp()).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let mut c = ctl();
        c.max_rhs_evals = 50;
        let out = solve(&Exp(-1.0), 0.0, &[1.0], &[100.0], c);
        match out.halt {
            Some(Halt::Budget { reached }) => assert!(reached > 0.0 && reached < 100.0),
            other => panic!("{other:?}"),
        }
        assert!(out.stats.rhs_evals <= 50);
    }

    #[test]
    fn blow_up_is_reported() {
        struct Blow;
        impl OdeSystem for Blow {
            fn dim(&self) -> usize {
                1
            }
            fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
                dy[0] = y[0] * y[0];
                Ok(())
            }
        }
        let mut c = ctl();
        c.max_rhs_evals = 10_000_000;
        let out = solve(&Blow, 0.0, &[1.0], &[2.0], c);
        assert!(out.halt.is_some());
        if let Some(Halt::NonFinite { t, y }) = &out.halt {
            assert!(*t < 1.0 && y[0].is_finite());
        }
    }

    #[test]
    fn fixed_step_is_fifth_order() {
        let exact = (-1.0_f64).exp();
        let errs: Vec<f64> = [0.2, 0.1]
            .iter()
            .map(|&h| {
                let steps = (1.0 / h as f64).round() as usize;
                (fixed_step(&Exp(-1.0), 0.0, &[1.0], h, steps).unwrap()[0] - exact).abs()
            })
            .collect();
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 5.0).abs() < 0.4, "{order}");
    }
}
