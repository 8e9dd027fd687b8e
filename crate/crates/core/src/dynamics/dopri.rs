//! Dormand–Prince 5(4) embedded Runge–Kutta pair with PI step control and
//! the standard fourth-order continuous extension.

use std::ops::ControlFlow;

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
// Fifth-order weights; also the last stage row (FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth minus fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const PI_BETA: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    /// Steps below this abort the integration.
    pub min_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Underflow {
    pub t: f64,
    pub h: f64,
    pub y: Vec<f64>,
}

/// One accepted step, with enough data to interpolate inside it.
pub struct AcceptedStep<'a> {
    pub t_old: f64,
    pub t_new: f64,
    pub y_new: &'a [f64],
    /// `f(t_new, y_new)`.
    pub dy_new: &'a [f64],
    cont: &'a [Vec<f64>; 5],
}

impl AcceptedStep<'_> {
    /// Fourth-order interpolant at `t ∈ [t_old, t_new]`.
    pub fn interpolate(&self, t: f64, out: &mut [f64]) {
        let h = self.t_new - self.t_old;
        let theta = (t - self.t_old) / h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = self.cont;
        for i in 0..out.len() {
            out[i] = r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Reusable stage storage for a fixed dimension.
pub struct Dopri5 {
    control: StepControl,
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
    cont: [Vec<f64>; 5],
    pub stats: Stats,
}

impl Dopri5 {
    pub fn new(dim: usize, control: StepControl) -> Self {
        let v = || vec![0.0; dim];
        Self {
            control,
            k: [v(), v(), v(), v(), v(), v(), v()],
            y_stage: v(),
            y_new: v(),
            cont: [v(), v(), v(), v(), v()],
            stats: Stats::default(),
        }
    }

    /// Computes stages 2..7 given `k[0] = f(t, y)`, leaving the fifth-order
    /// solution in `y_new` and `f(t + h, y_new)` in `k[6]`.
    fn stages<F: FnMut(f64, &[f64], &mut [f64])>(&mut self, f: &mut F, t: f64, y: &[f64], h: f64) {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let ys = &mut self.y_stage;
        for i in 0..n {
            ys[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, ys, k2);
        for i in 0..n {
            ys[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, ys, k3);
        for i in 0..n {
            ys[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, ys, k4);
        for i in 0..n {
            ys[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, ys, k5);
        for i in 0..n {
            ys[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, ys, k6);
        for i in 0..n {
            self.y_new[i] =
                y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        f(t + h, &self.y_new, k7);
        self.stats.evaluations += 6;
    }

    fn local_error(&self, y: &[f64], h: f64) -> f64 {
        let [k1, _, k3, k4, k5, k6, k7] = &self.k;
        let n = y.len();
        let sum: f64 = (0..n)
            .map(|i| {
                let err = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = self.control.abs_tol
                    + self.control.rel_tol * y[i].abs().max(self.y_new[i].abs());
                (err / scale).powi(2)
            })
            .sum();
        (sum / n.max(1) as f64).sqrt()
    }

    fn fill_dense(&mut self, y: &[f64], h: f64) {
        let [k1, _, k3, k4, k5, k6, k7] = &self.k;
        let [r1, r2, r3, r4, r5] = &mut self.cont;
        for i in 0..y.len() {
            let dy = self.y_new[i] - y[i];
            let bspl = h * k1[i] - dy;
            r1[i] = y[i];
            r2[i] = dy;
            r3[i] = bspl;
            r4[i] = dy - h * k7[i] - bspl;
            r5[i] =
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
    }

    /// Integrates from `(t0, y0)` to `t_end`, calling `on_step` after every
    /// accepted step. Returns the final time and state; the final time is
    /// short of `t_end` only when `on_step` breaks.
    pub fn integrate<F, S>(
        &mut self,
        mut f: F,
        t0: f64,
        y0: &[f64],
        t_end: f64,
        mut on_step: S,
    ) -> Result<(f64, Vec<f64>), Underflow>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        S: FnMut(&AcceptedStep<'_>) -> ControlFlow<()>,
    {
        let mut t = t0;
        let mut y = y0.to_vec();
        if t_end <= t0 {
            return Ok((t, y));
        }
        let ctl = self.control;
        let mut h = ctl.initial_step.min(ctl.max_step).min(t_end - t0);
        let mut prev_err: f64 = 1e-4;
        let mut last_rejected = false;

        f(t, &y, &mut self.k[0]);
        self.stats.evaluations += 1;

        loop {
            if h < ctl.min_step {
                return Err(Underflow { t, h, y });
            }
            let remaining = t_end - t;
            let last = h >= remaining * (1.0 - 1e-12);
            let h_try = if last { remaining } else { h };

            self.stages(&mut f, t, &y, h_try);
            let err = self.local_error(&y, h_try);

            // PI controller: h_new = h * safety * err^-a * prev^b, clamped.
            let fac11 = err.powf(0.2 - PI_BETA * 0.75);
            if err <= 1.0 {
                let mut fac = fac11 / prev_err.powf(PI_BETA) / SAFETY;
                fac = fac.clamp(1.0 / MAX_FACTOR, 1.0 / MIN_FACTOR);
                let mut h_new = h_try / fac;
                if last_rejected {
                    h_new = h_new.min(h_try);
                }
                prev_err = err.max(1e-4);
                last_rejected = false;
                self.stats.accepted += 1;

                self.fill_dense(&y, h_try);
                let t_new = if last { t_end } else { t + h_try };
                let flow = on_step(&AcceptedStep {
                    t_old: t,
                    t_new,
                    y_new: &self.y_new,
                    dy_new: &self.k[6],
                    cont: &self.cont,
                });
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                t = t_new;
                if last || flow.is_break() {
                    return Ok((t, y));
                }
                h = h_new.min(ctl.max_step);
            } else {
                let fac = (fac11 / SAFETY).min(1.0 / MIN_FACTOR);
                h = h_try / fac;
                last_rejected = true;
                self.stats.rejected += 1;
            }
        }
    }
}

/// One fixed step of size `h`: returns the fifth-order solution and the
/// embedded fourth-order solution. Used to check the tableau's orders.
pub fn fixed_step<F>(mut f: F, t: f64, y: &[f64], h: f64) -> (Vec<f64>, Vec<f64>)
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let ctl = StepControl {
        abs_tol: 1.0,
        rel_tol: 1.0,
        initial_step: h,
        max_step: h,
        min_step: 0.0,
    };
    let mut s = Dopri5::new(n, ctl);
    f(t, y, &mut s.k[0]);
    s.stages(&mut f, t, y, h);
    let [k1, _, k3, k4, k5, k6, k7] = &s.k;
    let y4 = (0..n)
        .map(|i| {
            s.y_new[i]
                - h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        })
        .collect();
    (s.y_new.clone(), y4)
}
