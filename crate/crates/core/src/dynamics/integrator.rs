//! Dormand–Prince 5(4) explicit Runge–Kutta with PI step-size control and
//! 4th-order dense output.

use crate::error::{Error, Result};

/// A real-valued first-order system y' = f(t, y) of dimension `N`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N], dy: &mut [f64; N]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Step sizes below this are treated as stiffness (s).
    pub h_min: f64,
    /// Upper bound on any single step (s); infinite by default.
    pub h_max: f64,
    pub max_steps: u64,
}

impl Default for StepperOptions {
    fn default() -> Self {
        StepperOptions { rel_tol: 1e-8, abs_tol: 1e-10, h_min: 1e-18, h_max: f64::INFINITY, max_steps: 500_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub steps: u64,
    pub rejections: u64,
    pub rhs_evals: u64,
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

// b − b̂, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Integrator state for one trajectory. Owns its stage buffers.
pub struct Dopri5<'a, S: OdeSystem<N>, const N: usize> {
    sys: &'a S,
    opts: StepperOptions,
    t: f64,
    y: [f64; N],
    h: f64,
    // ln of the previous accepted error norm (floored at 1e-4)
    ln_err_old: f64,
    k: [[f64; N]; 7],
    y_stage: [f64; N],
    y_new: [f64; N],
    // Last accepted step spans [t_old, t_old + h_old]. Its dense output is
    // rebuilt on demand from the stage buffers, which an accepted step
    // leaves intact (see `interpolate`).
    t_old: f64,
    h_old: f64,
    stats: StepStats,
}

impl<'a, S: OdeSystem<N>, const N: usize> Dopri5<'a, S, N> {
    pub fn new(sys: &'a S, t0: f64, y0: &[f64; N], opts: StepperOptions) -> Result<Self> {
        if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
            return Err(Error::domain("tolerances must be positive"));
        }
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t: t0 });
        }
        let mut stepper = Dopri5 {
            sys,
            opts,
            t: t0,
            y: *y0,
            h: 0.0,
            ln_err_old: (1e-4f64).ln(),
            k: [[0.0; N]; 7],
            y_stage: [0.0; N],
            y_new: [0.0; N],
            t_old: t0,
            h_old: 0.0,
            stats: StepStats::default(),
        };
        sys.rhs(t0, &stepper.y, &mut stepper.k[0]);
        stepper.stats.rhs_evals += 1;
        stepper.h = stepper.initial_step();
        Ok(stepper)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    fn weight(&self, y: f64) -> f64 {
        self.opts.abs_tol + self.opts.rel_tol * y.abs()
    }

    /// Starting step from the size of y and y' (Hairer, Nørsett & Wanner).
    fn initial_step(&mut self) -> f64 {
        let n = N as f64;
        let (mut d0, mut d1) = (0.0, 0.0);
        for i in 0..N {
            let sk = self.weight(self.y[i]);
            d0 += (self.y[i] / sk).powi(2);
            d1 += (self.k[0][i] / sk).powi(2);
        }
        let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
        let h0 = if d0 <= 1e-10 || d1 <= 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(self.opts.h_max);

        for i in 0..N {
            self.y_stage[i] = self.y[i] + h0 * self.k[0][i];
        }
        self.sys.rhs(self.t + h0, &self.y_stage, &mut self.k[1]);
        self.stats.rhs_evals += 1;
        let mut d2 = 0.0;
        for i in 0..N {
            d2 += ((self.k[1][i] - self.k[0][i]) / self.weight(self.y[i])).powi(2);
        }
        let d2 = (d2 / n).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(self.opts.h_max)
    }

    /// Take one accepted step, never passing `t_stop`.
    pub fn step(&mut self, t_stop: f64) -> Result<()> {
        loop {
            if self.stats.steps + self.stats.rejections >= self.opts.max_steps {
                return Err(Error::StepLimit { t: self.t, steps: self.stats.steps });
            }
            let mut h = self.h.min(self.opts.h_max);
            let last = self.t + h >= t_stop;
            if last {
                h = t_stop - self.t;
            }
            if (h < self.opts.h_min && !last) || self.t + h == self.t {
                return Err(Error::Stiffness { t: self.t, h });
            }
            let t = self.t;
            let y = &self.y;
            let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
            let ys = &mut self.y_stage;

            // Coefficients pre-scaled by h: one multiply fewer per term.
            let (b21, b31, b32) = (h * A21, h * A31, h * A32);
            let (b41, b42, b43) = (h * A41, h * A42, h * A43);
            let (b51, b52, b53, b54) = (h * A51, h * A52, h * A53, h * A54);
            let (b61, b62, b63, b64, b65) = (h * A61, h * A62, h * A63, h * A64, h * A65);
            let (b71, b73, b74, b75, b76) = (h * A71, h * A73, h * A74, h * A75, h * A76);
            let (e1, e3, e4, e5, e6, e7) = (h * E1, h * E3, h * E4, h * E5, h * E6, h * E7);

            for i in 0..N {
                ys[i] = y[i] + b21 * k1[i];
            }
            self.sys.rhs(t + C2 * h, ys, k2);
            for i in 0..N {
                ys[i] = y[i] + b31 * k1[i] + b32 * k2[i];
            }
            self.sys.rhs(t + C3 * h, ys, k3);
            for i in 0..N {
                ys[i] = y[i] + b41 * k1[i] + b42 * k2[i] + b43 * k3[i];
            }
            self.sys.rhs(t + C4 * h, ys, k4);
            for i in 0..N {
                ys[i] = y[i] + b51 * k1[i] + b52 * k2[i] + b53 * k3[i] + b54 * k4[i];
            }
            self.sys.rhs(t + C5 * h, ys, k5);
            for i in 0..N {
                ys[i] = y[i] + b61 * k1[i] + b62 * k2[i] + b63 * k3[i] + b64 * k4[i] + b65 * k5[i];
            }
            self.sys.rhs(t + h, ys, k6);
            let y_new = &mut self.y_new;
            for i in 0..N {
                y_new[i] = y[i] + b71 * k1[i] + b73 * k3[i] + b74 * k4[i] + b75 * k5[i] + b76 * k6[i];
            }
            self.sys.rhs(t + h, y_new, k7);
            self.stats.rhs_evals += 6;

            let mut err_sq = 0.0;
            for i in 0..N {
                let e = e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i];
                let sk = self.opts.abs_tol + self.opts.rel_tol * y[i].abs().max(y_new[i].abs());
                err_sq += (e / sk) * (e / sk);
            }
            let err_sq = err_sq / N as f64;

            // A non-finite y_new makes its weight, and so err_sq, non-finite.
            if !err_sq.is_finite() {
                if h <= self.opts.h_min {
                    return Err(Error::Divergence { t });
                }
                self.stats.rejections += 1;
                self.h = h * FAC_MIN;
                continue;
            }

            // The controller runs on the critical path of every step, so it
            // works with ln(err) taken from the squared norm directly and
            // one exp.
            let ln_err = 0.5 * err_sq.max(f64::MIN_POSITIVE).ln();
            let exponent = 0.2 - BETA * 0.75;
            if err_sq <= 1.0 {
                let growth = (SAFETY * (BETA * self.ln_err_old - exponent * ln_err).exp()).clamp(FAC_MIN, FAC_MAX);
                let h_next = h * growth;
                self.ln_err_old = ln_err.max((1e-4f64).ln());

                self.t_old = t;
                self.h_old = h;

                std::mem::swap(&mut self.y, &mut self.y_new);
                std::mem::swap(k1, k7);
                self.t = if last { t_stop } else { t + h };
                self.stats.steps += 1;
                if !last || h_next < self.h {
                    self.h = h_next;
                }
                return Ok(());
            }

            self.stats.rejections += 1;
            self.h = h * (SAFETY * (-exponent * ln_err).exp()).max(FAC_MIN);
            if self.h < self.opts.h_min {
                return Err(Error::Stiffness { t, h: self.h });
            }
        }
    }

    /// Step until `t_stop` is reached exactly.
    pub fn advance_to(&mut self, t_stop: f64) -> Result<()> {
        while self.t < t_stop {
            self.step(t_stop)?;
        }
        Ok(())
    }

    /// Dense-output interpolant of the last accepted step at `t`.
    ///
    /// After an accepted step `y_new` holds the step's start value, `k[6]`
    /// its first stage (swapped out by FSAL), `k[0]` the derivative at the
    /// end, and `k[2..6]` the intermediate stages. Only meaningful after a
    /// successful `step`.
    pub fn interpolate(&self, t: f64, out: &mut [f64; N]) {
        if self.h_old == 0.0 {
            out.copy_from_slice(&self.y);
            return;
        }
        let h = self.h_old;
        let theta = (t - self.t_old) / h;
        let theta1 = 1.0 - theta;
        let k = &self.k;
        for i in 0..N {
            let y0 = self.y_new[i];
            let ydiff = self.y[i] - y0;
            let bspl = h * k[6][i] - ydiff;
            let c3 = ydiff - h * k[0][i] - bspl;
            let c4 = h * (D1 * k[6][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[0][i]);
            out[i] = y0 + theta * (ydiff + theta1 * (bspl + theta * (c3 + theta1 * c4)));
        }
    }

    /// Integrate to `t_end`, recording the state at each time in `samples`
    /// (ascending, within [t0, t_end]) via dense output.
    pub fn solve(&mut self, t_end: f64, samples: &[f64]) -> Result<Vec<[f64; N]>> {
        let mut out = Vec::with_capacity(samples.len());
        let mut next = 0;
        while next < samples.len() && samples[next] <= self.t {
            out.push(self.y);
            next += 1;
        }
        let mut buf = [0.0; N];
        while self.t < t_end {
            self.step(t_end)?;
            while next < samples.len() && samples[next] <= self.t {
                if samples[next] == self.t {
                    out.push(self.y);
                } else {
                    self.interpolate(samples[next], &mut buf);
                    out.push(buf);
                }
                next += 1;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator {
        omega: f64,
    }

    impl OdeSystem<2> for Oscillator {
        fn rhs(&self, _t: f64, y: &[f64; 2], dy: &mut [f64; 2]) {
            dy[0] = y[1];
            dy[1] = -self.omega * self.omega * y[0];
        }
    }

    fn opts(rel_tol: f64) -> StepperOptions {
        StepperOptions { rel_tol, abs_tol: rel_tol * 1e-3, ..Default::default() }
    }

    #[test]
    fn oscillator_one_period() {
        let sys = Oscillator { omega: 2.0 };
        let period = std::f64::consts::PI;
        for tol in [1e-4, 1e-6, 1e-8] {
            let mut s = Dopri5::new(&sys, 0.0, &[1.0, 0.0], opts(tol)).unwrap();
            s.advance_to(period).unwrap();
            assert_eq!(s.t(), period);
            let amp_err = (s.y()[0] - 1.0).abs().max((s.y()[1]).abs() / 2.0);
            assert!(amp_err < tol * 10.0, "tol {tol}: {amp_err}");
        }
    }

    #[test]
    fn dense_output_accuracy() {
        let sys = Oscillator { omega: 1.0 };
        let ts: Vec<f64> = (0..=50).map(|i| i as f64 * 0.2).collect();
        let mut s = Dopri5::new(&sys, 0.0, &[1.0, 0.0], opts(1e-9)).unwrap();
        let ys = s.solve(10.0, &ts).unwrap();
        assert_eq!(ys.len(), ts.len());
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-7, "t={t}");
            assert!((y[1] + t.sin()).abs() < 1e-7, "t={t}");
        }
        // dense output uses far fewer steps than samples would force
        assert!(s.stats().steps < 50 * 10);
    }

    #[test]
    fn exponential_decay() {
        struct Decay;
        impl OdeSystem<1> for Decay {
            fn rhs(&self, _t: f64, y: &[f64; 1], dy: &mut [f64; 1]) {
                dy[0] = -3.0 * y[0];
            }
        }
        let mut s = Dopri5::new(&Decay, 0.0, &[2.0], opts(1e-10)).unwrap();
        s.advance_to(1.5).unwrap();
        assert!((s.y()[0] - 2.0 * (-4.5f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn blow_up_is_reported() {
        struct Blowup;
        impl OdeSystem<1> for Blowup {
            fn rhs(&self, _t: f64, y: &[f64; 1], dy: &mut [f64; 1]) {
                dy[0] = y[0] * y[0];
            }
        }
        // y = 1/(1 − t) explodes at t = 1
        let mut s = Dopri5::new(&Blowup, 0.0, &[1.0], opts(1e-8)).unwrap();
        let r = s.advance_to(2.0);
        assert!(matches!(r, Err(Error::Stiffness { .. }) | Err(Error::Divergence { .. })), "{r:?}");
    }

    #[test]
    fn step_limit() {
        let sys = Oscillator { omega: 1.0 };
        let o = StepperOptions { max_steps: 10, ..opts(1e-10) };
        let mut s = Dopri5::new(&sys, 0.0, &[1.0, 0.0], o).unwrap();
        assert!(matches!(s.advance_to(100.0), Err(Error::StepLimit { .. })));
    }

    #[test]
    fn rejects_bad_input() {
        let sys = Oscillator { omega: 1.0 };
        let zero_tol = StepperOptions { rel_tol: 0.0, ..opts(1e-6) };
        assert!(Dopri5::new(&sys, 0.0, &[1.0, 0.0], zero_tol).is_err());
        assert!(matches!(Dopri5::new(&sys, 0.0, &[f64::NAN, 0.0], opts(1e-6)), Err(Error::Divergence { .. })));
    }
}
