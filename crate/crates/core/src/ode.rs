//! Embedded Dormand–Prince 5(4) integrator with step-size control.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive Dormand–Prince 5(4) stepper.
#[derive(Debug, Clone)]
pub struct DormandPrince {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl DormandPrince {
    pub fn new(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h_init: 1e-4,
            h_max: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t_end`, calling `on_step` after
    /// every accepted step. Returns the final state.
    pub fn integrate<const N: usize, F, S>(
        &self,
        mut f: F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        mut on_step: S,
    ) -> Result<[f64; N]>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        S: FnMut(f64, &[f64; N]),
    {
        let mut t = t0;
        let mut y = y0;
        let mut h = self.h_init.min(t_end - t0).min(self.h_max);
        let mut k = [[0.0; N]; 7];
        k[0] = f(t, &y);
        let mut steps = 0usize;
        while t < t_end {
            steps += 1;
            if steps > self.max_steps || h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::IntegrationDiverged { s: t });
            }
            let last = t + h >= t_end;
            if last {
                h = t_end - t;
            }
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        for i in 0..N {
                            ys[i] += h * a * kj[i];
                        }
                    }
                }
                k[s] = f(t + C[s] * h, &ys);
            }
            let mut y_new = y;
            for i in 0..N {
                for (s, ks) in k.iter().enumerate().take(6) {
                    y_new[i] += h * A[6][s] * ks[i];
                }
            }
            let mut err = 0.0;
            for i in 0..N {
                let mut e = 0.0;
                for s in 0..7 {
                    e += E[s] * k[s][i];
                }
                let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (h * e / scale).powi(2);
            }
            err = (err / N as f64).sqrt();
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if h < 1e-12 {
                    return Err(Error::IntegrationDiverged { s: t });
                }
                h *= 0.2;
                continue;
            }
            if err <= 1.0 {
                t = if last { t_end } else { t + h };
                y = y_new;
                // FSAL: the last stage is the derivative at the new point.
                k[0] = k[6];
                on_step(t, &y);
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(self.h_max);
        }
        Ok(y)
    }
}
