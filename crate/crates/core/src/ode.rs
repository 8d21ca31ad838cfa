//! Fixed-step RK4 with a step-halving error estimate.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Nominal step `h > 0`.
    pub step: f64,
    /// Largest accepted difference between one full step and two half steps;
    /// larger estimates subdivide the step.
    pub max_error: f64,
    /// States beyond this Euclidean norm count as blow-up.
    pub max_norm: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            step: 1e-3,
            max_error: 1e-6,
            max_norm: 1e8,
        }
    }
}

impl IntegratorConfig {
    pub fn with_step(step: f64) -> Self {
        IntegratorConfig {
            step,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.step > 0.0 && self.step.is_finite() && self.max_error > 0.0 {
            Ok(())
        } else {
            Err(Error::shape(format!(
                "integrator needs step > 0 and max_error > 0, got {self:?}"
            )))
        }
    }
}

/// Accepted states at the nominal grid times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn end(&self) -> &[f64] {
        self.states.last().expect("trajectory holds its initial state")
    }

    /// Plain-text rows `t, u_1, .., u_n`, every `stride`-th state plus the last.
    pub fn dump(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let mut out = String::new();
        let last = self.times.len().saturating_sub(1);
        for (k, (t, u)) in self.times.iter().zip(&self.states).enumerate() {
            if k % stride != 0 && k != last {
                continue;
            }
            let _ = write!(out, "{t}");
            for x in u {
                let _ = write!(out, ", {x}");
            }
            out.push('\n');
        }
        out
    }
}

fn axpy(x: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(xi, ki)| xi + a * ki).collect()
}

/// One classical RK4 step.
pub fn rk4_step<F>(f: &F, t: f64, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let k1 = f(t, x)?;
    let k2 = f(t + 0.5 * h, &axpy(x, 0.5 * h, &k1))?;
    let k3 = f(t + 0.5 * h, &axpy(x, 0.5 * h, &k2))?;
    let k4 = f(t + h, &axpy(x, h, &k3))?;
    Ok(x.iter()
        .enumerate()
        .map(|(i, xi)| xi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

fn finite_within(x: &[f64], max_norm: f64) -> bool {
    x.iter().all(|v| v.is_finite()) && x.iter().map(|v| v * v).sum::<f64>().sqrt() <= max_norm
}

/// Advances from `t` to `t + h`, subdividing while the halving estimate
/// exceeds the configured error.
fn advance<F>(f: &F, t: f64, x: &[f64], h: f64, cfg: &IntegratorConfig, floor: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let collapse = || Error::StepCollapse { t };
    let full = rk4_step(f, t, x, h).map_err(|_| collapse())?;
    let mid = rk4_step(f, t, x, 0.5 * h).map_err(|_| collapse())?;
    let half = rk4_step(f, t + 0.5 * h, &mid, 0.5 * h).map_err(|_| collapse())?;
    let err = full.iter().zip(&half).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if err.is_finite() && err <= cfg.max_error && finite_within(&full, cfg.max_norm) {
        return Ok(full);
    }
    if !finite_within(x, cfg.max_norm) || 0.5 * h < floor {
        return Err(collapse());
    }
    let mid = advance(f, t, x, 0.5 * h, cfg, floor)?;
    advance(f, t + 0.5 * h, &mid, 0.5 * h, cfg, floor)
}

/// Integrates `dx/dt = f(t, x)` from `t0` to `t1` on the grid of step `cfg.step`.
pub fn integrate<F>(f: F, t0: f64, t1: f64, x0: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    let span = (t1 - t0).abs();
    let steps = ((span / cfg.step).round() as usize).max(1);
    let h = (t1 - t0) / steps as f64;
    let floor = 1e-12 * span.max(1.0);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(t0);
    states.push(x0.to_vec());
    let mut x = x0.to_vec();
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        if span > 0.0 {
            x = advance(&f, t, &x, h, cfg, floor)?;
        }
        times.push(if k + 1 == steps { t1 } else { t0 + (k + 1) as f64 * h });
        states.push(x.clone());
    }
    Ok(Trajectory { times, states })
}
