use super::RealVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<RealVector>,
}

impl Trajectory {
    pub fn last(&self) -> &RealVector {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// Uniform grid covering `t_span` with spacing at most `step`.
pub fn time_grid(t_span: (f64, f64), step: f64) -> Result<Vec<f64>> {
    let (t0, t1) = t_span;
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::Parameter(format!("step must be positive, got {step}")));
    }
    if !t0.is_finite() || !t1.is_finite() || t1 < t0 {
        return Err(Error::Parameter(format!(
            "time span must be finite and ordered, got ({t0}, {t1})"
        )));
    }
    let steps = ((t1 - t0) / step - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return Ok(vec![t0]);
    }
    let h = (t1 - t0) / steps as f64;
    Ok((0..=steps)
        .map(|k| if k == steps { t1 } else { t0 + k as f64 * h })
        .collect())
}

/// Fixed-step classical Runge–Kutta (order 4) for `x' = f(t, x)`.
pub fn integrate_ode<F>(f: F, x0: &RealVector, t_span: (f64, f64), step: f64) -> Result<Trajectory>
where
    F: Fn(f64, &RealVector) -> RealVector,
{
    let times = time_grid(t_span, step)?;
    let mut states = Vec::with_capacity(times.len());
    let mut x = x0.clone();
    states.push(x.clone());
    for w in times.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let k1 = f(t, &x);
        let k2 = f(t + 0.5 * h, &(&x + &k1 * (0.5 * h)));
        let k3 = f(t + 0.5 * h, &(&x + &k2 * (0.5 * h)));
        let k4 = f(t + h, &(&x + &k3 * h));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states })
}
