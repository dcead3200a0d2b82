//! Explicit integrators for autonomous systems `y' = f(y)`.
//!
//! Two methods are provided: classical fixed-step RK4 and the adaptive
//! Dormand–Prince 5(4) pair with local extrapolation. Output is sampled by
//! landing steps exactly on the requested sample times, so recorded states
//! carry the integrator's own accuracy rather than an interpolant's.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed,
    #[serde(rename = "adaptive_54")]
    Adaptive54,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Step of the fixed-step method.
    pub step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Output sampling interval; `None` records every accepted step.
    pub sample_every: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Adaptive54,
            step: 1e-3,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 10_000_000,
            sample_every: None,
        }
    }
}

impl IntegratorConfig {
    pub fn adaptive(rel_tol: f64, abs_tol: f64) -> Self {
        Self { method: Method::Adaptive54, rel_tol, abs_tol, ..Self::default() }
    }

    pub fn rk4(step: f64) -> Self {
        Self { method: Method::Rk4Fixed, step, ..Self::default() }
    }

    pub fn with_sampling(mut self, every: f64) -> Self {
        self.sample_every = Some(every);
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive and finite (got {v})")))
            }
        };
        match self.method {
            Method::Rk4Fixed => positive("step", self.step)?,
            Method::Adaptive54 => {
                positive("rel_tol", self.rel_tol)?;
                positive("abs_tol", self.abs_tol)?;
            }
        }
        if let Some(dt) = self.sample_every {
            positive("sample_every", dt)?;
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Sampled solution: strictly increasing times with states of one dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: Stats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.times.iter().copied().zip(self.states.iter().map(Vec::as_slice))
    }

    fn push(&mut self, t: f64, y: &[f64]) {
        self.times.push(t);
        self.states.push(y.to_vec());
    }
}

#[derive(Debug, Clone, Error)]
pub enum IntegrateError {
    #[error("maximum number of steps ({max_steps}) exceeded at t = {t}")]
    MaxStepsExceeded { max_steps: usize, t: f64, partial: Trajectory },
    #[error("non-finite value in the vector field at t = {t}")]
    NonFinite { t: f64, partial: Trajectory },
    #[error("step size {step:e} fell below the minimum at t = {t}")]
    StepSizeUnderflow { t: f64, step: f64, partial: Trajectory },
    #[error("final time must be positive and finite (got {0})")]
    BadFinalTime(f64),
    #[error(transparent)]
    Config(#[from] Error),
}

impl IntegrateError {
    /// The samples recorded before the failure, if any.
    pub fn partial(&self) -> Option<&Trajectory> {
        match self {
            IntegrateError::MaxStepsExceeded { partial, .. }
            | IntegrateError::NonFinite { partial, .. }
            | IntegrateError::StepSizeUnderflow { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

/// Smallest admissible adaptive step relative to the horizon.
pub const MIN_STEP_FRACTION: f64 = 1e-14;
const SAFETY: f64 = 0.9;
const MAX_GROWTH: f64 = 5.0;
const MAX_SHRINK: f64 = 0.2;

// Dormand–Prince 5(4) tableau; the nodes are not needed for autonomous fields.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Workspace {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
    err: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
            err: vec![0.0; n],
        }
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Solves `y' = field(y)` on `[0, t_final]` from `y0`.
///
/// `field(y, dy)` writes the derivative into `dy`. The last recorded time is
/// exactly `t_final`.
pub fn integrate<F>(
    mut field: F,
    y0: &[f64],
    t_final: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError>
where
    F: FnMut(&[f64], &mut [f64]),
{
    config.validate()?;
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(IntegrateError::BadFinalTime(t_final));
    }
    let n = y0.len();
    let mut traj = Trajectory::default();
    let mut y = y0.to_vec();
    traj.push(0.0, &y);

    let targets = sample_targets(t_final, config.sample_every);
    let mut target_idx = 0;
    let mut ws = Workspace::new(n);
    let mut t = 0.0;

    field(&y, &mut ws.k[0]);
    traj.stats.evaluations += 1;
    if !all_finite(&ws.k[0]) {
        return Err(IntegrateError::NonFinite { t, partial: traj });
    }

    let min_step = MIN_STEP_FRACTION * t_final;
    let mut h = match config.method {
        Method::Rk4Fixed => config.step,
        Method::Adaptive54 => initial_step(&mut field, &y, &mut ws, t_final, config, &mut traj.stats),
    };
    let mut steps = 0usize;
    let mut last_rejected = false;

    while target_idx < targets.len() {
        if steps >= config.max_steps {
            return Err(IntegrateError::MaxStepsExceeded { max_steps: config.max_steps, t, partial: traj });
        }
        let target = targets[target_idx];
        let lands = t + h >= target - 1e-10 * h;
        let h_try = if lands { target - t } else { h };
        if !lands && config.method == Method::Adaptive54 && h < min_step {
            return Err(IntegrateError::StepSizeUnderflow { t, step: h, partial: traj });
        }
        steps += 1;

        match config.method {
            Method::Rk4Fixed => {
                if !rk4_step(&mut field, &y, h_try, &mut ws, &mut traj.stats) {
                    return Err(IntegrateError::NonFinite { t: t + h_try, partial: traj });
                }
                std::mem::swap(&mut y, &mut ws.y_new);
                traj.stats.accepted += 1;
            }
            Method::Adaptive54 => {
                if !dopri_step(&mut field, &y, h_try, &mut ws, &mut traj.stats) {
                    return Err(IntegrateError::NonFinite { t: t + h_try, partial: traj });
                }
                // error per unit step, which scales as h^4
                let err = error_norm(&ws.err, &y, &ws.y_new, config) / h_try;
                let mut fac = if err == 0.0 { MAX_GROWTH } else { SAFETY * err.powf(-0.25) };
                fac = fac.clamp(MAX_SHRINK, MAX_GROWTH);
                if err > 1.0 {
                    traj.stats.rejected += 1;
                    last_rejected = true;
                    h = h_try * fac.min(1.0);
                    if h < min_step {
                        return Err(IntegrateError::StepSizeUnderflow { t, step: h, partial: traj });
                    }
                    continue;
                }
                if last_rejected {
                    fac = fac.min(1.0);
                }
                last_rejected = false;
                let proposal = h_try * fac;
                h = if lands { h.min(proposal) } else { proposal };
                std::mem::swap(&mut y, &mut ws.y_new);
                // first-same-as-last: the seventh stage is f(y_new)
                ws.k.swap(0, 6);
                traj.stats.accepted += 1;
            }
        }

        if lands {
            t = target;
            traj.push(t, &y);
            target_idx += 1;
        } else {
            t += h_try;
            if config.sample_every.is_none() {
                traj.push(t, &y);
            }
        }
    }
    Ok(traj)
}

fn sample_targets(t_final: f64, every: Option<f64>) -> Vec<f64> {
    let mut targets = Vec::new();
    if let Some(dt) = every {
        let mut k = 1u64;
        loop {
            let tk = k as f64 * dt;
            if tk >= t_final * (1.0 - 1e-12) {
                break;
            }
            targets.push(tk);
            k += 1;
        }
    }
    targets.push(t_final);
    targets
}

fn rk4_step<F>(field: &mut F, y: &[f64], h: f64, ws: &mut Workspace, stats: &mut Stats) -> bool
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = y.len();
    field(y, &mut ws.k[0]);
    for i in 0..n {
        ws.tmp[i] = y[i] + 0.5 * h * ws.k[0][i];
    }
    field(&ws.tmp, &mut ws.k[1]);
    for i in 0..n {
        ws.tmp[i] = y[i] + 0.5 * h * ws.k[1][i];
    }
    field(&ws.tmp, &mut ws.k[2]);
    for i in 0..n {
        ws.tmp[i] = y[i] + h * ws.k[2][i];
    }
    field(&ws.tmp, &mut ws.k[3]);
    stats.evaluations += 4;
    for i in 0..n {
        ws.y_new[i] = y[i] + h / 6.0 * (ws.k[0][i] + 2.0 * ws.k[1][i] + 2.0 * ws.k[2][i] + ws.k[3][i]);
    }
    ws.k[..4].iter().all(|k| all_finite(k)) && all_finite(&ws.y_new)
}

/// One Dormand–Prince step; expects `ws.k[0] = f(y)`. Leaves the fifth-order
/// solution in `ws.y_new`, the error estimate in `ws.err` and `f(y_new)` in
/// `ws.k[6]`.
fn dopri_step<F>(field: &mut F, y: &[f64], h: f64, ws: &mut Workspace, stats: &mut Stats) -> bool
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = y.len();
    for s in 1..7 {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, a) in A[s].iter().enumerate().take(s) {
                acc += a * ws.k[j][i];
            }
            ws.tmp[i] = y[i] + h * acc;
        }
        field(&ws.tmp, &mut ws.k[s]);
        if !all_finite(&ws.k[s]) {
            stats.evaluations += s;
            return false;
        }
    }
    stats.evaluations += 6;
    // stage 7 was evaluated at the fifth-order solution
    ws.y_new.copy_from_slice(&ws.tmp);
    for i in 0..n {
        let mut e = 0.0;
        for (s, coeff) in E.iter().enumerate() {
            e += coeff * ws.k[s][i];
        }
        ws.err[i] = h * e;
    }
    all_finite(&ws.y_new)
}

fn error_norm(err: &[f64], y: &[f64], y_new: &[f64], config: &IntegratorConfig) -> f64 {
    let n = err.len().max(1) as f64;
    let sum: f64 = err
        .iter()
        .zip(y.iter().zip(y_new))
        .map(|(e, (a, b))| {
            let sc = config.abs_tol + config.rel_tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn weighted_rms(v: &[f64], y: &[f64], config: &IntegratorConfig) -> f64 {
    let n = v.len().max(1) as f64;
    let sum: f64 = v
        .iter()
        .zip(y)
        .map(|(x, yi)| (x / (config.abs_tol + config.rel_tol * yi.abs())).powi(2))
        .sum();
    (sum / n).sqrt()
}

/// Starting step from the local derivative scale (Hairer, Nørsett & Wanner, II.4).
fn initial_step<F>(
    field: &mut F,
    y: &[f64],
    ws: &mut Workspace,
    t_final: f64,
    config: &IntegratorConfig,
    stats: &mut Stats,
) -> f64
where
    F: FnMut(&[f64], &mut [f64]),
{
    let d0 = weighted_rms(y, y, config);
    let d1 = weighted_rms(&ws.k[0], y, config);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(t_final);
    for i in 0..y.len() {
        ws.tmp[i] = y[i] + h0 * ws.k[0][i];
    }
    field(&ws.tmp, &mut ws.k[1]);
    stats.evaluations += 1;
    for i in 0..y.len() {
        ws.err[i] = ws.k[1][i] - ws.k[0][i];
    }
    let d2 = weighted_rms(&ws.err, y, config) / h0;
    let dmax = d1.max(d2);
    let h1 = if !dmax.is_finite() || dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    (100.0 * h0).min(h1).min(t_final)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Empirical order of fixed-step RK4 from three runs with steps
/// `t_final / base_steps`, its half and its quarter:
/// `log2(|y_h - y_{h/2}| / |y_{h/2} - y_{h/4}|)`.
///
/// Returns `f64::INFINITY` when the differences vanish (exact integration).
pub fn convergence_order_with_steps<F>(mut field: F, y0: &[f64], t_final: f64, base_steps: usize) -> Result<f64, IntegrateError>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut finals = Vec::with_capacity(3);
    for refine in [1usize, 2, 4] {
        let cfg = IntegratorConfig::rk4(t_final / (base_steps * refine) as f64);
        let traj = integrate(&mut field, y0, t_final, &cfg)?;
        finals.push(traj.last_state().map(<[f64]>::to_vec).unwrap_or_default());
    }
    let coarse = max_abs_diff(&finals[0], &finals[1]);
    let fine = max_abs_diff(&finals[1], &finals[2]);
    if coarse == 0.0 || fine == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((coarse / fine).log2())
}

pub const DEFAULT_ORDER_STEPS: usize = 50;

pub fn convergence_order<F>(field: F, y0: &[f64], t_final: f64) -> Result<f64, IntegrateError>
where
    F: FnMut(&[f64], &mut [f64]),
{
    convergence_order_with_steps(field, y0, t_final, DEFAULT_ORDER_STEPS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn oscillator(y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = -y[0];
    }

    #[test]
    fn harmonic_oscillator_full_period() {
        let traj = integrate(oscillator, &[1.0, 0.0], 2.0 * PI, &IntegratorConfig::default()).unwrap();
        let y = traj.last_state().unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9, "{y:?}");
        assert_eq!(traj.last_time(), Some(2.0 * PI));
    }

    #[test]
    fn zero_field_is_constant() {
        let y0 = [0.3, -1.7, 2.5];
        for cfg in [IntegratorConfig::default(), IntegratorConfig::rk4(0.1).with_sampling(0.5)] {
            let traj = integrate(|_: &[f64], dy: &mut [f64]| dy.fill(0.0), &y0, 3.0, &cfg).unwrap();
            assert!(traj.states.iter().all(|s| s == &y0));
        }
    }

    #[test]
    fn sampling_lands_on_grid() {
        let cfg = IntegratorConfig::default().with_sampling(0.25);
        let traj = integrate(oscillator, &[1.0, 0.0], 1.1, &cfg).unwrap();
        assert_eq!(traj.times, vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.1]);
        for (t, y) in traj.iter() {
            assert!((y[0] - t.cos()).abs() < 1e-10);
        }
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rk4_step_count_matches_horizon() {
        let traj = integrate(oscillator, &[1.0, 0.0], 1.0, &IntegratorConfig::rk4(0.1)).unwrap();
        assert_eq!(traj.stats.accepted, 10);
        assert_eq!(traj.len(), 11);
    }

    #[test]
    fn max_steps_reports_partial() {
        let cfg = IntegratorConfig::rk4(0.01).with_max_steps(5);
        let err = integrate(oscillator, &[1.0, 0.0], 1.0, &cfg).unwrap_err();
        match &err {
            IntegrateError::MaxStepsExceeded { max_steps, partial, .. } => {
                assert_eq!(*max_steps, 5);
                assert_eq!(partial.len(), 6);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_field_is_reported() {
        // y' = y² blows up at t = 1
        let blowup = |y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0];
        let err = integrate(blowup, &[1.0], 2.0, &IntegratorConfig::rk4(0.01)).unwrap_err();
        assert!(matches!(err, IntegrateError::NonFinite { .. } ), "{err:?}");
        let err = integrate(blowup, &[1.0], 2.0, &IntegratorConfig::default()).unwrap_err();
        assert!(
            matches!(err, IntegrateError::StepSizeUnderflow { .. } | IntegrateError::NonFinite { .. }),
            "{err:?}"
        );
        assert!(err.partial().unwrap().last_time().unwrap() < 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            integrate(oscillator, &[1.0, 0.0], 0.0, &IntegratorConfig::default()),
            Err(IntegrateError::BadFinalTime(_))
        ));
        assert!(matches!(
            integrate(oscillator, &[1.0, 0.0], 1.0, &IntegratorConfig::rk4(-1.0)),
            Err(IntegrateError::Config(_))
        ));
    }

    #[test]
    fn deterministic() {
        let a = integrate(oscillator, &[0.3, 0.9], 7.0, &IntegratorConfig::default()).unwrap();
        let b = integrate(oscillator, &[0.3, 0.9], 7.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn adaptive_growth_is_bounded() {
        // exponential decay drives the step up quickly; check every ratio
        let cfg = IntegratorConfig::adaptive(1e-8, 1e-10);
        let traj = integrate(|y: &[f64], dy: &mut [f64]| dy[0] = -y[0], &[1.0], 20.0, &cfg).unwrap();
        let steps: Vec<f64> = traj.times.windows(2).map(|w| w[1] - w[0]).collect();
        for w in steps.windows(2).take(steps.len().saturating_sub(2)) {
            assert!(w[1] <= 5.0 * w[0] * (1.0 + 1e-12), "{w:?}");
        }
        assert!((traj.last_state().unwrap()[0] - (-20.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn rk4_order_on_oscillator() {
        let order = convergence_order(oscillator, &[1.0, 0.0], 2.0).unwrap();
        assert!((order - 4.0).abs() < 0.3, "{order}");
    }

    #[test]
    fn order_of_zero_field_is_infinite() {
        let order = convergence_order(|_: &[f64], dy: &mut [f64]| dy.fill(0.0), &[1.0], 1.0).unwrap();
        assert_eq!(order, f64::INFINITY);
    }
}
