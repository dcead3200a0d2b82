use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use srgeo::checks::flow_config;
use srgeo::odeflow::integrate;
use srgeo::transport::relative_drift;
use srgeo::vertical::{pendulum_energy, pendulum_field, pendulum_regime, wrap_angle, DEFAULT_REGIME_TOL};
use srgeo::{PendulumRegime, PendulumState, UnimodularParams};

use super::{positive, Context};
use crate::args::{Format, PortraitArgs, SeedPoint};
use crate::config::pick;
use crate::error::CliError;
use crate::output::{emit, num, to_json, Csv, SvgPlot, SCHEMA_VERSION};

pub const CSV_HEADER: [&str; 7] = ["trajectory", "regime", "t", "gamma", "gamma_wrapped", "c", "energy"];
pub const DEFAULT_GRID: usize = 5;
pub const DEFAULT_T_FINAL: f64 = 10.0;
/// Output points per trajectory when no interval is given.
pub const DEFAULT_POINTS: f64 = 200.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PortraitOptions {
    pub params: UnimodularParams,
    pub r: f64,
    pub grid: usize,
    pub t_final: f64,
    pub c_max: f64,
    pub extra_seeds: Vec<SeedPoint>,
    pub sample_every: f64,
}

impl PortraitOptions {
    /// `c` at `γ = 0` on the separatrix, `2 r sqrt(2 chi)`.
    pub fn separatrix_height(params: UnimodularParams, r: f64) -> f64 {
        2.0 * r * (2.0 * params.chi()).sqrt()
    }

    /// Grid seeds, then the saddle `(π, 0)` and the separatrix crossing of
    /// `γ = 0`, then the extra seeds.
    pub fn seeds(&self) -> Vec<SeedPoint> {
        let mut v = Vec::new();
        for i in 0..self.grid {
            let gamma = -PI + 2.0 * PI * i as f64 / self.grid as f64;
            for j in 0..self.grid {
                let c = if self.grid == 1 {
                    0.0
                } else {
                    -self.c_max + 2.0 * self.c_max * j as f64 / (self.grid - 1) as f64
                };
                v.push(SeedPoint { gamma, c });
            }
        }
        v.push(SeedPoint { gamma: PI, c: 0.0 });
        let sep = Self::separatrix_height(self.params, self.r);
        if sep > 0.0 {
            v.push(SeedPoint { gamma: 0.0, c: sep });
        }
        v.extend(self.extra_seeds.iter().copied());
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortraitTrajectory {
    pub trajectory: usize,
    pub gamma0: f64,
    pub c0: f64,
    pub regime: PendulumRegime,
    /// Largest relative drift of the pendulum energy.
    pub energy_drift: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub t: Vec<f64>,
    pub gamma: Vec<f64>,
    pub c: Vec<f64>,
    pub energy: Vec<f64>,
}

fn trace(index: usize, seed: SeedPoint, opts: &PortraitOptions) -> PortraitTrajectory {
    let params = opts.params;
    let p0 = PendulumState::new(opts.r, seed.gamma, seed.c).expect("radius validated");
    let e0 = pendulum_energy(&p0, params);
    let field = |y: &[f64], dy: &mut [f64]| {
        let p = PendulumState::new(opts.r, y[1], y[2]).expect("radius validated");
        dy.copy_from_slice(pendulum_field(&p, params).as_slice());
    };
    let cfg = flow_config().with_sampling(opts.sample_every);
    let (traj, failure) = match integrate(field, &p0.to_array(), opts.t_final, &cfg) {
        Ok(t) => (t, None),
        Err(e) => (e.partial().cloned().unwrap_or_default(), Some(e.to_string())),
    };
    let mut out = PortraitTrajectory {
        trajectory: index,
        gamma0: seed.gamma,
        c0: seed.c,
        regime: pendulum_regime(&p0, params, DEFAULT_REGIME_TOL),
        energy_drift: 0.0,
        failure,
        t: traj.times.clone(),
        gamma: Vec::with_capacity(traj.len()),
        c: Vec::with_capacity(traj.len()),
        energy: Vec::with_capacity(traj.len()),
    };
    for y in &traj.states {
        let p = PendulumState::new(opts.r, y[1], y[2]).expect("radius validated");
        let e = pendulum_energy(&p, params);
        out.energy_drift = out.energy_drift.max(relative_drift(e, e0));
        out.gamma.push(y[1]);
        out.c.push(y[2]);
        out.energy.push(e);
    }
    out
}

/// Trajectories in seed order; seeds run in parallel.
pub fn portrait(opts: &PortraitOptions) -> Vec<PortraitTrajectory> {
    opts.seeds().par_iter().enumerate().map(|(i, &s)| trace(i, s, opts)).collect()
}

pub fn to_csv(trajs: &[PortraitTrajectory]) -> String {
    let mut csv = Csv::new(&CSV_HEADER);
    for tr in trajs {
        for k in 0..tr.t.len() {
            csv.row(&[
                tr.trajectory.to_string(),
                tr.regime.to_string(),
                num(tr.t[k]),
                num(tr.gamma[k]),
                num(wrap_angle(tr.gamma[k])),
                num(tr.c[k]),
                num(tr.energy[k]),
            ]);
        }
    }
    csv.finish()
}

fn color(regime: PendulumRegime) -> &'static str {
    match regime {
        PendulumRegime::Oscillation => "#1f77b4",
        PendulumRegime::Rotation => "#d62728",
        PendulumRegime::Separatrix => "#2ca02c",
        PendulumRegime::Degenerate => "#7f7f7f",
    }
}

/// `γ` reduced to `(-π, π]` against `c`, split where `γ` wraps.
pub fn to_svg(trajs: &[PortraitTrajectory], params: UnimodularParams, r: f64) -> String {
    let c_lim = trajs.iter().flat_map(|t| t.c.iter()).fold(0.0f64, |m, c| m.max(c.abs()));
    let c_lim = if c_lim > 0.0 { 1.05 * c_lim } else { 1.0 };
    let mut plot = SvgPlot::new((-PI, PI), (-c_lim, c_lim));
    for tr in trajs {
        let mut piece: Vec<(f64, f64)> = Vec::new();
        for (g, c) in tr.gamma.iter().zip(&tr.c) {
            let gw = wrap_angle(*g);
            if let Some(&(last, _)) = piece.last() {
                if (gw - last).abs() > PI {
                    plot.polyline(&piece, color(tr.regime));
                    piece.clear();
                }
            }
            piece.push((gw, *c));
        }
        plot.polyline(&piece, color(tr.regime));
    }
    plot.finish(
        "gamma (mod 2 pi)",
        "c",
        &format!("pendulum portrait, chi = {}, kappa = {}, r = {r}", params.chi(), params.kappa()),
    )
}

#[derive(Serialize)]
struct PortraitJson<'a> {
    schema_version: u32,
    chi: f64,
    kappa: f64,
    r: f64,
    trajectories: &'a [PortraitTrajectory],
}

fn resolve(ctx: &Context, a: &PortraitArgs) -> Result<PortraitOptions, CliError> {
    let f = &ctx.file;
    let params = ctx.params()?;
    let r = pick(a.r, f, "r")?.unwrap_or(1.0);
    if !(r > 0.0 && r.is_finite()) {
        return Err(CliError::Usage(format!("r must be positive (got {r})")));
    }
    let t_final = positive("t-final", pick(a.t_final, f, "t-final")?.unwrap_or(DEFAULT_T_FINAL))?;
    let sep = PortraitOptions::separatrix_height(params, r);
    let c_max = pick(a.c_max, f, "c-max")?.unwrap_or(if sep > 0.0 { 1.5 * sep } else { 1.0 });
    let extra_seeds = if a.seed_point.is_empty() { f.get_list("seed-point")? } else { a.seed_point.clone() };
    Ok(PortraitOptions {
        params,
        r,
        grid: pick(a.grid, f, "grid")?.unwrap_or(DEFAULT_GRID),
        t_final,
        c_max: positive("c-max", c_max)?,
        extra_seeds,
        sample_every: positive(
            "sample-every",
            pick(a.sample_every, f, "sample-every")?.unwrap_or(t_final / DEFAULT_POINTS),
        )?,
    })
}

pub(super) fn run(ctx: &Context, a: &PortraitArgs) -> Result<(), CliError> {
    let opts = resolve(ctx, a)?;
    let trajs = portrait(&opts);
    let body = match ctx.format(Format::Csv)? {
        Format::Csv => to_csv(&trajs),
        Format::Json => to_json(&PortraitJson {
            schema_version: SCHEMA_VERSION,
            chi: opts.params.chi(),
            kappa: opts.params.kappa(),
            r: opts.r,
            trajectories: &trajs,
        })?,
    };
    emit(ctx.out()?.as_deref(), &body)?;
    if let Some(svg) = pick(a.svg.clone(), &ctx.file, "svg")? {
        std::fs::write(svg, to_svg(&trajs, opts.params, opts.r))?;
    }
    match trajs.iter().find_map(|t| t.failure.as_ref()) {
        Some(msg) => Err(CliError::Runtime(format!("integration failed: {msg}"))),
        None => Ok(()),
    }
}
