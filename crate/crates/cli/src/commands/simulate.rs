use serde::Serialize;
use srgeo::odeflow::{IntegrateError, Stats};
use srgeo::transport::{drifts, integrate_transport, integral_record, Drifts, Generator};
use srgeo::vertical::from_pendulum;
use srgeo::{
    AlgebraClass, IntegralRecord, IntegratorConfig, Method, PendulumState, TransportState, UnimodularParams,
    VerticalState,
};

use super::{positive, Context, ParamsOut};
use crate::args::{Format, GeneratorArg, MethodArg, SimulateArgs};
use crate::config::{pick, pick_enum};
use crate::error::CliError;
use crate::output::{emit, num, sibling_summary, to_json, Csv, SCHEMA_VERSION};

pub const CSV_HEADER: [&str; 12] = ["t", "h0", "h1", "h2", "H", "E", "Cl", "g0", "g1", "g2", "Cr", "casimir_residual"];
pub const DEFAULT_T_FINAL: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "chart", rename_all = "lowercase")]
pub enum InitialState {
    Vertical { h0: f64, h1: f64, h2: f64 },
    Pendulum { r: f64, gamma: f64, c: f64 },
}

impl InitialState {
    pub fn to_vertical(self) -> VerticalState {
        match self {
            InitialState::Vertical { h0, h1, h2 } => VerticalState::new(h0, h1, h2),
            InitialState::Pendulum { r, gamma, c } => {
                from_pendulum(&PendulumState::new(r, gamma, c).expect("radius validated"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateOptions {
    pub params: UnimodularParams,
    pub initial: InitialState,
    pub t_final: f64,
    pub integrator: IntegratorConfig,
    pub generator: Generator,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub message: String,
    /// Time reached before the failure.
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub schema_version: u32,
    pub params: ParamsOut,
    pub class: AlgebraClass,
    pub generator: Generator,
    pub initial_state: InitialState,
    pub t_final: f64,
    pub integrator: IntegratorConfig,
    pub rows: usize,
    pub stats: Stats,
    /// Largest `|x(t) - x(0)| / (1 + |x(0)|)` of each integral.
    pub max_relative_drift: Drifts,
    pub max_casimir_residual: f64,
    /// Largest entry of the transported adjoint matrix.
    pub max_transport_entry: f64,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub records: Vec<StateRecord>,
    pub summary: SimulateSummary,
}

impl SimulateOutcome {
    pub fn failed(&self) -> bool {
        self.summary.failure.is_some()
    }

    pub fn to_csv(&self) -> String {
        let mut csv = Csv::new(&CSV_HEADER);
        for r in &self.records {
            let [h0, h1, h2] = r.h;
            csv.row(&[
                num(r.record.t),
                num(h0),
                num(h1),
                num(h2),
                num(r.record.hamiltonian),
                num(r.record.energy),
                num(r.record.casimir_left),
                num(r.record.g0),
                num(r.record.g1),
                num(r.record.g2),
                num(r.record.casimir_right),
                num(r.record.casimir_residual),
            ]);
        }
        csv.finish()
    }
}

/// A record together with the momenta it was computed from.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StateRecord {
    pub h: [f64; 3],
    #[serde(flatten)]
    pub record: IntegralRecord,
}

pub fn simulate(opts: &SimulateOptions) -> SimulateOutcome {
    let h0 = opts.initial.to_vertical();
    let p = opts.params;
    let (times, states, stats, failure) =
        match integrate_transport(p, h0, opts.generator, opts.t_final, &opts.integrator) {
            Ok(tr) => (tr.times, tr.states, tr.stats, None),
            Err(e) => {
                let failure = Failure { message: e.to_string(), t: e.partial().and_then(|t| t.last_time()) };
                match e {
                    IntegrateError::MaxStepsExceeded { partial, .. }
                    | IntegrateError::NonFinite { partial, .. }
                    | IntegrateError::StepSizeUnderflow { partial, .. } => {
                        let states = partial.states.iter().map(|y| TransportState::from_flat(y)).collect();
                        (partial.times, states, partial.stats, Some(failure))
                    }
                    _ => (vec![], vec![], Stats::default(), Some(failure)),
                }
            }
        };
    let records: Vec<StateRecord> = times
        .iter()
        .zip(&states)
        .map(|(&t, s)| StateRecord { h: s.h.to_array(), record: integral_record(t, s, p) })
        .collect();
    let plain: Vec<IntegralRecord> = records.iter().map(|r| r.record).collect();
    let summary = SimulateSummary {
        schema_version: SCHEMA_VERSION,
        params: p.into(),
        class: p.classify(),
        generator: opts.generator,
        initial_state: opts.initial,
        t_final: opts.t_final,
        integrator: opts.integrator,
        rows: records.len(),
        stats,
        max_relative_drift: drifts(&plain),
        max_casimir_residual: plain.iter().map(|r| r.casimir_residual).fold(0.0, f64::max),
        max_transport_entry: states.iter().map(|s| s.m.amax()).fold(0.0, f64::max),
        status: if failure.is_some() { "failed" } else { "ok" },
        failure,
    };
    SimulateOutcome { records, summary }
}

fn resolve(ctx: &Context, a: &SimulateArgs) -> Result<SimulateOptions, CliError> {
    let f = &ctx.file;
    let params = ctx.params()?;
    let h = [pick(a.h0, f, "h0")?, pick(a.h1, f, "h1")?, pick(a.h2, f, "h2")?];
    let pend = [pick(a.r, f, "r")?, pick(a.gamma, f, "gamma")?, pick(a.c, f, "c")?];
    let initial = if pend.iter().any(Option::is_some) {
        if h.iter().any(Option::is_some) {
            return Err(CliError::Usage("give either h0/h1/h2 or r/gamma/c, not both".into()));
        }
        let r = pend[0].ok_or_else(|| CliError::Usage("pendulum chart needs --r".into()))?;
        PendulumState::new(r, 0.0, 0.0)?;
        InitialState::Pendulum { r, gamma: pend[1].unwrap_or(0.0), c: pend[2].unwrap_or(0.0) }
    } else {
        InitialState::Vertical { h0: h[0].unwrap_or(0.0), h1: h[1].unwrap_or(0.0), h2: h[2].unwrap_or(0.0) }
    };
    if !initial.to_vertical().is_finite() {
        return Err(CliError::Usage("initial state must be finite".into()));
    }
    let t_final = positive("t-final", pick(a.t_final, f, "t-final")?.unwrap_or(DEFAULT_T_FINAL))?;
    let mut integrator = IntegratorConfig::default();
    integrator.method = match pick_enum(a.method, f, "method")?.unwrap_or(MethodArg::Adaptive) {
        MethodArg::Rk4 => Method::Rk4Fixed,
        MethodArg::Adaptive => Method::Adaptive54,
    };
    integrator.step = pick(a.step, f, "step")?.unwrap_or(integrator.step);
    integrator.rel_tol = pick(a.rtol, f, "rtol")?.unwrap_or(integrator.rel_tol);
    integrator.abs_tol = pick(a.atol, f, "atol")?.unwrap_or(integrator.abs_tol);
    integrator.max_steps = pick(a.max_steps, f, "max-steps")?.unwrap_or(integrator.max_steps);
    integrator.sample_every = pick(a.sample_every, f, "sample-every")?;
    integrator.validate()?;
    let generator = match pick_enum(a.generator, f, "generator")?.unwrap_or(GeneratorArg::Hamiltonian) {
        GeneratorArg::Hamiltonian => Generator::Hamiltonian,
        GeneratorArg::Energy => Generator::Energy,
        GeneratorArg::Casimir => Generator::CasimirLeft,
    };
    Ok(SimulateOptions { params, initial, t_final, integrator, generator })
}

pub(super) fn run(ctx: &Context, a: &SimulateArgs) -> Result<(), CliError> {
    let opts = resolve(ctx, a)?;
    let out = ctx.out()?;
    let summary_path = pick(a.summary.clone(), &ctx.file, "summary")?.or_else(|| out.as_deref().map(sibling_summary));
    let outcome = simulate(&opts);
    let body = match ctx.format(Format::Csv)? {
        Format::Csv => outcome.to_csv(),
        Format::Json => to_json(&outcome.records)?,
    };
    emit(out.as_deref(), &body)?;
    let summary = to_json(&outcome.summary)?;
    match summary_path {
        Some(p) => std::fs::write(p, summary)?,
        None => eprint!("{summary}"),
    }
    match &outcome.summary.failure {
        Some(f) => Err(CliError::Runtime(format!("integration failed: {}", f.message))),
        None => Ok(()),
    }
}
