use rayon::prelude::*;
use serde::Serialize;
use srgeo::checks::{flow_config, sample_states, transport_flows};
use srgeo::independence::{jacobian_at_identity, numerical_rank, poisson_matrix_p, to_dynamic, DEFAULT_RANK_TOL};
use srgeo::sampling::{Sampler, DEFAULT_BOX};
use srgeo::transport::Generator;
use srgeo::{AlgebraClass, UnimodularParams};

use super::{positive, Context};
use crate::args::{Format, ScanArgs, Span};
use crate::config::pick;
use crate::error::CliError;
use crate::output::{emit, num, to_json, Csv};

pub const CSV_HEADER: [&str; 7] =
    ["chi", "kappa", "class", "max_drift", "casimir_residual", "rankJ_generic", "rankP_generic"];
pub const DEFAULT_GRID: usize = 3;
pub const DEFAULT_SAMPLES: usize = 10;
pub const DEFAULT_T_FINAL: f64 = 10.0;
const DEFAULT_CHI: Span = Span { lo: 0.0, hi: 2.0 };
const DEFAULT_KAPPA: Span = Span { lo: -2.0, hi: 2.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub chi: Span,
    pub kappa: Span,
    pub grid: usize,
    pub samples: usize,
    pub t_final: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub chi: f64,
    pub kappa: f64,
    pub class: AlgebraClass,
    /// Worst relative drift of `H, E, C_l, g0, g1, g2` over the cell's
    /// H-flows; `NaN` if an integration failed.
    pub max_drift: f64,
    /// Worst `|C_l - C_r| / (1 + |C_l(0)|)` over the same flows.
    pub casimir_residual: f64,
    #[serde(rename = "rankJ_generic")]
    pub rank_j_generic: usize,
    #[serde(rename = "rankP_generic")]
    pub rank_p_generic: usize,
}

fn cell(params: UnimodularParams, index: u64, opts: &ScanOptions) -> ScanRow {
    let stream = 0x5000 + 2 * index;
    let states = sample_states(opts.seed, stream, opts.samples, DEFAULT_BOX);
    let sum = transport_flows(params, Generator::Hamiltonian, &states, opts.t_final, &flow_config());
    let failed = sum.failures > 0;
    let mut s = Sampler::stream(opts.seed, stream + 1);
    let h = loop {
        let h = s.state(DEFAULT_BOX);
        if (h.h0 * h.h1).abs() > 0.01 {
            break h;
        }
    };
    let g = s.vec3(DEFAULT_BOX);
    ScanRow {
        chi: params.chi(),
        kappa: params.kappa(),
        class: params.classify(),
        max_drift: if failed { f64::NAN } else { sum.drifts.max_all() },
        casimir_residual: if failed { f64::NAN } else { sum.drifts.casimir_identity },
        rank_j_generic: numerical_rank(&to_dynamic(&jacobian_at_identity(&h, params)), DEFAULT_RANK_TOL),
        rank_p_generic: numerical_rank(&to_dynamic(&poisson_matrix_p(&g, params)), DEFAULT_RANK_TOL),
    }
}

/// Rows in chi-major order; cells run in parallel.
pub fn scan(opts: &ScanOptions) -> Result<Vec<ScanRow>, CliError> {
    let mut cells = Vec::new();
    for chi in opts.chi.points(opts.grid) {
        for kappa in opts.kappa.points(opts.grid) {
            cells.push(UnimodularParams::new(chi, kappa)?);
        }
    }
    Ok(cells.par_iter().enumerate().map(|(i, &p)| cell(p, i as u64, opts)).collect())
}

pub fn rows_to_csv(rows: &[ScanRow]) -> String {
    let mut csv = Csv::new(&CSV_HEADER);
    for r in rows {
        csv.row(&[
            num(r.chi),
            num(r.kappa),
            r.class.to_string(),
            num(r.max_drift),
            num(r.casimir_residual),
            r.rank_j_generic.to_string(),
            r.rank_p_generic.to_string(),
        ]);
    }
    csv.finish()
}

fn resolve(ctx: &Context, a: &ScanArgs) -> Result<ScanOptions, CliError> {
    let f = &ctx.file;
    let chi = pick(a.chi_range, f, "chi-range")?.unwrap_or(DEFAULT_CHI);
    if chi.lo < 0.0 {
        return Err(CliError::Usage(format!("chi must be ≥ 0 (range {chi})")));
    }
    let grid = pick(a.grid, f, "grid")?.unwrap_or(DEFAULT_GRID);
    if grid == 0 {
        return Err(CliError::Usage("grid must be at least 1".into()));
    }
    Ok(ScanOptions {
        chi,
        kappa: pick(a.kappa_range, f, "kappa-range")?.unwrap_or(DEFAULT_KAPPA),
        grid,
        samples: pick(a.samples, f, "samples")?.unwrap_or(DEFAULT_SAMPLES),
        t_final: positive("t-final", pick(a.t_final, f, "t-final")?.unwrap_or(DEFAULT_T_FINAL))?,
        seed: ctx.seed()?,
    })
}

pub(super) fn run(ctx: &Context, a: &ScanArgs) -> Result<(), CliError> {
    let rows = scan(&resolve(ctx, a)?)?;
    let body = match ctx.format(Format::Csv)? {
        Format::Csv => rows_to_csv(&rows),
        Format::Json => to_json(&rows)?,
    };
    emit(ctx.out()?.as_deref(), &body)
}
