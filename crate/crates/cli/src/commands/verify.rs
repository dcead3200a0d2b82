use serde::Serialize;
use srgeo::checks::{all_pass, full_suite, Check};
use srgeo::{AlgebraClass, UnimodularParams};

use super::{Context, ParamsOut};
use crate::args::{Format, VerifyArgs};
use crate::config::pick;
use crate::error::CliError;
use crate::output::{emit, num, to_json, Csv, SCHEMA_VERSION};

pub const DEFAULT_SAMPLES: usize = 100;

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub params: ParamsOut,
    pub class: AlgebraClass,
    pub seed: u64,
    pub samples: usize,
    pub pass: bool,
    /// Names of the gating checks that failed.
    pub failed: Vec<String>,
    pub checks: Vec<Check>,
}

pub fn verify_report(params: UnimodularParams, seed: u64, samples: usize) -> VerifyReport {
    let checks = full_suite(params, seed, samples);
    VerifyReport {
        schema_version: SCHEMA_VERSION,
        params: params.into(),
        class: params.classify(),
        seed,
        samples,
        pass: all_pass(&checks),
        failed: checks.iter().filter(|c| c.gating && !c.pass).map(|c| c.name.clone()).collect(),
        checks,
    }
}

impl VerifyReport {
    pub fn to_csv(&self) -> String {
        let mut csv = Csv::new(&["name", "pass", "worst", "limit", "samples", "gating"]);
        for c in &self.checks {
            csv.row(&[
                c.name.clone(),
                c.pass.to_string(),
                num(c.worst),
                num(c.limit),
                c.samples.to_string(),
                c.gating.to_string(),
            ]);
        }
        csv.finish()
    }
}

pub(super) fn run(ctx: &Context, a: &VerifyArgs) -> Result<(), CliError> {
    let samples = pick(a.samples, &ctx.file, "samples")?.unwrap_or(DEFAULT_SAMPLES);
    if samples == 0 {
        return Err(CliError::Usage("samples must be at least 1".into()));
    }
    let report = verify_report(ctx.params()?, ctx.seed()?, samples);
    let body = match ctx.format(Format::Json)? {
        Format::Json => to_json(&report)?,
        Format::Csv => report.to_csv(),
    };
    emit(ctx.out()?.as_deref(), &body)?;
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Verification(report.failed.join(", ")))
    }
}
