use std::fmt::Write as _;

use serde::Serialize;
use srgeo::algebra::{killing_form, killing_signature, Signature};
use srgeo::{AlgebraClass, UnimodularParams};

use super::{Context, ParamsOut};
use crate::args::Format;
use crate::error::CliError;
use crate::output::{emit, to_json, SCHEMA_VERSION};

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub schema_version: u32,
    pub params: ParamsOut,
    pub class: AlgebraClass,
    pub description: &'static str,
    /// `c[i][j][k]` with `[f_i, f_j] = Σ_k c[i][j][k] f_k`.
    pub structure_constants: [[[f64; 3]; 3]; 3],
    pub killing_form: [[f64; 3]; 3],
    pub killing_signature: Signature,
}

pub fn classify_report(params: UnimodularParams) -> ClassifyReport {
    let k = killing_form(params);
    ClassifyReport {
        schema_version: SCHEMA_VERSION,
        params: params.into(),
        class: params.classify(),
        description: params.classify().description(),
        structure_constants: *params.structure_constants().tensor(),
        killing_form: std::array::from_fn(|i| std::array::from_fn(|j| k[(i, j)])),
        killing_signature: killing_signature(params),
    }
}

impl ClassifyReport {
    pub fn to_text(&self) -> String {
        let c = &self.structure_constants;
        let k = &self.killing_form;
        let mut s = String::new();
        let _ = writeln!(s, "{} ({})", self.class, self.description);
        let _ = writeln!(s, "chi = {}, kappa = {}", self.params.chi, self.params.kappa);
        let _ = writeln!(s, "[f2, f1] = {} f0", c[2][1][0]);
        let _ = writeln!(s, "[f1, f0] = {} f2", c[1][0][2]);
        let _ = writeln!(s, "[f2, f0] = {} f1", c[2][0][1]);
        let _ = writeln!(s, "killing form = diag({}, {}, {})", k[0][0], k[1][1], k[2][2]);
        let _ = writeln!(s, "killing signature = {}", self.killing_signature);
        s
    }
}

pub(super) fn run(ctx: &Context) -> Result<(), CliError> {
    let report = classify_report(ctx.params()?);
    let text = match ctx.global.format.or(ctx.file.get_enum("format")?) {
        Some(Format::Json) => to_json(&report)?,
        Some(Format::Csv) => {
            let sig = report.killing_signature;
            format!(
                "chi,kappa,class,negative,zero,positive\n{},{},{},{},{},{}\n",
                report.params.chi, report.params.kappa, report.class, sig.negative, sig.zero, sig.positive
            )
        }
        None => report.to_text(),
    };
    emit(ctx.out()?.as_deref(), &text)
}
