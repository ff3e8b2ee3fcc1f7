//! Parameter sweeps over the second marginal at a fixed `P(X, Z)`.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::tightened_pns_bounds;
use crate::error::{Error, Result};
use crate::maxent::maxent_scm;
use crate::polytope::build_polytope;
use crate::trial::{BinaryMarginal, PROB_TOL};

/// Widths below this leave the normalized MaxEnt position undefined.
pub const WIDTH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedMarginal {
    pub p00: f64,
    pub p01: f64,
    pub p_x0: f64,
}

/// `steps` evenly spaced values from `start` to `stop`, both included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..self.steps)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / n as f64)
            .collect()
    }

    fn validate(&self, name: &str, interior: bool) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidConfig(format!(
                "{name}: steps must be at least 2"
            )));
        }
        for v in [self.start, self.stop] {
            let ok = if interior {
                v > 0.0 && v < 1.0
            } else {
                (0.0..=1.0).contains(&v)
            };
            if !ok {
                let span = if interior { "(0, 1)" } else { "[0, 1]" };
                return Err(Error::InvalidConfig(format!(
                    "{name}: {v} is outside {span}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOutput {
    Entropy,
    LambdaRangeWidth,
    MaxentLambdaNormalized,
}

fn all_outputs() -> BTreeSet<SweepOutput> {
    [
        SweepOutput::Entropy,
        SweepOutput::LambdaRangeWidth,
        SweepOutput::MaxentLambdaNormalized,
    ]
    .into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub mx: FixedMarginal,
    pub pp00: Range,
    pub pp01: Range,
    pub p_y0: Range,
    #[serde(default = "all_outputs")]
    pub outputs: BTreeSet<SweepOutput>,
}

impl SweepConfig {
    pub fn from_json(payload: &[u8]) -> Result<Self> {
        let cfg: Self =
            serde_json::from_slice(payload).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.pp00.validate("pp00", false)?;
        self.pp01.validate("pp01", false)?;
        self.p_y0.validate("p_y0", true)?;
        self.marginal().map(|_| ())
    }

    pub fn marginal(&self) -> Result<BinaryMarginal> {
        BinaryMarginal::new(self.mx.p00, self.mx.p01, self.mx.p_x0)
            .map_err(|e| Error::InvalidConfig(format!("mx: {e}")))
    }

    pub fn wants(&self, o: SweepOutput) -> bool {
        self.outputs.contains(&o)
    }
}

/// One grid cell. Numeric fields are `None` for incompatible cells or when
/// not requested.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p_y0: f64,
    pub pp00: f64,
    pub pp01: f64,
    pub compatible: bool,
    pub entropy_bits: Option<f64>,
    pub lambda_min_restricted: Option<f64>,
    pub lambda_max: Option<f64>,
    pub maxent_lambda: Option<f64>,
    pub maxent_lambda_normalized: Option<f64>,
    pub lambda_range_width: Option<f64>,
}

impl SweepRow {
    /// True on the slices where a conditional of `P(Y, Z)` is 0 or 1.
    pub fn on_degenerate_slice(&self) -> bool {
        [self.pp00, self.pp01]
            .iter()
            .any(|&p| p <= PROB_TOL || p >= 1.0 - PROB_TOL)
    }
}

fn cell(
    cfg: &SweepConfig,
    mx: &BinaryMarginal,
    p_y0: f64,
    pp00: f64,
    pp01: f64,
) -> Result<SweepRow> {
    let mut row = SweepRow {
        p_y0,
        pp00,
        pp01,
        compatible: false,
        entropy_bits: None,
        lambda_min_restricted: None,
        lambda_max: None,
        maxent_lambda: None,
        maxent_lambda_normalized: None,
        lambda_range_width: None,
    };
    let my = BinaryMarginal::new(pp00, pp01, p_y0)?;
    let bounds = match tightened_pns_bounds(mx, &my) {
        Ok(b) => b,
        Err(Error::Incompatible { .. }) => return Ok(row),
        Err(e) => return Err(e),
    };
    row.compatible = true;
    row.lambda_min_restricted = Some(bounds.lambda.lo);
    row.lambda_max = Some(bounds.lambda.hi);
    let width = bounds.lambda.width();
    if cfg.wants(SweepOutput::LambdaRangeWidth) {
        row.lambda_range_width = Some(width);
    }
    if cfg.wants(SweepOutput::Entropy) || cfg.wants(SweepOutput::MaxentLambdaNormalized) {
        let me = maxent_scm(&build_polytope(mx, &my))?;
        if cfg.wants(SweepOutput::Entropy) {
            row.entropy_bits = Some(me.entropy);
        }
        row.maxent_lambda = Some(me.lambda_x);
        if cfg.wants(SweepOutput::MaxentLambdaNormalized) && width > WIDTH_TOL {
            row.maxent_lambda_normalized = Some((bounds.lambda.hi - me.lambda_x) / width);
        }
    }
    Ok(row)
}

/// Evaluates every cell, `p_y0` outermost and `pp01` innermost. Cells run in
/// parallel; the output order is fixed by the loop indices.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mx = cfg.marginal()?;
    let mut cells = Vec::new();
    for p_y0 in cfg.p_y0.values() {
        for pp00 in cfg.pp00.values() {
            for pp01 in cfg.pp01.values() {
                cells.push((p_y0, pp00, pp01));
            }
        }
    }
    cells
        .par_iter()
        .map(|&(p_y0, pp00, pp01)| cell(cfg, &mx, p_y0, pp00, pp01))
        .collect()
}

/// Mean MaxEnt entropy over all compatible cells and over those on the
/// degenerate slices. `None` when a group is empty.
pub fn entropy_means(rows: &[SweepRow]) -> (Option<f64>, Option<f64>) {
    let mean = |it: Vec<f64>| (!it.is_empty()).then(|| it.iter().sum::<f64>() / it.len() as f64);
    let all: Vec<f64> = rows.iter().filter_map(|r| r.entropy_bits).collect();
    let degenerate: Vec<f64> = rows
        .iter()
        .filter(|r| r.on_degenerate_slice())
        .filter_map(|r| r.entropy_bits)
        .collect();
    (mean(all), mean(degenerate))
}
