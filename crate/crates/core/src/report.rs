//! Machine-readable evaluation reports.

use std::fmt::Write as _;

use serde::Serialize;

use crate::evaluator::{EvaluationResult, Method};
use crate::oracle::ConvergenceRow;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct RegionEntry {
    pub element_columns: Vec<usize>,
    pub dimension: usize,
    pub volume: f64,
    pub integral: f64,
    pub positive: bool,
}

/// JSON shape of an evaluation. Column indices are 0-based.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub states: usize,
    pub neurons: usize,
    pub ir: f64,
    pub irn: f64,
    pub output_volume: f64,
    pub method: Method,
    pub extreme_ray_columns: Vec<usize>,
    pub redundant_columns: Vec<usize>,
    pub zero_columns: Vec<usize>,
    pub regions: Vec<RegionEntry>,
    pub diagnostics: Vec<String>,
}

impl From<&EvaluationResult> for EvaluationReport {
    fn from(r: &EvaluationResult) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            states: r.states,
            neurons: r.neurons,
            ir: r.ir,
            irn: r.irn,
            output_volume: r.output_volume,
            method: r.method,
            extreme_ray_columns: r.extreme_ray_columns.clone(),
            redundant_columns: r.redundant_columns.clone(),
            zero_columns: r.zero_columns.clone(),
            regions: r
                .regions
                .iter()
                .map(|g| RegionEntry {
                    element_columns: g.columns.clone(),
                    dimension: g.dimension,
                    volume: g.volume,
                    integral: g.integral,
                    positive: g.is_positive(),
                })
                .collect(),
            diagnostics: r.diagnostics.clone(),
        }
    }
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("ir,irn,output_volume,method,extreme_ray_columns,redundant_columns\n");
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            self.ir,
            self.irn,
            self.output_volume,
            self.method.as_str(),
            join(&self.extreme_ray_columns),
            join(&self.redundant_columns)
        );
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states x neurons : {} x {}", self.states, self.neurons);
        let _ = writeln!(out, "Ir               : {:.10}", self.ir);
        let _ = writeln!(out, "IrN              : {:.10}", self.irn);
        let _ = writeln!(out, "output volume    : {:.10}", self.output_volume);
        let _ = writeln!(out, "method           : {}", self.method.as_str());
        let _ = writeln!(out, "extreme columns  : {:?}", self.extreme_ray_columns);
        let _ = writeln!(out, "redundant columns: {:?}", self.redundant_columns);
        if !self.zero_columns.is_empty() {
            let _ = writeln!(out, "zero columns     : {:?}", self.zero_columns);
        }
        for r in &self.regions {
            let _ = writeln!(
                out,
                "  region {:?} (dim {}): volume {:.10} integral {:.10}{}",
                r.element_columns,
                r.dimension,
                r.volume,
                r.integral,
                if r.positive { "" } else { " [empty]" }
            );
        }
        for d in &self.diagnostics {
            let _ = writeln!(out, "note: {d}");
        }
        out
    }
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("N,ir_num,abs_error\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.n, r.ir_num, r.abs_error);
    }
    out
}
