//! The analytical pipeline: cone lattice, one region per element, exact
//! integrals, sum.

use rayon::prelude::*;
use serde::Serialize;

use crate::cone::{
    adjacent_cone, cone_contains, cone_sub_elements, coni_facets, Cone, StateMatrix,
};
use crate::error::{Error, Result};
use crate::integrate::region_integral;
use crate::linalg::{gram_schmidt, Vector};
use crate::oracle::{ir_num, DEFAULT_SAMPLE_BUDGET};
use crate::region::build_region;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub tol: Tolerances,
    pub max_states: usize,
    pub max_elements: usize,
    pub max_simplices: usize,
    /// Sample budget for the numerical fallback.
    pub sample_budget: u128,
    /// Smallest per-axis resolution the numerical fallback may use.
    pub min_fallback_n: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            max_states: 10,
            max_elements: 100_000,
            max_simplices: 1_000_000,
            sample_budget: DEFAULT_SAMPLE_BUDGET,
            min_fallback_n: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytical,
    ClosedForm,
    NumericalFallback,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Analytical => "analytical",
            Method::ClosedForm => "closed-form",
            Method::NumericalFallback => "numerical-fallback",
        }
    }
}

/// Volume and integral of the region served by one cone element.
#[derive(Debug, Clone, Serialize)]
pub struct RegionRecord {
    /// Ray indices of the element within the cone.
    pub element: Vec<usize>,
    /// Matrix column (first origin) of each element ray.
    pub columns: Vec<usize>,
    pub dimension: usize,
    pub volume: f64,
    pub integral: f64,
    pub vertex_count: usize,
    pub simplex_count: usize,
}

impl RegionRecord {
    pub fn is_positive(&self) -> bool {
        self.volume > 0.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationResult {
    pub states: usize,
    pub neurons: usize,
    pub ir: f64,
    pub irn: f64,
    pub output_volume: f64,
    pub method: Method,
    pub extreme_ray_columns: Vec<usize>,
    pub redundant_columns: Vec<usize>,
    pub zero_columns: Vec<usize>,
    pub regions: Vec<RegionRecord>,
    pub diagnostics: Vec<String>,
}

struct Columns {
    extreme: Vec<usize>,
    redundant: Vec<usize>,
    zero: Vec<usize>,
}

fn classify_columns(c: &StateMatrix, cone: Option<&Cone>) -> Columns {
    let Some(cone) = cone else {
        return Columns {
            extreme: Vec::new(),
            redundant: Vec::new(),
            zero: (0..c.neurons()).collect(),
        };
    };
    let mut extreme: Vec<usize> = cone.ray_origins().iter().map(|o| o[0]).collect();
    let mut redundant: Vec<usize> = cone.redundant_generators().to_vec();
    redundant.extend(
        cone.ray_origins()
            .iter()
            .flat_map(|o| o[1..].iter().copied()),
    );
    extreme.sort_unstable();
    redundant.sort_unstable();
    Columns {
        extreme,
        redundant,
        zero: cone.zero_generators().to_vec(),
    }
}

fn normalized(ir: f64, m: usize) -> f64 {
    (ir / (m as f64 / 3.0)).clamp(0.0, 1.0)
}

fn corner(m: usize, mask: u64) -> Vector {
    Vector::from_fn(m, |i, _| ((mask >> i) & 1) as f64)
}

fn covers_hypercube(cone: &Cone, tol: &Tolerances) -> bool {
    let m = cone.dim();
    (1..1u64 << m).all(|mask| cone_contains(&corner(m, mask), cone.rays(), tol))
}

fn element_columns(cone: &Cone, element: &[usize]) -> Vec<usize> {
    element.iter().map(|&r| cone.ray_origins()[r][0]).collect()
}

fn analytical_regions(cone: &Cone, cfg: &EvalConfig) -> Result<(Vec<RegionRecord>, usize)> {
    let count = cone.element_count();
    if count > cfg.max_elements {
        return Err(Error::BudgetExceeded {
            what: "cone elements",
            value: count as u128,
            limit: cfg.max_elements as u128,
        });
    }
    let elements: Vec<(usize, &Vec<usize>)> = cone.all_elements().collect();
    let built: Vec<(RegionRecord, usize)> = elements
        .par_iter()
        .map(|&(dim, element)| -> Result<(RegionRecord, usize)> {
            let adj = adjacent_cone(element, cone, &cfg.tol)?;
            let region = build_region(&adj, &cfg.tol, cfg.max_simplices)?;
            let basis = gram_schmidt(&adj.element_rays)?;
            let integral = region_integral(&region.simplices, &basis);
            Ok((
                RegionRecord {
                    element: element.clone(),
                    columns: element_columns(cone, element),
                    dimension: dim,
                    volume: region.volume,
                    integral,
                    vertex_count: region.vertices.len(),
                    simplex_count: region.simplices.len(),
                },
                region.skipped_systems,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let simplices: usize = built.iter().map(|(r, _)| r.simplex_count).sum();
    if simplices > cfg.max_simplices {
        return Err(Error::BudgetExceeded {
            what: "simplices",
            value: simplices as u128,
            limit: cfg.max_simplices as u128,
        });
    }
    let skipped = built.iter().map(|(_, s)| s).sum();
    Ok((built.into_iter().map(|(r, _)| r).collect(), skipped))
}

fn fallback_resolution(m: usize, cfg: &EvalConfig) -> Result<usize> {
    let mut n = (cfg.sample_budget as f64).powf(1.0 / m as f64).floor() as usize;
    while n > 1
        && (n as u128)
            .checked_pow(m as u32)
            .is_none_or(|t| t > cfg.sample_budget)
    {
        n -= 1;
    }
    while (n as u128 + 1)
        .checked_pow(m as u32)
        .is_some_and(|t| t <= cfg.sample_budget)
    {
        n += 1;
    }
    let n = n.max(cfg.min_fallback_n);
    let total = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if total > cfg.sample_budget {
        return Err(Error::BudgetExceeded {
            what: "fallback quadrature samples",
            value: total,
            limit: cfg.sample_budget,
        });
    }
    Ok(n)
}

/// Representation error of `c` and the accompanying diagnostics.
pub fn evaluate(c: &StateMatrix, cfg: &EvalConfig) -> Result<EvaluationResult> {
    evaluate_inner(c, cfg, false)
}

fn evaluate_inner(
    c: &StateMatrix,
    cfg: &EvalConfig,
    force_regions: bool,
) -> Result<EvaluationResult> {
    let m = c.states();
    if m > cfg.max_states {
        return Err(Error::BudgetExceeded {
            what: "states",
            value: m as u128,
            limit: cfg.max_states as u128,
        });
    }
    let mut result = EvaluationResult {
        states: m,
        neurons: c.neurons(),
        ir: 0.0,
        irn: 0.0,
        output_volume: 0.0,
        method: Method::ClosedForm,
        extreme_ray_columns: Vec::new(),
        redundant_columns: Vec::new(),
        zero_columns: Vec::new(),
        regions: Vec::new(),
        diagnostics: Vec::new(),
    };

    let cone = match coni_facets(c, &cfg.tol) {
        Ok(cone) => Some(cone_sub_elements(cone)),
        Err(Error::AllZeroMatrix) => None,
        Err(e) => return Err(e),
    };
    let cols = classify_columns(c, cone.as_ref());
    result.extreme_ray_columns = cols.extreme;
    result.redundant_columns = cols.redundant;
    result.zero_columns = cols.zero;

    let Some(cone) = cone else {
        // Only the zero output is reachable: integrate ‖d‖² over the cube.
        result.ir = m as f64 / 3.0;
        result.irn = 1.0;
        result.output_volume = 0.0;
        result.regions.push(RegionRecord {
            element: Vec::new(),
            columns: Vec::new(),
            dimension: 0,
            volume: 1.0,
            integral: result.ir,
            vertex_count: 1 << m.min(20),
            simplex_count: 0,
        });
        result.diagnostics.push("all columns are zero".into());
        return Ok(result);
    };

    if m == 1 {
        // A positive column reaches all of [0, 1].
        result.ir = 0.0;
        result.irn = 0.0;
        result.output_volume = 1.0;
        return Ok(result);
    }

    if !cone.is_full_dimensional() {
        let n = fallback_resolution(m, cfg)?;
        let q = ir_num(c, n, cfg.sample_budget)?;
        result.method = Method::NumericalFallback;
        result.ir = q.ir_num;
        result.irn = normalized(q.ir_num, m);
        result.output_volume = 0.0;
        result.diagnostics.push(format!(
            "cone rank {} < {m}: midpoint quadrature with {n} samples per axis",
            cone.rank()
        ));
        return Ok(result);
    }

    if !force_regions && covers_hypercube(&cone, &cfg.tol) {
        result.output_volume = 1.0;
        result
            .diagnostics
            .push("cone contains every hypercube vertex".into());
        return Ok(result);
    }

    let (regions, skipped) = analytical_regions(&cone, cfg)?;
    result.method = Method::Analytical;
    result.ir = regions
        .iter()
        .map(|r| r.integral)
        .fold(0.0, |acc, x| acc + x);
    result.irn = normalized(result.ir, m);
    let covered: f64 = regions.iter().map(|r| r.volume).fold(0.0, |acc, x| acc + x);
    result.output_volume = (1.0 - covered).clamp(0.0, 1.0);
    let degenerate = regions.iter().filter(|r| !r.is_positive()).count();
    if degenerate > 0 {
        result
            .diagnostics
            .push(format!("{degenerate} region(s) with zero volume"));
    }
    if skipped > 0 {
        result.diagnostics.push(format!(
            "{skipped} singular or ill-conditioned face/cube intersection system(s) skipped"
        ));
    }
    result.regions = regions;
    Ok(result)
}

/// Volume of `coni(C) ∩ [0,1]^m`.
pub fn output_volume(c: &StateMatrix, cfg: &EvalConfig) -> Result<f64> {
    Ok(evaluate(c, cfg)?.output_volume)
}

/// Per-element region breakdown, including zero-volume regions. Unlike
/// [`evaluate`], full-rank cones always go through the region pipeline even
/// when they cover the whole hypercube.
pub fn region_report(c: &StateMatrix, cfg: &EvalConfig) -> Result<Vec<RegionRecord>> {
    Ok(evaluate_inner(c, cfg, true)?.regions)
}
