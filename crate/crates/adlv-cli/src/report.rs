//! JSON shapes for the `dim` and `verify` outputs.

use std::collections::BTreeMap;

use adlv_core::{DimensionReport, SweepReport};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct DimDoc {
    pub m: i64,
    pub h: i64,
    pub mu: Vec<i64>,
    pub dim: i64,
    pub d_formula: i64,
    pub agrees: bool,
    pub esm_count: usize,
    pub histogram: BTreeMap<i64, usize>,
    pub top_types: Vec<Vec<i64>>,
}

impl DimDoc {
    pub fn from_report(r: &DimensionReport) -> Self {
        DimDoc {
            m: r.slope.m(),
            h: r.slope.h(),
            mu: r.mu.entries().to_vec(),
            dim: r.d,
            d_formula: r.d_formula,
            agrees: r.formula_agrees(),
            esm_count: r.esm_count,
            histogram: r.dim_histogram.clone(),
            top_types: r
                .top_strata
                .iter()
                .map(|e| e.base().type_of().entries().to_vec())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CellDoc {
    pub m: i64,
    pub h: i64,
    pub mu: Vec<i64>,
    pub d: i64,
    pub esm_count: usize,
    pub top_count: usize,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ViolationDoc {
    pub m: i64,
    pub h: i64,
    pub mu: Vec<i64>,
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepDoc {
    pub h_max: i64,
    pub m_max: i64,
    pub ok: bool,
    pub cells: Vec<CellDoc>,
    pub violations: Vec<ViolationDoc>,
    pub type_counts: Vec<(i64, i64, usize)>,
    pub esm_total: usize,
}

impl SweepDoc {
    pub fn from_report(h_max: i64, m_max: i64, r: &SweepReport) -> Self {
        SweepDoc {
            h_max,
            m_max,
            ok: r.ok(),
            cells: r
                .cells
                .iter()
                .map(|c| CellDoc {
                    m: c.slope.m(),
                    h: c.slope.h(),
                    mu: c.mu.entries().to_vec(),
                    d: c.d,
                    esm_count: c.esm_count,
                    top_count: c.top_count,
                    ok: c.ok,
                })
                .collect(),
            violations: r
                .violations
                .iter()
                .map(|v| ViolationDoc {
                    m: v.slope.m(),
                    h: v.slope.h(),
                    mu: v.mu.entries().to_vec(),
                    check: v.check.to_string(),
                    detail: v.detail.clone(),
                })
                .collect(),
            type_counts: r
                .type_counts
                .iter()
                .map(|&(s, n)| (s.m(), s.h(), n))
                .collect(),
            esm_total: r.esm_total,
        }
    }
}
