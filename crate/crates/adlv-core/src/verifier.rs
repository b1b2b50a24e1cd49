//! Sweep driver: computes `dim X_μ(b)⁰ = max |𝒱|`, checks it against the
//! closed formula, and verifies the structural theorems exhaustively at desk
//! scale.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::coweight::Coweight;
use crate::error::Error;
use crate::extended::{enumerate_all_esm, propdim_bijection, ExtendedSemiModule};
use crate::semimodule::{all_types, d_formula, d_lattice, SemiModule, Slope};

/// Everything the sweep knows about one `(slope, μ)` cell.
#[derive(Debug, Clone)]
pub struct DimensionReport {
    pub slope: Slope,
    pub mu: Coweight,
    /// the dimension: maximum of `|𝒱|` over all extended semi-modules
    pub d: i64,
    /// the closed formula value; agreement with `d` is the theorem under test
    pub d_formula: i64,
    pub esm_count: usize,
    /// `|𝒱|`-value ↦ number of strata
    pub dim_histogram: BTreeMap<i64, usize>,
    /// all strata attaining the maximum, canonically ordered
    pub top_strata: Vec<ExtendedSemiModule>,
}

impl DimensionReport {
    /// False exactly when the computed maximum deviates from the formula —
    /// a finding, not an input error.
    pub fn formula_agrees(&self) -> bool {
        self.d == self.d_formula
    }
}

fn report_from_esms(
    slope: Slope,
    mu: &Coweight,
    esms: Vec<ExtendedSemiModule>,
) -> Result<DimensionReport, Error> {
    let df = d_formula(slope, mu)?;
    let mut histogram: BTreeMap<i64, usize> = BTreeMap::new();
    for esm in &esms {
        *histogram.entry(esm.v_set().len() as i64).or_insert(0) += 1;
    }
    let d = histogram.keys().max().copied().unwrap_or(0);
    let esm_count = esms.len();
    let top_strata: Vec<ExtendedSemiModule> = esms
        .into_iter()
        .filter(|e| e.v_set().len() as i64 == d)
        .collect();
    Ok(DimensionReport {
        slope,
        mu: mu.clone(),
        d,
        d_formula: df,
        esm_count,
        dim_histogram: histogram,
        top_strata,
    })
}

/// Enumerates the strata for `(slope, μ)` and reports the dimension data.
pub fn dimension(slope: Slope, mu: &Coweight) -> Result<DimensionReport, Error> {
    let esms = crate::extended::enumerate_esm(slope, mu)?;
    report_from_esms(slope, mu, esms)
}

/// The maximizing strata only. Their count is a lower bound for the number
/// of `J(F)`-orbits of irreducible components.
pub fn top_strata(slope: Slope, mu: &Coweight) -> Result<Vec<ExtendedSemiModule>, Error> {
    Ok(dimension(slope, mu)?.top_strata)
}

/// One theorem violation found by the sweep, with the offending object
/// spelled out.
#[derive(Debug, Clone)]
pub struct SweepViolation {
    pub slope: Slope,
    pub mu: Coweight,
    pub check: &'static str,
    pub detail: String,
}

/// Per-cell summary emitted by [`verify_theorems`].
#[derive(Debug, Clone)]
pub struct CellSummary {
    pub slope: Slope,
    pub mu: Coweight,
    pub d: i64,
    pub esm_count: usize,
    pub top_count: usize,
    pub ok: bool,
}

/// Aggregate result of the desk-scale sweep.
#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    pub cells: Vec<CellSummary>,
    pub violations: Vec<SweepViolation>,
    /// per slope: number of types (= normalized semi-modules)
    pub type_counts: Vec<(Slope, usize)>,
    pub esm_total: usize,
}

impl SweepReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustively verifies, for every coprime `(m, h)` with `h ≤ h_max`,
/// `m ≤ m_max`, and every dominant `μ ≥ 0` with `Σμ = m`:
///
/// 1. `max |𝒱| = d_formula = d_lattice`,
/// 2. `|𝒱| ≤ d_formula` for every stratum,
/// 3. minuscule `μ` ⇒ every stratum cyclic,
/// 4. the type/semi-module round trips on the whole slope,
/// 5. the bijection image property behind the dimension count for every
///    semi-module of dominant type.
///
/// Violations never abort the sweep; they are collected and reported.
pub fn verify_theorems(h_max: i64, m_max: i64) -> SweepReport {
    let mut report = SweepReport::default();
    for h in 1..=h_max {
        for m in 1..=m_max {
            let slope = match Slope::new(m, h) {
                Ok(s) => s,
                Err(_) => continue,
            };
            sweep_slope(slope, &mut report);
        }
    }
    report
}

fn sweep_slope(slope: Slope, report: &mut SweepReport) {
    let (m, h) = (slope.m(), slope.h());
    let types = all_types(slope);
    report.type_counts.push((slope, types.len()));

    // (4) round trips and (5) bijection image, per semi-module
    for ty in &types {
        let base = match SemiModule::from_type(slope, ty) {
            Ok(b) => b,
            Err(e) => {
                report.violations.push(SweepViolation {
                    slope,
                    mu: ty.clone(),
                    check: "from_type",
                    detail: format!("enumerated type rejected: {e}"),
                });
                continue;
            }
        };
        if &base.type_of() != ty {
            report.violations.push(SweepViolation {
                slope,
                mu: ty.clone(),
                check: "type round trip",
                detail: format!("type_of(from_type({ty})) = {}", base.type_of()),
            });
        }
        if base.type_of().is_dominant() {
            check_propdim(slope, &base, report);
        }
    }

    // enumerate every stratum of the slope once, then group by mu
    let mut by_mu: BTreeMap<Coweight, Vec<ExtendedSemiModule>> = BTreeMap::new();
    let esms = enumerate_all_esm(slope);
    report.esm_total += esms.len();
    for esm in esms {
        by_mu.entry(esm.mu().clone()).or_default().push(esm);
    }

    // every dominant mu >= 0 with sum m has at least the cyclic stratum on
    // from_type(mu), so iterating partitions is exhaustive
    for mu in dominant_coweights(m, h) {
        let esms = by_mu.remove(&mu).unwrap_or_default();
        let cell = check_cell(slope, &mu, esms, report);
        report.cells.push(cell);
    }
    // leftovers would mean an esm whose derived mu is not a valid cell
    for (mu, esms) in by_mu {
        report.violations.push(SweepViolation {
            slope,
            mu,
            check: "stray mu",
            detail: format!("{} strata with mu outside the sweep grid", esms.len()),
        });
    }
}

fn check_cell(
    slope: Slope,
    mu: &Coweight,
    esms: Vec<ExtendedSemiModule>,
    report: &mut SweepReport,
) -> CellSummary {
    let mut ok = true;
    let df = d_formula(slope, mu).expect("sweep grid is valid");
    let dl = d_lattice(slope, mu).expect("sweep grid is valid");
    if df != dl {
        ok = false;
        report.violations.push(SweepViolation {
            slope,
            mu: mu.clone(),
            check: "d_formula = d_lattice",
            detail: format!("formula {df}, lattice count {dl}"),
        });
    }
    let mut max_v = 0i64;
    let minuscule = mu.is_minuscule().unwrap_or(false);
    for esm in &esms {
        let v = esm.v_set().len() as i64;
        max_v = max_v.max(v);
        if v > df {
            ok = false;
            report.violations.push(SweepViolation {
                slope,
                mu: mu.clone(),
                check: "|V| <= d",
                detail: format!("stratum {esm} has |V| = {v} > d = {df}"),
            });
        }
        if minuscule && !esm.is_cyclic() {
            ok = false;
            report.violations.push(SweepViolation {
                slope,
                mu: mu.clone(),
                check: "minuscule => cyclic",
                detail: format!("non-cyclic stratum {esm}"),
            });
        }
    }
    if esms.is_empty() || max_v != df {
        ok = false;
        report.violations.push(SweepViolation {
            slope,
            mu: mu.clone(),
            check: "max |V| = d",
            detail: format!("max |V| = {max_v}, d = {df}, strata = {}", esms.len()),
        });
    }
    let top_count = esms
        .iter()
        .filter(|e| e.v_set().len() as i64 == max_v)
        .count();
    CellSummary {
        slope,
        mu: mu.clone(),
        d: max_v,
        esm_count: esms.len(),
        top_count,
        ok,
    }
}

fn check_propdim(slope: Slope, base: &SemiModule, report: &mut SweepReport) {
    let ty = base.type_of();
    match propdim_bijection(base) {
        Ok(map) => {
            let b0 = base.min_gen();
            let mut image: Vec<i64> = map.iter().map(|&(_, v)| v).collect();
            image.sort_unstable();
            let before = image.len();
            image.dedup();
            let missing: Vec<i64> = (b0 + 1..base.conductor())
                .filter(|&a| !base.contains(a))
                .collect();
            if image.len() != before || image != missing {
                report.violations.push(SweepViolation {
                    slope,
                    mu: ty,
                    check: "propdim bijection",
                    detail: format!("image {image:?} vs missing {missing:?}"),
                });
            } else if map.len() as i64 != d_formula(slope, &ty).expect("dominant type") {
                report.violations.push(SweepViolation {
                    slope,
                    mu: ty.clone(),
                    check: "propdim cardinality",
                    detail: format!("|V| = {} on type {ty}", map.len()),
                });
            }
        }
        Err(e) => report.violations.push(SweepViolation {
            slope,
            mu: ty,
            check: "propdim bijection",
            detail: format!("{e}"),
        }),
    }
}

/// All dominant coweights `μ ≥ 0` of length `h` with `Σμ = m`, ascending
/// lexicographically.
pub fn dominant_coweights(m: i64, h: i64) -> Vec<Coweight> {
    let mut out = Vec::new();
    let mut acc = Vec::with_capacity(h as usize);
    fn rec(rest: i64, slots: i64, lo: i64, acc: &mut Vec<i64>, out: &mut Vec<Coweight>) {
        if slots == 0 {
            if rest == 0 {
                out.push(Coweight::new(acc.clone()));
            }
            return;
        }
        // remaining entries are >= lo and non-decreasing
        for v in lo..=rest {
            if v * slots > rest {
                break;
            }
            acc.push(v);
            rec(rest - v, slots - 1, v, acc, out);
            acc.pop();
        }
    }
    rec(m, h, 0, &mut acc, &mut out);
    out
}
