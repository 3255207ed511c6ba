//! Regeneration of the published MChGSP design tables and a row-by-row diff
//! against the printed values.
//!
//! The printed numbers live in `data/published_tables.json`. Each row is
//! recomputed twice: the OC columns are re-evaluated at the printed plan, and
//! the plan itself is re-derived with the designer.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::designer::{design, DesignRequest, PlanDesign, PlanKind, SearchBounds, TieBreak};
use crate::error::{domain, Error, Result};
use crate::oc::{oc_mchgsp, PlanParams};

pub const DEFAULT_TOLERANCE: f64 = 1e-3;

const PUBLISHED_JSON: &str = include_str!("../data/published_tables.json");

#[derive(Debug, Clone, Deserialize)]
pub struct PublishedTables {
    pub version: u32,
    pub r: u32,
    pub alpha: f64,
    pub beta: f64,
    pub table1: PublishedTable<PublishedPlanRow>,
    pub table2: PublishedTable<PublishedComparisonRow>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PublishedTable<R> {
    pub caption: String,
    pub rows: Vec<R>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedPlanRow {
    pub p0: f64,
    pub p1: f64,
    pub g: u32,
    pub c: u32,
    pub i: u32,
    pub oc_aql: f64,
    pub oc_lql: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublishedGroupSize {
    pub g: u32,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct PublishedComparisonRow {
    pub p0: f64,
    pub p1: f64,
    pub mchgsp: Option<PublishedGroupSize>,
    pub gasip: Option<PublishedGroupSize>,
    pub sasip: Option<u64>,
    #[serde(default)]
    pub note: Option<String>,
}

/// The printed tables, parsed once from the embedded data file.
pub fn published() -> &'static PublishedTables {
    static TABLES: OnceLock<PublishedTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        serde_json::from_str(PUBLISHED_JSON).expect("embedded published_tables.json is valid")
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Exact,
    OcMismatch,
    ParamsMismatch,
    FeasibilityMismatch,
}

impl MatchKind {
    pub const ALL: [MatchKind; 4] = [
        MatchKind::Exact,
        MatchKind::OcMismatch,
        MatchKind::ParamsMismatch,
        MatchKind::FeasibilityMismatch,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MatchKind::Exact => "exact",
            MatchKind::OcMismatch => "oc_mismatch",
            MatchKind::ParamsMismatch => "params_mismatch",
            MatchKind::FeasibilityMismatch => "feasibility_mismatch",
        }
    }
}

/// One row of the plan-parameter table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub p0: f64,
    pub p1: f64,
    pub published: PublishedPlanRow,
    /// Designer output for this row; `None` when infeasible within bounds.
    pub computed: Option<PlanDesign>,
    /// Chain group OC at the printed plan, AQL and LQL.
    pub recomputed_oc_aql: f64,
    pub recomputed_oc_lql: f64,
    /// Recomputed minus printed OC, AQL and LQL.
    pub oc_diffs: (f64, f64),
    pub oc_within_tolerance: bool,
    /// Whether the printed plan itself meets both risk constraints.
    pub published_feasible: bool,
    #[serde(rename = "match")]
    pub match_kind: MatchKind,
}

/// Printed versus computed sample size for one plan family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnComparison {
    /// `None` encodes the printed "--".
    pub published_n: Option<u64>,
    pub computed: Option<PlanDesign>,
    pub agrees: bool,
}

impl ColumnComparison {
    fn new(published_n: Option<u64>, computed: Option<PlanDesign>) -> Self {
        let agrees = published_n == computed.map(|d| d.n);
        ColumnComparison { published_n, computed, agrees }
    }

    pub fn computed_n(&self) -> Option<u64> {
        self.computed.map(|d| d.n)
    }

    fn kind(&self) -> MatchKind {
        match (self.published_n, self.computed_n()) {
            (Some(a), Some(b)) if a == b => MatchKind::Exact,
            (None, None) => MatchKind::Exact,
            (Some(_), Some(_)) => MatchKind::ParamsMismatch,
            _ => MatchKind::FeasibilityMismatch,
        }
    }
}

/// One row of the sample-size comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table2Row {
    pub p0: f64,
    pub p1: f64,
    pub mchgsp: ColumnComparison,
    pub gasip: ColumnComparison,
    pub sasip: ColumnComparison,
    /// Computed chain group `n` at most computed group `n`; `None` unless both are feasible.
    pub dominance_ok: Option<bool>,
    #[serde(rename = "match")]
    pub match_kind: MatchKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Table2Row {
    pub fn columns(&self) -> [(PlanKind, &ColumnComparison); 3] {
        [
            (PlanKind::Mchgsp, &self.mchgsp),
            (PlanKind::Gasip, &self.gasip),
            (PlanKind::Sasip, &self.sasip),
        ]
    }
}

pub trait ReportRow {
    fn match_kind(&self) -> MatchKind;
}

impl ReportRow for Table1Row {
    fn match_kind(&self) -> MatchKind {
        self.match_kind
    }
}

impl ReportRow for Table2Row {
    fn match_kind(&self) -> MatchKind {
        self.match_kind
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableReport<R> {
    pub table: u8,
    pub data_version: u32,
    pub bounds: SearchBounds,
    /// OC comparison tolerance; table 2 compares sample sizes only.
    pub tolerance: Option<f64>,
    pub rows: Vec<R>,
    pub summary: BTreeMap<MatchKind, usize>,
}

impl<R: ReportRow> TableReport<R> {
    fn new(table: u8, bounds: SearchBounds, tolerance: Option<f64>, rows: Vec<R>) -> Self {
        let mut summary: BTreeMap<MatchKind, usize> =
            MatchKind::ALL.iter().map(|&k| (k, 0)).collect();
        for row in &rows {
            *summary.entry(row.match_kind()).or_default() += 1;
        }
        TableReport { table, data_version: published().version, bounds, tolerance, rows, summary }
    }

    pub fn count(&self, kind: MatchKind) -> usize {
        self.summary.get(&kind).copied().unwrap_or(0)
    }

    pub fn all_exact(&self) -> bool {
        self.count(MatchKind::Exact) == self.rows.len()
    }
}

fn request(tables: &PublishedTables, p0: f64, p1: f64, bounds: SearchBounds, tie_break: TieBreak) -> Result<DesignRequest> {
    Ok(DesignRequest::new(tables.r, p0, p1, tables.alpha, tables.beta)?
        .with_bounds(bounds)?
        .with_tie_break(tie_break))
}

fn design_or_none(kind: PlanKind, req: &DesignRequest) -> Result<Option<PlanDesign>> {
    match design(kind, req) {
        Ok(d) => Ok(Some(d)),
        Err(Error::Infeasible { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn table1_row(
    tables: &PublishedTables,
    row: &PublishedPlanRow,
    tolerance: f64,
    bounds: SearchBounds,
    tie_break: TieBreak,
) -> Result<Table1Row> {
    let req = request(tables, row.p0, row.p1, bounds, tie_break)?;
    let printed = PlanParams::new(tables.r, row.g, row.c, row.i)?;
    let at_aql = oc_mchgsp(&printed, req.p0)?.value();
    let at_lql = oc_mchgsp(&printed, req.p1)?.value();
    let oc_diffs = (at_aql - row.oc_aql, at_lql - row.oc_lql);
    let oc_within_tolerance = oc_diffs.0.abs() <= tolerance && oc_diffs.1.abs() <= tolerance;
    let published_feasible = at_aql >= req.producer_floor() && at_lql <= req.beta.value();

    let computed = design_or_none(PlanKind::Mchgsp, &req)?;
    let match_kind = match computed {
        None => MatchKind::FeasibilityMismatch,
        Some(d) if d.params != printed => MatchKind::ParamsMismatch,
        Some(_) if !oc_within_tolerance => MatchKind::OcMismatch,
        Some(_) => MatchKind::Exact,
    };

    Ok(Table1Row {
        p0: row.p0,
        p1: row.p1,
        published: row.clone(),
        computed,
        recomputed_oc_aql: at_aql,
        recomputed_oc_lql: at_lql,
        oc_diffs,
        oc_within_tolerance,
        published_feasible,
        match_kind,
    })
}

/// Plan-parameter table with the default search bounds and tie-break.
pub fn reproduce_table1(tolerance: f64) -> Result<TableReport<Table1Row>> {
    reproduce_table1_with(tolerance, SearchBounds::default(), TieBreak::default())
}

pub fn reproduce_table1_with(
    tolerance: f64,
    bounds: SearchBounds,
    tie_break: TieBreak,
) -> Result<TableReport<Table1Row>> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return domain(format!("tolerance must be positive, got {tolerance}"));
    }
    let tables = published();
    let rows = tables
        .table1
        .rows
        .par_iter()
        .map(|row| table1_row(tables, row, tolerance, bounds, tie_break))
        .collect::<Result<Vec<_>>>()?;
    Ok(TableReport::new(1, bounds, Some(tolerance), rows))
}

fn table2_row(tables: &PublishedTables, row: &PublishedComparisonRow, bounds: SearchBounds) -> Result<Table2Row> {
    let req = request(tables, row.p0, row.p1, bounds, TieBreak::default())?;
    let mchgsp = ColumnComparison::new(row.mchgsp.map(|x| x.n), design_or_none(PlanKind::Mchgsp, &req)?);
    let gasip = ColumnComparison::new(row.gasip.map(|x| x.n), design_or_none(PlanKind::Gasip, &req)?);
    let sasip = ColumnComparison::new(row.sasip, design_or_none(PlanKind::Sasip, &req)?);
    let dominance_ok = match (mchgsp.computed_n(), gasip.computed_n()) {
        (Some(m), Some(g)) => Some(m <= g),
        _ => None,
    };
    let match_kind = [&mchgsp, &gasip, &sasip]
        .iter()
        .map(|col| col.kind())
        .max()
        .unwrap_or(MatchKind::Exact);
    Ok(Table2Row {
        p0: row.p0,
        p1: row.p1,
        mchgsp,
        gasip,
        sasip,
        dominance_ok,
        match_kind,
        note: row.note.clone(),
    })
}

/// Sample-size comparison table with the default search bounds.
pub fn reproduce_table2() -> Result<TableReport<Table2Row>> {
    reproduce_table2_with(SearchBounds::default())
}

pub fn reproduce_table2_with(bounds: SearchBounds) -> Result<TableReport<Table2Row>> {
    let tables = published();
    let rows = tables
        .table2
        .rows
        .par_iter()
        .map(|row| table2_row(tables, row, bounds))
        .collect::<Result<Vec<_>>>()?;
    Ok(TableReport::new(2, bounds, None, rows))
}

pub const TABLE1_CSV_HEADER: [&str; 13] = [
    "p0",
    "p1",
    "published_g",
    "published_c",
    "published_i",
    "computed_g",
    "computed_c",
    "computed_i",
    "oc_aql_published",
    "oc_aql_computed",
    "oc_lql_published",
    "oc_lql_computed",
    "match",
];

pub const TABLE2_CSV_HEADER: [&str; 9] = [
    "p0",
    "p1",
    "mchgsp_published_n",
    "mchgsp_computed_n",
    "gasip_published_n",
    "gasip_computed_n",
    "sasip_published_n",
    "sasip_computed_n",
    "match",
];

/// Printed "--" for an infeasible entry.
pub const INFEASIBLE_MARK: &str = "--";

fn n_cell(n: Option<u64>) -> String {
    n.map_or_else(|| INFEASIBLE_MARK.to_string(), |n| n.to_string())
}

impl TableReport<Table1Row> {
    /// CSV records in the column order of [`TABLE1_CSV_HEADER`]; the
    /// `oc_*_computed` columns hold the OC re-evaluated at the printed plan.
    pub fn csv_records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|row| {
                let c = row.computed.map(|d| d.params);
                let opt = |v: Option<u32>| v.map_or_else(|| INFEASIBLE_MARK.to_string(), |v| v.to_string());
                vec![
                    row.p0.to_string(),
                    row.p1.to_string(),
                    row.published.g.to_string(),
                    row.published.c.to_string(),
                    row.published.i.to_string(),
                    opt(c.map(|p| p.g)),
                    opt(c.map(|p| p.c)),
                    opt(c.map(|p| p.i)),
                    row.published.oc_aql.to_string(),
                    format!("{:.7}", row.recomputed_oc_aql),
                    row.published.oc_lql.to_string(),
                    format!("{:.7}", row.recomputed_oc_lql),
                    row.match_kind.as_str().to_string(),
                ]
            })
            .collect()
    }
}

impl TableReport<Table2Row> {
    pub fn csv_records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|row| {
                let mut rec = vec![row.p0.to_string(), row.p1.to_string()];
                for (_, col) in row.columns() {
                    rec.push(n_cell(col.published_n));
                    rec.push(n_cell(col.computed_n()));
                }
                rec.push(row.match_kind.as_str().to_string());
                rec
            })
            .collect()
    }
}
