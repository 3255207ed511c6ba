use std::fmt::Write as _;

use samplan_core::designer::oc_for;
use samplan_core::simulator::{compare, simulate_replicated};
use samplan_core::tables::{
    reproduce_table1_with, reproduce_table2_with, MatchKind, TableReport, INFEASIBLE_MARK,
    TABLE1_CSV_HEADER, TABLE2_CSV_HEADER,
};
use samplan_core::{
    design, fraction_nonconforming, oc_mchgsp, DesignRequest, Error, PlanKind, PlanParams,
    Probability, SearchBounds, SimConfig, TieBreak,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{BoundsArgs, DesignArgs, OcArgs, PlanArgs, ReproduceArgs, SimulateArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_MISMATCH: u8 = 3;

/// A usage error: the message names the offending flag.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn usage<T>(flag: &str, msg: impl std::fmt::Display) -> Result<T, UsageError> {
    Err(UsageError(format!("{flag}: {msg}")))
}

#[derive(Debug, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    fn new<S: ToString>(header: &[S]) -> Self {
        CsvTable { header: header.iter().map(ToString::to_string).collect(), rows: Vec::new() }
    }

    fn push<S: ToString>(&mut self, row: &[S]) {
        self.rows.push(row.iter().map(ToString::to_string).collect());
    }
}

/// Everything a command produced, before it is rendered in the chosen format.
#[derive(Debug)]
pub struct Outcome {
    pub command: &'static str,
    pub inputs: Value,
    pub result: Value,
    pub warnings: Vec<String>,
    pub csv: CsvTable,
    pub text: String,
    pub exit: u8,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn bounds(b: &BoundsArgs) -> Result<SearchBounds, UsageError> {
    if b.g_max == 0 {
        return usage("--g-max", "must be at least 1");
    }
    if b.i_max == 0 {
        return usage("--i-max", "must be at least 1");
    }
    Ok(SearchBounds { g_max: b.g_max, c_max: b.c_max, i_max: b.i_max })
}

fn plan(p: &PlanArgs) -> Result<PlanParams, UsageError> {
    for (flag, v) in [("--r", p.r), ("--g", p.g), ("--i", p.i)] {
        if v == 0 {
            return usage(flag, "must be at least 1");
        }
    }
    PlanParams::new(p.r, p.g, p.c, p.i).or_else(|e| usage("--c", e))
}

fn prob(flag: &str, v: f64) -> Result<Probability, UsageError> {
    Probability::new(v).or_else(|e| usage(flag, e))
}

pub fn design_cmd(a: &DesignArgs) -> Result<Outcome, UsageError> {
    let kind = PlanKind::from(a.kind);
    let mut warnings = Vec::new();
    let r = match (kind, a.r) {
        (PlanKind::Sasip, r) => {
            if r.is_some_and(|r| r != 1) {
                warnings.push("--r is ignored for sasip (single plans use r = 1)".to_string());
            }
            1
        }
        (_, Some(0)) => return usage("--r", "must be at least 1"),
        (_, Some(r)) => r,
        (_, None) => return usage("--r", format!("required for kind {kind}")),
    };
    if !(a.aql > 0.0 && a.aql < 1.0) {
        return usage("--aql", "aql must lie strictly between 0 and 1");
    }
    if !(a.lql > 0.0 && a.lql < 1.0) {
        return usage("--lql", "lql must lie strictly between 0 and 1");
    }
    if a.lql <= a.aql {
        return usage("--lql", "lql must exceed aql");
    }
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return usage("--alpha", "alpha must lie strictly between 0 and 1");
    }
    if !(a.beta > 0.0 && a.beta < 1.0) {
        return usage("--beta", "beta must lie strictly between 0 and 1");
    }
    let tie_break = TieBreak::from(a.tie_break);
    let req = DesignRequest::new(r, a.aql, a.lql, a.alpha, a.beta)
        .and_then(|q| q.with_bounds(bounds(&a.bounds).map_err(|e| Error::Domain(e.0))?))
        .map(|q| q.with_tie_break(tie_break))
        .or_else(|e| usage("design", e))?;

    let inputs = to_value(&req);
    match design(kind, &req) {
        Ok(d) => {
            let mut result = to_value(&d);
            result["status"] = json!("feasible");
            let mut csv = CsvTable::new(&["kind", "r", "g", "c", "i", "n", "oc_at_aql", "oc_at_lql"]);
            csv.push(&[
                kind.to_string(),
                d.params.r.to_string(),
                d.params.g.to_string(),
                d.params.c.to_string(),
                d.params.i.to_string(),
                d.n.to_string(),
                d.oc_at_aql.to_string(),
                d.oc_at_lql.to_string(),
            ]);
            let mut text = format!(
                "{kind} plan: g = {}, c = {}, i = {} (r = {}, n = {})\n",
                d.params.g, d.params.c, d.params.i, d.params.r, d.n
            );
            let _ = writeln!(text, "OC at AQL {}: {:.7} (need >= {})", a.aql, d.oc_at_aql.value(), req.producer_floor());
            let _ = writeln!(text, "OC at LQL {}: {:.7} (need <= {})", a.lql, d.oc_at_lql.value(), a.beta);
            Ok(Outcome { command: "design", inputs, result, warnings, csv, text, exit: EXIT_OK })
        }
        Err(Error::Infeasible { kind, bounds }) => {
            let message = format!(
                "no feasible {kind} plan within bounds (g <= {}, c <= {}, i <= {})",
                bounds.g_max, bounds.c_max, bounds.i_max
            );
            let result = json!({ "status": "infeasible", "kind": kind, "bounds": bounds, "message": message });
            let mut csv = CsvTable::new(&["status", "kind", "g_max", "c_max", "i_max"]);
            csv.push(&[
                "infeasible".to_string(),
                kind.to_string(),
                bounds.g_max.to_string(),
                bounds.c_max.to_string(),
                bounds.i_max.to_string(),
            ]);
            Ok(Outcome { command: "design", inputs, result, warnings, csv, text: message + "\n", exit: EXIT_INFEASIBLE })
        }
        Err(e) => usage("design", e),
    }
}

pub fn oc_cmd(a: &OcArgs) -> Result<Outcome, UsageError> {
    let plan = plan(&a.plan)?;
    let mut inputs = json!({ "plan": plan });
    // (time, p) pairs
    let points: Vec<(Option<f64>, f64)> = match (a.p, a.grid, a.dist, a.time) {
        (Some(p), None, None, _) => {
            inputs["p"] = json!(p);
            vec![(None, p)]
        }
        (None, Some(grid), None, _) => {
            inputs["grid"] = json!({ "start": grid.start, "stop": grid.stop, "step": grid.step });
            grid.points().into_iter().map(|p| (None, p)).collect()
        }
        (None, None, Some(dist), Some(t)) => {
            inputs["dist"] = to_value(&dist);
            inputs["time"] = json!(t);
            let p = fraction_nonconforming(&dist, t).or_else(|e| usage("--time", e))?;
            vec![(Some(t), p.value())]
        }
        _ => return usage("--p", "give exactly one of --p, --grid, or --dist with --time"),
    };

    let with_time = points.iter().any(|(t, _)| t.is_some());
    let mut header = vec!["p", "oc_mchgsp", "oc_gasip"];
    if with_time {
        header.insert(0, "time");
    }
    let mut csv = CsvTable::new(&header);
    let mut rows = Vec::with_capacity(points.len());
    let mut text = format!(
        "plan r = {}, g = {}, c = {}, i = {} (n = {})\n{:>10}  {:>12}  {:>12}\n",
        plan.r, plan.g, plan.c, plan.i, plan.n(), "p", "oc_mchgsp", "oc_gasip"
    );
    for (t, p) in points {
        let q = prob("--p", p)?;
        let chained = oc_mchgsp(&plan, q).or_else(|e| usage("--p", e))?.value();
        let single = oc_for(PlanKind::Gasip, &plan, q).or_else(|e| usage("--p", e))?.value();
        let mut row = json!({ "p": p, "oc_mchgsp": chained, "oc_gasip": single });
        let mut rec = vec![p.to_string(), chained.to_string(), single.to_string()];
        if let Some(t) = t {
            row["time"] = json!(t);
            rec.insert(0, t.to_string());
        }
        rows.push(row);
        csv.push(&rec);
        let _ = writeln!(text, "{p:>10.6}  {chained:>12.7}  {single:>12.7}");
    }
    let result = json!({ "n": plan.n(), "rows": rows });
    Ok(Outcome { command: "oc", inputs, result, warnings: Vec::new(), csv, text, exit: EXIT_OK })
}

pub fn simulate_cmd(a: &SimulateArgs) -> Result<Outcome, UsageError> {
    let plan = plan(&a.plan)?;
    let p = prob("--p", a.p)?;
    let burn_in = a.burn_in.unwrap_or(u64::from(plan.i));
    if burn_in < u64::from(plan.i) {
        return usage("--burn-in", format!("must be at least the chain length i = {}", plan.i));
    }
    if a.lots <= burn_in {
        return usage("--lots", format!("must exceed the burn-in ({burn_in})"));
    }
    if a.replications == 0 {
        return usage("--replications", "must be at least 1");
    }
    let cfg = SimConfig { plan, p, lots: a.lots, seed: a.seed, burn_in };
    let sim = simulate_replicated(&cfg, a.replications).or_else(|e| usage("simulate", e))?;
    let analytic = oc_mchgsp(&plan, p).or_else(|e| usage("--p", e))?;
    let cmp = compare(sim, analytic);

    let mut inputs = to_value(&cfg);
    inputs["replications"] = json!(a.replications);
    let mut warnings = Vec::new();
    if cmp.flagged {
        warnings.push("empirical acceptance rate disagrees with the analytic OC (|z| > 4)".to_string());
    }
    let result = to_value(&cmp);
    let z_cell = cmp.z.map_or_else(String::new, |z| z.to_string());
    let mut csv = CsvTable::new(&[
        "lots_counted", "accepted", "rate", "std_err", "seed", "analytic", "z", "flagged",
    ]);
    csv.push(&[
        sim.lots_counted.to_string(),
        sim.accepted.to_string(),
        sim.rate.to_string(),
        sim.std_err.to_string(),
        sim.seed.to_string(),
        analytic.to_string(),
        z_cell,
        cmp.flagged.to_string(),
    ]);
    let text = format!(
        "{} of {} lots accepted: rate {:.6} (std err {:.2e})\nanalytic OC {:.7}, z = {}{}\n",
        sim.accepted,
        sim.lots_counted,
        sim.rate.value(),
        sim.std_err,
        analytic.value(),
        cmp.z.map_or("n/a".to_string(), |z| format!("{z:+.3}")),
        if cmp.flagged { "  [FLAGGED]" } else { "" }
    );
    Ok(Outcome { command: "simulate", inputs, result, warnings, csv, text, exit: EXIT_OK })
}

fn summary_line<R>(report: &TableReport<R>) -> String {
    MatchKind::ALL
        .iter()
        .map(|k| format!("{} {}", report.summary.get(k).copied().unwrap_or(0), k.as_str()))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn reproduce_cmd(a: &ReproduceArgs) -> Result<Outcome, UsageError> {
    if !(a.tolerance.is_finite() && a.tolerance > 0.0) {
        return usage("--tolerance", "must be positive");
    }
    let bounds = bounds(&a.bounds)?;
    let mut inputs = json!({ "table": a.table, "bounds": bounds });
    let mut warnings = Vec::new();
    let (result, csv, mut text, all_exact) = match a.table {
        1 => {
            inputs["tolerance"] = json!(a.tolerance);
            let report = reproduce_table1_with(a.tolerance, bounds, TieBreak::default())
                .or_else(|e| usage("reproduce", e))?;
            let mut csv = CsvTable::new(&TABLE1_CSV_HEADER);
            csv.rows = report.csv_records();
            let mut text = format!("{:>5} {:>5}  {:>14}  {:>14}  {:>11} {:>11}  match\n",
                "p0", "p1", "printed g,c,i", "computed g,c,i", "d_oc_aql", "d_oc_lql");
            for row in &report.rows {
                let printed = format!("{},{},{}", row.published.g, row.published.c, row.published.i);
                let computed = row.computed.map_or(INFEASIBLE_MARK.to_string(), |d| {
                    format!("{},{},{}", d.params.g, d.params.c, d.params.i)
                });
                let _ = writeln!(
                    text,
                    "{:>5} {:>5}  {printed:>14}  {computed:>14}  {:>+11.2e} {:>+11.2e}  {}",
                    row.p0, row.p1, row.oc_diffs.0, row.oc_diffs.1, row.match_kind.as_str()
                );
                if !row.oc_within_tolerance {
                    warnings.push(format!(
                        "row ({}, {}): printed OC ({}, {}) recomputes to ({:.7}, {:.7})",
                        row.p0, row.p1, row.published.oc_aql, row.published.oc_lql,
                        row.recomputed_oc_aql, row.recomputed_oc_lql
                    ));
                }
            }
            let _ = writeln!(text, "{}", summary_line(&report));
            (to_value(&report), csv, text, report.all_exact())
        }
        2 => {
            let report = reproduce_table2_with(bounds).or_else(|e| usage("reproduce", e))?;
            let mut csv = CsvTable::new(&TABLE2_CSV_HEADER);
            csv.rows = report.csv_records();
            let mut text = format!(
                "{:>5} {:>5}  {:>15}  {:>15}  {:>15}  match\n",
                "p0", "p1", "mchgsp (pr/cmp)", "gasip (pr/cmp)", "sasip (pr/cmp)"
            );
            for (row, rec) in report.rows.iter().zip(&csv.rows) {
                let _ = writeln!(
                    text,
                    "{:>5} {:>5}  {:>15}  {:>15}  {:>15}  {}",
                    row.p0,
                    row.p1,
                    format!("{}/{}", rec[2], rec[3]),
                    format!("{}/{}", rec[4], rec[5]),
                    format!("{}/{}", rec[6], rec[7]),
                    row.match_kind.as_str()
                );
                if row.dominance_ok == Some(false) {
                    warnings.push(format!("row ({}, {}): chain group n exceeds group n", row.p0, row.p1));
                }
            }
            let _ = writeln!(text, "{}", summary_line(&report));
            (to_value(&report), csv, text, report.all_exact())
        }
        _ => return usage("--table", "table must be 1 or 2"),
    };
    if !all_exact {
        warnings.insert(0, "computed table differs from the printed values".to_string());
        text.push_str("mismatches found\n");
    }
    let exit = if all_exact { EXIT_OK } else { EXIT_MISMATCH };
    Ok(Outcome { command: "reproduce", inputs, result, warnings, csv, text, exit })
}
