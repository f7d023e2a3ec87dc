//! Report generation behind the `qcm` binary.
//!
//! Every command returns an [`Outcome`]: rendered text plus the list of
//! failed checks. The binary maps it to exit codes with [`exit_code`].

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloners::{closed_form_fidelity, optimal_channel, process_fidelity_analytic, reference_table, IdealMapKind, Provenance};
use crate::composition::{compose, stated_modular_fidelity, WiringSpec};
use crate::error::{Error, Result};
use crate::invariant_bases::FamilyKind;
use crate::oracle_mc::{mc_process_fidelity, SamplerConfig};
use crate::reduced_sdp::{ew_linear_program, known_certificates, solve_primal, verify_certificate, SdpProblem};

pub const SCHEMA: u32 = 1;
/// Agreement required between a solver value and its closed form.
pub const VALUE_TOL: f64 = 1e-6;
/// Allowed Monte Carlo deviation, in standard errors.
pub const MC_SIGMAS: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Markdown,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Variant {
    /// Hybrid followed by a transpose on the conjugated copy.
    Cloner,
    /// Hybrid followed by a transpose on the plain copy.
    TransposeCloner,
}

impl Variant {
    pub fn wiring(self, d: usize) -> Result<WiringSpec> {
        match self {
            Variant::Cloner => WiringSpec::modular_cloner(d),
            Variant::TransposeCloner => WiringSpec::modular_transpose_cloner(d),
        }
    }

    /// The direct problem the composite competes with.
    pub fn target(self) -> IdealMapKind {
        match self {
            Variant::Cloner => IdealMapKind::PhaseCloner,
            Variant::TransposeCloner => IdealMapKind::PhaseTransposeCloner,
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Variant::Cloner => "compose-cloner",
            Variant::TransposeCloner => "compose-transpose-cloner",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { tol: 1e-8, samples: 100_000, seed: 42 }
    }
}

/// One line of a `solve` or `compose` run. Absent numbers are `null` with
/// an entry in `null_reasons`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub problem: String,
    pub d: usize,
    pub closed_form: Option<f64>,
    pub sdp_value: Option<f64>,
    pub gap: Option<f64>,
    pub primal_min_eig: Option<f64>,
    pub dual_min_eig: Option<f64>,
    pub verdict: Option<String>,
    pub mc_mean: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub elapsed_ms: u64,
    /// Composite fidelity, `compose` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composite: Option<f64>,
    /// `composite / sdp_value`, `compose` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub null_reasons: BTreeMap<String, String>,
    pub failures: Vec<String>,
}

impl Report {
    fn new(problem: &str, d: usize, cfg: &RunConfig) -> Self {
        Self {
            schema: SCHEMA,
            problem: problem.into(),
            d,
            closed_form: None,
            sdp_value: None,
            gap: None,
            primal_min_eig: None,
            dual_min_eig: None,
            verdict: None,
            mc_mean: None,
            mc_stderr: None,
            samples: cfg.samples,
            seed: cfg.seed,
            elapsed_ms: 0,
            composite: None,
            ratio: None,
            null_reasons: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn null(&mut self, fields: &[&str], why: &str) {
        for f in fields {
            self.null_reasons.insert((*f).into(), why.into());
        }
    }

    fn monte_carlo(&mut self, channel: &crate::qcore::ChannelChoi, kind: IdealMapKind, reference: f64, cfg: &RunConfig) -> Result<()> {
        if cfg.samples < 2 {
            self.null(&["mc_mean", "mc_stderr"], "fewer than 2 samples requested");
            return Ok(());
        }
        let est = mc_process_fidelity(channel, kind, &SamplerConfig::for_kind(kind, cfg.seed, cfg.samples)?)?;
        self.mc_mean = Some(est.mean);
        self.mc_stderr = Some(est.stderr);
        if !est.agrees_with(reference, MC_SIGMAS) {
            self.failures.push(format!(
                "mc: mean {:.6} ± {:.2e} is more than {MC_SIGMAS} stderr from {reference:.6}",
                est.mean, est.stderr
            ));
        }
        Ok(())
    }
}

/// Solve, certify and sample one problem at one dimension.
pub fn solve_report(kind: IdealMapKind, d: usize, cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let mut r = Report::new(kind.slug(), d, cfg);
    let closed = closed_form_fidelity(kind, d)?;
    r.closed_form = Some(closed);

    let family = kind.family();
    let problem = SdpProblem::build(family, d)?;
    let value = if family == FamilyKind::EwR {
        ew_linear_program(d)?.value
    } else {
        solve_primal(&problem, cfg.tol)?.value
    };
    r.sdp_value = Some(value);
    if (value - closed).abs() > VALUE_TOL {
        r.failures.push(format!("sdp: value {value:.10} differs from closed form {closed:.10}"));
    }

    let (x, dual) = known_certificates(family, d)?;
    let cert = verify_certificate(&problem, &x, &dual)?;
    r.gap = Some(cert.gap);
    r.primal_min_eig = Some(cert.primal_min_eig);
    r.dual_min_eig = Some(cert.dual_min_eig);
    r.verdict = Some(cert.verdict.to_string());
    if !cert.verdict.is_optimal() {
        r.failures.push(format!("certificate: {}", cert.verdict));
    }

    r.monte_carlo(&optimal_channel(kind, d)?, kind, closed, cfg)?;
    r.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(r)
}

/// Build a modular circuit and compare it with the direct optimum and the
/// stated closed form.
pub fn compose_report(variant: Variant, d: usize, cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let mut r = Report::new(variant.slug(), d, cfg);
    let target = variant.target();
    let stated = stated_modular_fidelity(d);
    r.closed_form = Some(stated);

    let direct = solve_report(target, d, &RunConfig { samples: 0, ..*cfg })?;
    r.sdp_value = direct.sdp_value;
    r.gap = direct.gap;
    r.primal_min_eig = direct.primal_min_eig;
    r.dual_min_eig = direct.dual_min_eig;
    r.verdict = direct.verdict;
    r.failures.extend(direct.failures.into_iter().map(|f| format!("direct {f}")));

    let channel = compose(&variant.wiring(d)?)?;
    let diag = channel.diagnostics()?;
    if !diag.is_cptp() {
        r.failures.push(format!("composite: not CPTP ({diag:?})"));
    }
    let composite = process_fidelity_analytic(&channel, target)?;
    r.composite = Some(composite);
    if let Some(v) = r.sdp_value {
        r.ratio = Some(composite / v);
        if composite > v + VALUE_TOL {
            r.failures.push(format!("composite: {composite:.10} exceeds the optimum {v:.10}"));
        }
    }
    if (composite - stated).abs() > VALUE_TOL {
        r.failures.push(format!("composite: {composite:.10} differs from stated {stated:.10}"));
    }
    r.monte_carlo(&channel, target, composite, cfg)?;
    r.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(r)
}

/// One cell of the reference table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub row: String,
    pub quantity: String,
    pub formula: String,
    pub d: usize,
    /// Solver output for computed cells, the quoted constant otherwise.
    pub value: f64,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub schema: u32,
    pub rows: Vec<TableRow>,
    pub failures: Vec<String>,
}

pub fn table_report(d_list: &[usize], cfg: &RunConfig) -> Result<TableReport> {
    let consts = reference_table(d_list)?;
    let solved: Vec<Result<(usize, f64)>> = sorted(d_list)
        .par_iter()
        .map(|&d| Ok((d, solve_primal(&SdpProblem::build(FamilyKind::Cloner9, d)?, cfg.tol)?.value)))
        .collect();
    let solved: BTreeMap<usize, f64> = solved.into_iter().collect::<Result<_>>()?;
    let mut failures = Vec::new();
    let rows = consts
        .into_iter()
        .map(|c| {
            let value = match c.provenance {
                Provenance::Cited => c.value,
                Provenance::Computed => {
                    let v = solved[&c.d];
                    if (v - c.value).abs() > VALUE_TOL {
                        failures.push(format!("{} at d={}: solver {v:.10} vs {}", c.row, c.d, c.formula));
                    }
                    v
                }
            };
            TableRow { row: c.row, quantity: c.quantity, formula: c.formula, d: c.d, value, provenance: c.provenance }
        })
        .collect();
    Ok(TableReport { schema: SCHEMA, rows, failures })
}

fn sorted(d_list: &[usize]) -> Vec<usize> {
    let mut v = d_list.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Rendered output of a command and whether all its checks passed.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub text: String,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn cmd_table(d_list: &[usize], cfg: &RunConfig, format: Format) -> Result<Outcome> {
    check_list(d_list)?;
    let t = table_report(d_list, cfg)?;
    let text = match format {
        Format::Json => to_json(&t)?,
        Format::Markdown => {
            let mut s = String::from("| row | quantity | formula | d | value | source |\n|---|---|---|---|---|---|\n");
            for r in &t.rows {
                s += &format!(
                    "| {} | {} | {} | {} | {} | {} |\n",
                    r.row,
                    r.quantity,
                    r.formula,
                    r.d,
                    short(r.value),
                    provenance_name(r.provenance)
                );
            }
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Numerical(format!("csv: {e}"));
            w.write_record(["row", "quantity", "formula", "d", "value", "source"]).map_err(io)?;
            for r in &t.rows {
                w.write_record([
                    r.row.clone(),
                    r.quantity.clone(),
                    r.formula.clone(),
                    r.d.to_string(),
                    r.value.to_string(),
                    provenance_name(r.provenance).into(),
                ])
                .map_err(io)?;
            }
            finish_csv(w)?
        }
    };
    Ok(Outcome { text, failures: t.failures })
}

pub fn cmd_solve(problem: IdealMapKind, d_list: &[usize], cfg: &RunConfig, format: Format) -> Result<Outcome> {
    check_list(d_list)?;
    let reports = per_d(d_list, |d| solve_report(problem, d, cfg))?;
    render_reports(&reports, format)
}

pub fn cmd_compose(variant: Variant, d_list: &[usize], cfg: &RunConfig, format: Format) -> Result<Outcome> {
    check_list(d_list)?;
    let reports = per_d(d_list, |d| compose_report(variant, d, cfg))?;
    render_reports(&reports, format)
}

/// 0 on success, 1 for failed checks or solver trouble, 2 for bad input.
pub fn exit_code(result: &Result<Outcome>) -> u8 {
    match result {
        Ok(o) if o.passed() => 0,
        Ok(_) => 1,
        Err(Error::Usage(_) | Error::DimensionCap(_) | Error::Domain(_) | Error::Dimension(_)) => 2,
        Err(_) => 1,
    }
}

fn check_list(d_list: &[usize]) -> Result<()> {
    if d_list.is_empty() {
        return Err(Error::Usage("--d needs at least one dimension".into()));
    }
    for &d in d_list {
        if !(2..=crate::qcore::MAX_DIM).contains(&d) {
            return Err(Error::DimensionCap(d));
        }
    }
    Ok(())
}

// Runs in parallel, reports in ascending `d`.
fn per_d<F>(d_list: &[usize], f: F) -> Result<Vec<Report>>
where
    F: Fn(usize) -> Result<Report> + Sync,
{
    sorted(d_list).par_iter().map(|&d| f(d)).collect()
}

const COLUMNS: [&str; 17] = [
    "schema",
    "problem",
    "d",
    "closed_form",
    "sdp_value",
    "gap",
    "primal_min_eig",
    "dual_min_eig",
    "verdict",
    "mc_mean",
    "mc_stderr",
    "samples",
    "seed",
    "elapsed_ms",
    "composite",
    "ratio",
    "failures",
];

fn render_reports(reports: &[Report], format: Format) -> Result<Outcome> {
    let failures: Vec<String> = reports
        .iter()
        .flat_map(|r| r.failures.iter().map(move |f| format!("{} d={}: {f}", r.problem, r.d)))
        .collect();
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let text = match format {
        Format::Json => to_json(&reports)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Numerical(format!("csv: {e}"));
            w.write_record(COLUMNS).map_err(io)?;
            for r in reports {
                w.write_record([
                    r.schema.to_string(),
                    r.problem.clone(),
                    r.d.to_string(),
                    opt(r.closed_form),
                    opt(r.sdp_value),
                    opt(r.gap),
                    opt(r.primal_min_eig),
                    opt(r.dual_min_eig),
                    r.verdict.clone().unwrap_or_default(),
                    opt(r.mc_mean),
                    opt(r.mc_stderr),
                    r.samples.to_string(),
                    r.seed.to_string(),
                    r.elapsed_ms.to_string(),
                    opt(r.composite),
                    opt(r.ratio),
                    r.failures.join("; "),
                ])
                .map_err(io)?;
            }
            finish_csv(w)?
        }
        Format::Markdown => {
            let compose = reports.iter().any(|r| r.composite.is_some());
            let mut s = String::new();
            if compose {
                s += "| problem | d | composite | stated | direct optimum | ratio | mc | status |\n|---|---|---|---|---|---|---|---|\n";
            } else {
                s += "| problem | d | closed form | sdp value | gap | verdict | mc | status |\n|---|---|---|---|---|---|---|---|\n";
            }
            for r in reports {
                let mc = match (r.mc_mean, r.mc_stderr) {
                    (Some(m), Some(e)) => format!("{m:.6} ± {e:.1e}"),
                    _ => "n/a".into(),
                };
                let status = if r.passed() { "pass" } else { "FAIL" };
                let cell = |v: Option<f64>| v.map(short).unwrap_or_else(|| "n/a".into());
                if compose {
                    s += &format!(
                        "| {} | {} | {} | {} | {} | {} | {} | {} |\n",
                        r.problem,
                        r.d,
                        cell(r.composite),
                        cell(r.closed_form),
                        cell(r.sdp_value),
                        cell(r.ratio),
                        mc,
                        status
                    );
                } else {
                    s += &format!(
                        "| {} | {} | {} | {} | {} | {} | {} | {} |\n",
                        r.problem,
                        r.d,
                        cell(r.closed_form),
                        cell(r.sdp_value),
                        r.gap.map(|g| format!("{g:.1e}")).unwrap_or_else(|| "n/a".into()),
                        r.verdict.as_deref().unwrap_or("n/a"),
                        mc,
                        status
                    );
                }
            }
            s
        }
    };
    Ok(Outcome { text, failures })
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Numerical(format!("json: {e}")))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Numerical(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Numerical(format!("csv: {e}")))
}

fn provenance_name(p: Provenance) -> &'static str {
    match p {
        Provenance::Computed => "computed",
        Provenance::Cited => "cited",
    }
}

/// Six decimals with trailing zeros dropped, so `0.75` prints as `0.75`.
fn short(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> RunConfig {
        RunConfig { samples: 2000, ..RunConfig::default() }
    }

    #[test]
    fn table_has_the_qubit_and_qutrit_cells() {
        let out = cmd_table(&[2, 3], &quick(), Format::Markdown).unwrap();
        assert!(out.passed(), "{:?}", out.failures);
        assert!(out.text.contains("| 0.75 | computed |"));
        assert!(out.text.contains("| 5/9 | 3 | 0.555556 | computed |"));
    }

    #[test]
    fn dimension_cap_is_a_usage_error() {
        let r = cmd_table(&[13], &quick(), Format::Json);
        assert_eq!(r.as_ref().unwrap_err(), &Error::DimensionCap(13));
        assert_eq!(exit_code(&r), 2);
    }

    #[test]
    fn solve_reports_round_trip_through_json() {
        let r = solve_report(IdealMapKind::PhaseTransposeCloner, 2, &quick()).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert!((r.sdp_value.unwrap() - 0.75).abs() < 1e-6);
        let text = serde_json::to_string(&r).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn skipped_sampling_leaves_a_reason() {
        let cfg = RunConfig { samples: 0, ..RunConfig::default() };
        let r = solve_report(IdealMapKind::UniversalTransposeCloner, 4, &cfg).unwrap();
        assert!((r.sdp_value.unwrap() - 0.2).abs() < 1e-9);
        assert!(r.mc_mean.is_none() && r.null_reasons.contains_key("mc_mean"));
    }

    #[test]
    fn reports_come_back_sorted() {
        let cfg = RunConfig { samples: 0, ..RunConfig::default() };
        let out = cmd_solve(IdealMapKind::PhaseCloner, &[4, 2, 3], &cfg, Format::Csv).unwrap();
        let ds: Vec<&str> = out.text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
        assert_eq!(ds, ["2", "3", "4"]);
    }

    #[test]
    fn short_trims() {
        assert_eq!(short(0.75), "0.75");
        assert_eq!(short(1.0), "1");
        assert_eq!(short(5.0 / 9.0), "0.555556");
    }
}
