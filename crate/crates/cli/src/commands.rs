use std::f64::consts::{FRAC_PI_4, PI};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use eraser_core::bench::{four_block_layout, port_phase_table, sweep as port_sweep, BenchConfig, PortSpec, SourceSpec};
use eraser_core::correlation::{
    self, canonical_ports, estimate_trace, normalized_closed_form, normalized_product, verify_equivalence,
    CorrelationRequest,
};
use eraser_core::dsl::{self, Diagnostic, Severity};
use eraser_core::fringe::{self, FringeReport, DEFAULT_THRESHOLD};
use eraser_core::trace::{phase_grid, Trace};

use crate::output::{fmt_num, sibling, write_columns, write_csv, write_json, Parameters, RunManifest};
use crate::Mode;

/// Residual bound for the canonical product against `sin^2(N phi / 2)`.
pub const VERIFY_TOLERANCE: f64 = 1e-12;

fn report_diagnostics(path: &Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}:{d}", path.display());
    }
}

/// Parses and validates a bench document against order `order`. Diagnostics
/// go to standard error; `None` means there was at least one error.
fn load_config(
    path: &Path,
    order: usize,
    grid: Option<usize>,
    keep_phase_warnings: bool,
) -> Result<Option<BenchConfig>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc = dsl::parse(&text);
    report_diagnostics(path, &doc.diagnostics);
    let Some(mut config) = doc.config.clone() else {
        return Ok(None);
    };
    if let Some(g) = grid {
        config.grid_points = g;
        if let Err(e) = config.check() {
            eprintln!("{}: error: --grid {g}: {e}", path.display());
            return Ok(None);
        }
    }
    let mut diags = match grid {
        Some(_) => dsl::validate(&config, order),
        None => doc.validate(order),
    };
    if !keep_phase_warnings {
        diags.retain(|d| d.severity == Severity::Error);
    }
    report_diagnostics(path, &diags);
    if diags.iter().any(Diagnostic::is_error) {
        return Ok(None);
    }
    Ok(Some(config))
}

pub fn sweep(config_path: &Path, out: &Path, grid: Option<usize>) -> Result<ExitCode> {
    let Some(config) = load_config(config_path, 1, grid, false)? else {
        return Ok(ExitCode::FAILURE);
    };
    let traces = port_sweep(&config)?;
    let phis = phase_grid(config.grid_points);
    let columns: Vec<(String, Vec<f64>)> = traces.into_iter().map(|(p, t)| (p.name(), t.values)).collect();
    write_columns(out, &phis, &columns)?;

    let params = Parameters { grid: Some(config.grid_points), ..Default::default() };
    let manifest = RunManifest::new("sweep", out, params).with_config(config_path, dsl::serialize(&config));
    write_json(&sibling(out, "manifest.json"), &manifest)?;
    Ok(ExitCode::SUCCESS)
}

fn select_ports(config: &BenchConfig, order: usize, mode: Mode) -> Result<Vec<PortSpec>> {
    match mode {
        Mode::Canonical => Ok(canonical_ports(order, config.theta_radians())),
        Mode::Literal => {
            let table = port_phase_table(config)?;
            if order > table.len() {
                bail!("literal mode: order {order} exceeds the {} ports defined by the config's blocks", table.len());
            }
            Ok(table.into_iter().take(order).collect())
        }
    }
}

#[derive(Serialize)]
struct PortSummary {
    name: String,
    chi: f64,
    theta: f64,
}

impl From<&PortSpec> for PortSummary {
    fn from(p: &PortSpec) -> Self {
        Self { name: p.name(), chi: p.chi, theta: p.theta }
    }
}

#[derive(Serialize)]
struct CorrelationJson {
    order_n: usize,
    mode: &'static str,
    grid_points: usize,
    ports: Vec<PortSummary>,
    closed_form_residual: f64,
    matches_closed_form: bool,
    fringe: FringeReport,
}

pub fn correlate(
    config_path: &Path,
    order: usize,
    mode: Mode,
    grid: Option<usize>,
    threshold: f64,
    out: &Path,
) -> Result<ExitCode> {
    let Some(config) = load_config(config_path, order, grid, mode == Mode::Literal)? else {
        return Ok(ExitCode::FAILURE);
    };
    let ports = select_ports(&config, order, mode)?;
    let request = CorrelationRequest::new(ports, config.grid_points, config.m)?;
    let report = correlation::correlate(&request, &config.source, config.m, threshold)?;
    let closed = normalized_closed_form(order, config.grid_points);

    write_columns(
        out,
        &report.trace.phis,
        &[
            ("product".into(), report.trace.values.clone()),
            ("normalized".into(), report.normalized_trace.values.clone()),
            ("closed_form_normalized".into(), closed.values),
        ],
    )?;

    let json = CorrelationJson {
        order_n: report.order_n,
        mode: mode.name(),
        grid_points: config.grid_points,
        ports: request.ports.iter().map(PortSummary::from).collect(),
        closed_form_residual: report.closed_form_residual,
        matches_closed_form: report.closed_form_residual < VERIFY_TOLERANCE,
        fringe: report.fringe,
    };
    write_json(&sibling(out, "report.json"), &json)?;
    println!("{}", serde_json::to_string_pretty(&json)?);

    let params = Parameters {
        order: Some(order),
        grid: Some(config.grid_points),
        mode: Some(mode.name().into()),
        threshold: Some(threshold),
        ..Default::default()
    };
    let manifest = RunManifest::new("correlate", out, params).with_config(config_path, dsl::serialize(&config));
    write_json(&sibling(out, "manifest.json"), &manifest)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
pub struct OrderResult {
    pub order: usize,
    pub grid_points: usize,
    pub residual: Option<f64>,
    pub fringe_count: Option<usize>,
    pub first_peak: Option<f64>,
    pub expected_first_peak: f64,
    pub mean_peak_spacing: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A stated first-fringe position checked against the computed trace.
#[derive(Debug, Serialize)]
pub struct FirstPeakClaim {
    pub claim: String,
    pub order: usize,
    pub claimed: f64,
    pub measured: f64,
    pub consistent: bool,
    pub note: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub tolerance: f64,
    pub results: Vec<OrderResult>,
    pub first_peak_claims: Vec<FirstPeakClaim>,
    pub all_pass: bool,
}

fn default_verify_grid(order: usize) -> usize {
    (64 * order).max(8192)
}

/// Canonical order-`n` trace, normalized, with unit port prefactors.
fn canonical_trace(n: usize, grid: usize) -> Result<Trace> {
    let source = SourceSpec::from_intensity(2.0 * n as f64)?;
    let request = CorrelationRequest::new(canonical_ports(n, FRAC_PI_4), grid, n)?;
    Ok(normalized_product(&request, &source, n)?)
}

fn verify_order(n: usize, grid: usize) -> OrderResult {
    let mut result = OrderResult {
        order: n,
        grid_points: grid,
        residual: None,
        fringe_count: None,
        first_peak: None,
        expected_first_peak: if n > 0 { PI / n as f64 } else { f64::NAN },
        mean_peak_spacing: None,
        pass: false,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        result.residual = Some(verify_equivalence(n, grid)?);
        let trace = canonical_trace(n, grid)?;
        let f = fringe::analyze(&trace, DEFAULT_THRESHOLD)?;
        result.fringe_count = Some(f.fringe_count);
        result.first_peak = Some(f.first_peak);
        result.mean_peak_spacing = Some(f.period);
        let step = trace.step();
        result.pass = result.residual.is_some_and(|r| r < VERIFY_TOLERANCE)
            && f.fringe_count == n
            && (f.first_peak - PI / n as f64).abs() <= step;
        Ok(())
    })();
    if let Err(e) = outcome {
        result.error = Some(format!("{e:#}"));
        result.pass = false;
    }
    result
}

/// The order-8 first fringe stated at `pi/16` next to the `pi/N` rule.
fn first_peak_claims() -> Result<Vec<FirstPeakClaim>> {
    let n = 8;
    let grid = default_verify_grid(n);
    let trace = canonical_trace(n, grid)?;
    let measured = fringe::first_peak(&trace)?;
    let step = trace.step();
    let check = |claimed: f64| (measured - claimed).abs() <= step;
    Ok(vec![
        FirstPeakClaim {
            claim: "first fringe of the order-8 product at pi/16".into(),
            order: n,
            claimed: PI / 16.0,
            measured,
            consistent: check(PI / 16.0),
            note: "inconsistent with sin^2(N phi/2) and with the phi_j = pi/j phase-basis rule, which both put it at pi/8"
                .into(),
        },
        FirstPeakClaim {
            claim: "first fringe of the order-j product at phi_j = pi/j (j = 8)".into(),
            order: n,
            claimed: PI / 8.0,
            measured,
            consistent: check(PI / 8.0),
            note: "follows from the sin^2(N phi/2) closed form".into(),
        },
    ])
}

pub fn build_verify_report(orders: &[usize], grid: Option<usize>) -> Result<VerifyReport> {
    let results: Vec<OrderResult> =
        orders.iter().map(|&n| verify_order(n, grid.unwrap_or_else(|| default_verify_grid(n)))).collect();
    let claims = if results.is_empty() { Vec::new() } else { first_peak_claims()? };
    let all_pass = results.iter().all(|r| r.pass);
    Ok(VerifyReport { tolerance: VERIFY_TOLERANCE, results, first_peak_claims: claims, all_pass })
}

pub fn verify(orders: &[usize], grid: Option<usize>, out: Option<&Path>) -> Result<ExitCode> {
    let report = build_verify_report(orders, grid)?;
    match out {
        Some(path) => {
            write_json(path, &report)?;
            let params = Parameters { orders: orders.to_vec(), grid, ..Default::default() };
            write_json(&sibling(path, "manifest.json"), &RunManifest::new("verify", path, params))?;
        }
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    for r in report.results.iter().filter(|r| !r.pass) {
        eprintln!(
            "order {}: FAIL (residual {:?}, fringes {:?}, first peak {:?}){}",
            r.order,
            r.residual,
            r.fringe_count,
            r.first_peak,
            r.error.as_deref().map(|e| format!(": {e}")).unwrap_or_default()
        );
    }
    Ok(if report.all_pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

#[derive(Serialize)]
struct MonteCarloSummary {
    order_n: usize,
    exposure: f64,
    seed: u64,
    grid_points: usize,
    sup_deviation: f64,
    fringe_count: usize,
}

pub fn montecarlo(
    config_path: &Path,
    order: usize,
    exposure: f64,
    seed: u64,
    mode: Mode,
    grid: Option<usize>,
    out: &Path,
) -> Result<ExitCode> {
    let Some(config) = load_config(config_path, order, grid, mode == Mode::Literal)? else {
        return Ok(ExitCode::FAILURE);
    };
    let ports = select_ports(&config, order, mode)?;
    let request = CorrelationRequest::new(ports, config.grid_points, config.m)?;
    let estimate = estimate_trace(&request, &config.source, config.m, exposure, seed)?;
    let analytic = normalized_product(&request, &config.source, config.m)?;

    let mut header = vec!["phi".to_string(), "estimate".into(), "analytic".into()];
    header.extend(request.ports.iter().map(|p| format!("{}_counts", p.name())));
    let rows = (0..estimate.trace.len()).map(|i| {
        let mut row = vec![
            fmt_num(estimate.trace.phis[i]),
            fmt_num(estimate.trace.values[i]),
            fmt_num(analytic.values[i]),
        ];
        row.extend(estimate.counts[i].iter().map(u64::to_string));
        row
    });
    write_csv(out, header, rows)?;

    let summary = MonteCarloSummary {
        order_n: order,
        exposure,
        seed,
        grid_points: config.grid_points,
        sup_deviation: estimate.trace.max_abs_diff(&analytic),
        fringe_count: fringe::count_fringes(&estimate.trace, DEFAULT_THRESHOLD),
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);

    let params = Parameters {
        order: Some(order),
        grid: Some(config.grid_points),
        mode: Some(mode.name().into()),
        seed: Some(seed),
        exposure: Some(exposure),
        ..Default::default()
    };
    let manifest = RunManifest::new("montecarlo", out, params).with_config(config_path, dsl::serialize(&config));
    write_json(&sibling(out, "manifest.json"), &manifest)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SeriesSummary {
    file: String,
    series: String,
    fringe_count: usize,
    first_peak: f64,
    period: f64,
}

struct Panel {
    file: &'static str,
    grid: usize,
    columns: Vec<(String, Vec<f64>)>,
}

fn canonical_columns(orders: &[usize], grid: usize) -> Result<Vec<(String, Vec<f64>)>> {
    orders.iter().map(|&n| Ok((format!("N{n}"), canonical_trace(n, grid)?.values))).collect()
}

fn product_of(ports: &[PortSpec], source: &SourceSpec, m: usize, grid: usize) -> Result<Vec<f64>> {
    let request = CorrelationRequest::new(ports.to_vec(), grid, m)?;
    Ok(normalized_product(&request, source, m)?.values)
}

fn figure_panels(which: u8) -> Result<Vec<Panel>> {
    Ok(match which {
        2 => {
            let grid = 4096;
            let bench = four_block_layout(1.0, 8, FRAC_PI_4, 3.0 * FRAC_PI_4, grid)?;
            let ports = port_phase_table(&bench)?;
            let first: Vec<(String, Vec<f64>)> =
                port_sweep(&bench)?.into_iter().map(|(p, t)| (p.name(), t.values)).collect();
            let (s, m) = (&bench.source, bench.m);
            vec![
                Panel { file: "fig2_first_order.csv", grid, columns: first },
                Panel {
                    file: "fig2_fourth_order.csv",
                    grid,
                    columns: vec![
                        ("AB".into(), product_of(&ports[0..4], s, m, grid)?),
                        ("CD".into(), product_of(&ports[4..8], s, m, grid)?),
                    ],
                },
                Panel {
                    file: "fig2_eighth_order.csv",
                    grid,
                    columns: vec![("ABCD".into(), product_of(&ports, s, m, grid)?)],
                },
            ]
        }
        3 => {
            let grid = 8192;
            vec![
                Panel { file: "fig3_orders_1_to_8.csv", grid, columns: canonical_columns(&[1, 2, 3, 4, 5, 6, 7, 8], grid)? },
                Panel { file: "fig3_order_80.csv", grid, columns: canonical_columns(&[80], grid)? },
            ]
        }
        4 => {
            let grid = 4096;
            vec![Panel { file: "fig4.csv", grid, columns: canonical_columns(&[1, 2, 4, 8], grid)? }]
        }
        other => bail!("no figure {other}; expected 2, 3 or 4"),
    })
}

pub fn figure(which: u8, out_dir: &Path) -> Result<ExitCode> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let panels = figure_panels(which)?;
    let mut summaries = Vec::new();
    for panel in &panels {
        let phis = phase_grid(panel.grid);
        write_columns(&out_dir.join(panel.file), &phis, &panel.columns)?;
        for (name, values) in &panel.columns {
            let f = fringe::analyze(&Trace::new(phis.clone(), values.clone()), DEFAULT_THRESHOLD)?;
            summaries.push(SeriesSummary {
                file: panel.file.into(),
                series: name.clone(),
                fringe_count: f.fringe_count,
                first_peak: f.first_peak,
                period: f.period,
            });
        }
    }
    write_json(&out_dir.join("summary.json"), &summaries)?;
    let params = Parameters { figure: Some(which), ..Default::default() };
    write_json(&out_dir.join("manifest.json"), &RunManifest::new("figure", out_dir, params))?;
    Ok(ExitCode::SUCCESS)
}
