//! Exit criteria for the simulator. Each criterion prints one PASS/FAIL line;
//! run with `cargo test -p eraser-cli --test acceptance -- --nocapture` to see
//! them. The test fails if any criterion fails.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use proptest::test_runner::{Config as RunnerConfig, TestRunner};

use eraser_core::bench::{
    four_block_layout, port_phase_table, sweep, total_detected_power, Angle, BenchConfig, BlockSpec, SourceSpec,
};
use eraser_core::correlation::{
    canonical_ports, estimate_trace, literal_eighth_order, normalized_product,
    product_correlation, verify_equivalence, CorrelationRequest,
};
use eraser_core::dsl;
use eraser_core::fringe::{self, count_fringes, first_peak, visibility};
use eraser_core::trace::Trace;
use eraser_core::TWO_PI;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn load(name: &str) -> BenchConfig {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    let doc = dsl::parse(&text);
    assert!(!doc.has_errors(), "{name}: {:?}", doc.diagnostics);
    doc.config.unwrap()
}

fn eraser() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eraser"))
}

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// 1. Eraser fringes: visibility 1, complementary ports pi-shifted, pair sums I0/M.
fn eraser_fringes() -> Outcome {
    let config = load("fig1.bench");
    let traces = sweep(&config).map_err(|e| e.to_string())?;
    ensure(traces.len() == 8, || format!("{} port traces", traces.len()))?;
    let n = config.grid_points;
    let i0_over_m = config.source.i0() / config.m as f64;
    let mut worst_vis: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    let mut worst_shift: f64 = 0.0;
    for (_, t) in &traces {
        worst_vis = worst_vis.max((visibility(t).map_err(|e| e.to_string())? - 1.0).abs());
    }
    for pair in traces.chunks(2) {
        let ((p1, t1), (p2, t2)) = (&pair[0], &pair[1]);
        let d = (p2.chi - p1.chi).rem_euclid(TWO_PI);
        ensure((d - PI).abs() < 1e-12, || format!("{} / {} differ by {d}", p1.name(), p2.name()))?;
        for i in 0..n {
            worst_sum = worst_sum.max((t1.values[i] + t2.values[i] - i0_over_m).abs());
            // the sibling's fringe is the same fringe moved by pi (n/2 samples)
            worst_shift = worst_shift.max((t2.values[i] - t1.values[(i + n / 2) % n]).abs());
        }
    }
    ensure(worst_vis <= 1e-9, || format!("visibility off by {worst_vis:e}"))?;
    ensure(worst_sum <= 1e-12, || format!("pair sum off by {worst_sum:e}"))?;
    ensure(worst_shift <= 1e-12, || format!("pi shift mismatch {worst_shift:e}"))?;
    Ok(format!("|V-1| <= {worst_vis:.1e}, pair-sum err {worst_sum:.1e}, pi-shift err {worst_shift:.1e}"))
}

/// 2. Total detected power I0/2 at every phase; flat traces without eraser.
fn conservation() -> Outcome {
    let config = load("fig1.bench");
    let half = config.source.i0() / 2.0;
    let mut worst: f64 = 0.0;
    for phi in Trace::sample(config.grid_points, |p| p).values {
        worst = worst.max((total_detected_power(&config, phi).map_err(|e| e.to_string())? - half).abs());
    }
    ensure(worst <= 1e-12, || format!("total power off by {worst:e}"))?;

    let flat = load("no_eraser.bench");
    let mut worst_vis: f64 = 0.0;
    for (_, t) in sweep(&flat).map_err(|e| e.to_string())? {
        worst_vis = worst_vis.max(visibility(&t).map_err(|e| e.to_string())?);
    }
    ensure(worst_vis < 1e-12, || format!("theta = 0 visibility {worst_vis:e}"))?;
    Ok(format!("|P - I0/2| <= {worst:.1e}; theta=0 visibility <= {worst_vis:.1e}"))
}

/// 3. Product over A1 A2 B1 B2 equals I0^4/(2^6 M^4) sin^2(2 phi), relative 1e-12.
fn fourth_order_formula() -> Outcome {
    let config = load("fig1.bench");
    let table = port_phase_table(&config).map_err(|e| e.to_string())?;
    let req = CorrelationRequest::new(table[0..4].to_vec(), 4096, config.m).map_err(|e| e.to_string())?;
    let trace = product_correlation(&req, &config.source, config.m).map_err(|e| e.to_string())?;
    let m = config.m as f64;
    let pre = config.source.i0().powi(4) / (2f64.powi(6) * m.powi(4));
    // At the exact zeros phi = k pi/2 both sides are rounding noise of order
    // pre * 1e-32; the floor keeps relative error meaningful there only.
    let floor = pre * 1e-24;
    let mut worst: f64 = 0.0;
    for (phi, got) in trace.phis.iter().zip(&trace.values) {
        let want = pre * (2.0 * phi).sin().powi(2);
        let err = (got - want).abs();
        ensure(err <= 1e-12 * want.abs() + floor, || {
            format!("phi = {phi}: got {got:e}, want {want:e}")
        })?;
        if want.abs() > floor {
            worst = worst.max(err / want.abs());
        }
    }
    Ok(format!("max relative error {worst:.1e} over 4096 points"))
}

/// 4. Canonical product against sin^2(N phi / 2) for the listed orders.
fn closed_form_equivalence() -> Outcome {
    let mut parts = Vec::new();
    for n in [1usize, 2, 3, 4, 8, 16, 80, 128] {
        let grid = (64 * n).max(8192);
        let r = verify_equivalence(n, grid).map_err(|e| e.to_string())?;
        ensure(r < 1e-12, || format!("N = {n}: residual {r:e}"))?;
        parts.push(format!("N{n}:{r:.0e}"));
    }
    Ok(parts.join(" "))
}

fn canonical_normalized(n: usize, grid: usize) -> Result<Trace, String> {
    let source = SourceSpec::from_intensity(1.0).map_err(|e| e.to_string())?;
    let req = CorrelationRequest::new(canonical_ports(n, FRAC_PI_4), grid, n.max(2)).map_err(|e| e.to_string())?;
    normalized_product(&req, &source, n.max(2)).map_err(|e| e.to_string())
}

/// 5. Fringe count N, first peak pi/N, spacing 2pi/N; the pi/16 claim is flagged.
fn fringe_metrics() -> Outcome {
    for n in (1..=8).chain([80]) {
        for grid in [64 * n, (64 * n).max(8192)] {
            let t = canonical_normalized(n, grid)?;
            let count = count_fringes(&t, 0.5);
            ensure(count == n, || format!("N = {n}, grid {grid}: {count} fringes"))?;
            let first = first_peak(&t).map_err(|e| e.to_string())?;
            ensure((first - PI / n as f64).abs() <= t.step(), || {
                format!("N = {n}, grid {grid}: first peak {first}, want {}", PI / n as f64)
            })?;
            let report = fringe::analyze(&t, 0.5).map_err(|e| e.to_string())?;
            let want = TWO_PI / n as f64;
            ensure((report.period - want).abs() <= 0.01 * want, || {
                format!("N = {n}: spacing {}, want {want}", report.period)
            })?;
        }
    }

    let out = eraser().args(["verify", "--order", "8"]).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("verify exited {:?}", out.status))?;
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let claims = report["first_peak_claims"].as_array().cloned().unwrap_or_default();
    let pi16 = claims
        .iter()
        .find(|c| (c["claimed"].as_f64().unwrap_or(0.0) - PI / 16.0).abs() < 1e-12)
        .ok_or("verifier report lacks the pi/16 claim")?;
    ensure(pi16["consistent"] == serde_json::Value::Bool(false), || "pi/16 claim not flagged".into())?;
    Ok("N = 1..8, 80 at 64N and 8192 points; pi/16 claim flagged inconsistent".into())
}

/// 6. Eighth-order literal trace. With xi1 = xi2 = pi/4 there are 6 unequal
/// fringes; with xi2 = 3pi/4 there are 8 equal ones matching sin^2(4 phi).
fn literal_eighth_order_check() -> Outcome {
    let grid = 4096;
    let source = SourceSpec::from_intensity(1.0).map_err(|e| e.to_string())?;
    let m = 8;
    let sin2_4phi = Trace::sample(grid, |p| (4.0 * p).sin().powi(2)).normalized();
    let port_product = |xi2: f64| -> Result<Trace, String> {
        let bench = four_block_layout(1.0, m, FRAC_PI_4, xi2, grid).map_err(|e| e.to_string())?;
        let ports = port_phase_table(&bench).map_err(|e| e.to_string())?;
        let req = CorrelationRequest::new(ports, grid, m).map_err(|e| e.to_string())?;
        normalized_product(&req, &source, m).map_err(|e| e.to_string())
    };

    // xi1 = xi2 = pi/4
    let printed = Trace::sample(grid, |p| literal_eighth_order(FRAC_PI_4, FRAC_PI_4, &source, m, p)).normalized();
    let product = port_product(FRAC_PI_4)?;
    ensure(printed.max_abs_diff(&product) < 1e-12, || "formula and port product disagree".into())?;
    for t in [&printed, &product] {
        let all = fringe::analyze(t, 0.01).map_err(|e| e.to_string())?;
        ensure(all.fringe_count == 6, || format!("{} fringes, want 6", all.fringe_count))?;
        let lo = all.peak_heights.iter().copied().fold(f64::INFINITY, f64::min);
        ensure(lo < 0.5, || format!("fringe heights {:?} are not unequal", all.peak_heights))?;
        ensure(count_fringes(t, 0.5) != 8, || "eight fringes".into())?;
    }

    // xi1 = pi/4, xi2 = 3pi/4
    let printed = Trace::sample(grid, |p| literal_eighth_order(FRAC_PI_4, 3.0 * FRAC_PI_4, &source, m, p)).normalized();
    let product = port_product(3.0 * FRAC_PI_4)?;
    for t in [&printed, &product] {
        let r = fringe::analyze(t, 0.5).map_err(|e| e.to_string())?;
        ensure(r.fringe_count == 8, || format!("{} fringes, want 8", r.fringe_count))?;
        ensure(r.peak_heights.iter().all(|h| (h - 1.0).abs() < 1e-9), || format!("heights {:?}", r.peak_heights))?;
        let d = t.max_abs_diff(&sin2_4phi);
        ensure(d < 1e-12, || format!("sin^2(4 phi) residual {d:e}"))?;
    }
    Ok("pi/4,pi/4: 6 unequal fringes (min height 1/64); pi/4,3pi/4: 8 equal, matches sin^2(4phi)".into())
}

/// 7. Photon counting: sup-norm < 0.01 at exposure 1e8; reproducible bytes.
fn monte_carlo() -> Outcome {
    let source = SourceSpec::from_intensity(1.0).map_err(|e| e.to_string())?;
    let req = CorrelationRequest::new(canonical_ports(2, FRAC_PI_4), 4096, 8).map_err(|e| e.to_string())?;
    let est = estimate_trace(&req, &source, 8, 1e8, 2024).map_err(|e| e.to_string())?;
    let analytic = normalized_product(&req, &source, 8).map_err(|e| e.to_string())?;
    let dev = est.trace.max_abs_diff(&analytic);
    ensure(dev < 0.01, || format!("sup deviation {dev}"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for run in ["a.csv", "b.csv"] {
        let out = dir.path().join(run);
        let status = eraser()
            .args(["montecarlo", "--order", "2", "--exposure", "1e8", "--seed", "7", "--config"])
            .arg(fixture("fig1.bench"))
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?
            .status;
        ensure(status.success(), || format!("montecarlo exited {status:?}"))?;
        files.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(files[0] == files[1], || "same seed, different bytes".into())?;
    Ok(format!("sup deviation {dev:.1e}; identical CSV for identical seeds"))
}

fn random_config() -> impl Strategy<Value = BenchConfig> {
    let angle = |hi_deg: f64| {
        prop_oneof![
            (0.0..hi_deg).prop_map(Angle::Degrees),
            (0.0..hi_deg.to_radians()).prop_map(Angle::Radians),
        ]
    };
    (
        0.0..1e3f64,
        angle(90.0),
        16usize..100_000,
        prop::collection::vec(angle(360.0), 1..12),
        0usize..20,
    )
        .prop_map(|(i0, theta, grid_points, xis, extra_ports)| {
            let blocks: Vec<BlockSpec> = xis
                .into_iter()
                .enumerate()
                .filter_map(|(k, xi)| BlockSpec::new(format!("B{k}"), xi).ok())
                .collect();
            BenchConfig {
                source: SourceSpec::from_intensity(i0).unwrap(),
                m: 2 * blocks.len().max(1) + extra_ports,
                blocks,
                theta,
                grid_points,
            }
        })
        .prop_filter("at least one block", |c| !c.blocks.is_empty())
}

/// 8. Parser: four-block document, 1000-config round trip, malformed fixtures, M >= N.
fn parser() -> Outcome {
    let c = load("fig1.bench");
    ensure(c.source.i0() == 1.0 && c.m == 8 && c.grid_points == 4096, || format!("{c:?}"))?;
    ensure((c.theta_radians() - FRAC_PI_4).abs() < 1e-15, || "theta".into())?;
    let chis: Vec<f64> = port_phase_table(&c).map_err(|e| e.to_string())?.iter().map(|p| p.chi).collect();
    let want = [PI / 2.0, 1.5 * PI, 0.0, PI, 1.25 * PI, FRAC_PI_4, FRAC_PI_4, 1.25 * PI];
    ensure(chis.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12), || format!("chi table {chis:?}"))?;

    let mut runner = TestRunner::new(RunnerConfig { cases: 1000, failure_persistence: None, ..RunnerConfig::default() });
    runner
        .run(&random_config(), |config| {
            let back = dsl::parse(&dsl::serialize(&config));
            prop_assert!(back.diagnostics.is_empty(), "{:?}", back.diagnostics);
            prop_assert_eq!(back.config.as_ref(), Some(&config));
            Ok(())
        })
        .map_err(|e| format!("round trip: {e}"))?;

    let mut malformed = 0;
    for entry in std::fs::read_dir(fixture("")).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if !name.starts_with("malformed_") {
            continue;
        }
        malformed += 1;
        let doc = dsl::parse(&std::fs::read_to_string(&path).map_err(|e| e.to_string())?);
        let errors: Vec<_> = doc.diagnostics.iter().filter(|d| d.is_error()).collect();
        ensure(!errors.is_empty() && doc.config.is_none(), || format!("{name}: accepted"))?;
        ensure(errors.iter().all(|d| d.line >= 1 && d.column >= 1), || format!("{name}: unpositioned"))?;
        let out = eraser().arg("sweep").arg("--config").arg(&path).arg("--out").arg(std::env::temp_dir().join("x.csv")).output();
        let out = out.map_err(|e| e.to_string())?;
        ensure(!out.status.success(), || format!("{name}: exit status 0"))?;
        let stderr = String::from_utf8_lossy(&out.stderr);
        ensure(stderr.contains(": error:"), || format!("{name}: no diagnostic on stderr: {stderr}"))?;
    }
    ensure(malformed >= 5, || format!("only {malformed} malformed fixtures"))?;

    let small = load("two_blocks_m4.bench");
    ensure(
        dsl::validate(&small, 8).iter().any(|d| d.is_error() && d.message.starts_with("M < N")),
        || "M < N accepted by validate".into(),
    )?;
    let out = eraser()
        .args(["correlate", "--order", "8", "--config"])
        .arg(fixture("two_blocks_m4.bench"))
        .arg("--out")
        .arg(std::env::temp_dir().join("m_lt_n.csv"))
        .output()
        .map_err(|e| e.to_string())?;
    ensure(!out.status.success(), || "M < N accepted by the CLI".into())?;
    Ok(format!("1000 round trips, {malformed} malformed fixtures rejected, M < N rejected"))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 eraser fringes", eraser_fringes),
        ("2 conservation", conservation),
        ("3 fourth-order formula", fourth_order_formula),
        ("4 closed-form equivalence", closed_form_equivalence),
        ("5 fringe metrics", fringe_metrics),
        ("6 literal eighth order", literal_eighth_order_check),
        ("7 monte carlo", monte_carlo),
        ("8 parser", parser),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                println!("FAIL  {name}: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
