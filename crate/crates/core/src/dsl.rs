//! Line-oriented bench documents.
//!
//! ```text
//! # four-block bench
//! source intensity=1
//! ports M=8
//! polarizer theta_deg=45
//! grid points=4096
//! block A xi_deg=90
//! block B xi_deg=0
//! block C xi_deg=45
//! block D xi_deg=135
//! ```
//!
//! `#` starts a comment. Angles may be given in degrees (`theta_deg`,
//! `xi_deg`) or radians (`theta_rad`, `xi_rad`); the unit is kept so that
//! [`serialize`] reproduces every value bit for bit. `\n` and `\r\n` line
//! endings are accepted.
//!
//! Problems are reported as [`Diagnostic`]s with 1-based line and column; a
//! document with any error yields no config.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bench::{block_ports, Angle, BenchConfig, BlockSpec, SourceSpec, MIN_GRID_POINTS};
use crate::correlation::canonical_layout;
use crate::TWO_PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { line, column, severity: Severity::Error, message: message.into() }
    }

    fn warning(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { line, column, severity: Severity::Warning, message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.severity, self.message)
    }
}

/// Where each directive of a document lives, for positioning later checks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DirectiveLines {
    pub source: usize,
    pub ports: usize,
    pub polarizer: usize,
    pub grid: usize,
    pub blocks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    pub raw: String,
    pub config: Option<BenchConfig>,
    pub diagnostics: Vec<Diagnostic>,
    pub lines: DirectiveLines,
}

impl ConfigDocument {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }

    /// [`validate`] with diagnostics positioned at this document's directives.
    /// Returns nothing when the document did not parse.
    pub fn validate(&self, requested_order: usize) -> Vec<Diagnostic> {
        match &self.config {
            Some(c) => validate_at(c, requested_order, &self.lines),
            None => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let code = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (byte, ch) in code.char_indices().chain(std::iter::once((code.len(), ' '))) {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                let column = code[..s].chars().count() + 1;
                tokens.push(Token { text: &code[s..byte], column });
            }
        } else if start.is_none() {
            start = Some(byte);
        }
    }
    tokens
}

/// `key=value` split; the value carries its own column.
fn split_assignment<'a>(tok: Token<'a>) -> Option<(Token<'a>, Token<'a>)> {
    let eq = tok.text.find('=')?;
    let key = Token { text: &tok.text[..eq], column: tok.column };
    let value = Token {
        text: &tok.text[eq + 1..],
        column: tok.column + tok.text[..=eq].chars().count(),
    };
    Some((key, value))
}

#[derive(Default)]
struct Builder {
    intensity: Option<f64>,
    m: Option<usize>,
    theta: Option<Angle>,
    grid: Option<usize>,
    blocks: Vec<BlockSpec>,
    labels: HashSet<String>,
    lines: DirectiveLines,
    diags: Vec<Diagnostic>,
}

struct LineCtx<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
}

impl LineCtx<'_> {
    fn end_column(&self) -> usize {
        self.tokens.last().map_or(1, |t| t.column + t.text.chars().count())
    }
}

impl Builder {
    fn err(&mut self, line: usize, column: usize, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(line, column, msg));
    }

    /// Exactly one `key=value` argument after `skip` leading tokens, with a
    /// key from `keys`. Returns the matched key and the value token.
    fn single_assignment<'a>(
        &mut self,
        ctx: &LineCtx<'a>,
        skip: usize,
        keys: &[&'static str],
    ) -> Option<(&'static str, Token<'a>)> {
        let args = &ctx.tokens[skip..];
        let Some(&arg) = args.first() else {
            let expected = keys.join(" or ");
            self.err(ctx.number, ctx.end_column(), format!("expected {expected}=<value>"));
            return None;
        };
        if let Some(extra) = args.get(1) {
            self.err(ctx.number, extra.column, format!("unexpected token {:?}", extra.text));
            return None;
        }
        let Some((key, value)) = split_assignment(arg) else {
            self.err(ctx.number, arg.column, format!("expected key=value, found {:?}", arg.text));
            return None;
        };
        let Some(&matched) = keys.iter().find(|k| **k == key.text) else {
            let expected = keys.join(" or ");
            self.err(ctx.number, key.column, format!("unknown key {:?}, expected {expected}", key.text));
            return None;
        };
        if value.text.is_empty() {
            self.err(ctx.number, value.column, format!("missing value for {matched}"));
            return None;
        }
        Some((matched, value))
    }

    fn real(&mut self, line: usize, value: Token<'_>, what: &str) -> Option<f64> {
        match f64::from_str(value.text) {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.err(line, value.column, format!("{what}: expected a finite real number, found {:?}", value.text));
                None
            }
        }
    }

    fn integer(&mut self, line: usize, value: Token<'_>, what: &str) -> Option<usize> {
        match usize::from_str(value.text) {
            Ok(v) => Some(v),
            Err(_) => {
                self.err(line, value.column, format!("{what}: expected a non-negative integer, found {:?}", value.text));
                None
            }
        }
    }

    fn first_occurrence(&mut self, ctx: &LineCtx<'_>, seen_at: usize, name: &str) -> bool {
        if seen_at != 0 {
            self.err(ctx.number, ctx.tokens[0].column, format!("duplicate {name} directive (first on line {seen_at})"));
            return false;
        }
        true
    }

    fn check_port_budget(&mut self, line: usize, column: usize) {
        if let Some(m) = self.m {
            if m < 2 * self.blocks.len() {
                self.err(
                    line,
                    column,
                    format!("M = {m} is too small for {} blocks of two ports", self.blocks.len()),
                );
            }
        }
    }

    fn source(&mut self, ctx: &LineCtx<'_>) {
        if !self.first_occurrence(ctx, self.lines.source, "source") {
            return;
        }
        self.lines.source = ctx.number;
        let Some((_, value)) = self.single_assignment(ctx, 1, &["intensity"]) else { return };
        let Some(v) = self.real(ctx.number, value, "intensity") else { return };
        if v < 0.0 {
            self.err(ctx.number, value.column, "intensity must be >= 0");
            return;
        }
        self.intensity = Some(v);
    }

    fn ports(&mut self, ctx: &LineCtx<'_>) {
        if !self.first_occurrence(ctx, self.lines.ports, "ports") {
            return;
        }
        self.lines.ports = ctx.number;
        let Some((_, value)) = self.single_assignment(ctx, 1, &["M"]) else { return };
        let Some(m) = self.integer(ctx.number, value, "M") else { return };
        if m == 0 {
            self.err(ctx.number, value.column, "M must be at least 1");
            return;
        }
        self.m = Some(m);
        self.check_port_budget(ctx.number, value.column);
    }

    fn polarizer(&mut self, ctx: &LineCtx<'_>) {
        if !self.first_occurrence(ctx, self.lines.polarizer, "polarizer") {
            return;
        }
        self.lines.polarizer = ctx.number;
        let Some((key, value)) = self.single_assignment(ctx, 1, &["theta_deg", "theta_rad"]) else { return };
        let Some(v) = self.real(ctx.number, value, key) else { return };
        self.theta = Some(if key == "theta_deg" { Angle::Degrees(v) } else { Angle::Radians(v) });
    }

    fn grid(&mut self, ctx: &LineCtx<'_>) {
        if !self.first_occurrence(ctx, self.lines.grid, "grid") {
            return;
        }
        self.lines.grid = ctx.number;
        let Some((_, value)) = self.single_assignment(ctx, 1, &["points"]) else { return };
        let Some(n) = self.integer(ctx.number, value, "points") else { return };
        if n < MIN_GRID_POINTS {
            self.err(ctx.number, value.column, format!("grid needs at least {MIN_GRID_POINTS} points"));
            return;
        }
        self.grid = Some(n);
    }

    fn block(&mut self, ctx: &LineCtx<'_>) {
        let Some(label) = ctx.tokens.get(1).copied() else {
            self.err(ctx.number, ctx.end_column(), "expected a block label");
            return;
        };
        if label.text.contains('=') || !label.text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.err(ctx.number, label.column, format!("invalid block label {:?}", label.text));
            return;
        }
        if self.labels.contains(label.text) {
            self.err(ctx.number, label.column, format!("duplicate block label {:?}", label.text));
            return;
        }
        let Some((key, value)) = self.single_assignment(ctx, 2, &["xi_deg", "xi_rad"]) else { return };
        let Some(v) = self.real(ctx.number, value, key) else { return };
        let (xi, upper) = if key == "xi_deg" { (Angle::Degrees(v), 360.0) } else { (Angle::Radians(v), TWO_PI) };
        if !(0.0..upper).contains(&v) {
            let unit = if key == "xi_deg" { "[0, 360)" } else { "[0, 2pi)" };
            self.err(ctx.number, value.column, format!("{key} must lie in {unit}"));
            return;
        }
        let block = match BlockSpec::new(label.text, xi) {
            Ok(b) => b,
            Err(e) => {
                self.err(ctx.number, value.column, e.to_string());
                return;
            }
        };
        self.labels.insert(label.text.to_string());
        self.blocks.push(block);
        self.lines.blocks.push(ctx.number);
        self.check_port_budget(ctx.number, label.column);
    }

    fn finish(mut self, raw: &str, last_line: usize) -> ConfigDocument {
        let at = last_line.max(1);
        if self.lines.source == 0 {
            self.err(at, 1, "missing source");
        }
        if self.lines.ports == 0 {
            self.err(at, 1, "missing ports");
        }
        if self.lines.polarizer == 0 {
            self.err(at, 1, "missing polarizer");
        }
        if self.lines.grid == 0 {
            self.err(at, 1, "missing grid");
        }
        if self.lines.blocks.is_empty() && !self.diags.iter().any(|d| d.message.contains("block")) {
            self.err(at, 1, "missing block");
        }

        let config = if self.diags.iter().any(Diagnostic::is_error) {
            None
        } else {
            match (self.intensity, self.m, self.theta, self.grid) {
                (Some(i0), Some(m), Some(theta), Some(grid_points)) => {
                    let source = SourceSpec::from_intensity(i0).expect("intensity checked while parsing");
                    let c = BenchConfig { source, m, blocks: self.blocks, theta, grid_points };
                    match c.check() {
                        Ok(()) => Some(c),
                        Err(e) => {
                            self.diags.push(Diagnostic::error(at, 1, e.to_string()));
                            None
                        }
                    }
                }
                _ => None,
            }
        };
        ConfigDocument { raw: raw.to_string(), config, diagnostics: self.diags, lines: self.lines }
    }
}

/// Parses a bench document. Never fails: problems come back as diagnostics.
pub fn parse(text: &str) -> ConfigDocument {
    let mut b = Builder::default();
    let mut last_line = 0;
    for (i, line) in text.split('\n').enumerate() {
        let number = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        let tokens = tokenize(line);
        if tokens.is_empty() {
            continue;
        }
        last_line = number;
        let ctx = LineCtx { number, tokens };
        match ctx.tokens[0].text {
            "source" => b.source(&ctx),
            "ports" => b.ports(&ctx),
            "polarizer" => b.polarizer(&ctx),
            "grid" => b.grid(&ctx),
            "block" => b.block(&ctx),
            other => {
                let col = ctx.tokens[0].column;
                b.err(number, col, format!("unknown directive {other:?}"));
            }
        }
    }
    b.finish(text, last_line)
}

fn angle_assignment(prefix: &str, angle: Angle) -> String {
    match angle {
        Angle::Degrees(d) => format!("{prefix}_deg={d}"),
        Angle::Radians(r) => format!("{prefix}_rad={r}"),
    }
}

/// Canonical text for a config. `parse(serialize(c))` yields `c` again.
pub fn serialize(config: &BenchConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("source intensity={}\n", config.source.i0()));
    out.push_str(&format!("ports M={}\n", config.m));
    out.push_str(&format!("polarizer {}\n", angle_assignment("theta", config.theta)));
    out.push_str(&format!("grid points={}\n", config.grid_points));
    for b in &config.blocks {
        out.push_str(&format!("block {} {}\n", b.label, angle_assignment("xi", b.xi)));
    }
    out
}

/// Lines of the canonical serialization, used when a config has no document.
fn canonical_lines(config: &BenchConfig) -> DirectiveLines {
    DirectiveLines {
        source: 1,
        ports: 2,
        polarizer: 3,
        grid: 4,
        blocks: (0..config.blocks.len()).map(|k| 5 + k).collect(),
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TWO_PI);
    d.min(TWO_PI - d)
}

/// Checks a config against a requested correlation order `N`.
///
/// Errors: `M < N`, fewer than `16 N` grid points, polarizer outside
/// `[0, pi/2]`. Warning: the bench lacks some projection phase of the
/// canonical order-`N` layout, so the product of its ports will not follow
/// `sin^2(N phi / 2)`. Positions refer to the canonical serialization.
pub fn validate(config: &BenchConfig, requested_order: usize) -> Vec<Diagnostic> {
    validate_at(config, requested_order, &canonical_lines(config))
}

fn validate_at(config: &BenchConfig, n: usize, lines: &DirectiveLines) -> Vec<Diagnostic> {
    let line = |l: usize| l.max(1);
    let mut diags = Vec::new();
    if config.m < n {
        diags.push(Diagnostic::error(
            line(lines.ports),
            1,
            format!("M < N: {} ports cannot supply an order-{n} product", config.m),
        ));
    }
    if config.grid_points < 16 * n {
        diags.push(Diagnostic::error(
            line(lines.grid),
            1,
            format!("grid of {} points is below 16 * N = {}", config.grid_points, 16 * n),
        ));
    }
    let theta = config.theta_radians();
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        diags.push(Diagnostic::error(
            line(lines.polarizer),
            1,
            format!("polarizer angle {theta} rad lies outside [0, pi/2]"),
        ));
    }
    if n > 0 {
        let chis: Vec<f64> = config.blocks.iter().flat_map(|b| block_ports(b, theta)).map(|p| p.chi).collect();
        let missing: Vec<f64> = canonical_layout(n)
            .into_iter()
            .filter(|c| !chis.iter().any(|x| circular_distance(*x, *c) < 1e-9))
            .collect();
        if !missing.is_empty() {
            let listed: Vec<String> = missing.iter().map(|c| format!("{:.4}°", c.to_degrees())).collect();
            diags.push(Diagnostic::warning(
                line(lines.blocks.first().copied().unwrap_or(1)),
                1,
                format!(
                    "non-canonical ξ: product will not match sin²(Nφ/2) for N = {n} (missing projection phases {})",
                    listed.join(", ")
                ),
            ));
        }
    }
    diags.sort_by_key(|d| d.line);
    diags
}
