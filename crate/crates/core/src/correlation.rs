//! Nth-order intensity products across eraser ports.
//!
//! The product of `N` port intensities whose projection phases are spread
//! evenly around the circle,
//!
//! ```text
//! chi_k = pi + 2 pi k / N,   k = 0..N
//! ```
//!
//! collapses through `prod_k sin(x + k pi / N) = sin(N x) / 2^(N-1)` to
//!
//! ```text
//! prod_k (I0/2M)(1 + cos(phi - chi_k)) = (I0/M)^N sin^2(N phi / 2) / 4^(N-1)
//! ```
//!
//! a fringe with period `2 pi / N` and its first maximum at `pi / N`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::bench::{block_ports, port_intensity_unchecked, BlockSpec, PortSpec, SourceSpec};
use crate::fringe::{self, FringeReport};
use crate::trace::{phase_grid, Trace};
use crate::{Error, Result, TWO_PI};

/// Ports whose intensities are multiplied, evaluated on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRequest {
    pub ports: Vec<PortSpec>,
    pub grid_points: usize,
}

impl CorrelationRequest {
    /// Fails on an empty port list, on more ports than the bench has (`N > M`)
    /// or on a grid of fewer than 16 points.
    pub fn new(ports: Vec<PortSpec>, grid_points: usize, m: usize) -> Result<Self> {
        if ports.is_empty() {
            return Err(Error::Request("correlation needs at least one port".into()));
        }
        if ports.len() > m {
            return Err(Error::Request(format!(
                "order N = {} exceeds the number of divided ports M = {m}",
                ports.len()
            )));
        }
        if grid_points < crate::bench::MIN_GRID_POINTS {
            return Err(Error::Request(format!("grid of {grid_points} points is too coarse")));
        }
        Ok(Self { ports, grid_points })
    }

    pub fn order_n(&self) -> usize {
        self.ports.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub order_n: usize,
    pub trace: Trace,
    pub normalized_trace: Trace,
    /// Largest gap between the normalized trace and normalized `sin^2(N phi/2)`.
    pub closed_form_residual: f64,
    pub fringe: FringeReport,
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        Err(Error::Config("port count M must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Product of the two port intensities of one block at 45° polarizers:
/// `(I0/2M)^2 sin^2(phi - xi)`.
pub fn pair_correlation(block: &BlockSpec, source: &SourceSpec, m: usize, phi: f64) -> Result<f64> {
    check_m(m)?;
    let [p1, p2] = block_ports(block, FRAC_PI_4);
    Ok(port_intensity_unchecked(&p1, source.i0(), m, phi) * port_intensity_unchecked(&p2, source.i0(), m, phi))
}

/// Pointwise product of the requested port intensities.
///
/// Values are exact products; for very large `N` and small `I0/M` they can
/// underflow. [`normalized_product`] keeps the shape in that regime.
pub fn product_correlation(request: &CorrelationRequest, source: &SourceSpec, m: usize) -> Result<Trace> {
    check_m(m)?;
    let i0 = source.i0();
    Ok(Trace::sample(request.grid_points, |phi| {
        request
            .ports
            .iter()
            .map(|p| port_intensity_unchecked(p, i0, m, phi))
            .product()
    }))
}

/// A product kept as `mantissa * 2^exponent` so that long products neither
/// underflow nor overflow.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    mantissa: f64,
    exponent: i64,
}

impl Scaled {
    const ONE: Scaled = Scaled { mantissa: 1.0, exponent: 0 };

    fn times(self, factor: f64) -> Scaled {
        let mut s = Scaled { mantissa: self.mantissa * factor, exponent: self.exponent };
        if s.mantissa != 0.0 && s.mantissa.is_finite() {
            let e = s.mantissa.abs().log2().floor() as i32;
            s.mantissa *= pow2(-e);
            s.exponent += i64::from(e);
        }
        s
    }

    fn is_zero(self) -> bool {
        self.mantissa == 0.0
    }

    fn ratio(self, denom: Scaled) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let shift = self.exponent - denom.exponent;
        ldexp(self.mantissa / denom.mantissa, shift)
    }

    fn greater(self, other: Scaled) -> bool {
        match (self.is_zero(), other.is_zero()) {
            (true, _) => false,
            (false, true) => true,
            _ => (self.exponent, self.mantissa) > (other.exponent, other.mantissa),
        }
    }
}

fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// `x * 2^n` without intermediate overflow.
fn ldexp(mut x: f64, mut n: i64) -> f64 {
    while n > 1000 {
        x *= pow2(1000);
        n -= 1000;
    }
    while n < -1000 {
        x *= pow2(-1000);
        n += 1000;
        if x == 0.0 {
            return 0.0;
        }
    }
    x * pow2(n as i32)
}

/// Product trace divided by its sampled maximum, accumulated with an explicit
/// binary exponent so the shape survives orders where the raw values underflow.
pub fn normalized_product(request: &CorrelationRequest, source: &SourceSpec, m: usize) -> Result<Trace> {
    check_m(m)?;
    let i0 = source.i0();
    let phis = phase_grid(request.grid_points);
    let products: Vec<Scaled> = phis
        .iter()
        .map(|&phi| {
            request
                .ports
                .iter()
                .fold(Scaled::ONE, |acc, p| acc.times(port_intensity_unchecked(p, i0, m, phi)))
        })
        .collect();
    let peak = products
        .iter()
        .copied()
        .fold(Scaled { mantissa: 0.0, exponent: 0 }, |best, s| if s.greater(best) { s } else { best });
    let values = if peak.is_zero() {
        vec![0.0; phis.len()]
    } else {
        products.iter().map(|s| s.ratio(peak)).collect()
    };
    Ok(Trace::new(phis, values))
}

/// The eighth-order product over four blocks as a printed closed formula:
/// `I0^8 / (2^12 M^8) sin^2(2 phi) sin^2(phi - xi1) sin^2(phi - xi2)`.
///
/// Kept independent of [`product_correlation`] so the two can be compared. The
/// prefactor is the printed one; the port product itself carries `2^-10`.
pub fn literal_eighth_order(xi1: f64, xi2: f64, source: &SourceSpec, m: usize, phi: f64) -> f64 {
    let i0 = source.i0();
    let pre = i0.powi(8) / (2f64.powi(12) * (m as f64).powi(8));
    pre * (2.0 * phi).sin().powi(2) * (phi - xi1).sin().powi(2) * (phi - xi2).sin().powi(2)
}

/// `I0^N / (2^N M^N) prod_j sin^2(phi) sin^2(phi - xi_j)` with `N` the length
/// of `xis`. For exploring user-chosen phase lists only: the form has two
/// sine factors per order and does not describe a port product in general.
pub fn literal_generalized_product(xis: &[f64], source: &SourceSpec, m: usize, phi: f64) -> f64 {
    let n = xis.len() as i32;
    let pre = (source.i0() / (2.0 * m as f64)).powi(n);
    let s2 = phi.sin().powi(2);
    xis.iter().fold(pre, |acc, xi| acc * s2 * (phi - xi).sin().powi(2))
}

/// `I0^N / (2^N M^N) sin^2(N phi / 2)`, prefactor as printed.
///
/// The canonical port product is this shape times `4^-(N-1)`, so compare the
/// two only after peak normalization.
pub fn closed_form(order_n: usize, source: &SourceSpec, m: usize, phi: f64) -> f64 {
    let pre = (source.i0() / (2.0 * m as f64)).powi(order_n as i32);
    pre * (order_n as f64 * phi / 2.0).sin().powi(2)
}

/// `sin^2(N phi / 2)` on the grid, divided by its sampled maximum.
pub fn normalized_closed_form(order_n: usize, grid_points: usize) -> Trace {
    Trace::sample(grid_points, |phi| (order_n as f64 * phi / 2.0).sin().powi(2)).normalized()
}

/// Projection phases `pi + 2 pi k / N` wrapped into `[0, 2 pi)`.
pub fn canonical_layout(order_n: usize) -> Vec<f64> {
    (0..order_n)
        .map(|k| (PI + TWO_PI * k as f64 / order_n as f64).rem_euclid(TWO_PI))
        .collect()
}

/// Ports realising [`canonical_layout`]. For even `N`, phases `k` and
/// `k + N/2` differ by `pi` and share a block; for odd `N` no two phases do,
/// so every port is a block of its own.
pub fn canonical_ports(order_n: usize, theta: f64) -> Vec<PortSpec> {
    let chis = canonical_layout(order_n);
    if order_n % 2 == 1 {
        return chis
            .into_iter()
            .enumerate()
            .map(|(k, chi)| PortSpec { block: format!("K{}", k + 1), index: 1, chi, theta })
            .collect();
    }
    let half = order_n / 2;
    (0..half)
        .flat_map(|j| {
            [(1u8, j), (2u8, j + half)].map(|(index, k)| PortSpec {
                block: format!("K{}", j + 1),
                index,
                chi: chis[k],
                theta,
            })
        })
        .collect()
}

/// Minimum grid for [`verify_equivalence`].
pub const MIN_VERIFY_GRID: usize = 512;

/// Max pointwise gap between the normalized canonical product of order `N` and
/// normalized `sin^2(N phi / 2)`.
pub fn verify_equivalence(order_n: usize, grid_points: usize) -> Result<f64> {
    if order_n == 0 {
        return Err(Error::Domain("order must be at least 1".into()));
    }
    if grid_points < MIN_VERIFY_GRID {
        return Err(Error::Domain(format!(
            "verification needs at least {MIN_VERIFY_GRID} grid points, got {grid_points}"
        )));
    }
    // I0 = 2M makes every port factor (1 + cos(phi - chi)).
    let m = order_n;
    let source = SourceSpec::from_intensity(2.0 * m as f64)?;
    let request = CorrelationRequest::new(canonical_ports(order_n, FRAC_PI_4), grid_points, m)?;
    let product = normalized_product(&request, &source, m)?;
    Ok(product.max_abs_diff(&normalized_closed_form(order_n, grid_points)))
}

/// Product trace plus fringe metrics and the distance to the `sin^2(N phi/2)`
/// shape of the same order.
pub fn correlate(
    request: &CorrelationRequest,
    source: &SourceSpec,
    m: usize,
    threshold: f64,
) -> Result<CorrelationReport> {
    let trace = product_correlation(request, source, m)?;
    let normalized = normalized_product(request, source, m)?;
    let n = request.order_n();
    let residual = normalized.max_abs_diff(&normalized_closed_form(n, request.grid_points));
    let fringe = fringe::analyze(&normalized, threshold)?;
    Ok(CorrelationReport {
        order_n: n,
        trace,
        normalized_trace: normalized,
        closed_form_residual: residual,
        fringe,
    })
}

fn check_counting_inputs(mean_intensity: f64, exposure: f64) -> Result<()> {
    if !(mean_intensity.is_finite() && mean_intensity >= 0.0) {
        return Err(Error::Domain(format!("mean intensity must be finite and >= 0, got {mean_intensity}")));
    }
    if !(exposure.is_finite() && exposure >= 0.0) {
        return Err(Error::Domain(format!("exposure must be finite and >= 0, got {exposure}")));
    }
    Ok(())
}

fn draw_counts(rng: &mut ChaCha8Rng, mean: f64) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::Domain(format!("poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// One Poisson photocount with mean `mean_intensity * exposure`.
pub fn sample_counts(mean_intensity: f64, exposure: f64, seed: u64) -> Result<u64> {
    check_counting_inputs(mean_intensity, exposure)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_counts(&mut rng, mean_intensity * exposure)
}

/// Counting-statistics estimate of a product trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountEstimate {
    /// Product of count rates, divided by its sampled maximum.
    pub trace: Trace,
    /// `counts[i][k]`: photocounts of port `k` at grid point `i`.
    pub counts: Vec<Vec<u64>>,
}

/// Draws photocounts for every port at every grid point from one seeded
/// stream, then forms the normalized product of the count rates.
pub fn estimate_trace(
    request: &CorrelationRequest,
    source: &SourceSpec,
    m: usize,
    exposure: f64,
    seed: u64,
) -> Result<CountEstimate> {
    check_m(m)?;
    check_counting_inputs(0.0, exposure)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phis = phase_grid(request.grid_points);
    let mut counts = Vec::with_capacity(phis.len());
    let mut values = Vec::with_capacity(phis.len());
    for &phi in &phis {
        let mut row = Vec::with_capacity(request.ports.len());
        let mut product = 1.0;
        for p in &request.ports {
            let mean = port_intensity_unchecked(p, source.i0(), m, phi);
            let c = draw_counts(&mut rng, mean * exposure)?;
            product *= if exposure > 0.0 { c as f64 / exposure } else { 0.0 };
            row.push(c);
        }
        counts.push(row);
        values.push(product);
    }
    Ok(CountEstimate { trace: Trace::new(phis, values).normalized(), counts })
}
