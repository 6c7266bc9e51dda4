//! The eraser bench: a polarization-tagged Michelson interferometer whose
//! output is divided into `M` detector ports, grouped in blocks of two.
//!
//! Every port is characterized by a projection phase `chi`. Behind a polarizer
//! at angle `theta` it sees
//!
//! ```text
//! amplitude = sqrt(I0 / 2M) (cos(theta) e^{i phi} + sin(theta) e^{i chi})
//! intensity = (I0 / 2M) (1 + sin(2 theta) cos(phi - chi))
//! ```
//!
//! up to a global phase. At `theta = pi/4` this is the full-visibility eraser
//! fringe `(I0 / 2M)(1 + cos(phi - chi))`. The two ports of a block sit at
//! `chi` and `chi + pi`, the two outputs of the splitter that feeds them.

use std::collections::HashSet;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use serde::Serialize;

use crate::polarization::{intensity, polarizer_project, retarder_phase, ComplexAmp, JonesVector};
use crate::trace::Trace;
use crate::{Error, Result, TWO_PI};

/// An angle as given by the user. Keeps the original unit so a document can be
/// written back without any conversion loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "unit", content = "value", rename_all = "lowercase")]
pub enum Angle {
    Radians(f64),
    Degrees(f64),
}

impl Angle {
    pub fn radians(self) -> f64 {
        match self {
            Angle::Radians(r) => r,
            Angle::Degrees(d) => d.to_radians(),
        }
    }
}

impl From<f64> for Angle {
    fn from(radians: f64) -> Self {
        Angle::Radians(radians)
    }
}

/// The cw source. `i0 = e0^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceSpec {
    e0: f64,
    i0: f64,
}

impl SourceSpec {
    pub fn from_intensity(i0: f64) -> Result<Self> {
        if !(i0.is_finite() && i0 >= 0.0) {
            return Err(Error::Config(format!("source intensity must be finite and >= 0, got {i0}")));
        }
        Ok(Self { e0: i0.sqrt(), i0 })
    }

    pub fn from_amplitude(e0: f64) -> Result<Self> {
        if !(e0.is_finite() && e0 >= 0.0) {
            return Err(Error::Config(format!("field amplitude must be finite and >= 0, got {e0}")));
        }
        Ok(Self { e0, i0: e0 * e0 })
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn i0(&self) -> f64 {
        self.i0
    }
}

/// One measurement block: two eraser ports behind a shared retarder phase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSpec {
    pub label: String,
    pub xi: Angle,
}

impl BlockSpec {
    pub fn new(label: impl Into<String>, xi: impl Into<Angle>) -> Result<Self> {
        let label = label.into();
        let xi = xi.into();
        let r = xi.radians();
        if !(0.0..TWO_PI).contains(&r) {
            return Err(Error::Config(format!(
                "block {label}: retarder phase must lie in [0, 2pi), got {r} rad"
            )));
        }
        Ok(Self { label, xi })
    }
}

/// A single detector port.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortSpec {
    pub block: String,
    /// 1 or 2 within the block.
    pub index: u8,
    /// Projection phase, wrapped into `[0, 2 pi)`.
    pub chi: f64,
    /// Polarizer angle from horizontal.
    pub theta: f64,
}

impl PortSpec {
    pub fn name(&self) -> String {
        format!("{}{}", self.block, self.index)
    }
}

impl fmt::Display for PortSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.block, self.index)
    }
}

/// Full bench description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchConfig {
    pub source: SourceSpec,
    /// Number of ports the output is divided into.
    pub m: usize,
    pub blocks: Vec<BlockSpec>,
    /// Common polarizer angle.
    pub theta: Angle,
    pub grid_points: usize,
}

pub const MIN_GRID_POINTS: usize = 16;

impl BenchConfig {
    /// Checks the structural invariants: `M >= 1`, `M >= 2 * blocks`, unique
    /// block labels, a grid of at least 16 points.
    pub fn check(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Config("port count M must be at least 1".into()));
        }
        if self.m < 2 * self.blocks.len() {
            return Err(Error::Config(format!(
                "{} blocks need 2 * {} = {} ports, but M = {}",
                self.blocks.len(),
                self.blocks.len(),
                2 * self.blocks.len(),
                self.m
            )));
        }
        if self.grid_points < MIN_GRID_POINTS {
            return Err(Error::Config(format!(
                "grid must have at least {MIN_GRID_POINTS} points, got {}",
                self.grid_points
            )));
        }
        check_unique_labels(&self.blocks)
    }

    pub fn theta_radians(&self) -> f64 {
        self.theta.radians()
    }

    pub fn block(&self, label: &str) -> Option<&BlockSpec> {
        self.blocks.iter().find(|b| b.label == label)
    }
}

fn check_unique_labels(blocks: &[BlockSpec]) -> Result<()> {
    let mut seen = HashSet::new();
    for b in blocks {
        if !seen.insert(b.label.as_str()) {
            return Err(Error::Config(format!("duplicate block label {:?}", b.label)));
        }
    }
    Ok(())
}

/// The four-block layout: A at `pi/2`, reference B at 0, C and D at `xi1`, `xi2`.
pub fn four_block_layout(
    i0: f64,
    m: usize,
    xi1: f64,
    xi2: f64,
    grid_points: usize,
) -> Result<BenchConfig> {
    let config = BenchConfig {
        source: SourceSpec::from_intensity(i0)?,
        m,
        blocks: vec![
            BlockSpec::new("A", PI / 2.0)?,
            BlockSpec::new("B", 0.0)?,
            BlockSpec::new("C", xi1)?,
            BlockSpec::new("D", xi2)?,
        ],
        theta: Angle::Radians(PI / 4.0),
        grid_points,
    };
    config.check()?;
    Ok(config)
}

/// Interferometer output `(i E0 / sqrt 2)(H + V e^{i phi})`.
pub fn michelson_output(source: &SourceSpec, phi: f64) -> JonesVector {
    let pre = ComplexAmp::new(0.0, source.e0() * FRAC_1_SQRT_2);
    JonesVector::new(pre, pre * ComplexAmp::from_polar(1.0, phi))
}

/// Blocks whose first port takes the `chi = xi + pi` output instead of `xi`.
const SWAPPED_BLOCKS: &[&str] = &["C"];

/// The two ports of one block at polarizer angle `theta`.
pub fn block_ports(block: &BlockSpec, theta: f64) -> [PortSpec; 2] {
    let xi = block.xi.radians();
    let (first, second) = if SWAPPED_BLOCKS.contains(&block.label.as_str()) {
        (xi + PI, xi)
    } else {
        (xi, xi + PI)
    };
    let port = |index, chi: f64| PortSpec {
        block: block.label.clone(),
        index,
        chi: chi.rem_euclid(TWO_PI),
        theta,
    };
    [port(1, first), port(2, second)]
}

/// Two ports per block, in block order.
///
/// With A at `xi = pi/2`, B at 0, C at `xi1`, D at `xi2` this gives
/// `A1 pi/2, A2 3pi/2, B1 0, B2 pi, C1 xi1 + pi, C2 xi1, D1 xi2, D2 xi2 + pi`.
pub fn port_phase_table(config: &BenchConfig) -> Result<Vec<PortSpec>> {
    if config.blocks.is_empty() {
        return Err(Error::Config("bench has no blocks".into()));
    }
    check_unique_labels(&config.blocks)?;
    let theta = config.theta_radians();
    Ok(config.blocks.iter().flat_map(|b| block_ports(b, theta)).collect())
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        Err(Error::Config("port count M must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Field at one detector, up to a global phase.
///
/// The eraser input `(e^{i phi} H + V) sqrt(I0/2M)` picks up the port's
/// projection phase on V and is projected onto the polarizer axis.
pub fn port_amplitude(port: &PortSpec, source: &SourceSpec, m: usize, phi: f64) -> Result<ComplexAmp> {
    check_m(m)?;
    let scale = (source.i0() / (2.0 * m as f64)).sqrt();
    let state = JonesVector::new(ComplexAmp::from_polar(1.0, phi), ComplexAmp::new(1.0, 0.0)) * scale;
    Ok(polarizer_project(retarder_phase(state, port.chi), port.theta))
}

/// Mean intensity at one detector.
///
/// Evaluated as `(I0/2M)((1 - s) + 2 s cos^2((phi - chi)/2))` with
/// `s = sin(2 theta)`, which keeps full relative precision next to the fringe
/// zeros, where `1 + cos(.)` would cancel.
pub fn port_intensity(port: &PortSpec, source: &SourceSpec, m: usize, phi: f64) -> Result<f64> {
    check_m(m)?;
    Ok(port_intensity_unchecked(port, source.i0(), m, phi))
}

#[inline]
pub(crate) fn port_intensity_unchecked(port: &PortSpec, i0: f64, m: usize, phi: f64) -> f64 {
    let s = (2.0 * port.theta).sin();
    let half = 0.5 * (phi - port.chi);
    let c = half.cos();
    i0 / (2.0 * m as f64) * ((1.0 - s) + 2.0 * s * c * c)
}

/// `|port_amplitude|^2`, computed through the field.
pub fn port_intensity_from_field(port: &PortSpec, source: &SourceSpec, m: usize, phi: f64) -> Result<f64> {
    port_amplitude(port, source, m, phi).map(intensity)
}

/// Sum of all port intensities. With `M = 2 * blocks` and 45° polarizers this
/// is `I0 / 2` at every phase: the polarizers discard half of the light.
pub fn total_detected_power(config: &BenchConfig, phi: f64) -> Result<f64> {
    let ports = port_phase_table(config)?;
    let mut total = 0.0;
    for p in &ports {
        total += port_intensity(p, &config.source, config.m, phi)?;
    }
    Ok(total)
}

/// One intensity trace per port over the config's phase grid.
pub fn sweep(config: &BenchConfig) -> Result<Vec<(PortSpec, Trace)>> {
    config.check()?;
    port_phase_table(config)?
        .into_iter()
        .map(|p| {
            let t = Trace::sample(config.grid_points, |phi| {
                port_intensity_unchecked(&p, config.source.i0(), config.m, phi)
            });
            Ok((p, t))
        })
        .collect()
}
