//! Complex amplitudes and two-component polarization states.
//!
//! All transforms are pure functions on `Copy` values. Angles are radians.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, Mul};

/// A scalar field amplitude.
pub type ComplexAmp = Complex64;

/// Born rule: the measured intensity of an amplitude is `|a|^2`.
#[inline]
pub fn intensity(a: ComplexAmp) -> f64 {
    a.norm_sqr()
}

/// A fully polarized field in the horizontal/vertical basis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JonesVector {
    pub h: ComplexAmp,
    pub v: ComplexAmp,
}

impl JonesVector {
    pub const fn new(h: ComplexAmp, v: ComplexAmp) -> Self {
        Self { h, v }
    }

    /// A real-valued vector, handy for tests and fixtures.
    pub fn real(h: f64, v: f64) -> Self {
        Self::new(ComplexAmp::new(h, 0.0), ComplexAmp::new(v, 0.0))
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Total intensity, the sum of both orthogonal components.
    pub fn power(&self) -> f64 {
        intensity(self.h) + intensity(self.v)
    }
}

impl Add for JonesVector {
    type Output = JonesVector;

    fn add(self, rhs: JonesVector) -> JonesVector {
        JonesVector::new(self.h + rhs.h, self.v + rhs.v)
    }
}

impl Mul<ComplexAmp> for JonesVector {
    type Output = JonesVector;

    fn mul(self, rhs: ComplexAmp) -> JonesVector {
        JonesVector::new(self.h * rhs, self.v * rhs)
    }
}

impl Mul<f64> for JonesVector {
    type Output = JonesVector;

    fn mul(self, rhs: f64) -> JonesVector {
        JonesVector::new(self.h * rhs, self.v * rhs)
    }
}

/// Lossless 50/50 non-polarizing beam splitter, symmetric convention.
///
/// Transmission carries `1/sqrt(2)`, reflection `i/sqrt(2)`, independently for
/// each polarization component:
///
/// ```text
/// out1 = (in1 + i in2) / sqrt(2)
/// out2 = (i in1 + in2) / sqrt(2)
/// ```
pub fn bs_transform(in1: JonesVector, in2: JonesVector) -> (JonesVector, JonesVector) {
    let t = ComplexAmp::new(FRAC_1_SQRT_2, 0.0);
    let r = ComplexAmp::new(0.0, FRAC_1_SQRT_2);
    (in1 * t + in2 * r, in1 * r + in2 * t)
}

/// Mirror image: the horizontal component reverses sign.
pub fn mirror_reflect(v: JonesVector) -> JonesVector {
    JonesVector::new(-v.h, v.v)
}

/// Effective wave-plate model `diag(1, e^{i xi})`: a phase gain on the
/// vertical component only.
pub fn retarder_phase(v: JonesVector, xi: f64) -> JonesVector {
    JonesVector::new(v.h, v.v * ComplexAmp::from_polar(1.0, xi))
}

/// Projection onto a linear polarizer whose axis is `theta` from horizontal.
/// `H -> cos(theta) p`, `V -> sin(theta) p`.
pub fn polarizer_project(v: JonesVector, theta: f64) -> ComplexAmp {
    let (s, c) = theta.sin_cos();
    v.h * c + v.v * s
}
