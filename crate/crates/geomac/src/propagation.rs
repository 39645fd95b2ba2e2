//! Channel gain, interference, SIR and fading.
//!
//! Noise is zero and every transmitter uses unit power, so the SIR of
//! transmitter `i` at `z` is `|z - z_i|^-alpha / sum_{j != i} |z - z_j|^-alpha`.
//!
//! Two fading laws are provided. Log-uniform fading `F = e^u`, `u ~ U[-f, f]`,
//! is the bounded model used with the ALOHA series. Exponential mean-one power
//! fading is the classic Rayleigh model used by the grid product formula.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::spatial::{Point2, PointSet};
use crate::special::gamma;
use crate::{Error, Result};

/// Gradient carrier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vector2 {
    pub dx: f64,
    pub dy: f64,
}

impl Vector2 {
    pub fn new(dx: f64, dy: f64) -> Self {
        Vector2 { dx, dy }
    }

    pub fn norm(self) -> f64 {
        self.dx.hypot(self.dy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Fading {
    None,
    LogUniform { f: f64 },
    Exponential,
}

impl Fading {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Fading::LogUniform { f } if !(f > 0.0 && f.is_finite()) => {
                Err(Error::invalid(format!("log-uniform spread must be positive, got {f}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Fading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fading::None => f.write_str("none"),
            Fading::LogUniform { f: s } => write!(f, "log-uniform:{s}"),
            Fading::Exponential => f.write_str("exponential"),
        }
    }
}

impl FromStr for Fading {
    type Err = Error;
    /// Accepts `none`, `exponential` and `log-uniform:<f>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let fading = match s.as_str() {
            "none" => Fading::None,
            "exponential" | "rayleigh" => Fading::Exponential,
            _ => match s.strip_prefix("log-uniform:") {
                Some(v) => Fading::LogUniform {
                    f: v.parse().map_err(|_| Error::invalid(format!("bad log-uniform spread '{v}'")))?,
                },
                None => return Err(Error::invalid(format!("unknown fading '{s}'"))),
            },
        };
        fading.validate()?;
        Ok(fading)
    }
}

/// Path-loss exponent, SIR threshold and fading law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub alpha: f64,
    pub beta: f64,
    pub fading: Fading,
}

impl ChannelModel {
    pub fn new(alpha: f64, beta: f64, fading: Fading) -> Result<Self> {
        let m = ChannelModel { alpha, beta, fading };
        m.validate()?;
        Ok(m)
    }

    pub fn no_fading(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, Fading::None)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 2.0 && self.alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must exceed 2, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be positive, got {}", self.beta)));
        }
        self.fading.validate()
    }
}

/// `|rx - tx|^-alpha`.
pub fn gain(tx: Point2, rx: Point2, alpha: f64) -> Result<f64> {
    let d2 = (rx - tx).norm2();
    if d2 == 0.0 {
        return Err(Error::Singularity);
    }
    Ok(pow_d2(d2, alpha))
}

/// `d2^(-alpha/2)` with an integer-power fast path.
#[inline]
pub(crate) fn pow_d2(d2: f64, alpha: f64) -> f64 {
    let h = 0.5 * alpha;
    if h.fract() == 0.0 && h.abs() <= 64.0 {
        (1.0 / d2).powi(h as i32)
    } else if (2.0 * h).fract() == 0.0 && h > 0.0 && h <= 64.0 {
        (1.0 / d2).powi(h as i32) / d2.sqrt()
    } else {
        (-h * d2.ln()).exp()
    }
}

fn singular_radius(s: &PointSet) -> f64 {
    1e-9 * s.spacing()
}

/// Sum of gains at `rx` over all points of `s` except `exclude`.
pub fn interference(rx: Point2, s: &PointSet, exclude: Option<usize>, alpha: f64) -> Result<f64> {
    let eps2 = singular_radius(s).powi(2);
    let mut w = 0.0;
    for (j, p) in s.points().iter().enumerate() {
        if Some(j) == exclude {
            continue;
        }
        let d2 = (rx - *p).norm2();
        if d2 <= eps2 {
            return Err(Error::Singularity);
        }
        w += pow_d2(d2, alpha);
    }
    Ok(w)
}

fn check_index(i: usize, s: &PointSet) -> Result<Point2> {
    s.points()
        .get(i)
        .copied()
        .ok_or_else(|| Error::invalid(format!("transmitter index {i} out of range ({})", s.len())))
}

/// SIR of transmitter `i` at `rx`.
pub fn sir(i: usize, rx: Point2, s: &PointSet, alpha: f64) -> Result<f64> {
    let zi = check_index(i, s)?;
    if (rx - zi).norm2() <= singular_radius(s).powi(2) {
        return Err(Error::Singularity);
    }
    if s.len() < 2 {
        return Err(Error::InfiniteSir);
    }
    let w = interference(rx, s, Some(i), alpha)?;
    Ok(gain(zi, rx, alpha)? / w)
}

/// Analytic gradient of the SIR of transmitter `i` at `rx`.
pub fn sir_gradient(i: usize, rx: Point2, s: &PointSet, alpha: f64) -> Result<Vector2> {
    let zi = check_index(i, s)?;
    let eps2 = singular_radius(s).powi(2);
    if s.len() < 2 {
        return Err(Error::InfiniteSir);
    }
    // grad |z - p|^-alpha = -alpha |z - p|^(-alpha-2) (z - p)
    let grad_gain = |p: Point2| -> Result<(f64, Point2)> {
        let v = rx - p;
        let d2 = v.norm2();
        if d2 <= eps2 {
            return Err(Error::Singularity);
        }
        let g = pow_d2(d2, alpha);
        Ok((g, v * (-alpha * g / d2)))
    };
    let (gi, dgi) = grad_gain(zi)?;
    let mut w = 0.0;
    let mut dw = Point2::ORIGIN;
    for (j, p) in s.points().iter().enumerate() {
        if j == i {
            continue;
        }
        let (g, dg) = grad_gain(*p)?;
        w += g;
        dw = dw + dg;
    }
    let v = (dgi * w - dw * gi) * (1.0 / (w * w));
    Ok(Vector2::new(v.x, v.y))
}

/// `E[F^s]` for the fading law.
pub fn psi(fading: Fading, s: f64) -> Result<f64> {
    match fading {
        Fading::None => Ok(1.0),
        Fading::LogUniform { f } => {
            let x = f * s;
            if x.abs() < 1e-8 {
                Ok(1.0 + x * x / 6.0)
            } else {
                Ok(x.sinh() / x)
            }
        }
        Fading::Exponential => {
            if s <= -1.0 {
                Err(Error::DivergentMoment { s })
            } else {
                Ok(gamma(1.0 + s))
            }
        }
    }
}

/// One draw of the power fading factor `F`.
pub fn sample_fading<R: Rng + ?Sized>(fading: Fading, rng: &mut R) -> f64 {
    match fading {
        Fading::None => 1.0,
        Fading::LogUniform { f } => (f * (2.0 * rng.random::<f64>() - 1.0)).exp(),
        Fading::Exponential => Exp1.sample(rng),
    }
}

/// Quantity sampled by [`rasterize`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldQuantity {
    /// Interference from all points except `exclude`.
    Interference,
    /// SIR of transmitter `exclude` (required).
    Sir,
}

/// One raster sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// Evaluate a field on an `n x n` lattice of cell centres covering
/// `center +- half_width`. Samples on top of a transmitter yield `inf`.
pub fn rasterize(
    s: &PointSet,
    quantity: FieldQuantity,
    exclude: Option<usize>,
    alpha: f64,
    center: Point2,
    half_width: f64,
    n: usize,
) -> Result<Vec<FieldSample>> {
    use rayon::prelude::*;
    if n == 0 || !(half_width > 0.0) {
        return Err(Error::invalid("raster needs n >= 1 and a positive half-width"));
    }
    if quantity == FieldQuantity::Sir && exclude.is_none() {
        return Err(Error::invalid("SIR raster needs a transmitter index"));
    }
    let step = 2.0 * half_width / n as f64;
    (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (iy, ix) = (k / n, k % n);
            let z = Point2::new(
                center.x - half_width + (ix as f64 + 0.5) * step,
                center.y - half_width + (iy as f64 + 0.5) * step,
            );
            let v = match quantity {
                FieldQuantity::Interference => interference(z, s, exclude, alpha),
                FieldQuantity::Sir => sir(exclude.unwrap_or(0), z, s, alpha),
            };
            match v {
                Ok(value) => Ok(FieldSample { x: z.x, y: z.y, value }),
                Err(Error::Singularity) => Ok(FieldSample { x: z.x, y: z.y, value: f64::INFINITY }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// CSV with header `x,y,value`.
pub fn write_field_csv(samples: &[FieldSample], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y", "value"])?;
    for s in samples {
        w.write_record([s.x.to_string(), s.y.to_string(), s.value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
