//! Limits of the normalized maximum range.
//!
//! As `beta -> inf` the reception area shrinks onto the transmitter and
//! `beta^(1/alpha) r_lambda -> I(0,0)^(-1/alpha)`, where `I(0,0)` is the
//! interference at the transmitter from the rest of a unit-density lattice.
//! As `alpha -> inf` the reception area becomes the Voronoi cell, and the
//! range its circumradius.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::propagation::{pow_d2, ChannelModel};
use crate::reception::{grid_range, TracerConfig};
use crate::spatial::{gen_grid, Extent, GridKind, GridSpec, Point2};
use crate::special::CompensatedSum;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSumConfig {
    pub pattern: GridSpec,
    pub alpha: f64,
    /// Radius of the direct sum, in units where the pattern has density 1.
    pub truncation_radius: f64,
    pub richardson_levels: usize,
}

impl LatticeSumConfig {
    pub fn new(pattern: GridSpec, alpha: f64) -> Self {
        LatticeSumConfig { pattern, alpha, truncation_radius: 200.0, richardson_levels: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSum {
    /// `I^(-1/alpha)`.
    pub value: f64,
    /// `I` including the tail correction.
    pub interference: f64,
    /// Direct sum inside the truncation radius.
    pub direct: f64,
    /// Continuum tail `2 pi R^(2-alpha) / (alpha - 2)`.
    pub tail: f64,
    pub truncation_radius: f64,
    pub points: usize,
}

/// Continuum estimate of the unit-density lattice sum beyond `radius`.
pub fn tail_estimate(radius: f64, alpha: f64) -> f64 {
    2.0 * PI * radius.powf(2.0 - alpha) / (alpha - 2.0)
}

fn direct_sum(unit: &GridSpec, alpha: f64, radius: f64) -> Result<(f64, usize)> {
    let ps = gen_grid(unit, Extent::new(radius)?)?;
    let r2 = radius * radius;
    let mut d2s: Vec<f64> = ps
        .points()
        .iter()
        .map(|p| p.norm2())
        .filter(|&d2| d2 > 1e-18 && d2 <= r2)
        .collect();
    // far (small) terms first
    d2s.sort_by(|a, b| b.total_cmp(a));
    let mut s = CompensatedSum::default();
    for &d2 in &d2s {
        s.add(pow_d2(d2, alpha));
    }
    Ok((s.value(), d2s.len()))
}

/// `r'_1 = I(0,0)^(-1/alpha)` for the pattern rescaled to unit density.
///
/// The direct sum over the disc of radius `R` is completed with the continuum
/// tail. With `richardson_levels = k` the corrected sums at `R, 2R, ..., 2^k R`
/// are extrapolated assuming a residual error proportional to `R^(1-alpha)`.
pub fn beta_inf_range(cfg: &LatticeSumConfig) -> Result<LatticeSum> {
    let alpha = cfg.alpha;
    if !(alpha > 2.0) {
        return Err(Error::DivergentSum { alpha });
    }
    cfg.pattern.validate()?;
    let unit = GridSpec { rotation: cfg.pattern.rotation, translation: Point2::ORIGIN, ..cfg.pattern }
        .unit_density();
    if cfg.truncation_radius < 100.0 * unit.d {
        return Err(Error::invalid(format!(
            "truncation radius {} is below 100 d = {}",
            cfg.truncation_radius,
            100.0 * unit.d
        )));
    }
    let mut estimates = Vec::with_capacity(cfg.richardson_levels + 1);
    let mut first = None;
    for k in 0..=cfg.richardson_levels {
        let radius = cfg.truncation_radius * 2f64.powi(k as i32);
        let (direct, points) = direct_sum(&unit, alpha, radius)?;
        let tail = tail_estimate(radius, alpha);
        first.get_or_insert((direct, tail, points));
        estimates.push(direct + tail);
    }
    // Neville-style elimination of successive R^(1-alpha) terms
    let ratio = 2f64.powf(alpha - 1.0);
    for level in 1..estimates.len() {
        let f = ratio.powi(level as i32);
        for k in (level..estimates.len()).rev() {
            estimates[k] = (f * estimates[k] - estimates[k - 1]) / (f - 1.0);
        }
    }
    let interference = *estimates.last().expect("at least one level");
    let (direct, tail, points) = first.expect("at least one level");
    Ok(LatticeSum {
        value: interference.powf(-1.0 / alpha),
        interference,
        direct,
        tail,
        truncation_radius: cfg.truncation_radius,
        points,
    })
}

/// Circumradius of the Voronoi cell at unit density.
pub fn alpha_inf_range(kind: GridKind, k1: f64, k2: f64) -> Result<f64> {
    let s3 = 3f64.sqrt();
    match kind {
        GridKind::Square => Ok(0.5f64.sqrt()),
        GridKind::Hexagonal => Ok(2.0 / (3.0 * s3).sqrt()),
        GridKind::Triangular => Ok((2.0 / (3.0 * s3)).sqrt()),
        GridKind::Rectangular | GridKind::Linear => {
            if !(k1 > 0.0 && k2 > 0.0) {
                return Err(Error::invalid("aspect factors must be positive"));
            }
            let q = k1 / k2;
            Ok(0.5 * ((q * q + 1.0) / q).sqrt())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoronoiReport {
    pub pattern: String,
    pub k1_over_k2: f64,
    pub alpha: f64,
    pub r1_traced: f64,
    pub r1_limit: f64,
    pub rel_deviation: f64,
}

/// Trace the reception area at `beta = 1` and a large `alpha` and compare its
/// range with the Voronoi circumradius.
pub fn voronoi_limit_check(
    pattern: &GridSpec,
    alpha_large: f64,
    extent: Extent,
    cfg: &TracerConfig,
) -> Result<VoronoiReport> {
    if alpha_large < 50.0 {
        return Err(Error::invalid(format!("alpha_large must be at least 50, got {alpha_large}")));
    }
    let model = ChannelModel::no_fading(alpha_large, 1.0)?;
    let (range, _) = grid_range(pattern, &model, extent, cfg, false)?;
    let limit = alpha_inf_range(pattern.kind, pattern.k1, pattern.k2)?;
    Ok(VoronoiReport {
        pattern: pattern.kind.name().into(),
        k1_over_k2: pattern.aspect(),
        alpha: alpha_large,
        r1_traced: range.r1,
        r1_limit: limit,
        rel_deviation: (range.r1 - limit) / limit,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub pattern: String,
    pub k1_over_k2: f64,
    pub value: f64,
}

/// The five patterns of the large-threshold table: square, rectangular 1:2
/// and 1:4, hexagonal, triangular.
pub fn table_patterns() -> Vec<GridSpec> {
    vec![
        GridSpec::square(1.0),
        GridSpec::rectangular(1.0, 1.0, 2.0),
        GridSpec::rectangular(1.0, 1.0, 4.0),
        GridSpec::hexagonal(1.0),
        GridSpec::triangular(1.0),
    ]
}

pub fn beta_inf_table(alpha: f64, truncation_radius: f64) -> Result<Vec<TableRow>> {
    table_patterns()
        .into_iter()
        .map(|p| {
            let cfg = LatticeSumConfig { truncation_radius, ..LatticeSumConfig::new(p, alpha) };
            Ok(TableRow {
                pattern: p.kind.name().into(),
                k1_over_k2: p.aspect(),
                value: beta_inf_range(&cfg)?.value,
            })
        })
        .collect()
}

pub fn alpha_inf_table() -> Result<Vec<TableRow>> {
    table_patterns()
        .into_iter()
        .map(|p| {
            Ok(TableRow {
                pattern: p.kind.name().into(),
                k1_over_k2: p.aspect(),
                value: alpha_inf_range(p.kind, p.k1, p.k2)?,
            })
        })
        .collect()
}

pub fn write_table_csv(rows: &[TableRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["pattern", "k1_over_k2", "value"])?;
    for r in rows {
        w.write_record([r.pattern.clone(), r.k1_over_k2.to_string(), r.value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
