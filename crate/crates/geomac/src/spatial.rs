//! Transmitter point sets: regular lattices and uniform Poisson scatters.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A location in the plane, in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Point2::new(r * theta.cos(), r * theta.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Polar angle folded into [0, 2π).
    pub fn angle(self) -> f64 {
        let a = self.y.atan2(self.x);
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }

    pub fn rotate(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

/// Half-width of the square region `[-h, h]^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extent {
    pub half_width: f64,
}

impl Extent {
    pub fn new(half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::invalid(format!("extent must be positive, got {half_width}")));
        }
        Ok(Extent { half_width })
    }

    pub fn area(self) -> f64 {
        4.0 * self.half_width * self.half_width
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Square,
    Rectangular,
    Hexagonal,
    Triangular,
    Linear,
}

impl GridKind {
    pub const ALL: [GridKind; 5] = [
        GridKind::Square,
        GridKind::Rectangular,
        GridKind::Hexagonal,
        GridKind::Triangular,
        GridKind::Linear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GridKind::Square => "square",
            GridKind::Rectangular => "rectangular",
            GridKind::Hexagonal => "hexagonal",
            GridKind::Triangular => "triangular",
            GridKind::Linear => "linear",
        }
    }

    /// Order of the rotational symmetry of the pattern.
    pub fn symmetry(self) -> u32 {
        match self {
            GridKind::Square => 4,
            GridKind::Rectangular | GridKind::Linear => 2,
            GridKind::Hexagonal | GridKind::Triangular => 6,
        }
    }
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GridKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(GridKind::Square),
            "rectangular" | "rect" => Ok(GridKind::Rectangular),
            "hexagonal" | "hex" => Ok(GridKind::Hexagonal),
            "triangular" | "tri" => Ok(GridKind::Triangular),
            "linear" => Ok(GridKind::Linear),
            other => Err(Error::invalid(format!("unknown pattern '{other}'"))),
        }
    }
}

/// A lattice pattern with spacing `d`, aspect factors and a pose.
///
/// Rectangular and linear patterns space points `k1*d` apart along x on rows
/// `k2*d` apart. The hexagonal pattern is the honeycomb vertex set (three
/// neighbours at distance `d`); the triangular pattern is the equilateral
/// lattice with spacing `d`. With the default pose a lattice point sits at the
/// origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kind: GridKind,
    pub d: f64,
    pub k1: f64,
    pub k2: f64,
    pub rotation: f64,
    pub translation: Point2,
}

impl GridSpec {
    pub fn new(kind: GridKind, d: f64) -> Self {
        GridSpec { kind, d, k1: 1.0, k2: 1.0, rotation: 0.0, translation: Point2::ORIGIN }
    }

    pub fn square(d: f64) -> Self {
        Self::new(GridKind::Square, d)
    }

    pub fn hexagonal(d: f64) -> Self {
        Self::new(GridKind::Hexagonal, d)
    }

    pub fn triangular(d: f64) -> Self {
        Self::new(GridKind::Triangular, d)
    }

    pub fn rectangular(d: f64, k1: f64, k2: f64) -> Self {
        GridSpec { k1, k2, ..Self::new(GridKind::Rectangular, d) }
    }

    pub fn linear(d: f64, k1: f64, k2: f64) -> Self {
        GridSpec { k1, k2, ..Self::new(GridKind::Linear, d) }
    }

    pub fn with_pose(self, rotation: f64, translation: Point2) -> Self {
        GridSpec { rotation, translation, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::invalid(format!("grid spacing d must be positive, got {}", self.d)));
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0 && self.k1.is_finite() && self.k2.is_finite()) {
            return Err(Error::invalid("aspect factors k1, k2 must be positive"));
        }
        if !self.rotation.is_finite() || !self.translation.is_finite() {
            return Err(Error::invalid("grid pose must be finite"));
        }
        match self.kind {
            GridKind::Rectangular if self.k1 > self.k2 => {
                Err(Error::invalid("rectangular pattern needs k1 <= k2"))
            }
            GridKind::Linear if self.k1 >= self.k2 => {
                Err(Error::invalid("linear pattern needs k1 < k2"))
            }
            GridKind::Square | GridKind::Hexagonal | GridKind::Triangular
                if self.k1 != 1.0 || self.k2 != 1.0 =>
            {
                Err(Error::invalid(format!("{} pattern takes k1 = k2 = 1", self.kind)))
            }
            _ => Ok(()),
        }
    }

    /// Lattice basis vectors and the offsets of the points in one cell, before the pose.
    fn cell(&self) -> ([Point2; 2], Vec<Point2>) {
        let d = self.d;
        let s3 = 3f64.sqrt();
        match self.kind {
            GridKind::Square => ([Point2::new(d, 0.0), Point2::new(0.0, d)], vec![Point2::ORIGIN]),
            GridKind::Rectangular | GridKind::Linear => (
                [Point2::new(self.k1 * d, 0.0), Point2::new(0.0, self.k2 * d)],
                vec![Point2::ORIGIN],
            ),
            GridKind::Triangular => (
                [Point2::new(d, 0.0), Point2::new(0.5 * d, 0.5 * s3 * d)],
                vec![Point2::ORIGIN],
            ),
            GridKind::Hexagonal => (
                [Point2::new(s3 * d, 0.0), Point2::new(0.5 * s3 * d, 1.5 * d)],
                vec![Point2::ORIGIN, Point2::new(0.0, d)],
            ),
        }
    }

    /// Same pattern shape scaled so that its density is one point per unit area.
    pub fn unit_density(self) -> Self {
        let lambda = grid_density(&self);
        GridSpec { d: self.d * lambda.sqrt(), translation: self.translation * lambda.sqrt(), ..self }
    }

    /// Ratio `k1/k2` (1 for the isotropic patterns).
    pub fn aspect(&self) -> f64 {
        self.k1 / self.k2
    }
}

/// Closed-form density of the pattern, points per unit area.
pub fn grid_density(spec: &GridSpec) -> f64 {
    let d2 = spec.d * spec.d;
    let s3 = 3f64.sqrt();
    match spec.kind {
        GridKind::Square => 1.0 / d2,
        GridKind::Rectangular | GridKind::Linear => 1.0 / (spec.k1 * spec.k2 * d2),
        GridKind::Hexagonal => 4.0 / (3.0 * s3 * d2),
        GridKind::Triangular => 2.0 / (s3 * d2),
    }
}

/// Descriptive metadata written to the JSON sidecar of an exported set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSetMeta {
    pub kind: String,
    pub d: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub density: f64,
    pub extent: f64,
    pub seed: Option<u64>,
}

/// Immutable set of transmitter locations with known density.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    points: Vec<Point2>,
    density: f64,
    extent: f64,
    meta: PointSetMeta,
}

impl PointSet {
    /// Wrap explicit points. `extent` is grown if needed to cover them.
    pub fn from_points(points: Vec<Point2>, density: f64, extent: f64) -> Result<Self> {
        if !(density > 0.0 && density.is_finite()) {
            return Err(Error::invalid(format!("density must be positive, got {density}")));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        let reach = points.iter().fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()));
        let extent = extent.max(reach);
        let meta = PointSetMeta {
            kind: "custom".into(),
            d: None,
            k1: None,
            k2: None,
            density,
            extent,
            seed: None,
        };
        Ok(PointSet { points, density, extent, meta })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn meta(&self) -> &PointSetMeta {
        &self.meta
    }

    /// Mean spacing `1/sqrt(density)`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.density.sqrt()
    }

    /// Index of the point closest to `z`.
    pub fn nearest(&self, z: Point2) -> Option<usize> {
        self.points
            .iter()
            .enumerate()
            .min_by(|a, b| (*a.1 - z).norm2().total_cmp(&(*b.1 - z).norm2()))
            .map(|(i, _)| i)
    }

    /// Points per unit area counted inside the extent.
    pub fn measured_density(&self) -> f64 {
        self.points.len() as f64 / (4.0 * self.extent * self.extent)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "y"])?;
        for p in &self.points {
            w.write_record([p.x.to_string(), p.y.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_sidecar(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(f, &self.meta)?;
        Ok(())
    }
}

/// All lattice points of `spec` inside `[-extent, extent]^2`, boundary included.
pub fn gen_grid(spec: &GridSpec, extent: Extent) -> Result<PointSet> {
    spec.validate()?;
    let e = extent.half_width;
    if e < spec.d {
        return Err(Error::DegenerateExtent { extent: e, d: spec.d });
    }
    let ([a1, a2], basis) = spec.cell();
    // lattice coordinates reaching the square's circumcircle
    let det = a1.cross(a2);
    let inv_norm = (a1.norm2() + a2.norm2()).sqrt() / det.abs();
    let reach = e * 2f64.sqrt() + spec.translation.norm() + spec.d * 2.0;
    let n = (reach * inv_norm).ceil() as i64 + 1;
    let tol = e + 1e-9 * spec.d;

    let mut points = Vec::new();
    for j in -n..=n {
        for i in -n..=n {
            let cell = a1 * i as f64 + a2 * j as f64;
            for b in &basis {
                let p = (cell + *b).rotate(spec.rotation) + spec.translation;
                if p.x.abs() <= tol && p.y.abs() <= tol {
                    points.push(p);
                }
            }
        }
    }
    if points.is_empty() {
        return Err(Error::DegenerateExtent { extent: e, d: spec.d });
    }
    let density = grid_density(spec);
    let meta = PointSetMeta {
        kind: spec.kind.name().into(),
        d: Some(spec.d),
        k1: Some(spec.k1),
        k2: Some(spec.k2),
        density,
        extent: e,
        seed: None,
    };
    Ok(PointSet { points, density, extent: e, meta })
}

/// Homogeneous Poisson scatter of intensity `lambda` on the square extent.
pub fn gen_poisson(lambda: f64, extent: Extent, seed: u64) -> Result<PointSet> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("Poisson density must be positive, got {lambda}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = lambda * extent.area();
    let count = Poisson::new(mean)
        .map_err(|e| Error::invalid(e.to_string()))?
        .sample(&mut rng) as usize;
    let e = extent.half_width;
    let points = (0..count)
        .map(|_| Point2::new(rng.random_range(-e..=e), rng.random_range(-e..=e)))
        .collect();
    let meta = PointSetMeta {
        kind: "poisson".into(),
        d: None,
        k1: None,
        k2: None,
        density: lambda,
        extent: e,
        seed: Some(seed),
    };
    Ok(PointSet { points, density: lambda, extent: e, meta })
}

/// Homothety: coordinates times `factor`, density divided by `factor^2`.
pub fn rescale(ps: &PointSet, factor: f64) -> Result<PointSet> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::invalid(format!("rescale factor must be positive, got {factor}")));
    }
    let f2 = factor * factor;
    let mut meta = ps.meta.clone();
    meta.d = meta.d.map(|d| d * factor);
    meta.density /= f2;
    meta.extent *= factor;
    Ok(PointSet {
        points: ps.points.iter().map(|p| *p * factor).collect(),
        density: ps.density / f2,
        extent: ps.extent * factor,
        meta,
    })
}

/// Uniform bucket grid over a fixed point array for radius and nearest queries.
#[derive(Clone, Debug)]
pub struct SpatialIndex {
    points: Vec<Point2>,
    origin: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl SpatialIndex {
    pub fn new(points: &[Point2], cell: f64) -> Self {
        let (mut lo, mut hi) = (Point2::new(f64::MAX, f64::MAX), Point2::new(f64::MIN, f64::MIN));
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if points.is_empty() {
            lo = Point2::ORIGIN;
            hi = Point2::ORIGIN;
        }
        let nx = (((hi.x - lo.x) / cell).floor() as usize) + 1;
        let ny = (((hi.y - lo.y) / cell).floor() as usize) + 1;
        let mut counts = vec![0usize; nx * ny + 1];
        let key = |p: &Point2| {
            let cx = (((p.x - lo.x) / cell) as usize).min(nx - 1);
            let cy = (((p.y - lo.y) / cell) as usize).min(ny - 1);
            cy * nx + cx
        };
        for p in points {
            counts[key(p) + 1] += 1;
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let mut fill = counts.clone();
        let mut items = vec![0usize; points.len()];
        for (i, p) in points.iter().enumerate() {
            let k = key(p);
            items[fill[k]] = i;
            fill[k] += 1;
        }
        SpatialIndex { points: points.to_vec(), origin: lo, cell, nx, ny, start: counts, items }
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    fn cell_of(&self, c: f64, n: usize, lo: f64) -> usize {
        ((c - lo) / self.cell).floor().clamp(0.0, (n - 1) as f64) as usize
    }

    /// Indices of points within distance `r` of `z` (unordered).
    pub fn within(&self, z: Point2, r: f64, out: &mut Vec<usize>) {
        out.clear();
        if self.points.is_empty() {
            return;
        }
        let x0 = self.cell_of(z.x - r, self.nx, self.origin.x);
        let x1 = self.cell_of(z.x + r, self.nx, self.origin.x);
        let y0 = self.cell_of(z.y - r, self.ny, self.origin.y);
        let y1 = self.cell_of(z.y + r, self.ny, self.origin.y);
        let r2 = r * r;
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                let k = cy * self.nx + cx;
                for &i in &self.items[self.start[k]..self.start[k + 1]] {
                    if (self.points[i] - z).norm2() <= r2 {
                        out.push(i);
                    }
                }
            }
        }
    }

    /// Nearest point to `z` within `r`, if any.
    pub fn nearest_within(&self, z: Point2, r: f64) -> Option<usize> {
        let mut buf = Vec::new();
        self.within(z, r, &mut buf);
        buf.into_iter()
            .min_by(|&a, &b| {
                (self.points[a] - z).norm2().total_cmp(&(self.points[b] - z).norm2()).then(a.cmp(&b))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_grid_count() {
        let ps = gen_grid(&GridSpec::square(1.0), Extent::new(5.0).unwrap()).unwrap();
        assert_eq!(ps.len(), 121);
    }

    #[test]
    fn densities() {
        assert_eq!(grid_density(&GridSpec::square(1.0)), 1.0);
        assert_eq!(grid_density(&GridSpec::rectangular(1.0, 1.0, 2.0)), 0.5);
        assert!((grid_density(&GridSpec::triangular(1.0)) - 1.1547005383792515).abs() < 1e-12);
    }

    #[test]
    fn extent_below_spacing_is_degenerate() {
        let r = gen_grid(&GridSpec::square(2.0), Extent::new(1.0).unwrap());
        assert!(matches!(r, Err(Error::DegenerateExtent { .. })));
    }

    #[test]
    fn honeycomb_has_three_neighbours_at_d() {
        let ps = gen_grid(&GridSpec::hexagonal(1.0), Extent::new(6.0).unwrap()).unwrap();
        let near = ps
            .points()
            .iter()
            .filter(|p| (p.norm() - 1.0).abs() < 1e-9)
            .count();
        assert_eq!(near, 3);
        assert!(ps.points().iter().all(|p| p.norm() < 1e-12 || p.norm() > 1.0 - 1e-9));
    }

    #[test]
    fn index_matches_brute_force() {
        let ps = gen_poisson(2.0, Extent::new(10.0).unwrap(), 3).unwrap();
        let idx = SpatialIndex::new(ps.points(), 0.7);
        let z = Point2::new(1.3, -2.2);
        let mut got = Vec::new();
        idx.within(z, 1.9, &mut got);
        got.sort();
        let want: Vec<usize> = (0..ps.len()).filter(|&i| ps.points()[i].dist(z) <= 1.9).collect();
        assert_eq!(got, want);
        assert_eq!(idx.nearest_within(z, 5.0), ps.nearest(z));
    }
}
