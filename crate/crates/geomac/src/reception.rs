//! Reception areas of lattice transmitters.
//!
//! The boundary `S_i(z) = beta` is followed by stepping along the tangent
//! `J grad S / |grad S|` (a quarter turn of the gradient, giving an
//! anticlockwise walk) and pulling each step back onto the level set with a few
//! Newton iterations along the gradient. The farthest boundary point is where
//! the gradients of the distance and of the SIR are parallel.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aloha::{bernoulli_chunks, McEstimate};
use crate::propagation::{gain, interference, pow_d2, sample_fading, ChannelModel, Fading};
use crate::spatial::{gen_grid, Extent, GridSpec, Point2, PointSet};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracerConfig {
    /// Step length in meters.
    pub dt: f64,
    /// Relative tolerance on `|S/beta - 1|`.
    pub contour_tol: f64,
    pub max_steps: usize,
    /// Direction of the ray used to find the first boundary point, radians.
    pub start_direction: f64,
    /// Newton corrections per step; 0 gives the bare Euler recurrence.
    pub newton_iterations: usize,
}

impl TracerConfig {
    /// Defaults scaled to a lattice spacing `d`: `dt = d/200`.
    pub fn for_spacing(d: f64) -> Self {
        TracerConfig {
            dt: d / 200.0,
            contour_tol: 1e-6,
            max_steps: 1_000_000,
            start_direction: 0.0,
            newton_iterations: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("tracer step dt must be positive"));
        }
        if !(self.contour_tol > 0.0 && self.contour_tol <= 0.1) {
            return Err(Error::invalid("contour_tol must lie in (0, 0.1]"));
        }
        if self.max_steps < 1000 {
            return Err(Error::invalid("max_steps must be at least 1000"));
        }
        Ok(())
    }
}

impl Default for TracerConfig {
    fn default() -> Self {
        Self::for_spacing(1.0)
    }
}

/// Closed polyline approximating the boundary of a reception area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourTrace {
    pub transmitter: Point2,
    /// Anticlockwise vertices; the last connects back to the first.
    pub vertices: Vec<Point2>,
    pub max_range_point: Point2,
    pub r_lambda: f64,
    pub closed: bool,
    pub steps: usize,
    /// Refined boundary points where distance is locally extremal.
    pub critical_points: Vec<Point2>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeResult {
    pub r_lambda: f64,
    pub r1: f64,
    pub lambda: f64,
    /// Pattern name, or `aloha`.
    pub pattern: String,
    pub k1_over_k2: f64,
    pub beta: f64,
    pub alpha: f64,
    pub steps: usize,
    /// Relative change of the boundary distance along the max-range ray when
    /// the extent is doubled.
    pub truncation_rel_change: Option<f64>,
}

/// SIR of one transmitter over a fixed interferer set, in coordinates centred
/// on the transmitter and scaled by the mean spacing.
///
/// Works with `h = ln S - ln beta`, which stays finite for large `alpha`.
pub(crate) struct SirField {
    center: Point2,
    scale: f64,
    alpha: f64,
    ln_beta: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    radii: Vec<f64>,
    eps2: f64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct FieldValue {
    pub h: f64,
    pub grad: Point2,
}

const REF_POINTS: usize = 64;
const BLOCK: usize = 256;

impl SirField {
    pub(crate) fn new(i: usize, s: &PointSet, model: &ChannelModel) -> Result<Self> {
        model.validate()?;
        let center = *s
            .points()
            .get(i)
            .ok_or_else(|| Error::invalid(format!("transmitter index {i} out of range")))?;
        if s.len() < 2 {
            return Err(Error::InfiniteSir);
        }
        let scale = s.spacing();
        let mut rel: Vec<Point2> = s
            .points()
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| (*p - center) * (1.0 / scale))
            .collect();
        rel.sort_by(|a, b| a.norm2().total_cmp(&b.norm2()));
        Ok(SirField {
            center,
            scale,
            alpha: model.alpha,
            ln_beta: model.beta.ln(),
            xs: rel.iter().map(|p| p.x).collect(),
            ys: rel.iter().map(|p| p.y).collect(),
            radii: rel.iter().map(|p| p.norm()).collect(),
            eps2: 1e-18,
        })
    }

    pub(crate) fn to_world(&self, z: Point2) -> Point2 {
        z * self.scale + self.center
    }

    pub(crate) fn to_local(&self, p: Point2) -> Point2 {
        (p - self.center) * (1.0 / self.scale)
    }

    /// Distance beyond which no point of the reception area can lie: the
    /// pattern's radius, or the Apollonius disc of the nearest interferer.
    fn reach(&self) -> f64 {
        let outer = *self.radii.last().unwrap_or(&0.0);
        let c = (self.ln_beta / self.alpha).exp();
        match self.radii.first() {
            Some(&r0) if c > 1.0 => outer.max(r0 / (c - 1.0)),
            _ => outer,
        }
    }

    /// Lower bound on the distance from `z` to the nearest interferer.
    fn clearance(&self, z: Point2) -> f64 {
        let k = self.xs.len().min(BLOCK);
        let mut m = f64::MAX;
        for j in 0..k {
            m = m.min((z.x - self.xs[j]).hypot(z.y - self.ys[j]));
        }
        if k < self.xs.len() {
            m = m.min(self.radii[k] - z.norm());
        }
        m
    }

    pub(crate) fn eval(&self, z: Point2) -> Result<FieldValue> {
        let a = self.alpha;
        let d2i = z.norm2();
        if d2i <= self.eps2 {
            return Err(Error::Singularity);
        }
        let n = self.xs.len();
        let k0 = n.min(REF_POINTS);
        let mut d2_ref = f64::MAX;
        for j in 0..k0 {
            let (dx, dy) = (z.x - self.xs[j], z.y - self.ys[j]);
            d2_ref = d2_ref.min(dx * dx + dy * dy);
        }
        if d2_ref <= self.eps2 {
            return Err(Error::Singularity);
        }
        let rho = d2i.sqrt();
        let (mut u_sum, mut gx, mut gy) = (0.0, 0.0, 0.0);
        let mut j = 0;
        while j < n {
            let end = (j + BLOCK).min(n);
            for k in j..end {
                let (dx, dy) = (z.x - self.xs[k], z.y - self.ys[k]);
                let d2 = dx * dx + dy * dy;
                if d2 <= self.eps2 {
                    return Err(Error::Singularity);
                }
                let u = pow_d2(d2 / d2_ref, a);
                u_sum += u;
                let w = u / d2;
                gx += w * dx;
                gy += w * dy;
            }
            j = end;
            if j < n && self.radii[j] > rho {
                let gap = self.radii[j] - rho;
                let tail = (n - j) as f64 * pow_d2(gap * gap / d2_ref, a);
                if tail < 1e-17 * u_sum {
                    break;
                }
            }
        }
        let h = -0.5 * a * (d2i / d2_ref).ln() - u_sum.ln() - self.ln_beta;
        let grad = Point2::new(-a * z.x / d2i + a * gx / u_sum, -a * z.y / d2i + a * gy / u_sum);
        Ok(FieldValue { h, grad })
    }

    /// First crossing of the level set along a ray from the transmitter.
    pub(crate) fn start(&self, direction: f64, tol: f64) -> Result<Point2> {
        let u = Point2::new(direction.cos(), direction.sin());
        let mut lo = 1e-6;
        if self.eval(u * lo)?.h < 0.0 {
            return Err(Error::invalid("threshold too large: SIR below beta next to the transmitter"));
        }
        let reach = self.reach() + 1.0;
        let hi = loop {
            let z = u * lo;
            let clear = self.clearance(z).max(1e-12);
            let next = (lo * 1.25).min(lo + 0.25 * clear);
            if next > reach {
                return Err(Error::Unbounded);
            }
            if self.eval(u * next)?.h < 0.0 {
                break next;
            }
            lo = next;
        };
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let h = self.eval(u * m)?.h;
            if h >= 0.0 {
                a = m;
                if h.exp_m1().abs() <= tol {
                    return Ok(u * m);
                }
            } else {
                b = m;
            }
            if b - a <= 1e-15 * b {
                break;
            }
        }
        Ok(u * a)
    }

    /// Newton projection onto `h = target` along the gradient.
    fn project(&self, mut z: Point2, iterations: usize, tol: f64) -> Result<Option<Point2>> {
        const TARGET: f64 = 1e-10;
        for _ in 0..iterations {
            let v = self.eval(z)?;
            if v.h >= 0.0 && v.h.exp_m1() <= tol && (v.h - TARGET).abs() < 1e-8 {
                return Ok(Some(z));
            }
            let g2 = v.grad.norm2();
            if !(g2 > 0.0) {
                return Ok(None);
            }
            z = z - v.grad * ((v.h - TARGET) / g2);
            if !z.is_finite() {
                return Ok(None);
            }
        }
        let v = self.eval(z)?;
        if iterations == 0 || (v.h >= 0.0 && v.h.exp_m1() <= tol) {
            Ok(Some(z))
        } else {
            Ok(None)
        }
    }
}

/// Boundary point of the reception area of transmitter `i` on the ray at
/// angle `direction`, with `|S/beta - 1| <= tol`.
pub fn find_contour_start(
    i: usize,
    s: &PointSet,
    model: &ChannelModel,
    direction: f64,
    tol: f64,
) -> Result<Point2> {
    let field = SirField::new(i, s, model)?;
    Ok(field.to_world(field.start(direction, tol)?))
}

/// Follow the reception boundary of transmitter `i` once around.
pub fn trace_contour(
    i: usize,
    s: &PointSet,
    model: &ChannelModel,
    cfg: &TracerConfig,
) -> Result<ContourTrace> {
    cfg.validate()?;
    let field = SirField::new(i, s, model)?;
    trace_field(&field, cfg)
}

fn trace_field(field: &SirField, cfg: &TracerConfig) -> Result<ContourTrace> {
    let dt = cfg.dt / field.scale;
    let tol = cfg.contour_tol;
    let z0 = field.start(cfg.start_direction, tol.min(1e-9).max(tol * 1e-3))?;
    let z0 = field.project(z0, cfg.newton_iterations.max(1), tol)?.unwrap_or(z0);
    let mut local = vec![z0];
    let mut z = z0;
    let mut steps = 0;
    let closed = loop {
        if steps >= cfg.max_steps {
            return Err(Error::NonClosure {
                steps,
                partial: local.iter().map(|&p| field.to_world(p)).collect(),
            });
        }
        let v = field.eval(z)?;
        let g = v.grad.norm();
        if g < 1e-15 {
            let w = field.to_world(z);
            return Err(Error::StationaryPoint { x: w.x, y: w.y });
        }
        let t = Point2::new(v.grad.y, -v.grad.x) * (1.0 / g);
        let mut step = dt;
        let next = loop {
            if let Some(p) = field.project(z + t * step, cfg.newton_iterations, tol)? {
                break p;
            }
            step *= 0.5;
            if step < dt * 1e-6 {
                let w = field.to_world(z);
                return Err(Error::StationaryPoint { x: w.x, y: w.y });
            }
        };
        steps += 1;
        if steps >= 10 && (next - z0).norm() <= dt {
            break true;
        }
        local.push(next);
        z = next;
    };
    let critical = critical_points(field, &local, tol)?;
    let (best, r) = pick_max(&local, &critical);
    Ok(ContourTrace {
        transmitter: field.center,
        vertices: local.iter().map(|&p| field.to_world(p)).collect(),
        max_range_point: field.to_world(best),
        r_lambda: r * field.scale,
        closed,
        steps,
        critical_points: critical.iter().map(|&p| field.to_world(p)).collect(),
    })
}

fn parallel_defect(field: &SirField, z: Point2) -> Result<f64> {
    Ok(z.cross(field.eval(z)?.grad))
}

/// Refined boundary points where `grad D x grad S` changes sign.
fn critical_points(field: &SirField, local: &[Point2], tol: f64) -> Result<Vec<Point2>> {
    let n = local.len();
    let c: Vec<f64> = local.iter().map(|&z| parallel_defect(field, z)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for k in 0..n {
        let k1 = (k + 1) % n;
        if !(c[k] * c[k1] < 0.0 || (c[k1] == 0.0 && c[k] != 0.0)) {
            continue;
        }
        let (a, b) = (local[k], local[k1]);
        let at = |s: f64| -> Result<Point2> {
            let p = a * (1.0 - s) + b * s;
            Ok(field.project(p, 8, tol)?.unwrap_or(p))
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        let sign_lo = c[k].signum();
        for _ in 0..60 {
            let m = 0.5 * (lo + hi);
            let f = parallel_defect(field, at(m)?)?;
            if f == 0.0 {
                lo = m;
                hi = m;
                break;
            }
            if f.signum() == sign_lo {
                lo = m;
            } else {
                hi = m;
            }
            if (hi - lo) * (b - a).norm() < 1e-14 {
                break;
            }
        }
        out.push(at(0.5 * (lo + hi))?);
    }
    Ok(out)
}

/// Farthest point, preferring refined critical points; ties go to the
/// smallest polar angle.
fn pick_max(vertices: &[Point2], critical: &[Point2]) -> (Point2, f64) {
    let better = |cand: Point2, best: Option<(Point2, f64)>| -> Option<(Point2, f64)> {
        let r = cand.norm();
        match best {
            None => Some((cand, r)),
            Some((b, rb)) => {
                if r > rb * (1.0 + 1e-9) || (r >= rb * (1.0 - 1e-9) && cand.angle() < b.angle()) {
                    Some((cand, r))
                } else {
                    Some((b, rb))
                }
            }
        }
    };
    let crit = critical.iter().fold(None, |b, &p| better(p, b));
    let vert = vertices.iter().fold(None, |b, &p| better(p, b)).expect("non-empty trace");
    match crit {
        Some((p, r)) if r >= vert.1 * (1.0 - 1e-9) => (p, r),
        _ => vert,
    }
}

/// Maximum distance from transmitter `i` to the traced boundary.
///
/// Recomputes the parallel-gradient critical points on the given trace.
pub fn max_range(trace: &ContourTrace, i: usize, s: &PointSet, model: &ChannelModel) -> Result<f64> {
    let field = SirField::new(i, s, model)?;
    if trace.vertices.is_empty() {
        return Err(Error::invalid("empty trace"));
    }
    let local: Vec<Point2> = trace.vertices.iter().map(|&p| field.to_local(p)).collect();
    let critical = critical_points(&field, &local, 1e-6)?;
    Ok(pick_max(&local, &critical).1 * field.scale)
}

/// `sqrt(lambda) * r_lambda`.
pub fn normalized_range(r_lambda: f64, lambda: f64) -> Result<f64> {
    if !(r_lambda > 0.0 && lambda > 0.0) {
        return Err(Error::invalid("range and density must be positive"));
    }
    Ok(lambda.sqrt() * r_lambda)
}

/// Trace the transmitter at the pattern's anchor point and report its range.
///
/// With `check_truncation`, the boundary distance along the max-range ray is
/// recomputed on a pattern with twice the extent.
pub fn grid_range(
    spec: &GridSpec,
    model: &ChannelModel,
    extent: Extent,
    cfg: &TracerConfig,
    check_truncation: bool,
) -> Result<(RangeResult, ContourTrace)> {
    let s = gen_grid(spec, extent)?;
    let i = s.nearest(spec.translation).expect("non-empty grid");
    let field = SirField::new(i, &s, model)?;
    let trace = trace_field(&field, cfg)?;
    let lambda = s.density();
    let truncation_rel_change = if check_truncation {
        let dir = (trace.max_range_point - trace.transmitter).angle();
        let near = field.start(dir, 1e-12)?.norm();
        let big = gen_grid(spec, Extent::new(2.0 * extent.half_width)?)?;
        let j = big.nearest(spec.translation).expect("non-empty grid");
        let far = SirField::new(j, &big, model)?.start(dir, 1e-12)?.norm();
        Some((far - near).abs() / near)
    } else {
        None
    };
    let result = RangeResult {
        r_lambda: trace.r_lambda,
        r1: normalized_range(trace.r_lambda, lambda)?,
        lambda,
        pattern: spec.kind.name().into(),
        k1_over_k2: spec.aspect(),
        beta: model.beta,
        alpha: model.alpha,
        steps: trace.steps,
        truncation_rel_change,
    };
    Ok((result, trace))
}

/// Deterministic reception indicator: 1 when `r^-alpha / beta >= W`.
pub fn grid_success_prob_nofading(
    i: usize,
    rx: Point2,
    s: &PointSet,
    model: &ChannelModel,
) -> Result<f64> {
    let zi = *s.points().get(i).ok_or_else(|| Error::invalid("transmitter index out of range"))?;
    let g = gain(zi, rx, model.alpha)?;
    let w = interference(rx, s, Some(i), model.alpha)?;
    Ok(if g / model.beta >= w { 1.0 } else { 0.0 })
}

/// Success probability with exponential fading on every link:
/// `prod_j 1 / (1 + beta w_j)` with `w_j = |z - z_j|^-alpha / |z - z_i|^-alpha`.
pub fn grid_success_prob_fading(
    i: usize,
    rx: Point2,
    s: &PointSet,
    model: &ChannelModel,
) -> Result<f64> {
    if model.fading != Fading::Exponential {
        return Err(Error::Unsupported(format!(
            "the product formula (fading = {})",
            model.fading
        )));
    }
    let zi = *s.points().get(i).ok_or_else(|| Error::invalid("transmitter index out of range"))?;
    let gi = gain(zi, rx, model.alpha)?;
    let eps2 = (1e-9 * s.spacing()).powi(2);
    let mut log_p = 0.0;
    for (j, p) in s.points().iter().enumerate() {
        if j == i {
            continue;
        }
        let d2 = (rx - *p).norm2();
        if d2 <= eps2 {
            return Err(Error::Singularity);
        }
        log_p -= (model.beta * pow_d2(d2, model.alpha) / gi).ln_1p();
    }
    Ok(log_p.exp())
}

/// Monte Carlo estimate of the link success probability from transmitter `i`
/// to `rx`, drawing the fading of every link of `s` independently.
pub fn mc_grid_success_prob(
    i: usize,
    rx: Point2,
    s: &PointSet,
    model: &ChannelModel,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    model.validate()?;
    if trials < 1000 {
        return Err(Error::invalid("Monte Carlo needs at least 1000 trials"));
    }
    let zi = *s.points().get(i).ok_or_else(|| Error::invalid("transmitter index out of range"))?;
    let gi = gain(zi, rx, model.alpha)?;
    let eps2 = (1e-9 * s.spacing()).powi(2);
    let mut gains = Vec::with_capacity(s.len());
    for (j, p) in s.points().iter().enumerate() {
        if j == i {
            continue;
        }
        let d2 = (rx - *p).norm2();
        if d2 <= eps2 {
            return Err(Error::Singularity);
        }
        gains.push(pow_d2(d2, model.alpha));
    }
    // strongest first so failing trials stop early
    gains.sort_by(|a, b| b.total_cmp(a));
    let (beta, fading) = (model.beta, model.fading);
    Ok(bernoulli_chunks(trials, seed, |rng| {
        let limit = sample_fading(fading, rng) * gi / beta;
        let mut w = 0.0;
        for &g in &gains {
            w += g * sample_fading(fading, rng);
            if w > limit {
                return false;
            }
        }
        true
    }))
}

/// Winding number of the closed polyline around `z`.
pub fn winding_number(vertices: &[Point2], z: Point2) -> i32 {
    let n = vertices.len();
    let mut wn = 0;
    for k in 0..n {
        let a = vertices[k];
        let b = vertices[(k + 1) % n];
        let side = (b - a).cross(z - a);
        if a.y <= z.y {
            if b.y > z.y && side > 0.0 {
                wn += 1;
            }
        } else if b.y <= z.y && side < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// One cell of a reception-membership raster.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberSample {
    pub x: f64,
    pub y: f64,
    pub member: bool,
}

/// Reception indicator of transmitter `i` on an `n x n` raster, for reception
/// areas the tracer cannot follow (small `beta`).
pub fn membership_grid(
    i: usize,
    s: &PointSet,
    model: &ChannelModel,
    center: Point2,
    half_width: f64,
    n: usize,
) -> Result<Vec<MemberSample>> {
    use rayon::prelude::*;
    if n == 0 || !(half_width > 0.0) {
        return Err(Error::invalid("raster needs n >= 1 and a positive half-width"));
    }
    let zi = *s.points().get(i).ok_or_else(|| Error::invalid("transmitter index out of range"))?;
    let step = 2.0 * half_width / n as f64;
    (0..n * n)
        .into_par_iter()
        .map(|k| {
            let z = Point2::new(
                center.x - half_width + ((k % n) as f64 + 0.5) * step,
                center.y - half_width + ((k / n) as f64 + 0.5) * step,
            );
            let member = match grid_success_prob_nofading(i, z, s, model) {
                Ok(p) => p == 1.0,
                Err(Error::Singularity) => (z - zi).norm() <= 1e-9 * s.spacing(),
                Err(e) => return Err(e),
            };
            Ok(MemberSample { x: z.x, y: z.y, member })
        })
        .collect()
}

pub fn write_membership_csv(samples: &[MemberSample], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y", "member"])?;
    for s in samples {
        w.write_record([s.x.to_string(), s.y.to_string(), (s.member as u8).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// JSON summary written next to a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub pattern: String,
    pub d: f64,
    pub beta: f64,
    pub alpha: f64,
    pub r_lambda: f64,
    pub r1: f64,
    pub steps: usize,
    pub closed: bool,
    /// Angle of the ray whose first crossing seeded the traced component.
    pub start_direction: f64,
}

pub fn write_trace_csv(trace: &ContourTrace, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y"])?;
    for p in &trace.vertices {
        w.write_record([p.x.to_string(), p.y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_summary(summary: &TraceSummary, path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(f, summary)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> PointSet {
        PointSet::from_points(vec![Point2::ORIGIN, Point2::new(1.0, 0.0)], 1.0, 2.0).unwrap()
    }

    #[test]
    fn apollonius_start() {
        let m = ChannelModel::no_fading(4.0, 16.0).unwrap();
        let z = find_contour_start(0, &pair(), &m, 0.0, 1e-10).unwrap();
        assert!((z.x - 1.0 / 3.0).abs() < 1e-9 && z.y.abs() < 1e-15);
    }

    #[test]
    fn apollonius_circle_trace() {
        let m = ChannelModel::no_fading(4.0, 16.0).unwrap();
        let t = trace_contour(0, &pair(), &m, &TracerConfig::for_spacing(1.0)).unwrap();
        assert!(t.closed);
        let c = Point2::new(-1.0 / 3.0, 0.0);
        for v in &t.vertices {
            assert!((v.dist(c) - 2.0 / 3.0).abs() < 1e-3 * 2.0 / 3.0);
        }
        assert!((t.r_lambda - 1.0).abs() < 1e-6, "{}", t.r_lambda);
    }

    #[test]
    fn winding() {
        let sq = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        assert_eq!(winding_number(&sq, Point2::new(0.5, 0.5)), 1);
        assert_eq!(winding_number(&sq, Point2::new(1.5, 0.5)), 0);
    }

    #[test]
    fn product_formula_limits() {
        let s = pair();
        let m = ChannelModel::new(4.0, 1.0, Fading::Exponential).unwrap();
        let p = grid_success_prob_fading(0, Point2::new(0.5, 0.7), &s, &m).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let tiny = ChannelModel::new(4.0, 1e-12, Fading::Exponential).unwrap();
        assert!(grid_success_prob_fading(0, Point2::new(0.5, 0.7), &s, &tiny).unwrap() > 1.0 - 1e-9);
        let nf = ChannelModel::no_fading(4.0, 1.0).unwrap();
        assert!(matches!(
            grid_success_prob_fading(0, Point2::new(0.5, 0.7), &s, &nf),
            Err(Error::Unsupported(_))
        ));
    }
}
