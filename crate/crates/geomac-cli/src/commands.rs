use std::path::{Path, PathBuf};

use geomac::aloha::{
    aloha_prob, mc_aloha_prob, optimize_range, OptimizerReport, SeriesParams,
};
use geomac::asymptotics::{alpha_inf_table, beta_inf_table, TableRow};
use geomac::multihop::{run_simulation, write_hop_log_csv, write_summary_json, Scheme, SimConfig};
use geomac::propagation::{rasterize, FieldQuantity};
use geomac::reception::{
    grid_range, grid_success_prob_fading, grid_success_prob_nofading, mc_grid_success_prob,
    membership_grid, write_trace_csv, write_trace_summary, TraceSummary, TracerConfig,
};
use geomac::spatial::{gen_grid, grid_density};
use geomac::{ChannelModel, Extent, Fading, GridKind, GridSpec, Point2};

use crate::error::CliError;
use crate::params::{Format, Params};
use crate::table::{num, opt, Table};

pub const DEFAULT_BETA: f64 = 10.0;
pub const DEFAULT_ALPHA: f64 = 4.0;
pub const DEFAULT_D: f64 = 25.0;
pub const DEFAULT_EXTENT: f64 = 10_000.0;
pub const DEFAULT_TRIALS: u64 = 100_000;

/// Parameters with defaults filled in and validated.
pub struct Resolved<'a> {
    pub p: &'a Params,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

impl Resolved<'_> {
    pub fn beta(&self) -> Result<f64, CliError> {
        let b = self.p.beta.unwrap_or(DEFAULT_BETA);
        if b > 0.0 && b.is_finite() {
            Ok(b)
        } else {
            Err(invalid(format!("beta must be positive, got {b}")))
        }
    }

    pub fn alpha(&self) -> Result<f64, CliError> {
        let a = self.p.alpha.unwrap_or(DEFAULT_ALPHA);
        if a > 2.0 && a.is_finite() {
            Ok(a)
        } else {
            Err(invalid(format!("alpha must exceed 2, got {a}")))
        }
    }

    pub fn lambda(&self) -> Result<f64, CliError> {
        let l = self.p.lambda.unwrap_or(1.0);
        if l > 0.0 && l.is_finite() {
            Ok(l)
        } else {
            Err(invalid(format!("lambda must be positive, got {l}")))
        }
    }

    pub fn fading(&self) -> Result<Fading, CliError> {
        let f: Fading = match &self.p.fading {
            Some(s) => s.parse().map_err(CliError::from)?,
            None => Fading::None,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn model(&self, fading: Fading) -> Result<ChannelModel, CliError> {
        Ok(ChannelModel::new(self.alpha()?, self.beta()?, fading)?)
    }

    pub fn d(&self) -> Result<f64, CliError> {
        let d = self.p.d.unwrap_or(DEFAULT_D);
        if d > 0.0 && d.is_finite() {
            Ok(d)
        } else {
            Err(invalid(format!("d must be positive, got {d}")))
        }
    }

    pub fn kind(&self) -> Result<GridKind, CliError> {
        match &self.p.pattern {
            Some(s) => Ok(s.parse()?),
            None => Ok(GridKind::Square),
        }
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        let kind = self.kind()?;
        let d = self.d()?;
        let (dk1, dk2) = match kind {
            GridKind::Rectangular => (1.0, 2.0),
            GridKind::Linear => (1.0, 10.0),
            _ => (1.0, 1.0),
        };
        let spec = GridSpec {
            k1: self.p.k1.unwrap_or(dk1),
            k2: self.p.k2.unwrap_or(dk2),
            ..GridSpec::new(kind, d)
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn extent_or(&self, default: f64) -> Result<Extent, CliError> {
        Ok(Extent::new(self.p.extent.unwrap_or(default))?)
    }

    pub fn trials(&self) -> u64 {
        self.p.trials.unwrap_or(DEFAULT_TRIALS)
    }

    pub fn seed(&self) -> u64 {
        self.p.seed.unwrap_or(0)
    }

    pub fn points(&self, default: usize) -> Result<usize, CliError> {
        let n = self.p.points.unwrap_or(default);
        if n >= 1 {
            Ok(n)
        } else {
            Err(invalid("points must be at least 1"))
        }
    }
}

/// Child seed of sweep entry `index`.
pub fn child_seed(root: u64, index: usize) -> u64 {
    let mut z = root ^ (index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn grid_range_table(p: &Params) -> Result<Table, CliError> {
    let r = Resolved { p };
    let spec = r.grid()?;
    let model = r.model(Fading::None)?;
    let extent = r.extent_or(DEFAULT_EXTENT)?;
    let check = p.check_truncation.unwrap_or(true);
    let (res, _) = grid_range(&spec, &model, extent, &TracerConfig::for_spacing(spec.d), check)?;
    if let Some(c) = res.truncation_rel_change {
        if c > 1e-3 {
            log::warn!("range changes by {c:.2e} when the extent is doubled; increase --extent");
        }
    }
    let mut t = Table::new(&[
        "pattern", "k1_over_k2", "d", "beta", "alpha", "lambda", "r_lambda", "r1", "steps",
        "truncation_rel_change",
    ]);
    t.push(vec![
        res.pattern.clone(),
        num(res.k1_over_k2),
        num(spec.d),
        num(res.beta),
        num(res.alpha),
        num(res.lambda),
        num(res.r_lambda),
        num(res.r1),
        res.steps.to_string(),
        opt(res.truncation_rel_change),
    ]);
    Ok(t)
}

fn curve_radii(r: &Resolved, lambda: f64) -> Result<Vec<f64>, CliError> {
    let s = 1.0 / lambda.sqrt();
    let lo = r.p.r_min.unwrap_or(0.01 * s);
    let hi = r.p.r_max.unwrap_or(2.0 * s);
    let n = r.points(100)?;
    if !(lo > 0.0 && hi >= lo) {
        return Err(invalid(format!("need 0 < r-min <= r-max, got {lo}, {hi}")));
    }
    Ok((0..n)
        .map(|k| if n == 1 { lo } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
        .collect())
}

/// `p(r)` without fading and, when a fading model is given, with it.
pub fn aloha_curve_table(p: &Params) -> Result<Table, CliError> {
    let r = Resolved { p };
    let lambda = r.lambda()?;
    let fading = r.fading()?;
    let params = SeriesParams::new(lambda, r.beta()?, r.alpha()?);
    params.validate()?;
    let radii = curve_radii(&r, lambda)?;
    let mut models = vec![Fading::None];
    if fading != Fading::None {
        models.push(fading);
    }
    let mut t = Table::new(&["r", "p", "rp", "method", "fading"]);
    for f in models {
        for (k, &x) in radii.iter().enumerate() {
            let (prob, method) = if f == Fading::Exponential {
                let m = r.model(f)?;
                let e = mc_aloha_prob(x, lambda, &m, r.trials(), None, child_seed(r.seed(), k))?;
                (e.p_hat, "monte_carlo")
            } else {
                (aloha_prob(x, &params, f)?, "series")
            };
            t.push(vec![num(x), num(prob), num(x * prob), method.into(), f.to_string()]);
        }
    }
    Ok(t)
}

pub fn optimize_table(p: &Params) -> Result<Table, CliError> {
    let r = Resolved { p };
    let fading = r.fading()?;
    if fading == Fading::Exponential {
        return Err(invalid("optimize uses the series, which does not exist for exponential fading"));
    }
    let params = SeriesParams::new(r.lambda()?, r.beta()?, r.alpha()?);
    let res = optimize_range(&params, fading)?;
    let rep = OptimizerReport::new(&params, fading, &res);
    let mut t = Table::new(&["beta", "alpha", "fading", "r1", "p_at_opt", "rp", "inv_rp"]);
    t.push(vec![
        num(rep.beta),
        num(rep.alpha),
        rep.fading,
        num(rep.r1),
        num(rep.p_at_opt),
        num(rep.rp),
        num(rep.inv_rp),
    ]);
    Ok(t)
}

fn rows_table(rows: Vec<TableRow>) -> Table {
    let mut t = Table::new(&["pattern", "k1_over_k2", "value"]);
    for row in rows {
        t.push(vec![row.pattern, num(row.k1_over_k2), num(row.value)]);
    }
    t
}

pub fn asympt_beta_table(p: &Params) -> Result<Table, CliError> {
    let r = Resolved { p };
    Ok(rows_table(beta_inf_table(r.alpha()?, p.truncation_radius.unwrap_or(200.0))?))
}

pub fn asympt_alpha_table(_p: &Params) -> Result<Table, CliError> {
    Ok(rows_table(alpha_inf_table()?))
}

/// Link success along the segment from the transmitter at the origin to `(d, d)`.
pub fn fading_curve_table(p: &Params) -> Result<Table, CliError> {
    let r = Resolved { p };
    let spec = r.grid()?;
    let extent = r.extent_or(10.0 * spec.d)?;
    let s = gen_grid(&spec, extent)?;
    let i = s.nearest(Point2::ORIGIN).expect("grid is not empty");
    let exp_model = r.model(Fading::Exponential)?;
    let plain = r.model(Fading::None)?;
    let n = r.points(10)?;
    let trials = p.trials.unwrap_or(0);
    let end = Point2::new(spec.d, spec.d);
    let mut t = Table::new(&["t", "x", "y", "p_fading", "p_nofading", "p_mc", "std_err"]);
    for k in 1..=n {
        let frac = k as f64 / (n + 1) as f64;
        let z = end * frac;
        let pf = grid_success_prob_fading(i, z, &s, &exp_model)?;
        let pn = grid_success_prob_nofading(i, z, &s, &plain)?;
        let (mc, se) = if trials > 0 {
            let e = mc_grid_success_prob(i, z, &s, &exp_model, trials, child_seed(r.seed(), k))?;
            (Some(e.p_hat), Some(e.std_err))
        } else {
            (None, None)
        };
        t.push(vec![num(frac), num(z.x), num(z.y), num(pf), num(pn), opt(mc), opt(se)]);
    }
    Ok(t)
}

/// ALOHA optimum against the four grid patterns, normalized to triangular.
pub fn compare_table(p: &Params) -> Result<Table, CliError> {
    let r = Resolved { p };
    let beta = r.beta()?;
    let alpha = r.alpha()?;
    let d = r.d()?;
    let extent = r.extent_or(DEFAULT_EXTENT)?;
    let model = ChannelModel::no_fading(alpha, beta)?;
    let aloha = optimize_range(&SeriesParams::new(1.0, beta, alpha), Fading::None)?;
    let mut rows = vec![("aloha".to_string(), aloha.r, aloha.inv_rp)];
    let grids = [
        GridSpec::square(d),
        GridSpec::rectangular(d, p.k1.unwrap_or(1.0), p.k2.unwrap_or(2.0)),
        GridSpec::hexagonal(d),
        GridSpec::triangular(d),
    ];
    for spec in grids {
        let (res, _) = grid_range(&spec, &model, extent, &TracerConfig::for_spacing(d), false)?;
        let name = match spec.kind {
            GridKind::Rectangular => format!("rectangular_{}", spec.aspect()),
            k => k.name().to_string(),
        };
        rows.push((name, res.r1, 1.0 / res.r1));
    }
    let (_, tri_r1, tri_inv) = rows.last().cloned().expect("triangular row");
    let mut t = Table::new(&["scheme", "r1", "inv_rp", "r1_rel", "inv_rp_rel"]);
    for (name, r1, inv) in rows {
        t.push(vec![name, num(r1), num(inv), num(r1 / tri_r1), num(inv / tri_inv)]);
    }
    Ok(t)
}

pub fn field_table(p: &Params) -> Result<Table, CliError> {
    let r = Resolved { p };
    let spec = r.grid()?;
    let s = gen_grid(&spec, r.extent_or(10.0 * spec.d)?)?;
    let i = s.nearest(Point2::ORIGIN).expect("grid is not empty");
    let n = p.n.unwrap_or(101);
    let hw = p.half_width.unwrap_or(2.0 * spec.d);
    let alpha = r.alpha()?;
    match p.quantity.as_deref().unwrap_or("sir") {
        "member" => {
            let m = r.model(Fading::None)?;
            let mut t = Table::new(&["x", "y", "member"]);
            for m in membership_grid(i, &s, &m, Point2::ORIGIN, hw, n)? {
                t.push(vec![num(m.x), num(m.y), u8::from(m.member).to_string()]);
            }
            Ok(t)
        }
        q => {
            let quantity = match q {
                "interference" => FieldQuantity::Interference,
                "sir" => FieldQuantity::Sir,
                other => return Err(invalid(format!("unknown quantity '{other}'"))),
            };
            let mut t = Table::new(&["x", "y", "value"]);
            for f in rasterize(&s, quantity, Some(i), alpha, Point2::ORIGIN, hw, n)? {
                t.push(vec![num(f.x), num(f.y), num(f.value)]);
            }
            Ok(t)
        }
    }
}

/// Path with the extension replaced, next to `base`.
pub fn sibling(base: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    base.with_file_name(format!("{stem}{suffix}.{ext}"))
}

/// Writes the vertex CSV at `out` and the JSON summary beside it.
pub fn trace(p: &Params, out: &Path) -> Result<String, CliError> {
    let r = Resolved { p };
    let spec = r.grid()?;
    let model = r.model(Fading::None)?;
    let extent = r.extent_or(DEFAULT_EXTENT)?;
    let cfg = TracerConfig::for_spacing(spec.d);
    let (res, tr) = grid_range(&spec, &model, extent, &cfg, false)?;
    write_trace_csv(&tr, out)?;
    let summary = TraceSummary {
        pattern: res.pattern.clone(),
        d: spec.d,
        beta: res.beta,
        alpha: res.alpha,
        r_lambda: res.r_lambda,
        r1: res.r1,
        steps: res.steps,
        closed: tr.closed,
        start_direction: cfg.start_direction,
    };
    let json = sibling(out, "", "json");
    write_trace_summary(&summary, &json)?;
    Ok(format!(
        "trace: {} vertices, r1 = {} -> {} and {}",
        tr.vertices.len(),
        res.r1,
        out.display(),
        json.display()
    ))
}

/// Writes the JSON summary at `out` and the hop log beside it.
pub fn simulate(p: &Params, out: &Path) -> Result<String, CliError> {
    let r = Resolved { p };
    let fading = r.fading()?;
    let model = r.model(fading)?;
    let scheme = match p.scheme.as_deref().unwrap_or("grid") {
        "grid" => Scheme::Grid(r.grid()?),
        "aloha" => Scheme::Aloha { lambda: r.lambda()? },
        other => return Err(invalid(format!("unknown scheme '{other}'"))),
    };
    let lambda = match scheme {
        Scheme::Grid(spec) => grid_density(&spec),
        Scheme::Aloha { lambda } => lambda,
    };
    let spacing = 1.0 / lambda.sqrt();
    let ratio = p.node_ratio.unwrap_or(100.0);
    let distance = p.packet_distance.unwrap_or(10.0 * spacing);
    let extent = r.extent_or((15.0 * spacing).max(1.5 * distance))?;
    let mut cfg = SimConfig::new(ratio * lambda, extent, scheme, model);
    cfg.packet_distance = distance;
    cfg.seed = r.seed();
    if let Some(s) = p.slots {
        cfg.slots = s;
    }
    let n_packets = p.packets.unwrap_or(20);
    let res = run_simulation(&cfg, n_packets)?;
    write_summary_json(&res.summary, out)?;
    let log = sibling(out, "_hops", "csv");
    write_hop_log_csv(&res.log, &log)?;
    Ok(format!(
        "simulate: delivered {}/{} packets, mean hops {} -> {} and {}",
        res.summary.delivered,
        res.summary.packets,
        opt(res.summary.mean_hops),
        out.display(),
        log.display()
    ))
}

/// Default output file name of a command.
pub fn default_file(command: &str, format: Format) -> String {
    let ext = match (command, format) {
        ("simulate", _) => "json",
        ("trace", _) => "csv",
        (_, Format::Csv) => "csv",
        (_, Format::Json) => "json",
    };
    format!("{command}.{ext}")
}
