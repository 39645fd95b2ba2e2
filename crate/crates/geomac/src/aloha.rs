//! Slotted ALOHA: transmitters form a Poisson process of intensity `lambda`.
//!
//! A link of length `r` succeeds when `F0 r^-alpha >= beta W`, where `W` is the
//! shot-noise interference. Without fading
//!
//! ```text
//! Pr(W < x) = sum_{n>=0} (-C lambda)^n / n! * sin(pi n g) / pi * Gamma(n g) * x^(-n g)
//! ```
//!
//! with `g = 2/alpha` and `C = pi Gamma(1-g)`; the `n = 0` term is 1. With a
//! fading factor on every link each term gains `psi(-n g)` and
//! `C = pi psi(g) Gamma(1-g)`.
//!
//! The series alternates and its terms can grow by hundreds of orders of
//! magnitude before decaying. [`aloha_prob`] evaluates it in `f64` when that
//! is well conditioned, returns 0 when a Chernoff bound certifies
//! `p < 1e-16`, and otherwise re-evaluates it in multiple precision (feature
//! `mpfr`).

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::propagation::{pow_d2, psi, sample_fading, ChannelModel, Fading};
use crate::special::{gamma, golden_max, ln_gamma, sin_pi_ratio, CompensatedSum};
use crate::{Error, Result};

/// Largest term over result magnitude tolerated by the `f64` series.
pub const MAX_CONDITION: f64 = 1e12;

/// Below this Chernoff bound [`aloha_prob`] reports 0.
pub const NEGLIGIBLE: f64 = 1e-16;

/// Largest estimated relative error accepted from the double-precision series.
pub const F64_REL_ERR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesParams {
    pub lambda: f64,
    pub beta: f64,
    pub alpha: f64,
    pub max_terms: usize,
    pub rel_tol: f64,
}

impl SeriesParams {
    pub fn new(lambda: f64, beta: f64, alpha: f64) -> Self {
        SeriesParams { lambda, beta, alpha, max_terms: 200_000, rel_tol: 1e-16 }
    }

    pub fn gamma(&self) -> f64 {
        2.0 / self.alpha
    }

    /// `pi psi(g) Gamma(1-g)`.
    pub fn c(&self, fading: Fading) -> Result<f64> {
        let g = self.gamma();
        Ok(PI * psi(fading, g)? * gamma(1.0 - g))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be non-negative, got {}", self.lambda)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.alpha > 2.0 && self.alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must exceed 2, got {}", self.alpha)));
        }
        if self.max_terms == 0 || !(self.rel_tol > 0.0) {
            return Err(Error::invalid("max_terms and rel_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Series,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlohaResult {
    pub r: f64,
    pub p: f64,
    pub rp: f64,
    pub inv_rp: f64,
    pub method: Method,
}

impl AlohaResult {
    pub fn new(r: f64, p: f64, method: Method) -> Self {
        let rp = r * p;
        AlohaResult { r, p, rp, inv_rp: if rp > 0.0 { 1.0 / rp } else { f64::INFINITY }, method }
    }
}

/// How [`aloha_prob_detailed`] obtained its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Double-precision series.
    Double,
    /// Chernoff bound below [`NEGLIGIBLE`].
    Negligible,
    /// Multiple-precision series.
    Multiple,
}

/// `ln psi(-s)` for `s > 0`.
fn ln_psi_neg(fading: Fading, s: f64) -> Result<f64> {
    match fading {
        Fading::None => Ok(0.0),
        Fading::LogUniform { f } => {
            let y = f * s;
            if y < 1e-8 {
                Ok(y * y / 6.0)
            } else {
                // ln(sinh(y)/y), stable for large y
                Ok(y + (-(-2.0 * y).exp()).ln_1p() - std::f64::consts::LN_2 - y.ln())
            }
        }
        Fading::Exponential => Err(Error::Unsupported(
            "the series (psi(-n g) has poles under exponential fading)".into(),
        )),
    }
}

/// Log of the magnitude envelope `K^n Gamma(n g) psi(-n g) x^(-n g) / (n! pi)`.
fn ln_envelope(n: usize, ln_base: f64, alpha: f64, fading: Fading) -> Result<f64> {
    let ng = 2.0 * n as f64 / alpha;
    Ok(n as f64 * ln_base - ln_gamma(n as f64 + 1.0) + ln_gamma(ng) + ln_psi_neg(fading, ng)?
        - PI.ln())
}

fn series_base(x: f64, params: &SeriesParams, fading: Fading) -> Result<f64> {
    let k = params.c(fading)? * params.lambda;
    Ok(k.ln() - params.gamma() * x.ln())
}

fn series_f64(x: f64, params: &SeriesParams, fading: Fading) -> Result<f64> {
    params.validate()?;
    if !(x > 0.0) {
        return Err(Error::invalid(format!("signal level must be positive, got {x}")));
    }
    if params.lambda == 0.0 || x == f64::INFINITY {
        return Ok(1.0);
    }
    let ln_base = series_base(x, params, fading)?;
    let mut sum = CompensatedSum::default();
    sum.add(1.0);
    let mut max_term: f64 = 1.0;
    // each term comes out of exp() of a sum of logs, so its relative error is
    // a few ulps of the largest of those logs
    let mut err = 0.0;
    let mut prev = f64::INFINITY;
    let mut done = false;
    for n in 1..=params.max_terms {
        let le = ln_envelope(n, ln_base, params.alpha, fading)?;
        if le > 700.0 {
            return Err(Error::PrecisionLoss { condition: f64::INFINITY });
        }
        let s = sin_pi_ratio(2.0 * n as f64, params.alpha);
        if s != 0.0 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let t = sign * s * le.exp();
            max_term = max_term.max(t.abs());
            let nf = n as f64;
            let scale = nf * ln_base.abs() + ln_gamma(nf + 1.0) + ln_gamma(2.0 * nf / params.alpha).abs() + nf;
            err += t.abs() * 4.0 * f64::EPSILON * (scale + 4.0);
            sum.add(t);
        }
        if le < prev && le.exp() < params.rel_tol * sum.value().abs() {
            done = true;
            break;
        }
        prev = le;
    }
    if !done {
        return Err(Error::SeriesTruncated { terms: params.max_terms });
    }
    let v = sum.value();
    let condition = max_term / v.abs();
    // rounding noise can be as large as the sum itself, so also reject
    // anything that is not a probability before clamping
    if !(condition <= MAX_CONDITION) || !(err <= F64_REL_ERR * v.abs()) || !(-1e-9..=1.0 + 1e-9).contains(&v) {
        return Err(Error::PrecisionLoss { condition: condition.max(max_term) });
    }
    Ok(v.clamp(0.0, 1.0))
}

/// `Pr(W < x)` for unit-fading interference of intensity `params.lambda`.
///
/// Signals [`Error::PrecisionLoss`] when the largest term exceeds
/// [`MAX_CONDITION`] times the sum.
pub fn prob_w_below(x: f64, params: &SeriesParams) -> Result<f64> {
    series_f64(x, params, Fading::None)
}

/// Natural log of a Chernoff bound on `Pr(W < x F0)`.
pub fn chernoff_ln_bound(x: f64, params: &SeriesParams, fading: Fading) -> Result<f64> {
    let g = params.gamma();
    let k = params.c(fading)? * params.lambda;
    if k == 0.0 {
        return Ok(0.0);
    }
    // Pr(W < xF) <= E[exp(t x F)] E[exp(-t W)] for t > 0
    let t0 = (x / (k * g)).powf(1.0 / (g - 1.0));
    match fading {
        Fading::None => Ok(-t0 * x * (1.0 / g - 1.0)),
        Fading::LogUniform { f } => {
            const M: usize = 2000;
            let ln_mgf = |t: f64| {
                // right Riemann sum of an increasing integrand: an upper bound
                let h = 2.0 * f / M as f64;
                let m = t * x * f.exp();
                let s: f64 = (1..=M).map(|j| (t * x * (-f + j as f64 * h).exp() - m).exp()).sum();
                m + (s / M as f64).ln()
            };
            let obj = |lt: f64| {
                let t = lt.exp();
                -(ln_mgf(t) - k * t.powf(g))
            };
            let c = t0.ln();
            let (_, best, _) = golden_max(obj, c - 30.0, c + 10.0, 1e-9);
            Ok((-best).min(0.0))
        }
        Fading::Exponential => Err(Error::Unsupported("the Chernoff bound".into())),
    }
}

/// Success probability of an ALOHA link of length `r`.
pub fn aloha_prob(r: f64, params: &SeriesParams, fading: Fading) -> Result<f64> {
    aloha_prob_detailed(r, params, fading).map(|(p, _)| p)
}

/// [`aloha_prob`] together with the evaluation route taken.
pub fn aloha_prob_detailed(r: f64, params: &SeriesParams, fading: Fading) -> Result<(f64, Route)> {
    params.validate()?;
    fading.validate()?;
    if !(r > 0.0) {
        return Err(Error::invalid(format!("link length must be positive, got {r}")));
    }
    if fading == Fading::Exponential {
        return Err(Error::Unsupported(
            "the series (psi(-n g) has poles under exponential fading); use Monte Carlo".into(),
        ));
    }
    let x = pow_d2(r * r, params.alpha) / params.beta;
    match series_f64(x, params, fading) {
        Ok(p) => Ok((p, Route::Double)),
        Err(Error::PrecisionLoss { .. }) | Err(Error::SeriesTruncated { .. }) => {
            if chernoff_ln_bound(x, params, fading)? < NEGLIGIBLE.ln() {
                return Ok((0.0, Route::Negligible));
            }
            multiple_precision(x, params, fading).map(|p| (p, Route::Multiple))
        }
        Err(e) => Err(e),
    }
}

#[cfg(feature = "mpfr")]
fn multiple_precision(x: f64, params: &SeriesParams, fading: Fading) -> Result<f64> {
    mp::series(x, params, fading)
}

#[cfg(not(feature = "mpfr"))]
fn multiple_precision(x: f64, params: &SeriesParams, fading: Fading) -> Result<f64> {
    let _ = (x, params, fading);
    Err(Error::PrecisionLoss { condition: f64::INFINITY })
}

#[cfg(feature = "mpfr")]
mod mp {
    use rug::float::Constant;
    use rug::ops::Pow;
    use rug::Float;

    use super::*;

    const MAX_BITS: u32 = 1 << 17;

    /// Smallest `q <= 64` with `2q/alpha` an integer, and that integer.
    fn period(alpha: f64) -> Option<(usize, u32)> {
        (1..=64usize).find_map(|q| {
            let p = 2.0 * q as f64 / alpha;
            (p.fract() == 0.0 && p * alpha == 2.0 * q as f64).then_some((q, p as u32))
        })
    }

    pub(super) fn series(x: f64, params: &SeriesParams, fading: Fading) -> Result<f64> {
        let ln_base = series_base(x, params, fading)?;
        // envelope peak in f64 log space
        let mut peak: f64 = 0.0;
        let mut prev = f64::INFINITY;
        for n in 1..=params.max_terms {
            let le = ln_envelope(n, ln_base, params.alpha, fading)?;
            peak = peak.max(le);
            if le < prev && le < peak - 60.0 && le < -60.0 {
                break;
            }
            prev = le;
        }
        let mut bits = ((peak.max(0.0) / std::f64::consts::LN_2).ceil() as u32) + 128;
        loop {
            if bits > MAX_BITS {
                return Err(Error::PrecisionLoss { condition: f64::INFINITY });
            }
            let (v, used_terms) = sum_at(x, params, fading, bits, peak, ln_base)?;
            if used_terms > params.max_terms {
                return Err(Error::SeriesTruncated { terms: params.max_terms });
            }
            let mag = v.abs();
            // bits consumed by cancellation, plus a safety margin
            let lost = if mag > 0.0 { (peak - mag.ln()) / std::f64::consts::LN_2 } else { f64::INFINITY };
            if lost.is_finite() && lost + 80.0 < bits as f64 {
                return Ok(v.clamp(0.0, 1.0));
            }
            bits = if lost.is_finite() { (lost as u32 + 160).max(bits * 2) } else { bits * 2 };
        }
    }

    fn sum_at(
        x: f64,
        params: &SeriesParams,
        fading: Fading,
        bits: u32,
        peak: f64,
        ln_base: f64,
    ) -> Result<(f64, usize)> {
        let alpha = params.alpha;
        let g = Float::with_val(bits, 2) / Float::with_val(bits, alpha);
        let k = Float::with_val(bits, params.c(fading)?) * params.lambda;
        let base = k * Float::with_val(bits, x).pow(Float::with_val(bits, -&g));
        let pi = Float::with_val(bits, Constant::Pi);
        let period = period(alpha);
        let mut gammas: Vec<Float> = Vec::new();
        let mut pw = Float::with_val(bits, 1);
        let mut fact = Float::with_val(bits, 1);
        let mut sum = Float::with_val(bits, 1);
        let floor_ln = peak - bits as f64 * std::f64::consts::LN_2 - 40.0;
        let mut prev = f64::INFINITY;
        let mut n = 0usize;
        loop {
            n += 1;
            if n > params.max_terms {
                return Ok((0.0, n));
            }
            pw *= &base;
            fact *= n as u32;
            let ng = Float::with_val(bits, 2 * n as u64) / Float::with_val(bits, alpha);
            let gam = match period {
                Some((q, p)) if n > q => {
                    let mut v = gammas[n - 1 - q].clone();
                    let start = Float::with_val(bits, 2 * (n - q) as u64) / Float::with_val(bits, alpha);
                    for j in 0..p {
                        v *= Float::with_val(bits, &start + j);
                    }
                    v
                }
                _ => ng.clone().gamma(),
            };
            if period.is_some() {
                gammas.push(gam.clone());
            }
            let le = ln_envelope(n, ln_base, alpha, fading)?;
            let s = sin_pi_ratio(2.0 * n as f64, alpha);
            if s != 0.0 {
                let two = Float::with_val(bits, 2);
                let red = Float::with_val(bits, &ng - Float::with_val(bits, &ng / &two).floor() * &two);
                let sin = Float::with_val(bits, &red * &pi).sin();
                let psi_term = match fading {
                    Fading::LogUniform { f } => {
                        let y = Float::with_val(bits, &ng * f);
                        Float::with_val(bits, y.clone().sinh() / y)
                    }
                    _ => Float::with_val(bits, 1),
                };
                let mut t = Float::with_val(bits, &pw / &fact);
                t *= &gam;
                t *= &sin;
                t *= &psi_term;
                t /= &pi;
                if n % 2 == 1 {
                    sum -= t;
                } else {
                    sum += t;
                }
            }
            if le < prev && le < floor_ln {
                break;
            }
            prev = le;
        }
        Ok((sum.to_f64(), n))
    }
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub p_hat: f64,
    /// `sqrt(p~(1-p~)/n)` with `p~ = (k+2)/(n+4)`, which stays positive at
    /// `k = 0` and `k = n`.
    pub std_err: f64,
    pub successes: u64,
    pub trials: u64,
}

impl McEstimate {
    pub(crate) fn from_counts(successes: u64, trials: u64) -> Self {
        let n = trials as f64;
        let pt = (successes as f64 + 2.0) / (n + 4.0);
        McEstimate {
            p_hat: successes as f64 / n,
            std_err: (pt * (1.0 - pt) / n).sqrt(),
            successes,
            trials,
        }
    }
}

/// Sampler of the shot-noise interference `W` seen at a fixed receiver.
///
/// Interferers within `radius` of the receiver are drawn exactly, in order of
/// distance (`pi lambda rho_k^2` are the arrival times of a unit-rate Poisson
/// process). The contribution of the rest is drawn from a shifted gamma law
/// matching its first three cumulants
/// `kappa_m = 2 pi lambda E[F^m] radius^(2 - m alpha) / (m alpha - 2)`.
#[derive(Clone, Debug)]
pub struct InterferenceSampler {
    lambda: f64,
    alpha: f64,
    fading: Fading,
    radius2: f64,
    shift: f64,
    remainder: Option<Gamma<f64>>,
}

impl InterferenceSampler {
    pub fn new(lambda: f64, alpha: f64, fading: Fading, radius: f64) -> Result<Self> {
        if !(lambda > 0.0 && alpha > 2.0 && radius > 0.0) {
            return Err(Error::invalid("sampler needs lambda > 0, alpha > 2 and radius > 0"));
        }
        let kappa = |m: f64| -> Result<f64> {
            let moment = match fading {
                Fading::Exponential => gamma(m + 1.0),
                other => psi(other, m)?,
            };
            Ok(2.0 * PI * lambda * moment * radius.powf(2.0 - m * alpha) / (m * alpha - 2.0))
        };
        let (k1, k2, k3) = (kappa(1.0)?, kappa(2.0)?, kappa(3.0)?);
        let shape = 4.0 * k2 * k2 * k2 / (k3 * k3);
        let scale = k3 / (2.0 * k2);
        let remainder = Gamma::new(shape, scale).ok();
        let shift = if remainder.is_some() { k1 - shape * scale } else { k1 };
        Ok(InterferenceSampler { lambda, alpha, fading, radius2: radius * radius, shift, remainder })
    }

    /// Default exact-sampling radius: six mean spacings.
    pub fn default_radius(lambda: f64) -> f64 {
        6.0 / lambda.sqrt()
    }

    /// Draw `W`; returns `None` as soon as the partial sum exceeds `limit`.
    pub fn sample_below<R: Rng + ?Sized>(&self, rng: &mut R, limit: f64) -> Option<f64> {
        let rate = 1.0 / (PI * self.lambda);
        let mut t = 0.0;
        let mut w = 0.0;
        loop {
            let e: f64 = Exp1.sample(rng);
            t += e;
            let d2 = t * rate;
            if d2 > self.radius2 {
                break;
            }
            w += sample_fading(self.fading, rng) * pow_d2(d2, self.alpha);
            if w > limit {
                return None;
            }
        }
        w += self.shift + self.remainder.map_or(0.0, |g| g.sample(rng));
        (w <= limit).then_some(w.max(0.0))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_below(rng, f64::INFINITY).expect("unbounded limit")
    }
}

const CHUNKS: u64 = 64;

/// Run `trials` Bernoulli experiments in fixed chunks, each with its own
/// ChaCha stream, so the result does not depend on the thread count.
pub(crate) fn bernoulli_chunks<F>(trials: u64, seed: u64, trial: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let successes: u64 = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = trials / CHUNKS + u64::from(c < trials % CHUNKS);
            (0..n).filter(|_| trial(&mut rng)).count() as u64
        })
        .sum();
    McEstimate::from_counts(successes, trials)
}

/// Monte Carlo success probability of an ALOHA link of length `r`.
///
/// `radius` is the exact-sampling radius around the receiver (default
/// [`InterferenceSampler::default_radius`]); `beta = 0` is accepted.
pub fn mc_aloha_prob(
    r: f64,
    lambda: f64,
    model: &ChannelModel,
    trials: u64,
    radius: Option<f64>,
    seed: u64,
) -> Result<McEstimate> {
    if trials < 1000 {
        return Err(Error::invalid("Monte Carlo needs at least 1000 trials"));
    }
    if !(r > 0.0 && model.beta >= 0.0 && model.alpha > 2.0) {
        return Err(Error::invalid("need r > 0, beta >= 0, alpha > 2"));
    }
    model.fading.validate()?;
    let radius = radius.unwrap_or_else(|| InterferenceSampler::default_radius(lambda));
    let sampler = InterferenceSampler::new(lambda, model.alpha, model.fading, radius)?;
    let signal = pow_d2(r * r, model.alpha);
    let beta = model.beta;
    Ok(bernoulli_chunks(trials, seed, |rng| {
        let f0 = sample_fading(model.fading, rng);
        if beta == 0.0 {
            return true;
        }
        sampler.sample_below(rng, f0 * signal / beta).is_some()
    }))
}

/// Monte Carlo `Pr(W < x)` without fading.
pub fn mc_prob_w_below(x: f64, lambda: f64, alpha: f64, trials: u64, seed: u64) -> Result<McEstimate> {
    let sampler =
        InterferenceSampler::new(lambda, alpha, Fading::None, InterferenceSampler::default_radius(lambda))?;
    Ok(bernoulli_chunks(trials, seed, |rng| sampler.sample_below(rng, x).is_some_and(|w| w < x)))
}

/// Monte Carlo mean of `exp(-theta W)` and its standard error.
pub fn mc_laplace(
    theta: f64,
    lambda: f64,
    alpha: f64,
    fading: Fading,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let sampler = InterferenceSampler::new(lambda, alpha, fading, InterferenceSampler::default_radius(lambda))?;
    let (s1, s2): (f64, f64) = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = trials / CHUNKS + u64::from(c < trials % CHUNKS);
            (0..n).fold((0.0, 0.0), |(a, b), _| {
                let v = (-theta * sampler.sample(&mut rng)).exp();
                (a + v, b + v * v)
            })
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = trials as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Laplace transform of the interference, `exp(-pi lambda Gamma(1-g) psi(g) theta^g)`.
pub fn laplace_transform_w(theta: f64, lambda: f64, alpha: f64, fading: Fading) -> Result<f64> {
    if !(theta >= 0.0 && lambda >= 0.0 && alpha > 2.0) {
        return Err(Error::invalid("need theta >= 0, lambda >= 0, alpha > 2"));
    }
    if theta == 0.0 {
        return Ok(1.0);
    }
    let g = 2.0 / alpha;
    Ok((-PI * lambda * gamma(1.0 - g) * psi(fading, g)? * theta.powf(g)).exp())
}

/// Success probability with exponential fading on every link:
/// `exp(-lambda pi Gamma(1-g) Gamma(1+g) beta^g r^2)`.
pub fn exponential_fading_prob(r: f64, lambda: f64, beta: f64, alpha: f64) -> Result<f64> {
    laplace_transform_w(beta * pow_d2(r * r, -alpha), lambda, alpha, Fading::Exponential)
}

/// `p(r)` on the given link lengths.
pub fn aloha_curve(rs: &[f64], params: &SeriesParams, fading: Fading) -> Result<Vec<AlohaResult>> {
    rs.iter()
        .map(|&r| aloha_prob(r, params, fading).map(|p| AlohaResult::new(r, p, Method::Series)))
        .collect()
}

/// Link length maximizing `r p(r)`.
///
/// Golden-section search on `[1e-4/sqrt(lambda), r_hi]`, where `r_hi` is the
/// first doubling with `p < 1e-6`; falls back to a scan of 10^4 points when a
/// bracket check fails.
pub fn optimize_range(params: &SeriesParams, fading: Fading) -> Result<AlohaResult> {
    params.validate()?;
    if !(params.lambda > 0.0) {
        return Err(Error::invalid("optimization needs lambda > 0"));
    }
    let s = 1.0 / params.lambda.sqrt();
    let r_lo = 1e-4 * s;
    let mut r_hi = 0.1 * s;
    while aloha_prob(r_hi, params, fading)? >= 1e-6 {
        r_hi *= 2.0;
        if r_hi > 1e6 * s {
            return Err(Error::invalid("success probability does not decay"));
        }
    }
    let err = std::cell::RefCell::new(None);
    let f = |r: f64| match aloha_prob(r, params, fading) {
        Ok(p) => r * p,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let (mut r, mut rp, unimodal) = golden_max(f, r_lo, r_hi, 1e-5 * s);
    if let Some(e) = err.borrow_mut().take() {
        return Err(e);
    }
    if !unimodal {
        log::warn!("r p(r) failed a bracket check; scanning");
        const N: usize = 10_000;
        for k in 0..=N {
            let x = r_lo + (r_hi - r_lo) * k as f64 / N as f64;
            let v = f(x);
            if v > rp {
                r = x;
                rp = v;
            }
        }
        if let Some(e) = err.borrow_mut().take() {
            return Err(e);
        }
    }
    Ok(AlohaResult::new(r, rp / r, Method::Series))
}

pub fn write_curve_csv(rows: &[AlohaResult], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["r", "p", "rp", "method"])?;
    for a in rows {
        w.write_record([a.r.to_string(), a.p.to_string(), a.rp.to_string(), a.method.name().into()])?;
    }
    w.flush()?;
    Ok(())
}

/// JSON report of an optimization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub beta: f64,
    pub alpha: f64,
    pub fading: String,
    pub r1: f64,
    pub p_at_opt: f64,
    pub rp: f64,
    pub inv_rp: f64,
}

impl OptimizerReport {
    pub fn new(params: &SeriesParams, fading: Fading, res: &AlohaResult) -> Self {
        OptimizerReport {
            beta: params.beta,
            alpha: params.alpha,
            fading: fading.to_string(),
            r1: res.r * params.lambda.sqrt(),
            p_at_opt: res.p,
            rp: res.rp,
            inv_rp: res.inv_rp,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits() {
        let p = SeriesParams::new(1.0, 1.0, 4.0);
        assert!((prob_w_below(1e12, &p).unwrap() - 1.0).abs() < 1e-5);
        let empty = SeriesParams::new(0.0, 1.0, 4.0);
        assert_eq!(prob_w_below(0.3, &empty).unwrap(), 1.0);
        assert!((aloha_prob(1e-4, &p, Fading::None).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn laplace_closed_form() {
        assert_eq!(laplace_transform_w(0.0, 1.0, 4.0, Fading::None).unwrap(), 1.0);
        let v = laplace_transform_w(1.0, 1.0, 4.0, Fading::None).unwrap();
        assert!((v - (-PI.powf(1.5)).exp()).abs() < 1e-14);
    }

    #[test]
    fn exponential_series_is_unsupported() {
        let p = SeriesParams::new(1.0, 1.0, 4.0);
        assert!(matches!(aloha_prob(0.3, &p, Fading::Exponential), Err(Error::Unsupported(_))));
    }

    #[test]
    fn beta_zero_always_succeeds() {
        let m = ChannelModel { alpha: 4.0, beta: 0.0, fading: Fading::None };
        let e = mc_aloha_prob(0.5, 1.0, &m, 2000, None, 1).unwrap();
        assert_eq!(e.p_hat, 1.0);
    }
}
