use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Every tunable parameter. Flags and the JSON config file share this shape;
/// a flag that is present overrides the file.
#[derive(Clone, Debug, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// SIR threshold
    #[arg(long)]
    pub beta: Option<f64>,
    /// Attenuation exponent, > 2
    #[arg(long)]
    pub alpha: Option<f64>,
    /// square | rectangular | hexagonal | triangular | linear
    #[arg(long)]
    pub pattern: Option<String>,
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub k2: Option<f64>,
    /// Grid spacing in meters
    #[arg(long)]
    pub d: Option<f64>,
    /// Half-width of the square network region in meters
    #[arg(long)]
    pub extent: Option<f64>,
    /// none | log-uniform:f | exponential
    #[arg(long)]
    pub fading: Option<String>,
    /// Monte Carlo trials
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Transmitter density for ALOHA
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Number of samples along a curve
    #[arg(long)]
    pub points: Option<usize>,
    /// Lattice-sum radius at unit density
    #[arg(long)]
    pub truncation_radius: Option<f64>,
    /// Repeat the range at twice the extent and report the change
    #[arg(long)]
    pub check_truncation: Option<bool>,
    /// interference | sir | member
    #[arg(long)]
    pub quantity: Option<String>,
    /// Raster resolution per side
    #[arg(long)]
    pub n: Option<usize>,
    /// Raster half-width in meters
    #[arg(long)]
    pub half_width: Option<f64>,
    /// grid | aloha
    #[arg(long)]
    pub scheme: Option<String>,
    /// Node density as a multiple of the transmitter density
    #[arg(long)]
    pub node_ratio: Option<f64>,
    #[arg(long)]
    pub packets: Option<usize>,
    #[arg(long)]
    pub slots: Option<usize>,
    /// Source to destination distance in meters
    #[arg(long)]
    pub packet_distance: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Params {
    /// `self` with every field set in `flags` replaced.
    pub fn overlay(mut self, flags: &Params) -> Params {
        overlay!(
            self, flags, beta, alpha, pattern, k1, k2, d, extent, fading, trials, seed, lambda, r_min,
            r_max, points, truncation_radius, check_truncation, quantity, n, half_width, scheme,
            node_ratio, packets, slots, packet_distance, format
        );
        self
    }

    pub fn from_file(path: &Path) -> Result<Params, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Invalid(format!("config {}: {e}", path.display())))
    }

    /// Set a numeric parameter by name, for sweeps.
    pub fn set_numeric(&mut self, axis: &str, v: f64) -> Result<(), CliError> {
        let as_count = |v: f64| -> Result<usize, CliError> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(CliError::Invalid(format!("{axis} takes whole numbers, got {v}")))
            }
        };
        match axis {
            "beta" => self.beta = Some(v),
            "alpha" => self.alpha = Some(v),
            "k1" => self.k1 = Some(v),
            "k2" => self.k2 = Some(v),
            "d" => self.d = Some(v),
            "extent" => self.extent = Some(v),
            "lambda" => self.lambda = Some(v),
            "r-min" => self.r_min = Some(v),
            "r-max" => self.r_max = Some(v),
            "truncation-radius" => self.truncation_radius = Some(v),
            "half-width" => self.half_width = Some(v),
            "node-ratio" => self.node_ratio = Some(v),
            "packet-distance" => self.packet_distance = Some(v),
            "trials" => self.trials = Some(as_count(v)? as u64),
            "points" => self.points = Some(as_count(v)?),
            "n" => self.n = Some(as_count(v)?),
            "packets" => self.packets = Some(as_count(v)?),
            "slots" => self.slots = Some(as_count(v)?),
            _ => return Err(CliError::Invalid(format!("'{axis}' is not a numeric parameter"))),
        }
        Ok(())
    }
}

/// Options every command accepts besides the parameters.
#[derive(Clone, Debug, Default, Args)]
pub struct CommonArgs {
    #[command(flatten)]
    pub params: Params,
    /// JSON file with parameter defaults
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (directory from GEOMAC_OUT_DIR when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Parameter to sweep, e.g. beta
    #[arg(long, requires = "sweep_values")]
    pub sweep_axis: Option<String>,
    /// Comma-separated sweep values; an empty list does nothing
    #[arg(long, requires = "sweep_axis", allow_hyphen_values = true)]
    pub sweep_values: Option<String>,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<Params, CliError> {
        let base = match &self.config {
            Some(p) => Params::from_file(p)?,
            None => Params::default(),
        };
        Ok(base.overlay(&self.params))
    }

    pub fn sweep_values(&self) -> Result<Option<Vec<f64>>, CliError> {
        let Some(raw) = &self.sweep_values else { return Ok(None) };
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| CliError::Invalid(format!("bad sweep value '{s}'"))))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: Params = serde_json::from_str(r#"{"beta": 3.0, "alpha": 5.0, "pattern": "hex"}"#).unwrap();
        let flags = Params { beta: Some(7.0), ..Params::default() };
        let p = file.overlay(&flags);
        assert_eq!(p.beta, Some(7.0));
        assert_eq!(p.alpha, Some(5.0));
        assert_eq!(p.pattern.as_deref(), Some("hex"));
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        assert!(serde_json::from_str::<Params>(r#"{"betta": 3.0}"#).is_err());
    }

    #[test]
    fn set_numeric_rejects_fractional_counts() {
        let mut p = Params::default();
        assert!(p.set_numeric("trials", 10.5).is_err());
        p.set_numeric("trials", 1e4).unwrap();
        assert_eq!(p.trials, Some(10_000));
        assert!(p.set_numeric("pattern", 1.0).is_err());
    }
}
