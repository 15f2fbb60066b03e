//! Flat `key=value` pipeline configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::region::RegionConfig;

/// How many Slepian functions a basis keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Truncation {
    /// `⌈N⌉` functions.
    #[default]
    Shannon,
    /// All `L²` functions.
    Full,
}

/// Settings shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub bandlimit: usize,
    pub region: RegionConfig,
    pub lambda: f64,
    pub j0: u32,
    pub truncation: Truncation,
    pub n_sigma: Vec<f64>,
    pub snr_db: f64,
    pub seed: Option<u64>,
    pub cache_dir: PathBuf,
    pub output_dir: PathBuf,
    /// Harmonic coefficient file used as the signal; synthetic when absent.
    pub signal: Option<PathBuf>,
    /// Gaussian smoothing FWHM (radians) applied on ingestion.
    pub smoothing_fwhm: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            bandlimit: 16,
            region: RegionConfig::default(),
            lambda: 3.0,
            j0: 2,
            truncation: Truncation::Shannon,
            n_sigma: vec![2.0, 3.0, 5.0],
            snr_db: 4.0,
            seed: None,
            cache_dir: PathBuf::from("cache"),
            output_dir: PathBuf::from("out"),
            signal: None,
            smoothing_fwhm: None,
        }
    }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl PipelineConfig {
    /// Applies one `key=value` pair; region keys are forwarded.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "L" => self.bandlimit = number(key, value)?,
            "lambda" => self.lambda = number(key, value)?,
            "J0" => self.j0 = number(key, value)?,
            "truncation" => {
                self.truncation = match value {
                    "shannon" => Truncation::Shannon,
                    "full" => Truncation::Full,
                    _ => return Err(Error::Config(format!("truncation must be shannon or full, got {value:?}"))),
                }
            }
            "n_sigma" => {
                self.n_sigma = value
                    .split(',')
                    .map(str::trim)
                    .filter(|v| !v.is_empty())
                    .map(|v| number(key, v))
                    .collect::<Result<_>>()?
            }
            "snr_db" => self.snr_db = number(key, value)?,
            "seed" => self.seed = if value.is_empty() { None } else { Some(number(key, value)?) },
            "cache_dir" => self.cache_dir = value.into(),
            "output_dir" => self.output_dir = value.into(),
            "signal" => self.signal = optional_path(value),
            "smoothing_fwhm" => {
                self.smoothing_fwhm = if value.is_empty() { None } else { Some(number(key, value)?) }
            }
            _ => {
                if !self.region.apply(key, value)? {
                    return Err(Error::Config(format!("unknown key {key:?}")));
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            cfg.apply(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "L={}", self.bandlimit);
        s.push_str(&self.region.to_text());
        let _ = writeln!(s, "lambda={}", self.lambda);
        let _ = writeln!(s, "J0={}", self.j0);
        let _ = writeln!(
            s,
            "truncation={}",
            match self.truncation {
                Truncation::Shannon => "shannon",
                Truncation::Full => "full",
            }
        );
        let list: Vec<String> = self.n_sigma.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "n_sigma={}", list.join(","));
        let _ = writeln!(s, "snr_db={}", self.snr_db);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed={seed}");
        }
        let _ = writeln!(s, "cache_dir={}", self.cache_dir.display());
        let _ = writeln!(s, "output_dir={}", self.output_dir.display());
        if let Some(p) = &self.signal {
            let _ = writeln!(s, "signal={}", p.display());
        }
        if let Some(f) = self.smoothing_fwhm {
            let _ = writeln!(s, "smoothing_fwhm={f}");
        }
        s
    }

    /// Range checks that do not need any heavy computation.
    pub fn validate(&self) -> Result<()> {
        if self.bandlimit == 0 {
            return Err(Error::Config("L must be positive".into()));
        }
        if !(self.lambda > 1.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must exceed 1, got {}", self.lambda)));
        }
        let o = self.region.opening_deg;
        if !(o > 0.0 && o < 180.0) {
            return Err(Error::Config(format!("opening_deg must lie in (0, 180), got {o}")));
        }
        if let Some(bad) = self.n_sigma.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::Config(format!("n_sigma entries must be non-negative, got {bad}")));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::Config("snr_db must be finite".into()));
        }
        if let Some(f) = self.smoothing_fwhm {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::Config(format!("smoothing_fwhm must be positive, got {f}")));
            }
        }
        Ok(())
    }
}
