//! Command-line driver. Each subcommand builds a [`PipelineConfig`] from
//! defaults, an optional `--config` file and explicit flags (in that order of
//! precedence), then runs one pipeline stage.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::basis::{
    build_basis, harmonic_to_slepian_first, shannon_number, slepian_synthesis, slepian_to_harmonic, SlepianBasis,
    SlepianCoeffs,
};
use crate::config::{PipelineConfig, Truncation};
use crate::denoise::{add_white_noise, snr, target_snr_sigma, Denoiser, NoiseModel};
use crate::error::{Error, Result};
use crate::io;
use crate::region::{build_region, Region};
use crate::sphere::{forward_sht, inverse_sht, make_grid, HarmonicCoeffs};
use crate::synthetic::{earthlike_coeffs, smooth_coeffs};
use crate::wavelets::{build_filter_bank, wavelet_analysis, wavelet_synthesis, FilterBank, TilingParams};

#[derive(Debug, Parser)]
#[command(name = "slepian", version, about = "Slepian functions and Slepian wavelets on the sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the concentration problem and cache the basis.
    Basis(Common),
    /// Print the Shannon number of the configured region.
    Shannon(Common),
    /// Write the scale-discretised filter bank.
    Tiling(Common),
    /// Wavelet analysis of an ingested or synthetic signal.
    Analyze(Common),
    /// Wavelet synthesis from coefficient files written by `analyze`.
    Synth(SynthArgs),
    /// Add seeded noise and denoise by hard thresholding.
    Denoise(Common),
    /// Spherical harmonic transform between coefficient and field files.
    Sht(ShtArgs),
}

/// Flags mirroring [`PipelineConfig`].
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// key=value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "L", value_name = "INT")]
    pub bandlimit: Option<usize>,
    /// polar_cap or full_sphere
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub opening_deg: Option<f64>,
    #[arg(long)]
    pub center_theta_deg: Option<f64>,
    #[arg(long)]
    pub center_phi_deg: Option<f64>,
    /// coefficient file whose positive part restricts the cap
    #[arg(long)]
    pub threshold_field: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "J0")]
    pub j0: Option<u32>,
    /// shannon or full
    #[arg(long)]
    pub truncation: Option<String>,
    /// comma-separated threshold multipliers
    #[arg(long)]
    pub n_sigma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// harmonic coefficient file; a synthetic field is used when absent
    #[arg(long)]
    pub signal: Option<PathBuf>,
    /// Gaussian smoothing FWHM in radians
    #[arg(long)]
    pub smoothing_fwhm: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    /// directory holding `filter_bank.txt` and the coefficient files
    #[arg(long)]
    pub input_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ShtArgs {
    /// field file (forward) or coefficient file (inverse)
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// coefficients to samples instead of samples to coefficients
    #[arg(long)]
    pub inverse: bool,
    /// also write a `theta,phi,value` dump of the field
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

impl Common {
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        let mut set = |key: &str, value: Option<String>| -> Result<()> {
            match value {
                Some(v) => cfg.apply(key, &v),
                None => Ok(()),
            }
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        set("L", self.bandlimit.map(|v| v.to_string()))?;
        set("kind", self.kind.clone())?;
        set("opening_deg", self.opening_deg.map(|v| v.to_string()))?;
        set("center_theta_deg", self.center_theta_deg.map(|v| v.to_string()))?;
        set("center_phi_deg", self.center_phi_deg.map(|v| v.to_string()))?;
        set("threshold_field", path(&self.threshold_field))?;
        set("lambda", self.lambda.map(|v| v.to_string()))?;
        set("J0", self.j0.map(|v| v.to_string()))?;
        set("truncation", self.truncation.clone())?;
        set("n_sigma", self.n_sigma.clone())?;
        set("snr_db", self.snr_db.map(|v| v.to_string()))?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("cache_dir", path(&self.cache_dir))?;
        set("output_dir", path(&self.output_dir))?;
        set("signal", path(&self.signal))?;
        set("smoothing_fwhm", self.smoothing_fwhm.map(|v| v.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn require_seed(cfg: &PipelineConfig, what: &str) -> Result<u64> {
    cfg.seed
        .ok_or_else(|| Error::Config(format!("{what} is stochastic: --seed <int> is required")))
}

fn region_of(cfg: &PipelineConfig) -> Result<Region> {
    build_region(&cfg.region, &make_grid(cfg.bandlimit)?)
}

fn basis_count(cfg: &PipelineConfig, n: f64) -> usize {
    let full = cfg.bandlimit * cfg.bandlimit;
    match cfg.truncation {
        Truncation::Full => full,
        Truncation::Shannon => (n.ceil() as usize).clamp(1, full),
    }
}

/// Cache file for a region and bandlimit.
pub fn cache_path(cfg: &PipelineConfig, region: &Region) -> PathBuf {
    cfg.cache_dir
        .join(format!("basis_L{}_{}.txt", cfg.bandlimit, region.digest()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Loads the cached basis, or reports it missing.
pub fn load_basis(cfg: &PipelineConfig) -> Result<SlepianBasis> {
    let region = region_of(cfg)?;
    let path = cache_path(cfg, &region);
    if !path.exists() {
        return Err(Error::Missing(format!(
            "basis cache {} not found; run `slepian basis` first",
            path.display()
        )));
    }
    io::read_basis(&path, &region)
}

fn cmd_basis(cfg: &PipelineConfig, out: &mut String) -> Result<()> {
    let region = region_of(cfg)?;
    let path = cache_path(cfg, &region);
    let count = basis_count(cfg, shannon_number(&region, cfg.bandlimit));
    let mut cached = None;
    if path.exists() {
        match io::read_basis_header(&path) {
            Ok((l, digest, _)) if l == cfg.bandlimit && digest == region.digest() => {
                let basis = io::read_basis(&path, &region)?;
                if basis.len() >= count {
                    cached = Some(basis);
                }
            }
            _ => eprintln!("warning: cache {} does not match the region; rebuilding", path.display()),
        }
    }
    let hit = cached.is_some();
    let basis = match cached {
        Some(b) => b,
        None => {
            let b = build_basis(&region, cfg.bandlimit)?.truncated(count);
            io::write_basis(&path, &b)?;
            b
        }
    };
    let _ = writeln!(out, "cache={} ({})", path.display(), if hit { "hit" } else { "built" });
    let _ = writeln!(out, "L={} area={} N={:.6}", cfg.bandlimit, region.area(), basis.shannon_number());
    let _ = writeln!(out, "stored={}", basis.len());
    for (p, mu) in basis.eigenvalues().iter().take(10).enumerate() {
        let _ = writeln!(out, "mu_{}={mu:.12}", p + 1);
    }
    Ok(())
}

fn cmd_shannon(cfg: &PipelineConfig, out: &mut String) -> Result<()> {
    let region = region_of(cfg)?;
    let n = shannon_number(&region, cfg.bandlimit);
    let _ = writeln!(out, "area={}", region.area());
    let _ = writeln!(out, "N={n:.6}");
    let _ = writeln!(out, "ceil_N={}", n.ceil() as usize);
    Ok(())
}

fn bank_for(cfg: &PipelineConfig, p_max: usize) -> Result<FilterBank> {
    build_filter_bank(TilingParams::new(cfg.lambda, cfg.j0, p_max)?)
}

fn filter_curves_csv(bank: &FilterBank) -> String {
    let ids = bank.ids();
    let mut s = String::from("p");
    for id in &ids {
        let _ = write!(s, ",{id}");
    }
    s.push('\n');
    for p in 0..bank.p_max() {
        let _ = write!(s, "{}", p + 1);
        for &id in &ids {
            let _ = write!(s, ",{:e}", bank.filter(id)[p]);
        }
        s.push('\n');
    }
    s
}

fn cmd_tiling(cfg: &PipelineConfig, out: &mut String) -> Result<()> {
    let region = region_of(cfg)?;
    let p_max = basis_count(cfg, shannon_number(&region, cfg.bandlimit));
    let bank = bank_for(cfg, p_max)?;
    io::write_filter_bank(cfg.output_dir.join("filter_bank.txt"), &bank)?;
    write(&cfg.output_dir.join("filter_curves.csv"), &filter_curves_csv(&bank))?;
    let _ = writeln!(
        out,
        "lambda={} J0={} J={} Pmax={}",
        cfg.lambda,
        cfg.j0,
        bank.j_max(),
        p_max
    );
    let _ = writeln!(out, "admissibility_residual={:e}", bank.admissibility_residual());
    Ok(())
}

fn signal_coeffs(cfg: &PipelineConfig, synthetic: fn(usize, u64) -> HarmonicCoeffs, what: &str) -> Result<HarmonicCoeffs> {
    match &cfg.signal {
        Some(path) => {
            let data = io::ingest_coeffs(path, cfg.smoothing_fwhm)?;
            Ok(data.coeffs.with_bandlimit(cfg.bandlimit))
        }
        None => Ok(synthetic(cfg.bandlimit, require_seed(cfg, what)?)),
    }
}

fn cmd_analyze(cfg: &PipelineConfig, out: &mut String) -> Result<()> {
    let basis = load_basis(cfg)?;
    let a = signal_coeffs(cfg, earthlike_coeffs, "analysis of a synthetic signal")?;
    let p_max = basis.len();
    let f = harmonic_to_slepian_first(&a, &basis, p_max)?;
    let bank = bank_for(cfg, p_max)?;
    let w = wavelet_analysis(&f, &bank)?;
    let dir = &cfg.output_dir;
    io::write_slepian(dir.join("signal_slepian.txt"), &f)?;
    io::write_filter_bank(dir.join("filter_bank.txt"), &bank)?;
    write(&dir.join("filter_curves.csv"), &filter_curves_csv(&bank))?;
    let files = io::write_wavelet_coeffs(dir, &bank, &w)?;
    let grid = make_grid(cfg.bandlimit)?;
    for id in bank.ids() {
        let c = SlepianCoeffs::new(cfg.bandlimit, w.get(id).to_vec());
        let field = slepian_synthesis(&c, &basis, &grid)?;
        io::write_grid_csv(dir.join(format!("field_{id}.csv")), &field)?;
    }
    io::write_grid_csv(dir.join("signal.csv"), &slepian_synthesis(&f, &basis, &grid)?)?;
    let _ = writeln!(out, "P={p_max} J0={} J={}", bank.j0(), bank.j_max());
    let _ = writeln!(out, "wrote {} coefficient files to {}", files.len(), dir.display());
    Ok(())
}

fn cmd_synth(args: &SynthArgs, out: &mut String) -> Result<()> {
    let cfg = args.common.resolve()?;
    let input = args.input_dir.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let bank = io::read_filter_bank(input.join("filter_bank.txt"))?;
    let w = io::read_wavelet_coeffs(&input, &bank)?;
    let f = wavelet_synthesis(&w, &bank)?;
    io::write_slepian(cfg.output_dir.join("synth_slepian.txt"), &f)?;
    let _ = writeln!(out, "P={} energy={:e}", f.len(), f.energy());
    if let Ok(basis) = load_basis(&cfg) {
        let a = slepian_to_harmonic(&f, &basis)?;
        io::write_coeffs(cfg.output_dir.join("synth_coeffs.txt"), &a)?;
        let field = inverse_sht(&a, &make_grid(cfg.bandlimit)?)?;
        io::write_grid_csv(cfg.output_dir.join("synth.csv"), &field)?;
        let _ = writeln!(out, "wrote harmonic coefficients and grid dump");
    }
    Ok(())
}

fn cmd_denoise(cfg: &PipelineConfig, out: &mut String) -> Result<()> {
    let seed = require_seed(cfg, "denoising")?;
    let basis = load_basis(cfg)?;
    let p_max = basis.len();
    let bank = bank_for(cfg, p_max)?;
    let a = signal_coeffs(cfg, smooth_coeffs, "denoising")?;
    let s = harmonic_to_slepian_first(&a, &basis, p_max)?;
    let sigma = target_snr_sigma(&s, cfg.snr_db)?;
    let model = NoiseModel::new(sigma, seed)?;
    let x = add_white_noise(&s, &model);
    let snr_x = snr(&x, &s)?;
    let denoiser = Denoiser::new(&bank, &basis, &model)?;
    let grid = make_grid(cfg.bandlimit)?;
    let dir = &cfg.output_dir;

    let mut report = String::new();
    let _ = writeln!(report, "L={}", cfg.bandlimit);
    let _ = writeln!(report, "P={p_max}");
    let _ = writeln!(report, "seed={seed}");
    let _ = writeln!(report, "sigma={sigma:e}");
    let _ = writeln!(report, "snr_x={snr_x}");
    io::write_slepian(dir.join("noisy_slepian.txt"), &x)?;
    io::write_grid_csv(dir.join("signal.csv"), &slepian_synthesis(&s, &basis, &grid)?)?;
    io::write_grid_csv(dir.join("noisy.csv"), &slepian_synthesis(&x, &basis, &grid)?)?;
    for &n_sigma in &cfg.n_sigma {
        let outcome = denoiser.denoise(&x, n_sigma)?;
        let snr_d = snr(&outcome.denoised, &s)?;
        let _ = writeln!(report, "snr_d[{n_sigma}]={snr_d}");
        let _ = writeln!(report, "gain[{n_sigma}]={}", snr_d - snr_x);
        for st in &outcome.stats {
            let _ = writeln!(report, "kept[{n_sigma}][{}]={}", st.filter, st.kept_fraction);
        }
        io::write_slepian(dir.join(format!("denoised_{n_sigma}.txt")), &outcome.denoised)?;
        io::write_grid_csv(
            dir.join(format!("denoised_{n_sigma}.csv")),
            &slepian_synthesis(&outcome.denoised, &basis, &grid)?,
        )?;
        let _ = writeln!(out, "N_sigma={n_sigma}: SNR {snr_x:.2} dB -> {snr_d:.2} dB");
    }
    write(&dir.join("denoise_report.txt"), &report)?;
    Ok(())
}

fn ensure_finite<'a>(values: impl IntoIterator<Item = &'a num_complex::Complex64>, what: &str) -> Result<()> {
    if values.into_iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical(format!("{what} produced non-finite values")))
    }
}

fn cmd_sht(args: &ShtArgs, out: &mut String) -> Result<()> {
    if args.inverse {
        let a = io::read_coeffs(&args.input)?;
        let field = inverse_sht(&a, &make_grid(a.bandlimit())?)?;
        ensure_finite(&field.values, "inverse transform")?;
        io::write_field(&args.output, &field)?;
        if let Some(csv) = &args.csv {
            io::write_grid_csv(csv, &field)?;
        }
        let _ = writeln!(out, "L={} samples={}", a.bandlimit(), field.values.len());
    } else {
        let field = io::read_field(&args.input)?;
        let a = forward_sht(&field)?;
        ensure_finite(a.as_slice(), "forward transform")?;
        io::write_coeffs(&args.output, &a)?;
        if let Some(csv) = &args.csv {
            io::write_grid_csv(csv, &field)?;
        }
        let _ = writeln!(out, "L={} coefficients={}", a.bandlimit(), a.as_slice().len());
    }
    Ok(())
}

/// Runs one parsed command and returns its standard output.
pub fn run(cli: &Cli) -> Result<String> {
    let mut out = String::new();
    match &cli.command {
        Command::Basis(c) => cmd_basis(&c.resolve()?, &mut out)?,
        Command::Shannon(c) => cmd_shannon(&c.resolve()?, &mut out)?,
        Command::Tiling(c) => cmd_tiling(&c.resolve()?, &mut out)?,
        Command::Analyze(c) => cmd_analyze(&c.resolve()?, &mut out)?,
        Command::Synth(a) => cmd_synth(a, &mut out)?,
        Command::Denoise(c) => cmd_denoise(&c.resolve()?, &mut out)?,
        Command::Sht(a) => cmd_sht(a, &mut out)?,
    }
    Ok(out)
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
