//! Text file formats.
//!
//! * harmonic coefficients: `# L=<int>` then `l m re im` lines
//! * sampled fields: `# L=<int> n_theta=<int> n_phi=<int>` then one θ-ring
//!   per line of `re im` pairs
//! * Slepian coefficients: `# L=<int> P=<int>` then `p re im` lines
//! * basis cache: `# L=<int> region=<hash> N=<float>`, then per eigenpair a
//!   `p mu` line followed by `L²` lines `l m re im`
//! * filter bank: `# lambda=<f> J0=<int> J=<int> Pmax=<int>`, then blocks
//!   introduced by `# filter=scaling` or `# filter=wavelet j=<int>` of `p value`
//! * wavelet coefficients: the filter-bank header and one `# filter=` line,
//!   then `p re im`
//!
//! Floats are written in shortest round-trip form, so every file re-reads
//! to the identical in-memory value.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::basis::{SlepianBasis, SlepianCoeffs};
use crate::error::{Error, Result};
use crate::region::Region;
use crate::sphere::{degree_order, flat_index, make_grid, GridSpec, HarmonicCoeffs, SampledField};
use crate::wavelets::{FilterBank, FilterId, TilingParams, WaveletCoefficients};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses `key=value` tokens from a `#` header line.
fn header_fields(line: &str) -> Vec<(&str, &str)> {
    line.trim_start_matches('#')
        .split_whitespace()
        .filter_map(|tok| tok.split_once('='))
        .collect()
}

fn header_value<'a>(fields: &[(&'a str, &'a str)], key: &str) -> Option<&'a str> {
    fields.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

fn header_num<T: std::str::FromStr>(
    fields: &[(&str, &str)],
    key: &str,
    path: &Path,
    line: usize,
) -> Result<T> {
    header_value(fields, key)
        .ok_or_else(|| Error::parse(path, line, format!("header lacks {key}=")))?
        .parse()
        .map_err(|_| Error::parse(path, line, format!("bad value for {key}")))
}

fn parse_tok<T: std::str::FromStr>(tok: Option<&str>, path: &Path, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::parse(path, line, format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::parse(path, line, format!("malformed {what}")))
}

/// Content lines with their 1-based numbers, skipping blanks.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub fn format_coeffs(coeffs: &HarmonicCoeffs) -> String {
    let mut s = format!("# L={}\n", coeffs.bandlimit());
    for (i, c) in coeffs.as_slice().iter().enumerate() {
        let (l, m) = degree_order(i);
        let _ = writeln!(s, "{l} {m} {:e} {:e}", c.re, c.im);
    }
    s
}

pub fn parse_coeffs(text: &str, path: &Path) -> Result<HarmonicCoeffs> {
    let mut lines = numbered_lines(text);
    let (n, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty coefficient file"))?;
    if !header.starts_with('#') {
        return Err(Error::parse(path, n, "expected `# L=<int>` header"));
    }
    let bandlimit: usize = header_num(&header_fields(header), "L", path, n)?;
    let mut out = HarmonicCoeffs::zeros(bandlimit);
    for (n, line) in lines {
        if line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let l: usize = parse_tok(toks.next(), path, n, "degree l")?;
        let m: i64 = parse_tok(toks.next(), path, n, "order m")?;
        let re: f64 = parse_tok(toks.next(), path, n, "real part")?;
        let im: f64 = parse_tok(toks.next(), path, n, "imaginary part")?;
        if toks.next().is_some() {
            return Err(Error::parse(path, n, "trailing fields"));
        }
        if l >= bandlimit || m.unsigned_abs() as usize > l {
            return Err(Error::parse(
                path,
                n,
                format!("(l, m) = ({l}, {m}) outside header bandlimit {bandlimit}"),
            ));
        }
        out.as_mut_slice()[flat_index(l, m)] = Complex64::new(re, im);
    }
    Ok(out)
}

pub fn write_coeffs(path: impl AsRef<Path>, coeffs: &HarmonicCoeffs) -> Result<()> {
    write_text(path.as_ref(), &format_coeffs(coeffs))
}

pub fn read_coeffs(path: impl AsRef<Path>) -> Result<HarmonicCoeffs> {
    let path = path.as_ref();
    parse_coeffs(&read_text(path)?, path)
}

pub fn format_field(field: &SampledField) -> String {
    let g = &field.grid;
    let mut s = format!("# L={} n_theta={} n_phi={}\n", g.bandlimit(), g.n_theta(), g.n_phi());
    for ring in field.values.chunks(g.n_phi()) {
        let row: Vec<String> = ring.iter().map(|v| format!("{:e} {:e}", v.re, v.im)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn parse_field(text: &str, path: &Path) -> Result<SampledField> {
    let mut lines = numbered_lines(text);
    let (n, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty field file"))?;
    let fields = header_fields(header);
    let bandlimit: usize = header_num(&fields, "L", path, n)?;
    let n_theta: usize = header_num(&fields, "n_theta", path, n)?;
    let n_phi: usize = header_num(&fields, "n_phi", path, n)?;
    let grid = make_grid(bandlimit).map_err(|e| Error::parse(path, n, e.to_string()))?;
    if grid.n_theta() != n_theta || grid.n_phi() != n_phi {
        return Err(Error::parse(
            path,
            n,
            format!("grid {n_theta}x{n_phi} does not match bandlimit {bandlimit}"),
        ));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (n, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if !toks.len().is_multiple_of(2) {
            return Err(Error::parse(path, n, "odd number of values (expected re im pairs)"));
        }
        for pair in toks.chunks(2) {
            let re: f64 = parse_tok(Some(pair[0]), path, n, "real part")?;
            let im: f64 = parse_tok(Some(pair[1]), path, n, "imaginary part")?;
            values.push(Complex64::new(re, im));
        }
    }
    if values.len() != grid.len() {
        return Err(Error::parse(
            path,
            text.lines().count(),
            format!("{} samples, expected {}", values.len(), grid.len()),
        ));
    }
    SampledField::new(grid, values)
}

pub fn write_field(path: impl AsRef<Path>, field: &SampledField) -> Result<()> {
    write_text(path.as_ref(), &format_field(field))
}

pub fn read_field(path: impl AsRef<Path>) -> Result<SampledField> {
    let path = path.as_ref();
    parse_field(&read_text(path)?, path)
}

/// Plot-ready `theta,phi,value` dump of the real part.
pub fn format_grid_csv(field: &SampledField) -> String {
    let mut s = String::from("theta,phi,value\n");
    for ((t, p, _), v) in field.grid.nodes().zip(&field.values) {
        let _ = writeln!(s, "{t:e},{p:e},{:e}", v.re);
    }
    s
}

pub fn write_grid_csv(path: impl AsRef<Path>, field: &SampledField) -> Result<()> {
    write_text(path.as_ref(), &format_grid_csv(field))
}

pub fn format_slepian(c: &SlepianCoeffs) -> String {
    let mut s = format!("# L={} P={}\n", c.bandlimit, c.len());
    for (p, v) in c.values.iter().enumerate() {
        let _ = writeln!(s, "{} {:e} {:e}", p + 1, v.re, v.im);
    }
    s
}

fn parse_indexed_complex<'a>(
    lines: impl Iterator<Item = (usize, &'a str)>,
    count: usize,
    path: &Path,
) -> Result<Vec<Complex64>> {
    let mut values = vec![Complex64::new(0.0, 0.0); count];
    for (n, line) in lines {
        if line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let p: usize = parse_tok(toks.next(), path, n, "index p")?;
        let re: f64 = parse_tok(toks.next(), path, n, "real part")?;
        let im: f64 = parse_tok(toks.next(), path, n, "imaginary part")?;
        if p == 0 || p > count {
            return Err(Error::parse(path, n, format!("index {p} outside 1..={count}")));
        }
        values[p - 1] = Complex64::new(re, im);
    }
    Ok(values)
}

pub fn parse_slepian(text: &str, path: &Path) -> Result<SlepianCoeffs> {
    let mut lines = numbered_lines(text);
    let (n, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty Slepian coefficient file"))?;
    let fields = header_fields(header);
    let bandlimit: usize = header_num(&fields, "L", path, n)?;
    let count: usize = header_num(&fields, "P", path, n)?;
    Ok(SlepianCoeffs::new(bandlimit, parse_indexed_complex(lines, count, path)?))
}

pub fn write_slepian(path: impl AsRef<Path>, c: &SlepianCoeffs) -> Result<()> {
    write_text(path.as_ref(), &format_slepian(c))
}

pub fn read_slepian(path: impl AsRef<Path>) -> Result<SlepianCoeffs> {
    let path = path.as_ref();
    parse_slepian(&read_text(path)?, path)
}

pub fn format_basis(basis: &SlepianBasis) -> String {
    let lmax = basis.bandlimit();
    let mut s = format!(
        "# L={lmax} region={} N={:e}\n",
        basis.region().digest(),
        basis.shannon_number()
    );
    for (p, mu) in basis.eigenvalues().iter().enumerate() {
        let _ = writeln!(s, "{} {mu:e}", p + 1);
        for (i, c) in basis.eigenvector(p).iter().enumerate() {
            let (l, m) = degree_order(i);
            let _ = writeln!(s, "{l} {m} {:e} {:e}", c.re, c.im);
        }
    }
    s
}

/// Header of a basis cache file: bandlimit, region digest, Shannon number.
pub fn read_basis_header(path: impl AsRef<Path>) -> Result<(usize, String, f64)> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let header = text.lines().next().unwrap_or("");
    let fields = header_fields(header);
    Ok((
        header_num(&fields, "L", path, 1)?,
        header_value(&fields, "region")
            .ok_or_else(|| Error::parse(path, 1, "header lacks region="))?
            .to_string(),
        header_num(&fields, "N", path, 1)?,
    ))
}

/// Reads a basis cache, checking it was built for `region`.
pub fn parse_basis(text: &str, path: &Path, region: &Region) -> Result<SlepianBasis> {
    let mut lines = numbered_lines(text);
    let (n, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty basis cache"))?;
    let fields = header_fields(header);
    let lmax: usize = header_num(&fields, "L", path, n)?;
    let digest = header_value(&fields, "region").unwrap_or("");
    if digest != region.digest() {
        return Err(Error::Mismatch(format!(
            "{}: cached region {digest} differs from requested region {}",
            path.display(),
            region.digest()
        )));
    }
    let dim = lmax * lmax;
    let mut eigenvalues = Vec::new();
    let mut vectors = Vec::new();
    let mut lines = lines.peekable();
    while let Some((n, line)) = lines.next() {
        let mut toks = line.split_whitespace();
        let p: usize = parse_tok(toks.next(), path, n, "index p")?;
        let mu: f64 = parse_tok(toks.next(), path, n, "eigenvalue")?;
        if p != eigenvalues.len() + 1 {
            return Err(Error::parse(path, n, format!("expected eigenpair {}", eigenvalues.len() + 1)));
        }
        eigenvalues.push(mu);
        let start = vectors.len();
        vectors.resize(start + dim, Complex64::new(0.0, 0.0));
        for _ in 0..dim {
            let (n, line) = lines
                .next()
                .ok_or_else(|| Error::parse(path, text.lines().count(), "truncated eigenvector"))?;
            let mut toks = line.split_whitespace();
            let l: usize = parse_tok(toks.next(), path, n, "degree l")?;
            let m: i64 = parse_tok(toks.next(), path, n, "order m")?;
            let re: f64 = parse_tok(toks.next(), path, n, "real part")?;
            let im: f64 = parse_tok(toks.next(), path, n, "imaginary part")?;
            if l >= lmax || m.unsigned_abs() as usize > l {
                return Err(Error::parse(path, n, format!("(l, m) = ({l}, {m}) out of range")));
            }
            vectors[start + flat_index(l, m)] = Complex64::new(re, im);
        }
    }
    SlepianBasis::from_parts(lmax, region.clone(), eigenvalues, vectors)
}

pub fn write_basis(path: impl AsRef<Path>, basis: &SlepianBasis) -> Result<()> {
    write_text(path.as_ref(), &format_basis(basis))
}

pub fn read_basis(path: impl AsRef<Path>, region: &Region) -> Result<SlepianBasis> {
    let path = path.as_ref();
    parse_basis(&read_text(path)?, path, region)
}

fn bank_header(params: &TilingParams, j_max: u32) -> String {
    format!(
        "# lambda={} J0={} J={j_max} Pmax={}\n",
        params.lambda, params.j0, params.p_max
    )
}

fn filter_tag(id: FilterId) -> String {
    match id {
        FilterId::Scaling => "# filter=scaling\n".into(),
        FilterId::Wavelet(j) => format!("# filter=wavelet j={j}\n"),
    }
}

fn parse_filter_tag(line: &str, path: &Path, n: usize) -> Result<FilterId> {
    let fields = header_fields(line);
    match header_value(&fields, "filter") {
        Some("scaling") => Ok(FilterId::Scaling),
        Some("wavelet") => Ok(FilterId::Wavelet(header_num(&fields, "j", path, n)?)),
        _ => Err(Error::parse(path, n, "unknown filter tag")),
    }
}

fn parse_bank_header(line: &str, path: &Path, n: usize) -> Result<(TilingParams, u32)> {
    let fields = header_fields(line);
    let lambda: f64 = header_num(&fields, "lambda", path, n)?;
    let j0: u32 = header_num(&fields, "J0", path, n)?;
    let j: u32 = header_num(&fields, "J", path, n)?;
    let p_max: usize = header_num(&fields, "Pmax", path, n)?;
    let params = TilingParams::new(lambda, j0, p_max).map_err(|e| Error::parse(path, n, e.to_string()))?;
    if params.j_max() != j {
        return Err(Error::parse(path, n, format!("J={j} inconsistent with lambda and Pmax")));
    }
    Ok((params, j))
}

pub fn format_filter_bank(bank: &FilterBank) -> String {
    let mut s = bank_header(&bank.params(), bank.j_max());
    for id in bank.ids() {
        s.push_str(&filter_tag(id));
        for (p, v) in bank.filter(id).iter().enumerate() {
            let _ = writeln!(s, "{} {v:e}", p + 1);
        }
    }
    s
}

pub fn parse_filter_bank(text: &str, path: &Path) -> Result<FilterBank> {
    let mut lines = numbered_lines(text);
    let (n, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty filter bank file"))?;
    let (params, j_max) = parse_bank_header(header, path, n)?;
    let mut scaling = vec![0.0; params.p_max];
    let mut wavelets = vec![vec![0.0; params.p_max]; (j_max - params.j0 + 1) as usize];
    let mut current: Option<FilterId> = None;
    for (n, line) in lines {
        if line.starts_with('#') {
            current = Some(parse_filter_tag(line, path, n)?);
            continue;
        }
        let target = match current {
            Some(FilterId::Scaling) => &mut scaling,
            Some(FilterId::Wavelet(j)) if (params.j0..=j_max).contains(&j) => {
                &mut wavelets[(j - params.j0) as usize]
            }
            _ => return Err(Error::parse(path, n, "value outside a known filter block")),
        };
        let mut toks = line.split_whitespace();
        let p: usize = parse_tok(toks.next(), path, n, "index p")?;
        let v: f64 = parse_tok(toks.next(), path, n, "filter value")?;
        if p == 0 || p > params.p_max {
            return Err(Error::parse(path, n, format!("index {p} outside 1..={}", params.p_max)));
        }
        target[p - 1] = v;
    }
    FilterBank::from_parts(params, scaling, wavelets)
}

pub fn write_filter_bank(path: impl AsRef<Path>, bank: &FilterBank) -> Result<()> {
    write_text(path.as_ref(), &format_filter_bank(bank))
}

pub fn read_filter_bank(path: impl AsRef<Path>) -> Result<FilterBank> {
    let path = path.as_ref();
    parse_filter_bank(&read_text(path)?, path)
}

/// One scale of wavelet coefficients in the filter-bank layout.
pub fn format_wavelet_scale(bank: &FilterBank, w: &WaveletCoefficients, id: FilterId) -> String {
    let mut s = bank_header(&bank.params(), bank.j_max());
    let _ = writeln!(s, "# L={}", w.bandlimit);
    s.push_str(&filter_tag(id));
    for (p, v) in w.get(id).iter().enumerate() {
        let _ = writeln!(s, "{} {:e} {:e}", p + 1, v.re, v.im);
    }
    s
}

/// File name used for one scale of wavelet coefficients.
pub fn wavelet_file_name(id: FilterId) -> String {
    format!("coeffs_{id}.txt")
}

/// Writes every scale into `dir` and returns the paths.
pub fn write_wavelet_coeffs(
    dir: impl AsRef<Path>,
    bank: &FilterBank,
    w: &WaveletCoefficients,
) -> Result<Vec<std::path::PathBuf>> {
    bank.ids()
        .into_iter()
        .map(|id| {
            let path = dir.as_ref().join(wavelet_file_name(id));
            write_text(&path, &format_wavelet_scale(bank, w, id)).map(|_| path)
        })
        .collect()
}

fn parse_wavelet_scale(text: &str, path: &Path) -> Result<(TilingParams, u32, usize, FilterId, Vec<Complex64>)> {
    let mut lines = numbered_lines(text);
    let (n, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty wavelet coefficient file"))?;
    let (params, j_max) = parse_bank_header(header, path, n)?;
    let (n, lline) = lines
        .next()
        .ok_or_else(|| Error::parse(path, n + 1, "missing `# L=` line"))?;
    let bandlimit: usize = header_num(&header_fields(lline), "L", path, n)?;
    let (n, tag) = lines
        .next()
        .ok_or_else(|| Error::parse(path, n + 1, "missing filter tag"))?;
    let id = parse_filter_tag(tag, path, n)?;
    let values = parse_indexed_complex(lines, params.p_max, path)?;
    Ok((params, j_max, bandlimit, id, values))
}

/// Reads the per-scale files written by [`write_wavelet_coeffs`].
pub fn read_wavelet_coeffs(dir: impl AsRef<Path>, bank: &FilterBank) -> Result<WaveletCoefficients> {
    let mut out = WaveletCoefficients {
        bandlimit: 0,
        j0: bank.j0(),
        j_max: bank.j_max(),
        scaling: vec![],
        wavelets: vec![vec![]; (bank.j_max() - bank.j0() + 1) as usize],
        discarded: 0,
    };
    for id in bank.ids() {
        let path = dir.as_ref().join(wavelet_file_name(id));
        let (params, j_max, bandlimit, file_id, values) = parse_wavelet_scale(&read_text(&path)?, &path)?;
        if params != bank.params() || j_max != bank.j_max() || file_id != id {
            return Err(Error::Mismatch(format!(
                "{} was written for a different filter bank",
                path.display()
            )));
        }
        out.bandlimit = bandlimit;
        *out.get_mut(id) = values;
    }
    Ok(out)
}

/// A harmonic coefficient file loaded for processing.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffDataset {
    pub name: String,
    pub coeffs: HarmonicCoeffs,
    /// Gaussian FWHM in radians, when smoothing was applied.
    pub smoothing_fwhm: Option<f64>,
}

/// Multiplies `f_lm` by `exp(-l(l+1) s² / 2)` with `s = FWHM / sqrt(8 ln 2)`.
pub fn gaussian_smooth(coeffs: &mut HarmonicCoeffs, fwhm: f64) {
    let s = fwhm / (8.0 * std::f64::consts::LN_2).sqrt();
    for (i, c) in coeffs.as_mut_slice().iter_mut().enumerate() {
        let l = degree_order(i).0 as f64;
        *c *= (-l * (l + 1.0) * s * s / 2.0).exp();
    }
}

/// Reads a coefficient file and optionally smooths it.
pub fn ingest_coeffs(path: impl AsRef<Path>, smoothing_fwhm: Option<f64>) -> Result<CoeffDataset> {
    let path = path.as_ref();
    let mut coeffs = read_coeffs(path)?;
    if let Some(fwhm) = smoothing_fwhm {
        if !(fwhm > 0.0 && fwhm.is_finite()) {
            return Err(Error::Domain(format!("smoothing FWHM must be positive, got {fwhm}")));
        }
        gaussian_smooth(&mut coeffs, fwhm);
    }
    Ok(CoeffDataset {
        name: path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        coeffs,
        smoothing_fwhm,
    })
}

/// Grid used by the plotting dumps of a basis.
pub fn plot_grid(bandlimit: usize) -> Result<GridSpec> {
    make_grid(bandlimit)
}
