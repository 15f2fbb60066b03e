//! Regions of the sphere: analytic polar caps and grid masks.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io;
use crate::quadrature::gauss_legendre_on;
use crate::sphere::{inverse_sht, GridSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum RegionKind {
    /// Spherical cap of angular radius `opening` centred on `(center_theta, center_phi)`.
    PolarCap {
        opening: f64,
        center_theta: f64,
        center_phi: f64,
    },
    /// Indicator over the nodes of a grid.
    GridMask { grid: GridSpec, mask: Vec<bool> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    kind: RegionKind,
    area: f64,
}

/// Quadrature nodes and weights covering a region.
#[derive(Debug, Clone)]
pub struct RegionQuadrature {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub weight: Vec<f64>,
}

impl RegionQuadrature {
    pub fn len(&self) -> usize {
        self.weight.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }
}

fn cap_cosine_distance(theta: f64, phi: f64, center_theta: f64, center_phi: f64) -> f64 {
    theta.cos() * center_theta.cos() + theta.sin() * center_theta.sin() * (phi - center_phi).cos()
}

impl Region {
    pub fn polar_cap(opening: f64, center_theta: f64, center_phi: f64) -> Result<Self> {
        if !(opening > 0.0 && opening < PI) {
            return Err(Error::Domain(format!("cap opening {opening} rad outside (0, π)")));
        }
        if !(0.0..=PI).contains(&center_theta) {
            return Err(Error::Domain(format!("cap centre colatitude {center_theta} outside [0, π]")));
        }
        Ok(Self {
            kind: RegionKind::PolarCap {
                opening,
                center_theta,
                center_phi: center_phi.rem_euclid(2.0 * PI),
            },
            area: 2.0 * PI * (1.0 - opening.cos()),
        })
    }

    pub fn from_mask(grid: &GridSpec, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::Mismatch(format!(
                "mask has {} entries, grid has {}",
                mask.len(),
                grid.len()
            )));
        }
        let area: f64 = grid
            .nodes()
            .zip(&mask)
            .filter(|(_, &inside)| inside)
            .map(|((_, _, w), _)| w)
            .sum();
        if area <= 0.0 {
            return Err(Error::Domain("region mask is empty".into()));
        }
        Ok(Self {
            kind: RegionKind::GridMask {
                grid: grid.clone(),
                mask,
            },
            area,
        })
    }

    pub fn full_sphere(grid: &GridSpec) -> Self {
        Self::from_mask(grid, vec![true; grid.len()]).expect("non-empty grid")
    }

    /// Cap rasterised on `grid`, keeping only nodes where `field` is positive.
    pub fn thresholded_cap(
        grid: &GridSpec,
        opening: f64,
        center_theta: f64,
        center_phi: f64,
        field: &[f64],
    ) -> Result<Self> {
        if field.len() != grid.len() {
            return Err(Error::Mismatch("threshold field does not match grid".into()));
        }
        let cap = Self::polar_cap(opening, center_theta, center_phi)?;
        let mask = grid
            .nodes()
            .zip(field)
            .map(|((t, p, _), &v)| cap.contains(t, p) && v > 0.0)
            .collect();
        Self::from_mask(grid, mask)
    }

    pub fn kind(&self) -> &RegionKind {
        &self.kind
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Whether the point is inside the region. Mask regions answer by
    /// nearest grid node.
    pub fn contains(&self, theta: f64, phi: f64) -> bool {
        match &self.kind {
            RegionKind::PolarCap {
                opening,
                center_theta,
                center_phi,
            } => cap_cosine_distance(theta, phi, *center_theta, *center_phi) >= opening.cos() - 1e-15,
            RegionKind::GridMask { grid, mask } => {
                let i = nearest(grid.theta_nodes(), theta);
                let k = nearest(grid.phi_nodes(), phi.rem_euclid(2.0 * PI));
                mask[i * grid.n_phi() + k]
            }
        }
    }

    /// True for a cap centred on the north pole, whose concentration matrix
    /// is block diagonal in the order `m`.
    pub fn is_north_polar_cap(&self) -> bool {
        matches!(self.kind, RegionKind::PolarCap { center_theta, .. } if center_theta == 0.0)
    }

    /// Nodes and weights integrating bandlimit-`L` products over the region.
    ///
    /// Caps use a Gauss–Legendre rule in the cap's own frame, exact for
    /// every product of two bandlimit-`L` functions. Masks use their grid
    /// nodes.
    pub fn quadrature(&self, bandlimit: usize) -> RegionQuadrature {
        match &self.kind {
            RegionKind::PolarCap {
                opening,
                center_theta,
                center_phi,
            } => {
                let (x, w) = gauss_legendre_on(bandlimit.max(1), opening.cos(), 1.0);
                let n_phi = 2 * bandlimit.max(1) - 1;
                let dphi = 2.0 * PI / n_phi as f64;
                let (sb, cb) = center_theta.sin_cos();
                let mut q = RegionQuadrature {
                    theta: Vec::with_capacity(x.len() * n_phi),
                    phi: Vec::with_capacity(x.len() * n_phi),
                    weight: Vec::with_capacity(x.len() * n_phi),
                };
                for (&ct, &wt) in x.iter().zip(&w) {
                    let st = (1.0 - ct * ct).max(0.0).sqrt();
                    for k in 0..n_phi {
                        let lp = k as f64 * dphi;
                        let (vx, vy, vz) = (st * lp.cos(), st * lp.sin(), ct);
                        // rotate the north pole onto the cap centre
                        let (rx, ry, rz) = (vx * cb + vz * sb, vy, -vx * sb + vz * cb);
                        let theta = rz.clamp(-1.0, 1.0).acos();
                        let phi = (ry.atan2(rx) + center_phi).rem_euclid(2.0 * PI);
                        q.theta.push(theta);
                        q.phi.push(phi);
                        q.weight.push(wt * dphi);
                    }
                }
                q
            }
            RegionKind::GridMask { grid, mask } => {
                let mut q = RegionQuadrature {
                    theta: vec![],
                    phi: vec![],
                    weight: vec![],
                };
                for ((t, p, w), &inside) in grid.nodes().zip(mask) {
                    if inside {
                        q.theta.push(t);
                        q.phi.push(p);
                        q.weight.push(w);
                    }
                }
                q
            }
        }
    }

    /// Short stable digest identifying the region, used for cache keys.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        match &self.kind {
            RegionKind::PolarCap {
                opening,
                center_theta,
                center_phi,
            } => {
                h.update(b"polar_cap");
                for v in [opening, center_theta, center_phi] {
                    h.update(v.to_bits().to_le_bytes());
                }
            }
            RegionKind::GridMask { grid, mask } => {
                h.update(b"grid_mask");
                for n in [grid.bandlimit(), grid.n_theta(), grid.n_phi()] {
                    h.update((n as u64).to_le_bytes());
                }
                let bits: Vec<u8> = mask
                    .chunks(8)
                    .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << i)))
                    .collect();
                h.update(&bits);
            }
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn nearest(nodes: &[f64], x: f64) -> usize {
    nodes
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Shape requested in a region configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionShape {
    PolarCap,
    FullSphere,
}

impl fmt::Display for RegionShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionShape::PolarCap => "polar_cap",
            RegionShape::FullSphere => "full_sphere",
        })
    }
}

/// Region description in its `key=value` text form.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionConfig {
    pub kind: RegionShape,
    pub opening_deg: f64,
    pub center_theta_deg: f64,
    pub center_phi_deg: f64,
    /// Coefficient file whose positive part restricts the cap.
    pub threshold_field: Option<PathBuf>,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            kind: RegionShape::PolarCap,
            opening_deg: 40.0,
            center_theta_deg: 0.0,
            center_phi_deg: 0.0,
            threshold_field: None,
        }
    }
}

impl RegionConfig {
    /// Applies one `key=value` pair. Returns `Ok(false)` for keys that do
    /// not belong to a region.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<bool> {
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("{key}: expected a number, got {v:?}")))
        };
        match key {
            "kind" => {
                self.kind = match value {
                    "polar_cap" => RegionShape::PolarCap,
                    "full_sphere" => RegionShape::FullSphere,
                    other => return Err(Error::Config(format!("unknown region kind {other:?}"))),
                }
            }
            "opening_deg" => self.opening_deg = num(value)?,
            "center_theta_deg" => self.center_theta_deg = num(value)?,
            "center_phi_deg" => self.center_phi_deg = num(value)?,
            "threshold_field" => {
                self.threshold_field = if value.is_empty() { None } else { Some(value.into()) }
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
            if !cfg.apply(k.trim(), v.trim())? {
                return Err(Error::Config(format!("line {}: unknown key {:?}", lineno + 1, k.trim())));
            }
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "kind={}\nopening_deg={}\ncenter_theta_deg={}\ncenter_phi_deg={}\n",
            self.kind, self.opening_deg, self.center_theta_deg, self.center_phi_deg
        );
        if let Some(p) = &self.threshold_field {
            s.push_str(&format!("threshold_field={}\n", p.display()));
        }
        s
    }
}

/// Builds a region from its configuration. A threshold field, when given,
/// is read from disk and the cap is rasterised onto `grid`.
pub fn build_region(config: &RegionConfig, grid: &GridSpec) -> Result<Region> {
    match config.kind {
        RegionShape::FullSphere => Ok(Region::full_sphere(grid)),
        RegionShape::PolarCap => {
            let opening = config.opening_deg.to_radians();
            let ct = config.center_theta_deg.to_radians();
            let cp = config.center_phi_deg.to_radians();
            match &config.threshold_field {
                None => Region::polar_cap(opening, ct, cp),
                Some(path) => {
                    let coeffs = io::read_coeffs(path)?;
                    let coeffs = coeffs.with_bandlimit(coeffs.bandlimit().min(grid.bandlimit()));
                    let field = inverse_sht(&coeffs, grid)?;
                    let values: Vec<f64> = field.values.iter().map(|v| v.re).collect();
                    Region::thresholded_cap(grid, opening, ct, cp, &values)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::make_grid;

    #[test]
    fn cap_area_closed_form() {
        let r = Region::polar_cap(40f64.to_radians(), 0.0, 0.0).unwrap();
        let expect = 2.0 * PI * (1.0 - 40f64.to_radians().cos());
        assert!((r.area() - expect).abs() < 1e-12);
        assert!((r.area() - 1.469_98).abs() < 1e-5);
    }

    #[test]
    fn cap_quadrature_integrates_area() {
        for &(ct, cp) in &[(0.0, 0.0), (1.2, 4.0), (PI, 0.0)] {
            let r = Region::polar_cap(0.6, ct, cp).unwrap();
            let q = r.quadrature(10);
            let a: f64 = q.weight.iter().sum();
            assert!((a - r.area()).abs() < 1e-12);
            for (t, p) in q.theta.iter().zip(&q.phi) {
                assert!(r.contains(*t, *p));
            }
        }
    }

    #[test]
    fn cap_quadrature_cross_checked_by_fine_mask() {
        // rasterised indicator converges to the closed form
        let g = make_grid(200).unwrap();
        let cap = Region::polar_cap(40f64.to_radians(), 0.0, 0.0).unwrap();
        let mask = g.nodes().map(|(t, p, _)| cap.contains(t, p)).collect();
        let masked = Region::from_mask(&g, mask).unwrap();
        assert!((masked.area() - cap.area()).abs() / cap.area() < 2e-2);
    }

    #[test]
    fn full_sphere_area() {
        let g = make_grid(8).unwrap();
        assert!((Region::full_sphere(&g).area() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn invalid_regions() {
        assert!(Region::polar_cap(0.0, 0.0, 0.0).is_err());
        assert!(Region::polar_cap(PI, 0.0, 0.0).is_err());
        let g = make_grid(4).unwrap();
        assert!(matches!(Region::from_mask(&g, vec![false; g.len()]), Err(Error::Domain(_))));
        assert!(Region::from_mask(&g, vec![true; 3]).is_err());
    }

    #[test]
    fn threshold_keeps_positive_inside_cap() {
        let g = make_grid(16).unwrap();
        let field: Vec<f64> = g.nodes().map(|(_, p, _)| p.cos()).collect();
        let r = Region::thresholded_cap(&g, 0.8, 0.0, 0.0, &field).unwrap();
        let RegionKind::GridMask { mask, .. } = r.kind() else { panic!() };
        for ((t, p, _), &m) in g.nodes().zip(mask) {
            assert_eq!(m, t <= 0.8 && p.cos() > 0.0);
        }
    }

    #[test]
    fn digest_tracks_mask_bits() {
        let g = make_grid(6).unwrap();
        let mut mask = vec![true; g.len()];
        let a = Region::from_mask(&g, mask.clone()).unwrap().digest();
        mask[5] = false;
        let b = Region::from_mask(&g, mask).unwrap().digest();
        assert_ne!(a, b);
        let c1 = Region::polar_cap(0.5, 0.0, 0.0).unwrap().digest();
        let c2 = Region::polar_cap(0.5, 0.0, 0.0).unwrap().digest();
        assert_eq!(c1, c2);
    }

    #[test]
    fn config_round_trip() {
        let cfg = RegionConfig {
            kind: RegionShape::PolarCap,
            opening_deg: 41.5,
            center_theta_deg: 90.0,
            center_phi_deg: 20.25,
            threshold_field: Some("earth.txt".into()),
        };
        assert_eq!(RegionConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert!(RegionConfig::parse("kind=square").is_err());
        assert!(RegionConfig::parse("opening_deg=abc").is_err());
    }
}
