//! Narrow-band clustered (Saleh-Valenzuela) channel realizations.
//!
//! The downlink channel seen by the user is
//!
//! ```text
//! H_dl = sqrt(Nt·Nr / L) · Σ_l α_l · a_r(φ_l^r, θ_l^r) · a_t(φ_l^t, θ_l^t)^*
//! ```
//!
//! with unit-norm array responses. Ray angles are a single cluster: one mean per
//! angle dimension, shared by all rays, plus a Laplacian deviation per ray.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{cis, complete_orthonormal, is_finite, svd, CMatrix, CVector, Svd, C64, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrayKind {
    UniformLinear,
    UniformPlanar,
}

/// Antenna array layout. Spacing is in carrier wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayGeometry {
    pub kind: ArrayKind,
    pub elements_x: usize,
    #[serde(default = "one")]
    pub elements_y: usize,
    #[serde(default = "half_wavelength")]
    pub spacing: f64,
}

fn one() -> usize {
    1
}

fn half_wavelength() -> f64 {
    DEFAULT_SPACING
}

pub const DEFAULT_SPACING: f64 = 0.5;

impl ArrayGeometry {
    pub fn ula(elements: usize) -> Self {
        Self {
            kind: ArrayKind::UniformLinear,
            elements_x: elements,
            elements_y: 1,
            spacing: DEFAULT_SPACING,
        }
    }

    pub fn upa(elements_x: usize, elements_y: usize) -> Self {
        Self {
            kind: ArrayKind::UniformPlanar,
            elements_x,
            elements_y,
            spacing: DEFAULT_SPACING,
        }
    }

    /// The most nearly square planar array with exactly `elements` antennas.
    pub fn square_upa(elements: usize) -> Self {
        let mut x = (elements as f64).sqrt().floor() as usize;
        while x > 1 && !elements.is_multiple_of(x) {
            x -= 1;
        }
        let x = x.max(1);
        Self::upa(x, elements / x)
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn antenna_count(&self) -> usize {
        self.elements_x * self.elements_y
    }

    pub fn validate(&self) -> Result<()> {
        if self.elements_x == 0 || self.elements_y == 0 {
            return invalid("array must have at least one element per dimension");
        }
        if self.kind == ArrayKind::UniformLinear && self.elements_y != 1 {
            return invalid("a uniform linear array has elements_y = 1");
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return invalid(format!("element spacing must be positive, got {}", self.spacing));
        }
        Ok(())
    }
}

/// One propagation path: complex gain plus departure/arrival angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub gain: C64,
    pub aod_azimuth: f64,
    pub aod_elevation: f64,
    pub aoa_azimuth: f64,
    pub aoa_elevation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub paths: Vec<Ray>,
}

impl PathSet {
    pub fn new(paths: Vec<Ray>) -> Result<Self> {
        if paths.is_empty() {
            return invalid("a path set needs at least one ray");
        }
        for r in &paths {
            let angles = [r.aod_azimuth, r.aod_elevation, r.aoa_azimuth, r.aoa_elevation];
            if angles.iter().any(|a| !a.is_finite()) || !r.gain.re.is_finite() || !r.gain.im.is_finite() {
                return invalid("ray parameters must be finite");
            }
            for az in [r.aod_azimuth, r.aoa_azimuth] {
                if !(-PI..PI).contains(&az) {
                    return invalid(format!("azimuth {az} outside [-pi, pi)"));
                }
            }
            for el in [r.aod_elevation, r.aoa_elevation] {
                if !(-FRAC_PI_2..=FRAC_PI_2).contains(&el) {
                    return invalid(format!("elevation {el} outside [-pi/2, pi/2]"));
                }
            }
        }
        Ok(Self { paths })
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Downlink channel `H_dl` (Nr×Nt) together with the rays that produced it.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h_downlink: CMatrix,
    pub source_paths: PathSet,
}

impl ChannelRealization {
    pub fn nr(&self) -> usize {
        self.h_downlink.nrows()
    }

    pub fn nt(&self) -> usize {
        self.h_downlink.ncols()
    }
}

/// SVD of the downlink channel, `H_dl = U · diag(σ) · V^*`, partitioned at `ns`.
///
/// `v` is the full Nt×Nt unitary; its leading `ns` columns are the optimal
/// unconstrained precoder.
#[derive(Debug, Clone)]
pub struct ChannelSvd {
    pub u: CMatrix,
    pub v: CMatrix,
    pub sigma: Vec<f64>,
    pub v1: CMatrix,
    pub sigma1: Vec<f64>,
}

impl ChannelSvd {
    pub fn ns(&self) -> usize {
        self.sigma1.len()
    }

    pub fn nt(&self) -> usize {
        self.v.nrows()
    }

    /// Trailing Nt−Ns columns of `v`.
    pub fn v2(&self) -> CMatrix {
        let ns = self.ns();
        self.v.columns(ns, self.nt() - ns).into_owned()
    }
}

/// Unit-norm array response toward (azimuth, elevation).
///
/// Linear: `a_n = e^{j2π·d·n·sin(az)}/√N`. Planar (element (m, n), m along x):
/// `a_{m,n} = e^{j2π·d·(m·sin(az)·sin(el) + n·cos(el))}/√(MN)`, stored with m
/// varying fastest.
pub fn steering_vector(geometry: &ArrayGeometry, azimuth: f64, elevation: f64) -> Result<CVector> {
    geometry.validate()?;
    if !azimuth.is_finite() || !elevation.is_finite() {
        return invalid("steering angles must be finite");
    }
    Ok(steering_unchecked(geometry, azimuth, elevation))
}

pub(crate) fn steering_unchecked(geometry: &ArrayGeometry, azimuth: f64, elevation: f64) -> CVector {
    let n = geometry.antenna_count();
    let scale = 1.0 / (n as f64).sqrt();
    let k = TAU * geometry.spacing;
    match geometry.kind {
        ArrayKind::UniformLinear => {
            let step = k * azimuth.sin();
            CVector::from_fn(n, |i, _| cis(step * i as f64) * scale)
        }
        ArrayKind::UniformPlanar => {
            let mx = geometry.elements_x;
            let step_x = k * azimuth.sin() * elevation.sin();
            let step_y = k * elevation.cos();
            CVector::from_fn(n, |i, _| {
                let (m, row) = (i % mx, i / mx);
                cis(step_x * m as f64 + step_y * row as f64) * scale
            })
        }
    }
}

/// Wraps an angle into [-π, π).
pub fn wrap_azimuth(angle: f64) -> f64 {
    let w = angle - TAU * ((angle + PI) / TAU).floor();
    // floor can round up to exactly π for inputs just below an odd multiple of π
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// Folds an angle into [-π/2, π/2] by mirroring at the poles.
pub fn reflect_elevation(angle: f64) -> f64 {
    let mut el = wrap_azimuth(angle);
    if el > FRAC_PI_2 {
        el = PI - el;
    } else if el < -FRAC_PI_2 {
        el = -PI - el;
    }
    el
}

fn laplacian<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    if scale == 0.0 {
        // keep the stream position independent of the spread
        let _: f64 = rng.random();
        return 0.0;
    }
    let u: f64 = rng.random::<f64>() - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) / SQRT_2
}

/// Draws a single-cluster ray set.
///
/// Gains are standard circularly-symmetric complex normal. Each angle type has
/// one cluster mean (azimuth uniform on [-π, π), elevation uniform on
/// [-π/2, π/2]) plus a per-ray Laplacian deviation whose standard deviation is
/// `angular_spread` (scale `spread/√2`).
pub fn sample_paths<R: Rng + ?Sized>(l_count: usize, angular_spread: f64, rng: &mut R) -> Result<PathSet> {
    if l_count == 0 {
        return invalid("at least one path is required");
    }
    if !(angular_spread.is_finite() && angular_spread >= 0.0) {
        return invalid(format!("angular spread must be >= 0, got {angular_spread}"));
    }
    let b = angular_spread / SQRT_2;
    let mean_aod_az = rng.random_range(-PI..PI);
    let mean_aod_el = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
    let mean_aoa_az = rng.random_range(-PI..PI);
    let mean_aoa_el = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);

    let paths = (0..l_count)
        .map(|_| {
            let gain = complex_normal(rng);
            Ray {
                gain,
                aod_azimuth: wrap_azimuth(mean_aod_az + laplacian(rng, b)),
                aod_elevation: reflect_elevation(mean_aod_el + laplacian(rng, b)),
                aoa_azimuth: wrap_azimuth(mean_aoa_az + laplacian(rng, b)),
                aoa_elevation: reflect_elevation(mean_aoa_el + laplacian(rng, b)),
            }
        })
        .collect();
    PathSet::new(paths)
}

/// Sums the rank-one ray contributions into the downlink channel matrix.
pub fn assemble_channel(paths: PathSet, tx: &ArrayGeometry, rx: &ArrayGeometry) -> Result<ChannelRealization> {
    tx.validate()?;
    rx.validate()?;
    let nt = tx.antenna_count();
    let nr = rx.antenna_count();
    let scale = ((nt * nr) as f64 / paths.len() as f64).sqrt();
    let mut h = CMatrix::zeros(nr, nt);
    for ray in &paths.paths {
        let a_r = steering_unchecked(rx, ray.aoa_azimuth, ray.aoa_elevation);
        let a_t = steering_unchecked(tx, ray.aod_azimuth, ray.aod_elevation);
        h.ger(ray.gain * scale, &a_r, &a_t.conjugate(), ONE);
    }
    if !is_finite(&h) {
        return invalid("channel has non-finite entries");
    }
    Ok(ChannelRealization { h_downlink: h, source_paths: paths })
}

/// Computes the channel SVD and keeps the `ns` dominant right-singular directions.
pub fn svd_partition(channel: &ChannelRealization, ns: usize) -> Result<ChannelSvd> {
    let h = &channel.h_downlink;
    let (nr, nt) = h.shape();
    let rank_cap = nr.min(nt);
    if ns == 0 || ns > rank_cap {
        return invalid(format!("stream count {ns} outside 1..={rank_cap}"));
    }
    if !is_finite(h) {
        return invalid("channel has non-finite entries");
    }
    let Svd { u, s: sigma, v: v_thin } = svd(h);
    let v = complete_orthonormal(&v_thin, nt);
    Ok(ChannelSvd {
        v1: v.columns(0, ns).into_owned(),
        sigma1: sigma[..ns].to_vec(),
        u,
        v,
        sigma,
    })
}
