//! Microwave RF precoding networks (RFPNs).
//!
//! A fully-connected network is the product `F_C · F_PS · F_D` of a balanced
//! power divider, a bank of `Nt·Ntrx` phase shifters and a balanced combiner:
//!
//! ```text
//! F_D  = sqrt(1/(L_s·Nt))    · (I_Ntrx ⊗ 1_Nt)      (Nt·Ntrx × Ntrx)
//! F_PS = sqrt(1/L_ps)        · diag(e^{jφ_k})        (Nt·Ntrx × Nt·Ntrx)
//! F_C  = sqrt(1/(L_c·Ntrx))  · (1_Ntrx^T ⊗ I_Nt)    (Nt × Nt·Ntrx)
//! ```
//!
//! A sub-array network drops the combiner and feeds each chain to a disjoint
//! block of `Nt/Ntrx` antennas. The DFT network is the Butler-matrix
//! idealization: `Ntrx` orthonormal DFT columns.

mod operator;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{cis, conditioning_ratio, is_finite, orthonormal_columns, CMatrix, CVector, C64, ZERO};

pub use operator::{build_quantization_operator, QuantizationSystem, SparseVector, DEFAULT_SPARSE_BUDGET, DENSE_LIMIT};

/// Smallest/largest singular value ratio below which a network is singular.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Insertion losses as linear power ratios (1 = lossless).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkLosses {
    pub l_s: f64,
    pub l_ps: f64,
    pub l_c: f64,
}

impl Default for NetworkLosses {
    fn default() -> Self {
        Self::lossless()
    }
}

impl NetworkLosses {
    pub fn lossless() -> Self {
        Self { l_s: 1.0, l_ps: 1.0, l_c: 1.0 }
    }

    pub fn from_db(divider_db: f64, shifter_db: f64, combiner_db: f64) -> Result<Self> {
        let to_lin = |db: f64| 10f64.powf(db / 10.0);
        let l = Self { l_s: to_lin(divider_db), l_ps: to_lin(shifter_db), l_c: to_lin(combiner_db) };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("L_s", self.l_s), ("L_ps", self.l_ps), ("L_c", self.l_c)] {
            if !(v.is_finite() && v >= 1.0) {
                return invalid(format!("{name} must be a finite power ratio >= 1, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RfpnVariant {
    FullyConnected,
    SubArray,
    DftColumns(Vec<usize>),
}

impl RfpnVariant {
    /// Number of phase shifters the variant carries.
    pub fn phase_count(&self, nt: usize, ntrx: usize) -> usize {
        match self {
            RfpnVariant::FullyConnected => nt * ntrx,
            RfpnVariant::SubArray => nt,
            RfpnVariant::DftColumns(_) => ntrx,
        }
    }

    pub fn validate(&self, nt: usize, ntrx: usize) -> Result<()> {
        if ntrx == 0 || nt < ntrx {
            return invalid(format!("need nt >= ntrx >= 1, got nt={nt}, ntrx={ntrx}"));
        }
        match self {
            RfpnVariant::FullyConnected => Ok(()),
            RfpnVariant::SubArray if !nt.is_multiple_of(ntrx) => {
                invalid(format!("sub-array network needs ntrx | nt, got nt={nt}, ntrx={ntrx}"))
            }
            RfpnVariant::SubArray => Ok(()),
            RfpnVariant::DftColumns(cols) => {
                if cols.len() != ntrx {
                    return invalid(format!("expected {ntrx} DFT columns, got {}", cols.len()));
                }
                let mut seen = vec![false; nt];
                for &c in cols {
                    if c >= nt {
                        return invalid(format!("DFT column {c} out of range 0..{nt}"));
                    }
                    if std::mem::replace(&mut seen[c], true) {
                        return invalid(format!("duplicate DFT column {c}"));
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseResolution {
    Unlimited,
    Bits(u32),
}

impl PhaseResolution {
    pub fn from_bits(bits: Option<u32>) -> Self {
        bits.map_or(PhaseResolution::Unlimited, PhaseResolution::Bits)
    }

    /// Rounds to the nearest multiple of `2π/2^b`, reported in [0, 2π).
    pub fn snap(self, phase: f64) -> f64 {
        match self {
            PhaseResolution::Unlimited => phase,
            PhaseResolution::Bits(b) => {
                let levels = 2f64.powi(b as i32);
                let step = TAU / levels;
                let q = (phase / step).round().rem_euclid(levels);
                q * step
            }
        }
    }
}

/// Phase-shifter settings; with finite resolution every phase sits on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    phases: Vec<f64>,
    resolution: PhaseResolution,
}

impl PhaseConfig {
    pub fn new(phases: Vec<f64>, resolution: PhaseResolution) -> Result<Self> {
        if phases.iter().any(|p| !p.is_finite()) {
            return invalid("phases must be finite");
        }
        if let PhaseResolution::Bits(b) = resolution {
            if b == 0 || b > 52 {
                return invalid(format!("phase resolution must be 1..=52 bits, got {b}"));
            }
        }
        let phases = phases.into_iter().map(|p| resolution.snap(p)).collect();
        Ok(Self { phases, resolution })
    }

    pub fn zeros(len: usize) -> Self {
        Self { phases: vec![0.0; len], resolution: PhaseResolution::Unlimited }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn resolution(&self) -> PhaseResolution {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// A diagonal matrix stored by its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonal(pub CVector);

impl Diagonal {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_dense(&self) -> CMatrix {
        CMatrix::from_diagonal(&self.0)
    }

    /// `diag · m`
    pub fn left_mul(&self, m: &CMatrix) -> CMatrix {
        let mut out = m.clone();
        for (mut row, d) in out.row_iter_mut().zip(self.0.iter()) {
            row *= *d;
        }
        out
    }
}

/// The constituent matrices of a network and their product `f_net`.
#[derive(Debug, Clone)]
pub struct RfpnMatrices {
    pub variant: RfpnVariant,
    pub f_d: CMatrix,
    pub f_ps: Diagonal,
    pub f_c: CMatrix,
    pub f_net: CMatrix,
}

impl RfpnMatrices {
    pub fn nt(&self) -> usize {
        self.f_net.nrows()
    }

    pub fn ntrx(&self) -> usize {
        self.f_net.ncols()
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Balanced power divider for the given variant.
pub fn build_divider(variant: &RfpnVariant, nt: usize, ntrx: usize, losses: &NetworkLosses) -> Result<CMatrix> {
    variant.validate(nt, ntrx)?;
    losses.validate()?;
    match variant {
        RfpnVariant::FullyConnected => {
            let w = real((1.0 / (losses.l_s * nt as f64)).sqrt());
            Ok(CMatrix::from_fn(nt * ntrx, ntrx, |r, c| if r / nt == c { w } else { ZERO }))
        }
        RfpnVariant::SubArray => {
            let block = nt / ntrx;
            let w = real((1.0 / (losses.l_s * block as f64)).sqrt());
            Ok(CMatrix::from_fn(nt, ntrx, |r, c| if r / block == c { w } else { ZERO }))
        }
        RfpnVariant::DftColumns(_) => Ok(CMatrix::identity(ntrx, ntrx)),
    }
}

/// Diagonal `sqrt(1/L_ps)·e^{jφ_k}`; phases are already on the configured grid.
pub fn build_phase_shifters(config: &PhaseConfig, losses: &NetworkLosses) -> Result<Diagonal> {
    losses.validate()?;
    let amp = (1.0 / losses.l_ps).sqrt();
    let res = config.resolution();
    Ok(Diagonal(CVector::from_iterator(
        config.len(),
        config.phases().iter().map(|&p| cis(res.snap(p)) * amp),
    )))
}

/// Balanced combiner `sqrt(1/(L_c·Ntrx))·(1_Ntrx^T ⊗ I_Nt)`.
pub fn build_combiner(nt: usize, ntrx: usize, losses: &NetworkLosses) -> Result<CMatrix> {
    if nt == 0 || ntrx == 0 {
        return invalid("combiner dimensions must be positive");
    }
    losses.validate()?;
    let w = real((1.0 / (losses.l_c * ntrx as f64)).sqrt());
    Ok(CMatrix::from_fn(nt, nt * ntrx, |r, c| if c % nt == r { w } else { ZERO }))
}

/// Builds every stage of the network and multiplies them out.
pub fn assemble_network(
    variant: &RfpnVariant,
    phases: &PhaseConfig,
    nt: usize,
    ntrx: usize,
    losses: &NetworkLosses,
) -> Result<RfpnMatrices> {
    variant.validate(nt, ntrx)?;
    if let RfpnVariant::DftColumns(cols) = variant {
        return dft_network(nt, ntrx, cols);
    }
    let expected = variant.phase_count(nt, ntrx);
    if phases.len() != expected {
        return invalid(format!("expected {expected} phases, got {}", phases.len()));
    }
    let f_d = build_divider(variant, nt, ntrx, losses)?;
    let f_ps = build_phase_shifters(phases, losses)?;
    let f_c = match variant {
        RfpnVariant::FullyConnected => build_combiner(nt, ntrx, losses)?,
        _ => CMatrix::identity(nt, nt),
    };
    let f_net = &f_c * f_ps.left_mul(&f_d);
    Ok(RfpnMatrices { variant: variant.clone(), f_d, f_ps, f_c, f_net })
}

/// Chooses phases so the network best matches `f_target` in Frobenius norm.
///
/// With fixed balanced amplitudes the optimum aligns each phase with the
/// argument of the target entry it drives. Fully-connected shifter `k·Nt + i`
/// drives antenna `i` from chain `k`; sub-array shifter `i` drives antenna `i`
/// from the chain owning its block. Zero-modulus entries get phase 0.
pub fn fit_phases_to_target(
    f_target: &CMatrix,
    variant: &RfpnVariant,
    resolution: PhaseResolution,
) -> Result<PhaseConfig> {
    if !is_finite(f_target) {
        return invalid("target has non-finite entries");
    }
    let (nt, ntrx) = f_target.shape();
    variant.validate(nt, ntrx)?;
    let arg = |z: C64| if z.norm() == 0.0 { 0.0 } else { z.arg() };
    let phases = match variant {
        RfpnVariant::FullyConnected => (0..ntrx)
            .flat_map(|k| (0..nt).map(move |i| (i, k)))
            .map(|(i, k)| arg(f_target[(i, k)]))
            .collect(),
        RfpnVariant::SubArray => {
            let block = nt / ntrx;
            (0..nt).map(|i| arg(f_target[(i, i / block)])).collect()
        }
        RfpnVariant::DftColumns(_) => return invalid("DFT networks have no tunable phases"),
    };
    PhaseConfig::new(phases, resolution)
}

/// Frobenius distance between an ideal analog precoder and a realized network.
pub fn quantization_error(f_target: &CMatrix, matrices: &RfpnMatrices) -> Result<f64> {
    if f_target.shape() != matrices.f_net.shape() {
        return invalid(format!(
            "shape mismatch: target {:?} vs network {:?}",
            f_target.shape(),
            matrices.f_net.shape()
        ));
    }
    Ok((f_target - &matrices.f_net).norm())
}

/// Butler-matrix idealization: selected columns of the unitary `Nt`-point DFT.
pub fn dft_network(nt: usize, ntrx: usize, column_indices: &[usize]) -> Result<RfpnMatrices> {
    let variant = RfpnVariant::DftColumns(column_indices.to_vec());
    variant.validate(nt, ntrx)?;
    let scale = 1.0 / (nt as f64).sqrt();
    let f_net = CMatrix::from_fn(nt, ntrx, |n, m| {
        let c = column_indices[m];
        // reduce n·c mod nt before scaling so large products keep full precision
        cis(-TAU * ((n * c) % nt) as f64 / nt as f64) * scale
    });
    Ok(RfpnMatrices {
        variant,
        f_d: CMatrix::identity(ntrx, ntrx),
        f_ps: Diagonal(CVector::from_element(ntrx, real(1.0))),
        f_c: f_net.clone(),
        f_net,
    })
}

/// Orthogonal projector `F(F^*F)^{-1}F^*` onto the column space of `f_net`.
pub fn projection_matrix(f_net: &CMatrix) -> Result<CMatrix> {
    if !is_finite(f_net) {
        return invalid("network has non-finite entries");
    }
    if f_net.ncols() == 0 || f_net.ncols() > f_net.nrows() {
        return Err(Error::SingularNetwork { ratio: 0.0, threshold: RANK_THRESHOLD });
    }
    let ratio = conditioning_ratio(f_net);
    if ratio <= RANK_THRESHOLD {
        return Err(Error::SingularNetwork { ratio, threshold: RANK_THRESHOLD });
    }
    let q = orthonormal_columns(f_net);
    let p = &q * q.adjoint();
    // symmetrize away the round-off
    Ok((&p + p.adjoint()).scale(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_sq, ONE};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn mat(rows: usize, cols: usize, vals: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(rows, cols, &vals.iter().map(|&v| c(v)).collect::<Vec<_>>())
    }

    fn random_phases(n: usize, rng: &mut impl Rng) -> PhaseConfig {
        PhaseConfig::new((0..n).map(|_| rng.random_range(-3.2..3.2)).collect(), PhaseResolution::Unlimited).unwrap()
    }

    #[test]
    fn fully_connected_divider_matches_kronecker_form() {
        let d = build_divider(&RfpnVariant::FullyConnected, 2, 2, &NetworkLosses::lossless()).unwrap();
        let expected = mat(4, 2, &[1., 0., 1., 0., 0., 1., 0., 1.]) * c(1.0 / 2f64.sqrt());
        assert!((d - expected).norm() < 1e-15);
    }

    #[test]
    fn sub_array_divider_blocks() {
        let d = build_divider(&RfpnVariant::SubArray, 4, 2, &NetworkLosses::lossless()).unwrap();
        let expected = mat(4, 2, &[1., 0., 1., 0., 0., 1., 0., 1.]) * c(1.0 / 2f64.sqrt());
        assert!((d - expected).norm() < 1e-15);
        assert!(build_divider(&RfpnVariant::SubArray, 6, 4, &NetworkLosses::lossless()).is_err());
    }

    #[test]
    fn divider_loss_scales_by_root() {
        let lossless = build_divider(&RfpnVariant::FullyConnected, 2, 2, &NetworkLosses::lossless()).unwrap();
        let lossy = NetworkLosses { l_s: 2.0, ..NetworkLosses::lossless() };
        let d = build_divider(&RfpnVariant::FullyConnected, 2, 2, &lossy).unwrap();
        assert!((d - lossless * c(1.0 / 2f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn losses_below_unity_rejected() {
        assert!(NetworkLosses { l_s: 0.5, ..Default::default() }.validate().is_err());
        let l = NetworkLosses::from_db(3.0, 0.0, 10.0).unwrap();
        assert!((l.l_c - 10.0).abs() < 1e-12 && (l.l_s - 1.9952623149688795).abs() < 1e-12);
        assert!(NetworkLosses::from_db(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn zero_phases_give_identity_shifters() {
        let ps = build_phase_shifters(&PhaseConfig::zeros(5), &NetworkLosses::lossless()).unwrap();
        assert!((ps.to_dense() - CMatrix::identity(5, 5)).norm() < 1e-15);
    }

    #[test]
    fn two_bit_snapping() {
        let cfg = PhaseConfig::new(vec![0.3, 1.2, -0.9, 3.0], PhaseResolution::Bits(2)).unwrap();
        let q = std::f64::consts::FRAC_PI_2;
        assert_eq!(cfg.phases(), &[0.0, q, 3.0 * q, 2.0 * q]);
        let ps = build_phase_shifters(&cfg, &NetworkLosses::lossless()).unwrap();
        assert!((ps.0[0] - ONE).norm() < 1e-15);
        assert!(ps.0.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn bad_phase_configs() {
        assert!(PhaseConfig::new(vec![f64::NAN], PhaseResolution::Unlimited).is_err());
        assert!(PhaseConfig::new(vec![0.0], PhaseResolution::Bits(0)).is_err());
        let err = assemble_network(&RfpnVariant::FullyConnected, &PhaseConfig::zeros(3), 2, 2, &NetworkLosses::lossless());
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn combiner_examples() {
        let cmb = build_combiner(2, 2, &NetworkLosses::lossless()).unwrap();
        let expected = mat(2, 4, &[1., 0., 1., 0., 0., 1., 0., 1.]) * c(1.0 / 2f64.sqrt());
        assert!((&cmb - expected).norm() < 1e-15);
        let single = build_combiner(3, 1, &NetworkLosses::lossless()).unwrap();
        assert!((single - CMatrix::identity(3, 3)).norm() < 1e-15);
        let lossy = NetworkLosses { l_c: 2.5, ..Default::default() };
        let cmb = build_combiner(5, 3, &lossy).unwrap();
        for row in cmb.row_iter() {
            let power: f64 = row.iter().map(|z| z.norm_sqr()).sum();
            assert!((power - 1.0 / 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn fully_connected_zero_phase_product() {
        let net = assemble_network(&RfpnVariant::FullyConnected, &PhaseConfig::zeros(8), 4, 2, &NetworkLosses::lossless())
            .unwrap();
        assert_eq!(net.f_net.shape(), (4, 2));
        let w = 1.0 / 8f64.sqrt();
        assert!(net.f_net.iter().all(|z| (z - c(w)).norm() < 1e-15));
        assert_eq!(net.f_d.shape(), (8, 2));
        assert_eq!(net.f_ps.dim(), 8);
        assert_eq!(net.f_c.shape(), (4, 8));
    }

    #[test]
    fn sub_array_zero_phase_product() {
        let net = assemble_network(&RfpnVariant::SubArray, &PhaseConfig::zeros(4), 4, 2, &NetworkLosses::lossless()).unwrap();
        let expected = mat(4, 2, &[1., 0., 1., 0., 0., 1., 0., 1.]) * c(1.0 / 2f64.sqrt());
        assert!((&net.f_net - expected).norm() < 1e-15);
    }

    #[test]
    fn sub_array_has_one_nonzero_per_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (nt, ntrx) = (12, 3);
        let net =
            assemble_network(&RfpnVariant::SubArray, &random_phases(nt, &mut rng), nt, ntrx, &NetworkLosses::lossless()).unwrap();
        let modulus = 1.0 / ((nt / ntrx) as f64).sqrt();
        for row in net.f_net.row_iter() {
            let nz: Vec<_> = row.iter().filter(|z| z.norm() > 0.0).collect();
            assert_eq!(nz.len(), 1);
            assert!((nz[0].norm() - modulus).abs() < 1e-15);
        }
    }

    #[test]
    fn lossless_fully_connected_constant_modulus_and_column_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let nt = rng.random_range(1..=16);
            let ntrx = rng.random_range(1..=nt.min(4));
            let net = assemble_network(
                &RfpnVariant::FullyConnected,
                &random_phases(nt * ntrx, &mut rng),
                nt,
                ntrx,
                &NetworkLosses::lossless(),
            )
            .unwrap();
            let target = 1.0 / ((nt * ntrx) as f64).sqrt();
            let worst = net.f_net.iter().map(|z| (z.norm() - target).abs()).fold(0.0, f64::max);
            assert!(worst <= 1e-12);
            for col in net.f_net.column_iter() {
                assert!((col.norm_squared() - 1.0 / ntrx as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fitting_recovers_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (nt, ntrx) = (6, 3);
        let cfg = random_phases(nt * ntrx, &mut rng);
        let net = assemble_network(&RfpnVariant::FullyConnected, &cfg, nt, ntrx, &NetworkLosses::lossless()).unwrap();
        let fitted = fit_phases_to_target(&net.f_net, &RfpnVariant::FullyConnected, PhaseResolution::Unlimited).unwrap();
        for (a, b) in cfg.phases().iter().zip(fitted.phases()) {
            let d = (a - b).rem_euclid(TAU);
            assert!(d.min(TAU - d) < 1e-12);
        }
    }

    #[test]
    fn fitting_single_chain_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let nt = 7;
        let target = CMatrix::from_fn(nt, 1, |_, _| cis(rng.random_range(-3.0..3.0)) / (nt as f64).sqrt());
        let cfg = fit_phases_to_target(&target, &RfpnVariant::FullyConnected, PhaseResolution::Unlimited).unwrap();
        let net = assemble_network(&RfpnVariant::FullyConnected, &cfg, nt, 1, &NetworkLosses::lossless()).unwrap();
        assert!(quantization_error(&target, &net).unwrap() < 1e-14);
    }

    #[test]
    fn six_bit_fit_error_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let target = CMatrix::from_fn(8, 4, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let cfg = fit_phases_to_target(&target, &RfpnVariant::FullyConnected, PhaseResolution::Bits(6)).unwrap();
        let bound = std::f64::consts::PI / 64.0;
        for k in 0..4 {
            for i in 0..8 {
                let d = (target[(i, k)].arg() - cfg.phases()[k * 8 + i]).rem_euclid(TAU);
                assert!(d.min(TAU - d) <= bound + 1e-12);
            }
        }
        for p in cfg.phases() {
            let units = p * 64.0 / TAU;
            assert!((units - units.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_entries_fit_to_zero_phase() {
        let target = CMatrix::from_element(4, 2, ZERO);
        let cfg = fit_phases_to_target(&target, &RfpnVariant::SubArray, PhaseResolution::Unlimited).unwrap();
        assert_eq!(cfg.phases(), &[0.0; 4]);
    }

    #[test]
    fn amplitude_mismatch_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for ntrx in [1usize, 2, 4, 8] {
            let nt = 16;
            let target = CMatrix::from_fn(nt, ntrx, |_, _| cis(rng.random_range(-3.0..3.0)) / (nt as f64).sqrt());
            let cfg = fit_phases_to_target(&target, &RfpnVariant::FullyConnected, PhaseResolution::Unlimited).unwrap();
            let net = assemble_network(&RfpnVariant::FullyConnected, &cfg, nt, ntrx, &NetworkLosses::lossless()).unwrap();
            let err = quantization_error(&target, &net).unwrap();
            let r = ntrx as f64;
            let expected = r.sqrt() * (1.0 - 1.0 / r.sqrt());
            assert!((err - expected).abs() < 1e-12, "ntrx={ntrx}: {err} vs {expected}");
        }
    }

    #[test]
    fn quantization_error_shape_check() {
        let net = assemble_network(&RfpnVariant::FullyConnected, &PhaseConfig::zeros(4), 2, 2, &NetworkLosses::lossless()).unwrap();
        assert_eq!(quantization_error(&net.f_net, &net).unwrap(), 0.0);
        assert!(quantization_error(&CMatrix::zeros(3, 2), &net).is_err());
    }

    #[test]
    fn dft_columns() {
        let net = dft_network(4, 1, &[0]).unwrap();
        assert!(net.f_net.iter().all(|z| (z - c(0.5)).norm() < 1e-15));
        let full = dft_network(8, 8, &(0..8).collect::<Vec<_>>()).unwrap();
        assert!((full.f_net.adjoint() * &full.f_net - CMatrix::identity(8, 8)).norm() < 1e-12);
        let w = cis(-TAU / 8.0) / 8f64.sqrt();
        assert!((full.f_net[(1, 1)] - w).norm() < 1e-15);
        let some = dft_network(16, 3, &[2, 9, 15]).unwrap();
        assert!((some.f_net.adjoint() * &some.f_net - CMatrix::identity(3, 3)).norm() < 1e-12);
        assert!(dft_network(8, 2, &[3, 3]).is_err());
        assert!(dft_network(8, 1, &[8]).is_err());
    }

    #[test]
    fn projector_examples() {
        let net = dft_network(8, 3, &[0, 2, 5]).unwrap();
        let p = projection_matrix(&net.f_net).unwrap();
        assert!((&p - &net.f_net * net.f_net.adjoint()).norm() < 1e-12);
        let tr: C64 = p.trace();
        assert!((tr - c(3.0)).norm() < 1e-9);
        let scaled = projection_matrix(&(&net.f_net * C64::new(-2.0, 0.7))).unwrap();
        assert!((scaled - &p).norm() < 1e-12);
    }

    #[test]
    fn projector_rejects_rank_deficiency() {
        let col = CMatrix::from_element(4, 1, c(0.5));
        let f = CMatrix::from_fn(4, 2, |r, _| col[(r, 0)]);
        assert!(matches!(projection_matrix(&f), Err(Error::SingularNetwork { .. })));
        assert!(matches!(projection_matrix(&CMatrix::zeros(4, 2)), Err(Error::SingularNetwork { .. })));
    }

    #[test]
    fn projector_laws_on_random_networks() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..100 {
            let nt = rng.random_range(2..=32);
            let ntrx = rng.random_range(1..=nt.min(4));
            let net = assemble_network(
                &RfpnVariant::FullyConnected,
                &random_phases(nt * ntrx, &mut rng),
                nt,
                ntrx,
                &NetworkLosses { l_s: rng.random_range(1.0..3.0), l_ps: 1.2, l_c: 1.0 },
            )
            .unwrap();
            let p = projection_matrix(&net.f_net).unwrap();
            assert!((&p * &p - &p).norm() <= 1e-10 * nt as f64);
            assert!((&p - p.adjoint()).norm() <= 1e-12);
            assert!((frobenius_sq(&p) - ntrx as f64).abs() < 1e-9);
        }
    }
}
