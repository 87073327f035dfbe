//! Mutual information of a precoded link, directly and through the
//! projection-based decomposition into an ideal term and a loss term.
//!
//! Convention: the received signal is `y = √ρ·H_dl·F_RF·F_BB·s + w`, so the
//! effective matrix is `G = H_dl·F_RF·F_BB` (Nr×Ns) and
//! `I = log2 det(I + γ_s·G·G^*)` with `γ_s = ρ/(Ns·σ_n²)`.

use crate::channel::ChannelSvd;
use crate::error::{invalid, Result};
use crate::linalg::{identity_plus, is_finite, log2_abs_det, log2_det_hpd, CMatrix, C64};
use crate::precoding::Precoder;
use crate::rfpn::{projection_matrix, RfpnMatrices};

/// Relative tolerance for the Hermitian/idempotent checks on `P_RF`.
pub const PROJECTOR_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPoint {
    rho_over_noise: f64,
    gamma_s: f64,
}

impl SnrPoint {
    pub fn new(rho_over_noise: f64, ns: usize) -> Result<Self> {
        if !(rho_over_noise.is_finite() && rho_over_noise > 0.0) {
            return invalid(format!("SNR must be positive and finite, got {rho_over_noise}"));
        }
        if ns == 0 {
            return invalid("stream count must be positive");
        }
        Ok(Self { rho_over_noise, gamma_s: rho_over_noise / ns as f64 })
    }

    pub fn from_db(db: f64, ns: usize) -> Result<Self> {
        Self::new(10f64.powf(db / 10.0), ns)
    }

    pub fn rho_over_noise(&self) -> f64 {
        self.rho_over_noise
    }

    /// Per-stream SNR `ρ/(Ns·σ_n²)`.
    pub fn gamma_s(&self) -> f64 {
        self.gamma_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiBreakdown {
    pub total_bits: f64,
    pub ideal_term: f64,
    pub loss_term: f64,
}

/// Which form of the loss term to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossForm {
    /// `log2 det(I − (I+γΣ²)^{-1}·γΣ²·(I − M·M^*))`, identical to
    /// `log2 det(I + γΣ²·M·M^*) − ideal`.
    Exact,
    /// The same expression with `(I − M)` in place of `(I − M·M^*)`.
    Unsquared,
}

/// `log2 det(I + γ·G·G^*)`, evaluated on the smaller Gram matrix.
pub fn log2_det_gram(g: &CMatrix, gamma: f64) -> f64 {
    let gram = if g.ncols() <= g.nrows() { g.adjoint() * g } else { g * g.adjoint() };
    log2_det_hpd(&identity_plus(&gram, gamma))
}

/// Mutual information of `h_downlink` with the given precoder, in bits/s/Hz.
pub fn mutual_information_direct(h_downlink: &CMatrix, precoder: &Precoder, snr: SnrPoint) -> Result<f64> {
    if h_downlink.ncols() != precoder.f_rf.nrows() {
        return invalid(format!(
            "channel {:?} does not match analog stage {:?}",
            h_downlink.shape(),
            precoder.f_rf.shape()
        ));
    }
    if !is_finite(h_downlink) || !is_finite(&precoder.f_rf) || !is_finite(&precoder.f_bb) {
        return invalid("non-finite channel or precoder");
    }
    let g = h_downlink * precoder.combined();
    Ok(log2_det_gram(&g, snr.gamma_s()).max(0.0))
}

fn check_projector(p: &CMatrix) -> Result<()> {
    if !p.is_square() || !is_finite(p) {
        return invalid("projector must be a finite square matrix");
    }
    let scale = p.norm().max(1.0);
    let herm = (p - p.adjoint()).norm();
    let idem = (p * p - p).norm();
    if herm > PROJECTOR_TOLERANCE * scale || idem > PROJECTOR_TOLERANCE * scale {
        return invalid(format!("not an orthogonal projector (hermitian defect {herm:.2e}, idempotent defect {idem:.2e})"));
    }
    Ok(())
}

/// Splits the mutual information into `log2 det(I + γΣ1²)` and the loss
/// caused by projecting `V1` onto the network's column space.
pub fn mutual_information_decomposed(
    sigma1: &[f64],
    v1: &CMatrix,
    p_rf: &CMatrix,
    snr: SnrPoint,
    form: LossForm,
) -> Result<MiBreakdown> {
    let ns = sigma1.len();
    if v1.ncols() != ns || p_rf.nrows() != v1.nrows() {
        return invalid("sigma1, v1 and p_rf have inconsistent shapes");
    }
    check_projector(p_rf)?;
    let gamma = snr.gamma_s();
    let m = v1.adjoint() * p_rf * v1;
    let ideal_term: f64 = sigma1.iter().map(|s| (1.0 + gamma * s * s).log2()).sum();

    let defect = match form {
        LossForm::Exact => CMatrix::identity(ns, ns) - &m * m.adjoint(),
        LossForm::Unsquared => CMatrix::identity(ns, ns) - &m,
    };
    // I − D·defect with D = (I + γΣ²)^{-1}·γΣ², diagonal
    let mut inner = -defect;
    for (i, mut row) in inner.row_iter_mut().enumerate() {
        let g2 = gamma * sigma1[i] * sigma1[i];
        row *= C64::new(g2 / (1.0 + g2), 0.0);
    }
    for i in 0..ns {
        inner[(i, i)] += C64::new(1.0, 0.0);
    }
    let loss_term = log2_abs_det(&inner);
    Ok(MiBreakdown { total_bits: ideal_term + loss_term, ideal_term, loss_term })
}

/// Loss terms for several networks on one channel.
#[derive(Debug, Clone)]
pub struct LossRow {
    pub network: usize,
    pub snr: SnrPoint,
    pub exact: MiBreakdown,
    pub unsquared: MiBreakdown,
}

pub fn quantization_loss_report(svd: &ChannelSvd, networks: &[RfpnMatrices], snrs: &[SnrPoint]) -> Result<Vec<LossRow>> {
    let mut rows = Vec::with_capacity(networks.len() * snrs.len());
    for (idx, net) in networks.iter().enumerate() {
        let p_rf = projection_matrix(&net.f_net)?;
        for &snr in snrs {
            rows.push(LossRow {
                network: idx,
                snr,
                exact: mutual_information_decomposed(&svd.sigma1, &svd.v1, &p_rf, snr, LossForm::Exact)?,
                unsquared: mutual_information_decomposed(&svd.sigma1, &svd.v1, &p_rf, snr, LossForm::Unsquared)?,
            });
        }
    }
    Ok(rows)
}
