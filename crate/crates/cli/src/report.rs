//! Quantization-error report for the fully-connected network.
//!
//! For each (Nt, Ntrx) pair a random constant-modulus target (entries of
//! modulus 1/√Nt) is fitted with the network's phase shifters, and the
//! Frobenius distance is reported together with the shape and row weight of
//! the vectorized network operator.

use std::fmt::Write as _;

use hybridsim::harness::LossesDb;
use hybridsim::linalg::{cis, CMatrix};
use hybridsim::rfpn::{
    assemble_network, fit_phases_to_target, quantization_error, NetworkLosses, PhaseResolution,
    QuantizationSystem, RfpnVariant, DEFAULT_SPARSE_BUDGET,
};
use hybridsim::{derive_seed, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const REPORT_HEADER: &str = "nt,ntrx,frobenius_error,p_rows,p_cols,row_nonzeros";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    #[serde(default = "default_pairs")]
    pub pairs: Vec<(usize, usize)>,
    #[serde(default)]
    pub losses_db: LossesDb,
    /// `null` (the default) means unlimited resolution.
    #[serde(default)]
    pub phase_bits: Option<u32>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub sparse_budget: u128,
}

fn default_pairs() -> Vec<(usize, usize)> {
    vec![(64, 2), (32, 4), (16, 8)]
}

fn default_budget() -> u128 {
    DEFAULT_SPARSE_BUDGET
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub nt: usize,
    pub ntrx: usize,
    pub frobenius_error: f64,
    pub p_rows: usize,
    pub p_cols: usize,
    /// Largest nonzero count over the rows of the operator.
    pub row_nonzeros: usize,
}

impl ReportFile {
    pub fn validate(&self) -> Result<()> {
        let fail = |field: &'static str, message: String| Err(Error::Config { field, message });
        if self.pairs.is_empty() {
            return fail("pairs", "must list at least one (nt, ntrx) pair".into());
        }
        for &(nt, ntrx) in &self.pairs {
            if ntrx == 0 || ntrx > nt {
                return fail("pairs", format!("({nt}, {ntrx}) needs 1 <= ntrx <= nt"));
            }
            let inner = nt as u128 * ntrx as u128;
            if inner * inner > self.sparse_budget {
                return fail("pairs", format!("({nt}, {ntrx}) exceeds the sparse budget {}", self.sparse_budget));
            }
        }
        if let Err(e) = self.losses_db.to_linear() {
            return fail("losses_db", e.to_string());
        }
        if let Some(b) = self.phase_bits {
            if b == 0 || b > 52 {
                return fail("phase_bits", format!("must be in 1..=52 or null, got {b}"));
            }
        }
        Ok(())
    }
}

fn constant_modulus_target(nt: usize, ntrx: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let amp = 1.0 / (nt as f64).sqrt();
    CMatrix::from_fn(nt, ntrx, |_, _| cis(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)) * amp)
}

pub fn report_rows(file: &ReportFile) -> Result<Vec<ReportRow>> {
    file.validate()?;
    let losses: NetworkLosses = file.losses_db.to_linear()?;
    let resolution = PhaseResolution::from_bits(file.phase_bits);
    file.pairs
        .iter()
        .enumerate()
        .map(|(i, &(nt, ntrx))| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(file.seed, i as u64));
            let target = constant_modulus_target(nt, ntrx, &mut rng);
            let phases = fit_phases_to_target(&target, &RfpnVariant::FullyConnected, resolution)?;
            let net = assemble_network(&RfpnVariant::FullyConnected, &phases, nt, ntrx, &losses)?;
            let op = QuantizationSystem::with_budget(nt, ntrx, &losses, file.sparse_budget)?;
            let (p_rows, p_cols) = op.shape();
            Ok(ReportRow {
                nt,
                ntrx,
                frobenius_error: quantization_error(&target, &net)?,
                p_rows,
                p_cols,
                row_nonzeros: op.row_nonzeros().into_iter().max().unwrap_or(0),
            })
        })
        .collect()
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.nt, r.ntrx, r.frobenius_error, r.p_rows, r.p_cols, r.row_nonzeros);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file() -> ReportFile {
        serde_json::from_str("{}").unwrap()
    }

    #[test]
    fn default_pairs_share_operator_rows() {
        let rows = report_rows(&file()).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert_eq!((r.p_rows, r.p_cols, r.row_nonzeros), (128, 16384, 128));
        }
    }

    #[test]
    fn amplitude_mismatch_law() {
        let f = ReportFile { pairs: vec![(16, 1), (16, 2), (16, 4), (16, 8)], ..file() };
        for r in report_rows(&f).unwrap() {
            let k = r.ntrx as f64;
            assert!((r.frobenius_error - k.sqrt() * (1.0 - 1.0 / k.sqrt())).abs() < 1e-9);
        }
        let single = ReportFile { pairs: vec![(9, 1)], ..file() };
        assert_eq!(report_rows(&single).unwrap()[0].frobenius_error, 0.0);
    }

    #[test]
    fn rejects_oversized_pairs() {
        let f = ReportFile { pairs: vec![(1024, 8)], ..file() };
        assert!(matches!(f.validate(), Err(Error::Config { field: "pairs", .. })));
    }
}
