//! Vectorized form of the fully-connected network.
//!
//! `vec(F_C·F_PS·F_D) = (F_D^T ⊗ F_C)·vec(F_PS) = P·σ`, where `σ = vec(F_PS)`
//! is zero except at the `Nt·Ntrx` diagonal positions of `F_PS`. `P` has
//! `Ntrx·Nt` rows and `(Ntrx·Nt)²` columns, so it is kept in coordinate form.

use crate::error::{invalid, Error, Result};
use crate::linalg::{CMatrix, CVector, C64, ZERO};

use super::{build_combiner, build_divider, build_phase_shifters, NetworkLosses, PhaseConfig, RfpnVariant};

/// Default cap on `(Nt·Ntrx)²`, the column count and nonzero count of `P`.
pub const DEFAULT_SPARSE_BUDGET: u128 = 1 << 24;

/// Largest dense `P` (rows × cols) that `to_dense` will materialize.
pub const DENSE_LIMIT: u128 = 1 << 26;

/// Sparse vector given by sorted indices and their values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    pub len: usize,
    pub indices: Vec<usize>,
    pub values: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct QuantizationSystem {
    nt: usize,
    ntrx: usize,
    rows: usize,
    cols: usize,
    /// (row, col, value), sorted by column then row.
    entries: Vec<(usize, usize, C64)>,
    /// Positions of the `F_PS` diagonal inside `vec(F_PS)`.
    pub sigma_support: Vec<usize>,
}

/// Builds `P = F_D^T ⊗ F_C` for the fully-connected network.
pub fn build_quantization_operator(nt: usize, ntrx: usize, losses: &NetworkLosses) -> Result<QuantizationSystem> {
    QuantizationSystem::with_budget(nt, ntrx, losses, DEFAULT_SPARSE_BUDGET)
}

fn column_nonzeros(m: &CMatrix) -> Vec<Vec<(usize, C64)>> {
    m.column_iter()
        .map(|col| col.iter().enumerate().filter(|(_, z)| **z != ZERO).map(|(r, z)| (r, *z)).collect())
        .collect()
}

impl QuantizationSystem {
    pub fn with_budget(nt: usize, ntrx: usize, losses: &NetworkLosses, budget: u128) -> Result<Self> {
        if nt == 0 || ntrx == 0 {
            return invalid("operator dimensions must be positive");
        }
        let inner = nt as u128 * ntrx as u128;
        let requested = inner * inner;
        if requested > budget {
            return Err(Error::BudgetExceeded { requested, budget });
        }
        let f_d = build_divider(&RfpnVariant::FullyConnected, nt, ntrx, losses)?;
        let f_c = build_combiner(nt, ntrx, losses)?;

        // (A ⊗ B)[ar·Br + br, ac·Bc + bc] = A[ar, ac]·B[br, bc] with A = F_D^T, B = F_C
        let a = f_d.transpose();
        let (b_rows, b_cols) = f_c.shape();
        let a_nz = column_nonzeros(&a);
        let b_nz = column_nonzeros(&f_c);
        let mut entries = Vec::with_capacity(requested as usize);
        for (ac, a_col) in a_nz.iter().enumerate() {
            for (bc, b_col) in b_nz.iter().enumerate() {
                let col = ac * b_cols + bc;
                for &(ar, av) in a_col {
                    for &(br, bv) in b_col {
                        entries.push((ar * b_rows + br, col, av * bv));
                    }
                }
            }
        }
        let n = nt * ntrx;
        Ok(Self {
            nt,
            ntrx,
            rows: a.nrows() * b_rows,
            cols: a.ncols() * b_cols,
            entries,
            sigma_support: (0..n).map(|d| d * (n + 1)).collect(),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn row_nonzeros(&self) -> Vec<usize> {
        let mut counts = vec![0; self.rows];
        for &(r, _, _) in &self.entries {
            counts[r] += 1;
        }
        counts
    }

    pub fn column_nonzeros(&self) -> Vec<usize> {
        let mut counts = vec![0; self.cols];
        for &(_, c, _) in &self.entries {
            counts[c] += 1;
        }
        counts
    }

    /// The long vector `σ = vec(F_PS)` for a phase configuration.
    pub fn sigma(&self, phases: &PhaseConfig, losses: &NetworkLosses) -> Result<SparseVector> {
        let n = self.nt * self.ntrx;
        if phases.len() != n {
            return invalid(format!("expected {n} phases, got {}", phases.len()));
        }
        let diag = build_phase_shifters(phases, losses)?;
        Ok(SparseVector { len: self.cols, indices: self.sigma_support.clone(), values: diag.0.iter().copied().collect() })
    }

    /// `P·x` for a sparse `x`.
    pub fn apply_sparse(&self, x: &SparseVector) -> Result<CVector> {
        if x.len != self.cols || x.indices.len() != x.values.len() {
            return invalid("sparse vector does not match the operator");
        }
        let mut out = CVector::from_element(self.rows, ZERO);
        for (&idx, &val) in x.indices.iter().zip(&x.values) {
            let start = self.entries.partition_point(|e| e.1 < idx);
            for &(r, _, p) in self.entries[start..].iter().take_while(|e| e.1 == idx) {
                out[r] += p * val;
            }
        }
        Ok(out)
    }

    /// `P·x` for a dense `x` of length `cols`.
    pub fn apply_dense(&self, x: &[C64]) -> Result<CVector> {
        if x.len() != self.cols {
            return invalid(format!("expected a vector of length {}, got {}", self.cols, x.len()));
        }
        let mut out = CVector::from_element(self.rows, ZERO);
        for &(r, c, p) in &self.entries {
            out[r] += p * x[c];
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        let requested = self.rows as u128 * self.cols as u128;
        if requested > DENSE_LIMIT {
            return Err(Error::BudgetExceeded { requested, budget: DENSE_LIMIT });
        }
        let mut m = CMatrix::from_element(self.rows, self.cols, ZERO);
        for &(r, c, p) in &self.entries {
            m[(r, c)] += p;
        }
        Ok(m)
    }
}
