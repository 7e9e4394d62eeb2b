//! Banded assembly of the (N+1) x (N+1) size-transition generator.
//!
//! The generator G acts on a size distribution stacked as a column vector
//! P = (P(0), ..., P(N)); entry G[n, n+dn] = C_dn(n) so that dP/dt = G P
//! implements the master equation exactly. Only the handful of offsets in
//! the coefficient table are stored (at most four bands), which keeps
//! propagation feasible up to N ~ 1e5 even though spectral work converts to
//! dense form at small N.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{ModelSpec, SizeDefinition};

/// Largest admissible N for banded assembly (4 bands of N+1 doubles).
pub const MAX_ASSEMBLE_N: usize = 1_000_000;

/// Relative tolerance of the assembly-time conservation check under Def I.
const CONSERVATION_RTOL: f64 = 1e-12;

/// Immutable banded transition matrix with G[n, n+dn] = C_dn(n).
#[derive(Debug, Clone)]
pub struct Generator {
    spec: ModelSpec,
    /// Sorted band offsets dn.
    band_offsets: Vec<i64>,
    /// bands[k][n] = C_{offsets[k]}(n); zero where the source leaves [0, N].
    bands: Vec<Vec<f64>>,
    max_abs_entry: f64,
}

impl Generator {
    /// Assemble the banded generator for a validated spec.
    ///
    /// Under Definition I every column sum must vanish (probability
    /// conservation); this is asserted here so coefficient bugs fail fast.
    pub fn assemble(spec: &ModelSpec) -> Result<Self> {
        let big_n = spec.n_fermions();
        if big_n > MAX_ASSEMBLE_N {
            return Err(Error::ResourceLimit(format!(
                "N = {big_n} exceeds banded assembly cap {MAX_ASSEMBLE_N}"
            )));
        }
        let band_offsets: Vec<i64> = spec.supported_offsets().to_vec();
        let bands: Vec<Vec<f64>> = band_offsets
            .iter()
            .map(|&dn| (0..=big_n).map(|n| spec.coefficient(n, dn)).collect())
            .collect();
        let max_abs_entry = bands
            .iter()
            .flat_map(|b| b.iter())
            .fold(0.0f64, |acc, &x| acc.max(x.abs()));
        let gen = Generator {
            spec: *spec,
            band_offsets,
            bands,
            max_abs_entry,
        };
        if spec.definition() == SizeDefinition::DefI {
            let worst = gen
                .column_sums()
                .into_iter()
                .fold(0.0f64, |acc, s| acc.max(s.abs()));
            if worst > CONSERVATION_RTOL * gen.max_abs_entry.max(1.0) {
                return Err(Error::InvalidSpec(format!(
                    "Def I generator violates conservation: max |column sum| = {worst:e}"
                )));
            }
        }
        Ok(gen)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn n_fermions(&self) -> usize {
        self.spec.n_fermions()
    }

    /// Matrix dimension N + 1.
    pub fn dim(&self) -> usize {
        self.spec.n_fermions() + 1
    }

    pub fn band_offsets(&self) -> &[i64] {
        &self.band_offsets
    }

    /// Band values at a given offset (indexed by target size n).
    pub fn band(&self, delta_n: i64) -> Option<&[f64]> {
        self.band_offsets
            .iter()
            .position(|&o| o == delta_n)
            .map(|k| self.bands[k].as_slice())
    }

    /// Largest absolute matrix entry.
    pub fn max_abs_entry(&self) -> f64 {
        self.max_abs_entry
    }

    /// Infinity norm (max absolute row sum); bounds the stiffness of dP/dt = GP.
    pub fn inf_norm(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for n in 0..dim {
            let mut row = 0.0;
            for (k, &dn) in self.band_offsets.iter().enumerate() {
                let m = n as i64 + dn;
                if m >= 0 && (m as usize) < dim {
                    row += self.bands[k][n].abs();
                }
            }
            worst = worst.max(row);
        }
        worst
    }

    /// y = G p in O(N * #bands) time.
    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        let dim = self.dim();
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
        let mut out = vec![0.0; dim];
        self.apply_into(p, &mut out);
        Ok(out)
    }

    /// In-place variant of [`Generator::apply`]; lengths must match `dim()`.
    pub fn apply_into(&self, p: &[f64], out: &mut [f64]) {
        let dim = self.dim();
        debug_assert_eq!(p.len(), dim);
        debug_assert_eq!(out.len(), dim);
        for x in out.iter_mut() {
            *x = 0.0;
        }
        for (k, &dn) in self.band_offsets.iter().enumerate() {
            let band = &self.bands[k];
            let lo = (-dn).max(0) as usize;
            let hi = (dim as i64 - 1 - dn.max(0)) as usize;
            for n in lo..=hi.min(dim - 1) {
                let m = (n as i64 + dn) as usize;
                out[n] += band[n] * p[m];
            }
        }
    }

    /// Exact column sums: sum over rows of G[., m].
    ///
    /// Zero (to rounding) under Def I; nonpositive under Def II, where weight
    /// leaks into the traced-out bath.
    pub fn column_sums(&self) -> Vec<f64> {
        let dim = self.dim();
        let mut sums = vec![0.0; dim];
        for (k, &dn) in self.band_offsets.iter().enumerate() {
            let band = &self.bands[k];
            for n in 0..dim {
                let m = n as i64 + dn;
                if m >= 0 && (m as usize) < dim {
                    sums[m as usize] += band[n];
                }
            }
        }
        sums
    }

    /// Dense copy of the generator.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut g = DMatrix::zeros(dim, dim);
        for (k, &dn) in self.band_offsets.iter().enumerate() {
            for n in 0..dim {
                let m = n as i64 + dn;
                if m >= 0 && (m as usize) < dim {
                    g[(n, m as usize)] = self.bands[k][n];
                }
            }
        }
        g
    }

    /// Debug dump of nonzero entries as CSV with header `row,col,value`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "row,col,value")?;
        let dim = self.dim();
        for n in 0..dim {
            for (k, &dn) in self.band_offsets.iter().enumerate() {
                let m = n as i64 + dn;
                if m >= 0 && (m as usize) < dim && self.bands[k][n] != 0.0 {
                    writeln!(w, "{},{},{}", n, m, self.bands[k][n])?;
                }
            }
        }
        Ok(())
    }
}
