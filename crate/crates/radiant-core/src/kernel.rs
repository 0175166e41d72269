//! Scalar-photon exchange kernel and coupling-matrix assembly.
//!
//! Two atoms separated by `r` couple through
//! `K(r) = exp((i k0 - mu) r) / (i k0 r)`: the unregularized kernel damped by
//! `exp(-mu r)`, where `1/mu` is the correlation length of the medium. The
//! collective decay problem for a sample of `n` atoms is the eigenproblem of
//! the dense complex-symmetric matrix with these couplings off the diagonal.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::io::Write;

use crate::medium::{PhysicalParams, Sample};

/// Diagonal convention: `K_aa = 1 + 0i`. The real part of the kernel tends
/// to the isolated-atom rate (1 in units of gamma) as `r -> 0`, while the
/// divergent imaginary part (single-atom level shift) is absorbed into the
/// resonance frequency.
pub const DIAGONAL_VALUE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("kernel is singular at zero separation; use the diagonal convention instead")]
    ZeroSeparation,
    #[error("sample has no atoms")]
    EmptySample,
    #[error("coincident atoms at indices {a} and {b}")]
    CoincidentAtoms { a: usize, b: usize },
}

impl KernelError {
    pub fn kind(&self) -> crate::FailureKind {
        crate::FailureKind::InvalidInput
    }
}

/// `K(r) = exp((i k0 - mu) r) / (i k0 r)` for `r = |separation| > 0`.
///
/// Reduces to the unregularized kernel at `mu = 0`.
pub fn eval_kernel(separation: [f64; 3], params: &PhysicalParams) -> Result<C64, KernelError> {
    let r2 = separation[0] * separation[0]
        + separation[1] * separation[1]
        + separation[2] * separation[2];
    if r2 == 0.0 {
        return Err(KernelError::ZeroSeparation);
    }
    let r = r2.sqrt();
    let numerator = C64::new(-params.mu() * r, params.k0() * r).exp();
    let denominator = C64::new(0.0, params.k0() * r);
    Ok(numerator / denominator)
}

/// Dense `n x n` complex-symmetric coupling matrix of a sample.
///
/// Off-diagonal entries are kernel values for the pair separation; each pair
/// is evaluated once and mirrored, so symmetry is exact. Diagonal entries are
/// [`DIAGONAL_VALUE`]. The matrix is dimensionless: its eigenvalues are decay
/// rates (real part) and collective shifts (imaginary part) in units of the
/// isolated-atom rate.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    entries: Array2<C64>,
    params: PhysicalParams,
}

impl CouplingMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    /// Sum of diagonal entries; exactly `n * DIAGONAL_VALUE` by construction.
    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Matrix dump: row-major CSV of interleaved `(re, im)` pairs, one matrix
    /// row per line, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.n();
        for a in 0..n {
            let mut line = String::with_capacity(n * 48);
            for b in 0..n {
                if b > 0 {
                    line.push(',');
                }
                let z = self.entries[[a, b]];
                line.push_str(&format!("{:.16e},{:.16e}", z.re, z.im));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Assemble the coupling matrix for a sample.
///
/// Rows are filled in parallel; every entry is a pure function of the two
/// positions, so the result does not depend on the parallelism degree.
pub fn assemble_matrix(
    sample: &Sample,
    params: &PhysicalParams,
) -> Result<CouplingMatrix, KernelError> {
    let n = sample.n();
    if n == 0 {
        return Err(KernelError::EmptySample);
    }
    let positions = sample.positions();
    let mut data = vec![C64::new(0.0, 0.0); n * n];
    data.par_chunks_mut(n)
        .enumerate()
        .try_for_each(|(a, row)| {
            let pa = positions[a];
            row[a] = DIAGONAL_VALUE;
            for (b, entry) in row.iter_mut().enumerate().skip(a + 1) {
                let pb = positions[b];
                let separation = [pa[0] - pb[0], pa[1] - pb[1], pa[2] - pb[2]];
                *entry = eval_kernel(separation, params)
                    .map_err(|_| KernelError::CoincidentAtoms { a, b })?;
            }
            Ok(())
        })?;
    // mirror the strict upper triangle
    for a in 1..n {
        for b in 0..a {
            data[a * n + b] = data[b * n + a];
        }
    }
    let entries = Array2::from_shape_vec((n, n), data).expect("row-major buffer of n*n entries");
    Ok(CouplingMatrix {
        entries,
        params: *params,
    })
}
