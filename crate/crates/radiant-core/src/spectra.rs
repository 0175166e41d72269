//! Eigendecomposition of the coupling matrix and mode statistics.
//!
//! The coupling matrix is complex symmetric (not Hermitian), so eigenvalues
//! are genuinely complex: the real part is the mode decay rate in units of
//! the isolated-atom rate, the imaginary part the collective shift. The
//! decomposition is done by a standard dense general-complex solver (LAPACK
//! `zgeev`: Hessenberg reduction plus shifted QR); the contract enforced here
//! is accuracy, not method — every returned spectrum satisfies the trace
//! identity and, when eigenvectors are requested, a per-mode residual bound.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, EigVals};
use num_complex::Complex64 as C64;
use std::io::Write;

use crate::kernel::CouplingMatrix;
use crate::medium::PhysicalParams;

/// A mode is superradiant when it decays strictly faster than an isolated
/// atom.
pub const DEFAULT_SUPERRADIANT_THRESHOLD: f64 = 1.0;

/// Per-mode residual bound `||M v - lambda v|| / (||M||_F ||v||)` enforced on
/// every decomposition that returns eigenvectors.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Absolute tolerance, per atom, for the trace identity `sum(lambda) = n`.
pub const TRACE_TOLERANCE_PER_ATOM: f64 = 1e-8;

/// Bilinear self-products below this threshold mark a quasi-null eigenvector
/// of the complex-symmetric matrix; such columns keep their unit Euclidean
/// normalization instead.
const QUASI_NULL_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectraError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("eigensolver failed: {detail}")]
    Solver { detail: String },
    #[error(
        "worst eigenpair residual {worst:.3e} exceeds the contract {tolerance:.3e}"
    )]
    ResidualTooLarge { worst: f64, tolerance: f64 },
    #[error(
        "eigenvalue sum {sum} deviates from the trace {expected} beyond {tolerance:.3e}"
    )]
    TraceMismatch {
        sum: C64,
        expected: f64,
        tolerance: f64,
    },
}

impl SpectraError {
    pub fn kind(&self) -> crate::FailureKind {
        match self {
            SpectraError::InvalidArgument(_) => crate::FailureKind::InvalidInput,
            _ => crate::FailureKind::Numerical,
        }
    }
}

/// Full spectrum of a coupling matrix.
///
/// Eigenvalues are sorted by descending real part, ties broken by descending
/// imaginary part. Eigenvectors (when requested) are the matching columns,
/// normalized to unit bilinear norm `v^T v = 1` — the natural normalization
/// for complex-symmetric matrices, whose eigenvectors are orthogonal under
/// the unconjugated product. Residuals are relative to the Frobenius norm of
/// the matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<C64>,
    eigenvectors: Option<Array2<C64>>,
    residuals: Option<Vec<f64>>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    /// Eigenvector columns, in eigenvalue order; `None` unless the
    /// decomposition was asked for vectors.
    pub fn eigenvectors(&self) -> Option<&Array2<C64>> {
        self.eigenvectors.as_ref()
    }

    /// Per-mode relative residuals; `None` unless eigenvectors were computed.
    pub fn residuals(&self) -> Option<&[f64]> {
        self.residuals.as_deref()
    }

    pub fn eigenvalue_sum(&self) -> C64 {
        self.eigenvalues.iter().sum()
    }

    /// `spectrum.csv`: header `index,re_lambda,im_lambda,residual`, one row
    /// per mode in spectrum order. The residual field is left empty when the
    /// decomposition did not produce eigenvectors.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,re_lambda,im_lambda,residual")?;
        for (i, lambda) in self.eigenvalues.iter().enumerate() {
            match &self.residuals {
                Some(res) => writeln!(
                    w,
                    "{i},{:.16e},{:.16e},{:.16e}",
                    lambda.re, lambda.im, res[i]
                )?,
                None => writeln!(w, "{i},{:.16e},{:.16e},", lambda.re, lambda.im)?,
            }
        }
        Ok(())
    }
}

/// Counts and averages of superradiant modes relative to a rate threshold.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SpectrumStats {
    /// Number of modes with `Re lambda > threshold` (strict).
    pub n_superradiant: usize,
    /// Mean decay rate over that set; absent when the set is empty.
    pub mean_superradiant_rate: Option<f64>,
    /// Fastest decay rate in the spectrum.
    pub max_rate: f64,
    pub threshold: f64,
}

/// Decompose the coupling matrix into its full complex spectrum.
///
/// With `want_vectors` the returned spectrum carries eigenvectors and
/// residuals, and the residual contract is enforced; without, only the
/// eigenvalues (still checked against the trace identity) are computed,
/// which is roughly twice as fast for large matrices.
pub fn eigendecompose(
    matrix: &CouplingMatrix,
    want_vectors: bool,
) -> Result<Spectrum, SpectraError> {
    let n = matrix.n();
    if n == 0 {
        return Err(SpectraError::InvalidArgument("empty matrix".into()));
    }
    if matrix.entries().iter().any(|z| !z.is_finite()) {
        return Err(SpectraError::InvalidArgument(
            "matrix has non-finite entries".into(),
        ));
    }

    let spectrum = if want_vectors {
        let (values, vectors) = matrix
            .entries()
            .eig()
            .map_err(|e| SpectraError::Solver {
                detail: e.to_string(),
            })?;
        let order = sort_order(&values);
        let eigenvalues: Vec<C64> = order.iter().map(|&i| values[i]).collect();
        let mut columns = Array2::<C64>::zeros((n, n));
        for (new, &old) in order.iter().enumerate() {
            columns.column_mut(new).assign(&vectors.column(old));
        }
        bilinear_normalize(&mut columns);
        let residuals = residuals(matrix, &eigenvalues, &columns);
        let worst = residuals.iter().cloned().fold(0.0, f64::max);
        if !(worst <= RESIDUAL_TOLERANCE) {
            return Err(SpectraError::ResidualTooLarge {
                worst,
                tolerance: RESIDUAL_TOLERANCE,
            });
        }
        Spectrum {
            eigenvalues,
            eigenvectors: Some(columns),
            residuals: Some(residuals),
        }
    } else {
        let values = matrix
            .entries()
            .eigvals()
            .map_err(|e| SpectraError::Solver {
                detail: e.to_string(),
            })?;
        let order = sort_order(&values);
        Spectrum {
            eigenvalues: order.iter().map(|&i| values[i]).collect(),
            eigenvectors: None,
            residuals: None,
        }
    };

    let sum = spectrum.eigenvalue_sum();
    let expected = n as f64 * crate::kernel::DIAGONAL_VALUE.re;
    let tolerance = TRACE_TOLERANCE_PER_ATOM * n as f64;
    if (sum.re - expected).abs() > tolerance || sum.im.abs() > tolerance {
        return Err(SpectraError::TraceMismatch {
            sum,
            expected,
            tolerance,
        });
    }
    Ok(spectrum)
}

/// Indices sorted by descending `Re lambda`, ties by descending `Im lambda`.
fn sort_order(values: &Array1<C64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        values[j]
            .re
            .total_cmp(&values[i].re)
            .then(values[j].im.total_cmp(&values[i].im))
    });
    order
}

/// Rescale each column to unit bilinear norm `v^T v = 1` (principal square
/// root). Quasi-null columns, where `v^T v` nearly vanishes, are left with
/// their unit Euclidean normalization.
fn bilinear_normalize(columns: &mut Array2<C64>) {
    for mut col in columns.columns_mut() {
        let s: C64 = col.iter().map(|z| z * z).sum();
        if s.norm() > QUASI_NULL_THRESHOLD {
            let scale = s.sqrt();
            col.mapv_inplace(|z| z / scale);
        }
    }
}

fn residuals(matrix: &CouplingMatrix, values: &[C64], columns: &Array2<C64>) -> Vec<f64> {
    let norm = matrix.frobenius_norm();
    let product = matrix.entries().dot(columns);
    values
        .iter()
        .enumerate()
        .map(|(j, lambda)| {
            let col = columns.column(j);
            let mut defect = 0.0f64;
            let mut scale = 0.0f64;
            for (mv, v) in product.column(j).iter().zip(col.iter()) {
                defect += (mv - lambda * v).norm_sqr();
                scale += v.norm_sqr();
            }
            defect.sqrt() / (norm * scale.sqrt())
        })
        .collect()
}

/// Count and average the modes decaying faster than `threshold`.
pub fn classify(spectrum: &Spectrum, threshold: f64) -> SpectrumStats {
    let rates: Vec<f64> = spectrum
        .eigenvalues()
        .iter()
        .map(|l| l.re)
        .filter(|&re| re > threshold)
        .collect();
    let n_superradiant = rates.len();
    let mean_superradiant_rate = if n_superradiant > 0 {
        Some(rates.iter().sum::<f64>() / n_superradiant as f64)
    } else {
        None
    };
    let max_rate = spectrum
        .eigenvalues()
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    SpectrumStats {
        n_superradiant,
        mean_superradiant_rate,
        max_rate,
        threshold,
    }
}

/// Number of modes that escape the subradiant bulk in a large uniform ball:
/// `k0^2 R^2 / pi`. Valid for samples at least a wavelength across
/// (`k0 R >= 1`).
pub fn superradiant_count_prediction(
    params: &PhysicalParams,
    radius: f64,
) -> Result<f64, SpectraError> {
    check_large_sample(params, radius)?;
    let k0r = params.k0() * radius;
    Ok(k0r * k0r / std::f64::consts::PI)
}

/// Common decay rate of those modes: `4 pi^2 R rho / (3 k0^2)`, which is the
/// atom count divided by the superradiant mode count.
pub fn superradiant_rate_prediction(
    params: &PhysicalParams,
    radius: f64,
) -> Result<f64, SpectraError> {
    check_large_sample(params, radius)?;
    let pi = std::f64::consts::PI;
    Ok(4.0 * pi * pi * radius * params.rho() / (3.0 * params.k0() * params.k0()))
}

fn check_large_sample(params: &PhysicalParams, radius: f64) -> Result<(), SpectraError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(SpectraError::InvalidArgument(format!(
            "radius must be finite and positive, got {radius}"
        )));
    }
    if params.k0() * radius < 1.0 {
        return Err(SpectraError::InvalidArgument(format!(
            "finite-sphere predictions need k0 * R >= 1, got {}",
            params.k0() * radius
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::assemble_matrix;
    use crate::medium::{dicke_cluster, uniform_ball_sample, PhysicalParams, Sample};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn params(k0: f64, mu: f64) -> PhysicalParams {
        PhysicalParams::new(k0, mu, 1.0).unwrap()
    }

    fn two_atom_matrix() -> crate::kernel::CouplingMatrix {
        let s = Sample::from_positions(vec![[0.0; 3], [0.0, 0.0, FRAC_PI_2]]).unwrap();
        assemble_matrix(&s, &params(1.0, 0.0)).unwrap()
    }

    #[test]
    fn single_atom_spectrum() {
        let s = Sample::from_positions(vec![[0.0; 3]]).unwrap();
        let m = assemble_matrix(&s, &params(1.0, 0.0)).unwrap();
        let spec = eigendecompose(&m, true).unwrap();
        assert_eq!(spec.eigenvalues(), &[C64::new(1.0, 0.0)]);
        assert!(spec.residuals().unwrap()[0] <= RESIDUAL_TOLERANCE);
    }

    #[test]
    fn two_atom_closed_form() {
        let spec = eigendecompose(&two_atom_matrix(), true).unwrap();
        let expected = [1.0 + 2.0 / PI, 1.0 - 2.0 / PI];
        for (lambda, want) in spec.eigenvalues().iter().zip(expected) {
            assert!((lambda.re - want).abs() < 1e-10, "{lambda} vs {want}");
            assert!(lambda.im.abs() < 1e-10);
        }
    }

    #[test]
    fn eigenvectors_have_unit_bilinear_norm() {
        let s = uniform_ball_sample(12, 2.0, 31).unwrap();
        let m = assemble_matrix(&s, &params(1.0, 0.3)).unwrap();
        let spec = eigendecompose(&m, true).unwrap();
        let vecs = spec.eigenvectors().unwrap();
        for j in 0..spec.n() {
            let s: C64 = vecs.column(j).iter().map(|z| z * z).sum();
            assert!(
                (s - C64::new(1.0, 0.0)).norm() < 1e-10,
                "column {j}: v^T v = {s}"
            );
        }
    }

    #[test]
    fn ordering_is_descending() {
        let s = uniform_ball_sample(25, 1.5, 7).unwrap();
        let m = assemble_matrix(&s, &params(1.0, 0.0)).unwrap();
        let spec = eigendecompose(&m, false).unwrap();
        for pair in spec.eigenvalues().windows(2) {
            let ordered = pair[0].re > pair[1].re
                || (pair[0].re == pair[1].re && pair[0].im >= pair[1].im);
            assert!(ordered, "{:?} before {:?}", pair[0], pair[1]);
        }
    }

    #[test]
    fn trace_identity_random_samples() {
        for (seed, mu) in [(0u64, 0.0), (1, 0.3), (2, 3.0)] {
            let s = uniform_ball_sample(60, 3.0, seed).unwrap();
            let m = assemble_matrix(&s, &params(1.0, mu)).unwrap();
            let spec = eigendecompose(&m, false).unwrap();
            let sum = spec.eigenvalue_sum();
            assert!((sum.re - 60.0).abs() <= 1e-8 * 60.0);
            assert!(sum.im.abs() <= 1e-8 * 60.0);
        }
    }

    #[test]
    fn permutation_invariance() {
        let s = uniform_ball_sample(10, 2.0, 13).unwrap();
        let mut reversed: Vec<[f64; 3]> = s.positions().to_vec();
        reversed.reverse();
        let s2 = Sample::from_positions(reversed).unwrap();
        let p = params(1.0, 0.2);
        let a = eigendecompose(&assemble_matrix(&s, &p).unwrap(), false).unwrap();
        let b = eigendecompose(&assemble_matrix(&s2, &p).unwrap(), false).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            assert!((x - y).norm() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn isolated_atom_reduction() {
        // mu * min-separation = 10 * 5 = 50 > 30: kernel tails are below
        // 1e-21 and every mode decays at the isolated rate.
        let positions = (0..5).map(|i| [5.0 * i as f64, 0.0, 0.0]).collect();
        let s = Sample::from_positions(positions).unwrap();
        let m = assemble_matrix(&s, &params(1.0, 10.0)).unwrap();
        let spec = eigendecompose(&m, false).unwrap();
        for lambda in spec.eigenvalues() {
            assert!((lambda - C64::new(1.0, 0.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn classify_two_atom() {
        let spec = eigendecompose(&two_atom_matrix(), false).unwrap();
        let stats = classify(&spec, DEFAULT_SUPERRADIANT_THRESHOLD);
        assert_eq!(stats.n_superradiant, 1);
        assert!((stats.max_rate - (1.0 + 2.0 / PI)).abs() < 1e-10);
        assert!((stats.mean_superradiant_rate.unwrap() - (1.0 + 2.0 / PI)).abs() < 1e-10);
    }

    #[test]
    fn classify_single_atom_boundary() {
        // threshold comparison is strict: an isolated atom is not superradiant
        let s = Sample::from_positions(vec![[0.0; 3]]).unwrap();
        let m = assemble_matrix(&s, &params(1.0, 0.0)).unwrap();
        let spec = eigendecompose(&m, false).unwrap();
        let stats = classify(&spec, 1.0);
        assert_eq!(stats.n_superradiant, 0);
        assert_eq!(stats.mean_superradiant_rate, None);
        assert_eq!(stats.max_rate, 1.0);
    }

    #[test]
    fn dicke_cluster_has_single_superradiant_mode() {
        let s = dicke_cluster(50, 0.01, 1.0, 9).unwrap();
        let m = assemble_matrix(&s, &params(1.0, 0.0)).unwrap();
        let spec = eigendecompose(&m, false).unwrap();
        let stats = classify(&spec, 1.0);
        assert_eq!(stats.n_superradiant, 1);
        assert!(
            (stats.max_rate - 50.0).abs() < 0.05 * 50.0,
            "max rate {}",
            stats.max_rate
        );
    }

    #[test]
    fn prediction_formulas() {
        let p = params(1.0, 0.0);
        assert!((superradiant_count_prediction(&p, 8.0).unwrap() - 64.0 / PI).abs() < 1e-12);
        assert!((superradiant_count_prediction(&p, 10.0).unwrap() - 100.0 / PI).abs() < 1e-12);
        let p = PhysicalParams::new(1.0, 0.0, 3.0 / (4.0 * PI * PI)).unwrap();
        assert!((superradiant_rate_prediction(&p, 1.0).unwrap() - 1.0).abs() < 1e-12);
        // the rate is the atom count over the mode count
        let rho = 0.93239;
        let p = PhysicalParams::new(1.0, 0.0, rho).unwrap();
        let n = rho * 4.0 * PI / 3.0 * 8.0f64.powi(3);
        let count = superradiant_count_prediction(&p, 8.0).unwrap();
        let rate = superradiant_rate_prediction(&p, 8.0).unwrap();
        assert!((rate - n / count).abs() < 1e-9 * rate);
    }

    #[test]
    fn prediction_regime_guard() {
        let p = params(1.0, 0.0);
        assert!(matches!(
            superradiant_count_prediction(&p, 0.5),
            Err(SpectraError::InvalidArgument(_))
        ));
    }

    #[test]
    fn csv_format() {
        let spec = eigendecompose(&two_atom_matrix(), true).unwrap();
        let mut buf = Vec::new();
        spec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("index,re_lambda,im_lambda,residual"));
        let first = lines.next().unwrap();
        assert!(first.starts_with("0,1.63"), "line: {first}");
        assert_eq!(first.split(',').count(), 4);
    }
}
