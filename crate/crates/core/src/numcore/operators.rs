use serde::{Deserialize, Serialize};

use super::eigen::{hermitian_eig, DEFAULT_DEGENERACY_TOLERANCE};
use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

pub const DEFAULT_POSITIVITY_TOLERANCE: f64 = 1e-8;

/// A square matrix equal to its adjoint up to `1e-12 * max(1, |M|_max)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let tolerance = 1e-12 * matrix.max_abs().max(1.0);
        let defect = matrix.hermiticity_defect();
        if defect > tolerance {
            return Err(Error::NotHermitian { defect, tolerance });
        }
        Ok(Self(matrix))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(ComplexMatrix::from_real_diagonal(diag))
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.hermiticity_defect() <= 1e-9 * matrix.max_abs().max(1.0));
        Self(matrix)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.scale_real(factor))
    }

    pub fn add(&self, other: &HermitianOperator) -> Self {
        Self(&self.0 + &other.0)
    }
}

impl AsRef<ComplexMatrix> for HermitianOperator {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Unit-trace positive semidefinite operator (within `positivity_tolerance`).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianOperator,
    positivity_tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceCheck {
    pub real_error: f64,
    pub imag: f64,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, DEFAULT_POSITIVITY_TOLERANCE)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, positivity_tolerance: f64) -> Result<Self> {
        let matrix = HermitianOperator::new(matrix)?;
        check_trace(matrix.matrix())?;
        let min = min_eigenvalue(matrix.matrix());
        if min < -positivity_tolerance {
            return Err(Error::PositivityViolation {
                time: f64::NAN,
                min_eigenvalue: min,
                tolerance: positivity_tolerance,
            });
        }
        Ok(Self {
            matrix,
            positivity_tolerance,
        })
    }

    /// `|psi><psi|` for a normalized `psi`; positive by construction.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        if psi.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDensity(format!("state vector has norm {norm}")));
        }
        let matrix = ComplexMatrix::outer(psi, psi).hermitian_part();
        Ok(Self {
            matrix: HermitianOperator(matrix),
            positivity_tolerance: DEFAULT_POSITIVITY_TOLERANCE,
        })
    }

    /// Populations on the computational (or energy) basis.
    pub fn from_populations(populations: &[f64]) -> Result<Self> {
        if let Some(p) = populations.iter().find(|p| **p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidDensity(format!("negative population {p}")));
        }
        Self::new(ComplexMatrix::from_real_diagonal(populations))
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix, positivity_tolerance: f64) -> Self {
        Self {
            matrix: HermitianOperator::new_unchecked(matrix),
            positivity_tolerance,
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let p = vec![1.0 / dim as f64; dim];
        Self::from_populations(&p).expect("uniform populations are valid")
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut p = vec![0.0; dim];
        p[index] = 1.0;
        Self::from_populations(&p).expect("basis projector is valid")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }

    pub fn as_hermitian(&self) -> &HermitianOperator {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn positivity_tolerance(&self) -> f64 {
        self.positivity_tolerance
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(self.matrix())
    }

    pub fn trace_check(&self) -> TraceCheck {
        let tr = self.matrix().trace();
        TraceCheck {
            real_error: (tr.re - 1.0).abs(),
            imag: tr.im.abs(),
        }
    }
}

fn check_trace(m: &ComplexMatrix) -> Result<()> {
    let tr = m.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-12 {
        return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
    }
    Ok(())
}

pub(crate) fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    let h = HermitianOperator::new_unchecked(m.clone());
    hermitian_eig(&h, DEFAULT_DEGENERACY_TOLERANCE).eigenvalues()[0]
}

/// `Re Tr(H rho)`; the imaginary part must vanish to `1e-10`.
pub fn expectation(h: &HermitianOperator, rho: &DensityMatrix) -> Result<f64> {
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "expectation",
            expected: h.dim(),
            found: rho.dim(),
        });
    }
    let value = h.matrix().trace_product(rho.matrix());
    if value.im.abs() > 1e-10 * value.re.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "Tr(H rho) has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::matrix::{ONE, ZERO};

    #[test]
    fn hermitian_check() {
        let bad = ComplexMatrix::new(2, 2, vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(matches!(HermitianOperator::new(bad), Err(Error::NotHermitian { .. })));
        let rect = ComplexMatrix::zeros(2, 3);
        assert_eq!(
            HermitianOperator::new(rect).unwrap_err(),
            Error::NotSquare { rows: 2, cols: 3 }
        );
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::from_populations(&[0.5, 0.6]).is_err());
        let neg = ComplexMatrix::from_real_diagonal(&[1.1, -0.1]);
        assert!(matches!(
            DensityMatrix::new(neg),
            Err(Error::PositivityViolation { .. })
        ));
        let s = 0.5_f64.sqrt();
        let plus = DensityMatrix::pure(&[C64::new(s, 0.0), C64::new(s, 0.0)]).unwrap();
        assert!(plus.min_eigenvalue().abs() < 1e-12);
        assert!(DensityMatrix::pure(&[ONE, ONE]).is_err());
    }

    #[test]
    fn expectation_examples() {
        let rho = DensityMatrix::from_populations(&[0.2, 0.3, 0.5]).unwrap();
        let id = HermitianOperator::new(ComplexMatrix::identity(3)).unwrap();
        assert!((expectation(&id, &rho).unwrap() - 1.0).abs() < 1e-15);
        let h2 = HermitianOperator::new(ComplexMatrix::identity(2)).unwrap();
        assert!(matches!(
            expectation(&h2, &rho),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
