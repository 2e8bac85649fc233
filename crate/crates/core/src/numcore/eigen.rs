use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::{ComplexMatrix, C64};
use super::operators::HermitianOperator;
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_DEGENERACY_TOLERANCE: f64 = 1e-9;

/// Eigenvalues ascending with unitary eigenvector columns.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyBasis {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
    degeneracy_tolerance: f64,
    permutation: bool,
}

impl EnergyBasis {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn degeneracy_tolerance(&self) -> f64 {
        self.degeneracy_tolerance
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// True when the eigenvectors are computational basis vectors, which is
    /// the case for every Hamiltonian that is diagonal to begin with.
    pub fn is_permutation(&self) -> bool {
        self.permutation
    }

    /// `U^dag M U`
    pub fn to_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        if self.permutation {
            let src = self.source_indices();
            return ComplexMatrix::from_fn(m.rows(), m.cols(), |a, b| m[(src[a], src[b])]);
        }
        self.eigenvectors.adjoint().matmul(m).matmul(&self.eigenvectors)
    }

    /// `U M U^dag`
    pub fn from_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        if self.permutation {
            let src = self.source_indices();
            let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
            for a in 0..m.rows() {
                for b in 0..m.cols() {
                    out[(src[a], src[b])] = m[(a, b)];
                }
            }
            return out;
        }
        self.eigenvectors.matmul(m).matmul(&self.eigenvectors.adjoint())
    }

    /// For permutation bases, the computational index of each eigenvector.
    fn source_indices(&self) -> Vec<usize> {
        let n = self.dim();
        (0..n)
            .map(|col| {
                (0..n)
                    .find(|&row| self.eigenvectors[(row, col)] != C64::new(0.0, 0.0))
                    .expect("permutation column")
            })
            .collect()
    }

    /// `U diag(E) U^dag`
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.from_eigenbasis(&ComplexMatrix::from_real_diagonal(&self.eigenvalues))
    }

    /// `max |U^dag U - I|`
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.eigenvectors.adjoint().matmul(&self.eigenvectors);
        (&gram - &ComplexMatrix::identity(self.dim())).max_abs()
    }

    /// Eigenvalue clusters `[start, end)` whose neighbours differ by at most the
    /// degeneracy tolerance.
    pub fn levels(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.eigenvalues.len() {
            if i == self.eigenvalues.len()
                || self.eigenvalues[i] - self.eigenvalues[i - 1] > self.degeneracy_tolerance
            {
                out.push(start..i);
                start = i;
            }
        }
        out
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// Output is a deterministic function of the input bits. Each eigenvector is
/// phase-fixed so that its largest-modulus component (first on ties) is real
/// and positive; equal eigenvalues keep the solver's column order.
pub fn hermitian_eig(h: &HermitianOperator, degeneracy_tolerance: f64) -> EnergyBasis {
    let m = h.matrix();
    let n = m.rows();
    if m.is_diagonal() {
        let diag: Vec<f64> = m.diagonal().iter().map(|z| z.re).collect();
        let order = ascending_order(&diag);
        let mut vectors = ComplexMatrix::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            vectors[(src, col)] = C64::new(1.0, 0.0);
        }
        return EnergyBasis {
            eigenvalues: order.iter().map(|&i| diag[i]).collect(),
            eigenvectors: vectors,
            degeneracy_tolerance,
            permutation: true,
        };
    }

    let eig = SymmetricEigen::new(m.to_nalgebra());
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let order = ascending_order(&values);
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let column = eig.eigenvectors.column(src);
        let mut pivot = 0;
        let mut best = -1.0;
        for (i, z) in column.iter().enumerate() {
            if z.norm() > best {
                best = z.norm();
                pivot = i;
            }
        }
        let phase = column[pivot].conj() / column[pivot].norm();
        for i in 0..n {
            vectors[(i, col)] = column[i] * phase;
        }
    }
    EnergyBasis {
        eigenvalues: order.iter().map(|&i| values[i]).collect(),
        eigenvectors: vectors,
        degeneracy_tolerance,
        permutation: false,
    }
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

/// Dense eigendecomposition is used up to this dimension; above it the
/// spectral radius comes from Lanczos iteration.
const DENSE_NORM_LIMIT: usize = 160;

/// Induced 2-norm (largest singular value).
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let scale = m.max_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    if m.is_square() {
        let tol = 1e-12 * scale.max(1.0);
        if m.hermiticity_defect() <= tol {
            return Ok(hermitian_spectral_radius(m));
        }
        // anti-Hermitian: i M is Hermitian
        let rotated = m.scale(C64::new(0.0, 1.0));
        if rotated.hermiticity_defect() <= tol {
            return Ok(hermitian_spectral_radius(&rotated));
        }
    }
    let gram = m.adjoint().matmul(m).hermitian_part();
    Ok(hermitian_spectral_radius(&gram).sqrt())
}

/// `max |lambda|` of a Hermitian matrix.
pub(crate) fn hermitian_spectral_radius(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    if m.is_diagonal() {
        return m.diagonal().iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    }
    if n <= DENSE_NORM_LIMIT {
        let eig = hermitian_eig(&HermitianOperator::new_unchecked(m.clone()), 0.0);
        return eig.eigenvalues.iter().map(|e| e.abs()).fold(0.0, f64::max);
    }
    let sparse = SparseMatrix::from_dense(m);
    lanczos_spectral_radius(|v| sparse.matvec(v), n)
}

/// Extremal-eigenvalue Lanczos with full reorthogonalization, from a fixed
/// pseudo-random start vector. Stops once the Ritz pair of largest modulus
/// has residual below `1e-13 |theta|`, or when the Krylov space is exhausted.
pub(crate) fn lanczos_spectral_radius(apply: impl Fn(&[C64]) -> Vec<C64>, n: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let mut v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    normalize(&mut v);

    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut estimate: f64 = 0.0;
    for j in 0..n {
        let mut w = apply(&v);
        let a = dot(&v, &w).re;
        axpy(&mut w, -a, &v);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            axpy(&mut w, -b, prev);
        }
        basis.push(v);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        alpha.push(a);
        let b = dot(&w, &w).re.sqrt();

        let k = alpha.len();
        let exhausted = j + 1 == n;
        if k.is_multiple_of(8) || exhausted || b <= 1e-14 * estimate.max(a.abs()).max(1e-300) {
            let t = DMatrix::from_fn(k, k, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let (idx, theta) = eig
                .eigenvalues
                .iter()
                .copied()
                .enumerate()
                .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
                .expect("non-empty tridiagonal");
            estimate = theta.abs();
            let residual = b * eig.eigenvectors[(k - 1, idx)].abs();
            if exhausted || residual <= 1e-13 * estimate || b <= 1e-14 * estimate.max(1e-300) {
                return estimate;
            }
        }
        beta.push(b);
        v = w.into_iter().map(|z| z / b).collect();
    }
    estimate
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(y: &mut [C64], alpha: f64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi * alpha;
    }
}

fn normalize(v: &mut [C64]) {
    let norm = dot(v, v).re.sqrt();
    for z in v.iter_mut() {
        *z /= norm;
    }
}
