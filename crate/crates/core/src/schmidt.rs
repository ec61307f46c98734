//! Reshuffling of bipartite operators and the operator Schmidt decomposition.
//!
//! Composite indices are lexicographic: basis state `|m n⟩` of
//! `H_N ⊗ H_N` has index `m·N + n` (0-based), the same layout the Kronecker
//! product uses. Reshuffling moves entry `X[⟨mn⟩, ⟨μν⟩]` to
//! `X^R[⟨mμ⟩, ⟨nν⟩]`; the squared singular values of `U^R` are the operator
//! Schmidt coefficients `Λ_k` of `U`.

use nalgebra::SVD;
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{invalid, Result};
use crate::linalg::{
    renyi_entropy, singular_values, CMatrix, ComplexSquareMatrix, ProbabilitySpectrum,
};

/// Relative cut below which Schmidt terms are dropped by default.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Operator on `H_M ⊗ H_N` stored as an `(M·N) × (M·N)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteOperator {
    dims: (usize, usize),
    matrix: ComplexSquareMatrix,
}

impl BipartiteOperator {
    pub fn new(matrix: ComplexSquareMatrix, dims: (usize, usize)) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 {
            return invalid("factor dimensions must be positive");
        }
        if matrix.order() != dims.0 * dims.1 {
            return invalid(format!(
                "operator of order {} cannot have factors {}x{}",
                matrix.order(),
                dims.0,
                dims.1
            ));
        }
        Ok(Self { dims, matrix })
    }

    /// Operator on `H_N ⊗ H_N`, with `N` inferred from the order.
    pub fn symmetric(matrix: ComplexSquareMatrix) -> Result<Self> {
        let n = exact_sqrt(matrix.order())
            .ok_or_else(|| crate::Error::InvalidInput(format!("order {} is not a perfect square", matrix.order())))?;
        Self::new(matrix, (n, n))
    }

    /// `A ⊗ B`.
    pub fn product(a: &ComplexSquareMatrix, b: &ComplexSquareMatrix) -> Self {
        let m = a.as_matrix().kronecker(b.as_matrix());
        Self { dims: (a.order(), b.order()), matrix: ComplexSquareMatrix::from_matrix_unchecked(m) }
    }

    /// Diagonal operator with the given diagonal, on `H_N ⊗ H_N`.
    pub fn diagonal(entries: &[Complex64]) -> Result<Self> {
        Self::symmetric(ComplexSquareMatrix::diagonal(entries)?)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    pub fn matrix(&self) -> &ComplexSquareMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexSquareMatrix {
        self.matrix
    }

    pub fn is_diagonal(&self) -> bool {
        self.matrix.is_diagonal()
    }

    /// The common factor dimension `N`, or an error when `M ≠ N`.
    pub fn factor_dim(&self) -> Result<usize> {
        if self.dims.0 != self.dims.1 {
            return invalid(format!(
                "expected equal factor dimensions, got {}x{}",
                self.dims.0, self.dims.1
            ));
        }
        Ok(self.dims.0)
    }
}

pub(crate) fn exact_sqrt(l: usize) -> Option<usize> {
    let n = (l as f64).sqrt().round() as usize;
    (n * n == l).then_some(n)
}

/// `X ↦ X^R`. Involutive.
pub fn reshuffle(x: &BipartiteOperator) -> Result<BipartiteOperator> {
    let n = x.factor_dim()?;
    let src = x.matrix.as_matrix();
    let out = CMatrix::from_fn(n * n, n * n, |row, col| {
        let (m, mu) = (row / n, row % n);
        let (nn, nu) = (col / n, col % n);
        src[(m * n + nn, mu * n + nu)]
    });
    Ok(BipartiteOperator {
        dims: x.dims,
        matrix: ComplexSquareMatrix::from_matrix_unchecked(out),
    })
}

/// Operator Schmidt coefficients `Λ_k`, nonincreasing, length `N²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    coefficients: Vec<f64>,
    normalization: f64,
}

impl SchmidtSpectrum {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `N²`, the sum of the coefficients for a unitary gate.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `ΣΛ_k`, the squared Hilbert-Schmidt norm of the operator.
    pub fn total(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    /// `λ_k = Λ_k / N²`; fails unless the operator was unitary.
    pub fn probabilities(&self) -> Result<ProbabilitySpectrum> {
        ProbabilitySpectrum::new(self.coefficients.iter().map(|c| c / self.normalization).collect())
    }

    /// Number of coefficients above `rel_tol · Λ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.coefficients.first().copied().unwrap_or(0.0);
        self.coefficients.iter().filter(|&&c| c > cut).count()
    }
}

pub fn schmidt_spectrum(u: &BipartiteOperator) -> Result<SchmidtSpectrum> {
    let n = u.factor_dim()?;
    let r = reshuffle(u)?;
    let coefficients = singular_values(r.matrix()).into_iter().map(|s| s * s).collect();
    Ok(SchmidtSpectrum { coefficients, normalization: (n * n) as f64 })
}

/// One term `√Λ_k · B'_k ⊗ B''_k`.
#[derive(Debug, Clone)]
pub struct SchmidtTerm {
    /// `√Λ_k`.
    pub weight: f64,
    pub left: ComplexSquareMatrix,
    pub right: ComplexSquareMatrix,
}

/// Expands `U = Σ_k √Λ_k B'_k ⊗ B''_k` with Hilbert-Schmidt orthonormal
/// factors, keeping terms with `Λ_k > rank_tol · Λ_max`.
pub fn operator_schmidt_decomposition(u: &BipartiteOperator, rank_tol: f64) -> Result<Vec<SchmidtTerm>> {
    if !(rank_tol > 0.0) {
        return invalid(format!("rank tolerance must be positive, got {rank_tol}"));
    }
    let n = u.factor_dim()?;
    let r = reshuffle(u)?;
    let svd = SVD::new(r.into_matrix().into_matrix(), true, true);
    let left = svd.u.expect("left singular vectors requested");
    let right_adj = svd.v_t.expect("right singular vectors requested");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let largest = svd.singular_values[order[0]];
    let cut = rank_tol * largest * largest;

    let terms = order
        .into_iter()
        .filter(|&k| {
            let s = svd.singular_values[k];
            s > 0.0 && s * s > cut
        })
        .map(|k| {
            // Column k of U^R's left factor is vec(B'_k); row k of V^† is vec(B''_k).
            let b1 = CMatrix::from_fn(n, n, |m, mu| left[(m * n + mu, k)]);
            let b2 = CMatrix::from_fn(n, n, |nn, nu| right_adj[(k, nn * n + nu)]);
            SchmidtTerm {
                weight: svd.singular_values[k],
                left: ComplexSquareMatrix::from_matrix_unchecked(b1),
                right: ComplexSquareMatrix::from_matrix_unchecked(b2),
            }
        })
        .collect();
    Ok(terms)
}

/// `Σ_k w_k B'_k ⊗ B''_k`.
pub fn recompose(terms: &[SchmidtTerm], n: usize) -> ComplexSquareMatrix {
    let mut acc = CMatrix::zeros(n * n, n * n);
    for t in terms {
        acc += t.left.as_matrix().kronecker(t.right.as_matrix()).scale(t.weight);
    }
    ComplexSquareMatrix::from_matrix_unchecked(acc)
}

/// Rényi entropy `S_q` of the normalized Schmidt vector; `q = 1` gives the
/// Schmidt strength.
pub fn gate_entanglement_entropy(u: &BipartiteOperator, q: f64) -> Result<f64> {
    if !(q >= 0.0) {
        return invalid(format!("Renyi order must be nonnegative, got {q}"));
    }
    let spectrum = schmidt_spectrum(u)?;
    renyi_entropy(&spectrum.probabilities()?, q)
}

/// Fourier gate `F_{kl} = e^{2πi kl/L}/√L` on `H_N ⊗ H_N`, `L = N²`.
pub fn fourier_gate(l: usize) -> Result<BipartiteOperator> {
    let n = match exact_sqrt(l) {
        Some(n) if l > 0 => n,
        _ => return invalid(format!("Fourier gate order {l} is not a positive perfect square")),
    };
    let scale = 1.0 / (l as f64).sqrt();
    let m = CMatrix::from_fn(l, l, |k, j| {
        // reduce kl mod L before scaling to keep the phase argument small
        let phase = TAU * ((k * j) % l) as f64 / l as f64;
        Complex64::from_polar(scale, phase)
    });
    BipartiteOperator::new(ComplexSquareMatrix::from_matrix_unchecked(m), (n, n))
}
