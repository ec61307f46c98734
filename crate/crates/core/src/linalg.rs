//! Dense complex linear algebra, majorization and entropy functionals.
//!
//! Decompositions are delegated to `nalgebra`; this module fixes the
//! conventions the rest of the crate relies on: spectra and singular values
//! are sorted nonincreasing (stable with respect to the solver's order),
//! entropies are in nats, and `0 ln 0 = 0`.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Owned dense complex matrix, the storage type behind every wrapper here.
pub type CMatrix = DMatrix<Complex64>;

/// Entries whose magnitude does not exceed this are treated as zero when
/// counting ranks or validating positivity.
pub const RANK_TOL: f64 = 1e-10;

/// Tolerance for reconstructing a matrix from its decomposition.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;

/// Square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSquareMatrix(CMatrix);

impl ComplexSquareMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return invalid(format!("matrix is {}x{}, expected square", m.nrows(), m.ncols()));
        }
        if m.nrows() == 0 {
            return invalid("matrix of order 0");
        }
        if let Some((idx, _)) = m
            .iter()
            .enumerate()
            .find(|(_, z)| !(z.re.is_finite() && z.im.is_finite()))
        {
            let (r, c) = (idx % m.nrows(), idx / m.nrows());
            return invalid(format!("non-finite entry at ({r}, {c})"));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        debug_assert!(m.is_square());
        Self(m)
    }

    pub fn from_fn(order: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        Self::new(CMatrix::from_fn(order, order, f))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(order: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != order * order {
            return invalid(format!(
                "expected {} entries for order {order}, got {}",
                order * order,
                entries.len()
            ));
        }
        Self::new(CMatrix::from_row_slice(order, order, entries))
    }

    pub fn identity(order: usize) -> Self {
        Self(CMatrix::identity(order, order))
    }

    pub fn diagonal(values: &[Complex64]) -> Result<Self> {
        Self::new(CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values)))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self(&self.0 * &rhs.0)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn diagonal_entries(&self) -> Vec<Complex64> {
        self.0.diagonal().iter().copied().collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }

    /// Largest entrywise modulus of `A - A^†`.
    pub fn hermiticity_residual(&self) -> f64 {
        max_abs_diff(&self.0, &self.0.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// Largest entrywise modulus of `A^† A - I`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.order();
        max_abs_diff(&(self.0.adjoint() * &self.0), &CMatrix::identity(n, n))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.order();
        (0..n).all(|r| (0..n).all(|c| r == c || self.0[(r, c)] == Complex64::new(0.0, 0.0)))
    }

    /// Squared Frobenius (Hilbert-Schmidt) norm.
    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn sort_nonincreasing(v: &mut [f64]) {
    v.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
}

/// Hermitian, positive semidefinite matrix with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub const TOL: f64 = 1e-10;

    pub fn new(m: ComplexSquareMatrix) -> Result<Self> {
        let herm = m.hermiticity_residual();
        if herm > Self::TOL {
            return invalid(format!("density matrix not Hermitian (residual {herm:e})"));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > Self::TOL || tr.im.abs() > Self::TOL {
            return invalid(format!("density matrix trace is {tr}, expected 1"));
        }
        let eig = eig_hermitian(&m)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -Self::TOL {
            return invalid(format!("density matrix has negative eigenvalue {min:e}"));
        }
        Ok(Self(m.into_matrix()))
    }

    /// Skips validation; used where the construction guarantees the invariants.
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn to_square(&self) -> ComplexSquareMatrix {
        ComplexSquareMatrix(self.0.clone())
    }

    /// Real parts of the diagonal, in basis order.
    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal().iter().map(|z| z.re).collect()
    }

    /// Eigenvalues, sorted nonincreasing.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0)
    }

    pub fn spectrum(&self) -> ProbabilitySpectrum {
        ProbabilitySpectrum::from_sorted_unchecked(clamp_tiny_negatives(self.eigenvalues()))
    }

    pub fn von_neumann_entropy(&self) -> f64 {
        shannon_entropy(&self.spectrum())
    }

    /// `Tr ρ²` computed as the sum of squared entry moduli.
    pub fn purity(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }
}

fn clamp_tiny_negatives(mut v: Vec<f64>) -> Vec<f64> {
    for x in &mut v {
        if *x < 0.0 && *x >= -RANK_TOL {
            *x = 0.0;
        }
    }
    v
}

/// Nonincreasing vector of nonnegative reals summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilitySpectrum(Vec<f64>);

impl ProbabilitySpectrum {
    pub const SUM_TOL: f64 = 1e-10;

    /// Sorts `values` nonincreasing and validates them. Entries in
    /// `[-1e-10, 0)` are rounding noise and are set to zero.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("empty probability vector");
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite() || **x < -RANK_TOL) {
            return invalid(format!("probability entry {x} is negative or non-finite"));
        }
        let mut values = clamp_tiny_negatives(values);
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOL {
            return invalid(format!("probabilities sum to {total}, expected 1"));
        }
        sort_nonincreasing(&mut values);
        Ok(Self(values))
    }

    /// Rescales nonnegative weights to unit sum.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return invalid(format!("weights sum to {total}, cannot normalize"));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(len: usize) -> Self {
        Self(vec![1.0 / len as f64; len])
    }

    pub(crate) fn from_sorted_unchecked(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of entries above [`RANK_TOL`].
    pub fn rank(&self) -> usize {
        self.0.iter().filter(|&&x| x > RANK_TOL).count()
    }
}

/// Singular values sorted nonincreasing.
pub fn singular_values(a: &ComplexSquareMatrix) -> Vec<f64> {
    let svd = SVD::new(a.0.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    sort_nonincreasing(&mut s);
    s
}

/// Spectral decomposition `H = V diag(values) V^†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues sorted nonincreasing.
    pub values: Vec<f64>,
    /// Unitary whose columns are the eigenvectors, in the order of `values`.
    pub vectors: ComplexSquareMatrix,
}

impl HermitianEigen {
    /// `V diag(values) V^†`.
    pub fn reconstruct(&self) -> ComplexSquareMatrix {
        let v = self.vectors.as_matrix();
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        ComplexSquareMatrix(v * d * v.adjoint())
    }
}

pub fn eig_hermitian(h: &ComplexSquareMatrix) -> Result<HermitianEigen> {
    let residual = h.hermiticity_residual();
    if residual > DensityMatrix::TOL {
        return invalid(format!("matrix is not Hermitian (residual {residual:e})"));
    }
    let sym = (&h.0 + h.0.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let n = h.order();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors: ComplexSquareMatrix(vectors) })
}

/// Eigenvalues of a matrix assumed Hermitian, sorted nonincreasing.
pub(crate) fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let sym = (m + m.adjoint()).scale(0.5);
    let mut v: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    sort_nonincreasing(&mut v);
    v
}

/// Eigenvalues of a general complex matrix, from its Schur form.
pub fn complex_eigenvalues(a: &ComplexSquareMatrix) -> Vec<Complex64> {
    let (_, t) = a.0.clone().schur().unpack();
    t.diagonal().iter().copied().collect()
}

/// `x ≺ y`: whether `y` majorizes `x`.
///
/// Both vectors are sorted nonincreasing first. Partial sums may fall short
/// by at most `1e-10`, and totals must agree to the same tolerance.
pub fn majorizes(y: &[f64], x: &[f64]) -> Result<bool> {
    if x.len() != y.len() {
        return invalid(format!("length mismatch: {} vs {}", y.len(), x.len()));
    }
    let mut ys = y.to_vec();
    let mut xs = x.to_vec();
    if ys.iter().chain(xs.iter()).any(|v| !v.is_finite()) {
        return invalid("non-finite entry");
    }
    sort_nonincreasing(&mut ys);
    sort_nonincreasing(&mut xs);
    let (mut sy, mut sx) = (0.0, 0.0);
    for (a, b) in ys.iter().zip(&xs) {
        sy += a;
        sx += b;
        if sx > sy + RANK_TOL {
            return Ok(false);
        }
    }
    Ok((sx - sy).abs() <= RANK_TOL)
}

/// `-Σ p ln p` in nats.
pub fn shannon_entropy(p: &ProbabilitySpectrum) -> f64 {
    -p.0.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Rényi entropy of order `q` in nats; `q = 1` is Shannon, `q = 0` is Hartley.
pub fn renyi_entropy(p: &ProbabilitySpectrum, q: f64) -> Result<f64> {
    if !(q >= 0.0) || !q.is_finite() {
        return invalid(format!("Renyi order must be finite and nonnegative, got {q}"));
    }
    if q == 0.0 {
        return Ok((p.rank() as f64).ln());
    }
    if q == 1.0 {
        return Ok(shannon_entropy(p));
    }
    let s: f64 = p.0.iter().filter(|&&x| x > 0.0).map(|&x| x.powf(q)).sum();
    Ok(s.ln() / (1.0 - q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexSquareMatrix {
        ComplexSquareMatrix::from_fn(n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .unwrap()
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexSquareMatrix {
        let a = random_matrix(n, rng);
        ComplexSquareMatrix::new((a.as_matrix() + a.as_matrix().adjoint()).scale(0.5)).unwrap()
    }

    #[test]
    fn rejects_non_finite_and_non_square() {
        let m = CMatrix::from_element(2, 2, c(f64::NAN, 0.0));
        assert!(ComplexSquareMatrix::new(m).is_err());
        assert!(ComplexSquareMatrix::new(CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn singular_values_of_simple_matrices() {
        let s = singular_values(&ComplexSquareMatrix::identity(2));
        assert_abs_diff_eq!(s[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[1], 1.0, epsilon = 1e-14);

        let ones = ComplexSquareMatrix::from_fn(2, |_, _| c(1.0, 0.0)).unwrap();
        let s = singular_values(&ones);
        assert_abs_diff_eq!(s[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn squared_singular_values_sum_to_frobenius_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(4, &mut rng);
        let direct: f64 = a.as_matrix().iter().map(|z| z.re * z.re + z.im * z.im).sum();
        let via_svd: f64 = singular_values(&a).iter().map(|s| s * s).sum();
        assert!((direct - via_svd).abs() <= 1e-9 * direct);
        let s = singular_values(&a);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn eig_of_projector() {
        let h = ComplexSquareMatrix::diagonal(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let e = eig_hermitian(&h).unwrap();
        assert_eq!(e.values, vec![1.0, 0.0]);
        assert_abs_diff_eq!(e.vectors.get(0, 0).norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors.get(1, 1).norm(), 1.0, epsilon = 1e-14);

        let half = ComplexSquareMatrix::from_fn(2, |_, _| c(0.5, 0.0)).unwrap();
        let e = eig_hermitian(&half).unwrap();
        assert_abs_diff_eq!(e.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexSquareMatrix::from_rows(2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        assert!(matches!(eig_hermitian(&m), Err(crate::Error::InvalidInput(_))));
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 5, 17, 64] {
            let h = random_hermitian(n, &mut rng);
            let e = eig_hermitian(&h).unwrap();
            assert!(e.reconstruct().max_abs_diff(&h) <= RECONSTRUCTION_TOL, "n={n}");
            assert!(e.vectors.is_unitary(RECONSTRUCTION_TOL));
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn unitary_has_unit_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(6, &mut rng);
        let u = eig_hermitian(&h).unwrap().vectors;
        for s in singular_values(&u) {
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn majorization_examples() {
        assert!(majorizes(&[1.0, 0.0], &[0.5, 0.5]).unwrap());
        assert!(!majorizes(&[0.5, 0.5], &[1.0, 0.0]).unwrap());
        assert!(majorizes(&[0.5, 0.3, 0.2], &[0.4, 0.35, 0.25]).unwrap());
        // unequal totals
        assert!(!majorizes(&[0.5, 0.5], &[0.5, 0.4]).unwrap());
        assert!(majorizes(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn entropy_examples() {
        let n = 3;
        let uniform = ProbabilitySpectrum::uniform(n * n);
        assert_abs_diff_eq!(shannon_entropy(&uniform), 2.0 * (n as f64).ln(), epsilon = 1e-14);

        let delta = ProbabilitySpectrum::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(shannon_entropy(&delta), 0.0);

        let half = ProbabilitySpectrum::new(vec![0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(shannon_entropy(&half), 2f64.ln(), epsilon = 1e-15);

        let k3 = ProbabilitySpectrum::new(vec![0.5, 0.0, 0.3, 0.2, 0.0]).unwrap();
        assert_abs_diff_eq!(renyi_entropy(&k3, 0.0).unwrap(), 3f64.ln(), epsilon = 1e-15);

        let u4 = ProbabilitySpectrum::uniform(4);
        assert_abs_diff_eq!(renyi_entropy(&u4, 2.0).unwrap(), 4f64.ln(), epsilon = 1e-14);

        assert!(renyi_entropy(&u4, -0.5).is_err());
    }

    #[test]
    fn renyi_is_continuous_at_one() {
        let p = ProbabilitySpectrum::from_weights(vec![0.9, 0.4, 0.3, 0.05, 0.01]).unwrap();
        let s1 = shannon_entropy(&p);
        assert!((renyi_entropy(&p, 1.0001).unwrap() - s1).abs() < 1e-3);
        assert!((renyi_entropy(&p, 0.9999).unwrap() - s1).abs() < 1e-3);
    }

    #[test]
    fn spectrum_rejects_bad_vectors() {
        assert!(ProbabilitySpectrum::new(vec![0.7, 0.7]).is_err());
        assert!(ProbabilitySpectrum::new(vec![1.1, -0.1]).is_err());
        assert!(ProbabilitySpectrum::new(vec![]).is_err());
        let p = ProbabilitySpectrum::new(vec![0.2, 0.8]).unwrap();
        assert_eq!(p.values(), &[0.8, 0.2]);
    }

    fn weights(len: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1.0, len).prop_filter("nonzero", |w| w.iter().sum::<f64>() > 1e-3)
    }

    proptest! {
        #[test]
        fn renyi_is_monotone_in_order(w in weights(6), q in 0.05f64..3.0) {
            let p = ProbabilitySpectrum::from_weights(w).unwrap();
            let s1 = shannon_entropy(&p);
            let sq = renyi_entropy(&p, q).unwrap();
            if q < 1.0 {
                prop_assert!(s1 <= sq + 1e-12);
            } else {
                prop_assert!(s1 >= sq - 1e-12);
            }
            prop_assert!(s1 <= (p.len() as f64).ln() + 1e-12);
        }

        #[test]
        fn majorization_is_reflexive(w in weights(5)) {
            let p = ProbabilitySpectrum::from_weights(w).unwrap();
            prop_assert!(majorizes(p.values(), p.values()).unwrap());
            prop_assert!(majorizes(p.values(), &[0.2; 5]).unwrap());
        }

        #[test]
        fn majorization_is_transitive(
            w in weights(4),
            (i, j, t) in (0usize..4, 0usize..4, 0.0f64..1.0),
            (k, l, u) in (0usize..4, 0usize..4, 0.0f64..1.0),
        ) {
            // Each T-transform moves a vector down the majorization order.
            let t_transform = |v: &[f64], i: usize, j: usize, t: f64| {
                let mut out = v.to_vec();
                out[i] = t * v[i] + (1.0 - t) * v[j];
                out[j] = t * v[j] + (1.0 - t) * v[i];
                out
            };
            let a = ProbabilitySpectrum::from_weights(w).unwrap();
            let b = t_transform(a.values(), i, j, t);
            let c = t_transform(&b, k, l, u);
            prop_assert!(majorizes(a.values(), &b).unwrap());
            prop_assert!(majorizes(&b, &c).unwrap());
            prop_assert!(majorizes(a.values(), &c).unwrap());
        }
    }
}
