//! Contra-diagonalization of Hermitian matrices.
//!
//! Diagonalizing `H` minimizes the off-diagonal weight over its unitary
//! orbit; following the diagonalizing rotation with a complex Hadamard
//! matrix maximizes it and leaves every diagonal entry equal to `Tr H / N`.

use itertools::Itertools;
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    eig_hermitian, majorizes, shannon_entropy, CMatrix, ComplexSquareMatrix, DensityMatrix,
    ProbabilitySpectrum,
};

/// Unitary with every entry of modulus `1/√N`.
#[derive(Debug, Clone, PartialEq)]
pub struct HadamardMatrix(ComplexSquareMatrix);

impl HadamardMatrix {
    pub const TOL: f64 = 1e-10;

    pub fn new(m: ComplexSquareMatrix) -> Result<Self> {
        let n = m.order();
        let modulus = 1.0 / (n as f64).sqrt();
        if let Some((i, z)) = m.as_matrix().iter().enumerate().find(|(_, z)| (z.norm() - modulus).abs() > Self::TOL) {
            return invalid(format!(
                "entry ({}, {}) has modulus {}, expected {modulus}",
                i % n,
                i / n,
                z.norm()
            ));
        }
        let residual = m.unitarity_residual();
        if residual > Self::TOL {
            return invalid(format!("matrix is not unitary (residual {residual:e})"));
        }
        Ok(Self(m))
    }

    pub fn order(&self) -> usize {
        self.0.order()
    }

    pub fn matrix(&self) -> &ComplexSquareMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexSquareMatrix {
        self.0
    }
}

/// `F_jk = e^{2πi jk/N}/√N`.
pub fn fourier_matrix(n: usize) -> Result<HadamardMatrix> {
    if n == 0 {
        return invalid("Fourier matrix of order 0");
    }
    let scale = 1.0 / (n as f64).sqrt();
    let m = CMatrix::from_fn(n, n, |j, k| Complex64::from_polar(scale, TAU * ((j * k) % n) as f64 / n as f64));
    Ok(HadamardMatrix(ComplexSquareMatrix::from_matrix_unchecked(m)))
}

fn permutation_matrix(perm: &[usize]) -> Result<CMatrix> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return invalid(format!("{perm:?} is not a permutation of 0..{n}"));
        }
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, &p) in perm.iter().enumerate() {
        m[(i, p)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

fn phase_matrix(phases: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        phases.len(),
        phases.iter().map(|&p| Complex64::from_polar(1.0, p)),
    ))
}

/// `P₁ E₁ F E₂ P₂` with `E = diag(e^{iφ})` and `(P)_{i, perm[i]} = 1`.
pub fn enphase(
    f: &HadamardMatrix,
    left_phases: &[f64],
    right_phases: &[f64],
    left_perm: &[usize],
    right_perm: &[usize],
) -> Result<HadamardMatrix> {
    let n = f.order();
    for (name, len) in [
        ("left phases", left_phases.len()),
        ("right phases", right_phases.len()),
        ("left permutation", left_perm.len()),
        ("right permutation", right_perm.len()),
    ] {
        if len != n {
            return invalid(format!("{name} has length {len}, expected {n}"));
        }
    }
    let p1 = permutation_matrix(left_perm)?;
    let p2 = permutation_matrix(right_perm)?;
    let m = p1 * phase_matrix(left_phases) * f.0.as_matrix() * phase_matrix(right_phases) * p2;
    HadamardMatrix::new(ComplexSquareMatrix::from_matrix_unchecked(m))
}

fn check_hermitian(h: &ComplexSquareMatrix) -> Result<()> {
    let scale = h.as_matrix().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let residual = h.hermiticity_residual();
    if residual > DensityMatrix::TOL * scale {
        return invalid(format!("matrix is not Hermitian (residual {residual:e})"));
    }
    Ok(())
}

/// `f(G) = Σ_{i≠j} |G_ij|²`.
pub fn offdiag_weight(g: &ComplexSquareMatrix) -> Result<f64> {
    check_hermitian(g)?;
    let m = g.as_matrix();
    let n = g.order();
    Ok((0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)].norm_sqr())
        .sum())
}

/// `Tr H² − (Tr H)²/N`, the largest off-diagonal weight on the unitary orbit of `H`.
pub fn max_offdiag_weight(h: &ComplexSquareMatrix) -> Result<f64> {
    check_hermitian(h)?;
    let tr = h.trace().re;
    Ok(h.frobenius_norm_sqr() - tr * tr / h.order() as f64)
}

#[derive(Debug, Clone)]
pub struct ContradiagResult {
    /// `A = U_max H U_max^†`.
    pub matrix: ComplexSquareMatrix,
    /// `U_max = F U_min`.
    pub unitary: ComplexSquareMatrix,
    /// `f(A)`.
    pub offdiag_weight: f64,
}

impl ContradiagResult {
    /// `max_j |A_jj − Tr A/N|`.
    pub fn diagonal_spread(&self) -> f64 {
        let d = self.matrix.diagonal_entries();
        let mean = d.iter().map(|z| z.re).sum::<f64>() / d.len() as f64;
        d.iter().map(|z| (z - mean).norm()).fold(0.0, f64::max)
    }
}

/// Rotates `H` into a basis where its diagonal is flat, using `F` (Fourier by default).
pub fn contradiagonalize(h: &ComplexSquareMatrix, f: Option<&HadamardMatrix>) -> Result<ContradiagResult> {
    check_hermitian(h)?;
    let n = h.order();
    let owned;
    let f = match f {
        Some(f) if f.order() != n => {
            return invalid(format!("Hadamard matrix of order {} for a matrix of order {n}", f.order()));
        }
        Some(f) => f,
        None => {
            owned = fourier_matrix(n)?;
            &owned
        }
    };
    // exactly Hermitian, so the eigensolver's check passes at any scale
    let hermitized = ComplexSquareMatrix::from_matrix_unchecked((h.as_matrix() + h.as_matrix().adjoint()).scale(0.5));
    let eig = eig_hermitian(&hermitized)?;
    let u_min = eig.vectors.adjoint();
    let u_max = f.matrix().mul(&u_min);
    let a = u_max.as_matrix() * hermitized.as_matrix() * u_max.as_matrix().adjoint();
    let a = ComplexSquareMatrix::from_matrix_unchecked((&a + a.adjoint()).scale(0.5));
    let weight = offdiag_weight(&a)?;
    Ok(ContradiagResult { matrix: a, unitary: u_max, offdiag_weight: weight })
}

/// `2(Tr D² − (Tr D)²/N)`: the largest Hilbert-Schmidt distance between `D`
/// and its unitary orbit, after minimizing over permutations.
pub fn max_orbit_distance(d: &[f64]) -> f64 {
    if d.is_empty() {
        return 0.0;
    }
    let tr: f64 = d.iter().sum();
    let sq: f64 = d.iter().map(|x| x * x).sum();
    2.0 * (sq - tr * tr / d.len() as f64)
}

/// Largest order for which [`min_permuted_distance`] enumerates permutations.
pub const MAX_PERMUTATION_ORDER: usize = 9;

/// `min_P ‖D − P V D V^† P^T‖²_HS`, by exhaustive search over permutations.
pub fn min_permuted_distance(d: &[f64], v: &ComplexSquareMatrix) -> Result<f64> {
    let n = d.len();
    if v.order() != n {
        return invalid(format!("unitary of order {} for a diagonal of length {n}", v.order()));
    }
    if n > MAX_PERMUTATION_ORDER {
        return Err(Error::ResourceLimit(format!("{n}! permutations")));
    }
    let dm = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, d.iter().map(|&x| Complex64::new(x, 0.0))));
    let m = v.as_matrix() * &dm * v.as_matrix().adjoint();
    let best = (0..n)
        .permutations(n)
        .map(|perm| {
            let mut dist = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let target = if i == j { d[i] } else { 0.0 };
                    dist += (Complex64::new(target, 0.0) - m[(perm[i], perm[j])]).norm_sqr();
                }
            }
            dist
        })
        .fold(f64::INFINITY, f64::min);
    Ok(best)
}

/// `diag(σ) ≺ diag(UσU^†) ≺ eig(σ)` for a contradiagonal `σ`.
pub fn majorization_chain_check(sigma: &DensityMatrix, u: &ComplexSquareMatrix) -> Result<bool> {
    const TOL: f64 = 1e-9;
    let n = sigma.order();
    if u.order() != n {
        return invalid(format!("unitary of order {} for a state of order {n}", u.order()));
    }
    let flat = 1.0 / n as f64;
    let diag = sigma.diagonal();
    if let Some((i, d)) = diag.iter().enumerate().find(|(_, d)| (*d - flat).abs() > TOL) {
        return invalid(format!("state is not contradiagonal: entry {i} is {d}"));
    }
    let residual = u.unitarity_residual();
    if residual > TOL {
        return invalid(format!("matrix is not unitary (residual {residual:e})"));
    }
    let rotated = u.as_matrix() * sigma.as_matrix() * u.as_matrix().adjoint();
    let middle: Vec<f64> = rotated.diagonal().iter().map(|z| z.re).collect();
    Ok(majorizes(&middle, &diag)? && majorizes(&sigma.eigenvalues(), &middle)?)
}

/// A unitary `V` with `diag(V H V^†) = x`, for any `x` majorized by the
/// spectrum of `H`.
///
/// The spectrum `y` is transported to `x` by at most `N − 1` planar rotations
/// of `diag(y)`: each one fixes the largest outstanding target on one
/// coordinate and pushes the remainder onto its neighbour in sorted order.
pub fn prescribe_diagonal(h: &ComplexSquareMatrix, x: &[f64]) -> Result<ComplexSquareMatrix> {
    let n = h.order();
    if x.len() != n {
        return invalid(format!("target of length {} for a matrix of order {n}", x.len()));
    }
    check_hermitian(h)?;
    let eig = eig_hermitian(&ComplexSquareMatrix::from_matrix_unchecked(
        (h.as_matrix() + h.as_matrix().adjoint()).scale(0.5),
    ))?;
    let y = &eig.values;
    if !majorizes(y, x)? {
        return Err(Error::InfeasibleTarget(format!("{x:?} is not majorized by the spectrum {y:?}")));
    }

    let mut targets: Vec<usize> = (0..n).collect();
    targets.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).expect("finite targets"));

    // Rows of the real orthogonal g and the diagonal of g diag(y) g^T.
    let mut g = nalgebra::DMatrix::<f64>::identity(n, n);
    let mut d = y.clone();
    let mut active: Vec<usize> = (0..n).collect();
    let mut placed = Vec::with_capacity(n);

    for &target_index in &targets {
        let t = x[target_index];
        if active.len() == 1 {
            placed.push(active[0]);
            break;
        }
        active.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).expect("finite diagonal"));
        let k = active.iter().position(|&i| d[i] <= t).unwrap_or(active.len() - 1).max(1);
        let (p, q) = (active[k - 1], active[k]);
        let gap = d[p] - d[q];
        let c2 = if gap > 0.0 { ((t - d[q]) / gap).clamp(0.0, 1.0) } else { 1.0 };
        let (c, s) = (c2.sqrt(), (1.0 - c2).sqrt());
        let (row_p, row_q) = (g.row(p).clone_owned(), g.row(q).clone_owned());
        g.set_row(p, &(&row_p * c + &row_q * s));
        g.set_row(q, &(&row_q * c - &row_p * s));
        let (dp, dq) = (d[p], d[q]);
        d[p] = c2 * dp + (1.0 - c2) * dq;
        d[q] = (1.0 - c2) * dp + c2 * dq;
        active.retain(|&i| i != p);
        placed.push(p);
    }

    let v_adj = eig.vectors.adjoint();
    let mut out = CMatrix::zeros(n, n);
    for (&row, &src) in targets.iter().zip(&placed) {
        for col in 0..n {
            out[(row, col)] = (0..n).map(|k| v_adj.as_matrix()[(k, col)] * g[(src, k)]).sum();
        }
    }
    Ok(ComplexSquareMatrix::from_matrix_unchecked(out))
}

/// Shannon entropy of the outcome distribution `diag(B ρ B^†)`.
pub fn measurement_entropy(rho: &DensityMatrix, basis: &ComplexSquareMatrix) -> Result<f64> {
    if basis.order() != rho.order() {
        return invalid(format!("basis of order {} for a state of order {}", basis.order(), rho.order()));
    }
    let residual = basis.unitarity_residual();
    if residual > 1e-9 {
        return invalid(format!("basis is not unitary (residual {residual:e})"));
    }
    let m = basis.as_matrix() * rho.as_matrix() * basis.as_matrix().adjoint();
    let p: Vec<f64> = m.diagonal().iter().map(|z| z.re.max(0.0)).collect();
    Ok(shannon_entropy(&ProbabilitySpectrum::from_weights(p)?))
}

/// `ln N − S(ρ)`: information gained by measuring in a contradiagonal basis
/// relative to the eigenbasis.
pub fn copied_information(rho: &DensityMatrix) -> f64 {
    (rho.order() as f64).ln() - rho.von_neumann_entropy()
}
