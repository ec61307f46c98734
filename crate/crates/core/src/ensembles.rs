//! Seeded samplers for the random objects studied here.
//!
//! All samplers draw from a caller-owned [`RandomStream`]; the Monte Carlo
//! drivers give each sample its own substream (see [`crate::rng`]).

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{CMatrix, ComplexSquareMatrix, DensityMatrix};
use crate::rng::RandomStream;
use crate::schmidt::BipartiteOperator;

/// Tolerance for `|A_jk| = 1` when accepting a unimodular matrix.
pub const UNIMODULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnsembleKind {
    Unimodular,
    Ginibre,
    HilbertSchmidtState,
    DiagonalGate,
    HaarPureState,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 5] = [
        EnsembleKind::Unimodular,
        EnsembleKind::Ginibre,
        EnsembleKind::HilbertSchmidtState,
        EnsembleKind::DiagonalGate,
        EnsembleKind::HaarPureState,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Unimodular => "unimodular",
            EnsembleKind::Ginibre => "ginibre",
            EnsembleKind::HilbertSchmidtState => "hilbert_schmidt_state",
            EnsembleKind::DiagonalGate => "diagonal_gate",
            EnsembleKind::HaarPureState => "haar_pure_state",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown ensemble kind '{s}'")))
    }
}

/// What to sample, how many, and from which seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleConfig {
    pub kind: EnsembleKind,
    pub dimension: usize,
    pub samples: u64,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn new(kind: EnsembleKind, dimension: usize, samples: u64, seed: u64) -> Result<Self> {
        if dimension == 0 {
            return invalid("dimension must be at least 1");
        }
        if samples == 0 {
            return invalid("sample count must be at least 1");
        }
        Ok(Self { kind, dimension, samples, seed })
    }

    /// Stream for sample `index`.
    pub fn stream(&self, index: u64) -> RandomStream {
        RandomStream::new(self.seed, index)
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        invalid("dimension must be at least 1")
    } else {
        Ok(())
    }
}

/// `N × N` matrix of independent uniform phases, `|A_jk| = 1`.
pub fn sample_unimodular(n: usize, stream: &mut RandomStream) -> Result<ComplexSquareMatrix> {
    check_dim(n)?;
    // from_fn fills column-major; draw row-major so A_jk takes phase number jN + k.
    let phases: Vec<Complex64> = (0..n * n).map(|_| stream.unit_complex()).collect();
    ComplexSquareMatrix::from_rows(n, &phases)
}

/// `ρ = AA^†/N²` for a unimodular `A`. Every diagonal entry is `1/N`.
pub fn unimodular_to_state(a: &ComplexSquareMatrix) -> Result<DensityMatrix> {
    if let Some(z) = a.as_matrix().iter().find(|z| (z.norm() - 1.0).abs() > UNIMODULAR_TOL) {
        return invalid(format!("entry {z} is not unimodular"));
    }
    let n = a.order() as f64;
    let m = a.as_matrix();
    Ok(DensityMatrix::from_matrix_unchecked((m * m.adjoint()).unscale(n * n)))
}

/// Ginibre matrix with complex standard normal entries (`E|G_jk|² = 1`).
pub fn sample_ginibre(n: usize, stream: &mut RandomStream) -> Result<ComplexSquareMatrix> {
    check_dim(n)?;
    let entries: Vec<Complex64> = (0..n * n).map(|_| stream.complex_normal()).collect();
    ComplexSquareMatrix::from_rows(n, &entries)
}

/// `ρ = GG^†/Tr(GG^†)`: uniform in the Hilbert-Schmidt measure.
pub fn sample_hs_state(n: usize, stream: &mut RandomStream) -> Result<DensityMatrix> {
    let g = sample_ginibre(n, stream)?;
    let m = g.as_matrix();
    let w = m * m.adjoint();
    let tr = w.trace().re;
    Ok(DensityMatrix::from_matrix_unchecked(w.unscale(tr)))
}

/// Diagonal gate `U = diag(e^{iφ_ν})` on `H_N ⊗ H_N`.
pub fn sample_diagonal_gate(n: usize, stream: &mut RandomStream) -> Result<BipartiteOperator> {
    check_dim(n)?;
    let phases: Vec<Complex64> = (0..n * n).map(|_| stream.unit_complex()).collect();
    BipartiteOperator::diagonal(&phases)
}

/// Reshapes the diagonal of a gate into `A_jk = U_{ν ν}`, `ν = jN + k`.
pub fn diagonal_gate_to_unimodular(u: &BipartiteOperator) -> Result<ComplexSquareMatrix> {
    if !u.is_diagonal() {
        return invalid("gate is not diagonal");
    }
    let n = u.factor_dim()?;
    let diag = u.matrix().diagonal_entries();
    ComplexSquareMatrix::from_rows(n, &diag)
}

/// Haar-random unit vector of length `N`.
pub fn sample_haar_state(n: usize, stream: &mut RandomStream) -> Result<Vec<Complex64>> {
    check_dim(n)?;
    let v: Vec<Complex64> = (0..n).map(|_| stream.complex_normal()).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(v.into_iter().map(|z| z / norm).collect())
}

/// Haar-random unitary of order `N` via QR of a Ginibre matrix with the
/// phases of `R`'s diagonal absorbed into `Q`.
pub fn sample_haar_unitary(n: usize, stream: &mut RandomStream) -> Result<ComplexSquareMatrix> {
    let g = sample_ginibre(n, stream)?;
    let qr = g.into_matrix().qr();
    let (q, r) = qr.unpack();
    let phases = DVector::from_iterator(
        n,
        r.diagonal().iter().map(|d| {
            let m = d.norm();
            if m > 0.0 { d / m } else { Complex64::new(1.0, 0.0) }
        }),
    );
    let mut u: CMatrix = q;
    for (mut col, p) in u.column_iter_mut().zip(phases.iter()) {
        col *= *p;
    }
    ComplexSquareMatrix::new(u)
}
