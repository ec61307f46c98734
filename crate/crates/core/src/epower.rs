//! Entangling power `e_p(U)`: the mean linear entropy `1 − Tr μ²` that a
//! gate produces from Haar-random product states.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::ensembles::{diagonal_gate_to_unimodular, sample_haar_state, unimodular_to_state};
use crate::error::{invalid, Result};
use crate::linalg::{singular_values, ComplexSquareMatrix};
use crate::rng::{monte_carlo, RandomStream};
use crate::schmidt::BipartiteOperator;

/// Default number of product states per estimate.
pub const DEFAULT_SAMPLES: u64 = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EpowerReport {
    /// Factor dimension `N` of the gate on `H_N ⊗ H_N`.
    pub dimension: usize,
    /// Whether the gate is diagonal in the product basis.
    pub diagonal: bool,
    pub estimate: f64,
    pub std_err: f64,
    /// Exact `e_p` when known in closed form (diagonal gates).
    pub analytic: Option<f64>,
    pub samples: u64,
}

impl EpowerReport {
    /// Whether the estimate lies within `sigmas` standard errors of the closed form.
    pub fn agrees(&self, sigmas: f64) -> Option<bool> {
        self.analytic.map(|a| (self.estimate - a).abs() <= sigmas * self.std_err)
    }
}

/// `1 − Tr μ²` with `μ` the reduced state on the first factor, from the
/// Schmidt values of the amplitudes reshaped to `N × N`.
pub fn linear_entanglement(psi: &[Complex64], n: usize) -> Result<f64> {
    if n == 0 || psi.len() != n * n {
        return invalid(format!("state of length {} does not live on {n}x{n}", psi.len()));
    }
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-12 {
        return invalid(format!("state has squared norm {norm}, expected 1"));
    }
    let amplitudes = ComplexSquareMatrix::from_rows(n, psi)?;
    let purity: f64 = singular_values(&amplitudes).iter().map(|s| s.powi(4)).sum();
    Ok((1.0 - purity).max(0.0))
}

fn entanglement_after(u: &BipartiteOperator, n: usize, s: &mut RandomStream) -> f64 {
    let a = sample_haar_state(n, s).expect("positive dimension");
    let b = sample_haar_state(n, s).expect("positive dimension");
    let product = DVector::from_iterator(n * n, a.iter().flat_map(|x| b.iter().map(move |y| x * y)));
    let out = u.matrix().as_matrix() * product;
    // renormalize away the rounding drift so the norm check is meaningful
    let norm = out.norm();
    let psi: Vec<Complex64> = out.iter().map(|z| z / norm).collect();
    linear_entanglement(&psi, n).expect("unit state")
}

/// Monte Carlo `e_p(U)` over `samples` product states. The stream supplies
/// one seed; sample `i` then draws from its own substream.
pub fn entangling_power_mc(u: &BipartiteOperator, samples: u64, stream: &mut RandomStream) -> Result<EpowerReport> {
    let n = u.factor_dim()?;
    if samples == 0 {
        return invalid("sample count must be at least 1");
    }
    let residual = u.matrix().unitarity_residual();
    if residual > 1e-9 {
        return invalid(format!("gate is not unitary (residual {residual:e})"));
    }
    let seed = stream.next_u64();
    let est = monte_carlo(samples, seed, 1, |s, out| out[0] = entanglement_after(u, n, s))[0];
    let diagonal = u.is_diagonal();
    let analytic = if diagonal { Some(1.0 - diag_gate_avg_purity(u)?) } else { None };
    Ok(EpowerReport { dimension: n, diagonal, estimate: est.mean, std_err: est.std_err, analytic, samples })
}

/// Product-state average of `Tr μ²` for a diagonal gate:
/// `(N² + 2N³ + N⁴ Tr ρ²)/(N²(N+1)²)` with `ρ` built from the reshaped diagonal.
pub fn diag_gate_avg_purity(u: &BipartiteOperator) -> Result<f64> {
    let a = diagonal_gate_to_unimodular(u)?;
    let purity = unimodular_to_state(&a)?.purity();
    let n = u.factor_dim()? as f64;
    let n2 = n * n;
    Ok((n2 + 2.0 * n2 * n + n2 * n2 * purity) / (n2 * (n + 1.0).powi(2)))
}

/// Phase-averaged entangling power of diagonal gates, `((N−1)/(N+1))²`.
pub fn mean_epower_diag(n: u64) -> f64 {
    let n = n as f64;
    ((n - 1.0) / (n + 1.0)).powi(2)
}

/// Haar-averaged entangling power, `(N−1)²/(N²+1)`.
pub fn mean_epower_haar(n: u64) -> f64 {
    let n = n as f64;
    (n - 1.0).powi(2) / (n * n + 1.0)
}
