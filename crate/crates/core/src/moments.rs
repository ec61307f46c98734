//! Exact combinatorics and closed-form statistics of the unimodular ensemble.
//!
//! Triangles and polynomial moments are exact (`BigUint` / `BigRational`);
//! floating point appears only in the analytic continuation, the entropies
//! and the limiting densities.
//!
//! The all-order moment formula [`ue_moment`] and the doublet-word identity
//! behind [`count_doublet_words`] are conjectures: they are proven for
//! `n ≤ 4` and checked numerically and combinatorially beyond that.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use statrs::function::gamma::ln_gamma;

use crate::ensembles::{sample_unimodular, unimodular_to_state};
use crate::error::{invalid, Error, Result};
use crate::quad::integrate;
use crate::rng::{monte_carlo, Estimate};

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `C_k = binom(2k, k)/(k+1)`.
pub fn catalan_number(k: u64) -> BigUint {
    binomial(2 * k, k) / (k + 1)
}

fn check_triangle_index(n: u64, k: u64) -> Result<()> {
    if k > n {
        invalid(format!("triangle index k={k} exceeds n={n}"))
    } else {
        Ok(())
    }
}

/// Catalan's triangle `C_{n,k} = (n+k)!(n−k+1)/(k!(n+1)!)`.
pub fn catalan_triangle(n: u64, k: u64) -> Result<BigUint> {
    check_triangle_index(n, k)?;
    Ok(factorial(n + k) * (n - k + 1) / (factorial(k) * factorial(n + 1)))
}

/// Borel's triangle, `f_{n,k} = binom(2n+2, n−k)·binom(n+k, k)/(n+1)`.
pub fn borel_triangle(n: u64, k: u64) -> Result<BigUint> {
    check_triangle_index(n, k)?;
    Ok(binomial(2 * n + 2, n - k) * binomial(n + k, k) / (n + 1))
}

/// Borel's triangle from Catalan's, `f_{n,k} = Σ_s binom(s, k)·C_{n,s}`.
pub fn borel_triangle_sum(n: u64, k: u64) -> Result<BigUint> {
    check_triangle_index(n, k)?;
    (k..=n).try_fold(BigUint::zero(), |acc, s| Ok(acc + binomial(s, k) * catalan_triangle(n, s)?))
}

fn check_positive(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        invalid(format!("{name} must be at least 1"))
    } else {
        Ok(())
    }
}

/// Coefficients of `P_n(N) = N^{2(n−1)}⟨Tr ρⁿ⟩_UE`, indexed by power of `N`
/// (entry `j` multiplies `N^j`). Signs alternate; the leading one is `C_n`.
pub fn ue_polynomial(n: u64) -> Result<Vec<BigInt>> {
    check_positive("moment order", n)?;
    let mut coeffs = vec![BigInt::zero(); n as usize];
    for k in 0..n {
        let f = BigInt::from(borel_triangle(n - 1, k)?);
        coeffs[(n - 1 - k) as usize] = if k % 2 == 0 { f } else { -f };
    }
    Ok(coeffs)
}

fn eval_poly(coeffs: &[BigInt], x: u64) -> BigInt {
    let x = BigInt::from(x);
    coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * &x + c)
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// Conjectured `⟨Tr ρⁿ⟩_UE = N^{−2(n−1)} Σ_k (−1)^k f_{n−1,k} N^{n−k−1}`.
pub fn ue_moment(n: u64, dim: u64) -> Result<BigRational> {
    check_positive("dimension", dim)?;
    let p = eval_poly(&ue_polynomial(n)?, dim);
    Ok(ratio(p, BigInt::from(dim).pow(2 * (n - 1))))
}

/// Scaled moment `M_n = N^{n−1}⟨Tr ρⁿ⟩_UE` of `x = Nλ`.
pub fn ue_scaled_moment(n: u64, dim: u64) -> Result<BigRational> {
    Ok(ue_moment(n, dim)? * BigRational::from_integer(BigInt::from(dim).pow(n - 1)))
}

/// `⟨Tr ρ²⟩_HS = 2N/(N²+1)` and `⟨Tr ρ³⟩_HS = (5N²+1)/((N²+1)(N²+2))`.
pub fn hs_moment(n: u64, dim: u64) -> Result<BigRational> {
    check_positive("dimension", dim)?;
    let d = BigInt::from(dim);
    let d2 = &d * &d;
    match n {
        2 => Ok(ratio(BigInt::from(2) * &d, &d2 + 1)),
        3 => Ok(ratio(BigInt::from(5) * &d2 + 1, (&d2 + 1) * (&d2 + 2))),
        _ => Err(Error::UnsupportedOrder(n as u32)),
    }
}

/// Power series of ₂F₁(a, b; c; z), terminating when `b` is a nonpositive
/// integer and truncated at relative term size 1e-17 otherwise.
fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 0..100_000u32 {
        let m = m as f64;
        term *= (a + m) * (b + m) / ((c + m) * (m + 1.0)) * z;
        sum += term;
        if term == 0.0 || (term.abs() < 1e-17 * sum.abs() && m > 2.0) {
            break;
        }
    }
    sum
}

/// Moments continued to real powers,
/// `f(x) = N^{1−x} Γ(2x+1)/(Γ(x+1)Γ(x+2)) ₂F₁(x, 1−x; 2+x; 1/N)`.
///
/// Agrees with [`ue_moment`] at integers and with `⟨Σ_i λ_i^x⟩_UE` for all
/// `x` when `N ≤ 2`. For `N ≥ 3` it is an interpolation only: at `x = 1/2`
/// it falls short of the ensemble average by about 3e-3.
pub fn ue_moment_continued(x: f64, dim: u64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return invalid(format!("power must be positive, got {x}"));
    }
    check_positive("dimension", dim)?;
    if dim == 1 {
        // Gauss's summation at z = 1 cancels the gamma prefactor exactly.
        return Ok(1.0);
    }
    let n = dim as f64;
    let prefactor = (ln_gamma(2.0 * x + 1.0) - ln_gamma(x + 1.0) - ln_gamma(x + 2.0)).exp();
    Ok(n.powf(1.0 - x) * prefactor * hyp2f1_series(x, 1.0 - x, 2.0 + x, 1.0 / n))
}

/// `−f'(1)` for the continuation [`ue_moment_continued`]:
/// `ln N − (N−1) − (N−1)² ln((N−1)/N)`.
///
/// This is the mean von Neumann entropy of `ρ = AA^†/N²` exactly for
/// `N ≤ 2`. For `N ≥ 3` it sits below the ensemble mean by a few 1e-4
/// (0.720473 against 0.721119 at `N = 3`).
pub fn ue_mean_entropy(dim: u64) -> f64 {
    if dim <= 1 {
        return 0.0;
    }
    let n = dim as f64;
    let m = n - 1.0;
    n.ln() - m - m * m * (-1.0 / n).ln_1p()
}

/// Page's mean entropy for Hilbert-Schmidt states, `Σ_{k=N+1}^{N²} 1/k − (N−1)/(2N)`.
pub fn hs_mean_entropy(dim: u64) -> f64 {
    let n = dim as f64;
    let harmonic: f64 = (dim + 1..=dim * dim).rev().map(|k| 1.0 / k as f64).sum();
    harmonic - (n - 1.0) / (2.0 * n)
}

/// [`hs_mean_entropy`] as an exact rational.
pub fn hs_mean_entropy_exact(dim: u64) -> Result<BigRational> {
    check_positive("dimension", dim)?;
    let harmonic = (dim + 1..=dim * dim).fold(BigRational::zero(), |acc, k| {
        acc + ratio(BigInt::one(), BigInt::from(k))
    });
    Ok(harmonic - ratio(BigInt::from(dim - 1), BigInt::from(2 * dim)))
}

/// Asymptotic Schmidt strength of Haar-random gates, `2 ln N − 1/2`.
pub fn haar_gate_entropy_reference(dim: u64) -> f64 {
    2.0 * (dim as f64).ln() - 0.5
}

/// Closed-form cumulants `κ_1..κ_5` of `x = Nλ`.
pub fn ue_cumulants(dim: u64) -> Result<Vec<BigRational>> {
    check_positive("dimension", dim)?;
    let n = BigInt::from(dim);
    let one = BigInt::one();
    let m1 = &n - &one;
    let m2 = &n - BigInt::from(2);
    let n_pow = |e: u32| BigInt::from(dim).pow(e);
    Ok(vec![
        BigRational::one(),
        ratio(m1.clone(), n.clone()),
        ratio(&m1 * &m2, n_pow(2)),
        ratio(-(&m1 * (BigInt::from(4) * &n - BigInt::from(5))), n_pow(3)),
        ratio(
            -(&m1 * &m2 * (BigInt::from(4) * &n * &n + BigInt::from(2) * &n - BigInt::from(7))),
            n_pow(4),
        ),
    ])
}

/// Cumulants from raw moments `M_1..M_k` (`M_0 = 1` implied):
/// `κ_n = M_n − Σ_{m<n} binom(n−1, m−1) κ_m M_{n−m}`.
pub fn cumulants_from_moments(moments: &[BigRational]) -> Vec<BigRational> {
    let mut kappa: Vec<BigRational> = Vec::with_capacity(moments.len());
    for n in 1..=moments.len() {
        let mut k = moments[n - 1].clone();
        for m in 1..n {
            let b = BigRational::from_integer(BigInt::from(binomial((n - 1) as u64, (m - 1) as u64)));
            k -= b * &kappa[m - 1] * &moments[n - m - 1];
        }
        kappa.push(k);
    }
    kappa
}

/// Marchenko-Pastur density `(1/π)√(1/x − 1/4)` on `(0, 4]`.
pub fn mp_density(x: f64) -> f64 {
    if x > 0.0 && x <= 4.0 {
        (1.0 / x - 0.25).max(0.0).sqrt() / PI
    } else {
        0.0
    }
}

/// Moments of the Marchenko-Pastur law are the Catalan numbers.
pub fn mp_moment(n: u64) -> BigUint {
    catalan_number(n)
}

/// `P(X ≤ x)` for the Marchenko-Pastur law: with `x = 4 sin²θ`,
/// `(2/π)(θ + sinθ cosθ)`.
pub fn mp_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 4.0 {
        return 1.0;
    }
    let t = (x / 4.0).sqrt().asin();
    2.0 / PI * (t + t.sin() * t.cos())
}

/// `∫ g(x) P_MP(x) dx`, integrated in `θ` with `x = 4 sin²θ` so the
/// endpoint singularity disappears (`P_MP dx = (4/π) cos²θ dθ`).
pub fn mp_expectation(g: impl Fn(f64) -> f64) -> f64 {
    integrate(
        |t: f64| {
            let s = t.sin();
            4.0 / PI * t.cos().powi(2) * g(4.0 * s * s)
        },
        0.0,
        PI / 2.0,
        1e-13,
    )
}

/// Arcsine density `1/(π√(x(2−x)))` on `(0, 2)`.
pub fn arcsine_density(x: f64) -> f64 {
    if x > 0.0 && x < 2.0 {
        1.0 / (PI * (x * (2.0 - x)).sqrt())
    } else {
        0.0
    }
}

/// `binom(2n, n)/2ⁿ`.
pub fn arcsine_moment(n: u64) -> BigRational {
    ratio(BigInt::from(binomial(2 * n, n)), BigInt::from(2).pow(n))
}

/// `P(X ≤ x) = (2/π) arcsin√(x/2)`.
pub fn arcsine_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        2.0 / PI * (x / 2.0).sqrt().asin()
    }
}

/// `∫ g(x) P_As(x) dx` with `x = 2 sin²θ` (`P_As dx = (2/π) dθ`).
pub fn arcsine_expectation(g: impl Fn(f64) -> f64) -> f64 {
    integrate(
        |t: f64| {
            let s = t.sin();
            2.0 / PI * g(2.0 * s * s)
        },
        0.0,
        PI / 2.0,
        1e-13,
    )
}

/// Largest `N^{2n}` the word enumeration will attempt.
pub const WORD_BUDGET: u64 = 1 << 24;

/// Words of length `2n` over an `N`-letter alphabet that start with the
/// first letter and arise from the empty word by `n` doublet insertions.
///
/// Conjecturally equal to `N^{2(n−1)} ⟨Tr ρⁿ⟩_UE`.
pub fn count_doublet_words(dim: u64, n: u64) -> Result<BigUint> {
    check_positive("alphabet size", dim)?;
    check_positive("word half-length", n)?;
    let within_budget = u32::try_from(2 * n)
        .ok()
        .and_then(|e| dim.checked_pow(e))
        .is_some_and(|s| s <= WORD_BUDGET);
    if !within_budget {
        return Err(Error::ResourceLimit(format!(
            "enumerating words of length {} over {dim} letters",
            2 * n
        )));
    }
    let letters = u8::try_from(dim).map_err(|_| Error::ResourceLimit(format!("alphabet of {dim} letters")))?;
    let mut level: HashSet<Vec<u8>> = HashSet::from([Vec::new()]);
    for _ in 0..n {
        let mut next = HashSet::with_capacity(level.len() * 4);
        for word in &level {
            for pos in 0..=word.len() {
                for c in 0..letters {
                    let mut w = Vec::with_capacity(word.len() + 2);
                    w.extend_from_slice(&word[..pos]);
                    w.extend_from_slice(&[c, c]);
                    w.extend_from_slice(&word[pos..]);
                    next.insert(w);
                }
            }
        }
        level = next;
    }
    Ok(BigUint::from(level.iter().filter(|w| w[0] == 0).count()))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Analytic and sampled moment of one order.
#[derive(Debug, Clone)]
pub struct MomentReport {
    pub order: u64,
    pub dimension: u64,
    /// Conjectured exact `⟨Tr ρⁿ⟩_UE`.
    pub analytic: BigRational,
    /// Sample mean of `Tr ρⁿ`.
    pub estimate: f64,
    pub std_err: f64,
    pub samples: u64,
}

impl MomentReport {
    /// `|estimate − analytic| / std_err`.
    pub fn z_score(&self) -> f64 {
        Estimate { mean: self.estimate, std_err: self.std_err, samples: self.samples }.z_score(to_f64(&self.analytic))
    }

    /// Scale factor `N^{n−1}` taking `Tr ρⁿ` to `M_n`.
    pub fn scale(&self) -> f64 {
        (self.dimension as f64).powi(self.order as i32 - 1)
    }
}

/// Monte Carlo estimates of `Σ λ_i^{x}` over `ρ = AA^†/N²` for each power.
pub fn sample_ue_power_sums(dim: usize, powers: &[f64], samples: u64, seed: u64) -> Result<Vec<Estimate>> {
    if dim == 0 || samples == 0 {
        return invalid("dimension and sample count must be positive");
    }
    Ok(monte_carlo(samples, seed, powers.len(), |s, out| {
        let a = sample_unimodular(dim, s).expect("dim checked");
        let eig = unimodular_to_state(&a).expect("unimodular by construction").spectrum();
        for (o, &p) in out.iter_mut().zip(powers) {
            *o = eig.values().iter().filter(|&&l| l > 0.0).map(|l| l.powf(p)).sum();
        }
    }))
}

/// Reports for orders `1..=n_max` at dimension `dim`.
pub fn ue_moment_reports(dim: u64, n_max: u64, samples: u64, seed: u64) -> Result<Vec<MomentReport>> {
    check_positive("maximum order", n_max)?;
    let powers: Vec<f64> = (1..=n_max).map(|n| n as f64).collect();
    let est = sample_ue_power_sums(dim as usize, &powers, samples, seed)?;
    (1..=n_max)
        .zip(est)
        .map(|(n, e)| {
            Ok(MomentReport {
                order: n,
                dimension: dim,
                analytic: ue_moment(n, dim)?,
                estimate: e.mean,
                std_err: e.std_err,
                samples: e.samples,
            })
        })
        .collect()
}
