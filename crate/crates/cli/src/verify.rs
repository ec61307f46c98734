//! Self-checks run by `diaggate verify`. Sample counts are kept small so a
//! full run finishes in seconds; statistical checks allow four standard errors.

use clap::ValueEnum;
use diaggate::contradiag::{
    contradiagonalize, majorization_chain_check, max_offdiag_weight, prescribe_diagonal,
};
use diaggate::ensembles::{
    diagonal_gate_to_unimodular, sample_diagonal_gate, sample_ginibre, sample_haar_state, sample_haar_unitary,
    sample_hs_state,
};
use diaggate::epower::{entangling_power_mc, linear_entanglement, mean_epower_diag, mean_epower_haar};
use diaggate::linalg::{ComplexSquareMatrix, DensityMatrix};
use diaggate::moments::{
    borel_triangle, borel_triangle_sum, catalan_number, catalan_triangle, count_doublet_words, hs_mean_entropy,
    hs_mean_entropy_exact, hs_moment, to_f64, ue_mean_entropy, ue_moment, ue_moment_reports, ue_polynomial,
    ue_scaled_moment,
};
use diaggate::rng::{monte_carlo, Estimate, RandomStream};
use diaggate::schmidt::{
    gate_entanglement_entropy, operator_schmidt_decomposition, recompose, schmidt_spectrum, BipartiteOperator,
    DEFAULT_RANK_TOL,
};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;

use crate::commands::sample_gate_entropy;
use crate::dataset::{Dataset, RunManifest};
use crate::error::CliError;

const SIGMAS: f64 = 4.0;
const MC_SAMPLES: u64 = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Moments,
    Entropy,
    Schmidt,
    Contradiag,
    Epower,
    Combinatorics,
    All,
}

impl Suite {
    const EACH: [Suite; 6] =
        [Suite::Moments, Suite::Entropy, Suite::Schmidt, Suite::Contradiag, Suite::Epower, Suite::Combinatorics];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Moments => "moments",
            Suite::Entropy => "entropy",
            Suite::Schmidt => "schmidt",
            Suite::Contradiag => "contradiag",
            Suite::Epower => "epower",
            Suite::Combinatorics => "combinatorics",
            Suite::All => "all",
        }
    }
}

/// One comparison `|value − target| ≤ tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn deviation(&self) -> f64 {
        (self.value - self.target).abs()
    }

    /// Positive when passing.
    pub fn margin(&self) -> f64 {
        self.tolerance - self.deviation()
    }

    pub fn pass(&self) -> bool {
        self.deviation() <= self.tolerance
    }
}

struct Checks {
    suite: &'static str,
    out: Vec<Check>,
}

impl Checks {
    fn new(suite: Suite) -> Self {
        Self { suite: suite.name(), out: Vec::new() }
    }

    fn close(&mut self, name: String, value: f64, target: f64, tolerance: f64) {
        self.out.push(Check { suite: self.suite, name, value, target, tolerance });
    }

    fn exact(&mut self, name: String, mismatches: usize) {
        self.close(name, mismatches as f64, 0.0, 0.0);
    }

    fn statistical(&mut self, name: String, est: Estimate, target: f64) {
        self.close(name, est.mean, target, SIGMAS * est.std_err);
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn combinatorics(c: &mut Checks) -> Result<(), CliError> {
    let mut borel = 0;
    let mut catalan = 0;
    let mut poly = 0;
    for n in 0..=20u64 {
        for k in 0..=n {
            borel += usize::from(borel_triangle(n, k)? != borel_triangle_sum(n, k)?);
        }
        catalan += usize::from(catalan_triangle(n, n)? != catalan_number(n));
        let row: num_bigint::BigUint = (0..=n).map(|k| catalan_triangle(n, k)).sum::<diaggate::Result<_>>()?;
        catalan += usize::from(row != catalan_number(n + 1));
        catalan += usize::from(borel_triangle(n, 0)? != catalan_number(n + 1));
        if n >= 1 {
            let p = ue_polynomial(n)?;
            poly += usize::from(p.iter().sum::<BigInt>() != BigInt::from(1));
            poly += usize::from(p.last() != Some(&BigInt::from(catalan_number(n))));
        }
    }
    c.exact("borel closed form equals catalan-triangle sum, n<=20".into(), borel);
    c.exact("catalan triangle diagonal, row sums and borel first column, n<=20".into(), catalan);
    c.exact("moment polynomial is 1 at N=1 with leading Catalan coefficient, n<=20".into(), poly);

    let mut words = 0;
    for (dim, n) in [(2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (3, 4), (4, 3)] {
        let scaled = ue_moment(n, dim)? * BigRational::from_integer(BigInt::from(dim).pow(2 * (n as u32 - 1)));
        words += usize::from(BigRational::from_integer(count_doublet_words(dim, n)?.into()) != scaled);
    }
    c.exact("doublet-word counts equal N^(2n-2) times the moments".into(), words);
    Ok(())
}

fn moments(c: &mut Checks, seed: u64) -> Result<(), CliError> {
    let seq: Vec<BigRational> = (1..=5u64)
        .map(|n| Ok(ue_scaled_moment(n, 3)? * q(3, 1).pow(n as i32 - 1)))
        .collect::<diaggate::Result<_>>()?;
    let expected: Vec<BigRational> = [1, 5, 29, 181, 1181].into_iter().map(|v| q(v, 1)).collect();
    c.exact("N=3 scaled moments 1, 5, 29, 181, 1181".into(), usize::from(seq != expected));
    c.exact("N=3 second moment is 5/9".into(), usize::from(ue_moment(2, 3)? != q(5, 9)));

    for dim in [2u64, 3, 4] {
        for r in ue_moment_reports(dim, 4, MC_SAMPLES, seed ^ dim)?.into_iter().skip(1) {
            let est = Estimate { mean: r.estimate, std_err: r.std_err, samples: r.samples };
            c.statistical(format!("unimodular Tr rho^{} at N={dim}", r.order), est, to_f64(&r.analytic));
        }
    }
    for order in [2u64, 3] {
        let est = monte_carlo(MC_SAMPLES, seed.wrapping_add(order), 1, |s, out| {
            let rho = sample_hs_state(3, s).expect("positive dimension");
            out[0] = rho.eigenvalues().iter().map(|l| l.powi(order as i32)).sum();
        })[0];
        c.statistical(format!("Hilbert-Schmidt Tr rho^{order} at N=3"), est, to_f64(&hs_moment(order, 3)?));
    }
    Ok(())
}

fn entropy(c: &mut Checks, seed: u64) -> Result<(), CliError> {
    c.close("closed form at N=2 is ln 4 - 1".into(), ue_mean_entropy(2), 4f64.ln() - 1.0, 1e-14);
    c.close("Hilbert-Schmidt entropy at N=2 is 1/3".into(), hs_mean_entropy(2), 1.0 / 3.0, 1e-14);
    for dim in 2..=6 {
        c.close(
            format!("Hilbert-Schmidt entropy at N={dim} matches its exact rational"),
            hs_mean_entropy(dim),
            to_f64(&hs_mean_entropy_exact(dim)?),
            1e-12,
        );
    }
    let est = sample_gate_entropy(2, 1.0, MC_SAMPLES, seed)?;
    c.statistical("gate entropy at N=2 within 4 sigma".into(), est, ue_mean_entropy(2));
    // Beyond N=2 the closed form is an interpolation; only the 1/sqrt(samples) bound applies.
    let bound = 1.0 / (MC_SAMPLES as f64).sqrt();
    for dim in 3..=6 {
        let est = sample_gate_entropy(dim, 1.0, MC_SAMPLES, seed ^ dim)?;
        c.close(format!("gate entropy at N={dim} within 1/sqrt(samples)"), est.mean, ue_mean_entropy(dim), bound);
    }
    let est = monte_carlo(MC_SAMPLES, seed.wrapping_add(7), 1, |s, out| {
        out[0] = sample_hs_state(3, s).expect("positive dimension").von_neumann_entropy();
    })[0];
    c.statistical("Hilbert-Schmidt state entropy at N=3".into(), est, hs_mean_entropy(3));
    Ok(())
}

fn schmidt(c: &mut Checks, seed: u64) -> Result<(), CliError> {
    for n in 2..=6usize {
        let s = gate_entanglement_entropy(&diaggate::schmidt::fourier_gate(n * n)?, 1.0)?;
        c.close(format!("Fourier gate entropy at N={n} is 2 ln N"), s, 2.0 * (n as f64).ln(), 1e-10);
    }
    let one = Complex64::new(1.0, 0.0);
    let cz = BipartiteOperator::diagonal(&[one, one, one, -one])?;
    c.close("controlled-Z entropy is ln 2".into(), gate_entanglement_entropy(&cz, 1.0)?, 2f64.ln(), 1e-12);

    let mut s = RandomStream::new(seed, 0);
    let a = sample_haar_unitary(3, &mut s)?;
    let b = sample_haar_unitary(3, &mut s)?;
    let local = BipartiteOperator::product(&a, &b);
    c.close("product gate has Schmidt rank 1".into(), schmidt_spectrum(&local)?.rank(DEFAULT_RANK_TOL) as f64, 1.0, 0.0);

    let u = BipartiteOperator::symmetric(sample_haar_unitary(9, &mut s)?)?;
    let terms = operator_schmidt_decomposition(&u, DEFAULT_RANK_TOL)?;
    let err = recompose(&terms, 3).max_abs_diff(u.matrix());
    c.close("decomposition of a Haar gate recomposes".into(), err, 0.0, 1e-9);
    c.close("Schmidt coefficients of a unitary sum to N^2".into(), schmidt_spectrum(&u)?.total(), 9.0, 1e-9);

    let g = sample_diagonal_gate(4, &mut s)?;
    let rank = schmidt_spectrum(&g)?.rank(DEFAULT_RANK_TOL);
    c.close("generic diagonal gate has Schmidt rank N".into(), rank as f64, 4.0, 0.0);
    let purity = diagonal_gate_to_unimodular(&g).and_then(|a| diaggate::ensembles::unimodular_to_state(&a))?.purity();
    let schmidt_purity: f64 = schmidt_spectrum(&g)?.probabilities()?.values().iter().map(|l| l * l).sum();
    c.close("diagonal gate Schmidt vector equals spectrum of AA^dag/N^2".into(), schmidt_purity, purity, 1e-12);
    Ok(())
}

fn random_hermitian(n: usize, s: &mut RandomStream) -> Result<ComplexSquareMatrix, CliError> {
    let g = sample_ginibre(n, s)?;
    Ok(ComplexSquareMatrix::new((g.as_matrix() + g.as_matrix().adjoint()).scale(0.5))?)
}

fn contradiag(c: &mut Checks, seed: u64) -> Result<(), CliError> {
    let mut s = RandomStream::new(seed, 1);
    let mut worst_f: f64 = 0.0;
    let mut worst_spread: f64 = 0.0;
    for n in 2..=8 {
        for _ in 0..20 {
            let h = random_hermitian(n, &mut s)?;
            let r = contradiagonalize(&h, None)?;
            worst_f = worst_f.max((r.offdiag_weight - max_offdiag_weight(&h)?).abs());
            worst_spread = worst_spread.max(r.diagonal_spread());
        }
    }
    c.close("Fourier rotation attains f_max, N=2..8".into(), worst_f, 0.0, 1e-8);
    c.close("rotated diagonal is flat, N=2..8".into(), worst_spread, 0.0, 1e-8);

    let mut chains = 0;
    for n in [2, 3, 4, 6] {
        for _ in 0..20 {
            let sigma = sample_hs_state(n, &mut s)?;
            let flat = contradiagonalize(&sigma.to_square(), None)?.matrix;
            let herm = (flat.as_matrix() + flat.as_matrix().adjoint()).scale(0.5);
            let state = DensityMatrix::new(ComplexSquareMatrix::new(herm)?)?;
            let u = sample_haar_unitary(n, &mut s)?;
            chains += usize::from(!majorization_chain_check(&state, &u)?);
        }
    }
    c.exact("majorization chain through a contradiagonal state".into(), chains);

    let mut worst_diag: f64 = 0.0;
    for n in 2..=6 {
        let h = random_hermitian(n, &mut s)?;
        let eig = diaggate::linalg::eig_hermitian(&h)?.values;
        let mean = eig.iter().sum::<f64>() / n as f64;
        let t = s.uniform();
        let x: Vec<f64> = eig.iter().rev().map(|y| t * y + (1.0 - t) * mean).collect();
        let v = prescribe_diagonal(&h, &x)?;
        let d = (v.as_matrix() * h.as_matrix() * v.as_matrix().adjoint()).diagonal();
        worst_diag = worst_diag.max(d.iter().zip(&x).map(|(z, t)| (z.re - t).abs()).fold(0.0, f64::max));
    }
    c.close("prescribed diagonals are reached".into(), worst_diag, 0.0, 1e-9);
    Ok(())
}

fn product_state(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// `E[1 − Tr μ²]` with the gate redrawn for every product state.
fn averaged_epower(n: usize, seed: u64, gate: fn(usize, &mut RandomStream) -> ComplexSquareMatrix) -> Estimate {
    monte_carlo(MC_SAMPLES, seed, 1, |s, out| {
        let u = gate(n, s);
        let a = sample_haar_state(n, s).expect("positive dimension");
        let b = sample_haar_state(n, s).expect("positive dimension");
        let psi = nalgebra::DVector::from_vec(product_state(&a, &b));
        let phi = u.as_matrix() * psi;
        out[0] = linear_entanglement(phi.as_slice(), n).expect("normalized state");
    })[0]
}

fn epower(c: &mut Checks, seed: u64) -> Result<(), CliError> {
    for n in [2usize, 3] {
        let est = averaged_epower(n, seed ^ n as u64, |n, s| {
            sample_diagonal_gate(n, s).expect("positive dimension").into_matrix()
        });
        c.statistical(format!("diagonal gates at N={n}: mean e_p = ((N-1)/(N+1))^2"), est, mean_epower_diag(n as u64));
    }
    let est = averaged_epower(2, seed.wrapping_add(11), |n, s| {
        sample_haar_unitary(n * n, s).expect("positive dimension")
    });
    c.statistical("Haar gates at N=2: mean e_p = (N-1)^2/(N^2+1)".into(), est, mean_epower_haar(2));

    let mut s = RandomStream::new(seed, 2);
    for n in [2usize, 3, 4] {
        let g = sample_diagonal_gate(n, &mut s)?;
        let r = entangling_power_mc(&g, MC_SAMPLES, &mut s)?;
        let analytic = r.analytic.expect("diagonal gates have a closed form");
        let est = Estimate { mean: r.estimate, std_err: r.std_err, samples: r.samples };
        c.statistical(format!("fixed diagonal gate at N={n} matches its closed form"), est, analytic);
    }
    Ok(())
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<Check>, CliError> {
    if suite == Suite::All {
        let mut all = Vec::new();
        for s in Suite::EACH {
            all.extend(run_suite(s, seed)?);
        }
        return Ok(all);
    }
    let mut c = Checks::new(suite);
    match suite {
        Suite::Moments => moments(&mut c, seed)?,
        Suite::Entropy => entropy(&mut c, seed)?,
        Suite::Schmidt => schmidt(&mut c, seed)?,
        Suite::Contradiag => contradiag(&mut c, seed)?,
        Suite::Epower => epower(&mut c, seed)?,
        Suite::Combinatorics => combinatorics(&mut c)?,
        Suite::All => unreachable!("handled above"),
    }
    Ok(c.out)
}

pub fn report(suite: Suite, seed: u64, checks: &[Check]) -> Dataset {
    let manifest = RunManifest::new("verify", Some(seed))
        .param("suite", suite.name())
        .param("samples", MC_SAMPLES);
    let mut data = Dataset::new(
        manifest,
        &["suite", "check", "value", "target", "deviation", "tolerance", "margin", "pass"],
    );
    for ch in checks {
        data.push(vec![
            ch.suite.into(),
            ch.name.clone().into(),
            ch.value.into(),
            ch.target.into(),
            ch.deviation().into(),
            ch.tolerance.into(),
            ch.margin().into(),
            ch.pass().into(),
        ]);
    }
    let passed = checks.iter().filter(|c| c.pass()).count();
    data.summarize("checks", checks.len());
    data.summarize("passed", passed);
    data.summarize("all_pass", passed == checks.len());
    data
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins() {
        let c = Check { suite: "x", name: "y".into(), value: 1.5, target: 1.0, tolerance: 1.0 };
        assert!(c.pass());
        assert_eq!(c.margin(), 0.5);
        let exact = Check { tolerance: 0.0, value: 0.0, target: 0.0, ..c.clone() };
        assert!(exact.pass());
        assert!(!Check { value: 1.0, ..exact }.pass());
    }

    #[test]
    fn exact_suites_pass() {
        for suite in [Suite::Combinatorics, Suite::Schmidt, Suite::Contradiag] {
            let checks = run_suite(suite, 5).unwrap();
            assert!(!checks.is_empty());
            for c in checks {
                assert!(c.pass(), "{c:?}");
            }
        }
    }
}
