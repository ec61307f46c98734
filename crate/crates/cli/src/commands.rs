use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use diaggate::contradiag::{contradiagonalize, enphase, fourier_matrix, max_offdiag_weight};
use diaggate::ensembles::{
    sample_diagonal_gate, sample_ginibre, sample_haar_state, sample_hs_state, sample_unimodular, unimodular_to_state,
    EnsembleConfig, EnsembleKind,
};
use diaggate::linalg::{complex_eigenvalues, renyi_entropy, singular_values, ComplexSquareMatrix};
use diaggate::moments::{hs_mean_entropy, hs_moment, to_f64, ue_mean_entropy, ue_scaled_moment};
use diaggate::rng::{collect_samples, monte_carlo, RandomStream};
use diaggate::schmidt::schmidt_spectrum;

use crate::dataset::{histogram, Dataset, Format, RunManifest, Value};
use crate::error::CliError;
use crate::matrix_io::read_hermitian;
use crate::verify::{self, Suite};

/// Largest moment order the `moments` table accepts.
pub const MAX_MOMENT_ORDER: u64 = 12;

/// Tolerance on `|f(A) − f_max|` for `contradiag`.
pub const CONTRADIAG_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "diaggate", version, about = "Random diagonal gates, unimodular matrices and contradiagonal states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-sample spectra from one ensemble, plus a histogram of the scalar values.
    Sample(SampleArgs),
    /// Exact and sampled moments of the unimodular ensemble.
    Moments(MomentsArgs),
    /// Mean entanglement entropy of random diagonal gates against the closed forms.
    Entropy(EntropyArgs),
    /// Rotate a Hermitian matrix so that its diagonal is flat.
    Contradiag(ContradiagArgs),
    /// Run a suite of numerical checks; exits 1 if any fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to the extension of `--out`, else jsonl.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Output {
    pub fn format(&self) -> Format {
        self.format.unwrap_or_else(|| match self.out.as_deref().and_then(Path::extension) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Jsonl,
        })
    }

    fn emit(&self, data: &Dataset) -> Result<(), CliError> {
        match &self.out {
            Some(path) => data.write(path, self.format()),
            None => {
                print!("{}", data.render(self.format()));
                Ok(())
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct Seed {
    #[arg(long, env = "DIAGGATE_SEED", default_value_t = 0)]
    pub seed: u64,
}

fn parse_kind(s: &str) -> Result<EnsembleKind, String> {
    s.parse().map_err(|e: diaggate::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// unimodular, ginibre, hilbert_schmidt_state, diagonal_gate or haar_pure_state.
    #[arg(long, value_parser = parse_kind)]
    pub kind: EnsembleKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub samples: u64,
    #[command(flatten)]
    pub seed: Seed,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 7)]
    pub n_max: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[command(flatten)]
    pub seed: Seed,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[command(flatten)]
    pub seed: Seed,
    /// Rényi order of the gate entropy; 1 is von Neumann.
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HadamardChoice {
    Fourier,
    /// Fourier matrix with random phases and permutations on both sides.
    Enphased,
}

#[derive(Debug, Args)]
pub struct ContradiagArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = HadamardChoice::Fourier)]
    pub hadamard: HadamardChoice,
    #[command(flatten)]
    pub seed: Seed,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[command(flatten)]
    pub seed: Seed,
    #[command(flatten)]
    pub output: Output,
}

fn require_positive(name: &str, v: u64) -> Result<(), CliError> {
    if v == 0 {
        Err(CliError::Usage(format!("--{name} must be at least 1")))
    } else {
        Ok(())
    }
}

/// Companion path `<stem>.hist.<ext>`.
pub fn histogram_path(out: &Path, format: Format) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.hist.{}", format.extension()))
}

struct SampleRecord {
    value: f64,
    eigenvalue: Option<(f64, f64)>,
}

/// Scalar records for one draw. Matrix ensembles give `s²/N` for the
/// singular values `s` of `A` alongside the eigenvalues of `A/√N`; states
/// give eigenvalues of `ρ`; gates give `Λ/N²`; pure states give `|ψ_i|²`.
fn draw_records(kind: EnsembleKind, n: usize, stream: &mut RandomStream) -> Vec<SampleRecord> {
    let matrix = |a: ComplexSquareMatrix| {
        let scale = (n as f64).sqrt();
        let mut sv = singular_values(&a);
        sv.sort_by(|x, y| y.total_cmp(x));
        let mut eig = complex_eigenvalues(&a);
        eig.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        sv.into_iter()
            .zip(eig)
            .map(|(s, z)| SampleRecord { value: s * s / n as f64, eigenvalue: Some((z.re / scale, z.im / scale)) })
            .collect()
    };
    let scalars = |v: Vec<f64>| v.into_iter().map(|value| SampleRecord { value, eigenvalue: None }).collect();
    match kind {
        EnsembleKind::Unimodular => matrix(sample_unimodular(n, stream).expect("n checked")),
        EnsembleKind::Ginibre => matrix(sample_ginibre(n, stream).expect("n checked")),
        EnsembleKind::HilbertSchmidtState => scalars(sample_hs_state(n, stream).expect("n checked").eigenvalues()),
        EnsembleKind::DiagonalGate => {
            let u = sample_diagonal_gate(n, stream).expect("n checked");
            let spec = schmidt_spectrum(&u).expect("square gate");
            scalars(spec.coefficients().iter().map(|c| c / spec.normalization()).collect())
        }
        EnsembleKind::HaarPureState => {
            scalars(sample_haar_state(n, stream).expect("n checked").iter().map(|z| z.norm_sqr()).collect())
        }
    }
}

pub fn cmd_sample(args: &SampleArgs) -> Result<Vec<(PathBuf, Dataset)>, CliError> {
    let config = EnsembleConfig::new(args.kind, args.n, args.samples, args.seed.seed)?;
    require_positive("bins", args.bins as u64)?;
    let format = Output { out: Some(args.out.clone()), format: args.format }.format();
    let manifest = RunManifest::new("sample", Some(config.seed))
        .param("kind", config.kind.name())
        .param("n", config.dimension)
        .param("samples", config.samples)
        .param("format", format.extension())
        .param("bins", args.bins);

    let draws = collect_samples(config.samples, config.seed, |s| draw_records(config.kind, config.dimension, s));
    let mut data = Dataset::new(manifest.clone(), &["sample", "index", "value", "re", "im"]);
    let mut values = Vec::new();
    for (i, records) in draws.into_iter().enumerate() {
        for (j, r) in records.into_iter().enumerate() {
            let (re, im) = r.eigenvalue.map_or((Value::Null, Value::Null), |(re, im)| (re.into(), im.into()));
            data.push(vec![i.into(), j.into(), r.value.into(), re, im]);
            values.push(r.value);
        }
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    data.summarize("records", values.len());
    data.summarize("mean_value", mean);

    let mut hist = Dataset::new(manifest, &["lo", "hi", "count", "density"]);
    let total = values.len() as f64;
    for (lo, hi, count) in histogram(&values, args.bins) {
        hist.push(vec![lo.into(), hi.into(), count.into(), (count as f64 / (total * (hi - lo))).into()]);
    }
    hist.summarize("records", values.len());
    Ok(vec![(args.out.clone(), data), (histogram_path(&args.out, format), hist)])
}

pub fn cmd_moments(args: &MomentsArgs) -> Result<Dataset, CliError> {
    require_positive("n", args.n)?;
    require_positive("samples", args.samples)?;
    if !(1..=MAX_MOMENT_ORDER).contains(&args.n_max) {
        return Err(CliError::Usage(format!("--n-max must lie in 1..={MAX_MOMENT_ORDER}, got {}", args.n_max)));
    }
    let manifest = RunManifest::new("moments", Some(args.seed.seed))
        .param("n", args.n)
        .param("n_max", args.n_max)
        .param("samples", args.samples);
    let reports = diaggate::moments::ue_moment_reports(args.n, args.n_max, args.samples, args.seed.seed)?;
    let mut data = Dataset::new(
        manifest,
        &["n", "analytic", "exact", "scaled", "mc", "std_err", "z", "hs_analytic"],
    );
    let mut max_z: f64 = 0.0;
    for r in reports {
        let z = r.z_score();
        max_z = max_z.max(z);
        let hs = match r.order {
            2 | 3 => Some(to_f64(&hs_moment(r.order, args.n)?)),
            _ => None,
        };
        data.push(vec![
            r.order.into(),
            to_f64(&r.analytic).into(),
            r.analytic.to_string().into(),
            to_f64(&ue_scaled_moment(r.order, args.n)?).into(),
            r.estimate.into(),
            r.std_err.into(),
            z.into(),
            hs.into(),
        ]);
    }
    data.summarize("max_z", max_z);
    Ok(data)
}

pub struct EntropyOutcome {
    pub data: Dataset,
    /// `None` when no closed form exists for the requested order.
    pub consistent: Option<bool>,
}

/// Mean Rényi-`q` entropy of `ρ = AA^†/N²` over random diagonal gates,
/// equal to the gate's Schmidt entropy.
pub fn sample_gate_entropy(n: u64, q: f64, samples: u64, seed: u64) -> Result<diaggate::rng::Estimate, CliError> {
    require_positive("n", n)?;
    require_positive("samples", samples)?;
    if !(q >= 0.0 && q.is_finite()) {
        return Err(CliError::Usage(format!("--q must be finite and nonnegative, got {q}")));
    }
    Ok(monte_carlo(samples, seed, 1, |s, out| {
        let a = sample_unimodular(n as usize, s).expect("n checked");
        let spectrum = unimodular_to_state(&a).expect("unimodular by construction").spectrum();
        out[0] = renyi_entropy(&spectrum, q).expect("order checked");
    })[0])
}

pub fn cmd_entropy(args: &EntropyArgs) -> Result<EntropyOutcome, CliError> {
    let est = sample_gate_entropy(args.n, args.q, args.samples, args.seed.seed)?;
    let manifest = RunManifest::new("entropy", Some(args.seed.seed))
        .param("n", args.n)
        .param("samples", args.samples)
        .param("q", args.q);
    let von_neumann = args.q == 1.0;
    let ue = von_neumann.then(|| ue_mean_entropy(args.n));
    let hs = von_neumann.then(|| hs_mean_entropy(args.n));
    let threshold = 1.0 / (args.samples as f64).sqrt();
    let difference = ue.map(|a| est.mean - a);
    let consistent = difference.map(|d| d.abs() < threshold);

    let mut data = Dataset::new(
        manifest,
        &["n", "q", "ue_analytic", "hs_analytic", "mc", "std_err", "difference", "threshold", "consistent"],
    );
    data.push(vec![
        args.n.into(),
        args.q.into(),
        ue.into(),
        hs.into(),
        est.mean.into(),
        est.std_err.into(),
        difference.into(),
        threshold.into(),
        consistent.into(),
    ]);
    data.summarize("consistent", consistent);
    Ok(EntropyOutcome { data, consistent })
}

/// Random permutation from sorting uniform keys.
fn random_permutation(n: usize, stream: &mut RandomStream) -> Vec<usize> {
    let keys: Vec<f64> = (0..n).map(|_| stream.uniform()).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    perm
}

pub struct ContradiagOutcome {
    pub data: Dataset,
    pub pass: bool,
}

pub fn cmd_contradiag(args: &ContradiagArgs) -> Result<ContradiagOutcome, CliError> {
    let h = read_hermitian(&args.input)?;
    let n = h.order();
    let fourier = fourier_matrix(n)?;
    let f = match args.hadamard {
        HadamardChoice::Fourier => fourier,
        HadamardChoice::Enphased => {
            let mut s = RandomStream::new(args.seed.seed, 0);
            let left: Vec<f64> = (0..n).map(|_| s.phase()).collect();
            let right: Vec<f64> = (0..n).map(|_| s.phase()).collect();
            let p1 = random_permutation(n, &mut s);
            let p2 = random_permutation(n, &mut s);
            enphase(&fourier, &left, &right, &p1, &p2)?
        }
    };
    let result = contradiagonalize(&h, Some(&f))?;
    let f_max = max_offdiag_weight(&h)?;
    let deviation = (result.offdiag_weight - f_max).abs();
    let pass = deviation <= CONTRADIAG_TOL;

    let manifest = RunManifest::new("contradiag", Some(args.seed.seed))
        .param("input", args.input.display().to_string())
        .param("hadamard", format!("{:?}", args.hadamard).to_lowercase())
        .param("n", n);
    let mut data = Dataset::new(manifest, &["matrix", "row", "col", "re", "im"]);
    for (name, m) in [("A", &result.matrix), ("U_max", &result.unitary)] {
        for r in 0..n {
            for c in 0..n {
                let z = m.get(r, c);
                data.push(vec![name.into(), r.into(), c.into(), z.re.into(), z.im.into()]);
            }
        }
    }
    data.summarize("f", result.offdiag_weight);
    data.summarize("f_max", f_max);
    data.summarize("deviation", deviation);
    data.summarize("diagonal_spread", result.diagonal_spread());
    data.summarize("tolerance", CONTRADIAG_TOL);
    data.summarize("pass", pass);
    Ok(ContradiagOutcome { data, pass })
}

fn stamp(data: &mut Dataset, start: std::time::Instant) {
    data.manifest.duration_secs = start.elapsed().as_secs_f64();
}

/// Runs one invocation; `Ok(false)` means a check ran and failed.
pub fn execute(cli: &Cli) -> Result<bool, CliError> {
    let start = std::time::Instant::now();
    match &cli.command {
        Command::Sample(args) => {
            let format = Output { out: Some(args.out.clone()), format: args.format }.format();
            for (path, mut data) in cmd_sample(args)? {
                stamp(&mut data, start);
                data.write(&path, format)?;
            }
            Ok(true)
        }
        Command::Moments(args) => {
            let mut data = cmd_moments(args)?;
            stamp(&mut data, start);
            args.output.emit(&data)?;
            Ok(true)
        }
        Command::Entropy(args) => {
            let mut outcome = cmd_entropy(args)?;
            stamp(&mut outcome.data, start);
            args.output.emit(&outcome.data)?;
            Ok(outcome.consistent.unwrap_or(true))
        }
        Command::Contradiag(args) => {
            let mut outcome = cmd_contradiag(args)?;
            stamp(&mut outcome.data, start);
            args.output.emit(&outcome.data)?;
            Ok(outcome.pass)
        }
        Command::Verify(args) => {
            let checks = verify::run_suite(args.suite, args.seed.seed)?;
            let mut data = verify::report(args.suite, args.seed.seed, &checks);
            stamp(&mut data, start);
            args.output.emit(&data)?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.pass()).map(|c| c.name.as_str()).collect();
            eprintln!("{} of {} checks passed", checks.len() - failed.len(), checks.len());
            for name in &failed {
                eprintln!("FAILED {name}");
            }
            Ok(failed.is_empty())
        }
    }
}
