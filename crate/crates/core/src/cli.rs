//! Command-line surface.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factorization::{
    compose, equivalence_suite, factorization_identity, random_kernel, Mode,
};
use crate::grow::{amplification_check, grow, GrowTrace};
use crate::hypothesis::{
    granger_statistic, permutation_test, plugin_decomposition, shannon_sit, sit_statistic,
    Decomposer, Direction, GrangerResult, InfluenceConfig, InfluenceTest, MixtureKind,
    MixtureSuite, PermutationScheme, SeriesDecomposition, TestReport, Terms,
};
use crate::mixture::{markov_family, MarkovConfig, WeightScheme};
use crate::rational::{self, Rational};
use crate::semimeasure::{
    interleave, random_bivariate, random_semimeasure, words, Semimeasure, SemimeasureDoc, Side,
};
use crate::sim::{ingest_timeseries, ModelDoc, StructuralModel, TimeseriesPair};

#[derive(Debug, Parser)]
#[command(name = "semicausal", version, about = "Influence tests for discrete timeseries")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output path; standard output when absent.
    #[arg(long, short = 'o', global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PermArg {
    Shuffle,
    Shift,
}

impl From<PermArg> for PermutationScheme {
    fn from(p: PermArg) -> Self {
        match p {
            PermArg::Shuffle => PermutationScheme::Shuffle,
            PermArg::Shift => PermutationScheme::Shift,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct TestArgs {
    /// Timeseries CSV with header `x,y`.
    pub input: PathBuf,
    /// Alphabet size; inferred from the data when absent.
    #[arg(long)]
    pub alphabet: Option<usize>,
    #[arg(long, default_value = "markov:k=1,g=4")]
    pub family: String,
    #[arg(long, default_value = "dyadic")]
    pub weights: String,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = PermArg::Shuffle)]
    pub perm: PermArg,
    /// Attach exact rational sources of the emitted values.
    #[arg(long)]
    pub exact_sidecar: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a structural model and write a timeseries CSV.
    Simulate {
        /// Preset: lag1-copy, independent, instantaneous-copy, shared-bit.
        #[arg(long, default_value = "lag1-copy")]
        model: String,
        /// Model document in JSON, overriding `--model`.
        #[arg(long)]
        model_file: Option<PathBuf>,
        #[arg(long, default_value = "0.9")]
        coupling: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Decompositions, Shannon transfer and Granger on a timeseries.
    Analyze {
        #[command(flatten)]
        args: TestArgs,
    },
    /// One named statistic with its permutation p-value.
    Test {
        #[command(flatten)]
        args: TestArgs,
        /// 7 to 11 (or the test name), sit_y_from_x, sit_x_from_y, granger.
        #[arg(long)]
        name: String,
    },
    /// Run the grow construction on a binary semimeasure.
    Grow {
        /// Semimeasure JSON; a seeded random table when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Length of each series; the tree has depth 2n.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Use the uniform table instead of a seeded random one.
        #[arg(long)]
        uniform: bool,
    },
    /// Materialize a model family and its mixture.
    Mixture {
        #[arg(long, default_value = "markov:k=1,g=2")]
        family: String,
        #[arg(long, default_value = "dyadic")]
        weights: String,
        /// Depth of the materialized tables.
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Run the exact identity suites.
    Selftest {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        cases: usize,
    },
}

/// Resolved configuration embedded in every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: Vec<String>,
    pub family: Option<String>,
    pub weights: Option<String>,
    pub trials: Option<usize>,
    pub permutation: Option<String>,
    pub seed: u64,
    pub output: Option<String>,
    pub arithmetic: &'static str,
    pub format: Format,
}

impl RunConfig {
    fn new(cli: &Cli, command: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            inputs: Vec::new(),
            family: None,
            weights: None,
            trials: None,
            permutation: None,
            seed: cli.seed,
            output: cli.out.as_ref().map(|p| p.display().to_string()),
            arithmetic: "float-export",
            format: cli.format,
        }
    }

    fn with_test_args(mut self, a: &TestArgs) -> Self {
        self.inputs = vec![a.input.display().to_string()];
        self.family = Some(a.family.clone());
        self.weights = Some(a.weights.clone());
        self.trials = Some(a.trials);
        self.permutation = Some(PermutationScheme::from(a.perm).name().to_string());
        if a.exact_sidecar {
            self.arithmetic = "rational";
        }
        self
    }
}

/// Writes through a temporary file in the destination directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("document serializes");
    s.push('\n');
    s
}

fn influence_config(a: &TestArgs) -> Result<InfluenceConfig> {
    let family = MarkovConfig::parse(&a.family)?;
    Ok(InfluenceConfig::from_family(&family, WeightScheme::parse(&a.weights)?))
}

fn load_pair(a: &TestArgs) -> Result<TimeseriesPair> {
    ingest_timeseries(&a.input, a.alphabet)
}

#[derive(Serialize)]
struct ExactTest {
    statistic: String,
    ratio: Option<String>,
}

#[derive(Serialize)]
struct ExactDecomposition {
    label: &'static str,
    #[serde(rename = "I")]
    i: Option<String>,
    #[serde(rename = "T_xy")]
    t_xy: Option<String>,
    #[serde(rename = "T_yx")]
    t_yx: Option<String>,
    #[serde(rename = "T_inst")]
    t_inst: Option<String>,
}

#[derive(Serialize)]
struct ExactSidecar {
    tests: Vec<ExactTest>,
    decomposition: ExactDecomposition,
    /// Values with no exact source.
    float_only: Vec<&'static str>,
}

fn exact_class_terms(suite: &MixtureSuite) -> ExactDecomposition {
    let p = |k: MixtureKind| suite.get(k).probability();
    let ratio = |num: Vec<Rational>, den: Vec<Rational>| -> Option<String> {
        let n: Rational = num.into_iter().product();
        let d: Rational = den.into_iter().product();
        (!num_traits::Zero::is_zero(&d) && !num_traits::Zero::is_zero(&n))
            .then(|| rational::format(&(n / d)))
    };
    use MixtureKind::*;
    ExactDecomposition {
        label: "hypothesis_class",
        i: ratio(vec![p(Joint)], vec![p(X), p(Y)]),
        t_xy: ratio(vec![p(XGivenYCausal)], vec![p(X)]),
        t_yx: ratio(vec![p(YGivenXCausal)], vec![p(Y)]),
        t_inst: ratio(vec![p(Joint)], vec![p(XGivenYCausal), p(YGivenXCausal)]),
    }
}

#[derive(Serialize)]
struct GrangerPair {
    /// Past of y predicting x.
    x_from_y: GrangerResult,
    /// Past of x predicting y.
    y_from_x: GrangerResult,
}

#[derive(Serialize)]
struct AnalyzeDoc {
    config: RunConfig,
    length: usize,
    alphabet: usize,
    reports: Vec<TestReport>,
    decompositions: Vec<SeriesDecomposition>,
    granger: GrangerPair,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<ExactSidecar>,
}

fn ideal_report(
    suite: &MixtureSuite,
    test: InfluenceTest,
    cfg: &InfluenceConfig,
    seed: u64,
) -> Result<TestReport> {
    let v = suite.test(test, false)?;
    let mut flags = test.flags();
    if v.log2.is_none() {
        flags.push("undefined:zero mass in a mixture".into());
    }
    flags.push("decomposition:hypothesis_class".into());
    Ok(TestReport {
        statistic: format!("test{}_{}", test.number(), test.name()),
        value_log2: v.log2,
        terms: Terms::from_decomposition(&suite.class_decomposition()),
        p_value: None,
        trials: 0,
        seed,
        family: cfg.descriptor(),
        flags,
    })
}

fn sit_report(
    pair: &TimeseriesPair,
    order: usize,
    direction: Direction,
    trials: usize,
    seed: u64,
    scheme: PermutationScheme,
) -> Result<TestReport> {
    let d = plugin_decomposition(pair, order)?;
    let perm = permutation_test(
        pair,
        |p| sit_statistic(p, order, direction).map(Some),
        trials,
        seed,
        scheme,
    )?;
    let name = match direction {
        Direction::YFromX => "sit_y_from_x",
        Direction::XFromY => "sit_x_from_y",
    };
    Ok(TestReport {
        statistic: name.into(),
        value_log2: Some(perm.observed),
        terms: Terms::from_decomposition(&d),
        p_value: Some(perm.p_value),
        trials,
        seed,
        family: format!("plugin:k={order}"),
        flags: vec![
            format!("permutation:{}", scheme.name()),
            "units:bits_per_step".into(),
            "decomposition:plug_in".into(),
        ],
    })
}

fn analyze(cli: &Cli, a: &TestArgs) -> Result<String> {
    let pair = load_pair(a)?;
    let cfg = influence_config(a)?;
    let scheme = PermutationScheme::from(a.perm);
    let suite = MixtureSuite::build(&pair, &cfg)?;
    let mut reports = Vec::new();
    for dir in [Direction::YFromX, Direction::XFromY] {
        reports.push(sit_report(&pair, cfg.order, dir, a.trials, cli.seed, scheme)?);
    }
    for t in InfluenceTest::ALL {
        reports.push(ideal_report(&suite, t, &cfg, cli.seed)?);
    }
    let order = cfg.order.max(1);
    let exact = a.exact_sidecar.then(|| -> Result<ExactSidecar> {
        Ok(ExactSidecar {
            tests: InfluenceTest::ALL
                .iter()
                .map(|&t| {
                    Ok(ExactTest {
                        statistic: format!("test{}_{}", t.number(), t.name()),
                        ratio: suite.test(t, true)?.exact.as_ref().map(rational::format),
                    })
                })
                .collect::<Result<_>>()?,
            decomposition: exact_class_terms(&suite),
            float_only: vec!["associated", "plug_in", "granger"],
        })
    });
    let doc = AnalyzeDoc {
        config: RunConfig::new(cli, "analyze").with_test_args(a),
        length: pair.len(),
        alphabet: pair.alphabet(),
        reports,
        decompositions: vec![
            suite.associated_decomposition(),
            suite.class_decomposition(),
            plugin_decomposition(&pair, cfg.order)?,
        ],
        granger: GrangerPair {
            x_from_y: granger_statistic(&pair, order)?,
            y_from_x: granger_statistic(&pair.swapped(), order)?,
        },
        exact: exact.transpose()?,
    };
    Ok(to_json(&doc))
}

#[derive(Serialize)]
struct TestDoc {
    config: RunConfig,
    report: TestReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<ExactTest>,
}

fn run_test(cli: &Cli, a: &TestArgs, name: &str) -> Result<String> {
    let pair = load_pair(a)?;
    let cfg = influence_config(a)?;
    let scheme = PermutationScheme::from(a.perm);
    let config = RunConfig::new(cli, "test").with_test_args(a);
    let (report, exact) = match name {
        "sit_y_from_x" | "sit_x_from_y" => {
            let dir = Direction::parse(&name[4..])?;
            (sit_report(&pair, cfg.order, dir, a.trials, cli.seed, scheme)?, None)
        }
        "granger" => {
            let order = cfg.order.max(1);
            let perm = permutation_test(
                &pair,
                |p| granger_statistic(p, order).map(|g| Some(g.statistic)),
                a.trials,
                cli.seed,
                scheme,
            )?;
            let g = granger_statistic(&pair, order)?;
            let mut flags = vec![
                format!("permutation:{}", scheme.name()),
                "units:mse".into(),
                "direction:x_from_y".into(),
            ];
            if g.rank_deficient {
                flags.push("rank_deficient".into());
            }
            let report = TestReport {
                statistic: "granger".into(),
                value_log2: Some(perm.observed),
                terms: Terms::default(),
                p_value: Some(perm.p_value),
                trials: a.trials,
                seed: cli.seed,
                family: format!("linear:k={order}"),
                flags,
            };
            (report, None)
        }
        other => {
            let test = InfluenceTest::parse(other)?;
            let suite = MixtureSuite::build(&pair, &cfg)?;
            let mut report = ideal_report(&suite, test, &cfg, cli.seed)?;
            let perm = permutation_test(
                &pair,
                |p| Ok(crate::hypothesis::influence_test(p, &cfg, test, false)?.log2),
                a.trials,
                cli.seed,
                scheme,
            );
            match perm {
                Ok(perm) => {
                    report.p_value = Some(perm.p_value);
                    report.trials = a.trials;
                    report.flags.push(format!("permutation:{}", scheme.name()));
                }
                Err(Error::Input(msg)) if report.value_log2.is_none() => {
                    report.flags.push(format!("no_p_value:{msg}"));
                }
                Err(e) => return Err(e),
            }
            let exact = a
                .exact_sidecar
                .then(|| -> Result<ExactTest> {
                    Ok(ExactTest {
                        statistic: report.statistic.clone(),
                        ratio: suite.test(test, true)?.exact.as_ref().map(rational::format),
                    })
                })
                .transpose()?;
            (report, exact)
        }
    };
    Ok(to_json(&TestDoc {
        config,
        report,
        exact,
    }))
}

fn simulate(
    cli: &Cli,
    model: &str,
    model_file: Option<&Path>,
    coupling: &str,
    n: usize,
) -> Result<String> {
    let m = match model_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let doc: ModelDoc = serde_json::from_str(&text)?;
            StructuralModel::from_doc(&doc)?
        }
        None => match model {
            "lag1-copy" => StructuralModel::lag1_copy(coupling)?,
            "independent" => StructuralModel::independent()?,
            "instantaneous-copy" => StructuralModel::instantaneous_copy(coupling)?,
            "shared-bit" => StructuralModel::shared_bit()?,
            other => return Err(Error::input(format!("unknown model preset {other:?}"))),
        },
    };
    Ok(m.simulate(n, cli.seed)?.to_csv_string())
}

#[derive(Serialize)]
struct GrowDoc {
    config: RunConfig,
    trace: serde_json::Value,
    amplification: crate::grow::AmplificationReport,
}

fn run_grow(cli: &Cli, input: Option<&Path>, n: usize, uniform: bool) -> Result<String> {
    let mut config = RunConfig::new(cli, "grow");
    config.arithmetic = "rational";
    let p = match input {
        Some(path) => {
            config.inputs.push(path.display().to_string());
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            Semimeasure::from_json(&text)?
        }
        None if uniform => Semimeasure::uniform(2 * n, 2)?,
        None => random_semimeasure(cli.seed, 2 * n, 2, true, &rational::int(1))?,
    };
    let trace: GrowTrace = grow(&p)?;
    let doc = GrowDoc {
        config,
        trace: serde_json::from_str(&trace.to_json())?,
        amplification: amplification_check(&trace)?,
    };
    Ok(to_json(&doc))
}

#[derive(Serialize)]
struct MixtureOut {
    config: RunConfig,
    family_size: usize,
    mixture: crate::mixture::MixtureDoc,
    materialized: SemimeasureDoc,
    dominance_holds: bool,
}

fn run_mixture(cli: &Cli, family: &str, weights: &str, n: usize) -> Result<String> {
    let cfg = MarkovConfig::parse(family)?;
    let scheme = WeightScheme::parse(weights)?;
    let fam = crate::mixture::ModelFamily::markov(cfg, n)?;
    let m = fam.mixture(&scheme)?;
    let mut config = RunConfig::new(cli, "mixture");
    config.family = Some(cfg.descriptor());
    config.weights = Some(scheme.tag().into());
    config.arithmetic = "rational";
    let doc = MixtureOut {
        config,
        family_size: fam.len(),
        mixture: m.to_doc(&cfg.descriptor()),
        materialized: m.materialize()?.to_doc(),
        dominance_holds: m.dominance()?.holds,
    };
    Ok(to_json(&doc))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub config: RunConfig,
    pub depth: usize,
    pub suites: Vec<SuiteResult>,
    pub ok: bool,
}

/// Exact identity suites over seeded inputs of depth `n`.
pub fn selftest_suites(n: usize, cases: usize, seed: u64) -> Result<Vec<SuiteResult>> {
    if n == 0 || n > 5 {
        return Err(Error::input("selftest depth must be between 1 and 5"));
    }
    let mut fact = 0;
    let mut dec = 0;
    let mut shannon = 0;
    let mut equiv = 0;
    let mut amp = 0;
    let total = rational::rat(7, 8);
    for c in 0..cases as u64 {
        let s = seed.wrapping_mul(1_000_003).wrapping_add(c);
        let p = random_bivariate(s, n, 2, true, &total)?;
        if !factorization_identity(&p)?.holds {
            fact += 1;
        }
        let d = Decomposer::new(&p)?;
        let pairs: Vec<_> = words(n, 2).collect();
        let mut bad = false;
        for x in &pairs {
            for y in &pairs {
                if d.at(x, y)?.identity_holds() != Some(true) {
                    bad = true;
                }
            }
        }
        dec += bad as usize;
        if !shannon_sit(&p)?.identity_exact {
            shannon += 1;
        }
        let marginal = random_semimeasure(s, n, 2, true, &rational::int(1))?;
        let kernel = random_kernel(s, n, 2, Mode::Instantaneous, Side::YGivenX, true)?;
        let constructed = compose(&marginal, &kernel)?;
        let r = equivalence_suite(&constructed)?;
        if r.as_array() != [true; 5] || !equivalence_suite(&p)?.all_agree() {
            equiv += 1;
        }
        if !amplification_check(&grow(&interleave(&p)?)?)?.holds {
            amp += 1;
        }
    }
    let mut out = vec![
        SuiteResult { name: "factorization_identity", cases, failures: fact },
        SuiteResult { name: "decomposition_identity", cases, failures: dec },
        SuiteResult { name: "shannon_identity", cases, failures: shannon },
        SuiteResult { name: "equivalence_agreement", cases, failures: equiv },
        SuiteResult { name: "grow_amplification", cases, failures: amp },
    ];
    let depth = n.min(2);
    let fam = markov_family(1, 2, depth)?;
    let dom = fam.mixture(&WeightScheme::Dyadic)?.dominance()?;
    out.push(SuiteResult {
        name: "mixture_dominance",
        cases: dom.checked,
        failures: (!dom.holds) as usize,
    });
    Ok(out)
}

fn selftest(cli: &Cli, n: usize, cases: usize) -> Result<(String, bool)> {
    let suites = selftest_suites(n, cases, cli.seed)?;
    let ok = suites.iter().all(|s| s.failures == 0);
    let mut config = RunConfig::new(cli, "selftest");
    config.arithmetic = "rational";
    let report = SelftestReport {
        config,
        depth: n,
        suites,
        ok,
    };
    Ok((to_json(&report), ok))
}

/// Runs a parsed command; returns the emitted document.
pub fn execute(cli: &Cli) -> Result<String> {
    let text = match &cli.command {
        Command::Simulate {
            model,
            model_file,
            coupling,
            n,
        } => simulate(cli, model, model_file.as_deref(), coupling, *n)?,
        Command::Analyze { args } => analyze(cli, args)?,
        Command::Test { args, name } => run_test(cli, args, name)?,
        Command::Grow { input, n, uniform } => run_grow(cli, input.as_deref(), *n, *uniform)?,
        Command::Mixture { family, weights, n } => run_mixture(cli, family, weights, *n)?,
        Command::Selftest { n, cases } => {
            let (text, ok) = selftest(cli, *n, *cases)?;
            emit(&cli.out, &text)?;
            if !ok {
                return Err(Error::Violation("selftest found identity violations".into()));
            }
            return Ok(text);
        }
    };
    emit(&cli.out, &text)?;
    Ok(text)
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
}

/// Machine-readable error document.
pub fn error_json(e: &Error) -> String {
    let path = match e {
        Error::Io { path, .. } => Some(path.display().to_string()),
        _ => None,
    };
    serde_json::to_string(&ErrorDoc {
        error: e.kind(),
        message: e.to_string(),
        path,
    })
    .expect("error serializes")
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            1
        }
    }
}
