//! Flag definitions and the merge of flags over a job file.

use std::path::PathBuf;

use biproj::counting::Rational;
use biproj::{FormSystem, JobConfig};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "biproj", version, about = "Point counts and local densities for bihomogeneous systems")]
pub struct Cli {
    #[command(subcommand)]
    pub task: Task,
}

#[derive(Debug, Subcommand)]
pub enum Task {
    /// Check a job file or a set of forms without running anything.
    Validate(Common),
    /// Exact counts in a box or up to an anticanonical height.
    Count {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: CountParams,
    },
    /// Counts and circle-method predictions on one fiber.
    Fiber {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: FiberParams,
    },
    /// Solution counts modulo prime powers and p-adic densities.
    DensityP {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: DensityPParams,
    },
    /// The real density by slab sampling or chart integration.
    DensityInf {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: DensityInfParams,
    },
    /// Complete and incomplete exponential sums on a fiber.
    Expsum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: ExpsumParams,
    },
    /// Truncated singular series and integral on a fiber.
    Series {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: SeriesParams,
    },
    /// Hyperbola-method decomposition and the fit of C P log P + B P.
    Hyperbola {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: HyperbolaParams,
    },
    /// Leading constant assembled from local densities.
    Peyre {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: PeyreParams,
    },
    /// Projective counts against the predicted leading constant.
    ManinReport {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: ManinParams,
    },
    /// Growth of the points on the diagonal family's exceptional subvariety.
    Subvariety {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: SubvarietyParams,
    },
    /// Arithmetic of the hypotheses for a given shape.
    Hypothesis {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: HypothesisParams,
    },
}

pub const TASKS: [&str; 12] = [
    "validate",
    "count",
    "fiber",
    "density-p",
    "density-inf",
    "expsum",
    "series",
    "hyperbola",
    "peyre",
    "manin-report",
    "subvariety",
    "hypothesis",
];

/// Flags shared by every task.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Job file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// A form of the system; repeat for several forms.
    #[arg(long = "form")]
    pub forms: Vec<String>,
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV destination; without it tables go to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Largest number of elementary steps a task may take.
    #[arg(long, default_value_t = 1_000_000_000)]
    pub budget: u128,
    /// Fill the `seconds` column of count tables. Off by default so that
    /// repeated runs produce identical files.
    #[arg(long)]
    pub timings: bool,
}

/// A rational number given as `7`, `-3` or `5/2`, on the command line or in a job file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalArg(pub Rational);

impl std::str::FromStr for RationalArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.trim().parse::<Rational>().map(RationalArg).map_err(|_| format!("not a rational number: {s:?}"))
    }
}

impl Serialize for RationalArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for RationalArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(RationalArg(Rational::from_integer(v))),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

macro_rules! params {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                $(#[$fmeta])*
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }
    };
}

params!(CountParams {
    /// Scale of the x box `[-1, 1]^n1`.
    #[arg(long)] p1: RationalArg,
    /// Scale of the y box; defaults to `p1`.
    #[arg(long)] p2: RationalArg,
    /// Heights for projective counts, comma separated.
    #[arg(long, value_delimiter = ',')] heights: Vec<u64>,
    /// Drop x with at least this many zero coordinates.
    #[arg(long)] x_zeros: usize,
    /// Drop y with at least this many zero coordinates.
    #[arg(long)] y_zeros: usize,
});

params!(FiberParams {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] y: Vec<i64>,
    /// Box scales, comma separated.
    #[arg(long, value_delimiter = ',')] p1: Vec<u64>,
    /// Truncation of the singular series; enables the prediction columns.
    #[arg(long)] q_max: u64,
    /// Truncation of the singular integral.
    #[arg(long)] b: f64,
    /// Quadrature points per axis.
    #[arg(long)] grid: usize,
});

params!(DensityPParams {
    #[arg(long)] p: u64,
    /// Highest level `r` of the modulus `p^r`.
    #[arg(long)] r: u32,
    /// exhaustive, lifting, convolution or auto.
    #[arg(long)] mode: String,
    /// Multiply the densities of all primes up to this bound.
    #[arg(long)] p_max: u64,
    /// Level cap for the product.
    #[arg(long)] max_r: u32,
});

params!(DensityInfParams {
    /// slab, chart or both.
    #[arg(long)] method: String,
    /// Slab half-widths, comma separated.
    #[arg(long, value_delimiter = ',')] epsilon: Vec<f64>,
    #[arg(long)] samples: u64,
    /// argmax, smooth or a coordinate index.
    #[arg(long)] chart: String,
});

params!(ExpsumParams {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] y: Vec<i64>,
    /// Modulus of a complete sum.
    #[arg(long)] q: u64,
    /// Numerators of a complete sum or rational arc point, comma separated.
    #[arg(long, value_delimiter = ',')] a: Vec<u64>,
    /// Box scale of an incomplete sum.
    #[arg(long)] p1: RationalArg,
    /// Real arc point, one coordinate per form.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] alpha: Vec<f64>,
    /// Evaluate on this many equally spaced points of [0, 1) (single forms).
    #[arg(long)] scan: u64,
});

params!(SeriesParams {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] y: Vec<i64>,
    #[arg(long)] q_max: u64,
    /// Exact rational partial sums.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")] exact: bool,
    /// Also evaluate the singular integral truncated at this B.
    #[arg(long)] b: f64,
    #[arg(long)] grid: usize,
});

params!(HyperbolaParams {
    /// one (divisor function) or count (shell counts of the system).
    #[arg(long)] function: String,
    #[arg(long)] beta1: u32,
    #[arg(long)] beta2: u32,
    #[arg(long, value_delimiter = ',')] heights: Vec<u64>,
    #[arg(long)] mu: f64,
    /// decomposition or fit.
    #[arg(long)] table: String,
    /// Number of slices of the middle range, reported in the summary.
    #[arg(long)] slices: u32,
    /// Growth conditions: the constants c, delta, nu and d.
    #[arg(long)] c: f64,
    #[arg(long)] delta: f64,
    #[arg(long)] nu: f64,
    #[arg(long)] d: f64,
});

params!(PeyreParams {
    /// Real density; estimated when absent.
    #[arg(long)] sigma_inf: f64,
    /// `p:value` pairs; estimated for primes up to p_max when absent.
    #[arg(long, value_delimiter = ',')] sigma_p: Vec<String>,
    #[arg(long)] p_max: u64,
    #[arg(long)] samples: u64,
    #[arg(long)] d1: u32,
    #[arg(long)] d2: u32,
});

params!(ManinParams {
    #[arg(long, value_delimiter = ',')] heights: Vec<u64>,
    #[arg(long)] p_max: u64,
    #[arg(long)] max_r: u32,
    #[arg(long)] samples: u64,
    #[arg(long)] x_zeros: usize,
    #[arg(long)] y_zeros: usize,
});

params!(SubvarietyParams {
    #[arg(long)] n: u32,
    #[arg(long)] d1: u32,
    #[arg(long, value_delimiter = ',')] heights: Vec<u64>,
});

params!(HypothesisParams {
    #[arg(long)] d1: u32,
    #[arg(long)] d2: u32,
    #[arg(long = "R", alias = "r")] r: u32,
    #[arg(long)] dimv1: u64,
    #[arg(long)] dimv2: u64,
    #[arg(long)] delta: f64,
});

/// Everything a task needs after flags and the job file are merged.
#[derive(Debug, Clone)]
pub struct Job<P> {
    pub task: &'static str,
    pub forms: Vec<String>,
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    pub budget: u128,
    pub timings: bool,
    pub params: P,
    /// Canonical JSON of the inputs that determine the results.
    pub canonical: Value,
}

impl<P> Job<P> {
    pub fn system(&self) -> Result<FormSystem, CliError> {
        if self.forms.is_empty() {
            return Err(CliError::Config("forms: no form given (use --form or a job file)".into()));
        }
        let n1 = self.n1.ok_or_else(|| CliError::Config("n1: missing".into()))?;
        let n2 = self.n2.ok_or_else(|| CliError::Config("n2: missing".into()))?;
        let job = JobConfig {
            n1,
            n2,
            forms: self.forms.clone(),
            task: self.task.into(),
            params: Default::default(),
            bidegree: None,
            seed: None,
            output: None,
            workers: None,
        };
        Ok(job.system()?)
    }

    pub fn has_system(&self) -> bool {
        !self.forms.is_empty()
    }
}

pub fn read_config(common: &Common) -> Result<Option<JobConfig>, CliError> {
    let Some(path) = &common.config else { return Ok(None) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("config: cannot read {}: {e}", path.display())))?;
    let job = JobConfig::from_json(&text).map_err(|e| CliError::Config(format!("config: {e}")))?;
    if !TASKS.contains(&job.task.as_str()) {
        return Err(CliError::Config(format!("task: unknown task {:?}; expected one of {}", job.task, TASKS.join(", "))));
    }
    Ok(Some(job))
}

/// Checks `params` of a job file against the parameters of `task`.
pub fn check_task_params(task: &str, params: &Map<String, Value>) -> Result<(), CliError> {
    fn check<P: DeserializeOwned>(params: &Map<String, Value>) -> Result<(), CliError> {
        typed::<P>(params).map(|_| ())
    }
    match task {
        "validate" => Ok(()),
        "count" => check::<CountParams>(params),
        "fiber" => check::<FiberParams>(params),
        "density-p" => check::<DensityPParams>(params),
        "density-inf" => check::<DensityInfParams>(params),
        "expsum" => check::<ExpsumParams>(params),
        "series" => check::<SeriesParams>(params),
        "hyperbola" => check::<HyperbolaParams>(params),
        "peyre" => check::<PeyreParams>(params),
        "manin-report" => check::<ManinParams>(params),
        "subvariety" => check::<SubvarietyParams>(params),
        "hypothesis" => check::<HypothesisParams>(params),
        other => Err(CliError::Config(format!("task: unknown task {other:?}"))),
    }
}

fn typed<P: DeserializeOwned>(params: &Map<String, Value>) -> Result<P, CliError> {
    let value = Value::Object(params.clone());
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Config(format!("params: {inner}"))
        } else {
            CliError::Config(format!("params.{path}: {inner}"))
        }
    })
}

/// Merges flags over the job file and checks the result.
pub fn resolve<P: Serialize + DeserializeOwned>(task: &'static str, common: Common, flags: P) -> Result<Job<P>, CliError> {
    let config = read_config(&common)?;
    if let Some(c) = &config {
        if c.task != task {
            return Err(CliError::Config(format!("task: job file names {:?} but the command is {task:?}", c.task)));
        }
    }
    let mut params: Map<String, Value> = config
        .as_ref()
        .map(|c| c.params.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
        .unwrap_or_default();
    if let Value::Object(flags) = serde_json::to_value(&flags).expect("flags serialize") {
        params.extend(flags);
    }
    let params_typed: P = typed(&params)?;

    let forms = if common.forms.is_empty() {
        config.as_ref().map(|c| c.forms.clone()).unwrap_or_default()
    } else {
        common.forms.clone()
    };
    let n1 = common.n1.or(config.as_ref().map(|c| c.n1));
    let n2 = common.n2.or(config.as_ref().map(|c| c.n2));
    let seed = common.seed.or(config.as_ref().and_then(|c| c.seed)).unwrap_or(1);
    let output = common.output.clone().or(config.as_ref().and_then(|c| c.output.clone().map(PathBuf::from)));
    let workers = common.workers.or(config.as_ref().and_then(|c| c.workers));
    if workers == Some(0) {
        return Err(CliError::Config("workers: must be at least 1".into()));
    }
    if let Some(bd) = config.as_ref().and_then(|c| c.bidegree) {
        let check = JobConfig {
            n1: n1.unwrap_or(0),
            n2: n2.unwrap_or(0),
            forms: forms.clone(),
            task: task.into(),
            params: Default::default(),
            bidegree: Some(bd),
            seed: None,
            output: None,
            workers: None,
        };
        check.system()?;
    }
    let canonical = serde_json::json!({
        "task": task,
        "forms": forms,
        "n1": n1,
        "n2": n2,
        "seed": seed,
        "budget": common.budget.to_string(),
        "params": Value::Object(params),
    });
    Ok(Job {
        task,
        forms,
        n1,
        n2,
        seed,
        output,
        workers,
        budget: common.budget,
        timings: common.timings,
        params: params_typed,
        canonical,
    })
}
