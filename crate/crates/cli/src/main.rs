mod args;
mod tasks;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Task};

/// Exit codes: 0 success, 1 internal failure, 2 configuration error,
/// 3 budget exceeded.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<biproj::ParseError> for CliError {
    fn from(e: biproj::ParseError) -> Self {
        let form = e.form_index.map(|i| format!("forms[{i}]: ")).unwrap_or_default();
        CliError::Config(format!("{form}{e}"))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(format!("output: {e}"))
    }
}

macro_rules! classify {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                let text = e.to_string();
                if text.contains("exceeds budget") {
                    CliError::Budget(text)
                } else {
                    CliError::Config(text)
                }
            }
        }
    )*};
}

classify!(
    biproj::counting::CountError,
    biproj::densities::DensityError,
    biproj::expsums::ExpSumError,
    biproj::hyperbola::HyperbolaError,
    biproj::manin::ManinError,
    biproj::FormError
);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.task) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(task: Task) -> Result<(), CliError> {
    match task {
        Task::Validate(common) => tasks::validate(common),
        Task::Count { common, params } => tasks::execute("count", common, params, tasks::count),
        Task::Fiber { common, params } => tasks::execute("fiber", common, params, tasks::fiber),
        Task::DensityP { common, params } => tasks::execute("density-p", common, params, tasks::density_p),
        Task::DensityInf { common, params } => tasks::execute("density-inf", common, params, tasks::density_inf),
        Task::Expsum { common, params } => tasks::execute("expsum", common, params, tasks::expsum),
        Task::Series { common, params } => tasks::execute("series", common, params, tasks::series),
        Task::Hyperbola { common, params } => tasks::execute("hyperbola", common, params, tasks::hyperbola),
        Task::Peyre { common, params } => tasks::execute("peyre", common, params, tasks::peyre),
        Task::ManinReport { common, params } => tasks::execute("manin-report", common, params, tasks::manin_report),
        Task::Subvariety { common, params } => tasks::execute("subvariety", common, params, tasks::subvariety),
        Task::Hypothesis { common, params } => tasks::execute("hypothesis", common, params, tasks::hypothesis),
    }
}

/// Result of a task: an optional table and a human-readable summary.
#[derive(Debug, Default)]
pub struct Report {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: String,
    /// Print the summary rather than the table when no output file is given.
    pub summary_first: bool,
}

impl Report {
    pub fn table(header: &[&str]) -> Self {
        Report {
            header: header.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn text(summary: String) -> Self {
        Report {
            summary,
            summary_first: true,
            ..Default::default()
        }
    }

    fn emit(&self, output: Option<&std::path::Path>, hash: &str) -> Result<(), CliError> {
        let header: Vec<&str> = self.header.iter().map(String::as_str).collect();
        let has_table = !self.header.is_empty();
        let mut stdout = std::io::stdout().lock();
        match output {
            Some(path) => {
                if has_table {
                    let file = std::fs::File::create(path)?;
                    biproj::output::write_csv(std::io::BufWriter::new(file), hash, &header, &self.rows)?;
                }
                write!(stdout, "{}", self.summary)?;
            }
            None if self.summary_first || !has_table => write!(stdout, "{}", self.summary)?,
            None => {
                biproj::output::write_csv(&mut stdout, hash, &header, &self.rows)?;
                eprint!("{}", self.summary);
            }
        }
        Ok(())
    }
}
