use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use negcert::io::{self as nio, SampleHeader};
use negcert::pipeline::{self, RunConfig};
use negcert::{
    witness_check, CertificationReport, ConstraintSet, Error, QuadratureData, WignerSpec,
    WitnessSubject,
};

use crate::args::{Cli, Command, Overrides};

pub const THREADS_ENV: &str = "NEGCERT_THREADS";

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    File { path: PathBuf, source: std::io::Error },
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(Error::InvalidArgument(_)) => 64,
            CliError::Core(Error::Parse { .. } | Error::Json(_) | Error::Missing(_)) => 65,
            CliError::Core(Error::Infeasible(_)) => 66,
            CliError::Core(Error::NotConverged { .. } | Error::Numerical(_)) => 67,
            CliError::File { .. } | CliError::Core(Error::Io(_)) => 74,
            CliError::Core(_) => 70,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::File { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Caps rayon's global pool at `NEGCERT_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

/// Constraints file: the set plus the configuration that produced it.
#[derive(Serialize, Deserialize)]
struct ConstraintsFile {
    config: serde_json::Value,
    #[serde(flatten)]
    set: ConstraintSet,
}

#[derive(Serialize)]
struct WitnessFile<'a> {
    subject: String,
    x_star: Option<f64>,
    #[serde(flatten)]
    report: &'a negcert::WitnessReport,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CliError::File { path: path.to_path_buf(), source })
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::File { path: path.to_path_buf(), source })
}

struct Output<'a> {
    dir: &'a Path,
    quiet: bool,
}

impl Output<'_> {
    fn path(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(self.dir)
            .map_err(|source| CliError::File { path: self.dir.to_path_buf(), source })?;
        Ok(self.dir.join(name))
    }

    fn write(&self, name: &str, body: impl FnOnce(&mut dyn Write) -> negcert::Result<()>) -> Result<PathBuf> {
        let path = self.path(name)?;
        let file = File::create(&path).map_err(|source| CliError::File { path: path.clone(), source })?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(|source| CliError::File { path: path.clone(), source })?;
        Ok(path)
    }

    fn json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    fn say(&self, msg: impl fmt::Display) {
        if !self.quiet {
            println!("{msg}");
        }
    }
}

/// Config file (or defaults), then flags.
fn load_config(cli: &Cli, base: RunConfig, o: Option<&Overrides>) -> Result<RunConfig> {
    let mut c = match &cli.config {
        Some(p) => serde_json::from_str(&read_to_string(p)?).map_err(Error::from)?,
        None => base,
    };
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    if let Some(o) = o {
        if let Some(s) = o.state {
            c.state = s;
        }
        if let Some(n) = o.samples {
            c.samples = n;
        }
        if !o.angles.is_empty() {
            c.angles = o.angles.clone();
        }
        if let Some(e) = o.estimator {
            c.estimator = e;
        }
        if let Some(n) = o.n_sigmas {
            c.n_sigmas = n;
        }
        if let Some(s) = o.side {
            c.lattice.side = s;
        }
        if let Some(e) = o.extent {
            c.lattice.extent = e;
        }
        if let Some(m) = o.m {
            c.test_vectors.m = m;
        }
        if let Some(s) = o.test_seed {
            c.test_vectors.seed = s;
        }
    }
    c.validate()?;
    Ok(c)
}

fn config_line(c: &RunConfig) -> String {
    format!("config: {}", c.to_json())
}

fn read_samples(path: &Path) -> Result<QuadratureData> {
    Ok(nio::read_samples(open(path)?)?.1)
}

fn read_report(path: &Path) -> Result<CertificationReport> {
    Ok(serde_json::from_str(&read_to_string(path)?).map_err(Error::from)?)
}

fn summarize(out: &Output, report: &CertificationReport, path: &Path) {
    out.say(format_args!(
        "x_star = {:.6e}\nx_certified = {:.6e}\nstatus = {}\nconfidence = {:.6}\nreport: {}",
        report.x_star,
        report.x_certified,
        serde_json::to_value(report.status).expect("status serializes").as_str().unwrap_or(""),
        report.confidence,
        path.display()
    ));
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
}

fn certify_and_write(out: &Output, config: &RunConfig, set: &ConstraintSet) -> Result<u8> {
    let report = pipeline::certify(config, set)?;
    let path = out.json("report.json", &report)?;
    summarize(out, &report, &path);
    Ok(report.status.exit_code() as u8)
}

pub fn dispatch(cli: &Cli) -> Result<u8> {
    let out = Output { dir: &cli.out, quiet: cli.quiet };
    match &cli.command {
        Command::Simulate { overrides } => {
            let c = load_config(cli, RunConfig::default(), Some(overrides))?;
            let samples = pipeline::simulate(&c)?;
            let header = SampleHeader {
                state: Some(c.state),
                seed: Some(c.seed),
                angles: c.angles.clone(),
                config: Some(c.to_json().to_string()),
                ..Default::default()
            };
            let path = out.write("samples.csv", |w| nio::write_samples(w, &header, &samples))?;
            out.say(format_args!("{} samples: {}", samples.len(), path.display()));
            Ok(0)
        }
        Command::Ingest { input, overrides } => {
            let c = load_config(cli, RunConfig::default(), Some(overrides))?;
            let data = read_samples(input)?;
            let set = pipeline::ingest(&c, &data)?;
            for w in &set.metadata.warnings {
                eprintln!("warning: {w}");
            }
            let file = ConstraintsFile { config: c.to_json(), set };
            let path = out.json("constraints.json", &file)?;
            out.say(format_args!(
                "{} constraints, confidence {:.6}: {}",
                file.set.len(),
                file.set.metadata.confidence_union_bound,
                path.display()
            ));
            Ok(0)
        }
        Command::Certify { input, constraints, overrides } => {
            let c = load_config(cli, RunConfig::default(), Some(overrides))?;
            let set = match (input, constraints) {
                (Some(s), _) => pipeline::ingest(&c, &read_samples(s)?)?,
                (None, Some(p)) => {
                    let f: ConstraintsFile = serde_json::from_str(&read_to_string(p)?).map_err(Error::from)?;
                    f.set
                }
                (None, None) => return run_and_write(&out, &c),
            };
            certify_and_write(&out, &c, &set)
        }
        Command::Reconstruct { report, grid_side, grid_extent } => {
            let r = read_report(report)?;
            let mut spec = r
                .config
                .as_ref()
                .and_then(|v| v.get("wigner").cloned())
                .map(serde_json::from_value::<WignerSpec>)
                .transpose()
                .map_err(Error::from)?
                .unwrap_or_default();
            if let Some(s) = grid_side {
                spec.side = *s;
            }
            if let Some(e) = grid_extent {
                spec.extent = *e;
            }
            let w = pipeline::reconstruct(&r, &spec)?;
            let mut comments = vec![];
            if let Some(cfg) = &r.config {
                comments.push(format!("config: {cfg}"));
            }
            let path = out.write("wigner.csv", |f| nio::write_wigner_grid(f, &w, &comments))?;
            if let Some(msg) = &w.warning {
                eprintln!("warning: {msg}");
            }
            out.say(format_args!(
                "W(0,0) = {:.6e}\nmin W = {:.6e}\ngrid: {}",
                w.nearest([0.0, 0.0]).unwrap_or(f64::NAN),
                w.min(),
                path.display()
            ));
            Ok(0)
        }
        Command::WitnessCheck { report, state } => {
            let r = read_report(report)?;
            let (subject, label, x_star) = match state {
                Some(s) => (WitnessSubject::State(*s), s.to_string(), None),
                None => (WitnessSubject::Grid(r.chi_opt.clone()), "chi_opt".to_string(), Some(r.x_star)),
            };
            let w = witness_check(&r.witness, &subject, x_star)?;
            let file = WitnessFile { subject: label, x_star, report: &w };
            let path = out.json("witness.json", &file)?;
            out.say(format_args!(
                "tr(F rho) = {:.6e}\nbounded = {}\nclassical_nonnegative = {:?}\nattains_bound = {:?}\nreport: {}",
                w.value,
                w.bounded,
                w.classical_nonnegative,
                w.attains_bound,
                path.display()
            ));
            Ok(0)
        }
        Command::Repro { benchmark, overrides } => {
            let c = load_config(cli, RunConfig::benchmark(*benchmark), Some(overrides))?;
            let code = run_and_write(&out, &c)?;
            let r = read_report(&out.path("report.json")?)?;
            let w = pipeline::reconstruct(&r, &c.wigner)?;
            let path = out.write("wigner.csv", |f| nio::write_wigner_grid(f, &w, &[config_line(&c)]))?;
            out.say(format_args!(
                "W(0,0) = {:.6e}\nmin W = {:.6e}\ngrid: {}",
                w.nearest([0.0, 0.0]).unwrap_or(f64::NAN),
                w.min(),
                path.display()
            ));
            Ok(code)
        }
    }
}

fn run_and_write(out: &Output, c: &RunConfig) -> Result<u8> {
    let report = pipeline::run(c)?;
    let path = out.json("report.json", &report)?;
    summarize(out, &report, &path);
    Ok(report.status.exit_code() as u8)
}
