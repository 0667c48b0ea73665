//! `fracnorm`: batch front end over the norm, inequality and study modules.
//!
//! Exit codes: 0 success, 1 a study or check reported `fail`,
//! 2 usage or precondition error, 3 missing or corrupt calibration.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fracnorm::calibration::{reference_constants, write_results, Constants};
use fracnorm::corpus::reference_corpus;
use fracnorm::inequalities::{complete_exponents, Ext, ExponentSet, Var};
use fracnorm::studies::{
    blowup_probe, constant_scan, extremize_ratio, scaling_sweep, NormSpec, ParametricFamily, StepSweep, StudyReport,
    Verdict, DEFAULT_LAMBDAS,
};
use fracnorm::suite::{blowup_grid, Suite, SuiteOptions};
use fracnorm::{derive_exponents, CaseId, CorpusFile, Error, EvalContext, Grid, InequalityCase, SampledFunction};

#[derive(Parser)]
#[command(name = "fracnorm", version, about = "Fractional norms and interpolation inequalities on sampled functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one norm of one corpus function and print the result as JSON.
    ComputeNorm {
        #[command(flatten)]
        norm: NormArgs,
        #[command(flatten)]
        input: InputArgs,
        /// Corpus label, or `const:C` for the constant function C.
        #[arg(long)]
        function: String,
    },
    /// Run the default suite and write results.jsonl, verdicts.json and report/*.json.
    Verify {
        #[command(flatten)]
        input: InputArgs,
        /// Calibration file; defaults to the constants shipped for the reference grid.
        #[arg(long)]
        constants: Option<PathBuf>,
        /// Measure and write constants instead of verifying against them.
        #[arg(long)]
        calibrate: bool,
        #[arg(long, default_value = "fracnorm-out")]
        out: PathBuf,
        #[arg(long)]
        no_scaling: bool,
        #[arg(long)]
        no_blowup: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Measure the frozen intervals on a corpus and write constants.json.
    Calibrate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "constants.json")]
        constants: PathBuf,
    },
    /// Ratio of one case over the corpus, or maximized over a parametric family.
    Scan {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        constants: Option<PathBuf>,
        /// Parametric family as JSON `{"base": {...}, "free": [{"name", "lo", "hi"}]}`.
        #[arg(long)]
        family: Option<String>,
        #[arg(long, default_value_t = 64)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ratio along sharpening smoothed steps for a case outside its admissible regime.
    Blowup {
        /// Case to probe; without it the forbidden lem3_5 triple is used.
        #[arg(long)]
        case: Option<String>,
        /// Exponent assignment `name=value`, e.g. `theta=1/2` or `p0=inf`.
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
        #[arg(long, value_parser = parse_grid)]
        grid: Option<Grid>,
        #[arg(long)]
        center: Option<f64>,
        #[arg(long)]
        half_length: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        widths: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the dilation exponent of one norm.
    Scaling {
        #[command(flatten)]
        norm: NormArgs,
        #[command(flatten)]
        input: InputArgs,
        /// Corpus label; defaults to `gauss_w1` on grid 1,2048,16.
        #[arg(long)]
        function: Option<String>,
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InputArgs {
    /// corpus.json; defaults to the built-in reference corpus.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Resample the corpus on `dim,n_per_axis,box_length`.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<Grid>,
}

#[derive(Args)]
struct CaseArgs {
    #[arg(long)]
    case: String,
    /// Exponent assignment `name=value`; replaces the reference exponents.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    set: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Lp,
    Sobolev,
    SobolevGeneral,
    Directional,
    Holder,
    Besov,
    BesovMollifier,
    Bmo,
}

#[derive(Args)]
struct NormArgs {
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Alias of `--kind` for the scaling command.
    #[arg(long, value_enum, conflicts_with = "kind")]
    norm: Option<Kind>,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    #[arg(long, conflicts_with = "s", allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, value_parser = parse_exponent)]
    p: Option<f64>,
    #[arg(long, value_parser = parse_exponent)]
    q: Option<f64>,
}

impl NormArgs {
    fn spec(&self) -> Result<NormSpec, Failure> {
        let kind = self.kind.or(self.norm).ok_or_else(|| Failure::usage("--kind is required"))?;
        let s = || self.s.or(self.alpha).ok_or_else(|| Failure::usage("this norm needs --s (or --alpha)"));
        let p = || self.p.ok_or_else(|| Failure::usage("this norm needs --p"));
        let q = || self.q.ok_or_else(|| Failure::usage("this norm needs --q"));
        Ok(match kind {
            Kind::Lp => NormSpec::Lp { p: p()? },
            Kind::Sobolev => NormSpec::Sobolev { s: s()?, p: p()? },
            Kind::SobolevGeneral => NormSpec::SobolevGeneral { s: s()?, p: p()? },
            Kind::Directional => NormSpec::Directional { s: s()?, p: p()? },
            Kind::Holder => NormSpec::Holder { s: s()? },
            Kind::Besov => NormSpec::Besov {
                s: s()?,
                p: p()?,
                q: q()?,
            },
            Kind::BesovMollifier => NormSpec::BesovMollifier { s: s()? },
            Kind::Bmo => NormSpec::Bmo,
        })
    }

    fn kind_name(&self) -> String {
        self.kind
            .or(self.norm)
            .and_then(|k| k.to_possible_value())
            .map(|v| v.get_name().to_string())
            .unwrap_or_default()
    }
}

fn parse_exponent(s: &str) -> Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| e.to_string()),
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err("expected dim,n_per_axis,box_length".into());
    }
    let dim = parts[0].parse().map_err(|e| format!("dim: {e}"))?;
    let n = parts[1].parse().map_err(|e| format!("n_per_axis: {e}"))?;
    let b = parts[2].parse().map_err(|e| format!("box_length: {e}"))?;
    Grid::new(dim, n, b).map_err(|e| e.to_string())
}

/// An error together with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Calibration(_) => 3,
            _ => 2,
        };
        let mut message = e.to_string();
        if code == 3 {
            message.push_str(" (run `fracnorm verify --calibrate` or `fracnorm calibrate`)");
        }
        Failure { code, message }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::from(Error::from(e))
    }
}

/// The corpus after optional resampling; `default_grid` applies only to the
/// built-in corpus.
fn load_corpus(input: &InputArgs, default_grid: Option<Grid>) -> Result<CorpusFile, Failure> {
    let mut c = match &input.corpus {
        Some(p) => CorpusFile::load(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?,
        None => {
            let mut c = reference_corpus();
            if let Some(g) = default_grid {
                c.grid = g;
            }
            c
        }
    };
    if let Some(g) = input.grid {
        c.grid = g;
    }
    Ok(c)
}

fn pick_function(corpus: &CorpusFile, label: &str) -> Result<SampledFunction, Failure> {
    if let Some(c) = label.strip_prefix("const:") {
        let v: f64 = c.parse().map_err(|_| Failure::usage(format!("bad constant '{c}'")))?;
        return Ok(SampledFunction::constant(corpus.grid, v));
    }
    Ok(corpus.get(label)?)
}

fn exponent_overrides(set: &[String]) -> Result<ExponentSet, Failure> {
    let mut e = ExponentSet::new();
    for item in set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("expected NAME=VALUE, got '{item}'")))?;
        e.set(Var::parse(k.trim())?, Ext::parse(v)?)?;
    }
    Ok(e)
}

fn case_from(args: &CaseArgs) -> Result<InequalityCase, Failure> {
    let id = CaseId::parse(&args.case)?;
    if args.set.is_empty() {
        return Ok(InequalityCase::reference(id));
    }
    Ok(derive_exponents(id, &exponent_overrides(&args.set)?)?)
}

fn load_constants(path: Option<&Path>) -> Result<Constants, Failure> {
    Ok(match path {
        Some(p) => Constants::load(p)?,
        None => reference_constants(),
    })
}

fn write_report(path: &Path, rep: &StudyReport) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, rep.to_json() + "\n")?;
    eprintln!("{}: {:?} ({})", path.display(), rep.verdict, rep.reason);
    Ok(())
}

fn verdict_code(v: Verdict) -> u8 {
    if v == Verdict::Fail {
        1
    } else {
        0
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::ComputeNorm { norm, input, function } => {
            let spec = norm.spec()?;
            let corpus = load_corpus(&input, None)?;
            let f = pick_function(&corpus, &function)?;
            let ctx = EvalContext::new(corpus.grid)?;
            let r = spec.compute(&f, &ctx)?;
            println!("{}", serde_json::to_string_pretty(&r).map_err(Error::from)?);
            Ok(0)
        }
        Command::Calibrate { input, constants } => {
            let suite = Suite::new(load_corpus(&input, None)?)?;
            suite.calibrate()?.save(&constants)?;
            eprintln!("wrote {}", constants.display());
            Ok(0)
        }
        Command::Verify {
            input,
            constants,
            calibrate,
            out,
            no_scaling,
            no_blowup,
            seed,
        } => {
            let corpus = load_corpus(&input, None)?;
            let suite = Suite::new(corpus.clone())?;
            if calibrate {
                let path = constants.unwrap_or_else(|| out.join("constants.json"));
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir)?;
                }
                suite.calibrate()?.save(&path)?;
                eprintln!("wrote {}", path.display());
                return Ok(0);
            }
            let c = load_constants(constants.as_deref())?;
            let opts = SuiteOptions {
                scaling: !no_scaling,
                blowup: !no_blowup,
            };
            let outcome = suite.verify(&c, opts)?;
            fs::create_dir_all(out.join("report"))?;
            let mut buf = Vec::new();
            write_results(&mut buf, &outcome.records)?;
            fs::write(out.join("results.jsonl"), buf)?;
            let mut verdicts = serde_json::to_value(&outcome.verdicts).map_err(Error::from)?;
            verdicts["seed"] = seed.into();
            fs::write(
                out.join("verdicts.json"),
                serde_json::to_string_pretty(&verdicts).map_err(Error::from)? + "\n",
            )?;
            for (name, rep) in &outcome.reports {
                fs::write(out.join("report").join(format!("{name}.json")), rep.to_json() + "\n")?;
            }
            fs::write(out.join("corpus.json"), corpus.to_json() + "\n")?;
            suite.ctx.bank.write_csv(fs::File::create(out.join("filter_bank.csv"))?)?;
            for check in &outcome.verdicts.checks {
                if check.verdict != Verdict::Pass {
                    eprintln!("{:?} {}: {}", check.verdict, check.name, check.reason);
                }
            }
            let v = &outcome.verdicts;
            eprintln!("{} pass, {} fail, {} inconclusive", v.passed, v.failed, v.inconclusive);
            Ok(if v.all_ok() { 0 } else { 1 })
        }
        Command::Scan {
            case,
            input,
            constants,
            family,
            budget,
            seed,
            out,
        } => {
            let c = case_from(&case)?;
            let corpus = load_corpus(&input, None)?;
            let ctx = EvalContext::new(corpus.grid)?;
            // frozen bounds only apply to the reference exponents on their own grid
            let frozen = if case.set.is_empty() {
                let consts = load_constants(constants.as_deref())?;
                consts.get(c.id.as_str(), &corpus.grid.fingerprint()).ok().map(|i| i.max_ratio)
            } else {
                None
            };
            let (rep, stem) = match family {
                Some(js) => {
                    let fam: ParametricFamily =
                        serde_json::from_str(&js).map_err(|e| Failure::usage(format!("--family: {e}")))?;
                    let fam = ParametricFamily::new(fam.base, fam.free)?;
                    (extremize_ratio(&c, &fam, budget, seed, &ctx, frozen)?, "extremize")
                }
                None => (constant_scan(&c, &corpus.sample()?, &ctx, frozen), "scan"),
            };
            let path = out.unwrap_or_else(|| PathBuf::from(format!("report/{stem}_{}.json", c.id)));
            write_report(&path, &rep)?;
            Ok(verdict_code(rep.verdict))
        }
        Command::Blowup {
            case,
            set,
            grid,
            center,
            half_length,
            widths,
            seed: _,
            out,
        } => {
            let c = match case {
                None if set.is_empty() => fracnorm::studies::forbidden_case(),
                None => return Err(Failure::usage("--set needs --case")),
                Some(id) => {
                    let id = CaseId::parse(&id)?;
                    let given = if set.is_empty() { id.reference_given() } else { exponent_overrides(&set)? };
                    complete_exponents(id, &given)?
                }
            };
            let g = grid.unwrap_or_else(blowup_grid);
            let mut sweep = StepSweep::default_for(&g);
            if let Some(x) = center {
                sweep.center = x;
            }
            if let Some(h) = half_length {
                sweep.half_length = h;
            }
            if let Some(w) = widths {
                sweep.widths = w;
            }
            let ctx = EvalContext::new(g)?;
            let rep = blowup_probe(&c, &sweep, &ctx)?;
            let path = out.unwrap_or_else(|| PathBuf::from(format!("report/blowup_{}.json", c.id)));
            write_report(&path, &rep)?;
            Ok(verdict_code(rep.verdict))
        }
        Command::Scaling {
            norm,
            input,
            function,
            lambdas,
            seed: _,
            out,
        } => {
            let spec = norm.spec()?;
            let default_grid = Grid::new(1, 2048, 16.0)?;
            let corpus = load_corpus(&input, Some(default_grid))?;
            let f = pick_function(&corpus, function.as_deref().unwrap_or("gauss_w1"))?;
            let ctx = EvalContext::new(corpus.grid)?;
            let lambdas = lambdas.unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec());
            let rep = scaling_sweep(&f, spec, &lambdas, &ctx)?;
            let path = out.unwrap_or_else(|| PathBuf::from(format!("report/scaling_{}.json", norm.kind_name())));
            write_report(&path, &rep)?;
            Ok(verdict_code(rep.verdict))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
