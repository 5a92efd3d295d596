use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use sil_core::cij::{
    dual_certificate, solve_abstract, verify_certificate, AbstractFile, AbstractJumpInstance, JumpCertificate,
    JumpInstance, SearchOptions,
};
use sil_core::cij::verify::AbstractCertificate;
use sil_core::iteration::mean_index;
use sil_core::ledger::{alternating_sum_check, is_perfect, morse_numbers, multiplicity_report, resonance_residuals};
use sil_core::models::{ellipsoid, EllipsoidSpec, DEFAULT_DIGITS};
use sil_core::real::{format_decimal, format_rational, parse_rational};
use sil_core::surface::{content_hash, SurfaceModel};
use sil_core::{Error, Result};

#[derive(Parser)]
#[command(name = "sil", version, about = "Index iteration, common index jumps and multiplicity ledgers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate table as CSV.
    Index {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        orbit: String,
        #[arg(long, default_value_t = 10)]
        max: u64,
    },
    /// Mean indices and their signs.
    Mean {
        #[arg(long)]
        model: PathBuf,
    },
    /// Search jump certificates.
    Jump {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Also emit the dual-vertex certificate of each one.
        #[arg(long)]
        dual: bool,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check certificates against a model.
    Verify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Resonance residuals.
    Resonance {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "1/1000000000")]
        tol: String,
    },
    /// Good iterates at forbidden indices.
    Perfect {
        #[arg(long)]
        model: PathBuf,
    },
    /// Morse numbers on a window of Viterbo indices.
    Morse {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lo: i64,
        #[arg(long, allow_hyphen_values = true)]
        hi: i64,
    },
    /// Full multiplicity ledger.
    Report {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit an ellipsoid model.
    Ellipsoid {
        /// Comma-separated axis expressions, e.g. `1,phi`.
        #[arg(long, value_delimiter = ',')]
        axes: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Jump tuples for abstract rows `(β, α)`.
    AbstractJump {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value = "1/20")]
    delta: String,
    #[arg(long, default_value = "1/1000")]
    eps: String,
    #[arg(long, default_value_t = 10_000_000)]
    scan_limit: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

impl SearchArgs {
    fn options(&self) -> Result<SearchOptions> {
        Ok(SearchOptions { eps: parse_rational(&self.eps)?, scan_limit: self.scan_limit, workers: self.workers })
    }
}

fn digits() -> Result<u32> {
    match std::env::var("SIL_PRECISION_DIGITS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("SIL_PRECISION_DIGITS must be a positive integer, got {:?}", v))),
        Err(_) => Ok(DEFAULT_DIGITS),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {}", path.display(), e)))
}

fn load_model(path: &Path) -> Result<(SurfaceModel, String)> {
    let src = read(path)?;
    let model = SurfaceModel::from_json(&src)?;
    Ok((model, content_hash(src.as_bytes())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Invalid(format!("{}: {}", p.display(), e))),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn json_text<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Index { model, orbit, max } => {
            let (model, _) = load_model(&model)?;
            let germ = model.get(&orbit)?;
            let it = germ.iterates();
            let i1 = it.index(1)?;
            let mut s = String::from("m,i_maslov,i_viterbo,nullity,good\n");
            for m in 1..=max {
                let i = it.index(m)?;
                let good = if (i - i1).rem_euclid(2) == 0 { "good" } else { "bad" };
                s.push_str(&format!("{},{},{},{},{}\n", m, i, it.viterbo(m)?, it.nullity(m), good));
            }
            emit(None, &s)?;
            Ok(0)
        }
        Command::Mean { model } => {
            let (model, _) = load_model(&model)?;
            let mut s = String::from("name,mean_index,sign\n");
            for c in &model.characteristics {
                let mi = mean_index(c)?;
                s.push_str(&format!("{},{},{}\n", c.label, mi, mi.sign_i64()));
            }
            emit(None, &s)?;
            Ok(0)
        }
        Command::Jump { model, count, dual, search, out } => {
            let (model, hash) = load_model(&model)?;
            let inst = JumpInstance::new(model.characteristics.clone(), model.n, parse_rational(&search.delta)?)?;
            let opts = search.options()?;
            let mut certs = sil_core::cij::solve_paths(&inst, count, &opts)?;
            let mut all = Vec::new();
            for c in certs.iter_mut() {
                c.model_hash = hash.clone();
                all.push(c.clone());
                if dual {
                    all.push(dual_certificate(&inst, c, &opts)?);
                }
            }
            emit(out.as_deref(), &json_text(&all))?;
            Ok(0)
        }
        Command::Verify { model, cert } => {
            let (model, hash) = load_model(&model)?;
            let v: Value = serde_json::from_str(&read(&cert)?).map_err(|e| Error::Parse(e.to_string()))?;
            let items = match v {
                Value::Array(a) => a,
                other => vec![other],
            };
            let mut ok = true;
            for item in items {
                let c: JumpCertificate = serde_json::from_value(item).map_err(|e| Error::Parse(e.to_string()))?;
                if !c.model_hash.is_empty() && c.model_hash != hash {
                    eprintln!("N = {}: model hash {} does not match {}", c.n_jump, c.model_hash, hash);
                    ok = false;
                    continue;
                }
                let rep = verify_certificate(&model.characteristics, model.n, &c)?;
                match rep.first_failure() {
                    None => println!("N = {}: pass ({} checks)", c.n_jump, rep.records.len()),
                    Some(_) => {
                        ok = false;
                        println!("N = {}: fail", c.n_jump);
                        for r in rep.records.iter().filter(|r| !r.pass) {
                            eprintln!("{} violated for {}: {}", r.display, r.subject, r.detail);
                        }
                    }
                }
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::Resonance { model, tol } => {
            let (model, _) = load_model(&model)?;
            let r = resonance_residuals(&model)?;
            let tol = parse_rational(&tol)?;
            println!("positive residual {}", format_decimal(&r.positive.mid(), 15));
            println!("negative residual {}", format_decimal(&r.negative.mid(), 15));
            if r.admissible(&tol) {
                println!("admissible at tolerance {}", format_rational(&tol));
                Ok(0)
            } else {
                eprintln!("(2.11) violated beyond tolerance {}", format_rational(&tol));
                Ok(1)
            }
        }
        Command::Perfect { model } => {
            let (model, _) = load_model(&model)?;
            let p = is_perfect(&model)?;
            for (name, m) in &p.scanned {
                println!("{}: scanned m <= {}", name, m);
            }
            if p.is_perfect() {
                println!("perfect");
                Ok(0)
            } else {
                for v in &p.violations {
                    eprintln!("Definition 1.1 violated: good iterate {}^{} has index {}", v.name, v.m, v.index);
                }
                Ok(1)
            }
        }
        Command::Morse { model, lo, hi } => {
            let (model, _) = load_model(&model)?;
            let mp = morse_numbers(&model, lo, hi)?;
            let mut s = String::from("p,M_p\n");
            for (p, c) in &mp {
                s.push_str(&format!("{},{}\n", p, c));
            }
            emit(None, &s)?;
            if lo.rem_euclid(2) == hi.rem_euclid(2) {
                let ine = alternating_sum_check(&model, lo, hi)?;
                eprintln!(
                    "{}: morse side {}, betti side {}, {}",
                    ine.display,
                    ine.morse_side,
                    ine.betti_side,
                    if ine.holds { "holds" } else { "violated" }
                );
                return Ok(if ine.holds { 0 } else { 1 });
            }
            Ok(0)
        }
        Command::Report { model, search, out } => {
            let (model, hash) = load_model(&model)?;
            let mut rep = multiplicity_report(&model, &parse_rational(&search.delta)?, &search.options()?)?;
            rep.primary.model_hash = hash.clone();
            rep.dual.model_hash = hash;
            if let Some(p) = out.as_deref() {
                emit(Some(p), &json_text(&rep))?;
            }
            println!("{}", rep.summary());
            for c in rep.checks.iter().filter(|c| !c.pass) {
                eprintln!("{} violated for {}: {}", c.display, c.subject, c.detail);
            }
            Ok(if rep.passed() { 0 } else { 1 })
        }
        Command::Ellipsoid { axes, out } => {
            let m = ellipsoid(&EllipsoidSpec { axes }, digits()?)?;
            emit(out.as_deref(), &m.to_json())?;
            Ok(0)
        }
        Command::AbstractJump { input, count, search, out } => {
            let f: AbstractFile = serde_json::from_str(&read(&input)?).map_err(|e| Error::Parse(e.to_string()))?;
            let inst = AbstractJumpInstance::from_file(&f, digits()?, &parse_rational(&search.delta)?)?;
            let sols = solve_abstract(&inst, count, &search.options()?)?;
            let certs = sols.iter().map(|s| AbstractCertificate::new(&inst, s)).collect::<Result<Vec<_>>>()?;
            emit(out.as_deref(), &json_text(&certs))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e);
            e.exit_code()
        }
    };
    let _ = std::io::stdout().flush();
    ExitCode::from(code as u8)
}
