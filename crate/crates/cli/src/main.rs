mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};
use config::{parse_region, RunConfig};
use treemax_core::levelset::{decompose_auto, decompose_maximal};
use treemax_core::ops::{batch_eval, OperatorKind};
use treemax_core::rational;
use treemax_core::verify::{run_scenario, write_atomic, ScenarioConfig, Verdict, SCENARIOS};
use treemax_core::TreeWindow;

#[derive(Parser)]
#[command(name = "treemax", version, about = "Exact maximal operators on trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
struct Common {
    /// Tb:<b>, Sab:<a>,<b>, spike:<j>, or a JSON valence spec file
    #[arg(long)]
    tree: Option<String>,
    /// Window heights as lo..hi
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; results go to stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file whose fields override the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an operator over a region and emit CSV
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        op: Option<String>,
        /// delta:<addr> or a JSON function file
        #[arg(long)]
        f: Option<String>,
        /// all, H<j>, H<j>:r<d>, or addr,addr,...
        #[arg(long)]
        region: Option<String>,
    },
    /// Decompose a level set into maximal triangles and emit JSON
    Decompose {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        op: Option<String>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Run a packaged scenario and emit report.json and observations.csv
    Verify {
        scenario: String,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
    },
}

const EXIT_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_WINDOW: u8 = 4;

fn base_config(c: &Common) -> RunConfig {
    RunConfig {
        tree: c.tree.clone(),
        window: c.window.clone(),
        seed: c.seed,
        out: c.out.clone(),
        ..RunConfig::default()
    }
}

fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            write_atomic(&dir.join(name), text.as_bytes())?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn build_window(cfg: &RunConfig, default: (i64, i64)) -> Result<TreeWindow> {
    let (lo, hi) = cfg.window_range()?.unwrap_or(default);
    Ok(TreeWindow::build_with_cap(cfg.spec()?, hi, lo, cfg.cap()?)?)
}

fn cmd_eval(cfg: RunConfig) -> Result<u8> {
    let w = build_window(&cfg, (-4, 4))?;
    let kind: OperatorKind = cfg.op.as_deref().unwrap_or("U").parse()?;
    let f = cfg.function()?;
    let region = parse_region(&w, cfg.region.as_deref().unwrap_or("all"))?;
    let results = batch_eval(&w, kind, &f, &region)?;
    let mut csv = String::from("addr,value_num,value_den,witness_vertex,witness_height,certified\n");
    let mut uncertified = 0usize;
    for (x, r) in &results {
        let cv = r.as_ref().map_err(|e| anyhow!("{x}: {e}"))?;
        uncertified += usize::from(!cv.certified);
        let (wv, wh) = match &cv.witness {
            Some(wit) => (wit.vertex().to_string(), wit.height().to_string()),
            None => (String::new(), String::new()),
        };
        csv.push_str(&format!(
            "{x},{},{},{wv},{wh},{}\n",
            cv.value.numer(),
            cv.value.denom(),
            cv.certified
        ));
    }
    emit(cfg.out.as_deref(), "eval.csv", &csv)?;
    if uncertified > 0 {
        eprintln!("{uncertified} of {} values are not certified; widen the window", results.len());
    }
    Ok(0)
}

fn cmd_decompose(cfg: RunConfig) -> Result<u8> {
    let kind: OperatorKind = cfg.op.as_deref().unwrap_or("U").parse()?;
    let f = cfg.function()?;
    let alpha = rational::parse(cfg.alpha.as_deref().ok_or_else(|| anyhow!("--alpha is required"))?)?;
    let rep = match cfg.window_range()? {
        Some(_) => decompose_maximal(&build_window(&cfg, (0, 1))?, &f, &alpha, kind)?,
        None => decompose_auto(&cfg.spec()?, &f, &alpha, kind, cfg.cap()?)?,
    };
    emit(cfg.out.as_deref(), "decomposition.json", &(rep.to_json() + "\n"))?;
    if rep.checks.all_pass() {
        Ok(0)
    } else {
        eprintln!("decomposition checks failed: {:?}", rep.checks);
        Ok(EXIT_CHECK)
    }
}

fn cmd_verify(id: &str, cfg: RunConfig) -> Result<u8> {
    if !SCENARIOS.contains(&id) {
        eprintln!("unknown scenario {id:?}; expected one of {}", SCENARIOS.join(", "));
        return Ok(EXIT_USAGE);
    }
    let sc = ScenarioConfig {
        tree: cfg.tree.clone(),
        window: cfg.window_range()?,
        seed: cfg.seed.unwrap_or(0),
        trials: cfg.trials,
        cap: cfg.cap()?,
    };
    let rep = run_scenario(id, &sc)?;
    match cfg.out.as_deref() {
        Some(dir) => rep.write_to(dir)?,
        None => emit(None, "", &(rep.to_json() + "\n"))?,
    }
    for c in rep.checks.iter().filter(|c| !c.pass) {
        eprintln!("{} check {}: {}", if c.gating { "failed" } else { "non-gating" }, c.name, c.detail);
    }
    eprintln!("{id}: {:?}", rep.verdict);
    Ok(match rep.verdict {
        Verdict::Pass | Verdict::Exploratory => 0,
        Verdict::Fail => EXIT_CHECK,
    })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use treemax_core::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::VertexCap { .. }) => EXIT_CAP,
        Some(E::WindowTooSmall { .. }) => EXIT_WINDOW,
        _ => EXIT_USAGE,
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Eval { common, op, f, region } => {
            let cfg = RunConfig { op, f, region, ..base_config(&common) }.overlay(common.config.as_deref())?;
            cmd_eval(cfg)
        }
        Command::Decompose { common, op, f, alpha } => {
            let cfg = RunConfig { op, f, alpha, ..base_config(&common) }.overlay(common.config.as_deref())?;
            cmd_decompose(cfg)
        }
        Command::Verify { scenario, common, trials } => {
            let cfg = RunConfig { trials, ..base_config(&common) }.overlay(common.config.as_deref())?;
            cmd_verify(&scenario, cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
