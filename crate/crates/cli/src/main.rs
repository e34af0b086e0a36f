mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Value};

use config::{ClassifyArgs, ConfigFile, Format, Global, RuleArgs, ScanArgs, SimulateArgs, TmcaArgs};
use freezing_ca::classifier::classify;
use freezing_ca::constructions::blockcode::verify_encoded_obstacle;
use freezing_ca::constructions::twophase::{f_kernel, g_kernel, gprime_kernel, h_kernel, TwoPhaseParams};
use freezing_ca::constructions::{compile_tm, halting_obstacle, verify_commutation, verify_fill, verify_obstacle, BlockCode, TMSpec};
use freezing_ca::engine::{origin_fixation_time, step_counted, Boundary, Window};
use freezing_ca::percolation::{fixation_scan, format_probability, parse_probability, sample_window_trial, BernoulliSpec, Probability};
use freezing_ca::rules::{rule_from_family, Alphabet, NeighborFamily, RuleKernel};
use freezing_ca::{Error, VERSION};

#[derive(Parser)]
#[command(name = "fca", version, about = "Freezing cellular automata: classification, simulation, scans and constructions")]
struct Cli {
    #[command(flatten)]
    global: Global,
    /// JSON config file; flags take precedence over its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Criticality class, stable arcs and witness of a neighbor family.
    Classify(ClassifyArgs),
    /// Run a rule from a random or stored window.
    Simulate(SimulateArgs),
    /// Fixation frequency over a grid of densities.
    Scan(ScanArgs),
    /// Turing machine reduction: build, obstacle, verify.
    Tmca {
        #[command(subcommand)]
        action: TmcaCmd,
    },
}

#[derive(Subcommand)]
enum TmcaCmd {
    /// Compile the automaton and summarize its alphabet and patterns.
    Build(TmcaArgs),
    /// Emit the framed halting computation.
    Obstacle(TmcaArgs),
    /// Run the fixedness, fill-in and encoding campaigns.
    Verify(TmcaArgs),
}

enum Failure {
    Input(String),
    Construction(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded(_)
            | Error::ObstacleVerificationFailed
            | Error::NotNormalForm(_)
            | Error::HeadFellOff(_)
            | Error::NotStronglySubcritical => Failure::Construction(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn input<T>(msg: impl Into<String>) -> Res<T> {
    Err(Failure::Input(msg.into()))
}

const CONFIG_KEYS: [&str; 8] = ["seed", "threads", "out", "format", "classify", "simulate", "scan", "tmca"];

fn load_config(path: Option<&Path>) -> Res<ConfigFile> {
    let Some(path) = path else { return Ok(ConfigFile::default()) };
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if let Some(obj) = v.as_object() {
        if let Some(k) = obj.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
            return input(format!("{}: unknown key {k:?}", path.display()));
        }
    }
    serde_json::from_value(v).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Construction(m)) => {
            eprintln!("failure: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Res<()> {
    let file = load_config(cli.config.as_deref())?;
    let global = cli.global.merge(file.global);
    if let Some(t) = global.threads {
        if t == 0 {
            return input("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Input(e.to_string()))?;
    }
    match cli.cmd {
        Cmd::Classify(a) => cmd_classify(&global, a.merge(file.classify)),
        Cmd::Simulate(a) => cmd_simulate(&global, a.merge(file.simulate)),
        Cmd::Scan(a) => cmd_scan(&global, a.merge(file.scan)),
        Cmd::Tmca { action } => {
            let (mode, a) = match action {
                TmcaCmd::Build(a) => ("build", a),
                TmcaCmd::Obstacle(a) => ("obstacle", a),
                TmcaCmd::Verify(a) => ("verify", a),
            };
            cmd_tmca(&global, mode, a.merge(file.tmca))
        }
    }
}

/// Resolved global settings recorded in outputs; the thread count is left
/// out since results do not depend on it.
#[derive(Serialize)]
struct GlobalRecord {
    seed: u64,
    out: Option<PathBuf>,
    format: Format,
}

fn record(g: &Global, format: Format) -> GlobalRecord {
    GlobalRecord { seed: g.seed.unwrap_or(0), out: g.out.clone(), format }
}

fn envelope(command: &str, g: &GlobalRecord, args: &impl Serialize, body: Value) -> Value {
    let mut v = json!({
        "version": VERSION,
        "command": command,
        "config": { "global": g, "args": args },
    });
    if let (Some(o), Value::Object(b)) = (v.as_object_mut(), body) {
        o.extend(b);
    }
    v
}

fn write_out(g: &Global, bytes: &[u8]) -> Res<()> {
    match &g.out {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes)?;
            so.flush()?;
            Ok(())
        }
    }
}

fn write_json(g: &Global, v: &Value) -> Res<()> {
    let mut s = serde_json::to_string_pretty(v).expect("plain data");
    s.push('\n');
    write_out(g, s.as_bytes())
}

fn read_text(p: &Path) -> Res<String> {
    fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))
}

fn cmd_classify(g: &Global, a: ClassifyArgs) -> Res<()> {
    let format = g.format.unwrap_or(Format::Json);
    if format != Format::Json {
        return input("classify only writes json");
    }
    let Some(path) = &a.family_file else { return input("classify needs a family file") };
    let fam = NeighborFamily::from_json(&read_text(path)?)?;
    let c = classify(&fam);
    let body = json!({ "family": fam, "tag": c.tag.to_string(), "criticality": c });
    write_json(g, &envelope("classify", &record(g, format), &a, body))
}

fn ratio(s: &str) -> Res<Ratio<i64>> {
    let p = parse_probability(s)?;
    Ok(Ratio::new(*p.numer() as i64, *p.denom() as i64))
}

fn resolve_rule(r: &mut RuleArgs) -> Res<(RuleKernel, Vec<String>)> {
    let name = r.rule.get_or_insert_with(|| "oriented".into()).clone();
    let mut caveats = Vec::new();
    let kernel = match name.as_str() {
        "oriented" | "h" => {
            let fam = NeighborFamily::from_json(r#"{"neighbor_sets":[[[0,1],[1,1]]]}"#)?;
            rule_from_family(&fam)
        }
        "family" => {
            let Some(p) = &r.family else { return input("--rule family needs --family FILE") };
            rule_from_family(&NeighborFamily::from_json(&read_text(p)?)?)
        }
        "twophase-gprime" | "twophase-g" | "twophase-h" | "twophase-f" => {
            let n = *r.n_block.get_or_insert(4);
            let params = match &r.epsilon {
                Some(e) => {
                    if r.eps1.is_some() || r.eps2.is_some() || r.delta.is_some() {
                        return input("--epsilon excludes --eps1, --eps2 and --delta");
                    }
                    TwoPhaseParams::from_epsilon(n, ratio(e)?)?
                }
                None => {
                    let d = TwoPhaseParams::default();
                    let get = |v: &Option<String>, dflt: Ratio<i64>| v.as_deref().map(ratio).unwrap_or(Ok(dflt));
                    TwoPhaseParams::new(n, get(&r.eps1, d.eps1)?, get(&r.eps2, d.eps2)?, get(&r.delta, d.delta)?)?
                }
            };
            let show = |x: Ratio<i64>| format!("{}/{}", x.numer(), x.denom());
            r.eps1 = Some(show(params.eps1));
            r.eps2 = Some(show(params.eps2));
            r.delta = Some(show(params.delta));
            caveats.push("two-phase rule: exploration only; finite windows cannot show the measure-level transitions".into());
            match name.as_str() {
                "twophase-gprime" => gprime_kernel(&params)?,
                "twophase-g" => g_kernel(&params)?,
                "twophase-h" => h_kernel(&params)?,
                _ => f_kernel(&params)?,
            }
        }
        other => return input(format!("unknown rule {other:?}")),
    };
    Ok((kernel, caveats))
}

fn parse_boundary(s: &str) -> Res<Boundary> {
    s.parse::<Boundary>().map_err(|e| Failure::Input(format!("{e}")))
}

fn load_window(p: &Path, boundary: Boundary) -> Res<Window> {
    let bytes = fs::read(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
    if p.extension().is_some_and(|e| e == "json") {
        let v: Value = serde_json::from_slice(&bytes).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
        Ok(Window::from_json(&v, &Alphabet::binary(), boundary)?)
    } else {
        Ok(Window::from_pbm(&bytes, boundary)?)
    }
}

fn cmd_simulate(g: &Global, mut a: SimulateArgs) -> Res<()> {
    let format = g.format.unwrap_or(Format::Json);
    let (kernel, caveats) = resolve_rule(&mut a.rule)?;
    let boundary = parse_boundary(a.boundary.get_or_insert_with(|| "periodic".into()))?;
    let init = a.init.get_or_insert_with(|| "bernoulli".into()).clone();
    let mut w = match init.as_str() {
        "bernoulli" => {
            let p = parse_probability(a.p.get_or_insert_with(|| "0.5".into()))?;
            let (wd, ht) = (*a.width.get_or_insert(128), *a.height.get_or_insert(128));
            if wd == 0 || ht == 0 {
                return input("window dimensions must be positive");
            }
            sample_window_trial(BernoulliSpec { p, seed: g.seed.unwrap_or(0) }, 0, wd, ht, boundary)
        }
        "file" => {
            let Some(p) = &a.init_file else { return input("--init file needs --init-file") };
            let w = load_window(p, boundary)?;
            a.width = Some(w.width());
            a.height = Some(w.height());
            w
        }
        other => return input(format!("unknown init {other:?}")),
    };
    let horizon = *a.horizon.get_or_insert(256);
    let every = *a.snapshots_every.get_or_insert(0);
    let query = *a.origin_query.get_or_insert(false);

    let mut warnings: Vec<String> = Vec::new();
    let origin_time = if query {
        match origin_fixation_time(&w, &kernel, horizon) {
            Ok(t) => Some(t),
            Err(Error::ExactnessViolated) => {
                warnings.push("origin query leaves the exact region; no fixation time reported".into());
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };

    let mut frames: Vec<(usize, Window)> = Vec::new();
    if every > 0 {
        frames.push((0, w.clone()));
    }
    let (mut steps, mut fixed, mut changes) = (0usize, false, Vec::new());
    while steps < horizon {
        let (next, changed) = step_counted(&w, &kernel)?;
        if changed == 0 {
            fixed = true;
            break;
        }
        steps += 1;
        changes.push(changed);
        w = next;
        if every > 0 && steps % every == 0 {
            frames.push((steps, w.clone()));
        }
    }
    if !fixed {
        fixed = step_counted(&w, &kernel)?.1 == 0;
    }
    if frames.last().map(|f| f.0) != Some(steps) {
        frames.push((steps, w.clone()));
    }
    let report = json!({ "steps_taken": steps, "fixed": fixed, "changed_cells_per_step": changes });
    let alphabet = kernel.alphabet().clone();
    let rec = record(g, format);
    let mut body = json!({
        "rule": kernel.name(),
        "report": report,
        "caveats": caveats,
        "warnings": warnings,
    });
    if query {
        body["origin_fixation_time"] = json!(origin_time.flatten());
    }
    match format {
        Format::Json => {
            body["frames"] = frames.iter().map(|(t, f)| json!({ "step": t, "window": f.to_json(&alphabet) })).collect();
            write_json(g, &envelope("simulate", &rec, &a, body))
        }
        Format::Csv => {
            let mut s = String::from("step,changed\n");
            for (i, c) in changes.iter().enumerate() {
                s.push_str(&format!("{},{c}\n", i + 1));
            }
            write_out(g, s.as_bytes())
        }
        Format::Pbm => match &g.out {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
                let mut files = Vec::new();
                for (t, f) in &frames {
                    let name = format!("step_{t:06}.pbm");
                    fs::write(dir.join(&name), f.to_pbm(true))?;
                    files.push(name);
                }
                body["frames"] = json!(files);
                let mut s = serde_json::to_string_pretty(&envelope("simulate", &rec, &a, body)).expect("plain data");
                s.push('\n');
                std::io::stdout().write_all(s.as_bytes())?;
                Ok(())
            }
            None => write_out(g, &frames.last().expect("final frame").1.to_pbm(true)),
        },
    }
}

fn parse_grid(s: &str) -> Res<Vec<Probability>> {
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [one] => one.split(',').map(parse_probability).collect::<Result<Vec<_>, _>>()?,
        [a, b, step] => {
            let (a, b, step) = (parse_probability(a)?, parse_probability(b)?, parse_probability(step)?);
            if step == Ratio::from_integer(0) || b < a {
                return input("range needs start <= stop and a positive step");
            }
            let mut v = Vec::new();
            let mut p = a;
            while p <= b {
                v.push(p);
                p += step;
            }
            v
        }
        _ => return input(format!("cannot read p-grid {s:?}")),
    };
    if grid.is_empty() {
        return input("empty p-grid");
    }
    Ok(grid)
}

fn cmd_scan(g: &Global, mut a: ScanArgs) -> Res<()> {
    let format = g.format.unwrap_or(Format::Csv);
    let (kernel, caveats) = resolve_rule(&mut a.rule)?;
    let grid = parse_grid(a.p_grid.get_or_insert_with(|| "0.1:0.9:0.1".into()))?;
    let (w, h) = (*a.width.get_or_insert(128), *a.height.get_or_insert(128));
    let horizon = *a.horizon.get_or_insert(256);
    let trials = *a.trials.get_or_insert(200);
    let mut res = fixation_scan(&kernel, &grid, w, h, horizon, trials, g.seed.unwrap_or(0))?;
    res.metadata.caveats.extend(caveats);
    match format {
        Format::Csv => write_out(g, res.to_csv().as_bytes()),
        Format::Json => {
            let rows: Vec<Value> = res
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "p": format_probability(r.p),
                        "trials": r.trials,
                        "successes": r.successes,
                        "estimate": r.estimate,
                        "ci_low": r.wilson_ci_low,
                        "ci_high": r.wilson_ci_high,
                    })
                })
                .collect();
            let body = json!({
                "rule": kernel.name(),
                "rows": rows,
                "metadata": res.metadata,
                "crossover_half": res.crossover(0.5),
            });
            write_json(g, &envelope("scan", &record(g, format), &a, body))
        }
        Format::Pbm => input("scan writes csv or json"),
    }
}

fn cmd_tmca(g: &Global, mode: &str, mut a: TmcaArgs) -> Res<()> {
    let format = g.format.unwrap_or(Format::Json);
    let Some(path) = &a.tm_file else { return input("tmca needs a machine file") };
    let mut tm = TMSpec::from_json(&read_text(path)?)?;
    if *a.normalize.get_or_insert(false) {
        tm = tm.normalize();
    }
    let budget = *a.budget.get_or_insert(10_000);
    let ft = compile_tm(&tm)?;
    let code = BlockCode::for_ft(&ft)?;
    let seed = g.seed.unwrap_or(0);
    let rec = record(g, format);
    let command = format!("tmca {mode}");
    match mode {
        "build" => {
            if format != Format::Json {
                return input("tmca build writes json");
            }
            let body = json!({
                "machine": serde_json::from_str::<Value>(&tm.to_json()).expect("own json"),
                "summary": ft.summary(),
                "alphabet": ft.alphabet().names(),
                "block_side": code.side(),
                "gt_radius": 2 * code.side() - 1,
            });
            write_json(g, &envelope(&command, &rec, &a, body))
        }
        "obstacle" => {
            let obs = halting_obstacle(&ft, budget)?;
            match format {
                Format::Json => {
                    let w = Window::from_grid(&obs, ft.alphabet(), Boundary::One);
                    let body = json!({ "pattern": w.to_json(ft.alphabet()), "block_side": code.side() });
                    write_json(g, &envelope(&command, &rec, &a, body))
                }
                Format::Pbm => {
                    let fine = code.encode(&obs);
                    let w = Window::from_grid(&fine, &Alphabet::binary(), Boundary::One);
                    write_out(g, &w.to_pbm(true))
                }
                Format::Csv => input("tmca obstacle writes json or pbm"),
            }
        }
        _ => {
            if format != Format::Json {
                return input("tmca verify writes json");
            }
            let contexts = *a.contexts.get_or_insert(20);
            let steps = *a.steps.get_or_insert(50);
            let fill_windows = *a.fill_windows.get_or_insert(50);
            let fill_side = *a.fill_side.get_or_insert(40);
            let comm = *a.commutation_windows.get_or_insert(100);
            let halts = match tm.simulate(budget) {
                Ok(_) => true,
                Err(Error::BudgetExceeded(_)) => false,
                Err(e) => return Err(e.into()),
            };
            let mut passed = true;
            let mut body = json!({ "halts_within_budget": halts });
            let obs = if halts {
                let obs = halting_obstacle(&ft, budget)?;
                let rep = verify_obstacle(&ft, &obs, contexts, steps, seed);
                passed &= rep.failures == 0;
                body["obstacle"] = json!(rep);
                let erep = verify_encoded_obstacle(&ft, &code, &obs, contexts.min(4), steps.min(4), seed)?;
                passed &= erep.failures == 0;
                body["encoded_obstacle"] = json!(erep);
                Some(obs)
            } else {
                None
            };
            let fill = verify_fill(&ft, fill_windows, fill_side, fill_side, seed);
            if !halts {
                passed &= fill.filled == fill.windows;
            }
            body["fill"] = json!(fill);
            body["fill_gating"] = json!(!halts);
            let crep = verify_commutation(&ft, &code, obs.as_ref(), comm, 8, seed)?;
            passed &= crep.mismatches == 0;
            body["commutation"] = json!(crep);
            body["passed"] = json!(passed);
            write_json(g, &envelope(&command, &rec, &a, body))?;
            if passed {
                Ok(())
            } else {
                Err(Failure::Construction("verification campaign reported failures".into()))
            }
        }
    }
}
