use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use trsat_core::baselines::{run_external_solver, walksat, WalkSatConfig, EXTERNAL_SOLVER_ENV};
use trsat_core::generators::{
    encode_circuit, encode_k_clique, encode_k_coloring, encode_k_cover, gen_random_3sat, gen_random_circuit,
    gen_random_graph, simulated_output_target, GateNetlist,
};
use trsat_core::solver::{solve_exact, solve_max_sat, verify_result};
use trsat_core::training::{evaluate, load_dataset, train, train_with_validation, write_dataset, TrainConfig};
use trsat_core::{
    count_satisfied, load_checkpoint, parse_dimacs, save_checkpoint, CnfFormula, MaxSatOracle, ModelConfig, TrsatModel,
};

use crate::error::{CliError, ErrorKind};
use crate::manifest::{write_atomic, RunManifest};
use crate::settings::Settings;
use crate::{BenchArgs, Cli, Command, EvalArgs, GenArgs, GenFamily, OracleArgs, SolveArgs, SolveMode, TrainArgs};

pub(crate) fn dispatch(cli: &Cli, argv: &[String]) -> Result<String, CliError> {
    let manifest_override = cli.manifest.as_deref();
    match &cli.command {
        Command::Gen(a) => gen(a, argv, manifest_override),
        Command::Train(a) => train_cmd(a, argv, manifest_override),
        Command::Solve(a) => solve(a, argv, manifest_override),
        Command::Eval(a) => eval(a, argv, manifest_override),
        Command::Bench(a) => bench(a, argv, manifest_override),
        Command::Oracle(a) => oracle(a, argv, manifest_override),
    }
}

fn manifest_path(explicit: Option<&Path>, next_to: Option<&Path>, command: &str) -> PathBuf {
    match (explicit, next_to) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(out)) => with_suffix(out, ".manifest.json"),
        (None, None) => PathBuf::from(format!("trsat_{command}.manifest.json")),
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(suffix);
    PathBuf::from(p)
}

fn read_cnf(path: &Path) -> Result<CnfFormula, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(parse_dimacs(bytes)?)
}

fn load_model(path: &Path) -> Result<TrsatModel, CliError> {
    if !path.exists() {
        return Err(CliError::new(ErrorKind::MissingFile, format!("{}: no such checkpoint", path.display())));
    }
    Ok(load_checkpoint(path)?)
}

fn gen(a: &GenArgs, argv: &[String], manifest: Option<&Path>) -> Result<String, CliError> {
    let out = a.out.as_deref().ok_or_else(|| CliError::new(ErrorKind::Usage, "gen needs --out <dir>"))?;
    if a.count == 0 {
        return Err(CliError::config("--count must be at least 1"));
    }
    let mut m = RunManifest::start("gen", argv);
    m.seed("seed", a.seed);
    m.config("count", a.count);
    let seeds = (0..a.count as u64).map(|i| a.seed.wrapping_add(i));
    let mut netlists = Vec::new();
    let (prefix, formulas): (&str, Vec<CnfFormula>) = match &a.family {
        GenFamily::Rand3 { vars, clauses } => {
            m.config("vars", vars);
            m.config("clauses", clauses);
            ("rand3", seeds.map(|s| gen_random_3sat(*vars, *clauses, s)).collect::<Result<_, _>>()?)
        }
        GenFamily::Color(g) | GenFamily::Cover(g) | GenFamily::Clique(g) => {
            m.config("vertices", g.vertices);
            m.config("edge_prob", g.edge_prob);
            m.config("k", g.k);
            let (prefix, encode): (&str, fn(&_, usize) -> _) = match &a.family {
                GenFamily::Color(_) => ("color", encode_k_coloring),
                GenFamily::Cover(_) => ("cover", encode_k_cover),
                _ => ("clique", encode_k_clique),
            };
            let fs = seeds
                .map(|s| encode(&gen_random_graph(g.vertices, g.edge_prob, s)?, g.k))
                .collect::<Result<_, _>>()?;
            (prefix, fs)
        }
        GenFamily::Circuit(c) => {
            if let Some(path) = &c.netlist {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                m.input(path)?;
                let net = GateNetlist::parse(&text)?;
                let constraints = parse_constraints(&c.constrain)?;
                m.config("constrain", c.constrain.join(","));
                let refs: Vec<(&str, bool)> = constraints.iter().map(|(w, v)| (w.as_str(), *v)).collect();
                ("circuit", vec![encode_circuit(&net, &refs)?])
            } else {
                m.config("inputs", c.inputs);
                m.config("gates", c.gates);
                m.config("outputs", c.outputs);
                let mut fs = Vec::new();
                for s in seeds {
                    let net = gen_random_circuit(c.inputs, c.gates, c.outputs, s)?;
                    let target = simulated_output_target(&net, s);
                    let refs: Vec<(&str, bool)> = target.iter().map(|(w, v)| (w.as_str(), *v)).collect();
                    fs.push(encode_circuit(&net, &refs)?);
                    netlists.push((net, target));
                }
                ("circuit", fs)
            }
        }
    };
    let paths = write_dataset(out, prefix, &formulas)?;
    for (path, (net, target)) in paths.iter().zip(&netlists) {
        let mut text = net.to_string();
        for (w, v) in target {
            let _ = writeln!(text, "# constrain {w}={}", u8::from(*v));
        }
        let net_path = path.with_extension("net");
        write_atomic(&net_path, text.as_bytes())?;
        m.output(&net_path)?;
    }
    let mut report = String::new();
    for (path, f) in paths.iter().zip(&formulas) {
        m.output(path)?;
        let _ = writeln!(report, "{} vars {} clauses {}", path.display(), f.num_variables(), f.num_clauses());
    }
    m.finish(&manifest.map_or_else(|| out.join("manifest.json"), Path::to_path_buf))?;
    Ok(report)
}

fn parse_constraints(items: &[String]) -> Result<Vec<(String, bool)>, CliError> {
    items
        .iter()
        .map(|item| {
            let (w, v) = item.split_once('=').ok_or_else(|| CliError::config(format!("constraint `{item}` is not wire=0|1")))?;
            match v.trim() {
                "0" => Ok((w.trim().to_string(), false)),
                "1" => Ok((w.trim().to_string(), true)),
                _ => Err(CliError::config(format!("constraint `{item}` is not wire=0|1"))),
            }
        })
        .collect()
}

const TRAIN_KEYS: &[&str] = &[
    "epochs",
    "warmup_steps",
    "lr_factor",
    "shuffle_seed",
    "noise_seed",
    "resample_noise",
    "validation_fraction",
    "checkpoint_every",
    "checkpoint_dir",
];

fn train_settings(a: &TrainArgs) -> Result<(ModelConfig, TrainConfig, Settings), CliError> {
    let mut s = Settings::load(a.config.as_deref())?;
    for key in ["init_seed", "shuffle_seed", "noise_seed"] {
        s.flag(key, a.seed);
    }
    s.flag("epochs", a.epochs);
    s.flag("warmup_steps", a.warmup_steps);
    s.flag("lr_factor", a.lr_factor);
    s.flag("channels", a.channels);
    s.flag("heads", a.heads);
    s.flag("ffn_hidden", a.ffn_hidden);
    s.flag("num_encoder_layers", a.encoder_layers);
    s.flag("num_decoder_layers", a.decoder_layers);
    s.flag("checkpoint_every", a.checkpoint_every);
    s.flag("checkpoint_dir", a.checkpoint_dir.as_ref().map(|p| p.display()));
    for item in &a.overrides {
        let (k, v) = item.split_once('=').ok_or_else(|| CliError::config(format!("--set `{item}` is not key=value")))?;
        s.flag(k.trim(), Some(v.trim()));
    }
    s.check_keys(|k| ModelConfig::has_key(k) || TRAIN_KEYS.contains(&k))?;

    let mut model_cfg = ModelConfig::default();
    for (k, v) in s.iter().filter(|(k, _)| ModelConfig::has_key(k)) {
        model_cfg.set(k, v)?;
    }
    model_cfg.validate()?;
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        epochs: s.get_or("epochs", d.epochs)?,
        warmup_steps: s.get_or("warmup_steps", d.warmup_steps)?,
        lr_factor: s.get_or("lr_factor", d.lr_factor)?,
        shuffle_seed: s.get_or("shuffle_seed", d.shuffle_seed)?,
        noise_seed: s.get_or("noise_seed", d.noise_seed)?,
        resample_noise: s.get_or("resample_noise", d.resample_noise)?,
        validation_fraction: s.get_or("validation_fraction", d.validation_fraction)?,
        checkpoint_every: s.get("checkpoint_every")?,
        checkpoint_dir: s.get::<String>("checkpoint_dir")?.map(PathBuf::from),
    };
    cfg.validate()?;
    Ok((model_cfg, cfg, s))
}

fn train_cmd(a: &TrainArgs, argv: &[String], manifest: Option<&Path>) -> Result<String, CliError> {
    let mut m = RunManifest::start("train", argv);
    let (model_cfg, cfg, _) = train_settings(a)?;
    if let Some(c) = &a.config {
        m.input(c)?;
    }
    for line in model_cfg.to_text().lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            m.config(k, v);
        }
    }
    m.config("epochs", cfg.epochs);
    m.config("warmup_steps", cfg.warmup_steps);
    m.config("lr_factor", cfg.lr_factor);
    m.config("resample_noise", cfg.resample_noise);
    m.config("validation_fraction", cfg.validation_fraction);
    m.seed("init_seed", model_cfg.init_seed);
    m.seed("shuffle_seed", cfg.shuffle_seed);
    m.seed("noise_seed", cfg.noise_seed);

    let t = Instant::now();
    let train_set = load_dataset(&a.data)?;
    let val_set = a.val_data.as_ref().map(load_dataset).transpose()?;
    for (p, _) in train_set.iter().chain(val_set.iter().flatten()) {
        m.input(p)?;
    }
    m.timing("load", t);
    let formulas = |set: &[(PathBuf, CnfFormula)]| set.iter().map(|(_, f)| f.clone()).collect::<Vec<_>>();

    let t = Instant::now();
    let (model, history) = match &val_set {
        Some(v) => train_with_validation(&formulas(&train_set), &formulas(v), &cfg, model_cfg)?,
        None => train(&formulas(&train_set), &cfg, model_cfg)?,
    };
    m.timing("train", t);
    save_checkpoint(&model, &a.out)?;
    let history_path = a.history.clone().unwrap_or_else(|| with_suffix(&a.out, ".history.csv"));
    write_atomic(&history_path, history.to_csv().as_bytes())?;
    m.output(&a.out)?;
    m.output(&history_path)?;
    m.finish(&manifest_path(manifest, Some(&a.out), "train"))?;

    let last = history.last().expect("at least one epoch");
    let mut s = String::new();
    let _ = writeln!(s, "parameters {}", model.num_parameters());
    let _ = writeln!(
        s,
        "epoch {} loss {:.6} train_rate {:.4} val_rate {}",
        last.epoch,
        last.loss,
        last.train_rate,
        last.val_rate.map_or("-".to_string(), |v| format!("{v:.4}"))
    );
    let _ = writeln!(s, "checkpoint {}", a.out.display());
    let _ = writeln!(s, "history {}", history_path.display());
    Ok(s)
}

fn solve(a: &SolveArgs, argv: &[String], manifest: Option<&Path>) -> Result<String, CliError> {
    let mut m = RunManifest::start("solve", argv);
    m.seed("seed", a.seed);
    m.config("mode", format!("{:?}", a.mode).to_lowercase());
    let model = load_model(&a.model)?;
    let f = read_cnf(&a.cnf)?;
    m.input(&a.model)?;
    m.input(&a.cnf)?;
    let t = Instant::now();
    let report = match a.mode {
        SolveMode::Maxsat => {
            let (assignment, stats) = solve_max_sat(&model, &f, a.seed)?;
            format!(
                "status maxsat\nsatisfied {} of {}\nv {} 0\n",
                stats.satisfied,
                stats.total,
                assignment.to_dimacs_literals()
            )
        }
        SolveMode::Exact => {
            m.config("max_iters", a.max_iters);
            let r = solve_exact(&model, &f, a.max_iters, a.seed)?;
            if !verify_result(&f, &r) {
                return Err(CliError::new(ErrorKind::Soundness, "satisfied result failed re-verification"));
            }
            r.report()
        }
    };
    m.timing("solve", t);
    if let Some(out) = &a.out {
        write_atomic(out, report.as_bytes())?;
        m.output(out)?;
    }
    m.finish(&manifest_path(manifest, a.out.as_deref(), "solve"))?;
    Ok(report)
}

fn eval(a: &EvalArgs, argv: &[String], manifest: Option<&Path>) -> Result<String, CliError> {
    let mut m = RunManifest::start("eval", argv);
    m.seed("seed", a.seed);
    let model = load_model(&a.model)?;
    m.input(&a.model)?;
    let mut report = String::new();
    for dir in &a.data {
        let t = Instant::now();
        let set = load_dataset(dir)?;
        for (p, _) in &set {
            m.input(p)?;
        }
        let formulas: Vec<CnfFormula> = set.into_iter().map(|(_, f)| f).collect();
        let summary = evaluate(&model, &formulas, a.seed)?;
        let name = dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned());
        let _ = writeln!(report, "{name} {:.4}±{:.4} {}", summary.mean, summary.std, formulas.len());
        m.timing(&format!("eval {name}"), t);
    }
    if let Some(out) = &a.out {
        write_atomic(out, report.as_bytes())?;
        m.output(out)?;
    }
    m.finish(&manifest_path(manifest, a.out.as_deref(), "eval"))?;
    Ok(report)
}

const BENCH_KEYS: &[&str] = &["reps", "max_flips", "noise_p", "restarts", "seed"];

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort_unstable();
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2
    }
}

fn timed<T>(reps: usize, mut f: impl FnMut() -> Result<T, CliError>) -> Result<(T, Duration), CliError> {
    let mut times = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps {
        let t = Instant::now();
        last = Some(f()?);
        times.push(t.elapsed());
    }
    Ok((last.expect("reps >= 1"), median(times)))
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn bench(a: &BenchArgs, argv: &[String], manifest: Option<&Path>) -> Result<String, CliError> {
    let mut m = RunManifest::start("bench", argv);
    let mut s = Settings::load(a.config.as_deref())?;
    s.flag("reps", a.reps);
    s.flag("max_flips", a.max_flips);
    s.flag("noise_p", a.noise_p);
    s.flag("restarts", a.restarts);
    s.flag("seed", a.seed);
    s.check_keys(|k| BENCH_KEYS.contains(&k))?;
    let reps: usize = s.get_or("reps", 5)?;
    if reps == 0 {
        return Err(CliError::config("reps must be at least 1"));
    }
    let seed: u64 = s.get_or("seed", 0)?;
    let d = WalkSatConfig::default();
    let ws = WalkSatConfig {
        max_flips: s.get_or("max_flips", d.max_flips)?,
        noise_p: s.get_or("noise_p", d.noise_p)?,
        restarts: s.get_or("restarts", d.restarts)?,
        seed,
    };
    ws.validate().map_err(|e| CliError::config(e.to_string()))?;
    m.config("reps", reps);
    m.config("max_flips", ws.max_flips);
    m.config("noise_p", ws.noise_p);
    m.config("restarts", ws.restarts);
    m.seed("seed", seed);

    let model = load_model(&a.model)?;
    m.input(&a.model)?;
    let set = load_dataset(&a.data)?;
    let external = std::env::var_os(EXTERNAL_SOLVER_ENV).map(PathBuf::from);
    if let Some(bin) = &external {
        m.config("external_solver", bin.display());
    }

    let mut report = String::from("instance vars clauses model_ms model_rate walksat_ms walksat_solved walksat_flips");
    if external.is_some() {
        report.push_str(" external_ms external_status");
    }
    report.push_str(" speedup_vs_walksat\n");
    let (mut rates, mut speedups, mut solved) = (Vec::new(), Vec::new(), 0);
    for (i, (path, f)) in set.iter().enumerate() {
        m.input(path)?;
        let inst_seed = seed.wrapping_add(i as u64);
        let ((_, stats), model_t) = timed(reps, || Ok(solve_max_sat(&model, f, inst_seed)?))?;
        let cfg = WalkSatConfig { seed: inst_seed, ..ws };
        let (out, ws_t) = timed(reps, || walksat(f, &cfg).map_err(|e| CliError::config(e.to_string())))?;
        if let Some(a) = &out.assignment {
            if !count_satisfied(f, a).map(|s| s.all_satisfied()).unwrap_or(false) {
                return Err(CliError::new(ErrorKind::Soundness, "WalkSAT returned a non-satisfying assignment"));
            }
            solved += 1;
        }
        let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        let speedup = ms(ws_t) / ms(model_t).max(1e-9);
        let _ = write!(
            report,
            "{name} {} {} {:.3} {:.4} {:.3} {} {}",
            f.num_variables(),
            f.num_clauses(),
            ms(model_t),
            stats.completion_rate,
            ms(ws_t),
            u8::from(out.solved()),
            out.flips
        );
        if let Some(bin) = &external {
            let (ext, ext_t) = timed(reps, || {
                run_external_solver(bin, path, f.num_variables()).map_err(|e| CliError::new(ErrorKind::Runtime, e.to_string()))
            })?;
            let _ = write!(report, " {:.3} {:?}", ms(ext_t), ext.status);
        }
        let _ = writeln!(report, " {speedup:.3}");
        rates.push(stats.completion_rate);
        speedups.push(speedup);
    }
    speedups.sort_by(f64::total_cmp);
    let _ = writeln!(
        report,
        "summary instances {} model_mean_rate {:.4} walksat_solved {} median_speedup_vs_walksat {:.3}",
        set.len(),
        rates.iter().sum::<f64>() / rates.len() as f64,
        solved,
        speedups[speedups.len() / 2]
    );
    if let Some(out) = &a.out {
        write_atomic(out, report.as_bytes())?;
        m.output(out)?;
    }
    m.finish(&manifest_path(manifest, a.out.as_deref(), "bench"))?;
    Ok(report)
}

fn oracle(a: &OracleArgs, argv: &[String], manifest: Option<&Path>) -> Result<String, CliError> {
    let mut m = RunManifest::start("oracle", argv);
    m.config("cap", a.cap);
    let f = read_cnf(&a.cnf)?;
    m.input(&a.cnf)?;
    let t = Instant::now();
    let r = MaxSatOracle::with_cap(a.cap).solve(&f)?;
    m.timing("solve", t);
    m.finish(&manifest_path(manifest, None, "oracle"))?;
    Ok(format!("max_satisfied {} of {}\nv {} 0\n", r.best_count, f.num_clauses(), r.witness.to_dimacs_literals()))
}
