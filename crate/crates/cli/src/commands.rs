use std::collections::BTreeMap;
use std::path::Path;

use doobkit::diffop::{
    check_boundary_eq, density_check, ground_state_residual, h_transform, verify_ground_state, DiffusionModel,
};
use doobkit::discrete::{condition, StochasticMatrix};
use doobkit::exec::Execution;
use doobkit::experiments::{run_experiment, EXPERIMENTS};
use doobkit::models::{catalog, default_spec, MatrixKind, ModelSpec, MODEL_NAMES};
use doobkit::polyring::{fmt_rational, to_text, Poly};
use doobkit::simkit::{
    conditioned_paths, matrix_brownian, sde_paths, spectral_map, BoundaryPolicy, EnsembleSample, SimConfig,
    SpectralMap,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::{ChainAction, Cli, Command, CompareArgs, Emit, Format, MapArg, MatrixArg, ModelArgs, ModelsAction};
use crate::{ParamArgs, PolicyArg, SimulateArgs};

type CmdResult = Result<bool, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// `println!` that stops quietly when stdout is closed (`doobkit ... | head`).
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let mut out = std::io::stdout().lock();
        if writeln!(out, $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

fn print_json<T: Serialize>(v: &T) -> Result<(), String> {
    outln!("{}", serde_json::to_string_pretty(v).map_err(err)?);
    Ok(())
}

pub fn run(cli: Cli) -> CmdResult {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Models { action } => models(action),
        Command::Verify { model } => verify(&cfg, &model),
        Command::Htransform { model, emit } => htransform(&cfg, &model, emit),
        Command::Simulate(args) => simulate(&cfg, &args),
        Command::Compare(args) => compare(&cfg, &args),
        Command::Chain { action } => chain(action),
        Command::Config => {
            print_json(&RunConfig::default())?;
            Ok(true)
        }
    }
}

/// Catalogue spec from the default parameters, then the config file, then flags.
fn spec_from(name: &str, cfg_params: &BTreeMap<String, String>, flags: &ParamArgs) -> Result<ModelSpec, String> {
    let mut params: BTreeMap<String, String> = default_spec(name)
        .map_err(err)?
        .params()
        .into_iter()
        .map(|(k, v)| (k.to_string(), fmt_rational(&v)))
        .collect();
    for (k, v) in cfg_params {
        params.insert(k.clone(), v.clone());
    }
    for (k, v) in flags.pairs() {
        params.insert(k.to_string(), v);
    }
    let allowed = ModelSpec::param_names(name).map_err(err)?;
    let pairs: Vec<(&str, &str)> = params
        .iter()
        .filter(|(k, _)| allowed.contains(&k.as_str()))
        .map(|(k, v)| (k.as_str(), v.as_str()))
        .collect();
    ModelSpec::from_text(name, &pairs).map_err(err)
}

enum Source {
    Catalog(ModelSpec),
    File(String, DiffusionModel),
}

impl Source {
    fn name(&self) -> String {
        match self {
            Source::Catalog(s) => s.describe(),
            Source::File(path, _) => path.clone(),
        }
    }

    fn build(&self) -> Result<DiffusionModel, String> {
        match self {
            Source::Catalog(s) => s.build().map_err(err),
            Source::File(_, m) => Ok(m.clone()),
        }
    }
}

fn load_model_file(path: &Path) -> Result<DiffusionModel, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    DiffusionModel::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn sources(cfg: &RunConfig, args: &ModelArgs, allow_all: bool) -> Result<Vec<Source>, String> {
    if let Some(path) = &args.file {
        return Ok(vec![Source::File(path.display().to_string(), load_model_file(path)?)]);
    }
    let name = args
        .model
        .clone()
        .or_else(|| cfg.model.clone())
        .ok_or("no model given; use --model NAME or --file MODEL.json")?;
    if name == "all" {
        if !allow_all {
            return Err("`all` is only accepted by verify".into());
        }
        let mut out: Vec<Source> = catalog().into_iter().map(Source::Catalog).collect();
        out.push(Source::Catalog(ModelSpec::Ou { n: 2 }));
        return Ok(out);
    }
    Ok(vec![Source::Catalog(spec_from(&name, &cfg.params, &args.params)?)])
}

fn models(action: ModelsAction) -> CmdResult {
    match action {
        ModelsAction::List => {
            for name in MODEL_NAMES {
                let params = ModelSpec::param_names(name).map_err(err)?;
                outln!("{name:<14} {}", params.join(" "));
            }
        }
        ModelsAction::Show { name, params } => {
            let spec = spec_from(&name, &BTreeMap::new(), &params)?;
            let m = spec.build().map_err(err)?;
            print_json(&json!({
                "spec": spec.describe(),
                "has_density": spec.has_density(),
                "model": m.to_doc(),
            }))?;
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name,
            pass,
            detail: detail.into(),
        }
    }
}

fn nonzero(m: &DiffusionModel, polys: &[Poly]) -> String {
    let bad: Vec<String> = polys
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(i, p)| format!("[{i}] {}", to_text(p, &m.vars)))
        .collect();
    if bad.is_empty() {
        "identically zero".into()
    } else {
        format!("nonzero residuals: {}", bad.join("; "))
    }
}

fn certificate(src: &Source) -> Value {
    let mut checks = Vec::new();
    let m = match src.build() {
        Ok(m) => m,
        Err(e) => {
            checks.push(Check::new("build", false, e));
            return json!({"model": src.name(), "pass": false, "checks": checks});
        }
    };
    match m.validate() {
        Ok(()) => checks.push(Check::new("shape", true, format!("{} variables", m.nvars()))),
        Err(e) => checks.push(Check::new("shape", false, e.to_string())),
    }
    let boundary_ok = match check_boundary_eq(&m) {
        Ok(data) => {
            let c: Vec<String> = data.c.iter().map(fmt_rational).collect();
            checks.push(Check::new("boundary_equation", true, format!("c = [{}]", c.join(", "))));
            true
        }
        Err(e) => {
            checks.push(Check::new("boundary_equation", false, e.to_string()));
            false
        }
    };
    let density = match src {
        Source::Catalog(s) => s.has_density(),
        Source::File(..) => true,
    };
    if density {
        let r = density_check(&m);
        checks.push(Check::new("density", r.iter().all(Poly::is_zero), nonzero(&m, &r)));
    }
    if boundary_ok {
        match verify_ground_state(&m) {
            Ok(r) => checks.push(Check::new("ground_state", r.iter().all(Poly::is_zero), nonzero(&m, &r))),
            Err(e) => checks.push(Check::new("ground_state", false, e.to_string())),
        }
        match h_transform(&m) {
            Ok(ht) => {
                match ground_state_residual(&m, &ht.kappa) {
                    Ok(r) => checks.push(Check::new(
                        "eigenfunction",
                        r.is_zero(),
                        format!("L(h) - kappa h with kappa = {}: {}", fmt_rational(&ht.kappa), nonzero(&m, &[r])),
                    )),
                    Err(e) => checks.push(Check::new("eigenfunction", false, e.to_string())),
                }
                if let Source::Catalog(s) = src {
                    let want = s.expected_kappa();
                    checks.push(Check::new(
                        "kappa",
                        ht.kappa == want,
                        format!("{} (expected {})", fmt_rational(&ht.kappa), fmt_rational(&want)),
                    ));
                    let dual_ok = s.dual().build().map(|d| ht.model.structurally_equal(&d)).unwrap_or(false);
                    checks.push(Check::new("dual", dual_ok, s.dual().describe()));
                }
                let back = h_transform(&ht.model).map(|b| b.model.structurally_equal(&m));
                checks.push(Check::new(
                    "involution",
                    matches!(back, Ok(true)),
                    "transforming twice returns the model",
                ));
            }
            Err(e) => checks.push(Check::new("h_transform", false, e.to_string())),
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    json!({"model": src.name(), "pass": pass, "checks": checks})
}

fn verify(cfg: &RunConfig, args: &ModelArgs) -> CmdResult {
    let certs: Vec<Value> = sources(cfg, args, true)?.iter().map(certificate).collect();
    let pass = certs.iter().all(|c| c["pass"] == json!(true));
    if certs.len() == 1 {
        print_json(&certs[0])?;
    } else {
        print_json(&json!({"pass": pass, "certificates": certs}))?;
    }
    Ok(pass)
}

fn htransform(cfg: &RunConfig, args: &ModelArgs, emit: Emit) -> CmdResult {
    let src = sources(cfg, args, false)?.remove(0);
    let m = src.build()?;
    let ht = h_transform(&m).map_err(err)?;
    let t = |p: &Poly| to_text(p, &m.vars);
    let h: Vec<(String, String)> = ht.h_description.iter().map(|(p, e)| (t(p), fmt_rational(e))).collect();
    let l: Vec<Vec<String>> = ht.boundary.l.iter().map(|row| row.iter().map(t).collect()).collect();
    match emit {
        Emit::Json => print_json(&json!({
            "source": m.to_doc(),
            "model": ht.model.to_doc(),
            "eigenvalue": fmt_rational(&ht.eigenvalue),
            "kappa": fmt_rational(&ht.kappa),
            "h": h.iter().map(|(p, e)| json!({"poly": p, "exponent": e})).collect::<Vec<_>>(),
            "l": l,
            "c": ht.boundary.c.iter().map(fmt_rational).collect::<Vec<_>>(),
            "e": ht.boundary.e.iter().map(fmt_rational).collect::<Vec<_>>(),
        }))?,
        Emit::Text => {
            outln!("source: {}", m.label);
            let hs: Vec<String> = h.iter().map(|(p, e)| format!("({p})^({e})")).collect();
            outln!("h = {}", hs.join(" * "));
            outln!("L h = kappa h, kappa = {}", fmt_rational(&ht.kappa));
            for (r, row) in l.iter().enumerate() {
                outln!("L[{r}] = [{}]  c = {}", row.join(", "), fmt_rational(&ht.boundary.c[r]));
            }
            outln!("conditioned drift:");
            for (v, b) in m.vars.iter().zip(&ht.model.drift) {
                outln!("  {v}: {}", t(b));
            }
        }
    }
    Ok(true)
}

fn sim_config(cfg: &RunConfig, args: &SimulateArgs) -> SimConfig {
    let mut sim = cfg.sim.clone();
    if let Some(t) = args.t {
        sim.t_final = t;
    }
    if let Some(dt) = args.dt {
        sim.dt = dt;
    }
    if let Some(n) = args.n_paths {
        sim.n_paths = n;
    }
    if let Some(s) = args.seed {
        sim.seed = s;
    }
    if let Some(p) = args.policy {
        sim.boundary_policy = match p {
            PolicyArg::RejectStep => BoundaryPolicy::RejectStep,
            PolicyArg::HalveDt => BoundaryPolicy::HalveDt,
            PolicyArg::Absorb => BoundaryPolicy::Absorb,
        };
    }
    if args.sequential {
        sim.execution = Execution::Sequential;
    }
    sim
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| format!("bad {what} entry `{x}`")))
        .collect()
}

fn matrix_sample(args: &SimulateArgs, kind: MatrixArg, sim: &SimConfig) -> Result<EnsembleSample, String> {
    let kind = match kind {
        MatrixArg::Sod => MatrixKind::SOd,
        MatrixArg::Su3 => MatrixKind::SU3,
        MatrixArg::Hermitian => MatrixKind::Hermitian,
        MatrixArg::Symmetric => MatrixKind::Symmetric,
    };
    let d = args.size.unwrap_or(3);
    let block = || -> Result<SpectralMap, String> {
        let pq: Vec<usize> = parse_list(&args.block, "block")?;
        match pq[..] {
            [p, q] => Ok(SpectralMap::FirstColumnBlock { p, q }),
            _ => Err("--block expects p,q".into()),
        }
    };
    let map = match args.map {
        Some(MapArg::CharpolyCoeffs) => SpectralMap::CharpolyCoeffs,
        Some(MapArg::TraceSu3) => SpectralMap::TraceSu3,
        Some(MapArg::SpectrumSorted) => SpectralMap::SpectrumSorted,
        Some(MapArg::FirstColumnBlock) => block()?,
        None => match kind {
            MatrixKind::SOd => block()?,
            MatrixKind::SU3 => SpectralMap::TraceSu3,
            _ => SpectralMap::SpectrumSorted,
        },
    };
    let e = matrix_brownian(kind, d, sim).map_err(err)?;
    spectral_map(&e, map).map_err(err)
}

fn moments(s: &EnsembleSample) -> Vec<Value> {
    s.vars
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let col = s.column(i);
            let n = col.len().max(1) as f64;
            let raw: Vec<f64> = (1..=4).map(|k| col.iter().map(|x| x.powi(k)).sum::<f64>() / n).collect();
            json!({"var": v, "mean": raw[0], "variance": raw[1] - raw[0] * raw[0], "raw_moments": raw})
        })
        .collect()
}

fn simulate(cfg: &RunConfig, args: &SimulateArgs) -> CmdResult {
    let sim = sim_config(cfg, args);
    let sample = match args.matrix {
        Some(kind) => matrix_sample(args, kind, &sim)?,
        None => {
            let src = sources(cfg, &args.model, false)?.remove(0);
            let mut m = src.build()?;
            if !m.is_real_coordinates() {
                m = m.to_real().map_err(err)?;
            }
            let x0 = match &args.x0 {
                Some(s) => parse_list::<f64>(s, "x0")?,
                None => m.interior_f64(),
            };
            if args.conditioned {
                conditioned_paths(&m, &x0, &sim)
            } else {
                sde_paths(&m, &x0, &sim)
            }
            .map_err(err)?
        }
    };
    let text = match args.format {
        Format::Csv => sample.to_csv(),
        Format::Json => serde_json::to_string_pretty(&json!({
            "label": sample.label,
            "vars": sample.vars,
            "time": sample.time,
            "dt": sample.dt,
            "seed": sample.seed,
            "n_paths": sample.len(),
            "rejected_step_count": sample.rejected_step_count,
            "absorbed_count": sample.absorbed_count,
            "moments": moments(&sample),
            "points": sample.points,
        }))
        .map_err(err)?,
    };
    let out = args.out.as_ref().map(|p| p.display().to_string()).or_else(|| cfg.output.clone());
    match out {
        Some(path) => std::fs::write(&path, text).map_err(|e| format!("{path}: {e}"))?,
        None => outln!("{}", text.trim_end_matches('\n')),
    }
    Ok(true)
}

fn compare(cfg: &RunConfig, args: &CompareArgs) -> CmdResult {
    if args.experiment == "list" {
        for name in EXPERIMENTS {
            outln!("{name}");
        }
        return Ok(true);
    }
    let mut ec = cfg.experiment(&args.experiment)?;
    if let Some(v) = args.n_paths {
        ec.n_paths = v;
    }
    if let Some(v) = args.dt {
        ec.dt = v;
    }
    if let Some(v) = args.t {
        ec.t = v;
    }
    if let Some(v) = args.seed {
        ec.seed = v;
    }
    if let Some(v) = args.threshold {
        ec.threshold = v;
    }
    if let Some(v) = args.permutations {
        ec.permutations = v;
    }
    if let Some(v) = args.d {
        ec.d = v;
    }
    if args.sequential {
        ec.execution = Execution::Sequential;
    }
    let r = run_experiment(&args.experiment, &ec).map_err(err)?;
    print_json(&r)?;
    Ok(r.pass)
}

fn chain(action: ChainAction) -> CmdResult {
    let ChainAction::Condition {
        matrix,
        subset,
        x0,
        n,
        big_n,
    } = action;
    let text = if matrix.trim_start().starts_with('[') {
        matrix
    } else {
        std::fs::read_to_string(&matrix).map_err(|e| format!("{matrix}: {e}"))?
    };
    let entries: Vec<Vec<f64>> = serde_json::from_str(&text).map_err(|e| format!("transition matrix: {e}"))?;
    let p = StochasticMatrix::new(entries).map_err(err)?;
    let a: Vec<usize> = parse_list(&subset, "subset")?;
    let report = condition(&p, &a, x0, n, big_n, Execution::Parallel).map_err(err)?;
    print_json(&report)?;
    Ok(true)
}
