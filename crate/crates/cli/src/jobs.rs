use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use tensorforge::field::{Field, FieldDescriptor};
use tensorforge::mlrec::{reconstruct_ml, MlConfig};
use tensorforge::oracle::BlackBoxOracle;
use tensorforge::pit::{equal, PitConfig, Verdict};
use tensorforge::poly::{tensor_field, tensor_to_oracle, CircuitKind, CpDecomposition, DepthThreeCircuit, Tensor};
use tensorforge::rng::derive;
use tensorforge::smlrec::{tensor_rank, SmlConfig};
use tensorforge::syssolve::{solve_system, PolySystem};
use tensorforge::waring::{symmetric_rank, symmetric_tensor_poly, WaringConfig};
use tensorforge::Error;

use crate::args::{Cli, Command, Common, Kind};
use crate::gen;
use crate::{job_seed, parse_field, CliError, CliResult, DEFAULT_PRIME};

macro_rules! with_field {
    ($desc:expr, $f:ident => $body:expr) => {{
        let desc: &FieldDescriptor = &$desc;
        if desc.is_extension() {
            let $f = desc.to_ext_field()?;
            $body
        } else {
            let $f = desc.to_prime_field()?;
            $body
        }
    }};
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, v: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(v).expect("json values serialize");
    fs::write(path, text + "\n").map_err(|e| CliError { code: 1, kind: "Io".into(), message: format!("{}: {e}", path.display()) })
}

fn flag_field(c: &Common) -> CliResult<FieldDescriptor> {
    match &c.field {
        Some(s) => parse_field(s),
        None => Ok(FieldDescriptor::prime(DEFAULT_PRIME)),
    }
}

/// Field stored in a file, else the flag.
fn file_field(v: &Value, c: &Common) -> CliResult<FieldDescriptor> {
    match v.get("field") {
        Some(_) => Ok(tensor_field(v)?),
        None => flag_field(c),
    }
}

fn verdict_json<E>(v: &Verdict<E>) -> Value {
    json!(if v.is_zero() { "Equal" } else { "NotEqual" })
}

fn sml_config(c: &Common) -> SmlConfig {
    let mut cfg = SmlConfig::default();
    if let Some(b) = c.budget {
        cfg.candidate_budget = b;
    }
    cfg
}

fn ml_config(c: &Common) -> MlConfig {
    let mut cfg = MlConfig::default();
    if let Some(b) = c.budget {
        cfg.budget = b;
    }
    if let Some(r) = c.cluster_r_init {
        cfg.cluster.r_init = r;
    }
    if let Some(k) = c.cluster_kappa {
        cfg.cluster.kappa = k;
    }
    cfg
}

/// Trivial rank bound: product of all modes but the largest, capped.
fn default_kmax(shape: &[usize]) -> usize {
    let mut s = shape.to_vec();
    s.sort_unstable();
    s.pop();
    s.iter().product::<usize>().clamp(1, 8)
}

pub(crate) fn dispatch(cli: &Cli) -> CliResult<Value> {
    let c = &cli.common;
    let seed = job_seed(c);
    match &cli.command {
        Command::Rank { input } => cp_job(c, seed, input, false),
        Command::Decompose { input } => cp_job(c, seed, input, true),
        Command::RankSym { input } => sym_job(c, seed, input, false),
        Command::DecomposeSym { input } => sym_job(c, seed, input, true),
        Command::ReconstructMl { input, k } => ml_job(c, seed, input, *k),
        Command::Verify { input, candidate } => verify_job(c, seed, input, candidate),
        Command::Solve { input } => solve_job(c, seed, input),
        Command::Gen { kind, k, d, nj, n, m, planted, out } => {
            gen_job(c, seed, *kind, GenSize { k: *k, d: *d, nj: *nj, n: *n, m: *m }, *planted, out.clone())
        }
    }
}

fn cp_job(c: &Common, seed: u64, input: &Path, with_factors: bool) -> CliResult<Value> {
    let v = read_json(input)?;
    let desc = tensor_field(&v)?;
    with_field!(desc, f => {
        let t = Tensor::from_json(&f, &v)?;
        let kmax = c.kmax.unwrap_or_else(|| default_kmax(&t.shape));
        let tr = tensor_rank(&f, &t, kmax, &sml_config(c), &mut derive(seed, "tensor-rank"))?;
        let (o, _) = tensor_to_oracle(&f, &t);
        let circuit = tr.decomposition.to_circuit(&f, &t.shape);
        let verdict = equal(&o, &circuit, &PitConfig::default(), &mut derive(seed, "verify"));
        if !verdict.is_zero() {
            return Err(CliError::verify("decomposition differs from the tensor"));
        }
        let mut out = json!({
            "field": f.descriptor(),
            "shape": t.shape,
            "k_max": kmax,
            "rank": tr.rank,
            "k": tr.rank,
            "lower_bound": tr.lower_bound,
            "verdict": verdict_json(&verdict),
        });
        if with_factors {
            out["decomposition"] = tr.decomposition.to_json(&f);
        }
        Ok(out)
    })
}

fn sym_job(c: &Common, seed: u64, input: &Path, with_factors: bool) -> CliResult<Value> {
    let v = read_json(input)?;
    let desc = tensor_field(&v)?;
    with_field!(desc, f => {
        let t = Tensor::from_json(&f, &v)?;
        let d = t.order();
        let p = symmetric_tensor_poly(&f, &t)?;
        let o = BlackBoxOracle::from_poly(f.clone(), p).with_degree(d);
        let kmax = c.kmax.unwrap_or(t.shape[0].max(1));
        let sr = symmetric_rank(&o, d, kmax, &WaringConfig::default(), &mut derive(seed, "symmetric-rank"))?;
        let verdict = equal(&o, &sr.decomposition.to_circuit(), &PitConfig::default(), &mut derive(seed, "verify"));
        if !verdict.is_zero() {
            return Err(CliError::verify("decomposition differs from the tensor"));
        }
        let mut out = json!({
            "field": f.descriptor(),
            "shape": t.shape,
            "k_max": kmax,
            "rank": sr.rank,
            "k": sr.rank,
            "certified_minimal": sr.certified_minimal,
            "verdict": verdict_json(&verdict),
        });
        if with_factors {
            out["decomposition"] = sr.decomposition.to_json(&f);
        }
        Ok(out)
    })
}

/// A circuit stored bare or under `circuit`.
fn circuit_value(v: &Value) -> &Value {
    v.get("circuit").unwrap_or(v)
}

fn ml_job(c: &Common, seed: u64, input: &Path, k: Option<usize>) -> CliResult<Value> {
    let v = read_json(input)?;
    let desc = file_field(&v, c)?;
    with_field!(desc, f => {
        let target = DepthThreeCircuit::from_json(&f, circuit_value(&v))?;
        if !target.is_multilinear(&f) {
            return Err(CliError::parse("input circuit is not multilinear"));
        }
        let k = k.or(c.kmax).unwrap_or(2);
        let o = BlackBoxOracle::from_circuit(f.clone(), target);
        let learned = reconstruct_ml(&o, k, &ml_config(c), &mut derive(seed, "reconstruct-ml"))?;
        let queries = o.queries();
        let verdict = equal(&o, &learned, &PitConfig::default(), &mut derive(seed, "verify"));
        if !verdict.is_zero() {
            return Err(CliError::verify("learned circuit differs from the black box"));
        }
        Ok(json!({
            "field": f.descriptor(),
            "nvars": o.nvars(),
            "k_max": k,
            "k": learned.fan_in(),
            "queries": queries,
            "circuit": learned.to_json(&f),
            "verdict": verdict_json(&verdict),
        }))
    })
}

/// A candidate as a circuit: CP factors need the tensor shape.
fn candidate_circuit<F: Field>(f: &F, v: &Value, shape: Option<&[usize]>) -> CliResult<DepthThreeCircuit<F::Elem>> {
    let v = v.get("decomposition").unwrap_or(v);
    if v.get("factors").is_some() {
        let shape = shape.ok_or_else(|| CliError::parse("CP factors can only be checked against a tensor"))?;
        return Ok(CpDecomposition::from_json(f, v)?.to_circuit(f, shape));
    }
    Ok(DepthThreeCircuit::from_json(f, circuit_value(v))?)
}

fn verify_job(c: &Common, seed: u64, input: &Path, candidate: &Path) -> CliResult<Value> {
    let v = read_json(input)?;
    let cand = read_json(candidate)?;
    let desc = file_field(&v, c)?;
    with_field!(desc, f => {
        let (o, shape) = if v.get("shape").is_some() {
            let t = Tensor::from_json(&f, &v)?;
            let symmetric = circuit_value(cand.get("decomposition").unwrap_or(&cand))
                .get("kind")
                .is_some_and(|k| k == &json!(CircuitKind::Power));
            let o = if symmetric {
                BlackBoxOracle::from_poly(f.clone(), symmetric_tensor_poly(&f, &t)?)
            } else {
                tensor_to_oracle(&f, &t).0
            };
            (o, Some(t.shape))
        } else {
            (BlackBoxOracle::from_circuit(f.clone(), DepthThreeCircuit::from_json(&f, circuit_value(&v))?), None)
        };
        let circuit = candidate_circuit(&f, &cand, shape.as_deref())?;
        if circuit.nvars != o.nvars() {
            return Err(CliError::verify(format!("candidate has {} variables, input has {}", circuit.nvars, o.nvars())));
        }
        let verdict = equal(&o, &circuit, &PitConfig::default(), &mut derive(seed, "verify"));
        if !verdict.is_zero() {
            return Err(CliError::verify("candidate differs from the input"));
        }
        Ok(json!({ "field": f.descriptor(), "k": circuit.fan_in(), "verdict": verdict_json(&verdict) }))
    })
}

fn solve_job(c: &Common, seed: u64, input: &Path) -> CliResult<Value> {
    let sys = PolySystem::from_json(&read_json(input)?)?;
    let mut out = json!({
        "field": sys.field.descriptor(),
        "unknowns": sys.nvars(),
        "equations": sys.eqs.len(),
        "allow_extension": c.allow_extension,
    });
    match solve_system(&sys, c.allow_extension, &mut derive(seed, "solve")) {
        Ok(sol) => {
            if !sol.check(&sys) {
                return Err(CliError::verify("returned point does not satisfy the system"));
            }
            out["solvable"] = json!(true);
            out["solution"] = sol.to_json(&sys);
            out["verdict"] = json!("Satisfied");
        }
        Err(Error::NoSolution) => out["solvable"] = json!(false),
        Err(e) => return Err(e.into()),
    }
    Ok(out)
}

pub(crate) struct GenSize {
    k: usize,
    d: usize,
    nj: usize,
    n: usize,
    m: usize,
}

fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Sml => "sml",
        Kind::Waring => "waring",
        Kind::Ml => "ml",
        Kind::MlLowdeg => "ml-lowdeg",
        Kind::System => "system",
    }
}

fn plant_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.plant.json"))
}

fn gen_job(c: &Common, seed: u64, kind: Kind, s: GenSize, planted: bool, out: Option<PathBuf>) -> CliResult<Value> {
    let desc = flag_field(c)?;
    let rng = &mut derive(seed, "gen");
    let path = out.unwrap_or_else(|| PathBuf::from(format!("tensorforge-{}-{seed}.json", kind_name(kind))));
    let (instance, plant) = with_field!(desc, f => match kind {
        Kind::Sml => {
            let shape = vec![s.nj; s.d];
            let dec = gen::plant_sml(&f, s.k, &shape, rng);
            let t = gen::sml_tensor(&f, &dec, &shape)?;
            let mut p = dec.to_json(&f);
            p["shape"] = json!(shape);
            (t.to_json(&f)?, p)
        }
        Kind::Waring => {
            let dec = gen::plant_waring(&f, s.n, s.d, s.k, rng);
            (gen::symmetric_tensor(&f, &dec)?.to_json(&f)?, dec.to_json(&f))
        }
        Kind::Ml => {
            let circuit = gen::plant_ml_clusters(&f, s.n, (s.n / 4).max(1), rng);
            let v = json!({ "field": f.descriptor(), "circuit": circuit.to_json(&f) });
            (v.clone(), v)
        }
        Kind::MlLowdeg => {
            let circuit = gen::plant_ml_lowdeg(&f, s.n, s.k, s.d, rng);
            let v = json!({ "field": f.descriptor(), "circuit": circuit.to_json(&f) });
            (v.clone(), v)
        }
        Kind::System => {
            if desc.is_extension() {
                return Err(CliError::parse("systems are generated over prime fields"));
            }
            let fp = desc.to_prime_field()?;
            let (sys, point) = gen::plant_system(&fp, s.n, s.m, s.d, planted, rng)?;
            (sys.to_json(), json!({ "solution": point }))
        }
    });
    let side = plant_path(&path);
    write_json(&path, &instance)?;
    write_json(&side, &plant)?;
    Ok(json!({
        "field": desc,
        "kind": kind_name(kind),
        "instance": path.display().to_string(),
        "plant": side.display().to_string(),
        "k": s.k,
    }))
}
