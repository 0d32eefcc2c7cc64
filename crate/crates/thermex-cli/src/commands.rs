use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use thermex::algebra::{catalog, corrupted, verify_suite, CHECK_TOL};
use thermex::exactrel::{er_member, er_pullback_residual, er_sample as sample};
use thermex::io::{
    block_json, cmat2_json, f64_json, parse, rmat2_json, rmat4_json, to_json, LaminateInput,
    PairInput, TensorInput,
};
use thermex::laminate::{laminate2, laminate_tree, Micro};
use thermex::materials::{figure_of_merit, figure_of_merit_iso, zt_lambda, IsoMaterial};
use thermex::polycrystal::solve_isotropic;
use thermex::twophase::{effective, laminate_oracle, IsoPhasePair, Outcome};
use thermex::Error;

use crate::{Geometry, RunConfig};

/// Default tolerance for membership and laminate comparisons.
const DEFAULT_TOL: f64 = 1e-9;

pub struct Output {
    pub value: Value,
    pub pass: bool,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Lib(Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Lib(e) if e.is_input() => 2,
            CliError::Lib(Error::NoSolution(_)) => 1,
            CliError::Lib(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(s) => f.write_str(s),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type Res = Result<Output, CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn obj(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(
        pairs
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<Map<_, _>>(),
    )
}

pub fn emit(cfg: &RunConfig, out: &Output) -> std::io::Result<()> {
    let text = if cfg.json {
        to_json(&out.value)
    } else {
        summary(&out.value)
    };
    match &cfg.output {
        Some(p) => fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Scalars and short entries of the top-level object, one per line.
fn summary(v: &Value) -> String {
    let mut s = String::new();
    if let Value::Object(m) = v {
        for (k, x) in m {
            let line = match x {
                Value::Number(_) => to_json(x).trim_end().to_string(),
                Value::Object(_) | Value::Array(_) => {
                    let c = x.to_string();
                    if c.len() > 100 {
                        continue;
                    }
                    c
                }
                other => other.to_string(),
            };
            s.push_str(&format!("{k}: {line}\n"));
        }
    }
    s
}

pub fn verify_algebras(cfg: &RunConfig, corrupt: Option<i32>) -> Res {
    let mut cat = catalog();
    if let Some(id) = corrupt {
        let s = cat
            .iter_mut()
            .find(|s| s.id == id)
            .ok_or_else(|| CliError::Input(format!("no catalog entry {id}")))?;
        *s = corrupted(s);
    }
    let tol = cfg.tol.unwrap_or(CHECK_TOL);
    let mut reports = verify_suite(&cat, cfg.trials as usize, cfg.seed)?;
    for r in &mut reports {
        // the negative control keeps its own threshold
        if r.algebra_id != 0 {
            r.pass = r.max_residual <= tol;
        }
    }
    let closure: Vec<_> = reports.iter().filter(|r| r.check == "closure").collect();
    let closure_pass = closure.iter().filter(|r| r.pass).count();
    let failures: Vec<_> = reports.iter().filter(|r| !r.pass).map(to_value).collect();
    let pass = failures.is_empty();
    let value = obj(vec![
        ("pass", json!(pass)),
        (
            "closure",
            json!(format!("{closure_pass}/{}", closure.len())),
        ),
        ("checks", json!(reports.len())),
        ("failed", json!(failures.len())),
        ("failures", Value::Array(failures)),
        ("tol", f64_json(tol)),
        ("trials", json!(cfg.trials)),
        ("seed", json!(cfg.seed)),
        ("reports", to_value(&reports)),
    ]);
    Ok(Output { value, pass })
}

fn tensor_file(path: &Path) -> Result<TensorInput, CliError> {
    Ok(parse::<TensorInput>(&read(path)?)?)
}

/// Membership is the verdict: a non-member exits with 1.
pub fn er(cfg: &RunConfig, id: i32, path: &Path) -> Res {
    let l = tensor_file(path)?.to_block()?;
    let rep = er_member(id, &l, cfg.tol.unwrap_or(DEFAULT_TOL))?;
    let mut value = to_value(&rep);
    if let Ok(p) = er_pullback_residual(id, &l) {
        value["pullback_residual"] = f64_json(p);
    }
    Ok(Output {
        pass: rep.member,
        value,
    })
}

pub fn er_sample(cfg: &RunConfig, id: i32, scale: f64) -> Res {
    if !(scale > 0.0) {
        return Err(CliError::Input("scale must be positive".into()));
    }
    let l = sample(id, cfg.seed, scale)?;
    Ok(Output {
        value: block_json(&l),
        pass: true,
    })
}

fn tensor_value(l: &thermex::BlockTensor) -> Value {
    let mut v = block_json(l);
    v["L"] = rmat4_json(&l.to_mat4());
    v
}

pub fn laminate(_cfg: &RunConfig, path: &Path, g: &Geometry) -> Res {
    let (lstar, depth) = match parse::<LaminateInput>(&read(path)?)? {
        LaminateInput::Phases { phases } => (
            laminate2(
                &phases[0].to_block()?,
                &phases[1].to_block()?,
                g.f,
                g.normal,
            )?,
            1,
        ),
        LaminateInput::Tree(t) => {
            let node = t.to_node()?;
            (laminate_tree(&node)?, node.depth())
        }
    };
    let value = obj(vec![
        ("Lstar", tensor_value(&lstar)),
        ("depth", json!(depth)),
        ("positive_definite", json!(lstar.is_positive_definite())),
    ]);
    Ok(Output { value, pass: true })
}

/// Explicit results are compared with the laminate they describe, implicit
/// ones are checked on it; either exceeding the tolerance exits with 1.
pub fn two_phase(cfg: &RunConfig, path: &Path, g: &Geometry) -> Res {
    let input: PairInput = parse(&read(path)?)?;
    let pair = IsoPhasePair::new(
        thermex::io::rmat2(&input.sigma1),
        input.r1,
        thermex::io::rmat2(&input.sigma2),
        input.r2,
    )?;
    let micro = input
        .micro
        .as_ref()
        .map_or_else(|| Micro::rank_one(g.f, g.normal), |m| m.to_micro());
    let eff = effective(&pair, &micro)?;
    let lam = laminate_oracle(&pair, &micro)?;
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let scalars: Map<String, Value> = eff
        .tag
        .scalars()
        .into_iter()
        .map(|(k, v)| (k.to_string(), f64_json(v)))
        .collect();
    let mut fields = vec![
        ("case", json!(eff.tag.case.name())),
        ("explicit", json!(eff.tag.case.is_explicit())),
        ("fraction1", f64_json(micro.fraction1())),
        ("scalars", Value::Object(scalars)),
        ("laminate", tensor_value(&lam)),
        ("notes", json!(eff.notes)),
        ("tol", f64_json(tol)),
    ];
    let check = match &eff.outcome {
        Outcome::Explicit(l) => {
            let gap = (l.to_mat4() - lam.to_mat4()).amax() / lam.to_mat4().amax();
            fields.push(("Lstar", tensor_value(l)));
            fields.push(("laminate_gap", f64_json(gap)));
            gap
        }
        Outcome::Implicit(c) => {
            let r = c.residual(&lam)?;
            fields.push(("constraint", json!(c.name())));
            fields.push(("laminate_residual", f64_json(r)));
            r
        }
    };
    let pass = check <= tol;
    fields.push(("pass", json!(pass)));
    Ok(Output {
        value: obj(fields),
        pass,
    })
}

pub fn polycrystal(_cfg: &RunConfig, path: &Path, all_roots: bool) -> Res {
    let t = tensor_file(path)?;
    let l0 = t.to_block()?.to_k();
    let r = solve_isotropic(&l0)?;
    let roots: Vec<Value> = r
        .roots
        .iter()
        .filter(|x| all_roots || x.feasible)
        .map(to_value)
        .collect();
    let residuals = obj(vec![
        ("theta", f64_json(r.theta_residual())),
        ("z", f64_json(r.z_residual(&l0)?)),
        ("exact_relation", f64_json(r.exact_relation_residual(&l0)?)),
    ]);
    let value = obj(vec![
        ("theta", f64_json(r.theta)),
        ("Z", cmat2_json(&r.z)),
        ("Lstar", tensor_value(&r.lstar)),
        ("Lstar_h", cmat2_json(&r.lstar_h)),
        ("alpha", f64_json(r.alpha)),
        ("B", rmat2_json(&r.b)),
        ("roots", Value::Array(roots)),
        ("conjectural", json!(r.conjectural)),
        ("residuals", residuals),
    ]);
    Ok(Output { value, pass: true })
}

pub fn zt(path: &Path) -> Res {
    let t = tensor_file(path)?;
    let l = t.to_block()?;
    let mut fields = vec![
        ("ZT", f64_json(figure_of_merit(&l)?)),
        ("lambda_max", f64_json(zt_lambda(&l)?)),
    ];
    let iso = IsoMaterial::from_mat4(&l.to_mat4());
    let scale = l.to_mat4().amax();
    let is_iso = (iso.to_mat4() - l.to_mat4()).amax() <= 1e-12 * scale;
    fields.push(("isotropic", json!(is_iso)));
    // the closed form holds for Λ⊗I only
    if is_iso && iso.nu.abs() <= 1e-12 * scale {
        fields.push((
            "ZT_isotropic_formula",
            f64_json(figure_of_merit_iso(&iso.lambda)),
        ));
    }
    if let Some(m) = t.material() {
        fields.push(("T0", f64_json(m.t0)));
    }
    Ok(Output {
        value: obj(fields),
        pass: true,
    })
}
