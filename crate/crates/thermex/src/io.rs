//! JSON input and output.
//!
//! Tensors are accepted in several shapes (dense 4×4, blocks, physical
//! coefficients, isotropic, or `K(X, Y)`). Output numbers are written with
//! 17 significant digits so that files round-trip exactly and are byte
//! identical across runs.

use std::fmt::Write as _;

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::laminate::{LaminateNode, Micro};
use crate::materials::{canon_from_physical, IsoMaterial, Material};
use crate::tensor4::{BlockTensor, CMat2, KTensor, RMat2, RMat4, C64};

pub type Arr2 = [[f64; 2]; 2];
/// Complex 2×2 as `[[[re, im], ...], ...]`.
pub type CArr2 = [[[f64; 2]; 2]; 2];

pub fn rmat2(a: &Arr2) -> RMat2 {
    RMat2::new(a[0][0], a[0][1], a[1][0], a[1][1])
}

pub fn cmat2(a: &CArr2) -> CMat2 {
    let e = |i: usize, j: usize| C64::new(a[i][j][0], a[i][j][1]);
    CMat2::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum TensorInput {
    Dense {
        #[serde(rename = "L")]
        l: [[f64; 4]; 4],
    },
    Blocks {
        #[serde(rename = "L11")]
        l11: Arr2,
        #[serde(rename = "L12")]
        l12: Arr2,
        #[serde(rename = "L22")]
        l22: Arr2,
    },
    Physical {
        sigma: Arr2,
        seebeck: Arr2,
        kappa: Arr2,
        #[serde(rename = "T0")]
        t0: f64,
    },
    Iso {
        lambda: Arr2,
        nu: f64,
    },
    K {
        #[serde(rename = "X")]
        x: CArr2,
        #[serde(rename = "Y")]
        y: CArr2,
    },
}

impl TensorInput {
    pub fn to_block(&self) -> Result<BlockTensor> {
        match self {
            TensorInput::Dense { l } => BlockTensor::from_mat4(&RMat4::from_fn(|i, j| l[i][j])),
            TensorInput::Blocks { l11, l12, l22 } => {
                let (a, d) = (rmat2(l11), rmat2(l22));
                if (a - a.transpose()).amax() > 1e-12 * a.amax()
                    || (d - d.transpose()).amax() > 1e-12 * d.amax()
                {
                    return Err(Error::Invalid("L11 and L22 must be symmetric".into()));
                }
                BlockTensor::new(a, rmat2(l12), d)
            }
            TensorInput::Physical {
                sigma,
                seebeck,
                kappa,
                t0,
            } => {
                let m = Material {
                    sigma: rmat2(sigma),
                    seebeck: rmat2(seebeck),
                    kappa: rmat2(kappa),
                    t0: *t0,
                };
                canon_from_physical(&m)
            }
            TensorInput::Iso { lambda, nu } => {
                let lam = rmat2(lambda);
                if (lam[(0, 1)] - lam[(1, 0)]).abs() > 1e-12 * lam.amax() {
                    return Err(Error::Invalid("lambda must be symmetric".into()));
                }
                BlockTensor::from_mat4(
                    &IsoMaterial {
                        lambda: lam,
                        nu: *nu,
                    }
                    .to_mat4(),
                )
            }
            TensorInput::K { x, y } => KTensor::sym(cmat2(x), cmat2(y))?.to_block(),
        }
    }

    /// The physical material, when given in that form.
    pub fn material(&self) -> Option<Material> {
        match self {
            TensorInput::Physical {
                sigma,
                seebeck,
                kappa,
                t0,
            } => Some(Material {
                sigma: rmat2(sigma),
                seebeck: rmat2(seebeck),
                kappa: rmat2(kappa),
                t0: *t0,
            }),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum TreeInput {
    Mix {
        f: f64,
        n: [f64; 2],
        c1: Box<TreeInput>,
        c2: Box<TreeInput>,
    },
    Leaf {
        tensor: TensorInput,
        #[serde(default)]
        rotation: f64,
    },
}

impl TreeInput {
    pub fn to_node(&self) -> Result<LaminateNode> {
        match self {
            TreeInput::Leaf { tensor, rotation } => Ok(LaminateNode::Leaf {
                tensor: tensor.to_block()?,
                rotation: *rotation,
            }),
            TreeInput::Mix { f, n, c1, c2 } => {
                Ok(LaminateNode::mix(c1.to_node()?, c2.to_node()?, *f, *n))
            }
        }
    }
}

/// A laminate file: a full tree, or two phases laminated once with the
/// fraction and normal given on the command line.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum LaminateInput {
    Phases { phases: [TensorInput; 2] },
    Tree(TreeInput),
}

/// Geometry of a two-phase laminate; leaves are the labels 1 and 2.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum MicroInput {
    Phase(u8),
    Mix {
        f: f64,
        n: [f64; 2],
        c1: Box<MicroInput>,
        c2: Box<MicroInput>,
    },
}

impl MicroInput {
    pub fn to_micro(&self) -> Micro {
        match self {
            MicroInput::Phase(p) => Micro::Phase(*p),
            MicroInput::Mix { f, n, c1, c2 } => Micro::Mix {
                c1: Box::new(c1.to_micro()),
                c2: Box::new(c2.to_micro()),
                f: *f,
                n: *n,
            },
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct PairInput {
    pub sigma1: Arr2,
    pub r1: f64,
    pub sigma2: Arr2,
    pub r2: f64,
    #[serde(default)]
    pub micro: Option<MicroInput>,
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Invalid(format!("JSON: {e}")))
}

/// `{:.16e}`: 17 significant digits, exact round trip.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        // no negative zero
        format!("{:.16e}", x + 0.0)
    } else {
        "null".into()
    }
}

/// Pretty JSON with two-space indent and 17-digit floats.
pub fn to_json(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v, 0);
    s.push('\n');
    s
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) if !n.is_f64() => write!(out, "{i}").unwrap(),
            (_, Some(u)) if !n.is_f64() => write!(out, "{u}").unwrap(),
            _ => out.push_str(&fmt_f64(n.as_f64().unwrap_or(f64::NAN))),
        },
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) if a.iter().all(|x| x.is_number()) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, x, depth);
            }
            out.push(']');
        }
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                pad(out, depth + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn rmat2_json(m: &RMat2) -> Value {
    Value::Array(
        (0..2)
            .map(|i| Value::Array((0..2).map(|j| num(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn rmat4_json(m: &RMat4) -> Value {
    Value::Array(
        (0..4)
            .map(|i| Value::Array((0..4).map(|j| num(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn cmat2_json(m: &CMat2) -> Value {
    let e = |z: C64| Value::Array(vec![num(z.re), num(z.im)]);
    Value::Array(
        (0..2)
            .map(|i| Value::Array((0..2).map(|j| e(m.get(i, j))).collect()))
            .collect(),
    )
}

/// `{"L11", "L12", "L22"}`, the same shape accepted on input.
pub fn block_json(b: &BlockTensor) -> Value {
    let mut m = Map::new();
    m.insert("L11".into(), rmat2_json(&b.l11));
    m.insert("L12".into(), rmat2_json(&b.l12));
    m.insert("L22".into(), rmat2_json(&b.l22));
    Value::Object(m)
}

pub fn f64_json(x: f64) -> Value {
    num(x)
}
