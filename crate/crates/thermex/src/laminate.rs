//! Rank-one and hierarchical laminates.
//!
//! A laminate with normal `n` averages `W_n(L) = (L − L₀)[𝖨 + Γ₀(n)(L − L₀)]⁻¹`
//! with the volume fractions. The result does not depend on the isotropic
//! reference `L₀`; `𝖨` is used unless it is singular for the inputs.

use crate::error::{Error, Result};
use crate::exactrel::gamma0;
use crate::materials::IsoMaterial;
use crate::tensor4::{inv2, kron, rot, sym2, sym4, BlockTensor, RMat2, RMat4};

/// A laminate microstructure over concrete phases.
#[derive(Clone, Debug, PartialEq)]
pub enum LaminateNode {
    Leaf {
        tensor: BlockTensor,
        rotation: f64,
    },
    Mix {
        c1: Box<LaminateNode>,
        c2: Box<LaminateNode>,
        f: f64,
        n: [f64; 2],
    },
}

impl LaminateNode {
    pub fn leaf(tensor: BlockTensor) -> Self {
        LaminateNode::Leaf {
            tensor,
            rotation: 0.0,
        }
    }

    pub fn mix(c1: LaminateNode, c2: LaminateNode, f: f64, n: [f64; 2]) -> Self {
        LaminateNode::Mix {
            c1: Box::new(c1),
            c2: Box::new(c2),
            f,
            n,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            LaminateNode::Leaf { .. } => 0,
            LaminateNode::Mix { c1, c2, .. } => 1 + c1.depth().max(c2.depth()),
        }
    }
}

/// `(I⊗R_θ) L (I⊗R_θ)ᵀ`.
pub fn rotate_block(l: &BlockTensor, theta: f64) -> BlockTensor {
    let r = kron(&RMat2::identity(), &rot(theta));
    let m = sym4(&(r * l.to_mat4() * r.transpose()));
    BlockTensor::from_mat4(&m).expect("rotation keeps symmetry")
}

fn unit(n: [f64; 2]) -> Result<[f64; 2]> {
    let len = n[0].hypot(n[1]);
    if len == 0.0 || !len.is_finite() {
        return Err(Error::Invalid("laminate normal must be nonzero".into()));
    }
    Ok([n[0] / len, n[1] / len])
}

fn check_fraction(f: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::Invalid(format!(
            "volume fraction {f} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Rank-one laminate with reference `l0`.
pub fn laminate2_with_reference(
    l1: &BlockTensor,
    l2: &BlockTensor,
    f: f64,
    n: [f64; 2],
    l0: &IsoMaterial,
) -> Result<BlockTensor> {
    check_fraction(f)?;
    let n = unit(n)?;
    if !l1.is_positive_definite() || !l2.is_positive_definite() {
        return Err(Error::Domain(
            "laminate phases must be positive definite".into(),
        ));
    }
    if f == 1.0 {
        return Ok(*l1);
    }
    if f == 0.0 {
        return Ok(*l2);
    }
    let g = gamma0(n, l0)?;
    let r = l0.to_mat4();
    let w = |l: &BlockTensor| -> Result<RMat4> {
        let d = l.to_mat4() - r;
        let a = (RMat4::identity() + g * d)
            .try_inverse()
            .ok_or(Error::Singular("laminate W-transform"))?;
        Ok(d * a)
    };
    let ws = w(l1)? * f + w(l2)? * (1.0 - f);
    let b = (RMat4::identity() - g * ws)
        .try_inverse()
        .ok_or(Error::Singular("laminate inverse W-transform"))?;
    let out = r + ws * b;
    if !out.iter().all(|v| v.is_finite()) {
        return Err(Error::Singular("laminate"));
    }
    BlockTensor::from_mat4(&sym4(&out))
}

/// Rank-one laminate: fraction `f` of `l1`, `1 − f` of `l2`, layers normal to `n`.
pub fn laminate2(l1: &BlockTensor, l2: &BlockTensor, f: f64, n: [f64; 2]) -> Result<BlockTensor> {
    let id = IsoMaterial::new(RMat2::identity(), 0.0)?;
    match laminate2_with_reference(l1, l2, f, n, &id) {
        Err(Error::Singular(_)) => {
            let two = IsoMaterial::new(RMat2::identity() * 2.0, 0.0)?;
            laminate2_with_reference(l1, l2, f, n, &two)
        }
        r => r,
    }
}

/// Bottom-up evaluation.
pub fn laminate_tree(node: &LaminateNode) -> Result<BlockTensor> {
    match node {
        LaminateNode::Leaf { tensor, rotation } => {
            if !tensor.is_positive_definite() {
                return Err(Error::Domain(
                    "laminate leaf is not positive definite".into(),
                ));
            }
            Ok(if *rotation == 0.0 {
                *tensor
            } else {
                rotate_block(tensor, *rotation)
            })
        }
        LaminateNode::Mix { c1, c2, f, n } => {
            laminate2(&laminate_tree(c1)?, &laminate_tree(c2)?, *f, *n)
        }
    }
}

/// Rank-one laminate of two 2D conductivities.
pub fn laminate_conductivity(s1: &RMat2, s2: &RMat2, f: f64, n: [f64; 2]) -> Result<RMat2> {
    check_fraction(f)?;
    let n = unit(n)?;
    let g = RMat2::new(n[0] * n[0], n[0] * n[1], n[0] * n[1], n[1] * n[1]);
    let w = |s: &RMat2| -> Result<RMat2> {
        let d = s - RMat2::identity();
        Ok(d * inv2(&(RMat2::identity() + g * d))?)
    };
    let ws = w(s1)? * f + w(s2)? * (1.0 - f);
    Ok(sym2(
        &(RMat2::identity() + ws * inv2(&(RMat2::identity() - g * ws))?),
    ))
}

/// A two-phase laminate geometry; leaves name phase 1 or phase 2.
#[derive(Clone, Debug, PartialEq)]
pub enum Micro {
    Phase(u8),
    Mix {
        c1: Box<Micro>,
        c2: Box<Micro>,
        f: f64,
        n: [f64; 2],
    },
}

/// Effective conductivity `Σ(h)` of a composite of phases `I` and `hI`.
pub trait SigmaModel {
    fn sigma(&self, h: f64) -> Result<RMat2>;
}

impl Micro {
    /// Phase 1 with fraction `f`, phase 2 with `1 − f`, one layer normal.
    pub fn rank_one(f: f64, n: [f64; 2]) -> Self {
        Micro::Mix {
            c1: Box::new(Micro::Phase(1)),
            c2: Box::new(Micro::Phase(2)),
            f,
            n,
        }
    }

    /// A rank-one laminate (`f_inner`, `n_inner`) laminated again with
    /// phase 2 along `n_outer`.
    pub fn rank_two(f_inner: f64, n_inner: [f64; 2], f_outer: f64, n_outer: [f64; 2]) -> Self {
        Micro::Mix {
            c1: Box::new(Micro::rank_one(f_inner, n_inner)),
            c2: Box::new(Micro::Phase(2)),
            f: f_outer,
            n: n_outer,
        }
    }

    /// Volume fraction of phase 1.
    pub fn fraction1(&self) -> f64 {
        match self {
            Micro::Phase(p) => f64::from(u8::from(*p == 1)),
            Micro::Mix { c1, c2, f, .. } => f * c1.fraction1() + (1.0 - f) * c2.fraction1(),
        }
    }

    /// The same geometry with the phase labels exchanged.
    pub fn swapped(&self) -> Self {
        match self {
            Micro::Phase(p) => Micro::Phase(3 - p),
            Micro::Mix { c1, c2, f, n } => Micro::Mix {
                c1: Box::new(c1.swapped()),
                c2: Box::new(c2.swapped()),
                f: *f,
                n: *n,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Micro::Phase(1) | Micro::Phase(2) => Ok(()),
            Micro::Phase(p) => Err(Error::Invalid(format!("phase label {p} is not 1 or 2"))),
            Micro::Mix { c1, c2, f, n } => {
                check_fraction(*f)?;
                unit(*n)?;
                c1.validate()?;
                c2.validate()
            }
        }
    }

    /// Effective conductivity for phase conductivities `s1`, `s2`.
    pub fn conductivity(&self, s1: &RMat2, s2: &RMat2) -> Result<RMat2> {
        match self {
            Micro::Phase(1) => Ok(*s1),
            Micro::Phase(2) => Ok(*s2),
            Micro::Phase(p) => Err(Error::Invalid(format!("phase label {p} is not 1 or 2"))),
            Micro::Mix { c1, c2, f, n } => {
                laminate_conductivity(&c1.conductivity(s1, s2)?, &c2.conductivity(s1, s2)?, *f, *n)
            }
        }
    }

    /// The laminate with the two given phase tensors.
    pub fn realize(&self, l1: &BlockTensor, l2: &BlockTensor) -> LaminateNode {
        match self {
            Micro::Phase(1) => LaminateNode::leaf(*l1),
            Micro::Phase(_) => LaminateNode::leaf(*l2),
            Micro::Mix { c1, c2, f, n } => {
                LaminateNode::mix(c1.realize(l1, l2), c2.realize(l1, l2), *f, *n)
            }
        }
    }
}

impl SigmaModel for Micro {
    fn sigma(&self, h: f64) -> Result<RMat2> {
        sigma_star_model(h, self)
    }
}

/// `Σ(h)`: phases `I` (label 1) and `hI` (label 2).
pub fn sigma_star_model(h: f64, micro: &Micro) -> Result<RMat2> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!(
            "conductivity ratio {h} must be positive"
        )));
    }
    micro.conductivity(&RMat2::identity(), &(RMat2::identity() * h))
}

/// Radical inverse of `i` in base `b`.
pub fn halton(mut i: u64, b: u64) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// Balanced depth-`depth` tree of equal-fraction laminates of rotated copies
/// of `l0`; leaf angles from the base-2 sequence, normals from base 3.
pub fn halton_polycrystal(l0: &BlockTensor, depth: usize) -> LaminateNode {
    fn build(l0: &BlockTensor, depth: usize, leaf: &mut u64, node: &mut u64) -> LaminateNode {
        if depth == 0 {
            *leaf += 1;
            let rotation = std::f64::consts::PI * halton(*leaf, 2);
            return LaminateNode::Leaf {
                tensor: *l0,
                rotation,
            };
        }
        let c1 = build(l0, depth - 1, leaf, node);
        let c2 = build(l0, depth - 1, leaf, node);
        *node += 1;
        let phi = std::f64::consts::PI * halton(*node, 3);
        LaminateNode::mix(c1, c2, 0.5, [phi.cos(), phi.sin()])
    }
    build(l0, depth, &mut 0, &mut 0)
}
