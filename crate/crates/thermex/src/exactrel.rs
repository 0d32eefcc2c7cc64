//! Exact relations through the reference tensor `𝖨`: Γ₀ operators,
//! W-transforms, closed-form membership predicates, samplers and the
//! `𝔏(L, M)` parametrization.

use serde::Serialize;

use crate::algebra::{spec, AlgebraSpec, InversionKey};
use crate::error::{Error, Result};
use crate::materials::IsoMaterial;
use crate::tensor4::{
    cof2, inv2, is_spd2, kron, mat2_scale, mat4_scale, rperp, sqrtm2, sym2, t4, BlockTensor,
    KTensor, RMat2, RMat4,
};
use crate::testutil::{rng, uniform};

/// Ids with first-class predicates.
pub const ER_IDS: [i32; 9] = [7, 8, 9, 13, 17, 19, 20, 21, 22];

/// Default membership tolerance.
pub const MEMBER_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ErSpec {
    pub id: i32,
    pub algebra: AlgebraSpec,
    pub key: InversionKey,
}

/// The relation attached to catalog entry `id`.
pub fn er_spec(id: i32) -> Result<ErSpec> {
    let key = match id {
        8 | 13 => InversionKey::Zero,
        7 | 9 | 17 | 19 | 20 | 21 | 22 => InversionKey::Half,
        _ => {
            return Err(Error::Invalid(format!(
                "no exact relation predicate for id {id}"
            )))
        }
    };
    Ok(ErSpec {
        id,
        algebra: spec(id)?,
        key,
    })
}

/// `Γ₀(n) = Λ⁻¹ ⊗ (n⊗n)` for `n` normalized.
pub fn gamma0(n: [f64; 2], iso: &IsoMaterial) -> Result<RMat4> {
    let len = n[0].hypot(n[1]);
    if len == 0.0 || !len.is_finite() {
        return Err(Error::Invalid("zero direction".into()));
    }
    if !iso.is_positive_definite() {
        return Err(Error::Domain(
            "reference medium is not positive definite".into(),
        ));
    }
    let (a, b) = (n[0] / len, n[1] / len);
    let nn = RMat2::new(a * a, a * b, a * b, b * b);
    Ok(kron(&inv2(&iso.lambda)?, &nn))
}

fn key_mat4(key: InversionKey) -> RMat4 {
    key.tensor().to_mat4()
}

/// `W(L) = (L − L₀)[𝖨 + M₀(L − L₀)]⁻¹`, the regular form of `[(L − L₀)⁻¹ + M₀]⁻¹`.
pub fn w_transform(l: &RMat4, l0: &RMat4, key: InversionKey) -> Result<KTensor> {
    let d = l - l0;
    let a = RMat4::identity() + key_mat4(key) * d;
    let ai = a.try_inverse().ok_or(Error::Singular("W-transform"))?;
    let w = d * ai;
    if !w.iter().all(|v| v.is_finite()) || w.amax() > 1e14 * (1.0 + mat4_scale(&d)) {
        return Err(Error::Singular("W-transform"));
    }
    Ok(KTensor::from_mat4(&crate::tensor4::sym4(&w)))
}

/// `L = L₀ + K(𝖨 − M₀K)⁻¹`.
pub fn w_inverse(k: &KTensor, l0: &RMat4, key: InversionKey) -> Result<BlockTensor> {
    let km = k.to_mat4();
    let a = RMat4::identity() - key_mat4(key) * km;
    let ai = a
        .try_inverse()
        .ok_or(Error::Singular("inverse W-transform"))?;
    let l = l0 + km * ai;
    if !l.iter().all(|v| v.is_finite()) {
        return Err(Error::Singular("inverse W-transform"));
    }
    BlockTensor::from_mat4(&crate::tensor4::sym4(&l))
}

/// The pair `(L, M)` of the parametrization `𝔏(L, M)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmPair {
    pub l: RMat2,
    pub m: RMat2,
}

/// `𝔏(L, M) = [[L, LM − R⊥], [MᵀL + R⊥, MᵀLM]]`.
pub fn lm_par(p: &LmPair) -> BlockTensor {
    let r = rperp();
    BlockTensor {
        l11: p.l,
        l12: p.l * p.m - r,
        l22: sym2(&(p.m.transpose() * p.l * p.m)),
    }
}

/// `M = L₁₁⁻¹(L₁₂ + R⊥)`.
pub fn lm_unpar(l: &BlockTensor) -> Result<LmPair> {
    Ok(LmPair {
        l: l.l11,
        m: inv2(&l.l11)? * (l.l12 + rperp()),
    })
}

/// Largest eigenvalue of `L + 2R⊥M det L` (symmetric part); `𝔏(L, M)` is
/// positive definite iff `L > 0` and this is negative.
pub fn lm_pd_margin(p: &LmPair) -> f64 {
    let q = sym2(&(p.l + rperp() * p.m * (2.0 * p.l.determinant())));
    crate::tensor4::sym2_eigen(&q).0[1]
}

/// The same condition written as `L/det L + 2R⊥M < 0`.
pub fn lm_pd_margin_normalized(p: &LmPair) -> f64 {
    let q = sym2(&(p.l / p.l.determinant() + rperp() * p.m * 2.0));
    crate::tensor4::sym2_eigen(&q).0[1]
}

/// A named scalar side condition and whether it holds.
#[derive(Clone, Debug, Serialize)]
pub struct Constraint {
    pub name: String,
    pub value: f64,
    pub ok: bool,
}

fn constraint(name: &str, value: f64, ok: bool) -> Constraint {
    Constraint {
        name: name.to_string(),
        value,
        ok,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ErReport {
    pub er_id: i32,
    pub member: bool,
    pub residual: f64,
    pub constraints: Vec<Constraint>,
}

fn jr() -> RMat4 {
    kron(&RMat2::new(1.0, 0.0, 0.0, -1.0), &rperp())
}

fn ir() -> RMat4 {
    kron(&RMat2::identity(), &rperp())
}

/// `L₁₁ − (L₁₂ + R⊥)L₂₂⁻¹(L₁₂ + R⊥)ᵀ`.
fn schur_t(l: &BlockTensor) -> Result<f64> {
    let s = l.l12 + rperp();
    Ok((l.l11 - s * inv2(&l.l22)? * s.transpose()).amax())
}

/// Unnormalized residual of the defining equations and the side conditions.
fn raw_residual(id: i32, l: &BlockTensor) -> Result<(f64, Vec<Constraint>)> {
    let r = rperp();
    let lm = l.to_mat4();
    let mut cons = Vec::new();
    let res = match id {
        7 => {
            let theta = l.l12[(1, 0)];
            let structure = (l.l11 - l.l22)
                .amax()
                .max(sym2(&l.l12).amax())
                .max(l.l12[(0, 0)].abs());
            let det = (l.l11.determinant() - (1.0 + theta).powi(2)).abs();
            cons.push(constraint("theta > -1/2", theta, theta > -0.5));
            structure.max(det)
        }
        8 => {
            let t = l.l12[(1, 0)];
            cons.push(constraint(
                "det L - t^2",
                l.l11.determinant() - t * t,
                l.l11.determinant() > t * t,
            ));
            (l.l11 - l.l22).amax().max(sym2(&l.l12).amax())
        }
        9 => {
            let cols = [
                [l.l11[(0, 0)], l.l11[(0, 1)], l.l11[(1, 1)]],
                [l.l12[(0, 0)], l.l12[(0, 1)], l.l12[(1, 1)]],
                [l.l22[(0, 0)], l.l22[(0, 1)], l.l22[(1, 1)]],
            ];
            let mut minors = 0.0_f64;
            for a in 0..3 {
                for b in a + 1..3 {
                    for i in 0..3 {
                        for j in i + 1..3 {
                            minors = minors
                                .max((cols[a][i] * cols[b][j] - cols[a][j] * cols[b][i]).abs());
                        }
                    }
                }
            }
            let asym = (l.l12 - l.l12.transpose()).amax();
            let dets =
                (l.l11.determinant() * l.l22.determinant()).max(0.0).sqrt() - l.l12.determinant();
            // the equality itself is part of the residual, scaled by the caller's tolerance
            cons.push(constraint("det(Lambda) det(P)", dets, dets > 0.0));
            asym.max(minors).max((dets - 1.0).abs())
        }
        13 => {
            let m = (l.l12 - (l.l11 * r - r))
                .amax()
                .max((l.l22 - cof2(&l.l11)).amax());
            let emin = crate::tensor4::sym2_eigen(&l.l11).0[0];
            cons.push(constraint("L11 > I/2", emin - 0.5, emin > 0.5));
            m
        }
        17 => (lm * jr() * lm - jr()).amax(),
        22 => (lm * ir() * lm - ir()).amax(),
        19..=21 => {
            let mut m = schur_t(l)?;
            if id == 19 || id == 20 {
                m = m.max((l.l11.determinant() - (l.l12 + r).determinant()).abs());
            }
            if id == 19 {
                m = m.max((l.l22 * cof2(&l.l12)).trace().abs());
            }
            let p = lm_unpar(l)?;
            let margin = lm_pd_margin(&p);
            cons.push(constraint("L + 2 Rperp M det L < 0", margin, margin < 0.0));
            m
        }
        _ => {
            return Err(Error::Invalid(format!(
                "no exact relation predicate for id {id}"
            )))
        }
    };
    Ok((res, cons))
}

/// Residual of the closed-form equations, normalized by `(1 + ‖L‖)²`.
pub fn er_residual(id: i32, l: &BlockTensor) -> Result<(f64, Vec<Constraint>)> {
    let (r, c) = raw_residual(id, l)?;
    let s = 1.0 + mat4_scale(&l.to_mat4());
    Ok((r / (s * s), c))
}

/// Membership by the closed forms. A non-PD `L` is a domain error.
pub fn er_member(id: i32, l: &BlockTensor, tol: f64) -> Result<ErReport> {
    if !l.is_positive_definite() {
        return Err(Error::Domain("tensor is not positive definite".into()));
    }
    let (residual, constraints) = er_residual(id, l)?;
    let member = residual <= tol && constraints.iter().all(|c| c.ok);
    Ok(ErReport {
        er_id: id,
        member,
        residual,
        constraints,
    })
}

/// Distance of `W(L)` (base `𝖨`, table key) to the algebra.
pub fn er_pullback_residual(id: i32, l: &BlockTensor) -> Result<f64> {
    let e = er_spec(id)?;
    let w = w_transform(&l.to_mat4(), &RMat4::identity(), e.key)?;
    Ok(e.algebra.residual(&w))
}

/// Matrix forms equivalent to the scalar systems: ER20 as
/// `(L − T)(J⊗R⊥)(L − T) = 0`, with the `ψ(i)⊗R⊥` equation added for ER19.
pub fn er_matrix_form_residual(id: i32, l: &BlockTensor) -> Result<f64> {
    let d = l.to_mat4() - t4();
    let jp = kron(&RMat2::new(0.0, 1.0, 1.0, 0.0), &rperp());
    let s = 1.0 + mat4_scale(&l.to_mat4());
    match id {
        20 => Ok((d * jr() * d).amax() / (s * s)),
        19 => Ok((d * jr() * d).amax().max((d * jp * d).amax()) / (s * s)),
        _ => Err(Error::Invalid(format!("no matrix form for id {id}"))),
    }
}

/// Block-component systems of ER17 and ER22, including the redundant third
/// equation: `L₁₁/det L₁₁ = L₁₁ − L₁₂L₂₂⁻¹L₁₂ᵀ`, `det L₁₁ ∓ det L₁₂ = 1`,
/// `det L₂₂ ∓ det L₁₂ = 1` (minus for 17, plus for 22).
pub fn block_component_residual(id: i32, l: &BlockTensor) -> Result<[f64; 3]> {
    let sg = match id {
        17 => -1.0,
        22 => 1.0,
        _ => {
            return Err(Error::Invalid(format!(
                "no block-component system for id {id}"
            )))
        }
    };
    let d12 = l.l12.determinant();
    let lhs = l.l11 / l.l11.determinant();
    let rhs = l.l11 - l.l12 * inv2(&l.l22)? * l.l12.transpose();
    Ok([
        (lhs - rhs).amax(),
        (l.l11.determinant() + sg * d12 - 1.0).abs(),
        (l.l22.determinant() + sg * d12 - 1.0).abs(),
    ])
}

/// Factor an ER9 member as `Λ ⊗ P` with `Λ₁₁ = 1`.
pub fn er9_factor(l: &BlockTensor) -> Result<(RMat2, RMat2)> {
    let p = l.l11;
    let s = p.dot(&p);
    if s == 0.0 {
        return Err(Error::Singular("ER9 factor"));
    }
    let lam12 = l.l12.dot(&p) / s;
    let lam22 = l.l22.dot(&p) / s;
    Ok((RMat2::new(1.0, lam12, lam12, lam22), p))
}

/// Random member: draw `K` in the algebra with coefficients in
/// `[−scale, scale]` and map back through the inverse W-transform,
/// halving the scale until the result is positive definite.
pub fn er_sample(id: i32, seed: u64, scale: f64) -> Result<BlockTensor> {
    let e = er_spec(id)?;
    let mut r = rng(seed);
    let mut s = scale;
    for _ in 0..100 {
        let k = e.algebra.random_element(&mut r).scale(s);
        if let Ok(l) = w_inverse(&k, &RMat4::identity(), e.key) {
            if l.is_positive_definite() {
                return Ok(l);
            }
        }
        s *= 0.5;
    }
    Err(Error::NoSolution(format!(
        "no positive definite sample for ER {id}"
    )))
}

/// Random valid `(L, M)` pair for ER13, 19, 20 or 21 (rejection sampling
/// on the positivity condition).
pub fn lm_sample(id: i32, seed: u64) -> Result<LmPair> {
    let mut r = rng(seed);
    for _ in 0..10_000 {
        let l = crate::testutil::random_spd2(&mut r, 0.3, 3.0);
        let m = match id {
            13 => rperp(),
            19 => {
                let m11 = 2.0 * uniform(&mut r);
                let mut m12 = 2.0 * uniform(&mut r);
                if m12.abs() < 0.05 {
                    m12 = 0.05_f64.copysign(m12 + f64::MIN_POSITIVE);
                }
                RMat2::new(m11, m12, -(m11 * m11 + 1.0) / m12, -m11)
            }
            20 => {
                let a = RMat2::new(
                    uniform(&mut r),
                    uniform(&mut r),
                    uniform(&mut r),
                    uniform(&mut r),
                ) * 2.0;
                let d = a.determinant();
                if d.abs() < 0.05 {
                    continue;
                }
                let mut m = a / d.abs().sqrt();
                if d < 0.0 {
                    m.swap_rows(0, 1);
                }
                m
            }
            21 => {
                RMat2::new(
                    uniform(&mut r),
                    uniform(&mut r),
                    uniform(&mut r),
                    uniform(&mut r),
                ) * 2.0
            }
            _ => {
                return Err(Error::Invalid(format!(
                    "no (L, M) parametrization for id {id}"
                )))
            }
        };
        let p = LmPair { l, m };
        if lm_pd_margin(&p) < -1e-3 * (1.0 + mat2_scale(&l)).powi(2) {
            return Ok(p);
        }
    }
    Err(Error::NoSolution(format!(
        "no valid (L, M) pair for ER {id}"
    )))
}

/// `(Λ^{-1/2}⊗I) L (Λ^{-1/2}⊗I)`.
pub fn covariance(lambda: &RMat2, l: &BlockTensor) -> Result<BlockTensor> {
    if !is_spd2(lambda, 1e-14) {
        return Err(Error::Domain(
            "covariance matrix is not positive definite".into(),
        ));
    }
    let c = kron(&inv2(&sqrtm2(lambda)?)?, &RMat2::identity());
    BlockTensor::from_mat4(&crate::tensor4::sym4(&(c * l.to_mat4() * c)))
}
