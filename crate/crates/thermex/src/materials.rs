//! Physical thermoelectric tensors, the canonical tensor `L`, and the
//! figure of merit.

use crate::error::{Error, Result};
use crate::tensor4::{inv2, is_spd2, kron, t4, BlockTensor, RMat2, RMat4};

/// Conductivity `σ`, Seebeck tensor `S` (not assumed symmetric), thermal
/// conductivity `κ` and working temperature `T₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    pub sigma: RMat2,
    pub seebeck: RMat2,
    pub kappa: RMat2,
    pub t0: f64,
}

impl Material {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0) {
            return Err(Error::Invalid("T0 must be positive".into()));
        }
        if !is_spd2(&self.sigma, 1e-12) {
            return Err(Error::Domain(
                "sigma must be symmetric positive definite".into(),
            ));
        }
        if !is_spd2(&self.kappa, 1e-12) {
            return Err(Error::Domain(
                "kappa must be symmetric positive definite".into(),
            ));
        }
        Ok(())
    }
}

/// Isotropic tensor `Λ ⊗ I + ν T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsoMaterial {
    pub lambda: RMat2,
    pub nu: f64,
}

impl IsoMaterial {
    pub fn new(lambda: RMat2, nu: f64) -> Result<Self> {
        let iso = IsoMaterial { lambda, nu };
        if !iso.is_positive_definite() {
            return Err(Error::Domain(
                "isotropic tensor needs lambda11 > 0 and det lambda > nu^2".into(),
            ));
        }
        Ok(iso)
    }

    pub fn is_positive_definite(&self) -> bool {
        let l = &self.lambda;
        (l[(0, 1)] - l[(1, 0)]).abs() <= 1e-10 * (1.0 + l.amax())
            && l[(0, 0)] > 0.0
            && l.determinant() > self.nu * self.nu
    }

    pub fn to_mat4(&self) -> RMat4 {
        kron(&self.lambda, &RMat2::identity()) + t4() * self.nu
    }

    /// Reads `Λ` and `ν` off a 4×4, ignoring any anisotropic part.
    pub fn from_mat4(m: &RMat4) -> Self {
        let k = crate::tensor4::KTensor::from_mat4(m);
        let lambda = RMat2::new(
            k.x.m[0][0].re,
            k.x.m[0][1].re,
            k.x.m[1][0].re,
            k.x.m[1][1].re,
        );
        // T = K([[0, −i], [i, 0]], 0)
        let nu = 0.5 * (k.x.m[1][0].im - k.x.m[0][1].im);
        IsoMaterial { lambda, nu }
    }
}

/// `L = T₀² [[σ/T₀, −σS], [−Sᵀσ, κ + T₀ SᵀσS]]`.
pub fn canon_from_physical(m: &Material) -> Result<BlockTensor> {
    m.validate()?;
    let t = m.t0;
    let s = &m.seebeck;
    let l11 = m.sigma * t;
    let l12 = -(m.sigma * s) * (t * t);
    let l22 = m.kappa * (t * t) + s.transpose() * m.sigma * s * (t * t * t);
    BlockTensor::new(l11, l12, l22)
}

/// `σ = L₁₁/T₀`, `S = −L₁₁⁻¹L₁₂/T₀`, `κ = (L₂₂ − L₁₂ᵀL₁₁⁻¹L₁₂)/T₀²`.
pub fn physical_from_canon(l: &BlockTensor, t0: f64) -> Result<Material> {
    if !(t0 > 0.0) {
        return Err(Error::Invalid("T0 must be positive".into()));
    }
    if !l.is_positive_definite() {
        return Err(Error::Domain(
            "canonical tensor is not positive definite".into(),
        ));
    }
    let l11i = inv2(&l.l11)?;
    let beta = 1.0 / t0;
    let sigma = l.l11 * beta;
    let seebeck = -(l11i * l.l12) * beta;
    let kappa = (l.l22 - l.l12.transpose() * l11i * l.l12) * (beta * beta);
    Ok(Material {
        sigma: crate::tensor4::sym2(&sigma),
        seebeck,
        kappa: crate::tensor4::sym2(&kappa),
        t0,
    })
}

/// `L⁻¹ = (1/T₀) [[σ⁻¹ + T₀ Sκ⁻¹Sᵀ, Sκ⁻¹], [κ⁻¹Sᵀ, κ⁻¹/T₀]]`.
///
/// The off-diagonal blocks carry a plus sign; the closed form is checked
/// against the block inverse in the tests.
pub fn canon_inverse_closed_form(m: &Material) -> Result<BlockTensor> {
    m.validate()?;
    let t = m.t0;
    let si = inv2(&m.sigma)?;
    let ki = inv2(&m.kappa)?;
    let s = &m.seebeck;
    let a = (si + s * ki * s.transpose() * t) / t;
    let b = (s * ki) / t;
    let d = ki / (t * t);
    BlockTensor::new(a, b, d)
}

/// `ZT = λ/(1 − λ)`, `λ` the largest eigenvalue of `L₂₂⁻¹ L₁₂ᵀ L₁₁⁻¹ L₁₂`.
pub fn figure_of_merit(l: &BlockTensor) -> Result<f64> {
    if !l.is_positive_definite() {
        return Err(Error::Domain(
            "canonical tensor is not positive definite".into(),
        ));
    }
    let lam = zt_lambda(l)?;
    Ok(lam / (1.0 - lam))
}

/// Largest eigenvalue of `L₂₂⁻¹ L₁₂ᵀ L₁₁⁻¹ L₁₂`, in `[0, 1)` for PD input.
pub fn zt_lambda(l: &BlockTensor) -> Result<f64> {
    let m = inv2(&l.l22)? * l.l12.transpose() * inv2(&l.l11)? * l.l12;
    let half_tr = 0.5 * m.trace();
    let disc = (half_tr * half_tr - m.determinant()).max(0.0);
    Ok((half_tr + disc.sqrt()).max(0.0))
}

/// `ZT` of an isotropic material `Λ ⊗ I`: `Λ₁₂²/det Λ`.
pub fn figure_of_merit_iso(lambda: &RMat2) -> f64 {
    lambda[(0, 1)] * lambda[(0, 1)] / lambda.determinant()
}
