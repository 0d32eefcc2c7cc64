//! The global link group `Ψ_{A,B}` and the algebra-specific links.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactrel::{lm_par, lm_pd_margin, lm_unpar, LmPair};
use crate::materials::IsoMaterial;
use crate::tensor4::{
    inv2, inv4, is_spd2, kron, rperp, sqrtm2, sym2, sym2_eigen, sym4, t4, BlockTensor, RMat2,
};

/// `Ψ_{A,B}(L) = (B⊗I) T (α₁L + β₁T)⁻¹(α₀L + β₀T) (Bᵀ⊗I)` with
/// `A = [[α₀, β₀], [α₁, β₁]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinkMap {
    #[serde(rename = "A")]
    pub a: [[f64; 2]; 2],
    #[serde(rename = "B")]
    pub b: [[f64; 2]; 2],
}

fn to_arr(m: &RMat2) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn from_arr(a: &[[f64; 2]; 2]) -> RMat2 {
    RMat2::new(a[0][0], a[0][1], a[1][0], a[1][1])
}

/// `A^B = D⁻¹AD` with `D = diag(det B, 1)`.
fn conj_by(a: &RMat2, b: &RMat2) -> RMat2 {
    let d = b.determinant();
    RMat2::new(a[(0, 0)], a[(0, 1)] / d, a[(1, 0)] * d, a[(1, 1)])
}

impl LinkMap {
    pub fn new(a: RMat2, b: RMat2) -> Result<Self> {
        if a.determinant() == 0.0 || b.determinant() == 0.0 {
            return Err(Error::Invalid("link matrices must be invertible".into()));
        }
        Ok(LinkMap {
            a: to_arr(&a),
            b: to_arr(&b),
        })
    }

    pub fn identity() -> Self {
        LinkMap {
            a: to_arr(&RMat2::identity()),
            b: to_arr(&RMat2::identity()),
        }
    }

    pub fn a(&self) -> RMat2 {
        from_arr(&self.a)
    }

    pub fn b(&self) -> RMat2 {
        from_arr(&self.b)
    }

    /// `L ↦ (B⊗I) L (Bᵀ⊗I)`.
    pub fn congruence(b: RMat2) -> Result<Self> {
        Self::new(RMat2::identity(), b)
    }

    /// `L ↦ L + β₀T`.
    pub fn shift(beta0: f64) -> Self {
        LinkMap {
            a: [[1.0, beta0], [0.0, 1.0]],
            b: to_arr(&RMat2::identity()),
        }
    }

    /// `L⁻¹ ↦ L⁻¹ + α₀T`.
    pub fn inverse_shift(alpha0: f64) -> Self {
        LinkMap {
            a: [[1.0, 0.0], [alpha0, 1.0]],
            b: to_arr(&RMat2::identity()),
        }
    }

    /// `L⁻¹ ↦ T − L⁻¹`.
    pub fn reflection() -> Self {
        LinkMap {
            a: [[1.0, 0.0], [1.0, -1.0]],
            b: to_arr(&RMat2::identity()),
        }
    }

    /// `L ↦ T L⁻¹ T`.
    pub fn duality() -> Self {
        LinkMap {
            a: [[0.0, 1.0], [1.0, 0.0]],
            b: to_arr(&RMat2::identity()),
        }
    }

    /// A member of the stabilizer of `𝖨`: `A = [[a, b], [b, a]]`, `B` orthogonal.
    pub fn identity_fixing(a: f64, b: f64, rot_angle: f64, reflect: bool) -> Result<Self> {
        let mut q = crate::tensor4::rot(rot_angle);
        if reflect {
            q *= RMat2::new(1.0, 0.0, 0.0, -1.0);
        }
        Self::new(RMat2::new(a, b, b, a), q)
    }

    /// Moves `|det B|` into `A`, scales `|det A| = 1` and makes the first
    /// nonzero entry of each matrix positive.
    pub fn canonical(&self) -> Self {
        let (mut a, mut b) = (self.a(), self.b());
        let s = b.determinant().abs().sqrt();
        b /= s;
        a.set_row(0, &(a.row(0) * (s * s)));
        a /= a.determinant().abs().sqrt();
        for m in [&mut a, &mut b] {
            let first = m
                .iter()
                .copied()
                .find(|v| v.abs() > 1e-14 * m.amax())
                .unwrap_or(1.0);
            if first < 0.0 {
                *m = -*m;
            }
        }
        LinkMap {
            a: to_arr(&a),
            b: to_arr(&b),
        }
    }

    /// `Ψ_{A,B}⁻¹ = Ψ_{(A^{B⁻¹})⁻¹, B⁻¹}`.
    pub fn inverse(&self) -> Result<Self> {
        let bi = inv2(&self.b())?;
        let ai = inv2(&conj_by(&self.a(), &bi))?;
        Self::new(ai, bi)
    }
}

/// Apply a link map.
pub fn psi_apply(map: &LinkMap, l: &BlockTensor) -> Result<BlockTensor> {
    let a = map.a();
    let t = t4();
    let lm = l.to_mat4();
    let den = lm * a[(1, 0)] + t * a[(1, 1)];
    let num = lm * a[(0, 0)] + t * a[(0, 1)];
    let di = den.try_inverse().ok_or(Error::Singular("link pencil"))?;
    let s = crate::tensor4::mat4_scale(&den);
    if !di.iter().all(|v| v.is_finite()) || di.amax() * s > 1e14 {
        return Err(Error::Singular("link pencil"));
    }
    let bb = kron(&map.b(), &RMat2::identity());
    let out = bb * t * di * num * bb.transpose();
    let asym = (out - out.transpose()).amax();
    if asym > 1e-8 * (1.0 + out.amax()) {
        return Err(Error::Invalid("link map does not preserve symmetry".into()));
    }
    BlockTensor::from_mat4(&sym4(&out))
}

/// `Ψ_{A₁,B₁} ∘ Ψ_{A₂,B₂} = Ψ_{A₁^{B₂}A₂, B₁B₂}`.
pub fn psi_compose(m1: &LinkMap, m2: &LinkMap) -> LinkMap {
    let a = conj_by(&m1.a(), &m2.b()) * m2.a();
    LinkMap {
        a: to_arr(&a),
        b: to_arr(&(m1.b() * m2.b())),
    }
}

/// The map sending `Λ⊗I + νT` to `𝖨`: first `L ↦ L − νT`, then congruence
/// with `Λ^{-1/2}`.
pub fn psi_normalizer(iso: &IsoMaterial) -> Result<LinkMap> {
    if !iso.is_positive_definite() {
        return Err(Error::Domain(
            "isotropic tensor is not positive definite".into(),
        ));
    }
    let b = inv2(&sqrtm2(&iso.lambda)?)?;
    LinkMap::new(RMat2::new(1.0, -iso.nu, 0.0, 1.0), b)
}

/// The map sending `𝖨` to `Λ⊗I + νT`: `L ↦ (B⊗I)(L − αT)(B⊗I)` with
/// `B = Λ^{1/2}` and `α = −ν/det B`.
pub fn psi_from_identity(iso: &IsoMaterial) -> Result<(LinkMap, f64)> {
    if !iso.is_positive_definite() {
        return Err(Error::Domain(
            "isotropic tensor is not positive definite".into(),
        ));
    }
    let b = sqrtm2(&iso.lambda)?;
    let alpha = -iso.nu / b.determinant();
    Ok((LinkMap::new(RMat2::new(1.0, -alpha, 0.0, 1.0), b)?, alpha))
}

/// `L* = ⟨L⁻¹⟩⁻¹` for phases of the `𝔏(L, R⊥)` relation.
pub fn link13_volume_fraction(params: &[(RMat2, f64)]) -> Result<RMat2> {
    if params.is_empty() {
        return Err(Error::Invalid("no phases".into()));
    }
    let total: f64 = params.iter().map(|p| p.1).sum();
    if params.iter().any(|p| p.1 < 0.0) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid(
            "volume fractions must be nonnegative and sum to 1".into(),
        ));
    }
    let mut acc = RMat2::zeros();
    for (l, f) in params {
        if !is_spd2(&(l - RMat2::identity() * 0.5), 0.0) {
            return Err(Error::Domain("phase parameter must exceed I/2".into()));
        }
        acc += inv2(l)? * *f;
    }
    Ok(sym2(&inv2(&acc)?))
}

/// `Φ_{γ₀}(𝔏(L, M)) = 𝔏(P⁻¹, M)`, `P = γ₀ML⁻¹Mᵀ + (1 + γ₀)L⁻¹ + 2γ₀MR⊥`.
pub fn link19_family(gamma0: f64, l: &BlockTensor) -> Result<BlockTensor> {
    let p0 = lm_unpar(l)?;
    let li = inv2(&p0.l)?;
    let m = p0.m;
    let p = sym2(
        &(m * li * m.transpose() * gamma0 + li * (1.0 + gamma0) + m * rperp() * (2.0 * gamma0)),
    );
    if !is_spd2(&p, 1e-14) {
        return Err(Error::Domain(format!(
            "gamma0 = {gamma0} leaves P indefinite"
        )));
    }
    let q = sym2(&(p + m * rperp() * 2.0));
    if sym2_eigen(&q).0[1] >= 0.0 {
        return Err(Error::Domain(format!(
            "gamma0 = {gamma0} violates P + 2 M Rperp < 0"
        )));
    }
    let out = lm_par(&LmPair {
        l: sym2(&inv2(&p)?),
        m,
    });
    if !out.is_positive_definite() {
        return Err(Error::Domain("image is not positive definite".into()));
    }
    Ok(out)
}

/// `σ = −R⊥M`, `μ = 2/tr(L⁻¹σ)` for `𝔏(L, M)` with `M² = −I`. The image
/// `𝔏(μσ, R⊥σ)` is positive definite whenever the input is.
pub fn link19_conductivity(l: &BlockTensor) -> Result<(RMat2, f64)> {
    let p = lm_unpar(l)?;
    let m2 = p.m * p.m + RMat2::identity();
    if m2.amax() > 1e-8 * (1.0 + p.m.amax()).powi(2) {
        return Err(Error::Domain(
            "tensor is not in the M^2 = -I relation".into(),
        ));
    }
    let sigma = sym2(&(-rperp() * p.m));
    let mu = 2.0 / (inv2(&p.l)? * sigma).trace();
    Ok((sigma, mu))
}

/// The `𝔏(μσ, R⊥σ)` tensor of a `(σ, μ)` pair.
pub fn link19_reconstruct(sigma: &RMat2, mu: f64) -> BlockTensor {
    lm_par(&LmPair {
        l: sigma * mu,
        m: rperp() * sigma,
    })
}

/// `Λ(M) = [[1, tr M/2], [tr M/2, det M]]`,
/// `P(M) = −R⊥(M − (tr M)I/2)/det Λ(M)`.
pub fn link21_factor(m: &RMat2) -> Result<(RMat2, RMat2)> {
    let h = m.trace() / 2.0;
    let lam = RMat2::new(1.0, h, h, m.determinant());
    let d = lam.determinant();
    if d.abs() < 1e-14 * (1.0 + m.amax()).powi(2) {
        return Err(Error::Singular("link factor"));
    }
    let p = -rperp() * (m - RMat2::identity() * h) / d;
    Ok((lam, p))
}

/// `M = Λ₁₂I + R⊥P det Λ`.
pub fn link21_unfactor(lam: &RMat2, p: &RMat2) -> RMat2 {
    RMat2::identity() * lam[(0, 1)] + rperp() * p * lam.determinant()
}

/// `Λ(M)⊗P(M)`, the ER9 tensor carrying `M`.
pub fn link21_tensor(l: &BlockTensor) -> Result<BlockTensor> {
    let p = lm_unpar(l)?;
    if lm_pd_margin(&p) >= 0.0 {
        return Err(Error::Domain(
            "tensor is outside the positive (L, M) domain".into(),
        ));
    }
    let (lam, pm) = link21_factor(&p.m)?;
    BlockTensor::from_mat4(&sym4(&kron(&lam, &sym2(&pm))))
}

/// Inverse of [`link21_tensor`] on the `M` part.
pub fn link21_m_from_tensor(l9: &BlockTensor) -> Result<RMat2> {
    let (lam, p) = crate::exactrel::er9_factor(l9)?;
    Ok(link21_unfactor(&lam, &p))
}

/// `T L⁻¹ T`.
pub fn dual(l: &BlockTensor) -> Result<BlockTensor> {
    let t = t4();
    BlockTensor::from_mat4(&sym4(&(t * inv4(&l.to_mat4())? * t)))
}
