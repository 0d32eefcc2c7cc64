//! Complex 2×2 kernel and the `K(X,Y)` calculus for symmetric operators on
//! `R² ⊕ R²`.
//!
//! A real operator on `R² ⊕ R²` acting on `w = (u₁ + i u₂, v₁ + i v₂)` is
//! written `K w = X w + Y w̄`. Block `(i,j)` of the real 4×4 form is
//! `φ(X_ij) + ψ(Y_ij)`. The first Kronecker factor is the field index and
//! the second one is space, so `A ⊗ B` has block `(i,j)` equal to `A_ij B`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type RMat2 = Matrix2<f64>;
pub type RMat4 = Matrix4<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Relative tolerance scale: `1 + max |entry|`.
pub fn scale_of(entries: impl IntoIterator<Item = f64>) -> f64 {
    1.0 + entries.into_iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Complex 2×2 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat2 {
    pub m: [[C64; 2]; 2],
}

impl CMat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        CMat2 {
            m: [[a, b], [c, d]],
        }
    }

    pub fn from_re(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(C64::from(a), C64::from(b), C64::from(c), C64::from(d))
    }

    pub fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    pub fn from_real(r: &RMat2) -> Self {
        Self::from_re(r[(0, 0)], r[(0, 1)], r[(1, 0)], r[(1, 1)])
    }

    /// Split into real and imaginary parts.
    pub fn re_im(&self) -> (RMat2, RMat2) {
        let re = RMat2::new(
            self.m[0][0].re,
            self.m[0][1].re,
            self.m[1][0].re,
            self.m[1][1].re,
        );
        let im = RMat2::new(
            self.m[0][0].im,
            self.m[0][1].im,
            self.m[1][0].im,
            self.m[1][1].im,
        );
        (re, im)
    }

    pub fn from_re_im(re: &RMat2, im: &RMat2) -> Self {
        let e = |i: usize, j: usize| C64::new(re[(i, j)], im[(i, j)]);
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[i][j]
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self::new(
            f(self.m[0][0]),
            f(self.m[0][1]),
            f(self.m[1][0]),
            f(self.m[1][1]),
        )
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    /// Conjugate transpose.
    pub fn h(&self) -> Self {
        self.transpose().conj()
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Cofactor matrix, so that `M cof(M)ᵀ = det(M) I`.
    pub fn cof(&self) -> Self {
        let m = &self.m;
        Self::new(m[1][1], -m[1][0], -m[0][1], m[0][0])
    }

    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .fold(0.0_f64, |a, z| a.max(z.norm()))
    }

    pub fn norm(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Inverse; `None` when the determinant is negligible against the entries.
    pub fn try_inverse(&self) -> Option<Self> {
        let d = self.det();
        let s = self.max_abs();
        if d.norm() <= 1e-300_f64.max(1e-15 * s * s) {
            return None;
        }
        Some(self.cof().transpose().scale(d.inv()))
    }

    pub fn inverse(&self) -> Result<Self> {
        self.try_inverse()
            .ok_or(Error::Singular("complex 2x2 matrix"))
    }

    pub fn hermitian_residual(&self) -> f64 {
        (*self - self.h()).max_abs()
    }

    pub fn symmetric_residual(&self) -> f64 {
        (self.m[0][1] - self.m[1][0]).norm()
    }

    /// Hermitian part `(M + Mᴴ)/2`.
    pub fn herm_part(&self) -> Self {
        (*self + self.h()).scale_re(0.5)
    }

    pub fn sym_part(&self) -> Self {
        (*self + self.transpose()).scale_re(0.5)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn herm_eigenvalues(&self) -> [f64; 2] {
        let h = self.herm_part();
        let a = h.m[0][0].re;
        let d = h.m[1][1].re;
        let b = h.m[0][1];
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - rad, mean + rad]
    }

    /// Frobenius inner product `tr(A Bᴴ)`.
    pub fn inner(&self, other: &Self) -> C64 {
        (*self * other.h()).trace()
    }
}

impl Add for CMat2 {
    type Output = CMat2;
    fn add(self, o: CMat2) -> CMat2 {
        CMat2::new(
            self.m[0][0] + o.m[0][0],
            self.m[0][1] + o.m[0][1],
            self.m[1][0] + o.m[1][0],
            self.m[1][1] + o.m[1][1],
        )
    }
}

impl Sub for CMat2 {
    type Output = CMat2;
    fn sub(self, o: CMat2) -> CMat2 {
        self + (-o)
    }
}

impl Neg for CMat2 {
    type Output = CMat2;
    fn neg(self) -> CMat2 {
        self.map(|z| -z)
    }
}

impl Mul for CMat2 {
    type Output = CMat2;
    fn mul(self, o: CMat2) -> CMat2 {
        let a = &self.m;
        let b = &o.m;
        CMat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Rotation by π/2.
pub fn rperp() -> RMat2 {
    RMat2::new(0.0, -1.0, 1.0, 0.0)
}

pub fn rot(theta: f64) -> RMat2 {
    let (s, c) = theta.sin_cos();
    RMat2::new(c, -s, s, c)
}

/// `Z₀ = z₀ ⊗ z̄₀` with `z₀ = (1, −i)`.
pub fn z0() -> CMat2 {
    CMat2::new(ONE, I, -I, ONE)
}

/// `z₀ z₀ᵀ`, the complex-symmetric companion of `Z₀`.
pub fn z0z0t() -> CMat2 {
    CMat2::new(ONE, -I, -I, -ONE)
}

/// `φ(α + iβ) = αI + βR⊥`.
pub fn phi(z: C64) -> RMat2 {
    RMat2::new(z.re, -z.im, z.im, z.re)
}

/// `ψ(α + iβ) = [[α, β], [β, −α]]`.
pub fn psi(z: C64) -> RMat2 {
    RMat2::new(z.re, z.im, z.im, -z.re)
}

/// Kronecker product, first factor on the field index.
pub fn kron(a: &RMat2, b: &RMat2) -> RMat4 {
    let mut out = RMat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            out.fixed_view_mut::<2, 2>(2 * i, 2 * j)
                .copy_from(&(b * a[(i, j)]));
        }
    }
    out
}

/// `T = R⊥ ⊗ R⊥`.
pub fn t4() -> RMat4 {
    kron(&rperp(), &rperp())
}

pub fn block(m: &RMat4, i: usize, j: usize) -> RMat2 {
    m.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
}

pub fn from_blocks(b11: &RMat2, b12: &RMat2, b21: &RMat2, b22: &RMat2) -> RMat4 {
    let mut out = RMat4::zeros();
    out.fixed_view_mut::<2, 2>(0, 0).copy_from(b11);
    out.fixed_view_mut::<2, 2>(0, 2).copy_from(b12);
    out.fixed_view_mut::<2, 2>(2, 0).copy_from(b21);
    out.fixed_view_mut::<2, 2>(2, 2).copy_from(b22);
    out
}

pub fn mat4_scale(m: &RMat4) -> f64 {
    scale_of(m.iter().copied())
}

pub fn mat2_scale(m: &RMat2) -> f64 {
    scale_of(m.iter().copied())
}

/// 2×2 real cofactor `[[m22, −m21], [−m12, m11]]`.
pub fn cof2(m: &RMat2) -> RMat2 {
    RMat2::new(m[(1, 1)], -m[(1, 0)], -m[(0, 1)], m[(0, 0)])
}

pub fn inv2(m: &RMat2) -> Result<RMat2> {
    let d = m.determinant();
    let s = m.amax();
    if d.abs() <= 1e-300_f64.max(1e-15 * s * s) {
        return Err(Error::Singular("real 2x2 matrix"));
    }
    Ok(cof2(m).transpose() / d)
}

/// Eigen-decomposition of a symmetric 2×2, eigenvalues ascending.
pub fn sym2_eigen(m: &RMat2) -> ([f64; 2], RMat2) {
    let a = m[(0, 0)];
    let d = m[(1, 1)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let rad = half.hypot(b);
    // angle of the eigenvector belonging to the larger eigenvalue
    let ang = 0.5 * b.atan2(half);
    let (s, c) = ang.sin_cos();
    let q = RMat2::new(-s, c, c, s);
    ([mean - rad, mean + rad], q)
}

/// Symmetric square root of an SPD 2×2.
pub fn sqrtm2(m: &RMat2) -> Result<RMat2> {
    let ([l1, l2], q) = sym2_eigen(m);
    if l1 <= 0.0 {
        return Err(Error::Domain(
            "matrix square root of a non-positive-definite matrix".into(),
        ));
    }
    Ok(q * RMat2::new(l1.sqrt(), 0.0, 0.0, l2.sqrt()) * q.transpose())
}

pub fn is_spd2(m: &RMat2, tol: f64) -> bool {
    let s = mat2_scale(m);
    (m - m.transpose()).amax() <= 1e-10 * s && sym2_eigen(m).0[0] > tol * s
}

/// Smallest eigenvalue of the symmetric part of a 4×4.
pub fn min_eig4(m: &RMat4) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(s).eigenvalues.min()
}

pub fn is_spd4(m: &RMat4, tol: f64) -> bool {
    let s = mat4_scale(m);
    (m - m.transpose()).amax() <= 1e-10 * s && min_eig4(m) > tol * s
}

pub fn sym2(m: &RMat2) -> RMat2 {
    (m + m.transpose()) * 0.5
}

pub fn sym4(m: &RMat4) -> RMat4 {
    (m + m.transpose()) * 0.5
}

/// Symmetric operator on `R² ⊕ R²` in the `K(X,Y)` parametrization.
///
/// Products of two such operators are generally not symmetric, so the
/// pair itself carries no invariant; [`KTensor::sym`] builds a validated one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KTensor {
    pub x: CMat2,
    pub y: CMat2,
}

impl KTensor {
    pub const fn new(x: CMat2, y: CMat2) -> Self {
        KTensor { x, y }
    }

    /// Validated constructor: symmetrizes small asymmetry, rejects large.
    pub fn sym(x: CMat2, y: CMat2) -> Result<Self> {
        let s = scale_of([x.max_abs(), y.max_abs()]);
        if x.hermitian_residual() > 1e-10 * s {
            return Err(Error::Invalid("X is not Hermitian".into()));
        }
        if y.symmetric_residual() > 1e-10 * s {
            return Err(Error::Invalid("Y is not symmetric".into()));
        }
        Ok(KTensor {
            x: x.herm_part(),
            y: y.sym_part(),
        })
    }

    pub fn zero() -> Self {
        Self::new(CMat2::zero(), CMat2::zero())
    }

    pub fn identity() -> Self {
        Self::new(CMat2::identity(), CMat2::zero())
    }

    /// `T = R⊥ ⊗ R⊥ = K([[0, −i], [i, 0]], 0)`.
    pub fn t() -> Self {
        Self::new(CMat2::new(ZERO, -I, I, ZERO), CMat2::zero())
    }

    pub fn scale_of(&self) -> f64 {
        scale_of([self.x.max_abs(), self.y.max_abs()])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.x.scale_re(s), self.y.scale_re(s))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let s = self.scale_of();
        self.x.hermitian_residual() <= tol * s && self.y.symmetric_residual() <= tol * s
    }

    /// Real 4×4 form: block `(i,j)` is `φ(X_ij) + ψ(Y_ij)`.
    pub fn to_mat4(&self) -> RMat4 {
        let mut out = RMat4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let b = phi(self.x.m[i][j]) + psi(self.y.m[i][j]);
                out.fixed_view_mut::<2, 2>(2 * i, 2 * j).copy_from(&b);
            }
        }
        out
    }

    /// Inverse of [`KTensor::to_mat4`]; defined for any real 4×4.
    pub fn from_mat4(m: &RMat4) -> Self {
        let mut x = CMat2::zero();
        let mut y = CMat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                let b = block(m, i, j);
                x.m[i][j] = C64::new(0.5 * (b[(0, 0)] + b[(1, 1)]), 0.5 * (b[(1, 0)] - b[(0, 1)]));
                y.m[i][j] = C64::new(0.5 * (b[(0, 0)] - b[(1, 1)]), 0.5 * (b[(0, 1)] + b[(1, 0)]));
            }
        }
        Self::new(x, y)
    }

    pub fn to_block(&self) -> Result<BlockTensor> {
        BlockTensor::from_mat4(&self.to_mat4())
    }

    pub fn from_block(b: &BlockTensor) -> Self {
        Self::from_mat4(&b.to_mat4())
    }

    /// `K(X₁X₂ + Y₁Ȳ₂, X₁Y₂ + Y₁X̄₂)`.
    pub fn mul(&self, o: &KTensor) -> KTensor {
        KTensor::new(
            self.x * o.x + self.y * o.y.conj(),
            self.x * o.y + self.y * o.x.conj(),
        )
    }

    /// `K(X,Y)ᵀ = K(Xᴴ, Yᵀ)`.
    pub fn transpose(&self) -> KTensor {
        KTensor::new(self.x.h(), self.y.transpose())
    }

    /// Inverse through the Schur complement `S_X = X − Y X̄⁻¹ Ȳ`, falling
    /// back to `S_Y = Ȳ − X̄ Y⁻¹ X`, then to a dense 4×4 inverse.
    pub fn inverse(&self) -> Result<KTensor> {
        if let Some(k) = self.inverse_via_sx() {
            return Ok(k);
        }
        if let Some(k) = self.inverse_via_sy() {
            return Ok(k);
        }
        let m = self.to_mat4();
        let inv = m.try_inverse().ok_or(Error::Singular("K tensor"))?;
        Ok(KTensor::from_mat4(&inv))
    }

    /// `K(S_X⁻¹, −X⁻¹ Y conj(S_X⁻¹))`.
    pub fn inverse_via_sx(&self) -> Option<KTensor> {
        let xi = self.x.try_inverse()?;
        let sx = self.x - self.y * xi.conj() * self.y.conj();
        let p = sx.try_inverse()?;
        let q = -(xi * self.y * p.conj());
        Some(KTensor::new(p, q))
    }

    /// `K(−Ȳ⁻¹ X̄ conj(S_Y⁻¹), S_Y⁻¹)`.
    pub fn inverse_via_sy(&self) -> Option<KTensor> {
        let yi = self.y.try_inverse()?;
        let sy = self.y.conj() - self.x.conj() * yi * self.x;
        let q = sy.try_inverse()?;
        let p = -(self.y.conj().try_inverse()? * self.x.conj() * q.conj());
        Some(KTensor::new(p, q))
    }

    /// `X > 0` and `S_X > 0`, both with margin `1e-12·scale`.
    pub fn is_positive_definite(&self) -> bool {
        let s = self.scale_of();
        let band = 1e-12 * s;
        if self.x.herm_eigenvalues()[0] <= band {
            return false;
        }
        let xi = match self.x.try_inverse() {
            Some(v) => v,
            None => return false,
        };
        let sx = self.x - self.y * xi.conj() * self.y.conj();
        sx.herm_eigenvalues()[0] > band
    }

    /// Rotation of space by `θ`: `K(X, e^{2iθ} Y)`.
    pub fn rotate(&self, theta: f64) -> KTensor {
        KTensor::new(self.x, self.y.scale(C64::from_polar(1.0, 2.0 * theta)))
    }

    /// Frobenius inner product of the 4×4 forms, `2 Re tr(X₁X₂ᴴ + Y₁Y₂ᴴ)`.
    pub fn inner(&self, o: &KTensor) -> f64 {
        2.0 * (self.x.inner(&o.x) + self.y.inner(&o.y)).re
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    /// Real coordinates (16 of them) such that the dot product equals [`KTensor::inner`].
    pub fn coords(&self) -> [f64; 16] {
        let r2 = std::f64::consts::SQRT_2;
        let mut out = [0.0; 16];
        let mut k = 0;
        for mat in [&self.x, &self.y] {
            for z in mat.m.iter().flatten() {
                out[k] = r2 * z.re;
                out[k + 1] = r2 * z.im;
                k += 2;
            }
        }
        out
    }

    pub fn from_coords(c: &[f64; 16]) -> KTensor {
        let r = 1.0 / std::f64::consts::SQRT_2;
        let z = |k: usize| C64::new(r * c[k], r * c[k + 1]);
        KTensor::new(
            CMat2::new(z(0), z(2), z(4), z(6)),
            CMat2::new(z(8), z(10), z(12), z(14)),
        )
    }
}

impl Add for KTensor {
    type Output = KTensor;
    fn add(self, o: KTensor) -> KTensor {
        KTensor::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for KTensor {
    type Output = KTensor;
    fn sub(self, o: KTensor) -> KTensor {
        KTensor::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for KTensor {
    type Output = KTensor;
    fn neg(self) -> KTensor {
        KTensor::new(-self.x, -self.y)
    }
}

/// `½(K₁ A K₂ + K₂ A K₁)`.
pub fn jordan_star(k1: &KTensor, a: &KTensor, k2: &KTensor) -> KTensor {
    (k1.mul(a).mul(k2) + k2.mul(a).mul(k1)).scale(0.5)
}

/// Real symmetric 4×4 in block form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockTensor {
    pub l11: RMat2,
    pub l12: RMat2,
    pub l22: RMat2,
}

impl BlockTensor {
    pub fn new(l11: RMat2, l12: RMat2, l22: RMat2) -> Result<Self> {
        Self::from_mat4(&from_blocks(&l11, &l12, &l12.transpose(), &l22))
    }

    pub fn identity() -> Self {
        BlockTensor {
            l11: RMat2::identity(),
            l12: RMat2::zeros(),
            l22: RMat2::identity(),
        }
    }

    /// Accepts a 4×4 whose asymmetry is below `1e-10·scale` and symmetrizes it.
    pub fn from_mat4(m: &RMat4) -> Result<Self> {
        let s = mat4_scale(m);
        if (m - m.transpose()).amax() > 1e-10 * s {
            return Err(Error::Invalid("4x4 tensor is not symmetric".into()));
        }
        let m = sym4(m);
        Ok(BlockTensor {
            l11: block(&m, 0, 0),
            l12: block(&m, 0, 1),
            l22: block(&m, 1, 1),
        })
    }

    pub fn to_mat4(&self) -> RMat4 {
        from_blocks(&self.l11, &self.l12, &self.l12.transpose(), &self.l22)
    }

    pub fn to_k(&self) -> KTensor {
        KTensor::from_block(self)
    }

    pub fn is_positive_definite(&self) -> bool {
        is_spd4(&self.to_mat4(), 1e-12)
    }

    /// Schur-complement inverse; both symmetric forms are computed when
    /// possible and the first is returned.
    pub fn inverse(&self) -> Result<BlockTensor> {
        match block_inverse_forms(&self.to_mat4()) {
            Some((a, _)) => BlockTensor::from_mat4(&a),
            None => {
                let inv = self
                    .to_mat4()
                    .try_inverse()
                    .ok_or(Error::Singular("block tensor"))?;
                let s = mat4_scale(&self.to_mat4());
                if !inv.iter().all(|v| v.is_finite()) || inv.amax() * s > 1e15 {
                    return Err(Error::Singular("block tensor"));
                }
                BlockTensor::from_mat4(&inv)
            }
        }
    }
}

/// The two symmetric Schur-complement forms of a block inverse, with
/// `S₁₁ = F₁₁ − F₁₂F₂₂⁻¹F₂₁` and `S₂₂ = F₂₂ − F₂₁F₁₁⁻¹F₁₂`. `None` if
/// either diagonal block or Schur complement is singular.
pub fn block_inverse_forms(f: &RMat4) -> Option<(RMat4, RMat4)> {
    let (f11, f12, f21, f22) = (
        block(f, 0, 0),
        block(f, 0, 1),
        block(f, 1, 0),
        block(f, 1, 1),
    );
    let f11i = inv2(&f11).ok()?;
    let f22i = inv2(&f22).ok()?;
    let s11i = inv2(&(f11 - f12 * f22i * f21)).ok()?;
    let s22i = inv2(&(f22 - f21 * f11i * f12)).ok()?;
    let a = from_blocks(&s11i, &(-s11i * f12 * f22i), &(-s22i * f21 * f11i), &s22i);
    let b = from_blocks(&s11i, &(-f11i * f12 * s22i), &(-f22i * f21 * s11i), &s22i);
    Some((a, b))
}

/// Dense inverse of a 4×4 with Schur fast path.
pub fn inv4(m: &RMat4) -> Result<RMat4> {
    if let Some((a, _)) = block_inverse_forms(m) {
        return Ok(a);
    }
    let inv = m.try_inverse().ok_or(Error::Singular("4x4 matrix"))?;
    if !inv.iter().all(|v| v.is_finite()) {
        return Err(Error::Singular("4x4 matrix"));
    }
    Ok(inv)
}
