//! The isotropic polycrystal of a single crystallite `L₀ = K(X, Y)`.
//!
//! Its effective tensor does not depend on texture. Writing
//! `L* = K(𝕃*, 0)` and `Z = X̄ + 𝕃*`, `Z` is the Hermitian solution of
//! `Z + Y Z⁻¹ Yᴴ = X + X̄`. It is found by solving the linear system
//! `(𝖨 + θ𝔅_Y) Ẑ = X + X̄` and then the scalar equation `θ det Ẑ(θ) = 1`,
//! keeping roots with `Ẑ − X̄ > 0`.

use nalgebra::{Matrix4, Vector4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linkgroup::{psi_apply, psi_normalizer};
use crate::materials::IsoMaterial;
use crate::tensor4::{inv2, sqrtm2, BlockTensor, CMat2, KTensor, RMat2, C64};

/// Points in the logarithmic scan for roots in `θ`.
pub const GRID_POINTS: usize = 256;
/// Decades scanned on each side of `1/det(X + X̄)`.
const DECADES: f64 = 8.0;

/// `(a, b, c, d)` for `[[a, c + id], [c − id, b]]`.
pub fn herm_coords(z: &CMat2) -> Vector4<f64> {
    Vector4::new(z.m[0][0].re, z.m[1][1].re, z.m[0][1].re, z.m[0][1].im)
}

pub fn herm_from_coords(v: &Vector4<f64>) -> CMat2 {
    CMat2::new(
        C64::new(v[0], 0.0),
        C64::new(v[2], v[3]),
        C64::new(v[2], -v[3]),
        C64::new(v[1], 0.0),
    )
}

/// `𝔅_Y Z = Y cof(Z)ᵀ Yᴴ`.
pub fn b_apply(y: &CMat2, z: &CMat2) -> CMat2 {
    *y * z.cof().transpose() * y.h()
}

/// Matrix of `𝔅_Y` on Hermitian coordinates.
pub fn b_op(y: &CMat2) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for k in 0..4 {
        let e = herm_from_coords(&Vector4::ith(k, 1.0));
        m.set_column(k, &herm_coords(&b_apply(y, &e)));
    }
    m
}

/// `(x² − |det Y|²)(x² + |det Y|² + x⟨Y, cof Y⟩)`, coefficients of `x⁰..x⁴`.
pub fn b_charpoly(y: &CMat2) -> [f64; 5] {
    let m2 = y.det().norm_sqr();
    let k = y.inner(&y.cof()).re;
    [-m2 * m2, -m2 * k, 0.0, k, 1.0]
}

/// `det(xI − M)` by Faddeev–LeVerrier, coefficients of `x⁰..x⁴`.
pub fn charpoly4(m: &Matrix4<f64>) -> [f64; 5] {
    let mut c = [0.0; 5];
    c[4] = 1.0;
    let mut mk = *m;
    for k in 1..=4 {
        let ck = -mk.trace() / k as f64;
        c[4 - k] = ck;
        mk = m * (mk + Matrix4::identity() * ck);
    }
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RootInfo {
    pub theta: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolyResult {
    pub theta: f64,
    pub z: CMat2,
    /// `𝕃* = B⁻² + iαR⊥`.
    pub lstar_h: CMat2,
    pub lstar: BlockTensor,
    pub alpha: f64,
    pub b: RMat2,
    /// Positive roots in ascending order.
    pub roots: Vec<RootInfo>,
    /// More than one feasible root: the smallest is taken by conjecture.
    pub conjectural: bool,
}

struct System {
    s: Vector4<f64>,
    b: Matrix4<f64>,
}

impl System {
    fn zhat(&self, theta: f64) -> Option<Vector4<f64>> {
        let m = Matrix4::identity() + self.b * theta;
        m.lu()
            .solve(&self.s)
            .filter(|v| v.iter().all(|x| x.is_finite()))
    }

    fn g(&self, theta: f64) -> Option<f64> {
        self.zhat(theta)
            .map(|v| theta * herm_from_coords(&v).det().re - 1.0)
    }
}

fn bisect(sys: &System, mut lo: f64, mut hi: f64, glo: f64) -> f64 {
    let slo = glo.signum();
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        match sys.g(mid) {
            Some(v) if v.signum() == slo => lo = mid,
            Some(_) => hi = mid,
            None => break,
        }
    }
    (lo * hi).sqrt()
}

/// Extremum of `sign·g` on `[lo, hi]` by golden section in `log θ`.
fn golden_extremum(sys: &System, lo: f64, hi: f64, sign: f64) -> Option<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let f = |u: f64| sys.g(u.exp()).map(|v| sign * v);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..120 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let u = 0.5 * (a + b);
    Some((u.exp(), sign * f(u)?))
}

/// All positive roots of `θ det Ẑ(θ) = 1` found by the scan.
fn scan_roots(sys: &System, theta0: f64) -> Vec<f64> {
    let n = GRID_POINTS;
    let th: Vec<f64> = (0..n)
        .map(|i| theta0 * 10f64.powf(-DECADES + 2.0 * DECADES * i as f64 / (n - 1) as f64))
        .collect();
    let g: Vec<Option<f64>> = th.iter().map(|&t| sys.g(t)).collect();
    // a simple root has |g| → 0; sign flips across a pole do not
    let accept = |t: f64| sys.g(t).is_some_and(|v| v.abs() < 1e-8);
    let mut roots = Vec::new();
    for i in 0..n - 1 {
        if let (Some(a), Some(b)) = (g[i], g[i + 1]) {
            if a == 0.0 {
                roots.push(th[i]);
            } else if a.signum() != b.signum() && b != 0.0 {
                let r = bisect(sys, th[i], th[i + 1], a);
                if accept(r) {
                    roots.push(r);
                }
            }
        }
    }
    // roots of even multiplicity, or pairs inside one cell
    for i in 1..n - 1 {
        let (Some(a), Some(b), Some(c)) = (g[i - 1], g[i], g[i + 1]) else {
            continue;
        };
        let same = a.signum() == b.signum() && b.signum() == c.signum();
        if !same || b.abs() >= a.abs() || b.abs() >= c.abs() {
            continue;
        }
        let sign = b.signum();
        let Some((te, ge)) = golden_extremum(sys, th[i - 1], th[i + 1], sign) else {
            continue;
        };
        if ge.abs() < 1e-9 {
            roots.push(te);
        } else if ge.signum() != sign {
            for (lo, hi) in [(th[i - 1], te), (te, th[i + 1])] {
                let r = bisect(sys, lo, hi, sys.g(lo).unwrap_or(a));
                if accept(r) {
                    roots.push(r);
                }
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
    roots
}

fn lstar_from_z(z: &CMat2, x: &CMat2) -> CMat2 {
    (*z - x.conj()).herm_part()
}

fn is_feasible(l: &CMat2) -> bool {
    l.herm_eigenvalues()[0] > 1e-12 * l.max_abs()
}

pub fn solve_isotropic(l0: &KTensor) -> Result<PolyResult> {
    if !l0.is_positive_definite() {
        return Err(Error::Domain(
            "crystallite tensor is not positive definite".into(),
        ));
    }
    let (x, y) = (l0.x, l0.y);
    let s = x + x.conj();
    let sys = System {
        s: herm_coords(&s),
        b: b_op(&y),
    };
    let det_s = s.det().re;
    if !(det_s > 0.0) {
        return Err(Error::Domain("X + conj(X) is not positive definite".into()));
    }
    let roots = scan_roots(&sys, 1.0 / det_s);
    let mut infos = Vec::with_capacity(roots.len());
    for &t in &roots {
        let z = herm_from_coords(&sys.zhat(t).ok_or(Error::Singular("I + theta B"))?);
        infos.push(RootInfo {
            theta: t,
            feasible: is_feasible(&lstar_from_z(&z, &x)),
        });
    }
    let nfeas = infos.iter().filter(|r| r.feasible).count();
    let Some(best) = infos.iter().find(|r| r.feasible) else {
        return Err(Error::NoSolution(format!(
            "no feasible root among {} positive roots",
            infos.len()
        )));
    };
    let theta = best.theta;
    let z = herm_from_coords(&sys.zhat(theta).ok_or(Error::Singular("I + theta B"))?);
    let lstar_h = lstar_from_z(&z, &x);
    let lstar = KTensor::new(lstar_h, CMat2::zero()).to_block()?;
    let lambda = RMat2::new(
        lstar_h.m[0][0].re,
        lstar_h.m[0][1].re,
        lstar_h.m[1][0].re,
        lstar_h.m[1][1].re,
    );
    // iR⊥ = [[0, −i], [i, 0]]
    let alpha = 0.5 * (lstar_h.m[1][0].im - lstar_h.m[0][1].im);
    let b = inv2(&sqrtm2(&lambda)?)?;
    Ok(PolyResult {
        theta,
        z,
        lstar_h,
        lstar,
        alpha,
        b,
        roots: infos,
        conjectural: nfeas > 1,
    })
}

impl PolyResult {
    /// `θ det Z − 1`.
    pub fn theta_residual(&self) -> f64 {
        (self.theta * self.z.det().re - 1.0).abs()
    }

    /// Relative residual of `Z + Y Z⁻¹ Yᴴ = X + X̄`.
    pub fn z_residual(&self, l0: &KTensor) -> Result<f64> {
        let (x, y) = (l0.x, l0.y);
        let s = x + x.conj();
        let lhs = self.z + y * self.z.inverse()? * y.h();
        Ok((lhs - s).max_abs() / s.max_abs())
    }

    /// With `Ψ` the normalizer of `L*`, the `X` part of
    /// `2(Ψ(L₀) + 𝖨)⁻¹ − 𝖨`, relative to the whole; it vanishes when the
    /// crystallite lies on the exact relation through `𝖨`.
    pub fn exact_relation_residual(&self, l0: &KTensor) -> Result<f64> {
        let iso = IsoMaterial {
            lambda: inv2(&(self.b * self.b))?,
            nu: self.alpha,
        };
        let lp = psi_apply(&psi_normalizer(&iso)?, &l0.to_block()?)?.to_mat4();
        let id = crate::tensor4::RMat4::identity();
        let k = crate::tensor4::inv4(&(lp + id))? * 2.0 - id;
        let kk = KTensor::from_mat4(&k);
        Ok(kk.x.max_abs() / (1.0 + kk.y.max_abs()))
    }
}

/// Roots and invariants of
/// `p(t) = t(1+t)²|s₁||s₂| − t²(|s₁|+|s₂|)² − ¼(1 − t²)²`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuarticReport {
    /// Coefficients of `t⁰..t⁴`.
    pub coeffs: [f64; 5],
    /// Real roots, ascending, with multiplicity.
    pub roots: Vec<f64>,
    pub in_unit_interval: usize,
    pub above_one: usize,
    pub p0: f64,
    pub p1: f64,
    /// `a⁶ ∏_{i<j}(tᵢ − tⱼ)²` from the computed roots, `a = −¼`.
    pub discriminant: f64,
    /// `(s₁² − 1)²(s₂² − 1)²(s₁² − s₂²)²`.
    pub discriminant_closed_form: f64,
}

pub fn quartic_coeffs(s1: f64, s2: f64) -> [f64; 5] {
    let (p, q) = (s1.abs() * s2.abs(), (s1.abs() + s2.abs()).powi(2));
    [-0.25, p, 2.0 * p - q + 0.5, p, -0.25]
}

pub fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

pub fn special_quartic(s1: f64, s2: f64) -> Result<QuarticReport> {
    if !(s1.abs() > 1.0 && s2.abs() > 1.0) {
        return Err(Error::Invalid(
            "special quartic needs |s1| > 1 and |s2| > 1".into(),
        ));
    }
    let c = quartic_coeffs(s1, s2);
    // companion matrix of the monic polynomial
    let mut comp = Matrix4::zeros();
    for i in 0..3 {
        comp[(i + 1, i)] = 1.0;
    }
    for i in 0..4 {
        comp[(i, 3)] = -c[i] / c[4];
    }
    let eig = comp.complex_eigenvalues();
    let mut disc_roots = 1.0;
    for i in 0..4 {
        for j in i + 1..4 {
            disc_roots *= (eig[i] - eig[j]).powi(2).re;
        }
    }
    let dp = |t: f64| c[1] + 2.0 * c[2] * t + 3.0 * c[3] * t * t + 4.0 * c[4] * t * t * t;
    let mut roots: Vec<f64> = eig
        .iter()
        .filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.re.abs()))
        .map(|z| {
            let mut t = z.re;
            for _ in 0..4 {
                let d = dp(t);
                if d.abs() > 1e-8 {
                    t -= poly_eval(&c, t) / d;
                }
            }
            t
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    Ok(QuarticReport {
        coeffs: c,
        in_unit_interval: roots.iter().filter(|&&t| t > 0.0 && t < 1.0).count(),
        above_one: roots.iter().filter(|&&t| t > 1.0).count(),
        roots,
        p0: poly_eval(&c, 0.0),
        p1: poly_eval(&c, 1.0),
        discriminant: c[4].powi(6) * disc_roots,
        discriminant_closed_form: ((s1 * s1 - 1.0) * (s2 * s2 - 1.0) * (s1 * s1 - s2 * s2)).powi(2),
    })
}

/// `t± = 2s² − 1 ± 2s√(s² − 1)`.
pub fn t_pm(s: f64) -> (f64, f64) {
    let r = 2.0 * s * (s * s - 1.0).sqrt();
    (2.0 * s * s - 1.0 + r, 2.0 * s * s - 1.0 - r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor4::kron;
    use crate::testutil::{random_csym, random_hermitian, random_pd_k, rng, TestRng};
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Crystallites with a moderate anisotropic part.
    fn crystallite(g: &mut TestRng) -> KTensor {
        loop {
            let k = random_pd_k(g);
            if k.is_positive_definite() {
                return k;
            }
        }
    }

    #[test]
    fn b_op_examples() {
        assert_eq!(b_op(&CMat2::zero()), Matrix4::zeros());
        let bi = b_op(&CMat2::identity());
        let one = bi * herm_coords(&CMat2::identity());
        assert!((one - herm_coords(&CMat2::identity())).amax() < 1e-15);
        let mut g = rng(31);
        for _ in 0..200 {
            let (y, z) = (random_csym(&mut g), random_hermitian(&mut g));
            let direct = herm_coords(&(y * z.cof().transpose() * y.h()));
            assert!((b_op(&y) * herm_coords(&z) - direct).amax() < 1e-14);
            assert!(b_apply(&y, &z).hermitian_residual() < 1e-14);
        }
    }

    #[test]
    fn b_op_is_phase_invariant() {
        let mut g = rng(32);
        for _ in 0..100 {
            let y = random_csym(&mut g);
            let a: f64 = g.gen_range(0.0..6.3);
            let ya = y.scale(C64::from_polar(1.0, a));
            assert!((b_op(&y) - b_op(&ya)).amax() < 1e-14);
        }
    }

    #[test]
    fn charpoly_examples() {
        assert_eq!(b_charpoly(&CMat2::zero()), [0.0, 0.0, 0.0, 0.0, 1.0]);
        // (x² − 1)(x + 1)² = x⁴ + 2x³ − 2x − 1
        assert_eq!(b_charpoly(&CMat2::identity()), [-1.0, -2.0, 0.0, 2.0, 1.0]);
        let direct = charpoly4(&b_op(&CMat2::identity()));
        for (a, b) in direct.iter().zip([-1.0, -2.0, 0.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn charpoly_matches_assembled_operator() {
        let mut g = rng(33);
        for _ in 0..1000 {
            let y = random_csym(&mut g).scale_re(2.0);
            let a = b_charpoly(&y);
            let b = charpoly4(&b_op(&y));
            let s = 1.0 + y.max_abs().powi(8);
            for k in 0..5 {
                assert!((a[k] - b[k]).abs() < 1e-10 * s, "{k}: {} vs {}", a[k], b[k]);
            }
        }
    }

    #[test]
    fn remaining_eigenvalues_are_complex_or_positive() {
        let mut g = rng(34);
        let mut real_pairs = 0;
        for _ in 0..1000 {
            let y = random_csym(&mut g);
            let m2 = y.det().norm_sqr();
            let k = y.inner(&y.cof()).re;
            let disc = k * k - 4.0 * m2;
            if disc >= 0.0 {
                real_pairs += 1;
                let (r1, r2) = ((-k - disc.sqrt()) / 2.0, (-k + disc.sqrt()) / 2.0);
                assert!(r1 >= -1e-12 && r2 >= -1e-12, "{r1} {r2}");
            }
        }
        assert!(real_pairs > 50);
    }

    #[test]
    fn isotropic_crystallite_is_its_own_polycrystal() {
        let x = CMat2::new(c(2.0, 0.0), c(0.3, -0.4), c(0.3, 0.4), c(1.5, 0.0));
        let l0 = KTensor::new(x, CMat2::zero());
        let r = solve_isotropic(&l0).unwrap();
        assert!((r.theta - 1.0 / (x + x.conj()).det().re).abs() < 1e-14 * r.theta);
        assert!((r.lstar_h - x).max_abs() < 1e-13);
        assert_eq!(r.roots.len(), 1);
    }

    #[test]
    fn real_y_equal_s_roots() {
        // X = I, Y = I/2: s₁ = s₂ = 2, t = θ det Y = θ/4
        let l0 = KTensor::new(CMat2::identity(), CMat2::identity().scale_re(0.5));
        let r = solve_isotropic(&l0).unwrap();
        let ts: Vec<f64> = r.roots.iter().map(|x| x.theta / 4.0).collect();
        let (tp, tm) = t_pm(2.0);
        assert!(
            (tp - (7.0 + 4.0 * 3f64.sqrt())).abs() < 1e-12
                && (tm - (7.0 - 4.0 * 3f64.sqrt())).abs() < 1e-14
        );
        // the double root t = 1 sits where I + θ𝔅 is singular; there Z has
        // eigenvalues 1 ± √3/2 in any frame, so Z − I is indefinite
        let m = Matrix4::identity() + b_op(&l0.y) * 4.0;
        assert!(m.determinant().abs() < 1e-14);
        assert_eq!(ts.len(), 2, "{ts:?}");
        for (t, want) in ts.iter().zip([tm, tp]) {
            assert!((t - want).abs() < 1e-7 * want, "{t} vs {want}");
        }
        assert!((r.theta / 4.0 - tm).abs() < 1e-12);
        assert!(r.theta_residual() < 1e-12 && r.z_residual(&l0).unwrap() < 1e-12);
    }

    #[test]
    fn uncoupled_conduction_gives_geometric_mean() {
        let mut g = rng(35);
        for _ in 0..50 {
            let (p, q): (f64, f64) = (g.gen_range(0.2..5.0), g.gen_range(0.2..5.0));
            let r = crate::tensor4::rot(g.gen_range(0.0..3.0));
            let sigma0 = crate::tensor4::sym2(&(r * RMat2::new(p, 0.0, 0.0, q) * r.transpose()));
            let l0 = KTensor::from_mat4(&kron(&RMat2::identity(), &sigma0));
            let r = solve_isotropic(&l0).unwrap();
            let want = kron(&RMat2::identity(), &(RMat2::identity() * (p * q).sqrt()));
            assert!((r.lstar.to_mat4() - want).amax() < 1e-10 * want.amax());
        }
    }

    #[test]
    fn random_crystallites_satisfy_invariants() {
        let mut g = rng(36);
        for _ in 0..300 {
            let l0 = crystallite(&mut g);
            let r = solve_isotropic(&l0).unwrap();
            assert!(r.theta > 0.0);
            assert!(r.theta_residual() < 1e-12, "{}", r.theta_residual());
            assert!(
                r.z_residual(&l0).unwrap() < 1e-12,
                "{}",
                r.z_residual(&l0).unwrap()
            );
            assert!(r.lstar.is_positive_definite());
            assert!(
                r.exact_relation_residual(&l0).unwrap() < 1e-10,
                "{}",
                r.exact_relation_residual(&l0).unwrap()
            );
        }
    }

    #[test]
    fn rotation_and_scaling() {
        let mut g = rng(37);
        for _ in 0..100 {
            let l0 = crystallite(&mut g);
            let r = solve_isotropic(&l0).unwrap();
            let rr = solve_isotropic(&l0.rotate(g.gen_range(0.0..6.3))).unwrap();
            assert!(
                (r.lstar.to_mat4() - rr.lstar.to_mat4()).amax() < 1e-12 * r.lstar.to_mat4().amax()
            );
            for k in [0.1, 10.0] {
                let rk = solve_isotropic(&l0.scale(k)).unwrap();
                let d = (rk.lstar.to_mat4() - r.lstar.to_mat4() * k).amax();
                assert!(d < 1e-11 * k * r.lstar.to_mat4().amax());
            }
        }
    }

    #[test]
    fn halton_polycrystal_approaches_the_unique_tensor() {
        let mut g = rng(38);
        for _ in 0..5 {
            let l0 = crystallite(&mut g);
            let r = solve_isotropic(&l0).unwrap();
            let lam = crate::laminate::laminate_tree(&crate::laminate::halton_polycrystal(
                &l0.to_block().unwrap(),
                10,
            ))
            .unwrap();
            let d = (lam.to_mat4() - r.lstar.to_mat4()).amax() / r.lstar.to_mat4().amax();
            assert!(d < 0.03, "{d}");
        }
    }

    #[test]
    fn special_quartic_equal_s() {
        let rep = special_quartic(2.0, 2.0).unwrap();
        let (tp, tm) = t_pm(2.0);
        assert!((tp * tm - 1.0).abs() < 1e-12);
        assert_eq!(rep.roots.len(), 4, "{:?}", rep.roots);
        for (t, want) in rep.roots.iter().zip([tm, 1.0, 1.0, tp]) {
            assert!((t - want).abs() < 1e-6 * want, "{t} vs {want}");
        }
        assert_eq!(rep.p0, -0.25);
        assert!(special_quartic(1.0, 3.0).is_err());
    }

    #[test]
    fn special_quartic_root_counts_and_discriminant() {
        let mut g = rng(39);
        let mut ratio = None;
        for _ in 0..500 {
            let s2: f64 = g.gen_range(1.05..4.0);
            let s1 = s2 + g.gen_range(0.05..3.0);
            let rep = special_quartic(s1, s2).unwrap();
            assert_eq!(
                (rep.in_unit_interval, rep.above_one),
                (2, 2),
                "{s1} {s2} {:?}",
                rep.roots
            );
            assert_eq!(rep.p0, -0.25);
            assert!((rep.p1 + (s1 - s2).powi(2)).abs() < 1e-12 * (1.0 + s1 * s1));
            let q = rep.discriminant / rep.discriminant_closed_form;
            let r0 = *ratio.get_or_insert(q);
            assert!((q - r0).abs() < 1e-6 * r0.abs(), "{q} vs {r0}");
            for t in -3..=0 {
                assert!(poly_eval(&rep.coeffs, f64::from(t) * 0.7) < 0.0);
            }
        }
        assert!((ratio.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn real_y_roots_match_quartic() {
        let mut g = rng(40);
        let mut n = 0;
        while n < 100 {
            let x = crate::testutil::random_spd2(&mut g, 0.5, 2.0);
            let yr = crate::testutil::random_spd2(&mut g, 0.1, 1.5)
                * if g.gen_bool(0.5) { 1.0 } else { -1.0 };
            let l0 = KTensor::new(CMat2::from_real(&x), CMat2::from_real(&yr));
            if !l0.is_positive_definite() {
                continue;
            }
            n += 1;
            let h = sqrtm2(&x).unwrap();
            let m = h * inv2(&yr).unwrap() * h;
            let (ev, _) = crate::tensor4::sym2_eigen(&m);
            let rep = special_quartic(ev[0], ev[1]).unwrap();
            let r = solve_isotropic(&l0).unwrap();
            let dy = yr.determinant();
            let ts: Vec<f64> = r.roots.iter().map(|x| x.theta * dy).collect();
            let mut qs = rep.roots.clone();
            qs.dedup_by(|a, b| (*a - *b).abs() < 1e-6 * b.abs());
            assert_eq!(ts.len(), qs.len(), "{ts:?} vs {qs:?}");
            for (a, b) in ts.iter().zip(&qs) {
                assert!((a - b).abs() < 1e-7 * b, "{a} vs {b}");
            }
        }
    }
}
