//! The catalog of the 23 rotation-invariant Jordan multialgebras `Π(V,W)`
//! and randomized checkers for closure, subalgebras, ideals, chains,
//! automorphisms and inversion keys.
//!
//! `V` is a real span of Hermitian 2×2 matrices and `W` a complex span of
//! symmetric ones. Multiplication is taken with respect to
//! `A₀ = {K(0, zI)}`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor4::{jordan_star, z0, z0z0t, CMat2, KTensor, C64, I, ONE, ZERO};
use crate::testutil::{rng, uniform, uniform_c, TestRng};

/// Orthonormal basis of a real subspace of `Rⁿ`.
#[derive(Clone, Debug)]
pub struct RealSpan {
    n: usize,
    basis: Vec<Vec<f64>>,
}

impl RealSpan {
    /// Gram-Schmidt (applied twice); vectors dependent within `1e-10` are dropped.
    pub fn new(n: usize, vectors: &[Vec<f64>]) -> Self {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in vectors {
            assert_eq!(v.len(), n);
            let norm0 = dot(v, v).sqrt();
            if norm0 == 0.0 {
                continue;
            }
            let mut w = v.clone();
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&w, b);
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= c * bi;
                    }
                }
            }
            let nw = dot(&w, &w).sqrt();
            if nw > 1e-10 * norm0 {
                basis.push(w.iter().map(|x| x / nw).collect());
            }
        }
        RealSpan { n, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for b in &self.basis {
            let c = dot(v, b);
            for (o, bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        out
    }

    /// Distance from `v` to the subspace.
    pub fn distance(&self, v: &[f64]) -> f64 {
        let p = self.project(v);
        v.iter()
            .zip(&p)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cm_coords(m: &CMat2) -> Vec<f64> {
    m.m.iter().flatten().flat_map(|z| [z.re, z.im]).collect()
}

fn cm_from_coords(c: &[f64]) -> CMat2 {
    let z = |k: usize| C64::new(c[k], c[k + 1]);
    CMat2::new(z(0), z(2), z(4), z(6))
}

/// Real span of complex 2×2 matrices.
pub fn real_span(mats: &[CMat2]) -> RealSpan {
    RealSpan::new(8, &mats.iter().map(cm_coords).collect::<Vec<_>>())
}

/// Complex span of complex 2×2 matrices, as a real span of `{M, iM}`.
pub fn complex_span(mats: &[CMat2]) -> RealSpan {
    let v: Vec<Vec<f64>> = mats
        .iter()
        .flat_map(|m| [cm_coords(m), cm_coords(&m.scale(I))])
        .collect();
    RealSpan::new(8, &v)
}

/// One catalog entry. Ids 1..=23 follow the classification order; the
/// two extra subspaces `-10 = (ℂe₂⊗e₂, 0)` and `-5 = (ℂI, ℝψ(1))` appear
/// only as subalgebras of 15 and 16.
#[derive(Clone, Debug)]
pub struct AlgebraSpec {
    pub id: i32,
    pub name: &'static str,
    pub v_basis: Vec<CMat2>,
    pub w_basis: Vec<CMat2>,
}

/// Table dimensions `(dim_ℂ W, dim_ℝ V)`.
pub const DIMS: [(usize, usize); 23] = [
    (0, 0),
    (0, 1),
    (1, 0),
    (1, 1),
    (1, 1),
    (1, 1),
    (1, 1),
    (1, 2),
    (1, 2),
    (1, 0),
    (1, 1),
    (1, 0),
    (1, 1),
    (2, 0),
    (2, 1),
    (2, 2),
    (2, 2),
    (2, 0),
    (2, 1),
    (2, 2),
    (2, 3),
    (3, 0),
    (3, 4),
];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn e11() -> CMat2 {
    CMat2::diag(ONE, ZERO)
}

fn e22() -> CMat2 {
    CMat2::diag(ZERO, ONE)
}

fn psi_c(z: C64) -> CMat2 {
    CMat2::from_re(z.re, z.im, z.im, -z.re)
}

fn irperp() -> CMat2 {
    // i R⊥ = [[0, −i], [i, 0]]
    CMat2::new(ZERO, -I, I, ZERO)
}

fn phi_im() -> CMat2 {
    CMat2::new(ZERO, I, -I, ZERO)
}

/// The catalog in table order.
pub fn catalog() -> Vec<AlgebraSpec> {
    (1..=23).map(|id| spec(id).expect("catalog id")).collect()
}

/// A catalog entry or one of the two extra subspaces `-10`, `-5`.
pub fn spec(id: i32) -> Result<AlgebraSpec> {
    let id_m = CMat2::identity();
    let half_i = c(0.0, 0.5);
    let v21a = CMat2::new(ONE, half_i, -half_i, ZERO);
    let v21b = CMat2::new(ZERO, half_i, -half_i, ONE);
    let e12 = CMat2::new(ZERO, ONE, ONE, ZERO);
    let (name, v, w): (&'static str, Vec<CMat2>, Vec<CMat2>) = match id {
        1 => ("(0,0)", vec![], vec![]),
        2 => ("(0,RZ0)", vec![z0()], vec![]),
        3 => ("(CI,0)", vec![], vec![id_m]),
        4 => ("(CI,RI)", vec![id_m], vec![id_m]),
        5 => ("(CI,Rpsi(i))", vec![psi_c(I)], vec![id_m]),
        6 => ("(CI,iRperp)", vec![irperp()], vec![id_m]),
        7 => ("(CI,RZ0)", vec![z0()], vec![id_m]),
        8 => ("(CI,Phi)", vec![id_m, phi_im()], vec![id_m]),
        9 => ("(CI,Psi)", vec![psi_c(ONE), psi_c(I)], vec![id_m]),
        10 => ("(Ce1e1,0)", vec![], vec![e11()]),
        11 => ("Ann(Ce2)", vec![e11()], vec![e11()]),
        12 => ("(Cz0z0,0)", vec![], vec![z0z0t()]),
        13 => ("Ann(Cz0bar)", vec![z0()], vec![z0z0t()]),
        14 => ("(D,0)", vec![], vec![e11(), e22()]),
        15 => ("(D,e1e1)", vec![e11()], vec![e11(), e22()]),
        16 => ("(D,D)", vec![e11(), e22()], vec![e11(), e22()]),
        17 => ("(D,D')", vec![psi_c(I), irperp()], vec![e11(), e22()]),
        18 => ("(W,0)", vec![], vec![id_m, z0z0t()]),
        19 => ("(W,RZ0)", vec![z0()], vec![id_m, z0z0t()]),
        20 => ("(W,Vinf)", vec![psi_c(I), z0()], vec![id_m, z0z0t()]),
        21 => ("(W,V)", vec![psi_c(I), v21a, v21b], vec![id_m, z0z0t()]),
        22 => ("(Sym(C2),0)", vec![], vec![e11(), e22(), e12]),
        23 => (
            "Sym(T)",
            vec![id_m, psi_c(ONE), psi_c(I), irperp()],
            vec![e11(), e22(), e12],
        ),
        -10 => ("(Ce2e2,0)", vec![], vec![e22()]),
        -5 => ("(CI,Rpsi(1))", vec![psi_c(ONE)], vec![id_m]),
        _ => return Err(Error::Invalid(format!("unknown algebra id {id}"))),
    };
    Ok(AlgebraSpec {
        id,
        name,
        v_basis: v,
        w_basis: w,
    })
}

impl AlgebraSpec {
    pub fn v_span(&self) -> RealSpan {
        real_span(&self.v_basis)
    }

    pub fn w_span(&self) -> RealSpan {
        complex_span(&self.w_basis)
    }

    /// `(dim_ℂ W, dim_ℝ V)` computed from the bases.
    pub fn dims(&self) -> (usize, usize) {
        (self.w_span().dim() / 2, self.v_span().dim())
    }

    /// The algebra as a real subspace of the 16 `K(X,Y)` coordinates.
    pub fn embed(&self) -> RealSpan {
        let mut vecs = Vec::new();
        for v in &self.v_basis {
            vecs.push(KTensor::new(*v, CMat2::zero()).coords().to_vec());
        }
        for w in &self.w_basis {
            vecs.push(KTensor::new(CMat2::zero(), *w).coords().to_vec());
            vecs.push(KTensor::new(CMat2::zero(), w.scale(I)).coords().to_vec());
        }
        RealSpan::new(16, &vecs)
    }

    pub fn project(&self, k: &KTensor) -> KTensor {
        let p = self.embed().project(&k.coords());
        let mut a = [0.0; 16];
        a.copy_from_slice(&p);
        KTensor::from_coords(&a)
    }

    /// Distance to the algebra relative to `1 + ‖K‖`.
    pub fn residual(&self, k: &KTensor) -> f64 {
        self.embed().distance(&k.coords()) / (1.0 + k.norm())
    }

    pub fn contains(&self, k: &KTensor, tol: f64) -> bool {
        self.residual(k) <= tol
    }

    pub fn random_x(&self, rng: &mut TestRng) -> CMat2 {
        self.v_basis
            .iter()
            .fold(CMat2::zero(), |acc, v| acc + v.scale_re(uniform(rng)))
    }

    pub fn random_y(&self, rng: &mut TestRng) -> CMat2 {
        self.w_basis
            .iter()
            .fold(CMat2::zero(), |acc, w| acc + w.scale(uniform_c(rng)))
    }

    pub fn random_element(&self, rng: &mut TestRng) -> KTensor {
        KTensor::new(self.random_x(rng), self.random_y(rng))
    }
}

/// Random element of `A₀ = {K(0, zI)}`.
pub fn random_a0(rng: &mut TestRng) -> KTensor {
    KTensor::new(CMat2::zero(), CMat2::identity().scale(uniform_c(rng)))
}

/// Outcome of a randomized check.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub algebra_id: i32,
    pub check: String,
    pub trials: usize,
    pub max_residual: f64,
    pub pass: bool,
}

impl Report {
    fn new(algebra_id: i32, check: &str, trials: usize, max_residual: f64, tol: f64) -> Self {
        Report {
            algebra_id,
            check: check.to_string(),
            trials,
            max_residual,
            pass: max_residual <= tol,
        }
    }
}

fn rel_dist(span: &RealSpan, m: &CMat2) -> f64 {
    span.distance(&cm_coords(m)) / (1.0 + m.norm())
}

/// Default tolerance of the randomized checks.
pub const CHECK_TOL: f64 = 1e-10;

/// `Y² + XXᵀ ∈ W`, `YX + XYᴴ ∈ V`, and the defining `K A K ∈ Π` for
/// `A ∈ A₀`, on random draws with independently scaled `X`, `Y`.
pub fn check_closure(spec: &AlgebraSpec, trials: usize, seed: u64) -> Report {
    let mut rng = rng(seed);
    let (vs, ws, emb) = (spec.v_span(), spec.w_span(), spec.embed());
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let x = spec.random_x(&mut rng);
        let y = spec.random_y(&mut rng);
        worst = worst.max(rel_dist(&ws, &(y * y + x * x.transpose())));
        worst = worst.max(rel_dist(&vs, &(y * x + x * y.h())));
        let k = KTensor::new(x, y);
        let a = random_a0(&mut rng);
        let kak = k.mul(&a).mul(&k);
        worst = worst.max(emb.distance(&kak.coords()) / (1.0 + kak.norm()));
    }
    Report::new(spec.id, "closure", trials, worst, CHECK_TOL)
}

/// Polarized Jordan product closure `K₁ *_A K₂ ∈ Π`.
pub fn jordan_closure_residual(spec: &AlgebraSpec, trials: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let emb = spec.embed();
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let k1 = spec.random_element(&mut rng);
        let k2 = spec.random_element(&mut rng);
        let a = random_a0(&mut rng);
        let j = jordan_star(&k1, &a, &k2);
        worst = worst.max(emb.distance(&j.coords()) / (1.0 + j.norm()));
    }
    worst
}

fn containment_residual(sub: &AlgebraSpec, sup: &AlgebraSpec) -> f64 {
    let emb = sup.embed();
    sub.embed()
        .basis()
        .iter()
        .map(|b| emb.distance(b))
        .fold(0.0, f64::max)
}

/// `a ⊂ b` and `a` closed.
pub fn is_subalgebra(a: &AlgebraSpec, b: &AlgebraSpec, trials: usize, seed: u64) -> Report {
    let r = containment_residual(a, b).max(jordan_closure_residual(a, trials, seed));
    Report::new(b.id, &format!("subalgebra {}", a.id), trials, r, CHECK_TOL)
}

/// `J *_A K ∈ 𝓘` for `J ∈ 𝓘`, `K ∈ Π`, `A ∈ A₀`, and `𝓘 ⊂ Π`.
pub fn is_ideal(ideal: &AlgebraSpec, a: &AlgebraSpec, trials: usize, seed: u64) -> Report {
    let mut rng = rng(seed);
    let emb = ideal.embed();
    let mut worst = containment_residual(ideal, a);
    for _ in 0..trials {
        let j = ideal.random_element(&mut rng);
        let k = a.random_element(&mut rng);
        let m = random_a0(&mut rng);
        let p = jordan_star(&j, &m, &k);
        worst = worst.max(emb.distance(&p.coords()) / (1.0 + p.norm()));
    }
    Report::new(
        a.id,
        &format!("ideal {}", ideal.id),
        trials,
        worst,
        CHECK_TOL,
    )
}

/// `Π² = sq`: every product lies in `sq` and the products span it.
pub fn is_square(sq: &AlgebraSpec, a: &AlgebraSpec, trials: usize, seed: u64) -> Report {
    let mut rng = rng(seed);
    let emb = sq.embed();
    let mut worst = 0.0_f64;
    let mut products = Vec::new();
    for _ in 0..trials.max(4 * 16) {
        let k1 = a.random_element(&mut rng);
        let k2 = a.random_element(&mut rng);
        let m = random_a0(&mut rng);
        let p = jordan_star(&k1, &m, &k2);
        worst = worst.max(emb.distance(&p.coords()) / (1.0 + p.norm()));
        products.push(p.coords().to_vec());
    }
    let span = RealSpan::new(16, &products);
    let r = if span.dim() == emb.dim() {
        worst
    } else {
        f64::INFINITY
    };
    Report::new(a.id, &format!("square {}", sq.id), trials, r, CHECK_TOL)
}

/// Relation of a listed subalgebra to its parent in the catalog table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mark {
    Plain,
    Ideal,
    Square,
}

/// Subalgebra column of the catalog table.
pub fn subalgebra_table(id: i32) -> Vec<(i32, Mark)> {
    use Mark::*;
    let list: &[(i32, Mark)] = match id {
        1 => &[],
        2 => &[(1, Square)],
        3 => &[(1, Ideal)],
        4..=6 => &[(1, Ideal), (3, Plain)],
        7 => &[(1, Ideal), (2, Ideal), (3, Plain)],
        8 => &[
            (1, Ideal),
            (2, Plain),
            (3, Plain),
            (4, Plain),
            (6, Plain),
            (7, Plain),
        ],
        9 => &[(1, Ideal), (3, Plain), (5, Plain)],
        10 => &[(1, Ideal)],
        11 => &[(1, Ideal), (10, Plain)],
        12 => &[(1, Square)],
        13 => &[(1, Square), (2, Ideal), (12, Ideal)],
        14 => &[(1, Ideal), (3, Plain), (10, Ideal)],
        15 => &[
            (1, Ideal),
            (3, Plain),
            (10, Plain),
            (-10, Ideal),
            (11, Ideal),
            (14, Plain),
        ],
        16 => &[
            (1, Ideal),
            (3, Plain),
            (4, Plain),
            (-5, Plain),
            (10, Plain),
            (11, Ideal),
            (14, Plain),
            (15, Plain),
        ],
        17 => &[
            (1, Ideal),
            (3, Plain),
            (5, Plain),
            (6, Plain),
            (10, Plain),
            (14, Plain),
        ],
        18 => &[(1, Ideal), (3, Plain), (12, Ideal)],
        19 => &[
            (1, Ideal),
            (2, Ideal),
            (3, Plain),
            (7, Plain),
            (12, Ideal),
            (13, Ideal),
            (18, Plain),
        ],
        20 => &[
            (1, Ideal),
            (2, Plain),
            (3, Plain),
            (5, Plain),
            (7, Plain),
            (12, Plain),
            (13, Ideal),
            (18, Plain),
            (19, Plain),
        ],
        21 => &[
            (1, Ideal),
            (2, Plain),
            (3, Plain),
            (5, Plain),
            (7, Plain),
            (9, Plain),
            (12, Plain),
            (13, Ideal),
            (18, Plain),
            (19, Plain),
            (20, Plain),
        ],
        22 => &[
            (1, Ideal),
            (3, Plain),
            (10, Plain),
            (12, Plain),
            (14, Plain),
            (18, Plain),
        ],
        23 => {
            return std::iter::once((1, Ideal))
                .chain((2..=22).map(|j| (j, Plain)))
                .collect();
        }
        _ => &[],
    };
    list.to_vec()
}

/// The reduced list of algebra/ideal pairs `(algebra, ideal)`.
pub const IDEAL_PAIRS: [(i32, i32); 5] = [(19, 2), (19, 12), (21, 13), (15, -10), (16, 11)];

/// Every subalgebra, ideal and square claim of the table for one entry.
pub fn check_table(id: i32, trials: usize, seed: u64) -> Result<Vec<Report>> {
    let parent = spec(id)?;
    let mut out = Vec::new();
    for (j, mark) in subalgebra_table(id) {
        let child = spec(j)?;
        out.push(is_subalgebra(&child, &parent, trials, seed));
        match mark {
            Mark::Ideal => out.push(is_ideal(&child, &parent, trials, seed)),
            Mark::Square => out.push(is_square(&child, &parent, trials, seed)),
            Mark::Plain => {}
        }
    }
    Ok(out)
}

fn random_chain_inputs(spec: &AlgebraSpec, rng: &mut TestRng) -> ([KTensor; 4], [KTensor; 3]) {
    let k = [
        spec.random_element(rng),
        spec.random_element(rng),
        spec.random_element(rng),
        spec.random_element(rng),
    ];
    let a = [random_a0(rng), random_a0(rng), random_a0(rng)];
    (k, a)
}

fn chain3(k1: &KTensor, k: &[KTensor; 4], a: &[KTensor; 3]) -> KTensor {
    k1.mul(&a[0]).mul(&k[1]).mul(&a[1]).mul(&k[2]) + k[2].mul(&a[1]).mul(&k[1]).mul(&a[0]).mul(k1)
}

fn chain4(k1: &KTensor, k: &[KTensor; 4], a: &[KTensor; 3]) -> KTensor {
    k1.mul(&a[0])
        .mul(&k[1])
        .mul(&a[1])
        .mul(&k[2])
        .mul(&a[2])
        .mul(&k[3])
        + k[3]
            .mul(&a[2])
            .mul(&k[2])
            .mul(&a[1])
            .mul(&k[1])
            .mul(&a[0])
            .mul(k1)
}

/// Three- and four-chain sums land in `Π`.
pub fn check_chain(spec: &AlgebraSpec, trials: usize, seed: u64) -> Report {
    let mut rng = rng(seed);
    let emb = spec.embed();
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let (k, a) = random_chain_inputs(spec, &mut rng);
        for q in [chain3(&k[0], &k, &a), chain4(&k[0], &k, &a)] {
            worst = worst.max(emb.distance(&q.coords()) / (1.0 + q.norm()));
        }
    }
    Report::new(spec.id, "chain", trials, worst, CHECK_TOL)
}

/// Chain sums with the outer factor taken from the ideal land in the ideal.
pub fn check_chain_ideal(
    ideal: &AlgebraSpec,
    spec: &AlgebraSpec,
    trials: usize,
    seed: u64,
) -> Report {
    let mut rng = rng(seed);
    let emb = ideal.embed();
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let (k, a) = random_chain_inputs(spec, &mut rng);
        let j = ideal.random_element(&mut rng);
        for q in [chain3(&j, &k, &a), chain4(&j, &k, &a)] {
            worst = worst.max(emb.distance(&q.coords()) / (1.0 + q.norm()));
        }
    }
    Report::new(
        spec.id,
        &format!("chain ideal {}", ideal.id),
        trials,
        worst,
        CHECK_TOL,
    )
}

/// Dimension of the kernel of a real-linear map given by its images of a basis.
fn kernel_dim(images: &[Vec<f64>]) -> usize {
    if images.is_empty() {
        return 0;
    }
    let rows = images[0].len();
    let m = DMatrix::from_fn(rows, images.len(), |i, j| images[j][i]);
    let sv = m.svd(false, false).singular_values;
    let smax = sv.max().max(1.0);
    images.len() - sv.iter().filter(|s| **s > 1e-10 * smax).count()
}

/// Witness for the chain properties: an associative pair `(V', W')` with
/// `XȲ, YX ∈ V'`, `X₁X̄₂, Y₁Y₂ ∈ W'`, closed under `ᴴ` and `ᵀ`, whose
/// Hermitian and symmetric parts are `V` and `W`. `V'` is a real span,
/// `W'` a complex span.
pub fn check_chain_witness(
    spec: &AlgebraSpec,
    v_prime: &[CMat2],
    w_prime: &[CMat2],
    trials: usize,
    seed: u64,
) -> Report {
    let mut rng = rng(seed);
    let vs = real_span(v_prime);
    let ws = complex_span(w_prime);
    let draw_v = |rng: &mut TestRng| {
        v_prime
            .iter()
            .fold(CMat2::zero(), |a, v| a + v.scale_re(uniform(rng)))
    };
    let draw_w = |rng: &mut TestRng| {
        w_prime
            .iter()
            .fold(CMat2::zero(), |a, w| a + w.scale(uniform_c(rng)))
    };
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let (x1, x2) = (draw_v(&mut rng), draw_v(&mut rng));
        let (y1, y2) = (draw_w(&mut rng), draw_w(&mut rng));
        for m in [x1 * y1.conj(), y1 * x1, x1.h()] {
            worst = worst.max(rel_dist(&vs, &m));
        }
        for m in [x1 * x2.conj(), y1 * y2, y1.transpose()] {
            worst = worst.max(rel_dist(&ws, &m));
        }
    }
    // V ⊂ V', W ⊂ W' and the intersections have the right dimensions
    for v in &spec.v_basis {
        worst = worst.max(rel_dist(&vs, v));
    }
    for w in &spec.w_basis {
        worst = worst.max(rel_dist(&ws, w));
    }
    let anti_h: Vec<Vec<f64>> = vs
        .basis()
        .iter()
        .map(|b| {
            let m = cm_from_coords(b);
            cm_coords(&(m - m.h()))
        })
        .collect();
    let anti_t: Vec<Vec<f64>> = ws
        .basis()
        .iter()
        .map(|b| {
            let m = cm_from_coords(b);
            cm_coords(&(m - m.transpose()))
        })
        .collect();
    let (w_dim, v_dim) = spec.dims();
    if kernel_dim(&anti_h) != v_dim || kernel_dim(&anti_t) != 2 * w_dim {
        worst = f64::INFINITY;
    }
    Report::new(spec.id, "chain witness", trials, worst, CHECK_TOL)
}

/// `C₊(c) = [[cos c, sin c], [−sin c, cos c]]`.
pub fn c_plus(c: C64) -> CMat2 {
    CMat2::new(c.cos(), c.sin(), -c.sin(), c.cos())
}

/// `C₋(c) = [[cos c, sin c], [sin c, −cos c]]`.
pub fn c_minus(c: C64) -> CMat2 {
    CMat2::new(c.cos(), c.sin(), c.sin(), -c.cos())
}

/// An automorphism of a multialgebra.
#[derive(Clone, Debug)]
pub enum AutomorphismDesc {
    /// `K(X,Y) ↦ K(±CXCᴴ, CYCᵀ)` with `C ∈ O(2,ℂ)`.
    Global { c: CMat2, sign: f64 },
    /// Linear on the algebra: real-linear on `V` given by images of a
    /// spanning set, complex-linear on `W` likewise.
    Linear {
        v_map: Vec<(CMat2, CMat2)>,
        w_map: Vec<(CMat2, CMat2)>,
    },
}

fn apply_linear(pairs: &[(CMat2, CMat2)], complex: bool, m: &CMat2) -> CMat2 {
    if pairs.is_empty() {
        return CMat2::zero();
    }
    let mut pre = Vec::new();
    let mut img = Vec::new();
    for (p, q) in pairs {
        pre.push(cm_coords(p));
        img.push(*q);
        if complex {
            pre.push(cm_coords(&p.scale(I)));
            img.push(q.scale(I));
        }
    }
    let a = DMatrix::from_fn(8, pre.len(), |i, j| pre[j][i]);
    let b = DMatrix::from_column_slice(8, 1, &cm_coords(m));
    let coef = a.svd(true, true).solve(&b, 1e-13).expect("least squares");
    img.iter()
        .zip(coef.iter())
        .fold(CMat2::zero(), |acc, (q, s)| acc + q.scale_re(*s))
}

impl AutomorphismDesc {
    pub fn global(c: CMat2, sign: f64) -> Result<Self> {
        let r = (c * c.transpose() - CMat2::identity()).max_abs();
        if r > 1e-10 * (1.0 + c.max_abs()) {
            return Err(Error::Invalid("C is not complex orthogonal".into()));
        }
        Ok(AutomorphismDesc::Global { c, sign })
    }

    pub fn apply(&self, k: &KTensor) -> KTensor {
        match self {
            AutomorphismDesc::Global { c, sign } => {
                KTensor::new((*c * k.x * c.h()).scale_re(*sign), *c * k.y * c.transpose())
            }
            AutomorphismDesc::Linear { v_map, w_map } => KTensor::new(
                apply_linear(v_map, false, &k.x),
                apply_linear(w_map, true, &k.y),
            ),
        }
    }
}

/// `Φ(K₁ *_A K₂) = Φ(K₁) *_A Φ(K₂)` and `Φ(Π) ⊂ Π` on random draws.
pub fn check_automorphism(
    desc: &AutomorphismDesc,
    spec: &AlgebraSpec,
    trials: usize,
    seed: u64,
) -> Report {
    let mut rng = rng(seed);
    let emb = spec.embed();
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let k1 = spec.random_element(&mut rng);
        let k2 = spec.random_element(&mut rng);
        let a = random_a0(&mut rng);
        let lhs = desc.apply(&jordan_star(&k1, &a, &k2));
        let rhs = jordan_star(&desc.apply(&k1), &a, &desc.apply(&k2));
        worst = worst.max((lhs - rhs).norm() / (1.0 + lhs.norm()));
        let img = desc.apply(&k1);
        worst = worst.max(emb.distance(&img.coords()) / (1.0 + img.norm()));
    }
    Report::new(spec.id, "automorphism", trials, worst, CHECK_TOL)
}

/// Sample members of the automorphism families listed for entry `id`.
pub fn automorphism_families(id: i32, rng: &mut TestRng) -> Vec<AutomorphismDesc> {
    let alpha = 0.5 + uniform(rng).abs() * 2.0;
    let a = uniform_c(rng) + C64::new(1.5, 0.0);
    let t = uniform(rng) * 2.0;
    let id_m = CMat2::identity();
    let zz = z0z0t();
    let pi = psi_c(I);
    let lin = |v: Vec<(CMat2, CMat2)>, w: Vec<(CMat2, CMat2)>| AutomorphismDesc::Linear {
        v_map: v,
        w_map: w,
    };
    let same = |ms: &[CMat2]| ms.iter().map(|m| (*m, *m)).collect::<Vec<_>>();
    let s = spec(id).expect("catalog id");
    let w_id = same(&s.w_basis);
    let v_id = same(&s.v_basis);
    let neg_v: Vec<(CMat2, CMat2)> = s.v_basis.iter().map(|m| (*m, -*m)).collect();
    let conj_psi = |m: &CMat2| pi * *m * pi;
    match id {
        1 | 3 | 10 => vec![lin(v_id, w_id)],
        2 | 7 => vec![lin(vec![(z0(), z0().scale_re(alpha))], w_id)],
        4 | 5 | 6 | 11 | 15 => vec![lin(neg_v, w_id)],
        8 => {
            let (ch, sh) = (t.cosh(), t.sinh());
            let f = |x: f64, y: f64| {
                CMat2::new(
                    C64::from(x),
                    C64::new(0.0, y),
                    C64::new(0.0, -y),
                    C64::from(x),
                )
            };
            let plus = vec![(f(1.0, 0.0), f(ch, sh)), (f(0.0, 1.0), f(sh, ch))];
            let minus = vec![(f(1.0, 0.0), f(ch, -sh)), (f(0.0, 1.0), f(sh, -ch))];
            let neg =
                |v: &Vec<(CMat2, CMat2)>| v.iter().map(|(p, q)| (*p, -*q)).collect::<Vec<_>>();
            vec![
                lin(neg(&plus), w_id.clone()),
                lin(minus.clone(), w_id.clone()),
                lin(plus, w_id.clone()),
                lin(neg(&minus), w_id),
            ]
        }
        9 => {
            let (ct, st) = (t.cos(), t.sin());
            let p = |x: f64, y: f64| CMat2::from_re(x, y, y, -x);
            let rot = vec![(p(1.0, 0.0), p(ct, -st)), (p(0.0, 1.0), p(st, ct))];
            let refl = vec![(p(1.0, 0.0), p(ct, st)), (p(0.0, 1.0), p(st, -ct))];
            vec![lin(rot, w_id.clone()), lin(refl, w_id)]
        }
        12 => vec![lin(vec![], vec![(zz, zz.scale(a))])],
        13 => vec![lin(
            vec![(z0(), z0().scale_re(alpha))],
            vec![(zz, zz.scale(a))],
        )],
        14 => vec![lin(
            vec![],
            s.w_basis.iter().map(|m| (*m, conj_psi(m))).collect(),
        )],
        16 => {
            let w: Vec<(CMat2, CMat2)> = s.w_basis.iter().map(|m| (*m, conj_psi(m))).collect();
            let vp: Vec<(CMat2, CMat2)> = s.v_basis.iter().map(|m| (*m, conj_psi(m))).collect();
            let vn: Vec<(CMat2, CMat2)> = s.v_basis.iter().map(|m| (*m, -conj_psi(m))).collect();
            vec![lin(vp, w.clone()), lin(vn, w)]
        }
        17 => {
            let w: Vec<(CMat2, CMat2)> = s.w_basis.iter().map(|m| (*m, conj_psi(m))).collect();
            let vt: Vec<(CMat2, CMat2)> = s.v_basis.iter().map(|m| (*m, m.transpose())).collect();
            let vnt: Vec<(CMat2, CMat2)> = s.v_basis.iter().map(|m| (*m, -m.transpose())).collect();
            vec![lin(neg_v, w_id), lin(vt, w.clone()), lin(vnt, w)]
        }
        18 => vec![lin(vec![], vec![(id_m, id_m), (zz, zz.scale(a))])],
        19 => vec![
            lin(
                vec![(z0(), z0().scale_re(alpha))],
                vec![(id_m, id_m), (zz, zz.scale(a))],
            ),
            lin(vec![(z0(), z0().scale_re(2.0))], w_id),
        ],
        20 => {
            let w = vec![(id_m, id_m), (zz, zz.scale_re(alpha))];
            let vp = vec![(pi, pi), (z0(), z0().scale_re(alpha))];
            let vn = vec![(pi, -pi), (z0(), z0().scale_re(-alpha))];
            vec![lin(vp, w.clone()), lin(vn, w)]
        }
        21 => {
            let rho = alpha;
            let e = C64::from_polar(1.0, t);
            let w = vec![(id_m, id_m), (zz, zz.scale(e * rho))];
            let mk = |sg: f64| {
                vec![
                    (psi_c(ONE), psi_c(e).scale_re(sg)),
                    (psi_c(I), psi_c(I * e).scale_re(sg)),
                    (z0(), z0().scale_re(sg * rho)),
                ]
            };
            vec![lin(mk(1.0), w.clone()), lin(mk(-1.0), w)]
        }
        22 => {
            let cm = c_plus(uniform_c(rng));
            vec![lin(
                vec![],
                s.w_basis
                    .iter()
                    .map(|m| (*m, cm * *m * cm.transpose()))
                    .collect(),
            )]
        }
        23 => vec![
            AutomorphismDesc::global(c_plus(uniform_c(rng)), 1.0).expect("orthogonal"),
            AutomorphismDesc::global(c_minus(uniform_c(rng)), -1.0).expect("orthogonal"),
        ],
        _ => vec![],
    }
}

/// Worst relative defect of `Φ(K²) = Φ(K)²` for the global map with `C`.
pub fn global_square_defect(c: CMat2, trials: usize, seed: u64) -> f64 {
    let phi = AutomorphismDesc::Global { c, sign: 1.0 };
    let mut rng = rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let k = crate::testutil::random_sym_k(&mut rng);
        let lhs = phi.apply(&k.mul(&k));
        let pk = phi.apply(&k);
        let rhs = pk.mul(&pk);
        worst = worst.max((lhs - rhs).norm() / (1.0 + lhs.norm()));
    }
    worst
}

/// Inversion key `M₀ = K(m, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum InversionKey {
    Zero,
    E1E1,
    E2E2,
    Half,
}

impl InversionKey {
    /// The field-index matrix `m`.
    pub fn m(&self) -> CMat2 {
        let h = C64::from(0.5);
        match self {
            InversionKey::Zero => CMat2::zero(),
            InversionKey::E1E1 => CMat2::diag(h, ZERO),
            InversionKey::E2E2 => CMat2::diag(ZERO, h),
            InversionKey::Half => CMat2::diag(h, h),
        }
    }

    pub fn tensor(&self) -> KTensor {
        KTensor::new(self.m(), CMat2::zero())
    }

    pub fn name(&self) -> &'static str {
        match self {
            InversionKey::Zero => "0",
            InversionKey::E1E1 => "e1e1/2",
            InversionKey::E2E2 => "e2e2/2",
            InversionKey::Half => "I/2",
        }
    }
}

/// `K K(½I − m, 0) K ∈ Π` on random draws.
pub fn check_key(spec: &AlgebraSpec, key: InversionKey, trials: usize, seed: u64) -> Report {
    let mut rng = rng(seed);
    let emb = spec.embed();
    let delta = KTensor::new(CMat2::identity().scale_re(0.5) - key.m(), CMat2::zero());
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let k = spec.random_element(&mut rng);
        let q = k.mul(&delta).mul(&k);
        worst = worst.max(emb.distance(&q.coords()) / (1.0 + q.norm()));
    }
    Report::new(
        spec.id,
        &format!("inversion key {}", key.name()),
        trials,
        worst,
        CHECK_TOL,
    )
}

/// First of `0`, `e₁⊗e₁/2`, `e₂⊗e₂/2` passing [`check_key`], else `I/2`.
pub fn find_inversion_key(spec: &AlgebraSpec, trials: usize, seed: u64) -> InversionKey {
    for key in [InversionKey::Zero, InversionKey::E1E1, InversionKey::E2E2] {
        if check_key(spec, key, trials, seed).pass {
            return key;
        }
    }
    InversionKey::Half
}

/// Keys of the summary table of exact relations.
pub fn table_key(id: i32) -> Option<InversionKey> {
    match id {
        8 | 13 => Some(InversionKey::Zero),
        17 | 20 | 21 | 22 => Some(InversionKey::Half),
        _ => None,
    }
}

/// Link keys `[M₁, M₂]` for an algebra/ideal pair `Π = 𝓘 ⊕ Π'`: `M₂` a key
/// for `Π'`, `M₁` a key for the ideal, and `K'K(M₁ − M₂, 0)K' ∈ 𝓘`.
pub fn check_link_key(
    ideal: &AlgebraSpec,
    parent: &AlgebraSpec,
    complement: &AlgebraSpec,
    keys: [InversionKey; 2],
    trials: usize,
    seed: u64,
) -> Report {
    let mut rng = rng(seed);
    let half = CMat2::identity().scale_re(0.5);
    let d1 = KTensor::new(half - keys[0].m(), CMat2::zero());
    let diff = KTensor::new(keys[0].m() - keys[1].m(), CMat2::zero());
    let ie = ideal.embed();
    let mut worst = check_key(complement, keys[1], trials, seed).max_residual;
    for _ in 0..trials {
        let j = ideal.random_element(&mut rng);
        let k = parent.random_element(&mut rng);
        let q = j.mul(&d1).mul(&k) + k.mul(&d1).mul(&j);
        worst = worst.max(ie.distance(&q.coords()) / (1.0 + q.norm()));
        let kp = complement.random_element(&mut rng);
        let q = kp.mul(&diff).mul(&kp);
        worst = worst.max(ie.distance(&q.coords()) / (1.0 + q.norm()));
    }
    Report::new(
        parent.id,
        &format!("link key ideal {}", ideal.id),
        trials,
        worst,
        CHECK_TOL,
    )
}

/// The essential algebras whose chain properties are verified.
pub const ESSENTIAL: [i32; 7] = [8, 9, 13, 17, 20, 21, 22];

/// (ideal, parent, complement) triples with link keys `[I/2, I/2]`.
pub const LINK_TRIPLES: [(i32, i32, i32); 3] = [(2, 19, 18), (12, 19, 7), (13, 21, 9)];

/// The same entry with `ψ(1)` added to `V`; a negative control that breaks
/// closure for entries not already containing it.
pub fn corrupted(spec: &AlgebraSpec) -> AlgebraSpec {
    let mut s = spec.clone();
    s.v_basis.push(psi_c(ONE));
    s
}

/// Every check over a catalog: closure of each entry, the table claims,
/// chains of the essential algebras, inversion and link keys, and the
/// negative result for the global map `C₊(0.3i)`.
pub fn verify_suite(cat: &[AlgebraSpec], trials: usize, seed: u64) -> Result<Vec<Report>> {
    let get = |id: i32| {
        cat.iter()
            .find(|s| s.id == id)
            .cloned()
            .map_or_else(|| spec(id), Ok)
    };
    let mut out: Vec<Report> = cat.iter().map(|s| check_closure(s, trials, seed)).collect();
    for s in cat {
        if (1..=23).contains(&s.id) {
            out.extend(check_table(s.id, trials, seed)?);
        }
    }
    for id in ESSENTIAL {
        out.push(check_chain(&get(id)?, trials, seed));
    }
    out.push(check_chain_ideal(&get(13)?, &get(21)?, trials, seed));
    for s in cat {
        let key = table_key(s.id).unwrap_or_else(|| find_inversion_key(s, trials, seed));
        out.push(check_key(s, key, trials, seed));
    }
    for (i, p, c) in LINK_TRIPLES {
        out.push(check_link_key(
            &get(i)?,
            &get(p)?,
            &get(c)?,
            [InversionKey::Half; 2],
            trials,
            seed,
        ));
    }
    let d = global_square_defect(c_plus(C64::new(0.0, 0.3)), trials.min(50), seed);
    out.push(Report {
        algebra_id: 0,
        check: "global map C+(0.3i) is not a key".into(),
        trials: trials.min(50),
        max_residual: d,
        pass: d > 1e-3,
    });
    Ok(out)
}
