//! Random draws shared by unit tests, integration tests and the verifiers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor4::{CMat2, KTensor, RMat2, RMat4, C64};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in [−1, 1].
pub fn uniform(rng: &mut TestRng) -> f64 {
    rng.gen_range(-1.0..=1.0)
}

pub fn uniform_c(rng: &mut TestRng) -> C64 {
    C64::new(uniform(rng), uniform(rng))
}

pub fn random_cmat(rng: &mut TestRng) -> CMat2 {
    CMat2::new(
        uniform_c(rng),
        uniform_c(rng),
        uniform_c(rng),
        uniform_c(rng),
    )
}

pub fn random_rmat(rng: &mut TestRng) -> RMat2 {
    RMat2::new(uniform(rng), uniform(rng), uniform(rng), uniform(rng))
}

pub fn random_hermitian(rng: &mut TestRng) -> CMat2 {
    random_cmat(rng).herm_part()
}

pub fn random_csym(rng: &mut TestRng) -> CMat2 {
    random_cmat(rng).sym_part()
}

pub fn random_sym_k(rng: &mut TestRng) -> KTensor {
    KTensor::new(random_hermitian(rng), random_csym(rng))
}

/// Symmetric positive definite 2×2 with eigenvalues in [lo, hi].
pub fn random_spd2(rng: &mut TestRng, lo: f64, hi: f64) -> RMat2 {
    let a = rng.gen_range(lo..=hi);
    let b = rng.gen_range(lo..=hi);
    let q = crate::tensor4::rot(rng.gen_range(0.0..std::f64::consts::PI));
    q * RMat2::new(a, 0.0, 0.0, b) * q.transpose()
}

/// Random PD 4×4 of the form `Aᵀ A + c I`.
pub fn random_spd4(rng: &mut TestRng) -> RMat4 {
    let mut a = RMat4::zeros();
    for v in a.iter_mut() {
        *v = uniform(rng);
    }
    a.transpose() * a + RMat4::identity() * 0.3
}

pub fn random_pd_k(rng: &mut TestRng) -> KTensor {
    KTensor::from_mat4(&random_spd4(rng))
}

pub fn unit_vector(rng: &mut TestRng) -> [f64; 2] {
    let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    [t.cos(), t.sin()]
}

pub fn random_micro(rng: &mut TestRng) -> crate::laminate::Micro {
    use crate::laminate::Micro;
    let f = rng.gen_range(0.15..0.85);
    if rng.gen_bool(0.5) {
        Micro::rank_one(f, unit_vector(rng))
    } else {
        Micro::rank_two(
            f,
            unit_vector(rng),
            rng.gen_range(0.15..0.85),
            unit_vector(rng),
        )
    }
}

/// A random isotropic pair falling in the requested case.
pub fn random_pair(
    case: crate::twophase::Case,
    rng: &mut TestRng,
) -> crate::twophase::IsoPhasePair {
    use crate::twophase::{classify, Case, IsoPhasePair};
    let generic = |rng: &mut TestRng| loop {
        let (a, b) = (random_spd2(rng, 0.4, 3.0), random_spd2(rng, 0.4, 3.0));
        let ab = a.try_inverse().unwrap() * b;
        let (t, d) = (ab.trace(), ab.determinant());
        // generalized eigenvalues well separated
        if t * t - 4.0 * d > 0.05 * t * t {
            return (a, b);
        }
    };
    for _ in 0..10_000 {
        let (s1, s2) = match case {
            Case::C2a | Case::C2b | Case::C2c => {
                let s1 = random_spd2(rng, 0.4, 3.0);
                let th: f64 = rng.gen_range(0.2..5.0);
                (s1, s1 * th)
            }
            Case::C1cii => {
                let (a, b) = generic(rng);
                (a, b * (a.determinant() / b.determinant()).sqrt())
            }
            Case::C1aii => {
                let a = random_spd2(rng, 0.4, 3.0);
                let s = crate::tensor4::sqrtm2(&a).unwrap();
                let l1: f64 = rng.gen_range(0.3..3.0);
                let rho = 0.8 * uniform(rng) * (l1 - 1.0).abs().sqrt();
                let l2 = rho * rho / (l1 - 1.0) + 1.0;
                let q = crate::tensor4::rot(rng.gen_range(0.0..std::f64::consts::PI));
                let b = s * q * RMat2::new(l1, 0.0, 0.0, l2) * q.transpose() * s;
                let r1 = 0.3 * uniform(rng) * a.determinant().sqrt();
                let r2 = r1 + rho * s.determinant();
                match IsoPhasePair::new(a, r1, b, r2) {
                    Ok(p) if l2 > 0.0 && matches!(classify(&p), Ok(t) if t.case == case) => {
                        return p
                    }
                    _ => continue,
                }
            }
            _ => generic(rng),
        };
        let (q1, q2) = (s1.determinant().sqrt(), s2.determinant().sqrt());
        let r1 = 0.5 * uniform(rng) * q1;
        let r2 = match case {
            Case::C1ai | Case::C2a => r1 + 0.9 * uniform(rng) * (q1 - q2).abs(),
            Case::C1b | Case::C2b => 0.95 * uniform(rng) * q2,
            Case::C1ci | Case::C2c => r1 + if rng.gen_bool(0.5) { q1 - q2 } else { q2 - q1 },
            _ => r1,
        };
        // symmetrize the stored matrices exactly
        let sym = |m: RMat2| (m + m.transpose()) * 0.5;
        if let Ok(p) = IsoPhasePair::new(sym(s1), r1, sym(s2), r2) {
            if p.r2().powi(2) < 0.95 * s2.determinant()
                && matches!(classify(&p), Ok(t) if t.case == case)
            {
                return p;
            }
        }
    }
    panic!("no sample found for case {case:?}");
}
