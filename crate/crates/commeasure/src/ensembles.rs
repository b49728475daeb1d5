//! Seeded random ensembles and Bloch sphere helpers.
//!
//! Every generator is driven by an explicit ChaCha8 stream, so identical
//! seeds give identical matrices on any platform and any thread count.
//! Parallel callers split work into numbered tasks and give each task
//! its own stream through [`derive_seed`].

use crate::mat::{norm2, CMat, UnitVec, C64};
use crate::measures::{Density, Projection};
use crate::{tol, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Multiplier spacing task indices apart in the seed mix.
pub const SEED_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const SEED_OFFSET: u64 = 0x6A09_E667_F3BC_C909;
const SEED_MIX_A: u64 = 0xBF58_476D_1CE4_E5B9;
const SEED_MIX_B: u64 = 0x94D0_49BB_1331_11EB;

/// Seed for a numbered subtask of a master seed.
///
/// The exact function, fixed as part of the reproducibility contract:
///
/// ```text
/// z = master XOR (task * 0x9E3779B97F4A7C15 + 0x6A09E667F3BCC909)
/// z = (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9
/// z = (z XOR (z >> 27)) * 0x94D049BB133111EB
/// seed = z XOR (z >> 31)
/// ```
///
/// with all arithmetic modulo 2^64.
pub fn derive_seed(master: u64, task: u64) -> u64 {
    let mut z = master ^ task.wrapping_mul(SEED_GAMMA).wrapping_add(SEED_OFFSET);
    z = (z ^ (z >> 30)).wrapping_mul(SEED_MIX_A);
    z = (z ^ (z >> 27)).wrapping_mul(SEED_MIX_B);
    z ^ (z >> 31)
}

/// ChaCha8 generator for a numbered subtask.
pub fn task_rng(master: u64, task: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, task))
}

/// Standard complex Gaussian: (N(0,1) + i N(0,1)) / sqrt(2).
pub fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with independent standard complex Gaussian entries.
pub fn ginibre(n: usize, rng: &mut impl Rng) -> CMat {
    let mut m = CMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, complex_gaussian(rng));
        }
    }
    m
}

/// Haar-distributed unitary: QR of a Ginibre matrix with each Q column
/// rescaled so the matching R diagonal entry is real positive.
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(n, rng);
    let (mut q, r) = qr_decompose(&g);
    for j in 0..n {
        let d = r.at(j, j);
        let mag = d.norm();
        let phase = if mag > 1e-300 { d / mag } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            let v = q.at(i, j) * phase;
            q.set(i, j, v);
        }
    }
    q
}

/// Householder QR, returning (Q, R) with Q unitary and R upper
/// triangular.
fn qr_decompose(a: &CMat) -> (CMat, CMat) {
    let n = a.dim();
    let mut r = a.clone();
    let mut q = CMat::identity(n);
    for k in 0..n {
        let mut v: Vec<C64> = (k..n).map(|i| r.at(i, k)).collect();
        let normx = norm2(&v);
        if normx < 1e-300 {
            continue;
        }
        let phase = if v[0].norm() > 1e-300 {
            v[0] / v[0].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        // Reflect x onto -phase * |x| e1; adding phase*|x| to the first
        // coordinate keeps the reflector well conditioned.
        v[0] += phase * normx;
        let vn = norm2(&v);
        if vn < 1e-300 {
            continue;
        }
        for e in v.iter_mut() {
            *e /= vn;
        }
        // R <- (I - 2 v v*) R on the trailing block.
        for j in k..n {
            let dot: C64 = (k..n).map(|i| v[i - k].conj() * r.at(i, j)).sum();
            let f = dot * 2.0;
            for i in k..n {
                let val = r.at(i, j) - v[i - k] * f;
                r.set(i, j, val);
            }
        }
        // Q <- Q (I - 2 v v*).
        for i in 0..n {
            let dot: C64 = (k..n).map(|j| q.at(i, j) * v[j - k]).sum();
            let f = dot * 2.0;
            for j in k..n {
                let val = q.at(i, j) - f * v[j - k].conj();
                q.set(i, j, val);
            }
        }
    }
    (q, r)
}

/// Unit vector with Haar-distributed direction.
pub fn random_unit_vector(n: usize, rng: &mut impl Rng) -> UnitVec {
    loop {
        let coords: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        if norm2(&coords) > 1e-6 {
            return UnitVec::normalized(coords).expect("norm checked above");
        }
    }
}

/// Rank-one projection onto a Haar-distributed direction.
pub fn random_projection(n: usize, rng: &mut impl Rng) -> Projection {
    Projection::from_unit_vector(&random_unit_vector(n, rng))
}

/// Density operator G G* / tr(G G*) for Ginibre G.
pub fn random_density(n: usize, rng: &mut impl Rng) -> Density {
    loop {
        let g = ginibre(n, rng);
        let gram = g.matmul(&g.adjoint()).expect("square");
        let tr = gram.trace().re;
        if tr > 1e-9 {
            let m = gram.scale(C64::new(1.0 / tr, 0.0));
            return Density::new(m).expect("normalized Gram matrix");
        }
    }
}

/// Hermitian matrix (G + G*) / 2 for Ginibre G.
pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(n, rng);
    g.add(&g.adjoint()).expect("square").scale(C64::new(0.5, 0.0))
}

/// sigma_x = (0 1; 1 0).
pub fn pauli_x() -> CMat {
    CMat::from_fn(2, |i, j| C64::new(if i != j { 1.0 } else { 0.0 }, 0.0))
}

/// sigma_y = (0 -i; i 0).
pub fn pauli_y() -> CMat {
    let mut m = CMat::zeros(2);
    m.set(0, 1, C64::new(0.0, -1.0));
    m.set(1, 0, C64::new(0.0, 1.0));
    m
}

/// sigma_z = (1 0; 0 -1).
pub fn pauli_z() -> CMat {
    CMat::diag(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)])
}

/// Projection with the given Bloch vector: (I + n . sigma) / 2.
/// The vector must be unit length within 1e-10.
pub fn projection_from_bloch(n: [f64; 3]) -> Result<Projection> {
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if (len - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "Bloch vector length {len} must be 1 for a rank-one projection"
        )));
    }
    let mut m = CMat::zeros(2);
    m.set(0, 0, C64::new((1.0 + n[2]) / 2.0, 0.0));
    m.set(1, 1, C64::new((1.0 - n[2]) / 2.0, 0.0));
    m.set(0, 1, C64::new(n[0] / 2.0, -n[1] / 2.0));
    m.set(1, 0, C64::new(n[0] / 2.0, n[1] / 2.0));
    Projection::new(m)
}

/// Bloch vector (x, y, z) of a 2x2 rank-one projection.
pub fn bloch_from_projection(p: &Projection) -> Result<[f64; 3]> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "Bloch coordinates need dimension 2, got {}",
            p.dim()
        )));
    }
    let m = p.matrix();
    Ok([
        2.0 * m.at(0, 1).re,
        -2.0 * m.at(0, 1).im,
        m.at(0, 0).re - m.at(1, 1).re,
    ])
}

/// Projection onto (cos t, lambda sin t) for t in [0, pi/2] and
/// unimodular lambda.
pub fn bloch_projection(t: f64, lambda: C64) -> Result<Projection> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&t) {
        return Err(Error::InvalidInput(format!(
            "angle {t} outside [0, pi/2]"
        )));
    }
    if (lambda.norm() - 1.0).abs() > tol::ABS {
        return Err(Error::InvalidInput(format!(
            "lambda must be unimodular, |lambda| = {}",
            lambda.norm()
        )));
    }
    let x = UnitVec::new(vec![C64::new(t.cos(), 0.0), lambda * t.sin()])?;
    Ok(Projection::from_unit_vector(&x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::overlap;

    #[test]
    fn derived_seeds_separate_tasks_and_are_stable() {
        let s0 = derive_seed(42, 0);
        let s1 = derive_seed(42, 1);
        let s2 = derive_seed(43, 0);
        assert!(s0 != s1 && s0 != s2 && s1 != s2);
        // Same inputs, same seed, always.
        assert_eq!(s0, derive_seed(42, 0));
    }

    #[test]
    fn task_rng_streams_are_reproducible() {
        let a: Vec<u64> = {
            let mut rng = task_rng(7, 3);
            (0..4).map(|_| rng.random()).collect()
        };
        let b: Vec<u64> = {
            let mut rng = task_rng(7, 3);
            (0..4).map(|_| rng.random()).collect()
        };
        assert_eq!(a, b);
        let c: Vec<u64> = {
            let mut rng = task_rng(7, 4);
            (0..4).map(|_| rng.random()).collect()
        };
        assert_ne!(a, c);
    }

    #[test]
    fn haar_unitaries_are_unitary_and_deterministic() {
        for n in 1..=6 {
            let u = haar_unitary(n, &mut task_rng(11, n as u64));
            assert!(
                u.unitary_defect() < 1e-12,
                "n={n} defect {}",
                u.unitary_defect()
            );
        }
        let a = haar_unitary(4, &mut task_rng(5, 0));
        let b = haar_unitary(4, &mut task_rng(5, 0));
        assert_eq!(a, b);
    }

    #[test]
    fn haar_top_left_magnitude_averages_one_half_in_dim_two() {
        // Monte Carlo oracle: E |U_00|^2 = 1/n for Haar; n = 2.
        let mut rng = task_rng(7, 0);
        let trials = 10_000;
        let mean: f64 = (0..trials)
            .map(|_| haar_unitary(2, &mut rng).at(0, 0).norm_sqr())
            .sum::<f64>()
            / trials as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn random_structured_matrices_satisfy_their_invariants() {
        let mut rng = task_rng(3, 1);
        for n in 2..=6 {
            let p = random_projection(n, &mut rng);
            assert_eq!(p.dim(), n);
            let d = random_density(n, &mut rng);
            assert_eq!(d.dim(), n);
            let h = random_hermitian(n, &mut rng);
            assert!(h.is_hermitian(1e-12));
        }
    }

    #[test]
    fn pauli_products_and_bloch_conventions_agree() {
        // sx sy = i sz fixes the orientation of the basis.
        let prod = pauli_x().matmul(&pauli_y()).unwrap();
        let expect = pauli_z().scale(C64::new(0.0, 1.0));
        assert!(prod.sub(&expect).unwrap().frobenius_norm() < 1e-15);

        // Poles and equator anchors.
        let north = projection_from_bloch([0.0, 0.0, 1.0]).unwrap();
        assert!((north.matrix().at(0, 0).re - 1.0).abs() < 1e-15);
        let px = projection_from_bloch([1.0, 0.0, 0.0]).unwrap();
        assert!((px.matrix().at(0, 1).re - 0.5).abs() < 1e-15);
        let py = projection_from_bloch([0.0, 1.0, 0.0]).unwrap();
        assert!((py.matrix().at(0, 1).im + 0.5).abs() < 1e-15);
    }

    #[test]
    fn bloch_round_trip_on_random_projections() {
        let mut rng = task_rng(19, 0);
        for _ in 0..50 {
            let p = random_projection(2, &mut rng);
            let n = bloch_from_projection(&p).unwrap();
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            assert!((len - 1.0).abs() < 1e-10);
            let q = projection_from_bloch(n).unwrap();
            assert!(p.matrix().sub(q.matrix()).unwrap().frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn overlap_equals_half_one_plus_bloch_dot() {
        let mut rng = task_rng(23, 0);
        for _ in 0..50 {
            let p = random_projection(2, &mut rng);
            let q = random_projection(2, &mut rng);
            let np = bloch_from_projection(&p).unwrap();
            let nq = bloch_from_projection(&q).unwrap();
            let dot = np[0] * nq[0] + np[1] * nq[1] + np[2] * nq[2];
            let t = overlap(&p, &q).unwrap();
            assert!((t - (1.0 + dot) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bloch_projection_respects_parameter_domains() {
        assert!(bloch_projection(-0.1, C64::new(1.0, 0.0)).is_err());
        assert!(bloch_projection(2.0, C64::new(1.0, 0.0)).is_err());
        assert!(bloch_projection(0.5, C64::new(0.9, 0.0)).is_err());
        let p = bloch_projection(0.0, C64::new(1.0, 0.0)).unwrap();
        assert!((p.matrix().at(0, 0).re - 1.0).abs() < 1e-15);
        // nz = cos 2t on the circle lambda = 1.
        let t = 0.4;
        let p = bloch_projection(t, C64::new(1.0, 0.0)).unwrap();
        let n = bloch_from_projection(&p).unwrap();
        assert!((n[2] - (2.0 * t).cos()).abs() < 1e-12);
        assert!((n[0] - (2.0 * t).sin()).abs() < 1e-12);
        assert!(n[1].abs() < 1e-15);
    }

    #[test]
    fn projection_from_bloch_rejects_non_unit_vectors() {
        assert!(projection_from_bloch([0.5, 0.0, 0.0]).is_err());
    }
}
