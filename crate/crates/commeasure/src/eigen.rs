//! Cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! Each rotation annihilates one off-diagonal pair with a complex Givens
//! rotation; sweeps repeat until the off-diagonal Frobenius mass drops
//! below `tol::JACOBI_REL` times the Frobenius norm of the input. The
//! sweep cap is a hard error: callers must never see a silently
//! unconverged decomposition.

use crate::mat::{phase_normalize, CMat, HermEigen, C64};
use crate::{tol, Error, Result};

pub fn herm_eigen(a: &CMat) -> Result<HermEigen> {
    let n = a.dim();
    if !a.is_hermitian(tol::STRUCT) {
        return Err(Error::NotHermitian(format!(
            "Hermitian defect {:.3e} exceeds tolerance",
            a.herm_defect()
        )));
    }
    // Work on the symmetrized copy so representation drift cannot feed
    // the iteration.
    let mut w = a.add(&a.adjoint()).expect("same dim").scale(C64::new(0.5, 0.0));
    let mut v = CMat::identity(n);
    let target = tol::JACOBI_REL * a.frobenius_norm();

    let mut sweeps = 0;
    while off_diagonal_mass(&w) > target {
        if sweeps >= tol::JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(format!(
                "Jacobi exceeded {} sweeps; off-diagonal mass {:.3e} above target {:.3e}",
                tol::JACOBI_MAX_SWEEPS,
                off_diagonal_mass(&w),
                target
            )));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    // Sort descending; ties keep the lower original index first so the
    // output is deterministic.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        w.at(j, j)
            .re
            .partial_cmp(&w.at(i, i).re)
            .expect("finite eigenvalues")
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| w.at(i, i).re).collect();
    let mut vectors = CMat::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        let mut column: Vec<C64> = (0..n).map(|r| v.at(r, src)).collect();
        phase_normalize(&mut column, 1e-12);
        for (r, &z) in column.iter().enumerate() {
            vectors.set(r, col, z);
        }
    }
    Ok(HermEigen { values, vectors })
}

fn off_diagonal_mass(w: &CMat) -> f64 {
    let n = w.dim();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += w.at(i, j).norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// One complex Jacobi rotation zeroing w[p][q] (and its mirror),
/// accumulating the similarity into v.
fn rotate(w: &mut CMat, v: &mut CMat, p: usize, q: usize) {
    let apq = w.at(p, q);
    let beta = apq.norm();
    if beta == 0.0 {
        return;
    }
    let phase = apq / beta; // e^{i phi}
    let app = w.at(p, p).re;
    let aqq = w.at(q, q).re;
    // tan(theta) solves t^2 - 2 tau t - 1 = 0; the smaller root keeps
    // the rotation angle below pi/4 for stability.
    let tau = (aqq - app) / (2.0 * beta);
    let t = if tau >= 0.0 {
        -1.0 / (tau + (tau * tau + 1.0).sqrt())
    } else {
        1.0 / (-tau + (tau * tau + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let n = w.dim();
    // Columns p and q of W transform like W * R; rows follow by symmetry.
    let cs = C64::new(c, 0.0);
    let s_conj_phase = phase.conj() * s;
    let s_phase = phase * s;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let wkp = w.at(k, p);
        let wkq = w.at(k, q);
        let new_p = cs * wkp + s_conj_phase * wkq;
        let new_q = -s_phase * wkp + cs * wkq;
        w.set(k, p, new_p);
        w.set(k, q, new_q);
        w.set(p, k, new_p.conj());
        w.set(q, k, new_q.conj());
    }
    let new_pp = app * c * c + 2.0 * beta * s * c + aqq * s * s;
    let new_qq = app * s * s - 2.0 * beta * s * c + aqq * c * c;
    w.set(p, p, C64::new(new_pp, 0.0));
    w.set(q, q, C64::new(new_qq, 0.0));
    w.set(p, q, C64::new(0.0, 0.0));
    w.set(q, p, C64::new(0.0, 0.0));

    for k in 0..n {
        let vkp = v.at(k, p);
        let vkq = v.at(k, q);
        v.set(k, p, cs * vkp + s_conj_phase * vkq);
        v.set(k, q, -s_phase * vkp + cs * vkq);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::testmat::*;
    use crate::mat::inner;

    fn check_decomposition(a: &CMat) {
        let eig = herm_eigen(a).unwrap();
        let n = a.dim();
        // Eigenvalues descending.
        for k in 1..n {
            assert!(eig.values[k - 1] >= eig.values[k] - 1e-12);
        }
        // V unitary.
        assert!(eig.vectors.is_unitary(1e-12));
        // A V = V diag(values).
        let lambda = CMat::diag(
            &eig.values.iter().map(|&l| r(l)).collect::<Vec<_>>(),
        );
        let av = a.matmul(&eig.vectors).unwrap();
        let vl = eig.vectors.matmul(&lambda).unwrap();
        let resid = av.sub(&vl).unwrap().frobenius_norm();
        assert!(
            resid < 1e-12 * a.frobenius_norm().max(1.0),
            "residual {resid}"
        );
    }

    #[test]
    fn pauli_x_eigenvalues_are_plus_minus_one() {
        let eig = herm_eigen(&pauli_x()).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] + 1.0).abs() < 1e-14);
        // Eigenvector for +1 is (1,1)/sqrt2 up to phase; the phase
        // convention makes the first entry real positive.
        let v0 = eig.vector(0);
        assert!((v0[0].re - 0.5f64.sqrt()).abs() < 1e-14);
        assert!(v0[0].im.abs() < 1e-15);
        check_decomposition(&pauli_x());
    }

    #[test]
    fn diagonal_input_returns_sorted_diagonal_exactly() {
        let a = CMat::diag(&[r(-0.5), r(2.0), r(1.0)]);
        let eig = herm_eigen(&a).unwrap();
        assert_eq!(eig.values, vec![2.0, 1.0, -0.5]);
    }

    #[test]
    fn complex_hermitian_3x3_decomposes() {
        let a = CMat::from_rows(&[
            vec![r(1.0), c(0.2, 0.5), c(-0.3, 0.1)],
            vec![c(0.2, -0.5), r(-2.0), c(0.0, 0.9)],
            vec![c(-0.3, -0.1), c(0.0, -0.9), r(0.7)],
        ])
        .unwrap();
        check_decomposition(&a);
        // Trace equals eigenvalue sum.
        let eig = herm_eigen(&a).unwrap();
        let sum: f64 = eig.values.iter().sum();
        assert!((sum - a.trace().re).abs() < 1e-12);
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let a = CMat::from_rows(&[
            vec![r(0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), r(0.0)],
        ])
        .unwrap();
        let eig = herm_eigen(&a).unwrap();
        let v0 = eig.vector(0);
        let v1 = eig.vector(1);
        assert!(inner(&v0, &v1).norm() < 1e-14);
        assert!((crate::mat::norm2(&v0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let m = CMat::from_rows(&[vec![r(0.0), r(1.0)], vec![r(0.0), r(0.0)]]).unwrap();
        assert!(matches!(herm_eigen(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn zero_matrix_converges_immediately() {
        let eig = herm_eigen(&CMat::zeros(4)).unwrap();
        assert_eq!(eig.values, vec![0.0; 4]);
        assert!(eig.vectors.is_unitary(1e-14));
    }
}
