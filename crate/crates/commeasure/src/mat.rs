//! Dense complex matrices sized for operator calculations.
//!
//! Everything here targets the small dimensions the toolkit works at
//! (n <= 16): row-major `Vec` storage, straightforward O(n^3) kernels,
//! exact cofactor determinants for n <= 3 and partially pivoted LU above
//! that. The Hermitian eigensolver and singular values live in a sibling
//! module and are re-exported through [`CMat`] methods.

use crate::{Error, Result};

pub type C64 = num_complex::Complex<f64>;

/// Dense n x n complex matrix, row-major.
///
/// Invariants: the entry buffer is exactly n*n and every entry is finite.
/// Constructors enforce both; arithmetic preserves them for the unit-scale
/// inputs the toolkit deals in.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<C64>,
}

impl CMat {
    /// Zero matrix of size n x n.
    pub fn zeros(n: usize) -> Self {
        CMat { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    /// Identity matrix of size n x n.
    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    /// Diagonal matrix from the given entries.
    pub fn diag(entries: &[C64]) -> Self {
        let mut m = CMat::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    /// Builds from nested rows; every row must have the same length as
    /// the row count and all entries must be finite.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("matrix must be at least 1x1".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        let m = CMat { n, data };
        m.check_finite()?;
        Ok(m)
    }

    /// Builds entrywise from a function of (row, col).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Rank-one matrix u v*.
    pub fn rank_one(u: &[C64], v: &[C64]) -> Result<Self> {
        if u.len() != v.len() || u.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "rank_one needs equal nonzero lengths, got {} and {}",
                u.len(),
                v.len()
            )));
        }
        Ok(CMat::from_fn(u.len(), |i, j| u[i] * v[j].conj()))
    }

    fn check_finite(&self) -> Result<()> {
        for (k, z) in self.data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite entry at ({}, {})",
                    k / self.n,
                    k % self.n
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add(&self, other: &CMat) -> Result<CMat> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMat) -> Result<CMat> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &CMat, f: impl Fn(C64, C64) -> C64) -> Result<CMat> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.n, self.n, other.n, other.n
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(CMat { n: self.n, data })
    }

    pub fn scale(&self, z: C64) -> CMat {
        CMat { n: self.n, data: self.data.iter().map(|&a| a * z).collect() }
    }

    pub fn matmul(&self, other: &CMat) -> Result<CMat> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.n, self.n, other.n, other.n
            )));
        }
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = out.at(i, j) + a * other.at(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {0}x{0}, vector has {1} entries",
                self.n,
                x.len()
            )));
        }
        Ok((0..self.n)
            .map(|i| (0..self.n).map(|j| self.at(i, j) * x[j]).sum())
            .collect())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| self.at(j, i).conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| self.at(j, i))
    }

    /// Entrywise complex conjugate.
    pub fn entrywise_conj(&self) -> CMat {
        CMat { n: self.n, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.at(i, i)).sum()
    }

    /// Commutator AB - BA.
    pub fn commutator(&self, other: &CMat) -> Result<CMat> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance to the conjugate transpose; zero iff Hermitian.
    pub fn herm_defect(&self) -> f64 {
        self.sub(&self.adjoint()).expect("same dim").frobenius_norm()
    }

    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        self.herm_defect() <= tolerance * self.n_scale()
    }

    /// Frobenius distance of A*A from the identity; zero iff unitary.
    pub fn unitary_defect(&self) -> f64 {
        self.adjoint()
            .matmul(self)
            .expect("same dim")
            .sub(&CMat::identity(self.n))
            .expect("same dim")
            .frobenius_norm()
    }

    pub fn is_unitary(&self, tolerance: f64) -> bool {
        self.unitary_defect() <= tolerance * self.n_scale()
    }

    /// Scale factor for relative structural checks: matrices near zero
    /// are compared absolutely.
    fn n_scale(&self) -> f64 {
        self.frobenius_norm().max(1.0)
    }

    /// Determinant: exact cofactor expansion for n <= 3, partially
    /// pivoted LU above that.
    pub fn det(&self) -> C64 {
        match self.n {
            1 => self.at(0, 0),
            2 => self.at(0, 0) * self.at(1, 1) - self.at(0, 1) * self.at(1, 0),
            3 => {
                let a = |i: usize, j: usize| self.at(i, j);
                a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
                    - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                    + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
            }
            _ => self.det_lu(),
        }
    }

    fn det_lu(&self) -> C64 {
        let n = self.n;
        let mut a = self.data.clone();
        let idx = |i: usize, j: usize| i * n + j;
        let mut det = C64::new(1.0, 0.0);
        for col in 0..n {
            // Partial pivoting: largest magnitude in the column.
            let mut pivot = col;
            let mut best = a[idx(col, col)].norm();
            for r in (col + 1)..n {
                let mag = a[idx(r, col)].norm();
                if mag > best {
                    best = mag;
                    pivot = r;
                }
            }
            if best == 0.0 {
                return C64::new(0.0, 0.0);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(idx(col, j), idx(pivot, j));
                }
                det = -det;
            }
            let d = a[idx(col, col)];
            det *= d;
            for r in (col + 1)..n {
                let factor = a[idx(r, col)] / d;
                if factor.norm_sqr() == 0.0 {
                    continue;
                }
                for j in col..n {
                    let v = a[idx(r, j)] - factor * a[idx(col, j)];
                    a[idx(r, j)] = v;
                }
            }
        }
        det
    }

    /// Eigendecomposition of a Hermitian matrix; eigenvalues descending.
    /// See [`crate::mat::HermEigen`].
    pub fn herm_eigen(&self) -> Result<HermEigen> {
        crate::eigen::herm_eigen(self)
    }

    /// Singular values, descending, accurate to machine epsilon times
    /// the largest singular value even for vanishing ones.
    ///
    /// 2x2 inputs use the closed form with the small value recovered
    /// as |det| / sigma_max, which stays fully accurate where the
    /// subtraction inside the radical cancels. Larger inputs
    /// diagonalize the Hermitian dilation [[0, A], [A*, 0]], whose
    /// spectrum is the singular values in plus/minus pairs; the
    /// Gram-matrix route would lose half the digits of any singular
    /// value near zero to the square root.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        if n == 1 {
            return Ok(vec![self.at(0, 0).norm()]);
        }
        if n == 2 {
            // Top Gram eigenvalue from the 2x2 closed form. Written on
            // the Gram entries the discriminant is a sum of squares, so
            // it never cancels; recovering the small value from the
            // determinant then keeps its full relative accuracy.
            let gram = self.adjoint().matmul(self)?;
            let (a, c) = (gram.at(0, 0).re, gram.at(1, 1).re);
            let half_diff = (a - c) / 2.0;
            let disc = (half_diff * half_diff + gram.at(0, 1).norm_sqr()).sqrt();
            let hi = (((a + c) / 2.0 + disc).max(0.0)).sqrt();
            let lo = if hi > 0.0 { self.det().norm() / hi } else { 0.0 };
            return Ok(vec![hi, lo]);
        }
        let zero = C64::new(0.0, 0.0);
        let h = CMat::from_fn(2 * n, |i, j| {
            if i < n && j >= n {
                self.at(i, j - n)
            } else if i >= n && j < n {
                self.at(j, i - n).conj()
            } else {
                zero
            }
        });
        let eig = crate::eigen::herm_eigen(&h)?;
        Ok(eig.values[..n].iter().map(|&l| l.max(0.0)).collect())
    }
}

/// Result of a Hermitian eigendecomposition: A = V diag(values) V*.
///
/// `values` are real and sorted descending; `vectors` holds the
/// corresponding orthonormal eigenvectors as columns, each column's
/// first nonzero entry normalized to be real positive.
#[derive(Clone, Debug)]
pub struct HermEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermEigen {
    /// Column `j` of the eigenvector matrix.
    pub fn vector(&self, j: usize) -> Vec<C64> {
        (0..self.vectors.dim()).map(|i| self.vectors.at(i, j)).collect()
    }
}

/// Unit vector in C^n, checked to have norm 1 within 1e-12.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVec {
    coords: Vec<C64>,
}

impl UnitVec {
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("unit vector must be nonempty".into()));
        }
        for (i, z) in coords.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coordinate {i}")));
            }
        }
        let norm = norm2(&coords);
        if (norm - 1.0).abs() > crate::tol::ABS {
            return Err(Error::InvalidInput(format!(
                "vector norm is {norm}, expected 1 within {}",
                crate::tol::ABS
            )));
        }
        Ok(UnitVec { coords })
    }

    /// Rescales arbitrary nonzero coordinates to unit norm.
    pub fn normalized(coords: Vec<C64>) -> Result<Self> {
        let norm = norm2(&coords);
        if norm < 1e-300 || !norm.is_finite() {
            return Err(Error::InvalidInput(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        let inv = 1.0 / norm;
        UnitVec::new(coords.into_iter().map(|z| z * inv).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    /// Rank-one projection x x* onto the span of this vector.
    pub fn projector(&self) -> CMat {
        CMat::rank_one(&self.coords, &self.coords).expect("equal lengths")
    }
}

/// Euclidean norm of a complex vector.
pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Inner product <x, y> = sum x_k conj(y_k), linear in the first slot.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// Multiplies a vector by the phase making its first entry of magnitude
/// above `floor` real positive. Identity for the zero vector.
pub fn phase_normalize(v: &mut [C64], floor: f64) {
    if let Some(z) = v.iter().find(|z| z.norm() > floor) {
        let phase = z.conj() / z.norm();
        for e in v.iter_mut() {
            *e *= phase;
        }
    }
}

#[cfg(test)]
pub(crate) mod testmat {
    use super::*;

    pub fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    pub fn r(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// sigma_x = (0 1; 1 0)
    pub fn pauli_x() -> CMat {
        CMat::from_rows(&[vec![r(0.0), r(1.0)], vec![r(1.0), r(0.0)]]).unwrap()
    }

    /// sigma_y = (0 -i; i 0)
    pub fn pauli_y() -> CMat {
        CMat::from_rows(&[vec![r(0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), r(0.0)]]).unwrap()
    }

    /// sigma_z = (1 0; 0 -1)
    pub fn pauli_z() -> CMat {
        CMat::diag(&[r(1.0), r(-1.0)])
    }
}

#[cfg(test)]
mod tests {
    use super::testmat::*;
    use super::*;

    #[test]
    fn commutator_of_pauli_x_and_y() {
        let comm = pauli_x().commutator(&pauli_y()).unwrap();
        let expected = CMat::diag(&[c(0.0, 2.0), c(0.0, -2.0)]);
        assert!(comm.sub(&expected).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn determinant_anchor_four() {
        // det of the commutator of (0 1; 1 0) with (0 i; -i 0).
        let b = CMat::from_rows(&[vec![r(0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), r(0.0)]]).unwrap();
        let d = pauli_x().commutator(&b).unwrap().det();
        assert!((d.re - 4.0).abs() < 1e-12 && d.im.abs() < 1e-12);
    }

    #[test]
    fn determinant_anchor_five() {
        // det of the commutator of (1 1; 1 0) with (0 i; -i 0).
        let a = CMat::from_rows(&[vec![r(1.0), r(1.0)], vec![r(1.0), r(0.0)]]).unwrap();
        let b = CMat::from_rows(&[vec![r(0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), r(0.0)]]).unwrap();
        let d = a.commutator(&b).unwrap().det();
        assert!((d.re - 5.0).abs() < 1e-12 && d.im.abs() < 1e-12);
    }

    #[test]
    fn commutator_of_hermitians_is_skew_hermitian() {
        // [A,B]* = -[A,B] for Hermitian A, B.
        let a = CMat::from_rows(&[
            vec![r(0.3), c(0.1, -0.7)],
            vec![c(0.1, 0.7), r(-1.2)],
        ])
        .unwrap();
        let b = CMat::from_rows(&[
            vec![r(2.0), c(-0.4, 0.2)],
            vec![c(-0.4, -0.2), r(0.9)],
        ])
        .unwrap();
        let comm = a.commutator(&b).unwrap();
        let defect = comm.adjoint().add(&comm).unwrap().frobenius_norm();
        assert!(defect < 1e-14);
    }

    #[test]
    fn lu_det_matches_cofactor_on_3x3_and_handles_4x4() {
        let m = CMat::from_rows(&[
            vec![r(1.0), c(2.0, 1.0), r(0.0)],
            vec![r(-1.0), r(3.0), c(0.0, 2.0)],
            vec![c(0.5, -0.5), r(0.0), r(2.0)],
        ])
        .unwrap();
        let cofactor = m.det();
        let lu = m.det_lu();
        assert!((cofactor - lu).norm() < 1e-12);

        // det of a diagonal 4x4 exercises the LU path directly.
        let d = CMat::diag(&[r(2.0), c(0.0, 1.0), r(-3.0), c(1.0, 1.0)]);
        let expected = c(0.0, 1.0) * r(2.0) * r(-3.0) * c(1.0, 1.0);
        assert!((d.det() - expected).norm() < 1e-12);
    }

    #[test]
    fn det_of_singular_matrix_is_zero() {
        let rows: Vec<Vec<C64>> = (0..4)
            .map(|i| (0..4).map(|j| r((i + j) as f64)).collect())
            .collect();
        let m = CMat::from_rows(&rows).unwrap();
        assert!(m.det().norm() < 1e-12);
    }

    #[test]
    fn adjoint_of_product_reverses_factors() {
        let a = CMat::from_rows(&[vec![c(1.0, 2.0), r(0.5)], vec![r(0.0), c(0.0, -1.0)]]).unwrap();
        let b = pauli_y();
        let lhs = a.matmul(&b).unwrap().adjoint();
        let rhs = b.adjoint().matmul(&a.adjoint()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn trace_is_cyclic() {
        let a = pauli_x();
        let b = CMat::from_rows(&[vec![c(0.2, 0.1), r(1.0)], vec![r(-1.0), c(0.0, 0.4)]]).unwrap();
        let tab = a.matmul(&b).unwrap().trace();
        let tba = b.matmul(&a).unwrap().trace();
        assert!((tab - tba).norm() < 1e-14);
    }

    #[test]
    fn rank_one_projector_is_idempotent() {
        let x = UnitVec::normalized(vec![c(1.0, 1.0), c(0.0, -2.0), r(0.5)]).unwrap();
        let p = x.projector();
        let defect = p.matmul(&p).unwrap().sub(&p).unwrap().frobenius_norm();
        assert!(defect < 1e-14);
        assert!((p.trace().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_values_degenerate_pair_keeps_full_precision() {
        // [diag(1, e^{i th}), P_(1,1)] has two equal singular values
        // sin(th/2); a formula that reconstructs the discriminant from
        // the norm and determinant loses half the digits exactly here.
        let th = 0.9f64;
        let v = CMat::diag(&[r(1.0), c(th.cos(), th.sin())]);
        let x = UnitVec::normalized(vec![r(1.0), r(1.0)]).unwrap();
        let comm = v.commutator(&x.projector()).unwrap();
        let sv = comm.singular_values().unwrap();
        let expected = (th / 2.0).sin();
        assert!((sv[0] - expected).abs() < 1e-15);
        assert!((sv[1] - expected).abs() < 1e-15);
    }

    #[test]
    fn singular_values_zero_modes_stay_at_machine_scale() {
        // A commutator with a rank-one projector has rank two, so in
        // dimension 5 three singular values vanish exactly. They must
        // come back at machine scale: an eigenvalue route through A*A
        // would inflate them to sqrt(eps) and poison sums over the
        // whole spectrum.
        let a = crate::ensembles::random_hermitian(
            5,
            &mut crate::ensembles::task_rng(17, 0),
        );
        let x = crate::ensembles::random_unit_vector(
            5,
            &mut crate::ensembles::task_rng(17, 1),
        );
        let comm = a.commutator(&x.projector()).unwrap();
        let sv = comm.singular_values().unwrap();
        assert_eq!(sv.len(), 5);
        let tail: f64 = sv[2..].iter().sum();
        assert!(tail < 1e-12, "zero modes sum to {tail:.3e}");
    }

    #[test]
    fn singular_values_of_projection_commutator() {
        // [diag(1,0), P_x] with x = (1,1)/sqrt2 has singular values (1/2, 1/2).
        let p = CMat::diag(&[r(1.0), r(0.0)]);
        let x = UnitVec::normalized(vec![r(1.0), r(1.0)]).unwrap();
        let comm = p.commutator(&x.projector()).unwrap();
        let sv = comm.singular_values().unwrap();
        assert!((sv[0] - 0.5).abs() < 1e-14);
        assert!((sv[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn herm_defect_flags_non_hermitian() {
        let m = CMat::from_rows(&[vec![r(0.0), r(1.0)], vec![r(0.0), r(0.0)]]).unwrap();
        assert!(!m.is_hermitian(1e-10));
        assert!(pauli_y().is_hermitian(1e-12));
    }

    #[test]
    fn unitary_defect_flags_scaled_identity() {
        assert!(CMat::identity(3).is_unitary(1e-12));
        assert!(!CMat::identity(3).scale(r(1.1)).is_unitary(1e-3));
    }

    #[test]
    fn unit_vec_rejects_bad_norm_and_accepts_normalized() {
        assert!(UnitVec::new(vec![r(0.9), r(0.0)]).is_err());
        let v = UnitVec::normalized(vec![r(3.0), r(4.0)]).unwrap();
        assert!((norm2(v.coords()) - 1.0).abs() < 1e-15);
        assert!(UnitVec::normalized(vec![r(0.0)]).is_err());
    }

    #[test]
    fn phase_normalize_makes_leading_entry_real_positive() {
        let mut v = vec![c(0.0, 0.6), r(0.8)];
        phase_normalize(&mut v, 1e-12);
        assert!((v[0].re - 0.6).abs() < 1e-15 && v[0].im.abs() < 1e-15);
        // Norm is untouched.
        assert!((norm2(&v) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn from_rows_rejects_ragged_and_non_finite() {
        assert!(CMat::from_rows(&[vec![r(1.0)], vec![r(1.0), r(2.0)]]).is_err());
        assert!(CMat::from_rows(&[vec![r(f64::NAN)]]).is_err());
    }
}
