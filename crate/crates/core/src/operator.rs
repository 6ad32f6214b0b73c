//! Dense operator algebra on finite tensor-product spaces.
//!
//! Basis convention: for a space built from sites `s_0 < s_1 < ...`, the
//! basis index is `sum_k digit(s_k) * prod_{j<k} dim(s_j)`, so the lowest
//! site id is the least-significant tensor factor. Local payloads follow the
//! same convention over their own (sorted) support.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Largest total dimension handled by the dense path.
pub const DENSE_DIM_CAP: usize = 1 << 14;

/// A square complex matrix acting on a full (or sub-) tensor-product space.
#[derive(Debug, Clone)]
pub struct FullOperator {
    matrix: Mat<C64>,
}

impl FullOperator {
    pub fn from_matrix(matrix: Mat<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(Self { matrix })
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            matrix: Mat::from_fn(dim, dim, f),
        }
    }

    /// Row-major construction, convenient for small literal matrices.
    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: Mat::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: Mat::identity(dim, dim),
        }
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        Self::from_fn(entries.len(), |i, j| if i == j { entries[i] } else { ZERO })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat<C64> {
        self.matrix
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    fn check_dim(&self, other: &FullOperator) -> Result<()> {
        if self.dim() != other.dim() {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &FullOperator) -> Result<FullOperator> {
        self.check_dim(other)?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &FullOperator) -> Result<FullOperator> {
        self.check_dim(other)?;
        Ok(Self {
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn add_assign_scaled(&mut self, other: &FullOperator, scale: C64) -> Result<()> {
        self.check_dim(other)?;
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                self.matrix[(i, j)] += scale * other.matrix[(i, j)];
            }
        }
        Ok(())
    }

    pub fn scale(&self, s: C64) -> FullOperator {
        let n = self.dim();
        Self::from_fn(n, |i, j| s * self.matrix[(i, j)])
    }

    pub fn mul(&self, other: &FullOperator) -> Result<FullOperator> {
        self.check_dim(other)?;
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn adjoint(&self) -> FullOperator {
        Self {
            matrix: self.matrix.adjoint().to_owned(),
        }
    }

    /// Elementwise complex conjugate.
    pub fn conjugate(&self) -> FullOperator {
        Self {
            matrix: self.matrix.conjugate().to_owned(),
        }
    }

    /// Tensor product `self ⊗ other` with `other` as the least-significant
    /// factor.
    pub fn kron(&self, other: &FullOperator) -> FullOperator {
        let (na, nb) = (self.dim(), other.dim());
        Self::from_fn(na * nb, |i, j| {
            self.matrix[(i / nb, j / nb)] * other.matrix[(i % nb, j % nb)]
        })
    }

    /// Largest entry modulus of `A - A†`.
    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_combo(1.0)
    }

    /// Largest entry modulus of `A + A†`.
    fn anti_hermiticity_error(&self) -> f64 {
        self.max_abs_combo(-1.0)
    }

    fn max_abs_combo(&self, sign: f64) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                let d = self.matrix[(i, j)] - self.matrix[(j, i)].conj() * sign;
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.matrix[(i, j)].norm());
            }
        }
        m
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| i == j || self.matrix[(i, j)] == ZERO))
    }

    /// Compresses by a diagonal 0/1 mask: returns `P A P` for `P = diag(mask)`.
    pub fn project(&self, mask: &[bool]) -> Result<FullOperator> {
        if mask.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: mask.len(),
            });
        }
        Ok(Self::from_fn(self.dim(), |i, j| {
            if mask[i] && mask[j] {
                self.matrix[(i, j)]
            } else {
                ZERO
            }
        }))
    }
}

/// `AB - BA`.
pub fn commutator(a: &FullOperator, b: &FullOperator) -> Result<FullOperator> {
    a.check_dim(b)?;
    let ab = &a.matrix * &b.matrix;
    let ba = &b.matrix * &a.matrix;
    Ok(FullOperator { matrix: ab - ba })
}

/// Largest singular value.
///
/// Hermitian and anti-Hermitian inputs (every commutator of Hermitian
/// operators is anti-Hermitian) go through the eigenvalue solver; anything
/// else through the SVD.
pub fn spectral_norm(a: &FullOperator) -> f64 {
    let n = a.dim();
    if n == 0 {
        return 0.0;
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let tol = 1e-13 * scale;
    if a.hermiticity_error() <= tol {
        return hermitian_norm(&a.matrix);
    }
    if a.anti_hermiticity_error() <= tol {
        let ia = Mat::from_fn(n, n, |i, j| I * a.matrix[(i, j)]);
        return hermitian_norm(&ia);
    }
    a.matrix
        .singular_values()
        .map(|s| s.first().copied().unwrap_or(0.0))
        .unwrap_or_else(|_| power_norm(&a.matrix))
}

fn hermitian_norm(h: &Mat<C64>) -> f64 {
    match h.self_adjoint_eigenvalues(Side::Lower) {
        Ok(ev) => ev.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        Err(_) => power_norm(h),
    }
}

// Fallback when the dense solvers report non-convergence.
fn power_norm(a: &Mat<C64>) -> f64 {
    let n = a.nrows();
    let gram = a.adjoint() * a;
    let mut v = Mat::<C64>::from_fn(n, 1, |i, _| C64::new(1.0 + (i as f64) * 1e-3, 0.0));
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let w = &gram * &v;
        let norm = w.norm_l2();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm / v.norm_l2();
        v = Mat::from_fn(n, 1, |i, _| w[(i, 0)] / norm);
        if (next - lambda).abs() <= 1e-15 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

/// Spectral norm of `A` restricted to the off-diagonal block between the
/// index sets `rows` and `cols`: `|| A[rows, cols] ||`.
pub(crate) fn block_norm(a: &Mat<C64>, rows: &[usize], cols: &[usize]) -> f64 {
    if rows.is_empty() || cols.is_empty() {
        return 0.0;
    }
    let block = Mat::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])]);
    rect_norm(&block)
}

/// Spectral norm of a rectangular matrix through its smaller Gram matrix.
pub(crate) fn rect_norm(block: &Mat<C64>) -> f64 {
    if block.nrows() == 0 || block.ncols() == 0 {
        return 0.0;
    }
    // ||B||^2 is the top eigenvalue of the smaller Gram matrix
    let gram = if block.nrows() <= block.ncols() {
        block * block.adjoint()
    } else {
        block.adjoint() * block
    };
    hermitian_norm(&gram).max(0.0).sqrt()
}

/// Eigen-decomposition `H = V diag(E) V†` of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<C64>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Mat<C64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(E) V†`.
    pub fn reconstruct(&self) -> FullOperator {
        let n = self.dim();
        let scaled = Mat::from_fn(n, n, |i, j| self.eigenvectors[(i, j)] * self.eigenvalues[j]);
        FullOperator {
            matrix: &scaled * self.eigenvectors.adjoint(),
        }
    }

    /// `V† A V`.
    pub fn to_eigenbasis(&self, a: &FullOperator) -> Result<Mat<C64>> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.dim(),
            });
        }
        let av = &a.matrix * &self.eigenvectors;
        Ok(self.eigenvectors.adjoint() * av)
    }

    /// Heisenberg evolution of an operator already expressed in the
    /// eigenbasis; returns the result in the original basis.
    pub fn evolve_from_eigenbasis(&self, a_eig: &Mat<C64>, t: f64) -> FullOperator {
        let rotated = self.phase_rotate(a_eig, t);
        let tmp = &self.eigenvectors * &rotated;
        FullOperator {
            matrix: tmp * self.eigenvectors.adjoint(),
        }
    }
}

impl SpectralDecomposition {
    /// `Ã ∘ e^{i(E_k - E_l)t}`: the evolved operator, still in the eigenbasis.
    pub(crate) fn phase_rotate(&self, a_eig: &Mat<C64>, t: f64) -> Mat<C64> {
        let n = self.dim();
        let phases: Vec<C64> = self
            .eigenvalues
            .iter()
            .map(|&e| C64::from_polar(1.0, e * t))
            .collect();
        Mat::from_fn(n, n, |k, l| a_eig[(k, l)] * phases[k] * phases[l].conj())
    }

    /// Rows of `V` selected by `rows`.
    pub(crate) fn eigenvector_rows(&self, rows: &[usize]) -> Mat<C64> {
        Mat::from_fn(rows.len(), self.dim(), |i, j| self.eigenvectors[(rows[i], j)])
    }
}

/// Full eigendecomposition of a Hermitian operator.
pub fn decompose(h: &FullOperator) -> Result<SpectralDecomposition> {
    let scale = h.max_abs().max(1.0);
    let herm = h.hermiticity_error();
    if herm > 1e-10 * scale {
        return Err(Error::NotHermitian(herm));
    }
    let evd = h
        .matrix
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Eigen)?;
    let s = evd.S();
    let eigenvalues = (0..h.dim()).map(|i| s[i].re).collect();
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: evd.U().to_owned(),
    })
}

/// `e^{iHt} A e^{-iHt}` using the decomposition of `H`.
pub fn heisenberg_evolve(
    a: &FullOperator,
    decomp: &SpectralDecomposition,
    t: f64,
) -> Result<FullOperator> {
    let a_eig = decomp.to_eigenbasis(a)?;
    Ok(decomp.evolve_from_eigenbasis(&a_eig, t))
}

/// Standard single-site matrices.
pub mod local {
    use super::*;

    pub fn pauli_x() -> FullOperator {
        FullOperator::from_fn(2, |i, j| if i != j { ONE } else { ZERO })
    }

    pub fn pauli_y() -> FullOperator {
        // |0><1| -> -i, |1><0| -> i
        FullOperator::from_fn(2, |i, j| match (i, j) {
            (0, 1) => -I,
            (1, 0) => I,
            _ => ZERO,
        })
    }

    pub fn pauli_z() -> FullOperator {
        FullOperator::diagonal(&[ONE, -ONE])
    }

    /// Truncated annihilation operator on `m` Fock levels: `b|k> = sqrt(k)|k-1>`.
    pub fn annihilation(m: usize) -> FullOperator {
        FullOperator::from_fn(m, |i, j| {
            if j == i + 1 {
                C64::new((j as f64).sqrt(), 0.0)
            } else {
                ZERO
            }
        })
    }

    pub fn creation(m: usize) -> FullOperator {
        annihilation(m).adjoint()
    }

    pub fn number(m: usize) -> FullOperator {
        FullOperator::diagonal(&(0..m).map(|k| C64::new(k as f64, 0.0)).collect::<Vec<_>>())
    }

    /// `b + b†`.
    pub fn quadrature_x(m: usize) -> FullOperator {
        let b = annihilation(m);
        b.add(&b.adjoint()).unwrap()
    }

    /// `i(b† - b)`.
    pub fn quadrature_p(m: usize) -> FullOperator {
        let b = annihilation(m);
        b.adjoint().sub(&b).unwrap().scale(I)
    }

    /// Tensor product of one factor per site, listed from the lowest site id
    /// (least significant) upwards.
    pub fn tensor(factors: &[FullOperator]) -> FullOperator {
        factors
            .iter()
            .fold(FullOperator::identity(1), |acc, f| f.kron(&acc))
    }
}

/// Places a payload acting on `support` into the space spanned by `space`
/// (both sorted site lists, `support ⊆ space`). `dims[s]` is the local
/// dimension of site `s`.
pub fn embed_payload(
    payload: &FullOperator,
    support: &[usize],
    space: &[usize],
    dims: &[usize],
) -> Result<FullOperator> {
    let payload_dim: usize = support.iter().map(|&s| dims[s]).product();
    if payload.dim() != payload_dim {
        return Err(Error::DimensionMismatch {
            expected: payload_dim,
            found: payload.dim(),
        });
    }
    let total: usize = space.iter().map(|&s| dims[s]).product();
    if total > DENSE_DIM_CAP {
        return Err(Error::DimensionCap {
            dim: total,
            cap: DENSE_DIM_CAP,
        });
    }

    let mut strides = Vec::with_capacity(space.len());
    let mut acc = 1;
    for &s in space {
        strides.push(acc);
        acc *= dims[s];
    }
    // position of each support site inside `space`
    let mut positions = Vec::with_capacity(support.len());
    for &s in support {
        match space.binary_search(&s) {
            Ok(p) => positions.push(p),
            Err(_) => return Err(Error::SiteOutOfRange { site: s, site_count: space.len() }),
        }
    }

    // offset in the big space contributed by each payload basis index
    let offsets: Vec<usize> = (0..payload_dim)
        .map(|mut p| {
            let mut off = 0;
            for &pos in &positions {
                let d = dims[space[pos]];
                off += (p % d) * strides[pos];
                p /= d;
            }
            off
        })
        .collect();

    let mut out = Mat::<C64>::zeros(total, total);
    for c in 0..total {
        let mut pc = 0;
        let mut rest = c;
        let mut pstride = 1;
        for &pos in &positions {
            let d = dims[space[pos]];
            let digit = (c / strides[pos]) % d;
            pc += digit * pstride;
            pstride *= d;
            rest -= digit * strides[pos];
        }
        for (pr, &off) in offsets.iter().enumerate() {
            let v = payload.matrix[(pr, pc)];
            if v != ZERO {
                out[(rest + off, c)] = v;
            }
        }
    }
    Ok(FullOperator { matrix: out })
}

#[cfg(test)]
mod tests {
    use super::local::*;
    use super::*;

    fn close(a: &FullOperator, b: &FullOperator, tol: f64) -> bool {
        a.sub(b).unwrap().max_abs() <= tol
    }

    #[test]
    fn site_zero_is_least_significant() {
        let z0 = embed_payload(&pauli_z(), &[0], &[0, 1], &[2, 2]).unwrap();
        let expected = FullOperator::diagonal(&[ONE, -ONE, ONE, -ONE]);
        assert!(close(&z0, &expected, 0.0));
        let z1 = embed_payload(&pauli_z(), &[1], &[0, 1], &[2, 2]).unwrap();
        assert!(close(&z1, &FullOperator::diagonal(&[ONE, ONE, -ONE, -ONE]), 0.0));
    }

    #[test]
    fn identity_payload_embeds_to_identity() {
        let id = embed_payload(&FullOperator::identity(3), &[1], &[0, 1, 2], &[2, 3, 2]).unwrap();
        assert!(close(&id, &FullOperator::identity(12), 0.0));
    }

    #[test]
    fn embed_matches_kron() {
        // X on site 0, Z on site 2 of three qubits equals Z ⊗ I ⊗ X
        let payload = tensor(&[pauli_x(), pauli_z()]);
        let e = embed_payload(&payload, &[0, 2], &[0, 1, 2], &[2, 2, 2]).unwrap();
        let k = tensor(&[pauli_x(), FullOperator::identity(2), pauli_z()]);
        assert!(close(&e, &k, 0.0));
    }

    #[test]
    fn embed_rejects_bad_payload() {
        assert!(embed_payload(&pauli_z(), &[0, 1], &[0, 1], &[2, 2]).is_err());
    }

    #[test]
    fn xx_norm_one() {
        let xx = embed_payload(&tensor(&[pauli_x(), pauli_x()]), &[0, 1], &[0, 1, 2], &[2, 2, 2]).unwrap();
        assert!((spectral_norm(&xx) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_commutators() {
        let c = commutator(&pauli_x(), &pauli_z()).unwrap();
        assert!(close(&c, &pauli_y().scale(C64::new(0.0, -2.0)), 1e-15));
        assert!((spectral_norm(&c) - 2.0).abs() < 1e-12);
        assert_eq!(commutator(&pauli_x(), &pauli_x()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn bond_field_commutator() {
        // [X1 X2, Z2] = -2i X1 Y2 on sites (1, 2)
        let dims = [2, 2, 2];
        let space = [0, 1, 2];
        let xx = embed_payload(&tensor(&[pauli_x(), pauli_x()]), &[1, 2], &space, &dims).unwrap();
        let z2 = embed_payload(&pauli_z(), &[2], &space, &dims).unwrap();
        let xy = embed_payload(&tensor(&[pauli_x(), pauli_y()]), &[1, 2], &space, &dims).unwrap();
        let c = commutator(&xx, &z2).unwrap();
        assert!(close(&c, &xy.scale(C64::new(0.0, -2.0)), 1e-15));
        assert!((spectral_norm(&c) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn norms_of_simple_operators() {
        assert!((spectral_norm(&FullOperator::identity(7)) - 1.0).abs() < 1e-12);
        let y2 = pauli_y().scale(C64::new(0.0, -2.0));
        assert!((spectral_norm(&y2) - 2.0).abs() < 1e-12);
        // non-normal input goes through the SVD
        assert!((spectral_norm(&creation(4)) - 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(spectral_norm(&FullOperator::zeros(3)), 0.0);
    }

    #[test]
    fn decomposition_basics() {
        let d = decompose(&pauli_z()).unwrap();
        assert_eq!(d.eigenvalues(), &[-1.0, 1.0]);
        let zero = decompose(&FullOperator::zeros(4)).unwrap();
        assert!(zero.eigenvalues().iter().all(|&e| e == 0.0));
        assert!(matches!(decompose(&creation(3)), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn tfim_two_sites_spectrum() {
        // H = X0 X1 + Z0 + Z1. In the even-parity sector {|00>,|11>} it is
        // [[2,1],[1,-2]] with eigenvalues ±sqrt(5); the odd sector {|01>,|10>}
        // is [[0,1],[1,0]] with eigenvalues ±1.
        let dims = [2, 2];
        let sp = [0, 1];
        let h = embed_payload(&tensor(&[pauli_x(), pauli_x()]), &sp, &sp, &dims)
            .unwrap()
            .add(&embed_payload(&pauli_z(), &[0], &sp, &dims).unwrap())
            .unwrap()
            .add(&embed_payload(&pauli_z(), &[1], &sp, &dims).unwrap())
            .unwrap();
        let d = decompose(&h).unwrap();
        let s5 = 5f64.sqrt();
        let expected = [-s5, -1.0, 1.0, s5];
        for (e, x) in d.eigenvalues().iter().zip(expected) {
            assert!((e - x).abs() < 1e-12, "{e} vs {x}");
        }
        assert!(close(&d.reconstruct(), &h, 1e-12));
    }

    #[test]
    fn single_qubit_evolution() {
        // H = Z, A = X: A(t) = cos(2t) X - sin(2t) Y, ||[A(t), X]|| = 2|sin 2t|
        let d = decompose(&pauli_z()).unwrap();
        for &t in &[0.0, 0.1, 0.7, 1.3, -0.4] {
            let at = heisenberg_evolve(&pauli_x(), &d, t).unwrap();
            let expected = pauli_x()
                .scale(C64::new((2.0 * t).cos(), 0.0))
                .sub(&pauli_y().scale(C64::new((2.0 * t).sin(), 0.0)))
                .unwrap();
            assert!(close(&at, &expected, 1e-13));
            let n = spectral_norm(&commutator(&at, &pauli_x()).unwrap());
            assert!((n - 2.0 * (2.0 * t).sin().abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_time_is_identity_map() {
        let h = tensor(&[pauli_x(), pauli_z()]).add(&tensor(&[pauli_z(), pauli_z()])).unwrap();
        let d = decompose(&h).unwrap();
        let a = tensor(&[pauli_y(), pauli_x()]);
        assert!(close(&heisenberg_evolve(&a, &d, 0.0).unwrap(), &a, 1e-13));
    }

    #[test]
    fn block_norm_matches_commutator_norm() {
        // A Hermitian, D = diag(±1): ||[A, D]|| = 2 ||A[+,-]||
        let a = tensor(&[pauli_x(), pauli_y()]).add(&tensor(&[pauli_z(), pauli_x()])).unwrap();
        let dz = embed_payload(&pauli_z(), &[1], &[0, 1], &[2, 2]).unwrap();
        let direct = spectral_norm(&commutator(&a, &dz).unwrap());
        let plus: Vec<usize> = (0..4).filter(|&i| dz.get(i, i).re > 0.0).collect();
        let minus: Vec<usize> = (0..4).filter(|&i| dz.get(i, i).re < 0.0).collect();
        let fast = 2.0 * block_norm(a.matrix(), &plus, &minus);
        assert!((direct - fast).abs() < 1e-12);
    }

    #[test]
    fn ladder_algebra() {
        let m = 5;
        let b = annihilation(m);
        let c = commutator(&b, &creation(m)).unwrap();
        // [b, b†] = I - m |m-1><m-1|
        for k in 0..m {
            let expected = if k == m - 1 { 1.0 - m as f64 } else { 1.0 };
            assert!((c.get(k, k).re - expected).abs() < 1e-12);
        }
        let n = creation(m).mul(&b).unwrap();
        assert!(close(&n, &number(m), 1e-12));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn hermitian(dim: usize) -> impl Strategy<Value = FullOperator> {
            proptest::collection::vec(-1.0f64..1.0, 2 * dim * dim).prop_map(move |v| {
                let raw = FullOperator::from_fn(dim, |i, j| {
                    C64::new(v[2 * (i * dim + j)], v[2 * (i * dim + j) + 1])
                });
                raw.add(&raw.adjoint()).unwrap()
            })
        }

        fn pair() -> impl Strategy<Value = (FullOperator, FullOperator)> {
            (1usize..=8).prop_flat_map(|d| (hermitian(d), hermitian(d)))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn commutator_antisymmetric((a, b) in pair()) {
                let ab = commutator(&a, &b).unwrap();
                let ba = commutator(&b, &a).unwrap();
                prop_assert_eq!(ab.add(&ba).unwrap().max_abs(), 0.0);
            }

            #[test]
            fn norm_triangle_and_submultiplicative((a, b) in pair()) {
                let na = spectral_norm(&a);
                let nb = spectral_norm(&b);
                let slack = 1e-9 * (1.0 + na * nb + na + nb);
                prop_assert!(spectral_norm(&a.add(&b).unwrap()) <= na + nb + slack);
                prop_assert!(spectral_norm(&a.mul(&b).unwrap()) <= na * nb + slack);
            }

            #[test]
            fn evolution_group_and_unitary_invariance((h, a) in pair(), t in -2.0f64..2.0, s in -2.0f64..2.0) {
                let d = decompose(&h).unwrap();
                let ts = heisenberg_evolve(&heisenberg_evolve(&a, &d, t).unwrap(), &d, s).unwrap();
                let direct = heisenberg_evolve(&a, &d, t + s).unwrap();
                prop_assert!(ts.sub(&direct).unwrap().max_abs() <= 1e-8 * (1.0 + a.max_abs()));
                let na = spectral_norm(&a);
                prop_assert!((spectral_norm(&direct) - na).abs() <= 1e-9 * (1.0 + na));
            }

            #[test]
            fn decomposition_invariants(h in (1usize..=10).prop_flat_map(hermitian)) {
                let d = decompose(&h).unwrap();
                let nh = spectral_norm(&h).max(1e-300);
                prop_assert!(d.reconstruct().sub(&h).unwrap().max_abs() <= 1e-9 * nh * h.dim() as f64);
                let v = FullOperator::from_matrix(d.eigenvectors().clone()).unwrap();
                let vv = v.adjoint().mul(&v).unwrap();
                prop_assert!(vv.sub(&FullOperator::identity(h.dim())).unwrap().max_abs() <= 1e-10);
            }

            #[test]
            fn commutator_norm_phase_invariant((h, a) in pair(), phase in 0.0f64..6.3, t in 0.0f64..1.5) {
                let d = decompose(&h).unwrap();
                let b = a.adjoint().add(&FullOperator::identity(a.dim())).unwrap();
                let plain = spectral_norm(&commutator(&heisenberg_evolve(&a, &d, t).unwrap(), &b).unwrap());
                let pa = a.scale(C64::from_polar(1.0, phase));
                let phased = spectral_norm(&commutator(&heisenberg_evolve(&pa, &d, t).unwrap(), &b).unwrap());
                prop_assert!((plain - phased).abs() <= 1e-9 * (1.0 + plain));
            }
        }
    }
}
