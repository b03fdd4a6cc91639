//! Quadratic symbols, the symplectic form and the auxiliary forms built from
//! the Hamilton map.
//!
//! Phase-space coordinates are ordered `(x₁..xₙ, ξ₁..ξₙ)` everywhere. A
//! symbol `q(X) = XᵀQX` is stored through its complex symmetric matrix `Q`;
//! its Hamilton map is `F = JQ` with `J = [[0, I], [−I, 0]]`, so that
//! `σ(X, FY) = q(X, Y)` for the symplectic form `σ(X, Y) = XᵀJᵀY`.
//!
//! Weyl quantization convention: the semigroup `e^{−t a^w}` of a real
//! quadratic form with matrix `A` corresponds to the linear flow
//! `e^{−2itJA}`. Both the factor 2 and the sign matter downstream.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::matfun::{min_eig_symmetric, norm2};
use crate::scalar::{complexify, cplx, im_part, lit, re_part, tol_floor, CMat, RMat, Real};
use crate::singular::SingularSpaceInfo;

/// Entries may deviate from symmetry by this much (relative to `max(1, ‖Q‖)`)
/// before a matrix is rejected.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Negative eigenvalues of `Re Q` down to `−ACCRETIVITY_TOL·‖Q‖` are clamped.
pub const ACCRETIVITY_TOL: f64 = 1e-10;

/// The standard symplectic matrix `J` of size `2n`.
pub fn standard_j<T: Real>(n: usize) -> CMat<T> {
    complexify(&standard_j_real::<T>(n))
}

pub fn standard_j_real<T: Real>(n: usize) -> RMat<T> {
    let mut j = RMat::<T>::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = T::one();
        j[(n + i, i)] = -T::one();
    }
    j
}

/// `σ(X, Y) = ⟨ξ, y⟩ − ⟨x, η⟩`.
pub fn symplectic_form<T: Real>(x: &[T], y: &[T]) -> T {
    let n = x.len() / 2;
    let mut s = T::zero();
    for i in 0..n {
        s += x[n + i] * y[i] - x[i] * y[n + i];
    }
    s
}

/// A complex quadratic form on `ℝ²ⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSymbol<T: Real> {
    n: usize,
    q: CMat<T>,
}

impl<T: Real> QuadraticSymbol<T> {
    /// Validates and normalizes an accretive symbol: `Q` is symmetrized and
    /// tiny negative eigenvalues of `Re Q` are clamped to zero.
    pub fn new(q: CMat<T>) -> Result<Self> {
        let s = Self::general(q)?;
        let scale = norm2(&s.q).max(T::one());
        let re = re_part(&s.q);
        let lam = min_eig_symmetric(&re);
        if lam < -tol_floor::<T>(ACCRETIVITY_TOL, 100.0) * scale {
            return Err(Error::NotAccretive { min_eigenvalue: crate::scalar::to_f64(lam) });
        }
        if lam >= T::zero() {
            return Ok(s);
        }
        let eig = SymmetricEigen::new(re);
        let clamped = eig.eigenvalues.map(|v| if v < T::zero() { T::zero() } else { v });
        let re = &eig.eigenvectors * RMat::from_diagonal(&clamped) * eig.eigenvectors.transpose();
        let re = (&re + re.transpose()) * lit::<T>(0.5);
        let im = im_part(&s.q);
        Ok(Self { n: s.n, q: re.zip_map(&im, cplx) })
    }

    /// Builds a symbol from separate real and imaginary parts.
    pub fn from_parts(re: &RMat<T>, im: &RMat<T>) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::DimensionMismatch { expected: re.nrows(), got: im.nrows() });
        }
        Self::new(re.zip_map(im, cplx))
    }

    /// A complex quadratic form without the accretivity requirement (Poisson
    /// brackets of accretive symbols are generally not accretive).
    pub fn general(q: CMat<T>) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(Error::NotSquare { rows: q.nrows(), cols: q.ncols() });
        }
        if q.nrows() == 0 || !q.nrows().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("phase-space dimension {} is not a positive even number", q.nrows())));
        }
        if !crate::scalar::all_finite(&q) {
            return Err(Error::NonFinite);
        }
        let asym = norm2(&(&q - q.transpose()));
        if asym > tol_floor::<T>(SYMMETRY_TOL, 100.0) * norm2(&q).max(T::one()) {
            return Err(Error::NotSymmetric { residual: crate::scalar::to_f64(asym) });
        }
        let q = (&q + q.transpose()) * cplx(lit::<T>(0.5), T::zero());
        Ok(Self { n: q.nrows() / 2, q })
    }

    /// Space dimension `n` (the phase space is `ℝ²ⁿ`).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.q
    }

    pub fn re(&self) -> RMat<T> {
        re_part(&self.q)
    }

    pub fn im(&self) -> RMat<T> {
        im_part(&self.q)
    }

    /// `Q̄`, the matrix of the conjugate symbol.
    pub fn conj_matrix(&self) -> CMat<T> {
        self.q.map(|z| z.conj())
    }

    /// Polarized form `q(X, Y) = XᵀQY` on real vectors.
    pub fn polar_form(&self, x: &[T], y: &[T]) -> num_complex::Complex<T> {
        let mut s = cplx(T::zero(), T::zero());
        for i in 0..x.len() {
            for j in 0..y.len() {
                s += self.q[(i, j)] * cplx(x[i] * y[j], T::zero());
            }
        }
        s
    }

    /// `‖Re Q‖ = 0`.
    pub fn is_real(&self) -> bool {
        self.q.iter().all(|z| z.im == T::zero())
    }

    pub fn is_purely_imaginary(&self) -> bool {
        self.q.iter().all(|z| z.re == T::zero())
    }
}

/// `F = JQ` split into real and imaginary parts.
#[derive(Debug, Clone)]
pub struct HamiltonMap<T: Real> {
    pub f: CMat<T>,
    pub re_f: RMat<T>,
    pub im_f: RMat<T>,
}

pub fn hamilton_map<T: Real>(q: &QuadraticSymbol<T>) -> HamiltonMap<T> {
    let f = standard_j::<T>(q.n()) * q.matrix();
    HamiltonMap { re_f: re_part(&f), im_f: im_part(&f), f }
}

/// `{q₁, q₂} = ∇_ξq₁·∇_xq₂ − ∇_xq₁·∇_ξq₂`, with matrix `−2(Q₁JQ₂ − Q₂JQ₁)`
/// and hence Hamilton map `−2[F₁, F₂]`.
pub fn poisson_bracket<T: Real>(q1: &QuadraticSymbol<T>, q2: &QuadraticSymbol<T>) -> Result<QuadraticSymbol<T>> {
    if q1.n() != q2.n() {
        return Err(Error::DimensionMismatch { expected: q1.dim(), got: q2.dim() });
    }
    let j = standard_j::<T>(q1.n());
    let a = q1.matrix() * &j * q2.matrix();
    let m = (&a + a.transpose()) * cplx(lit::<T>(-2.0), T::zero());
    QuadraticSymbol::general(m)
}

/// Which terms of `κ_t(X) = Σ_{k ≤ k₀} t^{2k} Re q((Im F)ᵏX)` to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KappaVariant {
    #[default]
    Full,
    /// Drop every term with `k > m`.
    Truncated(usize),
    /// Keep all `k₀ + 1` terms but weight term `k` by `t^{2 min(k, m)}`.
    CappedWeight(usize),
}

/// `((Im F)ᵏ)ᵀ Re Q (Im F)ᵏ` for `k = 0..=k_max`.
fn kappa_terms<T: Real>(q: &QuadraticSymbol<T>, k_max: usize) -> Vec<RMat<T>> {
    let hm = hamilton_map(q);
    let re = q.re();
    let mut pow = RMat::<T>::identity(q.dim(), q.dim());
    let mut terms = Vec::with_capacity(k_max + 1);
    for _ in 0..=k_max {
        terms.push(pow.transpose() * &re * &pow);
        pow = &hm.im_f * pow;
    }
    terms
}

fn symmetrize<T: Real>(m: RMat<T>) -> RMat<T> {
    (&m + m.transpose()) * lit::<T>(0.5)
}

/// Matrix of `κ_t` for the `k₀` recorded in `info`.
pub fn kappa_matrix<T: Real>(q: &QuadraticSymbol<T>, info: &SingularSpaceInfo<T>, t: T) -> RMat<T> {
    kappa_matrix_with(q, info.k0, t, KappaVariant::Full)
}

pub fn kappa_matrix_with<T: Real>(q: &QuadraticSymbol<T>, k0: usize, t: T, variant: KappaVariant) -> RMat<T> {
    let last = match variant {
        KappaVariant::Truncated(m) => m.min(k0),
        _ => k0,
    };
    let cap = match variant {
        KappaVariant::CappedWeight(m) => m,
        _ => usize::MAX,
    };
    let t2 = t * t;
    let mut out = RMat::<T>::zeros(q.dim(), q.dim());
    for (k, term) in kappa_terms(q, last).into_iter().enumerate() {
        out += term * t2.powi(k.min(cap) as i32);
    }
    symmetrize(out)
}

/// Matrix of `p_k(X) = Σ_{j ≤ k} w_j Re q((Im F)ʲX)`; unit weights when
/// `weights` is `None`.
pub fn pk_matrix<T: Real>(q: &QuadraticSymbol<T>, k: usize, k0: usize, weights: Option<&[T]>) -> Result<RMat<T>> {
    if k > k0 {
        return Err(Error::IndexOutOfRange { k, max: k0 });
    }
    if let Some(w) = weights {
        if w.len() <= k {
            return Err(Error::DimensionMismatch { expected: k + 1, got: w.len() });
        }
    }
    let mut out = RMat::<T>::zeros(q.dim(), q.dim());
    for (j, term) in kappa_terms(q, k).into_iter().enumerate() {
        let w = weights.map_or(T::one(), |w| w[j]);
        out += term * w;
    }
    Ok(symmetrize(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::real;
    use num_complex::Complex64 as C;

    fn kolmogorov() -> QuadraticSymbol<f64> {
        let mut q = CMat::<f64>::zeros(4, 4);
        q[(3, 3)] = C::new(1.0, 0.0);
        q[(1, 2)] = C::new(0.0, 0.5);
        q[(2, 1)] = C::new(0.0, 0.5);
        QuadraticSymbol::new(q).unwrap()
    }

    fn diag_symbol(v: &[f64]) -> QuadraticSymbol<f64> {
        let d = RMat::<f64>::from_diagonal(&nalgebra::DVector::from_row_slice(v));
        QuadraticSymbol::new(complexify(&d)).unwrap()
    }

    #[test]
    fn j_for_n_1() {
        let j = standard_j_real::<f64>(1);
        assert_eq!(j, RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
    }

    #[test]
    fn j_squares_to_minus_identity() {
        let j = standard_j::<f64>(2);
        assert_eq!(&j * &j, -CMat::<f64>::identity(4, 4));
        assert_eq!(j.transpose(), -j.clone());
    }

    #[test]
    fn symplectic_form_matches_jt_bilinear() {
        let x = [0.3, -1.2, 0.7, 2.0];
        let y = [1.1, 0.4, -0.5, 0.9];
        let jt = standard_j_real::<f64>(2).transpose();
        let xv = nalgebra::DVector::from_row_slice(&x);
        let yv = nalgebra::DVector::from_row_slice(&y);
        let b = (xv.transpose() * jt * yv)[(0, 0)];
        assert!((b - symplectic_form(&x, &y)).abs() < 1e-15);
    }

    #[test]
    fn harmonic_hamilton_map_is_j() {
        let q = diag_symbol(&[1.0, 1.0]);
        assert_eq!(hamilton_map(&q).f, standard_j::<f64>(1));
    }

    #[test]
    fn kolmogorov_hamilton_map() {
        let hm = hamilton_map(&kolmogorov());
        // F = JQ: rows x of F are rows ξ of Q, rows ξ of F are −rows x of Q.
        let mut expected = RMat::<f64>::zeros(4, 4);
        expected[(0, 1)] = 0.5;
        expected[(3, 2)] = -0.5;
        assert_eq!(hm.im_f, expected);
        let mut re = RMat::<f64>::zeros(4, 4);
        re[(1, 3)] = 1.0;
        assert_eq!(hm.re_f, re);
    }

    #[test]
    fn rejects_bad_input() {
        let mut q = CMat::<f64>::zeros(2, 2);
        q[(0, 1)] = real(1.0);
        assert!(matches!(QuadraticSymbol::new(q).unwrap_err(), Error::NotSymmetric { .. }));
        let q = complexify(&RMat::<f64>::from_diagonal_element(2, 2, -1.0));
        assert!(matches!(QuadraticSymbol::new(q).unwrap_err(), Error::NotAccretive { .. }));
        assert!(matches!(QuadraticSymbol::new(CMat::<f64>::zeros(3, 3)).unwrap_err(), Error::InvalidArgument(_)));
    }

    #[test]
    fn clamps_tiny_negative_real_part() {
        let q = diag_symbol(&[1.0, -1e-13]);
        assert!(min_eig_symmetric(&q.re()) >= 0.0);
    }

    #[test]
    fn bracket_of_x2_and_xi2() {
        let b = poisson_bracket(&diag_symbol(&[1.0, 0.0]), &diag_symbol(&[0.0, 1.0])).unwrap();
        let expected = RMat::from_row_slice(2, 2, &[0.0, -2.0, -2.0, 0.0]);
        assert_eq!(b.re(), expected);
        assert_eq!(b.im(), RMat::zeros(2, 2));
    }

    #[test]
    fn bracket_with_itself_vanishes() {
        let q = kolmogorov();
        assert!(poisson_bracket(&q, &q).unwrap().matrix().norm() < 1e-15);
    }

    #[test]
    fn real_symbol_kappa_is_re_q() {
        let q = diag_symbol(&[2.0, 1.0]);
        for t in [0.0, 0.3, 5.0] {
            assert_eq!(kappa_matrix_with(&q, 0, t, KappaVariant::Full), q.re());
        }
        assert_eq!(pk_matrix(&q, 0, 0, None).unwrap(), q.re());
        assert!(pk_matrix(&q, 1, 0, None).is_err());
    }

    #[test]
    fn kolmogorov_kappa_by_hand() {
        // Im F maps e_ξ₁ to −½e_ξ₂ (and e_x₂ to ½e_x₁); Re q = ξ₂², so the
        // second term is ¼ξ₁².
        let q = kolmogorov();
        let k = kappa_matrix_with(&q, 1, 0.5, KappaVariant::Full);
        let mut expected = RMat::<f64>::zeros(4, 4);
        expected[(3, 3)] = 1.0;
        expected[(2, 2)] = 0.25 * 0.25;
        assert!((k - &expected).norm() < 1e-16);
        let k0 = kappa_matrix_with(&q, 1, 0.0, KappaVariant::Full);
        assert_eq!(k0, q.re());
        let capped = kappa_matrix_with(&q, 1, 0.5, KappaVariant::CappedWeight(0));
        assert!((capped[(2, 2)] - 0.25).abs() < 1e-16);
        let trunc = kappa_matrix_with(&q, 1, 0.5, KappaVariant::Truncated(0));
        assert_eq!(trunc, q.re());
    }

    #[test]
    fn pk_is_nested() {
        let q = kolmogorov();
        let p0 = pk_matrix(&q, 0, 1, None).unwrap();
        let p1 = pk_matrix(&q, 1, 1, None).unwrap();
        assert!(min_eig_symmetric(&(&p1 - &p0)) >= -1e-15);
        let w = pk_matrix(&q, 1, 1, Some(&[1.0, 4.0])).unwrap();
        assert!((w[(2, 2)] - 1.0).abs() < 1e-15);
    }
}
