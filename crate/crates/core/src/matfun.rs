//! Dense complex matrix functions and structural predicates.
//!
//! The exponential uses scaling and squaring with diagonal Padé
//! approximants. Square root and logarithm share one complex Schur
//! factorization `M = Z T Z*`: the square root runs the triangular
//! recurrence on `T`, the logarithm applies inverse scaling and squaring to
//! `T` followed by a Gauss–Legendre (partial fraction Padé) evaluation of
//! `log(I + X)`.

use nalgebra::linalg::{Schur, SymmetricEigen, SVD};
use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::{cplx, lit, real, CMat, RMat, Real};
use crate::symbols::standard_j;

/// Default relative rank tolerance for numerical kernels.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

const SCHUR_ITER_PER_ROW: usize = 200;
const SCHUR_EPS_LADDER: [f64; 4] = [1.0, 4.0, 64.0, 1024.0];
const LOG_PADE_NODES: usize = 8;
const LOG_SQRT_THRESHOLD: f64 = 0.25;
const LOG_MAX_SQRTS: usize = 100;

/// Eigenvalues with multiplicity and a departure-from-normality estimate.
#[derive(Debug, Clone)]
pub struct Spectrum<T: Real> {
    pub eigenvalues: Vec<Complex<T>>,
    /// `‖N‖_F / ‖T‖_F` where `T = D + N` is the Schur form; zero for normal
    /// matrices, and the sensitivity of the eigenvalues grows with it.
    pub condition: T,
}

/// Outcome of a structural predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check<T: Real> {
    pub holds: bool,
    pub residual: T,
}

fn ensure_square<T: Real>(m: &CMat<T>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

/// Spectral norm (largest singular value).
pub fn norm2<T: Real>(m: &CMat<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// Spectral norm of a real matrix.
pub fn norm2_real<T: Real>(m: &RMat<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// Induced 1-norm (maximum column sum).
pub fn norm1<T: Real>(m: &CMat<T>) -> T {
    let mut best = T::zero();
    for j in 0..m.ncols() {
        let s = m.column(j).iter().fold(T::zero(), |a, z| a + z.modulus());
        if s > best {
            best = s;
        }
    }
    best
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    DMatrix::identity(n, n)
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve<T: Real>(a: &CMat<T>, b: &CMat<T>) -> Result<CMat<T>> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::InvalidArgument("singular linear system".into()))
}

/// Matrix inverse.
pub fn inverse<T: Real>(a: &CMat<T>) -> Result<CMat<T>> {
    a.clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("matrix is singular".into()))
}

// ---------------------------------------------------------------------------
// Exponential

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

fn pade_low<T: Real>(a: &CMat<T>, coeffs: &[f64]) -> (CMat<T>, CMat<T>) {
    let n = a.nrows();
    let a2 = a * a;
    let mut pow = identity::<T>(n);
    let mut u = CMat::<T>::zeros(n, n);
    let mut v = CMat::<T>::zeros(n, n);
    for k in (0..coeffs.len()).step_by(2) {
        v += &pow * real(lit::<T>(coeffs[k]));
        if k + 1 < coeffs.len() {
            u += &pow * real(lit::<T>(coeffs[k + 1]));
        }
        pow = &pow * &a2;
    }
    (a * u, v)
}

fn pade13<T: Real>(a: &CMat<T>) -> (CMat<T>, CMat<T>) {
    let n = a.nrows();
    let b = |k: usize| real(lit::<T>(PADE13[k]));
    let id = identity::<T>(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9)) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1);
    let u = a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8)) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);
    (u, v)
}

/// Matrix exponential.
pub fn mat_exp<T: Real>(m: &CMat<T>) -> Result<CMat<T>> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(m.clone());
    }
    let nrm = norm1(m);
    for &(deg, theta) in &THETA {
        if nrm <= lit(theta) {
            let coeffs: &[f64] = match deg {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let (u, v) = pade_low(m, coeffs);
            return solve(&(&v - &u), &(&v + &u));
        }
    }
    let ratio = crate::scalar::to_f64(nrm) / THETA13;
    let s = if ratio > 1.0 { ratio.log2().ceil() as i32 } else { 0 };
    let scaled = m * real(lit::<T>(2f64.powi(-s)));
    let (u, v) = pade13(&scaled);
    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// Schur based functions

/// Complex Schur factorization `M = Z T Z*` with `T` upper triangular.
pub fn schur<T: Real>(m: &CMat<T>) -> Result<(CMat<T>, CMat<T>)> {
    ensure_square(m)?;
    // Deflating at exactly one ulp can stall on near-multiple eigenvalues
    // (e.g. I + O(ε)); a few ulps more keeps the factorization backward
    // stable.
    let max_iter = SCHUR_ITER_PER_ROW * m.nrows().max(1);
    let s = SCHUR_EPS_LADDER
        .iter()
        .find_map(|&f| Schur::try_new(m.clone(), T::default_epsilon() * lit::<T>(f), max_iter))
        .ok_or_else(|| Error::ConvergenceFailure("complex Schur iteration".into()))?;
    let (z, mut t) = s.unpack();
    // clear rounding below the diagonal
    for j in 0..t.ncols() {
        for i in (j + 1)..t.nrows() {
            t[(i, j)] = Complex::new(T::zero(), T::zero());
        }
    }
    Ok((z, t))
}

/// Distance of `z` to the closed half-line `(-inf, 0]`.
fn branch_distance<T: Real>(z: Complex<T>) -> T {
    if z.re <= T::zero() {
        z.im.abs()
    } else {
        z.modulus()
    }
}

/// Default guard distance `absolute + relative·‖M‖` of the principal-branch
/// functions.
pub const BRANCH_GUARD: (f64, f64) = (1e-12, 1e-9);

fn branch_guard<T: Real>(t: &CMat<T>) -> Result<()> {
    branch_guard_with(t, BRANCH_GUARD)
}

fn branch_guard_with<T: Real>(t: &CMat<T>, (absolute, relative): (f64, f64)) -> Result<()> {
    let nrm = norm2(t);
    let guard = lit::<T>(absolute) + lit::<T>(relative) * nrm;
    for i in 0..t.nrows() {
        let z = t[(i, i)];
        let d = branch_distance(z);
        if d < guard {
            return Err(Error::BranchCutViolation {
                re: crate::scalar::to_f64(z.re),
                im: crate::scalar::to_f64(z.im),
                distance: crate::scalar::to_f64(d),
            });
        }
    }
    Ok(())
}

/// Principal square root of an upper triangular matrix.
fn sqrt_upper<T: Real>(t: &CMat<T>) -> CMat<T> {
    let n = t.nrows();
    let mut r = CMat::<T>::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = ComplexField::sqrt(t[(i, i)]);
    }
    for d in 1..n {
        for i in 0..(n - d) {
            let j = i + d;
            let mut s = t[(i, j)];
            for k in (i + 1)..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            r[(i, j)] = s / (r[(i, i)] + r[(j, j)]);
        }
    }
    r
}

/// Principal logarithm of an upper triangular matrix with spectrum off the
/// branch cut.
fn log_upper<T: Real>(t: &CMat<T>) -> Result<CMat<T>> {
    let n = t.nrows();
    let id = identity::<T>(n);
    let mut root = t.clone();
    let mut s = 0usize;
    while norm1(&(&root - &id)) > lit(LOG_SQRT_THRESHOLD) {
        if s >= LOG_MAX_SQRTS {
            return Err(Error::ConvergenceFailure("inverse scaling and squaring".into()));
        }
        root = sqrt_upper(&root);
        s += 1;
    }
    let x = &root - &id;
    let rule = GaussLegendre::new(LOG_PADE_NODES).unit_interval::<T>();
    let mut l = CMat::<T>::zeros(n, n);
    for (node, w) in rule {
        let shifted = &id + &x * real(node);
        let y = shifted
            .solve_upper_triangular(&x)
            .ok_or_else(|| Error::ConvergenceFailure("singular Pade denominator".into()))?;
        l += y * real(w);
    }
    let mut l = l * real(lit::<T>(2f64.powi(s as i32)));
    for i in 0..n {
        l[(i, i)] = ComplexField::ln(t[(i, i)]);
    }
    Ok(l)
}

/// Principal matrix logarithm.
///
/// Fails with [`Error::BranchCutViolation`] when an eigenvalue lies within
/// `1e-12 + 1e-9·‖M‖` of `(-inf, 0]`.
pub fn mat_log_principal<T: Real>(m: &CMat<T>) -> Result<CMat<T>> {
    mat_log_principal_guarded(m, BRANCH_GUARD)
}

/// [`mat_log_principal`] with guard distance `absolute + relative·‖M‖`.
pub fn mat_log_principal_guarded<T: Real>(m: &CMat<T>, guard: (f64, f64)) -> Result<CMat<T>> {
    ensure_square(m)?;
    if m.is_empty() {
        return Ok(m.clone());
    }
    let (z, t) = schur(m)?;
    branch_guard_with(&t, guard)?;
    let l = log_upper(&t)?;
    Ok(&z * l * z.adjoint())
}

/// Principal matrix square root (eigenvalues in the open right half-plane).
pub fn mat_sqrt_principal<T: Real>(m: &CMat<T>) -> Result<CMat<T>> {
    ensure_square(m)?;
    if m.is_empty() {
        return Ok(m.clone());
    }
    let (z, t) = schur(m)?;
    branch_guard(&t)?;
    Ok(&z * sqrt_upper(&t) * z.adjoint())
}

/// Matrix hyperbolic arctangent, `atanh(M) = ½ Log((I + M)(I − M)⁻¹)`.
pub fn mat_atanh<T: Real>(m: &CMat<T>) -> Result<CMat<T>> {
    let n = ensure_square(m)?;
    let id = identity::<T>(n);
    let minus = &id - m;
    let ratio = match minus.clone().lu().solve(&(&id + m)) {
        Some(r) if crate::scalar::all_finite(&r) => r,
        _ => {
            return Err(Error::BranchCutViolation { re: 1.0, im: 0.0, distance: 0.0 });
        }
    };
    // (I + M) and (I − M)⁻¹ commute, so the order of the product is irrelevant.
    Ok(mat_log_principal(&ratio)? * real(lit::<T>(0.5)))
}

/// Eigenvalues via the complex Schur form.
pub fn spectrum<T: Real>(m: &CMat<T>) -> Result<Spectrum<T>> {
    ensure_square(m)?;
    if m.is_empty() {
        return Ok(Spectrum { eigenvalues: vec![], condition: T::zero() });
    }
    let (_, t) = schur(m)?;
    let eigenvalues: Vec<_> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    let total = t.norm();
    let mut off = T::zero();
    for j in 0..t.ncols() {
        for i in 0..j {
            off += t[(i, j)].modulus_squared();
        }
    }
    let condition = if total > T::zero() { off.sqrt() / total } else { T::zero() };
    Ok(Spectrum { eigenvalues, condition })
}

/// Orthonormal basis (as columns) of the numerical kernel of `M`: right
/// singular vectors whose singular value is at most `rank_tol·σ_max`.
pub fn kernel_basis<T: Real>(m: &CMat<T>, rank_tol: T) -> CMat<T> {
    let cols = m.ncols();
    if cols == 0 {
        return CMat::<T>::zeros(0, 0);
    }
    let padded = if m.nrows() < cols { m.clone().resize(cols, cols, cplx(T::zero(), T::zero())) } else { m.clone() };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(T::zero(), |a, b| if b > a { b } else { a });
    let thr = rank_tol * smax;
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax == T::zero() || svd.singular_values[i] <= thr)
        .collect();
    let mut basis = CMat::<T>::zeros(cols, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        for r in 0..cols {
            basis[(r, c)] = v_t[(i, r)].conj();
        }
    }
    basis
}

// ---------------------------------------------------------------------------
// Predicates

fn check<T: Real>(residual: T, bound: T) -> Check<T> {
    Check { holds: residual <= bound, residual }
}

/// `‖Im M‖ ≤ tol·max(1, ‖M‖)`.
pub fn is_real<T: Real>(m: &CMat<T>, tol: T) -> Check<T> {
    let r = norm2(&m.map(|z| cplx(T::zero(), z.im)));
    check(r, tol * norm2(m).max(T::one()))
}

/// `‖M − Mᵀ‖ ≤ tol·max(1, ‖M‖)`.
pub fn is_symmetric<T: Real>(m: &CMat<T>, tol: T) -> Check<T> {
    let r = norm2(&(m - m.transpose()));
    check(r, tol * norm2(m).max(T::one()))
}

/// `‖M − M*‖ ≤ tol·max(1, ‖M‖)`.
pub fn is_hermitian<T: Real>(m: &CMat<T>, tol: T) -> Check<T> {
    let r = norm2(&(m - m.adjoint()));
    check(r, tol * norm2(m).max(T::one()))
}

/// Smallest eigenvalue of the Hermitian part `(M + M*)/2`.
pub fn min_eig_hermitian_part<T: Real>(m: &CMat<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    let h = (m + m.adjoint()) * real(lit::<T>(0.5));
    SymmetricEigen::new(h).eigenvalues.iter().copied().fold(T::max_value().unwrap_or(T::one()), |a, b| if b < a { b } else { a })
}

/// Minimum eigenvalue of a real symmetric matrix.
pub fn min_eig_symmetric<T: Real>(m: &RMat<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    let h = (m + m.transpose()) * lit::<T>(0.5);
    SymmetricEigen::new(h).eigenvalues.iter().copied().fold(T::max_value().unwrap_or(T::one()), |a, b| if b < a { b } else { a })
}

/// Minimum eigenvalue of the Hermitian part is at least `−tol·‖M‖`; the
/// residual is the magnitude of the negative part (zero when PSD).
pub fn is_psd<T: Real>(m: &CMat<T>, tol: T) -> Check<T> {
    let lam = min_eig_hermitian_part(m);
    let r = if lam < T::zero() { -lam } else { T::zero() };
    check(r, tol * norm2(m))
}

/// `‖MᵀJM − J‖ ≤ tol·max(1, ‖M‖²)` with `J` the standard symplectic matrix.
pub fn is_symplectic<T: Real>(m: &CMat<T>, tol: T) -> Check<T> {
    let dim = m.nrows();
    if !dim.is_multiple_of(2) || m.ncols() != dim {
        return Check { holds: false, residual: T::max_value().unwrap_or(T::one()) };
    }
    let j = standard_j::<T>(dim / 2);
    let r = norm2(&(m.transpose() * &j * m - &j));
    let s = norm2(m);
    check(r, tol * (s * s).max(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::complexify;
    use num_complex::Complex64 as C;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn diag(v: &[f64]) -> CMat<f64> {
        let n = v.len();
        let mut m = CMat::<f64>::zeros(n, n);
        for (i, &x) in v.iter().enumerate() {
            m[(i, i)] = c(x, 0.0);
        }
        m
    }

    fn lcg_matrix(n: usize, seed: u64, scale: f64) -> CMat<f64> {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        CMat::<f64>::from_fn(n, n, |_, _| c(next() * scale, next() * scale))
    }

    fn rel(a: &CMat<f64>, b: &CMat<f64>) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    /// Truncated Taylor series, summed until terms stop mattering.
    fn exp_series(m: &CMat<f64>) -> CMat<f64> {
        let n = m.nrows();
        let mut term = identity::<f64>(n);
        let mut sum = term.clone();
        for k in 1..200 {
            term = &term * m * c(1.0 / k as f64, 0.0);
            sum += &term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = mat_exp(&CMat::<f64>::zeros(2, 2)).unwrap();
        assert_eq!(e, identity::<f64>(2));
    }

    #[test]
    fn exp_of_nilpotent_terminates() {
        let mut n = CMat::<f64>::zeros(2, 2);
        n[(0, 1)] = c(1.0, 0.0);
        let e = mat_exp(&n).unwrap();
        let mut expected = identity::<f64>(2);
        expected[(0, 1)] = c(1.0, 0.0);
        assert!(rel(&e, &expected) < 1e-15);
    }

    #[test]
    fn exp_matches_taylor_series_across_padé_degrees() {
        for (seed, scale) in [(1, 0.001), (2, 0.05), (3, 0.2), (4, 0.5), (5, 1.0), (6, 3.0)] {
            let m = lcg_matrix(5, seed, scale);
            let got = mat_exp(&m).unwrap();
            let want = exp_series(&m);
            assert!(rel(&got, &want) < 1e-13, "scale {scale}: {}", rel(&got, &want));
        }
    }

    #[test]
    fn exp_of_symplectic_generator_is_symplectic() {
        let q = lcg_matrix(4, 11, 1.0);
        let q = (&q + q.transpose()) * c(0.5, 0.0);
        let f = standard_j::<f64>(2) * &q;
        let e = mat_exp(&f).unwrap();
        let chk = is_symplectic(&e, 1e-12);
        assert!(chk.holds, "residual {}", chk.residual);
    }

    #[test]
    fn log_identity_and_diagonal() {
        let l = mat_log_principal(&identity::<f64>(3)).unwrap();
        assert!(l.norm() < 1e-15);
        let e = std::f64::consts::E;
        let l = mat_log_principal(&diag(&[e, e * e])).unwrap();
        assert!(rel(&l, &diag(&[1.0, 2.0])) < 1e-15);
    }

    #[test]
    fn log_inverts_exp_on_small_matrices() {
        for seed in 0..20 {
            let mut n = lcg_matrix(4, 100 + seed, 1.0);
            let s = 0.5 / norm2(&n);
            n *= c(s, 0.0);
            let back = mat_log_principal(&mat_exp(&n).unwrap()).unwrap();
            assert!(rel(&back, &n) < 1e-10, "seed {seed}: {}", rel(&back, &n));
        }
    }

    #[test]
    fn log_rejects_negative_eigenvalue() {
        let err = mat_log_principal(&diag(&[1.0, -2.0])).unwrap_err();
        assert!(matches!(err, Error::BranchCutViolation { .. }));
        let err = mat_sqrt_principal(&diag(&[0.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::BranchCutViolation { .. }));
    }

    #[test]
    fn log_handles_jordan_block() {
        let mut m = identity::<f64>(3) * c(2.0, 0.0);
        m[(0, 1)] = c(1.0, 0.0);
        m[(1, 2)] = c(1.0, 0.0);
        let l = mat_log_principal(&m).unwrap();
        assert!(rel(&mat_exp(&l).unwrap(), &m) < 1e-13);
    }

    #[test]
    fn sqrt_examples() {
        let r = mat_sqrt_principal(&diag(&[4.0, 9.0])).unwrap();
        assert!(rel(&r, &diag(&[2.0, 3.0])) < 1e-15);
        let r = mat_sqrt_principal(&identity::<f64>(2)).unwrap();
        assert!(rel(&r, &identity::<f64>(2)) < 1e-15);
    }

    #[test]
    fn sqrt_squares_back_and_commutes_with_inverse() {
        for seed in 0..10 {
            let m = mat_exp(&lcg_matrix(4, 300 + seed, 0.6)).unwrap();
            let r = mat_sqrt_principal(&m).unwrap();
            assert!(rel(&(&r * &r), &m) < 1e-12);
            let sp = spectrum(&r).unwrap();
            assert!(sp.eigenvalues.iter().all(|z| z.re > 0.0));
            let ri = mat_sqrt_principal(&inverse(&m).unwrap()).unwrap();
            assert!(rel(&(&ri * &r), &identity::<f64>(4)) < 1e-10);
        }
    }

    #[test]
    fn atanh_examples() {
        let z = mat_atanh(&CMat::<f64>::zeros(2, 2)).unwrap();
        assert!(z.norm() < 1e-16);
        let a = mat_atanh(&diag(&[0.5])).unwrap();
        assert!((a[(0, 0)].re - 0.5493061443340549).abs() < 1e-15);
        let a = mat_atanh(&diag(&[1.0, 0.0])).unwrap_err();
        assert!(matches!(a, Error::BranchCutViolation { .. }));
    }

    #[test]
    fn atanh_inverts_tanh() {
        let m = lcg_matrix(3, 77, 0.2);
        let a = mat_atanh(&m).unwrap();
        // tanh(A) = (e^{2A} − I)(e^{2A} + I)⁻¹
        let e2 = mat_exp(&(&a * c(2.0, 0.0))).unwrap();
        let id = identity::<f64>(3);
        let th = solve(&(&e2 + &id).transpose(), &(&e2 - &id).transpose()).unwrap().transpose();
        assert!(rel(&th, &m) < 1e-12);
    }

    #[test]
    fn spectrum_of_j_is_plus_minus_i() {
        let sp = spectrum(&standard_j::<f64>(1)).unwrap();
        let mut ims: Vec<f64> = sp.eigenvalues.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
        assert!(sp.eigenvalues.iter().all(|z| z.re.abs() < 1e-14));
    }

    #[test]
    fn spectrum_of_j_times_psd_is_imaginary() {
        for seed in 0..10 {
            let l = lcg_matrix(6, 500 + seed, 1.0);
            let a = &l * l.adjoint();
            let sp = spectrum(&(standard_j::<f64>(3) * &a)).unwrap();
            let na = norm2(&a);
            for z in sp.eigenvalues {
                assert!(z.re.abs() <= 1e-10 * na, "seed {seed}: {z}");
            }
        }
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_basis(&CMat::<f64>::zeros(2, 2), 1e-9).ncols(), 2);
        assert_eq!(kernel_basis(&identity::<f64>(2), 1e-9).ncols(), 0);
        let k = kernel_basis(&diag(&[1.0, 1e-14]), 1e-9);
        assert_eq!(k.ncols(), 1);
        assert!((k[(1, 0)].modulus() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_of_wide_matrix() {
        let m = complexify(&RMat::<f64>::from_row_slice(1, 3, &[1.0, 1.0, 0.0]));
        let k = kernel_basis(&m, 1e-9);
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).norm() < 1e-14);
        assert!((k.adjoint() * &k - identity::<f64>(2)).norm() < 1e-14);
    }

    #[test]
    fn predicate_examples() {
        let j = standard_j::<f64>(1);
        let chk = is_symplectic(&j, 1e-14);
        assert!(chk.holds && chk.residual == 0.0);
        assert!(is_psd(&diag(&[1.0, 0.0]), 1e-12).holds);
        assert!(!is_psd(&diag(&[1.0, -0.1]), 1e-12).holds);
        assert!(is_real(&diag(&[1.0]), 1e-14).holds);
        assert!(!is_symmetric(&j, 1e-12).holds);
        assert!(is_hermitian(&(j.clone() * c(0.0, 1.0)), 1e-14).holds);
    }

    #[test]
    fn works_in_single_precision() {
        let m = CMat::<f32>::from_fn(3, 3, |i, j| Complex::new(0.1 * (i as f32) - 0.05 * (j as f32), 0.02 * (i + j) as f32));
        let e = mat_exp(&m).unwrap();
        let l = mat_log_principal(&e).unwrap();
        assert!((&l - &m).norm() < 1e-4);
    }
}
