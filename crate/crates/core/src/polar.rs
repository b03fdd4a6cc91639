//! Time-dependent factors of the polar decomposition
//! `e^{−2itJQ} = e^{−2itJA_t} e^{2tJB_t}` and the Mehler symbol of `e^{−t a_t^w}`.
//!
//! With `K_t = e^{−2itJQ} e^{−2itJQ̄}` and `G_t = √K_t`:
//!
//! * `A_t = −(4itJ)⁻¹ Log K_t` (equivalently `−(itJ)⁻¹ atanh Ψ_t` with
//!   `Ψ_t = (G_t − I)(G_t + I)⁻¹`), real symmetric and positive semidefinite;
//! * `M_t = −(itJ)⁻¹ Ψ_t`, the matrix of the Mehler exponent, `0 ⪯ M_t ⪯ A_t`;
//! * `H_t = e^{2itJA_t} e^{−2itJQ}`, real symplectic;
//! * `B_t = (2tJ)⁻¹ Log H_t`, defined while `‖H_t − I‖ < 1`.
//!
//! At the matrix level the factorization is exact, so the sign ambiguity
//! of the corresponding operator identity does not appear.

use std::collections::BTreeMap;

use nalgebra::ComplexField;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matfun::{
    identity, inverse, is_symplectic, mat_atanh, mat_exp, mat_log_principal, mat_sqrt_principal, min_eig_hermitian_part,
    norm2, solve, spectrum,
};
use crate::quadrature::{integrate, integrate_adaptive};
use crate::scalar::{complexify, cplx, im_part, imag_unit, lit, re_part, real, to_f64, tol_floor, CMat, Real};
use crate::symbols::{standard_j, QuadraticSymbol};

/// Below this `|t|` the factors are replaced by their analytic limits.
pub const SMALL_T: f64 = 1e-8;
/// Default and maximal node counts of the adaptive quadrature.
pub const DEFAULT_NODES: usize = 64;
pub const MAX_NODES: usize = 512;
const QUADRATURE_TOL: f64 = 1e-10;
const SPECTRUM_TOL: f64 = 1e-8;
const CLUSTER_RADIUS: f64 = 1e-4;

fn is_small<T: Real>(t: T) -> bool {
    t.abs() < lit(SMALL_T)
}

fn ensure_finite<T: Real>(t: T) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time {t} is not finite")))
    }
}

/// `‖a − b‖ / ‖b‖`, or the absolute difference when `b = 0`.
pub fn rel_residual<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    let d = norm2(&(a - b));
    let s = norm2(b);
    if s > T::zero() {
        d / s
    } else {
        d
    }
}

/// `e^{−2isJM}`.
fn flow<T: Real>(m: &CMat<T>, s: T) -> Result<CMat<T>> {
    let n = m.nrows() / 2;
    mat_exp(&(standard_j::<T>(n) * m * cplx(T::zero(), lit::<T>(-2.0) * s)))
}

/// `e^{−2itJQ}`, the classical flow of `q`.
pub fn symbol_flow<T: Real>(q: &QuadraticSymbol<T>, t: T) -> Result<CMat<T>> {
    flow(q.matrix(), t)
}

/// `K_t = e^{−2itJQ} e^{−2itJQ̄}`; its spectrum must be positive real.
pub fn k_matrix<T: Real>(q: &QuadraticSymbol<T>, t: T) -> Result<CMat<T>> {
    ensure_finite(t)?;
    let k = flow(q.matrix(), t)? * flow(&q.conj_matrix(), t)?;
    // eigenvalues come in pairs (λ, 1/λ); the small one is only accurate to ε‖K‖
    let absolute = lit::<T>(1000.0) * T::default_epsilon() * norm2(&k);
    for z in cluster_means(&spectrum(&k)?.eigenvalues) {
        if z.im.abs() > tol_floor::<T>(SPECTRUM_TOL, 1000.0) * z.modulus() + absolute || z.re <= T::zero() {
            return Err(Error::SpectrumViolation { re: to_f64(z.re), im: to_f64(z.im) });
        }
    }
    Ok(k)
}

/// Means of eigenvalue clusters (single-linkage within `CLUSTER_RADIUS`
/// relative). A defective eigenvalue of multiplicity `m` is computed only to
/// `O(ε^{1/m})`, but the mean of its cluster stays accurate to `O(ε)`.
fn cluster_means<T: Real>(eigs: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut label: Vec<usize> = (0..eigs.len()).collect();
    for i in 0..eigs.len() {
        for j in (i + 1)..eigs.len() {
            let scale = eigs[i].modulus().max(eigs[j].modulus()).max(T::one());
            if (eigs[i] - eigs[j]).modulus() <= lit::<T>(CLUSTER_RADIUS) * scale {
                let (from, to) = (label[j], label[i]);
                for l in label.iter_mut() {
                    if *l == from {
                        *l = to;
                    }
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, (Complex<T>, usize)> = std::collections::BTreeMap::new();
    for (z, l) in eigs.iter().zip(&label) {
        let e = groups.entry(*l).or_insert((cplx(T::zero(), T::zero()), 0));
        e.0 += *z;
        e.1 += 1;
    }
    groups.into_values().map(|(sum, count)| sum / lit::<T>(count as f64)).collect()
}

/// `Γ_t = ∫₀ᵗ E_s* Re Q E_s ds` with `E_s = e^{−2isJQ̄}`, so that
/// `K_t = I − 4iJΓ_t`.
pub fn gamma_matrix<T: Real>(q: &QuadraticSymbol<T>, t: T, nodes: usize) -> Result<CMat<T>> {
    ensure_finite(t)?;
    if nodes < 2 {
        return Err(Error::InvalidArgument("quadrature needs at least two nodes".into()));
    }
    let d = q.dim();
    if t == T::zero() {
        return Ok(CMat::zeros(d, d));
    }
    let re = complexify(&q.re());
    let qbar = q.conj_matrix();
    // exp cannot fail on a square finite input; fall back to NaN otherwise
    let integrand = |s: T| match flow(&qbar, s) {
        Ok(e) => e.adjoint() * &re * e,
        Err(_) => CMat::from_element(d, d, cplx(lit::<T>(f64::NAN), lit::<T>(f64::NAN))),
    };
    let g = integrate(integrand, T::zero(), t, nodes);
    if crate::scalar::all_finite(&g) {
        Ok(g)
    } else {
        Err(Error::NonFinite)
    }
}

/// `G_t = √K_t`, a complex symplectic matrix.
pub fn g_matrix<T: Real>(q: &QuadraticSymbol<T>, t: T) -> Result<CMat<T>> {
    mat_sqrt_principal(&k_matrix(q, t)?)
}

fn j_over<T: Real>(n: usize, m: &CMat<T>, denom: Complex<T>) -> CMat<T> {
    standard_j::<T>(n) * m / denom
}

/// `A_t = J Log(K_t) / (4it)`; `Re Q` for `|t| < 1e−8`.
pub fn a_matrix<T: Real>(q: &QuadraticSymbol<T>, t: T) -> Result<CMat<T>> {
    ensure_finite(t)?;
    if is_small(t) {
        return Ok(complexify(&q.re()));
    }
    a_from_k(q, &k_matrix(q, t)?, t)
}

/// For real `Q`, `K_t = e^{−4itJQ}` and `−4itJQ` has real spectrum, so the
/// principal logarithm is known exactly and `A_t = Q`; computing it from
/// `K_t` would only lose `ε‖K_t‖`.
fn a_from_k<T: Real>(q: &QuadraticSymbol<T>, k: &CMat<T>, t: T) -> Result<CMat<T>> {
    if q.is_real() {
        return Ok(q.matrix().clone());
    }
    let log = mat_log_principal(k)?;
    Ok(j_over(q.n(), &log, cplx(T::zero(), lit::<T>(4.0) * t)))
}

/// `Ψ_t = (G_t − I)(G_t + I)⁻¹`.
fn psi<T: Real>(g: &CMat<T>) -> Result<CMat<T>> {
    let id = identity::<T>(g.nrows());
    let shifted = g + &id;
    let dist = spectrum(&shifted)?.eigenvalues.iter().map(|z| z.modulus()).fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b));
    if dist < lit::<T>(1e-12) * norm2(g).max(T::one()) {
        return Err(Error::SingularShift { distance: to_f64(dist) });
    }
    // (G − I) and (G + I)⁻¹ commute
    solve(&shifted, &(g - &id))
}

/// `A_t = −(itJ)⁻¹ atanh Ψ_t`, an independent route to [`a_matrix`].
pub fn a_matrix_atanh<T: Real>(q: &QuadraticSymbol<T>, t: T) -> Result<CMat<T>> {
    ensure_finite(t)?;
    if is_small(t) {
        return Ok(complexify(&q.re()));
    }
    let at = mat_atanh(&psi(&g_matrix(q, t)?)?)?;
    Ok(j_over(q.n(), &at, cplx(T::zero(), t)))
}

/// `M_t = −(itJ)⁻¹ Ψ_t`; `Re Q` for `|t| < 1e−8`.
pub fn m_matrix<T: Real>(q: &QuadraticSymbol<T>, t: T) -> Result<CMat<T>> {
    ensure_finite(t)?;
    if is_small(t) {
        return Ok(complexify(&q.re()));
    }
    m_from_g(q, &g_matrix(q, t)?, t)
}

fn m_from_g<T: Real>(q: &QuadraticSymbol<T>, g: &CMat<T>, t: T) -> Result<CMat<T>> {
    Ok(j_over(q.n(), &psi(g)?, cplx(T::zero(), t)))
}

/// `∫₀¹ (E_{αt} Φ_t)* Re Q (E_{αt} Φ_t) dα` with `Φ_t = 2(G_t + I)⁻¹` and
/// `E_s = e^{−2isJQ̄}`, evaluated by doubling Gauss–Legendre from `nodes`.
/// Returns the estimate and the node count used.
pub fn m_integral<T: Real>(q: &QuadraticSymbol<T>, t: T, nodes: usize) -> Result<(CMat<T>, usize)> {
    ensure_finite(t)?;
    if is_small(t) {
        return Ok((complexify(&q.re()), 0));
    }
    let g = g_matrix(q, t)?;
    m_integral_from_g(q, &g, t, nodes)
}

fn m_integral_from_g<T: Real>(q: &QuadraticSymbol<T>, g: &CMat<T>, t: T, nodes: usize) -> Result<(CMat<T>, usize)> {
    let d = q.dim();
    let id = identity::<T>(d);
    let phi = inverse(&(g + &id))? * real(lit::<T>(2.0));
    let re = complexify(&q.re());
    let qbar = q.conj_matrix();
    let integrand = |alpha: T| match flow(&qbar, alpha * t) {
        Ok(e) => {
            let v = e * &phi;
            v.adjoint() * &re * v
        }
        Err(_) => CMat::from_element(d, d, cplx(lit::<T>(f64::NAN), lit::<T>(f64::NAN))),
    };
    let (m, used) = integrate_adaptive(integrand, T::zero(), T::one(), nodes, lit(QUADRATURE_TOL), MAX_NODES.max(nodes));
    if crate::scalar::all_finite(&m) {
        Ok((m, used))
    } else {
        Err(Error::NonFinite)
    }
}

/// `H_t = e^{2itJA_t} e^{−2itJQ}`.
pub fn h_matrix<T: Real>(q: &QuadraticSymbol<T>, t: T) -> Result<CMat<T>> {
    let a = a_matrix(q, t)?;
    h_from_a(q, &a, t)
}

fn h_from_a<T: Real>(q: &QuadraticSymbol<T>, a: &CMat<T>, t: T) -> Result<CMat<T>> {
    Ok(flow(a, -t)? * flow(q.matrix(), t)?)
}

/// `B_t = (2tJ)⁻¹ Log H_t` while `‖H_t − I‖ < 1`, else `None`; `Im Q` for
/// `|t| < 1e−8`.
pub fn b_matrix<T: Real>(q: &QuadraticSymbol<T>, t: T) -> Result<Option<CMat<T>>> {
    ensure_finite(t)?;
    if is_small(t) {
        return Ok(Some(complexify(&q.im())));
    }
    b_from_h(q, &h_matrix(q, t)?, t)
}

fn b_from_h<T: Real>(q: &QuadraticSymbol<T>, h: &CMat<T>, t: T) -> Result<Option<CMat<T>>> {
    // For real symplectic H, ‖H⁻¹ − I‖ = ‖J⁻¹Hᵀ J − I‖ = ‖H − I‖, so one
    // test covers both conditions of the window.
    if norm2(&(h - identity::<T>(h.nrows()))) >= T::one() {
        return Ok(None);
    }
    let log = mat_log_principal(h)?;
    Ok(Some(j_over(q.n(), &log, real(lit::<T>(-2.0) * t))))
}

fn h_distance<T: Real>(q: &QuadraticSymbol<T>, t: T) -> Result<T> {
    let h = h_matrix(q, t)?;
    Ok(norm2(&(&h - identity::<T>(h.nrows()))))
}

/// Largest `t ≤ t_max` with `‖H_s − I‖ < 1` at every sampled `s ≤ t`,
/// refined by bisection to relative precision `1e−6`.
pub fn validity_radius<T: Real>(q: &QuadraticSymbol<T>, t_max: T, steps: usize) -> Result<T> {
    if !(t_max > T::zero()) || steps < 8 {
        return Err(Error::InvalidArgument("validity_radius needs t_max > 0 and at least 8 steps".into()));
    }
    let h = t_max / lit::<T>(steps as f64);
    let mut lo = T::zero();
    for i in 1..=steps {
        let s = h * lit::<T>(i as f64);
        if h_distance(q, s)? >= T::one() {
            let mut hi = s;
            while hi - lo > lit::<T>(1e-6) * hi {
                let mid = (lo + hi) * lit::<T>(0.5);
                if h_distance(q, mid)? < T::one() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(lo);
        }
        lo = s;
    }
    Ok(t_max)
}

/// All factors at one time, with the residual of every structural identity.
#[derive(Debug, Clone)]
pub struct PolarFactors<T: Real> {
    pub t: T,
    pub k: CMat<T>,
    pub g: CMat<T>,
    pub a: CMat<T>,
    pub m: CMat<T>,
    pub h: CMat<T>,
    pub b: Option<CMat<T>>,
    pub within_validity: bool,
    /// Nodes used by the integral representation of `M_t`.
    pub quadrature_nodes: usize,
    pub residuals: BTreeMap<&'static str, T>,
}

impl<T: Real> PolarFactors<T> {
    pub fn residual(&self, name: &str) -> Option<T> {
        self.residuals.get(name).copied()
    }

    /// `Φ_t = 2(G_t + I)⁻¹`.
    pub fn phi(&self) -> Result<CMat<T>> {
        Ok(inverse(&(&self.g + identity::<T>(self.g.nrows())))? * real(lit::<T>(2.0)))
    }
}

// The symbol-side matrices A_t, M_t, B_t may vanish identically (purely
// imaginary or real q), so their residuals are relative to max(‖X‖, ‖Q‖).

fn negative_part<T: Real>(m: &CMat<T>, floor: T) -> T {
    let lam = min_eig_hermitian_part(m);
    let neg = if lam < T::zero() { -lam } else { T::zero() };
    relative(neg, norm2(m).max(floor))
}

fn relative<T: Real>(x: T, scale: T) -> T {
    if scale > T::zero() {
        x / scale
    } else {
        x
    }
}

fn imaginary_ratio<T: Real>(m: &CMat<T>, floor: T) -> T {
    relative(norm2(&complexify(&im_part(m))), norm2(m).max(floor))
}

fn asymmetry<T: Real>(m: &CMat<T>, adjoint: bool, floor: T) -> T {
    let other = if adjoint { m.adjoint() } else { m.transpose() };
    relative(norm2(&(m - other)), norm2(m).max(floor))
}

fn symplectic_residual<T: Real>(m: &CMat<T>) -> T {
    let s = norm2(m);
    is_symplectic(m, T::zero()).residual / (s * s).max(T::one())
}

/// `cos(tJA)` and `sin(tJA)` through `e^{±itJA}`.
fn cos_sin<T: Real>(a: &CMat<T>, t: T) -> Result<(CMat<T>, CMat<T>)> {
    let n = a.nrows() / 2;
    let x = standard_j::<T>(n) * a * real(t);
    let ep = mat_exp(&(&x * imag_unit::<T>()))?;
    let em = mat_exp(&(&x * -imag_unit::<T>()))?;
    let c = (&ep + &em) * real(lit::<T>(0.5));
    let s = (&ep - &em) * cplx(T::zero(), lit::<T>(-0.5));
    Ok((c, s))
}

/// `‖tan(tJA_t) − tJM_t‖ / ‖tJM_t‖`.
pub fn tan_identity_residual<T: Real>(q: &QuadraticSymbol<T>, a: &CMat<T>, m: &CMat<T>, t: T) -> Result<T> {
    let (c, s) = cos_sin(a, t)?;
    // tan = sin·cos⁻¹; both are functions of tJA and commute
    let tan = solve(&c.transpose(), &s.transpose())?.transpose();
    let rhs = standard_j::<T>(q.n()) * m * real(t);
    Ok(rel_residual(&tan, &rhs))
}

/// Computes every factor at time `t ≥ 0` together with the residuals
///
/// * `factorization`: `‖e^{−2itJA_t} e^{2tJB_t} − e^{−2itJQ}‖ / ‖e^{−2itJQ}‖` (only with `B_t`),
/// * `log_identity`: `e^{−4itJA_t}` against `K_t`,
/// * `atanh_route`: the two constructions of `A_t`,
/// * `integral_rep`: `M_t` against its integral representation,
/// * `tan_identity`: `tan(tJA_t)` against `tJM_t`,
/// * `symplectic_g`, `symplectic_h`, `h_real`, `a_imag`, `a_asym`, `a_psd`,
///   `m_herm`, `m_psd`, `psd_gap` (negative part of `A_t − M_t`), and for
///   `B_t` also `b_imag`, `b_asym`, `b_exp`.
pub fn polar_factors<T: Real>(q: &QuadraticSymbol<T>, t: T) -> Result<PolarFactors<T>> {
    ensure_finite(t)?;
    if t < T::zero() {
        return Err(Error::InvalidArgument("polar factors are defined for t >= 0".into()));
    }
    let d = q.dim();
    let id = identity::<T>(d);
    let mut res = BTreeMap::new();
    let eq = symbol_flow(q, t)?;

    let (k, g, a, m, h, b, nodes) = if is_small(t) {
        let a = complexify(&q.re());
        (id.clone(), id.clone(), a.clone(), a, id.clone(), Some(complexify(&q.im())), 0)
    } else {
        let k = k_matrix(q, t)?;
        let g = mat_sqrt_principal(&k)?;
        let a = a_from_k(q, &k, t)?;
        let a_atanh = j_over(q.n(), &mat_atanh(&psi(&g)?)?, cplx(T::zero(), t));
        res.insert("atanh_route", rel_residual(&a_atanh, &a));
        res.insert("log_identity", rel_residual(&flow(&a, lit::<T>(2.0) * t)?, &k));
        let m = m_from_g(q, &g, t)?;
        let (m_int, nodes) = m_integral_from_g(q, &g, t, DEFAULT_NODES)?;
        res.insert("integral_rep", rel_residual(&m_int, &m));
        let h = h_from_a(q, &a, t)?;
        let b = b_from_h(q, &h, t)?;
        (k, g, a, m, h, b, nodes)
    };

    res.insert("symplectic_g", symplectic_residual(&g));
    res.insert("symplectic_h", symplectic_residual(&h));
    let qn = norm2(q.matrix());
    res.insert("h_real", imaginary_ratio(&h, T::zero()));
    res.insert("a_imag", imaginary_ratio(&a, qn));
    res.insert("a_asym", asymmetry(&a, false, qn));
    res.insert("a_psd", negative_part(&a, qn));
    res.insert("m_herm", asymmetry(&m, true, qn));
    res.insert("m_psd", negative_part(&m, qn));
    let lam = min_eig_hermitian_part(&(&a - &m));
    res.insert("psd_gap", relative(if lam < T::zero() { -lam } else { T::zero() }, norm2(&a).max(qn)));
    if !is_small(t) {
        res.insert("tan_identity", tan_identity_residual(q, &a, &m, t)?);
    }
    if let Some(b) = &b {
        let n = q.n();
        let eb = mat_exp(&(standard_j::<T>(n) * b * real(lit::<T>(2.0) * t)))?;
        res.insert("b_imag", imaginary_ratio(b, qn));
        res.insert("b_asym", asymmetry(b, false, qn));
        res.insert("b_exp", rel_residual(&eb, &h));
        let ea = flow(&a, t)?;
        res.insert("factorization", rel_residual(&(ea * eb), &eq));
    }
    let within_validity = b.is_some();
    Ok(PolarFactors { t, k, g, a, m, h, b, within_validity, quadrature_nodes: nodes, residuals: res })
}

/// Weyl symbol `prefactor · e^{−t Xᵀ M X}` of `e^{−t a_t^w}`.
#[derive(Debug, Clone)]
pub struct MehlerSymbol<T: Real> {
    pub t: T,
    /// `det(cos(tJA_t))^{−1/2}`.
    pub prefactor: T,
    pub m: CMat<T>,
}

pub fn mehler_symbol<T: Real>(q: &QuadraticSymbol<T>, t: T) -> Result<MehlerSymbol<T>> {
    ensure_finite(t)?;
    if is_small(t) {
        return Ok(MehlerSymbol { t, prefactor: T::one(), m: complexify(&q.re()) });
    }
    let a = a_matrix(q, t)?;
    let g = g_matrix(q, t)?;
    let m = m_from_g(q, &g, t)?;
    let (c, _) = cos_sin(&a, t)?;
    let det = c.determinant();
    if det.modulus() < lit::<T>(1e-12) || det.re <= T::zero() {
        return Err(Error::DegenerateCosine { det: to_f64(det.re) });
    }
    Ok(MehlerSymbol { t, prefactor: T::one() / det.re.sqrt(), m })
}

/// `‖e^{−i tanh t JQ_x} e^{−i sinh 2t JQ_ξ} e^{−i tanh t JQ_x} − e^{−2itJ}‖`
/// for `Q_x = diag(1, 0)`, `Q_ξ = diag(0, 1)`: the matrix form of
/// `e^{−tH} = e^{−½ tanh t |x|²} e^{½ sinh 2t Δ} e^{−½ tanh t |x|²}`.
pub fn harmonic_split_check<T: Real>(t: T) -> Result<T> {
    ensure_finite(t)?;
    let j = standard_j::<T>(1);
    let mut qx = CMat::<T>::zeros(2, 2);
    qx[(0, 0)] = real(T::one());
    let mut qxi = CMat::<T>::zeros(2, 2);
    qxi[(1, 1)] = real(T::one());
    let tanh = t.tanh();
    let sinh2 = (lit::<T>(2.0) * t).sinh();
    let ex = mat_exp(&(&j * &qx * cplx(T::zero(), -tanh)))?;
    let exi = mat_exp(&(&j * &qxi * cplx(T::zero(), -sinh2)))?;
    let lhs = &ex * exi * &ex;
    let rhs = mat_exp(&(&j * cplx(T::zero(), lit::<T>(-2.0) * t)))?;
    Ok(norm2(&(lhs - rhs)))
}

/// Real part of a matrix that is real up to rounding, symmetrized.
pub fn real_symmetric<T: Real>(m: &CMat<T>) -> crate::scalar::RMat<T> {
    let r = re_part(m);
    (&r + r.transpose()) * lit::<T>(0.5)
}
