//! Singular space `S = ⋂_j Ker(Re F (Im F)ʲ)`, its stratification
//! `V₀ ⊇ V₁ ⊇ … ⊇ V_{k₀} = S` and the index of a phase-space direction.

use nalgebra::SVD;

use crate::error::{Error, Result};
use crate::matfun::norm2_real;
use crate::scalar::{lit, to_f64, RMat, RVec, Real};
use crate::symbols::{hamilton_map, QuadraticSymbol};

/// Minimum ratio between the singular values on either side of the rank
/// threshold.
pub const MIN_GAP: f64 = 10.0;
/// Membership tests use `MEMBERSHIP_FACTOR · rank_tol` relative tolerance.
pub const MEMBERSHIP_FACTOR: f64 = 100.0;

#[derive(Debug, Clone)]
pub struct SingularSpaceInfo<T: Real> {
    /// Orthonormal basis of `S` (columns, possibly none).
    pub s_basis: RMat<T>,
    /// Orthonormal basis of `S^⊥`.
    pub sperp_basis: RMat<T>,
    pub k0: usize,
    /// Bases of `V₀, …, V_{k₀}` with `V_k = ⋂_{j ≤ k} Ker(Re F (Im F)ʲ)`.
    pub vk_bases: Vec<RMat<T>>,
    pub rank_tol: T,
}

impl<T: Real> SingularSpaceInfo<T> {
    pub fn dim(&self) -> usize {
        self.s_basis.nrows()
    }

    pub fn s_dim(&self) -> usize {
        self.s_basis.ncols()
    }

    pub fn vk_dims(&self) -> Vec<usize> {
        self.vk_bases.iter().map(|b| b.ncols()).collect()
    }
}

/// Kernel of `m` with the singular-value gap across the threshold.
///
/// Returns the basis and `min σ above / max σ at-or-below` (infinite when
/// the split is exact).
fn kernel_with_gap<T: Real>(m: &RMat<T>, threshold: T) -> (RMat<T>, T) {
    let cols = m.ncols();
    let padded = if m.nrows() < cols { m.clone().resize(cols, cols, T::zero()) } else { m.clone() };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let mut above: Option<T> = None;
    let mut below: Option<T> = None;
    let mut keep = Vec::new();
    for i in 0..sv.len() {
        if sv[i] <= threshold {
            keep.push(i);
            below = Some(below.map_or(sv[i], |b: T| b.max(sv[i])));
        } else {
            above = Some(above.map_or(sv[i], |a: T| a.min(sv[i])));
        }
    }
    let inf = T::max_value().unwrap_or(T::one());
    let gap = match (above, below) {
        (Some(a), Some(b)) if b > T::zero() => a / b,
        (Some(_), Some(_)) => inf,
        (Some(a), None) if threshold > T::zero() => a / threshold,
        (None, Some(b)) if b > T::zero() => threshold / b,
        _ => inf,
    };
    let mut basis = RMat::<T>::zeros(cols, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        for r in 0..cols {
            basis[(r, c)] = v_t[(i, r)];
        }
    }
    (basis, gap)
}

/// Orthonormal basis of the orthogonal complement of the column span of `b`
/// (assumed orthonormal) in `ℝᵈ`.
fn complement<T: Real>(b: &RMat<T>, d: usize) -> RMat<T> {
    if b.ncols() == 0 {
        return RMat::identity(d, d);
    }
    // singular values of bᵀ are exactly 0 or 1
    kernel_with_gap(&b.transpose(), lit(0.5)).0
}

/// Computes `S`, `k₀` and the `V_k` chain by incremental kernel
/// intersection: `W_{j+1} = W_j · Ker(Re F (Im F)ʲ W_j)`.
pub fn singular_space<T: Real>(q: &QuadraticSymbol<T>, rank_tol: T) -> Result<SingularSpaceInfo<T>> {
    if !(rank_tol > T::zero()) {
        return Err(Error::InvalidArgument("rank_tol must be positive".into()));
    }
    let d = q.dim();
    let hm = hamilton_map(q);
    let fnorm = norm2_real(&hm.re_f).max(norm2_real(&hm.im_f)).max(crate::matfun::norm2(&hm.f));
    let mut w = RMat::<T>::identity(d, d);
    let mut chain = Vec::with_capacity(d);
    let mut op = hm.re_f.clone();
    for j in 0..d {
        if w.ncols() > 0 {
            let scale = fnorm.powi(j as i32 + 1);
            let (kernel, gap) = kernel_with_gap(&(&op * &w), rank_tol * scale);
            if gap < lit(MIN_GAP) {
                return Err(Error::IllConditioned { step: j, gap: to_f64(gap) });
            }
            w = &w * kernel;
        }
        chain.push(w.clone());
        op = &op * &hm.im_f;
    }
    let s_basis = chain.last().cloned().unwrap_or_else(|| RMat::zeros(d, 0));
    let s_dim = s_basis.ncols();
    let k0 = chain.iter().position(|b| b.ncols() == s_dim).unwrap_or(0);
    chain.truncate(k0 + 1);
    let sperp_basis = complement(&s_basis, d);
    Ok(SingularSpaceInfo { s_basis, sperp_basis, k0, vk_bases: chain, rank_tol })
}

fn projection_norm<T: Real>(basis: &RMat<T>, x: &RVec<T>) -> T {
    if basis.ncols() == 0 {
        T::zero()
    } else {
        (basis.transpose() * x).norm()
    }
}

/// Index `k_{X₀}`: the least `k` with `X₀ ∈ V_k^⊥`.
pub fn index_of<T: Real>(info: &SingularSpaceInfo<T>, x0: &RVec<T>) -> Result<usize> {
    if x0.len() != info.dim() {
        return Err(Error::DimensionMismatch { expected: info.dim(), got: x0.len() });
    }
    let len = x0.norm();
    if len == T::zero() {
        return Err(Error::ZeroVector);
    }
    let tol = lit::<T>(MEMBERSHIP_FACTOR) * info.rank_tol * len;
    let ps = projection_norm(&info.s_basis, x0);
    if ps > tol {
        return Err(Error::NotInSperp { projection: to_f64(ps / len) });
    }
    Ok(info
        .vk_bases
        .iter()
        .position(|v| projection_norm(v, x0) <= tol)
        .unwrap_or(info.k0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport<T: Real> {
    /// `‖Re F · S_basis‖`.
    pub re_f_residual: T,
    /// `‖(I − Π_S) Im F · S_basis‖`.
    pub im_f_deviation: T,
}

pub fn check_singular_stability<T: Real>(q: &QuadraticSymbol<T>, info: &SingularSpaceInfo<T>) -> StabilityReport<T> {
    let s = &info.s_basis;
    if s.ncols() == 0 {
        return StabilityReport { re_f_residual: T::zero(), im_f_deviation: T::zero() };
    }
    let hm = hamilton_map(q);
    let img = &hm.im_f * s;
    let outside = &img - s * (s.transpose() * &img);
    StabilityReport { re_f_residual: norm2_real(&(&hm.re_f * s)), im_f_deviation: norm2_real(&outside) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::complexify;
    use num_complex::Complex64 as C;

    fn real_diag(v: &[f64]) -> QuadraticSymbol<f64> {
        QuadraticSymbol::new(complexify(&RMat::from_diagonal(&RVec::from_row_slice(v)))).unwrap()
    }

    fn unit(d: usize, i: usize) -> RVec<f64> {
        let mut v = RVec::zeros(d);
        v[i] = 1.0;
        v
    }

    fn kolmogorov() -> QuadraticSymbol<f64> {
        let mut q = crate::scalar::CMat::<f64>::zeros(4, 4);
        q[(3, 3)] = C::new(1.0, 0.0);
        q[(1, 2)] = C::new(0.0, 0.5);
        q[(2, 1)] = C::new(0.0, 0.5);
        QuadraticSymbol::new(q).unwrap()
    }

    #[test]
    fn harmonic_has_trivial_singular_space() {
        let info = singular_space(&real_diag(&[1.0, 1.0]), 1e-9).unwrap();
        assert_eq!((info.s_dim(), info.k0), (0, 0));
        assert_eq!(info.sperp_basis.ncols(), 2);
        assert_eq!(index_of(&info, &RVec::from_row_slice(&[0.3, -2.0])).unwrap(), 0);
        let rep = check_singular_stability(&real_diag(&[1.0, 1.0]), &info);
        assert_eq!((rep.re_f_residual, rep.im_f_deviation), (0.0, 0.0));
    }

    #[test]
    fn real_symbol_singular_space_is_kernel() {
        let info = singular_space(&real_diag(&[0.0, 0.0, 0.0, 1.0]), 1e-9).unwrap();
        assert_eq!((info.s_dim(), info.k0), (3, 0));
        assert!(info.s_basis.row(3).norm() < 1e-15);
    }

    #[test]
    fn kolmogorov_chain() {
        let q = kolmogorov();
        let info = singular_space(&q, 1e-9).unwrap();
        assert_eq!(info.k0, 1);
        assert_eq!(info.vk_dims(), vec![3, 2]);
        // S is spanned by the x directions
        assert!(info.s_basis.rows(2, 2).norm() < 1e-14);
        assert_eq!(index_of(&info, &unit(4, 2)).unwrap(), 1);
        assert_eq!(index_of(&info, &unit(4, 3)).unwrap(), 0);
        assert_eq!(index_of(&info, &(unit(4, 2) * 7.5)).unwrap(), 1);
        assert!(matches!(index_of(&info, &unit(4, 0)), Err(Error::NotInSperp { .. })));
        assert!(matches!(index_of(&info, &RVec::zeros(4)), Err(Error::ZeroVector)));
        let rep = check_singular_stability(&q, &info);
        assert!(rep.re_f_residual < 1e-12 && rep.im_f_deviation < 1e-12);
    }

    #[test]
    fn ambiguous_rank_is_reported() {
        let q = real_diag(&[1.0, 3e-9]);
        assert!(matches!(singular_space(&q, 1e-9), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn complement_is_orthonormal() {
        let info = singular_space(&kolmogorov(), 1e-9).unwrap();
        let p = &info.sperp_basis;
        assert_eq!(p.ncols(), 2);
        assert!((p.transpose() * p - RMat::<f64>::identity(2, 2)).norm() < 1e-14);
        assert!((p.transpose() * &info.s_basis).norm() < 1e-14);
    }
}
