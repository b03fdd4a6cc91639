//! Numerical certification of the anisotropic lower bound
//! `a_t(X) ≥ c Σ_{k ≤ k₀} t^{2k} Re q((Im F)ᵏX)` and of the index-governed
//! scaling of direction bounds.
//!
//! All `t`-sweeps evaluate grid points independently in parallel and
//! collect them in grid order.

use nalgebra::SymmetricEigen;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matfun::min_eig_symmetric;
use crate::polar::{a_matrix, real_symmetric};
use crate::scalar::{lit, to_f64, RMat, RVec, Real};
use crate::singular::{index_of, SingularSpaceInfo};
use crate::symbols::{kappa_matrix_with, pk_matrix, KappaVariant, QuadraticSymbol};

/// Tolerance on fitted exponents of direction bounds.
pub const DIRECTION_SLOPE_TOL: f64 = 0.15;
/// Tolerance on the fitted coercivity exponent.
pub const COERCIVITY_SLOPE_TOL: f64 = 0.1;
/// `c(t)` may shrink by at most this factor per halving of `t` over the
/// three smallest grid points.
pub const MIN_HALVING_RATE: f64 = 0.9;
/// Steps of the local refinement `t·2^{−k/2}` used by [`direction_bound`].
pub const REFINEMENT_STEPS: usize = 5;

/// `n` points from `start` to `stop`, logarithmically spaced.
pub fn log_grid<T: Real>(start: T, stop: T, n: usize) -> Vec<T> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => {
            let (a, b) = (start.ln(), stop.ln());
            let step = (b - a) / lit::<T>((n - 1) as f64);
            (0..n).map(|i| (a + step * lit::<T>(i as f64)).exp()).collect()
        }
    }
}

/// `n` points from `start` to `stop`, evenly spaced.
pub fn lin_grid<T: Real>(start: T, stop: T, n: usize) -> Vec<T> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => {
            let step = (stop - start) / lit::<T>((n - 1) as f64);
            (0..n).map(|i| start + step * lit::<T>(i as f64)).collect()
        }
    }
}

/// The default sweep: 12 logarithmic points over `[1e−3, 1e−1]`.
pub fn default_grid<T: Real>() -> Vec<T> {
    log_grid(lit(1e-3), lit(1e-1), 12)
}

/// Ordinary least squares fit of `log y` against `log x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit<T: Real> {
    pub slope: T,
    /// Two standard errors of the slope (infinite with two points).
    pub half_width: T,
    /// Root mean square of the residuals of the fit.
    pub residual: T,
    pub points: usize,
}

impl<T: Real> SlopeFit<T> {
    pub fn within(&self, target: T, tol: T) -> bool {
        (self.slope - target).abs() <= tol
    }
}

pub fn loglog_fit<T: Real>(x: &[T], y: &[T]) -> Result<SlopeFit<T>> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument("slope fit needs at least two paired points".into()));
    }
    if x.iter().chain(y).any(|&v| !(v > T::zero()) || !v.is_finite()) {
        return Err(Error::InvalidArgument("slope fit needs positive finite data".into()));
    }
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    let n = lit::<T>(lx.len() as f64);
    let mx = lx.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = ly.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for (&a, &b) in lx.iter().zip(&ly) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx == T::zero() {
        return Err(Error::InvalidArgument("slope fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let sse = lx.iter().zip(&ly).fold(T::zero(), |acc, (&a, &b)| {
        let r = b - my - slope * (a - mx);
        acc + r * r
    });
    let half_width = if lx.len() > 2 {
        lit::<T>(2.0) * (sse / (n - lit(2.0)) / sxx).sqrt()
    } else {
        lit(f64::INFINITY)
    };
    Ok(SlopeFit { slope, half_width, residual: (sse / n).sqrt(), points: lx.len() })
}

/// Eigenvectors of `k` with eigenvalue above `rel_tol·λ_max`, and those
/// eigenvalues.
fn range_of<T: Real>(k: &RMat<T>, rel_tol: T) -> (RMat<T>, Vec<T>) {
    let eig = SymmetricEigen::new(k.clone());
    let lmax = eig.eigenvalues.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > rel_tol * lmax).collect();
    let mut u = RMat::zeros(k.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        u.set_column(c, &eig.eigenvectors.column(i));
    }
    (u, keep.iter().map(|&i| eig.eigenvalues[i]).collect())
}

/// `sup{c : A − cK ⪰ 0 on range(K)}`: the smallest eigenvalue of
/// `Λ^{−½}UᵀAUΛ^{−½}` where `UΛUᵀ` is the part of `K` above
/// `rel_tol·‖K‖`.
pub fn pencil_min<T: Real>(a: &RMat<T>, k: &RMat<T>, rel_tol: T) -> Result<T> {
    let (u, lam) = range_of(k, rel_tol);
    if lam.is_empty() {
        return Err(Error::DegenerateKappa);
    }
    let mut p = u;
    for (c, l) in lam.iter().enumerate() {
        let s = T::one() / l.sqrt();
        p.column_mut(c).scale_mut(s);
    }
    Ok(min_eig_symmetric(&(p.transpose() * a * &p)))
}

/// Best constant `c(t)` with `A_t ⪰ c K_κ(t)` on the range of `K_κ(t)`.
pub fn best_constant<T: Real>(q: &QuadraticSymbol<T>, info: &SingularSpaceInfo<T>, t: T) -> Result<T> {
    best_constant_with(q, info, t, KappaVariant::Full)
}

pub fn best_constant_with<T: Real>(
    q: &QuadraticSymbol<T>,
    info: &SingularSpaceInfo<T>,
    t: T,
    variant: KappaVariant,
) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::InvalidArgument("best_constant needs t > 0".into()));
    }
    if q.re().iter().all(|&v| v == T::zero()) {
        return Err(Error::DegenerateKappa);
    }
    let a = real_symmetric(&a_matrix(q, t)?);
    let kappa = kappa_matrix_with(q, info.k0, t, variant);
    pencil_min(&a, &kappa, info.rank_tol)
}

/// Direction-bound data for one direction.
#[derive(Debug, Clone)]
pub struct DirectionResult<T: Real> {
    pub x0: RVec<T>,
    pub index: usize,
    /// `−2 k_{X₀}`.
    pub predicted_exponent: i64,
    pub t: T,
    /// `sup ⟨X₀, X⟩² / κ_t(X)` and `sup ⟨X₀, X⟩² / a_t(X)` over `range(K_κ)`.
    pub kappa_sup: T,
    pub a_sup: T,
    /// Observed constants `|X₀|² / (sup · t^{2k})`.
    pub kappa_constant: T,
    pub a_constant: T,
    pub kappa_fit: SlopeFit<T>,
    pub a_fit: SlopeFit<T>,
    pub passed: bool,
}

fn direction_sups<T: Real>(q: &QuadraticSymbol<T>, info: &SingularSpaceInfo<T>, t: T, x0: &RVec<T>) -> Result<(T, T)> {
    let kappa = kappa_matrix_with(q, info.k0, t, KappaVariant::Full);
    let (u, lam) = range_of(&kappa, info.rank_tol);
    if lam.is_empty() {
        return Err(Error::DegenerateKappa);
    }
    let y = u.transpose() * x0;
    let kappa_sup = y.iter().zip(&lam).fold(T::zero(), |acc, (&yi, &l)| acc + yi * yi / l);
    let a = real_symmetric(&a_matrix(q, t)?);
    let ar = u.transpose() * a * &u;
    let sol = ar
        .cholesky()
        .map(|c| c.solve(&y))
        .ok_or_else(|| Error::InvalidArgument("a_t is not positive definite on the range of kappa_t".into()))?;
    Ok((kappa_sup, y.dot(&sol)))
}

/// Both suprema at `t` plus log–log slopes over `t·2^{−k/2}`, `k < 5`.
pub fn direction_bound<T: Real>(
    q: &QuadraticSymbol<T>,
    info: &SingularSpaceInfo<T>,
    t: T,
    x0: &RVec<T>,
) -> Result<DirectionResult<T>> {
    let index = index_of(info, x0)?;
    let ts: Vec<T> = (0..REFINEMENT_STEPS).map(|k| t * lit::<T>(2f64.powf(-(k as f64) / 2.0))).collect();
    let sups = ts.iter().map(|&s| direction_sups(q, info, s, x0)).collect::<Result<Vec<_>>>()?;
    let ks: Vec<T> = sups.iter().map(|p| p.0).collect();
    let as_: Vec<T> = sups.iter().map(|p| p.1).collect();
    let kappa_fit = loglog_fit(&ts, &ks)?;
    let a_fit = loglog_fit(&ts, &as_)?;
    let predicted = -2 * index as i64;
    let target = lit::<T>(predicted as f64);
    let tol = lit::<T>(DIRECTION_SLOPE_TOL);
    let weight = t.powi(2 * index as i32);
    let len2 = x0.norm_squared();
    Ok(DirectionResult {
        x0: x0.clone(),
        index,
        predicted_exponent: predicted,
        t,
        kappa_sup: ks[0],
        a_sup: as_[0],
        kappa_constant: len2 / (ks[0] * weight),
        a_constant: len2 / (as_[0] * weight),
        passed: kappa_fit.within(target, tol) && a_fit.within(target, tol),
        kappa_fit,
        a_fit,
    })
}

/// Least-squares slope of `log λ_min(κ_t|_{S^⊥})` against `log t`.
pub fn coercivity_exponent<T: Real>(
    q: &QuadraticSymbol<T>,
    info: &SingularSpaceInfo<T>,
    t_grid: &[T],
) -> Result<SlopeFit<T>> {
    let p = &info.sperp_basis;
    if p.ncols() == 0 {
        return Err(Error::DegenerateKappa);
    }
    let values: Vec<T> = t_grid
        .par_iter()
        .map(|&t| min_eig_symmetric(&(p.transpose() * kappa_matrix_with(q, info.k0, t, KappaVariant::Full) * p)))
        .collect();
    if values.iter().any(|&v| !(v > T::zero())) {
        return Err(Error::DegenerateKappa);
    }
    loglog_fit(t_grid, &values)
}

/// Canonical basis vectors lying in `S^⊥`, or the `S^⊥` basis when there
/// are none.
pub fn default_directions<T: Real>(info: &SingularSpaceInfo<T>) -> Vec<RVec<T>> {
    let d = info.dim();
    let canonical: Vec<RVec<T>> = (0..d)
        .map(|i| {
            let mut v = RVec::zeros(d);
            v[i] = T::one();
            v
        })
        .filter(|v| index_of(info, v).is_ok())
        .collect();
    if canonical.is_empty() {
        info.sperp_basis.column_iter().map(|c| c.into_owned()).collect()
    } else {
        canonical
    }
}

#[derive(Debug, Clone)]
pub struct CertifyOptions<T: Real> {
    pub variant: KappaVariant,
    /// Directions for the direction-bound checks; [`default_directions`] if `None`.
    pub directions: Option<Vec<RVec<T>>>,
}

impl<T: Real> Default for CertifyOptions<T> {
    fn default() -> Self {
        Self { variant: KappaVariant::Full, directions: None }
    }
}

#[derive(Debug, Clone)]
pub struct BoundCertificate<T: Real> {
    pub t_grid: Vec<T>,
    pub c_values: Vec<T>,
    pub c_min_observed: T,
    pub k0: usize,
    pub variant: KappaVariant,
    /// `None` when `S^⊥ = {0}`.
    pub coercivity: Option<SlopeFit<T>>,
    /// Per-halving rate of `c` over the three smallest `t`, when `c`
    /// decreases monotonically there.
    pub decay_rate: Option<T>,
    pub direction_results: Vec<DirectionResult<T>>,
    pub passed: bool,
}

/// Boundedness-away-from-zero heuristic on the three smallest grid points
/// (grid sorted ascending). Returns the per-halving rate when `c`
/// decreases monotonically toward small `t`.
fn decay_rate<T: Real>(t: &[T], c: &[T]) -> Option<T> {
    if t.len() < 3 {
        return None;
    }
    let (c0, c1, c2) = (c[0], c[1], c[2]);
    if !(c0 < c1 && c1 < c2) {
        return None;
    }
    let halvings = (t[2] / t[0]).ln() / lit::<T>(2f64.ln());
    if c0 <= T::zero() {
        return Some(T::zero());
    }
    Some((c0 / c2).powf(T::one() / halvings))
}

pub fn certify_lower_bound<T: Real>(
    q: &QuadraticSymbol<T>,
    info: &SingularSpaceInfo<T>,
    t_grid: &[T],
) -> Result<BoundCertificate<T>> {
    certify_lower_bound_with(q, info, t_grid, &CertifyOptions::default())
}

pub fn certify_lower_bound_with<T: Real>(
    q: &QuadraticSymbol<T>,
    info: &SingularSpaceInfo<T>,
    t_grid: &[T],
    opts: &CertifyOptions<T>,
) -> Result<BoundCertificate<T>> {
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > T::zero()) || !t.is_finite()) {
        return Err(Error::InvalidArgument("t-grid must be non-empty and positive".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("t-grid must be strictly increasing".into()));
    }
    let c_values = t_grid
        .par_iter()
        .map(|&t| best_constant_with(q, info, t, opts.variant))
        .collect::<Result<Vec<T>>>()?;
    let c_min_observed = c_values.iter().copied().fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b));
    let coercivity = if info.sperp_basis.ncols() == 0 { None } else { Some(coercivity_exponent(q, info, t_grid)?) };
    let rate = decay_rate(t_grid, &c_values);
    let directions = opts.directions.clone().unwrap_or_else(|| default_directions(info));
    let t_dir = t_grid[0];
    let direction_results = directions
        .par_iter()
        .map(|x0| direction_bound(q, info, t_dir, x0))
        .collect::<Result<Vec<_>>>()?;
    let passed = c_min_observed > T::zero() && rate.is_none_or(|r| r >= lit(MIN_HALVING_RATE));
    Ok(BoundCertificate {
        t_grid: t_grid.to_vec(),
        c_values,
        c_min_observed,
        k0: info.k0,
        variant: opts.variant,
        coercivity,
        decay_rate: rate,
        direction_results,
        passed,
    })
}

/// Index of one direction, or why it has none.
#[derive(Debug, Clone)]
pub struct DirectionIndex<T: Real> {
    pub direction: RVec<T>,
    pub index: Result<usize>,
}

/// Predicted blow-up `t^{−(Σ k_{Xj} + m/2)}` of `⟨X₁,X⟩^w…⟨X_m,X⟩^w e^{−tq^w}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetExponent {
    /// Positions in the direction list.
    pub members: Vec<usize>,
    pub index_sum: usize,
}

impl SubsetExponent {
    pub fn exponent(&self) -> f64 {
        self.index_sum as f64 + self.members.len() as f64 / 2.0
    }
}

#[derive(Debug, Clone)]
pub struct SmoothingTable<T: Real> {
    pub directions: Vec<DirectionIndex<T>>,
    /// Every non-empty subset of the directions that have an index, in
    /// lexicographic order of member lists (omitted beyond 12 directions,
    /// where only the full set is listed).
    pub subsets: Vec<SubsetExponent>,
}

const MAX_SUBSET_DIRECTIONS: usize = 12;

pub fn smoothing_exponents<T: Real>(info: &SingularSpaceInfo<T>, directions: &[RVec<T>]) -> SmoothingTable<T> {
    let entries: Vec<DirectionIndex<T>> =
        directions.iter().map(|d| DirectionIndex { direction: d.clone(), index: index_of(info, d) }).collect();
    let valid: Vec<(usize, usize)> =
        entries.iter().enumerate().filter_map(|(i, e)| e.index.as_ref().ok().map(|&k| (i, k))).collect();
    let mut subsets = Vec::new();
    if valid.len() > MAX_SUBSET_DIRECTIONS {
        subsets.push(SubsetExponent {
            members: valid.iter().map(|v| v.0).collect(),
            index_sum: valid.iter().map(|v| v.1).sum(),
        });
    } else {
        for mask in 1u32..(1 << valid.len()) {
            let chosen: Vec<&(usize, usize)> = valid.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, v)| v).collect();
            subsets.push(SubsetExponent {
                members: chosen.iter().map(|v| v.0).collect(),
                index_sum: chosen.iter().map(|v| v.1).sum(),
            });
        }
        subsets.sort_by(|a, b| a.members.cmp(&b.members));
    }
    SmoothingTable { directions: entries, subsets }
}

#[derive(Debug, Clone)]
pub struct SubellipticRow<T: Real> {
    pub k: usize,
    pub p_k: RMat<T>,
    /// `2/(2k + 1)`.
    pub exponent: f64,
}

/// Rows `(k, p_k, 2/(2k+1))` for `k = 0..=k₀`; unit weights unless given.
pub fn subelliptic_report<T: Real>(
    q: &QuadraticSymbol<T>,
    info: &SingularSpaceInfo<T>,
    weights: Option<&[T]>,
) -> Result<Vec<SubellipticRow<T>>> {
    (0..=info.k0)
        .map(|k| {
            Ok(SubellipticRow { k, p_k: pk_matrix(q, k, info.k0, weights)?, exponent: 2.0 / (2 * k + 1) as f64 })
        })
        .collect()
}

/// Convenience for reports: `c(t)` at the smallest and largest grid time.
pub fn decay_ratio<T: Real>(cert: &BoundCertificate<T>) -> f64 {
    match (cert.c_values.first(), cert.c_values.last()) {
        (Some(&a), Some(&b)) if b != T::zero() => to_f64(a / b),
        _ => f64::NAN,
    }
}
