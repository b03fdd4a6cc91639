//! Example symbols with known answers, and a seeded random generator.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::{cplx, lit, RMat, Real};
use crate::symbols::QuadraticSymbol;

/// Closed form of a matrix-valued function of `t`.
pub type MatrixFn<T> = Arc<dyn Fn(T) -> RMat<T> + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Scalar(f64),
    Matrix(RMat<f64>),
}

/// Known answers attached to an example.
#[derive(Clone, Default)]
pub struct Expected<T: Real> {
    pub s_dim: Option<usize>,
    pub k0: Option<usize>,
    pub a_t: Option<MatrixFn<T>>,
    pub b_t: Option<MatrixFn<T>>,
}

impl<T: Real> fmt::Debug for Expected<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Expected")
            .field("s_dim", &self.s_dim)
            .field("k0", &self.k0)
            .field("a_t", &self.a_t.as_ref().map(|_| "<fn>"))
            .field("b_t", &self.b_t.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

#[derive(Debug, Clone)]
pub struct ExampleSpec<T: Real> {
    pub name: String,
    pub parameters: BTreeMap<String, Param>,
    pub symbol: QuadraticSymbol<T>,
    pub expected: Expected<T>,
}

fn block_symbol<T: Real>(re: RMat<T>, im: RMat<T>) -> QuadraticSymbol<T> {
    QuadraticSymbol::from_parts(&re, &im).expect("catalog symbols are accretive")
}

fn to_t<T: Real>(m: &RMat<f64>) -> RMat<T> {
    m.map(lit::<T>)
}

/// `q = |x|² + |ξ|²`: `S = {0}`, `k₀ = 0`, `A_t = I`, `B_t = 0`.
pub fn harmonic<T: Real>(n: usize) -> ExampleSpec<T> {
    assert!(n >= 1, "dimension must be positive");
    let d = 2 * n;
    let symbol = block_symbol(RMat::identity(d, d), RMat::zeros(d, d));
    ExampleSpec {
        name: format!("harmonic:{n}"),
        parameters: BTreeMap::from([("n".to_string(), Param::Scalar(n as f64))]),
        symbol,
        expected: Expected {
            s_dim: Some(0),
            k0: Some(0),
            a_t: Some(Arc::new(move |_| RMat::identity(d, d))),
            b_t: Some(Arc::new(move |_| RMat::zeros(d, d))),
        },
    }
}

/// Diagonal `n×n` block `v·I` placed at block position `(r, c)` of a `4n×4n`
/// matrix ordered `(x, v, ξ, η)`.
fn put_block<T: Real>(m: &mut RMat<T>, n: usize, r: usize, c: usize, v: T) {
    for i in 0..n {
        m[(r * n + i, c * n + i)] = v;
    }
}

/// `A_t` of the Kramers–Fokker–Planck symbol.
pub fn kfp_a<T: Real>(n: usize, t: T) -> RMat<T> {
    let mut a = RMat::zeros(4 * n, 4 * n);
    put_block(&mut a, n, 1, 1, T::one());
    put_block(&mut a, n, 3, 3, T::one());
    let two = lit::<T>(2.0);
    let c2 = (two * t).cosh();
    let s2 = (two * t).sinh();
    // 0/0 at t = 0; the limit of the ξξ entry is 0
    let xixi = if t == T::zero() { T::zero() } else { (two * t * c2 - s2) / (lit::<T>(4.0) * t * (c2 + T::one())) };
    put_block(&mut a, n, 2, 2, xixi);
    let off = s2 / (two * (c2 + T::one()));
    put_block(&mut a, n, 2, 3, off);
    put_block(&mut a, n, 3, 2, off);
    a
}

/// `B_t` of the Kramers–Fokker–Planck symbol: `tanh(t)/(2t)` in the `(v, ξ)`
/// blocks, tending to `Im Q` as `t → 0`.
pub fn kfp_b<T: Real>(n: usize, t: T) -> RMat<T> {
    let mut b = RMat::zeros(4 * n, 4 * n);
    let v = if t == T::zero() { lit(0.5) } else { t.tanh() / (lit::<T>(2.0) * t) };
    put_block(&mut b, n, 1, 2, v);
    put_block(&mut b, n, 2, 1, v);
    b
}

/// The alternative form `−sinh(t)/(2t)` in the `(v, ξ)` blocks for the
/// Kramers–Fokker–Planck `B_t`. It does not satisfy the factorization
/// together with [`kfp_a`]; kept for comparison.
pub fn kfp_b_sinh<T: Real>(n: usize, t: T) -> RMat<T> {
    let mut b = RMat::zeros(4 * n, 4 * n);
    let v = if t == T::zero() { lit(-0.5) } else { -t.sinh() / (lit::<T>(2.0) * t) };
    put_block(&mut b, n, 1, 2, v);
    put_block(&mut b, n, 2, 1, v);
    b
}

/// Kramers–Fokker–Planck symbol `q(x, v, ξ, η) = |η|² + |v|² + i⟨v, ξ⟩` on
/// `ℝ⁴ⁿ`, coordinates ordered `(x, v, ξ, η)`. The singular space is the `x`
/// directions and `k₀ = 1`.
pub fn kfp<T: Real>(n: usize) -> ExampleSpec<T> {
    assert!(n >= 1, "dimension must be positive");
    let d = 4 * n;
    let mut re = RMat::zeros(d, d);
    put_block(&mut re, n, 1, 1, T::one());
    put_block(&mut re, n, 3, 3, T::one());
    let mut im = RMat::zeros(d, d);
    put_block(&mut im, n, 1, 2, lit(0.5));
    put_block(&mut im, n, 2, 1, lit(0.5));
    ExampleSpec {
        name: format!("kfp:{n}"),
        parameters: BTreeMap::from([("n".to_string(), Param::Scalar(n as f64))]),
        symbol: block_symbol(re, im),
        expected: Expected {
            s_dim: Some(n),
            k0: Some(1),
            a_t: Some(Arc::new(move |t| kfp_a(n, t))),
            b_t: Some(Arc::new(move |t| kfp_b(n, t))),
        },
    }
}

/// `A_t` of the Kolmogorov symbol: `a_t = (ξ₂ + tξ₁/2)² + t²ξ₁²/12`.
pub fn kolmogorov_a<T: Real>(t: T) -> RMat<T> {
    let mut a = RMat::zeros(4, 4);
    a[(2, 2)] = t * t / lit(3.0);
    a[(2, 3)] = t / lit(2.0);
    a[(3, 2)] = t / lit(2.0);
    a[(3, 3)] = T::one();
    a
}

/// `q = ξ₂² + i x₂ξ₁` (`n = 2`). `B_t = Im Q` for all `t`; the singular
/// space is the `x` plane and `k₀ = 1`.
pub fn kolmogorov<T: Real>() -> ExampleSpec<T> {
    let mut re = RMat::zeros(4, 4);
    re[(3, 3)] = T::one();
    let mut im = RMat::zeros(4, 4);
    im[(1, 2)] = lit(0.5);
    im[(2, 1)] = lit(0.5);
    let b = im.clone();
    ExampleSpec {
        name: "kolmogorov".into(),
        parameters: BTreeMap::new(),
        symbol: block_symbol(re, im),
        expected: Expected {
            s_dim: Some(2),
            k0: Some(1),
            a_t: Some(Arc::new(kolmogorov_a)),
            b_t: Some(Arc::new(move |_| b.clone())),
        },
    }
}

/// `⋂_{j<n} Ker(RBʲ) × Ker(Qm(Bᵀ)ʲ)` computed blockwise; returns its
/// dimension and the least `k₀` at which the intersection stabilizes.
fn ou_singular_dim(qm: &RMat<f64>, r: &RMat<f64>, b: &RMat<f64>) -> (usize, usize) {
    let n = b.nrows();
    let stacked = |m: &RMat<f64>, step: &RMat<f64>, k: usize| {
        let mut rows = RMat::zeros(n * (k + 1), n);
        let mut pow = RMat::identity(n, n);
        for j in 0..=k {
            rows.rows_mut(j * n, n).copy_from(&(m * &pow));
            pow = &pow * step;
        }
        rows
    };
    let nullity = |m: RMat<f64>| {
        let sv = m.singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        n - sv.iter().filter(|&&s| s > 1e-9 * smax).count()
    };
    let dim_at = |k: usize| nullity(stacked(r, b, k)) + nullity(stacked(qm, &b.transpose(), k));
    let s = dim_at(n.saturating_sub(1));
    let k0 = (0..n).find(|&k| dim_at(k) == s).unwrap_or(0);
    (s, k0)
}

/// Generalized Ornstein–Uhlenbeck operator
/// `−½Tr(Qm∇²) + ½⟨Rx, x⟩ + ⟨Bx, ∇⟩ + ½Tr(B)` with symbol
/// `½⟨Qmξ, ξ⟩ + ½⟨Rx, x⟩ + i⟨Bx, ξ⟩`.
pub fn ou<T: Real>(qm: &RMat<f64>, r: &RMat<f64>, b: &RMat<f64>) -> Result<ExampleSpec<T>> {
    let n = b.nrows();
    for m in [qm, r, b] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
        }
    }
    let mut re = RMat::<f64>::zeros(2 * n, 2 * n);
    re.view_mut((0, 0), (n, n)).copy_from(&(r * 0.5));
    re.view_mut((n, n), (n, n)).copy_from(&(qm * 0.5));
    let mut im = RMat::<f64>::zeros(2 * n, 2 * n);
    im.view_mut((n, 0), (n, n)).copy_from(&(b * 0.5));
    im.view_mut((0, n), (n, n)).copy_from(&(b.transpose() * 0.5));
    let symbol = QuadraticSymbol::from_parts(&to_t(&re), &to_t(&im))?;
    let (s_dim, k0) = ou_singular_dim(qm, r, b);
    Ok(ExampleSpec {
        name: "ou".into(),
        parameters: BTreeMap::from([
            ("B".to_string(), Param::Matrix(b.clone())),
            ("Q".to_string(), Param::Matrix(qm.clone())),
            ("R".to_string(), Param::Matrix(r.clone())),
        ]),
        symbol,
        expected: Expected { s_dim: Some(s_dim), k0: Some(k0), a_t: None, b_t: None },
    })
}

/// The degenerate Ornstein–Uhlenbeck instance `R = 0`, `Qm = diag(1, 0)`,
/// `B = [[0, 0], [1, 0]]`: `S = ℝ²ₓ × {0}`, `k₀ = 1`.
pub fn ou_example<T: Real>() -> ExampleSpec<T> {
    let qm = RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let r = RMat::zeros(2, 2);
    let b = RMat::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
    ou(&qm, &r, &b).expect("valid Ornstein-Uhlenbeck data")
}

/// Seeded accretive symbol on `ℝ²ⁿ`: `Re Q = LLᵀ` for a Gaussian `L` (with
/// probability ½ some columns of `L` are zeroed so that `Re Q` is rank
/// deficient), `Im Q` a symmetric Gaussian matrix scaled by `im_scale`.
pub fn random_accretive<T: Real>(n: usize, seed: u64, im_scale: f64) -> QuadraticSymbol<T> {
    assert!(n >= 1, "dimension must be positive");
    let d = 2 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norm = 1.0 / (d as f64).sqrt();
    let mut l = RMat::<f64>::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal) * norm);
    if rng.random_bool(0.5) {
        let zeroed = rng.random_range(1..d);
        for c in rand::seq::index::sample(&mut rng, d, zeroed) {
            l.column_mut(c).fill(0.0);
        }
    }
    let g = RMat::<f64>::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal) * norm);
    let re = &l * l.transpose();
    let im = (&g + g.transpose()) * (0.5 * im_scale);
    let q = to_t::<T>(&re).zip_map(&to_t::<T>(&im), cplx);
    QuadraticSymbol::new(q).expect("LLᵀ is positive semidefinite")
}

/// Resolves `harmonic[:n]`, `kfp[:n]`, `kolmogorov`, `ou` and
/// `random:n:seed[:im_scale]`.
pub fn by_name<T: Real>(name: &str) -> Result<ExampleSpec<T>> {
    let mut parts = name.split(':');
    let head = parts.next().unwrap_or_default();
    let rest: Vec<&str> = parts.collect();
    let int = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .ok()
            .filter(|&v| v >= 1)
            .ok_or_else(|| Error::InvalidArgument(format!("expected a positive integer in example name, got {s:?}")))
    };
    let bad = || Error::InvalidArgument(format!("unknown example {name:?}"));
    match (head, rest.as_slice()) {
        ("harmonic", []) => Ok(harmonic(1)),
        ("harmonic", [n]) => Ok(harmonic(int(n)?)),
        ("kfp", []) => Ok(kfp(1)),
        ("kfp", [n]) => Ok(kfp(int(n)?)),
        ("kolmogorov", []) => Ok(kolmogorov()),
        ("ou", []) => Ok(ou_example()),
        ("random", [n, seed, scale @ ..]) if scale.len() <= 1 => {
            let n = int(n)?;
            let seed: u64 = seed.parse().map_err(|_| bad())?;
            let im_scale = match scale {
                [s] => s.parse::<f64>().map_err(|_| bad())?,
                _ => 1.0,
            };
            Ok(ExampleSpec {
                name: name.to_string(),
                parameters: BTreeMap::from([
                    ("im_scale".to_string(), Param::Scalar(im_scale)),
                    ("n".to_string(), Param::Scalar(n as f64)),
                    ("seed".to_string(), Param::Scalar(seed as f64)),
                ]),
                symbol: random_accretive(n, seed, im_scale),
                expected: Expected::default(),
            })
        }
        _ => Err(bad()),
    }
}

/// Names of the deterministic catalog entries.
pub const NAMES: [&str; 4] = ["harmonic:1", "kfp:1", "kolmogorov", "ou"];
