//! Gauss–Legendre rules and composite integration of matrix-valued integrands.

use std::f64::consts::PI;

use crate::scalar::{lit, CMat, Real};

/// Points per panel used by the composite rule.
pub const PANEL_POINTS: usize = 16;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the three-term recurrence, Tricomi initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped onto `[0, 1]`.
    pub fn unit_interval<T: Real>(&self) -> Vec<(T, T)> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (lit(0.5 * (x + 1.0)), lit(0.5 * w)))
            .collect()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates `f` over `[a, b]` with `nodes` total points: a single rule when
/// `nodes <= PANEL_POINTS`, otherwise `ceil(nodes / PANEL_POINTS)` panels of
/// `PANEL_POINTS` points each.
pub fn integrate<T, F>(f: F, a: T, b: T, nodes: usize) -> CMat<T>
where
    T: Real,
    F: Fn(T) -> CMat<T>,
{
    let (panels, per_panel) = if nodes <= PANEL_POINTS {
        (1, nodes.max(1))
    } else {
        (nodes.div_ceil(PANEL_POINTS), PANEL_POINTS)
    };
    let rule = GaussLegendre::new(per_panel).unit_interval::<T>();
    let h = (b - a) / lit::<T>(panels as f64);
    let mut acc: Option<CMat<T>> = None;
    for p in 0..panels {
        let left = a + h * lit::<T>(p as f64);
        for &(s, w) in &rule {
            let v = f(left + h * s) * crate::scalar::real(w * h);
            acc = Some(match acc {
                Some(m) => m + v,
                None => v,
            });
        }
    }
    acc.expect("at least one quadrature node")
}

/// Doubles the node count from `start` until two successive estimates agree
/// to `rel_tol` (relative, Frobenius) or `cap` nodes are reached. Returns the
/// finest estimate and the node count used.
pub fn integrate_adaptive<T, F>(f: F, a: T, b: T, start: usize, rel_tol: T, cap: usize) -> (CMat<T>, usize)
where
    T: Real,
    F: Fn(T) -> CMat<T>,
{
    let mut nodes = start.max(2);
    let mut prev = integrate(&f, a, b, nodes);
    while nodes < cap {
        let next_nodes = (nodes * 2).min(cap);
        let next = integrate(&f, a, b, next_nodes);
        let diff = (&next - &prev).norm();
        let scale = next.norm();
        nodes = next_nodes;
        prev = next;
        if diff <= rel_tol * scale || scale == T::zero() {
            break;
        }
    }
    (prev, nodes)
}
