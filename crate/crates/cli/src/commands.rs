//! The four subcommands, each producing a report tree and optional CSV.

use anyhow::{bail, ensure, Result};

use qpolar::certify::{
    best_constant_with, certify_lower_bound_with, default_directions, smoothing_exponents, subelliptic_report,
    CertifyOptions, DirectionResult, SlopeFit, COERCIVITY_SLOPE_TOL,
};
use qpolar::matfun::min_eig_hermitian_part;
use qpolar::polar::{mehler_symbol, polar_factors, real_symmetric};
use qpolar::scalar::re_part;
use qpolar::singular::{check_singular_stability, index_of, singular_space};
use qpolar::symbols::KappaVariant;
use qpolar::{QuadraticSymbol, RVec, SingularSpaceInfo};

use crate::report::{fmt_float, Map, Node};

/// Outcome of a command: the `results` subtree, CSV rows, and the overall
/// verdict (`None` for purely descriptive commands).
pub struct Outcome {
    pub results: Node,
    pub csv: Vec<Vec<String>>,
    pub passed: Option<bool>,
}

/// Parses `start:stop:N[log|lin]` (default spacing `log`).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    ensure!(parts.len() == 3, "t-grid must look like start:stop:N[log|lin], got {spec:?}");
    let start: f64 = parts[0].trim().parse()?;
    let stop: f64 = parts[1].trim().parse()?;
    let count = parts[2].trim();
    let (digits, log) = if let Some(d) = count.strip_suffix("log") {
        (d, true)
    } else if let Some(d) = count.strip_suffix("lin") {
        (d, false)
    } else {
        (count, true)
    };
    let n: usize = digits.parse()?;
    ensure!(n >= 1, "t-grid needs at least one point");
    ensure!(start.is_finite() && stop.is_finite() && start <= stop, "t-grid bounds must satisfy start <= stop");
    ensure!(start > 0.0 || !log, "logarithmic t-grid needs start > 0");
    ensure!(start >= 0.0, "times must be non-negative");
    Ok(if log { qpolar::certify::log_grid(start, stop, n) } else { qpolar::certify::lin_grid(start, stop, n) })
}

fn vectors(m: &qpolar::RMat) -> Node {
    Node::List(m.column_iter().map(|c| Node::from(&c.into_owned())).collect())
}

fn cell(v: f64) -> String {
    fmt_float(v).unwrap_or_default()
}

fn direction_entry(info: &SingularSpaceInfo, d: &RVec) -> Node {
    let mut m = Map::new();
    m.insert("direction", d);
    match index_of(info, d) {
        Ok(k) => m.insert("index", k).insert("error", Node::Null),
        Err(e) => m.insert("index", Node::Null).insert("error", e.to_string()),
    };
    m.into()
}

pub fn analyze(q: &QuadraticSymbol, rank_tol: f64, directions: Option<&[RVec]>) -> Result<Outcome> {
    let info = singular_space(q, rank_tol)?;
    let stab = check_singular_stability(q, &info);
    let dirs = directions.map(<[RVec]>::to_vec).unwrap_or_else(|| default_directions(&info));
    let results = Map::new()
        .with("s_dim", info.s_dim())
        .with("k0", info.k0)
        .with("vk_dims", info.vk_dims())
        .with("s_basis", vectors(&info.s_basis))
        .with("sperp_basis", vectors(&info.sperp_basis))
        .with("stability", Map::new().with("re_f_residual", stab.re_f_residual).with("im_f_deviation", stab.im_f_deviation))
        .with("indices", Node::List(dirs.iter().map(|d| direction_entry(&info, d)).collect()));
    let mut csv = vec![vec!["k".to_string(), "dim_vk".to_string()]];
    for (k, d) in info.vk_dims().iter().enumerate() {
        csv.push(vec![k.to_string(), d.to_string()]);
    }
    Ok(Outcome { results: results.into(), csv, passed: None })
}

const RESIDUAL_COLUMNS: [&str; 17] = [
    "a_asym", "a_imag", "a_psd", "atanh_route", "b_asym", "b_exp", "b_imag", "factorization", "h_real", "integral_rep",
    "log_identity", "m_herm", "m_psd", "psd_gap", "symplectic_g", "symplectic_h", "tan_identity",
];

pub fn decompose(q: &QuadraticSymbol, times: &[f64], res_tol: f64) -> Result<Outcome> {
    ensure!(times.iter().all(|&t| t >= 0.0), "times must be non-negative");
    let mut entries = Vec::new();
    let mut header = vec!["t".to_string(), "within_validity".to_string(), "mehler_prefactor".to_string()];
    header.extend(RESIDUAL_COLUMNS.iter().map(|s| s.to_string()));
    let mut csv = vec![header];
    let mut all_passed = true;
    for &t in times {
        let mut m = Map::new();
        m.insert("t", t);
        match polar_factors(q, t) {
            Ok(pf) => {
                let mehler = mehler_symbol(q, t);
                let within_tol = pf.residuals.values().all(|&r| r <= res_tol);
                let passed = within_tol && mehler.is_ok();
                all_passed &= passed;
                let mut res = Map::new();
                for (k, v) in &pf.residuals {
                    res.insert(k, *v);
                }
                m.insert("K", &pf.k)
                    .insert("G", &pf.g)
                    .insert("H", &pf.h)
                    .insert("A", &real_symmetric(&pf.a))
                    .insert("M", &re_part(&pf.m))
                    .insert("B", pf.b.as_ref().map(|b| Node::from(&real_symmetric(b))))
                    .insert("within_validity", pf.within_validity)
                    .insert("quadrature_nodes", pf.quadrature_nodes)
                    .insert("residuals", res)
                    .insert("passed", passed);
                let prefactor = match &mehler {
                    Ok(ms) => {
                        m.insert("mehler", Map::new().with("prefactor", ms.prefactor).with("M", &re_part(&ms.m)));
                        ms.prefactor
                    }
                    Err(e) => {
                        m.insert("mehler", Map::new().with("error", e.to_string()));
                        f64::NAN
                    }
                };
                let mut row = vec![cell(t), pf.within_validity.to_string(), cell(prefactor)];
                row.extend(RESIDUAL_COLUMNS.iter().map(|k| pf.residual(k).map(cell).unwrap_or_default()));
                csv.push(row);
            }
            Err(e) => {
                all_passed = false;
                m.insert("error", e.to_string()).insert("passed", false);
                let mut row = vec![cell(t), String::new(), String::new()];
                row.extend(RESIDUAL_COLUMNS.iter().map(|_| String::new()));
                csv.push(row);
            }
        }
        entries.push(Node::from(m));
    }
    let results = Map::new().with("res_tol", res_tol).with("times", Node::List(entries));
    Ok(Outcome { results: results.into(), csv, passed: Some(all_passed) })
}

fn fit_node(fit: &SlopeFit<f64>) -> Map {
    Map::new()
        .with("slope", fit.slope)
        .with("half_width", fit.half_width)
        .with("residual", fit.residual)
        .with("points", fit.points)
}

fn direction_result_node(d: &DirectionResult<f64>) -> Node {
    Map::new()
        .with("direction", &d.x0)
        .with("index", d.index)
        .with("predicted_exponent", d.predicted_exponent)
        .with("t", d.t)
        .with("kappa_sup", d.kappa_sup)
        .with("a_sup", d.a_sup)
        .with("kappa_constant", d.kappa_constant)
        .with("a_constant", d.a_constant)
        .with("kappa_fit", fit_node(&d.kappa_fit))
        .with("a_fit", fit_node(&d.a_fit))
        .with("passed", d.passed)
        .into()
}

pub fn certify(q: &QuadraticSymbol, grid: &[f64], rank_tol: f64, directions: Option<&[RVec]>) -> Result<Outcome> {
    ensure!(!grid.is_empty(), "empty t-grid");
    let info = singular_space(q, rank_tol)?;
    let opts = CertifyOptions { variant: KappaVariant::Full, directions: directions.map(<[RVec]>::to_vec) };
    let cert = certify_lower_bound_with(q, &info, grid, &opts)?;
    let target = 2.0 * info.k0 as f64;
    let coercivity_ok = cert.coercivity.as_ref().is_none_or(|f| f.within(target, COERCIVITY_SLOPE_TOL));
    let directions_ok = cert.direction_results.iter().all(|d| d.passed);
    let passed = cert.passed && coercivity_ok && directions_ok;

    let mut csv = vec![["t", "c", "eigmin_gap", "factorization", "log_identity"].iter().map(|s| s.to_string()).collect()];
    let mut rows = Vec::new();
    for (&t, &c) in cert.t_grid.iter().zip(&cert.c_values) {
        let pf = polar_factors(q, t)?;
        let gap = min_eig_hermitian_part(&(&pf.a - &pf.m));
        let fact = pf.residual("factorization");
        let log = pf.residual("log_identity");
        csv.push(vec![cell(t), cell(c), cell(gap), fact.map(cell).unwrap_or_default(), log.map(cell).unwrap_or_default()]);
        rows.push(Node::from(
            Map::new()
                .with("t", t)
                .with("c", c)
                .with("eigmin_gap", gap)
                .with("factorization", fact)
                .with("log_identity", log),
        ));
    }

    let mut results = Map::new();
    results
        .insert("k0", info.k0)
        .insert("s_dim", info.s_dim())
        .insert("t_grid", cert.t_grid.clone())
        .insert("c_values", cert.c_values.clone())
        .insert("c_min_observed", cert.c_min_observed)
        .insert("decay_rate", cert.decay_rate)
        .insert("bound_passed", cert.passed)
        .insert(
            "coercivity",
            match &cert.coercivity {
                Some(f) => fit_node(f).with("expected", target).with("passed", f.within(target, COERCIVITY_SLOPE_TOL)).into(),
                None => Node::Null,
            },
        )
        .insert("directions", Node::List(cert.direction_results.iter().map(direction_result_node).collect()))
        .insert("sweep", Node::List(rows));
    if info.k0 >= 1 {
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        let mut sharp = Map::new();
        for (name, v) in [("capped_weight", KappaVariant::CappedWeight(info.k0 - 1)), ("truncated", KappaVariant::Truncated(info.k0 - 1))] {
            let c_lo = best_constant_with(q, &info, lo, v)?;
            let c_hi = best_constant_with(q, &info, hi, v)?;
            sharp.insert(name, Map::new().with("c_at_min_t", c_lo).with("c_at_max_t", c_hi).with("ratio", c_lo / c_hi));
        }
        results.insert("sharpness", sharp);
    }
    Ok(Outcome { results: results.into(), csv, passed: Some(passed) })
}

pub fn report(q: &QuadraticSymbol, rank_tol: f64, directions: Option<&[RVec]>, weights: Option<&[f64]>) -> Result<Outcome> {
    let info = singular_space(q, rank_tol)?;
    if let Some(w) = weights {
        if w.len() <= info.k0 {
            bail!("weights need {} entries (k0 = {}), got {}", info.k0 + 1, info.k0, w.len());
        }
    }
    let rows = subelliptic_report(q, &info, weights)?;
    let dirs = directions.map(<[RVec]>::to_vec).unwrap_or_else(|| default_directions(&info));
    let table = smoothing_exponents(&info, &dirs);
    let mut csv = vec![vec!["k".to_string(), "exponent".to_string()]];
    for r in &rows {
        csv.push(vec![r.k.to_string(), cell(r.exponent)]);
    }
    let subelliptic = rows
        .iter()
        .map(|r| Map::new().with("k", r.k).with("exponent", r.exponent).with("p_k", &r.p_k).into())
        .collect::<Vec<Node>>();
    let subsets = table
        .subsets
        .iter()
        .map(|s| {
            Map::new()
                .with("members", s.members.clone())
                .with("index_sum", s.index_sum)
                .with("exponent", s.exponent())
                .into()
        })
        .collect::<Vec<Node>>();
    let results = Map::new()
        .with("k0", info.k0)
        .with("weights", weights.map(<[f64]>::to_vec))
        .with("subelliptic", Node::List(subelliptic))
        .with("directions", Node::List(dirs.iter().map(|d| direction_entry(&info, d)).collect()))
        .with("smoothing", Node::List(subsets));
    Ok(Outcome { results: results.into(), csv, passed: None })
}
