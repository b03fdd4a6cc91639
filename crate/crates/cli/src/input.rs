//! Symbol documents, example names and direction lists.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qpolar::catalog;
use qpolar::scalar::{cplx, RMat, RVec};
use qpolar::QuadraticSymbol;

use crate::report::fmt_float;

/// Asymmetry accepted silently; up to [`SYMMETRY_LIMIT`] the matrix is
/// symmetrized with a warning.
const SYMMETRY_QUIET: f64 = 1e-12;
const SYMMETRY_LIMIT: f64 = 1e-9;

/// On-disk form of a symbol: `q(X) = Xᵀ(Q_re + i Q_im)X`, coordinates
/// `(x₁..xₙ, ξ₁..ξₙ)`, matrices row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolDocument {
    pub n: usize,
    #[serde(rename = "Q_re")]
    pub q_re: Vec<Vec<f64>>,
    #[serde(rename = "Q_im", default)]
    pub q_im: Option<Vec<Vec<f64>>>,
}

fn to_matrix(rows: &[Vec<f64>], d: usize, what: &str) -> Result<RMat<f64>> {
    ensure!(rows.len() == d, "{what} has {} rows, expected {d}", rows.len());
    for (i, r) in rows.iter().enumerate() {
        ensure!(r.len() == d, "{what} row {i} has {} entries, expected {d}", r.len());
        ensure!(r.iter().all(|v| v.is_finite()), "{what} row {i} has a non-finite entry");
    }
    Ok(RMat::from_fn(d, d, |i, j| rows[i][j]))
}

fn asymmetry(m: &RMat<f64>) -> f64 {
    (m - m.transpose()).amax() / m.amax().max(1.0)
}

/// Loaded symbol plus provenance.
#[derive(Debug, Clone)]
pub struct LoadedSymbol {
    pub symbol: QuadraticSymbol,
    /// `example:<name>` or `file`.
    pub source: String,
    pub warnings: Vec<String>,
}

impl SymbolDocument {
    pub fn into_symbol(self) -> Result<(QuadraticSymbol, Vec<String>)> {
        ensure!(self.n >= 1, "n must be positive");
        let d = 2 * self.n;
        let re = to_matrix(&self.q_re, d, "Q_re")?;
        let im = match &self.q_im {
            Some(rows) => to_matrix(rows, d, "Q_im")?,
            None => RMat::zeros(d, d),
        };
        let mut warnings = Vec::new();
        for (name, m) in [("Q_re", &re), ("Q_im", &im)] {
            let a = asymmetry(m);
            if a > SYMMETRY_LIMIT {
                bail!("{name} is not symmetric (relative asymmetry {a:e})");
            }
            if a > SYMMETRY_QUIET {
                warnings.push(format!("{name} symmetrized (relative asymmetry {a:e})"));
            }
        }
        let sym = |m: &RMat<f64>| (m + m.transpose()) * 0.5;
        let q = sym(&re).zip_map(&sym(&im), cplx);
        Ok((QuadraticSymbol::new(q)?, warnings))
    }

    #[cfg(test)]
    pub fn from_symbol(q: &QuadraticSymbol) -> Self {
        let rows = |m: RMat<f64>| m.row_iter().map(|r| r.iter().copied().collect()).collect();
        Self { n: q.n(), q_re: rows(q.re()), q_im: Some(rows(q.im())) }
    }
}

pub fn load_file(path: &Path) -> Result<LoadedSymbol> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: SymbolDocument = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let (symbol, warnings) = doc.into_symbol()?;
    Ok(LoadedSymbol { symbol, source: "file".into(), warnings })
}

/// Resolves an example name; `random:n` takes its seed from `seed`.
pub fn load_example(name: &str, seed: u64) -> Result<LoadedSymbol> {
    let resolved = match name.split(':').collect::<Vec<_>>().as_slice() {
        ["random", n] => format!("random:{n}:{seed}"),
        ["random"] => format!("random:1:{seed}"),
        _ => name.to_string(),
    };
    let ex = catalog::by_name::<f64>(&resolved)?;
    Ok(LoadedSymbol { symbol: ex.symbol, source: format!("example:{resolved}"), warnings: vec![] })
}

/// SHA-256 of the canonical text of the symbol (17 significant digits per
/// entry), so files and examples describing the same matrix agree.
pub fn digest(q: &QuadraticSymbol) -> String {
    let mut h = Sha256::new();
    h.update(format!("n={}\n", q.n()).as_bytes());
    for (name, m) in [("Q_re", q.re()), ("Q_im", q.im())] {
        h.update(name.as_bytes());
        for v in m.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()) {
            h.update(b" ");
            h.update(fmt_float(v).unwrap_or_else(|| "null".into()).as_bytes());
        }
        h.update(b"\n");
    }
    format!("sha256:{}", hex::encode(h.finalize()))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DirectionsFile {
    Bare(Vec<Vec<f64>>),
    Wrapped { directions: Vec<Vec<f64>> },
}

/// Reads a JSON list of direction vectors (bare or under `"directions"`).
pub fn load_directions(path: &Path, dim: usize) -> Result<Vec<RVec<f64>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed: DirectionsFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let rows = match parsed {
        DirectionsFile::Bare(r) | DirectionsFile::Wrapped { directions: r } => r,
    };
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            ensure!(r.len() == dim, "direction {i} has length {}, expected {dim}", r.len());
            Ok(RVec::from_vec(r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn document_round_trip() {
        let q = catalog::kfp::<f64>(1).symbol;
        let doc = SymbolDocument::from_symbol(&q);
        let text = serde_json::to_string(&doc).unwrap();
        let back: SymbolDocument = serde_json::from_str(&text).unwrap();
        let (q2, w) = back.into_symbol().unwrap();
        assert_eq!(q, q2);
        assert!(w.is_empty());
        assert_eq!(digest(&q), digest(&q2));
    }

    #[test]
    fn symmetrizes_small_asymmetry_and_rejects_large() {
        let doc = SymbolDocument { n: 1, q_re: vec![vec![1.0, 1e-10], vec![0.0, 1.0]], q_im: None };
        let (_, w) = doc.into_symbol().unwrap();
        assert_eq!(w.len(), 1);
        let doc = SymbolDocument { n: 1, q_re: vec![vec![1.0, 1e-3], vec![0.0, 1.0]], q_im: None };
        assert!(doc.into_symbol().is_err());
        let doc = SymbolDocument { n: 1, q_re: vec![vec![-1.0, 0.0], vec![0.0, 1.0]], q_im: None };
        assert!(doc.into_symbol().is_err());
    }

    #[test]
    fn random_example_uses_seed() {
        let a = load_example("random:2", 7).unwrap();
        let b = load_example("random:2:7", 0).unwrap();
        assert_eq!(a.symbol, b.symbol);
        assert_eq!(a.source, "example:random:2:7");
    }
}
