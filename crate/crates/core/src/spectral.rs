//! Algebraic connectivity to the reference, `phi = lambda_min(L + G Z)`, and
//! the layer-based upper/lower bounds around it.
//!
//! Undirected networks give a symmetric matrix and go through a symmetric
//! eigensolver. Directed networks use the full dense spectrum and report the
//! smallest real part, which is the slowest decay of `e' = -c (L + G Z) e`.

use std::fmt;

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{CommNetwork, LayerDecomposition, PinningConfig};

pub const EIGEN_TOL: f64 = 1e-10;
pub const ROOT_TOL: f64 = 1e-9;
pub const SANDWICH_SLACK: f64 = 1e-7;

const MAX_EIGEN_ITER: usize = 10_000;

/// How the degree symbols of the bound formulas are read off a layer
/// decomposition.
///
/// * `Literal` takes every index as printed: the pinned layer has no
///   in-links, so the upper bound collapses to zero.
/// * `PinnedOutDegree` reads the sum term as squared out-degrees of the
///   pinned nodes and `d_in_min,0` as the weakest in-link count of layer 1.
///   The lower recursion stays literal.
/// * `LayerChain` reads the upper bound as the two-block Rayleigh compression
///   over `{P, N \ P}` and the lower bound as the Sturm chain of the
///   layer-lumped tridiagonal matrix with weakest backward links and
///   strongest forward links. This is the default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundInterpretation {
    Literal,
    PinnedOutDegree,
    #[default]
    LayerChain,
}

impl BoundInterpretation {
    pub const ALL: [BoundInterpretation; 3] = [
        BoundInterpretation::Literal,
        BoundInterpretation::PinnedOutDegree,
        BoundInterpretation::LayerChain,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            BoundInterpretation::Literal => "literal",
            BoundInterpretation::PinnedOutDegree => "pinned-out-degree",
            BoundInterpretation::LayerChain => "layer-chain",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|i| i.tag() == tag)
    }
}

impl fmt::Display for BoundInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "kebab-case")]
pub enum Bound {
    Value(f64),
    NotApplicable(String),
}

impl Bound {
    pub fn value(&self) -> Option<f64> {
        match self {
            Bound::Value(v) => Some(*v),
            Bound::NotApplicable(_) => None,
        }
    }

    fn from_result(r: Result<f64>) -> Result<Self> {
        match r {
            Ok(v) => Ok(Bound::Value(v)),
            Err(Error::NotApplicable(reason)) => Ok(Bound::NotApplicable(reason)),
            Err(e) => Err(e),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Value(v) => write!(f, "{v}"),
            Bound::NotApplicable(_) => f.write_str("NOT_APPLICABLE"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub phi: f64,
    pub phi_lower: Bound,
    pub phi_upper: Bound,
    pub beta: Bound,
    pub interpretation: BoundInterpretation,
}

/// `L + G Z`.
pub fn pinned_laplacian(net: &CommNetwork, pin: &PinningConfig) -> Result<DMatrix<f64>> {
    if pin.n_nodes() != net.len() {
        return Err(Error::InvalidPinning(format!(
            "pinning configured for {} nodes, network has {}",
            pin.n_nodes(),
            net.len()
        )));
    }
    let mut m = net.laplacian();
    for (i, g) in pin.pinning_diagonal().into_iter().enumerate() {
        m[(i, i)] += g;
    }
    Ok(m)
}

/// Smallest eigenvalue (symmetric) or smallest real part of the spectrum.
pub fn min_real_eigenvalue(m: &DMatrix<f64>, symmetric: bool) -> Result<f64> {
    let failure = || Error::EigenNonConvergence {
        dim: m.nrows(),
        dump: format!("{m}"),
    };
    if symmetric {
        let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, MAX_EIGEN_ITER).ok_or_else(failure)?;
        Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
    } else {
        let schur = Schur::try_new(m.clone(), f64::EPSILON, MAX_EIGEN_ITER).ok_or_else(failure)?;
        Ok(schur
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min))
    }
}

/// Largest eigenvalue magnitude of `L + G Z`, used for step-size guards.
pub fn spectral_radius(m: &DMatrix<f64>, symmetric: bool) -> Result<f64> {
    let failure = || Error::EigenNonConvergence {
        dim: m.nrows(),
        dump: format!("{m}"),
    };
    if symmetric {
        let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, MAX_EIGEN_ITER).ok_or_else(failure)?;
        Ok(eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max))
    } else {
        let schur = Schur::try_new(m.clone(), f64::EPSILON, MAX_EIGEN_ITER).ok_or_else(failure)?;
        Ok(schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

pub fn phi(net: &CommNetwork, pin: &PinningConfig) -> Result<f64> {
    if pin.pinned().is_empty() {
        return Err(Error::EmptyPinningSet);
    }
    let m = pinned_laplacian(net, pin)?;
    min_real_eigenvalue(&m, net.is_undirected())
}

/// `L + G Z - mu* I >= 0`, evaluated as `phi >= mu*` up to solver tolerance.
pub fn check_rate(net: &CommNetwork, pin: &PinningConfig, mu_star: f64) -> Result<bool> {
    if !(mu_star >= 0.0) {
        return Err(Error::InvalidParameter(format!("mu* must be >= 0, got {mu_star}")));
    }
    Ok(phi(net, pin)? >= mu_star - EIGEN_TOL)
}

fn require_undirected(decomp: &LayerDecomposition) -> Result<()> {
    if decomp.undirected {
        Ok(())
    } else {
        Err(Error::NotApplicable(
            "bounds are only defined for undirected networks".into(),
        ))
    }
}

fn require_gain(g: f64) -> Result<()> {
    if g > 0.0 && g.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("pinning gain must be positive, got {g}")))
    }
}

/// Ingredients of the closed-form upper bound: `(beta, sum_term)`.
fn upper_terms(decomp: &LayerDecomposition, g: f64, interp: BoundInterpretation) -> Result<(f64, f64)> {
    require_undirected(decomp)?;
    require_gain(g)?;
    let n = decomp.n_nodes;
    let m = decomp.pinned().len();
    if m >= n {
        return Err(Error::NotApplicable("every node is pinned (m = N)".into()));
    }
    let free = (n - m) as f64;
    let pinned = decomp.pinned();
    let cut: usize = pinned.iter().map(|&i| decomp.d_out[i]).sum();

    let (d_in_min0, sum_term) = match interp {
        BoundInterpretation::Literal => {
            let s: usize = pinned.iter().map(|&i| decomp.d_in[i].pow(2)).sum();
            (decomp.d_in_min(0) as f64, s as f64)
        }
        BoundInterpretation::PinnedOutDegree => {
            let s: usize = pinned.iter().map(|&i| decomp.d_out[i].pow(2)).sum();
            let d1 = if decomp.depth() >= 1 { decomp.d_in_min(1) } else { 0 };
            (d1 as f64, s as f64)
        }
        BoundInterpretation::LayerChain => (cut as f64 / m as f64, g * cut as f64),
    };
    let beta = (cut as f64 + free * (g + d_in_min0)) / (2.0 * free);
    Ok((beta, sum_term))
}

pub fn beta(decomp: &LayerDecomposition, g: f64, interp: BoundInterpretation) -> Result<f64> {
    upper_terms(decomp, g, interp).map(|(b, _)| b)
}

/// Closed-form upper bound `beta (1 - sqrt(1 - S / ((N - m) beta^2)))`.
pub fn phi_upper(decomp: &LayerDecomposition, g: f64, interp: BoundInterpretation) -> Result<f64> {
    let (beta, sum_term) = upper_terms(decomp, g, interp)?;
    let free = decomp.n_nodes - decomp.pinned().len();
    let radicand = 1.0 - sum_term / (free as f64 * beta * beta);
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand {
            radicand,
            beta,
            sum_term,
            free,
        });
    }
    Ok(beta * (1.0 - radicand.sqrt()))
}

/// Coefficients of the layer recursion
/// `alpha_k = c_k - mu`, `alpha_i = a_i - mu - b_i / alpha_{i+1}`.
struct LayerRecursion {
    diag: Vec<f64>,
    coupling: Vec<f64>,
    last: f64,
}

impl LayerRecursion {
    fn new(decomp: &LayerDecomposition, g: f64, interp: BoundInterpretation) -> Self {
        let k = decomp.depth();
        let (diag, coupling) = match interp {
            BoundInterpretation::Literal | BoundInterpretation::PinnedOutDegree => (0..k)
                .map(|i| {
                    let prev_out = if i == 0 { g } else { decomp.d_out_min(i - 1) as f64 };
                    let a = prev_out + decomp.d_in_min(i) as f64;
                    let b = (decomp.d_in_max(i) as f64).powi(2);
                    (a, b)
                })
                .unzip(),
            BoundInterpretation::LayerChain => (0..k)
                .map(|i| {
                    let back = if i == 0 { g } else { decomp.d_in_min(i) as f64 };
                    let fwd = decomp.d_out_max(i) as f64;
                    (back + fwd, decomp.d_in_min(i + 1) as f64 * fwd)
                })
                .unzip(),
        };
        Self {
            diag,
            coupling,
            last: decomp.d_in_min(k) as f64,
        }
    }

    fn depth(&self) -> usize {
        self.diag.len()
    }

    /// Number of negative `alpha_i(mu)`. The recursion is the bottom-up
    /// pivot sequence of a symmetric tridiagonal matrix, so this counts its
    /// eigenvalues below `mu`.
    fn negatives(&self, mu: f64) -> usize {
        let mut alpha = self.last - mu;
        let mut count = usize::from(alpha < 0.0);
        for i in (0..self.depth()).rev() {
            let denom = if alpha == 0.0 { f64::MIN_POSITIVE } else { alpha };
            alpha = self.diag[i] - mu - self.coupling[i] / denom;
            count += usize::from(alpha < 0.0);
        }
        count
    }

    /// Gershgorin bound on the largest eigenvalue.
    fn upper_limit(&self) -> f64 {
        let k = self.depth();
        let off = |i: usize| self.coupling.get(i).map_or(0.0, |b| b.abs().sqrt());
        (0..=k)
            .map(|i| {
                let d = if i < k { self.diag[i] } else { self.last };
                d.abs() + off(i) + if i > 0 { off(i - 1) } else { 0.0 }
            })
            .fold(0.0, f64::max)
    }
}

/// Smallest root of the layer recursion, i.e. the first `mu` at which some
/// `alpha_i(mu)` changes sign.
pub fn phi_lower(decomp: &LayerDecomposition, g: f64, interp: BoundInterpretation) -> Result<f64> {
    require_undirected(decomp)?;
    require_gain(g)?;
    if !decomp.unreachable.is_empty() {
        return Err(Error::NotApplicable(format!(
            "nodes {:?} are unreachable from the pinning set",
            decomp.unreachable
        )));
    }
    if decomp.depth() == 0 {
        // Everything pinned: lambda_min(L + g I) = g.
        return Ok(g);
    }
    let rec = LayerRecursion::new(decomp, g, interp);
    let mut hi = rec.upper_limit() + 1.0;
    if rec.negatives(0.0) > 0 || rec.negatives(hi) == 0 {
        return Err(Error::NoPositiveRoot { scan_max: hi });
    }
    let mut lo = 0.0;
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if rec.negatives(mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `phi` plus both bounds under a uniform gain `g` on `pinned`.
pub fn summarize(
    net: &CommNetwork,
    pinned: &[usize],
    g: f64,
    interp: BoundInterpretation,
) -> Result<SpectralSummary> {
    let pin = PinningConfig::uniform(net.len(), pinned, g)?;
    let phi = phi(net, &pin)?;
    let decomp = net.layer_decompose(pinned)?;
    Ok(SpectralSummary {
        phi,
        phi_lower: Bound::from_result(phi_lower(&decomp, g, interp))?,
        phi_upper: Bound::from_result(phi_upper(&decomp, g, interp))?,
        beta: Bound::from_result(beta(&decomp, g, interp))?,
        interpretation: interp,
    })
}
