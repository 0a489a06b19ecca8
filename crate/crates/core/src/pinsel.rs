//! Pinning-set selection: the greedy degree-minus-distance rule for a fixed
//! set size, its rate-driven extension that grows the set until a target
//! connectivity is met, and an exhaustive oracle for small networks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{CommNetwork, Hops, PinningConfig};
use crate::spectral;

/// Largest number of subsets the exhaustive search will evaluate.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

/// Relative tolerance when grouping co-maximal subsets by `phi`.
const PHI_TIE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Score {
    NegInfinite,
    Finite(i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub node: usize,
    pub deg: usize,
    pub path: Hops,
    pub score: Score,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMethod {
    FixedSize,
    TargetRate,
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: SelectionMethod,
    /// Selected nodes in the order they were added.
    pub pinned: Vec<usize>,
    /// Candidate scores, one list per greedy iteration.
    pub score_trace: Vec<Vec<CandidateScore>>,
    /// All arg-max candidates per greedy iteration; the first one was taken.
    pub ties: Vec<Vec<usize>>,
    /// Co-maximal subsets found by the exhaustive search.
    pub alternatives: Vec<Vec<usize>>,
    pub gain: f64,
    pub achieved_phi: f64,
    pub iterations: usize,
}

impl SelectionResult {
    pub fn sorted_set(&self) -> Vec<usize> {
        let mut s = self.pinned.clone();
        s.sort_unstable();
        s
    }
}

/// Desired convergence rate and the connectivity it requires.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateTarget {
    pub lambda_star: f64,
    pub mu_star: f64,
}

impl RateTarget {
    /// `mu* = lambda* / min(c_v, c_omega)`.
    pub fn new(lambda_star: f64, c_v: f64, c_omega: f64) -> Result<Self> {
        if !(lambda_star > 0.0) || !(c_v > 0.0) || !(c_omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rate target needs lambda* > 0 and positive gains (lambda* = {lambda_star}, c_v = {c_v}, c_omega = {c_omega})"
            )));
        }
        Ok(Self {
            lambda_star,
            mu_star: lambda_star / c_v.min(c_omega),
        })
    }
}

/// Incremental greedy selection. Each call to [`Greedy::step`] adds the
/// candidate maximizing `deg(P + i) - path(P + i, I - i)`; ties go to the
/// lowest index.
pub struct Greedy<'a> {
    net: &'a CommNetwork,
    pinned: Vec<usize>,
    in_set: Vec<bool>,
    score_trace: Vec<Vec<CandidateScore>>,
    ties: Vec<Vec<usize>>,
}

impl<'a> Greedy<'a> {
    pub fn new(net: &'a CommNetwork) -> Self {
        Self {
            net,
            pinned: Vec::new(),
            in_set: vec![false; net.len()],
            score_trace: Vec::new(),
            ties: Vec::new(),
        }
    }

    pub fn pinned(&self) -> &[usize] {
        &self.pinned
    }

    pub fn score(&self, candidate: usize) -> CandidateScore {
        let mut with = self.pinned.clone();
        with.push(candidate);
        let rest: Vec<usize> = (0..self.net.len())
            .filter(|&j| !self.in_set[j] && j != candidate)
            .collect();
        // `with` is nonempty and in range, so neither metric can fail.
        let deg = self.net.deg_metric(&with).expect("valid candidate set");
        let path = self.net.path_metric(&with, &rest).expect("valid candidate set");
        let score = match path {
            Hops::Finite(p) => Score::Finite(deg as i64 - p as i64),
            Hops::Infinite => Score::NegInfinite,
        };
        CandidateScore {
            node: candidate,
            deg,
            path,
            score,
        }
    }

    pub fn step(&mut self) -> Result<usize> {
        let candidates: Vec<usize> = (0..self.net.len()).filter(|&i| !self.in_set[i]).collect();
        if candidates.is_empty() {
            return Err(Error::TooManyPins {
                m: self.pinned.len() + 1,
                n: self.net.len(),
            });
        }
        let scores: Vec<CandidateScore> = candidates.par_iter().map(|&i| self.score(i)).collect();
        let best = scores.iter().map(|c| c.score).max().expect("nonempty");
        if best == Score::NegInfinite {
            return Err(Error::Uncoverable {
                unreachable: self.best_uncovered(&candidates),
            });
        }
        let tied: Vec<usize> = scores
            .iter()
            .filter(|c| c.score == best)
            .map(|c| c.node)
            .collect();
        let chosen = tied[0];
        self.pinned.push(chosen);
        self.in_set[chosen] = true;
        self.score_trace.push(scores);
        self.ties.push(tied);
        Ok(chosen)
    }

    fn best_uncovered(&self, candidates: &[usize]) -> Vec<usize> {
        candidates
            .iter()
            .map(|&i| {
                let mut with = self.pinned.clone();
                with.push(i);
                let dist = self.net.distances_from(&with);
                (0..self.net.len())
                    .filter(|&j| dist[j] == Hops::Infinite)
                    .collect::<Vec<_>>()
            })
            .min_by_key(Vec::len)
            .unwrap_or_default()
    }

    fn finish(self, method: SelectionMethod, gain: f64, achieved_phi: f64) -> SelectionResult {
        SelectionResult {
            method,
            iterations: self.pinned.len(),
            pinned: self.pinned,
            score_trace: self.score_trace,
            ties: self.ties,
            alternatives: Vec::new(),
            gain,
            achieved_phi,
        }
    }
}

fn phi_of(net: &CommNetwork, pinned: &[usize], gain: f64) -> Result<f64> {
    spectral::phi(net, &PinningConfig::uniform(net.len(), pinned, gain)?)
}

fn check_gain(gain: f64) -> Result<()> {
    if gain > 0.0 && gain.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("pinning gain must be positive, got {gain}")))
    }
}

/// Greedy selection of exactly `m` nodes; `achieved_phi` is evaluated with
/// uniform gain `gain`.
pub fn algorithm1(net: &CommNetwork, m: usize, gain: f64) -> Result<SelectionResult> {
    check_gain(gain)?;
    if m > net.len() {
        return Err(Error::TooManyPins { m, n: net.len() });
    }
    if m == 0 {
        return Err(Error::EmptyPinningSet);
    }
    let mut greedy = Greedy::new(net);
    for _ in 0..m {
        greedy.step()?;
    }
    let phi = phi_of(net, greedy.pinned(), gain)?;
    Ok(greedy.finish(SelectionMethod::FixedSize, gain, phi))
}

/// Smallest `m >= 1` whose top-`m` out-degree sum reaches `(N - 1) mu*`.
pub fn initial_pin_count(net: &CommNetwork, mu_star: f64) -> usize {
    let mut degrees: Vec<usize> = (0..net.len()).map(|i| net.out_degree(i)).collect();
    degrees.sort_unstable_by(|a, b| b.cmp(a));
    let need = (net.len() as f64 - 1.0) * mu_star;
    let mut sum = 0usize;
    for (k, d) in degrees.iter().enumerate() {
        sum += d;
        if sum as f64 >= need {
            return k + 1;
        }
    }
    net.len()
}

/// Grows the greedy set from the degree-based initial size until
/// `L + g Z - mu* I` is positive semidefinite.
pub fn algorithm2(net: &CommNetwork, gain: f64, target: RateTarget) -> Result<SelectionResult> {
    check_gain(gain)?;
    if !(target.mu_star > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mu* must be positive, got {}",
            target.mu_star
        )));
    }
    let start = initial_pin_count(net, target.mu_star);
    let mut greedy = Greedy::new(net);
    for _ in 0..start {
        greedy.step()?;
    }
    let mut best_phi = f64::NEG_INFINITY;
    loop {
        let phi = phi_of(net, greedy.pinned(), gain)?;
        best_phi = best_phi.max(phi);
        if phi >= target.mu_star - spectral::EIGEN_TOL {
            return Ok(greedy.finish(SelectionMethod::TargetRate, gain, phi));
        }
        if greedy.pinned().len() == net.len() {
            return Err(Error::Unattainable {
                gain,
                mu_star: target.mu_star,
                best_phi,
            });
        }
        greedy.step()?;
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// All `m`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..m).rev().find(|&p| idx[p] != p + n - m) else {
            break;
        };
        idx[pos] += 1;
        for q in pos + 1..m {
            idx[q] = idx[q - 1] + 1;
        }
    }
    out
}

/// Evaluates `phi` on every `m`-subset and returns the lexicographically
/// first maximizer, listing every co-maximal subset.
pub fn brute_force_opt(net: &CommNetwork, m: usize, gain: f64) -> Result<SelectionResult> {
    check_gain(gain)?;
    let n = net.len();
    if m == 0 {
        return Err(Error::EmptyPinningSet);
    }
    if m > n {
        return Err(Error::TooManyPins { m, n });
    }
    let count = binomial(n, m);
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::GuardExceeded {
            n,
            m,
            count,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let sets = subsets(n, m);
    let phis: Vec<f64> = sets
        .par_iter()
        .map(|s| phi_of(net, s, gain))
        .collect::<Result<_>>()?;
    let best = phis.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = PHI_TIE_TOL * best.abs().max(1.0);
    let alternatives: Vec<Vec<usize>> = sets
        .iter()
        .zip(&phis)
        .filter(|(_, &p)| best - p <= tol)
        .map(|(s, _)| s.clone())
        .collect();
    let winner = alternatives[0].clone();
    let achieved_phi = phi_of(net, &winner, gain)?;
    Ok(SelectionResult {
        method: SelectionMethod::Exhaustive,
        pinned: winner,
        score_trace: Vec::new(),
        ties: Vec::new(),
        alternatives,
        gain,
        achieved_phi,
        iterations: sets.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn undirected(n: usize, pairs: &[(usize, usize)]) -> CommNetwork {
        let edges: Vec<_> = pairs.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
        CommNetwork::build(n, &edges).unwrap()
    }

    #[test]
    fn star_center_wins() {
        let net = undirected(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let r = algorithm1(&net, 1, 1.0).unwrap();
        assert_eq!(r.pinned, vec![0]);
        assert_eq!(r.ties, vec![vec![0]]);
        assert_eq!(r.score_trace[0][0].score, Score::Finite(0));
    }

    #[test]
    fn full_set_when_m_equals_n() {
        let net = undirected(4, &[(0, 1), (1, 2), (2, 3)]);
        let r = algorithm1(&net, 4, 0.5).unwrap();
        assert_eq!(r.sorted_set(), vec![0, 1, 2, 3]);
        assert!(matches!(algorithm1(&net, 5, 0.5), Err(Error::TooManyPins { .. })));
        let b = brute_force_opt(&net, 4, 0.5).unwrap();
        assert_eq!(b.pinned, vec![0, 1, 2, 3]);
        assert!((b.achieved_phi - 0.5).abs() < 1e-10);
    }

    #[test]
    fn disconnected_network_cannot_be_covered_by_one_pin() {
        let net = undirected(4, &[(0, 1), (2, 3)]);
        match algorithm1(&net, 1, 1.0) {
            Err(Error::Uncoverable { unreachable }) => assert_eq!(unreachable, vec![2, 3]),
            other => panic!("expected uncoverable, got {other:?}"),
        }
    }

    #[test]
    fn sinks_are_never_chosen_first() {
        // 0 -> 1 -> 2 with 2 a sink
        let net = CommNetwork::build(3, &[(0, 1), (1, 2), (1, 0)]).unwrap();
        let r = algorithm1(&net, 1, 1.0).unwrap();
        assert_ne!(r.pinned[0], 2);
        assert_eq!(
            r.score_trace[0].iter().find(|c| c.node == 2).unwrap().score,
            Score::NegInfinite
        );
    }

    #[test]
    fn singleton_network_algorithm2() {
        let net = CommNetwork::build(1, &[]).unwrap();
        let target = RateTarget { lambda_star: 0.4, mu_star: 0.1 };
        let r = algorithm2(&net, 0.2, target).unwrap();
        assert_eq!(r.pinned, vec![0]);
        let hard = RateTarget { lambda_star: 0.4, mu_star: 0.3 };
        assert!(matches!(
            algorithm2(&net, 0.2, hard),
            Err(Error::Unattainable { best_phi, .. }) if (best_phi - 0.2).abs() < 1e-12
        ));
    }

    #[test]
    fn initial_count_is_floored_at_one() {
        let net = undirected(3, &[(0, 1), (1, 2)]);
        assert_eq!(initial_pin_count(&net, 1e-9), 1);
        assert_eq!(initial_pin_count(&net, 1.5), 2);
        assert_eq!(initial_pin_count(&net, 100.0), 3);
    }

    #[test]
    fn rate_target_uses_smaller_gain() {
        let t = RateTarget::new(10.0, 400.0, 200.0).unwrap();
        assert!((t.mu_star - 0.05).abs() < 1e-15);
        assert!(RateTarget::new(0.0, 400.0, 400.0).is_err());
    }

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(4, 2)[0], vec![0, 1]);
        assert_eq!(subsets(4, 2)[5], vec![2, 3]);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(binomial(40, 20), 137_846_528_820);
        let net = CommNetwork::build(40, &[]).unwrap();
        assert!(matches!(
            brute_force_opt(&net, 20, 1.0),
            Err(Error::GuardExceeded { .. })
        ));
    }
}
