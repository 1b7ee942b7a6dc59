//! Gaussian value posteriors and the Thompson Sampling policy.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dtree::{NodeStore, TreeState};
use crate::{Error, Result};

/// A Normal distribution `N(mu, var)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub mu: f64,
    pub var: f64,
}

impl Gaussian {
    pub fn new(mu: f64, var: f64) -> Self {
        debug_assert!(mu.is_finite() && var.is_finite() && var >= 0.0);
        Self { mu, var }
    }

    pub fn std_dev(&self) -> f64 {
        libm::sqrt(self.var)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mu + self.std_dev() * z
    }
}

/// Beta parameters of a region's accuracy posterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    /// `Beta(1 + correct, 1 + n - correct)`.
    pub fn from_counts(correct: u64, n: u64) -> Self {
        debug_assert!(correct <= n);
        Self {
            alpha: 1.0 + correct as f64,
            beta: 1.0 + (n - correct) as f64,
        }
    }
}

/// Moment-matched Normal approximation of a Beta distribution.
pub fn beta_moments(p: BetaParams) -> Gaussian {
    let s = p.alpha + p.beta;
    // one rounding: numerator and denominator are exact for integer counts
    let var = (p.alpha * p.beta) / (s * s * (1.0 + s));
    Gaussian::new(p.alpha / s, var)
}

/// Posterior of a tree's accuracy: the chain-rule-weighted sum of its leaf
/// posteriors, with the summed variance raised to `gamma` to slow its
/// collapse (`gamma = 1` keeps the plain sum).
pub fn leaf_value_posterior(store: &NodeStore, tree: &TreeState, gamma: f64) -> Gaussian {
    let mut mu = 0.0;
    let mut var = 0.0;
    for (leaf, p) in tree.leaf_probabilities(store) {
        let s = store.stats(leaf);
        let g = beta_moments(BetaParams::from_counts(s.correct(), s.n()));
        mu += p * g.mu;
        var += p * p * g.var;
    }
    let var = if gamma == 1.0 {
        var
    } else {
        libm::pow(var, gamma)
    };
    Gaussian::new(mu, var)
}

pub fn normal_pdf(x: f64) -> f64 {
    libm::exp(-0.5 * x * x) / libm::sqrt(2.0 * PI)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Clark's moment-matched Normal for `max(X1, X2)` of independent Normals.
pub fn clark_max(g1: Gaussian, g2: Gaussian) -> Gaussian {
    let a = libm::sqrt(g1.var + g2.var);
    if a == 0.0 {
        return Gaussian::new(g1.mu.max(g2.mu), 0.0);
    }
    let alpha = (g1.mu - g2.mu) / a;
    let (cdf, cdf_neg, pdf) = (normal_cdf(alpha), normal_cdf(-alpha), normal_pdf(alpha));
    let mu = g1.mu * cdf + g2.mu * cdf_neg + a * pdf;
    let second = (g1.mu * g1.mu + g1.var) * cdf
        + (g2.mu * g2.mu + g2.var) * cdf_neg
        + (g1.mu + g2.mu) * a * pdf;
    Gaussian::new(mu, (second - mu * mu).max(0.0))
}

/// Right fold of [`clark_max`]: `clark(g1, clark(g2, ... gn))`.
pub fn fold_max(children: &[Gaussian]) -> Result<Gaussian> {
    let (last, rest) = children.split_last().ok_or(Error::NoChildren)?;
    Ok(rest.iter().rev().fold(*last, |acc, g| clark_max(*g, acc)))
}

/// Posterior of one action out of a search node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChildPosterior {
    pub posterior: Gaussian,
    pub terminal: bool,
}

impl ChildPosterior {
    pub fn terminal(posterior: Gaussian) -> Self {
        Self {
            posterior,
            terminal: true,
        }
    }

    pub fn split(posterior: Gaussian) -> Self {
        Self {
            posterior,
            terminal: false,
        }
    }
}

/// Shifts a split child's mean by the split cost; terminal children pay none.
pub fn penalize(child: Gaussian, terminal: bool, lambda: f64) -> Gaussian {
    if terminal {
        child
    } else {
        Gaussian::new(child.mu - lambda, child.var)
    }
}

/// The penalized child with the largest mean. Ties go to the terminal child,
/// then to the lowest index.
pub fn fast_max(children: &[ChildPosterior], lambda: f64) -> Result<Gaussian> {
    let mut best: Option<(Gaussian, bool)> = None;
    for c in children {
        let g = penalize(c.posterior, c.terminal, lambda);
        best = match best {
            None => Some((g, c.terminal)),
            Some((b, bt)) if g.mu > b.mu || (g.mu == b.mu && c.terminal && !bt) => {
                Some((g, c.terminal))
            }
            keep => keep,
        };
    }
    best.map(|(g, _)| g).ok_or(Error::NoChildren)
}

/// Clark fold over the penalized children.
pub fn clark_fold_penalized(children: &[ChildPosterior], lambda: f64) -> Result<Gaussian> {
    let penalized: Vec<Gaussian> = children
        .iter()
        .map(|c| penalize(c.posterior, c.terminal, lambda))
        .collect();
    fold_max(&penalized)
}

/// Draws one value per child, charges split children `lambda`, and returns
/// the index of the largest draw (lowest index on ties). Child `i` is thus
/// picked with the posterior probability that it is the best action.
pub fn thompson_select<R: Rng + ?Sized>(
    children: &[ChildPosterior],
    lambda: f64,
    rng: &mut R,
) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in children.iter().enumerate() {
        let draw = c.posterior.sample(rng) - if c.terminal { 0.0 } else { lambda };
        if best.is_none_or(|(_, b)| draw > b) {
            best = Some((i, draw));
        }
    }
    best.map(|(i, _)| i).ok_or(Error::NoChildren)
}

/// Monte Carlo estimate of the policy: how often each child wins a joint
/// penalized draw over `trials` rounds.
pub fn policy_probabilities<R: Rng + ?Sized>(
    children: &[ChildPosterior],
    lambda: f64,
    rng: &mut R,
    trials: usize,
) -> Result<Vec<f64>> {
    if trials == 0 {
        return Err(Error::InvalidConfig(
            "policy estimate needs trials >= 1".into(),
        ));
    }
    let mut wins = vec![0usize; children.len()];
    for _ in 0..trials {
        wins[thompson_select(children, lambda, rng)?] += 1;
    }
    Ok(wins.into_iter().map(|w| w as f64 / trials as f64).collect())
}
