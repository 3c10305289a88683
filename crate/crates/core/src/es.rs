//! Canonical Evolution Strategy: Gaussian sampling around a center with a
//! fixed step size, log-rank recombination weights over the top half, and a
//! mean-only update. No covariance or step-size adaptation.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::genome::Genome;

/// Distribution state carried between generations.
#[derive(Debug, Clone)]
pub struct EsState {
    pub center: Genome,
    pub sigma: f64,
    pub generation: u64,
    pub lambda: usize,
    pub mu: usize,
}

impl EsState {
    pub fn new(center: Genome, sigma: f64, lambda: usize, mu: usize) -> Result<Self> {
        if mu < 1 || mu > lambda {
            return Err(Error::InvalidInput(format!(
                "mu must satisfy 1 <= mu <= lambda, got mu={mu} lambda={lambda}"
            )));
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidInput(format!("sigma must be >= 0, got {sigma}")));
        }
        Ok(EsState {
            center,
            sigma,
            generation: 0,
            lambda,
            mu,
        })
    }
}

/// Rank-indexed weights, best rank first. Zero beyond rank mu, sum one.
#[derive(Debug, Clone, PartialEq)]
pub struct RecombinationWeights {
    w: Vec<f64>,
}

impl RecombinationWeights {
    /// Builds a weight vector from raw values, checking the invariants:
    /// nonnegative, nonincreasing, summing to one.
    pub fn from_vec(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidInput("empty weight vector".into()));
        }
        if w.iter().any(|&v| v.is_nan() || v < 0.0) {
            return Err(Error::InvalidInput("weights must be nonnegative".into()));
        }
        if w.windows(2).any(|p| p[0] < p[1]) {
            return Err(Error::InvalidInput("weights must be nonincreasing".into()));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "weights must sum to 1, got {sum}"
            )));
        }
        Ok(RecombinationWeights { w })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn at_rank(&self, rank: usize) -> f64 {
        self.w[rank]
    }
}

/// Log-rank weights: w_i proportional to ln(mu + 0.5) - ln(i) for ranks
/// i <= mu (1-indexed), zero otherwise, normalized to sum 1.
pub fn recombination_weights(lambda: usize, mu: usize) -> Result<RecombinationWeights> {
    if mu < 1 || mu > lambda {
        return Err(Error::InvalidInput(format!(
            "mu must satisfy 1 <= mu <= lambda, got mu={mu} lambda={lambda}"
        )));
    }
    let log_half = (mu as f64 + 0.5).ln();
    let raw: Vec<f64> = (1..=mu).map(|i| log_half - (i as f64).ln()).collect();
    let total: f64 = raw.iter().sum();
    let mut w = vec![0.0; lambda];
    for (i, r) in raw.iter().enumerate() {
        w[i] = r / total;
    }
    Ok(RecombinationWeights { w })
}

/// A population together with its fitness ranking (best first, stable ties).
#[derive(Debug, Clone)]
pub struct RankedPopulation {
    pub genomes: Vec<Genome>,
    pub fitnesses: Vec<f64>,
    pub order: Vec<usize>,
}

impl RankedPopulation {
    pub fn new(genomes: Vec<Genome>, fitnesses: Vec<f64>) -> Result<Self> {
        if genomes.len() != fitnesses.len() {
            return Err(Error::InvalidInput(format!(
                "{} genomes vs {} fitness values",
                genomes.len(),
                fitnesses.len()
            )));
        }
        let order = rank(&fitnesses)?;
        Ok(RankedPopulation {
            genomes,
            fitnesses,
            order,
        })
    }

    pub fn len(&self) -> usize {
        self.genomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genomes.is_empty()
    }

    /// Rank (0-based, best first) of the individual at original index `idx`.
    pub fn rank_of(&self, idx: usize) -> Option<usize> {
        self.order.iter().position(|&o| o == idx)
    }
}

/// Indices sorted by fitness descending; ties keep ascending original index.
pub fn rank(fitnesses: &[f64]) -> Result<Vec<usize>> {
    if let Some(i) = fitnesses.iter().position(|f| f.is_nan()) {
        return Err(Error::InvalidInput(format!("fitness {i} is NaN")));
    }
    let mut order: Vec<usize> = (0..fitnesses.len()).collect();
    order.sort_by(|&a, &b| fitnesses[b].partial_cmp(&fitnesses[a]).unwrap());
    Ok(order)
}

/// Draws `count` genomes as center + sigma * z with z standard normal.
pub fn sample_population<R: Rng>(es: &EsState, count: usize, rng: &mut R) -> Vec<Genome> {
    let n = es.center.len();
    let center = es.center.params();
    (0..count)
        .map(|_| {
            let mut p = Vec::with_capacity(n);
            for &c in center {
                let z: f64 = rng.sample(StandardNormal);
                p.push(c + es.sigma * z);
            }
            Genome::new(p).expect("finite center and sigma give finite samples")
        })
        .collect()
}

/// Mean-only update: center += sum over ranks of w_r * (genome_r - center).
/// Sigma is untouched; the generation counter advances by one.
pub fn es_update(
    es: &EsState,
    pop: &RankedPopulation,
    w: &RecombinationWeights,
) -> Result<EsState> {
    if pop.len() != w.len() {
        return Err(Error::InvalidInput(format!(
            "population size {} does not match weight vector length {}",
            pop.len(),
            w.len()
        )));
    }
    let n = es.center.len();
    let old = es.center.params();
    let mut delta = vec![0.0; n];
    for (r, &idx) in pop.order.iter().enumerate() {
        let wr = w.at_rank(r);
        if wr == 0.0 {
            continue; // zero-weight individuals leave the sum bitwise untouched
        }
        let g = pop.genomes[idx].params();
        if g.len() != n {
            return Err(Error::InvalidInput(format!(
                "genome {idx} length {} does not match center length {n}",
                g.len()
            )));
        }
        for j in 0..n {
            delta[j] += wr * (g[j] - old[j]);
        }
    }
    let new_center: Vec<f64> = old.iter().zip(&delta).map(|(c, d)| c + d).collect();
    Ok(EsState {
        center: Genome::new(new_center)?,
        sigma: es.sigma,
        generation: es.generation + 1,
        lambda: es.lambda,
        mu: es.mu,
    })
}
