//! Placing the RL actor genome into the ES population, with the norm-clipping
//! baseline and per-generation drift telemetry.

use crate::error::{Error, Result};
use crate::es::{EsState, RankedPopulation, RecombinationWeights};
use crate::genome::{l2_distance, Genome};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InjectionMode {
    NoInjection,
    Standard,
    /// Clip radius is clip_factor * sigma * sqrt(n), the expected norm of an
    /// ES sample's deviation, so the actor never dominates a typical step.
    Clipped(f64),
}

impl InjectionMode {
    pub fn injects(&self) -> bool {
        !matches!(self, InjectionMode::NoInjection)
    }
}

/// One generation of drift telemetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSample {
    pub generation: u64,
    pub distance: f64,
    pub actor_weight: f64,
}

/// Appends the actor (verbatim or clipped) as the last population member.
/// With NoInjection the samples pass through unchanged.
pub fn inject(
    samples: Vec<Genome>,
    actor: &Genome,
    mode: InjectionMode,
    es: &EsState,
) -> Result<Vec<Genome>> {
    match mode {
        InjectionMode::NoInjection => Ok(samples),
        InjectionMode::Standard => {
            check_len(actor, es)?;
            let mut pop = samples;
            pop.push(actor.clone());
            Ok(pop)
        }
        InjectionMode::Clipped(clip_factor) => {
            check_len(actor, es)?;
            if clip_factor.is_nan() || clip_factor <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "clip_factor must be positive, got {clip_factor}"
                )));
            }
            let n = es.center.len() as f64;
            let max_norm = clip_factor * es.sigma * n.sqrt();
            let clipped = clip_deviation(actor, &es.center, max_norm)?;
            let mut pop = samples;
            pop.push(clipped);
            Ok(pop)
        }
    }
}

fn check_len(actor: &Genome, es: &EsState) -> Result<()> {
    if actor.len() != es.center.len() {
        return Err(Error::InvalidInput(format!(
            "actor genome length {} does not match center length {}",
            actor.len(),
            es.center.len()
        )));
    }
    Ok(())
}

/// Rescales the deviation from `center` to at most `max_norm`, preserving its
/// direction. Inside the ball (or with zero deviation) the actor is returned
/// unchanged.
pub fn clip_deviation(actor: &Genome, center: &Genome, max_norm: f64) -> Result<Genome> {
    let dist = l2_distance(actor, center)?;
    // The boundary comparison carries a few ulps of slack: a just-clipped
    // deviation recomputes to max_norm only up to rounding, and re-clipping
    // must be an exact no-op.
    if dist <= max_norm * (1.0 + 1e-12) {
        return Ok(actor.clone());
    }
    let scale = max_norm / dist;
    let params: Vec<f64> = center
        .params()
        .iter()
        .zip(actor.params())
        .map(|(c, a)| c + (a - c) * scale)
        .collect();
    Genome::new(params)
}

/// Distance from the actor to the ES center plus the recombination weight the
/// actor received this generation. When injection is active the actor is the
/// last population member; otherwise its weight is zero.
pub fn measure_drift(
    actor: &Genome,
    es: &EsState,
    pop: &RankedPopulation,
    w: &RecombinationWeights,
    injected: bool,
) -> Result<DriftSample> {
    let distance = l2_distance(actor, &es.center)?;
    let actor_weight = if injected && !pop.is_empty() {
        let idx = pop.len() - 1;
        pop.rank_of(idx).map(|r| w.at_rank(r)).unwrap_or(0.0)
    } else {
        0.0
    };
    Ok(DriftSample {
        generation: es.generation,
        distance,
        actor_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::es::{es_update, recombination_weights, sample_population};
    use crate::rng::RngTree;

    fn es_with_center(center: Vec<f64>, sigma: f64, lambda: usize, mu: usize) -> EsState {
        EsState::new(Genome::new(center).unwrap(), sigma, lambda, mu).unwrap()
    }

    #[test]
    fn clip_hand_case() {
        let center = Genome::zeros(2);
        let actor = Genome::new(vec![3.0, 4.0]).unwrap();
        let out = clip_deviation(&actor, &center, 2.5).unwrap();
        assert_eq!(out.params(), &[1.5, 2.0]);
    }

    #[test]
    fn clip_noop_inside_ball_and_on_boundary() {
        let center = Genome::zeros(2);
        let actor = Genome::new(vec![3.0, 4.0]).unwrap();
        assert_eq!(clip_deviation(&actor, &center, 6.0).unwrap(), actor);
        assert_eq!(clip_deviation(&actor, &center, 5.0).unwrap(), actor);
        // zero deviation
        assert_eq!(clip_deviation(&center, &center, 1.0).unwrap(), center);
    }

    #[test]
    fn clip_is_idempotent() {
        let center = Genome::new(vec![1.0, -1.0, 0.5]).unwrap();
        let actor = Genome::new(vec![9.0, 4.0, -3.0]).unwrap();
        let once = clip_deviation(&actor, &center, 2.0).unwrap();
        let twice = clip_deviation(&once, &center, 2.0).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn standard_injection_appends_actor() {
        let es = es_with_center(vec![0.0, 0.0], 1.0, 3, 1);
        let samples = sample_population(&es, 2, &mut RngTree::new(2).stream("es_sampling"));
        let pop = inject(samples, &es.center.clone(), InjectionMode::Standard, &es).unwrap();
        assert_eq!(pop.len(), 3);
        assert_eq!(pop[2], es.center);
    }

    #[test]
    fn clipped_injection_inside_radius_equals_standard() {
        let es = es_with_center(vec![0.0, 0.0], 1.0, 3, 1);
        let actor = Genome::new(vec![0.1, 0.1]).unwrap();
        let samples = sample_population(&es, 2, &mut RngTree::new(2).stream("es_sampling"));
        let std_pop = inject(samples.clone(), &actor, InjectionMode::Standard, &es).unwrap();
        let clip_pop = inject(samples, &actor, InjectionMode::Clipped(1.0), &es).unwrap();
        assert_eq!(std_pop, clip_pop);
    }

    #[test]
    fn no_injection_passes_through() {
        let es = es_with_center(vec![0.0], 1.0, 2, 1);
        let samples = sample_population(&es, 2, &mut RngTree::new(2).stream("es_sampling"));
        let pop = inject(
            samples.clone(),
            &es.center.clone(),
            InjectionMode::NoInjection,
            &es,
        )
        .unwrap();
        assert_eq!(pop, samples);
    }

    #[test]
    fn injection_length_mismatch_errors() {
        let es = es_with_center(vec![0.0, 0.0], 1.0, 2, 1);
        let actor = Genome::zeros(3);
        assert!(inject(vec![], &actor, InjectionMode::Standard, &es).is_err());
    }

    #[test]
    fn drift_actor_at_center() {
        let es = es_with_center(vec![1.0, 2.0], 1.0, 2, 1);
        let pop = RankedPopulation::new(
            vec![es.center.clone(), es.center.clone()],
            vec![1.0, 0.0],
        )
        .unwrap();
        let w = recombination_weights(2, 1).unwrap();
        let d = measure_drift(&es.center.clone(), &es, &pop, &w, true).unwrap();
        assert_eq!(d.distance, 0.0);
    }

    #[test]
    fn drift_weight_by_actor_rank() {
        let es = es_with_center(vec![0.0], 1.0, 4, 2);
        let genomes = vec![
            Genome::new(vec![1.0]).unwrap(),
            Genome::new(vec![2.0]).unwrap(),
            Genome::new(vec![3.0]).unwrap(),
            Genome::new(vec![4.0]).unwrap(), // actor, last member
        ];
        let w = recombination_weights(4, 2).unwrap();
        // Actor ranked worst: weight 0.
        let pop = RankedPopulation::new(genomes.clone(), vec![4.0, 3.0, 2.0, 1.0]).unwrap();
        let actor = genomes[3].clone();
        let d = measure_drift(&actor, &es, &pop, &w, true).unwrap();
        assert_eq!(d.actor_weight, 0.0);
        // Actor ranked best: top weight.
        let pop = RankedPopulation::new(genomes, vec![1.0, 2.0, 3.0, 9.0]).unwrap();
        let d = measure_drift(&actor, &es, &pop, &w, true).unwrap();
        assert!((d.actor_weight - 0.804163).abs() < 1e-5);
        // Not injected: weight 0 regardless.
        let d2 = measure_drift(&actor, &es, &pop, &w, false).unwrap();
        assert_eq!(d2.actor_weight, 0.0);
        assert_eq!(d2.distance, 4.0);
    }

    #[test]
    fn bottom_ranked_actor_leaves_update_unchanged() {
        // Standard injection with the actor ranked in the bottom half gives
        // the same center as the no-injection update restricted to samples.
        let mut rng = RngTree::new(31).stream("es_sampling");
        let es = es_with_center(vec![0.0; 5], 1.0, 4, 2);
        let samples = sample_population(&es, 3, &mut rng);
        let actor = Genome::new(vec![50.0; 5]).unwrap();
        let pop_genomes = inject(samples.clone(), &actor, InjectionMode::Standard, &es).unwrap();
        let fits = vec![3.0, 2.0, 1.0, -10.0]; // actor last and worst
        let w4 = recombination_weights(4, 2).unwrap();
        let with_inject = es_update(
            &es,
            &RankedPopulation::new(pop_genomes, fits.clone()).unwrap(),
            &w4,
        )
        .unwrap();
        // Restricted update: same ranked samples, same top weights with the
        // trailing zero dropped.
        let w3 = RecombinationWeights::from_vec(w4.as_slice()[..3].to_vec()).unwrap();
        let without = es_update(
            &es,
            &RankedPopulation::new(samples, fits[..3].to_vec()).unwrap(),
            &w3,
        )
        .unwrap();
        assert_eq!(with_inject.center.params(), without.center.params());
    }
}
