//! Central finite-difference verification of the analytic gradients, over
//! random tiny networks and batches. The differencing only ever calls the
//! forward-path loss functions, so it is independent of the backward pass it
//! checks.

use rand::Rng;

use crate::genome::{init_genome, init_params, PolicyArchitecture};
use crate::rng::RngTree;
use crate::td3::{critic_shape, Batch, RegularizationMode, Td3Hyperparams, Td3State, Transition};
use crate::Result;

pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default)]
pub struct GradCheckReport {
    pub instances: usize,
    pub critic_max_rel: f64,
    pub actor_none_max_rel: f64,
    pub actor_l2_max_rel: f64,
    pub actor_squared_max_rel: f64,
}

impl GradCheckReport {
    pub fn worst(&self) -> f64 {
        self.critic_max_rel
            .max(self.actor_none_max_rel)
            .max(self.actor_l2_max_rel)
            .max(self.actor_squared_max_rel)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.worst() < tol
    }
}

/// Relative error with a unit floor so exact-zero gradients compare by
/// absolute difference instead of dividing by noise.
fn rel_err(a: f64, f: f64) -> f64 {
    (a - f).abs() / a.abs().max(f.abs()).max(1.0)
}

fn max_rel(analytic: &[f64], fd: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(fd)
        .map(|(&a, &f)| rel_err(a, f))
        .fold(0.0, f64::max)
}

fn fd_gradient<F: FnMut(&[f64]) -> Result<f64>>(params: &[f64], mut loss: F) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; params.len()];
    let mut p = params.to_vec();
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + FD_STEP;
        let up = loss(&p)?;
        p[i] = orig - FD_STEP;
        let down = loss(&p)?;
        p[i] = orig;
        grad[i] = (up - down) / (2.0 * FD_STEP);
    }
    Ok(grad)
}

fn random_batch<R: Rng>(obs_dim: usize, act_dim: usize, size: usize, rng: &mut R) -> Batch {
    let transitions: Vec<Transition> = (0..size)
        .map(|_| Transition {
            state: (0..obs_dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            action: (0..act_dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            reward: rng.random_range(-1.0..1.0),
            next_state: (0..obs_dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            done: rng.random_range(0..5) == 0,
        })
        .collect();
    Batch::from_transitions(&transitions).expect("non-empty transition list")
}

/// Runs `instances` random tiny cases (obs 3, hidden [4,4], act 2, batch 5)
/// and reports maximum relative errors per loss family.
pub fn run_gradcheck(instances: usize, seed: u64) -> Result<GradCheckReport> {
    let tree = RngTree::new(seed);
    let mut report = GradCheckReport {
        instances,
        ..Default::default()
    };
    for k in 0..instances {
        let mut rng = tree.indexed_stream("gradcheck", k as u64, 0);
        let arch = PolicyArchitecture::with_hidden(3, 2, vec![4, 4]);
        let mut actor = init_genome(&arch, &mut rng);
        let cshape = critic_shape(&arch);
        let mut c1 = init_params(&cshape, &mut rng);
        let mut c2 = init_params(&cshape, &mut rng);
        // Jitter every parameter (in particular the zero-initialized biases)
        // so no ReLU pre-activation sits exactly on its kink, where finite
        // differences straddle the nondifferentiable point.
        for v in actor
            .params_mut()
            .iter_mut()
            .chain(&mut c1)
            .chain(&mut c2)
        {
            *v += rng.random_range(-0.3..0.3);
        }
        let batch = random_batch(3, 2, 5, &mut rng);
        let mut center = actor.clone();
        for v in center.params_mut() {
            *v += rng.random_range(-0.5..0.5);
        }
        let state = Td3State::new(
            arch,
            actor,
            c1,
            c2,
            RegularizationMode::None,
            Td3Hyperparams::default(),
        )?;

        // Critic loss with fixed targets.
        let y = state.td3_target(&batch, &mut tree.indexed_stream("gradcheck-noise", k as u64, 0))?;
        let (_, g1, g2) = state.critic_gradient(&batch, &y)?;
        let fd1 = fd_gradient(&state.critic1, |p| {
            state.critic_loss_at(p, &state.critic2, &batch, &y)
        })?;
        let fd2 = fd_gradient(&state.critic2, |p| {
            state.critic_loss_at(&state.critic1, p, &batch, &y)
        })?;
        report.critic_max_rel = report
            .critic_max_rel
            .max(max_rel(&g1, &fd1))
            .max(max_rel(&g2, &fd2));

        // Actor loss, all three regularization variants.
        for mode in [
            RegularizationMode::None,
            RegularizationMode::L2(0.1),
            RegularizationMode::SquaredL2(0.1),
        ] {
            let mut s = state.clone();
            s.regularization = mode;
            let (_, analytic) = s.actor_gradient(&batch, &center)?;
            let fd = fd_gradient(s.actor.params(), |p| s.actor_loss_at(p, &batch, &center))?;
            let err = max_rel(&analytic, &fd);
            match mode {
                RegularizationMode::None => {
                    report.actor_none_max_rel = report.actor_none_max_rel.max(err)
                }
                RegularizationMode::L2(_) => {
                    report.actor_l2_max_rel = report.actor_l2_max_rel.max(err)
                }
                RegularizationMode::SquaredL2(_) => {
                    report.actor_squared_max_rel = report.actor_squared_max_rel.max(err)
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradients_match_finite_differences() {
        let report = run_gradcheck(5, 123).unwrap();
        assert!(
            report.passes(1e-4),
            "max relative errors: critic {:.3e}, none {:.3e}, l2 {:.3e}, squared {:.3e}",
            report.critic_max_rel,
            report.actor_none_max_rel,
            report.actor_l2_max_rel,
            report.actor_squared_max_rel
        );
        // The check is non-vacuous; errors are small but nonzero.
        assert!(report.worst() > 0.0);
    }
}

