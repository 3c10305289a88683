//! Deterministic desk-scale continuous-control environments and the rollout
//! procedure producing fitness values and replay transitions.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::genome::{policy_forward, Genome, PolicyArchitecture};
use crate::td3::{ReplayBuffer, Transition};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvSpec {
    pub name: String,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub horizon: usize,
}

/// Environment dynamics. All are fully deterministic with a fixed initial
/// state; actions live in [-1, 1] per component.
#[derive(Debug, Clone, PartialEq)]
pub enum Env {
    /// 2-D double integrator started at (1, 1); reward is -|pos| per step.
    PointMass,
    /// Torque-limited swing-up from hanging down; shaped angle/velocity cost.
    Pendulum,
    /// One-shot action matching against a fixed target; concave landscape
    /// with a unique maximizer.
    StaticTarget { dim: usize, target: Vec<f64> },
}

/// Physical state plus the step counter used for horizon termination.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub t: usize,
    pub phys: Vec<f64>,
}

impl Env {
    pub fn from_name(name: &str) -> Result<Env> {
        match name {
            "point_mass" => Ok(Env::PointMass),
            "pendulum" => Ok(Env::Pendulum),
            "static_target" => Ok(Env::static_target(2)),
            other => Err(Error::Config(format!(
                "unknown env name: {other} (expected static_target, point_mass, pendulum)"
            ))),
        }
    }

    /// Target components alternate +0.5 / -0.5, all strictly inside (-1, 1).
    pub fn static_target(dim: usize) -> Env {
        let target = (0..dim)
            .map(|i| if i % 2 == 0 { 0.5 } else { -0.5 })
            .collect();
        Env::StaticTarget { dim, target }
    }

    pub fn spec(&self) -> EnvSpec {
        match self {
            Env::PointMass => EnvSpec {
                name: "point_mass".into(),
                obs_dim: 4,
                act_dim: 2,
                horizon: 100,
            },
            Env::Pendulum => EnvSpec {
                name: "pendulum".into(),
                obs_dim: 3,
                act_dim: 1,
                horizon: 200,
            },
            Env::StaticTarget { dim, .. } => EnvSpec {
                name: "static_target".into(),
                obs_dim: *dim,
                act_dim: *dim,
                horizon: 1,
            },
        }
    }

    /// Fixed deterministic initial state; no reset randomness.
    pub fn reset(&self) -> EnvState {
        let phys = match self {
            Env::PointMass => vec![1.0, 1.0, 0.0, 0.0], // pos, vel
            Env::Pendulum => vec![std::f64::consts::PI, 0.0], // theta, omega
            Env::StaticTarget { .. } => vec![],
        };
        EnvState { t: 0, phys }
    }

    pub fn observe(&self, state: &EnvState) -> Vec<f64> {
        match self {
            Env::PointMass => state.phys.clone(),
            Env::Pendulum => {
                let (theta, omega) = (state.phys[0], state.phys[1]);
                vec![theta.cos(), theta.sin(), omega]
            }
            Env::StaticTarget { dim, .. } => vec![1.0; *dim],
        }
    }

    /// One dynamics step. Out-of-bounds actions are clamped, not rejected.
    /// `done` is true only when the horizon is reached.
    pub fn step(&self, state: &EnvState, action: &[f64]) -> Result<(EnvState, f64, bool)> {
        let spec = self.spec();
        if action.len() != spec.act_dim {
            return Err(Error::InvalidInput(format!(
                "action length {} does not match act_dim {}",
                action.len(),
                spec.act_dim
            )));
        }
        let a: Vec<f64> = action.iter().map(|v| v.clamp(-1.0, 1.0)).collect();
        let (phys, reward) = match self {
            Env::PointMass => {
                let (px, py, vx, vy) = (
                    state.phys[0],
                    state.phys[1],
                    state.phys[2],
                    state.phys[3],
                );
                let nvx = vx + 0.1 * a[0];
                let nvy = vy + 0.1 * a[1];
                let npx = px + 0.1 * nvx;
                let npy = py + 0.1 * nvy;
                let reward = -(npx * npx + npy * npy).sqrt();
                (vec![npx, npy, nvx, nvy], reward)
            }
            Env::Pendulum => {
                let (theta, omega) = (state.phys[0], state.phys[1]);
                let torque = 2.0 * a[0];
                let new_omega = (omega + 0.05 * (-10.0 * theta.sin() + torque)).clamp(-8.0, 8.0);
                let new_theta = theta + 0.05 * new_omega;
                let wrapped = wrap_angle(new_theta);
                let reward = -(wrapped * wrapped
                    + 0.1 * new_omega * new_omega
                    + 0.001 * torque * torque);
                (vec![new_theta, new_omega], reward)
            }
            Env::StaticTarget { target, .. } => {
                let err: f64 = a
                    .iter()
                    .zip(target)
                    .map(|(ai, ti)| (ai - ti) * (ai - ti))
                    .sum();
                (vec![], -err)
            }
        };
        let t = state.t + 1;
        let done = t >= spec.horizon;
        Ok((EnvState { t, phys }, reward, done))
    }
}

/// Maps an angle to (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = theta % two_pi;
    if w > std::f64::consts::PI {
        w -= two_pi;
    } else if w <= -std::f64::consts::PI {
        w += two_pi;
    }
    w
}

#[derive(Debug, Clone)]
pub struct RolloutResult {
    /// Undiscounted sum of rewards.
    pub fitness: f64,
    pub transitions: Vec<Transition>,
    pub steps: usize,
}

/// Runs the policy for one episode. With `exploration_std > 0` Gaussian noise
/// is added to each action before clamping to [-1, 1]. Transitions are pushed
/// to the buffer when one is provided, and always returned in the result.
pub fn rollout<R: Rng>(
    env: &Env,
    arch: &PolicyArchitecture,
    genome: &Genome,
    exploration_std: f64,
    rng: &mut R,
    mut buffer: Option<&mut ReplayBuffer>,
) -> Result<RolloutResult> {
    let spec = env.spec();
    if arch.obs_dim != spec.obs_dim || arch.act_dim != spec.act_dim {
        return Err(Error::InvalidInput(format!(
            "architecture dims ({}, {}) do not match env dims ({}, {})",
            arch.obs_dim, arch.act_dim, spec.obs_dim, spec.act_dim
        )));
    }
    let mut state = env.reset();
    let mut fitness = 0.0;
    let mut transitions = Vec::new();
    loop {
        let obs = env.observe(&state);
        let mut action = policy_forward(arch, genome, &obs)?;
        if exploration_std > 0.0 {
            for v in &mut action {
                let z: f64 = rng.sample(StandardNormal);
                *v = (*v + exploration_std * z).clamp(-1.0, 1.0);
            }
        }
        let (next_state, reward, done) = env.step(&state, &action)?;
        fitness += reward;
        let transition = Transition {
            state: obs,
            action,
            reward,
            next_state: env.observe(&next_state),
            done,
        };
        if let Some(buf) = buffer.as_deref_mut() {
            buf.push(transition.clone())?;
        }
        transitions.push(transition);
        state = next_state;
        if done {
            break;
        }
    }
    Ok(RolloutResult {
        fitness,
        steps: transitions.len(),
        transitions,
    })
}
