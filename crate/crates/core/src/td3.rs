//! TD3 learner with manual reverse-mode gradients over the fixed MLP
//! architecture, a ring replay buffer, and the drift-regularized actor loss
//! (L2 or squared-L2 penalty on the distance to the ES center).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{concatenate, Array1, Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::genome::{l2_distance, read_f64_vec, write_f64_vec, Genome, PolicyArchitecture};
use crate::nn::{MlpShape, OutputActivation};

/// One environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// Fixed-capacity ring buffer with FIFO overwrite.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    obs_dim: usize,
    act_dim: usize,
    capacity: usize,
    data: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, obs_dim: usize, act_dim: usize) -> Self {
        assert!(capacity > 0, "capacity must be positive");
        ReplayBuffer {
            obs_dim,
            act_dim,
            capacity,
            data: Vec::new(),
            cursor: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if t.state.len() != self.obs_dim
            || t.next_state.len() != self.obs_dim
            || t.action.len() != self.act_dim
        {
            return Err(Error::InvalidInput(format!(
                "transition dims (obs {}, act {}, next {}) do not match buffer dims (obs {}, act {})",
                t.state.len(),
                t.action.len(),
                t.next_state.len(),
                self.obs_dim,
                self.act_dim
            )));
        }
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[self.cursor] = t;
            self.cursor = (self.cursor + 1) % self.capacity;
        }
        Ok(())
    }

    /// Uniform sampling with replacement.
    pub fn sample<R: Rng>(&self, batch: usize, rng: &mut R) -> Result<Vec<Transition>> {
        Ok(self
            .sample_indices(batch, rng)?
            .into_iter()
            .map(|i| self.data[i].clone())
            .collect())
    }

    fn sample_indices<R: Rng>(&self, batch: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.data.is_empty() {
            return Err(Error::State("cannot sample from an empty buffer".into()));
        }
        Ok((0..batch)
            .map(|_| rng.random_range(0..self.data.len()))
            .collect())
    }

    /// Assembles a batch of uniformly sampled transitions as arrays.
    pub fn sample_batch<R: Rng>(&self, batch: usize, rng: &mut R) -> Result<Batch> {
        let idx = self.sample_indices(batch, rng)?;
        let mut states = Array2::zeros((batch, self.obs_dim));
        let mut actions = Array2::zeros((batch, self.act_dim));
        let mut next_states = Array2::zeros((batch, self.obs_dim));
        let mut rewards = Array1::zeros(batch);
        let mut dones = Array1::zeros(batch);
        for (row, &i) in idx.iter().enumerate() {
            let t = &self.data[i];
            for (c, v) in t.state.iter().enumerate() {
                states[[row, c]] = *v;
            }
            for (c, v) in t.action.iter().enumerate() {
                actions[[row, c]] = *v;
            }
            for (c, v) in t.next_state.iter().enumerate() {
                next_states[[row, c]] = *v;
            }
            rewards[row] = t.reward;
            dones[row] = if t.done { 1.0 } else { 0.0 };
        }
        Ok(Batch {
            states,
            actions,
            rewards,
            next_states,
            dones,
        })
    }

    /// Contents in FIFO order, oldest first (test and inspection helper).
    pub fn iter_fifo(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.data.len() < self.capacity {
            0
        } else {
            self.cursor
        };
        self.data[split..].iter().chain(self.data[..split].iter())
    }
}

/// A training batch in array form; rows are samples.
#[derive(Debug, Clone)]
pub struct Batch {
    pub states: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Array1<f64>,
    pub next_states: Array2<f64>,
    pub dones: Array1<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.states.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Builds a batch directly from transitions, rows in list order.
    pub fn from_transitions(transitions: &[Transition]) -> Result<Self> {
        if transitions.is_empty() {
            return Err(Error::InvalidInput("empty transition list".into()));
        }
        let obs_dim = transitions[0].state.len();
        let act_dim = transitions[0].action.len();
        let n = transitions.len();
        let mut b = Batch {
            states: Array2::zeros((n, obs_dim)),
            actions: Array2::zeros((n, act_dim)),
            rewards: Array1::zeros(n),
            next_states: Array2::zeros((n, obs_dim)),
            dones: Array1::zeros(n),
        };
        for (row, t) in transitions.iter().enumerate() {
            if t.state.len() != obs_dim || t.next_state.len() != obs_dim || t.action.len() != act_dim
            {
                return Err(Error::InvalidInput(format!(
                    "transition {row} dims do not match the first transition"
                )));
            }
            for (c, v) in t.state.iter().enumerate() {
                b.states[[row, c]] = *v;
            }
            for (c, v) in t.action.iter().enumerate() {
                b.actions[[row, c]] = *v;
            }
            for (c, v) in t.next_state.iter().enumerate() {
                b.next_states[[row, c]] = *v;
            }
            b.rewards[row] = t.reward;
            b.dones[row] = if t.done { 1.0 } else { 0.0 };
        }
        Ok(b)
    }
}

/// Drift regularization applied to the actor loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegularizationMode {
    None,
    /// epsilon * ||actor - center||
    L2(f64),
    /// epsilon * ||actor - center||^2
    SquaredL2(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Td3Hyperparams {
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub policy_noise: f64,
    pub noise_clip: f64,
    pub policy_delay: u64,
    pub batch_size: usize,
}

impl Default for Td3Hyperparams {
    fn default() -> Self {
        Td3Hyperparams {
            gamma: 0.99,
            tau: 0.005,
            actor_lr: 1e-3,
            critic_lr: 3e-4,
            policy_noise: 0.2,
            noise_clip: 0.5,
            policy_delay: 2,
            batch_size: 256,
        }
    }
}

/// Adam moments for one parameter vector; standard constants, bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One Adam update in place.
pub fn optimizer_step(
    params: &mut [f64],
    grads: &[f64],
    moments: &mut AdamState,
    lr: f64,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != moments.m.len() {
        return Err(Error::InvalidInput(format!(
            "shape mismatch: {} params, {} grads, {} moments",
            params.len(),
            grads.len(),
            moments.m.len()
        )));
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::Numeric(format!("gradient entry {i} is not finite")));
    }
    moments.t += 1;
    let bc1 = 1.0 - ADAM_BETA1.powi(moments.t as i32);
    let bc2 = 1.0 - ADAM_BETA2.powi(moments.t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        moments.m[i] = ADAM_BETA1 * moments.m[i] + (1.0 - ADAM_BETA1) * g;
        moments.v[i] = ADAM_BETA2 * moments.v[i] + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = moments.m[i] / bc1;
        let v_hat = moments.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
    Ok(())
}

/// target <- (1 - tau) * target + tau * source, elementwise.
pub fn soft_update(target: &mut [f64], source: &[f64], tau: f64) -> Result<()> {
    if target.len() != source.len() {
        return Err(Error::InvalidInput(format!(
            "shape mismatch: target {} vs source {}",
            target.len(),
            source.len()
        )));
    }
    for (t, s) in target.iter_mut().zip(source) {
        *t = (1.0 - tau) * *t + tau * *s;
    }
    Ok(())
}

/// Full learner state: actor, twin critics, target copies, Adam moments.
#[derive(Debug, Clone)]
pub struct Td3State {
    pub arch: PolicyArchitecture,
    pub actor: Genome,
    pub critic1: Vec<f64>,
    pub critic2: Vec<f64>,
    pub target_actor: Genome,
    pub target_critic1: Vec<f64>,
    pub target_critic2: Vec<f64>,
    pub regularization: RegularizationMode,
    pub hp: Td3Hyperparams,
    pub step: u64,
    actor_shape: MlpShape,
    critic_shape: MlpShape,
    adam_actor: AdamState,
    adam_critic1: AdamState,
    adam_critic2: AdamState,
}

/// Critic layout: concatenated (obs, action) input, same hidden widths as the
/// policy, scalar linear output.
pub fn critic_shape(arch: &PolicyArchitecture) -> MlpShape {
    let mut dims = Vec::with_capacity(arch.hidden.len() + 2);
    dims.push(arch.obs_dim + arch.act_dim);
    dims.extend_from_slice(&arch.hidden);
    dims.push(1);
    MlpShape::new(dims, OutputActivation::Linear)
}

/// Scalar Q-value of one (obs, action) pair.
pub fn critic_forward(
    shape: &MlpShape,
    critic_params: &[f64],
    obs: &[f64],
    action: &[f64],
) -> Result<f64> {
    let mut input = Vec::with_capacity(obs.len() + action.len());
    input.extend_from_slice(obs);
    input.extend_from_slice(action);
    Ok(shape.forward_one(critic_params, &input)?[0])
}

impl Td3State {
    pub fn new(
        arch: PolicyArchitecture,
        actor: Genome,
        critic1: Vec<f64>,
        critic2: Vec<f64>,
        regularization: RegularizationMode,
        hp: Td3Hyperparams,
    ) -> Result<Self> {
        let actor_shape = arch.shape();
        let cshape = critic_shape(&arch);
        if actor.len() != actor_shape.param_count() {
            return Err(Error::InvalidInput(format!(
                "actor genome length {} does not match architecture ({})",
                actor.len(),
                actor_shape.param_count()
            )));
        }
        if critic1.len() != cshape.param_count() || critic2.len() != cshape.param_count() {
            return Err(Error::InvalidInput(format!(
                "critic parameter length ({}, {}) does not match critic shape ({})",
                critic1.len(),
                critic2.len(),
                cshape.param_count()
            )));
        }
        let na = actor.len();
        let nc = critic1.len();
        Ok(Td3State {
            target_actor: actor.clone(),
            target_critic1: critic1.clone(),
            target_critic2: critic2.clone(),
            arch,
            actor,
            critic1,
            critic2,
            regularization,
            hp,
            step: 0,
            actor_shape,
            critic_shape: cshape,
            adam_actor: AdamState::new(na),
            adam_critic1: AdamState::new(nc),
            adam_critic2: AdamState::new(nc),
        })
    }

    pub fn critic_shape(&self) -> &MlpShape {
        &self.critic_shape
    }

    fn critic_input(states: &Array2<f64>, actions: &Array2<f64>) -> Array2<f64> {
        concatenate(Axis(1), &[states.view(), actions.view()]).expect("matching row counts")
    }

    /// Per-sample bootstrap targets:
    /// y = r + (1 - done) * gamma * min(Q1'(s', a'), Q2'(s', a')) with
    /// a' = clamp(actor'(s') + clipped policy noise, [-1, 1]).
    pub fn td3_target<R: Rng>(&self, batch: &Batch, noise_rng: &mut R) -> Result<Array1<f64>> {
        let mut next_actions = self
            .actor_shape
            .forward_batch(self.target_actor.params(), &batch.next_states)?
            .output()
            .clone();
        let c = self.hp.noise_clip;
        for v in next_actions.iter_mut() {
            let z: f64 = noise_rng.sample(StandardNormal);
            let noise = (self.hp.policy_noise * z).clamp(-c, c);
            *v = (*v + noise).clamp(-1.0, 1.0);
        }
        let input = Self::critic_input(&batch.next_states, &next_actions);
        let q1 = self
            .critic_shape
            .forward_batch(&self.target_critic1, &input)?;
        let q2 = self
            .critic_shape
            .forward_batch(&self.target_critic2, &input)?;
        let q1 = q1.output();
        let q2 = q2.output();
        let mut y = Array1::zeros(batch.len());
        for i in 0..batch.len() {
            let q = q1[[i, 0]].min(q2[[i, 0]]);
            y[i] = batch.rewards[i] + (1.0 - batch.dones[i]) * self.hp.gamma * q;
        }
        Ok(y)
    }

    /// Critic loss for given parameter vectors with targets held fixed.
    /// Forward-only; this is what finite differences perturb.
    pub fn critic_loss_at(
        &self,
        critic1: &[f64],
        critic2: &[f64],
        batch: &Batch,
        y: &Array1<f64>,
    ) -> Result<f64> {
        let input = Self::critic_input(&batch.states, &batch.actions);
        let q1 = self.critic_shape.forward_batch(critic1, &input)?;
        let q2 = self.critic_shape.forward_batch(critic2, &input)?;
        let (q1, q2) = (q1.output(), q2.output());
        let b = batch.len() as f64;
        let mut loss = 0.0;
        for i in 0..batch.len() {
            let d1 = q1[[i, 0]] - y[i];
            let d2 = q2[[i, 0]] - y[i];
            loss += d1 * d1 + d2 * d2;
        }
        Ok(loss / b)
    }

    /// Analytic critic loss gradient (both critics), targets as constants.
    pub fn critic_gradient(
        &self,
        batch: &Batch,
        y: &Array1<f64>,
    ) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let input = Self::critic_input(&batch.states, &batch.actions);
        let cache1 = self.critic_shape.forward_batch(&self.critic1, &input)?;
        let cache2 = self.critic_shape.forward_batch(&self.critic2, &input)?;
        let b = batch.len() as f64;
        let mut loss = 0.0;
        let mut g1 = Array2::zeros((batch.len(), 1));
        let mut g2 = Array2::zeros((batch.len(), 1));
        for i in 0..batch.len() {
            let d1 = cache1.output()[[i, 0]] - y[i];
            let d2 = cache2.output()[[i, 0]] - y[i];
            loss += d1 * d1 + d2 * d2;
            g1[[i, 0]] = 2.0 * d1 / b;
            g2[[i, 0]] = 2.0 * d2 / b;
        }
        loss /= b;
        let (grad1, _) = self
            .critic_shape
            .backward_batch(&self.critic1, &cache1, &g1)?;
        let (grad2, _) = self
            .critic_shape
            .backward_batch(&self.critic2, &cache2, &g2)?;
        Ok((loss, grad1, grad2))
    }

    /// One critic update: compute targets, gradients, and an Adam step on
    /// each critic.
    pub fn critic_step<R: Rng>(&mut self, batch: &Batch, noise_rng: &mut R) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::InvalidInput("empty batch".into()));
        }
        let y = self.td3_target(batch, noise_rng)?;
        let (loss, grad1, grad2) = self.critic_gradient(batch, &y)?;
        if !loss.is_finite() {
            return Err(Error::Numeric(format!(
                "critic loss is not finite at step {}",
                self.step
            )));
        }
        optimizer_step(
            &mut self.critic1,
            &grad1,
            &mut self.adam_critic1,
            self.hp.critic_lr,
        )?;
        optimizer_step(
            &mut self.critic2,
            &grad2,
            &mut self.adam_critic2,
            self.hp.critic_lr,
        )?;
        Ok(loss)
    }

    fn regularizer(&self, actor_params: &[f64], es_center: &Genome) -> Result<f64> {
        if actor_params.len() != es_center.len() {
            return Err(Error::InvalidInput(format!(
                "actor length {} does not match ES center length {}",
                actor_params.len(),
                es_center.len()
            )));
        }
        let dist = actor_params
            .iter()
            .zip(es_center.params())
            .map(|(a, c)| (a - c) * (a - c))
            .sum::<f64>()
            .sqrt();
        Ok(match self.regularization {
            RegularizationMode::None => 0.0,
            RegularizationMode::L2(eps) => eps * dist,
            RegularizationMode::SquaredL2(eps) => eps * dist * dist,
        })
    }

    /// Actor loss at given parameters: -mean Q1(s, pi(s)) plus the drift
    /// penalty. Forward-only; this is what finite differences perturb.
    pub fn actor_loss_at(
        &self,
        actor_params: &[f64],
        batch: &Batch,
        es_center: &Genome,
    ) -> Result<f64> {
        let actions = self
            .actor_shape
            .forward_batch(actor_params, &batch.states)?;
        let input = Self::critic_input(&batch.states, actions.output());
        let q1 = self.critic_shape.forward_batch(&self.critic1, &input)?;
        let base = -q1.output().column(0).sum() / batch.len() as f64;
        Ok(base + self.regularizer(actor_params, es_center)?)
    }

    /// Actor loss at the current parameters.
    pub fn actor_loss(&self, batch: &Batch, es_center: &Genome) -> Result<f64> {
        self.actor_loss_at(self.actor.params(), batch, es_center)
    }

    /// Analytic gradient of the full regularized actor loss. Critic
    /// parameters are frozen; the chain runs through critic1's action input.
    pub fn actor_gradient(&self, batch: &Batch, es_center: &Genome) -> Result<(f64, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::InvalidInput("empty batch".into()));
        }
        let actor_params = self.actor.params();
        let actor_cache = self
            .actor_shape
            .forward_batch(actor_params, &batch.states)?;
        let input = Self::critic_input(&batch.states, actor_cache.output());
        let q_cache = self.critic_shape.forward_batch(&self.critic1, &input)?;
        let b = batch.len() as f64;
        let base_loss = -q_cache.output().column(0).sum() / b;
        let g_q = Array2::from_elem((batch.len(), 1), -1.0 / b);
        let (_, g_input) = self
            .critic_shape
            .backward_batch(&self.critic1, &q_cache, &g_q)?;
        // dL/d(action) is the action slice of the critic input gradient.
        let g_actions = g_input
            .slice(ndarray::s![.., self.arch.obs_dim..])
            .to_owned();
        let (mut grad, _) =
            self.actor_shape
                .backward_batch(actor_params, &actor_cache, &g_actions)?;
        let mut loss = base_loss;
        match self.regularization {
            RegularizationMode::None => {}
            RegularizationMode::L2(eps) => {
                if eps != 0.0 {
                    let dist = l2_distance(&self.actor, es_center)?;
                    loss += eps * dist;
                    // Subgradient 0 at the non-differentiable point dist = 0.
                    if dist > 0.0 {
                        for (g, (a, c)) in grad
                            .iter_mut()
                            .zip(actor_params.iter().zip(es_center.params()))
                        {
                            *g += eps * (a - c) / dist;
                        }
                    }
                }
            }
            RegularizationMode::SquaredL2(eps) => {
                if eps != 0.0 {
                    let dist = l2_distance(&self.actor, es_center)?;
                    loss += eps * dist * dist;
                    for (g, (a, c)) in grad
                        .iter_mut()
                        .zip(actor_params.iter().zip(es_center.params()))
                    {
                        *g += 2.0 * eps * (a - c);
                    }
                }
            }
        }
        Ok((loss, grad))
    }

    /// One actor update followed by soft updates of all three targets.
    pub fn actor_step(&mut self, batch: &Batch, es_center: &Genome) -> Result<f64> {
        let (loss, grad) = self.actor_gradient(batch, es_center)?;
        if !loss.is_finite() {
            return Err(Error::Numeric(format!(
                "actor loss is not finite at step {}",
                self.step
            )));
        }
        optimizer_step(
            self.actor.params_mut(),
            &grad,
            &mut self.adam_actor,
            self.hp.actor_lr,
        )?;
        let tau = self.hp.tau;
        soft_update(self.target_actor.params_mut(), self.actor.params(), tau)?;
        soft_update(&mut self.target_critic1, &self.critic1, tau)?;
        soft_update(&mut self.target_critic2, &self.critic2, tau)?;
        Ok(loss)
    }

    /// The Algorithm-1 inner training block: n_steps critic updates with a
    /// delayed actor update every `policy_delay` steps.
    pub fn train<R1: Rng, R2: Rng>(
        &mut self,
        buffer: &ReplayBuffer,
        n_steps: usize,
        es_center: &Genome,
        batch_rng: &mut R1,
        noise_rng: &mut R2,
    ) -> Result<()> {
        if n_steps == 0 {
            return Ok(());
        }
        if buffer.is_empty() {
            return Err(Error::State("cannot train from an empty buffer".into()));
        }
        for _ in 0..n_steps {
            let batch = buffer.sample_batch(self.hp.batch_size, batch_rng)?;
            self.critic_step(&batch, noise_rng)?;
            self.step += 1;
            if self.step.is_multiple_of(self.hp.policy_delay) {
                self.actor_step(&batch, es_center)?;
            }
        }
        Ok(())
    }

    /// Writes actor, critics, targets, optimizer moments and the step counter.
    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_checkpoint(&mut w).map_err(|e| Error::io(path, e))
    }

    fn write_checkpoint<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&(self.actor.len() as u64).to_le_bytes())?;
        w.write_all(&(self.critic1.len() as u64).to_le_bytes())?;
        w.write_all(&self.step.to_le_bytes())?;
        self.actor.write_to(w)?;
        write_f64_vec(w, &self.critic1)?;
        write_f64_vec(w, &self.critic2)?;
        self.target_actor.write_to(w)?;
        write_f64_vec(w, &self.target_critic1)?;
        write_f64_vec(w, &self.target_critic2)?;
        for adam in [&self.adam_actor, &self.adam_critic1, &self.adam_critic2] {
            w.write_all(&adam.t.to_le_bytes())?;
            write_f64_vec(w, &adam.m)?;
            write_f64_vec(w, &adam.v)?;
        }
        Ok(())
    }

    /// Restores a checkpoint. Architecture, regularization and hyperparams
    /// come from the run configuration, not the file.
    pub fn load_checkpoint(
        path: &Path,
        arch: PolicyArchitecture,
        regularization: RegularizationMode,
        hp: Td3Hyperparams,
    ) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        Self::read_checkpoint(&mut r, arch, regularization, hp)
            .map_err(|e| Error::io(path, e))
    }

    fn read_checkpoint<R: Read>(
        r: &mut R,
        arch: PolicyArchitecture,
        regularization: RegularizationMode,
        hp: Td3Hyperparams,
    ) -> std::io::Result<Self> {
        use std::io::{Error as IoError, ErrorKind};
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(IoError::new(ErrorKind::InvalidData, "bad checkpoint magic"));
        }
        let mut u = [0u8; 8];
        r.read_exact(&mut u)?;
        let actor_len = u64::from_le_bytes(u) as usize;
        r.read_exact(&mut u)?;
        let critic_len = u64::from_le_bytes(u) as usize;
        r.read_exact(&mut u)?;
        let step = u64::from_le_bytes(u);
        let actor = Genome::read_from(r)?;
        let critic1 = read_f64_vec(r)?;
        let critic2 = read_f64_vec(r)?;
        let target_actor = Genome::read_from(r)?;
        let target_critic1 = read_f64_vec(r)?;
        let target_critic2 = read_f64_vec(r)?;
        let mut adams = Vec::with_capacity(3);
        for _ in 0..3 {
            r.read_exact(&mut u)?;
            let t = u64::from_le_bytes(u);
            let m = read_f64_vec(r)?;
            let v = read_f64_vec(r)?;
            adams.push(AdamState { m, v, t });
        }
        let mut state = Td3State::new(arch, actor, critic1, critic2, regularization, hp)
            .map_err(|e| IoError::new(ErrorKind::InvalidData, e.to_string()))?;
        if state.actor.len() != actor_len || state.critic1.len() != critic_len {
            return Err(IoError::new(
                ErrorKind::InvalidData,
                "checkpoint header counts do not match payload",
            ));
        }
        state.step = step;
        state.target_actor = target_actor;
        state.target_critic1 = target_critic1;
        state.target_critic2 = target_critic2;
        state.adam_critic2 = adams.pop().unwrap();
        state.adam_critic1 = adams.pop().unwrap();
        state.adam_actor = adams.pop().unwrap();
        Ok(state)
    }
}

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"GDRCKPT1";
