//! Experiment orchestration: config parsing, the actor-injection generation
//! loop, the parallel-TD3 baseline, the evaluation schedule, seeding, and CSV
//! telemetry.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::envs::{rollout, Env, RolloutResult};
use crate::error::{Error, Result};
use crate::es::{es_update, recombination_weights, EsState, RankedPopulation};
use crate::genome::{init_genome, init_params, Genome, PolicyArchitecture};
use crate::injection::{inject, measure_drift, InjectionMode};
use crate::rng::{
    RngTree, STREAM_BUFFER_SAMPLING, STREAM_ES_SAMPLING, STREAM_EXPLORATION, STREAM_INIT,
    STREAM_TARGET_NOISE,
};
use crate::td3::{critic_shape, RegularizationMode, ReplayBuffer, Td3Hyperparams, Td3State};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Es,
    EsInject,
    EsClip,
    EsGdr,
    EsGdr2,
    ParallelTd3,
}

impl Algo {
    pub fn parse(s: &str) -> Result<Algo> {
        match s {
            "es" => Ok(Algo::Es),
            "es_inject" => Ok(Algo::EsInject),
            "es_clip" => Ok(Algo::EsClip),
            "es_gdr" => Ok(Algo::EsGdr),
            "es_gdr2" => Ok(Algo::EsGdr2),
            "parallel_td3" => Ok(Algo::ParallelTd3),
            other => Err(Error::Config(format!(
                "unknown algo: {other} (expected es, es_inject, es_clip, es_gdr, es_gdr2, parallel_td3)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algo::Es => "es",
            Algo::EsInject => "es_inject",
            Algo::EsClip => "es_clip",
            Algo::EsGdr => "es_gdr",
            Algo::EsGdr2 => "es_gdr2",
            Algo::ParallelTd3 => "parallel_td3",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Complete experiment description. Field names double as config-file keys.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algo: Algo,
    pub env: String,
    pub seed: u64,
    pub generations: usize,
    pub lambda: usize,
    pub mu: usize,
    pub sigma: f64,
    pub epsilon: f64,
    pub clip_factor: f64,
    pub n_steps: usize,
    pub exploration_std: f64,
    pub eval_every: usize,
    pub eval_reps: usize,
    pub output: PathBuf,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub gamma: f64,
    pub tau: f64,
    pub policy_noise: f64,
    pub noise_clip: f64,
    pub policy_delay: u64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
}

impl RunConfig {
    /// Documented defaults; `algo` must always be set explicitly.
    pub fn defaults(algo: Algo) -> RunConfig {
        RunConfig {
            algo,
            env: "point_mass".into(),
            seed: 0,
            generations: 100,
            lambda: 100,
            mu: 50,
            sigma: 10.0,
            epsilon: 0.01,
            clip_factor: 1.0,
            n_steps: 1000,
            exploration_std: 0.1,
            eval_every: 10,
            eval_reps: 1,
            output: PathBuf::from("run.csv"),
            actor_lr: 1e-3,
            critic_lr: 3e-4,
            gamma: 0.99,
            tau: 0.005,
            policy_noise: 0.2,
            noise_clip: 0.5,
            policy_delay: 2,
            batch_size: 256,
            buffer_capacity: 1_000_000,
        }
    }

    /// Applies one `key = value` pair; used by the file loader, CLI flag
    /// overrides, and the sweep command.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| {
                Error::Config(format!("invalid value for key {key}: '{value}'"))
            })
        }
        match key {
            "algo" => self.algo = Algo::parse(value)?,
            "env" => self.env = value.to_string(),
            "seed" => self.seed = num(key, value)?,
            "generations" => self.generations = num(key, value)?,
            "lambda" => self.lambda = num(key, value)?,
            "mu" => self.mu = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "clip_factor" => self.clip_factor = num(key, value)?,
            "n_steps" => self.n_steps = num(key, value)?,
            "exploration_std" => self.exploration_std = num(key, value)?,
            "eval_every" => self.eval_every = num(key, value)?,
            "eval_reps" => self.eval_reps = num(key, value)?,
            "output" => self.output = PathBuf::from(value),
            "actor_lr" => self.actor_lr = num(key, value)?,
            "critic_lr" => self.critic_lr = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "tau" => self.tau = num(key, value)?,
            "policy_noise" => self.policy_noise = num(key, value)?,
            "noise_clip" => self.noise_clip = num(key, value)?,
            "policy_delay" => self.policy_delay = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "buffer_capacity" => self.buffer_capacity = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key: {other}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positives: [(&str, f64); 8] = [
            ("lambda", self.lambda as f64),
            ("mu", self.mu as f64),
            ("eval_every", self.eval_every as f64),
            ("eval_reps", self.eval_reps as f64),
            ("batch_size", self.batch_size as f64),
            ("buffer_capacity", self.buffer_capacity as f64),
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
        ];
        for (name, v) in positives {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.mu > self.lambda {
            return Err(Error::Config(format!(
                "mu ({}) must not exceed lambda ({})",
                self.mu, self.lambda
            )));
        }
        if self.policy_delay == 0 {
            return Err(Error::Config("policy_delay must be positive".into()));
        }
        let nonnegatives = [
            ("sigma", self.sigma),
            ("epsilon", self.epsilon),
            ("exploration_std", self.exploration_std),
            ("policy_noise", self.policy_noise),
            ("noise_clip", self.noise_clip),
        ];
        for (name, v) in nonnegatives {
            if v.is_nan() || v < 0.0 {
                return Err(Error::Config(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        if self.clip_factor.is_nan() || self.clip_factor <= 0.0 {
            return Err(Error::Config(format!(
                "clip_factor must be positive, got {}",
                self.clip_factor
            )));
        }
        for (name, v) in [("gamma", self.gamma), ("tau", self.tau)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Env::from_name(&self.env)?;
        Ok(())
    }
}

/// Parses the `key = value` config format: UTF-8, one pair per line,
/// `#` starts a comment, unknown keys rejected, `algo` mandatory.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = RunConfig::defaults(Algo::Es);
    let mut algo_seen = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected 'key = value', got '{line}'",
                lineno + 1
            )));
        };
        let key = key.trim();
        let value = value.trim();
        cfg.set(key, value).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("line {}: {msg}", lineno + 1)),
            other => other,
        })?;
        if key == "algo" {
            algo_seen = true;
        }
    }
    if !algo_seen {
        return Err(Error::Config("missing key: algo".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// One telemetry row. Center and actor fitness are NaN on generations the
/// evaluation schedule skips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationLog {
    pub generation: usize,
    pub total_evals: u64,
    pub center_fitness_mean: f64,
    pub center_fitness_std: f64,
    pub actor_fitness: f64,
    pub genetic_distance: f64,
    pub actor_update_weight: f64,
    pub best_pop_fitness: f64,
}

const CSV_HEADER: &str = "generation,total_evals,center_fitness_mean,center_fitness_std,actor_fitness,genetic_distance,actor_update_weight,best_pop_fitness";

fn fmt_real(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        // 9 significant digits.
        format!("{v:.8e}")
    }
}

/// Writes the log with a fixed header, 9-significant-digit reals, LF endings.
pub fn write_csv(logs: &[GenerationLog], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(path, e))?;
        }
    }
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for l in logs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            l.generation,
            l.total_evals,
            fmt_real(l.center_fitness_mean),
            fmt_real(l.center_fitness_std),
            fmt_real(l.actor_fitness),
            fmt_real(l.genetic_distance),
            fmt_real(l.actor_update_weight),
            fmt_real(l.best_pop_fitness),
        ));
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Mean and population std of `eval_reps` noiseless rollouts. With one
/// repetition (or a deterministic environment) the std is zero.
pub fn evaluate_center(
    env: &Env,
    arch: &PolicyArchitecture,
    genome: &Genome,
    eval_reps: usize,
    tree: &RngTree,
    generation: u64,
) -> Result<(f64, f64)> {
    let fits: Vec<f64> = (0..eval_reps)
        .map(|rep| {
            let mut rng = tree.indexed_stream("eval_center", generation, rep as u64);
            rollout(env, arch, genome, 0.0, &mut rng, None).map(|r| r.fitness)
        })
        .collect::<Result<_>>()?;
    let mean = fits.iter().sum::<f64>() / fits.len() as f64;
    let std = if fits.len() < 2 {
        0.0
    } else {
        (fits.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / fits.len() as f64).sqrt()
    };
    Ok((mean, std))
}

fn injection_mode(cfg: &RunConfig) -> InjectionMode {
    match cfg.algo {
        Algo::Es => InjectionMode::NoInjection,
        Algo::EsInject | Algo::EsGdr | Algo::EsGdr2 => InjectionMode::Standard,
        Algo::EsClip => InjectionMode::Clipped(cfg.clip_factor),
        Algo::ParallelTd3 => InjectionMode::NoInjection,
    }
}

fn regularization_mode(cfg: &RunConfig) -> RegularizationMode {
    match cfg.algo {
        Algo::EsGdr => RegularizationMode::L2(cfg.epsilon),
        Algo::EsGdr2 => RegularizationMode::SquaredL2(cfg.epsilon),
        _ => RegularizationMode::None,
    }
}

fn td3_hyperparams(cfg: &RunConfig) -> Td3Hyperparams {
    Td3Hyperparams {
        gamma: cfg.gamma,
        tau: cfg.tau,
        actor_lr: cfg.actor_lr,
        critic_lr: cfg.critic_lr,
        policy_noise: cfg.policy_noise,
        noise_clip: cfg.noise_clip,
        policy_delay: cfg.policy_delay,
        batch_size: cfg.batch_size,
    }
}

struct Setup {
    env: Env,
    arch: PolicyArchitecture,
    tree: RngTree,
    td3: Td3State,
    buffer: ReplayBuffer,
}

/// Shared initialization: ES center and TD3 actor start from the same genome.
fn setup(cfg: &RunConfig) -> Result<Setup> {
    cfg.validate()?;
    let env = Env::from_name(&cfg.env)?;
    let spec = env.spec();
    let arch = PolicyArchitecture::new(spec.obs_dim, spec.act_dim);
    let tree = RngTree::new(cfg.seed);
    let mut init_rng = tree.stream(STREAM_INIT);
    let genome = init_genome(&arch, &mut init_rng);
    let cshape = critic_shape(&arch);
    let critic1 = init_params(&cshape, &mut init_rng);
    let critic2 = init_params(&cshape, &mut init_rng);
    let td3 = Td3State::new(
        arch.clone(),
        genome,
        critic1,
        critic2,
        regularization_mode(cfg),
        td3_hyperparams(cfg),
    )?;
    let buffer = ReplayBuffer::new(cfg.buffer_capacity, spec.obs_dim, spec.act_dim);
    Ok(Setup {
        env,
        arch,
        tree,
        td3,
        buffer,
    })
}

/// Population rollouts, parallel over individuals, each with its own derived
/// stream; results come back in population-index order.
fn run_rollouts(
    env: &Env,
    arch: &PolicyArchitecture,
    genomes: &[Genome],
    exploration_std: f64,
    tree: &RngTree,
    generation: u64,
    stream_name: &str,
) -> Result<Vec<RolloutResult>> {
    genomes
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let mut rng = tree.indexed_stream(stream_name, generation, i as u64);
            rollout(env, arch, g, exploration_std, &mut rng, None)
        })
        .collect()
}

/// Runs the configured algorithm to completion.
pub fn run(cfg: &RunConfig) -> Result<Vec<GenerationLog>> {
    run_with_stop(cfg, |_| false)
}

/// Like `run`, but stops early once `stop` returns true for a logged
/// generation (the triggering generation is still logged).
pub fn run_with_stop<F: FnMut(&GenerationLog) -> bool>(
    cfg: &RunConfig,
    stop: F,
) -> Result<Vec<GenerationLog>> {
    match cfg.algo {
        Algo::ParallelTd3 => run_parallel_td3_with_stop(cfg, stop),
        _ => run_es_rl_with_stop(cfg, stop),
    }
}

/// The actor-injection generation loop: sample, inject, evaluate, rank,
/// update the ES center, record drift, then train TD3 on the shared buffer.
pub fn run_es_rl(cfg: &RunConfig) -> Result<Vec<GenerationLog>> {
    run_es_rl_with_stop(cfg, |_| false)
}

pub fn run_es_rl_with_stop<F: FnMut(&GenerationLog) -> bool>(
    cfg: &RunConfig,
    mut stop: F,
) -> Result<Vec<GenerationLog>> {
    if cfg.algo == Algo::ParallelTd3 {
        return Err(Error::Config(
            "run_es_rl requires an ES-family algo".into(),
        ));
    }
    let Setup {
        env,
        arch,
        tree,
        mut td3,
        mut buffer,
    } = setup(cfg)?;
    let mut es = EsState::new(td3.actor.clone(), cfg.sigma, cfg.lambda, cfg.mu)?;
    let weights = recombination_weights(cfg.lambda, cfg.mu)?;
    let mode = injection_mode(cfg);
    let mut batch_rng = tree.stream(STREAM_BUFFER_SAMPLING);
    let mut noise_rng = tree.stream(STREAM_TARGET_NOISE);
    let mut logs = Vec::with_capacity(cfg.generations);
    let mut total_evals: u64 = 0;

    for g in 1..=cfg.generations as u64 {
        let n_samples = if mode.injects() {
            cfg.lambda - 1
        } else {
            cfg.lambda
        };
        // Each individual owns a sampling substream keyed by (generation,
        // index), so sample draws never shift between algo variants.
        let samples: Vec<Genome> = (0..n_samples)
            .map(|i| {
                let mut rng = tree.indexed_stream(STREAM_ES_SAMPLING, g, i as u64);
                crate::es::sample_population(&es, 1, &mut rng).pop().unwrap()
            })
            .collect();
        let pop_genomes = inject(samples, &td3.actor, mode, &es)?;
        let results = run_rollouts(&env, &arch, &pop_genomes, 0.0, &tree, g, "rollout")?;
        // Transitions append in population-index order regardless of rollout
        // scheduling.
        for res in &results {
            for t in &res.transitions {
                buffer.push(t.clone())?;
            }
        }
        total_evals += pop_genomes.len() as u64;
        let fitnesses: Vec<f64> = results.iter().map(|r| r.fitness).collect();
        let best_pop_fitness = fitnesses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let pop = RankedPopulation::new(pop_genomes, fitnesses)?;
        es = es_update(&es, &pop, &weights)?;
        if !es.center.is_finite() {
            return Err(Error::Numeric(format!(
                "ES center became non-finite at generation {g}"
            )));
        }
        let drift = measure_drift(&td3.actor, &es, &pop, &weights, mode.injects())?;
        // Actor training against the post-update center of this generation.
        let center = es.center.clone();
        td3.train(&buffer, cfg.n_steps, &center, &mut batch_rng, &mut noise_rng)?;
        if !td3.actor.is_finite() {
            return Err(Error::Numeric(format!(
                "actor became non-finite at generation {g}"
            )));
        }

        let eval_gen = g % cfg.eval_every as u64 == 0;
        let (center_mean, center_std, actor_fitness) = if eval_gen {
            let (mean, std) =
                evaluate_center(&env, &arch, &es.center, cfg.eval_reps, &tree, g)?;
            total_evals += cfg.eval_reps as u64;
            let actor_fitness = if mode.injects() {
                // The injected member's population fitness doubles as the
                // actor's logged fitness; no extra rollout.
                pop.fitnesses[pop.len() - 1]
            } else {
                let mut rng = tree.indexed_stream("eval_actor", g, 0);
                let fit = rollout(&env, &arch, &td3.actor, 0.0, &mut rng, None)?.fitness;
                total_evals += 1;
                fit
            };
            (mean, std, actor_fitness)
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };

        let log = GenerationLog {
            generation: g as usize,
            total_evals,
            center_fitness_mean: center_mean,
            center_fitness_std: center_std,
            actor_fitness,
            genetic_distance: drift.distance,
            actor_update_weight: drift.actor_weight,
            best_pop_fitness,
        };
        logs.push(log);
        if stop(&log) {
            break;
        }
    }
    Ok(logs)
}

/// The parallel-TD3 baseline: per generation, lambda noisy rollouts of the
/// current actor feed the buffer, then a block of gradient steps.
pub fn run_parallel_td3(cfg: &RunConfig) -> Result<Vec<GenerationLog>> {
    run_parallel_td3_with_stop(cfg, |_| false)
}

pub fn run_parallel_td3_with_stop<F: FnMut(&GenerationLog) -> bool>(
    cfg: &RunConfig,
    mut stop: F,
) -> Result<Vec<GenerationLog>> {
    if cfg.algo != Algo::ParallelTd3 {
        return Err(Error::Config(
            "run_parallel_td3 requires algo = parallel_td3".into(),
        ));
    }
    let Setup {
        env,
        arch,
        tree,
        mut td3,
        mut buffer,
    } = setup(cfg)?;
    let mut batch_rng = tree.stream(STREAM_BUFFER_SAMPLING);
    let mut noise_rng = tree.stream(STREAM_TARGET_NOISE);
    let mut logs = Vec::with_capacity(cfg.generations);
    let mut total_evals: u64 = 0;

    for g in 1..=cfg.generations as u64 {
        let actors: Vec<Genome> = vec![td3.actor.clone(); cfg.lambda];
        let results = run_rollouts(
            &env,
            &arch,
            &actors,
            cfg.exploration_std,
            &tree,
            g,
            STREAM_EXPLORATION,
        )?;
        for res in &results {
            for t in &res.transitions {
                buffer.push(t.clone())?;
            }
        }
        total_evals += cfg.lambda as u64;
        let best_pop_fitness = results
            .iter()
            .map(|r| r.fitness)
            .fold(f64::NEG_INFINITY, f64::max);
        let center = td3.actor.clone(); // unused by RegularizationMode::None
        td3.train(&buffer, cfg.n_steps, &center, &mut batch_rng, &mut noise_rng)?;
        if !td3.actor.is_finite() {
            return Err(Error::Numeric(format!(
                "actor became non-finite at generation {g}"
            )));
        }
        let eval_gen = g % cfg.eval_every as u64 == 0;
        let actor_fitness = if eval_gen {
            let mut rng = tree.indexed_stream("eval_actor", g, 0);
            let fit = rollout(&env, &arch, &td3.actor, 0.0, &mut rng, None)?.fitness;
            total_evals += 1;
            fit
        } else {
            f64::NAN
        };
        let log = GenerationLog {
            generation: g as usize,
            total_evals,
            center_fitness_mean: f64::NAN,
            center_fitness_std: f64::NAN,
            actor_fitness,
            genetic_distance: 0.0,
            actor_update_weight: 0.0,
            best_pop_fitness,
        };
        logs.push(log);
        if stop(&log) {
            break;
        }
    }
    Ok(logs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp_config(body: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("drift_es_cfg_tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!(
            "cfg_{}.txt",
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .unwrap()
                .as_nanos()
        ));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn empty_config_misses_algo() {
        let path = write_temp_config("");
        let err = load_config(&path).unwrap_err();
        assert!(err.to_string().contains("missing key: algo"), "{err}");
    }

    #[test]
    fn config_values_and_defaults() {
        let path = write_temp_config(
            "algo = es_gdr\nsigma = 10 # table default\nepsilon = 0.01\n\n# comment line\n",
        );
        let cfg = load_config(&path).unwrap();
        assert_eq!(cfg.algo, Algo::EsGdr);
        assert_eq!(cfg.sigma, 10.0);
        assert_eq!(cfg.epsilon, 0.01);
        assert_eq!(cfg.lambda, 100);
        assert_eq!(cfg.mu, 50);
        assert_eq!(cfg.n_steps, 1000);
        assert_eq!(cfg.batch_size, 256);
        assert_eq!(cfg.buffer_capacity, 1_000_000);
    }

    #[test]
    fn config_rejects_unknown_keys_with_line_numbers() {
        let path = write_temp_config("algo = es\nwibble = 3\n");
        let err = load_config(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("unknown key: wibble"), "{msg}");
    }

    #[test]
    fn config_reports_bad_values_by_key() {
        let path = write_temp_config("algo = es\nsigma = ten\n");
        let err = load_config(&path).unwrap_err();
        assert!(err.to_string().contains("sigma"), "{err}");
    }

    #[test]
    fn csv_formats() {
        assert_eq!(fmt_real(f64::NAN), "NaN");
        assert_eq!(fmt_real(0.0), "0.00000000e0");
        let s = fmt_real(-141.4213562373095);
        assert_eq!(s, "-1.41421356e2");
    }

    #[test]
    fn csv_empty_and_single_row() {
        let dir = std::env::temp_dir().join("drift_es_csv_tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("empty.csv");
        write_csv(&[], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{CSV_HEADER}\n"));
        let log = GenerationLog {
            generation: 1,
            total_evals: 20,
            center_fitness_mean: -1.0,
            center_fitness_std: 0.0,
            actor_fitness: f64::NAN,
            genetic_distance: 2.5,
            actor_update_weight: 0.0,
            best_pop_fitness: -0.5,
        };
        let path = dir.join("one.csv");
        write_csv(&[log], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
    }

    // Log rows can legitimately hold NaN on non-eval generations, so compare
    // via Debug strings (bitwise round-trip) instead of PartialEq.
    fn assert_logs_eq(a: &[GenerationLog], b: &[GenerationLog]) {
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    fn small_cfg(algo: Algo) -> RunConfig {
        let mut cfg = RunConfig::defaults(algo);
        cfg.env = "static_target".into();
        cfg.generations = 4;
        cfg.lambda = 6;
        cfg.mu = 3;
        cfg.sigma = 0.5;
        cfg.n_steps = 3;
        cfg.batch_size = 8;
        cfg.eval_every = 2;
        cfg
    }

    #[test]
    fn zero_generations_empty_log() {
        let mut cfg = small_cfg(Algo::Es);
        cfg.generations = 0;
        assert!(run(&cfg).unwrap().is_empty());
        let mut cfg = small_cfg(Algo::ParallelTd3);
        cfg.generations = 0;
        assert!(run(&cfg).unwrap().is_empty());
    }

    #[test]
    fn budget_accounting_es() {
        let cfg = small_cfg(Algo::EsInject);
        let logs = run(&cfg).unwrap();
        assert_eq!(logs.len(), 4);
        // Non-eval gen: +lambda. Eval gen: +lambda +eval_reps (actor fitness
        // reuses the injected member's rollout).
        assert_eq!(logs[0].total_evals, 6);
        assert_eq!(logs[1].total_evals, 6 + 6 + 1);
        assert_eq!(logs[2].total_evals, 13 + 6);
        assert_eq!(logs[3].total_evals, 19 + 6 + 1);
    }

    #[test]
    fn budget_accounting_non_injecting_and_parallel() {
        let cfg = small_cfg(Algo::Es);
        let logs = run(&cfg).unwrap();
        // Eval gens add eval_reps for the center plus one dedicated actor
        // rollout.
        assert_eq!(logs[1].total_evals, 12 + 1 + 1);
        let cfg = small_cfg(Algo::ParallelTd3);
        let logs = run(&cfg).unwrap();
        assert_eq!(logs[3].total_evals, 4 * 6 + 2);
        assert_eq!(logs[3].genetic_distance, 0.0);
        assert_eq!(logs[3].actor_update_weight, 0.0);
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = small_cfg(Algo::EsGdr2);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_logs_eq(&a, &b);
    }

    #[test]
    fn gdr_epsilon_zero_matches_es_inject() {
        let mut gdr = small_cfg(Algo::EsGdr);
        gdr.epsilon = 0.0;
        let inject = small_cfg(Algo::EsInject);
        assert_logs_eq(&run(&gdr).unwrap(), &run(&inject).unwrap());
    }

    #[test]
    fn early_stop_truncates_log() {
        let cfg = small_cfg(Algo::Es);
        let logs = run_with_stop(&cfg, |l| l.generation == 2).unwrap();
        assert_eq!(logs.len(), 2);
    }
}
