//! Flat-vector genomes for a fixed MLP policy architecture.

use std::io::{Read, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{MlpShape, OutputActivation};

/// Fixed policy network layout: ReLU hidden layers, tanh output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyArchitecture {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub hidden: Vec<usize>,
}

impl PolicyArchitecture {
    /// Default two hidden layers of 128 units.
    pub fn new(obs_dim: usize, act_dim: usize) -> Self {
        Self::with_hidden(obs_dim, act_dim, vec![128, 128])
    }

    pub fn with_hidden(obs_dim: usize, act_dim: usize, hidden: Vec<usize>) -> Self {
        assert!(obs_dim > 0 && act_dim > 0, "dims must be positive");
        assert!(
            !hidden.is_empty() && hidden.iter().all(|&h| h > 0),
            "hidden list non-empty with positive widths"
        );
        PolicyArchitecture {
            obs_dim,
            act_dim,
            hidden,
        }
    }

    pub fn shape(&self) -> MlpShape {
        let mut dims = Vec::with_capacity(self.hidden.len() + 2);
        dims.push(self.obs_dim);
        dims.extend_from_slice(&self.hidden);
        dims.push(self.act_dim);
        MlpShape::new(dims, OutputActivation::Tanh)
    }
}

/// Flat real-valued parameter vector of one policy network.
#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    params: Vec<f64>,
}

impl Genome {
    /// Wraps a raw parameter vector, rejecting non-finite entries.
    pub fn new(params: Vec<f64>) -> Result<Self> {
        if let Some(i) = params.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "genome entry {i} is not finite"
            )));
        }
        Ok(Genome { params })
    }

    pub fn zeros(len: usize) -> Self {
        Genome {
            params: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn into_params(self) -> Vec<f64> {
        self.params
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|v| v.is_finite())
    }

    /// Checkpoint encoding: little-endian u64 length, then raw LE f64s.
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        write_f64_vec(w, &self.params)
    }

    pub fn read_from<R: Read>(r: &mut R) -> std::io::Result<Self> {
        Ok(Genome {
            params: read_f64_vec(r)?,
        })
    }
}

pub(crate) fn write_f64_vec<W: Write>(w: &mut W, v: &[f64]) -> std::io::Result<()> {
    w.write_all(&(v.len() as u64).to_le_bytes())?;
    for x in v {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub(crate) fn read_f64_vec<R: Read>(r: &mut R) -> std::io::Result<Vec<f64>> {
    let mut lenb = [0u8; 8];
    r.read_exact(&mut lenb)?;
    let len = u64::from_le_bytes(lenb) as usize;
    let mut out = Vec::with_capacity(len);
    let mut buf = [0u8; 8];
    for _ in 0..len {
        r.read_exact(&mut buf)?;
        out.push(f64::from_le_bytes(buf));
    }
    Ok(out)
}

/// Total parameter count of the architecture, biases included.
pub fn param_count(arch: &PolicyArchitecture) -> usize {
    arch.shape().param_count()
}

/// Draws weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer;
/// biases are exactly zero.
pub fn init_genome<R: Rng>(arch: &PolicyArchitecture, rng: &mut R) -> Genome {
    Genome {
        params: init_params(&arch.shape(), rng),
    }
}

/// Same init scheme for an arbitrary shape (used for critic networks too).
pub fn init_params<R: Rng>(shape: &MlpShape, rng: &mut R) -> Vec<f64> {
    let mut params = Vec::with_capacity(shape.param_count());
    for pair in shape.dims.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let bound = 1.0 / (fan_in as f64).sqrt();
        for _ in 0..fan_in * fan_out {
            params.push(rng.random_range(-bound..bound));
        }
        params.extend(std::iter::repeat_n(0.0, fan_out));
    }
    params
}

/// Deterministic policy evaluation: tanh(W_L ReLU(... W_1 obs + b_1 ...) + b_L).
pub fn policy_forward(arch: &PolicyArchitecture, g: &Genome, obs: &[f64]) -> Result<Vec<f64>> {
    arch.shape().forward_one(g.params(), obs)
}

/// Euclidean distance between two genomes of equal length.
pub fn l2_distance(a: &Genome, b: &Genome) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "genome length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.params()
        .iter()
        .zip(b.params())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngTree;

    fn tiny_arch() -> PolicyArchitecture {
        PolicyArchitecture::with_hidden(1, 1, vec![1])
    }

    #[test]
    fn param_count_hand_cases() {
        let a = PolicyArchitecture::with_hidden(2, 1, vec![3]);
        assert_eq!(param_count(&a), 13); // 2*3+3 + 3*1+1
        let b = PolicyArchitecture::new(2, 2);
        assert_eq!(param_count(&b), 17_154); // 2*128+128 + 128*128+128 + 128*2+2
        assert_eq!(param_count(&tiny_arch()), 4);
    }

    #[test]
    fn init_biases_zero_and_weights_bounded() {
        let arch = PolicyArchitecture::with_hidden(4, 2, vec![8]);
        let g = init_genome(&arch, &mut RngTree::new(3).stream("init"));
        // layer 1: 4*8 weights then 8 biases; layer 2: 8*2 weights then 2 biases
        let p = g.params();
        for &w in &p[0..32] {
            assert!(w.abs() <= 0.5, "fan_in 4 bound");
        }
        for &b in &p[32..40] {
            assert_eq!(b, 0.0);
        }
        for &b in &p[40 + 16..40 + 18] {
            assert_eq!(b, 0.0);
        }
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let arch = PolicyArchitecture::with_hidden(3, 2, vec![5]);
        let a = init_genome(&arch, &mut RngTree::new(11).stream("init"));
        let b = init_genome(&arch, &mut RngTree::new(11).stream("init"));
        assert_eq!(a, b);
    }

    #[test]
    fn forward_zero_genome_gives_zero_action() {
        let arch = PolicyArchitecture::with_hidden(3, 2, vec![4, 4]);
        let g = Genome::zeros(param_count(&arch));
        let y = policy_forward(&arch, &g, &[0.3, -0.8, 2.0]).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_hand_case() {
        // 1-1-1 net, w1=1 b1=0 w2=1 b2=0, obs [2] -> tanh(ReLU(2)) = tanh 2
        let g = Genome::new(vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        let y = policy_forward(&tiny_arch(), &g, &[2.0]).unwrap();
        assert!((y[0] - 2.0f64.tanh()).abs() < 1e-15);
        assert!((y[0] - 0.9640).abs() < 1e-4);
    }

    #[test]
    fn negative_preactivation_yields_tanh_of_output_bias() {
        // w1=1 b1=0 w2=5 b2=0.3, obs [-1] -> ReLU(-1)=0 -> tanh(0.3)
        let g = Genome::new(vec![1.0, 0.0, 5.0, 0.3]).unwrap();
        let y = policy_forward(&tiny_arch(), &g, &[-1.0]).unwrap();
        assert!((y[0] - 0.3f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn forward_dimension_mismatch_errors() {
        let g = Genome::zeros(4);
        assert!(policy_forward(&tiny_arch(), &g, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn l2_distance_hand_cases() {
        let a = Genome::new(vec![3.0, 4.0]).unwrap();
        let b = Genome::zeros(2);
        assert_eq!(l2_distance(&a, &b).unwrap(), 5.0);
        assert_eq!(l2_distance(&a, &a).unwrap(), 0.0);
        let c = Genome::new(vec![1.0; 4]).unwrap();
        let d = Genome::zeros(4);
        assert_eq!(l2_distance(&c, &d).unwrap(), 2.0);
        assert!(l2_distance(&a, &c).is_err());
    }

    #[test]
    fn genome_rejects_non_finite() {
        assert!(Genome::new(vec![1.0, f64::NAN]).is_err());
        assert!(Genome::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn serialization_round_trip() {
        let g = Genome::new(vec![0.5, -1.25, 3.0e-7]).unwrap();
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 3 * 8);
        let back = Genome::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(g, back);
    }
}
