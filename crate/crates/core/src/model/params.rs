use std::path::Path;

use candle_core::{DType, Device, Result, Tensor, Var};
use candle_nn::VarMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Named trainable tensors with seeded initialization.
///
/// Candle's CPU backend ignores `set_seed`, so initial values are drawn
/// here from a ChaCha stream and then wrapped as variables.
pub struct ParamStore {
    varmap: VarMap,
    rng: ChaCha8Rng,
    dtype: DType,
    device: Device,
}

impl ParamStore {
    pub fn new(seed: u64, dtype: DType, device: &Device) -> Self {
        Self {
            varmap: VarMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            dtype,
            device: device.clone(),
        }
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    pub fn device(&self) -> &Device {
        &self.device
    }

    fn insert(&mut self, name: &str, values: Vec<f64>, shape: &[usize]) -> Result<Tensor> {
        let t = Tensor::from_vec(values, shape, &self.device)?.to_dtype(self.dtype)?;
        let var = Var::from_tensor(&t)?;
        let tensor = var.as_tensor().clone();
        self.varmap
            .data()
            .lock()
            .expect("varmap lock")
            .insert(name.to_string(), var);
        Ok(tensor)
    }

    /// Uniform in `[-bound, bound]`.
    pub fn uniform(&mut self, name: &str, shape: &[usize], bound: f64) -> Result<Tensor> {
        let n: usize = shape.iter().product();
        let values = (0..n).map(|_| self.rng.gen_range(-bound..=bound)).collect();
        self.insert(name, values, shape)
    }

    /// Glorot-uniform for a `[out, in]` weight.
    pub fn glorot(&mut self, name: &str, out_dim: usize, in_dim: usize) -> Result<Tensor> {
        let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
        self.uniform(name, &[out_dim, in_dim], bound)
    }

    pub fn constant(&mut self, name: &str, shape: &[usize], value: f64) -> Result<Tensor> {
        let n: usize = shape.iter().product();
        self.insert(name, vec![value; n], shape)
    }

    pub fn vars(&self) -> Vec<Var> {
        let data = self.varmap.data().lock().expect("varmap lock");
        let mut named: Vec<(&String, &Var)> = data.iter().collect();
        named.sort_by(|a, b| a.0.cmp(b.0));
        named.into_iter().map(|(_, v)| v.clone()).collect()
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.varmap.data().lock().expect("varmap lock").get(name).cloned()
    }

    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> =
            self.varmap.data().lock().expect("varmap lock").keys().cloned().collect();
        names.sort();
        names
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.varmap.save(path)
    }

    /// Overwrites every registered variable with the values stored at `path`.
    pub fn load(&mut self, path: &Path) -> Result<()> {
        self.varmap.load(path)
    }
}
