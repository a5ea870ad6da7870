//! Minimal dense feed-forward binary classifier with a pluggable output
//! activation and the three optimizers compared in the experiments.
//!
//! The loss is mean binary cross-entropy over the activation output, with
//! labels mapped `y -> (y+1)/2` at the loss boundary and probabilities
//! clamped at `1e-7` inside the logs. Update rules, exactly:
//!
//! - SGD:      `theta -= eta * g`
//! - Adagrad:  `acc += g^2; theta -= eta * g / (sqrt(acc) + eps)`
//! - Adam:     `m = b1 m + (1-b1) g; v = b2 v + (1-b2) g^2;`
//!             `theta -= eta * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)`
//!
//! Training deterministically derives from `(init_seed, shuffle_seed)`.

use crate::activation::{LightNeuron, LightParams};
use crate::data::Dataset;
use crate::error::{LightError, Result};
use crate::population::GrowthModel;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Probability clamp applied inside the cross-entropy logs.
pub const PROB_CLAMP: f64 = 1e-7;

/// Hidden-layer nonlinearity. The architectures under study are linear
/// chains; ReLU is available behind this switch for robustness runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenActivation {
    Linear,
    Relu,
}

/// Architecture description: `input_dim -> hidden_width x hidden_layers -> 1`
/// with the LIGHT output activation.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub input_dim: usize,
    /// Number of hidden layers L; 0 is a single linear map (logistic
    /// regression shape).
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub hidden_activation: HiddenActivation,
    pub output_model: GrowthModel,
    pub output_params: LightParams,
    pub init_seed: u64,
    /// Biases are included by default: the synthetic cluster centers are not
    /// origin-symmetric. Disable for theory-mode runs.
    pub use_biases: bool,
}

impl NetworkSpec {
    pub fn new(
        input_dim: usize,
        hidden_layers: usize,
        hidden_width: usize,
        output_model: GrowthModel,
        output_params: LightParams,
        init_seed: u64,
    ) -> Self {
        NetworkSpec {
            input_dim,
            hidden_layers,
            hidden_width,
            hidden_activation: HiddenActivation::Linear,
            output_model,
            output_params,
            init_seed,
            use_biases: true,
        }
    }

    /// Layer dimensions, input to output: `n, d_l, ..., d_l, 1`.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim];
        dims.extend(std::iter::repeat(self.hidden_width).take(self.hidden_layers));
        dims.push(1);
        dims
    }

    fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(LightError::InvalidParams("input_dim must be >= 1".into()));
        }
        if self.hidden_layers > 0 && self.hidden_width == 0 {
            return Err(LightError::InvalidParams(
                "hidden_width must be >= 1".into(),
            ));
        }
        self.output_params.validate()?;
        if self.output_params.k != 1.0 {
            return Err(LightError::InvalidParams(
                "classifier output requires K = 1 so outputs behave like probabilities".into(),
            ));
        }
        Ok(())
    }
}

/// One dense layer: weights are `in_dim x out_dim`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl DenseLayer {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        DenseLayer {
            in_dim,
            out_dim,
            w: vec![0.0; in_dim * out_dim],
            b: vec![0.0; out_dim],
        }
    }
}

/// Per-layer optimizer accumulators, allocated lazily at the first step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LayerSlots {
    pub m_w: Vec<f64>,
    pub v_w: Vec<f64>,
    pub m_b: Vec<f64>,
    pub v_b: Vec<f64>,
}

/// Weights, biases and optimizer slots of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub layers: Vec<DenseLayer>,
    pub slots: Vec<LayerSlots>,
    /// Number of optimizer steps taken (Adam bias correction).
    pub step_count: u64,
}

impl ModelState {
    /// Glorot-uniform initialization (`+-sqrt(6/(fan_in+fan_out))`), biases
    /// zero, seeded.
    pub fn init(spec: &NetworkSpec) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.init_seed);
        let dims = spec.dims();
        let mut layers = Vec::new();
        for win in dims.windows(2) {
            let (fan_in, fan_out) = (win[0], win[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let mut layer = DenseLayer::zeros(fan_in, fan_out);
            for w in layer.w.iter_mut() {
                *w = rng.random_range(-bound..bound);
            }
            layers.push(layer);
        }
        let slots = layers.iter().map(|_| LayerSlots::default()).collect();
        Ok(ModelState {
            layers,
            slots,
            step_count: 0,
        })
    }

    pub fn zeros(spec: &NetworkSpec) -> Result<Self> {
        let mut s = Self::init(spec)?;
        for l in &mut s.layers {
            l.w.iter_mut().for_each(|w| *w = 0.0);
        }
        Ok(s)
    }
}

/// Gradients with the same shapes as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<DenseLayer>,
}

/// Optimizer selection and constants. `eta > 0`, `0 <= beta < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub stability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adam,
    Adagrad,
}

impl OptimizerKind {
    pub fn label(&self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Adagrad => "adagrad",
        }
    }
}

impl OptimizerSpec {
    pub fn sgd() -> Self {
        OptimizerSpec {
            kind: OptimizerKind::Sgd,
            learning_rate: 0.01,
            beta1: 0.0,
            beta2: 0.0,
            stability: 1e-7,
        }
    }

    pub fn adam() -> Self {
        OptimizerSpec {
            kind: OptimizerKind::Adam,
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            stability: 1e-7,
        }
    }

    pub fn adagrad() -> Self {
        OptimizerSpec {
            kind: OptimizerKind::Adagrad,
            learning_rate: 0.001,
            beta1: 0.0,
            beta2: 0.0,
            stability: 1e-7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(LightError::InvalidParams(
                "learning rate must be > 0".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(LightError::InvalidParams("betas must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Training-loop configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub shuffle_seed: u64,
    /// Independent repetitions a sweep performs; a single `train` call is
    /// one run.
    pub runs: usize,
    /// Cap on the per-sample loss gradient with respect to the logit. The
    /// Gompertz-like activations have exponentially steep cross-entropy
    /// gradients left of the onset; the cap keeps those steps bounded.
    /// `None` disables capping (the exact gradient, as `backward` computes).
    pub grad_cap: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 75,
            epochs: 1500,
            shuffle_seed: 0,
            runs: 10,
            grad_cap: Some(10.0),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(LightError::InvalidParams(
                "batch_size and epochs must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Number of mini-batches per epoch: `ceil(m_train / batch)`.
pub fn batches_per_epoch(m_train: usize, batch_size: usize) -> usize {
    m_train.div_ceil(batch_size)
}

/// A network ready for evaluation and training: spec, parameters, and the
/// prevalidated output neuron.
pub struct Network {
    pub spec: NetworkSpec,
    pub state: ModelState,
    neuron: LightNeuron,
}

impl Network {
    pub fn new(spec: NetworkSpec) -> Result<Self> {
        let state = ModelState::init(&spec)?;
        let neuron = LightNeuron::new(spec.output_model, &spec.output_params)?;
        Ok(Network {
            spec,
            state,
            neuron,
        })
    }

    pub fn with_state(spec: NetworkSpec, state: ModelState) -> Result<Self> {
        let neuron = LightNeuron::new(spec.output_model, &spec.output_params)?;
        Ok(Network {
            spec,
            state,
            neuron,
        })
    }

    pub fn neuron(&self) -> &LightNeuron {
        &self.neuron
    }

    /// Decision threshold: half the output activation's own saturation
    /// value, which is `K/2` for every zero-harvest configuration.
    pub fn decision_threshold(&self) -> f64 {
        self.neuron.midpoint()
    }

    fn affine(&self, layer: &DenseLayer, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.resize(layer.out_dim, 0.0);
        for j in 0..layer.out_dim {
            out[j] = if self.spec.use_biases {
                layer.b[j]
            } else {
                0.0
            };
        }
        for (i, &xi) in input.iter().enumerate() {
            let row = &layer.w[i * layer.out_dim..(i + 1) * layer.out_dim];
            for j in 0..layer.out_dim {
                out[j] += xi * row[j];
            }
        }
    }

    /// Pre-activations and activations of every layer for one sample.
    fn forward_trace(&self, x: &[f64]) -> Result<(Vec<Vec<f64>>, f64)> {
        if x.len() != self.spec.input_dim {
            return Err(LightError::Shape {
                expected: format!("{} inputs", self.spec.input_dim),
                got: format!("{}", x.len()),
            });
        }
        let n_layers = self.state.layers.len();
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(n_layers + 1);
        acts.push(x.to_vec());
        let mut buf = Vec::new();
        for (li, layer) in self.state.layers.iter().enumerate() {
            self.affine(layer, acts.last().unwrap(), &mut buf);
            let is_output = li == n_layers - 1;
            if !is_output && self.spec.hidden_activation == HiddenActivation::Relu {
                for v in buf.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            acts.push(buf.clone());
        }
        let logit = acts.last().unwrap()[0];
        Ok((acts, logit))
    }

    /// Affine chain output (logit) and activation output (probability).
    pub fn forward(&self, x: &[f64]) -> Result<(f64, f64)> {
        let (_, logit) = self.forward_trace(x)?;
        let prob = self.neuron.value(logit)?;
        Ok((logit, prob))
    }

    fn sample_loss(&self, prob: f64, y: f64) -> f64 {
        let target = (y + 1.0) / 2.0;
        let p = prob.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
    }

    /// d(loss)/d(logit) for one sample: `-l'/l` for positive labels,
    /// `l'/(1-l)` for negative ones, both computed in ratio form so the
    /// saturated tails stay finite. `cap` bounds the magnitude.
    fn logit_grad(&self, logit: f64, y: f64, cap: Option<f64>) -> Result<f64> {
        let g = if y > 0.0 {
            -self.neuron.log_deriv_ratio(logit)
        } else {
            self.neuron.deriv_over_one_minus(logit)?
        };
        Ok(match cap {
            Some(c) => g.clamp(-c, c),
            None => g,
        })
    }

    /// Mean cross-entropy gradient over a batch, plus the mean loss.
    /// Labels must be in `{-1, +1}`. `cap = None` yields the exact gradient.
    pub fn backward_with_cap(
        &self,
        xs: &[&[f64]],
        ys: &[f64],
        cap: Option<f64>,
    ) -> Result<(Gradients, f64)> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(LightError::Shape {
                expected: "non-empty batch with matching labels".into(),
                got: format!("{} inputs, {} labels", xs.len(), ys.len()),
            });
        }
        let mut grads = Gradients {
            layers: self
                .state
                .layers
                .iter()
                .map(|l| DenseLayer::zeros(l.in_dim, l.out_dim))
                .collect(),
        };
        let mut loss_sum = 0.0;
        let scale = 1.0 / xs.len() as f64;
        for (x, &y) in xs.iter().zip(ys.iter()) {
            let (acts, logit) = self.forward_trace(x)?;
            let prob = self.neuron.value(logit)?;
            loss_sum += self.sample_loss(prob, y);
            let mut delta = vec![self.logit_grad(logit, y, cap)? * scale];
            for li in (0..self.state.layers.len()).rev() {
                let layer = &self.state.layers[li];
                let input = &acts[li];
                let g = &mut grads.layers[li];
                for (i, &xi) in input.iter().enumerate() {
                    let row = &mut g.w[i * layer.out_dim..(i + 1) * layer.out_dim];
                    for j in 0..layer.out_dim {
                        row[j] += xi * delta[j];
                    }
                }
                if self.spec.use_biases {
                    for j in 0..layer.out_dim {
                        g.b[j] += delta[j];
                    }
                }
                if li > 0 {
                    let mut prev = vec![0.0; layer.in_dim];
                    for i in 0..layer.in_dim {
                        let row = &layer.w[i * layer.out_dim..(i + 1) * layer.out_dim];
                        for j in 0..layer.out_dim {
                            prev[i] += row[j] * delta[j];
                        }
                    }
                    if self.spec.hidden_activation == HiddenActivation::Relu {
                        // acts[li] is post-ReLU; its zeros gate the gradient.
                        for (v, a) in prev.iter_mut().zip(acts[li].iter()) {
                            if *a <= 0.0 {
                                *v = 0.0;
                            }
                        }
                    }
                    delta = prev;
                }
            }
        }
        for (li, g) in grads.layers.iter().enumerate() {
            if g.w.iter().chain(g.b.iter()).any(|v| !v.is_finite()) {
                return Err(LightError::NonFinite {
                    layer: li,
                    epoch: 0,
                    step: 0,
                });
            }
        }
        Ok((grads, loss_sum * scale))
    }

    /// Exact mean cross-entropy gradient over a batch (no cap).
    pub fn backward(&self, xs: &[&[f64]], ys: &[f64]) -> Result<(Gradients, f64)> {
        self.backward_with_cap(xs, ys, None)
    }

    /// Mean cross-entropy loss over a batch, without gradients.
    pub fn batch_loss(&self, xs: &[&[f64]], ys: &[f64]) -> Result<f64> {
        let mut sum = 0.0;
        for (x, &y) in xs.iter().zip(ys.iter()) {
            let (_, prob) = self.forward(x)?;
            sum += self.sample_loss(prob, y);
        }
        Ok(sum / xs.len() as f64)
    }

    /// Fraction of the given rows classified correctly under the midpoint
    /// threshold.
    pub fn accuracy(&self, data: &Dataset, indices: &[usize]) -> Result<f64> {
        let thr = self.decision_threshold();
        let mut correct = 0usize;
        for &i in indices {
            let (_, prob) = self.forward(data.row(i))?;
            let pred = if prob >= thr { 1.0 } else { -1.0 };
            if pred == data.label(i) {
                correct += 1;
            }
        }
        Ok(correct as f64 / indices.len().max(1) as f64)
    }
}

/// Apply one optimizer step to the state, in place.
pub fn optimizer_step(
    state: &mut ModelState,
    grads: &Gradients,
    opt: &OptimizerSpec,
) -> Result<()> {
    opt.validate()?;
    if grads.layers.len() != state.layers.len() {
        return Err(LightError::Shape {
            expected: format!("{} layer gradients", state.layers.len()),
            got: format!("{}", grads.layers.len()),
        });
    }
    state.step_count += 1;
    let t = state.step_count;
    for (li, layer) in state.layers.iter_mut().enumerate() {
        let g = &grads.layers[li];
        let slots = &mut state.slots[li];
        match opt.kind {
            OptimizerKind::Sgd => {
                for (w, gw) in layer.w.iter_mut().zip(g.w.iter()) {
                    *w -= opt.learning_rate * gw;
                }
                for (b, gb) in layer.b.iter_mut().zip(g.b.iter()) {
                    *b -= opt.learning_rate * gb;
                }
            }
            OptimizerKind::Adagrad => {
                if slots.v_w.is_empty() {
                    slots.v_w = vec![0.0; layer.w.len()];
                    slots.v_b = vec![0.0; layer.b.len()];
                }
                for ((w, gw), acc) in layer.w.iter_mut().zip(g.w.iter()).zip(slots.v_w.iter_mut()) {
                    *acc += gw * gw;
                    *w -= opt.learning_rate * gw / (acc.sqrt() + opt.stability);
                }
                for ((b, gb), acc) in layer.b.iter_mut().zip(g.b.iter()).zip(slots.v_b.iter_mut()) {
                    *acc += gb * gb;
                    *b -= opt.learning_rate * gb / (acc.sqrt() + opt.stability);
                }
            }
            OptimizerKind::Adam => {
                if slots.m_w.is_empty() {
                    slots.m_w = vec![0.0; layer.w.len()];
                    slots.v_w = vec![0.0; layer.w.len()];
                    slots.m_b = vec![0.0; layer.b.len()];
                    slots.v_b = vec![0.0; layer.b.len()];
                }
                let c1 = 1.0 - opt.beta1.powi(t as i32);
                let c2 = 1.0 - opt.beta2.powi(t as i32);
                let update = |w: &mut f64, gv: f64, m: &mut f64, v: &mut f64| {
                    *m = opt.beta1 * *m + (1.0 - opt.beta1) * gv;
                    *v = opt.beta2 * *v + (1.0 - opt.beta2) * gv * gv;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *w -= opt.learning_rate * m_hat / (v_hat.sqrt() + opt.stability);
                };
                for i in 0..layer.w.len() {
                    update(
                        &mut layer.w[i],
                        g.w[i],
                        &mut slots.m_w[i],
                        &mut slots.v_w[i],
                    );
                }
                for i in 0..layer.b.len() {
                    update(
                        &mut layer.b[i],
                        g.b[i],
                        &mut slots.m_b[i],
                        &mut slots.v_b[i],
                    );
                }
            }
        }
    }
    Ok(())
}

/// One epoch record of an accuracy curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_acc: f64,
    pub test_acc: f64,
    pub train_loss: f64,
}

/// Per-epoch train/test accuracy and loss for one (model, optimizer, seed)
/// run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AccuracyCurve {
    pub records: Vec<EpochRecord>,
}

impl AccuracyCurve {
    pub fn final_test_acc(&self) -> f64 {
        self.records.last().map(|r| r.test_acc).unwrap_or(0.0)
    }

    pub fn final_train_acc(&self) -> f64 {
        self.records.last().map(|r| r.train_acc).unwrap_or(0.0)
    }

    /// First epoch (1-based) whose test accuracy reaches `fraction` of the
    /// final test accuracy.
    pub fn epochs_to_fraction_of_final(&self, fraction: f64) -> usize {
        let target = fraction * self.final_test_acc();
        for r in &self.records {
            if r.test_acc >= target {
                return r.epoch;
            }
        }
        self.records.len()
    }

    /// CSV serialization: header `epoch,train_acc,test_acc,train_loss`,
    /// floats at 17 significant digits, `\n` line endings.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(b"epoch,train_acc,test_acc,train_loss\n")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{}",
                r.epoch,
                crate::fmt::float17(r.train_acc),
                crate::fmt::float17(r.test_acc),
                crate::fmt::float17(r.train_loss)
            )?;
        }
        Ok(())
    }
}

/// Mini-batch training: seeded shuffling each epoch, `ceil(m/batch)` steps
/// per epoch, per-epoch accuracy at the midpoint threshold. Deterministic
/// given `(spec.init_seed, cfg.shuffle_seed)`.
pub fn train(
    spec: &NetworkSpec,
    data: &Dataset,
    opt: &OptimizerSpec,
    cfg: &TrainConfig,
) -> Result<AccuracyCurve> {
    cfg.validate()?;
    opt.validate()?;
    if data.train_indices().is_empty() {
        return Err(LightError::InvalidParams(
            "dataset has an empty train split".into(),
        ));
    }
    let mut net = Network::new(spec.clone())?;
    let mut order: Vec<usize> = data.train_indices().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
    let m_train = order.len();
    let mut curve = AccuracyCurve::default();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (step, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let xs: Vec<&[f64]> = chunk.iter().map(|&i| data.row(i)).collect();
            let ys: Vec<f64> = chunk.iter().map(|&i| data.label(i)).collect();
            let (grads, batch_loss) = net
                .backward_with_cap(&xs, &ys, cfg.grad_cap)
                .map_err(|e| annotate_step(e, epoch, step))?;
            loss_sum += batch_loss * chunk.len() as f64;
            optimizer_step(&mut net.state, &grads, opt)?;
            for (li, layer) in net.state.layers.iter().enumerate() {
                if layer.w.iter().chain(layer.b.iter()).any(|v| !v.is_finite()) {
                    return Err(LightError::NonFinite {
                        layer: li,
                        epoch,
                        step,
                    });
                }
            }
        }
        let train_acc = net.accuracy(data, data.train_indices())?;
        let test_acc = net.accuracy(data, data.test_indices())?;
        curve.records.push(EpochRecord {
            epoch,
            train_acc,
            test_acc,
            train_loss: loss_sum / m_train as f64,
        });
    }
    Ok(curve)
}

fn annotate_step(e: LightError, epoch: usize, step: usize) -> LightError {
    match e {
        LightError::NonFinite { layer, .. } => LightError::NonFinite { layer, epoch, step },
        other => other,
    }
}
