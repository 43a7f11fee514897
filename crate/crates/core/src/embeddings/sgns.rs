//! Skip-gram negative-sampling objective.
//!
//! For a center representation `c`, positive context `u` and negatives
//! `u_1..u_k`:
//!
//! ```text
//! loss = -ln σ(c·u) - Σ ln σ(-c·u_n)
//! ∂/∂c   = (σ(c·u) - 1) u + Σ σ(c·u_n) u_n
//! ∂/∂u   = (σ(c·u) - 1) c
//! ∂/∂u_n = σ(c·u_n) c
//! ```

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `ln σ(x)`, stable for large `|x|`.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgnsGrads {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn sgns_loss_and_grads(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> SgnsGrads {
    assert_eq!(center.len(), context.len(), "vector dimensions differ");
    let dim = center.len();

    let pos = dot(center, context);
    let g_pos = sigmoid(pos) - 1.0;
    let mut loss = -log_sigmoid(pos);
    let mut grad_center: Vec<f64> = context.iter().map(|u| g_pos * u).collect();
    let grad_context = center.iter().map(|c| g_pos * c).collect();

    let mut grad_negatives = Vec::with_capacity(negatives.len());
    for neg in negatives {
        assert_eq!(neg.len(), dim, "vector dimensions differ");
        let s = dot(center, neg);
        loss -= log_sigmoid(-s);
        let g = sigmoid(s);
        for (gc, u) in grad_center.iter_mut().zip(neg.iter()) {
            *gc += g * u;
        }
        grad_negatives.push(center.iter().map(|c| g * c).collect());
    }

    SgnsGrads {
        loss,
        center: grad_center,
        context: grad_context,
        negatives: grad_negatives,
    }
}

/// `f32` dot product with eight independent accumulators so the compiler
/// can vectorize it.
#[inline]
pub(crate) fn dot_f32(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0f32; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f32 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    acc.iter().sum::<f32>() + tail
}

pub(crate) fn sigmoid_f32(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

/// Loss of one target given its score `f = h·u`.
pub(crate) fn target_loss(f: f32, positive: bool) -> f64 {
    let f = f as f64;
    if positive {
        -log_sigmoid(f)
    } else {
        -log_sigmoid(-f)
    }
}

/// Scaled negative gradient coefficient `lr * (label - σ(f))` used by the
/// SGD step: the target row moves by `coef * h` and the center gradient
/// accumulator by `coef * u`.
pub(crate) fn step_coefficient(f: f32, positive: bool, lr: f32) -> f32 {
    let label = if positive { 1.0 } else { 0.0 };
    lr * (label - sigmoid_f32(f))
}
