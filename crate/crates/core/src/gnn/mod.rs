//! Graph-attention link predictor.
//!
//! Node embeddings come from a multi-head graph attention network over the
//! positive edges of a [`RelationGraph`]; a symmetric two-layer head on the
//! elementwise product of two embeddings yields the link probability. All
//! arithmetic is double precision and gradients are derived by hand, checked
//! against central finite differences in [`gradcheck`].

mod features;
mod gradcheck;
mod train;

pub use features::{node_features, trigram_features};
pub use gradcheck::{analytic_gradient, gradient_check, DEFAULT_FD_STEP};
pub use train::{curve_to_csv, eval_link_accuracy, train, Batch, EpochStat, TrainConfig, TrainOutcome};

use std::fs;
use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::relation::{Ontology, RelationGraph};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend(row);
        }
        Self { rows: r, cols: c, data }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Hashed character-trigram feature width.
    pub hash_dim: usize,
    /// Learnable per-category embedding width.
    pub embed_dim: usize,
    /// Number of attention layers.
    pub layers: usize,
    /// Attention heads per layer.
    pub heads: usize,
    /// Output width per head.
    pub head_dim: usize,
    /// Hidden width of the prediction head.
    pub predictor_hidden: usize,
    /// Negative slope of the attention LeakyReLU.
    pub leaky_slope: f64,
    /// Seed of the trigram hash.
    pub hash_seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hash_dim: 64,
            embed_dim: 16,
            layers: 2,
            heads: 4,
            head_dim: 32,
            predictor_hidden: 32,
            leaky_slope: 0.2,
            hash_seed: 0x5eed_c0de,
        }
    }
}

impl ModelConfig {
    pub fn input_dim(&self) -> usize {
        self.hash_dim + self.embed_dim
    }

    /// Input width of attention layer `l`.
    pub fn layer_in_dim(&self, l: usize) -> usize {
        if l == 0 {
            self.input_dim()
        } else {
            self.heads * self.head_dim
        }
    }

    /// Width of the final node embedding (heads averaged).
    pub fn final_dim(&self) -> usize {
        self.head_dim
    }
}

/// Flat parameter layout: embedding table, then per layer per head the
/// weight matrix and attention vector, then the prediction head.
#[derive(Debug, Clone, PartialEq)]
struct Layout {
    n_categories: usize,
    embed: usize,
    layer_w: Vec<Vec<usize>>,
    layer_a: Vec<Vec<usize>>,
    pred_w1: usize,
    pred_b1: usize,
    pred_w2: usize,
    pred_b2: usize,
    total: usize,
}

impl Layout {
    fn new(cfg: &ModelConfig, n_categories: usize) -> Self {
        let mut off = 0;
        let embed = off;
        off += n_categories * cfg.embed_dim;
        let mut layer_w = Vec::new();
        let mut layer_a = Vec::new();
        for l in 0..cfg.layers {
            let in_dim = cfg.layer_in_dim(l);
            let mut ws = Vec::new();
            let mut asv = Vec::new();
            for _ in 0..cfg.heads {
                ws.push(off);
                off += cfg.head_dim * in_dim;
                asv.push(off);
                off += 2 * cfg.head_dim;
            }
            layer_w.push(ws);
            layer_a.push(asv);
        }
        let pred_w1 = off;
        off += cfg.predictor_hidden * cfg.final_dim();
        let pred_b1 = off;
        off += cfg.predictor_hidden;
        let pred_w2 = off;
        off += cfg.predictor_hidden;
        let pred_b2 = off;
        off += 1;
        Self {
            n_categories,
            embed,
            layer_w,
            layer_a,
            pred_w1,
            pred_b1,
            pred_w2,
            pred_b2,
            total: off,
        }
    }
}

/// All learnable state plus the category list it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkModel {
    pub config: ModelConfig,
    pub categories: Vec<String>,
    layout: Layout,
    theta: Vec<f64>,
}

fn glorot(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> f64 {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    rng.random_range(-bound..bound)
}

impl LinkModel {
    /// Fresh model with seeded initialization for the given ontology.
    pub fn new(config: ModelConfig, ontology: &Ontology, seed: u64) -> Self {
        let categories: Vec<String> = ontology
            .categories()
            .iter()
            .map(|c| c.name.clone())
            .collect();
        let layout = Layout::new(&config, categories.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut theta = vec![0.0; layout.total];
        for i in 0..categories.len() * config.embed_dim {
            theta[layout.embed + i] = rng.random_range(-0.1..0.1);
        }
        for l in 0..config.layers {
            let in_dim = config.layer_in_dim(l);
            for h in 0..config.heads {
                let w0 = layout.layer_w[l][h];
                for i in 0..config.head_dim * in_dim {
                    theta[w0 + i] = glorot(&mut rng, in_dim, config.head_dim);
                }
                let a0 = layout.layer_a[l][h];
                for i in 0..2 * config.head_dim {
                    theta[a0 + i] = glorot(&mut rng, 2 * config.head_dim, 1);
                }
            }
        }
        let fd = config.final_dim();
        for i in 0..config.predictor_hidden * fd {
            theta[layout.pred_w1 + i] = glorot(&mut rng, fd, config.predictor_hidden);
        }
        for i in 0..config.predictor_hidden {
            theta[layout.pred_w2 + i] = glorot(&mut rng, config.predictor_hidden, 1);
        }
        Self {
            config,
            categories,
            layout,
            theta,
        }
    }

    pub fn param_count(&self) -> usize {
        self.layout.total
    }

    pub(crate) fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub(crate) fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    /// Learnable embedding row of a category.
    pub fn embed_row(&self, cat_index: usize) -> &[f64] {
        let d = self.config.embed_dim;
        let off = self.layout.embed + cat_index * d;
        &self.theta[off..off + d]
    }

    fn w(&self, l: usize, h: usize) -> &[f64] {
        let in_dim = self.config.layer_in_dim(l);
        let off = self.layout.layer_w[l][h];
        &self.theta[off..off + self.config.head_dim * in_dim]
    }

    fn attn(&self, l: usize, h: usize) -> &[f64] {
        let off = self.layout.layer_a[l][h];
        &self.theta[off..off + 2 * self.config.head_dim]
    }

    fn pred_w1(&self) -> &[f64] {
        let n = self.config.predictor_hidden * self.config.final_dim();
        &self.theta[self.layout.pred_w1..self.layout.pred_w1 + n]
    }

    fn pred_b1(&self) -> &[f64] {
        let n = self.config.predictor_hidden;
        &self.theta[self.layout.pred_b1..self.layout.pred_b1 + n]
    }

    fn pred_w2(&self) -> &[f64] {
        let n = self.config.predictor_hidden;
        &self.theta[self.layout.pred_w2..self.layout.pred_w2 + n]
    }

    fn pred_b2(&self) -> f64 {
        self.theta[self.layout.pred_b2]
    }

    /// Writes a line-based text checkpoint (exact `f64` round trip).
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        out.push_str("# cosearch checkpoint v1\n");
        out.push_str(&format!("hash_seed {}\n", c.hash_seed));
        out.push_str(&format!("hash_dim {}\n", c.hash_dim));
        out.push_str(&format!("embed_dim {}\n", c.embed_dim));
        out.push_str(&format!("layers {}\n", c.layers));
        out.push_str(&format!("heads {}\n", c.heads));
        out.push_str(&format!("head_dim {}\n", c.head_dim));
        out.push_str(&format!("predictor_hidden {}\n", c.predictor_hidden));
        out.push_str(&format!("leaky_slope {:e}\n", c.leaky_slope));
        out.push_str(&format!("categories {}\n", self.categories.len()));
        for name in &self.categories {
            out.push_str(&format!("cat {name}\n"));
        }
        out.push_str(&format!("params {}\n", self.theta.len()));
        for v in &self.theta {
            out.push_str(&format!("{v:e}\n"));
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_text(&text).map_err(|e| match e {
            Error::Parse { line, msg, .. } => Error::Parse {
                path: path.display().to_string(),
                line,
                msg,
            },
            other => other,
        })
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: "<checkpoint>".into(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate();
        let mut header = std::collections::HashMap::new();
        let mut categories = Vec::new();
        let mut n_params = None;
        for (i, raw) in lines.by_ref() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(' ')
                .ok_or_else(|| err(i + 1, format!("bad header line `{line}`")))?;
            match key {
                "cat" => categories.push(value.to_string()),
                "params" => {
                    n_params = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| err(i + 1, format!("bad params count `{value}`")))?,
                    );
                    break;
                }
                _ => {
                    header.insert(key.to_string(), value.to_string());
                }
            }
        }
        let get_usize = |k: &str| -> Result<usize> {
            header
                .get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err(0, format!("missing or bad header `{k}`")))
        };
        let config = ModelConfig {
            hash_seed: header
                .get("hash_seed")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err(0, "missing hash_seed".into()))?,
            hash_dim: get_usize("hash_dim")?,
            embed_dim: get_usize("embed_dim")?,
            layers: get_usize("layers")?,
            heads: get_usize("heads")?,
            head_dim: get_usize("head_dim")?,
            predictor_hidden: get_usize("predictor_hidden")?,
            leaky_slope: header
                .get("leaky_slope")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err(0, "missing leaky_slope".into()))?,
        };
        let n_params = n_params.ok_or_else(|| err(0, "missing params line".into()))?;
        let layout = Layout::new(&config, categories.len());
        if layout.total != n_params {
            return Err(err(
                0,
                format!("layout expects {} params, file has {n_params}", layout.total),
            ));
        }
        let mut theta = Vec::with_capacity(n_params);
        for (i, raw) in lines {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            theta.push(
                line.parse::<f64>()
                    .map_err(|_| err(i + 1, format!("bad parameter `{line}`")))?,
            );
        }
        if theta.len() != n_params {
            return Err(err(0, format!("expected {n_params} params, got {}", theta.len())));
        }
        Ok(Self {
            config,
            categories,
            layout,
            theta,
        })
    }

    /// Checks this model was trained for the given ontology.
    pub fn matches_ontology(&self, ontology: &Ontology) -> bool {
        self.categories.len() == ontology.len()
            && self
                .categories
                .iter()
                .enumerate()
                .all(|(i, n)| ontology.name(crate::relation::CatId(i as u32)) == n)
    }
}

#[inline]
fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp() - 1.0
    }
}

#[inline]
fn elu_prime(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        x.exp()
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (1.0 + (-x.abs()).exp()).ln()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-head forward cache.
pub(crate) struct HeadFwd {
    pub z: Mat,
    pub pre: Vec<Vec<f64>>,
    pub alpha: Vec<Vec<f64>>,
    pub agg: Mat,
}

pub(crate) struct LayerFwd {
    pub input: Mat,
    pub heads: Vec<HeadFwd>,
}

/// Full forward cache for backpropagation.
pub(crate) struct Forward {
    pub neighborhoods: Vec<Vec<usize>>,
    pub layers: Vec<LayerFwd>,
    pub embeddings: Mat,
}

/// Sorted neighbor list of every node over positive edges, self included.
pub(crate) fn neighborhoods(graph: &RelationGraph) -> Vec<Vec<usize>> {
    (0..graph.node_count())
        .map(|v| {
            let mut nb: Vec<usize> = graph.neighbors(v).to_vec();
            let pos = nb.binary_search(&v).unwrap_or_else(|p| p);
            nb.insert(pos, v);
            nb
        })
        .collect()
}

pub(crate) fn forward_full(
    model: &LinkModel,
    graph: &RelationGraph,
    features: &Mat,
) -> Result<Forward> {
    let cfg = &model.config;
    let n = graph.node_count();
    if features.rows != n {
        return Err(Error::Shape(format!(
            "features have {} rows for a {n}-node graph",
            features.rows
        )));
    }
    if features.cols != cfg.input_dim() {
        return Err(Error::Shape(format!(
            "features have {} columns, model expects {}",
            features.cols,
            cfg.input_dim()
        )));
    }
    let nbrs = neighborhoods(graph);
    let mut layers = Vec::with_capacity(cfg.layers);
    let mut input = features.clone();
    for l in 0..cfg.layers {
        let in_dim = cfg.layer_in_dim(l);
        let d = cfg.head_dim;
        let last = l + 1 == cfg.layers;
        let mut heads = Vec::with_capacity(cfg.heads);
        let mut output = if last {
            Mat::zeros(n, d)
        } else {
            Mat::zeros(n, cfg.heads * d)
        };
        for h in 0..cfg.heads {
            let w = model.w(l, h);
            let a = model.attn(l, h);
            let (a_src, a_dst) = a.split_at(d);
            let mut z = Mat::zeros(n, d);
            for v in 0..n {
                let x = input.row(v);
                let zr = z.row_mut(v);
                for (i, zi) in zr.iter_mut().enumerate() {
                    *zi = dot(&w[i * in_dim..(i + 1) * in_dim], x);
                }
            }
            let s: Vec<f64> = (0..n).map(|v| dot(a_src, z.row(v))).collect();
            let t: Vec<f64> = (0..n).map(|v| dot(a_dst, z.row(v))).collect();
            let mut pre: Vec<Vec<f64>> = Vec::with_capacity(n);
            let mut alpha = Vec::with_capacity(n);
            let mut agg = Mat::zeros(n, d);
            for v in 0..n {
                let nb = &nbrs[v];
                let pre_v: Vec<f64> = nb
                    .iter()
                    .map(|&u| {
                        let x = s[v] + t[u];
                        if x > 0.0 {
                            x
                        } else {
                            cfg.leaky_slope * x
                        }
                    })
                    .collect();
                let m = pre_v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = pre_v.iter().map(|&e| (e - m).exp()).collect();
                let sum: f64 = exps.iter().sum();
                let alpha_v: Vec<f64> = exps.iter().map(|e| e / sum).collect();
                for (k, &u) in nb.iter().enumerate() {
                    let off = v * d;
                    for i in 0..d {
                        agg.data[off + i] += alpha_v[k] * z.row(u)[i];
                    }
                }
                pre.push(pre_v);
                alpha.push(alpha_v);
            }
            for v in 0..n {
                let agg_v = agg.row(v).to_vec();
                let out_row = output.row_mut(v);
                if last {
                    for i in 0..d {
                        out_row[i] += elu(agg_v[i]) / cfg.heads as f64;
                    }
                } else {
                    for i in 0..d {
                        out_row[h * d + i] = elu(agg_v[i]);
                    }
                }
            }
            heads.push(HeadFwd { z, pre, alpha, agg });
        }
        layers.push(LayerFwd {
            input: std::mem::replace(&mut input, output),
            heads,
        });
    }
    Ok(Forward {
        neighborhoods: nbrs,
        layers,
        embeddings: input,
    })
}

/// Node embeddings `h_v` for every graph node.
pub fn gat_forward(model: &LinkModel, graph: &RelationGraph, features: &Mat) -> Result<Mat> {
    Ok(forward_full(model, graph, features)?.embeddings)
}

pub(crate) struct PairFwd {
    pub r: Vec<f64>,
    pub q_pre: Vec<f64>,
    pub q: Vec<f64>,
    pub logit: f64,
}

pub(crate) fn predictor_forward(model: &LinkModel, hu: &[f64], hv: &[f64]) -> PairFwd {
    let cfg = &model.config;
    let fd = cfg.final_dim();
    let r: Vec<f64> = (0..fd).map(|i| hu[i] * hv[i]).collect();
    let w1 = model.pred_w1();
    let b1 = model.pred_b1();
    let q_pre: Vec<f64> = (0..cfg.predictor_hidden)
        .map(|j| dot(&w1[j * fd..(j + 1) * fd], &r) + b1[j])
        .collect();
    let q: Vec<f64> = q_pre.iter().map(|&x| elu(x)).collect();
    let logit = dot(model.pred_w2(), &q) + model.pred_b2();
    PairFwd { r, q_pre, q, logit }
}

/// Probability that an edge exists between two embedded nodes.
///
/// Symmetric in its arguments: the head consumes the elementwise product.
pub fn predict_link(model: &LinkModel, h_u: &[f64], h_v: &[f64]) -> Result<f64> {
    let fd = model.config.final_dim();
    if h_u.len() != fd || h_v.len() != fd {
        return Err(Error::Shape(format!(
            "embedding lengths {} and {}, model expects {fd}",
            h_u.len(),
            h_v.len()
        )));
    }
    Ok(sigmoid(predictor_forward(model, h_u, h_v).logit))
}

/// Loss and full analytic gradient of the mean binary cross entropy over a
/// batch of node pairs; the gradient vector matches the flat layout.
pub(crate) fn loss_and_grad(
    model: &LinkModel,
    graph: &RelationGraph,
    features: &Mat,
    batch: &[(usize, usize, f64)],
    compute_grad: bool,
) -> Result<(f64, Vec<f64>)> {
    let cfg = &model.config;
    let fwd = forward_full(model, graph, features)?;
    let h = &fwd.embeddings;
    let n = graph.node_count();
    let b = batch.len() as f64;
    let fd = cfg.final_dim();

    let mut loss = 0.0;
    let mut grad = vec![0.0; if compute_grad { model.layout.total } else { 0 }];
    let mut d_h = Mat::zeros(n, fd);
    for &(u, v, y) in batch {
        if u >= n || v >= n {
            return Err(Error::Shape(format!("pair ({u},{v}) outside {n}-node graph")));
        }
        let pf = predictor_forward(model, h.row(u), h.row(v));
        loss += softplus(pf.logit) - y * pf.logit;
        if !compute_grad {
            continue;
        }
        let g_logit = (sigmoid(pf.logit) - y) / b;
        let w1 = model.pred_w1();
        let w2 = model.pred_w2();
        grad[model.layout.pred_b2] += g_logit;
        for j in 0..cfg.predictor_hidden {
            grad[model.layout.pred_w2 + j] += g_logit * pf.q[j];
            let g_qpre = g_logit * w2[j] * elu_prime(pf.q_pre[j]);
            grad[model.layout.pred_b1 + j] += g_qpre;
            for i in 0..fd {
                grad[model.layout.pred_w1 + j * fd + i] += g_qpre * pf.r[i];
            }
            for i in 0..fd {
                let g_r = g_qpre * w1[j * fd + i];
                d_h.row_mut(u)[i] += g_r * h.row(v)[i];
                d_h.row_mut(v)[i] += g_r * h.row(u)[i];
            }
        }
    }
    loss /= b;
    if !compute_grad {
        return Ok((loss, grad));
    }

    // Backward through the attention layers, last to first.
    let mut upstream = d_h;
    for l in (0..cfg.layers).rev() {
        let layer = &fwd.layers[l];
        let last = l + 1 == cfg.layers;
        let d = cfg.head_dim;
        let in_dim = cfg.layer_in_dim(l);
        let mut d_input = Mat::zeros(n, in_dim);
        for hh in 0..cfg.heads {
            let head = &layer.heads[hh];
            let w = model.w(l, hh);
            let a = model.attn(l, hh);
            let (a_src, a_dst) = a.split_at(d);

            // dAgg via the head nonlinearity.
            let mut d_agg = Mat::zeros(n, d);
            for v in 0..n {
                let up = upstream.row(v);
                let agg_v = head.agg.row(v);
                let da = d_agg.row_mut(v);
                for i in 0..d {
                    let g = if last {
                        up[i] / cfg.heads as f64
                    } else {
                        up[hh * d + i]
                    };
                    da[i] = g * elu_prime(agg_v[i]);
                }
            }

            let mut d_z = Mat::zeros(n, d);
            let mut d_s = vec![0.0; n];
            let mut d_t = vec![0.0; n];
            for v in 0..n {
                let nb = &fwd.neighborhoods[v];
                let da_v = d_agg.row(v);
                let d_alpha: Vec<f64> = nb.iter().map(|&u| dot(da_v, head.z.row(u))).collect();
                let inner: f64 = head.alpha[v]
                    .iter()
                    .zip(&d_alpha)
                    .map(|(al, dal)| al * dal)
                    .sum();
                for (k, &u) in nb.iter().enumerate() {
                    let de = head.alpha[v][k] * (d_alpha[k] - inner);
                    let dpre = de
                        * if head.pre[v][k] > 0.0 {
                            1.0
                        } else {
                            cfg.leaky_slope
                        };
                    d_s[v] += dpre;
                    d_t[u] += dpre;
                    let zrow = d_z.row_mut(u);
                    for i in 0..d {
                        zrow[i] += head.alpha[v][k] * da_v[i];
                    }
                }
            }
            let a_off = model.layout.layer_a[l][hh];
            for v in 0..n {
                let zv = head.z.row(v);
                for i in 0..d {
                    grad[a_off + i] += d_s[v] * zv[i];
                    grad[a_off + d + i] += d_t[v] * zv[i];
                }
                let zrow = d_z.row_mut(v);
                for i in 0..d {
                    zrow[i] += d_s[v] * a_src[i] + d_t[v] * a_dst[i];
                }
            }
            let w_off = model.layout.layer_w[l][hh];
            for v in 0..n {
                let dz = d_z.row(v);
                let x = layer.input.row(v);
                for i in 0..d {
                    let g = dz[i];
                    if g == 0.0 {
                        continue;
                    }
                    let wrow = &w[i * in_dim..(i + 1) * in_dim];
                    for j in 0..in_dim {
                        grad[w_off + i * in_dim + j] += g * x[j];
                    }
                    let din = d_input.row_mut(v);
                    for j in 0..in_dim {
                        din[j] += g * wrow[j];
                    }
                }
            }
        }
        upstream = d_input;
    }

    // Input gradient lands in the learnable embedding columns.
    let hash_dim = cfg.hash_dim;
    for (v, &cat) in graph.nodes().iter().enumerate() {
        let din = upstream.row(v);
        let row = model.layout.embed + cat.0 as usize * cfg.embed_dim;
        for i in 0..cfg.embed_dim {
            grad[row + i] += din[hash_dim + i];
        }
    }
    Ok((loss, grad))
}
