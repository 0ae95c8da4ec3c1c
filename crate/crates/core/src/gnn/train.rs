//! Link-prediction training.
//!
//! Binary cross entropy over the graph's positive edges and uniformly
//! resampled absent pairs, minimized with adaptive-moment gradient descent.
//! A held-out share of positive edges (and matching absent pairs) is removed
//! from both the loss and the message-passing structure, so validation
//! accuracy measures generalization rather than memorization.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gnn::{
    forward_full, loss_and_grad, node_features, predictor_forward, sigmoid, LinkModel,
    ModelConfig,
};
use crate::relation::{CatId, Ontology, RelationGraph};

/// Trainer hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Negative samples drawn per positive edge each epoch.
    pub negative_ratio: usize,
    pub seed: u64,
    /// Fraction of positive edges kept for training; the rest are held out
    /// with matching absent pairs for validation.
    pub split: f64,
    /// Decoupled L2 shrinkage applied with each update.
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            epochs: 300,
            negative_ratio: 1,
            seed: 0,
            split: 0.8,
            weight_decay: 1e-3,
        }
    }
}

/// One point of the training curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStat {
    pub epoch: usize,
    pub loss: f64,
    /// Threshold-0.5 accuracy on that epoch's training batch.
    pub accuracy: f64,
}

/// Training artifacts: the model, its loss curve, and the held-out split.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LinkModel,
    pub curve: Vec<EpochStat>,
    /// Graph used for message passing (training positives only).
    pub train_graph: RelationGraph,
    /// Held-out labeled pairs; empty when the split leaves no validation.
    pub val_pairs: Vec<(CatId, CatId, bool)>,
    pub val_accuracy: Option<f64>,
}

/// Labeled node-pair batch in graph-local indices.
#[derive(Debug, Clone, Default)]
pub struct Batch(pub Vec<(usize, usize, f64)>);

fn adam_step(
    theta: &mut [f64],
    grad: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: usize,
    lr: f64,
    weight_decay: f64,
) {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;
    let bc1 = 1.0 - B1.powi(t as i32);
    let bc2 = 1.0 - B2.powi(t as i32);
    for i in 0..theta.len() {
        m[i] = B1 * m[i] + (1.0 - B1) * grad[i];
        v[i] = B2 * v[i] + (1.0 - B2) * grad[i] * grad[i];
        let mh = m[i] / bc1;
        let vh = v[i] / bc2;
        theta[i] -= lr * (mh / (vh.sqrt() + EPS) + weight_decay * theta[i]);
    }
}

/// All unordered node pairs of `graph` without a positive label.
fn absent_pairs(graph: &RelationGraph) -> Vec<(usize, usize)> {
    let n = graph.node_count();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if !graph.label(graph.nodes()[i], graph.nodes()[j]) {
                out.push((i, j));
            }
        }
    }
    out
}

fn shuffled<T: Copy>(items: &[T], rng: &mut ChaCha8Rng) -> Vec<T> {
    use rand::seq::SliceRandom;
    let mut v = items.to_vec();
    v.shuffle(rng);
    v
}

/// Trains a link predictor on the graph's co-occurrence structure.
///
/// Deterministic given the seed. Fails when the graph has no positive edge,
/// no absent pair, or the loss stops being finite.
pub fn train(
    graph: &RelationGraph,
    ontology: &Ontology,
    model_cfg: ModelConfig,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if cfg.learning_rate <= 0.0 {
        return Err(Error::Train("learning rate must be > 0".into()));
    }
    if cfg.negative_ratio < 1 {
        return Err(Error::Train("negative ratio must be ≥ 1".into()));
    }
    if !(cfg.split > 0.0 && cfg.split < 1.0) {
        return Err(Error::Train("split must lie in (0, 1)".into()));
    }
    let positives = graph.positive_pairs();
    if positives.is_empty() {
        return Err(Error::Train("no positive edges".into()));
    }
    let absents = absent_pairs(graph);
    if absents.is_empty() {
        return Err(Error::Train("no absent pairs to sample negatives from".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let positives = shuffled(&positives, &mut rng);
    let n_val = ((1.0 - cfg.split) * positives.len() as f64).floor() as usize;
    let n_val = n_val.min(positives.len() - 1);
    let (train_pos, val_pos) = positives.split_at(positives.len() - n_val);

    let absents = shuffled(&absents, &mut rng);
    let n_val_neg = n_val.min(absents.len().saturating_sub(1));
    let (val_neg, train_absent) = absents.split_at(n_val_neg);

    // Message passing sees only training edges.
    let mut train_graph = RelationGraph::new(graph.nodes().to_vec());
    for &(i, j) in train_pos {
        let count = graph
            .edge(graph.nodes()[i], graph.nodes()[j])
            .map(|e| e.count)
            .unwrap_or(1);
        train_graph.set_edge(graph.nodes()[i], graph.nodes()[j], true, count);
    }

    let mut model = LinkModel::new(model_cfg, ontology, cfg.seed);
    let mut m = vec![0.0; model.param_count()];
    let mut v = vec![0.0; model.param_count()];
    let mut curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut batch: Vec<(usize, usize, f64)> = train_pos
            .iter()
            .map(|&(i, j)| (i, j, 1.0))
            .collect();
        for _ in 0..train_pos.len() * cfg.negative_ratio {
            let (i, j) = train_absent[rng.random_range(0..train_absent.len())];
            batch.push((i, j, 0.0));
        }
        // Features depend on the embedding table, so rebuild per epoch.
        let features = node_features(&model, train_graph.nodes())?;
        let (batch_loss, grad) = loss_and_grad(&model, &train_graph, &features, &batch, true)?;
        if !batch_loss.is_finite() {
            return Err(Error::Train(format!("loss diverged at epoch {epoch}")));
        }
        // The curve records the expected epoch loss: positives plus every
        // absent pair, the latter weighted to match the sampling rate. This
        // keeps the curve free of batch-composition noise.
        let (loss, accuracy) = expected_loss(
            &model,
            &train_graph,
            &features,
            train_pos,
            train_absent,
            cfg.negative_ratio,
        )?;
        adam_step(
            model.theta_mut(),
            &grad,
            &mut m,
            &mut v,
            epoch + 1,
            cfg.learning_rate,
            cfg.weight_decay,
        );
        curve.push(EpochStat {
            epoch,
            loss,
            accuracy,
        });
    }
    let val_pairs: Vec<(CatId, CatId, bool)> = val_pos
        .iter()
        .map(|&(i, j)| (graph.nodes()[i], graph.nodes()[j], true))
        .chain(
            val_neg
                .iter()
                .map(|&(i, j)| (graph.nodes()[i], graph.nodes()[j], false)),
        )
        .collect();
    let val_accuracy = if val_pairs.is_empty() {
        None
    } else {
        Some(eval_link_accuracy(&model, &train_graph, &val_pairs)?)
    };
    Ok(TrainOutcome {
        model,
        curve,
        train_graph,
        val_pairs,
        val_accuracy,
    })
}

fn expected_loss(
    model: &LinkModel,
    graph: &RelationGraph,
    features: &crate::gnn::Mat,
    positives: &[(usize, usize)],
    absents: &[(usize, usize)],
    negative_ratio: usize,
) -> Result<(f64, f64)> {
    let fwd = forward_full(model, graph, features)?;
    let h = &fwd.embeddings;
    let neg_weight = (positives.len() * negative_ratio) as f64 / absents.len() as f64;
    let total_weight = (positives.len() + positives.len() * negative_ratio) as f64;
    let mut loss = 0.0;
    let mut hits = 0.0;
    for &(u, v) in positives {
        let pf = predictor_forward(model, h.row(u), h.row(v));
        loss += crate::gnn::softplus(pf.logit) - pf.logit;
        if sigmoid(pf.logit) > 0.5 {
            hits += 1.0;
        }
    }
    for &(u, v) in absents {
        let pf = predictor_forward(model, h.row(u), h.row(v));
        loss += neg_weight * crate::gnn::softplus(pf.logit);
        if sigmoid(pf.logit) <= 0.5 {
            hits += neg_weight;
        }
    }
    Ok((loss / total_weight, hits / total_weight))
}

/// Fraction of labeled pairs classified correctly at threshold 0.5.
///
/// A probability of exactly 0.5 classifies as negative.
pub fn eval_link_accuracy(
    model: &LinkModel,
    graph: &RelationGraph,
    pairs: &[(CatId, CatId, bool)],
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Invalid("test pairs must be non-empty".into()));
    }
    let features = node_features(model, graph.nodes())?;
    let h = crate::gnn::gat_forward(model, graph, &features)?;
    let mut correct = 0usize;
    for &(u, v, label) in pairs {
        let iu = graph
            .node_index(u)
            .ok_or_else(|| Error::UnknownCategory(format!("{u}")))?;
        let iv = graph
            .node_index(v)
            .ok_or_else(|| Error::UnknownCategory(format!("{v}")))?;
        let p = sigmoid(predictor_forward(model, h.row(iu), h.row(iv)).logit);
        if (p > 0.5) == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / pairs.len() as f64)
}

/// Writes the loss curve as `epoch,loss,accuracy` CSV.
pub fn curve_to_csv(curve: &[EpochStat]) -> String {
    let mut out = String::from("epoch,loss,accuracy\n");
    for s in curve {
        out.push_str(&format!("{},{},{}\n", s.epoch, s.loss, s.accuracy));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::predict_link;

    fn tiny_cfg() -> ModelConfig {
        ModelConfig {
            hash_dim: 16,
            embed_dim: 8,
            layers: 2,
            heads: 2,
            head_dim: 8,
            predictor_hidden: 16,
            ..ModelConfig::default()
        }
    }

    /// 6-node planted graph: a 5-edge star-plus-path structure.
    fn planted() -> (RelationGraph, Ontology) {
        let mut onto = Ontology::new();
        for n in ["na", "nb", "nc", "nd", "ne", "nf"] {
            onto.intern(n).unwrap();
        }
        let mut g = RelationGraph::new(onto.ids().collect());
        let id = |n: &str| onto.id(n).unwrap();
        for (a, b) in [("na", "nb"), ("na", "nc"), ("nb", "nc"), ("nd", "ne"), ("ne", "nf")] {
            g.set_edge(id(a), id(b), true, 10);
        }
        (g, onto)
    }

    #[test]
    fn overfit_reaches_perfect_training_accuracy() {
        let (graph, onto) = planted();
        let cfg = TrainConfig {
            epochs: 500,
            split: 0.99,
            seed: 1,
            negative_ratio: 2,
            ..TrainConfig::default()
        };
        let out = train(&graph, &onto, tiny_cfg(), &cfg).unwrap();
        // Brute-force evaluation over all 15 pairs of the full graph.
        let pairs: Vec<(CatId, CatId, bool)> = {
            let nodes = graph.nodes();
            let mut v = Vec::new();
            for i in 0..nodes.len() {
                for j in (i + 1)..nodes.len() {
                    v.push((nodes[i], nodes[j], graph.label(nodes[i], nodes[j])));
                }
            }
            v
        };
        let acc = eval_link_accuracy(&out.model, &out.train_graph, &pairs).unwrap();
        assert_eq!(acc, 1.0, "training link accuracy at threshold 0.5");
    }

    #[test]
    fn trained_model_orders_edge_above_non_edge() {
        let (graph, onto) = planted();
        let cfg = TrainConfig {
            epochs: 500,
            split: 0.99,
            seed: 1,
            negative_ratio: 2,
            ..TrainConfig::default()
        };
        let out = train(&graph, &onto, tiny_cfg(), &cfg).unwrap();
        let features = node_features(&out.model, out.train_graph.nodes()).unwrap();
        let h = crate::gnn::gat_forward(&out.model, &out.train_graph, &features).unwrap();
        let idx = |n: &str| out.train_graph.node_index(onto.id(n).unwrap()).unwrap();
        let p_edge = predict_link(&out.model, h.row(idx("na")), h.row(idx("nb"))).unwrap();
        let p_absent = predict_link(&out.model, h.row(idx("na")), h.row(idx("nf"))).unwrap();
        assert!(
            p_edge > p_absent,
            "edge pair {p_edge} should beat non-edge pair {p_absent}"
        );
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let (graph, onto) = planted();
        let cfg = TrainConfig {
            epochs: 60,
            seed: 42,
            ..TrainConfig::default()
        };
        let a = train(&graph, &onto, tiny_cfg(), &cfg).unwrap();
        let b = train(&graph, &onto, tiny_cfg(), &cfg).unwrap();
        assert_eq!(a.curve.last().unwrap().loss, b.curve.last().unwrap().loss);
        assert_eq!(a.model.to_text(), b.model.to_text());
    }

    #[test]
    fn complete_graph_has_no_negatives_and_errors() {
        let mut onto = Ontology::new();
        for n in ["x1", "x2", "x3"] {
            onto.intern(n).unwrap();
        }
        let mut g = RelationGraph::new(onto.ids().collect());
        let ids: Vec<CatId> = onto.ids().collect();
        for i in 0..ids.len() {
            for j in (i + 1)..ids.len() {
                g.set_edge(ids[i], ids[j], true, 10);
            }
        }
        let err = train(&g, &onto, tiny_cfg(), &TrainConfig::default()).unwrap_err();
        assert!(err.to_string().contains("absent"));
    }

    #[test]
    fn empty_graph_errors_with_no_positive_edges() {
        let mut onto = Ontology::new();
        onto.intern("x1").unwrap();
        onto.intern("x2").unwrap();
        let g = RelationGraph::new(onto.ids().collect());
        let err = train(&g, &onto, tiny_cfg(), &TrainConfig::default()).unwrap_err();
        assert!(err.to_string().contains("no positive edges"));
    }

    #[test]
    fn loss_trends_down_over_windows() {
        let (graph, onto) = planted();
        let cfg = TrainConfig {
            epochs: 500,
            split: 0.99,
            seed: 1,
            negative_ratio: 2,
            ..TrainConfig::default()
        };
        let out = train(&graph, &onto, tiny_cfg(), &cfg).unwrap();
        for i in 0..out.curve.len().saturating_sub(50) {
            let a = out.curve[i].loss;
            let b = out.curve[i + 50].loss;
            assert!(
                b <= a + 0.05,
                "loss rose over window [{i}, {}]: {a} -> {b}",
                i + 50
            );
        }
    }

    #[test]
    fn eval_accuracy_degenerate_cases() {
        let (graph, onto) = planted();
        let cfg = TrainConfig {
            epochs: 150,
            split: 0.99,
            seed: 1,
            ..TrainConfig::default()
        };
        let out = train(&graph, &onto, tiny_cfg(), &cfg).unwrap();
        let id = |n: &str| onto.id(n).unwrap();
        // All pairs labeled positive and predicted high: accuracy 1.0.
        let pos_pairs = vec![
            (id("na"), id("nb"), true),
            (id("nb"), id("nc"), true),
        ];
        let acc = eval_link_accuracy(&out.model, &out.train_graph, &pos_pairs).unwrap();
        assert_eq!(acc, 1.0);
        assert!(eval_link_accuracy(&out.model, &out.train_graph, &[]).is_err());
    }

    #[test]
    fn balanced_pairs_with_constant_output_score_half() {
        // Listing each pair under both labels makes any fixed prediction
        // score exactly 0.5 on the balanced set.
        let (graph, onto) = planted();
        let model = LinkModel::new(tiny_cfg(), &onto, 3);
        let id = |n: &str| onto.id(n).unwrap();
        let pairs = vec![
            (id("na"), id("nb"), true),
            (id("na"), id("nb"), false),
            (id("nd"), id("nf"), true),
            (id("nd"), id("nf"), false),
        ];
        let acc = eval_link_accuracy(&model, &graph, &pairs).unwrap();
        assert_eq!(acc, 0.5);
    }
}
