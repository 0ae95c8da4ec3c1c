//! Finite-difference verification of the hand-derived gradients.

use crate::error::{Error, Result};
use crate::gnn::{loss_and_grad, node_features, Batch, LinkModel, RelationGraph};

/// Central step used by the acceptance checks.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Compares the analytic gradient of the batch loss against central finite
/// differences for every parameter; returns the maximum relative error.
///
/// Relative error is `|a - n| / max(|a| + |n|, 1e-5)`, which keeps
/// finite-difference noise on near-zero gradients from dominating.
pub fn gradient_check(
    model: &LinkModel,
    graph: &RelationGraph,
    batch: &Batch,
    step: f64,
) -> Result<f64> {
    if batch.0.is_empty() {
        return Err(Error::Invalid("gradient check needs a non-empty batch".into()));
    }
    let features = node_features(model, graph.nodes())?;
    let (_, analytic) = loss_and_grad(model, graph, &features, &batch.0, true)?;

    let mut probe = model.clone();
    let mut max_rel = 0.0f64;
    for i in 0..probe.param_count() {
        let original = probe.theta()[i];
        probe.theta_mut()[i] = original + step;
        let features = node_features(&probe, graph.nodes())?;
        let (lp, _) = loss_and_grad(&probe, graph, &features, &batch.0, false)?;
        probe.theta_mut()[i] = original - step;
        let features = node_features(&probe, graph.nodes())?;
        let (lm, _) = loss_and_grad(&probe, graph, &features, &batch.0, false)?;
        probe.theta_mut()[i] = original;
        let numeric = (lp - lm) / (2.0 * step);
        let rel = (analytic[i] - numeric).abs() / (analytic[i].abs() + numeric.abs()).max(1e-5);
        if rel > max_rel {
            max_rel = rel;
        }
    }
    Ok(max_rel)
}

/// Analytic gradient vector of the batch loss, exposed for the
/// stationary-point check.
pub fn analytic_gradient(
    model: &LinkModel,
    graph: &RelationGraph,
    batch: &Batch,
) -> Result<Vec<f64>> {
    let features = node_features(model, graph.nodes())?;
    let (_, grad) = loss_and_grad(model, graph, &features, &batch.0, true)?;
    Ok(grad)
}
