//! Iterative object search.
//!
//! The search loop ranks known objects by predicted co-occurrence with the
//! target, walks to the best candidate's surrounding area, and scans. Every
//! detection feeds back into the episode's working graph, so later rankings
//! use relationships observed in this very household. Baseline policies
//! (random walk, frontier exploration, ground-truth-edge oracle) share the
//! same action budget and success rule.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gnn::{gat_forward, node_features, predict_link, LinkModel};
use crate::relation::{label_edge, CatId, Ontology, RelationGraph, DISTANCE_THRESHOLD_M};
use crate::world::{
    cells_within, detect, plan_path, shortest_path_length, visible_cells, Action, Cell,
    Detection, DetectorConfig, GridWorld, Point, RobotState,
};

/// Episode parameters shared by every policy.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Primitive-action budget per episode.
    pub step_limit: usize,
    pub detector: DetectorConfig,
    /// Success and "surrounding area" radius in meters.
    pub success_radius_m: f64,
    /// Re-rank mid-leg when a new object is detected.
    pub rerank_per_detection: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            step_limit: 400,
            detector: DetectorConfig::default(),
            success_radius_m: DISTANCE_THRESHOLD_M,
            rerank_per_detection: false,
        }
    }
}

/// Search policy selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Policy {
    Gnn,
    Random,
    FrontierGreedy,
    Oracle,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Policy::Gnn => "gnn",
            Policy::Random => "random",
            Policy::FrontierGreedy => "frontier",
            Policy::Oracle => "oracle",
        };
        f.pad(s)
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gnn" => Ok(Policy::Gnn),
            "random" => Ok(Policy::Random),
            "frontier" | "frontier_greedy" => Ok(Policy::FrontierGreedy),
            "oracle" => Ok(Policy::Oracle),
            other => Err(Error::Invalid(format!("unknown policy `{other}`"))),
        }
    }
}

/// An object the episode knows about, with its best position estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownObject {
    pub cat: CatId,
    pub position: Point,
    pub stationary: bool,
    pub receptacle_with: Option<CatId>,
}

/// Mutable per-episode search knowledge.
#[derive(Debug, Clone)]
pub struct SearchState {
    /// Working copy of the relationship graph, updated from detections.
    pub graph: RelationGraph,
    /// Known objects: stationary map knowledge plus detected movables.
    pub known: Vec<KnownObject>,
    /// Candidates already searched this episode.
    pub visited: BTreeSet<CatId>,
    pub steps_used: usize,
}

impl SearchState {
    /// Initial state: the stationary objects are known with true positions,
    /// the working graph holds their pairwise geometric labels plus the
    /// (positionless) target node.
    pub fn new(world: &GridWorld) -> Self {
        let mut known: Vec<KnownObject> = world
            .stationary
            .iter()
            .map(|s| KnownObject {
                cat: s.cat,
                position: s.position,
                stationary: true,
                receptacle_with: None,
            })
            .collect();
        known.sort_by_key(|k| k.cat);
        known.dedup_by_key(|k| k.cat);
        let mut graph = RelationGraph::new(known.iter().map(|k| k.cat).collect());
        graph.add_node(world.target);
        for i in 0..known.len() {
            for j in (i + 1)..known.len() {
                if label_edge(known[i].position, known[j].position, false) {
                    graph.set_edge(known[i].cat, known[j].cat, true, 1);
                }
            }
        }
        Self {
            graph,
            known,
            visited: BTreeSet::new(),
            steps_used: 0,
        }
    }

    pub fn known_position(&self, cat: CatId) -> Option<Point> {
        self.known.iter().find(|k| k.cat == cat).map(|k| k.position)
    }
}

/// Folds detections into the working graph and known-object set.
///
/// Newly detected movables become known objects; repeated detections update
/// the stored estimate to the latest value. Every pair among known objects
/// is then labeled by the geometric rule over estimated positions and the
/// detected receptacle flags. Returns the edge records inserted or upgraded
/// by this call.
pub fn update_graph(
    state: &mut SearchState,
    detections: &[Detection],
) -> Vec<(CatId, CatId, bool)> {
    for d in detections {
        state.graph.add_node(d.cat);
        match state.known.iter_mut().find(|k| k.cat == d.cat) {
            Some(k) if !k.stationary => {
                k.position = d.position;
                k.receptacle_with = d.receptacle_with.or(k.receptacle_with);
            }
            Some(_) => {}
            None => state.known.push(KnownObject {
                cat: d.cat,
                position: d.position,
                stationary: false,
                receptacle_with: d.receptacle_with,
            }),
        }
    }
    let mut added = Vec::new();
    for i in 0..state.known.len() {
        for j in (i + 1)..state.known.len() {
            let (a, b) = (state.known[i], state.known[j]);
            let receptacle =
                a.receptacle_with == Some(b.cat) || b.receptacle_with == Some(a.cat);
            let label = label_edge(a.position, b.position, receptacle);
            let before = state.graph.edge(a.cat, b.cat);
            let already_positive = before.map(|e| e.label).unwrap_or(false);
            state.graph.set_edge(a.cat, b.cat, label, 1);
            if before.is_none() || (label && !already_positive) {
                added.push((a.cat.min(b.cat), a.cat.max(b.cat), label || already_positive));
            }
        }
    }
    added
}

/// Ranks unvisited known objects by predicted link probability with the
/// target, descending; ties break by ascending category name.
pub fn rank_candidates(
    model: &LinkModel,
    state: &SearchState,
    target: CatId,
    ontology: &Ontology,
) -> Result<Vec<(CatId, f64)>> {
    let candidates: Vec<CatId> = state
        .known
        .iter()
        .map(|k| k.cat)
        .filter(|&c| c != target && !state.visited.contains(&c))
        .collect();
    if candidates.is_empty() {
        return Err(Error::Exhausted);
    }
    let features = node_features(model, state.graph.nodes())?;
    let h = gat_forward(model, &state.graph, &features)?;
    let target_row = state
        .graph
        .node_index(target)
        .ok_or_else(|| Error::Invalid("target missing from working graph".into()))?;
    let mut ranked: Vec<(CatId, f64)> = candidates
        .into_iter()
        .map(|c| {
            let row = state.graph.node_index(c).expect("known object in graph");
            let p = predict_link(model, h.row(target_row), h.row(row))?;
            Ok((c, p))
        })
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then_with(|| ontology.name(a.0).cmp(ontology.name(b.0)))
    });
    Ok(ranked)
}

/// Ranks candidates by ground-truth edge labels: label-1 neighbors of the
/// target first, same tie-break as the learned ranking.
fn rank_by_ground_truth(
    gt: &RelationGraph,
    state: &SearchState,
    target: CatId,
    ontology: &Ontology,
) -> Result<Vec<(CatId, f64)>> {
    let mut ranked: Vec<(CatId, f64)> = state
        .known
        .iter()
        .map(|k| k.cat)
        .filter(|&c| c != target && !state.visited.contains(&c))
        .map(|c| (c, if gt.label(target, c) { 1.0 } else { 0.0 }))
        .collect();
    if ranked.is_empty() {
        return Err(Error::Exhausted);
    }
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then_with(|| ontology.name(a.0).cmp(ontology.name(b.0)))
    });
    Ok(ranked)
}

/// One executed primitive action with everything observed after it.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub action: Action,
    /// Robot state after the action.
    pub state: RobotState,
    pub blocked: bool,
    pub detections: Vec<Detection>,
    /// Edge records inserted into the working graph at this step.
    pub edges_added: Vec<(CatId, CatId, bool)>,
}

/// Outcome of one search episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub success: bool,
    /// Actions taken (equals the trace length).
    pub path_len: usize,
    /// Minimum actions from the start to the target's success region.
    pub shortest_len: Option<usize>,
    pub trace: Vec<TraceStep>,
    pub candidates_tried: Vec<CatId>,
}

impl EpisodeResult {
    /// Re-checks the success predicate from the trace alone: the target was
    /// detected at some step and the final pose lies inside the success
    /// region around the target's true position.
    pub fn success_consistent(&self, world: &GridWorld, radius_m: f64) -> bool {
        if !self.success {
            return true;
        }
        let detected = self
            .trace
            .iter()
            .any(|s| s.detections.iter().any(|d| d.cat == world.target));
        let last = match self.trace.last() {
            Some(s) => s.state,
            None => return false,
        };
        let truth = world.target_object().position;
        detected && last.position().dist(truth) < radius_m
    }
}

enum Ranker<'a> {
    Model(&'a LinkModel),
    GroundTruth(&'a RelationGraph),
}

struct Episode<'a> {
    world: &'a GridWorld,
    cfg: &'a SearchConfig,
    rng: ChaCha8Rng,
    robot: RobotState,
    state: SearchState,
    trace: Vec<TraceStep>,
    candidates_tried: Vec<CatId>,
    target_seen: bool,
    done: bool,
    success: bool,
}

impl<'a> Episode<'a> {
    fn new(world: &'a GridWorld, cfg: &'a SearchConfig, policy_salt: u64) -> Self {
        let seed = world
            .seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(policy_salt);
        Self {
            world,
            cfg,
            rng: ChaCha8Rng::seed_from_u64(seed),
            robot: world.start,
            state: SearchState::new(world),
            trace: Vec::new(),
            candidates_tried: Vec::new(),
            target_seen: false,
            done: cfg.step_limit == 0,
            success: false,
        }
    }

    fn budget_left(&self) -> bool {
        self.state.steps_used < self.cfg.step_limit
    }

    /// Executes one primitive action, then detects and updates. Sets the
    /// done flag on success or an exhausted budget.
    fn act(&mut self, action: Action) {
        debug_assert!(!self.done && self.budget_left());
        let (next, blocked) = self.world.step(self.robot, action);
        self.robot = next;
        self.state.steps_used += 1;
        let detections = detect(self.world, self.robot, &self.cfg.detector, &mut self.rng);
        if detections.iter().any(|d| d.cat == self.world.target) {
            self.target_seen = true;
        }
        let edges_added = update_graph(&mut self.state, &detections);
        self.trace.push(TraceStep {
            action,
            state: self.robot,
            blocked,
            detections,
            edges_added,
        });
        if self.target_seen {
            let truth = self.world.target_object().position;
            if self.robot.position().dist(truth) < self.cfg.success_radius_m {
                self.success = true;
                self.done = true;
                return;
            }
        }
        if !self.budget_left() {
            self.done = true;
        }
    }

    fn run_leg(&mut self, actions: &[Action], abort_on_new_object: bool) {
        for &a in actions {
            if self.done {
                return;
            }
            let known_before = self.state.known.len();
            self.act(a);
            if abort_on_new_object && self.state.known.len() > known_before {
                return;
            }
        }
    }

    /// Full in-place scan: one complete revolution of left rotations.
    fn scan(&mut self) {
        for _ in 0..8 {
            if self.done {
                return;
            }
            self.act(Action::RotateLeft);
        }
    }

    fn finish(self) -> EpisodeResult {
        let region = cells_within(
            self.world,
            self.world.target_object().position,
            self.cfg.success_radius_m,
        );
        let shortest = shortest_path_length(self.world, self.world.start, &region);
        EpisodeResult {
            success: self.success,
            path_len: self.state.steps_used,
            shortest_len: shortest,
            trace: self.trace,
            candidates_tried: self.candidates_tried,
        }
    }
}

fn candidate_loop(
    mut ep: Episode<'_>,
    ranker: Ranker<'_>,
    ontology: &Ontology,
) -> Result<EpisodeResult> {
    while !ep.done {
        if ep.target_seen {
            // Final approach: walk into the success region around the
            // latest estimate, leaving headroom for estimation noise.
            let est = ep
                .state
                .known_position(ep.world.target)
                .expect("detected target is known");
            let radius = (ep.cfg.success_radius_m - ep.cfg.detector.noise_m).max(0.1);
            let region = cells_within(ep.world, est, radius);
            match plan_path(ep.world, ep.robot, &region) {
                Some(path) if !path.is_empty() => {
                    ep.run_leg(&path, false);
                }
                _ => {
                    // Nothing to walk; burn one action re-observing.
                    ep.act(Action::RotateLeft);
                }
            }
            continue;
        }
        let ranked = match &ranker {
            Ranker::Model(model) => rank_candidates(model, &ep.state, ep.world.target, ontology),
            Ranker::GroundTruth(gt) => {
                rank_by_ground_truth(gt, &ep.state, ep.world.target, ontology)
            }
        };
        let top = match ranked {
            Ok(list) => list[0].0,
            Err(Error::Exhausted) => {
                // Everything known was tried; keep observing until the
                // budget runs out or a new candidate appears.
                ep.act(Action::RotateLeft);
                continue;
            }
            Err(e) => return Err(e),
        };
        let position = ep
            .state
            .known_position(top)
            .expect("ranked candidate is known");
        let region = cells_within(ep.world, position, ep.cfg.success_radius_m);
        let path = if region.is_empty() {
            None
        } else {
            plan_path(ep.world, ep.robot, &region)
        };
        match path {
            None => {
                // Unreachable area: counted as tried, costs nothing.
                ep.candidates_tried.push(top);
                ep.state.visited.insert(top);
            }
            Some(path) => {
                let known_before = ep.state.known.len();
                ep.run_leg(&path, ep.cfg.rerank_per_detection);
                if ep.done {
                    break;
                }
                if ep.cfg.rerank_per_detection && ep.state.known.len() > known_before {
                    // A new object appeared mid-leg; re-rank before
                    // committing to this candidate.
                    continue;
                }
                ep.scan();
                ep.candidates_tried.push(top);
                ep.state.visited.insert(top);
            }
        }
    }
    Ok(ep.finish())
}

/// Runs the learned-ranking search loop.
pub fn gnn_search(
    world: &GridWorld,
    model: &LinkModel,
    ontology: &Ontology,
    cfg: &SearchConfig,
) -> Result<EpisodeResult> {
    candidate_loop(Episode::new(world, cfg, 1), Ranker::Model(model), ontology)
}

fn random_search(world: &GridWorld, cfg: &SearchConfig) -> EpisodeResult {
    let mut ep = Episode::new(world, cfg, 2);
    while !ep.done {
        let (_, would_block) = world.step(ep.robot, Action::MoveAhead);
        let feasible: &[Action] = if would_block {
            &[Action::RotateLeft, Action::RotateRight]
        } else {
            &[Action::MoveAhead, Action::RotateLeft, Action::RotateRight]
        };
        let action = feasible[ep.rng.random_range(0..feasible.len())];
        ep.act(action);
    }
    ep.finish()
}

fn frontier_search(world: &GridWorld, cfg: &SearchConfig) -> EpisodeResult {
    let mut ep = Episode::new(world, cfg, 3);
    let mut observed: BTreeSet<Cell> = BTreeSet::new();
    observed.insert(ep.robot.cell);
    let mut unreachable: BTreeSet<Cell> = BTreeSet::new();
    while !ep.done {
        if ep.target_seen {
            let est = ep
                .state
                .known_position(world.target)
                .expect("detected target is known");
            let radius = (cfg.success_radius_m - cfg.detector.noise_m).max(0.1);
            let region = cells_within(world, est, radius);
            match plan_path(world, ep.robot, &region) {
                Some(path) if !path.is_empty() => {
                    for &a in &path {
                        if ep.done {
                            break;
                        }
                        ep.act(a);
                        observed.extend(visible_cells(world, ep.robot, &cfg.detector));
                    }
                }
                _ => {
                    ep.act(Action::RotateLeft);
                    observed.extend(visible_cells(world, ep.robot, &cfg.detector));
                }
            }
            continue;
        }
        let frontier: Vec<Cell> = world
            .free_cells()
            .filter(|c| !observed.contains(c) && !unreachable.contains(c))
            .collect();
        if frontier.is_empty() {
            break; // fully observed, nothing left to explore
        }
        let path = match plan_path(world, ep.robot, &frontier) {
            Some(p) => p,
            None => {
                unreachable.extend(frontier);
                continue;
            }
        };
        if path.is_empty() {
            observed.insert(ep.robot.cell);
            ep.act(Action::RotateLeft);
            observed.extend(visible_cells(world, ep.robot, &cfg.detector));
            continue;
        }
        for &a in &path {
            if ep.done || ep.target_seen {
                break;
            }
            ep.act(a);
            observed.extend(visible_cells(world, ep.robot, &cfg.detector));
        }
    }
    ep.finish()
}

/// Runs a baseline policy under the same budget and success rule as
/// [`gnn_search`]. The oracle variant needs the ground-truth graph.
pub fn baseline_search(
    world: &GridWorld,
    policy: Policy,
    gt: Option<&RelationGraph>,
    ontology: &Ontology,
    cfg: &SearchConfig,
) -> Result<EpisodeResult> {
    match policy {
        Policy::Random => Ok(random_search(world, cfg)),
        Policy::FrontierGreedy => Ok(frontier_search(world, cfg)),
        Policy::Oracle => {
            let gt = gt.ok_or_else(|| {
                Error::Invalid("oracle policy needs the ground-truth graph".into())
            })?;
            candidate_loop(
                Episode::new(world, cfg, 4),
                Ranker::GroundTruth(gt),
                ontology,
            )
        }
        Policy::Gnn => Err(Error::Invalid(
            "gnn policy runs through gnn_search with a trained model".into(),
        )),
    }
}

/// Fraction of successful episodes.
pub fn success_rate(results: &[EpisodeResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::Invalid("success rate of an empty result set".into()));
    }
    let s = results.iter().filter(|r| r.success).count();
    Ok(s as f64 / results.len() as f64)
}

/// Per-episode term of the path-length-weighted success metric.
pub fn spl_term(r: &EpisodeResult) -> Result<f64> {
    if !r.success {
        return Ok(0.0);
    }
    let l = match r.shortest_len {
        Some(l) => l,
        None => {
            return Err(Error::Invalid(
                "successful episode with unreachable shortest path".into(),
            ))
        }
    };
    if l == 0 || r.path_len == 0 {
        return Err(Error::Invalid(
            "successful episode needs p ≥ 1 and l ≥ 1".into(),
        ));
    }
    Ok(l as f64 / r.path_len.max(l) as f64)
}

/// Mean of `S · l / max(p, l)` over the episodes.
pub fn spl(results: &[EpisodeResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::Invalid("SPL of an empty result set".into()));
    }
    let mut total = 0.0;
    for r in results {
        total += spl_term(r)?;
    }
    Ok(total / results.len() as f64)
}

/// Serializes an episode as a line-delimited replayable trace.
///
/// `S` lines carry (action, pose, blocked), `D` lines the detections after
/// that action, `E` lines the working-graph edge records added. Float
/// fields print in exponent form, which round-trips `f64` exactly.
pub fn trace_to_text(
    result: &EpisodeResult,
    world: &GridWorld,
    policy: Policy,
    limit: usize,
    ontology: &Ontology,
) -> String {
    let mut out = String::from("# cosearch trace v1\n");
    out.push_str(&format!("policy {policy}\n"));
    out.push_str(&format!("world_seed {}\n", world.seed));
    out.push_str(&format!("target {}\n", ontology.name(world.target)));
    out.push_str(&format!("limit {limit}\n"));
    out.push_str(&format!("success {}\n", u8::from(result.success)));
    out.push_str(&format!("p {}\n", result.path_len));
    match result.shortest_len {
        Some(l) => out.push_str(&format!("l {l}\n")),
        None => out.push_str("l -\n"),
    }
    let tried: Vec<&str> = result
        .candidates_tried
        .iter()
        .map(|&c| ontology.name(c))
        .collect();
    out.push_str(&format!("candidates {}\n", tried.join(";")));
    for step in &result.trace {
        out.push_str(&format!(
            "S {} {} {} {} {}\n",
            step.action,
            step.state.cell.col,
            step.state.cell.row,
            step.state.heading,
            u8::from(step.blocked)
        ));
        for d in &step.detections {
            let flag = d
                .receptacle_with
                .map(|c| ontology.name(c).to_string())
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "D {} {:e} {:e} {}\n",
                ontology.name(d.cat),
                d.position.x,
                d.position.y,
                flag
            ));
        }
        for &(a, b, label) in &step.edges_added {
            out.push_str(&format!(
                "E {} {} {}\n",
                ontology.name(a),
                ontology.name(b),
                u8::from(label)
            ));
        }
    }
    out
}

/// Parses [`trace_to_text`] output. Returns the episode plus the recorded
/// (policy, world seed, target, limit) header.
pub fn trace_from_text(
    text: &str,
    ontology: &Ontology,
) -> Result<(EpisodeResult, Policy, u64, CatId, usize)> {
    let err = |line: usize, msg: String| Error::Parse {
        path: "<trace>".into(),
        line,
        msg,
    };
    let mut policy = None;
    let mut world_seed = 0u64;
    let mut target = None;
    let mut limit = 0usize;
    let mut result = EpisodeResult {
        success: false,
        path_len: 0,
        shortest_len: None,
        trace: Vec::new(),
        candidates_tried: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        let fields: Vec<&str> = rest.split_whitespace().collect();
        match key {
            "policy" => policy = Some(rest.parse::<Policy>()?),
            "world_seed" => {
                world_seed = rest
                    .parse()
                    .map_err(|_| err(lineno, format!("bad seed `{rest}`")))?
            }
            "target" => target = Some(ontology.require(rest)?),
            "limit" => {
                limit = rest
                    .parse()
                    .map_err(|_| err(lineno, format!("bad limit `{rest}`")))?
            }
            "success" => result.success = rest == "1",
            "p" => {
                result.path_len = rest
                    .parse()
                    .map_err(|_| err(lineno, format!("bad p `{rest}`")))?
            }
            "l" => {
                result.shortest_len = if rest == "-" {
                    None
                } else {
                    Some(
                        rest.parse()
                            .map_err(|_| err(lineno, format!("bad l `{rest}`")))?,
                    )
                }
            }
            "candidates" => {
                for name in rest.split(';').filter(|s| !s.is_empty()) {
                    result.candidates_tried.push(ontology.require(name)?);
                }
            }
            "S" => {
                if fields.len() != 5 {
                    return Err(err(lineno, "S takes action col row heading blocked".into()));
                }
                let action: Action = fields[0].parse()?;
                let cell = Cell::new(
                    fields[1]
                        .parse()
                        .map_err(|_| err(lineno, "bad col".into()))?,
                    fields[2]
                        .parse()
                        .map_err(|_| err(lineno, "bad row".into()))?,
                );
                let heading: u16 = fields[3]
                    .parse()
                    .map_err(|_| err(lineno, "bad heading".into()))?;
                result.trace.push(TraceStep {
                    action,
                    state: RobotState::new(cell, heading),
                    blocked: fields[4] == "1",
                    detections: Vec::new(),
                    edges_added: Vec::new(),
                });
            }
            "D" => {
                let step = result
                    .trace
                    .last_mut()
                    .ok_or_else(|| err(lineno, "D before any S line".into()))?;
                if fields.len() != 4 {
                    return Err(err(lineno, "D takes cat x y receptacle".into()));
                }
                step.detections.push(Detection {
                    cat: ontology.require(fields[0])?,
                    position: Point {
                        x: fields[1]
                            .parse()
                            .map_err(|_| err(lineno, "bad x".into()))?,
                        y: fields[2]
                            .parse()
                            .map_err(|_| err(lineno, "bad y".into()))?,
                    },
                    receptacle_with: if fields[3] == "-" {
                        None
                    } else {
                        Some(ontology.require(fields[3])?)
                    },
                });
            }
            "E" => {
                let step = result
                    .trace
                    .last_mut()
                    .ok_or_else(|| err(lineno, "E before any S line".into()))?;
                if fields.len() != 3 {
                    return Err(err(lineno, "E takes u v label".into()));
                }
                step.edges_added.push((
                    ontology.require(fields[0])?,
                    ontology.require(fields[1])?,
                    fields[2] == "1",
                ));
            }
            other => return Err(err(lineno, format!("unknown record `{other}`"))),
        }
    }
    Ok((
        result,
        policy.ok_or_else(|| err(0, "missing policy line".into()))?,
        world_seed,
        target.ok_or_else(|| err(0, "missing target line".into()))?,
        limit,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::{ModelConfig, TrainConfig};
    use crate::world::{generate_world, WorldGenConfig, STATIONARY_POOL};

    fn fixture_ontology() -> Ontology {
        let mut onto = Ontology::new();
        for n in ["knife", "bread", "mug", "book", "apple", "fork"] {
            onto.intern(n).unwrap();
        }
        for n in STATIONARY_POOL {
            onto.intern(n).unwrap();
        }
        onto
    }

    fn fixture_graph(onto: &Ontology) -> RelationGraph {
        let mut g = RelationGraph::new(onto.ids().collect());
        for (a, b) in [
            ("knife", "countertop"),
            ("bread", "countertop"),
            ("mug", "sink"),
            ("book", "desk"),
            ("apple", "diningtable"),
            ("fork", "sink"),
        ] {
            g.set_edge(onto.id(a).unwrap(), onto.id(b).unwrap(), true, 10);
        }
        g
    }

    fn fixture_model(onto: &Ontology, graph: &RelationGraph) -> LinkModel {
        let mcfg = ModelConfig {
            hash_dim: 16,
            embed_dim: 8,
            layers: 2,
            heads: 2,
            head_dim: 8,
            predictor_hidden: 8,
            ..ModelConfig::default()
        };
        let tcfg = TrainConfig {
            epochs: 120,
            split: 0.99,
            ..TrainConfig::default()
        };
        crate::gnn::train(graph, onto, mcfg, &tcfg).unwrap().model
    }

    #[test]
    fn update_graph_adds_edges_by_distance_and_receptacle() {
        let onto = fixture_ontology();
        let gt = fixture_graph(&onto);
        let world = generate_world(
            5,
            &onto,
            &gt,
            &WorldGenConfig::default(),
            onto.id("knife").unwrap(),
        )
        .unwrap();
        let mut state = SearchState::new(&world);
        let anchor = state.known[0];
        let mug = onto.id("mug").unwrap();
        let near = Detection {
            cat: mug,
            position: Point {
                x: anchor.position.x + 0.5,
                y: anchor.position.y,
            },
            receptacle_with: None,
        };
        let added = update_graph(&mut state, &[near]);
        assert!(added.iter().any(|&(a, b, l)| l && (a == mug || b == mug)));
        assert!(state.graph.label(mug, anchor.cat));

        // Far detection with no receptacle: node exists, no positive edge.
        let book = onto.id("book").unwrap();
        let far = Detection {
            cat: book,
            position: Point {
                x: anchor.position.x + 3.0,
                y: anchor.position.y + 3.0,
            },
            receptacle_with: None,
        };
        update_graph(&mut state, &[far]);
        assert!(state.graph.node_index(book).is_some());
        assert!(!state.graph.label(book, anchor.cat));

        // Receptacle flag forces the edge regardless of distance.
        let fork = onto.id("fork").unwrap();
        let contained = Detection {
            cat: fork,
            position: Point {
                x: anchor.position.x + 4.0,
                y: anchor.position.y,
            },
            receptacle_with: Some(anchor.cat),
        };
        update_graph(&mut state, &[contained]);
        assert!(state.graph.label(fork, anchor.cat));

        // Re-detection updates the stored position, single node.
        let moved = Detection {
            cat: book,
            position: Point {
                x: anchor.position.x + 0.4,
                y: anchor.position.y,
            },
            receptacle_with: None,
        };
        update_graph(&mut state, &[moved]);
        let known_books = state.known.iter().filter(|k| k.cat == book).count();
        assert_eq!(known_books, 1);
        assert_eq!(state.known_position(book).unwrap(), moved.position);
        assert!(state.graph.label(book, anchor.cat));
    }

    #[test]
    fn rank_candidates_orders_and_excludes() {
        let onto = fixture_ontology();
        let gt = fixture_graph(&onto);
        let model = fixture_model(&onto, &gt);
        let world = generate_world(
            9,
            &onto,
            &gt,
            &WorldGenConfig::default(),
            onto.id("knife").unwrap(),
        )
        .unwrap();
        let mut state = SearchState::new(&world);
        let ranked = rank_candidates(&model, &state, world.target, &onto).unwrap();
        assert!(!ranked.is_empty());
        for w in ranked.windows(2) {
            assert!(w[0].1 >= w[1].1, "descending by probability");
        }
        // Visited candidates disappear from the ranking.
        let first = ranked[0].0;
        state.visited.insert(first);
        let again = rank_candidates(&model, &state, world.target, &onto).unwrap();
        assert!(again.iter().all(|&(c, _)| c != first));
        // Exhausting everything errors.
        for k in state.known.clone() {
            state.visited.insert(k.cat);
        }
        assert!(matches!(
            rank_candidates(&model, &state, world.target, &onto),
            Err(Error::Exhausted)
        ));
    }

    #[test]
    fn equal_probabilities_break_ties_by_name() {
        let onto = fixture_ontology();
        let gt = fixture_graph(&onto);
        let state = {
            let world = generate_world(
                2,
                &onto,
                &gt,
                &WorldGenConfig::default(),
                onto.id("mug").unwrap(),
            )
            .unwrap();
            SearchState::new(&world)
        };
        // Ground-truth ranking gives constant scores to non-neighbors, so
        // the order within a score class must be alphabetical.
        let ranked = rank_by_ground_truth(&gt, &state, onto.id("mug").unwrap(), &onto).unwrap();
        for w in ranked.windows(2) {
            if (w[0].1 - w[1].1).abs() < 1e-15 {
                assert!(onto.name(w[0].0) <= onto.name(w[1].0));
            }
        }
    }

    #[test]
    fn oracle_tries_the_gt_neighbor_first() {
        let onto = fixture_ontology();
        let gt = fixture_graph(&onto);
        for seed in 0..5 {
            let world = generate_world(
                seed,
                &onto,
                &gt,
                &WorldGenConfig::default(),
                onto.id("knife").unwrap(),
            )
            .unwrap();
            let cfg = SearchConfig::default();
            let r = baseline_search(&world, Policy::Oracle, Some(&gt), &onto, &cfg).unwrap();
            if let Some(&first) = r.candidates_tried.first() {
                let has_edge_candidate = world
                    .stationary
                    .iter()
                    .any(|s| gt.label(world.target, s.cat));
                if has_edge_candidate {
                    assert!(
                        gt.label(world.target, first),
                        "seed {seed}: first candidate lacks a gt edge"
                    );
                }
            }
        }
    }

    #[test]
    fn zero_step_limit_fails_immediately() {
        let onto = fixture_ontology();
        let gt = fixture_graph(&onto);
        let world = generate_world(
            3,
            &onto,
            &gt,
            &WorldGenConfig::default(),
            onto.id("mug").unwrap(),
        )
        .unwrap();
        let cfg = SearchConfig {
            step_limit: 0,
            ..SearchConfig::default()
        };
        let r = baseline_search(&world, Policy::Random, None, &onto, &cfg).unwrap();
        assert!(!r.success);
        assert_eq!(r.path_len, 0);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn random_is_deterministic_per_seed() {
        let onto = fixture_ontology();
        let gt = fixture_graph(&onto);
        let world = generate_world(
            11,
            &onto,
            &gt,
            &WorldGenConfig::default(),
            onto.id("book").unwrap(),
        )
        .unwrap();
        let cfg = SearchConfig {
            step_limit: 60,
            ..SearchConfig::default()
        };
        let a = baseline_search(&world, Policy::Random, None, &onto, &cfg).unwrap();
        let b = baseline_search(&world, Policy::Random, None, &onto, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_accounting_holds_across_policies() {
        let onto = fixture_ontology();
        let gt = fixture_graph(&onto);
        let model = fixture_model(&onto, &gt);
        let cfg = SearchConfig {
            step_limit: 150,
            ..SearchConfig::default()
        };
        for seed in [2u64, 8] {
            let world = generate_world(
                seed,
                &onto,
                &gt,
                &WorldGenConfig::default(),
                onto.id("knife").unwrap(),
            )
            .unwrap();
            let runs = [
                gnn_search(&world, &model, &onto, &cfg).unwrap(),
                baseline_search(&world, Policy::Random, None, &onto, &cfg).unwrap(),
                baseline_search(&world, Policy::FrontierGreedy, None, &onto, &cfg).unwrap(),
                baseline_search(&world, Policy::Oracle, Some(&gt), &onto, &cfg).unwrap(),
            ];
            for r in &runs {
                assert!(r.path_len <= cfg.step_limit);
                assert_eq!(r.path_len, r.trace.len());
                assert!(r.success_consistent(&world, cfg.success_radius_m));
                if r.success {
                    let l = r.shortest_len.expect("solvable world");
                    assert!(r.path_len >= l, "executed path beats the BFS bound");
                }
            }
        }
    }

    #[test]
    fn candidates_are_never_tried_twice() {
        let onto = fixture_ontology();
        let gt = fixture_graph(&onto);
        let model = fixture_model(&onto, &gt);
        let cfg = SearchConfig::default();
        for seed in 0..6 {
            let world = generate_world(
                seed,
                &onto,
                &gt,
                &WorldGenConfig::default(),
                onto.id("apple").unwrap(),
            )
            .unwrap();
            let r = gnn_search(&world, &model, &onto, &cfg).unwrap();
            let mut seen = BTreeSet::new();
            for c in &r.candidates_tried {
                assert!(seen.insert(*c), "candidate {c:?} tried twice (seed {seed})");
            }
        }
    }

    #[test]
    fn adjacent_target_found_during_arrival_scan() {
        use crate::world::{Cell, MovableObject, StationaryObject};
        // Hand-built room: the robot starts inside the top candidate's
        // surrounding area, so the episode opens with the 8-rotation scan
        // and must find the adjacent target within those actions.
        let onto = fixture_ontology();
        let gt = fixture_graph(&onto);
        let model = fixture_model(&onto, &gt);
        let knife = onto.id("knife").unwrap();
        let counter = onto.id("countertop").unwrap();
        let mut world = crate::world::GridWorld::empty(20, 20, knife, 99);
        for col in 0..20 {
            world.set_blocked(Cell::new(col, 0), true);
            world.set_blocked(Cell::new(col, 19), true);
        }
        for row in 0..20 {
            world.set_blocked(Cell::new(0, row), true);
            world.set_blocked(Cell::new(19, row), true);
        }
        let footprint = vec![Cell::new(10, 10), Cell::new(11, 10)];
        world.set_blocked(footprint[0], true);
        world.set_blocked(footprint[1], true);
        world.stationary.push(StationaryObject {
            cat: counter,
            position: crate::world::footprint_centroid(&footprint),
            footprint,
        });
        // Knife one cell behind the start pose: outside the initial FoV,
        // 0.25 m away, well inside the success radius.
        world.movable.push(MovableObject {
            cat: knife,
            cell: Cell::new(8, 10),
            parent: None,
            position: Cell::new(8, 10).center(),
        });
        world.start = crate::world::RobotState::new(Cell::new(9, 10), 0);
        assert!(world.start.position().dist(world.movable[0].position) < 1.0);

        let cfg = SearchConfig::default();
        let r = gnn_search(&world, &model, &onto, &cfg).unwrap();
        assert!(r.success);
        assert!(r.path_len <= 8, "found during the scan, p = {}", r.path_len);
    }

    #[test]
    fn frontier_terminates_when_nothing_left_to_observe() {
        use crate::world::{Cell, MovableObject};
        // The target sits in a walled-off pocket: the frontier policy
        // explores all reachable space, marks the pocket unreachable, and
        // ends in failure before the step limit.
        let onto = fixture_ontology();
        let book = onto.id("book").unwrap();
        let mut world = crate::world::GridWorld::empty(14, 14, book, 7);
        for col in 0..14 {
            world.set_blocked(Cell::new(col, 0), true);
            world.set_blocked(Cell::new(col, 13), true);
        }
        for row in 0..14 {
            world.set_blocked(Cell::new(0, row), true);
            world.set_blocked(Cell::new(13, row), true);
        }
        // Sealed 3x3 pocket in the corner.
        for c in [
            Cell::new(1, 4),
            Cell::new(2, 4),
            Cell::new(3, 4),
            Cell::new(4, 4),
            Cell::new(4, 1),
            Cell::new(4, 2),
            Cell::new(4, 3),
        ] {
            world.set_blocked(c, true);
        }
        world.movable.push(MovableObject {
            cat: book,
            cell: Cell::new(2, 2),
            parent: None,
            position: Cell::new(2, 2).center(),
        });
        world.start = crate::world::RobotState::new(Cell::new(9, 9), 0);
        let cfg = SearchConfig::default();
        let r = baseline_search(&world, Policy::FrontierGreedy, None, &onto, &cfg).unwrap();
        assert!(!r.success);
        assert!(
            r.path_len < cfg.step_limit,
            "terminated by exhausting frontiers, not the budget"
        );
    }

    #[test]
    fn spl_values_match_the_formula() {
        let mk = |success: bool, p: usize, l: usize| EpisodeResult {
            success,
            path_len: p,
            shortest_len: Some(l),
            trace: Vec::new(),
            candidates_tried: Vec::new(),
        };
        assert_eq!(spl(&[mk(true, 6, 6)]).unwrap(), 1.0);
        assert_eq!(spl(&[mk(false, 10, 4)]).unwrap(), 0.0);
        assert_eq!(spl(&[mk(true, 8, 4)]).unwrap(), 0.5);
        assert_eq!(
            success_rate(&[mk(true, 6, 6), mk(false, 1, 1)]).unwrap(),
            0.5
        );
        assert!(success_rate(&[]).is_err());
        assert!(spl(&[]).is_err());
        // A success reported shorter than the bound still clamps through
        // max(p, l).
        assert_eq!(spl(&[mk(true, 4, 8)]).unwrap(), 1.0);
    }

    #[test]
    fn spl_never_exceeds_success_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let n = rng.random_range(1..20);
            let results: Vec<EpisodeResult> = (0..n)
                .map(|_| {
                    let success = rng.random::<bool>();
                    let l = rng.random_range(1..50usize);
                    let p = l + rng.random_range(0..50usize);
                    EpisodeResult {
                        success,
                        path_len: p,
                        shortest_len: Some(l),
                        trace: Vec::new(),
                        candidates_tried: Vec::new(),
                    }
                })
                .collect();
            let s = success_rate(&results).unwrap();
            let w = spl(&results).unwrap();
            assert!(w <= s + 1e-12, "spl {w} exceeds sr {s}");
        }
    }
}
