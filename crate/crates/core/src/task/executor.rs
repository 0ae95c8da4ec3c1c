//! Plan execution in the simulated household.
//!
//! `search` steps run the object-search engine; `goto` steps follow planned
//! paths; manipulations succeed iff the robot stands within the interaction
//! radius of the argument's true position, then apply their effects to the
//! world's object-state ledger. One primitive-action budget covers the
//! whole execution.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::gnn::LinkModel;
use crate::relation::{CatId, Ontology, DISTANCE_THRESHOLD_M};
use crate::search::{gnn_search, EpisodeResult, SearchConfig};
use crate::task::domain::{OpKind, Problem};
use crate::task::planner::Plan;
use crate::task::{GoalSpec, TaskAction};
use crate::world::{cells_within, plan_path, Action, GridWorld, Point, RobotState};

/// Outcome of one plan step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub op: String,
    pub ok: bool,
    pub detail: String,
    /// Primitive actions consumed by this step.
    pub actions_used: usize,
}

/// Full execution report.
#[derive(Debug, Clone)]
pub struct ExecReport {
    pub steps: Vec<StepOutcome>,
    /// Every navigation step (search and goto) succeeded.
    pub nav_success: bool,
    /// The whole plan ran and the goal holds in the world ledger.
    pub exe_success: bool,
    pub actions_used: usize,
    /// Search episodes run for missing objects, by target name.
    pub search_episodes: Vec<(String, EpisodeResult)>,
    /// Object-state facts holding in the world ledger after execution.
    pub facts: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Placement {
    On(CatId),
    In(CatId),
}

struct ExecSim {
    world: GridWorld,
    robot: RobotState,
    actions_used: usize,
    budget: usize,
    /// Best known position per category (truth for map knowledge,
    /// estimates for searched objects).
    positions: BTreeMap<CatId, Point>,
    holding: Option<CatId>,
    placements: BTreeMap<CatId, Placement>,
    sliced: BTreeSet<CatId>,
    cooked: BTreeSet<CatId>,
    clean: BTreeSet<CatId>,
    toggled: BTreeSet<CatId>,
}

impl ExecSim {
    fn true_position(&self, cat: CatId) -> Option<Point> {
        if self.holding == Some(cat) {
            return Some(self.robot.position());
        }
        if let Some(s) = self.world.stationary_of(cat) {
            return Some(s.position);
        }
        self.world.movable_of(cat).map(|m| m.position)
    }

    fn within_reach(&self, cat: CatId) -> bool {
        match self.true_position(cat) {
            Some(p) => self.robot.position().dist(p) < DISTANCE_THRESHOLD_M,
            None => false,
        }
    }

    fn walk(&mut self, path: &[Action]) -> Result<()> {
        for &a in path {
            if self.actions_used >= self.budget {
                return Err(Error::Invalid("step budget exhausted".into()));
            }
            let (next, _) = self.world.step(self.robot, a);
            self.robot = next;
            self.actions_used += 1;
        }
        Ok(())
    }

    fn move_object_to(&mut self, cat: CatId, position: Point, parent: Option<usize>) {
        if let Some(m) = self.world.movable.iter_mut().find(|m| m.cat == cat) {
            m.position = position;
            m.cell = crate::world::cell_of(position);
            m.parent = parent;
        }
        self.positions.insert(cat, position);
    }
}

/// Executes a plan against the world.
///
/// `known_movables` are movable categories whose true positions are given
/// world knowledge (the instruction's premise); everything else must be
/// searched. `budget` bounds the primitive actions of the entire execution.
pub fn execute_plan(
    world: &GridWorld,
    goal: &GoalSpec,
    problem: &Problem,
    plan: &Plan,
    known_movables: &[CatId],
    model: &LinkModel,
    ontology: &Ontology,
    search_cfg: &SearchConfig,
) -> Result<ExecReport> {
    let mut sim = ExecSim {
        world: world.clone(),
        robot: world.start,
        actions_used: 0,
        budget: search_cfg.step_limit,
        positions: BTreeMap::new(),
        holding: None,
        placements: BTreeMap::new(),
        sliced: BTreeSet::new(),
        cooked: BTreeSet::new(),
        clean: BTreeSet::new(),
        toggled: BTreeSet::new(),
    };
    for s in &world.stationary {
        sim.positions.insert(s.cat, s.position);
    }
    for &cat in known_movables {
        if let Some(m) = world.movable_of(cat) {
            sim.positions.insert(cat, m.position);
        }
    }

    let mut steps: Vec<StepOutcome> = Vec::new();
    let mut search_episodes = Vec::new();
    let mut nav_success = true;
    let mut failed = false;

    for (idx, op) in plan.ops(problem).iter().enumerate() {
        let name = op.display(&problem.objects);
        let arg_cat = |k: usize| -> Result<CatId> {
            let obj_name = &problem.objects[op.args[k] as usize];
            ontology.require(obj_name)
        };
        let before = sim.actions_used;
        let fail = |sim_actions: usize, msg: String| StepOutcome {
            op: name.clone(),
            ok: false,
            detail: msg,
            actions_used: sim_actions,
        };
        let result: std::result::Result<String, String> = (|| {
            match op.kind {
                OpKind::Search => {
                    let target = arg_cat(0).map_err(|e| e.to_string())?;
                    if sim.world.movable_of(target).is_none() {
                        return Err(format!(
                            "`{}` does not exist in this world",
                            ontology.name(target)
                        ));
                    }
                    let mut search_world = sim.world.clone();
                    search_world.target = target;
                    search_world.start = sim.robot;
                    let remaining = sim.budget - sim.actions_used;
                    let cfg = SearchConfig {
                        step_limit: remaining,
                        ..search_cfg.clone()
                    };
                    let episode = gnn_search(&search_world, model, ontology, &cfg)
                        .map_err(|e| e.to_string())?;
                    sim.actions_used += episode.path_len;
                    if let Some(last) = episode.trace.last() {
                        sim.robot = last.state;
                    }
                    let found = episode.success;
                    let estimate = episode
                        .trace
                        .iter()
                        .rev()
                        .flat_map(|s| s.detections.iter())
                        .find(|d| d.cat == target)
                        .map(|d| d.position);
                    search_episodes.push((ontology.name(target).to_string(), episode));
                    if !found {
                        return Err("search exceeded the step budget".into());
                    }
                    sim.positions.insert(
                        target,
                        estimate.expect("successful search detected the target"),
                    );
                    Ok(format!("found `{}`", ontology.name(target)))
                }
                OpKind::Goto => {
                    let dest = arg_cat(1).map_err(|e| e.to_string())?;
                    let pos = sim
                        .positions
                        .get(&dest)
                        .copied()
                        .ok_or_else(|| format!("no known location for `{}`", ontology.name(dest)))?;
                    // Estimates carry detector noise; aim inside the
                    // interaction radius with that headroom.
                    let exact = sim.world.stationary_of(dest).is_some();
                    let radius = if exact {
                        DISTANCE_THRESHOLD_M
                    } else {
                        (DISTANCE_THRESHOLD_M - search_cfg.detector.noise_m).max(0.1)
                    };
                    let region = cells_within(&sim.world, pos, radius);
                    let path = plan_path(&sim.world, sim.robot, &region)
                        .ok_or_else(|| format!("no path to `{}`", ontology.name(dest)))?;
                    let n = path.len();
                    sim.walk(&path).map_err(|e| e.to_string())?;
                    Ok(format!("{n} actions"))
                }
                OpKind::Pick => {
                    let x = arg_cat(0).map_err(|e| e.to_string())?;
                    if sim.holding.is_some() {
                        return Err("hand is not empty".into());
                    }
                    if !sim.within_reach(x) {
                        return Err(format!(
                            "precondition (at {}) fails: robot too far",
                            ontology.name(x)
                        ));
                    }
                    sim.holding = Some(x);
                    sim.placements.remove(&x);
                    let robot_pos = sim.robot.position();
                    sim.move_object_to(x, robot_pos, None);
                    Ok("holding".into())
                }
                OpKind::Put => {
                    let x = arg_cat(0).map_err(|e| e.to_string())?;
                    let y = arg_cat(1).map_err(|e| e.to_string())?;
                    if sim.holding != Some(x) {
                        return Err(format!("not holding `{}`", ontology.name(x)));
                    }
                    if !sim.within_reach(y) {
                        return Err(format!(
                            "precondition (at {}) fails: robot too far",
                            ontology.name(y)
                        ));
                    }
                    sim.holding = None;
                    let target_pos = sim
                        .true_position(y)
                        .expect("reachable receptacle has a position");
                    let parent = sim
                        .world
                        .stationary
                        .iter()
                        .position(|s| s.cat == y);
                    sim.move_object_to(x, target_pos, parent);
                    let placement = if crate::task::domain::is_in_class(ontology.name(y)) {
                        Placement::In(y)
                    } else {
                        Placement::On(y)
                    };
                    sim.placements.insert(x, placement);
                    Ok("placed".into())
                }
                OpKind::Slice => {
                    let x = arg_cat(0).map_err(|e| e.to_string())?;
                    let k = arg_cat(1).map_err(|e| e.to_string())?;
                    if sim.holding != Some(k) {
                        return Err(format!("not holding `{}`", ontology.name(k)));
                    }
                    if !sim.within_reach(x) {
                        return Err(format!(
                            "precondition (at {}) fails: robot too far",
                            ontology.name(x)
                        ));
                    }
                    sim.sliced.insert(x);
                    Ok("sliced".into())
                }
                OpKind::Cook => {
                    let x = arg_cat(0).map_err(|e| e.to_string())?;
                    let a = arg_cat(1).map_err(|e| e.to_string())?;
                    let placed_there = matches!(
                        sim.placements.get(&x),
                        Some(Placement::On(c) | Placement::In(c)) if *c == a
                    );
                    if !placed_there {
                        return Err(format!(
                            "`{}` is not at `{}`",
                            ontology.name(x),
                            ontology.name(a)
                        ));
                    }
                    if !sim.within_reach(a) {
                        return Err(format!(
                            "precondition (at {}) fails: robot too far",
                            ontology.name(a)
                        ));
                    }
                    sim.cooked.insert(x);
                    Ok("cooked".into())
                }
                OpKind::Toggle => {
                    let f = arg_cat(0).map_err(|e| e.to_string())?;
                    // Fixtures may model the faucet as part of the sink.
                    let anchor = if sim.positions.contains_key(&f) {
                        f
                    } else {
                        ontology.require("sink").map_err(|e| e.to_string())?
                    };
                    if !sim.within_reach(anchor) {
                        return Err(format!(
                            "precondition (at {}) fails: robot too far",
                            ontology.name(anchor)
                        ));
                    }
                    sim.toggled.insert(f);
                    Ok("toggled".into())
                }
                OpKind::Clean => {
                    let x = arg_cat(0).map_err(|e| e.to_string())?;
                    let sink = ontology.require("sink").map_err(|e| e.to_string())?;
                    let faucet = ontology.require("faucet").map_err(|e| e.to_string())?;
                    if sim.placements.get(&x) != Some(&Placement::In(sink)) {
                        return Err(format!("`{}` is not in the sink", ontology.name(x)));
                    }
                    if !sim.toggled.contains(&faucet) {
                        return Err("faucet is not toggled".into());
                    }
                    sim.clean.insert(x);
                    Ok("clean".into())
                }
            }
        })();
        match result {
            Ok(detail) => steps.push(StepOutcome {
                op: name,
                ok: true,
                detail,
                actions_used: sim.actions_used - before,
            }),
            Err(msg) => {
                if matches!(op.kind, OpKind::Search | OpKind::Goto) {
                    nav_success = false;
                }
                let prefixed = format!("step {idx} failed: {msg}");
                steps.push(fail(sim.actions_used - before, prefixed));
                failed = true;
                break;
            }
        }
    }

    let goal_satisfied = !failed
        && match goal.action {
            TaskAction::Cut => sim.sliced.contains(&goal.object),
            TaskAction::Cook => sim.cooked.contains(&goal.object),
            TaskAction::Clean => sim.clean.contains(&goal.object),
            TaskAction::PickPlace => matches!(
                sim.placements.get(&goal.object),
                Some(Placement::On(c) | Placement::In(c)) if *c == goal.subject
            ),
        };
    let mut facts: Vec<String> = Vec::new();
    for &c in &sim.sliced {
        facts.push(format!("sliced({})", ontology.name(c)));
    }
    for &c in &sim.cooked {
        facts.push(format!("cooked({})", ontology.name(c)));
    }
    for &c in &sim.clean {
        facts.push(format!("clean({})", ontology.name(c)));
    }
    for &c in &sim.toggled {
        facts.push(format!("toggled({})", ontology.name(c)));
    }
    for (&x, p) in &sim.placements {
        match p {
            Placement::On(y) => {
                facts.push(format!("on({}, {})", ontology.name(x), ontology.name(*y)))
            }
            Placement::In(y) => {
                facts.push(format!("in({}, {})", ontology.name(x), ontology.name(*y)))
            }
        }
    }
    Ok(ExecReport {
        steps,
        nav_success,
        exe_success: goal_satisfied,
        actions_used: sim.actions_used,
        search_episodes,
        facts,
    })
}
