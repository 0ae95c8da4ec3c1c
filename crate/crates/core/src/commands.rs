//! Experiment orchestration behind the CLI subcommands.
//!
//! Every command is a pure function of its configuration: all randomness
//! flows from named seeds, so repeated runs produce byte-identical output
//! files. Episode batches fan out across threads and merge in episode-index
//! order.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::gnn::{curve_to_csv, eval_link_accuracy, train, LinkModel};
use crate::relation::{build_graph, load_corpus, CatId, Ontology, RelationGraph};
use crate::render::render_world_svg;
use crate::search::{
    baseline_search, gnn_search, spl, spl_term, success_rate, trace_from_text, trace_to_text,
    EpisodeResult, Policy,
};
use crate::task::{
    compile_problem, execute_plan, parse_instruction, plan_task, validate_plan, write_problem,
    ExecReport, GoalSpec, Plan, Problem, ProblemObject, TaskAction,
};
use crate::world::{generate_world, load_world, save_world, GridWorld};

/// Loads the ontology and corpus, returning the built co-occurrence graph.
pub fn load_graph(cfg: &ExperimentConfig) -> Result<(Ontology, RelationGraph)> {
    let mut ontology = Ontology::from_file(&cfg.paths.ontology)?;
    let triples = load_corpus(&cfg.paths.corpus, &mut ontology)?;
    let graph = build_graph(&triples, &ontology)?;
    Ok((ontology, graph))
}

fn load_checkpoint(cfg: &ExperimentConfig, ontology: &Ontology) -> Result<LinkModel> {
    let model = LinkModel::load(&cfg.paths.checkpoint).map_err(|e| {
        Error::Config(format!(
            "cannot load checkpoint {}: {e}",
            cfg.paths.checkpoint.display()
        ))
    })?;
    if !model.matches_ontology(ontology) {
        return Err(Error::Config(
            "checkpoint was trained for a different ontology".into(),
        ));
    }
    Ok(model)
}

/// Mixes a benchmark seed and target into one world seed.
fn world_seed(seed: u64, target: CatId) -> u64 {
    seed.wrapping_mul(0x0000_0100_0000_01b3)
        .wrapping_add(0x9e37_79b9)
        .wrapping_add(target.0 as u64)
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub checkpoint: PathBuf,
    pub loss_csv: PathBuf,
    pub final_train_accuracy: f64,
    pub val_accuracy: Option<f64>,
}

/// Trains on the corpus graph, writing the checkpoint and loss curve.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<TrainReport> {
    cfg.validate(true)?;
    let (ontology, graph) = load_graph(cfg)?;
    let outcome = train(&graph, &ontology, cfg.model_config(), &cfg.train_config())?;
    fs::create_dir_all(&cfg.paths.out_dir)?;
    if let Some(parent) = cfg.paths.checkpoint.parent() {
        fs::create_dir_all(parent)?;
    }
    outcome.model.save(&cfg.paths.checkpoint)?;
    let loss_csv = cfg.paths.out_dir.join("loss_curve.csv");
    fs::write(&loss_csv, curve_to_csv(&outcome.curve))?;
    let final_train_accuracy = outcome.curve.last().map(|s| s.accuracy).unwrap_or(0.0);
    println!(
        "trained {} epochs on {} nodes / {} edges",
        outcome.curve.len(),
        graph.node_count(),
        graph.positive_edge_count()
    );
    println!("final train accuracy {final_train_accuracy:.4}");
    match outcome.val_accuracy {
        Some(acc) => println!("validation accuracy {acc:.4}"),
        None => println!("validation accuracy n/a (no held-out pairs)"),
    }
    println!("checkpoint written to {}", cfg.paths.checkpoint.display());
    Ok(TrainReport {
        checkpoint: cfg.paths.checkpoint.clone(),
        loss_csv,
        final_train_accuracy,
        val_accuracy: outcome.val_accuracy,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct EvalReport {
    pub accuracy: f64,
    pub pairs: usize,
}

/// Evaluates checkpoint link accuracy over every pair of the corpus graph.
pub fn cmd_eval_links(cfg: &ExperimentConfig) -> Result<EvalReport> {
    cfg.validate(true)?;
    let (ontology, graph) = load_graph(cfg)?;
    let model = load_checkpoint(cfg, &ontology)?;
    let nodes = graph.nodes().to_vec();
    let mut pairs = Vec::new();
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            pairs.push((nodes[i], nodes[j], graph.label(nodes[i], nodes[j])));
        }
    }
    let accuracy = eval_link_accuracy(&model, &graph, &pairs)?;
    println!("link prediction accuracy {accuracy:.4} over {} pairs", pairs.len());
    Ok(EvalReport {
        accuracy,
        pairs: pairs.len(),
    })
}

/// Generates one world and writes it (plus an SVG) to the output directory.
pub fn cmd_gen_world(
    cfg: &ExperimentConfig,
    seed: u64,
    target_name: &str,
    out: Option<&Path>,
) -> Result<PathBuf> {
    cfg.validate(true)?;
    let (ontology, graph) = load_graph(cfg)?;
    let target = ontology.require(target_name)?;
    let world = generate_world(seed, &ontology, &graph, &cfg.world_gen_config(), target)?;
    fs::create_dir_all(&cfg.paths.out_dir)?;
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.paths.out_dir.join(format!("world_{seed}_{target_name}.world")));
    save_world(&path, &world, &ontology)?;
    let svg = path.with_extension("svg");
    fs::write(&svg, render_world_svg(&world, &ontology, None))?;
    println!("world written to {}", path.display());
    Ok(path)
}

#[derive(Debug, Clone)]
pub struct PolicySummary {
    pub policy: Policy,
    pub episodes: usize,
    pub successes: usize,
    pub sr: f64,
    pub spl: f64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub episodes_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub summaries: Vec<PolicySummary>,
}

struct EpisodeRow {
    episode: usize,
    seed: u64,
    policy: Policy,
    target: String,
    result: EpisodeResult,
}

/// Runs the (seed × policy × target) benchmark grid and writes episode and
/// summary CSVs.
pub fn cmd_search_bench(cfg: &ExperimentConfig) -> Result<BenchReport> {
    cfg.validate(true)?;
    let (ontology, graph) = load_graph(cfg)?;
    let model = load_checkpoint(cfg, &ontology)?;
    let policies: Vec<Policy> = cfg
        .search
        .policies
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    let targets: Vec<CatId> = cfg
        .search
        .targets
        .iter()
        .map(|t| ontology.require(t))
        .collect::<Result<_>>()?;
    let seeds = cfg.seeds();
    let gen = cfg.world_gen_config();
    let scfg = cfg.search_config();

    // One cell per (policy, seed, target); worlds are shared across
    // policies through the world seed.
    let mut cells = Vec::new();
    for &policy in &policies {
        for &seed in &seeds {
            for &target in &targets {
                cells.push((policy, seed, target));
            }
        }
    }
    let rows: Result<Vec<EpisodeRow>> = cells
        .par_iter()
        .enumerate()
        .map(|(episode, &(policy, seed, target))| {
            let world = generate_world(world_seed(seed, target), &ontology, &graph, &gen, target)?;
            let result = match policy {
                Policy::Gnn => gnn_search(&world, &model, &ontology, &scfg)?,
                p => baseline_search(&world, p, Some(&graph), &ontology, &scfg)?,
            };
            Ok(EpisodeRow {
                episode,
                seed,
                policy,
                target: ontology.name(target).to_string(),
                result,
            })
        })
        .collect();
    let rows = rows?;

    fs::create_dir_all(&cfg.paths.out_dir)?;
    let episodes_csv = cfg.paths.out_dir.join("episodes.csv");
    let mut csv = String::from("episode,seed,policy,target,success,p,l,spl_term,candidates_tried\n");
    for row in &rows {
        let l = row
            .result
            .shortest_len
            .map(|l| l.to_string())
            .unwrap_or_else(|| "-".into());
        let tried: Vec<&str> = row
            .result
            .candidates_tried
            .iter()
            .map(|&c| ontology.name(c))
            .collect();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.episode,
            row.seed,
            row.policy,
            row.target,
            u8::from(row.result.success),
            row.result.path_len,
            l,
            spl_term(&row.result)?,
            tried.join(";")
        ));
    }
    fs::write(&episodes_csv, &csv)?;

    if cfg.search.write_traces {
        let dir = cfg.paths.out_dir.join("traces");
        fs::create_dir_all(&dir)?;
        for row in &rows {
            let target = ontology.require(&row.target)?;
            let world = generate_world(world_seed(row.seed, target), &ontology, &graph, &gen, target)?;
            let stem = format!("ep{:04}_{}_{}", row.episode, row.policy, row.target);
            fs::write(
                dir.join(format!("{stem}.trace")),
                trace_to_text(&row.result, &world, row.policy, scfg.step_limit, &ontology),
            )?;
            save_world(&dir.join(format!("{stem}.world")), &world, &ontology)?;
        }
    }

    let mut summaries = Vec::new();
    let summary_csv = cfg.paths.out_dir.join("summary.csv");
    let mut scsv = String::from("policy,episodes,successes,sr,spl\n");
    println!("{:>10} {:>9} {:>8} {:>8}", "policy", "episodes", "SR", "SPL");
    for &policy in &policies {
        let results: Vec<EpisodeResult> = rows
            .iter()
            .filter(|r| r.policy == policy)
            .map(|r| r.result.clone())
            .collect();
        let sr = success_rate(&results)?;
        let w = spl(&results)?;
        let successes = results.iter().filter(|r| r.success).count();
        println!("{policy:>10} {:>9} {sr:>8.4} {w:>8.4}", results.len());
        scsv.push_str(&format!(
            "{policy},{},{successes},{sr},{w}\n",
            results.len()
        ));
        summaries.push(PolicySummary {
            policy,
            episodes: results.len(),
            successes,
            sr,
            spl: w,
        });
    }
    fs::write(&summary_csv, &scsv)?;
    Ok(BenchReport {
        episodes_csv,
        summary_csv,
        summaries,
    })
}

#[derive(Debug, Clone)]
pub struct InstructReport {
    pub goal: GoalSpec,
    pub plan_lines: Vec<String>,
    pub exec: ExecReport,
}

/// Builds the problem-object list for an instruction against a world:
/// stationaries and given movables are known, the rest must be searched.
fn problem_objects(
    world: &GridWorld,
    goal: &GoalSpec,
    known_movables: &[CatId],
    ontology: &Ontology,
) -> Vec<ProblemObject> {
    let mut objects: Vec<ProblemObject> = Vec::new();
    let mut push = |cat: CatId, known: bool| {
        let name = ontology.name(cat).to_string();
        if !objects.iter().any(|o| o.name == name) {
            objects.push(ProblemObject {
                name,
                location_known: known,
            });
        }
    };
    for s in &world.stationary {
        push(s.cat, true);
    }
    for &m in known_movables {
        push(m, true);
    }
    if goal.action == TaskAction::Clean {
        if let Some(f) = ontology.id("faucet") {
            push(f, true);
        }
    }
    push(goal.subject, known_movables.contains(&goal.subject)
        || world.stationary_of(goal.subject).is_some());
    push(goal.object, known_movables.contains(&goal.object)
        || world.stationary_of(goal.object).is_some());
    objects
}

/// Parses, plans, and executes one instruction in a world.
///
/// The subject's location is treated as known (given world knowledge); the
/// target object must be searched unless listed in `known_movables`.
pub fn run_instruction(
    cfg: &ExperimentConfig,
    instruction: &str,
    world: &GridWorld,
    model: &LinkModel,
    ontology: &Ontology,
    extra_known: &[CatId],
) -> Result<(InstructReport, Problem, Plan)> {
    let goal = parse_instruction(instruction, ontology, Some(world))?;
    let mut known: Vec<CatId> = extra_known.to_vec();
    if world.movable_of(goal.subject).is_some() && !known.contains(&goal.subject) {
        known.push(goal.subject);
    }
    let objects = problem_objects(world, &goal, &known, ontology);
    let problem = compile_problem(&goal, ontology, &objects)?;
    let plan = plan_task(&problem)?;
    validate_plan(&problem, &plan)?;
    let exec = execute_plan(
        world,
        &goal,
        &problem,
        &plan,
        &known,
        model,
        ontology,
        &cfg.search_config(),
    )?;
    let plan_lines = plan.render(&problem);
    Ok((
        InstructReport {
            goal,
            plan_lines,
            exec,
        },
        problem,
        plan,
    ))
}

/// The `instruct` command: goal, plan, execution report, artifacts.
pub fn cmd_instruct(
    cfg: &ExperimentConfig,
    instruction: &str,
    world_path: Option<&Path>,
) -> Result<InstructReport> {
    cfg.validate(true)?;
    let (ontology, graph) = load_graph(cfg)?;
    let model = load_checkpoint(cfg, &ontology)?;
    let world = match world_path {
        Some(p) => load_world(p, &ontology)?,
        None => {
            // Generate a world containing the instruction's objects: the
            // target hidden, the subject placed (stationary when possible).
            let goal = parse_instruction(instruction, &ontology, None)?;
            let mut gen = cfg.world_gen_config();
            if crate::world::STATIONARY_POOL.contains(&ontology.name(goal.subject)) {
                gen.required_stationary.push(goal.subject);
            } else {
                gen.required_movables.push(goal.subject);
            }
            generate_world(cfg.train.seed, &ontology, &graph, &gen, goal.object)?
        }
    };
    let (report, problem, plan) = run_instruction(cfg, instruction, &world, &model, &ontology, &[])?;
    fs::create_dir_all(&cfg.paths.out_dir)?;
    fs::write(cfg.paths.out_dir.join("problem.strips"), write_problem(&problem))?;
    fs::write(
        cfg.paths.out_dir.join("plan.txt"),
        plan.render(&problem).join("\n") + "\n",
    )?;

    println!("goal: {}", report.goal.describe(&ontology));
    println!("plan ({} steps):", report.plan_lines.len());
    for (i, line) in report.plan_lines.iter().enumerate() {
        println!("  {i}: {line}");
    }
    println!("execution:");
    for s in &report.exec.steps {
        let status = if s.ok { "ok" } else { "FAILED" };
        println!("  {:<24} {status:<7} {} ({} actions)", s.op, s.detail, s.actions_used);
    }
    println!(
        "Nav={} Exe={} ({} actions total)",
        if report.exec.nav_success { "success" } else { "failure" },
        if report.exec.exe_success { "success" } else { "failure" },
        report.exec.actions_used
    );
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct ReplayReport {
    pub policy: Policy,
    pub success: bool,
    pub consistent: bool,
    pub svg: Option<PathBuf>,
}

/// Re-checks a recorded trace against its world and optionally renders it.
pub fn cmd_replay(
    trace_path: &Path,
    world_path: &Path,
    ontology_path: &Path,
    svg_out: Option<&Path>,
) -> Result<ReplayReport> {
    let ontology = Ontology::from_file(ontology_path)?;
    let world = load_world(world_path, &ontology)?;
    let text = fs::read_to_string(trace_path)?;
    let (episode, policy, world_seed, target, _limit) = trace_from_text(&text, &ontology)?;
    if world.seed != world_seed || world.target != target {
        return Err(Error::Config(format!(
            "trace was recorded for world seed {world_seed} / target {}, file has {} / {}",
            ontology.name(target),
            world.seed,
            ontology.name(world.target)
        )));
    }
    let consistent = episode.success_consistent(&world, crate::relation::DISTANCE_THRESHOLD_M);
    println!(
        "replay: policy={policy} success={} steps={} consistent={consistent}",
        episode.success, episode.path_len
    );
    let svg = match svg_out {
        Some(p) => {
            fs::write(p, render_world_svg(&world, &ontology, Some(&episode)))?;
            println!("render written to {}", p.display());
            Some(p.to_path_buf())
        }
        None => None,
    };
    Ok(ReplayReport {
        policy,
        success: episode.success,
        consistent,
        svg,
    })
}
