//! Instruction-pipeline integration: failure paths the happy-path
//! acceptance fixtures never hit.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use cosearch::commands::{load_graph, run_instruction};
use cosearch::config::ExperimentConfig;
use cosearch::gnn::{train, LinkModel, ModelConfig, TrainConfig};
use cosearch::relation::Ontology;
use cosearch::task::{
    compile_problem, execute_plan, plan_task, GoalSpec, Plan, ProblemObject, TaskAction,
};
use cosearch::world::load_world;

fn data_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

struct Fixture {
    cfg: ExperimentConfig,
    ontology: Ontology,
    model: LinkModel,
}

fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let mut cfg = ExperimentConfig::default();
        cfg.paths.corpus = data_path("corpus.tsv");
        cfg.paths.ontology = data_path("ontology.txt");
        let (ontology, graph) = load_graph(&cfg).unwrap();
        let mcfg = ModelConfig {
            hash_dim: 32,
            embed_dim: 8,
            layers: 2,
            heads: 2,
            head_dim: 16,
            predictor_hidden: 16,
            ..ModelConfig::default()
        };
        let tcfg = TrainConfig {
            epochs: 150,
            ..TrainConfig::default()
        };
        let model = train(&graph, &ontology, mcfg, &tcfg).unwrap().model;
        Fixture {
            cfg,
            ontology,
            model,
        }
    })
}

#[test]
fn zero_step_limit_fails_at_the_search_step() {
    let f = fixture();
    let world = load_world(&data_path("fixtures/cut.world"), &f.ontology).unwrap();
    let mut cfg = f.cfg.clone();
    cfg.search.step_limit = 0;
    let (report, _, _) =
        run_instruction(&cfg, "cut the bread with a knife", &world, &f.model, &f.ontology, &[])
            .unwrap();
    assert!(!report.exec.nav_success, "navigation must fail");
    assert!(!report.exec.exe_success);
    let failed = report.exec.steps.iter().find(|s| !s.ok).unwrap();
    assert!(failed.op.starts_with("search("), "failed at {}", failed.op);
    assert!(failed.detail.contains("budget"), "{}", failed.detail);
}

#[test]
fn manipulation_far_from_object_names_the_precondition() {
    let f = fixture();
    let world = load_world(&data_path("fixtures/cut.world"), &f.ontology).unwrap();
    let goal = GoalSpec::new(
        TaskAction::Cut,
        f.ontology.id("knife").unwrap(),
        f.ontology.id("bread").unwrap(),
    )
    .unwrap();
    let objects = vec![
        ProblemObject {
            name: "bread".into(),
            location_known: true,
        },
        ProblemObject {
            name: "knife".into(),
            location_known: true,
        },
    ];
    let problem = compile_problem(&goal, &f.ontology, &objects).unwrap();
    // Plan stripped of its movement: pick without going anywhere first.
    let pick_idx = problem
        .ops
        .iter()
        .position(|op| op.display(&problem.objects) == "pick(knife)")
        .unwrap();
    let plan = Plan {
        steps: vec![pick_idx],
    };
    let report = execute_plan(
        &world,
        &goal,
        &problem,
        &plan,
        &[f.ontology.id("knife").unwrap(), f.ontology.id("bread").unwrap()],
        &f.model,
        &f.ontology,
        &f.cfg.search_config(),
    )
    .unwrap();
    let failed = report.steps.iter().find(|s| !s.ok).unwrap();
    assert!(
        failed.detail.contains("precondition (at knife)"),
        "failure should name the literal: {}",
        failed.detail
    );
    assert!(!report.exe_success);
}

#[test]
fn full_cut_pipeline_reports_world_state() {
    let f = fixture();
    let world = load_world(&data_path("fixtures/cut.world"), &f.ontology).unwrap();
    let (report, _, _) =
        run_instruction(&f.cfg, "cut the bread with a knife", &world, &f.model, &f.ontology, &[])
            .unwrap();
    assert!(report.exec.nav_success && report.exec.exe_success);
    assert!(
        report.exec.facts.iter().any(|f| f == "sliced(bread)"),
        "world ledger must show the effect: {:?}",
        report.exec.facts
    );
    // The searched object was actually hidden: a search step ran.
    assert!(report.plan_lines.iter().any(|l| l.starts_with("search(")));
}

#[test]
fn plans_without_missing_objects_have_no_search_step() {
    let f = fixture();
    let goal = GoalSpec::new(
        TaskAction::Cut,
        f.ontology.id("knife").unwrap(),
        f.ontology.id("bread").unwrap(),
    )
    .unwrap();
    let objects = vec![
        ProblemObject {
            name: "bread".into(),
            location_known: true,
        },
        ProblemObject {
            name: "knife".into(),
            location_known: true,
        },
    ];
    let problem = compile_problem(&goal, &f.ontology, &objects).unwrap();
    let plan = plan_task(&problem).unwrap();
    assert!(plan
        .render(&problem)
        .iter()
        .all(|l| !l.starts_with("search(")));
}
