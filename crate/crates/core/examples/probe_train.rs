use cosearch::commands::{load_graph, run_instruction};
use cosearch::config::ExperimentConfig;
use cosearch::gnn::train;
use cosearch::relation::CatId;
use cosearch::world::{generate_world, save_world, WorldGenConfig};
use std::path::Path;

fn main() {
    let mut cfg = ExperimentConfig::default();
    cfg.paths.corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus.tsv");
    cfg.paths.ontology = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/ontology.txt");
    let (onto, graph) = load_graph(&cfg).unwrap();
    let out = train(&graph, &onto, cfg.model_config(), &cfg.train_config()).unwrap();
    let model = out.model;

    let fixtures: [(&str, &str, &str, &str, &str); 4] = [
        ("cut", "cut the bread with a knife", "bread", "knife", "countertop"),
        ("cook", "cook the potato with the microwave", "potato", "", "microwave"),
        ("clean", "clean the mug inside the sink", "mug", "", "sink"),
        ("pick_place", "pick the apple and place it on the plate", "apple", "plate", "diningtable"),
    ];
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/fixtures");
    std::fs::create_dir_all(&dir).unwrap();
    for (name, instruction, target, movable_subject, req_stationary) in fixtures {
        let target_id = onto.id(target).unwrap();
        let mut gen = WorldGenConfig::default();
        gen.required_stationary = vec![onto.id(req_stationary).unwrap()];
        if !movable_subject.is_empty() {
            gen.required_movables = vec![onto.id(movable_subject).unwrap()];
        }
        let mut found = None;
        for seed in 0..40u64 {
            let Ok(world) = generate_world(seed, &onto, &graph, &gen, target_id) else {
                continue;
            };
            let extra: Vec<CatId> = Vec::new();
            match run_instruction(&cfg, instruction, &world, &model, &onto, &extra) {
                Ok((report, _, _)) if report.exec.nav_success && report.exec.exe_success => {
                    found = Some((seed, world));
                    break;
                }
                Ok((report, _, _)) => {
                    if seed < 5 {
                        println!(
                            "  {name} seed {seed}: nav={} exe={} last={:?}",
                            report.exec.nav_success,
                            report.exec.exe_success,
                            report.exec.steps.last().map(|s| (&s.op, &s.detail))
                        );
                    }
                }
                Err(e) => {
                    if seed < 5 {
                        println!("  {name} seed {seed}: error {e}");
                    }
                }
            }
        }
        match found {
            Some((seed, world)) => {
                let path = dir.join(format!("{name}.world"));
                save_world(&path, &world, &onto).unwrap();
                println!("{name}: seed {seed} -> {}", path.display());
            }
            None => println!("{name}: NO WORKING SEED FOUND"),
        }
    }
}
