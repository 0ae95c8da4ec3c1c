//! Experiment configuration: one TOML file, environment-variable overrides
//! (`COSEARCH_<SECTION>_<KEY>`), and CLI flag overrides on top.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::{ModelConfig, TrainConfig};
use crate::search::SearchConfig;
use crate::world::{DetectorConfig, WorldGenConfig};

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    pub corpus: PathBuf,
    pub ontology: PathBuf,
    pub out_dir: PathBuf,
    pub checkpoint: PathBuf,
}

impl Default for PathsSection {
    fn default() -> Self {
        Self {
            corpus: "crates/core/data/corpus.tsv".into(),
            ontology: "crates/core/data/ontology.txt".into(),
            out_dir: "out".into(),
            checkpoint: "out/model.ckpt".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub hash_dim: usize,
    pub embed_dim: usize,
    pub layers: usize,
    pub heads: usize,
    pub head_dim: usize,
    pub predictor_hidden: usize,
    pub hash_seed: u64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let m = ModelConfig::default();
        Self {
            hash_dim: m.hash_dim,
            embed_dim: m.embed_dim,
            layers: m.layers,
            heads: m.heads,
            head_dim: m.head_dim,
            predictor_hidden: m.predictor_hidden,
            hash_seed: m.hash_seed,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub epochs: usize,
    pub negative_ratio: usize,
    pub seed: u64,
    pub split: f64,
    pub weight_decay: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            negative_ratio: t.negative_ratio,
            seed: t.seed,
            split: t.split,
            weight_decay: t.weight_decay,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct WorldSection {
    pub width: i32,
    pub height: i32,
    pub n_stationary: usize,
    pub m_movable: usize,
    pub receptacle_prob: f64,
    pub wall_stubs: usize,
    /// Explicit world seeds; combined with `seed_count`/`seed_start` when
    /// empty.
    pub seeds: Vec<u64>,
    pub seed_start: u64,
    pub seed_count: u64,
}

impl Default for WorldSection {
    fn default() -> Self {
        let w = WorldGenConfig::default();
        Self {
            width: w.width,
            height: w.height,
            n_stationary: w.n_stationary,
            m_movable: w.m_movable,
            receptacle_prob: w.receptacle_prob,
            wall_stubs: w.wall_stubs,
            seeds: Vec::new(),
            seed_start: 0,
            seed_count: 10,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub policies: Vec<String>,
    pub targets: Vec<String>,
    pub step_limit: usize,
    pub rerank_per_detection: bool,
    pub write_traces: bool,
}

impl Default for SearchSection {
    fn default() -> Self {
        Self {
            policies: vec!["gnn".into(), "random".into(), "oracle".into()],
            targets: vec![
                "knife".into(),
                "mug".into(),
                "book".into(),
                "plate".into(),
                "apple".into(),
            ],
            step_limit: 400,
            rerank_per_detection: false,
            write_traces: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    pub range_m: f64,
    pub fov_deg: f64,
    pub noise_m: f64,
    pub p_fn: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        let d = DetectorConfig::default();
        Self {
            range_m: d.range_m,
            fov_deg: d.fov_deg,
            noise_m: d.noise_m,
            p_fn: d.p_fn,
        }
    }
}

/// Full experiment configuration.
#[derive(Debug, Clone, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub paths: PathsSection,
    pub model: ModelSection,
    pub train: TrainSection,
    pub world: WorldSection,
    pub search: SearchSection,
    pub detector: DetectorSection,
}

impl ExperimentConfig {
    /// Loads a TOML file, then applies environment overrides.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.apply_env();
        Ok(cfg)
    }

    /// Defaults plus environment overrides, for running without a file.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        cfg.apply_env();
        cfg
    }

    /// Applies `COSEARCH_<SECTION>_<KEY>` environment overrides. Malformed
    /// values are ignored rather than fatal.
    pub fn apply_env(&mut self) {
        fn over<T: std::str::FromStr>(key: &str, slot: &mut T) {
            if let Ok(v) = std::env::var(key) {
                if let Ok(parsed) = v.parse::<T>() {
                    *slot = parsed;
                }
            }
        }
        over("COSEARCH_PATHS_CORPUS", &mut self.paths.corpus);
        over("COSEARCH_PATHS_ONTOLOGY", &mut self.paths.ontology);
        over("COSEARCH_PATHS_OUT_DIR", &mut self.paths.out_dir);
        over("COSEARCH_PATHS_CHECKPOINT", &mut self.paths.checkpoint);
        over("COSEARCH_MODEL_HASH_DIM", &mut self.model.hash_dim);
        over("COSEARCH_MODEL_EMBED_DIM", &mut self.model.embed_dim);
        over("COSEARCH_MODEL_LAYERS", &mut self.model.layers);
        over("COSEARCH_MODEL_HEADS", &mut self.model.heads);
        over("COSEARCH_MODEL_HEAD_DIM", &mut self.model.head_dim);
        over(
            "COSEARCH_MODEL_PREDICTOR_HIDDEN",
            &mut self.model.predictor_hidden,
        );
        over("COSEARCH_MODEL_HASH_SEED", &mut self.model.hash_seed);
        over("COSEARCH_TRAIN_LEARNING_RATE", &mut self.train.learning_rate);
        over("COSEARCH_TRAIN_EPOCHS", &mut self.train.epochs);
        over(
            "COSEARCH_TRAIN_NEGATIVE_RATIO",
            &mut self.train.negative_ratio,
        );
        over("COSEARCH_TRAIN_SEED", &mut self.train.seed);
        over("COSEARCH_TRAIN_SPLIT", &mut self.train.split);
        over("COSEARCH_TRAIN_WEIGHT_DECAY", &mut self.train.weight_decay);
        over("COSEARCH_WORLD_WIDTH", &mut self.world.width);
        over("COSEARCH_WORLD_HEIGHT", &mut self.world.height);
        over("COSEARCH_WORLD_N_STATIONARY", &mut self.world.n_stationary);
        over("COSEARCH_WORLD_M_MOVABLE", &mut self.world.m_movable);
        over(
            "COSEARCH_WORLD_RECEPTACLE_PROB",
            &mut self.world.receptacle_prob,
        );
        over("COSEARCH_WORLD_WALL_STUBS", &mut self.world.wall_stubs);
        over("COSEARCH_WORLD_SEED_START", &mut self.world.seed_start);
        over("COSEARCH_WORLD_SEED_COUNT", &mut self.world.seed_count);
        over("COSEARCH_SEARCH_STEP_LIMIT", &mut self.search.step_limit);
        over(
            "COSEARCH_SEARCH_RERANK_PER_DETECTION",
            &mut self.search.rerank_per_detection,
        );
        over("COSEARCH_SEARCH_WRITE_TRACES", &mut self.search.write_traces);
        over("COSEARCH_DETECTOR_RANGE_M", &mut self.detector.range_m);
        over("COSEARCH_DETECTOR_FOV_DEG", &mut self.detector.fov_deg);
        over("COSEARCH_DETECTOR_NOISE_M", &mut self.detector.noise_m);
        over("COSEARCH_DETECTOR_P_FN", &mut self.detector.p_fn);
        if let Ok(v) = std::env::var("COSEARCH_SEARCH_POLICIES") {
            self.search.policies = v.split(',').map(str::to_string).collect();
        }
        if let Ok(v) = std::env::var("COSEARCH_SEARCH_TARGETS") {
            self.search.targets = v.split(',').map(str::to_string).collect();
        }
    }

    /// Numeric-range and path-existence validation. `need_corpus` controls
    /// whether the corpus/ontology paths must exist for this command.
    pub fn validate(&self, need_corpus: bool) -> Result<()> {
        let cfg = self;
        if need_corpus {
            for (label, p) in [
                ("corpus", &cfg.paths.corpus),
                ("ontology", &cfg.paths.ontology),
            ] {
                if !p.exists() {
                    return Err(Error::Config(format!(
                        "{label} path does not exist: {}",
                        p.display()
                    )));
                }
            }
        }
        if cfg.train.learning_rate <= 0.0 {
            return Err(Error::Config("train.learning_rate must be > 0".into()));
        }
        if cfg.train.negative_ratio < 1 {
            return Err(Error::Config("train.negative_ratio must be ≥ 1".into()));
        }
        if !(cfg.train.split > 0.0 && cfg.train.split < 1.0) {
            return Err(Error::Config("train.split must lie in (0, 1)".into()));
        }
        if cfg.world.width < 8 || cfg.world.height < 8 {
            return Err(Error::Config("world must be at least 8x8 cells".into()));
        }
        if cfg.world.n_stationary == 0 || cfg.world.m_movable == 0 {
            return Err(Error::Config("world needs stationary and movable objects".into()));
        }
        if self.seeds().is_empty() {
            return Err(Error::Config("seed list must be non-empty".into()));
        }
        if cfg.search.targets.is_empty() {
            return Err(Error::Config("search.targets must be non-empty".into()));
        }
        if cfg.search.policies.is_empty() {
            return Err(Error::Config("search.policies must be non-empty".into()));
        }
        if !(cfg.detector.fov_deg > 0.0 && cfg.detector.fov_deg <= 360.0) {
            return Err(Error::Config("detector.fov_deg must lie in (0, 360]".into()));
        }
        if cfg.detector.range_m <= 0.0 || cfg.detector.noise_m < 0.0 {
            return Err(Error::Config("detector geometry must be positive".into()));
        }
        if !(0.0..1.0).contains(&cfg.detector.p_fn) {
            return Err(Error::Config("detector.p_fn must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// Effective world seed list.
    pub fn seeds(&self) -> Vec<u64> {
        if !self.world.seeds.is_empty() {
            return self.world.seeds.clone();
        }
        (self.world.seed_start..self.world.seed_start + self.world.seed_count).collect()
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            hash_dim: self.model.hash_dim,
            embed_dim: self.model.embed_dim,
            layers: self.model.layers,
            heads: self.model.heads,
            head_dim: self.model.head_dim,
            predictor_hidden: self.model.predictor_hidden,
            hash_seed: self.model.hash_seed,
            ..ModelConfig::default()
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.train.learning_rate,
            epochs: self.train.epochs,
            negative_ratio: self.train.negative_ratio,
            seed: self.train.seed,
            split: self.train.split,
            weight_decay: self.train.weight_decay,
        }
    }

    pub fn world_gen_config(&self) -> WorldGenConfig {
        WorldGenConfig {
            width: self.world.width,
            height: self.world.height,
            n_stationary: self.world.n_stationary,
            m_movable: self.world.m_movable,
            receptacle_prob: self.world.receptacle_prob,
            wall_stubs: self.world.wall_stubs,
            ..WorldGenConfig::default()
        }
    }

    pub fn detector_config(&self) -> DetectorConfig {
        DetectorConfig {
            range_m: self.detector.range_m,
            fov_deg: self.detector.fov_deg,
            noise_m: self.detector.noise_m,
            p_fn: self.detector.p_fn,
        }
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            step_limit: self.search.step_limit,
            detector: self.detector_config(),
            rerank_per_detection: self.search.rerank_per_detection,
            ..SearchConfig::default()
        }
    }
}
