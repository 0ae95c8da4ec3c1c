//! Seeded household generation.
//!
//! Stationary furniture is placed first on non-overlapping footprints, then
//! each movable object is placed so the geometric edge rule holds against at
//! least one stationary object it shares a ground-truth edge with, when such
//! an edge exists. Placement is retried a bounded number of times before
//! generation fails.

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::relation::{label_edge, CatId, Ontology, RelationGraph, DISTANCE_THRESHOLD_M};
use crate::world::{
    cells_within, plan_path, Cell, GridWorld, MovableObject, Point, RobotState, StationaryObject,
    HEADINGS,
};

/// Default pool of categories eligible to be placed as stationary furniture.
pub const STATIONARY_POOL: [&str; 24] = [
    "countertop",
    "sink",
    "diningtable",
    "coffeetable",
    "sidetable",
    "desk",
    "bed",
    "sofa",
    "armchair",
    "fridge",
    "microwave",
    "toaster",
    "stoveburner",
    "shelf",
    "dresser",
    "nightstand",
    "cabinet",
    "garbagecan",
    "toilet",
    "bathtub",
    "tvstand",
    "ottoman",
    "coffeemachine",
    "washingmachine",
];

/// Parameters of [`generate_world`].
#[derive(Debug, Clone, PartialEq)]
pub struct WorldGenConfig {
    pub width: i32,
    pub height: i32,
    pub n_stationary: usize,
    pub m_movable: usize,
    /// Probability that an anchored movable is placed inside/on its anchor.
    pub receptacle_prob: f64,
    /// Per-object placement retry budget.
    pub max_retries: usize,
    /// Number of short interior wall stubs.
    pub wall_stubs: usize,
    /// Stationary categories that must be placed (e.g. a task's subject).
    pub required_stationary: Vec<CatId>,
    /// Movable categories that must be placed besides the target.
    pub required_movables: Vec<CatId>,
}

impl Default for WorldGenConfig {
    fn default() -> Self {
        Self {
            width: 32,
            height: 32,
            n_stationary: 8,
            m_movable: 6,
            receptacle_prob: 0.35,
            max_retries: 1000,
            wall_stubs: 2,
            required_stationary: Vec::new(),
            required_movables: Vec::new(),
        }
    }
}

const FOOTPRINT_SHAPES: [(i32, i32); 5] = [(1, 2), (2, 1), (2, 2), (1, 3), (3, 1)];

/// Centroid of a footprint's cell centers, in meters.
pub fn footprint_centroid(cells: &[Cell]) -> Point {
    let n = cells.len() as f64;
    let (sx, sy) = cells.iter().fold((0.0, 0.0), |(sx, sy), c| {
        let p = c.center();
        (sx + p.x, sy + p.y)
    });
    Point {
        x: sx / n,
        y: sy / n,
    }
}

fn place_walls(world: &mut GridWorld, cfg: &WorldGenConfig, rng: &mut ChaCha8Rng) {
    for col in 0..world.width {
        world.set_blocked(Cell::new(col, 0), true);
        world.set_blocked(Cell::new(col, world.height - 1), true);
    }
    for row in 0..world.height {
        world.set_blocked(Cell::new(0, row), true);
        world.set_blocked(Cell::new(world.width - 1, row), true);
    }
    for _ in 0..cfg.wall_stubs {
        let len = rng.random_range(3..=6);
        let horizontal = rng.random::<bool>();
        let col = rng.random_range(2..world.width - 2 - if horizontal { len } else { 0 });
        let row = rng.random_range(2..world.height - 2 - if horizontal { 0 } else { len });
        for k in 0..len {
            let c = if horizontal {
                Cell::new(col + k, row)
            } else {
                Cell::new(col, row + k)
            };
            world.set_blocked(c, true);
        }
    }
}

fn try_place_stationary(
    world: &mut GridWorld,
    cat: CatId,
    cfg: &WorldGenConfig,
    rng: &mut ChaCha8Rng,
) -> bool {
    for _ in 0..cfg.max_retries {
        let (fw, fh) = FOOTPRINT_SHAPES[rng.random_range(0..FOOTPRINT_SHAPES.len())];
        let col = rng.random_range(2..world.width - 1 - fw);
        let row = rng.random_range(2..world.height - 1 - fh);
        let cells: Vec<Cell> = (0..fh)
            .flat_map(|dr| (0..fw).map(move |dc| Cell::new(col + dc, row + dr)))
            .collect();
        // Keep a one-cell free margin so every footprint stays approachable.
        let clear = cells.iter().all(|c| {
            (-1..=1).all(|dr| {
                (-1..=1).all(|dc| {
                    let n = Cell::new(c.col + dc, c.row + dr);
                    cells.contains(&n) || (world.in_bounds(n) && world.is_free(n))
                })
            })
        });
        if !clear {
            continue;
        }
        for &c in &cells {
            world.set_blocked(c, true);
        }
        let position = footprint_centroid(&cells);
        world.stationary.push(StationaryObject {
            cat,
            footprint: cells,
            position,
        });
        return true;
    }
    false
}

fn anchored_cells(world: &GridWorld, anchor: Point, taken: &[Cell]) -> Vec<Cell> {
    cells_within(world, anchor, DISTANCE_THRESHOLD_M)
        .into_iter()
        .filter(|c| !taken.contains(c))
        .collect()
}

fn try_place_movable(
    world: &mut GridWorld,
    cat: CatId,
    gt: &RelationGraph,
    cfg: &WorldGenConfig,
    rng: &mut ChaCha8Rng,
) -> bool {
    let taken: Vec<Cell> = world.movable.iter().map(|m| m.cell).collect();
    let mut anchors: Vec<usize> = (0..world.stationary.len())
        .filter(|&i| gt.label(cat, world.stationary[i].cat))
        .collect();
    anchors.shuffle(rng);
    if !anchors.is_empty() {
        for &ai in &anchors {
            let anchor = &world.stationary[ai];
            if rng.random::<f64>() < cfg.receptacle_prob {
                world.movable.push(MovableObject {
                    cat,
                    cell: anchor.footprint[0],
                    parent: Some(ai),
                    position: anchor.position,
                });
                return true;
            }
            let candidates = anchored_cells(world, anchor.position, &taken);
            if candidates.is_empty() {
                continue;
            }
            let cell = candidates[rng.random_range(0..candidates.len())];
            world.movable.push(MovableObject {
                cat,
                cell,
                parent: None,
                position: cell.center(),
            });
            return true;
        }
        // Every anchor failed geometrically; fall back to containment in one.
        let ai = anchors[0];
        world.movable.push(MovableObject {
            cat,
            cell: world.stationary[ai].footprint[0],
            parent: Some(ai),
            position: world.stationary[ai].position,
        });
        return true;
    }
    // No ground-truth edge into the stationary set: uniform over free cells.
    for _ in 0..cfg.max_retries {
        let col = rng.random_range(1..world.width - 1);
        let row = rng.random_range(1..world.height - 1);
        let cell = Cell::new(col, row);
        if world.is_free(cell) && !taken.contains(&cell) {
            world.movable.push(MovableObject {
                cat,
                cell,
                parent: None,
                position: cell.center(),
            });
            return true;
        }
    }
    false
}

/// Validates the anchored-placement contract: every movable that shares a
/// ground-truth edge with some placed stationary object satisfies the
/// geometric edge rule against at least one such object.
pub fn placement_ok(world: &GridWorld, gt: &RelationGraph) -> bool {
    world.movable.iter().all(|m| {
        let linked: Vec<&StationaryObject> = world
            .stationary
            .iter()
            .filter(|s| gt.label(m.cat, s.cat))
            .collect();
        if linked.is_empty() {
            return true;
        }
        linked.iter().any(|s| {
            let receptacle = m.parent.map(|p| world.stationary[p].cat) == Some(s.cat);
            label_edge(m.position, s.position, receptacle)
        })
    })
}

fn pick_categories(
    ontology: &Ontology,
    gt: &RelationGraph,
    target: CatId,
    cfg: &WorldGenConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<CatId>, Vec<CatId>)> {
    let mut pool: Vec<CatId> = STATIONARY_POOL
        .iter()
        .filter_map(|n| ontology.id(n))
        .filter(|&c| c != target)
        .collect();
    if pool.len() < cfg.n_stationary {
        return Err(Error::WorldGen(format!(
            "stationary pool has {} categories, need {}",
            pool.len(),
            cfg.n_stationary
        )));
    }
    pool.shuffle(rng);
    let mut stationary: Vec<CatId> = cfg.required_stationary.clone();
    stationary.retain(|c| *c != target);
    stationary.dedup();
    if stationary.len() > cfg.n_stationary {
        return Err(Error::WorldGen(format!(
            "{} required stationaries exceed n = {}",
            stationary.len(),
            cfg.n_stationary
        )));
    }
    for &c in &pool {
        if stationary.len() == cfg.n_stationary {
            break;
        }
        if !stationary.contains(&c) {
            stationary.push(c);
        }
    }
    // Guarantee the target has an anchor when the graph provides one.
    let target_anchors: Vec<CatId> = pool
        .iter()
        .copied()
        .filter(|&c| gt.label(target, c))
        .collect();
    if !target_anchors.is_empty() && !stationary.iter().any(|&c| gt.label(target, c)) {
        let slot = stationary
            .iter()
            .position(|c| !cfg.required_stationary.contains(c))
            .unwrap_or(stationary.len() - 1);
        stationary[slot] = target_anchors[0];
    }

    let mut movable = vec![target];
    for &c in &cfg.required_movables {
        if c != target && !movable.contains(&c) && !stationary.contains(&c) {
            movable.push(c);
        }
    }
    let mut correlated: Vec<CatId> = ontology
        .ids()
        .filter(|&c| {
            c != target
                && !movable.contains(&c)
                && !stationary.contains(&c)
                && !STATIONARY_POOL.contains(&ontology.name(c))
                && stationary.iter().any(|&s| gt.label(c, s))
        })
        .collect();
    correlated.shuffle(rng);
    let mut rest: Vec<CatId> = ontology
        .ids()
        .filter(|&c| {
            c != target
                && !movable.contains(&c)
                && !stationary.contains(&c)
                && !STATIONARY_POOL.contains(&ontology.name(c))
                && !correlated.contains(&c)
        })
        .collect();
    rest.shuffle(rng);
    let fill = cfg.m_movable.saturating_sub(movable.len());
    movable.extend(correlated.into_iter().chain(rest).take(fill));
    if movable.len() < cfg.m_movable {
        return Err(Error::WorldGen(format!(
            "ontology provides {} movable categories, need {}",
            movable.len(),
            cfg.m_movable
        )));
    }
    Ok((stationary, movable))
}

/// Generates a deterministic household for `seed` containing `target` as a
/// hidden movable object.
pub fn generate_world(
    seed: u64,
    ontology: &Ontology,
    gt: &RelationGraph,
    cfg: &WorldGenConfig,
    target: CatId,
) -> Result<GridWorld> {
    if cfg.n_stationary + cfg.m_movable > ontology.len() {
        return Err(Error::WorldGen(format!(
            "requested {} objects from a {}-category ontology",
            cfg.n_stationary + cfg.m_movable,
            ontology.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..50 {
        match generate_once(seed, ontology, gt, cfg, target, &mut rng) {
            Ok(world) => return Ok(world),
            Err(_) if attempt < 49 => continue,
            Err(e) => return Err(e),
        }
    }
    unreachable!()
}

fn generate_once(
    seed: u64,
    ontology: &Ontology,
    gt: &RelationGraph,
    cfg: &WorldGenConfig,
    target: CatId,
    rng: &mut ChaCha8Rng,
) -> Result<GridWorld> {
    let (stationary_cats, movable_cats) = pick_categories(ontology, gt, target, cfg, rng)?;
    let mut world = GridWorld::empty(cfg.width, cfg.height, target, seed);
    place_walls(&mut world, cfg, rng);
    for cat in stationary_cats {
        if !try_place_stationary(&mut world, cat, cfg, rng) {
            return Err(Error::WorldGen(format!(
                "could not place stationary `{}` after {} retries",
                ontology.name(cat),
                cfg.max_retries
            )));
        }
    }
    for cat in movable_cats {
        if !try_place_movable(&mut world, cat, gt, cfg, rng) {
            return Err(Error::WorldGen(format!(
                "could not place movable `{}` after {} retries",
                ontology.name(cat),
                cfg.max_retries
            )));
        }
    }
    if !placement_ok(&world, gt) {
        return Err(Error::WorldGen("placement validator rejected layout".into()));
    }

    // Robot start: a free cell outside the target's success region, from
    // which that region is reachable.
    let target_pos = world.target_object().position;
    let region = cells_within(&world, target_pos, DISTANCE_THRESHOLD_M);
    if region.is_empty() {
        return Err(Error::WorldGen("target success region is empty".into()));
    }
    for _ in 0..cfg.max_retries {
        let col = rng.random_range(1..world.width - 1);
        let row = rng.random_range(1..world.height - 1);
        let cell = Cell::new(col, row);
        if !world.is_free(cell) || cell.center().dist(target_pos) < 1.5 {
            continue;
        }
        let heading = HEADINGS[rng.random_range(0..HEADINGS.len())];
        let start = RobotState::new(cell, heading);
        if plan_path(&world, start, &region).is_some() {
            world.start = start;
            return Ok(world);
        }
    }
    Err(Error::WorldGen("no valid robot start found".into()))
}
