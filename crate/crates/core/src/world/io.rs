//! World files: structured text, bit-exact round trip.
//!
//! ```text
//! # cosearch world v1
//! grid 32 32
//! seed 7
//! start 5 6 90
//! target knife
//! blocked 4 11
//! stationary countertop 4,5 5,5 4,6 5,6
//! movable knife 6 7 -
//! movable mug 9 9 countertop
//! ```
//!
//! `blocked` lines list only cells that are not part of any footprint.
//! A movable's last field is its receptacle parent's category or `-`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::relation::Ontology;
use crate::world::{Cell, GridWorld, MovableObject, RobotState, StationaryObject};

const MAGIC: &str = "# cosearch world v1";

/// Serializes a world to its canonical text form.
pub fn write_world(world: &GridWorld, ontology: &Ontology) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("grid {} {}\n", world.width, world.height));
    out.push_str(&format!("seed {}\n", world.seed));
    out.push_str(&format!(
        "start {} {} {}\n",
        world.start.cell.col, world.start.cell.row, world.start.heading
    ));
    out.push_str(&format!("target {}\n", ontology.name(world.target)));
    let footprint_cells: std::collections::BTreeSet<Cell> = world
        .stationary
        .iter()
        .flat_map(|s| s.footprint.iter().copied())
        .collect();
    for row in 0..world.height {
        for col in 0..world.width {
            let c = Cell::new(col, row);
            if world.is_blocked(c) && !footprint_cells.contains(&c) {
                out.push_str(&format!("blocked {} {}\n", col, row));
            }
        }
    }
    for s in &world.stationary {
        let cells: Vec<String> = s
            .footprint
            .iter()
            .map(|c| format!("{},{}", c.col, c.row))
            .collect();
        out.push_str(&format!(
            "stationary {} {}\n",
            ontology.name(s.cat),
            cells.join(" ")
        ));
    }
    for m in &world.movable {
        let parent = match m.parent {
            Some(p) => ontology.name(world.stationary[p].cat).to_string(),
            None => "-".to_string(),
        };
        out.push_str(&format!(
            "movable {} {} {} {}\n",
            ontology.name(m.cat),
            m.cell.col,
            m.cell.row,
            parent
        ));
    }
    out
}

/// Parses the canonical world text form.
pub fn read_world(text: &str, ontology: &Ontology) -> Result<GridWorld> {
    let err = |line: usize, msg: String| Error::Parse {
        path: "<world>".into(),
        line,
        msg,
    };
    let mut world: Option<GridWorld> = None;
    let mut seed = 0u64;
    let mut start: Option<RobotState> = None;
    let mut target = None;
    let mut blocked: Vec<Cell> = Vec::new();
    let mut stationary: Vec<StationaryObject> = Vec::new();
    let mut movable_lines: Vec<(usize, String, Cell, String)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap();
        let rest: Vec<&str> = parts.collect();
        let int = |s: &str| -> Result<i32> {
            s.parse()
                .map_err(|_| err(lineno, format!("bad integer `{s}`")))
        };
        match key {
            "grid" => {
                if rest.len() != 2 {
                    return Err(err(lineno, "grid takes width height".into()));
                }
                let (w, h) = (int(rest[0])?, int(rest[1])?);
                if w < 3 || h < 3 {
                    return Err(err(lineno, format!("grid {w}x{h} too small")));
                }
                world = Some(GridWorld::empty(w, h, crate::relation::CatId(0), 0));
            }
            "seed" => {
                seed = rest
                    .first()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(lineno, "seed takes one integer".into()))?;
            }
            "start" => {
                if rest.len() != 3 {
                    return Err(err(lineno, "start takes col row heading".into()));
                }
                let heading: u16 = rest[2]
                    .parse()
                    .map_err(|_| err(lineno, format!("bad heading `{}`", rest[2])))?;
                if heading >= 360 || heading % 45 != 0 {
                    return Err(err(lineno, format!("heading {heading} off the lattice")));
                }
                start = Some(RobotState::new(
                    Cell::new(int(rest[0])?, int(rest[1])?),
                    heading,
                ));
            }
            "target" => {
                let name = rest
                    .first()
                    .ok_or_else(|| err(lineno, "target takes a category".into()))?;
                target = Some(ontology.require(name)?);
            }
            "blocked" => {
                if rest.len() != 2 {
                    return Err(err(lineno, "blocked takes col row".into()));
                }
                blocked.push(Cell::new(int(rest[0])?, int(rest[1])?));
            }
            "stationary" => {
                let name = rest
                    .first()
                    .ok_or_else(|| err(lineno, "stationary takes a category".into()))?;
                let cat = ontology.require(name)?;
                let mut cells = Vec::new();
                for spec in &rest[1..] {
                    let (c, r) = spec
                        .split_once(',')
                        .ok_or_else(|| err(lineno, format!("bad cell `{spec}`")))?;
                    cells.push(Cell::new(int(c)?, int(r)?));
                }
                if cells.is_empty() {
                    return Err(err(lineno, "stationary needs footprint cells".into()));
                }
                let position = super::gen::footprint_centroid(&cells);
                stationary.push(StationaryObject {
                    cat,
                    footprint: cells,
                    position,
                });
            }
            "movable" => {
                if rest.len() != 4 {
                    return Err(err(lineno, "movable takes name col row parent".into()));
                }
                let cell = Cell::new(int(rest[1])?, int(rest[2])?);
                movable_lines.push((lineno, rest[0].to_string(), cell, rest[3].to_string()));
            }
            other => return Err(err(lineno, format!("unknown key `{other}`"))),
        }
    }

    let mut world = world.ok_or_else(|| err(0, "missing grid line".into()))?;
    world.seed = seed;
    world.start = start.ok_or_else(|| err(0, "missing start line".into()))?;
    world.target = target.ok_or_else(|| err(0, "missing target line".into()))?;
    for c in blocked {
        if !world.in_bounds(c) {
            return Err(err(0, format!("blocked cell {c:?} out of bounds")));
        }
        world.set_blocked(c, true);
    }
    for s in &stationary {
        for &c in &s.footprint {
            if !world.in_bounds(c) {
                return Err(err(0, format!("footprint cell {c:?} out of bounds")));
            }
            world.set_blocked(c, true);
        }
    }
    world.stationary = stationary;
    for (lineno, name, cell, parent) in movable_lines {
        let cat = ontology.require(&name)?;
        let parent_idx = if parent == "-" {
            None
        } else {
            let pcat = ontology.require(&parent)?;
            Some(
                world
                    .stationary
                    .iter()
                    .position(|s| s.cat == pcat)
                    .ok_or_else(|| err(lineno, format!("parent `{parent}` not stationary")))?,
            )
        };
        let position = match parent_idx {
            Some(p) => world.stationary[p].position,
            None => cell.center(),
        };
        if parent_idx.is_none() && !world.is_free(cell) {
            return Err(err(lineno, format!("movable `{name}` on a blocked cell")));
        }
        world.movable.push(MovableObject {
            cat,
            cell,
            parent: parent_idx,
            position,
        });
    }
    if world.movable.iter().filter(|m| m.cat == world.target).count() != 1 {
        return Err(err(
            0,
            "target category must appear exactly once among movables".into(),
        ));
    }
    if !world.is_free(world.start.cell) {
        return Err(err(0, "start cell is blocked".into()));
    }
    Ok(world)
}

pub fn save_world(path: &Path, world: &GridWorld, ontology: &Ontology) -> Result<()> {
    fs::write(path, write_world(world, ontology))?;
    Ok(())
}

pub fn load_world(path: &Path, ontology: &Ontology) -> Result<GridWorld> {
    let text = fs::read_to_string(path)?;
    read_world(&text, ontology).map_err(|e| match e {
        Error::Parse { line, msg, .. } => Error::Parse {
            path: path.display().to_string(),
            line,
            msg,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::RelationGraph;
    use crate::world::{generate_world, WorldGenConfig, STATIONARY_POOL};

    #[test]
    fn round_trip_is_bit_exact() {
        let mut onto = Ontology::new();
        for n in ["knife", "bread", "mug", "book", "apple", "fork"] {
            onto.intern(n).unwrap();
        }
        for n in STATIONARY_POOL {
            onto.intern(n).unwrap();
        }
        let mut gt = RelationGraph::new(onto.ids().collect());
        gt.set_edge(
            onto.id("knife").unwrap(),
            onto.id("countertop").unwrap(),
            true,
            9,
        );
        let world = generate_world(
            3,
            &onto,
            &gt,
            &WorldGenConfig::default(),
            onto.id("knife").unwrap(),
        )
        .unwrap();
        let text = write_world(&world, &onto);
        let reloaded = read_world(&text, &onto).unwrap();
        assert_eq!(world, reloaded);
        assert_eq!(text, write_world(&reloaded, &onto));
    }

    #[test]
    fn unknown_category_in_world_file_errors() {
        let onto = Ontology::new();
        let text = "grid 8 8\nseed 0\nstart 1 1 0\ntarget ghost\n";
        assert!(read_world(text, &onto).is_err());
    }
}
