//! Deterministic grid-world household.
//!
//! The map is a lattice of 0.25 m cells. The robot moves one cell per
//! `MoveAhead` (diagonals included) and rotates in place by 45°. Perception
//! is a simulated range/field-of-view detector with grid-ray line of sight
//! and bounded position noise.

mod gen;
mod io;

pub use gen::{footprint_centroid, generate_world, placement_ok, WorldGenConfig, STATIONARY_POOL};
pub use io::{load_world, read_world, save_world, write_world};

use std::collections::VecDeque;

use rand::RngExt;
use rand_chacha::ChaCha8Rng;

use crate::relation::CatId;

/// Edge length of one grid cell in meters (`MoveAhead` distance).
pub const CELL_SIZE_M: f64 = 0.25;

/// 2D point in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn dist(self, other: Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Grid cell address (column, row).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub col: i32,
    pub row: i32,
}

impl Cell {
    pub fn new(col: i32, row: i32) -> Self {
        Self { col, row }
    }

    /// Center of the cell in meters.
    pub fn center(self) -> Point {
        Point {
            x: (self.col as f64 + 0.5) * CELL_SIZE_M,
            y: (self.row as f64 + 0.5) * CELL_SIZE_M,
        }
    }
}

/// Cell containing a metric point.
pub fn cell_of(p: Point) -> Cell {
    Cell {
        col: (p.x / CELL_SIZE_M).floor() as i32,
        row: (p.y / CELL_SIZE_M).floor() as i32,
    }
}

/// Primitive robot actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    MoveAhead,
    RotateLeft,
    RotateRight,
}

/// Canonical expansion order for path search.
pub const ACTIONS: [Action; 3] = [Action::MoveAhead, Action::RotateLeft, Action::RotateRight];

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Action::MoveAhead => "MoveAhead",
            Action::RotateLeft => "RotateLeft",
            Action::RotateRight => "RotateRight",
        };
        f.pad(s)
    }
}

impl std::str::FromStr for Action {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "MoveAhead" => Ok(Action::MoveAhead),
            "RotateLeft" => Ok(Action::RotateLeft),
            "RotateRight" => Ok(Action::RotateRight),
            other => Err(crate::Error::Invalid(format!("unknown action `{other}`"))),
        }
    }
}

/// Robot pose: cell plus heading on the 45° lattice.
///
/// Heading 0° points along +x; positive rotation is counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RobotState {
    pub cell: Cell,
    pub heading: u16,
}

impl RobotState {
    pub fn new(cell: Cell, heading: u16) -> Self {
        debug_assert!(heading < 360 && heading % 45 == 0);
        Self { cell, heading }
    }

    pub fn position(&self) -> Point {
        self.cell.center()
    }

    fn direction(&self) -> (i32, i32) {
        match self.heading {
            0 => (1, 0),
            45 => (1, 1),
            90 => (0, 1),
            135 => (-1, 1),
            180 => (-1, 0),
            225 => (-1, -1),
            270 => (0, -1),
            315 => (1, -1),
            h => unreachable!("heading {h} off the 45° lattice"),
        }
    }
}

/// A piece of furniture or fixture with a known, blocking footprint.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryObject {
    pub cat: CatId,
    /// Blocked cells; non-empty, position is their centroid.
    pub footprint: Vec<Cell>,
    pub position: Point,
}

/// A hidden object the robot may search for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovableObject {
    pub cat: CatId,
    pub cell: Cell,
    /// Index into `stationary` when placed inside or on top of it.
    pub parent: Option<usize>,
    pub position: Point,
}

/// Discrete household: occupancy and placed objects.
///
/// Stationary objects and the map are world knowledge; movable positions
/// are hidden from policies and reachable only through [`detect`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridWorld {
    pub width: i32,
    pub height: i32,
    blocked: Vec<bool>,
    pub stationary: Vec<StationaryObject>,
    pub movable: Vec<MovableObject>,
    pub target: CatId,
    pub start: RobotState,
    pub seed: u64,
}

impl GridWorld {
    pub fn empty(width: i32, height: i32, target: CatId, seed: u64) -> Self {
        Self {
            width,
            height,
            blocked: vec![false; (width * height) as usize],
            stationary: Vec::new(),
            movable: Vec::new(),
            target,
            start: RobotState::new(Cell::new(1, 1), 0),
            seed,
        }
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.col >= 0 && cell.row >= 0 && cell.col < self.width && cell.row < self.height
    }

    pub fn set_blocked(&mut self, cell: Cell, blocked: bool) {
        assert!(self.in_bounds(cell));
        let i = (cell.row * self.width + cell.col) as usize;
        self.blocked[i] = blocked;
    }

    /// Out-of-bounds cells read as blocked.
    pub fn is_blocked(&self, cell: Cell) -> bool {
        if !self.in_bounds(cell) {
            return true;
        }
        self.blocked[(cell.row * self.width + cell.col) as usize]
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        !self.is_blocked(cell)
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |row| {
            (0..self.width)
                .map(move |col| Cell::new(col, row))
                .filter(|c| self.is_free(*c))
        })
    }

    /// Applies one primitive action. Blocked moves leave the state
    /// unchanged and report `blocked = true`.
    pub fn step(&self, robot: RobotState, action: Action) -> (RobotState, bool) {
        match action {
            Action::MoveAhead => {
                let (dc, dr) = robot.direction();
                let next = Cell::new(robot.cell.col + dc, robot.cell.row + dr);
                if self.is_free(next) {
                    (RobotState::new(next, robot.heading), false)
                } else {
                    (robot, true)
                }
            }
            Action::RotateLeft => (
                RobotState::new(robot.cell, (robot.heading + 45) % 360),
                false,
            ),
            Action::RotateRight => (
                RobotState::new(robot.cell, (robot.heading + 315) % 360),
                false,
            ),
        }
    }

    pub fn movable_of(&self, cat: CatId) -> Option<&MovableObject> {
        self.movable.iter().find(|m| m.cat == cat)
    }

    pub fn stationary_of(&self, cat: CatId) -> Option<&StationaryObject> {
        self.stationary.iter().find(|s| s.cat == cat)
    }

    /// The unique movable instance of the target category.
    pub fn target_object(&self) -> &MovableObject {
        self.movable_of(self.target)
            .expect("target category must appear among movables")
    }
}

/// Simulated detector parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Maximum detection range in meters.
    pub range_m: f64,
    /// Full field-of-view angle in degrees, centered on the heading.
    pub fov_deg: f64,
    /// Per-axis bound of the uniform position-estimate noise, meters.
    pub noise_m: f64,
    /// Independent false-negative probability per visible object.
    pub p_fn: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            range_m: 1.5,
            fov_deg: 90.0,
            noise_m: 0.1,
            p_fn: 0.0,
        }
    }
}

/// One detected object with its noisy position estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub cat: CatId,
    pub position: Point,
    /// Stationary category this object sits inside or on top of, if any.
    pub receptacle_with: Option<CatId>,
}

fn angle_within_fov(from: Point, to: Point, heading: u16, fov_deg: f64) -> bool {
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    if dx.abs() < 1e-12 && dy.abs() < 1e-12 {
        return true;
    }
    let angle = dy.atan2(dx).to_degrees();
    let mut diff = angle - heading as f64;
    while diff > 180.0 {
        diff -= 360.0;
    }
    while diff <= -180.0 {
        diff += 360.0;
    }
    diff.abs() <= fov_deg / 2.0 + 1e-9
}

/// Grid ray cast: true when no blocked cell lies strictly between the two
/// points. Cells listed in `transparent` never occlude.
fn line_of_sight(world: &GridWorld, from: Point, to: Point, transparent: &[Cell]) -> bool {
    let start_cell = cell_of(from);
    let end_cell = cell_of(to);
    let d = from.dist(to);
    if d < 1e-9 {
        return true;
    }
    let steps = (d / (CELL_SIZE_M / 5.0)).ceil() as usize;
    for k in 1..steps {
        let t = k as f64 / steps as f64;
        let p = Point {
            x: from.x + (to.x - from.x) * t,
            y: from.y + (to.y - from.y) * t,
        };
        let c = cell_of(p);
        if c == start_cell || c == end_cell || transparent.contains(&c) {
            continue;
        }
        if world.is_blocked(c) {
            return false;
        }
    }
    true
}

fn object_visible(
    world: &GridWorld,
    robot: RobotState,
    pos: Point,
    own_cells: &[Cell],
    cfg: &DetectorConfig,
) -> bool {
    let eye = robot.position();
    if eye.dist(pos) > cfg.range_m {
        return false;
    }
    if !angle_within_fov(eye, pos, robot.heading, cfg.fov_deg) {
        return false;
    }
    line_of_sight(world, eye, pos, own_cells)
}

/// Runs the simulated detector from the given pose.
///
/// Every object whose center lies within range, inside the field of view,
/// and with unobstructed line of sight is returned, each with a noisy
/// position estimate. With `p_fn = 0` the output is a pure function of
/// (world, robot, rng state).
pub fn detect(
    world: &GridWorld,
    robot: RobotState,
    cfg: &DetectorConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<Detection> {
    let mut out = Vec::new();
    let consider = |cat: CatId,
                        pos: Point,
                        own: &[Cell],
                        receptacle_with: Option<CatId>,
                        rng: &mut ChaCha8Rng| {
        if !object_visible(world, robot, pos, own, cfg) {
            return None;
        }
        if cfg.p_fn > 0.0 && rng.random::<f64>() < cfg.p_fn {
            return None;
        }
        let noise = |rng: &mut ChaCha8Rng| {
            if cfg.noise_m > 0.0 {
                rng.random_range(-cfg.noise_m..=cfg.noise_m)
            } else {
                0.0
            }
        };
        let est = Point {
            x: pos.x + noise(rng),
            y: pos.y + noise(rng),
        };
        Some(Detection {
            cat,
            position: est,
            receptacle_with,
        })
    };
    for s in &world.stationary {
        if let Some(d) = consider(s.cat, s.position, &s.footprint, None, rng) {
            out.push(d);
        }
    }
    for m in &world.movable {
        let mut own = vec![m.cell];
        let parent_cat = m.parent.map(|p| {
            own.extend_from_slice(&world.stationary[p].footprint);
            world.stationary[p].cat
        });
        if let Some(d) = consider(m.cat, m.position, &own, parent_cat, rng) {
            out.push(d);
        }
    }
    out
}

/// Free cells whose centers pass the detector's geometric predicate.
/// Used by the frontier baseline to track observed space.
pub fn visible_cells(world: &GridWorld, robot: RobotState, cfg: &DetectorConfig) -> Vec<Cell> {
    let mut out = vec![robot.cell];
    let reach = (cfg.range_m / CELL_SIZE_M).ceil() as i32;
    for dr in -reach..=reach {
        for dc in -reach..=reach {
            let c = Cell::new(robot.cell.col + dc, robot.cell.row + dr);
            if c == robot.cell || !world.in_bounds(c) || world.is_blocked(c) {
                continue;
            }
            if object_visible(world, robot, c.center(), &[], cfg) {
                out.push(c);
            }
        }
    }
    out
}

pub const HEADINGS: [u16; 8] = [0, 45, 90, 135, 180, 225, 270, 315];

fn state_index(world: &GridWorld, s: RobotState) -> usize {
    let h = (s.heading / 45) as usize;
    ((s.cell.row * world.width + s.cell.col) as usize) * 8 + h
}

/// Breadth-first search over the (cell, heading) lattice.
///
/// Returns the canonical minimum-action path from `start` to any pose whose
/// cell is in `region`, or `None` when unreachable. Neighbor expansion
/// follows [`ACTIONS`] order, which fixes the returned path.
pub fn plan_path(world: &GridWorld, start: RobotState, region: &[Cell]) -> Option<Vec<Action>> {
    if region.contains(&start.cell) {
        return Some(Vec::new());
    }
    let goal: std::collections::BTreeSet<Cell> = region.iter().copied().collect();
    let n = (world.width * world.height) as usize * 8;
    let mut seen = vec![false; n];
    let mut parent: Vec<(u32, u8)> = vec![(u32::MAX, 0); n];
    let mut queue = VecDeque::new();
    let si = state_index(world, start);
    seen[si] = true;
    queue.push_back(start);
    while let Some(cur) = queue.pop_front() {
        for (ai, &action) in ACTIONS.iter().enumerate() {
            let (next, blocked) = world.step(cur, action);
            if blocked {
                continue;
            }
            let ni = state_index(world, next);
            if seen[ni] {
                continue;
            }
            seen[ni] = true;
            parent[ni] = (state_index(world, cur) as u32, ai as u8);
            if goal.contains(&next.cell) {
                let mut actions = Vec::new();
                let mut at = ni;
                while at != si {
                    let (prev, a) = parent[at];
                    actions.push(ACTIONS[a as usize]);
                    at = prev as usize;
                }
                actions.reverse();
                return Some(actions);
            }
            queue.push_back(next);
        }
    }
    None
}

/// Minimum number of primitive actions from `start` to the region, or
/// `None` when unreachable.
pub fn shortest_path_length(
    world: &GridWorld,
    start: RobotState,
    region: &[Cell],
) -> Option<usize> {
    plan_path(world, start, region).map(|p| p.len())
}

/// Free cells whose centers lie strictly within `radius_m` of `center`.
pub fn cells_within(world: &GridWorld, center: Point, radius_m: f64) -> Vec<Cell> {
    world
        .free_cells()
        .filter(|c| c.center().dist(center) < radius_m)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn open_world(w: i32, h: i32) -> GridWorld {
        // Border walls, free interior; target id is a placeholder.
        let mut world = GridWorld::empty(w, h, CatId(0), 0);
        for col in 0..w {
            world.set_blocked(Cell::new(col, 0), true);
            world.set_blocked(Cell::new(col, h - 1), true);
        }
        for row in 0..h {
            world.set_blocked(Cell::new(0, row), true);
            world.set_blocked(Cell::new(w - 1, row), true);
        }
        world
    }

    #[test]
    fn move_ahead_advances_one_cell() {
        let world = open_world(8, 8);
        let robot = RobotState::new(Cell::new(2, 2), 0);
        let (next, blocked) = world.step(robot, Action::MoveAhead);
        assert!(!blocked);
        assert_eq!(next.cell, Cell::new(3, 2));
    }

    #[test]
    fn rotations_wrap_modulo_360() {
        let world = open_world(8, 8);
        let robot = RobotState::new(Cell::new(2, 2), 0);
        let (left, _) = world.step(robot, Action::RotateLeft);
        assert_eq!(left.heading, 45);
        let (right, _) = world.step(robot, Action::RotateRight);
        assert_eq!(right.heading, 315);
    }

    #[test]
    fn blocked_move_reports_flag_and_keeps_state() {
        let world = open_world(8, 8);
        let robot = RobotState::new(Cell::new(1, 1), 180); // facing the wall
        let (next, blocked) = world.step(robot, Action::MoveAhead);
        assert!(blocked);
        assert_eq!(next, robot);
    }

    #[test]
    fn diagonal_heading_moves_diagonally() {
        let world = open_world(8, 8);
        let robot = RobotState::new(Cell::new(2, 2), 45);
        let (next, _) = world.step(robot, Action::MoveAhead);
        assert_eq!(next.cell, Cell::new(3, 3));
    }

    #[test]
    fn detect_cone_range_and_behind() {
        let mut world = open_world(16, 16);
        let robot = RobotState::new(Cell::new(4, 4), 0);
        let eye = robot.position();
        world.movable.push(MovableObject {
            cat: CatId(1),
            cell: Cell::new(8, 4),
            parent: None,
            position: Point {
                x: eye.x + 1.0,
                y: eye.y,
            },
        });
        world.movable.push(MovableObject {
            cat: CatId(2),
            cell: Cell::new(1, 4),
            parent: None,
            position: Point {
                x: eye.x - 0.5,
                y: eye.y,
            },
        });
        world.movable.push(MovableObject {
            cat: CatId(3),
            cell: Cell::new(15, 4),
            parent: None,
            position: Point {
                x: eye.x + 3.0,
                y: eye.y,
            },
        });
        let cfg = DetectorConfig {
            noise_m: 0.0,
            ..DetectorConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let found: Vec<CatId> = detect(&world, robot, &cfg, &mut rng)
            .into_iter()
            .map(|d| d.cat)
            .collect();
        assert_eq!(found, vec![CatId(1)], "ahead in range only");
    }

    #[test]
    fn detect_is_deterministic_without_false_negatives() {
        let mut world = open_world(12, 12);
        let robot = RobotState::new(Cell::new(3, 3), 0);
        world.movable.push(MovableObject {
            cat: CatId(1),
            cell: Cell::new(6, 3),
            parent: None,
            position: Cell::new(6, 3).center(),
        });
        let cfg = DetectorConfig::default();
        let a = detect(&world, robot, &cfg, &mut ChaCha8Rng::seed_from_u64(9));
        let b = detect(&world, robot, &cfg, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        for d in &a {
            let truth = world.movable[0].position;
            assert!((d.position.x - truth.x).abs() <= cfg.noise_m);
            assert!((d.position.y - truth.y).abs() <= cfg.noise_m);
        }
    }

    #[test]
    fn line_of_sight_blocked_by_wall() {
        let mut world = open_world(16, 16);
        for row in 1..15 {
            world.set_blocked(Cell::new(8, row), true);
        }
        let robot = RobotState::new(Cell::new(6, 6), 0);
        world.movable.push(MovableObject {
            cat: CatId(1),
            cell: Cell::new(10, 6),
            parent: None,
            position: Cell::new(10, 6).center(),
        });
        let cfg = DetectorConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(detect(&world, robot, &cfg, &mut rng).is_empty());
    }

    #[test]
    fn shortest_path_trivial_cases() {
        let world = open_world(8, 8);
        let start = RobotState::new(Cell::new(2, 2), 0);
        assert_eq!(
            shortest_path_length(&world, start, &[Cell::new(2, 2)]),
            Some(0)
        );
        assert_eq!(
            shortest_path_length(&world, start, &[Cell::new(4, 2)]),
            Some(2)
        );
    }

    #[test]
    fn shortest_path_matches_exhaustive_bfs() {
        // Independent oracle: plain BFS over (cell, heading) with a hash set.
        fn oracle(world: &GridWorld, start: RobotState, region: &[Cell]) -> Option<usize> {
            use std::collections::{HashMap, HashSet};
            if region.contains(&start.cell) {
                return Some(0);
            }
            let mut dist: HashMap<(Cell, u16), usize> = HashMap::new();
            let mut seen: HashSet<(Cell, u16)> = HashSet::new();
            let mut queue = VecDeque::new();
            seen.insert((start.cell, start.heading));
            dist.insert((start.cell, start.heading), 0);
            queue.push_back(start);
            while let Some(cur) = queue.pop_front() {
                let d = dist[&(cur.cell, cur.heading)];
                for action in ACTIONS {
                    let (next, blocked) = world.step(cur, action);
                    if blocked || !seen.insert((next.cell, next.heading)) {
                        continue;
                    }
                    dist.insert((next.cell, next.heading), d + 1);
                    if region.contains(&next.cell) {
                        return Some(d + 1);
                    }
                    queue.push_back(next);
                }
            }
            None
        }

        let world = open_world(7, 7); // 5x5 free interior
        let start = RobotState::new(Cell::new(3, 3), 0);
        // One cell to the robot's left (heading 0 => left is +y).
        let left = [Cell::new(3, 4)];
        let expect = oracle(&world, start, &left);
        assert_eq!(expect, Some(3));
        assert_eq!(shortest_path_length(&world, start, &left), expect);

        for goal in world.free_cells() {
            let region = [goal];
            assert_eq!(
                shortest_path_length(&world, start, &region),
                oracle(&world, start, &region),
                "mismatch for goal {goal:?}"
            );
        }
    }

    #[test]
    fn plan_path_unreachable_is_none() {
        let mut world = open_world(9, 9);
        for row in 1..8 {
            world.set_blocked(Cell::new(4, row), true);
        }
        let start = RobotState::new(Cell::new(2, 2), 0);
        assert_eq!(plan_path(&world, start, &[Cell::new(6, 2)]), None);
    }
}
