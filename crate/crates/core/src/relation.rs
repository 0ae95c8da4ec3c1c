//! Co-occurrence graphs over object categories.
//!
//! Relationship-triple corpora are reduced to an undirected labeled graph:
//! two categories are connected when the summed occurrence count of any
//! relationship between them exceeds [`EDGE_COUNT_THRESHOLD`]. For simulated
//! worlds the same graph shape is produced geometrically: a pair is labeled
//! positive when the objects sit closer than [`DISTANCE_THRESHOLD_M`] or one
//! is a receptacle holding the other.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::world::{GridWorld, Point};

/// Minimum summed relationship count, exclusive, for a corpus edge.
pub const EDGE_COUNT_THRESHOLD: u64 = 3;

/// Distance threshold in meters; edges require strictly smaller distance.
pub const DISTANCE_THRESHOLD_M: f64 = 1.0;

/// Handle to a category interned in an [`Ontology`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CatId(pub u32);

/// A named object category with its dense ontology index.
#[derive(Debug, Clone)]
pub struct Category {
    pub name: String,
    pub index: usize,
}

/// The set of known object categories, densely indexed from 0.
#[derive(Debug, Clone, Default)]
pub struct Ontology {
    cats: Vec<Category>,
    by_name: HashMap<String, CatId>,
}

fn validate_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::Invalid("category name must be non-empty".into()));
    }
    if !name.is_ascii() || name.chars().any(|c| c.is_whitespace()) {
        return Err(Error::Invalid(format!(
            "category name `{name}` must be ASCII without whitespace"
        )));
    }
    Ok(())
}

impl Ontology {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads one category name per line; `#` lines and blanks are skipped.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut onto = Self::new();
        for (i, line) in text.lines().enumerate() {
            let name = line.trim();
            if name.is_empty() || name.starts_with('#') {
                continue;
            }
            validate_name(name).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                msg: e.to_string(),
            })?;
            if onto.by_name.contains_key(name) {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: i + 1,
                    msg: format!("duplicate category `{name}`"),
                });
            }
            onto.intern(name)?;
        }
        Ok(onto)
    }

    /// Returns the id for `name`, adding it to the ontology if absent.
    pub fn intern(&mut self, name: &str) -> Result<CatId> {
        if let Some(&id) = self.by_name.get(name) {
            return Ok(id);
        }
        validate_name(name)?;
        let lower = name.to_ascii_lowercase();
        if lower != name {
            return Err(Error::Invalid(format!(
                "category name `{name}` must be lowercase"
            )));
        }
        let id = CatId(self.cats.len() as u32);
        self.cats.push(Category {
            name: name.to_string(),
            index: id.0 as usize,
        });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn id(&self, name: &str) -> Option<CatId> {
        self.by_name.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<CatId> {
        self.id(name)
            .ok_or_else(|| Error::UnknownCategory(name.to_string()))
    }

    pub fn name(&self, id: CatId) -> &str {
        &self.cats[id.0 as usize].name
    }

    pub fn len(&self) -> usize {
        self.cats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cats.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = CatId> + '_ {
        (0..self.cats.len()).map(|i| CatId(i as u32))
    }

    pub fn categories(&self) -> &[Category] {
        &self.cats
    }
}

/// One corpus record: a directed relationship with an occurrence count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationTriple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub count: u64,
}

/// Loads a tab-separated triple corpus, interning unseen category names.
///
/// Each record line is `subject<TAB>predicate<TAB>object<TAB>count`;
/// lines beginning with `#` and blank lines are ignored.
pub fn load_corpus(path: &Path, ontology: &mut Ontology) -> Result<Vec<RelationTriple>> {
    let text = fs::read_to_string(path)?;
    let mut triples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: path.display().to_string(),
            line: i + 1,
            msg,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(format!(
                "expected 4 tab-separated fields, got {}",
                fields.len()
            )));
        }
        let count: u64 = fields[3]
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad count `{}`", fields[3])))?;
        if count == 0 {
            return Err(parse_err("count must be ≥ 1".into()));
        }
        let subject = fields[0].trim();
        let object = fields[2].trim();
        if subject == object {
            return Err(parse_err(format!("self-relation on `{subject}`")));
        }
        ontology
            .intern(subject)
            .and_then(|_| ontology.intern(object))
            .map_err(|e| parse_err(e.to_string()))?;
        triples.push(RelationTriple {
            subject: subject.to_string(),
            predicate: fields[1].trim().to_string(),
            object: object.to_string(),
            count,
        });
    }
    Ok(triples)
}

/// Label and aggregate count of one undirected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeInfo {
    pub label: bool,
    pub count: u64,
}

/// Undirected labeled graph over a subset of ontology categories.
///
/// Edges are stored once per unordered pair. Pairs without a record are
/// treated as label 0. Once an edge is labeled positive it stays positive:
/// search-time updates only ever add relationships.
#[derive(Debug, Clone, Default)]
pub struct RelationGraph {
    nodes: Vec<CatId>,
    index_of: HashMap<CatId, usize>,
    edges: BTreeMap<(usize, usize), EdgeInfo>,
    adjacency: Vec<Vec<usize>>,
}

impl RelationGraph {
    pub fn new(nodes: Vec<CatId>) -> Self {
        let mut g = Self::default();
        for n in nodes {
            g.add_node(n);
        }
        g
    }

    pub fn nodes(&self) -> &[CatId] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_index(&self, cat: CatId) -> Option<usize> {
        self.index_of.get(&cat).copied()
    }

    /// Adds a node if absent; returns its local index either way.
    pub fn add_node(&mut self, cat: CatId) -> usize {
        if let Some(&i) = self.index_of.get(&cat) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(cat);
        self.index_of.insert(cat, i);
        self.adjacency.push(Vec::new());
        i
    }

    /// Inserts or updates the unordered edge (u, v).
    ///
    /// A positive label is sticky: updating a positive edge with a negative
    /// observation keeps the positive label. Self-loops are rejected.
    pub fn set_edge(&mut self, u: CatId, v: CatId, label: bool, count: u64) {
        assert!(u != v, "self-loop on {u:?}");
        let iu = self.add_node(u);
        let iv = self.add_node(v);
        let key = (iu.min(iv), iu.max(iv));
        let entry = self.edges.entry(key).or_insert(EdgeInfo {
            label: false,
            count: 0,
        });
        let was_positive = entry.label;
        entry.label |= label;
        entry.count = entry.count.max(count);
        if entry.label && !was_positive {
            let (a, b) = key;
            self.adjacency[a].push(b);
            self.adjacency[a].sort_unstable();
            self.adjacency[b].push(a);
            self.adjacency[b].sort_unstable();
        }
    }

    pub fn edge(&self, u: CatId, v: CatId) -> Option<EdgeInfo> {
        let iu = self.node_index(u)?;
        let iv = self.node_index(v)?;
        self.edges.get(&(iu.min(iv), iu.max(iv))).copied()
    }

    /// Edge label for the pair; absent pairs read as 0.
    pub fn label(&self, u: CatId, v: CatId) -> bool {
        self.edge(u, v).map(|e| e.label).unwrap_or(false)
    }

    /// Neighbors of a node over positive edges, ascending local index.
    pub fn neighbors(&self, local: usize) -> &[usize] {
        &self.adjacency[local]
    }

    /// All stored edge records as (u, v, info) with u < v by local index.
    pub fn edges(&self) -> impl Iterator<Item = (CatId, CatId, EdgeInfo)> + '_ {
        self.edges
            .iter()
            .map(|(&(a, b), &info)| (self.nodes[a], self.nodes[b], info))
    }

    /// Positive edges as local index pairs (a < b).
    pub fn positive_pairs(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .filter(|(_, info)| info.label)
            .map(|(&k, _)| k)
            .collect()
    }

    pub fn positive_edge_count(&self) -> usize {
        self.edges.values().filter(|e| e.label).count()
    }

    /// Serializes edges as `u v label count` lines, tab separated.
    pub fn export(&self, ontology: &Ontology) -> String {
        let mut out = String::new();
        for (u, v, info) in self.edges() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                ontology.name(u),
                ontology.name(v),
                u8::from(info.label),
                info.count
            ));
        }
        out
    }

    /// Parses the [`export`](Self::export) format back into a graph.
    pub fn import(text: &str, ontology: &Ontology) -> Result<Self> {
        let mut g = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    path: "<graph>".into(),
                    line: i + 1,
                    msg: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let u = ontology.require(fields[0])?;
            let v = ontology.require(fields[1])?;
            let label = fields[2] == "1";
            let count: u64 = fields[3].parse().map_err(|_| Error::Parse {
                path: "<graph>".into(),
                line: i + 1,
                msg: format!("bad count `{}`", fields[3]),
            })?;
            g.set_edge(u, v, label, count);
        }
        Ok(g)
    }
}

/// Builds the corpus graph: one node per ontology category, an edge labeled
/// positive iff counts summed over all predicates and both orderings exceed
/// [`EDGE_COUNT_THRESHOLD`].
pub fn build_graph(triples: &[RelationTriple], ontology: &Ontology) -> Result<RelationGraph> {
    let mut graph = RelationGraph::new(ontology.ids().collect());
    let mut sums: BTreeMap<(CatId, CatId), u64> = BTreeMap::new();
    for t in triples {
        let s = ontology.require(&t.subject)?;
        let o = ontology.require(&t.object)?;
        let key = (s.min(o), s.max(o));
        *sums.entry(key).or_insert(0) += t.count;
    }
    for ((u, v), total) in sums {
        if total > EDGE_COUNT_THRESHOLD {
            graph.set_edge(u, v, true, total);
        }
    }
    Ok(graph)
}

/// Geometric edge label: positive iff the points are strictly closer than
/// [`DISTANCE_THRESHOLD_M`] or the pair is a receptacle relation.
pub fn label_edge(pos_i: Point, pos_j: Point, receptacle: bool) -> bool {
    receptacle || pos_i.dist(pos_j) < DISTANCE_THRESHOLD_M
}

/// Ground-truth graph of a fully placed world: every object pair labeled by
/// [`label_edge`] over true positions and receptacle annotations.
pub fn ground_truth_graph(world: &GridWorld) -> RelationGraph {
    let mut cats: Vec<CatId> = Vec::new();
    let mut entries: Vec<(CatId, Point, Option<CatId>)> = Vec::new();
    for s in &world.stationary {
        cats.push(s.cat);
        entries.push((s.cat, s.position, None));
    }
    for m in &world.movable {
        cats.push(m.cat);
        let parent = m.parent.map(|p| world.stationary[p].cat);
        entries.push((m.cat, m.position, parent));
    }
    let mut graph = RelationGraph::new(cats);
    for i in 0..entries.len() {
        for j in (i + 1)..entries.len() {
            let (ci, pi, pari) = &entries[i];
            let (cj, pj, parj) = &entries[j];
            let receptacle = *pari == Some(*cj) || *parj == Some(*ci);
            if label_edge(*pi, *pj, receptacle) {
                graph.set_edge(*ci, *cj, true, 1);
            }
        }
    }
    graph
}

impl fmt::Display for CatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cat#{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn onto_of(names: &[&str]) -> Ontology {
        let mut o = Ontology::new();
        for n in names {
            o.intern(n).unwrap();
        }
        o
    }

    fn triple(s: &str, p: &str, o: &str, count: u64) -> RelationTriple {
        RelationTriple {
            subject: s.into(),
            predicate: p.into(),
            object: o.into(),
            count,
        }
    }

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_corpus_single_record() {
        let f = write_temp("bowl\tin\tsink\t12\n");
        let mut onto = Ontology::new();
        let triples = load_corpus(f.path(), &mut onto).unwrap();
        assert_eq!(triples, vec![triple("bowl", "in", "sink", 12)]);
        assert!(onto.id("bowl").is_some() && onto.id("sink").is_some());
    }

    #[test]
    fn load_corpus_empty_file() {
        let f = write_temp("");
        let mut onto = Ontology::new();
        assert!(load_corpus(f.path(), &mut onto).unwrap().is_empty());
    }

    #[test]
    fn load_corpus_zero_count_is_parse_error() {
        let f = write_temp("bowl\tin\tsink\t0\n");
        let mut onto = Ontology::new();
        let err = load_corpus(f.path(), &mut onto).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":1:"), "should name line 1: {msg}");
        assert!(msg.contains("count must be ≥ 1"), "{msg}");
    }

    #[test]
    fn load_corpus_malformed_line_names_line_number() {
        let f = write_temp("bowl\tin\tsink\t4\nbroken line\n");
        let mut onto = Ontology::new();
        let err = load_corpus(f.path(), &mut onto).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }

    #[test]
    fn build_graph_threshold_is_strict() {
        let onto = onto_of(&["knife", "counter"]);
        let g = build_graph(&[triple("knife", "on", "counter", 4)], &onto).unwrap();
        assert!(g.label(onto.id("knife").unwrap(), onto.id("counter").unwrap()));

        let g = build_graph(&[triple("knife", "on", "counter", 3)], &onto).unwrap();
        assert!(!g.label(onto.id("knife").unwrap(), onto.id("counter").unwrap()));
        assert_eq!(g.positive_edge_count(), 0);
    }

    #[test]
    fn build_graph_merges_orderings_and_predicates() {
        let onto = onto_of(&["a", "b"]);
        let triples = [triple("a", "on", "b", 2), triple("b", "near", "a", 2)];
        let g = build_graph(&triples, &onto).unwrap();
        // Brute-force summation oracle over the triple list.
        let mut total = 0;
        for t in &triples {
            let pair_ab = (t.subject == "a" && t.object == "b")
                || (t.subject == "b" && t.object == "a");
            if pair_ab {
                total += t.count;
            }
        }
        assert_eq!(total, 4);
        assert_eq!(
            g.label(onto.id("a").unwrap(), onto.id("b").unwrap()),
            total > EDGE_COUNT_THRESHOLD
        );
    }

    #[test]
    fn build_graph_unknown_category_errors() {
        let onto = onto_of(&["a", "b"]);
        let err = build_graph(&[triple("a", "on", "ghost", 5)], &onto).unwrap_err();
        assert!(matches!(err, Error::UnknownCategory(n) if n == "ghost"));
    }

    #[test]
    fn label_edge_matches_distance_and_receptacle_rules() {
        let p = |x: f64, y: f64| Point { x, y };
        assert!(label_edge(p(0.0, 0.0), p(0.8, 0.0), false));
        assert!(!label_edge(p(0.0, 0.0), p(1.5, 0.0), false));
        assert!(label_edge(p(0.0, 0.0), p(5.0, 0.0), true));
        // Boundary is excluded: the inequality is strict.
        assert!(!label_edge(p(0.0, 0.0), p(1.0, 0.0), false));
    }

    #[test]
    fn graph_symmetry_and_sticky_label() {
        let onto = onto_of(&["a", "b", "c"]);
        let (a, b) = (onto.id("a").unwrap(), onto.id("b").unwrap());
        let mut g = RelationGraph::new(onto.ids().collect());
        g.set_edge(a, b, true, 5);
        assert_eq!(g.label(a, b), g.label(b, a));
        g.set_edge(b, a, false, 1);
        assert!(g.label(a, b), "positive labels are sticky");
    }

    #[test]
    fn ground_truth_graph_receptacle_and_distance() {
        use crate::world::{Cell, GridWorld, MovableObject, StationaryObject};
        let onto = onto_of(&["mug", "sink", "book"]);
        let mut world = GridWorld::empty(24, 24, onto.id("mug").unwrap(), 0);
        let sink_cells = vec![Cell::new(4, 4), Cell::new(5, 4)];
        let sink_pos = Point { x: 1.25, y: 1.125 };
        world.stationary.push(StationaryObject {
            cat: onto.id("sink").unwrap(),
            footprint: sink_cells,
            position: sink_pos,
        });
        // Mug inside the sink: same position, receptacle parent.
        world.movable.push(MovableObject {
            cat: onto.id("mug").unwrap(),
            cell: Cell::new(4, 4),
            parent: Some(0),
            position: sink_pos,
        });
        // Book three meters away, no receptacle.
        world.movable.push(MovableObject {
            cat: onto.id("book").unwrap(),
            cell: Cell::new(17, 4),
            parent: None,
            position: Point {
                x: sink_pos.x + 3.0,
                y: sink_pos.y,
            },
        });
        let gt = ground_truth_graph(&world);
        assert!(gt.label(onto.id("mug").unwrap(), onto.id("sink").unwrap()));
        assert!(!gt.label(onto.id("book").unwrap(), onto.id("sink").unwrap()));
        assert!(!gt.label(onto.id("book").unwrap(), onto.id("mug").unwrap()));
    }

    #[test]
    fn export_import_round_trip() {
        let onto = onto_of(&["a", "b", "c"]);
        let triples = [triple("a", "on", "b", 9), triple("b", "in", "c", 7)];
        let g = build_graph(&triples, &onto).unwrap();
        let text = g.export(&onto);
        let g2 = RelationGraph::import(&text, &onto).unwrap();
        for u in onto.ids() {
            for v in onto.ids() {
                if u != v {
                    assert_eq!(g.label(u, v), g2.label(u, v));
                }
            }
        }
    }
}
