//! Grounded STRIPS-style planning domain.
//!
//! Objects are category names plus a `start` pseudo-location; operators are
//! grounded up front with conjunctive positive/negative preconditions and
//! add/delete effects. Problems serialize to a structured text form with
//! explicit `:predicates`, `:action`, `:precondition` and `:effect`
//! sections, and parse back.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::task::{GoalSpec, TaskAction};

/// Object classes, by category name.
const GRASPABLE: [&str; 17] = [
    "apple",
    "bread",
    "fork",
    "lettuce",
    "potato",
    "tomato",
    "egg",
    "mug",
    "spatula",
    "cup",
    "butterknife",
    "pan",
    "bowl",
    "plate",
    "pot",
    "knife",
    "spoon",
];
const PLACE_TARGETS: [&str; 14] = [
    "plate",
    "bowl",
    "sink",
    "microwave",
    "toaster",
    "stoveburner",
    "countertop",
    "diningtable",
    "desk",
    "coffeetable",
    "sidetable",
    "shelf",
    "pan",
    "pot",
];
/// Receptacles whose placements read `in`; everything else reads `on`.
const IN_CLASS: [&str; 9] = [
    "sink",
    "microwave",
    "fridge",
    "pot",
    "pan",
    "bowl",
    "mug",
    "cup",
    "garbagecan",
];
const CUTTERS: [&str; 2] = ["knife", "butterknife"];
const APPLIANCES: [&str; 3] = ["microwave", "toaster", "stoveburner"];
const SLICEABLE: [&str; 6] = ["bread", "lettuce", "potato", "tomato", "apple", "egg"];
const COOKABLE: [&str; 5] = ["bread", "egg", "lettuce", "potato", "tomato"];

pub fn is_in_class(name: &str) -> bool {
    IN_CLASS.contains(&name)
}

/// Predicate vocabulary of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pred {
    At,
    Holding,
    KnownLocation,
    Sliced,
    Cooked,
    Clean,
    On,
    In,
    Toggled,
    HandEmpty,
}

impl Pred {
    pub fn name(self) -> &'static str {
        match self {
            Pred::At => "at",
            Pred::Holding => "holding",
            Pred::KnownLocation => "known_location",
            Pred::Sliced => "sliced",
            Pred::Cooked => "cooked",
            Pred::Clean => "clean",
            Pred::On => "on",
            Pred::In => "in",
            Pred::Toggled => "toggled",
            Pred::HandEmpty => "handempty",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Pred::HandEmpty => 0,
            Pred::On | Pred::In => 2,
            _ => 1,
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "at" => Pred::At,
            "holding" => Pred::Holding,
            "known_location" => Pred::KnownLocation,
            "sliced" => Pred::Sliced,
            "cooked" => Pred::Cooked,
            "clean" => Pred::Clean,
            "on" => Pred::On,
            "in" => Pred::In,
            "toggled" => Pred::Toggled,
            "handempty" => Pred::HandEmpty,
            _ => return None,
        })
    }

    pub const ALL: [Pred; 10] = [
        Pred::At,
        Pred::Holding,
        Pred::KnownLocation,
        Pred::Sliced,
        Pred::Cooked,
        Pred::Clean,
        Pred::On,
        Pred::In,
        Pred::Toggled,
        Pred::HandEmpty,
    ];
}

/// Index into [`Problem::objects`].
pub type ObjId = u8;

/// A ground literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub pred: Pred,
    pub args: [ObjId; 2],
    pub arity: u8,
}

impl Literal {
    pub fn nullary(pred: Pred) -> Self {
        Self {
            pred,
            args: [0, 0],
            arity: 0,
        }
    }

    pub fn unary(pred: Pred, a: ObjId) -> Self {
        Self {
            pred,
            args: [a, 0],
            arity: 1,
        }
    }

    pub fn binary(pred: Pred, a: ObjId, b: ObjId) -> Self {
        Self {
            pred,
            args: [a, b],
            arity: 2,
        }
    }

    pub fn render(&self, objects: &[String]) -> String {
        match self.arity {
            0 => format!("({})", self.pred.name()),
            1 => format!("({} {})", self.pred.name(), objects[self.args[0] as usize]),
            _ => format!(
                "({} {} {})",
                self.pred.name(),
                objects[self.args[0] as usize],
                objects[self.args[1] as usize]
            ),
        }
    }
}

/// Operator schema selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OpKind {
    Search,
    Goto,
    Pick,
    Put,
    Slice,
    Cook,
    Toggle,
    Clean,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Search => "search",
            OpKind::Goto => "goto",
            OpKind::Pick => "pick",
            OpKind::Put => "put",
            OpKind::Slice => "slice",
            OpKind::Cook => "cook",
            OpKind::Toggle => "toggle",
            OpKind::Clean => "clean",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "search" => OpKind::Search,
            "goto" => OpKind::Goto,
            "pick" => OpKind::Pick,
            "put" => OpKind::Put,
            "slice" => OpKind::Slice,
            "cook" => OpKind::Cook,
            "toggle" => OpKind::Toggle,
            "clean" => OpKind::Clean,
            _ => return None,
        })
    }
}

/// A grounded operator with bound arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundOp {
    pub kind: OpKind,
    pub args: Vec<ObjId>,
    pub pre_pos: Vec<Literal>,
    pub pre_neg: Vec<Literal>,
    pub add: Vec<Literal>,
    pub del: Vec<Literal>,
}

impl GroundOp {
    pub fn display(&self, objects: &[String]) -> String {
        let args: Vec<&str> = self.args.iter().map(|&a| objects[a as usize].as_str()).collect();
        format!("{}({})", self.kind.name(), args.join(", "))
    }

    pub fn applicable(&self, state: &BTreeSet<Literal>) -> bool {
        self.pre_pos.iter().all(|l| state.contains(l))
            && self.pre_neg.iter().all(|l| !state.contains(l))
    }

    pub fn apply(&self, state: &BTreeSet<Literal>) -> BTreeSet<Literal> {
        let mut next = state.clone();
        for l in &self.del {
            next.remove(l);
        }
        for l in &self.add {
            next.insert(l.clone());
        }
        next
    }

    /// First precondition literal not satisfied in `state`, rendered.
    pub fn first_unsatisfied(&self, state: &BTreeSet<Literal>, objects: &[String]) -> Option<String> {
        for l in &self.pre_pos {
            if !state.contains(l) {
                return Some(l.render(objects));
            }
        }
        for l in &self.pre_neg {
            if state.contains(l) {
                return Some(format!("(not {})", l.render(objects)));
            }
        }
        None
    }
}

/// One object entering problem compilation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemObject {
    pub name: String,
    /// Whether the initial state asserts `known_location`.
    pub location_known: bool,
}

/// Grounded planning problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    /// Object names; index 0 is the `start` pseudo-location.
    pub objects: Vec<String>,
    /// Grounded operators in canonical (lexicographic) order.
    pub ops: Vec<GroundOp>,
    pub init: BTreeSet<Literal>,
    pub goal: Vec<Literal>,
}

impl Problem {
    pub fn object_id(&self, name: &str) -> Option<ObjId> {
        self.objects
            .iter()
            .position(|n| n == name)
            .map(|i| i as ObjId)
    }
}

/// The placement literal `put` produces for receptacle `y`.
fn placed_literal(x: ObjId, y: ObjId, objects: &[String]) -> Literal {
    if is_in_class(&objects[y as usize]) {
        Literal::binary(Pred::In, x, y)
    } else {
        Literal::binary(Pred::On, x, y)
    }
}

/// Compiles a goal plus world knowledge into a grounded problem.
///
/// Objects without `location_known` get no such fact in the initial state,
/// which forces the planner to ground a `search` step before any `goto`.
pub fn compile_problem(
    goal: &GoalSpec,
    ontology: &crate::relation::Ontology,
    objects: &[ProblemObject],
) -> Result<Problem> {
    let mut names = vec!["start".to_string()];
    for o in objects {
        if o.name == "start" {
            return Err(Error::Planning("`start` is a reserved object name".into()));
        }
        if !names.contains(&o.name) {
            names.push(o.name.clone());
        }
    }
    if names.len() > ObjId::MAX as usize {
        return Err(Error::Planning("too many objects".into()));
    }
    let id_of = |name: &str| -> Option<ObjId> {
        names.iter().position(|n| n == name).map(|i| i as ObjId)
    };
    let member = |name: &str, class: &[&str]| class.contains(&name);

    let mut init: BTreeSet<Literal> = BTreeSet::new();
    init.insert(Literal::unary(Pred::At, 0));
    init.insert(Literal::nullary(Pred::HandEmpty));
    for o in objects {
        if o.location_known {
            init.insert(Literal::unary(Pred::KnownLocation, id_of(&o.name).unwrap()));
        }
    }

    let all: Vec<ObjId> = (0..names.len() as ObjId).collect();
    let non_start = &all[1..];
    let mut ops: Vec<GroundOp> = Vec::new();
    for &x in non_start {
        ops.push(GroundOp {
            kind: OpKind::Search,
            args: vec![x],
            pre_pos: vec![],
            pre_neg: vec![Literal::unary(Pred::KnownLocation, x)],
            add: vec![Literal::unary(Pred::KnownLocation, x)],
            del: vec![],
        });
    }
    for &from in &all {
        for &to in non_start {
            if from == to {
                continue;
            }
            ops.push(GroundOp {
                kind: OpKind::Goto,
                args: vec![from, to],
                pre_pos: vec![
                    Literal::unary(Pred::At, from),
                    Literal::unary(Pred::KnownLocation, to),
                ],
                pre_neg: vec![],
                add: vec![Literal::unary(Pred::At, to)],
                del: vec![Literal::unary(Pred::At, from)],
            });
        }
    }
    for &x in non_start {
        if !member(&names[x as usize], &GRASPABLE) {
            continue;
        }
        let mut del = vec![Literal::nullary(Pred::HandEmpty)];
        for &y in non_start.iter().filter(|&&y| y != x) {
            del.push(Literal::binary(Pred::On, x, y));
            del.push(Literal::binary(Pred::In, x, y));
        }
        ops.push(GroundOp {
            kind: OpKind::Pick,
            args: vec![x],
            pre_pos: vec![
                Literal::unary(Pred::At, x),
                Literal::unary(Pred::KnownLocation, x),
                Literal::nullary(Pred::HandEmpty),
            ],
            pre_neg: vec![],
            add: vec![Literal::unary(Pred::Holding, x)],
            del,
        });
    }
    for &x in non_start {
        if !member(&names[x as usize], &GRASPABLE) {
            continue;
        }
        for &y in non_start {
            if x == y || !member(&names[y as usize], &PLACE_TARGETS) {
                continue;
            }
            ops.push(GroundOp {
                kind: OpKind::Put,
                args: vec![x, y],
                pre_pos: vec![
                    Literal::unary(Pred::Holding, x),
                    Literal::unary(Pred::At, y),
                ],
                pre_neg: vec![],
                add: vec![
                    placed_literal(x, y, &names),
                    Literal::nullary(Pred::HandEmpty),
                ],
                del: vec![Literal::unary(Pred::Holding, x)],
            });
        }
    }
    for &x in non_start {
        if !member(&names[x as usize], &SLICEABLE) {
            continue;
        }
        for &k in non_start {
            if !member(&names[k as usize], &CUTTERS) {
                continue;
            }
            ops.push(GroundOp {
                kind: OpKind::Slice,
                args: vec![x, k],
                pre_pos: vec![
                    Literal::unary(Pred::At, x),
                    Literal::unary(Pred::Holding, k),
                ],
                pre_neg: vec![],
                add: vec![Literal::unary(Pred::Sliced, x)],
                del: vec![],
            });
        }
    }
    for &x in non_start {
        if !member(&names[x as usize], &COOKABLE) {
            continue;
        }
        for &a in non_start {
            if !member(&names[a as usize], &APPLIANCES) {
                continue;
            }
            ops.push(GroundOp {
                kind: OpKind::Cook,
                args: vec![x, a],
                pre_pos: vec![
                    placed_literal(x, a, &names),
                    Literal::unary(Pred::At, a),
                ],
                pre_neg: vec![],
                add: vec![Literal::unary(Pred::Cooked, x)],
                del: vec![],
            });
        }
    }
    if let Some(faucet) = id_of("faucet") {
        // The faucet is operated from the sink when a sink is present.
        let at = id_of("sink").unwrap_or(faucet);
        ops.push(GroundOp {
            kind: OpKind::Toggle,
            args: vec![faucet],
            pre_pos: vec![Literal::unary(Pred::At, at)],
            pre_neg: vec![],
            add: vec![Literal::unary(Pred::Toggled, faucet)],
            del: vec![],
        });
        if let Some(sink) = id_of("sink") {
            for &x in non_start {
                if !member(&names[x as usize], &GRASPABLE) {
                    continue;
                }
                ops.push(GroundOp {
                    kind: OpKind::Clean,
                    args: vec![x],
                    pre_pos: vec![
                        Literal::binary(Pred::In, x, sink),
                        Literal::unary(Pred::Toggled, faucet),
                    ],
                    pre_neg: vec![],
                    add: vec![Literal::unary(Pred::Clean, x)],
                    del: vec![],
                });
            }
        }
    }
    ops.sort_by_key(|op| op.display(&names));

    let goal_lits = {
        let o = id_of(ontology.name(goal.object)).ok_or_else(|| {
            Error::Planning("goal object missing from problem objects".into())
        })?;
        match goal.action {
            TaskAction::Cut => vec![Literal::unary(Pred::Sliced, o)],
            TaskAction::Cook => vec![Literal::unary(Pred::Cooked, o)],
            TaskAction::Clean => vec![Literal::unary(Pred::Clean, o)],
            TaskAction::PickPlace => {
                let s = id_of(ontology.name(goal.subject)).ok_or_else(|| {
                    Error::Planning("goal subject missing from problem objects".into())
                })?;
                vec![placed_literal(o, s, &names)]
            }
        }
    };
    Ok(Problem {
        objects: names,
        ops,
        init,
        goal: goal_lits,
    })
}

/// Serializes a problem in the STRIPS-subset text form.
pub fn write_problem(problem: &Problem) -> String {
    let mut out = String::new();
    out.push_str("(:objects");
    for n in &problem.objects {
        out.push(' ');
        out.push_str(n);
    }
    out.push_str(")\n(:predicates");
    for p in Pred::ALL {
        match p.arity() {
            0 => out.push_str(&format!(" ({})", p.name())),
            1 => out.push_str(&format!(" ({} ?x)", p.name())),
            _ => out.push_str(&format!(" ({} ?x ?y)", p.name())),
        }
    }
    out.push_str(")\n");
    for op in &problem.ops {
        let args: Vec<&str> = op
            .args
            .iter()
            .map(|&a| problem.objects[a as usize].as_str())
            .collect();
        out.push_str(&format!(
            "(:action {} :parameters ({})\n",
            op.kind.name(),
            args.join(" ")
        ));
        out.push_str("  :precondition (and");
        for l in &op.pre_pos {
            out.push(' ');
            out.push_str(&l.render(&problem.objects));
        }
        for l in &op.pre_neg {
            out.push_str(&format!(" (not {})", l.render(&problem.objects)));
        }
        out.push_str(")\n  :effect (and");
        for l in &op.add {
            out.push(' ');
            out.push_str(&l.render(&problem.objects));
        }
        for l in &op.del {
            out.push_str(&format!(" (not {})", l.render(&problem.objects)));
        }
        out.push_str("))\n");
    }
    out.push_str("(:init");
    for l in &problem.init {
        out.push(' ');
        out.push_str(&l.render(&problem.objects));
    }
    out.push_str(")\n(:goal (and");
    for l in &problem.goal {
        out.push(' ');
        out.push_str(&l.render(&problem.objects));
    }
    out.push_str("))\n");
    out
}

fn tokenize_sexpr(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
                tokens.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

#[derive(Debug, Clone)]
enum Sexpr {
    Atom(String),
    List(Vec<Sexpr>),
}

fn parse_sexprs(tokens: &[String]) -> Result<Vec<Sexpr>> {
    let mut stack: Vec<Vec<Sexpr>> = vec![Vec::new()];
    for t in tokens {
        match t.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let done = stack
                    .pop()
                    .ok_or_else(|| Error::Planning("unbalanced parens".into()))?;
                stack
                    .last_mut()
                    .ok_or_else(|| Error::Planning("unbalanced parens".into()))?
                    .push(Sexpr::List(done));
            }
            atom => stack
                .last_mut()
                .unwrap()
                .push(Sexpr::Atom(atom.to_string())),
        }
    }
    if stack.len() != 1 {
        return Err(Error::Planning("unbalanced parens".into()));
    }
    Ok(stack.pop().unwrap())
}

fn literal_from(list: &[Sexpr], objects: &[String]) -> Result<Literal> {
    let atom = |s: &Sexpr| -> Result<String> {
        match s {
            Sexpr::Atom(a) => Ok(a.clone()),
            _ => Err(Error::Planning("expected atom".into())),
        }
    };
    let head = atom(&list[0])?;
    let pred = Pred::from_name(&head)
        .ok_or_else(|| Error::Planning(format!("unknown predicate `{head}`")))?;
    let oid = |name: &str| -> Result<ObjId> {
        objects
            .iter()
            .position(|n| n == name)
            .map(|i| i as ObjId)
            .ok_or_else(|| Error::Planning(format!("unknown object `{name}`")))
    };
    match (pred.arity(), list.len() - 1) {
        (0, 0) => Ok(Literal::nullary(pred)),
        (1, 1) => Ok(Literal::unary(pred, oid(&atom(&list[1])?)?)),
        (2, 2) => Ok(Literal::binary(
            pred,
            oid(&atom(&list[1])?)?,
            oid(&atom(&list[2])?)?,
        )),
        (want, got) => Err(Error::Planning(format!(
            "predicate `{head}` wants {want} args, got {got}"
        ))),
    }
}

/// Parses the [`write_problem`] text form.
pub fn parse_problem(text: &str) -> Result<Problem> {
    let sexprs = parse_sexprs(&tokenize_sexpr(text))?;
    let mut objects: Vec<String> = Vec::new();
    let mut ops: Vec<GroundOp> = Vec::new();
    let mut init = BTreeSet::new();
    let mut goal = Vec::new();
    for sexpr in &sexprs {
        let Sexpr::List(items) = sexpr else {
            return Err(Error::Planning("top-level atom".into()));
        };
        let Some(Sexpr::Atom(head)) = items.first() else {
            continue;
        };
        match head.as_str() {
            ":objects" => {
                for it in &items[1..] {
                    if let Sexpr::Atom(a) = it {
                        objects.push(a.clone());
                    }
                }
            }
            ":predicates" => {}
            ":action" => {
                let mut kind = None;
                let mut args: Vec<ObjId> = Vec::new();
                let mut pre_pos = Vec::new();
                let mut pre_neg = Vec::new();
                let mut add = Vec::new();
                let mut del = Vec::new();
                let mut i = 1;
                while i < items.len() {
                    match &items[i] {
                        Sexpr::Atom(a) if a == ":parameters" => {
                            if let Sexpr::List(ps) = &items[i + 1] {
                                for p in ps {
                                    if let Sexpr::Atom(name) = p {
                                        let id = objects
                                            .iter()
                                            .position(|n| n == name)
                                            .ok_or_else(|| {
                                                Error::Planning(format!(
                                                    "unknown object `{name}`"
                                                ))
                                            })?;
                                        args.push(id as ObjId);
                                    }
                                }
                            }
                            i += 2;
                        }
                        Sexpr::Atom(a) if a == ":precondition" || a == ":effect" => {
                            let into_pre = a == ":precondition";
                            if let Sexpr::List(conj) = &items[i + 1] {
                                for lit in &conj[1..] {
                                    let Sexpr::List(parts) = lit else { continue };
                                    let negated = matches!(&parts[0], Sexpr::Atom(x) if x == "not");
                                    let body = if negated {
                                        match &parts[1] {
                                            Sexpr::List(inner) => inner.as_slice(),
                                            _ => {
                                                return Err(Error::Planning(
                                                    "bad (not …) form".into(),
                                                ))
                                            }
                                        }
                                    } else {
                                        parts.as_slice()
                                    };
                                    let l = literal_from(body, &objects)?;
                                    match (into_pre, negated) {
                                        (true, false) => pre_pos.push(l),
                                        (true, true) => pre_neg.push(l),
                                        (false, false) => add.push(l),
                                        (false, true) => del.push(l),
                                    }
                                }
                            }
                            i += 2;
                        }
                        Sexpr::Atom(a) => {
                            kind = OpKind::from_name(a);
                            i += 1;
                        }
                        _ => i += 1,
                    }
                }
                ops.push(GroundOp {
                    kind: kind.ok_or_else(|| Error::Planning("action without name".into()))?,
                    args,
                    pre_pos,
                    pre_neg,
                    add,
                    del,
                });
            }
            ":init" => {
                for it in &items[1..] {
                    if let Sexpr::List(parts) = it {
                        init.insert(literal_from(parts, &objects)?);
                    }
                }
            }
            ":goal" => {
                if let Some(Sexpr::List(conj)) = items.get(1) {
                    for it in &conj[1..] {
                        if let Sexpr::List(parts) = it {
                            goal.push(literal_from(parts, &objects)?);
                        }
                    }
                }
            }
            other => return Err(Error::Planning(format!("unknown section `{other}`"))),
        }
    }
    Ok(Problem {
        objects,
        ops,
        init,
        goal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::Ontology;

    fn onto() -> Ontology {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/ontology.txt");
        Ontology::from_file(std::path::Path::new(path)).unwrap()
    }

    fn obj(name: &str, known: bool) -> ProblemObject {
        ProblemObject {
            name: name.into(),
            location_known: known,
        }
    }

    #[test]
    fn cut_goal_compiles_to_sliced_literal() {
        let onto = onto();
        let goal = GoalSpec::new(
            TaskAction::Cut,
            onto.id("knife").unwrap(),
            onto.id("bread").unwrap(),
        )
        .unwrap();
        let p =
            compile_problem(&goal, &onto, &[obj("bread", true), obj("knife", true)]).unwrap();
        let bread = p.object_id("bread").unwrap();
        assert_eq!(p.goal, vec![Literal::unary(Pred::Sliced, bread)]);
        assert!(p.init.contains(&Literal::nullary(Pred::HandEmpty)));
    }

    #[test]
    fn pick_place_goal_uses_receptacle_class() {
        let onto = onto();
        let on_goal = GoalSpec::new(
            TaskAction::PickPlace,
            onto.id("plate").unwrap(),
            onto.id("apple").unwrap(),
        )
        .unwrap();
        let p =
            compile_problem(&on_goal, &onto, &[obj("apple", true), obj("plate", true)]).unwrap();
        assert_eq!(p.goal[0].pred, Pred::On);

        let in_goal = GoalSpec::new(
            TaskAction::PickPlace,
            onto.id("sink").unwrap(),
            onto.id("apple").unwrap(),
        )
        .unwrap();
        let p =
            compile_problem(&in_goal, &onto, &[obj("apple", true), obj("sink", true)]).unwrap();
        assert_eq!(p.goal[0].pred, Pred::In);
    }

    #[test]
    fn clean_goal_compiles_to_clean_literal() {
        let onto = onto();
        let goal = GoalSpec::new(
            TaskAction::Clean,
            onto.id("sink").unwrap(),
            onto.id("mug").unwrap(),
        )
        .unwrap();
        let p = compile_problem(
            &goal,
            &onto,
            &[obj("mug", true), obj("sink", true), obj("faucet", true)],
        )
        .unwrap();
        let mug = p.object_id("mug").unwrap();
        assert_eq!(p.goal, vec![Literal::unary(Pred::Clean, mug)]);
        assert!(p.ops.iter().any(|o| o.kind == OpKind::Clean));
        assert!(p.ops.iter().any(|o| o.kind == OpKind::Toggle));
    }

    #[test]
    fn problem_text_round_trips() {
        let onto = onto();
        let goal = GoalSpec::new(
            TaskAction::Clean,
            onto.id("sink").unwrap(),
            onto.id("mug").unwrap(),
        )
        .unwrap();
        let p = compile_problem(
            &goal,
            &onto,
            &[obj("mug", false), obj("sink", true), obj("faucet", true)],
        )
        .unwrap();
        let text = write_problem(&p);
        let q = parse_problem(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(text, write_problem(&q));
    }
}
