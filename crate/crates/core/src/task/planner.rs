//! Uniform-cost forward search over grounded states.
//!
//! Unit operator costs make this plain breadth-first search; expanding
//! operators in the problem's canonical order makes the returned plan
//! deterministic. Unreachable goals are explained with the first literal no
//! relaxed (delete-free) execution can ever achieve.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::task::domain::{GroundOp, Literal, Problem};

/// An ordered sequence of grounded operator indices into [`Problem::ops`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub steps: Vec<usize>,
}

impl Plan {
    pub fn render(&self, problem: &Problem) -> Vec<String> {
        self.steps
            .iter()
            .map(|&i| problem.ops[i].display(&problem.objects))
            .collect()
    }

    pub fn ops<'a>(&self, problem: &'a Problem) -> Vec<&'a GroundOp> {
        self.steps.iter().map(|&i| &problem.ops[i]).collect()
    }
}

fn goal_satisfied(state: &BTreeSet<Literal>, goal: &[Literal]) -> bool {
    goal.iter().all(|l| state.contains(l))
}

/// Delete-free reachability fixpoint, used only to explain failures.
fn relaxed_reachable(problem: &Problem) -> BTreeSet<Literal> {
    let mut facts = problem.init.clone();
    loop {
        let mut grew = false;
        for op in &problem.ops {
            // Negative preconditions are optimistically satisfiable.
            if op.pre_pos.iter().all(|l| facts.contains(l)) {
                for l in &op.add {
                    grew |= facts.insert(*l);
                }
            }
        }
        if !grew {
            return facts;
        }
    }
}

/// Returns a minimum-length plan reaching the goal literals.
pub fn plan_task(problem: &Problem) -> Result<Plan> {
    if goal_satisfied(&problem.init, &problem.goal) {
        return Ok(Plan { steps: Vec::new() });
    }
    let mut states: Vec<BTreeSet<Literal>> = vec![problem.init.clone()];
    let mut seen: HashMap<BTreeSet<Literal>, usize> = HashMap::new();
    seen.insert(problem.init.clone(), 0);
    let mut parent: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX)];
    let mut queue = VecDeque::new();
    queue.push_back(0usize);
    while let Some(si) = queue.pop_front() {
        for (oi, op) in problem.ops.iter().enumerate() {
            if !op.applicable(&states[si]) {
                continue;
            }
            let next = op.apply(&states[si]);
            if seen.contains_key(&next) {
                continue;
            }
            let ni = states.len();
            seen.insert(next.clone(), ni);
            states.push(next);
            parent.push((si, oi));
            if goal_satisfied(&states[ni], &problem.goal) {
                let mut steps = Vec::new();
                let mut at = ni;
                while at != 0 {
                    let (prev, op) = parent[at];
                    steps.push(op);
                    at = prev;
                }
                steps.reverse();
                return Ok(Plan { steps });
            }
            queue.push_back(ni);
        }
    }
    // Exhausted: explain with the first goal literal outside the relaxed
    // reachable set, falling back to the first unsatisfied one.
    let reachable = relaxed_reachable(problem);
    let culprit = problem
        .goal
        .iter()
        .find(|l| !reachable.contains(l))
        .or_else(|| problem.goal.iter().find(|l| !problem.init.contains(l)));
    Err(Error::Planning(format!(
        "goal unreachable; first unsatisfiable precondition: {}",
        culprit
            .map(|l| l.render(&problem.objects))
            .unwrap_or_else(|| "<none>".into())
    )))
}

/// Independent plan validator: replays the literal sets step by step.
///
/// Shares no code with the planner's search; used by tests and the CLI to
/// certify plans before execution.
pub fn validate_plan(problem: &Problem, plan: &Plan) -> Result<()> {
    let mut state = problem.init.clone();
    for (i, &oi) in plan.steps.iter().enumerate() {
        let op = problem
            .ops
            .get(oi)
            .ok_or_else(|| Error::Planning(format!("step {i} references unknown operator")))?;
        if let Some(unsat) = op.first_unsatisfied(&state, &problem.objects) {
            return Err(Error::Planning(format!(
                "step {i} ({}) precondition fails: {unsat}",
                op.display(&problem.objects)
            )));
        }
        for l in &op.del {
            state.remove(l);
        }
        for l in &op.add {
            state.insert(*l);
        }
    }
    for l in &problem.goal {
        if !state.contains(l) {
            return Err(Error::Planning(format!(
                "plan ends without goal literal {}",
                l.render(&problem.objects)
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::Ontology;
    use crate::task::domain::{compile_problem, ProblemObject};
    use crate::task::{GoalSpec, TaskAction};

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

    fn spec(onto: &Ontology, action: TaskAction, s: &str, o: &str) -> GoalSpec {
        GoalSpec::new(action, onto.id(s).unwrap(), onto.id(o).unwrap()).unwrap()
    }

    #[test]
    fn cut_plan_matches_expected_sequence() {
        let onto = onto();
        let goal = spec(&onto, TaskAction::Cut, "knife", "bread");
        let p = compile_problem(&goal, &onto, &[obj("bread", true), obj("knife", true)]).unwrap();
        let plan = plan_task(&p).unwrap();
        assert_eq!(
            plan.render(&p),
            vec!["goto(start, knife)", "pick(knife)", "goto(knife, bread)", "slice(bread, knife)"]
        );
        validate_plan(&p, &plan).unwrap();
    }

    #[test]
    fn clean_plan_reaches_clean_via_toggle_and_clean() {
        let onto = onto();
        let goal = spec(&onto, TaskAction::Clean, "sink", "mug");
        let p = compile_problem(
            &goal,
            &onto,
            &[obj("mug", true), obj("sink", true), obj("faucet", true)],
        )
        .unwrap();
        let plan = plan_task(&p).unwrap();
        let names = plan.render(&p);
        assert_eq!(
            names,
            vec![
                "goto(start, mug)",
                "pick(mug)",
                "goto(mug, sink)",
                "put(mug, sink)",
                "toggle(faucet)",
                "clean(mug)"
            ]
        );
        validate_plan(&p, &plan).unwrap();
    }

    #[test]
    fn satisfied_goal_gives_empty_plan() {
        let onto = onto();
        let goal = spec(&onto, TaskAction::Cut, "knife", "bread");
        let mut p =
            compile_problem(&goal, &onto, &[obj("bread", true), obj("knife", true)]).unwrap();
        p.init.insert(p.goal[0]);
        let plan = plan_task(&p).unwrap();
        assert!(plan.steps.is_empty());
    }

    #[test]
    fn missing_objects_force_search_steps() {
        let onto = onto();
        let goal = spec(&onto, TaskAction::Cut, "knife", "bread");
        let p = compile_problem(&goal, &onto, &[obj("bread", true), obj("knife", false)]).unwrap();
        let plan = plan_task(&p).unwrap();
        let names = plan.render(&p);
        assert_eq!(names[0], "search(knife)");
        validate_plan(&p, &plan).unwrap();

        let p2 =
            compile_problem(&goal, &onto, &[obj("bread", false), obj("knife", false)]).unwrap();
        let plan2 = plan_task(&p2).unwrap();
        let names2 = plan2.render(&p2);
        let searches = names2.iter().filter(|n| n.starts_with("search")).count();
        assert_eq!(searches, 2, "{names2:?}");
        validate_plan(&p2, &plan2).unwrap();
        // Each search precedes the first mention of its object.
        for missing in ["bread", "knife"] {
            let s = names2
                .iter()
                .position(|n| *n == format!("search({missing})"))
                .unwrap();
            let first_use = names2
                .iter()
                .position(|n| n.contains(missing) && !n.starts_with("search"))
                .unwrap();
            assert!(s < first_use);
        }
    }

    #[test]
    fn unreachable_goal_names_a_literal() {
        let onto = onto();
        let goal = spec(&onto, TaskAction::Clean, "sink", "mug");
        // No faucet in the problem: clean(mug) can never be achieved.
        let p = compile_problem(&goal, &onto, &[obj("mug", true), obj("sink", true)]).unwrap();
        let err = plan_task(&p).unwrap_err();
        assert!(
            err.to_string().contains("(clean mug)"),
            "error should name the literal: {err}"
        );
    }

    #[test]
    fn planner_is_deterministic() {
        let onto = onto();
        let goal = spec(&onto, TaskAction::Cook, "microwave", "potato");
        let objs = [
            obj("potato", false),
            obj("microwave", true),
            obj("countertop", true),
            obj("sink", true),
        ];
        let p = compile_problem(&goal, &onto, &objs).unwrap();
        let a = plan_task(&p).unwrap();
        let b = plan_task(&p).unwrap();
        assert_eq!(a, b);
    }
}
