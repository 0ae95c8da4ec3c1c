//! Instruction-to-plan pipeline.
//!
//! A templated instruction parses into an (action, subject, object) goal,
//! the goal compiles into a grounded STRIPS-style problem, a uniform-cost
//! forward search produces a minimum-length plan, and the executor runs the
//! plan in the simulator, realizing `search` steps with the object-search
//! engine.

mod domain;
mod executor;
mod parser;
mod planner;

pub use domain::{
    compile_problem, parse_problem, write_problem, GroundOp, Literal, OpKind, Pred, Problem,
    ProblemObject,
};
pub use executor::{execute_plan, ExecReport, StepOutcome};
pub use parser::parse_instruction;
pub use planner::{plan_task, validate_plan, Plan};

use crate::error::{Error, Result};
use crate::relation::{CatId, Ontology};

/// Task verb of a goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TaskAction {
    PickPlace,
    Cook,
    Clean,
    Cut,
}

impl std::fmt::Display for TaskAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TaskAction::PickPlace => "pick_place",
            TaskAction::Cook => "cook",
            TaskAction::Clean => "clean",
            TaskAction::Cut => "cut",
        };
        f.write_str(s)
    }
}

/// Parsed goal: the action, its instrument or receptacle, and its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoalSpec {
    pub action: TaskAction,
    /// Instrument or receptacle (e.g. the knife, the sink).
    pub subject: CatId,
    /// The manipulated target object.
    pub object: CatId,
}

impl GoalSpec {
    pub fn new(action: TaskAction, subject: CatId, object: CatId) -> Result<Self> {
        if subject == object {
            return Err(Error::Instruction(
                "subject and object must differ".into(),
            ));
        }
        Ok(Self {
            action,
            subject,
            object,
        })
    }

    pub fn describe(&self, ontology: &Ontology) -> String {
        format!(
            "{{action: {}, subject: {}, object: {}}}",
            self.action,
            ontology.name(self.subject),
            ontology.name(self.object)
        )
    }
}

/// Task families with their target and subject category names.
pub const PICK_PLACE_TARGETS: [&str; 6] = ["apple", "bread", "fork", "lettuce", "potato", "tomato"];
pub const PICK_PLACE_SUBJECTS: [&str; 3] = ["plate", "bowl", "sink"];
pub const COOK_TARGETS: [&str; 5] = ["bread", "egg", "lettuce", "potato", "tomato"];
pub const COOK_SUBJECTS: [&str; 3] = ["microwave", "toaster", "stoveburner"];
pub const CLEAN_TARGETS: [&str; 8] = [
    "mug",
    "spatula",
    "cup",
    "butterknife",
    "pan",
    "bowl",
    "plate",
    "pot",
];
pub const CLEAN_SUBJECTS: [&str; 1] = ["sink"];
pub const CUT_TARGETS: [&str; 4] = ["bread", "lettuce", "potato", "tomato"];
pub const CUT_SUBJECTS: [&str; 1] = ["knife"];

/// Every (action, target, subject) combination of the task families.
pub fn task_family_combinations(ontology: &Ontology) -> Result<Vec<GoalSpec>> {
    let mut out = Vec::new();
    let mut push = |action: TaskAction, targets: &[&str], subjects: &[&str]| -> Result<()> {
        for t in targets {
            for s in subjects {
                let (t, s) = (ontology.require(t)?, ontology.require(s)?);
                if t != s {
                    out.push(GoalSpec::new(action, s, t)?);
                }
            }
        }
        Ok(())
    };
    push(TaskAction::PickPlace, &PICK_PLACE_TARGETS, &PICK_PLACE_SUBJECTS)?;
    push(TaskAction::Cook, &COOK_TARGETS, &COOK_SUBJECTS)?;
    push(TaskAction::Clean, &CLEAN_TARGETS, &CLEAN_SUBJECTS)?;
    push(TaskAction::Cut, &CUT_TARGETS, &CUT_SUBJECTS)?;
    Ok(out)
}

/// Explicit instruction templates per task family. Each template mentions
/// both the subject and the object.
pub fn instruction_templates(action: TaskAction) -> &'static [&'static str] {
    match action {
        TaskAction::Cut => &[
            "cut the {o} with the {s}",
            "slice the {o} with a {s}",
        ],
        TaskAction::Clean => &[
            "clean the {o} inside the {s}",
            "wash the {o} in the {s}",
        ],
        TaskAction::Cook => &[
            "cook the {o} with the {s}",
            "cook the {o} in the {s}",
        ],
        TaskAction::PickPlace => &[
            "pick the {o} and place it on the {s}",
            "put the {o} on the {s}",
            "pick up the {o} and place it in the {s}",
        ],
    }
}

/// Renders one template of the goal's family.
pub fn render_instruction(spec: &GoalSpec, variant: usize, ontology: &Ontology) -> String {
    let templates = instruction_templates(spec.action);
    let t = templates[variant % templates.len()];
    t.replace("{o}", ontology.name(spec.object))
        .replace("{s}", ontology.name(spec.subject))
}
