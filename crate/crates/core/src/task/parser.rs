//! Deterministic grammar over explicit instructions.
//!
//! Explicit instructions name both the subject and the object, so a verb
//! lexicon plus preposition slots recover the goal exactly. Noun phrases
//! resolve against the ontology through a small synonym table; multi-word
//! nouns match by concatenation ("stove burner" → stoveburner).

use crate::error::{Error, Result};
use crate::relation::{CatId, Ontology};
use crate::task::{GoalSpec, TaskAction};
use crate::world::GridWorld;

const ARTICLES: [&str; 3] = ["the", "a", "an"];

const SYNONYMS: [(&str, &str); 9] = [
    ("couch", "sofa"),
    ("stove", "stoveburner"),
    ("burner", "stoveburner"),
    ("refrigerator", "fridge"),
    ("trashcan", "garbagecan"),
    ("bin", "garbagecan"),
    ("counter", "countertop"),
    ("table", "diningtable"),
    ("tv", "television"),
];

fn tokenize(text: &str) -> Vec<String> {
    text.to_ascii_lowercase()
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| !t.is_empty() && !ARTICLES.contains(t))
        .map(str::to_string)
        .collect()
}

fn levenshtein(a: &str, b: &str) -> usize {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut cur = vec![i];
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur.push(sub.min(prev[j] + 1).min(cur[j - 1] + 1));
        }
        prev = cur;
    }
    prev[b.len()]
}

fn suggestions(name: &str, ontology: &Ontology) -> Vec<String> {
    let mut scored: Vec<(usize, &str)> = ontology
        .categories()
        .iter()
        .map(|c| (levenshtein(name, &c.name), c.name.as_str()))
        .collect();
    scored.sort();
    scored
        .into_iter()
        .take(3)
        .map(|(_, n)| n.to_string())
        .collect()
}

/// Resolves a run of tokens to one category, longest match first.
fn resolve_noun(tokens: &[String], ontology: &Ontology) -> Result<CatId> {
    if tokens.is_empty() {
        return Err(Error::Instruction("missing noun phrase".into()));
    }
    // Longest concatenation that names a category wins; remaining tokens
    // must be empty, otherwise the phrase is ambiguous garbage.
    for take in (1..=tokens.len()).rev() {
        let joined: String = tokens[..take].concat();
        let direct = ontology.id(&joined);
        let via_synonym = SYNONYMS
            .iter()
            .find(|(k, _)| *k == joined)
            .and_then(|(_, v)| ontology.id(v));
        if let Some(id) = direct.or(via_synonym) {
            if take == tokens.len() {
                return Ok(id);
            }
            return Err(Error::Instruction(format!(
                "trailing words after `{joined}`: {:?}",
                &tokens[take..]
            )));
        }
    }
    let joined: String = tokens.concat();
    Err(Error::Instruction(format!(
        "unknown category `{joined}`; closest: {}",
        suggestions(&joined, ontology).join(", ")
    )))
}

fn split_at_first<'a>(
    tokens: &'a [String],
    markers: &[&str],
) -> Option<(&'a [String], &'a [String])> {
    tokens
        .iter()
        .position(|t| markers.contains(&t.as_str()))
        .map(|i| (&tokens[..i], &tokens[i + 1..]))
}

/// Nearest cooking appliance to the robot start, for instructions that
/// leave the appliance implicit.
fn nearest_appliance(world: &GridWorld, ontology: &Ontology) -> Option<CatId> {
    let from = world.start.position();
    world
        .stationary
        .iter()
        .filter(|s| {
            crate::task::COOK_SUBJECTS
                .iter()
                .any(|n| ontology.id(n) == Some(s.cat))
        })
        .min_by(|a, b| {
            a.position
                .dist(from)
                .partial_cmp(&b.position.dist(from))
                .unwrap()
        })
        .map(|s| s.cat)
}

/// Parses a templated instruction into its goal.
///
/// The optional world resolves default subjects: a cook instruction with no
/// appliance picks the nearest of the cooking-appliance set, and a clean
/// instruction with no receptacle defaults to the sink regardless.
pub fn parse_instruction(
    text: &str,
    ontology: &Ontology,
    world: Option<&GridWorld>,
) -> Result<GoalSpec> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(Error::Instruction("empty instruction".into()));
    }
    let verb = tokens[0].as_str();
    let rest = &tokens[1..];
    match verb {
        "cut" | "slice" => {
            let (obj, subj) = split_at_first(rest, &["with", "using"]).ok_or_else(|| {
                Error::Instruction("cut instruction needs `with <instrument>`".into())
            })?;
            GoalSpec::new(
                TaskAction::Cut,
                resolve_noun(subj, ontology)?,
                resolve_noun(obj, ontology)?,
            )
        }
        "clean" | "wash" | "rinse" => {
            let (obj, subj) = match split_at_first(rest, &["inside", "in"]) {
                Some((o, s)) => (o.to_vec(), resolve_noun(s, ontology)?),
                None => (rest.to_vec(), ontology.require("sink")?),
            };
            GoalSpec::new(TaskAction::Clean, subj, resolve_noun(&obj, ontology)?)
        }
        "cook" | "heat" | "toast" => {
            let (obj, subj) = match split_at_first(rest, &["with", "in", "on", "using"]) {
                Some((o, s)) => (o.to_vec(), resolve_noun(s, ontology)?),
                None => {
                    let appliance = world
                        .and_then(|w| nearest_appliance(w, ontology))
                        .ok_or_else(|| {
                            Error::Instruction(
                                "cook instruction needs an appliance or a world to pick one"
                                    .into(),
                            )
                        })?;
                    (rest.to_vec(), appliance)
                }
            };
            GoalSpec::new(TaskAction::Cook, subj, resolve_noun(&obj, ontology)?)
        }
        "pick" | "put" | "place" | "grab" => {
            let rest: Vec<String> = rest
                .iter()
                .filter(|t| t.as_str() != "up")
                .cloned()
                .collect();
            // "pick X and place it on Y" or "put X on Y".
            let rest: Vec<String> = rest
                .into_iter()
                .filter(|t| !matches!(t.as_str(), "and" | "place" | "put" | "it"))
                .collect();
            let (obj, subj) = split_at_first(&rest, &["on", "in", "into", "inside", "onto"])
                .ok_or_else(|| {
                    Error::Instruction(
                        "pick-and-place instruction needs `on/in <receptacle>`".into(),
                    )
                })?;
            GoalSpec::new(
                TaskAction::PickPlace,
                resolve_noun(subj, ontology)?,
                resolve_noun(obj, ontology)?,
            )
        }
        other => Err(Error::Instruction(format!("unsupported action `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_ontology() -> Ontology {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/ontology.txt");
        Ontology::from_file(std::path::Path::new(path)).unwrap()
    }

    #[test]
    fn parses_the_four_family_examples() {
        let onto = full_ontology();
        let id = |n: &str| onto.id(n).unwrap();
        let cases = [
            ("cut the bread with a knife", TaskAction::Cut, "knife", "bread"),
            (
                "clean the mug inside the sink",
                TaskAction::Clean,
                "sink",
                "mug",
            ),
            (
                "cook the potato with the microwave",
                TaskAction::Cook,
                "microwave",
                "potato",
            ),
            (
                "pick the apple and place it on the plate",
                TaskAction::PickPlace,
                "plate",
                "apple",
            ),
        ];
        for (text, action, s, o) in cases {
            let g = parse_instruction(text, &onto, None).unwrap();
            assert_eq!(g.action, action, "{text}");
            assert_eq!(g.subject, id(s), "{text}");
            assert_eq!(g.object, id(o), "{text}");
        }
    }

    #[test]
    fn unknown_verb_is_unsupported() {
        let onto = full_ontology();
        let err = parse_instruction("defenestrate the cup", &onto, None).unwrap_err();
        assert!(err.to_string().contains("unsupported action"), "{err}");
    }

    #[test]
    fn unknown_noun_lists_candidates() {
        let onto = full_ontology();
        let err = parse_instruction("cut the braed with a knife", &onto, None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("closest:"), "{msg}");
        assert!(msg.contains("bread"), "suggestions should include bread: {msg}");
    }

    #[test]
    fn clean_defaults_to_the_sink() {
        let onto = full_ontology();
        let g = parse_instruction("wash the cup", &onto, None).unwrap();
        assert_eq!(g.subject, onto.id("sink").unwrap());
        assert_eq!(g.action, TaskAction::Clean);
    }

    #[test]
    fn synonyms_and_multiword_nouns_resolve() {
        let onto = full_ontology();
        let g = parse_instruction("cook the egg on the stove burner", &onto, None).unwrap();
        assert_eq!(g.subject, onto.id("stoveburner").unwrap());
        let g = parse_instruction("put the book on the counter", &onto, None).unwrap();
        assert_eq!(g.subject, onto.id("countertop").unwrap());
    }
}
