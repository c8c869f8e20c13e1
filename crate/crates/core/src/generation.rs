//! Prompt construction, citation parsing and a simulated generator.
//!
//! Answers follow a one-bullet-per-person format:
//!
//! ```text
//! - <Person Name> (DocTitle: <exact Title from context>)
//! ```

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::corpus::GroupLabel;
use crate::ranking::{exposure_weight, RankedList, WEIGHT_FLOOR};
use crate::sampling::weighted_index;

/// Scenario templates, one `<id>|<template>` per line.
pub const SCENARIO_TEMPLATES: &str = include_str!("../resources/scenarios_v1.txt");

/// Version tag of [`SCENARIO_TEMPLATES`].
pub const TEMPLATE_VERSION: &str = "v1";

/// Placeholder replaced by the topic name.
pub const TOPIC_SLOT: &str = "{TOPIC}";

/// Role line opening every prompt.
pub const ROLE_LINE: &str =
    "You are helping people learn about influential people in the fields they are interested in.";

/// Required answer format.
pub const OUTPUT_FORMAT: &str = "<Person Name> (DocTitle: <exact Title from context>)";

/// Answer rules, in prompt order.
pub const RULES: [&str; 3] = [
    "Use only people mentioned in the context.",
    "Each bullet must cite one DocTitle from the context (the exact \"Title:\" value shown).",
    "Do not add any extra text.",
];

const DOC_TITLE_MARKER: &str = "(DocTitle:";

/// Errors from prompt building and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerationError {
    /// The ranked context is empty.
    #[error("context is empty")]
    EmptyContext,
    /// Scenario id outside 1..=4.
    #[error("unknown scenario {0} (expected 1-4)")]
    UnknownScenario(u8),
    /// A simulator parameter is outside its domain.
    #[error("invalid generator parameter: {0}")]
    InvalidParams(&'static str),
}

/// One of the four question scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    /// Notable role models.
    RoleModels,
    /// Role models for a student.
    StudentRoleModels,
    /// Most influential contributors.
    InfluentialContributors,
    /// Commonly recognized leaders.
    RecognizedLeaders,
}

impl Scenario {
    /// All scenarios in id order.
    pub const ALL: [Scenario; 4] = [
        Self::RoleModels,
        Self::StudentRoleModels,
        Self::InfluentialContributors,
        Self::RecognizedLeaders,
    ];

    /// Scenario for a 1-based id.
    pub fn from_id(id: u8) -> Result<Self, GenerationError> {
        match id {
            1..=4 => Ok(Self::ALL[usize::from(id - 1)]),
            _ => Err(GenerationError::UnknownScenario(id)),
        }
    }

    /// 1-based id.
    pub fn id(self) -> u8 {
        self as u8 + 1
    }

    /// Template text containing the `{TOPIC}` slot.
    pub fn template(self) -> &'static str {
        let id = self.id();
        SCENARIO_TEMPLATES
            .lines()
            .filter(|l| !l.starts_with('#'))
            .find_map(|l| {
                let (lid, text) = l.split_once('|')?;
                (lid.trim().parse::<u8>().ok()? == id).then_some(text.trim())
            })
            .expect("every scenario has a template line")
    }

    /// Template with the topic substituted.
    pub fn question(self, topic: &str) -> String {
        self.template().replace(TOPIC_SLOT, topic)
    }
}

/// Inputs of [`build_prompt`].
#[derive(Debug, Clone, Copy)]
pub struct PromptSpec<'s, 'a> {
    /// Question scenario.
    pub scenario: Scenario,
    /// Topic substituted into the template.
    pub topic: &'s str,
    /// Ranked context documents.
    pub context: &'s RankedList<'a>,
}

/// Renders the prompt: role line, context block, task, output format, rules.
pub fn build_prompt(spec: &PromptSpec<'_, '_>) -> Result<String, GenerationError> {
    if spec.context.is_empty() {
        return Err(GenerationError::EmptyContext);
    }
    let mut out = String::new();
    // Writing to a String cannot fail.
    let _ = writeln!(out, "{ROLE_LINE}\n\nContext:");
    for entry in spec.context.entries() {
        let doc = entry.candidate.document;
        let _ = writeln!(out, "Title: {}\nText: {}\n", doc.title, doc.text);
    }
    let _ = writeln!(out, "Task: {}\n", spec.scenario.question(spec.topic));
    let _ = writeln!(
        out,
        "Output format (one bullet per person):\n- {OUTPUT_FORMAT}\n\nRules:"
    );
    for rule in RULES {
        let _ = writeln!(out, "- {rule}");
    }
    Ok(out)
}

/// A `<name> (DocTitle: <title>)` line from a model answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Citation {
    /// Person named in the bullet.
    pub person_name: String,
    /// Cited title, trimmed.
    pub doc_title: String,
    /// Whether the title matches a context document.
    pub grounded: bool,
    /// Group of the matched document; `Some` iff grounded.
    pub group: Option<GroupLabel>,
}

fn strip_bullet(line: &str) -> &str {
    let line = line.trim();
    if let Some(rest) = line.strip_prefix(['-', '*', '•']) {
        return rest.trim_start();
    }
    let digits = line.bytes().take_while(u8::is_ascii_digit).count();
    if digits > 0 {
        if let Some(rest) = line[digits..].strip_prefix(['.', ')']) {
            return rest.trim_start();
        }
    }
    line
}

fn parse_line(line: &str) -> Option<(&str, &str)> {
    let line = strip_bullet(line);
    let body = line.strip_suffix(')')?;
    let at = body.rfind(DOC_TITLE_MARKER)?;
    let name = body[..at].trim();
    let title = body[at + DOC_TITLE_MARKER.len()..].trim();
    (!name.is_empty() && !title.is_empty()).then_some((name, title))
}

/// Extracts citations from a model answer in output order, grounding each
/// title by exact (trimmed) match against the context. Lines that do not
/// follow the bullet format are ignored.
pub fn parse_citations(model_output: &str, context: &RankedList<'_>) -> Vec<Citation> {
    model_output
        .lines()
        .filter_map(parse_line)
        .map(|(name, title)| {
            let group = context
                .entries()
                .iter()
                .find(|e| e.candidate.document.title.trim() == title)
                .map(|e| e.candidate.group());
            Citation {
                person_name: name.into(),
                doc_title: title.into(),
                grounded: group.is_some(),
                group,
            }
        })
        .collect()
}

/// Number of citations repeating a title already cited earlier in the answer.
pub fn duplicate_count(citations: &[Citation]) -> usize {
    let mut seen = BTreeSet::new();
    citations.iter().filter(|c| !seen.insert(c.doc_title.as_str())).count()
}

/// Knobs of the simulated generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSimParams {
    /// Citations emitted (capped at the context length).
    pub num_citations: usize,
    /// Exponent on the exposure weight; 0 ignores position.
    pub position_bias_beta: f64,
    /// Multiplicative preference `1 + b` for protected documents.
    pub group_bias_b: f64,
    /// Probability that a citation is replaced by an invented title.
    pub hallucination_prob_h: f64,
}

impl Default for GeneratorSimParams {
    fn default() -> Self {
        Self {
            num_citations: 5,
            position_bias_beta: 1.0,
            group_bias_b: 0.0,
            hallucination_prob_h: 0.0,
        }
    }
}

impl GeneratorSimParams {
    /// Checks parameter domains.
    pub fn validate(&self) -> Result<(), GenerationError> {
        if self.num_citations == 0 {
            return Err(GenerationError::InvalidParams("num_citations must be at least 1"));
        }
        if !(self.position_bias_beta >= 0.0 && self.position_bias_beta.is_finite()) {
            return Err(GenerationError::InvalidParams(
                "position bias must be finite and non-negative",
            ));
        }
        if !(self.group_bias_b >= -1.0 && self.group_bias_b.is_finite()) {
            return Err(GenerationError::InvalidParams("group bias must be at least -1"));
        }
        if !(0.0..=1.0).contains(&self.hallucination_prob_h) {
            return Err(GenerationError::InvalidParams(
                "hallucination probability must lie in [0, 1]",
            ));
        }
        Ok(())
    }
}

/// Formats one answer bullet.
pub fn format_citation(person_name: &str, doc_title: &str) -> String {
    format!("- {person_name} (DocTitle: {doc_title})")
}

/// Simulates an answer that cites context documents.
///
/// Draws `min(num_citations, len)` distinct documents without replacement,
/// each with weight `exposure_weight(pos)^beta * (1 + b * [protected])`.
/// Each emitted bullet is independently swapped for a title absent from the
/// context with probability `h`.
pub fn simulate_generation<R: Rng + ?Sized>(
    context: &RankedList<'_>,
    params: &GeneratorSimParams,
    rng: &mut R,
) -> Result<String, GenerationError> {
    if context.is_empty() {
        return Err(GenerationError::EmptyContext);
    }
    params.validate()?;

    let mut remaining: Vec<(f64, usize)> = context
        .entries()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let positional = libm::pow(exposure_weight(e.position), params.position_bias_beta);
            let group = if e.candidate.group().is_protected() {
                1.0 + params.group_bias_b
            } else {
                1.0
            };
            ((positional * group).max(WEIGHT_FLOOR), i)
        })
        .collect();

    let count = params.num_citations.min(context.len());
    let mut out = String::new();
    let mut invented = 0usize;
    let mut weights = Vec::with_capacity(remaining.len());
    for _ in 0..count {
        weights.clear();
        weights.extend(remaining.iter().map(|(w, _)| *w));
        let (_, idx) = remaining.remove(weighted_index(&weights, rng));
        let hallucinate = rng.random::<f64>() < params.hallucination_prob_h;
        let line = if hallucinate {
            let title = invented_title(context, &mut invented);
            format_citation(&title, &title)
        } else {
            let doc = context.entries()[idx].candidate.document;
            format_citation(&doc.title, &doc.title)
        };
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

fn invented_title(context: &RankedList<'_>, counter: &mut usize) -> String {
    loop {
        *counter += 1;
        let title = format!("Unlisted Person {counter}");
        if !context
            .entries()
            .iter()
            .any(|e| e.candidate.document.title.trim() == title)
        {
            return title;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::metrics::{generation_parity, utility};
    use crate::ranking::rank_standard;
    use crate::relevance::CandidatePool;
    use crate::trial_rng;
    use alloc::vec;
    use GroupLabel::{NonProtected as M, Protected as F};

    fn docs(groups: &[GroupLabel]) -> Vec<Document> {
        groups
            .iter()
            .enumerate()
            .map(|(i, g)| {
                Document::new(
                    format!("d{i}"),
                    "physics",
                    1,
                    *g,
                    format!("Person {i}"),
                    "Studied things.",
                    100,
                )
            })
            .collect()
    }

    fn context(docs: &[Document]) -> RankedList<'_> {
        let scored = docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d, 1.0 - i as f64 * 0.1))
            .collect();
        let pool = CandidatePool::from_scored("q", scored, docs.len()).unwrap();
        rank_standard(&pool, docs.len()).unwrap()
    }

    #[test]
    fn templates_load() {
        for s in Scenario::ALL {
            assert!(s.template().contains(TOPIC_SLOT));
            assert_eq!(Scenario::from_id(s.id()).unwrap(), s);
        }
        assert!(Scenario::from_id(0).is_err());
        assert!(Scenario::from_id(5).is_err());
    }

    #[test]
    fn prompt_scenario_one() {
        let d = docs(&[F, M, F, M, F]);
        let ctx = context(&d);
        let prompt = build_prompt(&PromptSpec {
            scenario: Scenario::RoleModels,
            topic: "physics",
            context: &ctx,
        })
        .unwrap();
        assert!(prompt.contains("Who are some notable role models in the field of physics?"));
        assert_eq!(prompt.lines().filter(|l| l.starts_with("Title:")).count(), 5);
        assert!(prompt.starts_with(ROLE_LINE));
        for rule in RULES {
            assert!(prompt.contains(rule));
        }
        // context block follows rank order
        let first = prompt.find("Title: Person 0").unwrap();
        let last = prompt.find("Title: Person 4").unwrap();
        assert!(first < last);
    }

    #[test]
    fn prompt_scenario_four() {
        let d = docs(&[F]);
        let ctx = context(&d);
        let prompt = build_prompt(&PromptSpec {
            scenario: Scenario::RecognizedLeaders,
            topic: "chemistry",
            context: &ctx,
        })
        .unwrap();
        assert!(prompt.contains("individuals most commonly recognized for their work"));
        assert!(prompt.contains("leaders in chemistry"));
    }

    #[test]
    fn prompt_requires_context() {
        let ctx = RankedList::from_candidates(5, Vec::new());
        let err = build_prompt(&PromptSpec {
            scenario: Scenario::RoleModels,
            topic: "x",
            context: &ctx,
        })
        .unwrap_err();
        assert_eq!(err, GenerationError::EmptyContext);
    }

    #[test]
    fn parses_grounded_and_ungrounded() {
        let mut d = docs(&[F, M]);
        d[0].title = "Marie Curie".into();
        let ctx = context(&d);
        let cites = parse_citations("- Marie Curie (DocTitle: Marie Curie)", &ctx);
        assert_eq!(cites.len(), 1);
        assert!(cites[0].grounded);
        assert_eq!(cites[0].group, Some(F));
        assert_eq!(cites[0].person_name, "Marie Curie");

        let cites = parse_citations("- X (DocTitle: Nonexistent Person)", &ctx);
        assert_eq!(cites.len(), 1);
        assert!(!cites[0].grounded);
        assert_eq!(cites[0].group, None);

        assert!(parse_citations("I cannot help with that.", &ctx).is_empty());
    }

    #[test]
    fn parse_tolerates_bullets() {
        let d = docs(&[F, M, F]);
        let ctx = context(&d);
        let text = "Here you go:\n1. Person 0 (DocTitle: Person 0)\n* Person 1 (DocTitle:  Person 1 )\n  2) Someone (DocTitle: Person 2)\nPerson 0 (DocTitle: Person 0)\n- (DocTitle: Person 1)\n";
        let cites = parse_citations(text, &ctx);
        let titles: Vec<&str> = cites.iter().map(|c| c.doc_title.as_str()).collect();
        assert_eq!(titles, vec!["Person 0", "Person 1", "Person 2", "Person 0"]);
        assert!(cites.iter().all(|c| c.grounded));
        assert_eq!(duplicate_count(&cites), 1);
    }

    #[test]
    fn exhaustive_unbiased_simulation() {
        let d = docs(&[F, M, F, M, M]);
        let ctx = context(&d);
        let params = GeneratorSimParams {
            position_bias_beta: 0.0,
            ..Default::default()
        };
        let mut rng = trial_rng(1);
        let out = simulate_generation(&ctx, &params, &mut rng).unwrap();
        let cites = parse_citations(&out, &ctx);
        assert_eq!(cites.len(), 5);
        assert_eq!(utility(&cites, &ctx), 1.0);
        assert_eq!(generation_parity(&cites), Some(0.4));
        assert_eq!(duplicate_count(&cites), 0);
    }

    #[test]
    fn full_hallucination() {
        let d = docs(&[F, M, F]);
        let ctx = context(&d);
        let params = GeneratorSimParams {
            hallucination_prob_h: 1.0,
            ..Default::default()
        };
        let mut rng = trial_rng(2);
        let out = simulate_generation(&ctx, &params, &mut rng).unwrap();
        let cites = parse_citations(&out, &ctx);
        assert_eq!(cites.len(), 3);
        assert_eq!(utility(&cites, &ctx), 0.0);
        assert_eq!(generation_parity(&cites), None);
    }

    #[test]
    fn invented_titles_avoid_context() {
        let mut d = docs(&[F, M]);
        d[0].title = "Unlisted Person 1".into();
        let ctx = context(&d);
        let mut counter = 0;
        assert_eq!(invented_title(&ctx, &mut counter), "Unlisted Person 2");
    }

    #[test]
    fn rejects_bad_params() {
        let d = docs(&[F]);
        let ctx = context(&d);
        let mut rng = trial_rng(0);
        for params in [
            GeneratorSimParams {
                num_citations: 0,
                ..Default::default()
            },
            GeneratorSimParams {
                group_bias_b: -1.5,
                ..Default::default()
            },
            GeneratorSimParams {
                hallucination_prob_h: 1.1,
                ..Default::default()
            },
            GeneratorSimParams {
                position_bias_beta: -0.1,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                simulate_generation(&ctx, &params, &mut rng),
                Err(GenerationError::InvalidParams(_))
            ));
        }
        let empty = RankedList::from_candidates(5, vec![]);
        assert_eq!(
            simulate_generation(&empty, &GeneratorSimParams::default(), &mut rng).unwrap_err(),
            GenerationError::EmptyContext
        );
    }
}
