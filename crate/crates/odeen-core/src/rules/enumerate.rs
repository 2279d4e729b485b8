//! Deterministic enumeration of the rule language and the token/production
//! coverage report used by training-set selection.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Connective, ObjectPattern, Quantifier, Relation, RuleAst, ShapeSpec, SimpleProp};
use crate::world::WorldConfig;

/// Enumerates every well-formed rule, duplicate-free, in canonical order:
/// simple rules first, then relational, then conjunctions; within each form
/// the rightmost varying slot cycles fastest over its alternatives in
/// grammar listing order. The list index is the rule ID.
pub fn enumerate_rules(config: &WorldConfig) -> Vec<RuleAst> {
    let quantifiers = Quantifier::all();
    let objects = ObjectPattern::all(config);
    let simples: Vec<SimpleProp> = quantifiers
        .iter()
        .flat_map(|&quantifier| {
            objects
                .iter()
                .map(move |&object| SimpleProp { quantifier, object })
        })
        .collect();

    let n_simple = simples.len();
    let n_relational = quantifiers.len() * objects.len() * Relation::ALL.len() * objects.len();
    let n_conjunction = n_simple * Connective::ALL.len() * n_simple;
    let mut rules = Vec::with_capacity(n_simple + n_relational + n_conjunction);

    rules.extend(simples.iter().map(|&p| RuleAst::Simple(p)));
    for &quantifier in &quantifiers {
        for &subject in &objects {
            for relation in Relation::ALL {
                for &object in &objects {
                    rules.push(RuleAst::Relational {
                        quantifier,
                        subject,
                        relation,
                        object,
                    });
                }
            }
        }
    }
    for &left in &simples {
        for connective in Connective::ALL {
            for &right in &simples {
                rules.push(RuleAst::Conjunction {
                    left,
                    connective,
                    right,
                });
            }
        }
    }
    rules
}

/// Per-token and per-production usage counts over a list of rules.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverageReport {
    pub token_counts: BTreeMap<String, u64>,
    pub production_counts: BTreeMap<String, u64>,
    pub full_coverage: bool,
}

impl CoverageReport {
    pub fn uncovered(&self) -> Vec<String> {
        self.token_counts
            .iter()
            .filter(|(_, &n)| n == 0)
            .map(|(t, _)| format!("token {t}"))
            .chain(
                self.production_counts
                    .iter()
                    .filter(|(_, &n)| n == 0)
                    .map(|(p, _)| format!("production {p}")),
            )
            .collect()
    }
}

/// Every terminal of the language under `config`.
pub fn all_tokens(config: &WorldConfig) -> Vec<String> {
    let mut tokens: Vec<String> = [
        "at_least",
        "exactly",
        "at_most",
        "zero",
        "1",
        "2",
        "pyramid",
        "block",
        "pointing_up",
        "pointing_down",
        "touching",
        "surrounded_by",
        "at_the_right_of",
        "and",
        "or",
    ]
    .iter()
    .map(|t| t.to_string())
    .collect();
    tokens.extend(config.colors.iter().cloned());
    tokens
}

/// Every production alternative of the grammar under `config`.
pub fn all_productions(config: &WorldConfig) -> Vec<String> {
    let mut productions: Vec<String> = [
        "rule.simple",
        "rule.relational",
        "rule.conjunction",
        "obj.color",
        "obj.shape",
        "obj.color_shape",
        "qty.at_least",
        "qty.exactly",
        "qty.at_most",
        "qty.zero",
        "num.1",
        "num.2",
        "shape.pyramid_oriented",
        "shape.pyramid",
        "shape.block",
        "orien.pointing_up",
        "orien.pointing_down",
        "rel.touching",
        "rel.surrounded_by",
        "rel.at_the_right_of",
        "conj.and",
        "conj.or",
    ]
    .iter()
    .map(|p| p.to_string())
    .collect();
    productions.extend(config.colors.iter().map(|c| format!("col.{c}")));
    productions
}

fn bump(map: &mut BTreeMap<String, u64>, key: &str) {
    *map.get_mut(key).unwrap_or_else(|| panic!("unknown key {key}")) += 1;
}

fn tally_quantifier(productions: &mut BTreeMap<String, u64>, q: Quantifier) {
    match q {
        Quantifier::AtLeast(n) => {
            bump(productions, "qty.at_least");
            bump(productions, &format!("num.{n}"));
        }
        Quantifier::Exactly(n) => {
            bump(productions, "qty.exactly");
            bump(productions, &format!("num.{n}"));
        }
        Quantifier::AtMost(n) => {
            bump(productions, "qty.at_most");
            bump(productions, &format!("num.{n}"));
        }
        Quantifier::Zero => bump(productions, "qty.zero"),
    }
}

fn tally_object(productions: &mut BTreeMap<String, u64>, o: ObjectPattern, config: &WorldConfig) {
    match (o.color, o.shape) {
        (Some(_), None) => bump(productions, "obj.color"),
        (None, Some(_)) => bump(productions, "obj.shape"),
        (Some(_), Some(_)) => bump(productions, "obj.color_shape"),
        (None, None) => unreachable!("object patterns have a color or a shape"),
    }
    if let Some(c) = o.color {
        bump(productions, &format!("col.{}", config.colors[c as usize]));
    }
    match o.shape {
        Some(ShapeSpec::PyramidUp) => {
            bump(productions, "shape.pyramid_oriented");
            bump(productions, "orien.pointing_up");
        }
        Some(ShapeSpec::PyramidDown) => {
            bump(productions, "shape.pyramid_oriented");
            bump(productions, "orien.pointing_down");
        }
        Some(ShapeSpec::Pyramid) => bump(productions, "shape.pyramid"),
        Some(ShapeSpec::Block) => bump(productions, "shape.block"),
        None => {}
    }
}

fn tally_simple(productions: &mut BTreeMap<String, u64>, p: &SimpleProp, config: &WorldConfig) {
    tally_quantifier(productions, p.quantifier);
    tally_object(productions, p.object, config);
}

/// Counts token and production usage; `full_coverage` is true when every
/// token and every production alternative appears at least once.
pub fn coverage_report(rules: &[RuleAst], config: &WorldConfig) -> CoverageReport {
    let mut token_counts: BTreeMap<String, u64> =
        all_tokens(config).into_iter().map(|t| (t, 0)).collect();
    let mut production_counts: BTreeMap<String, u64> =
        all_productions(config).into_iter().map(|p| (p, 0)).collect();

    for rule in rules {
        for token in super::render_rule(rule, config).split_whitespace() {
            bump(&mut token_counts, token);
        }
        match rule {
            RuleAst::Simple(p) => {
                bump(&mut production_counts, "rule.simple");
                tally_simple(&mut production_counts, p, config);
            }
            RuleAst::Relational {
                quantifier,
                subject,
                relation,
                object,
            } => {
                bump(&mut production_counts, "rule.relational");
                tally_quantifier(&mut production_counts, *quantifier);
                tally_object(&mut production_counts, *subject, config);
                bump(
                    &mut production_counts,
                    &format!("rel.{}", relation.token()),
                );
                tally_object(&mut production_counts, *object, config);
            }
            RuleAst::Conjunction {
                left,
                connective,
                right,
            } => {
                bump(&mut production_counts, "rule.conjunction");
                tally_simple(&mut production_counts, left, config);
                bump(
                    &mut production_counts,
                    &format!("conj.{}", connective.token()),
                );
                tally_simple(&mut production_counts, right, config);
            }
        }
    }

    let full_coverage = token_counts.values().all(|&n| n > 0)
        && production_counts.values().all(|&n| n > 0);
    CoverageReport {
        token_counts,
        production_counts,
        full_coverage,
    }
}
