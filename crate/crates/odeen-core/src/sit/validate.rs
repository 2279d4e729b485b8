//! Mechanical validation of a rendered question under a legend.
//!
//! The validator never looks at the generator's semantic objects: it parses
//! the rendered legend lines, the glyph structures, and the choice
//! sentences, and re-counts matches at the description-word level. That
//! makes it an independent check of the whole rendering pipeline, including
//! the adversarial glyph remapping.

use std::collections::HashMap;

use super::legend::Legend;
use super::render::{render_prompt, RenderedQuestion};
use super::SitQuestion;

/// Result of validating one question under one legend.
#[derive(Clone, Debug)]
pub struct ValidationOutcome {
    /// True when exactly one choice is consistent with structure A and
    /// inconsistent with structure B, and it is the declared answer.
    pub valid: bool,
    /// Indices of all qualifying choices.
    pub qualifying: Vec<usize>,
    pub diagnostics: Vec<String>,
}

const QUANTITY_PHRASES: [(&str, &str); 6] = [
    ("zero", "zero"),
    ("exactly one", "exactly_one"),
    ("at least one", "at_least_one"),
    ("at most one", "at_most_one"),
    ("at most two", "at_most_two"),
    ("at least two", "at_least_two"),
];

fn quantity_holds(name: &str, count: usize) -> bool {
    match name {
        "zero" => count == 0,
        "exactly_one" => count == 1,
        "at_least_one" => count >= 1,
        "at_most_one" => count <= 1,
        "at_most_two" => count <= 2,
        "at_least_two" => count >= 2,
        _ => unreachable!(),
    }
}

struct ParsedLegend {
    /// description words per glyph
    by_glyph: HashMap<String, Vec<String>>,
    /// first words of all descriptions, used to split color from shape
    leading_words: Vec<String>,
}

fn parse_legend_lines(lines: &[String]) -> Result<ParsedLegend, String> {
    let mut by_glyph = HashMap::new();
    let mut leading_words = Vec::new();
    for line in lines {
        let body = line
            .strip_prefix("- ")
            .ok_or_else(|| format!("legend line without bullet: {line:?}"))?;
        let body = body.trim_end_matches([';', '.']);
        let (glyph, rest) = body
            .split_once(" is ")
            .ok_or_else(|| format!("legend line without 'is': {line:?}"))?;
        let desc = rest
            .strip_prefix("a ")
            .or_else(|| rest.strip_prefix("an "))
            .ok_or_else(|| format!("legend line without article: {line:?}"))?;
        let words: Vec<String> = desc.split_whitespace().map(|w| w.to_string()).collect();
        if words.is_empty() {
            return Err(format!("empty description: {line:?}"));
        }
        leading_words.push(words[0].clone());
        if by_glyph.insert(glyph.to_string(), words).is_some() {
            return Err(format!("glyph {glyph:?} listed twice"));
        }
    }
    Ok(ParsedLegend {
        by_glyph,
        leading_words,
    })
}

/// Splits a rendered structure into per-cell description word lists by
/// greedy longest-glyph match.
fn parse_structure(text: &str, legend: &ParsedLegend) -> Result<Vec<Vec<String>>, String> {
    let mut rest = text;
    let mut cells = Vec::new();
    while !rest.is_empty() {
        let glyph = legend
            .by_glyph
            .keys()
            .filter(|g| rest.starts_with(g.as_str()))
            .max_by_key(|g| g.len())
            .ok_or_else(|| format!("unknown glyph at {rest:?}"))?;
        cells.push(legend.by_glyph[glyph].clone());
        rest = &rest[glyph.len()..];
    }
    Ok(cells)
}

struct ParsedSentence {
    quantity: &'static str,
    color: Option<String>,
    shape: Vec<String>,
    generic_noun: bool,
}

fn parse_sentence(text: &str, legend: &ParsedLegend) -> Result<ParsedSentence, String> {
    let body = text
        .strip_prefix("There is ")
        .or_else(|| text.strip_prefix("There are "))
        .ok_or_else(|| format!("sentence without template prefix: {text:?}"))?;
    let body = body
        .strip_suffix('.')
        .ok_or_else(|| format!("sentence without period: {text:?}"))?;

    let (phrase, quantity) = QUANTITY_PHRASES
        .iter()
        .filter(|(phrase, _)| {
            body.starts_with(phrase) && body.as_bytes().get(phrase.len()) == Some(&b' ')
        })
        .max_by_key(|(phrase, _)| phrase.len())
        .ok_or_else(|| format!("sentence without quantity: {text:?}"))?;
    let mut words: Vec<String> = body[phrase.len()..]
        .split_whitespace()
        .map(|w| w.to_string())
        .collect();
    if words.is_empty() {
        return Err(format!("sentence without object: {text:?}"));
    }

    let generic_noun = matches!(words.last().map(|w| w.as_str()), Some("piece" | "pieces"));
    if generic_noun {
        words.pop();
    }
    let color = if !words.is_empty() && legend.leading_words.contains(&words[0]) {
        Some(words.remove(0))
    } else {
        None
    };
    if generic_noun && (color.is_none() || !words.is_empty()) {
        return Err(format!("malformed generic-noun sentence: {text:?}"));
    }
    if !generic_noun && words.is_empty() {
        return Err(format!("sentence names no shape: {text:?}"));
    }
    Ok(ParsedSentence {
        quantity,
        color,
        shape: words,
        generic_noun,
    })
}

/// Whether sentence shape words match a cell's shape words, allowing a
/// naturally pluralized head noun.
fn shape_matches(pattern: &[String], cell_shape: &[String]) -> bool {
    if pattern.is_empty() {
        return true;
    }
    if pattern.len() > cell_shape.len() {
        return false;
    }
    let head_ok = pattern[0] == cell_shape[0]
        || (pattern[0].len() > 1 && pattern[0].strip_suffix('s') == Some(cell_shape[0].as_str()));
    head_ok && pattern[1..] == cell_shape[1..pattern.len()]
}

fn sentence_consistent(sentence: &ParsedSentence, cells: &[Vec<String>]) -> bool {
    let count = cells
        .iter()
        .filter(|cell| {
            if let Some(color) = &sentence.color {
                if &cell[0] != color {
                    return false;
                }
            }
            if sentence.generic_noun {
                // the color filter above already rejects empty cells, whose
                // leading word is never a sentence color
                return true;
            }
            shape_matches(&sentence.shape, &cell[1..])
        })
        .count();
    quantity_holds(sentence.quantity, count)
}

/// Validates a rendered question.
pub fn validate_rendered(rendered: &RenderedQuestion) -> ValidationOutcome {
    let mut diagnostics = Vec::new();
    let legend = match parse_legend_lines(&rendered.legend_lines) {
        Ok(l) => l,
        Err(e) => {
            return ValidationOutcome {
                valid: false,
                qualifying: Vec::new(),
                diagnostics: vec![e],
            }
        }
    };
    let (cells_a, cells_b) = match (
        parse_structure(&rendered.structure_a, &legend),
        parse_structure(&rendered.structure_b, &legend),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => {
            for r in [a, b] {
                if let Err(e) = r {
                    diagnostics.push(e);
                }
            }
            return ValidationOutcome {
                valid: false,
                qualifying: Vec::new(),
                diagnostics,
            };
        }
    };

    let mut qualifying = Vec::new();
    for (index, choice) in rendered.choices.iter().enumerate() {
        match parse_sentence(choice, &legend) {
            Ok(sentence) => {
                if sentence_consistent(&sentence, &cells_a)
                    && !sentence_consistent(&sentence, &cells_b)
                {
                    qualifying.push(index);
                }
            }
            Err(e) => diagnostics.push(e),
        }
    }
    let valid =
        diagnostics.is_empty() && qualifying.len() == 1 && qualifying[0] == rendered.answer_index;
    if qualifying.len() != 1 {
        diagnostics.push(format!("{} qualifying choices: {qualifying:?}", qualifying.len()));
    } else if qualifying[0] != rendered.answer_index {
        diagnostics.push(format!(
            "qualifying choice {} is not the declared answer {}",
            qualifying[0], rendered.answer_index
        ));
    }
    ValidationOutcome {
        valid,
        qualifying,
        diagnostics,
    }
}

/// Renders the question under the legend and validates the result.
pub fn validate_question(question: &SitQuestion, legend: &Legend) -> ValidationOutcome {
    validate_rendered(&render_prompt(question, legend))
}
