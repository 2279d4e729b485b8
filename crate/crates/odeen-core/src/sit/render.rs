//! Prompt rendering: the legend block followed by the question with both
//! structures and the five choices.

use super::legend::{Legend, WordStyle};
use super::{SitPiece, SitQuestion, SitSentence, SIT_LENGTH};

/// A rendered question, kept in parts so validation and file output can use
/// them without re-parsing the prompt.
#[derive(Clone, Debug)]
pub struct RenderedQuestion {
    pub subtask: String,
    pub legend_lines: Vec<String>,
    pub structure_a: String,
    pub structure_b: String,
    pub choices: [String; 5],
    pub answer_index: usize,
    /// The full plain-text prompt, choices included.
    pub prompt: String,
}

fn article_for(word: &str) -> &'static str {
    match word.chars().next() {
        Some('a' | 'e' | 'i' | 'o' | 'u' | 'A' | 'E' | 'I' | 'O' | 'U') => "an",
        _ => "a",
    }
}

fn legend_line(glyph: &str, description: &[String], last: bool) -> String {
    let desc = description.join(" ");
    let article = article_for(&desc);
    let terminator = if last { "." } else { ";" };
    format!("- {glyph} is {article} {desc}{terminator}")
}

fn render_structure(structure: &[SitPiece; SIT_LENGTH], legend: &Legend) -> String {
    structure.iter().map(|&p| legend.display_glyph(p)).collect()
}

/// Renders one sentence in the legend's vocabulary.
pub fn render_sentence(sentence: &SitSentence, legend: &Legend) -> String {
    let (quantity, plural) = sentence.quantifier.phrase();
    let verb = if plural { "are" } else { "is" };
    let mut noun_phrase: Vec<String> = Vec::new();
    if let Some(color) = sentence.pattern.color {
        noun_phrase.push(legend.map_word(color.word()));
    }
    match sentence.pattern.shape {
        Some(shape) => {
            let words = shape.words();
            let head = legend.map_word(words[0]);
            let head = if plural && legend.word_style == WordStyle::Natural {
                format!("{head}s")
            } else {
                head
            };
            noun_phrase.push(head);
            for word in &words[1..] {
                noun_phrase.push(legend.map_word(word));
            }
        }
        None => noun_phrase.push(if plural { "pieces" } else { "piece" }.to_string()),
    }
    format!("There {verb} {quantity} {}.", noun_phrase.join(" "))
}

/// Renders the full prompt of a question under a legend. The underlying
/// question, including its answer index, is the same for every subtask.
pub fn render_prompt(question: &SitQuestion, legend: &Legend) -> RenderedQuestion {
    let n = legend.entries.len();
    let legend_lines: Vec<String> = legend
        .entries
        .iter()
        .enumerate()
        .map(|(k, (glyph, desc))| legend_line(glyph, desc, k + 1 == n))
        .collect();
    let structure_a = render_structure(&question.structure_a, legend);
    let structure_b = render_structure(&question.structure_b, legend);
    let choices: [String; 5] =
        std::array::from_fn(|i| render_sentence(&question.sentences[i], legend));

    let mut prompt = String::new();
    prompt.push_str(&format!(
        "In the SIT-{} world, a structure is a sequence of six emojis. \
         Below are the emojis used, along with their descriptions:\n",
        legend.subtask.name()
    ));
    for line in &legend_lines {
        prompt.push_str(line);
        prompt.push('\n');
    }
    prompt.push('\n');
    prompt.push_str(&format!(
        "Choose the sentence consistent with the structure {structure_a} \
         and not consistent with the structure {structure_b}:\n"
    ));
    for choice in &choices {
        prompt.push_str("- ");
        prompt.push_str(choice);
        prompt.push('\n');
    }

    RenderedQuestion {
        subtask: legend.subtask.name().to_string(),
        legend_lines,
        structure_a,
        structure_b,
        choices,
        answer_index: question.answer_index,
        prompt,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sit::legend::{legend_for, Subtask};
    use crate::sit::{generate_question, SitColor, SitPattern, SitQuantifier, SitShape};

    fn sentence(q: SitQuantifier, color: Option<SitColor>, shape: Option<SitShape>) -> SitSentence {
        SitSentence {
            quantifier: q,
            pattern: SitPattern { color, shape },
        }
    }

    #[test]
    fn plain_legend_golden_line() {
        let legend = legend_for(Subtask::Plain, 0);
        let rendered = legend_line("🟥", &legend.entries[5].1, false);
        assert_eq!(rendered, "- 🟥 is a red square;");
        let empty = legend_line("⬜", &legend.entries[8].1, true);
        assert_eq!(empty, "- ⬜ is an empty space.");
    }

    #[test]
    fn tricky_legend_golden_line() {
        let legend = legend_for(Subtask::Tricky, 0);
        assert_eq!(
            legend_line("🟥", &legend.entries[5].1, false),
            "- 🟥 is a der erauqs;"
        );
    }

    #[test]
    fn agnostic_name_golden_line() {
        let legend = legend_for(Subtask::AgnosticName, 0);
        assert_eq!(
            legend_line("🟥", &legend.entries[5].1, false),
            "- 🟥 is a X W;"
        );
    }

    #[test]
    fn sentence_realizations() {
        let plain = legend_for(Subtask::Plain, 0);
        assert_eq!(
            render_sentence(
                &sentence(SitQuantifier::Zero, Some(SitColor::Yellow), None),
                &plain
            ),
            "There are zero yellow pieces."
        );
        assert_eq!(
            render_sentence(
                &sentence(
                    SitQuantifier::ExactlyOne,
                    Some(SitColor::Red),
                    Some(SitShape::Square)
                ),
                &plain
            ),
            "There is exactly one red square."
        );
        assert_eq!(
            render_sentence(
                &sentence(
                    SitQuantifier::AtMostTwo,
                    Some(SitColor::Yellow),
                    Some(SitShape::Square)
                ),
                &plain
            ),
            "There are at most two yellow squares."
        );
        assert_eq!(
            render_sentence(
                &sentence(SitQuantifier::AtLeastTwo, None, Some(SitShape::TriangleUp)),
                &plain
            ),
            "There are at least two triangles pointing up."
        );
    }

    #[test]
    fn mapped_sentences_do_not_inflect() {
        let name = legend_for(Subtask::AgnosticName, 0);
        assert_eq!(
            render_sentence(
                &sentence(
                    SitQuantifier::AtMostTwo,
                    Some(SitColor::Yellow),
                    Some(SitShape::Square)
                ),
                &name
            ),
            "There are at most two Z W."
        );
        let tricky = legend_for(Subtask::Tricky, 0);
        assert_eq!(
            render_sentence(
                &sentence(
                    SitQuantifier::AtMostTwo,
                    Some(SitColor::Yellow),
                    Some(SitShape::Square)
                ),
                &tricky
            ),
            "There are at most two wolley erauqs."
        );
    }

    #[test]
    fn adversarial_structures_remap_but_sentences_do_not() {
        let q = generate_question(7).unwrap();
        let plain = render_prompt(&q, &legend_for(Subtask::Plain, 7));
        let adv = render_prompt(&q, &legend_for(Subtask::Adversarial, 7));
        assert_eq!(plain.choices, adv.choices);
        assert_eq!(plain.answer_index, adv.answer_index);
        assert_ne!(plain.structure_a, adv.structure_a);
    }

    #[test]
    fn prompt_contains_all_parts() {
        let q = generate_question(3).unwrap();
        let rendered = render_prompt(&q, &legend_for(Subtask::Plain, 3));
        assert!(rendered.prompt.starts_with("In the SIT-plain world"));
        assert!(rendered.prompt.contains(&rendered.structure_a));
        assert!(rendered.prompt.contains(&rendered.structure_b));
        for choice in &rendered.choices {
            assert!(rendered.prompt.contains(choice.as_str()));
        }
        assert_eq!(rendered.legend_lines.len(), 9);
    }
}
