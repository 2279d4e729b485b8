//! The symbol-interpretation questionnaire generator: five-way multiple
//! choice questions over a fixed nine-symbol world, rendered under five
//! legend subtasks that keep, scramble, or rename the symbol meanings.
//!
//! A question holds two structures and five sentences; exactly one sentence
//! is consistent with structure A and inconsistent with structure B, and
//! that stays true under every legend rendering.

mod legend;
mod render;
mod validate;

pub use legend::{legend_for, Legend, Subtask, WordStyle};
pub use render::{render_prompt, RenderedQuestion};
pub use validate::{validate_question, ValidationOutcome};

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::seeds;

/// Structure length in this world.
pub const SIT_LENGTH: usize = 6;

#[derive(Debug, Error)]
pub enum SitError {
    #[error("question sampling budget exhausted after {attempts} attempts")]
    BudgetExhausted { attempts: usize },
}

/// The nine symbols, in legend listing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SitPiece {
    RedCircle,
    BlueCircle,
    YellowCircle,
    RedTriangleUp,
    RedTriangleDown,
    RedSquare,
    BlueSquare,
    YellowSquare,
    Empty,
}

impl SitPiece {
    pub const ALL: [SitPiece; 9] = [
        SitPiece::RedCircle,
        SitPiece::BlueCircle,
        SitPiece::YellowCircle,
        SitPiece::RedTriangleUp,
        SitPiece::RedTriangleDown,
        SitPiece::RedSquare,
        SitPiece::BlueSquare,
        SitPiece::YellowSquare,
        SitPiece::Empty,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&p| p == self).unwrap()
    }

    /// Description words of the symbol, singular.
    pub fn description_words(self) -> &'static [&'static str] {
        match self {
            SitPiece::RedCircle => &["red", "circle"],
            SitPiece::BlueCircle => &["blue", "circle"],
            SitPiece::YellowCircle => &["yellow", "circle"],
            SitPiece::RedTriangleUp => &["red", "triangle", "pointing", "up"],
            SitPiece::RedTriangleDown => &["red", "triangle", "pointing", "down"],
            SitPiece::RedSquare => &["red", "square"],
            SitPiece::BlueSquare => &["blue", "square"],
            SitPiece::YellowSquare => &["yellow", "square"],
            SitPiece::Empty => &["empty", "space"],
        }
    }

    fn color(self) -> Option<SitColor> {
        match self {
            SitPiece::RedCircle | SitPiece::RedTriangleUp | SitPiece::RedTriangleDown
            | SitPiece::RedSquare => Some(SitColor::Red),
            SitPiece::BlueCircle | SitPiece::BlueSquare => Some(SitColor::Blue),
            SitPiece::YellowCircle | SitPiece::YellowSquare => Some(SitColor::Yellow),
            SitPiece::Empty => None,
        }
    }

    fn matches(self, pattern: &SitPattern) -> bool {
        if self == SitPiece::Empty {
            return false;
        }
        if let Some(color) = pattern.color {
            if self.color() != Some(color) {
                return false;
            }
        }
        match pattern.shape {
            None => true,
            Some(SitShape::Circle) => matches!(
                self,
                SitPiece::RedCircle | SitPiece::BlueCircle | SitPiece::YellowCircle
            ),
            Some(SitShape::Square) => matches!(
                self,
                SitPiece::RedSquare | SitPiece::BlueSquare | SitPiece::YellowSquare
            ),
            Some(SitShape::Triangle) => {
                matches!(self, SitPiece::RedTriangleUp | SitPiece::RedTriangleDown)
            }
            Some(SitShape::TriangleUp) => self == SitPiece::RedTriangleUp,
            Some(SitShape::TriangleDown) => self == SitPiece::RedTriangleDown,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SitColor {
    Red,
    Blue,
    Yellow,
}

impl SitColor {
    pub fn word(self) -> &'static str {
        match self {
            SitColor::Red => "red",
            SitColor::Blue => "blue",
            SitColor::Yellow => "yellow",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SitShape {
    Circle,
    Square,
    Triangle,
    TriangleUp,
    TriangleDown,
}

impl SitShape {
    /// Singular word sequence; the first word is the head noun.
    pub fn words(self) -> &'static [&'static str] {
        match self {
            SitShape::Circle => &["circle"],
            SitShape::Square => &["square"],
            SitShape::Triangle => &["triangle"],
            SitShape::TriangleUp => &["triangle", "pointing", "up"],
            SitShape::TriangleDown => &["triangle", "pointing", "down"],
        }
    }
}

/// Sentence object: a color, a shape, or both; restricted to combinations
/// some symbol actually realizes (triangles only come in red).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SitPattern {
    pub color: Option<SitColor>,
    pub shape: Option<SitShape>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SitQuantifier {
    Zero,
    ExactlyOne,
    AtLeastOne,
    AtMostOne,
    AtMostTwo,
    AtLeastTwo,
}

impl SitQuantifier {
    pub const ALL: [SitQuantifier; 6] = [
        SitQuantifier::Zero,
        SitQuantifier::ExactlyOne,
        SitQuantifier::AtLeastOne,
        SitQuantifier::AtMostOne,
        SitQuantifier::AtMostTwo,
        SitQuantifier::AtLeastTwo,
    ];

    /// (quantity phrase, noun is plural)
    pub fn phrase(self) -> (&'static str, bool) {
        match self {
            SitQuantifier::Zero => ("zero", true),
            SitQuantifier::ExactlyOne => ("exactly one", false),
            SitQuantifier::AtLeastOne => ("at least one", false),
            SitQuantifier::AtMostOne => ("at most one", false),
            SitQuantifier::AtMostTwo => ("at most two", true),
            SitQuantifier::AtLeastTwo => ("at least two", true),
        }
    }

    pub fn holds(self, count: usize) -> bool {
        match self {
            SitQuantifier::Zero => count == 0,
            SitQuantifier::ExactlyOne => count == 1,
            SitQuantifier::AtLeastOne => count >= 1,
            SitQuantifier::AtMostOne => count <= 1,
            SitQuantifier::AtMostTwo => count <= 2,
            SitQuantifier::AtLeastTwo => count >= 2,
        }
    }
}

/// One candidate sentence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SitSentence {
    pub quantifier: SitQuantifier,
    pub pattern: SitPattern,
}

impl SitSentence {
    /// Whether the sentence holds on a structure.
    pub fn consistent_with(&self, structure: &[SitPiece; SIT_LENGTH]) -> bool {
        let count = structure.iter().filter(|p| p.matches(&self.pattern)).count();
        self.quantifier.holds(count)
    }
}

/// Every sentence the generator samples from: 6 quantifiers times 17
/// realizable objects.
pub fn sentence_pool() -> Vec<SitSentence> {
    let mut patterns = Vec::new();
    for color in [SitColor::Red, SitColor::Blue, SitColor::Yellow] {
        patterns.push(SitPattern {
            color: Some(color),
            shape: None,
        });
    }
    for shape in [
        SitShape::Circle,
        SitShape::Square,
        SitShape::Triangle,
        SitShape::TriangleUp,
        SitShape::TriangleDown,
    ] {
        patterns.push(SitPattern {
            color: None,
            shape: Some(shape),
        });
    }
    for color in [SitColor::Red, SitColor::Blue, SitColor::Yellow] {
        for shape in [SitShape::Circle, SitShape::Square] {
            patterns.push(SitPattern {
                color: Some(color),
                shape: Some(shape),
            });
        }
    }
    for shape in [SitShape::Triangle, SitShape::TriangleUp, SitShape::TriangleDown] {
        patterns.push(SitPattern {
            color: Some(SitColor::Red),
            shape: Some(shape),
        });
    }
    SitQuantifier::ALL
        .iter()
        .flat_map(|&quantifier| {
            patterns
                .iter()
                .map(move |&pattern| SitSentence {
                    quantifier,
                    pattern,
                })
        })
        .collect()
}

/// A validated question: two structures, five sentences, one answer.
#[derive(Clone, Debug)]
pub struct SitQuestion {
    pub structure_a: [SitPiece; SIT_LENGTH],
    pub structure_b: [SitPiece; SIT_LENGTH],
    pub sentences: [SitSentence; 5],
    pub answer_index: usize,
    pub seed: u64,
}

const GENERATION_ATTEMPTS: usize = 10_000;

fn random_structure(rng: &mut impl Rng) -> [SitPiece; SIT_LENGTH] {
    std::array::from_fn(|_| SitPiece::ALL[rng.gen_range(0..SitPiece::ALL.len())])
}

/// Generates a question; deterministic per seed. The four distractors each
/// fail the selection criterion, and when sampling permits at least one is
/// consistent with both structures and at least one with neither.
pub fn generate_question(seed: u64) -> Result<SitQuestion, SitError> {
    let mut rng = seeds::rng(seed);
    let pool = sentence_pool();
    for _ in 0..GENERATION_ATTEMPTS {
        let structure_a = random_structure(&mut rng);
        let structure_b = random_structure(&mut rng);
        if structure_a == structure_b {
            continue;
        }
        let mut shuffled = pool.clone();
        shuffled.shuffle(&mut rng);

        let Some(answer_pos) = shuffled
            .iter()
            .position(|s| s.consistent_with(&structure_a) && !s.consistent_with(&structure_b))
        else {
            continue;
        };
        let answer = shuffled.remove(answer_pos);

        let mut both = Vec::new();
        let mut neither = Vec::new();
        let mut rest = Vec::new();
        for s in shuffled {
            let a = s.consistent_with(&structure_a);
            let b = s.consistent_with(&structure_b);
            if a && !b {
                continue; // would qualify as a second answer
            }
            match (a, b) {
                (true, true) => both.push(s),
                (false, false) => neither.push(s),
                _ => rest.push(s),
            }
        }
        let mut distractors: Vec<SitSentence> = Vec::with_capacity(4);
        if let Some(&s) = both.first() {
            distractors.push(s);
        }
        if let Some(&s) = neither.first() {
            distractors.push(s);
        }
        let mut filler = both
            .into_iter()
            .skip(1)
            .chain(neither.into_iter().skip(1))
            .chain(rest);
        while distractors.len() < 4 {
            let Some(s) = filler.next() else { break };
            distractors.push(s);
        }
        if distractors.len() < 4 {
            continue;
        }

        let mut sentences = vec![answer];
        sentences.extend_from_slice(&distractors[..4]);
        sentences.shuffle(&mut rng);
        let answer_index = sentences.iter().position(|&s| s == answer).unwrap();
        let question = SitQuestion {
            structure_a,
            structure_b,
            sentences: sentences.try_into().unwrap(),
            answer_index,
            seed,
        };
        debug_assert!(
            validate_question(&question, &legend_for(Subtask::Plain, seed)).valid,
            "generated questions must validate"
        );
        return Ok(question);
    }
    Err(SitError::BudgetExhausted {
        attempts: GENERATION_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentence_pool_size() {
        assert_eq!(sentence_pool().len(), 6 * 17);
    }

    #[test]
    fn matching_semantics() {
        let yellow_piece = SitPattern {
            color: Some(SitColor::Yellow),
            shape: None,
        };
        assert!(SitPiece::YellowSquare.matches(&yellow_piece));
        assert!(SitPiece::YellowCircle.matches(&yellow_piece));
        assert!(!SitPiece::RedSquare.matches(&yellow_piece));
        assert!(!SitPiece::Empty.matches(&yellow_piece));

        let triangle = SitPattern {
            color: None,
            shape: Some(SitShape::Triangle),
        };
        assert!(SitPiece::RedTriangleUp.matches(&triangle));
        assert!(SitPiece::RedTriangleDown.matches(&triangle));
        assert!(!SitPiece::RedSquare.matches(&triangle));
    }

    #[test]
    fn forced_answer_example() {
        // A single yellow square against an all-empty structure.
        let a = [
            SitPiece::YellowSquare,
            SitPiece::Empty,
            SitPiece::Empty,
            SitPiece::Empty,
            SitPiece::Empty,
            SitPiece::Empty,
        ];
        let b = [SitPiece::Empty; SIT_LENGTH];
        let sentence = SitSentence {
            quantifier: SitQuantifier::AtLeastOne,
            pattern: SitPattern {
                color: Some(SitColor::Yellow),
                shape: None,
            },
        };
        assert!(sentence.consistent_with(&a));
        assert!(!sentence.consistent_with(&b));
    }

    #[test]
    fn generation_is_deterministic_and_valid() {
        let a = generate_question(42).unwrap();
        let b = generate_question(42).unwrap();
        assert_eq!(a.structure_a, b.structure_a);
        assert_eq!(a.structure_b, b.structure_b);
        assert_eq!(a.sentences, b.sentences);
        assert_eq!(a.answer_index, b.answer_index);
        let c = generate_question(43).unwrap();
        assert!(a.structure_a != c.structure_a || a.sentences != c.sentences);
    }

    #[test]
    fn exactly_one_sentence_qualifies() {
        for seed in 0..50 {
            let q = generate_question(seed).unwrap();
            let qualifying: Vec<usize> = (0..5)
                .filter(|&i| {
                    q.sentences[i].consistent_with(&q.structure_a)
                        && !q.sentences[i].consistent_with(&q.structure_b)
                })
                .collect();
            assert_eq!(qualifying, vec![q.answer_index]);
        }
    }

    #[test]
    fn sentences_are_pairwise_distinct() {
        for seed in 0..20 {
            let q = generate_question(seed).unwrap();
            for i in 0..5 {
                for j in (i + 1)..5 {
                    assert_ne!(q.sentences[i], q.sentences[j]);
                }
            }
        }
    }
}
