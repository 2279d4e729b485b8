//! Legends: the symbol-to-description block of a prompt, one flavor per
//! subtask.
//!
//! * `plain` — true glyphs, true descriptions.
//! * `agnostic_emoji` — arbitrary non-pictorial glyphs, true descriptions.
//! * `agnostic_name` — true glyphs, fixed placeholder words.
//! * `tricky` — true glyphs, every description word reversed.
//! * `adversarial` — true glyphs carrying a derangement of the true
//!   descriptions; structures are rendered with the glyph that carries each
//!   piece's description, so the intended answer is preserved.
//!
//! Sentences are rendered in the legend's description vocabulary. With
//! transformed vocabularies (placeholders, reversed words) nouns do not
//! inflect; with true-word vocabularies they pluralize naturally. Template
//! words ("There are", quantity phrases, "piece"/"pieces") are never
//! transformed.

use rand::seq::SliceRandom;

use super::SitPiece;
use crate::seeds;

/// The five legend subtasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subtask {
    Plain,
    AgnosticEmoji,
    AgnosticName,
    Tricky,
    Adversarial,
}

impl Subtask {
    pub const ALL: [Subtask; 5] = [
        Subtask::Plain,
        Subtask::AgnosticEmoji,
        Subtask::AgnosticName,
        Subtask::Tricky,
        Subtask::Adversarial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subtask::Plain => "plain",
            Subtask::AgnosticEmoji => "agnostic_emoji",
            Subtask::AgnosticName => "agnostic_name",
            Subtask::Tricky => "tricky",
            Subtask::Adversarial => "adversarial",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|s| s.name() == name)
    }
}

/// True glyphs, in [`SitPiece::ALL`] order.
pub const TRUE_GLYPHS: [&str; 9] = ["🔴", "🔵", "🟡", "🔺", "🔻", "🟥", "🟦", "🟨", "⬜"];

/// Non-pictorial replacement glyphs for the emoji-agnostic subtask.
pub const AGNOSTIC_GLYPHS: [&str; 9] = ["⊕", "⊖", "⊗", "⊘", "⊙", "⊚", "⊛", "⊜", "⊝"];

/// How description words appear in sentences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WordStyle {
    /// True words; head nouns pluralize by appending `s`.
    Natural,
    /// Transformed words; invariant under number.
    Mapped,
}

/// A fully resolved legend.
#[derive(Clone, Debug)]
pub struct Legend {
    pub subtask: Subtask,
    /// (glyph, description words), one entry per symbol in listing order.
    pub entries: Vec<(String, Vec<String>)>,
    /// Entry index used to display each piece in a structure.
    display: [usize; 9],
    pub word_style: WordStyle,
}

impl Legend {
    /// Glyph that displays a piece inside a structure.
    pub fn display_glyph(&self, piece: SitPiece) -> &str {
        &self.entries[self.display[piece.index()]].0
    }

    /// Sentence form of a description word.
    pub fn map_word(&self, word: &str) -> String {
        match self.word_style {
            WordStyle::Natural => word.to_string(),
            WordStyle::Mapped => transform_word(self.subtask, word),
        }
    }

    /// True when no glyph carries its natural description.
    pub fn is_derangement(&self) -> bool {
        SitPiece::ALL.iter().enumerate().all(|(k, piece)| {
            self.entries[k].1
                != piece
                    .description_words()
                    .iter()
                    .map(|w| w.to_string())
                    .collect::<Vec<_>>()
        })
    }
}

/// Fixed placeholder per description word; single distinct letters so the
/// same color or shape word always reads the same across a legend.
fn placeholder(word: &str) -> &'static str {
    match word {
        "red" => "X",
        "blue" => "Y",
        "yellow" => "Z",
        "circle" => "Q",
        "square" => "W",
        "triangle" => "T",
        "pointing" => "P",
        "up" => "U",
        "down" => "D",
        "empty" => "E",
        "space" => "S",
        other => panic!("no placeholder for {other:?}"),
    }
}

/// Reverses one word; applying it twice is the identity.
pub fn reverse_word(word: &str) -> String {
    word.chars().rev().collect()
}

fn transform_word(subtask: Subtask, word: &str) -> String {
    match subtask {
        Subtask::AgnosticName => placeholder(word).to_string(),
        Subtask::Tricky => reverse_word(word),
        _ => word.to_string(),
    }
}

fn true_descriptions() -> Vec<Vec<String>> {
    SitPiece::ALL
        .iter()
        .map(|p| p.description_words().iter().map(|w| w.to_string()).collect())
        .collect()
}

/// A seeded derangement of 0..9: shuffle and retry until no fixed point.
fn derangement(seed: u64) -> [usize; 9] {
    let mut rng = seeds::rng(seeds::stream(seed, "sit-derangement"));
    let mut perm: Vec<usize> = (0..9).collect();
    loop {
        perm.shuffle(&mut rng);
        if perm.iter().enumerate().all(|(i, &p)| i != p) {
            return perm.as_slice().try_into().unwrap();
        }
    }
}

/// Builds the legend of a subtask; `seed` only affects the adversarial
/// derangement.
pub fn legend_for(subtask: Subtask, seed: u64) -> Legend {
    let descriptions = true_descriptions();
    let identity: [usize; 9] = std::array::from_fn(|i| i);
    match subtask {
        Subtask::Plain => Legend {
            subtask,
            entries: TRUE_GLYPHS
                .iter()
                .zip(descriptions)
                .map(|(g, d)| (g.to_string(), d))
                .collect(),
            display: identity,
            word_style: WordStyle::Natural,
        },
        Subtask::AgnosticEmoji => Legend {
            subtask,
            entries: AGNOSTIC_GLYPHS
                .iter()
                .zip(descriptions)
                .map(|(g, d)| (g.to_string(), d))
                .collect(),
            display: identity,
            word_style: WordStyle::Natural,
        },
        Subtask::AgnosticName => Legend {
            subtask,
            entries: TRUE_GLYPHS
                .iter()
                .zip(&descriptions)
                .map(|(g, d)| {
                    (
                        g.to_string(),
                        d.iter().map(|w| placeholder(w).to_string()).collect(),
                    )
                })
                .collect(),
            display: identity,
            word_style: WordStyle::Mapped,
        },
        Subtask::Tricky => Legend {
            subtask,
            entries: TRUE_GLYPHS
                .iter()
                .zip(&descriptions)
                .map(|(g, d)| (g.to_string(), d.iter().map(|w| reverse_word(w)).collect()))
                .collect(),
            display: identity,
            word_style: WordStyle::Natural,
        },
        Subtask::Adversarial => {
            let sigma = derangement(seed);
            // entry k shows glyph k with the description of piece sigma(k);
            // piece p is therefore displayed by entry sigma^-1(p).
            let mut display = [0usize; 9];
            for (k, &s) in sigma.iter().enumerate() {
                display[s] = k;
            }
            Legend {
                subtask,
                entries: TRUE_GLYPHS
                    .iter()
                    .enumerate()
                    .map(|(k, g)| (g.to_string(), descriptions[sigma[k]].clone()))
                    .collect(),
                display,
                word_style: WordStyle::Natural,
            }
        }
    }
}
