//! The Odeen explanation language: AST, canonical rendering, deterministic
//! enumeration of every well-formed rule, and a strict parser.
//!
//! The grammar, with alternatives in listing order:
//!
//! ```text
//! RULE  ::= PROP_S | PROP | PROP_S CONJ PROP_S
//! PROP  ::= QTY OBJ REL OBJ
//! PROP_S::= QTY OBJ
//! OBJ   ::= COL | SHAPE | COL SHAPE
//! QTY   ::= at_least NUM | exactly NUM | at_most NUM | zero
//! SHAPE ::= pyramid ORIEN | pyramid | block
//! REL   ::= touching | surrounded_by | at_the_right_of
//! ORIEN ::= pointing_up | pointing_down
//! NUM   ::= 1 | 2
//! CONJ  ::= and | or
//! COL   ::= red | blue        (one alternative per configured color)
//! ```
//!
//! A rule's canonical text is the space-separated token sequence of its
//! derivation; its ID is its position in the enumeration.

mod enumerate;
mod parse;

pub use enumerate::{coverage_report, enumerate_rules, CoverageReport};
pub use parse::{parse_rule, ParseError};

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::world::WorldConfig;

/// Quantifier over a match count; `n` is 1 or 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    AtLeast(u8),
    Exactly(u8),
    AtMost(u8),
    Zero,
}

impl Quantifier {
    /// All quantifiers in enumeration order (numeral cycling fastest).
    pub fn all() -> [Quantifier; 7] {
        [
            Quantifier::AtLeast(1),
            Quantifier::AtLeast(2),
            Quantifier::Exactly(1),
            Quantifier::Exactly(2),
            Quantifier::AtMost(1),
            Quantifier::AtMost(2),
            Quantifier::Zero,
        ]
    }

    /// Whether a match count satisfies the quantifier.
    pub fn holds(self, count: usize) -> bool {
        match self {
            Quantifier::AtLeast(n) => count >= n as usize,
            Quantifier::Exactly(n) => count == n as usize,
            Quantifier::AtMost(n) => count <= n as usize,
            Quantifier::Zero => count == 0,
        }
    }
}

/// Shape constraint of an object pattern, in grammar listing order
/// (`pyramid ORIEN` alternatives first, then bare `pyramid`, then `block`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShapeSpec {
    PyramidUp,
    PyramidDown,
    Pyramid,
    Block,
}

impl ShapeSpec {
    pub const ALL: [ShapeSpec; 4] = [
        ShapeSpec::PyramidUp,
        ShapeSpec::PyramidDown,
        ShapeSpec::Pyramid,
        ShapeSpec::Block,
    ];
}

/// An object pattern: a color constraint, a shape constraint, or both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ObjectPattern {
    pub color: Option<u8>,
    pub shape: Option<ShapeSpec>,
}

impl ObjectPattern {
    pub fn new(color: Option<u8>, shape: Option<ShapeSpec>) -> Self {
        debug_assert!(color.is_some() || shape.is_some());
        Self { color, shape }
    }

    /// All object patterns in enumeration order: colors, shapes, then
    /// color-shape pairs with the shape cycling fastest.
    pub fn all(config: &WorldConfig) -> Vec<ObjectPattern> {
        let n_colors = config.colors.len() as u8;
        let mut out = Vec::with_capacity(n_colors as usize * 5 + 4);
        for c in 0..n_colors {
            out.push(ObjectPattern::new(Some(c), None));
        }
        for s in ShapeSpec::ALL {
            out.push(ObjectPattern::new(None, Some(s)));
        }
        for c in 0..n_colors {
            for s in ShapeSpec::ALL {
                out.push(ObjectPattern::new(Some(c), Some(s)));
            }
        }
        out
    }
}

/// Relation between the counted object and its witness, in listing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Touching,
    SurroundedBy,
    AtTheRightOf,
}

impl Relation {
    pub const ALL: [Relation; 3] = [
        Relation::Touching,
        Relation::SurroundedBy,
        Relation::AtTheRightOf,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Relation::Touching => "touching",
            Relation::SurroundedBy => "surrounded_by",
            Relation::AtTheRightOf => "at_the_right_of",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Connective {
    And,
    Or,
}

impl Connective {
    pub const ALL: [Connective; 2] = [Connective::And, Connective::Or];

    pub fn token(self) -> &'static str {
        match self {
            Connective::And => "and",
            Connective::Or => "or",
        }
    }
}

/// A quantified object proposition, the building block of every rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SimpleProp {
    pub quantifier: Quantifier,
    pub object: ObjectPattern,
}

/// A parsed rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleAst {
    Simple(SimpleProp),
    Relational {
        quantifier: Quantifier,
        subject: ObjectPattern,
        relation: Relation,
        object: ObjectPattern,
    },
    Conjunction {
        left: SimpleProp,
        connective: Connective,
        right: SimpleProp,
    },
}

fn write_quantifier(out: &mut String, q: Quantifier) {
    match q {
        Quantifier::AtLeast(n) => write!(out, "at_least {n}").unwrap(),
        Quantifier::Exactly(n) => write!(out, "exactly {n}").unwrap(),
        Quantifier::AtMost(n) => write!(out, "at_most {n}").unwrap(),
        Quantifier::Zero => out.push_str("zero"),
    }
}

fn write_object(out: &mut String, o: ObjectPattern, config: &WorldConfig) {
    let mut first = true;
    if let Some(c) = o.color {
        out.push_str(&config.colors[c as usize]);
        first = false;
    }
    if let Some(s) = o.shape {
        if !first {
            out.push(' ');
        }
        match s {
            ShapeSpec::PyramidUp => out.push_str("pyramid pointing_up"),
            ShapeSpec::PyramidDown => out.push_str("pyramid pointing_down"),
            ShapeSpec::Pyramid => out.push_str("pyramid"),
            ShapeSpec::Block => out.push_str("block"),
        }
    }
}

fn write_simple(out: &mut String, p: &SimpleProp, config: &WorldConfig) {
    write_quantifier(out, p.quantifier);
    out.push(' ');
    write_object(out, p.object, config);
}

/// Canonical space-separated token text of a rule.
pub fn render_rule(ast: &RuleAst, config: &WorldConfig) -> String {
    let mut out = String::new();
    match ast {
        RuleAst::Simple(p) => write_simple(&mut out, p, config),
        RuleAst::Relational {
            quantifier,
            subject,
            relation,
            object,
        } => {
            write_quantifier(&mut out, *quantifier);
            out.push(' ');
            write_object(&mut out, *subject, config);
            out.push(' ');
            out.push_str(relation.token());
            out.push(' ');
            write_object(&mut out, *object, config);
        }
        RuleAst::Conjunction {
            left,
            connective,
            right,
        } => {
            write_simple(&mut out, left, config);
            out.push(' ');
            out.push_str(connective.token());
            out.push(' ');
            write_simple(&mut out, right, config);
        }
    }
    out
}

/// The full enumerated language with text and ID lookup.
///
/// Rule ID `i` is line `i` of the `rules.txt` companion file and row `i` of
/// any semantic matrix built from this set.
#[derive(Clone, Debug)]
pub struct RuleSet {
    config: WorldConfig,
    rules: Vec<RuleAst>,
    texts: Vec<String>,
    by_text: HashMap<String, usize>,
}

impl RuleSet {
    /// Enumerates the language of `config`; pure function of the config.
    pub fn enumerate(config: &WorldConfig) -> Self {
        let rules = enumerate_rules(config);
        let texts: Vec<String> = rules.iter().map(|r| render_rule(r, config)).collect();
        let by_text = texts
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self {
            config: config.clone(),
            rules,
            texts,
            by_text,
        }
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> &[RuleAst] {
        &self.rules
    }

    pub fn get(&self, id: usize) -> &RuleAst {
        &self.rules[id]
    }

    pub fn text(&self, id: usize) -> &str {
        &self.texts[id]
    }

    pub fn texts(&self) -> &[String] {
        &self.texts
    }

    /// ID of a canonical rule text, if enumerated.
    pub fn id_of_text(&self, text: &str) -> Option<usize> {
        self.by_text.get(text).copied()
    }

    /// ID of an AST; every well-formed AST over this config is enumerated.
    pub fn id_of(&self, ast: &RuleAst) -> Option<usize> {
        self.id_of_text(&render_rule(ast, &self.config))
    }

    /// Parses a rule string and resolves its ID.
    pub fn parse(&self, text: &str) -> Result<(usize, RuleAst), ParseError> {
        let ast = parse_rule(text, &self.config)?;
        let id = self
            .id_of(&ast)
            .expect("parsed rules are always enumerated");
        Ok((id, ast))
    }
}
