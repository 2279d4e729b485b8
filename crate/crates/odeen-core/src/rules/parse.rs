//! Strict recursive-descent parser for the rule language. Input is
//! whitespace-normalized; anything outside the grammar is rejected with the
//! offending token position. There is no tolerant mode: a conjecture either
//! parses or it does not.

use thiserror::Error;

use super::{Connective, ObjectPattern, Quantifier, Relation, RuleAst, ShapeSpec, SimpleProp};
use crate::world::WorldConfig;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("parse error at token {position}: expected {expected}, found {found}")]
pub struct ParseError {
    /// 0-based index of the offending token; equals the token count when the
    /// input ended too early.
    pub position: usize,
    pub expected: String,
    /// The offending token, or `"end of input"`.
    pub found: String,
}

struct Cursor<'a> {
    tokens: Vec<&'a str>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            tokens: text.split_whitespace().collect(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<&'a str> {
        let tok = self.peek();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            position: self.pos,
            expected: expected.to_string(),
            found: self
                .peek()
                .map_or_else(|| "end of input".to_string(), |t| format!("{t:?}")),
        }
    }
}

fn parse_numeral(cursor: &mut Cursor) -> Result<u8, ParseError> {
    match cursor.peek() {
        Some("1") => {
            cursor.bump();
            Ok(1)
        }
        Some("2") => {
            cursor.bump();
            Ok(2)
        }
        _ => Err(cursor.error("numeral 1 or 2")),
    }
}

fn parse_quantifier(cursor: &mut Cursor) -> Result<Quantifier, ParseError> {
    match cursor.peek() {
        Some("at_least") => {
            cursor.bump();
            Ok(Quantifier::AtLeast(parse_numeral(cursor)?))
        }
        Some("exactly") => {
            cursor.bump();
            Ok(Quantifier::Exactly(parse_numeral(cursor)?))
        }
        Some("at_most") => {
            cursor.bump();
            Ok(Quantifier::AtMost(parse_numeral(cursor)?))
        }
        Some("zero") => {
            cursor.bump();
            Ok(Quantifier::Zero)
        }
        _ => Err(cursor.error("quantifier (at_least, exactly, at_most, zero)")),
    }
}

fn parse_shape(cursor: &mut Cursor) -> Option<ShapeSpec> {
    match cursor.peek() {
        Some("pyramid") => {
            cursor.bump();
            match cursor.peek() {
                Some("pointing_up") => {
                    cursor.bump();
                    Some(ShapeSpec::PyramidUp)
                }
                Some("pointing_down") => {
                    cursor.bump();
                    Some(ShapeSpec::PyramidDown)
                }
                _ => Some(ShapeSpec::Pyramid),
            }
        }
        Some("block") => {
            cursor.bump();
            Some(ShapeSpec::Block)
        }
        _ => None,
    }
}

fn parse_object(cursor: &mut Cursor, config: &WorldConfig) -> Result<ObjectPattern, ParseError> {
    let color = cursor.peek().and_then(|tok| {
        let idx = config.colors.iter().position(|c| c == tok)?;
        cursor.bump();
        Some(idx as u8)
    });
    let shape = parse_shape(cursor);
    if color.is_none() && shape.is_none() {
        return Err(cursor.error("object (color and/or shape)"));
    }
    Ok(ObjectPattern { color, shape })
}

fn parse_simple(cursor: &mut Cursor, config: &WorldConfig) -> Result<SimpleProp, ParseError> {
    Ok(SimpleProp {
        quantifier: parse_quantifier(cursor)?,
        object: parse_object(cursor, config)?,
    })
}

fn parse_relation(tok: &str) -> Option<Relation> {
    match tok {
        "touching" => Some(Relation::Touching),
        "surrounded_by" => Some(Relation::SurroundedBy),
        "at_the_right_of" => Some(Relation::AtTheRightOf),
        _ => None,
    }
}

/// Parses a rule string into its unique AST.
pub fn parse_rule(text: &str, config: &WorldConfig) -> Result<RuleAst, ParseError> {
    let mut cursor = Cursor::new(text);
    let first = parse_simple(&mut cursor, config)?;
    let ast = match cursor.peek() {
        None => RuleAst::Simple(first),
        Some(tok) if parse_relation(tok).is_some() => {
            let relation = parse_relation(tok).unwrap();
            cursor.bump();
            let object = parse_object(&mut cursor, config)?;
            RuleAst::Relational {
                quantifier: first.quantifier,
                subject: first.object,
                relation,
                object,
            }
        }
        Some("and") => {
            cursor.bump();
            RuleAst::Conjunction {
                left: first,
                connective: Connective::And,
                right: parse_simple(&mut cursor, config)?,
            }
        }
        Some("or") => {
            cursor.bump();
            RuleAst::Conjunction {
                left: first,
                connective: Connective::Or,
                right: parse_simple(&mut cursor, config)?,
            }
        }
        Some(_) => return Err(cursor.error("relation, connective, or end of rule")),
    };
    if cursor.peek().is_some() {
        return Err(cursor.error("end of rule"));
    }
    Ok(ast)
}
