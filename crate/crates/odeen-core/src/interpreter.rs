//! The hard-coded interpreter: evaluates a rule against a structure and
//! produces the binary tag (1 = the structure adheres to the rule).
//!
//! These semantics are normative for the whole crate:
//!
//! * An object pattern never matches an empty cell. A color constraint must
//!   equal the piece color. `block` matches blocks, `pyramid` matches both
//!   orientations, `pyramid pointing_up`/`pointing_down` match exactly.
//! * A simple proposition counts the cells matching its object and applies
//!   the quantifier to the count.
//! * A relational proposition counts the positions `i` whose cell matches
//!   the subject AND that have a witness `j != i` matching the object:
//!   `touching` needs `|i - j| = 1`; `at_the_right_of` needs some `j < i`
//!   at any distance; `surrounded_by` needs both neighbors `i-1` and `i+1`
//!   to exist and match. Empty cells never match and never block reach.
//! * A conjunction combines the truth values of its two simple operands.

use rayon::prelude::*;

use crate::bits::TagVector;
use crate::rules::{ObjectPattern, Relation, RuleAst, ShapeSpec, SimpleProp};
use crate::world::{structure_from_id, Piece, Shape, Structure, WorldConfig};

/// Whether a piece satisfies an object pattern.
pub fn piece_matches(piece: Piece, pattern: ObjectPattern) -> bool {
    let Piece::Occupied { color, shape } = piece else {
        return false;
    };
    if let Some(c) = pattern.color {
        if c != color {
            return false;
        }
    }
    match pattern.shape {
        None => true,
        Some(ShapeSpec::Block) => shape == Shape::Block,
        Some(ShapeSpec::Pyramid) => shape == Shape::PyramidUp || shape == Shape::PyramidDown,
        Some(ShapeSpec::PyramidUp) => shape == Shape::PyramidUp,
        Some(ShapeSpec::PyramidDown) => shape == Shape::PyramidDown,
    }
}

/// Number of cells matching a pattern.
pub fn count_matches(cells: &[Piece], pattern: ObjectPattern) -> usize {
    cells.iter().filter(|&&p| piece_matches(p, pattern)).count()
}

fn has_witness(cells: &[Piece], i: usize, relation: Relation, object: ObjectPattern) -> bool {
    match relation {
        Relation::Touching => {
            (i > 0 && piece_matches(cells[i - 1], object))
                || (i + 1 < cells.len() && piece_matches(cells[i + 1], object))
        }
        Relation::SurroundedBy => {
            i > 0
                && i + 1 < cells.len()
                && piece_matches(cells[i - 1], object)
                && piece_matches(cells[i + 1], object)
        }
        Relation::AtTheRightOf => cells[..i].iter().any(|&p| piece_matches(p, object)),
    }
}

/// Number of subject matches having a relation witness.
pub fn count_relational(
    cells: &[Piece],
    subject: ObjectPattern,
    relation: Relation,
    object: ObjectPattern,
) -> usize {
    (0..cells.len())
        .filter(|&i| piece_matches(cells[i], subject) && has_witness(cells, i, relation, object))
        .count()
}

fn eval_simple(prop: &SimpleProp, cells: &[Piece]) -> bool {
    prop.quantifier.holds(count_matches(cells, prop.object))
}

/// Evaluates a rule on a structure; total on valid inputs.
pub fn eval_rule(ast: &RuleAst, structure: &Structure) -> bool {
    let cells = structure.cells();
    match ast {
        RuleAst::Simple(p) => eval_simple(p, cells),
        RuleAst::Relational {
            quantifier,
            subject,
            relation,
            object,
        } => quantifier.holds(count_relational(cells, *subject, *relation, *object)),
        RuleAst::Conjunction {
            left,
            connective,
            right,
        } => match connective {
            crate::rules::Connective::And => eval_simple(left, cells) && eval_simple(right, cells),
            crate::rules::Connective::Or => eval_simple(left, cells) || eval_simple(right, cells),
        },
    }
}

/// Tags the whole universe under one rule: bit `j` is
/// `eval_rule(ast, structure_from_id(j))`. Parallel over ID ranges with
/// deterministic output.
pub fn tag_universe(ast: &RuleAst, config: &WorldConfig) -> TagVector {
    let universe = config.universe_size() as usize;
    let n_words = crate::bits::words_for(universe);
    let words: Vec<u64> = (0..n_words)
        .into_par_iter()
        .map(|w| {
            let mut word = 0u64;
            let base = w * 64;
            for b in 0..64 {
                let id = (base + b) as u64;
                if id >= universe as u64 {
                    break;
                }
                let s = structure_from_id(id, config).expect("id in range");
                if eval_rule(ast, &s) {
                    word |= 1 << b;
                }
            }
            word
        })
        .collect();
    TagVector::from_words(words, universe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::parse_rule;
    use crate::world::{parse_structure_tokens, WorldConfig};

    fn config() -> WorldConfig {
        WorldConfig::default()
    }

    fn eval(rule: &str, board: &str) -> bool {
        let config = config();
        let ast = parse_rule(rule, &config).unwrap();
        let s = parse_structure_tokens(board, &config).unwrap();
        eval_rule(&ast, &s)
    }

    #[test]
    fn empty_cells_match_nothing() {
        let config = config();
        let red = parse_rule("zero red", &config).unwrap();
        let RuleAst::Simple(p) = red else { unreachable!() };
        assert!(!piece_matches(Piece::Empty, p.object));
    }

    #[test]
    fn bare_pyramid_matches_both_orientations() {
        let up = Piece::Occupied {
            color: 0,
            shape: Shape::PyramidUp,
        };
        let down = Piece::Occupied {
            color: 0,
            shape: Shape::PyramidDown,
        };
        let block = Piece::Occupied {
            color: 0,
            shape: Shape::Block,
        };
        let pyramid = ObjectPattern::new(None, Some(ShapeSpec::Pyramid));
        assert!(piece_matches(up, pyramid));
        assert!(piece_matches(down, pyramid));
        assert!(!piece_matches(block, pyramid));
    }

    #[test]
    fn color_mismatch_fails() {
        let blue_block = Piece::Occupied {
            color: 1,
            shape: Shape::Block,
        };
        let red_block = ObjectPattern::new(Some(0), Some(ShapeSpec::Block));
        assert!(!piece_matches(blue_block, red_block));
    }

    #[test]
    fn zero_red_on_empty_board() {
        assert!(eval("zero red", "_ _ _ _ _ _"));
    }

    #[test]
    fn touching_pair_is_found() {
        assert!(eval(
            "at_least 1 red pyramid pointing_up touching blue block",
            "red_pyramid_up blue_block _ _ _ _"
        ));
    }

    #[test]
    fn exactly_one_fails_when_two_witnessed_subjects_exist() {
        // Both up-pyramids touch the down-pyramid, so the count is 2.
        assert!(!eval(
            "exactly 1 pyramid pointing_up touching red pyramid pointing_down",
            "red_pyramid_up red_pyramid_down red_pyramid_up _ _ _"
        ));
    }

    #[test]
    fn contradiction_and_tautology() {
        for board in ["_ _ _ _ _ _", "red_block _ blue_pyramid_up _ _ red_pyramid_down"] {
            assert!(!eval("zero red and at_least 1 red", board));
            assert!(eval("zero red or at_least 1 red", board));
        }
    }

    #[test]
    fn at_the_right_of_reaches_any_distance() {
        assert!(eval(
            "at_least 1 block at_the_right_of red pyramid",
            "red_pyramid_up _ _ _ _ blue_block"
        ));
        // landmark on the wrong side
        assert!(!eval(
            "at_least 1 block at_the_right_of red pyramid",
            "blue_block _ _ _ _ red_pyramid_up"
        ));
    }

    #[test]
    fn surrounded_by_needs_both_neighbors() {
        assert!(eval(
            "at_least 1 red surrounded_by blue",
            "blue_block red_block blue_block _ _ _"
        ));
        assert!(!eval(
            "at_least 1 red surrounded_by blue",
            "red_block blue_block _ _ _ _"
        ));
        // edge cells are never surrounded
        assert!(!eval(
            "at_least 1 red surrounded_by blue",
            "red_block blue_block red_block _ _ blue_block"
        ));
    }

    #[test]
    fn witness_is_distinct_from_subject() {
        // The only red piece cannot be its own witness.
        assert!(!eval("at_least 1 red touching red", "_ _ red_block _ _ _"));
        assert!(eval("at_least 1 red touching red", "_ _ red_block red_block _ _"));
    }

    #[test]
    fn tag_universe_analytic_popcounts() {
        let config = config();
        let zero_red = parse_rule("zero red", &config).unwrap();
        assert_eq!(tag_universe(&zero_red, &config).popcount(), 4_096);
        let zero_up = parse_rule("zero pyramid pointing_up", &config).unwrap();
        assert_eq!(tag_universe(&zero_up, &config).popcount(), 15_625);
        let tautology = parse_rule("zero red or at_least 1 red", &config).unwrap();
        assert_eq!(tag_universe(&tautology, &config).popcount(), 117_649);
    }

    #[test]
    fn exactly_equals_at_least_and_at_most_pointwise() {
        let config = config();
        use rand::Rng;
        let mut rng = crate::seeds::rng(5);
        let objects = ObjectPattern::all(&config);
        for _ in 0..10_000 {
            let id = rng.gen_range(0..config.universe_size());
            let s = structure_from_id(id, &config).unwrap();
            let object = objects[rng.gen_range(0..objects.len())];
            let n = rng.gen_range(1..=2u8);
            let exactly = eval_rule(
                &RuleAst::Simple(SimpleProp {
                    quantifier: crate::rules::Quantifier::Exactly(n),
                    object,
                }),
                &s,
            );
            let at_least = eval_rule(
                &RuleAst::Simple(SimpleProp {
                    quantifier: crate::rules::Quantifier::AtLeast(n),
                    object,
                }),
                &s,
            );
            let at_most = eval_rule(
                &RuleAst::Simple(SimpleProp {
                    quantifier: crate::rules::Quantifier::AtMost(n),
                    object,
                }),
                &s,
            );
            assert_eq!(exactly, at_least && at_most);
        }
    }

    #[test]
    fn equivalence_witness_rows_match() {
        let config = config();
        let conj = parse_rule(
            "at_least 1 pyramid pointing_up and at_most 1 pyramid pointing_up",
            &config,
        )
        .unwrap();
        let exactly = parse_rule("exactly 1 pyramid pointing_up", &config).unwrap();
        assert_eq!(tag_universe(&conj, &config), tag_universe(&exactly, &config));
    }
}
