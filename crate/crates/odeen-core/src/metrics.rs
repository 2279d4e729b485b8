//! Scoring of prediction files against private answers: tagging accuracy
//! (T-Acc), the nearest-rule score (NRS), and rule-equivalence accuracy
//! (R-Acc).

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bits::TagVector;
use crate::rules::RuleSet;
use crate::semmatrix::SemanticMatrix;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("games missing from predictions: {0:?}")]
    MissingGames(Vec<usize>),
    #[error("game {game}: prediction has {got} tags, expected {expected}")]
    WrongLength {
        game: usize,
        got: usize,
        expected: usize,
    },
    #[error("game {game}: answer rule {text:?} does not parse: {error}")]
    BadAnswerRule {
        game: usize,
        text: String,
        error: String,
    },
    #[error("matrix checksum mismatch: dataset was built against {expected:#018x}, got {actual:#018x}")]
    ChecksumMismatch { expected: u64, actual: u64 },
}

/// One game's submission.
#[derive(Clone, Debug)]
pub struct Prediction {
    pub game: usize,
    pub tags: Vec<bool>,
    pub rule: Option<String>,
}

/// One game's ground truth: the hidden rule, the evaluation structures, and
/// their tags.
#[derive(Clone, Debug)]
pub struct GameTruth {
    pub game: usize,
    pub rule_text: String,
    pub eval_ids: Vec<u64>,
    pub answer_tags: Vec<bool>,
}

/// Per-game scoring breakdown.
#[derive(Clone, Debug, Serialize)]
pub struct GameScore {
    pub game: usize,
    pub tag_accuracy: f64,
    pub nrs_correct: bool,
    pub truth_distance: u64,
    /// Whether the submitted rule parses and is equivalent to the truth;
    /// absent when no rule was submitted.
    pub rule_equivalent: Option<bool>,
}

/// Aggregate score report.
#[derive(Clone, Debug, Serialize)]
pub struct ScoreReport {
    pub t_acc: f64,
    pub nrs: f64,
    /// Fraction of games whose submission carries a rule equivalent to the
    /// truth; submissions without a rule count as incorrect.
    pub r_acc: f64,
    pub games: Vec<GameScore>,
    pub matrix_checksum: String,
}

/// Mean over games of the per-game fraction of correct tags.
pub fn t_acc(preds: &[Prediction], truths: &[GameTruth]) -> Result<f64, ScoreError> {
    let pairs = align(preds, truths)?;
    let total: f64 = pairs
        .iter()
        .map(|(p, t)| fraction_correct(&p.tags, &t.answer_tags))
        .sum();
    Ok(total / pairs.len().max(1) as f64)
}

/// Fraction of games whose predicted tag vector is strictly closer to the
/// truth row than to every other distinct rule row, restricted to the
/// game's evaluation structures.
pub fn nrs(
    preds: &[Prediction],
    truths: &[GameTruth],
    matrix: &SemanticMatrix,
    rules: &RuleSet,
) -> Result<f64, ScoreError> {
    let pairs = align(preds, truths)?;
    let correct = pairs
        .par_iter()
        .map(|(p, t)| {
            let truth_rule = truth_rule_id(t, rules)?;
            let pred = TagVector::from_bools(&p.tags);
            Ok(usize::from(
                matrix
                    .nearest_tagging(&pred, &t.eval_ids, truth_rule)
                    .truth_is_unique_nearest,
            ))
        })
        .collect::<Result<Vec<_>, ScoreError>>()?
        .into_iter()
        .sum::<usize>();
    Ok(correct as f64 / pairs.len().max(1) as f64)
}

/// Whether a submitted rule text is equivalent to the truth rule: it parses
/// and shares the truth's matrix row. Anything unparseable scores false.
pub fn r_acc(
    pred_rule: &str,
    truth_rule_id: usize,
    matrix: &SemanticMatrix,
    rules: &RuleSet,
) -> bool {
    let Ok((pred_id, _)) = rules.parse(pred_rule) else {
        return false;
    };
    let partition = matrix.equivalence_classes();
    partition.class_of(pred_id) == partition.class_of(truth_rule_id)
}

/// Scores a full submission; pure function of its inputs. When
/// `expected_checksum` is given (from the dataset manifest) it must match
/// the matrix.
pub fn score(
    preds: &[Prediction],
    truths: &[GameTruth],
    matrix: &SemanticMatrix,
    rules: &RuleSet,
    expected_checksum: Option<u64>,
) -> Result<ScoreReport, ScoreError> {
    if let Some(expected) = expected_checksum {
        if expected != matrix.checksum() {
            return Err(ScoreError::ChecksumMismatch {
                expected,
                actual: matrix.checksum(),
            });
        }
    }
    let pairs = align(preds, truths)?;
    let mut games: Vec<GameScore> = pairs
        .par_iter()
        .map(|(p, t)| {
            let truth_rule = truth_rule_id(t, rules)?;
            let pred = TagVector::from_bools(&p.tags);
            let nearest = matrix.nearest_tagging(&pred, &t.eval_ids, truth_rule);
            Ok(GameScore {
                game: t.game,
                tag_accuracy: fraction_correct(&p.tags, &t.answer_tags),
                nrs_correct: nearest.truth_is_unique_nearest,
                truth_distance: nearest.truth_distance,
                rule_equivalent: p
                    .rule
                    .as_deref()
                    .map(|text| r_acc(text, truth_rule, matrix, rules)),
            })
        })
        .collect::<Result<_, ScoreError>>()?;
    games.sort_by_key(|g| g.game);

    let n = games.len().max(1) as f64;
    Ok(ScoreReport {
        t_acc: games.iter().map(|g| g.tag_accuracy).sum::<f64>() / n,
        nrs: games.iter().filter(|g| g.nrs_correct).count() as f64 / n,
        r_acc: games
            .iter()
            .filter(|g| g.rule_equivalent == Some(true))
            .count() as f64
            / n,
        games,
        matrix_checksum: format!("{:#018x}", matrix.checksum()),
    })
}

fn fraction_correct(pred: &[bool], truth: &[bool]) -> f64 {
    let correct = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    correct as f64 / truth.len().max(1) as f64
}

fn truth_rule_id(truth: &GameTruth, rules: &RuleSet) -> Result<usize, ScoreError> {
    rules
        .parse(&truth.rule_text)
        .map(|(id, _)| id)
        .map_err(|e| ScoreError::BadAnswerRule {
            game: truth.game,
            text: truth.rule_text.clone(),
            error: e.to_string(),
        })
}

/// Pairs each truth with its prediction; every truth game must be present
/// and the tag lengths must agree.
fn align<'a>(
    preds: &'a [Prediction],
    truths: &'a [GameTruth],
) -> Result<Vec<(&'a Prediction, &'a GameTruth)>, ScoreError> {
    let by_game: std::collections::HashMap<usize, &Prediction> =
        preds.iter().map(|p| (p.game, p)).collect();
    let missing: Vec<usize> = truths
        .iter()
        .filter(|t| !by_game.contains_key(&t.game))
        .map(|t| t.game)
        .collect();
    if !missing.is_empty() {
        return Err(ScoreError::MissingGames(missing));
    }
    truths
        .iter()
        .map(|t| {
            let p = by_game[&t.game];
            if p.tags.len() != t.answer_tags.len() {
                return Err(ScoreError::WrongLength {
                    game: t.game,
                    got: p.tags.len(),
                    expected: t.answer_tags.len(),
                });
            }
            Ok((p, t))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semmatrix::build_matrix;
    use crate::world::WorldConfig;

    fn small() -> (RuleSet, SemanticMatrix) {
        let config = WorldConfig::new(3, &["red", "blue"]).unwrap();
        let rules = RuleSet::enumerate(&config);
        let matrix = build_matrix(&rules).unwrap();
        (rules, matrix)
    }

    fn truth(game: usize, rule: &str, rules: &RuleSet, matrix: &SemanticMatrix) -> GameTruth {
        let (rule_id, _) = rules.parse(rule).unwrap();
        let eval_ids: Vec<u64> = (0..60).collect();
        GameTruth {
            game,
            rule_text: rule.to_string(),
            answer_tags: eval_ids.iter().map(|&id| matrix.get(rule_id, id)).collect(),
            eval_ids,
        }
    }

    fn perfect(t: &GameTruth) -> Prediction {
        Prediction {
            game: t.game,
            tags: t.answer_tags.clone(),
            rule: Some(t.rule_text.clone()),
        }
    }

    #[test]
    fn t_acc_arithmetic() {
        let (rules, matrix) = small();
        let truths = vec![
            truth(0, "zero red", &rules, &matrix),
            truth(1, "at_least 1 blue", &rules, &matrix),
        ];
        let mut preds: Vec<Prediction> = truths.iter().map(perfect).collect();
        assert_eq!(t_acc(&preds, &truths).unwrap(), 1.0);

        // complement of the second game
        preds[1].tags.iter_mut().for_each(|t| *t = !*t);
        assert_eq!(t_acc(&preds, &truths).unwrap(), 0.5);

        // one game with exactly 45 of 60 correct, the other perfect
        preds[1].tags = truths[1].answer_tags.clone();
        for tag in preds[1].tags.iter_mut().take(15) {
            *tag = !*tag;
        }
        let expected = (1.0 + 45.0 / 60.0) / 2.0;
        assert!((t_acc(&preds, &truths).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn missing_game_is_an_error() {
        let (rules, matrix) = small();
        let truths = vec![truth(0, "zero red", &rules, &matrix)];
        match t_acc(&[], &truths) {
            Err(ScoreError::MissingGames(games)) => assert_eq!(games, vec![0]),
            other => panic!("expected missing-games error, got {other:?}"),
        }
    }

    #[test]
    fn r_acc_equivalence_and_parse_failures() {
        let (rules, matrix) = small();
        let (exactly, _) = rules.parse("exactly 1 pyramid pointing_up").unwrap();
        assert!(r_acc(
            "at_least 1 pyramid pointing_up and at_most 1 pyramid pointing_up",
            exactly,
            &matrix,
            &rules
        ));
        assert!(r_acc("exactly 1 pyramid pointing_up", exactly, &matrix, &rules));
        assert!(!r_acc("exactly 1 red block touching pyramid blue", exactly, &matrix, &rules));
        assert!(!r_acc("zero red", exactly, &matrix, &rules));
    }

    #[test]
    fn nrs_tie_scores_as_incorrect() {
        let (rules, matrix) = small();
        // Find two classes whose restrictions to the window differ in
        // exactly two positions, then predict halfway between them.
        let ids: Vec<u64> = (0..40).collect();
        let partition = matrix.equivalence_classes();
        let mut found = None;
        'outer: for a in 0..partition.n_classes() {
            for b in 0..partition.n_classes() {
                if a == b {
                    continue;
                }
                let ra = matrix.restrict_row(partition.representative(a), &ids);
                let rb = matrix.restrict_row(partition.representative(b), &ids);
                if ra.hamming(&rb) == 2 {
                    found = Some((partition.representative(a), ra, rb));
                    break 'outer;
                }
            }
        }
        let (truth_rule, ra, rb) = found.expect("a distance-2 pair exists");
        // Flip one of the two differing positions: distance 1 to each.
        let mut tags = ra.to_bools();
        let diff: Vec<usize> = (0..ids.len())
            .filter(|&j| ra.get(j) != rb.get(j))
            .collect();
        tags[diff[0]] = !tags[diff[0]];
        let pred = TagVector::from_bools(&tags);
        let outcome = matrix.nearest_tagging(&pred, &ids, truth_rule);
        assert_eq!(outcome.truth_distance, 1);
        assert!(!outcome.truth_is_unique_nearest, "ties must lose");
    }

    #[test]
    fn wrong_class_tracking_high_t_acc_scores_zero_nrs() {
        let (rules, matrix) = small();
        let truths = vec![truth(0, "at_least 1 red block touching blue", &rules, &matrix)];
        let (other, _) = rules.parse("at_least 1 red block touching blue pyramid").unwrap();
        let wrong_row: Vec<bool> = truths[0]
            .eval_ids
            .iter()
            .map(|&id| matrix.get(other, id))
            .collect();
        let preds = vec![Prediction {
            game: 0,
            tags: wrong_row,
            rule: None,
        }];
        // Only meaningful when the two rules differ on this window but not
        // everywhere; either way the prediction followed the wrong row
        // exactly, so NRS must not credit it unless the rows coincide here.
        let report = score(&preds, &truths, &matrix, &rules, None).unwrap();
        let (truth_id, _) = rules.parse(&truths[0].rule_text).unwrap();
        let same_restriction = matrix.restrict_row(truth_id, &truths[0].eval_ids)
            == matrix.restrict_row(other, &truths[0].eval_ids);
        assert_eq!(report.games[0].nrs_correct, same_restriction);
    }

    #[test]
    fn checksum_gate() {
        let (rules, matrix) = small();
        let truths = vec![truth(0, "zero red", &rules, &matrix)];
        let preds: Vec<Prediction> = truths.iter().map(perfect).collect();
        assert!(score(&preds, &truths, &matrix, &rules, Some(matrix.checksum())).is_ok());
        assert!(matches!(
            score(&preds, &truths, &matrix, &rules, Some(matrix.checksum() ^ 1)),
            Err(ScoreError::ChecksumMismatch { .. })
        ));
    }

    #[test]
    fn perfect_submission_scores_ones() {
        let (rules, matrix) = small();
        let truths = vec![
            truth(0, "zero red", &rules, &matrix),
            truth(1, "at_least 2 pyramid pointing_down", &rules, &matrix),
        ];
        let preds: Vec<Prediction> = truths.iter().map(perfect).collect();
        let report = score(&preds, &truths, &matrix, &rules, None).unwrap();
        assert_eq!(report.t_acc, 1.0);
        assert_eq!(report.r_acc, 1.0);
        // NRS needs the window to separate the truth from other classes;
        // with a fixed 60-id window equal restrictions are excluded from
        // the comparison, so a perfect prediction always wins.
        assert_eq!(report.nrs, 1.0);
    }
}
