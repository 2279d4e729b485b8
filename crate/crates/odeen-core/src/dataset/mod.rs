//! Dataset generation: training games (rule + tagged observations) and test
//! games (hidden rule + 32-structure board + held-out evaluation
//! structures), with the exclusion, coverage, disjointness, and
//! representativity guarantees the benchmark depends on.

mod board;
mod files;

pub use board::{build_test_board, BoardBuild};
pub use files::{
    read_answers, read_predictions, read_test_public, write_dataset, AnswerLine, DatasetPaths,
    PredictionLine, TestPublicLine,
};

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rules::{Connective, Quantifier, RuleAst, RuleSet};
use crate::seeds;
use crate::semmatrix::{MatrixError, SemanticMatrix};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("matrix does not match the rule set: {0} rows vs {1} rules")]
    MatrixMismatch(usize, usize),
    #[error(
        "training size {requested} cannot cover the language: {needed} rules needed; \
         still uncovered: {uncovered:?}"
    )]
    CoverageNeedsMore {
        requested: usize,
        needed: usize,
        uncovered: Vec<String>,
    },
    #[error("training pool exhausted: {available} eligible rules, {requested} requested")]
    TrainingPoolExhausted { available: usize, requested: usize },
    #[error("only {available} test classes available, {requested} games requested")]
    TestPoolExhausted { available: usize, requested: usize },
    #[error("rule {rule_id} cannot be isolated by {m} observations; surviving classes: {surviving:?}")]
    CannotIsolate {
        rule_id: usize,
        m: usize,
        surviving: Vec<usize>,
    },
    #[error("board for rule {rule_id} cannot isolate its class within {k} observations")]
    BoardCannotIsolate { rule_id: usize, k: usize },
    #[error("evaluation sample needs {requested} structures but only {available} remain")]
    EvalPoolExhausted { requested: u64, available: u64 },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("dataset io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad dataset file: {0}")]
    BadFile(String),
}

/// Generation parameters. Field names follow the benchmark's conventions:
/// `n` training games with `m` observations each, `s` test games with a
/// `k`-structure board and `l` evaluation structures each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetParams {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub k: usize,
    pub l: usize,
    pub seed: u64,
    /// Token bigrams whose rules are dropped from training (the equivalent
    /// `at_least 2 X and at_most 2 X` conjunctions are always dropped too).
    pub heldout_bigrams: Vec<String>,
    /// Target number of test games whose rule contains the first held-out
    /// bigram; reduced with a warning when not enough classes exist.
    pub heldout_test_quota: usize,
}

impl DatasetParams {
    /// The benchmark's standard sizes.
    pub fn standard(seed: u64) -> Self {
        Self {
            n: 1438,
            m: 1000,
            s: 1132,
            k: 32,
            l: 1176,
            seed,
            heldout_bigrams: vec!["exactly 2".to_string()],
            heldout_test_quota: 72,
        }
    }
}

/// One training game.
#[derive(Clone, Debug)]
pub struct TrainGame {
    pub rule_id: usize,
    pub observations: Vec<(u64, bool)>,
}

/// One test game; `answer_tags` go to the private answer file only.
#[derive(Clone, Debug)]
pub struct TestGame {
    pub game: usize,
    pub rule_id: usize,
    pub board: Vec<(u64, bool)>,
    pub eval_ids: Vec<u64>,
    pub answer_tags: Vec<bool>,
}

/// A complete generated dataset.
pub struct GeneratedDataset {
    pub params: DatasetParams,
    pub train: Vec<TrainGame>,
    pub test: Vec<TestGame>,
    pub warnings: Vec<String>,
}

/// Whether a rule's canonical text contains a held-out token bigram.
pub fn text_contains_bigram(text: &str, bigram: &str) -> bool {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let pair: Vec<&str> = bigram.split_whitespace().collect();
    if pair.len() != 2 {
        return false;
    }
    tokens.windows(2).any(|w| w[0] == pair[0] && w[1] == pair[1])
}

/// Whether a rule is an `at_least 2 X and at_most 2 X` conjunction (either
/// operand order), the form equivalent to `exactly 2 X`.
pub fn is_exactly_two_conjunction(ast: &RuleAst) -> bool {
    let RuleAst::Conjunction {
        left,
        connective: Connective::And,
        right,
    } = ast
    else {
        return false;
    };
    if left.object != right.object {
        return false;
    }
    matches!(
        (left.quantifier, right.quantifier),
        (Quantifier::AtLeast(2), Quantifier::AtMost(2))
            | (Quantifier::AtMost(2), Quantifier::AtLeast(2))
    )
}

/// Whether a rule is barred from the training set.
pub fn excluded_from_training(rules: &RuleSet, rule_id: usize, bigrams: &[String]) -> bool {
    bigrams
        .iter()
        .any(|b| text_contains_bigram(rules.text(rule_id), b))
        || is_exactly_two_conjunction(rules.get(rule_id))
}

/// Selects the training rules: exclusions first, then a greedy pass making
/// every remaining token and production appear at least once, then a
/// uniform seeded draw for the remainder. Output is sorted by rule ID.
pub fn select_training_rules(
    params: &DatasetParams,
    rules: &RuleSet,
    matrix: &SemanticMatrix,
) -> Result<Vec<usize>, DatasetError> {
    check_matrix(rules, matrix)?;
    let pool: Vec<usize> = (0..rules.len())
        .filter(|&id| !excluded_from_training(rules, id, &params.heldout_bigrams))
        .collect();
    if pool.len() < params.n {
        return Err(DatasetError::TrainingPoolExhausted {
            available: pool.len(),
            requested: params.n,
        });
    }

    // Coverage targets: everything the surviving pool can still express.
    let pool_asts: Vec<RuleAst> = pool.iter().map(|&id| *rules.get(id)).collect();
    let achievable = crate::rules::coverage_report(&pool_asts, rules.config());
    let mut uncovered: HashSet<String> = achievable
        .token_counts
        .iter()
        .filter(|(_, &n)| n > 0)
        .map(|(t, _)| format!("token {t}"))
        .chain(
            achievable
                .production_counts
                .iter()
                .filter(|(_, &n)| n > 0)
                .map(|(p, _)| format!("production {p}")),
        )
        .collect();

    let mut chosen: Vec<usize> = Vec::new();
    let mut chosen_set: HashSet<usize> = HashSet::new();
    while !uncovered.is_empty() {
        let (best, _gain) = pool
            .iter()
            .filter(|id| !chosen_set.contains(id))
            .map(|&id| {
                let report =
                    crate::rules::coverage_report(&[*rules.get(id)], rules.config());
                let gain = report
                    .token_counts
                    .iter()
                    .filter(|(t, &n)| n > 0 && uncovered.contains(&format!("token {t}")))
                    .count()
                    + report
                        .production_counts
                        .iter()
                        .filter(|(p, &n)| n > 0 && uncovered.contains(&format!("production {p}")))
                        .count();
                (id, gain)
            })
            .max_by_key(|&(id, gain)| (gain, std::cmp::Reverse(id)))
            .expect("pool is non-empty while items are uncovered");
        if chosen.len() + 1 > params.n {
            return Err(DatasetError::CoverageNeedsMore {
                requested: params.n,
                needed: chosen.len() + 1,
                uncovered: uncovered.iter().cloned().collect(),
            });
        }
        let report = crate::rules::coverage_report(&[*rules.get(best)], rules.config());
        for (t, &n) in &report.token_counts {
            if n > 0 {
                uncovered.remove(&format!("token {t}"));
            }
        }
        for (p, &n) in &report.production_counts {
            if n > 0 {
                uncovered.remove(&format!("production {p}"));
            }
        }
        chosen.push(best);
        chosen_set.insert(best);
    }

    let mut rng = seeds::rng(seeds::stream(params.seed, "train-select"));
    let mut remainder: Vec<usize> = pool
        .iter()
        .copied()
        .filter(|id| !chosen_set.contains(id))
        .collect();
    remainder.shuffle(&mut rng);
    chosen.extend(remainder.into_iter().take(params.n - chosen.len()));
    chosen.sort_unstable();
    Ok(chosen)
}

/// Samples `m` distinct observations for a training rule: a uniform seeded
/// draw, then a repair pass that swaps tail entries for greedily chosen
/// distinguishing structures until the sample pins down the rule's class.
pub fn sample_observations(
    rule_id: usize,
    m: usize,
    seed: u64,
    matrix: &SemanticMatrix,
) -> Result<Vec<(u64, bool)>, DatasetError> {
    let universe = matrix.n_structures() as u64;
    assert!(m as u64 <= universe, "m exceeds the universe");
    let mut rng = seeds::rng(seed);
    let mut ids: Vec<u64> = rand::seq::index::sample(&mut rng, universe as usize, m)
        .into_iter()
        .map(|i| i as u64)
        .collect();

    let mut replaced = 0usize;
    loop {
        let observations: Vec<(u64, bool)> =
            ids.iter().map(|&id| (id, matrix.get(rule_id, id))).collect();
        let surviving = matrix.surviving_classes(&observations, rule_id)?;
        if surviving.is_empty() {
            return Ok(observations);
        }
        if replaced >= m {
            return Err(DatasetError::CannotIsolate {
                rule_id,
                m,
                surviving,
            });
        }
        let present: HashSet<u64> = ids.iter().copied().collect();
        let Some(pick) = board::best_distinguishing_structure(
            matrix,
            rule_id,
            &surviving,
            &present,
        ) else {
            return Err(DatasetError::CannotIsolate {
                rule_id,
                m,
                surviving,
            });
        };
        ids[m - 1 - replaced] = pick;
        replaced += 1;
    }
}

fn check_matrix(rules: &RuleSet, matrix: &SemanticMatrix) -> Result<(), DatasetError> {
    if matrix.n_rules() != rules.len()
        || matrix.n_structures() as u64 != rules.config().universe_size()
    {
        return Err(DatasetError::MatrixMismatch(matrix.n_rules(), rules.len()));
    }
    Ok(())
}

/// Selects the test rules: one rule per equivalence class, classes disjoint
/// from every training class and from each other, with a quota of rules
/// containing the first held-out bigram.
fn select_test_rules(
    params: &DatasetParams,
    rules: &RuleSet,
    matrix: &SemanticMatrix,
    train_classes: &HashSet<usize>,
    warnings: &mut Vec<String>,
) -> Result<Vec<usize>, DatasetError> {
    let partition = matrix.equivalence_classes();
    let eligible = |id: &usize| !train_classes.contains(&partition.class_of(*id));

    let mut rng = seeds::rng(seeds::stream(params.seed, "test-select"));
    let mut selected: Vec<usize> = Vec::new();
    let mut used_classes: HashSet<usize> = HashSet::new();

    let quota = params.heldout_test_quota.min(params.s);
    if let Some(bigram) = params.heldout_bigrams.first() {
        let mut heldout_pool: Vec<usize> = (0..rules.len())
            .filter(|&id| text_contains_bigram(rules.text(id), bigram))
            .filter(eligible)
            .collect();
        heldout_pool.shuffle(&mut rng);
        for id in heldout_pool {
            if selected.len() >= quota {
                break;
            }
            if used_classes.insert(partition.class_of(id)) {
                selected.push(id);
            }
        }
        if selected.len() < quota {
            warnings.push(format!(
                "held-out quota reduced: {} of {} requested {bigram:?} classes available",
                selected.len(),
                quota
            ));
        }
    }

    let mut pool: Vec<usize> = (0..rules.len()).filter(eligible).collect();
    pool.shuffle(&mut rng);
    for id in pool {
        if selected.len() >= params.s {
            break;
        }
        if used_classes.insert(partition.class_of(id)) {
            selected.push(id);
        }
    }
    if selected.len() < params.s {
        return Err(DatasetError::TestPoolExhausted {
            available: selected.len(),
            requested: params.s,
        });
    }
    Ok(selected)
}

/// Samples `l` evaluation structures uniformly from the universe minus the
/// board, by index remapping over the reduced range.
fn sample_eval_ids(
    l: usize,
    board_ids: &[u64],
    universe: u64,
    rng: &mut impl Rng,
) -> Result<Vec<u64>, DatasetError> {
    let mut excluded: Vec<u64> = board_ids.to_vec();
    excluded.sort_unstable();
    excluded.dedup();
    let available = universe - excluded.len() as u64;
    if (l as u64) > available {
        return Err(DatasetError::EvalPoolExhausted {
            requested: l as u64,
            available,
        });
    }
    Ok(rand::seq::index::sample(rng, available as usize, l)
        .into_iter()
        .map(|i| {
            // shift past every excluded id at or below the running value
            let mut id = i as u64;
            for &ex in &excluded {
                if id >= ex {
                    id += 1;
                } else {
                    break;
                }
            }
            id
        })
        .collect())
}

/// Generates a full dataset; deterministic in `(params, matrix)`.
pub fn generate_dataset(
    params: &DatasetParams,
    rules: &RuleSet,
    matrix: &SemanticMatrix,
) -> Result<GeneratedDataset, DatasetError> {
    check_matrix(rules, matrix)?;
    let mut warnings = Vec::new();

    let train_rule_ids = select_training_rules(params, rules, matrix)?;
    let obs_stream = seeds::stream(params.seed, "train-obs");
    let train: Vec<TrainGame> = train_rule_ids
        .par_iter()
        .enumerate()
        .map(|(index, &rule_id)| {
            let observations =
                sample_observations(rule_id, params.m, seeds::child(obs_stream, index as u64), matrix)?;
            Ok(TrainGame {
                rule_id,
                observations,
            })
        })
        .collect::<Result<_, DatasetError>>()?;

    let partition = matrix.equivalence_classes();
    let train_classes: HashSet<usize> = train
        .iter()
        .map(|g| partition.class_of(g.rule_id))
        .collect();

    let test_rule_ids = select_test_rules(params, rules, matrix, &train_classes, &mut warnings)?;
    let board_stream = seeds::stream(params.seed, "test-board");
    let eval_stream = seeds::stream(params.seed, "test-eval");
    let universe = matrix.n_structures() as u64;

    let built: Vec<(TestGame, Vec<String>)> = test_rule_ids
        .par_iter()
        .enumerate()
        .map(|(game, &rule_id)| {
            let build = build_test_board(
                rule_id,
                params.k,
                seeds::child(board_stream, game as u64),
                matrix,
            )?;
            let mut rng = seeds::rng(seeds::child(eval_stream, game as u64));
            let board_ids: Vec<u64> = build.board.iter().map(|&(id, _)| id).collect();
            let eval_ids = sample_eval_ids(params.l, &board_ids, universe, &mut rng)?;
            let answer_tags: Vec<bool> =
                eval_ids.iter().map(|&id| matrix.get(rule_id, id)).collect();
            Ok((
                TestGame {
                    game,
                    rule_id,
                    board: build.board,
                    eval_ids,
                    answer_tags,
                },
                build.warnings,
            ))
        })
        .collect::<Result<_, DatasetError>>()?;

    let mut test = Vec::with_capacity(built.len());
    for (game, mut board_warnings) in built {
        for w in board_warnings.drain(..) {
            warnings.push(format!("game {}: {w}", game.game));
        }
        test.push(game);
    }

    Ok(GeneratedDataset {
        params: params.clone(),
        train,
        test,
        warnings,
    })
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

    fn small_params(seed: u64) -> DatasetParams {
        DatasetParams {
            n: 120,
            m: 40,
            s: 12,
            k: 16,
            l: 50,
            seed,
            heldout_bigrams: vec!["exactly 2".to_string()],
            heldout_test_quota: 3,
        }
    }

    #[test]
    fn bigram_detection() {
        assert!(text_contains_bigram("exactly 2 red", "exactly 2"));
        assert!(text_contains_bigram("zero red or exactly 2 blue", "exactly 2"));
        assert!(!text_contains_bigram("exactly 1 red", "exactly 2"));
        assert!(!text_contains_bigram("at_least 2 red", "exactly 2"));
    }

    #[test]
    fn equivalent_conjunction_detection() {
        let config = WorldConfig::default();
        let rules = RuleSet::enumerate(&config);
        let (id, _) = rules.parse("at_least 2 red and at_most 2 red").unwrap();
        assert!(is_exactly_two_conjunction(rules.get(id)));
        let (id, _) = rules.parse("at_most 2 red and at_least 2 red").unwrap();
        assert!(is_exactly_two_conjunction(rules.get(id)));
        let (id, _) = rules.parse("at_least 2 red and at_most 2 blue").unwrap();
        assert!(!is_exactly_two_conjunction(rules.get(id)));
        let (id, _) = rules.parse("at_least 2 red or at_most 2 red").unwrap();
        assert!(!is_exactly_two_conjunction(rules.get(id)));
        let (id, _) = rules.parse("at_least 1 red and at_most 2 red").unwrap();
        assert!(!is_exactly_two_conjunction(rules.get(id)));
    }

    #[test]
    fn training_selection_covers_and_excludes() {
        let (rules, matrix) = small();
        let params = small_params(7);
        let selected = select_training_rules(&params, &rules, &matrix).unwrap();
        assert_eq!(selected.len(), params.n);
        for &id in &selected {
            assert!(!text_contains_bigram(rules.text(id), "exactly 2"));
            assert!(!is_exactly_two_conjunction(rules.get(id)));
        }
        let asts: Vec<RuleAst> = selected.iter().map(|&id| *rules.get(id)).collect();
        let report = crate::rules::coverage_report(&asts, rules.config());
        // The bigram exclusion keeps "exactly 2" pairs out, so the only
        // acceptable uncovered item would be none at all: "exactly" and "2"
        // both still occur in other contexts.
        assert!(report.full_coverage, "uncovered: {:?}", report.uncovered());
    }

    #[test]
    fn training_selection_is_deterministic() {
        let (rules, matrix) = small();
        let params = small_params(99);
        let a = select_training_rules(&params, &rules, &matrix).unwrap();
        let b = select_training_rules(&params, &rules, &matrix).unwrap();
        assert_eq!(a, b);
        let other = select_training_rules(
            &DatasetParams {
                seed: 100,
                ..params
            },
            &rules,
            &matrix,
        )
        .unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn coverage_error_names_missing_items() {
        let (rules, matrix) = small();
        let mut params = small_params(7);
        params.n = 2;
        let err = select_training_rules(&params, &rules, &matrix).unwrap_err();
        match err {
            DatasetError::CoverageNeedsMore { uncovered, .. } => assert!(!uncovered.is_empty()),
            other => panic!("expected coverage error, got {other}"),
        }
    }

    #[test]
    fn observations_are_representative_and_correctly_tagged() {
        let (rules, matrix) = small();
        let (rule_id, ast) = rules.parse("at_least 1 red block touching blue").unwrap();
        let observations = sample_observations(rule_id, 40, 5, &matrix).unwrap();
        assert_eq!(observations.len(), 40);
        let ids: HashSet<u64> = observations.iter().map(|&(id, _)| id).collect();
        assert_eq!(ids.len(), 40, "ids are distinct");
        for &(id, tag) in &observations {
            let s = crate::world::structure_from_id(id, rules.config()).unwrap();
            assert_eq!(tag, crate::interpreter::eval_rule(&ast, &s));
        }
        let report = matrix.is_representative(&observations, rule_id).unwrap();
        assert!(report.representative);
    }

    #[test]
    fn full_universe_observation_set_is_trivially_representative() {
        let (rules, matrix) = small();
        let universe = matrix.n_structures() as u64;
        let all: Vec<(u64, bool)> = (0..universe).map(|id| (id, matrix.get(3, id))).collect();
        assert!(matrix.is_representative(&all, 3).unwrap().representative);
        let _ = rules;
    }

    #[test]
    fn generated_dataset_satisfies_invariants() {
        let (rules, matrix) = small();
        let params = small_params(21);
        let dataset = generate_dataset(&params, &rules, &matrix).unwrap();
        assert_eq!(dataset.train.len(), params.n);
        assert_eq!(dataset.test.len(), params.s);

        let partition = matrix.equivalence_classes();
        let train_classes: HashSet<usize> = dataset
            .train
            .iter()
            .map(|g| partition.class_of(g.rule_id))
            .collect();
        let mut test_classes = HashSet::new();
        for game in &dataset.test {
            let class = partition.class_of(game.rule_id);
            assert!(!train_classes.contains(&class), "train/test class overlap");
            assert!(test_classes.insert(class), "duplicate test class");
            assert_eq!(game.board.len(), params.k);
            assert_eq!(game.eval_ids.len(), params.l);
            let board_ids: HashSet<u64> = game.board.iter().map(|&(id, _)| id).collect();
            assert_eq!(board_ids.len(), params.k, "board ids distinct");
            let eval_ids: HashSet<u64> = game.eval_ids.iter().copied().collect();
            assert_eq!(eval_ids.len(), params.l, "eval ids distinct");
            assert!(board_ids.is_disjoint(&eval_ids));
            assert!(matrix
                .is_representative(&game.board, game.rule_id)
                .unwrap()
                .representative);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let (rules, matrix) = small();
        let params = small_params(3);
        let a = generate_dataset(&params, &rules, &matrix).unwrap();
        let b = generate_dataset(&params, &rules, &matrix).unwrap();
        for (x, y) in a.train.iter().zip(&b.train) {
            assert_eq!(x.rule_id, y.rule_id);
            assert_eq!(x.observations, y.observations);
        }
        for (x, y) in a.test.iter().zip(&b.test) {
            assert_eq!(x.rule_id, y.rule_id);
            assert_eq!(x.board, y.board);
            assert_eq!(x.eval_ids, y.eval_ids);
            assert_eq!(x.answer_tags, y.answer_tags);
        }
    }

    #[test]
    fn eval_sampling_avoids_the_board() {
        let mut rng = seeds::rng(1);
        let board = vec![0u64, 5, 9];
        for _ in 0..20 {
            let sample = sample_eval_ids(10, &board, 20, &mut rng).unwrap();
            assert_eq!(sample.len(), 10);
            for id in &sample {
                assert!(!board.contains(id));
                assert!(*id < 20);
            }
            let distinct: HashSet<u64> = sample.iter().copied().collect();
            assert_eq!(distinct.len(), 10);
        }
        assert!(sample_eval_ids(18, &board, 20, &mut rng).is_err());
    }
}
