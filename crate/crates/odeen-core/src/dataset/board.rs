//! Test-board construction: five contrastive pairs found by seeded random
//! search, then greedy disambiguation until only the hidden rule's class
//! survives, then random padding.

use std::collections::HashSet;

use rand::Rng;

use super::DatasetError;
use crate::seeds;
use crate::semmatrix::SemanticMatrix;

/// Random-search attempts for one contrastive pair before falling back.
const PAIR_ATTEMPTS: usize = 20_000;
/// Sample size per tag for the minimal-distance fallback.
const FALLBACK_SAMPLES: usize = 256;

/// A built board plus any fallback warnings.
pub struct BoardBuild {
    pub board: Vec<(u64, bool)>,
    pub warnings: Vec<String>,
}

/// Cell-level Hamming distance between two structure IDs, counted digit by
/// digit in the canonical base.
fn cell_distance(a: u64, b: u64, base: u64, length: usize) -> usize {
    let (mut a, mut b) = (a, b);
    let mut distance = 0;
    for _ in 0..length {
        if a % base != b % base {
            distance += 1;
        }
        a /= base;
        b /= base;
    }
    distance
}

/// Replaces one digit of a structure ID.
fn with_cell(id: u64, cell_from_right: usize, new_code: u64, base: u64) -> u64 {
    let place = base.pow(cell_from_right as u32);
    let old_code = (id / place) % base;
    id - old_code * place + new_code * place
}

/// The structure that contradicts the most surviving classes, i.e. whose
/// column disagrees with the rule's tag on as many surviving-class rows as
/// possible. Ties break toward the lowest ID; `excluded` IDs are skipped.
/// Returns None when no structure eliminates anything.
pub(crate) fn best_distinguishing_structure(
    matrix: &SemanticMatrix,
    rule_id: usize,
    surviving: &[usize],
    excluded: &HashSet<u64>,
) -> Option<u64> {
    let n = matrix.n_structures();
    let partition = matrix.equivalence_classes();
    let truth = matrix.row(rule_id);
    let mut eliminations = vec![0u32; n];
    for &class in surviving {
        let row = matrix.row(partition.representative(class));
        for (w, (&x, &y)) in row.iter().zip(truth).enumerate() {
            let mut diff = x ^ y;
            while diff != 0 {
                let b = diff.trailing_zeros() as usize;
                eliminations[w * 64 + b] += 1;
                diff &= diff - 1;
            }
        }
    }
    let mut best: Option<(u32, u64)> = None;
    for (j, &count) in eliminations.iter().enumerate() {
        if count == 0 || excluded.contains(&(j as u64)) {
            continue;
        }
        if best.map_or(true, |(c, _)| count > c) {
            best = Some((count, j as u64));
        }
    }
    best.map(|(_, id)| id)
}

fn random_tagged(
    matrix: &SemanticMatrix,
    rule_id: usize,
    want: bool,
    rng: &mut impl Rng,
    attempts: usize,
) -> Option<u64> {
    let universe = matrix.n_structures() as u64;
    for _ in 0..attempts {
        let id = rng.gen_range(0..universe);
        if matrix.get(rule_id, id) == want {
            return Some(id);
        }
    }
    None
}

/// Builds a `k`-observation board for the rule: the first 10 entries are
/// five pairs differing in exactly one cell with opposite tags (pairs are
/// adjacent in board order), the rest greedy disambiguation and padding.
pub fn build_test_board(
    rule_id: usize,
    k: usize,
    seed: u64,
    matrix: &SemanticMatrix,
) -> Result<BoardBuild, DatasetError> {
    let config_base = infer_base(matrix);
    let (base, length) = config_base;
    let universe = matrix.n_structures() as u64;
    let mut rng = seeds::rng(seed);
    let mut warnings = Vec::new();
    let mut board: Vec<(u64, bool)> = Vec::with_capacity(k);
    let mut used: HashSet<u64> = HashSet::new();

    let weight = matrix.rule_weight(rule_id);
    let constant_row = weight == 0 || weight == universe;
    let n_pairs = (k / 2).min(5);

    if constant_row {
        // No opposite tags exist anywhere; fill the pair slots randomly.
        warnings.push("rule row is constant: no contrastive pairs exist".to_string());
        while board.len() < n_pairs * 2 {
            let id = rng.gen_range(0..universe);
            if used.insert(id) {
                board.push((id, matrix.get(rule_id, id)));
            }
        }
    } else {
        for _ in 0..n_pairs {
            let mut found = false;
            for _ in 0..PAIR_ATTEMPTS {
                let x = rng.gen_range(0..universe);
                let cell = rng.gen_range(0..length);
                let place = base.pow(cell as u32);
                let old_code = (x / place) % base;
                let mut new_code = rng.gen_range(0..base - 1);
                if new_code >= old_code {
                    new_code += 1;
                }
                let y = with_cell(x, cell, new_code, base);
                if matrix.get(rule_id, x) != matrix.get(rule_id, y)
                    && !used.contains(&x)
                    && !used.contains(&y)
                {
                    used.insert(x);
                    used.insert(y);
                    board.push((x, matrix.get(rule_id, x)));
                    board.push((y, matrix.get(rule_id, y)));
                    found = true;
                    break;
                }
            }
            if !found {
                // Minimal-cell-distance fallback over a seeded sample.
                let positives: Vec<u64> = (0..FALLBACK_SAMPLES)
                    .filter_map(|_| random_tagged(matrix, rule_id, true, &mut rng, 64))
                    .collect();
                let negatives: Vec<u64> = (0..FALLBACK_SAMPLES)
                    .filter_map(|_| random_tagged(matrix, rule_id, false, &mut rng, 64))
                    .collect();
                let mut best: Option<(usize, u64, u64)> = None;
                for &p in &positives {
                    for &q in &negatives {
                        if used.contains(&p) || used.contains(&q) {
                            continue;
                        }
                        let d = cell_distance(p, q, base, length);
                        if best.map_or(true, |(bd, _, _)| d < bd) {
                            best = Some((d, p, q));
                        }
                    }
                }
                if let Some((d, p, q)) = best {
                    warnings.push(format!(
                        "contrastive pair search exhausted; using a distance-{d} pair"
                    ));
                    used.insert(p);
                    used.insert(q);
                    board.push((p, true));
                    board.push((q, false));
                } else {
                    warnings.push(
                        "contrastive pair search exhausted with no fallback pair".to_string(),
                    );
                    while board.len() < n_pairs * 2 {
                        let id = rng.gen_range(0..universe);
                        if used.insert(id) {
                            board.push((id, matrix.get(rule_id, id)));
                        }
                    }
                    break;
                }
            }
        }
    }

    // Greedy disambiguation: add the structure eliminating the most
    // surviving classes until only the rule's class is left.
    let mut surviving = matrix.surviving_classes(&board, rule_id)?;
    while !surviving.is_empty() && board.len() < k {
        let Some(pick) = best_distinguishing_structure(matrix, rule_id, &surviving, &used) else {
            break;
        };
        used.insert(pick);
        board.push((pick, matrix.get(rule_id, pick)));
        surviving.retain(|&c| {
            matrix.get(
                matrix.equivalence_classes().representative(c),
                board.last().unwrap().0,
            ) == board.last().unwrap().1
        });
    }
    if !surviving.is_empty() {
        return Err(DatasetError::BoardCannotIsolate { rule_id, k });
    }

    while board.len() < k {
        let id = rng.gen_range(0..universe);
        if used.insert(id) {
            board.push((id, matrix.get(rule_id, id)));
        }
    }

    debug_assert!(matrix.is_representative(&board, rule_id)?.representative);
    Ok(BoardBuild { board, warnings })
}

/// Recovers (alphabet size, length) from the universe size. The universe is
/// always `base^length` with base at least 4 (one empty piece plus three
/// shapes of at least one color).
fn infer_base(matrix: &SemanticMatrix) -> (u64, usize) {
    let n = matrix.n_structures() as u64;
    for base in 4..=64u64 {
        let mut value = base;
        let mut length = 1;
        while value < n {
            value *= base;
            length += 1;
        }
        if value == n {
            return (base, length);
        }
    }
    panic!("universe size {n} is not a perfect power of a plausible alphabet");
}
