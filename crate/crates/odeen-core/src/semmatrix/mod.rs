//! The binary semantic matrix: rules on the rows, structures on the columns,
//! bit `(i, j)` set when structure `j` adheres to rule `i`. Built once per
//! world, then shared immutably by dataset generation, solving, and scoring.

mod build;
mod io;

pub use build::build_matrix;
pub use io::{load_matrix, save_matrix};

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{self, TagVector};

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix allocation failed: {rows} rows of {words} words each")]
    OutOfMemory { rows: usize, words: usize },
    #[error("matrix io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad matrix file: {0}")]
    BadFile(String),
    #[error("matrix checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
    #[error(
        "observation ({structure_id}, {tag}) contradicts rule {rule_id}: its row says {expected}"
    )]
    InconsistentObservation {
        structure_id: u64,
        tag: bool,
        rule_id: usize,
        expected: bool,
    },
}

/// Partition of the rules into meaning-equivalence classes: two rules share
/// a class exactly when their matrix rows are bit-identical. Class IDs are
/// assigned by first appearance in rule-ID order, so the representative of
/// class `c` (its lowest rule ID) increases with `c`.
#[derive(Clone, Debug)]
pub struct EquivalencePartition {
    class_of: Vec<usize>,
    representatives: Vec<usize>,
}

impl EquivalencePartition {
    pub fn n_classes(&self) -> usize {
        self.representatives.len()
    }

    pub fn class_of(&self, rule_id: usize) -> usize {
        self.class_of[rule_id]
    }

    /// Lowest rule ID of a class.
    pub fn representative(&self, class_id: usize) -> usize {
        self.representatives[class_id]
    }

    pub fn representatives(&self) -> &[usize] {
        &self.representatives
    }
}

/// The bit-packed matrix plus its row-equivalence index.
pub struct SemanticMatrix {
    n_rules: usize,
    n_structures: usize,
    words_per_row: usize,
    words: Vec<u64>,
    checksum: u64,
    partition: EquivalencePartition,
}

impl SemanticMatrix {
    pub(crate) fn from_words(n_rules: usize, n_structures: usize, words: Vec<u64>) -> Self {
        let words_per_row = bits::words_for(n_structures);
        debug_assert_eq!(words.len(), n_rules * words_per_row);
        let checksum = words
            .par_chunks(1 << 16)
            .map(|chunk| chunk.iter().fold(0u64, |acc, w| acc ^ w))
            .reduce(|| 0, |a, b| a ^ b);
        let partition = partition_rows(n_rules, words_per_row, &words);
        Self {
            n_rules,
            n_structures,
            words_per_row,
            words,
            checksum,
            partition,
        }
    }

    pub fn n_rules(&self) -> usize {
        self.n_rules
    }

    pub fn n_structures(&self) -> usize {
        self.n_structures
    }

    /// XOR of all data words; identifies the matrix across files and runs.
    pub fn checksum(&self) -> u64 {
        self.checksum
    }

    pub fn row(&self, rule_id: usize) -> &[u64] {
        let start = rule_id * self.words_per_row;
        &self.words[start..start + self.words_per_row]
    }

    /// Tag of structure `j` under rule `i`.
    pub fn get(&self, rule_id: usize, structure_id: u64) -> bool {
        bits::get(self.row(rule_id), structure_id as usize)
    }

    pub fn rule_weight(&self, rule_id: usize) -> u64 {
        bits::popcount(self.row(rule_id))
    }

    /// Restriction of a rule's row to a list of structure IDs, in order.
    pub fn restrict_row(&self, rule_id: usize, ids: &[u64]) -> TagVector {
        let row = self.row(rule_id);
        let mut out = TagVector::zeros(ids.len());
        for (k, &id) in ids.iter().enumerate() {
            if bits::get(row, id as usize) {
                out.set(k);
            }
        }
        out
    }

    pub fn equivalence_classes(&self) -> &EquivalencePartition {
        &self.partition
    }

    /// Classes, other than the rule's own, whose rows agree with every
    /// observation. Empty means the observations pin down the rule's class.
    ///
    /// Errors when an observation contradicts the rule's own row: such a
    /// call breaks the contract that observations are tagged by the rule.
    pub fn surviving_classes(
        &self,
        observations: &[(u64, bool)],
        rule_id: usize,
    ) -> Result<Vec<usize>, MatrixError> {
        for &(structure_id, tag) in observations {
            let expected = self.get(rule_id, structure_id);
            if expected != tag {
                return Err(MatrixError::InconsistentObservation {
                    structure_id,
                    tag,
                    rule_id,
                    expected,
                });
            }
        }
        let own_class = self.partition.class_of(rule_id);
        let mut survivors: Vec<usize> =
            (0..self.partition.n_classes()).filter(|&c| c != own_class).collect();
        for &(structure_id, tag) in observations {
            survivors.retain(|&c| self.get(self.partition.representative(c), structure_id) == tag);
            if survivors.is_empty() {
                break;
            }
        }
        Ok(survivors)
    }

    /// Whether the observations are representative for the rule: every other
    /// equivalence class is contradicted by at least one observation.
    pub fn is_representative(
        &self,
        observations: &[(u64, bool)],
        rule_id: usize,
    ) -> Result<RepresentativityReport, MatrixError> {
        let surviving_classes = self.surviving_classes(observations, rule_id)?;
        Ok(RepresentativityReport {
            representative: surviving_classes.is_empty(),
            surviving_classes,
        })
    }

    /// Classes consistent with a board, with no rule fixed in advance: the
    /// exhaustive solver's filter. Duplicate and contradictory observations
    /// are allowed; a contradiction simply leaves no survivors.
    pub fn consistent_classes(&self, board: &[(u64, bool)]) -> Vec<usize> {
        let mut survivors: Vec<usize> = (0..self.partition.n_classes()).collect();
        for &(structure_id, tag) in board {
            survivors.retain(|&c| self.get(self.partition.representative(c), structure_id) == tag);
            if survivors.is_empty() {
                break;
            }
        }
        survivors
    }

    /// Nearest-rule comparison for a predicted tag vector over `ids`.
    ///
    /// Every rule row is restricted to `ids`; the prediction is compared to
    /// the truth restriction `w*` and to every distinct restriction that
    /// differs from `w*`. The prediction wins only when strictly closer to
    /// `w*` than to all of them; ties lose.
    pub fn nearest_tagging(
        &self,
        pred: &TagVector,
        ids: &[u64],
        truth_rule: usize,
    ) -> NearestOutcome {
        assert_eq!(pred.len(), ids.len(), "prediction length must match ids");
        let w_star = self.restrict_row(truth_rule, ids);
        let truth_distance = pred.hamming(&w_star);

        let reps = self.partition.representatives();
        let per_class: Vec<(u64, bool)> = reps
            .par_iter()
            .map(|&rep| {
                let restricted = self.restrict_row(rep, ids);
                (pred.hamming(&restricted), restricted == w_star)
            })
            .collect();

        let min_other = per_class
            .iter()
            .filter(|(_, same)| !same)
            .map(|(d, _)| *d)
            .min();
        let min_distance = per_class.iter().map(|(d, _)| *d).min().unwrap_or(truth_distance);
        let argmin_classes: Vec<usize> = per_class
            .iter()
            .enumerate()
            .filter(|(_, (d, _))| *d == min_distance)
            .map(|(c, _)| c)
            .collect();
        NearestOutcome {
            truth_is_unique_nearest: min_other.map_or(true, |d| truth_distance < d),
            truth_distance,
            min_distance,
            argmin_classes,
        }
    }

    /// Exact per-row and per-column popcounts with summary statistics.
    pub fn weight_stats(&self) -> WeightStats {
        let rule_weights: Vec<u64> = (0..self.n_rules)
            .into_par_iter()
            .map(|i| self.rule_weight(i))
            .collect();

        let structure_weights = (0..self.n_rules)
            .into_par_iter()
            .fold(
                || vec![0u32; self.n_structures],
                |mut counts, rule_id| {
                    for (wi, &word) in self.row(rule_id).iter().enumerate() {
                        let mut w = word;
                        while w != 0 {
                            let b = w.trailing_zeros() as usize;
                            counts[wi * 64 + b] += 1;
                            w &= w - 1;
                        }
                    }
                    counts
                },
            )
            .reduce(
                || vec![0u32; self.n_structures],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        let structure_weights: Vec<u64> = structure_weights.into_iter().map(u64::from).collect();

        WeightStats {
            rule_summary: WeightSummary::from_weights(&rule_weights),
            structure_summary: WeightSummary::from_weights(&structure_weights),
            rule_weights,
            structure_weights,
        }
    }
}

/// Outcome of a representativity check.
#[derive(Clone, Debug)]
pub struct RepresentativityReport {
    pub representative: bool,
    /// Classes (other than the rule's own) not contradicted by any
    /// observation.
    pub surviving_classes: Vec<usize>,
}

/// Outcome of a nearest-rule comparison.
#[derive(Clone, Debug)]
pub struct NearestOutcome {
    /// True when the truth restriction is strictly closer to the prediction
    /// than every distinct competing restriction.
    pub truth_is_unique_nearest: bool,
    pub truth_distance: u64,
    /// Minimum distance over all class restrictions.
    pub min_distance: u64,
    /// Classes whose restriction achieves `min_distance`.
    pub argmin_classes: Vec<usize>,
}

/// Row and column popcounts.
pub struct WeightStats {
    pub rule_weights: Vec<u64>,
    pub structure_weights: Vec<u64>,
    pub rule_summary: WeightSummary,
    pub structure_summary: WeightSummary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightSummary {
    pub min: u64,
    pub max: u64,
    pub mean: f64,
    /// Counts over `bins` equal-width bins spanning `[min, max]`.
    pub histogram: Vec<u64>,
    pub bins: usize,
}

impl WeightSummary {
    pub fn from_weights(weights: &[u64]) -> Self {
        let bins = 64;
        let min = weights.iter().copied().min().unwrap_or(0);
        let max = weights.iter().copied().max().unwrap_or(0);
        let mean = weights.iter().map(|&w| w as f64).sum::<f64>() / weights.len().max(1) as f64;
        let mut histogram = vec![0u64; bins];
        let span = (max - min).max(1) as f64;
        for &w in weights {
            let bin = (((w - min) as f64 / span) * bins as f64) as usize;
            histogram[bin.min(bins - 1)] += 1;
        }
        Self {
            min,
            max,
            mean,
            histogram,
            bins,
        }
    }
}

fn partition_rows(n_rules: usize, words_per_row: usize, words: &[u64]) -> EquivalencePartition {
    let mut class_of = vec![0usize; n_rules];
    let mut representatives = Vec::new();
    let mut index: HashMap<&[u64], usize> = HashMap::new();
    for rule_id in 0..n_rules {
        let row = &words[rule_id * words_per_row..(rule_id + 1) * words_per_row];
        let class = *index.entry(row).or_insert_with(|| {
            representatives.push(rule_id);
            representatives.len() - 1
        });
        class_of[rule_id] = class;
    }
    EquivalencePartition {
        class_of,
        representatives,
    }
}
