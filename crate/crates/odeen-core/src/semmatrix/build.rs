//! Matrix construction.
//!
//! Evaluating every rule on every structure one pair at a time is the
//! normative definition but far too slow at full size. The builder instead
//! exploits that a rule's tag depends on the structure only through a small
//! match count:
//!
//! 1. Collect the distinct count keys used by the rule list: one per object
//!    pattern (simple propositions) and one per (subject, relation, object)
//!    triple (relational propositions).
//! 2. Sweep the universe once, computing per-cell pattern-match bitmasks and
//!    from them every key's count, and file each structure into per-key
//!    "count = c" bucket bitsets.
//! 3. Compose each row as a union of buckets selected by its quantifier;
//!    conjunction rows combine two cached simple-proposition rows.
//!
//! The sweep is parallel over column chunks and the composition over rows,
//! so output is identical for any thread count. [`crate::interpreter`] keeps
//! the direct per-structure path, which tests compare against this one.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{MatrixError, SemanticMatrix};
use crate::bits;
use crate::rules::{Connective, ObjectPattern, Quantifier, Relation, RuleAst, RuleSet, SimpleProp};
use crate::world::{codes_from_id, Piece, WorldConfig};

/// Structures per parallel chunk; a multiple of 64 so chunks own whole words.
const CHUNK_BITS: usize = 64 * 32;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum CountKey {
    Simple(ObjectPattern),
    Relational(ObjectPattern, Relation, ObjectPattern),
}

struct KeyTable {
    /// Distinct object patterns referenced anywhere in the rules.
    patterns: Vec<ObjectPattern>,
    /// Distinct (relation, object-pattern index) pairs used as witnesses.
    witness_specs: Vec<(Relation, usize)>,
    /// Count keys: `Simple(p)` stores a pattern index, `Relational` stores
    /// (subject pattern index, witness spec index).
    keys: Vec<KeySpec>,
    key_index: HashMap<CountKey, usize>,
}

#[derive(Clone, Copy)]
enum KeySpec {
    Simple(usize),
    Relational(usize, usize),
}

impl KeyTable {
    fn from_rules(rules: &[RuleAst]) -> Self {
        let mut table = Self {
            patterns: Vec::new(),
            witness_specs: Vec::new(),
            keys: Vec::new(),
            key_index: HashMap::new(),
        };
        let mut pattern_index: HashMap<ObjectPattern, usize> = HashMap::new();
        let mut witness_index: HashMap<(Relation, usize), usize> = HashMap::new();

        let mut intern_pattern = |table: &mut Self, p: ObjectPattern| -> usize {
            *pattern_index.entry(p).or_insert_with(|| {
                table.patterns.push(p);
                table.patterns.len() - 1
            })
        };

        for rule in rules {
            match rule {
                RuleAst::Simple(p) => {
                    let pi = intern_pattern(&mut table, p.object);
                    table.intern_key(CountKey::Simple(p.object), KeySpec::Simple(pi));
                }
                RuleAst::Relational {
                    subject,
                    relation,
                    object,
                    ..
                } => {
                    let si = intern_pattern(&mut table, *subject);
                    let oi = intern_pattern(&mut table, *object);
                    let wi = *witness_index.entry((*relation, oi)).or_insert_with(|| {
                        table.witness_specs.push((*relation, oi));
                        table.witness_specs.len() - 1
                    });
                    table.intern_key(
                        CountKey::Relational(*subject, *relation, *object),
                        KeySpec::Relational(si, wi),
                    );
                }
                RuleAst::Conjunction { left, right, .. } => {
                    for p in [left.object, right.object] {
                        let pi = intern_pattern(&mut table, p);
                        table.intern_key(CountKey::Simple(p), KeySpec::Simple(pi));
                    }
                }
            }
        }
        table
    }

    fn intern_key(&mut self, key: CountKey, spec: KeySpec) -> usize {
        *self.key_index.entry(key).or_insert_with(|| {
            self.keys.push(spec);
            self.keys.len() - 1
        })
    }

    fn key_of(&self, key: CountKey) -> usize {
        self.key_index[&key]
    }
}

/// Positions that have a witness in `matchbits` under the relation, as a
/// bitmask over cells. The witness is always a different cell, so overlap
/// between subject and object patterns never self-witnesses.
fn witness_positions(relation: Relation, matchbits: u64, cell_mask: u64) -> u64 {
    match relation {
        Relation::Touching => ((matchbits << 1) | (matchbits >> 1)) & cell_mask,
        Relation::SurroundedBy => (matchbits << 1) & (matchbits >> 1) & cell_mask,
        Relation::AtTheRightOf => {
            if matchbits == 0 {
                0
            } else {
                // strictly right of the leftmost (lowest-index) match
                cell_mask & !((1u64 << (matchbits.trailing_zeros() + 1)) - 1)
            }
        }
    }
}

/// Quantifier as a bitmask over counts 0..=length.
fn allowed_counts(q: Quantifier, length: usize) -> u32 {
    let all = (1u32 << (length + 1)) - 1;
    match q {
        Quantifier::AtLeast(n) => all & !((1u32 << n) - 1),
        Quantifier::Exactly(n) => {
            if (n as usize) <= length {
                1 << n
            } else {
                0
            }
        }
        Quantifier::AtMost(n) => all & ((1u32 << (n as u32 + 1)) - 1),
        Quantifier::Zero => 1,
    }
}

struct Buckets {
    n_buckets: usize,
    chunk_words: usize,
    /// slabs[chunk] holds, for each (key, count), `chunk_words` words.
    slabs: Vec<Vec<u64>>,
}

impl Buckets {
    fn word(&self, key: usize, count: usize, word_index: usize) -> u64 {
        let chunk = word_index / self.chunk_words;
        let within = word_index % self.chunk_words;
        self.slabs[chunk][(key * self.n_buckets + count) * self.chunk_words + within]
    }
}

fn fill_buckets(table: &KeyTable, config: &WorldConfig) -> Buckets {
    let universe = config.universe_size() as usize;
    let length = config.length;
    let alphabet = config.alphabet_size();
    let cell_mask: u64 = (1 << length) - 1;
    let n_buckets = length + 1;
    let chunk_words = CHUNK_BITS / 64;
    let n_chunks = universe.div_ceil(CHUNK_BITS);

    // Per piece code, the bitmask of patterns it satisfies.
    let piece_pattern_mask: Vec<u64> = (0..alphabet)
        .map(|code| {
            let piece = Piece::from_code(code, config).unwrap();
            table
                .patterns
                .iter()
                .enumerate()
                .filter(|(_, &p)| crate::interpreter::piece_matches(piece, p))
                .fold(0u64, |acc, (pi, _)| acc | (1 << pi))
        })
        .collect();

    let mut slabs: Vec<Vec<u64>> =
        vec![vec![0u64; table.keys.len() * n_buckets * chunk_words]; n_chunks];

    slabs.par_iter_mut().enumerate().for_each(|(chunk, slab)| {
        let start = chunk * CHUNK_BITS;
        let end = (start + CHUNK_BITS).min(universe);
        let mut codes = codes_from_id(start as u64, config);
        let mut matchbits = vec![0u64; table.patterns.len()];
        let mut witness_masks = vec![0u64; table.witness_specs.len()];
        for local in 0..(end - start) {
            // Transpose per-cell pattern masks into per-pattern cell masks.
            matchbits.iter_mut().for_each(|m| *m = 0);
            for (cell, &code) in codes.iter().enumerate() {
                let mut mask = piece_pattern_mask[code as usize];
                while mask != 0 {
                    let pi = mask.trailing_zeros() as usize;
                    matchbits[pi] |= 1 << cell;
                    mask &= mask - 1;
                }
            }
            for (wi, &(relation, oi)) in table.witness_specs.iter().enumerate() {
                witness_masks[wi] = witness_positions(relation, matchbits[oi], cell_mask);
            }
            let word = local / 64;
            let bit = 1u64 << (local % 64);
            for (key, spec) in table.keys.iter().enumerate() {
                let count = match *spec {
                    KeySpec::Simple(pi) => matchbits[pi].count_ones() as usize,
                    KeySpec::Relational(si, wi) => {
                        (matchbits[si] & witness_masks[wi]).count_ones() as usize
                    }
                };
                slab[(key * n_buckets + count) * chunk_words + word] |= bit;
            }
            // Odometer increment of the base-`alphabet` digits, rightmost
            // digit least significant.
            for digit in codes.iter_mut().rev() {
                *digit += 1;
                if (*digit as usize) < alphabet {
                    break;
                }
                *digit = 0;
            }
        }
    });

    Buckets {
        n_buckets,
        chunk_words,
        slabs,
    }
}

fn compose_quantified(
    buckets: &Buckets,
    key: usize,
    allowed: u32,
    words_per_row: usize,
    out: &mut [u64],
) {
    for (w, slot) in out.iter_mut().enumerate().take(words_per_row) {
        let mut acc = 0u64;
        let mut remaining = allowed;
        while remaining != 0 {
            let count = remaining.trailing_zeros() as usize;
            if count < buckets.n_buckets {
                acc |= buckets.word(key, count, w);
            }
            remaining &= remaining - 1;
        }
        *slot = acc;
    }
}

/// Builds the full matrix for an enumerated rule set.
pub fn build_matrix(rules: &RuleSet) -> Result<SemanticMatrix, MatrixError> {
    let config = rules.config();
    let n_structures = config.universe_size() as usize;
    let n_rules = rules.len();
    let words_per_row = bits::words_for(n_structures);
    let length = config.length;

    let total_words = n_rules
        .checked_mul(words_per_row)
        .ok_or(MatrixError::OutOfMemory {
            rows: n_rules,
            words: words_per_row,
        })?;
    let mut words: Vec<u64> = Vec::new();
    words
        .try_reserve_exact(total_words)
        .map_err(|_| MatrixError::OutOfMemory {
            rows: n_rules,
            words: words_per_row,
        })?;
    words.resize(total_words, 0);

    let table = KeyTable::from_rules(rules.rules());
    let buckets = fill_buckets(&table, config);

    // Cache one row per distinct simple proposition; conjunction rows are
    // bitwise combinations of two of them.
    let mut simple_index: HashMap<SimpleProp, usize> = HashMap::new();
    let mut simple_props: Vec<SimpleProp> = Vec::new();
    for rule in rules.rules() {
        let mut intern = |p: &SimpleProp| {
            if !simple_index.contains_key(p) {
                simple_index.insert(*p, simple_props.len());
                simple_props.push(*p);
            }
        };
        match rule {
            RuleAst::Simple(p) => intern(p),
            RuleAst::Conjunction { left, right, .. } => {
                intern(left);
                intern(right);
            }
            RuleAst::Relational { .. } => {}
        }
    }
    let simple_rows: Vec<Vec<u64>> = simple_props
        .par_iter()
        .map(|p| {
            let mut row = vec![0u64; words_per_row];
            let key = table.key_of(CountKey::Simple(p.object));
            compose_quantified(
                &buckets,
                key,
                allowed_counts(p.quantifier, length),
                words_per_row,
                &mut row,
            );
            row
        })
        .collect();

    words
        .par_chunks_mut(words_per_row)
        .zip(rules.rules().par_iter())
        .for_each(|(row, rule)| match rule {
            RuleAst::Simple(p) => {
                row.copy_from_slice(&simple_rows[simple_index[p]]);
            }
            RuleAst::Relational {
                quantifier,
                subject,
                relation,
                object,
            } => {
                let key = table.key_of(CountKey::Relational(*subject, *relation, *object));
                compose_quantified(
                    &buckets,
                    key,
                    allowed_counts(*quantifier, length),
                    words_per_row,
                    row,
                );
            }
            RuleAst::Conjunction {
                left,
                connective,
                right,
            } => {
                let a = &simple_rows[simple_index[left]];
                let b = &simple_rows[simple_index[right]];
                match connective {
                    Connective::And => {
                        for (slot, (x, y)) in row.iter_mut().zip(a.iter().zip(b)) {
                            *slot = x & y;
                        }
                    }
                    Connective::Or => {
                        for (slot, (x, y)) in row.iter_mut().zip(a.iter().zip(b)) {
                            *slot = x | y;
                        }
                    }
                }
            }
        });

    drop(buckets);
    Ok(SemanticMatrix::from_words(n_rules, n_structures, words))
}
