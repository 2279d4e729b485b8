//! Packed bit-vector helpers shared by the interpreter, the semantic matrix,
//! and the solvers. Bit `j` of a vector lives in word `j / 64` at position
//! `j % 64` (least-significant bit first), matching the on-disk matrix layout.

/// Number of 64-bit words needed for `len` bits.
pub fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

pub fn get(words: &[u64], bit: usize) -> bool {
    (words[bit / 64] >> (bit % 64)) & 1 == 1
}

pub fn set(words: &mut [u64], bit: usize) {
    words[bit / 64] |= 1 << (bit % 64);
}

pub fn popcount(words: &[u64]) -> u64 {
    words.iter().map(|w| u64::from(w.count_ones())).sum()
}

pub fn hamming(a: &[u64], b: &[u64]) -> u64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| u64::from((x ^ y).count_ones()))
        .sum()
}

/// A length-aware packed bit vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagVector {
    len: usize,
    words: Vec<u64>,
}

impl TagVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            if b {
                set(&mut v.words, j);
            }
        }
        v
    }

    pub fn from_words(words: Vec<u64>, len: usize) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        Self { len, words }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, bit: usize) -> bool {
        debug_assert!(bit < self.len);
        get(&self.words, bit)
    }

    pub fn set(&mut self, bit: usize) {
        debug_assert!(bit < self.len);
        set(&mut self.words, bit);
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn popcount(&self) -> u64 {
        popcount(&self.words)
    }

    pub fn hamming(&self, other: &Self) -> u64 {
        debug_assert_eq!(self.len, other.len);
        hamming(&self.words, &other.words)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |j| self.get(j))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }
}
