//! Words over the alphabet {1, ..., d} in graded lexicographic order.

use crate::error::{NcError, Result};
use std::cmp::Ordering;
use std::fmt;

/// A word `i1 i2 ... ik`; letters are stored 1-based.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: &[usize], d: usize) -> Result<Self> {
        for &l in letters {
            if l == 0 || l > d {
                return Err(NcError::InvalidWord { letter: l, d });
            }
        }
        Ok(Word(letters.iter().map(|&l| l as u8).collect()))
    }

    /// Parse a digit string such as "122112"; "" is the empty word.
    pub fn parse(s: &str, d: usize) -> Result<Self> {
        let mut v = Vec::with_capacity(s.len());
        for c in s.chars() {
            let l = c.to_digit(10).ok_or(NcError::InvalidWord { letter: 0, d })? as usize;
            v.push(l);
        }
        Word::new(&v, d)
    }

    pub fn single(k: usize) -> Self {
        Word(vec![k as u8])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&l| l as usize)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn reverse(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn rank(&self, d: usize) -> Result<usize> {
        rank_word(self, d)
    }

    /// Drop the first letter, returning it with the tail.
    pub fn split_first(&self) -> Option<(usize, Word)> {
        self.0.split_first().map(|(&h, t)| (h as usize, Word(t.to_vec())))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// Number of words of degree at most `n`.
pub fn count_upto(d: usize, n: usize) -> usize {
    let mut total = 0usize;
    let mut pow = 1usize;
    for _ in 0..=n {
        total += pow;
        pow = pow.saturating_mul(d);
    }
    total
}

/// Number of words of degree exactly `n`.
pub fn count_exact(d: usize, n: usize) -> usize {
    d.saturating_pow(n as u32)
}

pub fn rank_word(alpha: &Word, d: usize) -> Result<usize> {
    let k = alpha.len();
    let offset = if k == 0 { 0 } else { count_upto(d, k - 1) };
    let mut lex = 0usize;
    for l in alpha.letters() {
        if l == 0 || l > d {
            return Err(NcError::InvalidWord { letter: l, d });
        }
        lex = lex * d + (l - 1);
    }
    Ok(offset + lex)
}

pub fn unrank_word(mut i: usize, d: usize) -> Word {
    assert!(d >= 1, "alphabet must be nonempty");
    let mut k = 0usize;
    loop {
        let c = count_exact(d, k);
        if i < c {
            break;
        }
        i -= c;
        k += 1;
    }
    let mut v = vec![0u8; k];
    for slot in v.iter_mut().rev() {
        *slot = (i % d + 1) as u8;
        i /= d;
    }
    Word(v)
}

pub fn concat_words(alpha: &Word, beta: &Word) -> Word {
    alpha.concat(beta)
}

pub fn reverse_word(alpha: &Word) -> Word {
    alpha.reverse()
}

/// All words of degree at most `n`, in rank order.
pub fn words_upto(d: usize, n: usize) -> Vec<Word> {
    (0..count_upto(d, n)).map(|i| unrank_word(i, d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 9).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_word(&Word::empty(), 2).unwrap(), 0);
        assert_eq!(rank_word(&w("12"), 2).unwrap(), 4);
        assert_eq!(rank_word(&w("111"), 2).unwrap(), 7);
        assert!(rank_word(&w("13"), 2).is_err());
    }

    #[test]
    fn unrank_examples() {
        assert_eq!(unrank_word(0, 2), Word::empty());
        assert_eq!(unrank_word(4, 2), w("12"));
        assert_eq!(unrank_word(3, 1), w("111"));
    }

    #[test]
    fn brute_force_order_matches_rank() {
        // enumerate by length then lexicographically, independently of rank_word
        let d = 3;
        let mut all = vec![Word::empty()];
        let mut layer = vec![Word::empty()];
        for _ in 0..4 {
            let mut next = vec![];
            for a in &layer {
                for l in 1..=d {
                    next.push(a.concat(&Word::single(l)));
                }
            }
            all.extend(next.iter().cloned());
            layer = next;
        }
        for (i, a) in all.iter().enumerate() {
            assert_eq!(rank_word(a, d).unwrap(), i);
        }
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, all);
    }

    #[test]
    fn round_trip_small() {
        for d in 1..=3 {
            for n in 0..=6 {
                for i in 0..count_upto(d, n) {
                    assert_eq!(rank_word(&unrank_word(i, d), d).unwrap(), i);
                }
            }
        }
    }

    #[test]
    fn concat_and_reverse() {
        assert_eq!(w("12").concat(&w("1")), w("121"));
        assert_eq!(Word::empty().concat(&w("21")), w("21"));
        assert_eq!(w("122").reverse(), w("221"));
        assert_eq!(w("1212").reverse().reverse(), w("1212"));
        assert_eq!(w("122112").to_string(), "122112");
    }

    fn word_strategy(d: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(1..=d as u8, 0..6).prop_map(Word)
    }

    proptest! {
        #[test]
        fn concat_associative(a in word_strategy(3), b in word_strategy(3), c in word_strategy(3)) {
            prop_assert_eq!(a.concat(&b).concat(&c), a.concat(&b.concat(&c)));
            prop_assert_eq!(a.concat(&b).len(), a.len() + b.len());
            prop_assert_eq!(Word::empty().concat(&a), a.clone());
        }

        #[test]
        fn reverse_antihomomorphism(a in word_strategy(3), b in word_strategy(3)) {
            prop_assert_eq!(a.concat(&b).reverse(), b.reverse().concat(&a.reverse()));
        }

        #[test]
        fn rank_roundtrip(a in word_strategy(3)) {
            prop_assert_eq!(unrank_word(rank_word(&a, 3).unwrap(), 3), a);
        }
    }
}
