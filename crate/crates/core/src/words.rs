//! Alphabets, finite words and canonical forbidden-word sets.
//!
//! Letters are stored as small integers (`u8`) indexing into an [`Alphabet`];
//! the alphabet fixes the total order used for lexicographic comparison and
//! canonical necklace representatives.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered list of distinct symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self> {
        let symbols: Vec<char> = symbols.into_iter().collect();
        if symbols.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if symbols.len() > u8::MAX as usize {
            return Err(Error::InvalidArgument("alphabet too large".into()));
        }
        for (i, c) in symbols.iter().enumerate() {
            if symbols[..i].contains(c) {
                return Err(Error::DuplicateSymbol(*c));
            }
            if c.is_whitespace() || *c == '#' || *c == ':' || *c == ',' {
                return Err(Error::InvalidArgument(format!(
                    "{c:?} cannot be used as a symbol"
                )));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// The alphabet `{0, 1}`.
    pub fn binary() -> Self {
        Alphabet {
            symbols: vec!['0', '1'],
        }
    }

    /// The first `size` symbols of `0-9a-z`.
    pub fn numeric(size: usize) -> Result<Self> {
        const DIGITS: &str = "0123456789abcdefghijklmnopqrstuvwxyz";
        if size == 0 || size > DIGITS.len() {
            return Err(Error::InvalidArgument(format!(
                "numeric alphabets have 1..={} symbols",
                DIGITS.len()
            )));
        }
        Alphabet::new(DIGITS.chars().take(size))
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn index_of(&self, c: char) -> Option<u8> {
        self.symbols.iter().position(|&s| s == c).map(|i| i as u8)
    }

    pub fn symbol(&self, letter: u8) -> char {
        self.symbols[letter as usize]
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        text.chars()
            .map(|c| self.index_of(c).ok_or(Error::UnknownSymbol(c)))
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }

    pub fn render(&self, w: &[u8]) -> String {
        w.iter().map(|&l| self.symbol(l)).collect()
    }

    /// Checks that every letter of `w` indexes this alphabet.
    pub fn check(&self, w: &[u8]) -> Result<()> {
        match w.iter().find(|&&l| l as usize >= self.size()) {
            Some(&letter) => Err(Error::LetterOutOfRange {
                letter,
                size: self.size(),
            }),
            None => Ok(()),
        }
    }

    /// All `size^n` words of length `n` in lexicographic order.
    pub fn all_words(&self, n: usize) -> AllWords {
        AllWords {
            size: self.size() as u8,
            next: Some(vec![0; n]),
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.symbols.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Odometer over all words of a fixed length.
#[derive(Debug, Clone)]
pub struct AllWords {
    size: u8,
    next: Option<Vec<u8>>,
}

impl Iterator for AllWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if succ[i] + 1 < self.size {
                succ[i] += 1;
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(Word(current))
    }
}

/// A finite word over an alphabet, as letter indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(letters: Vec<u8>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Shorthand for binary words in tests and examples: `"0110"`.
    pub fn binary(text: &str) -> Self {
        Alphabet::binary()
            .parse_word(text)
            .expect("binary word literal")
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<u8> {
        self.0
    }

    pub fn push(&mut self, letter: u8) {
        self.0.push(letter);
    }

    pub fn concat(&self, other: &[u8]) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(other);
        Word(v)
    }

    pub fn repeat(&self, times: usize) -> Word {
        Word(self.0.repeat(times))
    }

    pub fn rotate(&self, offset: usize) -> Word {
        if self.0.is_empty() {
            return self.clone();
        }
        let mut v = self.0.clone();
        v.rotate_left(offset % self.0.len());
        Word(v)
    }

    /// Length of the shortest `d` with `self = (self[..d])^(len/d)`.
    pub fn primitive_root_len(&self) -> usize {
        let n = self.0.len();
        (1..=n)
            .find(|&d| n.is_multiple_of(d) && (d..n).all(|i| self.0[i] == self.0[i - d]))
            .unwrap_or(0)
    }

    pub fn is_primitive(&self) -> bool {
        !self.0.is_empty() && self.primitive_root_len() == self.0.len()
    }

    /// Lexicographically least rotation.
    pub fn least_rotation(&self) -> Word {
        (0..self.0.len().max(1))
            .map(|i| self.rotate(i))
            .min()
            .unwrap_or_default()
    }

    pub fn display(&self, alphabet: &Alphabet) -> String {
        alphabet.render(&self.0)
    }
}

impl Deref for Word {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl std::borrow::Borrow<[u8]> for Word {
    fn borrow(&self) -> &[u8] {
        &self.0
    }
}

impl From<Vec<u8>> for Word {
    fn from(v: Vec<u8>) -> Self {
        Word(v)
    }
}

impl From<&[u8]> for Word {
    fn from(v: &[u8]) -> Self {
        Word(v.to_vec())
    }
}

impl FromIterator<u8> for Word {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// Number of start positions where `pattern` occurs in `text` (overlaps count).
/// The empty pattern occurs at all `|text| + 1` positions.
pub fn occurrences(pattern: &[u8], text: &[u8]) -> usize {
    if pattern.is_empty() {
        return text.len() + 1;
    }
    if pattern.len() > text.len() {
        return 0;
    }
    text.windows(pattern.len()).filter(|w| *w == pattern).count()
}

/// Number of offsets `i < |period_word|` at which `pattern` matches the
/// bi-infinite periodic word `...uuu...` read from position `i`.
pub fn cyclic_occurrences(pattern: &[u8], period_word: &[u8]) -> Result<usize> {
    if period_word.is_empty() {
        return Err(Error::EmptyPeriodWord);
    }
    let p = period_word.len();
    Ok((0..p)
        .filter(|&i| {
            pattern
                .iter()
                .enumerate()
                .all(|(j, &l)| period_word[(i + j) % p] == l)
        })
        .count())
}

/// Whether `pattern` occurs somewhere in the periodic point `period_word^∞`.
pub fn occurs_cyclically(pattern: &[u8], period_word: &[u8]) -> bool {
    let p = period_word.len();
    if p == 0 {
        return false;
    }
    if pattern.len() >= p {
        // pattern must itself have period p and start with a rotation of the period word
        if (p..pattern.len()).any(|i| pattern[i] != pattern[i - p]) {
            return false;
        }
        let head = &pattern[..p];
        return (0..p).any(|i| (0..p).all(|j| period_word[(i + j) % p] == head[j]));
    }
    (0..p).any(|i| {
        pattern
            .iter()
            .enumerate()
            .all(|(j, &l)| period_word[(i + j) % p] == l)
    })
}

/// Canonical minimal forbidden-word set: no member occurs inside another.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ForbiddenSet {
    alphabet: Alphabet,
    words: BTreeSet<Word>,
    max_len: usize,
}

/// Reduce `words` to its minimal members: a word is dropped when some other
/// member occurs inside it. The result forbids the same subshift.
pub fn minimalize(alphabet: &Alphabet, words: impl IntoIterator<Item = Word>) -> Result<ForbiddenSet> {
    let mut all = BTreeSet::new();
    for w in words {
        if w.is_empty() {
            return Err(Error::EmptyForbiddenWord);
        }
        alphabet.check(&w)?;
        all.insert(w);
    }
    // shortest first so every kept word only needs checking against kept ones
    let mut by_len: Vec<Word> = all.into_iter().collect();
    by_len.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut kept: Vec<Word> = Vec::new();
    for w in by_len {
        if !kept.iter().any(|k| occurrences(k, &w) > 0) {
            kept.push(w);
        }
    }
    let max_len = kept.iter().map(|w| w.len()).max().unwrap_or(0);
    Ok(ForbiddenSet {
        alphabet: alphabet.clone(),
        words: kept.into_iter().collect(),
        max_len,
    })
}

/// Whether no member of `forbidden` occurs in `w`.
pub fn avoids(w: &[u8], forbidden: &ForbiddenSet) -> bool {
    forbidden
        .words
        .iter()
        .all(|f| f.len() > w.len() || occurrences(f, w) == 0)
}

impl ForbiddenSet {
    pub fn new(alphabet: &Alphabet, words: impl IntoIterator<Item = Word>) -> Result<Self> {
        minimalize(alphabet, words)
    }

    pub fn empty(alphabet: &Alphabet) -> Self {
        ForbiddenSet {
            alphabet: alphabet.clone(),
            words: BTreeSet::new(),
            max_len: 0,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.words.iter()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.words.contains(w)
    }

    /// Members sorted by length, then lexicographically.
    pub fn sorted(&self) -> Vec<&Word> {
        let mut v: Vec<&Word> = self.words.iter().collect();
        v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        v
    }

    /// The set with `extra` added, re-minimalized.
    pub fn with_words(&self, extra: impl IntoIterator<Item = Word>) -> Result<Self> {
        minimalize(
            &self.alphabet,
            self.words.iter().cloned().chain(extra),
        )
    }

    /// Members of length at most `n`.
    pub fn truncated(&self, n: usize) -> Self {
        let words: BTreeSet<Word> = self.words.iter().filter(|w| w.len() <= n).cloned().collect();
        let max_len = words.iter().map(|w| w.len()).max().unwrap_or(0);
        ForbiddenSet {
            alphabet: self.alphabet.clone(),
            words,
            max_len,
        }
    }

    /// Canonical text form: `alphabet:` header, then one word per line
    /// ordered by length and then lexicographically.
    pub fn to_text(&self) -> String {
        let mut out = format!("alphabet: {}\n", self.alphabet);
        for w in self.sorted() {
            out.push_str(&w.display(&self.alphabet));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut alphabet: Option<Alphabet> = None;
        let mut words = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let column = content.find(trimmed).unwrap_or(0) + 1;
            match &alphabet {
                None => {
                    let rest = trimmed.strip_prefix("alphabet:").ok_or_else(|| Error::Parse {
                        line: line_no,
                        column,
                        message: "expected `alphabet: <symbols>` header".into(),
                    })?;
                    alphabet = Some(parse_alphabet(rest).map_err(|e| Error::Parse {
                        line: line_no,
                        column,
                        message: e.to_string(),
                    })?);
                }
                Some(a) => {
                    let mut letters = Vec::with_capacity(trimmed.len());
                    for (j, c) in trimmed.chars().enumerate() {
                        let l = a.index_of(c).ok_or_else(|| Error::Parse {
                            line: line_no,
                            column: column + j,
                            message: format!("unknown symbol {c:?}"),
                        })?;
                        letters.push(l);
                    }
                    words.push(Word(letters));
                }
            }
        }
        let alphabet = alphabet.ok_or(Error::Parse {
            line: 1,
            column: 1,
            message: "missing `alphabet:` header".into(),
        })?;
        minimalize(&alphabet, words)
    }
}

/// Parses `0 1` or `01` style symbol lists.
pub fn parse_alphabet(text: &str) -> Result<Alphabet> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() == 1 {
        Alphabet::new(tokens[0].chars())
    } else {
        let mut symbols = Vec::new();
        for t in tokens {
            let mut chars = t.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => symbols.push(c),
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "symbol {t:?} must be a single character"
                    )))
                }
            }
        }
        Alphabet::new(symbols)
    }
}

/// Lyndon words (primitive least rotations) of length `n` over `k` letters,
/// in lexicographic order (Duval's generation algorithm).
pub fn lyndon_words(k: usize, n: usize) -> Vec<Word> {
    let mut out = Vec::new();
    if n == 0 || k == 0 {
        return out;
    }
    let k = k as u8;
    let mut w: Vec<u8> = vec![0];
    loop {
        if w.len() == n {
            out.push(Word(w.clone()));
        }
        let m = w.len();
        while w.len() < n {
            let c = w[w.len() - m];
            w.push(c);
        }
        while let Some(&last) = w.last() {
            if last == k - 1 {
                w.pop();
            } else {
                break;
            }
        }
        match w.last_mut() {
            Some(l) => *l += 1,
            None => break,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> Word {
        Word::binary(s)
    }

    fn fs(words: &[&str]) -> ForbiddenSet {
        minimalize(&Alphabet::binary(), words.iter().map(|w| b(w))).unwrap()
    }

    #[test]
    fn minimalize_examples() {
        assert_eq!(fs(&["11", "011"]).sorted(), vec![&b("11")]);
        assert_eq!(fs(&["11", "1001"]).sorted(), vec![&b("11"), &b("1001")]);
        assert_eq!(fs(&["000", "0000", "010"]).sorted(), vec![&b("000"), &b("010")]);
    }

    #[test]
    fn minimalize_errors() {
        let a = Alphabet::binary();
        assert_eq!(
            minimalize(&a, vec![b("1"), Word::empty()]).unwrap_err(),
            Error::EmptyForbiddenWord
        );
        assert!(matches!(
            minimalize(&a, vec![Word::new(vec![0, 2])]).unwrap_err(),
            Error::LetterOutOfRange { letter: 2, size: 2 }
        ));
    }

    #[test]
    fn occurrence_examples() {
        assert_eq!(occurrences(&b("11"), &b("0110")), 1);
        assert_eq!(occurrences(&b("11"), &b("111")), 2);
        assert_eq!(occurrences(&b("010"), &b("01010")), 2);
        assert_eq!(occurrences(&[], &b("010")), 4);
    }

    #[test]
    fn cyclic_occurrence_examples() {
        assert_eq!(cyclic_occurrences(&b("11"), &b("01")).unwrap(), 0);
        assert_eq!(cyclic_occurrences(&b("10"), &b("10")).unwrap(), 1);
        assert_eq!(cyclic_occurrences(&b("010"), &b("01")).unwrap(), 1);
        assert_eq!(cyclic_occurrences(&[], &b("011")).unwrap(), 3);
        assert_eq!(cyclic_occurrences(&b("0"), &[]).unwrap_err(), Error::EmptyPeriodWord);
    }

    #[test]
    fn avoids_examples() {
        assert!(avoids(&b("0101"), &fs(&["11"])));
        assert!(!avoids(&b("0110"), &fs(&["11"])));
        assert!(!avoids(&b("1110100111"), &fs(&["11", "1001"])));
    }

    #[test]
    fn text_format_round_trip() {
        let set = fs(&["1001", "11"]);
        let text = set.to_text();
        assert_eq!(text, "alphabet: 0 1\n11\n1001\n");
        let back = ForbiddenSet::from_text(&text).unwrap();
        assert_eq!(back, set);
        assert_eq!(back.to_text(), text);

        let commented = "# golden mean\nalphabet: 01\n\n11 # the only word\n";
        assert_eq!(ForbiddenSet::from_text(commented).unwrap(), fs(&["11"]));
    }

    #[test]
    fn text_format_errors_carry_position() {
        let err = ForbiddenSet::from_text("alphabet: 0 1\n1x1\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 2,
                column: 2,
                message: "unknown symbol 'x'".into()
            }
        );
        assert!(matches!(
            ForbiddenSet::from_text("11\n").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
    }

    #[test]
    fn lyndon_counts_match_necklace_formula() {
        // binary Lyndon words: 2, 1, 2, 3, 6, 9, 18, 30
        let counts: Vec<usize> = (1..=8).map(|n| lyndon_words(2, n).len()).collect();
        assert_eq!(counts, vec![2, 1, 2, 3, 6, 9, 18, 30]);
        assert_eq!(lyndon_words(3, 2).len(), 3);
        for w in lyndon_words(2, 6) {
            assert!(w.is_primitive());
            assert_eq!(w.least_rotation(), w);
        }
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(b("0101").primitive_root_len(), 2);
        assert!(b("011").is_primitive());
        assert_eq!(b("10").least_rotation(), b("01"));
    }

    #[test]
    fn cyclic_containment_long_patterns() {
        let period = b("110");
        assert!(occurs_cyclically(&b("110110110"), &period));
        assert!(occurs_cyclically(&b("0110110"), &period));
        assert!(!occurs_cyclically(&b("1111"), &period));
        assert!(occurs_cyclically(&b("01"), &period));
    }
}
