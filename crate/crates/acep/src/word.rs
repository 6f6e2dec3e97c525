//! Free-group word arithmetic: free and cyclic reduction, conjugacy,
//! and proper-power decomposition.
//!
//! Words are kept freely reduced at all times. The text syntax used by the
//! CLI and file formats writes a positive letter as its lowercase generator
//! symbol and its inverse as the uppercase form, so `"xYx"` denotes
//! x·y⁻¹·x.

use crate::Error;

/// Ordered set of generator symbols of a free group.
///
/// Symbols must be distinct ASCII lowercase letters so that the
/// uppercase-inverse text convention stays unambiguous.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Alphabet, Error> {
        let symbols: Vec<char> = symbols.into_iter().collect();
        if symbols.is_empty() {
            return Err(Error::BadAlphabet("alphabet must have rank at least 1".into()));
        }
        for &c in &symbols {
            if !c.is_ascii_lowercase() {
                return Err(Error::BadAlphabet(format!(
                    "generator symbol {c:?} is not an ASCII lowercase letter"
                )));
            }
        }
        let mut seen = symbols.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != symbols.len() {
            return Err(Error::BadAlphabet("generator symbols must be distinct".into()));
        }
        Ok(Alphabet { symbols })
    }

    /// Number of generators.
    pub fn rank(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn symbol(&self, generator: usize) -> char {
        self.symbols[generator]
    }

    /// Parses the lowercase/uppercase text syntax into a reduced word.
    pub fn parse_word(&self, text: &str) -> Result<Word, Error> {
        let mut letters = Vec::with_capacity(text.len());
        for (position, c) in text.chars().enumerate() {
            let lower = c.to_ascii_lowercase();
            let generator = self
                .symbols
                .iter()
                .position(|&s| s == lower)
                .ok_or(Error::UnknownSymbol { symbol: c, position })?;
            letters.push(Letter { generator, positive: c.is_ascii_lowercase() });
        }
        Ok(Word::reduce(letters))
    }

    /// Renders a word in the text syntax. The empty word renders as `""`.
    pub fn format_word(&self, w: &Word) -> String {
        w.letters()
            .iter()
            .map(|l| {
                let c = self.symbols[l.generator];
                if l.positive {
                    c
                } else {
                    c.to_ascii_uppercase()
                }
            })
            .collect()
    }
}

/// A generator or its formal inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub positive: bool,
}

impl Letter {
    pub fn new(generator: usize, positive: bool) -> Letter {
        Letter { generator, positive }
    }

    pub fn inverse(self) -> Letter {
        Letter { generator: self.generator, positive: !self.positive }
    }

    pub fn is_inverse_of(self, other: Letter) -> bool {
        self.generator == other.generator && self.positive != other.positive
    }

    /// Dense index in `0..2·rank`, used by automata and adjacency tables.
    pub fn index(self) -> usize {
        self.generator * 2 + usize::from(self.positive)
    }
}

/// A freely reduced word; the identity is the empty word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Word {
        Word { letters: Vec::new() }
    }

    pub fn from_letter(letter: Letter) -> Word {
        Word { letters: vec![letter] }
    }

    /// Freely reduces an arbitrary letter sequence. Idempotent.
    pub fn reduce(raw: impl IntoIterator<Item = Letter>) -> Word {
        let mut stack: Vec<Letter> = Vec::new();
        for letter in raw {
            match stack.last() {
                Some(&top) if top.is_inverse_of(letter) => {
                    stack.pop();
                }
                _ => stack.push(letter),
            }
        }
        Word { letters: stack }
    }

    /// Wraps a letter sequence already known to be freely reduced.
    pub(crate) fn from_reduced_letters(letters: Vec<Letter>) -> Word {
        debug_assert!(letters.windows(2).all(|p| !p[0].is_inverse_of(p[1])));
        Word { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    /// Reduced product `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        Word::reduce(self.letters.iter().chain(other.letters.iter()).copied())
    }

    /// Reduced product of a sequence of words.
    pub fn product<'a>(words: impl IntoIterator<Item = &'a Word>) -> Word {
        Word::reduce(words.into_iter().flat_map(|w| w.letters.iter().copied()))
    }

    /// `self^by = by⁻¹ · self · by`.
    pub fn conjugate(&self, by: &Word) -> Word {
        Word::product([&by.inverse(), self, by])
    }

    pub fn pow(&self, exponent: i64) -> Word {
        let base = if exponent < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::empty();
        for _ in 0..exponent.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    /// `[a, b] = a b a⁻¹ b⁻¹`.
    pub fn commutator(a: &Word, b: &Word) -> Word {
        Word::product([a, b, &a.inverse(), &b.inverse()])
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&first), Some(&last)) => !first.is_inverse_of(last),
            _ => true,
        }
    }

    /// Largest generator index occurring in the word, if any.
    pub fn max_generator(&self) -> Option<usize> {
        self.letters.iter().map(|l| l.generator).max()
    }
}

/// A cyclically reduced word, the canonical spine of a conjugacy class.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CyclicWord {
    word: Word,
}

impl CyclicWord {
    /// Wraps a word already known to be cyclically reduced.
    pub(crate) fn from_reduced(word: Word) -> CyclicWord {
        debug_assert!(word.is_cyclically_reduced());
        CyclicWord { word }
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Rotation by `offset`: `w = yz` with `|y| = offset` becomes `zy`.
    pub fn rotate(&self, offset: usize) -> CyclicWord {
        if self.word.is_empty() {
            return self.clone();
        }
        let n = self.word.len();
        let k = offset % n;
        let mut letters = self.word.letters[k..].to_vec();
        letters.extend_from_slice(&self.word.letters[..k]);
        CyclicWord { word: Word { letters } }
    }

    /// True when `other` is some rotation of `self`, decided by searching
    /// `other` inside the doubled word rather than enumerating rotations.
    pub fn is_rotation_of(&self, other: &CyclicWord) -> bool {
        if self.word.len() != other.word.len() {
            return false;
        }
        if self.word.is_empty() {
            return true;
        }
        let mut doubled = self.word.letters.clone();
        doubled.extend_from_slice(&self.word.letters);
        doubled
            .windows(other.word.len())
            .any(|window| window == other.word.letters.as_slice())
    }
}

/// Splits `w` as `conjugator · w* · conjugator⁻¹` with `w*` cyclically reduced.
pub fn cyclic_reduce(w: &Word) -> (CyclicWord, Word) {
    let letters = &w.letters;
    let mut lo = 0;
    let mut hi = letters.len();
    while hi - lo >= 2 && letters[lo].is_inverse_of(letters[hi - 1]) {
        lo += 1;
        hi -= 1;
    }
    let core = Word { letters: letters[lo..hi].to_vec() };
    let conjugator = Word { letters: letters[..lo].to_vec() };
    debug_assert!(core.is_cyclically_reduced());
    (CyclicWord { word: core }, conjugator)
}

/// Conjugacy in the ambient free group: equal-length cyclic reductions that
/// are rotations of one another.
pub fn conjugate_in_free(w1: &Word, w2: &Word) -> bool {
    let (c1, _) = cyclic_reduce(w1);
    let (c2, _) = cyclic_reduce(w2);
    c1.is_rotation_of(&c2)
}

/// Maximal-exponent decomposition `w = root^exponent` with `exponent ≥ 2`,
/// or `None` when `w` is not a proper power.
///
/// The smallest period of the cyclic reduction that divides its length
/// determines the primitive root; the root is conjugated back through the
/// peeled-off prefix so that the identity `root^exponent = w` holds on the
/// nose.
///
/// # Panics
///
/// Rejects the trivial word.
pub fn is_proper_power(w: &Word) -> Option<(Word, u32)> {
    assert!(!w.is_empty(), "proper-power decomposition is undefined for the trivial word");
    let (core, conjugator) = cyclic_reduce(w);
    let n = core.len();
    let letters = core.word().letters();
    for period in 1..n {
        if n % period != 0 {
            continue;
        }
        if (0..n).all(|i| letters[i] == letters[(i + period) % n]) {
            let root_core = Word { letters: letters[..period].to_vec() };
            let root =
                Word::product([&conjugator, &root_core, &conjugator.inverse()]);
            return Some((root, (n / period) as u32));
        }
    }
    None
}
