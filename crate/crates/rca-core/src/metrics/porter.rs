//! Classic Porter stemmer.
//!
//! Faithful port of the original 1980 algorithm (steps 1a through 5b) over
//! lowercase ASCII words. Tokens containing anything outside `a..=z` are
//! returned unchanged, as are words of one or two letters.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

pub fn stem(word: &str) -> String {
    if word.len() <= 2 || !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word.to_string();
    }
    let mut s = Stemmer {
        b: word.as_bytes().to_vec(),
        k: word.len() - 1,
        j: 0,
    };
    s.step1ab();
    s.step1c();
    s.step2();
    s.step3();
    s.step4();
    s.step5();
    String::from_utf8(s.b[..=s.k].to_vec()).expect("ascii")
}

struct Stemmer {
    b: Vec<u8>,
    /// Index of the last valid byte.
    k: usize,
    /// Index of the last byte of the stem once a suffix has matched.
    j: usize,
}

impl Stemmer {
    fn consonant(&self, i: usize) -> bool {
        match self.b[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.consonant(i - 1),
            _ => true,
        }
    }

    /// Number of vowel-consonant sequences in `b[0..=j]`.
    fn measure(&self) -> usize {
        let mut n = 0;
        let mut i = 0;
        loop {
            if i > self.j {
                return n;
            }
            if !self.consonant(i) {
                break;
            }
            i += 1;
        }
        i += 1;
        loop {
            loop {
                if i > self.j {
                    return n;
                }
                if self.consonant(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
            n += 1;
            loop {
                if i > self.j {
                    return n;
                }
                if !self.consonant(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
        }
    }

    fn vowel_in_stem(&self) -> bool {
        (0..=self.j).any(|i| !self.consonant(i))
    }

    fn double_consonant(&self, i: usize) -> bool {
        i >= 1 && self.b[i] == self.b[i - 1] && self.consonant(i)
    }

    /// consonant-vowel-consonant ending at `i`, where the final consonant is
    /// not w, x, or y. Used to restore a trailing e (cav(e), lov(e)).
    fn cvc(&self, i: usize) -> bool {
        if i < 2 || !self.consonant(i) || self.consonant(i - 1) || !self.consonant(i - 2) {
            return false;
        }
        !matches!(self.b[i], b'w' | b'x' | b'y')
    }

    fn ends(&mut self, suffix: &[u8]) -> bool {
        if suffix.len() > self.k + 1 {
            return false;
        }
        let start = self.k + 1 - suffix.len();
        if &self.b[start..=self.k] != suffix {
            return false;
        }
        self.j = start.wrapping_sub(1);
        true
    }

    /// j after a matched suffix of the whole word; usize-wrapped -1 means the
    /// suffix was the entire word and the stem is empty.
    fn stem_measure_positive(&self) -> bool {
        self.j != usize::MAX && self.measure() > 0
    }

    fn set_suffix(&mut self, suffix: &[u8]) {
        let base = self.j.wrapping_add(1);
        self.b.truncate(base);
        self.b.extend_from_slice(suffix);
        self.k = base + suffix.len() - 1;
    }

    fn replace_if_measure(&mut self, suffix: &[u8]) {
        if self.stem_measure_positive() {
            self.set_suffix(suffix);
        }
    }

    fn step1ab(&mut self) {
        if self.b[self.k] == b's' {
            if self.ends(b"sses") {
                self.k -= 2;
            } else if self.ends(b"ies") {
                self.set_suffix(b"i");
            } else if self.b[self.k - 1] != b's' {
                self.k -= 1;
            }
        }
        if self.ends(b"eed") {
            if self.stem_measure_positive() {
                self.k -= 1;
            }
        } else if (self.ends(b"ed") || self.ends(b"ing"))
            && self.j != usize::MAX
            && self.vowel_in_stem()
        {
            self.k = self.j;
            self.b.truncate(self.k + 1);
            if self.ends(b"at") {
                self.set_suffix(b"ate");
            } else if self.ends(b"bl") {
                self.set_suffix(b"ble");
            } else if self.ends(b"iz") {
                self.set_suffix(b"ize");
            } else if self.double_consonant(self.k) {
                self.k -= 1;
                if matches!(self.b[self.k], b'l' | b's' | b'z') {
                    self.k += 1;
                }
            } else {
                self.j = self.k;
                if self.measure() == 1 && self.cvc(self.k) {
                    self.set_suffix(b"e");
                }
            }
        }
        self.b.truncate(self.k + 1);
    }

    fn step1c(&mut self) {
        if self.ends(b"y") && self.j != usize::MAX && self.vowel_in_stem() {
            self.b[self.k] = b'i';
        }
    }

    fn step2(&mut self) {
        const RULES: &[(&[u8], &[u8])] = &[
            (b"ational", b"ate"),
            (b"tional", b"tion"),
            (b"enci", b"ence"),
            (b"anci", b"ance"),
            (b"izer", b"ize"),
            (b"abli", b"able"),
            (b"alli", b"al"),
            (b"entli", b"ent"),
            (b"eli", b"e"),
            (b"ousli", b"ous"),
            (b"ization", b"ize"),
            (b"ation", b"ate"),
            (b"ator", b"ate"),
            (b"alism", b"al"),
            (b"iveness", b"ive"),
            (b"fulness", b"ful"),
            (b"ousness", b"ous"),
            (b"aliti", b"al"),
            (b"iviti", b"ive"),
            (b"biliti", b"ble"),
        ];
        for (suffix, replacement) in RULES {
            if self.ends(suffix) {
                self.replace_if_measure(replacement);
                return;
            }
        }
    }

    fn step3(&mut self) {
        const RULES: &[(&[u8], &[u8])] = &[
            (b"icate", b"ic"),
            (b"ative", b""),
            (b"alize", b"al"),
            (b"iciti", b"ic"),
            (b"ical", b"ic"),
            (b"ful", b""),
            (b"ness", b""),
        ];
        for (suffix, replacement) in RULES {
            if self.ends(suffix) {
                self.replace_if_measure(replacement);
                return;
            }
        }
    }

    fn step4(&mut self) {
        const SUFFIXES: &[&[u8]] = &[
            b"al", b"ance", b"ence", b"er", b"ic", b"able", b"ible", b"ant", b"ement", b"ment",
            b"ent", b"ion", b"ou", b"ism", b"ate", b"iti", b"ous", b"ive", b"ize",
        ];
        for suffix in SUFFIXES {
            if *suffix == b"ion" {
                // "ion" only counts when the stem ends in s or t.
                if self.ends(b"ion") {
                    if self.j != usize::MAX && matches!(self.b[self.j], b's' | b't') {
                        if self.measure() > 1 {
                            self.k = self.j;
                            self.b.truncate(self.k + 1);
                        }
                        return;
                    }
                    continue;
                }
                continue;
            }
            if self.ends(suffix) {
                if self.j != usize::MAX && self.measure() > 1 {
                    self.k = self.j;
                    self.b.truncate(self.k + 1);
                }
                return;
            }
        }
    }

    fn step5(&mut self) {
        self.j = self.k;
        if self.b[self.k] == b'e' {
            let a = self.measure();
            if a > 1 || (a == 1 && !self.cvc(self.k - 1)) {
                self.k -= 1;
            }
        }
        if self.b[self.k] == b'l' && self.double_consonant(self.k) {
            self.j = self.k;
            if self.measure() > 1 {
                self.k -= 1;
            }
        }
        self.b.truncate(self.k + 1);
    }
}
