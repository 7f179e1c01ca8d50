//! ARPAbet phoneme sequences, CMU-format dictionaries and the
//! slang → base → estimate lookup cascade.

mod dictionary;
mod g2p;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

pub use dictionary::{lookup, Diagnostic, DictSource, Dictionaries, PronouncingDictionary};
pub use g2p::{estimate_phonemes, REWRITE_TABLE};

macro_rules! arpabet {
    ($( $sym:ident => $vowel:expr ),* $(,)?) => {
        /// The 39 base ARPAbet phonemes used by the CMU dictionary.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Arpabet { $( $sym ),* }

        impl Arpabet {
            pub const ALL: [Arpabet; 39] = [ $( Arpabet::$sym ),* ];

            pub fn symbol(self) -> &'static str {
                match self { $( Arpabet::$sym => stringify!($sym) ),* }
            }

            pub fn is_vowel(self) -> bool {
                match self { $( Arpabet::$sym => $vowel ),* }
            }
        }

        impl FromStr for Arpabet {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $( stringify!($sym) => Ok(Arpabet::$sym), )*
                    _ => Err(format!("`{s}` is not an ARPAbet phoneme")),
                }
            }
        }
    };
}

arpabet! {
    AA => true, AE => true, AH => true, AO => true, AW => true, AY => true,
    EH => true, ER => true, EY => true, IH => true, IY => true, OW => true,
    OY => true, UH => true, UW => true,
    B => false, CH => false, D => false, DH => false, F => false, G => false,
    HH => false, JH => false, K => false, L => false, M => false, N => false,
    NG => false, P => false, R => false, S => false, SH => false, T => false,
    TH => false, V => false, W => false, Y => false, Z => false, ZH => false,
}

impl fmt::Display for Arpabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One phoneme with its stress digit. Only vowels carry stress.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phone {
    base: Arpabet,
    stress: Option<u8>,
}

impl Phone {
    pub fn consonant(base: Arpabet) -> Option<Phone> {
        (!base.is_vowel()).then_some(Phone { base, stress: None })
    }

    pub fn vowel(base: Arpabet, stress: u8) -> Option<Phone> {
        (base.is_vowel() && stress <= 2).then_some(Phone {
            base,
            stress: Some(stress),
        })
    }

    pub fn base(self) -> Arpabet {
        self.base
    }

    pub fn stress(self) -> Option<u8> {
        self.stress
    }

    pub fn is_vowel(self) -> bool {
        self.stress.is_some()
    }
}

impl FromStr for Phone {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (sym, digit) = match s.as_bytes().last() {
            Some(d @ b'0'..=b'9') => (&s[..s.len() - 1], Some(d - b'0')),
            _ => (s, None),
        };
        let base: Arpabet = sym.parse()?;
        match (base.is_vowel(), digit) {
            (true, Some(d)) => Phone::vowel(base, d).ok_or_else(|| format!("bad stress in `{s}`")),
            (true, None) => Err(format!("vowel `{s}` lacks a stress digit")),
            (false, None) => Ok(Phone { base, stress: None }),
            (false, Some(_)) => Err(format!("consonant `{s}` carries a stress digit")),
        }
    }
}

impl fmt::Display for Phone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stress {
            Some(d) => write!(f, "{}{}", self.base, d),
            None => write!(f, "{}", self.base),
        }
    }
}

/// An ordered pronunciation. Construction guarantees the closed symbol set
/// and stress-on-vowels-only invariants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PhonemeSequence {
    phones: Vec<Phone>,
}

impl PhonemeSequence {
    pub fn new(phones: Vec<Phone>) -> Self {
        PhonemeSequence { phones }
    }

    pub fn phones(&self) -> &[Phone] {
        &self.phones
    }

    pub fn phonemes(&self) -> Vec<Arpabet> {
        self.phones.iter().map(|p| p.base).collect()
    }

    pub fn stress(&self) -> Vec<Option<u8>> {
        self.phones.iter().map(|p| p.stress).collect()
    }

    pub fn len(&self) -> usize {
        self.phones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phones.is_empty()
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a PhonemeSequence>) -> PhonemeSequence {
        PhonemeSequence {
            phones: parts.into_iter().flat_map(|p| p.phones.iter().copied()).collect(),
        }
    }
}

impl FromStr for PhonemeSequence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split_whitespace()
            .map(Phone::from_str)
            .collect::<Result<Vec<_>, _>>()
            .map(PhonemeSequence::new)
    }
}

impl fmt::Display for PhonemeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.phones.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl Serialize for PhonemeSequence {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Number of vowel phonemes, i.e. symbols carrying a stress digit.
pub fn syllable_count(p: &PhonemeSequence) -> usize {
    p.phones.iter().filter(|ph| ph.is_vowel()).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> PhonemeSequence {
        s.parse().unwrap()
    }

    #[test]
    fn thirty_nine_symbols() {
        assert_eq!(Arpabet::ALL.len(), 39);
        assert_eq!(Arpabet::ALL.iter().filter(|a| a.is_vowel()).count(), 15);
    }

    #[test]
    fn counts_syllables() {
        assert_eq!(syllable_count(&seq("HH AH0 L OW1")), 2);
        assert_eq!(syllable_count(&seq("")), 0);
        assert_eq!(syllable_count(&seq("S T R")), 0);
    }

    #[test]
    fn rejects_bad_phones() {
        assert!("QX".parse::<Phone>().is_err());
        assert!("AH".parse::<Phone>().is_err());
        assert!("T1".parse::<Phone>().is_err());
        assert!("AH3".parse::<Phone>().is_err());
        assert_eq!("ER0".parse::<Phone>().unwrap().to_string(), "ER0");
    }
}
