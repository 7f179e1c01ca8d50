//! Rule-based grapheme-to-phoneme estimate for out-of-dictionary tokens.
//!
//! Each hyphen-separated part is processed left to right with a
//! longest-match rewrite over [`REWRITE_TABLE`]. A handful of positional
//! rules run before the table:
//!
//! * magic e: `V C e` at the end of a part lengthens the vowel
//!   (`a→EY e→IY i→AY o→OW u→UW`) and the `e` is silent;
//! * any other final `e` after a consonant is silent when the part has
//!   another vowel letter;
//! * final `a → AH`, final `o → OW`, final `e → IY` (when not silent);
//! * `y` is `Y` at the start of a part or before a vowel, `AY` when it is the
//!   part's only vowel letter, `IY` otherwise;
//! * `c` before `e`, `i`, `y` is `S`;
//! * `h` after a vowel letter and not before one is silent (`yeah`, `oh`).
//!
//! The first vowel phoneme of the whole token gets stress 1, all others 0.
//! A token that yields no vowel gets a schwa (`AH0`) after its first
//! phoneme, i.e. before the trailing consonants (`hmm → HH AH0 M`).
//! Characters outside `a-z` are ignored.

use super::{Arpabet, Arpabet::*, Phone, PhonemeSequence};

/// Grapheme rewrites, tried longest first at each position.
pub const REWRITE_TABLE: &[(&str, &[Arpabet])] = &[
    ("eigh", &[EY]),
    ("ough", &[AO]),
    ("tch", &[CH]),
    ("igh", &[AY]),
    ("sch", &[S, K]),
    ("dge", &[JH]),
    ("ing", &[IH, NG]),
    ("air", &[EH, R]),
    ("ear", &[IH, R]),
    ("eer", &[IH, R]),
    ("our", &[AW, R]),
    ("ch", &[CH]),
    ("sh", &[SH]),
    ("th", &[TH]),
    ("ph", &[F]),
    ("wh", &[W]),
    ("ng", &[NG]),
    ("ck", &[K]),
    ("qu", &[K, W]),
    ("gh", &[G]),
    ("kn", &[N]),
    ("wr", &[R]),
    ("dg", &[JH]),
    ("zh", &[ZH]),
    ("ee", &[IY]),
    ("ea", &[IY]),
    ("oo", &[UW]),
    ("ou", &[AW]),
    ("ow", &[OW]),
    ("oa", &[OW]),
    ("ai", &[EY]),
    ("ay", &[EY]),
    ("ei", &[EY]),
    ("ey", &[EY]),
    ("oi", &[OY]),
    ("oy", &[OY]),
    ("au", &[AO]),
    ("aw", &[AO]),
    ("ie", &[IY]),
    ("ue", &[UW]),
    ("ew", &[UW]),
    ("ar", &[AA, R]),
    ("er", &[ER]),
    ("ir", &[ER]),
    ("ur", &[ER]),
    ("or", &[AO, R]),
    ("bb", &[B]),
    ("cc", &[K]),
    ("dd", &[D]),
    ("ff", &[F]),
    ("gg", &[G]),
    ("ll", &[L]),
    ("mm", &[M]),
    ("nn", &[N]),
    ("pp", &[P]),
    ("rr", &[R]),
    ("ss", &[S]),
    ("tt", &[T]),
    ("zz", &[Z]),
    ("a", &[AE]),
    ("e", &[EH]),
    ("i", &[IH]),
    ("o", &[AA]),
    ("u", &[AH]),
    ("b", &[B]),
    ("c", &[K]),
    ("d", &[D]),
    ("f", &[F]),
    ("g", &[G]),
    ("h", &[HH]),
    ("j", &[JH]),
    ("k", &[K]),
    ("l", &[L]),
    ("m", &[M]),
    ("n", &[N]),
    ("p", &[P]),
    ("q", &[K]),
    ("r", &[R]),
    ("s", &[S]),
    ("t", &[T]),
    ("v", &[V]),
    ("w", &[W]),
    ("x", &[K, S]),
    ("z", &[Z]),
];

fn is_vowel_letter(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn long_vowel(c: char) -> Arpabet {
    match c {
        'a' => EY,
        'e' => IY,
        'i' => AY,
        'o' => OW,
        _ => UW,
    }
}

fn estimate_part(part: &str) -> Vec<Arpabet> {
    let mut letters: Vec<char> = part
        .to_lowercase()
        .chars()
        .filter(|c| c.is_ascii_lowercase())
        .collect();
    let mut long_at = None;
    let n = letters.len();
    if n >= 3 && letters[n - 1] == 'e' {
        let c = letters[n - 2];
        let v = letters[n - 3];
        let consonant = !is_vowel_letter(c) && c != 'y' && c != 'w';
        let magic = consonant && is_vowel_letter(v) && (n == 3 || !is_vowel_letter(letters[n - 4]));
        if magic || (consonant && letters[..n - 2].iter().any(|&l| is_vowel_letter(l))) {
            if magic {
                long_at = Some(n - 3);
            }
            letters.pop();
            // the silent e still softens the consonant before it
            match letters[n - 2] {
                'c' => letters[n - 2] = 's',
                'g' if letters.get(n.wrapping_sub(3)) != Some(&'d') => letters[n - 2] = 'j',
                _ => {}
            }
        }
    }

    let only_y = !letters.iter().any(|&c| is_vowel_letter(c));
    let mut out = Vec::new();
    let mut i = 0;
    while i < letters.len() {
        let c = letters[i];
        let next = letters.get(i + 1).copied();
        let is_last = i + 1 == letters.len();
        if long_at == Some(i) {
            out.push(long_vowel(c));
            i += 1;
            continue;
        }
        let special: Option<&[Arpabet]> = match c {
            'y' if i == 0 || next.is_some_and(is_vowel_letter) => Some(&[Y]),
            'y' if only_y => Some(&[AY]),
            'y' => Some(&[IY]),
            'a' if is_last => Some(&[AH]),
            'o' if is_last => Some(&[OW]),
            'e' if is_last => Some(&[IY]),
            'c' if matches!(next, Some('e' | 'i' | 'y')) => Some(&[S]),
            'h' if i > 0 && is_vowel_letter(letters[i - 1]) && !next.is_some_and(is_vowel_letter) => {
                Some(&[])
            }
            _ => None,
        };
        if let Some(ph) = special {
            out.extend_from_slice(ph);
            i += 1;
            continue;
        }
        let rest: String = letters[i..].iter().collect();
        let (g, ph) = REWRITE_TABLE
            .iter()
            .filter(|(g, _)| rest.starts_with(g))
            .max_by_key(|(g, _)| g.len())
            .expect("every ascii letter has a single-letter rule");
        out.extend_from_slice(ph);
        i += g.len();
    }
    out
}

/// Deterministic pronunciation estimate for a token missing from every
/// dictionary. Always returns at least one vowel.
pub fn estimate_phonemes(token: &str) -> PhonemeSequence {
    let bases: Vec<Arpabet> = token
        .split('-')
        .flat_map(estimate_part)
        .collect();
    let mut phones: Vec<Phone> = Vec::with_capacity(bases.len() + 1);
    let mut stressed = false;
    for b in bases {
        if b.is_vowel() {
            let stress = if stressed { 0 } else { 1 };
            stressed = true;
            phones.push(Phone::vowel(b, stress).expect("vowel"));
        } else {
            phones.push(Phone::consonant(b).expect("consonant"));
        }
    }
    if !stressed {
        let at = phones.len().min(1);
        phones.insert(at, Phone::vowel(AH, 0).expect("vowel"));
    }
    PhonemeSequence::new(phones)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonetics::syllable_count;
    use proptest::prelude::*;

    fn est(s: &str) -> String {
        estimate_phonemes(s).to_string()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(est("bling"), "B L IH1 NG");
        assert_eq!(est("a"), "AH1");
        assert_eq!(est("hmm"), "HH AH0 M");
    }

    #[test]
    fn positional_rules() {
        assert_eq!(est("ride"), "R AY1 D");
        assert_eq!(est("fly"), "F L AY1");
        assert_eq!(est("shorty"), "SH AO1 R T IY0");
        assert_eq!(est("yeah"), "Y IY1");
        assert_eq!(est("yo"), "Y OW1");
        assert_eq!(est("ice"), "AY1 S");
        assert_eq!(est("b"), "B AH0");
        assert_eq!(est("50"), "AH0");
    }

    #[test]
    fn hyphenated_concatenates() {
        assert_eq!(est("bling-bling"), "B L IH1 NG B L IH0 NG");
    }

    proptest! {
        #[test]
        fn output_is_well_formed(token in "[a-zA-Z'\\-0-9]{1,16}") {
            let seq = estimate_phonemes(&token);
            prop_assert!(syllable_count(&seq) >= 1);
            for p in seq.phones() {
                prop_assert_eq!(p.is_vowel(), p.base().is_vowel());
            }
            let reparsed: PhonemeSequence = seq.to_string().parse().unwrap();
            prop_assert_eq!(reparsed, seq);
        }
    }
}
