//! Classic Porter suffix-stripping stemmer (steps 1a through 5b).
//!
//! Operates on lowercase ASCII words; anything else (digits, mixed tokens,
//! words shorter than three letters) is returned unchanged.

/// True when the letter at `i` acts as a consonant. `y` counts as a vowel
/// only when it follows a consonant.
fn is_consonant(word: &[u8], i: usize) -> bool {
    match word[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(word, i - 1),
        _ => true,
    }
}

/// The measure m: number of vowel-consonant sequences in `[C](VC)^m[V]`.
fn measure(word: &[u8]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..word.len() {
        let vowel = !is_consonant(word, i);
        if !vowel && prev_vowel {
            m += 1;
        }
        prev_vowel = vowel;
    }
    m
}

fn has_vowel(word: &[u8]) -> bool {
    (0..word.len()).any(|i| !is_consonant(word, i))
}

fn ends_double_consonant(word: &[u8]) -> bool {
    let n = word.len();
    n >= 2 && word[n - 1] == word[n - 2] && is_consonant(word, n - 1)
}

/// `*o`: ends consonant-vowel-consonant where the final consonant is not
/// w, x, or y.
fn ends_cvc(word: &[u8]) -> bool {
    let n = word.len();
    n >= 3
        && is_consonant(word, n - 3)
        && !is_consonant(word, n - 2)
        && is_consonant(word, n - 1)
        && !matches!(word[n - 1], b'w' | b'x' | b'y')
}

fn ends_with(word: &[u8], suffix: &[u8]) -> bool {
    word.len() >= suffix.len() && &word[word.len() - suffix.len()..] == suffix
}

/// Longest-match rule table: the first suffix that matches ends the step,
/// and the replacement is applied only when the measure of the remaining
/// stem is at least `min_measure`.
fn apply_rules(word: &mut Vec<u8>, min_measure: usize, rules: &[(&[u8], &[u8])]) {
    for (suffix, replacement) in rules {
        if ends_with(word, suffix) {
            let stem_len = word.len() - suffix.len();
            if measure(&word[..stem_len]) > min_measure {
                word.truncate(stem_len);
                word.extend_from_slice(replacement);
            }
            return;
        }
    }
}

fn step_1a(word: &mut Vec<u8>) {
    if ends_with(word, b"sses") {
        word.truncate(word.len() - 2);
    } else if ends_with(word, b"ies") {
        word.truncate(word.len() - 2);
    } else if ends_with(word, b"ss") {
        // keep
    } else if ends_with(word, b"s") {
        word.truncate(word.len() - 1);
    }
}

fn step_1b(word: &mut Vec<u8>) {
    if ends_with(word, b"eed") {
        if measure(&word[..word.len() - 3]) > 0 {
            word.truncate(word.len() - 1);
        }
        return;
    }
    let removed = if ends_with(word, b"ed") && has_vowel(&word[..word.len() - 2]) {
        word.truncate(word.len() - 2);
        true
    } else if ends_with(word, b"ing") && has_vowel(&word[..word.len() - 3]) {
        word.truncate(word.len() - 3);
        true
    } else {
        false
    };
    if !removed {
        return;
    }
    if ends_with(word, b"at") || ends_with(word, b"bl") || ends_with(word, b"iz") {
        word.push(b'e');
    } else if ends_double_consonant(word) && !matches!(word[word.len() - 1], b'l' | b's' | b'z') {
        word.truncate(word.len() - 1);
    } else if measure(word) == 1 && ends_cvc(word) {
        word.push(b'e');
    }
}

fn step_1c(word: &mut Vec<u8>) {
    if ends_with(word, b"y") && has_vowel(&word[..word.len() - 1]) {
        let n = word.len();
        word[n - 1] = b'i';
    }
}

fn step_2(word: &mut Vec<u8>) {
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
        (b"logi", b"log"),
    ];
    apply_rules(word, 0, RULES);
}

fn step_3(word: &mut Vec<u8>) {
    const RULES: &[(&[u8], &[u8])] = &[
        (b"icate", b"ic"),
        (b"ative", b""),
        (b"alize", b"al"),
        (b"iciti", b"ic"),
        (b"ical", b"ic"),
        (b"ful", b""),
        (b"ness", b""),
    ];
    apply_rules(word, 0, RULES);
}

fn step_4(word: &mut Vec<u8>) {
    const RULES: &[(&[u8], &[u8])] = &[
        (b"al", b""),
        (b"ance", b""),
        (b"ence", b""),
        (b"er", b""),
        (b"ic", b""),
        (b"able", b""),
        (b"ible", b""),
        (b"ant", b""),
        (b"ement", b""),
        (b"ment", b""),
        (b"ent", b""),
        // "ion" handled below: it also needs the stem to end in s or t.
        (b"ou", b""),
        (b"ism", b""),
        (b"ate", b""),
        (b"iti", b""),
        (b"ous", b""),
        (b"ive", b""),
        (b"ize", b""),
    ];
    // Longest-match scan over the full rule list including "ion".
    let mut candidates: Vec<(&[u8], &[u8])> = RULES.to_vec();
    candidates.push((b"ion", b""));
    candidates.sort_by_key(|(s, _)| std::cmp::Reverse(s.len()));
    for (suffix, replacement) in candidates {
        if ends_with(word, suffix) {
            let stem_len = word.len() - suffix.len();
            let stem = &word[..stem_len];
            let extra_ok = if suffix == b"ion" {
                stem_len >= 1 && matches!(word[stem_len - 1], b's' | b't')
            } else {
                true
            };
            if measure(stem) > 1 && extra_ok {
                word.truncate(stem_len);
                word.extend_from_slice(replacement);
            }
            return;
        }
    }
}

fn step_5a(word: &mut Vec<u8>) {
    if ends_with(word, b"e") {
        let stem = &word[..word.len() - 1];
        let m = measure(stem);
        if m > 1 || (m == 1 && !ends_cvc(stem)) {
            word.truncate(word.len() - 1);
        }
    }
}

fn step_5b(word: &mut Vec<u8>) {
    if measure(word) > 1 && ends_double_consonant(word) && word[word.len() - 1] == b'l' {
        word.truncate(word.len() - 1);
    }
}

/// Stem a single lowercase ASCII word.
pub fn stem(word: &str) -> String {
    if word.len() < 3 || !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word.to_string();
    }
    let mut buf = word.as_bytes().to_vec();
    step_1a(&mut buf);
    step_1b(&mut buf);
    step_1c(&mut buf);
    step_2(&mut buf);
    step_3(&mut buf);
    step_4(&mut buf);
    step_5a(&mut buf);
    step_5b(&mut buf);
    String::from_utf8(buf).expect("ascii stays ascii")
}
