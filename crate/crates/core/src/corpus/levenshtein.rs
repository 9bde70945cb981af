/// Edit distance between two strings, counted in Unicode scalar values.
///
/// Two-row Wagner-Fischer; equal to the recursive definition (insert, delete,
/// substitute, each cost 1).
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub(crate) fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    // keep the shorter string in the row
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut cur = vec![0; short.len() + 1];
    for (i, lc) in long.iter().enumerate() {
        cur[0] = i + 1;
        for (j, sc) in short.iter().enumerate() {
            cur[j + 1] = if lc == sc {
                prev[j]
            } else {
                1 + prev[j].min(prev[j + 1]).min(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

/// `levenshtein(a, b) / max(|a|, |b|)`, 0 for two empty strings.
pub fn normalized_distance(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    normalized_chars(&a, &b)
}

pub(crate) fn normalized_chars(a: &[char], b: &[char]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    levenshtein_chars(a, b) as f64 / longest as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct transcription of the recursive definition; exponential, test-only.
    fn lev_recursive(a: &[char], b: &[char]) -> usize {
        if b.is_empty() {
            return a.len();
        }
        if a.is_empty() {
            return b.len();
        }
        if a[0] == b[0] {
            return lev_recursive(&a[1..], &b[1..]);
        }
        1 + lev_recursive(&a[1..], b)
            .min(lev_recursive(a, &b[1..]))
            .min(lev_recursive(&a[1..], &b[1..]))
    }

    #[test]
    fn base_cases() {
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("", ""), 0);
    }

    #[test]
    fn kitten_sitting() {
        let a: Vec<char> = "kitten".chars().collect();
        let b: Vec<char> = "sitting".chars().collect();
        assert_eq!(lev_recursive(&a, &b), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
    }

    #[test]
    fn persian_identity_and_scalar_units() {
        assert_eq!(levenshtein("سلام", "سلام"), 0);
        // one scalar substitution even though each letter is two UTF-8 bytes
        assert_eq!(levenshtein("سلام", "سلاب"), 1);
    }

    #[test]
    fn exhaustive_short_strings_match_recursion() {
        // every pair over {a,b} up to length 4
        let mut words = vec![String::new()];
        let mut frontier = vec![String::new()];
        for _ in 0..4 {
            let mut next = Vec::new();
            for w in &frontier {
                for c in ['a', 'b'] {
                    next.push(format!("{w}{c}"));
                }
            }
            words.extend(next.iter().cloned());
            frontier = next;
        }
        for x in &words {
            for y in &words {
                let xc: Vec<char> = x.chars().collect();
                let yc: Vec<char> = y.chars().collect();
                assert_eq!(levenshtein(x, y), lev_recursive(&xc, &yc), "{x:?} {y:?}");
            }
        }
    }

    #[test]
    fn normalized_examples() {
        assert!((normalized_distance("Movie One", "MovieOne ") - 2.0 / 9.0).abs() < 1e-12);
        assert_eq!(normalized_distance("", ""), 0.0);
    }

    proptest! {
        #[test]
        fn metric_axioms(a in "\\PC{0,12}", b in "\\PC{0,12}", c in "\\PC{0,12}") {
            let ab = levenshtein(&a, &b);
            prop_assert_eq!(ab, levenshtein(&b, &a));
            prop_assert_eq!(levenshtein(&a, &a), 0);
            prop_assert!(ab <= a.chars().count().max(b.chars().count()));
            prop_assert!(levenshtein(&a, &c) <= ab + levenshtein(&b, &c));
        }
    }
}
