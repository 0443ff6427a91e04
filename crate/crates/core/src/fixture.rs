//! Deterministic synthetic corpus used by tests and the bundled fixture files.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Label, LabeledExample};

const USEFUL_WORDS: &[&str] = &[
    "returns",
    "allocates",
    "buffer",
    "length",
    "pointer",
    "initializes",
    "frees",
    "memory",
    "index",
    "bounds",
    "validates",
    "parses",
    "header",
    "checksum",
    "socket",
    "descriptor",
    "caller",
    "ownership",
    "terminated",
    "overflow",
    "array",
    "entries",
    "callback",
    "mutex",
    "locks",
    "releases",
    "configuration",
    "computes",
    "offset",
    "table",
];

const NOT_USEFUL_WORDS: &[&str] = &[
    "increment",
    "todo",
    "fixme",
    "hack",
    "temporary",
    "loop",
    "again",
    "stuff",
    "later",
    "end",
    "here",
    "done",
    "ok",
    "nothing",
    "old",
    "removed",
    "debug",
    "print",
    "test",
    "junk",
    "dummy",
    "foo",
    "bar",
    "misc",
    "whatever",
    "copied",
    "unused",
    "maybe",
    "weird",
    "cleanup",
];

const SHARED_WORDS: &[&str] = &["the", "this", "of", "for", "and", "to", "in", "is", "it", "we"];

const CODE_SNIPPETS: &[&str] = &[
    "int len = strlen(buf);",
    "p = malloc(sizeof(*p));",
    "free(node);",
    "for (i = 0; i < n; i++) {",
    "if (fd < 0) return -1;",
    "i++;",
    "return count;",
    "memcpy(dst, src, n);",
    "pthread_mutex_lock(&lock);",
    "printf(\"%d\\n\", x);",
    "sum += a[i];",
    "while (*s) s++;",
];

/// Builds `n` examples, half of each class, in shuffled order.
///
/// With `separable` set, every comment draws its content words only from its
/// own class's pool. Otherwise each content word is drawn from the opposite
/// pool with probability 0.15.
pub fn synthetic_corpus(n: usize, seed: u64, separable: bool) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<Label> = (0..n)
        .map(|i| if i < n / 2 { Label::Useful } else { Label::NotUseful })
        .collect();
    labels.shuffle(&mut rng);
    let examples = labels
        .into_iter()
        .enumerate()
        .map(|(id, label)| {
            let (own, other) = match label {
                Label::Useful => (USEFUL_WORDS, NOT_USEFUL_WORDS),
                Label::NotUseful => (NOT_USEFUL_WORDS, USEFUL_WORDS),
            };
            let mut words: Vec<&str> = Vec::new();
            for _ in 0..rng.gen_range(3..=6) {
                let pool = if !separable && rng.gen_bool(0.15) { other } else { own };
                words.push(pool.choose(&mut rng).unwrap());
            }
            for _ in 0..rng.gen_range(0..=2) {
                words.push(SHARED_WORDS.choose(&mut rng).unwrap());
            }
            words.shuffle(&mut rng);
            let code_lines = rng.gen_range(1..=3);
            let code: Vec<&str> = (0..code_lines)
                .map(|_| *CODE_SNIPPETS.choose(&mut rng).unwrap())
                .collect();
            LabeledExample {
                id,
                comment_text: format!("/* {} */", words.join(" ")),
                code_text: code.join("\n"),
                label: Some(label),
            }
        })
        .collect();
    Corpus::new(examples, true).expect("fixture rows are non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_and_deterministic() {
        let a = synthetic_corpus(200, 5, false);
        assert_eq!(a, synthetic_corpus(200, 5, false));
        let useful = a.labels().unwrap().iter().filter(|&&l| l == Label::Useful).count();
        assert_eq!(useful, 100);
    }

    #[test]
    fn separable_pools_do_not_mix() {
        let c = synthetic_corpus(100, 9, true);
        for ex in c.examples() {
            let forbidden = match ex.label.unwrap() {
                Label::Useful => NOT_USEFUL_WORDS,
                Label::NotUseful => USEFUL_WORDS,
            };
            for w in ex.comment_text.split_whitespace() {
                assert!(!forbidden.contains(&w), "{w} in {}", ex.comment_text);
            }
        }
    }
}
