//! Vector fitness: line deletions, line additions and stylesheet length,
//! minimized lexicographically in that order.

use std::cmp::Ordering;
use std::fmt;

use crate::xml::Document;
use crate::xslt::{transform_lines, Stylesheet, TransformLimits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FitnessVector {
    pub deletions: usize,
    pub additions: usize,
    pub length: usize,
}

impl FitnessVector {
    /// Assigned to stylesheets whose transform overflows; every real vector
    /// compares better.
    pub const WORST: FitnessVector = FitnessVector {
        deletions: usize::MAX,
        additions: usize::MAX,
        length: usize::MAX,
    };

    pub fn new(deletions: usize, additions: usize, length: usize) -> Self {
        Self {
            deletions,
            additions,
            length,
        }
    }

    pub fn is_solution(&self) -> bool {
        self.deletions == 0 && self.additions == 0
    }

    pub fn is_worst(&self) -> bool {
        *self == Self::WORST
    }
}

impl fmt::Display for FitnessVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "deletions={} additions={} length={}",
            self.deletions, self.additions, self.length
        )
    }
}

/// Lexicographic order on (deletions, additions, length); `Less` means `a`
/// is better.
pub fn compare(a: &FitnessVector, b: &FitnessVector) -> Ordering {
    a.cmp(b)
}

/// Line deletions and additions turning `obtained` into `target`, from the
/// length of their longest common subsequence.
pub fn line_diff<A: AsRef<str>, B: AsRef<str>>(obtained: &[A], target: &[B]) -> (usize, usize) {
    let lcs = lcs_len(obtained, target);
    (obtained.len() - lcs, target.len() - lcs)
}

fn lcs_len<A: AsRef<str>, B: AsRef<str>>(a: &[A], b: &[B]) -> usize {
    let prefix = a.iter().zip(b).take_while(|(x, y)| x.as_ref() == y.as_ref()).count();
    let (a, b) = (&a[prefix..], &b[prefix..]);
    let suffix = a
        .iter()
        .rev()
        .zip(b.iter().rev())
        .take_while(|(x, y)| x.as_ref() == y.as_ref())
        .count();
    let (a, b) = (&a[..a.len() - suffix], &b[..b.len() - suffix]);
    if a.is_empty() || b.is_empty() {
        return prefix + suffix;
    }

    let mut prev = vec![0u32; b.len() + 1];
    let mut cur = vec![0u32; b.len() + 1];
    for x in a {
        let x = x.as_ref();
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y.as_ref() {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prefix + suffix + prev[b.len()] as usize
}

/// Applies `sheet` and scores its canonical output lines against `target`.
/// Overflowing transforms score `FitnessVector::WORST`.
pub fn evaluate<S: AsRef<str>>(
    sheet: &Stylesheet,
    input: &Document,
    target: &[S],
    limits: TransformLimits,
) -> FitnessVector {
    match transform_lines(sheet, input, limits) {
        Ok(lines) => {
            let (deletions, additions) = line_diff(&lines, target);
            FitnessVector::new(deletions, additions, sheet.size())
        }
        Err(_) => FitnessVector::WORST,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_lists() {
        assert_eq!(line_diff(&["A", "B"], &["A", "B"]), (0, 0));
    }

    #[test]
    fn one_substitution() {
        assert_eq!(line_diff(&["a", "c", "d"], &["a", "b", "c"]), (1, 1));
    }

    #[test]
    fn empty_obtained() {
        let empty: [&str; 0] = [];
        assert_eq!(line_diff(&empty, &["x", "y", "z"]), (0, 3));
    }

    #[test]
    fn duplicates_count() {
        assert_eq!(line_diff(&["a", "a", "a"], &["a"]), (2, 0));
        assert_eq!(line_diff(&["b", "a"], &["a", "b"]), (1, 1));
    }

    #[test]
    fn lexicographic_order() {
        let a = FitnessVector::new(0, 2, 50);
        let b = FitnessVector::new(1, 0, 10);
        assert_eq!(compare(&a, &b), Ordering::Less);
        let a = FitnessVector::new(1, 1, 10);
        let b = FitnessVector::new(1, 1, 12);
        assert_eq!(compare(&a, &b), Ordering::Less);
        let a = FitnessVector::new(0, 0, 5);
        assert_eq!(compare(&a, &a), Ordering::Equal);
        assert!(FitnessVector::new(10_000, 10_000, 10_000) < FitnessVector::WORST);
    }

    proptest! {
        #[test]
        fn diff_of_self_is_zero(xs in proptest::collection::vec("[abc]{0,2}", 0..20)) {
            prop_assert_eq!(line_diff(&xs, &xs), (0, 0));
        }

        #[test]
        fn diff_bounded(
            xs in proptest::collection::vec("[abc]", 0..15),
            ys in proptest::collection::vec("[abc]", 0..15),
        ) {
            let (d, a) = line_diff(&xs, &ys);
            prop_assert!(d <= xs.len());
            prop_assert!(a <= ys.len());
            prop_assert_eq!(xs.len() - d, ys.len() - a);
        }

        #[test]
        fn compare_is_total_order(
            a in (0usize..4, 0usize..4, 0usize..4),
            b in (0usize..4, 0usize..4, 0usize..4),
            c in (0usize..4, 0usize..4, 0usize..4),
        ) {
            let (a, b, c) = (
                FitnessVector::new(a.0, a.1, a.2),
                FitnessVector::new(b.0, b.1, b.2),
                FitnessVector::new(c.0, c.1, c.2),
            );
            prop_assert_eq!(compare(&a, &b), compare(&b, &a).reverse());
            if compare(&a, &b) != Ordering::Greater && compare(&b, &c) != Ordering::Greater {
                prop_assert_ne!(compare(&a, &c), Ordering::Greater);
            }
            if compare(&a, &b) == Ordering::Equal {
                prop_assert_eq!(a, b);
            }
        }
    }
}
