use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::model::Score;

/// Fewest training samples accepted is one more than this.
pub const MIN_SAMPLES_EXCLUSIVE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    /// The first sample scored lower than the second.
    Pos,
    Neg,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }
}

/// Soft pairwise ordering constraint between samples `i` and `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub i: usize,
    pub j: usize,
    pub label: Label,
}

impl Constraint {
    /// The same constraint with its endpoints swapped.
    pub fn reversed(self) -> Constraint {
        Constraint { i: self.j, j: self.i, label: self.label.flip() }
    }
}

/// One constraint per unordered pair of samples with distinct scores,
/// `Pos` iff `scores[i] < scores[j]`. Tied pairs are left out.
pub fn derive_constraints(scores: &[Score]) -> Result<Vec<Constraint>, ModelError> {
    if scores.len() > MIN_SAMPLES_EXCLUSIVE {
        if let Some(pos) = scores.iter().position(|s| !s.is_scored()) {
            return Err(ModelError::UnscoredSample { index: pos });
        }
    }
    derive_pairwise(scores)
}

/// [`derive_constraints`] over any totally ordered score scale.
pub fn derive_pairwise<T: Ord>(scores: &[T]) -> Result<Vec<Constraint>, ModelError> {
    let k = scores.len();
    if k <= MIN_SAMPLES_EXCLUSIVE {
        return Err(ModelError::TooFewSamples { got: k });
    }
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let label = match scores[i].cmp(&scores[j]) {
                core::cmp::Ordering::Less => Label::Pos,
                core::cmp::Ordering::Greater => Label::Neg,
                core::cmp::Ordering::Equal => continue,
            };
            out.push(Constraint { i, j, label });
        }
    }
    if out.is_empty() {
        return Err(ModelError::AllTied);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scores(v: &[u8]) -> Vec<Score> {
        v.iter().map(|s| Score::new(*s).unwrap()).collect()
    }

    /// Brute force over all ordered pairs, keeping one orientation.
    fn oracle_count(v: &[u8]) -> usize {
        let mut n = 0;
        for a in 0..v.len() {
            for b in 0..v.len() {
                if a < b && v[a] != v[b] {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn lower_then_higher_is_positive() {
        let c = derive_constraints(&scores(&[2, 4, 1, 1, 1, 1, 1])).unwrap();
        assert_eq!(c[0], Constraint { i: 0, j: 1, label: Label::Pos });
        let c = derive_constraints(&scores(&[4, 2, 5, 5, 5, 5, 5])).unwrap();
        assert_eq!(c[0], Constraint { i: 0, j: 1, label: Label::Neg });
    }

    #[test]
    fn seven_distinct_gives_twenty_one() {
        let c = derive_pairwise(&[10, 20, 30, 40, 50, 60, 70]).unwrap();
        assert_eq!(c.len(), 21);
        let v = [1, 2, 3, 4, 5, 1, 2];
        let c = derive_constraints(&scores(&v)).unwrap();
        assert_eq!(c.len(), oracle_count(&v));
        assert_eq!(c.len(), 21 - 2);
    }

    #[test]
    fn tied_groups() {
        let v = [3, 3, 3, 4, 4, 5, 5, 5];
        let c = derive_constraints(&scores(&v)).unwrap();
        assert_eq!(c.len(), oracle_count(&v));
        assert_eq!(c.len(), 28 - (3 + 1 + 3));
    }

    #[test]
    fn too_few_and_all_tied() {
        assert_eq!(derive_constraints(&scores(&[1, 2, 3, 4, 5, 1])), Err(ModelError::TooFewSamples { got: 6 }));
        assert_eq!(derive_constraints(&scores(&[3; 9])), Err(ModelError::AllTied));
        assert_eq!(derive_constraints(&scores(&[3, 0, 1, 2, 4, 5, 1])), Err(ModelError::UnscoredSample { index: 1 }));
    }

    proptest! {
        #[test]
        fn count_matches_enumeration(v in proptest::collection::vec(1u8..=5, 7..40)) {
            match derive_constraints(&scores(&v)) {
                Ok(c) => {
                    prop_assert_eq!(c.len(), oracle_count(&v));
                    for con in &c {
                        prop_assert!(con.i != con.j);
                        prop_assert_ne!(v[con.i], v[con.j]);
                        prop_assert_eq!(con.label == Label::Pos, v[con.i] < v[con.j]);
                    }
                }
                Err(e) => {
                    prop_assert_eq!(e, ModelError::AllTied);
                    prop_assert_eq!(oracle_count(&v), 0);
                }
            }
        }
    }

    #[test]
    fn reversed_flips_label() {
        let c = Constraint { i: 1, j: 2, label: Label::Pos };
        assert_eq!(c.reversed(), Constraint { i: 2, j: 1, label: Label::Neg });
        assert_eq!(c.reversed().reversed(), c);
    }
}
