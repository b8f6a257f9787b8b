use std::collections::{BTreeSet, HashSet};

use super::PatternError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequentItemset<T> {
    /// Items in ascending order.
    pub items: Vec<T>,
    pub count: usize,
}

/// Smallest transaction count meeting `fraction` of `n`, rounded up.
pub fn min_support_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64 - 1e-9).ceil() as usize).max(1)
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Level-wise Apriori. Candidates of size `k` join two frequent `(k−1)`-sets
/// sharing their first `k−2` items and survive only if every `(k−1)`-subset
/// is frequent; supports are exact counts over transaction bitsets.
///
/// Output is ordered by size, then by item sequence.
pub fn apriori<T: Ord + Clone>(
    transactions: &[BTreeSet<T>],
    min_support_fraction: f64,
) -> Result<Vec<FrequentItemset<T>>, PatternError> {
    if !(min_support_fraction > 0.0 && min_support_fraction <= 1.0) {
        return Err(PatternError::Argument(format!(
            "minimum support must be in (0, 1], got {min_support_fraction}"
        )));
    }
    if transactions.is_empty() {
        return Err(PatternError::Argument("no transactions to mine".into()));
    }
    let n = transactions.len();
    let min_count = min_support_count(min_support_fraction, n);

    let universe: Vec<T> = transactions
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<T>>()
        .into_iter()
        .collect();
    let mut item_bits = vec![Bits::new(n); universe.len()];
    for (t, tx) in transactions.iter().enumerate() {
        for item in tx {
            let idx = universe
                .binary_search(item)
                .expect("item is in the universe");
            item_bits[idx].set(t);
        }
    }

    let mut level: Vec<(Vec<usize>, Bits)> = item_bits
        .iter()
        .enumerate()
        .filter(|(_, b)| b.count() >= min_count)
        .map(|(i, b)| (vec![i], b.clone()))
        .collect();
    let mut out = Vec::new();
    while !level.is_empty() {
        out.extend(level.iter().map(|(set, bits)| FrequentItemset {
            items: set.iter().map(|&i| universe[i].clone()).collect(),
            count: bits.count(),
        }));
        let known: HashSet<&[usize]> = level.iter().map(|(s, _)| s.as_slice()).collect();
        let mut next = Vec::new();
        for (a, (set_a, bits_a)) in level.iter().enumerate() {
            let prefix = &set_a[..set_a.len() - 1];
            for (set_b, _) in &level[a + 1..] {
                if &set_b[..set_b.len() - 1] != prefix {
                    break;
                }
                let mut candidate = set_a.clone();
                candidate.push(*set_b.last().expect("non-empty"));
                let all_subsets_frequent = (0..candidate.len()).all(|skip| {
                    let subset: Vec<usize> = candidate
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != skip)
                        .map(|(_, v)| *v)
                        .collect();
                    known.contains(subset.as_slice())
                });
                if !all_subsets_frequent {
                    continue;
                }
                let bits = bits_a.and(&item_bits[*candidate.last().expect("non-empty")]);
                if bits.count() >= min_count {
                    next.push((candidate, bits));
                }
            }
        }
        level = next;
    }
    Ok(out)
}

/// Keeps the itemsets of the largest and second-largest size present.
pub fn prune_retained<T: Clone>(itemsets: &[FrequentItemset<T>]) -> Vec<FrequentItemset<T>> {
    let Some(longest) = itemsets.iter().map(|s| s.items.len()).max() else {
        return Vec::new();
    };
    itemsets
        .iter()
        .filter(|s| s.items.len() + 1 >= longest)
        .cloned()
        .collect()
}
