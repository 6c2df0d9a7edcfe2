//! Strictly increasing multi-indices over {0..n-1}.
//!
//! Coefficients of a k-form are stored against the lexicographically ordered
//! list of strictly increasing k-tuples. The ordering is fixed so coefficient
//! vectors are comparable across runs.

/// Binomial coefficient, exact for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All strictly increasing k-tuples over {0..n-1} in lexicographic order.
pub fn multi_indices(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

/// Position of an increasing tuple in the lexicographic enumeration.
pub fn rank_of(n: usize, index: &[usize]) -> usize {
    debug_assert!(index.windows(2).all(|w| w[0] < w[1]));
    let k = index.len();
    let mut rank = 0;
    let mut prev = 0;
    for (pos, &idx) in index.iter().enumerate() {
        for smaller in prev..idx {
            rank += binomial(n - smaller - 1, k - pos - 1);
        }
        prev = idx + 1;
    }
    rank
}

/// Sorts `indices`, returning `None` when a value repeats and otherwise the
/// parity sign (+1/-1) of the sorting permutation.
pub fn sort_with_sign(indices: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    // insertion sort keeps the swap count exact
    for i in 1..indices.len() {
        let mut j = i;
        while j > 0 && indices[j - 1] > indices[j] {
            indices.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if indices.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// Parity sign of merging the disjoint increasing tuples `left` and `right`
/// into one increasing tuple (the shuffle sign of the wedge product).
pub fn shuffle_sign(left: &[usize], right: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for &l in left {
        for &r in right {
            if r < l {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Enumerates the splits of the increasing tuple `merged` into a pair of
/// increasing tuples of sizes (k, merged.len()-k), with the shuffle sign.
pub fn splits(merged: &[usize], k: usize) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    let picks = multi_indices(merged.len(), k);
    picks
        .into_iter()
        .map(|pick| {
            let mut left = Vec::with_capacity(k);
            let mut right = Vec::with_capacity(merged.len() - k);
            let mut pick_it = pick.iter().peekable();
            for (pos, &value) in merged.iter().enumerate() {
                if pick_it.peek() == Some(&&pos) {
                    left.push(value);
                    pick_it.next();
                } else {
                    right.push(value);
                }
            }
            let sign = shuffle_sign(&left, &right);
            (left, right, sign)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(5, 5), 1);
        assert_eq!(binomial(4, 3), 4);
        assert_eq!(binomial(3, 4), 0);
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let idx = multi_indices(4, 2);
        assert_eq!(
            idx,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        for (r, i) in idx.iter().enumerate() {
            assert_eq!(rank_of(4, i), r);
        }
    }

    #[test]
    fn rank_round_trips_in_dim_five() {
        for k in 0..=5 {
            for (r, idx) in multi_indices(5, k).iter().enumerate() {
                assert_eq!(rank_of(5, idx), r);
            }
        }
    }

    #[test]
    fn sorting_sign_counts_swaps() {
        let mut v = vec![2, 0, 1];
        assert_eq!(sort_with_sign(&mut v), Some(1.0));
        assert_eq!(v, vec![0, 1, 2]);

        let mut w = vec![1, 0];
        assert_eq!(sort_with_sign(&mut w), Some(-1.0));

        let mut d = vec![1, 1];
        assert_eq!(sort_with_sign(&mut d), None);
    }

    #[test]
    fn shuffle_signs_match_merge_parity() {
        assert_eq!(shuffle_sign(&[0], &[1]), 1.0);
        assert_eq!(shuffle_sign(&[1], &[0]), -1.0);
        // (1,0), (3,0), (3,2): three inversions
        assert_eq!(shuffle_sign(&[1, 3], &[0, 2]), -1.0);
    }

    #[test]
    fn split_signs_reassemble_the_determinant_identity() {
        // sum over splits of sign * 1 equals the signed count identity:
        // wedge of dx_I and dx_J recovers each merged index exactly once.
        for (left, right, sign) in splits(&[0, 1, 2], 1) {
            let mut merged: Vec<usize> = left.iter().chain(right.iter()).copied().collect();
            let s = sort_with_sign(&mut merged).unwrap();
            assert_eq!(s, sign);
        }
    }
}
