use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Kendall's tau-b with tie correction, via Knight's O(n log n) merge sort.
///
/// Returns [`Error::Undefined`] when either vector is constant or contains NaN.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "rank vectors differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "kendall tau needs at least 2 nodes".into(),
        ));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::Undefined("NaN score in rank vector".into()));
    }

    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));

    let tie_pairs = |runs: &mut dyn Iterator<Item = bool>| -> u64 {
        // `runs` yields whether element i equals element i-1
        let mut total = 0u64;
        let mut run = 1u64;
        for same in runs {
            if same {
                run += 1;
            } else {
                total += run * (run - 1) / 2;
                run = 1;
            }
        }
        total + run * (run - 1) / 2
    };

    let ties_a = tie_pairs(&mut pairs.windows(2).map(|w| w[0].0 == w[1].0));
    let ties_joint = tie_pairs(&mut pairs.windows(2).map(|w| w[0] == w[1]));

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let swaps = merge_count(&mut ys);
    let ties_b = tie_pairs(&mut ys.windows(2).map(|w| w[0] == w[1]));

    let total = (n as u64) * (n as u64 - 1) / 2;
    let c_minus_d = total as i64 - ties_a as i64 - ties_b as i64 + ties_joint as i64 - 2 * swaps as i64;
    let denom = ((total - ties_a) as f64) * ((total - ties_b) as f64);
    if denom == 0.0 {
        return Err(Error::Undefined("constant rank vector".into()));
    }
    Ok(c_minus_d as f64 / denom.sqrt())
}

/// Stable merge sort returning the number of strict inversions.
fn merge_count(v: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid]) + merge_count(&mut v[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j].total_cmp(&v[i]) == Ordering::Less {
            swaps += (mid - i) as u64;
            merged.push(v[j]);
            j += 1;
        } else {
            merged.push(v[i]);
            i += 1;
        }
    }
    merged.extend_from_slice(&v[i..mid]);
    merged.extend_from_slice(&v[j..n]);
    v.copy_from_slice(&merged);
    swaps
}

/// `|A ∩ B| / |A ∪ B|`; undefined when both sets are empty.
pub fn jaccard_edge_similarity<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Result<f64> {
    if a.is_empty() && b.is_empty() {
        return Err(Error::Undefined("jaccard similarity of two empty sets".into()));
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    Ok(inter as f64 / union as f64)
}
