use super::{check_finite, Encoding, Mode};
use crate::error::{Error, Result};
use std::cmp::Ordering;

/// Larger value first, then smaller index.
pub(crate) fn rank_order(theta: &[f64], a: usize, b: usize) -> Ordering {
    theta[b].total_cmp(&theta[a]).then(a.cmp(&b))
}

/// MAP configuration `argmax_z <z, theta>`: the top-`k` entries, ranked by value.
///
/// Runs a linear-time selection followed by a sort of the `k` winners. Ties go
/// to the smaller index.
pub fn map_solve(theta: &[f64], k: usize, mode: Mode) -> Result<Encoding> {
    let n = theta.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    check_finite(theta, "theta")?;
    let mut idx: Vec<usize> = (0..n).collect();
    if k < n {
        idx.select_nth_unstable_by(k - 1, |&a, &b| rank_order(theta, a, b));
    }
    let top = &mut idx[..k];
    top.sort_unstable_by(|&a, &b| rank_order(theta, a, b));
    Ok(Encoding::from_ranking(n, top, mode))
}
