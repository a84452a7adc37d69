//! Mann-Whitney U rank test with midrank ties.
//!
//! The statistic is computed from sample A's rank sum over the pooled,
//! midranked data. Small problems (both samples of at most eight values)
//! get an exact two-sided p by enumerating every assignment of pooled
//! ranks to sample A and counting assignments at least as far from the
//! null center as the observed one. Larger problems use the normal
//! approximation with tie correction and continuity correction.

use statrs::function::erf::erfc;

use crate::AssessError;

/// Upper size bound per sample for the exact enumeration path.
const EXACT_LIMIT: usize = 8;

/// Computes `(U_a, p)` for a two-sided test of whether the two samples come
/// from the same distribution. A pooled sample with only one distinct value
/// carries no rank information, so its p-value is 1.
pub fn mann_whitney_u(sample_a: &[f64], sample_b: &[f64]) -> Result<(f64, f64), AssessError> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(AssessError::EmptySample);
    }
    let n = sample_a.len();
    let m = sample_b.len();
    let pooled: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..n].iter().sum();
    let u = rank_sum_a - (n * (n + 1)) as f64 / 2.0;

    let constant = pooled
        .iter()
        .all(|v| v.total_cmp(&pooled[0]) == std::cmp::Ordering::Equal);
    if constant {
        return Ok((u, 1.0));
    }

    let p = if n <= EXACT_LIMIT && m <= EXACT_LIMIT {
        exact_p(&ranks, n, u)
    } else {
        approximate_p(&pooled, n, m, u)
    };
    Ok((u, p.clamp(0.0, 1.0)))
}

/// Average ranks (1-based) with ties sharing their midrank.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len()
            && values[order[j + 1]].total_cmp(&values[order[i]]) == std::cmp::Ordering::Equal
        {
            j += 1;
        }
        let midrank = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = midrank;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided permutation p over all C(n+m, n) rank assignments: the share
/// of assignments whose U lies at least as far from nm/2 as the observed U.
fn exact_p(ranks: &[f64], n: usize, u_observed: f64) -> f64 {
    let total_len = ranks.len();
    let m = total_len - n;
    let center = (n * m) as f64 / 2.0;
    let observed_distance = (u_observed - center).abs();
    let mut total = 0u64;
    let mut hits = 0u64;
    for mask in 0u32..(1 << total_len) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let rank_sum: f64 = (0..total_len)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| ranks[i])
            .sum();
        let u = rank_sum - (n * (n + 1)) as f64 / 2.0;
        total += 1;
        if (u - center).abs() >= observed_distance - 1e-12 {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

/// Normal approximation with tie-corrected variance and a half-unit
/// continuity correction toward the center.
fn approximate_p(pooled: &[f64], n: usize, m: usize, u: f64) -> f64 {
    let total_len = n + m;
    let mut sorted = pooled.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len()
            && sorted[j + 1].total_cmp(&sorted[i]) == std::cmp::Ordering::Equal
        {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_sum += t * t * t - t;
        i = j + 1;
    }

    let nm = (n * m) as f64;
    let variance = nm / 12.0
        * ((total_len + 1) as f64 - tie_sum / ((total_len * (total_len - 1)) as f64));
    if variance <= 0.0 {
        return 1.0;
    }
    let numerator = u - nm / 2.0;
    let continuity = if numerator == 0.0 {
        0.0
    } else {
        0.5 * numerator.signum()
    };
    let z = (numerator - continuity) / variance.sqrt();
    erfc(z.abs() / std::f64::consts::SQRT_2)
}
