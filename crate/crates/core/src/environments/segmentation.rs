//! Least-squares piecewise-constant fit by dynamic programming.

use crate::error::{Error, Result};

/// Piecewise-constant fit with a fixed number of segments.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentFit {
    /// Segment ends: segment `s` covers elements `breakpoints[s-1]..breakpoints[s]`
    /// (0-based, half-open), so `breakpoints[s]` counts the elements up to and
    /// including segment `s`. The last segment's end (`n`) is omitted.
    pub breakpoints: Vec<usize>,
    pub levels: Vec<f64>,
    pub sse: f64,
}

/// Minimum-SSE fit with exactly `segment_count` contiguous segments.
pub fn fit_piecewise_constant(series: &[f64], segment_count: usize) -> Result<SegmentFit> {
    let n = series.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if segment_count == 0 || segment_count > n {
        return Err(Error::InvalidParameter(format!("segment count {segment_count} must lie in 1..={n}")));
    }
    let mut s1 = vec![0.0; n + 1];
    let mut s2 = vec![0.0; n + 1];
    for (i, &x) in series.iter().enumerate() {
        s1[i + 1] = s1[i] + x;
        s2[i + 1] = s2[i] + x * x;
    }
    let cost = |a: usize, b: usize| {
        let len = (b - a) as f64;
        let s = s1[b] - s1[a];
        (s2[b] - s2[a] - s * s / len).max(0.0)
    };
    // best[s][b]: minimum cost of splitting series[..b] into s + 1 segments
    let mut best = vec![vec![f64::INFINITY; n + 1]; segment_count];
    let mut arg = vec![vec![0usize; n + 1]; segment_count];
    for b in 1..=n {
        best[0][b] = cost(0, b);
    }
    for s in 1..segment_count {
        for b in (s + 1)..=n {
            let mut val = f64::INFINITY;
            let mut at = s;
            for a in s..b {
                let c = best[s - 1][a] + cost(a, b);
                if c < val {
                    val = c;
                    at = a;
                }
            }
            best[s][b] = val;
            arg[s][b] = at;
        }
    }
    let mut ends = vec![n];
    let mut b = n;
    for s in (1..segment_count).rev() {
        b = arg[s][b];
        ends.push(b);
    }
    ends.reverse();
    let mut levels = Vec::with_capacity(segment_count);
    let mut start = 0;
    for &e in &ends {
        levels.push((s1[e] - s1[start]) / (e - start) as f64);
        start = e;
    }
    let sse = best[segment_count - 1][n];
    ends.pop();
    Ok(SegmentFit { breakpoints: ends, levels, sse })
}
