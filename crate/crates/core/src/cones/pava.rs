//! Pool-adjacent-violators projection onto the monotone cone
//! `{x : x_1 <= x_2 <= ... <= x_d}`.

/// Euclidean projection of `x` onto the nondecreasing cone.
///
/// Pooled blocks take the exact arithmetic mean of their members. Runs in
/// O(d) amortized time.
pub fn project_monotone_pava(x: &[f64]) -> Vec<f64> {
    // (sum, count) per block; merged while the block means decrease.
    let mut sums: Vec<f64> = Vec::with_capacity(x.len());
    let mut counts: Vec<usize> = Vec::with_capacity(x.len());
    for &v in x {
        let mut sum = v;
        let mut count = 1usize;
        while let (Some(&ps), Some(&pc)) = (sums.last(), counts.last()) {
            // ps / pc > sum / count without dividing
            if ps * count as f64 > sum * pc as f64 {
                sum += ps;
                count += pc;
                sums.pop();
                counts.pop();
            } else {
                break;
            }
        }
        sums.push(sum);
        counts.push(count);
    }
    let mut out = Vec::with_capacity(x.len());
    for (s, c) in sums.into_iter().zip(counts) {
        let m = s / c as f64;
        out.extend(std::iter::repeat_n(m, c));
    }
    out
}

/// Block lengths of the constant pieces of `x` (exact equality).
pub fn constant_pieces(x: &[f64]) -> Vec<usize> {
    let mut pieces = Vec::new();
    let mut run = 0usize;
    for (i, v) in x.iter().enumerate() {
        if i > 0 && *v != x[i - 1] {
            pieces.push(run);
            run = 0;
        }
        run += 1;
    }
    if run > 0 {
        pieces.push(run);
    }
    pieces
}
