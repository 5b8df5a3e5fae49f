//! Small vector helpers shared across modules.

/// One-hot vector of the given dimension with a 1 at `index`.
///
/// Panics if `index >= dim`.
pub fn one_hot(dim: usize, index: usize) -> Vec<f64> {
    assert!(
        index < dim,
        "one_hot index {index} out of range for dim {dim}"
    );
    let mut v = vec![0.0; dim];
    v[index] = 1.0;
    v
}

/// True iff `v` has exactly one component equal to 1.0 and the rest exactly 0.0.
pub fn is_one_hot(v: &[f64]) -> bool {
    let mut ones = 0usize;
    for &x in v {
        if x == 1.0 {
            ones += 1;
        } else if x != 0.0 {
            return false;
        }
    }
    ones == 1
}

/// Sup-norm distance between two equal-length vectors.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Sup norm of a single vector.
pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Index of the largest component (first one on ties).
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_basics() {
        assert_eq!(one_hot(3, 1), vec![0.0, 1.0, 0.0]);
        assert!(is_one_hot(&one_hot(5, 4)));
        assert!(!is_one_hot(&[0.0, 0.0]));
        assert!(!is_one_hot(&[1.0, 1.0]));
        assert!(!is_one_hot(&[0.5, 0.5]));
    }

    #[test]
    fn argmax_ties_pick_first() {
        assert_eq!(argmax(&[0.3, 0.7, 0.7]), 1);
    }
}
