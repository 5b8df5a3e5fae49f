//! The stack-free special case: deterministic finite automata as one-hot
//! vectors driven by a rank-3 binary transition tensor.

use ndarray::Array3;

use crate::util::is_one_hot;

/// Symbolic DFA over index spaces: `n` states, `m` input characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfaSpec {
    pub state_count: usize,
    pub alphabet_size: usize,
    pub start_state: usize,
    pub accept_states: Vec<usize>,
    /// `transitions[state][input]` = next state. Row-major, total by
    /// construction.
    pub transitions: Vec<Vec<usize>>,
}

impl DfaSpec {
    /// Builds the transition tensor `W[i, j, k] = 1` iff reading character
    /// `k` in state `j` moves to state `i`. Every (j, k) column is one-hot.
    pub fn transition_tensor(&self) -> Array3<f64> {
        let mut w = Array3::zeros((self.state_count, self.state_count, self.alphabet_size));
        for (j, row) in self.transitions.iter().enumerate() {
            for (k, &i) in row.iter().enumerate() {
                w[[i, j, k]] = 1.0;
            }
        }
        w
    }
}

/// One vectorized DFA step: `Q'_i = sum_{j,k} W[i,j,k] I_k Q_j`, summed in
/// ascending (k, j) order. For a valid tensor and one-hot inputs the result
/// is exactly one-hot.
pub fn step_dfa_vectorized(w: &Array3<f64>, q_bar: &[f64], input: &[f64]) -> Vec<f64> {
    let (n_out, n_in, m) = w.dim();
    assert_eq!(q_bar.len(), n_in, "state vector dimension mismatch");
    assert_eq!(input.len(), m, "input vector dimension mismatch");
    let mut next = vec![0.0; n_out];
    for (i, slot) in next.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &ik) in input.iter().enumerate() {
            for (j, &qj) in q_bar.iter().enumerate() {
                acc += w[[i, j, k]] * ik * qj;
            }
        }
        *slot = acc;
    }
    debug_assert!(is_one_hot(&next) || !is_one_hot(q_bar) || !is_one_hot(input));
    next
}
