//! Idealized vector encodings of the classical machine: exact one-hot state
//! vectors, exact one-hot stacks, the idealized stack operator, and the
//! vectorized transition step. All arithmetic here is over exact 0.0/1.0
//! values, so the idealized orbit is bit-reproducible and decodes back to the
//! symbolic machine without tolerance.

use crate::automata::ClassicalStack;
use crate::encoding::WeightTensors;
use crate::stack::Reading;
use crate::util::{is_one_hot, one_hot, sup_norm};

/// Exact vector encoding of a classical stack: one-hot levels for the live
/// region, exact zero below. Level 0 is the top.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealStack {
    levels: Vec<Vec<f64>>,
    m2: usize,
}

impl IdealStack {
    pub fn empty(m2: usize) -> Self {
        IdealStack {
            levels: Vec::new(),
            m2,
        }
    }

    /// Encodes the given symbols, top first.
    pub fn from_symbols(m2: usize, top_first: &[usize]) -> Self {
        IdealStack {
            levels: top_first.iter().map(|&c| one_hot(m2, c)).collect(),
            m2,
        }
    }

    pub fn from_classical(m2: usize, stack: &ClassicalStack) -> Self {
        IdealStack {
            levels: stack.iter_from_top().map(|c| one_hot(m2, c)).collect(),
            m2,
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.m2
    }

    pub fn size(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, i: usize) -> Option<&[f64]> {
        self.levels.get(i).map(|v| v.as_slice())
    }

    pub fn component(&self, i: usize, j: usize) -> f64 {
        self.levels.get(i).map_or(0.0, |v| v[j])
    }

    /// Decodes back to symbol indices; `None` if any live level is not
    /// exactly one-hot.
    pub fn to_classical(&self) -> Option<ClassicalStack> {
        let mut top_first = Vec::with_capacity(self.levels.len());
        for level in &self.levels {
            if !is_one_hot(level) {
                return None;
            }
            top_first.push(level.iter().position(|&x| x == 1.0).unwrap());
        }
        Some(ClassicalStack::from_top_symbols(&top_first))
    }

    /// Checks the encoding invariant: every live level exactly one-hot.
    pub fn is_valid(&self) -> bool {
        self.levels
            .iter()
            .all(|level| level.len() == self.m2 && is_one_hot(level))
    }
}

/// Applies the idealized operator: exact push, pop, or identity depending on
/// the gate pair, which must be one of (1,0), (0,1), (0,0). A push requires a
/// one-hot candidate vector; the candidate is ignored otherwise.
///
/// The levels are evolved through the defining linear relations (candidate in
/// the slot above the top, zero vectors below the live region) and the result
/// is re-trimmed to its live region, so pop on empty is the identity.
pub fn ideal_apply(stack: &IdealStack, p_plus: f64, p_minus: f64, candidate: &[f64]) -> IdealStack {
    assert!(
        (p_plus == 1.0 && p_minus == 0.0)
            || (p_plus == 0.0 && p_minus == 1.0)
            || (p_plus == 0.0 && p_minus == 0.0),
        "idealized gates must be (1,0), (0,1) or (0,0); got ({p_plus}, {p_minus})"
    );
    let m2 = stack.m2;
    assert_eq!(candidate.len(), m2, "candidate dimension mismatch");
    if p_plus == 1.0 {
        assert!(
            is_one_hot(candidate),
            "idealized push requires a one-hot candidate"
        );
    }
    let s = stack.size();
    let stay = 1.0 - p_plus - p_minus;
    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(s + 1);
    for i in 0..=s {
        let mut level = vec![0.0; m2];
        for (j, slot) in level.iter_mut().enumerate() {
            let below = if i == 0 {
                candidate[j]
            } else {
                stack.component(i - 1, j)
            };
            let above = stack.component(i + 1, j);
            let here = stack.component(i, j);
            *slot = p_plus * below + p_minus * above + stay * here;
        }
        levels.push(level);
    }
    while levels.last().map(|v| sup_norm(v) == 0.0) == Some(true) {
        levels.pop();
    }
    IdealStack { levels, m2 }
}

/// Idealized stack reading: exact one-hot of dimension m2 + 1, with the last
/// component set when the stack is empty.
pub fn ideal_reading(stack: &IdealStack) -> Reading {
    let m2 = stack.alphabet_size();
    let mut r = vec![0.0; m2 + 1];
    match stack.level(0) {
        Some(top) => {
            r[..m2].copy_from_slice(top);
            r[m2] = 1.0 - sup_norm(top);
        }
        None => r[m2] = 1.0,
    }
    Reading(r)
}

/// Exact machine configuration: one-hot state vector plus idealized stack.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealState {
    pub q_bar: Vec<f64>,
    pub k_bar: IdealStack,
}

impl IdealState {
    /// Start configuration: one-hot at the start state, empty stack.
    pub fn start(state_count: usize, m2: usize, start_state: usize) -> Self {
        IdealState {
            q_bar: one_hot(state_count, start_state),
            k_bar: IdealStack::empty(m2),
        }
    }

    pub fn encode(state_count: usize, m2: usize, state: usize, stack: &ClassicalStack) -> Self {
        IdealState {
            q_bar: one_hot(state_count, state),
            k_bar: IdealStack::from_classical(m2, stack),
        }
    }

    /// Decodes to (state index, classical stack); `None` if the encoding
    /// invariants do not hold exactly.
    pub fn decode(&self) -> Option<(usize, ClassicalStack)> {
        if !is_one_hot(&self.q_bar) {
            return None;
        }
        let state = self.q_bar.iter().position(|&x| x == 1.0).unwrap();
        Some((state, self.k_bar.to_classical()?))
    }

    pub fn is_valid(&self) -> bool {
        is_one_hot(&self.q_bar) && self.k_bar.is_valid()
    }
}

/// One exact vectorized transition: contract the weight tensors against the
/// reading, input, and state vectors, then apply the idealized operator.
/// Inputs must be exact one-hot; the result is again a valid [`IdealState`].
pub fn step_ideal_vectorized(
    tensors: &WeightTensors,
    state: &IdealState,
    input: &[f64],
) -> IdealState {
    debug_assert!(
        is_one_hot(input),
        "idealized step requires an exact one-hot input"
    );
    let r = ideal_reading(&state.k_bar);
    let q_next = tensors.contract_state(r.as_slice(), input, &state.q_bar);
    let p_plus = tensors.contract_push_gate(r.as_slice(), input, &state.q_bar);
    let p_minus = tensors.contract_pop_gate(r.as_slice(), input, &state.q_bar);
    let candidate = tensors.contract_push_vector(r.as_slice(), input, &state.q_bar);
    let k_next = ideal_apply(&state.k_bar, p_plus, p_minus, &candidate);
    IdealState {
        q_bar: q_next,
        k_bar: k_next,
    }
}
