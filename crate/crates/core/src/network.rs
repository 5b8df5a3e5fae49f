//! The recurrent machine: a state vector in [0,1]^n coupled to a
//! differentiable stack, driven by the weight tensors.
//!
//! Each step reads the stack, contracts the tensors against (reading, input,
//! state), squashes the state pre-activation through the sigmoid, and applies
//! the stack operator with the contracted gates and candidate vector.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::encoding::WeightTensors;
use crate::stack::{apply_operator, reading, DiffStack, Sensitivity, StackAction, StackError};
use crate::util::{argmax, is_one_hot, one_hot};

/// Full machine configuration at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralState {
    pub q: Vec<f64>,
    pub stack: DiffStack,
    pub t: usize,
}

impl NeuralState {
    /// Exact start configuration: one-hot state, empty stack.
    pub fn start(state_count: usize, m2: usize, start_state: usize, stack_capacity: usize) -> Self {
        NeuralState {
            q: one_hot(state_count, start_state),
            stack: DiffStack::with_capacity(m2, stack_capacity),
            t: 0,
        }
    }

    /// Arbitrary configuration, e.g. a perturbed start for single-step
    /// experiments.
    pub fn from_parts(q: Vec<f64>, stack: DiffStack) -> Self {
        NeuralState { q, stack, t: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("{what} has dimension {actual}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("input vector at step {step} is not one-hot")]
    InputNotOneHot { step: usize },
    #[error("input symbol {symbol} at position {position} out of range (alphabet size {limit})")]
    BadInputSymbol {
        position: usize,
        symbol: usize,
        limit: usize,
    },
    #[error(transparent)]
    Stack(#[from] StackError),
}

/// Options shared by the run entry points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Confidence guard: a run is flagged low-confidence when the largest
    /// final state component falls below `1 - eps_accept`.
    pub eps_accept: f64,
    pub stack_capacity: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            eps_accept: 0.1,
            stack_capacity: crate::stack::DEFAULT_STACK_CAPACITY,
        }
    }
}

/// Outcome of a full run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub accept: bool,
    pub final_q: Vec<f64>,
    /// Largest component of the final state vector.
    pub confidence: f64,
    pub steps: usize,
    /// Set when the confidence guard failed; such runs never accept.
    pub low_confidence: bool,
}

/// One recurrent step. The input must be an exact one-hot vector of the
/// input-alphabet dimension.
pub fn nn_step(
    tensors: &WeightTensors,
    state: &NeuralState,
    input: &[f64],
    h: Sensitivity,
) -> Result<NeuralState, NetworkError> {
    let n = tensors.state_count();
    let m1 = tensors.input_alphabet_size();
    let m2 = tensors.stack_alphabet_size();
    if state.q.len() != n {
        return Err(NetworkError::DimensionMismatch {
            what: "state vector",
            expected: n,
            actual: state.q.len(),
        });
    }
    if state.stack.alphabet_size() != m2 {
        return Err(NetworkError::DimensionMismatch {
            what: "stack alphabet",
            expected: m2,
            actual: state.stack.alphabet_size(),
        });
    }
    if input.len() != m1 {
        return Err(NetworkError::DimensionMismatch {
            what: "input vector",
            expected: m1,
            actual: input.len(),
        });
    }
    if !is_one_hot(input) {
        return Err(NetworkError::InputNotOneHot { step: state.t });
    }

    let (q_next, action) = step_parts(tensors, state, input, h);
    let stack = apply_operator(&state.stack, &action, h)?;
    Ok(NeuralState {
        q: q_next,
        stack,
        t: state.t + 1,
    })
}

/// Shared core of [`nn_step`] and [`nn_trace`]: next state vector plus the
/// stack action, without applying the action.
fn step_parts(
    tensors: &WeightTensors,
    state: &NeuralState,
    input: &[f64],
    h: Sensitivity,
) -> (Vec<f64>, StackAction) {
    let r = reading(&state.stack);
    let pre = tensors.contract_state(r.as_slice(), input, &state.q);
    let q_next: Vec<f64> = pre
        .iter()
        .map(|&v| crate::stack::sigmoid(v - 0.5, h))
        .collect();
    let action = StackAction {
        p_plus: tensors.contract_push_gate(r.as_slice(), input, &state.q),
        p_minus: tensors.contract_pop_gate(r.as_slice(), input, &state.q),
        push_vector: tensors.contract_push_vector(r.as_slice(), input, &state.q),
    };
    (q_next, action)
}

fn check_symbols(tensors: &WeightTensors, input: &[usize]) -> Result<(), NetworkError> {
    let m1 = tensors.input_alphabet_size();
    for (position, &symbol) in input.iter().enumerate() {
        if symbol >= m1 {
            return Err(NetworkError::BadInputSymbol {
                position,
                symbol,
                limit: m1,
            });
        }
    }
    Ok(())
}

/// Runs the machine from the exact start configuration over a string of
/// input-symbol indices. Accepts iff the argmax of the final state vector is
/// an accept state and clears the confidence guard.
pub fn nn_run(
    tensors: &WeightTensors,
    input: &[usize],
    h: Sensitivity,
    start_state: usize,
    accept_states: &BTreeSet<usize>,
    options: &RunOptions,
) -> Result<RunReport, NetworkError> {
    check_symbols(tensors, input)?;
    let m1 = tensors.input_alphabet_size();
    let mut state = NeuralState::start(
        tensors.state_count(),
        tensors.stack_alphabet_size(),
        start_state,
        options.stack_capacity,
    );
    for &symbol in input {
        state = nn_step(tensors, &state, &one_hot(m1, symbol), h)?;
    }
    let decoded = argmax(&state.q);
    let confidence = state.q[decoded];
    let low_confidence = confidence < 1.0 - options.eps_accept;
    Ok(RunReport {
        accept: accept_states.contains(&decoded) && !low_confidence,
        final_q: state.q,
        confidence,
        steps: input.len(),
        low_confidence,
    })
}

/// One row of a full internal trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub t: usize,
    pub q: Vec<f64>,
    pub p_plus: f64,
    pub p_minus: f64,
    pub push_vector: Vec<f64>,
    pub stack: DiffStack,
}

/// As [`nn_run`] but retaining every intermediate state, gate, and stack.
/// The first entry is the start configuration with zero gates.
pub fn nn_trace(
    tensors: &WeightTensors,
    input: &[usize],
    h: Sensitivity,
    start_state: usize,
    options: &RunOptions,
) -> Result<Vec<TraceStep>, NetworkError> {
    check_symbols(tensors, input)?;
    let m1 = tensors.input_alphabet_size();
    let m2 = tensors.stack_alphabet_size();
    let mut state = NeuralState::start(
        tensors.state_count(),
        m2,
        start_state,
        options.stack_capacity,
    );
    let mut steps = Vec::with_capacity(input.len() + 1);
    steps.push(TraceStep {
        t: 0,
        q: state.q.clone(),
        p_plus: 0.0,
        p_minus: 0.0,
        push_vector: vec![0.0; m2],
        stack: state.stack.clone(),
    });
    for &symbol in input {
        let one_hot_input = one_hot(m1, symbol);
        let (q_next, action) = step_parts(tensors, &state, &one_hot_input, h);
        let stack = apply_operator(&state.stack, &action, h)?;
        state = NeuralState {
            q: q_next,
            stack,
            t: state.t + 1,
        };
        steps.push(TraceStep {
            t: state.t,
            q: state.q.clone(),
            p_plus: action.p_plus,
            p_minus: action.p_minus,
            push_vector: action.push_vector,
            stack: state.stack.clone(),
        });
    }
    Ok(steps)
}

/// Renders a trace as TSV: one row per step holding t, the state components,
/// both gates, the candidate components, and the stack size.
pub fn write_trace_tsv(steps: &[TraceStep]) -> String {
    let mut out = String::new();
    if steps.is_empty() {
        return out;
    }
    let n = steps[0].q.len();
    let m2 = steps[0].push_vector.len();
    out.push('t');
    for i in 0..n {
        out.push_str(&format!("\tq{i}"));
    }
    out.push_str("\tp_plus\tp_minus");
    for i in 0..m2 {
        out.push_str(&format!("\tc{i}"));
    }
    out.push_str("\ts\n");
    for step in steps {
        out.push_str(&format!("{}", step.t));
        for q in &step.q {
            out.push_str(&format!("\t{q}"));
        }
        out.push_str(&format!("\t{}\t{}", step.p_plus, step.p_minus));
        for c in &step.push_vector {
            out.push_str(&format!("\t{c}"));
        }
        out.push_str(&format!("\t{}\n", step.stack.size()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::ideal::{step_ideal_vectorized, IdealState};
    use crate::automata::{run_classical, step_classical, ClassicalStack};
    use crate::encoding::encode_weights;
    use crate::grammars::{builtin, Builtin};
    use crate::stack::stack_distance;
    use crate::util::sup_distance;

    fn h(v: f64) -> Sensitivity {
        Sensitivity::new(v).unwrap()
    }

    #[test]
    fn open_paren_step_stays_near_the_ideal_orbit() {
        let spec = builtin(Builtin::Parens);
        let tensors = encode_weights(&spec);
        let state = NeuralState::start(2, 1, 0, 64);
        let next = nn_step(&tensors, &state, &one_hot(3, 0), h(60.0)).unwrap();
        assert!((next.q[0] - 1.0).abs() < 1e-4);
        assert!(next.q[1].abs() < 1e-4);
        assert_eq!(next.stack.size(), 1);
        assert!((next.stack.component(0, 0) - 1.0).abs() < 1e-4);
        assert_eq!(next.t, 1);
    }

    /// At H = 200 every single transition of every built-in machine decodes
    /// to the classical step, over all states, inputs, and small stacks.
    #[test]
    fn high_sensitivity_steps_decode_to_classical_transitions() {
        for b in [Builtin::Parens, Builtin::Dyck2, Builtin::AnBn] {
            let spec = builtin(b);
            let tensors = encode_weights(&spec);
            let n = spec.state_count();
            let m1 = spec.input_alphabet_size();
            let m2 = spec.stack_alphabet_size();
            let stacks: Vec<Vec<usize>> = match m2 {
                1 => (0..=3).map(|d| vec![0; d]).collect(),
                _ => vec![
                    vec![],
                    vec![0],
                    vec![1],
                    vec![0, 1],
                    vec![1, 0],
                    vec![1, 1, 0],
                ],
            };
            for top_first in &stacks {
                let classical = ClassicalStack::from_top_symbols(top_first);
                for q in 0..n {
                    for a in 0..m1 {
                        let ideal = IdealState::encode(n, m2, q, &classical);
                        let mut stack = DiffStack::with_capacity(m2, 64);
                        for &sym in top_first.iter().rev() {
                            stack = apply_operator(
                                &stack,
                                &StackAction::push(one_hot(m2, sym)),
                                h(200.0),
                            )
                            .unwrap();
                        }
                        let state = NeuralState::from_parts(ideal.q_bar.clone(), stack);
                        let next = nn_step(&tensors, &state, &one_hot(m1, a), h(200.0)).unwrap();
                        let (expected_q, expected_stack) = step_classical(&spec, q, &classical, a);
                        assert_eq!(argmax(&next.q), expected_q);
                        assert!(next.q[expected_q] > 0.999);
                        assert_eq!(next.stack.size(), expected_stack.depth());
                    }
                }
            }
        }
    }

    #[test]
    fn all_zero_input_is_rejected() {
        let spec = builtin(Builtin::Parens);
        let tensors = encode_weights(&spec);
        let state = NeuralState::start(2, 1, 0, 64);
        let err = nn_step(&tensors, &state, &[0.0, 0.0, 0.0], h(60.0)).unwrap_err();
        assert_eq!(err, NetworkError::InputNotOneHot { step: 0 });
    }

    #[test]
    fn balanced_string_accepts_with_high_confidence() {
        let spec = builtin(Builtin::Parens);
        let tensors = encode_weights(&spec);
        // ( ( ) ( ) ) e
        let report = nn_run(
            &tensors,
            &[0, 0, 1, 0, 1, 1, 2],
            h(60.0),
            spec.start_state,
            &spec.accept_states,
            &RunOptions::default(),
        )
        .unwrap();
        assert!(report.accept);
        assert!(report.confidence >= 0.99);
        assert!(!report.low_confidence);
    }

    #[test]
    fn close_paren_first_rejects() {
        let spec = builtin(Builtin::Parens);
        let tensors = encode_weights(&spec);
        // ) e
        let report = nn_run(
            &tensors,
            &[1, 2],
            h(60.0),
            spec.start_state,
            &spec.accept_states,
            &RunOptions::default(),
        )
        .unwrap();
        assert!(!report.accept);
    }

    #[test]
    fn lone_end_marker_accepts() {
        let spec = builtin(Builtin::Parens);
        let tensors = encode_weights(&spec);
        assert!(run_classical(&spec, &[2]).unwrap().accept);
        let report = nn_run(
            &tensors,
            &[2],
            h(60.0),
            spec.start_state,
            &spec.accept_states,
            &RunOptions::default(),
        )
        .unwrap();
        assert!(report.accept);
    }

    #[test]
    fn low_sensitivity_is_flagged_not_accepted() {
        let spec = builtin(Builtin::Parens);
        let tensors = encode_weights(&spec);
        let report = nn_run(
            &tensors,
            &[0, 1, 2],
            h(1.0),
            spec.start_state,
            &spec.accept_states,
            &RunOptions::default(),
        )
        .unwrap();
        assert!(report.low_confidence);
        assert!(!report.accept);
    }

    #[test]
    fn trace_has_one_row_per_step_plus_start() {
        let spec = builtin(Builtin::Parens);
        let tensors = encode_weights(&spec);
        let steps = nn_trace(
            &tensors,
            &[0, 0, 1, 2],
            h(60.0),
            spec.start_state,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(steps.len(), 5);
        assert_eq!(steps[0].t, 0);
        assert_eq!(steps[0].q, vec![1.0, 0.0]);
    }

    #[test]
    fn traced_gates_saturate_on_ideal_runs() {
        let spec = builtin(Builtin::Parens);
        let tensors = encode_weights(&spec);
        let steps = nn_trace(
            &tensors,
            &[0, 0, 1, 0, 1, 1, 2],
            h(60.0),
            spec.start_state,
            &RunOptions::default(),
        )
        .unwrap();
        for step in &steps[1..] {
            let p_plus_gap = step.p_plus.min((step.p_plus - 1.0).abs());
            let p_minus_gap = step.p_minus.min((step.p_minus - 1.0).abs());
            assert!(p_plus_gap < 0.01, "p_plus {} far from binary", step.p_plus);
            assert!(
                p_minus_gap < 0.01,
                "p_minus {} far from binary",
                step.p_minus
            );
        }
    }

    #[test]
    fn traced_stack_sizes_follow_the_oracle() {
        let spec = builtin(Builtin::Parens);
        let tensors = encode_weights(&spec);
        let steps = nn_trace(
            &tensors,
            &[0, 0, 0, 0],
            h(60.0),
            spec.start_state,
            &RunOptions::default(),
        )
        .unwrap();
        let sizes: Vec<usize> = steps.iter().map(|s| s.stack.size()).collect();
        assert_eq!(sizes, vec![0, 1, 2, 3, 4]);
    }

    /// Lockstep comparison against the idealized machine along a full run.
    #[test]
    fn run_stays_near_ideal_orbit() {
        let spec = builtin(Builtin::Dyck2);
        let tensors = encode_weights(&spec);
        let input = [0, 2, 2, 3, 3, 1, 0, 1, 4];
        let hv = h(60.0);
        let mut neural = NeuralState::start(
            spec.state_count(),
            spec.stack_alphabet_size(),
            spec.start_state,
            64,
        );
        let mut ideal = IdealState::start(
            spec.state_count(),
            spec.stack_alphabet_size(),
            spec.start_state,
        );
        for &a in &input {
            let iv = one_hot(5, a);
            neural = nn_step(&tensors, &neural, &iv, hv).unwrap();
            ideal = step_ideal_vectorized(&tensors, &ideal, &iv);
            assert!(sup_distance(&neural.q, &ideal.q_bar) < 0.01);
            assert!(stack_distance(&neural.stack, &ideal.k_bar) < 0.01);
        }
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let spec = builtin(Builtin::AnBn);
        let tensors = encode_weights(&spec);
        let input = [0, 0, 1, 1, 2];
        let opts = RunOptions::default();
        let a = nn_run(
            &tensors,
            &input,
            h(37.5),
            spec.start_state,
            &spec.accept_states,
            &opts,
        )
        .unwrap();
        let b = nn_run(
            &tensors,
            &input,
            h(37.5),
            spec.start_state,
            &spec.accept_states,
            &opts,
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
