//! Compiling a machine's rule table into binary weight tensors, and reading
//! the rules back out of (possibly perturbed) tensors.
//!
//! The four tensors tabulate the transition function directly. With `n`
//! states, `m1` input characters, `m2` stack characters and `L = m2 + 1`
//! reading slots (the extra slot is the empty-stack reading):
//!
//! - `wq`,       shape `n x n x m1 x L`: target-state indicator per rule.
//! - `wp_plus`,  shape `n x m1 x L`: 1 where the rule pushes.
//! - `wp_minus`, shape `n x m1 x L`: 1 where the rule pops.
//! - `wc`,       shape `m2 x n x m1 x L`: pushed-character indicator, zero
//!   everywhere a rule does not push (this keeps extraction unambiguous).
//!
//! Index order is always (target, state, input, reading) for the rank-4
//! tensors and (state, input, reading) for the gates. Contractions sum in
//! ascending (reading, input, state) order so results are bit-reproducible.

use std::fmt;

use ndarray::{Array3, Array4};
use rand::Rng;
use thiserror::Error;

use crate::automata::{PdaSpec, StackOp};

/// The four binary weight tensors encoding one machine.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTensors {
    wq: Array4<f64>,
    wp_plus: Array3<f64>,
    wp_minus: Array3<f64>,
    wc: Array4<f64>,
}

/// Ambiguities found while decoding rules out of tensors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("{tensor} column (state {state}, input {input}, reading {reading}) selects {count} targets instead of one")]
    AmbiguousRule {
        tensor: &'static str,
        state: usize,
        input: usize,
        reading: usize,
        count: usize,
    },
    #[error("push character set at (state {state}, input {input}, reading {reading}) where the push gate is 0")]
    InconsistentStackOp {
        state: usize,
        input: usize,
        reading: usize,
    },
}

impl WeightTensors {
    pub fn state_count(&self) -> usize {
        self.wq.dim().0
    }

    pub fn input_alphabet_size(&self) -> usize {
        self.wq.dim().2
    }

    pub fn stack_alphabet_size(&self) -> usize {
        self.wq.dim().3 - 1
    }

    /// Reading dimension m2 + 1.
    pub fn reading_size(&self) -> usize {
        self.wq.dim().3
    }

    pub fn wq(&self) -> &Array4<f64> {
        &self.wq
    }

    pub fn wp_plus(&self) -> &Array3<f64> {
        &self.wp_plus
    }

    pub fn wp_minus(&self) -> &Array3<f64> {
        &self.wp_minus
    }

    pub fn wc(&self) -> &Array4<f64> {
        &self.wc
    }

    /// Total number of allocated tensor elements.
    pub fn element_count(&self) -> usize {
        self.wq.len() + self.wp_plus.len() + self.wp_minus.len() + self.wc.len()
    }

    /// State pre-activation `V_i = sum_{l,k,j} wq[i,j,k,l] R_l I_k Q_j`.
    pub fn contract_state(&self, r: &[f64], input: &[f64], q: &[f64]) -> Vec<f64> {
        let (n, _, m1, rl) = self.wq.dim();
        debug_assert_eq!(r.len(), rl);
        debug_assert_eq!(input.len(), m1);
        debug_assert_eq!(q.len(), n);
        let mut v = vec![0.0; n];
        for (i, slot) in v.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (l, &reading) in r.iter().enumerate() {
                for (k, &ik) in input.iter().enumerate() {
                    for (j, &qj) in q.iter().enumerate() {
                        acc += self.wq[[i, j, k, l]] * reading * ik * qj;
                    }
                }
            }
            *slot = acc;
        }
        v
    }

    fn contract_gate(gate: &Array3<f64>, r: &[f64], input: &[f64], q: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (l, &reading) in r.iter().enumerate() {
            for (k, &ik) in input.iter().enumerate() {
                for (j, &qj) in q.iter().enumerate() {
                    acc += gate[[j, k, l]] * reading * ik * qj;
                }
            }
        }
        acc
    }

    /// Push gate `p_+ = sum_{l,k,j} wp_plus[j,k,l] R_l I_k Q_j`.
    pub fn contract_push_gate(&self, r: &[f64], input: &[f64], q: &[f64]) -> f64 {
        Self::contract_gate(&self.wp_plus, r, input, q)
    }

    /// Pop gate `p_- = sum_{l,k,j} wp_minus[j,k,l] R_l I_k Q_j`.
    pub fn contract_pop_gate(&self, r: &[f64], input: &[f64], q: &[f64]) -> f64 {
        Self::contract_gate(&self.wp_minus, r, input, q)
    }

    /// Candidate push vector `C_i = sum_{l,k,j} wc[i,j,k,l] R_l I_k Q_j`.
    pub fn contract_push_vector(&self, r: &[f64], input: &[f64], q: &[f64]) -> Vec<f64> {
        let (m2, _, _, _) = self.wc.dim();
        let mut c = vec![0.0; m2];
        for (i, slot) in c.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (l, &reading) in r.iter().enumerate() {
                for (k, &ik) in input.iter().enumerate() {
                    for (j, &qj) in q.iter().enumerate() {
                        acc += self.wc[[i, j, k, l]] * reading * ik * qj;
                    }
                }
            }
            *slot = acc;
        }
        c
    }

    /// Returns a copy with independent uniform noise in `[-amplitude,
    /// amplitude]` added to every entry of every tensor.
    pub fn with_noise<R: Rng>(&self, amplitude: f64, rng: &mut R) -> WeightTensors {
        let mut noisy = self.clone();
        for x in noisy.wq.iter_mut() {
            *x += rng.random_range(-amplitude..=amplitude);
        }
        for x in noisy.wp_plus.iter_mut() {
            *x += rng.random_range(-amplitude..=amplitude);
        }
        for x in noisy.wp_minus.iter_mut() {
            *x += rng.random_range(-amplitude..=amplitude);
        }
        for x in noisy.wc.iter_mut() {
            *x += rng.random_range(-amplitude..=amplitude);
        }
        noisy
    }
}

/// Compiles a validated machine into its weight tensors. Every rule
/// (state, input, reading) -> (target, op) sets exactly one entry of `wq`,
/// at most one gate entry, and one `wc` entry when the rule pushes.
pub fn encode_weights(spec: &PdaSpec) -> WeightTensors {
    let n = spec.state_count();
    let m1 = spec.input_alphabet_size();
    let m2 = spec.stack_alphabet_size();
    let rl = m2 + 1;
    let mut wq = Array4::zeros((n, n, m1, rl));
    let mut wp_plus = Array3::zeros((n, m1, rl));
    let mut wp_minus = Array3::zeros((n, m1, rl));
    let mut wc = Array4::zeros((m2, n, m1, rl));
    for (&(j, k, l), &(i, op)) in &spec.transitions {
        wq[[i, j, k, l]] = 1.0;
        match op {
            StackOp::Push(c) => {
                wp_plus[[j, k, l]] = 1.0;
                wc[[c, j, k, l]] = 1.0;
            }
            StackOp::Pop => {
                wp_minus[[j, k, l]] = 1.0;
            }
            StackOp::Noop => {}
        }
    }
    WeightTensors {
        wq,
        wp_plus,
        wp_minus,
        wc,
    }
}

/// Naming metadata needed to rebuild a symbolic machine from tensors. The
/// tensors carry only the rule table; names, start state and accept set live
/// here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamingMetadata {
    pub states: Vec<String>,
    pub input_alphabet: Vec<String>,
    pub stack_alphabet: Vec<String>,
    pub start_state: usize,
    pub accept_states: std::collections::BTreeSet<usize>,
}

impl PdaSpec {
    pub fn naming(&self) -> NamingMetadata {
        NamingMetadata {
            states: self.states.clone(),
            input_alphabet: self.input_alphabet.clone(),
            stack_alphabet: self.stack_alphabet.clone(),
            start_state: self.start_state,
            accept_states: self.accept_states.clone(),
        }
    }
}

fn round_binary(x: f64) -> f64 {
    if x >= 0.5 {
        1.0
    } else {
        0.0
    }
}

/// Inverts [`encode_weights`]. Entries are first rounded at threshold 1/2,
/// so any perturbation of amplitude below 0.5 on an exact encoding is
/// recovered losslessly. Columns that do not decode to exactly one rule are
/// reported rather than guessed.
pub fn extract_rules(
    tensors: &WeightTensors,
    names: &NamingMetadata,
) -> Result<PdaSpec, ExtractError> {
    let n = tensors.state_count();
    let m1 = tensors.input_alphabet_size();
    let m2 = tensors.stack_alphabet_size();
    let mut transitions = std::collections::BTreeMap::new();

    for j in 0..n {
        for k in 0..m1 {
            for l in 0..=m2 {
                let targets: Vec<usize> = (0..n)
                    .filter(|&i| round_binary(tensors.wq[[i, j, k, l]]) == 1.0)
                    .collect();
                if targets.len() != 1 {
                    return Err(ExtractError::AmbiguousRule {
                        tensor: "state tensor",
                        state: j,
                        input: k,
                        reading: l,
                        count: targets.len(),
                    });
                }
                let push = round_binary(tensors.wp_plus[[j, k, l]]) == 1.0;
                let pop = round_binary(tensors.wp_minus[[j, k, l]]) == 1.0;
                let pushed: Vec<usize> = (0..m2)
                    .filter(|&c| round_binary(tensors.wc[[c, j, k, l]]) == 1.0)
                    .collect();
                if !push && !pushed.is_empty() {
                    return Err(ExtractError::InconsistentStackOp {
                        state: j,
                        input: k,
                        reading: l,
                    });
                }
                let op = match (push, pop) {
                    (true, true) => {
                        return Err(ExtractError::AmbiguousRule {
                            tensor: "gate tensors",
                            state: j,
                            input: k,
                            reading: l,
                            count: 2,
                        })
                    }
                    (true, false) => {
                        if pushed.len() != 1 {
                            return Err(ExtractError::AmbiguousRule {
                                tensor: "push-character tensor",
                                state: j,
                                input: k,
                                reading: l,
                                count: pushed.len(),
                            });
                        }
                        StackOp::Push(pushed[0])
                    }
                    (false, true) => StackOp::Pop,
                    (false, false) => StackOp::Noop,
                };
                transitions.insert((j, k, l), (targets[0], op));
            }
        }
    }

    Ok(PdaSpec {
        states: names.states.clone(),
        input_alphabet: names.input_alphabet.clone(),
        stack_alphabet: names.stack_alphabet.clone(),
        start_state: names.start_state,
        accept_states: names.accept_states.clone(),
        transitions,
    })
}

/// Resource accounting for one machine at a given stack capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightBudget {
    pub state_neurons: usize,
    pub total_weights: usize,
    pub stack_capacity: usize,
    /// Memory cells used by a stack filled to capacity: capacity * m2.
    pub stack_footprint: usize,
}

impl fmt::Display for WeightBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "state_neurons={} total_weights={} stack_capacity={} stack_footprint={}",
            self.state_neurons, self.total_weights, self.stack_capacity, self.stack_footprint
        )
    }
}

/// Exact element counts for the four tensors plus the stack footprint at the
/// given capacity.
pub fn weight_counts(spec: &PdaSpec, stack_capacity: usize) -> WeightBudget {
    let n = spec.state_count();
    let m1 = spec.input_alphabet_size();
    let m2 = spec.stack_alphabet_size();
    let rl = m2 + 1;
    WeightBudget {
        state_neurons: n,
        total_weights: n * n * m1 * rl + 2 * n * m1 * rl + m2 * n * m1 * rl,
        stack_capacity,
        stack_footprint: stack_capacity * m2,
    }
}

/// Errors from the flat tensor text format.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("tensor format error at line {line}: {message}")]
pub struct TensorFormatError {
    pub line: usize,
    pub message: String,
}

/// Serializes tensors to the flat text format: for each tensor a header line
/// (tag followed by its dimensions), then one line per entry holding the
/// indices and the value. Values use the shortest decimal that parses back to
/// the identical float, so the round trip is bit-exact.
pub fn write_tensors(tensors: &WeightTensors) -> String {
    let n = tensors.state_count();
    let m1 = tensors.input_alphabet_size();
    let m2 = tensors.stack_alphabet_size();
    let rl = m2 + 1;
    let mut out = String::new();

    out.push_str(&format!("WQ {n} {n} {m1} {rl}\n"));
    for i in 0..n {
        for j in 0..n {
            for k in 0..m1 {
                for l in 0..rl {
                    out.push_str(&format!("{i} {j} {k} {l} {}\n", tensors.wq[[i, j, k, l]]));
                }
            }
        }
    }
    for (tag, gate) in [("WP+", &tensors.wp_plus), ("WP-", &tensors.wp_minus)] {
        out.push_str(&format!("{tag} {n} {m1} {rl}\n"));
        for j in 0..n {
            for k in 0..m1 {
                for l in 0..rl {
                    out.push_str(&format!("{j} {k} {l} {}\n", gate[[j, k, l]]));
                }
            }
        }
    }
    out.push_str(&format!("WC {m2} {n} {m1} {rl}\n"));
    for i in 0..m2 {
        for j in 0..n {
            for k in 0..m1 {
                for l in 0..rl {
                    out.push_str(&format!("{i} {j} {k} {l} {}\n", tensors.wc[[i, j, k, l]]));
                }
            }
        }
    }
    out
}

struct LineReader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> LineReader<'a> {
    fn new(text: &'a str) -> Self {
        LineReader {
            lines: text.lines().enumerate(),
        }
    }

    /// Next nonempty line with its 1-based number.
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        for (idx, line) in self.lines.by_ref() {
            let trimmed = line.trim();
            if !trimmed.is_empty() {
                return Some((idx + 1, trimmed));
            }
        }
        None
    }
}

fn parse_header(
    reader: &mut LineReader,
    tag: &str,
    rank: usize,
) -> Result<Vec<usize>, TensorFormatError> {
    let (line_no, line) = reader.next_line().ok_or_else(|| TensorFormatError {
        line: 0,
        message: format!("missing {tag} header"),
    })?;
    let mut parts = line.split_whitespace();
    let found = parts.next().unwrap_or("");
    if found != tag {
        return Err(TensorFormatError {
            line: line_no,
            message: format!("expected {tag} header, found {found:?}"),
        });
    }
    let dims: Vec<usize> = parts
        .map(|p| {
            p.parse().map_err(|_| TensorFormatError {
                line: line_no,
                message: format!("bad dimension {p:?}"),
            })
        })
        .collect::<Result<_, _>>()?;
    if dims.len() != rank {
        return Err(TensorFormatError {
            line: line_no,
            message: format!("{tag} expects {rank} dimensions, found {}", dims.len()),
        });
    }
    if dims.contains(&0) {
        return Err(TensorFormatError {
            line: line_no,
            message: format!("{tag} has a zero dimension"),
        });
    }
    Ok(dims)
}

fn parse_entry(
    reader: &mut LineReader,
    rank: usize,
    dims: &[usize],
) -> Result<(Vec<usize>, f64), TensorFormatError> {
    let (line_no, line) = reader.next_line().ok_or_else(|| TensorFormatError {
        line: 0,
        message: "unexpected end of tensor data".into(),
    })?;
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != rank + 1 {
        return Err(TensorFormatError {
            line: line_no,
            message: format!("expected {} fields, found {}", rank + 1, parts.len()),
        });
    }
    let mut indices = Vec::with_capacity(rank);
    for (axis, part) in parts[..rank].iter().enumerate() {
        let idx: usize = part.parse().map_err(|_| TensorFormatError {
            line: line_no,
            message: format!("bad index {part:?}"),
        })?;
        if idx >= dims[axis] {
            return Err(TensorFormatError {
                line: line_no,
                message: format!(
                    "index {idx} out of range for axis {axis} (size {})",
                    dims[axis]
                ),
            });
        }
        indices.push(idx);
    }
    let value: f64 = parts[rank].parse().map_err(|_| TensorFormatError {
        line: line_no,
        message: format!("bad value {:?}", parts[rank]),
    })?;
    Ok((indices, value))
}

/// Parses the flat tensor text format written by [`write_tensors`].
pub fn parse_tensors(text: &str) -> Result<WeightTensors, TensorFormatError> {
    let mut reader = LineReader::new(text);

    let dims = parse_header(&mut reader, "WQ", 4)?;
    let (n, n2, m1, rl) = (dims[0], dims[1], dims[2], dims[3]);
    if n != n2 {
        return Err(TensorFormatError {
            line: 1,
            message: "WQ must be square in its first two axes".into(),
        });
    }
    if rl < 2 {
        return Err(TensorFormatError {
            line: 1,
            message: "reading dimension must be at least 2".into(),
        });
    }
    let m2 = rl - 1;
    let mut wq = Array4::zeros((n, n, m1, rl));
    for _ in 0..wq.len() {
        let (idx, value) = parse_entry(&mut reader, 4, &[n, n, m1, rl])?;
        wq[[idx[0], idx[1], idx[2], idx[3]]] = value;
    }

    let mut gates = Vec::new();
    for tag in ["WP+", "WP-"] {
        let dims = parse_header(&mut reader, tag, 3)?;
        if dims != [n, m1, rl] {
            return Err(TensorFormatError {
                line: 0,
                message: format!("{tag} dimensions {dims:?} disagree with WQ"),
            });
        }
        let mut gate = Array3::zeros((n, m1, rl));
        for _ in 0..gate.len() {
            let (idx, value) = parse_entry(&mut reader, 3, &dims)?;
            gate[[idx[0], idx[1], idx[2]]] = value;
        }
        gates.push(gate);
    }
    let wp_minus = gates.pop().unwrap();
    let wp_plus = gates.pop().unwrap();

    let dims = parse_header(&mut reader, "WC", 4)?;
    if dims != [m2, n, m1, rl] {
        return Err(TensorFormatError {
            line: 0,
            message: format!("WC dimensions {dims:?} disagree with WQ"),
        });
    }
    let mut wc = Array4::zeros((m2, n, m1, rl));
    for _ in 0..wc.len() {
        let (idx, value) = parse_entry(&mut reader, 4, &dims)?;
        wc[[idx[0], idx[1], idx[2], idx[3]]] = value;
    }

    if let Some((line, _)) = reader.next_line() {
        return Err(TensorFormatError {
            line,
            message: "trailing data after tensors".into(),
        });
    }
    Ok(WeightTensors {
        wq,
        wp_plus,
        wp_minus,
        wc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammars::{builtin, Builtin};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parens_state_tensor_matches_golden_matrices() {
        let tensors = encode_weights(&builtin(Builtin::Parens));
        let wq = tensors.wq();
        // Open paren never changes state, for either reading.
        for l in 0..2 {
            for j in 0..2 {
                for i in 0..2 {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert_eq!(wq[[i, j, 0, l]], expected, "open-paren slice at l={l}");
                }
            }
        }
        // Close paren keeps the state on a nonempty stack and sends
        // everything to the reject state on an empty one.
        for j in 0..2 {
            for i in 0..2 {
                assert_eq!(wq[[i, j, 1, 0]], if i == j { 1.0 } else { 0.0 });
                assert_eq!(wq[[i, j, 1, 1]], if i == 1 { 1.0 } else { 0.0 });
            }
        }
        // End marker: reject on a nonempty stack, keep state on empty.
        for j in 0..2 {
            for i in 0..2 {
                assert_eq!(wq[[i, j, 2, 0]], if i == 1 { 1.0 } else { 0.0 });
                assert_eq!(wq[[i, j, 2, 1]], if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn parens_gates_depend_only_on_the_input_character() {
        let tensors = encode_weights(&builtin(Builtin::Parens));
        for j in 0..2 {
            for k in 0..3 {
                for l in 0..2 {
                    assert_eq!(tensors.wp_plus()[[j, k, l]], if k == 0 { 1.0 } else { 0.0 });
                    assert_eq!(
                        tensors.wp_minus()[[j, k, l]],
                        if k == 1 { 1.0 } else { 0.0 }
                    );
                    assert_eq!(tensors.wc()[[0, j, k, l]], if k == 0 { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn round_trip_on_builtins() {
        for b in [Builtin::Parens, Builtin::Dyck2, Builtin::AnBn] {
            let spec = builtin(b);
            let tensors = encode_weights(&spec);
            let recovered = extract_rules(&tensors, &spec.naming()).unwrap();
            assert_eq!(recovered, spec);
        }
    }

    #[test]
    fn extraction_survives_noise_below_half() {
        let spec = builtin(Builtin::Parens);
        let tensors = encode_weights(&spec);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let noisy = tensors.with_noise(0.3, &mut rng);
        let recovered = extract_rules(&noisy, &spec.naming()).unwrap();
        assert_eq!(recovered, spec);
    }

    #[test]
    fn two_targets_in_a_column_is_ambiguous() {
        let spec = builtin(Builtin::Parens);
        let mut tensors = encode_weights(&spec);
        tensors.wq[[0, 0, 0, 0]] = 1.0;
        tensors.wq[[1, 0, 0, 0]] = 1.0;
        let err = extract_rules(&tensors, &spec.naming()).unwrap_err();
        assert!(matches!(err, ExtractError::AmbiguousRule { count: 2, .. }));
    }

    #[test]
    fn push_character_without_gate_is_inconsistent() {
        let spec = builtin(Builtin::Parens);
        let mut tensors = encode_weights(&spec);
        // Input 1 pops; setting a push character there contradicts the gate.
        tensors.wc[[0, 0, 1, 0]] = 1.0;
        let err = extract_rules(&tensors, &spec.naming()).unwrap_err();
        assert!(matches!(
            err,
            ExtractError::InconsistentStackOp {
                state: 0,
                input: 1,
                reading: 0
            }
        ));
    }

    #[test]
    fn parens_budget_is_sixty_weights() {
        let spec = builtin(Builtin::Parens);
        let budget = weight_counts(&spec, 5);
        assert_eq!(budget.state_neurons, 2);
        assert_eq!(budget.total_weights, 60);
        assert_eq!(budget.total_weights, encode_weights(&spec).element_count());
    }

    #[test]
    fn minimal_machine_has_one_state_neuron() {
        let spec = PdaSpec {
            states: vec!["only".into()],
            input_alphabet: vec!["a".into()],
            stack_alphabet: vec!["x".into()],
            start_state: 0,
            accept_states: [0].into(),
            transitions: [
                ((0, 0, 0), (0, StackOp::Noop)),
                ((0, 0, 1), (0, StackOp::Noop)),
            ]
            .into_iter()
            .collect(),
        };
        assert_eq!(weight_counts(&spec, 1).state_neurons, 1);
    }

    #[test]
    fn stack_footprint_scales_with_capacity_and_alphabet() {
        let spec = builtin(Builtin::Dyck2);
        assert_eq!(spec.stack_alphabet_size(), 2);
        assert_eq!(weight_counts(&spec, 5).stack_footprint, 10);
        // Four stack characters at capacity five occupy twenty cells.
        let budget = WeightBudget {
            state_neurons: 1,
            total_weights: 0,
            stack_capacity: 5,
            stack_footprint: 5 * 4,
        };
        assert_eq!(budget.stack_footprint, 20);
    }

    #[test]
    fn tensor_text_round_trip_is_bit_exact() {
        let spec = builtin(Builtin::Dyck2);
        let tensors = encode_weights(&spec);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noisy = tensors.with_noise(0.37, &mut rng);
        let text = write_tensors(&noisy);
        let parsed = parse_tensors(&text).unwrap();
        assert_eq!(parsed, noisy);
    }

    #[test]
    fn tensor_parse_reports_line_numbers() {
        let spec = builtin(Builtin::Parens);
        let mut text = write_tensors(&encode_weights(&spec));
        text = text.replacen("0 0 0 0 1", "0 0 0 0 zebra", 1);
        let err = parse_tensors(&text).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("zebra"));
    }
}
