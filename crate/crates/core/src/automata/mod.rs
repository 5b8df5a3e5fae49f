//! Classical pushdown automata: the symbolic machine definition, validation,
//! and the exact simulator used as ground truth everywhere else.
//!
//! A machine is a 7-tuple over index spaces: `n` states, `m1` input
//! characters, `m2` stack characters. The transition table is keyed by
//! (state, input, stack reading) where reading index `m2` stands for the
//! empty stack. Determinism and totality are checked by [`validate_spec`],
//! never assumed.

pub mod dfa;
pub mod ideal;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Stack action attached to a transition rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StackOp {
    /// Push the stack character with this index.
    Push(usize),
    Pop,
    Noop,
}

/// Symbolic definition of a deterministic pushdown automaton.
///
/// Symbol order in the three alphabets fixes every vector index used by the
/// tensor encodings. `transitions` maps (state, input, reading) to
/// (next state, stack op); reading index `stack_alphabet.len()` means the
/// stack was empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdaSpec {
    pub states: Vec<String>,
    pub input_alphabet: Vec<String>,
    pub stack_alphabet: Vec<String>,
    pub start_state: usize,
    pub accept_states: BTreeSet<usize>,
    pub transitions: BTreeMap<(usize, usize, usize), (usize, StackOp)>,
}

impl PdaSpec {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn input_alphabet_size(&self) -> usize {
        self.input_alphabet.len()
    }

    pub fn stack_alphabet_size(&self) -> usize {
        self.stack_alphabet.len()
    }

    /// Reading index representing the empty stack (one past the last stack
    /// character).
    pub fn empty_reading(&self) -> usize {
        self.stack_alphabet.len()
    }

    pub fn transition(
        &self,
        state: usize,
        input: usize,
        reading: usize,
    ) -> Option<(usize, StackOp)> {
        self.transitions.get(&(state, input, reading)).copied()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.input_alphabet.iter().position(|s| s == name)
    }

    pub fn stack_index(&self, name: &str) -> Option<usize> {
        self.stack_alphabet.iter().position(|s| s == name)
    }
}

/// A single invariant violation found by [`validate_spec`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecViolation {
    #[error("no transition for (state {state}, input {input}, reading {reading})")]
    NonTotalTransition {
        state: usize,
        input: usize,
        reading: usize,
    },
    #[error("{what} index {index} out of range (limit {limit})")]
    BadIndex {
        what: &'static str,
        index: usize,
        limit: usize,
    },
    #[error("duplicate {what} name {name:?}")]
    DuplicateName { what: &'static str, name: String },
    #[error("{what} must not be empty")]
    EmptyDeclaration { what: &'static str },
}

/// Full violation report; `Display` prints one violation per line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationErrors(pub Vec<SpecViolation>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.0 {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

/// Checks every machine invariant and reports all violations at once:
/// nonempty declarations, unique names, in-range indices, and a total,
/// deterministic transition table.
pub fn validate_spec(spec: &PdaSpec) -> Result<(), ValidationErrors> {
    let mut violations = Vec::new();
    let n = spec.state_count();
    let m1 = spec.input_alphabet_size();
    let m2 = spec.stack_alphabet_size();

    for (what, names) in [
        ("state", &spec.states),
        ("input character", &spec.input_alphabet),
        ("stack character", &spec.stack_alphabet),
    ] {
        if names.is_empty() {
            violations.push(SpecViolation::EmptyDeclaration { what });
        }
        let mut seen = BTreeSet::new();
        for name in names {
            if !seen.insert(name) {
                violations.push(SpecViolation::DuplicateName {
                    what,
                    name: name.clone(),
                });
            }
        }
    }

    if spec.start_state >= n {
        violations.push(SpecViolation::BadIndex {
            what: "start state",
            index: spec.start_state,
            limit: n,
        });
    }
    for &q in &spec.accept_states {
        if q >= n {
            violations.push(SpecViolation::BadIndex {
                what: "accept state",
                index: q,
                limit: n,
            });
        }
    }

    for (&(q, a, r), &(next, op)) in &spec.transitions {
        if q >= n {
            violations.push(SpecViolation::BadIndex {
                what: "rule state",
                index: q,
                limit: n,
            });
        }
        if a >= m1 {
            violations.push(SpecViolation::BadIndex {
                what: "rule input",
                index: a,
                limit: m1,
            });
        }
        if r > m2 {
            violations.push(SpecViolation::BadIndex {
                what: "rule reading",
                index: r,
                limit: m2 + 1,
            });
        }
        if next >= n {
            violations.push(SpecViolation::BadIndex {
                what: "rule target state",
                index: next,
                limit: n,
            });
        }
        if let StackOp::Push(c) = op {
            if c >= m2 {
                violations.push(SpecViolation::BadIndex {
                    what: "pushed character",
                    index: c,
                    limit: m2,
                });
            }
        }
    }

    for q in 0..n {
        for a in 0..m1 {
            for r in 0..=m2 {
                if !spec.transitions.contains_key(&(q, a, r)) {
                    violations.push(SpecViolation::NonTotalTransition {
                        state: q,
                        input: a,
                        reading: r,
                    });
                }
            }
        }
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(ValidationErrors(violations))
    }
}

/// Classical stack over stack-character indices.
///
/// Stored bottom-to-top so push and pop are O(1); the accessors speak in
/// top-first terms. Popping an empty stack leaves it empty, and reading an
/// empty stack yields the machine's empty-reading index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassicalStack {
    symbols: Vec<usize>,
}

impl ClassicalStack {
    pub fn new() -> Self {
        ClassicalStack {
            symbols: Vec::new(),
        }
    }

    /// Builds a stack listing symbols top-first.
    pub fn from_top_symbols(top_first: &[usize]) -> Self {
        ClassicalStack {
            symbols: top_first.iter().rev().copied().collect(),
        }
    }

    pub fn depth(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn top(&self) -> Option<usize> {
        self.symbols.last().copied()
    }

    /// Symbol at distance `i` below the top.
    pub fn symbol_from_top(&self, i: usize) -> Option<usize> {
        if i < self.symbols.len() {
            Some(self.symbols[self.symbols.len() - 1 - i])
        } else {
            None
        }
    }

    pub fn push(&mut self, symbol: usize) {
        self.symbols.push(symbol);
    }

    /// Pop on empty is the identity.
    pub fn pop(&mut self) {
        self.symbols.pop();
    }

    pub fn iter_from_top(&self) -> impl Iterator<Item = usize> + '_ {
        self.symbols.iter().rev().copied()
    }

    /// Reading index for this stack under a machine with `m2` stack
    /// characters: the top symbol, or `m2` when empty.
    pub fn reading(&self, m2: usize) -> usize {
        self.top().unwrap_or(m2)
    }
}

/// Errors from feeding a string to the classical machine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("input symbol {symbol} at position {position} out of range (alphabet size {limit})")]
    BadInputSymbol {
        position: usize,
        symbol: usize,
        limit: usize,
    },
}

fn step_in_place(spec: &PdaSpec, state: &mut usize, stack: &mut ClassicalStack, input: usize) {
    let reading = stack.reading(spec.stack_alphabet_size());
    let (next, op) = spec.transition(*state, input, reading).unwrap_or_else(|| {
        panic!("missing transition ({state}, {input}, {reading}); spec not validated")
    });
    *state = next;
    match op {
        StackOp::Push(c) => stack.push(c),
        StackOp::Pop => stack.pop(),
        StackOp::Noop => {}
    }
}

/// One exact transition. Panics on a missing table entry, which validation
/// rules out.
pub fn step_classical(
    spec: &PdaSpec,
    state: usize,
    stack: &ClassicalStack,
    input: usize,
) -> (usize, ClassicalStack) {
    let mut q = state;
    let mut k = stack.clone();
    step_in_place(spec, &mut q, &mut k, input);
    (q, k)
}

/// Outcome of an exact run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalRun {
    pub accept: bool,
    pub final_state: usize,
    pub final_stack: ClassicalStack,
    pub steps: usize,
}

/// Runs the machine from (start state, empty stack) over the whole input.
/// Accepts iff the final state is an accept state. This is the ground-truth
/// oracle for every equivalence test in the workspace.
pub fn run_classical(spec: &PdaSpec, input: &[usize]) -> Result<ClassicalRun, RunError> {
    let m1 = spec.input_alphabet_size();
    let mut state = spec.start_state;
    let mut stack = ClassicalStack::new();
    for (position, &symbol) in input.iter().enumerate() {
        if symbol >= m1 {
            return Err(RunError::BadInputSymbol {
                position,
                symbol,
                limit: m1,
            });
        }
        step_in_place(spec, &mut state, &mut stack, symbol);
    }
    Ok(ClassicalRun {
        accept: spec.accept_states.contains(&state),
        final_state: state,
        final_stack: stack,
        steps: input.len(),
    })
}

/// As [`run_classical`], additionally returning every configuration visited,
/// including the initial one. Traces over long strings are large; callers
/// that only need the verdict should use [`run_classical`].
pub fn run_classical_with_trace(
    spec: &PdaSpec,
    input: &[usize],
) -> Result<(ClassicalRun, Vec<(usize, ClassicalStack)>), RunError> {
    let m1 = spec.input_alphabet_size();
    let mut state = spec.start_state;
    let mut stack = ClassicalStack::new();
    let mut trace = Vec::with_capacity(input.len() + 1);
    trace.push((state, stack.clone()));
    for (position, &symbol) in input.iter().enumerate() {
        if symbol >= m1 {
            return Err(RunError::BadInputSymbol {
                position,
                symbol,
                limit: m1,
            });
        }
        step_in_place(spec, &mut state, &mut stack, symbol);
        trace.push((state, stack.clone()));
    }
    let run = ClassicalRun {
        accept: spec.accept_states.contains(&state),
        final_state: state,
        final_stack: stack,
        steps: input.len(),
    };
    Ok((run, trace))
}
