//! The differentiable stack: bounded sequences of vectors in [0,1]^m2 together
//! with the parametrized push/pop/identity operator and the stack reading.
//!
//! A stack holds `s` live levels (index 0 is the top); every level at index
//! `>= s` is exactly the zero vector. The operator blends adjacent levels with
//! the gate scalars `p_plus`/`p_minus`, squashes each component through a
//! steep sigmoid, and then truncates: the new size is one past the deepest
//! level whose sup norm is at least 1/2, and everything below that is stored
//! as exact zero. Under normal operating conditions (all inputs within a
//! small distance of exact one-hot data) live levels stay near 1 in sup norm
//! and dead levels near 0, so the truncation reconstructs the discrete stack
//! size exactly.

use thiserror::Error;

use crate::automata::ideal::IdealStack;
use crate::util::sup_norm;

/// Default bound on the number of live stack levels.
pub const DEFAULT_STACK_CAPACITY: usize = 4096;

/// Errors from stack construction and the stack operator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StackError {
    #[error("sensitivity must be positive, got {0}")]
    NonPositiveSensitivity(f64),
    #[error("stack capacity {capacity} exceeded")]
    CapacityExceeded { capacity: usize },
    #[error("expected vectors of dimension {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("component {value} at level {level} outside [0,1]")]
    ComponentOutOfRange { level: usize, value: f64 },
}

/// Sigmoid steepness parameter H. Strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivity(f64);

impl Sensitivity {
    pub fn new(h: f64) -> Result<Self, StackError> {
        if h > 0.0 && h.is_finite() {
            Ok(Sensitivity(h))
        } else {
            Err(StackError::NonPositiveSensitivity(h))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Logistic sigmoid `1 / (1 + exp(-H x))`.
///
/// Monotone in `x` with `sigmoid(0, _) = 1/2`; extreme arguments saturate to
/// exactly 0.0 or 1.0 in finite precision.
pub fn sigmoid(x: f64, h: Sensitivity) -> f64 {
    1.0 / (1.0 + (-h.value() * x).exp())
}

/// Gate scalars and candidate push vector driving one stack operation.
///
/// `p_plus` near 1 behaves like a push of `push_vector`, `p_minus` near 1
/// like a pop, both near 0 like the identity. Idealized actions satisfy
/// `p_plus + p_minus <= 1` exactly; actions computed by the network satisfy
/// it up to the run's deviation bound.
#[derive(Debug, Clone, PartialEq)]
pub struct StackAction {
    pub p_plus: f64,
    pub p_minus: f64,
    pub push_vector: Vec<f64>,
}

impl StackAction {
    pub fn push(push_vector: Vec<f64>) -> Self {
        StackAction {
            p_plus: 1.0,
            p_minus: 0.0,
            push_vector,
        }
    }

    pub fn pop(m2: usize) -> Self {
        StackAction {
            p_plus: 0.0,
            p_minus: 1.0,
            push_vector: vec![0.0; m2],
        }
    }

    pub fn noop(m2: usize) -> Self {
        StackAction {
            p_plus: 0.0,
            p_minus: 0.0,
            push_vector: vec![0.0; m2],
        }
    }
}

/// Top-of-stack reading: the top level's components followed by an
/// empty-stack indicator equal to `1 - ||K_0||_inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reading(pub Vec<f64>);

impl Reading {
    /// Dimension m2 + 1.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// The trailing empty-stack indicator component.
    pub fn empty_component(&self) -> f64 {
        *self.0.last().expect("reading is never zero-dimensional")
    }
}

/// A differentiable stack value. Immutable; operations return new stacks.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffStack {
    /// Live levels only, `levels[0]` is the top. Levels at index >= s are
    /// implicitly exact zero and never stored.
    levels: Vec<Vec<f64>>,
    m2: usize,
    capacity: usize,
}

impl DiffStack {
    /// Empty stack with the default capacity.
    pub fn empty(m2: usize) -> Self {
        Self::with_capacity(m2, DEFAULT_STACK_CAPACITY)
    }

    pub fn with_capacity(m2: usize, capacity: usize) -> Self {
        DiffStack {
            levels: Vec::new(),
            m2,
            capacity,
        }
    }

    /// Builds a stack from explicit live levels, validating dimensions and
    /// component ranges.
    pub fn from_levels(
        m2: usize,
        capacity: usize,
        levels: Vec<Vec<f64>>,
    ) -> Result<Self, StackError> {
        if levels.len() > capacity {
            return Err(StackError::CapacityExceeded { capacity });
        }
        for (i, level) in levels.iter().enumerate() {
            if level.len() != m2 {
                return Err(StackError::DimensionMismatch {
                    expected: m2,
                    actual: level.len(),
                });
            }
            for &x in level {
                if !(0.0..=1.0).contains(&x) {
                    return Err(StackError::ComponentOutOfRange { level: i, value: x });
                }
            }
        }
        Ok(DiffStack {
            levels,
            m2,
            capacity,
        })
    }

    /// Stack alphabet dimension m2.
    pub fn alphabet_size(&self) -> usize {
        self.m2
    }

    /// Stack size s: the number of live levels.
    pub fn size(&self) -> usize {
        self.levels.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Level `i`, or `None` for the (exactly zero) levels at `i >= s`.
    pub fn level(&self, i: usize) -> Option<&[f64]> {
        self.levels.get(i).map(|v| v.as_slice())
    }

    /// Component `j` of level `i`; 0.0 beyond the live region.
    pub fn component(&self, i: usize, j: usize) -> f64 {
        self.levels.get(i).map_or(0.0, |v| v[j])
    }

    /// Iterator over live levels, top first.
    pub fn levels(&self) -> impl Iterator<Item = &[f64]> {
        self.levels.iter().map(|v| v.as_slice())
    }

    /// Trace dump: one line per live level, tab-separated components, full
    /// precision decimal.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for level in &self.levels {
            let line: Vec<String> = level.iter().map(|x| format!("{x}")).collect();
            out.push_str(&line.join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Applies the parametrized stack operator to `stack`.
///
/// Raw levels are computed for indices `0..=s` (the level at `s` is where a
/// push lands the old bottom; deeper levels cannot reach sup norm 1/2 because
/// their pre-activation is exactly -1/2). The candidate vector plays the role
/// of the level above the top. The result is truncated at the deepest raw
/// level with sup norm >= 1/2.
pub fn apply_operator(
    stack: &DiffStack,
    action: &StackAction,
    h: Sensitivity,
) -> Result<DiffStack, StackError> {
    let m2 = stack.m2;
    if action.push_vector.len() != m2 {
        return Err(StackError::DimensionMismatch {
            expected: m2,
            actual: action.push_vector.len(),
        });
    }
    let s = stack.size();
    let stay = 1.0 - action.p_plus - action.p_minus;

    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(s + 1);
    for i in 0..=s {
        let mut level = vec![0.0; m2];
        for (j, slot) in level.iter_mut().enumerate() {
            let below = if i == 0 {
                action.push_vector[j]
            } else {
                stack.component(i - 1, j)
            };
            let above = stack.component(i + 1, j);
            let here = stack.component(i, j);
            let x = action.p_plus * below + action.p_minus * above + stay * here - 0.5;
            *slot = sigmoid(x, h);
        }
        raw.push(level);
    }

    let new_size = raw
        .iter()
        .rposition(|level| sup_norm(level) >= 0.5)
        .map_or(0, |i| i + 1);
    if new_size > stack.capacity {
        return Err(StackError::CapacityExceeded {
            capacity: stack.capacity,
        });
    }
    raw.truncate(new_size);
    Ok(DiffStack {
        levels: raw,
        m2,
        capacity: stack.capacity,
    })
}

/// Builds the stack reading from the top level (zero vector when empty).
pub fn reading(stack: &DiffStack) -> Reading {
    let m2 = stack.alphabet_size();
    let mut r = Vec::with_capacity(m2 + 1);
    match stack.level(0) {
        Some(top) => {
            r.extend_from_slice(top);
            r.push(1.0 - sup_norm(top));
        }
        None => {
            r.extend(std::iter::repeat_n(0.0, m2));
            r.push(1.0);
        }
    }
    Reading(r)
}

/// Sup over all depths of the componentwise sup-norm distance between a
/// differentiable stack and an idealized stack. Levels past either stack's
/// size compare against exact zero.
pub fn stack_distance(stack: &DiffStack, ideal: &IdealStack) -> f64 {
    debug_assert_eq!(stack.alphabet_size(), ideal.alphabet_size());
    let depth = stack.size().max(ideal.size());
    let m2 = stack.alphabet_size();
    let mut worst = 0.0f64;
    for i in 0..depth {
        for j in 0..m2 {
            let d = (stack.component(i, j) - ideal.component(i, j)).abs();
            worst = worst.max(d);
        }
    }
    worst
}
