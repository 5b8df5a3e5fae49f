//! Directed sampling of accepted strings.
//!
//! Uniform sampling almost never hits an accepted string at useful lengths
//! (balanced strings of length 200 are vanishingly rare), so the positive
//! half of a random corpus is built by a guided walk: precompute, for every
//! configuration shape, the length of the shortest accepting completion, then
//! at each step choose uniformly among the input characters that keep an
//! accepting completion within the remaining budget.
//!
//! The shortest-completion table is the standard summary construction for
//! pushdown systems, adapted to machines where every move consumes exactly
//! one input character:
//!
//! - `pop_cost[q][g][q2]`: fewest characters that take state `q` with `g` on
//!   top to state `q2` with `g` just popped (the stack below `g` untouched).
//! - `acc_above[q][g]`: fewest characters until the end marker can be read
//!   into an accept state, never popping below `g`.
//! - `acc_empty[q]`: the same starting from the empty stack.
//!
//! All tables are finite fixpoints over min-plus relaxations; `None` means
//! unreachable.

use rand::Rng;

use crate::automata::{step_classical, ClassicalStack, PdaSpec, StackOp};

fn min_opt(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn add_opt(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    a?.checked_add(b?)
}

pub(super) struct CompletionTable {
    state_count: usize,
    end_symbol: usize,
    /// Indexed [q][g][q2].
    pop_cost: Vec<Vec<Vec<Option<u32>>>>,
    /// Indexed [q][g].
    acc_above: Vec<Vec<Option<u32>>>,
    /// Indexed [q].
    acc_empty: Vec<Option<u32>>,
}

// The min-plus relaxations read clearest with plain index loops.
#[allow(clippy::needless_range_loop)]
impl CompletionTable {
    pub(super) fn build(spec: &PdaSpec, end_symbol: usize) -> Self {
        let n = spec.state_count();
        let m1 = spec.input_alphabet_size();
        let m2 = spec.stack_alphabet_size();

        let mut pop_cost = vec![vec![vec![None; n]; m2]; n];
        loop {
            let mut changed = false;
            for q in 0..n {
                for g in 0..m2 {
                    for a in 0..m1 {
                        if a == end_symbol {
                            continue;
                        }
                        let Some((q1, op)) = spec.transition(q, a, g) else {
                            continue;
                        };
                        match op {
                            StackOp::Pop => {
                                let cand = Some(1);
                                let slot = &mut pop_cost[q][g][q1];
                                let merged = min_opt(*slot, cand);
                                changed |= merged != *slot;
                                *slot = merged;
                            }
                            StackOp::Noop => {
                                for q2 in 0..n {
                                    let cand = add_opt(Some(1), pop_cost[q1][g][q2]);
                                    let slot = &mut pop_cost[q][g][q2];
                                    let merged = min_opt(*slot, cand);
                                    changed |= merged != *slot;
                                    *slot = merged;
                                }
                            }
                            StackOp::Push(g2) => {
                                for q3 in 0..n {
                                    let inner = add_opt(Some(1), pop_cost[q1][g2][q3]);
                                    for q2 in 0..n {
                                        let cand = add_opt(inner, pop_cost[q3][g][q2]);
                                        let slot = &mut pop_cost[q][g][q2];
                                        let merged = min_opt(*slot, cand);
                                        changed |= merged != *slot;
                                        *slot = merged;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let accepts = |state: usize, input: usize, reading: usize| -> bool {
            spec.transition(state, input, reading)
                .is_some_and(|(next, _)| spec.accept_states.contains(&next))
        };

        let mut acc_above = vec![vec![None; m2]; n];
        for (q, row) in acc_above.iter_mut().enumerate() {
            for (g, slot) in row.iter_mut().enumerate() {
                if accepts(q, end_symbol, g) {
                    *slot = Some(0);
                }
            }
        }
        loop {
            let mut changed = false;
            for q in 0..n {
                for g in 0..m2 {
                    for a in 0..m1 {
                        if a == end_symbol {
                            continue;
                        }
                        let Some((q1, op)) = spec.transition(q, a, g) else {
                            continue;
                        };
                        let cand = match op {
                            StackOp::Pop => None,
                            StackOp::Noop => add_opt(Some(1), acc_above[q1][g]),
                            StackOp::Push(g2) => {
                                let mut best = acc_above[q1][g2];
                                for q3 in 0..n {
                                    best = min_opt(
                                        best,
                                        add_opt(pop_cost[q1][g2][q3], acc_above[q3][g]),
                                    );
                                }
                                add_opt(Some(1), best)
                            }
                        };
                        let slot = &mut acc_above[q][g];
                        let merged = min_opt(*slot, cand);
                        changed |= merged != *slot;
                        *slot = merged;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let empty_reading = spec.empty_reading();
        let mut acc_empty = vec![None; n];
        for (q, slot) in acc_empty.iter_mut().enumerate() {
            if accepts(q, end_symbol, empty_reading) {
                *slot = Some(0);
            }
        }
        loop {
            let mut changed = false;
            for q in 0..n {
                for a in 0..m1 {
                    if a == end_symbol {
                        continue;
                    }
                    let Some((q1, op)) = spec.transition(q, a, empty_reading) else {
                        continue;
                    };
                    let cand = match op {
                        // Popping the empty stack leaves it empty.
                        StackOp::Pop | StackOp::Noop => add_opt(Some(1), acc_empty[q1]),
                        StackOp::Push(g2) => {
                            let mut best = acc_above[q1][g2];
                            for q3 in 0..n {
                                best = min_opt(best, add_opt(pop_cost[q1][g2][q3], acc_empty[q3]));
                            }
                            add_opt(Some(1), best)
                        }
                    };
                    let slot = &mut acc_empty[q];
                    let merged = min_opt(*slot, cand);
                    changed |= merged != *slot;
                    *slot = merged;
                }
            }
            if !changed {
                break;
            }
        }

        CompletionTable {
            state_count: n,
            end_symbol,
            pop_cost,
            acc_above,
            acc_empty,
        }
    }

    /// Length of the shortest string of non-end characters after which the
    /// end marker lands in an accept state, from the given configuration.
    pub(super) fn min_completion(&self, state: usize, stack: &ClassicalStack) -> Option<u32> {
        let n = self.state_count;
        let depth = stack.depth();
        let mut frontier: Vec<Option<u32>> = vec![None; n];
        frontier[state] = Some(0);
        let mut best = None;
        for popped in 0..=depth {
            match stack.symbol_from_top(popped) {
                Some(g) => {
                    for q in 0..n {
                        best = min_opt(best, add_opt(frontier[q], self.acc_above[q][g]));
                    }
                    let mut next: Vec<Option<u32>> = vec![None; n];
                    for q in 0..n {
                        if frontier[q].is_none() {
                            continue;
                        }
                        for (q2, slot) in next.iter_mut().enumerate() {
                            *slot = min_opt(*slot, add_opt(frontier[q], self.pop_cost[q][g][q2]));
                        }
                    }
                    frontier = next;
                }
                None => {
                    for q in 0..n {
                        best = min_opt(best, add_opt(frontier[q], self.acc_empty[q]));
                    }
                }
            }
        }
        best
    }

    /// Shortest accepted string length for the whole machine, or `None` when
    /// the language is empty.
    pub(super) fn shortest_accepted(&self, spec: &PdaSpec) -> Option<u32> {
        self.min_completion(spec.start_state, &ClassicalStack::new())
    }

    /// Guided random walk producing an accepted string (end marker included)
    /// of at most `max_len + 1` characters, or `None` when no accepted string
    /// that short exists.
    pub(super) fn sample_positive<R: Rng>(
        &self,
        spec: &PdaSpec,
        max_len: usize,
        rng: &mut R,
    ) -> Option<Vec<usize>> {
        let base = self.shortest_accepted(spec)? as usize;
        if base > max_len {
            return None;
        }
        let target = rng.random_range(base..=max_len);
        let mut state = spec.start_state;
        let mut stack = ClassicalStack::new();
        let mut word = Vec::with_capacity(target + 1);
        let mut candidates = Vec::new();
        for step in 0..target {
            let budget = (target - step - 1) as u32;
            candidates.clear();
            for a in 0..spec.input_alphabet_size() {
                if a == self.end_symbol {
                    continue;
                }
                let (q2, stack2) = step_classical(spec, state, &stack, a);
                if self
                    .min_completion(q2, &stack2)
                    .is_some_and(|c| c <= budget)
                {
                    candidates.push(a);
                }
            }
            // No viable continuation means the current configuration already
            // accepts on the end marker; stop short of the target.
            if candidates.is_empty() {
                break;
            }
            let a = candidates[rng.random_range(0..candidates.len())];
            let (q2, stack2) = step_classical(spec, state, &stack, a);
            state = q2;
            stack = stack2;
            word.push(a);
        }
        word.push(self.end_symbol);
        Some(word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::run_classical;
    use crate::grammars::{builtin, Builtin};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parens_min_completion_is_the_depth() {
        let spec = builtin(Builtin::Parens);
        let table = CompletionTable::build(&spec, 2);
        for depth in 0..10usize {
            let stack = ClassicalStack::from_top_symbols(&vec![0; depth]);
            assert_eq!(table.min_completion(0, &stack), Some(depth as u32));
            // The reject state is absorbing: no completion accepts.
            assert_eq!(table.min_completion(1, &stack), None);
        }
    }

    #[test]
    fn anbn_min_completion_counts_remaining_pops() {
        let spec = builtin(Builtin::AnBn);
        let table = CompletionTable::build(&spec, 2);
        let stack = ClassicalStack::from_top_symbols(&[0, 0, 0]);
        assert_eq!(table.min_completion(0, &stack), Some(3));
        assert_eq!(table.min_completion(1, &stack), Some(3));
        assert_eq!(table.min_completion(2, &stack), None);
    }

    #[test]
    fn sampled_positives_are_accepted_by_the_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for b in [Builtin::Parens, Builtin::Dyck2, Builtin::AnBn] {
            let spec = builtin(b);
            let end = spec.input_alphabet_size() - 1;
            let table = CompletionTable::build(&spec, end);
            for _ in 0..50 {
                let word = table.sample_positive(&spec, 40, &mut rng).unwrap();
                assert!(word.len() <= 41);
                assert_eq!(word.last(), Some(&end));
                let run = run_classical(&spec, &word).unwrap();
                assert!(run.accept, "{b:?} rejected a directed sample {word:?}");
            }
        }
    }
}
