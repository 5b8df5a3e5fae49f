//! Built-in example machines, labeled-corpus generation, and the machine
//! spec text format.
//!
//! Every built-in grammar carries an explicit end-of-string character as its
//! last input character; corpus generators append it automatically, so the
//! enumerated or sampled strings themselves never contain it. Corpus labels
//! always come from the exact simulator, never by hand.

mod sampler;

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::automata::{run_classical, PdaSpec, RunError, StackOp};
use sampler::CompletionTable;

/// The bundled example machines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// Balanced parentheses: two states, inputs `l r e`, one stack character.
    Parens,
    /// Two bracket kinds that must nest properly: inputs `l1 r1 l2 r2 e`,
    /// stack characters `x y`.
    Dyck2,
    /// `a^k b^k`: a counting stack plus a phase state, inputs `a b e`.
    AnBn,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::Parens, Builtin::Dyck2, Builtin::AnBn];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Parens => "parens",
            Builtin::Dyck2 => "dyck2",
            Builtin::AnBn => "anbn",
        }
    }
}

impl std::str::FromStr for Builtin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "parens" => Ok(Builtin::Parens),
            "dyck2" => Ok(Builtin::Dyck2),
            "anbn" => Ok(Builtin::AnBn),
            other => Err(format!(
                "unknown builtin {other:?} (expected parens, dyck2 or anbn)"
            )),
        }
    }
}

struct SpecBuilder {
    spec: PdaSpec,
}

impl SpecBuilder {
    fn new(states: &[&str], inputs: &[&str], stack: &[&str], start: &str, accept: &[&str]) -> Self {
        let spec = PdaSpec {
            states: states.iter().map(|s| s.to_string()).collect(),
            input_alphabet: inputs.iter().map(|s| s.to_string()).collect(),
            stack_alphabet: stack.iter().map(|s| s.to_string()).collect(),
            start_state: states
                .iter()
                .position(|&s| s == start)
                .expect("unknown start state"),
            accept_states: accept
                .iter()
                .map(|a| {
                    states
                        .iter()
                        .position(|s| s == a)
                        .expect("unknown accept state")
                })
                .collect(),
            transitions: BTreeMap::new(),
        };
        SpecBuilder { spec }
    }

    fn rule(mut self, state: &str, input: &str, reading: &str, next: &str, op: StackOp) -> Self {
        let q = self.spec.state_index(state).expect("unknown state");
        let a = self.spec.input_index(input).expect("unknown input");
        let r = if reading == "EMPTY" {
            self.spec.empty_reading()
        } else {
            self.spec
                .stack_index(reading)
                .expect("unknown stack character")
        };
        let target = self.spec.state_index(next).expect("unknown target");
        let previous = self.spec.transitions.insert((q, a, r), (target, op));
        assert!(
            previous.is_none(),
            "duplicate rule ({state}, {input}, {reading})"
        );
        self
    }

    fn finish(self) -> PdaSpec {
        debug_assert!(crate::automata::validate_spec(&self.spec).is_ok());
        self.spec
    }
}

/// Returns a validated built-in machine.
pub fn builtin(which: Builtin) -> PdaSpec {
    let push = StackOp::Push(0);
    match which {
        Builtin::Parens => {
            SpecBuilder::new(&["ok", "fail"], &["l", "r", "e"], &["b"], "ok", &["ok"])
                .rule("ok", "l", "b", "ok", push)
                .rule("ok", "l", "EMPTY", "ok", push)
                .rule("fail", "l", "b", "fail", push)
                .rule("fail", "l", "EMPTY", "fail", push)
                .rule("ok", "r", "b", "ok", StackOp::Pop)
                .rule("ok", "r", "EMPTY", "fail", StackOp::Pop)
                .rule("fail", "r", "b", "fail", StackOp::Pop)
                .rule("fail", "r", "EMPTY", "fail", StackOp::Pop)
                .rule("ok", "e", "b", "fail", StackOp::Noop)
                .rule("ok", "e", "EMPTY", "ok", StackOp::Noop)
                .rule("fail", "e", "b", "fail", StackOp::Noop)
                .rule("fail", "e", "EMPTY", "fail", StackOp::Noop)
                .finish()
        }
        Builtin::Dyck2 => {
            let mut b = SpecBuilder::new(
                &["ok", "fail"],
                &["l1", "r1", "l2", "r2", "e"],
                &["x", "y"],
                "ok",
                &["ok"],
            );
            for reading in ["x", "y", "EMPTY"] {
                b = b.rule("ok", "l1", reading, "ok", StackOp::Push(0)).rule(
                    "ok",
                    "l2",
                    reading,
                    "ok",
                    StackOp::Push(1),
                );
                for input in ["l1", "r1", "l2", "r2", "e"] {
                    b = b.rule("fail", input, reading, "fail", StackOp::Noop);
                }
            }
            b.rule("ok", "r1", "x", "ok", StackOp::Pop)
                .rule("ok", "r1", "y", "fail", StackOp::Noop)
                .rule("ok", "r1", "EMPTY", "fail", StackOp::Noop)
                .rule("ok", "r2", "y", "ok", StackOp::Pop)
                .rule("ok", "r2", "x", "fail", StackOp::Noop)
                .rule("ok", "r2", "EMPTY", "fail", StackOp::Noop)
                .rule("ok", "e", "x", "fail", StackOp::Noop)
                .rule("ok", "e", "y", "fail", StackOp::Noop)
                .rule("ok", "e", "EMPTY", "ok", StackOp::Noop)
                .finish()
        }
        Builtin::AnBn => SpecBuilder::new(
            &["more_a", "more_b", "fail"],
            &["a", "b", "e"],
            &["x"],
            "more_a",
            &["more_a", "more_b"],
        )
        .rule("more_a", "a", "x", "more_a", push)
        .rule("more_a", "a", "EMPTY", "more_a", push)
        .rule("more_a", "b", "x", "more_b", StackOp::Pop)
        .rule("more_a", "b", "EMPTY", "fail", StackOp::Noop)
        .rule("more_a", "e", "x", "fail", StackOp::Noop)
        .rule("more_a", "e", "EMPTY", "more_a", StackOp::Noop)
        .rule("more_b", "a", "x", "fail", StackOp::Noop)
        .rule("more_b", "a", "EMPTY", "fail", StackOp::Noop)
        .rule("more_b", "b", "x", "more_b", StackOp::Pop)
        .rule("more_b", "b", "EMPTY", "fail", StackOp::Noop)
        .rule("more_b", "e", "x", "fail", StackOp::Noop)
        .rule("more_b", "e", "EMPTY", "more_b", StackOp::Noop)
        .rule("fail", "a", "x", "fail", StackOp::Noop)
        .rule("fail", "a", "EMPTY", "fail", StackOp::Noop)
        .rule("fail", "b", "x", "fail", StackOp::Noop)
        .rule("fail", "b", "EMPTY", "fail", StackOp::Noop)
        .rule("fail", "e", "x", "fail", StackOp::Noop)
        .rule("fail", "e", "EMPTY", "fail", StackOp::Noop)
        .finish(),
    }
}

/// End-of-string character convention: the last input character. Holds for
/// every built-in; spec files that order their alphabet differently pass the
/// marker explicitly.
pub fn default_end_symbol(spec: &PdaSpec) -> usize {
    spec.input_alphabet_size() - 1
}

/// Uniformly random valid machine over the given dimensions: every rule
/// triple gets a random target state and stack action. Used by round-trip
/// and fuzz tests.
pub fn random_spec<R: Rng>(n: usize, m1: usize, m2: usize, rng: &mut R) -> PdaSpec {
    assert!(n >= 1 && m1 >= 1 && m2 >= 1);
    let mut transitions = BTreeMap::new();
    for q in 0..n {
        for a in 0..m1 {
            for r in 0..=m2 {
                let target = rng.random_range(0..n);
                let op = match rng.random_range(0..3) {
                    0 => StackOp::Push(rng.random_range(0..m2)),
                    1 => StackOp::Pop,
                    _ => StackOp::Noop,
                };
                transitions.insert((q, a, r), (target, op));
            }
        }
    }
    PdaSpec {
        states: (0..n).map(|i| format!("q{i}")).collect(),
        input_alphabet: (0..m1).map(|i| format!("a{i}")).collect(),
        stack_alphabet: (0..m2).map(|i| format!("g{i}")).collect(),
        start_state: rng.random_range(0..n),
        accept_states: (0..n).filter(|_| rng.random_bool(0.5)).collect(),
        transitions,
    }
}

/// How a corpus was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Exhaustive {
        max_len: usize,
    },
    Random {
        count: usize,
        max_len: usize,
        seed: u64,
    },
    /// Loaded from a file without a provenance header.
    External,
}

/// One labeled string: the full input sequence (end marker included) and the
/// exact machine's verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub symbols: Vec<usize>,
    pub accept: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCorpus {
    pub entries: Vec<CorpusEntry>,
    pub provenance: Provenance,
}

impl LabeledCorpus {
    pub fn positive_count(&self) -> usize {
        self.entries.iter().filter(|e| e.accept).count()
    }
}

/// Corpus generation mode. Lengths count the characters before the appended
/// end marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusMode {
    /// Every string over the non-end characters up to the given length.
    Exhaustive { max_len: usize },
    /// Uniform random strings plus a 50% quota of directed accepted strings.
    Random {
        count: usize,
        max_len: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("end symbol {symbol} out of range (alphabet size {limit})")]
    BadEndSymbol { symbol: usize, limit: usize },
    #[error("could not reach the accepted-string quota within {attempts} attempts")]
    PositiveStarvation { attempts: usize },
    #[error("corpus line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("corpus line {line}: stored label disagrees with the exact machine")]
    LabelMismatch { line: usize },
    #[error(transparent)]
    Run(#[from] RunError),
}

const STARVATION_ATTEMPTS: usize = 1_000_000;

/// Generates a labeled corpus; labels come from [`run_classical`].
pub fn gen_corpus(
    spec: &PdaSpec,
    end_symbol: usize,
    mode: CorpusMode,
) -> Result<LabeledCorpus, CorpusError> {
    let m1 = spec.input_alphabet_size();
    if end_symbol >= m1 {
        return Err(CorpusError::BadEndSymbol {
            symbol: end_symbol,
            limit: m1,
        });
    }
    let others: Vec<usize> = (0..m1).filter(|&a| a != end_symbol).collect();

    let label = |symbols: Vec<usize>| -> Result<CorpusEntry, CorpusError> {
        let accept = run_classical(spec, &symbols)?.accept;
        Ok(CorpusEntry { symbols, accept })
    };

    let mut entries = Vec::new();
    match mode {
        CorpusMode::Exhaustive { max_len } => {
            for len in 0..=max_len {
                let mut digits = vec![0usize; len];
                loop {
                    let mut symbols: Vec<usize> = digits.iter().map(|&d| others[d]).collect();
                    symbols.push(end_symbol);
                    entries.push(label(symbols)?);
                    // Odometer over the non-end characters.
                    let mut pos = len;
                    loop {
                        if pos == 0 {
                            break;
                        }
                        pos -= 1;
                        digits[pos] += 1;
                        if digits[pos] < others.len() {
                            break;
                        }
                        digits[pos] = 0;
                    }
                    if digits.iter().all(|&d| d == 0) {
                        break;
                    }
                }
            }
            Ok(LabeledCorpus {
                entries,
                provenance: Provenance::Exhaustive { max_len },
            })
        }
        CorpusMode::Random {
            count,
            max_len,
            seed,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let table = CompletionTable::build(spec, end_symbol);
            let quota = count / 2;
            let mut attempts = 0usize;
            let mut positives = 0usize;
            while positives < quota {
                attempts += 1;
                if attempts > STARVATION_ATTEMPTS {
                    return Err(CorpusError::PositiveStarvation {
                        attempts: STARVATION_ATTEMPTS,
                    });
                }
                let Some(symbols) = table.sample_positive(spec, max_len, &mut rng) else {
                    continue;
                };
                let entry = label(symbols)?;
                if entry.accept {
                    positives += 1;
                    entries.push(entry);
                }
            }
            while entries.len() < count {
                let len = rng.random_range(0..=max_len);
                let mut symbols: Vec<usize> = (0..len)
                    .map(|_| others[rng.random_range(0..others.len())])
                    .collect();
                symbols.push(end_symbol);
                entries.push(label(symbols)?);
            }
            Ok(LabeledCorpus {
                entries,
                provenance: Provenance::Random {
                    count,
                    max_len,
                    seed,
                },
            })
        }
    }
}

/// Calibration corpus: exhaustive short strings (complete coverage of the
/// rule table) mixed with random long strings for depth stress, half of the
/// random ones accepted. Returns raw strings; deviation measurements do not
/// need labels.
pub fn calibration_corpus(
    spec: &PdaSpec,
    end_symbol: usize,
    exhaustive_len: usize,
    random_count: usize,
    random_max_len: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, CorpusError> {
    let mut strings: Vec<Vec<usize>> = gen_corpus(
        spec,
        end_symbol,
        CorpusMode::Exhaustive {
            max_len: exhaustive_len,
        },
    )?
    .entries
    .into_iter()
    .map(|e| e.symbols)
    .collect();
    if random_count > 0 {
        let random = gen_corpus(
            spec,
            end_symbol,
            CorpusMode::Random {
                count: random_count,
                max_len: random_max_len,
                seed,
            },
        )?;
        strings.extend(random.entries.into_iter().map(|e| e.symbols));
    }
    Ok(strings)
}

/// Renders a corpus: a provenance comment, then one `label symbols...` line
/// per entry using the machine's character names.
pub fn write_corpus(corpus: &LabeledCorpus, spec: &PdaSpec) -> String {
    let mut out = String::new();
    match corpus.provenance {
        Provenance::Exhaustive { max_len } => {
            out.push_str(&format!("# provenance: exhaustive max_len={max_len}\n"));
        }
        Provenance::Random {
            count,
            max_len,
            seed,
        } => {
            out.push_str(&format!(
                "# provenance: random count={count} max_len={max_len} seed={seed}\n"
            ));
        }
        Provenance::External => out.push_str("# provenance: external\n"),
    }
    for entry in &corpus.entries {
        out.push_str(if entry.accept { "1" } else { "0" });
        for &symbol in &entry.symbols {
            out.push(' ');
            out.push_str(&spec.input_alphabet[symbol]);
        }
        out.push('\n');
    }
    out
}

fn parse_provenance(comment: &str) -> Option<Provenance> {
    let rest = comment.strip_prefix("provenance:")?.trim();
    let mut fields = BTreeMap::new();
    let mut kind = None;
    for token in rest.split_whitespace() {
        match token.split_once('=') {
            Some((key, value)) => {
                fields.insert(key.to_string(), value.parse::<u64>().ok()?);
            }
            None => kind = Some(token.to_string()),
        }
    }
    match kind.as_deref() {
        Some("exhaustive") => Some(Provenance::Exhaustive {
            max_len: *fields.get("max_len")? as usize,
        }),
        Some("random") => Some(Provenance::Random {
            count: *fields.get("count")? as usize,
            max_len: *fields.get("max_len")? as usize,
            seed: *fields.get("seed")?,
        }),
        _ => Some(Provenance::External),
    }
}

/// Parses a corpus file and re-verifies every stored label against the exact
/// machine.
pub fn parse_corpus(text: &str, spec: &PdaSpec) -> Result<LabeledCorpus, CorpusError> {
    let mut provenance = Provenance::External;
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(p) = parse_provenance(comment.trim()) {
                provenance = p;
            }
            continue;
        }
        let mut tokens = line.split_whitespace();
        let accept = match tokens.next() {
            Some("1") => true,
            Some("0") => false,
            other => {
                return Err(CorpusError::Parse {
                    line: line_no,
                    message: format!("expected label 0 or 1, found {other:?}"),
                })
            }
        };
        let mut symbols = Vec::new();
        for token in tokens {
            let symbol = spec.input_index(token).ok_or_else(|| CorpusError::Parse {
                line: line_no,
                message: format!("unknown input character {token:?}"),
            })?;
            symbols.push(symbol);
        }
        if run_classical(spec, &symbols)?.accept != accept {
            return Err(CorpusError::LabelMismatch { line: line_no });
        }
        entries.push(CorpusEntry { symbols, accept });
    }
    Ok(LabeledCorpus {
        entries,
        provenance,
    })
}

/// Errors from the machine spec text format.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("spec line {line}: {message}")]
pub struct SpecParseError {
    pub line: usize,
    pub message: String,
}

fn parse_error(line: usize, message: impl Into<String>) -> SpecParseError {
    SpecParseError {
        line,
        message: message.into(),
    }
}

/// Parses the machine spec text format: `states:`, `input:`, `stack:`,
/// `start:`, `accept:` declarations and one `rule:` line per transition.
/// Declaration order fixes all vector indices; rule order is irrelevant.
/// `#` starts a comment anywhere on a line. The parsed machine is validated
/// before it is returned.
pub fn parse_spec_text(text: &str) -> Result<PdaSpec, SpecParseError> {
    let mut states: Option<(usize, Vec<String>)> = None;
    let mut inputs: Option<(usize, Vec<String>)> = None;
    let mut stack: Option<(usize, Vec<String>)> = None;
    let mut start: Option<(usize, String)> = None;
    let mut accept: Option<(usize, Vec<String>)> = None;
    let mut rules: Vec<(usize, Vec<String>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| parse_error(line_no, "expected `<keyword>: ...`"))?;
        let tokens: Vec<String> = rest.split_whitespace().map(|t| t.to_string()).collect();
        let store = |slot: &mut Option<(usize, Vec<String>)>, what: &str| {
            if slot.is_some() {
                Err(parse_error(
                    line_no,
                    format!("duplicate {what} declaration"),
                ))
            } else {
                *slot = Some((line_no, tokens.clone()));
                Ok(())
            }
        };
        match key.trim() {
            "states" => store(&mut states, "states")?,
            "input" => store(&mut inputs, "input")?,
            "stack" => store(&mut stack, "stack")?,
            "accept" => store(&mut accept, "accept")?,
            "start" => {
                if start.is_some() {
                    return Err(parse_error(line_no, "duplicate start declaration"));
                }
                if tokens.len() != 1 {
                    return Err(parse_error(line_no, "start expects exactly one state name"));
                }
                start = Some((line_no, tokens[0].clone()));
            }
            "rule" => rules.push((line_no, tokens)),
            other => return Err(parse_error(line_no, format!("unknown keyword {other:?}"))),
        }
    }

    let (states_line, states) =
        states.ok_or_else(|| parse_error(0, "missing states declaration"))?;
    let (_, input_alphabet) = inputs.ok_or_else(|| parse_error(0, "missing input declaration"))?;
    let (stack_line, stack_alphabet) =
        stack.ok_or_else(|| parse_error(0, "missing stack declaration"))?;
    let (start_line, start_name) =
        start.ok_or_else(|| parse_error(0, "missing start declaration"))?;
    let (accept_line, accept_names) =
        accept.ok_or_else(|| parse_error(0, "missing accept declaration"))?;

    if stack_alphabet.iter().any(|s| s == "EMPTY") {
        return Err(parse_error(
            stack_line,
            "stack character may not be named EMPTY",
        ));
    }

    let find =
        |names: &[String], name: &str, what: &str, line: usize| -> Result<usize, SpecParseError> {
            names
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| parse_error(line, format!("unknown {what} name {name:?}")))
        };

    let start_state = find(&states, &start_name, "state", start_line)?;
    let mut accept_states = BTreeSet::new();
    for name in &accept_names {
        accept_states.insert(find(&states, name, "state", accept_line)?);
    }

    let mut transitions = BTreeMap::new();
    for (line_no, tokens) in rules {
        if tokens.len() != 6 || tokens[3] != "->" {
            return Err(parse_error(
                line_no,
                "rule expects `<state> <input> <stack|EMPTY> -> <state> <push:X|pop|noop>`",
            ));
        }
        let q = find(&states, &tokens[0], "state", line_no)?;
        let a = find(&input_alphabet, &tokens[1], "input character", line_no)?;
        let r = if tokens[2] == "EMPTY" {
            stack_alphabet.len()
        } else {
            find(&stack_alphabet, &tokens[2], "stack character", line_no)?
        };
        let target = find(&states, &tokens[4], "state", line_no)?;
        let op = match tokens[5].as_str() {
            "pop" => StackOp::Pop,
            "noop" => StackOp::Noop,
            other => match other.strip_prefix("push:") {
                Some(name) => {
                    StackOp::Push(find(&stack_alphabet, name, "stack character", line_no)?)
                }
                None => {
                    return Err(parse_error(
                        line_no,
                        format!("unknown stack action {other:?}"),
                    ))
                }
            },
        };
        if transitions.insert((q, a, r), (target, op)).is_some() {
            return Err(parse_error(
                line_no,
                format!(
                    "duplicate rule for ({}, {}, {})",
                    tokens[0], tokens[1], tokens[2]
                ),
            ));
        }
    }

    let spec = PdaSpec {
        states,
        input_alphabet,
        stack_alphabet,
        start_state,
        accept_states,
        transitions,
    };
    crate::automata::validate_spec(&spec)
        .map_err(|errs| parse_error(states_line, format!("invalid machine:\n{errs}")))?;
    Ok(spec)
}

/// Renders a machine in the spec text format; `parse_spec_text` of the output
/// reproduces the machine exactly.
pub fn write_spec_text(spec: &PdaSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("states: {}\n", spec.states.join(" ")));
    out.push_str(&format!("input: {}\n", spec.input_alphabet.join(" ")));
    out.push_str(&format!("stack: {}\n", spec.stack_alphabet.join(" ")));
    out.push_str(&format!("start: {}\n", spec.states[spec.start_state]));
    let accept: Vec<&str> = spec
        .accept_states
        .iter()
        .map(|&q| spec.states[q].as_str())
        .collect();
    out.push_str(&format!("accept: {}\n", accept.join(" ")));
    for (&(q, a, r), &(target, op)) in &spec.transitions {
        let reading = if r == spec.empty_reading() {
            "EMPTY"
        } else {
            spec.stack_alphabet[r].as_str()
        };
        let op_text = match op {
            StackOp::Push(c) => format!("push:{}", spec.stack_alphabet[c]),
            StackOp::Pop => "pop".to_string(),
            StackOp::Noop => "noop".to_string(),
        };
        out.push_str(&format!(
            "rule: {} {} {} -> {} {}\n",
            spec.states[q], spec.input_alphabet[a], reading, spec.states[target], op_text
        ));
    }
    out
}
