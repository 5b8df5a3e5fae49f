//! Pushdown automata compiled into tensor-weighted recurrent networks with a
//! differentiable stack.
//!
//! The toolkit covers the full loop:
//!
//! - [`automata`]: symbolic machines, validation, the exact simulator, and
//!   the exact one-hot vectorized machine (plus the stack-free special case).
//! - [`encoding`]: compiling a rule table into four binary weight tensors and
//!   extracting the rules back out, with resource accounting.
//! - [`stack`]: the differentiable stack and its parametrized
//!   push/pop/identity operator.
//! - [`network`]: the recurrent machine driving state vector and stack from
//!   the weight tensors.
//! - [`stability`]: deviation traces against the exact orbit, sensitivity
//!   calibration, perturbation checks, bound suites, and noise sweeps.
//! - [`grammars`]: built-in example machines, corpus generation, and the
//!   machine spec text format.
//!
//! The guiding property is orbital stability: started from the same
//! configuration, the network's state vector and stack stay within a chosen
//! epsilon of the exact machine's one-hot orbit at every step, for strings of
//! any length, once the sigmoid sensitivity is large enough. The
//! [`stability`] module measures exactly that.

pub mod automata;
pub mod encoding;
pub mod grammars;
pub mod network;
pub mod stability;
pub mod stack;
pub mod util;

pub use automata::ideal::{
    ideal_apply, ideal_reading, step_ideal_vectorized, IdealStack, IdealState,
};
pub use automata::{
    run_classical, run_classical_with_trace, step_classical, validate_spec, ClassicalRun,
    ClassicalStack, PdaSpec, RunError, SpecViolation, StackOp, ValidationErrors,
};
pub use encoding::{
    encode_weights, extract_rules, parse_tensors, weight_counts, write_tensors, ExtractError,
    NamingMetadata, TensorFormatError, WeightBudget, WeightTensors,
};
pub use grammars::{
    builtin, calibration_corpus, default_end_symbol, gen_corpus, parse_corpus, parse_spec_text,
    random_spec, write_corpus, write_spec_text, Builtin, CorpusEntry, CorpusError, CorpusMode,
    LabeledCorpus, Provenance, SpecParseError,
};
pub use network::{
    nn_run, nn_step, nn_trace, write_trace_tsv, NetworkError, NeuralState, RunOptions, RunReport,
    TraceStep,
};
pub use stability::{
    corpus_evidence, deviation_trace, deviation_trace_with_tensors, find_min_h,
    find_min_h_for_perturbation, lemma_suite, perturbation_step_check, weight_noise_sweep,
    CalibrationOptions, CalibrationResult, DeviationTrace, LabError, LemmaReport,
    LemmaSuiteOptions, PerturbationReport, SweepRow,
};
pub use stack::{
    apply_operator, reading, sigmoid, stack_distance, DiffStack, Reading, Sensitivity, StackAction,
    StackError, DEFAULT_STACK_CAPACITY,
};
