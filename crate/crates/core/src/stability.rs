//! Empirical stability verification: lockstep deviation traces against the
//! exact vectorized machine, minimal-sensitivity calibration, single-step
//! perturbation checks, the bound property suites, and weight-noise sweeps.
//!
//! Everything here is seeded and deterministic: identical inputs produce
//! bit-identical reports.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::automata::ideal::{ideal_reading, step_ideal_vectorized, IdealState};
use crate::automata::{ClassicalStack, PdaSpec, RunError};
use crate::encoding::{encode_weights, extract_rules, WeightTensors};
use crate::grammars::LabeledCorpus;
use crate::network::{nn_run, nn_step, NetworkError, NeuralState, RunOptions};
use crate::stack::{
    reading, sigmoid, stack_distance, DiffStack, Sensitivity, StackError, DEFAULT_STACK_CAPACITY,
};
use crate::util::{one_hot, sup_distance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("epsilon {epsilon} outside the supported range (0, 1/14)")]
    EpsilonOutOfRange { epsilon: f64 },
    #[error("no sensitivity at or below the ceiling {ceiling} meets the deviation target")]
    SensitivityCeiling { ceiling: f64 },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Stack(#[from] StackError),
    #[error(transparent)]
    Run(#[from] RunError),
}

/// Per-step sup-norm deviations between a neural run and the exact
/// vectorized run started from the identical configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationTrace {
    pub h: f64,
    pub label: String,
    /// `q_dev[t]` = state-vector deviation at step t; index 0 is the start.
    pub q_dev: Vec<f64>,
    /// `k_dev[t]` = stack deviation (sup over depth) at step t.
    pub k_dev: Vec<f64>,
}

impl DeviationTrace {
    pub fn max_q_dev(&self) -> f64 {
        self.q_dev.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_k_dev(&self) -> f64 {
        self.k_dev.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_dev(&self) -> f64 {
        self.max_q_dev().max(self.max_k_dev())
    }

    pub fn len(&self) -> usize {
        self.q_dev.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_dev.is_empty()
    }
}

/// Runs the neural machine (with the given tensors) and the exact vectorized
/// machine (compiled from the spec) in lockstep from identical starts,
/// recording both deviations at every step.
pub fn deviation_trace_with_tensors(
    spec: &PdaSpec,
    tensors: &WeightTensors,
    input: &[usize],
    h: Sensitivity,
    stack_capacity: usize,
) -> Result<DeviationTrace, LabError> {
    let exact = encode_weights(spec);
    let n = spec.state_count();
    let m1 = spec.input_alphabet_size();
    let m2 = spec.stack_alphabet_size();
    let mut neural = NeuralState::start(n, m2, spec.start_state, stack_capacity);
    let mut ideal = IdealState::start(n, m2, spec.start_state);
    let mut q_dev = Vec::with_capacity(input.len() + 1);
    let mut k_dev = Vec::with_capacity(input.len() + 1);
    q_dev.push(0.0);
    k_dev.push(0.0);
    for &symbol in input {
        if symbol >= m1 {
            return Err(NetworkError::BadInputSymbol {
                position: q_dev.len() - 1,
                symbol,
                limit: m1,
            }
            .into());
        }
        let iv = one_hot(m1, symbol);
        neural = nn_step(tensors, &neural, &iv, h)?;
        ideal = step_ideal_vectorized(&exact, &ideal, &iv);
        q_dev.push(sup_distance(&neural.q, &ideal.q_bar));
        k_dev.push(stack_distance(&neural.stack, &ideal.k_bar));
    }
    let label = if input.len() <= 64 {
        let names: Vec<&str> = input
            .iter()
            .map(|&s| spec.input_alphabet[s].as_str())
            .collect();
        names.join(" ")
    } else {
        format!("len={}", input.len())
    };
    Ok(DeviationTrace {
        h: h.value(),
        label,
        q_dev,
        k_dev,
    })
}

/// As [`deviation_trace_with_tensors`] with the tensors compiled from the
/// spec itself.
pub fn deviation_trace(
    spec: &PdaSpec,
    input: &[usize],
    h: Sensitivity,
    stack_capacity: usize,
) -> Result<DeviationTrace, LabError> {
    deviation_trace_with_tensors(spec, &encode_weights(spec), input, h, stack_capacity)
}

/// Result of the minimal-sensitivity search.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    /// Smallest tested sensitivity meeting the target.
    pub h_star: f64,
    pub epsilon: f64,
    /// Worst deviation observed at `h_star` over the whole corpus.
    pub evidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    pub h_ceiling: f64,
    pub stack_capacity: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            h_ceiling: 1e4,
            stack_capacity: DEFAULT_STACK_CAPACITY,
        }
    }
}

/// Worst deviation over a whole corpus at one sensitivity.
pub fn corpus_evidence(
    spec: &PdaSpec,
    tensors: &WeightTensors,
    corpus: &[Vec<usize>],
    h: Sensitivity,
    stack_capacity: usize,
) -> Result<f64, LabError> {
    let mut worst = 0.0f64;
    for input in corpus {
        let trace = deviation_trace_with_tensors(spec, tensors, input, h, stack_capacity)?;
        worst = worst.max(trace.max_dev());
    }
    Ok(worst)
}

/// Doubling-then-bisection search for the smallest sensitivity whose
/// evaluation passes. `eval` returns (pass, evidence); the bisection narrows
/// to three significant figures and the returned evidence was observed at
/// the returned sensitivity.
fn search_min_h<F>(h_ceiling: f64, mut eval: F) -> Result<(f64, f64), LabError>
where
    F: FnMut(f64) -> Result<(bool, f64), LabError>,
{
    let mut hi = 1.0;
    let (passed, mut evidence) = eval(hi)?;
    if passed {
        return Ok((hi, evidence));
    }
    let mut lo;
    loop {
        lo = hi;
        hi *= 2.0;
        if hi > h_ceiling {
            return Err(LabError::SensitivityCeiling { ceiling: h_ceiling });
        }
        let (passed, e) = eval(hi)?;
        evidence = e;
        if passed {
            break;
        }
    }
    while (hi - lo) / hi > 1e-3 {
        let mid = 0.5 * (lo + hi);
        let (passed, e) = eval(mid)?;
        if passed {
            hi = mid;
            evidence = e;
        } else {
            lo = mid;
        }
    }
    Ok((hi, evidence))
}

/// Finds the smallest sensitivity keeping every corpus deviation trace
/// within `epsilon`: doubling from 1 until the criterion holds, then
/// bisection to three significant figures. The returned evidence is the
/// worst deviation actually observed at the returned sensitivity.
pub fn find_min_h(
    spec: &PdaSpec,
    corpus: &[Vec<usize>],
    epsilon: f64,
    options: &CalibrationOptions,
) -> Result<CalibrationResult, LabError> {
    if !(epsilon > 0.0 && epsilon < 1.0 / 14.0) {
        return Err(LabError::EpsilonOutOfRange { epsilon });
    }
    let tensors = encode_weights(spec);
    let (h_star, evidence) = search_min_h(options.h_ceiling, |h| {
        let e = corpus_evidence(
            spec,
            &tensors,
            corpus,
            Sensitivity::new(h).unwrap(),
            options.stack_capacity,
        )?;
        Ok((e <= epsilon, e))
    })?;
    Ok(CalibrationResult {
        h_star,
        epsilon,
        evidence,
    })
}

/// Smallest sensitivity at which the single-step perturbation check passes
/// all trials. Single-step stability under full-epsilon perturbations needs
/// a somewhat larger sensitivity than trace calibration, whose orbits only
/// ever see saturation-floor deviations, so it gets its own search. The same
/// seed is reused at every tested sensitivity.
pub fn find_min_h_for_perturbation(
    spec: &PdaSpec,
    epsilon: f64,
    trials: usize,
    seed: u64,
    options: &CalibrationOptions,
) -> Result<CalibrationResult, LabError> {
    if !(epsilon > 0.0 && epsilon < 1.0 / 14.0) {
        return Err(LabError::EpsilonOutOfRange { epsilon });
    }
    let (h_star, evidence) = search_min_h(options.h_ceiling, |h| {
        let report =
            perturbation_step_check(spec, epsilon, Sensitivity::new(h).unwrap(), trials, seed)?;
        Ok((report.pass(), report.worst_q_dev.max(report.worst_k_dev)))
    })?;
    Ok(CalibrationResult {
        h_star,
        epsilon,
        evidence,
    })
}

/// Outcome of the single-step perturbation experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub trials: usize,
    pub failures: usize,
    pub worst_q_dev: f64,
    pub worst_k_dev: f64,
    pub epsilon: f64,
    pub h: f64,
    pub seed: u64,
}

impl PerturbationReport {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }
}

/// Draws random reachable configurations, perturbs every state and stack
/// component independently by amounts in [-epsilon, epsilon] (clipped to
/// [0,1]), applies one neural step, and checks both deviations against the
/// exact step from the unperturbed configuration.
pub fn perturbation_step_check(
    spec: &PdaSpec,
    epsilon: f64,
    h: Sensitivity,
    trials: usize,
    seed: u64,
) -> Result<PerturbationReport, LabError> {
    let tensors = encode_weights(spec);
    let n = spec.state_count();
    let m1 = spec.input_alphabet_size();
    let m2 = spec.stack_alphabet_size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut worst_q = 0.0f64;
    let mut worst_k = 0.0f64;

    for _ in 0..trials {
        // Random reachable configuration: walk a random string from the start.
        let walk_len = rng.random_range(0..=24);
        let mut state = spec.start_state;
        let mut stack = ClassicalStack::new();
        for _ in 0..walk_len {
            let a = rng.random_range(0..m1);
            let (next, next_stack) = crate::automata::step_classical(spec, state, &stack, a);
            state = next;
            stack = next_stack;
        }
        let ideal = IdealState::encode(n, m2, state, &stack);

        let mut perturb =
            |x: f64| -> f64 { (x + rng.random_range(-epsilon..=epsilon)).clamp(0.0, 1.0) };
        let q: Vec<f64> = ideal.q_bar.iter().map(|&x| perturb(x)).collect();
        let mut levels = Vec::with_capacity(ideal.k_bar.size());
        for i in 0..ideal.k_bar.size() {
            let level: Vec<f64> = (0..m2)
                .map(|j| perturb(ideal.k_bar.component(i, j)))
                .collect();
            levels.push(level);
        }
        let stack = DiffStack::from_levels(m2, DEFAULT_STACK_CAPACITY, levels)?;
        let neural = NeuralState::from_parts(q, stack);

        let a = rng.random_range(0..m1);
        let iv = one_hot(m1, a);
        let next_neural = nn_step(&tensors, &neural, &iv, h)?;
        let next_ideal = step_ideal_vectorized(&tensors, &ideal, &iv);
        let q_dev = sup_distance(&next_neural.q, &next_ideal.q_bar);
        let k_dev = stack_distance(&next_neural.stack, &next_ideal.k_bar);
        worst_q = worst_q.max(q_dev);
        worst_k = worst_k.max(k_dev);
        if q_dev > epsilon || k_dev > epsilon {
            failures += 1;
        }
    }

    Ok(PerturbationReport {
        trials,
        failures,
        worst_q_dev: worst_q,
        worst_k_dev: worst_k,
        epsilon,
        h: h.value(),
        seed,
    })
}

/// Worst observed ratio of the combination error to epsilon; the bound says
/// it never exceeds 7.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationBoundReport {
    pub samples: usize,
    pub worst_ratio: f64,
}

/// Reading-distance isometry: the gap is the largest absolute difference
/// between the top-level distance and the reading distance, which must be
/// exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryReport {
    pub samples: usize,
    pub max_gap: f64,
}

/// Sigmoid saturation: the worst gap between a binary target and the
/// squashed perturbed value, against the analytic bound at the tested
/// sensitivity and perturbation radius.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturationReport {
    pub samples: usize,
    pub worst_gap: f64,
    pub bound: f64,
    pub h: f64,
    pub eps0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub seed: u64,
    pub combination: CombinationBoundReport,
    pub isometry: IsometryReport,
    pub saturation: SaturationReport,
}

impl LemmaReport {
    pub fn pass(&self) -> bool {
        self.combination.worst_ratio <= 7.0
            && self.isometry.max_gap == 0.0
            && self.saturation.worst_gap <= self.saturation.bound.next_up()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaSuiteOptions {
    pub samples: usize,
    pub seed: u64,
    /// Perturbation radius for the saturation check.
    pub eps0: f64,
    /// Sensitivity for the saturation check.
    pub saturation_h: f64,
}

impl Default for LemmaSuiteOptions {
    fn default() -> Self {
        LemmaSuiteOptions {
            samples: 100_000,
            seed: 0x5eed,
            eps0: 0.1,
            saturation_h: 100.0,
        }
    }
}

fn near<R: Rng>(rng: &mut R, x: f64, eps: f64) -> f64 {
    (x + rng.random_range(-eps..=eps)).clamp(0.0, 1.0)
}

/// Runs the three bound property suites with freshly seeded generators and
/// reports worst margins.
pub fn lemma_suite(options: &LemmaSuiteOptions) -> LemmaReport {
    let samples = options.samples;

    // Convex-combination error bound: with all scalar and componentwise
    // distances at most eps, the blended vectors differ by at most 7 eps.
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut worst_ratio = 0.0f64;
    for _ in 0..samples {
        let m = rng.random_range(1..=6);
        let eps = rng.random_range(0.001..=0.3);
        let x_bar: f64 = rng.random_range(0.0..=1.0);
        let y_bar: f64 = rng.random_range(0.0..=1.0);
        let x = near(&mut rng, x_bar, eps);
        let y = near(&mut rng, y_bar, eps);
        let mut err = 0.0f64;
        for _ in 0..m {
            let xv_bar: f64 = rng.random_range(0.0..=1.0);
            let yv_bar: f64 = rng.random_range(0.0..=1.0);
            let zv_bar: f64 = rng.random_range(0.0..=1.0);
            let xv = near(&mut rng, xv_bar, eps);
            let yv = near(&mut rng, yv_bar, eps);
            let zv = near(&mut rng, zv_bar, eps);
            let blended = x * xv + y * yv + (1.0 - x - y) * zv;
            let blended_bar = x_bar * xv_bar + y_bar * yv_bar + (1.0 - x_bar - y_bar) * zv_bar;
            err = err.max((blended - blended_bar).abs());
        }
        worst_ratio = worst_ratio.max(err / eps);
    }
    let combination = CombinationBoundReport {
        samples,
        worst_ratio,
    };

    // Reading isometry. One-hot case: arbitrary floats within 0.4 of a
    // one-hot top. Empty case: the top compares against a zero vector; its
    // components are drawn on a dyadic grid so that 1 - x is exactly
    // representable and the identity is bitwise.
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0x150_3313);
    let mut max_gap = 0.0f64;
    let isometry_samples = samples.min(20_000);
    for trial in 0..isometry_samples {
        let m = rng.random_range(1..=6);
        let (ideal_stack, top): (crate::automata::ideal::IdealStack, Vec<f64>) = if trial % 2 == 0 {
            let hot = rng.random_range(0..m);
            let top: Vec<f64> = (0..m)
                .map(|j| {
                    if j == hot {
                        rng.random_range(0.6..=1.0)
                    } else {
                        rng.random_range(0.0..=0.4)
                    }
                })
                .collect();
            (
                crate::automata::ideal::IdealStack::from_symbols(m, &[hot]),
                top,
            )
        } else {
            let grid = (0.4 * (1u32 << 20) as f64) as u32;
            let top: Vec<f64> = (0..m)
                .map(|_| rng.random_range(0..=grid) as f64 / (1u32 << 20) as f64)
                .collect();
            (crate::automata::ideal::IdealStack::empty(m), top)
        };
        let stack = DiffStack::from_levels(m, 4, vec![top.clone()]).unwrap();
        let k_distance = stack_distance(&stack, &ideal_stack);
        let r = reading(&stack);
        let r_bar = ideal_reading(&ideal_stack);
        let r_distance = sup_distance(r.as_slice(), r_bar.as_slice());
        max_gap = max_gap.max((k_distance - r_distance).abs());
    }
    let isometry = IsometryReport {
        samples: isometry_samples,
        max_gap,
    };

    // Sigmoid saturation against the analytic bound.
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0xa1b2_c3d4);
    let h = Sensitivity::new(options.saturation_h).unwrap();
    let bound = sigmoid(options.eps0 - 0.5, h);
    let mut worst_gap = 0.0f64;
    for _ in 0..samples {
        let target: f64 = if rng.random_range(0..2) == 0 {
            0.0
        } else {
            1.0
        };
        let v = target + rng.random_range(-options.eps0..=options.eps0);
        let gap = (target - sigmoid(v - 0.5, h)).abs();
        worst_gap = worst_gap.max(gap);
    }
    let saturation = SaturationReport {
        samples,
        worst_gap,
        bound,
        h: options.saturation_h,
        eps0: options.eps0,
    };

    LemmaReport {
        seed: options.seed,
        combination,
        isometry,
        saturation,
    }
}

/// One row of a weight-noise sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub amplitude: f64,
    /// Fraction of corpus strings classified identically to the exact
    /// machine.
    pub accuracy: f64,
    /// Worst deviation of the noisy network from the exact orbit over the
    /// corpus.
    pub max_deviation: f64,
    /// Whether rule extraction still recovers the machine from the noisy
    /// tensors.
    pub extraction_ok: bool,
}

/// Adds i.i.d. uniform noise of each amplitude to every tensor entry,
/// re-classifies the corpus against the oracle labels, and measures worst
/// deviations and extraction round trips.
pub fn weight_noise_sweep(
    spec: &PdaSpec,
    amplitudes: &[f64],
    corpus: &LabeledCorpus,
    h: Sensitivity,
    seed: u64,
) -> Result<Vec<SweepRow>, LabError> {
    let clean = encode_weights(spec);
    let naming = spec.naming();
    let run_options = RunOptions::default();
    let mut rows = Vec::with_capacity(amplitudes.len());
    for (index, &amplitude) in amplitudes.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed.wrapping_add((index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)),
        );
        let noisy = clean.with_noise(amplitude, &mut rng);
        let mut matches = 0usize;
        let mut max_deviation = 0.0f64;
        for entry in &corpus.entries {
            let report = nn_run(
                &noisy,
                &entry.symbols,
                h,
                spec.start_state,
                &spec.accept_states,
                &run_options,
            )?;
            if report.accept == entry.accept {
                matches += 1;
            }
            let trace = deviation_trace_with_tensors(
                spec,
                &noisy,
                &entry.symbols,
                h,
                run_options.stack_capacity,
            )?;
            max_deviation = max_deviation.max(trace.max_dev());
        }
        let accuracy = if corpus.entries.is_empty() {
            1.0
        } else {
            matches as f64 / corpus.entries.len() as f64
        };
        let extraction_ok = extract_rules(&noisy, &naming).as_ref() == Ok(spec);
        rows.push(SweepRow {
            amplitude,
            accuracy,
            max_deviation,
            extraction_ok,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammars::{builtin, calibration_corpus, gen_corpus, Builtin, CorpusMode};

    fn h(v: f64) -> Sensitivity {
        Sensitivity::new(v).unwrap()
    }

    #[test]
    fn start_deviations_are_exactly_zero() {
        let spec = builtin(Builtin::Parens);
        let trace = deviation_trace(&spec, &[0, 1, 2], h(60.0), 64).unwrap();
        assert_eq!(trace.q_dev[0], 0.0);
        assert_eq!(trace.k_dev[0], 0.0);
        assert_eq!(trace.len(), 4);
    }

    #[test]
    fn nested_parens_stay_tight_at_h60() {
        let spec = builtin(Builtin::Parens);
        let trace = deviation_trace(&spec, &[0, 0, 1, 1, 2], h(60.0), 64).unwrap();
        assert!(trace.max_q_dev() < 0.01, "max q dev {}", trace.max_q_dev());
        assert!(trace.max_k_dev() < 0.01);
    }

    #[test]
    fn low_sensitivity_loses_the_orbit() {
        let spec = builtin(Builtin::Parens);
        let trace = deviation_trace(&spec, &[0, 0, 1, 1, 2], h(1.0), 64).unwrap();
        assert!(trace.max_q_dev() > 0.1, "max q dev {}", trace.max_q_dev());
    }

    fn small_corpus(spec: &PdaSpec) -> Vec<Vec<usize>> {
        calibration_corpus(spec, spec.input_alphabet_size() - 1, 6, 40, 30, 11).unwrap()
    }

    #[test]
    fn calibration_finds_a_finite_sensitivity() {
        let spec = builtin(Builtin::Parens);
        let corpus = small_corpus(&spec);
        let result = find_min_h(&spec, &corpus, 0.01, &CalibrationOptions::default()).unwrap();
        assert!(result.evidence <= 0.01);
        assert!(result.h_star >= 1.0 && result.h_star <= 1e4);
        // Reproducible bit-for-bit.
        let again = find_min_h(&spec, &corpus, 0.01, &CalibrationOptions::default()).unwrap();
        assert_eq!(result, again);
    }

    #[test]
    fn epsilon_outside_contract_is_rejected() {
        let spec = builtin(Builtin::Parens);
        let err = find_min_h(&spec, &[vec![2]], 0.5, &CalibrationOptions::default()).unwrap_err();
        assert!(matches!(err, LabError::EpsilonOutOfRange { .. }));
        let err = find_min_h(
            &spec,
            &[vec![2]],
            1.0 / 14.0,
            &CalibrationOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, LabError::EpsilonOutOfRange { .. }));
    }

    #[test]
    fn unreachable_target_reports_the_ceiling() {
        let spec = builtin(Builtin::Parens);
        let corpus = vec![vec![0, 0, 1, 1, 2]];
        let options = CalibrationOptions {
            h_ceiling: 2.0,
            ..Default::default()
        };
        let err = find_min_h(&spec, &corpus, 0.001, &options).unwrap_err();
        assert!(matches!(err, LabError::SensitivityCeiling { .. }));
    }

    /// Doubling the calibrated sensitivity does not worsen the evidence on
    /// the same corpus. Observed behavior on fixed inputs, not a theorem.
    #[test]
    fn evidence_improves_at_doubled_sensitivity() {
        let spec = builtin(Builtin::Parens);
        let corpus = small_corpus(&spec);
        let result = find_min_h(&spec, &corpus, 0.01, &CalibrationOptions::default()).unwrap();
        let tensors = encode_weights(&spec);
        let doubled = corpus_evidence(
            &spec,
            &tensors,
            &corpus,
            h(2.0 * result.h_star),
            DEFAULT_STACK_CAPACITY,
        )
        .unwrap();
        assert!(
            doubled <= result.evidence,
            "doubled {} vs {}",
            doubled,
            result.evidence
        );
    }

    #[test]
    fn perturbation_check_passes_at_high_sensitivity() {
        let spec = builtin(Builtin::Parens);
        let report = perturbation_step_check(&spec, 0.01, h(60.0), 2000, 31).unwrap();
        assert!(
            report.pass(),
            "failures {} worst_q {} worst_k {}",
            report.failures,
            report.worst_q_dev,
            report.worst_k_dev
        );
        assert!(report.worst_q_dev <= 0.01);
        assert!(report.worst_k_dev <= 0.01);
    }

    #[test]
    fn perturbation_negative_control_reports_failures() {
        let spec = builtin(Builtin::Parens);
        let report = perturbation_step_check(&spec, 0.07, h(5.0), 500, 31).unwrap();
        assert!(report.failures > 0, "expected failures at H=5");
        assert!(!report.pass());
    }

    /// Operator-level approximation: for each deviation target there is a
    /// sensitivity at which the differentiable operator tracks the idealized
    /// one within the target, over random idealized stacks, all three action
    /// kinds, and inputs perturbed componentwise by the target.
    #[test]
    fn operator_approximates_idealized_operator_for_small_eps() {
        use crate::automata::ideal::{ideal_apply, IdealStack};
        use crate::stack::{apply_operator, StackAction};
        use crate::util::one_hot as onehot;

        let trial_count = 400;
        for &eps in &[0.002, 0.005, 0.01] {
            let run_trials = |hv: Sensitivity| -> f64 {
                let mut rng = ChaCha8Rng::seed_from_u64(41);
                let mut worst = 0.0f64;
                for trial in 0..trial_count {
                    let m2 = rng.random_range(1..=3);
                    let depth = rng.random_range(0..=6);
                    let symbols: Vec<usize> = (0..depth).map(|_| rng.random_range(0..m2)).collect();
                    let ideal = IdealStack::from_symbols(m2, &symbols);
                    let (p_plus, p_minus, candidate) = match trial % 3 {
                        0 => (1.0, 0.0, onehot(m2, rng.random_range(0..m2))),
                        1 => (0.0, 1.0, vec![0.0; m2]),
                        _ => (0.0, 0.0, vec![0.0; m2]),
                    };
                    let expected = ideal_apply(&ideal, p_plus, p_minus, &candidate);

                    let mut jitter = |x: f64| (x + rng.random_range(-eps..=eps)).clamp(0.0, 1.0);
                    let mut levels = Vec::with_capacity(depth);
                    for i in 0..depth {
                        levels.push(
                            (0..m2)
                                .map(|j| jitter(ideal.component(i, j)))
                                .collect::<Vec<f64>>(),
                        );
                    }
                    let stack = DiffStack::from_levels(m2, 64, levels).unwrap();
                    let action = StackAction {
                        p_plus: jitter(p_plus),
                        p_minus: jitter(p_minus),
                        push_vector: candidate.iter().map(|&c| jitter(c)).collect(),
                    };
                    let produced = apply_operator(&stack, &action, hv).unwrap();
                    worst = worst.max(stack_distance(&produced, &expected));
                }
                worst
            };

            let mut h_value = 1.0;
            let mut found = None;
            while h_value <= 1024.0 {
                let worst = run_trials(Sensitivity::new(h_value).unwrap());
                if worst <= eps {
                    found = Some((h_value, worst));
                    break;
                }
                h_value *= 2.0;
            }
            let (h_found, worst) =
                found.unwrap_or_else(|| panic!("no sensitivity up to 1024 meets eps={eps}"));
            assert!(worst <= eps, "eps={eps}: worst {worst} at H={h_found}");
        }
    }

    /// Worst-case perturbations: every component pushed exactly epsilon
    /// toward the adversarial side (clipped to [0,1]) instead of uniform
    /// noise. A sufficiently large sensitivity still contracts them.
    #[test]
    fn extreme_sign_perturbations_contract_at_high_sensitivity() {
        use crate::automata::ideal::step_ideal_vectorized;
        let eps = 0.01;
        let hv = h(60.0);
        for which in crate::grammars::Builtin::ALL {
            let spec = builtin(which);
            let tensors = encode_weights(&spec);
            let n = spec.state_count();
            let m1 = spec.input_alphabet_size();
            let m2 = spec.stack_alphabet_size();
            let mut rng = ChaCha8Rng::seed_from_u64(97);
            for _ in 0..300 {
                let walk_len = rng.random_range(0..=16);
                let mut state = spec.start_state;
                let mut stack = ClassicalStack::new();
                for _ in 0..walk_len {
                    let a = rng.random_range(0..m1);
                    let (next, next_stack) =
                        crate::automata::step_classical(&spec, state, &stack, a);
                    state = next;
                    stack = next_stack;
                }
                let ideal = IdealState::encode(n, m2, state, &stack);
                // Push every component exactly eps away from its ideal value.
                let flip = |x: f64, up: bool| -> f64 {
                    if up {
                        (x + eps).clamp(0.0, 1.0)
                    } else {
                        (x - eps).clamp(0.0, 1.0)
                    }
                };
                let q: Vec<f64> = ideal
                    .q_bar
                    .iter()
                    .map(|&x| flip(x, rng.random_bool(0.5)))
                    .collect();
                let mut levels = Vec::with_capacity(ideal.k_bar.size());
                for i in 0..ideal.k_bar.size() {
                    levels.push(
                        (0..m2)
                            .map(|j| flip(ideal.k_bar.component(i, j), rng.random_bool(0.5)))
                            .collect::<Vec<f64>>(),
                    );
                }
                let neural = NeuralState::from_parts(
                    q,
                    DiffStack::from_levels(m2, DEFAULT_STACK_CAPACITY, levels).unwrap(),
                );
                let a = rng.random_range(0..m1);
                let iv = one_hot(m1, a);
                let next_neural = nn_step(&tensors, &neural, &iv, hv).unwrap();
                let next_ideal = step_ideal_vectorized(&tensors, &ideal, &iv);
                assert!(sup_distance(&next_neural.q, &next_ideal.q_bar) <= eps);
                assert!(stack_distance(&next_neural.stack, &next_ideal.k_bar) <= eps);
            }
        }
    }

    #[test]
    fn zero_perturbation_bounded_by_plain_single_step_error() {
        let spec = builtin(Builtin::Parens);
        let report = perturbation_step_check(&spec, 0.0, h(60.0), 200, 7).unwrap();
        // With no perturbation the only deviation is sigmoid saturation.
        let floor = sigmoid(-0.5, h(60.0));
        assert!(report.worst_q_dev <= floor.next_up());
        assert!(report.worst_k_dev <= floor.next_up());
    }

    #[test]
    fn lemma_suite_passes_with_margin() {
        let report = lemma_suite(&LemmaSuiteOptions {
            samples: 20_000,
            ..Default::default()
        });
        assert!(report.pass());
        assert!(report.combination.worst_ratio <= 7.0);
        assert_eq!(report.isometry.max_gap, 0.0);
        // Analytic bound at H=100, eps0=0.1: 1/(1+e^40).
        assert!((report.saturation.bound - 4.248354255291589e-18).abs() < 1e-30);
    }

    #[test]
    fn noise_sweep_baseline_and_extraction() {
        let spec = builtin(Builtin::Parens);
        let corpus = gen_corpus(&spec, 2, CorpusMode::Exhaustive { max_len: 12 }).unwrap();
        let rows = weight_noise_sweep(&spec, &[0.0, 0.01, 0.49], &corpus, h(60.0), 13).unwrap();
        assert_eq!(rows[0].accuracy, 1.0);
        assert_eq!(rows[0].max_deviation, rows[0].max_deviation.min(0.01));
        assert!(rows[0].extraction_ok);
        assert_eq!(rows[1].accuracy, 1.0);
        assert!(rows[1].extraction_ok);
        assert!(
            rows[2].extraction_ok,
            "extraction must survive amplitude 0.49"
        );
    }
}
