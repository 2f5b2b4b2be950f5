//! Scenario runner: distribution → cross-check → agreement, repeated over
//! trials, aggregated into a report. Also the argument parser behind the
//! `simulate` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::adversaries::{
    Adversary, AdversaryStrategy, AsymmetryTest, ChannelSpec, RevealPolicy, StrategyKind,
};
use crate::agreement::{
    evaluate_conditions, evaluate_decisions, run_agreement, AgreementConfig, AgreementTranscript,
    ConsistencyVerdict, Decisions, Plan, TableCase,
};
use crate::distribution::{
    assemble_lists, cross_check, run_batch, theoretical_statistics, CheckVerdict, Combination,
    CorrelatedLists, CrossCheckReport, DistributionConfig, GeneralId, Hop, RunRecord,
};
use crate::qutrit::MeasurementBasis;
use crate::random::derive_rng;
use crate::{Error, Result, Trit};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Scenario {
    Honest,
    InterceptResend,
    KrausAttack,
    FalseReport,
    RevealLiar,
    TraitorA,
    TraitorB,
    TraitorC,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub scenario: Scenario,
    pub trials: u32,
    pub distribution: DistributionConfig,
    pub agreement: AgreementConfig,
    /// Strategy parameters by flag name (`basis`, `hop`, `traitor`, ...).
    pub adversary_params: BTreeMap<String, String>,
    /// Fixed commander plan; drawn per trial when absent.
    pub commander_plan: Option<Plan>,
    pub seed: u64,
}

impl SimulationSpec {
    pub fn new(scenario: Scenario, trials: u32, seed: u64) -> Self {
        SimulationSpec {
            scenario,
            trials,
            distribution: DistributionConfig {
                rng_seed: seed,
                ..Default::default()
            },
            agreement: AgreementConfig::default(),
            adversary_params: BTreeMap::new(),
            commander_plan: None,
            seed,
        }
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.adversary_params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        self.distribution.validate()?;
        self.agreement.validate()?;
        self.strategy()?.validate()
    }

    pub fn strategy(&self) -> Result<AdversaryStrategy> {
        let name = match self.scenario {
            Scenario::Honest => "none",
            Scenario::InterceptResend => "intercept_resend",
            Scenario::KrausAttack => "kraus_attack",
            Scenario::FalseReport => "false_detection_report",
            Scenario::RevealLiar => "reveal_liar",
            Scenario::TraitorA => "traitor_a_conflicting",
            Scenario::TraitorB => "traitor_b_forge_forward",
            Scenario::TraitorC => "traitor_c_forge_forward",
            Scenario::Custom => self
                .adversary_params
                .get("strategy")
                .map(String::as_str)
                .ok_or_else(|| Error::InvalidStrategy("custom scenario needs a strategy".into()))?,
        };
        strategy_from_params(name, &self.adversary_params)
    }
}

const PARAM_KEYS: [&str; 12] = [
    "strategy",
    "basis",
    "hop",
    "traitor",
    "channel",
    "strength",
    "shift",
    "theta",
    "rate",
    "policy",
    "error_rate",
    "target_plan",
];

/// Builds a strategy from its lower-snake-case name and string parameters.
pub fn strategy_from_params(
    name: &str,
    params: &BTreeMap<String, String>,
) -> Result<AdversaryStrategy> {
    if let Some(k) = params.keys().find(|k| !PARAM_KEYS.contains(&k.as_str())) {
        return Err(Error::InvalidStrategy(format!("unknown parameter {k}")));
    }
    let bad = |key: &str, v: &str| Error::InvalidStrategy(format!("bad value {v:?} for {key}"));
    let get = |key: &str| params.get(key).map(String::as_str);
    let num = |key: &str, default: f64| -> Result<f64> {
        get(key).map_or(Ok(default), |v| v.parse().map_err(|_| bad(key, v)))
    };
    let small = |key: &str, default: u8| -> Result<u8> {
        get(key).map_or(Ok(default), |v| v.parse().map_err(|_| bad(key, v)))
    };
    let hop = || -> Result<Hop> { Hop::try_from(small("hop", 1)?) };
    let plan = || -> Result<Plan> { Plan::try_from(small("target_plan", 1)?) };

    let kind = match name {
        "none" => StrategyKind::None,
        "intercept_resend" => StrategyKind::InterceptResend {
            basis: match get("basis").unwrap_or("computational") {
                "computational" => MeasurementBasis::Computational,
                "fourier" => MeasurementBasis::Fourier,
                v => return Err(bad("basis", v)),
            },
            location: hop()?,
        },
        "kraus_attack" => StrategyKind::KrausAttack {
            channel: match get("channel").unwrap_or("dephasing") {
                "identity" => ChannelSpec::Identity,
                "dephasing" => ChannelSpec::Dephasing { strength: num("strength", 1.0)? },
                "phase_shift" => ChannelSpec::PhaseShift { shift: Trit::new(small("shift", 1)?)? },
                "ancilla_coupling" => ChannelSpec::AncillaCoupling {
                    theta: num("theta", std::f64::consts::FRAC_PI_2)?,
                },
                v => return Err(bad("channel", v)),
            },
            location: hop()?,
        },
        "false_detection_report" => StrategyKind::FalseDetectionReport { rate: num("rate", 1.0)? },
        "reveal_liar" => StrategyKind::RevealLiar {
            policy: match get("policy").unwrap_or("always_consistent") {
                "always_consistent" => RevealPolicy::AlwaysConsistent,
                "calibrated_errors" => RevealPolicy::CalibratedErrors {
                    error_rate: num("error_rate", 0.5)?,
                },
                v => return Err(bad("policy", v)),
            },
        },
        "traitor_a_conflicting" => StrategyKind::TraitorAConflicting,
        "traitor_b_forge_forward" => StrategyKind::TraitorBForgeForward { target_plan: plan()? },
        "traitor_c_forge_forward" => StrategyKind::TraitorCForgeForward { target_plan: plan()? },
        other => return Err(Error::InvalidStrategy(format!("unknown strategy {other}"))),
    };
    let mut strategy = AdversaryStrategy::with_default_traitor(kind);
    if let Some(t) = get("traitor") {
        strategy.traitor = Some(GeneralId::parse(t).ok_or_else(|| bad("traitor", t))?);
    }
    strategy.validate()?;
    Ok(strategy)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComboCounts {
    pub c000: u64,
    pub c111: u64,
    pub c201: u64,
    pub c210: u64,
    pub other: u64,
}

impl ComboCounts {
    fn add(&mut self, combo: Combination) {
        match combo {
            Combination::C000 => self.c000 += 1,
            Combination::C111 => self.c111 += 1,
            Combination::C201 => self.c201 += 1,
            Combination::C210 => self.c210 += 1,
            Combination::Other => self.other += 1,
        }
    }

    fn merge(&self, o: &ComboCounts) -> ComboCounts {
        ComboCounts {
            c000: self.c000 + o.c000,
            c111: self.c111 + o.c111,
            c201: self.c201 + o.c201,
            c210: self.c210 + o.c210,
            other: self.other + o.other,
        }
    }

    pub fn total(&self) -> u64 {
        self.c000 + self.c111 + self.c201 + self.c210 + self.other
    }

    /// Relative frequencies of 000, 111, 201, 210, other.
    pub fn frequencies(&self) -> [f64; 5] {
        let n = self.total().max(1) as f64;
        [self.c000, self.c111, self.c201, self.c210, self.other].map(|c| c as f64 / n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    /// Lists were distributed and the agreement phase ran.
    Completed,
    /// The cross-check flagged tampering; loyal generals abort.
    Aborted,
    /// Distribution could not finish within the attempt budget.
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial_id: u32,
    pub status: TrialStatus,
    pub error: Option<String>,
    pub commander_plan: Plan,
    pub attempts: u64,
    pub valid_runs: u64,
    pub combos: ComboCounts,
    pub checked: u64,
    pub inconsistencies: u64,
    pub traitor_last: u64,
    pub traitor_last_inconsistencies: u64,
    pub traitor_not_last_inconsistencies: u64,
    pub list_length: u64,
    /// Assembled positions breaking the sum rule (tampering that slipped through).
    pub list_violations: u64,
    /// B's and C's verdicts on the commander's message.
    pub commander_verdicts: Option<[ConsistencyVerdict; 2]>,
    /// B's verdict on C's relay and C's on B's; `None` for ⊥ or no agreement phase.
    pub relay_verdicts: [Option<ConsistencyVerdict>; 2],
    /// Position counts of the lists relayed by B and by C.
    pub relay_lengths: [Option<usize>; 2],
    pub cases: [Option<TableCase>; 2],
    pub decisions: Decisions,
    pub broadcast: bool,
    pub validity: bool,
}

impl TrialOutcome {
    pub fn dba_success(&self) -> bool {
        self.broadcast && self.validity
    }
}

/// Integer totals over trials plus rates derived from them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: u64,
    pub completed: u64,
    pub aborted: u64,
    pub failed: u64,
    pub attempts: u64,
    pub valid_runs: u64,
    pub valid_yield: f64,
    pub valid_yield_stderr: f64,
    pub combos: ComboCounts,
    pub checked_positions: u64,
    pub inconsistencies: u64,
    pub inconsistency_rate: f64,
    pub inconsistency_rate_stderr: f64,
    pub traitor_last: u64,
    pub traitor_last_fraction: f64,
    pub traitor_last_inconsistencies: u64,
    pub traitor_not_last_inconsistencies: u64,
    /// Last-vs-not-last inconsistency gap of the traitor's reveals.
    pub reveal_asymmetry: AsymmetryTest,
    pub detection_rate: f64,
    pub dba_successes: u64,
    pub dba_success_rate: f64,
    /// Lieutenant decision-table rows reached, keyed by row label.
    pub table_cases: BTreeMap<String, u64>,
    pub list_violations: u64,
}

fn binomial_stderr(p: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        (p * (1.0 - p) / n as f64).sqrt()
    }
}

fn ratio(k: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}

impl Aggregates {
    fn empty() -> Self {
        Aggregates {
            trials: 0,
            completed: 0,
            aborted: 0,
            failed: 0,
            attempts: 0,
            valid_runs: 0,
            valid_yield: 0.0,
            valid_yield_stderr: 0.0,
            combos: ComboCounts::default(),
            checked_positions: 0,
            inconsistencies: 0,
            inconsistency_rate: 0.0,
            inconsistency_rate_stderr: 0.0,
            traitor_last: 0,
            traitor_last_fraction: 0.0,
            traitor_last_inconsistencies: 0,
            traitor_not_last_inconsistencies: 0,
            reveal_asymmetry: AsymmetryTest::from_counts(0, 0, 0, 0),
            detection_rate: 0.0,
            dba_successes: 0,
            dba_success_rate: 0.0,
            table_cases: BTreeMap::new(),
            list_violations: 0,
        }
    }

    pub fn from_trials(trials: &[TrialOutcome]) -> Self {
        let mut agg = Aggregates::empty();
        for t in trials {
            agg.trials += 1;
            match t.status {
                TrialStatus::Completed => agg.completed += 1,
                TrialStatus::Aborted => agg.aborted += 1,
                TrialStatus::Failed => agg.failed += 1,
            }
            agg.attempts += t.attempts;
            agg.valid_runs += t.valid_runs;
            agg.combos = agg.combos.merge(&t.combos);
            agg.checked_positions += t.checked;
            agg.inconsistencies += t.inconsistencies;
            agg.traitor_last += t.traitor_last;
            agg.traitor_last_inconsistencies += t.traitor_last_inconsistencies;
            agg.traitor_not_last_inconsistencies += t.traitor_not_last_inconsistencies;
            agg.dba_successes += u64::from(t.dba_success());
            agg.list_violations += t.list_violations;
            for case in t.cases.iter().flatten() {
                *agg.table_cases.entry(case.label().to_string()).or_insert(0) += 1;
            }
        }
        agg.finalize()
    }

    /// Totals of two disjoint sets of trials.
    pub fn combine(&self, other: &Aggregates) -> Self {
        let mut table_cases = self.table_cases.clone();
        for (k, v) in &other.table_cases {
            *table_cases.entry(k.clone()).or_insert(0) += v;
        }
        Aggregates {
            trials: self.trials + other.trials,
            completed: self.completed + other.completed,
            aborted: self.aborted + other.aborted,
            failed: self.failed + other.failed,
            attempts: self.attempts + other.attempts,
            valid_runs: self.valid_runs + other.valid_runs,
            combos: self.combos.merge(&other.combos),
            checked_positions: self.checked_positions + other.checked_positions,
            inconsistencies: self.inconsistencies + other.inconsistencies,
            traitor_last: self.traitor_last + other.traitor_last,
            traitor_last_inconsistencies: self.traitor_last_inconsistencies
                + other.traitor_last_inconsistencies,
            traitor_not_last_inconsistencies: self.traitor_not_last_inconsistencies
                + other.traitor_not_last_inconsistencies,
            dba_successes: self.dba_successes + other.dba_successes,
            table_cases,
            list_violations: self.list_violations + other.list_violations,
            ..Aggregates::empty()
        }
        .finalize()
    }

    fn finalize(mut self) -> Self {
        self.valid_yield = ratio(self.valid_runs, self.attempts);
        self.valid_yield_stderr = binomial_stderr(self.valid_yield, self.attempts);
        self.inconsistency_rate = ratio(self.inconsistencies, self.checked_positions);
        self.inconsistency_rate_stderr =
            binomial_stderr(self.inconsistency_rate, self.checked_positions);
        self.traitor_last_fraction = ratio(self.traitor_last, self.checked_positions);
        self.reveal_asymmetry = AsymmetryTest::from_counts(
            self.traitor_last,
            self.traitor_last_inconsistencies,
            self.checked_positions - self.traitor_last,
            self.traitor_not_last_inconsistencies,
        );
        self.detection_rate = ratio(self.aborted, self.trials);
        self.dba_success_rate = ratio(self.dba_successes, self.trials);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub spec: SimulationSpec,
    pub trials: Vec<TrialOutcome>,
    pub aggregates: Aggregates,
    /// Wall-clock time; only filled in on request so reports stay reproducible.
    pub timing: Option<Timing>,
}

impl ScenarioReport {
    /// Joins reports for disjoint trial ranges of the same spec.
    pub fn merge(mut self, other: ScenarioReport) -> Result<ScenarioReport> {
        if self.spec != other.spec {
            return Err(Error::InvalidConfig("cannot merge reports of different specs".into()));
        }
        self.aggregates = self.aggregates.combine(&other.aggregates);
        self.trials.extend(other.trials);
        self.trials.sort_by_key(|t| t.trial_id);
        Ok(self)
    }
}

/// Everything one trial produced, for export and inspection.
#[derive(Clone, Debug)]
pub struct TrialArtifacts {
    pub records: Vec<RunRecord>,
    pub check: Option<CrossCheckReport>,
    pub lists: Option<CorrelatedLists>,
    pub transcript: Option<AgreementTranscript>,
    pub outcome: TrialOutcome,
}

/// Runs a single trial with randomness derived from `(spec.seed, trial_id)`.
pub fn run_trial_detailed(
    spec: &SimulationSpec,
    strategy: &AdversaryStrategy,
    trial_id: u32,
) -> Result<TrialArtifacts> {
    let base = 4 * u64::from(trial_id);
    let mut protocol_rng = derive_rng(spec.seed, base);
    let adversary_seed = derive_rng(spec.seed, base + 1).next_u64();
    let mut agreement_rng = derive_rng(spec.seed, base + 2);
    let mut check_rng = derive_rng(spec.seed, base + 3);

    let commander_plan = match spec.commander_plan {
        Some(p) => p,
        None => Plan::from_bit(agreement_rng.gen()),
    };
    let traitor = strategy.traitor;
    let mut adversary = Adversary::from_strategy(strategy, adversary_seed)?;

    let mut outcome = TrialOutcome {
        trial_id,
        status: TrialStatus::Failed,
        error: None,
        commander_plan,
        attempts: 0,
        valid_runs: 0,
        combos: ComboCounts::default(),
        checked: 0,
        inconsistencies: 0,
        traitor_last: 0,
        traitor_last_inconsistencies: 0,
        traitor_not_last_inconsistencies: 0,
        list_length: 0,
        list_violations: 0,
        commander_verdicts: None,
        relay_verdicts: [None, None],
        relay_lengths: [None, None],
        cases: [None, None],
        decisions: Decisions::all_abort(traitor),
        broadcast: true,
        validity: true,
    };

    let mut records = match run_batch(&spec.distribution, &mut adversary, &mut protocol_rng) {
        Ok(r) => r,
        Err(e @ Error::AttemptBudgetExhausted { .. }) => {
            outcome.error = Some(e.to_string());
            let (broadcast, validity) =
                evaluate_decisions(&outcome.decisions, commander_plan, traitor);
            outcome.broadcast = broadcast;
            outcome.validity = validity;
            return Ok(TrialArtifacts {
                records: Vec::new(),
                check: None,
                lists: None,
                transcript: None,
                outcome,
            });
        }
        Err(e) => return Err(e),
    };
    outcome.attempts = records.len() as u64;
    for r in records.iter().filter(|r| r.valid) {
        outcome.valid_runs += 1;
        outcome.combos.add(r.combination());
    }

    let check = cross_check(
        &mut records,
        &spec.distribution,
        traitor,
        adversary.reveal_hook(),
        &mut check_rng,
    );
    outcome.checked = check.checked() as u64;
    outcome.inconsistencies = check.inconsistencies as u64;
    outcome.traitor_last = check.traitor_last_count as u64;
    outcome.traitor_last_inconsistencies = check.traitor_last_inconsistencies as u64;
    outcome.traitor_not_last_inconsistencies = check.traitor_not_last_inconsistencies as u64;

    if check.verdict == CheckVerdict::TamperingDetected {
        outcome.status = TrialStatus::Aborted;
        let (broadcast, validity) = evaluate_decisions(&outcome.decisions, commander_plan, traitor);
        outcome.broadcast = broadcast;
        outcome.validity = validity;
        return Ok(TrialArtifacts {
            records,
            check: Some(check),
            lists: None,
            transcript: None,
            outcome,
        });
    }

    let mut lists = assemble_lists(&records);
    lists.truncate(spec.distribution.target_length);
    outcome.list_length = lists.len() as u64;
    outcome.list_violations = lists.violations().len() as u64;

    let transcript = run_agreement(
        &lists,
        commander_plan,
        strategy,
        &spec.agreement,
        &mut agreement_rng,
    )?;
    let (broadcast, validity) = evaluate_conditions(&transcript);
    outcome.status = TrialStatus::Completed;
    outcome.commander_verdicts = Some(transcript.commander_verdicts);
    outcome.relay_verdicts = transcript.relay_verdicts;
    outcome.relay_lengths = [&transcript.b_to_c, &transcript.c_to_b]
        .map(|r| r.list.as_ref().map(|m| m.positions.len()));
    outcome.cases = transcript.cases;
    outcome.decisions = transcript.decisions;
    outcome.broadcast = broadcast;
    outcome.validity = validity;
    Ok(TrialArtifacts {
        records,
        check: Some(check),
        lists: Some(lists),
        transcript: Some(transcript),
        outcome,
    })
}

fn run_one(spec: &SimulationSpec, strategy: &AdversaryStrategy, trial_id: u32) -> Result<TrialOutcome> {
    run_trial_detailed(spec, strategy, trial_id).map(|a| a.outcome)
}

/// Runs the trials in `range` and aggregates them.
pub fn run_trials(spec: &SimulationSpec, range: Range<u32>) -> Result<ScenarioReport> {
    spec.validate()?;
    run_strategy_trials(spec, &spec.strategy()?, range)
}

/// Like [`run_trials`] with an explicit strategy in place of the one the
/// spec's scenario and parameters describe.
pub fn run_strategy_trials(
    spec: &SimulationSpec,
    strategy: &AdversaryStrategy,
    range: Range<u32>,
) -> Result<ScenarioReport> {
    spec.distribution.validate()?;
    spec.agreement.validate()?;
    strategy.validate()?;

    #[cfg(feature = "parallel")]
    let trials: Result<Vec<TrialOutcome>> = {
        use rayon::prelude::*;
        range
            .into_par_iter()
            .map(|id| run_one(spec, strategy, id))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let trials: Result<Vec<TrialOutcome>> = range.map(|id| run_one(spec, strategy, id)).collect();

    let trials = trials?;
    Ok(ScenarioReport {
        schema_version: SCHEMA_VERSION,
        spec: spec.clone(),
        aggregates: Aggregates::from_trials(&trials),
        trials,
        timing: None,
    })
}

pub fn run_scenario(spec: &SimulationSpec) -> Result<ScenarioReport> {
    run_trials(spec, 0..spec.trials)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Summary,
}

pub fn emit_report(report: &ScenarioReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Summary => summary(report),
    }
}

fn summary(report: &ScenarioReport) -> String {
    let a = &report.aggregates;
    let spec = &report.spec;
    let theory = theoretical_statistics().yield_at(spec.distribution.detector_efficiency);
    let f = a.combos.frequencies();
    let mut out = String::new();
    let strategy = spec.strategy().map(|s| s.kind.name()).unwrap_or("?");
    let scenario = spec.scenario.to_possible_value().expect("no skipped variants");
    let _ = writeln!(out, "scenario            {} ({strategy})", scenario.get_name());
    let _ = writeln!(
        out,
        "trials              {} (completed {}, aborted {}, failed {})",
        a.trials, a.completed, a.aborted, a.failed
    );
    let _ = writeln!(
        out,
        "list length         {} (check fraction {}, efficiency {})",
        spec.distribution.target_length,
        spec.distribution.check_fraction,
        spec.distribution.detector_efficiency
    );
    let _ = writeln!(out, "attempts            {}", a.attempts);
    let _ = writeln!(
        out,
        "yield               {:.4} ± {:.4} (honest theory {:.4})",
        a.valid_yield, a.valid_yield_stderr, theory
    );
    let _ = writeln!(
        out,
        "combinations        000 {:.3}  111 {:.3}  201 {:.3}  210 {:.3}  other {:.3}",
        f[0], f[1], f[2], f[3], f[4]
    );
    let _ = writeln!(out, "checked positions   {}", a.checked_positions);
    let _ = writeln!(
        out,
        "inconsistency rate  {:.4} ± {:.4}",
        a.inconsistency_rate, a.inconsistency_rate_stderr
    );
    let _ = writeln!(out, "traitor last        {:.4}", a.traitor_last_fraction);
    let r = &a.reveal_asymmetry;
    let _ = writeln!(
        out,
        "reveal asymmetry    last {:.4}  not last {:.4}  z {:.1}{}",
        r.last_rate,
        r.not_last_rate,
        r.z,
        if r.detected { " (significant)" } else { "" }
    );
    let _ = writeln!(out, "tampering detected  {:.4}", a.detection_rate);
    let _ = writeln!(out, "dba success rate    {:.4}", a.dba_success_rate);
    let cases: Vec<String> = a.table_cases.iter().map(|(k, v)| format!("{k} {v}")).collect();
    let _ = writeln!(out, "table cases         {}", if cases.is_empty() { "-".into() } else { cases.join("  ") });
    if a.list_violations > 0 {
        let _ = writeln!(out, "undetected violations {}", a.list_violations);
    }
    if let Some(t) = &report.timing {
        let _ = writeln!(out, "elapsed             {:.1} ms", t.elapsed_ms);
    }
    out
}

/// Command line of the `simulate` binary.
#[derive(Parser, Debug)]
#[command(
    name = "simulate",
    version,
    about = "Monte Carlo runs of single-qutrit detectable Byzantine agreement"
)]
pub struct Cli {
    #[arg(long, value_enum)]
    pub scenario: Scenario,
    #[arg(long, default_value_t = 10)]
    pub trials: u32,
    /// Target list length L after the cross-check.
    #[arg(long, default_value_t = 400)]
    pub length: usize,
    #[arg(long, default_value_t = 0.2)]
    pub check_fraction: f64,
    /// Detector efficiency η.
    #[arg(long, default_value_t = 1.0)]
    pub efficiency: f64,
    /// Tolerated inconsistency rate in the cross-check.
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Summary)]
    pub format: ReportFormat,
    /// Commander plan (0 attack, 1 retreat); random per trial when omitted.
    #[arg(long)]
    pub plan: Option<u8>,
    #[arg(long, default_value_t = 0.25)]
    pub expected_fraction: f64,
    #[arg(long, default_value_t = 0.25)]
    pub length_tolerance: f64,
    #[arg(long, default_value_t = 5.0)]
    pub length_sigmas: f64,
    #[arg(long, default_value_t = 1)]
    pub fallback_plan: u8,

    /// Strategy name for `--scenario custom`.
    #[arg(long)]
    pub strategy: Option<String>,
    /// computational | fourier
    #[arg(long)]
    pub basis: Option<String>,
    /// 1 (A→B) or 2 (B→C)
    #[arg(long)]
    pub hop: Option<String>,
    /// a | b | c
    #[arg(long)]
    pub traitor: Option<String>,
    /// identity | dephasing | phase_shift | ancilla_coupling
    #[arg(long)]
    pub channel: Option<String>,
    /// Dephasing strength in [0, 1].
    #[arg(long)]
    pub strength: Option<String>,
    /// Hidden phase shift n of U(n), 0..=2.
    #[arg(long)]
    pub shift: Option<String>,
    /// Ancilla coupling angle in radians.
    #[arg(long)]
    pub theta: Option<String>,
    /// Rate of false click reports.
    #[arg(long)]
    pub rate: Option<String>,
    /// always_consistent | calibrated_errors
    #[arg(long)]
    pub policy: Option<String>,
    /// Inconsistent-announcement rate of a calibrated liar.
    #[arg(long)]
    pub error_rate: Option<String>,
    /// Plan a forging lieutenant pushes (0 or 1).
    #[arg(long)]
    pub target_plan: Option<String>,

    /// Write runs, per-party lists and the transcript of trial 0 here.
    #[arg(long)]
    pub export_dir: Option<PathBuf>,
    /// Include wall-clock time in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug)]
pub struct Invocation {
    pub spec: SimulationSpec,
    pub format: ReportFormat,
    pub export_dir: Option<PathBuf>,
    pub timing: bool,
}

#[derive(Debug)]
pub enum CliError {
    /// `--help` / `--version`; print and exit successfully.
    Display(String),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Display(s) | CliError::Usage(s) => f.write_str(s),
        }
    }
}

/// Maps command-line flags onto a validated [`SimulationSpec`].
pub fn parse_cli<I, T>(args: I) -> std::result::Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Display(e.to_string())
        }
        _ => CliError::Usage(e.to_string()),
    })?;
    let usage = |e: Error| CliError::Usage(e.to_string());

    let mut spec = SimulationSpec::new(cli.scenario, cli.trials, cli.seed);
    spec.distribution = DistributionConfig {
        target_length: cli.length,
        check_fraction: cli.check_fraction,
        detector_efficiency: cli.efficiency,
        inconsistency_threshold: cli.threshold,
        rng_seed: cli.seed,
    };
    spec.agreement = AgreementConfig {
        expected_fraction: cli.expected_fraction,
        length_tolerance: cli.length_tolerance,
        length_sigmas: cli.length_sigmas,
        fallback_plan: Plan::try_from(cli.fallback_plan).map_err(usage)?,
    };
    spec.commander_plan = cli.plan.map(Plan::try_from).transpose().map_err(usage)?;
    let params = [
        ("strategy", &cli.strategy),
        ("basis", &cli.basis),
        ("hop", &cli.hop),
        ("traitor", &cli.traitor),
        ("channel", &cli.channel),
        ("strength", &cli.strength),
        ("shift", &cli.shift),
        ("theta", &cli.theta),
        ("rate", &cli.rate),
        ("policy", &cli.policy),
        ("error_rate", &cli.error_rate),
        ("target_plan", &cli.target_plan),
    ];
    for (k, v) in params {
        if let Some(v) = v {
            spec.adversary_params.insert(k.to_string(), v.clone());
        }
    }
    spec.validate().map_err(usage)?;
    Ok(Invocation {
        spec,
        format: cli.format,
        export_dir: cli.export_dir,
        timing: cli.timing,
    })
}
