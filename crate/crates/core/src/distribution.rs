//! Distribution of the correlated lists.
//!
//! One attempt ("run") sends a single qutrit A → B → C. C measures; on a
//! `|ψ₀⟩` click the generals announce bases in the order C, B, A and the run
//! is kept when all three match. A random subset of kept runs is sacrificed
//! to a cross-check in which the numbers are revealed in random order; the
//! rest form the lists `l_A`, `l_B`, `l_C`.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::sync::OnceLock;

use num_rational::Ratio;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversaries::{
    Adversary, AttackHook, AttackTrace, BasisRevealHook, DetectionReporter, RevealContext,
    RevealHook,
};
use crate::qutrit::{
    apply_operator, apply_operator_mixed, basis_operator, encode_operator, fourier_basis,
    outcome_probabilities, prepare_initial, sample_outcome, BasisChoice, MeasurementOutcome,
    PhaseOperator,
};
use crate::{Error, Result, Trit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GeneralId {
    A,
    B,
    C,
}

impl GeneralId {
    pub const ALL: [GeneralId; 3] = [GeneralId::A, GeneralId::B, GeneralId::C];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Numbers this general may encode: A uses trits, B and C bits.
    pub fn alphabet(self) -> &'static [Trit] {
        match self {
            GeneralId::A => &Trit::ALL,
            GeneralId::B | GeneralId::C => &[Trit::ZERO, Trit::ONE],
        }
    }

    pub fn parse(s: &str) -> Option<GeneralId> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Some(GeneralId::A),
            "b" => Some(GeneralId::B),
            "c" => Some(GeneralId::C),
            _ => None,
        }
    }
}

/// Quantum channel between two generals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Hop {
    /// A → B.
    AToB = 1,
    /// B → C.
    BToC = 2,
}

impl TryFrom<u8> for Hop {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Hop::AToB),
            2 => Ok(Hop::BToC),
            _ => Err(Error::InvalidStrategy(format!("hop {v} is not 1 or 2"))),
        }
    }
}

impl From<Hop> for u8 {
    fn from(h: Hop) -> u8 {
        h as u8
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartyChoices {
    pub basis: BasisChoice,
    pub number: Trit,
}

impl PartyChoices {
    pub fn commander(basis: BasisChoice, number: Trit) -> Self {
        PartyChoices { basis, number }
    }

    /// B and C may only encode 0 or 1.
    pub fn lieutenant(basis: BasisChoice, number: Trit) -> Result<Self> {
        if number == Trit::TWO {
            return Err(Error::OutOfAlphabet(2));
        }
        Ok(PartyChoices { basis, number })
    }

    /// The basis phase followed by the number encoding.
    pub fn operator(&self) -> PhaseOperator {
        basis_operator(self.basis).compose(&encode_operator(self.number))
    }

    fn draw<R: Rng + ?Sized>(general: GeneralId, rng: &mut R) -> Self {
        let basis = if rng.gen_bool(0.5) { BasisChoice::II } else { BasisChoice::I };
        let alphabet = general.alphabet();
        let number = alphabet[rng.gen_range(0..alphabet.len())];
        PartyChoices { basis, number }
    }
}

/// Everything that happened in one distribution attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: u64,
    pub choices_a: PartyChoices,
    pub choices_b: PartyChoices,
    pub choices_c: PartyChoices,
    pub attack_trace: Option<AttackTrace>,
    /// `None` when the detector did not click.
    pub outcome: Option<MeasurementOutcome>,
    pub detection_claimed: bool,
    /// Announcement order: C, B, A.
    pub bases_announced: Option<[BasisChoice; 3]>,
    pub valid: bool,
    pub consumed_by_check: bool,
}

impl RunRecord {
    pub fn choices(&self, general: GeneralId) -> &PartyChoices {
        match general {
            GeneralId::A => &self.choices_a,
            GeneralId::B => &self.choices_b,
            GeneralId::C => &self.choices_c,
        }
    }

    pub fn numbers(&self) -> [Trit; 3] {
        [self.choices_a.number, self.choices_b.number, self.choices_c.number]
    }

    pub fn bases_match(&self) -> bool {
        self.choices_a.basis == self.choices_b.basis && self.choices_b.basis == self.choices_c.basis
    }

    pub fn sum_rule_holds(&self) -> bool {
        self.numbers().iter().map(|t| t.value()).sum::<u8>() % 3 == 0
    }

    pub fn combination(&self) -> Combination {
        let [a, b, c] = self.numbers();
        Combination::classify(a, b, c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionConfig {
    /// Number of list positions wanted after the cross-check.
    pub target_length: usize,
    pub check_fraction: f64,
    pub detector_efficiency: f64,
    /// Largest tolerated fraction of inconsistent checked runs.
    pub inconsistency_threshold: f64,
    pub rng_seed: u64,
}

impl Default for DistributionConfig {
    fn default() -> Self {
        DistributionConfig {
            target_length: 400,
            check_fraction: 0.2,
            detector_efficiency: 1.0,
            inconsistency_threshold: 0.0,
            rng_seed: 0,
        }
    }
}

impl DistributionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_length == 0 {
            return Err(Error::InvalidConfig("target length must be positive".into()));
        }
        if !(self.check_fraction > 0.0 && self.check_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "check fraction {} not in (0, 1)",
                self.check_fraction
            )));
        }
        if !(self.detector_efficiency > 0.0 && self.detector_efficiency <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "detector efficiency {} not in (0, 1]",
                self.detector_efficiency
            )));
        }
        if !(0.0..=1.0).contains(&self.inconsistency_threshold) {
            return Err(Error::InvalidConfig(format!(
                "inconsistency threshold {} not in [0, 1]",
                self.inconsistency_threshold
            )));
        }
        Ok(())
    }

    /// Valid runs needed so that about `target_length` survive the check.
    pub fn required_valid_runs(&self) -> usize {
        (self.target_length as f64 / (1.0 - self.check_fraction)).ceil() as usize
    }

    /// 100 × the expected number of honest attempts.
    pub fn attempt_budget(&self) -> u64 {
        let expected = self.required_valid_runs() as f64 * 12.0 / self.detector_efficiency;
        100 * expected.ceil() as u64
    }
}

fn compute_pure_probabilities(choices: &[PartyChoices; 3]) -> [f64; 3] {
    let op = PhaseOperator::compose_all(&choices.map(|c| c.operator()));
    let s = apply_operator(&op, &prepare_initial());
    fourier_basis().map(|f| f.inner(&s).norm_sqr())
}

fn config_key(choices: &[PartyChoices; 3]) -> usize {
    choices.iter().fold(0, |key, c| {
        key * 6 + usize::from(c.basis == BasisChoice::II) * 3 + usize::from(c.number.value())
    })
}

/// Unattacked outcome probabilities; there are only 216 (basis, number)
/// triples, so they are computed once and looked up afterwards.
fn pure_outcome_probabilities(choices: &[PartyChoices; 3]) -> [f64; 3] {
    static TABLE: OnceLock<Vec<[f64; 3]>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        (0..216)
            .map(|key: usize| {
                let party = |k: usize| PartyChoices {
                    basis: BasisChoice::ALL[k / 3],
                    number: Trit::ALL[k % 3],
                };
                compute_pure_probabilities(&[party(key / 36), party(key / 6 % 6), party(key % 6)])
            })
            .collect()
    });
    table[config_key(choices)]
}

/// Runs steps from preparation to C's measurement.
///
/// The hook, if any, acts on the state in flight at its hop. Without a hook
/// the state stays pure and the whole run collapses to one phase operator.
pub fn execute_run<R: Rng + ?Sized>(
    run_id: u64,
    choices: [PartyChoices; 3],
    attack: Option<&mut dyn AttackHook>,
    efficiency: f64,
    rng: &mut R,
) -> RunRecord {
    let [a, b, c] = choices;
    let mut attack_trace = None;
    let probs = match attack {
        None => pure_outcome_probabilities(&[a, b, c]),
        Some(hook) => {
            let mut rho = apply_operator_mixed(&a.operator(), &prepare_initial().density());
            if hook.location() == Hop::AToB {
                let (next, trace) = hook.intercept(rho);
                rho = next;
                attack_trace = trace;
            }
            rho = apply_operator_mixed(&b.operator(), &rho);
            if hook.location() == Hop::BToC {
                let (next, trace) = hook.intercept(rho);
                rho = next;
                attack_trace = trace;
            }
            rho = apply_operator_mixed(&c.operator(), &rho);
            outcome_probabilities(&rho)
        }
    };
    let outcome = if rng.gen_bool(efficiency) {
        Some(sample_outcome(probs, rng))
    } else {
        None
    };
    RunRecord {
        run_id,
        choices_a: a,
        choices_b: b,
        choices_c: c,
        attack_trace,
        outcome,
        detection_claimed: false,
        bases_announced: None,
        valid: false,
        consumed_by_check: false,
    }
}

/// Traitor behaviour during sifting.
#[derive(Default)]
pub struct SiftHooks<'a> {
    /// Replaces C's honest click announcement.
    pub detection: Option<&'a mut dyn DetectionReporter>,
    /// The traitor and how it announces its basis.
    pub basis: Option<(GeneralId, &'a mut dyn BasisRevealHook)>,
}

/// C announces whether it saw `|ψ₀⟩`; on a claimed click the bases are
/// announced C first, A last, and the run is valid iff they all agree.
pub fn reveal_and_sift(mut record: RunRecord, hooks: SiftHooks<'_>) -> RunRecord {
    let honest_claim = record.outcome.is_some_and(MeasurementOutcome::is_detection);
    record.detection_claimed = match hooks.detection {
        Some(reporter) => reporter.claim_detection(record.outcome),
        None => honest_claim,
    };
    if record.detection_claimed && !honest_claim && record.attack_trace.is_none() {
        record.attack_trace = Some(AttackTrace::FalseDetectionClaim);
    }
    if !record.detection_claimed {
        record.valid = false;
        record.bases_announced = None;
        return record;
    }

    let mut basis_hook = hooks.basis;
    let mut announced = Vec::with_capacity(3);
    for general in [GeneralId::C, GeneralId::B, GeneralId::A] {
        let own = record.choices(general).basis;
        let said = match basis_hook.as_mut() {
            Some((traitor, hook)) if *traitor == general => hook.announce(own, &announced),
            _ => own,
        };
        announced.push(said);
    }
    record.valid = announced.iter().all(|&b| b == announced[0]);
    record.bases_announced = Some([announced[0], announced[1], announced[2]]);
    record
}

fn attempt<R: Rng + ?Sized>(
    run_id: u64,
    efficiency: f64,
    adversary: &mut Adversary,
    rng: &mut R,
) -> RunRecord {
    let choices = GeneralId::ALL.map(|g| PartyChoices::draw(g, rng));
    let record = execute_run(run_id, choices, adversary.attack_hook(), efficiency, rng);
    reveal_and_sift(record, adversary.sift_hooks())
}

/// Runs attempts with honest random choices until enough valid runs exist.
pub fn run_batch<R: Rng + ?Sized>(
    config: &DistributionConfig,
    adversary: &mut Adversary,
    rng: &mut R,
) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let needed = config.required_valid_runs();
    let budget = config.attempt_budget();
    let mut records = Vec::with_capacity(needed * 13);
    let mut valid = 0usize;
    let mut run_id = 0u64;
    while valid < needed {
        if run_id >= budget {
            return Err(Error::AttemptBudgetExhausted { budget, valid, needed });
        }
        let record = attempt(run_id, config.detector_efficiency, adversary, rng);
        valid += usize::from(record.valid);
        records.push(record);
        run_id += 1;
    }
    Ok(records)
}

/// Runs exactly `attempts` attempts, e.g. to measure the valid-run yield
/// without a stopping rule.
pub fn run_attempts<R: Rng + ?Sized>(
    attempts: u64,
    efficiency: f64,
    adversary: &mut Adversary,
    rng: &mut R,
) -> Result<Vec<RunRecord>> {
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::InvalidConfig(format!("detector efficiency {efficiency} not in (0, 1]")));
    }
    Ok((0..attempts).map(|id| attempt(id, efficiency, adversary, rng)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckVerdict {
    Clean,
    TamperingDetected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    /// Run ids of the sacrificed runs.
    pub checked_positions: Vec<u64>,
    pub reveal_orders: Vec<[GeneralId; 3]>,
    pub inconsistencies: usize,
    /// Checked runs in which the traitor revealed last.
    pub traitor_last_count: usize,
    pub traitor_last_inconsistencies: usize,
    pub traitor_not_last_inconsistencies: usize,
    pub verdict: CheckVerdict,
}

impl CrossCheckReport {
    pub fn checked(&self) -> usize {
        self.checked_positions.len()
    }

    pub fn inconsistency_rate(&self) -> f64 {
        if self.checked() == 0 {
            0.0
        } else {
            self.inconsistencies as f64 / self.checked() as f64
        }
    }
}

/// Sacrifices a uniformly random `floor(check_fraction · valid)` of the valid runs;
/// numbers of a checked run are revealed one by one in a uniformly random order.
pub fn cross_check<R: Rng + ?Sized>(
    records: &mut [RunRecord],
    config: &DistributionConfig,
    traitor: Option<GeneralId>,
    mut hook: Option<&mut dyn RevealHook>,
    rng: &mut R,
) -> CrossCheckReport {
    let mut report = CrossCheckReport {
        checked_positions: Vec::new(),
        reveal_orders: Vec::new(),
        inconsistencies: 0,
        traitor_last_count: 0,
        traitor_last_inconsistencies: 0,
        traitor_not_last_inconsistencies: 0,
        verdict: CheckVerdict::Clean,
    };
    let valid: Vec<usize> = (0..records.len()).filter(|&i| records[i].valid).collect();
    // floor(f·n) checks leave at least n(1−f) ≥ L positions when n meets the batch minimum.
    let amount = (config.check_fraction * valid.len() as f64).floor() as usize;
    let mut picked: Vec<usize> = index::sample(rng, valid.len(), amount)
        .into_iter()
        .map(|k| valid[k])
        .collect();
    picked.sort_unstable();
    for i in picked {
        let record = &mut records[i];
        let mut order = GeneralId::ALL;
        order.shuffle(rng);
        let mut revealed: Vec<(GeneralId, Trit)> = Vec::with_capacity(3);
        for (slot, &general) in order.iter().enumerate() {
            let own = record.choices(general).number;
            let said = match hook.as_mut() {
                Some(h) if traitor == Some(general) => h.reveal(&RevealContext {
                    run_id: record.run_id,
                    traitor: general,
                    own,
                    earlier: &revealed,
                    is_last: slot == 2,
                }),
                _ => own,
            };
            revealed.push((general, said));
        }
        let sum: u8 = revealed.iter().map(|(_, t)| t.value()).sum();
        let inconsistent = !sum.is_multiple_of(3);
        report.inconsistencies += usize::from(inconsistent);
        if let Some(t) = traitor {
            if order[2] == t {
                report.traitor_last_count += 1;
                report.traitor_last_inconsistencies += usize::from(inconsistent);
            } else {
                report.traitor_not_last_inconsistencies += usize::from(inconsistent);
            }
        }
        record.consumed_by_check = true;
        report.checked_positions.push(record.run_id);
        report.reveal_orders.push(order);
    }
    if report.inconsistency_rate() > config.inconsistency_threshold {
        report.verdict = CheckVerdict::TamperingDetected;
    }
    report
}

/// The four admissible `(a, b, c)` patterns of a valid run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Combination {
    #[serde(rename = "000")]
    C000,
    #[serde(rename = "111")]
    C111,
    #[serde(rename = "201")]
    C201,
    #[serde(rename = "210")]
    C210,
    #[serde(rename = "other")]
    Other,
}

impl Combination {
    pub const VALID: [Combination; 4] = [
        Combination::C000,
        Combination::C111,
        Combination::C201,
        Combination::C210,
    ];

    pub fn classify(a: Trit, b: Trit, c: Trit) -> Self {
        match (a.value(), b.value(), c.value()) {
            (0, 0, 0) => Combination::C000,
            (1, 1, 1) => Combination::C111,
            (2, 0, 1) => Combination::C201,
            (2, 1, 0) => Combination::C210,
            _ => Combination::Other,
        }
    }
}

/// Aligned private lists. Position `j` of every list comes from the same run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelatedLists {
    l_a: Vec<Trit>,
    l_b: Vec<Trit>,
    l_c: Vec<Trit>,
}

impl CorrelatedLists {
    /// Checks lengths, alphabets and `(a + b + c) mod 3 = 0` everywhere.
    pub fn new(l_a: Vec<Trit>, l_b: Vec<Trit>, l_c: Vec<Trit>) -> Result<Self> {
        if l_a.len() != l_b.len() || l_b.len() != l_c.len() {
            return Err(Error::LengthMismatch(l_a.len(), l_b.len(), l_c.len()));
        }
        if let Some(bad) = l_b.iter().chain(&l_c).find(|&&t| t == Trit::TWO) {
            return Err(Error::OutOfAlphabet(bad.value()));
        }
        let lists = CorrelatedLists { l_a, l_b, l_c };
        match lists.violations().first() {
            Some(&j) => Err(Error::ListInvariant(j)),
            None => Ok(lists),
        }
    }

    pub fn l_a(&self) -> &[Trit] {
        &self.l_a
    }

    pub fn l_b(&self) -> &[Trit] {
        &self.l_b
    }

    pub fn l_c(&self) -> &[Trit] {
        &self.l_c
    }

    pub fn list(&self, general: GeneralId) -> &[Trit] {
        match general {
            GeneralId::A => &self.l_a,
            GeneralId::B => &self.l_b,
            GeneralId::C => &self.l_c,
        }
    }

    pub fn len(&self) -> usize {
        self.l_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l_a.is_empty()
    }

    /// Positions where the sum rule fails (only possible after tampering).
    pub fn violations(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| !(self.l_a[j].value() + self.l_b[j].value() + self.l_c[j].value()).is_multiple_of(3))
            .collect()
    }

    pub fn is_correlated(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn truncate(&mut self, len: usize) {
        self.l_a.truncate(len);
        self.l_b.truncate(len);
        self.l_c.truncate(len);
    }

    /// Exchanges the roles of B and C.
    pub fn swap_lieutenants(&self) -> Self {
        CorrelatedLists {
            l_a: self.l_a.clone(),
            l_b: self.l_c.clone(),
            l_c: self.l_b.clone(),
        }
    }

    pub fn combination_counts(&self) -> BTreeMap<Combination, usize> {
        let mut counts = BTreeMap::new();
        for j in 0..self.len() {
            *counts
                .entry(Combination::classify(self.l_a[j], self.l_b[j], self.l_c[j]))
                .or_insert(0) += 1;
        }
        counts
    }
}

/// Lists from the valid runs that were not sacrificed, in run order.
pub fn assemble_lists(records: &[RunRecord]) -> CorrelatedLists {
    let kept = records.iter().filter(|r| r.valid && !r.consumed_by_check);
    let mut lists = CorrelatedLists {
        l_a: Vec::new(),
        l_b: Vec::new(),
        l_c: Vec::new(),
    };
    for r in kept {
        lists.l_a.push(r.choices_a.number);
        lists.l_b.push(r.choices_b.number);
        lists.l_c.push(r.choices_c.number);
    }
    lists
}

/// Writes one JSON object per run.
pub fn write_runs_jsonl<W: Write>(records: &[RunRecord], mut out: W) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes `{"position": j, "l_x": v}` lines holding only `party`'s own list.
pub fn write_party_list_jsonl<W: Write>(
    lists: &CorrelatedLists,
    party: GeneralId,
    mut out: W,
) -> io::Result<()> {
    let key = match party {
        GeneralId::A => "l_a",
        GeneralId::B => "l_b",
        GeneralId::C => "l_c",
    };
    for (j, v) in lists.list(party).iter().enumerate() {
        let mut line = serde_json::Map::new();
        line.insert("position".into(), j.into());
        line.insert(key.into(), v.value().into());
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// All 96 honest configurations: 8 basis patterns × 3 × 2 × 2 numbers.
pub fn enumerate_honest_configurations() -> Vec<[PartyChoices; 3]> {
    let mut out = Vec::with_capacity(96);
    for ba in BasisChoice::ALL {
        for bb in BasisChoice::ALL {
            for bc in BasisChoice::ALL {
                for &a in GeneralId::A.alphabet() {
                    for &b in GeneralId::B.alphabet() {
                        for &c in GeneralId::C.alphabet() {
                            out.push([
                                PartyChoices { basis: ba, number: a },
                                PartyChoices { basis: bb, number: b },
                                PartyChoices { basis: bc, number: c },
                            ]);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Exact `|⟨ψ₀|U|ψ₀⟩|²` for an honest configuration.
///
/// The composed operator is `diag(1, ω^p, ω^q)` with `p = n_II + s`,
/// `q = n_II − s` (`s` the number sum, `n_II` the count of basis-II parties),
/// and `|1 + ω^p + ω^q|²/9` is 1, 0 or 1/3.
pub fn exact_detection_probability(config: &[PartyChoices; 3]) -> Ratio<u64> {
    let n_ii = config.iter().filter(|c| c.basis == BasisChoice::II).count() as i64;
    let s: i64 = config.iter().map(|c| i64::from(c.number.value())).sum();
    let p = Trit::wrapping(n_ii + s).value();
    let q = Trit::wrapping(n_ii - s).value();
    if p == 0 && q == 0 {
        Ratio::from_integer(1)
    } else if p != 0 && q != 0 && p != q {
        Ratio::from_integer(0)
    } else {
        Ratio::new(1, 3)
    }
}

/// Closed-form statistics of the honest protocol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoreticalStatistics {
    /// Valid runs per attempt at unit detector efficiency.
    pub valid_yield: Ratio<u64>,
    /// Click probability when bases do not all match.
    pub mixed_basis_false_detection: Ratio<u64>,
    /// Over `Combination::VALID`.
    pub combo_distribution: [Ratio<u64>; 4],
    /// Distribution of `l_A[j]` over 0, 1, 2.
    pub a_marginal: [Ratio<u64>; 3],
}

impl TheoreticalStatistics {
    pub fn yield_at(&self, efficiency: f64) -> f64 {
        efficiency * ratio_f64(self.valid_yield)
    }
}

pub fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Enumerates the uniformly weighted honest configurations exactly.
pub fn theoretical_statistics() -> TheoreticalStatistics {
    let configs = enumerate_honest_configurations();
    let weight = Ratio::new(1, configs.len() as u64);
    let zero = Ratio::from_integer(0);
    let mut valid_yield = zero;
    let mut combos = [zero; 4];
    let mut mixed_mass = zero;
    let mut mixed_click = zero;
    for config in &configs {
        let p = exact_detection_probability(config);
        let matched = config.iter().all(|c| c.basis == config[0].basis);
        if matched {
            valid_yield += weight * p;
            let combo = Combination::classify(config[0].number, config[1].number, config[2].number);
            if let Some(i) = Combination::VALID.iter().position(|&c| c == combo) {
                combos[i] += weight * p;
            }
        } else {
            mixed_mass += weight;
            mixed_click += weight * p;
        }
    }
    let combo_distribution = combos.map(|c| c / valid_yield);
    let half_201_210 = combo_distribution[2] + combo_distribution[3];
    TheoreticalStatistics {
        valid_yield,
        mixed_basis_false_detection: mixed_click / mixed_mass,
        combo_distribution,
        a_marginal: [combo_distribution[0], combo_distribution[1], half_201_210],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::{Adversary, MatchEarlier};
    use crate::random::derive_rng;

    #[test]
    fn cached_probabilities_match_direct_computation() {
        for config in enumerate_honest_configurations() {
            assert_eq!(pure_outcome_probabilities(&config), compute_pure_probabilities(&config));
        }
    }

    fn choices(bases: [BasisChoice; 3], numbers: [u8; 3]) -> [PartyChoices; 3] {
        [0, 1, 2].map(|i| PartyChoices {
            basis: bases[i],
            number: Trit::new(numbers[i]).unwrap(),
        })
    }

    use BasisChoice::{I, II};

    #[test]
    fn matched_runs_with_zero_sum_always_click() {
        let mut rng = derive_rng(3, 0);
        for _ in 0..200 {
            let r = execute_run(0, choices([I, I, I], [0, 0, 0]), None, 1.0, &mut rng);
            assert_eq!(r.outcome, Some(MeasurementOutcome::DETECTED));
            let r = execute_run(0, choices([II, II, II], [2, 0, 1]), None, 1.0, &mut rng);
            assert_eq!(r.outcome, Some(MeasurementOutcome::DETECTED));
        }
    }

    #[test]
    fn mixed_bases_click_one_third_of_the_time() {
        let mut rng = derive_rng(4, 0);
        let n = 10_000;
        let clicks = (0..n)
            .filter(|_| {
                let r = execute_run(0, choices([I, II, II], [1, 0, 1]), None, 1.0, &mut rng);
                r.outcome == Some(MeasurementOutcome::DETECTED)
            })
            .count();
        assert!((clicks as f64 / n as f64 - 1.0 / 3.0).abs() < 0.02);
    }

    #[test]
    fn sifting_rules() {
        let mut rng = derive_rng(5, 0);
        let r = execute_run(0, choices([II, II, II], [0, 0, 0]), None, 1.0, &mut rng);
        let r = reveal_and_sift(r, SiftHooks::default());
        assert!(r.valid && r.detection_claimed);
        assert_eq!(r.bases_announced, Some([II, II, II]));

        let mut r = execute_run(0, choices([I, I, II], [0, 0, 0]), None, 1.0, &mut rng);
        r.outcome = Some(MeasurementOutcome::DETECTED);
        let sifted = reveal_and_sift(r.clone(), SiftHooks::default());
        assert!(!sifted.valid);
        assert_eq!(sifted.bases_announced, Some([II, I, I]));

        // A announces last and copies what it heard
        let mut r2 = r.clone();
        r2.choices_a.basis = II;
        r2.choices_c.basis = I;
        let mut liar = MatchEarlier;
        let hooks = SiftHooks {
            detection: None,
            basis: Some((GeneralId::A, &mut liar)),
        };
        let sifted = reveal_and_sift(r2, hooks);
        assert!(sifted.valid);
        assert_eq!(sifted.bases_announced, Some([I, I, I]));

        let mut r3 = r;
        r3.outcome = Some(MeasurementOutcome::new(1).unwrap());
        let sifted = reveal_and_sift(r3, SiftHooks::default());
        assert!(!sifted.valid && sifted.bases_announced.is_none());
    }

    #[test]
    fn no_click_runs_are_discarded() {
        let mut rng = derive_rng(6, 0);
        let mut missed = 0;
        for _ in 0..2000 {
            let r = execute_run(0, choices([I, I, I], [0, 0, 0]), None, 0.5, &mut rng);
            let r = reveal_and_sift(r, SiftHooks::default());
            if r.outcome.is_none() {
                missed += 1;
                assert!(!r.valid);
            } else {
                assert!(r.valid);
            }
        }
        assert!((missed as f64 / 2000.0 - 0.5).abs() < 0.05);
    }

    #[test]
    fn config_validation() {
        let ok = DistributionConfig::default();
        assert!(ok.validate().is_ok());
        assert_eq!(ok.required_valid_runs(), 500);
        for bad in [
            DistributionConfig { check_fraction: 0.0, ..ok.clone() },
            DistributionConfig { check_fraction: 1.0, ..ok.clone() },
            DistributionConfig { detector_efficiency: 0.0, ..ok.clone() },
            DistributionConfig { detector_efficiency: 1.2, ..ok.clone() },
            DistributionConfig { target_length: 0, ..ok.clone() },
            DistributionConfig { inconsistency_threshold: -0.1, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn honest_batch_meets_target_and_sum_rule() {
        let config = DistributionConfig { target_length: 100, ..Default::default() };
        let mut rng = derive_rng(9, 0);
        let mut records = run_batch(&config, &mut Adversary::honest(), &mut rng).unwrap();
        let valid = records.iter().filter(|r| r.valid).count();
        assert!(valid >= config.required_valid_runs());
        assert!(records.iter().filter(|r| r.valid).all(RunRecord::sum_rule_holds));
        let report = cross_check(&mut records, &config, None, None, &mut rng);
        assert_eq!(report.inconsistencies, 0);
        assert_eq!(report.verdict, CheckVerdict::Clean);
        let lists = assemble_lists(&records);
        assert!(lists.is_correlated());
        assert_eq!(lists.len() + report.checked(), valid);
        for r in records.iter().filter(|r| r.consumed_by_check) {
            assert!(r.valid);
        }
    }

    #[test]
    fn assemble_transcribes_combinations() {
        let mut rng = derive_rng(1, 1);
        let combos = [[0, 0, 0], [2, 0, 1], [1, 1, 1], [2, 1, 0]];
        let records: Vec<_> = combos
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let r = execute_run(i as u64, choices([I, I, I], n), None, 1.0, &mut rng);
                reveal_and_sift(r, SiftHooks::default())
            })
            .collect();
        let lists = assemble_lists(&records);
        let v = |l: &[Trit]| l.iter().map(|t| t.value()).collect::<Vec<_>>();
        assert_eq!(v(lists.l_a()), [0, 2, 1, 2]);
        assert_eq!(v(lists.l_b()), [0, 0, 1, 1]);
        assert_eq!(v(lists.l_c()), [0, 1, 1, 0]);
        for j in 0..lists.len() {
            let anti = lists.l_b()[j] != lists.l_c()[j];
            assert_eq!(lists.l_a()[j] == Trit::TWO, anti);
        }
    }

    #[test]
    fn lists_constructor_checks_invariants() {
        let t = |v: &[u8]| v.iter().map(|&x| Trit::new(x).unwrap()).collect::<Vec<_>>();
        assert!(CorrelatedLists::new(t(&[0, 2]), t(&[0, 0]), t(&[0, 0])) == Err(Error::ListInvariant(1)));
        assert_eq!(
            CorrelatedLists::new(t(&[0]), t(&[0, 1]), t(&[0])),
            Err(Error::LengthMismatch(1, 2, 1))
        );
        assert_eq!(
            CorrelatedLists::new(t(&[1]), t(&[2]), t(&[0])),
            Err(Error::OutOfAlphabet(2))
        );
        assert!(CorrelatedLists::new(t(&[2, 1]), t(&[1, 1]), t(&[0, 1])).is_ok());
    }

    #[test]
    fn theory_matches_hand_counts() {
        let th = theoretical_statistics();
        assert_eq!(th.valid_yield, Ratio::new(1, 12));
        assert_eq!(th.mixed_basis_false_detection, Ratio::new(1, 3));
        assert_eq!(th.combo_distribution, [Ratio::new(1, 4); 4]);
        assert_eq!(th.a_marginal, [Ratio::new(1, 4), Ratio::new(1, 4), Ratio::new(1, 2)]);
        assert!((th.yield_at(0.5) - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn jsonl_export_redacts_other_parties() {
        let t = |v: &[u8]| v.iter().map(|&x| Trit::new(x).unwrap()).collect::<Vec<_>>();
        let lists = CorrelatedLists::new(t(&[2, 0]), t(&[1, 0]), t(&[0, 0])).unwrap();
        let mut buf = Vec::new();
        write_party_list_jsonl(&lists, GeneralId::B, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "{\"l_b\":1,\"position\":0}\n{\"l_b\":0,\"position\":1}\n");

        let mut rng = derive_rng(2, 0);
        let r = execute_run(7, choices([I, I, I], [0, 0, 0]), None, 1.0, &mut rng);
        let r = reveal_and_sift(r, SiftHooks::default());
        let mut buf = Vec::new();
        write_runs_jsonl(std::slice::from_ref(&r), &mut buf).unwrap();
        let line: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        for key in [
            "run_id",
            "choices_a",
            "choices_b",
            "choices_c",
            "attack_trace",
            "outcome",
            "detection_claimed",
            "bases_announced",
            "valid",
            "consumed_by_check",
        ] {
            assert!(line.get(key).is_some(), "{key}");
        }
        let back: RunRecord = serde_json::from_value(line).unwrap();
        assert_eq!(back, r);
    }
}
