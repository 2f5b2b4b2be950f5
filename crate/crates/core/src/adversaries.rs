//! Traitor strategies.
//!
//! A strategy is a plain description ([`AdversaryStrategy`]); [`Adversary`]
//! instantiates it into hooks that the distribution and agreement phases
//! call at the points where a traitor can act:
//!
//! - [`AttackHook`] on the qutrit in flight (intercept-resend, Kraus channels),
//! - [`DetectionReporter`] for C's click announcement,
//! - [`BasisRevealHook`] for the basis announcements,
//! - [`RevealHook`] for the number reveals of the cross-check,
//! - [`AgreementBehavior`] for the classical messages.
//!
//! Every hook owns its random source, so the honest parties' randomness is
//! untouched by whatever the traitor draws.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agreement::{build_position_message, Plan, PositionMessage};
use crate::distribution::{CrossCheckReport, GeneralId, Hop, SiftHooks};
use crate::qutrit::{
    apply_channel, encode_operator, probabilities_in_basis, sample_outcome, AttackChannel,
    BasisChoice, MeasurementBasis, MeasurementOutcome, MixedState,
};
use crate::random::{derive_rng, RandomSource};
use crate::{Error, Result, Trit};

/// What the adversary did to a particular run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum AttackTrace {
    Intercepted {
        hop: Hop,
        basis: MeasurementBasis,
        outcome: u8,
    },
    Channel {
        hop: Hop,
    },
    FalseDetectionClaim,
}

/// Acts on the qutrit while it travels over one hop.
pub trait AttackHook {
    fn location(&self) -> Hop;
    fn intercept(&mut self, state: MixedState) -> (MixedState, Option<AttackTrace>);
}

/// Decides what C announces after its measurement.
pub trait DetectionReporter {
    fn claim_detection(&mut self, outcome: Option<MeasurementOutcome>) -> bool;
}

/// Chooses the traitor's basis announcement after hearing `earlier` ones.
pub trait BasisRevealHook {
    fn announce(&mut self, own: BasisChoice, earlier: &[BasisChoice]) -> BasisChoice;
}

/// What the traitor knows when it must reveal a number in the cross-check.
#[derive(Debug)]
pub struct RevealContext<'a> {
    pub run_id: u64,
    pub traitor: GeneralId,
    /// The number the traitor actually encoded.
    pub own: Trit,
    pub earlier: &'a [(GeneralId, Trit)],
    pub is_last: bool,
}

pub trait RevealHook {
    fn reveal(&mut self, ctx: &RevealContext<'_>) -> Trit;
}

/// Measures the passing qutrit in a fixed basis and resends the eigenstate.
pub struct InterceptResend {
    basis: MeasurementBasis,
    hop: Hop,
    rng: RandomSource,
    /// Outcomes seen so far, one per intercepted run.
    pub memory: Vec<u8>,
}

pub fn make_intercept_resend(basis: MeasurementBasis, hop: Hop, rng: RandomSource) -> InterceptResend {
    InterceptResend {
        basis,
        hop,
        rng,
        memory: Vec::new(),
    }
}

impl AttackHook for InterceptResend {
    fn location(&self) -> Hop {
        self.hop
    }

    fn intercept(&mut self, state: MixedState) -> (MixedState, Option<AttackTrace>) {
        let basis = self.basis.states();
        let outcome = sample_outcome(probabilities_in_basis(&state, &basis), &mut self.rng);
        let k = outcome.index();
        self.memory.push(k);
        let resent = basis[k as usize].density();
        let trace = AttackTrace::Intercepted {
            hop: self.hop,
            basis: self.basis,
            outcome: k,
        };
        (resent, Some(trace))
    }
}

/// Applies a fixed channel; models an ancilla that is entangled and kept.
pub struct KrausAttack {
    channel: AttackChannel,
    hop: Hop,
}

pub fn make_kraus_attack(channel: AttackChannel, hop: Hop) -> KrausAttack {
    KrausAttack { channel, hop }
}

impl KrausAttack {
    /// Validates raw Kraus operators first.
    pub fn from_operators(ops: Vec<nalgebra::Matrix3<crate::qutrit::C64>>, hop: Hop) -> Result<Self> {
        Ok(make_kraus_attack(AttackChannel::new(ops)?, hop))
    }
}

impl AttackHook for KrausAttack {
    fn location(&self) -> Hop {
        self.hop
    }

    fn intercept(&mut self, state: MixedState) -> (MixedState, Option<AttackTrace>) {
        (
            apply_channel(&self.channel, &state),
            Some(AttackTrace::Channel { hop: self.hop }),
        )
    }
}

/// Runs the inner hook on a random fraction of runs.
pub struct Intermittent<H> {
    inner: H,
    rate: f64,
    rng: RandomSource,
}

impl<H: AttackHook> Intermittent<H> {
    pub fn new(inner: H, rate: f64, rng: RandomSource) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidStrategy(format!("attack rate {rate} not in [0, 1]")));
        }
        Ok(Intermittent { inner, rate, rng })
    }
}

impl<H: AttackHook> AttackHook for Intermittent<H> {
    fn location(&self) -> Hop {
        self.inner.location()
    }

    fn intercept(&mut self, state: MixedState) -> (MixedState, Option<AttackTrace>) {
        if self.rng.gen_bool(self.rate) {
            self.inner.intercept(state)
        } else {
            (state, None)
        }
    }
}

/// C claims a `|ψ₀⟩` click on a fraction `rate` of runs where none happened.
pub struct FalseDetectionReport {
    rate: f64,
    rng: RandomSource,
}

pub fn false_detection_report(rate: f64, rng: RandomSource) -> Result<FalseDetectionReport> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidStrategy(format!("false report rate {rate} not in [0, 1]")));
    }
    Ok(FalseDetectionReport { rate, rng })
}

impl DetectionReporter for FalseDetectionReport {
    fn claim_detection(&mut self, outcome: Option<MeasurementOutcome>) -> bool {
        match outcome {
            Some(o) if o.is_detection() => true,
            _ => self.rng.gen_bool(self.rate),
        }
    }
}

/// Announces whatever basis was announced just before, making any run whose
/// earlier announcements agree look valid.
pub struct MatchEarlier;

impl BasisRevealHook for MatchEarlier {
    fn announce(&mut self, own: BasisChoice, earlier: &[BasisChoice]) -> BasisChoice {
        earlier.last().copied().unwrap_or(own)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum RevealPolicy {
    /// Completes the sum rule whenever revealing last.
    AlwaysConsistent,
    /// Like `AlwaysConsistent` but deliberately breaks the rule at this rate
    /// when last, so the last-position subset does not look too clean.
    CalibratedErrors { error_rate: f64 },
}

/// A traitor that does not know a consistent number for its runs and has to
/// make one up during the cross-check.
pub struct RevealLiar {
    policy: RevealPolicy,
    rng: RandomSource,
}

pub fn reveal_liar(policy: RevealPolicy, rng: RandomSource) -> Result<RevealLiar> {
    if let RevealPolicy::CalibratedErrors { error_rate } = policy {
        if !(0.0..=1.0).contains(&error_rate) {
            return Err(Error::InvalidStrategy(format!("error rate {error_rate} not in [0, 1]")));
        }
    }
    Ok(RevealLiar { policy, rng })
}

/// Probability that the unrevealed honest parties' numbers sum to `target`
/// mod 3 when each is uniform over its alphabet.
fn completion_probability(remaining: &[GeneralId], target: u8) -> f64 {
    let mut dist = [1.0, 0.0, 0.0];
    for g in remaining {
        let alphabet = g.alphabet();
        let w = 1.0 / alphabet.len() as f64;
        let mut next = [0.0; 3];
        for (s, p) in dist.iter().enumerate() {
            for t in alphabet {
                next[(s + t.value() as usize) % 3] += p * w;
            }
        }
        dist = next;
    }
    dist[target as usize]
}

impl RevealHook for RevealLiar {
    fn reveal(&mut self, ctx: &RevealContext<'_>) -> Trit {
        let alphabet = ctx.traitor.alphabet();
        let heard: u8 = ctx.earlier.iter().map(|(_, t)| t.value()).sum();
        if ctx.is_last {
            let needed = Trit::wrapping(-i64::from(heard));
            if !alphabet.contains(&needed) {
                // no admissible number completes the rule
                return ctx.own;
            }
            if let RevealPolicy::CalibratedErrors { error_rate } = self.policy {
                if self.rng.gen_bool(error_rate) {
                    let wrong: Vec<Trit> = alphabet.iter().copied().filter(|&t| t != needed).collect();
                    return wrong[self.rng.gen_range(0..wrong.len())];
                }
            }
            return needed;
        }
        // Not last: pick the number most likely to complete the rule given
        // what is public so far; ties are broken at random.
        let remaining: Vec<GeneralId> = GeneralId::ALL
            .into_iter()
            .filter(|&g| g != ctx.traitor && ctx.earlier.iter().all(|(e, _)| *e != g))
            .collect();
        let scores: Vec<f64> = alphabet
            .iter()
            .map(|x| {
                let target = Trit::wrapping(-i64::from(heard + x.value())).value();
                completion_probability(&remaining, target)
            })
            .collect();
        let best = scores.iter().copied().fold(f64::MIN, f64::max);
        let ties: Vec<Trit> = alphabet
            .iter()
            .zip(&scores)
            .filter(|(_, &s)| (s - best).abs() < 1e-12)
            .map(|(&t, _)| t)
            .collect();
        ties[self.rng.gen_range(0..ties.len())]
    }
}

/// Traitor A sends plan 0 to B and plan 1 to C, each backed by the honest
/// position list for that value, so both messages check out individually.
pub fn traitor_a_conflicting_messages(l_a: &[Trit]) -> (PositionMessage, PositionMessage) {
    (
        build_position_message(l_a, Plan::Attack),
        build_position_message(l_a, Plan::Retreat),
    )
}

/// A lieutenant forging a forwarded message for a plan it never received.
///
/// It can only pick positions where its own list holds `target_plan`; about
/// half of those are positions where A held 2, and there the receiver's
/// list disagrees.
pub fn traitor_forge_forward<R: Rng + ?Sized>(
    own_list: &[Trit],
    received_plan: Plan,
    target_plan: Plan,
    needed_length: usize,
    rng: &mut R,
) -> Result<PositionMessage> {
    if received_plan == target_plan {
        return Err(Error::InvalidStrategy(
            "forged plan equals the received plan".into(),
        ));
    }
    let candidates: Vec<usize> = own_list
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == target_plan.trit())
        .map(|(j, _)| j)
        .collect();
    if candidates.len() < needed_length {
        return Err(Error::InsufficientCandidates {
            available: candidates.len(),
            needed: needed_length,
        });
    }
    let mut positions: Vec<usize> = sample(rng, candidates.len(), needed_length)
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    positions.sort_unstable();
    Ok(PositionMessage {
        plan: target_plan,
        positions,
    })
}

/// Description of a dephasing-type channel usable from configs and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "channel", rename_all = "snake_case")]
pub enum ChannelSpec {
    Identity,
    Dephasing { strength: f64 },
    /// The unitary `U(shift)` applied without announcing it.
    PhaseShift { shift: Trit },
    AncillaCoupling { theta: f64 },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<AttackChannel> {
        match *self {
            ChannelSpec::Identity => Ok(AttackChannel::identity()),
            ChannelSpec::Dephasing { strength } => AttackChannel::dephasing(strength),
            ChannelSpec::PhaseShift { shift } => {
                Ok(AttackChannel::phase_shift(&encode_operator(shift)))
            }
            ChannelSpec::AncillaCoupling { theta } => Ok(AttackChannel::ancilla_coupling(theta)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyKind {
    None,
    InterceptResend {
        basis: MeasurementBasis,
        location: Hop,
    },
    KrausAttack {
        channel: ChannelSpec,
        location: Hop,
    },
    FalseDetectionReport {
        rate: f64,
    },
    RevealLiar {
        policy: RevealPolicy,
    },
    TraitorAConflicting,
    TraitorBForgeForward {
        target_plan: Plan,
    },
    TraitorCForgeForward {
        target_plan: Plan,
    },
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::None => "none",
            StrategyKind::InterceptResend { .. } => "intercept_resend",
            StrategyKind::KrausAttack { .. } => "kraus_attack",
            StrategyKind::FalseDetectionReport { .. } => "false_detection_report",
            StrategyKind::RevealLiar { .. } => "reveal_liar",
            StrategyKind::TraitorAConflicting => "traitor_a_conflicting",
            StrategyKind::TraitorBForgeForward { .. } => "traitor_b_forge_forward",
            StrategyKind::TraitorCForgeForward { .. } => "traitor_c_forge_forward",
        }
    }

    fn is_quantum_attack(&self) -> bool {
        matches!(
            self,
            StrategyKind::InterceptResend { .. } | StrategyKind::KrausAttack { .. }
        )
    }
}

/// A strategy plus the (single) general who carries it out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryStrategy {
    pub kind: StrategyKind,
    pub traitor: Option<GeneralId>,
}

impl AdversaryStrategy {
    pub fn none() -> Self {
        AdversaryStrategy {
            kind: StrategyKind::None,
            traitor: None,
        }
    }

    /// Fills in the traitor a strategy implies when it is unambiguous, and B
    /// for channel attacks (B touches both hops).
    pub fn with_default_traitor(kind: StrategyKind) -> Self {
        let traitor = match &kind {
            StrategyKind::None => None,
            StrategyKind::InterceptResend { .. } | StrategyKind::KrausAttack { .. } => {
                Some(GeneralId::B)
            }
            StrategyKind::FalseDetectionReport { .. } => Some(GeneralId::C),
            StrategyKind::RevealLiar { .. } | StrategyKind::TraitorAConflicting => {
                Some(GeneralId::A)
            }
            StrategyKind::TraitorBForgeForward { .. } => Some(GeneralId::B),
            StrategyKind::TraitorCForgeForward { .. } => Some(GeneralId::C),
        };
        AdversaryStrategy { kind, traitor }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidStrategy(msg));
        let name = self.kind.name();
        match (&self.kind, self.traitor) {
            (StrategyKind::None, None) => Ok(()),
            (StrategyKind::None, Some(_)) => Ok(()),
            (_, None) => bad(format!("{name} needs a traitor")),
            (k, Some(t)) if k.is_quantum_attack() => {
                let hop = match k {
                    StrategyKind::InterceptResend { location, .. }
                    | StrategyKind::KrausAttack { location, .. } => *location,
                    _ => unreachable!(),
                };
                let allowed = match t {
                    GeneralId::A => hop == Hop::AToB,
                    GeneralId::B => true,
                    GeneralId::C => hop == Hop::BToC,
                };
                if !allowed {
                    return bad(format!("traitor {t:?} has no access to hop {}", u8::from(hop)));
                }
                if let StrategyKind::KrausAttack { channel, .. } = k {
                    channel.build()?;
                }
                Ok(())
            }
            (StrategyKind::FalseDetectionReport { rate }, Some(t)) => {
                if t != GeneralId::C {
                    return bad("only C announces detections".into());
                }
                if !(0.0..=1.0).contains(rate) {
                    return bad(format!("false report rate {rate} not in [0, 1]"));
                }
                Ok(())
            }
            (StrategyKind::RevealLiar { policy }, Some(_)) => {
                if let RevealPolicy::CalibratedErrors { error_rate } = policy {
                    if !(0.0..=1.0).contains(error_rate) {
                        return bad(format!("error rate {error_rate} not in [0, 1]"));
                    }
                }
                Ok(())
            }
            (StrategyKind::TraitorAConflicting, Some(t)) if t != GeneralId::A => {
                bad(format!("{name} requires traitor A"))
            }
            (StrategyKind::TraitorBForgeForward { .. }, Some(t)) if t != GeneralId::B => {
                bad(format!("{name} requires traitor B"))
            }
            (StrategyKind::TraitorCForgeForward { .. }, Some(t)) if t != GeneralId::C => {
                bad(format!("{name} requires traitor C"))
            }
            _ => Ok(()),
        }
    }

    /// Same strategy with the roles of B and C exchanged. The chain A→B→C
    /// is not symmetric, so a mirrored hop attack may fail [`validate`](Self::validate).
    pub fn mirrored(&self) -> Self {
        let swap = |g: GeneralId| match g {
            GeneralId::B => GeneralId::C,
            GeneralId::C => GeneralId::B,
            a => a,
        };
        let kind = match self.kind.clone() {
            StrategyKind::TraitorBForgeForward { target_plan } => {
                StrategyKind::TraitorCForgeForward { target_plan }
            }
            StrategyKind::TraitorCForgeForward { target_plan } => {
                StrategyKind::TraitorBForgeForward { target_plan }
            }
            other => other,
        };
        AdversaryStrategy {
            kind,
            traitor: self.traitor.map(swap),
        }
    }

    pub fn agreement_behavior(&self) -> AgreementBehavior {
        match self.kind {
            StrategyKind::TraitorAConflicting => AgreementBehavior::ConflictingCommander,
            StrategyKind::TraitorBForgeForward { target_plan }
            | StrategyKind::TraitorCForgeForward { target_plan } => {
                AgreementBehavior::ForgeForward { target_plan }
            }
            _ => AgreementBehavior::Honest,
        }
    }

    /// The strategies exercised by the property suites, with default traitors.
    pub fn built_in() -> Vec<AdversaryStrategy> {
        use MeasurementBasis::{Computational, Fourier};
        let kinds = vec![
            StrategyKind::None,
            StrategyKind::InterceptResend { basis: Computational, location: Hop::AToB },
            StrategyKind::InterceptResend { basis: Computational, location: Hop::BToC },
            StrategyKind::InterceptResend { basis: Fourier, location: Hop::AToB },
            StrategyKind::InterceptResend { basis: Fourier, location: Hop::BToC },
            StrategyKind::KrausAttack {
                channel: ChannelSpec::Dephasing { strength: 1.0 },
                location: Hop::AToB,
            },
            StrategyKind::KrausAttack {
                channel: ChannelSpec::PhaseShift { shift: Trit::ONE },
                location: Hop::BToC,
            },
            StrategyKind::KrausAttack {
                channel: ChannelSpec::AncillaCoupling { theta: std::f64::consts::FRAC_PI_2 },
                location: Hop::AToB,
            },
            StrategyKind::FalseDetectionReport { rate: 1.0 },
            StrategyKind::RevealLiar { policy: RevealPolicy::AlwaysConsistent },
            StrategyKind::RevealLiar {
                policy: RevealPolicy::CalibratedErrors { error_rate: 0.5 },
            },
            StrategyKind::TraitorAConflicting,
            StrategyKind::TraitorBForgeForward { target_plan: Plan::Retreat },
            StrategyKind::TraitorCForgeForward { target_plan: Plan::Attack },
        ];
        kinds.into_iter().map(AdversaryStrategy::with_default_traitor).collect()
    }
}

/// How the traitor behaves in the classical agreement phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgreementBehavior {
    Honest,
    ConflictingCommander,
    ForgeForward { target_plan: Plan },
}

/// An instantiated strategy: the hooks it needs, each with its own randomness.
pub struct Adversary {
    strategy: AdversaryStrategy,
    attack: Option<Box<dyn AttackHook>>,
    detection: Option<Box<dyn DetectionReporter>>,
    basis: Option<Box<dyn BasisRevealHook>>,
    reveal: Option<Box<dyn RevealHook>>,
}

impl Adversary {
    pub fn honest() -> Self {
        Adversary {
            strategy: AdversaryStrategy::none(),
            attack: None,
            detection: None,
            basis: None,
            reveal: None,
        }
    }

    /// A reveal liar has tampered with its runs so its true numbers carry no
    /// consistency: A and B intercept their outgoing hop in the computational
    /// basis, C reports clicks on every run.
    pub fn from_strategy(strategy: &AdversaryStrategy, seed: u64) -> Result<Self> {
        strategy.validate()?;
        let mut adv = Adversary::honest();
        adv.strategy = strategy.clone();
        let rng = |stream| derive_rng(seed, stream);
        match &strategy.kind {
            StrategyKind::InterceptResend { basis, location } => {
                adv.attack = Some(Box::new(make_intercept_resend(*basis, *location, rng(1))));
            }
            StrategyKind::KrausAttack { channel, location } => {
                adv.attack = Some(Box::new(make_kraus_attack(channel.build()?, *location)));
            }
            StrategyKind::FalseDetectionReport { rate } => {
                adv.detection = Some(Box::new(false_detection_report(*rate, rng(2))?));
            }
            StrategyKind::RevealLiar { policy } => {
                adv.reveal = Some(Box::new(reveal_liar(*policy, rng(3))?));
                match strategy.traitor {
                    Some(GeneralId::A) => {
                        adv.attack = Some(Box::new(make_intercept_resend(
                            MeasurementBasis::Computational,
                            Hop::AToB,
                            rng(1),
                        )));
                    }
                    Some(GeneralId::B) => {
                        adv.attack = Some(Box::new(make_intercept_resend(
                            MeasurementBasis::Computational,
                            Hop::BToC,
                            rng(1),
                        )));
                    }
                    Some(GeneralId::C) => {
                        adv.detection = Some(Box::new(false_detection_report(1.0, rng(2))?));
                    }
                    None => unreachable!("validated"),
                }
            }
            _ => {}
        }
        Ok(adv)
    }

    /// Adds a custom attack hook (e.g. a channel not covered by `ChannelSpec`).
    pub fn with_attack(mut self, hook: Box<dyn AttackHook>) -> Self {
        self.attack = Some(hook);
        self
    }

    pub fn with_basis_hook(mut self, hook: Box<dyn BasisRevealHook>) -> Self {
        self.basis = Some(hook);
        self
    }

    pub fn strategy(&self) -> &AdversaryStrategy {
        &self.strategy
    }

    pub fn traitor(&self) -> Option<GeneralId> {
        self.strategy.traitor
    }

    pub fn attack_hook(&mut self) -> Option<&mut dyn AttackHook> {
        self.attack.as_deref_mut().map(|h| h as &mut dyn AttackHook)
    }

    pub fn reveal_hook(&mut self) -> Option<&mut dyn RevealHook> {
        self.reveal.as_deref_mut().map(|h| h as &mut dyn RevealHook)
    }

    pub fn sift_hooks(&mut self) -> SiftHooks<'_> {
        let traitor = self.strategy.traitor;
        SiftHooks {
            detection: self
                .detection
                .as_deref_mut()
                .map(|h| h as &mut dyn DetectionReporter),
            basis: match (traitor, self.basis.as_deref_mut()) {
                (Some(t), Some(h)) => Some((t, h as &mut dyn BasisRevealHook)),
                _ => None,
            },
        }
    }
}

/// Two-sample proportion test between the traitor-last and traitor-not-last
/// subsets of a cross-check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryTest {
    pub last_rate: f64,
    pub not_last_rate: f64,
    pub standard_error: f64,
    /// Gap in units of the pooled standard error; 0 when both subsets are clean.
    pub z: f64,
    pub detected: bool,
}

pub const ASYMMETRY_SIGMAS: f64 = 5.0;

pub fn asymmetry_test(report: &CrossCheckReport) -> AsymmetryTest {
    AsymmetryTest::from_counts(
        report.traitor_last_count as u64,
        report.traitor_last_inconsistencies as u64,
        (report.checked() - report.traitor_last_count) as u64,
        report.traitor_not_last_inconsistencies as u64,
    )
}

impl AsymmetryTest {
    /// Two-proportion z-test on (checked, inconsistent) counts for the
    /// traitor-last and traitor-not-last subsets.
    pub fn from_counts(last: u64, last_bad: u64, not_last: u64, not_last_bad: u64) -> Self {
        let rate = |k: u64, n: u64| if n > 0 { k as f64 / n as f64 } else { 0.0 };
        let last_rate = rate(last_bad, last);
        let not_last_rate = rate(not_last_bad, not_last);
        let pooled = rate(last_bad + not_last_bad, last + not_last);
        let standard_error = if last > 0 && not_last > 0 {
            (pooled * (1.0 - pooled) * (1.0 / last as f64 + 1.0 / not_last as f64)).sqrt()
        } else {
            0.0
        };
        let z = if standard_error > 0.0 {
            (last_rate - not_last_rate).abs() / standard_error
        } else {
            0.0
        };
        AsymmetryTest {
            last_rate,
            not_last_rate,
            standard_error,
            z,
            detected: z > ASYMMETRY_SIGMAS,
        }
    }
}
