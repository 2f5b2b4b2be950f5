//! Classical detectable broadcast on top of the correlated lists.
//!
//! A conveys a plan `m` to a lieutenant by sending every position where
//! `l_A` holds `m`. Because `l_A[j] = m` forces the lieutenant's entry to be
//! `m` too, an honest message always matches the receiver's list, while a
//! lieutenant forwarding a plan it did not receive has to guess positions
//! and is caught on about half of them.

use serde::{Deserialize, Serialize};

use rand::Rng;

use crate::adversaries::{
    traitor_a_conflicting_messages, traitor_forge_forward, AdversaryStrategy, AgreementBehavior,
};
use crate::distribution::{CorrelatedLists, GeneralId};
use crate::{Error, Result, Trit};

/// 0 = attack, 1 = retreat.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Plan {
    Attack = 0,
    Retreat = 1,
}

impl Plan {
    pub fn trit(self) -> Trit {
        match self {
            Plan::Attack => Trit::ZERO,
            Plan::Retreat => Trit::ONE,
        }
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Plan::Retreat
        } else {
            Plan::Attack
        }
    }
}

impl TryFrom<u8> for Plan {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Plan::Attack),
            1 => Ok(Plan::Retreat),
            _ => Err(Error::OutOfAlphabet(v)),
        }
    }
}

impl From<Plan> for u8 {
    fn from(p: Plan) -> u8 {
        p as u8
    }
}

/// A lieutenant-to-lieutenant message: a plan, or ⊥ ("I have received inconsistent data").
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageContent {
    Plan(Plan),
    Bot,
}

/// A plan backed by the positions where the sender's list holds it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionMessage {
    pub plan: Plan,
    pub positions: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InconsistencyReason {
    ValueMismatch,
    LengthTooShort,
    LengthTooLong,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyVerdict {
    Consistent,
    Inconsistent(InconsistencyReason),
}

impl ConsistencyVerdict {
    pub fn is_consistent(self) -> bool {
        self == ConsistencyVerdict::Consistent
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementConfig {
    /// Expected `|positions| / L` of an honest message.
    pub expected_fraction: f64,
    /// Relative half-width of the accepted length band.
    pub length_tolerance: f64,
    /// The band is never narrower than this many binomial standard deviations.
    pub length_sigmas: f64,
    /// What B and C follow when they can prove A is the traitor.
    pub fallback_plan: Plan,
}

impl Default for AgreementConfig {
    fn default() -> Self {
        AgreementConfig {
            expected_fraction: 0.25,
            length_tolerance: 0.25,
            length_sigmas: 5.0,
            fallback_plan: Plan::Retreat,
        }
    }
}

impl AgreementConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.expected_fraction > 0.0 && self.expected_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "expected fraction {} not in (0, 1)",
                self.expected_fraction
            )));
        }
        if !(self.length_tolerance > 0.0 && self.length_tolerance < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "length tolerance {} not in (0, 1)",
                self.length_tolerance
            )));
        }
        if self.length_sigmas.is_nan() || self.length_sigmas < 0.0 {
            return Err(Error::InvalidConfig("length sigmas must be non-negative".into()));
        }
        Ok(())
    }

    /// Inclusive bounds on an acceptable message length for lists of length `list_len`.
    pub fn length_bounds(&self, list_len: usize) -> (f64, f64) {
        let n = list_len as f64;
        let mean = self.expected_fraction * n;
        let sd = (n * self.expected_fraction * (1.0 - self.expected_fraction)).sqrt();
        let half = (self.length_tolerance * mean).max(self.length_sigmas * sd);
        (mean - half, mean + half)
    }

    /// Length a forger aims for: the expected honest length.
    pub fn typical_length(&self, list_len: usize) -> usize {
        (self.expected_fraction * list_len as f64).round() as usize
    }
}

/// All positions `j` with `l[j] = plan`, ascending.
pub fn build_position_message(list: &[Trit], plan: Plan) -> PositionMessage {
    let positions = list
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == plan.trit())
        .map(|(j, _)| j)
        .collect();
    PositionMessage { plan, positions }
}

/// Checks a received message against the receiver's own list.
///
/// Values are checked before the length: a single mismatch is proof of
/// forgery, the length is only statistical evidence. Out-of-range or
/// repeated positions count as a value mismatch.
pub fn verify_against_list(
    msg: &PositionMessage,
    own: &[Trit],
    list_len: usize,
    cfg: &AgreementConfig,
) -> ConsistencyVerdict {
    let ordered = msg.positions.windows(2).all(|w| w[0] < w[1]);
    let values_match = ordered
        && msg
            .positions
            .iter()
            .all(|&j| j < list_len && own.get(j) == Some(&msg.plan.trit()));
    if !values_match {
        return ConsistencyVerdict::Inconsistent(InconsistencyReason::ValueMismatch);
    }
    let (lo, hi) = cfg.length_bounds(list_len);
    let len = msg.positions.len() as f64;
    if len < lo {
        ConsistencyVerdict::Inconsistent(InconsistencyReason::LengthTooShort)
    } else if len > hi {
        ConsistencyVerdict::Inconsistent(InconsistencyReason::LengthTooLong)
    } else {
        ConsistencyVerdict::Consistent
    }
}

/// A loyal lieutenant relays a consistent message verbatim, otherwise ⊥.
pub fn forward_message(
    verdict: ConsistencyVerdict,
    received: &PositionMessage,
) -> (MessageContent, Option<PositionMessage>) {
    match verdict {
        ConsistencyVerdict::Consistent => (MessageContent::Plan(received.plan), Some(received.clone())),
        ConsistencyVerdict::Inconsistent(_) => (MessageContent::Bot, None),
    }
}

/// Rows of the lieutenant decision table, plus the one combination it omits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableCase {
    /// Both consistent, same plan: no traitor.
    Iia,
    /// Both consistent, different plans: A is the traitor.
    Iib,
    /// Own consistent, peer sent ⊥.
    Iic,
    /// Own consistent, peer's list inconsistent: the peer is the traitor.
    Iid,
    /// Own inconsistent, peer's consistent: A is the traitor.
    Iie,
    /// Own inconsistent, peer sent ⊥: A is the traitor.
    Iif,
    /// Own and peer's lists both inconsistent.
    Unlisted,
}

impl TableCase {
    pub const ALL: [TableCase; 7] = [
        TableCase::Iia,
        TableCase::Iib,
        TableCase::Iic,
        TableCase::Iid,
        TableCase::Iie,
        TableCase::Iif,
        TableCase::Unlisted,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TableCase::Iia => "iia",
            TableCase::Iib => "iib",
            TableCase::Iic => "iic",
            TableCase::Iid => "iid",
            TableCase::Iie => "iie",
            TableCase::Iif => "iif",
            TableCase::Unlisted => "unlisted",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Follow(Plan),
    Abort,
}

/// Table row for a lieutenant given its own commander message and verdict
/// and the peer's relayed content with its verdict (absent for ⊥).
pub fn classify_case(
    own: (MessageContent, ConsistencyVerdict),
    peer: (MessageContent, Option<ConsistencyVerdict>),
) -> TableCase {
    let own_ok = matches!(own.0, MessageContent::Plan(_)) && own.1.is_consistent();
    let peer_plan = match peer.0 {
        MessageContent::Plan(p) => Some((p, peer.1.is_some_and(ConsistencyVerdict::is_consistent))),
        MessageContent::Bot => None,
    };
    match (own_ok, peer_plan) {
        (true, Some((p, true))) => {
            if MessageContent::Plan(p) == own.0 {
                TableCase::Iia
            } else {
                TableCase::Iib
            }
        }
        (true, None) => TableCase::Iic,
        (true, Some((_, false))) => TableCase::Iid,
        (false, Some((_, true))) => TableCase::Iie,
        (false, None) => TableCase::Iif,
        (false, Some((_, false))) => TableCase::Unlisted,
    }
}

pub fn final_decision(
    own: (MessageContent, ConsistencyVerdict),
    peer: (MessageContent, Option<ConsistencyVerdict>),
    cfg: &AgreementConfig,
) -> Decision {
    let plan_of = |c: MessageContent| match c {
        MessageContent::Plan(p) => p,
        MessageContent::Bot => unreachable!("classified as carrying a plan"),
    };
    match classify_case(own, peer) {
        TableCase::Iia | TableCase::Iic | TableCase::Iid => Decision::Follow(plan_of(own.0)),
        TableCase::Iie => Decision::Follow(plan_of(peer.0)),
        TableCase::Iib | TableCase::Iif => Decision::Follow(cfg.fallback_plan),
        TableCase::Unlisted => Decision::Abort,
    }
}

/// A relayed transmission between the lieutenants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relay {
    pub content: MessageContent,
    pub list: Option<PositionMessage>,
}

/// Per-general decisions; `None` for the traitor, whose choice is irrelevant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decisions {
    pub a: Option<Decision>,
    pub b: Option<Decision>,
    pub c: Option<Decision>,
}

impl Decisions {
    /// Every loyal general aborts.
    pub fn all_abort(traitor: Option<GeneralId>) -> Self {
        let d = |g| (traitor != Some(g)).then_some(Decision::Abort);
        Decisions {
            a: d(GeneralId::A),
            b: d(GeneralId::B),
            c: d(GeneralId::C),
        }
    }

    pub fn get(&self, g: GeneralId) -> Option<Decision> {
        match g {
            GeneralId::A => self.a,
            GeneralId::B => self.b,
            GeneralId::C => self.c,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementTranscript {
    pub commander_plan: Plan,
    pub traitor: Option<GeneralId>,
    pub list_length: usize,
    pub a_to_b: PositionMessage,
    pub a_to_c: PositionMessage,
    pub b_to_c: Relay,
    pub c_to_b: Relay,
    /// B's verdict on A's message, then C's.
    pub commander_verdicts: [ConsistencyVerdict; 2],
    /// B's verdict on C's relay, then C's on B's; `None` for ⊥.
    pub relay_verdicts: [Option<ConsistencyVerdict>; 2],
    /// Table rows reached by B and C (`None` for a traitor).
    pub cases: [Option<TableCase>; 2],
    pub decisions: Decisions,
}

impl AgreementTranscript {
    /// The same transcript with B and C relabelled.
    pub fn mirrored(&self) -> Self {
        let swap = |g: GeneralId| match g {
            GeneralId::B => GeneralId::C,
            GeneralId::C => GeneralId::B,
            a => a,
        };
        AgreementTranscript {
            commander_plan: self.commander_plan,
            traitor: self.traitor.map(swap),
            list_length: self.list_length,
            a_to_b: self.a_to_c.clone(),
            a_to_c: self.a_to_b.clone(),
            b_to_c: self.c_to_b.clone(),
            c_to_b: self.b_to_c.clone(),
            commander_verdicts: [self.commander_verdicts[1], self.commander_verdicts[0]],
            relay_verdicts: [self.relay_verdicts[1], self.relay_verdicts[0]],
            cases: [self.cases[1], self.cases[0]],
            decisions: Decisions {
                a: self.decisions.a,
                b: self.decisions.c,
                c: self.decisions.b,
            },
        }
    }
}

/// What a lieutenant sends its peer in the relay round.
#[allow(clippy::too_many_arguments)]
fn lieutenant_relay<R: Rng + ?Sized>(
    me: GeneralId,
    received: &PositionMessage,
    verdict: ConsistencyVerdict,
    lists: &CorrelatedLists,
    traitor: Option<GeneralId>,
    behavior: AgreementBehavior,
    cfg: &AgreementConfig,
    rng: &mut R,
) -> Relay {
    if traitor == Some(me) {
        if let AgreementBehavior::ForgeForward { target_plan } = behavior {
            let forged = traitor_forge_forward(
                lists.list(me),
                received.plan,
                target_plan,
                cfg.typical_length(lists.len()),
                rng,
            );
            // nothing to forge, or not enough candidates: confuse with ⊥
            return match forged {
                Ok(msg) => Relay {
                    content: MessageContent::Plan(msg.plan),
                    list: Some(msg),
                },
                Err(_) => Relay {
                    content: MessageContent::Bot,
                    list: None,
                },
            };
        }
    }
    let (content, list) = forward_message(verdict, received);
    Relay { content, list }
}

/// Runs the commander round, the relay round and the decision table for the given traitor behaviour.
///
/// Randomness is consumed only by a forging lieutenant.
pub fn run_agreement<R: Rng + ?Sized>(
    lists: &CorrelatedLists,
    commander_plan: Plan,
    strategy: &AdversaryStrategy,
    cfg: &AgreementConfig,
    rng: &mut R,
) -> Result<AgreementTranscript> {
    cfg.validate()?;
    strategy.validate()?;
    let traitor = strategy.traitor;
    let behavior = strategy.agreement_behavior();
    let len = lists.len();

    let (a_to_b, a_to_c) = if behavior == AgreementBehavior::ConflictingCommander {
        traitor_a_conflicting_messages(lists.l_a())
    } else {
        let msg = build_position_message(lists.l_a(), commander_plan);
        (msg.clone(), msg)
    };

    let b_verdict = verify_against_list(&a_to_b, lists.l_b(), len, cfg);
    let c_verdict = verify_against_list(&a_to_c, lists.l_c(), len, cfg);

    let b_to_c = lieutenant_relay(GeneralId::B, &a_to_b, b_verdict, lists, traitor, behavior, cfg, rng);
    let c_to_b = lieutenant_relay(GeneralId::C, &a_to_c, c_verdict, lists, traitor, behavior, cfg, rng);

    let relay_verdict = |relay: &Relay, own: &[Trit]| {
        relay
            .list
            .as_ref()
            .map(|m| verify_against_list(m, own, len, cfg))
    };
    let b_on_c = relay_verdict(&c_to_b, lists.l_b());
    let c_on_b = relay_verdict(&b_to_c, lists.l_c());

    let b_own = (MessageContent::Plan(a_to_b.plan), b_verdict);
    let c_own = (MessageContent::Plan(a_to_c.plan), c_verdict);
    let loyal = |g: GeneralId| traitor != Some(g);

    let b_case = loyal(GeneralId::B).then(|| classify_case(b_own, (c_to_b.content, b_on_c)));
    let c_case = loyal(GeneralId::C).then(|| classify_case(c_own, (b_to_c.content, c_on_b)));
    let decisions = Decisions {
        a: loyal(GeneralId::A).then_some(Decision::Follow(commander_plan)),
        b: loyal(GeneralId::B).then(|| final_decision(b_own, (c_to_b.content, b_on_c), cfg)),
        c: loyal(GeneralId::C).then(|| final_decision(c_own, (b_to_c.content, c_on_b), cfg)),
    };

    Ok(AgreementTranscript {
        commander_plan,
        traitor,
        list_length: len,
        a_to_b,
        a_to_c,
        b_to_c,
        c_to_b,
        commander_verdicts: [b_verdict, c_verdict],
        relay_verdicts: [b_on_c, c_on_b],
        cases: [b_case, c_case],
        decisions,
    })
}

/// Detectable broadcast conditions over the loyal generals' decisions:
/// `broadcast` = they all decided the same thing (same plan or all abort);
/// `validity` = if A is loyal, each loyal general follows A's plan or aborts.
pub fn evaluate_decisions(
    decisions: &Decisions,
    commander_plan: Plan,
    traitor: Option<GeneralId>,
) -> (bool, bool) {
    let loyal: Vec<Decision> = GeneralId::ALL
        .into_iter()
        .filter(|&g| traitor != Some(g))
        .filter_map(|g| decisions.get(g))
        .collect();
    let broadcast = loyal.windows(2).all(|w| w[0] == w[1]);
    let validity = traitor == Some(GeneralId::A)
        || loyal
            .iter()
            .all(|d| matches!(d, Decision::Abort) || *d == Decision::Follow(commander_plan));
    (broadcast, validity)
}

pub fn evaluate_conditions(t: &AgreementTranscript) -> (bool, bool) {
    evaluate_decisions(&t.decisions, t.commander_plan, t.traitor)
}
