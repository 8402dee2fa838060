//! The four-step transfer run as two state machines exchanging messages.
//!
//! Each round Alice prepares a fresh pair on a random basis and sends it
//! over a channel that may drop each particle independently. She then asks
//! Bob whether he measured successfully. On "no" she starts a new round
//! with new randomness; on "yes" she reveals the basis and the session ends.
//!
//! # Transcript format
//!
//! A transcript serializes to one line per message, LF terminated:
//!
//! ```text
//! <round> <direction> <message>[ <key>=<value>]
//! ```
//!
//! `direction` is `A->B` or `B->A`. Messages and their fields, in this order:
//!
//! | message            | fields                    |
//! |--------------------|---------------------------|
//! | `ParticleTransfer` | `delivered=<0..2>`        |
//! | `SuccessQuery`     |                           |
//! | `SuccessReply`     | `ok=<true\|false>`        |
//! | `BasisReveal`      | `basis=<H\|V>`            |
//!
//! Lines starting with `#` are comments and are skipped by the parser.
//! Particle angles never appear in the transcript.
//!
//! # Randomness
//!
//! Alice's stream (`alice_seed`, stream 0) draws the basis then the sign
//! pattern, once per round. The channel uses `alice_seed` on ChaCha stream 1
//! and draws twice per round (one loss trial per particle) whatever the loss
//! probability. Bob's stream (`bob_seed`) is consumed by his strategy:
//!
//! * honest: axis choice, two measurements, and a coin for the guess when
//!   his axis did not match the revealed basis;
//! * fixed angles: two measurements on arrival;
//! * storage: two measurements after the reveal.
//!
//! Rounds in which a particle is lost consume nothing from Bob's stream.

use std::fmt;
use std::str::FromStr;

use crate::adversary::{cheating_inference, storage_attack, Strategy};
use crate::encoding::{decode, prepare, Basis, OtBit, SealedPair};
use crate::error::{Error, Result};
use crate::qstate::{Outcome, Particle, RandomStream};

pub const DEFAULT_MAX_ROUNDS: u32 = 64;
const CHANNEL_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    AliceToBob,
    BobToAlice,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::AliceToBob => "A->B",
            Self::BobToAlice => "B->A",
        })
    }
}

/// Particles on the wire. A lost particle is `None`.
#[derive(Debug)]
pub struct InFlight {
    pub first: Option<Particle>,
    pub second: Option<Particle>,
}

impl InFlight {
    fn delivered(&self) -> u8 {
        self.first.is_some() as u8 + self.second.is_some() as u8
    }

    fn complete(self) -> Option<SealedPair> {
        match (self.first, self.second) {
            (Some(first), Some(second)) => Some(SealedPair { first, second }),
            _ => None,
        }
    }
}

impl From<SealedPair> for InFlight {
    fn from(pair: SealedPair) -> Self {
        Self {
            first: Some(pair.first),
            second: Some(pair.second),
        }
    }
}

/// A live protocol message.
#[derive(Debug)]
pub enum Message {
    ParticleTransfer(InFlight),
    SuccessQuery,
    SuccessReply { ok: bool },
    BasisReveal { basis: Basis },
}

impl Message {
    fn record(&self) -> MessageRecord {
        match self {
            Self::ParticleTransfer(inflight) => MessageRecord::ParticleTransfer {
                delivered: inflight.delivered(),
            },
            Self::SuccessQuery => MessageRecord::SuccessQuery,
            Self::SuccessReply { ok } => MessageRecord::SuccessReply { ok: *ok },
            Self::BasisReveal { basis } => MessageRecord::BasisReveal { basis: *basis },
        }
    }
}

/// The classical, loggable view of a [`Message`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageRecord {
    ParticleTransfer { delivered: u8 },
    SuccessQuery,
    SuccessReply { ok: bool },
    BasisReveal { basis: Basis },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TranscriptEntry {
    pub round: u32,
    pub direction: Direction,
    pub message: MessageRecord,
}

impl fmt::Display for TranscriptEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ", self.round, self.direction)?;
        match self.message {
            MessageRecord::ParticleTransfer { delivered } => write!(f, "ParticleTransfer delivered={delivered}"),
            MessageRecord::SuccessQuery => f.write_str("SuccessQuery"),
            MessageRecord::SuccessReply { ok } => write!(f, "SuccessReply ok={ok}"),
            MessageRecord::BasisReveal { basis } => write!(f, "BasisReveal basis={basis}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    fn push(&mut self, round: u32, direction: Direction, message: &Message) {
        self.entries.push(TranscriptEntry {
            round,
            direction,
            message: message.record(),
        });
    }

    /// Checks the message grammar
    /// `(Transfer Query Reply(false))* Transfer Query Reply(true) Reveal`,
    /// message directions, and that round numbers count up from 1.
    pub fn follows_grammar(&self) -> bool {
        use Direction::*;
        use MessageRecord::*;

        let chunks: Vec<_> = self.entries.chunks(3).collect();
        let Some((last, rounds)) = chunks.split_last() else {
            return false;
        };
        // the final chunk is the lone BasisReveal
        if last.len() != 1 || rounds.is_empty() {
            return false;
        }
        for (i, chunk) in rounds.iter().enumerate() {
            let round = i as u32 + 1;
            let expected_ok = i + 1 == rounds.len();
            let ok = match chunk {
                [t, q, r] => {
                    matches!(t.message, ParticleTransfer { delivered } if delivered <= 2)
                        && t.direction == AliceToBob
                        && q.message == SuccessQuery
                        && q.direction == AliceToBob
                        && r.message == (SuccessReply { ok: expected_ok })
                        && r.direction == BobToAlice
                        && [t, q, r].iter().all(|e| e.round == round)
                }
                _ => false,
            };
            if !ok {
                return false;
            }
        }
        let reveal = last[0];
        matches!(reveal.message, BasisReveal { .. })
            && reveal.direction == AliceToBob
            && reveal.round == rounds.len() as u32
    }

    /// Line-delimited text form (see the module docs).
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for entry in &self.entries {
            writeln!(f, "{entry}")?;
        }
        Ok(())
    }
}

impl FromStr for Transcript {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            entries.push(parse_entry(line).map_err(|reason| Error::TranscriptParse { line: idx + 1, reason })?);
        }
        Ok(Self { entries })
    }
}

fn parse_entry(line: &str) -> std::result::Result<TranscriptEntry, String> {
    let fields: Vec<&str> = line.split(' ').collect();
    let (round, direction, name, rest) = match fields.as_slice() {
        [round, direction, name, rest @ ..] => (round, direction, name, rest),
        _ => return Err("expected `<round> <direction> <message>`".into()),
    };
    let round: u32 = round.parse().map_err(|_| format!("bad round `{round}`"))?;
    let direction = match *direction {
        "A->B" => Direction::AliceToBob,
        "B->A" => Direction::BobToAlice,
        other => return Err(format!("bad direction `{other}`")),
    };
    let field = |key: &str| -> std::result::Result<&str, String> {
        match rest {
            [kv] => kv
                .strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .ok_or_else(|| format!("expected field `{key}`")),
            _ => Err(format!("expected exactly one field `{key}`")),
        }
    };
    let message = match *name {
        "ParticleTransfer" => MessageRecord::ParticleTransfer {
            delivered: field("delivered")?.parse().map_err(|_| "bad delivered count".to_string())?,
        },
        "SuccessQuery" if rest.is_empty() => MessageRecord::SuccessQuery,
        "SuccessReply" => MessageRecord::SuccessReply {
            ok: field("ok")?.parse().map_err(|_| "bad ok flag".to_string())?,
        },
        "BasisReveal" => MessageRecord::BasisReveal { basis: field("basis")?.parse()? },
        other => return Err(format!("unknown message `{other}`")),
    };
    Ok(TranscriptEntry { round, direction, message })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    loss_probability: f64,
    max_rounds: u32,
}

impl ChannelConfig {
    pub fn new(loss_probability: f64, max_rounds: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&loss_probability) {
            return Err(Error::InvalidLossProbability(loss_probability));
        }
        if max_rounds == 0 {
            return Err(Error::ZeroMaxRounds);
        }
        Ok(Self {
            loss_probability,
            max_rounds,
        })
    }

    pub fn lossless() -> Self {
        Self {
            loss_probability: 0.0,
            max_rounds: DEFAULT_MAX_ROUNDS,
        }
    }

    pub fn loss_probability(&self) -> f64 {
        self.loss_probability
    }

    pub fn max_rounds(&self) -> u32 {
        self.max_rounds
    }
}

/// Outcome of one complete session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    /// Alice's input bit.
    pub lambda: OtBit,
    /// Basis revealed in the final round.
    pub basis: Basis,
    /// Axis the honest receiver picked in the final round (`None` for other strategies).
    pub bob_axis: Option<Basis>,
    /// Whether Bob's measurement axes lay on the revealed basis.
    pub bob_axis_matched: bool,
    pub bob_inferred: Option<OtBit>,
    /// Bob's own claim that he obtained the bit.
    pub bob_knows: bool,
    pub rounds_used: u32,
    pub transcript: Transcript,
}

impl SessionResult {
    pub fn guessed_correctly(&self) -> bool {
        self.bob_inferred == Some(self.lambda)
    }
}

/// Strategy a protocol-following receiver uses.
pub fn honest_bob_strategy() -> Strategy {
    Strategy::Honest
}

struct Channel {
    loss_probability: f64,
    rng: RandomStream,
}

impl Channel {
    fn transmit(&mut self, inflight: InFlight) -> InFlight {
        let lose_first = self.rng.next_unit() < self.loss_probability;
        let lose_second = self.rng.next_unit() < self.loss_probability;
        InFlight {
            first: inflight.first.filter(|_| !lose_first),
            second: inflight.second.filter(|_| !lose_second),
        }
    }
}

enum AliceState {
    Ready,
    AwaitingReply { basis: Basis },
    Finished { basis: Basis },
}

struct Alice {
    lambda: OtBit,
    max_rounds: u32,
    round: u32,
    rng: RandomStream,
    state: AliceState,
}

impl Alice {
    fn new(lambda: OtBit, max_rounds: u32, seed: u64) -> Self {
        Self {
            lambda,
            max_rounds,
            round: 0,
            rng: RandomStream::new(seed),
            state: AliceState::Ready,
        }
    }

    /// Steps 1–2: fresh basis, fresh pattern, send.
    fn send_particles(&mut self) -> Message {
        debug_assert!(matches!(self.state, AliceState::Ready));
        self.round += 1;
        let basis = Basis::random(&mut self.rng);
        let pair = prepare(self.lambda, basis, &mut self.rng);
        self.state = AliceState::AwaitingReply { basis };
        Message::ParticleTransfer(pair.seal().into())
    }

    /// Step 4. Returns the reveal on success, `None` to start another round.
    fn on_reply(&mut self, ok: bool) -> Result<Option<Message>> {
        let AliceState::AwaitingReply { basis } = self.state else {
            unreachable!("reply received outside a round");
        };
        if ok {
            self.state = AliceState::Finished { basis };
            Ok(Some(Message::BasisReveal { basis }))
        } else if self.round >= self.max_rounds {
            Err(Error::RoundLimitExceeded {
                max_rounds: self.max_rounds,
            })
        } else {
            self.state = AliceState::Ready;
            Ok(None)
        }
    }
}

enum BobState {
    Waiting,
    Missing,
    Measured { axis: Option<Basis>, outcomes: (Outcome, Outcome) },
    Holding(SealedPair),
}

/// What Bob concludes after the reveal.
struct BobConclusion {
    axis: Option<Basis>,
    matched: bool,
    inferred: OtBit,
    knows: bool,
}

struct Bob {
    strategy: Strategy,
    rng: RandomStream,
    state: BobState,
}

impl Bob {
    fn new(strategy: Strategy, seed: u64) -> Self {
        Self {
            strategy,
            rng: RandomStream::new(seed),
            state: BobState::Waiting,
        }
    }

    /// Step 3.
    fn on_particles(&mut self, inflight: InFlight) {
        let Some(pair) = inflight.complete() else {
            self.state = BobState::Missing;
            return;
        };
        self.state = match self.strategy {
            Strategy::Honest => {
                let axis = Basis::random(&mut self.rng);
                let direction = axis.zero_direction();
                let first = pair.first.measure(direction, &mut self.rng);
                let second = pair.second.measure(direction, &mut self.rng);
                BobState::Measured {
                    axis: Some(axis),
                    outcomes: (first, second),
                }
            }
            Strategy::FixedAngles { alpha, beta } => {
                let first = pair.first.measure(alpha, &mut self.rng);
                let second = pair.second.measure(beta, &mut self.rng);
                BobState::Measured {
                    axis: None,
                    outcomes: (first, second),
                }
            }
            Strategy::Storage => BobState::Holding(pair),
        };
    }

    fn on_query(&mut self) -> Message {
        let ok = !matches!(self.state, BobState::Missing | BobState::Waiting);
        if !ok {
            self.state = BobState::Waiting;
        }
        Message::SuccessReply { ok }
    }

    fn on_reveal(&mut self, basis: Basis) -> BobConclusion {
        match std::mem::replace(&mut self.state, BobState::Waiting) {
            BobState::Measured { axis: Some(axis), outcomes } => {
                let matched = axis == basis;
                let inferred = if matched {
                    decode(outcomes.0.into(), outcomes.1.into())
                } else {
                    OtBit::random(&mut self.rng)
                };
                BobConclusion {
                    axis: Some(axis),
                    matched,
                    inferred,
                    knows: matched,
                }
            }
            BobState::Measured { axis: None, outcomes } => {
                let orientations = match self.strategy {
                    Strategy::FixedAngles { alpha, beta } => basis.orientation(alpha).zip(basis.orientation(beta)),
                    _ => None,
                };
                // Both axes on the revealed line make the outcomes deterministic;
                // the product is the bit only if the axes' orientations agree.
                BobConclusion {
                    axis: None,
                    matched: orientations.is_some(),
                    inferred: cheating_inference(outcomes.0, outcomes.1),
                    knows: orientations.is_some_and(|(a, b)| a == b),
                }
            }
            BobState::Holding(pair) => BobConclusion {
                axis: None,
                matched: true,
                inferred: storage_attack(pair, basis, &mut self.rng),
                knows: true,
            },
            BobState::Waiting | BobState::Missing => unreachable!("reveal without a successful round"),
        }
    }
}

/// Runs one full session.
///
/// Fails with [`Error::RoundLimitExceeded`] if `max_rounds` rounds all lose
/// at least one particle.
pub fn run_session(
    lambda: OtBit,
    strategy: Strategy,
    channel: ChannelConfig,
    alice_seed: u64,
    bob_seed: u64,
) -> Result<SessionResult> {
    let mut alice = Alice::new(lambda, channel.max_rounds, alice_seed);
    let mut bob = Bob::new(strategy, bob_seed);
    let mut wire = Channel {
        loss_probability: channel.loss_probability,
        rng: RandomStream::with_stream(alice_seed, CHANNEL_STREAM),
    };
    let mut transcript = Transcript::default();

    let reveal = loop {
        let Message::ParticleTransfer(inflight) = alice.send_particles() else {
            unreachable!()
        };
        let received = Message::ParticleTransfer(wire.transmit(inflight));
        transcript.push(alice.round, Direction::AliceToBob, &received);
        let Message::ParticleTransfer(inflight) = received else {
            unreachable!()
        };
        bob.on_particles(inflight);

        transcript.push(alice.round, Direction::AliceToBob, &Message::SuccessQuery);
        let reply = bob.on_query();
        transcript.push(alice.round, Direction::BobToAlice, &reply);
        let Message::SuccessReply { ok } = reply else {
            unreachable!()
        };
        if let Some(reveal) = alice.on_reply(ok)? {
            break reveal;
        }
    };

    transcript.push(alice.round, Direction::AliceToBob, &reveal);
    let Message::BasisReveal { basis } = reveal else {
        unreachable!()
    };
    let conclusion = bob.on_reveal(basis);
    debug_assert!(matches!(alice.state, AliceState::Finished { basis: b } if b == basis));

    Ok(SessionResult {
        lambda,
        basis,
        bob_axis: conclusion.axis,
        bob_axis_matched: conclusion.matched,
        bob_inferred: Some(conclusion.inferred),
        bob_knows: conclusion.knows,
        rounds_used: alice.round,
        transcript,
    })
}
