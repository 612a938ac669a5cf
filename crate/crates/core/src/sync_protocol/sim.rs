//! Event-driven simulation of one protocol trial.
//!
//! Both nodes share a logical clock. Write attempts happen at `k * dt_write`
//! for `k < N`; the index of the first heralded attempt is drawn by inverting
//! the geometric distribution, which has the same law as one Bernoulli draw
//! per attempt.
//!
//! Agreement uses two message kinds. A node sends `Ready` when it heralds.
//! A node that is holding and has received the peer's `Ready` proposes a
//! read time `now + latency + dt_read` and sends it as `Propose`. Each node
//! reads at the later of the two proposals, so reads are simultaneous and
//! happen `dt_read + 2 * latency` after the later herald.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use super::ResolvedProtocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeId {
    A,
    B,
}

impl NodeId {
    pub fn index(self) -> usize {
        match self {
            NodeId::A => 0,
            NodeId::B => 1,
        }
    }

    pub fn peer(self) -> NodeId {
        match self {
            NodeId::A => NodeId::B,
            NodeId::B => NodeId::A,
        }
    }

    fn from_index(i: usize) -> NodeId {
        if i == 0 {
            NodeId::A
        } else {
            NodeId::B
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Phase {
    Writing { attempt: u32 },
    Holding { herald_time_ns: f64 },
    Reading,
    Done { success: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("invalid node transition {from:?} -> {to:?}")]
pub struct InvalidTransition {
    pub from: Phase,
    pub to: Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeState {
    pub phase: Phase,
    pub herald_time_ns: Option<f64>,
}

impl Default for NodeState {
    fn default() -> Self {
        Self {
            phase: Phase::Writing { attempt: 0 },
            herald_time_ns: None,
        }
    }
}

impl NodeState {
    pub fn transition(&mut self, to: Phase) -> Result<(), InvalidTransition> {
        let ok = match (self.phase, to) {
            (Phase::Writing { attempt: a }, Phase::Writing { attempt: b }) => b > a,
            (Phase::Writing { .. }, Phase::Holding { .. }) => true,
            (Phase::Holding { .. }, Phase::Reading) => true,
            (Phase::Reading, Phase::Done { .. }) => true,
            (Phase::Writing { .. }, Phase::Done { success: false }) => true,
            _ => false,
        };
        if !ok {
            return Err(InvalidTransition {
                from: self.phase,
                to,
            });
        }
        if let Phase::Holding { herald_time_ns } = to {
            self.herald_time_ns = Some(herald_time_ns);
        }
        self.phase = to;
        Ok(())
    }
}

/// Result of one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub herald_a: Option<u32>,
    pub herald_b: Option<u32>,
    /// Herald-to-read time; absent when the node never read.
    pub hold_time_a_ns: Option<f64>,
    pub hold_time_b_ns: Option<f64>,
    pub stokes_a: u32,
    pub stokes_b: u32,
    pub four_fold: bool,
}

/// Observable protocol events, in processing order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TraceEvent {
    Herald {
        node: NodeId,
        attempt: u32,
        time_ns: f64,
    },
    Exhausted {
        node: NodeId,
        time_ns: f64,
    },
    ReadyDelivered {
        to: NodeId,
        time_ns: f64,
    },
    ProposalDelivered {
        to: NodeId,
        read_at_ns: f64,
        time_ns: f64,
    },
    Read {
        node: NodeId,
        time_ns: f64,
        hold_ns: f64,
        stokes: u32,
    },
}

#[derive(Debug, Clone, Copy)]
enum Message {
    Ready,
    Propose { read_at_ns: f64 },
}

#[derive(Debug, Clone, Copy)]
enum EventKind {
    Herald { node: usize, attempt: u32 },
    Exhausted { node: usize },
    Deliver { to: usize, msg: Message },
    Read { node: usize },
}

#[derive(Debug, Clone, Copy)]
struct Scheduled {
    time: f64,
    seq: u64,
    kind: EventKind,
}

#[derive(Debug, Default, Clone, Copy)]
struct Node {
    state: NodeState,
    attempt: Option<u32>,
    peer_ready: bool,
    own_proposal: Option<f64>,
    peer_proposal: Option<f64>,
    read_scheduled: bool,
    hold_ns: Option<f64>,
    stokes: u32,
}

/// Reusable per-worker simulator; the queue buffer survives across trials.
pub(crate) struct TrialSimulator<'a> {
    proto: &'a ResolvedProtocol,
    log_miss: [f64; 2],
    queue: Vec<Scheduled>,
    seq: u64,
    nodes: [Node; 2],
}

impl<'a> TrialSimulator<'a> {
    pub(crate) fn new(proto: &'a ResolvedProtocol) -> Self {
        let log_miss = [0, 1].map(|i| (-proto.sources[i].herald_probability).ln_1p());
        Self {
            proto,
            log_miss,
            queue: Vec::with_capacity(8),
            seq: 0,
            nodes: [Node::default(); 2],
        }
    }

    fn push(&mut self, time: f64, kind: EventKind) {
        self.queue.push(Scheduled {
            time,
            seq: self.seq,
            kind,
        });
        self.seq += 1;
    }

    fn pop(&mut self) -> Option<Scheduled> {
        let idx = self
            .queue
            .iter()
            .enumerate()
            .min_by(|(_, x), (_, y)| x.time.total_cmp(&y.time).then(x.seq.cmp(&y.seq)))
            .map(|(i, _)| i)?;
        Some(self.queue.swap_remove(idx))
    }

    fn first_herald<R: Rng + ?Sized>(&self, node: usize, rng: &mut R) -> Option<u32> {
        let p = self.proto.sources[node].herald_probability;
        if p <= 0.0 {
            return None;
        }
        if p >= 1.0 {
            return Some(0);
        }
        let u: f64 = rng.random();
        let k = ((1.0 - u).ln() / self.log_miss[node]).floor();
        (k < self.proto.n_write_max as f64).then_some(k as u32)
    }

    pub(crate) fn run<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        mut trace: Option<&mut Vec<TraceEvent>>,
    ) -> TrialOutcome {
        self.queue.clear();
        self.seq = 0;
        self.nodes = [Node::default(); 2];
        let dt_write = self.proto.dt_write_ns;
        let last_attempt = self.proto.n_write_max - 1;

        for node in 0..2 {
            match self.first_herald(node, rng) {
                Some(attempt) => self.push(
                    attempt as f64 * dt_write,
                    EventKind::Herald { node, attempt },
                ),
                None => self.push(
                    last_attempt as f64 * dt_write,
                    EventKind::Exhausted { node },
                ),
            }
        }

        while let Some(ev) = self.pop() {
            let now = ev.time;
            match ev.kind {
                EventKind::Herald { node, attempt } => {
                    let n = &mut self.nodes[node];
                    if attempt > 0 {
                        n.state
                            .transition(Phase::Writing { attempt })
                            .expect("attempts advance");
                    }
                    n.state
                        .transition(Phase::Holding {
                            herald_time_ns: now,
                        })
                        .expect("herald while writing");
                    n.attempt = Some(attempt);
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(TraceEvent::Herald {
                            node: NodeId::from_index(node),
                            attempt,
                            time_ns: now,
                        });
                    }
                    self.push(
                        now + self.proto.latency_ns,
                        EventKind::Deliver {
                            to: 1 - node,
                            msg: Message::Ready,
                        },
                    );
                    self.try_propose(node, now);
                }
                EventKind::Exhausted { node } => {
                    let n = &mut self.nodes[node];
                    if last_attempt > 0 {
                        n.state
                            .transition(Phase::Writing {
                                attempt: last_attempt,
                            })
                            .expect("attempts advance");
                    }
                    n.state
                        .transition(Phase::Done { success: false })
                        .expect("exhaust while writing");
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(TraceEvent::Exhausted {
                            node: NodeId::from_index(node),
                            time_ns: now,
                        });
                    }
                }
                EventKind::Deliver { to, msg } => match msg {
                    Message::Ready => {
                        self.nodes[to].peer_ready = true;
                        if let Some(t) = trace.as_deref_mut() {
                            t.push(TraceEvent::ReadyDelivered {
                                to: NodeId::from_index(to),
                                time_ns: now,
                            });
                        }
                        self.try_propose(to, now);
                    }
                    Message::Propose { read_at_ns } => {
                        self.nodes[to].peer_proposal = Some(read_at_ns);
                        if let Some(t) = trace.as_deref_mut() {
                            t.push(TraceEvent::ProposalDelivered {
                                to: NodeId::from_index(to),
                                read_at_ns,
                                time_ns: now,
                            });
                        }
                        self.try_schedule_read(to);
                    }
                },
                EventKind::Read { node } => {
                    let herald = self.nodes[node]
                        .state
                        .herald_time_ns
                        .expect("reading node has heralded");
                    let hold = now - herald;
                    self.nodes[node]
                        .state
                        .transition(Phase::Reading)
                        .expect("read while holding");
                    let stokes = self.sample_stokes(node, hold, rng);
                    let n = &mut self.nodes[node];
                    n.hold_ns = Some(hold);
                    n.stokes = stokes;
                    n.state
                        .transition(Phase::Done {
                            success: stokes > 0,
                        })
                        .expect("done after read");
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(TraceEvent::Read {
                            node: NodeId::from_index(node),
                            time_ns: now,
                            hold_ns: hold,
                            stokes,
                        });
                    }
                }
            }
        }

        let [a, b] = self.nodes;
        let done_ok = |n: &Node| matches!(n.state.phase, Phase::Done { success: true });
        TrialOutcome {
            herald_a: a.attempt,
            herald_b: b.attempt,
            hold_time_a_ns: a.hold_ns,
            hold_time_b_ns: b.hold_ns,
            stokes_a: a.stokes,
            stokes_b: b.stokes,
            four_fold: done_ok(&a) && done_ok(&b),
        }
    }

    fn try_propose(&mut self, node: usize, now: f64) {
        let n = &mut self.nodes[node];
        if !matches!(n.state.phase, Phase::Holding { .. })
            || !n.peer_ready
            || n.own_proposal.is_some()
        {
            return;
        }
        let read_at_ns = now + self.proto.latency_ns + self.proto.dt_read_ns;
        n.own_proposal = Some(read_at_ns);
        self.push(
            now + self.proto.latency_ns,
            EventKind::Deliver {
                to: 1 - node,
                msg: Message::Propose { read_at_ns },
            },
        );
        self.try_schedule_read(node);
    }

    fn try_schedule_read(&mut self, node: usize) {
        let n = &mut self.nodes[node];
        if n.read_scheduled {
            return;
        }
        if let (Some(own), Some(peer)) = (n.own_proposal, n.peer_proposal) {
            n.read_scheduled = true;
            self.push(own.max(peer), EventKind::Read { node });
        }
    }

    fn sample_stokes<R: Rng + ?Sized>(&self, node: usize, hold_ns: f64, rng: &mut R) -> u32 {
        let q = self.proto.sources[node].excitation.probs();
        let u: f64 = rng.random();
        let excitations = if u < q[0] {
            0
        } else if u < q[0] + q[1] {
            1
        } else {
            2
        };
        let gamma = self.proto.gamma(node, hold_ns);
        (0..excitations)
            .filter(|_| rng.random::<f64>() < gamma)
            .count() as u32
    }
}

/// Simulates one trial of the protocol.
pub fn run_protocol_trial<R: Rng + ?Sized>(proto: &ResolvedProtocol, rng: &mut R) -> TrialOutcome {
    TrialSimulator::new(proto).run(rng, None)
}

/// Like [`run_protocol_trial`], also returning the event trace.
pub fn run_protocol_trial_traced<R: Rng + ?Sized>(
    proto: &ResolvedProtocol,
    rng: &mut R,
) -> (TrialOutcome, Vec<TraceEvent>) {
    let mut trace = Vec::new();
    let outcome = TrialSimulator::new(proto).run(rng, Some(&mut trace));
    (outcome, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon_statistics::SourceParams;
    use crate::rng::substream;
    use crate::sync_protocol::ProtocolParams;

    fn resolved(p_a: f64, p_b: f64, n: u32, gamma0: f64, tau_c_us: f64) -> ResolvedProtocol {
        ProtocolParams {
            n_write_max: n,
            tau_c_us,
            source_a: SourceParams::ideal(p_a, gamma0),
            source_b: SourceParams::ideal(p_b, gamma0),
            ..ProtocolParams::operating_point()
        }
        .resolve()
        .unwrap()
    }

    #[test]
    fn certain_success() {
        let proto = resolved(1.0, 1.0, 1, 1.0, 1e9);
        for i in 0..100 {
            let out = run_protocol_trial(&proto, &mut substream(1, i));
            assert!(out.four_fold);
            assert_eq!(out.herald_a, Some(0));
            assert_eq!(out.hold_time_a_ns, Some(400.0));
        }
    }

    #[test]
    fn dead_node_never_coincides() {
        let proto = resolved(0.0, 0.7, 12, 1.0, 12.0);
        for i in 0..1000 {
            let out = run_protocol_trial(&proto, &mut substream(2, i));
            assert!(!out.four_fold);
            assert_eq!(out.herald_a, None);
            assert_eq!(out.hold_time_b_ns, None);
        }
    }

    #[test]
    fn hold_times_follow_attempt_gap() {
        let mut params = ProtocolParams {
            source_a: SourceParams::ideal(0.3, 1.0),
            source_b: SourceParams::ideal(0.3, 1.0),
            ..ProtocolParams::operating_point()
        };
        params.latency_ns = 35.0;
        let proto = params.resolve().unwrap();
        let mut seen = 0;
        for i in 0..2000 {
            let out = run_protocol_trial(&proto, &mut substream(3, i));
            if let (Some(a), Some(b)) = (out.herald_a, out.herald_b) {
                seen += 1;
                let base = 400.0 + 70.0;
                let gap = (a as f64 - b as f64).abs() * 800.0;
                let (ha, hb) = (out.hold_time_a_ns.unwrap(), out.hold_time_b_ns.unwrap());
                let (early, late) = if a <= b { (ha, hb) } else { (hb, ha) };
                assert!((late - base).abs() < 1e-9);
                assert!((early - base - gap).abs() < 1e-9);
            }
        }
        assert!(seen > 100);
    }

    #[test]
    fn transitions_are_checked() {
        let mut s = NodeState::default();
        assert!(s.transition(Phase::Reading).is_err());
        s.transition(Phase::Writing { attempt: 3 }).unwrap();
        assert!(s.transition(Phase::Writing { attempt: 2 }).is_err());
        s.transition(Phase::Holding {
            herald_time_ns: 2400.0,
        })
        .unwrap();
        assert_eq!(s.herald_time_ns, Some(2400.0));
        assert!(s.transition(Phase::Done { success: true }).is_err());
        s.transition(Phase::Reading).unwrap();
        s.transition(Phase::Done { success: true }).unwrap();
        let mut w = NodeState::default();
        assert!(w.transition(Phase::Done { success: true }).is_err());
        w.transition(Phase::Done { success: false }).unwrap();
    }
}
