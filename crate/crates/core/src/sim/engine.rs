use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use super::age::AgeIntegrator;
use super::{PolicyConfig, Preemption};
use crate::draws::DrawSource;
use crate::error::{Error, Result};
use crate::stats::RunningStats;

/// Hard cap on processed events per run.
pub const EVENT_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Packet {
    pub gen_time: f64,
    pub service_req: f64,
    pub remaining: f64,
}

#[derive(Debug, Clone, Copy)]
enum EventKind {
    Arrival,
    /// Single-server LCFSp completion; stale unless the token still matches.
    LcfspDone {
        token: u64,
    },
    /// Completion of a packet that holds a server to itself (FCFS or infinite server).
    Done {
        packet: Packet,
    },
}

impl EventKind {
    fn class(&self) -> u8 {
        match self {
            EventKind::Arrival => 1,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl Event {
    fn key(&self) -> (f64, u8, u64) {
        (self.time, self.kind.class(), self.seq)
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so the std max-heap pops the earliest event; completions beat
// arrivals at equal times, then insertion order.
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        let (ta, ca, sa) = self.key();
        let (tb, cb, sb) = other.key();
        tb.total_cmp(&ta).then(cb.cmp(&ca)).then(sb.cmp(&sa))
    }
}

struct Queue {
    heap: BinaryHeap<Event>,
    seq: u64,
}

impl Queue {
    fn push(&mut self, time: f64, kind: EventKind) {
        self.seq += 1;
        self.heap.push(Event {
            time,
            seq: self.seq,
            kind,
        });
    }
}

enum Server {
    Lcfsp {
        preemption: Preemption,
        in_service: Option<(Packet, f64)>,
        token: u64,
        waiting: Vec<Packet>,
    },
    Pool {
        free: u32,
        waiting: VecDeque<Packet>,
    },
    Infinite,
}

#[derive(Debug, Clone)]
pub(crate) struct RawOutcome {
    pub area: f64,
    pub delays: RunningStats,
    pub n_generated: u64,
    pub n_delivered: u64,
    pub n_informative: u64,
    pub n_in_system: u64,
    pub trace: Option<Vec<(f64, f64)>>,
}

pub(crate) fn simulate<D: DrawSource>(
    policy: &PolicyConfig,
    horizon: f64,
    warmup: f64,
    mut draws: D,
    record_trace: bool,
) -> Result<RawOutcome> {
    let mut server = match *policy {
        PolicyConfig::LcfspSingle { preemption } => Server::Lcfsp {
            preemption,
            in_service: None,
            token: 0,
            waiting: Vec::new(),
        },
        PolicyConfig::FcfsSingle => Server::Pool {
            free: 1,
            waiting: VecDeque::new(),
        },
        PolicyConfig::FcfsPool { servers } => Server::Pool {
            free: servers,
            waiting: VecDeque::new(),
        },
        PolicyConfig::InfiniteServer => Server::Infinite,
    };
    let delay_is_service = matches!(server, Server::Infinite);

    let mut queue = Queue {
        heap: BinaryHeap::new(),
        seq: 0,
    };
    let mut age = AgeIntegrator::new(warmup, horizon, record_trace);
    let mut delays = RunningStats::new();
    let (mut n_generated, mut n_delivered, mut n_informative) = (0u64, 0u64, 0u64);
    let mut events = 0u64;

    let first = draws.next_interarrival();
    if first <= horizon {
        queue.push(first, EventKind::Arrival);
    }

    let mut deliver = |t: f64, p: &Packet, age: &mut AgeIntegrator| {
        n_delivered += 1;
        if age.receive(t, p.gen_time) {
            n_informative += 1;
        }
        if t >= warmup {
            delays.push(if delay_is_service {
                p.service_req
            } else {
                t - p.gen_time
            });
        }
    };

    while let Some(&event) = queue.heap.peek() {
        let t = event.time;
        if t > horizon {
            break;
        }
        queue.heap.pop();
        events += 1;
        if events > EVENT_BUDGET {
            return Err(Error::EventBudgetExceeded { events });
        }
        match event.kind {
            EventKind::Arrival => {
                n_generated += 1;
                let s = draws.next_service();
                let packet = Packet {
                    gen_time: t,
                    service_req: s,
                    remaining: s,
                };
                let next = t + draws.next_interarrival();
                if next <= horizon {
                    queue.push(next, EventKind::Arrival);
                }
                match &mut server {
                    Server::Lcfsp {
                        preemption,
                        in_service,
                        token,
                        waiting,
                    } => {
                        if let Some((mut old, started)) = in_service.take() {
                            old.remaining = match preemption {
                                Preemption::Resume => (old.remaining - (t - started)).max(0.0),
                                Preemption::Restart => old.service_req,
                            };
                            waiting.push(old);
                        }
                        *token += 1;
                        *in_service = Some((packet, t));
                        queue.push(t + packet.remaining, EventKind::LcfspDone { token: *token });
                    }
                    Server::Pool { free, waiting } => {
                        if *free > 0 {
                            *free -= 1;
                            queue.push(t + s, EventKind::Done { packet });
                        } else {
                            waiting.push_back(packet);
                        }
                    }
                    Server::Infinite => queue.push(t + s, EventKind::Done { packet }),
                }
            }
            EventKind::LcfspDone { token: done } => {
                let Server::Lcfsp {
                    in_service,
                    token,
                    waiting,
                    ..
                } = &mut server
                else {
                    unreachable!("LCFSp completion under another policy")
                };
                if done != *token {
                    continue;
                }
                let (packet, _) = in_service.take().expect("a matching token implies a packet in service");
                deliver(t, &packet, &mut age);
                if let Some(next) = waiting.pop() {
                    *token += 1;
                    *in_service = Some((next, t));
                    queue.push(t + next.remaining, EventKind::LcfspDone { token: *token });
                }
            }
            EventKind::Done { packet } => {
                deliver(t, &packet, &mut age);
                if let Server::Pool { free, waiting } = &mut server {
                    match waiting.pop_front() {
                        Some(next) => queue.push(t + next.service_req, EventKind::Done { packet: next }),
                        None => *free += 1,
                    }
                }
            }
        }
    }

    let holding_server = queue
        .heap
        .iter()
        .filter(|e| matches!(e.kind, EventKind::Done { .. }))
        .count() as u64;
    let n_in_system = match &server {
        Server::Lcfsp {
            in_service, waiting, ..
        } => u64::from(in_service.is_some()) + waiting.len() as u64,
        Server::Pool { waiting, .. } => holding_server + waiting.len() as u64,
        Server::Infinite => holding_server,
    };
    let trace = age.finish();
    Ok(RawOutcome {
        n_in_system,
        area: age.area(),
        delays,
        n_generated,
        n_delivered,
        n_informative,
        trace,
    })
}
