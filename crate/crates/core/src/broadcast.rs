//! Round-synchronous store-and-forward broadcast over a CDS packing, and the
//! reverse map from any schedule to a CDS packing.
//!
//! Every round each node sends at most one message, heard by all its
//! neighbors. A message is bound to one packing entry and only that entry's
//! nodes relay it; a source outside its entry first hands the message over
//! with one send. Nodes split their rounds between entries by stride
//! scheduling on the entry weights.

use std::collections::BTreeMap;

use num_rational::Rational64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{is_cds, Graph, NodeSet};
use crate::packing::{ratio_f64, CdsPacking};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub id: usize,
    pub source: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Send {
    pub round: usize,
    pub node: usize,
    pub message: usize,
}

/// Who sent what, and when. Rounds are numbered from 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScheduleLog {
    pub rounds: usize,
    /// Sorted by `(round, node)`.
    pub sends: Vec<Send>,
    /// Known sources; inferred from the first round of each message when
    /// read from CSV.
    pub sources: BTreeMap<usize, usize>,
}

impl ScheduleLog {
    /// Builds a log from sends; `rounds` is the last round used.
    pub fn from_sends(mut sends: Vec<Send>) -> Self {
        sends.sort();
        Self {
            rounds: sends.iter().map(|s| s.round).max().unwrap_or(0),
            sends,
            sources: BTreeMap::new(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &self.sends {
            w.serialize(s).map_err(|e| Error::Schedule(e.to_string()))?;
        }
        if self.sends.is_empty() {
            w.write_record(["round", "node", "message"])
                .map_err(|e| Error::Schedule(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Schedule(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Schedule(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut sends = Vec::new();
        for (i, rec) in r.deserialize::<Send>().enumerate() {
            let s = rec.map_err(|e| Error::Parse {
                line: i + 2,
                msg: e.to_string(),
            })?;
            if s.round == 0 {
                return Err(Error::Parse {
                    line: i + 2,
                    msg: "rounds start at 1".into(),
                });
            }
            sends.push(s);
        }
        Ok(Self::from_sends(sends))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub messages: usize,
    pub rounds: usize,
    /// `messages / rounds`, 0 when nothing was sent.
    pub throughput: f64,
    /// Round in which each message reached its last node, by input order.
    pub completion: Vec<usize>,
    /// Packing entry each message travelled on, by input order.
    pub entry: Vec<usize>,
    /// Nominal message size; informational only.
    pub message_bits: usize,
}

const MESSAGE_BITS: usize = 64;

/// Floods `messages` over the entries of `packing` until every node holds
/// every message.
pub fn simulate_broadcast<R: Rng + ?Sized>(
    g: &Graph,
    packing: &CdsPacking,
    messages: &[Message],
    rng: &mut R,
) -> Result<(ScheduleLog, ThroughputReport)> {
    let n = g.n();
    let p = messages.len();
    for (i, e) in packing.entries.iter().enumerate() {
        if *e.weight.numer() <= 0 || !is_cds(g, &e.nodes) {
            return Err(Error::Contract(format!("packing entry {i} is not a weighted CDS of the graph")));
        }
    }
    let mut ids = std::collections::BTreeSet::new();
    for m in messages {
        if m.source >= n {
            return Err(Error::Contract(format!("source {} of message {} is not a node", m.source, m.id)));
        }
        if !ids.insert(m.id) {
            return Err(Error::Contract(format!("message id {} repeated", m.id)));
        }
    }
    if p > 0 && packing.is_empty() {
        return Err(Error::Contract("cannot broadcast over an empty packing".into()));
    }

    let weights: Vec<f64> = packing.entries.iter().map(|e| ratio_f64(e.weight)).collect();
    let total: f64 = weights.iter().sum();
    let entry: Vec<usize> = messages
        .iter()
        .map(|_| {
            let mut x = rng.random::<f64>() * total;
            for (j, &w) in weights.iter().enumerate() {
                if x < w {
                    return j;
                }
                x -= w;
            }
            weights.len() - 1
        })
        .collect();

    let mut memberships: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, e) in packing.entries.iter().enumerate() {
        for v in e.nodes.iter() {
            memberships[v].push(j);
        }
    }
    let mut on_entry: Vec<Vec<usize>> = vec![Vec::new(); packing.len()];
    for (m, &j) in entry.iter().enumerate() {
        on_entry[j].push(m);
    }
    let mut pending_injection: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (m, msg) in messages.iter().enumerate() {
        if !packing.entries[entry[m]].nodes.contains(msg.source) {
            pending_injection[msg.source].push(m);
        }
    }

    let mut state = Holdings::new(g, p);
    let mut completion = vec![0usize; p];
    let mut done = 0;
    for (m, msg) in messages.iter().enumerate() {
        if state.deliver(g, msg.source, m, 0) {
            done += 1;
        }
    }

    let mut credit: Vec<Vec<f64>> = memberships.iter().map(|js| vec![0.0; js.len()]).collect();
    let mut sends = Vec::new();
    let mut round = 0;
    while done < p {
        round += 1;
        let mut this_round = Vec::new();
        for v in 0..n {
            if !pending_injection[v].is_empty() {
                this_round.push((v, pending_injection[v].remove(0)));
                continue;
            }
            // Best relayable message per entry of v.
            let mut ready: Vec<Option<usize>> = vec![None; memberships[v].len()];
            for (slot, &j) in memberships[v].iter().enumerate() {
                ready[slot] = on_entry[j]
                    .iter()
                    .copied()
                    .filter(|&m| state.relayable(v, m))
                    .min_by_key(|&m| (state.received_at(v, m), messages[m].id));
            }
            if ready.iter().all(Option::is_none) {
                continue;
            }
            let mut total_w = 0.0;
            for (slot, &j) in memberships[v].iter().enumerate() {
                credit[v][slot] += weights[j];
                total_w += weights[j];
            }
            let slot = (0..ready.len())
                .filter(|&s| ready[s].is_some())
                .max_by(|&a, &b| credit[v][a].total_cmp(&credit[v][b]).then(b.cmp(&a)))
                .expect("some entry is ready");
            credit[v][slot] -= total_w;
            this_round.push((v, ready[slot].expect("ready")));
        }
        if this_round.is_empty() {
            return Err(Error::Invariant(format!("broadcast stalled in round {round}")));
        }
        for &(v, m) in &this_round {
            sends.push(Send {
                round,
                node: v,
                message: messages[m].id,
            });
            for &u in g.neighbors(v) {
                if state.deliver(g, u, m, round) {
                    completion[m] = round;
                    done += 1;
                }
            }
        }
    }

    let mut log = ScheduleLog::from_sends(sends);
    log.sources = messages.iter().map(|m| (m.id, m.source)).collect();
    let report = ThroughputReport {
        messages: p,
        rounds: log.rounds,
        throughput: if log.rounds == 0 { 0.0 } else { p as f64 / log.rounds as f64 },
        completion,
        entry,
        message_bits: MESSAGE_BITS,
    };
    Ok((log, report))
}

/// Per (node, message): held, round received, neighbors still lacking it.
struct Holdings {
    p: usize,
    has: Vec<bool>,
    received: Vec<usize>,
    missing: Vec<u32>,
    holders: Vec<usize>,
}

impl Holdings {
    fn new(g: &Graph, p: usize) -> Self {
        let n = g.n();
        let missing = (0..n).flat_map(|v| std::iter::repeat_n(g.degree(v) as u32, p)).collect();
        Self {
            p,
            has: vec![false; n * p],
            received: vec![0; n * p],
            missing,
            holders: vec![0; p],
        }
    }

    /// Gives `m` to `v`; true when this completes `m`.
    fn deliver(&mut self, g: &Graph, v: usize, m: usize, round: usize) -> bool {
        let i = v * self.p + m;
        if self.has[i] {
            return false;
        }
        self.has[i] = true;
        self.received[i] = round;
        for &x in g.neighbors(v) {
            self.missing[x * self.p + m] -= 1;
        }
        self.holders[m] += 1;
        self.holders[m] == g.n()
    }

    fn relayable(&self, v: usize, m: usize) -> bool {
        let i = v * self.p + m;
        self.has[i] && self.missing[i] > 0
    }

    fn received_at(&self, v: usize, m: usize) -> usize {
        self.received[v * self.p + m]
    }
}

/// Packing read off a schedule, with the messages behind each entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractedPacking {
    pub packing: CdsPacking,
    /// Message ids per entry, parallel to `packing.entries`.
    pub groups: Vec<Vec<usize>>,
    pub messages: usize,
    pub rounds: usize,
}

impl ExtractedPacking {
    /// `messages / rounds` as an exact fraction (0 for an empty log).
    pub fn throughput(&self) -> Rational64 {
        if self.rounds == 0 {
            Rational64::from_integer(0)
        } else {
            Rational64::new(self.messages as i64, self.rounds as i64)
        }
    }
}

/// Replays `log` on `g`, checks store-and-forward and full delivery, and
/// returns the packing whose entries are the relay sets of the messages,
/// each weighted by its least busy member's share of the rounds.
pub fn extract_packing(log: &ScheduleLog, g: &Graph) -> Result<ExtractedPacking> {
    let n = g.n();
    let t = log.rounds;
    let mut sends = log.sends.clone();
    sends.sort();
    for w in sends.windows(2) {
        if (w[0].round, w[0].node) == (w[1].round, w[1].node) {
            return Err(Error::Schedule(format!("node {} sends twice in round {}", w[0].node, w[0].round)));
        }
    }
    for s in &sends {
        if s.node >= n {
            return Err(Error::Schedule(format!("node {} is not in the graph", s.node)));
        }
        if s.round == 0 || s.round > t {
            return Err(Error::Schedule(format!("round {} outside 1..={t}", s.round)));
        }
    }

    // Message id -> dense index, in id order.
    let ids: Vec<usize> = sends
        .iter()
        .map(|s| s.message)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let p = ids.len();

    let mut holders: Vec<NodeSet> = vec![NodeSet::new(n); p];
    let mut first_round = vec![usize::MAX; p];
    let mut source = vec![usize::MAX; p];
    for s in &sends {
        let m = index[&s.message];
        if first_round[m] == usize::MAX {
            first_round[m] = s.round;
            source[m] = s.node;
        } else if first_round[m] == s.round {
            return Err(Error::Schedule(format!(
                "message {} has several senders in its first round",
                s.message
            )));
        }
    }
    for (m, &id) in ids.iter().enumerate() {
        if let Some(&declared) = log.sources.get(&id) {
            if declared != source[m] {
                return Err(Error::Schedule(format!(
                    "message {id} first sent by {} but its source is {declared}",
                    source[m]
                )));
            }
        }
        holders[m].insert(source[m]);
    }

    let mut count: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); p];
    let mut start = 0;
    while start < sends.len() {
        let round = sends[start].round;
        let end = start + sends[start..].iter().take_while(|s| s.round == round).count();
        for s in &sends[start..end] {
            let m = index[&s.message];
            if !holders[m].contains(s.node) {
                return Err(Error::Schedule(format!(
                    "node {} sends message {} in round {round} before receiving it",
                    s.node, s.message
                )));
            }
            *count[m].entry(s.node).or_default() += 1;
        }
        for s in &sends[start..end] {
            let m = index[&s.message];
            for &u in g.neighbors(s.node) {
                holders[m].insert(u);
            }
        }
        start = end;
    }

    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (m, &id) in ids.iter().enumerate() {
        if holders[m].len() != n {
            return Err(Error::Schedule(format!("message {id} never reaches every node")));
        }
        let senders = NodeSet::from_members(n, count[m].keys().copied())?;
        if !is_cds(g, &senders) {
            return Err(Error::Schedule(format!("relay set of message {id} is not a CDS")));
        }
        groups.entry(senders.to_vec()).or_default().push(m);
    }

    let mut packing = CdsPacking::new();
    let mut group_ids = Vec::new();
    for (members, msgs) in groups {
        let least = members
            .iter()
            .map(|v| msgs.iter().map(|&m| count[m].get(v).copied().unwrap_or(0)).sum::<usize>())
            .min()
            .expect("relay sets are nonempty");
        packing.push(
            NodeSet::from_members(n, members.iter().copied())?,
            Rational64::new(least as i64, t as i64),
        );
        group_ids.push(msgs.iter().map(|&m| ids[m]).collect());
    }
    Ok(ExtractedPacking {
        packing,
        groups: group_ids,
        messages: p,
        rounds: t,
    })
}

/// `count` messages with ids `0..count` and sources spread round-robin over
/// the nodes.
pub fn spread_messages(n: usize, count: usize) -> Vec<Message> {
    (0..count).map(|id| Message { id, source: id % n.max(1) }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{complete, cycle, path};
    use crate::verify::verify_packing;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(n: usize, xs: &[usize]) -> NodeSet {
        NodeSet::from_members(n, xs.iter().copied()).unwrap()
    }

    #[test]
    fn path_pipeline_time() {
        let g = path(10);
        let packing = CdsPacking::uniform(vec![NodeSet::full(10)], Rational64::from_integer(1));
        let msgs: Vec<Message> = (0..5).map(|id| Message { id, source: 0 }).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (log, report) = simulate_broadcast(&g, &packing, &msgs, &mut rng).unwrap();
        // Diameter 9.
        assert!(report.rounds <= 5 + 9 + 5, "rounds = {}", report.rounds);
        assert_eq!(report.completion.iter().max().copied(), Some(report.rounds));
        let ex = extract_packing(&log, &g).unwrap();
        assert!(ex.packing.size_exact().unwrap() >= ex.throughput());
    }

    #[test]
    fn clique_with_four_backbones() {
        let g = complete(20);
        let sets: Vec<NodeSet> = (0..4).map(|i| set(20, &(5 * i..5 * i + 5).collect::<Vec<_>>())).collect();
        let packing = CdsPacking::uniform(sets, Rational64::from_integer(1));
        let msgs = spread_messages(20, 40);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (log, report) = simulate_broadcast(&g, &packing, &msgs, &mut rng).unwrap();
        assert!(report.throughput >= 2.0);
        let ex = extract_packing(&log, &g).unwrap();
        assert!(verify_packing(&g, &ex.packing, &NodeSet::full(20)).pass);
        assert!(ex.packing.size_exact().unwrap() >= ex.throughput());
    }

    #[test]
    fn no_messages() {
        let g = cycle(5);
        let packing = CdsPacking::uniform(vec![NodeSet::full(5)], Rational64::from_integer(1));
        let (log, report) = simulate_broadcast(&g, &packing, &[], &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(report.rounds, 0);
        assert!(log.sends.is_empty());
        let ex = extract_packing(&log, &g).unwrap();
        assert!(ex.packing.is_empty());
        assert_eq!(ScheduleLog::from_csv(&log.to_csv().unwrap()).unwrap(), ScheduleLog::default());
    }

    #[test]
    fn single_flood_weight_formula() {
        // Path 0-1-2: node 1 relays twice, node 0 once over T = 3.
        let g = path(3);
        let log = ScheduleLog::from_sends(vec![
            Send { round: 1, node: 0, message: 7 },
            Send { round: 2, node: 1, message: 7 },
            Send { round: 3, node: 1, message: 7 },
        ]);
        let ex = extract_packing(&log, &g).unwrap();
        assert_eq!(ex.packing.len(), 1);
        assert_eq!(ex.packing.entries[0].nodes.to_vec(), vec![0, 1]);
        assert_eq!(ex.packing.entries[0].weight, Rational64::new(1, 3));
        assert_eq!(ex.groups, vec![vec![7]]);
    }

    #[test]
    fn two_disjoint_backbones_over_two_rounds() {
        // K_4 with backbones {0} and {1}; each message is sent once per node.
        let g = complete(4);
        let log = ScheduleLog::from_sends(vec![
            Send { round: 1, node: 0, message: 0 },
            Send { round: 1, node: 1, message: 1 },
            Send { round: 2, node: 0, message: 2 },
            Send { round: 2, node: 1, message: 3 },
        ]);
        let ex = extract_packing(&log, &g).unwrap();
        assert_eq!(ex.packing.len(), 2);
        assert_eq!(ex.packing.size_exact(), Some(Rational64::from_integer(2)));
        let log = ScheduleLog::from_sends(vec![
            Send { round: 1, node: 0, message: 0 },
            Send { round: 2, node: 1, message: 1 },
        ]);
        let ex = extract_packing(&log, &g).unwrap();
        assert_eq!(ex.packing.size_exact(), Some(Rational64::from_integer(1)));
    }

    #[test]
    fn malformed_logs_are_rejected() {
        let g = path(3);
        let twice = ScheduleLog::from_sends(vec![
            Send { round: 1, node: 0, message: 0 },
            Send { round: 1, node: 0, message: 1 },
        ]);
        assert!(matches!(extract_packing(&twice, &g), Err(Error::Schedule(_))));
        let early = ScheduleLog::from_sends(vec![
            Send { round: 1, node: 0, message: 0 },
            Send { round: 1, node: 2, message: 1 },
            Send { round: 2, node: 2, message: 0 },
        ]);
        assert!(extract_packing(&early, &g).is_err());
        let undelivered = ScheduleLog::from_sends(vec![Send { round: 1, node: 0, message: 0 }]);
        assert!(extract_packing(&undelivered, &g).is_err());
        // 0 and 2 both send in the first round of message 0.
        let ambiguous = ScheduleLog::from_sends(vec![
            Send { round: 1, node: 0, message: 0 },
            Send { round: 1, node: 2, message: 0 },
        ]);
        assert!(extract_packing(&ambiguous, &g).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = cycle(6);
        let packing = CdsPacking::uniform(vec![set(6, &[0, 1, 2, 3])], Rational64::from_integer(1));
        let msgs = spread_messages(6, 4);
        let (log, _) = simulate_broadcast(&g, &packing, &msgs, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let text = log.to_csv().unwrap();
        assert!(text.starts_with("round,node,message\n"));
        let back = ScheduleLog::from_csv(&text).unwrap();
        assert_eq!(back.sends, log.sends);
        assert_eq!(back.rounds, log.rounds);
        let ex = extract_packing(&back, &g).unwrap();
        assert!(ex.packing.size_exact().unwrap() >= ex.throughput());
        assert!(ScheduleLog::from_csv("round,node,message\n0,1,2\n").is_err());
        assert!(ScheduleLog::from_csv("round,node,message\nx,1,2\n").is_err());
    }

    #[test]
    fn invalid_packing_rejected() {
        let g = cycle(6);
        let packing = CdsPacking::uniform(vec![set(6, &[0, 3])], Rational64::from_integer(1));
        let msgs = spread_messages(6, 2);
        assert!(simulate_broadcast(&g, &packing, &msgs, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        let empty = CdsPacking::new();
        assert!(simulate_broadcast(&g, &empty, &msgs, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
