use crate::netsim::{
    backoff_transmit_decision, check_unit_overlap, required_overlap, resolve, sample_phase, Action,
    DriftParams, Medium, Message, RadioEvent, Reception,
};
use crate::randsched::{CommGraph, ScheduleMatrix};
use crate::seed::{rng_for, tag};

/// Per-node state of the synchronization.
///
/// Clocks are stored as offsets from global time: at global unit `t` the
/// node's own clock reads `t + own_base` and its belief of the root clock
/// reads `t + root_base`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeState {
    pub id: u64,
    pub max_seen: u64,
    pub own_base: i64,
    pub root_base: i64,
    pub neighbors: Vec<usize>,
    pub synchronized: bool,
}

impl NodeState {
    /// A node that started its clock at global unit `start`.
    pub fn new(id: u64, start: usize) -> Self {
        let base = -(start as i64);
        Self { id, max_seen: id, own_base: base, root_base: base, neighbors: Vec::new(), synchronized: false }
    }

    pub fn own_time(&self, global_t: usize) -> i64 {
        global_t as i64 + self.own_base
    }

    pub fn root_time(&self, global_t: usize) -> i64 {
        global_t as i64 + self.root_base
    }

    /// Lines 4 to 6: adopt `msg` if it carries a larger maximum.
    ///
    /// The message was sent at `global_t` and is taken to arrive `delta_tr`
    /// units later, when the root clock reads `msg.root_time + delta_tr`.
    fn hear(&mut self, msg: &Message, global_t: usize, delta_tr: i64) -> bool {
        if msg.max_id <= self.max_seen {
            return false;
        }
        self.max_seen = msg.max_id;
        let arrival = global_t as i64 + delta_tr;
        self.root_base = msg.root_time + delta_tr - arrival;
        true
    }

    fn message(&self, sender: usize, global_t: usize) -> Message {
        Message { sender, max_id: self.max_seen, root_time: self.root_time(global_t) }
    }
}

/// Fresh states for the given IDs and start offsets.
pub fn init_states(ids: &[u64], starts: &[usize], graph: Option<&CommGraph>) -> Vec<NodeState> {
    ids.iter()
        .zip(starts)
        .enumerate()
        .map(|(i, (&id, &start))| {
            let mut s = NodeState::new(id, start);
            if let Some(g) = graph {
                s.neighbors = g.neighbors(i).to_vec();
            }
            s
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncOptions {
    pub medium: Medium,
    /// Slots per awake unit in interference mode.
    pub backoff_rounds: usize,
    /// Copies of the period, the `D` of the loop.
    pub rounds: usize,
    pub delta_tr: i64,
    pub drift: Option<DriftParams>,
    /// Global unit at which column 0 of the matrix lies.
    pub time_origin: usize,
    pub seed: u64,
}

impl Default for SyncOptions {
    fn default() -> Self {
        Self {
            medium: Medium::Broadcast,
            backoff_rounds: 1,
            rounds: 1,
            delta_tr: 0,
            drift: None,
            time_origin: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncOutcome {
    pub rounds_used: usize,
    /// Awake physical slots per node.
    pub per_node_cost: Vec<usize>,
    /// Global unit of the last state change, if any.
    pub last_change: Option<usize>,
    /// Messages that changed a node's state.
    pub adoptions: usize,
    pub drift_checks: usize,
    pub drift_violations: usize,
    /// Index of the node with the largest ID.
    pub root: usize,
    /// Nodes that never learnt the largest ID.
    pub unreached: Vec<usize>,
    pub success: bool,
}

/// Runs the max-ID synchronization over `opts.rounds` copies of `m`.
///
/// Every awake unit with two or more nodes is resolved by the medium. In
/// interference mode the unit becomes `backoff_rounds` slots with fresh coin
/// flips and state carried from slot to slot. When drift is modeled, each
/// delivery also needs the two nodes' step phases to overlap by half a step.
///
/// A node's update is broadcast at its next awake unit, which covers the
/// propagation to its neighbours. After the last copy every node sets its
/// own clock to its root clock.
pub fn run_sync(
    m: &ScheduleMatrix,
    states: &mut [NodeState],
    opts: &SyncOptions,
    mut trace: Option<&mut dyn FnMut(&RadioEvent)>,
) -> SyncOutcome {
    assert_eq!(m.n(), states.len(), "one state per matrix row");
    let n = states.len();
    let mut radio = rng_for(opts.seed, &[tag::RADIO]);
    let mut drift_rng = rng_for(opts.seed, &[tag::DRIFT]);
    let slots = match opts.medium {
        Medium::Broadcast => 1,
        Medium::Interference => opts.backoff_rounds.max(1),
    };
    let mut out = SyncOutcome {
        rounds_used: opts.rounds,
        per_node_cost: vec![0; n],
        last_change: None,
        adoptions: 0,
        drift_checks: 0,
        drift_violations: 0,
        root: 0,
        unreached: Vec::new(),
        success: false,
    };
    let mut phases = vec![0.0; n];

    m.scan_columns(opts.rounds, |local_t, awake| {
        for &v in awake {
            out.per_node_cost[v] += slots;
        }
        if awake.len() < 2 {
            return;
        }
        let t = opts.time_origin + local_t;
        if let Some(p) = &opts.drift {
            for &v in awake {
                phases[v] = sample_phase(p, v, &mut drift_rng);
            }
        }
        for slot in 0..slots {
            let transmitters: Vec<usize> = match opts.medium {
                Medium::Broadcast => awake.to_vec(),
                Medium::Interference => awake
                    .iter()
                    .copied()
                    .filter(|_| backoff_transmit_decision(&mut radio) == Action::Transmit)
                    .collect(),
            };
            let event = resolve(opts.medium, t, slot, awake, &transmitters, |s| states[s].message(s, t));
            if let Some(f) = trace.as_mut() {
                f(&event);
            }
            for (r, reception) in &event.delivered {
                let Reception::Heard(msgs) = reception else { continue };
                let mut best: Option<&Message> = None;
                for msg in msgs {
                    if let Some(p) = &opts.drift {
                        out.drift_checks += 1;
                        let got = check_unit_overlap(p, *r, msg.sender, phases[*r], phases[msg.sender]);
                        if got < required_overlap(p, *r, msg.sender) - 1e-9 {
                            out.drift_violations += 1;
                            continue;
                        }
                    }
                    if best.is_none_or(|b| msg.max_id > b.max_id) {
                        best = Some(msg);
                    }
                }
                if let Some(msg) = best {
                    if states[*r].hear(msg, t, opts.delta_tr) {
                        out.adoptions += 1;
                        out.last_change = Some(t);
                    }
                }
            }
        }
    });

    for s in states.iter_mut() {
        s.own_base = s.root_base;
        s.synchronized = true;
    }
    finish(states, &mut out);
    out
}

fn finish(states: &[NodeState], out: &mut SyncOutcome) {
    let Some(root) = (0..states.len()).max_by_key(|&i| states[i].id) else {
        out.success = true;
        return;
    };
    out.root = root;
    let top = states[root].id;
    out.unreached = (0..states.len()).filter(|&i| states[i].max_seen != top).collect();
    let clock = states[root].own_base;
    out.success = out.unreached.is_empty() && states.iter().all(|s| s.own_base == clock);
}

/// A schedule that realizes `g`: edge `e` gets column `e`, where only its
/// two endpoints are awake. Offsets are zero.
pub fn schedule_for_graph(g: &CommGraph) -> ScheduleMatrix {
    let width = g.edge_count().max(1);
    let mut rows = vec![Vec::new(); g.n()];
    for (e, (u, v, _)) in g.edges().enumerate() {
        rows[u].push(e);
        rows[v].push(e);
    }
    let rows = rows
        .into_iter()
        .map(|ones| crate::bitstrings::BitSchedule::new(width, ones).expect("edge columns increase"))
        .collect();
    ScheduleMatrix::new(rows).expect("rows share a width")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstrings::BitSchedule;
    use crate::netsim::DriftParams;

    fn path(n: usize) -> CommGraph {
        let mut g = CommGraph::empty(n);
        for u in 0..n - 1 {
            g.add_edge(u, u + 1, u);
        }
        g
    }

    #[test]
    fn single_node_is_synchronized() {
        let m = ScheduleMatrix::new(vec![BitSchedule::new(3, vec![1]).unwrap()]).unwrap();
        let mut states = init_states(&[5], &[0], None);
        let out = run_sync(&m, &mut states, &SyncOptions::default(), None);
        assert!(out.success);
        assert_eq!(out.per_node_cost, vec![1]);
    }

    #[test]
    fn path_adopts_root_clock() {
        let g = path(3);
        let m = schedule_for_graph(&g);
        let starts = [7, 0, 3];
        let mut states = init_states(&[900, 20, 10], &starts, Some(&g));
        let opts = SyncOptions { rounds: 2, delta_tr: 2, ..SyncOptions::default() };
        let out = run_sync(&m, &mut states, &opts, None);
        assert!(out.success, "{out:?}");
        assert!(states.iter().all(|s| s.max_seen == 900 && s.own_base == -7));
        assert_eq!(states[1].neighbors, vec![0, 2]);
        // Rerunning changes nothing.
        let before = states.clone();
        let again = run_sync(&m, &mut states, &opts, None);
        assert_eq!(again.last_change, None);
        assert_eq!(states, before);
    }

    #[test]
    fn disconnected_nodes_are_reported() {
        // 0 – 1   2 – 3
        let mut g = CommGraph::empty(4);
        g.add_edge(0, 1, 0);
        g.add_edge(2, 3, 1);
        let m = schedule_for_graph(&g);
        let mut states = init_states(&[1, 9, 3, 4], &[0; 4], Some(&g));
        let out = run_sync(&m, &mut states, &SyncOptions { rounds: 3, ..SyncOptions::default() }, None);
        assert!(!out.success);
        assert_eq!(out.root, 1);
        assert_eq!(out.unreached, vec![2, 3]);
    }

    #[test]
    fn too_few_rounds_leave_the_far_end_behind() {
        // Columns run from the far end towards the root, so each copy moves
        // the maximum one hop.
        let n = 5;
        let rows = (0..n)
            .map(|i| {
                let mut ones = Vec::new();
                if i + 1 < n {
                    ones.push(n - 2 - i);
                }
                if i > 0 {
                    ones.push(n - 1 - i);
                }
                ones.sort_unstable();
                BitSchedule::new(n - 1, ones).unwrap()
            })
            .collect();
        let m = ScheduleMatrix::new(rows).unwrap();
        let ids = [50, 4, 3, 2, 1];
        let mut short = init_states(&ids, &[0; 5], None);
        assert!(!run_sync(&m, &mut short, &SyncOptions { rounds: 3, ..SyncOptions::default() }, None).success);
        let mut enough = init_states(&ids, &[0; 5], None);
        assert!(run_sync(&m, &mut enough, &SyncOptions { rounds: 4, ..SyncOptions::default() }, None).success);
    }

    #[test]
    fn trace_and_cost_conservation() {
        let g = path(4);
        let m = schedule_for_graph(&g);
        let mut states = init_states(&[1, 2, 3, 4], &[0; 4], Some(&g));
        let opts = SyncOptions { rounds: 3, medium: Medium::Interference, backoff_rounds: 4, ..SyncOptions::default() };
        let mut events = Vec::new();
        let mut record = |e: &RadioEvent| events.push(e.clone());
        let out = run_sync(&m, &mut states, &opts, Some(&mut record));
        assert_eq!(events.len(), 3 * 3 * 4);
        for (v, &c) in out.per_node_cost.iter().enumerate() {
            assert_eq!(c, m.rows()[v].density() * 3 * 4);
        }
        for e in &events {
            for (r, rec) in &e.delivered {
                if let Reception::Heard(msgs) = rec {
                    assert_eq!(e.transmitters.len(), 1);
                    assert_ne!(msgs[0].sender, *r);
                }
            }
        }
    }

    #[test]
    fn drift_never_blocks_a_meeting() {
        let g = path(6);
        let m = schedule_for_graph(&g);
        let mut rng = rng_for(2, &[]);
        let drift = DriftParams::random(6, 2.0, 1.0, &mut rng).unwrap();
        let mut states = init_states(&[1, 2, 3, 4, 5, 6], &[0; 6], Some(&g));
        let opts = SyncOptions { rounds: 6, drift: Some(drift), ..SyncOptions::default() };
        let out = run_sync(&m, &mut states, &opts, None);
        assert!(out.success);
        assert!(out.drift_checks > 0);
        assert_eq!(out.drift_violations, 0);
    }
}
