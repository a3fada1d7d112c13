use rand::Rng;

use crate::math::ceil_log2;
use crate::randsched::ScheduleMatrix;

/// How simultaneous transmissions interact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Medium {
    /// Every awake node hears every other awake node.
    #[default]
    Broadcast,
    /// A listener decodes a slot only if exactly one node transmits in it.
    Interference,
}

/// Payload carried by one transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Message {
    pub sender: usize,
    pub max_id: u64,
    /// The sender's belief of the root clock at send time.
    pub root_time: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reception {
    Heard(Vec<Message>),
    Noise,
}

/// Outcome of one physical slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadioEvent {
    pub global_t: usize,
    /// Back-off slot within the time unit; always `0` in broadcast mode.
    pub slot: usize,
    pub awake: Vec<usize>,
    pub transmitters: Vec<usize>,
    /// Sorted by receiver; only awake nodes with at least one awake peer.
    pub delivered: Vec<(usize, Reception)>,
}

impl RadioEvent {
    pub fn reception(&self, node: usize) -> Option<&Reception> {
        self.delivered
            .binary_search_by_key(&node, |(r, _)| *r)
            .ok()
            .map(|i| &self.delivered[i].1)
    }
}

/// Resolves one slot given who is awake and who transmits.
///
/// In broadcast mode every awake node transmits and `transmitters` is
/// ignored. In interference mode a transmitting node cannot listen and reads
/// its own slot as noise.
pub fn resolve(
    medium: Medium,
    global_t: usize,
    slot: usize,
    awake: &[usize],
    transmitters: &[usize],
    message_of: impl Fn(usize) -> Message,
) -> RadioEvent {
    let mut delivered = Vec::new();
    let transmitters = match medium {
        Medium::Broadcast => awake.to_vec(),
        Medium::Interference => transmitters.to_vec(),
    };
    if awake.len() >= 2 {
        for &r in awake {
            let reception = match medium {
                Medium::Broadcast => Reception::Heard(
                    awake.iter().filter(|&&s| s != r).map(|&s| message_of(s)).collect(),
                ),
                Medium::Interference => match transmitters.as_slice() {
                    [only] if *only != r => Reception::Heard(vec![message_of(*only)]),
                    _ => Reception::Noise,
                },
            };
            delivered.push((r, reception));
        }
    }
    RadioEvent { global_t, slot, awake: awake.to_vec(), transmitters, delivered }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Transmit,
    Listen,
}

/// A fair coin per node and slot.
pub fn backoff_transmit_decision<R: Rng + ?Sized>(rng: &mut R) -> Action {
    if rng.gen::<bool>() {
        Action::Transmit
    } else {
        Action::Listen
    }
}

/// `⌈log₂ n⌉²`, at least one.
pub fn default_backoff_rounds(n: usize) -> usize {
    let l = ceil_log2(n.max(2));
    (l * l).max(1)
}

/// All slots of global unit `t` for `copies` repetitions of `m`.
///
/// Broadcast mode yields one event. Interference mode yields
/// `backoff_rounds` events, each with fresh coins.
pub fn step<R: Rng + ?Sized>(
    medium: Medium,
    backoff_rounds: usize,
    m: &ScheduleMatrix,
    copies: usize,
    global_t: usize,
    message_of: impl Fn(usize) -> Message,
    rng: &mut R,
) -> Vec<RadioEvent> {
    let awake = m.awake_set(global_t, copies);
    match medium {
        Medium::Broadcast => vec![resolve(medium, global_t, 0, &awake, &awake, &message_of)],
        Medium::Interference => (0..backoff_rounds)
            .map(|slot| {
                let tx: Vec<usize> = awake
                    .iter()
                    .copied()
                    .filter(|_| backoff_transmit_decision(rng) == Action::Transmit)
                    .collect();
                resolve(medium, global_t, slot, &awake, &tx, &message_of)
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstrings::BitSchedule;
    use crate::seed::rng_for;

    fn msg(s: usize) -> Message {
        Message { sender: s, max_id: s as u64 * 10, root_time: 0 }
    }

    fn heard(e: &RadioEvent, r: usize) -> Vec<usize> {
        match e.reception(r) {
            Some(Reception::Heard(v)) => v.iter().map(|m| m.sender).collect(),
            _ => Vec::new(),
        }
    }

    #[test]
    fn broadcast_pair_and_single() {
        let e = resolve(Medium::Broadcast, 3, 0, &[1, 4], &[], msg);
        assert_eq!(heard(&e, 1), vec![4]);
        assert_eq!(heard(&e, 4), vec![1]);
        let e = resolve(Medium::Broadcast, 3, 0, &[2], &[], msg);
        assert!(e.delivered.is_empty());
    }

    #[test]
    fn interference_cases() {
        let e = resolve(Medium::Interference, 0, 0, &[0, 1, 2], &[0, 1, 2], msg);
        assert!(e.delivered.iter().all(|(_, r)| *r == Reception::Noise));
        let e = resolve(Medium::Interference, 0, 0, &[0, 1, 2], &[1], msg);
        assert_eq!(heard(&e, 0), vec![1]);
        assert_eq!(heard(&e, 2), vec![1]);
        assert_eq!(e.reception(1), Some(&Reception::Noise));
        let e = resolve(Medium::Interference, 0, 0, &[0, 1], &[], msg);
        assert!(e.delivered.iter().all(|(_, r)| *r == Reception::Noise));
    }

    #[test]
    fn backoff_success_rates() {
        let m = ScheduleMatrix::new(vec![BitSchedule::new(1, vec![0]).unwrap(); 2]).unwrap();
        let mut rng = rng_for(21, &[]);
        let trials = 40_000;
        let (mut one_way, mut any3) = (0, 0);
        for _ in 0..trials {
            let ev = step(Medium::Interference, 1, &m, 1, 0, msg, &mut rng);
            one_way += (!heard(&ev[0], 0).is_empty()) as usize;
            let ev = step(Medium::Interference, 3, &m, 1, 0, msg, &mut rng);
            any3 += ev.iter().any(|e| !heard(e, 0).is_empty() || !heard(e, 1).is_empty()) as usize;
        }
        // Node 0 hears iff node 1 transmits and node 0 listens: 1/4.
        // Some delivery in a slot: 1/2, so 7/8 over three slots.
        let p1 = one_way as f64 / trials as f64;
        let p3 = any3 as f64 / trials as f64;
        assert!((p1 - 0.25).abs() < 0.01, "{p1}");
        assert!((p3 - 0.875).abs() < 0.01, "{p3}");
    }

    #[test]
    fn backoff_round_defaults() {
        assert_eq!(default_backoff_rounds(2), 1);
        assert_eq!(default_backoff_rounds(32), 25);
        assert_eq!(default_backoff_rounds(33), 36);
    }
}
