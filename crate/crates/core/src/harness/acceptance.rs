//! Acceptance criteria as plain functions returning a report line each.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;

use crate::birthday::{estimate_events, run_trial, BirthdayParams};
use crate::bitstrings::{
    brute_force_min_overlap_shift, find_non_overlap_shift, overlaps_at, pack_non_overlapping,
    pair_shift_budget, random_schedule, BitSchedule,
};
use crate::detsched::{
    build_two_proc_schedule, build_two_proc_schedule_with, first_uncovered_shift, radio_cost,
    verify_self_overlap, Rounding, TwoProcParams,
};
use crate::math::{ceil_sqrt, ceil_tol};
use crate::netsim::{
    check_unit_overlap, drift_time_step, max_step_overlap, required_overlap, DriftParams, SimConfig,
};
use crate::protocol::{build_hat_matrix, estimate_n, fit_scaling, measure_radio_cost, run_pipeline};
use crate::randsched::build_comm_graph;
use crate::seed::{derive, rng_for};

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub measured: String,
    pub required: String,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {}  {}  measured: {}  required: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.measured,
            self.required
        )
    }
}

/// `d` values checked by [`a1_two_proc_schedule`].
pub fn a1_grid() -> Vec<usize> {
    (1..=2000).chain([4096, 10_000, 100_000]).collect()
}

/// Window, cost and full self-overlap of the deterministic schedule.
pub fn a1_two_proc_schedule(rounding: Rounding) -> CriterionReport {
    let mut first_bad = None;
    let mut worst_ratio = 0.0_f64;
    for d in a1_grid() {
        let p = TwoProcParams::new(d);
        let s = build_two_proc_schedule_with(d, rounding);
        worst_ratio = worst_ratio.max(radio_cost(&s) as f64 / p.cost_bound() as f64);
        let problem = if s.length() > p.window {
            Some(format!("d={d}: length {} > {}", s.length(), p.window))
        } else if radio_cost(&s) > p.cost_bound() {
            Some(format!("d={d}: {} ones > {}", radio_cost(&s), p.cost_bound()))
        } else {
            first_uncovered_shift(&s, d).map(|sigma| format!("d={d}: shift {sigma} uncovered"))
        };
        if problem.is_some() {
            first_bad = problem;
            break;
        }
    }
    CriterionReport {
        id: "A1",
        title: "two-processor schedule, d in 1..2000 + {4096, 1e4, 1e5}",
        passed: first_bad.is_none(),
        measured: first_bad.unwrap_or_else(|| format!("all pass ({rounding}), max cost/bound {worst_ratio:.3}")),
        required: "length <= 2d+4ceil(sqrt d)+2, ones <= 4ceil(sqrt d)+4, every shift 1..d covered".into(),
    }
}

pub fn a2_worked_example() -> CriterionReport {
    let s = build_two_proc_schedule(36);
    let ok = s.length() == 98 && radio_cost(&s) == 26 && verify_self_overlap(&s, 36);
    CriterionReport {
        id: "A2",
        title: "d = 36 worked example",
        passed: ok,
        measured: format!("length {}, {} ones, self-overlap {}", s.length(), radio_cost(&s), verify_self_overlap(&s, 36)),
        required: "length 98, 26 ones (<= 28), self-overlap".into(),
    }
}

/// Fuzzed pairs with `|a|·|b| ≤ L/C²` always have a free shift.
pub fn a3_pair_shifts(cases: usize, seed: u64) -> CriterionReport {
    let c = 1.0;
    let failures: Vec<String> = (0..cases)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = rng_for(seed, &[3, k as u64]);
            let len = rng.gen_range(64..=4096);
            let cap = ceil_tol(len as f64 / (c * c));
            let na = rng.gen_range(1..=(2 * ceil_sqrt(len)).min(cap));
            let nb = rng.gen_range(1..=(cap / na).min(len));
            let a = random_schedule(len, na, &mut rng).expect("na <= len");
            let b = random_schedule(len, nb, &mut rng).expect("nb <= len");
            let bound = pair_shift_budget(len, c);
            let fast = find_non_overlap_shift(&a, &b, bound);
            let slow = brute_force_min_overlap_shift(&a, &b, bound);
            let ok = fast.is_some() && fast == slow && fast.is_some_and(|i| !overlaps_at(&a, &b, i));
            (!ok).then(|| format!("case {k}: L={len} |a|={na} |b|={nb} fast={fast:?} brute={slow:?}"))
        })
        .collect();
    CriterionReport {
        id: "A3",
        title: "pair shift within ceil(L/C^2)+1, C = 1",
        passed: failures.is_empty(),
        measured: failures.first().cloned().unwrap_or_else(|| format!("{cases}/{cases} found and agree")),
        required: "100% success and oracle agreement".into(),
    }
}

/// One packing trial: `⌈d^β⌉` random strings of `⌈d^((1−β)/2)⌉` ones in
/// length `4d`, placed with bound `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PackTrial {
    pub count: usize,
    pub ones: usize,
    pub length: usize,
    pub bound: usize,
    /// Shifts found, or why the packing is unusable.
    pub result: Result<Vec<usize>, String>,
}

pub fn pack_trial(d: usize, beta: f64, seed: u64) -> PackTrial {
    let len = 4 * d;
    let count = ceil_tol((d as f64).powf(beta));
    let ones = ceil_tol((d as f64).powf(((1.0 - beta) / 2.0).max(0.0))).min(len);
    let bound = len / 4;
    let mut rng = rng_for(seed, &[4]);
    let strings: Vec<BitSchedule> =
        (0..count).map(|_| random_schedule(len, ones, &mut rng).expect("ones fit")).collect();
    let result = match pack_non_overlapping(&strings, bound) {
        Err(e) => Err(e.to_string()),
        Ok(shifts) => {
            let placed: Vec<BitSchedule> = strings
                .iter()
                .zip(shifts.shifts())
                .map(|(s, &sh)| s.shifted(sh, len + bound).expect("fits"))
                .collect();
            let clash = (0..count)
                .flat_map(|i| (i + 1..count).map(move |j| (i, j)))
                .find(|&(i, j)| overlaps_at(&placed[i], &placed[j], 0));
            match clash {
                Some((i, j)) => Err(format!("strings {i} and {j} collide")),
                None => Ok(shifts.shifts().to_vec()),
            }
        }
    };
    PackTrial { count, ones, length: len, bound, result }
}

/// Sequential packing of `⌈d^β⌉` sparse strings.
pub fn a4_packing(seeds: u64) -> CriterionReport {
    let failures: Vec<String> = (0..seeds)
        .filter_map(|seed| pack_trial(256, 0.5, seed).result.err().map(|e| format!("seed {seed}: {e}")))
        .collect();
    CriterionReport {
        id: "A4",
        title: "packing 16 strings of 4 ones, L = 1024, bound 256",
        passed: failures.is_empty(),
        measured: failures.first().cloned().unwrap_or_else(|| format!("{seeds}/{seeds} seeds packed, pairwise clean")),
        required: "every seed succeeds".into(),
    }
}

pub fn a5_shared_bin(trials: usize, seed: u64) -> CriterionReport {
    let p = BirthdayParams::new(10_000, 0.5, 1.82).expect("valid");
    let (h, _) = estimate_events(&p, trials, seed).expect("trials > 0");
    CriterionReport {
        id: "A5",
        title: "P[shared bin], L = 1e4, C = 1.82",
        passed: h.p >= 0.78,
        measured: format!("{:.4} +/- {:.4} ({} red, {} blue)", h.p, h.half_width, p.red, p.blue),
        required: ">= 0.78".into(),
    }
}

pub fn a6_exclusive_bin(trials: usize, seed: u64) -> CriterionReport {
    let p = BirthdayParams::new(10_000, 0.5, 2.0).expect("valid");
    let (h, t) = estimate_events(&p, trials, seed).expect("trials > 0");
    let contained = (0..trials).all(|k| {
        let o = run_trial(&p, &mut rng_for(seed, &[k as u64]));
        !o.exclusive_pair_bin || o.any_shared_bin
    });
    CriterionReport {
        id: "A6",
        title: "P[exclusive pair bin], L = 1e4, C = 2",
        passed: t.p >= 0.72 && t.p <= h.p && contained,
        measured: format!("T {:.4} +/- {:.4}, H {:.4}, T implies H per trial: {contained}", t.p, t.half_width, h.p),
        required: "T >= 0.72 and T <= H".into(),
    }
}

/// One reference-point run for A7 and A8.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeTrial {
    pub seed: u64,
    /// Minimum degree after one amplified round.
    pub hat_min_degree: usize,
    /// Minimum degree after the full period.
    pub min_degree: usize,
    pub connected: bool,
    pub diameter: Option<usize>,
    pub rounds: usize,
    pub all_know_max: bool,
    pub clocks_equal: bool,
}

pub fn reference_config(seed: u64) -> SimConfig {
    SimConfig { d: 1024, beta: Some(0.5), seed, ..SimConfig::default() }
}

/// Runs the reference pipeline for each seed and records degrees and the
/// synchronization outcome.
pub fn degree_trials(seeds: u64, root: u64) -> Vec<DegreeTrial> {
    (0..seeds)
        .into_par_iter()
        .map(|k| {
            let cfg = reference_config(derive(root, &[7, k]));
            let r = run_pipeline(&cfg, None).expect("reference config is valid");
            let hat = build_hat_matrix(&r.params, &r.offsets, cfg.seed);
            let hat_graph = build_comm_graph(&hat, cfg.exclusive);
            let hat_min_degree = (0..hat_graph.n()).map(|u| hat_graph.degree(u)).min().unwrap_or(0);
            let top = r.states[r.sync.root].id;
            let clock = r.states[r.sync.root].own_base;
            DegreeTrial {
                seed: cfg.seed,
                hat_min_degree,
                min_degree: r.stats.min_degree,
                connected: r.stats.connected,
                diameter: r.stats.diameter,
                rounds: r.rounds_used(),
                all_know_max: r.states.iter().all(|s| s.max_seen == top),
                clocks_equal: r.states.iter().all(|s| s.own_base == clock),
            }
        })
        .collect()
}

pub fn a7_min_degree(trials: &[DegreeTrial], ell: usize) -> CriterionReport {
    let t = trials.len() as f64;
    let hat = trials.iter().filter(|x| x.hat_min_degree >= ell).count() as f64 / t;
    let full = trials.iter().filter(|x| x.min_degree >= ell).count() as f64 / t;
    let mut diam: Vec<usize> = trials.iter().filter_map(|x| x.diameter).collect();
    diam.sort_unstable();
    CriterionReport {
        id: "A7",
        title: "min degree >= 10, d = 1024, beta = 1/2",
        passed: hat > 0.5 && full > 0.95,
        measured: format!(
            "one round {hat:.3}, amplified {full:.3} of {} seeds; diameter median {:?} max {:?}",
            trials.len(),
            diam.get(diam.len() / 2),
            diam.last()
        ),
        required: "> 0.5 and > 0.95".into(),
    }
}

pub fn a8_max_id_sync(trials: &[DegreeTrial], ell: usize) -> CriterionReport {
    let good: Vec<&DegreeTrial> = trials.iter().filter(|x| x.min_degree >= ell && x.connected).collect();
    let bad = good.iter().find(|x| !(x.all_know_max && x.clocks_equal));
    CriterionReport {
        id: "A8",
        title: "max-ID synchronization on connected graphs, D = ceil(log2 n)+10",
        passed: !good.is_empty() && bad.is_none(),
        measured: match bad {
            Some(x) => format!("seed {} failed (max known {}, clocks equal {})", x.seed, x.all_know_max, x.clocks_equal),
            None => format!("{}/{} runs exact, D = {}", good.len(), good.len(), good.first().map_or(0, |x| x.rounds)),
        },
        required: "all nodes know the max ID and share its clock".into(),
    }
}

/// Max per-node cost averaged over seeds, for each `d`.
pub fn cost_curve(ds: &[usize], seeds: u64, exclusive: bool, root: u64) -> Vec<(usize, f64)> {
    ds.iter()
        .map(|&d| {
            let costs: Vec<f64> = (0..seeds)
                .into_par_iter()
                .map(|k| {
                    let cfg = SimConfig {
                        d,
                        beta: Some(0.5),
                        exclusive,
                        seed: derive(root, &[9, d as u64, k]),
                        ..SimConfig::default()
                    };
                    let r = run_pipeline(&cfg, None).expect("valid config");
                    let per_slot = if exclusive { r.params.backoff_rounds } else { 1 };
                    measure_radio_cost(&r).max as f64 / per_slot as f64
                })
                .collect();
            (d, costs.iter().sum::<f64>() / costs.len() as f64)
        })
        .collect()
}

pub const A9_DS: [usize; 4] = [1 << 8, 1 << 10, 1 << 12, 1 << 14];

pub fn a9_scaling(base: &[(usize, f64)], interference: &[(usize, f64)]) -> CriterionReport {
    let fb = fit_scaling(base, 3.0).map(|f| f.exponent);
    let fi = fit_scaling(interference, 3.0).map(|f| f.exponent);
    let within = |x: Option<f64>| x.is_some_and(|x| (0.15..=0.35).contains(&x));
    let show = |pts: &[(usize, f64)]| pts.iter().map(|(d, c)| format!("{d}:{c:.0}")).collect::<Vec<_>>().join(" ");
    CriterionReport {
        id: "A9",
        title: "cost ~ d^x (log2 d)^3 at beta = 1/2",
        passed: within(fb) && within(fi),
        measured: format!(
            "x = {:.3} [{}], interference x = {:.3} [{}]",
            fb.unwrap_or(f64::NAN),
            show(base),
            fi.unwrap_or(f64::NAN),
            show(interference)
        ),
        required: "x in [0.15, 0.35] in both modes".into(),
    }
}

/// Unknown-`n` estimation at `d = 1024`, true `n = 32`.
pub fn a10_estimate_n(seeds: u64, root: u64) -> CriterionReport {
    let (d, n) = (1024, 32);
    let runs: Vec<_> = (0..seeds)
        .into_par_iter()
        .map(|k| estimate_n(&SimConfig { d, seed: derive(root, &[10, k]), ..SimConfig::default() }, n))
        .collect();
    let ok: Vec<_> = runs.iter().filter_map(|r| r.as_ref().ok()).collect();
    let within = ok.iter().filter(|r| r.estimate * 2 >= n && r.estimate <= 2 * n).count();
    let min_frac = ok.iter().map(|r| r.synchronized_fraction).fold(1.0, f64::min);
    let worst_ratio = ok
        .iter()
        .map(|r| r.total_max_cost() as f64 / r.final_epoch_cost() as f64)
        .fold(0.0, f64::max);
    let isolated = ok.iter().all(|r| r.epochs_isolated());
    let rate = within as f64 / seeds as f64;
    CriterionReport {
        id: "A10",
        title: "estimating n = 32 with d = 1024",
        passed: ok.len() as u64 == seeds && rate >= 0.9 && min_frac >= 8.0 / 9.0 && worst_ratio <= 4.0 && isolated,
        measured: format!(
            "{within}/{seeds} within 2x, min synchronized fraction {min_frac:.3}, max total/final cost {worst_ratio:.2}, epochs isolated {isolated}"
        ),
        required: ">= 90% within 2x, fraction >= 8/9, total <= 4x final".into(),
    }
}

/// Half-step overlap inside one unit under bounded drift.
pub fn a11_drift_overlap(samples: usize, seed: u64) -> CriterionReport {
    let mut worst = f64::INFINITY;
    let mut failures = 0usize;
    let mut unequal_failures = 0usize;
    for (ci, &c) in [1.0, 2.0, 5.0].iter().enumerate() {
        let mut rng = rng_for(seed, &[11, ci as u64]);
        for _ in 0..samples {
            let tau_trans = rng.gen_range(0.1..10.0);
            let p = DriftParams::random(2, c, tau_trans, &mut rng).expect("speeds in [1, c]");
            let zi = rng.gen_range(0.0..drift_time_step(&p, 0));
            let zj = rng.gen_range(0.0..drift_time_step(&p, 1));
            let got = check_unit_overlap(&p, 0, 1, zi, zj);
            let need = required_overlap(&p, 0, 1);
            worst = worst.min(got / need);
            failures += (got < need - 1e-9 * need) as usize;

            // Same check with step lengths that differ by up to c.
            let s_i: f64 = rng.gen_range(1.0..=c);
            let s_j: f64 = rng.gen_range(1.0..=c);
            let (zi, zj) = (rng.gen_range(0.0..s_i), rng.gen_range(0.0..s_j));
            let got = max_step_overlap(s_i, zi, s_j, zj, 5.0 * s_i.max(s_j));
            unequal_failures += (got < s_i.min(s_j) / 2.0 - 1e-9) as usize;
        }
    }
    CriterionReport {
        id: "A11",
        title: "half-step overlap within a 5 s_max unit, c in {1, 2, 5}",
        passed: failures == 0 && unequal_failures == 0,
        measured: format!(
            "{failures} failures in {} samples (min overlap/threshold {worst:.3}); unequal steps: {unequal_failures} failures",
            3 * samples
        ),
        required: "overlap >= min(s_i, s_j)/2 always".into(),
    }
}

/// Sparse strings cannot cover a long shift range.
pub fn a12_negative_control(samples: usize, seed: u64) -> CriterionReport {
    let w = TwoProcParams::new(1024).window;
    let ones = ceil_sqrt(w);
    let d = w.div_ceil(2);
    let mut covered = 0;
    for k in 0..samples {
        let mut rng = rng_for(seed, &[12, k as u64]);
        let count = rng.gen_range(1..=ones);
        let s = random_schedule(w, count, &mut rng).expect("sparse");
        let free = find_non_overlap_shift(&s, &s, d);
        if verify_self_overlap(&s, d) || free.is_none() {
            covered += 1;
        }
    }
    let dense = build_two_proc_schedule(d);
    CriterionReport {
        id: "A12",
        title: "strings with <= ceil(sqrt W) ones fail self-overlap for d = ceil(W/2)",
        passed: covered == 0,
        measured: format!(
            "W = {w}, <= {ones} ones, d = {d}: {}/{samples} fail; deterministic schedule ({} ones) passes: {}",
            samples - covered,
            radio_cost(&dense),
            verify_self_overlap(&dense, d)
        ),
        required: "100% fail".into(),
    }
}

/// Every criterion at its full size.
pub fn run_acceptance(seed: u64) -> Vec<CriterionReport> {
    let trials = degree_trials(200, seed);
    let ell = SimConfig::default().ell;
    let base = cost_curve(&A9_DS, 3, false, seed);
    let interference = cost_curve(&A9_DS, 1, true, seed);
    vec![
        a1_two_proc_schedule(Rounding::IntegerSlope),
        a2_worked_example(),
        a3_pair_shifts(10_000, seed),
        a4_packing(100),
        a5_shared_bin(10_000, seed),
        a6_exclusive_bin(10_000, seed),
        a7_min_degree(&trials, ell),
        a8_max_id_sync(&trials, ell),
        a9_scaling(&base, &interference),
        a10_estimate_n(100, seed),
        a11_drift_overlap(100_000, seed),
        a12_negative_control(1_000, seed),
    ]
}
