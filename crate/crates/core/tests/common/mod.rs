#![allow(dead_code)]

use ehcoop_core::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const ALPHAS: [f64; 4] = [0.0, 0.3, 0.7, 1.0];
/// Oracle resolution for comparisons; the certified gap is a hundredth of it.
pub const ORACLE_STEP: f64 = 1e-3;

pub fn three_slot_trace() -> EnergyTrace {
    EnergyTrace::new(vec![6.5, 13.5, 9.0], vec![5.0, 8.0, 3.0], vec![7.0, 1.0, 2.0], 0.7).unwrap()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Energies uniform on [0, 10], N in {2, 3, 4}, alpha cycling through [`ALPHAS`].
pub fn small_instance(rng: &mut StdRng, index: usize) -> EnergyTrace {
    let n = rng.gen_range(2..=4);
    trace_of_len(rng, n, ALPHAS[index % ALPHAS.len()])
}

pub fn small_instances(seed: u64, count: usize) -> Vec<EnergyTrace> {
    let mut rng = rng(seed);
    (0..count).map(|k| small_instance(&mut rng, k)).collect()
}

pub fn trace_of_len(rng: &mut StdRng, n: usize, alpha: f64) -> EnergyTrace {
    let draw = |rng: &mut StdRng| (0..n).map(|_| rng.gen_range(0.0..10.0)).collect::<Vec<f64>>();
    let tx = draw(rng);
    let rx = draw(rng);
    let helper = draw(rng);
    EnergyTrace::new(tx, rx, helper, alpha).unwrap()
}

pub fn cost() -> CostModel {
    CostModel::default()
}

/// `max(1e-3, 1e-3 · objective)` agreement.
pub fn within(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-3f64.max(1e-3 * a.abs().max(b.abs()))
}

fn prefix(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Outcome of one property over a batch of instances.
#[derive(Debug, Default)]
pub struct Check {
    pub cases: usize,
    pub violations: Vec<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.violations.push(detail());
        }
    }
}

/// Solver against oracle for one scenario.
pub fn oracle_agreement(kind: ScenarioKind, traces: &[EnergyTrace]) -> Check {
    let mut check = Check::default();
    for (k, trace) in traces.iter().enumerate() {
        let sol = solve(kind, trace, &cost()).unwrap();
        let oracle = brute_force(&ConstraintSystem::new(kind, trace.clone(), cost()), ORACLE_STEP, k as u64).unwrap();
        check.record(within(sol.objective, oracle.objective), || {
            format!("instance {k}: solver {} oracle {}", sol.objective, oracle.objective)
        });
    }
    check
}

/// Rates of the both-batteries solution never decrease.
pub fn rates_non_decreasing(traces: &[EnergyTrace]) -> Check {
    let mut check = Check::default();
    for (k, t) in traces.iter().enumerate() {
        let r = solve_s1(t, &cost()).unwrap().policy.rate;
        let ok = r.windows(2).all(|w| w[0] <= w[1] + 1e-9);
        check.record(ok, || format!("instance {k}: rates {r:?}"));
    }
    check
}

/// Wherever the both-batteries rate rises, the transmitter or the receiver
/// has spent everything it had up to that slot.
pub fn tight_at_rate_increase(traces: &[EnergyTrace]) -> Check {
    let mut check = Check::default();
    let c = cost();
    for (k, t) in traces.iter().enumerate() {
        let p = solve_s1(t, &c).unwrap().policy;
        let (tx_used, tx_cum) = (prefix(&p.tx_power), prefix(&t.tx_energy));
        let (rx_used, rx_cum) = (prefix(&p.rx_consumption), prefix(&t.virtual_rx_energy()));
        let ok = (0..t.n_slots - 1).all(|i| {
            p.rate[i + 1] <= p.rate[i] + 1e-9
                || (tx_cum[i] - tx_used[i]).abs() <= 1e-9 * (1.0 + tx_cum[i])
                || (rx_cum[i] - rx_used[i]).abs() <= 1e-9 * (1.0 + rx_cum[i])
        });
        check.record(ok, || format!("instance {k}: {p:?}"));
    }
    check
}

/// Staircase variant of the previous check on plain budget lists.
pub fn staircase_tight_at_rise(traces: &[EnergyTrace]) -> Check {
    let mut check = Check::default();
    for (k, t) in traces.iter().enumerate() {
        let s = staircase_levels(&t.tx_energy).unwrap();
        let (lv, bd) = (prefix(&s.per_slot), prefix(&t.tx_energy));
        let ok = (0..t.n_slots - 1)
            .all(|i| s.per_slot[i + 1] <= s.per_slot[i] + 1e-9 || (lv[i] - bd[i]).abs() <= 1e-9 * (1.0 + bd[i]));
        check.record(ok, || format!("instance {k}: {:?}", s.per_slot));
    }
    check
}

/// Full-power transmitter: a slot whose consumption exceeds a later one runs
/// on its own harvest only.
pub fn earlier_higher_is_pinned(traces: &[EnergyTrace]) -> Check {
    let mut check = Check::default();
    for (k, t) in traces.iter().enumerate() {
        let q = solve_s2(&t.rx_energy, &t.helper_energy, t.alpha, &cost()).unwrap().policy.rx_consumption;
        let n = t.n_slots;
        let ok = (0..n).all(|m| {
            (m + 1..n).all(|j| q[j] >= q[m] - 1e-9 || (q[m] - t.rx_energy[m]).abs() <= 1e-9 * (1.0 + q[m]))
        });
        check.record(ok, || format!("instance {k}: q {q:?} harvest {:?}", t.rx_energy));
    }
    check
}

/// Excluded slots sit exactly at their own harvest; every slot meets its floor.
pub fn excluded_slots_pinned(traces: &[EnergyTrace]) -> Check {
    let mut check = Check::default();
    for (k, t) in traces.iter().enumerate() {
        let (levels, state) = min_constrained_waterfill(&t.rx_energy, &t.helper_energy, t.alpha).unwrap();
        let pinned = state.excluded.iter().all(|&i| (levels[i] - t.rx_energy[i]).abs() <= 1e-9);
        let floor = levels.iter().zip(&t.rx_energy).all(|(l, e)| *l >= e - 1e-9);
        check.record(pinned && floor, || format!("instance {k}: levels {levels:?} excluded {:?}", state.excluded));
    }
    check
}

/// Re-filling after an exclusion never raises a still-included slot.
pub fn exclusion_never_raises(traces: &[EnergyTrace]) -> Check {
    let mut check = Check::default();
    for (k, t) in traces.iter().enumerate() {
        let caps: Vec<f64> = t.tx_energy.iter().map(|e| e * 1.5).collect();
        for (levels, state) in [
            min_constrained_waterfill(&t.rx_energy, &t.helper_energy, t.alpha).unwrap(),
            min_capped_waterfill(&t.rx_energy, &t.helper_energy, t.alpha, &caps).unwrap(),
        ] {
            let _ = levels;
            let ok = state.rounds.windows(2).all(|w| {
                w[0].levels.iter().zip(&w[1].levels).all(|pair| match pair {
                    (Some(before), Some(after)) => *after <= before + 1e-9,
                    _ => true,
                })
            });
            check.record(ok, || format!("instance {k}: {:?}", state.rounds));
        }
    }
    check
}

/// The first-slot rate of the battery-transmitter solver is optimal: fixing
/// slot 1 to it and optimising the rest loses nothing against the unrestricted
/// oracle optimum.
pub fn first_slot_optimal(traces: &[EnergyTrace]) -> Check {
    let mut check = Check::default();
    let c = cost();
    for (k, t) in traces.iter().enumerate() {
        let (_, passes) = solve_s3_traced(t, &c).unwrap();
        let first = &passes[0];
        let full = brute_force(&ConstraintSystem::new(ScenarioKind::S3BatteryTxNoBatteryRx, t.clone(), c), ORACLE_STEP, k as u64)
            .unwrap();
        let fixed = first.rate + rest_optimum(t, first.tx_power, k as u64);
        check.record(within(fixed, full.objective), || {
            format!(
                "instance {k}: first-slot power {} gives {fixed}, optimum {} with first-slot power {}",
                first.tx_power, full.objective, full.argmax.tx_power[0]
            )
        });
    }
    check
}

/// Oracle optimum of slots 2..N once slot 1 transmits `p1` and the receiver
/// spends the least it can on it.
fn rest_optimum(t: &EnergyTrace, p1: f64, seed: u64) -> f64 {
    let c = cost();
    let q1 = (c.beta() * p1).max(t.rx_energy[0]);
    let helper_used = if t.alpha > 0.0 { (q1 - t.rx_energy[0]) / t.alpha } else { 0.0 };
    let mut tx = t.tx_energy[1..].to_vec();
    tx[0] += (t.tx_energy[0] - p1).max(0.0);
    let mut helper = t.helper_energy[1..].to_vec();
    helper[0] += (t.helper_energy[0] - helper_used).max(0.0);
    let rest = EnergyTrace::new(tx, t.rx_energy[1..].to_vec(), helper, t.alpha).unwrap();
    brute_force(&ConstraintSystem::new(ScenarioKind::S3BatteryTxNoBatteryRx, rest, c), ORACLE_STEP, seed).unwrap().objective
}

/// Both-batteries solver (immediate helper transfer) against the oracle that
/// optimises transfers jointly with powers.
pub fn immediate_transfer_optimal(traces: &[EnergyTrace]) -> Check {
    let mut check = Check::default();
    for (k, t) in traces.iter().enumerate() {
        let sol = solve_s1(t, &cost()).unwrap();
        let oracle = brute_force(&ConstraintSystem::new(ScenarioKind::S1BothBatteries, t.clone(), cost()), ORACLE_STEP, k as u64)
            .unwrap();
        check.record((sol.objective - oracle.objective).abs() <= ORACLE_STEP, || {
            format!("instance {k}: solver {} oracle {} transfers {:?}", sol.objective, oracle.objective, oracle.argmax.helper_transfer)
        });
    }
    check
}

/// Objective ordering across scenarios and the full-power limit of S3.
pub fn scenario_ordering(traces: &[EnergyTrace]) -> (Check, Check, Check) {
    let c = cost();
    let (mut s1_s3, mut s3_s4, mut limit) = (Check::default(), Check::default(), Check::default());
    for (k, t) in traces.iter().enumerate() {
        let obj = |kind| solve(kind, t, &c).unwrap().objective;
        let (o1, o3, o4) = (obj(ScenarioKind::S1BothBatteries), obj(ScenarioKind::S3BatteryTxNoBatteryRx), obj(ScenarioKind::S4NoBatteries));
        s1_s3.record(o1 >= o3 - 1e-6, || format!("instance {k}: S1 {o1} < S3 {o3}"));
        s3_s4.record(o3 >= o4 - 1e-6, || format!("instance {k}: S3 {o3} < S4 {o4}"));
        let mut rich = t.clone();
        rich.tx_energy = vec![1e6; t.n_slots];
        let (big, o2) = (solve_s3(&rich, &c).unwrap().objective, obj(ScenarioKind::S2FullPowerTxNoBatteryRx));
        limit.record((big - o2).abs() <= 1e-6, || format!("instance {k}: S3 with huge E {big} vs S2 {o2}"));
    }
    (s1_s3, s3_s4, limit)
}

/// Random traces of length `n` for the ordering and scale checks.
pub fn traces_of_len(seed: u64, count: usize, n: usize) -> Vec<EnergyTrace> {
    let mut rng = rng(seed);
    (0..count).map(|k| trace_of_len(&mut rng, n, ALPHAS[k % ALPHAS.len()])).collect()
}
