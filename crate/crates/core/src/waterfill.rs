//! Directional waterfilling.
//!
//! Energy can only move forward in time, so every primitive here solves
//! "maximise a sum of one fixed concave function of per-slot levels, subject to
//! cumulative budgets", optionally with per-slot caps and per-slot floors. The
//! optimal allocation does not depend on which concave function is used, so
//! the primitives never see it.
//!
//! Both fills are pool-adjacent-violators passes: slots are pushed left to
//! right as blocks, and a block is merged into its successor whenever its level
//! is strictly higher (energy flows forward to equalise). Equal levels are kept
//! as separate segments, which is the smallest-index tie-break of the
//! running-average rule.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};
use core::fmt;

/// Piecewise-constant allocation: `boundaries` holds the one-based end slot of
/// each segment (the last equals N), `segment_levels` one level per segment.
///
/// For capped fills a segment level is the common water level of its
/// unsaturated slots and is `+∞` for a segment whose slots all sit at their
/// caps with budget to spare.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSchedule {
    pub boundaries: Vec<usize>,
    pub segment_levels: Vec<f64>,
    pub per_slot: Vec<f64>,
}

impl SegmentSchedule {
    /// `(start, end, level)` per segment, zero-based and end-exclusive.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let starts = core::iter::once(0).chain(self.boundaries.iter().copied());
        starts.zip(&self.boundaries).zip(&self.segment_levels).map(|((s, &e), &l)| (s, e, l))
    }

    pub fn total(&self) -> f64 {
        self.per_slot.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WaterfillError {
    Empty,
    LengthMismatch { expected: usize, found: usize },
    InvalidValue { index: usize, value: f64 },
    InvalidAlpha(f64),
}

impl fmt::Display for WaterfillError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaterfillError::Empty => write!(f, "empty input"),
            WaterfillError::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            WaterfillError::InvalidValue { index, value } => write!(f, "entry {index} is invalid: {value}"),
            WaterfillError::InvalidAlpha(a) => write!(f, "alpha out of range: {a}"),
        }
    }
}

fn check_budgets(values: &[f64]) -> Result<(), WaterfillError> {
    if values.is_empty() {
        return Err(WaterfillError::Empty);
    }
    match values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        Some(index) => Err(WaterfillError::InvalidValue { index, value: values[index] }),
        None => Ok(()),
    }
}

fn check_caps(caps: &[f64], n: usize) -> Result<(), WaterfillError> {
    if caps.len() != n {
        return Err(WaterfillError::LengthMismatch { expected: n, found: caps.len() });
    }
    // +inf is a legal cap
    match caps.iter().position(|c| c.is_nan() || *c < 0.0) {
        Some(index) => Err(WaterfillError::InvalidValue { index, value: caps[index] }),
        None => Ok(()),
    }
}

/// Optimal allocation under cumulative causality `Σ_{i≤j} x_i ≤ Σ_{i≤j} b_i`.
///
/// Levels are the slopes of the greatest convex minorant of the cumulative
/// budget curve: non-decreasing, and the whole budget is used.
pub fn staircase_levels(budgets: &[f64]) -> Result<SegmentSchedule, WaterfillError> {
    check_budgets(budgets)?;
    Ok(staircase_unchecked(budgets))
}

fn staircase_unchecked(budgets: &[f64]) -> SegmentSchedule {
    // (end, energy, width)
    let mut blocks: Vec<(usize, f64, usize)> = Vec::with_capacity(budgets.len());
    for (i, &b) in budgets.iter().enumerate() {
        blocks.push((i + 1, b, 1));
        while blocks.len() >= 2 {
            let (_, e_top, w_top) = blocks[blocks.len() - 1];
            let (_, e_prev, w_prev) = blocks[blocks.len() - 2];
            if e_prev / w_prev as f64 > e_top / w_top as f64 {
                let (end, e, w) = blocks.pop().unwrap();
                let prev = blocks.last_mut().unwrap();
                *prev = (end, prev.1 + e, prev.2 + w);
            } else {
                break;
            }
        }
    }
    let mut per_slot = Vec::with_capacity(budgets.len());
    let mut boundaries = Vec::with_capacity(blocks.len());
    let mut segment_levels = Vec::with_capacity(blocks.len());
    for (end, e, w) in blocks {
        let level = e / w as f64;
        per_slot.extend(core::iter::repeat_n(level, w));
        boundaries.push(end);
        segment_levels.push(level);
    }
    SegmentSchedule { boundaries, segment_levels, per_slot }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cap(f64);

impl Eq for Cap {}

impl PartialOrd for Cap {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cap {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// A run of slots sharing one water level. Slots whose cap lies below the
/// level sit at their cap (`saturated`); the rest share the level.
struct CappedBlock {
    start: usize,
    end: usize,
    energy: f64,
    saturated: BinaryHeap<Cap>,
    open: BinaryHeap<Reverse<Cap>>,
    saturated_sum: f64,
    level: f64,
    /// Cap of the only slot while the block has never merged.
    solo: Option<f64>,
}

impl CappedBlock {
    fn new(index: usize, energy: f64, cap: f64) -> Self {
        // a lone slot needs no heap: it holds the level `energy` or saturates
        let level = if energy <= cap { energy.max(0.0) } else { f64::INFINITY };
        CappedBlock {
            start: index,
            end: index + 1,
            energy,
            saturated: BinaryHeap::new(),
            open: BinaryHeap::new(),
            saturated_sum: 0.0,
            level,
            solo: Some(cap),
        }
    }

    fn size(&self) -> usize {
        self.saturated.len() + self.open.len() + usize::from(self.solo.is_some())
    }

    fn unpack_solo(&mut self) {
        if let Some(cap) = self.solo.take() {
            self.open.push(Reverse(Cap(cap)));
        }
    }

    fn absorb(&mut self, mut other: CappedBlock) {
        if other.size() > self.size() {
            core::mem::swap(&mut self.saturated, &mut other.saturated);
            core::mem::swap(&mut self.open, &mut other.open);
            core::mem::swap(&mut self.saturated_sum, &mut other.saturated_sum);
            core::mem::swap(&mut self.solo, &mut other.solo);
        }
        self.unpack_solo();
        if let Some(cap) = other.solo.take() {
            self.open.push(Reverse(Cap(cap)));
        }
        self.saturated_sum += other.saturated_sum;
        self.saturated.extend(other.saturated.drain());
        self.open.extend(other.open.drain());
        self.energy += other.energy;
        self.start = self.start.min(other.start);
        self.end = self.end.max(other.end);
        self.settle();
    }

    /// Solves `Σ min(cap_j, L) = energy` for the smallest such `L`, or `+∞`
    /// when every slot can sit at its cap.
    ///
    /// Each correction moves one slot between the two heaps and never lowers
    /// the running estimate, so a slot changes side at most twice.
    fn settle(&mut self) {
        let limit = 4 * self.size() + 8;
        for _ in 0..limit {
            let level = if self.open.is_empty() {
                if self.energy >= self.saturated_sum {
                    f64::INFINITY
                } else {
                    let Cap(c) = self.saturated.pop().expect("block holds at least one slot");
                    self.saturated_sum -= c;
                    self.open.push(Reverse(Cap(c)));
                    continue;
                }
            } else {
                ((self.energy - self.saturated_sum) / self.open.len() as f64).max(0.0)
            };
            let eps = 1e-12 * (1.0 + level.abs());
            if let Some(&Reverse(Cap(c))) = self.open.peek() {
                if c < level - eps {
                    self.open.pop();
                    self.saturated.push(Cap(c));
                    self.saturated_sum += c;
                    continue;
                }
            }
            if let Some(&Cap(c)) = self.saturated.peek() {
                if c > level + eps {
                    self.saturated.pop();
                    self.saturated_sum -= c;
                    self.open.push(Reverse(Cap(c)));
                    continue;
                }
            }
            self.level = level;
            return;
        }
        // Only reachable through rounding ping-pong; the last estimate is within eps.
        self.level = if self.open.is_empty() {
            f64::INFINITY
        } else {
            (self.energy - self.saturated_sum) / self.open.len() as f64
        };
    }
}

/// Optimal allocation under cumulative causality and per-slot caps
/// `x_i ≤ cap_i`. Budget that cannot be placed under the caps stays unused.
pub fn capped_waterfill(budgets: &[f64], caps: &[f64]) -> Result<SegmentSchedule, WaterfillError> {
    check_budgets(budgets)?;
    check_caps(caps, budgets.len())?;
    Ok(capped_unchecked(budgets, caps))
}

fn capped_unchecked(budgets: &[f64], caps: &[f64]) -> SegmentSchedule {
    let mut blocks: Vec<CappedBlock> = Vec::new();
    for (i, (&b, &c)) in budgets.iter().zip(caps).enumerate() {
        blocks.push(CappedBlock::new(i, b, c));
        while blocks.len() >= 2 && blocks[blocks.len() - 2].level > blocks[blocks.len() - 1].level {
            let top = blocks.pop().unwrap();
            blocks.last_mut().unwrap().absorb(top);
        }
    }
    let mut per_slot = vec![0.0; budgets.len()];
    let mut boundaries = Vec::with_capacity(blocks.len());
    let mut segment_levels = Vec::with_capacity(blocks.len());
    for block in &blocks {
        for j in block.start..block.end {
            per_slot[j] = caps[j].min(block.level);
        }
        boundaries.push(block.end);
        segment_levels.push(block.level);
    }
    SegmentSchedule { boundaries, segment_levels, per_slot }
}

/// One pass of the exclusion loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionRound {
    /// Water level of every slot that took part in this pass; `None` for
    /// slots excluded in an earlier pass.
    pub levels: Vec<Option<f64>>,
    /// Slots (zero-based) whose level fell below their own harvest.
    pub newly_excluded: Vec<usize>,
}

/// Bookkeeping of the floor-constrained fills.
#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionState {
    /// Zero-based slots pinned to their own harvest, ascending.
    pub excluded: Vec<usize>,
    /// Slots excluded by the last pass; empty once the loop has converged.
    pub newly_excluded: Vec<usize>,
    /// Helper energy after forwarding everything held in excluded slots to the
    /// next included slot.
    pub effective_helper: Vec<f64>,
    /// Helper energy held in an excluded suffix; no later slot can use it.
    pub dropped_helper: f64,
    pub rounds: Vec<ExclusionRound>,
    /// Slots whose cap lies below their own harvest (capped variant only).
    pub floor_above_cap: Vec<usize>,
}

/// Receiver levels `S̄` for a receiver without a battery topped up by a helper
/// with a battery: maximise a concave sum of levels with `S̄_i ≥ Ē_i` and
/// helper causality, by iterated waterfilling that excludes any slot whose
/// level drops below its own harvest.
pub fn min_constrained_waterfill(
    rx_energy: &[f64],
    helper_energy: &[f64],
    alpha: f64,
) -> Result<(Vec<f64>, ExclusionState), WaterfillError> {
    check_exclusion_inputs(rx_energy, helper_energy, alpha)?;
    Ok(exclusion_loop(rx_energy, helper_energy, alpha, None, true))
}

/// As [`min_constrained_waterfill`] with per-slot caps on the receiver level
/// (receiver-energy units), for a transmitter that cannot store energy.
pub fn min_capped_waterfill(
    rx_energy: &[f64],
    helper_energy: &[f64],
    alpha: f64,
    caps: &[f64],
) -> Result<(Vec<f64>, ExclusionState), WaterfillError> {
    check_exclusion_inputs(rx_energy, helper_energy, alpha)?;
    check_caps(caps, rx_energy.len())?;
    Ok(exclusion_loop(rx_energy, helper_energy, alpha, Some(caps), true))
}

fn check_exclusion_inputs(rx: &[f64], helper: &[f64], alpha: f64) -> Result<(), WaterfillError> {
    check_budgets(rx)?;
    if helper.len() != rx.len() {
        return Err(WaterfillError::LengthMismatch { expected: rx.len(), found: helper.len() });
    }
    check_budgets(helper)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(WaterfillError::InvalidAlpha(alpha));
    }
    Ok(())
}

/// Moves the helper energy of every excluded slot to the first following
/// included slot. Returns the forwarded vector and the energy stranded in an
/// excluded suffix.
fn forward_helper(helper: &[f64], excluded: &[bool]) -> (Vec<f64>, f64) {
    let mut out = vec![0.0; helper.len()];
    let mut carry = 0.0;
    for (i, (&h, &ex)) in helper.iter().zip(excluded).enumerate() {
        if ex {
            carry += h;
        } else {
            out[i] = h + carry;
            carry = 0.0;
        }
    }
    (out, carry)
}

pub(crate) fn exclusion_loop(
    rx: &[f64],
    helper: &[f64],
    alpha: f64,
    caps: Option<&[f64]>,
    record_rounds: bool,
) -> (Vec<f64>, ExclusionState) {
    let n = rx.len();
    let mut excluded = vec![false; n];
    let mut rounds = Vec::new();
    let floor_above_cap: Vec<usize> = match caps {
        Some(c) => (0..n).filter(|&i| c[i] < rx[i]).collect(),
        None => Vec::new(),
    };
    let mut levels = vec![0.0; n];
    let mut last_newly = Vec::new();
    // Each pass either excludes a slot or stops, so n + 1 passes suffice.
    for _ in 0..=n {
        let (effective, _) = forward_helper(helper, &excluded);
        let included: Vec<usize> = (0..n).filter(|&i| !excluded[i]).collect();
        let supply: Vec<f64> = included.iter().map(|&i| rx[i] + alpha * effective[i]).collect();
        let mut round_levels = if record_rounds { vec![None; n] } else { Vec::new() };
        let mut newly = Vec::new();
        if !included.is_empty() {
            let filled = match caps {
                Some(c) => {
                    let sub_caps: Vec<f64> = included.iter().map(|&i| c[i]).collect();
                    capped_unchecked(&supply, &sub_caps).per_slot
                }
                None => staircase_unchecked(&supply).per_slot,
            };
            for (&i, &level) in included.iter().zip(&filled) {
                if record_rounds {
                    round_levels[i] = Some(level);
                }
                levels[i] = level;
                if level < rx[i] - 1e-12 * (1.0 + rx[i]) {
                    newly.push(i);
                }
            }
        }
        if record_rounds {
            rounds.push(ExclusionRound { levels: round_levels, newly_excluded: newly.clone() });
        }
        if newly.is_empty() {
            last_newly = newly;
            break;
        }
        for &i in &newly {
            excluded[i] = true;
        }
        last_newly = newly;
    }
    for i in 0..n {
        if excluded[i] {
            levels[i] = rx[i];
        }
    }
    let (effective_helper, dropped_helper) = forward_helper(helper, &excluded);
    let state = ExclusionState {
        excluded: (0..n).filter(|&i| excluded[i]).collect(),
        newly_excluded: last_newly,
        effective_helper,
        dropped_helper,
        rounds,
        floor_above_cap,
    };
    (levels, state)
}
