//! Broadcasting predicates, the analytic conditions for the MCS/MIS and
//! Bell-diagonal families, the beta2 interval solver behind the published
//! tables, and tetrahedron region grids.
//!
//! Two coherence routes exist for Bell-diagonal states. The `printed_*`
//! functions and everything built on them (conditions, interval solver,
//! region grid) use the published closed forms. [`verdict`] and
//! [`bds_crosscheck`] evaluate the l1 coherence of the cloned density
//! matrices directly. The two disagree whenever beta1 carries the
//! coherence; the crosscheck record exposes both.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use rayon::prelude::*;
use serde::Serialize;

use crate::cloning::{clone, si_machine, MachineParam, Mode};
use crate::coherence::coherence_of;
use crate::error::{Error, Result};
use crate::linalg::tol;
use crate::sampling::{open_uniform, random_bloch, rng_from_seed};
use crate::states::{bds_to_bloch, in_tetrahedron, BetaCoords, BlochTwoQubit, MixParam};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BroadcastVerdict {
    pub coh_in: f64,
    pub coh_12: f64,
    pub coh_34: f64,
    pub coh_13: f64,
    pub coh_24: f64,
    /// Cross-lab pairs coherent while same-side pairs carry none.
    pub optimal: bool,
    /// Both cross-lab pairs strictly more coherent than both same-side pairs.
    pub nonoptimal: bool,
    pub gained: bool,
}

pub fn verdict(s: &BlochTwoQubit, m: &MachineParam) -> BroadcastVerdict {
    let c = clone(s, m).coherences();
    let coh_in = coherence_of(s);
    let zero = |v: f64| v <= tol::ZERO_COHERENCE;
    BroadcastVerdict {
        coh_in,
        coh_12: c.coh_12,
        coh_34: c.coh_34,
        coh_13: c.coh_13,
        coh_24: c.coh_24,
        optimal: zero(c.coh_13) && zero(c.coh_24) && !zero(c.coh_12) && !zero(c.coh_34),
        nonoptimal: c.coh_12 > c.coh_13 && c.coh_12 > c.coh_24 && c.coh_34 > c.coh_13 && c.coh_34 > c.coh_24,
        gained: c.coh_12 > coh_in,
    }
}

/// The MCS/MIS broadcasting inequality: `p mu^2 > 2 lambda` (local) or
/// `p > 2 lambda + 4 p lambda` (non-local).
pub fn mcs_condition(mode: Mode, p: f64, lambda: f64) -> Result<bool> {
    let p = MixParam::new(p)?.value();
    let m = MachineParam::new(mode, lambda)?;
    Ok(match mode {
        Mode::Local => p * m.mu() * m.mu() > 2.0 * lambda,
        Mode::Nonlocal => p > 2.0 * lambda + 4.0 * p * lambda,
    })
}

/// Published Bell-diagonal coherences after cloning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrintedBdsCoherence {
    /// C(rho12) = C(rho34).
    pub cross_pair: f64,
    /// C(rho13) = C(rho24).
    pub same_side_pair: f64,
}

pub fn printed_bds_coherence(m: &MachineParam, b: &BetaCoords) -> PrintedBdsCoherence {
    let lambda = m.lambda();
    let s = 2.0 * b.beta2 - b.beta3;
    let cross_pair = match m.mode() {
        Mode::Local => (s * (1.0 - 2.0 * lambda).powi(2)).abs() / SQRT_2,
        Mode::Nonlocal => ((s * (-1.0 + 4.0 * lambda)).abs() + (b.beta3 - 4.0 * b.beta3 * lambda).abs()) / SQRT_2,
    };
    PrintedBdsCoherence {
        cross_pair,
        same_side_pair: 2.0 * lambda,
    }
}

/// Printed-formula broadcasting condition at an arbitrary machine parameter.
pub fn bds_condition_at(m: &MachineParam, b: &BetaCoords) -> Result<bool> {
    if !in_tetrahedron(b) {
        return Err(Error::OutsideTetrahedron(b.beta1, b.beta2, b.beta3));
    }
    let c = printed_bds_coherence(m, b);
    Ok(c.cross_pair > c.same_side_pair)
}

/// Printed-formula condition for the state-independent machine of `mode`.
/// Local reduces to `4|2 b2 - b3| > 3 sqrt2`, non-local to
/// `3(|b3 - 2 b2| + |b3|) > sqrt2`.
pub fn bds_condition(mode: Mode, b: &BetaCoords) -> Result<bool> {
    bds_condition_at(&si_machine(mode), b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lower_open { v > self.lower } else { v >= self.lower };
        let below = if self.upper_open { v < self.upper } else { v <= self.upper };
        above && below
    }
}

/// Broadcasting beta2 values for fixed (beta1, beta3), as disjoint sorted intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Beta2Range {
    pub mode: Mode,
    pub beta1: f64,
    pub beta3: f64,
    pub intervals: Vec<Interval>,
}

impl Beta2Range {
    pub fn contains(&self, beta2: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(beta2))
    }
}

/// beta2 bounds of the tetrahedron slice at (beta1, beta3), if nonempty.
pub fn tetrahedron_slice(beta1: f64, beta3: f64) -> Option<(f64, f64)> {
    let half = (0.5 + beta1) / SQRT_2;
    let b3_cap = (0.5 - beta1) / SQRT_2;
    if half < -tol::TRACE || beta3.abs() > b3_cap + tol::TRACE {
        return None;
    }
    let half = half.max(0.0);
    Some((-half, half))
}

/// Solves the printed condition for beta2 analytically at machine `m`.
///
/// Both conditions have the form |2 b2 - b3| > k, so the no-broadcast set is
/// the closed interval [(b3 - k)/2, (b3 + k)/2], and the broadcasting set is
/// its complement within the slice.
pub fn beta2_ranges_at(m: &MachineParam, beta1: f64, beta3: f64) -> Beta2Range {
    let mut out = Beta2Range {
        mode: m.mode(),
        beta1,
        beta3,
        intervals: Vec::new(),
    };
    let Some((lo, hi)) = tetrahedron_slice(beta1, beta3) else {
        return out;
    };
    let lambda = m.lambda();
    let mu = m.mu();
    let k = match m.mode() {
        // |s| mu^2 / sqrt2 > 2 lambda
        Mode::Local => {
            if mu == 0.0 {
                return out;
            }
            2.0 * lambda * SQRT_2 / (mu * mu)
        }
        // mu (|s| + |b3|) / sqrt2 > 2 lambda
        Mode::Nonlocal => {
            if mu == 0.0 {
                return out;
            }
            2.0 * lambda * SQRT_2 / mu - beta3.abs()
        }
    };
    if k < 0.0 {
        out.intervals.push(Interval {
            lower: lo,
            upper: hi,
            lower_open: false,
            upper_open: false,
        });
        return out;
    }
    let (r1, r2) = ((beta3 - k) / 2.0, (beta3 + k) / 2.0);
    if r1 > lo {
        let upper_open = r1 <= hi;
        out.intervals.push(Interval {
            lower: lo,
            upper: r1.min(hi),
            lower_open: false,
            upper_open,
        });
    }
    if r2 < hi {
        let lower_open = r2 >= lo;
        out.intervals.push(Interval {
            lower: r2.max(lo),
            upper: hi,
            lower_open,
            upper_open: false,
        });
    }
    out
}

/// State-independent interval solver used for the published tables.
pub fn beta2_ranges(mode: Mode, beta1: f64, beta3: f64) -> Beta2Range {
    beta2_ranges_at(&si_machine(mode), beta1, beta3)
}

/// Printed vs first-principles coherences of a cloned Bell-diagonal state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrosscheckRecord {
    pub mode: Mode,
    pub lambda: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub printed_cross_pair: f64,
    pub computed_cross_pair: f64,
    pub printed_same_side_pair: f64,
    pub computed_same_side_pair: f64,
    pub printed_broadcastable: bool,
    pub computed_broadcastable: bool,
    pub agree: bool,
}

pub fn bds_crosscheck_at(m: &MachineParam, b: &BetaCoords) -> Result<CrosscheckRecord> {
    let s = bds_to_bloch(b)?;
    let printed = printed_bds_coherence(m, b);
    let v = verdict(&s, m);
    let agree = (printed.cross_pair - v.coh_12).abs() <= tol::HERMITIAN
        && (printed.same_side_pair - v.coh_13).abs() <= tol::HERMITIAN;
    Ok(CrosscheckRecord {
        mode: m.mode(),
        lambda: m.lambda(),
        beta1: b.beta1,
        beta2: b.beta2,
        beta3: b.beta3,
        printed_cross_pair: printed.cross_pair,
        computed_cross_pair: v.coh_12,
        printed_same_side_pair: printed.same_side_pair,
        computed_same_side_pair: v.coh_13,
        printed_broadcastable: printed.cross_pair > printed.same_side_pair,
        computed_broadcastable: v.nonoptimal,
        agree,
    })
}

pub fn bds_crosscheck(mode: Mode, b: &BetaCoords) -> Result<CrosscheckRecord> {
    bds_crosscheck_at(&si_machine(mode), b)
}

/// One point of a tetrahedron region grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionRecord {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub in_tetrahedron: bool,
    pub broadcastable: bool,
    /// Printed C(rho12); zero outside the tetrahedron.
    pub nonlocal_coherence: f64,
    /// Min-max normalized `nonlocal_coherence` over broadcastable points.
    pub hue: Option<f64>,
}

pub const REGION_CSV_HEADER: [&str; 7] = [
    "beta1",
    "beta2",
    "beta3",
    "in_tetrahedron",
    "broadcastable",
    "nonlocal_coherence",
    "hue",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionSummary {
    pub mode: Mode,
    pub resolution: f64,
    pub grid_points: usize,
    pub tetrahedron_points: usize,
    pub broadcastable_points: usize,
    pub broadcastable_fraction: f64,
    /// Hue normalization bounds (NaN when nothing is broadcastable).
    pub coherence_min: f64,
    pub coherence_max: f64,
    pub min_abs_beta2_broadcastable: f64,
}

/// Regular grid over [-1/sqrt2, 1/sqrt2]^3 at integer multiples of the
/// resolution. Records come out in lexicographic (beta1, beta2, beta3) order.
#[derive(Debug, Clone)]
pub struct RegionGrid {
    machine: MachineParam,
    resolution: f64,
    axis: Vec<f64>,
    summary: RegionSummary,
}

#[derive(Debug, Clone, Copy)]
struct PointEval {
    inside: bool,
    broadcastable: bool,
    coherence: f64,
}

fn eval_point(m: &MachineParam, b: &BetaCoords) -> PointEval {
    if !in_tetrahedron(b) {
        return PointEval {
            inside: false,
            broadcastable: false,
            coherence: 0.0,
        };
    }
    let c = printed_bds_coherence(m, b);
    PointEval {
        inside: true,
        broadcastable: c.cross_pair > c.same_side_pair,
        coherence: c.cross_pair,
    }
}

#[derive(Debug, Clone, Copy)]
struct Tally {
    inside: usize,
    broadcastable: usize,
    cmin: f64,
    cmax: f64,
    min_abs_b2: f64,
}

impl Tally {
    fn empty() -> Self {
        Self {
            inside: 0,
            broadcastable: 0,
            cmin: f64::INFINITY,
            cmax: f64::NEG_INFINITY,
            min_abs_b2: f64::INFINITY,
        }
    }

    fn merge(self, o: Self) -> Self {
        Self {
            inside: self.inside + o.inside,
            broadcastable: self.broadcastable + o.broadcastable,
            cmin: self.cmin.min(o.cmin),
            cmax: self.cmax.max(o.cmax),
            min_abs_b2: self.min_abs_b2.min(o.min_abs_b2),
        }
    }
}

impl RegionGrid {
    pub fn summary(&self) -> &RegionSummary {
        &self.summary
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    fn hue(&self, coherence: f64) -> f64 {
        let span = self.summary.coherence_max - self.summary.coherence_min;
        if span > 0.0 {
            (coherence - self.summary.coherence_min) / span
        } else {
            0.0
        }
    }

    fn record(&self, b: BetaCoords) -> RegionRecord {
        let e = eval_point(&self.machine, &b);
        RegionRecord {
            beta1: b.beta1,
            beta2: b.beta2,
            beta3: b.beta3,
            in_tetrahedron: e.inside,
            broadcastable: e.broadcastable,
            nonlocal_coherence: e.coherence,
            hue: e.broadcastable.then(|| self.hue(e.coherence)),
        }
    }

    /// Streams every grid point in deterministic order.
    pub fn records(&self) -> impl Iterator<Item = RegionRecord> + '_ {
        let n = self.axis.len();
        (0..n * n * n).map(move |k| {
            let (i, j, l) = (k / (n * n), (k / n) % n, k % n);
            self.record(BetaCoords::new(self.axis[i], self.axis[j], self.axis[l]))
        })
    }

    /// Records for one beta1 slab, computed in parallel across slabs by the caller.
    pub fn slab(&self, i: usize) -> Vec<RegionRecord> {
        let n = self.axis.len();
        let b1 = self.axis[i];
        let mut out = Vec::with_capacity(n * n);
        for &b2 in &self.axis {
            for &b3 in &self.axis {
                out.push(self.record(BetaCoords::new(b1, b2, b3)));
            }
        }
        out
    }
}

pub fn grid_axis(resolution: f64) -> Vec<f64> {
    let k = (FRAC_1_SQRT_2 / resolution + 1e-9).floor() as i64;
    (-k..=k).map(|i| i as f64 * resolution).collect()
}

/// Builds the region grid for the state-independent machine of `mode`.
/// The summary (and hue bounds) are computed eagerly in parallel; records
/// are produced lazily.
pub fn region_grid(mode: Mode, resolution: f64) -> Result<RegionGrid> {
    region_grid_at(&si_machine(mode), resolution)
}

pub fn region_grid_at(m: &MachineParam, resolution: f64) -> Result<RegionGrid> {
    if !(resolution > 0.0 && resolution <= 0.1) {
        return Err(Error::Resolution(resolution));
    }
    let axis = grid_axis(resolution);
    let tally = axis
        .par_iter()
        .map(|&b1| {
            let mut t = Tally::empty();
            for &b2 in &axis {
                for &b3 in &axis {
                    let e = eval_point(m, &BetaCoords::new(b1, b2, b3));
                    if e.inside {
                        t.inside += 1;
                    }
                    if e.broadcastable {
                        t.broadcastable += 1;
                        t.cmin = t.cmin.min(e.coherence);
                        t.cmax = t.cmax.max(e.coherence);
                        t.min_abs_b2 = t.min_abs_b2.min(b2.abs());
                    }
                }
            }
            t
        })
        .reduce(Tally::empty, Tally::merge);
    let n = axis.len();
    let nan_if_empty = |v: f64| if tally.broadcastable == 0 { f64::NAN } else { v };
    let summary = RegionSummary {
        mode: m.mode(),
        resolution,
        grid_points: n * n * n,
        tetrahedron_points: tally.inside,
        broadcastable_points: tally.broadcastable,
        broadcastable_fraction: if tally.inside == 0 {
            0.0
        } else {
            tally.broadcastable as f64 / tally.inside as f64
        },
        coherence_min: nan_if_empty(tally.cmin),
        coherence_max: nan_if_empty(tally.cmax),
        min_abs_beta2_broadcastable: nan_if_empty(tally.min_abs_b2),
    };
    Ok(RegionGrid {
        machine: *m,
        resolution,
        axis,
        summary,
    })
}

/// Outcome of sampling random states through one cloning mode.
#[derive(Debug, Clone, Serialize)]
pub struct NoGainReport {
    pub mode: Mode,
    pub samples: usize,
    pub coherent_samples: usize,
    /// Samples with C(rho12) <= 1e-12, excluded from ratio statistics.
    pub incoherent_samples: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// max |C(rho12~) - mu C(rho12)|, the non-local scaling law.
    pub max_scaling_deviation: f64,
    /// Coherent samples whose output was not strictly less coherent.
    pub violations: usize,
}

/// Samples `n` random states and machine parameters and checks that
/// cloning never increases the cross-lab coherence. `lambda = None` draws
/// lambda uniformly from the open range of the mode.
pub fn verify_no_gain(n: usize, mode: Mode, lambda: Option<f64>, seed: u64) -> Result<NoGainReport> {
    if n == 0 {
        return Err(Error::SampleCount);
    }
    if let Some(l) = lambda {
        MachineParam::new(mode, l)?;
    }
    let mut rng = rng_from_seed(seed);
    let draws: Vec<(BlochTwoQubit, f64)> = (0..n)
        .map(|_| {
            let s = random_bloch(&mut rng);
            let l = lambda.unwrap_or_else(|| open_uniform(&mut rng, 0.0, mode.max_lambda()));
            (s, l)
        })
        .collect();
    let rows: Vec<(f64, f64, f64, f64)> = draws
        .par_iter()
        .map(|(s, l)| {
            let m = MachineParam::new(mode, *l).expect("validated range");
            let c_in = coherence_of(s);
            let c_out = coherence_of(&clone(s, &m).rho12);
            (c_in, c_out, m.mu(), *l)
        })
        .collect();
    let mut report = NoGainReport {
        mode,
        samples: n,
        coherent_samples: 0,
        incoherent_samples: 0,
        max_ratio: f64::NEG_INFINITY,
        min_ratio: f64::INFINITY,
        max_scaling_deviation: 0.0,
        violations: 0,
    };
    for (c_in, c_out, mu, l) in rows {
        if mode == Mode::Nonlocal {
            report.max_scaling_deviation = report.max_scaling_deviation.max((c_out - mu * c_in).abs());
        }
        if c_in <= tol::ZERO_COHERENCE {
            report.incoherent_samples += 1;
            continue;
        }
        report.coherent_samples += 1;
        let ratio = c_out / c_in;
        report.max_ratio = report.max_ratio.max(ratio);
        report.min_ratio = report.min_ratio.min(ratio);
        if l > 0.0 && c_out >= c_in {
            report.violations += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::mcs_mis_mixture;

    fn mix(p: f64) -> BlochTwoQubit {
        mcs_mis_mixture(MixParam::new(p).unwrap())
    }

    #[test]
    fn verdict_on_mixture() {
        let v = verdict(&mix(0.8), &si_machine(Mode::Local));
        assert!(v.nonoptimal);
        assert!((v.coh_12 - 16.0 * 0.8 / 9.0).abs() < 1e-14);
        assert!((v.coh_13 - 1.4).abs() < 1e-14);
        assert!(!v.optimal);
        assert!(!v.gained);

        let v = verdict(&mix(0.5), &si_machine(Mode::Local));
        assert!(!v.nonoptimal);

        let v = verdict(&mix(0.5), &si_machine(Mode::Nonlocal));
        assert!((v.coh_12 - 0.9).abs() < 1e-14);
        assert!(v.nonoptimal);
    }

    #[test]
    fn optimal_requires_incoherent_same_side_pairs() {
        // lambda = 0 leaves the input untouched; same-side pairs of an
        // in-plane-free input are incoherent, so this is the only optimal case
        let s = BlochTwoQubit::diagonal([0.0; 3], [0.0; 3], [0.5, -0.5, 0.5]);
        let v = verdict(&s, &MachineParam::new(Mode::Local, 0.0).unwrap());
        assert!(v.optimal);
        let v = verdict(&s, &MachineParam::new(Mode::Local, 0.01).unwrap());
        assert!(!v.optimal);
    }

    #[test]
    fn mcs_thresholds() {
        assert!(mcs_condition(Mode::Local, 0.76, 1.0 / 6.0).unwrap());
        assert!(!mcs_condition(Mode::Local, 0.74, 1.0 / 6.0).unwrap());
        assert!(mcs_condition(Mode::Nonlocal, 0.34, 0.1).unwrap());
        assert!(!mcs_condition(Mode::Nonlocal, 0.33, 0.1).unwrap());
        for mode in Mode::BOTH {
            assert!(!mcs_condition(mode, 0.0, 0.05).unwrap());
        }
        assert!(mcs_condition(Mode::Local, 1.2, 0.1).is_err());
        assert!(mcs_condition(Mode::Nonlocal, 0.5, 0.3).is_err());
    }

    #[test]
    fn mcs_condition_matches_verdict_on_grid() {
        let mut ties = 0;
        for mode in Mode::BOTH {
            for i in 0..=100 {
                let p = i as f64 / 100.0;
                for j in 0..=50 {
                    let lambda = mode.max_lambda() * j as f64 / 50.0;
                    let m = MachineParam::new(mode, lambda).unwrap();
                    // skip exact algebraic ties where rounding decides
                    let margin = match mode {
                        Mode::Local => p * m.mu() * m.mu() - 2.0 * lambda,
                        Mode::Nonlocal => p - 2.0 * lambda - 4.0 * p * lambda,
                    };
                    if margin.abs() < 1e-12 {
                        ties += 1;
                        continue;
                    }
                    let v = verdict(&mix(p), &m);
                    assert_eq!(v.nonoptimal, mcs_condition(mode, p, lambda).unwrap(), "{mode} p={p} l={lambda}");
                }
            }
        }
        assert!(ties < 20);
    }

    #[test]
    fn bds_conditions() {
        let b = BetaCoords::new(0.2, 0.44, -0.2);
        assert!(bds_condition(Mode::Local, &b).unwrap());
        let b = BetaCoords::new(0.2, 0.43, -0.2);
        assert!(!bds_condition(Mode::Local, &b).unwrap());

        assert!(bds_condition(Mode::Nonlocal, &BetaCoords::new(0.2, -0.04, 0.2)).unwrap());
        assert!(!bds_condition(Mode::Nonlocal, &BetaCoords::new(0.2, -0.03, 0.2)).unwrap());
        assert!(!bds_condition(Mode::Nonlocal, &BetaCoords::new(0.2, 0.23, 0.2)).unwrap());
        assert!(bds_condition(Mode::Nonlocal, &BetaCoords::new(0.2, 0.24, 0.2)).unwrap());

        for mode in Mode::BOTH {
            assert!(!bds_condition(mode, &BetaCoords::new(0.0, 0.0, 0.0)).unwrap());
            assert!(matches!(
                bds_condition(mode, &BetaCoords::new(0.2, 0.5, -0.2)),
                Err(Error::OutsideTetrahedron(..))
            ));
        }
    }

    #[test]
    fn table_root_values() {
        let r = beta2_ranges(Mode::Local, 0.2, -0.2);
        assert_eq!(r.intervals.len(), 1);
        let i = r.intervals[0];
        assert!((i.lower - (-0.2 + 3.0 * SQRT_2 / 4.0) / 2.0).abs() < 1e-15);
        assert!((i.lower - 0.4303).abs() < 1e-4);
        assert!((i.upper - 0.7 / SQRT_2).abs() < 1e-15);
        assert!(i.lower_open && !i.upper_open);

        let r = beta2_ranges(Mode::Nonlocal, 0.2, 0.2);
        assert_eq!(r.intervals.len(), 2);
        assert!((r.intervals[0].upper + 0.0357).abs() < 1e-4);
        assert!((r.intervals[1].lower - 0.2357).abs() < 1e-4);
    }

    #[test]
    fn two_interval_and_empty_ranges() {
        let r = beta2_ranges(Mode::Local, 0.3, 0.05);
        assert_eq!(r.intervals.len(), 2);
        let r = beta2_ranges(Mode::Nonlocal, -0.2, -0.1);
        assert_eq!(r.intervals.len(), 1);
        assert!(beta2_ranges(Mode::Local, 0.0, 0.0).intervals.is_empty());
        // beta3 outside the slice
        assert!(beta2_ranges(Mode::Local, 0.45, 0.2).intervals.is_empty());
        assert!(beta2_ranges(Mode::Local, -0.7, 0.0).intervals.is_empty());
    }

    #[test]
    fn large_beta3_makes_whole_slice_broadcast() {
        // |b3| > sqrt2/3 means the non-local inequality always holds
        let r = beta2_ranges(Mode::Nonlocal, -0.3, 0.5);
        assert_eq!(r.intervals.len(), 1);
        let i = r.intervals[0];
        assert!(!i.lower_open && !i.upper_open);
        assert!((i.upper - 0.2 / SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn ranges_agree_with_condition() {
        for mode in Mode::BOTH {
            for &(b1, b3) in &[(0.3, 0.05), (0.1, -0.2), (-0.1, 0.1), (0.2, 0.2), (0.4, 0.05)] {
                let r = beta2_ranges(mode, b1, b3);
                let (lo, hi) = tetrahedron_slice(b1, b3).unwrap();
                for k in 0..=400 {
                    let b2 = lo + (hi - lo) * k as f64 / 400.0;
                    let b = BetaCoords::new(b1, b2, b3);
                    if !in_tetrahedron(&b) {
                        continue;
                    }
                    assert_eq!(r.contains(b2), bds_condition(mode, &b).unwrap(), "{mode} {b:?}");
                }
            }
        }
    }

    #[test]
    fn crosscheck_disagrees_off_axis() {
        let c = bds_crosscheck(Mode::Nonlocal, &BetaCoords::new(0.3, 0.0, 0.0)).unwrap();
        assert_eq!(c.printed_cross_pair, 0.0);
        assert!((c.computed_cross_pair - 0.6 * 0.6).abs() < 1e-14);
        assert!(!c.agree);
        // same-side pairs agree in both routes
        assert!((c.printed_same_side_pair - c.computed_same_side_pair).abs() < 1e-14);
    }

    #[test]
    fn region_grid_rejects_bad_resolution() {
        for res in [0.0, -0.01, 0.2, f64::NAN] {
            assert!(matches!(region_grid(Mode::Local, res), Err(Error::Resolution(_))));
        }
    }

    #[test]
    fn region_grid_small() {
        let g = region_grid(Mode::Nonlocal, 0.1).unwrap();
        let s = *g.summary();
        assert_eq!(g.axis().len(), 15);
        assert_eq!(s.grid_points, 15 * 15 * 15);
        let recs: Vec<_> = g.records().collect();
        assert_eq!(recs.len(), s.grid_points);
        assert_eq!(recs.iter().filter(|r| r.in_tetrahedron).count(), s.tetrahedron_points);
        assert_eq!(recs.iter().filter(|r| r.broadcastable).count(), s.broadcastable_points);
        for r in &recs {
            if r.broadcastable {
                let h = r.hue.unwrap();
                assert!((0.0..=1.0).contains(&h));
                assert!(bds_condition(Mode::Nonlocal, &BetaCoords::new(r.beta1, r.beta2, r.beta3)).unwrap());
            } else {
                assert!(r.hue.is_none());
            }
        }
        let slab: Vec<_> = (0..15).flat_map(|i| g.slab(i)).collect();
        assert_eq!(slab, recs);
    }

    #[test]
    fn no_gain_small_batches() {
        let r = verify_no_gain(200, Mode::Nonlocal, None, 5).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.max_scaling_deviation <= 1e-12);
        let r = verify_no_gain(200, Mode::Local, None, 5).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.max_ratio < 1.0);
        assert!(matches!(verify_no_gain(0, Mode::Local, None, 5), Err(Error::SampleCount)));
        assert!(verify_no_gain(10, Mode::Nonlocal, Some(0.3), 5).is_err());
    }
}
