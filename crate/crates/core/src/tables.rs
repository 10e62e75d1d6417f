//! Published broadcasting ranges for Bell-diagonal states, kept verbatim as
//! a regression fixture for [`crate::broadcast::beta2_ranges`].

use serde::Serialize;

use crate::broadcast::{beta2_ranges, Beta2Range, Interval};
use crate::cloning::Mode;

/// One beta2 interval as printed: `lower (<|<=) beta2 (<|<=) upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PublishedRow {
    pub beta1: f64,
    pub beta3: f64,
    pub intervals: Vec<PublishedInterval>,
}

/// `[lo, hi)`
const fn closed_open(lower: f64, upper: f64) -> PublishedInterval {
    PublishedInterval {
        lower,
        upper,
        lower_open: false,
        upper_open: true,
    }
}

/// `(lo, hi]`
const fn open_closed(lower: f64, upper: f64) -> PublishedInterval {
    PublishedInterval {
        lower,
        upper,
        lower_open: true,
        upper_open: false,
    }
}

fn row(beta1: f64, beta3: f64, intervals: &[PublishedInterval]) -> PublishedRow {
    PublishedRow {
        beta1,
        beta3,
        intervals: intervals.to_vec(),
    }
}

/// Local state-independent cloning (lambda = 1/6), 11 rows.
pub fn published_local() -> Vec<PublishedRow> {
    vec![
        row(0.15, -0.2, &[open_closed(0.430, 0.460)]),
        row(0.15, -0.15, &[open_closed(0.455, 0.460)]),
        row(0.2, 0.2, &[closed_open(-0.495, -0.430)]),
        row(0.2, 0.15, &[closed_open(-0.495, -0.455)]),
        row(0.2, 0.1, &[closed_open(-0.495, -0.480)]),
        row(0.2, -0.1, &[open_closed(0.480, 0.495)]),
        row(0.2, -0.2, &[open_closed(0.430, 0.495)]),
        row(0.3, 0.05, &[closed_open(-0.566, -0.505), open_closed(0.555, 0.566)]),
        row(0.3, 0.1, &[closed_open(-0.566, -0.480)]),
        row(0.3, -0.1, &[open_closed(0.48033, 0.566)]),
        row(0.4, 0.05, &[closed_open(-0.636, -0.505), open_closed(0.555, 0.636)]),
    ]
}

/// Non-local state-independent cloning (lambda = 1/10), 16 rows.
pub fn published_nonlocal() -> Vec<PublishedRow> {
    vec![
        row(-0.2, -0.2, &[open_closed(0.036, 0.212)]),
        row(-0.2, -0.1, &[open_closed(0.136, 0.212)]),
        row(-0.2, 0.1, &[closed_open(-0.212, -0.136)]),
        row(-0.2, 0.2, &[closed_open(-0.212, -0.036)]),
        row(-0.1, -0.2, &[closed_open(-0.283, -0.236), open_closed(0.036, 0.283)]),
        row(-0.1, -0.1, &[closed_open(-0.283, -0.236), open_closed(0.136, 0.283)]),
        row(-0.1, 0.1, &[closed_open(-0.283, -0.136), open_closed(0.236, 0.283)]),
        row(-0.1, 0.2, &[closed_open(-0.283, -0.036), open_closed(0.236, 0.283)]),
        row(0.1, -0.2, &[closed_open(-0.424, -0.236), open_closed(0.036, 0.424)]),
        row(0.1, -0.1, &[closed_open(-0.424, -0.236), open_closed(0.136, 0.424)]),
        row(0.1, 0.1, &[closed_open(-0.424, -0.136), open_closed(0.236, 0.424)]),
        row(0.1, 0.2, &[closed_open(-0.424, -0.036), open_closed(0.236, 0.424)]),
        row(0.2, -0.2, &[closed_open(-0.495, -0.236), open_closed(0.036, 0.495)]),
        row(0.2, -0.1, &[closed_open(-0.495, -0.236), open_closed(0.136, 0.495)]),
        row(0.2, 0.1, &[closed_open(-0.495, -0.136), open_closed(0.236, 0.495)]),
        row(0.2, 0.2, &[closed_open(-0.495, -0.036), open_closed(0.236, 0.495)]),
    ]
}

pub fn published(mode: Mode) -> Vec<PublishedRow> {
    match mode {
        Mode::Local => published_local(),
        Mode::Nonlocal => published_nonlocal(),
    }
}

/// Round to 3 decimals, halves away from zero.
pub fn round3(x: f64) -> f64 {
    let r = (x * 1000.0).round() / 1000.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn interval_matches(computed: &Interval, published: &PublishedInterval) -> bool {
    round3(computed.lower) == round3(published.lower)
        && round3(computed.upper) == round3(published.upper)
        && computed.lower_open == published.lower_open
        && computed.upper_open == published.upper_open
}

#[derive(Debug, Clone, Serialize)]
pub struct RowComparison {
    pub mode: Mode,
    pub published: PublishedRow,
    pub computed: Beta2Range,
    pub matches: bool,
}

pub fn compare_row(mode: Mode, published: &PublishedRow) -> RowComparison {
    let computed = beta2_ranges(mode, published.beta1, published.beta3);
    let matches = computed.intervals.len() == published.intervals.len()
        && computed
            .intervals
            .iter()
            .zip(&published.intervals)
            .all(|(c, p)| interval_matches(c, p));
    RowComparison {
        mode,
        published: published.clone(),
        computed,
        matches,
    }
}

pub fn compare_table(mode: Mode) -> Vec<RowComparison> {
    published(mode).iter().map(|r| compare_row(mode, r)).collect()
}
