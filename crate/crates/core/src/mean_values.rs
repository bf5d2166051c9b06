//! Empirical means (1/N)·Σ_{n ≤ N} f(n) next to the limits they should
//! approach, and exact one-period averages for periodic summands.
//!
//! Every empirical sum runs through [`crate::sum::block_sum`] over the ten
//! checkpoint intervals (0, N/10], (N/10, 2N/10], …, so results do not depend
//! on the thread count.

use std::ops::Range;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ramanujan::{gcd, CqEvaluator};
use crate::sieve::{SegmentedLambdaStream, SieveTables};
use crate::singular::{
    check_conjecture_d, conjecture_d_constant, pair_constant, tuple_constant, SingularConstant,
    TupleSpec, DEFAULT_PRIME_BOUND,
};
use crate::sum::{block_sum, CompensatedSum, DEFAULT_BLOCK};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    #[serde(rename = "N")]
    pub n: u64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanValueReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub empirical: f64,
    pub predicted: Option<f64>,
    pub abs_gap: Option<f64>,
    /// `abs_gap / |predicted|`; absent when the prediction is 0 or missing.
    pub rel_gap: Option<f64>,
    pub trace: Vec<TracePoint>,
}

impl MeanValueReport {
    pub fn from_trace(trace: Vec<TracePoint>, predicted: Option<f64>) -> Self {
        let last = *trace.last().expect("trace has at least one checkpoint");
        let abs_gap = predicted.map(|p| (last.mean - p).abs());
        let rel_gap = predicted
            .filter(|&p| p != 0.0)
            .map(|p| (last.mean - p).abs() / p.abs());
        Self {
            n: last.n,
            empirical: last.mean,
            predicted,
            abs_gap,
            rel_gap,
            trace,
        }
    }
}

/// A rational number in lowest terms, denominator positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExactRational {
    pub numerator: i64,
    pub denominator: i64,
}

impl ExactRational {
    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    pub fn is_integer(self, value: i64) -> bool {
        self.denominator == 1 && self.numerator == value
    }
}

impl From<Ratio<i64>> for ExactRational {
    fn from(r: Ratio<i64>) -> Self {
        Self {
            numerator: *r.numer(),
            denominator: *r.denom(),
        }
    }
}

/// Which von Mangoldt weight multiplies the summands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Weights {
    Lambda,
    #[default]
    Lambda1,
}

impl Weights {
    fn slice(self, tables: &SieveTables) -> &[f64] {
        match self {
            Weights::Lambda => tables.lambda_slice(),
            Weights::Lambda1 => tables.lambda1_slice(),
        }
    }
}

fn checkpoints(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=10).map(|i| i * n / 10).filter(|&c| c > 0).collect();
    out.dedup();
    out
}

/// Mean of `f` over `1..=n` with ten checkpoints.
fn traced_mean<F>(n: u64, f: F) -> Vec<TracePoint>
where
    F: Fn(usize) -> f64 + Sync,
{
    let mut total = CompensatedSum::new();
    let mut prev = 0u64;
    let mut trace = Vec::new();
    for c in checkpoints(n) {
        total.add(block_sum(
            prev as usize + 1..c as usize + 1,
            DEFAULT_BLOCK,
            &f,
        ));
        trace.push(TracePoint {
            n: c,
            mean: total.value() / c as f64,
        });
        prev = c;
    }
    trace
}

fn require_positive(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        Err(Error::invalid(format!("{name} must be positive")))
    } else {
        Ok(())
    }
}

fn require_cover(tables: &SieveTables, needed: u64, what: &str) -> Result<()> {
    if needed > tables.bound() as u64 {
        Err(Error::invalid(format!(
            "{what} needs sieve values up to {needed}, tables stop at {}",
            tables.bound()
        )))
    } else {
        Ok(())
    }
}

fn require_q(eval: &CqEvaluator<'_>, q: u64) -> Result<()> {
    require_positive("q", q)?;
    if q > eval.max_q() {
        Err(Error::invalid(format!(
            "q={q} exceeds sieve bound {}",
            eval.max_q()
        )))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicMeanReport {
    pub report: MeanValueReport,
    /// Exact average over one full period of the summand.
    pub exact_period_mean: ExactRational,
    pub period: u64,
}

impl PeriodicMeanReport {
    /// max|summand|·period/N bound on |empirical − exact|.
    pub fn partial_period_bound(&self, max_abs_summand: f64) -> f64 {
        max_abs_summand * self.period as f64 / self.report.n as f64
    }
}

/// (1/N)·Σ c_q(n) with limit [q = 1], plus the exact period mean.
pub fn cq_mean(eval: &CqEvaluator<'_>, q: u64, n: u64) -> Result<PeriodicMeanReport> {
    require_q(eval, q)?;
    require_positive("N", n)?;
    let period_sum: i64 = (1..=q as i64).map(|k| eval.cq_unchecked(q, k)).sum();
    let exact = Ratio::new(period_sum, q as i64);
    let trace = traced_mean(n, |k| eval.cq_unchecked(q, k as i64) as f64);
    let predicted = if q == 1 { 1.0 } else { 0.0 };
    Ok(PeriodicMeanReport {
        report: MeanValueReport::from_trace(trace, Some(predicted)),
        exact_period_mean: exact.into(),
        period: q,
    })
}

/// (1/N)·Σ c_r(n)·c_s(n+m), whose limit is c_r(m) when r = s and 0 otherwise.
pub fn cq_orthogonality(
    eval: &CqEvaluator<'_>,
    r: u64,
    s: u64,
    m: i64,
    n: u64,
) -> Result<PeriodicMeanReport> {
    require_q(eval, r)?;
    require_q(eval, s)?;
    require_positive("N", n)?;
    let period = r / gcd(r, s) * s;
    let term = |k: i64| eval.cq_unchecked(r, k) * eval.cq_unchecked(s, k + m);
    let period_sum: i64 = (1..=period as i64).map(term).sum();
    let exact = Ratio::new(period_sum, period as i64);
    let predicted = if r == s {
        eval.cq_unchecked(r, m) as f64
    } else {
        0.0
    };
    let trace = traced_mean(n, |k| term(k as i64) as f64);
    Ok(PeriodicMeanReport {
        report: MeanValueReport::from_trace(trace, Some(predicted)),
        exact_period_mean: exact.into(),
        period,
    })
}

/// Closed-form limit of [`cq_orthogonality`]: c_r(m)·[r = s].
pub fn orthogonality_limit(eval: &CqEvaluator<'_>, r: u64, s: u64, m: i64) -> Result<i64> {
    require_q(eval, r)?;
    require_q(eval, s)?;
    Ok(if r == s { eval.cq_unchecked(r, m) } else { 0 })
}

fn shifted_correlation(tables: &SieveTables, h: u64, n: u64, weights: Weights) -> Vec<TracePoint> {
    let w = weights.slice(tables);
    let h = h as usize;
    traced_mean(n, |k| w[k] * w[k + h])
}

/// (1/N)·Σ w(n)·w(n+h) for an even gap, predicted 2C₂·Π_{p | h, p>2}(p−1)/(p−2).
/// Odd gaps are handed to [`odd_gap_mean`].
pub fn pair_autocorrelation(
    tables: &SieveTables,
    h: u64,
    n: u64,
    weights: Weights,
) -> Result<MeanValueReport> {
    require_positive("gap", h)?;
    if h % 2 == 1 {
        return odd_gap_mean(tables, h, n, weights);
    }
    require_positive("N", n)?;
    require_cover(tables, n + h, "pair autocorrelation")?;
    let predicted = pair_constant(h, DEFAULT_PRIME_BOUND)?.value;
    Ok(MeanValueReport::from_trace(
        shifted_correlation(tables, h, n, weights),
        Some(predicted),
    ))
}

/// (1/N)·Σ w(n)·w(n+h) for odd h, predicted 0.
pub fn odd_gap_mean(
    tables: &SieveTables,
    h: u64,
    n: u64,
    weights: Weights,
) -> Result<MeanValueReport> {
    if h % 2 == 0 {
        return Err(Error::invalid(format!(
            "odd_gap_mean needs an odd gap, got {h}"
        )));
    }
    require_positive("N", n)?;
    require_cover(tables, n + h, "odd gap mean")?;
    Ok(MeanValueReport::from_trace(
        shifted_correlation(tables, h, n, weights),
        Some(0.0),
    ))
}

/// (1/N)·Σ_{n ≤ N, a | bn+ℓ} w(n)·w((bn+ℓ)/a), predicted
/// (2C₂/a)·Π(p−1)/(p−2) over odd primes dividing a, b or ℓ.
pub fn conjecture_d_mean(
    tables: &SieveTables,
    a: u64,
    b: u64,
    l: u64,
    n: u64,
    weights: Weights,
) -> Result<MeanValueReport> {
    check_conjecture_d(a, b, l)?;
    require_positive("N", n)?;
    require_cover(tables, (b * n + l) / a, "conjecture D mean")?;
    let predicted = conjecture_d_constant(a, b, l, DEFAULT_PRIME_BOUND)?.value;
    let w = weights.slice(tables);
    let (a, b, l) = (a as usize, b as usize, l as usize);
    let trace = traced_mean(n, |k| {
        let m = b * k + l;
        if m % a == 0 {
            w[k] * w[m / a]
        } else {
            0.0
        }
    });
    Ok(MeanValueReport::from_trace(trace, Some(predicted)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TupleMeanReport {
    pub offsets: Vec<u64>,
    /// Λ(n)Λ(n+a₁)…Λ(n+a_m).
    pub lambda: MeanValueReport,
    /// Λ₁(n)Λ₁(n+a₁)…Λ₁(n+a_m).
    pub lambda1: MeanValueReport,
    pub constant: SingularConstant,
}

/// Mean of the weighted constellation product under both weights,
/// against Π_p (p/(p−1))^m·(p−ν)/(p−1).
pub fn tuple_mean(tables: &SieveTables, spec: &TupleSpec, n: u64) -> Result<TupleMeanReport> {
    spec.require_admissible()?;
    require_positive("N", n)?;
    require_cover(tables, n + spec.max_offset(), "tuple mean")?;
    let constant = tuple_constant(spec, DEFAULT_PRIME_BOUND)?;
    let offsets: Vec<usize> = spec.offsets().iter().map(|&o| o as usize).collect();
    let run = |weights: Weights| {
        let w = weights.slice(tables);
        let trace = traced_mean(n, |k| offsets.iter().map(|&o| w[k + o]).product());
        MeanValueReport::from_trace(trace, Some(constant.value))
    };
    Ok(TupleMeanReport {
        offsets: spec.offsets().to_vec(),
        lambda: run(Weights::Lambda),
        lambda1: run(Weights::Lambda1),
        constant,
    })
}

/// (1/N)·Σ Λ₁(n), predicted 1.
pub fn pnt_mean(tables: &SieveTables, n: u64) -> Result<MeanValueReport> {
    require_positive("N", n)?;
    require_cover(tables, n, "PNT mean")?;
    let w = tables.lambda1_slice();
    Ok(MeanValueReport::from_trace(
        traced_mean(n, |k| w[k]),
        Some(1.0),
    ))
}

/// [`pnt_mean`] from a [`SegmentedLambdaStream`], for N past the table
/// budget. Segments are evaluated in parallel and reduced in ascending
/// order.
pub fn pnt_mean_streamed(n: u64, segment_size: usize) -> Result<MeanValueReport> {
    require_positive("N", n)?;
    let stream = SegmentedLambdaStream::new(n as usize, segment_size)?;
    let marks = checkpoints(n);
    let interval_of = |k: u64| marks.partition_point(|&c| c < k);
    let per_segment: Vec<Vec<(usize, f64)>> = (0..stream.segment_count())
        .into_par_iter()
        .map(|i| {
            let seg = stream.segment(i).expect("index below segment count");
            let mut parts: Vec<(usize, CompensatedSum)> = Vec::new();
            for (j, &v) in seg.values.iter().enumerate() {
                let idx = interval_of((seg.start + j) as u64);
                match parts.last_mut() {
                    Some((last, acc)) if *last == idx => acc.add(v),
                    _ => {
                        let mut acc = CompensatedSum::new();
                        acc.add(v);
                        parts.push((idx, acc));
                    }
                }
            }
            parts.into_iter().map(|(i, acc)| (i, acc.value())).collect()
        })
        .collect();
    let mut interval_sums = vec![CompensatedSum::new(); marks.len()];
    for (idx, v) in per_segment.into_iter().flatten() {
        interval_sums[idx].add(v);
    }
    let mut total = CompensatedSum::new();
    let trace = marks
        .iter()
        .zip(interval_sums)
        .map(|(&c, s)| {
            total.add(s.value());
            TracePoint {
                n: c,
                mean: total.value() / c as f64,
            }
        })
        .collect();
    Ok(MeanValueReport::from_trace(trace, Some(1.0)))
}

/// f(n) mod q for a polynomial with coefficients in ascending degree.
pub fn poly_mod(poly: &[i64], n: i64, q: u64) -> i64 {
    let q = q as i128;
    let x = (n as i128).rem_euclid(q);
    poly.iter()
        .rev()
        .fold(0i128, |acc, &c| (acc * x + c as i128).rem_euclid(q)) as i64
}

/// (1/N)·Σ c_q(f(n)) for `poly` = [c₀, c₁, …] meaning c₀ + c₁n + c₂n² + ….
/// The limit is the exact period mean (1/q)·Σ_{r=0}^{q−1} c_q(f(r)).
pub fn polynomial_cq_mean(
    eval: &CqEvaluator<'_>,
    q: u64,
    poly: &[i64],
    n: u64,
) -> Result<PeriodicMeanReport> {
    require_q(eval, q)?;
    require_positive("N", n)?;
    if poly.is_empty() {
        return Err(Error::invalid("polynomial needs at least one coefficient"));
    }
    let period_sum: i64 = (0..q as i64)
        .map(|r| eval.cq_unchecked(q, poly_mod(poly, r, q)))
        .sum();
    let exact = Ratio::new(period_sum, q as i64);
    let trace = traced_mean(n, |k| {
        eval.cq_unchecked(q, poly_mod(poly, k as i64, q)) as f64
    });
    let exact: ExactRational = exact.into();
    Ok(PeriodicMeanReport {
        report: MeanValueReport::from_trace(trace, Some(exact.to_f64())),
        exact_period_mean: exact,
        period: q,
    })
}

/// Σ_{n=1}^{2N} c_{q1}(n)·c_{q2}(2N − n), exactly.
pub fn goldbach_correlation(eval: &CqEvaluator<'_>, n: u64, q1: u64, q2: u64) -> Result<i128> {
    require_positive("N", n)?;
    require_q(eval, q1)?;
    require_q(eval, q2)?;
    let two_n = 2 * n as i64;
    let range: Range<i64> = 1..two_n + 1;
    Ok(range
        .into_par_iter()
        .map(|k| eval.cq_unchecked(q1, k) as i128 * eval.cq_unchecked(q2, two_n - k) as i128)
        .sum())
}
