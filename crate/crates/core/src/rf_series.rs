//! Ramanujan expansion power series for Λ₁ and the classical
//! Ramanujan–Fourier expansions of σ, d and the circle-lattice count.
//!
//! Λ₁(z, x) = Σ_q (μ(q)/φ(q))·c_q(x)·z^q converges absolutely for 0 < z < 1
//! because |c_q(x)| ≤ φ(q), so truncating after Q terms leaves at most
//! z^Q·z/(1−z). Everything here works with such truncations; the z → 1⁻
//! limit is only ever observed through an [`AbelTrace`].

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ramanujan::{cq_real, CqEvaluator};
use crate::sum::{block_sum, CompensatedSum};

/// Largest truncation [`required_q`] will return.
pub const MAX_TRUNCATION: u64 = u32::MAX as u64;

/// Default Abel ladder.
pub const DEFAULT_LADDER: [f64; 3] = [0.9, 0.99, 0.999];
pub const DEFAULT_LADDER_EPSILON: f64 = 1e-8;

const Q_BLOCK: usize = 4096;

/// Truncation parameters for the power series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesParams {
    pub z: f64,
    pub truncation: u64,
    pub epsilon: f64,
}

impl SeriesParams {
    /// Fixed truncation. `epsilon` records the bound the truncation achieves.
    pub fn new(z: f64, truncation: u64) -> Result<Self> {
        check_z(z)?;
        if truncation == 0 {
            return Err(Error::invalid("truncation Q must be at least 1"));
        }
        Ok(Self {
            z,
            truncation,
            epsilon: tail_bound(z, truncation),
        })
    }

    /// Smallest truncation whose tail bound is below `epsilon`.
    pub fn for_tolerance(z: f64, epsilon: f64) -> Result<Self> {
        let truncation = required_q(z, epsilon)?;
        Ok(Self {
            z,
            truncation,
            epsilon,
        })
    }

    pub fn tail_bound(&self) -> f64 {
        tail_bound(self.z, self.truncation)
    }
}

fn check_z(z: f64) -> Result<()> {
    if z > 0.0 && z < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "z={z} is outside the open interval (0, 1)"
        )))
    }
}

/// z^Q · z/(1−z): bound on the series remainder after Q terms.
pub fn tail_bound(z: f64, q: u64) -> f64 {
    z.powf(q as f64) * z / (1.0 - z)
}

/// Smallest Q ≥ 1 with z^Q·z/(1−z) < ε. Depends on (z, ε) only.
pub fn required_q(z: f64, epsilon: f64) -> Result<u64> {
    check_z(z)?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!(
            "epsilon={epsilon} must be positive and finite"
        )));
    }
    let estimate = ((epsilon * (1.0 - z) / z).ln() / z.ln()).ceil();
    if !estimate.is_finite() || estimate > MAX_TRUNCATION as f64 {
        return Err(Error::ResourceLimit {
            what: format!("truncation for z={z}, epsilon={epsilon}"),
            budget: format!("Q <= {MAX_TRUNCATION}"),
        });
    }
    let mut q = (estimate as u64).max(1);
    while tail_bound(z, q) >= epsilon {
        q += 1;
    }
    while q > 1 && tail_bound(z, q - 1) < epsilon {
        q -= 1;
    }
    Ok(q)
}

fn integral_argument(x: f64) -> Option<i64> {
    (x.fract() == 0.0 && x.abs() < 9.0e15).then_some(x as i64)
}

fn series_term(eval: &CqEvaluator<'_>, q: u64, x: f64, int_x: Option<i64>, z: f64) -> f64 {
    let t = eval.tables();
    let mu = t.mu(q as usize);
    if mu == 0 {
        return 0.0;
    }
    let cq = match int_x {
        Some(n) => eval.cq_unchecked(q, n) as f64,
        None => cq_real(q, x),
    };
    mu as f64 / t.phi(q as usize) as f64 * cq * z.powf(q as f64)
}

fn check_coverage(eval: &CqEvaluator<'_>, q: u64) -> Result<()> {
    if q > eval.max_q() {
        Err(Error::invalid(format!(
            "truncation Q={q} exceeds sieve bound {}",
            eval.max_q()
        )))
    } else {
        Ok(())
    }
}

/// Partial sum Λ₁(Q, z, x) in ascending q with compensated block reduction.
/// Integer `x` uses the exact c_q(n); other `x` the cosine definition.
pub fn lambda1_series(eval: &CqEvaluator<'_>, params: &SeriesParams, x: f64) -> Result<f64> {
    check_z(params.z)?;
    check_coverage(eval, params.truncation)?;
    let int_x = integral_argument(x);
    let z = params.z;
    Ok(block_sum(1..params.truncation as usize + 1, Q_BLOCK, |q| {
        series_term(eval, q as u64, x, int_x, z)
    }))
}

/// Σ_{q ≤ Q} |(μ(q)/φ(q))·c_q(x)·z^q|, bounded by z/(1−z).
pub fn lambda1_series_abs(eval: &CqEvaluator<'_>, params: &SeriesParams, x: f64) -> Result<f64> {
    check_z(params.z)?;
    check_coverage(eval, params.truncation)?;
    let int_x = integral_argument(x);
    let z = params.z;
    Ok(block_sum(1..params.truncation as usize + 1, Q_BLOCK, |q| {
        series_term(eval, q as u64, x, int_x, z).abs()
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbelStep {
    pub z: f64,
    pub q_used: u64,
    pub value: f64,
}

/// Λ₁(Q_z(ε), z, x) along an increasing ladder of z.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbelTrace {
    pub x: f64,
    pub epsilon: f64,
    pub ladder: Vec<AbelStep>,
    /// Λ₁(x) when x is a positive integer inside the tables.
    pub target: Option<f64>,
}

impl AbelTrace {
    pub fn gaps(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.ladder
            .iter()
            .map(|s| self.target.map(|t| (s.value - t).abs()))
    }
}

/// Evaluates the truncated series at each z, choosing Q from ε per step.
/// Reports values only; no convergence is asserted.
pub fn abel_ladder(
    eval: &CqEvaluator<'_>,
    x: f64,
    z_list: &[f64],
    epsilon: f64,
) -> Result<AbelTrace> {
    if z_list.is_empty() {
        return Err(Error::invalid("abel ladder needs at least one z"));
    }
    if z_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("z ladder must be strictly increasing"));
    }
    let mut ladder = Vec::with_capacity(z_list.len());
    for &z in z_list {
        let params = SeriesParams::for_tolerance(z, epsilon)?;
        let value = lambda1_series(eval, &params, x)?;
        ladder.push(AbelStep {
            z,
            q_used: params.truncation,
            value,
        });
    }
    let target = integral_argument(x)
        .filter(|&n| n >= 1 && n as u64 <= eval.max_q())
        .map(|n| eval.tables().lambda1(n as usize));
    Ok(AbelTrace {
        x,
        epsilon,
        ladder,
        target,
    })
}

/// A truncated expansion Σ_{q ≤ Q} a_q c_q(n) next to the value it expands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RfDiagnostic {
    pub function: &'static str,
    pub argument: u64,
    pub truncation: u64,
    pub value: f64,
    pub reference: f64,
    /// (q, partial sum) at ten evenly spaced truncations.
    pub trace: Vec<(u64, f64)>,
}

fn checkpoints(total: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=10)
        .map(|i| i * total / 10)
        .filter(|&c| c > 0)
        .collect();
    out.dedup();
    out
}

pub(crate) fn traced_sum(total: u64, mut term: impl FnMut(u64) -> f64) -> (f64, Vec<(u64, f64)>) {
    let marks = checkpoints(total);
    let mut acc = CompensatedSum::new();
    let mut trace = Vec::with_capacity(marks.len());
    let mut next = marks.iter().peekable();
    for q in 1..=total {
        acc.add(term(q));
        if next.peek() == Some(&&q) {
            trace.push((q, acc.value()));
            next.next();
        }
    }
    (acc.value(), trace)
}

/// σ(n) ≈ (π²n/6)·Σ_{q ≤ Q} c_q(n)/q².
pub fn sigma_rf(eval: &CqEvaluator<'_>, n: u64, q: u64) -> Result<RfDiagnostic> {
    if n == 0 || q == 0 {
        return Err(Error::invalid("sigma expansion needs n >= 1 and Q >= 1"));
    }
    check_coverage(eval, q.max(n))?;
    let scale = PI * PI * n as f64 / 6.0;
    let (sum, trace) = traced_sum(q, |k| {
        eval.cq_unchecked(k, n as i64) as f64 / (k * k) as f64
    });
    Ok(RfDiagnostic {
        function: "sigma",
        argument: n,
        truncation: q,
        value: scale * sum,
        reference: eval.tables().sigma(n as usize)? as f64,
        trace: trace.into_iter().map(|(k, s)| (k, scale * s)).collect(),
    })
}

/// Tail bound (π²n/6)·σ(n)/Q for [`sigma_rf`].
pub fn sigma_rf_tail_bound(eval: &CqEvaluator<'_>, n: u64, q: u64) -> Result<f64> {
    let sigma = eval.tables().sigma(n as usize)? as f64;
    Ok(PI * PI * n as f64 / 6.0 * sigma / q as f64)
}

/// d(n) ≈ −Σ_{q ≤ Q} (log q / q)·c_q(n). Conditionally convergent; the
/// trace is for inspection only.
pub fn divisor_rf(eval: &CqEvaluator<'_>, n: u64, q: u64) -> Result<RfDiagnostic> {
    if n == 0 || q == 0 {
        return Err(Error::invalid("divisor expansion needs n >= 1 and Q >= 1"));
    }
    check_coverage(eval, q.max(n))?;
    let (value, trace) = traced_sum(q, |k| {
        -(k as f64).ln() / k as f64 * eval.cq_unchecked(k, n as i64) as f64
    });
    Ok(RfDiagnostic {
        function: "divisor",
        argument: n,
        truncation: q,
        value,
        reference: eval.tables().divisor_count(n as usize)? as f64,
        trace,
    })
}

/// #{(u, v) ∈ ℤ² : u² + v² ≤ a}.
pub fn lattice_points_in_disk(a: u64) -> u64 {
    let r = (a as f64).sqrt() as i64 + 1;
    let mut count = 0;
    for u in -r..=r {
        for v in -r..=r {
            if (u * u + v * v) as u64 <= a {
                count += 1;
            }
        }
    }
    count
}

/// #{(u, v) ∈ ℤ² : u² + v² = a}.
pub fn sum_of_two_squares_count(a: u64) -> u64 {
    let r = (a as f64).sqrt() as i64 + 1;
    let mut count = 0;
    for u in -r..=r {
        for v in -r..=r {
            if (u * u + v * v) as u64 == a {
                count += 1;
            }
        }
    }
    count
}

/// π·Σ_{q ≤ Q} ((−1)^{q−1}/(2q−1))·c_{2q−1}(a), reported against the disk
/// count [`lattice_points_in_disk`]. The partial sums actually settle on
/// [`sum_of_two_squares_count`].
pub fn circle_lattice_rf(eval: &CqEvaluator<'_>, a: u64, q: u64) -> Result<RfDiagnostic> {
    if q == 0 {
        return Err(Error::invalid("lattice expansion needs Q >= 1"));
    }
    check_coverage(eval, 2 * q - 1)?;
    let (sum, trace) = traced_sum(q, |k| {
        let m = 2 * k - 1;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign / m as f64 * eval.cq_unchecked(m, a as i64) as f64
    });
    Ok(RfDiagnostic {
        function: "circle_lattice",
        argument: a,
        truncation: q,
        value: PI * sum,
        reference: lattice_points_in_disk(a) as f64,
        trace: trace.into_iter().map(|(k, s)| (k, PI * s)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::build_sieve;

    #[test]
    fn single_term_series() {
        let t = build_sieve(100).unwrap();
        let e = CqEvaluator::new(&t);
        for z in [0.1, 0.5, 0.9] {
            let p = SeriesParams::new(z, 1).unwrap();
            assert!((lambda1_series(&e, &p, 3.0).unwrap() - z).abs() < 1e-15);
            let x = 0.3;
            let want = z * (2.0 * PI * x).cos();
            assert!((lambda1_series(&e, &p, x).unwrap() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn half_z_truncation_against_long_series() {
        let t = build_sieve(300).unwrap();
        let e = CqEvaluator::new(&t);
        let short = lambda1_series(&e, &SeriesParams::new(0.5, 60).unwrap(), 1.0).unwrap();
        let long = lambda1_series(&e, &SeriesParams::new(0.5, 200).unwrap(), 1.0).unwrap();
        assert!((short - long).abs() <= 0.5f64.powi(60));
        // at x = 1 each term is μ(q)²/φ(q)·z^q
        let mut direct = 0.0;
        for q in 1..=60usize {
            let mu = t.mu(q) as f64;
            direct += mu * mu / t.phi(q) as f64 * 0.5f64.powi(q as i32);
        }
        assert!((short - direct).abs() < 1e-14);
    }

    #[test]
    fn z_must_be_inside_unit_interval() {
        let t = build_sieve(10).unwrap();
        let e = CqEvaluator::new(&t);
        for z in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(SeriesParams::new(z, 5).is_err());
            let bogus = SeriesParams {
                z,
                truncation: 5,
                epsilon: 1.0,
            };
            assert!(lambda1_series(&e, &bogus, 1.0).is_err());
        }
    }

    #[test]
    fn truncation_beyond_tables_rejected() {
        let t = build_sieve(10).unwrap();
        let e = CqEvaluator::new(&t);
        let p = SeriesParams::new(0.5, 11).unwrap();
        assert!(lambda1_series(&e, &p, 1.0).is_err());
    }

    #[test]
    fn required_q_examples() {
        assert_eq!(required_q(0.5, 0.5).unwrap(), 2);
        let q = required_q(0.9, 1e-6).unwrap();
        assert!(0.9f64.powi(q as i32) * 9.0 < 1e-6);
        assert!(0.9f64.powi(q as i32 - 1) * 9.0 >= 1e-6);
        assert_eq!(q, 152);
        assert_eq!(required_q(0.9, 10.0).unwrap(), 1);
        assert_eq!(required_q(0.5, 10.0).unwrap(), 1);
        assert!(matches!(
            required_q(1.0 - 1e-15, 1e-300),
            Err(Error::ResourceLimit { .. })
        ));
        assert!(required_q(0.5, 0.0).is_err());
        assert!(required_q(0.5, -1.0).is_err());
    }

    #[test]
    fn tail_bound_strictly_decreasing() {
        for z in [0.1, 0.5, 0.9, 0.99, 0.999] {
            let mut prev = f64::INFINITY;
            for q in 1..=2000 {
                let b = tail_bound(z, q);
                if b == 0.0 {
                    break;
                }
                assert!(b < prev, "z={z}, q={q}");
                prev = b;
            }
        }
    }

    #[test]
    fn ladder_targets() {
        let t = build_sieve(30_000).unwrap();
        let e = CqEvaluator::new(&t);
        let tr = abel_ladder(&e, 6.0, &[0.5, 0.9], 1e-6).unwrap();
        assert_eq!(tr.target, Some(0.0));
        assert_eq!(tr.ladder.len(), 2);
        let tr = abel_ladder(&e, 2.0, &DEFAULT_LADDER, DEFAULT_LADDER_EPSILON).unwrap();
        assert!((tr.target.unwrap() - 0.3465736).abs() < 5e-8);
        for w in tr.ladder.windows(2) {
            assert!(w[0].z < w[1].z);
        }
        for s in &tr.ladder {
            assert!(tail_bound(s.z, s.q_used) <= DEFAULT_LADDER_EPSILON);
        }
        let tr = abel_ladder(&e, 9.0, &[0.9, 0.99], 1e-6).unwrap();
        assert!((tr.target.unwrap() - 0.7324082).abs() < 5e-8);
        let tr = abel_ladder(&e, 2.5, &[0.9], 1e-6).unwrap();
        assert_eq!(tr.target, None);
        assert!(abel_ladder(&e, 2.0, &[0.9, 0.5], 1e-6).is_err());
        assert!(abel_ladder(&e, 2.0, &[], 1e-6).is_err());
    }

    #[test]
    fn sigma_expansion_examples() {
        let t = build_sieve(100_000).unwrap();
        let e = CqEvaluator::new(&t);
        let one = sigma_rf(&e, 1, 1).unwrap();
        assert!((one.value - PI * PI / 6.0).abs() < 1e-15);
        let s1 = sigma_rf(&e, 1, 100_000).unwrap();
        assert!((s1.value - 1.0).abs() <= 0.01);
        let s12 = sigma_rf(&e, 12, 100_000).unwrap();
        assert_eq!(s12.reference, 28.0);
        assert!((s12.value - 28.0).abs() <= 0.05 * 28.0);
        let bound = sigma_rf_tail_bound(&e, 12, 100_000).unwrap();
        assert!((s12.value - 28.0).abs() <= bound);
        assert_eq!(s12.trace.len(), 10);
        assert_eq!(s12.trace.last().unwrap().1, s12.value);
    }

    #[test]
    fn divisor_expansion_examples() {
        let t = build_sieve(10_000).unwrap();
        let e = CqEvaluator::new(&t);
        assert_eq!(divisor_rf(&e, 1, 1).unwrap().value, 0.0);
        let two = divisor_rf(&e, 1, 2).unwrap();
        assert!((two.value - 2f64.ln() / 2.0).abs() < 1e-15);
        let six = divisor_rf(&e, 6, 10_000).unwrap();
        assert_eq!(six.reference, 4.0);
        assert_eq!(six.trace.len(), 10);
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(lattice_points_in_disk(0), 1);
        assert_eq!(lattice_points_in_disk(1), 5);
        assert_eq!(lattice_points_in_disk(25), 81);
        assert_eq!(sum_of_two_squares_count(1), 4);
        assert_eq!(sum_of_two_squares_count(25), 12);
        assert_eq!(sum_of_two_squares_count(3), 0);
    }

    #[test]
    fn lattice_expansion_examples() {
        let t = build_sieve(20_001).unwrap();
        let e = CqEvaluator::new(&t);
        let first = circle_lattice_rf(&e, 1, 1).unwrap();
        assert!((first.value - PI).abs() < 1e-15);
        assert_eq!(first.reference, 5.0);
        let zero = circle_lattice_rf(&e, 0, 3).unwrap();
        // c_m(0) = φ(m): π(1 − 2/3 + 4/5)
        assert!((zero.value - PI * (1.0 - 2.0 / 3.0 + 4.0 / 5.0)).abs() < 1e-14);
        assert_eq!(zero.reference, 1.0);
        // the partial sums head for r₂(25) = 12, not the disk count 81
        let big = circle_lattice_rf(&e, 25, 10_000).unwrap();
        assert_eq!(big.reference, 81.0);
        assert!((big.value - 12.0).abs() < 0.5, "{}", big.value);
    }
}
