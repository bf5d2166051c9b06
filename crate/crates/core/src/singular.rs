//! Hardy–Littlewood constants as truncated Euler products.
//!
//! Products are accumulated as compensated sums of logarithms over all primes
//! up to a bound P. Tail estimates bound the log-contribution of the omitted
//! primes p > P using Σ_{p>P} 1/(p−1)² ≤ Σ_{k≥P} 1/k² ≤ 1/(P−1).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ramanujan::gcd;
use crate::rf_series::traced_sum;
use crate::sieve::{primes_up_to, SieveTables};
use crate::sum::block_sum;

/// Prime bound used when a mean-value routine needs a predicted constant.
pub const DEFAULT_PRIME_BOUND: u64 = 1_000_000;

/// Commonly quoted ten-digit value of the twin-prime constant.
pub const TWIN_PRIME_CONSTANT: f64 = 0.660_161_815_8;

const PRIME_BLOCK: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstantForm {
    C2,
    Pair {
        gap: u64,
    },
    ConjectureD {
        a: u64,
        b: u64,
        l: u64,
    },
    Tuple {
        offsets: Vec<u64>,
    },
    /// Product form of Σ_q μ(q)/φ(q)·c_q(h).
    Series {
        h: u64,
    },
    /// Product form of Σ_q μ(q)²/φ(q)²·c_q(h).
    SeriesWk {
        h: u64,
    },
}

impl ConstantForm {
    pub fn label(&self) -> String {
        match self {
            ConstantForm::C2 => "C2".into(),
            ConstantForm::Pair { gap } => format!("pair({gap})"),
            ConstantForm::ConjectureD { a, b, l } => format!("conjd({a};{b};{l})"),
            ConstantForm::Tuple { offsets } => {
                let o: Vec<String> = offsets.iter().map(u64::to_string).collect();
                format!("tuple({})", o.join(";"))
            }
            ConstantForm::Series { h } => format!("series({h})"),
            ConstantForm::SeriesWk { h } => format!("series_wk({h})"),
        }
    }
}

/// A truncated Euler product with a bound on what truncation left out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularConstant {
    pub value: f64,
    /// Largest prime included in the product.
    pub truncation_prime: u64,
    /// Bound on |log(full product) − log(truncated product)|. `None` when
    /// the omitted factors admit no such bound (the product diverges or the
    /// prime bound is too small for the estimate to apply).
    pub tail_estimate: Option<f64>,
    pub form: ConstantForm,
}

fn odd_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while n % 2 == 0 && n > 0 {
        n /= 2;
    }
    let mut p = 3;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 2;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Π factor(p) over the given primes in log space. Returns 0 as soon as any
/// factor is exactly 0.
fn euler_product(primes: &[u64], factor: impl Fn(u64) -> f64 + Sync) -> f64 {
    if primes.iter().any(|&p| factor(p) == 0.0) {
        return 0.0;
    }
    block_sum(0..primes.len(), PRIME_BLOCK, |i| {
        let f = factor(primes[i]);
        debug_assert!(f > 0.0, "negative Euler factor at p={}", primes[i]);
        f.ln()
    })
    .exp()
}

/// Σ_{p>P} 1/(p−1)² ≤ 1/(P−1), inflated by 1/(1 − 1/P²) so that it bounds
/// Σ_{p>P} −log(1 − 1/(p−1)²).
fn twin_tail(bound: u64) -> f64 {
    let p = bound as f64;
    1.0 / ((p - 1.0) * (1.0 - 1.0 / (p * p)))
}

fn twin_factor(p: u64) -> f64 {
    let t = 1.0 / (p - 1) as f64;
    1.0 - t * t
}

fn require_bound(bound: u64, min: u64) -> Result<()> {
    if bound < min {
        Err(Error::invalid(format!(
            "prime bound P={bound} must be at least {min}"
        )))
    } else {
        Ok(())
    }
}

/// C₂ = Π_{p>2} (1 − 1/(p−1)²) over odd primes p ≤ P.
pub fn twin_constant(bound: u64) -> Result<SingularConstant> {
    require_bound(bound, 3)?;
    let primes = primes_up_to(bound);
    let value = euler_product(&primes[1..], twin_factor);
    Ok(SingularConstant {
        value,
        truncation_prime: *primes.last().unwrap(),
        tail_estimate: Some(twin_tail(bound)),
        form: ConstantForm::C2,
    })
}

/// 2·C₂·Π_{p | gap, p odd} (p−1)/(p−2) for an even gap.
pub fn pair_constant(gap: u64, bound: u64) -> Result<SingularConstant> {
    if gap == 0 || gap % 2 != 0 {
        return Err(Error::invalid(format!(
            "pair constant needs an even gap, got {gap}"
        )));
    }
    let c2 = twin_constant(bound)?;
    let correction: f64 = odd_prime_factors(gap)
        .into_iter()
        .map(|p| (p - 1) as f64 / (p - 2) as f64)
        .product();
    Ok(SingularConstant {
        value: 2.0 * c2.value * correction,
        form: ConstantForm::Pair { gap },
        ..c2
    })
}

/// Checks the hypotheses on (a, b, ℓ): positive, pairwise coprime, exactly
/// one of them even.
pub fn check_conjecture_d(a: u64, b: u64, l: u64) -> Result<()> {
    if a == 0 || b == 0 || l == 0 {
        return Err(Error::invalid("a, b and l must be positive"));
    }
    for (x, y, name) in [(a, b, "(a, b)"), (a, l, "(a, l)"), (b, l, "(b, l)")] {
        if gcd(x, y) != 1 {
            return Err(Error::invalid(format!(
                "{name} = ({x}, {y}) are not coprime"
            )));
        }
    }
    let evens = [a, b, l].iter().filter(|&&v| v % 2 == 0).count();
    if evens != 1 {
        return Err(Error::invalid(format!(
            "exactly one of a, b, l must be even; found {evens}"
        )));
    }
    Ok(())
}

/// (2C₂/a)·Π (p−1)/(p−2) over odd primes p dividing a, b or ℓ.
pub fn conjecture_d_constant(a: u64, b: u64, l: u64, bound: u64) -> Result<SingularConstant> {
    check_conjecture_d(a, b, l)?;
    let c2 = twin_constant(bound)?;
    let mut odd: Vec<u64> = [a, b, l].into_iter().flat_map(odd_prime_factors).collect();
    odd.sort_unstable();
    odd.dedup();
    let correction: f64 = odd
        .iter()
        .map(|&p| (p - 1) as f64 / (p - 2) as f64)
        .product();
    Ok(SingularConstant {
        value: 2.0 * c2.value / a as f64 * correction,
        form: ConstantForm::ConjectureD { a, b, l },
        ..c2
    })
}

/// Offsets 0 = a₀ < a₁ < … < a_m of a prime constellation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TupleSpec {
    offsets: Vec<u64>,
    admissible: bool,
    /// A prime p with ν(p) = p, when inadmissible.
    obstruction: Option<u64>,
}

impl TupleSpec {
    pub fn new(offsets: Vec<u64>) -> Result<Self> {
        if offsets.first() != Some(&0) {
            return Err(Error::invalid("tuple offsets must start with 0"));
        }
        if offsets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("tuple offsets must be strictly increasing"));
        }
        let max = *offsets.last().unwrap();
        // ν(p) ≤ len < p for larger p
        let obstruction = primes_up_to(max + 1)
            .into_iter()
            .find(|&p| residue_count(&offsets, p) == p);
        Ok(Self {
            offsets,
            admissible: obstruction.is_none(),
            obstruction,
        })
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn admissible(&self) -> bool {
        self.admissible
    }

    pub fn obstruction(&self) -> Option<u64> {
        self.obstruction
    }

    /// m, the number of offsets after the leading 0.
    pub fn m(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn max_offset(&self) -> u64 {
        *self.offsets.last().unwrap()
    }

    /// ν(p): distinct residues of the offsets modulo p.
    pub fn nu(&self, p: u64) -> u64 {
        residue_count(&self.offsets, p)
    }

    pub(crate) fn require_admissible(&self) -> Result<()> {
        match self.obstruction {
            Some(p) => Err(Error::invalid(format!(
                "tuple {:?} is inadmissible: the offsets cover every residue mod {p}",
                self.offsets
            ))),
            None => Ok(()),
        }
    }
}

fn residue_count(offsets: &[u64], p: u64) -> u64 {
    let mut seen: Vec<u64> = offsets.iter().map(|o| o % p).collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len() as u64
}

/// Π_p (p/(p−1))^m·(p−ν(p))/(p−1) over primes p ≤ P.
pub fn tuple_constant(spec: &TupleSpec, bound: u64) -> Result<SingularConstant> {
    spec.require_admissible()?;
    require_bound(bound, 2)?;
    let m = spec.m() as i32;
    let primes = primes_up_to(bound);
    let value = euler_product(&primes, |p| {
        let pf = p as f64;
        (pf / (pf - 1.0)).powi(m) * (p - spec.nu(p)) as f64 / (pf - 1.0)
    });
    // For p > max offset every residue is distinct (ν = m+1), and with
    // t = 1/(p−1) ≤ 1/(2m) the log of the factor lies in [−(m²+m)t², 0].
    let mf = m as f64;
    let tail_estimate = if m == 0 {
        Some(0.0)
    } else if bound >= spec.max_offset().max(2 * m as u64) {
        Some((mf * mf + mf) / (bound as f64 - 1.0))
    } else {
        None
    };
    Ok(SingularConstant {
        value,
        truncation_prime: *primes.last().unwrap(),
        tail_estimate,
        form: ConstantForm::Tuple {
            offsets: spec.offsets.clone(),
        },
    })
}

/// c_p(h) for prime p: p−1 when p | h, else −1.
fn cp(p: u64, h: u64) -> f64 {
    if h % p == 0 {
        (p - 1) as f64
    } else {
        -1.0
    }
}

/// Π_{p ≤ P} (1 + μ(p)·c_p(h)/φ(p)): the multiplicative rearrangement of
/// Σ_q μ(q)/φ(q)·c_q(h).
///
/// Every prime dividing h contributes a zero factor, and p ∤ h contributes
/// 1 + 1/(p−1) > 1, so the product is either exactly 0 (already for p = 2
/// when h is even) or grows without bound in P. No tail estimate exists in
/// the second case.
pub fn series_constant(h: u64, bound: u64) -> Result<SingularConstant> {
    if h == 0 {
        return Err(Error::invalid("series constant needs h >= 1"));
    }
    require_bound(bound, 2)?;
    let primes = primes_up_to(bound);
    let value = euler_product(&primes, |p| 1.0 - cp(p, h) / (p - 1) as f64);
    Ok(SingularConstant {
        value,
        truncation_prime: *primes.last().unwrap(),
        tail_estimate: (value == 0.0).then_some(0.0),
        form: ConstantForm::Series { h },
    })
}

/// Π_{p ≤ P} (1 + μ(p)²·c_p(h)/φ(p)²): the multiplicative rearrangement of
/// Σ_q μ(q)²/φ(q)²·c_q(h).
///
/// The p = 2 factor is 1 + c₂(h), which is 0 for odd h and 2 for even h;
/// odd p contribute 1 + 1/(p−1) when p | h and 1 − 1/(p−1)² otherwise.
pub fn series_wk(h: u64, bound: u64) -> Result<SingularConstant> {
    if h == 0 {
        return Err(Error::invalid("series constant needs h >= 1"));
    }
    require_bound(bound, 2)?;
    let primes = primes_up_to(bound);
    let value = euler_product(&primes, |p| {
        let phi = (p - 1) as f64;
        1.0 + cp(p, h) / (phi * phi)
    });
    let largest = odd_prime_factors(h).last().copied().unwrap_or(2);
    let tail_estimate = if value == 0.0 {
        Some(0.0)
    } else if bound >= largest.max(3) {
        Some(twin_tail(bound))
    } else {
        None
    };
    Ok(SingularConstant {
        value,
        truncation_prime: *primes.last().unwrap(),
        tail_estimate,
        form: ConstantForm::SeriesWk { h },
    })
}

/// Coefficient a_q in the raw series Σ_q a_q·c_q(h).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesCoefficient {
    /// μ(q)/φ(q)
    MuOverPhi,
    /// μ(q)²/φ(q)²
    MuOverPhiSquared,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPartialSum {
    pub h: u64,
    pub coefficient: SeriesCoefficient,
    pub truncation: u64,
    pub value: f64,
    /// (Q, partial sum) at ten evenly spaced truncations.
    pub trace: Vec<(u64, f64)>,
}

/// The raw q-ordered truncation Σ_{q ≤ Q₀} a_q·c_q(h). Diagnostic only.
pub fn series_raw_sum(
    tables: &SieveTables,
    h: u64,
    q0: u64,
    coefficient: SeriesCoefficient,
) -> Result<SeriesPartialSum> {
    if h == 0 || q0 == 0 {
        return Err(Error::invalid("raw series needs h >= 1 and Q0 >= 1"));
    }
    if q0 > tables.bound() as u64 {
        return Err(Error::invalid(format!(
            "Q0={q0} exceeds sieve bound {}",
            tables.bound()
        )));
    }
    let eval = crate::ramanujan::CqEvaluator::new(tables);
    let (value, trace) = traced_sum(q0, |q| {
        let mu = tables.mu(q as usize) as f64;
        if mu == 0.0 {
            return 0.0;
        }
        let phi = tables.phi(q as usize) as f64;
        let a = match coefficient {
            SeriesCoefficient::MuOverPhi => mu / phi,
            SeriesCoefficient::MuOverPhiSquared => 1.0 / (phi * phi),
        };
        a * eval.cq_unchecked(q, h as i64) as f64
    });
    Ok(SeriesPartialSum {
        h,
        coefficient,
        truncation: q0,
        value,
        trace,
    })
}
