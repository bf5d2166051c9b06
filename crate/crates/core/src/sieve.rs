//! Tables of the classical arithmetic functions, built by one linear sieve
//! pass, plus a segmented stream of Λ₁ for bounds past the memory budget.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Bytes of table storage per integer covered (spf, μ, φ, Λ, Λ₁).
pub const BYTES_PER_ENTRY: usize = 4 + 1 + 4 + 8 + 8;

/// Default segment length for [`SegmentedLambdaStream`].
pub const DEFAULT_SEGMENT: usize = 1 << 22;

const MAGIC: &[u8; 8] = b"RAMSIEVE";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy)]
pub struct SieveConfig {
    /// Upper limit on table memory in bytes.
    pub memory_budget: usize,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            memory_budget: 4 << 30,
        }
    }
}

/// Immutable tables of spf, μ, φ, Λ and Λ₁ on `1..=bound`.
///
/// Every array is indexed by `n` itself; slot 0 holds a placeholder and is
/// never read through the public accessors.
#[derive(Debug, Clone, PartialEq)]
pub struct SieveTables {
    bound: usize,
    spf: Vec<u32>,
    mu: Vec<i8>,
    phi: Vec<u32>,
    lambda: Vec<f64>,
    lambda1: Vec<f64>,
}

/// Builds tables up to `n` with the default memory budget.
pub fn build_sieve(n: usize) -> Result<SieveTables> {
    SieveTables::build_with(n, SieveConfig::default())
}

impl SieveTables {
    pub fn build(n: usize) -> Result<Self> {
        Self::build_with(n, SieveConfig::default())
    }

    pub fn build_with(n: usize, config: SieveConfig) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("sieve bound must be at least 1"));
        }
        if n > u32::MAX as usize {
            return Err(Error::ResourceLimit {
                what: format!("sieve bound {n} exceeds 32-bit table entries"),
                budget: format!("{}", u32::MAX),
            });
        }
        let needed = (n + 1).saturating_mul(BYTES_PER_ENTRY);
        if needed > config.memory_budget {
            return Err(Error::ResourceLimit {
                what: format!("sieve tables for N={n} need {needed} bytes"),
                budget: format!("{} bytes", config.memory_budget),
            });
        }

        let mut spf = vec![0u32; n + 1];
        let mut mu = vec![0i8; n + 1];
        let mut phi = vec![0u32; n + 1];
        let mut lambda = vec![0.0f64; n + 1];
        let mut lambda1 = vec![0.0f64; n + 1];
        let mut primes: Vec<u32> = Vec::new();

        mu[1] = 1;
        phi[1] = 1;
        if n >= 1 {
            spf[1] = 1;
        }
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                mu[i] = -1;
                phi[i] = (i - 1) as u32;
                primes.push(i as u32);
            }
            let spf_i = spf[i];
            for &p in &primes {
                let m = i * p as usize;
                if p > spf_i || m > n {
                    break;
                }
                spf[m] = p;
                if p == spf_i {
                    mu[m] = 0;
                    phi[m] = phi[i] * p;
                } else {
                    mu[m] = -mu[i];
                    phi[m] = phi[i] * (p - 1);
                }
            }
        }

        for i in 2..=n {
            let p = spf[i] as usize;
            let rest = i / p;
            let prime_power = rest == 1 || (lambda[rest] != 0.0 && spf[rest] as usize == p);
            if rest == 1 {
                lambda[i] = (p as f64).ln();
            } else if prime_power {
                lambda[i] = lambda[p];
            }
            lambda1[i] = phi[i] as f64 * lambda[i] / i as f64;
        }

        Ok(Self {
            bound: n,
            spf,
            mu,
            phi,
            lambda,
            lambda1,
        })
    }

    #[inline]
    pub fn bound(&self) -> usize {
        self.bound
    }

    #[inline]
    fn check(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.bound {
            Err(Error::invalid(format!(
                "n={n} outside sieve range 1..={}",
                self.bound
            )))
        } else {
            Ok(())
        }
    }

    /// Smallest prime factor; 1 for n = 1. Panics outside `1..=bound`.
    #[inline]
    pub fn spf(&self, n: usize) -> u32 {
        debug_assert!(n >= 1 && n <= self.bound);
        self.spf[n]
    }

    #[inline]
    pub fn mu(&self, n: usize) -> i8 {
        debug_assert!(n >= 1 && n <= self.bound);
        self.mu[n]
    }

    #[inline]
    pub fn phi(&self, n: usize) -> u32 {
        debug_assert!(n >= 1 && n <= self.bound);
        self.phi[n]
    }

    #[inline]
    pub fn lambda(&self, n: usize) -> f64 {
        debug_assert!(n >= 1 && n <= self.bound);
        self.lambda[n]
    }

    #[inline]
    pub fn lambda1(&self, n: usize) -> f64 {
        debug_assert!(n >= 1 && n <= self.bound);
        self.lambda1[n]
    }

    /// Checked Λ₁(n) = φ(n)Λ(n)/n.
    pub fn lambda1_at(&self, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.lambda1[n])
    }

    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && n <= self.bound && self.spf[n] as usize == n
    }

    /// Λ values on `0..=bound`; index 0 is a zero placeholder.
    pub fn lambda_slice(&self) -> &[f64] {
        &self.lambda
    }

    /// Λ₁ values on `0..=bound`; index 0 is a zero placeholder.
    pub fn lambda1_slice(&self) -> &[f64] {
        &self.lambda1
    }

    /// Prime factorization as (prime, exponent) pairs in ascending order.
    pub fn factorize(&self, mut n: usize) -> Result<Vec<(u64, u32)>> {
        self.check(n)?;
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        Ok(out)
    }

    /// Sum of divisors σ(n).
    pub fn sigma(&self, n: usize) -> Result<u64> {
        Ok(self
            .factorize(n)?
            .into_iter()
            .map(|(p, e)| (p.pow(e + 1) - 1) / (p - 1))
            .product())
    }

    /// Number of divisors d(n).
    pub fn divisor_count(&self, n: usize) -> Result<u64> {
        Ok(self
            .factorize(n)?
            .into_iter()
            .map(|(_, e)| e as u64 + 1)
            .product())
    }

    /// Fixed little-endian layout: magic, format version, bound, then the
    /// five arrays for `1..=bound` in the order spf, μ, φ, Λ, Λ₁.
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.bound as u64).to_le_bytes())?;
        let r = 1..=self.bound;
        for &v in &self.spf[r.clone()] {
            w.write_all(&v.to_le_bytes())?;
        }
        for &v in &self.mu[r.clone()] {
            w.write_all(&v.to_le_bytes())?;
        }
        for &v in &self.phi[r.clone()] {
            w.write_all(&v.to_le_bytes())?;
        }
        for &v in &self.lambda[r.clone()] {
            w.write_all(&v.to_bits().to_le_bytes())?;
        }
        for &v in &self.lambda1[r] {
            w.write_all(&v.to_bits().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(20 + self.bound * BYTES_PER_ENTRY);
        self.write_to(&mut buf)
            .expect("writing to a Vec cannot fail");
        buf
    }

    /// Inverse of [`SieveTables::write_to`]. `origin` only labels errors.
    pub fn read_from<R: Read>(r: &mut R, origin: &Path) -> Result<Self> {
        let bad = |reason: String| Error::Format {
            path: origin.to_path_buf(),
            reason,
        };
        let io = |source| Error::Io {
            path: origin.to_path_buf(),
            source,
        };
        let mut header = [0u8; 20];
        r.read_exact(&mut header).map_err(io)?;
        if &header[..8] != MAGIC {
            return Err(bad("bad magic header".into()));
        }
        let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(bad(format!(
                "format version {version}, expected {FORMAT_VERSION}"
            )));
        }
        let bound = u64::from_le_bytes(header[12..20].try_into().unwrap()) as usize;
        if bound == 0 || bound > u32::MAX as usize {
            return Err(bad(format!("implausible bound {bound}")));
        }
        let mut body = vec![0u8; bound * BYTES_PER_ENTRY];
        r.read_exact(&mut body).map_err(io)?;

        let mut off = 0;
        let mut take = |width: usize| {
            let s = &body[off..off + bound * width];
            off += bound * width;
            s.to_vec()
        };
        let spf_b = take(4);
        let mu_b = take(1);
        let phi_b = take(4);
        let lambda_b = take(8);
        let lambda1_b = take(8);

        fn with_slot0<T>(mut v: Vec<T>, zero: T) -> Vec<T> {
            v.insert(0, zero);
            v
        }
        let spf = with_slot0(
            spf_b
                .chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
                .collect(),
            0,
        );
        let mu = with_slot0(mu_b.iter().map(|&b| b as i8).collect(), 0);
        let phi = with_slot0(
            phi_b
                .chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
                .collect(),
            0,
        );
        let f64s = |b: &[u8]| -> Vec<f64> {
            b.chunks_exact(8)
                .map(|c| f64::from_bits(u64::from_le_bytes(c.try_into().unwrap())))
                .collect()
        };
        let lambda = with_slot0(f64s(&lambda_b), 0.0);
        let lambda1 = with_slot0(f64s(&lambda1_b), 0.0);

        let tables = Self {
            bound,
            spf,
            mu,
            phi,
            lambda,
            lambda1,
        };
        if tables.mu[1] != 1 || tables.phi[1] != 1 {
            return Err(bad("table contents fail the n=1 identities".into()));
        }
        Ok(tables)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = File::create(path).map_err(io)?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(io)?;
        w.flush().map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_from(&mut BufReader::new(file), path)
    }
}

/// Primes up to and including `limit` by the sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Λ₁ over `1..=bound` delivered one contiguous segment at a time.
#[derive(Debug, Clone)]
pub struct SegmentedLambdaStream {
    bound: usize,
    segment_size: usize,
    cursor: usize,
    small_primes: Vec<u64>,
}

/// Λ₁(n) for `n` in `start..start + values.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSegment {
    pub start: usize,
    pub values: Vec<f64>,
}

impl SegmentedLambdaStream {
    pub fn new(bound: usize, segment_size: usize) -> Result<Self> {
        if bound == 0 {
            return Err(Error::invalid("stream bound must be at least 1"));
        }
        if segment_size == 0 {
            return Err(Error::invalid("segment size must be at least 1"));
        }
        let root = (bound as f64).sqrt() as u64 + 1;
        Ok(Self {
            bound,
            segment_size,
            cursor: 0,
            small_primes: primes_up_to(root),
        })
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn segment_size(&self) -> usize {
        self.segment_size
    }

    pub fn segment_count(&self) -> usize {
        self.bound.div_ceil(self.segment_size)
    }

    /// Computes segment `index` without touching the cursor, so separate
    /// workers can each take a disjoint set of indices.
    pub fn segment(&self, index: usize) -> Option<LambdaSegment> {
        let lo = 1 + index.checked_mul(self.segment_size)?;
        if lo > self.bound {
            return None;
        }
        let hi = (lo + self.segment_size - 1).min(self.bound);
        let len = hi - lo + 1;

        // base[i] = p when lo+i is a power of the prime p, else 0
        let mut base = vec![0u64; len];
        let mut composite = vec![false; len];
        for &p in &self.small_primes {
            let pu = p as usize;
            if pu.saturating_mul(pu) > hi {
                break;
            }
            let first = (pu * pu).max(lo.div_ceil(pu) * pu);
            let mut m = first;
            while m <= hi {
                composite[m - lo] = true;
                m += pu;
            }
            let mut pk = pu * pu;
            loop {
                if pk >= lo {
                    base[pk - lo] = p;
                }
                match pk.checked_mul(pu) {
                    Some(next) if next <= hi => pk = next,
                    _ => break,
                }
            }
        }
        for (i, slot) in base.iter_mut().enumerate() {
            let n = lo + i;
            if n >= 2 && !composite[i] {
                *slot = n as u64;
            }
        }
        let values = base
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                if p == 0 {
                    0.0
                } else {
                    let n = lo + i;
                    let phi = n - n / p as usize;
                    phi as f64 * (p as f64).ln() / n as f64
                }
            })
            .collect();
        Some(LambdaSegment { start: lo, values })
    }
}

impl Iterator for SegmentedLambdaStream {
    type Item = LambdaSegment;

    fn next(&mut self) -> Option<LambdaSegment> {
        let seg = self.segment(self.cursor)?;
        self.cursor += 1;
        Some(seg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn bound_one_identities() {
        let t = build_sieve(1).unwrap();
        assert_eq!(t.mu(1), 1);
        assert_eq!(t.phi(1), 1);
        assert_eq!(t.lambda(1), 0.0);
        assert_eq!(t.lambda1(1), 0.0);
    }

    #[test]
    fn zero_bound_rejected() {
        assert!(matches!(build_sieve(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn budget_is_enforced() {
        let err = SieveTables::build_with(1000, SieveConfig { memory_budget: 100 }).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::ResourceLimit { .. }));
        assert!(msg.contains("100 bytes"), "{msg}");
    }

    #[test]
    fn small_table_by_hand() {
        let t = build_sieve(10).unwrap();
        assert_eq!(t.lambda(8), 2f64.ln());
        assert_eq!(t.lambda(9), 3f64.ln());
        assert_eq!(t.lambda(10), 0.0);
        assert!((t.lambda1(9) - 0.7324082).abs() < 5e-8);
        let mu: Vec<i8> = (1..=10).map(|n| t.mu(n)).collect();
        assert_eq!(mu, [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
        let phi: Vec<u32> = (1..=10).map(|n| t.phi(n)).collect();
        assert_eq!(phi, [1, 1, 2, 2, 4, 2, 6, 4, 6, 4]);
    }

    #[test]
    fn lambda1_at_examples() {
        let t = build_sieve(10).unwrap();
        assert_eq!(t.lambda1_at(1).unwrap(), 0.0);
        assert!((t.lambda1_at(2).unwrap() - 0.3465736).abs() < 5e-8);
        assert_eq!(t.lambda1_at(6).unwrap(), 0.0);
        assert!(t.lambda1_at(0).is_err());
        assert!(t.lambda1_at(11).is_err());
    }

    #[test]
    fn primes_and_prime_powers() {
        let t = build_sieve(5000).unwrap();
        for p in primes_up_to(5000) {
            let p = p as usize;
            assert_eq!(t.mu(p), -1);
            assert_eq!(t.phi(p) as usize, p - 1);
            assert_eq!(t.lambda(p), (p as f64).ln());
            let closed = (p as f64 - 1.0) / p as f64 * (p as f64).ln();
            let mut pk = p;
            while pk <= 5000 {
                assert!((t.lambda1(pk) - closed).abs() < 1e-14);
                pk *= p;
            }
        }
        for n in 1..=5000 {
            assert_eq!(t.lambda1(n), t.phi(n) as f64 * t.lambda(n) / n as f64);
        }
    }

    #[test]
    fn totient_divisor_sum() {
        let t = build_sieve(20_000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(1..=20_000usize);
            let s: u64 = (1..=n)
                .filter(|d| n % d == 0)
                .map(|d| t.phi(d) as u64)
                .sum();
            assert_eq!(s, n as u64);
        }
    }

    #[test]
    fn multiplicativity_spot_checks() {
        let n = 1_000_000;
        let t = build_sieve(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 1000 {
            let a = rng.gen_range(1..=1000usize);
            let b = rng.gen_range(1..=n / a);
            if gcd(a, b) != 1 {
                continue;
            }
            assert_eq!(t.phi(a * b), t.phi(a) * t.phi(b));
            assert_eq!(t.mu(a * b), t.mu(a) * t.mu(b));
            checked += 1;
        }
        let mertens: i64 = (1..=n).map(|k| t.mu(k) as i64).sum();
        assert!(mertens.unsigned_abs() as usize <= n / 2);
        let chebyshev: f64 = t.lambda_slice().iter().sum::<f64>() / n as f64;
        assert!((0.9..=1.1).contains(&chebyshev), "{chebyshev}");
    }

    #[test]
    fn sigma_and_divisor_count() {
        let t = build_sieve(100).unwrap();
        assert_eq!(t.sigma(1).unwrap(), 1);
        assert_eq!(t.sigma(12).unwrap(), 28);
        assert_eq!(t.divisor_count(6).unwrap(), 4);
        assert_eq!(t.divisor_count(1).unwrap(), 1);
    }

    #[test]
    fn dump_restore_round_trip() {
        let t = build_sieve(1234).unwrap();
        let bytes = t.to_bytes();
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(u64::from_le_bytes(bytes[12..20].try_into().unwrap()), 1234);
        let back = SieveTables::read_from(&mut bytes.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn corrupt_header_rejected() {
        let mut bytes = build_sieve(10).unwrap().to_bytes();
        bytes[0] = b'X';
        let err = SieveTables::read_from(&mut bytes.as_slice(), Path::new("mem")).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
    }

    #[test]
    fn segmented_stream_matches_tables() {
        let n = 100_000;
        let t = build_sieve(n).unwrap();
        for size in [1, 2, 3, 97, 1000, 65_536, n, 2 * n] {
            let stream = SegmentedLambdaStream::new(n, size).unwrap();
            let mut expected = 1;
            for seg in stream {
                assert_eq!(seg.start, expected);
                for (i, v) in seg.values.iter().enumerate() {
                    assert_eq!(
                        v.to_bits(),
                        t.lambda1(seg.start + i).to_bits(),
                        "size {size}, n {}",
                        seg.start + i
                    );
                }
                expected += seg.values.len();
            }
            assert_eq!(expected, n + 1);
        }
    }

    #[test]
    fn primes_up_to_small() {
        assert_eq!(primes_up_to(1), Vec::<u64>::new());
        assert_eq!(primes_up_to(2), vec![2]);
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }
}
