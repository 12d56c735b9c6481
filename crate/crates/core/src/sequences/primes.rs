//! Prime table used for Halton bases and the discrepancy bounds.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Number of primes kept in the cached table. Larger indices are served by
/// sieving on demand.
pub const PRIME_TABLE_LEN: usize = 4096;

static TABLE: OnceLock<Vec<u64>> = OnceLock::new();

/// Sieve of Eratosthenes, all primes `<= limit`.
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
        let mut k = i * i;
        while k <= limit {
            composite[k] = true;
            k += i;
        }
    }
    out
}

/// Upper bound on the j-th prime: `j(ln j + ln ln j)` for j >= 6.
fn nth_prime_upper_bound(j: usize) -> u64 {
    if j < 6 {
        return 13;
    }
    let jf = j as f64;
    (jf * (jf.ln() + jf.ln().ln())).ceil() as u64 + 1
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = primes_up_to(nth_prime_upper_bound(count));
    primes.truncate(count);
    primes
}

fn table() -> &'static [u64] {
    TABLE.get_or_init(|| first_primes(PRIME_TABLE_LEN))
}

/// The j-th prime, 1-based (`nth_prime(1) == 2`).
pub fn nth_prime(j: usize) -> Result<u64> {
    if j == 0 {
        return Err(Error::invalid("prime index is 1-based; j = 0 is not allowed"));
    }
    let t = table();
    if j <= t.len() {
        return Ok(t[j - 1]);
    }
    Ok(first_primes(j)[j - 1])
}

/// The first `count` primes.
pub fn first_n_primes(count: usize) -> Vec<u64> {
    let t = table();
    if count <= t.len() {
        t[..count].to_vec()
    } else {
        first_primes(count)
    }
}
