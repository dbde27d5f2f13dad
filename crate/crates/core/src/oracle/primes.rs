// SPDX-License-Identifier: Apache-2.0

//! Trial division over a mod-30 wheel.

const WHEEL: [u64; 8] = [1, 7, 11, 13, 17, 19, 23, 29];

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut base = 0u64;
    loop {
        for &w in &WHEEL {
            let d = base + w;
            if d < 7 {
                continue;
            }
            if d.saturating_mul(d) > n {
                return true;
            }
            if n.is_multiple_of(d) {
                return false;
            }
        }
        base += 30;
    }
}

/// Smallest prime `>= n`.
pub fn next_prime(n: u64) -> u64 {
    let mut c = n.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// Largest prime `<= n`, or `None` below 2.
pub fn prev_prime(n: u64) -> Option<u64> {
    (2..=n).rev().find(|&c| is_prime(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agrees_with_sieve() {
        let n = 5000;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..=n {
            if sieve[i] {
                for m in (i * i..=n).step_by(i) {
                    sieve[m] = false;
                }
            }
        }
        for (i, &p) in sieve.iter().enumerate() {
            assert_eq!(is_prime(i as u64), p, "{i}");
        }
    }

    #[test]
    fn neighbours() {
        assert_eq!(next_prime(12), 13);
        assert_eq!(next_prime(13), 13);
        assert_eq!(next_prime(0), 2);
        assert_eq!(prev_prime(4096), Some(4093));
        assert_eq!(prev_prime(1), None);
    }
}
