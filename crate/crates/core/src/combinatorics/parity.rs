use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{domain, Result};

/// `n[r][h]`: the number of strings in `[d]^r` whose parity signature equals one
/// fixed vector of Hamming weight `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParityCountTable {
    d: usize,
    max_r: usize,
    entries: Vec<Vec<BigUint>>,
}

impl ParityCountTable {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn max_r(&self) -> usize {
        self.max_r
    }

    /// `n[r][h]`; zero for `h > d`.
    pub fn get(&self, r: usize, h: usize) -> &BigUint {
        static ZERO: std::sync::OnceLock<BigUint> = std::sync::OnceLock::new();
        if h > self.d {
            return ZERO.get_or_init(BigUint::zero);
        }
        &self.entries[r][h]
    }

    pub fn row(&self, r: usize) -> &[BigUint] {
        &self.entries[r]
    }
}

/// Builds the table by appending one symbol at a time.
///
/// Appending symbol `j` flips bit `j` of the signature, so a fixed weight-`h`
/// signature at length `r+1` is reached from `h` signatures of weight `h-1` and
/// `d-h` signatures of weight `h+1`:
/// `n[r+1][h] = h·n[r][h-1] + (d-h)·n[r][h+1]`.
pub fn parity_counts(d: usize, max_r: usize) -> Result<ParityCountTable> {
    if d == 0 {
        return Err(domain!("parity_counts requires d >= 1"));
    }
    let mut entries = Vec::with_capacity(max_r + 1);
    let mut row = vec![BigUint::zero(); d + 1];
    row[0] = BigUint::from(1u32);
    entries.push(row);
    for r in 0..max_r {
        let prev = &entries[r];
        let mut next = vec![BigUint::zero(); d + 1];
        for (h, slot) in next.iter_mut().enumerate() {
            // only weights with the parity of r+1 and at most r+1 are reachable
            if h > r + 1 || (h + r + 1) % 2 == 1 {
                continue;
            }
            let mut acc = BigUint::zero();
            if h >= 1 {
                acc += &prev[h - 1] * h;
            }
            if h < d {
                acc += &prev[h + 1] * (d - h);
            }
            *slot = acc;
        }
        entries.push(next);
    }
    Ok(ParityCountTable { d, max_r, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::binom_exact;

    /// Enumerates `[d]^r` and tallies strings by exact signature.
    fn enumerate(d: usize, r: usize) -> Vec<BigUint> {
        let mut by_signature = vec![0u64; 1 << d];
        let total = d.pow(r as u32);
        for mut code in 0..total {
            let mut sig = 0usize;
            for _ in 0..r {
                sig ^= 1 << (code % d);
                code /= d;
            }
            by_signature[sig] += 1;
        }
        // n[r][h] is the count for any one signature of weight h
        (0..=d)
            .map(|h| {
                let sig = (1usize << h) - 1;
                BigUint::from(by_signature[sig])
            })
            .collect()
    }

    #[test]
    fn matches_enumeration_small() {
        for d in 1..=4 {
            let table = parity_counts(d, 5).unwrap();
            for r in 0..=5 {
                assert_eq!(table.row(r), enumerate(d, r).as_slice(), "d={d} r={r}");
            }
        }
    }

    #[test]
    fn documented_examples() {
        let t = parity_counts(2, 2).unwrap();
        assert_eq!(t.get(2, 0), &BigUint::from(2u32));
        assert_eq!(t.get(2, 1), &BigUint::zero());
        assert_eq!(t.get(2, 2), &BigUint::from(2u32));

        let t = parity_counts(1, 2).unwrap();
        assert_eq!(t.get(2, 0), &BigUint::from(1u32));
        assert_eq!(t.get(2, 1), &BigUint::zero());

        for d in 1..8 {
            let t = parity_counts(d, 1).unwrap();
            assert_eq!(t.get(1, 1), &BigUint::from(1u32));
            assert_eq!(t.get(1, 0), &BigUint::zero());
        }
        assert!(parity_counts(0, 3).is_err());
    }

    #[test]
    fn weighted_sum_is_d_to_the_r() {
        for d in [1usize, 2, 3, 7, 20, 200] {
            let t = parity_counts(d, 40).unwrap();
            for r in 0..=40 {
                let mut acc = BigUint::zero();
                for h in 0..=d {
                    let v = t.get(r, h);
                    if h > r || (h + r) % 2 == 1 {
                        assert!(v.is_zero());
                    }
                    acc += binom_exact(d as u64, h as i64) * v;
                }
                assert_eq!(acc, BigUint::from(d).pow(r as u32), "d={d} r={r}");
            }
        }
    }
}
