use crate::error::{Error, Result};

/// Bits the pipe may carry at time `t` (1-based): `floor(kt/n) - floor(k(t-1)/n)`.
pub fn bit_pipe_schedule(k: u64, n: u64, t: u64) -> Result<u64> {
    if n == 0 || t == 0 || t > n {
        return Err(Error::OutOfRange { what: "time index", value: t as f64, lo: 1.0, hi: n as f64 });
    }
    Ok(cumulative_bits(k, n, t) - cumulative_bits(k, n, t - 1))
}

/// `floor(kt/n)`, the bits delivered after `t` steps.
pub fn cumulative_bits(k: u64, n: u64, t: u64) -> u64 {
    ((k as u128 * t as u128) / n as u128) as u64
}

/// The whole schedule for `t = 1..=n`.
pub fn schedule_vector(k: u64, n: u64) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::OutOfRange { what: "blocklength", value: 0.0, lo: 1.0, hi: f64::INFINITY });
    }
    (1..=n).map(|t| bit_pipe_schedule(k, n, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_cases() {
        assert_eq!(schedule_vector(3, 5).unwrap(), vec![0, 1, 0, 1, 1]);
        assert_eq!(schedule_vector(0, 4).unwrap(), vec![0; 4]);
        assert_eq!(bit_pipe_schedule(8, 4, 2).unwrap(), 2);
        assert_eq!(schedule_vector(2, 4).unwrap(), vec![0, 1, 0, 1]);
        assert!(bit_pipe_schedule(3, 5, 0).is_err());
        assert!(bit_pipe_schedule(3, 5, 6).is_err());
    }

    #[test]
    fn huge_budget_does_not_overflow() {
        let k = u64::MAX / 2;
        let s = schedule_vector(k, 7).unwrap();
        assert_eq!(s.iter().map(|&b| b as u128).sum::<u128>(), k as u128);
    }

    proptest! {
        #[test]
        fn sums_and_prefixes(k in 0u64..10_000, n in 1u64..200) {
            let s = schedule_vector(k, n).unwrap();
            let mut acc = 0;
            for (i, b) in s.iter().enumerate() {
                acc += b;
                prop_assert_eq!(acc, k * (i as u64 + 1) / n);
            }
            prop_assert_eq!(acc, k);
        }
    }
}
