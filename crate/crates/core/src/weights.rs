//! Binomial and multinomial probabilities for large trial counts.
//!
//! Plain log-gamma differences lose about `ulp(ln N!)` absolute accuracy,
//! roughly 1e-9 at `N = 10⁶`, which is far too coarse for weights that must
//! sum to one within 1e-12. Instead the binomial mass is evaluated in log
//! space through Loader's saddle-point split: Stirling-series remainders plus
//! a deviance term computed without cancellation. The multinomial mass is a
//! product of two binomials.

use std::f64::consts::PI;

use crate::error::{LabError, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `ln n! − [(n + ½) ln n − n + ½ ln 2π]`.
fn stirling_error(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        // Exact for small integers; the remainder is O(1/n) so a sum of logs
        // keeps ~1e-14 absolute accuracy here.
        let k = n as u64;
        let ln_fact: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
        return ln_fact - (n + 0.5) * n.ln() + n - 0.5 * (2.0 * PI).ln();
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance `x ln(x/m) + m − x`, series-evaluated when `x ≈ m`.
fn deviance(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let mut v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                return next;
            }
            s = next;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `C(n, x) p^x q^(n−x)` with `q = 1 − p` supplied separately so callers can
/// pass it without cancellation.
pub(crate) fn binomial_mass(x: u64, n: u64, p: f64, q: f64) -> f64 {
    if x > n {
        return 0.0;
    }
    if p == 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    let (xf, nf) = (x as f64, n as f64);
    if x == 0 {
        if n == 0 {
            return 1.0;
        }
        let lc = if p < 0.1 {
            -deviance(nf, nf * q) - nf * p
        } else {
            nf * q.ln()
        };
        return lc.exp();
    }
    if x == n {
        let lc = if q < 0.1 {
            -deviance(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        };
        return lc.exp();
    }
    let lc = stirling_error(nf)
        - stirling_error(xf)
        - stirling_error(nf - xf)
        - deviance(xf, nf * p)
        - deviance(nf - xf, nf * q);
    let lf = LN_2PI + xf.ln() + (-xf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

fn check_probability(name: &str, z: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&z) {
        return Err(LabError::Domain(format!("{name} = {z} outside [0, 1]")));
    }
    Ok(())
}

/// Slack allowed on `Z₁ + Z₂ ≤ 1`.
pub(crate) const SUM_SLACK: f64 = 1e-12;

/// Single-mode binomial weight `C(N,s) Z^s (1−Z)^(N−s)`.
pub fn binomial_weight(n: u64, s: u64, z: f64) -> Result<f64> {
    check_probability("Z", z)?;
    if s > n {
        return Err(LabError::Domain(format!("s = {s} exceeds N = {n}")));
    }
    Ok(binomial_mass(s, n, z, 1.0 - z))
}

/// Joint weight `N!/(s! s'! (N−s−s')!) Z₁^s Z₂^s' (1−Z₁−Z₂)^(N−s−s')`,
/// zero when `s + s' > N`.
pub fn multinomial_weight(n: u64, s: u64, s_prime: u64, z1: f64, z2: f64) -> Result<f64> {
    check_probability("Z1", z1)?;
    check_probability("Z2", z2)?;
    if z1 + z2 > 1.0 + SUM_SLACK {
        return Err(LabError::Domain(format!("Z1 + Z2 = {} exceeds 1", z1 + z2)));
    }
    if s > n || s_prime > n {
        return Err(LabError::Domain(format!("s = {s}, s' = {s_prime} exceed N = {n}")));
    }
    Ok(JointWeights::new(n, z1, z2).weight(s, s_prime))
}

/// Factorisation of the trinomial into a marginal and a conditional binomial.
#[derive(Debug, Clone, Copy)]
pub(crate) struct JointWeights {
    pub n: u64,
    z1: f64,
    /// `Z₂ / (1 − Z₁)` and its complement `(1 − Z₁ − Z₂)/(1 − Z₁)`.
    cond_p: f64,
    cond_q: f64,
}

impl JointWeights {
    pub fn new(n: u64, z1: f64, z2: f64) -> Self {
        let rest = 1.0 - z1;
        let remainder = (1.0 - z1 - z2).max(0.0);
        let (cond_p, cond_q) = if rest <= 0.0 {
            (0.0, 1.0)
        } else {
            ((z2 / rest).min(1.0), remainder / rest)
        };
        Self {
            n,
            z1,
            cond_p,
            cond_q,
        }
    }

    pub fn marginal(&self, s: u64) -> f64 {
        binomial_mass(s, self.n, self.z1, 1.0 - self.z1)
    }

    pub fn conditional(&self, s: u64, s_prime: u64) -> f64 {
        if s > self.n {
            return 0.0;
        }
        binomial_mass(s_prime, self.n - s, self.cond_p, self.cond_q)
    }

    pub fn weight(&self, s: u64, s_prime: u64) -> f64 {
        if s + s_prime > self.n {
            return 0.0;
        }
        self.marginal(s) * self.conditional(s, s_prime)
    }

    /// Mode of the conditional distribution of `s'` given `s`.
    pub fn conditional_mode(&self, s: u64) -> u64 {
        let m = self.n - s;
        (((m + 1) as f64) * self.cond_p).floor().clamp(0.0, m as f64) as u64
    }
}

/// Neumaier-compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact binomial via repeated products, fine for small `n`.
    fn naive_binomial(n: u64, s: u64, z: f64) -> f64 {
        let mut c = 1.0;
        for i in 0..s {
            c *= (n - i) as f64 / (i + 1) as f64;
        }
        c * z.powi(s as i32) * (1.0 - z).powi((n - s) as i32)
    }

    #[test]
    fn matches_naive_for_small_n() {
        for n in 0..40u64 {
            for s in 0..=n {
                for z in [0.1, 0.25, 0.5, 0.9] {
                    let a = binomial_weight(n, s, z).unwrap();
                    let b = naive_binomial(n, s, z);
                    assert!((a - b).abs() <= 1e-13 * b.max(1e-300) + 1e-300, "n={n} s={s} z={z}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn stirling_error_branches_continuous() {
        // Sum-of-logs oracle is only trustworthy while ln n! stays small.
        let exact = |k: f64| {
            let ln_fact: f64 = (2..=(k as u64)).map(|i| (i as f64).ln()).sum();
            ln_fact - (k + 0.5) * k.ln() + k - 0.5 * (2.0 * PI).ln()
        };
        for n in [16.0f64, 36.0, 81.0] {
            assert!((stirling_error(n) - exact(n)).abs() < 1e-12, "n = {n}");
        }
        // Beyond that, compare each truncation with the five-term series.
        let full = |n: f64| {
            let nn = n * n;
            (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * nn)) / nn) / nn) / nn) / n
        };
        for n in [36.0f64, 81.0, 501.0, 1e4, 1e6] {
            assert!((stirling_error(n) - full(n)).abs() < 1e-16, "n = {n}");
        }
    }

    #[test]
    fn single_trial() {
        assert_eq!(binomial_weight(1, 1, 0.3).unwrap(), 0.3);
        assert!((binomial_weight(1, 0, 0.3).unwrap() - 0.7).abs() < 1e-16);
    }

    #[test]
    fn impossible_partition_vanishes() {
        assert_eq!(multinomial_weight(1, 1, 1, 0.5, 0.5).unwrap(), 0.0);
        assert_eq!(multinomial_weight(3, 2, 2, 0.2, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn trinomial_small_case() {
        // 3!/(1!1!1!) 0.2·0.3·0.5
        let w = multinomial_weight(3, 1, 1, 0.2, 0.3).unwrap();
        assert!((w - 6.0 * 0.2 * 0.3 * 0.5).abs() < 1e-15);
        // Edge Z₁ + Z₂ = 1.
        let w = multinomial_weight(2, 1, 1, 0.5, 0.5).unwrap();
        assert!((w - 0.5).abs() < 1e-15);
        assert_eq!(multinomial_weight(2, 1, 0, 0.5, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        assert!(binomial_weight(3, 4, 0.5).is_err());
        assert!(binomial_weight(3, 1, 1.5).is_err());
        assert!(multinomial_weight(3, 1, 1, 0.7, 0.7).is_err());
    }

    #[test]
    fn sums_to_one_at_n_thousand() {
        let mut acc = CompensatedSum::default();
        for s in 0..=1000 {
            acc.add(binomial_weight(1000, s, 0.25).unwrap());
        }
        assert!((acc.value() - 1.0).abs() <= 1e-12);
    }
}
