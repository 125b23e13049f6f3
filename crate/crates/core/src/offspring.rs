//! Offspring-distribution algebra.
//!
//! A finite-support offspring law carries its probability generating function
//! f, the extinction probability q (smallest fixed point of f), the critical
//! bias `lambda_c = f'(q)`, and the Harris decomposition of the conditioned
//! tree into a leafless backbone law g and a subcritical trap law h.

use crate::error::{Error, Result};
use rand::Rng;

const PROB_TOL: f64 = 1e-12;
const FIXED_POINT_TOL: f64 = 1e-14;
const FIXED_POINT_MAX_ITERS: usize = 1_000_000;

/// Finite-support offspring distribution `k -> p_k`, `k = 0..=k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringLaw {
    probs: Vec<f64>,
    cdf: Vec<f64>,
    /// Point mass at a single k (admitted as an oracle law).
    deterministic: bool,
    /// Set on trap laws produced from a p0 = 0 parent: there are no traps.
    empty_trap: bool,
}

impl OffspringLaw {
    /// Builds a law from `(k, p_k)` pairs. Requires the probabilities to sum
    /// to one; supercriticality is checked by the callers that need it.
    pub fn from_pairs(pairs: &[(u32, f64)]) -> Result<Self> {
        let k_max = pairs.iter().map(|&(k, _)| k).max().unwrap_or(0);
        let mut probs = vec![0.0; k_max as usize + 1];
        for &(k, p) in pairs {
            if p.is_nan() || !(0.0..=1.0 + PROB_TOL).contains(&p) {
                return Err(Error::InvalidLaw(format!(
                    "probability for key {k} is {p}, outside [0, 1]"
                )));
            }
            if probs[k as usize] != 0.0 {
                return Err(Error::InvalidLaw(format!("duplicate key {k}")));
            }
            probs[k as usize] = p;
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidLaw(format!(
                "probabilities sum to {total}, expected 1 within {PROB_TOL}"
            )));
        }
        let deterministic = probs.iter().any(|&p| (p - 1.0).abs() <= PROB_TOL);
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cdf.push(acc);
        }
        Ok(OffspringLaw {
            probs,
            cdf,
            deterministic,
            empty_trap: false,
        })
    }

    /// As [`OffspringLaw::from_pairs`], but rescales by the total mass first.
    /// For laws derived from the extinction probability, whose exact tables
    /// normalize algebraically but carry the float error of q.
    fn from_pairs_normalized(pairs: &[(u32, f64)]) -> Result<Self> {
        let total: f64 = pairs.iter().map(|&(_, p)| p).sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidLaw("table has no mass".into()));
        }
        let rescaled: Vec<(u32, f64)> = pairs.iter().map(|&(k, p)| (k, p / total)).collect();
        Self::from_pairs(&rescaled)
    }

    /// Law that must be usable as the base of a conditioned tree: mean > 1.
    pub fn supercritical(pairs: &[(u32, f64)]) -> Result<Self> {
        let law = Self::from_pairs(pairs)?;
        if law.mean() <= 1.0 {
            return Err(Error::InvalidLaw(format!(
                "mean {} is not > 1; supercritical law required",
                law.mean()
            )));
        }
        Ok(law)
    }

    pub fn prob(&self, k: u32) -> f64 {
        self.probs.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn k_max(&self) -> u32 {
        self.probs.len() as u32 - 1
    }

    pub fn support(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p > 0.0)
            .map(|(k, &p)| (k as u32, p))
    }

    /// Mean offspring count mu = f'(1).
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, &p)| k as f64 * p)
            .sum()
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn is_empty_trap(&self) -> bool {
        self.empty_trap
    }

    /// f(s) = sum p_k s^k, exact polynomial evaluation (Horner).
    pub fn pgf(&self, s: f64) -> Result<f64> {
        check_unit_interval(s)?;
        Ok(self.probs.iter().rev().fold(0.0, |acc, &p| acc * s + p))
    }

    /// f'(s) = sum k p_k s^(k-1).
    pub fn pgf_derivative(&self, s: f64) -> Result<f64> {
        check_unit_interval(s)?;
        Ok(self
            .probs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &p)| acc * s + k as f64 * p))
    }

    /// Smallest non-negative fixed point of f, by monotone iteration from 0.
    pub fn extinction_probability(&self) -> f64 {
        if self.prob(0) == 0.0 {
            return 0.0;
        }
        if self.mean() <= 1.0 {
            // critical or subcritical: the iteration converges only
            // algebraically, but the value is exactly 1 (p1 = 1 is caught by
            // the p0 = 0 branch above)
            return 1.0;
        }
        let mut s = 0.0;
        for _ in 0..FIXED_POINT_MAX_ITERS {
            let next = self.pgf(s).expect("s stays in [0,1]");
            if (next - s).abs() < FIXED_POINT_TOL {
                s = next;
                break;
            }
            s = next;
        }
        // Newton polish: the iterate error is amplified by 1/(1 - f'(q)) for
        // nearly critical laws.
        for _ in 0..2 {
            let fp = self.pgf_derivative(s).expect("s stays in [0,1]");
            if (fp - 1.0).abs() < 1e-9 {
                break;
            }
            let fs = self.pgf(s).expect("s stays in [0,1]");
            s = (s - (fs - s) / (fp - 1.0)).clamp(0.0, 1.0);
        }
        s
    }

    /// Critical bias `lambda_c = f'(q)`.
    pub fn lambda_c(&self) -> f64 {
        let q = self.extinction_probability();
        self.pgf_derivative(q).expect("q is in [0,1]")
    }

    /// Backbone offspring law: P(xi_g = k) = (1-q)^(k-1) sum_{j>=k} p_j C(j,k) q^(j-k),
    /// the law of the surviving children of a backbone vertex. Support starts
    /// at 1 and the mean equals mu.
    pub fn backbone_law(&self) -> Result<OffspringLaw> {
        let q = self.extinction_probability();
        if q >= 1.0 - PROB_TOL {
            return Err(Error::Domain(
                "extinction probability is 1; no backbone exists".into(),
            ));
        }
        let k_max = self.k_max();
        let mut pairs = Vec::new();
        for k in 1..=k_max {
            let mut p = 0.0;
            for (j, pj) in self.support() {
                if j >= k {
                    p += pj * binomial(j, k) * q.powi((j - k) as i32);
                }
            }
            p *= (1.0 - q).powi(k as i32 - 1);
            if p > 0.0 {
                pairs.push((k, p));
            }
        }
        OffspringLaw::from_pairs_normalized(&pairs)
    }

    /// Trap offspring law: P(xi_h = k) = p_k q^(k-1), the subcritical law with
    /// mean `lambda_c`. When p0 = 0 there are no traps and the degenerate law
    /// {0: 1} is returned with its empty flag set.
    pub fn trap_law(&self) -> OffspringLaw {
        let q = self.extinction_probability();
        if self.prob(0) == 0.0 || q == 0.0 {
            let mut law = OffspringLaw::from_pairs(&[(0, 1.0)]).expect("valid point mass");
            law.empty_trap = true;
            return law;
        }
        let pairs: Vec<(u32, f64)> = self
            .support()
            .map(|(k, p)| (k, p * q.powi(k as i32 - 1)))
            .collect();
        OffspringLaw::from_pairs_normalized(&pairs).expect("h normalizes since f(q) = q")
    }

    /// Offspring law of a vertex of the tree conditioned to survive:
    /// P(xi = k) = p_k (1 - q^k) / (1 - q).
    pub fn conditioned_root_law(&self) -> Result<OffspringLaw> {
        let q = self.extinction_probability();
        if q >= 1.0 - PROB_TOL {
            return Err(Error::Domain(
                "extinction probability is 1; conditioning on survival is degenerate".into(),
            ));
        }
        if q == 0.0 {
            return Ok(self.clone());
        }
        let pairs: Vec<(u32, f64)> = self
            .support()
            .filter(|&(k, _)| k > 0)
            .map(|(k, p)| (k, p * (1.0 - q.powi(k as i32)) / (1.0 - q)))
            .collect();
        OffspringLaw::from_pairs_normalized(&pairs)
    }

    /// Draws one offspring count by inverse CDF over the finite support.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        // partition_point returns the count of entries <= u, which is the
        // smallest k with cdf[k] > u.
        let k = self.cdf.partition_point(|&c| c <= u);
        k.min(self.probs.len() - 1) as u32
    }
}

fn check_unit_interval(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("pgf argument {s} outside [0, 1]")));
    }
    Ok(())
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}
