use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::homcount::SubgroupCensus;

/// A polynomial `P(z) = Σ_{i=1}^q c_i z^i` with `c_1 = 1`, `c_q = 1/q`,
/// `c_i ≥ 0` and `c_i = 0` unless `i | q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyDescriptor {
    /// `coeffs[i-1] = c_i`.
    coeffs: Vec<BigRational>,
}

impl PolyDescriptor {
    pub fn new(coeffs: Vec<BigRational>) -> Result<Self> {
        let q = coeffs.len();
        if q == 0 {
            return Err(Error::Domain("empty polynomial".into()));
        }
        if !coeffs[0].is_one() {
            return Err(Error::Domain(format!("c_1 must be 1, got {}", coeffs[0])));
        }
        let last = BigRational::new(BigInt::one(), BigInt::from(q));
        if coeffs[q - 1] != last {
            return Err(Error::Domain(format!("c_q must be 1/{q}, got {}", coeffs[q - 1])));
        }
        for (i, c) in coeffs.iter().enumerate() {
            let d = i + 1;
            if c.is_negative() {
                return Err(Error::Domain(format!("c_{d} = {c} is negative")));
            }
            if q % d != 0 && !c.is_zero() {
                return Err(Error::Domain(format!("c_{d} = {c} is nonzero but {d} does not divide {q}")));
            }
        }
        Ok(PolyDescriptor { coeffs })
    }

    /// `P_G(z) = Σ_d s_G(d)/d z^d`.
    pub fn from_census(census: &SubgroupCensus) -> Result<Self> {
        let q = census.group_order();
        let coeffs = (1..=q)
            .map(|d| BigRational::new(BigInt::from(census.count(d)), BigInt::from(d)))
            .collect();
        PolyDescriptor::new(coeffs)
    }

    /// `Σ_{k | m} z^k / k`, the polynomial of the cyclic group of order `m`.
    pub fn cyclic(m: usize) -> Result<Self> {
        let coeffs = (1..=m)
            .map(|d| if m % d == 0 { BigRational::new(1.into(), d.into()) } else { BigRational::zero() })
            .collect();
        PolyDescriptor::new(coeffs)
    }

    pub fn q(&self) -> usize {
        self.coeffs.len()
    }

    /// `c_i` for `1 ≤ i ≤ q`.
    pub fn coeff(&self, i: usize) -> &BigRational {
        &self.coeffs[i - 1]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Nonzero terms as `(i, c_i)`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &BigRational)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i + 1, c))
    }
}

#[derive(Serialize)]
struct PolyJson {
    q: usize,
    coeffs: Vec<String>,
}

impl Serialize for PolyDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson { q: self.q(), coeffs: self.coeffs.iter().map(|c| c.to_string()).collect() }.serialize(s)
    }
}
