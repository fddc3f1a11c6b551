//! Exact arithmetic in the prime field Z_d for odd primes d.
//!
//! Everything downstream (phase exponents, coefficient tables, Gauss sums)
//! reduces integers mod d before they ever touch floating point, so this
//! module is the single place where modular arithmetic lives.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZmodError {
    #[error("dimension {0} is not an odd prime >= 3")]
    NotPrime(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("operation requires d > 3 (got d = {0})")]
    UnsupportedDim(u64),
}

/// Deterministic primality check by trial division. Dimensions here are
/// small (d <= 1000 in practice), so nothing fancier is warranted.
fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut k = 3;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 2;
    }
    true
}

/// An odd prime dimension d >= 3, validated at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeDim(u64);

impl PrimeDim {
    pub fn new(d: u64) -> Result<Self, ZmodError> {
        if d >= 3 && d % 2 == 1 && is_prime(d) {
            Ok(PrimeDim(d))
        } else {
            Err(ZmodError::NotPrime(d))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// Reduce an integer into [0, d) and wrap it as a field element.
    /// Negative inputs are folded in, matching the way -1, 2^{-1}x, etc.
    /// are written as field elements.
    #[inline]
    pub fn elem(self, v: i64) -> FieldElem {
        FieldElem {
            value: v.rem_euclid(self.0 as i64) as u64,
            dim: self,
        }
    }

    pub fn elems(self) -> impl Iterator<Item = FieldElem> {
        (0..self.0).map(move |v| FieldElem { value: v, dim: self })
    }

    /// The canonical half inverse 2^{-1} mod d.
    #[inline]
    pub fn half_inv(self) -> FieldElem {
        self.elem(self.0.div_ceil(2) as i64)
    }
}

impl TryFrom<u64> for PrimeDim {
    type Error = ZmodError;
    fn try_from(v: u64) -> Result<Self, Self::Error> {
        PrimeDim::new(v)
    }
}

impl From<PrimeDim> for u64 {
    fn from(d: PrimeDim) -> u64 {
        d.0
    }
}

impl fmt::Display for PrimeDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An element of Z_d, always stored reduced into [0, d).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u64,
    dim: PrimeDim,
}

impl FieldElem {
    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn dim(self) -> PrimeDim {
        self.dim
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    /// Modular exponentiation by repeated squaring.
    pub fn pow(self, mut e: u64) -> FieldElem {
        let d = self.dim.0;
        let mut base = self.value % d;
        let mut acc: u64 = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, base, d);
            }
            base = mulmod(base, base, d);
            e >>= 1;
        }
        FieldElem { value: acc, dim: self.dim }
    }

    /// Multiplicative inverse via Fermat: a^{d-2} mod d.
    pub fn inv(self) -> Result<FieldElem, ZmodError> {
        if self.value == 0 {
            return Err(ZmodError::ZeroInverse);
        }
        Ok(self.pow(self.dim.0 - 2))
    }

    /// Legendre symbol by Euler's criterion: a^{(d-1)/2} mod d, mapped to
    /// {+1, -1, 0}.
    pub fn legendre(self) -> i32 {
        if self.value == 0 {
            return 0;
        }
        let r = self.pow((self.dim.0 - 1) / 2).value;
        if r == 1 {
            1
        } else {
            -1
        }
    }
}

#[inline]
fn mulmod(a: u64, b: u64, d: u64) -> u64 {
    ((a as u128 * b as u128) % d as u128) as u64
}

fn assert_same_dim(a: FieldElem, b: FieldElem) {
    assert_eq!(
        a.dim, b.dim,
        "field arithmetic between mismatched dimensions ({} vs {})",
        a.dim, b.dim
    );
}

impl Add for FieldElem {
    type Output = FieldElem;
    fn add(self, rhs: FieldElem) -> FieldElem {
        assert_same_dim(self, rhs);
        let d = self.dim.0;
        let mut s = self.value + rhs.value;
        if s >= d {
            s -= d;
        }
        FieldElem { value: s, dim: self.dim }
    }
}

impl Sub for FieldElem {
    type Output = FieldElem;
    fn sub(self, rhs: FieldElem) -> FieldElem {
        assert_same_dim(self, rhs);
        let d = self.dim.0;
        FieldElem {
            value: (self.value + d - rhs.value) % d,
            dim: self.dim,
        }
    }
}

impl Mul for FieldElem {
    type Output = FieldElem;
    fn mul(self, rhs: FieldElem) -> FieldElem {
        assert_same_dim(self, rhs);
        FieldElem {
            value: mulmod(self.value, rhs.value, self.dim.0),
            dim: self.dim,
        }
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        let d = self.dim.0;
        FieldElem {
            value: (d - self.value) % d,
            dim: self.dim,
        }
    }
}

/// The canonical cubic phase polynomial evaluated at k:
/// nu_k = 12^{-1} (k - 3k^2 + 2k^3) mod d. Requires d > 3 so that 12 is
/// invertible.
pub fn canonical_nu(k: FieldElem) -> Result<FieldElem, ZmodError> {
    let d = k.dim();
    if d.get() == 3 {
        return Err(ZmodError::UnsupportedDim(3));
    }
    let i12 = d.elem(12).inv()?;
    let three = d.elem(3);
    let two = d.elem(2);
    let k2 = k * k;
    let k3 = k2 * k;
    Ok(i12 * (k - three * k2 + two * k3))
}

/// A polynomial over Z_d, coefficients low degree first, always reduced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Poly {
    dim: PrimeDim,
    coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(dim: PrimeDim, coeffs: &[i64]) -> Poly {
        let mut c: Vec<u64> = coeffs.iter().map(|&v| dim.elem(v).value()).collect();
        while c.last() == Some(&0) {
            c.pop();
        }
        Poly { dim, coeffs: c }
    }

    /// nu_k = 12^{-1}(k - 3k^2 + 2k^3) as coefficients [0, 12^{-1}, -3*12^{-1}, 2*12^{-1}].
    pub fn canonical_cubic(dim: PrimeDim) -> Result<Poly, ZmodError> {
        if dim.get() == 3 {
            return Err(ZmodError::UnsupportedDim(3));
        }
        let i12 = dim.elem(12).inv()?;
        let c1 = i12.value() as i64;
        let c2 = (i12 * dim.elem(-3)).value() as i64;
        let c3 = (i12 * dim.elem(2)).value() as i64;
        Ok(Poly::new(dim, &[0, c1, c2, c3]))
    }

    pub fn dim(&self) -> PrimeDim {
        self.dim
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Degree after reduction mod d; None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn eval(&self, at: FieldElem) -> FieldElem {
        assert_eq!(at.dim(), self.dim, "polynomial evaluated at wrong dimension");
        let mut acc = self.dim.elem(0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * at + self.dim.elem(c as i64);
        }
        acc
    }
}
