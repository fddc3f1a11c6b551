//! Dense complex realizations of the Heisenberg-Weyl operators, the Fourier
//! matrix, the diagonal magic unitary, Bell states, and the bipartite
//! characteristic function in both direct-trace and closed forms.
//!
//! Matrices are plain row-major `Vec<Complex64>` buffers; at d <= 23 the
//! largest operator in play is 529 x 529, well within desk scale. Entries are
//! never truncated after products; every comparison goes through an explicit
//! tolerance.

use crate::nu::NuSpec;
use crate::zmod::{FieldElem, PrimeDim};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HwError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operation requires a cubic nu (d > 3)")]
    UnsupportedDim,
    #[error("no closed form for nu of degree {0}; only degree-3 polynomials have a Gauss-sum form")]
    NoClosedForm(usize),
}

/// omega^e for omega = exp(2*pi*i/d), with the exponent reduced mod d before
/// any floating-point work so large integer exponents cannot drift.
#[inline]
pub fn omega_pow(d: PrimeDim, e: i64) -> Complex64 {
    let r = e.rem_euclid(d.get() as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / d.get() as f64)
}

#[inline]
fn omega_pow_elem(e: FieldElem) -> Complex64 {
    omega_pow(e.dim(), e.value() as i64)
}

// ---------------------------------------------------------------------------
// ComplexMatrix
// ---------------------------------------------------------------------------

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let row = k * rhs.cols;
                let orow = i * rhs.cols;
                for j in 0..rhs.cols {
                    out.data[orow + j] += a * rhs.data[row + j];
                }
            }
        }
        out
    }

    pub fn dagger(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self.at(c, r).conj())
    }

    pub fn transpose(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self.at(c, r))
    }

    pub fn conj(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, self.cols, |r, c| self.at(r, c).conj())
    }

    pub fn scale(&self, s: Complex64) -> ComplexMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn kron(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.data[i * self.cols + j];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..rhs.rows {
                    let orow = (i * rhs.rows + k) * out.cols + j * rhs.cols;
                    let rrow = k * rhs.cols;
                    for l in 0..rhs.cols {
                        out.data[orow + l] += a * rhs.data[rrow + l];
                    }
                }
            }
        }
        out
    }

    /// Matrix power by repeated multiplication; exponents here are at most d.
    pub fn pow(&self, e: u64) -> ComplexMatrix {
        assert_eq!(self.rows, self.cols, "pow of non-square matrix");
        let mut out = ComplexMatrix::identity(self.rows);
        for _ in 0..e {
            out = out.matmul(self);
        }
        out
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        assert_eq!(self.cols, v.dim(), "apply dimension mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            let row = i * self.cols;
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self.data[row + j] * v.data[j];
            }
            *o = acc;
        }
        StateVector { data: out }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self.data[i * self.cols + i]).sum()
    }

    /// || M^dagger M - I ||_max
    pub fn unitarity_defect(&self) -> f64 {
        self.dagger()
            .matmul(self)
            .max_abs_diff(&ComplexMatrix::identity(self.cols))
    }

    /// || M - M^dagger ||_max
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.rows == self.cols && self.unitarity_defect() <= tol
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(&rhs.data) {
            *o += r;
        }
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(&rhs.data) {
            *o -= r;
        }
        out
    }
}

// ---------------------------------------------------------------------------
// StateVector
// ---------------------------------------------------------------------------

/// Dense complex state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    data: Vec<Complex64>,
}

impl StateVector {
    pub fn new(data: Vec<Complex64>) -> Self {
        StateVector { data }
    }

    pub fn zeros(dim: usize) -> Self {
        StateVector {
            data: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[k] = Complex64::new(1.0, 0.0);
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn at(&self, i: usize) -> Complex64 {
        self.data[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: Complex64) {
        self.data[i] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> StateVector {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        self.scale(Complex64::new(1.0 / n, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> StateVector {
        StateVector {
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// <self | rhs> with the conjugation on self.
    pub fn inner(&self, rhs: &StateVector) -> Complex64 {
        assert_eq!(self.dim(), rhs.dim(), "inner dimension mismatch");
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn add(&self, rhs: &StateVector) -> StateVector {
        assert_eq!(self.dim(), rhs.dim());
        StateVector {
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &StateVector) -> StateVector {
        assert_eq!(self.dim(), rhs.dim());
        StateVector {
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn dist(&self, rhs: &StateVector) -> f64 {
        self.sub(rhs).norm()
    }

    pub fn tensor(&self, rhs: &StateVector) -> StateVector {
        let mut out = Vec::with_capacity(self.dim() * rhs.dim());
        for a in &self.data {
            for b in &rhs.data {
                out.push(a * b);
            }
        }
        StateVector { data: out }
    }

    /// Apply `op` to the left factor of a vector on C^{da} (x) C^{db},
    /// i.e. (op (x) 1) |self>, without forming the Kronecker product. The
    /// operator may be rectangular (isometries grow the factor).
    pub fn apply_left(&self, op: &ComplexMatrix, da: usize, db: usize) -> StateVector {
        assert_eq!(self.dim(), da * db, "apply_left state dimension");
        assert_eq!(op.cols(), da, "apply_left shape");
        let ra = op.rows();
        let mut out = StateVector::zeros(ra * db);
        for a in 0..ra {
            for ap in 0..da {
                let w = op.at(a, ap);
                if w.norm_sqr() == 0.0 {
                    continue;
                }
                for b in 0..db {
                    out.data[a * db + b] += w * self.data[ap * db + b];
                }
            }
        }
        out
    }

    /// (1 (x) op) |self> on C^{da} (x) C^{db}; `op` may be rectangular.
    pub fn apply_right(&self, op: &ComplexMatrix, da: usize, db: usize) -> StateVector {
        assert_eq!(self.dim(), da * db, "apply_right state dimension");
        assert_eq!(op.cols(), db, "apply_right shape");
        let rb = op.rows();
        let mut out = StateVector::zeros(da * rb);
        for a in 0..da {
            for b in 0..rb {
                let mut acc = Complex64::new(0.0, 0.0);
                for bp in 0..db {
                    acc += op.at(b, bp) * self.data[a * db + bp];
                }
                out.data[a * rb + b] = acc;
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Heisenberg-Weyl operators
// ---------------------------------------------------------------------------

/// Phase-space index u = (x, z) of a displacement operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseIndex {
    pub x: FieldElem,
    pub z: FieldElem,
}

impl PhaseIndex {
    pub fn new(x: FieldElem, z: FieldElem) -> PhaseIndex {
        assert_eq!(x.dim(), z.dim(), "phase index components from different fields");
        PhaseIndex { x, z }
    }

    pub fn dim(&self) -> PrimeDim {
        self.x.dim()
    }
}

/// The cyclic shift X: |k> -> |k+1 mod d>.
pub fn shift_x(d: PrimeDim) -> ComplexMatrix {
    let n = d.get() as usize;
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        m.set((k + 1) % n, k, Complex64::new(1.0, 0.0));
    }
    m
}

/// The clock Z = diag(1, omega, ..., omega^{d-1}).
pub fn clock_z(d: PrimeDim) -> ComplexMatrix {
    let n = d.get() as usize;
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        m.set(k, k, omega_pow(d, k as i64));
    }
    m
}

/// The displacement operator T_{(x,z)} = omega^{2^{-1} x z} X^x Z^z, built
/// directly as a generalized permutation: T|k> = omega^{2^{-1}xz + zk} |k+x>.
pub fn displacement(u: PhaseIndex) -> ComplexMatrix {
    let d = u.dim();
    let n = d.get() as usize;
    let half = d.half_inv();
    let phase0 = half * u.x * u.z;
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let e = phase0 + u.z * d.elem(k as i64);
        m.set((k + u.x.value() as usize) % n, k, omega_pow_elem(e));
    }
    m
}

/// T_{(1,j)}, the canonical observables of the experiment.
pub fn canonical_observable(d: PrimeDim, j: u64) -> ComplexMatrix {
    displacement(PhaseIndex::new(d.elem(1), d.elem(j as i64)))
}

/// The Fourier matrix F[j][k] = omega^{jk} / sqrt(d).
pub fn fourier(d: PrimeDim) -> ComplexMatrix {
    let n = d.get() as usize;
    let s = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |j, k| {
        omega_pow(d, (j as i64) * (k as i64)) * s
    })
}

/// The diagonal magic unitary U_nu = sum_k omega^{nu_k} |k><k| for cubic nu.
/// The qutrit phases live in the Bell coefficients, not here.
pub fn magic_unitary(nu: &NuSpec) -> Result<ComplexMatrix, HwError> {
    let poly = match nu {
        NuSpec::Cubic(p) => p,
        NuSpec::Qutrit(_) => return Err(HwError::UnsupportedDim),
    };
    let d = poly.dim();
    let n = d.get() as usize;
    let mut m = ComplexMatrix::zeros(n, n);
    for k in d.elems() {
        m.set(
            k.value() as usize,
            k.value() as usize,
            omega_pow_elem(poly.eval(k)),
        );
    }
    Ok(m)
}

/// The maximally entangled state (1/sqrt(d)) sum_k |kk>.
pub fn bell_state(d: PrimeDim) -> StateVector {
    let n = d.get() as usize;
    let mut v = StateVector::zeros(n * n);
    let a = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    for k in 0..n {
        v.set(k * n + k, a);
    }
    v
}

/// The locally rotated Bell state (U (x) 1)|Phi+>: amplitudes
/// e^{i theta_k} / sqrt(d) on |kk>, where theta comes from `nu`
/// (omega^{nu_k} for cubic nu, the solved qutrit angles for d = 3).
pub fn rotated_bell_state(nu: &NuSpec) -> StateVector {
    let d = nu.dim();
    let n = d.get() as usize;
    let phases = nu.rotation_phases();
    let mut v = StateVector::zeros(n * n);
    let s = 1.0 / (n as f64).sqrt();
    for (k, &theta) in phases.iter().enumerate() {
        v.set(k * n + k, Complex64::from_polar(s, theta));
    }
    v
}

/// The bipartite characteristic function chi[psi]_{u,v} = <psi| T_u^dag (x) T_v^dag |psi>
/// evaluated by direct trace.
pub fn char_function(
    state: &StateVector,
    u: PhaseIndex,
    v: PhaseIndex,
) -> Result<Complex64, HwError> {
    let d = u.dim();
    assert_eq!(u.dim(), v.dim(), "phase indices from different fields");
    let n = d.get() as usize;
    if state.dim() != n * n {
        return Err(HwError::DimensionMismatch(format!(
            "state has dimension {}, expected d^2 = {}",
            state.dim(),
            n * n
        )));
    }
    let tu = displacement(u).dagger();
    let tv = displacement(v).dagger();
    let applied = state.apply_left(&tu, n, n).apply_right(&tv, n, n);
    Ok(state.inner(&applied))
}

/// Closed form of the characteristic function of the rotated Bell state for
/// cubic nu, via the quadratic Gauss sum. Branches:
///   x1 != x2            -> 0
///   x1 = x2 = 0         -> delta_{z1 + z2 = 0}  (generic k-sum branch)
///   x1 = x2 = x != 0    -> (eps_d / sqrt(d)) (Q|d) omega^{K - (4Q)^{-1} L^2},
/// with Q = 6 a c3, L = z1 + z2 - 4 a c2, K = 2a(c1 + a^2 c3), a = 2^{-1} x,
/// eps_d = 1 for d = 1 mod 4 and i for d = 3 mod 4, and (.|d) the Legendre
/// symbol.
pub fn char_closed_form(
    nu: &NuSpec,
    u: PhaseIndex,
    v: PhaseIndex,
) -> Result<Complex64, HwError> {
    let poly = match nu {
        NuSpec::Cubic(p) => p,
        NuSpec::Qutrit(_) => return Err(HwError::UnsupportedDim),
    };
    match poly.degree() {
        Some(3) => {}
        other => return Err(HwError::NoClosedForm(other.unwrap_or(0))),
    }
    let d = poly.dim();
    assert_eq!(u.dim(), d, "index dimension differs from nu dimension");
    assert_eq!(u.dim(), v.dim());
    if u.x != v.x {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let zeta = u.z + v.z;
    if u.x.is_zero() {
        return Ok(if zeta.is_zero() {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        });
    }
    let c = poly.coeffs();
    let c1 = d.elem(*c.get(1).unwrap_or(&0) as i64);
    let c2 = d.elem(*c.get(2).unwrap_or(&0) as i64);
    let c3 = d.elem(c[3] as i64);
    let a = d.half_inv() * u.x;
    let q = d.elem(6) * a * c3;
    let l = zeta - d.elem(4) * a * c2;
    let k = d.elem(2) * a * (c1 + a * a * c3);
    // sum_s omega^{Q s^2 + L s + K} = omega^K (Q|d) eps_d sqrt(d) omega^{-(4Q)^{-1} L^2}
    let gauss_exp = k - (d.elem(4) * q).inv().expect("Q != 0 for cubic nu") * l * l;
    let eps_d = if d.get() % 4 == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 1.0)
    };
    let leg = q.legendre() as f64;
    Ok(eps_d * leg / (d.get() as f64).sqrt() * omega_pow_elem(gauss_exp))
}
