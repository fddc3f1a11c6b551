//! The non-classical phase data behind the Bell operator: a cubic phase
//! polynomial over Z_d for d > 3, or the constrained real phase pair
//! (phi1, phi2) for d = 3.

use crate::zmod::{Poly, PrimeDim, ZmodError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NuError {
    #[error("nu must have degree >= 3 after reduction mod d (got degree {0:?})")]
    DegenerateDegree(Option<usize>),
    #[error("cubic nu requires d > 3")]
    CubicNeedsLargeDim,
    #[error("qutrit phases violate the defining constraints: {0}")]
    PhaseConstraint(String),
    #[error(transparent)]
    Zmod(#[from] ZmodError),
}

/// Which way the qutrit coefficient table is oriented. `Standard` is the
/// printed table (phi2 on the j+k = 1 anti-diagonal); `Reversed` mirrors it
/// (phi2 on j+k = 2), the "opposite orientation" choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Orientation {
    #[default]
    Standard,
    Reversed,
}

/// The qutrit phase pair, constrained by
/// phi1 - phi2 = 2*pi/3 (mod 2*pi) and 1 - sqrt(3) e^{3i phi1} = omega.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QutritPhases {
    pub phi1: f64,
    pub phi2: f64,
    #[serde(default)]
    pub orientation: Orientation,
}

const QUTRIT_TOL: f64 = 1e-9;

impl QutritPhases {
    /// The canonical solution phi1 = -pi/18, phi2 = -13*pi/18, materialized
    /// from exact rational multiples of pi. Both defining constraints are
    /// re-verified at 1e-12 on construction.
    pub fn solve() -> QutritPhases {
        let q = QutritPhases {
            phi1: rational_pi(-1, 18),
            phi2: rational_pi(-13, 18),
            orientation: Orientation::Standard,
        };
        q.check(1e-12).expect("canonical phases satisfy the constraints");
        q
    }

    pub fn new(phi1: f64, phi2: f64) -> Result<QutritPhases, NuError> {
        let q = QutritPhases { phi1, phi2, orientation: Orientation::Standard };
        q.check(QUTRIT_TOL)?;
        Ok(q)
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> QutritPhases {
        self.orientation = orientation;
        self
    }

    /// Residuals of the two defining constraints:
    /// |phi1 - phi2 - 2*pi/3 mod 2*pi| and |1 - sqrt(3) e^{3i phi1} - omega|.
    pub fn constraint_residuals(&self) -> (f64, f64) {
        let diff = self.phi1 - self.phi2 - 2.0 * PI / 3.0;
        let wrapped = (diff / (2.0 * PI)).round();
        let r1 = (diff - wrapped * 2.0 * PI).abs();
        let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let r2 = (Complex64::new(1.0, 0.0)
            - 3f64.sqrt() * Complex64::from_polar(1.0, 3.0 * self.phi1)
            - omega)
            .norm();
        (r1, r2)
    }

    pub fn check(&self, tol: f64) -> Result<(), NuError> {
        let (r1, r2) = self.constraint_residuals();
        if r1 > tol {
            return Err(NuError::PhaseConstraint(format!(
                "phi1 - phi2 != 2*pi/3 (residual {r1:.3e})"
            )));
        }
        if r2 > tol {
            return Err(NuError::PhaseConstraint(format!(
                "1 - sqrt(3) e^(3i phi1) != omega (residual {r2:.3e})"
            )));
        }
        Ok(())
    }

    /// phi as a function of the anti-diagonal index m = j + k mod 3.
    pub fn phi_of_m(&self, m: u64) -> f64 {
        let special = match self.orientation {
            Orientation::Standard => 1,
            Orientation::Reversed => 2,
        };
        if m % 3 == special {
            self.phi2
        } else {
            self.phi1
        }
    }

    /// The diagonal rotation angles theta_k of the qutrit Bell-state
    /// rotation, solved so that the state's characteristic function
    /// reproduces the coefficient table e^{i phi_m} / sqrt(3).
    ///
    /// With the canonical phases this comes out as (0, 4*pi/9, 2*pi/9):
    /// ninth-root-of-unity phases, the diagonal non-Clifford qutrit gate.
    pub fn rotation_phases(&self) -> [f64; 3] {
        // c_s = sum_m omega^{-ms} e^{i phi_m} / sqrt(3); the constraints make
        // each |c_s| = 1. Then theta_0 = 0, theta_1 = arg c_1, theta_2 = -arg c_2.
        let mut c = [Complex64::new(0.0, 0.0); 3];
        for (s, cs) in c.iter_mut().enumerate() {
            for m in 0..3u64 {
                let ang = -2.0 * PI * (m as f64) * (s as f64) / 3.0;
                *cs += Complex64::from_polar(1.0 / 3f64.sqrt(), ang + self.phi_of_m(m));
            }
        }
        debug_assert!(c.iter().all(|cs| (cs.norm() - 1.0).abs() < 1e-9));
        [0.0, c[1].arg(), -c[2].arg()]
    }
}

fn rational_pi(num: i64, den: i64) -> f64 {
    (num as f64) * PI / (den as f64)
}

/// The phase data nu parameterizing the Bell operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NuSpec {
    Cubic(Poly),
    Qutrit(QutritPhases),
}

impl NuSpec {
    /// The canonical choice: the degree-3 polynomial 12^{-1}(k - 3k^2 + 2k^3)
    /// for d > 3, or the solved (phi1, phi2) pair for d = 3.
    pub fn canonical(dim: PrimeDim) -> NuSpec {
        if dim.get() == 3 {
            NuSpec::Qutrit(QutritPhases::solve())
        } else {
            NuSpec::Cubic(Poly::canonical_cubic(dim).expect("d > 3"))
        }
    }

    /// A user-supplied polynomial nu. Rejected unless deg(nu) >= 3 after
    /// reduction; a lower degree collapses the coefficient table to delta
    /// functions and the experiment turns classical.
    pub fn cubic(poly: Poly) -> Result<NuSpec, NuError> {
        if poly.dim().get() == 3 {
            return Err(NuError::CubicNeedsLargeDim);
        }
        match poly.degree() {
            Some(deg) if deg >= 3 => Ok(NuSpec::Cubic(poly)),
            other => Err(NuError::DegenerateDegree(other)),
        }
    }

    /// Debug path: skip the degree validation. Exists so the degeneracy of
    /// low-degree nu can be demonstrated numerically; never use it for real
    /// runs.
    pub fn cubic_unchecked(poly: Poly) -> NuSpec {
        NuSpec::Cubic(poly)
    }

    pub fn qutrit(phi1: f64, phi2: f64) -> Result<NuSpec, NuError> {
        Ok(NuSpec::Qutrit(QutritPhases::new(phi1, phi2)?))
    }

    pub fn dim(&self) -> PrimeDim {
        match self {
            NuSpec::Cubic(p) => p.dim(),
            NuSpec::Qutrit(_) => PrimeDim::new(3).unwrap(),
        }
    }

    /// True when the phase data matches the dimension (cubic for d > 3,
    /// phases for d = 3). Constructors enforce this; kept for loaded data.
    pub fn matches_dim(&self, dim: PrimeDim) -> bool {
        self.dim() == dim
    }

    /// Short identifier used in reports.
    pub fn id(&self) -> String {
        match self {
            NuSpec::Cubic(p) => {
                let canonical = Poly::canonical_cubic(p.dim()).ok().as_ref() == Some(p);
                if canonical {
                    format!("canonical-cubic(d={})", p.dim())
                } else {
                    format!("cubic{:?}(d={})", p.coeffs(), p.dim())
                }
            }
            NuSpec::Qutrit(q) => format!(
                "qutrit(phi1={:.6}, phi2={:.6}, {:?})",
                q.phi1, q.phi2, q.orientation
            ),
        }
    }

    /// The local rotation angles of the reference Bell state: 2*pi*nu_k/d for
    /// polynomial nu, the solved theta_k for the qutrit pair.
    pub fn rotation_phases(&self) -> Vec<f64> {
        match self {
            NuSpec::Cubic(p) => {
                let d = p.dim();
                d.elems()
                    .map(|k| 2.0 * PI * (p.eval(k).value() as f64) / (d.get() as f64))
                    .collect()
            }
            NuSpec::Qutrit(q) => q.rotation_phases().to_vec(),
        }
    }
}
