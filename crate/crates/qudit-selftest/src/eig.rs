//! Dense Hermitian eigensolver (cyclic complex Jacobi).
//!
//! The matrices here top out at 529 x 529 (d = 23), so a quadratically
//! convergent Jacobi sweep is plenty; no external linear-algebra backend is
//! pulled in for one routine.

use crate::hw::ComplexMatrix;
use num_complex::Complex64;

/// All eigenvalues of a Hermitian matrix, ascending. Panics if the input is
/// not square or not Hermitian to ~1e-10 of its scale.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.rows();
    assert_eq!(n, m.cols(), "eigensolver needs a square matrix");
    let scale = m.max_abs().max(1.0);
    assert!(
        m.hermiticity_defect() <= 1e-10 * scale,
        "eigensolver input is not Hermitian (defect {:.3e})",
        m.hermiticity_defect()
    );

    let mut w: Vec<Complex64> = m.data().to_vec();
    let idx = |r: usize, c: usize| r * n + c;

    let off = |w: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    s += w[idx(r, c)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let tol = 1e-13 * scale * (n as f64);
    for _sweep in 0..60 {
        if off(&w) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = w[idx(p, q)];
                let bm = beta.norm();
                if bm <= 1e-300 {
                    continue;
                }
                let alpha = w[idx(p, p)].re;
                let gamma = w[idx(q, q)].re;
                let phase = Complex64::from_polar(1.0, beta.arg());
                let tau = (gamma - alpha) / (2.0 * bm);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // A <- U^dag A U with U restricted to the (p, q) plane:
                // U[p][p] = c, U[p][q] = s, U[q][p] = -s e^{-i phi}, U[q][q] = c e^{-i phi}.
                for r in 0..n {
                    let ap = w[idx(r, p)];
                    let aq = w[idx(r, q)];
                    w[idx(r, p)] = c * ap - s * phase.conj() * aq;
                    w[idx(r, q)] = s * ap + c * phase.conj() * aq;
                }
                for cidx in 0..n {
                    let ap = w[idx(p, cidx)];
                    let aq = w[idx(q, cidx)];
                    w[idx(p, cidx)] = c * ap - s * phase * aq;
                    w[idx(q, cidx)] = s * ap + c * phase * aq;
                }
            }
        }
    }

    let mut eigs: Vec<f64> = (0..n).map(|i| w[idx(i, i)].re).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue(m: &ComplexMatrix) -> f64 {
    *hermitian_eigenvalues(m)
        .last()
        .expect("nonempty matrix")
}

/// Spectral radius of a Hermitian matrix (max |eigenvalue|).
pub fn spectral_radius_hermitian(m: &ComplexMatrix) -> f64 {
    let e = hermitian_eigenvalues(m);
    e.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hw::fourier;
    use crate::zmod::PrimeDim;

    #[test]
    fn recovers_known_spectrum_under_unitary_conjugation() {
        let d = PrimeDim::new(7).unwrap();
        let f = fourier(d);
        let spectrum = [-3.0, -1.5, 0.0, 0.25, 1.0, 2.0, 10.0];
        let mut diag = ComplexMatrix::zeros(7, 7);
        for (i, &v) in spectrum.iter().enumerate() {
            diag.set(i, i, Complex64::new(v, 0.0));
        }
        let a = f.matmul(&diag).matmul(&f.dagger());
        let eigs = hermitian_eigenvalues(&a);
        let mut want = spectrum.to_vec();
        want.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (got, expect) in eigs.iter().zip(want.iter()) {
            assert!((got - expect).abs() < 1e-10, "{got} vs {expect}");
        }
        assert!((max_eigenvalue(&a) - 10.0).abs() < 1e-10);
    }

    #[test]
    fn handles_degenerate_eigenvalues() {
        let d = PrimeDim::new(5).unwrap();
        let f = fourier(d);
        let mut diag = ComplexMatrix::zeros(5, 5);
        for (i, v) in [2.0, 2.0, 2.0, -1.0, -1.0].iter().enumerate() {
            diag.set(i, i, Complex64::new(*v, 0.0));
        }
        let a = f.matmul(&diag).matmul(&f.dagger());
        let eigs = hermitian_eigenvalues(&a);
        let want = [-1.0, -1.0, 2.0, 2.0, 2.0];
        for (got, expect) in eigs.iter().zip(want.iter()) {
            assert!((got - expect).abs() < 1e-10);
        }
    }
}
