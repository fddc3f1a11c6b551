//! Quantum strategies: a bipartite state plus two families of order-d
//! unitary observables, their Bell values, seeded noise models, and the
//! state-level residuals the robustness analysis tracks.

use crate::bell::BellCoeffs;
use crate::eig::spectral_radius_hermitian;
use crate::hw::{canonical_observable, omega_pow, rotated_bell_state, ComplexMatrix, StateVector};
use crate::nu::NuSpec;
use crate::zmod::PrimeDim;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("observable {0} violates a strategy invariant: {1}")]
    BadObservable(usize, String),
    #[error("state is not normalized (norm {0})")]
    BadState(f64),
    #[error("neither conjugation convention reaches the Bell value d(d-1) (as-is: {0}, conjugated: {1})")]
    ConventionUnresolvable(f64, f64),
    #[error("operation requires d = 3 (got d = {0})")]
    WrongDim(u64),
}

/// Which convention the ideal constructor settled on for Bob's operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConjugationConvention {
    AsIs,
    BobConjugated,
}

/// A bipartite strategy: |psi> on H_A (x) H_B together with d observables
/// per party. Each observable is unitary with (op)^d = 1, so its eigenvalues
/// are the d-th roots of unity.
#[derive(Debug, Clone)]
pub struct Strategy {
    pub d: PrimeDim,
    pub psi: StateVector,
    pub a_ops: Vec<ComplexMatrix>,
    pub b_ops: Vec<ComplexMatrix>,
    pub convention: ConjugationConvention,
}

const UNITARITY_TOL: f64 = 1e-10;
const ORDER_TOL: f64 = 1e-9;
const NORM_TOL: f64 = 1e-10;

impl Strategy {
    pub fn new(
        d: PrimeDim,
        psi: StateVector,
        a_ops: Vec<ComplexMatrix>,
        b_ops: Vec<ComplexMatrix>,
    ) -> Result<Strategy, StrategyError> {
        let s = Strategy {
            d,
            psi,
            a_ops,
            b_ops,
            convention: ConjugationConvention::AsIs,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn dim_a(&self) -> usize {
        self.a_ops[0].rows()
    }

    pub fn dim_b(&self) -> usize {
        self.b_ops[0].rows()
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        let d = self.d.get() as usize;
        if self.a_ops.len() != d || self.b_ops.len() != d {
            return Err(StrategyError::DimensionMismatch(format!(
                "expected {} observables per party, got {} and {}",
                d,
                self.a_ops.len(),
                self.b_ops.len()
            )));
        }
        for (idx, op) in self.a_ops.iter().chain(self.b_ops.iter()).enumerate() {
            if op.rows() != op.cols() {
                return Err(StrategyError::BadObservable(idx, "not square".into()));
            }
            let u = op.unitarity_defect();
            if u > UNITARITY_TOL {
                return Err(StrategyError::BadObservable(
                    idx,
                    format!("unitarity defect {u:.3e}"),
                ));
            }
            let o = op
                .pow(self.d.get())
                .max_abs_diff(&ComplexMatrix::identity(op.rows()));
            if o > ORDER_TOL {
                return Err(StrategyError::BadObservable(
                    idx,
                    format!("(op)^d - 1 defect {o:.3e}"),
                ));
            }
        }
        let expect = self.dim_a() * self.dim_b();
        if self.psi.dim() != expect {
            return Err(StrategyError::DimensionMismatch(format!(
                "psi has dimension {}, expected dim_A * dim_B = {}",
                self.psi.dim(),
                expect
            )));
        }
        let n = self.psi.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(StrategyError::BadState(n));
        }
        Ok(())
    }

    /// (A (x) 1) |psi>
    pub fn apply_a(&self, op: &ComplexMatrix) -> StateVector {
        self.psi.apply_left(op, self.dim_a(), self.dim_b())
    }

    /// (1 (x) B) |psi>
    pub fn apply_b(&self, op: &ComplexMatrix) -> StateVector {
        self.psi.apply_right(op, self.dim_a(), self.dim_b())
    }
}

/// The reference strategy: psi the rotated Bell state, A_j = B_j = T_{(1,j)}.
/// If that convention misses the Bell value d(d-1), Bob's operators are
/// retried entrywise-conjugated; if neither lands within 1e-6 the
/// construction fails loudly.
pub fn ideal_strategy(d: PrimeDim, nu: &NuSpec) -> Result<Strategy, StrategyError> {
    let psi = rotated_bell_state(nu);
    let ops: Vec<ComplexMatrix> = (0..d.get()).map(|j| canonical_observable(d, j)).collect();
    let mut s = Strategy {
        d,
        psi,
        a_ops: ops.clone(),
        b_ops: ops.clone(),
        convention: ConjugationConvention::AsIs,
    };
    let target = (d.get() * (d.get() - 1)) as f64;
    let v_asis = bell_value(&s, nu);
    if (v_asis - target).abs() <= 1e-9 {
        return Ok(s);
    }
    s.b_ops = ops.iter().map(|op| op.conj()).collect();
    s.convention = ConjugationConvention::BobConjugated;
    let v_conj = bell_value(&s, nu);
    if (v_conj - target).abs() <= 1e-6 {
        return Ok(s);
    }
    Err(StrategyError::ConventionUnresolvable(v_asis, v_conj))
}

/// Re <psi| B |psi> for the Bell operator assembled from the strategy's own
/// observables. The imaginary part is a sanity diagnostic; see
/// [`bell_value_full`].
pub fn bell_value(s: &Strategy, nu: &NuSpec) -> f64 {
    bell_value_full(s, nu).0
}

/// (real part, imaginary part). |imag| beyond ~1e-9 signals an input that is
/// not a valid strategy/coefficient pairing.
pub fn bell_value_full(s: &Strategy, nu: &NuSpec) -> (f64, f64) {
    let coeffs = BellCoeffs::build(nu);
    let d = s.d.get();
    // compensated accumulation; the table has d^2 (d-1) complex terms
    let mut re = Kahan::default();
    let mut im = Kahan::default();
    for n in 1..d {
        let a_pows: Vec<ComplexMatrix> = s.a_ops.iter().map(|op| op.pow(n)).collect();
        let b_pows: Vec<ComplexMatrix> = s.b_ops.iter().map(|op| op.pow(n)).collect();
        let lefts: Vec<StateVector> = a_pows.iter().map(|op| s.apply_a(&op.dagger())).collect();
        let rights: Vec<StateVector> = b_pows.iter().map(|op| s.apply_b(op)).collect();
        for j in 0..d {
            for k in 0..d {
                let term = coeffs.g(j, k, n) * lefts[j as usize].inner(&rights[k as usize]);
                re.add(term.re);
                im.add(term.im);
            }
        }
    }
    (re.sum(), im.sum())
}

#[derive(Default, Clone, Copy)]
struct Kahan {
    s: f64,
    c: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.s + y;
        self.c = (t - self.s) - y;
        self.s = t;
    }

    #[inline]
    fn sum(&self) -> f64 {
        self.s
    }
}

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    StatePerturbation,
    ObservableConjugation,
    Both,
}

/// Seeded, reproducible noise. All randomness flows from the single 64-bit
/// seed through ChaCha12 (`rand_chacha::ChaCha12Rng`), so a (kind, magnitude,
/// seed) triple pins the perturbed strategy exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub magnitude: f64,
    pub seed: u64,
}

/// Apply the noise model. Magnitude 0 returns the input strategy bit-exactly.
///
/// - `StatePerturbation`: psi <- normalize(psi + magnitude * eta) for a
///   seeded random unit vector eta.
/// - `ObservableConjugation`: op <- e^{iH} op e^{-iH} with an independent
///   seeded random Hermitian H of operator norm magnitude per observable
///   (spectrum, unitarity and order d are preserved).
pub fn perturb(s: &Strategy, noise: &NoiseSpec) -> Strategy {
    if noise.magnitude == 0.0 {
        return s.clone();
    }
    let mut rng = ChaCha12Rng::seed_from_u64(noise.seed);
    let mut out = s.clone();
    if matches!(noise.kind, NoiseKind::ObservableConjugation | NoiseKind::Both) {
        for op in out.a_ops.iter_mut().chain(out.b_ops.iter_mut()) {
            let u = random_conjugator(op.rows(), noise.magnitude, &mut rng);
            *op = u.matmul(op).matmul(&u.dagger());
        }
    }
    if matches!(noise.kind, NoiseKind::StatePerturbation | NoiseKind::Both) {
        let eta = random_unit_vector(out.psi.dim(), &mut rng);
        out.psi = out
            .psi
            .add(&eta.scale(Complex64::new(noise.magnitude, 0.0)))
            .normalized();
    }
    out
}

fn random_unit_vector(dim: usize, rng: &mut ChaCha12Rng) -> StateVector {
    let mut data = Vec::with_capacity(dim);
    for _ in 0..dim {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        data.push(Complex64::new(re, im));
    }
    StateVector::new(data).normalized()
}

/// e^{iH} for a random Hermitian H scaled to operator norm `magnitude`.
fn random_conjugator(dim: usize, magnitude: f64, rng: &mut ChaCha12Rng) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            g.set(r, c, Complex64::new(re, im));
        }
    }
    let mut h = ComplexMatrix::from_fn(dim, dim, |r, c| {
        (g.at(r, c) + g.at(c, r).conj()) * 0.5
    });
    let radius = spectral_radius_hermitian(&h);
    if radius > 0.0 {
        h = h.scale(Complex64::new(magnitude / radius, 0.0));
    }
    exp_i_hermitian(&h)
}

/// Matrix exponential e^{iH} by power series; the inputs here have operator
/// norm <= magnitude <= O(1), so the series converges in a few dozen terms.
fn exp_i_hermitian(h: &ComplexMatrix) -> ComplexMatrix {
    let n = h.rows();
    let ih = h.scale(Complex64::new(0.0, 1.0));
    let mut acc = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..200 {
        term = term.matmul(&ih).scale(Complex64::new(1.0 / k as f64, 0.0));
        acc = &acc + &term;
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Residuals
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledNorm {
    pub n: u64,
    pub j: u64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairNorm {
    pub k: u64,
    pub l: u64,
    pub n: u64,
    pub np: u64,
    pub value: f64,
}

/// Everything the robustness chain bounds, evaluated on a concrete strategy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Bell deficit d(d-1) - <B_d>.
    pub epsilon: f64,
    /// |Im <B_d>|; anything beyond ~1e-9 flags a broken pairing.
    pub imag_defect: f64,
    /// ||C_{n,j} psi|| for n = 1..(d-1)/2.
    pub c_norms: Vec<LabeledNorm>,
    /// ||D_{n,j} psi||.
    pub d_norms: Vec<LabeledNorm>,
    /// ||(A_k^n A_l^n' - omega^{2^{-1}nn'(k-l)} A_{(n+n')^{-1}(nk+n'l)}^{n+n'}) psi||
    pub pair_residuals_a: Vec<PairNorm>,
    pub pair_residuals_b: Vec<PairNorm>,
    /// ||(A_k^n A_l^n' - omega^{nn'(k-l)} A_l^n' A_k^n) psi||
    pub commutator_residuals_a: Vec<PairNorm>,
    pub commutator_residuals_b: Vec<PairNorm>,
    /// gamma(nu) = max_{n,j} sum_k |g(j,k,n)|.
    pub gamma: f64,
    pub max_c_norm: f64,
    pub max_d_norm: f64,
    pub max_pair_residual: f64,
    pub max_commutator_residual: f64,
    /// max ||C psi|| and ||D psi|| <= sqrt(eps) + 1e-9
    pub c_bound_ok: bool,
    /// max pair residual <= sqrt(d) sqrt(eps) (gamma + 2) + 1e-9
    pub pair_bound_ok: bool,
    /// max commutator residual <= 2 sqrt(d) sqrt(eps) (gamma + 2) + 1e-9
    pub commutator_bound_ok: bool,
}

const BOUND_SLACK: f64 = 1e-9;

pub fn residuals(s: &Strategy, nu: &NuSpec) -> ResidualReport {
    let coeffs = BellCoeffs::build(nu);
    let d = s.d.get();
    let (re, im) = bell_value_full(s, nu);
    let epsilon = (d * (d - 1)) as f64 - re;
    let sqrt_eps = epsilon.max(0.0).sqrt();
    let gamma = coeffs.gamma();

    let a_pows: Vec<Vec<ComplexMatrix>> = (0..d)
        .map(|n| s.a_ops.iter().map(|op| op.pow(n)).collect())
        .collect();
    let b_pows: Vec<Vec<ComplexMatrix>> = (0..d)
        .map(|n| s.b_ops.iter().map(|op| op.pow(n)).collect())
        .collect();

    // witness families, applied directly to psi
    let mut c_norms = Vec::new();
    let mut d_norms = Vec::new();
    for n in 1..=(d - 1) / 2 {
        for j in 0..d {
            let mut cv = s.apply_a(&a_pows[n as usize][j as usize]);
            let mut dv = s.apply_b(&b_pows[n as usize][j as usize]);
            for k in 0..d {
                let gc = coeffs.g(j, k, n).conj();
                let bdag = b_pows[n as usize][k as usize].dagger();
                let adag = a_pows[n as usize][k as usize].dagger();
                cv = cv.sub(&s.apply_b(&bdag).scale(gc));
                dv = dv.sub(&s.apply_a(&adag).scale(gc));
            }
            c_norms.push(LabeledNorm { n, j, value: cv.norm() });
            d_norms.push(LabeledNorm { n, j, value: dv.norm() });
        }
    }

    let half = s.d.half_inv();
    let pair_target_index = |n: u64, np: u64, k: u64, l: u64| -> u64 {
        let inv = s.d.elem((n + np) as i64).inv().expect("n + n' != 0");
        (inv * s.d.elem((n * k + np * l) as i64)).value()
    };

    let mut pair_a = Vec::new();
    let mut pair_b = Vec::new();
    let mut comm_a = Vec::new();
    let mut comm_b = Vec::new();
    for n in 1..d {
        for np in 1..d {
            for k in 0..d {
                for l in 0..d {
                    // omega-commutator form, defined for all n, n' != 0
                    let cph = omega_pow(
                        s.d,
                        (s.d.elem((n * np) as i64) * (s.d.elem(k as i64) - s.d.elem(l as i64)))
                            .value() as i64,
                    );
                    let ca = &a_pows[n as usize][k as usize]
                        .matmul(&a_pows[np as usize][l as usize])
                        - &a_pows[np as usize][l as usize]
                            .matmul(&a_pows[n as usize][k as usize])
                            .scale(cph);
                    let cb = &b_pows[n as usize][k as usize]
                        .matmul(&b_pows[np as usize][l as usize])
                        - &b_pows[np as usize][l as usize]
                            .matmul(&b_pows[n as usize][k as usize])
                            .scale(cph);
                    comm_a.push(PairNorm { k, l, n, np, value: s.apply_a(&ca).norm() });
                    comm_b.push(PairNorm { k, l, n, np, value: s.apply_b(&cb).norm() });

                    // grade-raising pair form, needs n + n' != 0
                    if (n + np) % d != 0 {
                        let m = pair_target_index(n, np, k, l);
                        let pph = omega_pow(
                            s.d,
                            (half
                                * s.d.elem((n * np) as i64)
                                * (s.d.elem(k as i64) - s.d.elem(l as i64)))
                            .value() as i64,
                        );
                        let pa = &a_pows[n as usize][k as usize]
                            .matmul(&a_pows[np as usize][l as usize])
                            - &a_pows[((n + np) % d) as usize][m as usize].scale(pph);
                        let pb = &b_pows[n as usize][k as usize]
                            .matmul(&b_pows[np as usize][l as usize])
                            - &b_pows[((n + np) % d) as usize][m as usize].scale(pph);
                        pair_a.push(PairNorm { k, l, n, np, value: s.apply_a(&pa).norm() });
                        pair_b.push(PairNorm { k, l, n, np, value: s.apply_b(&pb).norm() });
                    }
                }
            }
        }
    }

    let max_of = |v: &[LabeledNorm]| v.iter().map(|x| x.value).fold(0.0, f64::max);
    let max_pair_of = |v: &[PairNorm]| v.iter().map(|x| x.value).fold(0.0, f64::max);
    let max_c_norm = max_of(&c_norms);
    let max_d_norm = max_of(&d_norms);
    let max_pair_residual = max_pair_of(&pair_a).max(max_pair_of(&pair_b));
    let max_commutator_residual = max_pair_of(&comm_a).max(max_pair_of(&comm_b));
    let sd = (d as f64).sqrt();

    ResidualReport {
        epsilon,
        imag_defect: im.abs(),
        c_bound_ok: max_c_norm.max(max_d_norm) <= sqrt_eps + BOUND_SLACK,
        pair_bound_ok: max_pair_residual <= sd * sqrt_eps * (gamma + 2.0) + BOUND_SLACK,
        commutator_bound_ok: max_commutator_residual
            <= 2.0 * sd * sqrt_eps * (gamma + 2.0) + BOUND_SLACK,
        c_norms,
        d_norms,
        pair_residuals_a: pair_a,
        pair_residuals_b: pair_b,
        commutator_residuals_a: comm_a,
        commutator_residuals_b: comm_b,
        gamma,
        max_c_norm,
        max_d_norm,
        max_pair_residual,
        max_commutator_residual,
    }
}

// ---------------------------------------------------------------------------
// Qutrit commutation elements
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundedResidual {
    pub label: String,
    pub value: f64,
    pub bound: f64,
    pub ok: bool,
}

fn bounded(label: impl Into<String>, value: f64, bound: f64) -> BoundedResidual {
    BoundedResidual {
        label: label.into(),
        value,
        bound,
        ok: value <= bound + BOUND_SLACK,
    }
}

/// The d = 3 commutation-element diagnostics for one party.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QutritPartyReport {
    /// e.g. ||[{B_0^2, B_1^2} + B_2] psi|| <= 3 sqrt(eps) (sqrt(3)+2) and the
    /// conjugate forms ||[{B_0, B_1} + B_2^2] psi||.
    pub anticommutators: Vec<BoundedResidual>,
    /// ||(Q + Q^dag + 1) psi|| <= 6 sqrt(eps) (sqrt(3)+2)
    pub q_unital: BoundedResidual,
    /// ||[B_j, Q] psi|| <= 12 sqrt(eps) (sqrt(3)+2)
    pub q_commutants: Vec<BoundedResidual>,
    /// ||(Q^3 - 1) psi|| <= 36 sqrt(eps) (sqrt(3)+2)
    pub q_cube: BoundedResidual,
    /// best k* in {1, 2} and ||(Q - omega^{k*}) psi|| <= 36 sqrt(eps) (sqrt(3)+2)
    pub k_star: u64,
    pub q_scalar: BoundedResidual,
    /// ||(Q - Q') psi|| etc <= 9 sqrt(eps) (sqrt(3)+2)
    pub q_pairwise: Vec<BoundedResidual>,
    /// ||(B_i B_j - omega^{k*} B_j B_i) psi|| <= 9 sqrt(eps) (sqrt(3)+2)
    pub twisted: Vec<BoundedResidual>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QutritElementsReport {
    pub epsilon: f64,
    /// Theorem regime: eps < (72 (sqrt(3)+2))^{-2}.
    pub in_regime: bool,
    pub alice: QutritPartyReport,
    pub bob: QutritPartyReport,
    pub all_ok: bool,
}

pub fn qutrit_regime_threshold() -> f64 {
    (72.0 * (3f64.sqrt() + 2.0)).powi(-2)
}

/// The qutrit commutation-element diagnostics: anticommutator relations, the
/// elements Q, Q', Q'' and their spectra, and the twisted commutation
/// relations at the reported k*.
pub fn qutrit_q_elements(s: &Strategy, nu: &NuSpec) -> Result<QutritElementsReport, StrategyError> {
    if s.d.get() != 3 {
        return Err(StrategyError::WrongDim(s.d.get()));
    }
    let (re, _) = bell_value_full(s, nu);
    let epsilon = 6.0 - re;
    let sqrt_eps = epsilon.max(0.0).sqrt();
    let base = sqrt_eps * (3f64.sqrt() + 2.0);

    let alice = qutrit_party(s, &s.a_ops, true, base);
    let bob = qutrit_party(s, &s.b_ops, false, base);
    let all_ok = party_ok(&alice) && party_ok(&bob);
    Ok(QutritElementsReport {
        epsilon,
        in_regime: epsilon < qutrit_regime_threshold(),
        alice,
        bob,
        all_ok,
    })
}

fn party_ok(p: &QutritPartyReport) -> bool {
    p.anticommutators.iter().all(|r| r.ok)
        && p.q_unital.ok
        && p.q_commutants.iter().all(|r| r.ok)
        && p.q_cube.ok
        && p.q_scalar.ok
        && p.q_pairwise.iter().all(|r| r.ok)
        && p.twisted.iter().all(|r| r.ok)
}

fn qutrit_party(
    s: &Strategy,
    ops: &[ComplexMatrix],
    alice: bool,
    base: f64,
) -> QutritPartyReport {
    let d3 = s.d;
    let apply = |m: &ComplexMatrix| -> f64 {
        if alice {
            s.apply_a(m).norm()
        } else {
            s.apply_b(m).norm()
        }
    };
    let sq: Vec<ComplexMatrix> = ops.iter().map(|op| op.pow(2)).collect();
    let eye = ComplexMatrix::identity(ops[0].rows());
    let name = if alice { "A" } else { "B" };

    let mut anticommutators = Vec::new();
    for (i, j, k) in [(0usize, 1usize, 2usize), (0, 2, 1), (1, 2, 0)] {
        let squared = &(&sq[i].matmul(&sq[j]) + &sq[j].matmul(&sq[i])) + &ops[k];
        anticommutators.push(bounded(
            format!("{{{name}{i}^2,{name}{j}^2}} + {name}{k}"),
            apply(&squared),
            3.0 * base,
        ));
        let plain = &(&ops[i].matmul(&ops[j]) + &ops[j].matmul(&ops[i])) + &sq[k];
        anticommutators.push(bounded(
            format!("{{{name}{i},{name}{j}}} + {name}{k}^2"),
            apply(&plain),
            3.0 * base,
        ));
    }

    // commutation elements Q = B0 B1 B0^2 B1^2, Q' = B2 B0 B2^2 B0^2, Q'' = B1 B2 B1^2 B2^2
    let q = ops[0].matmul(&ops[1]).matmul(&sq[0]).matmul(&sq[1]);
    let qp = ops[2].matmul(&ops[0]).matmul(&sq[2]).matmul(&sq[0]);
    let qpp = ops[1].matmul(&ops[2]).matmul(&sq[1]).matmul(&sq[2]);

    let q_unital = bounded(
        format!("(Q + Qdag + 1) [{name}]"),
        apply(&(&(&q + &q.dagger()) + &eye)),
        6.0 * base,
    );
    let q_commutants = (0..3)
        .map(|j| {
            bounded(
                format!("[{name}{j}, Q]"),
                apply(&(&ops[j].matmul(&q) - &q.matmul(&ops[j]))),
                12.0 * base,
            )
        })
        .collect();
    let q_cube = bounded(
        format!("(Q^3 - 1) [{name}]"),
        apply(&(&q.pow(3) - &eye)),
        36.0 * base,
    );

    let dist_k = |k: u64| -> f64 {
        apply(&(&q - &eye.scale(omega_pow(d3, k as i64))))
    };
    let (k_star, q_scalar_value) = if dist_k(1) <= dist_k(2) {
        (1, dist_k(1))
    } else {
        (2, dist_k(2))
    };
    let q_scalar = bounded(
        format!("(Q - omega^{k_star}) [{name}]"),
        q_scalar_value,
        36.0 * base,
    );

    let q_pairwise = vec![
        bounded(format!("(Q - Q') [{name}]"), apply(&(&q - &qp)), 9.0 * base),
        bounded(format!("(Q - Q'') [{name}]"), apply(&(&q - &qpp)), 9.0 * base),
        bounded(format!("(Q' - Q'') [{name}]"), apply(&(&qp - &qpp)), 9.0 * base),
    ];

    let wk = omega_pow(d3, k_star as i64);
    let twisted = [(0usize, 1usize), (2, 0), (1, 2)]
        .iter()
        .map(|&(i, j)| {
            let m = &ops[i].matmul(&ops[j]) - &ops[j].matmul(&ops[i]).scale(wk);
            bounded(
                format!("({name}{i}{name}{j} - omega^{k_star} {name}{j}{name}{i})"),
                apply(&m),
                9.0 * base,
            )
        })
        .collect();

    QutritPartyReport {
        anticommutators,
        q_unital,
        q_commutants,
        q_cube,
        k_star,
        q_scalar,
        q_pairwise,
        twisted,
    }
}

// ---------------------------------------------------------------------------
// JSON import/export
// ---------------------------------------------------------------------------

/// On-disk form: complex numbers as [re, im] pairs, matrices flattened
/// row-major.
#[derive(Debug, Serialize, Deserialize)]
pub struct StrategyFile {
    pub d: u64,
    pub psi: Vec<[f64; 2]>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<[f64; 2]>>,
}

impl Strategy {
    pub fn to_file(&self) -> StrategyFile {
        let enc_vec = |v: &StateVector| v.data().iter().map(|c| [c.re, c.im]).collect();
        let enc_mat = |m: &ComplexMatrix| m.data().iter().map(|c| [c.re, c.im]).collect();
        StrategyFile {
            d: self.d.get(),
            psi: enc_vec(&self.psi),
            a: self.a_ops.iter().map(enc_mat).collect(),
            b: self.b_ops.iter().map(enc_mat).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("strategy serializes")
    }

    /// Parse and validate; every strategy invariant is enforced on load.
    pub fn from_file(f: &StrategyFile) -> Result<Strategy, StrategyError> {
        let d = PrimeDim::new(f.d)
            .map_err(|e| StrategyError::DimensionMismatch(e.to_string()))?;
        let dec_mat = |flat: &Vec<[f64; 2]>, idx: usize| -> Result<ComplexMatrix, StrategyError> {
            let n = (flat.len() as f64).sqrt().round() as usize;
            if n * n != flat.len() {
                return Err(StrategyError::BadObservable(
                    idx,
                    format!("flattened length {} is not a square", flat.len()),
                ));
            }
            let mut m = ComplexMatrix::zeros(n, n);
            for (i, c) in flat.iter().enumerate() {
                m.set(i / n, i % n, Complex64::new(c[0], c[1]));
            }
            Ok(m)
        };
        let a: Vec<ComplexMatrix> = f
            .a
            .iter()
            .enumerate()
            .map(|(i, m)| dec_mat(m, i))
            .collect::<Result<_, _>>()?;
        let b: Vec<ComplexMatrix> = f
            .b
            .iter()
            .enumerate()
            .map(|(i, m)| dec_mat(m, i))
            .collect::<Result<_, _>>()?;
        let psi = StateVector::new(f.psi.iter().map(|c| Complex64::new(c[0], c[1])).collect());
        Strategy::new(d, psi, a, b)
    }

    pub fn from_json(s: &str) -> Result<Strategy, StrategyError> {
        let f: StrategyFile = serde_json::from_str(s)
            .map_err(|e| StrategyError::DimensionMismatch(format!("malformed JSON: {e}")))?;
        Strategy::from_file(&f)
    }
}
