//! Transition quasi-probabilities: expansion of a qubit rule in a basis of
//! Wigner operators, and the two ways of building a two-site global step
//! from them (multiplying quasi-probabilities versus multiplying operators).

use serde::Serialize;
use thiserror::Error;

use crate::lattice::Region;
use crate::linalg::{
    self, c, frobenius, identity, kron, kron_all, random_vector, rng, CMat, CVec, C64,
    DEFAULT_SEED, EPS,
};
use crate::rules::{LocalRule, RuleError};

#[derive(Debug, Error)]
pub enum QuasiError {
    #[error("quasi-probabilities need qubit cells; got d = {0}")]
    NonQubit(usize),
    #[error("two-site comparison needs a rule inside {{-1, 0, 1}}; got {0}")]
    Scheme(Region),
    #[error("frame elements are linearly dependent")]
    SingularFrame,
    #[error("Wigner index {0} out of range")]
    BadIndex(usize),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// Labels of the four Wigner operators, in index order.
pub const WIGNER_LABELS: [&str; 4] = ["++", "+-", "-+", "--"];

/// (u, v) of Wigner index k.
pub fn wigner_uv(k: usize) -> (f64, f64) {
    let u = if k < 2 { 1.0 } else { -1.0 };
    let v = if k % 2 == 0 { 1.0 } else { -1.0 };
    (u, v)
}

pub fn wigner_operator(u: f64, v: f64) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[
            c((1.0 + u) / 2.0, 0.0),
            c(v / 4.0, -v * u / 4.0),
            c(v / 4.0, v * u / 4.0),
            c((1.0 - u) / 2.0, 0.0),
        ],
    )
}

/// A basis (or partial basis) of operators with its dual under the trace
/// pairing, tr(dual[i] · elements[j]) = δ_ij.
#[derive(Clone, Debug)]
pub struct OperatorFrame {
    pub elements: Vec<CMat>,
    pub dual: Vec<CMat>,
}

impl OperatorFrame {
    pub fn new(elements: Vec<CMat>) -> Result<Self, QuasiError> {
        let n = elements.len();
        let gram = CMat::from_fn(n, n, |i, j| (&elements[i] * &elements[j]).trace());
        let inv = gram.try_inverse().ok_or(QuasiError::SingularFrame)?;
        if !inv.iter().all(|z| z.is_finite()) {
            return Err(QuasiError::SingularFrame);
        }
        let dim = elements[0].nrows();
        let dual = (0..n)
            .map(|i| {
                let mut acc = CMat::zeros(dim, dim);
                for (j, e) in elements.iter().enumerate() {
                    acc += e * inv[(j, i)];
                }
                acc
            })
            .collect();
        Ok(OperatorFrame { elements, dual })
    }

    /// The literal Wigner operators F_uv; they sum to twice the identity.
    pub fn wigner() -> Self {
        Self::new((0..4).map(|k| {
            let (u, v) = wigner_uv(k);
            wigner_operator(u, v)
        }).collect())
        .expect("Wigner operators are independent")
    }

    /// Wigner operators rescaled to sum to the identity, which is what
    /// makes products of quasi-probabilities normalized.
    pub fn unit_sum_wigner() -> Self {
        let w = Self::wigner();
        let k = w.sum_constant().expect("Wigner operators sum to a multiple of 1");
        Self::new(w.elements.iter().map(|e| e / k).collect()).expect("rescaled frame")
    }

    /// Minimal projections of the diagonal (classical) subalgebra.
    pub fn classical(d: usize) -> Self {
        Self::new((0..d).map(|a| linalg::unit(d, a, a)).collect()).expect("orthonormal")
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn cell_dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn sum(&self) -> CMat {
        let d = self.cell_dim();
        self.elements.iter().fold(CMat::zeros(d, d), |acc, e| acc + e)
    }

    /// c with Σ elements = c·1, if the sum is a multiple of the identity.
    pub fn sum_constant(&self) -> Option<C64> {
        let s = self.sum();
        let k = s[(0, 0)];
        (frobenius(&(&s - identity(s.nrows()) * k)) < EPS).then_some(k)
    }

    /// max ‖F_i F_j − δ_ij F_i‖; zero exactly when the elements are
    /// orthogonal projections.
    pub fn idempotence_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate() {
                let target = if i == j { a.clone() } else { a * C64::from(0.0) };
                worst = worst.max(frobenius(&(a * b - target)));
            }
        }
        worst
    }

    /// ⊗_k elements[idx[k]].
    pub fn product(&self, idx: &[usize]) -> CMat {
        kron_all(idx.iter().map(|&k| &self.elements[k]))
    }

    fn dual_product(&self, idx: &[usize]) -> CMat {
        kron_all(idx.iter().map(|&k| &self.dual[k]))
    }

    /// Coefficients of `a` in the n-fold product frame, first site slowest.
    pub fn coefficients(&self, a: &CMat, n: usize) -> Vec<C64> {
        multi_indices(self.len(), n)
            .map(|idx| trace_product(&self.dual_product(&idx), a))
            .collect()
    }

    pub fn synthesize(&self, coeffs: &[C64], n: usize) -> CMat {
        let dim = self.cell_dim().pow(n as u32);
        let mut out = CMat::zeros(dim, dim);
        for (idx, &w) in multi_indices(self.len(), n).zip(coeffs) {
            if w != C64::from(0.0) {
                out += self.product(&idx) * w;
            }
        }
        out
    }
}

fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let mut acc = C64::from(0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// All index tuples of length n over 0..base, first position slowest.
fn multi_indices(base: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..base.pow(n as u32)).map(move |mut k| {
        let mut idx = vec![0; n];
        for slot in idx.iter_mut().rev() {
            *slot = k % base;
            k /= base;
        }
        idx
    })
}

/// M(η₀ | ξ_N): entries[η₀][ξ_N], ξ_N flattened with the first site slowest.
#[derive(Clone, Debug, Serialize)]
pub struct QuasiTransitionTensor {
    pub region: Region,
    pub frame_size: usize,
    pub entries: Vec<Vec<f64>>,
    /// Largest imaginary part discarded; zero up to rounding for valid rules.
    pub imag_residual: f64,
    /// ‖Σ M F^{⊗N} − T₀(F(η₀))‖ over η₀.
    pub reconstruction_residual: f64,
}

impl QuasiTransitionTensor {
    pub fn get(&self, eta: usize, xi: &[usize]) -> f64 {
        let k = xi.iter().fold(0, |acc, &x| acc * self.frame_size + x);
        self.entries[eta][k]
    }

    pub fn min_entry(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Every entry 0 or 1 and, for each input configuration, exactly one
    /// output with weight 1.
    pub fn is_deterministic(&self, tol: f64) -> bool {
        let zero_one = self
            .entries
            .iter()
            .flatten()
            .all(|&m| m.abs() <= tol || (m - 1.0).abs() <= tol);
        let cols = self.entries[0].len();
        zero_one
            && (0..cols).all(|k| {
                let s: f64 = self.entries.iter().map(|row| row[k]).sum();
                (s - 1.0).abs() <= tol
            })
    }

    /// Σ_ξ M(η₀|ξ) ⊗ F(ξ_x).
    pub fn expand(&self, frame: &OperatorFrame, eta: usize) -> CMat {
        let coeffs: Vec<C64> = self.entries[eta].iter().map(|&m| c(m, 0.0)).collect();
        frame.synthesize(&coeffs, self.region.len())
    }
}

fn require_qubit(rule: &LocalRule) -> Result<(), QuasiError> {
    if rule.cell_dim != 2 {
        return Err(QuasiError::NonQubit(rule.cell_dim));
    }
    Ok(())
}

/// Quasi-probabilities in the unit-sum Wigner frame.
pub fn quasi_probs(rule: &LocalRule) -> Result<QuasiTransitionTensor, QuasiError> {
    require_qubit(rule)?;
    quasi_probs_in(&OperatorFrame::unit_sum_wigner(), rule)
}

pub fn quasi_probs_in(
    frame: &OperatorFrame,
    rule: &LocalRule,
) -> Result<QuasiTransitionTensor, QuasiError> {
    if frame.cell_dim() != rule.cell_dim {
        return Err(QuasiError::NonQubit(rule.cell_dim));
    }
    let n = rule.region().len();
    let mut entries = Vec::with_capacity(frame.len());
    let mut imag: f64 = 0.0;
    let mut recon: f64 = 0.0;
    for f in &frame.elements {
        let image = rule.apply_local(f);
        let coeffs = frame.coefficients(&image, n);
        imag = coeffs.iter().map(|z| z.im.abs()).fold(imag, f64::max);
        recon = recon.max(frobenius(&(frame.synthesize(&coeffs, n) - &image)));
        entries.push(coeffs.iter().map(|z| z.re).collect());
    }
    Ok(QuasiTransitionTensor {
        region: rule.region().clone(),
        frame_size: frame.len(),
        entries,
        imag_residual: imag,
        reconstruction_residual: recon,
    })
}

/// The two-site global step in both forms, as linear maps from operators on
/// sites {1, 2} to operators on {0, 1, 2, 3}, defined on the product frame.
pub struct TwoSiteMaps {
    pub frame: OperatorFrame,
    /// Multiplying quasi-probabilities: Σ M(η₁|ξ₀ξ₁ξ₂) M(η₂|ξ₁ξ₂ξ₃) F(ξ₀)⊗…⊗F(ξ₃).
    pub quasi: Vec<CMat>,
    /// Multiplying operators: T(F(η₁)) on {0,1,2} times T(F(η₂)) on {1,2,3}.
    pub hom: Vec<CMat>,
    pub tensor: QuasiTransitionTensor,
}

impl TwoSiteMaps {
    pub fn new(frame: OperatorFrame, rule: &LocalRule) -> Result<Self, QuasiError> {
        let window = Region::interval(-1, 1);
        if !rule.region().is_subset(&window) {
            return Err(QuasiError::Scheme(rule.region().clone()));
        }
        let rule = rule.widen(&window)?;
        let tensor = quasi_probs_in(&frame, &rule)?;
        let m = frame.len();
        let images: Vec<CMat> = (0..m).map(|e| tensor.expand(&frame, e)).collect();
        let one = identity(frame.cell_dim());
        let mut quasi = Vec::with_capacity(m * m);
        let mut hom = Vec::with_capacity(m * m);
        for e1 in 0..m {
            for e2 in 0..m {
                let mut coeffs = vec![C64::from(0.0); m.pow(4)];
                for (k, idx) in multi_indices(m, 4).enumerate() {
                    let w = tensor.get(e1, &idx[0..3]) * tensor.get(e2, &idx[1..4]);
                    coeffs[k] = c(w, 0.0);
                }
                quasi.push(frame.synthesize(&coeffs, 4));
                hom.push(kron(&images[e1], &one) * kron(&one, &images[e2]));
            }
        }
        Ok(TwoSiteMaps {
            frame,
            quasi,
            hom,
            tensor,
        })
    }

    fn apply(&self, maps: &[CMat], a: &CMat) -> CMat {
        let coeffs = self.frame.coefficients(a, 2);
        let dim = maps[0].nrows();
        let mut out = CMat::zeros(dim, dim);
        for (w, m) in coeffs.iter().zip(maps) {
            out += m * *w;
        }
        out
    }

    pub fn apply_quasi(&self, a: &CMat) -> CMat {
        self.apply(&self.quasi, a)
    }

    pub fn apply_hom(&self, a: &CMat) -> CMat {
        self.apply(&self.hom, a)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityWitness {
    pub state: Vec<[f64; 2]>,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub eta: (usize, usize),
    pub wigner_sum_constant: f64,
    pub t_quasi: Vec<Vec<[f64; 2]>>,
    pub t_hom: Vec<Vec<[f64; 2]>>,
    pub max_difference: f64,
    /// Smallest eigenvalue of the quasi-probabilistic image over the probes.
    pub min_eigenvalue: f64,
    pub witness: Option<PositivityWitness>,
}

fn to_pairs(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Computational-basis projectors followed by `count` seeded random pure
/// states of two qubits.
pub fn positivity_probes(count: usize) -> Vec<CVec> {
    let mut out: Vec<CVec> = (0..4)
        .map(|k| CVec::from_fn(4, |i, _| if i == k { c(1.0, 0.0) } else { c(0.0, 0.0) }))
        .collect();
    let mut r = rng(DEFAULT_SEED ^ 0x9a5);
    out.extend((0..count).map(|_| random_vector(4, &mut r)));
    out
}

/// Compare both two-site constructions on the input F(η₁) ⊗ F(η₂) built
/// from the literal Wigner operators, and scan rank-one projectors for a
/// positivity violation of the quasi-probabilistic map.
pub fn compare_two_site(
    rule: &LocalRule,
    eta1: usize,
    eta2: usize,
) -> Result<ComparisonReport, QuasiError> {
    require_qubit(rule)?;
    if eta1 >= 4 || eta2 >= 4 {
        return Err(QuasiError::BadIndex(eta1.max(eta2)));
    }
    let literal = OperatorFrame::wigner();
    let maps = TwoSiteMaps::new(OperatorFrame::unit_sum_wigner(), rule)?;
    compare_with(&maps, &literal, eta1, eta2, &positivity_probes(200))
        .map(|mut rep| {
            rep.wigner_sum_constant = literal.sum_constant().map_or(f64::NAN, |k| k.re);
            rep
        })
}

/// Comparison against an arbitrary frame; `inputs` supplies the single-site
/// operators placed at sites 1 and 2.
pub fn compare_with(
    maps: &TwoSiteMaps,
    inputs: &OperatorFrame,
    eta1: usize,
    eta2: usize,
    probes: &[CVec],
) -> Result<ComparisonReport, QuasiError> {
    if eta1 >= inputs.len() || eta2 >= inputs.len() {
        return Err(QuasiError::BadIndex(eta1.max(eta2)));
    }
    let a = kron(&inputs.elements[eta1], &inputs.elements[eta2]);
    let tq = maps.apply_quasi(&a);
    let th = maps.apply_hom(&a);
    let max_difference = (&tq - &th).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut min_eigenvalue = f64::INFINITY;
    let mut witness = None;
    for v in probes {
        let rho = v * v.adjoint();
        let out = maps.apply_quasi(&rho);
        let herm = (&out + out.adjoint()) * c(0.5, 0.0);
        let low = linalg::eigh(&herm).0[0];
        if low < min_eigenvalue {
            min_eigenvalue = low;
            witness = Some(PositivityWitness {
                state: v.iter().map(|z| [z.re, z.im]).collect(),
                min_eigenvalue: low,
            });
        }
    }
    Ok(ComparisonReport {
        eta: (eta1, eta2),
        wigner_sum_constant: inputs.sum_constant().map_or(f64::NAN, |k| k.re),
        t_quasi: to_pairs(&tq),
        t_hom: to_pairs(&th),
        max_difference,
        min_eigenvalue,
        witness,
    })
}

#[cfg(test)]
mod tests;
