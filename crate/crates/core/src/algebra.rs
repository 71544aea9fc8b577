//! Finite-dimensional operator algebras: support spaces, generated algebras,
//! block decomposition and implementing unitaries of automorphisms.

use std::collections::VecDeque;

use rand::Rng;
use thiserror::Error;

use crate::linalg::{
    self, c, column_space, column_space_wide, eigh, flatten, identity, null_space, op_norm, projector_onto, unflatten,
    CMat, CVec, C64, DEFAULT_SEED, EPS, SPEC_GAP,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("span is not closed under {test}: residual {residual:.3e}")]
    NotClosed { test: &'static str, residual: f64 },
    #[error("matrix is not Hermitian: residual {0:.3e}")]
    NotHermitian(f64),
    #[error("algebras do not commute: residual {0:.3e}")]
    NotCommuting(f64),
    #[error("images are not a unital *-homomorphism ({what}): residual {residual:.3e}")]
    NotHomomorphism { what: &'static str, residual: f64 },
    #[error("image of E_11 has rank {0}; an automorphism needs rank 1")]
    NotAutomorphism(usize),
    #[error("inconsistent block structure: {0}")]
    Inconsistent(String),
}

/// Kronecker product in the global factor order.
pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    linalg::kron(a, b)
}

/// Incrementally maintained orthonormal basis under the trace inner product.
#[derive(Clone, Debug)]
struct SpanBuilder {
    n: usize,
    vecs: Vec<CVec>,
}

impl SpanBuilder {
    fn new(n: usize) -> Self {
        SpanBuilder {
            n,
            vecs: Vec::new(),
        }
    }

    fn residual(&self, v: &CVec) -> CVec {
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &self.vecs {
                let ip = q.dotc(&r);
                r.axpy(-ip, q, C64::from(1.0));
            }
        }
        r
    }

    /// Add `m` if it leaves the current span; returns the new basis element.
    fn add(&mut self, m: &CMat) -> Option<CMat> {
        let v = flatten(m);
        let nv = v.norm();
        if nv < 1e-13 {
            return None;
        }
        let r = self.residual(&v);
        let nr = r.norm();
        if nr <= 1e-9 * nv.max(1.0) {
            return None;
        }
        let q = r / C64::from(nr);
        let m = unflatten(q.as_slice(), self.n);
        self.vecs.push(q);
        Some(m)
    }
}

/// A *-closed span of square matrices with a trace-orthonormal basis.
#[derive(Clone, Debug)]
pub struct MatrixAlgebra {
    ambient_dim: usize,
    basis: Vec<CMat>,
}

impl MatrixAlgebra {
    /// Orthonormalize an arbitrary spanning set; no closure is enforced.
    pub fn from_span(ambient_dim: usize, span: &[CMat]) -> Result<Self, AlgebraError> {
        for m in span {
            if m.nrows() != ambient_dim || m.ncols() != ambient_dim {
                return Err(AlgebraError::DimensionMismatch {
                    expected: ambient_dim,
                    found: m.nrows(),
                });
            }
        }
        Ok(MatrixAlgebra {
            ambient_dim,
            basis: orthonormal_basis(ambient_dim, span),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn project(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.basis {
            out += b * linalg::hs_inner(b, m);
        }
        out
    }

    pub fn distance(&self, m: &CMat) -> f64 {
        op_norm(&(m - self.project(m)))
    }

    pub fn contains(&self, m: &CMat) -> bool {
        self.distance(m) <= EPS
    }

    pub fn random_element<R: Rng>(&self, rng: &mut R) -> CMat {
        let mut out = CMat::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.basis {
            out += b * c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        out
    }

    pub fn random_hermitian<R: Rng>(&self, rng: &mut R) -> CMat {
        let a = self.random_element(rng);
        (&a + a.adjoint()).map(|z| z * 0.5)
    }

    /// Largest adjoint-closure and product-closure residuals.
    pub fn closure_residuals(&self) -> (f64, f64) {
        let adj = self
            .basis
            .iter()
            .map(|b| self.distance(&b.adjoint()))
            .fold(0.0, f64::max);
        let k = self.basis.len();
        let mut prod: f64 = 0.0;
        if k <= 24 {
            for a in &self.basis {
                for b in &self.basis {
                    prod = prod.max(self.distance(&(a * b)));
                }
            }
        } else {
            let mut r = linalg::rng(DEFAULT_SEED ^ 0xc105);
            for _ in 0..16 {
                let a = self.random_element(&mut r);
                let b = self.random_element(&mut r);
                prod = prod.max(self.distance(&(a * b)));
            }
        }
        (adj, prod)
    }

    pub fn check_closure(&self) -> Result<(), AlgebraError> {
        let (adj, prod) = self.closure_residuals();
        if adj > EPS {
            return Err(AlgebraError::NotClosed {
                test: "adjoint",
                residual: adj,
            });
        }
        if prod > EPS {
            return Err(AlgebraError::NotClosed {
                test: "multiplication",
                residual: prod,
            });
        }
        Ok(())
    }

    /// Projection onto the joint range of all elements.
    pub fn support_projection(&self) -> CMat {
        let n = self.ambient_dim;
        let mut stacked = CMat::zeros(n, n * self.basis.len());
        for (k, b) in self.basis.iter().enumerate() {
            stacked.view_mut((0, k * n), (n, n)).copy_from(b);
        }
        projector_onto(&column_space(&stacked))
    }
}

fn orthonormal_basis(n: usize, span: &[CMat]) -> Vec<CMat> {
    if span.is_empty() {
        return Vec::new();
    }
    let mut stacked = CMat::zeros(n * n, span.len());
    for (k, m) in span.iter().enumerate() {
        stacked.set_column(k, &flatten(m));
    }
    let q = column_space(&stacked);
    (0..q.ncols())
        .map(|k| unflatten(q.column(k).as_slice(), n))
        .collect()
}

/// Which tensor factor a support space is computed for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Smallest subspace of one factor of B1⊗B2 needed to expand every input,
/// returned as a trace-orthonormal basis.
pub fn support_space(
    span_set: &[CMat],
    side: Side,
    split: (usize, usize),
) -> Result<Vec<CMat>, AlgebraError> {
    let (d1, d2) = split;
    let n = d1 * d2;
    for m in span_set {
        if m.nrows() != n || m.ncols() != n {
            return Err(AlgebraError::DimensionMismatch {
                expected: n,
                found: m.nrows(),
            });
        }
    }
    let (own, other) = match side {
        Side::Left => (d1, d2),
        Side::Right => (d2, d1),
    };
    let mut stacked = CMat::zeros(own * own, other * other * span_set.len());
    for (k, m) in span_set.iter().enumerate() {
        let base = k * other * other;
        for i1 in 0..d1 {
            for j1 in 0..d1 {
                for i2 in 0..d2 {
                    for j2 in 0..d2 {
                        let v = m[(i1 * d2 + i2, j1 * d2 + j2)];
                        let mu = i1 * d1 + j1;
                        let nu = i2 * d2 + j2;
                        match side {
                            Side::Left => stacked[(mu, base + nu)] = v,
                            Side::Right => stacked[(nu, base + mu)] = v,
                        }
                    }
                }
            }
        }
    }
    let q = column_space_wide(&stacked);
    Ok((0..q.ncols())
        .map(|k| unflatten(q.column(k).as_slice(), own))
        .collect())
}

/// Smallest *-algebra containing the inputs, by repeated multiplication with
/// the generators until no new direction appears.
pub fn generated_algebra(span_set: &[CMat]) -> Result<MatrixAlgebra, AlgebraError> {
    let n = match span_set.first() {
        Some(m) => m.nrows(),
        None => {
            return Ok(MatrixAlgebra {
                ambient_dim: 0,
                basis: Vec::new(),
            })
        }
    };
    let mut all: Vec<CMat> = span_set.to_vec();
    all.extend(span_set.iter().map(|m| m.adjoint()));
    for m in &all {
        if m.nrows() != n || m.ncols() != n {
            return Err(AlgebraError::DimensionMismatch {
                expected: n,
                found: m.nrows(),
            });
        }
    }
    let gens = orthonormal_basis(n, &all);
    let mut span = SpanBuilder::new(n);
    let mut basis = Vec::new();
    let mut queue = VecDeque::new();
    for g in &gens {
        if let Some(b) = span.add(g) {
            basis.push(b.clone());
            queue.push_back(b);
        }
    }
    while let Some(b) = queue.pop_front() {
        if basis.len() == n * n {
            break;
        }
        for g in &gens {
            if let Some(nb) = span.add(&(g * &b)) {
                basis.push(nb.clone());
                queue.push_back(nb);
            }
        }
    }
    Ok(MatrixAlgebra {
        ambient_dim: n,
        basis,
    })
}

/// Eigenvalue clusters of a Hermitian matrix with their spectral projections.
pub fn spectral_projections(h: &CMat) -> Result<Vec<(f64, CMat)>, AlgebraError> {
    let res = op_norm(&(h - h.adjoint()));
    if res > EPS {
        return Err(AlgebraError::NotHermitian(res));
    }
    let (vals, vecs) = eigh(h);
    let mut out: Vec<(f64, CMat)> = Vec::new();
    let mut start = 0;
    for k in 1..=vals.len() {
        if k == vals.len() || vals[k] - vals[k - 1] > SPEC_GAP {
            let cols = vecs.columns(start, k - start).into_owned();
            let mean = vals[start..k].iter().sum::<f64>() / (k - start) as f64;
            out.push((mean, projector_onto(&cols)));
            start = k;
        }
    }
    Ok(out)
}

/// One simple summand M_n ⊗ 1_mult of an algebra.
#[derive(Clone, Debug)]
pub struct Block {
    pub n: usize,
    pub multiplicity: usize,
    pub central_projection: CMat,
}

#[derive(Clone, Debug)]
pub struct AlgebraBlockStructure {
    pub blocks: Vec<Block>,
    /// Columns ordered block by block, each block as (multiplicity, n) with n
    /// varying fastest; columns past the support span its orthocomplement.
    pub basis_change: CMat,
    /// True when the input lacked a unit and its support projection was adjoined.
    pub unit_adjoined: bool,
}

impl AlgebraBlockStructure {
    fn offset(&self, mu: usize) -> usize {
        self.blocks[..mu].iter().map(|b| b.n * b.multiplicity).sum()
    }

    /// Isometry onto the first copy of block `mu`.
    pub fn block_isometry(&self, mu: usize) -> CMat {
        let off = self.offset(mu);
        self.basis_change
            .columns(off, self.blocks[mu].n)
            .into_owned()
    }

    /// The n_μ × n_μ matrix representing `a` in block `mu`.
    pub fn compress(&self, mu: usize, a: &CMat) -> CMat {
        let w = self.block_isometry(mu);
        w.adjoint() * a * w
    }

    /// Operator acting as `x` on every copy of block `mu` and zero elsewhere.
    pub fn expand(&self, mu: usize, x: &CMat) -> CMat {
        let b = &self.blocks[mu];
        let off = self.offset(mu);
        let w = self
            .basis_change
            .columns(off, b.n * b.multiplicity)
            .into_owned();
        let inner = identity(b.multiplicity).kronecker(x);
        &w * inner * w.adjoint()
    }

    pub fn support_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.n * b.multiplicity).sum()
    }

    pub fn algebra_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.n * b.n).sum()
    }
}

/// Center of the algebra: elements commuting with a few generic elements.
fn center(alg: &MatrixAlgebra, seed: u64) -> Vec<CMat> {
    let n = alg.ambient_dim;
    let k = alg.dim();
    let mut r = linalg::rng(seed);
    let probes: Vec<CMat> = if k <= 16 {
        alg.basis.clone()
    } else {
        (0..3).map(|_| alg.random_element(&mut r)).collect()
    };
    let mut sys = CMat::zeros(n * n * probes.len(), k);
    for (i, b) in alg.basis.iter().enumerate() {
        for (p, a) in probes.iter().enumerate() {
            let comm = b * a - a * b;
            let v = flatten(&comm);
            sys.view_mut((p * n * n, i), (n * n, 1)).copy_from(&v);
        }
    }
    let ns = null_space(&sys);
    (0..ns.ncols())
        .map(|col| {
            let mut z = CMat::zeros(n, n);
            for (i, b) in alg.basis.iter().enumerate() {
                z += b * ns[(i, col)];
            }
            z
        })
        .collect()
}

fn trace_rank(p: &CMat) -> usize {
    p.trace().re.round().max(0.0) as usize
}

/// Wedderburn decomposition with the internal default seed.
pub fn decompose(alg: &MatrixAlgebra) -> Result<AlgebraBlockStructure, AlgebraError> {
    decompose_with_seed(alg, DEFAULT_SEED)
}

pub fn decompose_with_seed(
    alg: &MatrixAlgebra,
    seed: u64,
) -> Result<AlgebraBlockStructure, AlgebraError> {
    alg.check_closure()?;
    let n = alg.ambient_dim;
    let support = alg.support_projection();
    let mut work = alg.clone();
    let unit_adjoined = !alg.contains(&support);
    if unit_adjoined {
        let mut span = alg.basis.clone();
        span.push(support.clone());
        work = MatrixAlgebra::from_span(n, &span)?;
    }
    let cent = center(&work, seed);
    let herm: Vec<CMat> = cent
        .iter()
        .flat_map(|z| {
            let h1 = (z + z.adjoint()).map(|x| x * 0.5);
            let h2 = (z - z.adjoint()).map(|x| x * c(0.0, -0.5));
            [h1, h2]
        })
        .collect();
    let mut r = linalg::rng(seed ^ 0xce47);
    let mut projections = Vec::new();
    for _attempt in 0..8 {
        let mut h = CMat::zeros(n, n);
        for m in &herm {
            h += m * C64::from(r.gen_range(-1.0..1.0));
        }
        let found: Vec<CMat> = spectral_projections(&h)?
            .into_iter()
            .map(|(_, p)| &support * p)
            .filter(|p| p.trace().re > 0.5)
            .collect();
        if found.len() == cent.len() {
            projections = found;
            break;
        }
    }
    if projections.len() != cent.len() || cent.is_empty() {
        return Err(AlgebraError::Inconsistent(format!(
            "center has dimension {} but {} central projections were separated",
            cent.len(),
            projections.len()
        )));
    }
    let mut blocks = Vec::new();
    for z in projections {
        let images: Vec<CMat> = work.basis.iter().map(|b| &z * b).collect();
        let dim = MatrixAlgebra::from_span(n, &images)?.dim();
        let nb = (dim as f64).sqrt().round() as usize;
        if nb * nb != dim {
            return Err(AlgebraError::Inconsistent(format!(
                "block algebra of dimension {dim} is not a square"
            )));
        }
        let rk = trace_rank(&z);
        if rk % nb != 0 {
            return Err(AlgebraError::Inconsistent(format!(
                "rank {rk} not divisible by block size {nb}"
            )));
        }
        blocks.push(Block {
            n: nb,
            multiplicity: rk / nb,
            central_projection: z,
        });
    }
    blocks.sort_by(|a, b| b.n.cmp(&a.n).then(b.multiplicity.cmp(&a.multiplicity)));
    let mut cols: Vec<CVec> = Vec::new();
    for blk in &blocks {
        cols.extend(block_frame(&work, blk, &mut r)?);
    }
    let comp = column_space(&(identity(n) - &support));
    for k in 0..comp.ncols() {
        cols.push(comp.column(k).into_owned());
    }
    if cols.len() != n {
        return Err(AlgebraError::Inconsistent(format!(
            "basis change has {} columns, expected {n}",
            cols.len()
        )));
    }
    let basis_change = CMat::from_columns(&cols);
    Ok(AlgebraBlockStructure {
        blocks,
        basis_change,
        unit_adjoined,
    })
}

/// Basis of the range of a central projection in which the block acts as
/// 1_mult ⊗ M_n.
fn block_frame<R: Rng>(
    alg: &MatrixAlgebra,
    blk: &Block,
    r: &mut R,
) -> Result<Vec<CVec>, AlgebraError> {
    let z = &blk.central_projection;
    let range = column_space(z);
    for _attempt in 0..8 {
        let h = z * alg.random_hermitian(r) * z;
        let hr = range.adjoint() * &h * &range;
        let parts = spectral_projections(&hr)?;
        if parts.len() != blk.n || parts.iter().any(|(_, p)| trace_rank(p) != blk.multiplicity) {
            continue;
        }
        let q: Vec<CMat> = parts
            .iter()
            .map(|(_, p)| &range * p * range.adjoint())
            .collect();
        let a = z * alg.random_element(r) * z;
        let mut units = vec![q[0].clone()];
        let mut ok = true;
        for qk in &q[1..] {
            let e = qk * &a * &q[0];
            let lam = (e.adjoint() * &e).trace().re / blk.multiplicity as f64;
            if lam < 1e-8 {
                ok = false;
                break;
            }
            units.push(e.map(|x| x / lam.sqrt()));
        }
        if !ok {
            continue;
        }
        let f = column_space(&q[0]);
        let mut cols = Vec::new();
        for j in 0..blk.multiplicity {
            for e in &units {
                cols.push(e * f.column(j));
            }
        }
        return Ok(cols);
    }
    Err(AlgebraError::Inconsistent(
        "could not separate minimal projections".into(),
    ))
}

/// Multiplicity table of a commuting pair: r_{μν} copies of M_{n_μ} ⊗ M_{m_ν}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorizationTable {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub r: Vec<Vec<usize>>,
}

pub fn commuting_factorization(
    a: &MatrixAlgebra,
    b: &MatrixAlgebra,
) -> Result<FactorizationTable, AlgebraError> {
    if a.ambient_dim != b.ambient_dim {
        return Err(AlgebraError::DimensionMismatch {
            expected: a.ambient_dim,
            found: b.ambient_dim,
        });
    }
    let mut worst: f64 = 0.0;
    for x in &a.basis {
        for y in &b.basis {
            worst = worst.max(op_norm(&linalg::commutator(x, y)));
        }
    }
    if worst > EPS {
        return Err(AlgebraError::NotCommuting(worst));
    }
    let da = decompose(a)?;
    let db = decompose(b)?;
    let mut r = Vec::new();
    for ba in &da.blocks {
        let mut row = Vec::new();
        for bb in &db.blocks {
            let rk = trace_rank(&(&ba.central_projection * &bb.central_projection));
            let unit = ba.n * bb.n;
            if rk % unit != 0 {
                return Err(AlgebraError::Inconsistent(format!(
                    "overlap rank {rk} not divisible by {}x{}",
                    ba.n, bb.n
                )));
            }
            row.push(rk / unit);
        }
        r.push(row);
    }
    Ok(FactorizationTable {
        n: da.blocks.iter().map(|x| x.n).collect(),
        m: db.blocks.iter().map(|x| x.n).collect(),
        r,
    })
}

/// Largest violation of the unital *-homomorphism relations for images of
/// the matrix units E_{ij} (index i·d + j).
pub fn homomorphism_residual(
    images: &[CMat],
    d: usize,
) -> Result<(&'static str, f64), AlgebraError> {
    if images.len() != d * d {
        return Err(AlgebraError::DimensionMismatch {
            expected: d * d,
            found: images.len(),
        });
    }
    let n = images[0].nrows();
    let mut worst = ("multiplication", 0.0f64);
    let mut bump = |what: &'static str, v: f64| {
        if v > worst.1 {
            worst = (what, v);
        }
    };
    let zero = CMat::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            let eij = &images[i * d + j];
            bump("adjoint", op_norm(&(eij.adjoint() - &images[j * d + i])));
            for k in 0..d {
                for l in 0..d {
                    let prod = linalg::matmul(eij, &images[k * d + l]);
                    let want = if j == k { &images[i * d + l] } else { &zero };
                    bump("multiplication", op_norm(&(prod - want)));
                }
            }
        }
    }
    let mut unit = CMat::zeros(n, n);
    for i in 0..d {
        unit += &images[i * d + i];
    }
    bump("unit", op_norm(&(unit - identity(n))));
    Ok(worst)
}

/// Isometry W with images(A) = W (A ⊗ 1_k) W† for a unital homomorphism
/// M_d → M_n; k = n / d is forced to be an integer.
pub fn implementing_isometry(images: &[CMat], d: usize) -> Result<(CMat, usize), AlgebraError> {
    let (what, res) = homomorphism_residual(images, d)?;
    if res > EPS {
        return Err(AlgebraError::NotHomomorphism {
            what,
            residual: res,
        });
    }
    let n = images[0].nrows();
    let psi = column_space(&images[0]);
    let k = psi.ncols();
    if k * d != n {
        return Err(AlgebraError::Inconsistent(format!(
            "{d} x {k} does not fill dimension {n}"
        )));
    }
    let mut w = CMat::zeros(n, n);
    for a in 0..d {
        let col = &images[a * d] * &psi;
        w.view_mut((0, a * k), (n, k)).copy_from(&col);
    }
    Ok((w, k))
}

/// Unitary V with images(A) = V A V†, global phase fixed.
pub fn unitary_from_automorphism(images: &[CMat], d: usize) -> Result<CMat, AlgebraError> {
    if images.len() != d * d {
        return Err(AlgebraError::DimensionMismatch {
            expected: d * d,
            found: images.len(),
        });
    }
    if images[0].nrows() != d {
        return Err(AlgebraError::DimensionMismatch {
            expected: d,
            found: images[0].nrows(),
        });
    }
    let rk = linalg::rank(&images[0]);
    if rk != 1 {
        return Err(AlgebraError::NotAutomorphism(rk));
    }
    let (w, _) = implementing_isometry(images, d)?;
    Ok(linalg::fix_phase(&w))
}

/// Multiplicity of a verified unital homomorphism M_d → M_n, i.e. n / d.
pub fn homomorphism_multiplicity(images: &[CMat], d: usize) -> Result<usize, AlgebraError> {
    implementing_isometry(images, d).map(|(_, k)| k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, pauli, random_hermitian, random_unitary, rng, unit};

    fn full(n: usize) -> MatrixAlgebra {
        let units: Vec<CMat> = (0..n * n).map(|k| unit(n, k / n, k % n)).collect();
        MatrixAlgebra::from_span(n, &units).unwrap()
    }

    #[test]
    fn tensor_of_identities() {
        assert_eq!(tensor(&identity(2), &identity(2)), identity(4));
    }

    #[test]
    fn tensor_block_layout() {
        let m = tensor(&pauli('z'), &pauli('x'));
        let x = pauli('x');
        assert_eq!(m.view((0, 0), (2, 2)), x);
        assert_eq!(m.view((2, 2), (2, 2)).into_owned(), -x);
        assert_eq!(m.view((0, 2), (2, 2)).into_owned(), CMat::zeros(2, 2));
    }

    #[test]
    fn tensor_spectrum_is_product_of_spectra() {
        let mut r = rng(11);
        let a = random_hermitian(3, &mut r);
        let b = random_hermitian(2, &mut r);
        let (ea, _) = eigh(&a);
        let (eb, _) = eigh(&b);
        let (mut eab, _) = eigh(&tensor(&a, &b));
        let mut want: Vec<f64> = ea
            .iter()
            .flat_map(|x| eb.iter().map(move |y| x * y))
            .collect();
        want.sort_by(f64::total_cmp);
        eab.sort_by(f64::total_cmp);
        for (x, y) in eab.iter().zip(&want) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn support_of_product_input() {
        let span: Vec<CMat> = (0..4)
            .map(|k| kron(&unit(2, k / 2, k % 2), &identity(2)))
            .collect();
        assert_eq!(support_space(&span, Side::Left, (2, 2)).unwrap().len(), 4);
        let right = support_space(&span, Side::Right, (2, 2)).unwrap();
        assert_eq!(right.len(), 1);
        assert!(linalg::phase_distance(&right[0], &identity(2).map(|z| z / 2f64.sqrt())) < 1e-12);
    }

    #[test]
    fn support_of_cnot_and_swap() {
        let mut cnot = CMat::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            cnot[(i, j)] = C64::from(1.0);
        }
        let left = support_space(&[cnot.clone()], Side::Left, (2, 2)).unwrap();
        assert_eq!(left.len(), 2);
        for m in &left {
            assert!(m[(0, 1)].norm() < 1e-12 && m[(1, 0)].norm() < 1e-12);
        }
        let swap = permute_swap();
        assert_eq!(
            support_space(&[swap.clone()], Side::Left, (2, 2))
                .unwrap()
                .len(),
            4
        );
        assert_eq!(
            support_space(&[swap], Side::Right, (2, 2)).unwrap().len(),
            4
        );
    }

    fn permute_swap() -> CMat {
        let mut s = CMat::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            s[(i, j)] = C64::from(1.0);
        }
        s
    }

    #[test]
    fn support_space_rejects_bad_dims() {
        assert!(support_space(&[identity(3)], Side::Left, (2, 2)).is_err());
    }

    #[test]
    fn generated_algebra_examples() {
        assert_eq!(generated_algebra(&[identity(2)]).unwrap().dim(), 1);
        assert_eq!(
            generated_algebra(&[pauli('x'), pauli('z')]).unwrap().dim(),
            4
        );
        let d = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]));
        let alg = generated_algebra(&[d.clone()]).unwrap();
        assert_eq!(alg.dim(), 3);
        for (_, p) in spectral_projections(&d).unwrap() {
            assert!(alg.contains(&p));
        }
    }

    #[test]
    fn spectral_projection_examples() {
        let sz = spectral_projections(&pauli('z')).unwrap();
        assert_eq!(sz.len(), 2);
        assert!((sz[0].0 + 1.0).abs() < 1e-12 && (sz[1].0 - 1.0).abs() < 1e-12);
        assert!((&sz[1].1 - unit(2, 0, 0)).norm() < 1e-12);
        assert_eq!(spectral_projections(&identity(3)).unwrap().len(), 1);
        let mut r = rng(5);
        let u = random_unitary(3, &mut r);
        let h = &u
            * CMat::from_diagonal(&CVec::from_vec(vec![c(0.0, 0.0), c(0.0, 0.0), c(5.0, 0.0)]))
            * u.adjoint();
        let parts = spectral_projections(&h).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(trace_rank(&parts[0].1), 2);
        assert_eq!(trace_rank(&parts[1].1), 1);
        assert!(spectral_projections(&pauli('y').map(|z| z * c(0.0, 1.0))).is_err());
    }

    #[test]
    fn decompose_examples() {
        let f = decompose(&full(4)).unwrap();
        assert_eq!(
            (f.blocks.len(), f.blocks[0].n, f.blocks[0].multiplicity),
            (1, 4, 1)
        );
        let diag: Vec<CMat> = (0..3).map(|k| unit(3, k, k)).collect();
        let d = decompose(&MatrixAlgebra::from_span(3, &diag).unwrap()).unwrap();
        assert_eq!(
            d.blocks
                .iter()
                .map(|b| (b.n, b.multiplicity))
                .collect::<Vec<_>>(),
            vec![(1, 1); 3]
        );
        let alg = generated_algebra(&[
            kron(&pauli('x'), &identity(2)),
            kron(&pauli('z'), &identity(2)),
        ])
        .unwrap();
        let s = decompose(&alg).unwrap();
        assert_eq!((s.blocks[0].n, s.blocks[0].multiplicity), (2, 2));
    }

    #[test]
    fn decompose_reports_non_closed_span() {
        let span = MatrixAlgebra::from_span(2, &[pauli('x'), pauli('z')]).unwrap();
        match decompose(&span) {
            Err(AlgebraError::NotClosed { test, residual }) => {
                assert_eq!(test, "multiplication");
                assert!(residual > 0.1);
            }
            other => panic!("expected closure failure, got {other:?}"),
        }
    }

    #[test]
    fn decompose_partial_support() {
        let p = unit(3, 0, 0);
        let alg = MatrixAlgebra::from_span(3, &[p]).unwrap();
        let s = decompose(&alg).unwrap();
        assert!(!s.unit_adjoined);
        let e = kron(&unit(2, 0, 1), &identity(1));
        let alg = generated_algebra(&[CMat::from_fn(3, 3, |i, j| {
            if i < 2 && j < 2 {
                e[(i, j)]
            } else {
                C64::from(0.0)
            }
        })])
        .unwrap();
        let s = decompose(&alg).unwrap();
        // a *-closed span always contains its support projection
        assert!(!s.unit_adjoined);
        assert_eq!(s.support_dim(), 2);
        assert_eq!((s.blocks[0].n, s.blocks[0].multiplicity), (2, 1));
        assert!(linalg::unitarity_residual(&s.basis_change) < 1e-10);
    }

    #[test]
    fn basis_change_block_diagonalizes() {
        let mut r = rng(21);
        let w = random_unitary(4, &mut r);
        let gens: Vec<CMat> = [pauli('x'), pauli('z')]
            .iter()
            .map(|p| &w * kron(&identity(2), p) * w.adjoint())
            .collect();
        let alg = generated_algebra(&gens).unwrap();
        let s = decompose(&alg).unwrap();
        assert_eq!((s.blocks[0].n, s.blocks[0].multiplicity), (2, 2));
        for b in alg.basis() {
            let x = s.compress(0, b);
            assert!(op_norm(&(s.expand(0, &x) - b)) < 1e-9);
        }
    }

    #[test]
    fn commuting_factorization_examples() {
        let a = generated_algebra(&[
            kron(&pauli('x'), &identity(2)),
            kron(&pauli('z'), &identity(2)),
        ])
        .unwrap();
        let b = generated_algebra(&[
            kron(&identity(2), &pauli('x')),
            kron(&identity(2), &pauli('z')),
        ])
        .unwrap();
        let t = commuting_factorization(&a, &b).unwrap();
        assert_eq!(
            (t.n.clone(), t.m.clone(), t.r.clone()),
            (vec![2], vec![2], vec![vec![1]])
        );
        let da = generated_algebra(&[kron(&pauli('z'), &identity(2)), identity(4)]).unwrap();
        let db = generated_algebra(&[kron(&identity(2), &pauli('z')), identity(4)]).unwrap();
        let t = commuting_factorization(&da, &db).unwrap();
        assert_eq!(t.r, vec![vec![1, 1], vec![1, 1]]);
        let c1 = generated_algebra(&[kron(&pauli('x'), &identity(2))]).unwrap();
        let c2 = generated_algebra(&[kron(&pauli('z'), &identity(2))]).unwrap();
        assert!(matches!(
            commuting_factorization(&c1, &c2),
            Err(AlgebraError::NotCommuting(_))
        ));
    }

    fn conj_images(w: &CMat) -> Vec<CMat> {
        let d = w.nrows();
        (0..d * d)
            .map(|k| w * unit(d, k / d, k % d) * w.adjoint())
            .collect()
    }

    #[test]
    fn automorphism_examples() {
        let v = unitary_from_automorphism(&conj_images(&identity(3)), 3).unwrap();
        assert!(linalg::phase_distance(&v, &identity(3)) < 1e-12);
        let v = unitary_from_automorphism(&conj_images(&pauli('x')), 2).unwrap();
        assert!(linalg::phase_distance(&v, &pauli('x')) < 1e-12);
        let mut r = rng(33);
        let w = random_unitary(8, &mut r);
        let v = unitary_from_automorphism(&conj_images(&w), 8).unwrap();
        assert!(linalg::phase_distance(&v, &w) <= 1e-9);
    }

    #[test]
    fn automorphism_rejects_non_rank_one() {
        let images: Vec<CMat> = (0..4)
            .map(|k| kron(&unit(2, k / 2, k % 2), &identity(2)))
            .collect();
        assert!(matches!(
            unitary_from_automorphism(&images, 2),
            Err(AlgebraError::DimensionMismatch { .. })
        ));
        assert_eq!(homomorphism_multiplicity(&images, 2).unwrap(), 2);
        let mut bad = conj_images(&identity(2));
        bad.swap(1, 2);
        assert!(matches!(
            unitary_from_automorphism(&bad, 2),
            Err(AlgebraError::NotHomomorphism { .. })
        ));
    }
}
