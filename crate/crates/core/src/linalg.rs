//! Dense complex matrix helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Residual tolerance for closure, commutation and unitarity tests.
pub const EPS: f64 = 1e-9;
/// Gap below which eigenvalues are treated as one cluster.
pub const SPEC_GAP: f64 = 1e-6;
/// Relative singular value cutoff for rank decisions.
pub const RANK_RTOL: f64 = 1e-9;
/// Absolute floor under which singular values count as noise.
const RANK_ATOL: f64 = 1e-13;
/// Seed used whenever an operation needs internal randomness.
pub const DEFAULT_SEED: u64 = 0x5eed_0f_9ca;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Kronecker product, left factor varying slowest.
/// Complex product; large operands go through four real products, which
/// use the optimized real kernel.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    if a.nrows().min(a.ncols()).min(b.ncols()) < 48 {
        return a * b;
    }
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    CMat::from_fn(a.nrows(), b.ncols(), |i, j| c(re[(i, j)], im[(i, j)]))
}

/// a b a†.
pub fn conjugate(a: &CMat, b: &CMat) -> CMat {
    matmul(&matmul(a, b), &a.adjoint())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all<'a, I: IntoIterator<Item = &'a CMat>>(mats: I) -> CMat {
    let mut out = identity(1);
    for m in mats {
        out = kron(&out, m);
    }
    out
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if a.nrows().min(a.ncols()) <= 128 {
        // largest eigenvalue of the Gram matrix
        let g = if a.nrows() < a.ncols() { a * a.adjoint() } else { a.adjoint() * a };
        let top = eigh(&g).0.last().copied().unwrap_or(0.0);
        return top.max(0.0).sqrt();
    }
    power_norm(a)
}

fn power_norm(a: &CMat) -> f64 {
    let mut r = rng(DEFAULT_SEED);
    let mut v = random_vector(a.ncols(), &mut r);
    let mut est = 0.0;
    for _ in 0..200 {
        let w = a.adjoint() * (a * &v);
        let n = w.norm();
        if n == 0.0 {
            return 0.0;
        }
        let next = n.sqrt();
        v = w / C64::from(n);
        if (next - est).abs() <= 1e-14 * next {
            est = next;
            break;
        }
        est = next;
    }
    est
}

/// Operator norm used for residual checks: exact spectral norm unless the
/// Frobenius norm already certifies the residual is below `EPS`.
pub fn op_norm(a: &CMat) -> f64 {
    let f = frobenius(a);
    if f <= EPS {
        f
    } else {
        spectral_norm(a)
    }
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    a.is_square() && op_norm(&(a - a.adjoint())) <= tol
}

pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.ncols();
    op_norm(&(matmul(&u.adjoint(), u) - identity(n)))
}

/// Thin SVD (U, σ, Vᵀ) verified by reconstruction. The complex SVD routine
/// occasionally returns inconsistent factors; on failure the input is
/// rotated by a seeded random unitary and the rotation undone afterwards.
pub fn svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let scale = frobenius(m).max(1.0);
    let k = m.nrows().min(m.ncols());
    let mut r = rng(DEFAULT_SEED ^ 0x5bd);
    let mut q: Option<CMat> = None;
    for _ in 0..8 {
        let work = match &q {
            Some(q) => m * q,
            None => m.clone(),
        };
        let d = work.svd(true, true);
        let u = d.u.expect("left singular vectors requested");
        let mut vt = d.v_t.expect("right singular vectors requested");
        let sig: Vec<f64> = d.singular_values.iter().copied().collect();
        if let Some(q) = &q {
            vt = vt * q.adjoint();
        }
        let mut us = u.clone();
        for (j, s) in sig.iter().enumerate() {
            let mut col = us.column_mut(j);
            col *= C64::from(*s);
        }
        let recon = frobenius(&(&us * &vt - m));
        let orth = frobenius(&(u.adjoint() * &u - identity(k)))
            .max(frobenius(&(&vt * vt.adjoint() - identity(k))));
        if recon <= 1e-12 * scale * (k as f64).sqrt().max(1.0) && orth <= 1e-12 * (k as f64).max(1.0) {
            return (u, sig, vt);
        }
        q = Some(random_unitary(m.ncols(), &mut r));
    }
    panic!("complex SVD failed to converge to a consistent factorization");
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn column_space(m: &CMat) -> CMat {
    if m.ncols() == 0 || m.nrows() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let (u, sig, _) = svd(m);
    let smax = sig.iter().copied().fold(0.0, f64::max);
    let cut = (RANK_RTOL * smax).max(RANK_ATOL);
    let keep: Vec<usize> = (0..sig.len()).filter(|&i| sig[i] >= cut).collect();
    let mut out = CMat::zeros(m.nrows(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &u.column(i));
    }
    out
}

/// Column space of a wide matrix by two-pass Gram-Schmidt; the cost scales
/// with the rank rather than the width.
pub fn column_space_wide(m: &CMat) -> CMat {
    let rows = m.nrows();
    let scale = (0..m.ncols())
        .map(|j| m.column(j).norm())
        .fold(0.0, f64::max);
    let cut = (RANK_RTOL * scale).max(RANK_ATOL);
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    for j in 0..m.ncols() {
        if basis.len() == rows {
            break;
        }
        let mut v = m.column(j).into_owned();
        if v.norm() < cut {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&v);
                v.axpy(-c, q, Complex64::new(1.0, 0.0));
            }
        }
        let n = v.norm();
        if n >= cut {
            basis.push(v / Complex64::new(n, 0.0));
        }
    }
    let mut out = CMat::zeros(rows, basis.len());
    for (k, q) in basis.iter().enumerate() {
        out.set_column(k, q);
    }
    out
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn null_space(m: &CMat) -> CMat {
    let k = m.ncols();
    if m.nrows() == 0 {
        return identity(k);
    }
    // Pad to at least square so the thin SVD exposes all right singular vectors.
    let padded = if m.nrows() < k {
        let mut p = CMat::zeros(k, k);
        p.view_mut((0, 0), (m.nrows(), k)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (_, sig, vt) = svd(&padded);
    let smax = sig.iter().copied().fold(0.0, f64::max);
    let cut = (RANK_RTOL * smax).max(RANK_ATOL);
    let idx: Vec<usize> = (0..sig.len()).filter(|&i| sig[i] < cut).collect();
    let mut out = CMat::zeros(k, idx.len());
    for (col, &i) in idx.iter().enumerate() {
        for r in 0..k {
            out[(r, col)] = vt[(i, r)].conj();
        }
    }
    out
}

pub fn rank(m: &CMat) -> usize {
    column_space(m).ncols()
}

pub fn projector_onto(cols: &CMat) -> CMat {
    cols * cols.adjoint()
}

/// Row-major flattening; the standard inner product of two flattened
/// matrices is the trace inner product tr(A†B).
pub fn flatten(m: &CMat) -> CVec {
    let (r, c) = m.shape();
    CVec::from_fn(r * c, |k, _| m[(k / c, k % c)])
}

pub fn unflatten(v: &[C64], n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| v[i * n + j])
}

pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Multiply by a phase so the largest-magnitude entry (first in row-major
/// order among ties) is real and positive.
pub fn fix_phase(m: &CMat) -> CMat {
    let (rows, cols) = m.shape();
    let maxabs = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if maxabs == 0.0 {
        return m.clone();
    }
    for i in 0..rows {
        for j in 0..cols {
            let z = m[(i, j)];
            if z.norm() >= maxabs * (1.0 - 1e-9) {
                let ph = z.conj() / z.norm();
                return m.map(|x| x * ph);
            }
        }
    }
    m.clone()
}

/// Distance between two matrices modulo a global phase.
pub fn phase_distance(a: &CMat, b: &CMat) -> f64 {
    let ip = hs_inner(b, a);
    let ph = if ip.norm() > 0.0 {
        ip / ip.norm()
    } else {
        C64::from(1.0)
    };
    op_norm(&(a - b.map(|z| z * ph)))
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn eigh(h: &CMat) -> (Vec<f64>, CMat) {
    // Cyclic Jacobi: nalgebra's symmetric eigensolvers (real and complex)
    // leave residuals near 1e-8 on some small inputs.
    let n = h.nrows();
    let mut a = (h + h.adjoint()).map(|z| z * 0.5);
    let mut v = identity(n);
    let total = frobenius(&a);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-16 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // J = [[c, s], [-s·e^{-iθ}, c·e^{-iθ}]] on columns (p, q)
                let jpp = C64::from(cs);
                let jpq = C64::from(sn);
                let jqp = -phase.conj() * sn;
                let jqq = phase.conj() * cs;
                for k in 0..n {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = x * jpp + y * jqp;
                    a[(k, q)] = x * jpq + y * jqq;
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x * jpp + y * jqp;
                    v[(k, q)] = x * jpq + y * jqq;
                }
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = jpp.conj() * x + jqp.conj() * y;
                    a[(q, k)] = jpq.conj() * x + jqq.conj() * y;
                }
                a[(p, q)] = C64::from(0.0);
                a[(q, p)] = C64::from(0.0);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let vals = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &v.column(i));
    }
    (vals, vecs)
}

pub fn random_vector<R: Rng>(n: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(n, |_, _| {
        c(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    });
    let nrm = v.norm();
    v / C64::from(nrm)
}

pub fn random_ginibre<R: Rng>(n: usize, rng: &mut R) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        c(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    })
}

/// Haar-distributed unitary via QR with the diagonal phases of R removed.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let qr = random_ginibre(n, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut out = q;
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::from(1.0)
        };
        for i in 0..n {
            out[(i, j)] *= ph;
        }
    }
    out
}

pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let g = random_ginibre(n, rng);
    (&g + g.adjoint()).map(|z| z * 0.5)
}

/// Unitary exp(-i t H) for Hermitian H.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    let d = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&a| C64::from_polar(1.0, -t * a)),
    ));
    &vecs * d * vecs.adjoint()
}

/// Matrix unit E_{ij} of dimension n.
pub fn unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i, j)] = C64::from(1.0);
    m
}

pub fn pauli(letter: char) -> CMat {
    let o = C64::from(0.0);
    let l = C64::from(1.0);
    let i = c(0.0, 1.0);
    match letter {
        'x' => CMat::from_row_slice(2, 2, &[o, l, l, o]),
        'y' => CMat::from_row_slice(2, 2, &[o, -i, i, o]),
        'z' => CMat::from_row_slice(2, 2, &[l, o, o, -l]),
        _ => identity(2),
    }
}

pub fn hadamard() -> CMat {
    let s = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    CMat::from_row_slice(2, 2, &[s, s, s, -s])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_unitary_is_unitary() {
        let mut r = rng(1);
        for n in [1, 2, 5, 8] {
            assert!(unitarity_residual(&random_unitary(n, &mut r)) < 1e-12);
        }
    }

    #[test]
    fn column_and_null_space_are_complementary() {
        let mut r = rng(2);
        let a = random_ginibre(4, &mut r);
        let b = random_ginibre(4, &mut r);
        // rank-2 product of 4x2 and 2x4 blocks
        let m = a.columns(0, 2) * b.rows(0, 2);
        assert_eq!(rank(&m), 2);
        let ns = null_space(&m);
        assert_eq!(ns.ncols(), 2);
        assert!(frobenius(&(&m * &ns)) < 1e-12);
    }

    #[test]
    fn fix_phase_makes_largest_entry_positive() {
        let m = CMat::from_row_slice(2, 2, &[c(0.0, 0.1), c(0.0, -2.0), c(0.3, 0.0), c(1.0, 1.0)]);
        let f = fix_phase(&m);
        assert!((f[(0, 1)] - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn spectral_norm_matches_power_iteration() {
        let mut r = rng(3);
        let m = random_ginibre(130, &mut r);
        let exact = m.clone().svd(false, false).singular_values.max();
        assert!((power_norm(&m) - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn eigh_is_accurate_on_degenerate_spectra() {
        let mut r = rng(5);
        let mut worst: f64 = 0.0;
        for t in 0..3000 {
            let n = 1 + t % 9;
            let g = random_ginibre(n, &mut r);
            // mix in degenerate spectra
            let h = if t % 3 == 0 {
                let u = random_unitary(n, &mut r);
                let d = CMat::from_diagonal(&CVec::from_fn(n, |i, _| c((i / 2) as f64, 0.0)));
                &u * d * u.adjoint()
            } else {
                &g + g.adjoint()
            };
            let (vals, v) = eigh(&h);
            let lam = CMat::from_diagonal(&CVec::from_iterator(n, vals.iter().map(|&x| c(x, 0.0))));
            let res = frobenius(&(&h * &v - &v * lam)) / frobenius(&h).max(1.0);
            let orth = frobenius(&(v.adjoint() * &v - identity(n)));
            worst = worst.max(res).max(orth);
        }
        assert!(worst < 1e-12);
    }
}
