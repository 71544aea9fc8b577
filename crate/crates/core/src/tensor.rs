//! Index bookkeeping for operators on tensor products of several factors.
//!
//! Factor 0 is the leftmost and varies slowest in the flattened index.

use crate::linalg::{identity, op_norm, CMat, CVec, C64};

/// Flattened offsets of a chosen subset of factors and of its complement.
#[derive(Clone, Debug)]
pub struct Split {
    pub sub: Vec<usize>,
    pub rest: Vec<usize>,
    pub sub_dim: usize,
    pub total: usize,
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for p in (0..dims.len().saturating_sub(1)).rev() {
        s[p] = s[p + 1] * dims[p + 1];
    }
    s
}

fn offsets(positions: &[usize], dims: &[usize], st: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &p in positions {
        let mut next = Vec::with_capacity(out.len() * dims[p]);
        for &o in &out {
            for a in 0..dims[p] {
                next.push(o + a * st[p]);
            }
        }
        out = next;
    }
    out
}

impl Split {
    /// `positions` lists, in order, which factors make up the sub-operator.
    pub fn new(positions: &[usize], dims: &[usize]) -> Self {
        let st = strides(dims);
        let rest_pos: Vec<usize> = (0..dims.len()).filter(|p| !positions.contains(p)).collect();
        let sub = offsets(positions, dims, &st);
        let rest = offsets(&rest_pos, dims, &st);
        Split {
            sub_dim: sub.len(),
            total: dims.iter().product(),
            sub,
            rest,
        }
    }

    pub fn uniform(positions: &[usize], n: usize, d: usize) -> Self {
        Self::new(positions, &vec![d; n])
    }

    /// Tensor `m` (acting on the sub-factors) with the identity elsewhere.
    pub fn embed(&self, m: &CMat) -> CMat {
        assert_eq!(
            m.nrows(),
            self.sub_dim,
            "operator does not match sub-factor dimension"
        );
        let mut out = CMat::zeros(self.total, self.total);
        for &r in &self.rest {
            for a in 0..self.sub_dim {
                for b in 0..self.sub_dim {
                    let v = m[(a, b)];
                    if v != C64::from(0.0) {
                        out[(self.sub[a] + r, self.sub[b] + r)] = v;
                    }
                }
            }
        }
        out
    }

    /// Partial trace over the complement, leaving an operator on the sub-factors.
    pub fn reduce(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(self.sub_dim, self.sub_dim);
        for a in 0..self.sub_dim {
            for b in 0..self.sub_dim {
                out[(a, b)] = self
                    .rest
                    .iter()
                    .map(|&r| m[(self.sub[a] + r, self.sub[b] + r)])
                    .sum();
            }
        }
        out
    }

    /// Apply `m` on the sub-factors of a state vector in place.
    pub fn apply(&self, m: &CMat, v: &mut CVec) {
        let mut buf = CVec::zeros(self.sub_dim);
        for &r in &self.rest {
            for a in 0..self.sub_dim {
                buf[a] = v[self.sub[a] + r];
            }
            let w = m * &buf;
            for a in 0..self.sub_dim {
                v[self.sub[a] + r] = w[a];
            }
        }
    }
}

/// Reorder factors: factor `k` of the result is factor `perm[k]` of `m`.
pub fn permute(m: &CMat, perm: &[usize], dims: &[usize]) -> CMat {
    let split = Split::new(perm, dims);
    let n = split.total;
    let mut out = CMat::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            out[(a, b)] = m[(split.sub[a], split.sub[b])];
        }
    }
    out
}

/// Distance of `m` from an operator acting trivially on factor `pos`.
pub fn factor_deviation(m: &CMat, pos: usize, dims: &[usize]) -> f64 {
    let keep: Vec<usize> = (0..dims.len()).filter(|&p| p != pos).collect();
    let split = Split::new(&keep, dims);
    let reduced = split.reduce(m).map(|z| z / dims[pos] as f64);
    op_norm(&(m - split.embed(&reduced)))
}

/// Restrict `m` to the kept factors, assuming it is trivial on the others.
pub fn restrict(m: &CMat, keep: &[usize], dims: &[usize]) -> CMat {
    let split = Split::new(keep, dims);
    let dropped: usize = split.total / split.sub_dim;
    split.reduce(m).map(|z| z / dropped as f64)
}

pub fn embed_identity_right(m: &CMat, k: usize) -> CMat {
    m.kronecker(&identity(k))
}
