//! Structure of nearest-neighbor rules: two-layer decomposition via support
//! algebras, inversion, unilateral rules and the qubit classification.

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{
    decompose, generated_algebra, support_space, unitary_from_automorphism, AlgebraBlockStructure,
    AlgebraError, Side,
};
use crate::lattice::{Region, TorusSpec};
use crate::linalg::{self, c, kron, op_norm, phase_distance, unit, unitarity_residual, CMat, C64};
use crate::rules::{
    cellwise, compose, from_margolus, global_unitary, left_shift, phase_gate, right_shift,
    two_layer_image, unit_images, validate_rule, LocalRule, RuleError,
};
use crate::tensor;

/// Tolerance for rebuilt rules and unitaries compared against their source.
pub const REBUILD_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("scheme {0} is not within the nearest neighbors; regroup first")]
    NotNearestNeighbor(Region),
    #[error("support algebra on side {side} has blocks {blocks:?}; expected one full block")]
    MultipleBlocks { side: i64, blocks: Vec<(usize, usize)> },
    #[error("block dimensions {0} · {1} do not equal {2}")]
    DimensionProduct(usize, usize, usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("inconsistent structure: {0}")]
    Inconsistent(String),
}

/// Two-layer form of a nearest-neighbor rule on blocks □ = {0, 1}.
#[derive(Clone, Debug)]
pub struct MargolusForm {
    pub cell_dim: usize,
    /// n(−1): dimension of the part of a block's image left of the block boundary.
    pub n_minus: usize,
    /// n(+1): dimension of the part right of it.
    pub n_plus: usize,
    /// Basis changes exhibiting B₋₁ and B₊₁ as 1 ⊗ M_n on a pair of cells.
    pub block_bases: (CMat, CMat),
    pub u: CMat,
    pub v: CMat,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub cell_dim: usize,
    pub quadrant_dims: Vec<(i64, usize)>,
    pub u_unitarity: f64,
    pub v_unitarity: f64,
    pub rebuild_residual: f64,
}

impl MargolusForm {
    pub fn quadrant_dims(&self) -> Vec<(i64, usize)> {
        vec![(-1, self.n_minus), (1, self.n_plus)]
    }

    pub fn rebuild(&self) -> Result<LocalRule, RuleError> {
        from_margolus(&self.u, &self.v, self.n_minus, self.n_plus, self.cell_dim)
    }

    pub fn report(&self, source: &LocalRule) -> Result<DecompositionReport, RuleError> {
        Ok(DecompositionReport {
            cell_dim: self.cell_dim,
            quadrant_dims: self.quadrant_dims(),
            u_unitarity: unitarity_residual(&self.u),
            v_unitarity: unitarity_residual(&self.v),
            rebuild_residual: self.rebuild()?.distance(source),
        })
    }
}

/// Support algebra of `span` on one factor, required to be a single full block.
fn full_block(
    span: &[CMat],
    side: Side,
    split: (usize, usize),
    label: i64,
) -> Result<AlgebraBlockStructure, StructureError> {
    let sup = support_space(span, side, split)?;
    let bs = decompose(&generated_algebra(&sup)?)?;
    let own = match side {
        Side::Left => split.0,
        Side::Right => split.1,
    };
    if bs.blocks.len() != 1 || bs.support_dim() != own {
        return Err(StructureError::MultipleBlocks {
            side: label,
            blocks: bs.blocks.iter().map(|b| (b.n, b.multiplicity)).collect(),
        });
    }
    Ok(bs)
}

/// u from K†T(X)K with K the product of the first-copy isometries, and v from
/// the commuting embeddings ι₊(E) ι₋(E′) of the two halves meeting in one pair.
fn split_unitaries(
    images: &[CMat],
    left: &AlgebraBlockStructure,
    right: &AlgebraBlockStructure,
    dim: usize,
) -> Result<(CMat, CMat), StructureError> {
    let nm = left.blocks[0].n;
    let np = right.blocks[0].n;
    let k = kron(&left.block_isometry(0), &right.block_isometry(0));
    let compressed: Vec<CMat> = images.iter().map(|t| k.adjoint() * t * &k).collect();
    let u = unitary_from_automorphism(&compressed, dim)?;
    let mut psi = vec![CMat::zeros(dim, dim); dim * dim];
    for a in 0..np {
        for b in 0..np {
            let plus = right.expand(0, &unit(np, a, b));
            for cc in 0..nm {
                for e in 0..nm {
                    let row = a * nm + cc;
                    let col = b * nm + e;
                    psi[row * dim + col] = &plus * left.expand(0, &unit(nm, cc, e));
                }
            }
        }
    }
    let v = unitary_from_automorphism(&psi, dim)?;
    Ok((u, v))
}

fn require_line(rule: &LocalRule, allowed: &Region) -> Result<LocalRule, StructureError> {
    if rule.s() != 1 {
        return Err(StructureError::Unsupported(format!(
            "structure analysis is one-dimensional; got s = {}",
            rule.s()
        )));
    }
    if !rule.region().is_subset(allowed) {
        return Err(StructureError::NotNearestNeighbor(rule.region().clone()));
    }
    validate_rule(rule)?.into_result()?;
    Ok(rule.widen(allowed)?)
}

/// Decompose a nearest-neighbor rule into two block layers (u, v).
pub fn margolus_decompose(rule: &LocalRule) -> Result<MargolusForm, StructureError> {
    let wide = require_line(rule, &Region::interval(-1, 1))?;
    let d = rule.cell_dim;
    let d2 = d * d;
    let (out, images) = unit_images(&wide, &Region::line([0, 1]))?;
    if out != Region::interval(-1, 2) {
        return Err(StructureError::Inconsistent(format!("block image region {out}")));
    }
    let left = full_block(&images, Side::Left, (d2, d2), -1)?;
    let right = full_block(&images, Side::Right, (d2, d2), 1)?;
    let (nm, np) = (left.blocks[0].n, right.blocks[0].n);
    if nm * np != d2 {
        return Err(StructureError::DimensionProduct(nm, np, d2));
    }
    let (u, v) = split_unitaries(&images, &left, &right, d2)?;
    let form = MargolusForm {
        cell_dim: d,
        n_minus: nm,
        n_plus: np,
        block_bases: (left.basis_change.clone(), right.basis_change.clone()),
        u,
        v,
    };
    let res = form.rebuild()?.distance(rule);
    if res > REBUILD_TOL {
        return Err(StructureError::Inconsistent(format!(
            "rebuilt rule differs by {res:.3e}"
        )));
    }
    Ok(form)
}

/// Inverse rule from the two layers (v†, u†).
pub fn invert(form: &MargolusForm) -> Result<LocalRule, StructureError> {
    Ok(from_margolus(
        &form.v.adjoint(),
        &form.u.adjoint(),
        form.n_plus,
        form.n_minus,
        form.cell_dim,
    )?)
}

/// A rule on N = {0, 1}: each cell splits as ℂ^{n₀} ⊗ ℂ^{n₁} and the n₁ part
/// recombines with the n₀ part of the right neighbor.
#[derive(Clone, Debug)]
pub struct UnilateralForm {
    pub cell_dim: usize,
    pub n0: usize,
    pub n1: usize,
    pub u: CMat,
    pub v: CMat,
}

impl UnilateralForm {
    pub fn rebuild(&self) -> Result<LocalRule, RuleError> {
        let d = self.cell_dim;
        let images = (0..d * d)
            .map(|k| two_layer_image(&self.u, &self.v, self.n0, self.n1, &unit(d, k / d, k % d)))
            .collect();
        Ok(LocalRule::new(d, crate::lattice::NeighborhoodScheme::line([0, 1]), images)?.trimmed())
    }
}

pub fn unilateral_decompose(rule: &LocalRule) -> Result<UnilateralForm, StructureError> {
    let wide = require_line(rule, &Region::line([0, 1]))?;
    let d = rule.cell_dim;
    let d0 = full_block(&wide.images, Side::Left, (d, d), 0)?;
    let d1 = full_block(&wide.images, Side::Right, (d, d), 1)?;
    let (n0, n1) = (d0.blocks[0].n, d1.blocks[0].n);
    if n0 * n1 != d {
        return Err(StructureError::DimensionProduct(n0, n1, d));
    }
    let (u, v) = split_unitaries(&wide.images, &d0, &d1, d)?;
    let form = UnilateralForm { cell_dim: d, n0, n1, u, v };
    let res = form.rebuild()?.distance(rule);
    if res > REBUILD_TOL {
        return Err(StructureError::Inconsistent(format!(
            "rebuilt rule differs by {res:.3e}"
        )));
    }
    Ok(form)
}

/// Support algebra of the one-cell images on the cell at `pos` of the window.
fn site_support(
    images: &[CMat],
    pos: usize,
    sites: usize,
    d: usize,
) -> Result<AlgebraBlockStructure, StructureError> {
    let mut perm: Vec<usize> = vec![pos];
    perm.extend((0..sites).filter(|&p| p != pos));
    let dims = vec![d; sites];
    let moved: Vec<CMat> = images.iter().map(|m| tensor::permute(m, &perm, &dims)).collect();
    let sup = support_space(&moved, Side::Left, (d, d.pow(sites as u32 - 1)))?;
    Ok(decompose(&generated_algebra(&sup)?)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ClassKind {
    CellwiseRotation,
    RightShiftComposed,
    LeftShiftComposed,
    PhaseGateComposed,
}

/// Canonical form of a nearest-neighbor qubit rule.
///
/// Cellwise: C_W. Shifts: shift ∘ C_W. Phase gates:
/// C_R ∘ P_φ ∘ C_{R†W}, with C_W(A) = W†AW and R the basis change.
#[derive(Clone, Debug)]
pub struct ClassificationResult {
    pub kind: ClassKind,
    pub cellwise: CMat,
    pub phi: Option<f64>,
    pub basis_change: CMat,
}

impl ClassificationResult {
    pub fn canonical_rule(&self) -> Result<LocalRule, RuleError> {
        let w = cellwise(&self.cellwise);
        match self.kind {
            ClassKind::CellwiseRotation => Ok(w),
            ClassKind::RightShiftComposed => compose(&right_shift(2), &w),
            ClassKind::LeftShiftComposed => compose(&left_shift(2), &w),
            ClassKind::PhaseGateComposed => {
                let r = &self.basis_change;
                let inner = compose(
                    &phase_gate(self.phi.unwrap_or(0.0)),
                    &cellwise(&(r.adjoint() * &self.cellwise)),
                )?;
                compose(&cellwise(r), &inner)
            }
        }
    }
}

fn wrap_angle(x: f64) -> f64 {
    let t = x.rem_euclid(2.0 * std::f64::consts::PI);
    if t > std::f64::consts::PI {
        t - 2.0 * std::f64::consts::PI
    } else {
        t
    }
}

/// First-site factor of a product vector on a chain of `l` cells.
fn first_factor(col: &[C64], d: usize, l: usize) -> linalg::CVec {
    let rest = d.pow(l as u32 - 1);
    let best = (0..rest)
        .max_by(|&a, &b| {
            let na: f64 = (0..d).map(|i| col[i * rest + a].norm_sqr()).sum();
            let nb: f64 = (0..d).map(|i| col[i * rest + b].norm_sqr()).sum();
            na.total_cmp(&nb)
        })
        .unwrap_or(0);
    let v = linalg::CVec::from_iterator(d, (0..d).map(|i| col[i * rest + best]));
    let n = v.norm();
    v / c(n, 0.0)
}

/// Classify a valid qubit rule on {−1, 0, 1} as cellwise, shifted or phase gate.
pub fn classify_nn_qubit(rule: &LocalRule) -> Result<ClassificationResult, StructureError> {
    if rule.cell_dim != 2 {
        return Err(StructureError::Unsupported(format!(
            "classification covers qubits only; got d = {}",
            rule.cell_dim
        )));
    }
    let wide = require_line(rule, &Region::interval(-1, 1))?;
    let dm = site_support(&wide.images, 0, 3, 2)?;
    let dp = site_support(&wide.images, 2, 3, 2)?;
    let trimmed = rule.trimmed();
    if dm.algebra_dim() == 1 || dp.algebra_dim() == 1 {
        if trimmed.region().len() != 1 {
            return Err(StructureError::Inconsistent(format!(
                "one-sided rule spreads over {}",
                trimmed.region()
            )));
        }
        let kind = match trimmed.region().sites()[0].0[0] {
            0 => ClassKind::CellwiseRotation,
            1 => ClassKind::RightShiftComposed,
            _ => ClassKind::LeftShiftComposed,
        };
        let w = unitary_from_automorphism(&trimmed.images, 2)?.adjoint();
        return Ok(ClassificationResult {
            kind,
            cellwise: w,
            phi: None,
            basis_change: linalg::identity(2),
        });
    }
    let abelian = |bs: &AlgebraBlockStructure| bs.blocks.len() == 2 && bs.algebra_dim() == 2;
    if !abelian(&dm) || !abelian(&dp) {
        return Err(StructureError::Inconsistent(
            "both side algebras are nontrivial but not abelian".into(),
        ));
    }
    // R maps the common eigenbasis of D₊₁ to the computational basis
    let mut e = CMat::zeros(2, 2);
    e.set_column(0, &dp.block_isometry(0).column(0));
    e.set_column(1, &dp.block_isometry(1).column(0));
    let r = e.adjoint();
    let p = &r * &dm.blocks[0].central_projection * r.adjoint();
    if p[(0, 1)].norm() > REBUILD_TOL {
        return Err(StructureError::Inconsistent(
            "left and right side algebras are not jointly diagonal".into(),
        ));
    }
    // T' = C_{R†} ∘ T ∘ C_R has diagonal side algebras and global unitary V^{⊗L} Δ
    let l = 5;
    let torus = TorusSpec::ring(l);
    let conj = compose(&cellwise(&r.adjoint()), &compose(rule, &cellwise(&r))?)?;
    let g = global_unitary(&conj, &torus)?;
    let col = |a: usize| g.column(a).iter().copied().collect::<Vec<_>>();
    let v0 = first_factor(&col(0), 2, l);
    let v1 = first_factor(&col(1 << (l - 1)), 2, l);
    let mut v = CMat::zeros(2, 2);
    v.set_column(0, &v0);
    v.set_column(1, &v1);
    if unitarity_residual(&v) > REBUILD_TOL {
        return Err(StructureError::Inconsistent("cellwise factor is not unitary".into()));
    }
    let vl = linalg::kron_all(std::iter::repeat(&v).take(l));
    let delta = vl.adjoint() * &g;
    let off = &delta - CMat::from_diagonal(&delta.diagonal());
    if op_norm(&off) > REBUILD_TOL {
        return Err(StructureError::Inconsistent(
            "conjugated rule is not a phase gate times a rotation".into(),
        ));
    }
    let dz = |a: usize| delta[(a, a)];
    let top = 1 << (l - 1);
    let single = dz(top) / dz(0);
    let phi = wrap_angle((dz(top | (top >> 1)) * dz(0) / (dz(top) * dz(top >> 1))).arg());
    let mut w = v.clone();
    w.set_column(1, &(v.column(1) * single / c(single.norm(), 0.0)));
    let result = ClassificationResult {
        kind: ClassKind::PhaseGateComposed,
        cellwise: w,
        phi: Some(phi),
        basis_change: r,
    };
    let rebuilt = global_unitary(&result.canonical_rule()?, &torus)?;
    let res = phase_distance(&rebuilt, &global_unitary(rule, &torus)?);
    if res > REBUILD_TOL {
        return Err(StructureError::Inconsistent(format!(
            "canonical phase-gate form differs by {res:.3e}"
        )));
    }
    Ok(result)
}

/// Rule of conditional-unitary form: the target cell is rotated by U_{μν}
/// depending on the basis labels μ, ν of its left and right neighbors.
pub fn conditional_rule(us: &[Vec<CMat>]) -> Result<LocalRule, RuleError> {
    let d = us.len();
    let proj = |m: usize| unit(d, m, m);
    let images = (0..d * d)
        .map(|k| {
            let e = unit(d, k / d, k % d);
            let mut t = CMat::zeros(d * d * d, d * d * d);
            for (mu, row) in us.iter().enumerate() {
                for (nu, u) in row.iter().enumerate() {
                    let mid = u.adjoint() * &e * u;
                    t += linalg::kron_all([&proj(mu), &mid, &proj(nu)]);
                }
            }
            t
        })
        .collect();
    LocalRule::new(d, crate::lattice::NeighborhoodScheme::line(-1..=1), images)
}

/// Largest commutator among the relative rotations U_{00}† U_{μν}; zero iff
/// the conditional unitaries become jointly diagonal after one common rotation.
pub fn conditional_commutator_residual(us: &[Vec<CMat>]) -> f64 {
    let base = us[0][0].adjoint();
    let rel: Vec<CMat> = us.iter().flatten().map(|u| &base * u).collect();
    let mut worst: f64 = 0.0;
    for a in &rel {
        for b in &rel {
            worst = worst.max(op_norm(&(a * b - b * a)));
        }
    }
    worst
}

/// Wider rules are regrouped into supercells of side `k` before decomposing.
pub fn regroup_and_decompose(rule: &LocalRule, k: usize) -> Result<MargolusForm, StructureError> {
    let grouped = crate::rules::regroup(rule, k)?;
    margolus_decompose(&grouped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hadamard, random_unitary, rng};
    use crate::rules::{from_abelian_spec, identity_rule, AbelianRuleSpec};
    use std::f64::consts::PI;

    fn conj(rule: &LocalRule, w: &CMat) -> LocalRule {
        compose(&cellwise(w), &compose(rule, &cellwise(&w.adjoint())).unwrap()).unwrap()
    }

    #[test]
    fn shift_quadrants() {
        let f = margolus_decompose(&right_shift(2)).unwrap();
        assert_eq!((f.n_minus, f.n_plus), (1, 4));
        let f = margolus_decompose(&left_shift(2)).unwrap();
        assert_eq!((f.n_minus, f.n_plus), (4, 1));
    }

    #[test]
    fn cellwise_and_phase_quadrants() {
        let mut r = rng(70);
        let w = random_unitary(2, &mut r);
        let f = margolus_decompose(&cellwise(&w)).unwrap();
        assert_eq!((f.n_minus, f.n_plus), (2, 2));
        let f = margolus_decompose(&phase_gate(0.7)).unwrap();
        assert_eq!((f.n_minus, f.n_plus), (2, 2));
        assert!(f.rebuild().unwrap().distance(&phase_gate(0.7)) < 1e-9);
    }

    #[test]
    fn quadrant_dims_survive_conjugation() {
        let mut r = rng(71);
        let base = compose(&phase_gate(1.1), &cellwise(&hadamard())).unwrap();
        let w = random_unitary(2, &mut r);
        let a = margolus_decompose(&base).unwrap();
        let b = margolus_decompose(&conj(&base, &w)).unwrap();
        assert_eq!(a.quadrant_dims(), b.quadrant_dims());
    }

    #[test]
    fn inverses() {
        let mut r = rng(72);
        let w = random_unitary(2, &mut r);
        let inv = invert(&margolus_decompose(&cellwise(&w)).unwrap()).unwrap();
        assert!(inv.distance(&cellwise(&w.adjoint())) < 1e-9);
        let inv = invert(&margolus_decompose(&right_shift(2)).unwrap()).unwrap();
        assert!(inv.distance(&left_shift(2)) < 1e-9);
        let torus = TorusSpec::ring(5);
        let inv = invert(&margolus_decompose(&phase_gate(0.8)).unwrap()).unwrap();
        let a = global_unitary(&inv, &torus).unwrap();
        let b = global_unitary(&phase_gate(-0.8), &torus).unwrap();
        assert!(phase_distance(&a, &b) < 1e-9);
    }

    #[test]
    fn inverse_composes_to_identity() {
        let mut r = rng(73);
        let rule = conj(&compose(&phase_gate(0.3), &cellwise(&hadamard())).unwrap(), &random_unitary(2, &mut r));
        let inv = invert(&margolus_decompose(&rule).unwrap()).unwrap();
        assert!(compose(&inv, &rule).unwrap().distance(&identity_rule(2)) < 1e-9);
        let twice = invert(&margolus_decompose(&inv).unwrap()).unwrap();
        let torus = TorusSpec::ring(5);
        let a = global_unitary(&twice, &torus).unwrap();
        let b = global_unitary(&rule, &torus).unwrap();
        assert!(phase_distance(&a, &b) < 1e-9);
    }

    #[test]
    fn wide_rules_need_regrouping() {
        let wide = compose(&right_shift(2), &right_shift(2)).unwrap();
        assert!(matches!(margolus_decompose(&wide), Err(StructureError::NotNearestNeighbor(_))));
        let f = regroup_and_decompose(&wide, 2).unwrap();
        assert_eq!(f.cell_dim, 4);
        assert_eq!((f.n_minus, f.n_plus), (1, 16));
    }

    #[test]
    fn unilateral_examples() {
        let f = unilateral_decompose(&cellwise(&hadamard())).unwrap();
        assert_eq!((f.n0, f.n1), (2, 1));
        let f = unilateral_decompose(&right_shift(2)).unwrap();
        assert_eq!((f.n0, f.n1), (1, 2));
    }

    #[test]
    fn unilateral_generate_then_recover() {
        let mut r = rng(74);
        let u = random_unitary(4, &mut r);
        let v = random_unitary(4, &mut r);
        let images = (0..16)
            .map(|k| two_layer_image(&u, &v, 2, 2, &unit(4, k / 4, k % 4)))
            .collect();
        let rule = LocalRule::new(4, crate::lattice::NeighborhoodScheme::line([0, 1]), images).unwrap();
        assert!(validate_rule(&rule).unwrap().is_valid());
        let f = unilateral_decompose(&rule).unwrap();
        assert_eq!((f.n0, f.n1), (2, 2));
        assert!(f.rebuild().unwrap().distance(&rule) < 1e-9);
    }

    #[test]
    fn classify_simple_kinds() {
        let res = classify_nn_qubit(&cellwise(&hadamard())).unwrap();
        assert_eq!(res.kind, ClassKind::CellwiseRotation);
        let mut r = rng(75);
        let w = random_unitary(2, &mut r);
        let res = classify_nn_qubit(&compose(&right_shift(2), &cellwise(&w)).unwrap()).unwrap();
        assert_eq!(res.kind, ClassKind::RightShiftComposed);
        assert!(phase_distance(&res.cellwise, &w) < 1e-9);
        let res = classify_nn_qubit(&compose(&left_shift(2), &cellwise(&w)).unwrap()).unwrap();
        assert_eq!(res.kind, ClassKind::LeftShiftComposed);
    }

    #[test]
    fn classify_conjugated_phase_gate() {
        let mut r = rng(76);
        for _ in 0..5 {
            let w = random_unitary(2, &mut r);
            let rule = conj(&phase_gate(PI / 2.0), &w);
            let res = classify_nn_qubit(&rule).unwrap();
            assert_eq!(res.kind, ClassKind::PhaseGateComposed);
            let phi = res.phi.unwrap();
            assert!((phi.abs() - PI / 2.0).abs() < 1e-9, "phi = {phi}");
            let torus = TorusSpec::ring(5);
            let a = global_unitary(&res.canonical_rule().unwrap(), &torus).unwrap();
            let b = global_unitary(&rule, &torus).unwrap();
            assert!(phase_distance(&a, &b) < 1e-9);
        }
    }

    #[test]
    fn conditional_form_of_abelian_rules() {
        let mut r = rng(77);
        for d in 2..=3 {
            let mut u = vec![vec![c(1.0, 0.0); d]; d];
            for (a, row) in u.iter_mut().enumerate().skip(1) {
                for (b, z) in row.iter_mut().enumerate().skip(1) {
                    *z = C64::from_polar(1.0, 0.37 * (a * b) as f64 + 0.1 * d as f64);
                }
            }
            let spec = AbelianRuleSpec { u, v: random_unitary(d, &mut r) };
            let us: Vec<Vec<CMat>> = (0..d)
                .map(|mu| {
                    (0..d)
                        .map(|nu| {
                            let diag: Vec<C64> = (0..d).map(|k| spec.three_point(mu, k, nu)).collect();
                            &spec.v * CMat::from_diagonal(&nalgebra::DVector::from_vec(diag))
                        })
                        .collect()
                })
                .collect();
            let rule = conditional_rule(&us).unwrap();
            assert!(rule.distance(&from_abelian_spec(&spec).unwrap()) < 1e-10);
            assert!(validate_rule(&rule).unwrap().is_valid());
            assert!(conditional_commutator_residual(&us) < 1e-10);
        }
    }

    #[test]
    fn generic_conditional_unitaries_fail() {
        let mut r = rng(78);
        for d in 2..=3 {
            let us: Vec<Vec<CMat>> = (0..d).map(|_| (0..d).map(|_| random_unitary(d, &mut r)).collect()).collect();
            assert!(conditional_commutator_residual(&us) > 1e-3);
            assert!(!validate_rule(&conditional_rule(&us).unwrap()).unwrap().is_valid());
        }
    }
}

