//! Two-layer block rules on pairs of neighboring cells (one dimension).

use crate::lattice::{NeighborhoodScheme, Region, Site};
use crate::linalg::{identity, kron, kron_all, op_norm, unit, unitarity_residual, CMat, EPS};
use crate::rules::{embed_in, validate_rule, LocalRule, RuleError};

/// Images of the matrix units at sites 0 and 1 on the window {−1, 0, 1, 2}
/// together with the translation defect between them.
#[derive(Clone, Debug)]
pub struct MargolusCheck {
    pub site0: Vec<CMat>,
    pub site1: Vec<CMat>,
    pub deviation: f64,
}

fn check_unitary(m: &CMat, dim: usize, what: &'static str) -> Result<(), RuleError> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(RuleError::OperatorDimension {
            expected: dim,
            found: m.nrows(),
        });
    }
    let residual = unitarity_residual(m);
    if residual > EPS {
        return Err(RuleError::NotUnitary { what, residual });
    }
    Ok(())
}

/// Heisenberg image of an operator on the pair {0, 1}:
/// (v ⊗ v)(1 ⊗ u X u† ⊗ 1)(v ⊗ v)† on {−1, 0, 1, 2}.
///
/// `u` maps the pair onto ℂ^{n₋} ⊗ ℂ^{n₊}; `v` maps ℂ^{n₊} ⊗ ℂ^{n₋}
/// (right half of one block, left half of the next) back onto a pair.
pub fn two_layer_image(u: &CMat, v: &CMat, n_minus: usize, n_plus: usize, x: &CMat) -> CMat {
    let vv = kron(v, v);
    let mid = kron_all([
        &identity(n_plus),
        &(u * x * u.adjoint()),
        &identity(n_minus),
    ]);
    &vv * mid * vv.adjoint()
}

/// Images of E_ij at sites 0 and 1 and their translation defect.
pub fn margolus_images(
    u: &CMat,
    v: &CMat,
    n_minus: usize,
    n_plus: usize,
    d: usize,
) -> Result<MargolusCheck, RuleError> {
    if n_minus * n_plus != d * d {
        return Err(RuleError::DimensionProduct(format!(
            "{n_minus}·{n_plus} ≠ {d}²"
        )));
    }
    check_unitary(u, d * d, "u")?;
    check_unitary(v, d * d, "v")?;
    let one = identity(d);
    let window = Region::interval(-1, 2);
    let wide = Region::interval(-1, 3);
    let moved = window.translate(&Site::from(1));
    let mut site0 = Vec::with_capacity(d * d);
    let mut site1 = Vec::with_capacity(d * d);
    let mut deviation: f64 = 0.0;
    for k in 0..d * d {
        let e = unit(d, k / d, k % d);
        let a = two_layer_image(u, v, n_minus, n_plus, &kron(&e, &one));
        let b = two_layer_image(u, v, n_minus, n_plus, &kron(&one, &e));
        let diff = embed_in(&b, &window, &wide, d) - embed_in(&a, &moved, &wide, d);
        deviation = deviation.max(op_norm(&diff));
        site0.push(a);
        site1.push(b);
    }
    Ok(MargolusCheck {
        site0,
        site1,
        deviation,
    })
}

/// Single-cell rule realized by the two layers; fails unless the images at
/// site 1 are the translates of those at site 0.
pub fn from_margolus(
    u: &CMat,
    v: &CMat,
    n_minus: usize,
    n_plus: usize,
    d: usize,
) -> Result<LocalRule, RuleError> {
    let check = margolus_images(u, v, n_minus, n_plus, d)?;
    if check.deviation > 1e-8 {
        return Err(RuleError::NotTranslationInvariant {
            deviation: check.deviation,
        });
    }
    let rule = LocalRule::new(d, NeighborhoodScheme::line(-1..=2), check.site0)?.trimmed();
    validate_rule(&rule)?.into_result()?;
    Ok(rule)
}
