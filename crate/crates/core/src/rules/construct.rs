//! Rule constructors: cellwise rotations, shifts, commuting unitaries and
//! abelian phase-gate rules.

use crate::lattice::{self, NeighborhoodScheme, Region, Site};
use crate::linalg::{
    c, identity, kron, kron_all, op_norm, unit, unitarity_residual, CMat, C64, EPS,
};
use crate::rules::{embed_in, validate_rule, LocalOperator, LocalRule, RuleError};

fn units(d: usize) -> impl Iterator<Item = CMat> {
    (0..d * d).map(move |k| unit(d, k / d, k % d))
}

/// T(A) = W† A W on every cell.
pub fn cellwise(w: &CMat) -> LocalRule {
    let d = w.nrows();
    let images = units(d).map(|e| w.adjoint() * e * w).collect();
    LocalRule {
        cell_dim: d,
        scheme: NeighborhoodScheme::line([0]),
        images,
    }
}

pub fn identity_rule(d: usize) -> LocalRule {
    cellwise(&identity(d))
}

/// Observables move one site to the right: T(A at x) = A at x+1.
pub fn right_shift(d: usize) -> LocalRule {
    LocalRule {
        cell_dim: d,
        scheme: NeighborhoodScheme::line([1]),
        images: units(d).collect(),
    }
}

/// Observables move one site to the left.
pub fn left_shift(d: usize) -> LocalRule {
    LocalRule {
        cell_dim: d,
        scheme: NeighborhoodScheme::line([-1]),
        images: units(d).collect(),
    }
}

/// A unitary on a finite region whose translates commute up to phases.
#[derive(Clone, Debug)]
pub struct CommutingUnitaryFamily {
    pub u0: LocalOperator,
    /// ζ_x for U_0 U_x = ζ_x U_x U_0; offsets not listed default to 1.
    pub phases: Vec<(Site, C64)>,
}

impl CommutingUnitaryFamily {
    pub fn commuting(u0: LocalOperator) -> Self {
        CommutingUnitaryFamily {
            u0,
            phases: Vec::new(),
        }
    }

    fn phase(&self, x: &Site) -> C64 {
        self.phases
            .iter()
            .find(|(y, _)| y == x)
            .map(|(_, z)| *z)
            .unwrap_or(c(1.0, 0.0))
    }

    /// Largest violation of U_0 U_x = ζ_x U_x U_0, with the offending offset.
    pub fn phase_residuals(&self) -> Vec<(Site, f64)> {
        let nt = &self.u0.region;
        let d = self.u0.cell_dim;
        let mut out = Vec::new();
        for x in lattice::difference(nt, nt).sites() {
            if x.is_zero() {
                continue;
            }
            let moved = nt.translate(x);
            let u = nt.union(&moved);
            let a = embed_in(&self.u0.matrix, nt, &u, d);
            let b = embed_in(&self.u0.matrix, &moved, &u, d);
            let res = op_norm(&(&a * &b - (&b * &a) * self.phase(x)));
            out.push((x.clone(), res));
        }
        out
    }
}

/// T₀(A) = W† A W with W the product of all translates U_x touching the origin.
pub fn from_commuting_unitary(fam: &CommutingUnitaryFamily) -> Result<LocalRule, RuleError> {
    let res = unitarity_residual(&fam.u0.matrix);
    if res > EPS {
        return Err(RuleError::NotUnitary {
            what: "u0",
            residual: res,
        });
    }
    if let Some((x, r)) = fam.phase_residuals().into_iter().find(|(_, r)| *r > EPS) {
        return Err(RuleError::PhaseCommutation {
            offset: x,
            residual: r,
        });
    }
    let nt = &fam.u0.region;
    let d = fam.u0.cell_dim;
    let n = lattice::difference(nt, nt);
    let mut w = identity(d.pow(n.len() as u32));
    for x in nt.neg().sites() {
        w = w * embed_in(&fam.u0.matrix, &nt.translate(x), &n, d);
    }
    let origin = Region::single(Site::origin(nt.dim()));
    let images = units(d)
        .map(|e| w.adjoint() * embed_in(&e, &origin, &n, d) * &w)
        .collect();
    let rule = LocalRule::new(d, NeighborhoodScheme::new(n)?, images)?.trimmed();
    validate_rule(&rule)?.into_result()?;
    Ok(rule)
}

/// Phase table u(a, b) with u(0, ·) = u(·, 0) = 1 and a one-cell unitary V.
#[derive(Clone, Debug)]
pub struct AbelianRuleSpec {
    pub u: Vec<Vec<C64>>,
    pub v: CMat,
}

impl AbelianRuleSpec {
    pub fn d(&self) -> usize {
        self.u.len()
    }

    pub fn check(&self) -> Result<(), RuleError> {
        let d = self.d();
        if d == 0 || self.u.iter().any(|row| row.len() != d) {
            return Err(RuleError::Spec("phase table must be square".into()));
        }
        if self.v.nrows() != d || self.v.ncols() != d {
            return Err(RuleError::OperatorDimension {
                expected: d,
                found: self.v.nrows(),
            });
        }
        for (a, row) in self.u.iter().enumerate() {
            for (b, z) in row.iter().enumerate() {
                if (z.norm() - 1.0).abs() > EPS {
                    return Err(RuleError::Spec(format!("u({a},{b}) is not a phase")));
                }
                if (a == 0 || b == 0) && (z - c(1.0, 0.0)).norm() > EPS {
                    return Err(RuleError::Spec(format!(
                        "u({a},{b}) must be 1 in the normalized gauge"
                    )));
                }
            }
        }
        let res = unitarity_residual(&self.v);
        if res > EPS {
            return Err(RuleError::NotUnitary {
                what: "V",
                residual: res,
            });
        }
        Ok(())
    }

    /// Two-cell diagonal phase gate Σ u(a,b)|ab⟩⟨ab|.
    pub fn gate(&self) -> CMat {
        let d = self.d();
        let mut g = CMat::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                g[(a * d + b, a * d + b)] = self.u[a][b];
            }
        }
        g
    }

    /// Three-label phase u(μκν) = u(μ,κ)·u(κ,ν) of the conditional form.
    pub fn three_point(&self, mu: usize, kappa: usize, nu: usize) -> C64 {
        self.u[mu][kappa] * self.u[kappa][nu]
    }

    /// Largest violation of the functional equation relating the
    /// three-label phases for all index tuples.
    pub fn functional_equation_residual(&self) -> f64 {
        let d = self.d();
        let u = |a, b, c| self.three_point(a, b, c);
        let mut worst: f64 = 0.0;
        for mu in 0..d {
            for a in 0..d {
                for b in 0..d {
                    for a2 in 0..d {
                        for b2 in 0..d {
                            for nu2 in 0..d {
                                let lhs =
                                    u(mu, b, a2) / u(mu, a, a2) * (u(b, b2, nu2) / u(b, a2, nu2));
                                let rhs =
                                    u(mu, b, b2) / u(mu, a, b2) * (u(a, b2, nu2) / u(a, a2, nu2));
                                worst = worst.max((lhs - rhs).norm());
                            }
                        }
                    }
                }
            }
        }
        worst
    }
}

/// T₀(A) = X†(1 ⊗ V†AV ⊗ 1)X with X = (U ⊗ 1)(1 ⊗ U) on {−1, 0, 1}.
pub fn from_abelian_spec(spec: &AbelianRuleSpec) -> Result<LocalRule, RuleError> {
    spec.check()?;
    let d = spec.d();
    let g = spec.gate();
    let one = identity(d);
    let x = kron(&g, &one) * kron(&one, &g);
    let images = units(d)
        .map(|e| {
            let mid = spec.v.adjoint() * e * &spec.v;
            x.adjoint() * kron_all([&one, &mid, &one]) * &x
        })
        .collect();
    let rule = LocalRule::new(d, NeighborhoodScheme::line(-1..=1), images)?;
    validate_rule(&rule)?.into_result()?;
    Ok(rule)
}

/// Qubit phase-gate rule built from diag(1, 1, 1, e^{iφ}) on neighboring pairs.
pub fn phase_gate(phi: f64) -> LocalRule {
    let mut u = vec![vec![c(1.0, 0.0); 2]; 2];
    u[1][1] = C64::from_polar(1.0, phi);
    from_abelian_spec(&AbelianRuleSpec { u, v: identity(2) }).expect("phase gate rule is valid")
}
