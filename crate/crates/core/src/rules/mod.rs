//! Local transition rules: data model, validation and global evolution.

mod classical;
mod construct;
mod margolus;

pub use classical::{
    find_inverse, global_step, is_globally_invertible, quantize_classical, ClassicalCA,
};
pub use construct::{
    cellwise, from_abelian_spec, from_commuting_unitary, identity_rule, left_shift, phase_gate,
    right_shift, AbelianRuleSpec, CommutingUnitaryFamily,
};
pub use margolus::{from_margolus, margolus_images, two_layer_image, MargolusCheck};

use thiserror::Error;

use crate::algebra::{self, AlgebraError};
use crate::lattice::{
    self, is_regular, wrap, LatticeError, NeighborhoodScheme, Region, Site, TorusSpec,
};
use crate::linalg::{self, column_space, op_norm, random_vector, unit, CMat, DEFAULT_SEED, EPS};
use crate::tensor::{self, Split};

/// Largest dense dimension built unless the caller raises it.
pub const DEFAULT_DIM_CAP: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuleError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("expected {expected} images, found {found}")]
    ImageCount { expected: usize, found: usize },
    #[error("operator dimension {found} does not match {expected}")]
    OperatorDimension { expected: usize, found: usize },
    #[error("images are not a unital *-homomorphism ({what}): residual {residual:.3e}")]
    NotHomomorphism { what: &'static str, residual: f64 },
    #[error("translates fail to commute at offset {offset}: residual {residual:.3e}")]
    NotCommuting { offset: Site, residual: f64 },
    #[error("scheme is not regular on torus {0:?}")]
    NotRegular(Vec<usize>),
    #[error("region does not fit on the torus: {0}")]
    RegionOverflow(String),
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("phase commutation fails at offset {offset}: residual {residual:.3e}")]
    PhaseCommutation { offset: Site, residual: f64 },
    #[error("{what} is not unitary: residual {residual:.3e}")]
    NotUnitary { what: &'static str, residual: f64 },
    #[error("no inverse automaton: {0}")]
    MissingInverse(String),
    #[error("quantized images are not local: {0}")]
    NonLocal(String),
    #[error("block dimensions violate the product rule: {0}")]
    DimensionProduct(String),
    #[error("two-layer rule is not translation invariant: deviation {deviation:.3e}")]
    NotTranslationInvariant { deviation: f64 },
    #[error("invalid rule data: {0}")]
    Spec(String),
}

/// An operator on a finite region, factors in lexicographic site order.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperator {
    pub region: Region,
    pub matrix: CMat,
    pub cell_dim: usize,
}

fn dim_of(d: usize, n: usize) -> usize {
    d.pow(n as u32)
}

/// Embed `m` (factors ordered as `sub`) into the superset region `sup`.
pub fn embed_in(m: &CMat, sub: &Region, sup: &Region, d: usize) -> CMat {
    let pos: Vec<usize> = sub
        .sites()
        .iter()
        .map(|x| {
            sup.position(x)
                .expect("sub-region lies in the target region")
        })
        .collect();
    Split::uniform(&pos, sup.len(), d).embed(m)
}

impl LocalOperator {
    pub fn new(region: Region, matrix: CMat, cell_dim: usize) -> Result<Self, RuleError> {
        let want = dim_of(cell_dim, region.len());
        if matrix.nrows() != want || matrix.ncols() != want {
            return Err(RuleError::OperatorDimension {
                expected: want,
                found: matrix.nrows(),
            });
        }
        Ok(LocalOperator {
            region,
            matrix,
            cell_dim,
        })
    }

    pub fn at(site: Site, matrix: CMat) -> Self {
        let d = matrix.nrows();
        LocalOperator {
            region: Region::single(site),
            matrix,
            cell_dim: d,
        }
    }

    pub fn embed(&self, superset: &Region) -> Result<LocalOperator, RuleError> {
        if !self.region.is_subset(superset) {
            return Err(RuleError::RegionOverflow(format!(
                "{} is not inside {}",
                self.region, superset
            )));
        }
        Ok(LocalOperator {
            region: superset.clone(),
            matrix: embed_in(&self.matrix, &self.region, superset, self.cell_dim),
            cell_dim: self.cell_dim,
        })
    }

    pub fn translate(&self, x: &Site) -> LocalOperator {
        LocalOperator {
            region: self.region.translate(x),
            matrix: self.matrix.clone(),
            cell_dim: self.cell_dim,
        }
    }

    /// Drop every site on which the operator acts as the identity.
    pub fn trimmed(&self) -> LocalOperator {
        let keep = trivial_free_sites(
            std::slice::from_ref(&self.matrix),
            self.region.len(),
            self.cell_dim,
        );
        self.restrict_to(&keep)
    }

    fn restrict_to(&self, keep: &[usize]) -> LocalOperator {
        let dims = vec![self.cell_dim; self.region.len()];
        let sites = keep.iter().map(|&p| self.region.sites()[p].clone());
        LocalOperator {
            region: Region::new(self.region.dim(), sites).expect("same lattice dimension"),
            matrix: tensor::restrict(&self.matrix, keep, &dims),
            cell_dim: self.cell_dim,
        }
    }

    /// Distance to `other` after embedding both into the union of regions.
    pub fn distance(&self, other: &LocalOperator) -> f64 {
        let u = self.region.union(&other.region);
        let a = embed_in(&self.matrix, &self.region, &u, self.cell_dim);
        let b = embed_in(&other.matrix, &other.region, &u, self.cell_dim);
        op_norm(&(a - b))
    }
}

/// Positions of factors that are not the identity for at least one matrix.
fn trivial_free_sites(mats: &[CMat], n: usize, d: usize) -> Vec<usize> {
    let dims = vec![d; n];
    let keep: Vec<usize> = (0..n)
        .filter(|&p| {
            mats.iter()
                .any(|m| tensor::factor_deviation(m, p, &dims) > EPS)
        })
        .collect();
    if keep.is_empty() {
        vec![0]
    } else {
        keep
    }
}

/// Images of the one-cell matrix units E_{ij} (index i·d + j) on the scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalRule {
    pub cell_dim: usize,
    pub scheme: NeighborhoodScheme,
    pub images: Vec<CMat>,
}

impl LocalRule {
    pub fn new(
        cell_dim: usize,
        scheme: NeighborhoodScheme,
        images: Vec<CMat>,
    ) -> Result<Self, RuleError> {
        if images.len() != cell_dim * cell_dim {
            return Err(RuleError::ImageCount {
                expected: cell_dim * cell_dim,
                found: images.len(),
            });
        }
        let want = dim_of(cell_dim, scheme.region().len());
        if let Some(m) = images
            .iter()
            .find(|m| m.nrows() != want || m.ncols() != want)
        {
            return Err(RuleError::OperatorDimension {
                expected: want,
                found: m.nrows(),
            });
        }
        Ok(LocalRule {
            cell_dim,
            scheme,
            images,
        })
    }

    pub fn s(&self) -> usize {
        self.scheme.dim()
    }

    pub fn region(&self) -> &Region {
        self.scheme.region()
    }

    pub fn image(&self, i: usize, j: usize) -> &CMat {
        &self.images[i * self.cell_dim + j]
    }

    /// Image of an arbitrary one-cell operator by linearity.
    pub fn apply_local(&self, a: &CMat) -> CMat {
        let d = self.cell_dim;
        let n = self.images[0].nrows();
        let mut out = CMat::zeros(n, n);
        for i in 0..d {
            for j in 0..d {
                if a[(i, j)].norm() > 0.0 {
                    out += &self.images[i * d + j] * a[(i, j)];
                }
            }
        }
        out
    }

    /// Same rule with images embedded into a larger scheme.
    pub fn widen(&self, region: &Region) -> Result<LocalRule, RuleError> {
        if !self.region().is_subset(region) {
            return Err(RuleError::RegionOverflow(format!(
                "{} is not inside {}",
                self.region(),
                region
            )));
        }
        let images = self
            .images
            .iter()
            .map(|m| embed_in(m, self.region(), region, self.cell_dim))
            .collect();
        LocalRule::new(
            self.cell_dim,
            NeighborhoodScheme::new(region.clone())?,
            images,
        )
    }

    /// Shrink the scheme to the sites on which some image acts nontrivially.
    pub fn trimmed(&self) -> LocalRule {
        let keep = trivial_free_sites(&self.images, self.region().len(), self.cell_dim);
        let dims = vec![self.cell_dim; self.region().len()];
        let sites = keep.iter().map(|&p| self.region().sites()[p].clone());
        let region = Region::new(self.s(), sites).expect("same lattice dimension");
        LocalRule {
            cell_dim: self.cell_dim,
            scheme: NeighborhoodScheme::new(region).expect("at least one site kept"),
            images: self
                .images
                .iter()
                .map(|m| tensor::restrict(m, &keep, &dims))
                .collect(),
        }
    }

    /// Largest image difference after embedding both rules in a common scheme.
    pub fn distance(&self, other: &LocalRule) -> f64 {
        let u = self.region().union(other.region());
        self.images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| {
                let a = embed_in(a, self.region(), &u, self.cell_dim);
                let b = embed_in(b, other.region(), &u, self.cell_dim);
                op_norm(&(a - b))
            })
            .fold(0.0, f64::max)
    }
}

/// Outcome of the commutation test for translated images.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub homomorphism_residual: f64,
    /// Largest generator commutator norm for each nonzero offset in N−N.
    pub offsets: Vec<(Site, f64)>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.homomorphism_residual <= EPS && self.offsets.iter().all(|(_, r)| *r <= EPS)
    }

    pub fn worst(&self) -> Option<(&Site, f64)> {
        self.offsets
            .iter()
            .map(|(x, r)| (x, *r))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn into_result(self) -> Result<ValidationReport, RuleError> {
        match self.worst() {
            Some((x, r)) if r > EPS => Err(RuleError::NotCommuting {
                offset: x.clone(),
                residual: r,
            }),
            _ => Ok(self),
        }
    }
}

/// Check the homomorphism relations, then commutation of T₀(A₀) with its
/// translates. The one-cell algebra is generated as a *-algebra by the
/// nilpotent shift J = Σ E_{i,i+1}, so testing J against τ_x(J) and
/// τ_x(J†) decides commutation of the full algebras.
pub fn validate_rule(rule: &LocalRule) -> Result<ValidationReport, RuleError> {
    let d = rule.cell_dim;
    let (what, residual) = algebra::homomorphism_residual(&rule.images, d)?;
    if residual > EPS {
        return Err(RuleError::NotHomomorphism { what, residual });
    }
    let n = rule.region();
    let mut shift = CMat::zeros(d, d);
    for i in 0..d.saturating_sub(1) {
        shift[(i, i + 1)] = linalg::c(1.0, 0.0);
    }
    let tj = rule.apply_local(&shift);
    let tjd = tj.adjoint();
    let mut offsets = Vec::new();
    for x in lattice::difference(n, n).sites() {
        if x.is_zero() {
            continue;
        }
        let moved = n.translate(x);
        let u = n.union(&moved);
        let pos_a: Vec<usize> = n.sites().iter().map(|y| u.position(y).unwrap()).collect();
        let pos_b: Vec<usize> = moved
            .sites()
            .iter()
            .map(|y| u.position(y).unwrap())
            .collect();
        let sa = Split::uniform(&pos_a, u.len(), d);
        let sb = Split::uniform(&pos_b, u.len(), d);
        let a = sa.embed(&tj);
        let mut worst: f64 = 0.0;
        for b in [&tj, &tjd] {
            let b = sb.embed(b);
            worst = worst.max(op_norm(&(&a * &b - &b * &a)));
        }
        offsets.push((x.clone(), worst));
    }
    Ok(ValidationReport {
        homomorphism_residual: residual,
        offsets,
    })
}

/// How sites are identified while evolving: the infinite lattice or a torus.
#[derive(Clone, Copy)]
enum Frame<'a> {
    Free,
    Torus(&'a TorusSpec),
}

impl Frame<'_> {
    fn map(&self, x: &Site) -> Site {
        match self {
            Frame::Free => x.clone(),
            Frame::Torus(t) => wrap(x, t),
        }
    }
}

/// Unitary W on the output region with T(A) = W (A ⊗ 1) W† for A on `lam`.
struct Implementation {
    out_region: Region,
    w: CMat,
    k: usize,
}

fn implement(
    rule: &LocalRule,
    lam: &Region,
    frame: Frame,
    cap: usize,
) -> Result<Implementation, RuleError> {
    let d = rule.cell_dim;
    let n = rule.region();
    let mut out_sites = Vec::new();
    for x in lam.sites() {
        for y in n.sites() {
            out_sites.push(frame.map(&x.add(y)));
        }
    }
    let out = Region::new(rule.s(), out_sites)?;
    let dim_out = dim_of(d, out.len());
    if dim_out > cap {
        return Err(RuleError::DimensionCap { dim: dim_out, cap });
    }
    let dim_in = dim_of(d, lam.len());
    if dim_out % dim_in != 0 {
        return Err(RuleError::RegionOverflow(format!(
            "output region {out} is smaller than the input"
        )));
    }
    let k = dim_out / dim_in;
    let splits: Vec<Split> = lam
        .sites()
        .iter()
        .map(|x| {
            let pos: Vec<usize> = n
                .sites()
                .iter()
                .map(|y| {
                    out.position(&frame.map(&x.add(y)))
                        .expect("mapped site in output")
                })
                .collect();
            let mut sorted = pos.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != pos.len() {
                return Err(RuleError::RegionOverflow(
                    "translated scheme wraps onto itself".into(),
                ));
            }
            Ok(Split::uniform(&pos, out.len(), d))
        })
        .collect::<Result<_, _>>()?;
    // Range of T(E_00 ⊗ … ⊗ E_00): project generic vectors.
    let mut r = linalg::rng(DEFAULT_SEED ^ 0x1a9);
    let mut probe = CMat::zeros(dim_out, k + 2);
    for c in 0..k + 2 {
        let mut v = random_vector(dim_out, &mut r);
        for s in &splits {
            s.apply(rule.image(0, 0), &mut v);
        }
        probe.set_column(c, &v);
    }
    let psi = column_space(&probe);
    if psi.ncols() != k {
        return Err(RuleError::NotHomomorphism {
            what: "rank of the global unit image",
            residual: psi.ncols() as f64,
        });
    }
    let mut w = CMat::zeros(dim_out, dim_out);
    for a in 0..dim_in {
        // digits of a, first site slowest
        let mut digits = vec![0usize; lam.len()];
        let mut rem = a;
        for p in (0..lam.len()).rev() {
            digits[p] = rem % d;
            rem /= d;
        }
        for j in 0..k {
            let mut v = psi.column(j).into_owned();
            for (p, s) in splits.iter().enumerate() {
                s.apply(rule.image(digits[p], 0), &mut v);
            }
            w.set_column(a * k + j, &v);
        }
    }
    let res = linalg::unitarity_residual(&w);
    if res > 1e-8 {
        return Err(RuleError::NotHomomorphism {
            what: "global extension",
            residual: res,
        });
    }
    Ok(Implementation {
        out_region: out,
        w,
        k,
    })
}

fn apply_with(
    rule: &LocalRule,
    obs: &LocalOperator,
    frame: Frame,
    cap: usize,
) -> Result<LocalOperator, RuleError> {
    if obs.cell_dim != rule.cell_dim {
        return Err(RuleError::OperatorDimension {
            expected: rule.cell_dim,
            found: obs.cell_dim,
        });
    }
    let mapped = Region::new(
        obs.region.dim(),
        obs.region.sites().iter().map(|x| frame.map(x)),
    )?;
    if mapped.len() != obs.region.len() {
        return Err(RuleError::RegionOverflow(format!(
            "{} overlaps itself on the torus",
            obs.region
        )));
    }
    // Reorder the observable's factors to the mapped lexicographic order.
    let perm: Vec<usize> = mapped
        .sites()
        .iter()
        .map(|y| {
            obs.region
                .sites()
                .iter()
                .position(|x| &frame.map(x) == y)
                .unwrap()
        })
        .collect();
    let m = tensor::permute(&obs.matrix, &perm, &vec![obs.cell_dim; perm.len()]);
    let imp = implement(rule, &mapped, frame, cap)?;
    let big = tensor::embed_identity_right(&m, imp.k);
    Ok(LocalOperator {
        region: imp.out_region,
        matrix: linalg::conjugate(&imp.w, &big),
        cell_dim: rule.cell_dim,
    })
}

/// Heisenberg image of a local observable on a regular torus.
pub fn global_apply(
    rule: &LocalRule,
    obs: &LocalOperator,
    torus: &TorusSpec,
) -> Result<LocalOperator, RuleError> {
    global_apply_with_cap(rule, obs, torus, DEFAULT_DIM_CAP)
}

pub fn global_apply_with_cap(
    rule: &LocalRule,
    obs: &LocalOperator,
    torus: &TorusSpec,
    cap: usize,
) -> Result<LocalOperator, RuleError> {
    if !is_regular(&rule.scheme, torus) {
        return Err(RuleError::NotRegular(torus.periods.clone()));
    }
    apply_with(rule, obs, Frame::Torus(torus), cap)
}

/// Heisenberg image on the infinite lattice; output region Λ + N.
pub fn apply_unwrapped(rule: &LocalRule, obs: &LocalOperator) -> Result<LocalOperator, RuleError> {
    apply_with(rule, obs, Frame::Free, usize::MAX)
}

/// Images of all matrix units of A(Λ) on the infinite lattice, indexed
/// a·D + b with D = d^|Λ|; the output region is Λ + N.
pub fn unit_images(rule: &LocalRule, lam: &Region) -> Result<(Region, Vec<CMat>), RuleError> {
    let imp = implement(rule, lam, Frame::Free, usize::MAX)?;
    let k = imp.k;
    let dim_in = imp.w.ncols() / k;
    let mut out = Vec::with_capacity(dim_in * dim_in);
    for a in 0..dim_in {
        let wa = imp.w.columns(a * k, k);
        for b in 0..dim_in {
            out.push(wa * imp.w.columns(b * k, k).adjoint());
        }
    }
    Ok((imp.out_region, out))
}

/// Global unitary G with global_apply(A) = G† A G, phase fixed.
pub fn global_unitary(rule: &LocalRule, torus: &TorusSpec) -> Result<CMat, RuleError> {
    global_unitary_with_cap(rule, torus, DEFAULT_DIM_CAP)
}

pub fn global_unitary_with_cap(
    rule: &LocalRule,
    torus: &TorusSpec,
    cap: usize,
) -> Result<CMat, RuleError> {
    if !is_regular(&rule.scheme, torus) {
        return Err(RuleError::NotRegular(torus.periods.clone()));
    }
    let dim = (rule.cell_dim as f64).powi(torus.num_sites() as i32);
    if dim > cap as f64 {
        return Err(RuleError::DimensionCap {
            dim: dim.min(usize::MAX as f64) as usize,
            cap,
        });
    }
    let all = Region::new(torus.dim(), torus.all_sites())?;
    let imp = implement(rule, &all, Frame::Torus(torus), cap)?;
    Ok(linalg::fix_phase(&imp.w.adjoint()))
}

/// T₁ ∘ T₂: apply `second` first, then `first`.
pub fn compose(first: &LocalRule, second: &LocalRule) -> Result<LocalRule, RuleError> {
    if first.cell_dim != second.cell_dim {
        return Err(RuleError::OperatorDimension {
            expected: first.cell_dim,
            found: second.cell_dim,
        });
    }
    let d = first.cell_dim;
    let region = lattice::sum(second.region(), first.region());
    let mut images = Vec::with_capacity(d * d);
    for m in &second.images {
        let op = LocalOperator {
            region: second.region().clone(),
            matrix: m.clone(),
            cell_dim: d,
        };
        let out = apply_unwrapped(first, &op)?.embed(&region)?;
        images.push(out.matrix);
    }
    Ok(LocalRule::new(d, NeighborhoodScheme::new(region)?, images)?.trimmed())
}

/// Translate a rule's scheme (composition with a lattice shift).
pub fn shifted(rule: &LocalRule, x: &Site) -> LocalRule {
    LocalRule {
        cell_dim: rule.cell_dim,
        scheme: NeighborhoodScheme::new(rule.region().translate(x)).expect("non-empty"),
        images: rule.images.clone(),
    }
}

/// Regroup cubes of side `k` into single cells of dimension d^(kˢ).
pub fn regroup(rule: &LocalRule, k: usize) -> Result<LocalRule, RuleError> {
    if k == 0 {
        return Err(RuleError::Spec("supercell side must be positive".into()));
    }
    let s = rule.s();
    let d = rule.cell_dim;
    let ki = k as i64;
    let internal: Vec<Site> = (0..k.pow(s as u32))
        .map(|mut idx| {
            let mut c = vec![0i64; s];
            for a in (0..s).rev() {
                c[a] = (idx % k) as i64;
                idx /= k;
            }
            Site(c)
        })
        .collect();
    let block = Region::new(s, internal.clone())?;
    let imp = implement(rule, &block, Frame::Free, usize::MAX)?;
    let cells: Vec<Site> = {
        let mut v: Vec<Site> = imp
            .out_region
            .sites()
            .iter()
            .map(|x| Site(x.0.iter().map(|&a| a.div_euclid(ki)).collect()))
            .collect();
        v.sort();
        v.dedup();
        v
    };
    // Fine sites ordered supercell by supercell.
    let fine: Vec<Site> = cells
        .iter()
        .flat_map(|c| {
            internal
                .iter()
                .map(move |o| Site(c.0.iter().zip(&o.0).map(|(a, b)| a * ki + b).collect()))
        })
        .collect();
    let fine_region = Region::new(s, fine.clone())?;
    let pos_in_fine: Vec<usize> = fine_region
        .sites()
        .iter()
        .map(|x| fine.iter().position(|y| y == x).unwrap())
        .collect();
    let big_d = dim_of(d, internal.len());
    let mut images = Vec::with_capacity(big_d * big_d);
    for i in 0..big_d {
        for j in 0..big_d {
            let e = tensor::embed_identity_right(&unit(big_d, i, j), imp.k);
            let t = linalg::conjugate(&imp.w, &e);
            let on_fine = embed_in(&t, &imp.out_region, &fine_region, d);
            // fine_region is lexicographic; reorder to supercell-major order
            let mut perm = vec![0usize; fine.len()];
            for (lex, &ord) in pos_in_fine.iter().enumerate() {
                perm[ord] = lex;
            }
            images.push(tensor::permute(&on_fine, &perm, &vec![d; fine.len()]));
        }
    }
    LocalRule::new(
        big_d,
        NeighborhoodScheme::new(Region::new(s, cells)?)?,
        images,
    )
}

/// Torus images of every matrix unit placed at the origin.
pub fn torus_images(rule: &LocalRule, torus: &TorusSpec) -> Result<Vec<LocalOperator>, RuleError> {
    let d = rule.cell_dim;
    let origin = Site::origin(rule.s());
    (0..d * d)
        .map(|k| {
            global_apply(
                rule,
                &LocalOperator::at(origin.clone(), unit(d, k / d, k % d)),
                torus,
            )
        })
        .collect()
}
