//! Sites, finite regions, neighborhood schemes and rectangular tori.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("empty neighborhood scheme")]
    EmptyScheme,
    #[error("torus periods must be positive")]
    BadPeriod,
}

/// A point of ℤˢ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Site(pub Vec<i64>);

impl Site {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn origin(s: usize) -> Self {
        Site(vec![0; s])
    }

    pub fn add(&self, other: &Site) -> Site {
        Site(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Site) -> Site {
        Site(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Site {
        Site(self.0.iter().map(|a| -a).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }
}

impl From<i64> for Site {
    fn from(x: i64) -> Self {
        Site(vec![x])
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            write!(f, "{}", self.0[0])
        } else {
            let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", parts.join(","))
        }
    }
}

/// Finite set of sites kept sorted and duplicate free.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    s: usize,
    sites: Vec<Site>,
}

impl Region {
    pub fn new(s: usize, sites: impl IntoIterator<Item = Site>) -> Result<Self, LatticeError> {
        let mut v: Vec<Site> = sites.into_iter().collect();
        if let Some(bad) = v.iter().find(|x| x.dim() != s) {
            return Err(LatticeError::DimensionMismatch(s, bad.dim()));
        }
        v.sort();
        v.dedup();
        Ok(Region { s, sites: v })
    }

    /// One-dimensional region from integer offsets.
    pub fn line(xs: impl IntoIterator<Item = i64>) -> Self {
        Region::new(1, xs.into_iter().map(Site::from)).expect("one-dimensional sites")
    }

    pub fn interval(lo: i64, hi: i64) -> Self {
        Region::line(lo..=hi)
    }

    pub fn single(x: Site) -> Self {
        let s = x.dim();
        Region { s, sites: vec![x] }
    }

    pub fn dim(&self) -> usize {
        self.s
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, x: &Site) -> bool {
        self.sites.binary_search(x).is_ok()
    }

    pub fn position(&self, x: &Site) -> Option<usize> {
        self.sites.binary_search(x).ok()
    }

    pub fn translate(&self, x: &Site) -> Region {
        Region {
            s: self.s,
            sites: self.sites.iter().map(|y| y.add(x)).collect(),
        }
    }

    pub fn union(&self, other: &Region) -> Region {
        Region::new(self.s, self.sites.iter().chain(&other.sites).cloned())
            .expect("same lattice dimension")
    }

    pub fn intersects(&self, other: &Region) -> bool {
        self.sites.iter().any(|x| other.contains(x))
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.sites.iter().all(|x| other.contains(x))
    }

    pub fn neg(&self) -> Region {
        Region::new(self.s, self.sites.iter().map(Site::neg)).expect("same lattice dimension")
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sites.iter().map(|x| x.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionOp {
    Sum,
    Difference,
}

/// Minkowski sum a + b or difference a − b.
pub fn region_arith(a: &Region, b: &Region, op: RegionOp) -> Result<Region, LatticeError> {
    if a.s != b.s {
        return Err(LatticeError::DimensionMismatch(a.s, b.s));
    }
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in &a.sites {
        for y in &b.sites {
            out.push(match op {
                RegionOp::Sum => x.add(y),
                RegionOp::Difference => x.sub(y),
            });
        }
    }
    Region::new(a.s, out)
}

pub fn sum(a: &Region, b: &Region) -> Region {
    region_arith(a, b, RegionOp::Sum).expect("regions of equal dimension")
}

pub fn difference(a: &Region, b: &Region) -> Region {
    region_arith(a, b, RegionOp::Difference).expect("regions of equal dimension")
}

/// Offsets bounding how far one step spreads an observable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NeighborhoodScheme(Region);

impl NeighborhoodScheme {
    pub fn new(region: Region) -> Result<Self, LatticeError> {
        if region.is_empty() {
            return Err(LatticeError::EmptyScheme);
        }
        Ok(NeighborhoodScheme(region))
    }

    pub fn line(xs: impl IntoIterator<Item = i64>) -> Self {
        NeighborhoodScheme::new(Region::line(xs)).expect("non-empty scheme")
    }

    pub fn region(&self) -> &Region {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// Torus ℤˢ/Γ with Γ = ⊕ L_i ℤ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusSpec {
    pub periods: Vec<usize>,
}

impl TorusSpec {
    pub fn new(periods: Vec<usize>) -> Result<Self, LatticeError> {
        if periods.is_empty() || periods.iter().any(|&l| l == 0) {
            return Err(LatticeError::BadPeriod);
        }
        Ok(TorusSpec { periods })
    }

    pub fn ring(l: usize) -> Self {
        TorusSpec::new(vec![l]).expect("positive period")
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn num_sites(&self) -> usize {
        self.periods.iter().product()
    }

    fn contains_lattice_vector(&self, x: &Site) -> bool {
        x.0.iter()
            .zip(&self.periods)
            .all(|(&a, &l)| a.rem_euclid(l as i64) == 0)
    }

    /// Linear index of a wrapped site, first coordinate slowest.
    pub fn index(&self, x: &Site) -> usize {
        let w = wrap(x, self);
        let mut idx = 0usize;
        for (a, &l) in w.0.iter().zip(&self.periods) {
            idx = idx * l + *a as usize;
        }
        idx
    }

    pub fn site_at(&self, mut idx: usize) -> Site {
        let mut coords = vec![0i64; self.periods.len()];
        for k in (0..self.periods.len()).rev() {
            coords[k] = (idx % self.periods[k]) as i64;
            idx /= self.periods[k];
        }
        Site(coords)
    }

    pub fn all_sites(&self) -> Vec<Site> {
        (0..self.num_sites()).map(|i| self.site_at(i)).collect()
    }
}

/// Canonical representative with 0 ≤ x_i < L_i.
pub fn wrap(x: &Site, torus: &TorusSpec) -> Site {
    Site(
        x.0.iter()
            .zip(&torus.periods)
            .map(|(&a, &l)| a.rem_euclid(l as i64))
            .collect(),
    )
}

pub fn wrap_region(r: &Region, torus: &TorusSpec) -> Region {
    Region::new(r.s, r.sites.iter().map(|x| wrap(x, torus))).expect("same lattice dimension")
}

/// True iff (N+N−N−N) ∩ Γ = {0}.
pub fn is_regular(n: &NeighborhoodScheme, torus: &TorusSpec) -> bool {
    if n.dim() != torus.dim() {
        return false;
    }
    let r = n.region();
    let nn = sum(r, r);
    let all = difference(&nn, &nn);
    all.sites
        .iter()
        .all(|x| x.is_zero() || !torus.contains_lattice_vector(x))
}

/// Smallest cubic torus (equal periods) on which the scheme is regular.
pub fn smallest_regular_torus(n: &NeighborhoodScheme) -> TorusSpec {
    let s = n.dim();
    let mut l = 1;
    loop {
        let t = TorusSpec::new(vec![l; s]).expect("positive period");
        if is_regular(n, &t) {
            return t;
        }
        l += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minkowski_examples() {
        let n = Region::interval(-1, 1);
        assert_eq!(sum(&n, &n), Region::interval(-2, 2));
        let lam = Region::line([3, -2, 7]);
        assert_eq!(difference(&lam, &Region::line([0])), lam);
        assert_eq!(
            difference(&sum(&n, &n), &sum(&n, &n)),
            Region::interval(-4, 4)
        );
        let a2 = Region::new(2, [Site(vec![0, 0])]).unwrap();
        assert_eq!(
            region_arith(&n, &a2, RegionOp::Sum),
            Err(LatticeError::DimensionMismatch(1, 2))
        );
    }

    #[test]
    fn regularity_examples() {
        let n = NeighborhoodScheme::line(-1..=1);
        assert!(is_regular(&n, &TorusSpec::ring(5)));
        assert!(!is_regular(&n, &TorusSpec::ring(4)));
        let zero = NeighborhoodScheme::line([0]);
        for l in 1..6 {
            assert!(is_regular(&zero, &TorusSpec::ring(l)));
        }
        let sites = (-1..=1).flat_map(|a| (-1..=1).map(move |b| Site(vec![a, b])));
        let n2 = NeighborhoodScheme::new(Region::new(2, sites).unwrap()).unwrap();
        assert!(!is_regular(&n2, &TorusSpec::new(vec![5, 4]).unwrap()));
        assert!(is_regular(&n2, &TorusSpec::new(vec![5, 5]).unwrap()));
        assert_eq!(smallest_regular_torus(&n), TorusSpec::ring(5));
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap(&Site::from(7), &TorusSpec::ring(5)), Site::from(2));
        let t = TorusSpec::new(vec![4, 4]).unwrap();
        assert_eq!(wrap(&Site(vec![-1, -1]), &t), Site(vec![3, 3]));
        for i in 0..t.num_sites() {
            assert_eq!(t.index(&t.site_at(i)), i);
        }
    }
}
