//! Quantization of reversible classical cellular automata.

use std::collections::HashMap;

use rand::Rng;

use crate::lattice::{self, smallest_regular_torus, NeighborhoodScheme, Region, Site, TorusSpec};
use crate::linalg::{self, CMat, DEFAULT_SEED, EPS};
use crate::rules::{validate_rule, LocalRule, RuleError};

/// Classical automaton with lookup tables indexed by neighborhood
/// configurations (first site of the sorted region is the most significant digit).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalCA {
    pub d: usize,
    pub n_c: Region,
    pub local_fn: Vec<usize>,
    pub n_i: Option<Region>,
    pub inverse_fn: Option<Vec<usize>>,
}

fn table_index(vals: impl Iterator<Item = usize>, d: usize) -> usize {
    vals.fold(0, |acc, v| acc * d + v)
}

fn check_table(table: &[usize], region: &Region, d: usize, what: &str) -> Result<(), RuleError> {
    let want = d.pow(region.len() as u32);
    if table.len() != want {
        return Err(RuleError::Spec(format!(
            "{what} table has {} entries, expected {want}",
            table.len()
        )));
    }
    if table.iter().any(|&v| v >= d) {
        return Err(RuleError::Spec(format!(
            "{what} table has a value outside 0..{d}"
        )));
    }
    Ok(())
}

/// One application of the classical rule on a torus configuration.
pub fn global_step(
    table: &[usize],
    n: &Region,
    d: usize,
    torus: &TorusSpec,
    config: &[usize],
) -> Vec<usize> {
    (0..torus.num_sites())
        .map(|i| {
            let x = torus.site_at(i);
            table[table_index(n.sites().iter().map(|y| config[torus.index(&x.add(y))]), d)]
        })
        .collect()
}

fn config_from_index(mut idx: usize, len: usize, d: usize) -> Vec<usize> {
    let mut c = vec![0; len];
    for p in (0..len).rev() {
        c[p] = idx % d;
        idx /= d;
    }
    c
}

/// Whether the global map is a bijection of all configurations of the torus.
pub fn is_globally_invertible(table: &[usize], n: &Region, d: usize, torus: &TorusSpec) -> bool {
    let len = torus.num_sites();
    let total = d.pow(len as u32);
    let mut seen = vec![false; total];
    for idx in 0..total {
        let out = global_step(table, n, d, torus, &config_from_index(idx, len, d));
        let j = table_index(out.into_iter(), d);
        if seen[j] {
            return false;
        }
        seen[j] = true;
    }
    true
}

/// Search for an inverse rule on the window `n_i` by tabulating the global
/// inverse on a ring; `None` when no consistent local table exists.
pub fn find_inverse(table: &[usize], n_c: &Region, d: usize, n_i: &Region) -> Option<Vec<usize>> {
    if n_c.dim() != 1 || n_i.dim() != 1 {
        return None;
    }
    let width = |r: &Region| (r.sites().last().unwrap().0[0] - r.sites()[0].0[0]) as usize + 1;
    let l = width(n_c) + width(n_i) + 3;
    let torus = TorusSpec::ring(l);
    let mut inv: HashMap<usize, usize> = HashMap::new();
    for idx in 0..d.pow(l as u32) {
        let c = config_from_index(idx, l, d);
        let f = global_step(table, n_c, d, &torus, &c);
        for x in 0..l {
            let site = Site::from(x as i64);
            let key = table_index(n_i.sites().iter().map(|y| f[torus.index(&site.add(y))]), d);
            match inv.insert(key, c[x]) {
                Some(prev) if prev != c[x] => return None,
                _ => {}
            }
        }
    }
    let size = d.pow(n_i.len() as u32);
    if inv.len() != size {
        return None;
    }
    let out: Vec<usize> = (0..size).map(|k| inv[&k]).collect();
    let check = TorusSpec::ring(l + 1);
    for idx in 0..d.pow((l + 1) as u32).min(1 << 16) {
        let c = config_from_index(idx, l + 1, d);
        let f = global_step(table, n_c, d, &check, &c);
        if global_step(&out, n_i, d, &check, &f) != c {
            return None;
        }
    }
    Some(out)
}

impl ClassicalCA {
    fn inverse(&self) -> Result<(&Region, &[usize]), RuleError> {
        match (&self.n_i, &self.inverse_fn) {
            (Some(r), Some(t)) => Ok((r, t.as_slice())),
            _ => Err(RuleError::MissingInverse(
                "no inverse automaton supplied".into(),
            )),
        }
    }

    fn check(&self) -> Result<(), RuleError> {
        check_table(&self.local_fn, &self.n_c, self.d, "local")?;
        let (n_i, inv) = self.inverse()?;
        if n_i.dim() != self.n_c.dim() {
            return Err(RuleError::Spec(
                "forward and inverse schemes differ in dimension".into(),
            ));
        }
        check_table(inv, n_i, self.d, "inverse")
    }

    /// N_C − N_C − N_I.
    pub fn localization_bound(&self) -> Result<Region, RuleError> {
        let (n_i, _) = self.inverse()?;
        Ok(lattice::difference(
            &lattice::difference(&self.n_c, &self.n_c),
            n_i,
        ))
    }

    /// Check inverse ∘ forward = identity on a regular torus, exhaustively
    /// when small and on seeded random configurations otherwise.
    pub fn round_trip(&self) -> Result<(), RuleError> {
        let (n_i, inv) = self.inverse()?;
        let k = self.localization_bound()?;
        let torus = smallest_regular_torus(&NeighborhoodScheme::new(k)?);
        let len = torus.num_sites();
        let total = (self.d as f64).powi(len as i32);
        let mut r = linalg::rng(DEFAULT_SEED ^ 0xca);
        let samples: Box<dyn Iterator<Item = Vec<usize>>> = if total <= 65536.0 {
            Box::new((0..total as usize).map(|i| config_from_index(i, len, self.d)))
        } else {
            Box::new((0..512).map(|_| (0..len).map(|_| r.gen_range(0..self.d)).collect::<Vec<_>>()))
        };
        for c in samples {
            let f = global_step(&self.local_fn, &self.n_c, self.d, &torus, &c);
            if global_step(inv, n_i, self.d, &torus, &f) != c {
                return Err(RuleError::MissingInverse(format!(
                    "inverse table fails the round trip on torus {:?}",
                    torus.periods
                )));
            }
        }
        Ok(())
    }

    fn forward_at(&self, a: &[usize], k: &Region, x: &Site) -> usize {
        let vals = self
            .n_c
            .sites()
            .iter()
            .map(|y| a[k.position(&x.add(y)).expect("site inside bound")]);
        self.local_fn[table_index(vals, self.d)]
    }
}

/// Quantized rule: ⟨a|T₀(|c⟩⟨e|)|b⟩ = 1 iff F(a)_0 = c, F(b)_0 = e and
/// F(a), F(b) agree away from the origin; trimmed to its minimal support.
pub fn quantize_classical(ca: &ClassicalCA) -> Result<LocalRule, RuleError> {
    ca.check()?;
    ca.round_trip()?;
    let d = ca.d;
    let s = ca.n_c.dim();
    let (n_i, _) = ca.inverse()?;
    let k = ca.localization_bound()?;
    let origin = Site::origin(s);
    if !ca.n_c.is_subset(&k) {
        return Err(RuleError::NonLocal(
            "forward scheme is not inside the localization bound".into(),
        ));
    }
    let free: Vec<usize> = n_i
        .neg()
        .sites()
        .iter()
        .filter_map(|y| k.position(y))
        .collect();
    let checks: Vec<Site> = lattice::difference(&n_i.neg(), &ca.n_c)
        .sites()
        .iter()
        .filter(|x| !x.is_zero())
        .cloned()
        .collect();
    let dim = d.pow(k.len() as u32);
    let mut images = vec![CMat::zeros(dim, dim); d * d];
    let one = linalg::c(1.0, 0.0);
    for ia in 0..dim {
        let a = config_from_index(ia, k.len(), d);
        let fa: Vec<usize> = checks.iter().map(|x| ca.forward_at(&a, &k, x)).collect();
        let c0 = ca.forward_at(&a, &k, &origin);
        for fb in 0..d.pow(free.len() as u32) {
            let mut b = a.clone();
            for (p, v) in free.iter().zip(config_from_index(fb, free.len(), d)) {
                b[*p] = v;
            }
            if checks
                .iter()
                .zip(&fa)
                .all(|(x, v)| ca.forward_at(&b, &k, x) == *v)
            {
                let e0 = ca.forward_at(&b, &k, &origin);
                let ib = table_index(b.iter().copied(), d);
                images[c0 * d + e0][(ia, ib)] = one;
            }
        }
    }
    let (what, residual) = crate::algebra::homomorphism_residual(&images, d)?;
    if residual > EPS {
        return Err(RuleError::NonLocal(format!(
            "images on {k} fail the {what} relation (residual {residual:.3e}); the inverse table is inconsistent"
        )));
    }
    let rule = LocalRule::new(d, NeighborhoodScheme::new(k)?, images)?.trimmed();
    validate_rule(&rule)?.into_result()?;
    Ok(rule)
}
