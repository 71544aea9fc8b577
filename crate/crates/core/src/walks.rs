//! Coined quantum walks as the one-particle sector of a four-state automaton
//! built from two counter-moving qubit chains.
//!
//! A cell is C² (right-moving chain) ⊗ C² (left-moving chain), each factor
//! holding an occupation number, so the basis is |r l⟩ with index 2r + l.
//! A right mover at x sits at x + 1 after one step; in the Heisenberg
//! picture its chain therefore follows [`left_shift`](crate::rules::left_shift).

use serde::Serialize;
use thiserror::Error;

use crate::lattice::{NeighborhoodScheme, TorusSpec};
use crate::lattice::{Region, Site};
use crate::linalg::{c, identity, kron_all, unit, unitarity_residual, CMat, CVec, C64, EPS};
use crate::rules::{
    cellwise, compose, global_apply, global_unitary, validate_rule, LocalOperator, LocalRule, RuleError,
};

pub const EMPTY: usize = 0;
pub const LEFT: usize = 1;
pub const RIGHT: usize = 2;
pub const BOTH: usize = 3;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("coin is not unitary (residual {0:.3e})")]
    NonUnitaryCoin(f64),
    #[error("initial amplitudes have norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("rule leaks out of the one-particle sector (residual {0:.3e})")]
    SectorLeak(f64),
    #[error("walk of {steps} steps wraps around a ring of {length} sites")]
    Wraps { steps: usize, length: usize },
    #[error("ring of {0} sites is too short for a nearest-neighbor walk")]
    RingTooShort(usize),
    #[error("the walk needs a four-state rule on {{-1, 0, 1}}")]
    NotAWalkRule,
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Chirality {
    Right,
    Left,
}

/// Rule moving one chain by one site and leaving the other in place.
/// Right movers follow observables one site to the left, left movers one
/// site to the right; either way the image of E^R ⊗ E^L is E^R on the lower
/// site and E^L on the upper one.
pub fn chain_shift(which: Chirality) -> LocalRule {
    let one = identity(2);
    let region = match which {
        Chirality::Right => [-1, 0],
        Chirality::Left => [0, 1],
    };
    let mut images = Vec::with_capacity(16);
    for i in 0..4 {
        for j in 0..4 {
            let er = unit(2, i / 2, j / 2);
            let el = unit(2, i % 2, j % 2);
            images.push(kron_all([&er, &one, &one, &el]));
        }
    }
    LocalRule::new(4, NeighborhoodScheme::line(region), images).expect("well-formed shift")
}

/// Four-state cell unitary: identity on |empty⟩ and |RL⟩, `coin` on the
/// chirality pair (|R⟩, |L⟩).
pub fn cell_unitary(coin: &CMat) -> CMat {
    let mut u = identity(4);
    let idx = [RIGHT, LEFT];
    for a in 0..2 {
        for b in 0..2 {
            u[(idx[a], idx[b])] = coin[(a, b)];
        }
    }
    u
}

/// Free motion of both chains followed by the coin on every cell.
pub fn lift_coined_walk(coin: &CMat) -> Result<LocalRule, WalkError> {
    if coin.nrows() != 2 || coin.ncols() != 2 {
        return Err(WalkError::NonUnitaryCoin(f64::INFINITY));
    }
    let res = unitarity_residual(coin);
    if res > EPS {
        return Err(WalkError::NonUnitaryCoin(res));
    }
    let free = compose(&chain_shift(Chirality::Right), &chain_shift(Chirality::Left))?;
    // Heisenberg order: the later coin acts on the observable first
    let rule = compose(&free, &cellwise(&cell_unitary(coin)))?;
    validate_rule(&rule)?.into_result()?;
    Ok(rule)
}

/// Number operator n_R + n_L of one cell.
pub fn number_operator() -> CMat {
    CMat::from_diagonal(&CVec::from_vec(vec![
        c(0.0, 0.0),
        c(1.0, 0.0),
        c(1.0, 0.0),
        c(2.0, 0.0),
    ]))
}

/// exp(iθ n) on one cell.
pub fn gauge_cell(theta: f64) -> CMat {
    CMat::from_diagonal(&CVec::from_vec(
        [0.0, 1.0, 1.0, 2.0]
            .iter()
            .map(|n| C64::from_polar(1.0, theta * n))
            .collect(),
    ))
}

/// max over cell matrix units and the given angles of
/// ‖T(g A g†) − g T(A) g†‖ on the ring, with g the product of cell gauges.
pub fn gauge_commutation_residual(
    rule: &LocalRule,
    ring: &TorusSpec,
    thetas: &[f64],
) -> Result<f64, WalkError> {
    let mut worst: f64 = 0.0;
    for &theta in thetas {
        let g = gauge_cell(theta);
        let gauged = compose(rule, &cellwise(&g.adjoint()))?;
        let after = compose(&cellwise(&g.adjoint()), rule)?;
        for i in 0..4 {
            for j in 0..4 {
                let e = LocalOperator::at(Site::from(0), unit(4, i, j));
                let a = global_apply(&gauged, &e, ring)?;
                let b = global_apply(&after, &e, ring)?;
                worst = worst.max(a.distance(&b));
            }
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct CoinedWalkSpec {
    pub coin: CMat,
    pub steps: usize,
    pub start: i64,
    /// (ψ_R, ψ_L) at the start site.
    pub amplitudes: [C64; 2],
    pub length: usize,
    pub allow_wrap: bool,
}

impl CoinedWalkSpec {
    pub fn new(coin: CMat, steps: usize, start: i64, amplitudes: [C64; 2], length: usize) -> Self {
        CoinedWalkSpec {
            coin,
            steps,
            start,
            amplitudes,
            length,
            allow_wrap: false,
        }
    }

    fn check(&self) -> Result<(), WalkError> {
        let res = unitarity_residual(&self.coin);
        if res > EPS {
            return Err(WalkError::NonUnitaryCoin(res));
        }
        let norm = (self.amplitudes[0].norm_sqr() + self.amplitudes[1].norm_sqr()).sqrt();
        if (norm - 1.0).abs() > EPS {
            return Err(WalkError::NotNormalized(norm));
        }
        if self.length < 3 {
            return Err(WalkError::RingTooShort(self.length));
        }
        if !self.allow_wrap && 2 * self.steps + 1 > self.length {
            return Err(WalkError::Wraps {
                steps: self.steps,
                length: self.length,
            });
        }
        Ok(())
    }

    /// Sites as ring positions; the start is placed at `start` mod L.
    fn initial_vector(&self) -> CVec {
        let l = self.length;
        let x = self.start.rem_euclid(l as i64) as usize;
        let mut psi = CVec::zeros(2 * l);
        psi[2 * x] = self.amplitudes[0];
        psi[2 * x + 1] = self.amplitudes[1];
        psi
    }
}

/// One-particle unitary on the ring, indexed 2x + (0 for R, 1 for L):
/// ⟨y, c′| G |x, c⟩ = ⟨vac| T(|empty⟩⟨c′| at y) |c at x⟩.
pub fn sector_unitary(rule: &LocalRule, length: usize) -> Result<CMat, WalkError> {
    let window = Region::interval(-1, 1);
    if rule.cell_dim != 4 || !rule.region().is_subset(&window) {
        return Err(WalkError::NotAWalkRule);
    }
    if length < 3 {
        return Err(WalkError::RingTooShort(length));
    }
    let rule = rule.widen(&window)?;
    let states = [RIGHT, LEFT];
    let vac = kron_all([&basis(EMPTY), &basis(EMPTY), &basis(EMPTY)]);
    let mut w = CMat::zeros(2 * length, 2 * length);
    for (cp, &out_state) in states.iter().enumerate() {
        let image = rule.apply_local(&unit(4, EMPTY, out_state));
        let row_bra = vac.adjoint() * &image;
        for (k, n) in (-1i64..=1).enumerate() {
            for (cc, &in_state) in states.iter().enumerate() {
                let mut factors = vec![basis(EMPTY); 3];
                factors[k] = basis(in_state);
                let ket = kron_all(factors.iter());
                let amp = (&row_bra * ket)[(0, 0)];
                for y in 0..length as i64 {
                    let x = (y + n).rem_euclid(length as i64) as usize;
                    w[(2 * y as usize + cp, 2 * x + cc)] += amp;
                }
            }
        }
    }
    let leak = unitarity_residual(&w);
    if leak > EPS {
        return Err(WalkError::SectorLeak(leak));
    }
    Ok(w)
}

fn basis(k: usize) -> CMat {
    let mut v = CMat::zeros(4, 1);
    v[(k, 0)] = c(1.0, 0.0);
    v
}

/// Per-site occupation probabilities (ring positions 0..L) for t = 0..=steps.
pub fn walk_sector_evolve(
    rule: &LocalRule,
    spec: &CoinedWalkSpec,
) -> Result<Vec<Vec<f64>>, WalkError> {
    spec.check()?;
    let w = sector_unitary(rule, spec.length)?;
    let mut psi = spec.initial_vector();
    let mut out = vec![site_probabilities(&psi)];
    for _ in 0..spec.steps {
        psi = &w * psi;
        out.push(site_probabilities(&psi));
    }
    Ok(out)
}

fn site_probabilities(psi: &CVec) -> Vec<f64> {
    (0..psi.len() / 2)
        .map(|x| psi[2 * x].norm_sqr() + psi[2 * x + 1].norm_sqr())
        .collect()
}

/// Direct coined-walk recursion on the ring: move right movers right and
/// left movers left, then apply the coin at every site.
pub fn coined_walk_reference(spec: &CoinedWalkSpec) -> Result<Vec<Vec<f64>>, WalkError> {
    spec.check()?;
    let l = spec.length;
    let mut psi = spec.initial_vector();
    let mut out = vec![site_probabilities(&psi)];
    for _ in 0..spec.steps {
        let mut moved = CVec::zeros(2 * l);
        for x in 0..l {
            moved[2 * ((x + 1) % l)] = psi[2 * x];
            moved[2 * ((x + l - 1) % l) + 1] = psi[2 * x + 1];
        }
        for x in 0..l {
            let (r, lft) = (moved[2 * x], moved[2 * x + 1]);
            moved[2 * x] = spec.coin[(0, 0)] * r + spec.coin[(0, 1)] * lft;
            moved[2 * x + 1] = spec.coin[(1, 0)] * r + spec.coin[(1, 1)] * lft;
        }
        psi = moved;
        out.push(site_probabilities(&psi));
    }
    Ok(out)
}

/// Norm of the part of the global unitary connecting different particle
/// numbers, on a small ring.
pub fn sector_off_block_norm(rule: &LocalRule, ring: &TorusSpec) -> Result<f64, WalkError> {
    let g = global_unitary(rule, ring)?;
    let l = ring.num_sites();
    let count = |mut k: usize| -> u32 {
        let mut n = 0;
        for _ in 0..l {
            n += [0, 1, 1, 2][k % 4];
            k /= 4;
        }
        n
    };
    let numbers: Vec<u32> = (0..g.nrows()).map(count).collect();
    let mut off = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            if numbers[i] != numbers[j] {
                off += g[(i, j)].norm_sqr();
            }
        }
    }
    Ok(off.sqrt())
}
