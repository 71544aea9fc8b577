//! Clifford automata on qubit chains, handled symbolically: Pauli strings in
//! the binary symplectic encoding, rules given by the images of σ_x and σ_y,
//! and the Laurent-polynomial matrix over F₂ that describes them.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::NeighborhoodScheme;
use crate::linalg::{c, identity, kron_all, pauli, CMat, C64};
use crate::rules::{LocalRule, RuleError};

#[derive(Debug, Error)]
pub enum CliffordError {
    #[error("unknown Pauli letter {0:?}")]
    BadLetter(char),
    #[error("ξ and η must both have length 2N+1; got {0} and {1}")]
    BadLength(usize, usize),
    #[error("rule fails the commutation conditions")]
    Invalid,
    #[error("determinant {0} is not the expected monomial")]
    Determinant(LaurentF2),
    #[error("ξ and η are not palindromes about a common center")]
    NotPalindromic,
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

    pub fn from_char(ch: char) -> Result<Letter, CliffordError> {
        match ch {
            '0' | '1' | 'i' | 'I' => Ok(Letter::I),
            'x' | 'X' => Ok(Letter::X),
            'y' | 'Y' => Ok(Letter::Y),
            'z' | 'Z' => Ok(Letter::Z),
            other => Err(CliffordError::BadLetter(other)),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::I => '0',
            Letter::X => 'x',
            Letter::Y => 'y',
            Letter::Z => 'z',
        }
    }

    /// (x-bit, z-bit).
    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    /// σ_a σ_b = i^k σ_c, returned as (k, c).
    pub fn mul(self, other: Letter) -> (u8, Letter) {
        use Letter::*;
        match (self, other) {
            (I, b) => (0, b),
            (a, I) => (0, a),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    pub fn anticommutes(self, other: Letter) -> bool {
        let (x1, z1) = self.bits();
        let (x2, z2) = other.bits();
        (x1 & z2) ^ (z1 & x2)
    }

    /// x ↔ z with y fixed.
    pub fn swap_xz(self) -> Letter {
        match self {
            Letter::X => Letter::Z,
            Letter::Z => Letter::X,
            l => l,
        }
    }

    pub fn matrix(self) -> CMat {
        match self {
            Letter::I => identity(2),
            Letter::X => pauli('x'),
            Letter::Y => pauli('y'),
            Letter::Z => pauli('z'),
        }
    }
}

pub fn parse_letters(s: &str) -> Result<Vec<Letter>, CliffordError> {
    s.chars().map(Letter::from_char).collect()
}

pub fn letters_to_string(ls: &[Letter]) -> String {
    ls.iter().map(|l| l.to_char()).collect()
}

/// i^phase · ⊗_k σ_{letters[k]} at sites offset + k.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub offset: i64,
    pub letters: Vec<Letter>,
    pub phase: u8,
}

impl PauliString {
    pub fn identity() -> Self {
        PauliString {
            offset: 0,
            letters: Vec::new(),
            phase: 0,
        }
    }

    pub fn single(site: i64, letter: Letter) -> Self {
        PauliString {
            offset: site,
            letters: vec![letter],
            phase: 0,
        }
        .trimmed()
    }

    pub fn new(offset: i64, letters: Vec<Letter>, phase: u8) -> Self {
        PauliString {
            offset,
            letters,
            phase: phase % 4,
        }
        .trimmed()
    }

    pub fn trimmed(mut self) -> Self {
        let first = self.letters.iter().position(|&l| l != Letter::I);
        match first {
            None => {
                self.letters.clear();
                self.offset = 0;
            }
            Some(f) => {
                let last = self.letters.iter().rposition(|&l| l != Letter::I).unwrap();
                self.letters = self.letters[f..=last].to_vec();
                self.offset += f as i64;
            }
        }
        self
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Inclusive support bounds, None for the identity.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.letters.is_empty() {
            None
        } else {
            Some((self.offset, self.offset + self.letters.len() as i64 - 1))
        }
    }

    pub fn letter_at(&self, site: i64) -> Letter {
        let k = site - self.offset;
        if k < 0 || k >= self.letters.len() as i64 {
            Letter::I
        } else {
            self.letters[k as usize]
        }
    }

    pub fn translate(&self, x: i64) -> Self {
        PauliString {
            offset: self.offset + x,
            ..self.clone()
        }
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        if self.is_identity() {
            return PauliString {
                phase: (self.phase + other.phase) % 4,
                ..other.clone()
            };
        }
        if other.is_identity() {
            return PauliString {
                phase: (self.phase + other.phase) % 4,
                ..self.clone()
            };
        }
        let (a0, a1) = self.support().unwrap();
        let (b0, b1) = other.support().unwrap();
        let (lo, hi) = (a0.min(b0), a1.max(b1));
        let mut phase = self.phase + other.phase;
        let mut letters = Vec::with_capacity((hi - lo + 1) as usize);
        for x in lo..=hi {
            let (k, l) = self.letter_at(x).mul(other.letter_at(x));
            phase += k;
            letters.push(l);
        }
        PauliString::new(lo, letters, phase % 4)
    }

    /// True when the two strings anticommute.
    pub fn anticommutes(&self, other: &PauliString) -> bool {
        let (Some((a0, a1)), Some((b0, b1))) = (self.support(), other.support()) else {
            return false;
        };
        let mut acc = false;
        for x in a0.max(b0)..=a1.min(b1) {
            acc ^= self.letter_at(x).anticommutes(other.letter_at(x));
        }
        acc
    }

    /// Dense matrix on the sites lo..=hi, which must cover the support.
    pub fn dense(&self, lo: i64, hi: i64) -> CMat {
        let factors: Vec<CMat> = (lo..=hi).map(|x| self.letter_at(x).matrix()).collect();
        let m = kron_all(factors.iter());
        m * phase_value(self.phase)
    }
}

impl std::str::FromStr for PauliString {
    type Err = CliffordError;

    /// `[+|-|+i|-i] letters[@offset]`, e.g. `-i zyz@-1`; `1` is the identity.
    fn from_str(s: &str) -> Result<Self, CliffordError> {
        let t = s.trim();
        let (phase, rest) = [("+i", 1u8), ("-i", 3), ("+", 0), ("-", 2)]
            .iter()
            .find_map(|(p, k)| t.strip_prefix(p).map(|r| (*k, r)))
            .unwrap_or((0, t));
        let rest = rest.trim();
        let (word, offset) = match rest.split_once('@') {
            Some((w, o)) => (
                w,
                o.trim()
                    .parse::<i64>()
                    .map_err(|_| CliffordError::BadLetter('@'))?,
            ),
            None => (rest, 0),
        };
        if word == "1" {
            return Ok(PauliString {
                phase,
                ..PauliString::identity()
            });
        }
        Ok(PauliString::new(offset, parse_letters(word)?, phase))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = ["+", "+i", "-", "-i"][self.phase as usize];
        if self.is_identity() {
            write!(f, "{sign} 1")
        } else {
            write!(f, "{sign} {}@{}", letters_to_string(&self.letters), self.offset)
        }
    }
}

fn phase_value(k: u8) -> C64 {
    match k % 4 {
        0 => c(1.0, 0.0),
        1 => c(0.0, 1.0),
        2 => c(-1.0, 0.0),
        _ => c(0.0, -1.0),
    }
}

/// Images of σ_x and σ_y at site 0, both written on the window −N..=N.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CliffordRuleSpec {
    pub half_width: usize,
    pub xi: Vec<Letter>,
    pub eta: Vec<Letter>,
}

impl CliffordRuleSpec {
    pub fn new(xi: Vec<Letter>, eta: Vec<Letter>) -> Result<Self, CliffordError> {
        if xi.len() != eta.len() || xi.len() % 2 == 0 {
            return Err(CliffordError::BadLength(xi.len(), eta.len()));
        }
        Ok(CliffordRuleSpec {
            half_width: xi.len() / 2,
            xi,
            eta,
        })
    }

    pub fn parse(xi: &str, eta: &str) -> Result<Self, CliffordError> {
        Self::new(parse_letters(xi)?, parse_letters(eta)?)
    }

    pub fn xi_string(&self) -> PauliString {
        PauliString::new(-(self.half_width as i64), self.xi.clone(), 0)
    }

    pub fn eta_string(&self) -> PauliString {
        PauliString::new(-(self.half_width as i64), self.eta.clone(), 0)
    }

    /// T(σ_z) = −i T(σ_x) T(σ_y).
    pub fn zeta_string(&self) -> PauliString {
        let p = self.xi_string().mul(&self.eta_string());
        PauliString {
            phase: (p.phase + 3) % 4,
            ..p
        }
    }

    pub fn image(&self, letter: Letter) -> PauliString {
        match letter {
            Letter::I => PauliString::identity(),
            Letter::X => self.xi_string(),
            Letter::Y => self.eta_string(),
            Letter::Z => self.zeta_string(),
        }
    }

    pub fn swap_xz(&self) -> Self {
        CliffordRuleSpec {
            half_width: self.half_width,
            xi: self.xi.iter().map(|l| l.swap_xz()).collect(),
            eta: self.eta.iter().map(|l| l.swap_xz()).collect(),
        }
    }

    /// The prototype: σ_x ↦ σ_z, σ_y ↦ σ_z ⊗ σ_x ⊗ σ_z.
    pub fn prototype() -> Self {
        Self::parse("0z0", "zxz").expect("well-formed")
    }

    pub fn identity() -> Self {
        Self::parse("x", "y").expect("well-formed")
    }

    /// The same rule acting between sites a distance `l` apart, so that the
    /// chain splits into `l` independent chains.
    pub fn spaced(&self, l: usize) -> Self {
        let n = self.half_width * l;
        let mut xi = vec![Letter::I; 2 * n + 1];
        let mut eta = xi.clone();
        for k in 0..self.xi.len() {
            xi[k * l] = self.xi[k];
            eta[k * l] = self.eta[k];
        }
        CliffordRuleSpec {
            half_width: n,
            xi,
            eta,
        }
    }

    /// Dense rule on −N..=N.
    pub fn to_local_rule(&self) -> Result<LocalRule, CliffordError> {
        let n = self.half_width as i64;
        let dense = |l: Letter| self.image(l).dense(-n, n);
        let (one, x, y, z) = (
            dense(Letter::I),
            dense(Letter::X),
            dense(Letter::Y),
            dense(Letter::Z),
        );
        let half = c(0.5, 0.0);
        let ih = c(0.0, 0.5);
        // E_00, E_01, E_10, E_11 in terms of Paulis
        let images = vec![
            (&one + &z) * half,
            (&x * half) + (&y * ih),
            (&x * half) - (&y * ih),
            (&one - &z) * half,
        ];
        Ok(LocalRule::new(
            2,
            NeighborhoodScheme::line(-n..=n),
            images,
        )?)
    }
}

impl fmt::Display for CliffordRuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ξ={} η={}",
            letters_to_string(&self.xi),
            letters_to_string(&self.eta)
        )
    }
}

/// σ(ξ) and σ(η) each commute with their translates, and σ(ξ) anticommutes
/// with σ(η) at offset 0 only.
pub fn validate_clifford(spec: &CliffordRuleSpec) -> bool {
    if spec.xi.len() != spec.eta.len() || spec.xi.len() % 2 == 0 {
        return false;
    }
    let (xi, eta) = (spec.xi_string(), spec.eta_string());
    if xi.is_identity() || eta.is_identity() {
        return false;
    }
    let w = spec.xi.len() as i64;
    for j in -w..=w {
        if j != 0 && xi.anticommutes(&xi.translate(j)) {
            return false;
        }
        if j != 0 && eta.anticommutes(&eta.translate(j)) {
            return false;
        }
        if xi.anticommutes(&eta.translate(j)) != (j == 0) {
            return false;
        }
    }
    true
}

/// Twice the palindrome center of a nonidentity string, None if not palindromic.
fn palindrome_center2(p: &PauliString) -> Option<i64> {
    let (lo, hi) = p.support()?;
    let rev: Vec<Letter> = p.letters.iter().rev().copied().collect();
    (rev == p.letters).then_some(lo + hi)
}

/// Twice the common palindrome center of ξ and η.
pub fn common_center2(spec: &CliffordRuleSpec) -> Option<i64> {
    let a = palindrome_center2(&spec.xi_string())?;
    let b = palindrome_center2(&spec.eta_string())?;
    (a == b).then_some(a)
}

/// Exhaustive search over all letter pairs on −N..=N.
pub fn search_clifford(n: usize) -> Result<Vec<CliffordRuleSpec>, CliffordError> {
    let w = 2 * n + 1;
    let total = 4usize.pow(w as u32);
    let word = |mut k: usize| -> Vec<Letter> {
        let mut out = vec![Letter::I; w];
        for slot in out.iter_mut().rev() {
            *slot = Letter::ALL[k % 4];
            k /= 4;
        }
        out
    };
    let words: Vec<Vec<Letter>> = (0..total).map(word).collect();
    let mut found = Vec::new();
    for xi in &words {
        let xs = PauliString::new(-(n as i64), xi.clone(), 0);
        if xs.is_identity() || (1..=w as i64).any(|j| xs.anticommutes(&xs.translate(j))) {
            continue;
        }
        for eta in &words {
            let spec = CliffordRuleSpec {
                half_width: n,
                xi: xi.clone(),
                eta: eta.clone(),
            };
            if validate_clifford(&spec) {
                if common_center2(&spec).is_none() {
                    return Err(CliffordError::NotPalindromic);
                }
                found.push(spec);
            }
        }
    }
    Ok(found)
}

/// Heisenberg evolution for t steps; each step maps every letter through its
/// image at that site and multiplies the results.
pub fn evolve_pauli(spec: &CliffordRuleSpec, p: &PauliString, t: usize) -> PauliString {
    let images = [
        PauliString::identity(),
        spec.image(Letter::X),
        spec.image(Letter::Y),
        spec.image(Letter::Z),
    ];
    let mut cur = p.clone();
    for _ in 0..t {
        let mut next = PauliString {
            phase: cur.phase,
            ..PauliString::identity()
        };
        for (k, &l) in cur.letters.iter().enumerate() {
            if l == Letter::I {
                continue;
            }
            next = next.mul(&images[l as usize].translate(cur.offset + k as i64));
        }
        cur = next;
    }
    cur
}

/// What lies strictly between the two end blocks of width `block`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Filling {
    Empty,
    Identity,
    AllY,
    /// σ_x on even sites, σ_y on odd ones.
    XyEven,
    /// σ_y on even sites, σ_x on odd ones.
    XyOdd,
    /// σ_x on even sites, σ_z on odd ones.
    XzEven,
    /// σ_z on even sites, σ_x on odd ones.
    XzOdd,
}

impl Filling {
    /// The four fillings {1, σ_y, σ_x σ_y alternating in either phase}, plus
    /// the trivially empty interior.
    pub fn is_listed(self) -> bool {
        !matches!(self, Filling::XzEven | Filling::XzOdd)
    }
}

pub fn interior_filling(p: &PauliString, block: usize) -> Option<Filling> {
    let Some((lo, hi)) = p.support() else {
        return Some(Filling::Empty);
    };
    let (a, b) = (lo + block as i64, hi - block as i64);
    if a > b {
        return Some(Filling::Empty);
    }
    let inner: Vec<(i64, Letter)> = (a..=b).map(|x| (x, p.letter_at(x))).collect();
    let all = |f: &dyn Fn(i64) -> Letter| inner.iter().all(|&(x, l)| l == f(x));
    let alt = |even: Letter, odd: Letter| move |x: i64| if x.rem_euclid(2) == 0 { even } else { odd };
    let candidates = [
        (Filling::Identity, alt(Letter::I, Letter::I)),
        (Filling::AllY, alt(Letter::Y, Letter::Y)),
        (Filling::XyEven, alt(Letter::X, Letter::Y)),
        (Filling::XyOdd, alt(Letter::Y, Letter::X)),
        (Filling::XzEven, alt(Letter::X, Letter::Z)),
        (Filling::XzOdd, alt(Letter::Z, Letter::X)),
    ];
    candidates.into_iter().find(|(_, f)| all(f)).map(|(k, _)| k)
}

/// Images of σ_x and σ_y under `first` ∘ `second`, when the composite is again
/// of the form (ξ, η) with trivial phases and half-width at most `max_n`.
pub fn compose_specs(
    first: &CliffordRuleSpec,
    second: &CliffordRuleSpec,
    max_n: usize,
) -> Option<CliffordRuleSpec> {
    let xi = evolve_pauli(first, &second.xi_string(), 1);
    let eta = evolve_pauli(first, &second.eta_string(), 1);
    if xi.phase != 0 || eta.phase != 0 {
        return None;
    }
    let n = max_n as i64;
    for p in [&xi, &eta] {
        if let Some((lo, hi)) = p.support() {
            if lo < -n || hi > n {
                return None;
            }
        }
    }
    let window = |p: &PauliString| (-n..=n).map(|x| p.letter_at(x)).collect::<Vec<_>>();
    CliffordRuleSpec::new(window(&xi), window(&eta)).ok()
}

/// Laurent polynomial over F₂, stored as the set of exponents with
/// coefficient 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LaurentF2(pub BTreeSet<i64>);

impl LaurentF2 {
    pub fn zero() -> Self {
        LaurentF2(BTreeSet::new())
    }

    pub fn monomial(k: i64) -> Self {
        LaurentF2(BTreeSet::from([k]))
    }

    pub fn one() -> Self {
        Self::monomial(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_monomial(&self) -> Option<i64> {
        (self.0.len() == 1).then(|| *self.0.iter().next().unwrap())
    }

    fn toggle(&mut self, k: i64) {
        if !self.0.remove(&k) {
            self.0.insert(k);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        LaurentF2(self.0.symmetric_difference(&other.0).copied().collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for a in &self.0 {
            for b in &other.0 {
                out.toggle(a + b);
            }
        }
        out
    }

    pub fn shift(&self, k: i64) -> Self {
        LaurentF2(self.0.iter().map(|e| e + k).collect())
    }
}

impl fmt::Display for LaurentF2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .0
            .iter()
            .map(|&k| match k {
                0 => "1".to_string(),
                1 => "z".to_string(),
                k => format!("z^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// [[ξ₊, η₊], [ξ₋, η₋]]: x-bits in the top row, z-bits in the bottom, the
/// letter at site k contributing the monomial z^k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyMatrixF2(pub [[LaurentF2; 2]; 2]);

impl PolyMatrixF2 {
    pub fn identity() -> Self {
        PolyMatrixF2([
            [LaurentF2::one(), LaurentF2::zero()],
            [LaurentF2::zero(), LaurentF2::one()],
        ])
    }

    /// Encoding of the trivial rule (σ_x, σ_y) ↦ (σ_x, σ_y); since η encodes
    /// σ_y = σ_x σ_z, matrices compose as M₁ G M₂ with G this same matrix
    /// (G is its own inverse over F₂).
    pub fn gauge() -> Self {
        PolyMatrixF2([
            [LaurentF2::one(), LaurentF2::one()],
            [LaurentF2::zero(), LaurentF2::one()],
        ])
    }

    pub fn mul(&self, other: &Self) -> Self {
        let a = &self.0;
        let b = &other.0;
        let e = |i: usize, j: usize| a[i][0].mul(&b[0][j]).add(&a[i][1].mul(&b[1][j]));
        PolyMatrixF2([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    pub fn det(&self) -> LaurentF2 {
        let a = &self.0;
        a[0][0].mul(&a[1][1]).add(&a[1][0].mul(&a[0][1]))
    }

    /// Column image of a Pauli string as (x-part, z-part).
    pub fn encode(p: &PauliString) -> (LaurentF2, LaurentF2) {
        let mut xs = LaurentF2::zero();
        let mut zs = LaurentF2::zero();
        for (k, l) in p.letters.iter().enumerate() {
            let (x, z) = l.bits();
            let e = p.offset + k as i64;
            if x {
                xs.toggle(e);
            }
            if z {
                zs.toggle(e);
            }
        }
        (xs, zs)
    }
}

impl fmt::Display for PolyMatrixF2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = &self.0;
        write!(f, "[[{}, {}], [{}, {}]]", a[0][0], a[0][1], a[1][0], a[1][1])
    }
}

/// Polynomial matrix of a valid rule. The determinant must be the monomial
/// z^{2c} with c the common palindrome center, i.e. constant 1 once the
/// strings are centered at 0 as for the trivial rule.
pub fn to_poly_matrix(spec: &CliffordRuleSpec) -> Result<PolyMatrixF2, CliffordError> {
    if !validate_clifford(spec) {
        return Err(CliffordError::Invalid);
    }
    let (xp, xm) = PolyMatrixF2::encode(&spec.xi_string());
    let (ep, em) = PolyMatrixF2::encode(&spec.eta_string());
    let m = PolyMatrixF2([[xp, ep], [xm, em]]);
    let det = m.det();
    let center2 = common_center2(spec).ok_or(CliffordError::NotPalindromic)?;
    if det != LaurentF2::monomial(center2) {
        return Err(CliffordError::Determinant(det));
    }
    Ok(m)
}
