//! JSON schemas for rule files, observables, classical tables, Clifford
//! specs and walk specs.
//!
//! Complex entries are `[re, im]` pairs. Floats are written in the shortest
//! form that parses back to the same double, so every emitted file re-reads
//! bit for bit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::{CliffordError, CliffordRuleSpec};
use crate::lattice::{LatticeError, NeighborhoodScheme, Region, Site};
use crate::linalg::{c, CMat, C64};
use crate::rules::{
    cellwise, compose, identity_rule, left_shift, phase_gate, right_shift, ClassicalCA,
    LocalOperator, LocalRule, RuleError,
};
use crate::walks::{lift_coined_walk, CoinedWalkSpec, WalkError};

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error(transparent)]
    Walk(#[from] WalkError),
}

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMat, SchemaError> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(SchemaError::Shape("matrix rows are empty or ragged".into()));
    }
    Ok(CMat::from_fn(n, m, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

/// A site: a bare integer on the line, a coordinate list otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SiteJson {
    Line(i64),
    Point(Vec<i64>),
}

impl From<&Site> for SiteJson {
    fn from(x: &Site) -> Self {
        match x.0.as_slice() {
            [v] => SiteJson::Line(*v),
            _ => SiteJson::Point(x.0.clone()),
        }
    }
}

pub fn region_from_json(sites: &[SiteJson]) -> Result<Region, SchemaError> {
    let sites: Vec<Site> = sites
        .iter()
        .map(|s| match s {
            SiteJson::Line(v) => Site(vec![*v]),
            SiteJson::Point(v) => Site(v.clone()),
        })
        .collect();
    let dim = sites.first().map_or(1, Site::dim);
    Ok(Region::new(dim, sites)?)
}

pub fn region_to_json(r: &Region) -> Vec<SiteJson> {
    r.sites().iter().map(SiteJson::from).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Right,
    Left,
}

/// Rule file. `explicit` lists the images of the cell matrix units E_ij in
/// row-major order (index i·d + j), each on the scheme's sites in sorted
/// order. `compose` applies the last listed rule to an observable first.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleFile {
    Explicit {
        cell_dim: usize,
        scheme: Vec<SiteJson>,
        images: Vec<MatrixJson>,
    },
    Identity {
        cell_dim: usize,
    },
    Shift {
        cell_dim: usize,
        direction: Direction,
    },
    Cellwise {
        unitary: MatrixJson,
    },
    PhaseGate {
        phi: f64,
    },
    Clifford {
        xi: String,
        eta: String,
    },
    CoinedWalk {
        coin: MatrixJson,
    },
    Compose {
        rules: Vec<RuleFile>,
    },
}

impl RuleFile {
    pub fn from_rule(rule: &LocalRule) -> Self {
        RuleFile::Explicit {
            cell_dim: rule.cell_dim,
            scheme: region_to_json(rule.region()),
            images: rule.images.iter().map(matrix_to_json).collect(),
        }
    }

    pub fn build(&self) -> Result<LocalRule, SchemaError> {
        Ok(match self {
            RuleFile::Explicit {
                cell_dim,
                scheme,
                images,
            } => {
                let images = images
                    .iter()
                    .map(matrix_from_json)
                    .collect::<Result<Vec<_>, _>>()?;
                let scheme = NeighborhoodScheme::new(region_from_json(scheme)?)?;
                LocalRule::new(*cell_dim, scheme, images)?
            }
            RuleFile::Identity { cell_dim } => identity_rule(positive(*cell_dim)?),
            RuleFile::Shift {
                cell_dim,
                direction: Direction::Right,
            } => right_shift(positive(*cell_dim)?),
            RuleFile::Shift {
                cell_dim,
                direction: Direction::Left,
            } => left_shift(positive(*cell_dim)?),
            RuleFile::Cellwise { unitary } => {
                let w = matrix_from_json(unitary)?;
                if w.nrows() != w.ncols() {
                    return Err(SchemaError::Shape("cellwise unitary is not square".into()));
                }
                cellwise(&w)
            }
            RuleFile::PhaseGate { phi } => phase_gate(*phi),
            RuleFile::Clifford { xi, eta } => CliffordRuleSpec::parse(xi, eta)?.to_local_rule()?,
            RuleFile::CoinedWalk { coin } => lift_coined_walk(&matrix_from_json(coin)?)?,
            RuleFile::Compose { rules } => {
                let mut built = rules.iter().map(RuleFile::build).rev();
                let mut acc = built
                    .next()
                    .ok_or_else(|| SchemaError::Shape("compose needs at least one rule".into()))??;
                for r in built {
                    acc = compose(&r?, &acc)?;
                }
                acc
            }
        })
    }
}

fn positive(d: usize) -> Result<usize, SchemaError> {
    if d == 0 {
        return Err(SchemaError::Shape("cell_dim must be positive".into()));
    }
    Ok(d)
}

pub fn parse_rule(text: &str) -> Result<LocalRule, SchemaError> {
    serde_json::from_str::<RuleFile>(text)?.build()
}

pub fn rule_to_json(rule: &LocalRule) -> String {
    to_pretty(&RuleFile::from_rule(rule))
}

pub fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

/// Local observable: an explicit matrix on `region`, or for qubits a Pauli
/// word such as `"-i zyz@-1"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableFile {
    Matrix {
        region: Vec<SiteJson>,
        matrix: MatrixJson,
    },
    Pauli {
        pauli: String,
    },
}

impl ObservableFile {
    pub fn from_operator(op: &LocalOperator) -> Self {
        ObservableFile::Matrix {
            region: region_to_json(&op.region),
            matrix: matrix_to_json(&op.matrix),
        }
    }

    pub fn build(&self, cell_dim: usize) -> Result<LocalOperator, SchemaError> {
        match self {
            ObservableFile::Matrix { region, matrix } => Ok(LocalOperator::new(
                region_from_json(region)?,
                matrix_from_json(matrix)?,
                cell_dim,
            )?),
            ObservableFile::Pauli { pauli } => {
                if cell_dim != 2 {
                    return Err(SchemaError::Shape("Pauli words need qubit cells".into()));
                }
                let p: crate::clifford::PauliString = pauli.parse()?;
                let (lo, hi) = p.support().unwrap_or((0, 0));
                Ok(LocalOperator::new(Region::interval(lo, hi), p.dense(lo, hi), 2)?)
            }
        }
    }
}

/// Classical automaton table. Tables list the new cell value for each
/// neighborhood configuration, the first sorted site being the most
/// significant digit.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalFile {
    pub d: usize,
    pub neighborhood: Vec<SiteJson>,
    pub table: Vec<usize>,
    #[serde(default)]
    pub inverse_neighborhood: Option<Vec<SiteJson>>,
    #[serde(default)]
    pub inverse_table: Option<Vec<usize>>,
}

impl ClassicalFile {
    pub fn build(&self) -> Result<ClassicalCA, SchemaError> {
        let n_i = self
            .inverse_neighborhood
            .as_ref()
            .map(|r| region_from_json(r))
            .transpose()?;
        Ok(ClassicalCA {
            d: positive(self.d)?,
            n_c: region_from_json(&self.neighborhood)?,
            local_fn: self.table.clone(),
            n_i,
            inverse_fn: self.inverse_table.clone(),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliffordFile {
    pub xi: String,
    pub eta: String,
}

impl CliffordFile {
    pub fn build(&self) -> Result<CliffordRuleSpec, SchemaError> {
        Ok(CliffordRuleSpec::parse(&self.xi, &self.eta)?)
    }
}

fn default_length() -> usize {
    0
}

/// Walk input file. `length` 0 picks the smallest ring that avoids wrapping;
/// `start` is a ring position.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkFile {
    pub coin: MatrixJson,
    pub steps: usize,
    #[serde(default)]
    pub start: i64,
    /// (ψ_R, ψ_L) at the start site.
    pub amplitudes: [[f64; 2]; 2],
    #[serde(default = "default_length")]
    pub length: usize,
    #[serde(default)]
    pub allow_wrap: bool,
}

impl WalkFile {
    pub fn build(&self) -> Result<CoinedWalkSpec, SchemaError> {
        let coin = matrix_from_json(&self.coin)?;
        if coin.nrows() != 2 || coin.ncols() != 2 {
            return Err(SchemaError::Shape("coin must be 2 × 2".into()));
        }
        let length = if self.length == 0 {
            (2 * self.steps + 1).max(3)
        } else {
            self.length
        };
        let amps: [C64; 2] = [
            c(self.amplitudes[0][0], self.amplitudes[0][1]),
            c(self.amplitudes[1][0], self.amplitudes[1][1]),
        ];
        let start = if self.length == 0 {
            self.start + self.steps as i64
        } else {
            self.start
        };
        let mut spec = CoinedWalkSpec::new(coin, self.steps, start, amps, length);
        spec.allow_wrap = self.allow_wrap;
        Ok(spec)
    }
}
