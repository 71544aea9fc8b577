//! Command-line front end. [`run`] returns the exit status and the report
//! text so the binary stays a thin wrapper and tests can drive it in-process.
//!
//! Exit status: 0 success, 1 a check failed, 2 unreadable or malformed input.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::clifford::{
    common_center2, evolve_pauli, search_clifford, to_poly_matrix, PauliString,
};
use crate::io::{
    matrix_to_json, rule_to_json, to_pretty, ClassicalFile, CliffordFile, MatrixJson,
    ObservableFile, RuleFile, SchemaError, WalkFile,
};
use crate::lattice::{Region, TorusSpec};
use crate::quasiprob::{compare_two_site, quasi_probs, QuasiTransitionTensor, WIGNER_LABELS};
use crate::rules::{
    apply_unwrapped, compose, find_inverse, global_apply_with_cap, global_unitary_with_cap,
    identity_rule, quantize_classical, validate_rule, LocalRule, DEFAULT_DIM_CAP,
};
use crate::structure::{classify_nn_qubit, invert, margolus_decompose, DecompositionReport};
use crate::walks::{lift_coined_walk, walk_sector_evolve};

#[derive(Parser, Debug)]
#[command(name = "qca", version, about = "Quantum cellular automata toolkit")]
pub struct Cli {
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the homomorphism and commutation conditions of a rule file.
    Validate { rule: PathBuf },
    /// Heisenberg image of a local observable after `steps` applications.
    Evolve {
        rule: PathBuf,
        #[arg(long)]
        observable: PathBuf,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        /// Ring/torus periods; omit for the infinite lattice.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        torus: Option<Vec<usize>>,
        #[arg(long, default_value_t = DEFAULT_DIM_CAP)]
        max_dim: usize,
    },
    /// Dense global unitary on a regular torus.
    Unitary {
        rule: PathBuf,
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        torus: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_DIM_CAP)]
        max_dim: usize,
    },
    /// Two-layer block decomposition of a nearest-neighbor rule.
    Margolus { rule: PathBuf },
    /// Inverse rule, emitted as a rule file.
    Invert { rule: PathBuf },
    /// Canonical form of a nearest-neighbor qubit rule.
    Classify { rule: PathBuf },
    /// All qubit Clifford rules of the given half-width.
    CliffordSearch {
        #[arg(long, default_value_t = 1)]
        half_width: usize,
    },
    /// Evolve a Pauli word under a Clifford rule, one line per step.
    CliffordEvolve {
        spec: PathBuf,
        #[arg(long)]
        pauli: String,
        #[arg(long)]
        steps: usize,
        /// Spread the rule onto chains spaced this far apart.
        #[arg(long, default_value_t = 1)]
        spacing: usize,
    },
    /// Quasi-probability tensor and the two-site comparison.
    Quasiprob {
        rule: PathBuf,
        #[arg(long, default_value_t = 0)]
        eta1: usize,
        #[arg(long, default_value_t = 0)]
        eta2: usize,
    },
    /// Site distributions of a coined walk, one row per time step.
    Walk {
        spec: PathBuf,
        #[arg(long, default_value = ",")]
        delimiter: String,
    },
    /// Quantize a reversible classical automaton table.
    Quantize {
        table: PathBuf,
        /// Largest inverse-neighborhood radius searched when no inverse is given.
        #[arg(long, default_value_t = 2)]
        search_radius: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Check(String),
    Schema(String),
}

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        Failure::Schema(e.to_string())
    }
}

fn check<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure::Check(format!("{context}: {e}"))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))
}

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))
}

fn load_rule(path: &Path) -> Result<LocalRule, Failure> {
    let file: RuleFile = load(path)?;
    file.build().map_err(|e| match e {
        SchemaError::Json(_) | SchemaError::Shape(_) | SchemaError::Lattice(_) => {
            Failure::Schema(format!("{}: {e}", path.display()))
        }
        other => Failure::Check(format!("{}: {other}", path.display())),
    })
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let result = dispatch(&cli.command);
    let (code, report, err) = match result {
        Ok(text) => (0, text, String::new()),
        Err(Failure::Check(m)) => (1, format!("failed; {m}\n"), String::new()),
        Err(Failure::Schema(m)) => (2, String::new(), format!("schema error: {m}\n")),
    };
    match (&cli.output, code) {
        (Some(path), 0 | 1) => match std::fs::write(path, &report) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr: err },
            Err(e) => Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("cannot write {}: {e}\n", path.display()),
            },
        },
        _ => Outcome { code, stdout: report, stderr: err },
    }
}

fn dispatch(cmd: &Command) -> Result<String, Failure> {
    match cmd {
        Command::Validate { rule } => cmd_validate(&load_rule(rule)?),
        Command::Evolve {
            rule,
            observable,
            steps,
            torus,
            max_dim,
        } => {
            let rule = load_rule(rule)?;
            let obs: ObservableFile = load(observable)?;
            cmd_evolve(&rule, &obs, *steps, torus.as_deref(), *max_dim)
        }
        Command::Unitary {
            rule,
            torus,
            max_dim,
        } => cmd_unitary(&load_rule(rule)?, torus, *max_dim),
        Command::Margolus { rule } => cmd_margolus(&load_rule(rule)?),
        Command::Invert { rule } => cmd_invert(&load_rule(rule)?),
        Command::Classify { rule } => cmd_classify(&load_rule(rule)?),
        Command::CliffordSearch { half_width } => cmd_clifford_search(*half_width),
        Command::CliffordEvolve {
            spec,
            pauli,
            steps,
            spacing,
        } => {
            let file: CliffordFile = load(spec)?;
            cmd_clifford_evolve(&file, pauli, *steps, *spacing)
        }
        Command::Quasiprob { rule, eta1, eta2 } => cmd_quasiprob(&load_rule(rule)?, *eta1, *eta2),
        Command::Walk { spec, delimiter } => {
            let file: WalkFile = load(spec)?;
            cmd_walk(&file, delimiter)
        }
        Command::Quantize {
            table,
            search_radius,
        } => {
            let file: ClassicalFile = load(table)?;
            cmd_quantize(&file, *search_radius)
        }
    }
}

fn cmd_validate(rule: &LocalRule) -> Result<String, Failure> {
    let report = validate_rule(rule).map_err(check("validation"))?;
    let mut out = String::new();
    let verdict = if report.is_valid() { "valid" } else { "invalid" };
    writeln!(out, "{verdict}; scheme {}", rule.region()).unwrap();
    writeln!(out, "cell dimension: {}", rule.cell_dim).unwrap();
    writeln!(out, "homomorphism residual: {:.3e}", report.homomorphism_residual).unwrap();
    for (x, r) in &report.offsets {
        writeln!(out, "commutator at offset {x}: {r:.3e}").unwrap();
    }
    if report.is_valid() {
        Ok(out)
    } else {
        Err(Failure::Check(out.trim_end().replace('\n', "; ")))
    }
}

fn cmd_evolve(
    rule: &LocalRule,
    obs: &ObservableFile,
    steps: usize,
    torus: Option<&[usize]>,
    cap: usize,
) -> Result<String, Failure> {
    let mut op = obs.build(rule.cell_dim)?;
    let torus = torus
        .map(|p| TorusSpec::new(p.to_vec()))
        .transpose()
        .map_err(|e| Failure::Schema(e.to_string()))?;
    for _ in 0..steps {
        op = match &torus {
            Some(t) => global_apply_with_cap(rule, &op, t, cap),
            None => apply_unwrapped(rule, &op),
        }
        .map_err(check("evolution"))?
        .trimmed();
    }
    Ok(to_pretty(&ObservableFile::from_operator(&op)))
}

#[derive(Serialize)]
struct UnitaryDump {
    periods: Vec<usize>,
    dim: usize,
    matrix: MatrixJson,
}

fn cmd_unitary(rule: &LocalRule, periods: &[usize], cap: usize) -> Result<String, Failure> {
    let torus = TorusSpec::new(periods.to_vec()).map_err(|e| Failure::Schema(e.to_string()))?;
    let g = global_unitary_with_cap(rule, &torus, cap).map_err(check("global unitary"))?;
    Ok(to_pretty(&UnitaryDump {
        periods: periods.to_vec(),
        dim: g.nrows(),
        matrix: matrix_to_json(&g),
    }))
}

#[derive(Serialize)]
struct MargolusDump {
    #[serde(flatten)]
    report: DecompositionReport,
    u: MatrixJson,
    v: MatrixJson,
}

fn cmd_margolus(rule: &LocalRule) -> Result<String, Failure> {
    let form = margolus_decompose(rule).map_err(check("decomposition"))?;
    let report = form.report(rule).map_err(check("decomposition"))?;
    Ok(to_pretty(&MargolusDump {
        report,
        u: matrix_to_json(&form.u),
        v: matrix_to_json(&form.v),
    }))
}

fn cmd_invert(rule: &LocalRule) -> Result<String, Failure> {
    let form = margolus_decompose(rule).map_err(check("decomposition"))?;
    let inv = invert(&form).map_err(check("inversion"))?;
    let round = compose(&inv, rule).map_err(check("inversion"))?;
    let dev = round.distance(&identity_rule(rule.cell_dim));
    if dev > crate::structure::REBUILD_TOL {
        return Err(Failure::Check(format!("inverse misses the identity by {dev:.3e}")));
    }
    Ok(rule_to_json(&inv))
}

#[derive(Serialize)]
struct ClassifyDump {
    kind: crate::structure::ClassKind,
    phi: Option<f64>,
    cellwise: MatrixJson,
    basis_change: MatrixJson,
    canonical_distance: f64,
}

fn cmd_classify(rule: &LocalRule) -> Result<String, Failure> {
    let c = classify_nn_qubit(rule).map_err(check("classification"))?;
    let canon = c.canonical_rule().map_err(check("classification"))?;
    Ok(to_pretty(&ClassifyDump {
        kind: c.kind,
        phi: c.phi,
        cellwise: matrix_to_json(&c.cellwise),
        basis_change: matrix_to_json(&c.basis_change),
        canonical_distance: canon.distance(rule),
    }))
}

#[derive(Serialize)]
struct CliffordEntry {
    xi: String,
    eta: String,
    zeta: String,
    palindrome: bool,
    /// Twice the common palindrome center; nonzero for translated rules.
    center2: i64,
    determinant: String,
}

#[derive(Serialize)]
struct CliffordSearchDump {
    half_width: usize,
    count: usize,
    rules: Vec<CliffordEntry>,
}

fn cmd_clifford_search(n: usize) -> Result<String, Failure> {
    if n > 2 {
        return Err(Failure::Schema(format!("half-width {n} exceeds the supported 2")));
    }
    let found = search_clifford(n).map_err(check("search"))?;
    let mut rules = Vec::with_capacity(found.len());
    for s in &found {
        let center = common_center2(s);
        let det = to_poly_matrix(s).map_err(check("determinant"))?.det();
        rules.push(CliffordEntry {
            xi: crate::clifford::letters_to_string(&s.xi),
            eta: crate::clifford::letters_to_string(&s.eta),
            zeta: s.zeta_string().to_string(),
            palindrome: center.is_some(),
            center2: center.unwrap_or(0),
            determinant: det.to_string(),
        });
    }
    Ok(to_pretty(&CliffordSearchDump {
        half_width: n,
        count: rules.len(),
        rules,
    }))
}

fn cmd_clifford_evolve(
    file: &CliffordFile,
    pauli: &str,
    steps: usize,
    spacing: usize,
) -> Result<String, Failure> {
    let spec = file.build()?;
    if !crate::clifford::validate_clifford(&spec) {
        return Err(Failure::Check(format!(
            "xi = {}, eta = {} is not a Clifford rule",
            file.xi, file.eta
        )));
    }
    if spacing == 0 {
        return Err(Failure::Schema("spacing must be positive".into()));
    }
    let spec = if spacing > 1 { spec.spaced(spacing) } else { spec };
    let mut p: PauliString = pauli
        .parse()
        .map_err(|e: crate::clifford::CliffordError| Failure::Schema(e.to_string()))?;
    let mut out = String::new();
    for t in 0..=steps {
        writeln!(out, "{t}\t{p}").unwrap();
        p = evolve_pauli(&spec, &p, 1);
    }
    Ok(out)
}

#[derive(Serialize)]
struct QuasiDump {
    labels: [&'static str; 4],
    tensor: QuasiTransitionTensor,
    deterministic: bool,
    min_entry: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<crate::quasiprob::ComparisonReport>,
}

fn cmd_quasiprob(rule: &LocalRule, e1: usize, e2: usize) -> Result<String, Failure> {
    if e1 > 3 || e2 > 3 {
        return Err(Failure::Schema("eta indices run over 0..=3".into()));
    }
    let tensor = quasi_probs(rule).map_err(check("quasi-probabilities"))?;
    let comparison = if rule.region().is_subset(&Region::interval(-1, 1)) {
        Some(compare_two_site(rule, e1, e2).map_err(check("comparison"))?)
    } else {
        None
    };
    Ok(to_pretty(&QuasiDump {
        labels: WIGNER_LABELS,
        deterministic: tensor.is_deterministic(1e-9),
        min_entry: tensor.min_entry(),
        tensor,
        comparison,
    }))
}

fn cmd_walk(file: &WalkFile, delimiter: &str) -> Result<String, Failure> {
    let spec = file.build()?;
    let rule = lift_coined_walk(&spec.coin).map_err(check("walk rule"))?;
    let rows = walk_sector_evolve(&rule, &spec).map_err(check("walk"))?;
    let mut out = String::from("t");
    for x in 0..spec.length {
        write!(out, "{delimiter}x{x}").unwrap();
    }
    out.push('\n');
    for (t, row) in rows.iter().enumerate() {
        out.push_str(&t.to_string());
        for p in row {
            write!(out, "{delimiter}{p}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

fn cmd_quantize(file: &ClassicalFile, radius: i64) -> Result<String, Failure> {
    let mut ca = file.build()?;
    if ca.inverse_fn.is_none() {
        let found = (0..=radius).find_map(|r| {
            let n_i = Region::interval(-r, r);
            find_inverse(&ca.local_fn, &ca.n_c, ca.d, &n_i).map(|t| (n_i, t))
        });
        match found {
            Some((n_i, t)) => {
                ca.n_i = Some(n_i);
                ca.inverse_fn = Some(t);
            }
            None => {
                return Err(Failure::Check(format!(
                    "no inverse automaton: none supplied and none found on {} for radius up to {radius}",
                    Region::interval(-radius, radius)
                )))
            }
        }
    }
    let rule = quantize_classical(&ca).map_err(check("quantization"))?;
    Ok(rule_to_json(&rule))
}
