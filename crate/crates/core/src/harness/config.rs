//! Flat `key = value` configuration format with dotted sections,
//! `#` comments and bracketed lists, e.g.
//!
//! ```text
//! # strong-coupling W run
//! solver = heom
//! initial = W
//! bath.lambda = 0.1
//! bath.gamma = 0.05
//! bath.alphas = [1, 1, 1]
//! time.t_final = 50
//! time.samples = 1000
//! measures = [pi_tangle, chsh(ab)]
//! solver.L = 12
//! sweep.alpha3 = [0, 0.5, 1]
//! ```
//!
//! Unknown keys are rejected; every error names the offending key and line.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::heom::BathSpec;
use crate::measures::SeesawOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Heom,
    RwaClosed,
    RwaOracle,
    Pseudomode,
}

impl SolverKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "heom" => Some(SolverKind::Heom),
            "rwa-closed" => Some(SolverKind::RwaClosed),
            "rwa-oracle" => Some(SolverKind::RwaOracle),
            "pseudomode" => Some(SolverKind::Pseudomode),
            _ => None,
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolverKind::Heom => "heom",
            SolverKind::RwaClosed => "rwa-closed",
            SolverKind::RwaOracle => "rwa-oracle",
            SolverKind::Pseudomode => "pseudomode",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    W,
    Ghz,
    Ggg,
    /// Single excited qubit |e⟩.
    Excited,
    /// Single ground qubit |g⟩.
    Ground,
    /// Real amplitudes in the computational basis (normalized on use).
    Custom(Vec<f64>),
}

impl InitialState {
    pub fn n_qubits(&self) -> Result<usize> {
        match self {
            InitialState::W | InitialState::Ghz | InitialState::Ggg => Ok(3),
            InitialState::Excited | InitialState::Ground => Ok(1),
            InitialState::Custom(a) => match a.len() {
                2 => Ok(1),
                4 => Ok(2),
                8 => Ok(3),
                n => Err(Error::invalid(format!(
                    "custom amplitudes must have length 2, 4 or 8, got {n}"
                ))),
            },
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::W => f.write_str("W"),
            InitialState::Ghz => f.write_str("GHZ"),
            InitialState::Ggg => f.write_str("ggg"),
            InitialState::Excited => f.write_str("e"),
            InitialState::Ground => f.write_str("g"),
            InitialState::Custom(a) => {
                write!(f, "[")?;
                for (i, v) in a.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// Two-qubit subsystem label (qubit indices a = 0, b = 1, c = 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pair {
    Ab,
    Ac,
    Bc,
}

impl Pair {
    pub fn keep(&self) -> [usize; 2] {
        match self {
            Pair::Ab => [0, 1],
            Pair::Ac => [0, 2],
            Pair::Bc => [1, 2],
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Pair::Ab => "ab",
            Pair::Ac => "ac",
            Pair::Bc => "bc",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "ab" => Some(Pair::Ab),
            "ac" => Some(Pair::Ac),
            "bc" => Some(Pair::Bc),
            _ => None,
        }
    }
}

/// One-versus-rest bipartition label for negativity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cut {
    ABc,
    BAc,
    CAb,
}

impl Cut {
    pub fn subsystem(&self) -> usize {
        match self {
            Cut::ABc => 0,
            Cut::BAc => 1,
            Cut::CAb => 2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Cut::ABc => "a|bc",
            Cut::BAc => "b|ac",
            Cut::CAb => "c|ab",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "a|bc" => Some(Cut::ABc),
            "b|ac" => Some(Cut::BAc),
            "c|ab" => Some(Cut::CAb),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureSpec {
    Concurrence(Pair),
    Chsh(Pair),
    Negativity(Cut),
    PiTangle,
    Svetlichny,
}

impl MeasureSpec {
    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "pi_tangle" => return Some(MeasureSpec::PiTangle),
            "svetlichny" => return Some(MeasureSpec::Svetlichny),
            _ => {}
        }
        let (head, rest) = token.split_once('(')?;
        let arg = rest.strip_suffix(')')?;
        match head {
            "concurrence" => Pair::parse(arg).map(MeasureSpec::Concurrence),
            "chsh" => Pair::parse(arg).map(MeasureSpec::Chsh),
            "negativity" => Cut::parse(arg).map(MeasureSpec::Negativity),
            _ => None,
        }
    }

    /// Column name used in CSV output.
    pub fn column(&self) -> String {
        match self {
            MeasureSpec::Concurrence(p) => format!("concurrence_{}", p.label()),
            MeasureSpec::Chsh(p) => format!("chsh_{}", p.label()),
            MeasureSpec::Negativity(c) => {
                format!("negativity_{}", c.label().replace('|', "_"))
            }
            MeasureSpec::PiTangle => "pi_tangle".into(),
            MeasureSpec::Svetlichny => "svetlichny".into(),
        }
    }

    /// Canonical config token.
    pub fn token(&self) -> String {
        match self {
            MeasureSpec::Concurrence(p) => format!("concurrence({})", p.label()),
            MeasureSpec::Chsh(p) => format!("chsh({})", p.label()),
            MeasureSpec::Negativity(c) => format!("negativity({})", c.label()),
            MeasureSpec::PiTangle => "pi_tangle".into(),
            MeasureSpec::Svetlichny => "svetlichny".into(),
        }
    }

    fn needs_qubits(&self) -> usize {
        match self {
            MeasureSpec::Concurrence(Pair::Ab) | MeasureSpec::Chsh(Pair::Ab) => 2,
            _ => 3,
        }
    }
}

/// Solver tuning knobs (`solver.*` keys; unused ones are ignored by the
/// dispatched solver).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// HEOM truncation depth (solver.L).
    pub depth: u32,
    /// Integrator step bound (solver.dt).
    pub dt: f64,
    /// Pseudomode truncation (solver.fock_dim); defaulted from the
    /// Markovianity ratio when absent.
    pub fock_dim: Option<usize>,
    pub seesaw_restarts: usize,
    pub seesaw_tol: f64,
    pub seesaw_max_sweeps: usize,
    pub allow_undamped: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            depth: 12,
            dt: 0.005,
            fock_dim: None,
            seesaw_restarts: 32,
            seesaw_tol: 1e-9,
            seesaw_max_sweeps: 500,
            allow_undamped: false,
        }
    }
}

impl SolverParams {
    pub fn seesaw_options(&self, seed: u64) -> SeesawOptions {
        SeesawOptions {
            restarts: self.seesaw_restarts,
            tol: self.seesaw_tol,
            max_sweeps: self.seesaw_max_sweeps,
            seed,
        }
    }
}

/// One fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub solver: SolverKind,
    pub bath: BathSpec,
    pub initial: InitialState,
    pub t_final: f64,
    pub samples: usize,
    pub measures: Vec<MeasureSpec>,
    pub params: SolverParams,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn n_qubits(&self) -> usize {
        self.bath.n_qubits()
    }

    /// Full consistency check; every parse path funnels through this.
    pub fn validate(&self) -> Result<()> {
        let state_qubits = self.initial.n_qubits()?;
        if state_qubits != self.bath.n_qubits() {
            return Err(Error::invalid(format!(
                "key `bath.alphas`: {} couplings but initial state `{}` has {} qubits",
                self.bath.n_qubits(),
                self.initial,
                state_qubits
            )));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::invalid("key `time.t_final`: must be positive"));
        }
        if self.samples < 2 {
            return Err(Error::invalid("key `time.samples`: need at least 2"));
        }
        for m in &self.measures {
            if self.n_qubits() < m.needs_qubits() {
                return Err(Error::invalid(format!(
                    "key `measures`: `{}` needs {} qubits, register has {}",
                    m.token(),
                    m.needs_qubits(),
                    self.n_qubits()
                )));
            }
        }
        if matches!(self.solver, SolverKind::RwaClosed | SolverKind::RwaOracle) {
            if self.bath.n_qubits() != 3 {
                return Err(Error::invalid(
                    "key `solver`: RWA solvers model the three-qubit single-excitation sector",
                ));
            }
            match &self.initial {
                InitialState::W | InitialState::Ggg => {}
                InitialState::Custom(a) => {
                    // support must stay inside {|egg⟩, |geg⟩, |gge⟩}
                    let ok = a
                        .iter()
                        .enumerate()
                        .all(|(i, v)| *v == 0.0 || matches!(i, 3 | 5 | 6));
                    if !ok {
                        return Err(Error::invalid(
                            "key `initial`: RWA solvers need a single-excitation state \
                             (support on |egg⟩, |geg⟩, |gge⟩)",
                        ));
                    }
                }
                other => {
                    return Err(Error::invalid(format!(
                        "key `initial`: `{other}` is outside the RWA single-excitation sector"
                    )));
                }
            }
        }
        if !(self.params.dt > 0.0) {
            return Err(Error::invalid("key `solver.dt`: must be positive"));
        }
        if self.params.depth < 2 {
            return Err(Error::invalid("key `solver.L`: must be at least 2"));
        }
        Ok(())
    }

    /// Pseudomode truncation: explicit setting, else 10 in the moderately
    /// non-Markovian regime and 20 once R = α_T √λ / γ is large.
    pub fn effective_fock_dim(&self) -> usize {
        self.params.fock_dim.unwrap_or_else(|| {
            if self.bath.markov_ratio() > 50.0 {
                20
            } else {
                10
            }
        })
    }

    /// Stable textual form; hashed into the CSV fingerprint.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let alphas: Vec<String> = self.bath.alphas.iter().map(|a| a.to_string()).collect();
        s.push_str(&format!("bath.alphas = [{}]\n", alphas.join(", ")));
        s.push_str(&format!("bath.gamma = {}\n", self.bath.gamma));
        s.push_str(&format!("bath.lambda = {}\n", self.bath.lambda));
        s.push_str(&format!("bath.omega0 = {}\n", self.bath.omega0));
        s.push_str(&format!("initial = {}\n", self.initial));
        let tokens: Vec<String> = self.measures.iter().map(|m| m.token()).collect();
        s.push_str(&format!("measures = [{}]\n", tokens.join(", ")));
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("solver = {}\n", self.solver));
        s.push_str(&format!("solver.L = {}\n", self.params.depth));
        s.push_str(&format!(
            "solver.allow_undamped = {}\n",
            self.params.allow_undamped
        ));
        s.push_str(&format!("solver.dt = {}\n", self.params.dt));
        if let Some(f) = self.params.fock_dim {
            s.push_str(&format!("solver.fock_dim = {f}\n"));
        }
        s.push_str(&format!(
            "solver.seesaw_max_sweeps = {}\n",
            self.params.seesaw_max_sweeps
        ));
        s.push_str(&format!(
            "solver.seesaw_restarts = {}\n",
            self.params.seesaw_restarts
        ));
        s.push_str(&format!("solver.seesaw_tol = {}\n", self.params.seesaw_tol));
        s.push_str(&format!("time.samples = {}\n", self.samples));
        s.push_str(&format!("time.t_final = {}\n", self.t_final));
        s
    }
}

/// A value a sweep can substitute into the base configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepValue {
    Number(f64),
    Token(String),
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Number(v) => write!(f, "{v}"),
            SweepValue::Token(t) => f.write_str(t),
        }
    }
}

/// Parameters a sweep may vary.
const SWEEPABLE: &[&str] = &[
    "alpha1",
    "alpha2",
    "alpha3",
    "bath.gamma",
    "bath.lambda",
    "solver",
];

/// A base configuration plus one or more swept parameters; points are the
/// Cartesian product, ordered lexicographically (parameters sorted by name,
/// values ascending).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub swept: Vec<(String, Vec<SweepValue>)>,
    pub workers: usize,
}

impl SweepSpec {
    pub fn single(base: ExperimentConfig) -> Self {
        SweepSpec {
            base,
            swept: Vec::new(),
            workers: 0,
        }
    }

    /// All sweep points in deterministic order; an empty sweep list yields
    /// the single base run.
    pub fn points(&self) -> Result<Vec<(Vec<(String, SweepValue)>, ExperimentConfig)>> {
        let mut points = vec![(Vec::new(), self.base.clone())];
        for (param, values) in &self.swept {
            let mut next = Vec::with_capacity(points.len() * values.len());
            for (labels, cfg) in &points {
                for value in values {
                    let cfg = apply_sweep_value(cfg, param, value)?;
                    let mut labels = labels.clone();
                    labels.push((param.clone(), value.clone()));
                    next.push((labels, cfg));
                }
            }
            points = next;
        }
        for (_, cfg) in &points {
            cfg.validate()?;
        }
        Ok(points)
    }
}

pub fn apply_sweep_value(
    cfg: &ExperimentConfig,
    param: &str,
    value: &SweepValue,
) -> Result<ExperimentConfig> {
    let mut out = cfg.clone();
    let need_number = |value: &SweepValue| -> Result<f64> {
        match value {
            SweepValue::Number(v) => Ok(*v),
            SweepValue::Token(t) => Err(Error::invalid(format!(
                "sweep value `{t}` for `{param}` must be numeric"
            ))),
        }
    };
    match param {
        "alpha1" | "alpha2" | "alpha3" => {
            let idx = (param.as_bytes()[5] - b'1') as usize;
            if idx >= out.bath.alphas.len() {
                return Err(Error::invalid(format!(
                    "sweep parameter `{param}` exceeds the register size"
                )));
            }
            out.bath.alphas[idx] = need_number(value)?;
        }
        "bath.gamma" => out.bath.gamma = need_number(value)?,
        "bath.lambda" => out.bath.lambda = need_number(value)?,
        "solver" => match value {
            SweepValue::Token(t) => {
                out.solver = SolverKind::parse(t).ok_or_else(|| {
                    Error::invalid(format!("sweep value `{t}` is not a solver"))
                })?;
            }
            SweepValue::Number(v) => {
                return Err(Error::invalid(format!(
                    "sweep value `{v}` for `solver` must be a solver name"
                )));
            }
        },
        other => {
            return Err(Error::invalid(format!(
                "`{other}` is not sweepable (choose from {SWEEPABLE:?})"
            )));
        }
    }
    Ok(out)
}

/// Either a single run or a sweep, depending on the presence of `sweep.*`
/// keys.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedConfig {
    Single(ExperimentConfig),
    Sweep(SweepSpec),
}

#[derive(Debug, Clone)]
enum RawValue {
    Number(f64),
    Token(String),
    List(Vec<RawValue>),
}

impl RawValue {
    fn type_name(&self) -> &'static str {
        match self {
            RawValue::Number(_) => "number",
            RawValue::Token(_) => "token",
            RawValue::List(_) => "list",
        }
    }
}

struct KeyTable {
    entries: BTreeMap<String, (usize, RawValue)>,
    consumed: std::cell::RefCell<Vec<String>>,
}

fn config_err(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

impl KeyTable {
    fn get(&self, key: &str) -> Option<(usize, &RawValue)> {
        self.consumed.borrow_mut().push(key.to_string());
        self.entries.get(key).map(|(l, v)| (*l, v))
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some((_, RawValue::Number(v))) => Ok(Some(*v)),
            Some((line, v)) => Err(config_err(
                line,
                key,
                format!("expected a number, found {}", v.type_name()),
            )),
        }
    }

    fn integer(&self, key: &str) -> Result<Option<u64>> {
        match self.number(key)? {
            None => Ok(None),
            Some(v) => {
                if v.fract() != 0.0 || v < 0.0 {
                    let line = self.entries.get(key).map(|(l, _)| *l).unwrap_or(0);
                    return Err(config_err(line, key, "expected a nonnegative integer"));
                }
                Ok(Some(v as u64))
            }
        }
    }

    fn token(&self, key: &str) -> Result<Option<(usize, String)>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, RawValue::Token(t))) => Ok(Some((line, t.clone()))),
            Some((line, v)) => Err(config_err(
                line,
                key,
                format!("expected a bare token, found {}", v.type_name()),
            )),
        }
    }

    fn number_list(&self, key: &str) -> Result<Option<(usize, Vec<f64>)>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, RawValue::List(items))) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        RawValue::Number(v) => out.push(*v),
                        other => {
                            return Err(config_err(
                                line,
                                key,
                                format!("expected numbers, found {}", other.type_name()),
                            ))
                        }
                    }
                }
                Ok(Some((line, out)))
            }
            Some((line, v)) => Err(config_err(
                line,
                key,
                format!("expected a list, found {}", v.type_name()),
            )),
        }
    }
}

fn parse_value(text: &str) -> RawValue {
    let trimmed = text.trim();
    if let Some(inner) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
        let items: Vec<RawValue> = inner
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(parse_value)
            .collect();
        return RawValue::List(items);
    }
    match trimmed.parse::<f64>() {
        Ok(v) => RawValue::Number(v),
        Err(_) => RawValue::Token(trimmed.to_string()),
    }
}

fn tokenize(text: &str) -> Result<KeyTable> {
    let mut entries = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            config_err(line_no, line, "expected `key = value`")
        })?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(config_err(line_no, "<empty>", "missing key before `=`"));
        }
        if entries.contains_key(&key) {
            return Err(config_err(line_no, &key, "duplicate key"));
        }
        entries.insert(key, (line_no, parse_value(value)));
    }
    Ok(KeyTable {
        entries,
        consumed: std::cell::RefCell::new(Vec::new()),
    })
}

/// Parse and fully validate a configuration, applying defaults
/// (L = 12, dt = 0.005/ω₀, 32 see-saw restarts, ...).
pub fn parse_config(text: &str) -> Result<ParsedConfig> {
    let table = tokenize(text)?;

    let solver = {
        let (line, token) = table
            .token("solver")?
            .ok_or_else(|| config_err(0, "solver", "required key missing"))?;
        SolverKind::parse(&token).ok_or_else(|| {
            config_err(
                line,
                "solver",
                format!("unknown solver `{token}` (heom, rwa-closed, rwa-oracle, pseudomode)"),
            )
        })?
    };

    let initial = match table.get("initial") {
        None => return Err(config_err(0, "initial", "required key missing")),
        Some((line, RawValue::Token(t))) => match t.as_str() {
            "W" | "w" => InitialState::W,
            "GHZ" | "ghz" => InitialState::Ghz,
            "ggg" => InitialState::Ggg,
            "e" => InitialState::Excited,
            "g" => InitialState::Ground,
            other => {
                return Err(config_err(
                    line,
                    "initial",
                    format!("unknown state `{other}` (W, GHZ, ggg, e, g or an amplitude list)"),
                ))
            }
        },
        Some((line, RawValue::List(items))) => {
            let mut amps = Vec::with_capacity(items.len());
            for item in items {
                match item {
                    RawValue::Number(v) => amps.push(*v),
                    other => {
                        return Err(config_err(
                            line,
                            "initial",
                            format!("amplitudes must be numbers, found {}", other.type_name()),
                        ))
                    }
                }
            }
            InitialState::Custom(amps)
        }
        Some((line, v)) => {
            return Err(config_err(
                line,
                "initial",
                format!("expected a state name or amplitude list, found {}", v.type_name()),
            ))
        }
    };

    let lambda = table
        .number("bath.lambda")?
        .ok_or_else(|| config_err(0, "bath.lambda", "required key missing"))?;
    let gamma = table
        .number("bath.gamma")?
        .ok_or_else(|| config_err(0, "bath.gamma", "required key missing"))?;
    let omega0 = table.number("bath.omega0")?.unwrap_or(1.0);
    let (alpha_line, alphas) = table
        .number_list("bath.alphas")?
        .ok_or_else(|| config_err(0, "bath.alphas", "required key missing"))?;
    let bath = BathSpec::new(lambda, gamma, omega0, alphas)
        .map_err(|e| config_err(alpha_line, "bath.alphas", e.to_string()))?;

    let t_final = table
        .number("time.t_final")?
        .ok_or_else(|| config_err(0, "time.t_final", "required key missing"))?;
    let samples = table
        .integer("time.samples")?
        .ok_or_else(|| config_err(0, "time.samples", "required key missing"))?
        as usize;

    let measures = match table.get("measures") {
        None => Vec::new(),
        Some((line, RawValue::List(items))) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                let token = match item {
                    RawValue::Token(t) => t.clone(),
                    other => {
                        return Err(config_err(
                            line,
                            "measures",
                            format!("expected measure names, found {}", other.type_name()),
                        ))
                    }
                };
                let m = MeasureSpec::parse(&token).ok_or_else(|| {
                    config_err(
                        line,
                        "measures",
                        format!(
                            "unknown measure `{token}` (pi_tangle, svetlichny, \
                             concurrence(xy), chsh(xy), negativity(x|yz))"
                        ),
                    )
                })?;
                out.push(m);
            }
            out
        }
        Some((line, v)) => {
            return Err(config_err(
                line,
                "measures",
                format!("expected a list, found {}", v.type_name()),
            ))
        }
    };

    let defaults = SolverParams::default();
    let params = SolverParams {
        depth: table.integer("solver.L")?.map(|v| v as u32).unwrap_or(defaults.depth),
        dt: table.number("solver.dt")?.unwrap_or(defaults.dt),
        fock_dim: table.integer("solver.fock_dim")?.map(|v| v as usize),
        seesaw_restarts: table
            .integer("solver.seesaw_restarts")?
            .map(|v| v as usize)
            .unwrap_or(defaults.seesaw_restarts),
        seesaw_tol: table
            .number("solver.seesaw_tol")?
            .unwrap_or(defaults.seesaw_tol),
        seesaw_max_sweeps: table
            .integer("solver.seesaw_max_sweeps")?
            .map(|v| v as usize)
            .unwrap_or(defaults.seesaw_max_sweeps),
        allow_undamped: match table.token("solver.allow_undamped")? {
            None => defaults.allow_undamped,
            Some((line, t)) => match t.as_str() {
                "true" => true,
                "false" => false,
                other => {
                    return Err(config_err(
                        line,
                        "solver.allow_undamped",
                        format!("expected true or false, found `{other}`"),
                    ))
                }
            },
        },
    };

    let seed = table.integer("seed")?.unwrap_or(0);
    let workers = table.integer("workers")?.unwrap_or(0) as usize;

    // sweep.* keys
    let mut swept: Vec<(String, Vec<SweepValue>)> = Vec::new();
    let sweep_keys: Vec<(String, usize)> = table
        .entries
        .iter()
        .filter(|(k, _)| k.starts_with("sweep."))
        .map(|(k, (line, _))| (k.clone(), *line))
        .collect();
    for (key, line) in sweep_keys {
        let param = key.trim_start_matches("sweep.").to_string();
        let param = match param.as_str() {
            "gamma" => "bath.gamma".to_string(),
            "lambda" => "bath.lambda".to_string(),
            other => other.to_string(),
        };
        if !SWEEPABLE.contains(&param.as_str()) {
            return Err(config_err(
                line,
                &key,
                format!("`{param}` is not sweepable (choose from {SWEEPABLE:?})"),
            ));
        }
        let values = match table.get(&key) {
            Some((_, RawValue::List(items))) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    out.push(match item {
                        RawValue::Number(v) => SweepValue::Number(*v),
                        RawValue::Token(t) => SweepValue::Token(t.clone()),
                        RawValue::List(_) => {
                            return Err(config_err(line, &key, "nested lists are not allowed"))
                        }
                    });
                }
                out
            }
            Some((_, RawValue::Number(v))) => vec![SweepValue::Number(*v)],
            Some((_, RawValue::Token(t))) => vec![SweepValue::Token(t.clone())],
            None => unreachable!("key came from the table"),
        };
        if values.is_empty() {
            return Err(config_err(line, &key, "sweep list must not be empty"));
        }
        if swept.iter().any(|(p, _)| *p == param) {
            return Err(config_err(line, &key, "parameter is swept twice"));
        }
        let mut values = values;
        sort_sweep_values(&mut values);
        swept.push((param, values));
    }
    swept.sort_by(|a, b| a.0.cmp(&b.0));

    // reject unknown keys
    let consumed = table.consumed.borrow();
    for (key, (line, _)) in &table.entries {
        if key.starts_with("sweep.") {
            continue;
        }
        if !consumed.iter().any(|c| c == key) {
            return Err(config_err(*line, key, "unknown key"));
        }
    }

    let config = ExperimentConfig {
        solver,
        bath,
        initial,
        t_final,
        samples,
        measures,
        params,
        seed,
    };

    if swept.is_empty() {
        config.validate()?;
        if workers != 0 {
            // a plain run ignores workers, but keep it accepted for symmetry
            log::debug!("workers = {workers} has no effect on a single run");
        }
        Ok(ParsedConfig::Single(config))
    } else {
        let spec = SweepSpec {
            base: config,
            swept,
            workers,
        };
        // validate every point eagerly so bad sweeps fail at parse time
        spec.points()?;
        Ok(ParsedConfig::Sweep(spec))
    }
}

fn sort_sweep_values(values: &mut [SweepValue]) {
    values.sort_by(|a, b| match (a, b) {
        (SweepValue::Number(x), SweepValue::Number(y)) => {
            x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal)
        }
        (SweepValue::Token(x), SweepValue::Token(y)) => x.cmp(y),
        (SweepValue::Number(_), SweepValue::Token(_)) => std::cmp::Ordering::Less,
        (SweepValue::Token(_), SweepValue::Number(_)) => std::cmp::Ordering::Greater,
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
solver = heom
initial = W
bath.lambda = 0.1
bath.gamma = 0.05
bath.alphas = [1, 1, 1]
time.t_final = 50
time.samples = 100
measures = [pi_tangle]
";

    #[test]
    fn minimal_config_gets_defaults() {
        let parsed = parse_config(MINIMAL).unwrap();
        let cfg = match parsed {
            ParsedConfig::Single(c) => c,
            _ => panic!("expected single run"),
        };
        assert_eq!(cfg.params.depth, 12);
        assert_eq!(cfg.params.dt, 0.005);
        assert_eq!(cfg.params.seesaw_restarts, 32);
        assert_eq!(cfg.bath.omega0, 1.0);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn rwa_accepts_svetlichny() {
        let text = MINIMAL
            .replace("solver = heom", "solver = rwa-closed")
            .replace("measures = [pi_tangle]", "measures = [svetlichny]");
        assert!(matches!(
            parse_config(&text).unwrap(),
            ParsedConfig::Single(_)
        ));
    }

    #[test]
    fn alpha_count_mismatch_names_key() {
        let text = MINIMAL.replace("bath.alphas = [1, 1, 1]", "bath.alphas = [1, 1]");
        let err = parse_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bath.alphas"), "got: {msg}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        let text = format!("{MINIMAL}typo.key = 3\n");
        let err = parse_config(&text).unwrap_err();
        match err {
            Error::Config { line, key, .. } => {
                assert_eq!(key, "typo.key");
                assert_eq!(line, 9);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn bad_number_names_key_and_line() {
        let text = MINIMAL.replace("bath.lambda = 0.1", "bath.lambda = zero");
        let err = parse_config(&text).unwrap_err();
        match err {
            Error::Config { line, key, .. } => {
                assert_eq!(key, "bath.lambda");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn ghz_is_rejected_for_rwa() {
        let text = MINIMAL
            .replace("solver = heom", "solver = rwa-closed")
            .replace("initial = W", "initial = GHZ");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("single-excitation"));
    }

    #[test]
    fn sweep_points_are_sorted_cartesian() {
        let text = format!("{MINIMAL}sweep.alpha3 = [1, 0, 0.5]\nsweep.gamma = [0.1, 0.05]\n");
        let spec = match parse_config(&text).unwrap() {
            ParsedConfig::Sweep(s) => s,
            _ => panic!("expected sweep"),
        };
        let points = spec.points().unwrap();
        assert_eq!(points.len(), 6);
        // sorted: alpha3 before bath.gamma, values ascending
        assert_eq!(points[0].0[0].0, "alpha3");
        assert_eq!(points[0].0[1].0, "bath.gamma");
        let labels: Vec<(f64, f64)> = points
            .iter()
            .map(|(l, _)| {
                let a = match l[0].1 {
                    SweepValue::Number(v) => v,
                    _ => unreachable!(),
                };
                let g = match l[1].1 {
                    SweepValue::Number(v) => v,
                    _ => unreachable!(),
                };
                (a, g)
            })
            .collect();
        assert_eq!(
            labels,
            vec![
                (0.0, 0.05),
                (0.0, 0.1),
                (0.5, 0.05),
                (0.5, 0.1),
                (1.0, 0.05),
                (1.0, 0.1)
            ]
        );
        // applied configs carry the substituted values
        assert_eq!(points[0].1.bath.alphas[2], 0.0);
        assert_eq!(points[0].1.bath.gamma, 0.05);
    }

    #[test]
    fn solver_sweep_accepts_tokens() {
        let text = format!("{MINIMAL}sweep.solver = [rwa-closed, heom]\n");
        let spec = match parse_config(&text).unwrap() {
            ParsedConfig::Sweep(s) => s,
            _ => panic!("expected sweep"),
        };
        let points = spec.points().unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].1.solver, SolverKind::Heom);
        assert_eq!(points[1].1.solver, SolverKind::RwaClosed);
    }

    #[test]
    fn canonical_string_is_stable() {
        let a = match parse_config(MINIMAL).unwrap() {
            ParsedConfig::Single(c) => c,
            _ => unreachable!(),
        };
        let b = a.clone();
        assert_eq!(a.canonical_string(), b.canonical_string());
        assert!(a.canonical_string().contains("solver = heom"));
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let text = format!("# header\n\n{MINIMAL}# trailing\n");
        assert!(parse_config(&text).is_ok());
    }
}
