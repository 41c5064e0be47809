//! Experiment configuration: strict TOML with every violation reported at once.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use chiral_core::bath::SpinChainBathParams;
use chiral_core::markov::ChiralMarkovParams;
use chiral_core::mps::{ChainParams, MpsConfig, TdvpConfig};
use chiral_core::quantum::{c, CVec, DensityMatrix, PureState};
use chiral_core::robustness::{DisorderSpec, LossPattern};
use chiral_core::tcl::{Bounds, TclConfig, TclMode};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Markov,
    Tcl2,
    Redfield,
    Secular,
    Mps,
}

impl Engine {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "markov" => Some(Engine::Markov),
            "tcl2" => Some(Engine::Tcl2),
            "redfield" => Some(Engine::Redfield),
            "secular" => Some(Engine::Secular),
            "mps" => Some(Engine::Mps),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Engine::Markov => "markov",
            Engine::Tcl2 => "tcl2",
            Engine::Redfield => "redfield",
            Engine::Secular => "secular",
            Engine::Mps => "mps",
        }
    }

    pub fn tcl_mode(self) -> Option<TclMode> {
        match self {
            Engine::Tcl2 => Some(TclMode::Tcl2),
            Engine::Redfield => Some(TclMode::Redfield),
            Engine::Secular => Some(TclMode::Secular),
            _ => None,
        }
    }
}

/// Basis label (gg, ge, eg, ee), Bell label (psi_plus, psi_minus, phi_plus, phi_minus)
/// or custom amplitudes [[re, im]; 4] over |gg>, |ge>, |eg>, |ee>.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Label(String),
    Custom { amplitudes: Vec<[f64; 2]> },
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Label("gg".into())
    }
}

const BASIS: [&str; 4] = ["gg", "ge", "eg", "ee"];

impl InitialState {
    pub fn basis_label(&self) -> Option<&str> {
        match self {
            InitialState::Label(l) if BASIS.contains(&l.as_str()) => Some(l),
            _ => None,
        }
    }

    pub fn density_matrix(&self) -> Result<DensityMatrix, String> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let amps: Vec<[f64; 2]> = match self {
            InitialState::Label(l) => match l.as_str() {
                "gg" => vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
                "ge" => vec![[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
                "eg" => vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 0.0]],
                "ee" => vec![[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
                "psi_plus" => vec![[0.0, 0.0], [s, 0.0], [s, 0.0], [0.0, 0.0]],
                "psi_minus" => vec![[0.0, 0.0], [-s, 0.0], [s, 0.0], [0.0, 0.0]],
                "phi_plus" => vec![[s, 0.0], [0.0, 0.0], [0.0, 0.0], [s, 0.0]],
                "phi_minus" => vec![[s, 0.0], [0.0, 0.0], [0.0, 0.0], [-s, 0.0]],
                other => return Err(format!("unknown state label `{other}`")),
            },
            InitialState::Custom { amplitudes } => amplitudes.clone(),
        };
        if amps.len() != 4 {
            return Err(format!("expected 4 amplitudes, got {}", amps.len()));
        }
        let v = CVec::from_iterator(4, amps.iter().map(|a| c(a[0], a[1])));
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err("amplitudes must not all vanish".into());
        }
        PureState::new(v / c(n, 0.0)).map(|p| p.projector()).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeGrid {
    pub t_max: f64,
    pub dt: f64,
    pub record_every: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            dt: 0.01,
            record_every: 1,
        }
    }
}

/// Waveguide (Born-Markov) model in units of gamma_R.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarkovSection {
    pub gamma_l: f64,
    pub gamma_r: f64,
    /// Propagation phase kd.
    pub phi: f64,
    pub omega: [f64; 2],
    pub gamma_loss: [f64; 2],
    pub guided: [f64; 2],
    pub detuning: f64,
    /// gamma_R values with gamma_L = 1 - gamma_R; one trajectory each when non-empty.
    pub chirality_scan: Vec<f64>,
}

impl Default for MarkovSection {
    fn default() -> Self {
        Self {
            gamma_l: 0.0,
            gamma_r: 1.0,
            phi: 0.0,
            omega: [0.0; 2],
            gamma_loss: [0.0; 2],
            guided: [1.0; 2],
            detuning: 0.0,
            chirality_scan: Vec::new(),
        }
    }
}

impl MarkovSection {
    pub fn params(&self) -> ChiralMarkovParams {
        let mut p = ChiralMarkovParams::chiral(self.gamma_l, self.gamma_r, self.phi).with_drives(self.omega[0], self.omega[1]);
        p.gamma_loss = self.gamma_loss;
        p.guided = self.guided;
        p.detuning = self.detuning;
        p
    }
}

/// Spin-chain bath and emitter couplings in units of J.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainSection {
    pub j: f64,
    pub g: [f64; 2],
    pub phi: [f64; 2],
    /// Plaquette separation (TCL engines).
    pub d: i64,
    pub omega: [f64; 2],
    pub gamma_loss: [f64; 2],
    pub delta: f64,
}

impl Default for ChainSection {
    fn default() -> Self {
        Self {
            j: 1.0,
            g: [0.14, 0.30],
            phi: [FRAC_PI_4; 2],
            d: 1,
            omega: [0.063, 0.0],
            gamma_loss: [0.0; 2],
            delta: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MpsSection {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub zeta_edge: f64,
    pub d_max: usize,
    /// Run every bond dimension and tabulate the first peak (overridden by --dmax).
    pub d_max_scan: Vec<usize>,
    pub krylov_dim: usize,
    pub krylov_tol: f64,
    pub correlations: bool,
    /// Per-site populations, bond currents and transverse coherence as long-format CSV.
    pub heatmaps: bool,
}

impl Default for MpsSection {
    fn default() -> Self {
        Self {
            n: 16,
            n1: 3,
            n2: 13,
            zeta_edge: 2.0,
            d_max: 18,
            d_max_scan: Vec::new(),
            krylov_dim: 30,
            krylov_tol: 1e-10,
            correlations: false,
            heatmaps: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn grid(&self) -> Vec<f64> {
        chiral_core::markov::linspace(self.lo, self.hi, self.n)
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::new(self.lo, self.hi, self.n)
    }

    fn check(&self, path: &str, errs: &mut Vec<Violation>) {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.hi < self.lo {
            errs.push(Violation::new(path, "finite lo <= hi"));
        }
        if self.n == 0 {
            errs.push(Violation::new(format!("{path}.n"), "at least one grid point"));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub omega_1: Axis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_2: Option<Axis>,
    /// Plaquette separations for the TCL distance surface.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub distances: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaSection {
    pub a: Vec<f64>,
    pub patterns: Vec<LossPattern>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    /// Lattice integrals I_n(t; omega) for n = 0..=n_max.
    pub n_max: i64,
    pub omegas: Vec<f64>,
    pub times: Vec<f64>,
    /// Table of generator terms for the configured drives.
    pub generator_table: bool,
    /// Gamma_ij(t; omega) on the engine's time grid.
    pub kernel_table: bool,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            n_max: 6,
            omegas: vec![0.0],
            times: vec![10.0, 50.0, 100.0, 500.0],
            generator_table: false,
            kernel_table: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    pub omega_1: Axis,
    pub omega_2: Axis,
    /// Coupling bounds (TCL engines only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_1: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_2: Option<Axis>,
    #[serde(default)]
    pub refinements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub engine: Engine,
    #[serde(default)]
    pub initial: InitialState,
    /// Second initial state for the trace-distance (BLP) series.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blp_partner: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Observable columns to keep in trajectory CSVs; empty keeps all.
    #[serde(default)]
    pub outputs: Vec<String>,
    #[serde(default)]
    pub time: TimeGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markov: Option<MarkovSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mps: Option<MpsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<KernelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSection>,
}

/// One problem in a config document: dotted path and what was expected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub expected: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, expected: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            expected: expected.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: expected {}", self.path, self.expected)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} config violation(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Every section present, used as the key schema.
fn template() -> toml::Value {
    let full = ExperimentConfig {
        name: String::new(),
        engine: Engine::Markov,
        initial: InitialState::default(),
        blp_partner: Some("eg".into()),
        seed: 0,
        outputs: Vec::new(),
        time: TimeGrid::default(),
        markov: Some(MarkovSection::default()),
        chain: Some(ChainSection::default()),
        mps: Some(MpsSection::default()),
        sweep: Some(SweepSection {
            omega_1: Axis { lo: 0.0, hi: 1.0, n: 2 },
            omega_2: Some(Axis { lo: 0.0, hi: 1.0, n: 2 }),
            distances: vec![1],
        }),
        disorder: Some(DisorderSpec {
            target: chiral_core::robustness::DisorderTarget::Position,
            kind: chiral_core::robustness::DisorderKind::QuasiStatic,
            sigma: 0.0,
            tau: 1.0,
            realizations: 1,
            seed: 0,
        }),
        beta: Some(BetaSection {
            a: vec![1.0],
            patterns: vec![LossPattern::Both],
        }),
        kernels: Some(KernelSection::default()),
        optimize: Some(OptimizeSection {
            omega_1: Axis { lo: 0.0, hi: 1.0, n: 2 },
            omega_2: Axis { lo: 0.0, hi: 1.0, n: 2 },
            g_1: Some(Axis { lo: 0.0, hi: 1.0, n: 2 }),
            g_2: Some(Axis { lo: 0.0, hi: 1.0, n: 2 }),
            refinements: 0,
        }),
    };
    toml::Value::try_from(full).expect("template serializes")
}

fn type_name(v: &toml::Value) -> &'static str {
    match v {
        toml::Value::String(_) => "a string",
        toml::Value::Integer(_) => "an integer",
        toml::Value::Float(_) => "a number",
        toml::Value::Boolean(_) => "a boolean",
        toml::Value::Datetime(_) => "a datetime",
        toml::Value::Array(_) => "an array",
        toml::Value::Table(_) => "a table",
    }
}

/// Whether `user` has the shape of `schema` at the top level; integers pass for floats.
fn same_shape(user: &toml::Value, schema: &toml::Value) -> bool {
    use toml::Value as V;
    match (user, schema) {
        (V::Integer(_) | V::Float(_), V::Float(_)) => true,
        (V::Array(u), V::Array(s)) => match s.first() {
            Some(first) => u.iter().all(|x| same_shape(x, first)),
            None => true,
        },
        (V::Table(_), V::Table(_)) => true,
        _ => std::mem::discriminant(user) == std::mem::discriminant(schema),
    }
}

/// Report unknown keys and scalar type mismatches, removing them so the remaining keys
/// can still be decoded and validated.
fn sanitize(user: &mut toml::Table, schema: &toml::Table, prefix: &str, out: &mut Vec<Violation>) {
    let keys: Vec<String> = user.keys().cloned().collect();
    for k in keys {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        let Some(s) = schema.get(&k) else {
            let mut known: Vec<&str> = schema.keys().map(|s| s.as_str()).collect();
            known.sort();
            out.push(Violation::new(path, format!("one of the known keys [{}]", known.join(", "))));
            user.remove(&k);
            continue;
        };
        if path == "initial" {
            continue;
        }
        let v = user.get_mut(&k).expect("key present");
        if !same_shape(v, s) {
            let want = match s {
                toml::Value::Array(a) => a.first().map(|f| format!("an array of {}", type_name(f).trim_start_matches("a ").trim_start_matches("an "))),
                _ => None,
            }
            .unwrap_or_else(|| type_name(s).to_string());
            out.push(Violation::new(path, format!("{want}, found {}", type_name(v))));
            user.remove(&k);
            continue;
        }
        if let (toml::Value::Table(u), toml::Value::Table(st)) = (v, s) {
            sanitize(u, st, &path, out);
        }
    }
}

fn section<T: for<'de> Deserialize<'de>>(table: &toml::Table, key: &str, out: &mut Vec<Violation>) -> Option<T> {
    let v = table.get(key)?;
    match v.clone().try_into::<T>() {
        Ok(x) => Some(x),
        Err(e) => {
            out.push(Violation::new(key, e.message().trim().to_string()));
            None
        }
    }
}

/// Parse and validate; every unknown key, type mismatch and constraint violation is returned.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let fail = |violations| Err(ConfigError { violations });
    let mut table: toml::Table = match text.parse() {
        Ok(t) => t,
        Err(e) => return fail(vec![Violation::new("<document>", format!("valid TOML ({})", e.message()))]),
    };
    let mut errs = Vec::new();
    if let toml::Value::Table(schema) = template() {
        sanitize(&mut table, &schema, "", &mut errs);
    }
    // per-section decoding so that one bad section does not hide the others
    let engine: Option<Engine> = match table.get("engine") {
        None => {
            errs.push(Violation::new("engine", "one of markov, tcl2, redfield, secular, mps"));
            None
        }
        Some(_) => section(&table, "engine", &mut errs),
    };
    let name: Option<String> = section(&table, "name", &mut errs);
    let initial: Option<InitialState> = section(&table, "initial", &mut errs);
    let blp_partner: Option<String> = section(&table, "blp_partner", &mut errs);
    let seed: Option<u64> = section(&table, "seed", &mut errs);
    let outputs: Option<Vec<String>> = section(&table, "outputs", &mut errs);
    let time: Option<TimeGrid> = section(&table, "time", &mut errs);
    let markov = section(&table, "markov", &mut errs);
    let chain = section(&table, "chain", &mut errs);
    let mps = section(&table, "mps", &mut errs);
    let sweep = section(&table, "sweep", &mut errs);
    let disorder = section(&table, "disorder", &mut errs);
    let beta = section(&table, "beta", &mut errs);
    let kernels = section(&table, "kernels", &mut errs);
    let optimize = section(&table, "optimize", &mut errs);
    let Some(engine) = engine else {
        return fail(errs);
    };
    let cfg = ExperimentConfig {
        name: name.unwrap_or_default(),
        engine,
        initial: initial.unwrap_or_default(),
        blp_partner,
        seed: seed.unwrap_or(0),
        outputs: outputs.unwrap_or_default(),
        time: time.unwrap_or_default(),
        markov,
        chain,
        mps,
        sweep,
        disorder,
        beta,
        kernels,
        optimize,
    };
    errs.extend(cfg.violations());
    if errs.is_empty() {
        Ok(cfg)
    } else {
        fail(errs)
    }
}

fn core_check(path: &str, r: chiral_core::Result<()>, errs: &mut Vec<Violation>) {
    if let Err(e) = r {
        errs.push(Violation::new(path, e.to_string()));
    }
}

impl ExperimentConfig {
    /// Constraint violations (empty when valid).
    pub fn violations(&self) -> Vec<Violation> {
        let mut errs = Vec::new();
        let t = &self.time;
        if !(t.dt > 0.0) || !t.dt.is_finite() {
            errs.push(Violation::new("time.dt", "a positive step"));
        }
        if !(t.t_max > 0.0) || !t.t_max.is_finite() {
            errs.push(Violation::new("time.t_max", "a positive duration"));
        }
        if t.record_every == 0 {
            errs.push(Violation::new("time.record_every", "an integer >= 1"));
        }
        match self.engine {
            Engine::Markov => {
                if let Err(e) = self.initial.density_matrix() {
                    errs.push(Violation::new("initial", e));
                }
                let m = self.markov_section();
                core_check("markov", m.params().validate(), &mut errs);
                for (k, g) in m.chirality_scan.iter().enumerate() {
                    if !(0.0..=1.0).contains(g) {
                        errs.push(Violation::new(format!("markov.chirality_scan[{k}]"), "a value in [0, 1]"));
                    }
                }
            }
            Engine::Mps => {
                if self.initial.basis_label().is_none() {
                    errs.push(Violation::new("initial", "a basis label (gg, ge, eg, ee) for the chain engine"));
                }
                let m = self.mps_section();
                if m.d_max_scan.contains(&0) {
                    errs.push(Violation::new("mps.d_max_scan", "bond dimensions >= 1"));
                }
                core_check("mps", self.mps_config(m.d_max).validate(), &mut errs);
            }
            _ => {
                if self.initial.basis_label().is_none() {
                    errs.push(Violation::new("initial", "a basis label (gg, ge, eg, ee) for the TCL engines"));
                }
                core_check("chain", self.tcl_config().validate(), &mut errs);
            }
        }
        if let Some(p) = &self.blp_partner {
            if !BASIS.contains(&p.as_str()) {
                errs.push(Violation::new("blp_partner", "a basis label (gg, ge, eg, ee)"));
            }
        }
        if let Some(s) = &self.sweep {
            s.omega_1.check("sweep.omega_1", &mut errs);
            if let Some(a) = &s.omega_2 {
                a.check("sweep.omega_2", &mut errs);
            }
            if s.distances.iter().any(|d| *d < 1) {
                errs.push(Violation::new("sweep.distances", "separations >= 1"));
            }
        }
        if let Some(d) = &self.disorder {
            core_check("disorder", d.validate(), &mut errs);
        }
        if let Some(b) = &self.beta {
            if b.a.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
                errs.push(Violation::new("beta.a", "values in (0, 1]"));
            }
            if b.patterns.is_empty() {
                errs.push(Violation::new("beta.patterns", "at least one of both, upstream_only, downstream_only"));
            }
        }
        if let Some(k) = &self.kernels {
            if k.n_max < 0 {
                errs.push(Violation::new("kernels.n_max", "an integer >= 0"));
            }
            if k.times.iter().any(|t| !(*t >= 0.0)) {
                errs.push(Violation::new("kernels.times", "non-negative times"));
            }
        }
        if let Some(o) = &self.optimize {
            o.omega_1.check("optimize.omega_1", &mut errs);
            o.omega_2.check("optimize.omega_2", &mut errs);
            if let Some(a) = &o.g_1 {
                a.check("optimize.g_1", &mut errs);
            }
            if let Some(a) = &o.g_2 {
                a.check("optimize.g_2", &mut errs);
            }
        }
        for (k, o) in self.outputs.iter().enumerate() {
            if o.is_empty() {
                errs.push(Violation::new(format!("outputs[{k}]"), "a non-empty observable name"));
            }
        }
        errs
    }

    pub fn markov_section(&self) -> MarkovSection {
        self.markov.clone().unwrap_or_default()
    }

    pub fn chain_section(&self) -> ChainSection {
        self.chain.unwrap_or_default()
    }

    pub fn mps_section(&self) -> MpsSection {
        self.mps.clone().unwrap_or_default()
    }

    pub fn tcl_config(&self) -> TclConfig {
        let ch = self.chain_section();
        let mut bath = SpinChainBathParams::plaquettes(ch.j, ch.g[0], ch.g[1], ch.phi[0], ch.d);
        bath.phi = ch.phi;
        bath.delta = ch.delta;
        TclConfig {
            mode: self.engine.tcl_mode().unwrap_or(TclMode::Tcl2),
            omega_1: ch.omega[0],
            omega_2: ch.omega[1],
            bath,
            t_max: self.time.t_max,
            dt: self.time.dt,
            record_every: self.time.record_every,
            initial: self.initial.basis_label().unwrap_or("gg").to_string(),
            gamma_loss: ch.gamma_loss,
        }
    }

    pub fn mps_config(&self, d_max: usize) -> MpsConfig {
        let ch = self.chain_section();
        let m = self.mps_section();
        MpsConfig {
            chain: ChainParams {
                n: m.n,
                n1: m.n1,
                n2: m.n2,
                j_b: ch.j,
                g: ch.g,
                phi: ch.phi,
                zeta_edge: m.zeta_edge,
                omega: ch.omega,
            },
            tdvp: TdvpConfig {
                dt: self.time.dt,
                d_max,
                krylov_dim: m.krylov_dim,
                krylov_tol: m.krylov_tol,
            },
            t_max: self.time.t_max,
            initial: self.initial.basis_label().unwrap_or("gg").to_string(),
            record_every: self.time.record_every,
            correlations: m.correlations,
        }
    }

    /// Canonical TOML of the effective configuration (hash input).
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
