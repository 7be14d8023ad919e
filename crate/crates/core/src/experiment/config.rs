use std::path::PathBuf;

use serde::Deserialize;
use toml::Spanned;

use crate::engine::{DynamicsConfig, PayoffNormalization, UpdateScheme};
use crate::error::{Error, Result};
use crate::game::{GameKind, GameParams, PayoffMatrix};
use crate::topology::{
    build_barabasi_albert, build_complete, build_erdos_renyi, build_lattice, build_regular_random, Neighbourhood,
    Network,
};

#[derive(Clone, Debug, PartialEq)]
pub enum TopologySpec {
    Lattice { side: usize, neighbourhood: Neighbourhood },
    RegularRandom { n: usize, k: usize },
    ErdosRenyi { n: usize, mean_degree: f64 },
    BarabasiAlbert { n: usize, m: usize },
    Complete { n: usize },
}

impl TopologySpec {
    /// Builds one realization; `seed` is ignored for deterministic families.
    pub fn build(&self, seed: u64) -> Result<Network> {
        match *self {
            TopologySpec::Lattice { side, neighbourhood } => build_lattice(side, neighbourhood),
            TopologySpec::RegularRandom { n, k } => build_regular_random(n, k, seed),
            TopologySpec::ErdosRenyi { n, mean_degree } => build_erdos_renyi(n, mean_degree, seed),
            TopologySpec::BarabasiAlbert { n, m } => build_barabasi_albert(n, m, seed),
            TopologySpec::Complete { n } => build_complete(n),
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(
            self,
            TopologySpec::RegularRandom { .. } | TopologySpec::ErdosRenyi { .. } | TopologySpec::BarabasiAlbert { .. }
        )
    }
}

/// A validated experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub topology: TopologySpec,
    pub game: GameKind,
    pub r_values: Vec<f64>,
    /// May contain infinities (deterministic selection limits).
    pub w_values: Vec<f64>,
    pub noise: f64,
    pub update: UpdateScheme,
    pub normalize_by_degree: bool,
    pub coevolution: bool,
    pub mutation_rate: f64,
    pub burn_in: u64,
    pub measure: u64,
    pub replicates: usize,
    pub master_seed: u64,
    pub out_dir: PathBuf,
}

impl SweepSpec {
    /// Spec with every optional key at its default.
    pub fn new(topology: TopologySpec, r_values: Vec<f64>, w_values: Vec<f64>) -> Self {
        SweepSpec {
            topology,
            game: GameKind::PrisonersDilemma,
            r_values,
            w_values,
            noise: 0.1,
            update: UpdateScheme::Synchronous,
            normalize_by_degree: false,
            coevolution: false,
            mutation_rate: 0.0,
            burn_in: 5000,
            measure: 2000,
            replicates: 1,
            master_seed: 0,
            out_dir: PathBuf::from("out"),
        }
    }

    pub fn dynamics(&self, w: f64) -> DynamicsConfig {
        DynamicsConfig {
            w,
            noise: self.noise,
            update: self.update,
            normalization: if self.normalize_by_degree {
                PayoffNormalization::Degree
            } else {
                PayoffNormalization::None
            },
            coevolution: self.coevolution,
            mutation_rate: self.mutation_rate,
            ..Default::default()
        }
    }

    pub fn matrix(&self, r: f64) -> Result<PayoffMatrix> {
        GameParams { kind: self.game, r }.matrix()
    }

    /// Checks every value-level invariant; `key` names the first offender.
    pub fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.r_values.is_empty() {
            return Err(("r_values", "list must not be empty".into()));
        }
        if let Some(r) = self.r_values.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(("r_values", format!("{r} is outside (0, 1)")));
        }
        if self.w_values.is_empty() {
            return Err(("w_values", "list must not be empty".into()));
        }
        if self.w_values.iter().any(|w| w.is_nan()) {
            return Err(("w_values", "NaN is not a bias".into()));
        }
        if !(self.noise > 0.0 && self.noise.is_finite()) {
            return Err(("K", format!("must be positive and finite, got {}", self.noise)));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(("q", format!("must lie in [0, 1], got {}", self.mutation_rate)));
        }
        if self.mutation_rate > 0.0 && !self.coevolution {
            return Err(("q", "mutation needs coevolution = true".into()));
        }
        if self.measure == 0 {
            return Err(("measure", "must be at least 1".into()));
        }
        if self.replicates == 0 {
            return Err(("replicates", "must be at least 1".into()));
        }
        match self.topology {
            TopologySpec::Lattice { side, .. } if side < 3 => Err(("side", format!("must be at least 3, got {side}"))),
            TopologySpec::RegularRandom { n, k } if k == 0 || k >= n || (n * k) % 2 == 1 => {
                Err(("k", format!("need 0 < k < n and n*k even (n={n}, k={k})")))
            }
            TopologySpec::ErdosRenyi { n, mean_degree } if !(mean_degree >= 1.0 && mean_degree <= n as f64 - 1.0) => {
                Err(("mean_degree", format!("must lie in [1, n-1], got {mean_degree}")))
            }
            TopologySpec::BarabasiAlbert { n, m } if m == 0 || n <= m => {
                Err(("m", format!("need n > m >= 1 (n={n}, m={m})")))
            }
            TopologySpec::Complete { n } if n < 2 => Err(("n", format!("must be at least 2, got {n}"))),
            _ => Ok(()),
        }
    }

    /// Applies a `--key value` command-line override.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<()> {
        let fail = |message: String| Error::Override {
            key: key.to_string(),
            message,
        };
        let int = |v: &str| {
            v.trim()
                .parse::<u64>()
                .map_err(|_| fail(format!("`{v}` is not a non-negative integer")))
        };
        let float = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| fail(format!("`{v}` is not a number")))
        };
        let boolean = |v: &str| {
            v.trim()
                .parse::<bool>()
                .map_err(|_| fail(format!("`{v}` is not true/false")))
        };
        match key {
            "kind" | "side" | "neighbourhood" | "n" | "k" | "mean_degree" | "m" => {
                let mut t = TopologyFields::from_spec(&self.topology);
                match key {
                    "kind" => t.kind = value.trim().to_string(),
                    "side" => t.side = int(value)? as usize,
                    "neighbourhood" => t.neighbourhood = value.trim().to_string(),
                    "n" => t.n = int(value)? as usize,
                    "k" => t.k = int(value)? as usize,
                    "mean_degree" => t.mean_degree = float(value)?,
                    _ => t.m = int(value)? as usize,
                }
                self.topology = t.resolve().map_err(|(_, m)| fail(m))?;
            }
            "game" => self.game = parse_game(value.trim()).map_err(fail)?,
            "r_values" => {
                self.r_values = value.split(',').map(float).collect::<Result<_>>()?;
            }
            "w_values" => {
                self.w_values = value
                    .split(',')
                    .map(|v| parse_w_token(v.trim()).map_err(fail))
                    .collect::<Result<_>>()?;
            }
            "K" => self.noise = float(value)?,
            "update" => self.update = parse_update(value.trim()).map_err(fail)?,
            "normalize_by_degree" => self.normalize_by_degree = boolean(value)?,
            "coevolution" => self.coevolution = boolean(value)?,
            "q" => self.mutation_rate = float(value)?,
            "burn_in" => self.burn_in = int(value)?,
            "measure" => self.measure = int(value)?,
            "replicates" => self.replicates = int(value)? as usize,
            "master_seed" => self.master_seed = int(value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => return Err(fail("unknown key".into())),
        }
        self.check().map_err(|(k, m)| Error::Override {
            key: k.to_string(),
            message: m,
        })
    }
}

/// Flat topology fields with defaults, shared by file parsing and overrides.
struct TopologyFields {
    kind: String,
    side: usize,
    neighbourhood: String,
    n: usize,
    k: usize,
    mean_degree: f64,
    m: usize,
}

impl Default for TopologyFields {
    fn default() -> Self {
        TopologyFields {
            kind: String::new(),
            side: 100,
            neighbourhood: "von_neumann".into(),
            n: 10_000,
            k: 4,
            mean_degree: 4.0,
            m: 2,
        }
    }
}

impl TopologyFields {
    fn from_spec(spec: &TopologySpec) -> Self {
        let d = TopologyFields::default();
        match *spec {
            TopologySpec::Lattice { side, neighbourhood } => TopologyFields {
                kind: "lattice".into(),
                side,
                neighbourhood: match neighbourhood {
                    Neighbourhood::VonNeumann4 => "von_neumann".into(),
                    Neighbourhood::Moore8 => "moore".into(),
                },
                ..d
            },
            TopologySpec::RegularRandom { n, k } => TopologyFields {
                kind: "rrg".into(),
                n,
                k,
                ..d
            },
            TopologySpec::ErdosRenyi { n, mean_degree } => TopologyFields {
                kind: "er".into(),
                n,
                mean_degree,
                ..d
            },
            TopologySpec::BarabasiAlbert { n, m } => TopologyFields {
                kind: "ba".into(),
                n,
                m,
                ..d
            },
            TopologySpec::Complete { n } => TopologyFields {
                kind: "complete".into(),
                n,
                ..d
            },
        }
    }

    fn resolve(&self) -> std::result::Result<TopologySpec, (&'static str, String)> {
        let neighbourhood = match self.neighbourhood.as_str() {
            "von_neumann" | "vonneumann" | "von_neumann4" | "4" => Neighbourhood::VonNeumann4,
            "moore" | "moore8" | "8" => Neighbourhood::Moore8,
            other => return Err(("neighbourhood", format!("unknown neighbourhood `{other}`"))),
        };
        Ok(match self.kind.as_str() {
            "lattice" => TopologySpec::Lattice {
                side: self.side,
                neighbourhood,
            },
            "rrg" | "regular_random" => TopologySpec::RegularRandom { n: self.n, k: self.k },
            "er" | "erdos_renyi" => TopologySpec::ErdosRenyi {
                n: self.n,
                mean_degree: self.mean_degree,
            },
            "ba" | "barabasi_albert" | "scale_free" => TopologySpec::BarabasiAlbert { n: self.n, m: self.m },
            "complete" => TopologySpec::Complete { n: self.n },
            other => {
                return Err((
                    "kind",
                    format!("unknown topology `{other}` (expected lattice, rrg, er, ba or complete)"),
                ))
            }
        })
    }
}

fn parse_game(s: &str) -> std::result::Result<GameKind, String> {
    match s {
        "pd" | "prisoners_dilemma" => Ok(GameKind::PrisonersDilemma),
        "sd" | "snowdrift" => Ok(GameKind::Snowdrift),
        other => Err(format!("unknown game `{other}` (expected pd or snowdrift)")),
    }
}

fn parse_update(s: &str) -> std::result::Result<UpdateScheme, String> {
    match s {
        "sync" | "synchronous" => Ok(UpdateScheme::Synchronous),
        "async" | "asynchronous" => Ok(UpdateScheme::AsynchronousRandomOrder),
        other => Err(format!("unknown update scheme `{other}` (expected sync or async)")),
    }
}

/// Bias token: a number, or `inf` / `+inf` / `-inf`.
fn parse_w_token(s: &str) -> std::result::Result<f64, String> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        other => match other.parse::<f64>() {
            Ok(v) if !v.is_nan() => Ok(v),
            _ => Err(format!("`{s}` is not a bias value")),
        },
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WToken {
    Number(f64),
    Text(String),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    kind: Option<Spanned<String>>,
    side: Option<Spanned<u64>>,
    neighbourhood: Option<Spanned<String>>,
    n: Option<Spanned<u64>>,
    k: Option<Spanned<u64>>,
    mean_degree: Option<Spanned<f64>>,
    m: Option<Spanned<u64>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGame {
    game: Option<Spanned<String>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDynamics {
    #[serde(rename = "K")]
    noise: Option<Spanned<f64>>,
    update: Option<Spanned<String>>,
    normalize_by_degree: Option<Spanned<bool>>,
    coevolution: Option<Spanned<bool>>,
    q: Option<Spanned<f64>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    r_values: Option<Spanned<Vec<Spanned<f64>>>>,
    w_values: Option<Spanned<Vec<Spanned<WToken>>>>,
    burn_in: Option<Spanned<u64>>,
    measure: Option<Spanned<u64>>,
    replicates: Option<Spanned<u64>>,
    master_seed: Option<Spanned<u64>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    out_dir: Option<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    topology: Option<Spanned<RawTopology>>,
    #[serde(default)]
    game: RawGame,
    #[serde(default)]
    dynamics: RawDynamics,
    sweep: Option<Spanned<RawSweep>>,
    #[serde(default)]
    output: RawOutput,
}

/// Maps byte offsets to 1-based line numbers.
struct Lines<'a>(&'a str);

impl Lines<'_> {
    fn at(&self, offset: usize) -> usize {
        self.0[..offset.min(self.0.len())]
            .bytes()
            .filter(|&b| b == b'\n')
            .count()
            + 1
    }

    fn of<T>(&self, s: &Spanned<T>) -> usize {
        self.at(s.span().start)
    }

    fn section(&self, name: &str) -> usize {
        let header = format!("[{name}]");
        self.0
            .lines()
            .position(|l| l.trim() == header)
            .map(|i| i + 1)
            .unwrap_or(1)
    }
}

fn line_of(key_lines: &[(&str, usize)], key: &str, fallback: usize) -> usize {
    key_lines
        .iter()
        .find(|(k, _)| *k == key)
        .map(|&(_, l)| l)
        .unwrap_or(fallback)
}

fn config_error(key: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        line,
        message: message.into(),
    }
}

/// Parses and validates a config file, filling defaults.
///
/// Sections are `[topology]`, `[game]`, `[dynamics]`, `[sweep]` and
/// `[output]`. `topology.kind`, `sweep.r_values` and `sweep.w_values` are
/// required.
pub fn parse_config(text: &str) -> Result<SweepSpec> {
    let lines = Lines(text);
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| lines.at(s.start)).unwrap_or(0);
        let msg = e.message().to_string();
        let key = msg
            .split('`')
            .nth(1)
            .map(str::to_string)
            .unwrap_or_else(|| "<syntax>".to_string());
        config_error(&key, line, msg)
    })?;

    let topo_span = raw
        .topology
        .ok_or_else(|| config_error("kind", lines.section("topology"), "missing [topology] section"))?;
    let topo_line = lines.of(&topo_span);
    let topo = topo_span.into_inner();
    let mut fields = TopologyFields::default();
    let mut key_lines: Vec<(&'static str, usize)> = Vec::new();
    match topo.kind {
        Some(k) => {
            key_lines.push(("kind", lines.of(&k)));
            fields.kind = k.into_inner();
        }
        None => return Err(config_error("kind", topo_line, "missing required key")),
    }
    macro_rules! take {
        ($src:expr, $name:literal, $dst:expr, $conv:expr) => {
            if let Some(v) = $src {
                key_lines.push(($name, lines.of(&v)));
                $dst = $conv(v.into_inner());
            }
        };
    }
    take!(topo.side, "side", fields.side, |v: u64| v as usize);
    take!(topo.neighbourhood, "neighbourhood", fields.neighbourhood, |v| v);
    take!(topo.n, "n", fields.n, |v: u64| v as usize);
    take!(topo.k, "k", fields.k, |v: u64| v as usize);
    take!(topo.mean_degree, "mean_degree", fields.mean_degree, |v| v);
    take!(topo.m, "m", fields.m, |v: u64| v as usize);
    let topology = fields
        .resolve()
        .map_err(|(key, msg)| config_error(key, line_of(&key_lines, key, topo_line), msg))?;

    let sweep_span = raw
        .sweep
        .ok_or_else(|| config_error("r_values", lines.section("sweep"), "missing [sweep] section"))?;
    let sweep_line = lines.of(&sweep_span);
    let sweep = sweep_span.into_inner();

    let r_raw = sweep
        .r_values
        .ok_or_else(|| config_error("r_values", sweep_line, "missing required key"))?;
    key_lines.push(("r_values", lines.of(&r_raw)));
    let mut r_values = Vec::new();
    for r in r_raw.into_inner() {
        let line = lines.of(&r);
        let v = r.into_inner();
        if !(v > 0.0 && v < 1.0) {
            return Err(config_error("r_values", line, format!("{v} is outside (0, 1)")));
        }
        r_values.push(v);
    }

    let w_raw = sweep
        .w_values
        .ok_or_else(|| config_error("w_values", sweep_line, "missing required key"))?;
    key_lines.push(("w_values", lines.of(&w_raw)));
    let mut w_values = Vec::new();
    for w in w_raw.into_inner() {
        let line = lines.of(&w);
        let v = match w.into_inner() {
            WToken::Number(v) if !v.is_nan() => v,
            WToken::Number(_) => return Err(config_error("w_values", line, "NaN is not a bias")),
            WToken::Text(s) => parse_w_token(&s).map_err(|m| config_error("w_values", line, m))?,
        };
        w_values.push(v);
    }

    let mut spec = SweepSpec::new(topology, r_values, w_values);

    if let Some(g) = raw.game.game {
        let line = lines.of(&g);
        key_lines.push(("game", line));
        spec.game = parse_game(g.get_ref()).map_err(|m| config_error("game", line, m))?;
    }
    let d = raw.dynamics;
    take!(d.noise, "K", spec.noise, |v| v);
    if let Some(u) = d.update {
        let line = lines.of(&u);
        key_lines.push(("update", line));
        spec.update = parse_update(u.get_ref()).map_err(|m| config_error("update", line, m))?;
    }
    take!(
        d.normalize_by_degree,
        "normalize_by_degree",
        spec.normalize_by_degree,
        |v| v
    );
    take!(d.coevolution, "coevolution", spec.coevolution, |v| v);
    take!(d.q, "q", spec.mutation_rate, |v| v);
    take!(sweep.burn_in, "burn_in", spec.burn_in, |v| v);
    take!(sweep.measure, "measure", spec.measure, |v| v);
    take!(sweep.replicates, "replicates", spec.replicates, |v: u64| v as usize);
    take!(sweep.master_seed, "master_seed", spec.master_seed, |v| v);
    take!(raw.output.out_dir, "out_dir", spec.out_dir, PathBuf::from);

    spec.check()
        .map_err(|(key, msg)| config_error(key, line_of(&key_lines, key, 0), msg))?;
    Ok(spec)
}
