//! Reproducible experiment pipeline: a serializable config plus the
//! artifact-emitting drivers behind the `graphfp` binary's subcommands.
//!
//! Every table artifact is a fixed-schema CSV that is re-read and validated
//! before a run reports success; reports and manifests are JSON. All
//! randomness flows from the seed in the config, so rerunning the same config
//! reproduces every CSV byte for byte. Manifests carry wall-clock timings and
//! are the one artifact allowed to differ between identical runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::clustering::{adjusted_rand_index, energy_profile_rows, kmeans};
use crate::continuum::{
    fp_solve_1d, fp_steady_state_compare, maxwellian_exact, maxwellian_kde, smooth_onto_grid,
    witten_matrix_1d, witten_product_check, DensityField, Grid1D, SplitAxis, WittenProductReport,
};
use crate::datasets::{density, mesa, three_blobs, MesaParams, SyntheticDensity};
use crate::dynamics::{density_view, embed_all, evolve, EvolveMethod};
use crate::graph::{build_proximity_graph, PointCloud};
use crate::io::{float_cell, int_cell, validate_csv, write_csv, write_json, ColumnKind, Schema};
use crate::linalg::sym_eig;
use crate::rates::{beta_from_alpha, build_generator, BuiltGenerator, ConstantPreset, GeneratorSelect};
use crate::{Error, Result, VERSION};

/// Time used for the long-horizon steady-state section of a PDE comparison.
pub const STEADY_T: f64 = 500.0;

/// Proximity bandwidth: an explicit value, or `"auto"` for the
/// max-nearest-neighbor rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSpec {
    Value(f64),
    Token(String),
}

impl EpsilonSpec {
    /// `Some(value)` for an explicit bandwidth, `None` for `"auto"`.
    pub fn resolve(&self) -> Result<Option<f64>> {
        match self {
            EpsilonSpec::Value(v) => {
                if !(v.is_finite() && *v > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "epsilon must be a positive number, got {v}"
                    )));
                }
                Ok(Some(*v))
            }
            EpsilonSpec::Token(s) if s == "auto" => Ok(None),
            EpsilonSpec::Token(s) => Err(Error::InvalidInput(format!(
                "epsilon must be a number or \"auto\", got {s:?}"
            ))),
        }
    }

    /// Parse a flag/env token: a number becomes `Value`, anything else a
    /// `Token` (validated by [`EpsilonSpec::resolve`]).
    pub fn from_token(s: &str) -> Self {
        match s.trim().parse::<f64>() {
            Ok(v) => EpsilonSpec::Value(v),
            Err(_) => EpsilonSpec::Token(s.trim().to_string()),
        }
    }
}

/// KDE bandwidth: an explicit value, or `"default"` for the 1-D
/// `sqrt(2) (|domain| / n)^(1/2)` rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaSpec {
    Value(f64),
    Token(String),
}

impl DeltaSpec {
    /// `Some(value)` for an explicit bandwidth, `None` for `"default"`.
    pub fn resolve(&self) -> Result<Option<f64>> {
        match self {
            DeltaSpec::Value(v) => {
                if !(v.is_finite() && *v > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "delta must be a positive number, got {v}"
                    )));
                }
                Ok(Some(*v))
            }
            DeltaSpec::Token(s) if s == "default" => Ok(None),
            DeltaSpec::Token(s) => Err(Error::InvalidInput(format!(
                "delta must be a number or \"default\", got {s:?}"
            ))),
        }
    }

    /// Parse a flag/env token: a number becomes `Value`, anything else a
    /// `Token` (validated by [`DeltaSpec::resolve`]).
    pub fn from_token(s: &str) -> Self {
        match s.trim().parse::<f64>() {
            Ok(v) => DeltaSpec::Value(v),
            Err(_) => DeltaSpec::Token(s.trim().to_string()),
        }
    }
}

/// One experiment: dataset, graph and generator parameters, evaluation
/// times, cluster counts, and artifact switches. Every field has a default,
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Named synthetic density to sample from.
    pub density: String,
    /// Sample size.
    pub n: usize,
    /// Seed for sampling and k-means.
    pub seed: u64,
    /// Proximity bandwidth (`"auto"` or a number).
    pub epsilon: EpsilonSpec,
    /// KDE bandwidth (`"default"` or a number).
    pub delta: DeltaSpec,
    /// Optional weight-support cutoff in units of epsilon.
    pub cutoff: Option<f64>,
    /// Generator family: `q_beta`, `q_rw_alpha`, `q_knf`, `q_quickshift`,
    /// `q_rw_limit`.
    pub generator: String,
    /// Exponent for `q_rw_alpha`.
    pub alpha: Option<f64>,
    /// Interpolation weight for `q_beta` (also used by `witten`).
    pub beta: Option<f64>,
    /// Hill-climb radius for `q_knf`, in units of epsilon.
    pub knf_radius: Option<f64>,
    /// Rate-constant preset token: `section5`, `section4`, `unit`, or a
    /// number.
    pub preset: String,
    /// Evaluation times.
    pub t: Vec<f64>,
    /// Cluster counts.
    pub k: Vec<usize>,
    /// k-means restarts.
    pub restarts: usize,
    /// Output directory.
    pub out: String,
    /// Cells per axis for the finite-difference reference grid.
    pub grid_m: usize,
    /// Worker threads for sweeps.
    pub workers: usize,
    pub emit_trajectories: bool,
    pub emit_embeddings: bool,
    pub emit_clusters: bool,
    pub emit_energies: bool,
    /// Append a PDE comparison to the run (needs a 1-D density and a
    /// `q_beta` / `q_rw_alpha` generator).
    pub emit_pde_compare: bool,
    /// Append a Witten spectral report to the run (needs `beta`).
    pub emit_witten: bool,
    /// Center overrides for the `three_blobs` density.
    pub blob_centers: Option<Vec<(f64, f64)>>,
    /// Plateau-profile overrides for the `mesa` density; both or neither.
    pub mesa_breakpoints: Option<Vec<f64>>,
    pub mesa_heights: Option<Vec<f64>>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            density: "two_bump".into(),
            n: 204,
            seed: 0,
            epsilon: EpsilonSpec::Token("auto".into()),
            delta: DeltaSpec::Token("default".into()),
            cutoff: None,
            generator: "q_beta".into(),
            alpha: None,
            beta: Some(0.5),
            knf_radius: None,
            preset: "section5".into(),
            t: vec![10.0],
            k: vec![2],
            restarts: 10,
            out: "out".into(),
            grid_m: 200,
            workers: 1,
            emit_trajectories: true,
            emit_embeddings: true,
            emit_clusters: true,
            emit_energies: true,
            emit_pde_compare: false,
            emit_witten: false,
            blob_centers: None,
            mesa_breakpoints: None,
            mesa_heights: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Reject list shapes that would make artifacts ambiguous.
    fn validate_lists(&self) -> Result<()> {
        if self.t.is_empty() {
            return Err(Error::InvalidInput("config: empty time list".into()));
        }
        if self.t.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput(
                "config: times must be finite and nonnegative".into(),
            ));
        }
        if self.k.is_empty() {
            return Err(Error::InvalidInput("config: empty cluster-count list".into()));
        }
        if self.k.iter().any(|&k| k == 0) {
            return Err(Error::InvalidInput("config: cluster counts must be >= 1".into()));
        }
        let mut ks = self.k.clone();
        ks.sort_unstable();
        ks.dedup();
        if ks.len() != self.k.len() {
            return Err(Error::InvalidInput("config: duplicate cluster count".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidInput("config: restarts must be >= 1".into()));
        }
        Ok(())
    }
}

fn env_parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{key}: cannot parse {value:?}")))
}

fn env_parse_opt(key: &str, value: &str) -> Result<Option<f64>> {
    if value.trim() == "none" {
        return Ok(None);
    }
    env_parse(key, value).map(Some)
}

fn env_parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => Err(Error::Parse(format!(
            "{key}: expected true/false/1/0, got {other:?}"
        ))),
    }
}

fn env_parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(|s| env_parse(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Parse(format!("{key}: empty list")));
    }
    Ok(items)
}

/// Apply `GRAPHFP_*` environment overrides to `cfg`. Returns the
/// `KEY=value` pairs applied, in iteration order. Unknown `GRAPHFP_`
/// variables are errors; unrelated variables are ignored.
pub fn apply_env_overrides(
    cfg: &mut ExperimentConfig,
    vars: impl Iterator<Item = (String, String)>,
) -> Result<Vec<String>> {
    let mut applied = Vec::new();
    for (key, value) in vars {
        let Some(suffix) = key.strip_prefix("GRAPHFP_") else {
            continue;
        };
        match suffix {
            "DENSITY" => cfg.density = value.trim().to_string(),
            "N" => cfg.n = env_parse(&key, &value)?,
            "SEED" => cfg.seed = env_parse(&key, &value)?,
            "EPSILON" => {
                let spec = EpsilonSpec::from_token(&value);
                spec.resolve()?;
                cfg.epsilon = spec;
            }
            "DELTA" => {
                let spec = DeltaSpec::from_token(&value);
                spec.resolve()?;
                cfg.delta = spec;
            }
            "CUTOFF" => cfg.cutoff = env_parse_opt(&key, &value)?,
            "GENERATOR" => cfg.generator = value.trim().to_string(),
            "ALPHA" => cfg.alpha = env_parse_opt(&key, &value)?,
            "BETA" => cfg.beta = env_parse_opt(&key, &value)?,
            "KNF_RADIUS" => cfg.knf_radius = env_parse_opt(&key, &value)?,
            "PRESET" => cfg.preset = value.trim().to_string(),
            "T" => cfg.t = env_parse_list(&key, &value)?,
            "K" => cfg.k = env_parse_list(&key, &value)?,
            "RESTARTS" => cfg.restarts = env_parse(&key, &value)?,
            "OUT" => cfg.out = value.trim().to_string(),
            "GRID_M" => cfg.grid_m = env_parse(&key, &value)?,
            "WORKERS" => cfg.workers = env_parse(&key, &value)?,
            "EMIT_TRAJECTORIES" => cfg.emit_trajectories = env_parse_bool(&key, &value)?,
            "EMIT_EMBEDDINGS" => cfg.emit_embeddings = env_parse_bool(&key, &value)?,
            "EMIT_CLUSTERS" => cfg.emit_clusters = env_parse_bool(&key, &value)?,
            "EMIT_ENERGIES" => cfg.emit_energies = env_parse_bool(&key, &value)?,
            "EMIT_PDE_COMPARE" => cfg.emit_pde_compare = env_parse_bool(&key, &value)?,
            "EMIT_WITTEN" => cfg.emit_witten = env_parse_bool(&key, &value)?,
            "BLOB_CENTERS" => {
                if value.trim() == "none" {
                    cfg.blob_centers = None;
                } else {
                    let flat: Vec<f64> = env_parse_list(&key, &value)?;
                    if flat.len() % 2 != 0 {
                        return Err(Error::Parse(format!(
                            "{key}: expected x,y pairs, got {} values",
                            flat.len()
                        )));
                    }
                    cfg.blob_centers =
                        Some(flat.chunks(2).map(|c| (c[0], c[1])).collect());
                }
            }
            "MESA_BREAKPOINTS" => {
                cfg.mesa_breakpoints = if value.trim() == "none" {
                    None
                } else {
                    Some(env_parse_list(&key, &value)?)
                }
            }
            "MESA_HEIGHTS" => {
                cfg.mesa_heights = if value.trim() == "none" {
                    None
                } else {
                    Some(env_parse_list(&key, &value)?)
                }
            }
            other => {
                return Err(Error::Parse(format!(
                    "unknown override GRAPHFP_{other} (value {value:?})"
                )))
            }
        }
        applied.push(format!("{key}={value}"));
    }
    Ok(applied)
}

/// Bandwidths and initial condition the pipeline settled on. Fields stay
/// `None` when the run stopped before the stage that resolves them.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedParams {
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    /// Node index carrying the initial point mass; `None` means the run
    /// started from the uniform distribution (or stopped before evolving).
    pub dirac_node: Option<usize>,
    /// Coordinates of that node.
    pub dirac_point: Option<Vec<f64>>,
}

/// One (t, k) evaluation of a run.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub t: f64,
    pub k: usize,
    pub energy: f64,
    pub energy_norm: f64,
    pub ari: f64,
}

/// What a run left on disk, echoed into `manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub resolved: ResolvedParams,
    pub summary: Vec<SummaryRow>,
    /// File names relative to the output directory.
    pub artifacts: Vec<String>,
    /// Stage timings; the one section that varies between identical runs.
    pub wall_ms: BTreeMap<String, u128>,
}

struct ArtifactSink {
    dir: PathBuf,
    artifacts: Vec<String>,
}

impl ArtifactSink {
    fn new(dir: &str) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(ArtifactSink {
            dir: PathBuf::from(dir),
            artifacts: Vec::new(),
        })
    }

    /// Write a CSV, then re-read and validate it against the schema.
    fn csv(&mut self, name: &str, schema: &Schema, rows: &[Vec<String>]) -> Result<()> {
        let path = self.dir.join(name);
        write_csv(&path, schema, rows)?;
        let read_back = validate_csv(&path, schema)?;
        if read_back != rows.len() {
            return Err(Error::Parse(format!(
                "{name}: wrote {} rows but read back {read_back}",
                rows.len()
            )));
        }
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        write_json(&self.dir.join(name), value)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }
}

/// The configured density, honoring the per-family parameter overrides.
fn resolve_density(cfg: &ExperimentConfig) -> Result<SyntheticDensity> {
    let has_blob = cfg.blob_centers.is_some();
    let has_mesa = cfg.mesa_breakpoints.is_some() || cfg.mesa_heights.is_some();
    match cfg.density.as_str() {
        "three_blobs" if has_blob => {
            if has_mesa {
                return Err(Error::InvalidInput(
                    "mesa parameters were given for the three_blobs density".into(),
                ));
            }
            let c = cfg.blob_centers.as_ref().expect("guarded");
            if c.len() != 3 {
                return Err(Error::InvalidInput(format!(
                    "three_blobs takes exactly 3 centers, got {}",
                    c.len()
                )));
            }
            three_blobs([c[0], c[1], c[2]])
        }
        "mesa" if has_mesa => {
            if has_blob {
                return Err(Error::InvalidInput(
                    "blob centers were given for the mesa density".into(),
                ));
            }
            let (Some(breakpoints), Some(heights)) =
                (cfg.mesa_breakpoints.clone(), cfg.mesa_heights.clone())
            else {
                return Err(Error::InvalidInput(
                    "mesa overrides need both breakpoints and heights".into(),
                ));
            };
            mesa(MesaParams {
                breakpoints,
                heights,
            })
        }
        name => {
            if has_blob || has_mesa {
                return Err(Error::InvalidInput(format!(
                    "density parameters were given but {name:?} takes none \
                     (blob_centers fits three_blobs, mesa_* fits mesa)"
                )));
            }
            density(name)
        }
    }
}

struct Assembled {
    density: SyntheticDensity,
    cloud: PointCloud,
    built: BuiltGenerator,
    epsilon: f64,
    select: GeneratorSelect,
}

fn assemble(cfg: &ExperimentConfig) -> Result<Assembled> {
    let den = resolve_density(cfg)?;
    let cloud = den.sample(cfg.n, cfg.seed)?;
    let eps_opt = cfg.epsilon.resolve()?;
    let delta_opt = cfg.delta.resolve()?;
    let graph = build_proximity_graph(&cloud, eps_opt, cfg.cutoff)?;
    let epsilon = graph
        .epsilon
        .expect("proximity graphs carry their bandwidth");
    let select = GeneratorSelect::from_config(&cfg.generator, cfg.alpha, cfg.beta, cfg.knf_radius)?;
    let preset = ConstantPreset::parse(&cfg.preset)?;
    let built = build_generator(
        &cloud,
        &graph,
        select,
        preset,
        delta_opt,
        Some(den.domain.side_length(0)),
    )?;
    Ok(Assembled {
        density: den,
        cloud,
        built,
        epsilon,
        select,
    })
}

fn nearest_node(points: &Array2<f64>, target: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, row) in points.rows().into_iter().enumerate() {
        let d: f64 = row
            .iter()
            .zip(target.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Point mass at the node nearest the density's canonical start, or the
/// uniform distribution when the density has none.
fn initial_distribution(den: &SyntheticDensity, cloud: &PointCloud) -> (Array1<f64>, Option<usize>) {
    let n = cloud.len();
    match den.default_dirac_init() {
        Some(target) => {
            let node = nearest_node(&cloud.points, &target);
            let mut u0 = Array1::zeros(n);
            u0[node] = 1.0;
            (u0, Some(node))
        }
        None => (Array1::from_elem(n, 1.0 / n as f64), None),
    }
}

fn point_cells(points: &Array2<f64>, i: usize) -> Result<Vec<String>> {
    points.row(i).iter().map(|&v| float_cell(v)).collect()
}

fn ms(start: Instant) -> u128 {
    start.elapsed().as_millis()
}

/// How far along the pipeline a run goes. Stage-wise subcommands stop
/// early; a full run is `Cluster`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Sample,
    Graph,
    Evolve,
    Embed,
    Cluster,
}

/// Run one experiment end to end and emit its artifacts: samples, graph
/// degrees, per-time trajectories / embeddings / energy profiles / cluster
/// labelings, a summary table, and a manifest (written last, so its presence
/// marks a completed run). The `emit_pde_compare` / `emit_witten` switches
/// append those reports to the same directory.
pub fn run(cfg: &ExperimentConfig) -> Result<RunManifest> {
    run_stage(cfg, Stage::Cluster)
}

/// [`run`], stopping after `stage`. Artifacts of earlier stages are always
/// emitted; the terminal stage's artifact is emitted even when its emit
/// flag is off, so a stage-wise invocation always produces its namesake.
pub fn run_stage(cfg: &ExperimentConfig, stage: Stage) -> Result<RunManifest> {
    cfg.validate_lists()?;
    let total = Instant::now();
    let mut wall = BTreeMap::new();
    let mut sink = ArtifactSink::new(&cfg.out)?;
    let mut resolved = ResolvedParams {
        epsilon: None,
        delta: None,
        dirac_node: None,
        dirac_point: None,
    };
    let mut summary: Vec<SummaryRow> = Vec::new();

    let clock = Instant::now();
    let den = resolve_density(cfg)?;
    let cloud = den.sample(cfg.n, cfg.seed)?;
    wall.insert("sample".to_string(), ms(clock));
    let n = cloud.len();
    let dim = cloud.dim();
    let truth = cloud.labels.clone().unwrap_or_else(|| vec![0; n]);

    let samples_schema = Schema::points(dim, vec![("label", ColumnKind::Integer)]);
    let samples_rows: Vec<Vec<String>> = (0..n)
        .map(|i| {
            let mut row = point_cells(&cloud.points, i)?;
            row.push(int_cell(truth[i]));
            Ok(row)
        })
        .collect::<Result<_>>()?;
    sink.csv("samples.csv", &samples_schema, &samples_rows)?;

    if stage >= Stage::Graph {
        let clock = Instant::now();
        let graph = build_proximity_graph(&cloud, cfg.epsilon.resolve()?, cfg.cutoff)?;
        wall.insert("graph".to_string(), ms(clock));
        resolved.epsilon = graph.epsilon;

        let graph_schema = Schema::points(dim, vec![("degree", ColumnKind::Float)]);
        let graph_rows: Vec<Vec<String>> = (0..n)
            .map(|i| {
                let mut row = point_cells(&cloud.points, i)?;
                row.push(float_cell(graph.degrees[i])?);
                Ok(row)
            })
            .collect::<Result<_>>()?;
        sink.csv("graph.csv", &graph_schema, &graph_rows)?;

        if stage >= Stage::Evolve {
            let clock = Instant::now();
            let select =
                GeneratorSelect::from_config(&cfg.generator, cfg.alpha, cfg.beta, cfg.knf_radius)?;
            let preset = ConstantPreset::parse(&cfg.preset)?;
            let built = build_generator(
                &cloud,
                &graph,
                select,
                preset,
                cfg.delta.resolve()?,
                Some(den.domain.side_length(0)),
            )?;
            wall.insert("generator".to_string(), ms(clock));
            resolved.delta = built.delta;

            let (u0, dirac_node) = initial_distribution(&den, &cloud);
            resolved.dirac_node = dirac_node;
            resolved.dirac_point = dirac_node.map(|i| cloud.points.row(i).to_vec());

            for (ti, &t) in cfg.t.iter().enumerate() {
                if cfg.emit_trajectories || stage == Stage::Evolve {
                    let clock = Instant::now();
                    let u_t = evolve(&built.rate, &u0, t, EvolveMethod::MatrixExp)?;
                    let view = density_view(&u_t, &graph.degrees)?;
                    let schema = Schema::points(
                        dim,
                        vec![("u", ColumnKind::Float), ("view", ColumnKind::Float)],
                    );
                    let rows: Vec<Vec<String>> = (0..n)
                        .map(|i| {
                            let mut row = point_cells(&cloud.points, i)?;
                            row.push(float_cell(u_t[i])?);
                            row.push(float_cell(view[i])?);
                            Ok(row)
                        })
                        .collect::<Result<_>>()?;
                    sink.csv(&format!("trajectory_t{ti}.csv"), &schema, &rows)?;
                    *wall.entry("trajectories".to_string()).or_insert(0) += ms(clock);
                }

                if stage >= Stage::Embed {
                    let clock = Instant::now();
                    let emb = embed_all(&built.rate, t)?;
                    *wall.entry("embed".to_string()).or_insert(0) += ms(clock);

                    if cfg.emit_embeddings || stage == Stage::Embed {
                        let mut columns: Vec<(String, ColumnKind)> = (0..dim)
                            .map(|a| (format!("x{a}"), ColumnKind::Float))
                            .collect();
                        columns.extend(
                            (0..emb.width()).map(|j| (format!("e{j}"), ColumnKind::Float)),
                        );
                        let schema = Schema { columns };
                        let rows: Vec<Vec<String>> = (0..n)
                            .map(|i| {
                                let mut row = point_cells(&cloud.points, i)?;
                                for &v in emb.vectors.row(i) {
                                    row.push(float_cell(v)?);
                                }
                                Ok(row)
                            })
                            .collect::<Result<_>>()?;
                        sink.csv(&format!("embedding_t{ti}.csv"), &schema, &rows)?;
                    }

                    if stage >= Stage::Cluster {
                        if cfg.emit_energies {
                            let clock = Instant::now();
                            let k_max = *cfg.k.iter().max().expect("validated nonempty");
                            let profile =
                                energy_profile_rows(&emb.vectors, k_max, cfg.restarts, cfg.seed)?;
                            let schema = Schema::new(vec![
                                ("k", ColumnKind::Integer),
                                ("energy", ColumnKind::Float),
                                ("normalized", ColumnKind::Float),
                            ]);
                            let rows: Vec<Vec<String>> = profile
                                .iter()
                                .map(|p| {
                                    Ok(vec![
                                        int_cell(p.k),
                                        float_cell(p.energy)?,
                                        float_cell(p.normalized)?,
                                    ])
                                })
                                .collect::<Result<_>>()?;
                            sink.csv(&format!("energies_t{ti}.csv"), &schema, &rows)?;
                            *wall.entry("energies".to_string()).or_insert(0) += ms(clock);
                        }

                        for &k in &cfg.k {
                            let clock = Instant::now();
                            let cl = kmeans(&emb.vectors, k, cfg.restarts, cfg.seed)?;
                            *wall.entry("cluster".to_string()).or_insert(0) += ms(clock);
                            let ari = adjusted_rand_index(&cl.labels, &truth)?;
                            if cfg.emit_clusters {
                                let schema = Schema::points(
                                    dim,
                                    vec![
                                        ("label", ColumnKind::Integer),
                                        ("truth", ColumnKind::Integer),
                                    ],
                                );
                                let rows: Vec<Vec<String>> = (0..n)
                                    .map(|i| {
                                        let mut row = point_cells(&cloud.points, i)?;
                                        row.push(int_cell(cl.labels[i]));
                                        row.push(int_cell(truth[i]));
                                        Ok(row)
                                    })
                                    .collect::<Result<_>>()?;
                                sink.csv(&format!("clusters_t{ti}_k{k}.csv"), &schema, &rows)?;
                            }
                            summary.push(SummaryRow {
                                t,
                                k,
                                energy: cl.energy,
                                energy_norm: cl.normalized_energy,
                                ari,
                            });
                        }
                    }
                }
            }
        }
    }

    if !summary.is_empty() {
        let summary_schema = Schema::new(vec![
            ("t", ColumnKind::Float),
            ("k", ColumnKind::Integer),
            ("energy", ColumnKind::Float),
            ("energy_norm", ColumnKind::Float),
            ("ari", ColumnKind::Float),
        ]);
        let summary_rows: Vec<Vec<String>> = summary
            .iter()
            .map(|r| {
                Ok(vec![
                    float_cell(r.t)?,
                    int_cell(r.k),
                    float_cell(r.energy)?,
                    float_cell(r.energy_norm)?,
                    float_cell(r.ari)?,
                ])
            })
            .collect::<Result<_>>()?;
        sink.csv("run_summary.csv", &summary_schema, &summary_rows)?;
    }

    if stage == Stage::Cluster && cfg.emit_pde_compare {
        let clock = Instant::now();
        let report = pde_compare(cfg)?;
        sink.artifacts.extend(report.artifacts.iter().cloned());
        wall.insert("pde_compare".to_string(), ms(clock));
    }
    if stage == Stage::Cluster && cfg.emit_witten {
        let clock = Instant::now();
        witten_report(cfg)?;
        sink.artifacts.push("witten_report.json".to_string());
        wall.insert("witten".to_string(), ms(clock));
    }

    wall.insert("total".to_string(), ms(total));
    let mut artifacts = sink.artifacts.clone();
    artifacts.push("manifest.json".to_string());
    let manifest = RunManifest {
        version: VERSION.to_string(),
        config: cfg.clone(),
        resolved,
        summary,
        artifacts,
        wall_ms: wall,
    };
    sink.json("manifest.json", &manifest)?;
    Ok(manifest)
}

/// Outcome of one sweep cell.
#[derive(Debug, Serialize)]
pub struct SweepCell {
    pub value: String,
    pub out: String,
    pub ok: bool,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SweepManifest {
    pub version: String,
    pub param: String,
    pub values: Vec<String>,
    pub cells: Vec<SweepCell>,
    pub artifacts: Vec<String>,
}

fn cell_config(base: &ExperimentConfig, param: &str, value: &str) -> Result<ExperimentConfig> {
    let mut cfg = base.clone();
    match param {
        "beta" => cfg.beta = Some(env_parse("beta", value)?),
        "alpha" => cfg.alpha = Some(env_parse("alpha", value)?),
        "epsilon" => {
            let spec = EpsilonSpec::from_token(value);
            spec.resolve()?;
            cfg.epsilon = spec;
        }
        "delta" => {
            let spec = DeltaSpec::from_token(value);
            spec.resolve()?;
            cfg.delta = spec;
        }
        "t" => cfg.t = vec![env_parse("t", value)?],
        "k" => cfg.k = vec![env_parse("k", value)?],
        "seed" => cfg.seed = env_parse("seed", value)?,
        other => {
            return Err(Error::InvalidInput(format!(
                "sweep parameter must be one of beta, alpha, epsilon, delta, t, k, seed; got {other:?}"
            )))
        }
    }
    cfg.out = Path::new(&base.out)
        .join(format!("sweep_{param}_{value}"))
        .to_string_lossy()
        .into_owned();
    Ok(cfg)
}

fn run_cells(configs: &[ExperimentConfig], workers: usize) -> Vec<Result<RunManifest>> {
    let w = workers.max(1).min(configs.len().max(1));
    if w <= 1 {
        return configs.iter().map(run).collect();
    }
    let slots: Mutex<Vec<Option<Result<RunManifest>>>> =
        Mutex::new((0..configs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for start in 0..w {
            let slots = &slots;
            scope.spawn(move || {
                let mut i = start;
                while i < configs.len() {
                    let result = run(&configs[i]);
                    slots.lock().expect("sweep worker panicked")[i] = Some(result);
                    i += w;
                }
            });
        }
    });
    slots
        .into_inner()
        .expect("sweep worker panicked")
        .into_iter()
        .map(|slot| slot.expect("every cell index was visited"))
        .collect()
}

/// Run one full experiment per value of `param`, each in its own
/// subdirectory of `base.out`. A failing cell is recorded in the sweep
/// manifest and does not stop the others. The cross-cell summary joins the
/// per-cell summary rows under the swept value.
pub fn sweep(base: &ExperimentConfig, param: &str, values: &[String]) -> Result<SweepManifest> {
    if values.is_empty() {
        return Err(Error::InvalidInput("sweep: no values".into()));
    }
    let configs: Vec<ExperimentConfig> = values
        .iter()
        .map(|v| cell_config(base, param, v))
        .collect::<Result<_>>()?;
    let results = run_cells(&configs, base.workers);

    let mut sink = ArtifactSink::new(&base.out)?;
    let schema = Schema::new(vec![
        ("value", ColumnKind::Text),
        ("t", ColumnKind::Float),
        ("k", ColumnKind::Integer),
        ("energy", ColumnKind::Float),
        ("energy_norm", ColumnKind::Float),
        ("ari", ColumnKind::Float),
    ]);
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut cells = Vec::new();
    for ((value, cfg), result) in values.iter().zip(&configs).zip(&results) {
        match result {
            Ok(manifest) => {
                for r in &manifest.summary {
                    rows.push(vec![
                        value.clone(),
                        float_cell(r.t)?,
                        int_cell(r.k),
                        float_cell(r.energy)?,
                        float_cell(r.energy_norm)?,
                        float_cell(r.ari)?,
                    ]);
                }
                cells.push(SweepCell {
                    value: value.clone(),
                    out: cfg.out.clone(),
                    ok: true,
                    error: None,
                });
            }
            Err(e) => cells.push(SweepCell {
                value: value.clone(),
                out: cfg.out.clone(),
                ok: false,
                error: Some(e.to_string()),
            }),
        }
    }
    sink.csv("summary.csv", &schema, &rows)?;
    let mut artifacts = sink.artifacts.clone();
    artifacts.push("sweep_manifest.json".to_string());
    let manifest = SweepManifest {
        version: VERSION.to_string(),
        param: param.to_string(),
        values: values.to_vec(),
        cells,
        artifacts,
    };
    sink.json("sweep_manifest.json", &manifest)?;
    Ok(manifest)
}

/// One time slice of a graph-vs-PDE comparison.
#[derive(Debug, Clone, Serialize)]
pub struct PdeSnapshot {
    pub t: f64,
    /// `L1` distance between the mollified graph distribution and the
    /// finite-difference solution.
    pub l1: f64,
}

/// Long-horizon section of a PDE comparison: the mollified graph
/// distribution against the exact and the KDE-based steady-state
/// predictions.
#[derive(Debug, Clone, Serialize)]
pub struct SteadySection {
    pub t: f64,
    pub l1_exact: f64,
    pub l1_kde: f64,
    pub kde_beats_exact: bool,
}

#[derive(Debug, Serialize)]
pub struct PdeCompareReport {
    pub version: String,
    pub density: String,
    pub n: usize,
    pub seed: u64,
    /// Drift weight of the continuum operator matched to the generator.
    pub beta: f64,
    pub epsilon: f64,
    /// Mollifier bandwidth: the generator's KDE bandwidth when it used one,
    /// otherwise the graph bandwidth.
    pub gamma: f64,
    pub grid_m: usize,
    /// Coordinate of the initial point mass; `None` means uniform start.
    pub init_point: Option<f64>,
    pub snapshots: Vec<PdeSnapshot>,
    /// Absent when `beta = 1` (the steady-state family degenerates there).
    pub steady: Option<SteadySection>,
    pub artifacts: Vec<String>,
}

/// Evolve the same initial condition through the graph chain and through
/// the 1-D finite-difference equation, overlay both on the reference grid at
/// each requested time, and compare the long-time graph distribution against
/// the exact and KDE-based steady states. Requires a 1-D density and a
/// `q_beta` or `q_rw_alpha` generator.
pub fn pde_compare(cfg: &ExperimentConfig) -> Result<PdeCompareReport> {
    cfg.validate_lists()?;
    let asm = assemble(cfg)?;
    if asm.density.dim() != 1 {
        return Err(Error::Unsupported(format!(
            "pde comparison needs a 1-D density, {} is {}-D",
            asm.density.name,
            asm.density.dim()
        )));
    }
    let beta = match asm.select {
        GeneratorSelect::Beta(b) => b,
        GeneratorSelect::RwAlpha(a) => beta_from_alpha(a)?,
        other => {
            return Err(Error::Unsupported(format!(
                "pde comparison covers q_beta and q_rw_alpha, not {}",
                other.token()
            )))
        }
    };
    let (lo, hi) = asm.density.domain.intervals[0];
    let grid = Grid1D::new(lo, hi, cfg.grid_m)?;
    let rho = DensityField::from_fn(grid.clone(), |x| asm.density.eval(&[x]))?;
    let gamma = asm.built.delta.unwrap_or(asm.epsilon);
    let (u0, dirac_node) = initial_distribution(&asm.density, &asm.cloud);
    let (f0, init_point) = match dirac_node {
        Some(node) => {
            let x0 = asm.cloud.points[[node, 0]];
            (DensityField::dirac(grid.clone(), x0)?, Some(x0))
        }
        None => (
            DensityField::from_fn(grid.clone(), |_| 1.0 / (hi - lo))?,
            None,
        ),
    };
    let positions = asm.cloud.points.column(0).to_owned();
    let mut sink = ArtifactSink::new(&cfg.out)?;
    let overlay_schema = Schema::new(vec![
        ("x", ColumnKind::Float),
        ("f_pde", ColumnKind::Float),
        ("f_graph", ColumnKind::Float),
    ]);

    let mut snapshots = Vec::new();
    for (ti, &t) in cfg.t.iter().enumerate() {
        let u_t = evolve(&asm.built.rate, &u0, t, EvolveMethod::MatrixExp)?;
        let f_t = fp_solve_1d(&rho, beta, &f0, t)?;
        let l1 = fp_steady_state_compare(&positions, &u_t, &f_t, gamma)?;
        let smoothed = smooth_onto_grid(&positions, &u_t, &grid, gamma)?;
        let rows: Vec<Vec<String>> = (0..grid.m)
            .map(|j| {
                Ok(vec![
                    float_cell(grid.centers[j])?,
                    float_cell(f_t.values[j])?,
                    float_cell(smoothed.values[j])?,
                ])
            })
            .collect::<Result<_>>()?;
        sink.csv(&format!("pde_overlay_t{ti}.csv"), &overlay_schema, &rows)?;
        snapshots.push(PdeSnapshot { t, l1 });
    }

    let steady = if beta < 1.0 {
        let u_inf = evolve(&asm.built.rate, &u0, STEADY_T, EvolveMethod::MatrixExp)?;
        let exact = maxwellian_exact(&rho, beta)?;
        let kde_based = maxwellian_kde(&asm.cloud, gamma, beta, &grid)?;
        let l1_exact = fp_steady_state_compare(&positions, &u_inf, &exact, gamma)?;
        let l1_kde = fp_steady_state_compare(&positions, &u_inf, &kde_based, gamma)?;
        let smoothed = smooth_onto_grid(&positions, &u_inf, &grid, gamma)?;
        let schema = Schema::new(vec![
            ("x", ColumnKind::Float),
            ("maxwellian", ColumnKind::Float),
            ("maxwellian_kde", ColumnKind::Float),
            ("f_graph", ColumnKind::Float),
        ]);
        let rows: Vec<Vec<String>> = (0..grid.m)
            .map(|j| {
                Ok(vec![
                    float_cell(grid.centers[j])?,
                    float_cell(exact.values[j])?,
                    float_cell(kde_based.values[j])?,
                    float_cell(smoothed.values[j])?,
                ])
            })
            .collect::<Result<_>>()?;
        sink.csv("pde_steady_overlay.csv", &schema, &rows)?;
        Some(SteadySection {
            t: STEADY_T,
            l1_exact,
            l1_kde,
            kde_beats_exact: l1_kde < l1_exact,
        })
    } else {
        None
    };

    let mut artifacts = sink.artifacts.clone();
    artifacts.push("pde_report.json".to_string());
    let report = PdeCompareReport {
        version: VERSION.to_string(),
        density: asm.density.name.clone(),
        n: cfg.n,
        seed: cfg.seed,
        beta,
        epsilon: asm.epsilon,
        gamma,
        grid_m: cfg.grid_m,
        init_point,
        snapshots,
        steady,
        artifacts,
    };
    sink.json("pde_report.json", &report)?;
    Ok(report)
}

/// Low end of one factor's symmetrized spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct AxisSpectrum {
    pub name: String,
    pub m: usize,
    /// Smallest eigenvalues, ascending (at most ten).
    pub lambda: Vec<f64>,
    /// Second eigenvalue: the relaxation rate of the slowest genuine mode.
    pub gap: f64,
}

/// Product-structure section for a separable 2-D density.
#[derive(Debug, Clone, Serialize)]
pub struct ProductSection {
    /// Grid used for the dense product verification.
    pub verify_m: usize,
    pub check: WittenProductReport,
    /// Factor gaps at full resolution.
    pub gap_x: f64,
    pub gap_y: f64,
    /// Axis whose factor has the smaller gap at full resolution: the
    /// direction the slowest mode separates along.
    pub preferred: SplitAxis,
}

#[derive(Debug, Serialize)]
pub struct WittenReport {
    pub version: String,
    pub density: String,
    pub beta: f64,
    pub grid_m: usize,
    pub spectra: Vec<AxisSpectrum>,
    /// Present for separable 2-D densities.
    pub product: Option<ProductSection>,
}

fn axis_field(den: &SyntheticDensity, m: usize) -> Result<DensityField> {
    let (lo, hi) = den.domain.intervals[0];
    let grid = Grid1D::new(lo, hi, m)?;
    DensityField::from_fn(grid, |x| den.eval(&[x]))
}

fn axis_spectrum(name: &str, rho: &DensityField, beta: f64) -> Result<AxisSpectrum> {
    let s = witten_matrix_1d(rho, beta)?;
    let (lambda, _) = sym_eig(&s);
    let take = lambda.len().min(10);
    Ok(AxisSpectrum {
        name: name.to_string(),
        m: rho.grid.m,
        lambda: lambda.iter().take(take).copied().collect(),
        gap: lambda[1],
    })
}

/// Grid size for the dense product verification; the full Kronecker sum is
/// `(m_x m_y)^2` entries, so the check runs on a coarsened grid.
const PRODUCT_VERIFY_M: usize = 24;

/// Spectral report for the symmetrized continuum generator: the low
/// spectrum of each 1-D factor at the configured resolution and, for a
/// separable 2-D density, the product-structure check (the 2-D spectrum is
/// the sum-set of the factor spectra) with the preferred split axis.
pub fn witten_report(cfg: &ExperimentConfig) -> Result<WittenReport> {
    let beta = cfg.beta.ok_or_else(|| {
        Error::InvalidInput("witten report requires a beta value".into())
    })?;
    let den = density(&cfg.density)?;
    let (spectra, product) = if den.dim() == 1 {
        let rho = axis_field(&den, cfg.grid_m)?;
        (vec![axis_spectrum(&den.name, &rho, beta)?], None)
    } else {
        let (fx, fy) = den.marginal_factors()?;
        let sx = axis_spectrum(&fx.name, &axis_field(&fx, cfg.grid_m)?, beta)?;
        let sy = axis_spectrum(&fy.name, &axis_field(&fy, cfg.grid_m)?, beta)?;
        let vm = cfg.grid_m.min(PRODUCT_VERIFY_M);
        let check = witten_product_check(&axis_field(&fx, vm)?, &axis_field(&fy, vm)?, beta)?;
        let preferred = if sx.gap <= sy.gap {
            SplitAxis::X
        } else {
            SplitAxis::Y
        };
        let section = ProductSection {
            verify_m: vm,
            check,
            gap_x: sx.gap,
            gap_y: sy.gap,
            preferred,
        };
        (vec![sx, sy], Some(section))
    };
    let report = WittenReport {
        version: VERSION.to_string(),
        density: den.name.clone(),
        beta,
        grid_m: cfg.grid_m,
        spectra,
        product,
    };
    let mut sink = ArtifactSink::new(&cfg.out)?;
    sink.json("witten_report.json", &report)?;
    Ok(report)
}
