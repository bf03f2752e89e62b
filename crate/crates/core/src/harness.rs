//! Experiment configuration, sweeps over `(R, |t−s|, side)` and Lieb-Robinson cells, and
//! report emission as CSV, JSON and SVG.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundInputs, BoundKind, BoundReport};
use crate::decay::{self, ConstantOverrides, DecayConstants, DecayProfile, XiFamily};
use crate::dynamics::{self, BulkCocycles, CutSetup, IntegratorSettings, Side, TrajectoryKind};
use crate::error::{Error, Result};
use crate::geometry::{self, Lattice, Region};
use crate::interactions::{self, Coefficient, InteractionFamily, VelocityData};
use crate::linalg::{self, c, CMat, MAX_DENSE_DIM};

pub const REPORT_JSON: &str = "report.json";
pub const FACTORIZATION_CSV: &str = "factorization.csv";
pub const FACTORIZATION_SVG: &str = "factorization.svg";
pub const LR_CSV: &str = "lieb_robinson.csv";
pub const LR_SVG: &str = "lieb_robinson.svg";

pub const FACTORIZATION_HEADER: [&str; 20] = [
    "r",
    "dt",
    "side",
    "status",
    "error",
    "theorem_rhs",
    "bound",
    "theorem_ok",
    "claim1_lhs",
    "claim1_rhs",
    "claim2_lhs_max",
    "claim2_rhs",
    "snorm_lhs",
    "snorm_tight",
    "snorm_g_form",
    "unitarity_drift",
    "forms_gap",
    "steps",
    "satisfied",
    "message",
];

pub const LR_HEADER: [&str; 8] = ["b_site", "separation", "dt", "status", "lhs", "rhs", "satisfied", "message"];

/// Values below this are drawn at the floor of the log-scale plots.
const PLOT_FLOOR: f64 = 1e-16;

// ---------------------------------------------------------------------------------------------
// config file grammar

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    Path,
    Cycle,
    Grid,
    Edges,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub width: Option<usize>,
    #[serde(default)]
    pub height: Option<usize>,
    #[serde(default)]
    pub edges: Option<Vec<[usize; 2]>>,
    /// Spatial dimension `d`; 1 for chains and rings, 2 for grids, required for edge lists.
    #[serde(default)]
    pub dimension: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Tfim,
    Heisenberg,
    LongRange,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomTerm {
    pub sites: Vec<usize>,
    /// Row-major real part.
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub coefficient: Option<Coefficient>,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn two_usize() -> usize {
    2
}

fn default_time_grid() -> usize {
    interactions::DEFAULT_TIME_GRID
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionSpec {
    pub model: Model,
    #[serde(default = "one")]
    pub h: f64,
    #[serde(default = "one")]
    pub j: f64,
    #[serde(default = "one")]
    pub jx: f64,
    #[serde(default = "one")]
    pub jy: f64,
    #[serde(default = "one")]
    pub jz: f64,
    #[serde(default = "two")]
    pub alpha: f64,
    #[serde(default)]
    pub coefficient: Coefficient,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default = "default_time_grid")]
    pub time_grid: usize,
    /// Drop every term that crosses the cut of `X`.
    #[serde(default)]
    pub decouple_cut: bool,
    #[serde(default = "two_usize")]
    pub site_dim: usize,
    #[serde(default)]
    pub terms: Vec<CustomTerm>,
}

fn default_r_max() -> u32 {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    #[serde(default = "two")]
    pub power: f64,
    #[serde(default = "default_xi")]
    pub xi: XiFamily,
    /// Range over which `ξ` is checked for monotonicity, superadditivity and fast decay.
    #[serde(default = "default_r_max")]
    pub r_max: u32,
    #[serde(default)]
    pub infinite_distance_value: f64,
    #[serde(default)]
    pub overrides: ConstantOverrides,
}

fn default_xi() -> XiFamily {
    XiFamily::Exponential { a: 1.0 }
}

impl Default for DecaySpec {
    fn default() -> Self {
        Self {
            power: 2.0,
            xi: default_xi(),
            r_max: default_r_max(),
            infinite_distance_value: 0.0,
            overrides: ConstantOverrides::default(),
        }
    }
}

/// Either explicit `sites` or `left = k` for the vertices `0..k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    #[serde(default)]
    pub sites: Option<Vec<usize>>,
    #[serde(default)]
    pub left: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideSpec {
    Right,
    Left,
    Both,
}

impl SideSpec {
    pub fn sides(self) -> Vec<Side> {
        match self {
            SideSpec::Right => vec![Side::Right],
            SideSpec::Left => vec![Side::Left],
            SideSpec::Both => vec![Side::Right, Side::Left],
        }
    }
}

fn default_rs() -> Vec<u32> {
    vec![2, 4]
}

fn default_dts() -> Vec<f64> {
    vec![0.2, 0.5]
}

fn default_slack() -> f64 {
    bounds::DEFAULT_SLACK
}

fn default_side() -> SideSpec {
    SideSpec::Both
}

fn default_op() -> String {
    "z".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_rs")]
    pub r: Vec<u32>,
    /// Values of `|t − s|`; each cell runs from `s` to `s + dt`.
    #[serde(default = "default_dts")]
    pub dt: Vec<f64>,
    #[serde(default)]
    pub s: f64,
    #[serde(default = "default_side")]
    pub side: SideSpec,
    #[serde(default = "default_slack")]
    pub slack: f64,
    /// Single-site observable placed on every site of `∂_{⌊R/2⌋}X` for the propagation check.
    #[serde(default = "default_op")]
    pub probe_op: String,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            r: default_rs(),
            dt: default_dts(),
            s: 0.0,
            side: default_side(),
            slack: default_slack(),
            probe_op: default_op(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LrSpec {
    pub a_site: usize,
    #[serde(default = "default_op")]
    pub a_op: String,
    pub b_sites: Vec<usize>,
    #[serde(default = "default_op")]
    pub b_op: String,
    #[serde(default = "default_dts")]
    pub dt: Vec<f64>,
    #[serde(default)]
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(Error::config("format", format!("unknown format `{other}` (expected csv, json or svg)"))),
        }
    }
}

fn default_dir() -> String {
    "out".into()
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Svg]
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    /// Seeds the randomized property suites only; the physics pipeline is deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one_usize")]
    pub workers: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_dir(), formats: default_formats(), seed: 0, workers: 1 }
    }
}

/// The raw config tree, echoed verbatim into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    pub lattice: LatticeSpec,
    pub interaction: InteractionSpec,
    #[serde(default)]
    pub decay: DecaySpec,
    pub region: RegionSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub lr: Option<LrSpec>,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Geometry echoed alongside the constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub vertex_count: usize,
    pub region: Region,
    /// `|∂X|`
    pub boundary_size: usize,
    pub shells: Vec<usize>,
    /// `|∂_R X|` for `R = 1..=max sweep R`.
    pub annulus_sizes: Vec<usize>,
    /// Fat-boundary constant measured over the same range.
    pub fat_boundary: f64,
}

/// A fully validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub spec: ConfigSpec,
    pub setup: CutSetup,
    pub profile: DecayProfile,
    pub dimension: u32,
    pub constants: DecayConstants,
    pub velocity: VelocityData,
    pub geometry: GeometrySummary,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), format!("cannot read config: {e}")))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let spec: ConfigSpec = toml::from_str(text).map_err(|e| Error::config("<config>", e.message().to_string()))?;
    ExperimentConfig::from_spec(spec)
}

fn keyed(key: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Config { .. } => e,
        other => Error::config(key, other.to_string()),
    }
}

fn build_lattice(spec: &LatticeSpec) -> Result<(Lattice, u32)> {
    let need = |v: Option<usize>, key: &str| v.ok_or_else(|| Error::config(key, "required for this lattice kind"));
    let (lattice, default_dim) = match spec.kind {
        LatticeKind::Path => (Lattice::path(need(spec.n, "lattice.n")?).map_err(keyed("lattice.n"))?, Some(1)),
        LatticeKind::Cycle => (Lattice::cycle(need(spec.n, "lattice.n")?).map_err(keyed("lattice.n"))?, Some(1)),
        LatticeKind::Grid => {
            let w = need(spec.width, "lattice.width")?;
            let h = need(spec.height, "lattice.height")?;
            (Lattice::grid(w, h).map_err(keyed("lattice"))?, Some(2))
        }
        LatticeKind::Edges => {
            let n = need(spec.n, "lattice.n")?;
            let edges: Vec<(usize, usize)> = spec
                .edges
                .as_ref()
                .ok_or_else(|| Error::config("lattice.edges", "required for an edge-list lattice"))?
                .iter()
                .map(|e| (e[0], e[1]))
                .collect();
            (Lattice::from_edges(n, &edges).map_err(keyed("lattice.edges"))?, None)
        }
    };
    let dimension = spec
        .dimension
        .or(default_dim)
        .ok_or_else(|| Error::config("lattice.dimension", "required for an edge-list lattice"))?;
    if dimension < 1 {
        return Err(Error::config("lattice.dimension", "must be at least 1"));
    }
    Ok((lattice, dimension))
}

fn matrix_from_rows(re: &[Vec<f64>], im: Option<&Vec<Vec<f64>>>, key: &str) -> Result<CMat> {
    let n = re.len();
    if re.iter().any(|row| row.len() != n) {
        return Err(Error::config(key, "matrix must be square"));
    }
    if let Some(im) = im {
        if im.len() != n || im.iter().any(|row| row.len() != n) {
            return Err(Error::config(key, "imaginary part must match the real part's shape"));
        }
    }
    Ok(CMat::from_fn(n, n, |i, j| c(re[i][j], im.map_or(0.0, |m| m[i][j]))))
}

fn build_family(spec: &InteractionSpec, lattice: &Lattice) -> Result<InteractionFamily> {
    if spec.model != Model::Custom && spec.site_dim != 2 {
        return Err(Error::config("interaction.site_dim", "named models act on qubits (site_dim = 2)"));
    }
    if spec.model != Model::Custom && !spec.terms.is_empty() {
        return Err(Error::config("interaction.terms", "explicit terms are only read for model = \"custom\""));
    }
    let horizon = spec.horizon;
    let coef = spec.coefficient;
    let family = match spec.model {
        Model::Tfim => InteractionFamily::tfim(lattice, spec.h, spec.j, coef, horizon),
        Model::Heisenberg => InteractionFamily::heisenberg(lattice, spec.jx, spec.jy, spec.jz, coef, horizon),
        Model::LongRange => InteractionFamily::long_range(lattice, spec.j, spec.alpha, spec.h, coef, horizon),
        Model::Custom => {
            let mut fam = InteractionFamily::new(vec![spec.site_dim; lattice.vertex_count()], horizon)
                .map_err(keyed("interaction"))?;
            for (i, term) in spec.terms.iter().enumerate() {
                let key = format!("interaction.terms[{i}]");
                let m = matrix_from_rows(&term.re, term.im.as_ref(), &key)?;
                let support = Region::new(lattice, term.sites.iter().copied()).map_err(keyed(&key))?;
                if support.len() != term.sites.len() {
                    return Err(Error::config(key, "repeated site in support"));
                }
                fam.push(support, m, term.coefficient.unwrap_or(coef)).map_err(keyed(&key))?;
            }
            Ok(fam)
        }
    }
    .map_err(keyed("interaction"))?;
    Ok(family.with_time_grid(spec.time_grid))
}

fn build_region(spec: &RegionSpec, lattice: &Lattice) -> Result<Region> {
    match (&spec.sites, spec.left) {
        (Some(sites), None) => Region::new(lattice, sites.iter().copied()).map_err(keyed("region.sites")),
        (None, Some(k)) => Region::new(lattice, 0..k).map_err(keyed("region.left")),
        _ => Err(Error::config("region", "give exactly one of `sites` or `left`")),
    }
}

fn check_times(key: &str, horizon: f64, s: f64, dts: &[f64]) -> Result<()> {
    if dts.is_empty() {
        return Err(Error::config(key, "grid must be nonempty"));
    }
    for &dt in dts {
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::config(key, format!("|t - s| = {dt} must be finite and non-negative")));
        }
        if dt > 2.0 * horizon {
            return Err(Error::config(key, format!("|t - s| = {dt} exceeds 2T = {}", 2.0 * horizon)));
        }
        for t in [s, s + dt] {
            if !(t.abs() <= horizon) {
                return Err(Error::config(key, format!("time {t} outside the horizon [-{horizon}, {horizon}]")));
            }
        }
    }
    Ok(())
}

fn single_site_op(name: &str, key: &str) -> Result<CMat> {
    linalg::named_qubit_operator(name).ok_or_else(|| Error::config(key, format!("unknown operator `{name}`")))
}

impl ExperimentConfig {
    pub fn from_spec(spec: ConfigSpec) -> Result<Self> {
        let (lattice, dimension) = build_lattice(&spec.lattice)?;
        let n = lattice.vertex_count();
        let dim = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(spec.interaction.site_dim));
        match dim {
            Some(d) if d <= MAX_DENSE_DIM => {}
            _ => {
                let shown = dim.unwrap_or(usize::MAX);
                return Err(Error::config(
                    "lattice.n",
                    Error::DimensionCap { dim: shown, cap: MAX_DENSE_DIM }.to_string(),
                ));
            }
        }

        let mut family = build_family(&spec.interaction, &lattice)?;
        let x = build_region(&spec.region, &lattice)?;
        let volume = lattice.all();
        if x.is_empty() || x.len() == n {
            return Err(Error::config("region", Error::BoundaryUndefined.to_string()));
        }
        let shells = geometry::shell_profile(&lattice, &x).map_err(keyed("region"))?;
        if !shells.monotone {
            return Err(Error::config("region", Error::ShellsNotMonotone(shells.sizes).to_string()));
        }
        if spec.interaction.decouple_cut {
            family = family.decoupled(&x, &volume);
        }

        let sweep = &spec.sweep;
        if sweep.r.is_empty() {
            return Err(Error::config("sweep.r", "grid must be nonempty"));
        }
        if sweep.r.contains(&0) {
            return Err(Error::config("sweep.r", "R values must be at least 1"));
        }
        check_times("sweep.dt", family.horizon(), sweep.s, &sweep.dt)?;
        if !(sweep.slack >= 0.0) {
            return Err(Error::config("sweep.slack", "must be non-negative"));
        }
        single_site_op(&sweep.probe_op, "sweep.probe_op")?;
        let r_max = *sweep.r.iter().max().expect("nonempty");
        interactions::check_collar_fits(&lattice, &x, r_max, &volume).map_err(keyed("sweep.r"))?;

        let d = &spec.decay;
        let profile = DecayProfile { power: d.power, xi: d.xi, infinite_distance_value: d.infinite_distance_value };
        decay::validate_profile(&profile, d.r_max).map_err(|e| Error::config("decay", format!("profile violates {e}")))?;

        if let Some(lr) = &spec.lr {
            if lr.a_site >= n {
                return Err(Error::config("lr.a_site", format!("vertex {} out of range", lr.a_site)));
            }
            if lr.b_sites.is_empty() {
                return Err(Error::config("lr.b_sites", "must be nonempty"));
            }
            if let Some(&b) = lr.b_sites.iter().find(|&&b| b >= n) {
                return Err(Error::config("lr.b_sites", format!("vertex {b} out of range")));
            }
            if spec.interaction.site_dim != 2 {
                return Err(Error::config("lr", "named observables act on qubits (site_dim = 2)"));
            }
            single_site_op(&lr.a_op, "lr.a_op")?;
            single_site_op(&lr.b_op, "lr.b_op")?;
            check_times("lr.dt", family.horizon(), lr.s, &lr.dt)?;
        }
        spec.integrator.validate().map_err(keyed("integrator"))?;
        if spec.output.workers == 0 {
            return Err(Error::config("output.workers", "must be at least 1"));
        }

        let boundary_size = geometry::inner_boundary(&lattice, &x).len();
        let annulus_sizes: Vec<usize> = (1..=r_max).map(|r| geometry::annulus(&lattice, &x, r).len()).collect();
        let g = geometry::fat_boundary_from_sizes(&annulus_sizes, boundary_size, dimension);
        let constants = decay::lattice_constants(&profile, &lattice, g, dimension).with_overrides(&d.overrides);
        let velocity = interactions::interaction_norm(&family, &profile, &lattice, &constants);
        if !velocity.psi_norm.is_finite() {
            return Err(Error::config(
                "decay",
                "interaction norm is infinite: a term couples sites at a distance where F_ξ vanishes",
            ));
        }
        let geometry = GeometrySummary {
            vertex_count: n,
            region: x.clone(),
            boundary_size,
            shells: shells.sizes,
            annulus_sizes,
            fat_boundary: g,
        };
        let setup = CutSetup { lattice, family, x, volume };
        Ok(Self { spec, setup, profile, dimension, constants, velocity, geometry })
    }

    pub fn bound_inputs(&self, r: u32, dt: f64) -> BoundInputs {
        BoundInputs::new(self.geometry.boundary_size, &self.constants, &self.velocity, &self.profile, r, dt)
    }

    fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.spec.output.workers)
            .build()
            .map_err(|e| Error::config("output.workers", e.to_string()))
    }
}

// ---------------------------------------------------------------------------------------------
// reports

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Factorization,
    LiebRobinson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationCell {
    pub r: u32,
    pub dt: f64,
    pub side: Side,
    pub status: CellStatus,
    pub message: Option<String>,
    pub error: Option<f64>,
    pub unitarity_form: Option<f64>,
    pub unitarity_drift: Option<f64>,
    pub steps: usize,
    /// The theorem's right-hand side before capping at 2.
    pub theorem_rhs: f64,
    /// Sites of `∂_{⌊R/2⌋}X` probed for the propagation gap, aligned with the claim-2 reports.
    pub claim2_sites: Vec<usize>,
    /// Theorem, claim 1, surface norm, then one claim-2 report per probed site.
    pub bounds: Vec<BoundReport>,
    pub satisfied: bool,
}

impl FactorizationCell {
    pub fn bound(&self, kind: BoundKind) -> Option<&BoundReport> {
        self.bounds.iter().find(|b| b.name == kind)
    }

    fn claim2_max(&self) -> Option<(f64, f64)> {
        let mut it = self.bounds.iter().filter(|b| b.name == BoundKind::Claim2).peekable();
        it.peek()?;
        Some(it.fold((0.0f64, f64::INFINITY), |(l, r), b| (l.max(b.lhs_measured), r.min(b.rhs_value))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrCell {
    pub b_site: usize,
    pub separation: u32,
    pub dt: f64,
    pub status: CellStatus,
    pub message: Option<String>,
    pub lhs: Option<f64>,
    pub rhs: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ReportKind,
    pub config: ConfigSpec,
    pub constants: DecayConstants,
    pub velocity: VelocityData,
    pub geometry: GeometrySummary,
    pub notes: Vec<String>,
    pub factorization: Vec<FactorizationCell>,
    pub lieb_robinson: Vec<LrCell>,
}

impl ExperimentReport {
    fn empty(cfg: &ExperimentConfig, kind: ReportKind) -> Self {
        let mut notes = vec![
            "norm_f, conv_f, conv_xi and norm_fxi are maxima over the finite lattice, not suprema over an infinite graph"
                .to_string(),
        ];
        let o = &cfg.spec.decay.overrides;
        for (name, v) in
            [("norm_f", o.norm_f), ("conv_f", o.conv_f), ("conv_xi", o.conv_xi), ("norm_fxi", o.norm_fxi), ("g", o.g)]
        {
            if let Some(v) = v {
                notes.push(format!("{name} overridden by user-supplied value {v}"));
            }
        }
        if cfg.spec.interaction.decouple_cut {
            notes.push("crossing terms removed from the family (decouple_cut)".into());
        }
        Self {
            kind,
            config: cfg.spec.clone(),
            constants: cfg.constants,
            velocity: cfg.velocity,
            geometry: cfg.geometry.clone(),
            notes,
            factorization: Vec::new(),
            lieb_robinson: Vec::new(),
        }
    }

    pub fn all_satisfied(&self) -> bool {
        self.factorization.iter().all(|c| c.satisfied) && self.lieb_robinson.iter().all(|c| c.satisfied)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

fn side_rank(side: Side) -> u8 {
    match side {
        Side::Right => 0,
        Side::Left => 1,
    }
}

/// Unique values of `dts` in ascending order.
fn distinct(dts: &[f64]) -> Vec<f64> {
    let mut v = dts.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

// ---------------------------------------------------------------------------------------------
// sweeps

/// Everything measured for one `(R, |t−s|)` pair that both sides share.
struct PairMeasurements {
    claim1: Result<f64>,
    snorm: Result<f64>,
    claim2: Result<Vec<(usize, f64)>>,
}

fn measure_pair(cfg: &ExperimentConfig, bulk: &BulkCocycles, r: u32) -> PairMeasurements {
    let setup = &cfg.setup;
    let (lo, hi) = if bulk.s <= bulk.t { (bulk.s, bulk.t) } else { (bulk.t, bulk.s) };
    let times = bounds::sup_grid(&setup.family, lo, hi);
    let claim1 = bounds::claim1_lhs(setup, r, &times);
    let snorm = bounds::snorm_lhs(setup, r, &times);
    let claim2 = (|| {
        // the probe observables are qubit operators
        if setup.family.site_dims().iter().any(|&d| d != 2) {
            return Ok(Vec::new());
        }
        let probe = single_site_op(&cfg.spec.sweep.probe_op, "sweep.probe_op")?;
        let annulus = geometry::annulus(&setup.lattice, &setup.x, r);
        let patch = setup.cocycle(&annulus, bulk.s, bulk.t, &cfg.spec.integrator, TrajectoryKind::Patch)?;
        let collar = geometry::annulus(&setup.lattice, &setup.x, r / 2);
        collar
            .iter()
            .map(|site| {
                let support = Region::from_vertices([site]);
                bounds::claim2_from_cocycles(setup, &probe, &support, r, &bulk.full, patch.last()).map(|v| (site, v))
            })
            .collect::<Result<Vec<_>>>()
    })();
    PairMeasurements { claim1, snorm, claim2 }
}

fn factorization_cell(
    cfg: &ExperimentConfig,
    bulk: &Result<BulkCocycles>,
    pair: Option<&PairMeasurements>,
    r: u32,
    dt: f64,
    side: Side,
) -> FactorizationCell {
    let slack = cfg.spec.sweep.slack;
    let inputs = cfg.bound_inputs(r, dt);
    let theorem_rhs = bounds::theorem_rhs(&inputs);
    let mut cell = FactorizationCell {
        r,
        dt,
        side,
        status: CellStatus::Ok,
        message: None,
        error: None,
        unitarity_form: None,
        unitarity_drift: None,
        steps: 0,
        theorem_rhs,
        claim2_sites: Vec::new(),
        bounds: Vec::new(),
        satisfied: false,
    };
    let fail = |mut cell: FactorizationCell, e: &Error| {
        cell.status = CellStatus::Failed;
        cell.message = Some(e.to_string());
        cell
    };
    let (bulk, pair) = match (bulk, pair) {
        (Ok(b), Some(p)) => (b, p),
        (Err(e), _) => return fail(cell, e),
        (Ok(_), None) => unreachable!("pair measurements exist whenever the bulk cocycles do"),
    };
    let measured = dynamics::integrate_surface_cocycle(&cfg.setup, r, bulk.s, bulk.t, side, &cfg.spec.integrator)
        .and_then(|surf| dynamics::combine_factorization(&cfg.setup, r, side, bulk, &surf));
    let m = match measured {
        Ok(m) => m,
        Err(e) => return fail(cell, &e),
    };
    cell.error = Some(m.error);
    cell.unitarity_form = Some(m.unitarity_form);
    cell.unitarity_drift = Some(m.unitarity_drift);
    cell.steps = m.steps;
    cell.bounds.push(BoundReport::new(BoundKind::Theorem, m.error, theorem_rhs.min(2.0), inputs, slack));

    let mut problems = Vec::new();
    match &pair.claim1 {
        Ok(v) => cell.bounds.push(BoundReport::new(BoundKind::Claim1, *v, bounds::claim1_rhs(&inputs), inputs, slack)),
        Err(e) => problems.push(format!("claim1: {e}")),
    }
    let half_annulus = geometry::annulus(&cfg.setup.lattice, &cfg.setup.x, r / 2).len();
    let (tight, _) = bounds::snorm_rhs(&inputs, half_annulus);
    match &pair.snorm {
        Ok(v) => cell.bounds.push(BoundReport::new(BoundKind::SurfaceNorm, *v, tight, inputs, slack)),
        Err(e) => problems.push(format!("surface norm: {e}")),
    }
    match &pair.claim2 {
        Ok(samples) => {
            let probe = single_site_op(&cfg.spec.sweep.probe_op, "sweep.probe_op").expect("validated at load");
            let a_norm = linalg::dense_spectral_norm(&probe);
            let rhs = bounds::claim2_rhs(&inputs, a_norm);
            for &(site, lhs) in samples {
                cell.claim2_sites.push(site);
                cell.bounds.push(BoundReport::new(BoundKind::Claim2, lhs, rhs, inputs, slack));
            }
        }
        Err(e) => problems.push(format!("claim2: {e}")),
    }
    if !problems.is_empty() {
        cell.status = CellStatus::Failed;
        cell.message = Some(problems.join("; "));
    }
    cell.satisfied = cell.status == CellStatus::Ok && cell.bounds.iter().all(|b| b.satisfied);
    cell
}

/// Runs every `(R, |t−s|, side)` cell. Cells that fail are recorded with their error and the
/// sweep carries on.
pub fn run_factorization_sweep(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let sweep = &cfg.spec.sweep;
    let mut rs = sweep.r.clone();
    rs.sort_unstable();
    rs.dedup();
    let dts = distinct(&sweep.dt);
    let sides = sweep.side.sides();
    let pool = cfg.thread_pool()?;

    let cells = pool.install(|| {
        let bulks: Vec<Result<BulkCocycles>> = dts
            .par_iter()
            .map(|&dt| BulkCocycles::integrate(&cfg.setup, sweep.s, sweep.s + dt, &cfg.spec.integrator))
            .collect();
        let pairs: Vec<(usize, u32)> = (0..dts.len()).flat_map(|i| rs.iter().map(move |&r| (i, r))).collect();
        let measured: Vec<Option<PairMeasurements>> = pairs
            .par_iter()
            .map(|&(i, r)| bulks[i].as_ref().ok().map(|b| measure_pair(cfg, b, r)))
            .collect();
        let jobs: Vec<(usize, Side)> =
            (0..pairs.len()).flat_map(|p| sides.iter().map(move |&side| (p, side))).collect();
        jobs.par_iter()
            .map(|&(p, side)| {
                let (i, r) = pairs[p];
                factorization_cell(cfg, &bulks[i], measured[p].as_ref(), r, dts[i], side)
            })
            .collect::<Vec<_>>()
    });

    let mut report = ExperimentReport::empty(cfg, ReportKind::Factorization);
    report.factorization = cells;
    report
        .factorization
        .sort_by(|a, b| a.r.cmp(&b.r).then(a.dt.total_cmp(&b.dt)).then(side_rank(a.side).cmp(&side_rank(b.side))));
    Ok(report)
}

/// Commutator norm against the Lieb-Robinson bound for every `(B site, |t−s|)` cell.
pub fn run_lr_sweep(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let lr = cfg.spec.lr.as_ref().ok_or_else(|| Error::config("lr", "section required for a Lieb-Robinson sweep"))?;
    let setup = &cfg.setup;
    let a = single_site_op(&lr.a_op, "lr.a_op")?;
    let b = single_site_op(&lr.b_op, "lr.b_op")?;
    let (a_norm, b_norm) = (linalg::dense_spectral_norm(&a), linalg::dense_spectral_norm(&b));
    let a_sup = Region::from_vertices([lr.a_site]);
    let mut b_sites = lr.b_sites.clone();
    b_sites.sort_unstable();
    b_sites.dedup();
    let dts = distinct(&lr.dt);
    let pool = cfg.thread_pool()?;

    let cells = pool.install(|| {
        let fulls: Vec<Result<CMat>> = dts
            .par_iter()
            .map(|&dt| {
                setup
                    .cocycle(&setup.volume, lr.s, lr.s + dt, &cfg.spec.integrator, TrajectoryKind::Full)
                    .map(|tr| tr.last().clone())
            })
            .collect();
        let jobs: Vec<(usize, usize)> =
            b_sites.iter().flat_map(|&site| (0..dts.len()).map(move |i| (site, i))).collect();
        jobs.par_iter()
            .map(|&(site, i)| {
                let b_sup = Region::from_vertices([site]);
                let dt = dts[i];
                let rhs = bounds::lr_rhs(
                    &cfg.profile,
                    &setup.lattice,
                    cfg.constants.conv_xi.value,
                    cfg.velocity.v_xi,
                    &a_sup,
                    &b_sup,
                    a_norm,
                    b_norm,
                    dt,
                );
                let lhs = fulls[i]
                    .as_ref()
                    .map_err(|e| Error::Inconsistent(e.to_string()))
                    .and_then(|u| bounds::lr_from_cocycle(setup, &a, &a_sup, &b, &b_sup, u));
                let separation = setup.lattice.distance(lr.a_site, site);
                match lhs {
                    Ok(lhs) => LrCell {
                        b_site: site,
                        separation,
                        dt,
                        status: CellStatus::Ok,
                        message: None,
                        lhs: Some(lhs),
                        rhs,
                        satisfied: lhs <= rhs + cfg.spec.sweep.slack,
                    },
                    Err(e) => LrCell {
                        b_site: site,
                        separation,
                        dt,
                        status: CellStatus::Failed,
                        message: Some(e.to_string()),
                        lhs: None,
                        rhs,
                        satisfied: false,
                    },
                }
            })
            .collect::<Vec<_>>()
    });
    let mut report = ExperimentReport::empty(cfg, ReportKind::LiebRobinson);
    report.lieb_robinson = cells;
    report.lieb_robinson.sort_by(|x, y| x.b_site.cmp(&y.b_site).then(x.dt.total_cmp(&y.dt)));
    Ok(report)
}

// ---------------------------------------------------------------------------------------------
// emission

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Right => "right",
        Side::Left => "left",
    }
}

fn status_name(s: CellStatus) -> &'static str {
    match s {
        CellStatus::Ok => "ok",
        CellStatus::Failed => "failed",
    }
}

fn factorization_rows(cells: &[FactorizationCell]) -> Vec<Vec<String>> {
    cells
        .iter()
        .map(|cell| {
            let theorem = cell.bound(BoundKind::Theorem);
            let claim1 = cell.bound(BoundKind::Claim1);
            let snorm = cell.bound(BoundKind::SurfaceNorm);
            let claim2 = cell.claim2_max();
            vec![
                cell.r.to_string(),
                cell.dt.to_string(),
                side_name(cell.side).into(),
                status_name(cell.status).into(),
                opt(cell.error),
                cell.theorem_rhs.to_string(),
                cell.theorem_rhs.min(2.0).to_string(),
                theorem.map(|b| b.satisfied.to_string()).unwrap_or_default(),
                opt(claim1.map(|b| b.lhs_measured)),
                opt(claim1.map(|b| b.rhs_value)),
                opt(claim2.map(|c| c.0)),
                opt(claim2.map(|c| c.1)),
                opt(snorm.map(|b| b.lhs_measured)),
                opt(snorm.map(|b| b.rhs_value)),
                opt(snorm.map(|b| g_form(&b.inputs))),
                opt(cell.unitarity_drift),
                opt(cell.error.zip(cell.unitarity_form).map(|(e, u)| (e - u).abs())),
                cell.steps.to_string(),
                cell.satisfied.to_string(),
                cell.message.clone().unwrap_or_default(),
            ]
        })
        .collect()
}

/// The `G`-form surface bound, which needs no annulus size.
fn g_form(inputs: &BoundInputs) -> f64 {
    bounds::snorm_rhs(inputs, 0).1
}

fn lr_rows(cells: &[LrCell]) -> Vec<Vec<String>> {
    cells
        .iter()
        .map(|c| {
            vec![
                c.b_site.to_string(),
                c.separation.to_string(),
                c.dt.to_string(),
                status_name(c.status).into(),
                opt(c.lhs),
                c.rhs.to_string(),
                c.satisfied.to_string(),
                c.message.clone().unwrap_or_default(),
            ]
        })
        .collect()
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// A named series of `(x, y)` points for the log-scale plots.
struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

fn factorization_series(cells: &[FactorizationCell]) -> Vec<Series> {
    let mut by_key: BTreeMap<(u64, u8), Series> = BTreeMap::new();
    // the theorem RHS does not depend on the side
    let mut rhs: BTreeMap<u64, Series> = BTreeMap::new();
    for cell in cells {
        let key = cell.dt.to_bits();
        if let Some(err) = cell.error {
            by_key
                .entry((key, side_rank(cell.side)))
                .or_insert_with(|| Series { label: format!("error |t-s|={} {}", cell.dt, side_name(cell.side)), points: vec![] })
                .points
                .push((cell.r as f64, err));
        }
        let s = rhs
            .entry(key)
            .or_insert_with(|| Series { label: format!("theorem RHS |t-s|={}", cell.dt), points: vec![] });
        if !s.points.iter().any(|p| p.0 == cell.r as f64) {
            s.points.push((cell.r as f64, cell.theorem_rhs));
        }
    }
    let mut out: Vec<Series> = Vec::new();
    let mut dts: Vec<f64> = cells.iter().map(|c| c.dt).collect();
    dts.sort_by(f64::total_cmp);
    dts.dedup();
    for dt in dts {
        let key = dt.to_bits();
        for rank in 0..2u8 {
            if let Some(s) = by_key.remove(&(key, rank)) {
                out.push(s);
            }
        }
        if let Some(s) = rhs.remove(&key) {
            out.push(s);
        }
    }
    out
}

fn lr_series(cells: &[LrCell]) -> Vec<Series> {
    let mut dts: Vec<f64> = cells.iter().map(|c| c.dt).collect();
    dts.sort_by(f64::total_cmp);
    dts.dedup();
    let mut out = Vec::new();
    for dt in dts {
        let row: Vec<&LrCell> = cells.iter().filter(|c| c.dt == dt).collect();
        out.push(Series {
            label: format!("commutator |t-s|={dt}"),
            points: row.iter().filter_map(|c| c.lhs.map(|l| (c.separation as f64, l))).collect(),
        });
        out.push(Series {
            label: format!("LR bound |t-s|={dt}"),
            points: row.iter().map(|c| (c.separation as f64, c.rhs)).collect(),
        });
    }
    for s in &mut out {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    out
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Self-contained SVG line plot of `log10(y)` against `x`, one polyline per series.
fn render_svg(title: &str, x_label: &str, series: &[Series]) -> String {
    let (w, h) = (720.0, 480.0);
    let (left, right, top, bottom) = (80.0, 220.0, 40.0, 60.0);
    let log = |y: f64| y.max(PLOT_FLOOR).log10();
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().map(|&(x, y)| (x, log(y)))).collect();
    let (mut x0, mut x1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if all.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, -1.0, 0.0);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    y0 = y0.floor();
    y1 = y1.ceil();
    if y1 - y0 < 1.0 {
        y1 = y0 + 1.0;
    }
    let pw = w - left - right;
    let ph = h - top - bottom;
    let px = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#, left + pw / 2.0, escape(title));
    let _ = writeln!(
        out,
        r##"<g stroke="#333" stroke-width="1"><line x1="{left}" y1="{}" x2="{}" y2="{}"/><line x1="{left}" y1="{top}" x2="{left}" y2="{}"/></g>"##,
        top + ph,
        left + pw,
        top + ph,
        top + ph
    );
    let mut tick = y0;
    while tick <= y1 + 1e-9 {
        let y = py(tick);
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="#333"/><text x="{}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{tick}</text>"##,
            left - 5.0,
            left - 8.0,
            y + 4.0
        );
        tick += ((y1 - y0) / 8.0).ceil().max(1.0);
    }
    let mut xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in xs {
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{}" x2="{:.2}" y2="{}" stroke="#333"/><text x="{:.2}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{x}</text>"##,
            px(x),
            top + ph,
            px(x),
            top + ph + 5.0,
            px(x),
            top + ph + 18.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 20 {})">log10(value)</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (i, s) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let dash = if s.label.starts_with("error") || s.label.starts_with("commutator") { "" } else { r#" stroke-dasharray="6 3""# };
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(log(y)))).collect();
        let _ = writeln!(
            out,
            r#"<polyline data-series="{}" fill="none" stroke="{colour}" stroke-width="2"{dash} points="{}"/>"#,
            escape(&s.label),
            pts.join(" ")
        );
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"{dash}/><text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Writes the requested formats into `dir` and returns the written paths.
pub fn emit(report: &ExperimentReport, formats: &[Format], dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    let mut written = Vec::new();
    for f in formats {
        let path = match (f, report.kind) {
            (Format::Csv, ReportKind::Factorization) => {
                let p = dir.join(FACTORIZATION_CSV);
                write_csv(&p, &FACTORIZATION_HEADER, &factorization_rows(&report.factorization))?;
                p
            }
            (Format::Csv, ReportKind::LiebRobinson) => {
                let p = dir.join(LR_CSV);
                write_csv(&p, &LR_HEADER, &lr_rows(&report.lieb_robinson))?;
                p
            }
            (Format::Json, _) => {
                let p = dir.join(REPORT_JSON);
                fs::write(&p, report.to_json()?)?;
                p
            }
            (Format::Svg, ReportKind::Factorization) => {
                let p = dir.join(FACTORIZATION_SVG);
                let svg = render_svg("factorization error and bound", "R", &factorization_series(&report.factorization));
                fs::write(&p, svg)?;
                p
            }
            (Format::Svg, ReportKind::LiebRobinson) => {
                let p = dir.join(LR_SVG);
                let svg = render_svg("commutator norm and Lieb-Robinson bound", "separation d(x, y)", &lr_series(&report.lieb_robinson));
                fs::write(&p, svg)?;
                p
            }
        };
        written.push(path);
    }
    Ok(written)
}
