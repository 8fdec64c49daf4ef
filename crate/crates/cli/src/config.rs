//! Experiment configuration files (TOML) and their validation.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use csf_core::exact::grim_reaper;
use csf_core::graphical::BoundaryCondition;
use csf_core::profile::{spike_field, unit_bump};
use csf_core::{Grid1D, ScalarField};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Solve,
    LocalGcsf,
    Harnack,
    Delayed,
    Lp,
    Sharpness,
    Separation,
    MeasureFlow,
    Intersections,
    ValidateExact,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Solve => "solve",
            Kind::LocalGcsf => "local-gcsf",
            Kind::Harnack => "harnack",
            Kind::Delayed => "delayed",
            Kind::Lp => "lp",
            Kind::Sharpness => "sharpness",
            Kind::Separation => "separation",
            Kind::MeasureFlow => "measure-flow",
            Kind::Intersections => "intersections",
            Kind::ValidateExact => "validate-exact",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub grid: Option<GridConfig>,
    pub initial: Option<Profile>,
    /// Second initial datum for separation runs.
    pub second: Option<Profile>,
    pub solver: Option<SolverConfig>,
    pub bc: Option<BcConfig>,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    pub curve: Option<CurveConfig>,
    #[serde(default)]
    pub curves: Vec<CurveSource>,
    pub delayed: Option<DelayedConfig>,
    pub lp: Option<LpConfig>,
    pub sharpness: Option<SharpnessConfig>,
    pub separation: Option<SeparationConfig>,
    pub measure: Option<MeasureConfig>,
    pub exact: Option<ExactConfig>,
    /// Directory of the config file, for relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub left: f64,
    pub right: f64,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "one")]
    pub theta: f64,
    pub dt_max: Option<f64>,
    pub t_end: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BcKind {
    Zero,
    Fixed,
    GrimReaper,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    pub kind: BcKind,
    #[serde(default)]
    pub shift: f64,
}

/// Initial profile on the configured grid.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum Profile {
    Zero,
    /// `mass * psi((x - center) / half_width) / half_width` with `psi` the unit bump.
    Bump {
        #[serde(default = "one")]
        mass: f64,
        #[serde(default = "one")]
        half_width: f64,
        #[serde(default)]
        center: f64,
    },
    Spike {
        n: f64,
        #[serde(default = "one")]
        mass: f64,
        #[serde(default)]
        center: f64,
    },
    Hat {
        #[serde(default = "one")]
        height: f64,
        #[serde(default = "one")]
        half_width: f64,
        #[serde(default)]
        center: f64,
    },
    /// `height (1 - x^2)`, clipped at zero.
    Parabola {
        #[serde(default = "one")]
        height: f64,
    },
    GrimReaper {
        #[serde(default)]
        shift: f64,
        #[serde(default = "one")]
        sign: f64,
    },
    /// `x,u` CSV, linearly resampled onto the grid.
    Csv { path: PathBuf },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    /// `u0` for the U-curve; the configured initial profile when absent.
    pub source: Option<String>,
    /// Vertices across the base `[-1, 1]`; sets the chord to `2 / m`.
    pub m: Option<usize>,
    pub chord: Option<f64>,
    pub y_cap: Option<f64>,
    #[serde(default = "yes")]
    pub pin_ends: bool,
    pub dt_safety: Option<f64>,
}

/// One curve of an intersection experiment.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum CurveSource {
    Circle {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
        #[serde(default = "default_m")]
        m: usize,
    },
    Oval {
        #[serde(default = "minus_one")]
        time_offset: f64,
        #[serde(default)]
        shift: f64,
        #[serde(default = "default_m")]
        m: usize,
    },
    /// Graph of `amplitude sin(frequency x) + offset` over `[left, right]`.
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        offset: f64,
        left: f64,
        right: f64,
        #[serde(default = "default_m")]
        m: usize,
    },
    Line {
        #[serde(default)]
        height: f64,
        left: f64,
        right: f64,
        #[serde(default = "default_m")]
        m: usize,
    },
    Csv {
        path: PathBuf,
        #[serde(default)]
        closed: bool,
    },
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayedConfig {
    #[serde(default = "one")]
    pub delta: f64,
    /// Mass bound; `||u0||_{L^1(-1,1)}` when absent.
    pub a_bar: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpConfig {
    pub p: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessConfig {
    pub n_values: Vec<u32>,
    pub probe_times: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub delta: f64,
    pub half_width: Option<f64>,
    pub nodes: Option<usize>,
    pub dt_max: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationConfig {
    pub r: f64,
    pub big_r: f64,
    #[serde(default = "one")]
    pub p: f64,
    #[serde(default = "one")]
    pub delta: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub path: PathBuf,
    pub epsilons: Vec<f64>,
    pub t_end: f64,
    /// Require the Cauchy halving test to pass; otherwise it is only reported.
    #[serde(default = "yes")]
    pub check_cauchy: bool,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactConfig {
    #[serde(default = "default_exact_n")]
    pub n: usize,
    #[serde(default = "default_exact_dt")]
    pub dt: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self { n: default_exact_n(), dt: default_exact_dt(), samples: default_samples() }
    }
}

fn one() -> f64 {
    1.0
}
fn minus_one() -> f64 {
    -1.0
}
fn yes() -> bool {
    true
}
fn default_m() -> usize {
    301
}
fn default_exact_n() -> usize {
    801
}
fn default_exact_dt() -> f64 {
    1e-3
}
fn default_samples() -> usize {
    1000
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn grid(&self) -> Result<Grid1D> {
        let g = self.grid.ok_or_else(|| anyhow!("missing [grid]"))?;
        Ok(Grid1D::new(g.left, g.right, g.n)?)
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        self.solver.ok_or_else(|| anyhow!("missing [solver]"))
    }

    /// `dt_max` from the config, or `min(0.1, dx)`.
    pub fn dt_max(&self) -> Result<f64> {
        let s = self.solver()?;
        Ok(s.dt_max.unwrap_or_else(|| self.grid().map(|g| g.dx().min(0.1)).unwrap_or(0.1)))
    }

    pub fn initial_field(&self) -> Result<ScalarField> {
        let p = self.initial.as_ref().ok_or_else(|| anyhow!("missing [initial]"))?;
        self.profile_field(p)
    }

    pub fn profile_field(&self, p: &Profile) -> Result<ScalarField> {
        let g = self.grid()?;
        let f = match p {
            Profile::Zero => ScalarField::zeros(g),
            &Profile::Bump { mass, half_width, center } => {
                if !(half_width > 0.0) {
                    bail!("bump half_width must be positive");
                }
                ScalarField::from_fn(g, |x| mass * unit_bump((x - center) / half_width) / half_width)?
            }
            &Profile::Spike { n, mass, center } => spike_field(g, n, mass, center)?,
            &Profile::Hat { height, half_width, center } => {
                if !(half_width > 0.0) {
                    bail!("hat half_width must be positive");
                }
                ScalarField::from_fn(g, |x| height * (1.0 - (x - center).abs() / half_width).max(0.0))?
            }
            &Profile::Parabola { height } => ScalarField::from_fn(g, |x| height * (1.0 - x * x).max(0.0))?,
            &Profile::GrimReaper { shift, sign } => {
                if g.left() <= -1.0 || g.right() >= 1.0 {
                    bail!("grim-reaper profile needs a grid inside (-1, 1)");
                }
                let vals = g.nodes().iter().map(|&x| grim_reaper(x, 0.0, shift).map(|v| sign * v)).collect::<Result<Vec<_>, _>>()?;
                ScalarField::new(g, vals)?
            }
            Profile::Csv { path } => {
                let src = ScalarField::load_csv(&self.resolve(path))?;
                let sg = src.grid();
                if g.left() < sg.left() || g.right() > sg.right() {
                    bail!("csv profile does not cover the grid");
                }
                ScalarField::from_fn(g, |x| src.sample_linear(x).unwrap_or(0.0))?
            }
        };
        if f.values().iter().any(|v| !v.is_finite()) {
            bail!("initial profile has non-finite values");
        }
        Ok(f)
    }

    pub fn boundary(&self) -> Result<BoundaryCondition> {
        let bc = self.bc.ok_or_else(|| anyhow!("missing [bc]"))?;
        Ok(match bc.kind {
            BcKind::Zero => BoundaryCondition::Zero,
            BcKind::Fixed => BoundaryCondition::DirichletFixed,
            BcKind::GrimReaper => {
                let g = self.grid()?;
                if g.left() <= -1.0 || g.right() >= 1.0 {
                    bail!("grim-reaper boundary values need a grid inside (-1, 1)");
                }
                let shift = bc.shift;
                BoundaryCondition::oracle(move |x, t| grim_reaper(x, t, shift).unwrap_or(f64::NAN))
            }
        })
    }

    /// Checks every parameter the kind needs, without running anything.
    pub fn validate(&self) -> Result<()> {
        if self.snapshots.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            bail!("snapshot times must be finite and nonnegative");
        }
        let graphical = |c: &Self| -> Result<()> {
            c.initial_field()?;
            c.boundary()?;
            let s = c.solver()?;
            if !(s.t_end > 0.0) {
                bail!("solver.t_end must be positive");
            }
            if !(0.5..=1.0).contains(&s.theta) {
                bail!("solver.theta must lie in [1/2, 1]");
            }
            if !(c.dt_max()? > 0.0) {
                bail!("solver.dt_max must be positive");
            }
            Ok(())
        };
        match self.kind {
            Kind::Solve => graphical(self)?,
            Kind::Delayed => {
                graphical(self)?;
                let d = self.delayed.ok_or_else(|| anyhow!("missing [delayed]"))?;
                if !(d.delta > 0.0) || d.a_bar.is_some_and(|a| !(a > 0.0)) {
                    bail!("delayed.delta and delayed.a_bar must be positive");
                }
            }
            Kind::Lp => {
                graphical(self)?;
                let p = self.lp.ok_or_else(|| anyhow!("missing [lp]"))?.p;
                if !(p >= 1.0) {
                    bail!("lp.p must be at least 1");
                }
                self.needs_unit_interval()?;
            }
            Kind::Separation => {
                graphical(self)?;
                let second = self.second.as_ref().ok_or_else(|| anyhow!("missing [second]"))?;
                self.profile_field(second)?;
                let s = self.separation.ok_or_else(|| anyhow!("missing [separation]"))?;
                let g = self.grid()?;
                if !(0.0 < s.r && s.r < s.big_r) || -s.big_r < g.left() || s.big_r > g.right() {
                    bail!("separation needs 0 < r < big_r with (-big_r, big_r) inside the grid");
                }
                if !(s.p >= 1.0) || !(s.delta > 0.0) {
                    bail!("separation.p must be >= 1 and separation.delta positive");
                }
            }
            Kind::LocalGcsf | Kind::Harnack => {
                self.needs_unit_interval()?;
                let u0 = self.local_initial()?;
                if u0.min() < 0.0 {
                    bail!("local flows need nonnegative initial data");
                }
                if !(self.solver()?.t_end > 0.0) {
                    bail!("solver.t_end must be positive");
                }
                if let Some(c) = &self.curve {
                    if !c.pin_ends {
                        bail!("the U-curve needs pinned ends (curve.pin_ends = true)");
                    }
                    if c.chord.is_some_and(|h| !(h > 0.0)) || c.m.is_some_and(|m| m < 16) {
                        bail!("curve.chord must be positive and curve.m at least 16");
                    }
                    if c.dt_safety.is_some_and(|s| !(s > 0.0 && s <= 0.5)) {
                        bail!("curve.dt_safety must lie in (0, 0.5]");
                    }
                }
                if self.kind == Kind::Harnack && self.delayed.is_some_and(|d| !(d.delta > 0.0)) {
                    bail!("delayed.delta must be positive");
                }
            }
            Kind::Sharpness => {
                let s = self.sharpness.as_ref().ok_or_else(|| anyhow!("missing [sharpness]"))?;
                self.spike_spec(s).validate()?;
                let g = self.spike_grid(s);
                if !(g.half_width > 0.0) || g.nodes < 3 || !(g.dt_max > 0.0) {
                    bail!("invalid spike grid");
                }
            }
            Kind::MeasureFlow => {
                let m = self.measure.as_ref().ok_or_else(|| anyhow!("missing [measure]"))?;
                let nu = csf_core::measures::RadonMeasureSpec::load_json(&self.resolve(&m.path))?;
                nu.validate()?;
                if nu.support().is_none() {
                    bail!("measure has empty support");
                }
                if m.epsilons.is_empty() || m.epsilons.iter().any(|e| !(*e > 0.0)) || m.epsilons.windows(2).any(|w| w[1] >= w[0]) {
                    bail!("measure.epsilons must be positive and strictly decreasing");
                }
                if !(m.t_end > 0.0) {
                    bail!("measure.t_end must be positive");
                }
            }
            Kind::Intersections => {
                if self.curves.len() != 2 {
                    bail!("intersections need exactly two [[curves]]");
                }
                for c in &self.curves {
                    crate::experiments::build_curve(self, c)?;
                }
                if !(self.solver()?.t_end > 0.0) {
                    bail!("solver.t_end must be positive");
                }
            }
            Kind::ValidateExact => {
                let e = self.exact.unwrap_or_default();
                if e.n < 5 || !(e.dt > 0.0) || e.samples == 0 {
                    bail!("exact.n >= 5, exact.dt > 0 and exact.samples >= 1 required");
                }
            }
        }
        Ok(())
    }

    fn needs_unit_interval(&self) -> Result<()> {
        let g = self.grid()?;
        if g.left() != -1.0 || g.right() != 1.0 {
            bail!("this kind needs grid.left = -1 and grid.right = 1");
        }
        Ok(())
    }

    /// Initial data of a local flow: `curve.source` names a profile kind
    /// with default parameters, otherwise `[initial]` is used.
    pub fn local_initial(&self) -> Result<ScalarField> {
        match self.curve.as_ref().and_then(|c| c.source.as_deref()) {
            None => self.initial_field(),
            Some(name) => {
                let p: Profile = toml::from_str(&format!("profile = {name:?}"))
                    .map_err(|_| anyhow!("unknown curve.source {name:?}"))?;
                self.profile_field(&p)
            }
        }
    }

    pub fn spike_spec(&self, s: &SharpnessConfig) -> csf_core::estimates::SpikeFamilySpec {
        csf_core::estimates::SpikeFamilySpec {
            n_values: s.n_values.clone(),
            probe_times: s
                .probe_times
                .clone()
                .unwrap_or_else(|| csf_core::estimates::SpikeFamilySpec::probe_ladder(s.mass)),
            mass: s.mass,
            delta: s.delta,
        }
    }

    pub fn spike_grid(&self, s: &SharpnessConfig) -> csf_core::estimates::SpikeGrid {
        let d = csf_core::estimates::SpikeGrid::default();
        csf_core::estimates::SpikeGrid {
            half_width: s.half_width.unwrap_or(d.half_width),
            nodes: s.nodes.unwrap_or(d.nodes),
            dt_max: s.dt_max.unwrap_or(d.dt_max),
        }
    }
}
