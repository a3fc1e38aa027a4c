//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! experiment = kfp
//! model.theta = 1.0
//! model.c = inf
//! grid.nq = 64
//! ```
//!
//! Every key is optional except where an experiment needs it; unknown or
//! repeated keys are rejected with the offending line number.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::generic::Dissipation;
use crate::grid::PhaseGrid;
use crate::heat::{HeatConfig, HeatGrid, HeatInit};
use crate::kfp::{stability_bound, KfpConfig, KfpInit};
use crate::model::{ModelParams, Potential, SpeedOfLight, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Heat,
    Kfp,
    Verify,
    Stationary,
    LimitStudy,
}

impl Experiment {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "heat" => Some(Experiment::Heat),
            "kfp" => Some(Experiment::Kfp),
            "verify" => Some(Experiment::Verify),
            "stationary" => Some(Experiment::Stationary),
            "limit-study" => Some(Experiment::LimitStudy),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Heat => "heat",
            Experiment::Kfp => "kfp",
            Experiment::Verify => "verify",
            Experiment::Stationary => "stationary",
            Experiment::LimitStudy => "limit-study",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Uniform,
    Gaussian,
    Bump,
    ShiftedMaxwellian,
    ProductGaussian,
    Maxwellian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitSystemKind {
    Heat,
    Kfp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub nq: usize,
    pub np: usize,
    pub lq: f64,
    pub pmax: f64,
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    /// `None` selects the stability bound.
    pub dt: Option<f64>,
    pub t_final: f64,
    pub record_every: usize,
    pub tolerance: f64,
    pub stabilized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitSpec {
    pub kind: Option<InitKind>,
    pub sigma: f64,
    pub width: f64,
    pub q0: f64,
    pub p0: f64,
    pub sigma_q: f64,
    pub sigma_p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Records between density dumps; `0` dumps only the final state.
    pub dump_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitSpec {
    pub system: LimitSystemKind,
    pub speeds: Vec<f64>,
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    pub seed: u64,
    pub model: ModelParams<f64>,
    pub variant: Variant,
    pub variants: Vec<Variant>,
    pub potential_kind: PotentialKind,
    pub stiffness: f64,
    pub amplitude: f64,
    pub modes: f64,
    pub grid: GridSpec,
    pub solver: SolverSpec,
    pub init: InitSpec,
    pub output: OutputSpec,
    pub limit: LimitSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Zero,
    Harmonic,
    Cosine,
}

const KEYS: &[&str] = &[
    "experiment",
    "seed",
    "model.m",
    "model.c",
    "model.gamma",
    "model.theta",
    "model.nu",
    "model.d",
    "model.variant",
    "model.variants",
    "potential.kind",
    "potential.stiffness",
    "potential.amplitude",
    "potential.modes",
    "grid.nq",
    "grid.np",
    "grid.lq",
    "grid.pmax",
    "grid.n",
    "grid.length",
    "solver.dt",
    "solver.t_final",
    "solver.record_every",
    "solver.tolerance",
    "solver.stabilization",
    "init.kind",
    "init.sigma",
    "init.width",
    "init.q0",
    "init.p0",
    "init.sigma_q",
    "init.sigma_p",
    "output.dir",
    "output.dump_every",
    "limit.system",
    "limit.speeds",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(Some(line_no), "", format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::config(Some(line_no), key, "unknown key"));
            }
            if value.is_empty() {
                return Err(Error::config(Some(line_no), key, "missing value"));
            }
            if let Some((first, _)) = map.insert(key.to_string(), (line_no, value.to_string())) {
                return Err(Error::config(Some(line_no), key, format!("duplicate key (first set on line {first})")));
            }
        }
        Ok(Entries { map })
    }

    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some((l, v)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(Error::config(Some(l), key, format!("expected a finite number, got `{v}`"))),
            },
        }
    }

    fn positive(&self, key: &str, default: f64, symbol: &str) -> Result<f64> {
        let x = self.f64(key, default)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(Error::config(self.raw(key).map(|r| r.0), key, format!("constraint {symbol} > 0 violated (got {x})")))
        }
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some((l, v)) => v
                .parse::<usize>()
                .map_err(|_| Error::config(Some(l), key, format!("expected a non-negative integer, got `{v}`"))),
        }
    }

    fn u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.raw(key) {
            None => Ok(default),
            Some((l, v)) => v
                .parse::<u64>()
                .map_err(|_| Error::config(Some(l), key, format!("expected an unsigned integer, got `{v}`"))),
        }
    }

    fn bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some((_, "true")) => Ok(true),
            Some((_, "false")) => Ok(false),
            Some((l, v)) => Err(Error::config(Some(l), key, format!("expected `true` or `false`, got `{v}`"))),
        }
    }

    fn choice<U>(&self, key: &str, parse: impl Fn(&str) -> Option<U>, allowed: &str) -> Result<Option<U>> {
        match self.raw(key) {
            None => Ok(None),
            Some((l, v)) => parse(v)
                .map(Some)
                .ok_or_else(|| Error::config(Some(l), key, format!("expected one of {allowed}, got `{v}`"))),
        }
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.raw(key).map(|r| r.0)
    }
}

fn parse_init(s: &str) -> Option<InitKind> {
    match s {
        "uniform" => Some(InitKind::Uniform),
        "gaussian" => Some(InitKind::Gaussian),
        "bump" => Some(InitKind::Bump),
        "shifted-maxwellian" => Some(InitKind::ShiftedMaxwellian),
        "product-gaussian" => Some(InitKind::ProductGaussian),
        "maxwellian" => Some(InitKind::Maxwellian),
        _ => None,
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let e = Entries::parse(text)?;
    let experiment = e.choice("experiment", Experiment::parse, "heat, kfp, verify, stationary, limit-study")?;

    let c = match e.raw("model.c") {
        None => SpeedOfLight::Finite(1.0),
        Some((_, "inf")) | Some((_, "infinite")) => SpeedOfLight::Infinite,
        Some(_) => SpeedOfLight::Finite(e.positive("model.c", 1.0, "c")?),
    };
    let d = e.usize("model.d", 1)?;
    if d == 0 {
        return Err(Error::config(e.line("model.d"), "model.d", "constraint d >= 1 violated"));
    }
    let model = ModelParams {
        m: e.positive("model.m", 1.0, "m")?,
        c,
        gamma: e.positive("model.gamma", 1.0, "gamma")?,
        theta: e.positive("model.theta", 1.0, "theta")?,
        nu: e.positive("model.nu", 1.0, "nu")?,
        d,
    };
    let default_variant = if c.is_finite() { Variant::Dh } else { Variant::Classical };
    let variant = e.choice("model.variant", Variant::parse, "dmr, dh, classical")?.unwrap_or(default_variant);
    variant
        .check(&model)
        .map_err(|err| Error::config(e.line("model.variant").or(e.line("model.c")), "model.variant", err.to_string()))?;
    let variants = match e.raw("model.variants") {
        None => vec![Variant::Dmr, Variant::Dh],
        Some((l, v)) => {
            let mut out = Vec::new();
            for item in v.split(',') {
                let var = Variant::parse(item)
                    .ok_or_else(|| Error::config(Some(l), "model.variants", format!("unknown variant `{}`", item.trim())))?;
                var.check(&model).map_err(|err| Error::config(Some(l), "model.variants", err.to_string()))?;
                out.push(var);
            }
            out
        }
    };

    let potential_kind = e
        .choice(
            "potential.kind",
            |s| match s {
                "zero" => Some(PotentialKind::Zero),
                "harmonic" => Some(PotentialKind::Harmonic),
                "cosine" => Some(PotentialKind::Cosine),
                _ => None,
            },
            "zero, harmonic, cosine",
        )?
        .unwrap_or(PotentialKind::Zero);
    let stiffness = e.f64("potential.stiffness", 1.0)?;
    if stiffness < 0.0 {
        return Err(Error::config(e.line("potential.stiffness"), "potential.stiffness", "constraint k >= 0 violated"));
    }
    let amplitude = e.f64("potential.amplitude", 1.0)?;
    if amplitude < 0.0 {
        return Err(Error::config(e.line("potential.amplitude"), "potential.amplitude", "constraint a >= 0 violated"));
    }
    let modes = e.f64("potential.modes", 1.0)?;

    let grid = GridSpec {
        nq: e.usize("grid.nq", 32)?,
        np: e.usize("grid.np", 32)?,
        lq: e.positive("grid.lq", 8.0, "Lq")?,
        pmax: e.positive("grid.pmax", 6.0, "Pmax")?,
        n: e.usize("grid.n", 256)?,
        length: e.positive("grid.length", 1.0, "L")?,
    };
    for key in ["grid.nq", "grid.np"] {
        let n = if key == "grid.nq" { grid.nq } else { grid.np };
        if n < 8 || n % 2 != 0 {
            return Err(Error::config(e.line(key), key, format!("cell count must be even and >= 8, got {n}")));
        }
    }
    if grid.n < 2 {
        return Err(Error::config(e.line("grid.n"), "grid.n", "need at least 2 cells"));
    }

    let dt = match e.raw("solver.dt") {
        None | Some((_, "auto")) => None,
        Some(_) => Some(e.positive("solver.dt", 1.0, "dt")?),
    };
    let record_every = e.usize("solver.record_every", 10)?;
    if record_every == 0 {
        return Err(Error::config(e.line("solver.record_every"), "solver.record_every", "must be at least 1"));
    }
    let solver = SolverSpec {
        dt,
        t_final: e.positive("solver.t_final", 1.0, "T")?,
        record_every,
        tolerance: e.positive("solver.tolerance", 1e-3, "tolerance")?,
        stabilized: e.bool("solver.stabilization", true)?,
    };

    let init = InitSpec {
        kind: e.choice(
            "init.kind",
            parse_init,
            "uniform, gaussian, bump, shifted-maxwellian, product-gaussian, maxwellian",
        )?,
        sigma: e.positive("init.sigma", 0.1, "sigma")?,
        width: e.positive("init.width", 0.25, "width")?,
        q0: e.f64("init.q0", 0.0)?,
        p0: e.f64("init.p0", 0.0)?,
        sigma_q: e.positive("init.sigma_q", 1.0, "sigma_q")?,
        sigma_p: e.positive("init.sigma_p", 1.0, "sigma_p")?,
    };

    let output = OutputSpec {
        dir: e.raw("output.dir").map(|(_, v)| PathBuf::from(v)).unwrap_or_else(|| PathBuf::from("out")),
        dump_every: e.usize("output.dump_every", 0)?,
    };

    let system = e
        .choice(
            "limit.system",
            |s| match s {
                "heat" => Some(LimitSystemKind::Heat),
                "kfp" => Some(LimitSystemKind::Kfp),
                _ => None,
            },
            "heat, kfp",
        )?
        .unwrap_or(LimitSystemKind::Heat);
    let speeds = match e.raw("limit.speeds") {
        None => vec![10.0, 100.0, 1000.0],
        Some((l, v)) => {
            let mut out = Vec::new();
            for item in v.split(',') {
                match item.trim().parse::<f64>() {
                    Ok(x) if x.is_finite() && x > 0.0 => out.push(x),
                    _ => return Err(Error::config(Some(l), "limit.speeds", format!("invalid speed `{}`", item.trim()))),
                }
            }
            out
        }
    };

    let cfg = RunConfig {
        experiment,
        seed: e.u64("seed", 1)?,
        model,
        variant,
        variants,
        potential_kind,
        stiffness,
        amplitude,
        modes,
        grid,
        solver,
        init,
        output,
        limit: LimitSpec { system, speeds },
    };
    cfg.check_experiment(&e)?;
    Ok(cfg)
}

impl RunConfig {
    fn check_experiment(&self, e: &Entries) -> Result<()> {
        let phase_space = matches!(
            self.experiment,
            Some(Experiment::Kfp) | Some(Experiment::Stationary) | Some(Experiment::Verify)
        ) || (self.experiment == Some(Experiment::LimitStudy) && self.limit.system == LimitSystemKind::Kfp);
        if phase_space && self.model.d != 1 {
            return Err(Error::config(e.line("model.d"), "model.d", "phase-space solvers require d = 1"));
        }
        if let Some(kind) = self.init.kind {
            let heat_init = matches!(kind, InitKind::Uniform | InitKind::Gaussian | InitKind::Bump);
            let kfp_init = !matches!(kind, InitKind::Gaussian | InitKind::Bump);
            let heat_like = self.experiment == Some(Experiment::Heat)
                || (self.experiment == Some(Experiment::LimitStudy) && self.limit.system == LimitSystemKind::Heat);
            if (heat_like && !heat_init) || (phase_space && !kfp_init) {
                return Err(Error::config(e.line("init.kind"), "init.kind", "initial condition does not match the experiment"));
            }
        }
        if self.experiment == Some(Experiment::Stationary)
            && !self.model.c.is_finite()
            && self.variants.iter().any(|v| *v != Variant::Classical)
        {
            return Err(Error::config(e.line("model.variants"), "model.variants", "classical runs need variant `classical`"));
        }
        Ok(())
    }

    pub fn potential(&self) -> Potential<f64> {
        match self.potential_kind {
            PotentialKind::Zero => Potential::Zero,
            PotentialKind::Harmonic => Potential::Harmonic { stiffness: self.stiffness },
            PotentialKind::Cosine => Potential::Cosine {
                amplitude: self.amplitude,
                wavenumber: 2.0 * std::f64::consts::PI * self.modes / self.grid.lq,
            },
        }
    }

    pub fn phase_grid(&self) -> Result<PhaseGrid<f64>> {
        PhaseGrid::new(self.grid.nq, self.grid.np, self.grid.lq, self.grid.pmax)
    }

    pub fn heat_config(&self) -> Result<HeatConfig<f64>> {
        let init = match self.init.kind.unwrap_or(InitKind::Gaussian) {
            InitKind::Uniform => HeatInit::Uniform,
            InitKind::Bump => HeatInit::Bump { width: self.init.width },
            _ => HeatInit::Gaussian { sigma: self.init.sigma },
        };
        let cfg = HeatConfig {
            grid: HeatGrid::new(self.grid.n, self.grid.length)?,
            params: self.model,
            dt: 0.0,
            t_final: self.solver.t_final,
            record_every: self.solver.record_every,
            init,
        }
        .with_stable_dt();
        Ok(match self.solver.dt {
            Some(dt) => HeatConfig { dt, ..cfg },
            None => cfg,
        })
    }

    pub fn kfp_init(&self) -> KfpInit<f64> {
        match self.init.kind.unwrap_or(InitKind::ProductGaussian) {
            InitKind::Uniform => KfpInit::Uniform,
            InitKind::Maxwellian => KfpInit::Maxwellian,
            InitKind::ShiftedMaxwellian => KfpInit::ShiftedMaxwellian { p0: self.init.p0 },
            _ => KfpInit::ProductGaussian {
                q0: self.init.q0,
                sigma_q: self.init.sigma_q,
                p0: self.init.p0,
                sigma_p: self.init.sigma_p,
            },
        }
    }

    pub fn kfp_config(&self, variant: Variant) -> Result<KfpConfig<f64>> {
        let mut cfg = KfpConfig {
            grid: self.phase_grid()?,
            params: self.model,
            potential: self.potential(),
            variant,
            dissipation: Dissipation { stabilized: self.solver.stabilized },
            dt: 1.0,
            t_final: self.solver.t_final,
            record_every: self.solver.record_every,
            init: self.kfp_init(),
        };
        let bound = stability_bound(&cfg.operator()?);
        cfg.dt = self.solver.dt.unwrap_or(bound);
        Ok(cfg)
    }
}
