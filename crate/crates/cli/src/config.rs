//! Sectioned `key = value` scenario files.
//!
//! ```text
//! # comment
//! [soil]
//! model = van_genuchten
//! c = 5/3
//! ...
//! [bc]
//! top = ustar
//! ```
//!
//! Numeric values may be constant expressions. Initial, boundary and
//! source data are expressions over `x, z, t, u`, with `ustar` available
//! for the van Genuchten model.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use richards_core::constitutive::DEFAULT_TABLE_SAMPLES;
use richards_core::{
    BoundaryTag, Constitutive, Field, LinearModel, LschemeConfig, Mesh, Rect, Scenario, SoilModel, SoilParams,
    WeightRule,
};

use crate::error::{CliError, Result};
use crate::expr::Expr;

const SECTIONS: [&str; 6] = ["soil", "mesh", "time", "bc", "solver", "output"];

#[derive(Debug, Clone, PartialEq)]
pub enum SoilSpec {
    VanGenuchten { params: SoilParams, table_samples: usize },
    Linear(LinearModel),
}

impl SoilSpec {
    /// Lipschitz constant of θ; 1 for both families.
    pub fn l_theta(&self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSpec {
    Interval { cells: usize, z0: f64, z1: f64 },
    Triangles { nx: usize, ny: usize, rect: Rect },
}

impl MeshSpec {
    pub fn build(&self) -> Result<Mesh> {
        Ok(match *self {
            MeshSpec::Interval { cells, z0, z1 } => Mesh::uniform_interval(cells, z0, z1)?,
            MeshSpec::Triangles { nx, ny, rect } => Mesh::structured_triangles(nx, ny, rect)?,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            MeshSpec::Interval { .. } => 1,
            MeshSpec::Triangles { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSpec {
    pub final_time: f64,
    pub steps: usize,
}

/// Expression sources for the data fields.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSpec {
    pub initial: String,
    pub source: String,
    pub bottom: String,
    pub top: String,
    pub left: String,
    pub right: String,
}

impl Default for DataSpec {
    fn default() -> Self {
        let zero = || "0".to_string();
        Self { initial: zero(), source: zero(), bottom: zero(), top: zero(), left: zero(), right: zero() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    /// `None` selects `L = L_θ`.
    pub l: Option<f64>,
    pub atol: f64,
    pub rtol: f64,
    pub max_iters: usize,
    pub lin_tol: f64,
    pub lin_max_iters: usize,
    pub epsilon: f64,
    pub weight_rule: WeightRule,
    pub physical_bounds: bool,
    pub abort_on_nonconvergence: bool,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = LschemeConfig::default();
        Self {
            l: None,
            atol: d.atol,
            rtol: d.rtol,
            max_iters: d.max_iters,
            lin_tol: d.lin_tol,
            lin_max_iters: d.lin_max_iters,
            epsilon: 0.0,
            weight_rule: WeightRule::default(),
            physical_bounds: false,
            abort_on_nonconvergence: false,
        }
    }
}

impl SolverSpec {
    pub fn lscheme(&self, l_theta: f64) -> LschemeConfig {
        LschemeConfig {
            l: self.l.unwrap_or(l_theta),
            atol: self.atol,
            rtol: self.rtol,
            max_iters: self.max_iters,
            lin_tol: self.lin_tol,
            lin_max_iters: self.lin_max_iters,
            record_iterates: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    /// Write `fields_{step}.csv` every this many steps; 0 disables.
    pub fields_every: usize,
    pub certify_probes: usize,
    pub plot_samples: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { fields_every: 0, certify_probes: 10_000, plot_samples: 1001 }
    }
}

/// A parsed scenario file. `mesh` and `time` are optional so that
/// `certify` and `plot-constitutive` can run from a `[soil]` section alone.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub soil: SoilSpec,
    pub mesh: Option<MeshSpec>,
    pub time: Option<TimeSpec>,
    pub data: DataSpec,
    pub solver: SolverSpec,
    pub output: OutputSpec,
}

impl Default for Config {
    /// 1D infiltration into dry soil through the top boundary.
    fn default() -> Self {
        Self {
            soil: SoilSpec::VanGenuchten { params: SoilParams::default(), table_samples: DEFAULT_TABLE_SAMPLES },
            mesh: Some(MeshSpec::Interval { cells: 100, z0: 0.0, z1: 1.0 }),
            time: Some(TimeSpec { final_time: 0.4, steps: 50 }),
            data: DataSpec { top: "ustar".into(), ..DataSpec::default() },
            solver: SolverSpec { physical_bounds: true, ..SolverSpec::default() },
            output: OutputSpec::default(),
        }
    }
}

/// Parses and validates `text`, then builds the scenario it describes.
pub fn parse_config(text: &str) -> Result<Scenario> {
    Config::parse(text)?.scenario()
}

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

struct Section {
    name: &'static str,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn empty(name: &'static str) -> Self {
        Self { name, line: 0, entries: BTreeMap::new() }
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(self.line, |e| e.line)
    }

    fn raw(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>> {
        let Some((v, line)) = self.raw(key) else { return Ok(None) };
        let e = Expr::parse(&v, &[]).map_err(|e| CliError::config_at(line, format!("{key}: {e}")))?;
        let c = e
            .constant()
            .ok_or_else(|| CliError::config_at(line, format!("{key} must be a constant, got '{v}'")))?;
        if !c.is_finite() {
            return Err(CliError::config_at(line, format!("{key} must be finite, got '{v}'")));
        }
        Ok(Some(c))
    }

    fn usize(&mut self, key: &str) -> Result<Option<usize>> {
        let Some((v, line)) = self.raw(key) else { return Ok(None) };
        v.parse()
            .map(Some)
            .map_err(|_| CliError::config_at(line, format!("{key} must be a non-negative integer, got '{v}'")))
    }

    fn bool(&mut self, key: &str) -> Result<Option<bool>> {
        let Some((v, line)) = self.raw(key) else { return Ok(None) };
        match v.as_str() {
            "true" => Ok(Some(true)),
            "false" => Ok(Some(false)),
            _ => Err(CliError::config_at(line, format!("{key} must be true or false, got '{v}'"))),
        }
    }

    fn require<T>(&self, key: &str, v: Option<T>) -> Result<T> {
        v.ok_or_else(|| missing(self, key))
    }

    /// Errors on the first key that no getter asked for.
    fn finish(&self, context: &str) -> Result<()> {
        match self.entries.iter().filter(|(_, e)| !e.used).min_by_key(|(_, e)| e.line) {
            Some((k, e)) => Err(CliError::config_at(e.line, format!("key '{k}' is not valid in [{}]{context}", self.name))),
            None => Ok(()),
        }
    }
}

fn missing(s: &Section, key: &str) -> CliError {
    let msg = format!("missing required key '{key}' in [{}]", s.name);
    if s.line > 0 {
        CliError::config_at(s.line, msg)
    } else {
        CliError::Config(msg)
    }
}

fn split_sections(text: &str) -> Result<BTreeMap<&'static str, Section>> {
    let mut sections: BTreeMap<&'static str, Section> = BTreeMap::new();
    let mut current: Option<&'static str> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| CliError::config_at(line, format!("malformed section header '{s}'")))?
                .trim();
            let name = SECTIONS
                .into_iter()
                .find(|n| *n == name)
                .ok_or_else(|| CliError::config_at(line, format!("unknown section [{name}]")))?;
            if let Some(prev) = sections.get(name) {
                return Err(CliError::config_at(line, format!("section [{name}] repeats line {}", prev.line)));
            }
            sections.insert(name, Section { name, line, entries: BTreeMap::new() });
            current = Some(name);
            continue;
        }
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| CliError::config_at(line, format!("expected 'key = value', got '{s}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let sec = current.ok_or_else(|| CliError::config_at(line, format!("key '{key}' outside any section")))?;
        if key.is_empty() || value.is_empty() {
            return Err(CliError::config_at(line, format!("expected 'key = value', got '{s}'")));
        }
        let entries = &mut sections.get_mut(sec).expect("current section exists").entries;
        if let Some(prev) = entries.get(key) {
            return Err(CliError::config_at(line, format!("duplicate key '{key}' (first set on line {})", prev.line)));
        }
        entries.insert(key.to_string(), Entry { value: value.to_string(), line, used: false });
    }
    Ok(sections)
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections = split_sections(text)?;
        let mut take = |name: &'static str| sections.remove(name).unwrap_or_else(|| Section::empty(name));
        let (mut soil_s, mut mesh_s, mut time_s) = (take("soil"), take("mesh"), take("time"));
        let (mut bc_s, mut solver_s, mut out_s) = (take("bc"), take("solver"), take("output"));

        let soil = parse_soil(&mut soil_s)?;
        let mesh = parse_mesh(&mut mesh_s)?;
        let time = parse_time(&mut time_s)?;
        let data = parse_data(&mut bc_s, &soil, mesh.as_ref())?;
        let solver = parse_solver(&mut solver_s, soil.l_theta())?;
        let output = parse_output(&mut out_s)?;
        Ok(Self { soil, mesh, time, data, solver, output })
    }

    /// Canonical text form; `Config::parse(&c.emit()) == Ok(c)`.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let kv = |s: &mut String, k: &str, v: &dyn std::fmt::Display| {
            writeln!(s, "{k} = {v}").expect("write to string");
        };
        s.push_str("[soil]\n");
        match &self.soil {
            SoilSpec::VanGenuchten { params: p, table_samples } => {
                kv(&mut s, "model", &"van_genuchten");
                for (k, v) in [
                    ("b", p.b),
                    ("c", p.c),
                    ("a", p.a),
                    ("m", p.m),
                    ("h_cap", p.h_cap),
                    ("k_s", p.k_s),
                    ("c_scale", p.c_scale),
                    ("porosity", p.porosity),
                ] {
                    kv(&mut s, k, &Num(v));
                }
                kv(&mut s, "table_samples", table_samples);
            }
            SoilSpec::Linear(m) => {
                kv(&mut s, "model", &"linear");
                kv(&mut s, "conductivity", &Num(m.conductivity));
                kv(&mut s, "convection_z", &Num(m.convection_z));
            }
        }
        match &self.mesh {
            Some(MeshSpec::Interval { cells, z0, z1 }) => {
                s.push_str("\n[mesh]\n");
                kv(&mut s, "dim", &1);
                kv(&mut s, "cells", cells);
                kv(&mut s, "z0", &Num(*z0));
                kv(&mut s, "z1", &Num(*z1));
            }
            Some(MeshSpec::Triangles { nx, ny, rect }) => {
                s.push_str("\n[mesh]\n");
                kv(&mut s, "dim", &2);
                kv(&mut s, "nx", nx);
                kv(&mut s, "ny", ny);
                kv(&mut s, "x0", &Num(rect.x0));
                kv(&mut s, "x1", &Num(rect.x1));
                kv(&mut s, "z0", &Num(rect.z0));
                kv(&mut s, "z1", &Num(rect.z1));
            }
            None => {}
        }
        if let Some(t) = &self.time {
            s.push_str("\n[time]\n");
            kv(&mut s, "final_time", &Num(t.final_time));
            kv(&mut s, "steps", &t.steps);
        }
        s.push_str("\n[bc]\n");
        let d = &self.data;
        kv(&mut s, "initial", &d.initial);
        kv(&mut s, "source", &d.source);
        kv(&mut s, "bottom", &d.bottom);
        kv(&mut s, "top", &d.top);
        if matches!(self.mesh, Some(MeshSpec::Triangles { .. })) {
            kv(&mut s, "left", &d.left);
            kv(&mut s, "right", &d.right);
        }
        s.push_str("\n[solver]\n");
        let v = &self.solver;
        if let Some(l) = v.l {
            kv(&mut s, "L", &Num(l));
        }
        kv(&mut s, "atol", &Num(v.atol));
        kv(&mut s, "rtol", &Num(v.rtol));
        kv(&mut s, "max_iters", &v.max_iters);
        kv(&mut s, "lin_tol", &Num(v.lin_tol));
        kv(&mut s, "lin_max_iters", &v.lin_max_iters);
        kv(&mut s, "epsilon", &Num(v.epsilon));
        kv(&mut s, "weight_rule", &v.weight_rule.name());
        kv(&mut s, "physical_bounds", &v.physical_bounds);
        kv(&mut s, "abort_on_nonconvergence", &v.abort_on_nonconvergence);
        s.push_str("\n[output]\n");
        kv(&mut s, "fields_every", &self.output.fields_every);
        kv(&mut s, "certify_probes", &self.output.certify_probes);
        kv(&mut s, "plot_samples", &self.output.plot_samples);
        s
    }

    pub fn soil_model(&self) -> Result<SoilModel> {
        match &self.soil {
            SoilSpec::VanGenuchten { params, table_samples } => Ok(SoilModel::new(*params, *table_samples)?),
            SoilSpec::Linear(_) => Err(CliError::Config("this command needs model = van_genuchten".into())),
        }
    }

    pub fn model(&self) -> Result<Arc<dyn Constitutive>> {
        Ok(match &self.soil {
            SoilSpec::VanGenuchten { .. } => Arc::new(self.soil_model()?),
            SoilSpec::Linear(m) => Arc::new(*m),
        })
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let mesh = self.mesh.as_ref().ok_or_else(|| CliError::Config("missing [mesh] section".into()))?;
        let time = self.time.as_ref().ok_or_else(|| CliError::Config("missing [time] section".into()))?;
        let model = self.model()?;
        let consts = match model.upper_bound() {
            Some(us) if matches!(self.soil, SoilSpec::VanGenuchten { .. }) => vec![("ustar", us)],
            _ => vec![],
        };
        let field = |src: &str| -> Result<Field> {
            let e = Expr::parse(src, &consts).map_err(|e| CliError::Config(format!("'{src}': {e}")))?;
            Ok(Field::new(src, e))
        };
        let mesh = Arc::new(mesh.build()?);
        let mut s = Scenario::new(model.clone(), mesh.clone(), time.final_time, time.steps);
        s.initial = field(&self.data.initial)?;
        s.source = field(&self.data.source)?;
        let d = &self.data;
        for (tag, src) in [
            (BoundaryTag::Bottom, &d.bottom),
            (BoundaryTag::Top, &d.top),
            (BoundaryTag::Left, &d.left),
            (BoundaryTag::Right, &d.right),
        ] {
            if s.boundary.iter().any(|(t, _)| *t == tag) {
                s = s.with_boundary(tag, field(src)?);
            }
        }
        s.epsilon = self.solver.epsilon;
        s.solver = self.solver.lscheme(model.lipschitz_theta());
        s.weight_rule = self.solver.weight_rule;
        s.physical_bounds = self.solver.physical_bounds;
        s.abort_on_nonconvergence = self.solver.abort_on_nonconvergence;
        s.validate()?;
        Ok(s)
    }
}

/// Shortest round-tripping float text.
struct Num(f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

const VG_KEYS: [&str; 9] = ["b", "c", "a", "m", "h_cap", "k_s", "c_scale", "porosity", "table_samples"];

fn parse_soil(s: &mut Section) -> Result<SoilSpec> {
    let (model, line) = s.raw("model").ok_or_else(|| missing(s, "model"))?;
    match model.as_str() {
        "van_genuchten" => {
            let d = SoilParams::default();
            let mut req = |k: &str| -> Result<f64> {
                let v = s.f64(k)?;
                s.require(k, v)
            };
            let (b, c, a, m, k_s, c_scale) = (req("b")?, req("c")?, req("a")?, req("m")?, req("k_s")?, req("c_scale")?);
            let h_cap = s.f64("h_cap")?.unwrap_or(d.h_cap);
            let porosity = s.f64("porosity")?.unwrap_or(d.porosity);
            let table_samples = s.usize("table_samples")?.unwrap_or(DEFAULT_TABLE_SAMPLES);
            s.finish(" for model = van_genuchten")?;
            let params = SoilParams { b, c, a, m, h_cap, k_s, c_scale, porosity };
            if let Err(e) = params.validate() {
                let msg = match e {
                    richards_core::Error::InvalidParams(m) => m,
                    other => other.to_string(),
                };
                let first = msg.split_whitespace().next().unwrap_or("");
                let key = if first == "removability" { "a" } else { first };
                let at = if VG_KEYS.contains(&key) { s.line_of(key) } else { s.line };
                return Err(CliError::config_at(at, msg));
            }
            if table_samples < richards_core::constitutive::MIN_SAMPLES {
                return Err(CliError::config_at(
                    s.line_of("table_samples"),
                    format!("table_samples must be at least {}", richards_core::constitutive::MIN_SAMPLES),
                ));
            }
            Ok(SoilSpec::VanGenuchten { params, table_samples })
        }
        "linear" => {
            let d = LinearModel::default();
            let conductivity = s.f64("conductivity")?.unwrap_or(d.conductivity);
            let convection_z = s.f64("convection_z")?.unwrap_or(d.convection_z);
            s.finish(" for model = linear")?;
            if conductivity < 0.0 {
                return Err(CliError::config_at(
                    s.line_of("conductivity"),
                    format!("conductivity must be >= 0, got {conductivity}"),
                ));
            }
            Ok(SoilSpec::Linear(LinearModel { conductivity, convection_z }))
        }
        other => Err(CliError::config_at(
            line,
            format!("unknown model '{other}' (expected van_genuchten or linear)"),
        )),
    }
}

fn parse_mesh(s: &mut Section) -> Result<Option<MeshSpec>> {
    if s.line == 0 {
        return Ok(None);
    }
    let dim = s.usize("dim")?;
    let dim = s.require("dim", dim)?;
    let spec = match dim {
        1 => {
            let cells = s.usize("cells")?;
            let cells = s.require("cells", cells)?;
            let z0 = s.f64("z0")?.unwrap_or(0.0);
            let z1 = s.f64("z1")?.unwrap_or(1.0);
            s.finish(" for dim = 1")?;
            if cells == 0 {
                return Err(CliError::config_at(s.line_of("cells"), "cells must be at least 1"));
            }
            if !(z1 > z0) {
                return Err(CliError::config_at(s.line_of("z1"), format!("z1 = {z1} must exceed z0 = {z0}")));
            }
            MeshSpec::Interval { cells, z0, z1 }
        }
        2 => {
            let (nx, ny) = (s.usize("nx")?, s.usize("ny")?);
            let (nx, ny) = (s.require("nx", nx)?, s.require("ny", ny)?);
            let rect = Rect {
                x0: s.f64("x0")?.unwrap_or(0.0),
                x1: s.f64("x1")?.unwrap_or(1.0),
                z0: s.f64("z0")?.unwrap_or(0.0),
                z1: s.f64("z1")?.unwrap_or(1.0),
            };
            s.finish(" for dim = 2")?;
            for (k, n) in [("nx", nx), ("ny", ny)] {
                if n == 0 {
                    return Err(CliError::config_at(s.line_of(k), format!("{k} must be at least 1")));
                }
            }
            if !(rect.x1 > rect.x0) {
                return Err(CliError::config_at(s.line_of("x1"), "x1 must exceed x0"));
            }
            if !(rect.z1 > rect.z0) {
                return Err(CliError::config_at(s.line_of("z1"), "z1 must exceed z0"));
            }
            MeshSpec::Triangles { nx, ny, rect }
        }
        d => return Err(CliError::config_at(s.line_of("dim"), format!("dim must be 1 or 2, got {d}"))),
    };
    Ok(Some(spec))
}

fn parse_time(s: &mut Section) -> Result<Option<TimeSpec>> {
    if s.line == 0 {
        return Ok(None);
    }
    let final_time = s.f64("final_time")?;
    let final_time = s.require("final_time", final_time)?;
    let steps = s.usize("steps")?;
    let steps = s.require("steps", steps)?;
    s.finish("")?;
    if !(final_time > 0.0) {
        return Err(CliError::config_at(s.line_of("final_time"), format!("final_time must be > 0, got {final_time}")));
    }
    if steps == 0 {
        return Err(CliError::config_at(s.line_of("steps"), "steps must be at least 1"));
    }
    Ok(Some(TimeSpec { final_time, steps }))
}

fn parse_data(s: &mut Section, soil: &SoilSpec, mesh: Option<&MeshSpec>) -> Result<DataSpec> {
    // placeholder value: only the syntax is checked here
    let consts: &[(&str, f64)] = match soil {
        SoilSpec::VanGenuchten { .. } => &[("ustar", 1.0)],
        SoilSpec::Linear(_) => &[],
    };
    let mut expr = |key: &str| -> Result<String> {
        match s.raw(key) {
            Some((v, line)) => {
                Expr::parse(&v, consts).map_err(|e| CliError::config_at(line, format!("{key}: {e}")))?;
                Ok(v)
            }
            None => Ok("0".into()),
        }
    };
    let mut d = DataSpec {
        initial: expr("initial")?,
        source: expr("source")?,
        bottom: expr("bottom")?,
        top: expr("top")?,
        ..DataSpec::default()
    };
    if !matches!(mesh, Some(MeshSpec::Interval { .. })) {
        d.left = expr("left")?;
        d.right = expr("right")?;
    }
    s.finish(if mesh.map(MeshSpec::dim) == Some(1) { " for dim = 1" } else { "" })?;
    Ok(d)
}

fn parse_solver(s: &mut Section, l_theta: f64) -> Result<SolverSpec> {
    let d = SolverSpec::default();
    let weight_rule = match s.raw("weight_rule") {
        Some((v, line)) => WeightRule::from_name(&v).ok_or_else(|| {
            CliError::config_at(line, format!("weight_rule must be nodal_mean or mean_of_nodal, got '{v}'"))
        })?,
        None => d.weight_rule,
    };
    let spec = SolverSpec {
        l: s.f64("L")?,
        atol: s.f64("atol")?.unwrap_or(d.atol),
        rtol: s.f64("rtol")?.unwrap_or(d.rtol),
        max_iters: s.usize("max_iters")?.unwrap_or(d.max_iters),
        lin_tol: s.f64("lin_tol")?.unwrap_or(d.lin_tol),
        lin_max_iters: s.usize("lin_max_iters")?.unwrap_or(d.lin_max_iters),
        epsilon: s.f64("epsilon")?.unwrap_or(d.epsilon),
        weight_rule,
        physical_bounds: s.bool("physical_bounds")?.unwrap_or(d.physical_bounds),
        abort_on_nonconvergence: s.bool("abort_on_nonconvergence")?.unwrap_or(d.abort_on_nonconvergence),
    };
    s.finish("")?;
    if spec.epsilon < 0.0 {
        return Err(CliError::config_at(s.line_of("epsilon"), format!("epsilon must be >= 0, got {}", spec.epsilon)));
    }
    if let Err(e) = spec.lscheme(l_theta).validate(l_theta) {
        let msg = match e {
            richards_core::Error::InvalidConfig(m) => m,
            other => other.to_string(),
        };
        let key = match msg.split_whitespace().next().unwrap_or("") {
            "L" => "L",
            "atol" => "atol",
            "lin_tol" => "lin_tol",
            _ => "max_iters",
        };
        return Err(CliError::config_at(s.line_of(key), msg));
    }
    Ok(spec)
}

fn parse_output(s: &mut Section) -> Result<OutputSpec> {
    let d = OutputSpec::default();
    let o = OutputSpec {
        fields_every: s.usize("fields_every")?.unwrap_or(d.fields_every),
        certify_probes: s.usize("certify_probes")?.unwrap_or(d.certify_probes),
        plot_samples: s.usize("plot_samples")?.unwrap_or(d.plot_samples),
    };
    s.finish("")?;
    if o.plot_samples < 2 {
        return Err(CliError::config_at(s.line_of("plot_samples"), "plot_samples must be at least 2"));
    }
    if o.certify_probes == 0 {
        return Err(CliError::config_at(s.line_of("certify_probes"), "certify_probes must be at least 1"));
    }
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[soil]
model = van_genuchten
b = 0.6
c = 5/3
a = 5/3
m = 0.6
k_s = 1
c_scale = 1

[mesh]
dim = 1
cells = 20

[time]
final_time = 0.1
steps = 5
";

    fn err_line(text: &str) -> (usize, String) {
        match Config::parse(text).unwrap_err() {
            CliError::ConfigAt { line, msg } => (line, msg),
            e => panic!("expected a line-numbered error, got {e}"),
        }
    }

    #[test]
    fn minimal_config_gets_documented_defaults() {
        let c = Config::parse(MINIMAL).unwrap();
        assert_eq!(c.solver, SolverSpec::default());
        assert_eq!(c.data, DataSpec::default());
        let s = c.scenario().unwrap();
        assert_eq!(s.solver.l, 1.0);
        assert_eq!(s.solver.atol, 1e-10);
        assert_eq!(s.steps, 5);
        assert_eq!(s.mesh.n_nodes(), 21);
        assert_eq!(s.epsilon, 0.0);
    }

    #[test]
    fn default_round_trips() {
        let c = Config::default();
        assert_eq!(Config::parse(&c.emit()).unwrap(), c);
        let mut two_d = Config {
            mesh: Some(MeshSpec::Triangles { nx: 3, ny: 4, rect: Rect { x0: -0.5, x1: 0.5, z0: 0.0, z1: 2.0 } }),
            ..Config::default()
        };
        two_d.data.left = "0.1*z".into();
        two_d.solver.l = Some(1.3);
        two_d.solver.weight_rule = WeightRule::MeanOfNodal;
        assert_eq!(Config::parse(&two_d.emit()).unwrap(), two_d);
        let lin = Config { soil: SoilSpec::Linear(LinearModel { conductivity: 0.3, convection_z: 0.1 }), ..Config::default() };
        let lin = Config { data: DataSpec::default(), time: None, ..lin };
        assert_eq!(Config::parse(&lin.emit()).unwrap(), lin);
    }

    #[test]
    fn rejects_b_out_of_range_at_its_line() {
        let (line, msg) = err_line(&MINIMAL.replace("b = 0.6", "b = 1.5"));
        assert_eq!(line, 3);
        assert!(msg.contains("b must lie in [0,1)"), "{msg}");
    }

    #[test]
    fn rejects_non_removable_singularity() {
        let text = MINIMAL.replace("a = 5/3", "a = 5").replace("m = 0.6", "m = 0.5");
        let (line, msg) = err_line(&text);
        assert_eq!(line, 5);
        assert!(msg.contains("removability exponent"), "{msg}");
    }

    #[test]
    fn structural_errors_carry_lines() {
        assert_eq!(err_line(&format!("{MINIMAL}[bogus]\n")).0, 17);
        let (line, msg) = err_line(&format!("{MINIMAL}colour = red\n"));
        assert_eq!(line, 17);
        assert!(msg.contains("colour"));
        assert_eq!(err_line(&MINIMAL.replace("cells = 20", "cells = 20\ncells = 30")).0, 13);
        assert_eq!(err_line("x = 1\n").0, 1);
        assert_eq!(err_line(&MINIMAL.replace("cells = 20", "cells = 20\nnx = 3")).0, 13);
        assert_eq!(err_line(&MINIMAL.replace("steps = 5", "steps = 2.5")).0, 16);
        assert_eq!(err_line(&format!("{MINIMAL}[bc]\ntop = 1 +\n")).0, 18);
        assert_eq!(err_line(&format!("{MINIMAL}[bc]\nleft = 0\n")).0, 18);
        assert_eq!(err_line(&format!("{MINIMAL}[solver]\nL = 0.4\n")).0, 18);
        assert_eq!(err_line(&format!("{MINIMAL}[solver]\nweight_rule = max\n")).0, 18);
        let (line, msg) = err_line(&MINIMAL.replace("c_scale = 1\n", ""));
        assert_eq!(line, 1);
        assert!(msg.contains("c_scale"));
    }

    #[test]
    fn ustar_only_for_van_genuchten() {
        let lin = "[soil]\nmodel = linear\n[bc]\ntop = ustar\n";
        assert_eq!(err_line(lin).0, 4);
        let s = parse_config(&format!("{MINIMAL}[bc]\ntop = ustar\n")).unwrap();
        let u0 = s.initial_state();
        let bc = s.dirichlet(0.1, &u0).unwrap();
        assert!((bc.values()[1] - s.model.upper_bound().unwrap()).abs() < 1e-15);
    }

    #[test]
    fn soil_only_config_parses_but_has_no_scenario() {
        let c = Config::parse("[soil]\nmodel = linear\n").unwrap();
        assert!(c.mesh.is_none() && c.time.is_none());
        assert!(matches!(c.scenario(), Err(CliError::Config(_))));
        assert!(c.soil_model().is_err());
    }
}
