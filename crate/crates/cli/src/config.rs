//! The configuration document and its resolution into run parameters.
//!
//! Precedence, highest first: command-line flags, the document, built-in
//! defaults. Bus and node numbers in the document are 1-based.

use std::fs;
use std::path::{Path, PathBuf};

use pinmg_core::cases;
use pinmg_core::consensus::{phase_voltage, ControllerGains, DEFAULT_BAND, DEFAULT_DT};
use pinmg_core::plant::{
    DgParams, DgType, Event, EventAction, Impedance, InitialCondition, Line, Load, PlantTopology, RelayBand,
    Scenario, DEFAULT_OMEGA_C,
};
use pinmg_core::{BoundInterpretation, CommNetwork};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub network: NetworkSection,
    #[serde(default)]
    pub gains: GainsSection,
    #[serde(default)]
    pub pinning: PinningSection,
    #[serde(default)]
    pub analyze: AnalyzeSection,
    #[serde(default)]
    pub pin: PinSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plant: Option<PlantSection>,
    #[serde(default)]
    pub scenario: ScenarioSection,
}

/// Exactly one of `file`, `text` or `preset`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    FourBus,
    FiveBus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    #[serde(default = "default_c")]
    pub c_v: f64,
    #[serde(default = "default_c")]
    pub c_omega: f64,
    #[serde(default = "default_c")]
    pub c_p: f64,
    /// Per-phase RMS reference. Mutually exclusive with `v_ref_ll`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_ref: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_ref_ll: Option<f64>,
    #[serde(default = "default_omega_ref")]
    pub omega_ref: f64,
}

fn default_c() -> f64 {
    400.0
}

fn default_omega_ref() -> f64 {
    314.15
}

impl Default for GainsSection {
    fn default() -> Self {
        Self {
            c_v: default_c(),
            c_omega: default_c(),
            c_p: default_c(),
            v_ref: None,
            v_ref_ll: None,
            omega_ref: default_omega_ref(),
        }
    }
}

/// A node named either by label or by 1-based number.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeRef {
    Number(usize),
    Label(String),
}

impl NodeRef {
    pub fn resolve(&self, net: &CommNetwork) -> Result<usize, CliError> {
        match self {
            NodeRef::Number(k) if *k >= 1 && *k <= net.len() => Ok(k - 1),
            NodeRef::Number(k) => Err(CliError::config(format!(
                "node number {k} out of range 1..={}",
                net.len()
            ))),
            NodeRef::Label(s) => net.node_by_label(s).ok_or_else(|| {
                CliError::config(format!("unknown node `{s}`; known labels: {}", net.labels().join(", ")))
            }),
        }
    }
}

impl std::str::FromStr for NodeRef {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().parse::<usize>() {
            Ok(k) => NodeRef::Number(k),
            Err(_) => NodeRef::Label(s.trim().to_string()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinningSection {
    #[serde(default)]
    pub set: Vec<NodeRef>,
    #[serde(default = "default_pin_gain")]
    pub gain: f64,
    /// A `selection.json` written by `pin`; its set is used when `set` is empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_selection: Option<PathBuf>,
}

fn default_pin_gain() -> f64 {
    cases::CASE_GAIN
}

impl Default for PinningSection {
    fn default() -> Self {
        Self {
            set: Vec::new(),
            gain: default_pin_gain(),
            from_selection: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSection {
    /// Pinning sets to tabulate; empty means every singleton.
    #[serde(default)]
    pub candidates: Vec<Vec<NodeRef>>,
    #[serde(default)]
    pub interpretation: BoundInterpretation,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PinMode {
    FixedM,
    #[default]
    TargetRate,
    Exhaustive,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinSection {
    #[serde(default)]
    pub mode: PinMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_star: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    #[default]
    Errors,
    Plant,
}

/// Where the error simulation starts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorStart {
    /// Islanding errors of the plant when one is configured, else synthetic.
    #[default]
    Auto,
    Islanding,
    Synthetic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default)]
    pub mode: SimMode,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default = "default_band")]
    pub band: f64,
    #[serde(default)]
    pub initial: ErrorStart,
    #[serde(default = "default_rated_load")]
    pub rated_load_w: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

/// Horizon of an error simulation when none is configured.
pub const DEFAULT_ERROR_HORIZON: f64 = 1.0;

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_band() -> f64 {
    DEFAULT_BAND
}

fn default_rated_load() -> f64 {
    27_300.0
}

fn default_record_every() -> usize {
    1
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            mode: SimMode::default(),
            dt: default_dt(),
            t_end: None,
            band: default_band(),
            initial: ErrorStart::default(),
            rated_load_w: default_rated_load(),
            record_every: default_record_every(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    /// Start from a shipped plant; any list given below replaces its counterpart.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buses: Option<usize>,
    #[serde(default, rename = "dg", skip_serializing_if = "Vec::is_empty")]
    pub dgs: Vec<DgDoc>,
    #[serde(default, rename = "line", skip_serializing_if = "Vec::is_empty")]
    pub lines: Vec<LineDoc>,
    #[serde(default, rename = "load", skip_serializing_if = "Vec::is_empty")]
    pub loads: Vec<LoadDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgDoc {
    pub label: String,
    pub bus: usize,
    #[serde(rename = "type")]
    pub kind: DgType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
    pub r: f64,
    pub x: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineDoc {
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadDoc {
    pub id: String,
    pub bus: usize,
    pub p: f64,
    pub q: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<ScenarioPreset>,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default, rename = "event", skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relay: Option<RelayBand>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioPreset {
    Islanding,
    LoadStep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventDoc {
    pub t: f64,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bus: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Island,
    LoadAdd,
    LoadRemove,
}

/// Command-line values that take precedence over the document.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub mode: Option<String>,
    pub m: Option<usize>,
    pub lambda_star: Option<f64>,
    pub gain: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub pinned: Option<Vec<NodeRef>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Pin,
    Simulate,
}

/// Reads a configuration or a manifest written by an earlier run. A manifest
/// carries its fully resolved document under `[resolved]`.
pub fn load(path: &Path) -> Result<ConfigDoc, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str) -> Result<ConfigDoc, CliError> {
    let value: toml::Table = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
    match value.get("resolved") {
        Some(resolved) => resolved
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| CliError::config(format!("in [resolved]: {}", e.message()))),
        None => toml::from_str(text).map_err(|e| CliError::config(e.to_string())),
    }
}

impl ConfigDoc {
    /// Applies overrides, inlines external files and checks every field, so
    /// the result no longer depends on the filesystem or the command line.
    pub fn resolve(mut self, base_dir: &Path, cmd: Command, ov: &Overrides) -> Result<Resolved, CliError> {
        let net = self.resolve_network(base_dir)?;

        if let Some(g) = ov.gain {
            self.pinning.gain = g;
        }
        if let Some(mode) = &ov.mode {
            match cmd {
                Command::Pin => self.pin.mode = parse_enum(mode, "--mode")?,
                Command::Simulate => self.simulate.mode = parse_enum(mode, "--mode")?,
                Command::Analyze => {
                    self.analyze.interpretation = BoundInterpretation::from_tag(mode).ok_or_else(|| {
                        CliError::config(format!(
                            "--mode `{mode}` is not a bound interpretation (literal, pinned-out-degree, layer-chain)"
                        ))
                    })?
                }
            }
        }
        if let Some(m) = ov.m {
            self.pin.m = Some(m);
        }
        if let Some(l) = ov.lambda_star {
            self.pin.lambda_star = Some(l);
        }
        if let Some(dt) = ov.dt {
            self.simulate.dt = dt;
        }
        if let Some(t) = ov.t_end {
            self.simulate.t_end = Some(t);
        }
        if let Some(p) = &ov.pinned {
            self.pinning.set = p.clone();
            self.pinning.from_selection = None;
        }
        if self.pinning.set.is_empty() {
            if let Some(sel) = self.pinning.from_selection.take() {
                self.pinning.set = read_selection(&base_dir.join(sel))?;
            }
        }
        self.pinning.from_selection = None;

        let gains = self.resolve_gains()?;
        positive("pinning.gain", self.pinning.gain)?;
        let pinned = self
            .pinning
            .set
            .iter()
            .map(|r| r.resolve(&net).map_err(|e| e.context("pinning.set")))
            .collect::<Result<Vec<_>, _>>()?;
        let mut seen = pinned.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != pinned.len() {
            return Err(CliError::config("pinning.set lists a node twice"));
        }
        // Store canonical labels so a replay does not depend on numbering style.
        self.pinning.set = pinned.iter().map(|&i| NodeRef::Label(net.label(i).to_string())).collect();

        let candidates = self
            .analyze
            .candidates
            .iter()
            .map(|set| {
                set.iter()
                    .map(|r| r.resolve(&net).map_err(|e| e.context("analyze.candidates")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;

        let sim = &self.simulate;
        positive("simulate.dt", sim.dt)?;
        if let Some(t) = sim.t_end {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(CliError::config(format!("simulate.t_end must be >= 0, got {t}")));
            }
        }
        if !(sim.band > 0.0 && sim.band < 1.0) {
            return Err(CliError::config(format!("simulate.band must lie in (0, 1), got {}", sim.band)));
        }
        positive("simulate.rated_load_w", sim.rated_load_w)?;
        if sim.record_every == 0 {
            return Err(CliError::config("simulate.record_every must be >= 1"));
        }

        let topology = match &self.plant {
            Some(p) => Some(p.topology(net.len()).map_err(|e| e.context("plant"))?),
            None => None,
        };
        // Inline the preset so the stored document spells out the plant.
        if let Some(t) = &topology {
            self.plant = Some(PlantSection::from_topology(t));
        }

        if self.simulate.initial == ErrorStart::Auto {
            self.simulate.initial = if topology.is_some() {
                ErrorStart::Islanding
            } else {
                ErrorStart::Synthetic
            };
        }
        if self.simulate.initial == ErrorStart::Islanding && topology.is_none() {
            return Err(CliError::config("simulate.initial = \"islanding\" needs a [plant] section"));
        }
        if cmd == Command::Simulate && self.simulate.mode == SimMode::Errors && self.simulate.t_end.is_none() {
            self.simulate.t_end = Some(DEFAULT_ERROR_HORIZON);
        }

        let mut warnings = Vec::new();
        let pin_req = match cmd {
            Command::Pin => Some(self.pin_request()?),
            _ => None,
        };

        let scenario = match (cmd, self.simulate.mode) {
            (Command::Simulate, SimMode::Plant) => {
                if topology.is_none() {
                    return Err(CliError::config("simulate mode `plant` needs a [plant] section"));
                }
                Some(self.resolve_scenario(&mut warnings)?)
            }
            _ => None,
        };

        Ok(Resolved {
            net,
            gains,
            pinned,
            candidates,
            topology,
            scenario,
            pin_req,
            warnings,
            doc: self,
        })
    }

    fn resolve_network(&mut self, base_dir: &Path) -> Result<CommNetwork, CliError> {
        let s = &self.network;
        let given = [s.file.is_some(), s.text.is_some(), s.preset.is_some()];
        if given.iter().filter(|&&b| b).count() != 1 {
            return Err(CliError::config("[network] needs exactly one of `file`, `text` or `preset`"));
        }
        let text = if let Some(f) = &s.file {
            let path = base_dir.join(f);
            fs::read_to_string(&path)
                .map_err(|e| CliError::config(format!("network.file {}: {e}", path.display())))?
        } else if let Some(t) = &s.text {
            t.clone()
        } else {
            match s.preset.unwrap() {
                Preset::FourBus => cases::FOUR_BUS_NET.to_string(),
                Preset::FiveBus => cases::FIVE_BUS_NET.to_string(),
            }
        };
        let net = CommNetwork::parse(&text).map_err(|e| CliError::config(format!("network: {e}")))?;
        self.network = NetworkSection {
            file: None,
            text: Some(text),
            preset: None,
        };
        Ok(net)
    }

    fn resolve_gains(&mut self) -> Result<ControllerGains, CliError> {
        let g = &mut self.gains;
        let v_ref = match (g.v_ref, g.v_ref_ll) {
            (Some(_), Some(_)) => return Err(CliError::config("gains: give only one of `v_ref` and `v_ref_ll`")),
            (Some(v), None) => v,
            (None, Some(ll)) => phase_voltage(ll),
            (None, None) => phase_voltage(380.0),
        };
        g.v_ref = Some(v_ref);
        g.v_ref_ll = None;
        let gains = ControllerGains {
            c_v: g.c_v,
            c_omega: g.c_omega,
            c_p: g.c_p,
            v_ref,
            omega_ref: g.omega_ref,
        };
        gains.validate().map_err(|e| CliError::config(format!("gains: {e}")))?;
        Ok(gains)
    }

    fn pin_request(&self) -> Result<PinRequest, CliError> {
        match self.pin.mode {
            PinMode::FixedM | PinMode::Exhaustive => {
                let m = self
                    .pin
                    .m
                    .ok_or_else(|| CliError::config("pin.m is required for this mode (or pass --m)"))?;
                if m == 0 {
                    return Err(CliError::config("pin.m must be >= 1"));
                }
                Ok(if self.pin.mode == PinMode::FixedM {
                    PinRequest::FixedM(m)
                } else {
                    PinRequest::Exhaustive(m)
                })
            }
            PinMode::TargetRate => {
                let l = self
                    .pin
                    .lambda_star
                    .ok_or_else(|| CliError::config("pin.lambda_star is required for target-rate (or pass --lambda-star)"))?;
                positive("pin.lambda_star", l)?;
                Ok(PinRequest::TargetRate(l))
            }
        }
    }

    fn resolve_scenario(&mut self, warnings: &mut Vec<String>) -> Result<Scenario, CliError> {
        let sim = &self.simulate;
        let sc = &mut self.scenario;
        if let Some(preset) = sc.preset.take() {
            if !sc.events.is_empty() {
                return Err(CliError::config("scenario: give either `preset` or [[scenario.event]] entries"));
            }
            let base = match preset {
                ScenarioPreset::Islanding => cases::islanding_scenario(sim.dt),
                ScenarioPreset::LoadStep => cases::load_step_scenario(sim.dt),
            };
            sc.events = base.events.iter().map(EventDoc::from_event).collect();
            if self.simulate.t_end.is_none() {
                self.simulate.t_end = Some(base.t_end);
            }
        }
        let sim = &self.simulate;
        let sc = &self.scenario;
        let t_end = sim
            .t_end
            .ok_or_else(|| CliError::config("simulate.t_end is required for plant runs (or pass --t-end)"))?;
        let events = sc
            .events
            .iter()
            .enumerate()
            .map(|(k, e)| e.to_event().map_err(|err| err.context(&format!("scenario.event[{k}]"))))
            .collect::<Result<Vec<_>, _>>()?;
        // Events past the horizon would never fire; a shortened run keeps the rest.
        let (events, dropped): (Vec<_>, Vec<_>) = events.into_iter().partition(|e| e.t <= t_end);
        for e in &dropped {
            warnings.push(format!("event `{}` at {} s lies beyond t_end = {t_end} s; skipped", e.action.describe(), e.t));
        }
        let scenario = Scenario {
            t_end,
            dt: sim.dt,
            events,
            relay: sc.relay.unwrap_or_default(),
            initial: sc.initial,
            record_every: sim.record_every,
        };
        self.scenario.events.retain(|e| e.t <= t_end);
        Ok(scenario)
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(format!("{name} must be > 0, got {v}")))
    }
}

fn parse_enum<T: for<'de> Deserialize<'de>>(s: &str, flag: &str) -> Result<T, CliError> {
    T::deserialize(toml::Value::String(s.to_string()))
        .map_err(|e: toml::de::Error| CliError::config(format!("{flag}: {}", e.message())))
}

#[derive(Deserialize)]
struct SelectionFile {
    pinned: Vec<String>,
}

fn read_selection(path: &Path) -> Result<Vec<NodeRef>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("pinning.from_selection {}: {e}", path.display())))?;
    let sel: SelectionFile = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("pinning.from_selection {}: {e}", path.display())))?;
    Ok(sel.pinned.into_iter().map(NodeRef::Label).collect())
}

impl PlantSection {
    fn topology(&self, n_dgs: usize) -> Result<PlantTopology, CliError> {
        let mut t = match self.preset {
            Some(Preset::FourBus) => cases::four_bus_topology(),
            Some(Preset::FiveBus) => cases::five_bus_topology(),
            None => PlantTopology {
                n_buses: 0,
                lines: Vec::new(),
                loads: Vec::new(),
                dgs: Vec::new(),
            },
        };
        let bus = |b: usize, what: &str| -> Result<usize, CliError> {
            b.checked_sub(1)
                .ok_or_else(|| CliError::config(format!("{what}: bus numbers start at 1")))
        };
        if !self.dgs.is_empty() {
            t.dgs = self
                .dgs
                .iter()
                .map(|d| {
                    let (m_p, n_q) = d.kind.droop();
                    Ok(DgParams {
                        label: d.label.clone(),
                        kind: d.kind,
                        m_p: d.m_p.unwrap_or(m_p),
                        n_q: d.n_q.unwrap_or(n_q),
                        omega_c: d.omega_c.unwrap_or(DEFAULT_OMEGA_C),
                        bus: bus(d.bus, "dg")?,
                        coupling: Impedance::new(d.r, d.x),
                    })
                })
                .collect::<Result<_, CliError>>()?;
        }
        if !self.lines.is_empty() {
            t.lines = self
                .lines
                .iter()
                .map(|l| {
                    Ok(Line {
                        from_bus: bus(l.from, "line")?,
                        to_bus: bus(l.to, "line")?,
                        impedance: Impedance::new(l.r, l.x),
                    })
                })
                .collect::<Result<_, CliError>>()?;
        }
        if !self.loads.is_empty() {
            t.loads = self
                .loads
                .iter()
                .map(|l| {
                    Ok(Load {
                        id: l.id.clone(),
                        bus: bus(l.bus, "load")?,
                        p: l.p,
                        q: l.q,
                    })
                })
                .collect::<Result<_, CliError>>()?;
        }
        let highest = t
            .dgs
            .iter()
            .map(|d| d.bus)
            .chain(t.lines.iter().flat_map(|l| [l.from_bus, l.to_bus]))
            .chain(t.loads.iter().map(|l| l.bus))
            .max()
            .map_or(0, |b| b + 1);
        t.n_buses = self.buses.unwrap_or(t.n_buses.max(highest));
        if t.dgs.len() != n_dgs {
            return Err(CliError::config(format!(
                "{} DGs configured but the network has {n_dgs} nodes",
                t.dgs.len()
            )));
        }
        t.validate().map_err(|e| CliError::config(e.to_string()))?;
        Ok(t)
    }

    pub fn from_topology(t: &PlantTopology) -> Self {
        Self {
            preset: None,
            buses: Some(t.n_buses),
            dgs: t
                .dgs
                .iter()
                .map(|d| DgDoc {
                    label: d.label.clone(),
                    bus: d.bus + 1,
                    kind: d.kind,
                    m_p: Some(d.m_p),
                    n_q: Some(d.n_q),
                    omega_c: Some(d.omega_c),
                    r: d.coupling.r,
                    x: d.coupling.x,
                })
                .collect(),
            lines: t
                .lines
                .iter()
                .map(|l| LineDoc {
                    from: l.from_bus + 1,
                    to: l.to_bus + 1,
                    r: l.impedance.r,
                    x: l.impedance.x,
                })
                .collect(),
            loads: t
                .loads
                .iter()
                .map(|l| LoadDoc {
                    id: l.id.clone(),
                    bus: l.bus + 1,
                    p: l.p,
                    q: l.q,
                })
                .collect(),
        }
    }
}

impl EventDoc {
    fn from_event(e: &Event) -> Self {
        let blank = |kind| EventDoc {
            t: e.t,
            kind,
            id: None,
            bus: None,
            p: None,
            q: None,
        };
        match &e.action {
            EventAction::Island => blank(EventKind::Island),
            EventAction::LoadAdd { id, bus, p, q } => EventDoc {
                id: Some(id.clone()),
                bus: Some(bus + 1),
                p: Some(*p),
                q: Some(*q),
                ..blank(EventKind::LoadAdd)
            },
            EventAction::LoadRemove { id, bus } => EventDoc {
                id: Some(id.clone()),
                bus: Some(bus + 1),
                ..blank(EventKind::LoadRemove)
            },
        }
    }

    fn to_event(&self) -> Result<Event, CliError> {
        let need = |field: &str| CliError::config(format!("`{field}` is required for {:?} events", self.kind));
        let bus = || -> Result<usize, CliError> {
            let b = self.bus.ok_or_else(|| need("bus"))?;
            b.checked_sub(1).ok_or_else(|| CliError::config("bus numbers start at 1"))
        };
        let action = match self.kind {
            EventKind::Island => EventAction::Island,
            EventKind::LoadAdd => EventAction::LoadAdd {
                id: self.id.clone().ok_or_else(|| need("id"))?,
                bus: bus()?,
                p: self.p.ok_or_else(|| need("p"))?,
                q: self.q.ok_or_else(|| need("q"))?,
            },
            EventKind::LoadRemove => EventAction::LoadRemove {
                id: self.id.clone().ok_or_else(|| need("id"))?,
                bus: bus()?,
            },
        };
        Ok(Event { t: self.t, action })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PinRequest {
    FixedM(usize),
    TargetRate(f64),
    Exhaustive(usize),
}

/// Everything a command needs, plus the normalised document for the manifest.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub doc: ConfigDoc,
    pub net: CommNetwork,
    pub gains: ControllerGains,
    pub pinned: Vec<usize>,
    pub candidates: Vec<Vec<usize>>,
    pub topology: Option<PlantTopology>,
    pub scenario: Option<Scenario>,
    pub pin_req: Option<PinRequest>,
    pub warnings: Vec<String>,
}
