//! Event-driven plant runs, relay-band bookkeeping and post-run metrics.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{check_load, Load, Plant, Stepper};
use crate::consensus::{max_abs, ControllerGains};
use crate::error::{Error, Result};
use crate::netgraph::PinningConfig;

/// Deviations below this are treated as already recovered.
const RECOVERY_FLOOR: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventAction {
    Island,
    LoadAdd { id: String, bus: usize, p: f64, q: f64 },
    LoadRemove { id: String, bus: usize },
}

impl EventAction {
    /// Human-readable summary with 1-based bus numbers.
    pub fn describe(&self) -> String {
        match self {
            EventAction::Island => "island".into(),
            EventAction::LoadAdd { id, bus, p, q } => format!("load-add {id} bus {} ({p} W, {q} var)", bus + 1),
            EventAction::LoadRemove { id, bus } => format!("load-remove {id} bus {}", bus + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    #[serde(flatten)]
    pub action: EventAction,
}

/// Protective relay limits. Excursions are only counted; nothing trips.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelayBand {
    pub v_min_pu: f64,
    pub v_max_pu: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub grace_cycles: u32,
    pub nominal_hz: f64,
}

impl Default for RelayBand {
    fn default() -> Self {
        Self {
            v_min_pu: 0.88,
            v_max_pu: 1.1,
            omega_min: 295.3,
            omega_max: 317.3,
            grace_cycles: 20,
            nominal_hz: 50.0,
        }
    }
}

impl RelayBand {
    pub fn grace_seconds(&self) -> f64 {
        self.grace_cycles as f64 / self.nominal_hz
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialCondition {
    /// Rated-load power flow with every DG at the references.
    #[default]
    PreIsland,
    /// Set points at the references, filters empty.
    Nominal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub t_end: f64,
    pub dt: f64,
    pub events: Vec<Event>,
    pub relay: RelayBand,
    pub initial: InitialCondition,
    /// Keep every n-th integration step in the record.
    pub record_every: usize,
}

impl Scenario {
    pub fn new(t_end: f64, dt: f64) -> Self {
        Self {
            t_end,
            dt,
            events: Vec::new(),
            relay: RelayBand::default(),
            initial: InitialCondition::default(),
            record_every: 1,
        }
    }

    pub fn with_event(mut self, t: f64, action: EventAction) -> Self {
        self.events.push(Event { t, action });
        self
    }

    pub fn island_time(&self) -> Option<f64> {
        self.events
            .iter()
            .find(|e| e.action == EventAction::Island)
            .map(|e| e.t)
    }

    /// Checks timing and replays the load events against the plant's
    /// initial loads so bad references surface before integrating.
    pub fn validate(&self, plant: &Plant) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be >= 1".into()));
        }
        let mut last = f64::NEG_INFINITY;
        let mut islands = 0;
        let mut loads: Vec<Load> = plant.loads().to_vec();
        for ev in &self.events {
            if !(ev.t >= 0.0 && ev.t <= self.t_end) {
                return Err(Error::Config(format!("event at t = {} outside [0, {}]", ev.t, self.t_end)));
            }
            if ev.t <= last {
                return Err(Error::Config(format!("event times must increase strictly (t = {})", ev.t)));
            }
            last = ev.t;
            match &ev.action {
                EventAction::Island => islands += 1,
                EventAction::LoadAdd { id, bus, p, q } => {
                    let load = Load { id: id.clone(), bus: *bus, p: *p, q: *q };
                    check_load(&load, plant.topology().n_buses)?;
                    if loads.iter().any(|l| &l.id == id) {
                        return Err(Error::Config(format!("load `{id}` added twice")));
                    }
                    loads.push(load);
                }
                EventAction::LoadRemove { id, bus } => {
                    let pos = loads
                        .iter()
                        .position(|l| &l.id == id && l.bus == *bus)
                        .ok_or_else(|| {
                            Error::Config(format!("event at t = {}: no load `{id}` at bus {}", ev.t, bus + 1))
                        })?;
                    loads.remove(pos);
                }
            }
        }
        if islands > 1 {
            return Err(Error::Config("at most one island event".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantSample {
    pub t: f64,
    pub islanded: bool,
    pub v_od: Vec<f64>,
    pub omega: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub u_v: Vec<f64>,
}

/// Relay-band excursions counted per integration step after islanding.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RelayViolations {
    pub voltage_samples: usize,
    pub frequency_samples: usize,
    pub voltage_after_grace: usize,
    pub frequency_after_grace: usize,
    pub longest_excursion_s: f64,
    pub would_trip: bool,
}

impl RelayViolations {
    pub fn after_grace(&self) -> usize {
        self.voltage_after_grace + self.frequency_after_grace
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    Unstable { t: f64, detail: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub labels: Vec<String>,
    pub m_p: Vec<f64>,
    pub v_ref: f64,
    pub omega_ref: f64,
    pub dt: f64,
    pub island_time: Option<f64>,
    pub events: Vec<(f64, String)>,
    pub samples: Vec<PlantSample>,
    pub violations: RelayViolations,
    pub status: RunStatus,
}

impl TrajectoryRecord {
    pub fn is_completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn ensure_stable(&self) -> Result<()> {
        match &self.status {
            RunStatus::Completed => Ok(()),
            RunStatus::Unstable { t, detail } => Err(Error::Unstable {
                t: *t,
                detail: detail.clone(),
            }),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn frequency_error_norms(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| s.omega.iter().fold(0.0f64, |m, w| m.max((w - self.omega_ref).abs())))
            .collect()
    }

    pub fn voltage_error_norms(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| s.v_od.iter().fold(0.0f64, |m, v| m.max((v - self.v_ref).abs())))
            .collect()
    }

    /// `m_P,i P_i` for every DG at sample `k`.
    pub fn shared_power(&self, k: usize) -> Vec<f64> {
        self.samples[k].p.iter().zip(&self.m_p).map(|(p, m)| p * m).collect()
    }

    /// Steady if over the last tenth of the record the sharing terms drift
    /// by less than 0.1% of their mean and frequencies by less than 1e-3 rad/s.
    pub fn is_settled(&self) -> bool {
        let n = self.samples.len();
        if n < 2 || !self.is_completed() {
            return false;
        }
        let start = n - (n / 10).max(2);
        let last = self.shared_power(n - 1);
        let scale = last.iter().map(|x| x.abs()).sum::<f64>() / last.len() as f64;
        (start..n).all(|k| {
            let sp = self.shared_power(k);
            let sharing_ok = sp.iter().zip(&last).all(|(a, b)| (a - b).abs() <= 1e-3 * scale + 1e-9);
            let freq_ok = self.samples[k]
                .omega
                .iter()
                .zip(&self.samples[n - 1].omega)
                .all(|(a, b)| (a - b).abs() <= 1e-3);
            sharing_ok && freq_ok
        })
    }
}

/// Integrates the scenario. Divergence ends the run early with an
/// `Unstable` status so the partial record can still be written.
pub fn run_scenario(
    plant: &Plant,
    scenario: &Scenario,
    gains: &ControllerGains,
    pin: &PinningConfig,
) -> Result<TrajectoryRecord> {
    gains.validate()?;
    scenario.validate(plant)?;
    let n = plant.n_dgs();
    if pin.n_nodes() != n {
        return Err(Error::InvalidPinning(format!(
            "pinning covers {} nodes, plant has {n} DGs",
            pin.n_nodes()
        )));
    }
    let dt = scenario.dt;
    let limit = plant.max_stable_dt(gains, pin)?;
    if dt > limit {
        return Err(Error::StepTooLarge {
            dt,
            suggested_dt: 0.5 * limit,
        });
    }

    let topo = plant.topology();
    let mut record = TrajectoryRecord {
        labels: topo.labels(),
        m_p: topo.m_p(),
        v_ref: gains.v_ref,
        omega_ref: gains.omega_ref,
        dt,
        island_time: None,
        events: Vec::new(),
        samples: Vec::new(),
        violations: RelayViolations::default(),
        status: RunStatus::Completed,
    };
    if scenario.t_end == 0.0 {
        return Ok(record);
    }

    let mut plant = plant.clone();
    let mut states = match scenario.initial {
        InitialCondition::PreIsland => plant.pre_island_state(gains)?,
        InitialCondition::Nominal => plant.nominal_state(gains),
    };
    let mut islanded = scenario.island_time().is_none();
    if islanded {
        record.island_time = Some(0.0);
    }
    let steps = (scenario.t_end / dt).round() as usize;
    let event_step: Vec<usize> = scenario.events.iter().map(|e| (e.t / dt).round() as usize).collect();
    let mut next_event = 0;
    let mut stepper = Stepper::new(n);
    let relay = scenario.relay;
    let (v_lo, v_hi) = (relay.v_min_pu * gains.v_ref, relay.v_max_pu * gains.v_ref);
    let mut run_len = 0usize;
    let mut longest = 0usize;

    for k in 0..=steps {
        let t = k as f64 * dt;
        while next_event < scenario.events.len() && event_step[next_event] <= k {
            let ev = &scenario.events[next_event];
            match &ev.action {
                EventAction::Island => {
                    islanded = true;
                    record.island_time = Some(t);
                }
                EventAction::LoadAdd { id, bus, p, q } => {
                    plant.add_load(Load { id: id.clone(), bus: *bus, p: *p, q: *q })?;
                    if !islanded && scenario.initial == InitialCondition::PreIsland {
                        states = plant.pre_island_state(gains)?;
                    }
                }
                EventAction::LoadRemove { id, bus } => {
                    plant.remove_load(*bus, id)?;
                    if !islanded && scenario.initial == InitialCondition::PreIsland {
                        states = plant.pre_island_state(gains)?;
                    }
                }
            }
            record.events.push((t, ev.action.describe()));
            next_event += 1;
        }

        let sample = if islanded {
            let ev = plant.evaluate(&states, gains, pin)?;
            PlantSample {
                t,
                islanded,
                v_od: ev.v_od,
                omega: ev.omega,
                p: states.iter().map(|s| s.p).collect(),
                q: states.iter().map(|s| s.q).collect(),
                u_v: ev.u_v,
            }
        } else {
            PlantSample {
                t,
                islanded,
                v_od: vec![gains.v_ref; n],
                omega: vec![gains.omega_ref; n],
                p: states.iter().map(|s| s.p).collect(),
                q: states.iter().map(|s| s.q).collect(),
                u_v: vec![0.0; n],
            }
        };

        let mut divergence = None;
        if islanded {
            let after_grace = t >= record.island_time.unwrap_or(0.0) + relay.grace_seconds() - 0.5 * dt;
            let v_bad = sample.v_od.iter().any(|&v| v < v_lo || v > v_hi);
            let w_bad = sample.omega.iter().any(|&w| w < relay.omega_min || w > relay.omega_max);
            let viol = &mut record.violations;
            if v_bad {
                viol.voltage_samples += 1;
                viol.voltage_after_grace += after_grace as usize;
            }
            if w_bad {
                viol.frequency_samples += 1;
                viol.frequency_after_grace += after_grace as usize;
            }
            run_len = if v_bad || w_bad { run_len + 1 } else { 0 };
            longest = longest.max(run_len);

            let ev_max = max_abs(&sample.v_od.iter().map(|v| v - gains.v_ref).collect::<Vec<_>>());
            let ew_max = max_abs(&sample.omega.iter().map(|w| w - gains.omega_ref).collect::<Vec<_>>());
            if !(ev_max <= gains.v_ref) || !(ew_max <= 0.5 * gains.omega_ref) {
                divergence = Some(format!(
                    "max |e_v| = {ev_max:.6e} V, max |e_w| = {ew_max:.6e} rad/s"
                ));
            }
        }

        if k % scenario.record_every == 0 || k == steps || divergence.is_some() {
            record.samples.push(sample);
        }
        if let Some(detail) = divergence {
            record.status = RunStatus::Unstable { t, detail };
            break;
        }
        if k < steps && islanded {
            match stepper.step(&plant, &mut states, gains, pin, dt) {
                Ok(()) => {}
                Err(Error::NonFinite { detail, .. }) => {
                    record.status = RunStatus::Unstable { t: t + dt, detail };
                    break;
                }
                Err(e) => return Err(e),
            }
        }
    }
    record.violations.longest_excursion_s = longest as f64 * dt;
    record.violations.would_trip = record.violations.longest_excursion_s > relay.grace_seconds();
    Ok(record)
}

/// Largest pairwise `|m_P,i P_i - m_P,j P_j|` at the final sample of a
/// settled record.
pub fn power_sharing_error(record: &TrajectoryRecord) -> Result<f64> {
    if !record.is_settled() {
        return Err(Error::NotSettled);
    }
    Ok(power_sharing_error_at(record, record.samples.len() - 1))
}

pub fn power_sharing_error_at(record: &TrajectoryRecord, k: usize) -> f64 {
    let sp = record.shared_power(k);
    let hi = sp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = sp.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Transient after one event, measured on `[t_event, t_next)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventResponse {
    pub t_event: f64,
    pub t_next: f64,
    pub peak_frequency_deviation: f64,
    pub peak_voltage_deviation: f64,
    /// Seconds after the event until the frequency error stays inside
    /// `band` times its peak; `None` if it never does before `t_next`.
    pub frequency_recovery: Option<f64>,
    pub voltage_recovery: Option<f64>,
}

impl EventResponse {
    pub fn recovered(&self) -> bool {
        self.frequency_recovery.is_some() && self.voltage_recovery.is_some()
    }
}

pub fn event_response(record: &TrajectoryRecord, t_event: f64, t_next: f64, band: f64) -> Result<EventResponse> {
    if !(t_next > t_event) {
        return Err(Error::InvalidParameter(format!("empty window [{t_event}, {t_next})")));
    }
    let eps = 0.5 * record.dt;
    let idx: Vec<usize> = (0..record.samples.len())
        .filter(|&k| {
            let t = record.samples[k].t;
            t >= t_event - eps && t < t_next - eps
        })
        .collect();
    if idx.is_empty() {
        return Err(Error::InvalidParameter(format!("no samples in [{t_event}, {t_next})")));
    }
    let wn = record.frequency_error_norms();
    let vn = record.voltage_error_norms();
    let channel = |norms: &[f64]| {
        let peak = idx.iter().fold(0.0f64, |m, &k| m.max(norms[k]));
        if peak <= RECOVERY_FLOOR {
            return (peak, Some(0.0));
        }
        let threshold = band * peak;
        let last_bad = idx.iter().rev().find(|&&k| norms[k] > threshold);
        let recovery = match last_bad {
            None => Some(0.0),
            Some(&k) if k == *idx.last().unwrap() => None,
            Some(&k) => Some(record.samples[k + 1].t - t_event),
        };
        (peak, recovery)
    };
    let (pw, rw) = channel(&wn);
    let (pv, rv) = channel(&vn);
    Ok(EventResponse {
        t_event,
        t_next,
        peak_frequency_deviation: pw,
        peak_voltage_deviation: pv,
        frequency_recovery: rw,
        voltage_recovery: rv,
    })
}

/// Header `t,V_od_i..,w_i..,P_i..,Q_i..,mP_P_i..` with 1-based DG indices.
pub fn write_plant_csv<W: Write>(record: &TrajectoryRecord, mut w: W) -> io::Result<()> {
    let n = record.labels.len();
    let mut header = vec!["t".to_string()];
    for prefix in ["V_od", "w", "P", "Q", "mP_P"] {
        header.extend((1..=n).map(|i| format!("{prefix}_{i}")));
    }
    writeln!(w, "{}", header.join(","))?;
    for (k, s) in record.samples.iter().enumerate() {
        let mut row = vec![s.t.to_string()];
        for col in [&s.v_od, &s.omega, &s.p, &s.q] {
            row.extend(col.iter().map(f64::to_string));
        }
        row.extend(record.shared_power(k).iter().map(f64::to_string));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
