use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use pinmg_core::consensus::{self, settling_time, synthetic_initial_errors, ChannelSettling};
use pinmg_core::pinsel::{CandidateScore, Score};
use pinmg_core::plant::{self, DgType, EventResponse, RunStatus};
use pinmg_core::spectral::{self, Bound};
use pinmg_core::{
    algorithm1, algorithm2, brute_force_opt, CommNetwork, Error, PinningConfig, Plant, RateTarget, SelectionResult,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{ErrorStart, PinRequest, Resolved, SimMode};
use crate::manifest::OutputEntry;
use crate::CliError;

pub const ANALYSIS_CSV: &str = "analysis.csv";
pub const SELECTION_JSON: &str = "selection.json";
pub const ERRORS_CSV: &str = "errors.csv";
pub const PLANT_CSV: &str = "plant.csv";
pub const METRICS_TOML: &str = "metrics.toml";

/// Single writer for one invocation's artifacts; records each digest.
pub struct OutputDir {
    dir: PathBuf,
    entries: Vec<OutputEntry>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn entries(&self) -> &[OutputEntry] {
        &self.entries
    }

    pub fn write(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        fs::write(self.dir.join(name), data)?;
        self.entries.retain(|e| e.path != name);
        self.entries.push(OutputEntry::of(name, data));
        Ok(())
    }
}

fn set_label(net: &CommNetwork, set: &[usize]) -> String {
    set.iter().map(|&i| net.label(i)).collect::<Vec<_>>().join(";")
}

fn labels(net: &CommNetwork, set: &[usize]) -> Vec<String> {
    set.iter().map(|&i| net.label(i).to_string()).collect()
}

fn bound_cell(b: &Bound, notes: &mut Vec<String>) -> String {
    if let Bound::NotApplicable(reason) = b {
        if !notes.contains(reason) {
            notes.push(reason.clone());
        }
    }
    b.to_string()
}

/// Path and degree metrics, `phi` and its bounds for each candidate set.
pub fn analyze(res: &Resolved, out: &mut OutputDir, stdout: &mut String) -> Result<(), CliError> {
    let net = &res.net;
    let n = net.len();
    let g = res.doc.pinning.gain;
    let interp = res.doc.analyze.interpretation;
    let candidates: Vec<Vec<usize>> = if res.candidates.is_empty() {
        (0..n).map(|i| vec![i]).collect()
    } else {
        res.candidates.clone()
    };

    let mut csv = String::from("set,m,path,deg,phi,phi_lower,phi_upper,note\n");
    let _ = writeln!(stdout, "bounds: {interp}, pinning gain {g}");
    let _ = writeln!(
        stdout,
        "{:<16} {:>6} {:>6} {:>14} {:>14} {:>14}",
        "set", "path", "deg", "phi", "phi_lower", "phi_upper"
    );
    for set in &candidates {
        if set.is_empty() {
            return Err(CliError::config("analyze.candidates: empty pinning set"));
        }
        let rest: Vec<usize> = (0..n).filter(|i| !set.contains(i)).collect();
        let path = net.path_metric(set, &rest)?;
        let deg = net.deg_metric(set)?;
        let s = spectral::summarize(net, set, g, interp)?;
        let mut notes = Vec::new();
        let lo = bound_cell(&s.phi_lower, &mut notes);
        let hi = bound_cell(&s.phi_upper, &mut notes);
        let name = set_label(net, set);
        let _ = writeln!(
            csv,
            "{name},{},{path},{deg},{},{lo},{hi},{}",
            set.len(),
            s.phi,
            notes.join(" / ").replace(',', ";")
        );
        let _ = writeln!(stdout, "{name:<16} {path:>6} {deg:>6} {:>14.6e} {lo:>14} {hi:>14}", s.phi);
        for note in &notes {
            let _ = writeln!(stdout, "  NOT_APPLICABLE: {note}");
        }
    }
    out.write(ANALYSIS_CSV, csv.as_bytes())
}

fn score_json(s: Score) -> serde_json::Value {
    match s {
        Score::Finite(v) => json!(v),
        Score::NegInfinite => json!("-inf"),
    }
}

fn candidate_json(net: &CommNetwork, c: &CandidateScore) -> serde_json::Value {
    json!({
        "node": net.label(c.node),
        "deg": c.deg,
        "path": c.path.to_string(),
        "score": score_json(c.score),
    })
}

fn selection_json(net: &CommNetwork, r: &SelectionResult, target: Option<RateTarget>) -> serde_json::Value {
    let mut v = json!({
        "status": "ok",
        "method": r.method,
        "pinned": labels(net, &r.pinned),
        "pinned_numbers": r.pinned.iter().map(|i| i + 1).collect::<Vec<_>>(),
        "gain": r.gain,
        "achieved_phi": r.achieved_phi,
        "iterations": r.iterations,
        "score_trace": r.score_trace.iter()
            .map(|step| step.iter().map(|c| candidate_json(net, c)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "ties": r.ties.iter().map(|t| labels(net, t)).collect::<Vec<_>>(),
        "alternatives": r.alternatives.iter().map(|t| labels(net, t)).collect::<Vec<_>>(),
    });
    if let Some(t) = target {
        v["lambda_star"] = json!(t.lambda_star);
        v["mu_star"] = json!(t.mu_star);
    }
    v
}

fn to_pretty(v: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s.into_bytes()
}

pub fn pin(res: &Resolved, out: &mut OutputDir, stdout: &mut String) -> Result<(), CliError> {
    let net = &res.net;
    let g = res.doc.pinning.gain;
    let req = res.pin_req.expect("pin requests are resolved for the pin command");
    let (result, target) = match req {
        PinRequest::FixedM(m) => (algorithm1(net, m, g), None),
        PinRequest::Exhaustive(m) => (brute_force_opt(net, m, g), None),
        PinRequest::TargetRate(l) => {
            let t = RateTarget::new(l, res.gains.c_v, res.gains.c_omega)?;
            (algorithm2(net, g, t), Some(t))
        }
    };
    match result {
        Ok(r) => {
            out.write(SELECTION_JSON, &to_pretty(&selection_json(net, &r, target)))?;
            let _ = writeln!(
                stdout,
                "pinned {{{}}} (m = {}), phi = {}",
                labels(net, &r.sorted_set()).join(", "),
                r.pinned.len(),
                r.achieved_phi
            );
            for (k, tie) in r.ties.iter().enumerate().filter(|(_, t)| t.len() > 1) {
                let _ = writeln!(stdout, "  step {}: tie between {}", k + 1, labels(net, tie).join(", "));
            }
            Ok(())
        }
        Err(Error::Unattainable { gain, mu_star, best_phi }) => {
            let v = json!({
                "status": "unattainable",
                "gain": gain,
                "mu_star": mu_star,
                "lambda_star": target.map(|t| t.lambda_star),
                "best_phi": best_phi,
            });
            out.write(SELECTION_JSON, &to_pretty(&v))?;
            let _ = writeln!(stdout, "target unattainable: best phi = {best_phi} < mu* = {mu_star}");
            Err(Error::Unattainable { gain, mu_star, best_phi }.into())
        }
        Err(e) => Err(e.into()),
    }
}

pub fn simulate(res: &Resolved, out: &mut OutputDir, stdout: &mut String) -> Result<(), CliError> {
    let n = res.net.len();
    let pin = PinningConfig::uniform(n, &res.pinned, res.doc.pinning.gain)?;
    match res.doc.simulate.mode {
        SimMode::Errors => simulate_errors(res, &pin, out, stdout),
        SimMode::Plant => simulate_plant(res, &pin, out, stdout),
    }
}

#[derive(Serialize)]
struct ErrorMetrics {
    pinned: Vec<String>,
    phi: f64,
    samples: usize,
    dt: f64,
    t_end: f64,
    voltage: ChannelMetrics,
    frequency: ChannelMetrics,
}

#[derive(Serialize)]
struct ChannelMetrics {
    gain: f64,
    predicted_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    settling_time_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate_from_settling: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate_regression: Option<f64>,
}

fn simulate_errors(res: &Resolved, pin: &PinningConfig, out: &mut OutputDir, stdout: &mut String) -> Result<(), CliError> {
    let sim = &res.doc.simulate;
    let net = &res.net;
    let (ev0, ew0) = match sim.initial {
        ErrorStart::Islanding => {
            let topology = res.topology.clone().expect("islanding start needs a plant");
            Plant::new(topology, net.clone(), res.gains.v_ref)?.islanding_errors(&res.gains)?
        }
        _ => {
            let m_p = match &res.topology {
                Some(t) => t.m_p(),
                None => vec![DgType::TypeI.droop().0; net.len()],
            };
            synthetic_initial_errors(res.gains.v_ref, &m_p, sim.rated_load_w)
        }
    };
    let t_end = sim.t_end.expect("error horizon is resolved");
    let traj = consensus::simulate_errors(net, pin, &res.gains, &ev0, &ew0, sim.dt, t_end)?;
    let mut csv = Vec::new();
    traj.write_csv(net.len(), &mut csv)?;
    out.write(ERRORS_CSV, &csv)?;

    let phi = spectral::phi(net, pin)?;
    let settling = if traj.is_empty() {
        None
    } else {
        Some(settling_time(&traj, sim.band)?)
    };
    let channel = |gain: f64, pick: fn(&ChannelSettling) -> consensus::Settling, norms: Vec<f64>| {
        let t_s = settling.as_ref().and_then(|s| pick(s).seconds());
        let rate = t_s.and_then(|_| consensus::rate_of(&traj.times, &norms, sim.band).ok());
        ChannelMetrics {
            gain,
            predicted_rate: gain * phi,
            settling_time_s: t_s,
            rate_from_settling: rate.map(|r| r.from_settling).filter(|v| v.is_finite()),
            rate_regression: rate.map(|r| r.regression).filter(|v| v.is_finite()),
        }
    };
    let metrics = ErrorMetrics {
        pinned: labels(net, &res.pinned),
        phi,
        samples: traj.len(),
        dt: sim.dt,
        t_end,
        voltage: channel(res.gains.c_v, |s| s.voltage, traj.voltage_norms()),
        frequency: channel(res.gains.c_omega, |s| s.frequency, traj.frequency_norms()),
    };
    out.write(METRICS_TOML, toml_bytes(&metrics)?.as_slice())?;
    let _ = writeln!(stdout, "{} samples, phi = {phi}", traj.len());
    for (name, c) in [("voltage", &metrics.voltage), ("frequency", &metrics.frequency)] {
        match (c.settling_time_s, c.rate_regression) {
            (Some(t), Some(r)) => {
                let _ = writeln!(stdout, "{name}: settles in {t} s, rate {r} 1/s (predicted {})", c.predicted_rate);
            }
            _ => {
                let _ = writeln!(stdout, "{name}: not settled within the horizon");
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PlantMetrics {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    unstable_at_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unstable_detail: Option<String>,
    pinned: Vec<String>,
    samples: usize,
    dt: f64,
    t_end: f64,
    settled: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    sharing_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sharing_error_relative: Option<f64>,
    violations: plant::RelayViolations,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    event: Vec<EventMetrics>,
}

#[derive(Serialize)]
struct EventMetrics {
    t: f64,
    action: String,
    #[serde(flatten)]
    response: EventResponse,
}

fn simulate_plant(res: &Resolved, pin: &PinningConfig, out: &mut OutputDir, stdout: &mut String) -> Result<(), CliError> {
    let topology = res.topology.clone().expect("plant mode needs a plant");
    let scenario = res.scenario.as_ref().expect("plant mode has a scenario");
    let plant = Plant::new(topology, res.net.clone(), res.gains.v_ref)?;
    let record = plant::run_scenario(&plant, scenario, &res.gains, pin)?;
    let mut csv = Vec::new();
    plant::write_plant_csv(&record, &mut csv)?;
    out.write(PLANT_CSV, &csv)?;

    let settled = record.is_completed() && record.is_settled();
    let sharing = settled.then(|| plant::power_sharing_error(&record).ok()).flatten();
    let mean_share = (!record.samples.is_empty()).then(|| {
        let shares = record.shared_power(record.samples.len() - 1);
        shares.iter().sum::<f64>() / shares.len() as f64
    });
    let t_last = record.samples.last().map_or(0.0, |s| s.t);
    let mut events = Vec::new();
    for (k, (t, action)) in record.events.iter().enumerate() {
        let t_next = record.events.get(k + 1).map_or(t_last + record.dt, |e| e.0);
        if let Ok(response) = plant::event_response(&record, *t, t_next, res.doc.simulate.band) {
            events.push(EventMetrics {
                t: *t,
                action: action.clone(),
                response,
            });
        }
    }
    let (status, unstable_at_s, unstable_detail) = match &record.status {
        RunStatus::Completed => ("completed", None, None),
        RunStatus::Unstable { t, detail } => ("unstable", Some(*t), Some(detail.clone())),
    };
    let metrics = PlantMetrics {
        status,
        unstable_at_s,
        unstable_detail,
        pinned: labels(&res.net, &res.pinned),
        samples: record.samples.len(),
        dt: scenario.dt,
        t_end: scenario.t_end,
        settled,
        sharing_error: sharing,
        sharing_error_relative: sharing.zip(mean_share).map(|(s, m)| s / m.abs()),
        violations: record.violations.clone(),
        event: events,
    };
    out.write(METRICS_TOML, toml_bytes(&metrics)?.as_slice())?;

    let _ = writeln!(stdout, "{} samples, status {status}", record.samples.len());
    if let Some(s) = sharing {
        let _ = writeln!(stdout, "power sharing error {s:.3e} (m_P P units)");
    }
    let v = &record.violations;
    let _ = writeln!(
        stdout,
        "relay: {} voltage / {} frequency samples out of band after grace, would trip: {}",
        v.voltage_after_grace, v.frequency_after_grace, v.would_trip
    );
    for e in &metrics.event {
        let r = &e.response;
        let _ = writeln!(
            stdout,
            "event {} at {} s: peak |dw| {:.4}, recovery {}",
            e.action,
            e.t,
            r.peak_frequency_deviation,
            r.frequency_recovery.map_or("none".to_string(), |x| format!("{x:.4} s"))
        );
    }
    match record.status {
        RunStatus::Completed => Ok(()),
        RunStatus::Unstable { t, detail } => Err(Error::Unstable { t, detail }.into()),
    }
}

fn toml_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    toml::to_string(v)
        .map(String::into_bytes)
        .map_err(|e| CliError::Io(format!("metrics: {e}")))
}
