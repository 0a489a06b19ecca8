//! Reduced-order phasor model of an islanded, droop-controlled microgrid
//! with distributed secondary voltage/frequency control and active-power
//! sharing.
//!
//! Each DG carries the state `(P, Q, V_n, omega_n, delta)`:
//!
//! ```text
//! V_od   = V_n - n_Q Q          omega = omega_n - m_P P
//! P'     = omega_c (P_inst - P) Q'    = omega_c (Q_inst - Q)
//! V_n'   = u_v + n_Q Q'         omega_n' = u_omega + u_p
//! delta' = omega - omega_ref
//! ```
//!
//! so `V_od' = u_v` exactly. `P_inst + j Q_inst` comes from a phasor solve
//! of the network with every DG an ideal source `V_od e^{j delta}` behind
//! its coupling impedance.

mod network;
mod scenario;

pub use network::{Impedance, Line, Load, NetworkSolution, NetworkSolver};
pub use scenario::{
    event_response, power_sharing_error, power_sharing_error_at, run_scenario, write_plant_csv,
    Event, EventAction, EventResponse, InitialCondition, PlantSample, RelayBand, RelayViolations,
    RunStatus, Scenario, TrajectoryRecord,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::consensus::ControllerGains;
use crate::error::{Error, Result};
use crate::netgraph::{CommNetwork, PinningConfig};

pub const DEFAULT_OMEGA_C: f64 = 31.41;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DgType {
    TypeI,
    #[serde(rename = "type-ii")]
    TypeII,
}

impl DgType {
    /// Default `(m_P, n_Q)` for the rating class.
    pub fn droop(self) -> (f64, f64) {
        match self {
            DgType::TypeI => (9.4e-5, 1.3e-3),
            DgType::TypeII => (12.5e-5, 1.5e-3),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DgParams {
    pub label: String,
    pub kind: DgType,
    pub m_p: f64,
    pub n_q: f64,
    pub omega_c: f64,
    pub bus: usize,
    pub coupling: Impedance,
}

impl DgParams {
    pub fn of_type(label: impl Into<String>, kind: DgType, bus: usize, coupling: Impedance) -> Self {
        let (m_p, n_q) = kind.droop();
        Self {
            label: label.into(),
            kind,
            m_p,
            n_q,
            omega_c: DEFAULT_OMEGA_C,
            bus,
            coupling,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("m_p", self.m_p), ("n_q", self.n_q), ("omega_c", self.omega_c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("DG `{}`: {name} must be > 0, got {v}", self.label)));
            }
        }
        if !(self.coupling.r >= 0.0 && self.coupling.x.is_finite()) {
            return Err(Error::Config(format!("DG `{}`: invalid coupling impedance", self.label)));
        }
        Ok(())
    }
}

/// Electrical side of the plant. Loads listed here are connected from the
/// start of a run; scenario events add or remove others.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantTopology {
    pub n_buses: usize,
    pub lines: Vec<Line>,
    pub loads: Vec<Load>,
    pub dgs: Vec<DgParams>,
}

impl PlantTopology {
    pub fn validate(&self) -> Result<()> {
        if self.dgs.is_empty() {
            return Err(Error::Config("plant needs at least one DG".into()));
        }
        if self.n_buses == 0 {
            return Err(Error::Config("plant needs at least one bus".into()));
        }
        for dg in &self.dgs {
            dg.validate()?;
            if dg.bus >= self.n_buses {
                return Err(Error::Config(format!("DG `{}` on missing bus {}", dg.label, dg.bus)));
            }
        }
        for line in &self.lines {
            if line.from_bus >= self.n_buses || line.to_bus >= self.n_buses {
                return Err(Error::Config(format!(
                    "line {}-{} references a missing bus",
                    line.from_bus, line.to_bus
                )));
            }
            if line.from_bus == line.to_bus {
                return Err(Error::Config(format!("line {0}-{0} is a self loop", line.from_bus)));
            }
            if !(line.impedance.magnitude() > 0.0) || line.impedance.r < 0.0 {
                return Err(Error::Config(format!(
                    "line {}-{} needs a positive impedance",
                    line.from_bus, line.to_bus
                )));
            }
        }
        for load in &self.loads {
            check_load(load, self.n_buses)?;
        }
        // Connectivity of the electrical graph.
        let mut seen = vec![false; self.n_buses];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(b) = stack.pop() {
            for line in &self.lines {
                let other = if line.from_bus == b {
                    line.to_bus
                } else if line.to_bus == b {
                    line.from_bus
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    stack.push(other);
                }
            }
        }
        if let Some(b) = seen.iter().position(|s| !s) {
            return Err(Error::Config(format!("bus {b} is not connected to bus 0")));
        }
        Ok(())
    }

    pub fn n_dgs(&self) -> usize {
        self.dgs.len()
    }

    pub fn m_p(&self) -> Vec<f64> {
        self.dgs.iter().map(|d| d.m_p).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.dgs.iter().map(|d| d.label.clone()).collect()
    }

    pub fn solver(&self, loads: &[Load], v_nominal: f64) -> Result<NetworkSolver> {
        let buses: Vec<usize> = self.dgs.iter().map(|d| d.bus).collect();
        let couplings: Vec<Impedance> = self.dgs.iter().map(|d| d.coupling).collect();
        NetworkSolver::new(self.n_buses, &self.lines, loads, &buses, &couplings, v_nominal)
    }
}

pub(crate) fn check_load(load: &Load, n_buses: usize) -> Result<()> {
    if load.bus >= n_buses {
        return Err(Error::Config(format!("load `{}` on missing bus {}", load.id, load.bus)));
    }
    if !(load.p.is_finite() && load.q.is_finite()) {
        return Err(Error::Config(format!("load `{}` has a non-finite rating", load.id)));
    }
    Ok(())
}

/// Per-DG state. `v_n` and `omega_n` are the secondary set points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DgState {
    pub p: f64,
    pub q: f64,
    pub v_n: f64,
    pub omega_n: f64,
    pub delta: f64,
}

const FIELDS: usize = 5;

fn pack(states: &[DgState]) -> Vec<f64> {
    let n = states.len();
    let mut y = vec![0.0; FIELDS * n];
    for (i, s) in states.iter().enumerate() {
        y[i] = s.p;
        y[n + i] = s.q;
        y[2 * n + i] = s.v_n;
        y[3 * n + i] = s.omega_n;
        y[4 * n + i] = s.delta;
    }
    y
}

fn unpack(y: &[f64], states: &mut [DgState]) {
    let n = states.len();
    for (i, s) in states.iter_mut().enumerate() {
        *s = DgState {
            p: y[i],
            q: y[n + i],
            v_n: y[2 * n + i],
            omega_n: y[3 * n + i],
            delta: y[4 * n + i],
        };
    }
}

/// Outputs and control inputs evaluated at one state.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub v_od: Vec<f64>,
    pub omega: Vec<f64>,
    pub power: Vec<Complex64>,
    pub u_v: Vec<f64>,
    pub u_omega: Vec<f64>,
    pub u_p: Vec<f64>,
}

/// A topology plus communication graph with the currently connected loads
/// and their factored network.
#[derive(Clone, Debug)]
pub struct Plant {
    topology: PlantTopology,
    comm: CommNetwork,
    v_nominal: f64,
    loads: Vec<Load>,
    solver: NetworkSolver,
}

impl Plant {
    /// `v_nominal` is the per-phase voltage at which load ratings apply.
    pub fn new(topology: PlantTopology, comm: CommNetwork, v_nominal: f64) -> Result<Self> {
        topology.validate()?;
        if comm.len() != topology.n_dgs() {
            return Err(Error::Config(format!(
                "communication graph has {} nodes for {} DGs",
                comm.len(),
                topology.n_dgs()
            )));
        }
        if !(v_nominal > 0.0 && v_nominal.is_finite()) {
            return Err(Error::InvalidParameter(format!("nominal voltage must be > 0, got {v_nominal}")));
        }
        let loads = topology.loads.clone();
        let solver = topology.solver(&loads, v_nominal)?;
        Ok(Self {
            topology,
            comm,
            v_nominal,
            loads,
            solver,
        })
    }

    pub fn topology(&self) -> &PlantTopology {
        &self.topology
    }

    pub fn comm(&self) -> &CommNetwork {
        &self.comm
    }

    pub fn n_dgs(&self) -> usize {
        self.topology.n_dgs()
    }

    pub fn loads(&self) -> &[Load] {
        &self.loads
    }

    pub fn v_nominal(&self) -> f64 {
        self.v_nominal
    }

    pub fn add_load(&mut self, load: Load) -> Result<()> {
        check_load(&load, self.topology.n_buses)?;
        if self.loads.iter().any(|l| l.id == load.id) {
            return Err(Error::Config(format!("load `{}` is already connected", load.id)));
        }
        let mut loads = self.loads.clone();
        loads.push(load);
        self.solver = self.topology.solver(&loads, self.v_nominal)?;
        self.loads = loads;
        Ok(())
    }

    pub fn remove_load(&mut self, bus: usize, id: &str) -> Result<Load> {
        let pos = self
            .loads
            .iter()
            .position(|l| l.id == id && l.bus == bus)
            .ok_or_else(|| Error::Config(format!("no load `{id}` connected at bus {}", bus + 1)))?;
        let mut loads = self.loads.clone();
        let removed = loads.remove(pos);
        self.solver = self.topology.solver(&loads, self.v_nominal)?;
        self.loads = loads;
        Ok(removed)
    }

    /// Network solve for explicit per-phase source phasors.
    pub fn solve_network(&self, e: &[Complex64]) -> Result<NetworkSolution> {
        if let Some((i, v)) = e.iter().enumerate().find(|(_, v)| !(v.norm() > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "DG {} source magnitude must be > 0, got {}",
                i + 1,
                v.norm()
            )));
        }
        self.solver.solve(e)
    }

    /// Grid-connected state: every DG holds `V_ref` at angle zero, filters
    /// sit at the resulting powers, set points at the references.
    pub fn pre_island_state(&self, gains: &ControllerGains) -> Result<Vec<DgState>> {
        let n = self.n_dgs();
        let e = vec![Complex64::new(gains.v_ref, 0.0); n];
        let sol = self.solve_network(&e)?;
        Ok(sol
            .dg_power
            .iter()
            .map(|s| DgState {
                p: s.re,
                q: s.im,
                v_n: gains.v_ref,
                omega_n: gains.omega_ref,
                delta: 0.0,
            })
            .collect())
    }

    /// Set points at the references with empty filters.
    pub fn nominal_state(&self, gains: &ControllerGains) -> Vec<DgState> {
        vec![
            DgState {
                p: 0.0,
                q: 0.0,
                v_n: gains.v_ref,
                omega_n: gains.omega_ref,
                delta: 0.0,
            };
            self.n_dgs()
        ]
    }

    /// Voltage and frequency errors right after the secondary layer takes
    /// over from the pre-island state.
    pub fn islanding_errors(&self, gains: &ControllerGains) -> Result<(Vec<f64>, Vec<f64>)> {
        let states = self.pre_island_state(gains)?;
        let (v_od, omega) = self.outputs(&states);
        Ok((
            v_od.iter().map(|v| v - gains.v_ref).collect(),
            omega.iter().map(|w| w - gains.omega_ref).collect(),
        ))
    }

    pub fn outputs(&self, states: &[DgState]) -> (Vec<f64>, Vec<f64>) {
        states
            .iter()
            .zip(&self.topology.dgs)
            .map(|(s, d)| (s.v_n - d.n_q * s.q, s.omega_n - d.m_p * s.p))
            .unzip()
    }

    pub fn evaluate(&self, states: &[DgState], gains: &ControllerGains, pin: &PinningConfig) -> Result<Evaluation> {
        let n = self.n_dgs();
        if states.len() != n || pin.n_nodes() != n {
            return Err(Error::InvalidParameter(format!(
                "expected {n} DG states and pinning entries, got {} and {}",
                states.len(),
                pin.n_nodes()
            )));
        }
        let (v_od, omega) = self.outputs(states);
        let e: Vec<Complex64> = states
            .iter()
            .zip(&v_od)
            .map(|(s, &v)| Complex64::from_polar(v, s.delta))
            .collect();
        let power = self.solve_network(&e)?.dg_power;

        let e_v: Vec<f64> = v_od.iter().map(|v| v - gains.v_ref).collect();
        let e_w: Vec<f64> = omega.iter().map(|w| w - gains.omega_ref).collect();
        let shared: Vec<f64> = states.iter().zip(&self.topology.dgs).map(|(s, d)| d.m_p * s.p).collect();
        let mut u_v = vec![0.0; n];
        let mut u_omega = vec![0.0; n];
        let mut u_p = vec![0.0; n];
        for i in 0..n {
            let (mut sv, mut sw, mut sp) = (0.0, 0.0, 0.0);
            for j in self.comm.in_neighbors(i) {
                sv += e_v[i] - e_v[j];
                sw += e_w[i] - e_w[j];
                sp += shared[i] - shared[j];
            }
            let g = pin.gain(i);
            u_v[i] = -gains.c_v * (sv + g * e_v[i]);
            u_omega[i] = -gains.c_omega * (sw + g * e_w[i]);
            u_p[i] = -gains.c_p * sp;
        }
        Ok(Evaluation {
            v_od,
            omega,
            power,
            u_v,
            u_omega,
            u_p,
        })
    }

    fn derivative(
        &self,
        y: &[f64],
        dy: &mut [f64],
        scratch: &mut [DgState],
        gains: &ControllerGains,
        pin: &PinningConfig,
    ) -> Result<()> {
        unpack(y, scratch);
        let ev = self.evaluate(scratch, gains, pin)?;
        let n = scratch.len();
        for (i, (s, d)) in scratch.iter().zip(&self.topology.dgs).enumerate() {
            let p_dot = d.omega_c * (ev.power[i].re - s.p);
            let q_dot = d.omega_c * (ev.power[i].im - s.q);
            dy[i] = p_dot;
            dy[n + i] = q_dot;
            dy[2 * n + i] = ev.u_v[i] + d.n_q * q_dot;
            dy[3 * n + i] = ev.u_omega[i] + ev.u_p[i];
            dy[4 * n + i] = ev.omega[i] - gains.omega_ref;
        }
        Ok(())
    }

    /// Largest stable step for the explicit integrator, from the filter
    /// pole and the consensus spectrum (whichever binds).
    pub fn max_stable_dt(&self, gains: &ControllerGains, pin: &PinningConfig) -> Result<f64> {
        use crate::ode::REAL_AXIS_LIMIT;
        let m = crate::spectral::pinned_laplacian(&self.comm, pin)?;
        let rho = crate::spectral::spectral_radius(&m, self.comm.is_undirected())?;
        let c = gains.c_v.max(gains.c_omega);
        let wc = self.topology.dgs.iter().fold(0.0f64, |a, d| a.max(d.omega_c));
        let fastest = (c * rho).max(wc);
        Ok(if fastest > 0.0 { REAL_AXIS_LIMIT / fastest } else { f64::INFINITY })
    }

    /// One RK4 step of the closed-loop plant.
    pub fn step(
        &self,
        states: &mut [DgState],
        gains: &ControllerGains,
        pin: &PinningConfig,
        dt: f64,
    ) -> Result<()> {
        let mut stepper = Stepper::new(self.n_dgs());
        stepper.step(self, states, gains, pin, dt)
    }
}

/// Reusable buffers for repeated plant steps.
pub(crate) struct Stepper {
    rk: crate::ode::Rk4,
    y: Vec<f64>,
    scratch: Vec<DgState>,
}

impl Stepper {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            rk: crate::ode::Rk4::new(FIELDS * n),
            y: vec![0.0; FIELDS * n],
            scratch: vec![
                DgState {
                    p: 0.0,
                    q: 0.0,
                    v_n: 0.0,
                    omega_n: 0.0,
                    delta: 0.0
                };
                n
            ],
        }
    }

    pub(crate) fn step(
        &mut self,
        plant: &Plant,
        states: &mut [DgState],
        gains: &ControllerGains,
        pin: &PinningConfig,
        dt: f64,
    ) -> Result<()> {
        self.y.copy_from_slice(&pack(states));
        let scratch = &mut self.scratch;
        self.rk
            .step(|y, dy| plant.derivative(y, dy, scratch, gains, pin), &mut self.y, dt)?;
        if let Some(k) = self.y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                t: f64::NAN,
                detail: format!("state component {k} after step"),
            });
        }
        unpack(&self.y, states);
        Ok(())
    }
}
