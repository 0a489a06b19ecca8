//! Closed-loop regulation-error dynamics `e' = -c (L + G Z) e` for voltage
//! and frequency, plus the settling/rate metrics read off a trajectory.

use std::convert::Infallible;
use std::io::{self, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{CommNetwork, PinningConfig};
use crate::ode::{Rk4, REAL_AXIS_LIMIT};
use crate::spectral;

pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_BAND: f64 = 0.01;

/// Secondary-control gains and references. Voltages are per-phase RMS.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControllerGains {
    pub c_v: f64,
    pub c_omega: f64,
    pub c_p: f64,
    pub v_ref: f64,
    pub omega_ref: f64,
}

/// 380 V line-to-line expressed per phase.
pub fn phase_voltage(v_line_to_line: f64) -> f64 {
    v_line_to_line / 3f64.sqrt()
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self {
            c_v: 400.0,
            c_omega: 400.0,
            c_p: 400.0,
            v_ref: phase_voltage(380.0),
            omega_ref: 314.15,
        }
    }
}

impl ControllerGains {
    pub fn validate(&self) -> Result<()> {
        // Zero control gains are allowed: they switch a loop off.
        let gains = [("c_v", self.c_v), ("c_omega", self.c_omega), ("c_p", self.c_p)];
        if let Some((name, v)) = gains.iter().find(|(_, v)| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
        }
        let refs = [("v_ref", self.v_ref), ("omega_ref", self.omega_ref)];
        match refs.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            Some((name, v)) => Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}"))),
            None => Ok(()),
        }
    }
}

/// Uniformly sampled voltage and frequency error trajectories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorTrajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub e_v: Vec<Vec<f64>>,
    pub e_omega: Vec<Vec<f64>>,
}

impl ErrorTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn voltage_norms(&self) -> Vec<f64> {
        self.e_v.iter().map(|e| max_abs(e)).collect()
    }

    pub fn frequency_norms(&self) -> Vec<f64> {
        self.e_omega.iter().map(|e| max_abs(e)).collect()
    }

    /// Header `t,e_v_1..e_v_N,e_w_1..e_w_N`, one row per sample.
    pub fn write_csv<W: Write>(&self, n_nodes: usize, mut w: W) -> io::Result<()> {
        let mut header = vec!["t".to_string()];
        header.extend((1..=n_nodes).map(|i| format!("e_v_{i}")));
        header.extend((1..=n_nodes).map(|i| format!("e_w_{i}")));
        writeln!(w, "{}", header.join(","))?;
        for k in 0..self.len() {
            let mut row = vec![self.times[k].to_string()];
            row.extend(self.e_v[k].iter().map(f64::to_string));
            row.extend(self.e_omega[k].iter().map(f64::to_string));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Uniform `-5%` voltage sag and droop frequency offsets at an even split of
/// the rated load.
pub fn synthetic_initial_errors(v_ref: f64, m_p: &[f64], rated_load_w: f64) -> (Vec<f64>, Vec<f64>) {
    let n = m_p.len();
    let share = rated_load_w / n as f64;
    (vec![-0.05 * v_ref; n], m_p.iter().map(|m| -m * share).collect())
}

/// Integrates both error systems with RK4 at fixed `dt` over `[0, t_end]`.
pub fn simulate_errors(
    net: &CommNetwork,
    pin: &PinningConfig,
    gains: &ControllerGains,
    e_v0: &[f64],
    e_omega0: &[f64],
    dt: f64,
    t_end: f64,
) -> Result<ErrorTrajectory> {
    gains.validate()?;
    let n = net.len();
    if e_v0.len() != n || e_omega0.len() != n {
        return Err(Error::InvalidParameter(format!(
            "initial errors must have {n} entries (got {} and {})",
            e_v0.len(),
            e_omega0.len()
        )));
    }
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need dt > 0 and t_end >= 0 (dt = {dt}, t_end = {t_end})"
        )));
    }
    let m = spectral::pinned_laplacian(net, pin)?;
    let radius = spectral::spectral_radius(&m, net.is_undirected())?;
    let c_max = gains.c_v.max(gains.c_omega);
    if dt * c_max * radius > REAL_AXIS_LIMIT {
        return Err(Error::StepTooLarge {
            dt,
            suggested_dt: 0.5 * REAL_AXIS_LIMIT / (c_max * radius),
        });
    }

    let mut traj = ErrorTrajectory {
        dt,
        times: Vec::new(),
        e_v: Vec::new(),
        e_omega: Vec::new(),
    };
    if t_end == 0.0 {
        return Ok(traj);
    }
    let steps = (t_end / dt).round() as usize;
    traj.times.reserve(steps + 1);

    let mut y: Vec<f64> = e_v0.iter().chain(e_omega0).copied().collect();
    let mut rk = Rk4::new(2 * n);
    let rhs = |y: &[f64], dy: &mut [f64]| {
        linear_rhs(&m, gains.c_v, &y[..n], &mut dy[..n]);
        linear_rhs(&m, gains.c_omega, &y[n..], &mut dy[n..]);
        Ok::<_, Infallible>(())
    };
    for k in 0..=steps {
        let t = k as f64 * dt;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                t,
                detail: format!("state {y:?}"),
            });
        }
        traj.times.push(t);
        traj.e_v.push(y[..n].to_vec());
        traj.e_omega.push(y[n..].to_vec());
        if k < steps {
            rk.step(rhs, &mut y, dt).unwrap_or_else(|e: Infallible| match e {});
        }
    }
    Ok(traj)
}

fn linear_rhs(m: &DMatrix<f64>, c: f64, e: &[f64], out: &mut [f64]) {
    let n = e.len();
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += m[(i, j)] * e[j];
        }
        out[i] = -c * acc;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "seconds", rename_all = "kebab-case")]
pub enum Settling {
    Settled(f64),
    NotSettled,
}

impl Settling {
    pub fn seconds(self) -> Option<f64> {
        match self {
            Settling::Settled(t) => Some(t),
            Settling::NotSettled => None,
        }
    }
}

/// Earliest sample time after which `norms` stays within `band * norms[0]`.
pub fn settling_of(times: &[f64], norms: &[f64], band: f64) -> Result<Settling> {
    check_band(band)?;
    let Some(&first) = norms.first() else {
        return Ok(Settling::NotSettled);
    };
    let threshold = band * first;
    match norms.iter().rposition(|&v| v > threshold) {
        None => Ok(Settling::Settled(times[0])),
        Some(last) if last + 1 < times.len() => Ok(Settling::Settled(times[last + 1])),
        Some(_) => Ok(Settling::NotSettled),
    }
}

fn check_band(band: f64) -> Result<()> {
    if band > 0.0 && band < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("band must lie in (0, 1), got {band}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSettling {
    pub voltage: Settling,
    pub frequency: Settling,
}

pub fn settling_time(traj: &ErrorTrajectory, band: f64) -> Result<ChannelSettling> {
    Ok(ChannelSettling {
        voltage: settling_of(&traj.times, &traj.voltage_norms(), band)?,
        frequency: settling_of(&traj.times, &traj.frequency_norms(), band)?,
    })
}

/// Two estimates of an exponential decay rate (1/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// `-ln(band) / t_s`.
    pub from_settling: f64,
    /// Negated least-squares slope of `ln |e|` after settling.
    pub regression: f64,
}

/// Samples below this fraction of the initial norm are at round-off level
/// and are left out of the regression.
const REGRESSION_FLOOR: f64 = 1e-12;

pub fn rate_of(times: &[f64], norms: &[f64], band: f64) -> Result<RateEstimate> {
    let t_s = settling_of(times, norms, band)?.seconds().ok_or(Error::NotSettled)?;
    let floor = REGRESSION_FLOOR * norms[0];
    let mut pts: Vec<(f64, f64)> = times
        .iter()
        .zip(norms)
        .filter(|(&t, &v)| t >= t_s && v > floor)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if pts.len() < 2 {
        pts = times
            .iter()
            .zip(norms)
            .filter(|(_, &v)| v > 0.0)
            .map(|(&t, &v)| (t, v.ln()))
            .collect();
    }
    Ok(RateEstimate {
        from_settling: if t_s > 0.0 { -band.ln() / t_s } else { f64::INFINITY },
        regression: -least_squares_slope(&pts),
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelRates {
    pub voltage: RateEstimate,
    pub frequency: RateEstimate,
}

pub fn estimate_rate(traj: &ErrorTrajectory, band: f64) -> Result<ChannelRates> {
    Ok(ChannelRates {
        voltage: rate_of(&traj.times, &traj.voltage_norms(), band)?,
        frequency: rate_of(&traj.times, &traj.frequency_norms(), band)?,
    })
}
