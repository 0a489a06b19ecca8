//! Quasi-stationary phasor solve of the electrical network.
//!
//! DGs are ideal voltage sources `E_i` behind a coupling impedance, loads are
//! constant admittances sized from their rating at nominal voltage. The
//! system is written in modified nodal form so a zero coupling impedance
//! (source straight on its bus) is allowed:
//!
//! ```text
//! [ Y_bus  -B  ] [V]   [0]
//! [ B^T    Z_c ] [I] = [E]
//! ```
//!
//! where `B` maps each DG to its bus and `I` is the current injected by the
//! DG into that bus. The matrix only depends on the topology and the active
//! loads, so it is factored once per load configuration.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SINGULAR_RATIO: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Impedance {
    pub r: f64,
    pub x: f64,
}

impl Impedance {
    pub fn new(r: f64, x: f64) -> Self {
        Self { r, x }
    }

    pub fn complex(self) -> Complex64 {
        Complex64::new(self.r, self.x)
    }

    pub fn magnitude(self) -> f64 {
        self.complex().norm()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub from_bus: usize,
    pub to_bus: usize,
    pub impedance: Impedance,
}

/// Three-phase rated load at nominal voltage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub id: String,
    pub bus: usize,
    pub p: f64,
    pub q: f64,
}

impl Load {
    /// Per-phase admittance drawing `p + jq` (three-phase) at `v_nominal` per phase.
    pub fn admittance(&self, v_nominal: f64) -> Complex64 {
        Complex64::new(self.p, -self.q) / (3.0 * v_nominal * v_nominal)
    }
}

/// Solution of one network solve. Powers are three-phase, voltages and
/// currents per phase.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSolution {
    pub bus_voltages: Vec<Complex64>,
    pub dg_currents: Vec<Complex64>,
    pub dg_power: Vec<Complex64>,
}

/// Factored nodal system for a fixed set of lines, loads and DG couplings.
#[derive(Clone, Debug)]
pub struct NetworkSolver {
    n_buses: usize,
    dg_bus: Vec<usize>,
    lu: LU<Complex64, Dyn, Dyn>,
}

impl NetworkSolver {
    pub fn new(
        n_buses: usize,
        lines: &[Line],
        loads: &[Load],
        dg_bus: &[usize],
        dg_coupling: &[Impedance],
        v_nominal: f64,
    ) -> Result<Self> {
        let n_dg = dg_bus.len();
        if dg_coupling.len() != n_dg {
            return Err(Error::Config("one coupling impedance per DG required".into()));
        }
        let dim = n_buses + n_dg;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for line in lines {
            let (a, b) = (line.from_bus, line.to_bus);
            if a >= n_buses || b >= n_buses {
                return Err(Error::Config(format!("line {a}-{b} references a missing bus")));
            }
            let y = line.impedance.complex().inv();
            m[(a, a)] += y;
            m[(b, b)] += y;
            m[(a, b)] -= y;
            m[(b, a)] -= y;
        }
        for load in loads {
            if load.bus >= n_buses {
                return Err(Error::Config(format!(
                    "load `{}` references missing bus {}",
                    load.id, load.bus
                )));
            }
            m[(load.bus, load.bus)] += load.admittance(v_nominal);
        }
        for (i, (&bus, z)) in dg_bus.iter().zip(dg_coupling).enumerate() {
            if bus >= n_buses {
                return Err(Error::Config(format!("DG {i} references missing bus {bus}")));
            }
            let row = n_buses + i;
            m[(bus, row)] = Complex64::new(-1.0, 0.0);
            m[(row, bus)] = Complex64::new(1.0, 0.0);
            m[(row, row)] = z.complex();
        }
        let lu = m.lu();
        // Rounding can leave a tiny pivot instead of an exact zero.
        let pivots: Vec<f64> = lu.u().diagonal().iter().map(|z| z.norm()).collect();
        let largest = pivots.iter().copied().fold(0.0, f64::max);
        if dim == 0 || !lu.is_invertible() || pivots.iter().any(|&p| p <= SINGULAR_RATIO * largest) {
            return Err(Error::SingularAdmittance);
        }
        Ok(Self {
            n_buses,
            dg_bus: dg_bus.to_vec(),
            lu,
        })
    }

    /// Solves for the given per-phase source voltages `e`.
    pub fn solve(&self, e: &[Complex64]) -> Result<NetworkSolution> {
        let n_dg = self.dg_bus.len();
        if e.len() != n_dg {
            return Err(Error::Config(format!("{} source voltages for {n_dg} DGs", e.len())));
        }
        let mut rhs = DVector::<Complex64>::zeros(self.n_buses + n_dg);
        for (i, &v) in e.iter().enumerate() {
            rhs[self.n_buses + i] = v;
        }
        let x = self.lu.solve(&rhs).ok_or(Error::SingularAdmittance)?;
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::SingularAdmittance);
        }
        let bus_voltages: Vec<Complex64> = x.rows(0, self.n_buses).iter().copied().collect();
        let dg_currents: Vec<Complex64> = x.rows(self.n_buses, n_dg).iter().copied().collect();
        let dg_power = e
            .iter()
            .zip(&dg_currents)
            .map(|(v, i)| 3.0 * v * i.conj())
            .collect();
        Ok(NetworkSolution {
            bus_voltages,
            dg_currents,
            dg_power,
        })
    }
}
