//! Reference systems shipped with the crate: the 4-DG feeder and the 5-DG
//! ring, both communication graphs and default electrical data.
//!
//! Line and coupling impedances are not part of any published data set;
//! they are plausible low-voltage values chosen so the defaults run.

use crate::consensus::ControllerGains;
use crate::error::Result;
use crate::netgraph::CommNetwork;
use crate::plant::{DgParams, DgType, EventAction, Impedance, Line, Load, Plant, PlantTopology, Scenario};

pub const FOUR_BUS_NET: &str = include_str!("../../../cases/4bus.net");
pub const FIVE_BUS_NET: &str = include_str!("../../../cases/5bus.net");

/// Pinning gain used throughout the reference cases.
pub const CASE_GAIN: f64 = 0.2;

pub fn four_bus_network() -> CommNetwork {
    CommNetwork::parse(FOUR_BUS_NET).expect("embedded 4-bus network parses")
}

pub fn five_bus_network() -> CommNetwork {
    CommNetwork::parse(FIVE_BUS_NET).expect("embedded 5-bus network parses")
}

pub fn coupling_impedance() -> Impedance {
    Impedance::new(0.03, 0.424)
}

/// DG3 and DG4 are the larger (Type II) units.
fn dg_type(index: usize) -> DgType {
    if index == 2 || index == 3 {
        DgType::TypeII
    } else {
        DgType::TypeI
    }
}

fn dgs(n: usize) -> Vec<DgParams> {
    (0..n)
        .map(|i| DgParams::of_type(format!("DG{}", i + 1), dg_type(i), i, coupling_impedance()))
        .collect()
}

pub fn load1() -> Load {
    Load {
        id: "load1".into(),
        bus: 1,
        p: 12_000.0,
        q: 12_000.0,
    }
}

pub fn load2() -> Load {
    Load {
        id: "load2".into(),
        bus: 2,
        p: 15_300.0,
        q: 7_600.0,
    }
}

/// Ring of five buses, one DG per bus.
pub fn five_bus_topology() -> PlantTopology {
    let z_short = Impedance::new(0.23, 0.1);
    let z_long = Impedance::new(0.35, 0.58);
    let ring = [(0, 1, z_short), (1, 2, z_long), (2, 3, z_short), (3, 4, z_long), (4, 0, z_short)];
    PlantTopology {
        n_buses: 5,
        lines: ring
            .iter()
            .map(|&(a, b, z)| Line {
                from_bus: a,
                to_bus: b,
                impedance: z,
            })
            .collect(),
        loads: vec![load1(), load2()],
        dgs: dgs(5),
    }
}

/// Radial feeder of four buses, one DG per bus.
pub fn four_bus_topology() -> PlantTopology {
    let z_short = Impedance::new(0.23, 0.1);
    let z_long = Impedance::new(0.35, 0.58);
    let feeder = [(0, 1, z_short), (1, 2, z_long), (2, 3, z_short)];
    PlantTopology {
        n_buses: 4,
        lines: feeder
            .iter()
            .map(|&(a, b, z)| Line {
                from_bus: a,
                to_bus: b,
                impedance: z,
            })
            .collect(),
        loads: vec![load1(), load2()],
        dgs: dgs(4),
    }
}

pub fn five_bus_plant(gains: &ControllerGains) -> Result<Plant> {
    Plant::new(five_bus_topology(), five_bus_network(), gains.v_ref)
}

pub fn four_bus_plant(gains: &ControllerGains) -> Result<Plant> {
    Plant::new(four_bus_topology(), four_bus_network(), gains.v_ref)
}

/// Islanding at t = 0 followed by 1.5 s of autonomous operation.
pub fn islanding_scenario(dt: f64) -> Scenario {
    Scenario::new(1.5, dt).with_event(0.0, EventAction::Island)
}

/// Islanding at t = 0, a mostly active load on bus 3 from 0.6 s to 1.2 s.
pub fn load_step_scenario(dt: f64) -> Scenario {
    Scenario::new(1.8, dt)
        .with_event(0.0, EventAction::Island)
        .with_event(
            0.6,
            EventAction::LoadAdd {
                id: "step".into(),
                bus: 2,
                p: 12_000.0,
                q: 1_000.0,
            },
        )
        .with_event(
            1.2,
            EventAction::LoadRemove {
                id: "step".into(),
                bus: 2,
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_networks_parse() {
        let five = five_bus_network();
        assert_eq!(five.len(), 5);
        assert_eq!(five.out_degree(4), 0);
        assert_eq!(five.in_degree(4), 2);
        let four = four_bus_network();
        assert_eq!(four.len(), 4);
        assert_eq!(four.out_degree(3), 0);
    }

    #[test]
    fn default_topologies_validate() {
        five_bus_topology().validate().unwrap();
        four_bus_topology().validate().unwrap();
        assert_eq!(five_bus_topology().dgs[2].kind, DgType::TypeII);
        assert_eq!(five_bus_topology().dgs[4].kind, DgType::TypeI);
    }
}
