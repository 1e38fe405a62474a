//! Network files, format tag `ddd-net/1`.
//!
//! ```json
//! {"format": "ddd-net/1", "epsilon": 0.1,
//!  "lattice": [[1,0,0],[0,1,0],[0,0,1]],
//!  "loops": [{"burgers": [1,0,0], "nodes": [[0,0,0], ...]}]}
//! ```
//!
//! `lattice` lists the primitive vectors. Floats are written in shortest
//! round-trip form, so reading a written file reproduces every node bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::elasticity::Vec3;
use crate::error::{DddError, Result};

use super::lattice::Lattice;
use super::network::{DislocationNetwork, Loop};

pub const NETWORK_FORMAT: &str = "ddd-net/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    format: String,
    epsilon: f64,
    lattice: [[f64; 3]; 3],
    loops: Vec<LoopFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopFile {
    burgers: [i64; 3],
    nodes: Vec<[f64; 3]>,
}

pub fn network_to_json(s: &DislocationNetwork) -> String {
    let file = NetworkFile {
        format: NETWORK_FORMAT.to_string(),
        epsilon: s.epsilon(),
        lattice: s.lattice().rows(),
        loops: s
            .loops()
            .iter()
            .map(|l| LoopFile {
                burgers: l.burgers().lattice_coords,
                nodes: l.nodes().iter().map(|x| [x[0], x[1], x[2]]).collect(),
            })
            .collect(),
    };
    serde_json::to_string(&file).expect("network serializes")
}

pub fn network_from_json(text: &str) -> Result<DislocationNetwork> {
    let file: NetworkFile = serde_json::from_str(text)?;
    if file.format != NETWORK_FORMAT {
        return Err(DddError::Format(format!(
            "unsupported format tag {:?}, expected {NETWORK_FORMAT:?}",
            file.format
        )));
    }
    let lattice = Lattice::from_rows(&file.lattice)?;
    let loops = file
        .loops
        .into_iter()
        .map(|l| {
            let b = lattice.burgers(l.burgers)?;
            Loop::new(l.nodes.into_iter().map(|x| Vec3::new(x[0], x[1], x[2])).collect(), b)
        })
        .collect::<Result<Vec<_>>>()?;
    DislocationNetwork::new(lattice, loops, file.epsilon)
}

pub fn read_network(path: &Path) -> Result<DislocationNetwork> {
    let text = std::fs::read_to_string(path).map_err(|e| DddError::io(path, e))?;
    network_from_json(&text)
}

pub fn write_network(path: &Path, s: &DislocationNetwork) -> Result<()> {
    std::fs::write(path, network_to_json(s)).map_err(|e| DddError::io(path, e))
}
