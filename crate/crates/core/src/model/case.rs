use std::io::Read;
use std::path::Path;

use super::{validate, Network};
use crate::error::CaseError;

/// Parses and validates a JSON case document.
pub fn load_case<R: Read>(source: R) -> Result<Network, CaseError> {
    let mut network: Network = serde_json::from_reader(source)?;
    for load in &mut network.loads {
        if load.stage_status.is_empty() {
            load.stage_status = vec![true; load.stages.len()];
        }
    }
    network.buses.sort_by_key(|b| b.id);
    network.lines.sort_by_key(|l| l.id);

    let violations = validate(&network);
    if violations.is_empty() {
        Ok(network)
    } else {
        Err(CaseError::Invalid(violations))
    }
}

pub fn load_case_file(path: impl AsRef<Path>) -> Result<Network, CaseError> {
    let file = std::fs::File::open(path)?;
    load_case(std::io::BufReader::new(file))
}

/// Serializes a network back into the case schema.
pub fn to_json(network: &Network) -> String {
    serde_json::to_string_pretty(network).expect("network serializes")
}
