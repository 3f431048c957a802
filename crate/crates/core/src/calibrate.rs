//! Base-case preparation: balance the slack machine and size line ratings
//! so every line starts at a chosen loading rate.

use crate::cascade::SystemState;
use crate::error::SimError;
use crate::model::Network;
use crate::powerflow::{solve_ac, SolverConfig};

/// Solves the base case from a flat start, sets the slack machine's
/// dispatch to its solved output and rescales every in-service line's
/// rating (and relay pickup, which follows the rating) so that its base
/// current sits at `target_rate` of the rating.
pub fn calibrate_base_case(network: &Network, target_rate: f64) -> Result<Network, SimError> {
    if !(target_rate > 0.0) {
        return Err(SimError::Scenario(format!(
            "target rate {target_rate} must be positive"
        )));
    }
    let state = SystemState::initial(network);
    let config = SolverConfig {
        flat_start: true,
        ..SolverConfig::default()
    };
    let sol = solve_ac(network, &state, &config);
    if !sol.converged {
        return Err(SimError::Scenario(format!(
            "base case does not converge: {}",
            sol.failure.unwrap_or_default()
        )));
    }

    let mut out = network.clone();
    let slack = network
        .slack_index()
        .expect("validated case has a slack bus");
    for (g, gen) in out.generators.iter_mut().enumerate() {
        if gen.bus - 1 == slack && gen.in_service {
            gen.p_set = sol.p_gen[g];
            gen.p_max = gen.p_max.max(gen.p_set);
        }
    }
    for (k, line) in out.lines.iter_mut().enumerate() {
        if sol.line_active[k] && sol.i_line_amps[k] > 0.0 {
            line.rating_amps = sol.i_line_amps[k] / target_rate;
            line.pickup_current = None;
        }
    }
    Ok(out)
}
