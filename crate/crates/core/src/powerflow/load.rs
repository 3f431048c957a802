use crate::model::Load;

/// Share of the load's nominal demand currently connected.
pub fn connected_fraction(load: &Load, connected: &[bool]) -> f64 {
    load.stages
        .iter()
        .zip(connected)
        .filter(|(_, &on)| on)
        .map(|(f, _)| f)
        .sum()
}

/// Voltage- and frequency-dependent demand of the connected stages, in MW and MVAr.
///
/// `P = p0 * share * v^kpv * (1 + kpf * df)`, `Q = q0 * share * v^kqv`.
pub fn effective_load(load: &Load, connected: &[bool], v: f64, df: f64) -> (f64, f64) {
    let share = connected_fraction(load, connected);
    let freq = (1.0 + load.kpf * df).max(0.0);
    let p = load.p0 * share * v.powf(load.kpv) * freq;
    let q = load.q0 * share * v.powf(load.kqv);
    (p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn load(kpv: f64) -> Load {
        Load {
            bus: 1,
            p0: 1100.0,
            q0: 250.0,
            stages: vec![0.25; 4],
            stage_status: vec![true; 4],
            kpv,
            kqv: 2.0,
            kpf: 1.0 / 60.0,
        }
    }

    #[test]
    fn nominal_point() {
        let l = load(1.0);
        assert_eq!(effective_load(&l, &[true; 4], 1.0, 0.0), (1100.0, 250.0));
    }

    #[test]
    fn half_power_at_forty_percent_voltage() {
        // 0.4^k = 0.5  =>  k = ln 0.5 / ln 0.4
        let k = 0.5f64.ln() / 0.4f64.ln();
        assert_relative_eq!(k, 0.756, epsilon = 5e-4);
        let (p, _) = effective_load(&load(k), &[true; 4], 0.4, 0.0);
        assert_relative_eq!(p, 550.0, max_relative = 1e-12);
        // The rounded exponent lands within a fraction of a percent.
        let (p, _) = effective_load(&load(0.756), &[true; 4], 0.4, 0.0);
        assert_relative_eq!(p, 550.0, max_relative = 1e-3);
    }

    #[test]
    fn first_stage_off_scales_linearly() {
        let l = load(1.0);
        let (p, q) = effective_load(&l, &[false, true, true, true], 1.0, 0.0);
        assert_relative_eq!(p, 0.75 * 1100.0);
        assert_relative_eq!(q, 0.75 * 250.0);
    }

    #[test]
    fn frequency_term_only_touches_active_power() {
        let l = load(1.0);
        let (p, q) = effective_load(&l, &[true; 4], 1.0, -0.6);
        assert_relative_eq!(p, 1100.0 * (1.0 - 0.01));
        assert_eq!(q, 250.0);
    }

    proptest! {
        #[test]
        fn dropping_a_stage_never_raises_demand(v in 0.3f64..1.3, df in -2.0f64..2.0,
                mask in proptest::collection::vec(any::<bool>(), 4), drop in 0usize..4) {
            let l = load(1.0);
            let (before, _) = effective_load(&l, &mask, v, df);
            let mut after_mask = mask.clone();
            after_mask[drop] = false;
            let (after, _) = effective_load(&l, &after_mask, v, df);
            prop_assert!(after <= before);
        }
    }
}
