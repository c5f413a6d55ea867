use super::{Generator, Scenario, UcpInstance, INSTANCE_VERSION};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub units: usize,
    pub periods: usize,
    pub scenarios: usize,
    pub seed: u64,
}

/// Sampling ranges, all inclusive of the lower end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub fixed_cost: (f64, f64),
    pub unit_cost: (f64, f64),
    pub max_output: (f64, f64),
    /// Minimum output as a fraction of the maximum.
    pub min_output_frac: (f64, f64),
    pub min_up: (u32, u32),
    pub min_down: (u32, u32),
    /// Ramp rates as a fraction of the maximum output; start-up and shut-down
    /// rates equal the ramp rates.
    pub ramp_frac: (f64, f64),
    pub cold_cost: (f64, f64),
    /// Number of periods after which the start-up cost stops growing.
    pub cold_periods: (u32, u32),
    /// Demand as a fraction of the total capacity.
    pub demand_frac: (f64, f64),
    /// Reserve as a fraction of demand, capped by the spare capacity.
    pub reserve_frac: (f64, f64),
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            fixed_cost: (400.0, 1000.0),
            unit_cost: (10.0, 40.0),
            max_output: (50.0, 200.0),
            min_output_frac: (0.1, 0.4),
            min_up: (1, 3),
            min_down: (1, 3),
            ramp_frac: (0.85, 1.0),
            cold_cost: (100.0, 500.0),
            cold_periods: (1, 4),
            demand_frac: (0.75, 1.0),
            reserve_frac: (0.0, 0.1),
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// Start-up costs growing logarithmically with down time up to `cold` periods.
pub(crate) fn log_startup_table(cold_cost: f64, cold: u32) -> Vec<f64> {
    let denom = (1.0 + cold as f64).ln();
    (1..=cold).map(|k| (cold_cost * (1.0 + k as f64).ln() / denom).round()).collect()
}

/// A random instance, identical for identical inputs.
pub fn gen_random_instance(params: GenParams, cfg: &GenConfig) -> UcpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut generators = Vec::with_capacity(params.units);
    for _ in 0..params.units {
        let max_output = uniform(&mut rng, cfg.max_output);
        let min_output = max_output * uniform(&mut rng, cfg.min_output_frac);
        let ramp_up = max_output * uniform(&mut rng, cfg.ramp_frac);
        let ramp_down = max_output * uniform(&mut rng, cfg.ramp_frac);
        let cold_cost = uniform(&mut rng, cfg.cold_cost).round();
        let cold = rng.gen_range(cfg.cold_periods.0..=cfg.cold_periods.1.max(cfg.cold_periods.0));
        generators.push(Generator {
            fixed_cost: uniform(&mut rng, cfg.fixed_cost),
            unit_cost: uniform(&mut rng, cfg.unit_cost),
            min_output,
            max_output,
            min_up: rng.gen_range(cfg.min_up.0..=cfg.min_up.1.max(cfg.min_up.0)),
            min_down: rng.gen_range(cfg.min_down.0..=cfg.min_down.1.max(cfg.min_down.0)),
            ramp_up,
            ramp_down,
            startup_ramp: ramp_up,
            shutdown_ramp: ramp_down,
            startup_costs: log_startup_table(cold_cost, cold),
            first_startup_cost: cold_cost,
        });
    }
    let capacity: f64 = generators.iter().map(|g| g.max_output).sum();
    let prob = 1.0 / params.scenarios as f64;
    let scenarios = (0..params.scenarios)
        .map(|_| {
            let demand: Vec<f64> = (0..params.periods)
                .map(|_| (capacity * uniform(&mut rng, cfg.demand_frac)).clamp(0.0, capacity))
                .collect();
            let reserve = demand
                .iter()
                .map(|d| (d * uniform(&mut rng, cfg.reserve_frac)).min(capacity - d).max(0.0))
                .collect();
            Scenario { prob, demand, reserve }
        })
        .collect();
    UcpInstance { version: INSTANCE_VERSION, periods: params.periods, generators, scenarios }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_table_is_increasing_and_capped() {
        let t = log_startup_table(300.0, 3);
        assert_eq!(t.len(), 3);
        assert!(t.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*t.last().unwrap(), 300.0);
    }

    #[test]
    fn generated_instances_validate() {
        for seed in 0..50 {
            let inst = gen_random_instance(GenParams { units: 3, periods: 4, scenarios: 2, seed }, &GenConfig::default());
            inst.validate().unwrap();
        }
    }
}
