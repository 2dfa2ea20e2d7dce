use crate::model::{
    ChargeCurve, ChargeModel, Depot, Instance, Matrix, Service, Station, VehicleSpec,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Parameters of the random instance generator.
///
/// Locations are uniform on a square of side `side_km`. A service drives
/// from its start point to its end point; deadheading between elements is
/// Euclidean at `speed` km/min, costing `cost_per_km` and `energy_per_km`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub services: usize,
    pub depots: usize,
    pub stations: usize,
    pub horizon: f64,
    pub side_km: f64,
    pub speed: f64,
    pub min_duration: f64,
    pub max_duration: f64,
    pub cost_per_km: f64,
    pub energy_per_km: f64,
    pub capacity: f64,
    pub charge_rate: f64,
    /// Use a three-piece concave profile instead of linear charging.
    pub nonlinear: bool,
    pub fixed_cost: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            services: 10,
            depots: 2,
            stations: 3,
            horizon: 600.0,
            side_km: 20.0,
            speed: 0.5,
            min_duration: 20.0,
            max_duration: 70.0,
            cost_per_km: 1.0,
            energy_per_km: 1.2,
            capacity: 100.0,
            charge_rate: 1.5,
            nonlinear: false,
            fixed_cost: 1e4,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    /// Desk-scale instance used by exact cross-checks.
    pub fn small(services: usize, seed: u64) -> Self {
        GeneratorConfig {
            services,
            seed,
            ..Default::default()
        }
    }

    /// Day-long instance of about a hundred services.
    pub fn mid(seed: u64) -> Self {
        GeneratorConfig {
            services: 100,
            depots: 2,
            stations: 8,
            horizon: 1200.0,
            seed,
            ..Default::default()
        }
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Draw an instance. Values are rounded to three decimals so that a JSON
/// round trip is exact.
pub fn generate(cfg: &GeneratorConfig) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let point = |rng: &mut ChaCha8Rng| {
        (
            rng.gen_range(0.0..cfg.side_km),
            rng.gen_range(0.0..cfg.side_km),
        )
    };

    let depot_at: Vec<(f64, f64)> = (0..cfg.depots).map(|_| point(&mut rng)).collect();
    let station_at: Vec<(f64, f64)> = (0..cfg.stations).map(|_| point(&mut rng)).collect();
    // a direct depot-service-depot trip without charging must fit
    let coverable = |a: (f64, f64), b: (f64, f64), t_begin: f64, t_end: f64, energy: f64| {
        depot_at.iter().any(|&d| {
            let (out, back) = (dist(d, a), dist(b, d));
            out / cfg.speed <= t_begin
                && t_end + back / cfg.speed <= cfg.horizon
                && (out + back) * cfg.energy_per_km + energy <= cfg.capacity * 0.95
        })
    };

    let mut services = Vec::with_capacity(cfg.services);
    let mut starts = Vec::new();
    let mut ends = Vec::new();
    for i in 0..cfg.services {
        let mut tries = 0;
        let (a, b, t_begin, t_end, energy) = loop {
            tries += 1;
            let a = point(&mut rng);
            // keep the trip length consistent with its duration
            let duration = rng.gen_range(cfg.min_duration..=cfg.max_duration);
            let reach = (duration * cfg.speed).min(cfg.side_km);
            let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let b = (
                (a.0 + reach * angle.cos() * 0.5).clamp(0.0, cfg.side_km),
                (a.1 + reach * angle.sin() * 0.5).clamp(0.0, cfg.side_km),
            );
            let t_begin = round3(rng.gen_range(0.0..(cfg.horizon - duration).max(1.0)));
            let t_end = round3((t_begin + duration).min(cfg.horizon));
            let km = duration * cfg.speed;
            let energy = round3((km * cfg.energy_per_km).min(cfg.capacity * 0.6));
            if tries >= 1000 || coverable(a, b, t_begin, t_end, energy) {
                break (a, b, t_begin, t_end, energy);
            }
        };
        services.push(Service {
            id: i as u32,
            t_begin,
            t_end,
            energy,
            cost: 0.0,
        });
        starts.push(a);
        ends.push(b);
    }

    // element i is left from `from[i]` and entered at `to[i]`
    let mut from = ends.clone();
    let mut to = starts.clone();
    for p in depot_at.iter().chain(station_at.iter()) {
        from.push(*p);
        to.push(*p);
    }
    let n = from.len();
    let mut time = Matrix::filled(n, 0.0);
    let mut cost = Matrix::filled(n, 0.0);
    let mut energy = Matrix::filled(n, 0.0);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let km = dist(from[i], to[j]);
            time.set(i, j, round3(km / cfg.speed));
            cost.set(i, j, round3(km * cfg.cost_per_km));
            energy.set(i, j, round3(km * cfg.energy_per_km));
        }
    }

    let charge_model = if cfg.nonlinear {
        let m = cfg.capacity;
        let r = cfg.charge_rate;
        let pts = vec![
            (0.0, 0.0),
            (round3(0.6 * m / r), 0.6 * m),
            (round3(0.6 * m / r + 0.25 * m / (0.6 * r)), 0.85 * m),
            (
                round3(0.6 * m / r + 0.25 * m / (0.6 * r) + 0.15 * m / (0.25 * r)),
                m,
            ),
        ];
        ChargeModel::General {
            profile: ChargeCurve::new(pts).expect("generated profile is concave"),
        }
    } else {
        ChargeModel::Linear {
            rate: cfg.charge_rate,
        }
    };

    Instance {
        name: format!(
            "gen_n{}_d{}_s{}_{}",
            cfg.services, cfg.depots, cfg.stations, cfg.seed
        ),
        horizon_end: cfg.horizon,
        vehicle: VehicleSpec {
            capacity: cfg.capacity,
            fixed_cost: cfg.fixed_cost,
        },
        charge_model,
        reserve_level: 0.0,
        services,
        depots: (0..cfg.depots).map(|i| Depot { id: i as u32 }).collect(),
        stations: (0..cfg.stations)
            .map(|i| Station { id: i as u32 })
            .collect(),
        travel_time: time,
        travel_cost: cost,
        travel_energy: energy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_instances_validate() {
        for seed in 0..20 {
            let mut cfg = GeneratorConfig::small(8, seed);
            cfg.nonlinear = seed % 2 == 1;
            let inst = generate(&cfg);
            inst.validate().unwrap();
            assert_eq!(inst.n_services(), 8);
        }
        generate(&GeneratorConfig::mid(3)).validate().unwrap();
    }

    #[test]
    fn same_seed_same_instance() {
        let cfg = GeneratorConfig::small(12, 7);
        assert_eq!(generate(&cfg), generate(&cfg));
        assert_ne!(generate(&cfg), generate(&GeneratorConfig::small(12, 8)));
    }
}
