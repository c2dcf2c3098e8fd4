//! Random instance generator for every supported variant.
//!
//! Instances are built so that each customer can be served by a route of
//! its own (with charging stops where energy is limited). This makes every
//! generated instance solvable.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraints::{BackhaulMode, VariantFlags};
use crate::scalar::Scalar;
use crate::vrplib::Instance;

const GRID: f64 = 100.0;

/// All 60 variant flag combinations: 48 capacitated combinations of MD, O,
/// B/MB, L and TW; 8 electric ones (O, L, TW); plus TSP, ATSP, ACVRP and SOP.
pub fn all_variants() -> Vec<VariantFlags> {
    let mut out = Vec::with_capacity(60);
    for md in [false, true] {
        for open in [false, true] {
            for bh in [None, Some(BackhaulMode::Strict), Some(BackhaulMode::Mixed)] {
                for l in [false, true] {
                    for tw in [false, true] {
                        out.push(VariantFlags {
                            capacity: true,
                            open_route: open,
                            backhaul: bh,
                            distance_limit: l,
                            time_windows: tw,
                            multi_depot: md,
                            ..Default::default()
                        });
                    }
                }
            }
        }
    }
    for open in [false, true] {
        for l in [false, true] {
            for tw in [false, true] {
                out.push(VariantFlags {
                    capacity: true,
                    electric: true,
                    open_route: open,
                    distance_limit: l,
                    time_windows: tw,
                    ..Default::default()
                });
            }
        }
    }
    for code in ["TSP", "ATSP", "ACVRP", "SOP"] {
        out.push(VariantFlags::parse(code).expect("fixed code"));
    }
    out
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn point(rng: &mut ChaCha8Rng) -> [f64; 2] {
    // half-unit grid keeps values exact in text
    [
        f64::from(rng.gen_range(0..=200u32)) / 2.0,
        f64::from(rng.gen_range(0..=200u32)) / 2.0,
    ]
}

/// A random instance of the variant `flags` with `customers` customers.
/// Deterministic in `seed`.
pub fn synthesize<S: Scalar>(flags: &VariantFlags, customers: usize, seed: u64) -> Instance<S> {
    assert!(customers >= 1, "need at least one customer");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_u64.wrapping_mul(customers as u64 + 1));
    let n_depots = if flags.multi_depot { rng.gen_range(2..=3) } else { 1 };
    let n_stations = if flags.electric { rng.gen_range(2..=4) } else { 0 };
    let dimension = n_depots + customers + n_stations;
    let depots: Vec<usize> = (1..=n_depots).collect();
    let cust: Vec<usize> = (n_depots + 1..=n_depots + customers).collect();
    let stations: Vec<usize> = (n_depots + customers + 1..=dimension).collect();

    let coords: Vec<[f64; 2]> = (0..dimension).map(|_| point(&mut rng)).collect();
    let xy = |id: usize| coords[id - 1];
    let nearest_depot = |u: usize| {
        depots
            .iter()
            .map(|&d| dist(xy(d), xy(u)))
            .fold(f64::INFINITY, f64::min)
    };

    let code = flags.code();
    let mut inst = Instance::<S> {
        name: format!("{code}-n{customers}-s{seed}"),
        comment: Some("synthetic".into()),
        declared_type: Some(code),
        dimension,
        edge_weight_type: Some("EUC_2D".into()),
        coords: Some(coords.iter().map(|p| [S::lit(p[0]), S::lit(p[1])]).collect()),
        explicit_weights: None,
        demands: None,
        capacity: None,
        distance_limit: None,
        time_windows: None,
        service_times: None,
        depots: depots.clone(),
        depot_section: flags.multi_depot || rng.gen_bool(0.5),
        fuel_capacity: None,
        fuel_consumption_rate: None,
        refuel_rate: None,
        stations: None,
        precedence: None,
        forbidden_arcs: None,
    };

    if flags.capacity {
        let mut d = vec![0.0; dimension];
        for &u in &cust {
            d[u - 1] = f64::from(rng.gen_range(1..=10u32));
        }
        if flags.backhaul.is_some() {
            let mut picks = cust.clone();
            picks.shuffle(&mut rng);
            let k = (customers / 3).max(1).min(customers.saturating_sub(1).max(1));
            for &u in &picks[..k] {
                d[u - 1] = -d[u - 1];
            }
        }
        let total: f64 = d.iter().map(|x| x.abs()).sum();
        let cap = (total / rng.gen_range(1.5..3.0)).ceil().max(10.0);
        inst.capacity = Some(S::lit(cap));
        inst.demands = Some(d.into_iter().map(S::lit).collect());
    }

    // charger reach: every customer within half a tank of some charger
    let mut energy_per_leg = 0.0;
    if flags.electric {
        let chargers: Vec<usize> = depots.iter().chain(&stations).copied().collect();
        let reach = cust
            .iter()
            .map(|&u| chargers.iter().map(|&c| dist(xy(c), xy(u))).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        let station_hop = stations
            .iter()
            .map(|&s| nearest_depot(s))
            .fold(0.0, f64::max);
        let rate = f64::from(rng.gen_range(1..=2u32));
        let range = (2.0 * reach).max(station_hop).max(30.0) * 1.3;
        let fuel = (range * rate).ceil();
        energy_per_leg = fuel / rate;
        inst.fuel_capacity = Some(S::lit(fuel));
        inst.fuel_consumption_rate = Some(S::lit(rate));
        inst.refuel_rate = Some(S::lit(f64::from(rng.gen_range(2..=6u32))));
        inst.stations = Some(stations.clone());
    }

    // worst singleton route length, charging detours included
    let worst_single = cust
        .iter()
        .map(|&u| {
            let direct = 2.0 * nearest_depot(u);
            if flags.electric && direct > energy_per_leg {
                direct + 4.0 * GRID
            } else {
                direct
            }
        })
        .fold(0.0, f64::max);

    if flags.distance_limit {
        let limit = (worst_single * rng.gen_range(1.2..1.8)).ceil() + 1.0;
        inst.distance_limit = Some(S::lit(limit));
    }

    if flags.time_windows {
        let refuel_time = match (inst.fuel_capacity, inst.refuel_rate) {
            (Some(f), Some(r)) => 2.0 * f.to_f64().unwrap() / r.to_f64().unwrap(),
            _ => 0.0,
        };
        let detour = if flags.electric { 4.0 * GRID + refuel_time } else { 0.0 };
        let mut tw = vec![(0.0, 0.0); dimension];
        let mut service = vec![0.0; dimension];
        let mut horizon: f64 = 0.0;
        for &u in &cust {
            let reach = nearest_depot(u) + detour;
            let width = f64::from(rng.gen_range(60..=300u32));
            let earliest = f64::from(rng.gen_range(0..=400u32));
            let latest = (earliest + width).max(reach.ceil() + 10.0);
            service[u - 1] = f64::from(rng.gen_range(0..=20u32)) / 2.0;
            tw[u - 1] = (earliest, latest);
            horizon = horizon.max(latest + service[u - 1] + reach + 1.0);
        }
        let horizon = horizon.ceil() + 50.0;
        for &v in depots.iter().chain(&stations) {
            tw[v - 1] = (0.0, horizon);
        }
        inst.time_windows = Some(tw.into_iter().map(|(a, b)| (S::lit(a), S::lit(b))).collect());
        inst.service_times = Some(service.into_iter().map(S::lit).collect());
    }

    if flags.asymmetric || flags.precedence {
        let mut w = vec![vec![S::zero(); dimension]; dimension];
        for i in 0..dimension {
            for j in 0..dimension {
                if i != j {
                    let base = dist(coords[i], coords[j]).round();
                    w[i][j] = S::lit(base + f64::from(rng.gen_range(0..=15u32)));
                }
            }
        }
        if flags.precedence {
            let mut order = cust.clone();
            order.shuffle(&mut rng);
            let mut pairs = Vec::new();
            for x in 0..order.len() {
                for y in x + 1..order.len() {
                    if rng.gen_bool(0.2) {
                        pairs.push((order[x], order[y]));
                    }
                }
            }
            // the depot starts the path: no arc may enter it
            for &u in &cust {
                pairs.push((1, u));
            }
            let mut forbidden = Vec::new();
            for &(a, b) in &pairs {
                w[b - 1][a - 1] = -S::one();
                forbidden.push((b, a));
            }
            forbidden.sort_unstable();
            let mut prec: Vec<(usize, usize)> = forbidden.iter().map(|&(i, j)| (j, i)).collect();
            prec.sort_unstable();
            inst.forbidden_arcs = Some(forbidden);
            inst.precedence = Some(prec);
        }
        inst.explicit_weights = Some(w);
        inst.edge_weight_type = Some("EXPLICIT".into());
        if !flags.precedence && !flags.capacity {
            // plain ATSP: matrix only
            inst.coords = None;
        }
    }
    inst
}
