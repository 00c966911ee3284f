use failprop_core::rng::rng_from_seed;
use failprop_core::*;
use proptest::prelude::*;
use rand::Rng;

fn ring(n: usize) -> Network {
    generate_topology(TopologyKind::Ring { n }, 0).unwrap()
}

fn complete(n: usize) -> Network {
    let edges: Vec<_> = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).collect();
    Network::from_edges(n, edges).unwrap()
}

/// P(at least one success) summed over all 2^k joint outcomes.
fn enumerate_infection(k: usize, beta: f64) -> f64 {
    (0u32..1 << k)
        .filter(|mask| *mask != 0)
        .map(|mask| {
            (0..k)
                .map(|j| if mask >> j & 1 == 1 { beta } else { 1.0 - beta })
                .product::<f64>()
        })
        .sum()
}

#[test]
fn infection_probability_matches_enumeration() {
    for k in 0..=8 {
        for beta in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let diff = (infection_probability(k, beta) - enumerate_infection(k, beta)).abs();
            assert!(diff < 1e-12, "k={k} beta={beta}");
        }
    }
}

#[test]
fn golden_sid_trace() {
    let net = ring(10);
    let p = EpidemicParams::sid(0.4, 0.1, 0.2, 0.05);
    let t = run(&net, &[0], &p, 40, StopRule::FixedTicks, 42).unwrap();
    assert_eq!(t.to_csv(), include_str!("golden/sid_ring10_seed42_trace.csv"));
    assert_eq!(t.events_csv(), include_str!("golden/sid_ring10_seed42_events.csv"));
}

#[test]
fn si_frontier_is_bfs_distance() {
    let net = generate_topology(TopologyKind::BarabasiAlbert { n: 40, m: 1 }, 11).unwrap();
    let seeds = [5, 17];
    let t = run(&net, &seeds, &EpidemicParams::si(1.0), 60, StopRule::FixedTicks, 0).unwrap();
    let dist = net.bfs_distances(&seeds);
    let mut first = vec![None; net.node_count()];
    for e in &t.events {
        if e.to == NodeState::I && first[e.node].is_none() {
            first[e.node] = Some(e.tick as usize);
        }
    }
    assert_eq!(first, dist);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compartments_conserved(
        n in 2usize..30,
        beta in 0.0f64..1.0,
        split in 0.0f64..1.0,
        exit in 0.0f64..1.0,
        gamma in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let net = generate_topology(TopologyKind::ErdosRenyi { n, p: 0.2 }, seed).unwrap();
        let tau = exit * split;
        let delta1 = exit * (1.0 - split);
        let p = EpidemicParams::sid(beta, delta1, tau, gamma);
        let t = run(&net, &[0], &p, 50, StopRule::Absorb, seed).unwrap();
        for c in &t.counts {
            prop_assert_eq!(c.total(), n);
            prop_assert_eq!(c.r, 0);
        }
    }

    /// Infection never leaves the connected components holding a seed, and
    /// at beta = 1 under SI it fills them.
    #[test]
    fn infection_confined_to_seed_components(n in 2usize..30, p in 0.0f64..0.3, beta in 0.0f64..1.0, seed in any::<u64>()) {
        let net = generate_topology(TopologyKind::ErdosRenyi { n, p }, seed).unwrap();
        let reach = net.bfs_distances(&[0]);
        let t = run(&net, &[0], &EpidemicParams::si(beta), 40, StopRule::FixedTicks, seed).unwrap();
        for e in &t.events {
            prop_assert!(reach[e.node].is_some());
        }
        let full = run(&net, &[0], &EpidemicParams::si(1.0), n as u64, StopRule::FixedTicks, seed).unwrap();
        let reached = reach.iter().filter(|d| d.is_some()).count();
        prop_assert_eq!(full.counts.last().unwrap().i, reached);
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>()) {
        let net = ring(12);
        let p = EpidemicParams::sid(0.5, 0.1, 0.2, 0.1);
        let a = run(&net, &[0, 6], &p, 30, StopRule::Absorb, seed).unwrap();
        let b = run(&net, &[0, 6], &p, 30, StopRule::Absorb, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn outbreak_size_monotone_under_extension(seed in any::<u64>(), cut in 1u64..40) {
        let net = ring(15);
        let p = EpidemicParams::sis(0.4, 0.3);
        let long = run(&net, &[0], &p, 40, StopRule::FixedTicks, seed).unwrap();
        let short = run(&net, &[0], &p, cut, StopRule::FixedTicks, seed).unwrap();
        prop_assert!(metrics::outbreak_size(&short) <= metrics::outbreak_size(&long));
    }
}

/// Stationary distribution of the single-node chain S -> I (forced),
/// I -> D (tau), I -> S (delta1), D -> S (gamma), by Gaussian elimination
/// on pi P = pi with the normalization row.
fn stationary(tau: f64, delta1: f64, gamma: f64) -> [f64; 3] {
    // Order S, I, D.
    let p = [
        [0.0, 1.0, 0.0],
        [delta1, 1.0 - tau - delta1, tau],
        [gamma, 0.0, 1.0 - gamma],
    ];
    // (P^T - I) pi = 0, last equation replaced by sum(pi) = 1.
    let mut a = [[0.0; 4]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[2] = [1.0, 1.0, 1.0, 1.0];
    for col in 0..3 {
        let pivot = (col..3).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = a[row][col] / a[col][col];
                let pivot_row = a[col];
                for (x, y) in a[row].iter_mut().zip(pivot_row).skip(col) {
                    *x -= f * y;
                }
            }
        }
    }
    [a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]]
}

#[test]
fn single_node_chain_occupancy() {
    let (tau, delta1, gamma) = (0.3, 0.2, 0.1);
    let expected = stationary(tau, delta1, gamma);
    let net = Network::from_edges(1, []).unwrap();
    let p = EpidemicParams::sid(0.0, delta1, tau, gamma);
    let mut rng = rng_from_seed(99);
    let mut sv = StateVector::seeded(1, &[0]);
    let ticks = 200_000;
    let mut occupancy = [0usize; 3];
    for _ in 0..ticks {
        sv = if sv.states[0] == NodeState::S {
            StateVector { states: vec![NodeState::I], tick: sv.tick + 1 }
        } else {
            step(&net, &sv, &p, &mut rng).unwrap()
        };
        occupancy[match sv.states[0] {
            NodeState::S => 0,
            NodeState::I => 1,
            _ => 2,
        }] += 1;
    }
    for k in 0..3 {
        let freq = occupancy[k] as f64 / ticks as f64;
        assert!((freq - expected[k]).abs() < 0.01, "state {k}: {freq} vs {}", expected[k]);
    }
}

/// SIS on a complete graph reduces to a chain on the infected count.
fn sis_complete_oracle(n: usize, beta: f64, delta1: f64, ticks: usize, runs: usize, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let mut acc = 0.0;
    let mut samples = 0;
    for _ in 0..runs {
        let mut infected = 1usize;
        for t in 1..=ticks {
            let p_inf = 1.0 - (1.0 - beta).powi(infected as i32);
            let recovered = (0..infected).filter(|_| rng.random::<f64>() < delta1).count();
            let newly = (0..n - infected).filter(|_| rng.random::<f64>() < p_inf).count();
            infected = infected - recovered + newly;
            if t > ticks - 100 {
                acc += infected as f64 / n as f64;
                samples += 1;
            }
        }
    }
    acc / samples as f64
}

#[test]
fn sis_complete_graph_matches_count_chain() {
    let net = complete(20);
    let p = EpidemicParams::sis(0.3, 0.1);
    let agg = monte_carlo(&net, &[0], &p, 500, StopRule::FixedTicks, 200, 8).unwrap();
    let engine = agg.mean_fraction(NodeState::I, 401, 500);
    let oracle = sis_complete_oracle(20, 0.3, 0.1, 500, 200, 1234);
    assert!(engine > 0.5, "{engine}");
    assert!((engine - oracle).abs() < 0.02, "engine {engine} oracle {oracle}");
}

#[test]
fn monte_carlo_independent_of_thread_count() {
    let net = generate_topology(TopologyKind::BarabasiAlbert { n: 40, m: 2 }, 3).unwrap();
    let p = EpidemicParams::sid(0.3, 0.1, 0.1, 0.2);
    let with_threads = |k| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .unwrap()
            .install(|| monte_carlo(&net, &[0], &p, 80, StopRule::Absorb, 64, 5).unwrap())
    };
    assert_eq!(with_threads(1), with_threads(4));
}

#[test]
fn absorb_stop_carries_final_counts() {
    let net = ring(10);
    let p = EpidemicParams::sis(0.2, 0.6);
    let agg = monte_carlo(&net, &[0], &p, 300, StopRule::Absorb, 50, 1).unwrap();
    assert!(agg.ticks <= 301);
    assert_eq!(agg.absorbed_runs, 50);
    assert_eq!(*agg.i.max.last().unwrap(), 0);
    for t in 0..agg.ticks {
        let total = agg.s.mean[t] + agg.i.mean[t];
        assert!((total - 10.0).abs() < 1e-9);
    }
}

#[test]
fn beta_monotone_outbreak() {
    let net = generate_topology(TopologyKind::BarabasiAlbert { n: 50, m: 2 }, 4).unwrap();
    let means: Vec<_> = [0.1, 0.3, 0.5]
        .iter()
        .map(|&b| monte_carlo(&net, &[0], &EpidemicParams::sir(b, 0.2), 200, StopRule::Absorb, 200, 10).unwrap())
        .collect();
    for w in means.windows(2) {
        let gap = w[1].mean_outbreak - w[0].mean_outbreak;
        let se = (w[0].stderr_outbreak.powi(2) + w[1].stderr_outbreak.powi(2)).sqrt();
        assert!(gap > 2.0 * se, "gap {gap} se {se}");
    }
}
