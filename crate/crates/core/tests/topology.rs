use std::collections::{BTreeMap, BTreeSet};

use failprop_core::topology::Warning;
use failprop_core::{generate_topology, load_edge_list, validate, Network, NodeRole, TopologyKind};
use proptest::prelude::*;

const ROLES: [NodeRole; 4] = [NodeRole::EdgeSwitch, NodeRole::CoreSwitch, NodeRole::Controller, NodeRole::Generic];

fn arb_network() -> impl Strategy<Value = Network> {
    (1usize..14).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec((0..n, 0..n), 0..30),
            prop::collection::vec(0usize..4, n),
            prop::collection::vec(prop::collection::vec(any::<u8>(), 0..4), n),
            prop::collection::btree_set(0..n, 0..3),
        )
            .prop_map(|(n, raw_edges, role_idx, pref_keys, named)| {
                let edges: BTreeSet<_> = raw_edges
                    .into_iter()
                    .filter(|(u, v)| u != v)
                    .map(|(u, v)| (u.min(v), u.max(v)))
                    .collect();
                let roles: BTreeMap<_, _> = role_idx.iter().enumerate().map(|(i, &r)| (i, ROLES[r])).collect();
                let controllers: Vec<usize> = (0..n).filter(|&i| roles[&i] == NodeRole::Controller).collect();
                let mut prefs = BTreeMap::new();
                for (s, keys) in pref_keys.iter().enumerate() {
                    if !roles[&s].is_switch() || controllers.is_empty() {
                        continue;
                    }
                    let mut list: Vec<usize> = keys.iter().map(|k| controllers[*k as usize % controllers.len()]).collect();
                    let mut seen = BTreeSet::new();
                    list.retain(|c| seen.insert(*c));
                    prefs.insert(s, list);
                }
                let aliases = named.into_iter().map(|id| (format!("node_{id}"), id)).collect();
                Network::new(n, edges, roles, prefs, aliases).expect("constructed valid")
            })
    })
}

proptest! {
    #[test]
    fn edge_list_round_trip(net in arb_network()) {
        let text = net.to_edge_list();
        prop_assert_eq!(load_edge_list(&text).unwrap(), net);
    }

    #[test]
    fn neighbors_symmetric(net in arb_network()) {
        for u in 0..net.node_count() {
            for &v in net.neighbors(u).unwrap() {
                prop_assert!(net.neighbors(v).unwrap().contains(&u));
            }
        }
    }

    #[test]
    fn generated_networks_are_valid_and_reproducible(n in 3usize..40, m in 1usize..3, p in 0.0f64..1.0, seed in any::<u64>()) {
        for kind in [
            TopologyKind::ErdosRenyi { n, p },
            TopologyKind::BarabasiAlbert { n, m },
            TopologyKind::Ring { n },
            TopologyKind::Grid { rows: n / 3 + 1, cols: 3 },
        ] {
            let a = generate_topology(kind, seed).unwrap();
            let b = generate_topology(kind, seed).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(validate(&a).is_valid());
            prop_assert!(a.roles().iter().all(|r| *r == NodeRole::Generic));
        }
    }

    /// DP-disconnected warning agrees with a union-find count.
    #[test]
    fn disconnected_warning_matches_union_find(n in 2usize..20, raw in prop::collection::vec((0usize..20, 0usize..20), 0..25)) {
        let edges: BTreeSet<_> = raw.into_iter()
            .filter(|(u, v)| u != v && *u < n && *v < n)
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        let net = Network::from_edges(n, edges.iter().copied()).unwrap();
        let components = union_find_components(n, &edges);
        let report = validate(&net);
        let expected = if components > 1 { vec![Warning::DpDisconnected { components }] } else { vec![] };
        prop_assert_eq!(report.warnings, expected);
    }
}

fn union_find_components(n: usize, edges: &BTreeSet<(usize, usize)>) -> usize {
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut x = x;
        while parent[x] != r {
            let next = parent[x];
            parent[x] = r;
            x = next;
        }
        r
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        parent[a] = b;
    }
    (0..n).filter(|&x| find(&mut parent, x) == x).count()
}

#[test]
fn erdos_renyi_mean_edge_count() {
    let (n, p) = (50, 0.2);
    let total: usize = (0..1000)
        .map(|seed| generate_topology(TopologyKind::ErdosRenyi { n, p }, seed).unwrap().edge_count())
        .sum();
    let mean = total as f64 / 1000.0;
    let expected = p * (n * (n - 1)) as f64 / 2.0;
    assert!((mean - expected).abs() < 0.05 * expected, "mean {mean} vs {expected}");
}

#[test]
fn different_seeds_differ() {
    let a = generate_topology(TopologyKind::BarabasiAlbert { n: 30, m: 2 }, 1).unwrap();
    let b = generate_topology(TopologyKind::BarabasiAlbert { n: 30, m: 2 }, 2).unwrap();
    assert_ne!(a, b);
}

#[test]
fn comments_and_names() {
    let net = load_edge_list("# backbone\nmad bcn  # link\nbcn par\n[aliases]\nlon=7\n").unwrap();
    // Explicit alias claims id 7, so fresh names start at 8.
    assert_eq!(net.resolve("lon"), Some(7));
    assert_eq!(net.resolve("mad"), Some(8));
    assert_eq!(net.resolve("bcn"), Some(9));
    assert_eq!(net.node_count(), 11);
    assert!(net.has_edge(9, 10));
}
