//! Wire-format invariants: everything the loaders accept serializes back to
//! something the loaders accept, landing on an equal value.

#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;

use conemetric::{Cone, FiniteConeSpace, MapSpec};

fn arb_cone() -> impl Strategy<Value = Cone> {
    prop_oneof![
        (1usize..6).prop_map(|dim| Cone::orthant(dim).unwrap()),
        (2usize..6).prop_map(|dim| Cone::second_order(dim).unwrap()),
    ]
}

fn arb_space() -> impl Strategy<Value = FiniteConeSpace> {
    // Ray-lifted scalar tables over a random orthant: always well formed.
    (2usize..6, 1usize..4).prop_flat_map(|(n, dim)| {
        let entries = proptest::collection::vec(0.5_f64..3.0, n * (n - 1) / 2);
        let ray = proptest::collection::vec(0.2_f64..2.0, dim);
        (entries, ray).prop_map(move |(entries, ray)| {
            let mut dist = vec![vec![vec![0.0; dim]; n]; n];
            let mut it = entries.into_iter();
            for i in 0..n {
                for j in i + 1..n {
                    let v = it.next().unwrap();
                    dist[i][j] = ray.iter().map(|r| r * v).collect();
                    dist[j][i] = dist[i][j].clone();
                }
            }
            let labels = (0..n).map(|i| i.to_string()).collect();
            FiniteConeSpace::new(labels, Cone::orthant(dim).unwrap(), dist).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn cone_json_round_trips(cone in arb_cone()) {
        let json = serde_json::to_string(&cone).unwrap();
        let back: Cone = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(cone, back);
    }

    #[test]
    fn space_json_round_trips(space in arb_space()) {
        let json = serde_json::to_string(&space).unwrap();
        let back: FiniteConeSpace = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(space, back);
    }

    #[test]
    fn affine_map_json_round_trips(
        a in -3.0_f64..3.0,
        b in -3.0_f64..3.0,
        c in -3.0_f64..3.0,
    ) {
        let map = MapSpec::Affine { matrix: vec![vec![a]], offset: vec![b + c] };
        let json = serde_json::to_string(&map).unwrap();
        let back: MapSpec = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(map, back);
    }
}
