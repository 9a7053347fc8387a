use arise_core::bounds::{f_bounds, intersect, v_bounds};
use arise_core::game::budget::expected_customers;
use arise_core::game::hotelling::market_shares;
use arise_core::solver::{update_roi, RoiState};
use arise_core::space::{unit_grid, DEFAULT_SPACE_CAP};
use arise_core::{BoundsTable, EnvelopeState, Game, GameSpec, Interval, JointSpace, MatrixPayoffs, Region};
use proptest::prelude::*;

const K: usize = 4;

fn grid() -> JointSpace {
    JointSpace::new(vec![unit_grid(K, 1), unit_grid(K, 1)], DEFAULT_SPACE_CAP).unwrap()
}

fn interval_from(pairs: &[(f64, f64)]) -> Interval {
    Interval {
        lcb: pairs.iter().map(|(c, w)| c - w).collect(),
        ucb: pairs.iter().map(|(c, w)| c + w).collect(),
    }
}

fn pairs(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0..2.0f64, 0.0..1.0f64), len)
}

fn region(len: usize) -> impl Strategy<Value = Region> {
    prop::collection::vec(any::<bool>(), len).prop_filter_map("empty region", move |mask| {
        let ids: Vec<usize> = (0..len).filter(|&i| mask[i]).collect();
        (!ids.is_empty()).then(|| Region::from_ids(len, ids))
    })
}

proptest! {
    #[test]
    fn envelope_intervals_are_nested(seq in prop::collection::vec(pairs(6), 1..8)) {
        let mut env = EnvelopeState::new(true);
        let mut last: Option<Interval> = None;
        for step in &seq {
            let current = interval_from(step);
            let out = env.apply(vec![current.clone()]).remove(0);
            for k in 0..6 {
                prop_assert!(out.lcb[k] <= out.ucb[k]);
                if let Some(prev) = &last {
                    prop_assert!(out.lcb[k] >= prev.lcb[k]);
                    prop_assert!(out.ucb[k] <= prev.ucb[k]);
                    let overlaps = prev.lcb[k].max(current.lcb[k]) <= prev.ucb[k].min(current.ucb[k]);
                    if overlaps {
                        prop_assert!(out.lcb[k] >= current.lcb[k] && out.ucb[k] <= current.ucb[k]);
                    }
                }
            }
            last = Some(out);
        }
    }

    #[test]
    fn intersect_is_idempotent(p in pairs(5)) {
        let a = interval_from(&p);
        prop_assert_eq!(intersect(&a, &a), a);
    }

    #[test]
    fn bounds_are_ordered(u0 in pairs(K * K), u1 in pairs(K * K), s in region(K * K)) {
        let space = grid();
        let table = BoundsTable::compose(1, 1.0, vec![interval_from(&u0), interval_from(&u1)], &space, s.clone()).unwrap();
        for &id in s.ids() {
            for i in 0..2 {
                prop_assert!(table.u[i].lcb[id] <= table.u[i].ucb[id]);
                prop_assert!(table.v[i].lcb[id] <= table.v[i].ucb[id]);
            }
            prop_assert!(table.f.lcb[id] <= table.f.ucb[id]);
        }
    }

    #[test]
    fn partial_maxima_shrink_with_the_region(u in pairs(K * K), big in region(K * K), keep in prop::collection::vec(any::<bool>(), K * K)) {
        let space = grid();
        let small_ids: Vec<usize> = big.ids().iter().copied().filter(|&i| keep[i]).collect();
        prop_assume!(!small_ids.is_empty());
        let small = Region::from_ids(K * K, small_ids);
        let u = interval_from(&u);
        for agent in 0..2 {
            let vb = v_bounds(&u, &space, &big, agent);
            let vs = v_bounds(&u, &space, &small, agent);
            for &id in small.ids() {
                prop_assert!(vs.ucb[id] <= vb.ucb[id]);
                prop_assert!(vs.lcb[id] <= vb.lcb[id]);
            }
        }
    }

    #[test]
    fn loss_bounds_contain_exact_loss(
        payoffs in prop::collection::vec(-1.0..1.0f64, 2 * K * K),
        slack in prop::collection::vec((0.0..0.5f64, 0.0..0.5f64), 2 * K * K),
    ) {
        let tables = vec![payoffs[..K * K].to_vec(), payoffs[K * K..].to_vec()];
        let game = Game::new(GameSpec::matrix(MatrixPayoffs { strategies: vec![K, K], payoffs: tables.clone() })).unwrap();
        let space = game.space();
        let u: Vec<Interval> = (0..2)
            .map(|i| Interval {
                lcb: (0..K * K).map(|id| tables[i][id] - slack[i * K * K + id].0).collect(),
                ucb: (0..K * K).map(|id| tables[i][id] + slack[i * K * K + id].1).collect(),
            })
            .collect();
        let full = Region::full(K * K);
        let v: Vec<Interval> = (0..2).map(|i| v_bounds(&u[i], space, &full, i)).collect();
        let f = f_bounds(&u, &v, full.ids()).unwrap();
        for id in 0..K * K {
            let exact = game.exact_loss(id);
            prop_assert!(exact >= 0.0);
            prop_assert!(f.lcb[id] <= exact + 1e-12 && exact <= f.ucb[id] + 1e-12);
        }
    }

    #[test]
    fn roi_only_shrinks(seq in prop::collection::vec((pairs(K * K), pairs(K * K)), 1..6)) {
        let space = grid();
        let mut roi = RoiState::full(K * K);
        for (a, b) in &seq {
            let table = BoundsTable::compose(1, 1.0, vec![interval_from(a), interval_from(b)], &space, Region::full(K * K)).unwrap();
            let next = update_roi(&table, &roi).unwrap().state;
            prop_assert!(!next.active.is_empty());
            prop_assert!(next.active.is_subset_of(&roi.active));
            roi = next;
        }
    }

    #[test]
    fn hotelling_shares_sum_to_one(locs in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 2), 2..5)) {
        let views: Vec<&[f64]> = locs.iter().map(|v| v.as_slice()).collect();
        let shares = market_shares(&views, 41);
        prop_assert!((shares.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(shares.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn budget_outcome_is_permutation_symmetric(probs in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 5), 3)) {
        let views: Vec<&[f64]> = probs.iter().map(|v| v.as_slice()).collect();
        let base = expected_customers(&views);
        let rotated: Vec<&[f64]> = vec![views[2], views[0], views[1]];
        let out = expected_customers(&rotated);
        prop_assert!((out[0] - base[2]).abs() < 1e-12);
        prop_assert!((out[1] - base[0]).abs() < 1e-12);
        prop_assert!((out[2] - base[1]).abs() < 1e-12);
    }
}
