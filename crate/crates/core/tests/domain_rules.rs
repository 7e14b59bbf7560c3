mod common;

use std::collections::HashSet;

use mrplan::domain::{
    executable_macro_successors, hd_successors, ld_successors, special_projection_successors, CostTable,
};
use mrplan::graph::project;
use mrplan::maps::{gen_random_map, mixed_6x6, Densities};
use mrplan::oracle::{all_hd_states, all_ld_states};
use mrplan::{AnyState, HdState, LdState, RepId, Stance, Terrain, TransitionKind, World};
use proptest::prelude::*;

fn maps() -> Vec<World> {
    let mut v = vec![mixed_6x6()];
    v.extend((0..4).map(|s| common::random_map(s + 40, 6, 6)));
    v
}

#[test]
fn full_body_successors_match_rule_table() {
    let c = CostTable::default();
    for w in maps() {
        for s in all_hd_states(&w) {
            let got: Vec<(HdState, u64)> = hd_successors(&w, &c, &s)
                .into_iter()
                .map(|t| (*t.to.as_hd().unwrap(), t.cost))
                .collect();
            assert_eq!(got, common::hd_rules(&w, &c, &s), "{s}");
        }
    }
}

#[test]
fn low_dimensional_successors_match_rule_table() {
    let c = CostTable::default();
    for w in maps() {
        for rep in RepId::LOW_DIMENSIONAL {
            for l in all_ld_states(&w, rep) {
                let got: HashSet<(AnyState, u64)> =
                    ld_successors(&w, &c, &l).into_iter().map(|t| (t.to, t.cost)).collect();
                let want: HashSet<(AnyState, u64)> = common::ld_rules(&w, &c, &l)
                    .into_iter()
                    .map(|(t, k)| (t.into(), k))
                    .collect();
                assert_eq!(got, want, "{l}");
            }
        }
    }
}

#[test]
fn turns_and_shifts_are_reversible() {
    let c = CostTable::default();
    for w in maps() {
        for s in all_hd_states(&w) {
            for t in hd_successors(&w, &c, &s) {
                let to = *t.to.as_hd().unwrap();
                let in_place = (to.x, to.y, to.stance) == (s.x, s.y, s.stance);
                if !in_place {
                    continue;
                }
                // Inverses are taken modulo gait phase.
                let back = hd_successors(&w, &c, &to).into_iter().any(|b| {
                    let h = b.to.as_hd().unwrap();
                    b.cost == t.cost && h.theta == s.theta && h.stance == s.stance && h.cell() == s.cell()
                });
                assert!(back, "{t} has no inverse");
            }
        }
    }
}

#[test]
fn steps_are_reversible_when_terrain_allows() {
    let c = CostTable::default();
    for w in maps() {
        for s in all_hd_states(&w) {
            for t in hd_successors(&w, &c, &s) {
                let to = *t.to.as_hd().unwrap();
                if (to.x, to.y) == (s.x, s.y) {
                    continue;
                }
                // Facing back, some gait phase allows the reverse step.
                let reverse = (0..4).any(|phase| {
                    let back = HdState {
                        theta: (to.theta + 4) % 8,
                        phase,
                        ..to
                    };
                    hd_successors(&w, &c, &back)
                        .iter()
                        .any(|b| b.to.cell() == (s.x, s.y) && b.cost == t.cost)
                });
                assert!(reverse, "step {t} cannot be undone");
            }
        }
    }
}

#[test]
fn macros_project_onto_low_dimensional_actions() {
    let c = CostTable::default();
    for w in maps() {
        for s in all_hd_states(&w) {
            let rep = s.stance.native_rep();
            let l = project(rep, &s);
            let ld: Vec<_> = ld_successors(&w, &c, &l);
            for m in executable_macro_successors(&w, &c, &s) {
                assert!(matches!(m.kind, TransitionKind::HdMacro(_)));
                let to = project(rep, m.to.as_hd().unwrap());
                assert!(
                    ld.iter().any(|t| t.to == to.into() && t.cost == m.cost),
                    "macro {m} has no low-dimensional counterpart"
                );
                assert_eq!(m.to.as_hd().unwrap().phase, 0);
            }
        }
    }
}

#[test]
fn successor_lists_are_duplicate_free() {
    let c = CostTable::default();
    for w in maps() {
        for s in all_hd_states(&w) {
            let mut all = hd_successors(&w, &c, &s);
            all.extend(executable_macro_successors(&w, &c, &s));
            let keys: HashSet<_> = all.iter().map(|t| (t.kind, t.to)).collect();
            assert_eq!(keys.len(), all.len(), "{s}");
        }
        for rep in RepId::LOW_DIMENSIONAL {
            for l in all_ld_states(&w, rep) {
                let mut all = ld_successors(&w, &c, &l);
                all.extend(special_projection_successors(&w, &c, &l));
                let keys: HashSet<_> = all.iter().map(|t| t.to).collect();
                assert_eq!(keys.len(), all.len(), "{l}");
            }
        }
    }
}

#[test]
fn open_interior_state_has_five_successors() {
    let w = World::filled(7, 7, Terrain::Free);
    let s = HdState::new(3, 3, 0, Stance::Stand, 0);
    assert_eq!(hd_successors(&w, &CostTable::default(), &s).len(), 5);
}

#[test]
fn rubble_step_needs_final_phase() {
    let w = World::parse("4 1\n..%.").unwrap();
    let c = CostTable::default();
    let steps = |phase| {
        hd_successors(&w, &c, &HdState::new(1, 0, 0, Stance::Stand, phase))
            .into_iter()
            .filter(|t| t.to.cell() == (2, 0))
            .collect::<Vec<_>>()
    };
    assert!(steps(0).is_empty());
    let s = steps(3);
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].cost, 4);
    assert_eq!(s[0].to.as_hd().unwrap().phase, 0);
}

#[test]
fn low_dimensional_examples() {
    let open = World::filled(7, 7, Terrain::Free);
    let c = CostTable::default();
    assert_eq!(ld_successors(&open, &c, &LdState::walk(3, 3, 2)).len(), 3);
    assert_eq!(ld_successors(&open, &c, &LdState::crawl(0, 0)).len(), 2);
    let low = World::parse("3 1\n.~.").unwrap();
    assert!(ld_successors(&low, &c, &LdState::walk(0, 0, 0))
        .iter()
        .all(|t| t.to.cell() != (1, 0)));
    assert_eq!(
        special_projection_successors(&open, &c, &LdState::walk(3, 3, 1)).len(),
        1
    );
    assert_eq!(special_projection_successors(&open, &c, &LdState::crawl(3, 3)).len(), 8);
    assert!(special_projection_successors(&low, &c, &LdState::crawl(1, 0)).is_empty());
}

#[test]
fn cost_tables_breaking_dominance_are_rejected() {
    assert!(CostTable::new(CostTable::default()).is_ok());
    let bad = CostTable {
        walk_step: 5,
        ..CostTable::default()
    };
    assert!(CostTable::new(bad).is_err());
    let zero = CostTable {
        rotate: 0,
        ..CostTable::default()
    };
    assert!(CostTable::new(zero).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_maps_are_reproducible(seed in any::<u64>(), w in 3usize..12, h in 3usize..12, wall in 0.0f64..0.5) {
        let d = Densities { wall, low: 0.1, rubble: 0.1 };
        let a = gen_random_map(seed, w, h, d, &[(1, 1)]);
        prop_assert_eq!(&a, &gen_random_map(seed, w, h, d, &[(1, 1)]));
        prop_assert_eq!(a.terrain(1, 1), Terrain::Free);
        prop_assert_eq!(a.terrain(0, 0), Terrain::Wall);
    }

    #[test]
    fn successors_are_valid_states(seed in 0u64..300, idx in 0usize..10_000) {
        let w = common::random_map(seed, 7, 7);
        let c = CostTable::default();
        let states = all_hd_states(&w);
        prop_assume!(!states.is_empty());
        let s = states[idx % states.len()];
        for t in hd_successors(&w, &c, &s).into_iter().chain(executable_macro_successors(&w, &c, &s)) {
            prop_assert!(common::hd_ok(&w, t.to.as_hd().unwrap()));
            prop_assert!(t.cost > 0);
        }
    }
}
