use num_rational::Ratio;

use freezing_ca::classifier::{build_obstacle, classify, CriticalityTag};
use freezing_ca::constructions::tm::{looping_machine, three_step_machine};
use freezing_ca::constructions::{compile_tm, halting_obstacle, verify_commutation, verify_fill, verify_obstacle, BlockCode};
use freezing_ca::engine::{check_fixed_point_family, step, Boundary, Window};
use freezing_ca::geometry::IntVec2;
use freezing_ca::percolation::{fixation_scan, sample_window_trial, BernoulliSpec};
use freezing_ca::rules::{canonicalize_family, family_from_rule, rule_from_family, NeighborFamily};

fn fam(sets: &[&[(i64, i64)]]) -> NeighborFamily {
    canonicalize_family(sets.iter().map(|s| s.iter().map(|&(x, y)| IntVec2::new(x, y)).collect()).collect()).unwrap()
}

#[test]
fn family_rule_family_is_identity() {
    for e in [fam(&[&[(0, 1), (1, 1)]]), fam(&[&[(-1, 0), (1, 0)], &[(0, 2), (2, -1)]]), fam(&[&[(1, 1)], &[(-2, 0), (0, -1)]])] {
        assert_eq!(family_from_rule(&rule_from_family(&e)).unwrap(), e);
    }
}

#[test]
fn obstacle_is_frozen_by_the_engine() {
    let e = fam(&[&[(-1, 0), (1, 0)], &[(0, 1), (0, -1)]]);
    assert_eq!(classify(&e).tag, CriticalityTag::StronglySubcritical);
    let c = build_obstacle(&e).unwrap();
    assert!(check_fixed_point_family(&c, &e));
    let k = rule_from_family(&e);
    let inside = |i: usize, j: usize| c.contains(&IntVec2::new(i as i64 - 6, j as i64 - 6));
    let mut w = Window::from_fn(24, 24, k.alphabet(), Boundary::Periodic, |i, j| (!inside(i, j)) as u8);
    for _ in 0..20 {
        w = step(&w, &k).unwrap();
    }
    for z in &c {
        assert_eq!(w.get((z.x + 6) as usize, (z.y + 6) as usize), 0);
    }
}

#[test]
fn coupled_samples_are_ordered() {
    let lo = sample_window_trial(BernoulliSpec { p: Ratio::new(1, 5), seed: 3 }, 7, 32, 32, Boundary::Periodic);
    let hi = sample_window_trial(BernoulliSpec { p: Ratio::new(3, 5), seed: 3 }, 7, 32, 32, Boundary::Periodic);
    assert!(lo.le(&hi));
}

#[test]
fn oriented_rule_fixes_at_high_density() {
    let h = rule_from_family(&fam(&[&[(0, 1), (1, 1)]]));
    let res = fixation_scan(&h, &[Ratio::new(1, 20), Ratio::new(1, 2)], 32, 32, 64, 20, 1).unwrap();
    assert!(res.rows[0].estimate < res.rows[1].estimate);
    assert_eq!(res.rows[1].estimate, 1.0);
}

#[test]
fn reduction_end_to_end() {
    let ft = compile_tm(&three_step_machine()).unwrap();
    let s = ft.summary();
    assert_eq!((s.states, s.tiles, s.valid_2x2), (18, 9, 101));
    let obs = halting_obstacle(&ft, 100).unwrap();
    assert_eq!(verify_obstacle(&ft, &obs, 3, 10, 1).failures, 0);
    let code = BlockCode::for_ft(&ft).unwrap();
    assert_eq!(verify_commutation(&ft, &code, Some(&obs), 8, 8, 2).unwrap().mismatches, 0);
    let looper = compile_tm(&looping_machine()).unwrap();
    let fill = verify_fill(&looper, 4, 20, 20, 3);
    assert_eq!(fill.filled, 4);
}
