use dynkin_core::io::{demo_constant, gen_game, GenMode, GenParams};
use dynkin_core::scheme::{
    audit_deviation_bound, audit_iteration, default_max_rounds, run, run_from, SchemeState,
};
use dynkin_core::tree::DEFAULT_ENUMERATION_CAP;
use dynkin_core::{Game, GameSpec, ScenarioTree};

fn game(players: usize, depth: usize, seed: u64, mode: GenMode) -> Game {
    gen_game(&GenParams::new(players, depth, 2, seed, mode)).unwrap()
}

#[test]
fn runs_converge_within_bound_and_audit_clean() {
    for seed in 0..60 {
        let n = 2 + (seed % 4) as usize;
        let mode = if seed % 3 == 0 { GenMode::Touching } else { GenMode::Strict };
        let g = game(n, 2 + (seed % 4) as usize, seed, mode);
        let bound = default_max_rounds(&g);
        let (cand, state) = run(&g, bound).unwrap();
        assert!(cand.converged, "seed {seed}");
        assert!(cand.rounds_used < bound, "seed {seed}");
        assert_eq!(state.trace().len(), cand.rounds_used * n);
        assert_eq!(audit_iteration(g.tree(), &state).unwrap(), vec![], "seed {seed}");
    }
}

#[test]
fn iterates_never_move_later() {
    for seed in 0..30 {
        let g = game(3, 4, seed, GenMode::Strict);
        let (_, state) = run(&g, default_max_rounds(&g)).unwrap();
        for rec in state.trace() {
            let new = g.tree().leaf_depths(&rec.tau).unwrap();
            let old = g.tree().leaf_depths(rec.previous_tau()).unwrap();
            assert!(new.iter().zip(&old).all(|(a, b)| a <= b));
        }
    }
}

#[test]
fn each_step_value_is_optimal_over_all_stopping_times() {
    for seed in 0..15 {
        let g = game(3, 3, seed, if seed % 2 == 0 { GenMode::Strict } else { GenMode::Touching });
        let tree = g.tree();
        let all = tree.enumerate_stopping_times(DEFAULT_ENUMERATION_CAP).unwrap();
        let (_, state) = run(&g, default_max_rounds(&g)).unwrap();
        for rec in state.trace() {
            let best = all.iter().map(|t| tree.expect_at(&rec.obstacle, t).unwrap()).fold(f64::MIN, f64::max);
            assert!((best - rec.root_value).abs() <= 1e-12);
            assert!((tree.expect_at(&rec.obstacle, &rec.mu).unwrap() - rec.root_value).abs() <= 1e-12);
        }
    }
}

#[test]
fn deviation_bound_holds_at_every_step() {
    for seed in 0..10 {
        let g = game(3, 3, seed, GenMode::Strict);
        let (_, state) = run(&g, default_max_rounds(&g)).unwrap();
        let v = audit_deviation_bound(&g, &state, DEFAULT_ENUMERATION_CAP, 1e-9).unwrap();
        assert!(v.is_empty(), "seed {seed}: {v:?}");
    }
}

#[test]
fn fixed_point_is_stable() {
    for seed in 0..20 {
        let g = game(4, 3, seed, GenMode::Touching);
        let (cand, mut state) = run(&g, default_max_rounds(&g)).unwrap();
        let n = g.n_players();
        let last: Vec<_> = state.trace()[state.trace().len() - n..].to_vec();
        for prev in &last {
            let rec = state.step(&g).unwrap();
            assert_eq!((&rec.theta, &rec.mu, &rec.tau), (&prev.theta, &prev.mu, &prev.tau));
            assert_eq!(rec.root_value, prev.root_value);
        }
        let replay = SchemeState::init_from_profile(&g, cand.t_star.clone()).unwrap();
        let (again, _) = run_from(&g, replay, 5).unwrap();
        assert_eq!(again.t_star, cand.t_star);
        assert_eq!(again.rounds_used, 1);
    }
}

#[test]
fn exhausted_round_budget_is_reported() {
    // find a game that needs more than one round, then starve it
    let g = (0..50)
        .map(|s| game(3, 4, s, GenMode::Strict))
        .find(|g| run(g, 100).unwrap().0.rounds_used > 1)
        .expect("some game moves");
    let (cand, _) = run(&g, 1).unwrap();
    assert!(!cand.converged);
    assert_eq!(cand.rounds_used, 1);
}

#[test]
fn constant_game_in_single_precision() {
    let tree = ScenarioTree::<f32>::uniform(3, 2).unwrap();
    let g = GameSpec::constant(tree, 3, 0.5f32, 1.0, 1.0).unwrap();
    let (cand, state) = run(&g, default_max_rounds(&g)).unwrap();
    assert!(cand.converged);
    assert_eq!(cand.rounds_used, 1);
    assert!(audit_iteration(g.tree(), &state).unwrap().is_empty());
    let cert = dynkin_core::verify::verify_nash(&g, &cand.t_star, 1e-5).unwrap();
    assert!(cert.is_nash);
}

#[test]
fn two_players_are_supported() {
    let g = demo_constant(2, 3, 3).unwrap();
    let (cand, _) = run(&g, default_max_rounds(&g)).unwrap();
    assert!(cand.converged);
    let h = g.tree().horizon_time();
    assert_eq!(cand.r_star_i, vec![h.clone(), h]);
}
