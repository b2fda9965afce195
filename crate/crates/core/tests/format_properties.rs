use dynkin_core::io::{game_to_string, gen_game, parse_game, GenMode, GenParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_games_round_trip(
        seed in any::<u64>(), n in 2usize..=5, depth in 1usize..=4,
        branching in 1usize..=3, touching in any::<bool>(),
    ) {
        let mode = if touching { GenMode::Touching } else { GenMode::Strict };
        let g = gen_game(&GenParams::new(n, depth, branching, seed, mode)).unwrap();
        prop_assert!(g.validate(0.0).passed);
        let text = game_to_string(&g);
        let back = parse_game(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(game_to_string(&back), text);
    }
}
