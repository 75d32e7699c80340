use proptest::prelude::*;

use futgraph::syntax::alpha_eq;
use futgraph::testgen;
use futgraph_cli::parse::{parse_graph, parse_utype, parse_uvalue, parse_vsty};

proptest! {
    #[test]
    fn graph_types_print_and_parse_back(seed in any::<u64>()) {
        let g = testgen::ground_graph(&mut testgen::rng(seed), 4, 2);
        let back = parse_graph(&g.to_string()).unwrap();
        prop_assert!(alpha_eq(&back, &g), "{} vs {}", g, back);
    }

    #[test]
    fn vstypes_print_and_parse_back(seed in any::<u64>(), depth in 0usize..4) {
        let t = testgen::vsty_of_depth(&mut testgen::rng(seed), depth);
        prop_assert_eq!(parse_vsty(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn unannotated_terms_print_and_parse_back(seed in any::<u64>()) {
        let mut rng = testgen::rng(seed);
        let t = testgen::utype(&mut rng, 5);
        prop_assert_eq!(parse_utype(&t.to_string()).unwrap(), t.clone());
        if let Some(v) = testgen::uvalue(&mut rng, &t, 20) {
            prop_assert_eq!(parse_uvalue(&v.to_string()).unwrap(), v);
        }
    }
}
