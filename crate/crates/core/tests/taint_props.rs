mod common;

use common::props;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn straight_line_taint_equals_closure(text in props::straight_line()) {
        props::taint_equals_closure(&text)?;
    }

    #[test]
    fn taint_never_exceeds_closure(body in common::body()) {
        props::taint_within_closure(&body)?;
    }

    #[test]
    fn adding_a_seed_never_removes_taint(body in common::body()) {
        props::seeds_are_monotone(&body)?;
    }
}
