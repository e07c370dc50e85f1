mod common;

use bb1spin::sequence::{format_program, parse_program};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn format_then_parse_is_identity(p in common::program()) {
        let text = format_program(&p);
        let back = parse_program(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(format_program(&back), text);
    }

    #[test]
    fn canonical_text_is_a_fixed_point(p in common::program()) {
        let once = format_program(&parse_program(&format_program(&p)).unwrap());
        let upper = once.to_uppercase().replace("E-", "e-");
        let twice = format_program(&parse_program(&upper).unwrap());
        prop_assert_eq!(once, twice);
    }
}
