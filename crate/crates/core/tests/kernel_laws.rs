mod common;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn laws_hold(a in common::tree(), b in common::tree(), c in common::tree()) {
        common::check_laws(&common::kernel_space(), &a, &b, &c)?;
    }
}
