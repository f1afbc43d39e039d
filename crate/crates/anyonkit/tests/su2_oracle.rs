mod common;

use anyonkit::liealg::AlgebraName;
use anyonkit::theory::{TheoryData, TheoryOptions};

#[test]
fn general_pipeline_matches_closed_forms() {
    for k in 1..=4 {
        let t = TheoryData::build(AlgebraName::A1, k, &TheoryOptions::default()).unwrap();
        let e = common::su2_oracle(&t);
        assert!(e.max() < 1e-10, "k = {k}: {e:?}");
        assert!(e.count > 0);
    }
}
