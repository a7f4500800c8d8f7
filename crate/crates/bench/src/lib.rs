//! Shared inputs for the benchmarks.

use std::collections::BTreeMap;

use gmtjet_core::fixtures::{make_fixture, Fixture};

pub fn fixture(name: &str) -> Fixture {
    make_fixture(name, &BTreeMap::new()).expect("catalog fixture")
}
