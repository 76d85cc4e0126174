mod common;

use common::{check_bounds, check_engines, check_oracle, instances};
use omq::bench::Method;

fn run(method: Method, count: usize, seed: u64) {
    for (i, inst) in instances(method, count, seed).iter().enumerate() {
        if let Err(e) = check_oracle(method, inst) {
            panic!("instance {i}: {e}");
        }
        if let Err(e) = check_bounds(method, inst) {
            panic!("instance {i}: {e}");
        }
        if let Err(e) = check_engines(method, inst) {
            panic!("instance {i}: {e}");
        }
    }
}

#[test]
fn slice_matches_chase() {
    run(Method::Slice, 60, 11);
}

#[test]
fn td_matches_chase() {
    run(Method::Td, 60, 12);
}

#[test]
fn tw_matches_chase() {
    run(Method::Tw, 60, 13);
}
