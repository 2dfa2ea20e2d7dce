#![no_main]

use evsp::io::{parse_solution, solution_to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(sol) = parse_solution(text) {
        let again = parse_solution(&solution_to_json(&sol)).expect("re-parse");
        // NaN costs do not compare equal to themselves
        if sol.cost == sol.cost {
            assert_eq!(sol, again);
        }
    }
});
