#![no_main]

use evsp::io::{instance_to_json, parse_instance};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(inst) = parse_instance(text) {
        // anything accepted must survive a round trip
        let again = parse_instance(&instance_to_json(&inst)).expect("re-parse");
        assert_eq!(inst, again);
    }
});
