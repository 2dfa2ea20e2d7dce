#![no_main]

use evsp::charge_arcs::{build_network, SequenceLimits};
use evsp::io::parse_instance;
use libfuzzer_sys::fuzz_target;

// Validated instances must never make the arc builder panic.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(inst) = parse_instance(text) else {
        return;
    };
    if inst.n_services() > 12 || inst.stations.len() > 4 {
        return;
    }
    let _ = build_network(&inst, SequenceLimits::default());
});
