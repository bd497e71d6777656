#![no_main]

use libfuzzer_sys::fuzz_target;
use sublinear_sf::format::parse_instance;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(inst) = parse_instance(text) {
            // accepted instances have distinct in-range terminals
            let mut seen = vec![false; inst.n()];
            for &(s, t) in inst.pairs() {
                assert!(!std::mem::replace(&mut seen[s], true));
                assert!(!std::mem::replace(&mut seen[t], true));
            }
        }
    }
});
