#![no_main]

use libfuzzer_sys::fuzz_target;
use sublinear_sf::format::{parse_graph, write_graph};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(g) = parse_graph(text) else { return };
    let back = parse_graph(&write_graph(&g)).expect("written graph reparses");
    assert_eq!(back, g);
});
