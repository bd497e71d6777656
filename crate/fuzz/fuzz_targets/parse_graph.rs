#![no_main]

use libfuzzer_sys::fuzz_target;
use sublinear_sf::format::parse_graph;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(g) = parse_graph(text) {
            for (u, v) in g.edges() {
                assert!(u < v && g.has_edge(v, u));
            }
        }
    }
});
