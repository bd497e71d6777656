#![no_main]

use libfuzzer_sys::fuzz_target;
use sublinear_sf::format::{parse_instance, write_instance};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(inst) = parse_instance(text) else { return };
    let written = write_instance(&inst);
    let back = parse_instance(&written).expect("written instance reparses");
    assert_eq!(back.metric(), inst.metric());
    assert_eq!(back.pairs(), inst.pairs());
    assert_eq!(write_instance(&back), written);
});
