#![no_main]
use libfuzzer_sys::fuzz_target;
use tnkit::{io, symmetry};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(g) = io::group_from_json(text) else { return };
    let again = io::group_to_json(&g);
    assert_eq!(io::group_from_json(&again).unwrap().table(), g.table());
    for a in 0..g.order() {
        assert_eq!(g.mul(a, g.inv(a)), g.identity());
    }
    if g.order() <= 8 {
        let _ = symmetry::cohomology_group(&g);
    }
});
