#![no_main]
use libfuzzer_sys::fuzz_target;
use tnkit::{io, peps};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(p) = io::peps_from_json(text) else { return };
    let again = io::peps_to_json(&p).unwrap();
    assert_eq!(io::peps_to_json(&io::peps_from_json(&again).unwrap()).unwrap(), again);
    if p.n_sites() <= 4 {
        let _ = peps::peps_contract(&p);
    }
});
