#![no_main]
use libfuzzer_sys::fuzz_target;
use tnkit::{io, mpo};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(o) = io::mpo_from_json(text) else { return };
    let again = io::mpo_to_json(&o).unwrap();
    assert_eq!(io::mpo_to_json(&io::mpo_from_json(&again).unwrap()).unwrap(), again);
    if o.bond() <= 2 && o.d_in() <= 2 && o.d_out() == o.d_in() {
        let _ = mpo::is_unitary_mpu(&o);
    }
});
