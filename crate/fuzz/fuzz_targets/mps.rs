#![no_main]
use libfuzzer_sys::fuzz_target;
use tnkit::{io, mps};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = io::mps_from_json(text) else { return };
    let again = io::mps_to_json(&m).unwrap();
    assert_eq!(io::mps_to_json(&io::mps_from_json(&again).unwrap()).unwrap(), again);
    if m.is_periodic() && m.bond() <= 4 && m.d() <= 4 {
        let _ = mps::transfer_operator(&m, true);
    }
});
