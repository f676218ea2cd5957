#![no_main]
use libfuzzer_sys::fuzz_target;
use tnkit::io;

// Symmetry documents carry a group table and one unitary per element.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(s) = io::symmetry_from_json(text) else { return };
    assert_eq!(s.unitaries.len(), s.group.order());
    let again = io::symmetry_to_json(&s).unwrap();
    let back = io::symmetry_from_json(&again).unwrap();
    assert_eq!(io::symmetry_to_json(&back).unwrap(), again);
});
