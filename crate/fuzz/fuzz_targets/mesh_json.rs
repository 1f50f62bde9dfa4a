#![no_main]

use libfuzzer_sys::fuzz_target;
use vemdyn::mesh::{mesh_from_json, mesh_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = mesh_from_json(text) {
        let again = mesh_from_json(&mesh_to_json(&m)).expect("re-parse of written mesh");
        assert_eq!(again, m);
    }
});
