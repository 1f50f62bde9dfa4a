#![no_main]

use libfuzzer_sys::fuzz_target;
use vemdyn::agglomerate::parse_groups;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_groups(text);
    }
});
