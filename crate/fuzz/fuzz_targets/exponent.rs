#![no_main]

use libfuzzer_sys::fuzz_target;
use vemdyn::hni::MonomialExponent;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(e) = text.parse::<MonomialExponent>() {
        assert_eq!(e.to_string().parse::<MonomialExponent>().unwrap(), e);
    }
});
