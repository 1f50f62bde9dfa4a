#![no_main]

use libfuzzer_sys::fuzz_target;
use vemdyn::config::Config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(c) = Config::parse(text) {
        let canon = c.canonical();
        let back = Config::parse(&canon).expect("re-parse of canonical config");
        assert_eq!(back.canonical(), canon);
    }
});
