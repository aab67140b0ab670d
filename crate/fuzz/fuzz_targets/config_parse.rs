#![no_main]

use libfuzzer_sys::fuzz_target;
use wsn_afsa::SimConfig;

fuzz_target!(|data: &str| {
    // Anything that parses must validate without panicking and survive a
    // print/parse cycle unchanged.
    if let Ok(cfg) = SimConfig::from_json_str(data) {
        let _ = cfg.violations();
        let again = SimConfig::from_json_str(&cfg.to_json_pretty()).expect("printed config parses");
        assert_eq!(again.to_json_pretty(), cfg.to_json_pretty());
    }
});
