#![no_main]

use libfuzzer_sys::fuzz_target;
use wsn_afsa::sim::parse_algorithm_list;

fuzz_target!(|data: &str| {
    if let Ok(list) = parse_algorithm_list(data) {
        assert!(!list.is_empty());
        let joined = list.iter().map(|a| a.name()).collect::<Vec<_>>().join(",");
        assert_eq!(parse_algorithm_list(&joined).unwrap(), list);
    }
});
