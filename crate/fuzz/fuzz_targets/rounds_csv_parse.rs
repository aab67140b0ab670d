#![no_main]

use libfuzzer_sys::fuzz_target;
use wsn_afsa::output::{read_rounds_csv, rounds_csv_bytes};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_rounds_csv(data) {
        let bytes = rounds_csv_bytes(&rows).expect("parsed rows serialize");
        let back = read_rounds_csv(bytes.as_slice()).expect("written csv parses");
        // NaN never compares equal; compare the serialized form instead.
        assert_eq!(rounds_csv_bytes(&back).unwrap(), bytes);
    }
});
