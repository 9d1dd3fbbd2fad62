#![no_main]

use libfuzzer_sys::fuzz_target;
use wiregait::chain::{wire_path_length, ChainSpec};
use wiregait::config::parse_chain_configurations;

// The configurations file is untrusted input; parsing must never panic,
// and any configuration it yields must evaluate cleanly or error cleanly.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(configs) = parse_chain_configurations(text) {
            let spec = ChainSpec::default();
            for config in configs.iter().take(16) {
                let _ = config.validate(&spec);
                let _ = wire_path_length(&spec, config);
            }
        }
    }
});
