#![no_main]

use libfuzzer_sys::fuzz_target;
use wiregait::config::ProjectConfig;

// Parsing and validating a project config must never panic: either a
// config comes back or a clean error does.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ProjectConfig::from_toml_str(text) {
            let _ = cfg.leg_geometry();
            let _ = cfg.gait_parameters();
            let _ = cfg.plan_limits();
            let _ = cfg.tendon_pair();
            let _ = cfg.chain_spec();
            let _ = cfg.efficiency_bands();
            let _ = cfg.pipeline_config();
            let _ = cfg.optimize_options(0);
        }
    }
});
