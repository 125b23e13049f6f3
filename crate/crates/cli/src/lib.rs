//! Library surface of the gwlab command line tool, exposed so integration
//! tests can drive commands directly.

pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

pub const OUT_DIR_ENV: &str = "GWLAB_OUT_DIR";

/// Output directory precedence: CLI flag, then environment, then config.
pub fn resolve_out_dir(flag: Option<PathBuf>, config_dir: &str) -> PathBuf {
    if let Some(dir) = flag {
        return dir;
    }
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(config_dir)
}
