//! The conversion driver: profiles, phase orchestration, the structured
//! log and locator resolution.

mod convert;
mod locate;
mod profile;
mod resolve;

pub use convert::{convert, convert_cancellable, convert_document, ConversionResult, LogEntry, Phase, Status, Timings};
pub use locate::{locate, log_to_json_lines, Fault, LogRecord};
pub use profile::{
    load_profile, read_profile_file, InputKind, OutputFormat, Profile, ProfileError, ProfileOptions, ProfileRegistry, BUILTIN_PROFILES,
    OPTION_KEYS,
};
pub use resolve::{is_safe_relative, DirResolver, MapResolver};

/// Build identifier stamped on every result and serialized log.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("TEXMATH_BUILD_REV"));
