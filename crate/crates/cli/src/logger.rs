use std::collections::BTreeSet;
use std::io::Write;

use log::{Level, LevelFilter, Log, Metadata, Record};

/// Writes `LEVEL [channel] message` to standard error. The channel is the
/// record's target; module-path targets are reduced to the module name.
struct ChannelLogger {
    level: LevelFilter,
    channels: BTreeSet<String>,
}

pub fn channel_of(target: &str) -> &str {
    match target.split("::").nth(1) {
        Some(module) => module,
        None => target,
    }
}

impl Log for ChannelLogger {
    fn enabled(&self, metadata: &Metadata) -> bool {
        metadata.level() <= self.level
            && (self.channels.is_empty() || self.channels.contains(channel_of(metadata.target())))
    }

    fn log(&self, record: &Record) {
        if !self.enabled(record.metadata()) {
            return;
        }
        let level = match record.level() {
            Level::Error => "ERROR",
            Level::Warn => "WARN",
            Level::Info => "INFO",
            Level::Debug => "DEBUG",
            Level::Trace => "TRACE",
        };
        let mut err = std::io::stderr().lock();
        let _ = writeln!(err, "{level} [{}] {}", channel_of(record.target()), record.args());
    }

    fn flush(&self) {}
}

pub fn init(level: LevelFilter, channels: &[String]) {
    let logger = ChannelLogger {
        level,
        channels: channels.iter().cloned().collect(),
    };
    if log::set_boxed_logger(Box::new(logger)).is_ok() {
        log::set_max_level(level);
    }
}
