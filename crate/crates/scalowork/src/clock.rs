use std::time::{Instant, SystemTime, UNIX_EPOCH};

use scalowork_core::clock::Clock;

/// Milliseconds since the Unix epoch, read once and then advanced by a
/// monotonic timer so the clock never runs backwards.
#[derive(Debug, Clone, Copy)]
pub struct SystemClock {
    base_ms: u64,
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        let base_ms = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64);
        Self { base_ms, origin: Instant::now() }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        self.base_ms + self.origin.elapsed().as_millis() as u64
    }
}
