//! Clock abstraction so every time budget can run against either wall time
//! or a deterministic virtual clock.
//!
//! Work loops report their progress through [`Clock::charge`]. The real clock
//! ignores charges and reads `Instant`; the virtual clock advances only by
//! the charged amounts, which makes whole-pipeline runs reproducible.

use std::cell::Cell;
use std::time::Instant;

pub trait Clock {
    /// Seconds since the clock was created.
    fn now(&self) -> f64;

    /// Accounts `seconds` of simulated work. No-op on the real clock.
    fn charge(&self, seconds: f64);

    fn is_virtual(&self) -> bool {
        false
    }
}

pub struct RealClock {
    start: Instant,
}

impl RealClock {
    pub fn new() -> Self {
        RealClock {
            start: Instant::now(),
        }
    }
}

impl Default for RealClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for RealClock {
    fn now(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn charge(&self, _seconds: f64) {}
}

/// Deterministic clock: time is exactly the sum of charges so far.
pub struct VirtualClock {
    elapsed: Cell<f64>,
}

impl VirtualClock {
    pub fn new() -> Self {
        VirtualClock {
            elapsed: Cell::new(0.0),
        }
    }
}

impl Default for VirtualClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for VirtualClock {
    fn now(&self) -> f64 {
        self.elapsed.get()
    }

    fn charge(&self, seconds: f64) {
        debug_assert!(seconds >= 0.0);
        self.elapsed.set(self.elapsed.get() + seconds);
    }

    fn is_virtual(&self) -> bool {
        true
    }
}
