use std::sync::atomic::{AtomicI64, Ordering};

use chrono::{DateTime, Duration, TimeZone, Utc};

pub type Timestamp = DateTime<Utc>;

pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        Utc::now()
    }
}

/// Deterministic clock: every call returns the previous instant plus a fixed step.
/// Used for reproducible transcripts and tests.
#[derive(Debug)]
pub struct StepClock {
    next_ms: AtomicI64,
    step_ms: i64,
}

impl StepClock {
    pub fn new(start: Timestamp, step: Duration) -> Self {
        StepClock {
            next_ms: AtomicI64::new(start.timestamp_millis()),
            step_ms: step.num_milliseconds(),
        }
    }

    /// Starts at 2024-01-01T00:00:00Z with a one millisecond step.
    pub fn starting_at_epoch_2024() -> Self {
        StepClock::new(
            Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
            Duration::milliseconds(1),
        )
    }

    /// Moves the clock forward without producing a reading.
    pub fn advance(&self, by: Duration) {
        self.next_ms.fetch_add(by.num_milliseconds(), Ordering::SeqCst);
    }
}

impl Clock for StepClock {
    fn now(&self) -> Timestamp {
        let ms = self.next_ms.fetch_add(self.step_ms, Ordering::SeqCst);
        Utc.timestamp_millis_opt(ms).unwrap()
    }
}
