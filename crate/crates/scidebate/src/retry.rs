//! Exponential backoff shared by the HTTP clients.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 4,
            base_delay_ms: 500,
            max_delay_ms: 30_000,
        }
    }
}

pub enum Attempt<T> {
    Done(T),
    /// Transient failure worth retrying, with a description.
    Retry(String),
}

impl RetryPolicy {
    pub fn delay(&self, retry: u32) -> Duration {
        let ms = self
            .base_delay_ms
            .saturating_mul(1u64.checked_shl(retry).unwrap_or(u64::MAX));
        Duration::from_millis(ms.min(self.max_delay_ms))
    }

    /// Calls `f` until it returns `Done` or the retry cap is hit. On
    /// exhaustion returns the attempt count and the last failure.
    pub fn run<T>(&self, mut f: impl FnMut(u32) -> Attempt<T>) -> Result<T, (u32, String)> {
        let mut attempt = 0;
        loop {
            match f(attempt) {
                Attempt::Done(v) => return Ok(v),
                Attempt::Retry(why) => {
                    if attempt >= self.max_retries {
                        return Err((attempt + 1, why));
                    }
                    log::warn!("attempt {} failed: {why}; retrying", attempt + 1);
                    thread::sleep(self.delay(attempt));
                    attempt += 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_doubles_and_caps() {
        let p = RetryPolicy {
            max_retries: 3,
            base_delay_ms: 100,
            max_delay_ms: 250,
        };
        assert_eq!(p.delay(0), Duration::from_millis(100));
        assert_eq!(p.delay(1), Duration::from_millis(200));
        assert_eq!(p.delay(2), Duration::from_millis(250));
        assert_eq!(p.delay(80), Duration::from_millis(250));
    }

    #[test]
    fn gives_up_after_cap() {
        let p = RetryPolicy {
            max_retries: 2,
            base_delay_ms: 0,
            max_delay_ms: 0,
        };
        let mut calls = 0;
        let r: Result<(), _> = p.run(|_| {
            calls += 1;
            Attempt::Retry("503".into())
        });
        assert_eq!(r, Err((3, "503".into())));
        assert_eq!(calls, 3);
        assert_eq!(p.run(|a| if a == 1 { Attempt::Done(a) } else { Attempt::Retry(String::new()) }), Ok(1));
    }
}
