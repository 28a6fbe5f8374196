//! Retry, rate limiting and bounded fan-out shared by the network clients.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use verse_eval_core::{ProviderError, ProviderErrorKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    /// Total attempts, including the first.
    pub max_attempts: u32,
    /// Delay before the second attempt; doubled for each later one.
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    /// Delay slept after failed attempt number `attempt` (1-based).
    pub fn delay_after(&self, attempt: u32) -> Duration {
        self.base_delay.saturating_mul(
            1u32.checked_shl(attempt.saturating_sub(1))
                .unwrap_or(u32::MAX),
        )
    }

    /// Runs `f` until it succeeds, fails with a non-transport error, or
    /// attempts run out.
    pub fn run<T>(
        &self,
        mut f: impl FnMut() -> Result<T, ProviderError>,
    ) -> Result<T, ProviderError> {
        let attempts = self.max_attempts.max(1);
        let mut attempt = 1;
        loop {
            match f() {
                Err(e) if e.kind == ProviderErrorKind::Transport && attempt < attempts => {
                    log::warn!("attempt {attempt}/{attempts} failed: {}", e.message);
                    thread::sleep(self.delay_after(attempt));
                    attempt += 1;
                }
                Err(e) if e.kind == ProviderErrorKind::Transport => {
                    return Err(ProviderError::transport(format!(
                        "gave up after {attempts} attempts: {}",
                        e.message
                    )))
                }
                other => return other,
            }
        }
    }
}

/// Spaces calls at least `1 / rate` seconds apart across all threads.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    /// `per_second <= 0` disables limiting.
    pub fn new(per_second: f64) -> Self {
        let interval = if per_second > 0.0 && per_second.is_finite() {
            Duration::from_secs_f64(1.0 / per_second)
        } else {
            Duration::ZERO
        };
        Self {
            interval,
            next: Mutex::new(None),
        }
    }

    pub fn acquire(&self) {
        if self.interval.is_zero() {
            return;
        }
        let wait = {
            let mut next = self.next.lock().unwrap_or_else(|e| e.into_inner());
            let now = Instant::now();
            let slot = next.map_or(now, |t| t.max(now));
            *next = Some(slot + self.interval);
            slot - now
        };
        if !wait.is_zero() {
            thread::sleep(wait);
        }
    }
}

/// Runs `job(i)` for every `i < count` on at most `max_in_flight` threads and
/// returns the results in index order.
pub fn bounded_map<T: Send>(
    count: usize,
    max_in_flight: usize,
    job: impl Fn(usize) -> T + Sync,
) -> Vec<T> {
    let workers = max_in_flight.clamp(1, count.max(1));
    if workers == 1 {
        return (0..count).map(job).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<T>>> = (0..count).map(|_| Mutex::new(None)).collect();
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let value = job(i);
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(value);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| {
            m.into_inner()
                .unwrap_or_else(|e| e.into_inner())
                .expect("every index is processed once")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::AtomicU32;

    #[test]
    fn backoff_doubles() {
        let p = RetryPolicy::default();
        assert_eq!(p.delay_after(1), Duration::from_millis(500));
        assert_eq!(p.delay_after(2), Duration::from_millis(1000));
    }

    #[test]
    fn retries_transport_only() {
        let p = RetryPolicy {
            max_attempts: 3,
            base_delay: Duration::from_millis(1),
        };
        let calls = AtomicU32::new(0);
        let r: Result<(), _> = p.run(|| {
            calls.fetch_add(1, Ordering::SeqCst);
            Err(ProviderError::transport("down"))
        });
        assert_eq!(calls.load(Ordering::SeqCst), 3);
        assert_eq!(r.unwrap_err().kind, ProviderErrorKind::Transport);

        calls.store(0, Ordering::SeqCst);
        let r: Result<(), _> = p.run(|| {
            calls.fetch_add(1, Ordering::SeqCst);
            Err(ProviderError::protocol("bad"))
        });
        assert_eq!(calls.load(Ordering::SeqCst), 1);
        assert!(r.is_err());

        calls.store(0, Ordering::SeqCst);
        let r = p.run(|| {
            if calls.fetch_add(1, Ordering::SeqCst) == 0 {
                Err(ProviderError::transport("blip"))
            } else {
                Ok(7)
            }
        });
        assert_eq!(r, Ok(7));
    }

    #[test]
    fn bounded_map_preserves_order_and_cap() {
        let live = AtomicUsize::new(0);
        let peak = AtomicUsize::new(0);
        let out = bounded_map(40, 4, |i| {
            let now = live.fetch_add(1, Ordering::SeqCst) + 1;
            peak.fetch_max(now, Ordering::SeqCst);
            thread::sleep(Duration::from_millis(2));
            live.fetch_sub(1, Ordering::SeqCst);
            i * 2
        });
        assert_eq!(out, (0..40).map(|i| i * 2).collect::<Vec<_>>());
        assert!(peak.load(Ordering::SeqCst) <= 4);
    }

    #[test]
    fn rate_limiter_spaces_calls() {
        let limiter = RateLimiter::new(100.0);
        let start = Instant::now();
        for _ in 0..5 {
            limiter.acquire();
        }
        assert!(start.elapsed() >= Duration::from_millis(38));
    }
}
