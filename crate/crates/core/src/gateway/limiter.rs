use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Token bucket shared by every caller of one backend.
///
/// `acquire` reserves a slot under the lock and sleeps outside it, so waiting
/// callers are served in reservation order.
#[derive(Debug)]
pub struct RateLimiter {
    rate_per_s: f64,
    burst: f64,
    state: Mutex<Bucket>,
}

#[derive(Debug)]
struct Bucket {
    tokens: f64,
    last: Instant,
}

impl RateLimiter {
    pub fn new(requests_per_minute: u32, burst: u32) -> Self {
        let burst = burst.max(1) as f64;
        Self {
            rate_per_s: requests_per_minute as f64 / 60.0,
            burst,
            state: Mutex::new(Bucket { tokens: burst, last: Instant::now() }),
        }
    }

    /// Burst of one: requests are spaced evenly at `60 / rpm` seconds.
    /// An rpm of 0 disables limiting.
    pub fn per_minute(requests_per_minute: u32) -> Self {
        Self::new(requests_per_minute, 1)
    }

    pub fn unlimited() -> Self {
        Self::new(0, 1)
    }

    fn reserve(&self, now: Instant) -> Duration {
        if self.rate_per_s <= 0.0 {
            return Duration::ZERO;
        }
        let mut b = self.state.lock().unwrap_or_else(|e| e.into_inner());
        let elapsed = now.saturating_duration_since(b.last).as_secs_f64();
        b.tokens = (b.tokens + elapsed * self.rate_per_s).min(self.burst);
        b.last = now.max(b.last);
        b.tokens -= 1.0;
        if b.tokens >= 0.0 {
            Duration::ZERO
        } else {
            Duration::from_secs_f64(-b.tokens / self.rate_per_s)
        }
    }

    /// Blocks until a request may be sent; returns the time waited.
    pub fn acquire(&self) -> Duration {
        let wait = self.reserve(Instant::now());
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
        wait
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_at_burst_one() {
        let l = RateLimiter::per_minute(60);
        let t0 = Instant::now();
        assert_eq!(l.reserve(t0), Duration::ZERO);
        let w = l.reserve(t0);
        assert!((w.as_secs_f64() - 1.0).abs() < 1e-6);
        let w = l.reserve(t0);
        assert!((w.as_secs_f64() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn refills_over_time() {
        let l = RateLimiter::new(120, 2);
        let t0 = Instant::now();
        assert_eq!(l.reserve(t0), Duration::ZERO);
        assert_eq!(l.reserve(t0), Duration::ZERO);
        assert!(l.reserve(t0) > Duration::ZERO);
        // 10 s later the bucket is full again
        let t1 = t0 + Duration::from_secs(10);
        assert_eq!(l.reserve(t1), Duration::ZERO);
    }

    #[test]
    fn zero_rpm_is_unlimited() {
        let l = RateLimiter::unlimited();
        for _ in 0..100 {
            assert_eq!(l.acquire(), Duration::ZERO);
        }
    }
}
