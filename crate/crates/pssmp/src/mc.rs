//! Deterministic rejection loops over replica streams.

use crate::error::{Error, Result};
use crate::rng::replicate;

/// Acceptance floor below which conditioning gives up.
pub const ACCEPTANCE_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct Collected<T> {
    pub items: Vec<T>,
    pub attempts: u64,
    pub accepted: u64,
}

impl<T> Collected<T> {
    pub fn acceptance(&self) -> f64 {
        self.accepted as f64 / self.attempts.max(1) as f64
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RejectionBudget {
    pub floor: f64,
    /// Attempts before the floor is enforced.
    pub min_attempts: u64,
    pub max_attempts: u64,
}

impl Default for RejectionBudget {
    fn default() -> Self {
        Self { floor: ACCEPTANCE_FLOOR, min_attempts: 200_000, max_attempts: 2_000_000_000 }
    }
}

/// Runs replicas `first, first+1, ...` in batches and keeps the first `n` accepted results in
/// replica order. Batch sizes depend only on counts, so the output is independent of threading.
pub fn collect_accepted<T, G>(n: usize, first: u64, budget: RejectionBudget, f: G) -> Result<Collected<T>>
where
    T: Send,
    G: Fn(u64) -> Result<Option<T>> + Sync + Send,
{
    let mut items: Vec<T> = Vec::with_capacity(n);
    let mut attempts: u64 = 0;
    let mut accepted: u64 = 0;
    while items.len() < n {
        let need = (n - items.len()) as f64;
        let batch = if accepted == 0 {
            (attempts.max(1024) as f64).min(1_048_576.0)
        } else {
            (need * attempts as f64 / accepted as f64 * 1.05 + 64.0).clamp(256.0, 1_048_576.0)
        } as usize;
        let out = replicate(first + attempts, batch, &f);
        attempts += batch as u64;
        for r in out {
            if let Some(v) = r? {
                accepted += 1;
                if items.len() < n {
                    items.push(v);
                }
            }
        }
        let acc = accepted as f64 / attempts as f64;
        if items.len() < n && ((attempts >= budget.min_attempts && acc < budget.floor) || attempts >= budget.max_attempts) {
            return Err(Error::RareEvent { acceptance: acc, attempts });
        }
    }
    Ok(Collected { items, attempts, accepted })
}

/// Runs `n` replicas and collects all results in order.
pub fn collect_all<T, G>(n: usize, first: u64, f: G) -> Result<Vec<T>>
where
    T: Send,
    G: Fn(u64) -> Result<T> + Sync + Send,
{
    replicate(first, n, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::Real;
    use crate::rng::{replica_rng, with_threads};

    #[test]
    fn accepted_order_is_thread_independent() {
        let f = |i: u64| -> Result<Option<f64>> {
            let mut r = replica_rng(3, i);
            let u = f64::open01(&mut r);
            Ok((u < 0.1).then_some(u))
        };
        let a = with_threads(1, || collect_accepted(500, 0, RejectionBudget::default(), f).unwrap());
        let b = with_threads(3, || collect_accepted(500, 0, RejectionBudget::default(), f).unwrap());
        assert_eq!(a.items, b.items);
        assert_eq!(a.attempts, b.attempts);
        assert!((a.acceptance() - 0.1).abs() < 0.02);
    }

    #[test]
    fn rare_events_fail_loudly() {
        let f = |_: u64| -> Result<Option<u8>> { Ok(None) };
        let budget = RejectionBudget { min_attempts: 5000, ..RejectionBudget::default() };
        assert!(matches!(collect_accepted(10, 0, budget, f), Err(Error::RareEvent { .. })));
    }
}
