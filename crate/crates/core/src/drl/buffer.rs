//! Fixed-capacity experience replay with uniform sampling.

use rand::Rng;

use crate::scalar::Scalar;

use super::DrlError;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<F> {
    pub obs: Vec<F>,
    pub action: Vec<F>,
    pub reward: F,
    pub next_obs: Vec<F>,
    pub done: bool,
}

/// Columnar view of a sampled minibatch.
#[derive(Debug, Clone)]
pub struct Batch<F> {
    pub obs: Vec<Vec<F>>,
    pub actions: Vec<Vec<F>>,
    pub rewards: Vec<F>,
    pub next_obs: Vec<Vec<F>>,
    pub dones: Vec<bool>,
}

impl<F> Batch<F> {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// Ring buffer: once full, each push overwrites the oldest transition.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<F> {
    capacity: usize,
    store: Vec<Transition<F>>,
    head: usize,
}

impl<F: Scalar> ReplayBuffer<F> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            store: Vec::with_capacity(capacity.min(1 << 16)),
            head: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    pub fn clear(&mut self) {
        self.store.clear();
        self.head = 0;
    }

    pub fn push(&mut self, t: Transition<F>) {
        if self.store.len() < self.capacity {
            self.store.push(t);
        } else {
            self.store[self.head] = t;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    /// Samples `batch_size` transitions uniformly with replacement.
    pub fn sample(&self, batch_size: usize, rng: &mut impl Rng) -> Result<Batch<F>, DrlError> {
        if self.store.is_empty() {
            return Err(DrlError::NotEnoughSamples {
                have: 0,
                need: batch_size.max(1),
            });
        }
        let mut batch = Batch {
            obs: Vec::with_capacity(batch_size),
            actions: Vec::with_capacity(batch_size),
            rewards: Vec::with_capacity(batch_size),
            next_obs: Vec::with_capacity(batch_size),
            dones: Vec::with_capacity(batch_size),
        };
        for _ in 0..batch_size {
            let t = &self.store[rng.random_range(0..self.store.len())];
            batch.obs.push(t.obs.clone());
            batch.actions.push(t.action.clone());
            batch.rewards.push(t.reward);
            batch.next_obs.push(t.next_obs.clone());
            batch.dones.push(t.done);
        }
        Ok(batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tr(tag: f64) -> Transition<f64> {
        Transition {
            obs: vec![tag],
            action: vec![0.0],
            reward: tag,
            next_obs: vec![tag + 0.5],
            done: false,
        }
    }

    #[test]
    fn fills_then_overwrites_oldest_first() {
        let mut buf = ReplayBuffer::new(3);
        for i in 0..3 {
            buf.push(tr(i as f64));
        }
        assert_eq!(buf.len(), 3);
        buf.push(tr(3.0));
        buf.push(tr(4.0));
        assert_eq!(buf.len(), 3);
        let held: Vec<f64> = buf.store.iter().map(|t| t.reward).collect();
        let mut sorted = held.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // 0 and 1 were the oldest and must be gone.
        assert_eq!(sorted, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn sampling_from_empty_buffer_fails() {
        let buf = ReplayBuffer::<f64>::new(4);
        assert!(matches!(
            buf.sample(2, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(DrlError::NotEnoughSamples { .. })
        ));
    }

    #[test]
    fn sample_is_roughly_uniform() {
        let mut buf = ReplayBuffer::new(10);
        for i in 0..10 {
            buf.push(tr(i as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 10];
        for _ in 0..200 {
            let batch = buf.sample(50, &mut rng).unwrap();
            for r in batch.rewards {
                counts[r as usize] += 1;
            }
        }
        // 10_000 draws over 10 cells: each should be within 20% of 1000.
        for (i, &c) in counts.iter().enumerate() {
            assert!((800..=1200).contains(&c), "cell {i} drawn {c} times");
        }
    }

    #[test]
    fn sample_is_seed_deterministic() {
        let mut buf = ReplayBuffer::new(8);
        for i in 0..8 {
            buf.push(tr(i as f64));
        }
        let a = buf
            .sample(16, &mut ChaCha8Rng::seed_from_u64(5))
            .unwrap()
            .rewards;
        let b = buf
            .sample(16, &mut ChaCha8Rng::seed_from_u64(5))
            .unwrap()
            .rewards;
        assert_eq!(a, b);
    }

    #[test]
    fn clear_resets_ring_position() {
        let mut buf = ReplayBuffer::new(2);
        buf.push(tr(0.0));
        buf.push(tr(1.0));
        buf.push(tr(2.0));
        buf.clear();
        assert!(buf.is_empty());
        buf.push(tr(7.0));
        assert_eq!(buf.store[0].reward, 7.0);
    }
}
