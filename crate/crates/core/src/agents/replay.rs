//! Prioritized experience replay backed by a sum tree.

use rand::Rng;

/// One stored transition.
#[derive(Debug, Clone)]
pub struct ReplayEntry {
    pub obs: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    pub terminal: bool,
}

/// Binary indexed sum tree over leaf priorities. Parents are recomputed from
/// their children on update, so the root is always an exact function of the
/// leaves.
#[derive(Debug, Clone)]
pub struct SumTree {
    capacity: usize,
    tree: Vec<f64>,
}

impl SumTree {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self { capacity, tree: vec![0.0; 2 * capacity] }
    }

    pub fn total(&self) -> f64 {
        self.tree[1]
    }

    pub fn get(&self, i: usize) -> f64 {
        self.tree[self.capacity + i]
    }

    pub fn set(&mut self, i: usize, value: f64) {
        assert!(value >= 0.0 && i < self.capacity);
        let mut idx = self.capacity + i;
        self.tree[idx] = value;
        while idx > 1 {
            idx /= 2;
            self.tree[idx] = self.tree[2 * idx] + self.tree[2 * idx + 1];
        }
    }

    /// Leaf index whose cumulative range contains `target` in [0, total).
    pub fn find(&self, target: f64) -> usize {
        let mut target = target.clamp(0.0, self.total());
        let mut idx = 1;
        while idx < self.capacity {
            let left = 2 * idx;
            if target < self.tree[left] {
                idx = left;
            } else {
                target -= self.tree[left];
                idx = left + 1;
            }
        }
        idx - self.capacity
    }
}

/// Ring buffer of transitions with proportional prioritized sampling.
pub struct PrioritizedReplay {
    entries: Vec<ReplayEntry>,
    tree: SumTree,
    capacity: usize,
    next: usize,
    len: usize,
    alpha: f64,
    /// Maximum raw priority seen; new entries start here.
    max_priority: f64,
    priority_eps: f64,
}

/// A sampled batch with importance weights.
pub struct SampledBatch {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

impl PrioritizedReplay {
    pub fn new(capacity: usize, alpha: f64) -> Self {
        Self {
            entries: Vec::with_capacity(capacity),
            tree: SumTree::new(capacity),
            capacity,
            next: 0,
            len: 0,
            alpha,
            max_priority: 1.0,
            priority_eps: 1e-6,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn entry(&self, i: usize) -> &ReplayEntry {
        &self.entries[i]
    }

    /// FIFO insert at max priority.
    pub fn push(&mut self, entry: ReplayEntry) {
        if self.entries.len() < self.capacity {
            self.entries.push(entry);
        } else {
            self.entries[self.next] = entry;
        }
        let p = self.max_priority.powf(self.alpha);
        self.tree.set(self.next, p);
        self.next = (self.next + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
    }

    /// Sample `batch_size` indices proportional to priority^alpha and return
    /// importance weights (N * P(i))^-beta normalized by the batch maximum.
    pub fn sample<R: Rng>(&self, batch_size: usize, beta: f64, rng: &mut R) -> SampledBatch {
        assert!(self.len > 0, "sample from empty buffer");
        let total = self.tree.total();
        let mut indices = Vec::with_capacity(batch_size);
        for _ in 0..batch_size {
            let target = rng.gen_range(0.0..total);
            let mut idx = self.tree.find(target);
            if idx >= self.len {
                idx = self.len - 1;
            }
            indices.push(idx);
        }
        let n = self.len as f64;
        let mut weights: Vec<f64> = indices
            .iter()
            .map(|&i| {
                let p = self.tree.get(i) / total;
                (n * p).powf(-beta)
            })
            .collect();
        let max_w = weights.iter().cloned().fold(f64::MIN, f64::max);
        for w in &mut weights {
            *w /= max_w;
        }
        SampledBatch { indices, weights }
    }

    /// Priority update after a training step: |TD error| + epsilon.
    pub fn update_priorities(&mut self, indices: &[usize], td_errors: &[f64]) {
        for (&i, &td) in indices.iter().zip(td_errors) {
            let p = td.abs() + self.priority_eps;
            self.max_priority = self.max_priority.max(p);
            self.tree.set(i, p.powf(self.alpha));
        }
    }
}
