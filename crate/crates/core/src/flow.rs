//! Dinic max-flow on integer capacities.
//!
//! Small module used by the measure-distance machinery: probabilities are
//! scaled to integer units upstream, so the flow computation is exact and
//! the usual floating-point feasibility headaches disappear.

/// Directed flow network. Edges are stored in pairs: `add_edge` returns the
/// forward index `id`, and `id ^ 1` is the residual (reverse) edge.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u64>,
    orig: Vec<u64>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        Self { adj: vec![Vec::new(); nodes], to: Vec::new(), cap: Vec::new(), orig: Vec::new() }
    }

    pub fn nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: u64) -> usize {
        assert!(from < self.adj.len() && to < self.adj.len() && from != to);
        let id = self.to.len();
        self.adj[from].push(id);
        self.to.push(to);
        self.cap.push(cap);
        self.orig.push(cap);
        self.adj[to].push(id + 1);
        self.to.push(from);
        self.cap.push(0);
        self.orig.push(0);
        id
    }

    /// Flow pushed through a forward edge after `max_flow`.
    pub fn flow(&self, id: usize) -> u64 {
        self.orig[id] - self.cap[id]
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<u32>> {
        let mut level = vec![u32::MAX; self.adj.len()];
        level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &id in &self.adj[u] {
                let v = self.to[id];
                if self.cap[id] > 0 && level[v] == u32::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        (level[t] != u32::MAX).then_some(level)
    }

    fn augment(
        &mut self,
        u: usize,
        t: usize,
        pushed: u64,
        level: &[u32],
        iter: &mut [usize],
    ) -> u64 {
        if u == t {
            return pushed;
        }
        while iter[u] < self.adj[u].len() {
            let id = self.adj[u][iter[u]];
            let v = self.to[id];
            if self.cap[id] > 0 && level[v] == level[u] + 1 {
                let got = self.augment(v, t, pushed.min(self.cap[id]), level, iter);
                if got > 0 {
                    self.cap[id] -= got;
                    self.cap[id ^ 1] += got;
                    return got;
                }
            }
            iter[u] += 1;
        }
        0
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        assert!(s != t);
        let mut total = 0u64;
        while let Some(level) = self.levels(s, t) {
            let mut iter = vec![0usize; self.adj.len()];
            loop {
                let pushed = self.augment(s, t, u64::MAX, &level, &mut iter);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        total
    }
}
