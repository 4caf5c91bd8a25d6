//! Progressive edge-growth placement of a regular Tanner graph.
//!
//! Each variable node receives its edges one at a time. The first edge goes
//! to a least-loaded check; later edges go to a least-loaded check that is as
//! far as possible from the variable in the current graph. Checks that would
//! close a 4-cycle are never chosen while any alternative exists.

use rand::seq::IndexedRandom;
use rand::Rng;

/// Outcome of one placement run.
#[derive(Debug, Clone)]
pub(crate) struct Placement {
    pub checks: Vec<Vec<usize>>,
    /// Edges that had to close a 4-cycle because no other check was free.
    pub forced_short_cycles: usize,
}

struct Bfs {
    stamp: Vec<u32>,
    var_stamp: Vec<u32>,
    epoch: u32,
}

impl Bfs {
    fn new(m: usize, n: usize) -> Self {
        Self {
            stamp: vec![0; m],
            var_stamp: vec![0; n],
            epoch: 0,
        }
    }

    /// Expands the tree rooted at `v` level by level. Returns the check
    /// layers, `layers[0]` being the checks adjacent to `v`.
    fn layers(
        &mut self,
        v: usize,
        var_adj: &[Vec<usize>],
        check_adj: &[Vec<usize>],
    ) -> Vec<Vec<usize>> {
        self.epoch += 1;
        let e = self.epoch;
        self.var_stamp[v] = e;
        let first: Vec<usize> = var_adj[v].clone();
        for &c in &first {
            self.stamp[c] = e;
        }
        let mut layers = vec![first];
        loop {
            let mut next = Vec::new();
            for &c in layers.last().unwrap() {
                for &u in &check_adj[c] {
                    if self.var_stamp[u] == e {
                        continue;
                    }
                    self.var_stamp[u] = e;
                    for &c2 in &var_adj[u] {
                        if self.stamp[c2] != e {
                            self.stamp[c2] = e;
                            next.push(c2);
                        }
                    }
                }
            }
            if next.is_empty() {
                return layers;
            }
            layers.push(next);
        }
    }

    fn reached(&self, c: usize) -> bool {
        self.stamp[c] == self.epoch
    }
}

fn least_loaded<R: Rng + ?Sized>(
    candidates: impl Iterator<Item = usize>,
    degree: &[usize],
    cap: Option<usize>,
    rng: &mut R,
) -> Option<usize> {
    let mut best = usize::MAX;
    let mut ties = Vec::new();
    for c in candidates {
        let d = degree[c];
        if cap.is_some_and(|cap| d >= cap) {
            continue;
        }
        if d < best {
            best = d;
            ties.clear();
        }
        if d == best {
            ties.push(c);
        }
    }
    ties.choose(rng).copied()
}

pub(crate) fn peg<R: Rng + ?Sized>(n: usize, m: usize, dv: usize, dc: usize, rng: &mut R) -> Placement {
    let mut var_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(dv); n];
    let mut check_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(dc + 1); m];
    let mut degree = vec![0usize; m];
    let mut bfs = Bfs::new(m, n);
    let mut forced = 0;

    for v in 0..n {
        for edge in 0..dv {
            let chosen = if edge == 0 {
                least_loaded(0..m, &degree, Some(dc), rng)
                    .or_else(|| least_loaded(0..m, &degree, None, rng))
                    .expect("at least one check")
            } else {
                let layers = bfs.layers(v, &var_adj, &check_adj);
                let total: usize = layers.iter().map(Vec::len).sum();
                // checks outside the tree, or the deepest layer when the tree
                // covers everything
                let far: Vec<usize> = if total < m {
                    (0..m).filter(|&c| !bfs.reached(c)).collect()
                } else {
                    layers.last().cloned().unwrap_or_default()
                };
                let near: Vec<bool> = {
                    // distance <= 2 from v: joining closes a 4-cycle (or duplicates an edge)
                    let mut mark = vec![false; m];
                    for layer in layers.iter().take(2) {
                        for &c in layer {
                            mark[c] = true;
                        }
                    }
                    mark
                };
                let allowed = |c: &usize| !near[*c];
                least_loaded(far.iter().copied().filter(allowed), &degree, Some(dc), rng)
                    .or_else(|| least_loaded((0..m).filter(allowed), &degree, Some(dc), rng))
                    .or_else(|| least_loaded((0..m).filter(allowed), &degree, None, rng))
                    .unwrap_or_else(|| {
                        forced += 1;
                        let linked: Vec<bool> = {
                            let mut l = vec![false; m];
                            for &c in &var_adj[v] {
                                l[c] = true;
                            }
                            l
                        };
                        least_loaded((0..m).filter(|&c| !linked[c]), &degree, Some(dc), rng)
                            .or_else(|| least_loaded((0..m).filter(|&c| !linked[c]), &degree, None, rng))
                            .expect("fewer checks than the variable degree")
                    })
            };
            var_adj[v].push(chosen);
            check_adj[chosen].push(v);
            degree[chosen] += 1;
        }
    }
    for row in check_adj.iter_mut() {
        row.sort_unstable();
    }
    Placement {
        checks: check_adj,
        forced_short_cycles: forced,
    }
}
