//! Hopcroft–Karp maximum bipartite matching.

use std::collections::VecDeque;

const NIL: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct Matching {
    /// Right partner of each left vertex.
    pub left: Vec<Option<usize>>,
    /// Left partner of each right vertex.
    pub right: Vec<Option<usize>>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.left.iter().flatten().count()
    }
}

pub struct BipartiteMatcher {
    adj: Vec<Vec<usize>>,
    n_right: usize,
    match_l: Vec<usize>,
    match_r: Vec<usize>,
    dist: Vec<u32>,
}

impl BipartiteMatcher {
    /// `adj[u]` lists the right neighbours of left vertex `u`.
    pub fn new(n_left: usize, n_right: usize, adj: Vec<Vec<usize>>) -> Self {
        assert_eq!(adj.len(), n_left);
        debug_assert!(adj.iter().flatten().all(|&v| v < n_right));
        BipartiteMatcher {
            adj,
            n_right,
            match_l: vec![NIL; n_left],
            match_r: vec![NIL; n_right],
            dist: vec![0; n_left],
        }
    }

    fn bfs(&mut self) -> bool {
        let mut queue = VecDeque::new();
        let mut found = false;
        for u in 0..self.adj.len() {
            if self.match_l[u] == NIL {
                self.dist[u] = 0;
                queue.push_back(u);
            } else {
                self.dist[u] = u32::MAX;
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                let w = self.match_r[v];
                if w == NIL {
                    found = true;
                } else if self.dist[w] == u32::MAX {
                    self.dist[w] = self.dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        found
    }

    fn dfs(&mut self, u: usize) -> bool {
        for i in 0..self.adj[u].len() {
            let v = self.adj[u][i];
            let w = self.match_r[v];
            if w == NIL || (self.dist[w] == self.dist[u] + 1 && self.dfs(w)) {
                self.match_l[u] = v;
                self.match_r[v] = u;
                return true;
            }
        }
        self.dist[u] = u32::MAX;
        false
    }

    pub fn max_matching(&mut self) -> Matching {
        while self.bfs() {
            for u in 0..self.adj.len() {
                if self.match_l[u] == NIL {
                    self.dfs(u);
                }
            }
        }
        self.snapshot()
    }

    fn snapshot(&self) -> Matching {
        let opt = |v: usize| (v != NIL).then_some(v);
        Matching {
            left: self.match_l.iter().copied().map(opt).collect(),
            right: self.match_r.iter().copied().map(opt).collect(),
        }
    }

    /// The perfect matching whose sequence of right partners (indexed by left
    /// vertex) is lexicographically smallest, or `None` if no perfect
    /// matching exists. Adjacency lists must be sorted ascending.
    pub fn lexicographically_smallest_perfect(&mut self) -> Option<Vec<usize>> {
        let n = self.adj.len();
        if n != self.n_right || self.max_matching().size() != n {
            return None;
        }
        debug_assert!(self.adj.iter().all(|row| row.windows(2).all(|w| w[0] < w[1])));
        let mut fixed_l = vec![false; n];
        let mut fixed_r = vec![false; n];
        let mut seen = vec![false; n];
        for u in 0..n {
            for i in 0..self.adj[u].len() {
                let v = self.adj[u][i];
                if fixed_r[v] {
                    continue;
                }
                if self.match_l[u] == v || self.rotate(u, v, &fixed_l, &fixed_r, &mut seen) {
                    break;
                }
            }
            fixed_l[u] = true;
            fixed_r[self.match_l[u]] = true;
        }
        Some(self.match_l.clone())
    }

    /// Tries to move `u` onto `v` along an alternating cycle through unfixed
    /// vertices, keeping the matching perfect.
    fn rotate(&mut self, u: usize, v: usize, fixed_l: &[bool], fixed_r: &[bool], seen: &mut [bool]) -> bool {
        let target = self.match_l[u];
        let start = self.match_r[v];
        seen.iter_mut().for_each(|s| *s = false);
        // iterative DFS over left vertices; path[k] = (left vertex, next adj index)
        let mut path: Vec<(usize, usize)> = vec![(start, 0)];
        seen[start] = true;
        while let Some(&mut (x, ref mut next)) = path.last_mut() {
            let Some(&w) = self.adj[x].get(*next) else {
                path.pop();
                continue;
            };
            *next += 1;
            if fixed_r[w] || w == v {
                continue;
            }
            if w == target {
                // shift partners along the path, then give v to u
                let mut take = w;
                for &(y, _) in path.iter().rev() {
                    let prev = self.match_l[y];
                    self.match_l[y] = take;
                    self.match_r[take] = y;
                    take = prev;
                }
                debug_assert_eq!(take, v);
                self.match_l[u] = v;
                self.match_r[v] = u;
                return true;
            }
            let y = self.match_r[w];
            if y != u && !fixed_l[y] && !seen[y] {
                seen[y] = true;
                path.push((y, 0));
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximum_matching_sizes() {
        let adj = vec![vec![0, 1], vec![0], vec![0]];
        assert_eq!(BipartiteMatcher::new(3, 2, adj).max_matching().size(), 2);
        let adj = vec![vec![1], vec![0, 1], vec![2]];
        assert_eq!(BipartiteMatcher::new(3, 3, adj).max_matching().size(), 3);
        assert_eq!(BipartiteMatcher::new(0, 0, vec![]).max_matching().size(), 0);
    }

    #[test]
    fn lexicographic_perfect_matching() {
        // complete graph: identity is smallest
        let adj = vec![vec![0, 1, 2]; 3];
        assert_eq!(BipartiteMatcher::new(3, 3, adj).lexicographically_smallest_perfect(), Some(vec![0, 1, 2]));
        let adj = vec![vec![0, 1], vec![0], vec![1, 2]];
        assert_eq!(BipartiteMatcher::new(3, 3, adj).lexicographically_smallest_perfect(), Some(vec![1, 0, 2]));
        let adj = vec![vec![0], vec![0]];
        assert_eq!(BipartiteMatcher::new(2, 2, adj).lexicographically_smallest_perfect(), None);
    }

    #[test]
    fn lexicographic_matches_brute_force() {
        // small deterministic pseudo-random graphs
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        for _ in 0..300 {
            let n = 1 + next() % 5;
            let adj: Vec<Vec<usize>> = (0..n).map(|_| (0..n).filter(|_| next() % 3 != 0).collect()).collect();
            let mut best: Option<Vec<usize>> = None;
            permutations(n, &mut |p: &[usize]| {
                if p.iter().enumerate().all(|(u, v)| adj[u].contains(v)) && best.as_deref().is_none_or(|b| p < b) {
                    best = Some(p.to_vec());
                }
            });
            assert_eq!(BipartiteMatcher::new(n, n, adj.clone()).lexicographically_smallest_perfect(), best, "{adj:?}");
        }
    }

    fn permutations(n: usize, f: &mut dyn FnMut(&[usize])) {
        fn go(k: usize, p: &mut Vec<usize>, used: &mut Vec<bool>, f: &mut dyn FnMut(&[usize])) {
            if k == p.capacity() {
                f(p);
                return;
            }
            for v in 0..used.len() {
                if !used[v] {
                    used[v] = true;
                    p.push(v);
                    go(k + 1, p, used, f);
                    p.pop();
                    used[v] = false;
                }
            }
        }
        go(0, &mut Vec::with_capacity(n), &mut vec![false; n], f);
    }
}
