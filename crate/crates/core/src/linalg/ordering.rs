use std::collections::VecDeque;

use super::sparse::Pattern;

/// Symmetric permutation: `perm[new] = old`, `inverse[old] = new`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ordering {
    pub perm: Vec<usize>,
    pub inverse: Vec<usize>,
}

impl Ordering {
    pub fn identity(n: usize) -> Self {
        Ordering { perm: (0..n).collect(), inverse: (0..n).collect() }
    }

    fn from_perm(perm: Vec<usize>) -> Self {
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        Ordering { perm, inverse }
    }

    /// Reverse Cuthill-McKee ordering, started from a pseudo-peripheral node
    /// of each connected component.
    pub fn reverse_cuthill_mckee(pattern: &Pattern) -> Self {
        let n = pattern.n();
        let degree: Vec<usize> = (0..n).map(|i| pattern.row(i).len() - 1).collect();
        let mut visited = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut level = vec![usize::MAX; n];
        while order.len() < n {
            let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree[i], i)).unwrap();
            let start = pseudo_peripheral(pattern, &degree, seed, &mut level);
            let mut queue = VecDeque::from([start]);
            visited[start] = true;
            while let Some(v) = queue.pop_front() {
                order.push(v);
                let mut next: Vec<usize> =
                    pattern.row(v).iter().copied().filter(|&w| !visited[w]).collect();
                next.sort_by_key(|&w| (degree[w], w));
                for w in next {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
        order.reverse();
        Ordering::from_perm(order)
    }

    /// Sum over rows of the distance from the first stored column to the diagonal.
    pub fn profile(&self, pattern: &Pattern) -> usize {
        (0..pattern.n())
            .map(|new| {
                let old = self.perm[new];
                let first = pattern.row(old).iter().map(|&j| self.inverse[j]).min().unwrap_or(new);
                new - first.min(new)
            })
            .sum()
    }
}

fn bfs_levels(pattern: &Pattern, start: usize, level: &mut [usize]) -> (usize, Vec<usize>) {
    level.iter_mut().for_each(|l| *l = usize::MAX);
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut reached = vec![start];
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        for &w in pattern.row(v) {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                depth = depth.max(level[w]);
                reached.push(w);
                queue.push_back(w);
            }
        }
    }
    let last = reached.into_iter().filter(|&v| level[v] == depth).collect();
    (depth, last)
}

fn pseudo_peripheral(pattern: &Pattern, degree: &[usize], seed: usize, level: &mut [usize]) -> usize {
    let mut current = seed;
    let (mut depth, mut last) = bfs_levels(pattern, current, level);
    loop {
        let candidate = *last.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        let (d, l) = bfs_levels(pattern, candidate, level);
        if d <= depth {
            return current;
        }
        current = candidate;
        depth = d;
        last = l;
    }
}
