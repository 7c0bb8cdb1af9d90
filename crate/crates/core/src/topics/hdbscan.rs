//! Density-based hierarchical clustering (HDBSCAN) with excess-of-mass
//! cluster selection, using an O(n^2) Prim MST over mutual reachability.

/// Label for points in no cluster.
pub const NOISE: i32 = -1;

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distance to the `min_samples`-th nearest point, the point itself counted
/// as the first.
fn core_distances(data: &[Vec<f64>], min_samples: usize) -> Vec<f64> {
    let n = data.len();
    let k = min_samples.clamp(1, n);
    (0..n)
        .map(|i| {
            let mut d: Vec<f64> = (0..n).map(|j| euclidean(&data[i], &data[j])).collect();
            d.sort_by(f64::total_cmp);
            d[k - 1]
        })
        .collect()
}

/// Minimum spanning tree of the mutual-reachability graph, as
/// (a, b, weight) edges sorted by weight then endpoints.
fn mst(data: &[Vec<f64>], core: &[f64]) -> Vec<(usize, usize, f64)> {
    let n = data.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let mr = euclidean(&data[current], &data[j]).max(core[current]).max(core[j]);
            if mr < best[j] {
                best[j] = mr;
                from[j] = current;
            }
        }
        let next = (0..n).filter(|&j| !in_tree[j]).min_by(|&a, &b| best[a].total_cmp(&best[b]).then(a.cmp(&b))).unwrap();
        edges.push((from[next].min(next), from[next].max(next), best[next]));
        in_tree[next] = true;
        current = next;
    }
    edges.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    edges
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Single-linkage dendrogram: node `n + i` merges `left` and `right` at `dist`.
struct Merge {
    left: usize,
    right: usize,
    dist: f64,
    size: usize,
}

fn single_linkage(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Merge> {
    // union-find over 2n-1 nodes; each root maps to its dendrogram node
    let mut uf = UnionFind::new(2 * n - 1);
    let mut merges = Vec::with_capacity(n - 1);
    for &(a, b, d) in edges {
        let (ra, rb) = (uf.find(a), uf.find(b));
        let node = n + merges.len();
        let size = uf.size[ra] + uf.size[rb];
        merges.push(Merge { left: ra, right: rb, dist: d, size });
        uf.parent[ra] = node;
        uf.parent[rb] = node;
        uf.size[node] = size;
    }
    merges
}

/// Condensed-tree row: `child` (a point if < n, else a cluster id) leaves
/// `parent` at `lambda`.
#[derive(Debug, Clone, Copy)]
struct Condensed {
    parent: usize,
    child: usize,
    lambda: f64,
    size: usize,
}

fn lambda_of(d: f64) -> f64 {
    1.0 / d.max(1e-12)
}

fn condense(n: usize, merges: &[Merge], min_size: usize) -> Vec<Condensed> {
    let node_size = |x: usize| if x < n { 1 } else { merges[x - n].size };
    let root = 2 * n - 2;
    let mut out = Vec::new();
    let mut label = vec![usize::MAX; 2 * n - 1];
    let mut next_label = n + 1;
    label[root] = n;
    let mut ignore = vec![false; 2 * n - 1];

    fn leaves(n: usize, merges: &[Merge], x: usize, out: &mut Vec<usize>) {
        let mut stack = vec![x];
        while let Some(y) = stack.pop() {
            if y < n {
                out.push(y);
            } else {
                stack.push(merges[y - n].right);
                stack.push(merges[y - n].left);
            }
        }
    }

    // top-down in decreasing node id, which visits parents before children
    for node in (n..=root).rev() {
        if ignore[node] {
            continue;
        }
        let m = &merges[node - n];
        let lambda = lambda_of(m.dist);
        let parent_label = label[node];
        let (l, r) = (m.left, m.right);
        let (ls, rs) = (node_size(l), node_size(r));
        let fall_out = |x: usize, ignore: &mut Vec<bool>, out: &mut Vec<Condensed>| {
            let mut pts = Vec::new();
            leaves(n, merges, x, &mut pts);
            for p in pts {
                out.push(Condensed { parent: parent_label, child: p, lambda, size: 1 });
            }
            if x >= n {
                let mut stack = vec![x];
                while let Some(y) = stack.pop() {
                    if y >= n {
                        ignore[y] = true;
                        stack.push(merges[y - n].left);
                        stack.push(merges[y - n].right);
                    }
                }
            }
        };
        match (ls >= min_size, rs >= min_size) {
            (true, true) => {
                for (x, s) in [(l, ls), (r, rs)] {
                    label[x] = next_label;
                    out.push(Condensed { parent: parent_label, child: next_label, lambda, size: s });
                    next_label += 1;
                }
            }
            (false, false) => {
                fall_out(l, &mut ignore, &mut out);
                fall_out(r, &mut ignore, &mut out);
            }
            (true, false) => {
                label[l] = parent_label;
                fall_out(r, &mut ignore, &mut out);
            }
            (false, true) => {
                label[r] = parent_label;
                fall_out(l, &mut ignore, &mut out);
            }
        }
    }
    out
}

/// Excess-of-mass selection (root excluded). Returns selected cluster ids.
fn select_clusters(n: usize, tree: &[Condensed]) -> Vec<usize> {
    let max_label = tree.iter().flat_map(|c| [c.parent, if c.child >= n { c.child } else { n }]).max().unwrap_or(n);
    let count = max_label + 1 - n;
    let mut birth = vec![0.0; count];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); count];
    for c in tree.iter().filter(|c| c.child >= n) {
        birth[c.child - n] = c.lambda;
        children[c.parent - n].push(c.child);
    }
    let mut stability = vec![0.0; count];
    for c in tree {
        stability[c.parent - n] += (c.lambda - birth[c.parent - n]) * c.size as f64;
    }
    let mut selected = vec![false; count];
    // children have larger ids than their parents
    for id in (1..count).rev() {
        let sub: f64 = children[id].iter().map(|&ch| stability[ch - n]).sum();
        if children[id].is_empty() || stability[id] >= sub {
            selected[id] = true;
            let mut stack: Vec<usize> = children[id].clone();
            while let Some(ch) = stack.pop() {
                selected[ch - n] = false;
                stack.extend(children[ch - n].iter().copied());
            }
        } else {
            stability[id] = sub;
        }
    }
    (1..count).filter(|&i| selected[i]).map(|i| i + n).collect()
}

/// Cluster labels for `data` (rows, Euclidean). Clusters are numbered by size
/// descending, ties by smallest member index; unclustered points get
/// [`NOISE`].
pub fn hdbscan(data: &[Vec<f64>], min_cluster_size: usize, min_samples: usize) -> Vec<i32> {
    let n = data.len();
    if n < 2 || min_cluster_size > n {
        return vec![NOISE; n];
    }
    let core = core_distances(data, min_samples);
    let edges = mst(data, &core);
    let merges = single_linkage(n, &edges);
    let tree = condense(n, &merges, min_cluster_size.max(2));
    let selected = select_clusters(n, &tree);

    // cluster of each condensed node, following parents up to a selected one
    let mut parent_of = std::collections::HashMap::new();
    for c in tree.iter().filter(|c| c.child >= n) {
        parent_of.insert(c.child, c.parent);
    }
    let resolve = |mut c: usize| -> Option<usize> {
        loop {
            if selected.contains(&c) {
                return Some(c);
            }
            c = *parent_of.get(&c)?;
        }
    };
    let mut raw = vec![None; n];
    for c in tree.iter().filter(|c| c.child < n) {
        raw[c.child] = resolve(c.parent);
    }

    let mut groups: Vec<(usize, usize, usize)> = selected
        .iter()
        .map(|&s| {
            let members: Vec<usize> = (0..n).filter(|&i| raw[i] == Some(s)).collect();
            (members.len(), members.first().copied().unwrap_or(usize::MAX), s)
        })
        .filter(|g| g.0 > 0)
        .collect();
    groups.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut labels = vec![NOISE; n];
    for (new_id, &(_, _, s)) in groups.iter().enumerate() {
        for i in 0..n {
            if raw[i] == Some(s) {
                labels[i] = new_id as i32;
            }
        }
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blobs(centers: &[[f64; 2]], per: usize, spread: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<i32>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (b, c) in centers.iter().enumerate() {
            for _ in 0..per {
                data.push(vec![c[0] + rng.gen_range(-spread..spread), c[1] + rng.gen_range(-spread..spread)]);
                labels.push(b as i32);
            }
        }
        (data, labels)
    }

    #[test]
    fn three_blobs() {
        let (data, truth) = blobs(&[[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]], 20, 1.0, 1);
        let labels = hdbscan(&data, 5, 5);
        assert_eq!(labels, truth);
    }

    #[test]
    fn sizes_order_labels() {
        let (mut data, _) = blobs(&[[0.0, 0.0]], 8, 0.5, 2);
        let (big, _) = blobs(&[[20.0, 20.0]], 15, 0.5, 3);
        data.extend(big);
        let labels = hdbscan(&data, 5, 5);
        assert!(labels[..8].iter().all(|&l| l == 1));
        assert!(labels[8..].iter().all(|&l| l == 0));
    }

    #[test]
    fn isolated_point_is_noise() {
        let (mut data, _) = blobs(&[[0.0, 0.0], [10.0, 0.0]], 10, 0.5, 4);
        data.push(vec![100.0, 100.0]);
        let labels = hdbscan(&data, 5, 5);
        assert_eq!(labels[20], NOISE);
        assert!(labels[..20].iter().all(|&l| l >= 0));
    }

    #[test]
    fn uniform_cloud_has_no_split() {
        // one blob never splits into two large children: no cluster besides the root
        let (data, _) = blobs(&[[0.0, 0.0]], 12, 1.0, 5);
        let labels = hdbscan(&data, 7, 7);
        assert!(labels.iter().all(|&l| l == NOISE));
    }

    #[test]
    fn mst_has_n_minus_one_edges() {
        let (data, _) = blobs(&[[0.0, 0.0], [5.0, 5.0]], 10, 1.0, 6);
        let core = core_distances(&data, 3);
        let edges = mst(&data, &core);
        assert_eq!(edges.len(), 19);
        let mut uf = UnionFind::new(20);
        for (a, b, _) in edges {
            let (ra, rb) = (uf.find(a), uf.find(b));
            assert_ne!(ra, rb);
            uf.parent[ra] = rb;
        }
    }
}
