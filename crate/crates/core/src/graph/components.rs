use super::Graph;

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `false` when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Weakly connected components. Ids run `0..count` in order of each
/// component's smallest node index.
pub fn connected_components(g: &Graph) -> (Vec<usize>, usize) {
    let n = g.num_nodes();
    let mut dsu = DisjointSet::new(n);
    for e in g.edges() {
        dsu.union(e.head, e.tail);
    }
    let mut root_id = vec![usize::MAX; n];
    let mut ids = Vec::with_capacity(n);
    let mut count = 0;
    for v in 0..n {
        let r = dsu.find(v);
        if root_id[r] == usize::MAX {
            root_id[r] = count;
            count += 1;
        }
        ids.push(root_id[r]);
    }
    (ids, count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let tri = Graph::builder(3)
            .pairs(&[(0, 1), (1, 2), (2, 0)])
            .build()
            .unwrap();
        assert_eq!(connected_components(&tri), (vec![0, 0, 0], 1));
        let two = Graph::builder(4).pairs(&[(0, 1), (2, 3)]).build().unwrap();
        assert_eq!(connected_components(&two), (vec![0, 0, 1, 1], 2));
        let iso = Graph::builder(3).build().unwrap();
        assert_eq!(connected_components(&iso), (vec![0, 1, 2], 3));
    }

    #[test]
    fn ids_follow_smallest_member() {
        // edge direction is ignored and the component holding node 0 gets id 0
        let g = Graph::builder(5).pairs(&[(4, 0), (3, 1)]).build().unwrap();
        assert_eq!(connected_components(&g), (vec![0, 1, 2, 1, 0], 3));
    }
}
