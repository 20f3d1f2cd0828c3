//! Brute-force components: dense undirected adjacency and BFS from each
//! unvisited node in ascending order.

use std::collections::VecDeque;

use graphrx::graph::Graph;

pub fn components(g: &Graph) -> (Vec<usize>, usize) {
    let n = g.num_nodes();
    let mut adj = vec![vec![false; n]; n];
    for e in g.edges() {
        adj[e.head][e.tail] = true;
        adj[e.tail][e.head] = true;
    }
    let mut ids = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if ids[start] != usize::MAX {
            continue;
        }
        ids[start] = count;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if adj[u][v] && ids[v] == usize::MAX {
                    ids[v] = count;
                    queue.push_back(v);
                }
            }
        }
        count += 1;
    }
    (ids, count)
}
