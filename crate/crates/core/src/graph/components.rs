use super::DirectedGraph;

/// Tarjan's algorithm (iterative). Each part is sorted; parts are ordered by
/// their smallest node.
pub fn strongly_connected_components(g: &DirectedGraph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut parts = Vec::new();
    let mut counter = 0;
    // (node, next edge position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let adj = g.out_edges(v);
            if *pos < adj.len() {
                let w = adj[*pos].0;
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut part = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        part.push(w);
                        if w == v {
                            break;
                        }
                    }
                    part.sort_unstable();
                    parts.push(part);
                }
            }
        }
    }
    parts.sort_unstable_by_key(|p| p[0]);
    parts
}

/// Components of the underlying undirected graph (union–find).
pub fn weakly_connected_components(g: &DirectedGraph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for u in 0..n {
        for v in g.successors(u) {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for u in 0..n {
        let r = find(&mut parent, u);
        groups.entry(r).or_default().push(u);
    }
    let mut parts: Vec<Vec<usize>> = groups.into_values().collect();
    parts.sort_unstable_by_key(|p| p[0]);
    parts
}

/// Size of the largest part over the node count; 0 for an empty graph.
pub fn largest_component_fraction(parts: &[Vec<usize>], nodes: usize) -> f64 {
    if nodes == 0 {
        return 0.0;
    }
    parts.iter().map(Vec::len).max().unwrap_or(0) as f64 / nodes as f64
}
