//! Directed-graph machinery shared by state classification and cut
//! generation: transition graphs, Tarjan SCCs, reachability.

/// Directed graph over vertices `0..n`. Parallel edges are harmless;
/// self-loops are kept (they matter for closedness, not for SCC membership).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    adj: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph { adj: vec![Vec::new(); n] }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Digraph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if !self.adj[u].contains(&v) {
            self.adj[u].push(v);
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn successors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    /// Vertices reachable from `sources` (sources included).
    pub fn reachable_from(&self, sources: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = sources.into_iter().collect();
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// Tarjan's algorithm, iterative. Returns the partition of `0..n` into
/// maximal SCCs in reverse topological order of the condensation: every SCC
/// is emitted before any SCC that can reach it.
pub fn tarjan_sccs(g: &Digraph) -> Vec<Vec<usize>> {
    let n = g.len();
    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut next_index = 0usize;

    // Explicit DFS frames: (vertex, next successor position).
    let mut frames: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        frames.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            if *pos < g.successors(v).len() {
                let w = g.successors(v)[*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&mut (parent, _)) = frames.last_mut() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// Membership map: `component_of[v]` = index of v's SCC in `comps`.
pub fn component_map(n: usize, comps: &[Vec<usize>]) -> Vec<usize> {
    let mut map = vec![usize::MAX; n];
    for (i, comp) in comps.iter().enumerate() {
        for &v in comp {
            map[v] = i;
        }
    }
    map
}

/// An SCC is closed iff no edge leaves it.
pub fn is_closed(g: &Digraph, comp: &[usize], comp_of: &[usize], comp_idx: usize) -> bool {
    comp.iter().all(|&v| g.successors(v).iter().all(|&w| comp_of[w] == comp_idx))
}

/// True iff the subgraph induced on `vertices` is strongly connected and
/// nonempty, using only edges of `g` between vertices of the set.
pub fn strongly_connected_on(g: &Digraph, vertices: &[usize]) -> bool {
    if vertices.is_empty() {
        return false;
    }
    if vertices.len() == 1 {
        return true;
    }
    let mut local = vec![usize::MAX; g.len()];
    for (i, &v) in vertices.iter().enumerate() {
        local[v] = i;
    }
    let mut sub = Digraph::new(vertices.len());
    for (i, &v) in vertices.iter().enumerate() {
        for &w in g.successors(v) {
            if local[w] != usize::MAX && local[w] != i {
                sub.add_edge(i, local[w]);
            }
        }
    }
    tarjan_sccs(&sub).len() == 1
}
