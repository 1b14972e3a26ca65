const UNVISITED: usize = usize::MAX;

/// Tarjan's strongly connected components over an adjacency list.
///
/// Every node lands in exactly one component. Components come out in
/// reverse topological order of the condensation (a component is emitted
/// only after every component it can reach), and the members of each
/// component are sorted ascending.
pub fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    // (node, position of the next successor to look at)
    let mut calls: Vec<(usize, usize)> = Vec::new();
    let mut counter = 0usize;
    let mut out = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        calls.push((root, 0));

        while let Some(&mut (v, ref mut next)) = calls.last_mut() {
            if let Some(&w) = adj[v].get(*next) {
                *next += 1;
                if index[w] == UNVISITED {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().expect("v is on the stack");
                    on_stack[w] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                component.sort_unstable();
                out.push(component);
            }
        }
    }
    out
}

/// Check that `sccs` is in reverse topological order: every edge between
/// two components points to one listed no later than its own. This holds
/// exactly when the condensation is acyclic and correctly ordered.
pub fn condensation_is_acyclic(adj: &[Vec<usize>], sccs: &[Vec<usize>]) -> bool {
    let mut comp = vec![usize::MAX; adj.len()];
    for (c, members) in sccs.iter().enumerate() {
        for &m in members {
            comp[m] = c;
        }
    }
    adj.iter().enumerate().all(|(u, succ)| {
        succ.iter()
            .all(|&v| comp[u] == usize::MAX || comp[v] == usize::MAX || comp[v] <= comp[u])
    })
}
