use std::collections::HashMap;
use std::sync::Arc;

use super::{BooleanFunction, Node, FALSE, TERMINAL_VAR, TRUE};

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    And,
    Or,
    Xor,
}

/// Scratch space for building decision diagrams over one fixed, sorted
/// variable universe. Node 0 is constant false, node 1 constant true.
///
/// A builder is confined to a single computation; the finished
/// [`BooleanFunction`] is an immutable, self-contained value.
pub(crate) struct Builder {
    vars: Vec<String>,
    nodes: Vec<Node>,
    unique: HashMap<Node, u32>,
    apply_cache: HashMap<(Op, u32, u32), u32>,
    not_cache: HashMap<u32, u32>,
}

impl Builder {
    pub(crate) fn new<I, S>(vars: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        vars.sort();
        vars.dedup();
        Builder {
            vars,
            nodes: vec![Node::terminal(false), Node::terminal(true)],
            unique: HashMap::new(),
            apply_cache: HashMap::new(),
            not_cache: HashMap::new(),
        }
    }

    pub(crate) fn var_index(&self, name: &str) -> Option<u32> {
        self.vars
            .binary_search_by(|v| v.as_str().cmp(name))
            .ok()
            .map(|i| i as u32)
    }

    pub(crate) fn var_count(&self) -> usize {
        self.vars.len()
    }

    fn level(&self, u: u32) -> u32 {
        self.nodes[u as usize].var
    }

    fn mk(&mut self, var: u32, lo: u32, hi: u32) -> u32 {
        if lo == hi {
            return lo;
        }
        let node = Node { var, lo, hi };
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(node);
        self.unique.insert(node, id);
        id
    }

    /// Projection function of the variable at `index` in the sorted universe.
    pub(crate) fn var(&mut self, index: u32) -> u32 {
        debug_assert!((index as usize) < self.vars.len());
        self.mk(index, FALSE, TRUE)
    }

    pub(crate) fn var_named(&mut self, name: &str) -> Option<u32> {
        let index = self.var_index(name)?;
        Some(self.var(index))
    }

    pub(crate) fn constant(value: bool) -> u32 {
        if value {
            TRUE
        } else {
            FALSE
        }
    }

    pub(crate) fn not(&mut self, u: u32) -> u32 {
        match u {
            FALSE => return TRUE,
            TRUE => return FALSE,
            _ => {}
        }
        if let Some(&r) = self.not_cache.get(&u) {
            return r;
        }
        let Node { var, lo, hi } = self.nodes[u as usize];
        let lo = self.not(lo);
        let hi = self.not(hi);
        let r = self.mk(var, lo, hi);
        self.not_cache.insert(u, r);
        r
    }

    pub(crate) fn and(&mut self, a: u32, b: u32) -> u32 {
        self.apply(Op::And, a, b)
    }

    pub(crate) fn or(&mut self, a: u32, b: u32) -> u32 {
        self.apply(Op::Or, a, b)
    }

    pub(crate) fn xor(&mut self, a: u32, b: u32) -> u32 {
        self.apply(Op::Xor, a, b)
    }

    pub(crate) fn ite(&mut self, c: u32, t: u32, e: u32) -> u32 {
        match c {
            TRUE => return t,
            FALSE => return e,
            _ => {}
        }
        if t == e {
            return t;
        }
        let then_part = self.and(c, t);
        let nc = self.not(c);
        let else_part = self.and(nc, e);
        self.or(then_part, else_part)
    }

    fn apply(&mut self, op: Op, a: u32, b: u32) -> u32 {
        match op {
            Op::And => {
                if a == FALSE || b == FALSE {
                    return FALSE;
                }
                if a == TRUE {
                    return b;
                }
                if b == TRUE || a == b {
                    return a;
                }
            }
            Op::Or => {
                if a == TRUE || b == TRUE {
                    return TRUE;
                }
                if a == FALSE {
                    return b;
                }
                if b == FALSE || a == b {
                    return a;
                }
            }
            Op::Xor => {
                if a == FALSE {
                    return b;
                }
                if b == FALSE {
                    return a;
                }
                if a == b {
                    return FALSE;
                }
                if a == TRUE {
                    return self.not(b);
                }
                if b == TRUE {
                    return self.not(a);
                }
            }
        }
        let key = if a <= b { (op, a, b) } else { (op, b, a) };
        if let Some(&r) = self.apply_cache.get(&key) {
            return r;
        }
        let (la, lb) = (self.level(a), self.level(b));
        let top = la.min(lb);
        let (a0, a1) = self.cofactors_at(a, top);
        let (b0, b1) = self.cofactors_at(b, top);
        let lo = self.apply(op, a0, b0);
        let hi = self.apply(op, a1, b1);
        let r = self.mk(top, lo, hi);
        self.apply_cache.insert(key, r);
        r
    }

    fn cofactors_at(&self, u: u32, var: u32) -> (u32, u32) {
        let node = self.nodes[u as usize];
        if node.var == var {
            (node.lo, node.hi)
        } else {
            (u, u)
        }
    }

    /// Fix variable `var` to `value` in `u`.
    pub(crate) fn restrict(&mut self, u: u32, var: u32, value: bool) -> u32 {
        let mut memo = HashMap::new();
        self.restrict_rec(u, var, value, &mut memo)
    }

    fn restrict_rec(&mut self, u: u32, var: u32, value: bool, memo: &mut HashMap<u32, u32>) -> u32 {
        let node = self.nodes[u as usize];
        if node.var == TERMINAL_VAR || node.var > var {
            return u;
        }
        if node.var == var {
            return if value { node.hi } else { node.lo };
        }
        if let Some(&r) = memo.get(&u) {
            return r;
        }
        let lo = self.restrict_rec(node.lo, var, value, memo);
        let hi = self.restrict_rec(node.hi, var, value, memo);
        let r = self.mk(node.var, lo, hi);
        memo.insert(u, r);
        r
    }

    /// Simultaneously replace variables of `u` according to `replacement`
    /// (indexed by variable; `None` keeps the variable).
    pub(crate) fn compose(&mut self, u: u32, replacement: &[Option<u32>]) -> u32 {
        let mut memo = HashMap::new();
        self.compose_rec(u, replacement, &mut memo)
    }

    fn compose_rec(&mut self, u: u32, replacement: &[Option<u32>], memo: &mut HashMap<u32, u32>) -> u32 {
        if u == FALSE || u == TRUE {
            return u;
        }
        if let Some(&r) = memo.get(&u) {
            return r;
        }
        let node = self.nodes[u as usize];
        let lo = self.compose_rec(node.lo, replacement, memo);
        let hi = self.compose_rec(node.hi, replacement, memo);
        let selector = match replacement.get(node.var as usize).copied().flatten() {
            Some(g) => g,
            None => self.var(node.var),
        };
        let r = self.ite(selector, hi, lo);
        memo.insert(u, r);
        r
    }

    /// Copy an existing function into this builder. Every support variable of
    /// `f` must be part of the builder's universe.
    pub(crate) fn import(&mut self, f: &BooleanFunction) -> Option<u32> {
        let map: Vec<u32> = f.vars.iter().map(|v| self.var_index(v)).collect::<Option<_>>()?;
        let mut ids = Vec::with_capacity(f.nodes.len());
        for (i, node) in f.nodes.iter().enumerate() {
            let id = match i as u32 {
                FALSE => FALSE,
                TRUE => TRUE,
                _ => {
                    let lo = ids[node.lo as usize];
                    let hi = ids[node.hi as usize];
                    self.mk(map[node.var as usize], lo, hi)
                }
            };
            ids.push(id);
        }
        Some(ids[f.root as usize])
    }

    /// Evaluate `f` with its variables (by index into `f.support()`) bound to
    /// the nodes in `args`.
    pub(crate) fn apply_function(&mut self, f: &BooleanFunction, args: &[u32]) -> u32 {
        debug_assert_eq!(args.len(), f.vars.len());
        let mut ids: Vec<u32> = Vec::with_capacity(f.nodes.len());
        for (i, node) in f.nodes.iter().enumerate() {
            let id = match i as u32 {
                FALSE => FALSE,
                TRUE => TRUE,
                _ => {
                    let lo = ids[node.lo as usize];
                    let hi = ids[node.hi as usize];
                    self.ite(args[node.var as usize], hi, lo)
                }
            };
            ids.push(id);
        }
        ids[f.root as usize]
    }

    /// Multiplexer tree selecting `bits[i]` for the input index `i` formed by
    /// `inputs[j]` as bit `j`.
    pub(crate) fn select_table(&mut self, inputs: &[u32], bits: &[bool]) -> u32 {
        debug_assert_eq!(bits.len(), 1usize << inputs.len());
        match inputs.split_last() {
            None => Self::constant(bits[0]),
            Some((&top, rest)) => {
                let half = bits.len() / 2;
                let lo = self.select_table(rest, &bits[..half]);
                let hi = self.select_table(rest, &bits[half..]);
                self.ite(top, hi, lo)
            }
        }
    }

    /// Build a function from a truth table where bit `i` is the value for the
    /// assignment with `order[j] = (i >> j) & 1`.
    pub(crate) fn table(&mut self, order: &[u32], bits: &[bool]) -> u32 {
        debug_assert_eq!(bits.len(), 1usize << order.len());
        self.table_rec(order, bits)
    }

    fn table_rec(&mut self, order: &[u32], bits: &[bool]) -> u32 {
        match order.split_last() {
            None => Self::constant(bits[0]),
            Some((&top, rest)) => {
                let half = bits.len() / 2;
                let lo = self.table_rec(rest, &bits[..half]);
                let hi = self.table_rec(rest, &bits[half..]);
                let x = self.var(top);
                self.ite(x, hi, lo)
            }
        }
    }

    /// Extract the canonical, self-contained function rooted at `root`.
    pub(crate) fn finish(&self, root: u32) -> BooleanFunction {
        // Post-order numbering (low child first) makes the node array a
        // function of the diagram's shape alone.
        let mut order = Vec::new();
        let mut index: HashMap<u32, u32> = HashMap::new();
        index.insert(FALSE, FALSE);
        index.insert(TRUE, TRUE);
        let mut stack = vec![(root, false)];
        while let Some((u, expanded)) = stack.pop() {
            if index.contains_key(&u) {
                continue;
            }
            let node = self.nodes[u as usize];
            if expanded {
                index.insert(u, (order.len() + 2) as u32);
                order.push(u);
            } else {
                stack.push((u, true));
                stack.push((node.hi, false));
                stack.push((node.lo, false));
            }
        }
        let mut used: Vec<u32> = order.iter().map(|&u| self.nodes[u as usize].var).collect();
        used.sort_unstable();
        used.dedup();
        let var_map: HashMap<u32, u32> = used.iter().enumerate().map(|(new, &old)| (old, new as u32)).collect();
        let mut nodes = vec![Node::terminal(false), Node::terminal(true)];
        nodes.extend(order.iter().map(|&u| {
            let n = self.nodes[u as usize];
            Node {
                var: var_map[&n.var],
                lo: index[&n.lo],
                hi: index[&n.hi],
            }
        }));
        let vars: Vec<String> = used.iter().map(|&v| self.vars[v as usize].clone()).collect();
        BooleanFunction {
            vars: Arc::from(vars),
            nodes: Arc::from(nodes),
            root: index[&root],
        }
    }
}
