//! Canonical Boolean functions.
//!
//! A [`BooleanFunction`] is a reduced, ordered binary decision diagram over
//! named variables. Variables are ordered lexicographically by name, and the
//! node array is numbered in a fixed post-order, so two functions compare
//! equal with `==` exactly when they are semantically equal. The support of a
//! function is always exact: a variable is listed only if the function
//! depends on it.
//!
//! Values are immutable and cheap to clone (the node array is shared), which
//! makes them safe to hand across threads. Every operation builds its result
//! in a private scratch table, so there is no global node cache to contend
//! on.
//!
//! ```
//! use gatescope::boolean::BooleanFunction;
//!
//! let a = BooleanFunction::var("a");
//! let b = BooleanFunction::var("b");
//! let nand = a.and(&b).not();
//! // De Morgan gives the same canonical diagram.
//! assert_eq!(nand, a.not().or(&b.not()));
//! assert_eq!(nand.truth_table(&["a", "b"]).unwrap(), vec![true, true, true, false]);
//! ```

mod bdd;
mod cone;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub(crate) use bdd::Builder;
pub use cone::{cone_function, cone_function_with, from_combinational, from_lut, ConeError, ConeOptions};

/// Default cap on the number of support variables for functions built from
/// netlist cones, and on truth-table enumeration.
pub const DEFAULT_MAX_VARS: usize = 24;

pub(crate) const FALSE: u32 = 0;
pub(crate) const TRUE: u32 = 1;
pub(crate) const TERMINAL_VAR: u32 = u32::MAX;

/// A total or partial assignment of variables to truth values.
pub type Assignment = BTreeMap<String, bool>;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum BoolError {
    #[error("variable `{0}` is not assigned")]
    Unassigned(String),
    #[error("support variable `{0}` missing from the variable order")]
    MissingVariable(String),
    #[error("variable `{0}` appears twice in the variable order")]
    DuplicateVariable(String),
    #[error("{count} variables exceed the limit of {limit}")]
    TooManyVariables { count: usize, limit: usize },
    #[error("truth table has {actual} entries, expected {expected}")]
    TableLength { expected: usize, actual: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct Node {
    pub(crate) var: u32,
    pub(crate) lo: u32,
    pub(crate) hi: u32,
}

impl Node {
    fn terminal(value: bool) -> Self {
        let v = value as u32;
        Node {
            var: TERMINAL_VAR,
            lo: v,
            hi: v,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    vars: Arc<[String]>,
    nodes: Arc<[Node]>,
    root: u32,
}

impl BooleanFunction {
    pub fn constant(value: bool) -> Self {
        Builder::new(Vec::<String>::new()).finish(Builder::constant(value))
    }

    pub fn var(name: impl Into<String>) -> Self {
        let mut b = Builder::new([name.into()]);
        let x = b.var(0);
        b.finish(x)
    }

    /// Build a function from a truth table. Entry `i` is the output for the
    /// assignment where `order[j]` takes bit `j` of `i`.
    pub fn from_truth_table<S: AsRef<str>>(order: &[S], bits: &[bool]) -> Result<Self, BoolError> {
        check_order(order)?;
        if order.len() > DEFAULT_MAX_VARS {
            return Err(BoolError::TooManyVariables {
                count: order.len(),
                limit: DEFAULT_MAX_VARS,
            });
        }
        let expected = 1usize << order.len();
        if bits.len() != expected {
            return Err(BoolError::TableLength {
                expected,
                actual: bits.len(),
            });
        }
        let mut b = Builder::new(order.iter().map(|s| s.as_ref().to_string()));
        let idx: Vec<u32> = order
            .iter()
            .map(|s| b.var_index(s.as_ref()).expect("variable registered"))
            .collect();
        let root = b.table(&idx, bits);
        Ok(b.finish(root))
    }

    /// Variables the function depends on, in canonical (lexicographic) order.
    pub fn support(&self) -> &[String] {
        &self.vars
    }

    pub fn as_constant(&self) -> Option<bool> {
        match self.root {
            FALSE => Some(false),
            TRUE => Some(true),
            _ => None,
        }
    }

    /// Number of decision nodes, excluding the two terminals.
    pub fn node_count(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn not(&self) -> Self {
        self.unary(|b, u| b.not(u))
    }

    pub fn and(&self, other: &Self) -> Self {
        self.binary(other, |b, x, y| b.and(x, y))
    }

    pub fn or(&self, other: &Self) -> Self {
        self.binary(other, |b, x, y| b.or(x, y))
    }

    pub fn xor(&self, other: &Self) -> Self {
        self.binary(other, |b, x, y| b.xor(x, y))
    }

    /// If-then-else: `cond ? then : otherwise`.
    pub fn ite(cond: &Self, then: &Self, otherwise: &Self) -> Self {
        let mut b = builder_for(&[cond, then, otherwise]);
        let c = b.import(cond).expect("universe covers operands");
        let t = b.import(then).expect("universe covers operands");
        let e = b.import(otherwise).expect("universe covers operands");
        let r = b.ite(c, t, e);
        b.finish(r)
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool, BoolError> {
        self.evaluate_with(|name| assignment.get(name).copied())
    }

    /// Evaluate with a lookup closure; only support variables are queried.
    pub fn evaluate_with<F>(&self, mut lookup: F) -> Result<bool, BoolError>
    where
        F: FnMut(&str) -> Option<bool>,
    {
        let mut u = self.root;
        while u > TRUE {
            let node = self.nodes[u as usize];
            let name = &self.vars[node.var as usize];
            let value = lookup(name).ok_or_else(|| BoolError::Unassigned(name.clone()))?;
            u = if value { node.hi } else { node.lo };
        }
        Ok(u == TRUE)
    }

    /// Truth table over `order`; entry `i` assigns bit `j` of `i` to
    /// `order[j]`. The order must cover the support and may contain extra
    /// variables.
    pub fn truth_table<S: AsRef<str>>(&self, order: &[S]) -> Result<Vec<bool>, BoolError> {
        if order.len() > DEFAULT_MAX_VARS {
            return Err(BoolError::TooManyVariables {
                count: order.len(),
                limit: DEFAULT_MAX_VARS,
            });
        }
        let bound = self.bind(order)?;
        Ok((0..1u64 << order.len()).map(|i| bound.eval(i)).collect())
    }

    /// Resolve variables to bit positions in `order` for fast repeated
    /// evaluation.
    pub fn bind<S: AsRef<str>>(&self, order: &[S]) -> Result<BoundFunction, BoolError> {
        check_order(order)?;
        if order.len() > 64 {
            return Err(BoolError::TooManyVariables {
                count: order.len(),
                limit: 64,
            });
        }
        let positions = self
            .vars
            .iter()
            .map(|v| {
                order
                    .iter()
                    .position(|o| o.as_ref() == v)
                    .map(|p| p as u32)
                    .ok_or_else(|| BoolError::MissingVariable(v.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BoundFunction {
            nodes: self
                .nodes
                .iter()
                .map(|n| Node {
                    var: if n.var == TERMINAL_VAR {
                        TERMINAL_VAR
                    } else {
                        positions[n.var as usize]
                    },
                    ..*n
                })
                .collect(),
            root: self.root,
        })
    }

    /// Shannon cofactor with `var` fixed to `value`. Variables outside the
    /// support leave the function unchanged.
    pub fn cofactor(&self, var: &str, value: bool) -> Self {
        let mut b = builder_for(&[self]);
        let u = b.import(self).expect("own universe");
        match b.var_index(var) {
            Some(idx) => {
                let r = b.restrict(u, idx, value);
                b.finish(r)
            }
            None => self.clone(),
        }
    }

    /// Replace `var` by `g` everywhere in the function.
    pub fn substitute(&self, var: &str, g: &Self) -> Self {
        let mut map = BTreeMap::new();
        map.insert(var.to_string(), g.clone());
        self.compose(&map)
    }

    /// Simultaneous substitution: every variable named in `map` is replaced
    /// by its function, evaluated against the original variables.
    pub fn compose(&self, map: &BTreeMap<String, BooleanFunction>) -> Self {
        let mut operands: Vec<&BooleanFunction> = vec![self];
        operands.extend(map.values());
        let mut b = builder_for(&operands);
        let u = b.import(self).expect("universe covers operands");
        let mut replacement = vec![None; b.var_count()];
        for (name, g) in map {
            if let Some(idx) = b.var_index(name) {
                let gu = b.import(g).expect("universe covers operands");
                replacement[idx as usize] = Some(gu);
            }
        }
        let r = b.compose(u, &replacement);
        b.finish(r)
    }

    /// Semantic equality; identical to `==` thanks to canonicity.
    pub fn equivalent(&self, other: &Self) -> bool {
        self == other
    }

    /// Satisfying cubes of the diagram, one per path to the true terminal.
    pub fn cubes(&self) -> Vec<Vec<(String, bool)>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_cubes(self.root, &mut path, &mut out);
        out
    }

    fn collect_cubes(&self, u: u32, path: &mut Vec<(String, bool)>, out: &mut Vec<Vec<(String, bool)>>) {
        match u {
            FALSE => {}
            TRUE => out.push(path.clone()),
            _ => {
                let node = self.nodes[u as usize];
                let name = self.vars[node.var as usize].clone();
                path.push((name.clone(), false));
                self.collect_cubes(node.lo, path, out);
                path.pop();
                path.push((name, true));
                self.collect_cubes(node.hi, path, out);
                path.pop();
            }
        }
    }

    fn unary(&self, op: impl FnOnce(&mut Builder, u32) -> u32) -> Self {
        let mut b = builder_for(&[self]);
        let u = b.import(self).expect("own universe");
        let r = op(&mut b, u);
        b.finish(r)
    }

    fn binary(&self, other: &Self, op: impl FnOnce(&mut Builder, u32, u32) -> u32) -> Self {
        let mut b = builder_for(&[self, other]);
        let x = b.import(self).expect("universe covers operands");
        let y = b.import(other).expect("universe covers operands");
        let r = op(&mut b, x, y);
        b.finish(r)
    }
}

fn builder_for(fs: &[&BooleanFunction]) -> Builder {
    Builder::new(fs.iter().flat_map(|f| f.vars.iter().cloned()))
}

fn check_order<S: AsRef<str>>(order: &[S]) -> Result<(), BoolError> {
    let mut seen = std::collections::HashSet::new();
    for o in order {
        if !seen.insert(o.as_ref()) {
            return Err(BoolError::DuplicateVariable(o.as_ref().to_string()));
        }
    }
    Ok(())
}

/// A function whose variables have been mapped to bit positions of a `u64`.
#[derive(Clone, Debug)]
pub struct BoundFunction {
    nodes: Vec<Node>,
    root: u32,
}

impl BoundFunction {
    pub fn eval(&self, bits: u64) -> bool {
        let mut u = self.root;
        while u > TRUE {
            let node = self.nodes[u as usize];
            u = if bits >> node.var & 1 == 1 { node.hi } else { node.lo };
        }
        u == TRUE
    }
}

/// Renders a sum of products, one product per diagram path to true.
impl fmt::Display for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.as_constant() {
            return write!(f, "{}", c as u8);
        }
        let cubes = self.cubes();
        for (i, cube) in cubes.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            let parens = cubes.len() > 1 && cube.len() > 1;
            if parens {
                f.write_str("(")?;
            }
            for (j, (name, value)) in cube.iter().enumerate() {
                if j > 0 {
                    f.write_str(" & ")?;
                }
                if !value {
                    f.write_str("!")?;
                }
                f.write_str(name)?;
            }
            if parens {
                f.write_str(")")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanFunction({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> BooleanFunction {
        BooleanFunction::var(name)
    }

    #[test]
    fn nand_cofactor_is_not() {
        let nand = v("A").and(&v("B")).not();
        assert_eq!(nand.cofactor("A", true), v("B").not());
        assert_eq!(nand.cofactor("A", false), BooleanFunction::constant(true));
    }

    #[test]
    fn substitute_matches_brute_force() {
        // XOR(A,B)[B := A & C] against A ^ (A & C), enumerated over (A, C).
        let f = v("A").xor(&v("B"));
        let g = v("A").and(&v("C"));
        let h = f.substitute("B", &g);
        for bits in 0..4u8 {
            let a = bits & 1 == 1;
            let c = bits & 2 == 2;
            let mut asg = Assignment::new();
            asg.insert("A".into(), a);
            asg.insert("C".into(), c);
            assert_eq!(h.evaluate(&asg).unwrap(), a ^ (a & c));
        }
        assert_eq!(h.truth_table(&["A", "C"]).unwrap(), vec![false, true, false, false]);
    }

    #[test]
    fn construction_order_does_not_matter() {
        let f1 = v("a").and(&v("b")).or(&v("c"));
        let f2 = v("c").or(&v("b").and(&v("a")));
        let f3 = v("a").or(&v("c")).and(&v("b").or(&v("c")));
        assert!(f1.equivalent(&f2));
        assert_eq!(f1, f3);
    }

    #[test]
    fn support_is_exact() {
        let f = v("a").and(&v("b")).or(&v("a").and(&v("b").not()));
        assert_eq!(f.support(), &["a".to_string()]);
        let zero = v("x").xor(&v("x"));
        assert_eq!(zero.as_constant(), Some(false));
        assert!(zero.support().is_empty());
    }

    #[test]
    fn partial_assignment_is_an_error() {
        let f = v("a").and(&v("b"));
        let mut asg = Assignment::new();
        asg.insert("a".into(), true);
        assert_eq!(f.evaluate(&asg), Err(BoolError::Unassigned("b".into())));
        asg.insert("a".into(), false);
        // Short-circuits before reaching b.
        assert_eq!(f.evaluate(&asg), Ok(false));
    }

    #[test]
    fn truth_table_round_trip() {
        let bits = [true, false, true, false, false, false, false, false];
        let f = BooleanFunction::from_truth_table(&["I0", "I1", "I2"], &bits).unwrap();
        assert_eq!(f.truth_table(&["I0", "I1", "I2"]).unwrap(), bits);
        assert_eq!(f, v("I0").not().and(&v("I2").not()));
        assert!(matches!(
            BooleanFunction::from_truth_table(&["a"], &[true]),
            Err(BoolError::TableLength { .. })
        ));
        assert!(matches!(
            f.truth_table(&["I0", "I1"]),
            Err(BoolError::MissingVariable(_))
        ));
    }

    #[test]
    fn ite_and_compose() {
        let f = BooleanFunction::ite(&v("s"), &v("a"), &v("b"));
        assert_eq!(f.cofactor("s", true), v("a"));
        assert_eq!(f.cofactor("s", false), v("b"));
        // Swap a and b simultaneously.
        let mut map = BTreeMap::new();
        map.insert("a".to_string(), v("b"));
        map.insert("b".to_string(), v("a"));
        let swapped = f.compose(&map);
        assert_eq!(swapped, BooleanFunction::ite(&v("s"), &v("b"), &v("a")));
    }

    #[test]
    fn display_renders_products() {
        assert_eq!(BooleanFunction::constant(true).to_string(), "1");
        assert_eq!(v("a").not().to_string(), "!a");
        assert_eq!(v("a").and(&v("b")).to_string(), "a & b");
    }
}
