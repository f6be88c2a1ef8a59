use serde::{Deserialize, Serialize};

/// Arena node; `left`/`right` index into the owning tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf { value: f64 },
    Split { var: usize, threshold: f64, left: usize, right: usize },
}

/// Binary tree with rule `x[var] <= threshold` sending observations left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    #[serde(skip)]
    pub(crate) parent: Vec<Option<usize>>,
    #[serde(skip)]
    pub(crate) depth: Vec<usize>,
}

impl Tree {
    pub fn stump(value: f64) -> Self {
        Tree { nodes: vec![Node::Leaf { value }], parent: vec![None], depth: vec![0] }
    }

    pub fn predict_one(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { var, threshold, left, right } => i = if x[var] <= threshold { left } else { right },
            }
        }
    }

    pub(crate) fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split { var, threshold, left, right } => i = if x[var] <= threshold { left } else { right },
            }
        }
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        matches!(self.nodes[i], Node::Leaf { .. })
    }

    /// Live leaves (detached arena slots are skipped).
    pub fn leaves(&self) -> Vec<usize> {
        self.reachable().into_iter().filter(|&i| self.is_leaf(i)).collect()
    }

    /// Split nodes whose two children are both leaves.
    pub fn nog_nodes(&self) -> Vec<usize> {
        self.reachable()
            .into_iter()
            .filter(|&i| match self.nodes[i] {
                Node::Split { left, right, .. } => self.is_leaf(left) && self.is_leaf(right),
                Node::Leaf { .. } => false,
            })
            .collect()
    }

    fn reachable(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            out.push(i);
            if let Node::Split { left, right, .. } = self.nodes[i] {
                stack.push(right);
                stack.push(left);
            }
        }
        out.sort_unstable();
        out
    }

    pub fn depth_of(&self, i: usize) -> usize {
        self.depth[i]
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves().len()
    }

    pub(crate) fn grow(&mut self, leaf: usize, var: usize, threshold: f64) -> (usize, usize) {
        let d = self.depth[leaf] + 1;
        let l = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });
        self.nodes.push(Node::Leaf { value: 0.0 });
        self.parent.extend([Some(leaf), Some(leaf)]);
        self.depth.extend([d, d]);
        self.nodes[leaf] = Node::Split { var, threshold, left: l, right: l + 1 };
        (l, l + 1)
    }

    pub(crate) fn prune(&mut self, node: usize) {
        self.nodes[node] = Node::Leaf { value: 0.0 };
        self.compact();
    }

    pub(crate) fn set_rule(&mut self, node: usize, new_var: usize, new_threshold: f64) {
        if let Node::Split { var, threshold, .. } = &mut self.nodes[node] {
            *var = new_var;
            *threshold = new_threshold;
        }
    }

    pub(crate) fn set_leaf(&mut self, i: usize, v: f64) {
        self.nodes[i] = Node::Leaf { value: v };
    }

    /// Renumber reachable nodes in preorder and drop detached slots.
    pub(crate) fn compact(&mut self) {
        let mut order = Vec::new();
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            order.push(i);
            if let Node::Split { left, right, .. } = self.nodes[i] {
                stack.push(right);
                stack.push(left);
            }
        }
        let mut map = vec![usize::MAX; self.nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            map[old] = new;
        }
        let mut nodes = Vec::with_capacity(order.len());
        for &old in &order {
            nodes.push(match self.nodes[old] {
                Node::Split { var, threshold, left, right } => Node::Split { var, threshold, left: map[left], right: map[right] },
                ref leaf => leaf.clone(),
            });
        }
        self.nodes = nodes;
        self.rebuild_links();
    }

    pub(crate) fn rebuild_links(&mut self) {
        let n = self.nodes.len();
        self.parent = vec![None; n];
        self.depth = vec![0; n];
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            if let Node::Split { left, right, .. } = self.nodes[i] {
                for c in [left, right] {
                    self.parent[c] = Some(i);
                    self.depth[c] = self.depth[i] + 1;
                    stack.push(c);
                }
            }
        }
    }
}
