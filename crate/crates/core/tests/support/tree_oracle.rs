//! Replay model of template-tree evolution. Templates are tracked only by
//! their stamp, which is enough to check structure, eviction and
//! knowledge preservation.

use tabref_core::tree::{TemplateSource, TemplateTree, TreeNode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    Leaf(Vec<u64>),
    Inner(Vec<(String, Shape)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Add(Vec<String>),
    Split(Vec<String>, String, String),
    /// Full route of the new leaf; an existing leaf there takes the
    /// template instead.
    Branch(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct Model {
    pub root: Vec<(String, Shape)>,
    pub next: u64,
    pub seeds: Vec<u64>,
}

const CAPACITY: usize = 8;

fn find<'a>(nodes: &'a mut [(String, Shape)], route: &[String]) -> Option<&'a mut Shape> {
    let (first, rest) = route.split_first()?;
    let (_, node) = nodes.iter_mut().find(|(n, _)| n == first)?;
    if rest.is_empty() {
        return Some(node);
    }
    match node {
        Shape::Inner(children) => find(children, rest),
        Shape::Leaf(_) => None,
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s != "random" && !s.contains(['<', '>'])
}

impl Model {
    /// Two root leaves holding the seed templates 1 and 2.
    pub fn initial() -> Self {
        Model {
            root: vec![
                ("sub-table error".into(), Shape::Leaf(vec![1])),
                ("final query error".into(), Shape::Leaf(vec![2])),
            ],
            next: 3,
            seeds: vec![1, 2],
        }
    }

    /// Applies a step; `false` means the tree must reject it unchanged.
    pub fn apply(&mut self, step: &Step) -> bool {
        let id = self.next;
        let seeds = self.seeds.clone();
        let ok = match step {
            Step::Add(route) => match find(&mut self.root, route) {
                Some(Shape::Leaf(ids)) => {
                    ids.push(id);
                    if ids.len() > CAPACITY {
                        if let Some(at) = ids.iter().position(|i| !seeds.contains(i)) {
                            ids.remove(at);
                        }
                    }
                    true
                }
                _ => false,
            },
            Step::Split(route, a, b) => {
                if a == b || !valid_name(a) || !valid_name(b) {
                    false
                } else {
                    match find(&mut self.root, route) {
                        Some(node @ Shape::Leaf(_)) => {
                            let Shape::Leaf(old) = std::mem::replace(node, Shape::Leaf(vec![])) else { unreachable!() };
                            *node = Shape::Inner(vec![(a.clone(), Shape::Leaf(old)), (b.clone(), Shape::Leaf(vec![id]))]);
                            true
                        }
                        _ => false,
                    }
                }
            }
            Step::Branch(route) => {
                let (name, parent) = route.split_last().expect("nonempty");
                let siblings = if parent.is_empty() {
                    Some(&mut self.root)
                } else {
                    match find(&mut self.root, parent) {
                        Some(Shape::Inner(c)) => Some(c),
                        _ => None,
                    }
                };
                match siblings {
                    None => false,
                    Some(_) if !valid_name(name) => false,
                    Some(children) => match children.iter_mut().find(|(n, _)| n == name) {
                        None => {
                            children.push((name.clone(), Shape::Leaf(vec![id])));
                            true
                        }
                        Some((_, Shape::Leaf(_))) => return self.apply(&Step::Add(route.clone())),
                        Some((_, Shape::Inner(_))) => false,
                    },
                }
            }
        };
        if ok {
            self.next += 1;
        }
        ok
    }

    pub fn leaf_routes(&self) -> Vec<Vec<String>> {
        fn walk(nodes: &[(String, Shape)], prefix: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
            for (name, s) in nodes {
                prefix.push(name.clone());
                match s {
                    Shape::Leaf(_) => out.push(prefix.clone()),
                    Shape::Inner(c) => walk(c, prefix, out),
                }
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut Vec::new(), &mut out);
        out
    }

    pub fn inner_routes(&self) -> Vec<Vec<String>> {
        fn walk(nodes: &[(String, Shape)], prefix: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
            for (name, s) in nodes {
                prefix.push(name.clone());
                if let Shape::Inner(c) = s {
                    out.push(prefix.clone());
                    walk(c, prefix, out);
                }
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut Vec::new(), &mut out);
        out
    }
}

/// The tree reduced to the same shape as the model, plus a check that seed
/// templates are marked as seeds.
pub fn shape_of(tree: &TemplateTree) -> Vec<(String, Shape)> {
    fn walk(nodes: &[TreeNode]) -> Vec<(String, Shape)> {
        nodes
            .iter()
            .map(|n| {
                let s = if n.children.is_empty() {
                    Shape::Leaf(n.templates.iter().map(|t| t.created_at).collect())
                } else {
                    Shape::Inner(walk(&n.children))
                };
                (n.name.clone(), s)
            })
            .collect()
    }
    walk(tree.categories())
}

pub fn all_ids(nodes: &[(String, Shape)]) -> Vec<u64> {
    let mut out = Vec::new();
    for (_, s) in nodes {
        match s {
            Shape::Leaf(ids) => out.extend(ids),
            Shape::Inner(c) => out.extend(all_ids(c)),
        }
    }
    out.sort_unstable();
    out
}

pub fn seed_ids(tree: &TemplateTree) -> Vec<u64> {
    let mut out: Vec<u64> = tree
        .all_templates()
        .into_iter()
        .filter(|t| t.source == TemplateSource::Seed)
        .map(|t| t.created_at)
        .collect();
    out.sort_unstable();
    out
}
