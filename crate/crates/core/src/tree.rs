//! The self-evolving critique template tree.
//!
//! Internal nodes are error categories, leaves hold worked critique
//! templates. Judges emit routes such as
//! `(sub-table error -> column error -> <END>)` that locate a leaf; the
//! curator grows the tree by adding templates to a leaf, splitting a leaf
//! into two children, or adding a new branch beside existing ones.

mod seeds;

use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Templates handed to the critic from a resolved leaf.
pub const SAMPLE_SIZE: usize = 2;
/// Templates kept per leaf; the oldest curated one is evicted beyond this.
pub const LEAF_CAPACITY: usize = 8;
pub const SCHEMA_TAG: &str = "template-tree/v1";
pub const END_MARKER: &str = "<END>";

/// Lowercases and collapses runs of whitespace.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateSource {
    Seed,
    Curated,
}

/// One worked critique example.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CritiqueTemplate {
    pub table_text: String,
    pub question: String,
    pub chain_text: String,
    pub critique_text: String,
    pub source: TemplateSource,
    /// Stamped by the tree when the template is inserted.
    pub created_at: u64,
}

fn conclusion_tail_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^Conclusion: \[Incorrect\] Step \d+$").unwrap())
}

impl CritiqueTemplate {
    pub fn curated(
        table_text: impl Into<String>,
        question: impl Into<String>,
        chain_text: impl Into<String>,
        critique_text: impl Into<String>,
    ) -> Self {
        CritiqueTemplate {
            table_text: table_text.into(),
            question: question.into(),
            chain_text: chain_text.into(),
            critique_text: critique_text.into(),
            source: TemplateSource::Curated,
            created_at: 0,
        }
    }

    /// The critique must close with a `Conclusion: [Incorrect] Step <NUM>`
    /// line.
    pub fn check(&self) -> Result<(), TreeError> {
        let last = self.critique_text.lines().rev().find(|l| !l.trim().is_empty());
        match last {
            Some(l) if conclusion_tail_re().is_match(l.trim()) => Ok(()),
            _ => Err(TreeError::InvalidTemplate(
                "critique must end with `Conclusion: [Incorrect] Step <NUM>`".into(),
            )),
        }
    }

    /// Worked-example rendering used inside critic and curator prompts.
    pub fn render(&self) -> String {
        format!(
            "Original Table:\n{}\n\nQuestion:\n{}\n\nReasoning Steps:\n{}\n\nCritique:\n{}",
            self.table_text, self.question, self.chain_text, self.critique_text
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TreeNode>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub templates: Vec<CritiqueTemplate>,
}

impl TreeNode {
    fn leaf(name: String, templates: Vec<CritiqueTemplate>) -> Self {
        TreeNode {
            name,
            children: Vec::new(),
            templates,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    End,
    Random,
}

/// Sequence of node names from the root, ending in `<END>`, or the
/// `(random)` fallback.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RoutePath {
    pub segments: Vec<String>,
    pub terminal: Terminal,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed route `{text}`: {reason}")]
pub struct RouteSyntaxError {
    pub text: String,
    pub reason: String,
}

impl RoutePath {
    pub fn to_leaf<S: AsRef<str>>(segments: &[S]) -> Self {
        RoutePath {
            segments: segments.iter().map(|s| normalize_name(s.as_ref())).collect(),
            terminal: Terminal::End,
        }
    }

    pub fn random() -> Self {
        RoutePath {
            segments: Vec::new(),
            terminal: Terminal::Random,
        }
    }

    /// Parses `(a -> b -> <END>)` or `(random)`. Names are normalized; every
    /// segment must be nonempty and the END form needs at least one name.
    pub fn parse(text: &str) -> Result<Self, RouteSyntaxError> {
        let err = |reason: &str| RouteSyntaxError {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let t = text.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| err("route must be wrapped in parentheses"))?;
        if inner.trim() == "random" {
            return Ok(RoutePath::random());
        }
        if inner.contains(['(', ')']) {
            return Err(err("nested parentheses"));
        }
        let parts: Vec<&str> = inner.split("->").map(str::trim).collect();
        let (last, names) = parts.split_last().ok_or_else(|| err("empty route"))?;
        if *last != END_MARKER {
            return Err(err("route must end with `<END>`"));
        }
        if names.is_empty() {
            return Err(err("route names no node"));
        }
        let mut segments = Vec::with_capacity(names.len());
        for n in names {
            let n = normalize_name(n);
            if n.is_empty() || n.contains(['<', '>']) {
                return Err(err("empty or invalid node name"));
            }
            segments.push(n);
        }
        Ok(RoutePath {
            segments,
            terminal: Terminal::End,
        })
    }
}

impl fmt::Display for RoutePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.terminal {
            Terminal::Random => f.write_str("(random)"),
            Terminal::End => {
                f.write_str("(")?;
                for s in &self.segments {
                    write!(f, "{s} -> ")?;
                }
                write!(f, "{END_MARKER})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolutionFailure {
    #[error("route has no segments")]
    EmptyRoute,
    #[error("no node `{name}` at depth {depth}")]
    UnknownSegment { depth: usize, name: String },
    #[error("route ends at internal node `{0}`")]
    NotALeaf(String),
    #[error("route ends at leaf `{0}`, expected an internal node")]
    NotInternal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("the tree has no templates to sample")]
    EmptyTree,
    #[error(transparent)]
    Resolution(#[from] ResolutionFailure),
    #[error("name `{0}` already exists here")]
    NameCollision(String),
    #[error("invalid node name `{0}`")]
    InvalidName(String),
    #[error("invalid template: {0}")]
    InvalidTemplate(String),
    #[error("tree invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("corrupt tree file: {0}")]
    CorruptTreeFile(String),
}

/// Index path from the root to a node.
pub type NodePath = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateTree {
    categories: Vec<TreeNode>,
    next_template_id: u64,
    version: u64,
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    schema: String,
    version: u64,
    next_template_id: u64,
    categories: Vec<TreeNode>,
}

impl Default for TemplateTree {
    fn default() -> Self {
        Self::initial()
    }
}

impl TemplateTree {
    /// Two root leaves, `sub-table error` and `final query error`, one seed
    /// template each.
    pub fn initial() -> Self {
        let mut tree = TemplateTree::empty();
        for (name, mut template) in seeds::seed_templates() {
            template.created_at = tree.bump_id();
            tree.categories.push(TreeNode::leaf(name.to_string(), vec![template]));
        }
        tree
    }

    pub fn empty() -> Self {
        TemplateTree {
            categories: Vec::new(),
            next_template_id: 1,
            version: 0,
        }
    }

    pub fn categories(&self) -> &[TreeNode] {
        &self.categories
    }

    /// Mutation counter; unchanged by reads.
    pub fn version(&self) -> u64 {
        self.version
    }

    fn bump_id(&mut self) -> u64 {
        let id = self.next_template_id;
        self.next_template_id += 1;
        id
    }

    pub fn node(&self, path: &[usize]) -> Option<&TreeNode> {
        let (first, rest) = path.split_first()?;
        let mut node = self.categories.get(*first)?;
        for &i in rest {
            node = node.children.get(i)?;
        }
        Some(node)
    }

    fn node_mut(&mut self, path: &[usize]) -> Option<&mut TreeNode> {
        let (first, rest) = path.split_first()?;
        let mut node = self.categories.get_mut(*first)?;
        for &i in rest {
            node = node.children.get_mut(i)?;
        }
        Some(node)
    }

    fn children_at(&self, path: &[usize]) -> Option<&[TreeNode]> {
        if path.is_empty() {
            Some(&self.categories)
        } else {
            self.node(path).map(|n| n.children.as_slice())
        }
    }

    fn children_at_mut(&mut self, path: &[usize]) -> Option<&mut Vec<TreeNode>> {
        if path.is_empty() {
            Some(&mut self.categories)
        } else {
            self.node_mut(path).map(|n| &mut n.children)
        }
    }

    /// Follows names from the root. An empty name list resolves to the
    /// root itself (the empty path).
    pub fn locate<S: AsRef<str>>(&self, segments: &[S]) -> Result<NodePath, ResolutionFailure> {
        let mut path = Vec::with_capacity(segments.len());
        for (depth, seg) in segments.iter().enumerate() {
            let name = normalize_name(seg.as_ref());
            let children = self.children_at(&path).unwrap_or(&[]);
            let idx = children
                .iter()
                .position(|c| c.name == name)
                .ok_or(ResolutionFailure::UnknownSegment { depth, name })?;
            path.push(idx);
        }
        Ok(path)
    }

    /// Resolves a route to a leaf. The terminal is not consulted.
    pub fn resolve(&self, route: &RoutePath) -> Result<NodePath, ResolutionFailure> {
        if route.segments.is_empty() {
            return Err(ResolutionFailure::EmptyRoute);
        }
        let path = self.locate(&route.segments)?;
        let node = self.node(&path).expect("located path exists");
        if node.is_leaf() {
            Ok(path)
        } else {
            Err(ResolutionFailure::NotALeaf(node.name.clone()))
        }
    }

    /// Names from the root down to `path`.
    pub fn names_along(&self, path: &[usize]) -> Vec<String> {
        (1..=path.len())
            .filter_map(|n| self.node(&path[..n]).map(|node| node.name.clone()))
            .collect()
    }

    /// Leaf paths in depth-first order.
    pub fn leaf_paths(&self) -> Vec<NodePath> {
        fn walk(nodes: &[TreeNode], prefix: &mut NodePath, out: &mut Vec<NodePath>) {
            for (i, n) in nodes.iter().enumerate() {
                prefix.push(i);
                if n.is_leaf() {
                    out.push(prefix.clone());
                } else {
                    walk(&n.children, prefix, out);
                }
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        walk(&self.categories, &mut Vec::new(), &mut out);
        out
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_paths().len()
    }

    pub fn depth(&self) -> usize {
        self.leaf_paths().iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn template_count(&self) -> usize {
        self.leaf_paths()
            .iter()
            .map(|p| self.node(p).map_or(0, |n| n.templates.len()))
            .sum()
    }

    /// Every template in depth-first leaf order.
    pub fn all_templates(&self) -> Vec<&CritiqueTemplate> {
        self.leaf_paths()
            .iter()
            .flat_map(|p| self.node(p).map(|n| n.templates.iter()).into_iter().flatten())
            .collect()
    }

    /// Picks critique templates for `route`. A resolved, nonempty leaf gives
    /// its newest templates (up to [`SAMPLE_SIZE`], newest first); otherwise
    /// up to two distinct leaves are drawn uniformly and one template is
    /// drawn uniformly from each.
    pub fn sample_templates<R: Rng + ?Sized>(
        &self,
        route: &RoutePath,
        rng: &mut R,
    ) -> Result<Vec<CritiqueTemplate>, TreeError> {
        if route.terminal == Terminal::End {
            if let Ok(path) = self.resolve(route) {
                let leaf = self.node(&path).expect("resolved");
                if !leaf.templates.is_empty() {
                    return Ok(leaf.templates.iter().rev().take(SAMPLE_SIZE).cloned().collect());
                }
            }
        }
        let leaves: Vec<&TreeNode> = self
            .leaf_paths()
            .iter()
            .filter_map(|p| self.node(p))
            .filter(|n| !n.templates.is_empty())
            .collect();
        let n = leaves.len();
        if n == 0 {
            return Err(TreeError::EmptyTree);
        }
        let first = rng.random_range(0..n);
        let mut picks = vec![first];
        if n > 1 {
            let mut second = rng.random_range(0..n - 1);
            if second >= first {
                second += 1;
            }
            picks.push(second);
        }
        Ok(picks
            .into_iter()
            .map(|i| {
                let ts = &leaves[i].templates;
                ts[rng.random_range(0..ts.len())].clone()
            })
            .collect())
    }

    /// Seeded convenience wrapper around [`Self::sample_templates`].
    pub fn sample_templates_seeded(&self, route: &RoutePath, seed: u64) -> Result<Vec<CritiqueTemplate>, TreeError> {
        self.sample_templates(route, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn stamp(&mut self, mut template: CritiqueTemplate) -> Result<CritiqueTemplate, TreeError> {
        template.check()?;
        template.created_at = self.bump_id();
        Ok(template)
    }

    /// Template enhancement: appends to the leaf at `route`, evicting the
    /// oldest curated template once the leaf exceeds [`LEAF_CAPACITY`].
    /// Seed templates are never evicted.
    pub fn add_template(&mut self, route: &RoutePath, template: CritiqueTemplate) -> Result<(), TreeError> {
        let path = self.resolve(route)?;
        let template = self.stamp(template)?;
        let leaf = self.node_mut(&path).expect("resolved");
        leaf.templates.push(template);
        if leaf.templates.len() > LEAF_CAPACITY {
            if let Some(oldest) = leaf
                .templates
                .iter()
                .position(|t| t.source == TemplateSource::Curated)
            {
                leaf.templates.remove(oldest);
            }
        }
        self.version += 1;
        Ok(())
    }

    /// Vertical expansion: the leaf at `route` becomes an internal node
    /// whose first child keeps every existing template and whose second
    /// child holds `template`.
    pub fn vertical_expand(
        &mut self,
        route: &RoutePath,
        existing_group_name: &str,
        new_leaf_name: &str,
        template: CritiqueTemplate,
    ) -> Result<(), TreeError> {
        let path = self.resolve(route)?;
        let existing = checked_name(existing_group_name)?;
        let new = checked_name(new_leaf_name)?;
        if existing == new {
            return Err(TreeError::NameCollision(new));
        }
        let template = self.stamp(template)?;
        let leaf = self.node_mut(&path).expect("resolved");
        let prior = std::mem::take(&mut leaf.templates);
        leaf.children = vec![TreeNode::leaf(existing, prior), TreeNode::leaf(new, vec![template])];
        self.version += 1;
        Ok(())
    }

    /// Horizontal expansion: adds a new leaf under the internal node named by
    /// `parent_segments` (empty means the root).
    pub fn horizontal_expand<S: AsRef<str>>(
        &mut self,
        parent_segments: &[S],
        new_branch_name: &str,
        template: CritiqueTemplate,
    ) -> Result<(), TreeError> {
        let path = self.locate(parent_segments)?;
        if let Some(node) = self.node(&path) {
            if node.is_leaf() {
                return Err(ResolutionFailure::NotInternal(node.name.clone()).into());
            }
        }
        let name = checked_name(new_branch_name)?;
        if self.children_at(&path).is_some_and(|c| c.iter().any(|n| n.name == name)) {
            return Err(TreeError::NameCollision(name));
        }
        let template = self.stamp(template)?;
        self.children_at_mut(&path)
            .expect("located")
            .push(TreeNode::leaf(name, vec![template]));
        self.version += 1;
        Ok(())
    }

    /// Structural invariants only: internal nodes have children and no
    /// templates, names are normalized, nonempty and unique among siblings,
    /// template stamps are unique and below the id counter.
    pub fn validate_structure(&self) -> Result<(), TreeError> {
        fn walk(nodes: &[TreeNode], ids: &mut Vec<u64>, next: u64) -> Result<(), TreeError> {
            for (i, n) in nodes.iter().enumerate() {
                if n.name.is_empty() || normalize_name(&n.name) != n.name || n.name.contains(['<', '>']) {
                    return Err(TreeError::Invariant(format!("bad node name `{}`", n.name)));
                }
                if nodes[..i].iter().any(|s| s.name == n.name) {
                    return Err(TreeError::Invariant(format!("duplicate sibling `{}`", n.name)));
                }
                if !n.children.is_empty() && !n.templates.is_empty() {
                    return Err(TreeError::Invariant(format!("internal node `{}` holds templates", n.name)));
                }
                for t in &n.templates {
                    if t.created_at == 0 || t.created_at >= next {
                        return Err(TreeError::Invariant(format!("template stamp {} out of range", t.created_at)));
                    }
                    ids.push(t.created_at);
                }
                walk(&n.children, ids, next)?;
            }
            Ok(())
        }
        let mut ids = Vec::new();
        walk(&self.categories, &mut ids, self.next_template_id)?;
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(TreeError::Invariant("duplicate template stamp".into()));
        }
        Ok(())
    }

    /// Full invariants: structure, a nonempty root, and at least one valid
    /// template in every leaf.
    pub fn validate(&self) -> Result<(), TreeError> {
        self.validate_structure()?;
        if self.categories.is_empty() {
            return Err(TreeError::Invariant("tree has no categories".into()));
        }
        for path in self.leaf_paths() {
            let leaf = self.node(&path).expect("leaf");
            if leaf.templates.is_empty() {
                return Err(TreeError::Invariant(format!("leaf `{}` has no templates", leaf.name)));
            }
            for t in &leaf.templates {
                t.check()?;
            }
        }
        Ok(())
    }

    /// Nested name list used inside the judge prompt.
    pub fn render_outline(&self) -> String {
        fn walk(nodes: &[TreeNode], depth: usize, out: &mut String) {
            for n in nodes {
                out.push_str(&"  ".repeat(depth));
                out.push_str("- ");
                out.push_str(&n.name);
                out.push('\n');
                walk(&n.children, depth + 1, out);
            }
        }
        let mut out = String::new();
        walk(&self.categories, 0, &mut out);
        out.pop();
        out
    }

    /// Dictionary form (`{"name": {... "leaf": "<END>"}}`) with three-space
    /// indentation, as shown to the curator for horizontal expansion.
    pub fn to_route_dictionary(&self) -> String {
        fn walk(nodes: &[TreeNode], depth: usize, out: &mut String) {
            let pad = "   ".repeat(depth + 1);
            for (i, n) in nodes.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&serde_json::to_string(&n.name).expect("string"));
                out.push_str(": ");
                if n.is_leaf() {
                    out.push_str(&serde_json::to_string(END_MARKER).expect("string"));
                } else {
                    out.push_str("{\n");
                    walk(&n.children, depth + 1, out);
                    out.push_str(&pad);
                    out.push('}');
                }
                if i + 1 < nodes.len() {
                    out.push(',');
                }
                out.push('\n');
            }
        }
        let mut out = String::from("{\n");
        walk(&self.categories, 0, &mut out);
        out.push('}');
        out
    }

    /// Parses the dictionary form into a template-free tree skeleton.
    pub fn from_route_dictionary(text: &str) -> Result<Self, TreeError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| TreeError::CorruptTreeFile(e.to_string()))?;
        fn build(map: &serde_json::Map<String, serde_json::Value>) -> Result<Vec<TreeNode>, TreeError> {
            let mut nodes = Vec::with_capacity(map.len());
            for (k, v) in map {
                let name = normalize_name(k);
                let children = match v {
                    serde_json::Value::String(s) if s == END_MARKER => Vec::new(),
                    serde_json::Value::Object(m) if !m.is_empty() => build(m)?,
                    _ => {
                        return Err(TreeError::CorruptTreeFile(format!(
                            "node `{k}` must map to \"<END>\" or a nonempty object"
                        )))
                    }
                };
                nodes.push(TreeNode {
                    name,
                    children,
                    templates: Vec::new(),
                });
            }
            Ok(nodes)
        }
        let map = value
            .as_object()
            .ok_or_else(|| TreeError::CorruptTreeFile("expected a JSON object".into()))?;
        let tree = TemplateTree {
            categories: build(map)?,
            next_template_id: 1,
            version: 0,
        };
        tree.validate_structure()
            .map_err(|e| TreeError::CorruptTreeFile(e.to_string()))?;
        Ok(tree)
    }

    /// Hierarchy listing with per-leaf template counts.
    pub fn inspect(&self) -> String {
        fn walk(nodes: &[TreeNode], depth: usize, out: &mut String) {
            for n in nodes {
                out.push_str(&"  ".repeat(depth));
                if n.is_leaf() {
                    let curated = n.templates.iter().filter(|t| t.source == TemplateSource::Curated).count();
                    out.push_str(&format!(
                        "{} [{} templates, {} curated]\n",
                        n.name,
                        n.templates.len(),
                        curated
                    ));
                } else {
                    out.push_str(&format!("{}/\n", n.name));
                    walk(&n.children, depth + 1, out);
                }
            }
        }
        let mut out = format!(
            "template tree (version {}, {} leaves, {} templates, depth {})\n",
            self.version,
            self.leaf_count(),
            self.template_count(),
            self.depth()
        );
        walk(&self.categories, 1, &mut out);
        out
    }

    pub fn to_json(&self) -> String {
        let file = TreeFile {
            schema: SCHEMA_TAG.to_string(),
            version: self.version,
            next_template_id: self.next_template_id,
            categories: self.categories.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("tree serializes");
        s.push('\n');
        s
    }

    /// Accepts the versioned file format or a bare route dictionary.
    pub fn from_json(text: &str) -> Result<Self, TreeError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| TreeError::CorruptTreeFile(e.to_string()))?;
        let Some(schema) = value.get("schema") else {
            return Self::from_route_dictionary(text);
        };
        if schema.as_str() != Some(SCHEMA_TAG) {
            return Err(TreeError::CorruptTreeFile(format!("unsupported schema {schema}")));
        }
        let file: TreeFile = serde_json::from_value(value).map_err(|e| TreeError::CorruptTreeFile(e.to_string()))?;
        let tree = TemplateTree {
            categories: file.categories,
            next_template_id: file.next_template_id,
            version: file.version,
        };
        tree.validate_structure()
            .map_err(|e| TreeError::CorruptTreeFile(e.to_string()))?;
        Ok(tree)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TreeError> {
        std::fs::write(path, self.to_json()).map_err(|e| TreeError::Io(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TreeError> {
        let text = std::fs::read_to_string(path).map_err(|e| TreeError::Io(e.to_string()))?;
        Self::from_json(&text)
    }
}

fn checked_name(raw: &str) -> Result<String, TreeError> {
    let name = normalize_name(raw);
    if name.is_empty() || name.contains(['<', '>']) || name == "random" {
        return Err(TreeError::InvalidName(raw.to_string()));
    }
    Ok(name)
}
