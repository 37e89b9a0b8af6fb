//! The reference DAG: a set of configurations merged into one weighted
//! layered graph.
//!
//! Each configuration contributes the path `<start> t_1 … t_n <end>`. Nodes
//! are identified by `(token, depth)` where depth is the position in that
//! wrapped path, so every edge goes from depth `d` to `d + 1` and the graph
//! is acyclic by construction. Edges traversed by several configurations
//! are merged and carry the traversal count as their weight.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::config::{self, CircosConfig, Token};

/// Cap on barycenter sweep iterations.
const MAX_SWEEPS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DagError {
    #[error("no configurations to build from")]
    EmptyInput,
    #[error("node `{0}` not found")]
    NodeNotFound(String),
    #[error("node `{0}` is not reachable from <start>")]
    Unreachable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeClass {
    Current,
    Recommended,
    #[default]
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DagNode {
    pub token: Token,
    pub depth: usize,
    /// Ids of configurations passing through this node, first-seen order.
    pub provenance: Vec<String>,
}

impl DagNode {
    /// Stable textual id, `"{depth}:{token}"`.
    pub fn key(&self) -> String {
        node_key(self.token, self.depth)
    }
}

fn node_key(token: Token, depth: usize) -> String {
    format!("{depth}:{}", token.name())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DagEdge {
    pub from: usize,
    pub to: usize,
    pub weight: u32,
    pub class: EdgeClass,
    pub provenance: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDag {
    nodes: Vec<DagNode>,
    edges: Vec<DagEdge>,
    layers: Vec<Vec<usize>>,
    node_index: HashMap<(Token, usize), usize>,
    edge_index: HashMap<(usize, usize), usize>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl ReferenceDag {
    /// Merges the wrapped token paths of `configs`.
    pub fn build<'a, I>(configs: I) -> Result<ReferenceDag, DagError>
    where
        I: IntoIterator<Item = (&'a str, &'a CircosConfig)>,
    {
        let mut dag = ReferenceDag {
            nodes: Vec::new(),
            edges: Vec::new(),
            layers: Vec::new(),
            node_index: HashMap::new(),
            edge_index: HashMap::new(),
            out_edges: Vec::new(),
            in_edges: Vec::new(),
        };
        let mut any = false;
        for (id, config) in configs {
            any = true;
            let mut prev: Option<usize> = None;
            for (depth, token) in config.wrapped_tokens().into_iter().enumerate() {
                let node = dag.intern(token, depth, id);
                if let Some(from) = prev {
                    dag.add_traversal(from, node, id);
                }
                prev = Some(node);
            }
        }
        if !any {
            return Err(DagError::EmptyInput);
        }
        Ok(dag)
    }

    fn intern(&mut self, token: Token, depth: usize, id: &str) -> usize {
        let idx = match self.node_index.get(&(token, depth)) {
            Some(&i) => i,
            None => {
                let i = self.nodes.len();
                self.nodes.push(DagNode { token, depth, provenance: Vec::new() });
                self.node_index.insert((token, depth), i);
                self.out_edges.push(Vec::new());
                self.in_edges.push(Vec::new());
                if self.layers.len() <= depth {
                    self.layers.resize(depth + 1, Vec::new());
                }
                self.layers[depth].push(i);
                i
            }
        };
        let prov = &mut self.nodes[idx].provenance;
        if !prov.iter().any(|p| p == id) {
            prov.push(id.to_string());
        }
        idx
    }

    fn add_traversal(&mut self, from: usize, to: usize, id: &str) {
        let e = match self.edge_index.get(&(from, to)) {
            Some(&e) => e,
            None => {
                let e = self.edges.len();
                self.edges.push(DagEdge { from, to, weight: 0, class: EdgeClass::Other, provenance: Vec::new() });
                self.edge_index.insert((from, to), e);
                self.out_edges[from].push(e);
                self.in_edges[to].push(e);
                e
            }
        };
        let edge = &mut self.edges[e];
        edge.weight += 1;
        if !edge.provenance.iter().any(|p| p == id) {
            edge.provenance.push(id.to_string());
        }
    }

    pub fn nodes(&self) -> &[DagNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[DagEdge] {
        &self.edges
    }

    /// Node indices grouped by depth, in first-seen order.
    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    pub fn start(&self) -> usize {
        0
    }

    pub fn node(&self, token: Token, depth: usize) -> Option<usize> {
        self.node_index.get(&(token, depth)).copied()
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<usize> {
        self.edge_index.get(&(from, to)).copied()
    }

    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out_edges[node]
    }

    pub fn in_edges(&self, node: usize) -> &[usize] {
        &self.in_edges[node]
    }

    /// Resolves a `"{depth}:{token}"` key.
    pub fn find(&self, key: &str) -> Result<usize, DagError> {
        let not_found = || DagError::NodeNotFound(key.to_string());
        let (depth, name) = key.split_once(':').ok_or_else(not_found)?;
        let depth: usize = depth.trim().parse().map_err(|_| not_found())?;
        let token = Token::from_name(name.trim()).ok_or_else(not_found)?;
        self.node(token, depth).ok_or_else(not_found)
    }

    /// Edges of `config`'s wrapped path that exist in this graph.
    pub fn path_edges(&self, config: &CircosConfig) -> Vec<usize> {
        let nodes: Vec<Option<usize>> =
            config.wrapped_tokens().into_iter().enumerate().map(|(d, t)| self.node(t, d)).collect();
        nodes
            .windows(2)
            .filter_map(|w| match (w[0], w[1]) {
                (Some(a), Some(b)) => self.edge(a, b),
                _ => None,
            })
            .collect()
    }

    /// Marks edges of the current path `Current`, remaining edges of the
    /// recommended path `Recommended`, and everything else `Other`.
    pub fn classify_edges(&mut self, current: Option<&CircosConfig>, recommended: Option<&CircosConfig>) {
        for e in &mut self.edges {
            e.class = EdgeClass::Other;
        }
        if let Some(rec) = recommended {
            for e in self.path_edges(rec) {
                self.edges[e].class = EdgeClass::Recommended;
            }
        }
        if let Some(cur) = current {
            for e in self.path_edges(cur) {
                self.edges[e].class = EdgeClass::Current;
            }
        }
    }

    /// Nodes from which `target` can be reached, including itself.
    fn ancestors(&self, target: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([target]);
        seen[target] = true;
        while let Some(n) = queue.pop_front() {
            for &e in &self.in_edges[n] {
                let from = self.edges[e].from;
                if !seen[from] {
                    seen[from] = true;
                    queue.push_back(from);
                }
            }
        }
        seen
    }

    /// Builds the configuration for a `<start>` → `clicked` path.
    ///
    /// At every step the outgoing edge is chosen among those that can still
    /// reach `clicked`, preferring in order: an edge of the current
    /// configuration, an edge of the recommended configuration, the highest
    /// weight, then the lowest token name. A trailing `<split>` or `<end>`
    /// is dropped from the result.
    pub fn complete_path(
        &self,
        clicked: usize,
        current: Option<&CircosConfig>,
        recommended: Option<&CircosConfig>,
    ) -> Result<CircosConfig, DagError> {
        if clicked >= self.nodes.len() {
            return Err(DagError::NodeNotFound(clicked.to_string()));
        }
        let reach = self.ancestors(clicked);
        let start = self.start();
        if !reach[start] {
            return Err(DagError::Unreachable(self.nodes[clicked].key()));
        }
        let on_current: HashSet<usize> = current.map(|c| self.path_edges(c)).unwrap_or_default().into_iter().collect();
        let on_recommended: HashSet<usize> =
            recommended.map(|c| self.path_edges(c)).unwrap_or_default().into_iter().collect();

        let mut tokens = Vec::new();
        let mut at = start;
        while at != clicked {
            let best = self.out_edges[at]
                .iter()
                .copied()
                .filter(|&e| reach[self.edges[e].to])
                .min_by(|&a, &b| {
                    let (ea, eb) = (&self.edges[a], &self.edges[b]);
                    on_current
                        .contains(&b)
                        .cmp(&on_current.contains(&a))
                        .then(on_recommended.contains(&b).cmp(&on_recommended.contains(&a)))
                        .then(eb.weight.cmp(&ea.weight))
                        .then(self.nodes[ea.to].token.name().cmp(self.nodes[eb.to].token.name()))
                })
                .ok_or_else(|| DagError::Unreachable(self.nodes[clicked].key()))?;
            at = self.edges[best].to;
            tokens.push(self.nodes[at].token);
        }
        if tokens.last() == Some(&Token::End) {
            tokens.pop();
        }
        if tokens.last() == Some(&Token::Split) {
            tokens.pop();
        }
        Ok(config::from_sequence(&tokens).expect("DAG paths are valid token sequences"))
    }

    /// Graphviz rendering for debugging.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph reference {\n  rankdir=TB;\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  \"{}\" [label=\"{}\"];", n.key(), n.token.name());
        }
        for e in &self.edges {
            let color = match e.class {
                EdgeClass::Current => "green",
                EdgeClass::Recommended => "blue",
                EdgeClass::Other => "gray",
            };
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}\", penwidth={}, color={}];",
                self.nodes[e.from].key(),
                self.nodes[e.to].key(),
                e.weight,
                e.weight,
                color
            );
        }
        out.push_str("}\n");
        out
    }

    pub fn export(&self, layout: &DagLayout) -> DagExport {
        DagExport {
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| ExportNode {
                    id: n.key(),
                    token: n.token.name(),
                    depth: n.depth,
                    layer: layout.positions[i].layer,
                    x: layout.positions[i].x,
                    provenance: n.provenance.clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| ExportEdge {
                    from: self.nodes[e.from].key(),
                    to: self.nodes[e.to].key(),
                    weight: e.weight,
                    class: e.class,
                    provenance: e.provenance.clone(),
                })
                .collect(),
            crossings: layout.crossings,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodePosition {
    pub layer: usize,
    pub x: f64,
}

/// Layered coordinates. `order[l]` lists layer `l`'s nodes left to right;
/// `positions` is indexed by node.
#[derive(Debug, Clone, PartialEq)]
pub struct DagLayout {
    pub order: Vec<Vec<usize>>,
    pub positions: Vec<NodePosition>,
    pub initial_crossings: usize,
    pub crossings: usize,
}

/// Edge crossings between consecutive layers for a given ordering.
pub fn count_crossings(dag: &ReferenceDag, order: &[Vec<usize>]) -> usize {
    let mut pos = vec![0usize; dag.nodes.len()];
    for layer in order {
        for (i, &n) in layer.iter().enumerate() {
            pos[n] = i;
        }
    }
    let mut total = 0;
    for layer in order.iter().take(order.len().saturating_sub(1)) {
        let mut spans: Vec<(usize, usize)> = layer
            .iter()
            .flat_map(|&n| {
                let pos = &pos;
                dag.out_edges[n].iter().map(move |&e| (pos[n], pos[dag.edges[e].to]))
            })
            .collect();
        spans.sort_unstable();
        for i in 0..spans.len() {
            for j in i + 1..spans.len() {
                if spans[i].0 < spans[j].0 && spans[i].1 > spans[j].1 {
                    total += 1;
                }
            }
        }
    }
    total
}

/// Layer assignment by depth, then barycenter crossing reduction.
///
/// Sweeps alternate downward (ordering by mean predecessor position) and
/// upward (mean successor position); equal barycenters fall back to token
/// name then first provenance id. Iteration stops when a down/up pair no
/// longer lowers the crossing count or after [`MAX_SWEEPS`] pairs, and the
/// best ordering seen is kept.
pub fn layout(dag: &ReferenceDag) -> DagLayout {
    let mut order: Vec<Vec<usize>> = dag.layers.clone();
    let initial = count_crossings(dag, &order);
    let mut best = order.clone();
    let mut best_crossings = initial;

    for _ in 0..MAX_SWEEPS {
        if best_crossings == 0 {
            break;
        }
        sweep(dag, &mut order, true);
        sweep(dag, &mut order, false);
        let c = count_crossings(dag, &order);
        if c < best_crossings {
            best_crossings = c;
            best = order.clone();
        } else {
            break;
        }
    }

    let mut positions = vec![NodePosition { layer: 0, x: 0.0 }; dag.nodes.len()];
    for (l, layer) in best.iter().enumerate() {
        for (i, &n) in layer.iter().enumerate() {
            positions[n] = NodePosition { layer: l, x: i as f64 };
        }
    }
    DagLayout { order: best, positions, initial_crossings: initial, crossings: best_crossings }
}

fn sweep(dag: &ReferenceDag, order: &mut [Vec<usize>], down: bool) {
    let mut pos = vec![0f64; dag.nodes.len()];
    for layer in order.iter() {
        for (i, &n) in layer.iter().enumerate() {
            pos[n] = i as f64;
        }
    }
    let layer_ids: Vec<usize> =
        if down { (1..order.len()).collect() } else { (0..order.len().saturating_sub(1)).rev().collect() };
    for l in layer_ids {
        let mut keyed: Vec<(f64, usize)> = order[l]
            .iter()
            .map(|&n| {
                let neighbours: Vec<usize> = if down {
                    dag.in_edges[n].iter().map(|&e| dag.edges[e].from).collect()
                } else {
                    dag.out_edges[n].iter().map(|&e| dag.edges[e].to).collect()
                };
                let bary = if neighbours.is_empty() {
                    pos[n]
                } else {
                    neighbours.iter().map(|&m| pos[m]).sum::<f64>() / neighbours.len() as f64
                };
                (bary, n)
            })
            .collect();
        keyed.sort_by(|a, b| {
            let (na, nb) = (&dag.nodes[a.1], &dag.nodes[b.1]);
            a.0.total_cmp(&b.0)
                .then_with(|| na.token.name().cmp(nb.token.name()))
                .then_with(|| na.provenance.first().cmp(&nb.provenance.first()))
        });
        order[l] = keyed.into_iter().map(|(_, n)| n).collect();
        for (i, &n) in order[l].iter().enumerate() {
            pos[n] = i as f64;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExportNode {
    pub id: String,
    pub token: &'static str,
    pub depth: usize,
    pub layer: usize,
    pub x: f64,
    pub provenance: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExportEdge {
    pub from: String,
    pub to: String,
    pub weight: u32,
    pub class: EdgeClass,
    pub provenance: Vec<String>,
}

/// JSON shape consumed by the reference panel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DagExport {
    pub nodes: Vec<ExportNode>,
    pub edges: Vec<ExportEdge>,
    pub crossings: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse;

    fn build(cfgs: &[(&str, &str)]) -> ReferenceDag {
        let parsed: Vec<(String, CircosConfig)> =
            cfgs.iter().map(|(id, c)| (id.to_string(), parse(c).unwrap())).collect();
        ReferenceDag::build(parsed.iter().map(|(id, c)| (id.as_str(), c))).unwrap()
    }

    fn branch() -> ReferenceDag {
        build(&[("a", "<ideogram><split><chord>"), ("b", "<ideogram><split><line>")])
    }

    #[test]
    fn single_config() {
        let dag = build(&[("a", "<ideogram><split><chord>")]);
        let keys: Vec<_> = dag.nodes().iter().map(|n| n.key()).collect();
        assert_eq!(keys, ["0:start", "1:ideogram", "2:split", "3:chord", "4:end"]);
        assert_eq!(dag.edges().len(), 4);
        assert!(dag.edges().iter().all(|e| e.weight == 1));
    }

    #[test]
    fn identical_configs_accumulate() {
        let dag = build(&[("a", "<ideogram><split><chord>"), ("b", "<ideogram><split><chord>")]);
        assert_eq!(dag.nodes().len(), 5);
        assert_eq!(dag.edges().len(), 4);
        assert!(dag.edges().iter().all(|e| e.weight == 2 && e.provenance == ["a", "b"]));
    }

    #[test]
    fn branch_shares_prefix_and_end() {
        let dag = branch();
        assert_eq!(dag.nodes().len(), 6);
        let w = |a: &str, b: &str| dag.edges()[dag.edge(dag.find(a).unwrap(), dag.find(b).unwrap()).unwrap()].weight;
        assert_eq!(w("0:start", "1:ideogram"), 2);
        assert_eq!(w("1:ideogram", "2:split"), 2);
        assert_eq!(w("2:split", "3:chord"), 1);
        assert_eq!(w("2:split", "3:line"), 1);
        let end = dag.find("4:end").unwrap();
        assert_eq!(dag.in_edges(end).len(), 2);
    }

    #[test]
    fn empty_input() {
        assert_eq!(ReferenceDag::build(std::iter::empty()).unwrap_err(), DagError::EmptyInput);
    }

    #[test]
    fn find_rejects_unknown_keys() {
        let dag = branch();
        assert!(dag.find("3:line").is_ok());
        for bad in ["3:tile", "x:line", "line", "9:end"] {
            assert_eq!(dag.find(bad), Err(DagError::NodeNotFound(bad.into())));
        }
    }

    #[test]
    fn chain_layout_has_no_crossings() {
        let dag = build(&[("a", "<ideogram><split><histogram><split><chord>")]);
        let l = layout(&dag);
        assert!(l.order.iter().all(|layer| layer.len() == 1));
        assert_eq!(l.crossings, 0);
    }

    #[test]
    fn branch_layout_zero_crossings() {
        let l = layout(&branch());
        assert_eq!(l.crossings, 0);
        for layer in &l.order {
            for w in layer.windows(2) {
                assert!(l.positions[w[0]].x < l.positions[w[1]].x);
            }
        }
    }

    #[test]
    fn barycenter_untangles_a_cross() {
        // depth-3 order after build is [line, tile]; depth-5 is [tile(from line), line(from tile)]
        let dag = build(&[
            ("a", "<ideogram><split><line><split><tile>"),
            ("b", "<ideogram><split><tile><split><line>"),
            ("c", "<ideogram><split><line><split><tile><split><chord>"),
            ("d", "<ideogram><split><tile><split><scatter><split><chord>"),
        ]);
        let l = layout(&dag);
        assert!(l.crossings <= l.initial_crossings);
    }

    #[test]
    fn classification_precedence() {
        let mut dag = branch();
        let cur = parse("<ideogram><split><chord>").unwrap();
        let rec = parse("<ideogram><split><line>").unwrap();
        dag.classify_edges(Some(&cur), Some(&rec));
        fn class(dag: &ReferenceDag, a: &str, b: &str) -> EdgeClass {
            dag.edges()[dag.edge(dag.find(a).unwrap(), dag.find(b).unwrap()).unwrap()].class
        }
        assert_eq!(class(&dag, "0:start", "1:ideogram"), EdgeClass::Current);
        assert_eq!(class(&dag, "2:split", "3:chord"), EdgeClass::Current);
        assert_eq!(class(&dag, "2:split", "3:line"), EdgeClass::Recommended);
        assert_eq!(class(&dag, "3:line", "4:end"), EdgeClass::Recommended);

        dag.classify_edges(None, Some(&rec));
        let counts = dag.edges().iter().filter(|e| e.class == EdgeClass::Recommended).count();
        assert_eq!(counts, 4);
        assert_eq!(class(&dag, "2:split", "3:chord"), EdgeClass::Other);

        dag.classify_edges(None, None);
        assert!(dag.edges().iter().all(|e| e.class == EdgeClass::Other));
    }

    #[test]
    fn complete_single_config() {
        let dag = build(&[("a", "<ideogram><highlight><split><chord>")]);
        let end = dag.find("5:end").unwrap();
        assert_eq!(dag.complete_path(end, None, None).unwrap().to_bare_string(), "<ideogram><highlight><split><chord>");
    }

    #[test]
    fn complete_preserves_current_prefix() {
        let dag = branch();
        let cur = parse("<ideogram><split><chord>").unwrap();
        let line = dag.find("3:line").unwrap();
        assert_eq!(dag.complete_path(line, Some(&cur), None).unwrap().to_bare_string(), "<ideogram><split><line>");
    }

    #[test]
    fn complete_tie_breaks_by_token_name() {
        let dag = branch();
        let end = dag.find("4:end").unwrap();
        assert_eq!(dag.complete_path(end, None, None).unwrap().to_bare_string(), "<ideogram><split><chord>");
        let rec = parse("<ideogram><split><line>").unwrap();
        assert_eq!(dag.complete_path(end, None, Some(&rec)).unwrap().to_bare_string(), "<ideogram><split><line>");
    }

    #[test]
    fn complete_prefers_weight() {
        let dag = build(&[
            ("a", "<ideogram><split><line>"),
            ("b", "<ideogram><split><tile>"),
            ("c", "<ideogram><split><tile>"),
        ]);
        let end = dag.find("4:end").unwrap();
        assert_eq!(dag.complete_path(end, None, None).unwrap().to_bare_string(), "<ideogram><split><tile>");
    }

    #[test]
    fn complete_at_split_and_start() {
        let dag = branch();
        let split = dag.find("2:split").unwrap();
        assert_eq!(dag.complete_path(split, None, None).unwrap().to_bare_string(), "<ideogram>");
        assert!(dag.complete_path(dag.start(), None, None).unwrap().is_empty());
        assert!(matches!(dag.complete_path(99, None, None), Err(DagError::NodeNotFound(_))));
    }

    #[test]
    fn path_edges_ignore_missing() {
        let dag = branch();
        let other = parse("<ideogram><split><tile>").unwrap();
        assert_eq!(dag.path_edges(&other).len(), 2);
    }

    #[test]
    fn export_and_dot() {
        let mut dag = branch();
        dag.classify_edges(Some(&parse("<ideogram><split><chord>").unwrap()), None);
        let l = layout(&dag);
        let ex = dag.export(&l);
        assert_eq!(ex.nodes.len(), 6);
        let json = serde_json::to_value(&ex).unwrap();
        assert_eq!(json["edges"][0]["class"], "current");
        assert_eq!(json["nodes"][0]["id"], "0:start");
        let dot = dag.to_dot();
        assert!(dot.contains("\"2:split\" -> \"3:chord\""));
        assert!(dot.contains("color=green"));
    }
}
