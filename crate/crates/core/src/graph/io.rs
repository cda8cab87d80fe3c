use serde::{Deserialize, Serialize};

use super::{ColoredGraph, GraphBuilder, GraphError};

fn default_true() -> bool {
    true
}

fn default_edge_color() -> String {
    "non-edge".to_string()
}

fn default_loop_color() -> String {
    "vertex".to_string()
}

/// On-disk graph format. Edges are `[u, v]` or `[u, v, color]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<String>,
    #[serde(default = "default_true")]
    pub undirected: bool,
    #[serde(default = "default_edge_color")]
    pub default_color: String,
    #[serde(default = "default_loop_color")]
    pub loop_color: String,
    #[serde(default)]
    pub edges: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loops: Option<Vec<Vec<String>>>,
}

impl GraphFile {
    pub fn to_graph(&self) -> Result<ColoredGraph, GraphError> {
        let mut b = GraphBuilder::new(&self.default_color, &self.loop_color);
        for v in &self.vertices {
            b.add_vertex(v)?;
        }
        for e in &self.edges {
            match e.as_slice() {
                [u, v] => b.add_edge(u, v, "edge", self.undirected)?,
                [u, v, c] => b.add_edge(u, v, c, self.undirected)?,
                _ => return Err(GraphError::BadEdgeEntry(e.clone())),
            }
        }
        for l in self.loops.iter().flatten() {
            match l.as_slice() {
                [v, c] => b.set_loop(v, c)?,
                _ => return Err(GraphError::BadLoopEntry(l.clone())),
            }
        }
        b.build()
    }

    pub fn from_graph(g: &ColoredGraph) -> Self {
        let undirected = g.is_symmetric();
        let n = g.n();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u == v || (undirected && v < u) {
                    continue;
                }
                let c = g.color_name(g.color(u, v));
                if c != g.default_color() {
                    edges.push(vec![g.vertex_name(u).to_string(), g.vertex_name(v).to_string(), c.to_string()]);
                }
            }
        }
        let loops: Vec<Vec<String>> = (0..n)
            .filter(|&v| g.color_name(g.color(v, v)) != g.loop_color())
            .map(|v| vec![g.vertex_name(v).to_string(), g.color_name(g.color(v, v)).to_string()])
            .collect();
        GraphFile {
            vertices: g.vertex_names().to_vec(),
            undirected,
            default_color: g.default_color().to_string(),
            loop_color: g.loop_color().to_string(),
            edges,
            loops: if loops.is_empty() { None } else { Some(loops) },
        }
    }
}

pub fn load_graph(text: &str) -> Result<ColoredGraph, GraphError> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
    file.to_graph()
}

pub fn save_graph(g: &ColoredGraph) -> String {
    serde_json::to_string_pretty(&GraphFile::from_graph(g)).expect("graph file serializes")
}
