//! Side-by-side comparison of refinement operators and proof systems on
//! one graph.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use algiso::field::FieldSpec;
use algiso::graph::{atomic_type_partition, brute_force_orbits, save_graph, ColoredGraph, ORBIT_ORACLE_LIMIT};
use algiso::partition::{LabelledPartition, PartitionFile, PartitionOrder};
use algiso::poly::{calculus_equiv_partition, Calculus, EngineOptions, EquivOptions};
use algiso::refine::{fixed_point, OperatorSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Partitions with more tuples than this are summarized by class counts.
pub const DEFAULT_EMBED_LIMIT: usize = 10_000;

#[derive(Debug, Clone)]
pub struct CompareConfig {
    pub widths: Vec<usize>,
    pub degrees: Vec<usize>,
    pub characteristics: Vec<u64>,
    pub calculi: Vec<Calculus>,
    pub engine: EngineOptions,
    pub jobs: usize,
    pub embed_limit: usize,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            widths: vec![2],
            degrees: vec![2],
            characteristics: vec![0],
            calculi: Calculus::ALL.to_vec(),
            engine: EngineOptions::default(),
            jobs: 1,
            embed_limit: DEFAULT_EMBED_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Counting,
    Sol,
    Calculus,
    Orbits,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodDescriptor {
    pub id: String,
    pub kind: MethodKind,
    /// Width of the compared tuples.
    pub width: usize,
    /// Width the operator runs at; wider fixed points are projected.
    pub operator_width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calculus: Option<Calculus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub characteristic: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    GuardExceeded,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub method: String,
    pub status: CellStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionFile>,
}

/// How the row method relates to the column method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    /// The row method separates everything the column method does.
    Refines,
    Coarsens,
    Incomparable,
}

impl From<PartitionOrder> for Relation {
    fn from(o: PartitionOrder) -> Self {
        match o {
            PartitionOrder::Equal => Relation::Equal,
            PartitionOrder::FirstCoarser => Relation::Coarsens,
            PartitionOrder::SecondCoarser => Relation::Refines,
            PartitionOrder::Incomparable => Relation::Incomparable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessPair {
    pub separated_by: String,
    pub not_separated_by: String,
    pub pair: [Vec<String>; 2],
}

/// Whether NC ⇒ MC ⇒ PC holds for the separations at one degree and field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub degree: usize,
    pub characteristic: u64,
    pub nc_within_mc: Option<bool>,
    pub mc_within_pc: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidthSection {
    pub width: usize,
    pub tuples: usize,
    pub methods: Vec<MethodDescriptor>,
    pub cells: Vec<Cell>,
    /// `order[i][j]` relates method `i` to method `j`; null when either cell failed.
    pub order: Vec<Vec<Option<Relation>>>,
    pub witnesses: Vec<WitnessPair>,
    pub chain: Vec<ChainEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    /// SHA-256 of the graph in its saved JSON form.
    pub digest: String,
    pub vertices: usize,
    pub colors: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub graph: GraphSummary,
    pub sections: Vec<WidthSection>,
}

impl ComparisonReport {
    pub fn guard_exceeded(&self) -> bool {
        self.sections.iter().flat_map(|s| &s.cells).any(|c| c.status == CellStatus::GuardExceeded)
    }

    /// Recomputes every order entry between embedded partitions and
    /// compares it with the stored matrix. Sections without embedded
    /// partitions are skipped.
    pub fn order_consistent(&self, g: &ColoredGraph) -> CliResult<bool> {
        for s in &self.sections {
            let parts: Vec<Option<LabelledPartition>> = s
                .cells
                .iter()
                .map(|c| c.partition.as_ref().map(|f| LabelledPartition::from_file(g, f)).transpose())
                .collect::<Result<_, _>>()?;
            for (i, a) in parts.iter().enumerate() {
                for (j, b) in parts.iter().enumerate() {
                    if let (Some(a), Some(b)) = (a, b) {
                        if s.order[i][j] != Some(a.compare(b)?.into()) {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }

    /// Human-readable summary: one line per method, then the order matrix.
    pub fn table(&self) -> String {
        let mut out = format!("graph {} ({} vertices)\n", &self.graph.digest[..12], self.graph.vertices);
        for s in &self.sections {
            out.push_str(&format!("width {} ({} tuples)\n", s.width, s.tuples));
            let w = s.methods.iter().map(|m| m.id.len()).max().unwrap_or(0);
            for (i, (m, c)) in s.methods.iter().zip(&s.cells).enumerate() {
                let classes = c.classes.map_or_else(|| format!("{:?}", c.status), |n| n.to_string());
                let row: String = s.order[i]
                    .iter()
                    .map(|r| match r {
                        Some(Relation::Equal) => '=',
                        Some(Relation::Refines) => '>',
                        Some(Relation::Coarsens) => '<',
                        Some(Relation::Incomparable) => '~',
                        None => '?',
                    })
                    .collect();
                out.push_str(&format!("  {:w$}  {:>8}  {row}\n", m.id, classes));
            }
        }
        out
    }
}

fn digest(g: &ColoredGraph) -> String {
    Sha256::digest(save_graph(g).as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Fixed point of `op` built at `width >= k`, read on `V^k`.
fn refinement(
    g: &ColoredGraph,
    k: usize,
    width: usize,
    op: Result<OperatorSpec, algiso::refine::RefineError>,
) -> CliResult<LabelledPartition> {
    let op = op?;
    let fp = fixed_point(&op, &atomic_type_partition(g, width)?)?.partition;
    Ok(if width == k { fp } else { fp.project(k)? })
}

fn field(c: u64) -> CliResult<FieldSpec> {
    Ok(FieldSpec::new(c)?)
}

fn methods_for(g: &ColoredGraph, k: usize, cfg: &CompareConfig) -> Vec<MethodDescriptor> {
    let mut out = vec![MethodDescriptor {
        id: "counting".into(),
        kind: MethodKind::Counting,
        width: k,
        operator_width: k.max(2),
        calculus: None,
        degree: None,
        characteristic: None,
    }];
    for &c in &cfg.characteristics {
        out.push(MethodDescriptor {
            id: format!("sol/{c}"),
            kind: MethodKind::Sol,
            width: k,
            // Sol_{2,1} substitutes both positions and never splits a class.
            operator_width: k.max(3),
            calculus: None,
            degree: None,
            characteristic: Some(c),
        });
    }
    for &d in &cfg.degrees {
        for &c in &cfg.characteristics {
            for &calc in &cfg.calculi {
                out.push(MethodDescriptor {
                    id: format!("{}{d}/{c}", calc.name()),
                    kind: MethodKind::Calculus,
                    width: k,
                    operator_width: k,
                    calculus: Some(calc),
                    degree: Some(d),
                    characteristic: Some(c),
                });
            }
        }
    }
    if g.n() <= ORBIT_ORACLE_LIMIT {
        out.push(MethodDescriptor {
            id: "orbits".into(),
            kind: MethodKind::Orbits,
            width: k,
            operator_width: k,
            calculus: None,
            degree: None,
            characteristic: None,
        });
    }
    out
}

fn compute(g: &ColoredGraph, m: &MethodDescriptor, engine: EngineOptions) -> CliResult<LabelledPartition> {
    let (k, w) = (m.width, m.operator_width);
    match m.kind {
        MethodKind::Counting => refinement(g, k, w, OperatorSpec::counting(w, 1)),
        MethodKind::Sol => {
            let f = field(m.characteristic.expect("sol has a characteristic"))?;
            refinement(g, k, w, OperatorSpec::sol_combined(w, f))
        }
        MethodKind::Calculus => {
            let f = field(m.characteristic.expect("calculus has a characteristic"))?;
            let calc = m.calculus.expect("calculus method");
            let d = m.degree.expect("calculus has a degree");
            Ok(calculus_equiv_partition(g, k, calc, d, f, &EquivOptions { engine, jobs: 1 })?)
        }
        MethodKind::Orbits => Ok(brute_force_orbits(g, k, None)?),
    }
}

/// Lexicographically least pair of tuples that `sep` separates and `same`
/// keeps together.
fn least_witness(sep: &LabelledPartition, same: &LabelledPartition) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for class in same.classes() {
        // Scan from the back, remembering the earliest later member of
        // each of up to two distinct `sep` colors.
        let mut later: Vec<(u32, usize)> = Vec::with_capacity(2);
        let mut found = None;
        for &t in class.iter().rev() {
            let c = sep.color(t);
            if let Some(&(_, b)) = later.iter().filter(|(lc, _)| *lc != c).min_by_key(|(_, b)| *b) {
                found = Some((t, b));
            }
            match later.iter().position(|&(lc, _)| lc == c) {
                Some(i) => later[i].1 = t,
                None => {
                    // Keep the two colors with the earliest members.
                    later.push((c, t));
                    later.sort_by_key(|&(_, b)| b);
                    later.truncate(2);
                }
            }
        }
        if let Some(p) = found {
            best = Some(best.map_or(p, |b| b.min(p)));
        }
    }
    best
}

/// Runs every method for every width. Guard violations and other
/// per-method errors are recorded in the cell; all other cells are still
/// computed.
pub fn cmd_compare(g: &ColoredGraph, cfg: &CompareConfig) -> CliResult<ComparisonReport> {
    if cfg.widths.is_empty() {
        return Err(CliError::input("at least one width is required"));
    }
    for &c in &cfg.characteristics {
        field(c)?;
    }
    let mut sections = Vec::new();
    for &k in &cfg.widths {
        let tuples = algiso::graph::TupleIndex::new(g.n(), k)?.size();
        let methods = methods_for(g, k, cfg);
        let slots: Vec<Mutex<Option<CliResult<LabelledPartition>>>> =
            methods.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let worker = || loop {
            let i = next.fetch_add(1, Ordering::Relaxed);
            if i >= methods.len() {
                break;
            }
            let r = compute(g, &methods[i], cfg.engine);
            *slots[i].lock().expect("slot") = Some(r);
        };
        let jobs = cfg.jobs.clamp(1, methods.len().max(1));
        if jobs == 1 {
            worker();
        } else {
            std::thread::scope(|s| {
                for _ in 0..jobs {
                    s.spawn(worker);
                }
            });
        }
        let results: Vec<CliResult<LabelledPartition>> =
            slots.into_iter().map(|s| s.into_inner().expect("slot").expect("every method ran")).collect();

        let cells: Vec<Cell> = methods
            .iter()
            .zip(&results)
            .map(|(m, r)| match r {
                Ok(p) => Cell {
                    method: m.id.clone(),
                    status: CellStatus::Ok,
                    classes: Some(p.num_classes()),
                    message: None,
                    partition: (tuples <= cfg.embed_limit).then(|| p.to_file(g)),
                },
                Err(e) => Cell {
                    method: m.id.clone(),
                    status: if matches!(e, CliError::Guard(_)) { CellStatus::GuardExceeded } else { CellStatus::Error },
                    classes: None,
                    message: Some(e.to_string()),
                    partition: None,
                },
            })
            .collect();
        let parts: Vec<Option<&LabelledPartition>> = results.iter().map(|r| r.as_ref().ok()).collect();

        let order: Vec<Vec<Option<Relation>>> = parts
            .iter()
            .map(|a| {
                parts
                    .iter()
                    .map(|b| match (a, b) {
                        (Some(a), Some(b)) => a.compare(b).ok().map(Relation::from),
                        _ => None,
                    })
                    .collect()
            })
            .collect();

        let idx = algiso::graph::TupleIndex::new(g.n(), k)?;
        let mut witnesses = Vec::new();
        for (i, a) in parts.iter().enumerate() {
            for (j, b) in parts.iter().enumerate() {
                if let (true, Some(a), Some(b)) = (i != j, a, b) {
                    if let Some((x, y)) = least_witness(a, b) {
                        witnesses.push(WitnessPair {
                            separated_by: methods[i].id.clone(),
                            not_separated_by: methods[j].id.clone(),
                            pair: [g.tuple_names(&idx.unrank(x)), g.tuple_names(&idx.unrank(y))],
                        });
                    }
                }
            }
        }

        let find = |calc: Calculus, d: usize, c: u64| {
            methods
                .iter()
                .position(|m| m.calculus == Some(calc) && m.degree == Some(d) && m.characteristic == Some(c))
                .and_then(|i| parts[i])
        };
        let within = |a: Option<&LabelledPartition>, b: Option<&LabelledPartition>| match (a, b) {
            (Some(a), Some(b)) => a.is_refined_by(b).ok(),
            _ => None,
        };
        let mut chain = Vec::new();
        for &d in &cfg.degrees {
            for &c in &cfg.characteristics {
                let (nc, mc, pc) = (find(Calculus::Nc, d, c), find(Calculus::Mc, d, c), find(Calculus::Pc, d, c));
                chain.push(ChainEntry {
                    degree: d,
                    characteristic: c,
                    nc_within_mc: within(nc, mc),
                    mc_within_pc: within(mc, pc),
                });
            }
        }

        sections.push(WidthSection { width: k, tuples, methods, cells, order, witnesses, chain });
    }
    Ok(ComparisonReport {
        graph: GraphSummary { digest: digest(g), vertices: g.n(), colors: g.num_colors() },
        sections,
    })
}
