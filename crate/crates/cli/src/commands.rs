//! Thin wrappers over the library operations, producing serializable
//! outputs.

use std::path::Path;

use algiso::cfi::{cfi_build, cfi_family, BaseGraph, CfiSpec};
use algiso::field::{FieldElem, FieldSpec};
use algiso::graph::{atomic_type_partition, brute_force_orbits, load_graph, ColoredGraph, GraphFile, Vertex};
use algiso::partition::{LabelledPartition, PartitionFile};
use algiso::poly::{
    calculus_equiv_partition, refute, AxiomRef, AxiomSet, Calculus, EngineOptions, EngineStats, EquivOptions,
    Polynomial, Verdict,
};
use algiso::refine::{fixed_point, OperatorSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Flags shared by every command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Globals {
    pub characteristic: u64,
    pub jobs: usize,
    pub guard_monomials: Option<usize>,
    pub guard_rows: Option<usize>,
}

impl Default for Globals {
    fn default() -> Self {
        Globals { characteristic: 0, jobs: 1, guard_monomials: None, guard_rows: None }
    }
}

impl Globals {
    pub fn field(&self) -> CliResult<FieldSpec> {
        Ok(FieldSpec::new(self.characteristic)?)
    }

    pub fn engine(&self, witness: bool) -> EngineOptions {
        EngineOptions { max_monomials: self.guard_monomials, max_rows: self.guard_rows, witness }
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn read_graph(path: &Path) -> CliResult<ColoredGraph> {
    Ok(load_graph(&read_text(path)?)?)
}

pub fn read_partition(g: &ColoredGraph, path: &Path) -> CliResult<LabelledPartition> {
    let file: PartitionFile = serde_json::from_str(&read_text(path)?)?;
    Ok(LabelledPartition::from_file(g, &file)?)
}

pub fn cmd_orbits(g: &ColoredGraph, k: usize) -> CliResult<PartitionFile> {
    Ok(brute_force_orbits(g, k, None)?.to_file(g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorChoice {
    Counting,
    Sol,
}

impl std::str::FromStr for OperatorChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "counting" => Ok(OperatorChoice::Counting),
            "sol" => Ok(OperatorChoice::Sol),
            _ => Err(format!("unknown operator {s:?} (expected counting or sol)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefineOutput {
    #[serde(flatten)]
    pub partition: PartitionFile,
    pub operator: String,
    pub iterations: usize,
}

/// Fixed point of the chosen operator, started from `start` or from the
/// atomic-type partition.
pub fn cmd_refine(
    g: &ColoredGraph,
    k: usize,
    operator: OperatorChoice,
    r: usize,
    combined: bool,
    field: FieldSpec,
    start: Option<LabelledPartition>,
) -> CliResult<RefineOutput> {
    let (op, name) = match (operator, combined) {
        (OperatorChoice::Counting, false) => (OperatorSpec::counting(k, r)?, format!("counting(k={k},r={r})")),
        (OperatorChoice::Counting, true) => return Err(CliError::input("--combined applies only to sol")),
        (OperatorChoice::Sol, false) => (OperatorSpec::sol(k, r, field)?, format!("sol(k={k},r={r},char={field})")),
        (OperatorChoice::Sol, true) => {
            (OperatorSpec::sol_combined(k, field)?, format!("sol(k={k},combined,char={field})"))
        }
    };
    let start = match start {
        Some(p) if p.k() != k => {
            return Err(CliError::input(format!("start partition has width {}, expected {k}", p.k())));
        }
        Some(p) => p,
        None => atomic_type_partition(g, k)?,
    };
    let fp = fixed_point(&op, &start)?;
    Ok(RefineOutput { partition: fp.partition.to_file(g), operator: name, iterations: fp.iterations })
}

/// Parses `"a:b,c:d"` into the tuples `u = (a, c)` and `v = (b, d)`.
pub fn parse_map(g: &ColoredGraph, spec: &str) -> CliResult<(Vec<Vertex>, Vec<Vertex>)> {
    let mut u = Vec::new();
    let mut v = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (a, b) = item.split_once(':').ok_or_else(|| CliError::input(format!("bad map entry {item:?}")))?;
        let id =
            |name: &str| g.vertex_id(name.trim()).ok_or_else(|| CliError::input(format!("unknown vertex {name:?}")));
        u.push(id(a)?);
        v.push(id(b)?);
    }
    if u.is_empty() {
        return Err(CliError::input("empty map"));
    }
    Ok((u, v))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessTermOutput {
    pub coefficient: String,
    pub multiplier: String,
    pub axiom: String,
    pub polynomial: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefuteOutput {
    pub result: Verdict,
    pub calculus: Calculus,
    pub degree: usize,
    pub characteristic: u64,
    pub witness: Option<Vec<WitnessTermOutput>>,
    pub stats: EngineStats,
}

fn polynomial_name(ax: &AxiomSet, p: &Polynomial<FieldElem>) -> String {
    let terms: Vec<String> = p
        .terms()
        .map(|(m, c)| if m.is_one() { c.to_string() } else { format!("{c}*{}", ax.monomial_name(m)) })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// Degree-`d` refutation of `Ax(Γ_{u→v})`. NC refutations carry a
/// verified certificate.
pub fn cmd_refute(g: &ColoredGraph, calc: Calculus, d: usize, map: &str, globals: &Globals) -> CliResult<RefuteOutput> {
    let field = globals.field()?;
    let (u, v) = parse_map(g, map)?;
    let ax = AxiomSet::ax_iso(g, &u, &v)?;
    let r = refute(calc, &ax, d, field, &globals.engine(true))?;
    let witness = r.witness.map(|w| {
        w.terms
            .iter()
            .map(|t| WitnessTermOutput {
                coefficient: t.coefficient.to_string(),
                multiplier: ax.monomial_name(&t.multiplier),
                axiom: match t.axiom {
                    AxiomRef::Explicit(i) => format!("{:?}#{i}", ax.explicit()[i].tag),
                    AxiomRef::A3(..) => "A3".into(),
                },
                polynomial: polynomial_name(&ax, &ax.polynomial(&field, t.axiom)),
            })
            .collect()
    });
    Ok(RefuteOutput {
        result: r.verdict,
        calculus: calc,
        degree: d,
        characteristic: field.characteristic(),
        witness,
        stats: r.stats,
    })
}

pub fn cmd_partition(
    g: &ColoredGraph,
    calc: Calculus,
    k: usize,
    d: usize,
    globals: &Globals,
) -> CliResult<PartitionFile> {
    let opts = EquivOptions { engine: globals.engine(false), jobs: globals.jobs.max(1) };
    Ok(calculus_equiv_partition(g, k, calc, d, globals.field()?, &opts)?.to_file(g))
}

pub fn cmd_cfi(base: &BaseGraph, p: u64, twist: &str) -> CliResult<GraphFile> {
    let spec = CfiSpec::new(base.clone(), p, base.parse_twists(twist, p)?)?;
    Ok(GraphFile::from_graph(&cfi_build(&spec)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyOutput {
    pub copies: Vec<GraphFile>,
    pub union: GraphFile,
}

pub fn cmd_cfi_family(base: &BaseGraph, p: u64) -> CliResult<FamilyOutput> {
    let fam = cfi_family(base, p)?;
    Ok(FamilyOutput {
        copies: fam.copies.iter().map(GraphFile::from_graph).collect(),
        union: GraphFile::from_graph(&fam.union),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path() -> ColoredGraph {
        ColoredGraph::undirected(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap()
    }

    #[test]
    fn map_parsing() {
        let g = path();
        assert_eq!(parse_map(&g, "a:c, b:b").unwrap(), (vec![0, 1], vec![2, 1]));
        assert!(matches!(parse_map(&g, "a:z"), Err(CliError::Input(_))));
        assert!(matches!(parse_map(&g, "a-c"), Err(CliError::Input(_))));
        assert!(matches!(parse_map(&g, ""), Err(CliError::Input(_))));
    }

    #[test]
    fn refute_end_to_middle_has_a_certificate() {
        let g = path();
        let out = cmd_refute(&g, Calculus::Nc, 2, "a:b", &Globals::default()).unwrap();
        assert_eq!(out.result, Verdict::Refute);
        assert!(!out.witness.unwrap().is_empty());
        let out = cmd_refute(&g, Calculus::Nc, 2, "a:c", &Globals::default()).unwrap();
        assert_eq!(out.result, Verdict::NoRefute);
        assert!(out.witness.is_none());
    }

    #[test]
    fn tight_guard_maps_to_exit_three() {
        let g = path();
        let globals = Globals { guard_monomials: Some(1), ..Globals::default() };
        let err = cmd_refute(&g, Calculus::Pc, 2, "a:b", &globals).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn combined_counting_is_rejected() {
        let g = path();
        let err = cmd_refine(&g, 2, OperatorChoice::Counting, 1, true, FieldSpec::RATIONALS, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
