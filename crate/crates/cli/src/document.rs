//! The problem document: one TOML file holding data sets, graph, scalings and
//! optional render settings.
//!
//! ```toml
//! [[datasets]]
//! vertex = 1
//! points = [[0, 5, 5], [1, 4, 4], [2, 1]]   # [x, y] means z = y
//!
//! [[graph]]
//! vertex = 1
//! sources = [1, 1]          # or counts = [K11, K12, ...] for contiguous blocks
//!
//! [[params]]
//! vertex = 1
//! uniform = { alpha = 0.3, beta = 0.2, gamma = 0.4 }   # or maps = [{...}, ...]
//! ```
//!
//! Vertex ids and map indices are 1-based in the file and in every error
//! path, and 0-based in the core types.

use std::fmt;

use chfif_core::model::{
    validate_dataset, validate_graph, validate_params, GDIFSystem, GeneralizedDataset, GraphSpec,
    ModelError, Scaling, ScalingParams, JOIN_UP_TOLERANCE,
};
use chfif_core::solver::{build_system_with, SolveError, SolveMethod};
use chfif_core::Point3;
use serde::{Deserialize, Serialize};

use crate::render::RenderSettings;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DocumentError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: unknown field `{field}`")]
    UnknownField { path: String, field: String },
    #[error("missing section `{section}`")]
    MissingSection { section: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl DocumentError {
    fn invalid(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self::Invalid {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

/// Scaling of one map as written in a document.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingEntry {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl From<ScalingEntry> for Scaling {
    fn from(s: ScalingEntry) -> Self {
        Scaling::new(s.alpha, s.beta, s.gamma)
    }
}

impl From<Scaling> for ScalingEntry {
    fn from(s: Scaling) -> Self {
        Self {
            alpha: s.alpha,
            beta: s.beta,
            gamma: s.gamma,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetEntry {
    pub vertex: usize,
    pub points: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphEntry {
    pub vertex: usize,
    /// 1-based source vertex per subinterval.
    pub sources: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParamRow {
    Uniform(ScalingEntry),
    PerMap(Vec<ScalingEntry>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamsEntry {
    pub vertex: usize,
    pub row: ParamRow,
}

/// Replaces coefficients after solving. Meant for fault injection and for
/// loading tables produced elsewhere.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientOverride {
    pub vertex: usize,
    pub map: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
}

/// A parsed problem. Entries are sorted by vertex and cover `1..=n` once each.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemDocument {
    pub datasets: Vec<DatasetEntry>,
    pub graph: Vec<GraphEntry>,
    pub params: Vec<ParamsEntry>,
    pub render: Option<RenderSettings>,
    pub overrides: Vec<CoefficientOverride>,
}

// on-disk layout

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDocument {
    datasets: Vec<FileDataset>,
    graph: Vec<FileGraph>,
    params: Vec<FileParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    render: Option<RenderSettings>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    overrides: Vec<CoefficientOverride>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDataset {
    vertex: usize,
    points: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileGraph {
    vertex: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sources: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileParams {
    vertex: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    uniform: Option<ScalingEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    maps: Option<Vec<ScalingEntry>>,
}

const SECTIONS: &[&str] = &["datasets", "graph", "params", "render", "overrides"];
const REQUIRED: &[&str] = &["datasets", "graph", "params"];

fn allowed_keys(section: &str) -> &'static [&'static str] {
    match section {
        "datasets" => &["vertex", "points"],
        "graph" => &["vertex", "sources", "counts"],
        "params" => &["vertex", "uniform", "maps"],
        "render" => RenderSettings::FIELDS,
        "overrides" => &["vertex", "map", "a", "b", "c", "d", "e", "f"],
        _ => &[],
    }
}

const SCALING_KEYS: &[&str] = &["alpha", "beta", "gamma"];

fn check_keys(table: &toml::Table, allowed: &[&str], path: &str) -> Result<(), DocumentError> {
    match table.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(DocumentError::UnknownField {
            path: path.to_string(),
            field: k.clone(),
        }),
        None => Ok(()),
    }
}

fn check_schema(root: &toml::Table) -> Result<(), DocumentError> {
    check_keys(root, SECTIONS, "<document>")?;
    for section in REQUIRED {
        if !root.contains_key(*section) {
            return Err(DocumentError::MissingSection {
                section: section.to_string(),
            });
        }
    }
    for (name, value) in root {
        let tables: Vec<(String, &toml::Table)> = match value {
            toml::Value::Table(t) => vec![(name.clone(), t)],
            toml::Value::Array(items) => items
                .iter()
                .enumerate()
                .filter_map(|(i, v)| v.as_table().map(|t| (format!("{name}[{}]", i + 1), t)))
                .collect(),
            _ => Vec::new(),
        };
        for (path, table) in tables {
            check_keys(table, allowed_keys(name), &path)?;
            if name == "params" {
                if let Some(toml::Value::Table(u)) = table.get("uniform") {
                    check_keys(u, SCALING_KEYS, &format!("{path}.uniform"))?;
                }
                if let Some(toml::Value::Array(maps)) = table.get("maps") {
                    for (j, m) in maps.iter().enumerate() {
                        if let Some(m) = m.as_table() {
                            check_keys(m, SCALING_KEYS, &format!("{path}.maps[{}]", j + 1))?;
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn syntax_error(text: &str, err: toml::de::Error) -> DocumentError {
    let (line, column) = err.span().map_or((0, 0), |s| line_column(text, s.start));
    DocumentError::Syntax {
        line,
        column,
        message: err.message().to_string(),
    }
}

/// Sorts `entries` by vertex and checks they name `1..=n` exactly once.
fn order_vertices<T>(
    section: &str,
    mut entries: Vec<T>,
    vertex: impl Fn(&T) -> usize,
    n: usize,
) -> Result<Vec<T>, DocumentError> {
    entries.sort_by_key(&vertex);
    for (i, e) in entries.iter().enumerate() {
        let v = vertex(e);
        if v == 0 || v > n {
            return Err(DocumentError::invalid(
                format!("{section}[vertex={v}]"),
                format!("vertex ids must lie in 1..={n}"),
            ));
        }
        if v != i + 1 {
            let duplicate = i > 0 && vertex(&entries[i - 1]) == v;
            return Err(if duplicate {
                DocumentError::invalid(format!("{section}[vertex={v}]"), "vertex appears twice")
            } else {
                DocumentError::invalid(
                    format!("{section}[vertex={}]", i + 1),
                    "no entry for this vertex",
                )
            });
        }
    }
    if entries.len() != n {
        return Err(DocumentError::invalid(
            section,
            format!(
                "expected {n} entries, one per data set, got {}",
                entries.len()
            ),
        ));
    }
    Ok(entries)
}

/// Parses a problem document.
pub fn parse_problem(text: &str) -> Result<ProblemDocument, DocumentError> {
    let root: toml::Table = toml::from_str(text).map_err(|e| syntax_error(text, e))?;
    check_schema(&root)?;
    let file: FileDocument = toml::from_str(text).map_err(|e| {
        let (line, _) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        DocumentError::invalid(format!("line {line}"), e.message())
    })?;

    let n = file.datasets.len();
    if n == 0 {
        return Err(DocumentError::MissingSection {
            section: "datasets".into(),
        });
    }
    let datasets = order_vertices("datasets", file.datasets, |d| d.vertex, n)?
        .into_iter()
        .map(|d| {
            let points = d
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| match *p.as_slice() {
                    [x, y] => Ok([x, y, y]),
                    [x, y, z] => Ok([x, y, z]),
                    _ => Err(DocumentError::invalid(
                        format!("datasets[vertex={}].points[{}]", d.vertex, i + 1),
                        format!("expected [x, y] or [x, y, z], got {} numbers", p.len()),
                    )),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(DatasetEntry {
                vertex: d.vertex,
                points,
            })
        })
        .collect::<Result<Vec<_>, DocumentError>>()?;

    let graph = order_vertices("graph", file.graph, |g| g.vertex, n)?
        .into_iter()
        .map(|g| {
            let path = format!("graph[vertex={}]", g.vertex);
            let sources = match (g.sources, g.counts) {
                (Some(s), None) => s,
                (None, Some(c)) => {
                    if c.len() > n {
                        return Err(DocumentError::invalid(
                            format!("{path}.counts"),
                            format!("{} counts given for {n} vertices", c.len()),
                        ));
                    }
                    let mut s = Vec::new();
                    for (src, &k) in c.iter().enumerate() {
                        s.extend(std::iter::repeat_n(src + 1, k));
                    }
                    s
                }
                _ => {
                    return Err(DocumentError::invalid(
                        path,
                        "give exactly one of `sources` or `counts`",
                    ))
                }
            };
            Ok(GraphEntry {
                vertex: g.vertex,
                sources,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let params = order_vertices("params", file.params, |p| p.vertex, n)?
        .into_iter()
        .map(|p| {
            let row = match (p.uniform, p.maps) {
                (Some(u), None) => ParamRow::Uniform(u),
                (None, Some(m)) => ParamRow::PerMap(m),
                _ => {
                    return Err(DocumentError::invalid(
                        format!("params[vertex={}]", p.vertex),
                        "give exactly one of `uniform` or `maps`",
                    ))
                }
            };
            Ok(ParamsEntry {
                vertex: p.vertex,
                row,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ProblemDocument {
        datasets,
        graph,
        params,
        render: file.render,
        overrides: file.overrides,
    })
}

impl ProblemDocument {
    /// Canonical TOML text. Parsing it gives back an equal document.
    pub fn to_toml(&self) -> String {
        let file = FileDocument {
            datasets: self
                .datasets
                .iter()
                .map(|d| FileDataset {
                    vertex: d.vertex,
                    points: d.points.iter().map(|p| p.to_vec()).collect(),
                })
                .collect(),
            graph: self
                .graph
                .iter()
                .map(|g| FileGraph {
                    vertex: g.vertex,
                    sources: Some(g.sources.clone()),
                    counts: None,
                })
                .collect(),
            params: self
                .params
                .iter()
                .map(|p| match &p.row {
                    ParamRow::Uniform(u) => FileParams {
                        vertex: p.vertex,
                        uniform: Some(*u),
                        maps: None,
                    },
                    ParamRow::PerMap(m) => FileParams {
                        vertex: p.vertex,
                        uniform: None,
                        maps: Some(m.clone()),
                    },
                })
                .collect(),
            render: self.render.clone(),
            overrides: self.overrides.clone(),
        };
        toml::to_string(&file).expect("problem documents always serialize")
    }

    pub fn vertex_count(&self) -> usize {
        self.datasets.len()
    }

    /// Validated core inputs, with errors reported against document paths.
    pub fn inputs(
        &self,
    ) -> Result<(Vec<GeneralizedDataset>, GraphSpec, ScalingParams), DocumentError> {
        let datasets = self
            .datasets
            .iter()
            .map(|d| {
                let points = d.points.iter().map(|&p| Point3::from(p)).collect();
                validate_dataset(d.vertex - 1, points).map_err(|e| dataset_error(d.vertex, &e))
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut assignment = Vec::with_capacity(self.graph.len());
        for g in &self.graph {
            let mut row = Vec::with_capacity(g.sources.len());
            for (n, &s) in g.sources.iter().enumerate() {
                if s == 0 || s > self.vertex_count() {
                    return Err(DocumentError::invalid(
                        format!("graph[vertex={}].sources[{}]", g.vertex, n + 1),
                        format!("unknown source vertex {s}"),
                    ));
                }
                row.push(s - 1);
            }
            assignment.push(row);
        }
        let graph = validate_graph(assignment, &datasets).map_err(|e| model_error(&e))?;

        let rows = self
            .params
            .iter()
            .zip(&datasets)
            .map(|(p, d)| match &p.row {
                ParamRow::Uniform(u) => vec![Scaling::from(*u); d.subinterval_count()],
                ParamRow::PerMap(m) => m.iter().map(|&s| s.into()).collect(),
            })
            .collect();
        let params = validate_params(rows, &graph).map_err(|e| self.params_error(&e))?;
        Ok((datasets, graph, params))
    }

    /// Builds the system, applying coefficient overrides, and requires the
    /// join-up conditions to hold.
    pub fn build_system(&self, method: SolveMethod) -> Result<GDIFSystem, DocumentError> {
        self.build(method, JOIN_UP_TOLERANCE)
    }

    /// Like [`Self::build_system`] but accepts any join-up residual, so that a
    /// corrupted table can still be inspected.
    pub fn build_system_unchecked(&self, method: SolveMethod) -> Result<GDIFSystem, DocumentError> {
        self.build(method, f64::INFINITY)
    }

    fn build(&self, method: SolveMethod, tolerance: f64) -> Result<GDIFSystem, DocumentError> {
        let (datasets, graph, params) = self.inputs()?;
        let system = build_system_with(datasets, graph, &params, method).map_err(|e| match e {
            SolveError::Model(m) => self.params_error(&m),
            other => DocumentError::invalid("datasets", other),
        })?;
        if self.overrides.is_empty() {
            return Ok(system);
        }
        let mut maps: Vec<Vec<_>> = (0..system.vertex_count())
            .map(|v| system.maps(v).to_vec())
            .collect();
        for (i, o) in self.overrides.iter().enumerate() {
            let path = format!("overrides[{}]", i + 1);
            let row = o
                .vertex
                .checked_sub(1)
                .and_then(|v| maps.get_mut(v))
                .ok_or_else(|| {
                    DocumentError::invalid(&path, format!("unknown vertex {}", o.vertex))
                })?;
            let m = o
                .map
                .checked_sub(1)
                .and_then(|n| row.get_mut(n))
                .ok_or_else(|| DocumentError::invalid(&path, format!("unknown map {}", o.map)))?;
            let c = &mut m.coeffs;
            for (slot, value) in [
                (&mut c.a, o.a),
                (&mut c.b, o.b),
                (&mut c.c, o.c),
                (&mut c.d, o.d),
                (&mut c.e, o.e),
                (&mut c.f, o.f),
            ] {
                if let Some(v) = value {
                    *slot = v;
                }
            }
        }
        GDIFSystem::new(
            system.datasets().to_vec(),
            system.graph().clone(),
            maps,
            tolerance,
        )
        .map_err(|e| model_error(&e))
    }

    fn params_error(&self, e: &ModelError) -> DocumentError {
        match e {
            ModelError::InvalidScaling {
                vertex,
                map,
                violation,
            } => {
                let path = match self.params.get(*vertex).map(|p| &p.row) {
                    Some(ParamRow::Uniform(_)) => format!("params[vertex={}].uniform", vertex + 1),
                    _ => format!("params[vertex={}].maps[{}]", vertex + 1, map + 1),
                };
                DocumentError::invalid(path, violation)
            }
            ModelError::AssignmentLengthMismatch {
                vertex,
                expected,
                found,
            } => DocumentError::invalid(
                format!("params[vertex={}].maps", vertex + 1),
                format!("expected {expected} maps (one per subinterval), got {found}"),
            ),
            other => model_error(other),
        }
    }
}

fn dataset_error(vertex: usize, e: &ModelError) -> DocumentError {
    let base = format!("datasets[vertex={vertex}].points");
    match e {
        ModelError::NonIncreasingAbscissa { index } => DocumentError::invalid(
            format!("{base}[{}]", index + 1),
            "abscissa is not strictly greater than the previous one",
        ),
        ModelError::NonFiniteValue { index } => {
            DocumentError::invalid(format!("{base}[{}]", index + 1), "non-finite coordinate")
        }
        ModelError::TooFewPoints { count } => {
            DocumentError::invalid(base, format!("at least 3 points are needed, got {count}"))
        }
        other => DocumentError::invalid(base, other),
    }
}

/// Maps a core error with 0-based labels onto a 1-based document path.
pub fn model_error(e: &ModelError) -> DocumentError {
    match *e {
        ModelError::AssignmentLengthMismatch {
            vertex,
            expected,
            found,
        } => DocumentError::invalid(
            format!("graph[vertex={}].sources", vertex + 1),
            format!("expected {expected} sources (one per subinterval), got {found}"),
        ),
        ModelError::UnknownVertex {
            vertex,
            subinterval,
            source_vertex,
        } => DocumentError::invalid(
            format!("graph[vertex={}].sources[{}]", vertex + 1, subinterval + 1),
            format!("unknown source vertex {}", source_vertex + 1),
        ),
        ModelError::HorizontalExpansion {
            vertex,
            subinterval,
            source_vertex,
            ratio,
        } => DocumentError::invalid(
            format!("graph[vertex={}].sources[{}]", vertex + 1, subinterval + 1),
            format!(
                "subinterval is not shorter than the interval of source vertex {} (ratio {ratio})",
                source_vertex + 1
            ),
        ),
        ModelError::JoinUpViolation {
            vertex,
            map,
            residual,
            tolerance,
        } => DocumentError::invalid(
            format!("maps[vertex={}][{}]", vertex + 1, map + 1),
            format!("join-up residual {residual:e} exceeds {tolerance:e}"),
        ),
        ModelError::InvalidScaling {
            vertex,
            map,
            violation,
        } => DocumentError::invalid(
            format!("params[vertex={}].maps[{}]", vertex + 1, map + 1),
            violation,
        ),
        ref other => DocumentError::invalid("<document>", other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIFORM: &str = include_str!("../problems/uniform.problem");

    #[test]
    fn bundled_example_parses() {
        let doc = parse_problem(UNIFORM).unwrap();
        assert_eq!(doc.vertex_count(), 2);
        assert_eq!(doc.graph[0].sources, vec![1, 1, 1, 2, 2]);
        let sys = doc.build_system(SolveMethod::ClosedForm).unwrap();
        assert_eq!(sys.map_count(), 9);
        assert_eq!(sys.graph().edge_counts(), vec![vec![3, 2], vec![1, 3]]);
    }

    #[test]
    fn empty_file_is_missing_a_section() {
        assert_eq!(
            parse_problem(""),
            Err(DocumentError::MissingSection {
                section: "datasets".into()
            })
        );
    }

    #[test]
    fn syntax_error_has_line() {
        let err = parse_problem("[[datasets]]\nvertex = = 1\n").unwrap_err();
        assert!(
            matches!(err, DocumentError::Syntax { line: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn unknown_field_has_path() {
        let text = UNIFORM.replace(
            "sources = [1, 2, 2, 2]",
            "sources = [1, 2, 2, 2]\nweight = 3",
        );
        assert_eq!(
            parse_problem(&text),
            Err(DocumentError::UnknownField {
                path: "graph[2]".into(),
                field: "weight".into()
            })
        );
        let text = UNIFORM.replacen(
            "gamma = 0.3333333333333333 }",
            "gamma = 0.3333333333333333, delta = 1 }",
            1,
        );
        assert_eq!(
            parse_problem(&text),
            Err(DocumentError::UnknownField {
                path: "params[1].uniform".into(),
                field: "delta".into()
            })
        );
    }

    #[test]
    fn scaling_violation_is_reported_against_its_field() {
        let text = UNIFORM.replacen(
            "uniform = { alpha = 0.3333333333333333, beta = 0.3333333333333333, gamma = 0.3333333333333333 }",
            "maps = [{ alpha = 0.1, beta = 0.1, gamma = 0.1 }, { alpha = 0.1, beta = 0.6, gamma = 0.5 }, \
             { alpha = 0.1, beta = 0.1, gamma = 0.1 }, { alpha = 0.1, beta = 0.1, gamma = 0.1 }, \
             { alpha = 0.1, beta = 0.1, gamma = 0.1 }]",
            1,
        );
        let doc = parse_problem(&text).unwrap();
        let err = doc.build_system(SolveMethod::ClosedForm).unwrap_err();
        match err {
            DocumentError::Invalid { path, message } => {
                assert_eq!(path, "params[vertex=1].maps[2]");
                assert!(message.contains("beta"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_z_defaults_to_y() {
        let text = UNIFORM.replace("[[0, 1, 1], [1, 2, 2],", "[[0, 1], [1, 2],");
        let doc = parse_problem(&text).unwrap();
        assert_eq!(doc, parse_problem(UNIFORM).unwrap());
    }

    #[test]
    fn counts_expand_to_contiguous_sources() {
        let text = UNIFORM
            .replace("sources = [1, 1, 1, 2, 2]", "counts = [3, 2]")
            .replace("sources = [1, 2, 2, 2]", "counts = [1, 3]");
        assert_eq!(
            parse_problem(&text).unwrap(),
            parse_problem(UNIFORM).unwrap()
        );
    }

    #[test]
    fn duplicate_and_missing_vertices() {
        let text = UNIFORM.replace("[[graph]]\nvertex = 2", "[[graph]]\nvertex = 1");
        let err = parse_problem(&text).unwrap_err();
        assert!(
            matches!(err, DocumentError::Invalid { ref path, .. } if path == "graph[vertex=1]"),
            "{err:?}"
        );
    }

    #[test]
    fn round_trip() {
        let doc = parse_problem(UNIFORM).unwrap();
        let again = parse_problem(&doc.to_toml()).unwrap();
        assert_eq!(again, doc);
    }

    #[test]
    fn override_breaks_join_up() {
        let text = format!("{UNIFORM}\n[[overrides]]\nvertex = 1\nmap = 2\nd = 9.0\n");
        let doc = parse_problem(&text).unwrap();
        let err = doc.build_system(SolveMethod::ClosedForm).unwrap_err();
        assert!(
            matches!(err, DocumentError::Invalid { ref path, .. } if path == "maps[vertex=1][2]"),
            "{err:?}"
        );
        let sys = doc.build_system_unchecked(SolveMethod::ClosedForm).unwrap();
        assert!(sys.join_up_residual() > 1.0);
    }
}
