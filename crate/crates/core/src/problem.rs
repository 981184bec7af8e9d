//! The problem-file format.
//!
//! A problem file is a sequence of `[section]` headers followed by
//! `key = value` lines. Blank lines and lines starting with `#` are ignored.
//! Vectors are comma-separated reals; matrices are row-major with rows
//! separated by `;`. Point sets are bracketed lists of vectors, e.g.
//! `[0, 1; 2, 3]`.
//!
//! ```text
//! [space]
//! dim = 1
//!
//! [zeta]
//! kind = linear
//! k = 0.5
//!
//! [map]
//! matrix = 0.5
//! offset = 1
//!
//! [solver]
//! x0 = 0
//! tol = 1e-9
//! ```
//!
//! In `[multimap]` every `matrix` key opens a new affine branch and an
//! optional `offset` key completes it. Unknown sections and keys are errors.

use std::fmt::Write as _;

use crate::contraction::{MultiMap, SamplingProtocol, SingleMap, ZetaFn};
use crate::fuzzy_metric::{FuzzyMetric, PointSpace};
use crate::hausdorff::FiniteCompactSet;
use crate::solver::SolverConfig;
use crate::tnorm::TNorm;
use crate::{BoundingBox, Error, Point, Result};

/// Largest accepted `[space] dim`.
pub const MAX_DIM: usize = 64;
/// Points of a set closer than this are rejected as near-duplicates.
pub const MIN_SEPARATION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    /// Row-major, `dim × dim`.
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

impl Affine {
    pub fn to_map(&self, dim: usize) -> Result<SingleMap> {
        SingleMap::affine(dim, self.matrix.concat(), self.offset.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mapping {
    Single(Affine),
    Multi(Vec<Affine>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSection {
    pub x0: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub rho_ref: f64,
    pub uniqueness_starts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSection {
    pub pair_samples: usize,
    pub rho_grid: Vec<f64>,
    /// `None` defers to the caller's fallback seed.
    pub seed: Option<u64>,
    pub box_lo: f64,
    pub box_hi: f64,
}

impl Default for SampleSection {
    fn default() -> Self {
        let defaults = SamplingProtocol::default();
        SampleSection {
            pair_samples: defaults.pair_samples,
            rho_grid: defaults.rho_grid,
            seed: None,
            box_lo: defaults.bbox.lo,
            box_hi: defaults.bbox.hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedSet {
    pub name: String,
    pub points: Vec<Vec<f64>>,
}

/// A validated problem description.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub dim: usize,
    /// Only `euclidean` is supported.
    pub metric: String,
    /// One of `lukasiewicz`, `product`, `minimum`.
    pub tnorm: String,
    /// Only `standard` is supported.
    pub fuzzy: String,
    /// Linear ζ slope.
    pub zeta_k: f64,
    pub mapping: Mapping,
    pub solver: SolverSection,
    pub sample: SampleSection,
    pub sets: Vec<NamedSet>,
}

/// Runtime objects built from a [`ProblemSpec`].
#[derive(Debug, Clone)]
pub enum BuiltMapping {
    Single(SingleMap),
    Multi(MultiMap),
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub space: PointSpace,
    pub fm: FuzzyMetric,
    pub zeta: ZetaFn,
    pub mapping: BuiltMapping,
    pub solver: SolverConfig,
    pub protocol: SamplingProtocol,
    pub sets: Vec<(String, FiniteCompactSet)>,
}

impl ProblemSpec {
    /// A one-dimensional problem with default solver and sampling settings.
    pub fn scalar(zeta_k: f64, mapping: Mapping, x0: f64) -> Self {
        ProblemSpec {
            dim: 1,
            metric: "euclidean".into(),
            tnorm: "product".into(),
            fuzzy: "standard".into(),
            zeta_k,
            mapping,
            solver: SolverSection {
                x0: vec![x0],
                tol: 1e-9,
                max_iter: 10_000,
                rho_ref: 1.0,
                uniqueness_starts: 3,
            },
            sample: SampleSection::default(),
            sets: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::Validation(msg));
        if self.dim == 0 || self.dim > MAX_DIM {
            return invalid(format!("dim must be in 1..={MAX_DIM}, got {}", self.dim));
        }
        if self.metric != "euclidean" {
            return invalid(format!("unsupported metric {:?}", self.metric));
        }
        if TNorm::from_name(&self.tnorm).is_none() {
            return invalid(format!("unknown tnorm {:?}", self.tnorm));
        }
        if self.fuzzy != "standard" {
            return invalid(format!("unsupported fuzzy metric {:?}", self.fuzzy));
        }
        let all_finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        if !(self.zeta_k.is_finite() && self.zeta_k > 0.0) {
            return invalid(format!("zeta k must be positive, got {}", self.zeta_k));
        }
        let check_affine = |a: &Affine| -> Result<()> {
            if a.matrix.len() != self.dim || a.matrix.iter().any(|r| r.len() != self.dim) {
                return Err(Error::Validation(format!(
                    "dimension mismatch: matrix must be {0}x{0}",
                    self.dim
                )));
            }
            if a.offset.len() != self.dim {
                return Err(Error::Validation(format!(
                    "dimension mismatch: offset must have {} entries",
                    self.dim
                )));
            }
            if !a.matrix.iter().all(|r| all_finite(r)) || !all_finite(&a.offset) {
                return Err(Error::Validation("non-finite map coefficient".into()));
            }
            Ok(())
        };
        match &self.mapping {
            Mapping::Single(a) => check_affine(a)?,
            Mapping::Multi(bs) if bs.is_empty() => return invalid("multimap has no branches".into()),
            Mapping::Multi(bs) => bs.iter().try_for_each(check_affine)?,
        }
        let s = &self.solver;
        if s.x0.len() != self.dim {
            return invalid(format!("dimension mismatch: x0 must have {} entries", self.dim));
        }
        if !all_finite(&s.x0) {
            return invalid("non-finite x0".into());
        }
        if !(s.tol > 0.0 && s.tol < 1.0) {
            return invalid(format!("tol must be in (0, 1), got {}", s.tol));
        }
        if s.max_iter == 0 {
            return invalid("max_iter must be at least 1".into());
        }
        if !(s.rho_ref.is_finite() && s.rho_ref > 0.0) {
            return invalid(format!("rho_ref must be positive, got {}", s.rho_ref));
        }
        let p = &self.sample;
        if p.pair_samples == 0 {
            return invalid("pair_samples must be at least 1".into());
        }
        if p.rho_grid.is_empty() || !p.rho_grid.iter().all(|r| r.is_finite() && *r > 0.0) {
            return invalid("rho_grid must be a nonempty list of positive reals".into());
        }
        if !(p.box_lo.is_finite() && p.box_hi.is_finite() && p.box_lo <= p.box_hi) {
            return invalid(format!("invalid box [{}, {}]", p.box_lo, p.box_hi));
        }
        for (i, set) in self.sets.iter().enumerate() {
            if !is_identifier(&set.name) {
                return invalid(format!("invalid set name {:?}", set.name));
            }
            if self.sets[..i].iter().any(|s| s.name == set.name) {
                return invalid(format!("duplicate set {:?}", set.name));
            }
            if set.points.is_empty() {
                return invalid(format!("set {} is empty", set.name));
            }
            for (j, pt) in set.points.iter().enumerate() {
                if pt.len() != self.dim {
                    return invalid(format!("dimension mismatch in set {}", set.name));
                }
                if !all_finite(pt) {
                    return invalid(format!("non-finite point in set {}", set.name));
                }
                for prev in &set.points[..j] {
                    let d = Point::new(prev.clone()).euclidean(&Point::new(pt.clone()));
                    if d < MIN_SEPARATION {
                        return invalid(format!("set {} has points closer than {MIN_SEPARATION:e}", set.name));
                    }
                }
            }
        }
        Ok(())
    }

    /// Builds runtime objects. `fallback_seed` is used when the file has no seed.
    pub fn build(&self, fallback_seed: u64) -> Result<Problem> {
        self.validate()?;
        let space = PointSpace::euclidean(self.dim);
        let tnorm = TNorm::from_name(&self.tnorm).expect("validated");
        let fm = FuzzyMetric::standard(space.clone())?.with_tnorm(tnorm);
        let mapping = match &self.mapping {
            Mapping::Single(a) => BuiltMapping::Single(a.to_map(self.dim)?),
            Mapping::Multi(bs) => BuiltMapping::Multi(MultiMap::new(
                bs.iter().map(|a| a.to_map(self.dim)).collect::<Result<_>>()?,
            )?),
        };
        let seed = self.sample.seed.unwrap_or(fallback_seed);
        let bbox = BoundingBox::new(self.sample.box_lo, self.sample.box_hi)?;
        let solver = SolverConfig {
            x0: Point::new(self.solver.x0.clone()),
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            rho_ref: self.solver.rho_ref,
            uniqueness_starts: self.solver.uniqueness_starts,
            seed,
            start_box: bbox,
        };
        let protocol = SamplingProtocol::new(self.sample.pair_samples, self.sample.rho_grid.clone(), seed, bbox)?;
        let sets = self
            .sets
            .iter()
            .map(|s| {
                let pts = s.points.iter().map(|p| Point::new(p.clone())).collect();
                Ok((s.name.clone(), FiniteCompactSet::new(pts)?))
            })
            .collect::<Result<_>>()?;
        Ok(Problem {
            space,
            fm,
            zeta: ZetaFn::linear(self.zeta_k)?,
            mapping,
            solver,
            protocol,
            sets,
        })
    }

    /// Renders the problem in file format, every field explicit.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[space]\ndim = {}\nmetric = {}\n", self.dim, self.metric);
        let _ = writeln!(out, "[tnorm]\nkind = {}\n", self.tnorm);
        let _ = writeln!(out, "[fuzzy]\nkind = {}\n", self.fuzzy);
        let _ = writeln!(out, "[zeta]\nkind = linear\nk = {}\n", render_real(self.zeta_k));
        match &self.mapping {
            Mapping::Single(a) => {
                let _ = writeln!(
                    out,
                    "[map]\nmatrix = {}\noffset = {}\n",
                    render_matrix(&a.matrix),
                    render_vector(&a.offset)
                );
            }
            Mapping::Multi(bs) => {
                out.push_str("[multimap]\n");
                for a in bs {
                    let _ = writeln!(
                        out,
                        "matrix = {}\noffset = {}",
                        render_matrix(&a.matrix),
                        render_vector(&a.offset)
                    );
                }
                out.push('\n');
            }
        }
        let s = &self.solver;
        let _ = writeln!(
            out,
            "[solver]\nx0 = {}\ntol = {}\nmax_iter = {}\nrho_ref = {}\nuniqueness_starts = {}\n",
            render_vector(&s.x0),
            render_real(s.tol),
            s.max_iter,
            render_real(s.rho_ref),
            s.uniqueness_starts
        );
        let p = &self.sample;
        let _ = writeln!(
            out,
            "[sample]\npair_samples = {}\nrho_grid = {}\nbox = {}, {}",
            p.pair_samples,
            render_vector(&p.rho_grid),
            render_real(p.box_lo),
            render_real(p.box_hi)
        );
        if let Some(seed) = p.seed {
            let _ = writeln!(out, "seed = {seed}");
        }
        if !self.sets.is_empty() {
            out.push_str("\n[sets]\n");
            for s in &self.sets {
                let _ = writeln!(out, "{} = [{}]", s.name, render_matrix(&s.points));
            }
        }
        out
    }
}

/// Shortest text that parses back to the same bits.
fn render_real(x: f64) -> String {
    format!("{x:?}")
}

type Matrix = Vec<Vec<f64>>;

fn render_vector(v: &[f64]) -> String {
    v.iter().map(|&x| render_real(x)).collect::<Vec<_>>().join(", ")
}

fn render_matrix(rows: &[Vec<f64>]) -> String {
    rows.iter().map(|r| render_vector(r)).collect::<Vec<_>>().join("; ")
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_error(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

/// Parses one real; non-finite values are rejected.
pub fn parse_real(text: &str) -> std::result::Result<f64, String> {
    let t = text.trim();
    match t.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(_) => Err(format!("{t:?} is not finite")),
        Err(_) => Err(format!("{t:?} is not a number")),
    }
}

/// Parses `a, b, c`.
pub fn parse_vector(text: &str) -> std::result::Result<Vec<f64>, String> {
    if text.trim().is_empty() {
        return Err("empty vector".into());
    }
    text.split(',').map(parse_real).collect()
}

/// Parses `a, b; c, d` into rows.
pub fn parse_matrix(text: &str) -> std::result::Result<Vec<Vec<f64>>, String> {
    text.split(';').map(parse_vector).collect()
}

/// Parses a bracketed point list `[a, b; c, d]`.
pub fn parse_point_set(text: &str) -> std::result::Result<Vec<Vec<f64>>, String> {
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| "point set must be enclosed in [ ]".to_string())?;
    let points = parse_matrix(inner)?;
    if let Some(first) = points.first() {
        if points.iter().any(|p| p.len() != first.len()) {
            return Err("points of a set must share a dimension".into());
        }
    }
    Ok(points)
}

fn parse_count(text: &str) -> std::result::Result<usize, String> {
    text.trim()
        .parse::<usize>()
        .map_err(|_| format!("{:?} is not a non-negative integer", text.trim()))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    Space,
    Tnorm,
    Fuzzy,
    Zeta,
    Map,
    Multimap,
    Solver,
    Sample,
    Sets,
}

impl Section {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "space" => Section::Space,
            "tnorm" => Section::Tnorm,
            "fuzzy" => Section::Fuzzy,
            "zeta" => Section::Zeta,
            "map" => Section::Map,
            "multimap" => Section::Multimap,
            "solver" => Section::Solver,
            "sample" => Section::Sample,
            "sets" => Section::Sets,
            _ => return None,
        })
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Section::Space => &["dim", "metric"],
            Section::Tnorm | Section::Fuzzy => &["kind"],
            Section::Zeta => &["kind", "k"],
            Section::Map | Section::Multimap => &["matrix", "offset"],
            Section::Solver => &["x0", "tol", "max_iter", "rho_ref", "uniqueness_starts"],
            Section::Sample => &["pair_samples", "rho_grid", "seed", "box"],
            Section::Sets => &[],
        }
    }
}

#[derive(Default)]
struct Draft {
    dim: Option<usize>,
    metric: Option<String>,
    tnorm: Option<String>,
    fuzzy: Option<String>,
    zeta_kind: Option<String>,
    zeta_k: Option<f64>,
    map: Option<(Option<Matrix>, Option<Vec<f64>>)>,
    branches: Vec<(Matrix, Option<Vec<f64>>)>,
    x0: Option<Vec<f64>>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    rho_ref: Option<f64>,
    uniqueness_starts: Option<usize>,
    pair_samples: Option<usize>,
    rho_grid: Option<Vec<f64>>,
    seed: Option<u64>,
    bbox: Option<(f64, f64)>,
    sets: Vec<NamedSet>,
}

/// Parses and validates a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemSpec> {
    let mut draft = Draft::default();
    let mut section: Option<Section> = None;
    let mut seen: Vec<Section> = Vec::new();
    let mut keys_seen: Vec<&'static str> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_error(line_no, "section", "missing closing ']'"))?
                .trim();
            let sec = Section::from_name(name)
                .ok_or_else(|| parse_error(line_no, name, "unknown section"))?;
            let mapping = |s: &Section| matches!(s, Section::Map | Section::Multimap);
            if mapping(&sec) && seen.iter().any(mapping) {
                return Err(Error::Validation(format!(
                    "duplicate mapping: [{name}] at line {line_no} after an earlier mapping section"
                )));
            }
            if seen.contains(&sec) {
                return Err(parse_error(line_no, name, "section appears twice"));
            }
            seen.push(sec);
            section = Some(sec);
            keys_seen.clear();
            if sec == Section::Map {
                draft.map = Some((None, None));
            }
            continue;
        }
        let sec = section.ok_or_else(|| parse_error(line_no, "line", "key outside of any section"))?;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_error(line_no, "line", "expected key = value"))?;
        let (key, value) = (key.trim(), value.trim());

        if sec == Section::Sets {
            if !is_identifier(key) {
                return Err(parse_error(line_no, key, "set names must be identifiers"));
            }
            if draft.sets.iter().any(|s| s.name == key) {
                return Err(parse_error(line_no, key, "duplicate set"));
            }
            let points = parse_point_set(value).map_err(|m| parse_error(line_no, key, m))?;
            draft.sets.push(NamedSet {
                name: key.to_string(),
                points,
            });
            continue;
        }

        let Some(&key) = sec.keys().iter().find(|k| **k == key) else {
            return Err(parse_error(line_no, key, "unknown key"));
        };
        // In [multimap], `matrix` and `offset` repeat once per branch.
        if sec == Section::Multimap {
            let err = |m: String| parse_error(line_no, key, m);
            match key {
                "matrix" => {
                    let m = parse_matrix(value).map_err(err)?;
                    draft.branches.push((m, None));
                }
                _ => {
                    let v = parse_vector(value).map_err(err)?;
                    match draft.branches.last_mut() {
                        Some((_, offset @ None)) => *offset = Some(v),
                        Some(_) => return Err(parse_error(line_no, key, "branch already has an offset")),
                        None => return Err(parse_error(line_no, key, "offset before any matrix")),
                    }
                }
            }
            continue;
        }
        if keys_seen.contains(&key) {
            return Err(parse_error(line_no, key, "duplicate key"));
        }
        keys_seen.push(key);
        let err = |m: String| parse_error(line_no, key, m);
        match (sec, key) {
            (Section::Space, "dim") => draft.dim = Some(parse_count(value).map_err(err)?),
            (Section::Space, "metric") => draft.metric = Some(value.to_string()),
            (Section::Tnorm, "kind") => draft.tnorm = Some(value.to_string()),
            (Section::Fuzzy, "kind") => draft.fuzzy = Some(value.to_string()),
            (Section::Zeta, "kind") => draft.zeta_kind = Some(value.to_string()),
            (Section::Zeta, "k") => draft.zeta_k = Some(parse_real(value).map_err(err)?),
            (Section::Map, "matrix") => {
                draft.map.as_mut().expect("opened").0 = Some(parse_matrix(value).map_err(err)?)
            }
            (Section::Map, "offset") => {
                draft.map.as_mut().expect("opened").1 = Some(parse_vector(value).map_err(err)?)
            }
            (Section::Solver, "x0") => draft.x0 = Some(parse_vector(value).map_err(err)?),
            (Section::Solver, "tol") => draft.tol = Some(parse_real(value).map_err(err)?),
            (Section::Solver, "max_iter") => draft.max_iter = Some(parse_count(value).map_err(err)?),
            (Section::Solver, "rho_ref") => draft.rho_ref = Some(parse_real(value).map_err(err)?),
            (Section::Solver, "uniqueness_starts") => {
                draft.uniqueness_starts = Some(parse_count(value).map_err(err)?)
            }
            (Section::Sample, "pair_samples") => {
                draft.pair_samples = Some(parse_count(value).map_err(err)?)
            }
            (Section::Sample, "rho_grid") => draft.rho_grid = Some(parse_vector(value).map_err(err)?),
            (Section::Sample, "seed") => {
                draft.seed = Some(
                    value
                        .parse::<u64>()
                        .map_err(|_| err(format!("{value:?} is not a u64")))?,
                )
            }
            (Section::Sample, "box") => {
                let v = parse_vector(value).map_err(err)?;
                let [lo, hi] = v[..] else {
                    return Err(err("box takes two numbers: lo, hi".into()));
                };
                draft.bbox = Some((lo, hi));
            }
            _ => unreachable!("key table and match arms agree"),
        }
    }
    draft.finish()
}

impl Draft {
    fn finish(self) -> Result<ProblemSpec> {
        let dim = self
            .dim
            .ok_or_else(|| Error::Validation("missing [space] dim".into()))?;
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Validation(format!("dim must be in 1..={MAX_DIM}, got {dim}")));
        }
        if let Some(kind) = &self.zeta_kind {
            if kind != "linear" {
                return Err(Error::Validation(format!("unsupported zeta kind {kind:?}")));
            }
        }
        let zeta_k = self
            .zeta_k
            .ok_or_else(|| Error::Validation("missing [zeta] k".into()))?;
        let zero_offset = || vec![0.0; dim];
        let mapping = match (self.map, self.branches.is_empty()) {
            (Some((matrix, offset)), true) => Mapping::Single(Affine {
                matrix: matrix.ok_or_else(|| Error::Validation("[map] has no matrix".into()))?,
                offset: offset.unwrap_or_else(zero_offset),
            }),
            (None, false) => Mapping::Multi(
                self.branches
                    .into_iter()
                    .map(|(matrix, offset)| Affine {
                        matrix,
                        offset: offset.unwrap_or_else(zero_offset),
                    })
                    .collect(),
            ),
            (None, true) => return Err(Error::Validation("no mapping: add a [map] or [multimap] section".into())),
            (Some(_), false) => return Err(Error::Validation("duplicate mapping".into())),
        };
        let defaults = SampleSection::default();
        let (box_lo, box_hi) = self.bbox.unwrap_or((defaults.box_lo, defaults.box_hi));
        let spec = ProblemSpec {
            dim,
            metric: self.metric.unwrap_or_else(|| "euclidean".into()),
            tnorm: self.tnorm.unwrap_or_else(|| "product".into()),
            fuzzy: self.fuzzy.unwrap_or_else(|| "standard".into()),
            zeta_k,
            mapping,
            solver: SolverSection {
                x0: self.x0.unwrap_or_else(|| vec![0.0; dim]),
                tol: self.tol.unwrap_or(1e-9),
                max_iter: self.max_iter.unwrap_or(10_000),
                rho_ref: self.rho_ref.unwrap_or(1.0),
                uniqueness_starts: self.uniqueness_starts.unwrap_or(3),
            },
            sample: SampleSection {
                pair_samples: self.pair_samples.unwrap_or(defaults.pair_samples),
                rho_grid: self.rho_grid.unwrap_or(defaults.rho_grid),
                seed: self.seed,
                box_lo,
                box_hi,
            },
            sets: self.sets,
        };
        spec.validate()?;
        Ok(spec)
    }
}
