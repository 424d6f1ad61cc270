//! Plain-text scenario files.
//!
//! A scenario is a sequence of `[section]` headers followed by
//! `key = value` lines. `#` starts a comment. Values are taken verbatim up to
//! the end of the line; lists are separated by `,` and matrix rows by `;`.
//! See the README for the grammar and the keys of every task.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use hfree_core::hfree::MapSpec;
use hfree_core::transversal::Window;
use hfree_core::{parse, Chart, CurveDomain, Distribution, Expr, FreeCurve, RpBracketSpec, VectorField};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ScenarioError {
    pub line: usize,
    pub message: String,
}

type Result<T> = std::result::Result<T, ScenarioError>;

fn fail<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(ScenarioError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug, Clone)]
struct Section {
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn require(&self, key: &str, section: &str) -> Result<&Entry> {
        match self.get(key) {
            Some(e) => Ok(e),
            None => fail(self.line, format!("[{section}] needs `{key}`")),
        }
    }
}

const SECTIONS: &[&str] = &["chart", "functions", "fields", "maps", "curves", "points", "window", "task"];

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return fail(line, "section header must end with `]`");
            };
            let name = name.trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return fail(line, format!("unknown section [{name}]"));
            }
            if let Some(previous) = sections.get(&name) {
                return fail(line, format!("section [{name}] already started on line {}", previous.line));
            }
            sections.insert(name.clone(), Section { line, entries: Vec::new() });
            current = Some(name);
            continue;
        }
        let Some(section) = current.as_ref().and_then(|n| sections.get_mut(n)) else {
            return fail(line, "entry outside of any section");
        };
        let Some((key, value)) = content.split_once('=') else {
            return fail(line, "expected `key = value`");
        };
        let (key, value) = (key.trim(), value.trim());
        if !is_identifier(key) {
            return fail(line, format!("invalid key `{key}`"));
        }
        if let Some(previous) = section.entries.iter().find(|e| e.key == key) {
            return fail(line, format!("duplicate key `{key}` (first on line {})", previous.line));
        }
        if value.is_empty() {
            return fail(line, format!("`{key}` has no value"));
        }
        section.entries.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line,
        });
    }
    Ok(sections)
}

fn list(value: &str) -> Vec<&str> {
    value.split(',').map(str::trim).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    CheckHfree,
    InducedMetric,
    Invert,
    Construct1d,
    ConstructCis,
    ConstructRp,
    RpBracket,
    Transversal,
    Genericity,
    RenderLevels,
}

impl TaskKind {
    pub const ALL: [TaskKind; 10] = [
        TaskKind::CheckHfree,
        TaskKind::InducedMetric,
        TaskKind::Invert,
        TaskKind::Construct1d,
        TaskKind::ConstructCis,
        TaskKind::ConstructRp,
        TaskKind::RpBracket,
        TaskKind::Transversal,
        TaskKind::Genericity,
        TaskKind::RenderLevels,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::CheckHfree => "check-hfree",
            TaskKind::InducedMetric => "induced-metric",
            TaskKind::Invert => "invert",
            TaskKind::Construct1d => "construct-1d",
            TaskKind::ConstructCis => "construct-cis",
            TaskKind::ConstructRp => "construct-rp",
            TaskKind::RpBracket => "rp-bracket",
            TaskKind::Transversal => "transversal",
            TaskKind::Genericity => "genericity",
            TaskKind::RenderLevels => "render-levels",
        }
    }

    /// Keys accepted in `[task]` besides `kind`, `seed` and `tol`.
    fn keys(self) -> &'static [&'static str] {
        match self {
            TaskKind::CheckHfree | TaskKind::InducedMetric => &["distribution", "map"],
            TaskKind::Invert => &["distribution", "map", "delta_g", "psi"],
            TaskKind::Construct1d => &["field", "f", "curve", "identity_tol"],
            TaskKind::ConstructCis => &["distribution", "functions", "curves", "constant", "identity_tol"],
            TaskKind::ConstructRp => &["casimirs", "metric", "orientation", "h", "f", "curve", "identity_tol"],
            TaskKind::RpBracket => &["casimirs", "metric", "orientation", "f", "g"],
            TaskKind::Transversal => &["field", "f", "seeds", "weights"],
            TaskKind::Genericity => &["distribution", "q", "degree", "n_maps", "n_points"],
            TaskKind::RenderLevels => &["functions", "levels", "include_levels"],
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown task kind `{s}`"))
    }
}

/// Sample points: explicit ones first, then `random` uniform points in `bounds`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSpec {
    pub explicit: Vec<Vec<f64>>,
    pub random: usize,
    pub bounds: Option<Vec<(f64, f64)>>,
}

impl PointSpec {
    pub fn is_empty(&self) -> bool {
        self.explicit.is_empty() && self.random == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransversalMode {
    /// Check a closed-form candidate.
    Verify(Expr),
    /// Glue step functions of tubes around user seeds.
    Glue { seeds: Vec<[f64; 2]>, weights: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskSpec {
    CheckHfree {
        distribution: Distribution,
        map: MapSpec,
    },
    InducedMetric {
        distribution: Distribution,
        map: MapSpec,
    },
    Invert {
        distribution: Distribution,
        map: MapSpec,
        delta_g: Vec<Vec<Expr>>,
        psi: Vec<Expr>,
    },
    Construct1d {
        field: Distribution,
        f: Expr,
        curve: FreeCurve,
        identity_tol: f64,
    },
    ConstructCis {
        distribution: Distribution,
        functions: Vec<Expr>,
        curves: Vec<FreeCurve>,
        constant: Option<f64>,
        identity_tol: f64,
    },
    ConstructRp {
        bracket: RpBracketSpec,
        h: Expr,
        f: Expr,
        curve: FreeCurve,
        identity_tol: f64,
    },
    RpBracket {
        bracket: RpBracketSpec,
        f: Expr,
        g: Expr,
    },
    Transversal {
        field: VectorField,
        mode: TransversalMode,
    },
    Genericity {
        distribution: Distribution,
        q: Vec<usize>,
        degree: u32,
        n_maps: usize,
        n_points: usize,
    },
    RenderLevels {
        /// Output name and function.
        functions: Vec<(String, Expr)>,
        levels: usize,
        include_levels: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub chart: Chart,
    pub kind: TaskKind,
    pub task: TaskSpec,
    pub points: PointSpec,
    pub window: Option<Window>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

/// Named objects declared before the task, with the line they were declared on.
struct Declarations {
    chart: Chart,
    functions: BTreeMap<String, Expr>,
    fields: BTreeMap<String, VectorField>,
    maps: BTreeMap<String, Vec<Expr>>,
    curves: BTreeMap<String, FreeCurve>,
}

impl Declarations {
    /// Parses an expression, substituting declared functions and checking
    /// that every remaining name is a coordinate.
    fn expr(&self, text: &str, line: usize) -> Result<Expr> {
        let mut e = parse(text).map_err(|err| ScenarioError {
            line,
            message: format!("in `{text}`: {err}"),
        })?;
        let names: Vec<String> = e.coordinates().iter().map(|s| s.to_string()).collect();
        for name in names {
            if self.chart.index_of(&name).is_some() {
                continue;
            }
            match self.functions.get(&name) {
                Some(value) => e = e.substitute(&name, value),
                None => return fail(line, format!("unknown name `{name}`")),
            }
        }
        Ok(e)
    }

    fn exprs(&self, text: &str, line: usize) -> Result<Vec<Expr>> {
        list(text).into_iter().map(|t| self.expr(t, line)).collect()
    }

    fn number(&self, text: &str, line: usize) -> Result<f64> {
        let e = self.expr(text, line)?;
        if !e.is_constant() {
            return fail(line, format!("`{text}` is not a constant"));
        }
        let zero = vec![0.0; self.chart.dim()];
        match e.eval(&self.chart, &zero) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => fail(line, format!("`{text}` evaluates to {v}")),
            Err(err) => fail(line, format!("`{text}`: {err}")),
        }
    }

    fn numbers(&self, text: &str, line: usize) -> Result<Vec<f64>> {
        list(text).into_iter().map(|t| self.number(t, line)).collect()
    }

    fn field(&self, name: &str, line: usize) -> Result<VectorField> {
        match self.fields.get(name) {
            Some(f) => Ok(f.clone()),
            None => fail(line, format!("unknown name `{name}` (not a declared field)")),
        }
    }

    fn distribution(&self, entry: &Entry) -> Result<Distribution> {
        let frame = list(&entry.value)
            .into_iter()
            .map(|n| self.field(n, entry.line))
            .collect::<Result<Vec<_>>>()?;
        Distribution::new(frame).map_err(|e| ScenarioError {
            line: entry.line,
            message: e.to_string(),
        })
    }

    fn map(&self, entry: &Entry) -> Result<MapSpec> {
        let name = entry.value.as_str();
        let Some(components) = self.maps.get(name) else {
            return fail(entry.line, format!("unknown name `{name}` (not a declared map)"));
        };
        MapSpec::new(&self.chart, components.clone()).map_err(|e| ScenarioError {
            line: entry.line,
            message: e.to_string(),
        })
    }

    fn curve(&self, name: &str, line: usize) -> Result<FreeCurve> {
        match name {
            "exp" => Ok(FreeCurve::exp()),
            "circle" => Ok(FreeCurve::circle()),
            _ => match self.curves.get(name) {
                Some(c) => Ok(c.clone()),
                None => fail(line, format!("unknown name `{name}` (not a declared curve)")),
            },
        }
    }

    fn range(&self, text: &str, line: usize) -> Result<(f64, f64)> {
        let Some((lo, hi)) = text.split_once("..") else {
            return fail(line, format!("expected `lo..hi`, found `{text}`"));
        };
        let (lo, hi) = (self.number(lo.trim(), line)?, self.number(hi.trim(), line)?);
        if lo >= hi {
            return fail(line, format!("empty range `{text}`"));
        }
        Ok((lo, hi))
    }

    fn ranges(&self, entry: &Entry) -> Result<Vec<(f64, f64)>> {
        list(&entry.value).into_iter().map(|t| self.range(t, entry.line)).collect()
    }

    fn bracket(&self, task: &Section) -> Result<RpBracketSpec> {
        let casimirs = match task.get("casimirs") {
            Some(e) => self.exprs(&e.value, e.line)?,
            None => Vec::new(),
        };
        let metric = match task.get("metric") {
            Some(e) => Some(self.matrix(e)?),
            None => None,
        };
        let orientation = match task.get("orientation") {
            Some(e) => match e.value.as_str() {
                "1" | "+1" => 1,
                "-1" => -1,
                other => return fail(e.line, format!("orientation must be 1 or -1, found `{other}`")),
            },
            None => 1,
        };
        RpBracketSpec::new(&self.chart, casimirs, metric, orientation).map_err(|e| ScenarioError {
            line: task.line,
            message: e.to_string(),
        })
    }

    fn matrix(&self, entry: &Entry) -> Result<Vec<Vec<Expr>>> {
        entry.value.split(';').map(|row| self.exprs(row, entry.line)).collect()
    }
}

fn integer<T: FromStr>(entry: &Entry) -> Result<T> {
    entry.value.parse().map_err(|_| ScenarioError {
        line: entry.line,
        message: format!("`{}` expects a non-negative integer, found `{}`", entry.key, entry.value),
    })
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        let sections = split_sections(text)?;
        let chart_section = match sections.get("chart") {
            Some(s) => s,
            None => return fail(1, "missing [chart] section"),
        };
        let coords = chart_section.require("coordinates", "chart")?;
        let chart = Chart::new(list(&coords.value)).map_err(|e| ScenarioError {
            line: coords.line,
            message: e.to_string(),
        })?;
        reject_unknown_keys(chart_section, &["coordinates"], "chart")?;

        let mut decl = Declarations {
            chart: chart.clone(),
            functions: BTreeMap::new(),
            fields: BTreeMap::new(),
            maps: BTreeMap::new(),
            curves: BTreeMap::new(),
        };
        let declared = |decl: &Declarations, e: &Entry| -> Result<()> {
            let clash = chart.index_of(&e.key).is_some()
                || decl.functions.contains_key(&e.key)
                || decl.fields.contains_key(&e.key)
                || decl.maps.contains_key(&e.key);
            if clash || e.key.contains('.') {
                return fail(e.line, format!("name `{}` is already in use or invalid", e.key));
            }
            Ok(())
        };

        if let Some(s) = sections.get("functions") {
            for e in &s.entries {
                declared(&decl, e)?;
                let value = decl.expr(&e.value, e.line)?;
                decl.functions.insert(e.key.clone(), value);
            }
        }
        if let Some(s) = sections.get("fields") {
            for e in &s.entries {
                declared(&decl, e)?;
                let components = decl.exprs(&e.value, e.line)?;
                let field = VectorField::new(&chart, components).map_err(|err| ScenarioError {
                    line: e.line,
                    message: err.to_string(),
                })?;
                decl.fields.insert(e.key.clone(), field);
            }
        }
        if let Some(s) = sections.get("maps") {
            for e in &s.entries {
                declared(&decl, e)?;
                let components = decl.exprs(&e.value, e.line)?;
                decl.maps.insert(e.key.clone(), components);
            }
        }
        if let Some(s) = sections.get("curves") {
            parse_curves(&mut decl, s)?;
        }

        let points = match sections.get("points") {
            Some(s) => parse_points(&decl, s)?,
            None => PointSpec::default(),
        };
        let window = match sections.get("window") {
            Some(s) => Some(parse_window(&decl, s)?),
            None => None,
        };

        let Some(task) = sections.get("task") else {
            return fail(text.lines().count().max(1), "missing [task] section");
        };
        let kind_entry = task.require("kind", "task")?;
        let kind: TaskKind = kind_entry.value.parse().map_err(|message| ScenarioError {
            line: kind_entry.line,
            message,
        })?;
        let mut allowed = vec!["kind", "seed", "tol"];
        allowed.extend_from_slice(kind.keys());
        reject_unknown_keys(task, &allowed, "task")?;

        let seed = task.get("seed").map(integer::<u64>).transpose()?;
        let tol = match task.get("tol") {
            Some(e) => {
                let v = decl.number(&e.value, e.line)?;
                if v <= 0.0 {
                    return fail(e.line, "tol must be positive");
                }
                Some(v)
            }
            None => None,
        };
        let spec = parse_task(&decl, kind, task)?;

        let scenario = Scenario {
            chart,
            kind,
            task: spec,
            points,
            window,
            seed,
            tol,
        };
        scenario.check_requirements(task.line)?;
        Ok(scenario)
    }

    fn check_requirements(&self, line: usize) -> Result<()> {
        let needs_points = matches!(
            self.kind,
            TaskKind::CheckHfree
                | TaskKind::InducedMetric
                | TaskKind::Invert
                | TaskKind::Construct1d
                | TaskKind::ConstructCis
                | TaskKind::ConstructRp
                | TaskKind::RpBracket
        );
        if needs_points && self.points.is_empty() {
            return fail(line, format!("task {} needs sample points in [points]", self.kind));
        }
        if self.kind == TaskKind::Genericity && self.points.bounds.is_none() {
            return fail(line, "task genericity needs `bounds` in [points]");
        }
        if matches!(self.kind, TaskKind::Transversal | TaskKind::RenderLevels) {
            if self.window.is_none() {
                return fail(line, format!("task {} needs a [window] section", self.kind));
            }
            if self.chart.dim() != 2 {
                return fail(line, format!("task {} needs a two-dimensional chart", self.kind));
            }
        }
        Ok(())
    }
}

fn reject_unknown_keys(section: &Section, allowed: &[&str], name: &str) -> Result<()> {
    for e in &section.entries {
        if !allowed.contains(&e.key.as_str()) {
            return fail(e.line, format!("unknown key `{}` in [{name}]", e.key));
        }
    }
    Ok(())
}

fn parse_curves(decl: &mut Declarations, section: &Section) -> Result<()> {
    // dotted keys `name.variable`, `name.a`, `name.b`, `name.interval`, `name.domain`
    let mut grouped: BTreeMap<&str, Vec<&Entry>> = BTreeMap::new();
    for e in &section.entries {
        let Some((name, field)) = e.key.split_once('.') else {
            return fail(e.line, format!("curve keys look like `name.a`, found `{}`", e.key));
        };
        if !["variable", "a", "b", "interval", "domain"].contains(&field) {
            return fail(e.line, format!("unknown curve key `{field}`"));
        }
        if name == "exp" || name == "circle" {
            return fail(e.line, format!("`{name}` is a built-in curve"));
        }
        grouped.entry(name).or_default().push(e);
    }
    for (name, entries) in grouped {
        let get = |field: &str| entries.iter().find(|e| e.key.ends_with(&format!(".{field}"))).copied();
        let first = entries[0].line;
        let need = |field: &str| match get(field) {
            Some(e) => Ok(e),
            None => fail(first, format!("curve `{name}` needs `{name}.{field}`")),
        };
        let variable = get("variable").map_or("t", |e| e.value.as_str());
        let local = Chart::new([variable]).map_err(|e| ScenarioError {
            line: first,
            message: e.to_string(),
        })?;
        let component = |e: &Entry| -> Result<Expr> {
            let x = parse(&e.value).map_err(|err| ScenarioError {
                line: e.line,
                message: format!("in `{}`: {err}", e.value),
            })?;
            if let Some(bad) = x.coordinates().into_iter().find(|c| local.index_of(c).is_none()) {
                return fail(e.line, format!("unknown name `{bad}` in curve `{name}`"));
            }
            Ok(x)
        };
        let (a, b) = (component(need("a")?)?, component(need("b")?)?);
        let interval_entry = need("interval")?;
        let interval = decl.range(&interval_entry.value, interval_entry.line)?;
        let domain = match get("domain").map(|e| (e.value.as_str(), e.line)) {
            None | Some(("line", _)) => CurveDomain::Line,
            Some(("circle", _)) => CurveDomain::Circle,
            Some((other, line)) => return fail(line, format!("curve domain must be line or circle, found `{other}`")),
        };
        let curve = FreeCurve::custom(variable, a, b, interval, domain).map_err(|e| ScenarioError {
            line: first,
            message: format!("curve `{name}`: {e}"),
        })?;
        decl.curves.insert(name.to_string(), curve);
    }
    Ok(())
}

fn parse_points(decl: &Declarations, section: &Section) -> Result<PointSpec> {
    let m = decl.chart.dim();
    let mut spec = PointSpec::default();
    for e in &section.entries {
        match e.key.as_str() {
            "random" => spec.random = integer(e)?,
            "bounds" => {
                let b = decl.ranges(e)?;
                if b.len() != m {
                    return fail(e.line, format!("bounds need {m} ranges, found {}", b.len()));
                }
                spec.bounds = Some(b);
            }
            _ => {
                let p = decl.numbers(&e.value, e.line)?;
                if p.len() != m {
                    return fail(e.line, format!("point `{}` needs {m} coordinates, found {}", e.key, p.len()));
                }
                spec.explicit.push(p);
            }
        }
    }
    if spec.random > 0 && spec.bounds.is_none() {
        return fail(section.line, "`random` points need `bounds`");
    }
    Ok(spec)
}

fn parse_window(decl: &Declarations, section: &Section) -> Result<Window> {
    reject_unknown_keys(section, &["bounds", "resolution"], "window")?;
    let bounds_entry = section.require("bounds", "window")?;
    let bounds = decl.ranges(bounds_entry)?;
    if bounds.len() != 2 {
        return fail(bounds_entry.line, "a window needs two ranges");
    }
    let (nx, ny) = match section.get("resolution") {
        None => (101, 101),
        Some(e) => {
            let parts = list(&e.value);
            let parse_one = |s: &str| {
                s.parse::<usize>().map_err(|_| ScenarioError {
                    line: e.line,
                    message: format!("resolution must be an integer, found `{s}`"),
                })
            };
            match parts.as_slice() {
                [n] => (parse_one(n)?, parse_one(n)?),
                [a, b] => (parse_one(a)?, parse_one(b)?),
                _ => return fail(e.line, "resolution is `n` or `nx, ny`"),
            }
        }
    };
    Window::new(bounds[0], bounds[1], nx, ny).map_err(|e| ScenarioError {
        line: section.line,
        message: e.to_string(),
    })
}

fn parse_task(decl: &Declarations, kind: TaskKind, task: &Section) -> Result<TaskSpec> {
    let req = |key: &str| task.require(key, "task");
    let identity_tol = |default: f64| -> Result<f64> {
        match task.get("identity_tol") {
            Some(e) => decl.number(&e.value, e.line),
            None => Ok(default),
        }
    };
    let single_field = |e: &Entry| -> Result<VectorField> { decl.field(e.value.as_str(), e.line) };
    Ok(match kind {
        TaskKind::CheckHfree => TaskSpec::CheckHfree {
            distribution: decl.distribution(req("distribution")?)?,
            map: decl.map(req("map")?)?,
        },
        TaskKind::InducedMetric => TaskSpec::InducedMetric {
            distribution: decl.distribution(req("distribution")?)?,
            map: decl.map(req("map")?)?,
        },
        TaskKind::Invert => {
            let distribution = decl.distribution(req("distribution")?)?;
            let k = distribution.rank();
            let dg_entry = req("delta_g")?;
            let delta_g = decl.matrix(dg_entry)?;
            if delta_g.len() != k || delta_g.iter().any(|r| r.len() != k) {
                return fail(dg_entry.line, format!("delta_g must be {k} x {k}"));
            }
            let psi = match task.get("psi") {
                Some(e) => decl.exprs(&e.value, e.line)?,
                None => vec![Expr::num(0.0); k],
            };
            if psi.len() != k {
                return fail(task.get("psi").map_or(task.line, |e| e.line), format!("psi needs {k} entries"));
            }
            TaskSpec::Invert {
                distribution,
                map: decl.map(req("map")?)?,
                delta_g,
                psi,
            }
        }
        TaskKind::Construct1d => {
            let field = single_field(req("field")?)?;
            let f = req("f")?;
            let curve = req("curve")?;
            TaskSpec::Construct1d {
                field: Distribution::new(vec![field]).map_err(|e| ScenarioError {
                    line: task.line,
                    message: e.to_string(),
                })?,
                f: decl.expr(&f.value, f.line)?,
                curve: decl.curve(&curve.value, curve.line)?,
                identity_tol: identity_tol(1e-9)?,
            }
        }
        TaskKind::ConstructCis => {
            let distribution = decl.distribution(req("distribution")?)?;
            let f = req("functions")?;
            let functions = decl.exprs(&f.value, f.line)?;
            let c = req("curves")?;
            let curves = list(&c.value)
                .into_iter()
                .map(|n| decl.curve(n, c.line))
                .collect::<Result<Vec<_>>>()?;
            if functions.len() != distribution.rank() || curves.len() != functions.len() {
                return fail(
                    c.line,
                    format!("need one function and one curve per field ({})", distribution.rank()),
                );
            }
            let constant = match task.get("constant") {
                Some(e) => Some(decl.number(&e.value, e.line)?),
                None => None,
            };
            TaskSpec::ConstructCis {
                distribution,
                functions,
                curves,
                constant,
                identity_tol: identity_tol(1e-8)?,
            }
        }
        TaskKind::ConstructRp => {
            let (h, f, curve) = (req("h")?, req("f")?, req("curve")?);
            TaskSpec::ConstructRp {
                bracket: decl.bracket(task)?,
                h: decl.expr(&h.value, h.line)?,
                f: decl.expr(&f.value, f.line)?,
                curve: decl.curve(&curve.value, curve.line)?,
                identity_tol: identity_tol(1e-9)?,
            }
        }
        TaskKind::RpBracket => {
            let (f, g) = (req("f")?, req("g")?);
            TaskSpec::RpBracket {
                bracket: decl.bracket(task)?,
                f: decl.expr(&f.value, f.line)?,
                g: decl.expr(&g.value, g.line)?,
            }
        }
        TaskKind::Transversal => {
            let field = single_field(req("field")?)?;
            let mode = match (task.get("f"), task.get("seeds")) {
                (Some(f), None) => TransversalMode::Verify(decl.expr(&f.value, f.line)?),
                (None, Some(s)) => {
                    let seeds = s
                        .value
                        .split(';')
                        .map(|p| {
                            let v = decl.numbers(p, s.line)?;
                            match v.as_slice() {
                                [x, y] => Ok([*x, *y]),
                                _ => fail(s.line, format!("seed `{}` needs two coordinates", p.trim())),
                            }
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let weights = match task.get("weights") {
                        Some(w) => {
                            let w_values = decl.numbers(&w.value, w.line)?;
                            if w_values.len() != seeds.len() {
                                return fail(w.line, format!("{} weights for {} seeds", w_values.len(), seeds.len()));
                            }
                            w_values
                        }
                        None => vec![1.0; seeds.len()],
                    };
                    TransversalMode::Glue { seeds, weights }
                }
                _ => return fail(task.line, "transversal takes exactly one of `f` or `seeds`"),
            };
            TaskSpec::Transversal { field, mode }
        }
        TaskKind::Genericity => {
            let q_entry = req("q")?;
            let q = list(&q_entry.value)
                .into_iter()
                .map(|s| {
                    s.parse::<usize>().map_err(|_| ScenarioError {
                        line: q_entry.line,
                        message: format!("q must be a list of integers, found `{s}`"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            TaskSpec::Genericity {
                distribution: decl.distribution(req("distribution")?)?,
                q,
                degree: task.get("degree").map(integer).transpose()?.unwrap_or(3),
                n_maps: integer(req("n_maps")?)?,
                n_points: integer(req("n_points")?)?,
            }
        }
        TaskKind::RenderLevels => {
            let f = req("functions")?;
            let functions = list(&f.value)
                .into_iter()
                .enumerate()
                .map(|(i, text)| {
                    let name = if decl.functions.contains_key(text) {
                        text.to_string()
                    } else {
                        format!("f{}", i + 1)
                    };
                    Ok((name, decl.expr(text, f.line)?))
                })
                .collect::<Result<Vec<_>>>()?;
            TaskSpec::RenderLevels {
                functions,
                levels: task.get("levels").map(integer).transpose()?.unwrap_or(15),
                include_levels: match task.get("include_levels") {
                    Some(e) => decl.numbers(&e.value, e.line)?,
                    None => Vec::new(),
                },
            }
        }
    })
}
