//! Line-oriented text formats for datasets, run results and point sets.
//!
//! Every file starts with `format <kind> 1`. Numbers are written with 17
//! significant digits so that a write/read cycle is exact. Point, feature and
//! coordinate indices are 1-based, and multi-indices are written as
//! `(1,2)` with `()` for order zero.
//!
//! ```text
//! format holgrim-dataset 1
//! dim 2
//! outputs 1
//! gamma 2.0000000000000000e0
//! points 3
//! features 1
//! point 1 <x_1> <x_2>
//! ...
//! feature 1 coefficient <a> scaling <A>
//! analytic gaussian width <s> centre <μ…> weight <w…>
//! jet 1 0 () <values…>
//! jet 1 1 (1) <values…>
//! ...
//! end
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::combinatorics::{JetLayout, MultiIndex};
use crate::error::{Error, Result};
use crate::holgrim::{Problem, RunResult, Termination};
use crate::jets::{regularity_floor, Domain, JetFunction};
use crate::problems::{Analytic, Feature};
use crate::recombination::ReductionStatus;

pub const DATASET_FORMAT: &str = "holgrim-dataset";
pub const RESULT_FORMAT: &str = "holgrim-result";
pub const POINTS_FORMAT: &str = "holgrim-points";
pub const FORMAT_VERSION: u32 = 1;

/// Scientific notation with 17 significant digits, enough to read back the
/// same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn nums(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ")
}

fn header(out: &mut String, kind: &str) {
    writeln!(out, "format {kind} {FORMAT_VERSION}").unwrap();
}

/// Serialises a problem as a dataset file.
pub fn write_dataset(problem: &Problem) -> String {
    let domain = problem.domain();
    let layout = problem.layout();
    let mut out = String::new();
    header(&mut out, DATASET_FORMAT);
    writeln!(out, "dim {}", problem.dim()).unwrap();
    writeln!(out, "outputs {}", problem.outputs()).unwrap();
    writeln!(out, "gamma {}", num(problem.gamma())).unwrap();
    writeln!(out, "points {}", domain.len()).unwrap();
    writeln!(out, "features {}", problem.len()).unwrap();
    for (p, x) in domain.points().enumerate() {
        writeln!(out, "point {} {}", p + 1, nums(x)).unwrap();
    }
    let c = problem.outputs();
    for (i, f) in problem.features().iter().enumerate() {
        writeln!(
            out,
            "feature {} coefficient {} scaling {}",
            i + 1,
            num(problem.coefficients()[i]),
            num(problem.scalings()[i])
        )
        .unwrap();
        if let Some(a) = problem.analytic() {
            match &a.features[i] {
                Feature::Gaussian { centre, width, weight } => writeln!(
                    out,
                    "analytic gaussian width {} centre {} weight {}",
                    num(*width),
                    nums(centre),
                    nums(weight)
                ),
                Feature::Monomial { exponents, weight } => writeln!(
                    out,
                    "analytic monomial exponents {} weight {}",
                    exponents.iter().map(u32::to_string).collect::<Vec<_>>().join(" "),
                    nums(weight)
                ),
            }
            .unwrap();
        }
        for p in 0..domain.len() {
            let block = f.point_block(p);
            for j in 0..=layout.max_order() {
                for (rank, basis) in layout.basis(j).iter().enumerate() {
                    let start = layout.slot(j, rank, 0);
                    writeln!(out, "jet {} {j} {basis} {}", p + 1, nums(&block[start..start + c])).unwrap();
                }
            }
        }
    }
    out.push_str("end\n");
    out
}

/// Cursor over the meaningful lines of a file (blank lines and `#` comments
/// are skipped).
struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        Lines { path, inner: text.lines().enumerate().peekable(), last: 0 }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse { path: self.path.to_path_buf(), line, msg: msg.into() }
    }

    fn skip_blank(&mut self) {
        while let Some((_, l)) = self.inner.peek() {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                self.inner.next();
            } else {
                break;
            }
        }
    }

    fn peek_key(&mut self) -> Option<&str> {
        self.skip_blank();
        self.inner.peek().and_then(|(_, l)| l.split_whitespace().next())
    }

    /// Next line split into tokens; errors at end of file.
    fn next(&mut self) -> Result<(usize, Vec<&'a str>)> {
        self.skip_blank();
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l.split_whitespace().collect()))
            }
            None => Err(self.err(self.last + 1, "unexpected end of file")),
        }
    }

    /// Next line, which must start with `key`; returns the remaining tokens.
    fn expect(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (line, tokens) = self.next()?;
        if tokens.first() != Some(&key) {
            return Err(self.err(line, format!("expected `{key}`, found `{}`", tokens.join(" "))));
        }
        Ok((line, tokens[1..].to_vec()))
    }

    fn single<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (line, rest) = self.expect(key)?;
        if rest.len() != 1 {
            return Err(self.err(line, format!("`{key}` takes one value")));
        }
        self.parse(line, rest[0], key)
    }

    fn parse<T: std::str::FromStr>(&self, line: usize, token: &str, what: &str) -> Result<T> {
        token
            .parse()
            .map_err(|_| self.err(line, format!("cannot read {what} from `{token}`")))
    }

    fn floats(&self, line: usize, tokens: &[&str], what: &str) -> Result<Vec<f64>> {
        tokens
            .iter()
            .map(|t| {
                let v: f64 = self.parse(line, t, what)?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(self.err(line, format!("{what} must be finite")))
                }
            })
            .collect()
    }

    /// 1-based index in `1..=max`, returned 0-based.
    fn index(&self, line: usize, token: &str, max: usize, what: &str) -> Result<usize> {
        let v: usize = self.parse(line, token, what)?;
        if v == 0 || v > max {
            return Err(self.err(line, format!("{what} {v} outside 1..={max}")));
        }
        Ok(v - 1)
    }

    fn format_header(&mut self, kind: &str) -> Result<()> {
        let (line, rest) = self.expect("format")?;
        if rest.len() != 2 || rest[0] != kind {
            return Err(self.err(line, format!("expected `format {kind} {FORMAT_VERSION}`")));
        }
        if rest[1] != FORMAT_VERSION.to_string() {
            return Err(self.err(line, format!("unsupported {kind} version {}", rest[1])));
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        self.expect("end")?;
        if let Some(key) = self.peek_key().map(str::to_owned) {
            let (line, _) = self.next()?;
            return Err(self.err(line, format!("content after `end`: `{key}`")));
        }
        Ok(())
    }
}

fn parse_multi_index(text: &str, d: usize) -> Option<MultiIndex> {
    let inner = text.strip_prefix('(')?.strip_suffix(')')?;
    if inner.is_empty() {
        return Some(MultiIndex::empty());
    }
    let mut indices = Vec::new();
    for part in inner.split(',') {
        let v: usize = part.trim().parse().ok()?;
        if v == 0 {
            return None;
        }
        indices.push(v - 1);
    }
    MultiIndex::new(indices, d).ok()
}

fn read_points(lines: &mut Lines, dim: usize, count: usize) -> Result<Domain> {
    let mut coords = vec![f64::NAN; dim * count];
    let mut seen = vec![false; count];
    for _ in 0..count {
        let (line, rest) = lines.expect("point")?;
        if rest.len() != dim + 1 {
            return Err(lines.err(line, format!("point needs an index and {dim} coordinates")));
        }
        let p = lines.index(line, rest[0], count, "point index")?;
        if std::mem::replace(&mut seen[p], true) {
            return Err(lines.err(line, format!("point {} listed twice", p + 1)));
        }
        coords[p * dim..(p + 1) * dim].copy_from_slice(&lines.floats(line, &rest[1..], "coordinate")?);
    }
    Domain::from_flat(dim, coords).map_err(|e| lines.err(lines.last, e.to_string()))
}

fn read_analytic(lines: &mut Lines, dim: usize, outputs: usize) -> Result<Feature> {
    let (line, rest) = lines.expect("analytic")?;
    let bad = || lines.err(line, "malformed analytic line");
    match rest.first().copied() {
        Some("gaussian") => {
            if rest.len() != 3 + 1 + dim + 1 + outputs || rest[1] != "width" || rest[3] != "centre" || rest[4 + dim] != "weight" {
                return Err(bad());
            }
            let width: f64 = lines.parse(line, rest[2], "width")?;
            Ok(Feature::Gaussian {
                centre: lines.floats(line, &rest[4..4 + dim], "centre")?,
                width,
                weight: lines.floats(line, &rest[5 + dim..], "weight")?,
            })
        }
        Some("monomial") => {
            if rest.len() != 2 + dim + 1 + outputs || rest[1] != "exponents" || rest[2 + dim] != "weight" {
                return Err(bad());
            }
            let exponents = rest[2..2 + dim]
                .iter()
                .map(|t| lines.parse(line, t, "exponent"))
                .collect::<Result<Vec<u32>>>()?;
            Ok(Feature::Monomial { exponents, weight: lines.floats(line, &rest[3 + dim..], "weight")? })
        }
        _ => Err(bad()),
    }
}

/// Parses a dataset. Scalings are checked against exact Lip norms.
pub fn parse_dataset(path: &Path, text: &str) -> Result<Problem> {
    let mut lines = Lines::new(path, text);
    lines.format_header(DATASET_FORMAT)?;
    let dim: usize = lines.single("dim")?;
    let outputs: usize = lines.single("outputs")?;
    let (gamma_line, gamma_tok) = lines.expect("gamma")?;
    if gamma_tok.len() != 1 {
        return Err(lines.err(gamma_line, "`gamma` takes one value"));
    }
    let gamma: f64 = lines.parse(gamma_line, gamma_tok[0], "gamma")?;
    let k = regularity_floor(gamma).map_err(|e| lines.err(gamma_line, e.to_string()))?;
    let count: usize = lines.single("points")?;
    let n: usize = lines.single("features")?;
    if dim == 0 || outputs == 0 || count == 0 || n == 0 {
        return Err(lines.err(lines.last, "dim, outputs, points and features must be positive"));
    }
    let layout = Arc::new(JetLayout::new(dim, outputs, k).map_err(|e| lines.err(gamma_line, e.to_string()))?);
    let domain = Arc::new(read_points(&mut lines, dim, count)?);

    let block = layout.point_block();
    let per_feature = count * layout.basis_count_upto(k);
    let mut features = Vec::with_capacity(n);
    let mut coefficients = Vec::with_capacity(n);
    let mut scalings = Vec::with_capacity(n);
    let mut analytic = Vec::new();
    for i in 0..n {
        let (line, rest) = lines.expect("feature")?;
        if rest.len() != 5 || rest[1] != "coefficient" || rest[3] != "scaling" {
            return Err(lines.err(line, "expected `feature <i> coefficient <a> scaling <A>`"));
        }
        if lines.index(line, rest[0], n, "feature index")? != i {
            return Err(lines.err(line, format!("features must appear in order, expected {}", i + 1)));
        }
        coefficients.push(lines.floats(line, &rest[2..3], "coefficient")?[0]);
        scalings.push(lines.floats(line, &rest[4..5], "scaling")?[0]);
        if lines.peek_key() == Some("analytic") {
            if analytic.len() != i {
                return Err(lines.err(lines.last + 1, "analytic lines must be given for every feature or none"));
            }
            analytic.push(read_analytic(&mut lines, dim, outputs)?);
        }

        let mut table = vec![f64::NAN; count * block];
        let mut seen = vec![false; count * block];
        for _ in 0..per_feature {
            let (line, rest) = lines.expect("jet")?;
            if rest.len() != 3 + outputs {
                return Err(lines.err(line, format!("jet needs point, order, index and {outputs} values")));
            }
            let p = lines.index(line, rest[0], count, "point index")?;
            let j: usize = lines.parse(line, rest[1], "order")?;
            if j > k {
                return Err(lines.err(line, format!("order {j} exceeds k = {k}")));
            }
            let basis = parse_multi_index(rest[2], dim)
                .filter(|b| b.order() == j)
                .ok_or_else(|| lines.err(line, format!("`{}` is not an ordered index of order {j}", rest[2])))?;
            let start = p * block + layout.slot(j, basis.rank(dim), 0);
            if std::mem::replace(&mut seen[start], true) {
                return Err(lines.err(line, format!("duplicate jet entry {} {j} {basis}", p + 1)));
            }
            table[start..start + outputs].copy_from_slice(&lines.floats(line, &rest[3..], "jet value")?);
        }
        let jet = JetFunction::with_layout(domain.clone(), layout.clone(), gamma, table)
            .map_err(|e| lines.err(line, format!("feature {}: {e}", i + 1)))?;
        features.push(jet);
    }
    lines.finish()?;
    if !analytic.is_empty() && analytic.len() != n {
        return Err(lines.err(lines.last, "analytic lines must be given for every feature or none"));
    }
    let problem = Problem::new(features, coefficients, scalings).map_err(|e| lines.err(lines.last, e.to_string()))?;
    if analytic.is_empty() {
        Ok(problem)
    } else {
        let a = Analytic::new(gamma, dim, outputs, analytic).map_err(|e| lines.err(lines.last, e.to_string()))?;
        problem.with_analytic(a).map_err(|e| lines.err(lines.last, e.to_string()))
    }
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn load_dataset(path: &Path) -> Result<Problem> {
    parse_dataset(path, &read_to_string(path)?)
}

pub fn write_points(domain: &Domain) -> String {
    let mut out = String::new();
    header(&mut out, POINTS_FORMAT);
    writeln!(out, "dim {}", domain.dim()).unwrap();
    writeln!(out, "points {}", domain.len()).unwrap();
    for (p, x) in domain.points().enumerate() {
        writeln!(out, "point {} {}", p + 1, nums(x)).unwrap();
    }
    out.push_str("end\n");
    out
}

pub fn parse_points(path: &Path, text: &str) -> Result<Domain> {
    let mut lines = Lines::new(path, text);
    lines.format_header(POINTS_FORMAT)?;
    let dim: usize = lines.single("dim")?;
    let count: usize = lines.single("points")?;
    if dim == 0 || count == 0 {
        return Err(lines.err(lines.last, "dim and points must be positive"));
    }
    let domain = read_points(&mut lines, dim, count)?;
    lines.finish()?;
    Ok(domain)
}

/// Loads the point set of either a points file or a dataset.
pub fn load_domain(path: &Path) -> Result<Arc<Domain>> {
    let text = read_to_string(path)?;
    if text.trim_start().starts_with(&format!("format {DATASET_FORMAT}")) {
        Ok(parse_dataset(path, &text)?.domain().clone())
    } else {
        Ok(Arc::new(parse_points(path, &text)?))
    }
}

/// Serialises a run. Only the `timing` line depends on wall-clock time.
pub fn write_result(result: &RunResult, dataset: &str) -> String {
    let cfg = &result.config;
    let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    let mut out = String::new();
    header(&mut out, RESULT_FORMAT);
    writeln!(out, "dataset {dataset}").unwrap();
    writeln!(
        out,
        "config epsilon {} epsilon0 {} order-level {} max-steps {} shuffles {} budgets {} seed {}",
        num(cfg.epsilon),
        num(cfg.epsilon0),
        cfg.order_level,
        cfg.max_steps,
        list(&cfg.shuffles),
        list(&cfg.budgets),
        cfg.seed
    )
    .unwrap();
    match result.termination {
        Termination::Criterion { at_step } => writeln!(out, "termination criterion {at_step}").unwrap(),
        Termination::MaxSteps => writeln!(out, "termination max-steps").unwrap(),
    }
    writeln!(out, "criterion-met {}", result.criterion_met).unwrap();
    writeln!(out, "steps {}", result.steps.len()).unwrap();
    for s in &result.steps {
        let status = match s.status {
            ReductionStatus::WithinTolerance => "ok".to_string(),
            ReductionStatus::ResidualExceeded { allowed, .. } => format!("exceeded {}", num(allowed)),
        };
        writeln!(
            out,
            "step {} points {} score {} shuffle {} seeds {} residual {} status {status}",
            s.step,
            s.new_points.iter().map(|p| (p + 1).to_string()).collect::<Vec<_>>().join(","),
            num(s.score),
            s.chosen_shuffle,
            s.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
            num(s.reduction_residual),
        )
        .unwrap();
        for &(i, c) in &s.coefficients {
            writeln!(out, "step-coef {} {} {}", s.step, i + 1, num(c)).unwrap();
        }
    }
    writeln!(
        out,
        "selected {}",
        result.selected_points.iter().map(|p| (p + 1).to_string()).collect::<Vec<_>>().join(" ")
    )
    .unwrap();
    writeln!(out, "support {}", result.support.len()).unwrap();
    for (&i, &c) in result.support.iter().zip(&result.coefficients) {
        writeln!(out, "coef {} {}", i + 1, num(c)).unwrap();
    }
    writeln!(out, "coefficient-sum {}", num(result.coefficient_sum)).unwrap();
    writeln!(out, "norm-budget {}", num(result.norm_budget)).unwrap();
    writeln!(out, "final-functional-max {}", num(result.final_functional_max)).unwrap();
    writeln!(out, "final-lambda-max {}", num(result.final_lambda_max)).unwrap();
    writeln!(out, "min-separation {}", num(result.min_separation)).unwrap();
    let t = &result.timings;
    writeln!(
        out,
        "timing extension {} matrix {} reduction {} scoring {}",
        num(t.extension.as_secs_f64()),
        num(t.matrix.as_secs_f64()),
        num(t.reduction.as_secs_f64()),
        num(t.scoring.as_secs_f64())
    )
    .unwrap();
    out.push_str("end\n");
    out
}

/// The parts of a result file needed to re-score it.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultSummary {
    pub order_level: usize,
    pub coefficients: Vec<(usize, f64)>,
    pub coefficient_sum: f64,
    pub final_functional_max: f64,
    pub final_lambda_max: f64,
}

pub fn parse_result(path: &Path, text: &str) -> Result<ResultSummary> {
    let mut lines = Lines::new(path, text);
    lines.format_header(RESULT_FORMAT)?;
    let mut summary = ResultSummary {
        order_level: 0,
        coefficients: Vec::new(),
        coefficient_sum: f64::NAN,
        final_functional_max: f64::NAN,
        final_lambda_max: f64::NAN,
    };
    let mut saw_config = false;
    loop {
        let (line, tokens) = lines.next()?;
        let value = |i: usize| -> Result<f64> {
            let t = tokens.get(i).ok_or_else(|| lines.err(line, "missing value"))?;
            lines.parse(line, t, tokens[0])
        };
        match tokens[0] {
            "end" => break,
            "config" => {
                let pos = tokens
                    .iter()
                    .position(|&t| t == "order-level")
                    .ok_or_else(|| lines.err(line, "config lacks order-level"))?;
                let t = tokens.get(pos + 1).ok_or_else(|| lines.err(line, "missing order level"))?;
                summary.order_level = lines.parse(line, t, "order level")?;
                saw_config = true;
            }
            "coef" => {
                if tokens.len() != 3 {
                    return Err(lines.err(line, "expected `coef <feature> <value>`"));
                }
                let i: usize = lines.parse(line, tokens[1], "feature index")?;
                if i == 0 {
                    return Err(lines.err(line, "feature indices are 1-based"));
                }
                summary.coefficients.push((i - 1, value(2)?));
            }
            "coefficient-sum" => summary.coefficient_sum = value(1)?,
            "final-functional-max" => summary.final_functional_max = value(1)?,
            "final-lambda-max" => summary.final_lambda_max = value(1)?,
            _ => {}
        }
    }
    if !saw_config {
        return Err(lines.err(lines.last, "result file has no config line"));
    }
    Ok(summary)
}

/// Recomputed figures for a stored result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rescore {
    pub coefficient_sum: f64,
    pub final_functional_max: f64,
    pub final_lambda_max: f64,
}

impl Rescore {
    /// Largest absolute difference to the stored values.
    pub fn deviation(&self, stored: &ResultSummary) -> f64 {
        [
            (self.coefficient_sum - stored.coefficient_sum).abs(),
            (self.final_functional_max - stored.final_functional_max).abs(),
            (self.final_lambda_max - stored.final_lambda_max).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Rebuilds `u` from the stored coefficients and recomputes the
/// certificates on the dataset.
pub fn rescore(problem: &Problem, summary: &ResultSummary) -> Result<Rescore> {
    let q = summary.order_level;
    let u = problem.assemble(&summary.coefficients)?;
    let diff = problem.target().sub(&u)?;
    let layout = problem.layout();
    let width = layout.slots_upto(q);
    let final_functional_max = diff
        .table()
        .chunks(layout.point_block())
        .flat_map(|b| b[..width].iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let final_lambda_max = diff.lambda_profile(q)?.into_iter().fold(0.0, f64::max);
    let coefficient_sum = summary
        .coefficients
        .iter()
        .map(|&(i, c)| c.abs() * problem.scalings()[i])
        .sum();
    Ok(Rescore { coefficient_sum, final_functional_max, final_lambda_max })
}
