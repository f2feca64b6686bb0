//! Scenario files, the pipeline runner, the regression table and the
//! weight-system enumerator.
//!
//! A scenario is line oriented. Header lines (`format: 1`, `name:`,
//! `weights:`, `equation:`, `plan:`, `param:`, `external`, `published`) set
//! up the variety, step lines drive the pipeline:
//!
//! ```text
//! seed
//! quotient diagonal: <turns>
//! blowup locus <indices>: fiber <NAME>
//! involution: <blocks>
//! blowup points: swapped | pairs <n> | (pA pB) pC ...
//! check
//! quotient sigma
//! resolve: <n> | <n_1> <n_2> ...
//! ```
//!
//! `#` starts a comment. On `external` lines the comment is the provenance
//! note and is mandatory. Integer values on `external` and `blowup points:
//! pairs` lines may be linear in the declared parameter, e.g. `2k+1`.

use crate::cayley::{
    acts_freely, cayley_form, generate_group, group_g_generators, group_gn_generators, preserves, su4_induced_form,
    CoordinatePairing,
};
use crate::coeff::{gauss, gauss_int, Coef, GaussQ, Q};
use crate::euler::{chi_on_closed_stratum, chi_tower};
use crate::involution::{
    check_condition, fixed_points_modulo, holomorphic_fixed_locus, parse_turn, points_on_support, preserves_variety,
    quotient_point_class, singular_points, validate_involution, ConditionReport, FixedPointSet, Grant, InvolutionSpec,
    ProjPoint, SingularEntry, Verdict,
};
use crate::ledger::{
    ahat_check, blowup_locus, blowup_points, compare_published, glue_ale, h31_crosscheck, lefschetz_seed,
    quotient_antiholomorphic, quotient_holomorphic, FiberData, HolomorphicAction, PointOrbit, PublishedCheck,
    SpaceState, Stage, FIBER_C2_Z2, FIBER_C3_Z3, FIBER_C3_Z5,
};
use crate::variety::{
    chern_class_zero, singular_locus, transversality_check, validate_tower, FermatEquation,
    FermatTower, PlanStep, PointCount, SingularClass, SingularityRecord, Term,
};
use crate::wps::WeightSystem;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;
pub const FIXTURE_ENV: &str = "SPIN7_FIXTURE_DIR";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum ShellError {
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Parse(Vec<Diagnostic>),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line} ({step}): {message}")]
    Step { line: usize, step: String, message: String },
    #[error("parameter {name} = {value} is not among the declared values")]
    BadParam { name: String, value: i64 },
    #[error("max degree {0} exceeds the cap {1}")]
    BoundTooLarge(i64, i64),
}

/// `coef * param + constant`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Linear {
    pub coef: i64,
    pub constant: i64,
}

impl Linear {
    pub fn constant(c: i64) -> Self {
        Linear { coef: 0, constant: c }
    }

    pub fn eval(&self, param: Option<i64>) -> Option<i64> {
        match (self.coef, param) {
            (0, _) => Some(self.constant),
            (c, Some(k)) => Some(c * k + self.constant),
            (_, None) => None,
        }
    }
}

impl fmt::Display for Linear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.coef, self.constant) {
            (0, c) => write!(f, "{c}"),
            (a, 0) => write!(f, "{a}k"),
            (a, c) if c < 0 => write!(f, "{a}k{c}"),
            (a, c) => write!(f, "{a}k+{c}"),
        }
    }
}

fn parse_linear(s: &str, param: Option<&str>) -> Result<Linear, String> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty value".into());
    }
    let mut out = Linear::constant(0);
    let mut rest = s.as_str();
    while !rest.is_empty() {
        let (sign, body) = match rest.as_bytes()[0] {
            b'-' => (-1, &rest[1..]),
            b'+' => (1, &rest[1..]),
            _ => (1, rest),
        };
        let end = body.find(['+', '-']).unwrap_or(body.len());
        let tok = &body[..end];
        rest = &body[end..];
        let digits = tok.trim_end_matches(|c: char| c.is_ascii_alphabetic());
        let var = &tok[digits.len()..];
        let n: i64 = if digits.is_empty() {
            1
        } else {
            digits.parse().map_err(|_| format!("bad integer `{tok}`"))?
        };
        if var.is_empty() {
            out.constant += sign * n;
        } else if Some(var) == param {
            out.coef += sign * n;
        } else {
            return Err(format!("unknown name `{var}`"));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct External {
    pub key: String,
    pub values: Vec<Linear>,
    pub provenance: String,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FiberSpec {
    Named(String, FiberData),
}

pub fn named_fiber(name: &str) -> Option<FiberData> {
    match name {
        "C3_Z5" => Some(FIBER_C3_Z5),
        "C3_Z3" => Some(FIBER_C3_Z3),
        "C2_Z2" => Some(FIBER_C2_Z2),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointChoice {
    /// Every swapped pair of singular points.
    Swapped,
    /// The given number of pairs, taken from the end of the inventory.
    Pairs(Linear),
    Labels(Vec<PointOrbit>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Seed,
    QuotientDiagonal(Vec<Q>),
    BlowupLocus { support: Vec<usize>, fiber: FiberSpec },
    Involution(InvolutionSpec),
    BlowupPoints(PointChoice),
    Check,
    QuotientSigma,
    Resolve(Vec<u8>),
}

impl Step {
    fn keyword(&self) -> &'static str {
        match self {
            Step::Seed => "seed",
            Step::QuotientDiagonal(_) => "quotient diagonal",
            Step::BlowupLocus { .. } => "blowup locus",
            Step::Involution(_) => "involution",
            Step::BlowupPoints(_) => "blowup points",
            Step::Check => "check",
            Step::QuotientSigma => "quotient sigma",
            Step::Resolve(_) => "resolve",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub weights: Vec<i64>,
    pub equations: Vec<FermatEquation>,
    pub plan: Vec<PlanStep>,
    pub param: Option<(String, Vec<i64>)>,
    pub externals: Vec<External>,
    /// `(stage, degree, printed value)`.
    pub published: Vec<(Stage, usize, i64)>,
    /// `(line, step)`.
    pub steps: Vec<(usize, Step)>,
}

impl Scenario {
    pub fn external(&self, key: &str) -> Option<&External> {
        self.externals.iter().find(|e| e.key == key)
    }

    pub fn count_steps(&self, keyword: &str) -> usize {
        self.steps.iter().filter(|(_, s)| s.keyword() == keyword).count()
    }

    pub fn tower(&self) -> Result<FermatTower, ShellError> {
        let w = WeightSystem::normalized(self.weights.clone())
            .map_err(|e| ShellError::Step { line: 0, step: "weights".into(), message: e.to_string() })?;
        Ok(FermatTower::new(w, self.equations.clone(), self.plan.clone()))
    }
}

// ---------------------------------------------------------------- parsing

fn split_comment(line: &str) -> (&str, Option<&str>) {
    match line.find('#') {
        Some(i) => (&line[..i], Some(line[i + 1..].trim())),
        None => (line, None),
    }
}

fn col_of(line: &str, needle: &str) -> usize {
    line.find(needle).map_or(1, |i| i + 1)
}

fn parse_coef(s: &str) -> Result<Coef, String> {
    let s = s.trim_end_matches('*');
    if s.is_empty() {
        return Ok(Coef::one());
    }
    let inner = s.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(s);
    parse_gauss(inner).map(Coef::Exact).ok_or_else(|| format!("bad coefficient `{s}`"))
}

/// `a`, `bi`, `i`, `a+bi` with rational `a`, `b`.
fn parse_gauss(s: &str) -> Option<GaussQ> {
    let rat = |t: &str| -> Option<Q> {
        match t.split_once('/') {
            Some((n, d)) => {
                let d: i64 = d.parse().ok()?;
                let n: i64 = n.parse().ok()?;
                (d != 0).then(|| Q::new(n, d))
            }
            None => Some(Q::from_integer(t.parse().ok()?)),
        }
    };
    let split = s.char_indices().skip(1).find(|&(_, c)| c == '+' || c == '-').map(|(i, _)| i);
    let (re_txt, im_txt) = match split {
        Some(i) => (&s[..i], &s[i..]),
        None if s.ends_with('i') => ("", s),
        None => (s, ""),
    };
    let re = if re_txt.is_empty() { Q::from_integer(0) } else { rat(re_txt)? };
    let im = if im_txt.is_empty() {
        Q::from_integer(0)
    } else {
        let body = im_txt.strip_suffix('i')?;
        let body = body.strip_suffix('*').unwrap_or(body);
        match body {
            "" | "+" => Q::from_integer(1),
            "-" => Q::from_integer(-1),
            b => rat(b.strip_prefix('+').unwrap_or(b))?,
        }
    };
    Some(gauss(re, im))
}

/// `z0^12 + 2i*z2^8 - ~z5^2`; a leading `~` marks every term generic.
pub fn parse_equation(text: &str) -> Result<FermatEquation, String> {
    let mut s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let all_generic = s.starts_with('~') && s[1..].starts_with('(');
    if all_generic {
        s = s[2..].trim_end_matches(')').to_string();
    }
    // split on top-level signs
    let mut pieces: Vec<(i64, String)> = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    let mut sign = 1;
    for (i, c) in s.chars().enumerate() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if (c == '+' || c == '-') && depth == 0 && !cur.ends_with('^') {
            if !cur.is_empty() {
                pieces.push((sign, std::mem::take(&mut cur)));
            } else if i != 0 {
                return Err("dangling sign".into());
            }
            sign = if c == '-' { -1 } else { 1 };
            continue;
        }
        cur.push(c);
    }
    if !cur.is_empty() {
        pieces.push((sign, cur));
    }
    if pieces.is_empty() {
        return Err("empty equation".into());
    }
    let mut terms = Vec::new();
    for (sign, p) in pieces {
        let (generic, body) = match p.strip_prefix('~') {
            Some(b) => (true, b),
            None => (all_generic, p.as_str()),
        };
        let zpos = body.rfind('z').ok_or_else(|| format!("term `{p}` has no variable"))?;
        let (coef_txt, mono) = body.split_at(zpos);
        let (var_txt, exp_txt) = match mono[1..].split_once('^') {
            Some((v, e)) => (v, e),
            None => (&mono[1..], "1"),
        };
        let var: usize = var_txt.parse().map_err(|_| format!("bad variable in `{p}`"))?;
        let exponent: i64 = exp_txt.parse().map_err(|_| format!("bad exponent in `{p}`"))?;
        if exponent < 1 {
            return Err(format!("exponent must be positive in `{p}`"));
        }
        let coef = if generic {
            if !coef_txt.is_empty() {
                return Err(format!("generic term `{p}` cannot carry a coefficient"));
            }
            Coef::Generic
        } else {
            match parse_coef(coef_txt)? {
                Coef::Exact(g) => Coef::Exact(g * gauss_int(sign, 0)),
                c => c,
            }
        };
        if terms.iter().any(|t: &Term| t.var == var) {
            return Err(format!("variable z{var} appears twice"));
        }
        terms.push(Term { var, exponent, coef });
    }
    Ok(FermatEquation { terms })
}

fn parse_plan(text: &str) -> Result<Vec<PlanStep>, String> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let words: Vec<&str> = item.split_whitespace().collect();
        let nums: Result<Vec<usize>, _> = words[1..].iter().map(|w| w.parse::<usize>()).collect();
        let nums = nums.map_err(|_| format!("bad plan step `{item}`"))?;
        out.push(match (words[0], nums.as_slice()) {
            ("retire", [e, v]) => PlanStep::Retire { equation: *e, var: *v },
            ("combine", [t, u, v]) => PlanStep::Combine { target: *t, using: *u, var: *v },
            _ => return Err(format!("bad plan step `{item}`")),
        });
    }
    Ok(out)
}

fn parse_indices(s: &str) -> Result<Vec<usize>, String> {
    let v: Result<Vec<usize>, _> =
        s.split(|c: char| c == ',' || c.is_whitespace()).filter(|x| !x.is_empty()).map(str::parse).collect();
    let mut v = v.map_err(|_| format!("bad index list `{s}`"))?;
    v.sort_unstable();
    v.dedup();
    if v.is_empty() {
        return Err("empty index list".into());
    }
    Ok(v)
}

fn parse_stage(s: &str) -> Option<Stage> {
    match s {
        "Y" => Some(Stage::Y),
        "Z" => Some(Stage::Z),
        "M" => Some(Stage::M),
        _ => None,
    }
}

fn parse_orbits(s: &str) -> Result<Vec<PointOrbit>, String> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix('(') {
            let close = r.find(')').ok_or("unclosed `(`")?;
            let labels: Vec<&str> = r[..close].split_whitespace().collect();
            match labels.as_slice() {
                [a, b] => out.push(PointOrbit::Swapped(a.to_string(), b.to_string())),
                _ => return Err("a swapped orbit lists exactly two points".into()),
            }
            rest = r[close + 1..].trim_start();
        } else {
            let end = rest.find(|c: char| c.is_whitespace() || c == '(').unwrap_or(rest.len());
            out.push(PointOrbit::Fixed(rest[..end].to_string()));
            rest = rest[end..].trim_start();
        }
    }
    Ok(out)
}

/// Which steps may follow a given one.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Phase {
    Start,
    Seeded,
    Involuted,
    Checked,
    Quotiented,
    Resolved,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ShellError> {
    let mut diags = Vec::new();
    let mut sc = Scenario {
        name: String::new(),
        weights: Vec::new(),
        equations: Vec::new(),
        plan: Vec::new(),
        param: None,
        externals: Vec::new(),
        published: Vec::new(),
        steps: Vec::new(),
    };
    let mut format = None;
    let mut phase = Phase::Start;
    let mut ext_lines: Vec<(usize, String, String, Option<String>, usize)> = Vec::new();
    let mut pair_lines: Vec<(usize, usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let (body, comment) = split_comment(raw);
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        let mut err = |col: usize, msg: String| diags.push(Diagnostic { line: ln, column: col, message: msg });
        let (head, value) = match body.split_once(':') {
            Some((h, v)) => (h.trim(), Some(v.trim())),
            None => (body, None),
        };
        let header_after_steps = |phase: Phase| phase != Phase::Start;
        match (head, value) {
            ("format", Some(v)) => match v.parse::<u32>() {
                Ok(FORMAT_VERSION) => format = Some(FORMAT_VERSION),
                _ => err(col_of(raw, v), format!("unsupported format `{v}` (expected {FORMAT_VERSION})")),
            },
            ("name", Some(v)) => sc.name = v.to_string(),
            ("weights", Some(v)) => {
                if header_after_steps(phase) {
                    err(1, "`weights` must precede the pipeline steps".into());
                }
                match v.split_whitespace().map(str::parse).collect::<Result<Vec<i64>, _>>() {
                    Ok(w) => sc.weights = w,
                    Err(_) => err(col_of(raw, v), format!("bad weights `{v}`")),
                }
            }
            ("equation", Some(v)) => {
                if header_after_steps(phase) {
                    err(1, "`equation` must precede the pipeline steps".into());
                }
                match parse_equation(v) {
                    Ok(e) => sc.equations.push(e),
                    Err(m) => err(col_of(raw, v), m),
                }
            }
            ("plan", Some(v)) => match parse_plan(v) {
                Ok(p) => sc.plan = p,
                Err(m) => err(col_of(raw, v), m),
            },
            ("param", Some(v)) => {
                let parsed = v.split_once('=').and_then(|(name, range)| {
                    let (a, b) = range.trim().split_once("..")?;
                    Some((name.trim().to_string(), a.trim().parse::<i64>().ok()?, b.trim().parse::<i64>().ok()?))
                });
                match parsed {
                    Some((name, a, b)) if a <= b && name.chars().all(|c| c.is_ascii_alphabetic()) => {
                        sc.param = Some((name, (a..=b).collect()))
                    }
                    _ => err(col_of(raw, v), format!("expected `name = a..b`, got `{v}`")),
                }
            }
            ("seed", None) => {
                if phase != Phase::Start {
                    err(1, "`seed` must be the first step and appear once".into());
                }
                phase = Phase::Seeded;
                sc.steps.push((ln, Step::Seed));
            }
            ("check", None) => {
                if phase != Phase::Involuted {
                    err(1, "`check` needs a preceding `involution` and comes before `quotient sigma`".into());
                }
                phase = phase.max(Phase::Checked);
                sc.steps.push((ln, Step::Check));
            }
            _ if head.starts_with("external") => {
                let rest = body["external".len()..].trim();
                match rest.split_once('=') {
                    Some((k, v)) => ext_lines.push((
                        ln,
                        k.trim().to_string(),
                        v.trim().to_string(),
                        comment.map(str::to_string),
                        col_of(raw, v.trim()),
                    )),
                    None => err(1, "expected `external <key> = <values> # <provenance>`".into()),
                }
            }
            _ if head.starts_with("published") => {
                let words: Vec<&str> = body["published".len()..].split(|c: char| c.is_whitespace() || c == '=').filter(|w| !w.is_empty()).collect();
                let parsed = match words.as_slice() {
                    [st, b, v] => parse_stage(st).zip(b.strip_prefix('b').and_then(|x| x.parse::<usize>().ok()).filter(|&k| k <= 4)).zip(v.parse::<i64>().ok()),
                    _ => None,
                };
                match parsed {
                    Some(((st, k), v)) => sc.published.push((st, k, v)),
                    None => err(1, "expected `published <Y|Z|M> b<k> = <value>`".into()),
                }
            }
            ("quotient diagonal", Some(v)) => {
                if phase != Phase::Seeded {
                    err(1, "`quotient diagonal` belongs between `seed` and `involution`".into());
                }
                let turns: Option<Vec<Q>> = v.split_whitespace().map(parse_turn).collect();
                match turns {
                    Some(t) => sc.steps.push((ln, Step::QuotientDiagonal(t))),
                    None => err(col_of(raw, v), format!("bad turns `{v}`")),
                }
            }
            (h, Some(v)) if h.starts_with("blowup locus") => {
                if phase != Phase::Seeded {
                    err(1, "`blowup locus` belongs between `seed` and `involution`".into());
                }
                let support = parse_indices(h["blowup locus".len()..].trim());
                let fiber = v.strip_prefix("fiber").map(str::trim).and_then(|n| named_fiber(n).map(|f| (n, f)));
                match (support, fiber) {
                    (Ok(support), Some((n, f))) => sc.steps.push((
                        ln,
                        Step::BlowupLocus { support, fiber: FiberSpec::Named(n.to_string(), f) },
                    )),
                    (Err(m), _) => err(1, m),
                    (_, None) => err(col_of(raw, v), format!("expected `fiber C3_Z5|C3_Z3|C2_Z2`, got `{v}`")),
                }
            }
            ("involution", Some(v)) => {
                if phase != Phase::Seeded {
                    err(1, "`involution` appears once, after `seed`".into());
                }
                phase = Phase::Involuted;
                match v.parse::<InvolutionSpec>() {
                    Ok(s) => sc.steps.push((ln, Step::Involution(s))),
                    Err(e) => err(col_of(raw, v), e.to_string()),
                }
            }
            ("blowup points", Some(v)) => {
                if !(phase == Phase::Seeded || phase == Phase::Involuted) {
                    err(1, "`blowup points` must come before `check`".into());
                }
                let choice = if v == "swapped" {
                    if phase != Phase::Involuted {
                        err(1, "`blowup points: swapped` needs a preceding `involution`".into());
                    }
                    Ok(PointChoice::Swapped)
                } else if let Some(n) = v.strip_prefix("pairs") {
                    pair_lines.push((ln, col_of(raw, n.trim()), n.trim().to_string()));
                    Ok(PointChoice::Pairs(Linear::constant(0)))
                } else {
                    parse_orbits(v).map(PointChoice::Labels)
                };
                match choice {
                    Ok(c) => sc.steps.push((ln, Step::BlowupPoints(c))),
                    Err(m) => err(col_of(raw, v), m),
                }
            }
            ("quotient sigma", None) => {
                if phase != Phase::Checked {
                    err(1, "`quotient sigma` needs a preceding `check`".into());
                }
                phase = Phase::Quotiented;
                sc.steps.push((ln, Step::QuotientSigma));
            }
            ("resolve", Some(v)) => {
                if phase != Phase::Quotiented {
                    err(1, "`resolve` needs a preceding `quotient sigma`".into());
                }
                phase = Phase::Resolved;
                match v.split_whitespace().map(str::parse).collect::<Result<Vec<u8>, _>>() {
                    Ok(c) if !c.is_empty() && c.iter().all(|&x| x == 1 || x == 2) => sc.steps.push((ln, Step::Resolve(c))),
                    _ => err(col_of(raw, v), format!("expected ALE choices 1 or 2, got `{v}`")),
                }
            }
            _ => err(1, format!("unknown line `{body}`")),
        }
    }
    let pname = sc.param.as_ref().map(|(n, _)| n.clone());
    for (ln, key, v, prov, col) in ext_lines {
        let values: Result<Vec<Linear>, String> = v.split_whitespace().map(|x| parse_linear(x, pname.as_deref())).collect();
        match (values, prov) {
            (Err(m), _) => diags.push(Diagnostic { line: ln, column: col, message: m }),
            (_, None) => diags.push(Diagnostic { line: ln, column: 1, message: format!("external `{key}` needs a provenance note") }),
            (_, Some(p)) if p.is_empty() => {
                diags.push(Diagnostic { line: ln, column: 1, message: format!("external `{key}` needs a provenance note") })
            }
            (Ok(values), Some(provenance)) => sc.externals.push(External { key, values, provenance, line: ln }),
        }
    }
    for (ln, col, text) in pair_lines {
        match parse_linear(&text, pname.as_deref()) {
            Ok(n) => {
                if let Some((_, Step::BlowupPoints(c))) = sc.steps.iter_mut().find(|(l, _)| *l == ln) {
                    *c = PointChoice::Pairs(n);
                }
            }
            Err(m) => diags.push(Diagnostic { line: ln, column: col, message: m }),
        }
    }
    if format.is_none() {
        diags.push(Diagnostic { line: 1, column: 1, message: "missing `format: 1` header".into() });
    }
    if sc.weights.is_empty() {
        diags.push(Diagnostic { line: 1, column: 1, message: "missing `weights`".into() });
    }
    if sc.equations.is_empty() {
        diags.push(Diagnostic { line: 1, column: 1, message: "missing `equation`".into() });
    }
    if phase == Phase::Start {
        diags.push(Diagnostic { line: 1, column: 1, message: "no pipeline steps".into() });
    }
    diags.sort_by_key(|d| (d.line, d.column));
    if diags.is_empty() {
        Ok(sc)
    } else {
        Err(ShellError::Parse(diags))
    }
}

// ------------------------------------------------------------------ report

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Informational cross-check that does not decide the run.
    Advisory,
    /// A printed value that disagrees with the derived one.
    Flag,
    Note,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Advisory => "ADVISORY",
            Status::Flag => "FLAG",
            Status::Note => "NOTE",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckLine {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summary {
    pub simply_connected: bool,
    pub holonomy: String,
    pub b: [i64; 5],
    pub b4_plus: i64,
    pub b4_minus: i64,
    pub moduli: i64,
}

impl Summary {
    pub fn triple(&self) -> (i64, i64, i64) {
        (self.b[2], self.b[3], self.b[4])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub scenario: String,
    pub param: Option<(String, i64)>,
    pub stages: Vec<(String, SpaceState)>,
    pub checks: Vec<CheckLine>,
    pub summary: Option<Summary>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&CheckLine> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn final_state(&self) -> Option<&SpaceState> {
        self.stages.last().map(|(_, s)| s)
    }

    fn title(&self) -> String {
        match &self.param {
            Some((n, v)) => format!("{} [{n}={v}]", self.scenario),
            None => self.scenario.clone(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!("scenario {}\n", self.title());
        for (label, s) in &self.stages {
            out += &format!("  stage {label:<28} {s}\n");
        }
        for c in &self.checks {
            out += &format!("  {:<8} {:<24} {}\n", c.status.to_string(), c.name, c.detail);
        }
        match &self.summary {
            Some(s) => {
                out += &format!(
                    "  summary: pi1={} holonomy={} (b2,b3,b4)=({},{},{}) b4+={} b4-={} moduli={}\n",
                    if s.simply_connected { "1" } else { "Z2" },
                    s.holonomy,
                    s.b[2],
                    s.b[3],
                    s.b[4],
                    s.b4_plus,
                    s.b4_minus,
                    s.moduli
                )
            }
            None => out += "  summary: none (pipeline did not reach a manifold)\n",
        }
        out += &format!("  result: {}\n", if self.passed() { "PASS" } else { "FAIL" });
        out
    }

    /// Flat `key=value` dump.
    pub fn key_values(&self) -> String {
        let p = match &self.param {
            Some((n, v)) => format!("{}.{n}{v}", self.scenario),
            None => self.scenario.clone(),
        };
        let mut out = String::new();
        for (i, (label, s)) in self.stages.iter().enumerate() {
            out += &format!("{p}.stage{i}.label={label}\n{p}.stage{i}.chi={}\n", s.chi());
            for k in 0..5 {
                out += &format!("{p}.stage{i}.b{k}={}\n", s.b(k));
            }
        }
        for c in &self.checks {
            out += &format!("{p}.check.{}={}\n", c.name.replace(' ', "_"), c.status);
        }
        if let Some(s) = &self.summary {
            out += &format!(
                "{p}.b2={}\n{p}.b3={}\n{p}.b4={}\n{p}.b4_plus={}\n{p}.b4_minus={}\n{p}.moduli={}\n{p}.holonomy={}\n",
                s.b[2], s.b[3], s.b[4], s.b4_plus, s.b4_minus, s.moduli, s.holonomy
            );
        }
        out
    }
}

// ------------------------------------------------------------------- runner

enum FixedInfo {
    Points(FixedPointSet),
    Declared(usize),
}

impl FixedInfo {
    fn count(&self) -> usize {
        match self {
            FixedInfo::Points(f) => f.count(),
            FixedInfo::Declared(n) => *n,
        }
    }
}

struct Runner<'a> {
    sc: &'a Scenario,
    param: Option<i64>,
    tower: FermatTower,
    state: Option<SpaceState>,
    psi: Option<Vec<Q>>,
    fixed: Option<FixedInfo>,
    /// `(dimension, chi)` of positive-dimensional singular loci.
    loci: BTreeMap<Vec<usize>, (i64, i64)>,
    lefschetz: bool,
    seed_state: Option<SpaceState>,
    z_state: Option<SpaceState>,
    report: Report,
}

fn locus_label(support: &[usize]) -> String {
    let s: Vec<String> = support.iter().map(|j| j.to_string()).collect();
    format!("L[{}]", s.join(","))
}

impl<'a> Runner<'a> {
    fn push(&mut self, name: &str, status: Status, detail: impl Into<String>) {
        self.report.checks.push(CheckLine { name: name.to_string(), status, detail: detail.into() });
    }

    fn value(&self, key: &str) -> Option<(Vec<i64>, String)> {
        let e = self.sc.external(key)?;
        let v: Option<Vec<i64>> = e.values.iter().map(|x| x.eval(self.param)).collect();
        v.map(|v| (v, e.provenance.clone()))
    }

    fn stage(&mut self, label: String, s: SpaceState) {
        if !s.betti.consistent() {
            self.push("betti consistency", Status::Fail, format!("{label}: chi {} vs Betti {}", s.chi(), s.betti.chi_from_betti()));
        }
        self.report.stages.push((label, s.clone()));
        self.state = Some(s);
    }

    fn state(&self) -> SpaceState {
        self.state.clone().expect("stage grammar guarantees a seed")
    }

    fn seed(&mut self) -> Result<(), String> {
        let t = &self.tower.clone();
        validate_tower(t).map_err(|e| e.to_string())?;
        match chern_class_zero(t) {
            Ok(true) => self.push("calabi-yau", Status::Pass, "degrees sum to the weight sum"),
            Ok(false) => self.push("calabi-yau", Status::Fail, "degrees do not sum to the weight sum"),
            Err(e) => return Err(e.to_string()),
        }
        let tr = transversality_check(t).map_err(|e| e.to_string())?;
        let detail = tr.assumption.clone().unwrap_or_else(|| "checked on every coordinate stratum".into());
        self.push("transversality", if tr.transverse { Status::Pass } else { Status::Fail }, detail);

        let computed = chi_tower(t);
        let chi = match (self.value("chi"), computed) {
            (Some((v, prov)), Ok(c)) => {
                let st = if v[0] == c { Status::Pass } else { Status::Fail };
                self.push("external chi", st, format!("declared {} ({prov}); computed {c}", v[0]));
                v[0]
            }
            (Some((v, prov)), Err(e)) => {
                self.push("external chi", Status::Note, format!("declared {} ({prov}); not computed: {e}", v[0]));
                v[0]
            }
            (None, Ok(c)) => c,
            (None, Err(e)) => return Err(e.to_string()),
        };

        let locus = singular_locus(t).map_err(|e| e.to_string())?;
        let inventory = self.inventory(&locus)?;
        let described: Vec<String> = locus.iter().map(describe_record).collect();
        self.push("singular locus", Status::Note, if described.is_empty() { "smooth".into() } else { described.join("; ") });

        let s = lefschetz_seed(&t.ambient, t.equations.len(), chi).map_err(|e| e.to_string())?.with_singular(inventory);
        self.seed_state = Some(s.clone());
        self.stage("Y seed".into(), s);
        Ok(())
    }

    fn inventory(&mut self, locus: &[SingularityRecord]) -> Result<Vec<SingularEntry>, String> {
        let mut out = Vec::new();
        let exact = match singular_points(&self.tower, locus) {
            Ok(points) => Some(points),
            Err(e) => {
                if !self.tower.has_generic_coefficients() {
                    return Err(e.to_string());
                }
                self.push("singular points", Status::Note, "generic coefficients: points counted, not located");
                None
            }
        };
        match exact {
            Some(points) => {
                for (i, (p, class)) in points.into_iter().enumerate() {
                    out.push(SingularEntry { label: format!("p{}", i + 1), class, point: Some(p), resolved: false });
                }
            }
            None => {
                let mut n = 0;
                for r in locus {
                    if let PointCount::Finite(c) = r.point_count {
                        for _ in 0..c {
                            n += 1;
                            out.push(SingularEntry { label: format!("p{n}"), class: r.class, point: None, resolved: false });
                        }
                    }
                }
            }
        }
        for r in locus {
            if r.point_count == PointCount::NotFinite {
                let sup = r.stratum.support.clone();
                let chi = chi_on_closed_stratum(&self.tower, &sup).map_err(|e| e.to_string())?;
                self.loci.insert(sup.clone(), (r.intersection_dimension, chi));
                out.push(SingularEntry { label: locus_label(&sup), class: r.class, point: None, resolved: false });
            }
        }
        Ok(out)
    }

    fn quotient_diagonal(&mut self, psi: &[Q]) -> Result<(), String> {
        if psi.len() != self.tower.ambient.len() {
            return Err(format!("{} turns for {} coordinates", psi.len(), self.tower.ambient.len()));
        }
        let s = self.state();
        if s.b(1) != 0 || s.b(3) != 0 {
            return Err("odd cohomology present; invariant parts unknown".into());
        }
        let fix = holomorphic_fixed_locus(&self.tower, psi).map_err(|e| e.to_string())?;
        let comps: Vec<String> = fix.components.iter().map(|c| format!("{} dim {} chi {}", locus_label(&c.support), c.dimension, c.chi)).collect();
        self.push("fixed locus", Status::Note, format!("chi {} from {}", fix.chi, comps.join(", ")));
        let mut q = quotient_holomorphic(&s, fix.chi, &HolomorphicAction::kahler_only()).map_err(|e| e.to_string())?;
        let mut inventory = Vec::new();
        for e in &q.singular {
            let mut e = e.clone();
            if let Some(p) = &e.point {
                if let Some(c) = quotient_point_class(&self.tower, &p.support, psi) {
                    e.class = c;
                }
            }
            inventory.push(e);
        }
        for c in &fix.components {
            if c.dimension > 0 {
                self.loci.insert(c.support.clone(), (c.dimension, c.chi));
                if !inventory.iter().any(|e| e.label == locus_label(&c.support)) {
                    inventory.push(SingularEntry { label: locus_label(&c.support), class: SingularClass::NonIsolated, point: None, resolved: false });
                }
            } else {
                for p in points_on_support(&self.tower, &c.support).map_err(|e| e.to_string())? {
                    if !inventory.iter().any(|e| e.point.as_ref() == Some(&p)) {
                        let class = quotient_point_class(&self.tower, &p.support, psi).unwrap_or(SingularClass::Other);
                        let label = format!("p{}", inventory.iter().filter(|e| e.point.is_some()).count() + 1);
                        inventory.push(SingularEntry { label, class, point: Some(p), resolved: false });
                    }
                }
            }
        }
        q.singular = inventory;
        self.psi = Some(psi.to_vec());
        self.lefschetz = false;
        let turns: Vec<String> = psi.iter().map(|x| x.to_string()).collect();
        self.stage(format!("Y quotient by ({})", turns.join(",")), q);
        Ok(())
    }

    fn blowup_locus(&mut self, support: &[usize], fiber: &FiberSpec) -> Result<(), String> {
        let FiberSpec::Named(fname, fdata) = fiber;
        let key = format!("locus[{}]", support.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(","));
        let betti = match self.value(&key) {
            Some((v, prov)) => {
                self.push("external locus", Status::Note, format!("{key} = {v:?} ({prov})"));
                v
            }
            None => {
                let &(dim, chi) = self
                    .loci
                    .get(support)
                    .ok_or_else(|| format!("{} is not a positive-dimensional singular locus", locus_label(support)))?;
                let v = match dim {
                    1 => vec![1, 2 - chi, 1],
                    2 => vec![1, 0, chi - 2, 0, 1],
                    _ => return Err(format!("locus of dimension {dim}")),
                };
                let assume = if dim == 1 { "connected" } else { "connected with b1 = 0" };
                self.push("locus betti", Status::Note, format!("{} chi {chi} -> {v:?} (assumed {assume})", locus_label(support)));
                v
            }
        };
        let mut s = self.state();
        let label = locus_label(support);
        let entry = s
            .singular
            .iter_mut()
            .find(|e| e.label == label && !e.resolved)
            .ok_or_else(|| format!("no unresolved singular locus {label}"))?;
        entry.resolved = true;
        let out = blowup_locus(&s, &betti, *fdata).map_err(|e| e.to_string())?;
        self.stage(format!("Y blow up {label} ({fname})"), out);
        Ok(())
    }

    fn involution(&mut self, spec: &InvolutionSpec) -> Result<(), String> {
        let t = &self.tower.clone();
        let rep = validate_involution(spec, &t.ambient).map_err(|e| e.to_string())?;
        self.push("involution", Status::Pass, format!("{spec}; square rescales by e({})", rep.rescaling));
        let kept = preserves_variety(spec, t).map_err(|e| e.to_string())?;
        self.push("preserves variety", if kept { Status::Pass } else { Status::Fail }, "");
        let fixed = match self.value("fixed") {
            Some((v, prov)) => {
                self.push("fixed points", Status::Note, format!("{} declared ({prov})", v[0]));
                FixedInfo::Declared(v[0].max(0) as usize)
            }
            None => {
                let f = fixed_points_modulo(spec, t, self.psi.as_deref()).map_err(|e| e.to_string())?;
                let pts: Vec<String> = f.points.iter().map(|p| p.to_string()).collect();
                self.push("fixed points", Status::Note, format!("{}: {}; {} swapped pairs", f.count(), pts.join(" "), f.swapped.len()));
                FixedInfo::Points(f)
            }
        };
        self.fixed = Some(fixed);
        Ok(())
    }

    fn label_of(s: &SpaceState, p: &ProjPoint) -> Option<String> {
        s.singular.iter().find(|e| e.point.as_ref() == Some(p) && !e.resolved).map(|e| e.label.clone())
    }

    fn blowup_points(&mut self, choice: &PointChoice) -> Result<(), String> {
        let s = self.state();
        let orbits = match choice {
            PointChoice::Labels(o) => o.clone(),
            PointChoice::Swapped => {
                let Some(FixedInfo::Points(f)) = &self.fixed else {
                    return Err("swapped points need an enumerated involution".into());
                };
                f.swapped
                    .iter()
                    .filter_map(|(a, b)| Some(PointOrbit::Swapped(Self::label_of(&s, a)?, Self::label_of(&s, b)?)))
                    .collect()
            }
            PointChoice::Pairs(n) => {
                let n = n.eval(self.param).ok_or("pair count depends on an unset parameter")?;
                let open: Vec<String> = s
                    .singular
                    .iter()
                    .filter(|e| !e.resolved && e.class == SingularClass::Z4Scalar)
                    .map(|e| e.label.clone())
                    .collect();
                if n < 0 || 2 * n as usize > open.len() {
                    return Err(format!("{n} pairs requested, {} points available", open.len()));
                }
                open[open.len() - 2 * n as usize..].chunks(2).map(|c| PointOrbit::Swapped(c[0].clone(), c[1].clone())).collect()
            }
        };
        let names: Vec<String> = orbits
            .iter()
            .map(|o| match o {
                PointOrbit::Fixed(a) => a.clone(),
                PointOrbit::Swapped(a, b) => format!("({a} {b})"),
            })
            .collect();
        let out = blowup_points(&s, &orbits).map_err(|e| e.to_string())?;
        self.stage(format!("Y blow up points {}", names.join(" ")), out);
        Ok(())
    }

    fn check(&mut self) -> Result<(), String> {
        let s = self.state();
        let fixed = self.fixed.as_ref().ok_or("no involution")?;
        let report = match fixed {
            FixedInfo::Points(f) => check_condition(&s.singular, f, self.lefschetz),
            FixedInfo::Declared(n) => {
                let open: Vec<&SingularEntry> = s.singular.iter().filter(|e| !e.resolved).collect();
                let mut r = check_condition(&s.singular, &FixedPointSet { points: vec![], swapped: vec![] }, self.lefschetz);
                r.fixed_equals_singular = if open.len() == *n {
                    Verdict::Pass
                } else {
                    Verdict::Fail(format!("{} unresolved singular points, {n} declared fixed", open.len()))
                };
                r
            }
        };
        self.condition_lines(&report);
        Ok(())
    }

    fn condition_lines(&mut self, r: &ConditionReport) {
        let verdict = |v: &Verdict| match v {
            Verdict::Pass => (Status::Pass, String::new()),
            Verdict::Fail(m) => (Status::Fail, m.clone()),
        };
        let grant = |g: &Grant| match g {
            Grant::Lefschetz => (Status::Pass, "Lefschetz".to_string()),
            Grant::Assumed(m) => (Status::Note, format!("assumed: {m}")),
        };
        let (st, d) = verdict(&r.singularities_scalar);
        self.push("condition scalar", st, d);
        let (st, d) = verdict(&r.fixed_equals_singular);
        self.push("condition fixed=sing", st, d);
        let (st, d) = grant(&r.simply_connected);
        self.push("condition pi1", st, d);
        let (st, d) = grant(&r.h20_vanishes);
        self.push("condition h20", st, d);
    }

    fn published(&mut self, stage: Stage, s: &SpaceState) {
        for &(st, k, v) in &self.sc.published.clone() {
            if st == stage {
                match compare_published(s.b(k), v) {
                    PublishedCheck::Agrees => self.push("published", Status::Pass, format!("{st} b{k} = {v}")),
                    PublishedCheck::Flagged { printed, derived } => self.push(
                        "published",
                        Status::Flag,
                        format!("{st} b{k}: printed {printed}, derived {derived}"),
                    ),
                }
            }
        }
    }

    fn quotient_sigma(&mut self) -> Result<(), String> {
        let s = self.state();
        self.published(Stage::Y, &s);
        let k = self.fixed.as_ref().ok_or("no involution")?.count();
        let z = quotient_antiholomorphic(&s, k).map_err(|e| e.to_string())?;
        self.published(Stage::Z, &z);
        self.z_state = Some(z.clone());
        self.stage(format!("Z quotient by sigma ({k} fixed)"), z);
        Ok(())
    }

    fn resolve(&mut self, choices: &[u8]) -> Result<(), String> {
        let z = self.state();
        let choices: Vec<u8> = if choices.len() == 1 { vec![choices[0]; z.orbifold_points] } else { choices.to_vec() };
        let m = glue_ale(&z, &choices).map_err(|e| e.to_string())?;
        let ok = ahat_check(&m);
        self.push("ahat identity", if ok { Status::Pass } else { Status::Fail }, "");
        self.published(Stage::M, &m);
        if let (Some(y), Some(zs)) = (self.seed_state.clone(), self.z_state.clone()) {
            let last_y_modified = self.report.stages.iter().rev().find(|(l, _)| l.starts_with('Y')).map(|(_, s)| s.modified).unwrap_or(true);
            if !last_y_modified && !self.tower.equations.is_empty() && self.tower.equations.len() == 1 {
                let degree = self.tower.ambient.sum();
                match h31_crosscheck(&self.tower.ambient, degree, &y, &zs, &m) {
                    Ok(h) => self.push("h31", Status::Advisory, h.to_string()),
                    Err(e) => self.push("h31", Status::Note, e.to_string()),
                }
            }
        }
        let (p, n) = m.betti.split.expect("glue_ale splits b4");
        self.report.summary = Some(Summary {
            simply_connected: m.pi1 == Some(crate::ledger::Pi1::Trivial),
            holonomy: m.holonomy.map(|h| h.to_string()).unwrap_or_default(),
            b: m.betti.b,
            b4_plus: p,
            b4_minus: n,
            moduli: 1 + n,
        });
        self.stage("M resolve".into(), m);
        Ok(())
    }

    fn run_step(&mut self, step: &Step) -> Result<(), String> {
        match step {
            Step::Seed => self.seed(),
            Step::QuotientDiagonal(psi) => self.quotient_diagonal(psi),
            Step::BlowupLocus { support, fiber } => self.blowup_locus(support, fiber),
            Step::Involution(s) => self.involution(s),
            Step::BlowupPoints(c) => self.blowup_points(c),
            Step::Check => self.check(),
            Step::QuotientSigma => self.quotient_sigma(),
            Step::Resolve(c) => self.resolve(c),
        }
    }
}

fn describe_record(r: &SingularityRecord) -> String {
    let count = match r.point_count {
        PointCount::Finite(n) => format!("{n} points"),
        PointCount::NotFinite => format!("dimension {}", r.intersection_dimension),
    };
    format!("{} Z{} {} {}", locus_label(&r.stratum.support), r.stratum.stabilizer_order, r.class, count)
}

/// Run a scenario at one parameter value (`None` when it has no parameter).
pub fn run_with(sc: &Scenario, param: Option<i64>) -> Result<Report, ShellError> {
    if let Some((name, values)) = &sc.param {
        match param {
            Some(v) if values.contains(&v) => {}
            Some(v) => return Err(ShellError::BadParam { name: name.clone(), value: v }),
            None => return Err(ShellError::BadParam { name: name.clone(), value: i64::MIN }),
        }
    }
    let tower = sc.tower()?;
    let mut r = Runner {
        sc,
        param,
        tower,
        state: None,
        psi: None,
        fixed: None,
        loci: BTreeMap::new(),
        lefschetz: true,
        seed_state: None,
        z_state: None,
        report: Report {
            scenario: sc.name.clone(),
            param: sc.param.as_ref().zip(param).map(|((n, _), v)| (n.clone(), v)),
            stages: Vec::new(),
            checks: Vec::new(),
            summary: None,
        },
    };
    for e in &sc.externals {
        let vals: Vec<String> = e.values.iter().map(|v| v.to_string()).collect();
        r.push("external", Status::Note, format!("{} = {} ({})", e.key, vals.join(" "), e.provenance));
    }
    for (line, step) in &sc.steps {
        r.run_step(step).map_err(|message| ShellError::Step { line: *line, step: step.keyword().into(), message })?;
    }
    Ok(r.report)
}

/// Run a scenario at every declared parameter value.
pub fn run(sc: &Scenario) -> Result<Vec<Report>, ShellError> {
    match &sc.param {
        Some((_, values)) => values.iter().map(|&v| run_with(sc, Some(v))).collect(),
        None => Ok(vec![run_with(sc, None)?]),
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ShellError> {
    let text = std::fs::read_to_string(path).map_err(|source| ShellError::Io { path: path.display().to_string(), source })?;
    parse_scenario(&text)
}

// --------------------------------------------------------------- betti table

pub fn fixture_dir() -> PathBuf {
    match std::env::var_os(FIXTURE_ENV) {
        Some(d) => PathBuf::from(d),
        None => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures")),
    }
}

/// Fixture name, parameter value, expected `(b2, b3, b4)`.
pub type TableEntry = (&'static str, Option<i64>, (i64, i64, i64));

/// The fourteen expected `(b2, b3, b4)` triples, in table order, with the
/// fixture and parameter that produce each.
pub const EXPECTED_TABLE: [TableEntry; 14] = [
    ("s10_3", Some(0), (4, 33, 200)),
    ("s10_3", Some(1), (3, 33, 202)),
    ("s10_3", Some(2), (2, 33, 204)),
    ("s10_3", Some(3), (1, 33, 206)),
    ("s10_3", Some(4), (0, 33, 208)),
    ("s9_1", None, (1, 0, 908)),
    ("s9", None, (0, 0, 910)),
    ("s10_2", None, (1, 0, 1292)),
    ("s10_1", None, (0, 0, 1294)),
    ("s7_1", None, (1, 0, 2444)),
    ("s7", None, (0, 0, 2446)),
    ("s8_3", None, (0, 6, 3730)),
    ("s8_1", None, (0, 0, 4750)),
    ("s8_2", None, (0, 0, 11662)),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub scenario: String,
    pub param: Option<i64>,
    pub expected: (i64, i64, i64),
    /// `Err` carries the failure text.
    pub got: Result<(i64, i64, i64), String>,
    pub checks_passed: bool,
}

impl TableRow {
    pub fn matches(&self) -> bool {
        self.checks_passed && self.got.as_ref().ok() == Some(&self.expected)
    }
}

impl fmt::Display for TableRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.param {
            Some(k) => format!("{} k={k}", self.scenario),
            None => self.scenario.clone(),
        };
        let (a, b, c) = self.expected;
        let got = match &self.got {
            Ok((x, y, z)) => format!("({x}, {y}, {z})"),
            Err(e) => format!("error: {e}"),
        };
        write!(f, "{name:<12} expected ({a}, {b}, {c})  got {got}  {}", if self.matches() { "MATCH" } else { "MISMATCH" })
    }
}

fn table_row(dir: &Path, name: &str, param: Option<i64>, expected: (i64, i64, i64)) -> TableRow {
    let got = load_scenario(&dir.join(format!("{name}.scn"))).and_then(|sc| run_with(&sc, param));
    let (got, checks_passed) = match got {
        Ok(r) => match &r.summary {
            Some(s) => (Ok(s.triple()), r.passed()),
            None => (Err("no manifold reached".into()), false),
        },
        Err(e) => (Err(e.to_string()), false),
    };
    TableRow { scenario: name.to_string(), param, expected, got, checks_passed }
}

/// Run every table scenario from `dir`, one thread per row, in table order.
pub fn betti_table(dir: &Path) -> Vec<TableRow> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = EXPECTED_TABLE
            .iter()
            .map(|&(name, param, expected)| scope.spawn(move || table_row(dir, name, param, expected)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("table worker panicked")).collect()
    })
}

// --------------------------------------------------------------- enumerator

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Filter {
    /// Every singular stratum is a `C^4/Z4` scalar point, and there is one.
    Z4ScalarOnly,
    /// Every singular stratum is a `C^4/{1,-1}` point, and there is one.
    Z2NegOnly,
    /// No singular strata at all.
    Smooth,
    /// A standard block involution preserves the Fermat hypersurface.
    PairStructure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub weights: Vec<i64>,
    pub degree: i64,
    pub exponents: Vec<i64>,
    pub strata: Vec<SingularityRecord>,
    /// Number of isolated singular points.
    pub points: i64,
    pub involution: Option<InvolutionSpec>,
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.weights.iter().map(|a| a.to_string()).collect();
        write!(f, "({}) d={} points={}", w.join(","), self.degree, self.points)?;
        for r in &self.strata {
            write!(f, " [{}]", describe_record(r))?;
        }
        if let Some(s) = &self.involution {
            write!(f, " sigma={s}")?;
        }
        Ok(())
    }
}

pub const DEFAULT_DEGREE_CAP: i64 = 60;

fn nondecreasing(d: i64, parts: usize, min: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>, total: i64) {
    if parts == 0 {
        if d == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    let mut a = min;
    while a * parts as i64 <= d {
        if total % a == 0 {
            prefix.push(a);
            nondecreasing(d - a, parts - 1, a, prefix, out, total);
            prefix.pop();
        }
        a += 1;
    }
}

fn standard_involutions(w: &[i64]) -> Vec<InvolutionSpec> {
    let mut out = Vec::new();
    let tails: [&str; 3] = ["pair(4,5)", "conj(4) conj(5)", "conj(4) conj(5; 1/2)"];
    for tail in tails {
        if tail.starts_with("pair") && w[4] != w[5] {
            continue;
        }
        if let Ok(s) = format!("pair(0,1; -) pair(2,3; -) {tail}").parse() {
            out.push(s);
        }
    }
    out
}

/// Fermat Calabi-Yau hypersurfaces in 5-dimensional weighted projective
/// spaces of degree at most `max_degree` that pass every filter.
pub fn enumerate_candidates(max_degree: i64, filters: &[Filter], cap: i64) -> Result<Vec<Candidate>, ShellError> {
    if max_degree > cap {
        return Err(ShellError::BoundTooLarge(max_degree, cap));
    }
    let mut weight_lists = Vec::new();
    for d in 6..=max_degree.max(5) {
        nondecreasing(d, 6, 1, &mut Vec::new(), &mut weight_lists, d);
    }
    let mut out = Vec::new();
    for w in weight_lists {
        let Ok(ws) = WeightSystem::normalized(w.clone()) else { continue };
        let d = ws.sum();
        let exponents: Vec<i64> = w.iter().map(|a| d / a).collect();
        let t = FermatTower::hypersurface(ws, &exponents);
        let Ok(strata) = singular_locus(&t) else { continue };
        let points: i64 = strata
            .iter()
            .map(|r| match r.point_count {
                PointCount::Finite(n) => n,
                PointCount::NotFinite => 0,
            })
            .sum();
        let only = |c: SingularClass| !strata.is_empty() && strata.iter().all(|r| r.class == c) && points > 0;
        let mut involution = None;
        let mut keep = true;
        for f in filters {
            keep &= match f {
                Filter::Z4ScalarOnly => only(SingularClass::Z4Scalar),
                Filter::Z2NegOnly => only(SingularClass::Z2Neg),
                Filter::Smooth => strata.is_empty(),
                Filter::PairStructure => {
                    involution = standard_involutions(&w).into_iter().find(|s| {
                        validate_involution(s, &t.ambient).is_ok() && preserves_variety(s, &t).unwrap_or(false)
                    });
                    involution.is_some()
                }
            };
        }
        if keep {
            out.push(Candidate { weights: w, degree: d, exponents, strata, points, involution });
        }
    }
    Ok(out)
}

// ------------------------------------------------------------------ algebra

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraCheck {
    Forms,
    Groups,
    All,
}

/// Exterior-algebra and group checks as report lines.
pub fn algebra_checks(which: AlgebraCheck) -> Vec<CheckLine> {
    let mut out = Vec::new();
    let mut push = |name: &str, ok: bool, detail: String| {
        out.push(CheckLine { name: name.into(), status: if ok { Status::Pass } else { Status::Fail }, detail })
    };
    if matches!(which, AlgebraCheck::Forms | AlgebraCheck::All) {
        let omega = cayley_form();
        for (name, p) in [("z", CoordinatePairing::z()), ("w", CoordinatePairing::w())] {
            let ok = su4_induced_form(&p) == omega;
            push(&format!("form {name}"), ok, format!("omega^2/2 + Re theta in {name}-coordinates vs the {}-term Cayley form", omega.len()));
        }
    }
    if matches!(which, AlgebraCheck::Groups | AlgebraCheck::All) {
        let [a, b] = group_g_generators();
        match generate_group(&[a, b]) {
            Ok(g) => {
                let (ia, ib) = (g.generators[0], g.generators[1]);
                let rel = g.power(ia, 4) == g.identity
                    && g.power(ib, 4) == g.identity
                    && g.power(ia, 2) == g.power(ib, 2)
                    && g.mul(ia, ib) == g.mul(ib, g.power(ia, 3));
                push("group G order", g.order() == 8, format!("order {}", g.order()));
                push("group G relations", rel, "a^4 = b^4 = 1, a^2 = b^2, ab = ba^3".into());
                let free = acts_freely(&g);
                push("group G free", free.free, String::new());
                let omega = cayley_form();
                let keeps = g.elements.iter().all(|e| preserves(e, &omega).unwrap_or(false));
                push("group G preserves form", keeps, String::new());
            }
            Err(e) => push("group G order", false, e.to_string()),
        }
        for n in [1, 3, 5] {
            let res = group_gn_generators(n).and_then(|g| generate_group(&g));
            match res {
                Ok(g) => {
                    let free = acts_freely(&g).free;
                    push(&format!("group G{n}"), g.order() as i64 == 8 * n && free, format!("order {}, free {free}", g.order()));
                }
                Err(e) => push(&format!("group G{n}"), false, e.to_string()),
            }
        }
    }
    out
}
