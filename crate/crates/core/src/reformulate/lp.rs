//! Reader for the subset of CPLEX LP text that the emitters produce, used to
//! round-trip models and to check candidate assignments against them.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpModel {
    pub objective: Vec<(String, f64)>,
    pub rows: Vec<Row>,
    /// Explicit bounds; variables absent here are bounded by `[0, +inf)`.
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub generals: BTreeSet<String>,
    pub binaries: BTreeSet<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Generals,
    Binaries,
    End,
}

fn parse_num(tok: &str, line: usize) -> Result<f64> {
    match tok {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse()
            .map_err(|_| Error::parse(line, format!("expected a number, found `{tok}`"))),
    }
}

fn is_number(tok: &str) -> bool {
    tok.parse::<f64>().is_ok()
}

/// Parses `[+|-] [coef] var ...` into terms.
fn parse_terms(tokens: &[&str], line: usize) -> Result<Vec<(String, f64)>> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for &tok in tokens {
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -sign,
            _ if is_number(tok) => {
                if coef.is_some() {
                    return Err(Error::parse(line, "two coefficients in a row"));
                }
                coef = Some(parse_num(tok, line)?);
            }
            _ => {
                terms.push((tok.to_string(), sign * coef.unwrap_or(1.0)));
                sign = 1.0;
                coef = None;
            }
        }
    }
    if coef.is_some() {
        return Err(Error::parse(line, "dangling coefficient"));
    }
    Ok(terms)
}

fn sense_of(tok: &str) -> Option<Sense> {
    match tok {
        "<=" | "=<" | "<" => Some(Sense::Le),
        ">=" | "=>" | ">" => Some(Sense::Ge),
        "=" => Some(Sense::Eq),
        _ => None,
    }
}

impl LpModel {
    pub fn parse(text: &str) -> Result<LpModel> {
        let mut model = LpModel::default();
        let mut section = Section::None;
        // statements spanning several lines are collected before parsing
        let mut pending: Vec<String> = Vec::new();
        let mut pending_line = 0;

        fn flush(model: &mut LpModel, section: Section, pending: &mut Vec<String>, line: usize) -> Result<()> {
            if pending.is_empty() {
                return Ok(());
            }
            let joined = pending.join(" ");
            pending.clear();
            let (name, body) = match joined.split_once(':') {
                Some((n, b)) => (n.trim().to_string(), b.to_string()),
                None => (String::new(), joined),
            };
            let tokens: Vec<&str> = body.split_whitespace().collect();
            match section {
                Section::Objective => model.objective = parse_terms(&tokens, line)?,
                Section::Constraints => {
                    let at = tokens
                        .iter()
                        .position(|t| sense_of(t).is_some())
                        .ok_or_else(|| Error::parse(line, "constraint without a sense"))?;
                    if at + 2 != tokens.len() {
                        return Err(Error::parse(line, "expected a single right-hand side"));
                    }
                    model.rows.push(Row {
                        name,
                        terms: parse_terms(&tokens[..at], line)?,
                        sense: sense_of(tokens[at]).expect("checked above"),
                        rhs: parse_num(tokens[at + 1], line)?,
                    });
                }
                _ => unreachable!(),
            }
            Ok(())
        }

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('\\').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let header = match content.to_ascii_lowercase().as_str() {
                "minimize" | "minimum" | "min" => Some(Section::Objective),
                "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
                "bounds" => Some(Section::Bounds),
                "generals" | "general" | "integers" => Some(Section::Generals),
                "binaries" | "binary" => Some(Section::Binaries),
                "end" => Some(Section::End),
                _ => None,
            };
            if let Some(h) = header {
                flush(&mut model, section, &mut pending, pending_line)?;
                section = h;
                continue;
            }
            match section {
                Section::None | Section::End => {
                    return Err(Error::parse(line, format!("unexpected text `{content}`")));
                }
                Section::Objective => {
                    if pending.is_empty() {
                        pending_line = line;
                    }
                    pending.push(content.to_string());
                }
                Section::Constraints => {
                    // a new statement starts with `name:`
                    let starts = content
                        .split_whitespace()
                        .next()
                        .is_some_and(|t| t.ends_with(':') || t.contains(':'));
                    if starts {
                        flush(&mut model, section, &mut pending, pending_line)?;
                        pending_line = line;
                    }
                    pending.push(content.to_string());
                }
                Section::Bounds => {
                    let toks: Vec<&str> = content.split_whitespace().collect();
                    match toks.as_slice() {
                        [v, "free"] => {
                            model.bounds.insert(v.to_string(), (f64::NEG_INFINITY, f64::INFINITY));
                        }
                        [lo, "<=", v, "<=", hi] => {
                            model.bounds.insert(v.to_string(), (parse_num(lo, line)?, parse_num(hi, line)?));
                        }
                        [v, ">=", lo] => {
                            let hi = model.bounds.get(*v).map_or(f64::INFINITY, |b| b.1);
                            model.bounds.insert(v.to_string(), (parse_num(lo, line)?, hi));
                        }
                        [v, "<=", hi] => {
                            let lo = model.bounds.get(*v).map_or(0.0, |b| b.0);
                            model.bounds.insert(v.to_string(), (lo, parse_num(hi, line)?));
                        }
                        _ => return Err(Error::parse(line, format!("unsupported bound `{content}`"))),
                    }
                }
                Section::Generals => model.generals.extend(content.split_whitespace().map(String::from)),
                Section::Binaries => model.binaries.extend(content.split_whitespace().map(String::from)),
            }
        }
        if section != Section::End {
            return Err(Error::parse(text.lines().count(), "missing `End`"));
        }
        Ok(model)
    }

    /// Every variable named anywhere in the model.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.objective.iter().map(|(v, _)| v.clone()).collect();
        for r in &self.rows {
            out.extend(r.terms.iter().map(|(v, _)| v.clone()));
        }
        out.extend(self.bounds.keys().cloned());
        out.extend(self.generals.iter().cloned());
        out.extend(self.binaries.iter().cloned());
        out
    }

    /// Objective value; unlisted variables count as 0.
    pub fn objective_value(&self, values: &HashMap<String, f64>) -> f64 {
        self.objective
            .iter()
            .map(|(v, a)| a * values.get(v).copied().unwrap_or(0.0))
            .sum()
    }

    /// Describes every row, bound and integrality requirement that `values`
    /// breaks by more than `tol` (scaled by the row's magnitude).
    pub fn violations(&self, values: &HashMap<String, f64>, tol: f64) -> Vec<String> {
        let get = |v: &str| values.get(v).copied().unwrap_or(0.0);
        let mut out = Vec::new();
        for r in &self.rows {
            let mut lhs = 0.0;
            let mut scale = r.rhs.abs().max(1.0);
            for (v, a) in &r.terms {
                let x = a * get(v);
                lhs += x;
                scale = scale.max(x.abs());
            }
            let slack = tol * scale;
            let bad = match r.sense {
                Sense::Le => lhs > r.rhs + slack,
                Sense::Ge => lhs < r.rhs - slack,
                Sense::Eq => (lhs - r.rhs).abs() > slack,
            };
            if bad {
                out.push(format!("row {}: lhs {lhs} vs rhs {}", r.name, r.rhs));
            }
        }
        for v in self.variables() {
            let x = get(&v);
            let (lo, hi) = if self.binaries.contains(&v) {
                (0.0, 1.0)
            } else {
                self.bounds.get(&v).copied().unwrap_or((0.0, f64::INFINITY))
            };
            if x < lo - tol || x > hi + tol {
                out.push(format!("bound {v}: {x} outside [{lo}, {hi}]"));
            }
            if (self.binaries.contains(&v) || self.generals.contains(&v)) && (x - x.round()).abs() > tol {
                out.push(format!("integrality {v}: {x}"));
            }
        }
        out
    }
}
