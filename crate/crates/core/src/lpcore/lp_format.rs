//! CPLEX-style LP text files.
//!
//! Names are sanitized on export (`[`/`]` become `(`/`)`, other characters
//! outside the LP name alphabet become `_`), so a re-imported model carries
//! the sanitized names. The objective lists every variable in index order,
//! which makes the variable order survive a round trip.

use std::fmt::Write as _;

use super::{LpModel, ObjectiveSense, Relation};
use crate::error::{QapError, Result};
use crate::scalar::Scalar;

const TERMS_PER_LINE: usize = 8;

fn sanitize(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| match c {
            '[' => '(',
            ']' => ')',
            c if c.is_ascii_alphanumeric() || "!\"#$%&()/,.;?@_`'{}|~".contains(c) => c,
            _ => '_',
        })
        .collect();
    let first = out.chars().next();
    if first.is_none_or(|c| c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E') {
        out.insert(0, '_');
    }
    out
}

fn number<T: Scalar>(v: T) -> String {
    if v == T::infinity() {
        return "+inf".into();
    }
    if v == T::neg_infinity() {
        return "-inf".into();
    }
    let a = v.abs();
    if a == T::zero() || (a >= T::of(1e-5) && a < T::of(1e15)) {
        format!("{v}")
    } else {
        format!("{:e}", v.to_f64_lossy())
    }
}

fn write_expr<T: Scalar>(out: &mut String, terms: &[(usize, T)], names: &[String]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (k, &(j, c)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < T::zero() { '-' } else { '+' };
        if k == 0 && sign == '+' {
            let _ = write!(out, " {} {}", number(c), names[j]);
        } else {
            let _ = write!(out, " {sign} {} {}", number(c.abs()), names[j]);
        }
    }
}

pub fn write_lp<T: Scalar>(model: &LpModel<T>) -> String {
    let names: Vec<String> = model.variables.iter().map(|v| sanitize(&v.name)).collect();
    let mut out = String::new();
    out.push_str(match model.sense {
        ObjectiveSense::Minimize => "Minimize\n",
        ObjectiveSense::Maximize => "Maximize\n",
    });
    let dense = model.objective_dense();
    let all: Vec<(usize, T)> = dense.into_iter().enumerate().collect();
    out.push_str(" obj:");
    write_expr(&mut out, &all, &names);
    if model.objective_constant != T::zero() {
        let c = model.objective_constant;
        let sign = if c < T::zero() { '-' } else { '+' };
        let _ = write!(out, " {sign} {}", number(c.abs()));
    }
    out.push_str("\nSubject To\n");
    for (i, c) in model.constraints.iter().enumerate() {
        let name = if c.name.is_empty() { format!("c{i}") } else { sanitize(&c.name) };
        let _ = write!(out, " {name}:");
        write_expr(&mut out, &c.coeffs, &names);
        let rel = match c.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        let _ = writeln!(out, " {rel} {}", number(c.rhs));
    }
    out.push_str("Bounds\n");
    let mut generals = Vec::new();
    let mut binaries = Vec::new();
    for (v, name) in model.variables.iter().zip(&names) {
        let binary = v.integer && v.lower == T::zero() && v.upper == T::one();
        if binary {
            binaries.push(name.as_str());
            continue;
        }
        if v.integer {
            generals.push(name.as_str());
        }
        if v.lower == v.upper {
            let _ = writeln!(out, " {name} = {}", number(v.lower));
        } else if v.lower == T::neg_infinity() && v.upper == T::infinity() {
            let _ = writeln!(out, " {name} free");
        } else if v.lower != T::zero() || v.upper != T::infinity() {
            let _ = writeln!(out, " {} <= {name} <= {}", number(v.lower), number(v.upper));
        }
    }
    for (title, list) in [("Generals", &generals), ("Binaries", &binaries)] {
        if list.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{title}");
        for chunk in list.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Objective,
    Constraints,
    Bounds,
    Generals,
    Binaries,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Plus,
    Minus,
    Colon,
    Rel(Relation),
}

/// A token together with its 1-based position in the file.
type Located = (usize, Tok);

fn section_of(line: &str) -> Option<Option<(Section, Option<ObjectiveSense>)>> {
    let l = line.trim().to_ascii_lowercase();
    let l = l.split_whitespace().collect::<Vec<_>>().join(" ");
    Some(match l.as_str() {
        "minimize" | "minimise" | "minimum" | "min" => Some((Section::Objective, Some(ObjectiveSense::Minimize))),
        "maximize" | "maximise" | "maximum" | "max" => Some((Section::Objective, Some(ObjectiveSense::Maximize))),
        "subject to" | "such that" | "st" | "s.t." | "st." => Some((Section::Constraints, None)),
        "bounds" | "bound" => Some((Section::Bounds, None)),
        "generals" | "general" | "gen" | "integers" => Some((Section::Generals, None)),
        "binaries" | "binary" | "bin" => Some((Section::Binaries, None)),
        "end" => None,
        _ => return None,
    })
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "!\"#$%&()/,.;?@_`'{}|~[]".contains(c)
}

fn tokenize(line: &str, counter: &mut usize, out: &mut Vec<Located>) -> Result<()> {
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        *counter += 1;
        let pos = *counter;
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, len) = match (c, two.as_str()) {
            (_, "<=" | "=<") => (Tok::Rel(Relation::Le), 2),
            (_, ">=" | "=>") => (Tok::Rel(Relation::Ge), 2),
            ('<', _) => (Tok::Rel(Relation::Le), 1),
            ('>', _) => (Tok::Rel(Relation::Ge), 1),
            ('=', _) => (Tok::Rel(Relation::Eq), 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            (':', _) => (Tok::Colon, 1),
            _ if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) => {
                let mut k = i;
                while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                    k += 1;
                }
                if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                    let mut e = k + 1;
                    if e < chars.len() && (chars[e] == '+' || chars[e] == '-') {
                        e += 1;
                    }
                    if e < chars.len() && chars[e].is_ascii_digit() {
                        while e < chars.len() && chars[e].is_ascii_digit() {
                            e += 1;
                        }
                        k = e;
                    }
                }
                let text: String = chars[i..k].iter().collect();
                let v = text.parse::<f64>().map_err(|_| QapError::Parse {
                    position: pos,
                    token: text.clone(),
                    reason: "malformed number".into(),
                })?;
                (Tok::Num(v), k - i)
            }
            _ if is_name_char(c) => {
                let mut k = i;
                while k < chars.len() && is_name_char(chars[k]) {
                    k += 1;
                }
                let text: String = chars[i..k].iter().collect();
                let lower = text.to_ascii_lowercase();
                if lower == "inf" || lower == "infinity" {
                    (Tok::Num(f64::INFINITY), k - i)
                } else {
                    (Tok::Name(text), k - i)
                }
            }
            _ => {
                return Err(QapError::Parse {
                    position: pos,
                    token: c.to_string(),
                    reason: "unexpected character".into(),
                })
            }
        };
        out.push((pos, tok));
        i += len;
    }
    Ok(())
}

struct Reader<T> {
    model: LpModel<T>,
}

impl<T: Scalar> Reader<T> {
    fn var(&mut self, name: &str) -> usize {
        if let Some(j) = self.model.variable_index(name) {
            return j;
        }
        self.model.add_variable(name, T::zero(), T::infinity(), false)
    }
}

fn err(pos: usize, tok: &Tok, reason: &str) -> QapError {
    QapError::Parse {
        position: pos,
        token: format!("{tok:?}"),
        reason: reason.into(),
    }
}

/// Parses `[name :] expr` starting at `*k`. Returns the optional label,
/// the linear terms and the sum of constant terms. Stops before a
/// relation, before the label of the next statement, or at the end.
fn parse_expr<T: Scalar>(
    toks: &[Located],
    k: &mut usize,
    reader: &mut Reader<T>,
) -> Result<(Option<String>, Vec<(usize, T)>, T)> {
    let mut label = None;
    if let (Some((_, Tok::Name(n))), Some((_, Tok::Colon))) = (toks.get(*k), toks.get(*k + 1)) {
        label = Some(n.clone());
        *k += 2;
    }
    let mut terms: Vec<(usize, T)> = Vec::new();
    let mut constant = T::zero();
    loop {
        // Next statement label?
        if let (Some((_, Tok::Name(_))), Some((_, Tok::Colon))) = (toks.get(*k), toks.get(*k + 1)) {
            break;
        }
        let mut sign = 1.0;
        let mut saw_sign = false;
        while let Some((_, t @ (Tok::Plus | Tok::Minus))) = toks.get(*k) {
            if *t == Tok::Minus {
                sign = -sign;
            }
            saw_sign = true;
            *k += 1;
        }
        match toks.get(*k) {
            Some((_, Tok::Num(v))) => {
                let coef = sign * v;
                *k += 1;
                if let Some((_, Tok::Name(n))) = toks.get(*k) {
                    if !matches!(toks.get(*k + 1), Some((_, Tok::Colon))) {
                        let j = reader.var(n);
                        terms.push((j, T::of(coef)));
                        *k += 1;
                        continue;
                    }
                }
                constant += T::of(coef);
            }
            Some((_, Tok::Name(n))) => {
                let j = reader.var(n);
                terms.push((j, T::of(sign)));
                *k += 1;
            }
            Some((pos, t)) if saw_sign => return Err(err(*pos, t, "expected a term after the sign")),
            _ => break,
        }
    }
    Ok((label, terms, constant))
}

fn signed_number(toks: &[Located], k: &mut usize) -> Option<f64> {
    let mut sign = 1.0;
    while let Some((_, t @ (Tok::Plus | Tok::Minus))) = toks.get(*k) {
        if *t == Tok::Minus {
            sign = -sign;
        }
        *k += 1;
    }
    match toks.get(*k) {
        Some((_, Tok::Num(v))) => {
            *k += 1;
            Some(sign * v)
        }
        _ => None,
    }
}

fn parse_bound_line<T: Scalar>(toks: &[Located], reader: &mut Reader<T>) -> Result<()> {
    let (first_pos, first) = &toks[0];
    let fail = |reason: &str| err(*first_pos, first, reason);
    // `name free`
    if let [(_, Tok::Name(n)), (_, Tok::Name(f))] = toks {
        if f.eq_ignore_ascii_case("free") {
            let j = reader.var(n);
            reader.model.variables[j].lower = T::neg_infinity();
            reader.model.variables[j].upper = T::infinity();
            return Ok(());
        }
    }
    let mut k = 0;
    let lead = signed_number(toks, &mut k);
    if let Some(lo) = lead {
        // `lo <= name [<= hi]` or `lo >= name [>= hi]`
        let rel = match toks.get(k) {
            Some((_, Tok::Rel(r))) => *r,
            _ => return Err(fail("expected a relation after the bound")),
        };
        let name = match toks.get(k + 1) {
            Some((_, Tok::Name(n))) => n.clone(),
            _ => return Err(fail("expected a variable name")),
        };
        k += 2;
        let j = reader.var(&name);
        let v = &mut reader.model.variables[j];
        match rel {
            Relation::Le => v.lower = T::of(lo),
            Relation::Ge => v.upper = T::of(lo),
            Relation::Eq => {
                v.lower = T::of(lo);
                v.upper = T::of(lo);
            }
        }
        if let Some((_, Tok::Rel(r2))) = toks.get(k) {
            k += 1;
            let hi = signed_number(toks, &mut k).ok_or_else(|| fail("expected a number"))?;
            match r2 {
                Relation::Le => v.upper = T::of(hi),
                Relation::Ge => v.lower = T::of(hi),
                Relation::Eq => return Err(fail("unexpected '=' in a double bound")),
            }
        }
    } else {
        let name = match toks.first() {
            Some((_, Tok::Name(n))) => n.clone(),
            _ => return Err(fail("expected a variable name")),
        };
        let rel = match toks.get(1) {
            Some((_, Tok::Rel(r))) => *r,
            _ => return Err(fail("expected a relation")),
        };
        k = 2;
        let val = signed_number(toks, &mut k).ok_or_else(|| fail("expected a number"))?;
        let j = reader.var(&name);
        let v = &mut reader.model.variables[j];
        match rel {
            Relation::Le => v.upper = T::of(val),
            Relation::Ge => v.lower = T::of(val),
            Relation::Eq => {
                v.lower = T::of(val);
                v.upper = T::of(val);
            }
        }
    }
    if k != toks.len() {
        let (pos, t) = &toks[k];
        return Err(err(*pos, t, "trailing tokens in bound"));
    }
    Ok(())
}

pub fn read_lp<T: Scalar>(text: &str) -> Result<LpModel<T>> {
    let mut reader = Reader {
        model: LpModel::new(ObjectiveSense::Minimize),
    };
    let mut counter = 0usize;
    let mut section: Option<Section> = None;
    let mut ended = false;
    let mut obj_toks: Vec<Located> = Vec::new();
    let mut con_toks: Vec<Located> = Vec::new();
    let mut bound_lines: Vec<Vec<Located>> = Vec::new();
    let mut int_toks: Vec<(Section, Located)> = Vec::new();
    let mut saw_objective = false;

    for raw in text.lines() {
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if ended {
            counter += 1;
            return Err(QapError::Parse {
                position: counter,
                token: line.trim().into(),
                reason: "content after End".into(),
            });
        }
        if let Some(sec) = section_of(line) {
            match sec {
                Some((s, sense)) => {
                    if let Some(sense) = sense {
                        reader.model.sense = sense;
                        saw_objective = true;
                    }
                    section = Some(s);
                }
                None => ended = true,
            }
            continue;
        }
        let mut toks = Vec::new();
        tokenize(line, &mut counter, &mut toks)?;
        match section {
            None => {
                let (pos, t) = &toks[0];
                return Err(err(*pos, t, "expected Minimize or Maximize"));
            }
            Some(Section::Objective) => obj_toks.extend(toks),
            Some(Section::Constraints) => con_toks.extend(toks),
            Some(Section::Bounds) => bound_lines.push(toks),
            Some(s @ (Section::Generals | Section::Binaries)) => int_toks.extend(toks.into_iter().map(|t| (s, t))),
        }
    }
    if !saw_objective {
        return Err(QapError::Parse {
            position: 0,
            token: String::new(),
            reason: "missing objective section".into(),
        });
    }

    let mut k = 0;
    let (_, terms, constant) = parse_expr(&obj_toks, &mut k, &mut reader)?;
    if let Some((pos, t)) = obj_toks.get(k) {
        return Err(err(*pos, t, "unexpected token in objective"));
    }
    for (j, c) in terms {
        if c != T::zero() {
            let cur = reader.model.objective.iter().position(|&(v, _)| v == j);
            match cur {
                Some(p) => reader.model.objective[p].1 += c,
                None => reader.model.objective.push((j, c)),
            }
        }
    }
    reader.model.objective_constant = constant;

    let mut k = 0;
    while k < con_toks.len() {
        let start = con_toks[k].clone();
        let (label, terms, constant) = parse_expr(&con_toks, &mut k, &mut reader)?;
        let rel = match con_toks.get(k) {
            Some((_, Tok::Rel(r))) => *r,
            Some((pos, t)) => return Err(err(*pos, t, "expected a relation")),
            None => return Err(err(start.0, &start.1, "constraint has no relation")),
        };
        k += 1;
        let rhs = signed_number(&con_toks, &mut k).ok_or_else(|| match con_toks.get(k) {
            Some((pos, t)) => err(*pos, t, "expected a right-hand side number"),
            None => err(start.0, &start.1, "constraint has no right-hand side"),
        })?;
        let name = label.unwrap_or_else(|| format!("c{}", reader.model.num_constraints()));
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(terms.len());
        for (j, c) in terms {
            match merged.iter_mut().find(|(v, _)| *v == j) {
                Some(e) => e.1 += c,
                None => merged.push((j, c)),
            }
        }
        reader.model.add_constraint(name, merged, rel, T::of(rhs) - constant);
    }

    for line in &bound_lines {
        parse_bound_line(line, &mut reader)?;
    }
    for (sec, (pos, tok)) in int_toks {
        let Tok::Name(n) = &tok else {
            return Err(err(pos, &tok, "expected a variable name"));
        };
        let j = reader.var(n);
        reader.model.variables[j].integer = true;
        if sec == Section::Binaries {
            reader.model.variables[j].lower = T::zero();
            reader.model.variables[j].upper = T::one();
        }
    }
    reader.model.validate()?;
    Ok(reader.model)
}
