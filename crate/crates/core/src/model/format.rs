//! Line-oriented problem files (`.ccvp`).
//!
//! ```text
//! # comment
//! vars x1 x2
//! objective -3*x1 - 2*x2 + 3
//! constraint (x1 - 1)^3 + x2
//! cone orthant 3          # repeated cone lines stack into a product
//! convex false
//! point xbar 1 0
//! ```

use std::fmt::Write as _;

use super::parse::parse_expression_at;
use super::{ModelError, Polynomial, Problem};
use crate::cone::{BlockKind, Cone};

fn err(line: usize, col: usize, msg: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

/// Splits off the first whitespace-delimited word; returns it, the rest of
/// the line, and the 0-based char column where the rest begins.
fn split_keyword(line: &str) -> (&str, &str, usize) {
    let trimmed_start = line.len() - line.trim_start().len();
    let body = &line[trimmed_start..];
    let kw_end = body.find(char::is_whitespace).unwrap_or(body.len());
    let rest = &body[kw_end..];
    let rest_start = trimmed_start + kw_end + (rest.len() - rest.trim_start().len());
    (
        &body[..kw_end],
        rest.trim(),
        line[..rest_start].chars().count(),
    )
}

fn parse_real(tok: &str, line: usize) -> Result<f64, ModelError> {
    tok.parse::<f64>()
        .map_err(|_| err(line, 1, format!("malformed number '{tok}'")))
}

pub fn parse_problem(text: &str) -> Result<Problem, ModelError> {
    let mut vars: Option<Vec<String>> = None;
    let mut objectives: Vec<Polynomial> = Vec::new();
    let mut constraints: Vec<Polynomial> = Vec::new();
    let mut cones: Vec<Cone> = Vec::new();
    let mut convex = false;
    let mut points: Vec<(String, Vec<String>, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let (kw, rest, rest_col) = split_keyword(line);
        let need_vars = |vars: &Option<Vec<String>>| {
            vars.clone()
                .ok_or_else(|| err(line_no, 1, format!("'{kw}' before 'vars'")))
        };
        match kw {
            "vars" => {
                if vars.is_some() {
                    return Err(err(line_no, 1, "'vars' declared twice"));
                }
                let names: Vec<String> = rest.split_whitespace().map(String::from).collect();
                if names.is_empty() {
                    return Err(err(line_no, 1, "'vars' needs at least one name"));
                }
                for name in &names {
                    let mut chars = name.chars();
                    let ok = chars
                        .next()
                        .is_some_and(|c| c.is_alphabetic() || c == '_')
                        && chars.all(|c| c.is_alphanumeric() || c == '_');
                    if !ok {
                        return Err(err(line_no, 1, format!("invalid variable name '{name}'")));
                    }
                }
                vars = Some(names);
            }
            "objective" | "constraint" => {
                let v = need_vars(&vars)?;
                let poly = parse_expression_at(rest, &v, line_no, rest_col)?;
                if kw == "objective" {
                    objectives.push(poly);
                } else {
                    constraints.push(poly);
                }
            }
            "cone" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(err(line_no, 1, "expected 'cone <orthant|zero|soc> <dim>'"));
                }
                let dim: usize = parts[1]
                    .parse()
                    .map_err(|_| err(line_no, 1, format!("invalid cone dimension '{}'", parts[1])))?;
                let cone = match parts[0] {
                    "orthant" => Cone::orthant(dim),
                    "zero" => Cone::zero(dim),
                    "soc" => Cone::second_order(dim),
                    other => return Err(err(line_no, 1, format!("unknown cone kind '{other}'"))),
                }
                .map_err(|e| err(line_no, 1, e.to_string()))?;
                cones.push(cone);
            }
            "convex" => {
                convex = match rest {
                    "true" => true,
                    "false" => false,
                    other => return Err(err(line_no, 1, format!("expected true or false, got '{other}'"))),
                };
            }
            "point" => {
                let mut parts = rest.split_whitespace();
                let name = parts
                    .next()
                    .ok_or_else(|| err(line_no, 1, "'point' needs a name"))?;
                points.push((name.to_string(), parts.map(String::from).collect(), line_no));
            }
            other => return Err(err(line_no, 1, format!("unknown keyword '{other}'"))),
        }
    }

    let vars = vars.ok_or_else(|| err(1, 1, "missing 'vars' line"))?;
    if cones.is_empty() {
        return Err(err(1, 1, "missing 'cone' line"));
    }
    let cone = Cone::product(cones)?;
    let mut problem = Problem::new(vars, objectives, constraints, cone, convex)?;
    for (name, coords, line_no) in points {
        let x = coords
            .iter()
            .map(|c| parse_real(c, line_no))
            .collect::<Result<Vec<f64>, _>>()?;
        if x.len() != problem.n() {
            return Err(err(
                line_no,
                1,
                format!("point '{name}' has {} coordinates, expected {}", x.len(), problem.n()),
            ));
        }
        problem = problem.with_point(&name, x)?;
    }
    Ok(problem)
}

pub(super) fn write_problem(p: &Problem) -> String {
    let names = p.var_names();
    let mut out = String::new();
    writeln!(out, "vars {}", names.join(" ")).unwrap();
    for f in p.objectives() {
        writeln!(out, "objective {}", f.display_with(names)).unwrap();
    }
    for g in p.constraints() {
        writeln!(out, "constraint {}", g.display_with(names)).unwrap();
    }
    for b in p.cone().blocks() {
        let kind = match b.kind {
            BlockKind::Orthant => "orthant",
            BlockKind::Zero => "zero",
            BlockKind::SecondOrder => "soc",
        };
        writeln!(out, "cone {kind} {}", b.len).unwrap();
    }
    writeln!(out, "convex {}", p.declared_convex()).unwrap();
    for (name, x) in p.named_points() {
        let coords: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "point {name} {}", coords.join(" ")).unwrap();
    }
    out
}
