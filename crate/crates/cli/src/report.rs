use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Rows shown at each end of a long table in the human report.
const TABLE_EDGE: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Bool(bool),
    Int(usize),
    Num(f64),
    Vector(Vec<f64>),
    Text(String),
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<Vec<f64>> for Value {
    fn from(v: Vec<f64>) -> Self {
        Value::Vector(v)
    }
}

impl From<&[f64]> for Value {
    fn from(v: &[f64]) -> Self {
        Value::Vector(v.to_vec())
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

/// 17 significant digits.
fn machine_num(v: f64) -> String {
    format!("{v:.16e}")
}

impl Value {
    fn machine(&self) -> String {
        match self {
            Value::Bool(b) => b.to_string(),
            Value::Int(i) => i.to_string(),
            Value::Num(v) => machine_num(*v),
            Value::Vector(v) => v.iter().map(|x| machine_num(*x)).collect::<Vec<_>>().join(" "),
            Value::Text(t) => t.clone(),
        }
    }

    fn human(&self) -> String {
        match self {
            Value::Num(v) => v.to_string(),
            Value::Vector(v) => format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")),
            other => other.machine(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Key prefix in machine output, e.g. `step`.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// A command outcome. `holds` decides the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub title: String,
    pub holds: bool,
    fields: Vec<(String, Value)>,
    tables: Vec<Table>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            holds: false,
            fields: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn field(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn table(&mut self, table: Table) -> &mut Self {
        self.tables.push(table);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn exit_code(&self) -> i32 {
        if self.holds {
            0
        } else {
            1
        }
    }

    /// `key value` lines sorted by key; table cells become
    /// `<table>.<row>.<column>` with zero-padded 1-based rows.
    pub fn machine(&self) -> String {
        let mut map = BTreeMap::new();
        map.insert("holds".to_string(), self.holds.to_string());
        for (k, v) in &self.fields {
            map.insert(k.clone(), v.machine());
        }
        for t in &self.tables {
            let width = t.rows.len().to_string().len().max(4);
            for (r, row) in t.rows.iter().enumerate() {
                for (c, v) in t.columns.iter().zip(row) {
                    map.insert(format!("{}.{:0width$}.{}", t.name, r + 1, c), machine_num(*v));
                }
            }
        }
        let mut out = String::new();
        for (k, v) in map {
            writeln!(out, "{k} {v}").unwrap();
        }
        out
    }

    pub fn human(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.title).unwrap();
        let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0).max(5);
        writeln!(out, "  {:width$}  {}", "holds", self.holds).unwrap();
        for (k, v) in &self.fields {
            writeln!(out, "  {k:width$}  {}", v.human()).unwrap();
        }
        for t in &self.tables {
            writeln!(out).unwrap();
            render_table(&mut out, t);
        }
        out
    }
}

fn render_table(out: &mut String, t: &Table) {
    let mut header = format!("  {:>6}", t.name);
    for c in &t.columns {
        write!(header, "  {c:>14}").unwrap();
    }
    writeln!(out, "{header}").unwrap();
    let n = t.rows.len();
    for (r, row) in t.rows.iter().enumerate() {
        if n > 2 * TABLE_EDGE && r == TABLE_EDGE {
            writeln!(out, "  {:>6}  ({} rows omitted)", "...", n - 2 * TABLE_EDGE).unwrap();
        }
        if n > 2 * TABLE_EDGE && (TABLE_EDGE..n - TABLE_EDGE).contains(&r) {
            continue;
        }
        let mut line = format!("  {:>6}", r + 1);
        for v in row {
            write!(line, "  {v:>14.6e}").unwrap();
        }
        writeln!(out, "{line}").unwrap();
    }
}
