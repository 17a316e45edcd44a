//! Weight and Hodge tables for the standard families, as plain integer rows.
//!
//! | id | family                                  | columns                 |
//! |----|-----------------------------------------|-------------------------|
//! | 1  | diagonal `x^m1 + y^m2`, coprime         | k, W, H                 |
//! | 2  | `G^0_{2,m}`                             | k, W, H                 |
//! | 3  | `G^1_{2,m}`                             | k, W, H                 |
//! | 4  | `G^2_{2,m}`                             | k, W, H                 |
//! | 5  | `K^2_{2,m}`                             | k, W, H                 |
//! | 6  | `K^3_{3,m}` against `G^0_{3,m}`         | k, W_K, W_G, tau        |
//! | 7  | `G^1`, `G^2` with coprime `(m1, m2)`    | k, W0, W1, W2, H1, H2   |

use std::fmt::Write as _;

use serde::Serialize;

use crate::families::{hodge_report, FamilySpec, HodgeCheckError};

pub const TABLE_IDS: [u8; 7] = [1, 2, 3, 4, 5, 6, 7];

/// Parameters the tables range over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRange {
    /// Equilateral exponents `m` (tables 2 to 6).
    pub ms: Vec<i64>,
    /// Coprime pairs `(m1, m2)` (tables 1 and 7).
    pub pairs: Vec<(i64, i64)>,
    /// Run the enumerator alongside every closed form.
    pub verify: bool,
}

impl Default for TableRange {
    fn default() -> Self {
        TableRange {
            ms: (2..=6).collect(),
            pairs: vec![(2, 3), (2, 5), (3, 5)],
            verify: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Table {
    pub id: u8,
    pub family: String,
    /// Exponent vector the rows belong to.
    pub m: Vec<i64>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<i64>>,
}

impl Table {
    fn new(id: u8, family: &str, m: Vec<i64>, columns: &[&str]) -> Table {
        Table {
            id,
            family: family.to_string(),
            m,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Column `name` as a vector indexed by row.
    pub fn column(&self, name: &str) -> Option<Vec<i64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// CSV with a header line; `m` is written as `m1;m2;...`.
    pub fn to_csv(&self) -> String {
        let mut s = format!("table,family,m,{}\n", self.columns.join(","));
        let m = self.m.iter().map(i64::to_string).collect::<Vec<_>>().join(";");
        for row in &self.rows {
            let cells = row.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
            let _ = writeln!(s, "{},{},{},{}", self.id, self.family, m, cells);
        }
        s
    }
}

fn report(spec: &FamilySpec, verify: bool) -> Result<(Vec<i64>, Vec<i64>), HodgeCheckError> {
    let r = hodge_report(spec, verify)?;
    Ok((r.weights.iter().map(|&w| w as i64).collect(), r.hodge))
}

fn weight_hodge_table(id: u8, family: &str, spec: FamilySpec, verify: bool) -> Result<Table, HodgeCheckError> {
    let (w, h) = report(&spec, verify)?;
    let mut t = Table::new(id, family, spec.m, &["k", "W", "H"]);
    t.rows = (0..w.len()).map(|k| vec![k as i64, w[k], h[k]]).collect();
    Ok(t)
}

/// All tables with identifier `id` over `range`.
pub fn generate(id: u8, range: &TableRange) -> Result<Vec<Table>, HodgeCheckError> {
    let v = range.verify;
    match id {
        1 => range
            .pairs
            .iter()
            .map(|&(a, b)| weight_hodge_table(1, "D", FamilySpec::diagonal(vec![a, b]), v))
            .collect(),
        2..=4 => range
            .ms
            .iter()
            .map(|&m| weight_hodge_table(id, &format!("G{}", id - 2), FamilySpec::reflection(vec![m, m], id as usize - 2), v))
            .collect(),
        5 => range
            .ms
            .iter()
            .map(|&m| weight_hodge_table(5, "K2", FamilySpec::kloosterman(vec![m, m], 2), v))
            .collect(),
        6 => range
            .ms
            .iter()
            .map(|&m| {
                let (wk, _) = report(&FamilySpec::kloosterman(vec![m; 3], 3), v)?;
                let (wg, _) = report(&FamilySpec::diagonal(vec![m; 3]), v)?;
                let mut t = Table::new(6, "K3-G0", vec![m; 3], &["k", "W_K", "W_G", "tau"]);
                t.rows = (0..wk.len()).map(|k| vec![k as i64, wk[k], wg[k], wk[k] - wg[k]]).collect();
                Ok(t)
            })
            .collect(),
        7 => range
            .pairs
            .iter()
            .map(|&(a, b)| {
                let (w0, _) = report(&FamilySpec::diagonal(vec![a, b]), v)?;
                let (w1, h1) = report(&FamilySpec::reflection(vec![a, b], 1), v)?;
                let (w2, h2) = report(&FamilySpec::reflection(vec![a, b], 2), v)?;
                let mut t = Table::new(7, "G", vec![a, b], &["k", "W0", "W1", "W2", "H1", "H2"]);
                t.rows = (0..w0.len())
                    .map(|k| vec![k as i64, w0[k], w1[k], w2[k], h1[k], h2[k]])
                    .collect();
                Ok(t)
            })
            .collect(),
        _ => Ok(Vec::new()),
    }
}

/// Every table over `range`, in identifier order.
pub fn generate_all(range: &TableRange) -> Result<Vec<Table>, HodgeCheckError> {
    let mut out = Vec::new();
    for id in TABLE_IDS {
        out.extend(generate(id, range)?);
    }
    Ok(out)
}
