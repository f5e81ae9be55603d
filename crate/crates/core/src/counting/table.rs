//! Tables of counts and their CSV form.

use std::io::Write;
use std::time::Instant;

use super::enumerate::CountError;
use super::region::Predicates;
use super::shell::shell_table;
use crate::forms::FormSystem;
use crate::output::write_csv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CountParam {
    Height(u128),
    Box(u128, u128),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountRow {
    pub param: CountParam,
    pub count: u128,
    /// Wall time of the enumeration the row was read from.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    pub system_hash: String,
    pub box_id: String,
    pub predicate_id: String,
    rows: Vec<CountRow>,
}

impl CountTable {
    pub fn new(system_hash: String, box_id: String, predicate_id: String, mut rows: Vec<CountRow>) -> Self {
        rows.sort_by_key(|r| r.param);
        CountTable {
            system_hash,
            box_id,
            predicate_id,
            rows,
        }
    }

    pub fn rows(&self) -> &[CountRow] {
        &self.rows
    }

    /// `(P, count, seconds)` or `(P1, P2, count, seconds)` with a leading
    /// comment line carrying `config_hash`.
    pub fn write_csv<W: Write>(&self, w: W, config_hash: &str) -> std::io::Result<()> {
        let pairs = matches!(self.rows.first().map(|r| r.param), Some(CountParam::Box(..)));
        let header: &[&str] = if pairs {
            &["P1", "P2", "count", "seconds"]
        } else {
            &["P", "count", "seconds"]
        };
        let rows = self.rows.iter().map(|r| {
            let mut v = match r.param {
                CountParam::Height(p) => vec![p.to_string()],
                CountParam::Box(a, b) => vec![a.to_string(), b.to_string()],
            };
            v.push(r.count.to_string());
            v.push(format!("{:.6}", r.seconds));
            v
        });
        write_csv(w, config_hash, header, rows)
    }
}

/// Projective counts for every `P` in `grid` from one enumeration at the
/// largest `P`.
pub fn projective_count_table(system: &FormSystem, preds: &Predicates, grid: &[u128]) -> Result<CountTable, CountError> {
    let pmax = grid.iter().copied().max().unwrap_or(0);
    let start = Instant::now();
    let table = shell_table(system, preds, pmax)?;
    let seconds = start.elapsed().as_secs_f64();
    let rows = grid
        .iter()
        .map(|&p| CountRow {
            param: CountParam::Height(p),
            count: table.projective_count(p),
            seconds,
        })
        .collect();
    Ok(CountTable::new(
        system.fingerprint(),
        "height".into(),
        preds.id(),
        rows,
    ))
}
