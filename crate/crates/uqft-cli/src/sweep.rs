//! Single runs and parameter sweeps of a [`Job`].

use rayon::prelude::*;
use toml::{Table as TomlTable, Value};

use crate::kinds::{Context, Job, Row};
use crate::params::Reader;
use crate::scenario::SweepConfig;
use crate::table::{Cell, Column, Table};

/// Why a run produced no table.
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    /// The scenario does not validate.
    Invalid(Vec<String>),
    /// The scenario is valid but evaluation failed.
    Failed(Vec<String>),
}

pub fn parse_job<J: Job>(params: &TomlTable, ctx: &Context) -> Result<J, Vec<String>> {
    let mut r = Reader::new(params);
    let job = J::parse(&mut r, ctx);
    r.finish().map(|_| job)
}

fn with_axis(params: &TomlTable, axis: &str, value: f64) -> TomlTable {
    let mut p = params.clone();
    p.insert(axis.to_string(), Value::Float(value));
    p
}

fn error_row(width: usize, axis_col: usize, value: f64, msg: String) -> Row {
    let mut row = vec![Cell::Empty; width];
    row[axis_col] = Cell::Num(value);
    row[width - 1] = Cell::Text(format!("error: {msg}"));
    row
}

/// Evaluates `J` once, or once per sweep value in ascending order.
pub fn run_job<J: Job>(
    params: &TomlTable,
    sweep: Option<&SweepConfig>,
    kind: &str,
    ctx: &Context,
) -> Result<Table, RunError> {
    let Some(sweep) = sweep else {
        let job = parse_job::<J>(params, ctx).map_err(RunError::Invalid)?;
        let mut table = Table::new(J::columns(ctx));
        table.notes = job.notes(ctx);
        for row in job
            .rows(ctx)
            .map_err(|e| RunError::Failed(vec![e.to_string()]))?
        {
            table.push(row);
        }
        return Ok(table);
    };
    if J::AXES.is_empty() {
        return Err(RunError::Invalid(vec![format!(
            "sweep: kind `{kind}` does not support sweeps"
        )]));
    }
    let Some(&(axis, dim)) = J::AXES.iter().find(|(name, _)| *name == sweep.axis) else {
        let names: Vec<&str> = J::AXES.iter().map(|(n, _)| *n).collect();
        return Err(RunError::Invalid(vec![format!(
            "sweep.axis: `{}` cannot be swept for kind `{kind}`; choose one of {}",
            sweep.axis,
            names.join(", ")
        )]));
    };
    let values = sweep.values().map_err(RunError::Invalid)?;
    let first =
        parse_job::<J>(&with_axis(params, axis, values[0]), ctx).map_err(RunError::Invalid)?;

    let mut columns = J::columns(ctx);
    let axis_col = match columns.iter().position(|c| c.name == axis) {
        Some(i) => i,
        None => {
            columns.insert(0, Column::num(axis, &dim.label(&ctx.units)));
            0
        }
    };
    let prepend = columns.len() > J::columns(ctx).len();
    let width = columns.len();

    let points: Vec<Vec<Row>> = values
        .par_iter()
        .map(|&v| {
            let outcome = parse_job::<J>(&with_axis(params, axis, v), ctx)
                .map_err(|e| e.join("; "))
                .and_then(|job| job.rows(ctx).map_err(|e| e.to_string()));
            match outcome {
                Ok(rows) => rows
                    .into_iter()
                    .map(|mut row| {
                        if prepend {
                            row.insert(0, Cell::Num(v));
                        }
                        row
                    })
                    .collect(),
                Err(msg) => vec![error_row(width, axis_col, v, msg)],
            }
        })
        .collect();

    let mut table = Table::new(columns);
    table.notes = first.notes(ctx);
    table
        .notes
        .push(format!("sweep over {axis}: {} points", values.len()));
    for row in points.into_iter().flatten() {
        table.push(row);
    }
    Ok(table)
}
