//! CSV traces and snapshots. Floats are written with 17 significant digits
//! so every value reads back bit-identical.

use std::io::{Read, Write};

use crate::error::Error;
use crate::grid::{DomainGrid, ExtremaRecord, Field, Region};

pub const TRACE_HEADER: [&str; 8] = ["t", "u_plus", "u_minus", "U_plus", "U_minus", "psi_plus", "psi_minus", "u_inf"];

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse(s: &str) -> Result<f64, Error> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Config(format!("bad number {s:?}: {e}")))
}

pub fn write_trace<W: Write>(out: W, records: &[ExtremaRecord]) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in records {
        w.write_record(
            [
                r.t,
                r.u_plus,
                r.u_minus,
                r.big_u_plus,
                r.big_u_minus,
                r.psi_plus,
                r.psi_minus,
                r.u_inf,
            ]
            .map(fmt),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<ExtremaRecord>, Error> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let v: Vec<f64> = row.iter().map(parse).collect::<Result<_, _>>()?;
        if v.len() != TRACE_HEADER.len() {
            return Err(Error::Config(format!("trace row has {} columns", v.len())));
        }
        out.push(ExtremaRecord {
            t: v[0],
            u_plus: v[1],
            u_minus: v[2],
            big_u_plus: v[3],
            big_u_minus: v[4],
            psi_plus: v[5],
            psi_minus: v[6],
            u_inf: v[7],
        });
    }
    Ok(out)
}

/// Columns `node_index, x1[, x2], region, value`, one row per node in
/// storage order.
pub fn write_snapshot<W: Write>(out: W, grid: &DomainGrid, field: &Field) -> Result<(), Error> {
    field.check_matches(grid)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["node_index", "x1"];
    if grid.dim() == 2 {
        header.push("x2");
    }
    header.extend(["region", "value"]);
    w.write_record(&header)?;
    for (node, &value) in field.values().iter().enumerate() {
        let x = grid.coords(node);
        let mut row = vec![node.to_string(), fmt(x[0])];
        if grid.dim() == 2 {
            row.push(fmt(x[1]));
        }
        row.push(
            match grid.region(node) {
                Region::Interior => "interior",
                Region::Collar => "collar",
            }
            .to_string(),
        );
        row.push(fmt(value));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a snapshot back into a field. Interior rows must precede collar rows.
pub fn read_snapshot<R: Read>(input: R) -> Result<Field, Error> {
    let mut r = csv::Reader::from_reader(input);
    let width = r.headers()?.len();
    if width != 4 && width != 5 {
        return Err(Error::Config(format!("snapshot has {width} columns")));
    }
    let mut values = Vec::new();
    let mut n_interior = 0;
    for row in r.records() {
        let row = row?;
        let region = &row[width - 2];
        match region {
            "interior" if n_interior == values.len() => n_interior += 1,
            "interior" => return Err(Error::Config("interior row after collar rows".into())),
            "collar" => {}
            other => return Err(Error::Config(format!("unknown region {other:?}"))),
        }
        values.push(parse(&row[width - 1])?);
    }
    Ok(Field::from_values(n_interior, values))
}
