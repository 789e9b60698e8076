use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use steering_core::lhs::povm_lower_bound_werner;
use steering_core::radii::{
    closed_form_r2, critical_radius_dichotomic, critical_radius_rank, rank_scan,
    reference_thresholds, FamilyKind, StateFamily,
};

use crate::{Failure, Format};

pub const RADII_SCHEMA: &str = "steering-radii/1";
pub const SCAN_SCHEMA: &str = "steering-conjecture-scan/1";

#[derive(Debug, Clone, Serialize)]
pub struct RadiiRow {
    pub d: usize,
    pub r2_closed_form: f64,
    pub r2_solver: f64,
    pub r_pvm: f64,
    pub povm_lower_bound: Option<f64>,
    pub separability: f64,
}

pub fn radii_rows(
    kind: FamilyKind,
    d_min: usize,
    d_max: usize,
    rank_one_only: bool,
) -> Result<Vec<RadiiRow>, Failure> {
    let rows: Result<Vec<RadiiRow>, steering_core::Error> = (d_min..=d_max)
        .into_par_iter()
        .map(|d| {
            let family = StateFamily::new(kind, d)?;
            let r2_solver = if rank_one_only {
                critical_radius_rank(family, 1)?
            } else {
                critical_radius_dichotomic(family)?.value
            };
            let refs = reference_thresholds(family);
            let povm_lower_bound = match kind {
                FamilyKind::Werner => Some(povm_lower_bound_werner(d)?),
                FamilyKind::Isotropic => None,
            };
            Ok(RadiiRow {
                d,
                r2_closed_form: closed_form_r2(family),
                r2_solver,
                r_pvm: refs.projective,
                povm_lower_bound,
                separability: refs.separability,
            })
        })
        .collect();
    Ok(rows?)
}

#[derive(Serialize)]
struct RadiiDocument<'a> {
    schema: &'a str,
    family: FamilyKind,
    rows: &'a [RadiiRow],
}

pub fn write_radii(
    w: &mut dyn Write,
    kind: FamilyKind,
    rows: &[RadiiRow],
    format: Format,
) -> Result<(), Failure> {
    match format {
        Format::Csv => {
            writeln!(w, "# schema={RADII_SCHEMA} family={kind}")?;
            let mut out = csv::Writer::from_writer(w);
            for row in rows {
                out.serialize(row)?;
            }
            out.flush()?;
        }
        Format::Json => {
            let doc = RadiiDocument {
                schema: RADII_SCHEMA,
                family: kind,
                rows,
            };
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub family: FamilyKind,
    pub d: usize,
    pub ranks: usize,
    pub argmin: usize,
    pub min_radius: f64,
    pub flagged: bool,
    pub per_rank: Vec<f64>,
}

#[derive(Serialize)]
struct ScanCsvRow<'a> {
    family: FamilyKind,
    d: usize,
    ranks: usize,
    argmin: usize,
    min_radius: f64,
    flagged: bool,
    per_rank: &'a str,
}

pub fn scan_rows(
    kinds: &[FamilyKind],
    d_min: usize,
    d_max: usize,
) -> Result<Vec<ScanRow>, Failure> {
    let mut rows = Vec::new();
    for &kind in kinds {
        for row in rank_scan(kind, d_min, d_max)? {
            let min_radius = row.per_rank[row.argmin - 1].1;
            rows.push(ScanRow {
                family: kind,
                d: row.d,
                ranks: row.per_rank.len(),
                argmin: row.argmin,
                min_radius,
                flagged: row.argmin != 1,
                per_rank: row.per_rank.iter().map(|&(_, v)| v).collect(),
            });
        }
    }
    Ok(rows)
}

#[derive(Serialize)]
struct ScanDocument<'a> {
    schema: &'a str,
    rows: &'a [ScanRow],
}

pub fn write_scan(w: &mut dyn Write, rows: &[ScanRow], format: Format) -> Result<(), Failure> {
    match format {
        Format::Csv => {
            writeln!(w, "# schema={SCAN_SCHEMA}")?;
            let mut out = csv::Writer::from_writer(w);
            for row in rows {
                let per_rank: Vec<String> = row.per_rank.iter().map(|v| v.to_string()).collect();
                let per_rank = per_rank.join(";");
                out.serialize(ScanCsvRow {
                    family: row.family,
                    d: row.d,
                    ranks: row.ranks,
                    argmin: row.argmin,
                    min_radius: row.min_radius,
                    flagged: row.flagged,
                    per_rank: &per_rank,
                })?;
            }
            out.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(
                &mut *w,
                &ScanDocument {
                    schema: SCAN_SCHEMA,
                    rows,
                },
            )?;
            writeln!(w)?;
        }
    }
    Ok(())
}
