//! Runs CSV: one row per (run, sweep point), rows of a run contiguous and
//! sweep-sorted. Lines starting with `#` before the header carry provenance.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::dataset::{CellDesign, CurveKind, SimulationRun};
use crate::error::{Error, Result};

pub const HEADER: [&str; 10] = [
    "run_id",
    "curve_kind",
    "wafer_thickness_um",
    "substrate_doping_cm3",
    "pyramid_angle_deg",
    "rear_contact_thickness_um",
    "arc_thickness_nm",
    "back_reflectivity_frac",
    "sweep",
    "value",
];

/// Writes runs with their list index as `run_id`. Each entry of `comments`
/// becomes a `# ...` line above the header.
pub fn write_runs_to<W: Write>(runs: &[SimulationRun], comments: &[String], out: W) -> Result<()> {
    let mut out = out;
    for c in comments {
        writeln!(out, "# {c}").map_err(|e| Error::io("<writer>", e))?;
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::InvalidArgument(format!("csv write: {e}"));
    w.write_record(HEADER).map_err(csv_err)?;
    for (id, run) in runs.iter().enumerate() {
        let design = run.design.to_array();
        for (s, v) in run.sweep.iter().zip(&run.values) {
            let mut rec: Vec<String> = Vec::with_capacity(10);
            rec.push(id.to_string());
            rec.push(run.curve_kind.as_str().to_string());
            rec.extend(design.iter().map(|x| x.to_string()));
            rec.push(s.to_string());
            rec.push(v.to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

pub fn write_runs(runs: &[SimulationRun], comments: &[String], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_runs_to(runs, comments, BufWriter::new(f))
}

pub fn read_runs(path: impl AsRef<Path>) -> Result<Vec<SimulationRun>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_runs_from(f)
}

struct Pending {
    id: String,
    first_line: u64,
    last_line: u64,
    run: SimulationRun,
}

fn finish(p: Pending) -> Result<SimulationRun> {
    p.run.validate().map_err(|e| Error::Parse {
        line: p.last_line,
        msg: format!("run {} (from line {}): {e}", p.id, p.first_line),
    })?;
    Ok(p.run)
}

pub fn read_runs_from<R: Read>(input: R) -> Result<Vec<SimulationRun>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    if headers.is_empty() {
        return Err(Error::EmptyInput("runs file has no header".into()));
    }
    let header_line = rdr.position().line().max(1);
    let missing: Vec<&str> = HEADER
        .iter()
        .copied()
        .filter(|h| !headers.iter().any(|x| x == *h))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Parse {
            line: header_line,
            msg: format!("missing column(s): {}", missing.join(", ")),
        });
    }
    let col: Vec<usize> = HEADER
        .iter()
        .map(|h| headers.iter().position(|x| x == *h).unwrap())
        .collect();

    let mut runs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut pending: Option<Pending> = None;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| rec.get(col[i]).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            field(i).parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!("column {}: `{}` is not a number", HEADER[i], field(i)),
            })
        };
        let id = field(0).to_string();
        let kind: CurveKind = field(1).parse().map_err(|e: Error| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        let mut design = [0.0; 6];
        for (k, slot) in design.iter_mut().enumerate() {
            *slot = num(2 + k)?;
        }
        let design = CellDesign::from_array(design);
        let sweep = num(8)?;
        let value = num(9)?;

        let same_run = pending.as_ref().is_some_and(|p| p.id == id);
        if same_run {
            let p = pending.as_mut().unwrap();
            if p.run.curve_kind != kind || p.run.design != design {
                return Err(Error::Parse {
                    line,
                    msg: format!("run {id}: design or curve kind changes within run"),
                });
            }
            let prev = *p.run.sweep.last().unwrap();
            if sweep <= prev {
                return Err(Error::Parse {
                    line,
                    msg: format!("run {id}: sweep {sweep} does not increase (previous {prev})"),
                });
            }
            p.run.sweep.push(sweep);
            p.run.values.push(value);
            p.last_line = line;
        } else {
            if let Some(p) = pending.take() {
                runs.push(finish(p)?);
            }
            if !seen.insert(id.clone()) {
                return Err(Error::Parse {
                    line,
                    msg: format!("run {id} is not contiguous"),
                });
            }
            pending = Some(Pending {
                id,
                first_line: line,
                last_line: line,
                run: SimulationRun {
                    design,
                    curve_kind: kind,
                    sweep: vec![sweep],
                    values: vec![value],
                },
            });
        }
    }
    if let Some(p) = pending.take() {
        runs.push(finish(p)?);
    }
    if runs.is_empty() {
        return Err(Error::EmptyInput("runs file contains no data rows".into()));
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_runs(n: usize, seed: u64) -> Vec<SimulationRun> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let design = CellDesign {
                    wafer_thickness_um: rng.random_range(100.0..250.0),
                    substrate_doping_cm3: 10f64.powf(rng.random_range(15.0..19.0)),
                    pyramid_angle_deg: rng.random_range(1.0..89.0),
                    rear_contact_thickness_um: rng.random_range(0.0..30.0),
                    arc_thickness_nm: rng.random_range(50.0..120.0),
                    back_reflectivity_frac: rng.random_range(0.0..1.0),
                };
                let s = rng.random_range(1..20);
                let mut x = 300.0;
                let sweep: Vec<f64> = (0..s)
                    .map(|_| {
                        x += rng.random_range(0.1..60.0);
                        x
                    })
                    .collect();
                SimulationRun {
                    design,
                    curve_kind: CurveKind::Reflectance,
                    values: (0..s).map(|_| rng.random_range(0.0..1.0)).collect(),
                    sweep,
                }
            })
            .collect()
    }

    #[test]
    fn write_then_read_round_trips() {
        let runs = random_runs(10, 1);
        let mut buf = Vec::new();
        write_runs_to(&runs, &["oracle_version=test".into()], &mut buf).unwrap();
        let back = read_runs_from(buf.as_slice()).unwrap();
        assert_eq!(back.len(), runs.len());
        for (a, b) in back.iter().zip(&runs) {
            assert_eq!(a.curve_kind, b.curve_kind);
            for (x, y) in a.design.to_array().iter().zip(b.design.to_array()) {
                assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
            for (x, y) in a.sweep.iter().chain(&a.values).zip(b.sweep.iter().chain(&b.values)) {
                assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.csv");
        let runs = random_runs(3, 2);
        write_runs(&runs, &[], &path).unwrap();
        assert_eq!(read_runs(&path).unwrap(), runs);
        assert!(read_runs(dir.path().join("missing.csv")).is_err());
    }

    const HEAD: &str = "run_id,curve_kind,wafer_thickness_um,substrate_doping_cm3,pyramid_angle_deg,rear_contact_thickness_um,arc_thickness_nm,back_reflectivity_frac,sweep,value\n";

    #[test]
    fn decreasing_sweep_names_line() {
        let text = format!(
            "{HEAD}0,reflectance,180,1e16,50,2,75,0.9,300,0.1\n0,reflectance,180,1e16,50,2,75,0.9,350,0.1\n0,reflectance,180,1e16,50,2,75,0.9,320,0.1\n"
        );
        let err = read_runs_from(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn non_numeric_field_names_line() {
        let text = format!("# c\n{HEAD}0,reflectance,180,abc,50,2,75,0.9,300,0.1\n");
        let err = read_runs_from(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(err.to_string().contains("substrate_doping_cm3"));
    }

    #[test]
    fn missing_column_rejected() {
        let text = "run_id,curve_kind,sweep,value\n0,reflectance,300,0.1\n";
        let err = read_runs_from(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("wafer_thickness_um"), "{err}");
    }

    #[test]
    fn invariant_violation_rejected() {
        let text = format!("{HEAD}0,reflectance,180,1e16,50,2,75,0.9,300,1.4\n");
        assert!(matches!(
            read_runs_from(text.as_bytes()).unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
    }

    #[test]
    fn empty_file_is_empty_input() {
        assert!(matches!(
            read_runs_from("".as_bytes()).unwrap_err(),
            Error::EmptyInput(_)
        ));
        assert!(matches!(
            read_runs_from(HEAD.as_bytes()).unwrap_err(),
            Error::EmptyInput(_)
        ));
    }
}
