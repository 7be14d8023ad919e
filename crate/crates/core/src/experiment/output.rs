use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::observables::{SelectionSnapshot, TimeSample};

use super::sweep::{RcEstimate, SweepResult};

/// Six-decimal fixed point; infinities as `inf` / `-inf`, and no `-0`.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0.000000".into();
    }
    format!("{v:.6}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut out = create(path)?;
    body(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

/// Results table: one row per run, then an `agg` row closing each grid point.
pub fn write_results_to<W: Write>(result: &SweepResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "r,w,replicate,mean_fc,var_fc,absorbed,absorbed_at,seed,stderr_fc")?;
    let nw = result.spec.w_values.len();
    for point in &result.points {
        for run in result.runs_at(point.ri, point.wi) {
            let res = &run.result;
            let absorbed_at = res.absorbed_at.map(|g| g.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},",
                format_float(run.r),
                format_float(run.w),
                run.replicate,
                format_float(res.mean_fc),
                format_float(res.var_fc),
                res.absorbed,
                absorbed_at,
                res.seed
            )?;
        }
        debug_assert_eq!(
            point.ri * nw + point.wi,
            result.points.iter().position(|p| p == point).unwrap()
        );
        writeln!(
            out,
            "{},{},agg,{},{},,,,{}",
            format_float(point.r),
            format_float(point.w),
            format_float(point.mean_fc),
            format_float(point.var_fc),
            format_float(point.stderr_fc)
        )?;
    }
    out.flush()
}

pub fn write_results_csv(result: &SweepResult, path: &Path) -> Result<()> {
    write_file(path, |out| write_results_to(result, out))
}

/// Critical-point table: `w,rc,status,stderr,in_range_replicates`.
pub fn write_critical_csv(result: &SweepResult, path: &Path) -> Result<()> {
    write_file(path, |out| {
        writeln!(out, "w,rc,status,stderr,in_range_replicates")?;
        for c in &result.critical {
            let (rc, status) = match c.estimate {
                RcEstimate::Within(v) => (format_float(v), "within"),
                RcEstimate::AboveRange => (String::new(), "above_range"),
                RcEstimate::BelowRange => (String::new(), "below_range"),
            };
            let inside = c.replicate_estimates.iter().filter(|e| e.value().is_some()).count();
            let stderr = c.stderr.map(format_float).unwrap_or_default();
            writeln!(out, "{},{rc},{status},{stderr},{inside}", format_float(c.w))?;
        }
        Ok(())
    })
}

/// `generation,fc,mean_w,var_w`; preference columns are empty without coevolution.
pub fn write_timeseries_csv(samples: &[TimeSample], path: &Path) -> Result<()> {
    write_file(path, |out| {
        writeln!(out, "generation,fc,mean_w,var_w")?;
        for s in samples {
            match &s.preferences {
                Some(p) => writeln!(
                    out,
                    "{},{},{},{}",
                    s.generation,
                    format_float(s.fc),
                    format_float(p.mean_w),
                    format_float(p.var_w)
                )?,
                None => writeln!(out, "{},{},,", s.generation, format_float(s.fc))?,
            }
        }
        Ok(())
    })
}

/// `generation,bin_low,bin_high,count`, one row per bin per sample.
pub fn write_histogram_csv(samples: &[TimeSample], path: &Path) -> Result<()> {
    write_file(path, |out| {
        writeln!(out, "generation,bin_low,bin_high,count")?;
        for s in samples {
            let Some(p) = &s.preferences else { continue };
            for (i, count) in p.histogram.iter().enumerate() {
                let (lo, hi) = p.bin_edges(i);
                writeln!(
                    out,
                    "{},{},{},{count}",
                    s.generation,
                    format_float(lo),
                    format_float(hi)
                )?;
            }
        }
        Ok(())
    })
}

pub fn write_snapshot(snapshot: &SelectionSnapshot, path: &Path) -> Result<()> {
    write_file(path, |out| snapshot.write_text(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;
    use crate::experiment::{run_sweep, SweepSpec, TopologySpec};
    use crate::topology::Neighbourhood;

    fn spec() -> SweepSpec {
        let mut spec = SweepSpec::new(
            TopologySpec::Lattice {
                side: 8,
                neighbourhood: Neighbourhood::VonNeumann4,
            },
            vec![0.05, 0.5],
            vec![0.0, f64::NEG_INFINITY],
        );
        spec.burn_in = 10;
        spec.measure = 10;
        spec.replicates = 3;
        spec
    }

    #[test]
    fn float_format() {
        assert_eq!(format_float(0.1), "0.100000");
        assert_eq!(format_float(-0.0), "0.000000");
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_float(2.0 / 3.0), "0.666667");
    }

    #[test]
    fn row_counts_and_schema() {
        let result = run_sweep(&spec(), Execution::Sequential).unwrap();
        let mut buf = Vec::new();
        write_results_to(&result, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 12 + 4);
        assert!(lines[0].starts_with("r,w,replicate,mean_fc,var_fc,absorbed,absorbed_at,seed"));
        assert_eq!(lines.iter().filter(|l| l.contains(",agg,")).count(), 4);
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 9);
            let mean = line.split(',').nth(3).unwrap();
            assert_eq!(mean.split('.').nth(1).unwrap().len(), 6);
        }
        for run in &result.runs {
            if run.result.absorbed {
                let row = lines
                    .iter()
                    .find(|l| l.ends_with(&format!(",{},", run.result.seed)))
                    .unwrap();
                let cols: Vec<&str> = row.split(',').collect();
                assert_eq!(cols[5], "true");
                assert!(cols[6].parse::<u64>().is_ok());
            }
        }
        assert!(!text.contains('\r'));
    }

    #[test]
    fn files_are_created_with_parent_dirs() {
        let dir = tempfile::tempdir().unwrap();
        let result = run_sweep(&spec(), Execution::Sequential).unwrap();
        let path = dir.path().join("nested/results.csv");
        write_results_csv(&result, &path).unwrap();
        write_critical_csv(&result, &dir.path().join("rc.csv")).unwrap();
        assert!(std::fs::metadata(&path).unwrap().len() > 0);
        let rc = std::fs::read_to_string(dir.path().join("rc.csv")).unwrap();
        assert_eq!(rc.lines().count(), 3);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        std::fs::write(&file, "x").unwrap();
        let result = run_sweep(&spec(), Execution::Sequential).unwrap();
        let err = write_results_csv(&result, &file.join("sub/results.csv")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
