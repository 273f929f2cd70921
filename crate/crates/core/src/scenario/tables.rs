use serde::Deserialize;

use super::ScenarioError;

/// One row of a measurements file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementRow {
    pub scenario_id: String,
    pub measured_phase_rad: f64,
    pub sigma_rad: f64,
}

/// `scenario_id,measured_phase_rad,sigma_rad` with a header row. Lines
/// starting with `#` are comments.
pub fn parse_measurements(text: &str) -> Result<Vec<MeasurementRow>, ScenarioError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let expected = ["scenario_id", "measured_phase_rad", "sigma_rad"];
    check_header(&mut reader, &expected)?;
    let mut rows = Vec::new();
    for record in reader.deserialize::<MeasurementRow>() {
        let row = record.map_err(csv_error)?;
        if !row.measured_phase_rad.is_finite() || !(row.sigma_rad > 0.0 && row.sigma_rad.is_finite()) {
            return Err(ScenarioError::invalid(
                format!("measurements[{}]", rows.len()),
                "phase must be finite and sigma positive",
            ));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// A velocity scan as written by `vscan`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VscanTable {
    pub speeds: Vec<f64>,
    pub phases: Vec<f64>,
    pub errors: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VscanRow {
    speed_mps: f64,
    phase_rad: f64,
    err_rad: f64,
}

/// `speed_mps,phase_rad,err_rad` with a header row; `#` lines (the fit
/// footer) are skipped.
pub fn parse_vscan_csv(text: &str) -> Result<VscanTable, ScenarioError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    check_header(&mut reader, &["speed_mps", "phase_rad", "err_rad"])?;
    let mut table = VscanTable::default();
    for record in reader.deserialize::<VscanRow>() {
        let row = record.map_err(csv_error)?;
        if !(row.speed_mps > 0.0 && row.speed_mps.is_finite() && row.phase_rad.is_finite()) {
            return Err(ScenarioError::invalid(
                format!("rows[{}]", table.speeds.len()),
                "speed must be positive and phase finite",
            ));
        }
        table.speeds.push(row.speed_mps);
        table.phases.push(row.phase_rad);
        table.errors.push(row.err_rad);
    }
    Ok(table)
}

fn check_header<R: std::io::Read>(reader: &mut csv::Reader<R>, expected: &[&str]) -> Result<(), ScenarioError> {
    let header = reader.headers().map_err(csv_error)?;
    if header.is_empty() {
        return Ok(());
    }
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(ScenarioError::invalid(
            "header",
            format!("expected `{}`, found `{}`", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> ScenarioError {
    let (line, column) = e.position().map(|p| (p.line() as usize, 0)).unwrap_or((0, 0));
    let message = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => {
            let field = err.field().map(|f| format!("field {}: ", f + 1)).unwrap_or_default();
            format!("{field}{}", err.kind())
        }
        _ => e.to_string(),
    };
    ScenarioError::Syntax {
        path: "csv".into(),
        line,
        column,
        message,
    }
}
