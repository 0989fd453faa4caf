//! Expected claim counts by occurrence year and reporting lag for a
//! portfolio observed over seven years.

use std::path::PathBuf;

use ibnr_core::claims::{forecast_triangle, predict_ibnr, ModelParams};
use ibnr_core::io::read_event_log;
use ibnr_core::quadrature::QuadratureOptions;

fn main() -> ibnr_core::Result<()> {
    let log = read_event_log(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/simulated_log.csv"))?;
    // The fixture packs 200 claims into seven years; rates are per year.
    let params = ModelParams::new(28.45, 28.45, 1.5)?;
    let forecast = predict_ibnr(&log, &params, 13, &QuadratureOptions::relative(1e-6))?;
    for (j, row) in forecast.counts.iter().enumerate() {
        let head: Vec<String> = row.iter().take(3).map(|v| format!("{v:>9.4}")).collect();
        println!("{}: {}  total {:.4}", 2010 + j, head.join(" "), row.iter().sum::<f64>());
    }
    let table = forecast_triangle(&log, &forecast, 2010)?;
    println!("reserving layout (observed counts, expected counts marked *):");
    for i in 0..table.rows() {
        let cells: Vec<String> = (0..table.cols())
            .map(|j| match table.value(i, j) {
                Some(v) if table.is_projected(i, j) => format!("{v:>8.3}*"),
                Some(v) => format!("{v:>8.0} "),
                None => format!("{:>9}", "-"),
            })
            .collect();
        println!("{} {}", table.origin_year() + i as i32, cells.join(""));
    }
    Ok(())
}
