//! A small parameter-recovery study and the report-year ratio table.

use ibnr_core::claims::{FitOptions, ModelParams};
use ibnr_core::simulation::{recovery_study, report_ratio_table, SimConfig};

fn main() -> ibnr_core::Result<()> {
    let truth = ModelParams::new(0.5, 0.5, 1.5)?;
    for n in [50, 200] {
        let cfg = SimConfig::new(truth, n, 2024)?.with_replications(8)?;
        let report = recovery_study(&cfg, &FitOptions::default())?;
        println!(
            "n = {n:>3}: mean ({:.3}, {:.3}, {:.3})  bias ({:+.3}, {:+.3}, {:+.3})  mse ({:.4}, {:.4}, {:.4})  excluded {}",
            report.mean[0],
            report.mean[1],
            report.mean[2],
            report.bias[0],
            report.bias[1],
            report.bias[2],
            report.mse[0],
            report.mse[1],
            report.mse[2],
            report.excluded
        );
        let ratios = report_ratio_table(&cfg, 7)?;
        let shown: Vec<String> = ratios.ratios().iter().map(|r| format!("{r:.3}")).collect();
        println!("          claims reported in the final year by occurrence lag: {}", shown.join(" "));
    }
    Ok(())
}
