//! Percentage errors of two predicted triangles against the same actuals.

use std::path::PathBuf;

use ibnr_core::chain_ladder::error_table;
use ibnr_core::io::read_triangle;

fn main() -> ibnr_core::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let actual = read_triangle(dir.join("table7_printed.csv"))?;
    for (name, file) in [("chain-ladder", "table3_printed.csv"), ("copula", "table6_printed.csv")] {
        let table = error_table(&actual, &read_triangle(dir.join(file))?)?;
        println!("{name}: mean error {:.4}%", table.mean().unwrap_or(f64::NAN));
        for (i, row) in table.cells.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map_or("      -".to_string(), |v| format!("{v:>7.4}")))
                .collect();
            println!("  {} {}", table.origin_year + i as i32, cells.join(" "));
        }
    }
    Ok(())
}
