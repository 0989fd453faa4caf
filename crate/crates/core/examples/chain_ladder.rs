//! Chain-Ladder on a cumulative claim-count triangle: volume-weighted
//! development factors and the projected lower triangle.

use std::path::PathBuf;

use ibnr_core::chain_ladder::{dev_factors, project};
use ibnr_core::io::read_triangle;

fn main() -> ibnr_core::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/table3_upper.csv"));
    let triangle = read_triangle(&path)?;
    let factors = dev_factors(&triangle)?;
    let shown: Vec<String> = factors.factors.iter().map(|f| format!("{f:.6}")).collect();
    println!("development factors: {}", shown.join(" "));

    let projected = project(&triangle, &factors)?;
    for (i, row) in projected.rounded().iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let mark = if projected.is_projected(i, j) { "*" } else { " " };
                format!("{:>7}{mark}", v.map_or("-".to_string(), |x| x.to_string()))
            })
            .collect();
        println!("{} {}", projected.origin_year() + i as i32, cells.join(""));
    }
    Ok(())
}
