//! Building a figure table in code and writing it with its digest.

use agnostic_dolinar::figures::{fig2, write_table, FigureOptions};

fn main() -> agnostic_dolinar::Result<()> {
    let table = fig2(&[0.25, 0.625], &[1, 2, 4, 8, 16, 32], FigureOptions::default())?;
    print!("{}", table.to_csv());
    let path = std::env::temp_dir().join("agnostic_dolinar_fig2.csv");
    let digest = write_table(&table, &path)?;
    println!("wrote {} ({} bytes, sha256 {})", path.display(), digest.bytes, digest.sha256);
    Ok(())
}
