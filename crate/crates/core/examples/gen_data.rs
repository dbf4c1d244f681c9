//! Write a blob dataset and a regression set to a directory and read them back.

use synlearn::data::{
    gen_blobs, gen_regression, read_dataset_csv, read_matrix_csv, write_dataset_csv, write_matrix_csv, BlobSpec,
    RegressionSpec,
};

fn main() -> synlearn::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(std::env::temp_dir, Into::into)
        .join("synlearn-gen-data");
    std::fs::create_dir_all(&dir)?;

    let spec = BlobSpec {
        k: 4,
        seed: 2,
        ..Default::default()
    };
    let blobs = gen_blobs(&spec)?;
    write_dataset_csv(&blobs, &dir.join("data.csv"))?;
    let back = read_dataset_csv(&dir.join("data.csv"))?;
    assert_eq!(back, blobs);
    println!("{} points in {} dims, centers:", back.len(), back.dim());
    for c in spec.centers()? {
        println!("  {c:.3?}");
    }

    let reg = gen_regression(&RegressionSpec::default())?;
    write_matrix_csv(reg.inputs(), &["x0".into()], &dir.join("inputs.csv"))?;
    write_matrix_csv(reg.targets(), &["z0".into()], &dir.join("targets.csv"))?;
    let (_, x) = read_matrix_csv(&dir.join("inputs.csv"))?;
    assert_eq!(&x, reg.inputs());
    println!("regression set: {} samples -> {}", reg.len(), dir.display());
    Ok(())
}
