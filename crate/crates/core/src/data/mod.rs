//! Synthetic generators and file formats shared by every subcommand.

mod files;
mod pgm;
mod synth;

pub use files::{
    format_f64, read_dataset_csv, read_json, read_matrix_csv, write_atomic, write_csv_records, write_dataset_csv,
    write_json, write_matrix_csv,
};
pub use pgm::{read_pgm, sidecar_path, write_pgm, PgmMapping};
pub use synth::{gen_blobs, gen_regression, BlobSpec, RegressionFn, RegressionSpec};
