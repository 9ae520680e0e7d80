//! Reading and writing IDX files (the MNIST/EMNIST container format).
//!
//! IDX stores big-endian tensors: images as u8 with magic 0x00000803 and
//! dimensions (count, rows, cols), labels as u8 with magic 0x00000801.
//! This example writes a synthetic dataset out as an IDX pair, reads it
//! back, and shows the transpose flag that EMNIST needs (its images are
//! stored column-major).
//!
//! Run with: cargo run --example idx_files

use dirmi::data::{read_idx, synth_blobs, write_idx};
use dirmi::Error;

fn main() -> dirmi::Result<()> {
    let dir = std::env::temp_dir().join("dirmi-idx-example");
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let images = dir.join("probe-images-idx3-ubyte");
    let labels = dir.join("probe-labels-idx1-ubyte");

    // write_idx quantizes features to the u8 grid, so round-tripping needs
    // features in [0, 1]; rescale the blob coordinates.
    let blobs = synth_blobs(3, 40, 4, 1.0, 5)?;
    let scaled: Vec<Vec<f64>> = blobs
        .features()
        .iter()
        .map(|row| row.iter().map(|v| ((v + 8.0) / 16.0).clamp(0.0, 1.0)).collect())
        .collect();
    let dataset = dirmi::data::LabeledDataset::new(
        "probe",
        scaled,
        blobs.labels().to_vec(),
        blobs.class_count(),
    )?;
    write_idx(&dataset, &images, &labels, 2, 2)?;
    println!(
        "wrote {} items as 2x2 'images': {}",
        dataset.len(),
        images.display()
    );

    let back = read_idx(&images, &labels, false)?;
    assert_eq!(back.len(), dataset.len());
    assert_eq!(back.labels(), dataset.labels());
    // u8 quantization: every pixel moves by at most half a grid step
    let mut worst = 0.0f64;
    for (a, b) in back.features().iter().zip(dataset.features()) {
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y).abs());
        }
    }
    println!("round-trip worst pixel error  = {worst:.6} (half grid step = {:.6})", 0.5 / 255.0);
    assert!(worst <= 0.5 / 255.0 + 1e-12);

    // The transpose flag swaps rows and columns of each image on read.
    let transposed = read_idx(&images, &labels, true)?;
    let a = &back.features()[0];
    let t = &transposed.features()[0];
    assert_eq!(a[1], t[2], "2x2 transpose swaps the off-diagonal entries");
    assert_eq!(a[2], t[1]);
    println!("transpose flag verified on the 2x2 case");

    // Corruption is reported distinctly: wrong magic vs truncated payload.
    let mut bytes = std::fs::read(&images).unwrap();
    bytes[3] = 0x99;
    let bad_magic = dir.join("bad-magic");
    std::fs::write(&bad_magic, &bytes).unwrap();
    match read_idx(&bad_magic, &labels, false) {
        Err(Error::IdxMagic { found, expected, .. }) => {
            println!("bad magic detected: found {found:#010x}, expected {expected:#010x}")
        }
        other => panic!("expected IdxMagic, got {other:?}"),
    }
    let truncated = dir.join("truncated");
    std::fs::write(&truncated, &std::fs::read(&images).unwrap()[..40]).unwrap();
    match read_idx(&truncated, &labels, false) {
        Err(Error::IdxTruncated { expected, found, .. }) => {
            println!("truncation detected: wanted {expected} bytes, file holds {found}")
        }
        other => panic!("expected IdxTruncated, got {other:?}"),
    }
    Ok(())
}
