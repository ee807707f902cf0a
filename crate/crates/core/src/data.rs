//! Dataset ingestion and corruption: PGM directory loading, per-sample
//! normalization, block occlusion, and seeded per-class splits.

use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SpcaError};
use crate::pgm::read_pgm;
use crate::types::DataMatrix;

/// Flattened grayscale images as columns of a data matrix, with class
/// labels, pixel geometry, and an optional per-column occlusion mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageDataset {
    pub matrix: DataMatrix,
    pub labels: Vec<usize>,
    pub height: usize,
    pub width: usize,
    /// true for columns that were occluded; None before corruption.
    pub corruption_mask: Option<Vec<bool>>,
    /// Source file name per column, when loaded from disk.
    pub files: Vec<String>,
}

/// How occluded pixels are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OcclusionFill {
    Black,
    UniformRandom,
}

impl std::str::FromStr for OcclusionFill {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "black" => Ok(OcclusionFill::Black),
            "uniform-random" | "random" => Ok(OcclusionFill::UniformRandom),
            other => Err(format!("unknown fill {other:?} (expected black | uniform-random)")),
        }
    }
}

/// Loads a one-subdirectory-per-class tree of PGM images.
///
/// Class ids follow the lexicographic order of the subdirectory names;
/// column order is lexicographic within each class. Pixels come out in
/// [0, 1] (divided by the PGM maxval). All images must share the same
/// dimensions.
pub fn load_image_dir(path: &Path) -> Result<ImageDataset> {
    let mut class_dirs: Vec<_> = std::fs::read_dir(path)
        .map_err(|e| SpcaError::io(path.display().to_string(), e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    class_dirs.sort();
    if class_dirs.is_empty() {
        return Err(SpcaError::InvalidArgument(format!(
            "no class subdirectories under {}",
            path.display()
        )));
    }

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    let mut files = Vec::new();
    let mut dims: Option<(usize, usize)> = None;

    for (class_id, dir) in class_dirs.iter().enumerate() {
        let mut images: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| SpcaError::io(dir.display().to_string(), e))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        images.sort();
        for img_path in images {
            let img = read_pgm(&img_path)?;
            match dims {
                None => dims = Some((img.height, img.width)),
                Some((h, w)) if (h, w) != (img.height, img.width) => {
                    return Err(SpcaError::InvalidArgument(format!(
                        "mixed image dimensions: {} is {}x{}, expected {h}x{w}",
                        img_path.display(),
                        img.height,
                        img.width
                    )));
                }
                _ => {}
            }
            columns.push(img.pixels);
            labels.push(class_id);
            files.push(img_path.display().to_string());
        }
    }

    let (height, width) = dims.ok_or_else(|| {
        SpcaError::InvalidArgument(format!("no PGM images under {}", path.display()))
    })?;
    let d = height * width;
    let n = columns.len();
    let matrix = DMatrix::from_fn(d, n, |r, c| columns[c][r]);
    Ok(ImageDataset {
        matrix: DataMatrix::new(matrix)?,
        labels,
        height,
        width,
        corruption_mask: None,
        files,
    })
}

/// Scales every column to unit ℓ2 norm.
pub fn normalize_samples(ds: &ImageDataset) -> Result<ImageDataset> {
    let mut m = ds.matrix.matrix().clone();
    for (i, mut col) in m.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(SpcaError::DegenerateInput(format!(
                "column {i} has zero norm and cannot be normalized"
            )));
        }
        col /= norm;
    }
    Ok(ImageDataset {
        matrix: DataMatrix::new(m)?,
        ..ds.clone()
    })
}

/// Occludes ⌊fraction·n⌋ columns, chosen uniformly without replacement,
/// each with a ⌊h·side_ratio⌋ × ⌊w·side_ratio⌋ block at a uniformly
/// random position fully inside the image. Unselected columns are left
/// bit-identical; the selection is recorded in `corruption_mask`.
pub fn occlude(
    ds: &ImageDataset,
    fraction: f64,
    side_ratio: f64,
    fill: OcclusionFill,
    seed: u64,
) -> Result<ImageDataset> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(SpcaError::InvalidArgument(format!(
            "fraction must be in [0, 1], got {fraction}"
        )));
    }
    if !(side_ratio > 0.0 && side_ratio <= 1.0) {
        return Err(SpcaError::InvalidArgument(format!(
            "side_ratio must be in (0, 1], got {side_ratio}"
        )));
    }
    let block_h = ((ds.height as f64) * side_ratio).floor() as usize;
    let block_w = ((ds.width as f64) * side_ratio).floor() as usize;
    if block_h == 0 || block_w == 0 {
        return Err(SpcaError::InvalidArgument(format!(
            "side_ratio {side_ratio} produces an empty {block_h}x{block_w} block"
        )));
    }
    if block_h > ds.height || block_w > ds.width {
        return Err(SpcaError::InvalidArgument(
            "occlusion block larger than the image".into(),
        ));
    }

    let n = ds.matrix.nsamples();
    let count = ((n as f64) * fraction).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    let mut selected = indices[..count].to_vec();
    selected.sort_unstable();

    let mut m = ds.matrix.matrix().clone();
    let mut mask = vec![false; n];
    for &col in &selected {
        mask[col] = true;
        let top = rng.gen_range(0..=(ds.height - block_h));
        let left = rng.gen_range(0..=(ds.width - block_w));
        for r in top..top + block_h {
            for c in left..left + block_w {
                let pixel = r * ds.width + c; // row-major flattening
                m[(pixel, col)] = match fill {
                    OcclusionFill::Black => 0.0,
                    OcclusionFill::UniformRandom => rng.gen_range(0.0..1.0),
                };
            }
        }
    }

    Ok(ImageDataset {
        matrix: DataMatrix::new(m)?,
        corruption_mask: Some(mask),
        ..ds.clone()
    })
}

/// Per-class split at the index level: ⌈count·train_ratio⌉ samples of
/// each class go to the train side (seeded uniform choice), the rest to
/// test. Both sides come back sorted.
pub fn split_indices_per_class(
    labels: &[usize],
    train_ratio: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..=1.0).contains(&train_ratio) {
        return Err(SpcaError::InvalidArgument(format!(
            "train_ratio must be in [0, 1], got {train_ratio}"
        )));
    }
    let n = labels.len();
    let nclasses = labels.iter().max().map_or(0, |&m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_cols = Vec::new();
    let mut test_cols = Vec::new();

    for class in 0..nclasses {
        let members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        if members.len() < 2 {
            return Err(SpcaError::InvalidArgument(format!(
                "class {class} has {} samples; per-class split needs at least 2",
                members.len()
            )));
        }
        let take = ((members.len() as f64) * train_ratio).ceil() as usize;
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        let mut train: Vec<usize> = shuffled[..take].to_vec();
        let mut test: Vec<usize> = shuffled[take..].to_vec();
        train.sort_unstable();
        test.sort_unstable();
        train_cols.extend(train);
        test_cols.extend(test);
    }
    Ok((train_cols, test_cols))
}

/// Per-class dataset split; masks and file names follow their columns.
pub fn split_per_class(
    ds: &ImageDataset,
    train_ratio: f64,
    seed: u64,
) -> Result<(ImageDataset, ImageDataset)> {
    let (train_cols, test_cols) = split_indices_per_class(&ds.labels, train_ratio, seed)?;
    Ok((select_columns(ds, &train_cols)?, select_columns(ds, &test_cols)?))
}

/// New dataset containing the given columns, in the given order.
pub fn select_columns(ds: &ImageDataset, cols: &[usize]) -> Result<ImageDataset> {
    if cols.is_empty() {
        return Err(SpcaError::InvalidArgument("empty column selection".into()));
    }
    let d = ds.matrix.nfeatures();
    let m = DMatrix::from_fn(d, cols.len(), |r, c| ds.matrix.matrix()[(r, cols[c])]);
    Ok(ImageDataset {
        matrix: DataMatrix::new(m)?,
        labels: cols.iter().map(|&i| ds.labels[i]).collect(),
        height: ds.height,
        width: ds.width,
        corruption_mask: ds
            .corruption_mask
            .as_ref()
            .map(|mask| cols.iter().map(|&i| mask[i]).collect()),
        files: if ds.files.is_empty() {
            Vec::new()
        } else {
            cols.iter().map(|&i| ds.files[i].clone()).collect()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;
    use tempfile::tempdir;

    fn write_fixture_tree(root: &Path) {
        for (class, name) in ["a", "b"].iter().enumerate() {
            let dir = root.join(name);
            fs::create_dir(&dir).unwrap();
            let v = 50 * (class as u8 + 1);
            fs::write(
                dir.join("img0.pgm"),
                format!("P2\n2 2\n255\n{v} 0\n0 {v}\n"),
            )
            .unwrap();
        }
    }

    fn synthetic_images(d_side: usize, n: usize) -> ImageDataset {
        let m = DMatrix::from_fn(d_side * d_side, n, |r, c| {
            0.1 + 0.8 * ((r * 31 + c * 17) % 97) as f64 / 97.0
        });
        ImageDataset {
            matrix: DataMatrix::new(m).unwrap(),
            labels: (0..n).map(|i| i % 2).collect(),
            height: d_side,
            width: d_side,
            corruption_mask: None,
            files: Vec::new(),
        }
    }

    #[test]
    fn loads_two_class_fixture() {
        let dir = tempdir().unwrap();
        write_fixture_tree(dir.path());
        let ds = load_image_dir(dir.path()).unwrap();
        assert_eq!(ds.matrix.dims(), (4, 2));
        assert_eq!(ds.labels, vec![0, 1]);
        assert_eq!(ds.matrix.matrix()[(0, 0)], 50.0 / 255.0);
        assert_eq!(ds.matrix.matrix()[(0, 1)], 100.0 / 255.0);
    }

    #[test]
    fn empty_directory_errors() {
        let dir = tempdir().unwrap();
        assert!(load_image_dir(dir.path()).is_err());
    }

    #[test]
    fn mixed_dimensions_error_names_file() {
        let dir = tempdir().unwrap();
        let class = dir.path().join("c");
        fs::create_dir(&class).unwrap();
        fs::write(class.join("a.pgm"), "P2\n2 2\n255\n1 2\n3 4\n").unwrap();
        fs::write(class.join("b.pgm"), "P2\n1 2\n255\n1 2\n").unwrap();
        let err = load_image_dir(dir.path()).unwrap_err();
        assert!(err.to_string().contains("b.pgm"), "{err}");
    }

    #[test]
    fn normalize_produces_unit_columns() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 4.0, 1.0]);
        let ds = ImageDataset {
            matrix: DataMatrix::new(m).unwrap(),
            labels: vec![0, 0],
            height: 2,
            width: 1,
            corruption_mask: None,
            files: Vec::new(),
        };
        let out = normalize_samples(&ds).unwrap();
        assert!((out.matrix.matrix()[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((out.matrix.matrix()[(1, 0)] - 0.8).abs() < 1e-15);
        for i in 0..2 {
            assert!((out.matrix.matrix().column(i).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_rejects_zero_column() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 1.0]);
        let ds = ImageDataset {
            matrix: DataMatrix::new(m).unwrap(),
            labels: vec![0, 0],
            height: 2,
            width: 1,
            corruption_mask: None,
            files: Vec::new(),
        };
        assert!(normalize_samples(&ds).is_err());
    }

    #[test]
    fn occlude_fraction_zero_is_identity() {
        let ds = synthetic_images(4, 6);
        let out = occlude(&ds, 0.0, 0.5, OcclusionFill::Black, 1).unwrap();
        assert_eq!(out.matrix, ds.matrix);
        assert_eq!(out.corruption_mask, Some(vec![false; 6]));
    }

    #[test]
    fn occlude_everything_with_full_block_zeroes_matrix() {
        let ds = synthetic_images(4, 6);
        let out = occlude(&ds, 1.0, 1.0, OcclusionFill::Black, 1).unwrap();
        assert!(out.matrix.matrix().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn occlude_is_seed_deterministic() {
        let ds = synthetic_images(8, 10);
        let a = occlude(&ds, 0.3, 0.25, OcclusionFill::UniformRandom, 9).unwrap();
        let b = occlude(&ds, 0.3, 0.25, OcclusionFill::UniformRandom, 9).unwrap();
        assert_eq!(a, b);
        let c = occlude(&ds, 0.3, 0.25, OcclusionFill::UniformRandom, 10).unwrap();
        assert_ne!(a.matrix, c.matrix);
    }

    #[test]
    fn occlude_touches_only_masked_columns_and_block_pixels() {
        let ds = synthetic_images(8, 10);
        let out = occlude(&ds, 0.3, 0.25, OcclusionFill::Black, 3).unwrap();
        let mask = out.corruption_mask.as_ref().unwrap();
        assert_eq!(mask.iter().filter(|&&b| b).count(), 3);
        for col in 0..10 {
            let changed: Vec<usize> = (0..64)
                .filter(|&r| out.matrix.matrix()[(r, col)] != ds.matrix.matrix()[(r, col)])
                .collect();
            if !mask[col] {
                assert!(changed.is_empty(), "clean column {col} changed");
            } else {
                // exactly a contiguous 2x2 block in row-major coordinates
                assert_eq!(changed.len(), 4);
                let rows: Vec<usize> = changed.iter().map(|&p| p / 8).collect();
                let cols: Vec<usize> = changed.iter().map(|&p| p % 8).collect();
                assert_eq!(rows[1], rows[0]);
                assert_eq!(rows[3], rows[0] + 1);
                assert_eq!(cols[1], cols[0] + 1);
            }
        }
    }

    #[test]
    fn occlude_rejects_degenerate_block() {
        let ds = synthetic_images(2, 4);
        assert!(occlude(&ds, 0.5, 0.25, OcclusionFill::Black, 0).is_err());
    }

    #[test]
    fn split_is_a_partition_with_class_proportions() {
        let ds = synthetic_images(3, 8); // labels alternate 0,1
        let (train, test) = split_per_class(&ds, 0.5, 5).unwrap();
        assert_eq!(train.matrix.nsamples(), 4);
        assert_eq!(test.matrix.nsamples(), 4);
        assert_eq!(train.labels.iter().filter(|&&l| l == 0).count(), 2);
        assert_eq!(test.labels.iter().filter(|&&l| l == 1).count(), 2);

        // column multiset union equals the input
        let mut all: Vec<Vec<u64>> = Vec::new();
        for src in [&train, &test] {
            for i in 0..src.matrix.nsamples() {
                all.push(
                    src.matrix
                        .matrix()
                        .column(i)
                        .iter()
                        .map(|v| v.to_bits())
                        .collect(),
                );
            }
        }
        let mut original: Vec<Vec<u64>> = (0..8)
            .map(|i| {
                ds.matrix
                    .matrix()
                    .column(i)
                    .iter()
                    .map(|v| v.to_bits())
                    .collect()
            })
            .collect();
        all.sort();
        original.sort();
        assert_eq!(all, original);
    }

    #[test]
    fn split_is_seed_deterministic() {
        let ds = synthetic_images(3, 8);
        let (a_train, a_test) = split_per_class(&ds, 0.5, 77).unwrap();
        let (b_train, b_test) = split_per_class(&ds, 0.5, 77).unwrap();
        assert_eq!(a_train, b_train);
        assert_eq!(a_test, b_test);
    }

    #[test]
    fn split_rejects_tiny_class() {
        let mut ds = synthetic_images(3, 5);
        ds.labels = vec![0, 0, 0, 0, 1];
        assert!(split_per_class(&ds, 0.5, 0).is_err());
    }
}
