//! Per-layer PGM export with absent-cell masks and a JSON sidecar.
//!
//! Each layer is quantised to 16 bits as `level = round((v - offset) / scale)`
//! with `offset` the layer minimum. The top image row is the highest map row
//! so the images read as a north-up top view.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GridMap;
use crate::pgm::Pgm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerExport {
    pub file: String,
    pub mask: String,
    pub offset: f64,
    pub scale: f64,
    pub valid_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerMetadata {
    pub resolution: f64,
    pub origin: [f64; 2],
    pub rows: usize,
    pub cols: usize,
    pub layers: BTreeMap<String, LayerExport>,
}

/// Quantised image and mask for one layer.
pub fn layer_images(map: &GridMap, name: &str) -> Option<(Pgm, Pgm, f64, f64)> {
    let values = map.layer(name).ok()?;
    let (lo, hi) = values
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let (offset, scale) = if lo.is_finite() && hi > lo {
        (lo, (hi - lo) / 65535.0)
    } else if lo.is_finite() {
        (lo, 1.0)
    } else {
        (0.0, 1.0)
    };
    let mut img = Pgm::new(map.cols(), map.rows(), 65535);
    let mut mask = Pgm::new(map.cols(), map.rows(), 255);
    img.comments.push(format!("layer {name}"));
    img.comments.push(format!("offset {offset}"));
    img.comments.push(format!("scale {scale}"));
    for idx in map.indices() {
        let img_row = map.rows() - 1 - idx.row;
        if let Some(v) = values[map.flat(idx)] {
            let level = ((v - offset) / scale).round().clamp(0.0, 65535.0) as u16;
            img.set(img_row, idx.col, level);
            mask.set(img_row, idx.col, 255);
        }
    }
    Some((img, mask, offset, scale))
}

/// Writes `<layer>.pgm`, `<layer>_mask.pgm` for every layer and
/// `layers.json` describing them into `dir`.
pub fn write_layer_exports(map: &GridMap, dir: &Path) -> io::Result<LayerMetadata> {
    std::fs::create_dir_all(dir)?;
    let mut layers = BTreeMap::new();
    for name in map.layer_names() {
        let Some((img, mask, offset, scale)) = layer_images(map, name) else {
            continue;
        };
        let file = format!("{name}.pgm");
        let mask_file = format!("{name}_mask.pgm");
        img.write(io::BufWriter::new(std::fs::File::create(dir.join(&file))?))?;
        mask.write(io::BufWriter::new(std::fs::File::create(dir.join(&mask_file))?))?;
        let valid_cells = map.layer(name).map(|l| l.iter().flatten().count()).unwrap_or(0);
        layers.insert(
            name.to_owned(),
            LayerExport {
                file,
                mask: mask_file,
                offset,
                scale,
                valid_cells,
            },
        );
    }
    let meta = LayerMetadata {
        resolution: map.resolution(),
        origin: map.origin(),
        rows: map.rows(),
        cols: map.cols(),
        layers,
    };
    let text = serde_json::to_string_pretty(&meta).map_err(io::Error::other)?;
    std::fs::write(dir.join("layers.json"), text + "\n")?;
    Ok(meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::{CellIndex, ELEVATION};

    #[test]
    fn quantisation_recovers_values_within_one_level() {
        let mut m = GridMap::new([0.0, 0.0], 0.1, 2, 3).unwrap();
        let vals = vec![Some(0.0), None, Some(0.5), Some(1.0), Some(0.25), None];
        m.set_layer(ELEVATION, vals.clone()).unwrap();
        let (img, mask, offset, scale) = layer_images(&m, ELEVATION).unwrap();
        for idx in m.indices() {
            let r = m.rows() - 1 - idx.row;
            match vals[m.flat(idx)] {
                Some(v) => {
                    assert_eq!(mask.get(r, idx.col), 255);
                    let back = offset + f64::from(img.get(r, idx.col)) * scale;
                    assert!((back - v).abs() <= scale);
                }
                None => {
                    assert_eq!(mask.get(r, idx.col), 0);
                    assert_eq!(img.get(r, idx.col), 0);
                }
            }
        }
        assert_eq!(img.comment_value("scale"), Some(scale));
    }

    #[test]
    fn writes_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = GridMap::new([0.0, 0.0], 0.1, 2, 2).unwrap();
        m.set(ELEVATION, CellIndex::new(0, 0), Some(2.0)).unwrap();
        let meta = write_layer_exports(&m, dir.path()).unwrap();
        assert_eq!(meta.layers[ELEVATION].valid_cells, 1);
        let text = std::fs::read_to_string(dir.path().join("layers.json")).unwrap();
        let back: LayerMetadata = serde_json::from_str(&text).unwrap();
        assert_eq!(back, meta);
        assert!(dir.path().join("elevation_mask.pgm").exists());
    }
}
