//! 8-bit image files in and out: PNG and binary/ASCII PGM (plus PPM for RGB).

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader, Limits};

use crate::error::{Error, Result};
use crate::image::ImageTensor;
use crate::metrics::LabelMap;
use crate::model::ResidualField;

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn limits() -> Limits {
    let mut limits = Limits::default();
    limits.max_image_width = Some(1 << 14);
    limits.max_image_height = Some(1 << 14);
    limits.max_alloc = Some(256 << 20);
    limits
}

/// Decodes PNG/PNM bytes into an intensity tensor. Only 8-bit gray and
/// 8-bit RGB are accepted.
pub fn decode_image(bytes: &[u8]) -> Result<ImageTensor> {
    let mut reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::Decode(e.to_string()))?;
    if reader.format().is_none() {
        return Err(Error::UnsupportedFormat(
            "not a PNG or PGM/PPM stream".into(),
        ));
    }
    reader.limits(limits());
    let decoded = reader.decode().map_err(|e| Error::Decode(e.to_string()))?;
    from_dynamic(decoded)
}

fn from_dynamic(img: DynamicImage) -> Result<ImageTensor> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => {
            ImageTensor::new(w, h, 1, buf.into_raw().into_iter().map(f64::from).collect())
        }
        DynamicImage::ImageRgb8(buf) => {
            ImageTensor::new(w, h, 3, buf.into_raw().into_iter().map(f64::from).collect())
        }
        DynamicImage::ImageLumaA8(_) | DynamicImage::ImageRgba8(_) => Err(
            Error::UnsupportedFormat("images with an alpha channel are not supported".into()),
        ),
        other => Err(Error::UnsupportedBitDepth(format!(
            "{:?}; only 8-bit gray or RGB is supported",
            other.color()
        ))),
    }
}

pub fn load_image(path: &Path) -> Result<ImageTensor> {
    let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
    decode_image(&bytes)
}

fn to_dynamic(image: &ImageTensor) -> DynamicImage {
    let bytes: Vec<u8> = image
        .data()
        .iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    let (w, h) = (image.width() as u32, image.height() as u32);
    if image.channels() == 1 {
        DynamicImage::ImageLuma8(image::GrayImage::from_raw(w, h, bytes).expect("buffer size"))
    } else {
        DynamicImage::ImageRgb8(image::RgbImage::from_raw(w, h, bytes).expect("buffer size"))
    }
}

/// PNG bytes, intensities rounded and clamped to `[0, 255]`.
pub fn encode_png(image: &ImageTensor) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    to_dynamic(image)
        .write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Decode(e.to_string()))?;
    Ok(out.into_inner())
}

/// Writes PNG, or PGM/PPM when the extension is `.pgm`/`.ppm`/`.pnm`.
pub fn save_image(image: &ImageTensor, path: &Path) -> Result<()> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let bytes = match ext.as_deref() {
        Some("pgm" | "ppm" | "pnm") => {
            let mut out = Cursor::new(Vec::new());
            to_dynamic(image)
                .write_to(&mut out, ImageFormat::Pnm)
                .map_err(|e| Error::Decode(e.to_string()))?;
            out.into_inner()
        }
        _ => encode_png(image)?,
    };
    std::fs::write(path, bytes).map_err(|e| io_error(path, e))
}

fn label_level(label: usize, c: usize) -> f64 {
    if c <= 1 {
        0.0
    } else {
        (label as f64 * 255.0 / (c - 1) as f64).round()
    }
}

/// Gray image with label `k` drawn at `round(k * 255 / (c - 1))`.
pub fn label_map_to_image(labels: &LabelMap, c: usize) -> Result<ImageTensor> {
    if c == 0 || c > 256 {
        return Err(Error::Config(format!(
            "label images hold 1 to 256 classes, got {c}"
        )));
    }
    labels.check_range(c)?;
    let data = labels.labels().iter().map(|&l| label_level(l, c)).collect();
    ImageTensor::new(labels.width(), labels.height(), 1, data)
}

/// Inverse of [`label_map_to_image`]. Gray levels that are not exactly one
/// of the `c` label levels are rejected.
pub fn image_to_label_map(image: &ImageTensor, c: usize) -> Result<LabelMap> {
    if image.channels() != 1 {
        return Err(Error::UnsupportedFormat(
            "label maps must be single-channel".into(),
        ));
    }
    if c == 0 || c > 256 {
        return Err(Error::Config(format!(
            "label images hold 1 to 256 classes, got {c}"
        )));
    }
    let mut labels = Vec::with_capacity(image.len());
    for (j, &g) in image.data().iter().enumerate() {
        let label = if c == 1 {
            0
        } else {
            (g * (c - 1) as f64 / 255.0).round() as usize
        };
        if label >= c || label_level(label, c) != g {
            return Err(Error::Decode(format!(
                "gray level {g} at pixel {j} is not a label level for {c} classes"
            )));
        }
        labels.push(label);
    }
    LabelMap::new(image.width(), image.height(), labels)
}

pub fn decode_label_map(bytes: &[u8], c: usize) -> Result<LabelMap> {
    image_to_label_map(&decode_image(bytes)?, c)
}

pub fn load_label_map(path: &Path, c: usize) -> Result<LabelMap> {
    image_to_label_map(&load_image(path)?, c)
}

pub fn save_label_map(labels: &LabelMap, c: usize, path: &Path) -> Result<()> {
    save_image(&label_map_to_image(labels, c)?, path)
}

/// `|r|` min-max scaled to `[0, 255]` over all pixels and channels.
pub fn residual_image(r: &ResidualField, width: usize, height: usize) -> Result<ImageTensor> {
    let abs: Vec<f64> = r.data().iter().map(|v| v.abs()).collect();
    let lo = abs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = abs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let data = abs
        .into_iter()
        .map(|v| {
            if span > 0.0 {
                (v - lo) / span * 255.0
            } else {
                0.0
            }
        })
        .collect();
    ImageTensor::new(width, height, r.channels(), data)
}
