use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite intensity at pixel {pixel}, channel {channel}")]
    NonFinite { pixel: usize, channel: usize },

    #[error("intensity {value} at pixel {pixel}, channel {channel} is outside [0, 255]")]
    OutOfRange {
        pixel: usize,
        channel: usize,
        value: f64,
    },

    #[error("I-divergence undefined at pixel {pixel}, channel {channel}: x - r = {value} <= 0")]
    Domain {
        pixel: usize,
        channel: usize,
        value: f64,
    },

    #[error("pixel {pixel} has zero total membership weight in its window")]
    DegenerateWindow { pixel: usize },

    #[error("cluster count {0} exceeds the matching limit of 10")]
    TooManyClusters(usize),

    #[error("label {label} at pixel {pixel} is outside 0..{c}")]
    LabelRange {
        pixel: usize,
        label: usize,
        c: usize,
    },

    #[error("invalid synthetic image spec: {0}")]
    Synthetic(String),

    #[error("unsupported bit depth: {0}")]
    UnsupportedBitDepth(String),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("failed to decode image: {0}")]
    Decode(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid range '{0}': expected start:stop:step")]
    Range(String),

    #[error("invalid config file: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
