use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shift count {0} outside 0..=63")]
    ShiftOutOfRange(u32),
    #[error("generator parameter {name}={value} outside 1..=63")]
    ParamOutOfRange { name: &'static str, value: u32 },
    #[error("the all-zero state is a fixed point and cannot be used")]
    ZeroState,
    #[error("bit width {n} outside {min}..={max}")]
    WidthOutOfRange { n: u32, min: u32, max: u32 },
    #[error("plane family needs 1 <= a <= 62, got {0}")]
    PlaneShift(u32),
    #[error("magnification exponent {0} outside 1..=52")]
    MagnifyExponent(u32),
    #[error("mesh grid must be at least 2x2, got {0}x{1}")]
    EmptyGrid(usize, usize),
    #[error("mesh region invalid: x_max={x_max}, magnify={magnify}")]
    MeshRegion { x_max: f64, magnify: f64 },
    #[error("no points to evaluate")]
    NoPoints,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
