use std::io;

use thiserror::Error;

use crate::cube::ElementaryCube;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ambient dimension {0} unsupported (expected 1..={max})", max = crate::cube::MAX_DIM)]
    AmbientDim(usize),

    #[error("degree {q} out of range for ambient dimension {d}")]
    Degree { q: usize, d: usize },

    #[error("not face-closed: face {face} of {cube} is missing")]
    NotFaceClosed { face: ElementaryCube, cube: ElementaryCube },

    #[error("monotone face condition violated: face {face} born at {face_birth} after {cube} born at {cube_birth}")]
    Monotonicity {
        face: ElementaryCube,
        face_birth: f64,
        cube: ElementaryCube,
        cube_birth: f64,
    },

    #[error("invalid time arguments: {0}")]
    Times(String),

    #[error("blocks not independent: 2r = {two_r} must exceed dependence range {range}")]
    NotIndependent { two_r: u32, range: u32 },

    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
