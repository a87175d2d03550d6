use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("valence {nu} at {at} is below 3")]
    InvalidValence { at: String, nu: u32 },

    #[error("invalid valence spec: {0}")]
    InvalidSpec(String),

    #[error("empty height range: h_min = {h_min} must be below h_max = {h_max}")]
    EmptyHeightRange { h_min: i64, h_max: i64 },

    #[error("window apex height {0} is negative; the ray starts at height 0")]
    NegativeApex(i64),

    #[error("window would hold more than {cap} vertices")]
    VertexCap { cap: usize },

    #[error("cannot parse address {0:?}")]
    AddressParse(String),

    #[error("address {0} does not name a vertex of the tree")]
    InvalidAddress(String),

    #[error("vertex {0} lies outside the window")]
    VertexOutOfWindow(String),

    #[error("triangle with vertex {vertex} and height {height} is not contained in the window")]
    TriangleOutOfWindow { vertex: String, height: u32 },

    #[error("ball with centre {center} and radius {radius} is not contained in the window")]
    BallOutOfWindow { center: String, radius: u32 },

    #[error(
        "window too small: level-set triangles have height at most {height_bound}; \
         need heights {required_h_min}..{required_h_max}"
    )]
    WindowTooSmall {
        required_h_min: i64,
        required_h_max: i64,
        height_bound: u32,
    },

    #[error("value at {0} is neither above the level nor certified below it")]
    UncertifiedInput(String),

    #[error("family is not an antichain: {0} is contained in {1}")]
    NotMaximalFamily(String, String),

    #[error("family is empty")]
    EmptyFamily,

    #[error("level {0} must be positive")]
    NonPositiveAlpha(String),

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("cannot parse function: {0}")]
    FunctionParse(String),
}
