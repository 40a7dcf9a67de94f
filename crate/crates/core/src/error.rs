use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Topology construction failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("ligand has no atoms")]
    Empty,
    #[error("per-atom arrays disagree in length: {0}")]
    LengthMismatch(String),
    #[error("bond ({a}, {b}) references an atom outside 0..{n_atoms}")]
    BondOutOfRange { a: usize, b: usize, n_atoms: usize },
    #[error("bond graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("rotatable bond ({a}, {b}) is not a bond of the ligand")]
    RotatableNotABond { a: usize, b: usize },
    #[error("rotatable bond ({a}, {b}) lies in a ring; removing it does not split the molecule")]
    RingBond { a: usize, b: usize },
    #[error("atom {atom} has unknown type index {type_index}")]
    UnknownType { atom: usize, type_index: usize },
    #[error("atom {atom} has a non-finite coordinate")]
    NonFinite { atom: usize },
}

/// Text-format parse failures. `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("line {line}, columns {start}-{end}: {message}")]
    Field { line: usize, start: usize, end: usize, message: String },
    #[error("no atoms")]
    NoAtoms,
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid grid spec: {0}")]
    InvalidSpec(String),
    #[error("protein atom {atom} lies at an implausible position ({x}, {y}, {z})")]
    AtomOutOfBounds { atom: usize, x: f32, y: f32, z: f32 },
    #[error("no probe types requested")]
    NoProbes,
    #[error("unknown probe type {0:?}")]
    UnknownProbe(String),
    #[error("grid set has no map for type {0:?}")]
    MissingMap(String),
    #[error("bad magic {found:?}, expected \"MUGD\"")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported MUGD version {0}, expected 1")]
    Version(u32),
    #[error("unexpected end of stream while reading {0}")]
    UnexpectedEnd(&'static str),
    #[error("payload size mismatch: {0}")]
    SizeMismatch(String),
    #[error("grid I/O: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoseError {
    #[error("genotype has {found} genes, topology needs {expected}")]
    GeneCount { expected: usize, found: usize },
    #[error("rotation genes are all zero; orientation is undefined")]
    ZeroRotation,
    #[error("non-finite gene at index {0}")]
    NonFinite(usize),
    #[error("degenerate rotation axis (coincident axis atoms)")]
    DegenerateAxis,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Pose(#[from] PoseError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }
}
