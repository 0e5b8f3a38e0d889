use std::fmt;
use std::path::Path;

use bri_core::bri::BriError;
use bri_core::channels::ChannelError;
use bri_core::coset::CosetError;
use bri_core::gf2e::FieldError;
use bri_core::graphs::GraphError;
use bri_core::infodiv::InfodivError;
use bri_core::spectra::SpectraError;
use bri_core::wiretap::WiretapError;

/// Failure classes, each with its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Internal,
    Usage,
    Io,
    Malformed,
    Budget,
}

impl Kind {
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Internal => 1,
            Kind::Usage => 2,
            Kind::Io => 3,
            Kind::Malformed => 4,
            Kind::Budget => 5,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub msg: String,
}

impl CliError {
    pub fn new(kind: Kind, msg: impl Into<String>) -> Self {
        Self { kind, msg: msg.into() }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Self::new(Kind::Usage, msg)
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::new(Kind::Io, format!("{}: {err}", path.display()))
    }

    pub fn malformed(path: &Path, msg: impl fmt::Display) -> Self {
        Self::new(Kind::Malformed, format!("{}: {msg}", path.display()))
    }

    /// Prefixes the message with the file it came from.
    pub fn in_file(mut self, path: &Path) -> Self {
        self.msg = format!("{}: {}", path.display(), self.msg);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn spectra_kind(e: &SpectraError) -> Kind {
    match e {
        SpectraError::TooLarge(_) => Kind::Budget,
        _ => Kind::Internal,
    }
}

fn field_kind(e: &FieldError) -> Kind {
    match e {
        FieldError::ZeroInverse | FieldError::NotElement { .. } => Kind::Internal,
        FieldError::CountOverflow { .. } => Kind::Budget,
        _ => Kind::Usage,
    }
}

fn channel_kind(e: &ChannelError) -> Kind {
    match e {
        ChannelError::MalformedRow { .. } | ChannelError::Csv(_) | ChannelError::AlphabetMismatch(_) => Kind::Malformed,
        ChannelError::Budget { .. } | ChannelError::GridTooLarge { .. } => Kind::Budget,
        ChannelError::Parameter(_) => Kind::Usage,
    }
}

fn graph_kind(e: &GraphError) -> Kind {
    match e {
        GraphError::Parse { .. } | GraphError::EdgeOutOfRange { .. } => Kind::Malformed,
        GraphError::Precondition(_) => Kind::Usage,
        GraphError::SearchExhausted { .. } => Kind::Budget,
        GraphError::Spectra(s) => spectra_kind(s),
        GraphError::SigningMismatch | GraphError::Internal(_) => Kind::Internal,
    }
}

fn bri_kind(e: &BriError) -> Kind {
    match e {
        BriError::InvalidTable(_) | BriError::Parse { .. } | BriError::Overlap { .. } | BriError::Uncovered { .. } => {
            Kind::Malformed
        }
        BriError::NotInRegularitySet(_) | BriError::EmptyPreimage { .. } => Kind::Usage,
        BriError::RouteMismatch { .. } => Kind::Internal,
        BriError::Spectra(s) => spectra_kind(s),
        BriError::Graph(g) => graph_kind(g),
        BriError::Channel(c) => channel_kind(c),
    }
}

fn infodiv_kind(e: &InfodivError) -> Kind {
    match e {
        InfodivError::InvalidEps(_) | InfodivError::Tolerance(_) => Kind::Usage,
        InfodivError::TooLarge(_) => Kind::Budget,
        InfodivError::InvalidMeasure(_) | InfodivError::Subnormalized => Kind::Malformed,
        InfodivError::Channel(c) => channel_kind(c),
    }
}

fn coset_kind(e: &CosetError) -> Kind {
    match e {
        CosetError::Field(f) => field_kind(f),
        CosetError::NotComplement(_) | CosetError::NotInRegularitySet(_) | CosetError::ZeroArgument => Kind::Usage,
        CosetError::BoundViolated { .. } => Kind::Internal,
        CosetError::Channel(c) => channel_kind(c),
    }
}

fn wiretap_kind(e: &WiretapError) -> Kind {
    match e {
        WiretapError::Chain(_) => Kind::Malformed,
        WiretapError::Eps(_) | WiretapError::Parameter(_) | WiretapError::SeedEmbedding { .. } => Kind::Usage,
        WiretapError::Budget { .. } => Kind::Budget,
        WiretapError::Bri(b) => bri_kind(b),
        WiretapError::Channel(c) => channel_kind(c),
        WiretapError::Infodiv(i) => infodiv_kind(i),
        WiretapError::Graph(g) => graph_kind(g),
        WiretapError::Coset(c) => coset_kind(c),
        WiretapError::Field(f) => field_kind(f),
    }
}

macro_rules! classify {
    ($($ty:ty => $f:ident),* $(,)?) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::new($f(&e), e.to_string())
            }
        }
    )*};
}

classify! {
    SpectraError => spectra_kind,
    FieldError => field_kind,
    ChannelError => channel_kind,
    GraphError => graph_kind,
    BriError => bri_kind,
    InfodivError => infodiv_kind,
    CosetError => coset_kind,
    WiretapError => wiretap_kind,
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new(Kind::Internal, e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new(Kind::Internal, e.to_string())
    }
}
