use lclt_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// 2 invalid parameters, 3 domain violation, 4 numeric failure, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Core(e) => match e {
                CoreError::InvalidParameter(_) | CoreError::ResourceLimit(_) => 2,
                CoreError::Domain(_) | CoreError::Degenerate(_) | CoreError::Coverage(_) => 3,
                CoreError::Numeric(_) => 4,
                CoreError::Table(_) => 1,
            },
            HarnessError::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Config(msg.into()))
}
