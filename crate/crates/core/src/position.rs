use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Holding in the pairs position Z (long one share of stock 1, short one
/// share of stock 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Position {
    Short,
    Flat,
    Long,
}

impl Position {
    pub fn as_i8(self) -> i8 {
        match self {
            Position::Short => -1,
            Position::Flat => 0,
            Position::Long => 1,
        }
    }

    pub fn from_i64(i: i64) -> Result<Self> {
        match i {
            -1 => Ok(Position::Short),
            0 => Ok(Position::Flat),
            1 => Ok(Position::Long),
            other => Err(Error::InvalidPosition(other)),
        }
    }
}

impl TryFrom<i64> for Position {
    type Error = Error;
    fn try_from(i: i64) -> Result<Self> {
        Position::from_i64(i)
    }
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

impl std::str::FromStr for Position {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "long" => Ok(Position::Long),
            "flat" => Ok(Position::Flat),
            "short" => Ok(Position::Short),
            other => match other.parse::<i64>() {
                Ok(i) => Position::from_i64(i),
                Err(_) => Err(Error::UnknownPosition(other.to_string())),
            },
        }
    }
}
