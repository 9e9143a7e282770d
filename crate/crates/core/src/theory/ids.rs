use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

id_type!(
    /// Label of a preparation procedure.
    PrepId
);
id_type!(
    /// Label of a transformation. [`TransId::identity`] is always present.
    TransId
);
id_type!(
    /// Label of a measurement.
    MeasId
);

impl TransId {
    pub const IDENTITY: &'static str = "id";

    pub fn identity() -> Self {
        Self(Self::IDENTITY.to_owned())
    }

    pub fn is_identity(&self) -> bool {
        self.0 == Self::IDENTITY
    }
}
