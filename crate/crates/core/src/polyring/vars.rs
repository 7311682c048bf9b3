use std::fmt;

use crate::error::{Error, Result};

/// Name of a ring generator such as `x`, `y`, `u1`, `v2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarName(String);

impl VarName {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(VarName(name))
        } else {
            Err(Error::Format(format!("invalid variable name `{name}`")))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// `[a-z][a-z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Ordered variable list of an ambient ring. Index `i` is generator `i`; the
/// order drives the monomial order, so rings of a tower are prefixes of one
/// another.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vars {
    names: Vec<VarName>,
}

impl Vars {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vars = Vars::default();
        for n in names {
            vars.push(VarName::new(n)?)?;
        }
        Ok(vars)
    }

    pub fn push(&mut self, name: VarName) -> Result<usize> {
        if self.index_of(name.as_str()).is_some() {
            return Err(Error::VariableClash(name.0));
        }
        self.names.push(name);
        Ok(self.names.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n.as_str() == name)
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn name(&self, i: usize) -> &str {
        self.names[i].as_str()
    }

    pub fn iter(&self) -> impl Iterator<Item = &VarName> {
        self.names.iter()
    }

    /// The first `len` variables.
    pub fn prefix(&self, len: usize) -> Vars {
        Vars {
            names: self.names[..len].to_vec(),
        }
    }
}
