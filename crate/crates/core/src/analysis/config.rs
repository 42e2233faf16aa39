//! Line-oriented configuration tables.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};

const DEFAULT_ATTR_TABLE: &str = include_str!("../../config/torch_attrs.conf");
const DEFAULT_PURE_OPS: &str = include_str!("../../config/pure_ops.conf");
const DEFAULT_SHAPE_OPS: &str = include_str!("../../config/dynamic_shape_ops.conf");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dynamism {
    Dynamic,
    Static,
}

/// Attribute name to dynamism class. Names not listed are static by default,
/// but see [`TorchAttrTable::is_listed`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorchAttrTable {
    entries: BTreeMap<String, Dynamism>,
}

impl Default for TorchAttrTable {
    fn default() -> Self {
        Self::parse(DEFAULT_ATTR_TABLE, "<default attr table>").expect("bundled table is valid")
    }
}

impl TorchAttrTable {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in config_lines(text) {
            let (name, class) = line.split_once('=').ok_or_else(|| Error::Config {
                path: origin.to_string(),
                line: i,
                message: "expected `name = dynamic|static`".to_string(),
            })?;
            let class = match class.trim() {
                "dynamic" => Dynamism::Dynamic,
                "static" => Dynamism::Static,
                other => {
                    return Err(Error::Config {
                        path: origin.to_string(),
                        line: i,
                        message: format!("unknown class `{other}`"),
                    })
                }
            };
            let name = name.trim();
            check_identifier(name, origin, i)?;
            entries.insert(name.to_string(), class);
        }
        Ok(TorchAttrTable { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn get(&self, name: &str) -> Dynamism {
        self.entries.get(name).copied().unwrap_or(Dynamism::Static)
    }

    pub fn is_listed(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn is_dynamic(&self, name: &str) -> bool {
        self.get(name) == Dynamism::Dynamic
    }

    /// Explicitly listed as static (metadata access).
    pub fn is_static(&self, name: &str) -> bool {
        self.entries.get(name) == Some(&Dynamism::Static)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A set of bare names, one per line.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NameList {
    names: BTreeSet<String>,
}

impl NameList {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut names = BTreeSet::new();
        for (i, line) in config_lines(text) {
            check_identifier(line, origin, i)?;
            names.insert(line.to_string());
        }
        Ok(NameList { names })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn default_pure_ops() -> Self {
        Self::parse(DEFAULT_PURE_OPS, "<default allowlist>").expect("bundled list is valid")
    }

    pub fn default_dynamic_shape_ops() -> Self {
        Self::parse(DEFAULT_SHAPE_OPS, "<default shape ops>").expect("bundled list is valid")
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for NameList {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        NameList { names: iter.into_iter().map(Into::into).collect() }
    }
}

/// Non-blank lines with comments stripped, numbered from 1.
fn config_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap().trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn check_identifier(name: &str, origin: &str, line: usize) -> Result<()> {
    let mut chars = name.chars();
    let ok = chars.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(Error::Config { path: origin.to_string(), line, message: format!("`{name}` is not an identifier") })
    }
}
