use std::path::{Path, PathBuf};

/// A source file held in memory together with its line-start table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceModule {
    path: PathBuf,
    text: String,
    line_index: Vec<usize>,
}

impl SourceModule {
    pub fn new(path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        let text = text.into();
        let line_index = compute_line_index(&text);
        SourceModule {
            path: path.into(),
            text,
            line_index,
        }
    }

    pub fn read(path: impl AsRef<Path>) -> crate::Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
        Ok(SourceModule::new(path, text))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Byte offset of the start of every line. Entry 0 is always 0.
    pub fn line_index(&self) -> &[usize] {
        &self.line_index
    }

    /// Same path, new contents.
    pub fn with_text(&self, text: impl Into<String>) -> Self {
        SourceModule::new(self.path.clone(), text)
    }

    /// 1-based line and 1-based character column of a byte offset.
    pub fn line_col(&self, offset: usize) -> (usize, usize) {
        let line = match self.line_index.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let start = self.line_index[line];
        let col = self.text[start..offset.min(self.text.len())].chars().count();
        (line + 1, col + 1)
    }

    /// Byte offset at which the line containing `offset` starts.
    pub fn line_start_of(&self, offset: usize) -> usize {
        match self.line_index.binary_search(&offset) {
            Ok(i) => self.line_index[i],
            Err(i) => self.line_index[i - 1],
        }
    }

    /// Byte offset of the end of the line containing `offset`, excluding the
    /// line terminator.
    pub fn line_end_of(&self, offset: usize) -> usize {
        let rest = &self.text[offset..];
        let len = rest.find(['\n', '\r']).unwrap_or(rest.len());
        offset + len
    }

    /// Leading whitespace of the line containing `offset`.
    pub fn indent_of(&self, offset: usize) -> &str {
        let start = self.line_start_of(offset);
        let line = &self.text[start..self.line_end_of(start)];
        let width = line.len() - line.trim_start_matches([' ', '\t', '\x0c']).len();
        &line[..width]
    }

    /// True when only whitespace precedes `offset` on its line.
    pub fn starts_line(&self, offset: usize) -> bool {
        let start = self.line_start_of(offset);
        self.text[start..offset].chars().all(|c| matches!(c, ' ' | '\t' | '\x0c'))
    }
}

fn compute_line_index(text: &str) -> Vec<usize> {
    let bytes = text.as_bytes();
    let mut index = vec![0];
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\n' => index.push(i + 1),
            b'\r' => {
                if bytes.get(i + 1) == Some(&b'\n') {
                    i += 1;
                }
                index.push(i + 1);
            }
            _ => {}
        }
        i += 1;
    }
    index
}
